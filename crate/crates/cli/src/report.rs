//! CSV reports with a provenance comment line.

use sha2::{Digest, Sha256};

/// Real rendered with 17 significant digits, enough to round-trip binary64.
pub fn real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub seed: Option<u64>,
    /// `(label, sha256)` for every input file read.
    pub inputs: Vec<(String, String)>,
}

impl Provenance {
    fn line(&self) -> String {
        let mut s = format!("# layercake {}", env!("CARGO_PKG_VERSION"));
        match self.seed {
            Some(seed) => s.push_str(&format!(" seed={seed}")),
            None => s.push_str(" seed=none"),
        }
        if self.inputs.is_empty() {
            s.push_str(" input_sha256=none");
        }
        for (label, hash) in &self.inputs {
            s.push_str(&format!(" {label}_sha256={hash}"));
        }
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("row has {found} columns, header has {expected}")]
    Ragged { expected: usize, found: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvReport {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvReport {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<(), ReportError> {
        if row.len() != self.header.len() {
            return Err(ReportError::Ragged { expected: self.header.len(), found: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self, prov: &Provenance) -> Result<String, ReportError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
        let body = String::from_utf8(bytes).expect("csv output is utf-8");
        Ok(format!("{}\n{body}", prov.line()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1.1019112437185012, f64::MIN_POSITIVE, 0.0] {
            let s = real(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(real(f64::INFINITY), "inf");
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn renders_with_provenance() {
        let mut r = CsvReport::new(&["a", "b"]);
        r.push(vec!["1".into(), real(0.25)]).unwrap();
        assert!(r.push(vec!["1".into()]).is_err());
        let prov = Provenance { seed: Some(7), inputs: vec![("input".into(), sha256_hex(b"abc"))] };
        let text = r.render(&prov).unwrap();
        assert_eq!(
            text,
            "# layercake 0.1.0 seed=7 input_sha256=ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad\na,b\n1,2.5000000000000000e-1\n"
        );
        assert!(!text.contains('\r'));
    }
}
