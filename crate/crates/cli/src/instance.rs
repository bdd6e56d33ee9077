//! JSON instance files for channels, ensembles and states.

use layercake::channel::QuantumChannel;
use layercake::{BipartiteState, CMatrix, Complex64, CqChannel, CqEnsemble, DensityOp};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Row-major rows of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    CqChannel,
    CqEnsemble,
    BipartiteState,
    QuantumChannel,
}

impl std::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InstanceKind::CqChannel => "cq_channel",
            InstanceKind::CqEnsemble => "cq_ensemble",
            InstanceKind::BipartiteState => "bipartite_state",
            InstanceKind::QuantumChannel => "quantum_channel",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported instance version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("instance of kind {kind} is missing `{field}`")]
    Missing { kind: InstanceKind, field: &'static str },
    #[error("instance shape error: {0}")]
    Shape(String),
    #[error("expected a {expected} instance, found {found}")]
    KindMismatch { expected: &'static str, found: InstanceKind },
    #[error(transparent)]
    Invalid(#[from] layercake::Error),
}

/// On-disk form. Fields not used by a kind are omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub kind: InstanceKind,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<JsonMatrix>>,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub enum Instance {
    CqChannel { channel: CqChannel, prior: Option<Vec<f64>> },
    CqEnsemble(CqEnsemble),
    Bipartite(BipartiteState),
    Quantum(QuantumChannel),
}

fn to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn from_json(m: &JsonMatrix, rows: usize, cols: usize) -> Result<CMatrix, InstanceError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(InstanceError::Shape(format!("expected a {rows}x{cols} matrix")));
    }
    if m.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(InstanceError::Shape("matrix entries must be finite".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

fn density(m: &JsonMatrix, dim: usize) -> Result<DensityOp, InstanceError> {
    Ok(DensityOp::from_matrix(from_json(m, dim, dim)?)?)
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(InstanceError::Version(file.version));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }

    fn dims_exact(&self, n: usize) -> Result<&[usize], InstanceError> {
        if self.dims.len() != n || self.dims.contains(&0) {
            return Err(InstanceError::Shape(format!("{} needs {n} positive dims", self.kind)));
        }
        Ok(&self.dims)
    }

    /// Decodes and re-validates every invariant of the described object.
    pub fn decode(&self) -> Result<Instance, InstanceError> {
        let missing = |field| InstanceError::Missing { kind: self.kind, field };
        match self.kind {
            InstanceKind::CqChannel | InstanceKind::CqEnsemble => {
                let d = self.dims_exact(1)?[0];
                let states = self.states.as_ref().ok_or_else(|| missing("states"))?;
                let states = states.iter().map(|m| density(m, d)).collect::<Result<Vec<_>, _>>()?;
                if self.kind == InstanceKind::CqEnsemble {
                    let prior = self.prior.clone().ok_or_else(|| missing("prior"))?;
                    Ok(Instance::CqEnsemble(CqEnsemble::new(prior, states)?))
                } else {
                    let channel = CqChannel::new(states)?;
                    if let Some(p) = &self.prior {
                        channel.with_prior(p.clone())?;
                    }
                    Ok(Instance::CqChannel { channel, prior: self.prior.clone() })
                }
            }
            InstanceKind::BipartiteState => {
                let d = self.dims_exact(2)?;
                let m = self.state.as_ref().ok_or_else(|| missing("state"))?;
                Ok(Instance::Bipartite(BipartiteState::new(density(m, d[0] * d[1])?, d[0], d[1])?))
            }
            InstanceKind::QuantumChannel => {
                let d = self.dims_exact(2)?;
                let kraus = self.kraus.as_ref().ok_or_else(|| missing("kraus"))?;
                let kraus = kraus.iter().map(|k| from_json(k, d[1], d[0])).collect::<Result<Vec<_>, _>>()?;
                Ok(Instance::Quantum(QuantumChannel::new(kraus)?))
            }
        }
    }

    pub fn from_ensemble(ens: &CqEnsemble) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: InstanceKind::CqEnsemble,
            dims: vec![ens.dim()],
            prior: Some(ens.prior().to_vec()),
            states: Some(ens.states().iter().map(|s| to_json(s.matrix())).collect()),
            state: None,
            kraus: None,
        }
    }

    pub fn from_channel(channel: &CqChannel) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: InstanceKind::CqChannel,
            dims: vec![channel.dim()],
            prior: None,
            states: Some(channel.states().iter().map(|s| to_json(s.matrix())).collect()),
            state: None,
            kraus: None,
        }
    }

    pub fn from_bipartite(state: &BipartiteState) -> Self {
        let (dr, db) = state.dims();
        Self {
            version: FORMAT_VERSION,
            kind: InstanceKind::BipartiteState,
            dims: vec![dr, db],
            prior: None,
            states: None,
            state: Some(to_json(state.state().matrix())),
            kraus: None,
        }
    }

    pub fn from_quantum_channel(channel: &QuantumChannel) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: InstanceKind::QuantumChannel,
            dims: vec![channel.dim_in(), channel.dim_out()],
            prior: None,
            states: None,
            state: None,
            kraus: Some(channel.kraus().iter().map(to_json).collect()),
        }
    }
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::CqChannel { .. } => InstanceKind::CqChannel,
            Instance::CqEnsemble(_) => InstanceKind::CqEnsemble,
            Instance::Bipartite(_) => InstanceKind::BipartiteState,
            Instance::Quantum(_) => InstanceKind::QuantumChannel,
        }
    }

    /// A c-q ensemble; a bare channel gets its declared prior or the uniform one.
    pub fn into_ensemble(self) -> Result<CqEnsemble, InstanceError> {
        match self {
            Instance::CqEnsemble(e) => Ok(e),
            Instance::CqChannel { channel, prior } => {
                let k = channel.alphabet_size();
                Ok(channel.with_prior(prior.unwrap_or_else(|| vec![1.0 / k as f64; k]))?)
            }
            other => Err(InstanceError::KindMismatch { expected: "cq_channel or cq_ensemble", found: other.kind() }),
        }
    }

    pub fn into_bipartite(self) -> Result<BipartiteState, InstanceError> {
        match self {
            Instance::Bipartite(s) => Ok(s),
            other => Err(InstanceError::KindMismatch { expected: "bipartite_state", found: other.kind() }),
        }
    }

    pub fn into_quantum_channel(self) -> Result<QuantumChannel, InstanceError> {
        match self {
            Instance::Quantum(c) => Ok(c),
            other => Err(InstanceError::KindMismatch { expected: "quantum_channel", found: other.kind() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT_PAIR: &str = r#"{
  "version": 1,
  "kind": "cq_ensemble",
  "dims": [2],
  "prior": [0.25, 0.75],
  "states": [
    [[[0.8, 0.0], [0.1, -0.2]], [[0.1, 0.2], [0.2, 0.0]]],
    [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
  ]
}"#;

    #[test]
    fn decodes_and_reencodes() {
        let file = InstanceFile::parse(QUBIT_PAIR).unwrap();
        let ens = file.decode().unwrap().into_ensemble().unwrap();
        assert_eq!(ens.prior(), &[0.25, 0.75]);
        assert_eq!(ens.state(0).matrix()[(0, 1)], Complex64::new(0.1, -0.2));
        let again = InstanceFile::from_ensemble(&ens);
        assert_eq!(again, file);
    }

    #[test]
    fn rejects_bad_files() {
        let bad_version = QUBIT_PAIR.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(InstanceFile::parse(&bad_version), Err(InstanceError::Version(2))));
        let not_hermitian = QUBIT_PAIR.replace("[0.1, 0.2]", "[0.1, 0.3]");
        let f = InstanceFile::parse(&not_hermitian).unwrap();
        assert!(matches!(f.decode(), Err(InstanceError::Invalid(_))));
        let bad_prior = QUBIT_PAIR.replace("0.75", "0.7");
        assert!(InstanceFile::parse(&bad_prior).unwrap().decode().is_err());
        let extra = QUBIT_PAIR.replace("\"dims\"", "\"colour\": 1, \"dims\"");
        assert!(InstanceFile::parse(&extra).is_err());
        let scalar = QUBIT_PAIR.replace("[0.8, 0.0]", "0.8");
        assert!(InstanceFile::parse(&scalar).is_err());
        let wrong = InstanceFile::parse(QUBIT_PAIR).unwrap().decode().unwrap();
        assert!(matches!(wrong.into_bipartite(), Err(InstanceError::KindMismatch { .. })));
    }

    #[test]
    fn channel_without_prior_is_uniform() {
        let text = r#"{"version":1,"kind":"cq_channel","dims":[1],"states":[[[[1,0]]],[[[1,0]]],[[[1,0]]]]}"#;
        let ens = InstanceFile::parse(text).unwrap().decode().unwrap().into_ensemble().unwrap();
        assert_eq!(ens.prior(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn quantum_channel_shapes() {
        let id = QuantumChannel::identity(2);
        let f = InstanceFile::from_quantum_channel(&id);
        let back = InstanceFile::parse(&f.to_json()).unwrap().decode().unwrap().into_quantum_channel().unwrap();
        assert_eq!(back, id);
        let mut wrong = f.clone();
        wrong.dims = vec![2, 3];
        assert!(matches!(wrong.decode(), Err(InstanceError::Shape(_))));
    }
}
