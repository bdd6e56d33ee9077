//! `a,b,c` lists and inclusive `start:stop:step` ranges.

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{spec}` must be start:stop:step"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(format!("range `{spec}` needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(format!("range `{spec}` has too many points"));
        }
        let mut out: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
        let last = out.len() - 1;
        if (out[last] - stop).abs() <= 1e-9 * step {
            out[last] = stop;
        }
        Ok(out)
    } else {
        let out = spec
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(out)
    }
}

pub fn parse_list(spec: &str) -> Result<Vec<usize>, String> {
    spec.split(',').map(|s| s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"))).collect()
}
