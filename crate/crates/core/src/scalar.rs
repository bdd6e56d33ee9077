//! Scalar functions accepted by the functional calculus.

use crate::error::{Error, Result};

/// Largest polynomial degree accepted by [`ScalarFn::polynomial`].
pub const MAX_POLY_DEGREE: usize = 16;

/// Piecewise-linear function through `(knots[i], values[i])`, constant
/// outside the knot range.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::invalid("table needs matching, nonempty knot and value lists"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("table knots must be strictly increasing"));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("table entries must be finite"));
        }
        Ok(Self { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0] {
            return self.values[0];
        }
        if x >= k[k.len() - 1] {
            return self.values[k.len() - 1];
        }
        let i = k.partition_point(|&t| t <= x) - 1;
        let t = (x - k[i]) / (k[i + 1] - k[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn {
    /// `x^p`; non-integer powers need `x >= 0`, nonpositive powers act on the support.
    Power(f64),
    Log2,
    Ln,
    Exp,
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
    Table(Table),
}

impl ScalarFn {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_POLY_DEGREE + 1 {
            return Err(Error::invalid(format!(
                "polynomial needs between 1 and {} coefficients",
                MAX_POLY_DEGREE + 1
            )));
        }
        Ok(ScalarFn::Polynomial(coeffs))
    }

    pub fn table(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(ScalarFn::Table(Table::new(knots, values)?))
    }

    /// Plain pointwise evaluation (NaN outside the domain).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Power(p) => {
                if p.fract() == 0.0 {
                    x.powi(*p as i32)
                } else {
                    x.powf(*p)
                }
            }
            ScalarFn::Log2 => x.log2(),
            ScalarFn::Ln => x.ln(),
            ScalarFn::Exp => x.exp(),
            ScalarFn::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
            ScalarFn::Table(t) => t.eval(x),
        }
    }

    /// Evaluation on an eigenvalue, with `cut` the support cutoff of the operator.
    pub(crate) fn eval_spectral(&self, x: f64, cut: f64) -> Result<f64> {
        let domain = || Error::DomainError { eigenvalue: x };
        match self {
            ScalarFn::Power(p) if p.fract() == 0.0 => {
                if *p > 0.0 || x.abs() > cut {
                    Ok(x.powi(*p as i32))
                } else {
                    Ok(0.0)
                }
            }
            ScalarFn::Power(p) => {
                if x < -cut {
                    Err(domain())
                } else if *p > 0.0 {
                    Ok(x.max(0.0).powf(*p))
                } else if x > cut {
                    Ok(x.powf(*p))
                } else {
                    Ok(0.0)
                }
            }
            ScalarFn::Log2 | ScalarFn::Ln => {
                if x < -cut {
                    Err(domain())
                } else if x > cut {
                    Ok(self.eval(x))
                } else {
                    Ok(0.0)
                }
            }
            _ => Ok(self.eval(x)),
        }
    }
}
