use serde::Serialize;

/// A positive real held by its natural logarithm, for quantities such as
/// `V^-V` that leave the `f64` range long before the graphs get large.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct LogScalar {
    ln: f64,
}

/// Below this the linear value is reported as underflowed.
pub const UNDERFLOW: f64 = 1e-300;

impl LogScalar {
    pub fn from_ln(ln: f64) -> Self {
        LogScalar { ln }
    }

    pub fn from_value(x: f64) -> Self {
        LogScalar { ln: x.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn log10(self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// Linear value; `0.0` once below [`UNDERFLOW`].
    pub fn value(self) -> f64 {
        if self.is_underflow() {
            0.0
        } else {
            self.ln.exp()
        }
    }

    pub fn is_underflow(self) -> bool {
        self.ln < UNDERFLOW.ln()
    }

    pub fn scale(self, factor: f64) -> Self {
        LogScalar {
            ln: self.ln + factor.ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underflow_is_flagged() {
        let tiny = LogScalar::from_ln(-1000.0);
        assert!(tiny.is_underflow());
        assert_eq!(tiny.value(), 0.0);
        let x = LogScalar::from_value(0.25);
        assert!((x.value() - 0.25).abs() < 1e-16);
        assert!((x.scale(4.0).value() - 1.0).abs() < 1e-15);
    }
}
