use crate::error::{Error, Result};

/// Dimensions and sparsity budget of a WTA projection model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelConfig {
    /// Input dimension.
    pub d: usize,
    /// Output dimension `d'`.
    pub d_out: usize,
    /// Hash length: ones per output code.
    pub k: usize,
    /// Ones per projection row.
    pub c: usize,
    pub seed: u64,
}

/// `floor(0.1 * d)`, clamped to at least one.
pub fn default_c(d: usize) -> usize {
    (d / 10).max(1)
}

impl ModelConfig {
    /// Validated config. `c` falls back to [`default_c`] when `None`.
    pub fn new(d: usize, d_out: usize, k: usize, c: Option<usize>, seed: u64) -> Result<Self> {
        let cfg = Self {
            d,
            d_out,
            k,
            c: c.unwrap_or_else(|| default_c(d)),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be positive".into()));
        }
        if self.k == 0 || self.k >= self.d_out {
            return Err(Error::InvalidArgument(format!(
                "k must satisfy 1 <= k < d_out (k = {}, d_out = {})",
                self.k, self.d_out
            )));
        }
        if self.c == 0 || self.c > self.d {
            return Err(Error::InvalidArgument(format!(
                "c must satisfy 1 <= c <= d (c = {}, d = {})",
                self.c, self.d
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_c_is_a_tenth_of_d() {
        assert_eq!(ModelConfig::new(1000, 2000, 4, None, 0).unwrap().c, 100);
        assert_eq!(ModelConfig::new(128, 2000, 4, None, 0).unwrap().c, 12);
        assert_eq!(ModelConfig::new(5, 20, 4, None, 0).unwrap().c, 1);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelConfig::new(10, 4, 4, None, 0).is_err());
        assert!(ModelConfig::new(10, 4, 0, None, 0).is_err());
        assert!(ModelConfig::new(10, 40, 4, Some(11), 0).is_err());
        assert!(ModelConfig::new(10, 40, 4, Some(0), 0).is_err());
        assert!(ModelConfig::new(0, 40, 4, Some(1), 0).is_err());
    }
}
