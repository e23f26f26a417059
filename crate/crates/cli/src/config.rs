//! Check configuration: the identity under test, shape parameters,
//! precision and truncation settings, and reproducibility seed.

use serde::{Deserialize, Serialize};

use bcjack_core::indexsets::binom;
use bcjack_core::{Error, Result};

/// Which identity a check run verifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Identity {
    Bailey,
    Slater,
    Duality,
    Delta,
    MethodAgreement,
    QuasiPeriodicity,
    TransitionDet,
    OneCoordinate,
    Vandiejen,
    Wronskian,
    Connection,
    LatticeInvariance,
}

impl Identity {
    pub const ALL: [Identity; 12] = [
        Identity::Bailey,
        Identity::Slater,
        Identity::Duality,
        Identity::Delta,
        Identity::MethodAgreement,
        Identity::QuasiPeriodicity,
        Identity::TransitionDet,
        Identity::OneCoordinate,
        Identity::Vandiejen,
        Identity::Wronskian,
        Identity::Connection,
        Identity::LatticeInvariance,
    ];

    /// True for checks built on truncated lattice sums.
    pub fn uses_lattice(self) -> bool {
        matches!(
            self,
            Identity::Vandiejen
                | Identity::Wronskian
                | Identity::Connection
                | Identity::LatticeInvariance
        )
    }

    /// Default shape (s, n, r) when flags leave them unset.
    pub fn default_shape(self) -> (usize, usize, usize) {
        match self {
            Identity::Bailey => (1, 1, 3),
            Identity::Slater => (2, 1, 4),
            Identity::Duality => (2, 2, 4),
            Identity::Delta => (2, 2, 4),
            Identity::MethodAgreement => (2, 2, 4),
            Identity::QuasiPeriodicity => (2, 2, 4),
            Identity::TransitionDet => (2, 2, 4),
            Identity::OneCoordinate => (2, 2, 4),
            Identity::Vandiejen => (1, 2, 3),
            Identity::Wronskian => (2, 1, 4),
            Identity::Connection => (2, 1, 4),
            Identity::LatticeInvariance => (2, 1, 4),
        }
    }

    /// Default residual floor; lattice checks combine it with the shell
    /// error as `max(floor, 20 * shell_error)`.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Identity::Bailey => 1e-25,
            Identity::Slater => 1e-20,
            Identity::Duality => 1e-25,
            Identity::Delta => 1e-28,
            Identity::MethodAgreement => 1e-25,
            Identity::QuasiPeriodicity => 1e-25,
            Identity::TransitionDet => 1e-20,
            Identity::OneCoordinate => 1e-25,
            Identity::Vandiejen => 1e-15,
            Identity::Wronskian => 1e-10,
            Identity::Connection => 1e-10,
            Identity::LatticeInvariance => 1e-15,
        }
    }
}

/// Full configuration of one check run. The seed determines the sampled
/// parameter stream completely: sample `i` draws from a generator keyed by
/// `(seed, i)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckConfig {
    pub identity: Identity,
    pub s: usize,
    pub n: usize,
    pub r: usize,
    pub precision_bits: u32,
    pub radius: u32,
    pub samples: usize,
    pub seed: u64,
    /// Residual floor override; `None` uses the per-identity default.
    pub tolerance: Option<f64>,
    /// Fixed real base; `None` samples q per sample from the documented band.
    pub q: Option<f64>,
}

impl CheckConfig {
    pub fn new(identity: Identity) -> Self {
        let (s, n, r) = identity.default_shape();
        CheckConfig {
            identity,
            s,
            n,
            r,
            precision_bits: 256,
            radius: if n <= 2 { 40 } else { 25 },
            samples: 20,
            seed: 1,
            tolerance: None,
            q: None,
        }
    }

    pub fn effective_tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.identity.default_tolerance())
    }

    /// Validate shapes against the desk-scale caps.
    pub fn validate(&self) -> Result<()> {
        if self.s < 1 || self.n < 1 {
            return Err(Error::Config(format!("s = {}, n = {} must be >= 1", self.s, self.n)));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.precision_bits < 64 || self.precision_bits > 4096 {
            return Err(Error::Config(format!(
                "precision_bits = {} outside [64, 4096]",
                self.precision_bits
            )));
        }
        if let Some(q) = self.q {
            if !(0.0 < q && q < 1.0) {
                return Err(Error::Config(format!("q = {q} outside (0, 1)")));
            }
        }
        let size = binom((self.s + self.n - 1) as i64, self.n as i64);
        match self.identity {
            Identity::Bailey => {}
            Identity::Slater => {
                if !(3..=6).contains(&self.r) {
                    return Err(Error::Config(format!("r = {} outside [3, 6]", self.r)));
                }
            }
            Identity::Vandiejen => {
                if self.s != 1 {
                    return Err(Error::Config("the closed summation needs s = 1".into()));
                }
                if self.n > 3 {
                    return Err(Error::Config(format!("n = {} above cap 3", self.n)));
                }
            }
            Identity::Wronskian | Identity::Connection | Identity::LatticeInvariance => {
                if self.n > 3 || size > 6 {
                    return Err(Error::Config(format!(
                        "lattice-matrix check needs n <= 3 and |Z_(s,n)| <= 6, got n = {}, size = {size}",
                        self.n
                    )));
                }
            }
            _ => {
                if self.n > 4 || self.s > 6 || size > 35 {
                    return Err(Error::Config(format!(
                        "interpolation check capped at s <= 6, n <= 4, |Z| <= 35, got {}x{}",
                        self.s, self.n
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wronskian_cap_rejected() {
        let mut cfg = CheckConfig::new(Identity::Wronskian);
        cfg.s = 3;
        cfg.n = 3;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn defaults_validate() {
        for id in Identity::ALL {
            let cfg = CheckConfig::new(id);
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = CheckConfig::new(Identity::Bailey);
        let text = toml::to_string(&cfg).unwrap();
        let back: CheckConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.identity, cfg.identity);
        assert_eq!(back.seed, cfg.seed);
    }
}
