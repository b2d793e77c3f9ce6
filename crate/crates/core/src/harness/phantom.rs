//! Deterministic test signals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::Signal;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phantom {
    /// 0 on the first half, 1 on the second.
    Step,
    /// 1 on `[n/4, 3n/4)`, 0 elsewhere.
    Bump,
    /// `i / (n - 1)`.
    Ramp,
}

impl Phantom {
    pub fn name(&self) -> &'static str {
        match self {
            Phantom::Step => "step",
            Phantom::Bump => "bump",
            Phantom::Ramp => "ramp",
        }
    }

    pub fn generate<T: Scalar>(&self, n: usize, grid_spacing: T) -> Result<Signal<T>> {
        if n < 2 {
            return Err(Error::Config(format!("phantom dimension must be at least 2, got {n}")));
        }
        let values = (0..n)
            .map(|i| match self {
                Phantom::Step => {
                    if i < n / 2 {
                        T::zero()
                    } else {
                        T::one()
                    }
                }
                Phantom::Bump => {
                    if i >= n / 4 && i < 3 * n / 4 {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                Phantom::Ramp => T::from_usize_lossy(i) / T::from_usize_lossy(n - 1),
            })
            .collect();
        Signal::with_spacing(values, grid_spacing)
    }
}

impl std::str::FromStr for Phantom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(Phantom::Step),
            "bump" => Ok(Phantom::Bump),
            "ramp" => Ok(Phantom::Ramp),
            other => Err(Error::Config(format!("unknown phantom `{other}` (expected step, bump or ramp)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalties::Penalty;

    #[test]
    fn step_halves() {
        let s = Phantom::Step.generate(8, 1.0).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn bump_quadratic_value() {
        let b = Phantom::Bump.generate(4, 1.0).unwrap();
        assert_eq!(b.values(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(Penalty::Quadratic.eval(&b), 1.0);
    }

    #[test]
    fn ramp_endpoints() {
        let r = Phantom::Ramp.generate::<f64>(5, 0.25).unwrap();
        assert_eq!(r.values()[0], 0.0);
        assert_eq!(r.values()[4], 1.0);
        assert_eq!(r.grid_spacing(), 0.25);
    }

    #[test]
    fn names_round_trip() {
        for p in [Phantom::Step, Phantom::Bump, Phantom::Ramp] {
            assert_eq!(p.name().parse::<Phantom>().unwrap(), p);
        }
        assert!("spike".parse::<Phantom>().is_err());
        assert!(serde_json::from_str::<Phantom>("\"spike\"").is_err());
    }
}
