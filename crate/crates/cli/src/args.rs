use std::path::PathBuf;

use mum_core::document::{read_text, state_from_json};
use mum_core::{random_state, DensityMatrix, MumError};

/// Where the input state of `tomo` and `entropy` comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    /// `I/d`
    Mixed,
    Random {
        rank: usize,
        seed: u64,
    },
    File(PathBuf),
}

impl StateSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "mixed" {
            return Ok(Self::Mixed);
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let (rank, seed) = rest
                .split_once(':')
                .ok_or_else(|| format!("expected random:RANK:SEED, got {s:?}"))?;
            let rank = rank
                .parse()
                .map_err(|_| format!("rank {rank:?} is not a positive integer"))?;
            let seed = seed
                .parse()
                .map_err(|_| format!("seed {seed:?} is not a non-negative integer"))?;
            return Ok(Self::Random { rank, seed });
        }
        Ok(Self::File(PathBuf::from(s)))
    }

    pub fn load(&self, dim: usize) -> Result<DensityMatrix, MumError> {
        let rho = match self {
            Self::Mixed => DensityMatrix::maximally_mixed(dim),
            Self::Random { rank, seed } => random_state(dim, *rank, *seed)?,
            Self::File(path) => state_from_json(&read_text(path)?)?,
        };
        if rho.dim() != dim {
            return Err(MumError::DimensionMismatch {
                left: dim,
                right: rho.dim(),
            });
        }
        Ok(rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    Value(f64),
    /// `1/d`
    Min,
    /// Largest buildable κ of the grid.
    Opt,
}

/// `A:B:STEPS`, expanded to `STEPS` evenly spaced values in the half-open
/// interval `(A, B]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaRange {
    pub lo: Endpoint,
    pub hi: Endpoint,
    pub steps: usize,
}

fn parse_endpoint(s: &str) -> Result<Endpoint, String> {
    match s {
        "min" => Ok(Endpoint::Min),
        "opt" | "max" => Ok(Endpoint::Opt),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Endpoint::Value)
            .ok_or_else(|| format!("{s:?} is not a number, \"min\" or \"opt\"")),
    }
}

impl KappaRange {
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(format!("expected A:B:STEPS, got {s:?}"));
        };
        let steps: usize = steps
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("steps {steps:?} is not a positive integer"))?;
        Ok(Self {
            lo: parse_endpoint(lo)?,
            hi: parse_endpoint(hi)?,
            steps,
        })
    }

    pub fn values(&self, dim: usize, kappa_opt: f64) -> Vec<f64> {
        let resolve = |e: Endpoint| match e {
            Endpoint::Value(x) => x,
            Endpoint::Min => 1.0 / dim as f64,
            Endpoint::Opt => kappa_opt,
        };
        let (a, b) = (resolve(self.lo), resolve(self.hi));
        (1..=self.steps)
            .map(|i| {
                if i == self.steps {
                    b
                } else {
                    a + (b - a) * i as f64 / self.steps as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_specs() {
        assert_eq!(StateSpec::parse("mixed"), Ok(StateSpec::Mixed));
        assert_eq!(
            StateSpec::parse("random:3:42"),
            Ok(StateSpec::Random { rank: 3, seed: 42 })
        );
        assert_eq!(
            StateSpec::parse("rho.json"),
            Ok(StateSpec::File("rho.json".into()))
        );
        assert!(StateSpec::parse("random:3").is_err());
        assert!(StateSpec::parse("random:x:1").is_err());
    }

    #[test]
    fn random_state_rank_is_checked() {
        let e = StateSpec::Random { rank: 4, seed: 1 }.load(3).unwrap_err();
        assert_eq!(e, MumError::RankOutOfRange { rank: 4, dim: 3 });
    }

    #[test]
    fn kappa_ranges() {
        let r = KappaRange::parse("min:opt:4").unwrap();
        let v = r.values(6, 2.0 / 9.0);
        assert_eq!(v.len(), 4);
        assert!(v[0] > 1.0 / 6.0);
        assert_eq!(v[3], 2.0 / 9.0);
        let v = KappaRange::parse("0.2:0.3:2").unwrap().values(4, 0.375);
        assert!((v[0] - 0.25).abs() < 1e-15);
        assert_eq!(v[1], 0.3);
        assert!(KappaRange::parse("0.2:0.3").is_err());
        assert!(KappaRange::parse("0.2:0.3:0").is_err());
        assert!(KappaRange::parse("a:0.3:2").is_err());
    }
}
