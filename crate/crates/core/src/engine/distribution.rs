use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp};

/// Delay a component proposes in the race, in time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayDistribution {
    Uniform { lo: f64, hi: f64 },
    /// `offset + Exp(rate)`: no output is possible before `offset`.
    Exponential { rate: f64, offset: f64 },
    Dirac(f64),
    /// The component cannot output.
    Never,
}

impl DelayDistribution {
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            DelayDistribution::Uniform { lo, hi } => {
                if hi > lo {
                    lo + (hi - lo) * rng.random::<f64>()
                } else {
                    lo
                }
            }
            DelayDistribution::Exponential { rate, offset } => match Exp::new(rate) {
                Ok(d) => offset + d.sample(rng),
                Err(_) => f64::INFINITY,
            },
            DelayDistribution::Dirac(d) => d,
            DelayDistribution::Never => f64::INFINITY,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DelayDistribution::Uniform { lo, hi } => (lo + hi) / 2.0,
            DelayDistribution::Exponential { rate, offset } => offset + 1.0 / rate,
            DelayDistribution::Dirac(d) => d,
            DelayDistribution::Never => f64::INFINITY,
        }
    }
}

/// Index of the minimal delay; ties are broken uniformly at random.
/// Draws from `rng` only when there is a tie.
pub fn argmin_uniform(delays: &[f64], rng: &mut dyn RngCore) -> Option<usize> {
    let min = delays.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let ties = delays.iter().filter(|&&d| d == min).count();
    let pick = if ties > 1 {
        rng.random_range(0..ties)
    } else {
        0
    };
    delays
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == min)
        .nth(pick)
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::run_rng;

    #[test]
    fn exponential_race_law() {
        let mut rng = run_rng(11, 0);
        let a = DelayDistribution::Exponential {
            rate: 2.0,
            offset: 0.0,
        };
        let b = DelayDistribution::Exponential {
            rate: 3.0,
            offset: 0.0,
        };
        let n = 100_000;
        let mut wins = 0;
        for _ in 0..n {
            let d = [a.sample(&mut rng), b.sample(&mut rng)];
            if argmin_uniform(&d, &mut rng) == Some(0) {
                wins += 1;
            }
        }
        let p = wins as f64 / n as f64;
        assert!((p - 0.4).abs() < 0.01, "{p}");
    }

    #[test]
    fn ties_are_split_evenly() {
        let mut rng = run_rng(3, 0);
        let mut first = 0;
        for _ in 0..10_000 {
            if argmin_uniform(&[0.0, 1.0, 0.0], &mut rng) == Some(0) {
                first += 1;
            }
        }
        assert!((first as f64 / 10_000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn degenerate_cases() {
        let mut rng = run_rng(0, 0);
        assert_eq!(argmin_uniform(&[f64::INFINITY], &mut rng), None);
        assert_eq!(DelayDistribution::Dirac(0.0).sample(&mut rng), 0.0);
        let u = DelayDistribution::Uniform { lo: 0.0, hi: 4.0 };
        assert_eq!(u.mean(), 2.0);
        for _ in 0..100 {
            let d = u.sample(&mut rng);
            assert!((0.0..4.0).contains(&d));
        }
    }
}
