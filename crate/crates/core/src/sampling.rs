//! Seeded random rational sample points, with redraw on poles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Redraw budget per sample point.
pub const MAX_REDRAWS: usize = 100;

/// Largest numerator/denominator of a sampled point.
const HEIGHT: i64 = 30;

/// Source of spectral sample points. Each verification job owns one.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    redraws: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            redraws: 0,
        }
    }

    /// A nonzero rational `±p/q` with `1 <= p, q <= 30`, excluding `±1`.
    pub fn point(&mut self) -> Rat {
        loop {
            let p = self.rng.gen_range(1..=HEIGHT);
            let q = self.rng.gen_range(1..=HEIGHT);
            if p == q {
                continue;
            }
            let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
            return Rat::new(sign * p, q);
        }
    }

    /// A positive rational `p/q` with `1 <= p, q <= 30`.
    pub fn positive(&mut self) -> Rat {
        let p = self.rng.gen_range(1..=HEIGHT);
        let q = self.rng.gen_range(1..=HEIGHT);
        Rat::new(p, q)
    }

    /// A positive rational different from 1.
    pub fn positive_not_one(&mut self) -> Rat {
        loop {
            let r = self.positive();
            if !r.is_one() {
                return r;
            }
        }
    }

    /// Draws until `eval` does not hit a pole. Pole-type errors are
    /// redrawn (at most [`MAX_REDRAWS`] times); other errors pass through.
    pub fn draw<T>(&mut self, mut eval: impl FnMut(&mut Self) -> Result<T>) -> Result<T> {
        for _ in 0..MAX_REDRAWS {
            match eval(self) {
                Ok(v) => return Ok(v),
                Err(e) if is_pole(&e) => self.redraws += 1,
                Err(e) => return Err(e),
            }
        }
        Err(Error::SampleRedrawExhausted {
            attempts: MAX_REDRAWS,
        })
    }

    /// Number of pole-hitting draws so far.
    pub fn redraws(&self) -> usize {
        self.redraws
    }
}

fn is_pole(e: &Error) -> bool {
    matches!(
        e,
        Error::SpectralPole { .. } | Error::SingularAt { .. } | Error::SingularMatrix
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        let mut a = Sampler::new(11);
        let mut b = Sampler::new(11);
        for _ in 0..20 {
            assert_eq!(a.point(), b.point());
        }
    }

    #[test]
    fn points_are_generic() {
        let mut s = Sampler::new(3);
        for _ in 0..500 {
            let x = s.point();
            assert!(!x.is_zero());
            assert!(x.abs() != Rat::one());
        }
    }

    #[test]
    fn redraws_poles_and_counts_them() {
        let mut s = Sampler::new(5);
        let mut calls = 0;
        let v = s
            .draw(|s| {
                calls += 1;
                if calls < 4 {
                    Err(Error::SpectralPole { x: s.point() })
                } else {
                    Ok(calls)
                }
            })
            .unwrap();
        assert_eq!(v, 4);
        assert_eq!(s.redraws(), 3);
    }

    #[test]
    fn redraw_budget_is_capped() {
        let mut s = Sampler::new(5);
        let r: Result<()> = s.draw(|_| Err(Error::SingularMatrix));
        assert_eq!(r, Err(Error::SampleRedrawExhausted { attempts: 100 }));
        let r: Result<()> = s.draw(|_| Err(Error::DegenerateQ));
        assert_eq!(r, Err(Error::DegenerateQ));
    }
}
