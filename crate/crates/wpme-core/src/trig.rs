//! Seeded random trigonometric polynomials with analytic derivatives.
//!
//! Periodic test fields are finite Fourier sums with at most a few modes
//! per axis. Because every term is a product of sines and cosines, the
//! gradient and Hessian are available in closed form — they are the
//! independent oracles that the finite-difference kernels are verified
//! against.

use crate::field::ScalarField;
use crate::manifold::Manifold;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One axis factor of a product term.
#[derive(Debug, Clone, Copy)]
enum Factor {
    /// Constant 1 (axis does not participate in the term).
    One,
    /// `cos(k·ω·x)` with `ω = 2π/L`.
    Cos(u32),
    /// `sin(k·ω·x)`.
    Sin(u32),
}

impl Factor {
    #[inline]
    fn eval(self, omega: f64, x: f64) -> f64 {
        match self {
            Factor::One => 1.0,
            Factor::Cos(k) => (k as f64 * omega * x).cos(),
            Factor::Sin(k) => (k as f64 * omega * x).sin(),
        }
    }

    /// First derivative in `x`.
    #[inline]
    fn d1(self, omega: f64, x: f64) -> f64 {
        match self {
            Factor::One => 0.0,
            Factor::Cos(k) => {
                let w = k as f64 * omega;
                -w * (w * x).sin()
            }
            Factor::Sin(k) => {
                let w = k as f64 * omega;
                w * (w * x).cos()
            }
        }
    }

    /// Second derivative in `x`.
    #[inline]
    fn d2(self, omega: f64, x: f64) -> f64 {
        match self {
            Factor::One => 0.0,
            Factor::Cos(k) => {
                let w = k as f64 * omega;
                -w * w * (w * x).cos()
            }
            Factor::Sin(k) => {
                let w = k as f64 * omega;
                -w * w * (w * x).sin()
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Term {
    coeff: f64,
    factors: Vec<Factor>, // one per axis
}

/// A truncated Fourier series on the circle or torus, evaluable anywhere
/// (not tied to a grid) with analytic gradient and Hessian.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    lengths: Vec<f64>,
    offset: f64,
    terms: Vec<Term>,
}

impl TrigPoly {
    /// Draw a random polynomial with modes `1..=max_mode` per axis.
    ///
    /// Coefficients are uniform in `[-scale, scale]` damped by
    /// `decay^(k-1)` in the total mode number `k`, so higher modes carry
    /// geometrically less energy and the field stays smooth on coarse
    /// grids. `max_mode` is clamped to 4: the verification grids start at
    /// 8 nodes per axis and higher modes would be under-resolved.
    pub fn random(seed: u64, lengths: &[f64], max_mode: u32, scale: f64, decay: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_mode = max_mode.clamp(1, 4);
        let mut terms = Vec::new();
        let coeff = |rng: &mut ChaCha8Rng, total_mode: u32| {
            rng.gen_range(-1.0..1.0) * scale * decay.powi(total_mode as i32 - 1)
        };
        match lengths.len() {
            1 => {
                for k in 1..=max_mode {
                    terms.push(Term {
                        coeff: coeff(&mut rng, k),
                        factors: vec![Factor::Cos(k)],
                    });
                    terms.push(Term {
                        coeff: coeff(&mut rng, k),
                        factors: vec![Factor::Sin(k)],
                    });
                }
            }
            _ => {
                for kx in 0..=max_mode {
                    for ky in 0..=max_mode {
                        if kx == 0 && ky == 0 {
                            continue;
                        }
                        let fx: &[Factor] = if kx == 0 {
                            &[Factor::One]
                        } else {
                            &[Factor::Cos(kx), Factor::Sin(kx)]
                        };
                        let fy: &[Factor] = if ky == 0 {
                            &[Factor::One]
                        } else {
                            &[Factor::Cos(ky), Factor::Sin(ky)]
                        };
                        for &a in fx {
                            for &b in fy {
                                terms.push(Term {
                                    coeff: coeff(&mut rng, kx + ky),
                                    factors: vec![a, b],
                                });
                            }
                        }
                    }
                }
            }
        }
        Self {
            lengths: lengths.to_vec(),
            offset: 0.0,
            terms,
        }
    }

    /// Single pure mode `amplitude · Π_a cos(2π k_a x_a / L_a)` (axes with
    /// `k_a = 0` contribute a factor 1). Handy for hand-checkable fields.
    pub fn cosine(lengths: &[f64], modes: &[u32], amplitude: f64) -> Self {
        let factors = modes
            .iter()
            .map(|&k| if k == 0 { Factor::One } else { Factor::Cos(k) })
            .collect();
        Self {
            lengths: lengths.to_vec(),
            offset: 0.0,
            terms: vec![Term {
                coeff: amplitude,
                factors,
            }],
        }
    }

    /// Add a constant offset (returns a new polynomial).
    pub fn with_offset(mut self, c: f64) -> Self {
        self.offset += c;
        self
    }

    #[inline]
    fn omega(&self, axis: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.lengths[axis]
    }

    /// Value at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut sum = self.offset;
        for t in &self.terms {
            let mut prod = t.coeff;
            for (a, f) in t.factors.iter().enumerate() {
                prod *= f.eval(self.omega(a), x[a]);
            }
            sum += prod;
        }
        sum
    }

    /// Analytic gradient at `x`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let dim = self.lengths.len();
        let mut g = vec![0.0; dim];
        for t in &self.terms {
            for (a, ga) in g.iter_mut().enumerate() {
                let mut prod = t.coeff;
                for (b, f) in t.factors.iter().enumerate() {
                    let om = self.omega(b);
                    prod *= if a == b { f.d1(om, x[b]) } else { f.eval(om, x[b]) };
                }
                *ga += prod;
            }
        }
        g
    }

    /// Analytic Hessian entry `∂_a ∂_b` at `x`.
    pub fn hess_entry(&self, x: &[f64], a: usize, b: usize) -> f64 {
        let mut sum = 0.0;
        for t in &self.terms {
            let mut prod = t.coeff;
            for (c, f) in t.factors.iter().enumerate() {
                let om = self.omega(c);
                prod *= if a == b && c == a {
                    f.d2(om, x[c])
                } else if c == a || c == b {
                    f.d1(om, x[c])
                } else {
                    f.eval(om, x[c])
                };
            }
            sum += prod;
        }
        sum
    }

    /// Sum of absolute coefficients — a cheap upper bound for
    /// `‖poly − offset‖_∞`, used to validate positivity of initial data.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Sample onto a grid.
    pub fn sample(&self, manifold: &Arc<Manifold>) -> ScalarField {
        assert_eq!(
            manifold.lengths(),
            self.lengths.as_slice(),
            "trig polynomial sampled on a manifold with different side lengths"
        );
        ScalarField::from_fn(manifold, |x| self.eval(x))
    }
}
