//! Marginal and average embodied-energy curves (MEECs).
//!
//! The marginal curve `γ(Q)` is the primitive. The cumulative transfer
//! `G(Q)` is its integral (closed form for both technology kinds, with
//! adaptive quadrature as an independent route), the average is `G/Q`, and
//! the quantity elasticity of the average follows as `γ/γ^A - 1`.

use crate::error::{SolveError, SolveResult};
use crate::model::{PrimeMoverType, RequirementProfile, Technology};
use crate::numerics::adaptive_simpson;
use crate::par::{self, Execution};

/// One sample of a good's embodied-energy curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeecPoint {
    pub quantity: f64,
    pub marginal: f64,
    pub average: f64,
    pub cumulative: f64,
    pub elasticity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Input {
    mover: usize,
    coef: f64,
    omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Minimised input-energy cost `C(Q) = K (Q/A)^{1/B}` at prices `ω_l`.
    CobbDouglas { scale: f64, rts: f64, ln_k: f64 },
    Fixed { weighted: f64, profile: RequirementProfile },
}

/// A technology bound to mover energies and a requirement multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbodiedCurve {
    shape: Shape,
    inputs: Vec<Input>,
    multiplier: f64,
}

impl EmbodiedCurve {
    pub fn new(tech: &Technology, movers: &[PrimeMoverType], multiplier: f64) -> SolveResult<Self> {
        if !(multiplier > 0.0 && multiplier.is_finite()) {
            return Err(SolveError::BadMultiplier(multiplier));
        }
        let bind = |list: &[(usize, f64)]| -> SolveResult<Vec<Input>> {
            list.iter()
                .map(|&(mover, coef)| {
                    movers
                        .get(mover)
                        .map(|m| Input {
                            mover,
                            coef,
                            omega: m.total_transfer(),
                        })
                        .ok_or(SolveError::UnknownMover(mover))
                })
                .collect()
        };
        match tech {
            Technology::CobbDouglas { scale, exponents } => {
                let inputs = bind(exponents)?;
                let rts: f64 = inputs.iter().map(|i| i.coef).sum();
                let ln_k = rts.ln()
                    + inputs
                        .iter()
                        .map(|i| i.coef / rts * (i.omega / i.coef).ln())
                        .sum::<f64>();
                Ok(EmbodiedCurve {
                    shape: Shape::CobbDouglas {
                        scale: *scale,
                        rts,
                        ln_k,
                    },
                    inputs,
                    multiplier,
                })
            }
            Technology::FixedProportions {
                requirements,
                profile,
            } => {
                let inputs = bind(requirements)?;
                let weighted = inputs.iter().map(|i| i.coef * i.omega).sum();
                Ok(EmbodiedCurve {
                    shape: Shape::Fixed {
                        weighted,
                        profile: *profile,
                    },
                    inputs,
                    multiplier,
                })
            }
        }
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn is_cobb_douglas(&self) -> bool {
        matches!(self.shape, Shape::CobbDouglas { .. })
    }

    /// Movers with a positive coefficient (`L` for this good).
    pub fn movers(&self) -> impl Iterator<Item = usize> + '_ {
        self.inputs.iter().map(|i| i.mover)
    }

    pub fn used_count(&self) -> usize {
        self.inputs.len()
    }

    /// Unscaled cost `C(Q)` for Cobb-Douglas, `h(Q)` for fixed proportions.
    fn base_cumulative(&self, q: f64) -> f64 {
        match &self.shape {
            Shape::CobbDouglas { scale, rts, ln_k } => {
                if q == 0.0 {
                    0.0
                } else {
                    (ln_k + (q / scale).ln() / rts).exp()
                }
            }
            Shape::Fixed { weighted, profile } => weighted * profile.cumulative(q),
        }
    }

    /// `γ(Q)`, joules per unit.
    pub fn marginal(&self, q: f64) -> f64 {
        let base = match &self.shape {
            Shape::CobbDouglas { scale, rts, ln_k } => {
                if q == 0.0 {
                    0.0
                } else {
                    (ln_k - rts.ln() - scale.ln() / rts + (1.0 / rts - 1.0) * q.ln()).exp()
                }
            }
            Shape::Fixed { weighted, profile } => weighted * profile.marginal(q),
        };
        self.multiplier * base
    }

    /// `G(Q) = ∫_0^Q γ`, closed form.
    pub fn cumulative(&self, q: f64) -> f64 {
        self.multiplier * self.base_cumulative(q)
    }

    /// `G(Q)` by adaptive Simpson on `γ`, tolerance `1e-10` relative to the
    /// crude estimate `γ(Q) Q`.
    pub fn cumulative_by_quadrature(&self, q: f64) -> f64 {
        let scale = (self.marginal(q) * q).abs().max(f64::MIN_POSITIVE);
        adaptive_simpson(|x| self.marginal(x), 0.0, q, 1e-10 * scale, 50)
    }

    /// `γ^A(Q) = G(Q)/Q`; at `Q = 0` the continuous limit.
    pub fn average(&self, q: f64) -> f64 {
        if q > 0.0 {
            self.cumulative(q) / q
        } else {
            match self.shape {
                Shape::CobbDouglas { .. } => 0.0,
                Shape::Fixed { .. } => self.marginal(0.0),
            }
        }
    }

    /// `η(Q) = γ/γ^A - 1`; constant `1/B - 1` for Cobb-Douglas.
    pub fn elasticity(&self, q: f64) -> f64 {
        match self.shape {
            Shape::CobbDouglas { rts, .. } => 1.0 / rts - 1.0,
            Shape::Fixed { .. } => {
                if q > 0.0 {
                    let avg = self.average(q);
                    (self.marginal(q) - avg) / avg
                } else {
                    0.0
                }
            }
        }
    }

    pub fn point(&self, q: f64) -> MeecPoint {
        MeecPoint {
            quantity: q,
            marginal: self.marginal(q),
            average: self.average(q),
            cumulative: self.cumulative(q),
            elasticity: self.elasticity(q),
        }
    }

    /// Input requirements `x_l(Q)` along the cost-minimising path.
    pub fn requirements(&self, q: f64) -> Vec<(usize, f64)> {
        let base = self.base_cumulative(q);
        self.inputs
            .iter()
            .map(|i| {
                let x = match self.shape {
                    Shape::CobbDouglas { rts, .. } => i.coef / (i.omega * rts) * base,
                    Shape::Fixed { .. } => i.coef * base / self.weighted_total(),
                };
                (i.mover, self.multiplier * x)
            })
            .collect()
    }

    fn weighted_total(&self) -> f64 {
        match self.shape {
            Shape::Fixed { weighted, .. } => weighted,
            Shape::CobbDouglas { .. } => 1.0,
        }
    }

    /// Marginal technical requirement `g'_{-l}(Q)` of each used mover: the
    /// extra units of `l` needed for one more unit of output with the other
    /// inputs held fixed (`1/f_l` for Cobb-Douglas).
    pub fn marginal_requirements(&self, q: f64) -> Vec<(usize, f64)> {
        match &self.shape {
            Shape::CobbDouglas { .. } => {
                let req = self.requirements(q);
                self.inputs
                    .iter()
                    .zip(req)
                    .map(|(i, (l, x))| (l, if q > 0.0 { x / (i.coef * q) } else { 0.0 }))
                    .collect()
            }
            Shape::Fixed { profile, .. } => {
                let h = profile.marginal(q);
                self.inputs
                    .iter()
                    .map(|i| (i.mover, self.multiplier * i.coef * h))
                    .collect()
            }
        }
    }

    /// Marginal products `f_l = β_l Q / x_l`; `None` for fixed proportions.
    pub fn marginal_products(&self, q: f64) -> Option<Vec<(usize, f64)>> {
        match self.shape {
            Shape::CobbDouglas { .. } => Some(
                self.inputs
                    .iter()
                    .zip(self.requirements(q))
                    .map(|(i, (l, x))| (l, i.coef * q / x))
                    .collect(),
            ),
            Shape::Fixed { .. } => None,
        }
    }

    /// Largest output whose requirement of every used mover fits in
    /// `available` (indexed by mover). Zero if any used mover is unavailable.
    pub fn max_output_within(&self, available: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (l, x_at_one) in self.requirements(1.0) {
            let cap = available[l];
            if cap <= 0.0 {
                return 0.0;
            }
            let q = match &self.shape {
                Shape::CobbDouglas { rts, .. } => (cap / x_at_one).powf(*rts),
                Shape::Fixed { profile, .. } => {
                    let per_unit = x_at_one / profile.cumulative(1.0);
                    invert_increasing(|q| profile.cumulative(q), cap / per_unit)
                }
            };
            best = best.min(q);
        }
        best
    }
}

/// Solves `h(q) = target` for strictly increasing `h` with `h(0) = 0`.
fn invert_increasing<H: Fn(f64) -> f64>(h: H, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while h(hi) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let g = |q: f64| h(q) - target;
    let bracket = crate::numerics::Bracket {
        lo: 0.0,
        hi,
        f_lo: g(0.0),
        f_hi: g(hi),
    };
    crate::numerics::brent(g, bracket, 1e-15).unwrap_or(hi)
}

fn checked(q: f64) -> SolveResult<f64> {
    if q.is_nan() || q < 0.0 {
        Err(SolveError::NegativeQuantity(q))
    } else {
        Ok(q)
    }
}

/// Marginal embodied energy `γ(Q)` of one more unit.
pub fn marginal_embodied(
    tech: &Technology,
    movers: &[PrimeMoverType],
    q: f64,
    multiplier: f64,
) -> SolveResult<f64> {
    let q = checked(q)?;
    Ok(EmbodiedCurve::new(tech, movers, multiplier)?.marginal(q))
}

/// Cumulative energy transferred to produce `Q` units.
pub fn cumulative_transfer(
    tech: &Technology,
    movers: &[PrimeMoverType],
    q: f64,
    multiplier: f64,
) -> SolveResult<f64> {
    let q = checked(q)?;
    Ok(EmbodiedCurve::new(tech, movers, multiplier)?.cumulative(q))
}

/// Average embodied energy `G(Q)/Q`; at `Q = 0` the continuous limit.
pub fn average_embodied(
    tech: &Technology,
    movers: &[PrimeMoverType],
    q: f64,
    multiplier: f64,
) -> SolveResult<f64> {
    let q = checked(q)?;
    Ok(EmbodiedCurve::new(tech, movers, multiplier)?.average(q))
}

/// Quantity elasticity of average embodied energy. Rejects `Q = 0`.
pub fn elasticity(
    tech: &Technology,
    movers: &[PrimeMoverType],
    q: f64,
    multiplier: f64,
) -> SolveResult<f64> {
    let q = checked(q)?;
    if q == 0.0 {
        return Err(SolveError::NonPositiveQuantity(q));
    }
    Ok(EmbodiedCurve::new(tech, movers, multiplier)?.elasticity(q))
}

/// Samples the curve on `points` evenly spaced quantities in `[0, q_max]`.
pub fn sample_curve(curve: &EmbodiedCurve, q_max: f64, points: usize, exec: Execution) -> Vec<MeecPoint> {
    let n = points.max(2);
    par::map_range(n, exec, |i| curve.point(q_max * i as f64 / (n - 1) as f64))
}
