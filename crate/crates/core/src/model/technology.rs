/// Maps prime-mover inputs to output of one good. Mover references are
/// indices into the scenario's mover catalogue; only coefficients that are
/// strictly positive are kept.
#[derive(Debug, Clone, PartialEq)]
pub enum Technology {
    /// `Q = A Π x_l^{β_l}` with `0 < Σ β_l < 1`.
    CobbDouglas { scale: f64, exponents: Vec<(usize, f64)> },
    /// `x_l = ν_l h(Q)` where `h` integrates the requirement profile.
    FixedProportions {
        requirements: Vec<(usize, f64)>,
        profile: RequirementProfile,
    },
}

impl Technology {
    pub fn cobb_douglas(scale: f64, exponents: Vec<(usize, f64)>) -> Self {
        Technology::CobbDouglas {
            scale,
            exponents: exponents.into_iter().filter(|(_, b)| *b > 0.0).collect(),
        }
    }

    pub fn fixed(requirements: Vec<(usize, f64)>, profile: RequirementProfile) -> Self {
        Technology::FixedProportions {
            requirements: requirements.into_iter().filter(|(_, v)| *v > 0.0).collect(),
            profile,
        }
    }

    /// Movers with a positive coefficient, in declaration order.
    pub fn used_movers(&self) -> impl Iterator<Item = usize> + '_ {
        let list = match self {
            Technology::CobbDouglas { exponents, .. } => exponents,
            Technology::FixedProportions { requirements, .. } => requirements,
        };
        list.iter().map(|(l, _)| *l)
    }

    /// Number of mover types the good actually uses.
    pub fn used_count(&self) -> usize {
        self.used_movers().count()
    }

    /// `B = Σ β` for Cobb-Douglas technologies.
    pub fn returns_to_scale(&self) -> Option<f64> {
        match self {
            Technology::CobbDouglas { exponents, .. } => Some(exponents.iter().map(|(_, b)| b).sum()),
            Technology::FixedProportions { .. } => None,
        }
    }
}

/// Marginal requirement profile `h'(Q) = c0 + c1 e^{-Q/τ} + c2 (Q/Q_s)^ρ`.
///
/// The decaying term gives a downward-sloping stretch at low output, the
/// power term an eventually rising curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequirementProfile {
    pub c0: f64,
    pub c1: f64,
    pub tau: f64,
    pub c2: f64,
    pub q_s: f64,
    pub rho: f64,
}

impl RequirementProfile {
    pub fn constant(c0: f64) -> Self {
        RequirementProfile {
            c0,
            c1: 0.0,
            tau: 1.0,
            c2: 0.0,
            q_s: 1.0,
            rho: 1.0,
        }
    }

    /// `h'(Q)`.
    pub fn marginal(&self, q: f64) -> f64 {
        self.c0 + self.c1 * (-q / self.tau).exp() + self.c2 * (q / self.q_s).powf(self.rho)
    }

    /// `h(Q) = ∫_0^Q h'`, closed form.
    pub fn cumulative(&self, q: f64) -> f64 {
        self.c0 * q
            + self.c1 * self.tau * (-(-q / self.tau).exp_m1())
            + self.c2 * self.q_s / (self.rho + 1.0) * (q / self.q_s).powf(self.rho + 1.0)
    }

    /// Output beyond which `h'` is guaranteed strictly increasing when `c2 > 0`.
    pub fn rising_threshold(&self) -> f64 {
        self.q_s * (self.c1 * self.rho).powf(1.0 / self.rho).max(1.0)
    }
}
