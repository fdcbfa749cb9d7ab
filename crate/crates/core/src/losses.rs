//! Loss functions ρ with derivatives ψ = ρ' and ψ' = ρ''.
//!
//! A loss carries a scale `s`; the scaled loss is `ρ(z / s)` and `psi`,
//! `psi_prime` return the exact derivatives of that scaled function, i.e.
//! `ψ(z / s) / s` and `ψ'(z / s) / s²`.

use crate::error::{invalid, Result};

pub const HUBER_K: f64 = 1.345;
pub const BIWEIGHT_K: f64 = 4.685;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Quadratic,
    Huber,
    Biweight,
}

impl LossKind {
    pub fn label(&self) -> &'static str {
        match self {
            LossKind::Quadratic => "quadratic",
            LossKind::Huber => "huber",
            LossKind::Biweight => "biweight",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Tuning constant k; ignored for the quadratic loss.
    pub tuning: f64,
    pub scale: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind, tuning: f64, scale: f64) -> Result<Self> {
        if kind != LossKind::Quadratic && !(tuning.is_finite() && tuning > 0.0) {
            return invalid("loss tuning constant must be positive");
        }
        if !(scale.is_finite() && scale > 0.0) {
            return invalid("loss scale must be positive");
        }
        Ok(Self { kind, tuning, scale })
    }

    pub fn quadratic() -> Self {
        Self { kind: LossKind::Quadratic, tuning: 0.0, scale: 1.0 }
    }

    pub fn huber() -> Self {
        Self { kind: LossKind::Huber, tuning: HUBER_K, scale: 1.0 }
    }

    pub fn biweight() -> Self {
        Self { kind: LossKind::Biweight, tuning: BIWEIGHT_K, scale: 1.0 }
    }

    pub fn with_scale(self, scale: f64) -> Result<Self> {
        Self::new(self.kind, self.tuning, scale)
    }

    pub fn rho(&self, z: f64) -> f64 {
        rho_std(self.kind, self.tuning, z / self.scale)
    }

    pub fn psi(&self, z: f64) -> f64 {
        psi_std(self.kind, self.tuning, z / self.scale) / self.scale
    }

    pub fn psi_prime(&self, z: f64) -> f64 {
        psi_prime_std(self.kind, self.tuning, z / self.scale) / (self.scale * self.scale)
    }

    /// IRLS weight `ψ(r) / (2r)`, so that a weighted least-squares step
    /// `Σ v_i r_i²` has the same stationary points as `Σ ρ(r_i)`.
    /// At `r = 0` the limit `ψ'(0) / 2` is used.
    pub fn weight(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.5 * self.psi_prime(0.0)
        } else {
            self.psi(r) / (2.0 * r)
        }
    }

    /// `sup |ψ|` of the scaled loss, infinite for the quadratic loss.
    pub fn psi_bound(&self) -> f64 {
        let k = self.tuning;
        match self.kind {
            LossKind::Quadratic => f64::INFINITY,
            LossKind::Huber => 2.0 * k / self.scale,
            // Maximum of 6u(1 - u²)² / k at u = 1/√5.
            LossKind::Biweight => 6.0 / k * (1.0 / 5f64.sqrt()) * (0.8f64).powi(2) / self.scale,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        self.kind == LossKind::Quadratic
    }
}

fn rho_std(kind: LossKind, k: f64, z: f64) -> f64 {
    match kind {
        LossKind::Quadratic => z * z,
        LossKind::Huber => {
            if z.abs() <= k {
                z * z
            } else {
                2.0 * k * z.abs() - k * k
            }
        }
        LossKind::Biweight => {
            if z.abs() <= k {
                let u = z / k;
                1.0 - (1.0 - u * u).powi(3)
            } else {
                1.0
            }
        }
    }
}

fn psi_std(kind: LossKind, k: f64, z: f64) -> f64 {
    match kind {
        LossKind::Quadratic => 2.0 * z,
        LossKind::Huber => 2.0 * z.clamp(-k, k),
        LossKind::Biweight => {
            if z.abs() <= k {
                let u = z / k;
                let w = 1.0 - u * u;
                6.0 * z / (k * k) * w * w
            } else {
                0.0
            }
        }
    }
}

// At the Huber kink |z| = k the inclusive left limit 2 is used.
fn psi_prime_std(kind: LossKind, k: f64, z: f64) -> f64 {
    match kind {
        LossKind::Quadratic => 2.0,
        LossKind::Huber => {
            if z.abs() <= k {
                2.0
            } else {
                0.0
            }
        }
        LossKind::Biweight => {
            if z.abs() <= k {
                let u2 = (z / k).powi(2);
                6.0 / (k * k) * (1.0 - u2) * (1.0 - 5.0 * u2)
            } else {
                0.0
            }
        }
    }
}
