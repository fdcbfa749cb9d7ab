//! Penalty functions J with derivatives, and the single-coordinate
//! minimisation step shared by every coordinate-descent solver.
//!
//! The penalised objective is always `loss + 2λ Σ J(β_j)`. For SCAD, J is
//! the usual SCAD penalty divided by λ, so that `J(z) = |z|` near zero.

use crate::error::{invalid, Error, Result};

pub const SCAD_A: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyKind {
    None,
    L1,
    L2,
    Scad { a: f64 },
    TanhK { k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
}

/// Sign with `sign(0) = 0`.
pub fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Soft-thresholding operator `sign(z)(|z| - t)₊`.
pub fn soft(z: f64, t: f64) -> f64 {
    sign(z) * (z.abs() - t).max(0.0)
}

// sech²(t) computed without overflow.
fn sech2(t: f64) -> f64 {
    let e = (-2.0 * t.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return invalid("lambda must be nonnegative");
        }
        match kind {
            PenaltyKind::Scad { a } if !(a.is_finite() && a > 2.0) => {
                return invalid("SCAD parameter a must exceed 2")
            }
            PenaltyKind::TanhK { k } if !(k.is_finite() && k > 0.0) => {
                return invalid("tanh parameter K must be positive")
            }
            _ => {}
        }
        Ok(Self { kind, lambda })
    }

    pub fn none() -> Self {
        Self { kind: PenaltyKind::None, lambda: 0.0 }
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        Self::new(PenaltyKind::L1, lambda)
    }

    pub fn l2(lambda: f64) -> Result<Self> {
        Self::new(PenaltyKind::L2, lambda)
    }

    pub fn scad(lambda: f64) -> Result<Self> {
        Self::new(PenaltyKind::Scad { a: SCAD_A }, lambda)
    }

    pub fn tanh_k(lambda: f64, k: f64) -> Result<Self> {
        Self::new(PenaltyKind::TanhK { k }, lambda)
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            PenaltyKind::None => "none",
            PenaltyKind::L1 => "l1",
            PenaltyKind::L2 => "l2",
            PenaltyKind::Scad { .. } => "scad",
            PenaltyKind::TanhK { .. } => "tanh_k",
        }
    }

    /// True for penalties that can set coefficients exactly to zero.
    pub fn is_sparse(&self) -> bool {
        matches!(self.kind, PenaltyKind::L1 | PenaltyKind::Scad { .. }) && self.lambda > 0.0
    }

    /// True when J is twice differentiable everywhere.
    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, PenaltyKind::None | PenaltyKind::L2 | PenaltyKind::TanhK { .. })
            || self.lambda == 0.0
    }

    pub fn j(&self, z: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            PenaltyKind::None => 0.0,
            PenaltyKind::L1 => z.abs(),
            PenaltyKind::L2 => z * z,
            PenaltyKind::Scad { a } => {
                let t = z.abs();
                if t <= lam {
                    t
                } else if t <= a * lam {
                    (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0) * lam)
                } else {
                    lam * (a + 1.0) / 2.0
                }
            }
            PenaltyKind::TanhK { k } => z * (k * z).tanh(),
        }
    }

    fn kink_check(&self, z: f64) -> Result<()> {
        match self.kind {
            PenaltyKind::L1 | PenaltyKind::Scad { .. } if z == 0.0 => Err(Error::Contract(format!(
                "{} penalty derivative queried at 0",
                self.label()
            ))),
            _ => Ok(()),
        }
    }

    pub fn j_prime(&self, z: f64) -> Result<f64> {
        self.kink_check(z)?;
        let lam = self.lambda;
        Ok(match self.kind {
            PenaltyKind::None => 0.0,
            PenaltyKind::L1 => sign(z),
            PenaltyKind::L2 => 2.0 * z,
            PenaltyKind::Scad { a } => {
                let t = z.abs();
                let d = if t <= lam {
                    1.0
                } else if t <= a * lam {
                    (a * lam - t) / ((a - 1.0) * lam)
                } else {
                    0.0
                };
                sign(z) * d
            }
            PenaltyKind::TanhK { k } => tanh_j_prime(k, z),
        })
    }

    pub fn j_second(&self, z: f64) -> Result<f64> {
        self.kink_check(z)?;
        let lam = self.lambda;
        Ok(match self.kind {
            PenaltyKind::None | PenaltyKind::L1 => 0.0,
            PenaltyKind::L2 => 2.0,
            PenaltyKind::Scad { a } => {
                let t = z.abs();
                if t > lam && t <= a * lam {
                    -1.0 / ((a - 1.0) * lam)
                } else {
                    0.0
                }
            }
            PenaltyKind::TanhK { k } => {
                let t = k * z;
                2.0 * k * sech2(t) * (1.0 - t * t.tanh())
            }
        })
    }

    /// `|score| ≤ λ`: the lasso coordinate with this score is exactly zero.
    pub fn soft_threshold_test(&self, score: f64, second_moment: f64) -> Result<bool> {
        if self.kind != PenaltyKind::L1 {
            return Err(Error::Unsupported(format!(
                "soft-threshold test needs an l1 penalty, got {}",
                self.label()
            )));
        }
        if !(second_moment > 0.0) {
            return invalid("second moment must be positive");
        }
        Ok(score.abs() <= self.lambda)
    }

    /// `argmin_b curv·b² − 2c·b + 2λJ(b)` for `curv > 0`.
    pub fn coordinate_argmin(&self, curv: f64, c: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            PenaltyKind::None => c / curv,
            PenaltyKind::L2 => c / (curv + 2.0 * lam),
            PenaltyKind::L1 => soft(c, lam) / curv,
            PenaltyKind::Scad { a } => self.scad_argmin(a, curv, c),
            PenaltyKind::TanhK { k } => tanh_argmin(k, lam, curv, c),
        }
    }

    fn scad_argmin(&self, a: f64, curv: f64, c: f64) -> f64 {
        let lam = self.lambda;
        if lam == 0.0 {
            return c / curv;
        }
        let ac = c.abs();
        let obj = |t: f64| curv * t * t - 2.0 * ac * t + 2.0 * lam * self.j(t);
        let mut cands = vec![0.0, lam, a * lam];
        let r1 = (ac - lam) / curv;
        if r1 > 0.0 && r1 <= lam {
            cands.push(r1);
        }
        let bend = 1.0 / (a - 1.0);
        if curv > bend {
            let r2 = (ac - a * lam * bend) / (curv - bend);
            if r2 > lam && r2 <= a * lam {
                cands.push(r2);
            }
        }
        let r3 = ac / curv;
        if r3 > a * lam {
            cands.push(r3);
        }
        let mut best = 0.0;
        let mut best_val = obj(0.0);
        for t in cands {
            let v = obj(t);
            if v < best_val {
                best = t;
                best_val = v;
            }
        }
        sign(c) * best
    }
}

fn tanh_j_prime(k: f64, z: f64) -> f64 {
    let t = k * z;
    t.tanh() + t * sech2(t)
}

// J is nonconvex where |Kb| is of order one, so the stationarity equation
// g(b) = curv·b − c + λ J'(b) = 0 can have several roots there. Outside
// |Kb| ≤ 40 the derivative J' is ±1 to machine precision and g is monotone.
// Sign changes of g are located on a grid over the band plus its two outer
// pieces, each root is refined by safeguarded Newton, and the root with the
// smallest objective wins.
fn tanh_argmin(k: f64, lam: f64, curv: f64, c: f64) -> f64 {
    if lam == 0.0 {
        return c / curv;
    }
    let g = |b: f64| curv * b - c + lam * tanh_j_prime(k, b);
    let f = |b: f64| curv * b * b - 2.0 * c * b + 2.0 * lam * b * (k * b).tanh();
    // |J'| ≤ 1.2 everywhere, so every root lies in this bracket.
    let lo = (c - 1.3 * lam) / curv;
    let hi = (c + 1.3 * lam) / curv;
    let band = 40.0 / k;
    let mut knots = vec![lo, hi];
    const STEPS: usize = 400;
    for i in 0..=STEPS {
        let b = -band + 2.0 * band * i as f64 / STEPS as f64;
        if b > lo && b < hi {
            knots.push(b);
        }
    }
    knots.sort_by(f64::total_cmp);
    let mut best = f64::NAN;
    let mut best_f = f64::INFINITY;
    let mut consider = |b: f64| {
        let fb = f(b);
        if fb < best_f || (fb == best_f && b.abs() < best.abs()) {
            best = b;
            best_f = fb;
        }
    };
    let mut ga = g(knots[0]);
    for w in knots.windows(2) {
        let gb = g(w[1]);
        if ga == 0.0 {
            consider(w[0]);
        }
        // Only upward crossings are local minima.
        if ga < 0.0 && gb > 0.0 {
            consider(refine(&g, k, lam, curv, w[0], w[1]));
        }
        ga = gb;
    }
    if ga == 0.0 {
        consider(knots[knots.len() - 1]);
    }
    best
}

/// Root of `g` on `[lo, hi]` with `g(lo) < 0 < g(hi)`.
fn refine(g: &impl Fn(f64) -> f64, k: f64, lam: f64, curv: f64, mut lo: f64, mut hi: f64) -> f64 {
    let dg = |b: f64| {
        let t = k * b;
        curv + lam * 2.0 * k * sech2(t) * (1.0 - t * t.tanh())
    };
    let mut b = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gb = g(b);
        if gb == 0.0 {
            return b;
        }
        if gb > 0.0 {
            hi = b;
        } else {
            lo = b;
        }
        let d = dg(b);
        let newton = b - gb / d;
        if d > 0.0 && (gb / d).abs() <= 1e-15 * (1.0 + b.abs()) {
            return newton.clamp(lo, hi);
        }
        b = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(lam: f64) -> Vec<PenaltySpec> {
        vec![
            PenaltySpec::none(),
            PenaltySpec::l1(lam).unwrap(),
            PenaltySpec::l2(lam).unwrap(),
            PenaltySpec::scad(lam).unwrap(),
            PenaltySpec::tanh_k(lam, 10.0).unwrap(),
        ]
    }

    #[test]
    fn scad_values() {
        let p = PenaltySpec::scad(0.1).unwrap();
        assert!((p.j(0.05) - 0.05).abs() < 1e-15);
        assert!((p.j(1.0) - 0.235).abs() < 1e-15);
    }

    #[test]
    fn scad_continuity_at_knots() {
        let p = PenaltySpec::scad(0.1).unwrap();
        for knot in [0.1, 0.37] {
            let e = 1e-9;
            assert!((p.j(knot - e) - p.j(knot + e)).abs() < 1e-8);
            let d = (p.j_prime(knot - e).unwrap() - p.j_prime(knot + e).unwrap()).abs();
            assert!(d < 1e-7, "J' jump {d} at {knot}");
        }
    }

    #[test]
    fn scad_flat_beyond_a_lambda() {
        let p = PenaltySpec::scad(0.1).unwrap();
        for z in [0.371, 0.5, 3.0, -9.0] {
            assert_eq!(p.j_prime(z).unwrap(), 0.0);
        }
    }

    #[test]
    fn tanh_close_to_abs() {
        let p = PenaltySpec::tanh_k(0.1, 100.0).unwrap();
        assert!((p.j(0.5) - 0.5).abs() < 1e-2);
    }

    #[test]
    fn tanh_error_decreases_in_k() {
        let grid: Vec<f64> = (0..=4000).map(|i| -2.0 + 0.001 * i as f64).collect();
        let errs: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0]
            .iter()
            .map(|&k| {
                let p = PenaltySpec::tanh_k(1.0, k).unwrap();
                grid.iter().map(|z| (p.j(*z) - z.abs()).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn kinked_derivatives_at_zero_are_contract_errors() {
        for p in [PenaltySpec::l1(0.1).unwrap(), PenaltySpec::scad(0.1).unwrap()] {
            assert!(matches!(p.j_prime(0.0), Err(Error::Contract(_))));
            assert!(matches!(p.j_second(0.0), Err(Error::Contract(_))));
        }
        assert_eq!(PenaltySpec::tanh_k(0.1, 5.0).unwrap().j_prime(0.0).unwrap(), 0.0);
    }

    #[test]
    fn soft_threshold_test_cases() {
        let p = PenaltySpec::l1(0.1).unwrap();
        assert!(p.soft_threshold_test(0.05, 1.0).unwrap());
        assert!(p.soft_threshold_test(0.10, 1.0).unwrap());
        assert!(!p.soft_threshold_test(-0.2, 1.0).unwrap());
        let r = PenaltySpec::l2(0.1).unwrap().soft_threshold_test(0.0, 1.0);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn finite_differences() {
        let h = 1e-5;
        for p in kinds(0.3) {
            let knots: [f64; 5] = [0.0, 0.3, -0.3, 1.11, -1.11];
            let mut z: f64 = -3.0;
            while z <= 3.0 {
                if knots.iter().all(|k| (z - k).abs() > 1e-3) {
                    let d1 = (p.j(z + h) - p.j(z - h)) / (2.0 * h);
                    assert!((p.j_prime(z).unwrap() - d1).abs() < 1e-6, "{} J' at {z}", p.label());
                    let d2 = (p.j_prime(z + h).unwrap() - p.j_prime(z - h).unwrap()) / (2.0 * h);
                    assert!((p.j_second(z).unwrap() - d2).abs() < 1e-6, "{} J'' at {z}", p.label());
                }
                z += 0.007;
            }
        }
    }

    #[test]
    fn tanh_second_derivative_large_k() {
        let p = PenaltySpec::tanh_k(1.0, 1e4).unwrap();
        for z in [1e-5, 3e-4, 0.01, 2.0] {
            let h = z * 1e-4;
            let d2 = (p.j_prime(z + h).unwrap() - p.j_prime(z - h).unwrap()) / (2.0 * h);
            let exact = p.j_second(z).unwrap();
            assert!((exact - d2).abs() <= 1e-5 * (1.0 + exact.abs()), "{z}: {exact} vs {d2}");
        }
    }

    #[test]
    fn tanh_step_picks_the_lower_of_two_local_minima() {
        let p = PenaltySpec::tanh_k(0.49200423890564987, 10.0).unwrap();
        let (curv, c) = (0.3, -0.5003123752101596);
        let got = p.coordinate_argmin(curv, c);
        let want = brute_argmin(&p, curv, c);
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }

    fn brute_argmin(p: &PenaltySpec, curv: f64, c: f64) -> f64 {
        let f = |b: f64| curv * b * b - 2.0 * c * b + 2.0 * p.lambda * p.j(b);
        let center = c / curv;
        let width = (c.abs() + 2.0 * p.lambda + 1.0) / curv;
        let mut best = 0.0;
        let mut best_val = f(0.0);
        let n = 400_000;
        for i in 0..=n {
            let b = center - width + 2.0 * width * i as f64 / n as f64;
            if f(b) < best_val {
                best_val = f(b);
                best = b;
            }
        }
        best
    }

    #[test]
    fn scad_closed_form_middle_branch() {
        let p = PenaltySpec::scad(0.1).unwrap();
        let b = p.coordinate_argmin(1.0, 0.3);
        assert!((b - (2.7 * 0.3 - 0.37) / 1.7).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn penalties_nonnegative(z in -20.0f64..20.0, lam in 0.0f64..2.0) {
            for p in kinds(lam) {
                prop_assert!(p.j(z) >= 0.0);
                prop_assert_eq!(p.j(0.0), 0.0);
            }
        }

        #[test]
        fn tanh_within_one_over_k(z in -20.0f64..20.0, k in 1.0f64..1e4) {
            let p = PenaltySpec::tanh_k(1.0, k).unwrap();
            prop_assert!((p.j(z) - z.abs()).abs() <= 1.0 / k + 1e-15);
        }

        #[test]
        fn coordinate_step_is_global_minimum(
            curv in 0.3f64..3.0, c in -2.0f64..2.0, lam in 0.0f64..0.5
        ) {
            let mut all = kinds(lam);
            all.push(PenaltySpec::tanh_k(lam, 1000.0).unwrap());
            for p in all {
                let b = p.coordinate_argmin(curv, c);
                let f = |t: f64| curv * t * t - 2.0 * c * t + 2.0 * lam * p.j(t);
                let bb = brute_argmin(&p, curv, c);
                prop_assert!(f(b) <= f(bb) + 1e-9, "{}: {} vs brute {} (curv {curv}, c {c}, lam {lam})", p.label(), b, bb);
            }
        }
    }
}
