use std::sync::Arc;

use super::{grid_points, GridReport, NumericError};

type Field = dyn Fn(f64, f64) -> f64 + Send + Sync;
type Curve = dyn Fn(f64) -> f64 + Send + Sync;

/// One local piece: a weight `λ_i(x, u)` supported in `support` (leaf coordinates) and a
/// local fiber coordinate `p_i ∘ φ_i⁻¹`, increasing in `x` on the support.
#[derive(Clone)]
pub struct PouPiece {
    pub weight: Arc<Field>,
    pub fiber: Arc<Field>,
    pub support: (f64, f64),
}

impl PouPiece {
    pub fn new(
        support: (f64, f64),
        weight: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        fiber: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PouPiece { weight: Arc::new(weight), fiber: Arc::new(fiber), support }
    }

    fn supports(&self, x: f64) -> bool {
        self.support.0 < x && x < self.support.1
    }
}

/// A block between two parallel sections: over each base value `u` the leaf segment
/// runs from `gamma0(u)` to `gamma1(u)` in leaf coordinates.
#[derive(Clone)]
pub struct PouSpec {
    pub pieces: Vec<PouPiece>,
    pub base: (f64, f64),
    pub gamma0: Arc<Curve>,
    pub gamma1: Arc<Curve>,
    pub tol: f64,
}

impl PouSpec {
    pub fn new(
        base: (f64, f64),
        gamma0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        pieces: Vec<PouPiece>,
    ) -> Self {
        PouSpec { pieces, base, gamma0: Arc::new(gamma0), gamma1: Arc::new(gamma1), tol: super::DEFAULT_TOL }
    }

    fn raw(&self, x: f64, u: f64) -> f64 {
        self.pieces.iter().map(|p| if p.supports(x) { (p.weight)(x, u) * (p.fiber)(x, u) } else { 0.0 }).sum()
    }

    fn segment(&self, u: f64, n: usize) -> Vec<f64> {
        grid_points(((self.gamma0)(u), (self.gamma1)(u)), n, true)
    }
}

/// The glued fiber coordinate `f = Σ λ_i · p_i ∘ φ_i⁻¹`, rescaled on each leaf segment so
/// that it is 0 on the first section and 1 on the second.
#[derive(Clone)]
pub struct GluedFiber {
    spec: PouSpec,
}

impl GluedFiber {
    pub fn eval(&self, x: f64, u: f64) -> f64 {
        let s = &self.spec;
        let (g0, g1) = ((s.gamma0)(u), (s.gamma1)(u));
        if x == g0 {
            return 0.0;
        }
        if x == g1 {
            return 1.0;
        }
        let (f0, f1) = (s.raw(g0, u), s.raw(g1, u));
        (s.raw(x, u) - f0) / (f1 - f0)
    }

    pub fn spec(&self) -> &PouSpec {
        &self.spec
    }
}

/// Checks a spec on `n` base values × `n` points per leaf segment: weights are
/// nonnegative, vanish off their supports and sum to 1; each local piece increases on its
/// support; the glued coordinate increases strictly and takes the values 0 and 1 at the
/// ends.
pub fn check_pou(spec: &PouSpec, n: usize) -> GridReport {
    let mut report = GridReport::new();
    for name in ["weight_sum", "support", "piece_monotone", "monotone", "ends"] {
        report.declare(name);
    }
    let glued = GluedFiber { spec: spec.clone() };
    for u in grid_points(spec.base, n, false) {
        let xs = spec.segment(u, n);
        for &x in &xs {
            let sum: f64 = spec.pieces.iter().map(|p| if p.supports(x) { (p.weight)(x, u) } else { 0.0 }).sum();
            report.residual("weight_sum", x, u, (sum - 1.0).abs(), spec.tol);
            for (i, p) in spec.pieces.iter().enumerate() {
                let w = (p.weight)(x, u);
                let ok = w >= 0.0 && (p.supports(x) || w == 0.0);
                report.record("support", ok, || format!("({x}, {u})"), || format!("piece {i} has weight {w}"));
            }
        }
        for (i, p) in spec.pieces.iter().enumerate() {
            let inside: Vec<f64> = xs.iter().copied().filter(|&x| p.supports(x)).collect();
            for w in inside.windows(2) {
                let (a, b) = ((p.fiber)(w[0], u), (p.fiber)(w[1], u));
                report.record("piece_monotone", b > a, || format!("({}, {u})", w[1]), || format!("piece {i}: {a} then {b}"));
            }
        }
        let values: Vec<f64> = xs.iter().map(|&x| glued.eval(x, u)).collect();
        for (k, w) in values.windows(2).enumerate() {
            report.record("monotone", w[1] > w[0], || format!("({}, {u})", xs[k + 1]), || format!("{} then {}", w[0], w[1]));
        }
        let raw_ends = (spec.raw(xs[0], u), spec.raw(xs[xs.len() - 1], u));
        report.record(
            "ends",
            values[0] == 0.0 && values[values.len() - 1] == 1.0 && raw_ends.1 > raw_ends.0,
            || format!("u = {u}"),
            || format!("end values {} and {}", values[0], values[values.len() - 1]),
        );
    }
    report
}

/// Builds the glued fiber coordinate after running `check_pou` on a 101-point grid.
pub fn pou_glue(spec: &PouSpec) -> Result<GluedFiber, NumericError> {
    let report = check_pou(spec, 101);
    let failed = |name: &str| report.checks.iter().find(|c| c.name == name).is_some_and(|c| c.failed > 0);
    if failed("weight_sum") || failed("support") {
        let worst = report.checks.iter().find(|c| c.name == "weight_sum").map_or(f64::NAN, |c| c.worst_residual);
        return Err(NumericError::WeightSum(worst));
    }
    if failed("piece_monotone") || failed("monotone") || failed("ends") {
        let piece = report
            .failures
            .iter()
            .find(|f| f.check == "piece_monotone")
            .and_then(|f| f.detail.strip_prefix("piece ")?.split(':').next()?.parse().ok())
            .unwrap_or(0);
        return Err(NumericError::NonMonotonePiece(piece));
    }
    Ok(GluedFiber { spec: spec.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn two_pieces(slope2: f64) -> PouSpec {
        PouSpec::new(
            (0.0, 1.0),
            |u| u,
            |u| u + 2.0,
            vec![
                PouPiece::new((f64::NEG_INFINITY, f64::INFINITY), |x, u| 1.0 - ramp((x - u) / 2.0), |x, _| 0.5 * x),
                PouPiece::new((f64::NEG_INFINITY, f64::INFINITY), |x, u| ramp((x - u) / 2.0), move |x, _| slope2 * x + 1.0),
            ],
        )
    }

    #[test]
    fn single_affine_piece() {
        let spec = PouSpec::new((0.0, 1.0), |u| -u, |u| 1.0 + u, vec![PouPiece::new((-5.0, 5.0), |_, _| 1.0, |x, u| 3.0 * x + u)]);
        let f = pou_glue(&spec).unwrap();
        for u in [0.1, 0.5, 0.9] {
            assert_eq!(f.eval(-u, u), 0.0);
            assert_eq!(f.eval(1.0 + u, u), 1.0);
            let mid = 0.5 * (-u + 1.0 + u);
            assert!((f.eval(mid, u) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn convex_combination_is_increasing() {
        assert!(check_pou(&two_pieces(2.0), 101).passed());
        assert!(pou_glue(&two_pieces(0.3)).is_ok());
    }

    #[test]
    fn planted_decreasing_piece_is_reported() {
        let report = check_pou(&two_pieces(-2.0), 101);
        assert!(report.failures_of("piece_monotone") > 0);
        assert!(matches!(pou_glue(&two_pieces(-2.0)), Err(NumericError::NonMonotonePiece(1))));
    }

    #[test]
    fn bad_weights_are_reported() {
        let spec = PouSpec::new((0.0, 1.0), |_| 0.0, |_| 1.0, vec![PouPiece::new((-1.0, 2.0), |_, _| 0.9, |x, _| x)]);
        assert!(matches!(pou_glue(&spec), Err(NumericError::WeightSum(_))));
    }
}
