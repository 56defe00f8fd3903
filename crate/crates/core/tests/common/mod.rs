//! Generators shared by the integration tests.
#![allow(dead_code)]

use foliate::model::random::{random_model, RandomModelConfig};
use foliate::model::{BasicBox, SideSpec, StripId, StripModel};
use foliate::numeric::{GraphSample, PouPiece, PouSpec};
use foliate::rational::{q, qf, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Base seed for randomized tests; override with `FOLIATE_SEED`.
pub fn seed_base() -> u64 {
    std::env::var("FOLIATE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20_261_016)
}

pub fn rng(offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_base().wrapping_add(offset))
}

/// `n` seeded random valid models with at most 6 strips and 4 arcs per side.
pub fn random_models(n: usize) -> Vec<(u64, StripModel)> {
    (0..n as u64)
        .map(|k| {
            let seed = seed_base().wrapping_add(k);
            (seed, random_model(seed, RandomModelConfig { max_strips: 6, max_arcs_per_side: 4 }))
        })
        .collect()
}

fn small_q(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Q {
    qf(rng.random_range(lo * den..=hi * den), den)
}

fn sub_interval(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q) -> (Q, Q) {
    let den = 64;
    let a = rng.random_range(0..den);
    let b = rng.random_range(a + 1..=den);
    let w = hi - lo;
    (lo + &w * qf(a, den), lo + &w * qf(b, den))
}

/// A random basic box of `model`: a rectangle, an arc neighbourhood or a boundary
/// half-disc.
pub fn random_box(model: &StripModel, rng: &mut ChaCha8Rng) -> BasicBox {
    let boundary = model.boundary_ends();
    let kind = rng.random_range(0..3);
    if kind == 1 && !model.gluings.is_empty() {
        let g = model.gluing_ids().nth(rng.random_range(0..model.gluings.len())).unwrap();
        let arc = model.arc(model.gluing(g).unwrap().a).unwrap().clone();
        let lo = arc.lo.finite().cloned().unwrap_or_else(|| arc.anchor() - q(4));
        let hi = arc.hi.finite().cloned().unwrap_or_else(|| arc.anchor() + q(4));
        let x = sub_interval(rng, &lo, &hi);
        let collar_a = qf(rng.random_range(1..=8), 8);
        let collar_b = qf(rng.random_range(1..=8), 8);
        return BasicBox::ArcNbhd { gluing: g, x, collar_a, collar_b };
    }
    if kind == 2 && !boundary.is_empty() {
        let end = boundary[rng.random_range(0..boundary.len())];
        let a = small_q(rng, -5, 4, 4);
        let b = &a + qf(rng.random_range(1..=16), 4);
        return BasicBox::BoundaryNbhd { end, x: (a, b), collar: qf(rng.random_range(1..=8), 8) };
    }
    let strip = StripId(rng.random_range(0..model.strips.len()));
    let a = small_q(rng, -5, 4, 4);
    let b = &a + qf(rng.random_range(1..=16), 4);
    let y = sub_interval(rng, &q(0), &q(1));
    BasicBox::Rect { strip, x: (a, b), y }
}

/// A random valid sample of `k ≤ 3` strictly ordered graphs over an 11-point base. Targets
/// are spread over `(a, b)` and each graph wanders around its target by at most a third of
/// the target spacing, which keeps the straightening exponents within about `[1/3, 3]`.
pub fn random_graph_sample(rng: &mut ChaCha8Rng) -> GraphSample {
    let k = rng.random_range(1..=3);
    let a: f64 = rng.random_range(-3.0..1.0);
    let b = a + rng.random_range(0.5..4.0);
    let gap = 1.0 / (k + 1) as f64;
    let targets: Vec<f64> = (1..=k).map(|i| i as f64 * gap + rng.random_range(-0.1..0.1) * gap).collect();
    let z: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let values = targets
        .iter()
        .map(|c| z.iter().map(|_| a + (b - a) * (c + rng.random_range(-gap / 3.0..gap / 3.0))).collect())
        .collect();
    GraphSample { z, values, interval: (a, b), targets: targets.into_iter().map(|c| a + (b - a) * c).collect() }
}

/// A random two-piece spec over `u ∈ (0, 1)` with increasing affine local pieces and
/// base-only weights `(1 − λ(u), λ(u))`. With `fault`, the second piece decreases.
pub fn random_pou(rng: &mut ChaCha8Rng, fault: bool) -> PouSpec {
    let shift: f64 = rng.random_range(-2.0..2.0);
    let len: f64 = rng.random_range(0.5..4.0);
    let tilt: f64 = rng.random_range(-1.0..1.0);
    let (m1, b1): (f64, f64) = (rng.random_range(0.1..5.0), rng.random_range(-3.0..3.0));
    let (m2, b2): (f64, f64) = (rng.random_range(0.1..5.0), rng.random_range(-3.0..3.0));
    let m2 = if fault { -m2 } else { m2 };
    let (u0, u1): (f64, f64) = (rng.random_range(0.0..0.5), rng.random_range(0.5..1.0));
    let lambda = move |u: f64| ((u - u0) / (u1 - u0)).clamp(0.0, 1.0);
    let g0 = move |u: f64| shift + tilt * u;
    let g1 = move |u: f64| shift + tilt * u + len;
    let all = (f64::NEG_INFINITY, f64::INFINITY);
    PouSpec::new(
        (0.0, 1.0),
        g0,
        g1,
        vec![
            PouPiece::new(all, move |_, u| 1.0 - lambda(u), move |x, u| m1 * x + b1 + u),
            PouPiece::new(all, move |_, u| lambda(u), move |x, u| m2 * x + b2 - u),
        ],
    )
}

pub fn has_boundary(model: &StripModel) -> bool {
    model.strips.iter().any(|s| matches!(s.bottom, SideSpec::Boundary) || matches!(s.top, SideSpec::Boundary))
}
