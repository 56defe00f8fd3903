use serde::{Deserialize, Serialize};

use super::chain::{signed, ChainBase, JointData, Location};
use super::FibrationError;
use num_traits::Signed;

use crate::model::{BasicBox, LeafDescriptor, ModelPoint, SaturatedSet, StripModel};
use crate::rational::{floor_i64, fmt_q, half, min_q, q, ExtRat, Q};

/// Spacing `M` of the lattice of sections away from special leaves, and the depth of the
/// collar over which sections blend from the joint sigmoid into that lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerParams {
    #[serde(with = "crate::rational::q_string")]
    pub spacing: Q,
    #[serde(with = "crate::rational::q_string")]
    pub collar: Q,
}

impl TowerParams {
    pub fn new(spacing: Q, collar: Q) -> Result<Self, FibrationError> {
        if spacing <= q(0) || collar <= q(0) {
            return Err(FibrationError::NonPositiveParams(format!("spacing {}, collar {}", fmt_q(&spacing), fmt_q(&collar))));
        }
        Ok(TowerParams { spacing, collar })
    }

    /// Spacing 1 and the model's default collar.
    pub fn for_model(model: &StripModel) -> Self {
        TowerParams { spacing: q(1), collar: model.default_collar() }
    }
}

const SEARCH_LIMIT: i64 = 1 << 62;

/// A trivializing chart `Φ: ℝ × V → Sat`, assembled from the section tower `γ_i` over a
/// chain base: `Φ(i + τ, v)` is the point at leaf fraction `τ` between `γ_i(v)` and
/// `γ_{i+1}(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivChart {
    base: ChainBase,
    params: TowerParams,
    joints: Vec<JointData>,
    swapped: Option<(i64, i64)>,
}

/// The serialized form of a chart; evaluation data is rebuilt from the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub base: ChainBase,
    pub params: TowerParams,
}

impl TrivChart {
    pub fn new(model: &StripModel, base: ChainBase, params: TowerParams) -> Result<TrivChart, FibrationError> {
        base.check(model)?;
        let params = TowerParams::new(params.spacing, params.collar)?;
        let joints = base.joint_data(model)?;
        Ok(TrivChart { base, params, joints, swapped: None })
    }

    pub fn from_spec(model: &StripModel, spec: ChartSpec) -> Result<TrivChart, FibrationError> {
        TrivChart::new(model, spec.base, spec.params)
    }

    pub fn spec(&self) -> ChartSpec {
        ChartSpec { base: self.base.clone(), params: self.params.clone() }
    }

    pub fn base(&self) -> &ChainBase {
        &self.base
    }

    pub fn params(&self) -> &TowerParams {
        &self.params
    }

    /// A copy of the chart that evaluates `γ_i` as `γ_j` and vice versa. Used to plant a
    /// fault for the verification harness.
    pub fn with_swapped_levels(&self, i: i64, j: i64) -> TrivChart {
        TrivChart { swapped: Some((i, j)), ..self.clone() }
    }

    pub fn v_range(&self) -> (Q, Q) {
        self.base.v_range()
    }

    pub fn leaf_at(&self, v: &Q) -> Option<LeafDescriptor> {
        self.base.leaf_at(v)
    }

    pub fn saturation(&self) -> SaturatedSet {
        self.base.saturation()
    }

    /// `g̃(i)`: the joint's section values, increasing in `i` and exhausting the arc.
    fn joint_level(&self, k: usize, i: i64) -> Q {
        let j = &self.base.joints[k];
        let arc = &self.joints[k].arc;
        let (lo, hi) = if j.orient > 0 { (arc.lo.clone(), arc.hi.clone()) } else { (arc.hi.neg(), arc.lo.neg()) };
        let x0 = signed(j.orient, &j.anchor);
        let iq = q(i);
        let toward = if i >= 0 { hi } else { lo };
        match toward {
            ExtRat::Finite(end) => {
                let frac = q(i.abs()) / q(1 + i.abs());
                &x0 + (end - &x0) * frac
            }
            _ => x0 + &self.params.spacing * iq,
        }
    }

    /// Joint `k`'s section values in piece `p`'s oriented coordinate.
    fn joint_in_piece(&self, k: usize, p: usize, i: i64) -> Q {
        let j = &self.base.joints[k];
        let xa = signed(j.orient, &self.joint_level(k, i));
        let on_a = (p == k) == j.a_before;
        let strip_x = if on_a { xa } else { self.joints[k].map.apply(&xa) };
        signed(self.base.pieces[p].orient, &strip_x)
    }

    fn lattice(&self, p: usize, i: i64) -> Q {
        let piece = &self.base.pieces[p];
        signed(piece.orient, &piece.anchor) + &self.params.spacing * q(i)
    }

    /// `c̃_i(v)`, the oriented leaf coordinate of `γ_i` over `v`.
    pub fn level(&self, i: i64, v: &Q) -> Option<Q> {
        let i = match self.swapped {
            Some((a, b)) if i == a => b,
            Some((a, b)) if i == b => a,
            _ => i,
        };
        Some(match self.base.locate(v)? {
            Location::Piece { index, offset } => {
                let piece = &self.base.pieces[index];
                let before = index > 0;
                let after = index < self.base.joints.len();
                let room = if before && after { &piece.len * half() } else { piece.len.clone() };
                let ramp = min_q(&self.params.collar, &room);
                let to_end = &piece.len - &offset;
                let w_start = if before && offset < ramp { q(1) - &offset / &ramp } else { q(0) };
                let w_end = if after && to_end < ramp { q(1) - &to_end / &ramp } else { q(0) };
                let mut out = (q(1) - &w_start - &w_end) * self.lattice(index, i);
                if w_start > q(0) {
                    out += &w_start * self.joint_in_piece(index - 1, index, i);
                }
                if w_end > q(0) {
                    out += &w_end * self.joint_in_piece(index, index, i);
                }
                out
            }
            Location::Joint { index } => self.joint_level(index, i),
            Location::Start(_) => self.lattice(0, i),
            Location::Finish(_) => self.lattice(self.base.pieces.len() - 1, i),
        })
    }

    /// Oriented leaf coordinate of `Φ(s, v)`.
    pub fn coordinate(&self, s: &Q, v: &Q) -> Result<Q, FibrationError> {
        let i = floor_index(s)?;
        let tau = s - q(i);
        let outside = || FibrationError::OutsideBase(fmt_q(v));
        let c0 = self.level(i, v).ok_or_else(outside)?;
        if tau == q(0) {
            return Ok(c0);
        }
        let c1 = self.level(i + 1, v).ok_or_else(outside)?;
        Ok(&c0 + tau * (c1 - &c0))
    }

    pub fn eval(&self, s: &Q, v: &Q) -> Result<ModelPoint, FibrationError> {
        let xt = self.coordinate(s, v)?;
        self.base.point(v, &xt).ok_or_else(|| FibrationError::OutsideBase(fmt_q(v)))
    }

    /// `Φ⁻¹`: the fiber value and base parameter of a point of the saturation.
    pub fn inverse(&self, pt: &ModelPoint) -> Result<(Q, Q), FibrationError> {
        let (v, xt) = self.base.param_of_point(pt).ok_or_else(|| FibrationError::NotOnChart(pt.to_string()))?;
        let level = |i: i64| self.level(i, &v).expect("v on the base");
        let lost = || FibrationError::NotOnChart(pt.to_string());
        // Start from the lattice estimate and gallop outwards until `xt` is bracketed.
        let limit = q(SEARCH_LIMIT / 2);
        let estimate = (&xt - level(0)) / &self.params.spacing;
        let guess = if estimate.abs() < limit { floor_i64(&estimate) } else { 0 };
        let (mut lo, mut hi);
        if level(guess) <= xt {
            lo = guess;
            let mut step = 1i64;
            loop {
                let next = lo.checked_add(step).filter(|n| n.abs() <= SEARCH_LIMIT).ok_or_else(lost)?;
                if level(next) > xt {
                    hi = next;
                    break;
                }
                lo = next;
                step = step.saturating_mul(2);
            }
        } else {
            hi = guess;
            let mut step = 1i64;
            loop {
                let next = hi.checked_sub(step).filter(|n| n.abs() <= SEARCH_LIMIT).ok_or_else(lost)?;
                if level(next) <= xt {
                    lo = next;
                    break;
                }
                hi = next;
                step = step.saturating_mul(2);
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if level(mid) <= xt {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (c0, c1) = (level(lo), level(lo + 1));
        if !(c0 <= xt && xt < c1) {
            return Err(FibrationError::NotOnChart(format!("{pt}: sections are not monotone here")));
        }
        let tau = (&xt - &c0) / (c1 - c0);
        Ok((q(lo) + tau, v))
    }

    /// A basic box around the central section whose saturation is the chart's saturation,
    /// for the three elementary chart shapes.
    pub fn section_box(&self) -> Option<BasicBox> {
        let b = &self.base;
        let window = |anchor: &Q| (anchor - q(1), anchor + q(1));
        match (b.pieces.as_slice(), b.joints.as_slice(), b.start, b.finish) {
            ([p], [], super::ChainEnd::Open, super::ChainEnd::Open) => {
                Some(BasicBox::Rect { strip: p.strip, x: window(&p.anchor), y: p.heights() })
            }
            ([p], [], super::ChainEnd::Boundary { end }, super::ChainEnd::Open) => {
                Some(BasicBox::BoundaryNbhd { end, x: window(&p.anchor), collar: p.len.clone() })
            }
            ([a, c], [j], super::ChainEnd::Open, super::ChainEnd::Open) if j.a_before => {
                let arc = &self.joints[0].arc;
                let mut w = q(1);
                for end in [arc.lo.finite(), arc.hi.finite()].into_iter().flatten() {
                    w = min_q(&w, &((end - &j.anchor).abs() * half()));
                }
                Some(BasicBox::ArcNbhd {
                    gluing: j.gluing,
                    x: (&j.anchor - &w, &j.anchor + &w),
                    collar_a: a.len.clone(),
                    collar_b: c.len.clone(),
                })
            }
            _ => None,
        }
    }
}

fn floor_index(s: &Q) -> Result<i64, FibrationError> {
    let limit = q(SEARCH_LIMIT);
    if s.clone() >= limit || s.clone() <= -limit {
        return Err(FibrationError::FiberOutOfRange(fmt_q(s)));
    }
    Ok(floor_i64(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{GluingId, StripId};
    use crate::rational::qf;

    fn vertex_chart(name: &str, g: usize) -> (StripModel, TrivChart) {
        let m = fixtures::model(name);
        let params = TowerParams::for_model(&m);
        let base = ChainBase::vertex(&m, GluingId(g), &params.collar).unwrap();
        let chart = TrivChart::new(&m, base, params).unwrap();
        (m, chart)
    }

    #[test]
    fn blend_formula_on_m0() {
        let (_, c) = vertex_chart("M0", 0);
        // full-line arc: the sigmoid is the affine ray, so every level is x = i
        for i in -5..=5 {
            for v in [qf(-1, 4), q(0), qf(1, 3)] {
                assert_eq!(c.level(i, &v), Some(q(i)));
            }
        }
    }

    #[test]
    fn blend_formula_on_m1() {
        let (_, c) = vertex_chart("M1", 0);
        // arc (−∞, 0) anchored at −1; ε = 1/2
        assert_eq!(c.level(0, &q(0)), Some(q(-1)));
        assert_eq!(c.level(1, &q(0)), Some(qf(-1, 2)));
        assert_eq!(c.level(-3, &q(0)), Some(q(-4)));
        // at depth t the blend is (1 − t/ε)·g(i) + (t/ε)·(x₀ + i)
        let t = qf(1, 8);
        let expected = (q(1) - &t * q(2)) * qf(-1, 2) + &t * q(2) * q(0);
        assert_eq!(c.level(1, &-t.clone()), Some(expected.clone()));
        assert_eq!(c.level(1, &t), Some(expected));
        for i in -20..20 {
            for k in 1..100 {
                let v = qf(k - 50, 100);
                assert!(c.level(i, &v) < c.level(i + 1, &v));
            }
        }
    }

    #[test]
    fn eval_and_inverse_are_exact() {
        let (m, c) = vertex_chart("M1", 1);
        for s in [qf(-7, 3), q(0), qf(1, 2), q(40)] {
            for v in [qf(-3, 7), q(0), qf(1, 5)] {
                let pt = c.eval(&s, &v).unwrap();
                m.check_point(&pt).unwrap();
                assert_eq!(c.inverse(&pt).unwrap(), (s.clone(), v.clone()));
            }
        }
        let far = ModelPoint::InStrip { strip: StripId(0), x: q(1_000_000), y: qf(99, 100) };
        let (s, v) = c.inverse(&far).unwrap();
        assert_eq!(c.eval(&s, &v).unwrap(), far);
    }

    #[test]
    fn parameters_must_be_positive() {
        assert!(TowerParams::new(q(0), q(1)).is_err());
        assert!(TowerParams::new(q(1), qf(-1, 2)).is_err());
    }
}
