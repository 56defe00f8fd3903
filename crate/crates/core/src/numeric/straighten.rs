use serde::{Deserialize, Serialize};

use super::{Domain, EmbeddingEvaluator, NumericError, PlanePoint};

/// Sampled graphs `f_1 < … < f_k` over a grid of the base, to be moved onto the
/// constant levels `c_1 < … < c_k` inside `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSample {
    pub z: Vec<f64>,
    /// `values[i][j] = f_i(z[j])`.
    pub values: Vec<Vec<f64>>,
    pub interval: (f64, f64),
    pub targets: Vec<f64>,
}

impl GraphSample {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), NumericError> {
        let bad = |m: String| Err(NumericError::InvalidSample(m));
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return bad(format!("interval ({a}, {b}) is not a finite nonempty interval"));
        }
        if self.z.is_empty() || self.z.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("z grid must be nonempty and strictly increasing".into());
        }
        if self.values.len() != self.targets.len() || self.targets.is_empty() {
            return bad(format!("{} graphs but {} targets", self.values.len(), self.targets.len()));
        }
        for &c in &self.targets {
            if !(a < c && c < b) {
                return Err(NumericError::TargetOutsideInterval(c));
            }
        }
        if self.targets.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("targets must be strictly increasing".into());
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != self.z.len() {
                return bad(format!("graph {i} has {} samples, expected {}", row.len(), self.z.len()));
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !(a < **v && **v < b)) {
                return bad(format!("f_{}({}) = {v} outside the interval", i + 1, self.z[j]));
            }
        }
        for j in 0..self.z.len() {
            for i in 1..self.values.len() {
                if !(self.values[i - 1][j] < self.values[i][j]) {
                    return bad(format!("ordering violation f_{} >= f_{} at z = {}", i, i + 1, self.z[j]));
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.targets.len()
    }

    /// Graph values at `z`, piecewise linear between samples.
    pub fn levels_at(&self, z: f64) -> Vec<f64> {
        let n = self.z.len();
        let j = self.z.partition_point(|&x| x <= z);
        self.values
            .iter()
            .map(|row| {
                if j == 0 {
                    row[0]
                } else if j >= n {
                    row[n - 1]
                } else {
                    let (z0, z1) = (self.z[j - 1], self.z[j]);
                    let w = (z - z0) / (z1 - z0);
                    if w == 0.0 {
                        row[j - 1]
                    } else {
                        row[j - 1] + w * (row[j] - row[j - 1])
                    }
                }
            })
            .collect()
    }
}

/// One single-graph straightening on the slab `[lower, 1]`: `w ↦ w^exponent` in the
/// slab's own unit coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraightenStep {
    pub lower: f64,
    pub exponent: f64,
}

impl StraightenStep {
    fn apply(&self, x: f64, exponent: f64) -> f64 {
        if exponent == 1.0 || x <= self.lower || x >= 1.0 {
            return x;
        }
        let span = 1.0 - self.lower;
        // `w^e` with `e < 1` blows rounding noise above the floor up to ~1e-5.
        if x - self.lower <= 8.0 * f64::EPSILON * span.max(self.lower) {
            return self.lower;
        }
        self.lower + span * ((x - self.lower) / span).powf(exponent)
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.apply(x, self.exponent)
    }

    pub fn backward(&self, x: f64) -> f64 {
        self.apply(x, 1.0 / self.exponent)
    }
}

/// The sequence of steps taking unit-interval levels `p` onto targets `c`. Step `j`
/// moves the current position of level `j` onto `c_j` and leaves everything below
/// `c_{j-1}` alone.
pub fn straighten_steps(p: &[f64], c: &[f64]) -> Vec<StraightenStep> {
    let mut pos = p.to_vec();
    let mut lower = 0.0;
    let mut steps = Vec::with_capacity(p.len());
    for j in 0..p.len() {
        let span = 1.0 - lower;
        let pj = (pos[j] - lower) / span;
        let cj = (c[j] - lower) / span;
        let exponent = if pos[j] == c[j] { 1.0 } else { cj.ln() / pj.ln() };
        let step = StraightenStep { lower, exponent };
        for x in pos.iter_mut().skip(j + 1) {
            *x = step.forward(*x);
        }
        pos[j] = c[j];
        steps.push(step);
        lower = c[j];
    }
    steps
}

/// Straightens a single unit-interval coordinate `s` for levels `p` and targets `c`.
pub fn straighten_point(s: f64, p: &[f64], c: &[f64]) -> f64 {
    straighten_steps(p, c).iter().fold(s, |x, st| st.forward(x))
}

/// The homeomorphism `h` of `[a,b] × Z` that preserves each line `[a,b] × {z}` and
/// sends every graph point `(f_i(z), z)` to `(c_i, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Straightening {
    sample: GraphSample,
}

impl Straightening {
    pub fn sample(&self) -> &GraphSample {
        &self.sample
    }

    fn unit(&self, z: f64) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.sample.interval;
        let scale = |v: f64| (v - a) / (b - a);
        (
            self.sample.levels_at(z).into_iter().map(scale).collect(),
            self.sample.targets.iter().map(|&c| scale(c)).collect(),
        )
    }

    fn map_line(&self, s: f64, z: f64, forward: bool) -> f64 {
        let (a, b) = self.sample.interval;
        if s == a || s == b {
            return s;
        }
        let (p, c) = self.unit(z);
        let steps = straighten_steps(&p, &c);
        let r = (s - a) / (b - a);
        let h = if forward {
            steps.iter().fold(r, |x, st| st.forward(x))
        } else {
            steps.iter().rev().fold(r, |x, st| st.backward(x))
        };
        a + (b - a) * h
    }
}

pub fn straighten_graphs(gs: &GraphSample) -> Result<Straightening, NumericError> {
    gs.validate()?;
    Ok(Straightening { sample: gs.clone() })
}

impl EmbeddingEvaluator for Straightening {
    fn domain(&self) -> Domain {
        let z = &self.sample.z;
        Domain::closed(self.sample.interval, (z[0], z[z.len() - 1]))
    }

    fn eval(&self, t: f64, u: f64) -> Result<PlanePoint, NumericError> {
        self.domain().check(t, u)?;
        Ok(PlanePoint::new(self.map_line(t, u, true), u))
    }

    fn inverse(&self, p: PlanePoint) -> Result<(f64, f64), NumericError> {
        self.domain().check(p.fiber, p.base)?;
        Ok((self.map_line(p.fiber, p.base, false), p.base))
    }

    fn fixed_fiber_ends(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(k_values: &[f64], targets: &[f64]) -> GraphSample {
        let z: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        GraphSample {
            values: k_values.iter().map(|&v| vec![v; z.len()]).collect(),
            z,
            interval: (0.0, 1.0),
            targets: targets.to_vec(),
        }
    }

    #[test]
    fn single_graph_exponent_formula() {
        let h = straighten_graphs(&constant(&[0.25], &[0.5])).unwrap();
        assert!((h.eval(0.25, 0.3).unwrap().fiber - 0.5).abs() < 1e-12);
        assert!((h.eval(0.0625, 0.3).unwrap().fiber - 0.25).abs() < 1e-12);
        assert_eq!(h.eval(0.0, 0.3).unwrap().fiber, 0.0);
        assert_eq!(h.eval(1.0, 0.3).unwrap().fiber, 1.0);
    }

    #[test]
    fn identity_when_graphs_sit_on_targets() {
        let h = straighten_graphs(&constant(&[0.2, 0.7], &[0.2, 0.7])).unwrap();
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert_eq!(h.eval(s, 0.5).unwrap().fiber, s);
        }
    }

    #[test]
    fn several_graphs_hit_their_targets() {
        let z: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
        let gs = GraphSample {
            values: vec![
                z.iter().map(|z| 1.2 + 0.3 * z).collect(),
                z.iter().map(|z| 2.0 + 0.5 * z * z).collect(),
                z.iter().map(|z| 2.8 - 0.1 * z).collect(),
            ],
            z: z.clone(),
            interval: (1.0, 3.0),
            targets: vec![1.5, 2.0, 2.5],
        };
        let h = straighten_graphs(&gs).unwrap();
        for (j, &zj) in z.iter().enumerate() {
            for i in 0..3 {
                let out = h.eval(gs.values[i][j], zj).unwrap().fiber;
                assert!((out - gs.targets[i]).abs() < 1e-9, "graph {i} at {zj}: {out}");
            }
            let back = h.inverse(PlanePoint::new(2.2, zj)).unwrap().0;
            assert!((h.eval(back, zj).unwrap().fiber - 2.2).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_samples_are_rejected() {
        let mut gs = constant(&[0.3, 0.2], &[0.4, 0.6]);
        assert!(matches!(straighten_graphs(&gs), Err(NumericError::InvalidSample(_))));
        gs = constant(&[0.3], &[1.0]);
        assert_eq!(straighten_graphs(&gs), Err(NumericError::TargetOutsideInterval(1.0)));
        gs = constant(&[0.0], &[0.5]);
        assert!(straighten_graphs(&gs).is_err());
    }

    #[test]
    fn rounding_above_a_placed_level_is_not_amplified() {
        let (a, b) = (0.9846643413686884, 3.8125563949852466);
        let gs = GraphSample {
            z: vec![0.0, 1.0],
            values: vec![vec![2.4175765319016973; 2], vec![2.605000934784381; 2], vec![3.571141762004541; 2]],
            interval: (a, b),
            targets: vec![1.5493008700163855, 2.5567535031118105, 3.303860560818557],
        };
        let h = straighten_graphs(&gs).unwrap();
        for i in 0..3 {
            let got = h.eval(gs.values[i][0], 0.5).unwrap().fiber;
            assert!((got - gs.targets[i]).abs() < 1e-12, "level {i}: {got}");
        }
    }
}
