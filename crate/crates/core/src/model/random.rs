//! Seeded generator of valid striped models, for property tests.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ArcRef, Gluing, Interval, Orientation, Side, SideEnd, SideSpec, Strip, StripId, StripModel};
use crate::rational::{qf, ExtRat, Q};

#[derive(Debug, Clone, Copy)]
pub struct RandomModelConfig {
    pub max_strips: usize,
    pub max_arcs_per_side: usize,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig { max_strips: 6, max_arcs_per_side: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Bounded,
    Full,
    Left,
    Right,
}

#[derive(Default)]
struct EndPlan {
    // (shape, gluing index, first arc of the gluing?)
    arcs: Vec<(Shape, usize, bool)>,
}

impl EndPlan {
    fn has(&self, shape: Shape) -> bool {
        self.arcs.iter().any(|(s, _, _)| *s == shape)
    }

    fn accepts(&self, shape: Shape, limit: usize) -> bool {
        if self.arcs.len() >= limit || self.has(Shape::Full) {
            return false;
        }
        match shape {
            Shape::Full => self.arcs.is_empty(),
            Shape::Left | Shape::Right => !self.has(shape),
            Shape::Bounded => true,
        }
    }
}

/// Generates a valid model from `seed`.
pub fn random_model(seed: u64, config: RandomModelConfig) -> StripModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=config.max_strips.max(1));
    let ends: Vec<SideEnd> = (0..n)
        .flat_map(|i| Side::BOTH.into_iter().map(move |side| SideEnd { strip: StripId(i), side }))
        .collect();
    let mut plans: Vec<EndPlan> = ends.iter().map(|_| EndPlan::default()).collect();
    let mut glue_specs: Vec<Orientation> = Vec::new();

    let attempts = rng.random_range(0..=2 * n + 2);
    for _ in 0..attempts {
        let i = rng.random_range(0..ends.len());
        let j = rng.random_range(0..ends.len());
        if i == j {
            continue;
        }
        let choices = [
            (Shape::Bounded, Shape::Bounded, Orientation::Keep),
            (Shape::Bounded, Shape::Bounded, Orientation::Flip),
            (Shape::Bounded, Shape::Bounded, Orientation::Keep),
            (Shape::Full, Shape::Full, Orientation::Keep),
            (Shape::Full, Shape::Full, Orientation::Flip),
            (Shape::Left, Shape::Left, Orientation::Keep),
            (Shape::Right, Shape::Right, Orientation::Keep),
            (Shape::Left, Shape::Right, Orientation::Flip),
            (Shape::Right, Shape::Left, Orientation::Flip),
        ];
        let &(sa, sb, orient) = choices.choose(&mut rng).expect("non-empty");
        if !plans[i].accepts(sa, config.max_arcs_per_side) || !plans[j].accepts(sb, config.max_arcs_per_side) {
            continue;
        }
        let id = glue_specs.len();
        glue_specs.push(orient);
        plans[i].arcs.push((sa, id, true));
        plans[j].arcs.push((sb, id, false));
    }

    let mut strips: Vec<Strip> = (0..n).map(|i| Strip::new(format!("s{}", i + 1))).collect();
    let mut refs: Vec<[Option<ArcRef>; 2]> = vec![[None, None]; glue_specs.len()];
    let lengths = [qf(1, 2), qf(1, 1), qf(2, 1), qf(3, 1)];
    let gaps = [qf(0, 1), qf(0, 1), qf(1, 2), qf(1, 1)];

    for (end, plan) in ends.iter().zip(&plans) {
        let spec = if plan.arcs.is_empty() {
            if rng.random_bool(0.3) {
                SideSpec::Boundary
            } else {
                SideSpec::Open
            }
        } else {
            let mut ordered: Vec<&(Shape, usize, bool)> = plan.arcs.iter().collect();
            ordered.sort_by_key(|(s, id, _)| {
                let rank = match s {
                    Shape::Full | Shape::Left => 0,
                    Shape::Bounded => 1,
                    Shape::Right => 2,
                };
                (rank, *id)
            });
            let mut cursor: Q = qf(rng.random_range(-3..=1), 1);
            let mut arcs = Vec::new();
            for (index, (shape, id, first)) in ordered.into_iter().enumerate() {
                let interval = match shape {
                    Shape::Full => Interval::full(),
                    Shape::Left => Interval { lo: ExtRat::NegInf, hi: ExtRat::Finite(cursor.clone()) },
                    Shape::Bounded => {
                        let lo = &cursor + gaps.choose(&mut rng).expect("non-empty");
                        let hi = &lo + lengths.choose(&mut rng).expect("non-empty");
                        cursor = hi.clone();
                        Interval { lo: ExtRat::Finite(lo), hi: ExtRat::Finite(hi) }
                    }
                    Shape::Right => {
                        let lo = &cursor + gaps.choose(&mut rng).expect("non-empty");
                        Interval { lo: ExtRat::Finite(lo), hi: ExtRat::PosInf }
                    }
                };
                arcs.push(interval);
                refs[*id][usize::from(!first)] = Some(ArcRef { strip: end.strip, side: end.side, index });
            }
            SideSpec::Glued(arcs)
        };
        *strips[end.strip.0].side_mut(end.side) = spec;
    }

    let gluings = refs
        .into_iter()
        .zip(glue_specs)
        .map(|([a, b], orientation)| Gluing { a: a.expect("placed"), b: b.expect("placed"), orientation })
        .collect();
    let model = StripModel { strips, gluings };
    debug_assert!(super::validate_model(&model).is_valid(), "{}", super::validate_model(&model));
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn generated_models_validate_and_respect_limits() {
        let config = RandomModelConfig::default();
        for seed in 0..200 {
            let m = random_model(seed, config);
            let report = validate_model(&m);
            assert!(report.is_valid(), "seed {seed}: {report}\n{m}");
            assert!(m.strips.len() <= config.max_strips);
            for s in &m.strips {
                assert!(s.top.arcs().len() <= config.max_arcs_per_side);
                assert!(s.bottom.arcs().len() <= config.max_arcs_per_side);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(random_model(17, RandomModelConfig::default()), random_model(17, RandomModelConfig::default()));
    }
}
