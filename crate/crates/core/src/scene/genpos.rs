//! Statistical check of the no-eclipse property: no smooth geodesic meets
//! more than two distinct obstacle components.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::billiard::smooth_ray_obstacle_hits;
use crate::error::BilliardError;
use crate::geometry::PhasePoint;
use crate::scene::Scene;

/// A geodesic meeting three or more components, kept for deterministic
/// re-checking.
#[derive(Clone, Debug)]
pub struct EclipseWitness {
    pub start: PhasePoint,
    pub components: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GeneralPositionReport {
    pub pass: bool,
    pub reason: String,
    pub samples_run: usize,
    pub witness: Option<EclipseWitness>,
}

/// Obstacle labels met by the full geodesic through `start` (both
/// directions), traced until it leaves the exterior body.
pub fn recheck_witness(scene: &Scene, start: &PhasePoint) -> Result<Vec<usize>, BilliardError> {
    let t_max = 3.0 * scene.summary.diameter;
    let mut labels = smooth_ray_obstacle_hits(scene, start, t_max, 1e-9)?;
    let back = smooth_ray_obstacle_hits(scene, &start.reversed(), t_max, 1e-9)?;
    for l in back {
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    labels.sort_unstable();
    Ok(labels)
}

/// Samples geodesics through pairs of obstacle boundary points and counts
/// the distinct components each full geodesic meets.
///
/// Scenes with at most two components pass trivially. The check is
/// statistical; the report carries the sample count and, on failure, a
/// witness whose re-check is deterministic.
pub fn check_general_position(
    scene: &Scene,
    samples: usize,
    seed: u64,
) -> Result<GeneralPositionReport, BilliardError> {
    let d = scene.obstacles.len();
    if d <= 2 {
        return Ok(GeneralPositionReport {
            pass: true,
            reason: "d <= 2".to_string(),
            samples_run: 0,
            witness: None,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = &scene.chart;
    let n = scene.dim();

    // draw the sample geodesics deterministically, then scan them in
    // parallel chunks so a witness is reported from the earliest chunk
    let mut starts: Vec<PhasePoint> = Vec::with_capacity(samples);
    while starts.len() < samples {
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let dir_i = random_direction(&mut rng, n);
        let dir_j = random_direction(&mut rng, n);
        let p = scene.obstacles[i].boundary_along(&dir_i)?;
        let q = scene.obstacles[j].boundary_along(&dir_j)?;
        let Ok(v) = chart.log_direction(&p, &q) else { continue };
        starts.push(PhasePoint { x: p, v });
    }

    let chunk = 512;
    let mut run = 0usize;
    for batch in starts.chunks(chunk) {
        let hits: Vec<Vec<usize>> = batch
            .par_iter()
            .map(|start| recheck_witness(scene, start))
            .collect::<Result<_, _>>()?;
        for (k, labels) in hits.into_iter().enumerate() {
            run += 1;
            if labels.len() >= 3 {
                return Ok(GeneralPositionReport {
                    pass: false,
                    reason: format!("geodesic meets components {labels:?}"),
                    samples_run: run,
                    witness: Some(EclipseWitness { start: batch[k].clone(), components: labels }),
                });
            }
        }
    }
    Ok(GeneralPositionReport {
        pass: true,
        reason: format!("no triple intersection in {samples} samples"),
        samples_run: samples,
        witness: None,
    })
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0f64)));
        let nn = v.norm();
        if nn > 1e-3 && nn <= 1.0 {
            return v / nn;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricChart;
    use crate::scene::{BodyShape, ImplicitBody};

    fn scene_with_discs(discs: &[(f64, f64, f64)], radius_s: f64) -> Scene {
        let chart = MetricChart::flat(2);
        let s = ImplicitBody::new(BodyShape::Disc { center: vec![0.0, 0.0], radius: radius_s }, 0);
        let obs = discs
            .iter()
            .enumerate()
            .map(|(i, (cx, cy, r))| {
                ImplicitBody::new(BodyShape::Disc { center: vec![*cx, *cy], radius: *r }, i + 1)
            })
            .collect();
        Scene::new(chart, s, obs).unwrap()
    }

    #[test]
    fn two_components_pass_trivially() {
        let scene = scene_with_discs(&[(-2.0, 0.0, 1.0), (2.0, 0.0, 1.0)], 5.0);
        let rep = check_general_position(&scene, 10, 1).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.reason, "d <= 2");
    }

    #[test]
    fn collinear_discs_fail_with_an_axis_witness() {
        let scene = scene_with_discs(&[(-3.0, 0.0, 0.5), (0.0, 0.0, 0.5), (3.0, 0.0, 0.5)], 6.0);
        let rep = check_general_position(&scene, 4000, 7).unwrap();
        assert!(!rep.pass);
        let w = rep.witness.unwrap();
        assert!(w.components.len() >= 3);
        // the witness re-checks deterministically
        let again = recheck_witness(&scene, &w.start).unwrap();
        assert_eq!(again, w.components);
    }

    /// Exhaustive 2D sweep over line directions: for each angle the set of
    /// signed offsets meeting a disc is an interval; three discs admit a
    /// common secant iff the three intervals overlap at some angle.
    fn common_secant_exists(discs: &[(f64, f64, f64)]) -> bool {
        let steps = 20_000;
        for k in 0..steps {
            let th = std::f64::consts::PI * k as f64 / steps as f64;
            let (nx, ny) = (th.cos(), th.sin());
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (cx, cy, r) in discs {
                let c = cx * nx + cy * ny;
                lo = lo.max(c - r);
                hi = hi.min(c + r);
            }
            if lo <= hi {
                return true;
            }
        }
        false
    }

    #[test]
    fn equilateral_triangle_of_small_discs_passes() {
        let side = 4.0;
        let h = side * 3.0f64.sqrt() / 2.0;
        let discs =
            [(-side / 2.0, -h / 3.0, 0.3), (side / 2.0, -h / 3.0, 0.3), (0.0, 2.0 * h / 3.0, 0.3)];
        // the sweep oracle confirms no common secant line exists
        assert!(!common_secant_exists(&discs));
        // and a sanity case the oracle must catch
        assert!(common_secant_exists(&[(-3.0, 0.0, 0.5), (0.0, 0.0, 0.5), (3.0, 0.0, 0.5)]));

        let scene = scene_with_discs(&discs, 6.0);
        let rep = check_general_position(&scene, 100_000, 3).unwrap();
        assert!(rep.pass, "reason: {}", rep.reason);
    }
}
