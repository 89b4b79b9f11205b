//! The scene itself: exterior body, obstacles and cheap derived geometry.

use nalgebra::DVector;

use crate::error::SceneError;
use crate::geometry::{ChartKind, MetricChart};
use crate::scene::body::{boundary_shape_operator, BodyShape, ImplicitBody};
use crate::scene::boundary::BoundaryChart;

/// Cheap geometric constants computed eagerly at scene construction.
///
/// `d_min` is reported as +infinity (with a warning) when fewer than two
/// obstacles are present; `reflection_window` is then flagged as undefined.
#[derive(Clone, Debug)]
pub struct GeometrySummary {
    /// Diameter of the exterior body (metric).
    pub diameter: f64,
    /// Minimum boundary distance between distinct obstacle components.
    pub d_min: f64,
    /// `ceil(diameter / d_min) + 2`.
    pub reflection_window: u32,
    /// Lower bound on obstacle boundary principal curvatures (sampled).
    pub kappa_min: f64,
    /// Upper bound on the sectional curvature over the scene.
    pub sec_max: f64,
    pub warnings: Vec<String>,
}

/// Exterior body S plus disjoint strictly convex obstacles.
///
/// Immutable after construction; construction validates strict convexity,
/// pairwise disjointness with margin, and containment of every obstacle in
/// the interior of S.
#[derive(Clone, Debug)]
pub struct Scene {
    pub chart: MetricChart,
    pub exterior: ImplicitBody,
    pub obstacles: Vec<ImplicitBody>,
    pub summary: GeometrySummary,
    pub boundary: BoundaryChart,
}

/// Samples per boundary used by validation and the sampled constants.
const VALIDATION_SAMPLES: usize = 256;

impl Scene {
    pub fn new(
        chart: MetricChart,
        exterior: ImplicitBody,
        obstacles: Vec<ImplicitBody>,
    ) -> Result<Self, SceneError> {
        let n = chart.dim();
        for body in std::iter::once(&exterior).chain(obstacles.iter()) {
            if body.dim() != n {
                return Err(SceneError::DimensionMismatch {
                    chart_dim: n,
                    label: body.label,
                    body_dim: body.dim(),
                });
            }
        }

        let ext_samples = exterior.boundary_samples(VALIDATION_SAMPLES)?;
        let obs_samples: Vec<Vec<DVector<f64>>> = obstacles
            .iter()
            .map(|b| b.boundary_samples(VALIDATION_SAMPLES))
            .collect::<Result<_, _>>()?;

        // strict convexity of every boundary, and kappa_min over obstacles
        let mut kappa_min = f64::INFINITY;
        for (body, samples) in std::iter::once((&exterior, &ext_samples))
            .chain(obstacles.iter().zip(obs_samples.iter()))
        {
            let mut body_min = f64::INFINITY;
            let mut worst_point = None;
            for x in samples {
                let (s, _, _) = boundary_shape_operator(body, &chart, x)?;
                let min_eig = s.symmetric_eigenvalues().min();
                if min_eig < body_min {
                    body_min = min_eig;
                    worst_point = Some(x.clone());
                }
            }
            if body_min <= 0.0 {
                return Err(SceneError::NotStrictlyConvex {
                    label: body.label,
                    point: worst_point.map(|p| p.iter().copied().collect()).unwrap_or_default(),
                    min_curvature: body_min,
                });
            }
            if !std::ptr::eq(body, &exterior) {
                kappa_min = kappa_min.min(body_min);
            }
        }
        if obstacles.is_empty() {
            kappa_min = f64::NAN;
        }

        // containment: every obstacle boundary point strictly inside S
        for (body, samples) in obstacles.iter().zip(obs_samples.iter()) {
            for x in samples {
                if exterior.psi(x) >= 0.0 {
                    return Err(SceneError::ObstacleNotInterior { label: body.label });
                }
            }
        }

        let diameter = estimate_diameter(&chart, &exterior, &ext_samples);

        // pairwise obstacle boundary distances with the separation margin
        let margin = 1e-3 * diameter;
        let mut d_min = f64::INFINITY;
        let mut warnings = Vec::new();
        for i in 0..obstacles.len() {
            for j in (i + 1)..obstacles.len() {
                let dist = pair_distance(&chart, &obstacles[i], &obstacles[j], &obs_samples[i], &obs_samples[j]);
                if dist < margin {
                    return Err(SceneError::ObstaclesTooClose {
                        a: obstacles[i].label,
                        b: obstacles[j].label,
                        dist,
                        margin,
                    });
                }
                d_min = d_min.min(dist);
            }
        }
        let reflection_window = if obstacles.len() >= 2 {
            (diameter / d_min).ceil() as u32 + 2
        } else {
            warnings.push(
                "fewer than two obstacle components: d_min and the reflection window are undefined"
                    .to_string(),
            );
            2
        };

        let sec_max = match chart.curvature_constant() {
            Some(c) => c,
            None => sampled_sec_max(&chart, &exterior, &ext_samples),
        };

        let boundary = BoundaryChart::build(&chart, &exterior)?;

        Ok(Scene {
            chart,
            exterior,
            obstacles,
            summary: GeometrySummary { diameter, d_min, reflection_window, kappa_min, sec_max, warnings },
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Signed distance estimate from `x` to the nearest obstacle boundary,
    /// first order in psi.
    pub fn obstacle_clearance(&self, x: &DVector<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for body in &self.obstacles {
            let g = body.grad_psi(x).norm().max(1e-12);
            best = best.min(body.psi(x) / g);
        }
        best
    }

    /// True when `x` is inside the closed billiard domain (inside S, outside
    /// every obstacle) within tolerance.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.exterior.psi(x) <= tol && self.obstacles.iter().all(|b| b.psi(x) >= -tol)
    }
}

fn estimate_diameter(chart: &MetricChart, exterior: &ImplicitBody, samples: &[DVector<f64>]) -> f64 {
    // analytic shortcuts on the flat chart
    if matches!(chart.kind(), ChartKind::FlatCartesian) {
        match &exterior.shape {
            BodyShape::Disc { radius, .. } | BodyShape::Ball { radius, .. } => return 2.0 * radius,
            BodyShape::Ellipse { semi_axes, .. } => {
                return 2.0 * semi_axes.iter().cloned().fold(0.0, f64::max)
            }
            BodyShape::Polynomial { .. } => {}
        }
    }
    // sampled maximum of pairwise boundary distances, then a local sweep
    let mut best = 0.0;
    let mut arg = (0, 0);
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d = chart.distance(&samples[i], &samples[j]);
            if d > best {
                best = d;
                arg = (i, j);
            }
        }
    }
    // refine around the best pair by perturbing boundary directions
    if exterior.dim() == 2 {
        let refine = |i: usize| -> f64 {
            let x = &samples[i];
            let c = exterior.interior_point();
            (x[1] - c[1]).atan2(x[0] - c[0])
        };
        let (mut ta, mut tb) = (refine(arg.0), refine(arg.1));
        let mut span = 2.0 * std::f64::consts::PI / samples.len() as f64;
        for _ in 0..40 {
            let mut improved = false;
            for (da, db) in [(span, 0.0), (-span, 0.0), (0.0, span), (0.0, -span)] {
                let pa = exterior
                    .boundary_along(&DVector::from_vec(vec![(ta + da).cos(), (ta + da).sin()]));
                let pb = exterior
                    .boundary_along(&DVector::from_vec(vec![(tb + db).cos(), (tb + db).sin()]));
                if let (Ok(pa), Ok(pb)) = (pa, pb) {
                    let d = chart.distance(&pa, &pb);
                    if d > best {
                        best = d;
                        ta += da;
                        tb += db;
                        improved = true;
                    }
                }
            }
            if !improved {
                span *= 0.5;
            }
            if span < 1e-10 {
                break;
            }
        }
    }
    best
}

fn pair_distance(
    chart: &MetricChart,
    a: &ImplicitBody,
    b: &ImplicitBody,
    sa: &[DVector<f64>],
    sb: &[DVector<f64>],
) -> f64 {
    // analytic for coordinate discs/balls on the flat chart
    if matches!(chart.kind(), ChartKind::FlatCartesian) {
        let centers = |body: &ImplicitBody| match &body.shape {
            BodyShape::Disc { center, radius } | BodyShape::Ball { center, radius } => {
                Some((DVector::from_vec(center.clone()), *radius))
            }
            _ => None,
        };
        if let (Some((ca, ra)), Some((cb, rb))) = (centers(a), centers(b)) {
            return (ca - cb).norm() - ra - rb;
        }
    }
    let mut best = f64::INFINITY;
    let mut arg = (0, 0);
    for (i, p) in sa.iter().enumerate() {
        for (j, q) in sb.iter().enumerate() {
            let d = chart.distance(p, q);
            if d < best {
                best = d;
                arg = (i, j);
            }
        }
    }
    // local refinement in 2D by angular perturbation around the closest pair
    if a.dim() == 2 {
        let angle_of = |body: &ImplicitBody, x: &DVector<f64>| {
            let c = body.interior_point();
            (x[1] - c[1]).atan2(x[0] - c[0])
        };
        let (mut ta, mut tb) = (angle_of(a, &sa[arg.0]), angle_of(b, &sb[arg.1]));
        let mut span = 2.0 * std::f64::consts::PI / sa.len() as f64;
        for _ in 0..40 {
            let mut improved = false;
            for (da, db) in [(span, 0.0), (-span, 0.0), (0.0, span), (0.0, -span)] {
                let pa = a.boundary_along(&DVector::from_vec(vec![(ta + da).cos(), (ta + da).sin()]));
                let pb = b.boundary_along(&DVector::from_vec(vec![(tb + db).cos(), (tb + db).sin()]));
                if let (Ok(pa), Ok(pb)) = (pa, pb) {
                    let d = chart.distance(&pa, &pb);
                    if d < best {
                        best = d;
                        ta += da;
                        tb += db;
                        improved = true;
                    }
                }
            }
            if !improved {
                span *= 0.5;
            }
            if span < 1e-10 {
                break;
            }
        }
    }
    best
}

fn sampled_sec_max(chart: &MetricChart, exterior: &ImplicitBody, boundary: &[DVector<f64>]) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5ec);
    let n = chart.dim();
    let seed = exterior.interior_point();
    let mut points: Vec<DVector<f64>> = vec![seed.clone()];
    // blend interior points between the seed and boundary samples
    for (i, b) in boundary.iter().enumerate().step_by(7) {
        let t = 0.2 + 0.6 * ((i % 5) as f64 / 5.0);
        points.push(&seed + (b - &seed) * t);
    }
    let mut best = f64::NEG_INFINITY;
    for x in &points {
        for _ in 0..8 {
            let u = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
            let v = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
            if let Ok(sec) = chart.sectional_curvature(x, &u, &v) {
                best = best.max(sec);
            }
        }
    }
    best
}
