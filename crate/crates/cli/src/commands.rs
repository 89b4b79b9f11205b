//! Command implementations. Each command builds its output artifacts as
//! strings; all file writes happen once, at the end, in the binary.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use thiserror::Error;

use billiards_core::billiard::{
    sample_sigmas, sample_travel_times, trace, EventKind, EventOptions, Sampler, SamplerKind,
    TraceLimits, Trajectory,
};
use billiards_core::fronts::{
    construct_tangent_front_auto, front_separation_check, propagate_front_patch, FrontLimits,
    FrontPatch, TangentFrontOptions,
};
use billiards_core::scene::{
    compute_constants, parse_scene_str, scene_to_string, Condition, ParsedScene,
    Scene,
};
use billiards_core::{BilliardError, FrontError, GeomError, SceneError};

use crate::output::{scene_hash, sig12, Sidecar};
use crate::svg::render_scene_svg_with_meta;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scene error: {0}")]
    Scene(#[from] SceneError),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("numerical error: {0}")]
    Billiard(#[from] BilliardError),
    #[error("numerical error: {0}")]
    Front(#[from] FrontError),
    #[error("numerical error: {0}")]
    Geometry(#[from] GeomError),
    #[error("scenes are not comparable: {0}")]
    Incomparable(String),
    #[error("bad argument: {0}")]
    BadArgument(String),
}

impl CliError {
    /// Process exit code: 2 scene/input errors, 3 numerical errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scene(_) | CliError::Io { .. } | CliError::Incomparable(_) | CliError::BadArgument(_) => 2,
            CliError::Billiard(_) | CliError::Front(_) | CliError::Geometry(_) => 3,
        }
    }
}

/// A loaded scene with the hash of its file bytes.
pub struct LoadedScene {
    pub parsed: ParsedScene,
    pub hash: String,
}

pub fn load_scene(path: &Path) -> Result<LoadedScene, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let parsed = parse_scene_str(&text)?;
    Ok(LoadedScene { parsed, hash: scene_hash(text.as_bytes()) })
}

/// Sampling/limit options shared by the ray-batch commands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub samples: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub t_max: Option<f64>,
    pub max_reflections: Option<usize>,
    pub tangency_tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            samples: 1000,
            seed: 0,
            sampler: SamplerKind::Random,
            t_max: None,
            max_reflections: None,
            tangency_tol: None,
        }
    }
}

impl RunConfig {
    pub fn limits(&self, scene: &Scene) -> TraceLimits {
        let mut l = TraceLimits::for_scene(scene);
        if let Some(t) = self.t_max {
            l.t_max = t;
        }
        if let Some(m) = self.max_reflections {
            l.max_reflections = m;
        }
        l
    }

    pub fn event_options(&self) -> EventOptions {
        let mut o = EventOptions::default();
        if let Some(t) = self.tangency_tol {
            o.tangency_tol = t;
        }
        o
    }

    fn describe_sampler(&self) -> &'static str {
        match self.sampler {
            SamplerKind::Grid => "grid",
            SamplerKind::Random => "random",
        }
    }
}

/// Files produced by a command: (relative name, contents).
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub summary: String,
    pub exit_code: i32,
}

/// Travelling-time batch: one CSV row per exited ray plus a sidecar with
/// the trapped statistics and the cheap scene constants.
pub fn cmd_travel(loaded: &LoadedScene, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let scene = &loaded.parsed.scene;
    let limits = cfg.limits(scene);
    let opts = cfg.event_options();
    let sampler = Sampler { kind: cfg.sampler, count: cfg.samples, seed: cfg.seed };
    let (records, stats) = sample_travel_times(scene, &sampler, &limits, &opts)?;

    let p = scene.boundary.param_dim();
    let mut csv = String::new();
    let entry_cols: Vec<String> = (0..p).map(|i| format!("entry_p{i}")).collect();
    let exit_cols: Vec<String> = (0..p).map(|i| format!("exit_p{i}")).collect();
    csv.push_str(&format!(
        "{},{},t,reflections,tangencies,itinerary\n",
        entry_cols.join(","),
        exit_cols.join(",")
    ));
    for rec in &records {
        let entry: Vec<String> = rec.entry_params.iter().map(|x| sig12(*x)).collect();
        let exit: Vec<String> = rec.exit_params.iter().map(|x| sig12(*x)).collect();
        let itin: Vec<String> = rec.itinerary.iter().map(|s| s.to_string()).collect();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            entry.join(","),
            exit.join(","),
            sig12(rec.t),
            rec.reflections,
            rec.tangencies,
            itin.join("-")
        ));
    }

    let mut side = Sidecar::new(&loaded.hash, cfg.seed);
    side.push("command", "travel");
    side.push("sampler", cfg.describe_sampler());
    side.push("samples_requested", cfg.samples);
    side.push("rays_traced", stats.total);
    side.push("records", stats.records);
    side.push("trapped", stats.trapped);
    side.push("singular", stats.singular);
    side.push("t_max", sig12(limits.t_max));
    side.push("max_reflections", limits.max_reflections);
    side.push("tangency_tol", format!("{:e}", opts.tangency_tol));
    push_summary_constants(&mut side, scene);

    let summary = format!(
        "travel: {} rays, {} records, {} trapped, {} singular",
        stats.total, stats.records, stats.trapped, stats.singular
    );
    Ok(Artifacts {
        files: vec![("travel.csv".into(), csv), ("travel.meta".into(), side.render())],
        summary,
        exit_code: 0,
    })
}

fn push_summary_constants(side: &mut Sidecar, scene: &Scene) {
    side.push("constants.d_min", sig12(scene.summary.d_min));
    side.push("constants.diameter", sig12(scene.summary.diameter));
    side.push("constants.reflection_window", scene.summary.reflection_window);
    side.push("constants.kappa_min", sig12(scene.summary.kappa_min));
    side.push("constants.sec_max", sig12(scene.summary.sec_max));
}

/// Pointwise agreement check of two trajectories up to the first tangency.
#[derive(Clone, Debug)]
pub struct SingularRow {
    pub ray: usize,
    pub tangencies_a: usize,
    pub tangencies_b: usize,
    pub t_star: f64,
    pub max_position_gap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub rays: usize,
    pub exited_both: usize,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
    /// Secondary statistic: symmetric Hausdorff distance between the two
    /// sampled travelling-time sets (times only; the primary metric is the
    /// same-ray pairing).
    pub hausdorff_t: f64,
    pub trapped_disagreement: usize,
    pub trapped_both: usize,
    pub singular: Vec<SingularRow>,
    pub distinguishable: bool,
    pub verdict: String,
}

/// Symmetric Hausdorff distance between two sets of reals.
fn hausdorff_1d(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { f64::INFINITY };
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let one_sided = |xs: &[f64], ys: &[f64]| -> f64 {
        let mut worst: f64 = 0.0;
        for &x in xs {
            let i = ys.partition_point(|y| *y < x);
            let mut best = f64::INFINITY;
            if i < ys.len() {
                best = best.min((ys[i] - x).abs());
            }
            if i > 0 {
                best = best.min((x - ys[i - 1]).abs());
            }
            worst = worst.max(best);
        }
        worst
    };
    one_sided(&sa, &sb).max(one_sided(&sb, &sa))
}

fn first_tangency_time(traj: &Trajectory) -> Option<f64> {
    traj.events.iter().find_map(|e| match e.kind {
        EventKind::Tangency { .. } => Some(e.t),
        _ => None,
    })
}

/// Traces the identical ray sample through both scenes and compares the
/// travelling-time data, including the tangency correspondence.
pub fn cmd_compare(
    loaded_a: &LoadedScene,
    loaded_b: &LoadedScene,
    cfg: &RunConfig,
    time_tol: f64,
    pos_tol: f64,
) -> Result<(Artifacts, ComparisonReport), CliError> {
    let scene_a = &loaded_a.parsed.scene;
    let scene_b = &loaded_b.parsed.scene;
    if scene_a.dim() != scene_b.dim() {
        return Err(CliError::Incomparable("different chart dimensions".into()));
    }
    if scene_a.chart.curvature_constant() != scene_b.chart.curvature_constant() {
        return Err(CliError::Incomparable("different charts".into()));
    }
    if scene_a.exterior.shape != scene_b.exterior.shape {
        return Err(CliError::Incomparable("different exterior bodies".into()));
    }

    let limits_a = cfg.limits(scene_a);
    let limits_b = cfg.limits(scene_b);
    let opts = cfg.event_options();
    let sampler = Sampler { kind: cfg.sampler, count: cfg.samples, seed: cfg.seed };
    let sigmas = sample_sigmas(scene_a, &sampler)?;

    use rayon::prelude::*;
    let pairs: Vec<(Trajectory, Trajectory)> = sigmas
        .par_iter()
        .map(|sigma| {
            let ta = trace(scene_a, sigma, &limits_a, &opts)?;
            let tb = trace(scene_b, sigma, &limits_b, &opts)?;
            Ok::<_, BilliardError>((ta, tb))
        })
        .collect::<Result<_, _>>()?;

    let mut max_disc: f64 = 0.0;
    let mut sum_disc = 0.0;
    let mut exited_both = 0usize;
    let mut trapped_disagreement = 0usize;
    let mut trapped_both = 0usize;
    let mut singular = Vec::new();
    let mut times_a = Vec::new();
    let mut times_b = Vec::new();

    for (i, (ta, tb)) in pairs.iter().enumerate() {
        if ta.exited() {
            times_a.push(ta.total_time);
        }
        if tb.exited() {
            times_b.push(tb.total_time);
        }
        match (ta.exited(), tb.exited()) {
            (true, true) => {
                exited_both += 1;
                let d = (ta.total_time - tb.total_time).abs();
                max_disc = max_disc.max(d);
                sum_disc += d;
            }
            (false, false) => trapped_both += 1,
            _ => trapped_disagreement += 1,
        }

        let tang_a = ta.tangencies();
        let tang_b = tb.tangencies();
        if tang_a > 0 || tang_b > 0 {
            // equivalence up to the first tangency: the rays must agree
            // pointwise until the earlier of the two first tangency times
            let t_star = match (first_tangency_time(ta), first_tangency_time(tb)) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) => x.min(tb.total_time),
                (None, Some(y)) => y.min(ta.total_time),
                (None, None) => unreachable!("tangency count positive"),
            };
            let checkpoints = 100;
            let mut worst: f64 = 0.0;
            for k in 0..=checkpoints {
                let t = t_star * k as f64 / checkpoints as f64;
                let pa = ta.state_at(scene_a, t)?;
                let pb = tb.state_at(scene_b, t)?;
                worst = worst.max(scene_a.chart.distance(&pa.x, &pb.x));
            }
            singular.push(SingularRow {
                ray: i,
                tangencies_a: tang_a,
                tangencies_b: tang_b,
                t_star,
                max_position_gap: worst,
                pass: worst <= pos_tol,
            });
        }
    }

    let mean_disc = if exited_both > 0 { sum_disc / exited_both as f64 } else { 0.0 };
    let singular_fail = singular.iter().filter(|s| !s.pass).count();
    let distinguishable =
        max_disc > time_tol || trapped_disagreement > 0 || singular_fail > 0;
    let verdict = if distinguishable {
        format!(
            "distinguishable (max |dt| = {}, trapped disagreement = {}, failed tangency checks = {})",
            sig12(max_disc),
            trapped_disagreement,
            singular_fail
        )
    } else {
        "indistinguishable at tolerance".to_string()
    };

    let report = ComparisonReport {
        rays: pairs.len(),
        exited_both,
        max_discrepancy: max_disc,
        mean_discrepancy: mean_disc,
        hausdorff_t: hausdorff_1d(&times_a, &times_b),
        trapped_disagreement,
        trapped_both,
        singular,
        distinguishable,
        verdict: verdict.clone(),
    };

    let mut side = Sidecar::new(&loaded_a.hash, cfg.seed);
    side.push("command", "compare");
    side.push("scene_b_hash", &loaded_b.hash);
    side.push("sampler", cfg.describe_sampler());
    side.push("rays", report.rays);
    side.push("exited_both", report.exited_both);
    side.push("max_discrepancy", sig12(report.max_discrepancy));
    side.push("mean_discrepancy", sig12(report.mean_discrepancy));
    side.push("hausdorff_t", sig12(report.hausdorff_t));
    side.push("trapped_disagreement", report.trapped_disagreement);
    side.push("trapped_both", report.trapped_both);
    side.push("singular_rays", report.singular.len());
    side.push("time_tol", format!("{time_tol:e}"));
    side.push("position_tol", format!("{pos_tol:e}"));
    side.push("verdict", &verdict);

    let mut table = String::from("ray,tangencies_a,tangencies_b,t_star,max_position_gap,pass\n");
    for s in &report.singular {
        table.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.ray,
            s.tangencies_a,
            s.tangencies_b,
            sig12(s.t_star),
            sig12(s.max_position_gap),
            s.pass
        ));
    }

    let artifacts = Artifacts {
        files: vec![("compare.meta".into(), side.render()), ("singular.csv".into(), table)],
        summary: format!("compare: {verdict}"),
        exit_code: if distinguishable { 4 } else { 0 },
    };
    Ok((artifacts, report))
}

/// Constant estimation with provenance, under both readings of the
/// positive-curvature inequality.
pub fn cmd_constants(
    loaded: &LoadedScene,
    seed_override: Option<u64>,
    headline_variant: bool,
) -> Result<Artifacts, CliError> {
    let scene = &loaded.parsed.scene;
    let mut budget = loaded.parsed.budget;
    if let Some(seed) = seed_override {
        budget.seed = seed;
    }
    let c = compute_constants(scene, &budget)?;

    let cond_str = |c: Condition| match c {
        Condition::Cond1 => "condition-1 (sec_max <= 0)",
        Condition::Cond2 => "condition-2 (positive curvature, small scene)",
        Condition::Neither => "neither",
    };

    let mut side = Sidecar::new(&loaded.hash, budget.seed);
    side.push("command", "constants");
    side.push("d_min", sig12(c.d_min));
    side.push("diameter", sig12(c.diameter));
    side.push("sec_max", sig12(c.sec_max));
    side.push("kappa_min", sig12(c.kappa_min));
    side.push("reflection_window", c.reflection_window);
    side.push("steep_angle", sig12(c.steep_angle));
    side.push("tangent_front_floor", sig12(c.tangent_front_floor));
    side.push("curvature_floor", sig12(c.curvature_floor));
    let (headline, secondary) = if headline_variant {
        (c.condition_variant, c.condition)
    } else {
        (c.condition, c.condition_variant)
    };
    side.push("condition", cond_str(headline));
    side.push(
        if headline_variant { "condition_literal_reading" } else { "condition_variant_reading" },
        cond_str(secondary),
    );
    for (field, how) in &c.provenance {
        side.push(&format!("provenance.{field}"), how);
    }
    for (i, w) in c.warnings.iter().enumerate() {
        side.push(&format!("warning.{i}"), w);
    }

    let summary = format!(
        "constants: window = {}, curvature floor = {:.4}, {}",
        c.reflection_window,
        c.curvature_floor,
        cond_str(headline)
    );
    Ok(Artifacts {
        files: vec![("constants.meta".into(), side.render())],
        summary,
        exit_code: 0,
    })
}

/// Front source for the fronts command.
#[derive(Clone, Debug)]
pub enum FrontSpec {
    /// Circle front: center, radius, arc span, samples, orientation sign.
    Circle { center: Vec<f64>, radius: f64, arc: (f64, f64), samples: usize, sign: f64 },
    /// Tangent front on the obstacle under the given boundary direction.
    Tangent { obstacle: usize, boundary_dir: f64, tangent_sign: f64 },
}

/// Builds a patch, propagates it, and emits the dump, the min-eigenvalue
/// series, a separation check and the scene drawing.
pub fn cmd_fronts(
    loaded: &LoadedScene,
    spec: &FrontSpec,
    cfg: &RunConfig,
    snapshots: usize,
) -> Result<Artifacts, CliError> {
    let scene = &loaded.parsed.scene;
    let (patch, provenance_note) = match spec {
        FrontSpec::Circle { center, radius, arc, samples, sign } => {
            let patch = if scene.dim() == 2 {
                FrontPatch::circle(
                    &scene.chart,
                    &DVector::from_vec(center.clone()),
                    *radius,
                    *sign,
                    *arc,
                    *samples,
                )?
            } else {
                FrontPatch::sphere(
                    &scene.chart,
                    &DVector::from_vec(center.clone()),
                    *radius,
                    *sign,
                    (*samples, *samples),
                )?
            };
            (patch, format!("circle r={radius}"))
        }
        FrontSpec::Tangent { obstacle, boundary_dir, tangent_sign } => {
            let body = scene
                .obstacles
                .iter()
                .find(|b| b.label == *obstacle)
                .ok_or_else(|| CliError::BadArgument(format!("no obstacle {obstacle}")))?;
            let dir = if scene.dim() == 2 {
                DVector::from_vec(vec![boundary_dir.cos(), boundary_dir.sin()])
            } else {
                DVector::from_vec(vec![boundary_dir.cos(), boundary_dir.sin(), 0.3])
            };
            let x0 = body.boundary_along(&dir)?;
            // tangent direction at x0
            let n = billiards_core::billiard::outward_normal(&scene.chart, body, &x0)?;
            let v = if scene.dim() == 2 {
                DVector::from_vec(vec![-n[1] * tangent_sign, n[0] * tangent_sign])
            } else {
                DVector::from_vec(vec![-n[1] * tangent_sign, n[0] * tangent_sign, 0.1])
            };
            let (patch, eps) =
                construct_tangent_front_auto(scene, &x0, &v, &TangentFrontOptions::default())?;
            (patch, format!("tangent-front obstacle={obstacle} eps={eps}"))
        }
    };

    let limits = FrontLimits {
        t_max: cfg.t_max.unwrap_or(10.0 * scene.summary.diameter),
        max_reflections: cfg.max_reflections.unwrap_or(50),
    };
    let opts = cfg.event_options();
    let prop = propagate_front_patch(scene, &patch, &limits, &opts);

    // front dump: snapshots at evenly spaced times
    let n = scene.dim();
    let m = n - 1;
    let mut dump = String::new();
    let param_cols: Vec<String> = (0..m).map(|i| format!("param{i}")).collect();
    let point_cols: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let normal_cols: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let s_cols: Vec<String> =
        (0..m).flat_map(|a| (0..m).map(move |b| format!("s{a}{b}"))).collect();
    dump.push_str(&format!(
        "{},{},{},{},min_eig,t\n",
        param_cols.join(","),
        point_cols.join(","),
        normal_cols.join(","),
        s_cols.join(",")
    ));
    for k in 0..=snapshots {
        let t = limits.t_max * k as f64 / snapshots.max(1) as f64;
        let snap = prop.patch_at(&scene.chart, t);
        for (p, st) in snap.params.iter().zip(snap.states.iter()) {
            if let Some(st) = st {
                let mut cols: Vec<String> = Vec::new();
                cols.extend(p.iter().map(|v| sig12(*v)));
                cols.extend(st.base.x.iter().map(|v| sig12(*v)));
                cols.extend(st.base.v.iter().map(|v| sig12(*v)));
                for a in 0..m {
                    for b in 0..m {
                        cols.push(sig12(st.s[(a, b)]));
                    }
                }
                cols.push(sig12(st.min_curvature()));
                cols.push(sig12(t));
                dump.push_str(&cols.join(","));
                dump.push('\n');
            }
        }
    }

    // aggregated min-eigenvalue series over the curvature logs
    let mut series: Vec<(f64, f64)> = Vec::new();
    for tr in prop.tracks.iter().flatten() {
        series.extend(tr.curvature_log.iter().copied());
    }
    series.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut mineig_csv = String::from("t,min_eig\n");
    for (t, k) in &series {
        mineig_csv.push_str(&format!("{},{}\n", sig12(*t), sig12(*k)));
    }

    // separation check between the quartile parameters
    let mut side = Sidecar::new(&loaded.hash, cfg.seed);
    side.push("command", "fronts");
    side.push("front", provenance_note);
    side.push("samples", patch.len());
    side.push("holes", prop.tracks.iter().filter(|t| t.is_none()).count());
    side.push("t_max", sig12(limits.t_max));
    side.push("max_reflections", limits.max_reflections);
    side.push("reflections_seen", prop.reflections.len());
    side.push("min_curvature_observed", sig12(prop.min_curvature_observed));
    side.push("min_post_reflection_curvature", sig12(prop.min_post_reflection_curvature));
    if scene.dim() == 2 && patch.len() >= 4 {
        let q1 = patch.params[patch.len() / 4][0];
        let q3 = patch.params[3 * patch.len() / 4][0];
        let t_check = limits.t_max.min(scene.summary.diameter / 4.0);
        match front_separation_check(scene, &prop, q1, q3, t_check) {
            Ok(rep) => {
                side.push("separation.u0", sig12(rep.u0));
                side.push("separation.u1", sig12(rep.u1));
                side.push("separation.t", sig12(rep.t));
                side.push("separation.d_initial", sig12(rep.d_initial));
                side.push("separation.d_propagated", sig12(rep.d_propagated));
                side.push("separation.k_min_interval", sig12(rep.k_min_interval));
                side.push("separation.k_min_final", sig12(rep.k_min_final));
                side.push("separation.bound_interval", sig12(rep.bound_interval));
                side.push("separation.bound_final", sig12(rep.bound_final));
                side.push("separation.holds_interval", rep.holds_interval);
                side.push("separation.holds_final", rep.holds_final);
            }
            Err(e) => side.push("separation.error", e.to_string()),
        }
    }

    let summary = format!(
        "fronts: {} samples, min curvature {:.4e}, {} reflections",
        patch.len(),
        prop.min_curvature_observed,
        prop.reflections.len()
    );
    let mut files = vec![
        ("front_dump.csv".to_string(), dump),
        ("mineig.csv".to_string(), mineig_csv),
        ("fronts.meta".to_string(), side.render()),
    ];
    if scene.dim() == 2 {
        files.push((
            "scene.svg".to_string(),
            render_scene_svg_with_meta(scene, Some(&patch), 12, &loaded.hash, cfg.seed),
        ));
    }
    Ok(Artifacts { files, summary, exit_code: 0 })
}

/// Single-ray debug trace: an event table.
pub fn cmd_trace(
    loaded: &LoadedScene,
    entry: &[f64],
    angles: &[f64],
    cfg: &RunConfig,
) -> Result<Artifacts, CliError> {
    let scene = &loaded.parsed.scene;
    let sigma = billiards_core::billiard::boundary_ray(scene, entry, angles)?;
    let limits = cfg.limits(scene);
    let traj = trace(scene, &sigma, &limits, &cfg.event_options())?;

    let mut out = String::new();
    out.push_str(&format!(
        "# billiards {} scene_hash={} seed={}\n",
        env!("CARGO_PKG_VERSION"),
        loaded.hash,
        cfg.seed
    ));
    out.push_str(&format!(
        "start: x = {:?}, v = {:?}\n",
        sigma.x.as_slice(),
        sigma.v.as_slice()
    ));
    for ev in &traj.events {
        let kind = match ev.kind {
            EventKind::Reflection { obstacle } => format!("reflection({obstacle})"),
            EventKind::Tangency { obstacle } => format!("tangency({obstacle})"),
            EventKind::Exit => "exit".to_string(),
            EventKind::Cutoff => "cutoff".to_string(),
        };
        let angle = ev
            .incidence_angle
            .map(|a| format!(", incidence = {}", sig12(a)))
            .unwrap_or_default();
        out.push_str(&format!(
            "t = {:<18} {kind:<16} at ({}, {}){angle}\n",
            sig12(ev.t),
            sig12(ev.state_before.x[0]),
            sig12(ev.state_before.x[1])
        ));
    }
    out.push_str(&format!("status: {:?}, total time {}\n", traj.status, sig12(traj.total_time)));
    let summary = format!(
        "trace: {} events, status {:?}, t = {}",
        traj.events.len(),
        traj.status,
        sig12(traj.total_time)
    );
    Ok(Artifacts { files: vec![("trace.txt".into(), out)], summary, exit_code: 0 })
}

/// Writes the canonical form of a scene next to the outputs, for record.
pub fn canonical_scene_text(loaded: &LoadedScene) -> String {
    scene_to_string(&loaded.parsed.scene, &loaded.parsed.budget)
}
