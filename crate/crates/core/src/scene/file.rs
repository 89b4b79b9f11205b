//! Scene files: line-oriented `key = value` documents.
//!
//! The grammar is documented in `docs/formats.md`. Unknown keys are
//! rejected with the offending line number; one document describes one
//! scene plus its estimation budgets.

use std::collections::BTreeMap;

use crate::error::SceneError;
use crate::geometry::MetricChart;
use crate::scene::constants::EstimationBudget;
use crate::scene::{BodyShape, ImplicitBody, PolyTerm, Scene};

/// A parsed scene document.
#[derive(Debug)]
pub struct ParsedScene {
    pub scene: Scene,
    pub budget: EstimationBudget,
}

fn err(line: usize, message: impl Into<String>) -> SceneError {
    SceneError::Parse { line, message: message.into() }
}

fn parse_floats(line: usize, v: &str) -> Result<Vec<f64>, SceneError> {
    v.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| err(line, format!("not a number: {t}"))))
        .collect()
}

#[derive(Default)]
struct BodySpec {
    shape: Option<String>,
    center: Option<Vec<f64>>,
    radius: Option<f64>,
    semi_axes: Option<Vec<f64>>,
    terms: Option<Vec<PolyTerm>>,
    interior: Option<Vec<f64>>,
    line: usize,
}

impl BodySpec {
    fn build(self, label: usize) -> Result<ImplicitBody, SceneError> {
        let line = self.line;
        let shape = self.shape.ok_or_else(|| err(line, "missing shape"))?;
        let body = match shape.as_str() {
            "disc" => BodyShape::Disc {
                center: self.center.ok_or_else(|| err(line, "disc needs center"))?,
                radius: self.radius.ok_or_else(|| err(line, "disc needs radius"))?,
            },
            "ball" => BodyShape::Ball {
                center: self.center.ok_or_else(|| err(line, "ball needs center"))?,
                radius: self.radius.ok_or_else(|| err(line, "ball needs radius"))?,
            },
            "ellipse" => BodyShape::Ellipse {
                center: self.center.ok_or_else(|| err(line, "ellipse needs center"))?,
                semi_axes: self.semi_axes.ok_or_else(|| err(line, "ellipse needs semi_axes"))?,
            },
            "polynomial" => BodyShape::Polynomial {
                terms: self.terms.ok_or_else(|| err(line, "polynomial needs terms"))?,
                interior: self.interior.ok_or_else(|| err(line, "polynomial needs interior"))?,
            },
            other => return Err(err(line, format!("unknown shape: {other}"))),
        };
        Ok(ImplicitBody::new(body, label))
    }
}

fn parse_terms(line: usize, v: &str) -> Result<Vec<PolyTerm>, SceneError> {
    v.split(',')
        .map(|group| {
            let nums = parse_floats(line, group.trim())?;
            if nums.len() < 3 {
                return Err(err(line, "each term needs: coef e1 e2 [e3]"));
            }
            Ok(PolyTerm {
                coef: nums[0],
                exponents: nums[1..].iter().map(|e| *e as u32).collect(),
            })
        })
        .collect()
}

/// Parses a scene document; rejects unknown keys.
pub fn parse_scene_str(text: &str) -> Result<ParsedScene, SceneError> {
    let mut chart_kind: Option<String> = None;
    let mut chart_dim: Option<usize> = None;
    let mut chart_curvature: Option<f64> = None;
    let mut exterior = BodySpec::default();
    let mut obstacles: BTreeMap<usize, BodySpec> = BTreeMap::new();
    let mut budget = EstimationBudget::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["chart", "kind"] => chart_kind = Some(value.to_string()),
            ["chart", "dim"] => {
                chart_dim =
                    Some(value.parse().map_err(|_| err(line, "dim must be an integer"))?)
            }
            ["chart", "curvature"] => {
                chart_curvature =
                    Some(value.parse().map_err(|_| err(line, "curvature must be a number"))?)
            }
            ["exterior", field] => {
                exterior.line = line;
                set_body_field(&mut exterior, field, value, line)?;
            }
            ["obstacle", idx_str, field] => {
                let label: usize = idx_str
                    .parse()
                    .map_err(|_| err(line, "obstacle index must be an integer"))?;
                if label == 0 {
                    return Err(err(line, "obstacle indices start at 1"));
                }
                let spec = obstacles.entry(label).or_default();
                spec.line = line;
                set_body_field(spec, field, value, line)?;
            }
            ["estimation", field] => {
                let parse_u = || value.parse::<u64>().map_err(|_| err(line, "expected an integer"));
                match *field {
                    "seed" => budget.seed = parse_u()?,
                    "steep_angle_rays" => budget.steep_angle_rays = parse_u()? as usize,
                    "tangent_front_probes" => budget.tangent_front_probes = parse_u()? as usize,
                    "genpos_samples" => budget.genpos_samples = parse_u()? as usize,
                    other => return Err(err(line, format!("unknown estimation key: {other}"))),
                }
            }
            _ => return Err(err(line, format!("unknown key: {key}"))),
        }
    }

    let kind = chart_kind.ok_or_else(|| err(0, "missing chart.kind"))?;
    let dim = chart_dim.ok_or_else(|| err(0, "missing chart.dim"))?;
    if !(2..=3).contains(&dim) {
        return Err(err(0, "chart.dim must be 2 or 3"));
    }
    let chart = match kind.as_str() {
        "flat" => {
            if chart_curvature.unwrap_or(0.0) != 0.0 {
                return Err(err(0, "flat charts take no curvature"));
            }
            MetricChart::flat(dim)
        }
        "constant-curvature" => {
            let c = chart_curvature.ok_or_else(|| err(0, "constant-curvature needs chart.curvature"))?;
            MetricChart::constant_curvature(dim, c)
        }
        other => return Err(err(0, format!("unknown chart.kind: {other} (numeric charts are not file-expressible)"))),
    };

    let exterior = exterior.build(0)?;
    let mut bodies = Vec::new();
    for (label, spec) in obstacles {
        bodies.push(spec.build(label)?);
    }
    let scene = Scene::new(chart, exterior, bodies)?;
    Ok(ParsedScene { scene, budget })
}

fn set_body_field(spec: &mut BodySpec, field: &str, value: &str, line: usize) -> Result<(), SceneError> {
    match field {
        "shape" => spec.shape = Some(value.to_string()),
        "center" => spec.center = Some(parse_floats(line, value)?),
        "radius" => {
            spec.radius = Some(value.parse().map_err(|_| err(line, "radius must be a number"))?)
        }
        "semi_axes" => spec.semi_axes = Some(parse_floats(line, value)?),
        "terms" => spec.terms = Some(parse_terms(line, value)?),
        "interior" => spec.interior = Some(parse_floats(line, value)?),
        other => return Err(err(line, format!("unknown body key: {other}"))),
    }
    Ok(())
}

/// Canonical text form of a scene (used by tests and round trips).
pub fn scene_to_string(scene: &Scene, budget: &EstimationBudget) -> String {
    let mut out = String::new();
    match scene.chart.curvature_constant() {
        Some(0.0) => {
            out.push_str("chart.kind = flat\n");
        }
        Some(c) => {
            out.push_str("chart.kind = constant-curvature\n");
            out.push_str(&format!("chart.curvature = {c}\n"));
        }
        None => out.push_str("# numeric chart: not file-expressible\n"),
    }
    out.push_str(&format!("chart.dim = {}\n", scene.dim()));
    push_body(&mut out, "exterior", &scene.exterior);
    for body in &scene.obstacles {
        push_body(&mut out, &format!("obstacle.{}", body.label), body);
    }
    out.push_str(&format!("estimation.seed = {}\n", budget.seed));
    out.push_str(&format!("estimation.steep_angle_rays = {}\n", budget.steep_angle_rays));
    out.push_str(&format!("estimation.tangent_front_probes = {}\n", budget.tangent_front_probes));
    out.push_str(&format!("estimation.genpos_samples = {}\n", budget.genpos_samples));
    out
}

fn push_body(out: &mut String, prefix: &str, body: &ImplicitBody) {
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    match &body.shape {
        BodyShape::Disc { center, radius } => {
            out.push_str(&format!("{prefix}.shape = disc\n"));
            out.push_str(&format!("{prefix}.center = {}\n", join(center)));
            out.push_str(&format!("{prefix}.radius = {radius}\n"));
        }
        BodyShape::Ball { center, radius } => {
            out.push_str(&format!("{prefix}.shape = ball\n"));
            out.push_str(&format!("{prefix}.center = {}\n", join(center)));
            out.push_str(&format!("{prefix}.radius = {radius}\n"));
        }
        BodyShape::Ellipse { center, semi_axes } => {
            out.push_str(&format!("{prefix}.shape = ellipse\n"));
            out.push_str(&format!("{prefix}.center = {}\n", join(center)));
            out.push_str(&format!("{prefix}.semi_axes = {}\n", join(semi_axes)));
        }
        BodyShape::Polynomial { terms, interior } => {
            out.push_str(&format!("{prefix}.shape = polynomial\n"));
            let terms = terms
                .iter()
                .map(|t| {
                    let exps =
                        t.exponents.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
                    format!("{} {}", t.coef, exps)
                })
                .collect::<Vec<_>>()
                .join(", ");
            out.push_str(&format!("{prefix}.terms = {terms}\n"));
            out.push_str(&format!("{prefix}.interior = {}\n", join(interior)));
        }
    }
}
