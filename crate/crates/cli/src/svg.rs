//! Minimal SVG emission for two-dimensional scenes: the exterior boundary
//! as a circle/ellipse/polyline, one path per obstacle, the front patch
//! polyline as one more path, and selected normal rays as lines.

use billiards_core::fronts::FrontPatch;
use billiards_core::scene::{BodyShape, Scene};

fn fmt(x: f64) -> String {
    format!("{x:.4}")
}

/// Renders the scene and an optional patch. The patch polyline is a path;
/// every obstacle is a path; the exterior boundary is not. The metadata
/// comment carries the tool version, scene hash and seed.
pub fn render_scene_svg_with_meta(
    scene: &Scene,
    patch: Option<&FrontPatch>,
    rays: usize,
    scene_hash: &str,
    seed: u64,
) -> String {
    let mut out = render_scene_svg(scene, patch, rays);
    let meta = format!(
        "<!-- billiards {} scene_hash={} seed={} -->\n",
        env!("CARGO_PKG_VERSION"),
        scene_hash,
        seed
    );
    out.insert_str(0, &meta);
    out
}

/// Renders the scene and an optional patch. The patch polyline is a path;
/// every obstacle is a path; the exterior boundary is not.
pub fn render_scene_svg(scene: &Scene, patch: Option<&FrontPatch>, rays: usize) -> String {
    let pad = 0.6;
    let r_guess = match &scene.exterior.shape {
        BodyShape::Disc { radius, .. } | BodyShape::Ball { radius, .. } => *radius,
        BodyShape::Ellipse { semi_axes, .. } => semi_axes.iter().cloned().fold(0.0, f64::max),
        BodyShape::Polynomial { .. } => scene.summary.diameter / 2.0,
    } + pad;
    let c = scene.exterior.interior_point();
    let (x0, y0) = (c[0] - r_guess, c[1] - r_guess);
    let side = 2.0 * r_guess;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"640\" height=\"640\">\n",
        fmt(x0), fmt(y0), fmt(side), fmt(side)
    ));
    out.push_str(&format!(
        "<g transform=\"translate(0 {}) scale(1 -1)\">\n",
        fmt(2.0 * c[1])
    ));

    // exterior boundary
    match &scene.exterior.shape {
        BodyShape::Disc { center, radius } => out.push_str(&format!(
            "<circle class=\"exterior\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.02\"/>\n",
            fmt(center[0]), fmt(center[1]), fmt(*radius)
        )),
        BodyShape::Ellipse { center, semi_axes } => out.push_str(&format!(
            "<ellipse class=\"exterior\" cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.02\"/>\n",
            fmt(center[0]), fmt(center[1]), fmt(semi_axes[0]), fmt(semi_axes[1])
        )),
        _ => {
            // polyline fallback for implicit shapes
            if let Ok(samples) = scene.exterior.boundary_samples(128) {
                let pts: Vec<String> =
                    samples.iter().map(|p| format!("{},{}", fmt(p[0]), fmt(p[1]))).collect();
                out.push_str(&format!(
                    "<polyline class=\"exterior\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.02\"/>\n",
                    pts.join(" ")
                ));
            }
        }
    }

    // one path per obstacle
    for body in &scene.obstacles {
        if let Ok(samples) = body.boundary_samples(96) {
            let mut d = String::new();
            for (i, p) in samples.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                d.push_str(&format!("{cmd}{} {} ", fmt(p[0]), fmt(p[1])));
            }
            d.push('Z');
            out.push_str(&format!(
                "<path class=\"obstacle\" d=\"{d}\" fill=\"#dddddd\" stroke=\"black\" stroke-width=\"0.02\"/>\n"
            ));
        }
    }

    // the patch polyline plus selected normal rays
    if let Some(patch) = patch {
        let mut d = String::new();
        let mut first = true;
        for st in patch.states.iter().flatten() {
            let cmd = if first { 'M' } else { 'L' };
            first = false;
            d.push_str(&format!("{cmd}{} {} ", fmt(st.base.x[0]), fmt(st.base.x[1])));
        }
        out.push_str(&format!(
            "<path class=\"front\" d=\"{d}\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"0.03\"/>\n"
        ));
        if rays > 0 {
            let stride = (patch.len() / rays.max(1)).max(1);
            for st in patch.states.iter().step_by(stride).flatten() {
                let p = &st.base.x;
                let q = p + &st.base.v * 0.5;
                out.push_str(&format!(
                    "<line class=\"normal\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#3366cc\" stroke-width=\"0.015\"/>\n",
                    fmt(p[0]), fmt(p[1]), fmt(q[0]), fmt(q[1])
                ));
            }
        }
    }

    out.push_str("</g>\n</svg>\n");
    out
}
