//! wasm-bindgen wrappers for the browser demo in `www/`. Every function
//! returns a flat `Vec<f64>` so the page can read it as a Float64Array.

use tgp_core::manifold::project_to_manifold;
use tgp_core::scenarios::{circle_demo, eigen_demo_rgd, eigen_demo_scaled, flatten_points};
use tgp_core::{ManifoldKind, Matrix};
use wasm_bindgen::prelude::*;

fn js_err(e: tgp_core::TgpError) -> JsError {
    JsError::new(&e.to_string())
}

/// Iterates on the unit sphere for ½xᵀAx with A = diag(4, 2, −2), three
/// coordinates per iterate. `f_scale = 0` gives plain RGD, which never
/// leaves the plane x₃ = 0.
#[wasm_bindgen]
pub fn eigen_trajectory(f_scale: f64) -> Result<Vec<f64>, JsError> {
    let rec = if f_scale == 0.0 { eigen_demo_rgd() } else { eigen_demo_scaled(f_scale) };
    Ok(flatten_points(&rec.map_err(js_err)?))
}

/// Iterates on the unit circle for the quadratic with A = diag(5, 2) and
/// target (0, 1), two coordinates per iterate. `a` weights the normal shift.
#[wasm_bindgen]
pub fn circle_path(a: f64) -> Result<Vec<f64>, JsError> {
    Ok(flatten_points(&circle_demo(a).map_err(js_err)?))
}

/// Projects the symmetric matrix [[a, b], [b, c]] onto Gr(1, 2). Returns the
/// angle of the chosen line, the distance to it, and 1 when the projection is
/// unique (0 at a tie).
#[wasm_bindgen]
pub fn project_line(a: f64, b: f64, c: f64) -> Result<Vec<f64>, JsError> {
    let y = Matrix::from_rows(&[&[a, b], &[b, c]]).map_err(js_err)?;
    let kind = ManifoldKind::grassmann(1, 2).map_err(js_err)?;
    let p = project_to_manifold(kind, &y).map_err(js_err)?;
    let x = p.point.value();
    let angle = x[(1, 0)].atan2(x[(0, 0)]);
    let dist = (&y - x).norm();
    Ok(vec![angle, dist, if p.unique { 1.0 } else { 0.0 }])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectories_have_whole_points() {
        let rgd = eigen_trajectory(0.0).unwrap();
        assert_eq!(rgd.len() % 3, 0);
        assert!(rgd.chunks(3).all(|p| p[2] == 0.0));
        let scaled = eigen_trajectory(0.05).unwrap();
        assert!((scaled[scaled.len() - 1] - 1.0).abs() < 1e-4);
        let path = circle_path(2.0).unwrap();
        assert_eq!(path.len() % 2, 0);
        assert!((path[path.len() - 1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn line_projection() {
        let v = project_line(2.0, 0.0, 1.0).unwrap();
        assert!(v[0].abs() < 1e-12 && (v[1] - 2f64.sqrt()).abs() < 1e-12 && v[2] == 1.0);
        let v = project_line(1.0, 1.0, 1.0).unwrap();
        assert!((v[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert_eq!(project_line(1.0, 0.0, 1.0).unwrap()[2], 0.0);
    }
}
