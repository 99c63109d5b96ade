//! Pinhole camera model with radial-tangential distortion.
//!
//! Projection, undistortion and the Rodrigues rotation parameterization used
//! by all lifting code. Cameras are immutable after load and safe to share
//! across parallel workers.

use std::path::Path;

use nalgebra::{Matrix3, Matrix3x4, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration cap for the distortion inversion.
pub const UNDISTORT_MAX_ITERS: usize = 50;
/// Convergence tolerance for the distortion inversion, in normalized
/// (focal-length-relative) units.
pub const UNDISTORT_TOL: f64 = 1e-10;

/// Point not projectable: at or behind the camera plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unprojectable {
    /// Camera-frame depth of the offending point.
    pub z: f64,
}

impl std::fmt::Display for Unprojectable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "point unprojectable: camera-frame z = {}", self.z)
    }
}

impl std::error::Error for Unprojectable {}

impl From<Unprojectable> for Error {
    fn from(e: Unprojectable) -> Self {
        Error::Numeric(e.to_string())
    }
}

/// Intrinsics, distortion coefficients and pose of one camera.
///
/// `rotation` is a Rodrigues 3-vector (radians times unit axis); `translation`
/// completes the world-to-camera transform `p_cam = R * p_world + t`.
/// Distortion follows the 5-coefficient radial-tangential convention
/// `(k1, k2, p1, p2, k3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    pub name: String,
    /// (width, height) in pixels.
    pub image_size: (u32, u32),
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// (k1, k2, p1, p2, k3), dimensionless.
    pub dist: [f64; 5],
    /// Rodrigues vector of the world-to-camera rotation.
    pub rotation: [f64; 3],
    /// World-to-camera translation, world units.
    pub translation: [f64; 3],
}

impl CameraModel {
    /// Check the type invariants. Run on every load.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("camera name must be non-empty"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::config(format!(
                "camera '{}': focal lengths must be positive (fx={}, fy={})",
                self.name, self.fx, self.fy
            )));
        }
        if self.image_size.0 == 0 || self.image_size.1 == 0 {
            return Err(Error::config(format!(
                "camera '{}': image_size components must be positive",
                self.name
            )));
        }
        let all = self
            .dist
            .iter()
            .chain(self.rotation.iter())
            .chain(self.translation.iter())
            .chain([self.fx, self.fy, self.cx, self.cy].iter().copied().collect::<Vec<_>>().iter());
        if !all.into_iter().all(|v| v.is_finite()) {
            return Err(Error::config(format!(
                "camera '{}': non-finite calibration value",
                self.name
            )));
        }
        // Rodrigues vectors always yield proper rotations; the residual check
        // guards against future non-Rodrigues construction paths.
        let r = self.rotation_matrix();
        let ortho = (r.transpose() * r - Matrix3::identity()).norm();
        let det = r.determinant();
        if ortho > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::numeric(format!(
                "camera '{}': rotation not orthonormal (|R'R-I|={ortho:.2e}, det={det})",
                self.name
            )));
        }
        Ok(())
    }

    pub fn rotation_vec(&self) -> Vector3<f64> {
        Vector3::from(self.rotation)
    }

    pub fn translation_vec(&self) -> Vector3<f64> {
        Vector3::from(self.translation)
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        rodrigues_to_matrix(&self.rotation_vec())
    }

    /// Camera center in world coordinates, `-R' t`.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation_matrix().transpose() * self.translation_vec())
    }

    /// Copy of this camera with distortion coefficients zeroed.
    ///
    /// Used after observations have been undistorted: projection through the
    /// stripped camera is then plain pinhole and agrees with
    /// [`projection_matrix`].
    pub fn without_distortion(&self) -> CameraModel {
        CameraModel {
            dist: [0.0; 5],
            ..self.clone()
        }
    }

    pub fn has_distortion(&self) -> bool {
        self.dist.iter().any(|&k| k != 0.0)
    }

    /// World point to camera frame.
    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_matrix() * p + self.translation_vec()
    }
}

/// An ordered set of calibrated cameras sharing one world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Rig {
    pub cameras: Vec<CameraModel>,
    /// Free calibration-defined world units; carried as metadata only.
    pub world_scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    cameras: Vec<CameraModel>,
}

impl Rig {
    pub fn new(cameras: Vec<CameraModel>) -> Result<Rig> {
        let rig = Rig {
            cameras,
            world_scale: 1.0,
        };
        rig.validate()?;
        Ok(rig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cameras.len() < 2 {
            return Err(Error::config(format!(
                "rig needs at least 2 cameras, got {}",
                self.cameras.len()
            )));
        }
        for cam in &self.cameras {
            cam.validate()?;
        }
        for (i, a) in self.cameras.iter().enumerate() {
            for b in &self.cameras[i + 1..] {
                if a.name == b.name {
                    return Err(Error::config(format!("duplicate camera name '{}'", a.name)));
                }
            }
        }
        Ok(())
    }

    pub fn camera(&self, name: &str) -> Option<&CameraModel> {
        self.cameras.iter().find(|c| c.name == name)
    }

    /// Load a calibration JSON document. Unknown fields are rejected.
    pub fn load(path: &Path) -> Result<Rig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read calibration {}: {e}", path.display())))?;
        let file: CalibrationFile = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path, None, format!("calibration json: {e}")))?;
        Rig::new(file.cameras)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CalibrationFile {
            cameras: self.cameras.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("calibration serializes");
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// Rodrigues 3-vector to rotation matrix (exponential map).
///
/// The zero vector maps to the identity.
pub fn rodrigues_to_matrix(r: &Vector3<f64>) -> Matrix3<f64> {
    *Rotation3::from_scaled_axis(*r).matrix()
}

/// Rotation matrix to Rodrigues 3-vector (logarithm map).
///
/// Inverse of [`rodrigues_to_matrix`] up to the angle-wrapping ambiguity.
pub fn rodrigues_from_matrix(m: &Matrix3<f64>) -> Vector3<f64> {
    Rotation3::from_matrix(m).scaled_axis()
}

/// Apply the distortion polynomial to normalized coordinates.
fn distort_normalized(x: f64, y: f64, dist: &[f64; 5]) -> (f64, f64) {
    let [k1, k2, p1, p2, k3] = *dist;
    let r2 = x * x + y * y;
    let radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    let dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
    let dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
    (x * radial + dx, y * radial + dy)
}

/// Project a world point to pixel coordinates.
///
/// Applies extrinsics, perspective division, the distortion polynomial, then
/// the focal/principal-point mapping. Points at or behind the camera plane
/// are reported as [`Unprojectable`], never as NaN.
pub fn project(p: &Vector3<f64>, cam: &CameraModel) -> std::result::Result<Vector2<f64>, Unprojectable> {
    let pc = cam.world_to_camera(p);
    if pc.z <= 1e-12 {
        return Err(Unprojectable { z: pc.z });
    }
    let x = pc.x / pc.z;
    let y = pc.y / pc.z;
    let (xd, yd) = distort_normalized(x, y, &cam.dist);
    Ok(Vector2::new(cam.fx * xd + cam.cx, cam.fy * yd + cam.cy))
}

/// Apply the distortion polynomial to an ideal (undistorted) pixel.
///
/// Counterpart of [`undistort_point`]; mainly used to synthesize distorted
/// observations and in round-trip checks.
pub fn distort_point(px: &Vector2<f64>, cam: &CameraModel) -> Vector2<f64> {
    let x = (px.x - cam.cx) / cam.fx;
    let y = (px.y - cam.cy) / cam.fy;
    let (xd, yd) = distort_normalized(x, y, &cam.dist);
    Vector2::new(cam.fx * xd + cam.cx, cam.fy * yd + cam.cy)
}

/// Remove lens distortion from a pixel observation.
///
/// Fixed-point inversion of the distortion polynomial in normalized
/// coordinates: with zero coefficients this is the identity. Fails with an
/// explicit error if the iteration has not converged to [`UNDISTORT_TOL`]
/// after [`UNDISTORT_MAX_ITERS`] rounds.
pub fn undistort_point(px: &Vector2<f64>, cam: &CameraModel) -> Result<Vector2<f64>> {
    if !cam.has_distortion() {
        return Ok(*px);
    }
    let [k1, k2, p1, p2, k3] = cam.dist;
    let xd = (px.x - cam.cx) / cam.fx;
    let yd = (px.y - cam.cy) / cam.fy;
    let (mut x, mut y) = (xd, yd);
    for _ in 0..UNDISTORT_MAX_ITERS {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
        let dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
        let dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
        let xn = (xd - dx) / radial;
        let yn = (yd - dy) / radial;
        let step = ((xn - x).powi(2) + (yn - y).powi(2)).sqrt();
        x = xn;
        y = yn;
        if step < UNDISTORT_TOL {
            return Ok(Vector2::new(cam.fx * x + cam.cx, cam.fy * y + cam.cy));
        }
    }
    Err(Error::numeric(format!(
        "undistort did not converge after {UNDISTORT_MAX_ITERS} iterations for pixel ({}, {}) on camera '{}'",
        px.x, px.y, cam.name
    )))
}

/// The 3x4 matrix `K [R | t]`.
///
/// Valid for undistorted pixels: with zero distortion coefficients its
/// homogeneous application equals [`project`].
pub fn projection_matrix(cam: &CameraModel) -> Matrix3x4<f64> {
    let k = Matrix3::new(
        cam.fx, 0.0, cam.cx, //
        0.0, cam.fy, cam.cy, //
        0.0, 0.0, 1.0,
    );
    let r = cam.rotation_matrix();
    let t = cam.translation_vec();
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    rt.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
    k * rt
}
