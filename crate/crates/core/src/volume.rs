//! Volumetric dataset model, ray-volume geometry, and trilinear sampling.
//!
//! Volumes use normalized volume-local coordinates: the full image grid spans
//! the unit cube `[0,1]^3` regardless of voxel counts. Voxel `i` along an axis
//! with `n` voxels covers the local interval `[i/n, (i+1)/n)` and its center
//! sits at `(i + 0.5)/n`; sampling outside the outermost voxel centers clamps
//! to the edge value.

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use nalgebra::{Matrix4, Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Tolerance for coordinates that must lie in the unit cube.
pub const COORD_EPS: f64 = 1e-9;

/// One 3D scalar intensity grid of a time series.
///
/// Intensities are 16-bit, stored x-fastest: index `x + nx*(y + ny*z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeTimepoint {
    dims: [usize; 3],
    voxel_size: [f64; 3],
    intensities: Vec<u16>,
}

impl VolumeTimepoint {
    pub fn new(dims: [usize; 3], voxel_size: [f64; 3], intensities: Vec<u16>) -> Result<Self> {
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidVolume(format!("dims must all be >= 1, got {dims:?}")));
        }
        if voxel_size.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidVolume(format!(
                "voxel_size components must be > 0, got {voxel_size:?}"
            )));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if intensities.len() != expected {
            return Err(Error::InvalidVolume(format!(
                "expected {expected} voxels for dims {dims:?}, got {}",
                intensities.len()
            )));
        }
        Ok(Self { dims, voxel_size, intensities })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_size(&self) -> [f64; 3] {
        self.voxel_size
    }

    pub fn intensities(&self) -> &[u16] {
        &self.intensities
    }

    #[inline]
    pub fn voxel(&self, x: usize, y: usize, z: usize) -> u16 {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        self.intensities[x + self.dims[0] * (y + self.dims[1] * z)]
    }

    /// Physical size of the whole grid in world units.
    pub fn world_extent(&self) -> [f64; 3] {
        [
            self.dims[0] as f64 * self.voxel_size[0],
            self.dims[1] as f64 * self.voxel_size[1],
            self.dims[2] as f64 * self.voxel_size[2],
        ]
    }

    /// Smallest voxel edge in world units; the base length for ray sampling.
    pub fn min_voxel_extent(&self) -> f64 {
        self.voxel_size.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Invertible affine map from normalized volume-local coordinates to world space.
#[derive(Debug, Clone)]
pub struct WorldTransform {
    fwd: Matrix4<f64>,
    inv: Matrix4<f64>,
}

impl WorldTransform {
    pub fn from_matrix(fwd: Matrix4<f64>) -> Result<Self> {
        if fwd.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("world transform must be finite".into()));
        }
        if fwd[(3, 0)] != 0.0 || fwd[(3, 1)] != 0.0 || fwd[(3, 2)] != 0.0 || fwd[(3, 3)] != 1.0 {
            return Err(Error::InvalidSpec("world transform must be affine".into()));
        }
        let inv = fwd
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::InvalidSpec("world transform is not invertible".into()))?;
        Ok(Self { fwd, inv })
    }

    pub fn from_scale_translation(scale: [f64; 3], translation: [f64; 3]) -> Result<Self> {
        let mut m = Matrix4::identity();
        for i in 0..3 {
            m[(i, i)] = scale[i];
            m[(i, 3)] = translation[i];
        }
        Self::from_matrix(m)
    }

    /// Canonical transform for a volume of the given world extent: local
    /// `[0,1]^3` scales to `[0,extent]` with no rotation or offset.
    pub fn for_extent(extent: [f64; 3]) -> Result<Self> {
        Self::from_scale_translation(extent, [0.0; 3])
    }

    /// Same transform shifted by `d` in world space.
    pub fn appending_translation(&self, d: &Vector3<f64>) -> Self {
        let mut fwd = self.fwd;
        let mut inv = self.inv;
        for i in 0..3 {
            fwd[(i, 3)] += d[i];
            // (T . A)^-1 = A^-1 . T^-1
            inv[(i, 3)] -= inv[(i, 0)] * d.x + inv[(i, 1)] * d.y + inv[(i, 2)] * d.z;
        }
        Self { fwd, inv }
    }

    pub fn to_world(&self, p: &Point3<f64>) -> Point3<f64> {
        self.fwd.transform_point(p)
    }

    pub fn to_local(&self, p: &Point3<f64>) -> Point3<f64> {
        self.inv.transform_point(p)
    }

    pub fn direction_to_local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.inv.transform_vector(v)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.fwd
    }
}

/// A world-space ray with unit direction.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    origin: Point3<f64>,
    direction: Unit<Vector3<f64>>,
}

impl Ray {
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Result<Self> {
        let norm = direction.norm();
        if !norm.is_finite() || norm < 1e-12 || origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "ray needs a finite origin and a nonzero finite direction".into(),
            ));
        }
        Ok(Self { origin, direction: Unit::new_unchecked(direction / norm) })
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction.into_inner()
    }
}

/// Ordered list of equal-shape timepoint volumes plus the local-to-world map.
#[derive(Debug, Clone)]
pub struct Dataset {
    timepoints: Vec<VolumeTimepoint>,
    world_transform: WorldTransform,
}

impl Dataset {
    pub fn new(timepoints: Vec<VolumeTimepoint>, world_transform: WorldTransform) -> Result<Self> {
        let first = timepoints
            .first()
            .ok_or_else(|| Error::InvalidVolume("dataset needs at least one timepoint".into()))?;
        let (dims, voxel_size) = (first.dims(), first.voxel_size());
        if timepoints.iter().any(|t| t.dims() != dims || t.voxel_size() != voxel_size) {
            return Err(Error::InvalidVolume(
                "all timepoints must share dims and voxel_size".into(),
            ));
        }
        Ok(Self { timepoints, world_transform })
    }

    /// Dataset whose world space is the physical voxel grid (extent scaling only).
    pub fn with_canonical_transform(timepoints: Vec<VolumeTimepoint>) -> Result<Self> {
        let extent = timepoints
            .first()
            .ok_or_else(|| Error::InvalidVolume("dataset needs at least one timepoint".into()))?
            .world_extent();
        Self::new(timepoints, WorldTransform::for_extent(extent)?)
    }

    pub fn n_timepoints(&self) -> usize {
        self.timepoints.len()
    }

    pub fn timepoint(&self, t: usize) -> &VolumeTimepoint {
        &self.timepoints[t]
    }

    pub fn dims(&self) -> [usize; 3] {
        self.timepoints[0].dims()
    }

    pub fn voxel_size(&self) -> [f64; 3] {
        self.timepoints[0].voxel_size()
    }

    pub fn world_extent(&self) -> [f64; 3] {
        self.timepoints[0].world_extent()
    }

    pub fn world_transform(&self) -> &WorldTransform {
        &self.world_transform
    }

    /// Replace the local-to-world map (shape is unchanged).
    pub fn set_world_transform(&mut self, t: WorldTransform) {
        self.world_transform = t;
    }

    /// Clip a world-space ray against this dataset's volume.
    pub fn intersect(&self, ray: &Ray) -> Option<(Point3<f64>, Point3<f64>)> {
        intersect_volume(ray, &self.world_transform)
    }

    /// Write the JSON sidecar plus one raw file per timepoint into `dir`.
    /// Returns the sidecar path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let names: Vec<String> =
            (0..self.timepoints.len()).map(|i| format!("t{i:03}.raw")).collect();
        for (tp, name) in self.timepoints.iter().zip(&names) {
            let mut bytes = Vec::with_capacity(tp.intensities().len() * 2);
            for v in tp.intensities() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            write_atomic(&dir.join(name), &bytes)?;
        }
        let sidecar = VolumeSidecar {
            dims: self.dims(),
            voxel_size: self.voxel_size(),
            timepoints: names,
        };
        let path = dir.join("volume.json");
        sidecar.save(&path)?;
        Ok(path)
    }

    /// Load a dataset from its sidecar; raw files resolve relative to it.
    pub fn load(sidecar_path: &Path) -> Result<Self> {
        let sidecar = VolumeSidecar::load(sidecar_path)?;
        let dir = sidecar_path.parent().unwrap_or_else(|| Path::new("."));
        let expected = 2 * sidecar.dims[0] * sidecar.dims[1] * sidecar.dims[2];
        let mut timepoints = Vec::with_capacity(sidecar.timepoints.len());
        for name in &sidecar.timepoints {
            let path = dir.join(name);
            let bytes = fs::read(&path)?;
            if bytes.len() != expected {
                return Err(Error::data(
                    path,
                    format!("expected {expected} bytes for dims {:?}, got {}", sidecar.dims, bytes.len()),
                ));
            }
            let vals = bytes
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect();
            timepoints.push(VolumeTimepoint::new(sidecar.dims, sidecar.voxel_size, vals)?);
        }
        if timepoints.is_empty() {
            return Err(Error::data(sidecar_path, "sidecar lists no timepoints"));
        }
        Self::with_canonical_transform(timepoints)
    }
}

/// The dataset sidecar: dims, voxel size, and the raw file names in time order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeSidecar {
    pub dims: [usize; 3],
    pub voxel_size: [f64; 3],
    pub timepoints: Vec<String>,
}

impl VolumeSidecar {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let sidecar: VolumeSidecar = serde_json::from_slice(&bytes)
            .map_err(|e| Error::data(path, format!("not a volume sidecar: {e}")))?;
        if sidecar.dims.iter().any(|&n| n == 0) || sidecar.voxel_size.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::data(path, "sidecar dims/voxel_size out of range"));
        }
        Ok(sidecar)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)?;
        Ok(())
    }

    pub fn world_extent(&self) -> [f64; 3] {
        [
            self.dims[0] as f64 * self.voxel_size[0],
            self.dims[1] as f64 * self.voxel_size[1],
            self.dims[2] as f64 * self.voxel_size[2],
        ]
    }
}

fn clamp_unit_cube(p: Point3<f64>) -> Option<Point3<f64>> {
    if p.iter().any(|v| !v.is_finite() || *v < -COORD_EPS || *v > 1.0 + COORD_EPS) {
        return None;
    }
    Some(Point3::new(p.x.clamp(0.0, 1.0), p.y.clamp(0.0, 1.0), p.z.clamp(0.0, 1.0)))
}

/// Clip a world-space ray against the volume image of the unit cube.
///
/// Returns entry and exit in normalized volume-local coordinates with
/// `entry_t <= exit_t`; an origin inside the volume yields itself as entry.
/// `None` on a miss.
pub fn intersect_volume(
    ray: &Ray,
    transform: &WorldTransform,
) -> Option<(Point3<f64>, Point3<f64>)> {
    let o = transform.to_local(&ray.origin());
    let d = transform.direction_to_local(&ray.direction());

    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for axis in 0..3 {
        let (oi, di) = (o[axis], d[axis]);
        if di.abs() < 1e-15 {
            // Parallel to this slab: origin must already be inside it.
            if !(0.0..=1.0).contains(&oi) {
                return None;
            }
        } else {
            let (t0, t1) = ((0.0 - oi) / di, (1.0 - oi) / di);
            t_lo = t_lo.max(t0.min(t1));
            t_hi = t_hi.min(t0.max(t1));
        }
    }
    let t_entry = t_lo.max(0.0);
    if t_hi < t_entry {
        return None;
    }
    let entry = clamp_unit_cube(o + d * t_entry)?;
    let exit = clamp_unit_cube(o + d * t_hi)?;
    Some((entry, exit))
}

#[inline]
fn axis_lattice(coord: f64, n: usize) -> (usize, usize, f64) {
    let u = (coord * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let lo = u.floor();
    let i0 = lo as usize;
    (i0, (i0 + 1).min(n - 1), u - lo)
}

/// Trilinear interpolation of the 8 voxel values surrounding `p` under the
/// voxel-center convention, clamping to edge values beyond the outermost
/// centers. `p` must lie in `[0,1]^3` (within [`COORD_EPS`]).
pub fn sample_trilinear(vol: &VolumeTimepoint, p: &Point3<f64>) -> Result<f64> {
    let q = clamp_unit_cube(*p).ok_or(Error::OutOfVolume(p.x, p.y, p.z))?;
    let [nx, ny, nz] = vol.dims();
    let (x0, x1, fx) = axis_lattice(q.x, nx);
    let (y0, y1, fy) = axis_lattice(q.y, ny);
    let (z0, z1, fz) = axis_lattice(q.z, nz);

    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let v = |x, y, z| vol.voxel(x, y, z) as f64;

    let c00 = lerp(v(x0, y0, z0), v(x1, y0, z0), fx);
    let c10 = lerp(v(x0, y1, z0), v(x1, y1, z0), fx);
    let c01 = lerp(v(x0, y0, z1), v(x1, y0, z1), fx);
    let c11 = lerp(v(x0, y1, z1), v(x1, y1, z1), fx);
    Ok(lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz))
}

/// Sample intensities at uniform spacing along the local-space segment from
/// `entry` to `exit`, both inclusive.
///
/// The requested step is `spacing_voxels` times the smallest voxel extent;
/// the segment is divided into `max(floor(len/step), 1)` equal intervals, so
/// at least two samples come back and the actual spacing matches the request
/// whenever it divides the segment length.
pub fn sample_ray(
    vol: &VolumeTimepoint,
    entry: &Point3<f64>,
    exit: &Point3<f64>,
    spacing_voxels: f64,
) -> Result<Vec<(Point3<f64>, f64)>> {
    if !(spacing_voxels > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "spacing_voxels must be > 0, got {spacing_voxels}"
        )));
    }
    let extent = vol.world_extent();
    let delta = exit - entry;
    let world_len = Vector3::new(delta.x * extent[0], delta.y * extent[1], delta.z * extent[2]).norm();
    if world_len < 1e-12 {
        return Err(Error::DegenerateSegment);
    }
    let step = spacing_voxels * vol.min_voxel_extent();
    let n = ((world_len / step + COORD_EPS).floor() as usize).max(1);

    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let p = entry + delta * (k as f64 / n as f64);
        let value = sample_trilinear(vol, &p)?;
        out.push((p, value));
    }
    Ok(out)
}
