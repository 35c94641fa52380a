//! Voxel volume of a stack of section masks, its closed surface mesh and
//! binary STL export.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, PixelGeometry};

/// Axial spacing between consecutive sections in the device export.
pub const DEFAULT_SLICE_DISTANCE_UM: f64 = 25.0;

/// Co-registered section masks, first section at z = 0.
#[derive(Debug, Clone)]
pub struct SectionStack {
    sections: Vec<BinaryMask>,
    slice_distance_um: f64,
}

impl SectionStack {
    pub fn new(sections: Vec<BinaryMask>, slice_distance_um: f64) -> Result<Self> {
        let first = sections
            .first()
            .ok_or_else(|| Error::InvalidParameter("a section stack needs at least one section".into()))?;
        if !(slice_distance_um.is_finite() && slice_distance_um > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "slice distance must be positive, got {slice_distance_um}"
            )));
        }
        for (i, s) in sections.iter().enumerate() {
            let scan_matches =
                (s.scan_size_um() - first.scan_size_um()).abs() <= 1e-9 * first.scan_size_um();
            if !s.same_shape(first) || !scan_matches {
                return Err(Error::DimensionMismatch(format!(
                    "section {i} is {}x{} ({} um), section 0 is {}x{} ({} um)",
                    s.width(),
                    s.height(),
                    s.scan_size_um(),
                    first.width(),
                    first.height(),
                    first.scan_size_um()
                )));
            }
        }
        Ok(Self {
            sections,
            slice_distance_um,
        })
    }

    pub fn sections(&self) -> &[BinaryMask] {
        &self.sections
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn slice_distance_um(&self) -> f64 {
        self.slice_distance_um
    }

    pub fn width(&self) -> usize {
        self.sections[0].width()
    }

    pub fn height(&self) -> usize {
        self.sections[0].height()
    }

    /// Object pixels summed over all sections.
    pub fn total_pixels(&self) -> usize {
        self.sections.iter().map(BinaryMask::count).sum()
    }

    #[inline]
    fn occupied(&self, x: isize, y: isize, z: isize) -> bool {
        if x < 0 || y < 0 || z < 0 {
            return false;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        z < self.sections.len()
            && x < self.width()
            && y < self.height()
            && self.sections[z].get(x, y)
    }

    fn voxel_index(&self, x: isize, y: isize, z: isize) -> usize {
        (z as usize * self.height() + y as usize) * self.width() + x as usize
    }
}

/// One row of a volume report: sections, spacing, object pixels, volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeMeasurement {
    pub sections: usize,
    pub distance_um: f64,
    pub pixels: usize,
    pub volume_um3: f64,
}

impl VolumeMeasurement {
    pub fn of(stack: &SectionStack, geom: &PixelGeometry) -> Self {
        Self {
            sections: stack.len(),
            distance_um: stack.slice_distance_um(),
            pixels: stack.total_pixels(),
            volume_um3: stack_volume(stack, geom),
        }
    }
}

/// Object pixel count × pixel area (µm²) × slice distance (µm).
pub fn stack_volume(stack: &SectionStack, geom: &PixelGeometry) -> f64 {
    stack.total_pixels() as f64 * geom.pixel_area_um2() * stack.slice_distance_um
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub normal: [f64; 3],
    pub vertices: [[f64; 3]; 3],
}

/// Triangle soup in µm coordinates, counter-clockwise seen from outside.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub triangles: Vec<Triangle>,
}

impl TriangleMesh {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Verifies that every edge is used by exactly two triangles, once in
    /// each direction.
    pub fn check_watertight(&self) -> Result<()> {
        type Key = [u64; 3];
        let key = |v: &[f64; 3]| -> Key { [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()] };
        let mut edges: HashMap<(Key, Key), (u32, u32)> = HashMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                let a = key(&t.vertices[i]);
                let b = key(&t.vertices[(i + 1) % 3]);
                if a == b {
                    return Err(Error::NotWatertight("degenerate edge".into()));
                }
                let entry = edges.entry((a.min(b), a.max(b))).or_default();
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        for ((a, _), (fwd, back)) in &edges {
            if *fwd != 1 || *back != 1 {
                let p = a.map(f64::from_bits);
                return Err(Error::NotWatertight(format!(
                    "edge from ({}, {}, {}) used {fwd} + {back} times",
                    p[0], p[1], p[2]
                )));
            }
        }
        Ok(())
    }
}

// Vertices are generated on a lattice with `SUB` steps per voxel so that
// face centres and edge split points are exact integers.
const SUB: i64 = 6;
type LatticePoint = [i64; 3];

/// Closed surface of the voxel solid. Each voxel face between an object
/// voxel and background (or the stack boundary) becomes two triangles.
///
/// An edge shared by exactly two diagonally opposed voxels would be used by
/// four faces. Each voxel's pair of faces there gets its own split point on
/// the edge (at one and two thirds), so every mesh edge still borders exactly
/// two triangles and the enclosed volume is unchanged.
pub fn voxel_surface(stack: &SectionStack, geom: &PixelGeometry) -> TriangleMesh {
    let scale = [
        geom.pixel_pitch_um / SUB as f64,
        geom.pixel_pitch_um / SUB as f64,
        stack.slice_distance_um / SUB as f64,
    ];
    let to_um = |p: &LatticePoint| -> [f64; 3] {
        [
            p[0] as f64 * scale[0],
            p[1] as f64 * scale[1],
            p[2] as f64 * scale[2],
        ]
    };

    let mut triangles = Vec::new();
    let (w, h, d) = (stack.width() as isize, stack.height() as isize, stack.len() as isize);
    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                if !stack.occupied(x, y, z) {
                    continue;
                }
                let cell = [x, y, z];
                for axis in 0..3 {
                    for positive in [false, true] {
                        let mut nb = cell;
                        nb[axis] += if positive { 1 } else { -1 };
                        if stack.occupied(nb[0], nb[1], nb[2]) {
                            continue;
                        }
                        let polygon = face_polygon(stack, cell, axis, positive);
                        let mut normal = [0.0; 3];
                        normal[axis] = if positive { 1.0 } else { -1.0 };
                        emit_polygon(&polygon, normal, &to_um, &mut triangles);
                    }
                }
            }
        }
    }
    TriangleMesh { triangles }
}

/// Boundary of one voxel face on the lattice, counter-clockwise seen from
/// outside, with split points inserted on non-manifold edges.
fn face_polygon(stack: &SectionStack, cell: [isize; 3], axis: usize, positive: bool) -> Vec<LatticePoint> {
    let u = (axis + 1) % 3;
    let v = (axis + 2) % 3;
    let mut base = [cell[0] as i64, cell[1] as i64, cell[2] as i64];
    if positive {
        base[axis] += 1;
    }
    let corner = |du: i64, dv: i64| -> [i64; 3] {
        let mut p = base;
        p[u] += du;
        p[v] += dv;
        p
    };
    let mut corners = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
    // e_u x e_v = e_axis; reverse for the negative side.
    if !positive {
        corners.reverse();
    }

    let mut polygon = Vec::with_capacity(8);
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        polygon.push(a.map(|c| c * SUB));
        if let Some(split) = edge_split(stack, cell, a, b) {
            polygon.push(split);
        }
    }
    polygon
}

/// Split point for the grid edge `a`-`b` if the four voxels around it are
/// occupied in a diagonal pattern; `cell` is the voxel owning the face.
fn edge_split(stack: &SectionStack, cell: [isize; 3], a: [i64; 3], b: [i64; 3]) -> Option<LatticePoint> {
    let dir = (0..3).find(|&k| a[k] != b[k]).expect("edge endpoints differ");
    let lo = if a[dir] < b[dir] { a } else { b };
    let (p, q) = ((dir + 1) % 3, (dir + 2) % 3);

    let around = |dp: i64, dq: i64| -> [isize; 3] {
        let mut c = [lo[0] as isize, lo[1] as isize, lo[2] as isize];
        c[p] += dp as isize;
        c[q] += dq as isize;
        c
    };
    let cells = [around(-1, -1), around(0, -1), around(0, 0), around(-1, 0)];
    let occ = cells.map(|c| stack.occupied(c[0], c[1], c[2]));
    let diagonal = occ == [true, false, true, false] || occ == [false, true, false, true];
    if !diagonal {
        return None;
    }
    let other = cells
        .iter()
        .zip(occ)
        .find(|(c, o)| *o && **c != cell)
        .map(|(c, _)| *c)
        .expect("diagonal pattern has two occupied cells");
    let mine = stack.voxel_index(cell[0], cell[1], cell[2]);
    let theirs = stack.voxel_index(other[0], other[1], other[2]);
    let offset = if mine < theirs { SUB / 3 } else { 2 * SUB / 3 };
    let mut split = lo.map(|c| c * SUB);
    split[dir] += offset;
    Some(split)
}

fn emit_polygon(
    polygon: &[LatticePoint],
    normal: [f64; 3],
    to_um: &impl Fn(&LatticePoint) -> [f64; 3],
    out: &mut Vec<Triangle>,
) {
    if polygon.len() == 4 {
        let p = polygon.iter().map(to_um).collect::<Vec<_>>();
        out.push(Triangle {
            normal,
            vertices: [p[0], p[1], p[2]],
        });
        out.push(Triangle {
            normal,
            vertices: [p[0], p[2], p[3]],
        });
        return;
    }
    // Fan around the face centre: the mean of the four corners. Split points
    // are never corners, so the corners are the entries divisible by SUB in
    // every coordinate; the centre is simply the midpoint of the diagonal.
    let corners: Vec<&LatticePoint> = polygon
        .iter()
        .filter(|p| p.iter().all(|c| c % SUB == 0))
        .collect();
    let centre = [0, 1, 2].map(|k| (corners[0][k] + corners[2][k]) / 2);
    let c = to_um(&centre);
    for i in 0..polygon.len() {
        out.push(Triangle {
            normal,
            vertices: [c, to_um(&polygon[i]), to_um(&polygon[(i + 1) % polygon.len()])],
        });
    }
}

/// Enclosed volume by the divergence theorem (sum of signed tetrahedra
/// against the origin).
pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64> {
    mesh.check_watertight()?;
    let mut six_v = 0.0;
    for t in &mesh.triangles {
        let [a, b, c] = t.vertices;
        let cross = [
            b[1] * c[2] - b[2] * c[1],
            b[2] * c[0] - b[0] * c[2],
            b[0] * c[1] - b[1] * c[0],
        ];
        six_v += a[0] * cross[0] + a[1] * cross[1] + a[2] * cross[2];
    }
    Ok(six_v / 6.0)
}

const STL_HEADER: &[u8] = b"binary STL - voxel surface of segmented OCTA sections";

/// Binary STL: 80-byte header, little-endian triangle count, then 50 bytes
/// per triangle (normal, three vertices, zero attribute word).
pub fn encode_stl(mesh: &TriangleMesh) -> Result<Vec<u8>> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let count = u32::try_from(mesh.len())
        .map_err(|_| Error::InvalidParameter(format!("{} triangles exceed the STL limit", mesh.len())))?;
    let mut out = Vec::with_capacity(84 + 50 * mesh.len());
    let mut header = [0u8; 80];
    header[..STL_HEADER.len()].copy_from_slice(STL_HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&count.to_le_bytes());
    for t in &mesh.triangles {
        for value in t.normal.iter().chain(t.vertices.iter().flatten()) {
            out.extend_from_slice(&(*value as f32).to_le_bytes());
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    Ok(out)
}

pub fn export_stl(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_stl(mesh)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a binary STL back into a mesh (single-precision values widened).
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() < 84 {
        return Err(Error::MalformedStl(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    let expected = 84 + 50 * count;
    if bytes.len() != expected {
        return Err(Error::MalformedStl(format!(
            "{count} triangles need {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let read = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes")) as f64;
    let triangles = (0..count)
        .map(|i| {
            let base = 84 + 50 * i;
            let vec3 = |k: usize| [read(base + 12 * k), read(base + 12 * k + 4), read(base + 12 * k + 8)];
            Triangle {
                normal: vec3(0),
                vertices: [vec3(1), vec3(2), vec3(3)],
            }
        })
        .collect();
    Ok(TriangleMesh { triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::pixel_geometry;

    fn unit_geom() -> PixelGeometry {
        pixel_geometry(1.0, 1).unwrap()
    }

    fn stack_of(w: usize, h: usize, layers: &[&[usize]], dist: f64) -> SectionStack {
        let sections = layers
            .iter()
            .map(|on| BinaryMask::from_fn(w, h, w as f64, |x, y| on.contains(&(y * w + x))).unwrap())
            .collect();
        SectionStack::new(sections, dist).unwrap()
    }

    #[test]
    fn unit_voxel() {
        let s = stack_of(1, 1, &[&[0]], 1.0);
        let g = unit_geom();
        let mesh = voxel_surface(&s, &g);
        assert_eq!(mesh.len(), 12);
        mesh.check_watertight().unwrap();
        assert!((mesh_volume(&mesh).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(stack_volume(&s, &g), 1.0);
    }

    #[test]
    fn unit_voxel_with_slice_distance() {
        let s = stack_of(1, 1, &[&[0]], 25.0);
        assert_eq!(stack_volume(&s, &unit_geom()), 25.0);
    }

    #[test]
    fn bar_shares_a_face() {
        let s = stack_of(2, 1, &[&[0, 1]], 25.0);
        let mesh = voxel_surface(&s, &pixel_geometry(2.0, 2).unwrap());
        assert_eq!(mesh.len(), 20);
        assert!((mesh_volume(&mesh).unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn outward_normals_match_winding() {
        let s = stack_of(2, 2, &[&[0, 3], &[1]], 3.0);
        let mesh = voxel_surface(&s, &unit_geom());
        for t in &mesh.triangles {
            let [a, b, c] = t.vertices;
            let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                e1[1] * e2[2] - e1[2] * e2[1],
                e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0],
            ];
            let dot = n[0] * t.normal[0] + n[1] * t.normal[1] + n[2] * t.normal[2];
            assert!(dot > 0.0);
        }
    }

    #[test]
    fn diagonal_voxels_stay_watertight() {
        // Two voxels touching along one edge only.
        let s = stack_of(2, 2, &[&[0, 3]], 1.0);
        let mesh = voxel_surface(&s, &unit_geom());
        mesh.check_watertight().unwrap();
        assert!((mesh_volume(&mesh).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_mismatched_stacks() {
        assert!(SectionStack::new(vec![], 25.0).is_err());
        let a = BinaryMask::empty(3, 3, 1.0).unwrap();
        let b = BinaryMask::empty(3, 4, 1.0).unwrap();
        assert!(matches!(
            SectionStack::new(vec![a.clone(), b], 25.0),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(SectionStack::new(vec![a.clone()], 0.0).is_err());
        let s = SectionStack::new(vec![a], 25.0).unwrap();
        assert_eq!(stack_volume(&s, &unit_geom()), 0.0);
        let mesh = voxel_surface(&s, &unit_geom());
        assert!(mesh.is_empty());
        assert!(matches!(encode_stl(&mesh), Err(Error::EmptyMesh)));
    }

    #[test]
    fn cube_stl_size_and_round_trip() {
        let s = stack_of(1, 1, &[&[0]], 25.0);
        let mesh = voxel_surface(&s, &pixel_geometry(200.0, 510).unwrap());
        let bytes = encode_stl(&mesh).unwrap();
        assert_eq!(bytes.len(), 684);
        assert_eq!(u32::from_le_bytes(bytes[80..84].try_into().unwrap()), 12);
        let parsed = parse_stl(&bytes).unwrap();
        for (a, b) in parsed.triangles.iter().zip(&mesh.triangles) {
            for (va, vb) in a.vertices.iter().zip(&b.vertices) {
                for k in 0..3 {
                    assert_eq!(va[k], vb[k] as f32 as f64);
                }
            }
        }
        assert_eq!(encode_stl(&parsed).unwrap(), bytes);
        assert!(parse_stl(&bytes[..100]).is_err());
    }

    #[test]
    fn measurement_row() {
        let s = stack_of(2, 1, &[&[0], &[0, 1]], 25.0);
        let m = VolumeMeasurement::of(&s, &unit_geom());
        assert_eq!(m.sections, 2);
        assert_eq!(m.pixels, 3);
        assert_eq!(m.volume_um3, 75.0);
    }
}
