//! Finite boxes `B(L) = [-L, L]^d` with a defect sublattice spanned by the
//! first `s` coordinate axes.
//!
//! Vertices are indexed row-major over coordinates shifted to `0..side`, axis
//! 0 being the most significant. The origin sits at shifted coordinate `L` on
//! every axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Free,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Free => f.write_str("free"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

/// Geometry of a box with a defect plane.
///
/// `s == d` is the homogeneous baseline: every edge is a defect edge and the
/// distinction between the two densities disappears.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: usize,
    pub s: usize,
    #[serde(rename = "L")]
    pub half_side: usize,
    pub boundary: Boundary,
}

/// Largest supported dimension; face flags for `s` axes must fit in a `u32`.
pub const MAX_DIM: usize = 16;

impl LatticeSpec {
    pub fn new(d: usize, s: usize, half_side: usize, boundary: Boundary) -> Result<Self> {
        let spec = LatticeSpec {
            d,
            s,
            half_side,
            boundary,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Free-boundary box, the geometry used by every crossing experiment.
    pub fn free(d: usize, s: usize, half_side: usize) -> Result<Self> {
        Self::new(d, s, half_side, Boundary::Free)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.d > MAX_DIM {
            return Err(Error::InvalidLattice(format!(
                "dimension d = {} outside 2..={MAX_DIM}",
                self.d
            )));
        }
        if self.s < 2 || self.s > self.d {
            return Err(Error::InvalidLattice(format!(
                "defect dimension s = {} must satisfy 2 <= s <= d = {}",
                self.s, self.d
            )));
        }
        if self.half_side < 1 {
            return Err(Error::InvalidLattice("half side L must be >= 1".into()));
        }
        if self.boundary == Boundary::Periodic && self.half_side < 2 {
            // side 2 would wrap onto the direct edge and create a double bond
            return Err(Error::InvalidLattice(
                "periodic boxes need L >= 2 (side 2 produces duplicate edges)".into(),
            ));
        }
        let side = self.side() as u128;
        let count = (0..self.d).try_fold(1u128, |acc, _| acc.checked_mul(side));
        match count {
            Some(n) if n * self.d as u128 <= u32::MAX as u128 => Ok(()),
            _ => Err(Error::InvalidLattice(format!(
                "box with d = {}, L = {} is too large to index",
                self.d, self.half_side
            ))),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.s == self.d
    }

    /// Number of vertices along each axis.
    pub fn side(&self) -> usize {
        match self.boundary {
            Boundary::Free => 2 * self.half_side + 1,
            Boundary::Periodic => 2 * self.half_side,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    /// Index stride of one step along `axis` (0-based).
    pub fn stride(&self, axis: usize) -> usize {
        self.side().pow((self.d - 1 - axis) as u32)
    }

    /// Shifted coordinate (`0..side`) of vertex `v` along `axis`.
    #[inline]
    pub fn shifted_coord(&self, v: usize, axis: usize) -> usize {
        (v / self.stride(axis)) % self.side()
    }

    /// Centered coordinates of vertex `v`.
    pub fn coords(&self, v: usize) -> Vec<i64> {
        let l = self.half_side as i64;
        (0..self.d)
            .map(|a| self.shifted_coord(v, a) as i64 - l)
            .collect()
    }

    /// Vertex index of centered coordinates, `None` outside the box.
    pub fn index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.d {
            return None;
        }
        let l = self.half_side as i64;
        let side = self.side() as i64;
        coords.iter().try_fold(0usize, |acc, &c| {
            let shifted = c + l;
            (0..side)
                .contains(&shifted)
                .then(|| acc * side as usize + shifted as usize)
        })
    }

    pub fn origin(&self) -> usize {
        let l = self.half_side;
        (0..self.d).fold(0, |acc, _| acc * self.side() + l)
    }

    /// True if every coordinate beyond the first `s` axes is zero.
    pub fn in_defect_plane(&self, v: usize) -> bool {
        (self.s..self.d).all(|a| self.shifted_coord(v, a) == self.half_side)
    }

    /// Number of edges along one axis.
    pub fn edges_per_axis(&self) -> usize {
        let side = self.side();
        let lines = side.pow((self.d - 1) as u32);
        match self.boundary {
            Boundary::Free => lines * (side - 1),
            Boundary::Periodic => lines * side,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Bulk,
    Defect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub axis: u8,
    pub class: EdgeClass,
}

/// Canonically ordered edge list of a box.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pub spec: LatticeSpec,
    pub edges: Vec<Edge>,
    defect_count: usize,
}

impl EdgeTable {
    pub fn total(&self) -> usize {
        self.edges.len()
    }

    /// Number of defect edges, `S`.
    pub fn defect_count(&self) -> usize {
        self.defect_count
    }

    pub fn bulk_count(&self) -> usize {
        self.edges.len() - self.defect_count
    }

    pub fn bulk(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.class == EdgeClass::Bulk)
    }

    pub fn defect(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.class == EdgeClass::Defect)
    }

    pub fn count_on_axis(&self, axis: usize) -> usize {
        self.edges.iter().filter(|e| e.axis as usize == axis).count()
    }
}

/// Enumerates every edge of the box, ordered by (lower vertex index, axis).
///
/// For periodic boxes the wrap edge along an axis is listed under the vertex
/// with the largest coordinate on that axis.
pub fn build_edge_table(spec: &LatticeSpec) -> Result<EdgeTable> {
    spec.validate()?;
    let side = spec.side();
    let mut edges = Vec::with_capacity(spec.edges_per_axis() * spec.d);
    let mut defect_count = 0;
    let defect_vertex: Vec<bool> = (0..spec.vertex_count())
        .map(|v| spec.in_defect_plane(v))
        .collect();
    for v in 0..spec.vertex_count() {
        for axis in 0..spec.d {
            let c = spec.shifted_coord(v, axis);
            let stride = spec.stride(axis);
            let w = if c + 1 < side {
                v + stride
            } else if spec.boundary == Boundary::Periodic {
                v - c * stride
            } else {
                continue;
            };
            let class = if defect_vertex[v] && defect_vertex[w] {
                defect_count += 1;
                EdgeClass::Defect
            } else {
                EdgeClass::Bulk
            };
            edges.push(Edge {
                a: v as u32,
                b: w as u32,
                axis: axis as u8,
                class,
            });
        }
    }
    Ok(EdgeTable {
        spec: *spec,
        edges,
        defect_count,
    })
}

/// The face `A_{sign * axis}`: vertices whose coordinate on `axis` (1-based,
/// at most `s`) equals `sign * L`.
pub fn face_vertices(spec: &LatticeSpec, axis: usize, sign: i8) -> Result<Vec<u32>> {
    let sign_char = if sign < 0 { '-' } else { '+' };
    if axis == 0 || axis > spec.s {
        return Err(Error::InvalidFace {
            axis,
            sign: sign_char,
            reason: "only vertical faces (axis 1..=s) are crossing targets",
        });
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidFace {
            axis,
            sign: '?',
            reason: "sign must be +1 or -1",
        });
    }
    if spec.boundary == Boundary::Periodic {
        return Err(Error::InvalidFace {
            axis,
            sign: sign_char,
            reason: "a periodic box has no faces",
        });
    }
    let target = if sign > 0 { 2 * spec.half_side } else { 0 };
    Ok((0..spec.vertex_count())
        .filter(|&v| spec.shifted_coord(v, axis - 1) == target)
        .map(|v| v as u32)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cube_counts() {
        let spec = LatticeSpec::free(3, 2, 1).unwrap();
        assert_eq!(spec.vertex_count(), 27);
        let table = build_edge_table(&spec).unwrap();
        assert_eq!(table.defect_count(), 12);
        assert_eq!(table.total(), 54);
        assert_eq!(table.bulk_count(), 42);
    }

    #[test]
    fn defect_count_formula_free_3d() {
        for l in 1..5 {
            let table = build_edge_table(&LatticeSpec::free(3, 2, l).unwrap()).unwrap();
            assert_eq!(table.defect_count(), 2 * (2 * l) * (2 * l + 1));
        }
    }

    #[test]
    fn defect_count_independent_of_d() {
        for l in 1..4 {
            let s3 = build_edge_table(&LatticeSpec::free(3, 2, l).unwrap()).unwrap();
            let s4 = build_edge_table(&LatticeSpec::free(4, 2, l).unwrap()).unwrap();
            assert_eq!(s3.defect_count(), s4.defect_count());
        }
    }

    #[test]
    fn per_axis_counts_sum_to_total() {
        let spec = LatticeSpec::free(4, 3, 2).unwrap();
        let table = build_edge_table(&spec).unwrap();
        let sum: usize = (0..4).map(|a| table.count_on_axis(a)).sum();
        assert_eq!(sum, table.total());
        for a in 0..4 {
            assert_eq!(table.count_on_axis(a), spec.edges_per_axis());
        }
    }

    #[test]
    fn defect_edges_lie_in_plane() {
        let spec = LatticeSpec::free(4, 2, 2).unwrap();
        let table = build_edge_table(&spec).unwrap();
        for e in table.defect() {
            for v in [e.a, e.b] {
                let c = spec.coords(v as usize);
                assert!(c[2..].iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn ordering_is_canonical_and_unique() {
        let spec = LatticeSpec::free(3, 2, 2).unwrap();
        let table = build_edge_table(&spec).unwrap();
        for w in table.edges.windows(2) {
            assert!((w[0].a, w[0].axis) < (w[1].a, w[1].axis));
        }
        let again = build_edge_table(&spec).unwrap();
        assert_eq!(table.edges, again.edges);
    }

    #[test]
    fn periodic_counts() {
        let spec = LatticeSpec::new(3, 2, 2, Boundary::Periodic).unwrap();
        assert_eq!(spec.vertex_count(), 64);
        let table = build_edge_table(&spec).unwrap();
        assert_eq!(table.total(), 3 * 64);
        let mut pairs: Vec<_> = table
            .edges
            .iter()
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        assert_eq!(pairs.len(), table.total());
        // a 4x4 periodic plane has 2 * 16 edges
        assert_eq!(table.defect_count(), 32);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(LatticeSpec::free(3, 4, 1).is_err());
        assert!(LatticeSpec::free(3, 2, 0).is_err());
        assert!(LatticeSpec::free(3, 1, 2).is_err());
        assert!(LatticeSpec::new(3, 2, 1, Boundary::Periodic).is_err());
    }

    #[test]
    fn face_sizes() {
        let spec = LatticeSpec::free(3, 2, 1).unwrap();
        assert_eq!(face_vertices(&spec, 1, 1).unwrap().len(), 9);
        let spec = LatticeSpec::free(3, 2, 2).unwrap();
        assert_eq!(face_vertices(&spec, 2, -1).unwrap().len(), 25);
        let spec = LatticeSpec::free(4, 2, 1).unwrap();
        assert_eq!(face_vertices(&spec, 1, 1).unwrap().len(), 27);
    }

    #[test]
    fn face_coordinates() {
        let spec = LatticeSpec::free(3, 2, 2).unwrap();
        for v in face_vertices(&spec, 2, -1).unwrap() {
            assert_eq!(spec.coords(v as usize)[1], -2);
        }
    }

    #[test]
    fn horizontal_faces_rejected() {
        let spec = LatticeSpec::free(3, 2, 1).unwrap();
        assert!(face_vertices(&spec, 3, 1).is_err());
        assert!(face_vertices(&spec, 0, 1).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let spec = LatticeSpec::free(3, 2, 2).unwrap();
        for v in 0..spec.vertex_count() {
            assert_eq!(spec.index(&spec.coords(v)), Some(v));
        }
        assert_eq!(spec.coords(spec.origin()), vec![0, 0, 0]);
        assert_eq!(spec.index(&[3, 0, 0]), None);
    }
}
