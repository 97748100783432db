//! Finite lattice truncations and their site enumerations.
//!
//! A [`SiteMap`] fixes a deterministic bijection between lattice sites (plus
//! an internal channel index) and matrix basis indices. All operators in this
//! crate carry the site map they act on; every ordering convention lives here
//! and nowhere else.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Supported finite truncations.
///
/// * `SquareZ2` — square patch `{(x, y) : |x| ≤ R, |y| ≤ R}` of the plane.
/// * `LineZ` — segment `{x : |x| ≤ W}` of the line.
/// * `HalfLineN` — initial segment `{k : 1 ≤ k ≤ ℓ}` of the half line.
/// * `StarGraph` — `k` legs of length `ℓ` glued at a vertex, the vertex site
///   itself optional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    SquareZ2 { radius: u32 },
    LineZ { half_width: u32 },
    HalfLineN { length: u32 },
    StarGraph { legs: u32, leg_len: u32, include_vertex: bool },
}

impl Geometry {
    pub fn describe(&self) -> String {
        match self {
            Geometry::SquareZ2 { radius } => format!("square patch, radius {radius}"),
            Geometry::LineZ { half_width } => format!("line segment, half width {half_width}"),
            Geometry::HalfLineN { length } => format!("half line, length {length}"),
            Geometry::StarGraph { legs, leg_len, include_vertex } => {
                format!("star graph, {legs} legs of length {leg_len}, vertex {}", if *include_vertex { "included" } else { "excluded" })
            }
        }
    }
}

/// A single lattice site in one of the supported geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Square { x: i64, y: i64 },
    Line { x: i64 },
    HalfLine { k: u64 },
    StarVertex,
    /// `leg` and `r` are 1-based.
    StarLeg { leg: u32, r: u32 },
}

/// Deterministic enumeration of the sites of a [`Geometry`], tensored with an
/// internal channel space of dimension `dof`.
///
/// Basis ordering: site-major, channel-minor; basis index `site_index · dof + channel`.
/// Site orderings:
/// * `SquareZ2`: `x` major from `−R` to `R`, then `y` from `−R` to `R`.
/// * `LineZ`: `x` from `−W` to `W`.
/// * `HalfLineN`: `k` from `1` to `ℓ` (vertex-adjacent end first).
/// * `StarGraph`: vertex first when included, then leg-major, radial `1..=ℓ`
///   outward within each leg.
#[derive(Debug)]
pub struct SiteMap {
    geometry: Geometry,
    dof: usize,
    sites: Vec<Site>,
}

impl PartialEq for SiteMap {
    fn eq(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.dof == other.dof
    }
}

impl SiteMap {
    pub fn new(geometry: Geometry, dof: usize) -> Result<Arc<SiteMap>> {
        if dof == 0 {
            return Err(Error::InvalidParameter("internal channel count must be at least 1".into()));
        }
        let sites = match geometry {
            Geometry::SquareZ2 { radius } => {
                if radius == 0 {
                    return Err(Error::InvalidParameter("square patch radius must be at least 1".into()));
                }
                let r = radius as i64;
                let mut v = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
                for x in -r..=r {
                    for y in -r..=r {
                        v.push(Site::Square { x, y });
                    }
                }
                v
            }
            Geometry::LineZ { half_width } => {
                if half_width == 0 {
                    return Err(Error::InvalidParameter("line half width must be at least 1".into()));
                }
                let w = half_width as i64;
                (-w..=w).map(|x| Site::Line { x }).collect()
            }
            Geometry::HalfLineN { length } => {
                if length == 0 {
                    return Err(Error::InvalidParameter("half line length must be at least 1".into()));
                }
                (1..=length as u64).map(|k| Site::HalfLine { k }).collect()
            }
            Geometry::StarGraph { legs, leg_len, include_vertex } => {
                if legs < 3 {
                    return Err(Error::InvalidParameter("a star graph needs at least 3 legs".into()));
                }
                if leg_len == 0 {
                    return Err(Error::InvalidParameter("star legs must have length at least 1".into()));
                }
                let mut v = Vec::with_capacity((legs * leg_len) as usize + 1);
                if include_vertex {
                    v.push(Site::StarVertex);
                }
                for leg in 1..=legs {
                    for r in 1..=leg_len {
                        v.push(Site::StarLeg { leg, r });
                    }
                }
                v
            }
        };
        Ok(Arc::new(SiteMap { geometry, dof, sites }))
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Total matrix dimension: sites × channels.
    pub fn dim(&self) -> usize {
        self.sites.len() * self.dof
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, site_index: usize) -> Site {
        self.sites[site_index]
    }

    pub fn index_of(&self, site: &Site) -> Option<usize> {
        match (self.geometry, site) {
            (Geometry::SquareZ2 { radius }, Site::Square { x, y }) => {
                let r = radius as i64;
                if x.abs() > r || y.abs() > r {
                    None
                } else {
                    Some(((x + r) * (2 * r + 1) + (y + r)) as usize)
                }
            }
            (Geometry::LineZ { half_width }, Site::Line { x }) => {
                let w = half_width as i64;
                if x.abs() > w {
                    None
                } else {
                    Some((x + w) as usize)
                }
            }
            (Geometry::HalfLineN { length }, Site::HalfLine { k }) => {
                if *k == 0 || *k > length as u64 {
                    None
                } else {
                    Some(*k as usize - 1)
                }
            }
            (Geometry::StarGraph { legs, leg_len, include_vertex }, Site::StarVertex) => {
                let _ = (legs, leg_len);
                if include_vertex {
                    Some(0)
                } else {
                    None
                }
            }
            (Geometry::StarGraph { legs, leg_len, include_vertex }, Site::StarLeg { leg, r }) => {
                if *leg == 0 || *leg > legs || *r == 0 || *r > leg_len {
                    None
                } else {
                    let base = if include_vertex { 1 } else { 0 };
                    Some(base + ((*leg - 1) * leg_len + (*r - 1)) as usize)
                }
            }
            _ => None,
        }
    }

    pub fn basis_index(&self, site_index: usize, channel: usize) -> usize {
        debug_assert!(channel < self.dof);
        site_index * self.dof + channel
    }

    pub fn site_of_basis(&self, basis_index: usize) -> usize {
        basis_index / self.dof
    }

    pub fn channel_of_basis(&self, basis_index: usize) -> usize {
        basis_index % self.dof
    }

    /// Distance from the natural center: max-norm radius on the square patch,
    /// |x| on the line, the coordinate `k` on the half line, vertex distance
    /// on the star.
    pub fn center_distance(&self, site_index: usize) -> u64 {
        match self.sites[site_index] {
            Site::Square { x, y } => x.unsigned_abs().max(y.unsigned_abs()),
            Site::Line { x } => x.unsigned_abs(),
            Site::HalfLine { k } => k,
            Site::StarVertex => 0,
            Site::StarLeg { r, .. } => r as u64,
        }
    }

    /// Largest possible [`Self::center_distance`] on this truncation; sites at
    /// this distance sit on the artificial boundary.
    pub fn max_center_distance(&self) -> u64 {
        match self.geometry {
            Geometry::SquareZ2 { radius } => radius as u64,
            Geometry::LineZ { half_width } => half_width as u64,
            Geometry::HalfLineN { length } => length as u64,
            Geometry::StarGraph { leg_len, .. } => leg_len as u64,
        }
    }

    /// Graph distance between two sites (nearest-neighbor hops; legs of the
    /// star are joined through the vertex).
    pub fn graph_distance(&self, a: usize, b: usize) -> u64 {
        match (self.sites[a], self.sites[b]) {
            (Site::Square { x: x1, y: y1 }, Site::Square { x: x2, y: y2 }) => {
                x1.abs_diff(x2) + y1.abs_diff(y2)
            }
            (Site::Line { x: x1 }, Site::Line { x: x2 }) => x1.abs_diff(x2),
            (Site::HalfLine { k: k1 }, Site::HalfLine { k: k2 }) => k1.abs_diff(k2),
            (Site::StarVertex, Site::StarVertex) => 0,
            (Site::StarVertex, Site::StarLeg { r, .. }) | (Site::StarLeg { r, .. }, Site::StarVertex) => r as u64,
            (Site::StarLeg { leg: l1, r: r1 }, Site::StarLeg { leg: l2, r: r2 }) => {
                if l1 == l2 {
                    r1.abs_diff(r2) as u64
                } else {
                    (r1 + r2) as u64
                }
            }
            _ => unreachable!("sites from the same map share a geometry"),
        }
    }

    /// Planar angle of a site in `[0, 2π)`, `None` at the origin. Only the
    /// square patch carries angles.
    pub fn angle(&self, site_index: usize) -> Option<f64> {
        match self.sites[site_index] {
            Site::Square { x: 0, y: 0 } => None,
            Site::Square { x, y } => {
                let mut a = (y as f64).atan2(x as f64);
                if a < 0.0 {
                    a += std::f64::consts::TAU;
                }
                Some(a)
            }
            _ => None,
        }
    }

    /// Unit translation of a site along `axis` by `step ∈ {−1, +1}`.
    /// Periodic boundary wraps around; open boundary returns `None` for sites
    /// shifted off the patch. Defined on the square patch (axes 0, 1) and the
    /// line segment (axis 0).
    pub fn translate(&self, site_index: usize, axis: usize, step: i64, periodic: bool) -> Result<Option<usize>> {
        let site = self.sites[site_index];
        match (self.geometry, site) {
            (Geometry::SquareZ2 { radius }, Site::Square { x, y }) => {
                let r = radius as i64;
                let span = 2 * r + 1;
                let (mut nx, mut ny) = match axis {
                    0 => (x + step, y),
                    1 => (x, y + step),
                    _ => return Err(Error::InvalidParameter(format!("axis {axis} out of range for the square patch"))),
                };
                if periodic {
                    nx = wrap(nx, r, span);
                    ny = wrap(ny, r, span);
                    Ok(self.index_of(&Site::Square { x: nx, y: ny }))
                } else {
                    Ok(self.index_of(&Site::Square { x: nx, y: ny }))
                }
            }
            (Geometry::LineZ { half_width }, Site::Line { x }) => {
                if axis != 0 {
                    return Err(Error::InvalidParameter(format!("axis {axis} out of range for the line")));
                }
                let w = half_width as i64;
                let span = 2 * w + 1;
                let mut nx = x + step;
                if periodic {
                    nx = wrap(nx, w, span);
                }
                Ok(self.index_of(&Site::Line { x: nx }))
            }
            _ => Err(Error::GeometryMismatch {
                expected: "square patch or line segment".into(),
                found: self.geometry.describe(),
            }),
        }
    }
}

fn wrap(coord: i64, radius: i64, span: i64) -> i64 {
    let mut c = coord;
    while c > radius {
        c -= span;
    }
    while c < -radius {
        c += span;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_patch_counts_and_roundtrip() {
        let map = SiteMap::new(Geometry::SquareZ2 { radius: 3 }, 2).unwrap();
        assert_eq!(map.n_sites(), 49);
        assert_eq!(map.dim(), 98);
        for i in 0..map.n_sites() {
            assert_eq!(map.index_of(&map.site(i)), Some(i));
        }
    }

    #[test]
    fn line_ordering_is_ascending() {
        let map = SiteMap::new(Geometry::LineZ { half_width: 2 }, 1).unwrap();
        let xs: Vec<i64> = map.sites().iter().map(|s| match s {
            Site::Line { x } => *x,
            _ => unreachable!(),
        }).collect();
        assert_eq!(xs, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn star_counts_vertex_and_distances() {
        let map = SiteMap::new(Geometry::StarGraph { legs: 3, leg_len: 4, include_vertex: true }, 1).unwrap();
        assert_eq!(map.n_sites(), 13);
        let a = map.index_of(&Site::StarLeg { leg: 1, r: 3 }).unwrap();
        let b = map.index_of(&Site::StarLeg { leg: 2, r: 2 }).unwrap();
        assert_eq!(map.graph_distance(a, b), 5);
        let c = map.index_of(&Site::StarLeg { leg: 1, r: 1 }).unwrap();
        assert_eq!(map.graph_distance(a, c), 2);
        assert_eq!(map.graph_distance(0, a), 3);
    }

    #[test]
    fn periodic_translation_wraps() {
        let map = SiteMap::new(Geometry::LineZ { half_width: 2 }, 1).unwrap();
        let edge = map.index_of(&Site::Line { x: 2 }).unwrap();
        let wrapped = map.translate(edge, 0, 1, true).unwrap().unwrap();
        assert_eq!(map.site(wrapped), Site::Line { x: -2 });
        assert_eq!(map.translate(edge, 0, 1, false).unwrap(), None);
    }

    #[test]
    fn angles_cover_axes_exactly() {
        let map = SiteMap::new(Geometry::SquareZ2 { radius: 2 }, 1).unwrap();
        let east = map.index_of(&Site::Square { x: 2, y: 0 }).unwrap();
        let north = map.index_of(&Site::Square { x: 0, y: 1 }).unwrap();
        let west = map.index_of(&Site::Square { x: -1, y: 0 }).unwrap();
        assert_eq!(map.angle(east), Some(0.0));
        assert_eq!(map.angle(north), Some(std::f64::consts::FRAC_PI_2));
        assert_eq!(map.angle(west), Some(std::f64::consts::PI));
        let origin = map.index_of(&Site::Square { x: 0, y: 0 }).unwrap();
        assert_eq!(map.angle(origin), None);
    }
}
