//! Rate regions in the `(R_XY, R_XZ)` plane: the outer bound, the inner
//! bound (convex hull of two cap-form regions built from minimal sufficient
//! statistics), and the exact region when the tightness conditions hold.

use serde::{Deserialize, Serialize};

use crate::aux::{max_aux_info_outer, max_aux_info_thm3, SolverReport, Thm3Options};
use crate::dist::{JointPmf, VariableGroup};
use crate::error::{Error, Result};
use crate::stats::{is_deterministically_correlated, minimal_sufficient_statistic, DEFAULT_CI_TOL};

/// Vertices closer than this are merged.
const VERTEX_TOL: f64 = 1e-12;
/// Samples per edge for the Hausdorff distance.
const EDGE_SAMPLES: usize = 1000;

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Outer,
    InnerHull,
    ExactThm3,
    ExactThm4,
}

/// `{(r1, r2) >= 0 : r1 <= xy, r2 <= xz, r1 + r2 <= sum}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    pub xy: f64,
    pub xz: f64,
    pub sum: f64,
}

/// A convex region in the rate plane. Cap-form regions carry their caps;
/// hull regions carry vertices only. Vertices run counterclockwise from
/// `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub provenance: Provenance,
    pub caps: Option<Caps>,
    pub vertices: Vec<Point>,
}

impl RateRegion {
    pub fn from_caps(xy: f64, xz: f64, sum: f64, provenance: Provenance) -> Self {
        let (a, b, s) = (xy.max(0.0), xz.max(0.0), sum.max(0.0));
        let a1 = a.min(s);
        let b1 = b.min(s);
        let raw = [
            [0.0, 0.0],
            [a1, 0.0],
            [a1, b.min(s - a1)],
            [a.min(s - b1), b1],
            [0.0, b1],
        ];
        let mut vertices: Vec<Point> = Vec::with_capacity(5);
        for v in raw {
            if vertices.last().is_none_or(|l| dist(*l, v) > VERTEX_TOL) {
                vertices.push(v);
            }
        }
        while vertices.len() > 1 && dist(vertices[0], *vertices.last().unwrap()) <= VERTEX_TOL {
            vertices.pop();
        }
        RateRegion {
            provenance,
            caps: Some(Caps { xy: a, xz: b, sum: s }),
            vertices,
        }
    }

    pub fn from_hull(points: &[Point], provenance: Provenance) -> Result<Self> {
        Ok(RateRegion {
            provenance,
            caps: None,
            vertices: hull(points)?,
        })
    }

    /// Membership with slack `tol`: against the half-planes for cap-form
    /// regions, else against the hull edges.
    pub fn contains(&self, point: Point, tol: f64) -> bool {
        let [r1, r2] = point;
        if let Some(c) = self.caps {
            return r1 >= -tol
                && r2 >= -tol
                && r1 <= c.xy + tol
                && r2 <= c.xz + tol
                && r1 + r2 <= c.sum + tol;
        }
        polygon_distance(&self.vertices, point) <= tol
    }

    /// Shoelace area; zero for points and segments.
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        if v.len() < 3 {
            return 0.0;
        }
        let twice: f64 = (0..v.len())
            .map(|i| {
                let (p, q) = (v[i], v[(i + 1) % v.len()]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        twice.abs() / 2.0
    }

    /// True if every vertex of both regions lies within `tol` of a vertex of
    /// the other.
    pub fn same_vertices(&self, other: &RateRegion, tol: f64) -> bool {
        let covered = |a: &[Point], b: &[Point]| a.iter().all(|p| b.iter().any(|q| dist(*p, *q) <= tol));
        covered(&self.vertices, &other.vertices) && covered(&other.vertices, &self.vertices)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(a, p);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist([a[0] + t * d[0], a[1] + t * d[1]], p)
}

/// Distance from `p` to the filled convex polygon `v` (counterclockwise).
fn polygon_distance(v: &[Point], p: Point) -> f64 {
    match v.len() {
        0 => f64::INFINITY,
        1 => dist(v[0], p),
        2 => segment_distance(v[0], v[1], p),
        n => {
            let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| segment_distance(v[i], v[(i + 1) % n], p))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    // normalize -0.0
    r + 0.0
}

/// Convex hull by monotone chain on coordinates rounded to 12 decimals.
/// Collinear points are dropped; output is counterclockwise from the
/// lexicographically smallest point.
pub fn hull(points: &[Point]) -> Result<Vec<Point>> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("hull of no points".into()));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::DegenerateInput("non-finite point".into()));
    }
    let mut pts: Vec<Point> = points.iter().map(|p| [round12(p[0]), round12(p[1])]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return Ok(pts);
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(lower)
}

fn boundary_samples(v: &[Point]) -> Vec<Point> {
    if v.len() == 1 {
        return v.to_vec();
    }
    let edges = if v.len() == 2 { 1 } else { v.len() };
    let mut out = Vec::with_capacity(edges * EDGE_SAMPLES + 1);
    for i in 0..edges {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        for k in 0..=EDGE_SAMPLES {
            let t = k as f64 / EDGE_SAMPLES as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMetrics {
    /// area(outer) - area(inner)
    pub area_diff: f64,
    /// Hausdorff distance between the two filled regions, from dense
    /// samples of both boundaries.
    pub hausdorff: f64,
}

pub fn gap_metrics(inner: &RateRegion, outer: &RateRegion) -> GapMetrics {
    let directed = |a: &RateRegion, b: &RateRegion| {
        boundary_samples(&a.vertices)
            .into_iter()
            .map(|p| polygon_distance(&b.vertices, p))
            .fold(0.0, f64::max)
    };
    GapMetrics {
        area_diff: outer.area() - inner.area(),
        hausdorff: directed(inner, outer).max(directed(outer, inner)),
    }
}

/// Every named information quantity that enters the regions, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoQuantities {
    /// I(X ; Y | Z)
    pub i_x_y_given_z: f64,
    /// I(X ; Z | Y)
    pub i_x_z_given_y: f64,
    /// I(X ; Y, Z)
    pub i_x_yz: f64,
    /// I(U_mss(Y) ; X)
    pub i_umss_x: f64,
    /// I(V_mss(Z) ; X)
    pub i_vmss_x: f64,
    /// I(U_mcf ; X)
    pub i_umcf_x: f64,
    /// I(X ; Y | U_mss(Y), Z)
    pub i_x_y_given_umss_z: f64,
    /// I(X ; Z | V_mss(Z), Y)
    pub i_x_z_given_vmss_y: f64,
}

struct Parts {
    q: InfoQuantities,
    outer: RateRegion,
    inner: RateRegion,
}

fn parts(p: &JointPmf) -> Result<Parts> {
    let [x, y, z] = p.terminals()?;
    let (xg, yg, zg) = (VariableGroup::from(x), VariableGroup::from(y), VariableGroup::from(z));

    let i_x_y_given_z = p.cond_mutual_info(&xg, &yg, &zg)?;
    let i_x_z_given_y = p.cond_mutual_info(&xg, &zg, &yg)?;
    let i_x_yz = p.mutual_info(&xg, &[y, z].into())?;
    let (i_umcf_x, _) = max_aux_info_outer(p)?;

    let umss = minimal_sufficient_statistic(p, y, &zg)?;
    let u = p.fresh_name("U");
    let pu = p.attach_statistic(&umss, y, &u)?;
    let ug = VariableGroup::from(u.as_str());
    let i_umss_x = pu.mutual_info(&ug, &xg)?;
    let i_x_y_given_umss_z = pu.cond_mutual_info(&xg, &yg, &ug.union(&zg))?;

    let vmss = minimal_sufficient_statistic(p, z, &yg)?;
    let v = p.fresh_name("V");
    let pv = p.attach_statistic(&vmss, z, &v)?;
    let vg = VariableGroup::from(v.as_str());
    let i_vmss_x = pv.mutual_info(&vg, &xg)?;
    let i_x_z_given_vmss_y = pv.cond_mutual_info(&xg, &zg, &vg.union(&yg))?;

    let q = InfoQuantities {
        i_x_y_given_z,
        i_x_z_given_y,
        i_x_yz,
        i_umss_x,
        i_vmss_x,
        i_umcf_x,
        i_x_y_given_umss_z,
        i_x_z_given_vmss_y,
    };
    let outer = RateRegion::from_caps(i_x_y_given_z, i_x_z_given_y, i_x_yz - i_umcf_x, Provenance::Outer);
    let first = RateRegion::from_caps(i_x_y_given_umss_z, i_x_z_given_y, i_x_yz - i_umss_x, Provenance::InnerHull);
    let second = RateRegion::from_caps(i_x_y_given_z, i_x_z_given_vmss_y, i_x_yz - i_vmss_x, Provenance::InnerHull);
    let union: Vec<Point> = first.vertices.iter().chain(&second.vertices).copied().collect();
    let inner = RateRegion::from_hull(&union, Provenance::InnerHull)?;
    Ok(Parts { q, outer, inner })
}

/// Outer bound: caps I(X;Y|Z), I(X;Z|Y) and I(X;YZ) - I(U_mcf;X).
pub fn outer_region(p: &JointPmf) -> Result<RateRegion> {
    let [x, y, z] = p.terminals()?;
    let xg = VariableGroup::from(x);
    let a = p.cond_mutual_info(&xg, &y.into(), &z.into())?;
    let b = p.cond_mutual_info(&xg, &z.into(), &y.into())?;
    let (m, _) = max_aux_info_outer(p)?;
    let s = p.mutual_info(&xg, &[y, z].into())? - m;
    Ok(RateRegion::from_caps(a, b, s, Provenance::Outer))
}

/// Inner bound: convex hull of the two minimal-sufficient-statistic regions.
pub fn inner_region(p: &JointPmf) -> Result<RateRegion> {
    Ok(parts(p)?.inner)
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub ci_tol: f64,
    pub thm3: Thm3Options,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            ci_tol: DEFAULT_CI_TOL,
            thm3: Thm3Options::default(),
        }
    }
}

/// Everything computed for one source.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub quantities: InfoQuantities,
    pub outer: RateRegion,
    pub inner: RateRegion,
    pub exact: Option<RateRegion>,
    pub components: usize,
    pub thm4_holds: bool,
    pub det_residual: f64,
    pub thm3: SolverReport,
    pub thm3_feasible: bool,
    pub gap: GapMetrics,
}

fn exact_from(
    q: &InfoQuantities,
    outer: &RateRegion,
    thm4_holds: bool,
    thm3: &SolverReport,
) -> Option<RateRegion> {
    let (a, b) = (q.i_x_y_given_z, q.i_x_z_given_y);
    if thm4_holds {
        Some(RateRegion::from_caps(a, b, q.i_x_yz - q.i_umcf_x, Provenance::ExactThm4))
    } else if thm3.converged {
        // the sum cap can't exceed the outer one; a numeric maximum that
        // falls short would otherwise push the region outside the outer bound
        let outer_sum = outer.caps.map_or(f64::INFINITY, |c| c.sum);
        let s = (q.i_x_yz - thm3.value).min(outer_sum);
        Some(RateRegion::from_caps(a, b, s, Provenance::ExactThm3))
    } else {
        None
    }
}

/// Exact region when the deterministic-correlation test passes, else when
/// the constrained auxiliary search finds a feasible U, else `None`.
pub fn exact_region(p: &JointPmf, opts: &AnalysisOptions) -> Result<Option<RateRegion>> {
    Ok(analyze(p, opts)?.exact)
}

/// Full pipeline: quantities, all regions, tightness flags and gap metrics.
pub fn analyze(p: &JointPmf, opts: &AnalysisOptions) -> Result<RegionReport> {
    let [_, y, z] = p.terminals()?;
    let Parts { q, outer, inner } = parts(p)?;
    let det = is_deterministically_correlated(p, y, z, opts.ci_tol)?;
    let thm3 = max_aux_info_thm3(p, &opts.thm3)?;
    let exact = exact_from(&q, &outer, det.holds, &thm3);
    let gap = gap_metrics(&inner, &outer);
    Ok(RegionReport {
        quantities: q,
        components: det.common.components,
        thm4_holds: det.holds,
        det_residual: det.residual,
        thm3_feasible: thm3.converged,
        thm3,
        outer,
        inner,
        exact,
        gap,
    })
}
