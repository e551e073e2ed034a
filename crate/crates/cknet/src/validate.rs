//! Geometric verification: edge constraint, per-quad Gauss and mean
//! curvature, circularity through the quaternionic cross-ratio, polygon
//! planarity, and congruence up to rigid motion.

use crate::error::{Error, Result};
use crate::lattice::{fmt_float, QuadNet};
use crate::quat::{det3, Biquat, Vec3};
use crate::tol::{GEOM_TOL, SINGULAR_EPS};
use std::fmt::Write as _;

/// Relative edge-constraint residual of one edge:
/// `|(f_i - f) . (n_i + n)| / (|f_i - f| |n_i + n|)`.
///
/// Stays well conditioned for arbitrarily short edges: the coordinates of
/// collapsed nets are products, so the edge direction keeps full relative
/// precision. Only an edge of exactly zero length is unassessable.
fn edge_residual(f0: Vec3, f1: Vec3, n0: Vec3, n1: Vec3, at: (usize, usize)) -> Result<f64> {
    let e = f1 - f0;
    let len = e.norm();
    if len == 0.0 {
        return Err(Error::ZeroEdge(at.0, at.1));
    }
    let ns = n0 + n1;
    let nn = ns.norm();
    if nn < SINGULAR_EPS {
        // antipodal normals: the constraint is vacuous
        return Ok(0.0);
    }
    Ok(e.dot(ns).abs() / (len * nn))
}

/// Edge-constraint residuals over the whole net.
#[derive(Debug, Clone)]
pub struct EdgeResiduals {
    /// Residual per horizontal edge, (K-1) x L row major.
    pub horizontal: Vec<f64>,
    /// Residual per vertical edge, K x (L-1) row major.
    pub vertical: Vec<f64>,
    pub max: f64,
}

pub fn edge_constraint_residuals(net: &QuadNet) -> Result<EdgeResiduals> {
    let (kk, ll) = net.dims();
    let mut horizontal = Vec::with_capacity(kk.saturating_sub(1) * ll);
    let mut vertical = Vec::with_capacity(kk * ll.saturating_sub(1));
    let mut max = 0.0f64;
    for l in 0..ll {
        for k in 0..kk - 1 {
            let r = edge_residual(
                net.f(k, l),
                net.f(k + 1, l),
                net.n(k, l),
                net.n(k + 1, l),
                (k, l),
            )?;
            max = max.max(r);
            horizontal.push(r);
        }
    }
    for l in 0..ll - 1 {
        for k in 0..kk {
            let r = edge_residual(
                net.f(k, l),
                net.f(k, l + 1),
                net.n(k, l),
                net.n(k, l + 1),
                (k, l),
            )?;
            max = max.max(r);
            vertical.push(r);
        }
    }
    Ok(EdgeResiduals {
        horizontal,
        vertical,
        max,
    })
}

/// Unit face normal of the quad at (k, l): the normalized cross product of
/// the normal diagonals, falling back to the position diagonals when the
/// normal differences degenerate. Curvatures are invariant under its sign.
///
/// Collapsed quads (both diagonal pairs nearly parallel) keep the larger of
/// the two candidates: the curvature ratio degenerates in numerator and
/// denominator together, so the value stays meaningful far below the
/// nominal threshold.
pub fn face_normal(net: &QuadNet, k: usize, l: usize) -> Result<Vec3> {
    let dn1 = net.n(k + 1, l + 1) - net.n(k, l);
    let dn2 = net.n(k, l + 1) - net.n(k + 1, l);
    let cn = dn1.cross(dn2);
    if let Some(n) = cn.normalized(1e-12) {
        return Ok(n);
    }
    let df1 = net.f(k + 1, l + 1) - net.f(k, l);
    let df2 = net.f(k, l + 1) - net.f(k + 1, l);
    let cf = df1.cross(df2);
    if let Some(n) = cf.normalized(1e-12) {
        return Ok(n);
    }
    let best = if cn.norm() >= cf.norm() { cn } else { cf };
    best.normalized(1e-280)
        .ok_or_else(|| Error::DegenerateQuad(format!("no face normal at ({k},{l})")))
}

/// Gauss curvature of the quad at (k, l):
/// `det(n12-n, n2-n1, N) / det(f12-f, f2-f1, N)`.
pub fn gauss_curvature(net: &QuadNet, k: usize, l: usize) -> Result<f64> {
    let nrm = face_normal(net, k, l)?;
    let dn1 = net.n(k + 1, l + 1) - net.n(k, l);
    let dn2 = net.n(k, l + 1) - net.n(k + 1, l);
    let df1 = net.f(k + 1, l + 1) - net.f(k, l);
    let df2 = net.f(k, l + 1) - net.f(k + 1, l);
    let den = det3(df1, df2, nrm);
    if den == 0.0 {
        return Err(Error::DegenerateQuad(format!(
            "vanishing projected area at ({k},{l})"
        )));
    }
    Ok(det3(dn1, dn2, nrm) / den)
}

/// Mean curvature of the quad at (k, l):
/// `(det(f12-f, n2-n1, N) + det(n12-n, f2-f1, N)) / (2 det(f12-f, f2-f1, N))`.
/// The sign depends on the face-normal rule; report magnitudes across nets.
pub fn mean_curvature(net: &QuadNet, k: usize, l: usize) -> Result<f64> {
    let nrm = face_normal(net, k, l)?;
    let dn1 = net.n(k + 1, l + 1) - net.n(k, l);
    let dn2 = net.n(k, l + 1) - net.n(k + 1, l);
    let df1 = net.f(k + 1, l + 1) - net.f(k, l);
    let df2 = net.f(k, l + 1) - net.f(k + 1, l);
    let den = det3(df1, df2, nrm);
    if den == 0.0 {
        return Err(Error::DegenerateQuad(format!(
            "vanishing projected area at ({k},{l})"
        )));
    }
    Ok(0.5 * (det3(df1, dn2, nrm) + det3(dn1, df2, nrm)) / den)
}

/// Relative imaginary part of the quaternionic cross-ratio
/// `(A-B)(B-C)^-1 (C-D)(D-A)^-1` over the cyclically ordered vertices;
/// the quad is concircular iff this vanishes.
pub fn circularity(net: &QuadNet, k: usize, l: usize) -> Result<f64> {
    let a = net.f(k, l);
    let b = net.f(k + 1, l);
    let c = net.f(k + 1, l + 1);
    let d = net.f(k, l + 1);
    let emb = Biquat::from_vec3;
    let inv = |v: Vec3| -> Result<Biquat> {
        if v.norm() < SINGULAR_EPS {
            return Err(Error::CoincidentVertices(k, l));
        }
        emb(v).inverse()
    };
    let q = emb(a - b) * inv(b - c)? * emb(c - d) * inv(d - a)?;
    let vector = (q.c1.norm().powi(2) + q.c2.norm().powi(2) + q.c3.norm().powi(2)).sqrt();
    let total = (vector * vector + q.c0.norm().powi(2)).sqrt();
    if total < SINGULAR_EPS {
        return Err(Error::CoincidentVertices(k, l));
    }
    Ok(vector / total)
}

/// Real part of the cross-ratio (useful as a fixture: a square gives -1).
pub fn cross_ratio_real(net: &QuadNet, k: usize, l: usize) -> Result<f64> {
    let a = net.f(k, l);
    let b = net.f(k + 1, l);
    let c = net.f(k + 1, l + 1);
    let d = net.f(k, l + 1);
    let emb = Biquat::from_vec3;
    let inv = |v: Vec3| -> Result<Biquat> {
        if v.norm() < SINGULAR_EPS {
            return Err(Error::CoincidentVertices(k, l));
        }
        emb(v).inverse()
    };
    let q = emb(a - b) * inv(b - c)? * emb(c - d) * inv(d - a)?;
    Ok(q.c0.re)
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi
/// rotations; returns (eigenvalues, eigenvector columns).
fn jacobi_sym3(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for r in 0..3 {
                let (arp, arq) = (a[r][p], a[r][q]);
                a[r][p] = c * arp - s * arq;
                a[r][q] = s * arp + c * arq;
            }
            for cc in 0..3 {
                let (apc, aqc) = (a[p][cc], a[q][cc]);
                a[p][cc] = c * apc - s * aqc;
                a[q][cc] = s * apc + c * aqc;
            }
            for r in 0..3 {
                let (vrp, vrq) = (v[r][p], v[r][q]);
                v[r][p] = c * vrp - s * vrq;
                v[r][q] = s * vrp + c * vrq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Which lattice direction a coordinate polygon runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Varying k at fixed l.
    First,
    /// Varying l at fixed k.
    Second,
}

/// Max distance of the vertices of one coordinate polygon to their
/// best-fit plane (smallest principal direction of the centered points).
pub fn polygon_planarity(net: &QuadNet, direction: Direction, index: usize) -> Result<f64> {
    let (kk, ll) = net.dims();
    let pts: Vec<Vec3> = match direction {
        Direction::First => (0..kk).map(|k| net.f(k, index)).collect(),
        Direction::Second => (0..ll).map(|l| net.f(index, l)).collect(),
    };
    let m = pts.len() as f64;
    let centroid = pts.iter().fold(Vec3::ZERO, |a, &p| a + p) * (1.0 / m);
    let mut cov = [[0.0f64; 3]; 3];
    for p in &pts {
        let q = *p - centroid;
        let arr = [q.x, q.y, q.z];
        for r in 0..3 {
            for c in 0..3 {
                cov[r][c] += arr[r] * arr[c];
            }
        }
    }
    let (vals, vecs) = jacobi_sym3(cov);
    let mut imin = 0;
    for i in 1..3 {
        if vals[i] < vals[imin] {
            imin = i;
        }
    }
    let normal = Vec3::new(vecs[0][imin], vecs[1][imin], vecs[2][imin]);
    Ok(pts
        .iter()
        .map(|p| (*p - centroid).dot(normal).abs())
        .fold(0.0f64, f64::max))
}

/// Combined per-quad report.
#[derive(Debug, Clone)]
pub struct QuadReport {
    pub k: f64,
    pub h: f64,
    pub face_normal: Vec3,
    pub cross_ratio_im: f64,
    /// Best-fit-plane residual of the four vertices.
    pub planarity: f64,
    pub edge_constraint_max: f64,
}

pub fn quad_report(net: &QuadNet, k: usize, l: usize) -> Result<QuadReport> {
    let vertices = [
        net.f(k, l),
        net.f(k + 1, l),
        net.f(k + 1, l + 1),
        net.f(k, l + 1),
    ];
    let centroid = vertices.iter().fold(Vec3::ZERO, |a, &p| a + p) * 0.25;
    let mut cov = [[0.0f64; 3]; 3];
    for p in &vertices {
        let q = *p - centroid;
        let arr = [q.x, q.y, q.z];
        for r in 0..3 {
            for c in 0..3 {
                cov[r][c] += arr[r] * arr[c];
            }
        }
    }
    let (vals, vecs) = jacobi_sym3(cov);
    let mut imin = 0;
    for i in 1..3 {
        if vals[i] < vals[imin] {
            imin = i;
        }
    }
    let pn = Vec3::new(vecs[0][imin], vecs[1][imin], vecs[2][imin]);
    let planarity = vertices
        .iter()
        .map(|p| (*p - centroid).dot(pn).abs())
        .fold(0.0f64, f64::max);
    let edges = [
        edge_residual(
            net.f(k, l),
            net.f(k + 1, l),
            net.n(k, l),
            net.n(k + 1, l),
            (k, l),
        )?,
        edge_residual(
            net.f(k + 1, l),
            net.f(k + 1, l + 1),
            net.n(k + 1, l),
            net.n(k + 1, l + 1),
            (k, l),
        )?,
        edge_residual(
            net.f(k, l + 1),
            net.f(k + 1, l + 1),
            net.n(k, l + 1),
            net.n(k + 1, l + 1),
            (k, l),
        )?,
        edge_residual(
            net.f(k, l),
            net.f(k, l + 1),
            net.n(k, l),
            net.n(k, l + 1),
            (k, l),
        )?,
    ];
    Ok(QuadReport {
        k: gauss_curvature(net, k, l)?,
        h: mean_curvature(net, k, l)?,
        face_normal: face_normal(net, k, l)?,
        cross_ratio_im: circularity(net, k, l)?,
        planarity,
        edge_constraint_max: edges.iter().fold(0.0f64, |a, &b| a.max(b)),
    })
}

/// Proper rigid motion `v -> r v + t`.
#[derive(Debug, Clone)]
pub struct RigidMotion {
    pub r: [[f64; 3]; 3],
    pub t: Vec3,
}

impl RigidMotion {
    pub fn apply_point(&self, v: Vec3) -> Vec3 {
        self.apply_vector(v) + self.t
    }

    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.r[0][0] * v.x + self.r[0][1] * v.y + self.r[0][2] * v.z,
            self.r[1][0] * v.x + self.r[1][1] * v.y + self.r[1][2] * v.z,
            self.r[2][0] * v.x + self.r[2][1] * v.y + self.r[2][2] * v.z,
        )
    }
}

fn corner_frame(net: &QuadNet) -> Result<[Vec3; 3]> {
    let (kk, ll) = net.dims();
    if kk < 2 || ll < 2 {
        return Err(Error::DegenerateFrame("window smaller than 2x2"));
    }
    let u = net.f(1, 0) - net.f(0, 0);
    let v = net.f(0, 1) - net.f(0, 0);
    let e1 = u
        .normalized(SINGULAR_EPS)
        .ok_or(Error::DegenerateFrame("vanishing first tangent"))?;
    let e2 = (v - e1 * v.dot(e1))
        .normalized(1e-10)
        .ok_or(Error::DegenerateFrame("parallel lattice tangents"))?;
    Ok([e1, e2, e1.cross(e2)])
}

/// Best rigid motion taking `a` onto `b`, computed from the corner frames,
/// and the max pointwise residual after applying it.
pub fn congruence(a: &QuadNet, b: &QuadNet) -> Result<(RigidMotion, f64)> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.dims().0,
            a.dims().1,
            b.dims().0,
            b.dims().1
        )));
    }
    let fa = corner_frame(a)?;
    let fb = corner_frame(b)?;
    // r = F_b F_a^T maps frame a onto frame b
    let mut r = [[0.0f64; 3]; 3];
    for (col, (ea, eb)) in fa.iter().zip(fb.iter()).enumerate() {
        let _ = col;
        let ea = [ea.x, ea.y, ea.z];
        let eb = [eb.x, eb.y, eb.z];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += eb[i] * ea[j];
            }
        }
    }
    let mut motion = RigidMotion { r, t: Vec3::ZERO };
    motion.t = b.f(0, 0) - motion.apply_vector(a.f(0, 0));
    let (kk, ll) = a.dims();
    let mut worst = 0.0f64;
    for l in 0..ll {
        for k in 0..kk {
            worst = worst.max((motion.apply_point(a.f(k, l)) - b.f(k, l)).norm());
        }
    }
    Ok((motion, worst))
}

/// Pointwise normal residual after applying a fitted motion.
pub fn normal_residual(a: &QuadNet, b: &QuadNet, motion: &RigidMotion) -> f64 {
    let (kk, ll) = a.dims();
    let mut worst = 0.0f64;
    for l in 0..ll {
        for k in 0..kk {
            worst = worst.max((motion.apply_vector(a.n(k, l)) - b.n(k, l)).norm());
        }
    }
    worst
}

/// Named checks for report generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    EdgeConstraint,
    /// Gauss curvature defect |K + 1| per quad.
    Curvature,
    /// Relative imaginary part of the cross-ratio per quad.
    Circularity,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::EdgeConstraint => "edge-constraint",
            Check::Curvature => "curvature",
            Check::Circularity => "circularity",
        }
    }

    pub fn parse(name: &str) -> Result<Check> {
        match name {
            "edge-constraint" => Ok(Check::EdgeConstraint),
            "curvature" => Ok(Check::Curvature),
            "circularity" => Ok(Check::Circularity),
            other => Err(Error::UnknownParameter(format!("unknown check '{other}'"))),
        }
    }
}

/// Result of one named check over a net.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub max_residual: f64,
    pub failing: Vec<(usize, usize)>,
    pub pass: bool,
}

/// Aggregated validation report; serializes deterministically.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub tol: f64,
    pub checks: Vec<CheckReport>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"tol\":{},\"pass\":{},\"checks\":[",
            fmt_float(self.tol),
            self.pass()
        );
        for (i, c) in self.checks.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "{{\"name\":\"{}\",\"max_residual\":{},\"pass\":{},\"failing\":[",
                c.name,
                fmt_float(c.max_residual),
                c.pass
            );
            for (j, (k, l)) in c.failing.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "[{},{}]", k, l);
            }
            out.push_str("]}");
        }
        out.push_str("]}\n");
        out
    }
}

/// Run the named checks against `tol` (defaults to [`GEOM_TOL`]).
pub fn net_report(net: &QuadNet, checks: &[Check], tol: Option<f64>) -> Result<ValidationReport> {
    let tol = tol.unwrap_or(GEOM_TOL);
    let (kk, ll) = net.dims();
    let mut out = Vec::new();
    for &check in checks {
        let mut failing = Vec::new();
        let mut max_residual = 0.0f64;
        match check {
            Check::EdgeConstraint => {
                let res = edge_constraint_residuals(net)?;
                max_residual = res.max;
                for l in 0..ll {
                    for k in 0..kk - 1 {
                        if res.horizontal[l * (kk - 1) + k] > tol {
                            failing.push((k, l));
                        }
                    }
                }
                for l in 0..ll - 1 {
                    for k in 0..kk {
                        if res.vertical[l * kk + k] > tol {
                            failing.push((k, l));
                        }
                    }
                }
            }
            Check::Curvature => {
                for l in 0..ll - 1 {
                    for k in 0..kk - 1 {
                        let defect = (gauss_curvature(net, k, l)? + 1.0).abs();
                        max_residual = max_residual.max(defect);
                        // NaN counts as failing
                        if defect.is_nan() || defect > tol {
                            failing.push((k, l));
                        }
                    }
                }
            }
            Check::Circularity => {
                for l in 0..ll - 1 {
                    for k in 0..kk - 1 {
                        let im = circularity(net, k, l)?;
                        max_residual = max_residual.max(im);
                        if im > tol {
                            failing.push((k, l));
                        }
                    }
                }
            }
        }
        let pass = failing.is_empty();
        out.push(CheckReport {
            name: check.name(),
            max_residual,
            failing,
            pass,
        });
    }
    Ok(ValidationReport { tol, checks: out })
}
