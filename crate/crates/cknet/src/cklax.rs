//! cK-net transition matrices, their compatibility evolution, frame
//! integration, and reconstruction of transition data from a single
//! circular quad.
//!
//! The L matrix for a direction-1 edge reads
//!
//! ```text
//! L = [ cot(d1/2) l/s + tan(d1/2) l s1     i (lam - s s1 / lam)        ]
//!     [ i (lam - 1/(lam s s1))             cot(d1/2) s/l + tan(d1/2)/(l s1) ]
//! ```
//!
//! with unit vertex variables `s`, edge variable `l`, and `lam = e^t`; the
//! direction-2 matrix M has the same shape with (m, s2, d2). Its determinant
//! is `lam^2 + 1/lam^2 + tan^2(d1/2) + cot^2(d1/2)` independent of the field,
//! so compatibility `M1 L = L2 M` forces `delta1 = delta1(k)` and
//! `delta2 = delta2(l)`. Frames integrate exactly as in [`crate::knet`].
//!
//! A diagonal gauge `G = diag(sqrt(s), 1/sqrt(s))` would move the vertex
//! variables onto the edges (`sqrt(s_i s)` as the new edge quantities); we
//! keep the mixed vertex/edge form, which matches the evolution formulas
//! and the transform machinery directly.

use crate::error::{Error, Result};
use crate::lattice::{CknetLaxField, FrameState, QuadNet};
use crate::quat::{unitize_step, Biquat, Vec3};
use crate::tol::{ANGLE_OVERFLOW, DEFAULT_TOL, SINGULAR_EPS, TIGHT_TOL};
use num_complex::Complex64 as C64;

/// A cK transition matrix with its analytic t-derivative and determinant.
#[derive(Debug, Clone, Copy)]
pub struct CkLaxEval {
    pub m: Biquat,
    pub dm: Biquat,
    pub det: C64,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn half_tan(delta: C64) -> Result<C64> {
    let t = (delta * 0.5).tan();
    let n = t.norm();
    if !n.is_finite() || !(1.0 / ANGLE_OVERFLOW..=ANGLE_OVERFLOW).contains(&n) {
        return Err(Error::DegenerateAngle(delta.re));
    }
    Ok(t)
}

/// L built from the half-angle tangent directly (`t1 = tan(delta1/2)`).
pub fn lax_l_tan(s: C64, s1: C64, l: C64, t1: C64, t: f64) -> Result<CkLaxEval> {
    let n = t1.norm();
    if !n.is_finite() || !(1.0 / ANGLE_OVERFLOW..=ANGLE_OVERFLOW).contains(&n) {
        return Err(Error::DegenerateAngle(0.0));
    }
    if l.norm() < SINGULAR_EPS || s.norm() < SINGULAR_EPS || s1.norm() < SINGULAR_EPS {
        return Err(Error::DegenerateEvolution("lax matrix entries"));
    }
    let lam = C64::new(t.exp(), 0.0);
    let cot = t1.inv();
    let i = C64::i();
    let a = cot * l / s + t1 * l * s1;
    let d = cot * s / l + t1 / (l * s1);
    let b = i * (lam - s * s1 / lam);
    let c = i * (lam - (lam * s * s1).inv());
    let m = Biquat::from_matrix([[a, b], [c, d]]);
    let db = i * (lam + s * s1 / lam);
    let dc = i * (lam + (lam * s * s1).inv());
    let dm = Biquat::from_matrix([[C64::ZERO, db], [dc, C64::ZERO]]);
    let det = lam * lam + (lam * lam).inv() + t1 * t1 + (t1 * t1).inv();
    Ok(CkLaxEval { m, dm, det })
}

/// Direction-1 transition for edge variable `l` between `s` and `s1`.
pub fn lax_l(s: C64, s1: C64, l: C64, delta1: C64, t: f64) -> Result<CkLaxEval> {
    lax_l_tan(s, s1, l, half_tan(delta1)?, t)
}

/// Direction-2 transition; same form with `(m, s2, delta2)`.
pub fn lax_m(s: C64, s2: C64, m: C64, delta2: C64, t: f64) -> Result<CkLaxEval> {
    lax_l_tan(s, s2, m, half_tan(delta2)?, t)
}

/// Modulus of the edge variable that keeps the transition quaternionic:
///
/// `sqrt[(cos(rho_i - a) + cos(rho - a)) / (cos(rho_i + a) + cos(rho + a))]`
///
/// with `a = arg tan(delta_i / 2)` and `s = e^{i rho}`. Equals 1 whenever
/// the half-angle tangent is real.
pub fn ell_length(rho: f64, rho_i: f64, delta_i: C64) -> Result<f64> {
    let a = (delta_i * 0.5).tan().arg();
    let num = (rho_i - a).cos() + (rho - a).cos();
    let den = (rho_i + a).cos() + (rho + a).cos();
    if den.abs() < SINGULAR_EPS {
        return Err(Error::DegenerateEvolution("edge-length denominator"));
    }
    let rad = num / den;
    if rad < 0.0 {
        return Err(Error::NegativeRadicand(rad));
    }
    Ok(rad.sqrt())
}

/// One quad of the compatibility evolution with half-angle tangents given
/// directly. Returns `(l2, m1, s12)`.
pub fn evolve_quad_tan(
    s: C64,
    s1: C64,
    s2: C64,
    l: C64,
    m: C64,
    t1: C64,
    t2: C64,
) -> Result<(C64, C64, C64)> {
    let guard = |num: C64, den: C64, which: &'static str| -> Result<C64> {
        if den.norm() < 1e-12 * (1.0 + num.norm()) {
            return Err(Error::DegenerateEvolution(which));
        }
        Ok(num / den)
    };
    let t1s = t1 * t1;
    let t2s = t2 * t2;
    let ss1 = s * s1;
    let ss2 = s * s2;

    let l2 = guard(
        -m * t2 * (ss2 + t1s) + l * t1 * (ss2 + t2s),
        m * (-l * t2 * (one() + ss2 * t1s) + m * (t1 + ss2 * t1 * t2s)),
        "l2",
    )?;
    let m1 = guard(
        m * t2 * (ss1 + t1s) - l * t1 * (ss1 + t2s),
        l * (l * t2 * (one() + ss1 * t1s) - m * (t1 + ss1 * t1 * t2s)),
        "m1",
    )?;
    let sp = l * l * t1 * t2 * (one() + ss1 * t1s) * (ss2 + t2s)
        + m * m * t1 * t2 * (ss1 + t1s) * (one() + ss2 * t2s);
    let sm1 = l
        * m
        * (ss1 * t1s
            + t2s * (2.0 * t1s + ss2 * (one() + 2.0 * ss1 * t1s + t1s * t1s))
            + ss1 * t1s * t2s * t2s);
    let sm2 = l
        * m
        * (ss2 * t1s
            + t2s * (2.0 * t1s + ss1 * (one() + 2.0 * ss2 * t1s + t1s * t1s))
            + ss2 * t1s * t2s * t2s);
    let s12 = guard(s * (sp - sm1), sp - sm2, "s12")?;
    Ok((l2, m1, s12))
}

/// One quad of the compatibility evolution in terms of the angles.
pub fn evolve_quad(
    s: C64,
    s1: C64,
    s2: C64,
    l: C64,
    m: C64,
    delta1: C64,
    delta2: C64,
) -> Result<(C64, C64, C64)> {
    evolve_quad_tan(s, s1, s2, l, m, half_tan(delta1)?, half_tan(delta2)?)
}

/// Entrywise magnitude of `M1 L - L2 M` at `lambda = e^t`.
#[allow(clippy::too_many_arguments)]
pub fn compatibility_residual(
    s: C64,
    s1: C64,
    s2: C64,
    l: C64,
    m: C64,
    l2: C64,
    m1: C64,
    s12: C64,
    delta1: C64,
    delta2: C64,
    t: f64,
) -> Result<f64> {
    let lm = lax_l(s, s1, l, delta1, t)?.m;
    let mm = lax_m(s, s2, m, delta2, t)?.m;
    let m1m = lax_m(s1, s12, m1, delta2, t)?.m;
    let l2m = lax_l(s2, s12, l2, delta1, t)?.m;
    Ok(((m1m * lm) - (l2m * mm)).max_abs())
}

impl CknetLaxField {
    /// The degenerate straight-line field: `s = l = m = (-1)^l`.
    pub fn straight_line(dims: (usize, usize), delta1: f64, delta2: f64) -> CknetLaxField {
        let mut field = CknetLaxField::zeroed(dims);
        let sign = |l: usize| {
            if l % 2 == 0 {
                one()
            } else {
                -one()
            }
        };
        for l in 0..dims.1 {
            for k in 0..dims.0 {
                field.s[l * dims.0 + k] = sign(l);
                if k < dims.0 - 1 {
                    field.l[l * (dims.0 - 1) + k] = sign(l);
                }
                if l < dims.1 - 1 {
                    field.m[l * dims.0 + k] = sign(l);
                }
            }
        }
        field.delta1 = vec![C64::new(delta1, 0.0); dims.0 - 1];
        field.delta2 = vec![C64::new(delta2, 0.0); dims.1 - 1];
        field
    }

    /// Fill the interior from Cauchy data: `s` on row 0 and column 0,
    /// `l` on row 0, `m` on column 0.
    pub fn from_cauchy(
        s_row0: &[C64],
        s_col0: &[C64],
        l_row0: &[C64],
        m_col0: &[C64],
        delta1: Vec<C64>,
        delta2: Vec<C64>,
    ) -> Result<CknetLaxField> {
        let kk = s_row0.len();
        let ll = s_col0.len();
        if kk < 2 || ll < 2 {
            return Err(Error::DimensionMismatch(
                "window must be at least 2x2".into(),
            ));
        }
        if (s_row0[0] - s_col0[0]).norm() > TIGHT_TOL {
            return Err(Error::DimensionMismatch(
                "Cauchy rows must share the corner value".into(),
            ));
        }
        if l_row0.len() != kk - 1 || m_col0.len() != ll - 1 {
            return Err(Error::DimensionMismatch("edge Cauchy data sizes".into()));
        }
        let mut field = CknetLaxField::zeroed((kk, ll));
        field.delta1 = delta1;
        field.delta2 = delta2;
        field.s[..kk].copy_from_slice(s_row0);
        for (l, &s) in s_col0.iter().enumerate() {
            let i = field.sidx(0, l);
            field.s[i] = s;
        }
        field.l[..kk - 1].copy_from_slice(l_row0);
        for (l, &m) in m_col0.iter().enumerate() {
            let i = field.midx(0, l);
            field.m[i] = m;
        }
        for l in 0..ll - 1 {
            for k in 0..kk - 1 {
                let t1 = half_tan(field.delta1[k])?;
                let t2 = half_tan(field.delta2[l])?;
                let (l2, m1, s12) = evolve_quad_tan(
                    field.s_at(k, l),
                    field.s_at(k + 1, l),
                    field.s_at(k, l + 1),
                    field.l_at(k, l),
                    field.m_at(k, l),
                    t1,
                    t2,
                )?;
                let i = field.lidx(k, l + 1);
                field.l[i] = l2;
                let i = field.midx(k + 1, l);
                field.m[i] = m1;
                let i = field.sidx(k + 1, l + 1);
                field.s[i] = s12;
            }
        }
        field.check_invariants()?;
        Ok(field)
    }
}

/// Propagate the frame pair over a cK Lax field and extract the net.
///
/// Seeds `phi(0,0) = 1`; sweeps along k at l = 0, then along l per column.
/// Every quad is residual-checked at the integration parameter first.
pub fn integrate(field: &CknetLaxField, t: f64) -> Result<(FrameState, QuadNet)> {
    field.check_invariants()?;
    let (kk, ll) = field.dims;

    let l_at = |k: usize, l: usize| -> Result<CkLaxEval> {
        lax_l(
            field.s_at(k, l),
            field.s_at(k + 1, l),
            field.l_at(k, l),
            field.delta1[k],
            t,
        )
    };
    let m_at = |k: usize, l: usize| -> Result<CkLaxEval> {
        lax_m(
            field.s_at(k, l),
            field.s_at(k, l + 1),
            field.m_at(k, l),
            field.delta2[l],
            t,
        )
    };

    for l in 0..ll - 1 {
        for k in 0..kk - 1 {
            let residual = ((m_at(k + 1, l)?.m * l_at(k, l)?.m)
                - (l_at(k, l + 1)?.m * m_at(k, l)?.m))
                .max_abs();
            if residual > DEFAULT_TOL {
                return Err(Error::IncompatibleField { k, l, residual });
            }
        }
    }

    let mut frame = FrameState::identity_seed((kk, ll), t);
    for k in 0..kk - 1 {
        let step = l_at(k, 0)?;
        let (mn, dmn) = unitize_step(step.m, step.dm)?;
        let i0 = frame.idx(k, 0);
        let i1 = frame.idx(k + 1, 0);
        frame.phi[i1] = mn * frame.phi[i0];
        frame.phi_dot[i1] = dmn * frame.phi[i0] + mn * frame.phi_dot[i0];
    }
    for k in 0..kk {
        for l in 0..ll - 1 {
            let step = m_at(k, l)?;
            let (mn, dmn) = unitize_step(step.m, step.dm)?;
            let i0 = frame.idx(k, l);
            let i1 = frame.idx(k, l + 1);
            frame.phi[i1] = mn * frame.phi[i0];
            frame.phi_dot[i1] = dmn * frame.phi[i0] + mn * frame.phi_dot[i0];
        }
    }

    let net = crate::knet::net_from_frame(&frame)?;
    Ok((frame, net))
}

/// Canonical description of a circular quad: three vertices on the
/// circumcircle plus the normal at the corner, expressed in the circle's
/// own frame.
#[derive(Debug, Clone)]
pub struct CircularQuadData {
    /// Circumradius.
    pub r: f64,
    /// Vertex angles on the circle; `phi` is the corner and is zero by
    /// construction of the frame.
    pub phi: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Spherical angles of the corner normal in the circle frame.
    pub alpha: f64,
    pub beta: f64,
    /// Edge lengths corner->f1 and corner->f2.
    pub d1: f64,
    pub d2: f64,
    /// Cosine of the angle each edge makes with the corner normal.
    pub cos_phi_edge1: f64,
    pub cos_phi_edge2: f64,
    origin: Vec3,
    e1: Vec3,
    e2: Vec3,
    e3: Vec3,
    f: Vec3,
    f1: Vec3,
    f2: Vec3,
    n: Vec3,
}

impl CircularQuadData {
    /// Build the canonical data from the corner `f`, its two neighbours,
    /// and the unit normal at the corner.
    pub fn from_points(f: Vec3, f1: Vec3, f2: Vec3, n: Vec3) -> Result<CircularQuadData> {
        let a = f1 - f;
        let b = f2 - f;
        let w = a.cross(b);
        let wn = w.normalized(SINGULAR_EPS).ok_or(Error::DegenerateQuad(
            "collinear or coincident vertices".into(),
        ))?;
        // circumcenter: O = f + x a + y b with equal distances
        let (aa, bb, ab) = (a.dot(a), b.dot(b), a.dot(b));
        let det = aa * bb - ab * ab;
        if det.abs() < SINGULAR_EPS {
            return Err(Error::DegenerateQuad("collinear vertices".into()));
        }
        let x = (aa / 2.0 * bb - bb / 2.0 * ab) / det;
        let y = (bb / 2.0 * aa - aa / 2.0 * ab) / det;
        let origin = f + a * x + b * y;
        let r = (f - origin).norm();
        let e1 = (f - origin) * (1.0 / r);
        let e3 = wn;
        let e2 = e3.cross(e1);
        let ang = |p: Vec3| -> f64 {
            let q = p - origin;
            q.dot(e2).atan2(q.dot(e1))
        };
        let alpha = n.dot(e3).acos();
        let beta = n.dot(e2).atan2(n.dot(e1));
        let d1 = (f1 - f).norm();
        let d2 = (f2 - f).norm();
        if d1 < SINGULAR_EPS || d2 < SINGULAR_EPS {
            return Err(Error::DegenerateQuad("vanishing edge".into()));
        }
        Ok(CircularQuadData {
            r,
            phi: 0.0,
            phi1: ang(f1),
            phi2: ang(f2),
            alpha,
            beta,
            d1,
            d2,
            cos_phi_edge1: (f1 - f).dot(n) / d1,
            cos_phi_edge2: (f2 - f).dot(n) / d2,
            origin,
            e1,
            e2,
            e3,
            f,
            f1,
            f2,
            n,
        })
    }

    /// As [`CircularQuadData::from_points`], additionally checking that the
    /// supplied fourth vertex lies on the same circle.
    pub fn from_quad(f: Vec3, f1: Vec3, f12: Vec3, f2: Vec3, n: Vec3) -> Result<CircularQuadData> {
        let data = CircularQuadData::from_points(f, f1, f2, n)?;
        let radial = ((f12 - data.origin).norm() - data.r).abs();
        let planar = (f12 - data.origin).dot(data.e3).abs();
        let dev = radial.max(planar);
        if dev > DEFAULT_TOL * (1.0 + data.r) {
            return Err(Error::NonConcircular(dev));
        }
        Ok(data)
    }

    fn to_world(&self, z: C64) -> Vec3 {
        self.origin + self.e1 * z.re + self.e2 * z.im
    }
}

/// Transition data recovered from one circular quad, plus the derived
/// fourth vertex and parallel normals.
#[derive(Debug, Clone)]
pub struct CkFit {
    pub delta1: C64,
    pub delta2: C64,
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub l: C64,
    pub m: C64,
    pub f12: Vec3,
    pub n1: Vec3,
    pub n2: Vec3,
    pub n12: Vec3,
}

impl CkFit {
    /// Assemble the 2x2 Lax field that reproduces the fitted quad.
    pub fn to_field(&self) -> Result<CknetLaxField> {
        CknetLaxField::from_cauchy(
            &[
                C64::from_polar(1.0, self.rho),
                C64::from_polar(1.0, self.rho1),
            ],
            &[
                C64::from_polar(1.0, self.rho),
                C64::from_polar(1.0, self.rho2),
            ],
            &[self.l],
            &[self.m],
            vec![self.delta1],
            vec![self.delta2],
        )
    }
}

fn reflect_across(v: Vec3, dir: Vec3) -> Vec3 {
    v - dir * (2.0 * v.dot(dir))
}

/// Sym edge of a single L-step out of the identity frame at `lambda = 1`.
fn sym_edge(rho: f64, rho_i: f64, delta: C64, l: C64) -> Result<Vec3> {
    let s = C64::from_polar(1.0, rho);
    let si = C64::from_polar(1.0, rho_i);
    let eval = lax_l(s, si, l, delta, 0.0)?;
    let inv = eval.m.inverse()?;
    Ok((inv * eval.dm).trace_free_tol(1e-6)? * 2.0)
}

/// Recover transition data from one circular quad with `K = -1`.
///
/// The fourth vertex comes from the closed-form solve of the curvature
/// condition; normals at the remaining vertices are parallel transports
/// (reflections) of the corner normal. Per edge, `sin^2(delta) =
/// d^2/4 + cos^2(phi_edge)` fixes the angle, the corner phase `s_init`
/// fixes the neighbour phase through an arcsine whose branch is selected
/// by reproducing the edge, and the edge-variable argument is the
/// azimuth that rotates the Sym edge onto the target edge about the
/// corner normal.
pub fn fit_quad(data: &CircularQuadData, s_init: C64) -> Result<CkFit> {
    let sin_a2 = 1.0 - data.n.dot(data.e3).powi(2);
    if sin_a2 < 1e-12 {
        return Err(Error::DegenerateQuad(
            "normal parallel to the circle axis: curvature cannot reach -1".into(),
        ));
    }
    // fourth vertex (corner angle is zero in the canonical frame)
    let i = C64::i();
    let r2 = C64::new(data.r * data.r, 0.0);
    let z12 = C64::from_polar(data.r, data.phi1 + data.phi2)
        * (r2 + sin_a2 * (i * (-2.0) * data.beta).exp())
        / (r2 + sin_a2 * (i * 2.0 * data.beta).exp());
    let f12 = data.to_world(z12);

    // parallel normals by reflection along the edges
    let u1 = (data.f1 - data.f) * (1.0 / data.d1);
    let u2 = (data.f2 - data.f) * (1.0 / data.d2);
    let n1 = reflect_across(data.n, u1);
    let n2 = reflect_across(data.n, u2);
    let e112 = f12 - data.f1;
    let d112 = e112.norm();
    if d112 < SINGULAR_EPS {
        return Err(Error::DegenerateQuad(
            "vanishing edge to fourth vertex".into(),
        ));
    }
    let n12 = reflect_across(n1, e112 * (1.0 / d112));

    let rho = s_init.arg();

    // canonical target frame: corner at the origin, normal along z,
    // azimuth reference along edge 1
    let nrm = data.n;
    let a1 = (u1 - nrm * u1.dot(nrm))
        .normalized(SINGULAR_EPS)
        .ok_or(Error::DegenerateQuad("edge parallel to the normal".into()))?;
    let a2 = nrm.cross(a1);
    let canon = |v: Vec3| Vec3::new(v.dot(a1), v.dot(a2), v.dot(nrm));

    let fit_edge = |d: f64, cphi: f64, target: Vec3| -> Result<(C64, f64, C64)> {
        let sd = (d * d / 4.0 + cphi * cphi).sqrt();
        let delta: C64 = if sd <= 1.0 {
            C64::new(sd.asin(), 0.0)
        } else {
            // virtual edge longer than 1: complex angle with unit-modulus
            // half-angle tangent, sin(pi/2 + iy) = cosh(y)
            C64::new(
                std::f64::consts::FRAC_PI_2,
                (sd + (sd * sd - 1.0).sqrt()).ln(),
            )
        };
        let sin_delta = delta.sin();
        let x = -cphi / sin_delta.re;
        if x.abs() > 1.0 + 1e-9 {
            return Err(Error::NegativeRadicand(1.0 - x * x));
        }
        let sig0 = x.clamp(-1.0, 1.0).asin();
        // both arcsine branches satisfy the length/angle relations; keep
        // the one that reproduces the edge. A branch whose radicand turns
        // negative is simply not the geometric one.
        let mut best: Option<(f64, f64, C64)> = None;
        for sig in [sig0, std::f64::consts::PI - sig0] {
            let rho_i = wrap_angle(-rho + 2.0 * sig);
            let Ok(labs) = ell_length(rho, rho_i, delta) else {
                continue;
            };
            let Ok(base) = sym_edge(rho, rho_i, delta, C64::new(labs, 0.0)) else {
                continue;
            };
            let az0 = base.y.atan2(base.x);
            let azt = target.y.atan2(target.x);
            let arg = azt - az0;
            let lv = C64::from_polar(labs, arg);
            let Ok(edge) = sym_edge(rho, rho_i, delta, lv) else {
                continue;
            };
            let err = edge.max_diff(target);
            if best.is_none() || err < best.as_ref().unwrap().0 {
                best = Some((err, rho_i, lv));
            }
        }
        let Some((err, rho_i, lv)) = best else {
            return Err(Error::NegativeRadicand(x * x - 1.0));
        };
        if err > 1e-6 * (1.0 + d) {
            return Err(Error::DegenerateQuad(format!(
                "edge reproduction failed, residual {:.3e}",
                err
            )));
        }
        Ok((delta, rho_i, lv))
    };

    let (delta1, rho1, lv) = fit_edge(data.d1, data.cos_phi_edge1, canon(data.f1 - data.f))?;
    let (delta2, rho2, mv) = fit_edge(data.d2, data.cos_phi_edge2, canon(data.f2 - data.f))?;

    Ok(CkFit {
        delta1,
        delta2,
        rho,
        rho1,
        rho2,
        l: lv,
        m: mv,
        f12,
        n1,
        n2,
        n12,
    })
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = x % std::f64::consts::TAU;
    if y > std::f64::consts::PI {
        y -= std::f64::consts::TAU;
    }
    if y <= -std::f64::consts::PI {
        y += std::f64::consts::TAU;
    }
    y
}
