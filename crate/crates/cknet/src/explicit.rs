//! Closed-form generators: the straight line and its associated family,
//! the tractrix pseudosphere of revolution, Dini's surfaces, the
//! pseudosphere family, breathers, and Kuen's surface, plus the
//! varying-parameter generalizations.
//!
//! All formulas are anchored at the identity frame at the origin, so each
//! generator agrees pointwise with the corresponding frame-evolution
//! pipeline, not merely up to a rigid motion. The only orientation quirk:
//! the tractrix construction carries the opposite global normal
//! orientation from the transform pipeline (both are valid Gauss maps).

use crate::error::{Error, Result};
use crate::lattice::QuadNet;
use crate::quat::Vec3;
use num_complex::Complex64 as C64;

/// Point in the meridian plane.
pub type Vec2 = (f64, f64);

fn iu() -> C64 {
    C64::i()
}

/// Product of `f(s)` for `s = 0..k`, extended to negative `k` by the
/// reversed-index convention `prod_{s=k}^{-1} f(s)^{-1}`.
fn prod_range(f: &dyn Fn(i64) -> C64, k: i64) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    if k >= 0 {
        for s in 0..k {
            acc *= f(s);
        }
    } else {
        for s in k..0 {
            acc /= f(s);
        }
    }
    acc
}

fn sum_range(f: &dyn Fn(i64) -> f64, k: i64) -> f64 {
    let mut acc = 0.0;
    if k >= 0 {
        for s in 0..k {
            acc += f(s);
        }
    } else {
        for s in k..0 {
            acc -= f(s);
        }
    }
    acc
}

/// Unit phase factor of the line net at lattice point (k, l):
/// `((i + sinh t sin d1)/(i - sinh t sin d1))^k ((i + cosh t tan d2)/(i - cosh t tan d2))^l`.
fn omega_varying(k: i64, l: i64, t: f64, d1: &dyn Fn(i64) -> f64, d2: &dyn Fn(i64) -> f64) -> C64 {
    let f1 = |s: i64| {
        let a = t.sinh() * d1(s).sin();
        (iu() + a) / (iu() - a)
    };
    let f2 = |s: i64| {
        let a = t.cosh() * d2(s).tan();
        (iu() + a) / (iu() - a)
    };
    prod_range(&f1, k) * prod_range(&f2, l)
}

fn x_varying(k: i64, l: i64, t: f64, d1: &dyn Fn(i64) -> f64, d2: &dyn Fn(i64) -> f64) -> f64 {
    let g1 = |s: i64| {
        let sd = d1(s).sin();
        t.cosh() * sd / (1.0 + t.sinh().powi(2) * sd * sd)
    };
    let g2 = |s: i64| {
        let sd = d2(s).sin();
        t.sinh() * sd * d2(s).cos() / (1.0 + t.sinh().powi(2) * sd * sd)
    };
    sum_range(&g1, k) + sum_range(&g2, l)
}

fn line_vertex(
    k: i64,
    l: i64,
    t: f64,
    d1: &dyn Fn(i64) -> f64,
    d2: &dyn Fn(i64) -> f64,
) -> (Vec3, Vec3) {
    let x = x_varying(k, l, t, d1, d2);
    let w = omega_varying(k, l, t, d1, d2);
    (Vec3::new(-2.0 * x, 0.0, 0.0), Vec3::new(0.0, w.im, w.re))
}

fn check_angle(d: f64) -> Result<f64> {
    if d.sin().abs() < 1e-12 || !d.is_finite() {
        return Err(Error::DegenerateAngle(d));
    }
    Ok(d)
}

/// The straight line as a degenerate net, with its associated family.
pub fn line(dims: (usize, usize), delta1: f64, delta2: f64, t: f64) -> Result<QuadNet> {
    check_angle(delta1)?;
    let d1 = move |_s: i64| delta1;
    let d2 = move |_s: i64| delta2;
    QuadNet::build(dims, |k, l| line_vertex(k as i64, l as i64, t, &d1, &d2))
}

/// Varying-parameter straight line over a window whose lower-left corner
/// sits at lattice point `origin`.
pub fn line_varying(
    dims: (usize, usize),
    origin: (i64, i64),
    delta1: impl Fn(i64) -> f64,
    delta2: impl Fn(i64) -> f64,
    t: f64,
) -> Result<QuadNet> {
    QuadNet::build(dims, |k, l| {
        line_vertex(
            origin.0 + k as i64,
            origin.1 + l as i64,
            t,
            &delta1,
            &delta2,
        )
    })
}

/// Exponential of the transform phase chi, carried as a signed real value
/// so that initial phases in (-pi, 0) work without complex logarithms:
/// `tanh chi = (E^2-1)/(E^2+1)`, `sech chi = 2E/(E^2+1)`.
fn chi_exp_varying(
    k: i64,
    l: i64,
    alpha: f64,
    theta: f64,
    d1: &dyn Fn(i64) -> f64,
    d2: &dyn Fn(i64) -> f64,
) -> f64 {
    let r1 = |s: i64| {
        let sd = d1(s).sin();
        C64::new((alpha.sin() + sd) / (alpha.sin() - sd), 0.0)
    };
    let r2 = |s: i64| C64::new((alpha + d2(s)).sin() / (alpha - d2(s)).sin(), 0.0);
    ((theta / 2.0).tan() * prod_range(&r1, k) * prod_range(&r2, l)).re
}

fn dini_vertex(
    k: i64,
    l: i64,
    alpha: f64,
    theta: f64,
    t: f64,
    d1: &dyn Fn(i64) -> f64,
    d2: &dyn Fn(i64) -> f64,
) -> (Vec3, Vec3) {
    let (f0, _) = line_vertex(k, l, t, d1, d2);
    let w = omega_varying(k, l, t, d1, d2);
    let e = chi_exp_varying(k, l, alpha, theta, d1, d2);
    let th = (e * e - 1.0) / (e * e + 1.0);
    let sc = 2.0 * e / (e * e + 1.0);
    let pref = alpha.sin() / (t.cosh() - alpha.cos() * t.sinh());
    let f = f0 + Vec3::new(th, -sc * w.re, sc * w.im) * pref;
    let c = t.cosh() * alpha.cos() / alpha.sin() - t.sinh() / alpha.sin();
    let what = w * C64::new(c, th);
    let n = Vec3::new(sc, what.im, what.re) * pref;
    (f, n)
}

/// Transform of the straight line with angle `alpha` and initial phase
/// `theta`: Dini's surface in curvature-line coordinates at `t = 0`, its
/// associated family otherwise.
pub fn dini(
    dims: (usize, usize),
    alpha: f64,
    theta: f64,
    delta1: f64,
    delta2: f64,
    t: f64,
) -> Result<QuadNet> {
    check_angle(delta1)?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::DegenerateAngle(alpha));
    }
    let d1 = move |_s: i64| delta1;
    let d2 = move |_s: i64| delta2;
    QuadNet::build(dims, |k, l| {
        dini_vertex(k as i64, l as i64, alpha, theta, t, &d1, &d2)
    })
}

/// Varying-parameter Dini family.
pub fn dini_varying(
    dims: (usize, usize),
    origin: (i64, i64),
    alpha: f64,
    theta: f64,
    delta1: impl Fn(i64) -> f64,
    delta2: impl Fn(i64) -> f64,
    t: f64,
) -> Result<QuadNet> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::DegenerateAngle(alpha));
    }
    QuadNet::build(dims, |k, l| {
        dini_vertex(
            origin.0 + k as i64,
            origin.1 + l as i64,
            alpha,
            theta,
            t,
            &delta1,
            &delta2,
        )
    })
}

/// Associated family of the Beltrami pseudosphere (`alpha = -pi/2`):
///
/// `f = f0 - sech t (tanh chi, -sech chi Re w, sech chi Im w)` with
/// `chi = log tan(theta/2) + k tau`, `tau = log((1-sin d1)/(1+sin d1))`,
/// and `n = -sech t (sech chi, tanh chi Re w + sinh t Im w,
/// sinh t Re w - tanh chi Im w)`.
pub fn pseudosphere_family(
    dims: (usize, usize),
    theta: f64,
    delta1: f64,
    delta2: f64,
    t: f64,
) -> Result<QuadNet> {
    check_angle(delta1)?;
    let tau = ((1.0 - delta1.sin()) / (1.0 + delta1.sin())).ln();
    let d1 = move |_s: i64| delta1;
    let d2 = move |_s: i64| delta2;
    QuadNet::build(dims, |k, l| {
        let (ki, li) = (k as i64, l as i64);
        let (f0, _) = line_vertex(ki, li, t, &d1, &d2);
        let w = omega_varying(ki, li, t, &d1, &d2);
        let e = (theta / 2.0).tan() * (ki as f64 * tau).exp();
        let th = (e * e - 1.0) / (e * e + 1.0);
        let sc = 2.0 * e / (e * e + 1.0);
        let sech_t = 1.0 / t.cosh();
        let f = f0 - Vec3::new(th, -sc * w.re, sc * w.im) * sech_t;
        let what = w * C64::new(t.sinh(), th);
        let n = Vec3::new(sc, what.im, what.re) * (-sech_t);
        (f, n)
    })
}

/// Discrete pseudosphere of revolution from the tractrix construction:
///
/// `f = (eps k - tanh(tau k), cos(l phi) sech(tau k), sin(l phi) sech(tau k))`
/// with `tau = log((2+eps)/(2-eps))` and `phi = 2 pi / phi_steps`; normals
/// `(sech(tau k), cos(l phi) tanh(tau k), sin(l phi) tanh(tau k))`.
pub fn tractrix_pseudosphere(
    dims: (usize, usize),
    epsilon: f64,
    phi_steps: usize,
) -> Result<QuadNet> {
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::InvalidStep(epsilon));
    }
    if phi_steps < 3 {
        return Err(Error::UnknownParameter(format!(
            "phi_steps must be at least 3, got {}",
            phi_steps
        )));
    }
    let tau = ((2.0 + epsilon) / (2.0 - epsilon)).ln();
    let phi = std::f64::consts::TAU / phi_steps as f64;
    QuadNet::build(dims, |k, l| {
        let kt = tau * k as f64;
        let ang = phi * l as f64;
        let f = Vec3::new(
            epsilon * k as f64 - kt.tanh(),
            ang.cos() / kt.cosh(),
            ang.sin() / kt.cosh(),
        );
        let n = Vec3::new(
            1.0 / kt.cosh(),
            ang.cos() * kt.tanh(),
            ang.sin() * kt.tanh(),
        );
        (f, n)
    })
}

/// Darboux transform, tractrix, and tractrix normals of a planar polygon.
#[derive(Debug, Clone)]
pub struct TractrixData {
    pub p: Vec<Vec2>,
    pub p_hat: Vec<Vec2>,
    pub p_tilde: Vec<Vec2>,
    /// Unit meridian normals at the tractrix vertices.
    pub normals: Vec<Vec2>,
    /// Half the constant rod length: `|p_hat - p| = 2d`.
    pub d: f64,
}

/// Discrete Darboux transform of a regular polygon `p` from a start point.
///
/// Each step closes the folded parallelogram on the quad
/// `p_k, p_{k+1}, p_hat_{k+1}, p_hat_k`: the new point is the reflection of
/// the parallelogram point across the diagonal through `p_hat_k` and
/// `p_{k+1}`. The tractrix is the midpoint polygon; its normals are the
/// 90-degree rotation of the rod direction.
pub fn darboux_tractrix(p: &[Vec2], start: Vec2) -> Result<TractrixData> {
    if p.len() < 2 {
        return Err(Error::UnknownParameter(
            "polygon needs at least 2 vertices".into(),
        ));
    }
    let sub = |a: Vec2, b: Vec2| (a.0 - b.0, a.1 - b.1);
    let add = |a: Vec2, b: Vec2| (a.0 + b.0, a.1 + b.1);
    let norm = |a: Vec2| (a.0 * a.0 + a.1 * a.1).sqrt();
    let d2 = norm(sub(start, p[0]));
    if d2 < 1e-14 {
        return Err(Error::NoSolution(0));
    }
    for (i, w) in p.windows(2).enumerate() {
        if norm(sub(w[1], w[0])) < 1e-14 {
            return Err(Error::NoSolution(i));
        }
    }
    let mut p_hat = vec![start];
    for i in 0..p.len() - 1 {
        let prev = p_hat[i];
        // parallelogram point, then fold across the diagonal
        let q = add(prev, sub(p[i + 1], p[i]));
        let axis = sub(p[i + 1], prev);
        let an = norm(axis);
        if an < 1e-12 {
            return Err(Error::NoSolution(i));
        }
        let u = (axis.0 / an, axis.1 / an);
        let w = sub(q, prev);
        let proj = w.0 * u.0 + w.1 * u.1;
        let refl = (
            2.0 * proj * u.0 - w.0 + prev.0,
            2.0 * proj * u.1 - w.1 + prev.1,
        );
        p_hat.push(refl);
    }
    let p_tilde: Vec<Vec2> = p
        .iter()
        .zip(p_hat.iter())
        .map(|(a, b)| ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0))
        .collect();
    let normals: Vec<Vec2> = p
        .iter()
        .zip(p_hat.iter())
        .map(|(a, b)| {
            let rod = sub(*b, *a);
            let n = norm(rod);
            (rod.1 / n, -rod.0 / n)
        })
        .collect();
    Ok(TractrixData {
        p: p.to_vec(),
        p_hat,
        p_tilde,
        normals,
        d: d2 / 2.0,
    })
}

/// Surface of revolution of a meridian with meridian normals; the profile
/// y-coordinate is the distance from the axis.
pub fn revolve(
    meridian: &[Vec2],
    normals: &[Vec2],
    phi_steps: usize,
    rows: usize,
) -> Result<QuadNet> {
    if meridian.len() != normals.len() || meridian.is_empty() {
        return Err(Error::DimensionMismatch("meridian/normals length".into()));
    }
    let phi = std::f64::consts::TAU / phi_steps as f64;
    QuadNet::build((meridian.len(), rows), |k, l| {
        let ang = phi * l as f64;
        let (x, y) = meridian[k];
        let (nx, ny) = normals[k];
        (
            Vec3::new(x, ang.cos() * y, ang.sin() * y),
            Vec3::new(nx, ang.cos() * ny, ang.sin() * ny),
        )
    })
}

/// Stationary breather: double transform of the line with half-angle
/// tangent `e^{i mu}`, `mu` real in (0, pi) excluding the endpoints.
pub fn breather(
    dims: (usize, usize),
    mu: f64,
    delta1: f64,
    delta2: f64,
    t: f64,
) -> Result<QuadNet> {
    check_angle(delta1)?;
    if mu.sin().abs() < 1e-12 {
        return Err(Error::DegenerateAngle(mu));
    }
    let kappa = 2.0 * (mu.sin() * delta2.tan()).atan();
    let tau = ((1.0 - delta1.sin() * mu.cos()) / (1.0 + delta1.sin() * mu.cos())).ln();
    let d1 = move |_s: i64| delta1;
    let d2 = move |_s: i64| delta2;
    QuadNet::build(dims, |k, l| {
        let (ki, li) = (k as i64, l as i64);
        let (f0, _) = line_vertex(ki, li, t, &d1, &d2);
        let w = omega_varying(ki, li, t, &d1, &d2);
        let kt = tau * k as f64;
        let (ch, sh) = (kt.cosh(), kt.sinh());
        let (th, sech) = (kt.tanh(), 1.0 / kt.cosh());
        let lk = kappa * l as f64;
        let (sl, cl) = (lk.sin(), lk.cos());
        let a = (2.0 * mu).sin() * ch
            / (((2.0 * mu).cos() + (2.0 * t).cosh())
                * (mu.cos().powi(2) * sl * sl + ch * ch * mu.sin().powi(2)));
        let g = mu.cos() * t.sinh() * th * sl + mu.sin() * t.cosh() * cl;
        let fvec = Vec3::new(
            mu.cos() * t.sinh() * sech * sl * cl - mu.sin() * t.cosh() * sh,
            w.im * sl - w.re * g,
            w.im * g + w.re * sl,
        );
        let f = f0 + fvec * (2.0 * a);
        let bb = 2.0
            * (mu.cos() * t.cosh() * (2.0 * lk).sin() - mu.sin() * t.sinh() * (2.0 * kt).sinh());
        let cc = sl * sl * ((2.0 * mu).sin() + ((2.0 * t).cosh() + 1.0) / mu.tan())
            - ch * ch * ((2.0 * mu).sin() + mu.tan() * (1.0 - (2.0 * t).cosh()));
        let nvec = Vec3::new(
            4.0 * (mu.sin() * t.sinh() * ch * cl + mu.cos() * t.cosh() * sh * sl),
            w.re * bb - w.im * cc,
            -w.re * cc - w.im * bb,
        );
        let n = nvec * (a / (2.0 * ch));
        (f, n)
    })
}

/// Kuen's surface and its associated family: the `mu -> 0` limit of the
/// breather.
pub fn kuen(dims: (usize, usize), delta1: f64, delta2: f64, t: f64) -> Result<QuadNet> {
    check_angle(delta1)?;
    let tau = ((1.0 - delta1.sin()) / (1.0 + delta1.sin())).ln();
    let d1 = move |_s: i64| delta1;
    let d2 = move |_s: i64| delta2;
    QuadNet::build(dims, |k, l| {
        let (ki, li) = (k as i64, l as i64);
        let (f0, _) = line_vertex(ki, li, t, &d1, &d2);
        let w = omega_varying(ki, li, t, &d1, &d2);
        let kt = tau * k as f64;
        let (ch, sh) = (kt.cosh(), kt.sinh());
        let (th, sech) = (kt.tanh(), 1.0 / kt.cosh());
        let q = 2.0 * l as f64 * delta2.tan();
        let den = ch * ch + q * q;
        let pre = 2.0 * ch / (t.cosh() * den);
        let fvec = Vec3::new(
            q * t.tanh() * sech - sh,
            q * w.im / t.cosh() - w.re * (q * t.tanh() * th + 1.0),
            w.im * (q * t.tanh() * th + 1.0) + q * w.re / t.cosh(),
        );
        let f = f0 + fvec * pre;
        let dd = (1.0 - t.sinh().powi(2)) * ch * ch - q * q * t.cosh().powi(2);
        let ee = 2.0 * q * t.cosh() - t.sinh() * (2.0 * kt).sinh();
        let nvec = Vec3::new(
            2.0 * (q * t.cosh() * sh + t.sinh() * ch),
            w.im * dd + w.re * ee,
            w.re * dd - w.im * ee,
        );
        let n = nvec * (1.0 / (t.cosh().powi(2) * den));
        (f, n)
    })
}

/// Smallest period P that closes the breather in the second lattice
/// direction: both the rotation angle kappa and the line phase 2*delta2
/// must return to the identity. `None` when no P up to `max_period` closes.
pub fn breather_closure_period(delta2: f64, mu: f64, max_period: u32) -> Option<u32> {
    let kappa = 2.0 * (mu.sin() * delta2.tan()).atan();
    let closes = |angle: f64, p: u32| {
        let r = (angle * p as f64) % std::f64::consts::TAU;
        r.abs() < 1e-9 || (std::f64::consts::TAU - r.abs()).abs() < 1e-9
    };
    (1..=max_period).find(|&p| closes(kappa, p) && closes(2.0 * delta2, p))
}
