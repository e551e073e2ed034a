//! Quad-net data model over rectangular Z^2 windows.
//!
//! Vertices live on a (K, L) window stored row major: `(k, l) -> l*K + k`.
//! Every module in the crate shares this convention. Edge-indexed fields are
//! split into horizontal edges, shape (K-1) x L, and vertical edges,
//! shape K x (L-1), matching the L/M split of the transition matrices.

use crate::error::{Error, Result};
use crate::quat::{Biquat, Vec3};
use crate::tol::DEFAULT_TOL;
use num_complex::Complex64 as C64;
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::Path;

/// Format a float with 17 significant digits; all geometry files use this
/// so identical inputs produce byte-identical outputs.
pub(crate) fn fmt_float(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Rectangular quad net with per-vertex unit normals.
#[derive(Debug, Clone)]
pub struct QuadNet {
    dims: (usize, usize),
    f: Vec<Vec3>,
    n: Vec<Vec3>,
    meta: Option<serde_json::Value>,
}

impl QuadNet {
    /// Build a net by evaluating `vertex(k, l) -> (position, normal)`.
    pub fn build<F>(dims: (usize, usize), mut vertex: F) -> Result<QuadNet>
    where
        F: FnMut(usize, usize) -> (Vec3, Vec3),
    {
        if dims.0 < 1 || dims.1 < 1 {
            return Err(Error::DimensionMismatch(format!(
                "dims must be at least 1x1, got {}x{}",
                dims.0, dims.1
            )));
        }
        let mut f = Vec::with_capacity(dims.0 * dims.1);
        let mut n = Vec::with_capacity(dims.0 * dims.1);
        for l in 0..dims.1 {
            for k in 0..dims.0 {
                let (fv, nv) = vertex(k, l);
                f.push(fv);
                n.push(nv);
            }
        }
        let net = QuadNet {
            dims,
            f,
            n,
            meta: None,
        };
        net.check_invariants()?;
        Ok(net)
    }

    pub fn from_fields(dims: (usize, usize), f: Vec<Vec3>, n: Vec<Vec3>) -> Result<QuadNet> {
        if f.len() != dims.0 * dims.1 || n.len() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} vertices for {}x{}, got f:{} n:{}",
                dims.0 * dims.1,
                dims.0,
                dims.1,
                f.len(),
                n.len()
            )));
        }
        let net = QuadNet {
            dims,
            f,
            n,
            meta: None,
        };
        net.check_invariants()?;
        Ok(net)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    #[inline]
    pub fn idx(&self, k: usize, l: usize) -> usize {
        debug_assert!(k < self.dims.0 && l < self.dims.1);
        l * self.dims.0 + k
    }

    #[inline]
    pub fn f(&self, k: usize, l: usize) -> Vec3 {
        self.f[self.idx(k, l)]
    }

    #[inline]
    pub fn n(&self, k: usize, l: usize) -> Vec3 {
        self.n[self.idx(k, l)]
    }

    pub fn set_vertex(&mut self, k: usize, l: usize, f: Vec3, n: Vec3) {
        let i = self.idx(k, l);
        self.f[i] = f;
        self.n[i] = n;
    }

    pub fn meta(&self) -> Option<&serde_json::Value> {
        self.meta.as_ref()
    }

    pub fn set_meta(&mut self, meta: serde_json::Value) {
        self.meta = Some(meta);
    }

    /// Unit normals and consistent array sizes.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, n) in self.n.iter().enumerate() {
            let len = n.norm();
            if (len - 1.0).abs() > DEFAULT_TOL {
                return Err(Error::InvariantViolation(format!(
                    "normal at index {} has length {:.12}",
                    i, len
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"dims\":[");
        let _ = write!(out, "{},{}", self.dims.0, self.dims.1);
        out.push_str("],\"vertices\":[");
        for i in 0..self.f.len() {
            if i > 0 {
                out.push(',');
            }
            let (f, n) = (self.f[i], self.n[i]);
            let _ = write!(
                out,
                "{{\"f\":[{},{},{}],\"n\":[{},{},{}]}}",
                fmt_float(f.x),
                fmt_float(f.y),
                fmt_float(f.z),
                fmt_float(n.x),
                fmt_float(n.y),
                fmt_float(n.z)
            );
        }
        out.push(']');
        if let Some(meta) = &self.meta {
            let _ = write!(out, ",\"meta\":{}", meta);
        }
        out.push('}');
        out.push('\n');
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        self.check_invariants()?;
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<QuadNet> {
        #[derive(Deserialize)]
        struct VertexRec {
            f: [f64; 3],
            n: [f64; 3],
        }
        #[derive(Deserialize)]
        struct NetFile {
            dims: [usize; 2],
            vertices: Vec<VertexRec>,
            #[serde(default)]
            meta: Option<serde_json::Value>,
        }
        let file: NetFile =
            serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
        let dims = (file.dims[0], file.dims[1]);
        if dims.0 < 1 || dims.1 < 1 {
            return Err(Error::DimensionMismatch(format!(
                "dims {}x{}",
                dims.0, dims.1
            )));
        }
        if file.vertices.len() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "{} vertices for a {}x{} net",
                file.vertices.len(),
                dims.0,
                dims.1
            )));
        }
        let f = file
            .vertices
            .iter()
            .map(|v| Vec3::new(v.f[0], v.f[1], v.f[2]))
            .collect();
        let n = file
            .vertices
            .iter()
            .map(|v| Vec3::new(v.n[0], v.n[1], v.n[2]))
            .collect();
        let mut net = QuadNet {
            dims,
            f,
            n,
            meta: file.meta,
        };
        net.check_invariants()?;
        if let Some(serde_json::Value::Null) = net.meta {
            net.meta = None;
        }
        Ok(net)
    }

    pub fn read_json(path: &Path) -> Result<QuadNet> {
        let text = std::fs::read_to_string(path)?;
        QuadNet::from_json_str(&text)
    }

    /// Wavefront OBJ with vertex normals and quad faces in row-major order.
    pub fn to_obj_string(&self) -> Result<String> {
        let (kk, ll) = self.dims;
        if kk < 2 || ll < 2 {
            return Err(Error::DimensionMismatch(format!(
                "OBJ export needs at least 2x2, got {}x{}",
                kk, ll
            )));
        }
        let mut out = String::new();
        for v in &self.f {
            let _ = writeln!(
                out,
                "v {} {} {}",
                fmt_float(v.x),
                fmt_float(v.y),
                fmt_float(v.z)
            );
        }
        for n in &self.n {
            let _ = writeln!(
                out,
                "vn {} {} {}",
                fmt_float(n.x),
                fmt_float(n.y),
                fmt_float(n.z)
            );
        }
        for l in 0..ll - 1 {
            for k in 0..kk - 1 {
                let a = self.idx(k, l) + 1;
                let b = self.idx(k + 1, l) + 1;
                let c = self.idx(k + 1, l + 1) + 1;
                let d = self.idx(k, l + 1) + 1;
                let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c} {d}//{d}");
            }
        }
        Ok(out)
    }

    pub fn export_obj(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_obj_string()?)?;
        Ok(())
    }
}

/// Vertex and edge variables of a cK-net Lax representation.
///
/// `s` is unit modulus per vertex; `l` lives on horizontal edges, `m` on
/// vertical edges. The parameter-line angles are one value per column gap
/// (`delta1`, constant in the second direction) and one per row gap
/// (`delta2`, constant in the first); complex values are allowed.
#[derive(Debug, Clone)]
pub struct CknetLaxField {
    pub dims: (usize, usize),
    pub s: Vec<C64>,
    pub l: Vec<C64>,
    pub m: Vec<C64>,
    pub delta1: Vec<C64>,
    pub delta2: Vec<C64>,
}

impl CknetLaxField {
    pub fn zeroed(dims: (usize, usize)) -> CknetLaxField {
        CknetLaxField {
            dims,
            s: vec![C64::ZERO; dims.0 * dims.1],
            l: vec![C64::ZERO; (dims.0 - 1) * dims.1],
            m: vec![C64::ZERO; dims.0 * (dims.1 - 1)],
            delta1: vec![C64::ZERO; dims.0 - 1],
            delta2: vec![C64::ZERO; dims.1 - 1],
        }
    }

    #[inline]
    pub fn sidx(&self, k: usize, l: usize) -> usize {
        l * self.dims.0 + k
    }

    /// Horizontal edge from (k,l) to (k+1,l); `k < K-1`.
    #[inline]
    pub fn lidx(&self, k: usize, l: usize) -> usize {
        l * (self.dims.0 - 1) + k
    }

    /// Vertical edge from (k,l) to (k,l+1); `l < L-1`.
    #[inline]
    pub fn midx(&self, k: usize, l: usize) -> usize {
        l * self.dims.0 + k
    }

    pub fn s_at(&self, k: usize, l: usize) -> C64 {
        self.s[self.sidx(k, l)]
    }

    pub fn l_at(&self, k: usize, l: usize) -> C64 {
        self.l[self.lidx(k, l)]
    }

    pub fn m_at(&self, k: usize, l: usize) -> C64 {
        self.m[self.midx(k, l)]
    }

    /// Sizes and unit-modulus vertex variables.
    pub fn check_invariants(&self) -> Result<()> {
        let (kk, ll) = self.dims;
        if kk < 2 || ll < 2 {
            return Err(Error::DimensionMismatch(format!("dims {}x{}", kk, ll)));
        }
        let sizes = [
            (self.s.len(), kk * ll, "s"),
            (self.l.len(), (kk - 1) * ll, "l"),
            (self.m.len(), kk * (ll - 1), "m"),
            (self.delta1.len(), kk - 1, "delta1"),
            (self.delta2.len(), ll - 1, "delta2"),
        ];
        for (got, want, name) in sizes {
            if got != want {
                return Err(Error::DimensionMismatch(format!(
                    "field {} has {} entries, expected {}",
                    name, got, want
                )));
            }
        }
        for (i, s) in self.s.iter().enumerate() {
            if (s.norm() - 1.0).abs() > DEFAULT_TOL {
                return Err(Error::InvariantViolation(format!(
                    "|s| = {:.12} at index {}",
                    s.norm(),
                    i
                )));
            }
        }
        // real parameter angles force unit edge variables
        for k in 0..kk - 1 {
            if self.delta1[k].im.abs() > DEFAULT_TOL {
                continue;
            }
            for l in 0..ll {
                let v = self.l[self.lidx(k, l)];
                if (v.norm() - 1.0).abs() > DEFAULT_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "|l| = {:.12} at edge ({},{}) with real delta1",
                        v.norm(),
                        k,
                        l
                    )));
                }
            }
        }
        for l in 0..ll - 1 {
            if self.delta2[l].im.abs() > DEFAULT_TOL {
                continue;
            }
            for k in 0..kk {
                let v = self.m[self.midx(k, l)];
                if (v.norm() - 1.0).abs() > DEFAULT_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "|m| = {:.12} at edge ({},{}) with real delta2",
                        v.norm(),
                        k,
                        l
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        fn complex_list(out: &mut String, vals: &[C64]) {
            out.push('[');
            for (i, z) in vals.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "[{},{}]", fmt_float(z.re), fmt_float(z.im));
            }
            out.push(']');
        }
        let mut out = String::new();
        let _ = write!(out, "{{\"dims\":[{},{}],\"s\":", self.dims.0, self.dims.1);
        complex_list(&mut out, &self.s);
        out.push_str(",\"l\":");
        complex_list(&mut out, &self.l);
        out.push_str(",\"m\":");
        complex_list(&mut out, &self.m);
        out.push_str(",\"delta1\":");
        complex_list(&mut out, &self.delta1);
        out.push_str(",\"delta2\":");
        complex_list(&mut out, &self.delta2);
        out.push_str("}\n");
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        self.check_invariants()?;
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<CknetLaxField> {
        #[derive(Deserialize)]
        struct FieldFile {
            dims: [usize; 2],
            s: Vec<[f64; 2]>,
            l: Vec<[f64; 2]>,
            m: Vec<[f64; 2]>,
            delta1: Vec<[f64; 2]>,
            delta2: Vec<[f64; 2]>,
        }
        let file: FieldFile =
            serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
        let cv = |v: &[[f64; 2]]| v.iter().map(|p| C64::new(p[0], p[1])).collect();
        let field = CknetLaxField {
            dims: (file.dims[0], file.dims[1]),
            s: cv(&file.s),
            l: cv(&file.l),
            m: cv(&file.m),
            delta1: cv(&file.delta1),
            delta2: cv(&file.delta2),
        };
        field.check_invariants()?;
        Ok(field)
    }

    pub fn read_json(path: &Path) -> Result<CknetLaxField> {
        let text = std::fs::read_to_string(path)?;
        CknetLaxField::from_json_str(&text)
    }
}

/// Phase field of an asymptotic K-net together with its parameter-line
/// angles: `delta_u` per column gap (constant in the second lattice
/// direction), `delta_v` per row gap (constant in the first). This is the
/// assignment under which the transition determinants close around a quad.
#[derive(Debug, Clone)]
pub struct KnetField {
    pub dims: (usize, usize),
    pub h: Vec<f64>,
    pub delta_u: Vec<f64>,
    pub delta_v: Vec<f64>,
}

impl KnetField {
    #[inline]
    pub fn hidx(&self, k: usize, l: usize) -> usize {
        l * self.dims.0 + k
    }

    pub fn h_at(&self, k: usize, l: usize) -> f64 {
        self.h[self.hidx(k, l)]
    }

    pub fn check_invariants(&self) -> Result<()> {
        let (kk, ll) = self.dims;
        if self.h.len() != kk * ll {
            return Err(Error::DimensionMismatch(format!(
                "h has {} entries for {}x{}",
                self.h.len(),
                kk,
                ll
            )));
        }
        if self.delta_u.len() != kk - 1 || self.delta_v.len() != ll - 1 {
            return Err(Error::DimensionMismatch(format!(
                "delta arrays {}/{} for {}x{}",
                self.delta_u.len(),
                self.delta_v.len(),
                kk,
                ll
            )));
        }
        Ok(())
    }
}

/// A frame and its spectral-parameter derivative, propagated jointly.
#[derive(Debug, Clone)]
pub struct FrameState {
    pub dims: (usize, usize),
    pub phi: Vec<Biquat>,
    pub phi_dot: Vec<Biquat>,
    /// Spectral log-parameter; lambda = e^t.
    pub t: f64,
}

impl FrameState {
    pub fn identity_seed(dims: (usize, usize), t: f64) -> FrameState {
        let zero = Biquat::new(C64::ZERO, C64::ZERO, C64::ZERO, C64::ZERO);
        FrameState {
            dims,
            phi: vec![Biquat::one(); dims.0 * dims.1],
            phi_dot: vec![zero; dims.0 * dims.1],
            t,
        }
    }

    #[inline]
    pub fn idx(&self, k: usize, l: usize) -> usize {
        l * self.dims.0 + k
    }

    pub fn phi_at(&self, k: usize, l: usize) -> Biquat {
        self.phi[self.idx(k, l)]
    }

    pub fn phi_dot_at(&self, k: usize, l: usize) -> Biquat {
        self.phi_dot[self.idx(k, l)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_types_are_shareable() {
        // all containers are plain values: free to share and send
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<QuadNet>();
        assert_send_sync::<CknetLaxField>();
        assert_send_sync::<KnetField>();
        assert_send_sync::<FrameState>();
        assert_send_sync::<Biquat>();
        assert_send_sync::<Vec3>();
    }

    #[test]
    fn row_major_fixture() {
        // canonical layout fixture shared by all modules: (k,l) -> l*K + k
        let net = QuadNet::build((3, 2), |k, l| {
            (Vec3::new(k as f64, l as f64, 0.0), Vec3::new(0.0, 0.0, 1.0))
        })
        .unwrap();
        assert_eq!(net.idx(2, 1), 5);
        assert_eq!(net.f(2, 1), Vec3::new(2.0, 1.0, 0.0));
        let json = net.to_json_string();
        let reread = QuadNet::from_json_str(&json).unwrap();
        // order of vertices is k-fastest
        assert_eq!(reread.f(1, 0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(reread.f(0, 1), Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let net = QuadNet::build((1, 1), |_, _| {
            (Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0))
        })
        .unwrap();
        let s1 = net.to_json_string();
        let net2 = QuadNet::from_json_str(&s1).unwrap();
        assert_eq!(s1, net2.to_json_string());
        assert_eq!(net2.f(0, 0), Vec3::ZERO);

        // irrational coordinates survive the 17-digit round trip bit-exactly
        let net3 = QuadNet::build((2, 2), |k, l| {
            (
                Vec3::new(
                    (k as f64 + 0.12345).sqrt(),
                    (l as f64 + 2.0).ln(),
                    -1.0 / (k as f64 + l as f64 + 3.7),
                ),
                Vec3::new(0.0, 0.0, 1.0),
            )
        })
        .unwrap();
        let text = net3.to_json_string();
        let back = QuadNet::from_json_str(&text).unwrap();
        for l in 0..2 {
            for k in 0..2 {
                assert_eq!(net3.f(k, l), back.f(k, l));
            }
        }
    }

    #[test]
    fn bad_normal_rejected() {
        let text = r#"{"dims":[1,1],"vertices":[{"f":[0,0,0],"n":[0,0,0.9]}]}"#;
        assert!(matches!(
            QuadNet::from_json_str(text),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn dims_mismatch_rejected() {
        let text = r#"{"dims":[2,2],"vertices":[{"f":[0,0,0],"n":[0,0,1]}]}"#;
        assert!(matches!(
            QuadNet::from_json_str(text),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            QuadNet::from_json_str("{"),
            Err(Error::ParseError(_))
        ));
    }

    #[test]
    fn obj_export_counts() {
        let net = QuadNet::build((2, 2), |k, l| {
            (Vec3::new(k as f64, l as f64, 0.0), Vec3::new(0.0, 0.0, 1.0))
        })
        .unwrap();
        let obj = net.to_obj_string().unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("vn ")).count(), 4);
        let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces, vec!["f 1//1 2//2 4//4 3//3"]);

        let net32 = QuadNet::build((3, 2), |k, l| {
            (Vec3::new(k as f64, l as f64, 0.0), Vec3::new(0.0, 0.0, 1.0))
        })
        .unwrap();
        let obj = net32.to_obj_string().unwrap();
        let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(
            faces,
            vec!["f 1//1 2//2 5//5 4//4", "f 2//2 3//3 6//6 5//5"]
        );

        let tiny = QuadNet::build((1, 2), |_, _| (Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0))).unwrap();
        assert!(tiny.to_obj_string().is_err());
    }

    #[test]
    fn lax_field_json_round_trip() {
        let mut field = CknetLaxField::zeroed((3, 2));
        for (i, s) in field.s.iter_mut().enumerate() {
            *s = C64::from_polar(1.0, 0.3 * i as f64);
        }
        for v in field.l.iter_mut().chain(field.m.iter_mut()) {
            *v = C64::new(1.0, 0.0);
        }
        field.delta1 = vec![C64::new(0.4, 0.0); 2];
        field.delta2 = vec![C64::new(0.3, 0.1)];
        let text = field.to_json_string();
        let back = CknetLaxField::from_json_str(&text).unwrap();
        assert_eq!(back.dims, (3, 2));
        assert_eq!(back.s, field.s);
        assert_eq!(back.delta2[0], C64::new(0.3, 0.1));
    }

    #[test]
    fn lax_field_bad_modulus_rejected() {
        let mut field = CknetLaxField::zeroed((2, 2));
        field.s = vec![C64::new(0.5, 0.0); 4];
        field.l = vec![C64::new(1.0, 0.0); 2];
        field.m = vec![C64::new(1.0, 0.0); 2];
        field.delta1 = vec![C64::new(0.4, 0.0)];
        field.delta2 = vec![C64::new(0.3, 0.0)];
        assert!(matches!(
            field.check_invariants(),
            Err(Error::InvariantViolation(_))
        ));
    }
}
