//! Command pipelines behind the `cknet` binary: generate, evolve,
//! backlund, double-backlund, validate, compare, export.
//!
//! Angles are radians; complex parameters use `re+imi` literals
//! (`0.5+0.3i`, `-0.4i`, `1.0`). Exit codes: 0 success, 1 usage,
//! 2 parse/io, 3 invariant failure, 4 numerical degeneracy. Outputs are
//! byte-deterministic (17 significant digits).

use crate::backlund::{self, BacklundParams};
use crate::cklax;
use crate::error::{Error, Result};
use crate::explicit;
use crate::lattice::{fmt_float, CknetLaxField, QuadNet};
use crate::validate::{self, Check};
use num_complex::Complex64 as C64;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

/// Exit code for an error, per the documented code map.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownParameter(_) => 1,
        Error::ParseError(_) | Error::IoError(_) | Error::DimensionMismatch(_) => 2,
        Error::InvariantViolation(_) => 3,
        _ => 4,
    }
}

/// Parse a `re+imi` literal.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s = text.trim().replace(' ', "");
    let fail = || Error::UnknownParameter(format!("cannot parse complex literal '{text}'"));
    if s.is_empty() {
        return Err(fail());
    }
    if let Ok(re) = s.parse::<f64>() {
        return Ok(C64::new(re, 0.0));
    }
    if let Some(body) = s.strip_suffix('i') {
        // split at the last +/- that is not a leading sign or exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        if let Some(i) = split {
            let re: f64 = body[..i].parse().map_err(|_| fail())?;
            let imtext = &body[i..];
            let im: f64 = if imtext == "+" {
                1.0
            } else if imtext == "-" {
                -1.0
            } else {
                imtext.parse().map_err(|_| fail())?
            };
            return Ok(C64::new(re, im));
        }
        let im: f64 = if body.is_empty() || body == "+" {
            1.0
        } else if body == "-" {
            -1.0
        } else {
            body.parse().map_err(|_| fail())?
        };
        return Ok(C64::new(0.0, im));
    }
    Err(fail())
}

/// Parse `KxL` dimensions.
pub fn parse_dims(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    if parts.len() != 2 {
        return Err(Error::UnknownParameter(format!(
            "dims must be KxL, got '{text}'"
        )));
    }
    let k = parts[0]
        .parse()
        .map_err(|_| Error::UnknownParameter(format!("bad dims '{text}'")))?;
    let l = parts[1]
        .parse()
        .map_err(|_| Error::UnknownParameter(format!("bad dims '{text}'")))?;
    Ok((k, l))
}

/// Parameter set for a named generator; unknown keys are rejected against
/// the generator's schema.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub surface: Option<String>,
    pub dims: Option<String>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub t: Option<f64>,
    pub mu: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub phi_steps: Option<usize>,
}

impl SurfaceSpec {
    pub fn from_config(path: &Path) -> Result<SurfaceSpec> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::ParseError(format!("config: {e}")))
    }

    /// Flags override config values.
    pub fn merged_over(self, base: SurfaceSpec) -> SurfaceSpec {
        SurfaceSpec {
            surface: self.surface.or(base.surface),
            dims: self.dims.or(base.dims),
            alpha: self.alpha.or(base.alpha),
            theta: self.theta.or(base.theta),
            t: self.t.or(base.t),
            mu: self.mu.or(base.mu),
            delta1: self.delta1.or(base.delta1),
            delta2: self.delta2.or(base.delta2),
            epsilon: self.epsilon.or(base.epsilon),
            phi_steps: self.phi_steps.or(base.phi_steps),
        }
    }

    fn provided(&self) -> BTreeSet<&'static str> {
        let mut set = BTreeSet::new();
        if self.alpha.is_some() {
            set.insert("alpha");
        }
        if self.theta.is_some() {
            set.insert("theta");
        }
        if self.t.is_some() {
            set.insert("t");
        }
        if self.mu.is_some() {
            set.insert("mu");
        }
        if self.delta1.is_some() {
            set.insert("delta1");
        }
        if self.delta2.is_some() {
            set.insert("delta2");
        }
        if self.epsilon.is_some() {
            set.insert("epsilon");
        }
        if self.phi_steps.is_some() {
            set.insert("phi_steps");
        }
        set
    }

    /// Build the net (and optionally the line's Lax field) this spec names.
    pub fn generate(&self) -> Result<(QuadNet, Option<CknetLaxField>)> {
        let surface = self
            .surface
            .as_deref()
            .ok_or_else(|| Error::UnknownParameter("missing --surface".into()))?;
        let dims = match &self.dims {
            Some(d) => parse_dims(d)?,
            None => (20, 20),
        };
        let allowed: &[&str] = match surface {
            "line" => &["delta1", "delta2", "t"],
            "pseudosphere" => &["epsilon", "phi_steps"],
            "dini" => &["alpha", "theta", "delta1", "delta2", "t"],
            "pseudosphere-family" => &["theta", "delta1", "delta2", "t"],
            "breather" => &["mu", "delta1", "delta2", "t"],
            "kuen" => &["delta1", "delta2", "t"],
            other => {
                return Err(Error::UnknownParameter(format!(
                    "unknown surface '{other}'"
                )));
            }
        };
        for key in self.provided() {
            if !allowed.contains(&key) {
                return Err(Error::UnknownParameter(format!(
                    "parameter '{key}' does not apply to surface '{surface}'"
                )));
            }
        }
        let d1 = self.delta1.unwrap_or(0.4);
        let d2 = self.delta2.unwrap_or(0.3);
        let t = self.t.unwrap_or(0.0);
        let theta = self.theta.unwrap_or(std::f64::consts::FRAC_PI_2);
        let mut lax = None;
        let mut net = match surface {
            "line" => {
                lax = Some(CknetLaxField::straight_line(dims, d1, d2));
                explicit::line(dims, d1, d2, t)?
            }
            "pseudosphere" => explicit::tractrix_pseudosphere(
                dims,
                self.epsilon.unwrap_or(1.0),
                self.phi_steps.unwrap_or(24),
            )?,
            "dini" => explicit::dini(
                dims,
                self.alpha
                    .ok_or_else(|| Error::UnknownParameter("dini requires --alpha".into()))?,
                theta,
                d1,
                d2,
                t,
            )?,
            "pseudosphere-family" => explicit::pseudosphere_family(dims, theta, d1, d2, t)?,
            "breather" => explicit::breather(
                dims,
                self.mu
                    .ok_or_else(|| Error::UnknownParameter("breather requires --mu".into()))?,
                d1,
                d2,
                t,
            )?,
            "kuen" => explicit::kuen(dims, d1, d2, t)?,
            _ => unreachable!(),
        };
        let mut meta = serde_json::Map::new();
        meta.insert(
            "generator".into(),
            serde_json::Value::String(surface.into()),
        );
        for (key, value) in [
            ("alpha", self.alpha),
            ("theta", self.theta),
            ("t", self.t),
            ("mu", self.mu),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("epsilon", self.epsilon),
        ] {
            if let Some(v) = value {
                if let Some(num) = serde_json::Number::from_f64(v) {
                    meta.insert(key.into(), serde_json::Value::Number(num));
                }
            }
        }
        if let Some(p) = self.phi_steps {
            meta.insert("phi_steps".into(), serde_json::Value::Number(p.into()));
        }
        // closure is checked, not encoded: nets stay rectangular windows and
        // the seam period is recorded so consumers can verify coincidence
        if surface == "pseudosphere" {
            let p = self.phi_steps.unwrap_or(24);
            meta.insert(
                "rotational_period".into(),
                serde_json::Value::Number(p.into()),
            );
        }
        if surface == "breather" {
            if let Some(p) = explicit::breather_closure_period(d2, self.mu.unwrap_or(0.0), 10_000) {
                meta.insert("closure_period".into(), serde_json::Value::Number(p.into()));
            }
        }
        net.set_meta(serde_json::Value::Object(meta));
        Ok((net, lax))
    }
}

pub fn cmd_generate(spec: &SurfaceSpec, out: &Path, lax_out: Option<&Path>) -> Result<()> {
    let (net, lax) = spec.generate()?;
    if let Some(path) = lax_out {
        match lax {
            Some(field) => field.write_json(path)?,
            None => {
                return Err(Error::UnknownParameter(
                    "--lax-out applies only to --surface line".into(),
                ));
            }
        }
    }
    net.write_json(out)
}

pub fn cmd_evolve(lax: &Path, t: f64, out: &Path) -> Result<()> {
    let field = CknetLaxField::read_json(lax)?;
    let (_, net) = cklax::integrate(&field, t)?;
    net.write_json(out)
}

pub fn cmd_backlund(
    lax: &Path,
    alpha: f64,
    theta: f64,
    t: f64,
    out: &Path,
    lax_out: Option<&Path>,
) -> Result<()> {
    let field = CknetLaxField::read_json(lax)?;
    let params = BacklundParams::new(alpha, theta, t)?;
    let (frame, base_net) = cklax::integrate(&field, t)?;
    let bt = backlund::evolve(&field, params)?;
    let net = backlund::immerse(&frame, &base_net, &field, &bt)?;
    if let Some(path) = lax_out {
        bt.to_field(&field).write_json(path)?;
    }
    net.write_json(out)
}

pub fn cmd_double_backlund(lax: &Path, mu: C64, t: f64, out: &Path) -> Result<()> {
    let field = CknetLaxField::read_json(lax)?;
    let (net, _) = backlund::double(&field, mu, t)?;
    net.write_json(out)
}

/// Returns the process exit code: 0 when all checks pass, 3 otherwise.
pub fn cmd_validate(
    net_path: &Path,
    checks: &[Check],
    tol: Option<f64>,
    report_out: Option<&Path>,
) -> Result<i32> {
    let net = QuadNet::read_json(net_path)?;
    let report = validate::net_report(&net, checks, tol)?;
    let json = report.to_json_string();
    match report_out {
        Some(path) => std::fs::write(path, &json)?,
        None => print!("{json}"),
    }
    Ok(if report.pass() { 0 } else { 3 })
}

/// Returns 0 when the nets are congruent within `tol`, 3 otherwise.
pub fn cmd_compare(a: &Path, b: &Path, tol: f64, report_out: Option<&Path>) -> Result<i32> {
    let net_a = QuadNet::read_json(a)?;
    let net_b = QuadNet::read_json(b)?;
    let (motion, residual) = validate::congruence(&net_a, &net_b)?;
    let nres = validate::normal_residual(&net_a, &net_b, &motion);
    let pass = residual <= tol;
    let json = format!(
        "{{\"tol\":{},\"residual\":{},\"normal_residual\":{},\"pass\":{}}}\n",
        fmt_float(tol),
        fmt_float(residual),
        fmt_float(nres),
        pass
    );
    match report_out {
        Some(path) => std::fs::write(path, &json)?,
        None => print!("{json}"),
    }
    Ok(if pass { 0 } else { 3 })
}

pub fn cmd_export(net_path: &Path, format: &str, out: &Path) -> Result<()> {
    let net = QuadNet::read_json(net_path)?;
    match format {
        "obj" => net.export_obj(out),
        other => Err(Error::UnknownParameter(format!(
            "unknown export format '{other}'"
        ))),
    }
}

/// Clap definitions for the binary.
pub mod args {
    use super::*;
    use clap::{Args, Parser, Subcommand};

    #[derive(Parser, Debug)]
    #[command(
        name = "cknet",
        about = "Constant negative curvature nets: generators, transforms, validation",
        version
    )]
    pub struct Cli {
        #[command(subcommand)]
        pub command: Command,
    }

    #[derive(Subcommand, Debug)]
    pub enum Command {
        /// Generate a closed-form surface and write it as a net JSON file.
        Generate(GenerateArgs),
        /// Integrate a Lax-field JSON file into a net.
        Evolve(EvolveArgs),
        /// Single Backlund transform of the net described by a Lax field.
        Backlund(BacklundArgs),
        /// Double Backlund transform through one L-type matrix.
        DoubleBacklund(DoubleBacklundArgs),
        /// Run geometric checks against a net file.
        Validate(ValidateArgs),
        /// Compare two nets up to rigid motion.
        Compare(CompareArgs),
        /// Export a net file to a mesh format.
        Export(ExportArgs),
    }

    #[derive(Args, Debug)]
    pub struct GenerateArgs {
        /// line | pseudosphere | dini | pseudosphere-family | breather | kuen
        #[arg(long)]
        pub surface: Option<String>,
        /// Window size KxL (default 20x20).
        #[arg(long)]
        pub dims: Option<String>,
        #[arg(long)]
        pub alpha: Option<f64>,
        #[arg(long)]
        pub theta: Option<f64>,
        #[arg(long)]
        pub t: Option<f64>,
        #[arg(long)]
        pub mu: Option<f64>,
        #[arg(long)]
        pub delta1: Option<f64>,
        #[arg(long)]
        pub delta2: Option<f64>,
        #[arg(long)]
        pub epsilon: Option<f64>,
        #[arg(long = "phi-steps")]
        pub phi_steps: Option<usize>,
        /// JSON file with the same keys; flags override it.
        #[arg(long)]
        pub config: Option<PathBuf>,
        /// Also write the straight line's Lax field (surface=line only).
        #[arg(long = "lax-out")]
        pub lax_out: Option<PathBuf>,
        #[arg(short, long)]
        pub out: PathBuf,
    }

    #[derive(Args, Debug)]
    pub struct EvolveArgs {
        #[arg(long)]
        pub lax: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        pub t: f64,
        #[arg(short, long)]
        pub out: PathBuf,
    }

    #[derive(Args, Debug)]
    pub struct BacklundArgs {
        #[arg(long)]
        pub lax: PathBuf,
        #[arg(long)]
        pub alpha: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        pub theta: f64,
        #[arg(long, default_value_t = 0.0)]
        pub t: f64,
        /// Also write the transformed Lax field.
        #[arg(long = "lax-out")]
        pub lax_out: Option<PathBuf>,
        #[arg(short, long)]
        pub out: PathBuf,
    }

    #[derive(Args, Debug)]
    pub struct DoubleBacklundArgs {
        #[arg(long)]
        pub lax: PathBuf,
        /// Complex literal, e.g. `0.7` or `0.0-0.45i`.
        #[arg(long)]
        pub mu: String,
        #[arg(long, default_value_t = 0.0)]
        pub t: f64,
        #[arg(short, long)]
        pub out: PathBuf,
    }

    #[derive(Args, Debug)]
    pub struct ValidateArgs {
        #[arg(long)]
        pub net: PathBuf,
        /// Comma-separated: edge-constraint,curvature,circularity
        #[arg(long, default_value = "edge-constraint,curvature")]
        pub checks: String,
        #[arg(long)]
        pub tol: Option<f64>,
        #[arg(long)]
        pub report: Option<PathBuf>,
    }

    #[derive(Args, Debug)]
    pub struct CompareArgs {
        #[arg(long)]
        pub a: PathBuf,
        #[arg(long)]
        pub b: PathBuf,
        #[arg(long, default_value_t = crate::tol::GEOM_TOL)]
        pub tol: f64,
        #[arg(long)]
        pub report: Option<PathBuf>,
    }

    #[derive(Args, Debug)]
    pub struct ExportArgs {
        #[arg(long)]
        pub net: PathBuf,
        #[arg(long, default_value = "obj")]
        pub format: String,
        #[arg(short, long)]
        pub out: PathBuf,
    }

    /// Run a parsed command; returns the process exit code.
    pub fn run(cli: Cli) -> i32 {
        let outcome: Result<i32> = match cli.command {
            Command::Generate(a) => {
                let flag_spec = SurfaceSpec {
                    surface: a.surface,
                    dims: a.dims,
                    alpha: a.alpha,
                    theta: a.theta,
                    t: a.t,
                    mu: a.mu,
                    delta1: a.delta1,
                    delta2: a.delta2,
                    epsilon: a.epsilon,
                    phi_steps: a.phi_steps,
                };
                let spec = match &a.config {
                    Some(path) => match SurfaceSpec::from_config(path) {
                        Ok(base) => flag_spec.merged_over(base),
                        Err(e) => return fail(&e),
                    },
                    None => flag_spec,
                };
                cmd_generate(&spec, &a.out, a.lax_out.as_deref()).map(|()| 0)
            }
            Command::Evolve(a) => cmd_evolve(&a.lax, a.t, &a.out).map(|()| 0),
            Command::Backlund(a) => {
                cmd_backlund(&a.lax, a.alpha, a.theta, a.t, &a.out, a.lax_out.as_deref())
                    .map(|()| 0)
            }
            Command::DoubleBacklund(a) => match parse_complex(&a.mu) {
                Ok(mu) => cmd_double_backlund(&a.lax, mu, a.t, &a.out).map(|()| 0),
                Err(e) => Err(e),
            },
            Command::Validate(a) => {
                let checks: Result<Vec<Check>> = a
                    .checks
                    .split(',')
                    .map(|c| Check::parse(c.trim()))
                    .collect();
                match checks {
                    Ok(checks) => cmd_validate(&a.net, &checks, a.tol, a.report.as_deref()),
                    Err(e) => Err(e),
                }
            }
            Command::Compare(a) => cmd_compare(&a.a, &a.b, a.tol, a.report.as_deref()),
            Command::Export(a) => cmd_export(&a.net, &a.format, &a.out).map(|()| 0),
        };
        match outcome {
            Ok(code) => code,
            Err(e) => fail(&e),
        }
    }

    fn fail(e: &Error) -> i32 {
        eprintln!("error: {e}");
        exit_code(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("0.5+0.3i").unwrap(), C64::new(0.5, 0.3));
        assert_eq!(parse_complex("0.5-0.3i").unwrap(), C64::new(0.5, -0.3));
        assert_eq!(parse_complex("-0.4i").unwrap(), C64::new(0.0, -0.4));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), C64::new(1e-3, 2e-4));
        assert!(parse_complex("florp").is_err());
    }

    #[test]
    fn dims_literals() {
        assert_eq!(parse_dims("40x24").unwrap(), (40, 24));
        assert!(parse_dims("40").is_err());
    }

    #[test]
    fn unknown_parameter_rejected() {
        let spec = SurfaceSpec {
            surface: Some("pseudosphere".into()),
            epsilon: Some(1.0),
            alpha: Some(0.3),
            ..Default::default()
        };
        assert!(matches!(spec.generate(), Err(Error::UnknownParameter(_))));
        let ok = SurfaceSpec {
            surface: Some("pseudosphere".into()),
            epsilon: Some(1.0),
            phi_steps: Some(12),
            dims: Some("10x12".into()),
            ..Default::default()
        };
        let (net, lax) = ok.generate().unwrap();
        assert_eq!(net.dims(), (10, 12));
        assert!(lax.is_none());
    }

    #[test]
    fn config_merge_prefers_flags() {
        let base = SurfaceSpec {
            surface: Some("dini".into()),
            alpha: Some(0.5),
            t: Some(0.1),
            ..Default::default()
        };
        let flags = SurfaceSpec {
            alpha: Some(1.2),
            ..Default::default()
        };
        let merged = flags.merged_over(base);
        assert_eq!(merged.alpha, Some(1.2));
        assert_eq!(merged.t, Some(0.1));
        assert_eq!(merged.surface.as_deref(), Some("dini"));
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::UnknownParameter("x".into())), 1);
        assert_eq!(exit_code(&Error::ParseError("x".into())), 2);
        assert_eq!(exit_code(&Error::InvariantViolation("x".into())), 3);
        assert_eq!(exit_code(&Error::DegenerateAngle(0.0)), 4);
    }
}
