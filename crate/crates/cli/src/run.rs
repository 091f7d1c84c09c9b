//! Executes the checks of a scenario and assembles the report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cbmkit_core::geometry::CoStar;
use cbmkit_core::measures::{check_homogeneity, BoundaryMode, Region, SetMeasure};
use cbmkit_core::onedim::{iso_1d, ocbm_1d, IntervalUnion};
use cbmkit_core::oracle::{voxel_minkowski_weighted, voxelize_star, Lattice};
use cbmkit_core::sobolev::{check_sobolev, functional_cbm, GridFunction, SobolevVariant};
use cbmkit_core::verifiers::{
    bonnesen_concavity, check_bm, check_cbm, check_cbm_halfline, check_iso_warped, check_isoperimetry, check_ocbm_nd,
    closure_suite, equality_diagnostics, probe_battery, profile_search, ClosureInput, EqualityOptions, ProfileOptions, SumPath,
};
use cbmkit_core::{IneqReport, Orientation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scenario::{from_value, CheckSpec, Context, Mode, Scenario, SchemaError};

/// Command-line overrides of scenario settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_h: Option<f64>,
    /// Directory for PGM dumps of voxel masks.
    #[serde(skip)]
    pub dump_masks: Option<PathBuf>,
    /// Run only the `profile` checks.
    #[serde(skip)]
    pub profile_only: bool,
}

/// One report line, tagged with the check that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub check: String,
    pub checker: String,
    #[serde(flatten)]
    pub report: IneqReport,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    /// Assert-mode entries that hold.
    pub passed: usize,
    /// Assert-mode entries that fail.
    pub failed: usize,
    /// Diagnostic entries, whatever their outcome.
    pub diagnostics: usize,
    pub diagnostic_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub checks_ms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    /// SHA-256 of the scenario bytes.
    pub scenario_digest: String,
    pub seed: u64,
    pub overrides: serde_json::Value,
    pub reports: Vec<Entry>,
    pub summary: Summary,
    pub timing: Timing,
}

impl Report {
    /// Process exit code for a completed run.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed > 0 {
            1
        } else {
            0
        }
    }

    /// The report without its timing block, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "name", "lhs", "rhs", "slack", "pass"])?;
        for e in &self.reports {
            let r = &e.report;
            w.write_record([e.check.clone(), r.name.clone(), r.lhs.to_string(), r.rhs.to_string(), r.slack.to_string(), r.pass.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

pub fn summarize(entries: &[Entry]) -> Summary {
    let mut s = Summary::default();
    for e in entries {
        match (e.report.diagnostic, e.report.pass) {
            (true, ok) => {
                s.diagnostics += 1;
                if !ok {
                    s.diagnostic_failures += 1;
                }
            }
            (false, true) => s.passed += 1,
            (false, false) => s.failed += 1,
        }
    }
    s
}

pub fn digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Parses, builds and runs a scenario given as text.
pub fn run_text(text: &str, overrides: &Overrides) -> Result<Report, SchemaError> {
    let start = Instant::now();
    let mut scenario = Scenario::parse(text)?;
    if let Some(g) = overrides.grid {
        scenario.grid = g;
    }
    if let Some(h) = overrides.oracle_h {
        if !(h > 0.0 && h < scenario.oracle.window) {
            return Err(SchemaError::new("/oracle/h", format!("--oracle-h {h} must lie in (0, window)")));
        }
        scenario.oracle.h = h;
    }
    let ctx = Context::build(&scenario)?;
    let selected: Vec<(usize, &CheckSpec)> =
        scenario.checks.iter().enumerate().filter(|(_, c)| !overrides.profile_only || c.checker == "profile").collect();
    let outcomes: Vec<Result<(Vec<Entry>, f64), SchemaError>> = selected
        .par_iter()
        .map(|(i, c)| {
            let t = Instant::now();
            let entries = run_check(&ctx, *i, c, overrides.dump_masks.as_deref())?;
            Ok((entries, t.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut reports = Vec::new();
    let mut checks_ms = Vec::new();
    for o in outcomes {
        let (e, ms) = o?;
        reports.extend(e);
        checks_ms.push(ms);
    }
    let summary = summarize(&reports);
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_digest: digest(text.as_bytes()),
        seed: scenario.seed,
        overrides: serde_json::to_value(overrides).expect("overrides serialize"),
        reports,
        summary,
        timing: Timing { total_ms: start.elapsed().as_secs_f64() * 1e3, checks_ms },
    })
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PathSpec {
    #[default]
    Auto,
    Exact,
    Star,
    Voxel,
}

impl PathSpec {
    fn resolve(self, ctx: &Context) -> SumPath {
        match self {
            PathSpec::Auto => SumPath::Auto,
            PathSpec::Exact => SumPath::Exact,
            PathSpec::Star => SumPath::Star,
            PathSpec::Voxel => SumPath::Voxel(ctx.oracle.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeSpec {
    #[default]
    Auto,
    Exact,
    Polygon,
    Star,
    Voxel,
}

impl ModeSpec {
    fn resolve(self, ctx: &Context) -> BoundaryMode {
        match self {
            ModeSpec::Auto => BoundaryMode::Auto,
            ModeSpec::Exact => BoundaryMode::Exact,
            ModeSpec::Polygon => BoundaryMode::Polygon,
            ModeSpec::Star => BoundaryMode::Star,
            ModeSpec::Voxel => BoundaryMode::Voxel(ctx.oracle.clone()),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairInputs {
    a: String,
    b: String,
    lambda: f64,
    q: f64,
    #[serde(default)]
    path: PathSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HalflineInputs {
    law: String,
    a: f64,
    b: f64,
    lambda: f64,
    q: f64,
}

/// Intervals `[lo, hi)`; a null upper end is `+inf`.
type Intervals = Vec<(f64, Option<f64>)>;

fn intervals(v: &Intervals, at: &str) -> Result<IntervalUnion, SchemaError> {
    let parts = v.iter().map(|(a, b)| (*a, b.unwrap_or(f64::INFINITY))).collect();
    IntervalUnion::new(parts).map_err(|e| SchemaError::new(at, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Ocbm1dInputs {
    law: String,
    a: Intervals,
    b: f64,
    t: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Iso1dInputs {
    law: String,
    c: Intervals,
    b: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum RegionKind {
    Star,
    Costar,
    Convex,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpec {
    kind: RegionKind,
    body: String,
    #[serde(default = "one")]
    scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IsoInputs {
    k: String,
    region: RegionSpec,
    q: f64,
    #[serde(default)]
    mode: ModeSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OcbmInputs {
    a: String,
    b: String,
    t: f64,
    #[serde(default)]
    path: PathSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WarpedInputs {
    k: String,
    /// Body whose exterior is the co-star.
    c: String,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default)]
    mode: ModeSpec,
}

fn default_steps() -> usize {
    16
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BonnesenInputs {
    a: String,
    b: String,
    q: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    /// Also require `Psi` to be affine.
    #[serde(default)]
    expect_affine: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EqualityInputs {
    a: String,
    b: String,
    #[serde(default)]
    translation_search: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosureInputs {
    /// Rotation angles of the scenario measure, in degrees.
    rotations: Vec<f64>,
    weights: Vec<f64>,
    #[serde(default)]
    map: Option<[[f64; 2]; 2]>,
    q: f64,
    #[serde(default)]
    q_prime: Option<f64>,
    #[serde(default)]
    path: PathSpec,
}

#[derive(Deserialize)]
struct SobolevInputs {
    function: String,
    #[serde(flatten)]
    variant: SobolevVariant,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalInputs {
    f: String,
    g: String,
    lambda: f64,
    q: f64,
}

#[derive(Deserialize)]
struct ProfileInputs {
    k: String,
    v: f64,
    #[serde(flatten)]
    options: ProfileOptions,
}

fn default_trials() -> usize {
    8
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HomogeneityInputs {
    q: f64,
    #[serde(default = "default_trials")]
    trials: usize,
}

/// Runs check `i`; errors point into `/checks/i`.
pub fn run_check(ctx: &Context, i: usize, c: &CheckSpec, dump: Option<&Path>) -> Result<Vec<Entry>, SchemaError> {
    let at = format!("/checks/{i}/inputs");
    let fail = |e: cbmkit_core::Error| SchemaError::new(&at, e);
    let key = |k: &str| format!("{at}/{k}");
    let mu = &ctx.measure;
    let tol = c.tolerance;
    // threshold checks take the tolerance as their threshold rather than as a pass band
    let mut rescale = true;
    let reports: Vec<IneqReport> = match c.checker.as_str() {
        "bm" => {
            let p: PairInputs = from_value(&c.inputs, &at)?;
            let (a, b) = (ctx.convex(&p.a, &key("a"))?, ctx.convex(&p.b, &key("b"))?);
            vec![check_bm(mu, &a, &b, p.lambda, p.q).map_err(fail)?]
        }
        "cbm" => {
            let p: PairInputs = from_value(&c.inputs, &at)?;
            let (a, b) = (ctx.star(&p.a, &key("a"))?, ctx.star(&p.b, &key("b"))?);
            if let (Some(dir), PathSpec::Voxel) = (dump, p.path) {
                dump_sum(ctx, dir, i, &c.checker, &a, &b, p.lambda, 1.0 - p.lambda).map_err(|e| SchemaError::new(&at, e))?;
            }
            vec![check_cbm(mu, &a, &b, p.lambda, p.q, &p.path.resolve(ctx)).map_err(fail)?]
        }
        "cbm_halfline" => {
            let p: HalflineInputs = from_value(&c.inputs, &at)?;
            vec![check_cbm_halfline(ctx.law(&p.law, &key("law"))?, p.a, p.b, p.lambda, p.q).map_err(fail)?]
        }
        "ocbm_1d" => {
            let p: Ocbm1dInputs = from_value(&c.inputs, &at)?;
            vec![ocbm_1d(ctx.law(&p.law, &key("law"))?, &intervals(&p.a, &key("a"))?, p.b, p.t).map_err(fail)?]
        }
        "iso_1d" => {
            let p: Iso1dInputs = from_value(&c.inputs, &at)?;
            vec![iso_1d(ctx.law(&p.law, &key("law"))?, &intervals(&p.c, &key("c"))?, p.b).map_err(fail)?]
        }
        "isoperimetry" => {
            let p: IsoInputs = from_value(&c.inputs, &at)?;
            let k = ctx.convex(&p.k, &key("k"))?;
            let rat = key("region/body");
            let mode = p.mode.resolve(ctx);
            let s = p.region.scale;
            let r = match p.region.kind {
                RegionKind::Star => {
                    let b = ctx.star(&p.region.body, &rat)?.scaled(s).map_err(fail)?;
                    check_isoperimetry(mu, &k, Region::Star(&b), p.q, mode)
                }
                RegionKind::Costar => {
                    let b = CoStar::from_star(&ctx.star(&p.region.body, &rat)?.scaled(s).map_err(fail)?);
                    check_isoperimetry(mu, &k, Region::CoStar(&b), p.q, mode)
                }
                RegionKind::Convex => {
                    let b = ctx.convex(&p.region.body, &rat)?.scaled(s).map_err(fail)?;
                    check_isoperimetry(mu, &k, Region::Convex(&b), p.q, mode)
                }
            };
            vec![r.map_err(fail)?]
        }
        "ocbm_nd" => {
            let p: OcbmInputs = from_value(&c.inputs, &at)?;
            let (a, b) = (ctx.star(&p.a, &key("a"))?, ctx.star(&p.b, &key("b"))?);
            if let (Some(dir), PathSpec::Voxel) = (dump, p.path) {
                dump_sum(ctx, dir, i, &c.checker, &a, &b, 1.0, p.t).map_err(|e| SchemaError::new(&at, e))?;
            }
            vec![check_ocbm_nd(mu, &a, &b, p.t, &p.path.resolve(ctx)).map_err(fail)?]
        }
        "iso_warped" => {
            let p: WarpedInputs = from_value(&c.inputs, &at)?;
            let k = ctx.convex(&p.k, &key("k"))?;
            let co = CoStar::from_star(&ctx.star(&p.c, &key("c"))?.scaled(p.scale).map_err(fail)?);
            vec![check_iso_warped(mu, &k, &co, p.mode.resolve(ctx)).map_err(fail)?]
        }
        "bonnesen" => {
            rescale = false;
            let p: BonnesenInputs = from_value(&c.inputs, &at)?;
            let (a, b) = (ctx.convex(&p.a, &key("a"))?, ctx.convex(&p.b, &key("b"))?);
            let t = tol.unwrap_or(1e-9);
            let r = bonnesen_concavity(mu, &a, &b, p.q, p.steps, t).map_err(fail)?;
            let witness = format!("mu={} A={} B={} q={} steps={}", mu.describe(), p.a, p.b, p.q, p.steps);
            // defects are relative to max |Psi|; the threshold is the tolerance itself
            let mut out = vec![IneqReport::new("bonnesen_concavity", r.concavity_defect, -t, Orientation::Ge, 0.0).with_witness(witness.clone())];
            if p.expect_affine {
                out.push(IneqReport::new("bonnesen_affinity", r.affinity_defect, t, Orientation::Le, 0.0).with_witness(witness));
            }
            out
        }
        "equality" => {
            rescale = false;
            let p: EqualityInputs = from_value(&c.inputs, &at)?;
            let (a, b) = (ctx.star(&p.a, &key("a"))?, ctx.star(&p.b, &key("b"))?);
            let opts = EqualityOptions { translation_search: p.translation_search, tolerance: tol.unwrap_or(1e-9) };
            let r = equality_diagnostics(&a, &b, mu.eta(), &opts).map_err(fail)?;
            let residual = match &r.translation {
                Some(t) => r.homothety_residual.min(t.residual),
                None => r.homothety_residual,
            };
            let witness = format!(
                "A={} B={} ratio={} homothety_residual={} convexity_deficit={:?} translation={:?}",
                p.a, p.b, r.ratio, r.homothety_residual, r.convexity_deficit, r.translation
            );
            vec![IneqReport::new("equality_residual", residual, opts.tolerance, Orientation::Le, 0.0).with_witness(witness)]
        }
        "closure" => {
            let p: ClosureInputs = from_value(&c.inputs, &at)?;
            if p.rotations.len() != p.weights.len() || p.rotations.is_empty() {
                return Err(SchemaError::new(key("weights"), "need one weight per rotation"));
            }
            let mut parts = Vec::new();
            for (j, (deg, w)) in p.rotations.iter().zip(&p.weights).enumerate() {
                let steps = ctx.grid.rotation_steps(deg.to_radians()).map_err(|e| SchemaError::new(key(&format!("rotations/{j}")), e))?;
                parts.push((*w, mu.rotated(steps).map_err(fail)?));
            }
            let input = ClosureInput { parts, map: p.map, q: p.q, q_prime: p.q_prime };
            closure_suite(&input, &probe_battery().map_err(fail)?, &p.path.resolve(ctx)).map_err(fail)?
        }
        "sobolev" => {
            let p: SobolevInputs = from_value(&c.inputs, &at)?;
            let f = ctx.function(&p.function, &key("function"))?;
            vec![check_sobolev(f, mu, p.variant).map_err(fail)?]
        }
        "functional_cbm" => {
            let p: FunctionalInputs = from_value(&c.inputs, &at)?;
            let lattice = Lattice::from_settings(ctx.dim, &ctx.oracle).map_err(fail)?;
            let raster = |name: &str, k: &str| -> Result<GridFunction, SchemaError> {
                let f = ctx.function(name, &key(k))?;
                let outside = *f.profile.values.last().expect("nonempty profile");
                GridFunction::from_fn(lattice, outside, |x| f.eval(x)).map_err(|e| SchemaError::new(key(k), e))
            };
            let (f, g) = (raster(&p.f, "f")?, raster(&p.g, "g")?);
            vec![functional_cbm(&f, &g, p.lambda, mu, p.q, ctx.oracle.refine_depth).map_err(fail)?]
        }
        "profile" => {
            let p: ProfileInputs = from_value(&c.inputs, &at)?;
            let k = ctx.convex(&p.k, &key("k"))?;
            let r = profile_search(mu, &k, p.v, &p.options).map_err(fail)?;
            let mut rep = IneqReport::new("profile_search", r.best_boundary, r.bound, Orientation::Ge, p.options.tolerance).with_witness(format!(
                "v={} fourier_tail={} evaluations={} shape={:?}",
                p.v, r.fourier_tail, r.evaluations, r.shape
            ));
            if r.flagged {
                rep = rep.with_warning("optimizer budget exhausted or bound undercut");
            }
            vec![rep]
        }
        "homogeneity" => {
            let p: HomogeneityInputs = from_value(&c.inputs, &at)?;
            vec![check_homogeneity(mu, p.q, p.trials, tol.unwrap_or(1e-9)).map_err(fail)?]
        }
        other => return Err(SchemaError::new(format!("/checks/{i}/checker"), format!("unknown checker {other:?}"))),
    };
    let label = c.label.clone().unwrap_or_else(|| format!("{i}:{}", c.checker));
    Ok(reports
        .into_iter()
        .map(|mut r| {
            if let (Some(t), true) = (tol, rescale) {
                r = r.with_tolerance(t);
            }
            if c.mode == Mode::Diagnostic {
                r = r.as_diagnostic();
            }
            Entry { check: label.clone(), checker: c.checker.clone(), report: r }
        })
        .collect())
}

/// Writes `A`, `B` and `wa A + wb B` as PGM images.
#[allow(clippy::too_many_arguments)]
fn dump_sum(
    ctx: &Context,
    dir: &Path,
    i: usize,
    checker: &str,
    a: &cbmkit_core::geometry::StarBody,
    b: &cbmkit_core::geometry::StarBody,
    wa: f64,
    wb: f64,
) -> Result<(), String> {
    let lattice = Lattice::from_settings(ctx.dim, &ctx.oracle).map_err(|e| e.to_string())?;
    let va = voxelize_star(lattice, a).map_err(|e| e.to_string())?;
    let vb = voxelize_star(lattice, b).map_err(|e| e.to_string())?;
    let sum = voxel_minkowski_weighted(&va, &vb, wa, wb).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for (tag, v) in [("a", &va), ("b", &vb), ("sum", &sum)] {
        let path = dir.join(format!("{i:02}_{checker}_{tag}.pgm"));
        std::fs::write(&path, v.to_pgm()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}
