//! The experiment runners. Each produces CSV artifacts under the output
//! directory, contributes manifest entries, prints one line per check, and
//! reports pass/fail; the runner executes sequentially for deterministic
//! logs.

use std::collections::BTreeMap;
use std::path::Path;

use fockbench_core::dbar::{self, FieldGrid};
use fockbench_core::error::Error as CoreError;
use fockbench_core::ida::{self, LocalApproxConfig};
use fockbench_core::operators::{self, OperatorContext};
use fockbench_core::quadrature::DiskRule;
use fockbench_core::quantization::{self, ScaleSchedule};
use fockbench_core::suite;
use fockbench_core::symbol::Symbol;
use fockbench_core::{c64, fock};

use crate::config::{Experiment, ExperimentConfig};
use crate::expr::resolve_symbol;
use crate::fieldio;
use crate::report::{fmt_f64, write_csv};
use crate::Outcome;

pub struct RunReport {
    pub outcome: Outcome,
    pub lines: Vec<String>,
    /// Extra manifest entries (grid parameters, recorded constants).
    pub extra: BTreeMap<String, String>,
}

impl RunReport {
    fn new() -> Self {
        RunReport {
            outcome: Outcome::Pass,
            lines: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: &str, observed: f64, threshold: f64) {
        let ok = observed <= threshold;
        self.lines.push(format!(
            "check {name}: {} vs {} [{}]",
            fmt_f64(observed),
            fmt_f64(threshold),
            if ok { "ok" } else { "FAIL" }
        ));
        if !ok {
            self.outcome = Outcome::CheckFailure;
        }
    }

    fn check_flag(&mut self, name: &str, ok: bool) {
        self.lines
            .push(format!("check {name}: [{}]", if ok { "ok" } else { "FAIL" }));
        if !ok {
            self.outcome = Outcome::CheckFailure;
        }
    }

    fn info(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }
}

/// Failures before checks even run. Config-shaped core errors map to exit 1,
/// violated runtime invariants to exit 2.
pub struct RunFailure {
    pub outcome: Outcome,
    pub message: String,
}

impl From<CoreError> for RunFailure {
    fn from(e: CoreError) -> Self {
        let outcome = match &e {
            CoreError::InvalidParameter { .. }
            | CoreError::UnsupportedWeight { .. }
            | CoreError::SpacingMismatch { .. }
            | CoreError::MissingDerivative { .. }
            | CoreError::UnboundedSymbol { .. }
            | CoreError::ResolutionGuard { .. }
            | CoreError::GridInvariant { .. } => Outcome::ConfigError,
            CoreError::NonFiniteSample { .. }
            | CoreError::GrowthCheck { .. }
            | CoreError::BoundaryDecay { .. }
            | CoreError::InvariantViolation { .. } => Outcome::CheckFailure,
        };
        RunFailure {
            outcome,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for RunFailure {
    fn from(e: std::io::Error) -> Self {
        RunFailure {
            outcome: Outcome::CheckFailure,
            message: format!("io error: {e}"),
        }
    }
}

fn config_failure(message: impl Into<String>) -> RunFailure {
    RunFailure {
        outcome: Outcome::ConfigError,
        message: message.into(),
    }
}

/// Resolve a symbol spec and make sure it carries a sup bound: corpus ids
/// carry their own, expressions take the declared bound or an empirical one
/// sampled on the extent disk (recorded in the manifest).
fn bounded_symbol(
    spec: &str,
    declared: Option<f64>,
    extent: f64,
    report: &mut RunReport,
    label: &str,
) -> Result<Symbol, RunFailure> {
    let sym = resolve_symbol(spec).map_err(config_failure)?;
    if sym.is_bounded() {
        return Ok(sym);
    }
    if fockbench_core::symbol::corpus::by_id(spec).is_ok() {
        // a corpus id without a bound (zbar) is genuinely unbounded
        return Err(config_failure(format!(
            "symbol '{spec}' is unbounded; this experiment requires a bounded symbol"
        )));
    }
    if let Some(b) = declared {
        report
            .extra
            .insert(format!("{label}_bound"), format!("declared:{b}"));
        return Ok(sym.with_bound(b));
    }
    // empirical bound: sampled sup times a 5% headroom
    let mut sup = 0.0f64;
    let steps = 96;
    for iy in 0..steps {
        for ix in 0..steps {
            let z = c64(
                -extent + 2.0 * extent * (ix as f64 + 0.5) / steps as f64,
                -extent + 2.0 * extent * (iy as f64 + 0.5) / steps as f64,
            );
            sup = sup.max(sym.eval(z).norm());
        }
    }
    if !(sup.is_finite() && sup > 0.0) {
        return Err(config_failure(format!(
            "cannot infer a bound for '{spec}'; pass {label}bound explicitly"
        )));
    }
    let bound = 1.05 * sup;
    report
        .extra
        .insert(format!("{label}_bound"), format!("empirical:{bound}"));
    Ok(sym.with_bound(bound))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    match cfg.experiment {
        Experiment::KernelCheck => kernel_check(cfg),
        Experiment::GField => g_field(cfg),
        Experiment::Decompose => decompose(cfg),
        Experiment::Hankel => hankel(cfg),
        Experiment::BergerCoburn => berger_coburn(cfg),
        Experiment::DbarCheck => dbar_check(cfg),
        Experiment::Beurling => beurling(cfg),
        Experiment::Quantize => quantize(cfg),
        Experiment::Suite => run_suite(cfg),
    }
}

fn kernel_check(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let tol = cfg.tol.unwrap_or(suite::tol::KERNEL_IDENTITY);
    let mut rng = DetRng::new(0x1001);
    let alpha = cfg.alpha;
    let mut worst = 0.0f64;
    for _ in 0..cfg.samples {
        let z = rng.in_disk(6.0);
        let w = rng.in_disk(6.0);
        let lhs = fock::kernel_weighted_modulus(z, w, alpha)?;
        let rhs = (alpha / std::f64::consts::PI) * (-0.5 * alpha * (z - w).norm_sqr()).exp();
        worst = worst.max((lhs - rhs).abs());
    }
    write_csv(
        &cfg.out.join("kernel_check.csv"),
        &["alpha", "samples", "max_error", "tolerance"],
        &[vec![
            fmt_f64(alpha),
            cfg.samples.to_string(),
            fmt_f64(worst),
            fmt_f64(tol),
        ]],
    )?;
    rep.check("kernel gaussian identity", worst, tol);
    Ok(rep)
}

fn g_field(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let f = resolve_symbol(&cfg.symbol).map_err(config_failure)?;
    let disk = DiskRule::default_rule();
    let local = LocalApproxConfig::new(cfg.q, cfg.r)
        .map_err(RunFailure::from)?
        .with_degree(cfg.degree);
    let field = ida::g_field(&disk, &f, &local, cfg.extent)?;
    let mut rows = Vec::with_capacity(field.centers.len());
    for (z, v) in field.centers.iter().zip(&field.values) {
        rows.push(vec![
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(field.q),
            fmt_f64(field.r),
            field.degree.to_string(),
            fmt_f64(*v),
        ]);
    }
    write_csv(
        &cfg.out.join("gfield.csv"),
        &["center_re", "center_im", "q", "r", "degree", "value"],
        &rows,
    )?;
    // s defaults to the exponent-triple value pq/(p-q) (sup norm for p <= q)
    let s = if cfg.s_explicit {
        cfg.s
    } else {
        ida::ExponentTriple::new(cfg.p, cfg.q)?.s
    };
    let sem = ida::seminorm_ida(&field, s)?;
    write_csv(
        &cfg.out.join("gfield_seminorm.csv"),
        &["s", "value", "tail_share", "tail_flagged"],
        &[vec![
            fmt_f64(sem.s),
            fmt_f64(sem.value),
            fmt_f64(sem.tail_share),
            (sem.tail_flagged as u8).to_string(),
        ]],
    )?;
    rep.info(format!(
        "seminorm L^{} = {}",
        fmt_f64(sem.s),
        fmt_f64(sem.value)
    ));
    rep.check_flag("gfield values nonnegative", field.values.iter().all(|v| *v >= 0.0));
    rep.check_flag("seminorm extent sufficient", !sem.tail_flagged);
    Ok(rep)
}

fn decompose(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let f = resolve_symbol(&cfg.symbol).map_err(config_failure)?;
    let disk = DiskRule::default_rule();
    let dec = ida::decompose(
        &disk,
        &f,
        cfg.q,
        cfg.t,
        cfg.extent.min(4.0),
        cfg.degree,
        ida::DecompRoute::BestFit,
    )?;
    let c = dec.certificates;
    let mut rng = DetRng::new(0x5005);
    let mut recon = 0.0f64;
    for _ in 0..1000 {
        let z = rng.in_disk(cfg.extent.min(4.0));
        recon = recon.max((dec.f1(z) + dec.f2(z) - f.eval(z)).norm());
    }
    let rows = vec![
        vec!["sup_dbar_f1".into(), fmt_f64(c.sup_dbar_f1)],
        vec!["sup_mean_dbar_f1".into(), fmt_f64(c.sup_mean_dbar_f1)],
        vec!["sup_mean_f2".into(), fmt_f64(c.sup_mean_f2)],
        vec!["ratio_dbar_f1".into(), fmt_f64(c.ratio_dbar_f1)],
        vec!["ratio_mean_dbar_f1".into(), fmt_f64(c.ratio_mean_dbar_f1)],
        vec!["ratio_mean_f2".into(), fmt_f64(c.ratio_mean_f2)],
        vec!["c_dec".into(), fmt_f64(c.c_dec)],
        vec!["probes".into(), c.probes.to_string()],
        vec!["skipped".into(), c.skipped.to_string()],
        vec!["reconstruction_max".into(), fmt_f64(recon)],
    ];
    write_csv(&cfg.out.join("decompose.csv"), &["quantity", "value"], &rows)?;
    rep.extra.insert("c_dec".into(), fmt_f64(c.c_dec));
    rep.check_flag("certificate ratios finite", c.c_dec.is_finite());
    rep.check_flag("local solves converged", !dec.flagged_fits);
    rep.check(
        "reconstruction max error",
        recon,
        suite::tol::DECOMP_RECONSTRUCTION,
    );
    Ok(rep)
}

fn hankel(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let f = resolve_symbol(&cfg.symbol).map_err(config_failure)?;
    let ctx = OperatorContext::new(cfg.alpha, cfg.basis_n)?;
    let gp = operators::assemble(&ctx, &f)?;
    let norm = operators::hankel_norm(&gp);
    let guarded = operators::hankel_norm_guarded(&gp, ctx.guarded());
    let hermitian_defect = gp.a.hermitian_defect();
    let min_eig = fockbench_core::linalg::hermitian_eigenvalues(&operators::hankel_gram(&gp))[0];
    let probe = operators::compact_probe(&ctx, &f, &cfg.rings, 12)?;
    let mut rows = Vec::new();
    for (radius, value) in probe.radii.iter().zip(&probe.values) {
        rows.push(vec![
            gp.symbol_id.clone(),
            gp.degree.to_string(),
            fmt_f64(gp.r_max),
            fmt_f64(norm),
            fmt_f64(*radius),
            fmt_f64(*value),
        ]);
    }
    write_csv(
        &cfg.out.join("hankel.csv"),
        &["symbol_id", "N", "R_max", "hankel_norm", "ring_radius", "probe_value"],
        &rows,
    )?;
    rep.info(format!(
        "hankel_norm = {} (guarded {})",
        fmt_f64(norm),
        fmt_f64(guarded)
    ));
    rep.extra.insert("hankel_norm".into(), fmt_f64(norm));
    rep.extra
        .insert("hankel_norm_guarded".into(), fmt_f64(guarded));
    rep.check("modulus gram hermitian defect", hermitian_defect, 1e-8);
    rep.check("hankel gram negativity", (-min_eig).max(0.0), 1e-6);
    Ok(rep)
}

fn berger_coburn(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let f = bounded_symbol(&cfg.symbol, cfg.f_bound, cfg.extent, &mut rep, "f")?;
    let ctx = OperatorContext::new(cfg.alpha, cfg.basis_n)?;
    let r = operators::berger_coburn_compare(&ctx, &f, &cfg.rings, 12)?;
    let mut rows = vec![
        vec!["hankel_norm_f".into(), fmt_f64(r.norm_f)],
        vec!["hankel_norm_conj".into(), fmt_f64(r.norm_conj)],
        vec!["norm_ratio".into(), fmt_f64(r.norm_ratio)],
        vec!["verdicts_agree".into(), (r.verdicts_agree as u8).to_string()],
    ];
    for ((radius, pf), pc) in r
        .probe_f
        .radii
        .iter()
        .zip(&r.probe_f.values)
        .zip(&r.probe_conj.values)
    {
        rows.push(vec![
            format!("probe_ring_{radius}"),
            format!("{};{}", fmt_f64(*pf), fmt_f64(*pc)),
        ]);
    }
    write_csv(&cfg.out.join("berger_coburn.csv"), &["quantity", "value"], &rows)?;
    rep.info(format!(
        "verdicts agree: {} (decaying f: {}, conj: {})",
        r.verdicts_agree, r.probe_f.decaying, r.probe_conj.decaying
    ));
    rep.check_flag(
        "norm ratio in band",
        r.norm_ratio >= suite::tol::CONJ_RATIO_LO && r.norm_ratio <= suite::tol::CONJ_RATIO_HI,
    );
    Ok(rep)
}

fn dbar_check(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let tol = cfg.tol.unwrap_or(suite::tol::APHI_RESIDUAL);
    let alpha = cfg.alpha;
    let s = FieldGrid::sample(4.8, 256, |z| -z * (-z.norm_sqr()).exp())?;
    let u = dbar::solve_aphi(&s, alpha)?;
    let residual = dbar::dbar_residual(&u, &s, 8);
    let weighted_c = u.weighted_l2(alpha) / s.weighted_l2(alpha);
    let local = dbar::local_dbar_solve(|_| c64(1.0, 0.0), c64(0.0, 0.0), 1.0, 128)?;
    let local_res = local.interior_residual(10);
    let mut rows = vec![
        vec!["solve_residual".into(), fmt_f64(residual)],
        vec!["weighted_norm_constant".into(), fmt_f64(weighted_c)],
        vec!["local_solve_residual".into(), fmt_f64(local_res)],
    ];
    let zg = Symbol::new("zgauss", |z| z * (-z.norm_sqr()).exp()).with_derivatives(
        |z| c64((1.0 - z.norm_sqr()) * (-z.norm_sqr()).exp(), 0.0),
        |z| -z * z * (-z.norm_sqr()).exp(),
    );
    for sexp in [1.5, 2.0, 4.0] {
        let cs = dbar::conjugate_gradient_bound_check(&zg, sexp, 6.0, 256)?;
        rows.push(vec![format!("conjugate_ratio_s_{sexp}"), fmt_f64(cs)]);
        rep.check_flag(&format!("C_s finite at s={sexp}"), cs.is_finite() && cs > 0.0);
    }
    write_csv(&cfg.out.join("dbar_check.csv"), &["check", "value"], &rows)?;
    rep.extra
        .insert("weighted_norm_constant".into(), fmt_f64(weighted_c));
    rep.check("solve residual", residual, tol);
    rep.check("local solve residual", local_res, tol);
    Ok(rep)
}

fn beurling(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let tol = cfg.tol.unwrap_or(suite::tol::BEURLING);
    let gauss = Symbol::new("gauss", |z| c64((-z.norm_sqr()).exp(), 0.0)).with_derivatives(
        |z| -z.conj() * (-z.norm_sqr()).exp(),
        |z| -z * (-z.norm_sqr()).exp(),
    );
    let err = dbar::beurling_identity_error(&gauss, 6.0, 512)?;
    // write the transformed field in the binary format plus a CSV export
    let dbar_f = FieldGrid::sample(6.0, 256, |z| -z * (-z.norm_sqr()).exp())?;
    let transformed = dbar::beurling(&dbar_f)?;
    fieldio::write_field(&cfg.out.join("beurling_output.fgrid"), &transformed)?;
    fieldio::export_csv(&cfg.out.join("beurling_output.csv"), &transformed)?;
    write_csv(
        &cfg.out.join("beurling.csv"),
        &["check", "value"],
        &[vec!["intertwining_identity_rel_l2".into(), fmt_f64(err)]],
    )?;
    rep.check("intertwining identity", err, tol);
    Ok(rep)
}

fn quantize(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let f = bounded_symbol(&cfg.symbol, cfg.f_bound, cfg.extent, &mut rep, "f")?;
    let g = bounded_symbol(&cfg.symbol_g, cfg.g_bound, cfg.extent, &mut rep, "g")?;
    let ctx = OperatorContext::new(cfg.alpha, cfg.basis_n)?;
    let schedule = ScaleSchedule::new(cfg.t_schedule.clone())?;
    let table = quantization::semiclassical_defect(&ctx, &f, &g, &schedule)?;
    let mut rows = Vec::new();
    for row in &table.rows {
        rows.push(vec![
            fmt_f64(row.t),
            fmt_f64(row.defect_norm),
            fmt_f64(row.hankel_f_bar_norm),
            fmt_f64(row.hankel_g_norm),
            fmt_f64(row.product_bound),
        ]);
    }
    write_csv(
        &cfg.out.join("defect.csv"),
        &["t", "defect_norm", "hankel_f_bar_norm", "hankel_g_norm", "product_bound"],
        &rows,
    )?;
    let first = table.first().defect_norm;
    let last = table.last().defect_norm;
    let ratio = if first > 0.0 { last / first } else { 0.0 };
    rep.info(format!(
        "defect final/initial = {} ({} -> {})",
        fmt_f64(ratio),
        fmt_f64(first),
        fmt_f64(last)
    ));
    rep.extra.insert("defect_ratio".into(), fmt_f64(ratio));
    for row in &table.rows {
        rep.check_flag(&format!("factorization bound at t={}", row.t), row.bound_satisfied);
        rep.check(
            &format!("matrix identity at t={}", row.t),
            row.identity_defect,
            suite::tol::DEFECT_IDENTITY,
        );
    }
    Ok(rep)
}

fn run_suite(cfg: &ExperimentConfig) -> Result<RunReport, RunFailure> {
    let mut rep = RunReport::new();
    let reports = suite::run_all(&cfg.filter)?;
    if reports.is_empty() {
        return Err(config_failure(format!(
            "filter '{}' matches no criterion",
            cfg.filter
        )));
    }
    let mut rows = Vec::new();
    for r in &reports {
        rep.info(r.summary());
        if !r.passed {
            rep.outcome = Outcome::CheckFailure;
        }
        for c in &r.checks {
            rows.push(vec![
                r.id.to_string(),
                r.name.to_string(),
                c.name.clone(),
                fmt_f64(c.observed),
                fmt_f64(c.threshold),
                (c.passed as u8).to_string(),
            ]);
        }
    }
    write_csv(
        &cfg.out.join("suite.csv"),
        &["criterion", "name", "check", "observed", "threshold", "passed"],
        &rows,
    )?;
    Ok(rep)
}

/// Deterministic xorshift generator for sampled checks.
struct DetRng(u64);

impl DetRng {
    fn new(seed: u64) -> Self {
        DetRng(seed.max(1))
    }

    fn unit(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn in_disk(&mut self, radius: f64) -> fockbench_core::Complex64 {
        let rho = radius * self.unit().sqrt();
        let th = 2.0 * std::f64::consts::PI * self.unit();
        c64(rho * th.cos(), rho * th.sin())
    }
}

/// Grid parameters recorded in every manifest.
pub fn grid_manifest(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    use fockbench_core::quadrature::PlaneRule;
    let mut m = BTreeMap::new();
    m.insert(
        "grid_r_max".into(),
        fmt_f64(PlaneRule::truncation_radius(cfg.alpha, cfg.basis_n)),
    );
    m.insert(
        "grid_n_radial".into(),
        PlaneRule::radial_count(cfg.alpha, cfg.basis_n).to_string(),
    );
    m.insert("grid_n_angular".into(), (4 * cfg.basis_n + 16).to_string());
    m.insert(
        "version".into(),
        env!("CARGO_PKG_VERSION").to_string(),
    );
    m
}

/// Write `path` if the directory is usable; used by main for the manifest.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    out.join("run.manifest")
}
