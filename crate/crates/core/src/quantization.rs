//! Scaled composition defects: symbol dilation reduces the scale-t Toeplitz
//! family to scale 1, where the defect `T_f T_g - T_{fg}` and its Hankel
//! factorization are computed on the truncated basis over a decreasing scale
//! schedule.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::ida;
use crate::linalg::spectral_norm;
use crate::math;
use crate::operators::{
    assemble, hankel_cross_gram, hankel_norm, hankel_norm_guarded, OperatorContext,
};
use crate::quadrature::DiskRule;
use crate::symbol::Symbol;

/// Strictly decreasing scales in (0, 1], floored at 0.01 (dilated-symbol
/// resolution guard).
#[derive(Clone, Debug)]
pub struct ScaleSchedule {
    pub values: Vec<f64>,
}

impl ScaleSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("scale schedule must be nonempty"));
        }
        if values.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(invalid("scales must lie in (0, 1]"));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("scales must be strictly decreasing"));
        }
        if *values.last().expect("nonempty") < 0.01 {
            return Err(Error::ResolutionGuard {
                min_r: *values.last().expect("nonempty"),
                guard: 0.01,
            });
        }
        Ok(ScaleSchedule { values })
    }

    /// The default schedule used by the experiments: 1, 0.5, 0.25, 0.1.
    pub fn default_schedule() -> Self {
        ScaleSchedule {
            values: alloc::vec![1.0, 0.5, 0.25, 0.1],
        }
    }
}

/// `z -> f(z sqrt(t))`; derivatives scale by `sqrt(t)`, the bound carries over.
pub fn dilate_symbol(f: &Symbol, t: f64) -> Result<Symbol> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid("dilation scale must lie in (0, 1]"));
    }
    let root = math::sqrt(t);
    let base = f.clone();
    let mut out = Symbol::new(
        alloc::format!("{}@t={t}", f.name),
        move |z| base.eval(z * root),
    );
    if f.has_derivatives() {
        let (b1, b2) = (f.clone(), f.clone());
        out = out.with_derivatives(
            move |z| root * b1.d_z(z * root).expect("checked"),
            move |z| root * b2.d_zbar(z * root).expect("checked"),
        );
    }
    if let Some(b) = f.sup_bound() {
        out = out.with_bound(b);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DefectRow {
    pub t: f64,
    /// Spectral norm of `T_{f_t} T_{g_t} - T_{f_t g_t}` on the guarded block.
    pub defect_norm: f64,
    pub hankel_f_bar_norm: f64,
    pub hankel_g_norm: f64,
    /// `hankel_f_bar_norm * hankel_g_norm`.
    pub product_bound: f64,
    /// Factorization bound `defect <= product + 1e-6`.
    pub bound_satisfied: bool,
    /// Max entry of `(T_fT_g - T_{fg}) - (H_{conj f})^* H_g` on the guarded
    /// block.
    pub identity_defect: f64,
}

#[derive(Clone, Debug)]
pub struct DefectTable {
    pub rows: Vec<DefectRow>,
    pub f_id: alloc::string::String,
    pub g_id: alloc::string::String,
}

impl DefectTable {
    pub fn first(&self) -> &DefectRow {
        self.rows.first().expect("nonempty schedule")
    }

    pub fn last(&self) -> &DefectRow {
        self.rows.last().expect("nonempty schedule")
    }
}

/// Composition defect over the schedule, all computed at scale 1 through
/// dilation. Both symbols must be flagged bounded.
pub fn semiclassical_defect(
    ctx: &OperatorContext,
    f: &Symbol,
    g: &Symbol,
    schedule: &ScaleSchedule,
) -> Result<DefectTable> {
    for s in [f, g] {
        if !s.is_bounded() {
            return Err(Error::UnboundedSymbol {
                symbol: s.name.clone(),
                op: "semiclassical_defect",
            });
        }
    }
    let guard = ctx.defect_guard();
    let mut rows = Vec::with_capacity(schedule.values.len());
    for &t in &schedule.values {
        let ft = dilate_symbol(f, t)?;
        let gt = dilate_symbol(g, t)?;
        let fgt = ft.product_values(&gt);
        let t_f = assemble(ctx, &ft)?.t;
        let gp_g = assemble(ctx, &gt)?;
        let t_fg = assemble(ctx, &fgt)?.t;
        let gp_fbar = assemble(ctx, &ft.conj())?;
        let defect = t_f.matmul(&gp_g.t).sub(&t_fg);
        let defect_block = defect.principal_block(guard);
        let defect_norm = spectral_norm(&defect_block);
        // guarded norms: the full block inflates them with top-row truncation
        // leakage for dilated symbols, and Cauchy-Schwarz on the restricted
        // factors keeps the product a valid defect bound
        let hankel_f_bar_norm = hankel_norm_guarded(&gp_fbar, guard);
        let hankel_g_norm = hankel_norm_guarded(&gp_g, guard);
        let product_bound = hankel_f_bar_norm * hankel_g_norm;
        // Matrix identity: T_f T_g - T_fg = (H_{conj f})^* H_g, checked
        // against the independently quadratured residual cross Gram.
        let cross = hankel_cross_gram(ctx, &ft, &gt, &gp_fbar.t, &gp_g.t)?;
        let mut identity_defect = 0.0f64;
        for j in 0..guard {
            for k in 0..guard {
                // defect here is T_fT_g - T_fg = -(T_fg - T_fT_g)
                let lhs = -defect[(j, k)];
                identity_defect = identity_defect.max((lhs - cross[(j, k)]).norm());
            }
        }
        rows.push(DefectRow {
            t,
            defect_norm,
            hankel_f_bar_norm,
            hankel_g_norm,
            product_bound,
            bound_satisfied: defect_norm <= product_bound + 1e-6,
            identity_defect,
        });
    }
    Ok(DefectTable {
        rows,
        f_id: f.name.clone(),
        g_id: g.name.clone(),
    })
}

/// Hankel norm of the dilated symbol (equals the scale-t Hankel norm by
/// unitarity of the dilation).
pub fn hankel_scale_norm(ctx: &OperatorContext, f: &Symbol, t: f64) -> Result<f64> {
    let ft = dilate_symbol(f, t)?;
    Ok(hankel_norm(&assemble(ctx, &ft)?))
}

/// Verdict bundle: the small-scale scan of `G(conj f)` and `MO(f)`, plus the
/// defect decay over a panel of companion symbols.
#[derive(Clone, Debug)]
pub struct QuantizationVerdict {
    pub scan: ida::SmallScaleScan,
    /// Defect tables per panel symbol.
    pub tables: Vec<DefectTable>,
    /// sup G_{2,r}(conj f) decays as r -> 0.
    pub vda_star_conj: bool,
    /// sup MO_{2,r}(f) decays as r -> 0.
    pub vmo: bool,
    /// Some(true): every panel defect decayed below 0.25x its initial value.
    /// Some(false): some panel defect stayed above 0.5x. None: in between
    /// (the declared indeterminate band).
    pub defect_verdict: Option<bool>,
    /// All three verdicts agree.
    pub consistent: bool,
}

/// Classify a bounded symbol against the semiclassical limit: scan verdicts
/// and the defect table over the g-panel.
#[allow(clippy::too_many_arguments)]
pub fn quantization_classify(
    ctx: &OperatorContext,
    disk: &DiskRule,
    f: &Symbol,
    panel: &[Symbol],
    schedule: &ScaleSchedule,
    scan_radii: &[f64],
    scan_grid: &[Complex64],
    degree: usize,
) -> Result<QuantizationVerdict> {
    if !f.is_bounded() {
        return Err(Error::UnboundedSymbol {
            symbol: f.name.clone(),
            op: "quantization_classify",
        });
    }
    // MO is conjugation-invariant, so one scan of conj(f) serves both
    // verdicts.
    let scan = ida::small_scale_scan(disk, &f.conj(), scan_radii, scan_grid, degree)?;
    let vda_star_conj = scan.vda_star_consistent;
    let vmo = scan.vmo_consistent;
    let mut tables = Vec::with_capacity(panel.len());
    for g in panel {
        tables.push(semiclassical_defect(ctx, f, g, schedule)?);
    }
    let mut all_decay = true;
    let mut some_persist = false;
    for t in &tables {
        let first = t.first().defect_norm;
        let last = t.last().defect_norm;
        if first <= 1e-12 {
            continue; // trivially zero defect (constant symbols)
        }
        if !(last < 0.25 * first) {
            all_decay = false;
        }
        if last >= 0.5 * first {
            some_persist = true;
        }
    }
    let defect_verdict = if all_decay {
        Some(true)
    } else if some_persist {
        Some(false)
    } else {
        None
    };
    let consistent = match defect_verdict {
        Some(v) => v == vda_star_conj && v == vmo,
        None => false,
    };
    Ok(QuantizationVerdict {
        scan,
        tables,
        vda_star_conj,
        vmo,
        defect_verdict,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::geometry::make_lattice;
    use crate::symbol::corpus;

    #[test]
    fn schedule_validation() {
        assert!(ScaleSchedule::new(alloc::vec![]).is_err());
        assert!(ScaleSchedule::new(alloc::vec![1.0, 1.0]).is_err());
        assert!(ScaleSchedule::new(alloc::vec![0.5, 1.0]).is_err());
        assert!(ScaleSchedule::new(alloc::vec![1.5, 0.5]).is_err());
        assert!(matches!(
            ScaleSchedule::new(alloc::vec![1.0, 0.001]),
            Err(Error::ResolutionGuard { .. })
        ));
        assert!(ScaleSchedule::new(alloc::vec![1.0, 0.1]).is_ok());
    }

    #[test]
    fn dilation_examples() {
        let f = corpus::sinre();
        let id = dilate_symbol(&f, 1.0).unwrap();
        let z = c64(1.2, -0.4);
        assert_eq!(id.eval(z), f.eval(z));
        // t = 0.25: sin(0.5 Re z)
        let q = dilate_symbol(&f, 0.25).unwrap();
        assert!((q.eval(z).re - (0.5 * z.re).sin()).abs() < 1e-15);
        assert_eq!(q.sup_bound(), Some(1.0));
        // derivatives scale by sqrt(t)
        let dz = q.d_z(z).unwrap();
        assert!((dz - 0.5 * f.d_z(z * 0.5).unwrap()).norm() < 1e-15);
        assert!(dilate_symbol(&f, 0.0).is_err());
        // phase keeps its unit bound
        let p = dilate_symbol(&corpus::phase(), 0.3).unwrap();
        assert_eq!(p.sup_bound(), Some(1.0));
    }

    #[test]
    fn dilated_hankel_norm_of_zbar_scales_like_sqrt_t() {
        let ctx = OperatorContext::new(1.0, 40).unwrap();
        for t in [1.0, 0.5, 0.25] {
            let n = hankel_scale_norm(&ctx, &corpus::zbar(), t).unwrap();
            let want = t.sqrt();
            assert!((n - want).abs() < 0.05 * want, "t={t}: {n} vs {want}");
        }
    }

    #[test]
    fn constant_symbols_have_zero_defect() {
        let ctx = OperatorContext::new(1.0, 16).unwrap();
        let c = Symbol::new("const", |_| c64(0.7, 0.1)).with_bound(0.8);
        let table = semiclassical_defect(
            &ctx,
            &c,
            &corpus::sinre(),
            &ScaleSchedule::new(alloc::vec![1.0, 0.1]).unwrap(),
        )
        .unwrap();
        for row in &table.rows {
            assert!(row.defect_norm < 1e-8, "{row:?}");
            assert!(row.bound_satisfied);
        }
    }

    #[test]
    fn defect_rejects_unbounded_symbols() {
        let ctx = OperatorContext::new(1.0, 12).unwrap();
        assert!(matches!(
            semiclassical_defect(
                &ctx,
                &corpus::zbar(),
                &corpus::sinre(),
                &ScaleSchedule::default_schedule()
            ),
            Err(Error::UnboundedSymbol { .. })
        ));
    }

    #[test]
    fn factorization_and_identity_hold_along_the_schedule() {
        let ctx = OperatorContext::new(1.0, 24).unwrap();
        let table = semiclassical_defect(
            &ctx,
            &corpus::sinre(),
            &corpus::phase(),
            &ScaleSchedule::new(alloc::vec![1.0, 0.25]).unwrap(),
        )
        .unwrap();
        for row in &table.rows {
            assert!(row.bound_satisfied, "{row:?}");
            assert!(row.identity_defect < 1e-6, "{row:?}");
        }
    }

    #[test]
    fn dilation_identity_against_direct_scale_assembly() {
        // Assembling T at scale t directly (weight alpha/t, its own basis and
        // rule) must equal the dilated assembly at scale 1, entrywise.
        let t = 0.25;
        let degree = 16;
        let f = corpus::sinre();
        let ctx1 = OperatorContext::new(1.0, degree).unwrap();
        let dilated = assemble(&ctx1, &dilate_symbol(&f, t).unwrap()).unwrap().t;
        let ctx_t = OperatorContext::new(1.0 / t, degree).unwrap();
        let direct = assemble(&ctx_t, &f).unwrap().t;
        let mut worst = 0.0f64;
        for j in 0..=degree {
            for k in 0..=degree {
                worst = worst.max((dilated[(j, k)] - direct[(j, k)]).norm());
            }
        }
        assert!(worst < 1e-6, "entrywise gap {worst}");
    }

    #[test]
    fn classify_sinre_is_positive_on_all_three_verdicts() {
        let ctx = OperatorContext::new(1.0, 32).unwrap();
        let disk = DiskRule::default_rule();
        let grid: Vec<Complex64> = make_lattice(1.0, 4.0)
            .unwrap()
            .points
            .iter()
            .cloned()
            .filter(|z| z.norm() <= 4.0)
            .collect();
        let v = quantization_classify(
            &ctx,
            &disk,
            &corpus::sinre(),
            &[corpus::sinre()],
            &ScaleSchedule::new(alloc::vec![1.0, 0.1]).unwrap(),
            &[1.0, 0.5, 0.25, 0.125],
            &grid,
            4,
        )
        .unwrap();
        assert!(v.vmo, "{:?}", v.scan.rows);
        assert!(v.vda_star_conj);
        assert_eq!(v.defect_verdict, Some(true));
        assert!(v.consistent);
    }

    #[test]
    fn classify_constant_is_trivially_positive() {
        let ctx = OperatorContext::new(1.0, 16).unwrap();
        let disk = DiskRule::default_rule();
        let grid: Vec<Complex64> = make_lattice(1.0, 3.0)
            .unwrap()
            .points
            .iter()
            .cloned()
            .filter(|z| z.norm() <= 3.0)
            .collect();
        let c = Symbol::new("const", |_| c64(1.0, 0.0)).with_bound(1.0);
        let v = quantization_classify(
            &ctx,
            &disk,
            &c,
            &[corpus::sinre()],
            &ScaleSchedule::new(alloc::vec![1.0, 0.1]).unwrap(),
            &[0.8, 0.4, 0.2, 0.1],
            &grid,
            4,
        )
        .unwrap();
        assert!(v.vmo && v.vda_star_conj);
        assert_eq!(v.defect_verdict, Some(true));
        assert!(v.consistent);
    }
}
