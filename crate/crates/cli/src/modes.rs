//! One function per mode; each returns the tables and fields of a run.

use std::collections::BTreeMap;
use std::path::Path;

use extremal_core::diagnostics::{invariance_at_achieved_rank, invariance_residual, spectral_reference};
use extremal_core::generators::{
    geometric_shift, harmonic_shift, jordan_block, random_dense, random_normal, rng, gaussian_vector,
    unit_vector,
};
use extremal_core::mc::{lemma1_scan, run_mc, TerminalStatus};
use extremal_core::probes::{
    classify_type, default_probes, feasibility_profile, shift_phenomenon, FeasibilityOptions,
    ShiftOptions, TypeVerdict,
};
use extremal_core::serial::OperatorDoc;
use extremal_core::solver::{calibrate_scale, epsilon_scan, solve_extremal};
use extremal_core::{
    decimal, normalize_operator, CMatrix, Cx, ExtremalState, HVector, LabError, OperatorSpec,
    PrecisionCtx,
};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use crate::config::{resolve_path, ExperimentConfig, Mode};
use crate::error::{lab_exit_code, CliError, EXIT_DEGENERATE, EXIT_OK, EXIT_SCAN_EXHAUSTED};

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(cols: &[&str]) -> Table {
        Table {
            header: cols.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub trace: Table,
    /// Long format `(series, x, y)`.
    pub plot: Vec<[String; 3]>,
    pub report: Vec<(String, String)>,
    pub result: BTreeMap<String, String>,
    pub status: String,
    pub exit: i32,
}

impl Artifacts {
    fn ok(trace: Table) -> Artifacts {
        Artifacts {
            trace,
            status: "ok".into(),
            exit: EXIT_OK,
            ..Artifacts::default()
        }
    }

    pub fn failure(e: &CliError) -> Artifacts {
        Artifacts {
            status: format!("failed: {e}"),
            exit: e.exit_code(),
            report: vec![("error".into(), e.to_string())],
            ..Artifacts::default()
        }
    }

    fn put(&mut self, key: &str, value: String) {
        self.result.insert(key.into(), value);
    }

    fn plot(&mut self, series: &str, x: String, y: String) {
        self.plot.push([series.into(), x, y]);
    }
}

fn f(x: &Float) -> String {
    decimal(x)
}

fn opt_f(x: &Option<Float>) -> String {
    x.as_ref().map(decimal).unwrap_or_else(|| "inf".into())
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn entries(re: &[f64], im: &[f64], len: usize, prec: u32) -> Result<Vec<Cx>, CliError> {
    if re.len() != len || !(im.is_empty() || im.len() == len) {
        return Err(CliError::config(format!(
            "operator: expected {len} entries, found re {} im {}",
            re.len(),
            im.len()
        )));
    }
    Ok((0..len)
        .map(|i| Cx::from_f64(prec, re[i], im.get(i).copied().unwrap_or(0.0)))
        .collect())
}

pub fn build_operator(cfg: &ExperimentConfig, base: &Path) -> Result<OperatorSpec, CliError> {
    let ctx = &cfg.ctx;
    let op = &cfg.operator;
    let prec = ctx.prec();
    let dim = op.dim;
    if dim == 0 && op.kind != "file" {
        return Err(CliError::config("operator.dim must be positive"));
    }
    let seed = op.seed.unwrap_or(cfg.seed);
    let t = match op.kind.as_str() {
        "harmonic-shift" => harmonic_shift(dim, ctx)?,
        "geometric-shift" => geometric_shift(dim, ctx)?,
        "random-dense" => random_dense(dim, seed, ctx)?,
        "random-normal" => random_normal(dim, seed, ctx)?,
        "jordan" => jordan_block(dim, op.lambda, ctx)?,
        "weighted-shift" => {
            let w = entries(&op.re, &op.im, dim.saturating_sub(1), prec)?;
            normalize_operator(&OperatorSpec::weighted_shift(w)?, ctx)?
        }
        "diagonal" => normalize_operator(&OperatorSpec::diagonal(entries(&op.re, &op.im, dim, prec)?)?, ctx)?,
        "dense" => {
            let e = entries(&op.re, &op.im, dim * dim, prec)?;
            normalize_operator(&OperatorSpec::dense(CMatrix::from_rows(dim, dim, e))?, ctx)?
        }
        "zero" => OperatorSpec::dense(CMatrix::zeros(dim, dim, prec))?,
        "file" => {
            let p = op.path.as_ref().ok_or_else(|| CliError::config("operator.path required for kind = \"file\""))?;
            let text = std::fs::read_to_string(resolve_path(base, p))?;
            OperatorDoc::from_toml(&text)
                .map_err(|e| CliError::config(format!("operator.path: {e}")))?
                .to_spec()?
                .with_prec(prec)
        }
        other => return Err(CliError::config(format!("operator.kind: unknown kind {other:?}"))),
    };
    Ok(t)
}

/// Draws from `g` only for the random specs.
pub fn build_vector(spec: &str, dim: usize, g: &mut ChaCha8Rng, prec: u32) -> Result<HVector, CliError> {
    let bad = || CliError::config(format!("vector spec {spec:?}"));
    match spec {
        "random" => Ok(gaussian_vector(g, dim, prec)),
        "unit" => Ok(unit_vector(g, dim, prec)),
        "band" => {
            if dim < 2 {
                return Err(bad());
            }
            let mut x = HVector::basis(dim, 0, prec).scale_real(&(Float::with_val(prec, 3).sqrt() / 2u32));
            x.axpy_real(&Float::with_val(prec, 0.5), &HVector::basis(dim, 1, prec));
            Ok(x)
        }
        s => {
            let k: usize = s.strip_prefix('e').and_then(|k| k.parse().ok()).ok_or_else(bad)?;
            if k >= dim {
                return Err(bad());
            }
            Ok(HVector::basis(dim, k, prec))
        }
    }
}

struct Setup {
    t: OperatorSpec,
    y: HVector,
    x0: HVector,
}

fn setup(cfg: &ExperimentConfig, base: &Path) -> Result<Setup, CliError> {
    let t = build_operator(cfg, base)?;
    let prec = cfg.ctx.prec();
    let mut g = rng(cfg.seed.wrapping_add(1));
    let y = build_vector(&cfg.vectors.y, t.dim(), &mut g, prec)?;
    let y = y.scale_real(&Float::with_val(prec, cfg.vectors.y_scale));
    let x0 = build_vector(&cfg.vectors.x0, t.dim(), &mut g, prec)?;
    Ok(Setup { t, y, x0 })
}

pub fn execute(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    cfg.ctx.validate().map_err(|e| CliError::config(format!("ctx: {e}")))?;
    let mode = cfg.mode.ok_or_else(|| CliError::config("mode not set"))?;
    match mode {
        Mode::Solve => solve(cfg, base),
        Mode::Scan => scan(cfg, base),
        Mode::Mc => mc(cfg, base),
        Mode::Classify => classify(cfg, base),
        Mode::Feasibility => feasibility(cfg, base),
        Mode::ShiftPhenomenon => shift(cfg),
        Mode::Diagnose => diagnose(cfg, base),
        Mode::Sweep => Err(CliError::config("sweep runs through the runner")),
    }
}

fn state_fields(a: &mut Artifacts, s: &ExtremalState) {
    a.put("eps", f(&s.eps));
    a.put("eps_theta", f(&s.eps_theta));
    a.put("scale_c", f(&s.c));
    a.put("band_value", f(&s.band_value()));
    a.put("a0_ratio", f(&s.a0_ratio()));
    a.put("tail_mass", f(&s.tail_mass()));
    a.put("ell_norm", f(&s.ell_primed_input().two_norm));
    a.put("degree", s.degree().to_string());
    a.put("residual_rel", f(&s.residual_rel));
    a.put("cond_estimate", f(&s.cond_estimate));
}

fn solve_state(t: &OperatorSpec, y: &HVector, x0: &HVector, eps: Option<f64>, ctx: &PrecisionCtx) -> Result<ExtremalState, CliError> {
    Ok(match eps {
        Some(e) => calibrate_scale(t, y, x0, e, ctx)?,
        None => solve_extremal(t, y, x0, ctx)?,
    })
}

fn solve(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    let s = setup(cfg, base)?;
    let st = solve_state(&s.t, &s.y, &s.x0, cfg.solve.eps, &cfg.ctx)?;
    let ell = st.ell_primed_input();
    let mut trace = Table::new(&["j", "a_re", "a_im", "b_re", "b_im", "kappa_re", "kappa_im", "ell_re", "ell_im"]);
    for j in 0..st.a.len() {
        let (a, b, k, l) = (&st.a[j], &st.b[j], &st.kappa[j], &ell.coeffs[j]);
        trace.push(vec![j.to_string(), f(&a.re), f(&a.im), f(&b.re), f(&b.im), f(&k.re), f(&k.im), f(&l.re), f(&l.im)]);
    }
    let mut out = Artifacts::ok(trace);
    for j in 0..st.a.len() {
        out.plot("abs_a", j.to_string(), f(&st.a[j].abs()));
        out.plot("abs_ell", j.to_string(), f(&ell.coeffs[j].abs()));
    }
    state_fields(&mut out, &st);
    Ok(out)
}

fn scan(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    let s = setup(cfg, base)?;
    let ctx = &cfg.ctx;
    let mut trace = Table::new(&["kind", "eps", "eps_theta", "ell_norm", "band_value"]);
    let mut out = Artifacts::default();
    if !cfg.scan.grid.is_empty() {
        let res = epsilon_scan(&s.t, &s.y, &s.x0, &cfg.scan.grid, ctx)?;
        for p in &res.points {
            let st = &p.state;
            trace.push(vec!["grid".into(), num(p.eps), f(&st.eps_theta), f(&p.ell.two_norm), f(&st.band_value())]);
            out.plot("eps_theta", num(p.eps), f(&st.eps_theta));
            out.plot("ell_norm", num(p.eps), f(&p.ell.two_norm));
        }
        out.put("lipschitz", opt_f(&res.lipschitz));
    }
    out.status = "ok".into();
    if cfg.scan.lemma {
        match lemma1_scan(&s.t, &s.y, &s.x0, &cfg.scan.lemma_options(), ctx) {
            Ok((eps, st)) => {
                trace.push(vec!["lemma".into(), num(eps), f(&st.eps_theta), f(&st.ell_primed_input().two_norm), f(&st.band_value())]);
                out.put("scan_eps", num(eps));
                state_fields(&mut out, &st);
            }
            Err(LabError::ScanExhausted { threshold, growth }) => {
                for (e, et, n) in &growth {
                    trace.push(vec!["exhausted".into(), num(*e), num(*et), num(*n), String::new()]);
                }
                out.put("threshold", num(threshold));
                out.status = "scan-exhausted".into();
                out.exit = EXIT_SCAN_EXHAUSTED;
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.trace = trace;
    Ok(out)
}

fn mc(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    let t = build_operator(cfg, base)?;
    let ctx = &cfg.ctx;
    let prec = ctx.prec();
    let mut g = rng(cfg.seed.wrapping_add(1));
    let u0 = build_vector(&cfg.mc.u0, t.dim(), &mut g, prec)?;
    let u1 = build_vector(&cfg.mc.u1, t.dim(), &mut g, prec)?;
    let mcfg = cfg.mc.to_config(u0, u1)?;
    let tr = run_mc(&t, &mcfg, ctx);
    let mut trace = Table::new(&[
        "row", "n", "phase", "eps", "eps_theta", "a0_ratio", "band_value", "restrictions", "beta", "scale",
        "step_mode", "r_norm", "band_slack", "decrease_slack", "dominance_slack", "restriction_residual",
        "mismatch", "dropped_rows",
    ]);
    let mut out = Artifacts::default();
    for (i, r) in tr.rows.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            r.n.to_string(),
            r.phase.name().into(),
            f(&r.eps),
            f(&r.eps_theta),
            f(&r.a0_ratio),
            f(&r.band_value),
            r.restrictions.to_string(),
        ];
        match &r.step {
            Some(s) => row.extend([
                num(s.beta),
                num(s.scale),
                format!("{:?}", s.mode).to_lowercase(),
                f(&s.r_norm),
                f(&s.band_slack),
                f(&s.decrease_slack),
                f(&s.dominance_slack),
                f(&s.restriction_residual),
                f(&s.mismatch),
                s.dropped_rows.to_string(),
            ]),
            None => row.extend(std::iter::repeat(String::new()).take(10)),
        }
        trace.push(row);
        out.plot("eps_theta", i.to_string(), f(&r.eps_theta));
        out.plot("band_value", i.to_string(), f(&r.band_value));
        out.plot("a0_ratio", i.to_string(), f(&r.a0_ratio));
    }
    out.trace = trace;
    out.put("terminal", tr.status.name());
    if let Some(e) = tr.scan_eps {
        out.put("scan_eps", num(e));
    }
    if let Some(e) = &tr.eps_theta_start {
        out.put("eps_theta_start", f(e));
    }
    if let Some(r) = tr.reduction() {
        out.put("reduction", num(r));
    }
    if let Some(s) = &tr.final_state {
        out.put("eps_theta", f(&s.eps_theta));
        out.put("band_value", f(&s.band_value()));
    }
    out.put("band_variation", f(&tr.band_variation));
    out.put("case_rounds", tr.case_rounds.to_string());
    out.put("case_cap_hit", tr.case_cap_hit.to_string());
    if let Some(w) = tr.case_i_witness {
        out.put("case_i_witness", w.to_string());
    }
    out.put("fallback_count", tr.fallback_count.to_string());
    out.put("fallback_window_misses", tr.fallback_window_misses.to_string());
    out.put("restrictions", tr.restrictions.len().to_string());
    out.put("steps", tr.step_rows().count().to_string());
    (out.status, out.exit) = match &tr.status {
        TerminalStatus::DegenerateUnresolved { .. } => (tr.status.name(), EXIT_DEGENERATE),
        TerminalStatus::Failed(e) => (tr.status.name(), lab_exit_code(e)),
        s => (s.name(), EXIT_OK),
    };
    Ok(out)
}

fn classify(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    let t = build_operator(cfg, base)?;
    let ctx = &cfg.ctx;
    let mut g = rng(cfg.seed.wrapping_add(1));
    let u0 = build_vector(&cfg.classify.u0, t.dim(), &mut g, ctx.prec())?;
    let probes = default_probes(&u0, cfg.classify.probes, cfg.seed, ctx);
    let tp = classify_type(&t, &u0, &probes, cfg.classify.n_max, cfg.classify.floor, ctx)?;
    let mut trace = Table::new(&["n", "delta"]);
    let mut out = Artifacts::default();
    for (n, d) in &tp.delta_table {
        trace.push(vec![n.to_string(), f(d)]);
        out.plot("delta", n.to_string(), f(d));
    }
    out.trace = trace;
    out.put("floor", f(&tp.floor));
    out.put("probes", tp.probes.len().to_string());
    match &tp.verdict {
        TypeVerdict::Type1Evidence => out.put("verdict", "type1".into()),
        TypeVerdict::Type2Evidence { m, witnesses } => {
            out.put("verdict", "type2".into());
            out.put("m", m.to_string());
            out.put("witnesses", witnesses.len().to_string());
        }
    }
    out.status = "ok".into();
    Ok(out)
}

fn feasibility(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    let s = setup(cfg, base)?;
    let ctx = &cfg.ctx;
    let prec = ctx.prec();
    let dim = s.t.dim();
    let mut g = rng(cfg.seed.wrapping_add(2));
    let y0 = build_vector(&cfg.feasibility.y0, dim, &mut g, prec)?;
    let family: Vec<HVector> = (1..dim).map(|k| HVector::basis(dim, k, prec)).collect();
    let opts = FeasibilityOptions {
        blowup: cfg.feasibility.blowup,
        eps_target: cfg.feasibility.eps_target,
    };
    let prof = feasibility_profile(&s.t, &s.x0, &y0, &family, &cfg.feasibility.grid, &opts, ctx)?;
    let mut trace = Table::new(&["l", "n", "min_norm"]);
    let mut out = Artifacts::default();
    for (k, l) in prof.l_grid.iter().enumerate() {
        for (n, v) in prof.per_n[k].iter().enumerate() {
            trace.push(vec![num(*l), (n + 1).to_string(), opt_f(v)]);
        }
        out.plot("m_of_l", num(*l), opt_f(&prof.m_of_l[k]));
    }
    out.trace = trace;
    out.put("monotone", prof.monotone.to_string());
    out.put("perturbation_ratio", num(prof.perturbation_ratio));
    if let Some(l0) = prof.l0_estimate {
        out.put("l0_estimate", num(l0));
    }
    out.status = "ok".into();
    Ok(out)
}

pub fn shift_weights(kind: &str, count: usize, ctx: &PrecisionCtx) -> Result<Vec<Cx>, CliError> {
    let prec = ctx.prec();
    let inv_k = Float::with_val(prec, ctx.norm_scale_k).recip();
    match kind {
        "geometric" => Ok((0..count).map(|n| Cx::from_real(Float::with_val(prec, &inv_k >> n as u32))).collect()),
        "harmonic" => Ok((0..count).map(|n| Cx::from_real(Float::with_val(prec, &inv_k / (n as u32 + 1)))).collect()),
        other => Err(CliError::config(format!("shift.weights: unknown family {other:?}"))),
    }
}

fn shift(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let sc = &cfg.shift;
    if sc.n_min > sc.n_max {
        return Err(CliError::config("shift.n_min exceeds shift.n_max"));
    }
    let w = shift_weights(&sc.weights, sc.n_max, &cfg.ctx)?;
    let opts = ShiftOptions {
        factor: sc.factor,
        threshold: sc.threshold,
    };
    let res = shift_phenomenon(&w, sc.n_min..=sc.n_max, &opts, &cfg.ctx)?;
    let mut trace = Table::new(&["n", "min_norm"]);
    let mut out = Artifacts::default();
    for (n, v) in &res {
        trace.push(vec![n.to_string(), opt_f(v)]);
        out.plot("min_norm", n.to_string(), opt_f(v));
    }
    out.trace = trace;
    if let (Some((_, Some(a))), Some((_, Some(b)))) = (res.first(), res.last()) {
        if !a.is_zero() {
            out.put("growth", f(&Float::with_val(a.prec(), b / a)));
        }
    }
    let nondecreasing = res.windows(2).all(|w| match (&w[0].1, &w[1].1) {
        (Some(a), Some(b)) => b >= a,
        (_, None) => true,
        (None, Some(_)) => false,
    });
    out.put("nondecreasing", nondecreasing.to_string());
    out.status = "ok".into();
    Ok(out)
}

fn diagnose(cfg: &ExperimentConfig, base: &Path) -> Result<Artifacts, CliError> {
    let s = setup(cfg, base)?;
    let ctx = &cfg.ctx;
    let st = solve_state(&s.t, &s.y, &s.x0, cfg.diagnose.eps, ctx)?;
    let cand = st.candidate();
    let reference = match s.t.kind {
        extremal_core::OperatorKind::Dense(_) => Some(spectral_reference(&s.t, ctx)?),
        _ => None,
    };
    let k_max = cfg.diagnose.k_max.unwrap_or(s.t.dim()).min(s.t.dim());
    let mut trace = Table::new(&["k", "rho", "band_distance", "almost_cyclicity", "angle"]);
    let mut out = Artifacts::default();
    for k in 1..=k_max {
        let rep = match invariance_residual(&s.t, &cand, k, &s.x0, ctx) {
            Ok(r) => r,
            Err(LabError::RankDeficient { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        let angle = reference.as_ref().and_then(|r| r.nearest_angle(&rep.basis));
        trace.push(vec![
            k.to_string(),
            f(&rep.rho),
            f(&rep.band_distance),
            f(&rep.almost_cyclicity),
            angle.map(num).unwrap_or_default(),
        ]);
        out.plot("rho", k.to_string(), f(&rep.rho));
    }
    let at = invariance_at_achieved_rank(&s.t, &cand, &s.x0, ctx)?;
    out.trace = trace;
    out.put("achieved_rank", at.krylov_rank.to_string());
    out.put("rho_at_rank", f(&at.rho));
    if let Some(a) = reference.as_ref().and_then(|r| r.nearest_angle(&at.basis)) {
        out.put("angle_at_rank", num(a));
    }
    state_fields(&mut out, &st);
    out.status = "ok".into();
    Ok(out)
}
