//! The driver loop.

use rug::Float;

use super::lemmas::{
    case_dichotomy, dominance_renormalize, lemma1_scan, CaseOutcome, DominanceOptions,
    DominanceReport, LemmaOptions,
};
use super::step::{
    autocorrelation_witnesses, build_restriction, fallback_ab_solve, select_step, McStep,
    RestrictionSet, StepMode, StepOptions,
};
use crate::error::{LabError, LabResult};
use crate::linalg::HVector;
use crate::operator::OperatorSpec;
use crate::precision::PrecisionCtx;
use crate::solver::ExtremalState;

#[derive(Clone, Debug)]
pub struct McConfig {
    pub u0: HVector,
    pub u1: HVector,
    /// Use `x0 = u0/2 + (sqrt 3/2) u1` instead of `(sqrt 3/2) u0 + u1/2`.
    pub summary_x0: bool,
    /// `y0' = y0_scale u0`
    pub y0_scale: f64,
    pub lemma: LemmaOptions,
    pub dominance: DominanceOptions,
    /// Cap on Case II rounds before the step loop starts regardless.
    pub case_cap: usize,
    pub beta: f64,
    pub beta_late: f64,
    /// Switch to `beta_late` once `eps_theta` falls below this.
    pub beta_switch: f64,
    pub max_iters: usize,
    /// Stop once `eps_theta <= stop_factor * (eps_theta)_0`.
    pub stop_factor: Option<f64>,
    /// Install restriction `k` when `eps_theta` falls below `milestones[k]`.
    pub milestones: Vec<f64>,
    pub n0: usize,
    pub witness_j_max: usize,
    pub step: StepOptions,
}

impl McConfig {
    pub fn new(u0: HVector, u1: HVector) -> McConfig {
        McConfig {
            u0,
            u1,
            summary_x0: false,
            y0_scale: 3f64.sqrt() / 2.0,
            lemma: LemmaOptions::default(),
            dominance: DominanceOptions::default(),
            case_cap: 25,
            beta: 0.05,
            beta_late: 0.01,
            beta_switch: 1e-6,
            max_iters: 200,
            stop_factor: None,
            milestones: vec![1e-2, 1e-4, 1e-6, 1e-8],
            n0: 1,
            witness_j_max: 4,
            step: StepOptions::default(),
        }
    }

    pub fn x0(&self) -> HVector {
        let prec = self.u0.prec();
        let s = Float::with_val(prec, 3).sqrt() / 2u32;
        let h = Float::with_val(prec, 0.5);
        let (c0, c1) = if self.summary_x0 { (h, s) } else { (s, h) };
        let mut x = self.u0.scale_real(&c0);
        x.axpy_real(&c1, &self.u1);
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Scan,
    Renormalize,
    CaseII,
    Step,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Scan => "scan",
            Phase::Renormalize => "renormalize",
            Phase::CaseII => "case2",
            Phase::Step => "step",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub n: usize,
    pub phase: Phase,
    pub eps_theta: Float,
    pub eps: Float,
    pub a0_ratio: Float,
    pub band_value: Float,
    pub restrictions: usize,
    pub step: Option<StepRecord>,
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub beta: f64,
    pub scale: f64,
    pub mode: StepMode,
    pub r_norm: Float,
    pub band_slack: Float,
    pub decrease_slack: Float,
    pub dominance_slack: Float,
    pub restriction_residual: Float,
    /// Largest `|predicted - actual|` over band, `eps_theta` and `a_0`.
    pub mismatch: Float,
    pub dropped_rows: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TerminalStatus {
    Completed,
    TargetReached,
    LineSearchFail,
    DegenerateUnresolved { residual: f64, threshold: f64 },
    Failed(LabError),
}

impl TerminalStatus {
    pub fn name(&self) -> String {
        match self {
            TerminalStatus::Completed => "completed".into(),
            TerminalStatus::TargetReached => "target-reached".into(),
            TerminalStatus::LineSearchFail => "line-search-fail".into(),
            TerminalStatus::DegenerateUnresolved { .. } => "degenerate-unresolved".into(),
            TerminalStatus::Failed(e) => format!("failed: {e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct McTrace {
    pub rows: Vec<TraceRow>,
    pub status: TerminalStatus,
    pub scan_eps: Option<f64>,
    pub dominance: Option<DominanceReport>,
    pub case_rounds: usize,
    pub case_cap_hit: bool,
    pub case_i_witness: Option<usize>,
    /// `eps_theta` when the step loop starts.
    pub eps_theta_start: Option<Float>,
    /// Sum of `|band change|` over accepted steps.
    pub band_variation: Float,
    pub fallback_count: usize,
    /// Fallback solves whose `B` fell outside the magnitude window.
    pub fallback_window_misses: usize,
    pub restrictions: RestrictionSet,
    pub final_state: Option<ExtremalState>,
}

impl McTrace {
    pub fn candidate(&self) -> Option<HVector> {
        self.final_state.as_ref().map(|s| s.candidate())
    }

    pub fn step_rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.phase == Phase::Step)
    }

    /// Smallest `eps_theta` seen in the step loop over its starting value.
    pub fn reduction(&self) -> Option<f64> {
        let start = self.eps_theta_start.as_ref()?;
        let min = self.step_rows().map(|r| r.eps_theta.to_f64()).fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            Some(min / start.to_f64())
        } else {
            None
        }
    }
}

fn row(n: usize, phase: Phase, s: &ExtremalState, restrictions: usize, step: Option<StepRecord>) -> TraceRow {
    TraceRow {
        n,
        phase,
        eps_theta: s.eps_theta.clone(),
        eps: s.eps.clone(),
        a0_ratio: s.a0_ratio(),
        band_value: s.band_value(),
        restrictions,
        step,
    }
}

fn record(step: &McStep) -> StepRecord {
    let prec = step.state.prec();
    let diff = |a: &Float, b: &Float| Float::with_val(prec, a - b).abs();
    let mut mismatch = diff(&step.predicted.band, &step.actual.band);
    for m in [
        diff(&step.predicted.eps_theta, &step.actual.eps_theta),
        diff(&step.predicted.a0, &step.actual.a0),
    ] {
        if m > mismatch {
            mismatch = m;
        }
    }
    StepRecord {
        beta: step.beta,
        scale: step.scale,
        mode: step.mode,
        r_norm: step.r.two_norm.clone(),
        band_slack: step.band_slack.clone(),
        decrease_slack: step.decrease_slack.clone(),
        dominance_slack: step.dominance_slack.clone(),
        restriction_residual: step.restriction_residual.clone(),
        mismatch,
        dropped_rows: step.dropped_rows,
    }
}

/// Starting scan, dominance renormalization, the Case loop and then the
/// step loop, recording every stage.
pub fn run_mc(t: &OperatorSpec, cfg: &McConfig, ctx: &PrecisionCtx) -> McTrace {
    let prec = ctx.prec();
    let mut trace = McTrace {
        rows: Vec::new(),
        status: TerminalStatus::Completed,
        scan_eps: None,
        dominance: None,
        case_rounds: 0,
        case_cap_hit: false,
        case_i_witness: None,
        eps_theta_start: None,
        band_variation: Float::new(prec),
        fallback_count: 0,
        fallback_window_misses: 0,
        restrictions: RestrictionSet::default(),
        final_state: None,
    };
    if let Err(e) = drive(t, cfg, ctx, &mut trace) {
        trace.status = match e {
            LabError::LineSearchFail => TerminalStatus::LineSearchFail,
            LabError::NotDegenerate { residual, threshold } => {
                TerminalStatus::DegenerateUnresolved { residual, threshold }
            }
            e => TerminalStatus::Failed(e),
        };
    }
    trace
}

fn drive(t: &OperatorSpec, cfg: &McConfig, ctx: &PrecisionCtx, trace: &mut McTrace) -> LabResult<()> {
    let prec = ctx.prec();
    let x0 = cfg.x0().with_prec(prec);
    let y0 = cfg.u0.with_prec(prec).scale_real(&Float::with_val(prec, cfg.y0_scale));
    let (eps, mut state) = lemma1_scan(t, &y0, &x0, &cfg.lemma, ctx)?;
    trace.scan_eps = Some(eps);
    trace.rows.push(row(0, Phase::Scan, &state, 0, None));
    trace.final_state = Some(state.clone());

    let (renorm, report) = dominance_renormalize(t, &state, &cfg.dominance, ctx)?;
    state = renorm;
    trace.dominance = Some(report);
    trace.rows.push(row(0, Phase::Renormalize, &state, 0, None));
    trace.final_state = Some(state.clone());

    loop {
        if trace.case_rounds >= cfg.case_cap {
            trace.case_cap_hit = true;
            break;
        }
        match case_dichotomy(t, &state, ctx)? {
            CaseOutcome::CaseI { witness, .. } => {
                trace.case_i_witness = Some(witness);
                break;
            }
            CaseOutcome::CaseII { state: next, .. } => {
                state = next;
                trace.case_rounds += 1;
                trace.rows.push(row(trace.case_rounds, Phase::CaseII, &state, 0, None));
                trace.final_state = Some(state.clone());
            }
        }
    }

    let et0 = state.eps_theta.clone();
    trace.eps_theta_start = Some(et0.clone());
    let stop = cfg.stop_factor.map(|f| Float::with_val(prec, &et0 * f));
    for n in 1..=cfg.max_iters {
        let installed = trace.restrictions.len();
        if installed < cfg.milestones.len() && state.eps_theta < cfg.milestones[installed] {
            install_restriction(t, &state, cfg, ctx, &mut trace.restrictions)?;
        }
        let mut opts = cfg.step.clone();
        opts.beta = if state.eps_theta < cfg.beta_switch { cfg.beta_late } else { cfg.beta };
        let step = match select_step(t, &state, &trace.restrictions, &opts, ctx) {
            Ok(s) => s,
            Err(LabError::Degenerate { .. }) => {
                let rep = fallback_ab_solve(&state, ctx)?;
                trace.fallback_count += 1;
                if !rep.b_in_window {
                    trace.fallback_window_misses += 1;
                }
                opts.mode = StepMode::Reduced;
                select_step(t, &state, &trace.restrictions, &opts, ctx)?
            }
            Err(e) => return Err(e),
        };
        trace.band_variation += Float::with_val(prec, step.actual.band.abs_ref());
        let rec = record(&step);
        state = step.state;
        trace.rows.push(row(n, Phase::Step, &state, trace.restrictions.len(), Some(rec)));
        trace.final_state = Some(state.clone());
        if let Some(s) = &stop {
            if state.eps_theta <= *s {
                trace.status = TerminalStatus::TargetReached;
                return Ok(());
            }
        }
    }
    Ok(())
}

fn install_restriction(
    t: &OperatorSpec,
    state: &ExtremalState,
    cfg: &McConfig,
    ctx: &PrecisionCtx,
    set: &mut RestrictionSet,
) -> LabResult<()> {
    let w = autocorrelation_witnesses(t, &state.y_prime, cfg.n0, cfg.witness_j_max)?;
    let p = ctx.exponents.p_restrict + set.len() as f64;
    let v = build_restriction(t, &state.y_prime, &w.delta2, w.j1, w.j2, p);
    set.delta1 = w.delta1.to_f64();
    set.delta2 = w.delta2.to_f64();
    set.j1 = w.j1;
    set.j2 = w.j2;
    set.exponents.push(p);
    set.w_list.push(v);
    Ok(())
}
