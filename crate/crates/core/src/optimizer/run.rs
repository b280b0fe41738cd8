use log::{debug, info, warn};

use super::design::{axis_aligned_direction, DesignField, InitDirection, ThicknessBounds};
use super::oc::{default_bracket, find_lambda, kkt_residuals, KktReport};
use super::rotate::rotate_fibers;
use crate::error::{Error, Result};
use crate::fem::{MembraneState, StateProblem};

/// Thicknesses within this fraction of the bound range count as sitting on the bound.
pub const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationSettings {
    /// Damping exponent of the OC update, in `(0, 1]`.
    pub eta: f64,
    /// Relative compliance change that ends a sizing loop.
    pub obj_tol: f64,
    /// Every point must satisfy `|cos| >= dir_tol` between successive directions.
    pub dir_tol: f64,
    pub max_oc_iters: usize,
    pub max_rotation_updates: usize,
    /// Multiplier bracket relative to the mean sensitivity.
    pub lambda_bracket: (f64, f64),
    pub tie_tol: f64,
    /// Allowed relative compliance increase between sizing updates.
    pub monotonicity_slack: f64,
    /// Abort on a compliance increase instead of logging a warning.
    pub abort_on_increase: bool,
}

impl Default for OptimizationSettings {
    fn default() -> Self {
        Self {
            eta: 0.5,
            obj_tol: 1e-5,
            dir_tol: 0.999,
            max_oc_iters: 200,
            max_rotation_updates: 30,
            lambda_bracket: (1e-12, 1e12),
            tie_tol: 1e-6,
            monotonicity_slack: 1e-9,
            abort_on_increase: true,
        }
    }
}

impl OptimizationSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(self.obj_tol > 0.0) {
            return bad(format!("obj_tol must be positive, got {}", self.obj_tol));
        }
        if !(self.dir_tol > 0.0 && self.dir_tol < 1.0) {
            return bad(format!("dir_tol must lie in (0, 1), got {}", self.dir_tol));
        }
        if self.max_oc_iters == 0 || self.max_rotation_updates == 0 {
            return bad("iteration limits must be positive".into());
        }
        let (lo, hi) = self.lambda_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return bad(format!(
                "lambda bracket ({lo}, {hi}) must be a positive interval"
            ));
        }
        if !(self.tie_tol >= 0.0) || !(self.monotonicity_slack >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }
}

/// One outer iteration: a sizing loop followed by an orientation update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// Compliance after the sizing loop.
    pub compliance: f64,
    pub volume: f64,
    /// Largest `1 - |cos|` of the orientation update that followed (0 if none).
    pub max_direction_change: f64,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunHistory {
    pub entries: Vec<HistoryEntry>,
    /// Compliance of every solved state, in order.
    pub compliance_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub design: DesignField,
    pub state: MembraneState,
    pub history: RunHistory,
    pub converged: bool,
    pub oc_updates: usize,
    pub rotation_updates: usize,
    /// Optimality residuals of the returned design.
    pub kkt: Option<KktReport>,
}

/// Initial design: uniform `t1 = t2` spending the budget (clamped to the
/// bounds) with directions chosen by `mode`.
pub fn initial_design(
    problem: &StateProblem,
    bounds: ThicknessBounds,
    volume_budget: f64,
    mode: InitDirection,
) -> Result<DesignField> {
    let mut design = DesignField::uniform(problem.mesh(), bounds, volume_budget)?;
    if mode == InitDirection::PrincipalFromUnreinforced {
        let mut bare = design.clone();
        for p in &mut bare.points {
            p.t1 = 0.0;
            p.t2 = 0.0;
        }
        let state = problem.solve(&bare)?;
        for (p, f) in design.points.iter_mut().zip(&state.point_forces) {
            p.s = if f.principal.degenerate {
                axis_aligned_direction(&f.frame.n)
            } else {
                f.major_direction()
            };
        }
    }
    Ok(design)
}

/// Outcome of one sizing loop at fixed fibre directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizingReport {
    pub updates: usize,
    /// The relative compliance change fell below `obj_tol`.
    pub converged: bool,
}

/// Repeats the OC update at fixed directions until the relative compliance
/// change drops below `settings.obj_tol` or `max_updates` updates are spent.
/// `state` is kept in step with `design`; every new compliance is appended to
/// `trace`.
pub fn size_fibers(
    problem: &StateProblem,
    design: &mut DesignField,
    state: &mut MembraneState,
    settings: &OptimizationSettings,
    max_updates: usize,
    trace: &mut Vec<f64>,
) -> Result<SizingReport> {
    let mut updates = 0;
    while updates < max_updates {
        let sens = problem.sensitivities(design, state)?;
        if sens.iter().all(|a| a[0] == 0.0 && a[1] == 0.0) {
            // Compliance does not depend on the thicknesses.
            return Ok(SizingReport {
                updates,
                converged: true,
            });
        }
        let current: Vec<[f64; 2]> = design.points.iter().map(|p| [p.t1, p.t2]).collect();
        let sol = find_lambda(
            &sens,
            &current,
            &design.bounds,
            &design.areas,
            design.volume_budget,
            settings.eta,
            default_bracket(&sens, settings.lambda_bracket),
        )?;
        for (p, t) in design.points.iter_mut().zip(&sol.thickness) {
            p.t1 = t[0];
            p.t2 = t[1];
        }
        let previous = state.compliance;
        *state = problem.solve(design)?;
        updates += 1;
        trace.push(state.compliance);
        if state.compliance > previous * (1.0 + settings.monotonicity_slack) {
            if settings.abort_on_increase {
                return Err(Error::MonotonicityViolation {
                    update: trace.len() - 1,
                    previous,
                    current: state.compliance,
                });
            }
            warn!(
                "compliance increased: {previous:e} -> {:e}",
                state.compliance
            );
        }
        let change =
            (previous - state.compliance).abs() / state.compliance.abs().max(f64::MIN_POSITIVE);
        debug!(
            "OC update: compliance {:e}, change {change:e}, lambda {:e}",
            state.compliance, sol.lambda
        );
        if change < settings.obj_tol {
            return Ok(SizingReport {
                updates,
                converged: true,
            });
        }
    }
    Ok(SizingReport {
        updates,
        converged: false,
    })
}

/// Alternates damped OC sizing loops with principal-direction fibre updates.
///
/// Stops once an orientation update turns no direction by more than
/// `dir_tol` (in `|cos|`) and the sizing loop that follows has converged.
/// If an iteration cap is hit first, the lowest-compliance iterate seen is
/// returned with `converged = false`.
pub fn optimize(
    problem: &StateProblem,
    design0: &DesignField,
    settings: &OptimizationSettings,
) -> Result<OptimizationResult> {
    settings.validate()?;
    design0.check_admissible(problem.mesh())?;
    let mut design = design0.clone();
    let mut state = problem.solve(&design)?;
    let mut history = RunHistory {
        entries: Vec::new(),
        compliance_trace: vec![state.compliance],
    };
    let mut best = (design.clone(), state.clone());
    let mut oc_updates = 0;
    let mut rotation_updates = 0;
    let mut converged = false;
    let mut settled = false;

    loop {
        let sizing = size_fibers(
            problem,
            &mut design,
            &mut state,
            settings,
            settings.max_oc_iters - oc_updates,
            &mut history.compliance_trace,
        )?;
        oc_updates += sizing.updates;
        if state.compliance < best.1.compliance {
            best = (design.clone(), state.clone());
        }
        let mut entry = HistoryEntry {
            iteration: history.entries.len(),
            compliance: state.compliance,
            volume: design.volume(),
            max_direction_change: 0.0,
            inner_iterations: sizing.updates,
        };
        if !sizing.converged {
            warn!("OC update limit {} reached", settings.max_oc_iters);
            history.entries.push(entry);
            break;
        }
        if settled {
            history.entries.push(entry);
            converged = true;
            break;
        }
        if rotation_updates == settings.max_rotation_updates {
            warn!(
                "orientation update limit {} reached",
                settings.max_rotation_updates
            );
            history.entries.push(entry);
            break;
        }
        let report = rotate_fibers(&state.point_forces, &mut design, settings.tie_tol)?;
        rotation_updates += 1;
        entry.max_direction_change = report.max_change;
        history.entries.push(entry);
        info!(
            "orientation update {rotation_updates}: compliance {:e}, max 1-|cos| {:e}, {} swapped, {} ties",
            entry.compliance, report.max_change, report.swapped, report.ties
        );
        state = problem.solve(&design)?;
        history.compliance_trace.push(state.compliance);
        if state.compliance < best.1.compliance {
            best = (design.clone(), state.clone());
        }
        // Once the directions have settled, one more sizing loop finishes the layout.
        settled = 1.0 - report.max_change >= settings.dir_tol;
    }

    let (design, state) = if converged { (design, state) } else { best };
    let kkt = certificate(problem, &design, &state, settings).ok();
    Ok(OptimizationResult {
        design,
        state,
        history,
        converged,
        oc_updates,
        rotation_updates,
        kkt,
    })
}

/// Optimality residuals of `design` with the multiplier one more OC update would use.
pub fn certificate(
    problem: &StateProblem,
    design: &DesignField,
    state: &MembraneState,
    settings: &OptimizationSettings,
) -> Result<KktReport> {
    let sens = problem.sensitivities(design, state)?;
    let current: Vec<[f64; 2]> = design.points.iter().map(|p| [p.t1, p.t2]).collect();
    let sol = find_lambda(
        &sens,
        &current,
        &design.bounds,
        &design.areas,
        design.volume_budget,
        settings.eta,
        default_bracket(&sens, settings.lambda_bracket),
    )?;
    Ok(kkt_residuals(design, &sens, sol.lambda, BOUND_TOL))
}
