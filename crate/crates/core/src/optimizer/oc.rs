use super::design::{DesignField, ThicknessBounds};
use crate::error::{Error, Result};

/// Relative volume accuracy of the multiplier search.
const VOLUME_TOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 400;
const MAX_BRACKET_EXPANSIONS: usize = 5;

/// Damped optimality-criteria step `clamp(t B^eta, lower, upper)`.
pub fn oc_update(t: f64, b: f64, eta: f64, lower: f64, upper: f64) -> f64 {
    (t * b.powf(eta)).clamp(lower, upper)
}

/// Result of the volume multiplier search.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    /// Updated `[t1, t2]` per point.
    pub thickness: Vec<[f64; 2]>,
    pub volume: f64,
    /// `false` when even the smallest multiplier leaves volume unused.
    pub constraint_active: bool,
}

fn updated(
    sens: &[[f64; 2]],
    current: &[[f64; 2]],
    bounds: &[ThicknessBounds],
    eta: f64,
    lambda: f64,
) -> Vec<[f64; 2]> {
    sens.iter()
        .zip(current)
        .zip(bounds)
        .map(|((a, t), b)| {
            std::array::from_fn(|k| oc_update(t[k], a[k] / lambda, eta, b.lower[k], b.upper[k]))
        })
        .collect()
}

fn volume_of(thickness: &[[f64; 2]], areas: &[f64]) -> f64 {
    thickness
        .iter()
        .zip(areas)
        .map(|(t, a)| (t[0] + t[1]) * a)
        .sum()
}

/// Finds the multiplier `Lambda` for which the OC update spends the budget.
///
/// The updated volume is non-increasing in `Lambda`; bisection runs on
/// `log Lambda` inside `bracket` and keeps the feasible (upper) end, so the
/// returned volume never exceeds `volume_budget`. The bracket is widened by
/// factors of ten up to five times at either end before giving up. When the
/// volume stays below the budget at the lower end the constraint is slack and
/// that end is returned.
#[allow(clippy::too_many_arguments)]
pub fn find_lambda(
    sensitivities: &[[f64; 2]],
    current: &[[f64; 2]],
    bounds: &[ThicknessBounds],
    areas: &[f64],
    volume_budget: f64,
    eta: f64,
    bracket: (f64, f64),
) -> Result<LambdaSolution> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "multiplier bracket [{lo:e}, {hi:e}] must be a positive interval"
        )));
    }
    let volume = |lambda: f64| {
        let t = updated(sensitivities, current, bounds, eta, lambda);
        let v = volume_of(&t, areas);
        (t, v)
    };

    let mut expansions = 0;
    let (mut t_hi, mut v_hi) = volume(hi);
    while v_hi > volume_budget {
        if expansions == MAX_BRACKET_EXPANSIONS {
            return Err(Error::LambdaBracket {
                lo,
                hi,
                detail: format!(
                    "volume {v_hi:e} at the upper end still exceeds the budget {volume_budget:e}; \
                     the lower thickness bounds or zero sensitivities leave no feasible update"
                ),
            });
        }
        hi *= 10.0;
        expansions += 1;
        (t_hi, v_hi) = volume(hi);
    }
    expansions = 0;
    let (mut t_lo, mut v_lo) = volume(lo);
    while v_lo <= volume_budget && expansions < MAX_BRACKET_EXPANSIONS {
        lo /= 10.0;
        expansions += 1;
        (t_lo, v_lo) = volume(lo);
    }
    if v_lo <= volume_budget {
        return Ok(LambdaSolution {
            lambda: lo,
            thickness: t_lo,
            volume: v_lo,
            constraint_active: false,
        });
    }

    for _ in 0..MAX_BISECTIONS {
        if volume_budget - v_hi <= VOLUME_TOL * volume_budget || hi / lo - 1.0 <= 4.0 * f64::EPSILON
        {
            break;
        }
        let mid = (lo * hi).sqrt();
        let (t_mid, v_mid) = volume(mid);
        if v_mid > volume_budget {
            lo = mid;
        } else {
            hi = mid;
            t_hi = t_mid;
            v_hi = v_mid;
        }
    }
    Ok(LambdaSolution {
        lambda: hi,
        thickness: t_hi,
        volume: v_hi,
        constraint_active: true,
    })
}

/// Default multiplier bracket `[1e-12, 1e12]` scaled by the mean sensitivity.
pub fn default_bracket(sensitivities: &[[f64; 2]], relative: (f64, f64)) -> (f64, f64) {
    let n = (2 * sensitivities.len()).max(1) as f64;
    let mean = sensitivities.iter().map(|a| a[0] + a[1]).sum::<f64>() / n;
    let scale = if mean > 0.0 { mean } else { 1.0 };
    (relative.0 * scale, relative.1 * scale)
}

/// Residuals of the discrete optimality conditions for a design, its
/// sensitivities and multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub lambda: f64,
    /// Largest `|A/Lambda - 1|` over variables strictly inside their bounds.
    pub stationarity: f64,
    /// Largest violation of `A/Lambda <= 1` at lower bounds and `>= 1` at upper bounds.
    pub bound_sign: f64,
    /// `Lambda (V - volume)` relative to `max A * V`.
    pub complementarity: f64,
    /// `(volume - V) / V` if positive.
    pub volume_excess: f64,
    pub interior_count: usize,
}

impl KktReport {
    pub fn holds(&self, stationarity_tol: f64, complementarity_tol: f64) -> bool {
        self.stationarity <= stationarity_tol
            && self.bound_sign <= stationarity_tol
            && self.complementarity <= complementarity_tol
            && self.volume_excess <= 1e-12
    }
}

/// Evaluates the optimality conditions. A variable counts as being at a bound
/// when it lies within `bound_tol * (upper - lower)` of it.
pub fn kkt_residuals(
    design: &DesignField,
    sensitivities: &[[f64; 2]],
    lambda: f64,
    bound_tol: f64,
) -> KktReport {
    let mut stationarity: f64 = 0.0;
    let mut bound_sign: f64 = 0.0;
    let mut interior_count = 0;
    let mut max_a: f64 = 0.0;
    for (i, a) in sensitivities.iter().enumerate() {
        let b = &design.bounds[i];
        for (k, &ak) in a.iter().enumerate() {
            let t = design.thickness(i, k);
            let ratio = ak / lambda;
            max_a = max_a.max(ak);
            let width = b.upper[k] - b.lower[k];
            let at_lower = t <= b.lower[k] + bound_tol * width;
            let at_upper = t >= b.upper[k] - bound_tol * width;
            if at_lower && at_upper {
                continue;
            } else if at_lower {
                bound_sign = bound_sign.max(ratio - 1.0);
            } else if at_upper {
                bound_sign = bound_sign.max(1.0 - ratio);
            } else {
                interior_count += 1;
                stationarity = stationarity.max((ratio - 1.0).abs());
            }
        }
    }
    let volume = design.volume();
    let v = design.volume_budget;
    let complementarity = if max_a > 0.0 {
        lambda * (v - volume).abs() / (max_a * v)
    } else {
        0.0
    };
    KktReport {
        lambda,
        stationarity,
        bound_sign,
        complementarity,
        volume_excess: ((volume - v) / v).max(0.0),
        interior_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bounds(n: usize, upper: f64) -> Vec<ThicknessBounds> {
        vec![ThicknessBounds::new([0.0, 0.0], [upper, upper]).unwrap(); n]
    }

    #[test]
    fn oc_update_branches() {
        assert_eq!(oc_update(0.003, 1.0, 0.5, 0.0, 0.004), 0.003);
        assert_relative_eq!(oc_update(0.002, 4.0, 0.5, 0.0, 0.004), 0.004);
        assert_eq!(oc_update(0.002, 9.0, 0.5, 0.0, 0.004), 0.004);
        assert_eq!(oc_update(0.002, 0.0, 0.5, 0.0, 0.004), 0.0);
        assert_eq!(oc_update(0.002, 0.0, 0.5, 0.001, 0.004), 0.001);
        assert_relative_eq!(oc_update(0.002, 0.25, 1.0, 0.0, 0.004), 0.0005);
    }

    #[test]
    fn symmetric_points_share_the_budget() {
        let sol = find_lambda(
            &[[1.0, 1.0], [1.0, 1.0]],
            &[[0.001, 0.001], [0.001, 0.001]],
            &bounds(2, 1.0),
            &[1.0, 1.0],
            0.01,
            0.5,
            (1e-12, 1e12),
        )
        .unwrap();
        assert!(sol.constraint_active);
        assert_relative_eq!(sol.volume, 0.01, max_relative = 1e-8);
        assert!(sol.volume <= 0.01);
        for t in &sol.thickness {
            assert_relative_eq!(t[0], 0.0025, max_relative = 1e-8);
            assert_eq!(t[0], t[1]);
        }
    }

    #[test]
    fn huge_multiplier_sends_everything_to_lower_bounds() {
        let t = updated(
            &[[1.0, 2.0], [3.0, 0.5]],
            &[[0.1, 0.1], [0.1, 0.1]],
            &bounds(2, 1.0),
            0.5,
            1e300,
        );
        assert!(t.iter().all(|v| v[0] < 1e-140 && v[1] < 1e-140));
    }

    #[test]
    fn slack_constraint_returns_bracket_floor() {
        let sol = find_lambda(
            &[[1.0, 1.0]],
            &[[0.001, 0.001]],
            &bounds(1, 0.002),
            &[1.0],
            1.0,
            0.5,
            (1e-6, 1e6),
        )
        .unwrap();
        assert!(!sol.constraint_active);
        assert_eq!(sol.thickness, vec![[0.002, 0.002]]);
        assert_relative_eq!(sol.lambda, 1e-11);
    }

    #[test]
    fn infeasible_lower_bounds_are_reported() {
        let b = vec![ThicknessBounds::new([0.5, 0.5], [1.0, 1.0]).unwrap()];
        let err = find_lambda(
            &[[1.0, 1.0]],
            &[[0.6, 0.6]],
            &b,
            &[1.0],
            0.5,
            0.5,
            (1e-3, 1e3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::LambdaBracket { .. }));
    }

    #[test]
    fn bisection_matches_dense_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let n = 10;
            let sens: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)])
                .collect();
            let current: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.random_range(0.01..0.1), rng.random_range(0.01..0.1)])
                .collect();
            let areas: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let b = bounds(n, 0.12);
            let budget = 0.6 * volume_of(&current, &areas);
            let sol = find_lambda(&sens, &current, &b, &areas, budget, 0.5, (1e-6, 1e6)).unwrap();
            // Scan log(Lambda) over the bracket with 10^6 samples; the smallest
            // feasible sample must be within one grid step of the bisection result.
            let samples = 1_000_000;
            let (l0, l1) = (1e-6f64.ln(), 1e6f64.ln());
            let step = (l1 - l0) / samples as f64;
            let mut first_feasible = None;
            let (mut lo, mut hi) = (0, samples);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let lam = (l0 + step * mid as f64).exp();
                if volume_of(&updated(&sens, &current, &b, 0.5, lam), &areas) <= budget {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            if lo < samples {
                first_feasible = Some((l0 + step * lo as f64).exp());
            }
            // Confirm monotonicity of the volume curve on a coarse subsample.
            let mut prev = f64::INFINITY;
            for k in (0..=samples).step_by(1000) {
                let lam = (l0 + step * k as f64).exp();
                let v = volume_of(&updated(&sens, &current, &b, 0.5, lam), &areas);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
            let scan = first_feasible.unwrap();
            assert!(
                (sol.lambda.ln() - scan.ln()).abs() <= step,
                "{} vs {}",
                sol.lambda,
                scan
            );
            assert!(sol.volume <= budget && sol.volume >= budget * (1.0 - 1e-6));
        }
    }

    #[test]
    fn kkt_classification() {
        let mut d = DesignField {
            points: vec![
                super::super::DesignPoint {
                    element: 0,
                    t1: 0.5,
                    t2: 0.0,
                    s: crate::geometry::Vec3::x(),
                },
                super::super::DesignPoint {
                    element: 1,
                    t1: 1.0,
                    t2: 0.5,
                    s: crate::geometry::Vec3::x(),
                },
            ],
            bounds: bounds(2, 1.0),
            areas: vec![1.0, 1.0],
            volume_budget: 2.0,
        };
        let sens = [[2.0, 1.0], [3.0, 2.0]];
        let r = kkt_residuals(&d, &sens, 2.0, 1e-9);
        assert_eq!(r.interior_count, 2);
        assert_eq!(r.stationarity, 0.0);
        assert_eq!(r.bound_sign, 0.0);
        assert!(r.holds(1e-3, 1e-6));
        d.points[0].t2 = 0.0;
        let wrong = kkt_residuals(&d, &[[2.0, 3.0], [3.0, 2.0]], 2.0, 1e-9);
        assert_relative_eq!(wrong.bound_sign, 0.5);
    }
}
