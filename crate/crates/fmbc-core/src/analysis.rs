//! Evaluative mathematics over completed runs: system/agent cost
//! functionals, Nash-equilibrium and relaxed-equilibrium checks,
//! price/start-count consistency bounds, and per-device regret.

use alloc::vec::Vec;

use crate::model::{CostModel, DeviceId, DeviceSpec, ModelError, Schedule, TimeGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("horizon overrun: device cycle from step {t} runs past step {end}")]
    Horizon { t: usize, end: usize },
    #[error("inconsistent input: {0}")]
    Inconsistent(&'static str),
}

/// System cost of starting the device at `t` on top of the background load
/// `background` (total consumption excluding this device), indexed
/// absolutely from `offset`.
pub fn system_cost_of_start(
    model: &CostModel,
    background: &[f64],
    offset: usize,
    spec: &DeviceSpec,
    t: usize,
    dt_minutes: f64,
) -> Result<f64, AnalysisError> {
    let end = offset + background.len();
    if t < offset || t + spec.duration > end {
        return Err(AnalysisError::Horizon { t, end });
    }
    let mut k = 0.0;
    for (i, p) in spec.pattern.iter().enumerate() {
        let bg = background[t + i - offset];
        k += dt_minutes * model.demand_integral(t + i, bg, bg + p)?;
    }
    Ok(k)
}

/// Total payment for starting at `t`: marginal prices after the device's
/// own contribution, applied to its consumption.
pub fn agent_payment(
    model: &CostModel,
    background: &[f64],
    offset: usize,
    spec: &DeviceSpec,
    t: usize,
    dt_minutes: f64,
) -> Result<f64, AnalysisError> {
    let end = offset + background.len();
    if t < offset || t + spec.duration > end {
        return Err(AnalysisError::Horizon { t, end });
    }
    let mut pi = 0.0;
    for (i, p) in spec.pattern.iter().enumerate() {
        let bg = background[t + i - offset];
        pi += dt_minutes * model.marginal_price(t + i, bg + p)? * p;
    }
    Ok(pi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceEquilibrium {
    pub device: DeviceId,
    pub chosen_start: usize,
    pub feasible_starts: Vec<usize>,
    /// System cost of each feasible start (same order as `feasible_starts`).
    pub system_costs: Vec<f64>,
    /// Payment at each feasible start.
    pub payments: Vec<f64>,
    pub best_alternative: usize,
    /// Minimal relaxation making the unilateral-deviation condition hold
    /// for this device.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub devices: Vec<DeviceEquilibrium>,
    /// Devices whose chosen start is strictly beaten by an alternative.
    pub violations: Vec<DeviceId>,
    pub worst_delta: f64,
    /// Largest relative own-impact on the marginal price over all feasible
    /// device placements.
    pub epsilon: f64,
    /// Whether worst_delta <= epsilon / (1 - epsilon) (vacuous for
    /// epsilon >= 1).
    pub delta_bound_holds: bool,
}

const REL_TOL: f64 = 1e-9;

/// Ceiling with a relative guard against ratios that land a hair above an
/// integer through accumulated rounding.
fn ceil_tol(v: f64) -> i64 {
    libm::ceil(v - 1e-9 * (1.0 + v.abs())) as i64
}

/// Evaluate the unilateral-deviation condition for every device in a
/// realized allocation: all other devices stay fixed while one device's
/// start is moved across its feasible window.
pub fn check_nash(
    allocation: &Schedule,
    specs: &[DeviceSpec],
    model: &CostModel,
    grid: &TimeGrid,
    dt_minutes: f64,
) -> Result<EquilibriumReport, AnalysisError> {
    if allocation.aggregate_load.len() != grid.num_steps {
        return Err(AnalysisError::Inconsistent("aggregate load length must match grid"));
    }
    let offset = grid.start_index;
    let mut devices = Vec::with_capacity(specs.len());
    let mut violations = Vec::new();
    let mut worst_delta: f64 = 0.0;
    let mut epsilon: f64 = 0.0;
    for spec in specs {
        let chosen = *allocation
            .start_times
            .get(&spec.id)
            .ok_or(AnalysisError::Inconsistent("device missing from allocation"))?;
        let mut background = allocation.aggregate_load.clone();
        for (i, p) in spec.pattern.iter().enumerate() {
            let idx = chosen + i - offset;
            if idx >= background.len() {
                return Err(AnalysisError::Horizon { t: chosen, end: grid.end_index() });
            }
            background[idx] -= p;
        }
        let latest = spec.latest_start().min(grid.end_index().saturating_sub(spec.duration));
        let mut starts = Vec::new();
        let mut ks = Vec::new();
        let mut pis = Vec::new();
        for t in offset..=latest {
            starts.push(t);
            ks.push(system_cost_of_start(model, &background, offset, spec, t, dt_minutes)?);
            pis.push(agent_payment(model, &background, offset, spec, t, dt_minutes)?);
            // Own relative price impact at this placement.
            for (i, p) in spec.pattern.iter().enumerate() {
                let bg = background[t + i - offset];
                let with = model.marginal_price(t + i, bg + p)?;
                if with > 0.0 {
                    let without = model.marginal_price(t + i, bg)?;
                    epsilon = epsilon.max((with - without) / with);
                }
            }
        }
        let chosen_idx = starts
            .iter()
            .position(|s| *s == chosen)
            .ok_or(AnalysisError::Inconsistent("chosen start outside feasible window"))?;
        let pi_chosen = pis[chosen_idx];
        let mut best = chosen_idx;
        let mut delta: f64 = 0.0;
        for (j, pi) in pis.iter().enumerate() {
            if *pi < pis[best] {
                best = j;
            }
            let need = if *pi > 0.0 {
                (pi_chosen / pi - 1.0).max(0.0)
            } else if pi_chosen > REL_TOL {
                f64::INFINITY
            } else {
                0.0
            };
            delta = delta.max(need);
        }
        if pi_chosen > pis[best] + REL_TOL * (1.0 + pis[best].abs()) {
            violations.push(spec.id);
        }
        worst_delta = worst_delta.max(delta);
        devices.push(DeviceEquilibrium {
            device: spec.id,
            chosen_start: chosen,
            feasible_starts: starts,
            system_costs: ks,
            payments: pis,
            best_alternative: best,
            delta,
        });
    }
    let delta_bound_holds = if epsilon < 1.0 {
        worst_delta <= epsilon / (1.0 - epsilon) + REL_TOL
    } else {
        true
    };
    Ok(EquilibriumReport { devices, violations, worst_delta, epsilon, delta_bound_holds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceStepBounds {
    pub t: usize,
    pub diff: f64,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountStepBounds {
    pub t: usize,
    pub diff: i64,
    /// None when the local marginal-price slope is zero (linearization not
    /// applicable at this step).
    pub lower: Option<i64>,
    pub upper: Option<i64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub price: Vec<PriceStepBounds>,
    pub counts: Vec<CountStepBounds>,
    /// Hard interval for the affine / constant-power / vanishing-noise
    /// regime: -(D+1) <= n_t - n*_t <= D.
    pub corollary_interval: (i64, i64),
    pub price_violations: usize,
    pub count_violations: usize,
    pub corollary_violations: usize,
}

/// Consistency bounds for identical rapid-starting constant-power devices.
/// `reference_load` is the cost-optimal total consumption per step,
/// `clearing_prices`/`starts` are the realized outcome, all indexed
/// absolutely from `offset`. `eta` is the hard lower bound on downward
/// forecast deviations.
#[allow(clippy::too_many_arguments)]
pub fn consistency_bounds(
    model: &CostModel,
    offset: usize,
    clearing_prices: &[f64],
    starts: &[u32],
    reference_prices: &[f64],
    reference_starts: &[u32],
    reference_load: &[f64],
    device_power: f64,
    duration: usize,
    eta: f64,
) -> Result<ConsistencyReport, AnalysisError> {
    let n = clearing_prices.len();
    if [starts.len(), reference_prices.len(), reference_starts.len(), reference_load.len()]
        .iter()
        .any(|l| *l != n)
    {
        return Err(AnalysisError::Inconsistent("trace and reference series must share a length"));
    }
    if !(device_power > 0.0) || duration == 0 {
        return Err(AnalysisError::Inconsistent("device power and duration must be positive"));
    }
    let p0 = device_power;

    // Per-step sums used by both bounds, evaluated at the reference load.
    let mut dm_sum = Vec::with_capacity(n); // sum_i P_i * delta_m_{t,i}
    let mut slope = Vec::with_capacity(n); // c_t
    for (r, load) in reference_load.iter().enumerate() {
        let t = offset + r;
        let dm = model.delta_m(t, *load, device_power.min(*load))?;
        dm_sum.push(duration as f64 * device_power * dm);
        slope.push(model.demand_slope(t, *load)?);
    }
    // Suffix maxima for the upper bounds (over t' in {t+1, ..., end}).
    let mut dm_suffix = alloc::vec![0.0f64; n + 1];
    for r in (0..n).rev() {
        dm_suffix[r] = dm_suffix[r + 1].max(dm_sum[r]);
    }

    let mut price = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    let mut price_violations = 0;
    let mut count_violations = 0;
    let mut corollary_violations = 0;
    let corollary_interval = (-(duration as i64) - 1, duration as i64);

    for r in 0..n {
        let t = offset + r;
        let diff = clearing_prices[r] - reference_prices[r];
        let lower = -(dm_sum[r] + duration as f64 * device_power * eta) / p0;
        let upper = dm_suffix[r + 1] / p0;
        let tol = REL_TOL * (1.0 + reference_prices[r].abs());
        let ok = diff >= lower - tol && diff <= upper + tol;
        if !ok {
            price_violations += 1;
        }
        price.push(PriceStepBounds { t, diff, lower, upper, ok });

        let cdiff = starts[r] as i64 - reference_starts[r] as i64;
        let (lo, hi, ok) = if slope[r] > 0.0 {
            let c_t = slope[r];
            let mut num_lo = 0.0;
            for i in 0..duration {
                let c_ti = slope[(r + i).min(n - 1)];
                num_lo += c_ti * device_power * device_power + eta * device_power;
            }
            let lo = -ceil_tol(num_lo / (c_t * p0 * p0));
            let mut hi = 0i64;
            for rp in r + 1..n {
                let mut num = 0.0;
                for i in 0..duration {
                    num += slope[(rp + i).min(n - 1)] * device_power * device_power;
                }
                hi = hi.max(ceil_tol(num / (c_t * p0 * p0)));
            }
            (Some(lo), Some(hi), cdiff >= lo && cdiff <= hi)
        } else {
            (None, None, true)
        };
        if !ok {
            count_violations += 1;
        }
        if cdiff < corollary_interval.0 || cdiff > corollary_interval.1 {
            corollary_violations += 1;
        }
        counts.push(CountStepBounds { t, diff: cdiff, lower: lo, upper: hi, ok });
    }

    Ok(ConsistencyReport {
        price,
        counts,
        corollary_interval,
        price_violations,
        count_violations,
        corollary_violations,
    })
}

/// Actual payment minus the cheapest payment the device could have achieved
/// in retrospect at the realized prices; non-negative up to tie tolerance
/// when the policy is optimal against the realized path.
pub fn regret(
    spec: &DeviceSpec,
    grid: &TimeGrid,
    realized_prices: &[f64],
    actual_payment: f64,
    dt_minutes: f64,
) -> Result<f64, AnalysisError> {
    if realized_prices.len() != grid.num_steps {
        return Err(AnalysisError::Inconsistent("realized prices must cover the grid"));
    }
    let offset = grid.start_index;
    let latest = spec.latest_start().min(grid.end_index().saturating_sub(spec.duration));
    if latest < offset {
        return Err(AnalysisError::Horizon { t: offset, end: grid.end_index() });
    }
    let mut best = f64::INFINITY;
    for t in offset..=latest {
        let mut pay = 0.0;
        for (i, p) in spec.pattern.iter().enumerate() {
            pay += dt_minutes * realized_prices[t + i - offset] * p;
        }
        best = best.min(pay);
    }
    Ok(actual_payment - best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostCurve;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn rng_unit(rng: &mut ChaCha8Rng) -> f64 {
        crate::forecast::uniform_open01(rng)
    }

    #[test]
    fn system_cost_closed_form() {
        // affine k=500, flat background 100, P=(2,2), dt=1:
        // 2 * integral of P/500 over [100,102] = 2 * (102^2-100^2)/(2*500).
        let model = CostModel::affine(500.0).unwrap();
        let spec = DeviceSpec::constant(DeviceId(0), 2, 2, 2.0).unwrap();
        let bg = [100.0, 100.0];
        let k = system_cost_of_start(&model, &bg, 0, &spec, 0, 1.0).unwrap();
        assert!((k - 0.808).abs() < 1e-12, "k = {k}");
    }

    #[test]
    fn zero_power_zero_cost() {
        let model = CostModel::affine(500.0).unwrap();
        let spec = DeviceSpec::new(DeviceId(0), 3, 2, vec![0.0, 0.0]).unwrap();
        let bg = [50.0, 60.0, 70.0];
        assert_eq!(system_cost_of_start(&model, &bg, 0, &spec, 1, 5.0).unwrap(), 0.0);
        assert_eq!(agent_payment(&model, &bg, 0, &spec, 1, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn curtailment_steps_pay_nothing() {
        let model = CostModel::new(CostCurve::affine(500.0).unwrap(), vec![100.0, 100.0]);
        let spec = DeviceSpec::constant(DeviceId(0), 2, 2, 2.0).unwrap();
        let bg = [10.0, 10.0];
        assert_eq!(agent_payment(&model, &bg, 0, &spec, 0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn affine_identity() {
        // K = Pi - (c dt / 2) sum P_i^2, to 1e-9 on random instances.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k_param = 50.0 + 450.0 * rng_unit(&mut rng);
            let model = CostModel::affine(k_param).unwrap();
            let c = 1.0 / k_param;
            let d = 1 + (rng.next_u64() % 4) as usize;
            let pattern: Vec<f64> = (0..d).map(|_| 0.5 + 3.0 * rng_unit(&mut rng)).collect();
            let spec = DeviceSpec::new(DeviceId(0), d + 3, d, pattern.clone()).unwrap();
            let bg: Vec<f64> = (0..d + 3).map(|_| 20.0 + 200.0 * rng_unit(&mut rng)).collect();
            let dt = 5.0;
            for t in 0..=3 {
                let k = system_cost_of_start(&model, &bg, 0, &spec, t, dt).unwrap();
                let pi = agent_payment(&model, &bg, 0, &spec, t, dt).unwrap();
                let expect = pi - (c * dt / 2.0) * pattern.iter().map(|p| p * p).sum::<f64>();
                assert!((k - expect).abs() < 1e-9, "K {k} vs identity {expect}");
            }
        }
    }

    #[test]
    fn horizon_overrun_reported() {
        let model = CostModel::affine(500.0).unwrap();
        let spec = DeviceSpec::constant(DeviceId(0), 5, 3, 2.0).unwrap();
        let bg = [100.0; 4];
        assert!(matches!(
            system_cost_of_start(&model, &bg, 0, &spec, 2, 1.0),
            Err(AnalysisError::Horizon { .. })
        ));
    }

    fn build_allocation(
        specs: &[DeviceSpec],
        starts: &[usize],
        inflexible: &[f64],
        grid: &TimeGrid,
    ) -> Schedule {
        let mut load = inflexible.to_vec();
        let mut map = BTreeMap::new();
        for (spec, s) in specs.iter().zip(starts) {
            for (i, p) in spec.pattern.iter().enumerate() {
                load[s + i - grid.start_index] += p;
            }
            map.insert(spec.id, *s);
        }
        Schedule { aggregate_load: load, start_times: map }
    }

    #[test]
    fn affine_optimum_is_equilibrium() {
        use crate::reference::{brute_force_schedule, ScheduleProblem};
        let grid = TimeGrid::new(0, 8, 1.0).unwrap();
        let model = CostModel::affine(100.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let inflexible: Vec<f64> = (0..8).map(|_| 2.0 + 15.0 * rng_unit(&mut rng)).collect();
            let specs = vec![
                DeviceSpec::constant(DeviceId(0), 6, 2, 2.0).unwrap(),
                DeviceSpec::constant(DeviceId(1), 7, 2, 2.0).unwrap(),
                DeviceSpec::constant(DeviceId(2), 8, 2, 2.0).unwrap(),
            ];
            let latests: Vec<usize> = specs.iter().map(|s| s.latest_start()).collect();
            let p = ScheduleProblem::new(0, 8, 1.0, 2.0, 2, &latests, vec![0; 8], inflexible.clone()).unwrap();
            let sol = brute_force_schedule(&p, &model).unwrap();
            // Slot devices into the optimal start counts in deadline order.
            let mut starts = Vec::new();
            let mut queue: Vec<usize> = (0..3).collect();
            for (r, s) in sol.sigma.iter().enumerate() {
                for _ in 0..*s {
                    let _ = queue.remove(0);
                    starts.push(r);
                }
            }
            let alloc = build_allocation(&specs, &starts, &inflexible, &grid);
            let report = check_nash(&alloc, &specs, &model, &grid, 1.0).unwrap();
            assert!(report.violations.is_empty(), "violations: {:?}", report.violations);
            assert!(report.delta_bound_holds);
            // (1 - eps) Pi <= K <= Pi across all tabulated placements.
            let eps = report.epsilon;
            for dev in &report.devices {
                for (k, pi) in dev.system_costs.iter().zip(&dev.payments) {
                    assert!(*k <= *pi + 1e-9);
                    assert!((1.0 - eps) * *pi <= *k + 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_device_violation_detection() {
        let grid = TimeGrid::new(0, 4, 1.0).unwrap();
        let model = CostModel::affine(100.0).unwrap();
        let specs = vec![DeviceSpec::constant(DeviceId(0), 4, 1, 2.0).unwrap()];
        let inflexible = [10.0, 1.0, 10.0, 10.0];
        // Start at the expensive step: clear violation.
        let alloc = build_allocation(&specs, &[0], &inflexible, &grid);
        let report = check_nash(&alloc, &specs, &model, &grid, 1.0).unwrap();
        assert_eq!(report.violations, vec![DeviceId(0)]);
        assert!(report.worst_delta > 0.0);
        // Start at the cheap step: none.
        let alloc = build_allocation(&specs, &[1], &inflexible, &grid);
        let report = check_nash(&alloc, &specs, &model, &grid, 1.0).unwrap();
        assert!(report.violations.is_empty());
        assert_eq!(report.worst_delta, 0.0);
    }

    #[test]
    fn tabulated_curve_delta_bound() {
        // Non-affine (piecewise) marginal curve; enumerate alternatives and
        // verify the relaxed-equilibrium bound delta <= eps/(1-eps).
        let curve = CostCurve::tabulated(vec![(0.0, 0.01), (10.0, 0.02), (20.0, 0.08), (40.0, 0.2)]).unwrap();
        let model = CostModel::new(curve, vec![0.0; 6]);
        let grid = TimeGrid::new(0, 6, 1.0).unwrap();
        let specs = vec![
            DeviceSpec::constant(DeviceId(0), 5, 2, 2.0).unwrap(),
            DeviceSpec::constant(DeviceId(1), 6, 2, 2.0).unwrap(),
        ];
        let inflexible = [12.0, 8.0, 6.0, 9.0, 14.0, 16.0];
        // Enumerate joint starts, pick the system-cost optimum.
        let mut best: Option<(f64, [usize; 2])> = None;
        for s0 in 0..=3usize {
            for s1 in 0..=4usize {
                let alloc = build_allocation(&specs, &[s0, s1], &inflexible, &grid);
                let mut cost = 0.0;
                for (t, l) in alloc.aggregate_load.iter().enumerate() {
                    cost += model.generation_cost(t, *l, 1.0).unwrap();
                }
                if best.map(|(c, _)| cost < c).unwrap_or(true) {
                    best = Some((cost, [s0, s1]));
                }
            }
        }
        let (_, starts) = best.unwrap();
        let alloc = build_allocation(&specs, &starts, &inflexible, &grid);
        let report = check_nash(&alloc, &specs, &model, &grid, 1.0).unwrap();
        assert!(report.epsilon < 1.0);
        assert!(report.delta_bound_holds, "delta {} eps {}", report.worst_delta, report.epsilon);
    }

    #[test]
    fn consistency_exact_match_within_bounds() {
        let model = CostModel::affine(500.0).unwrap();
        let load = [100.0, 120.0, 90.0];
        let prices: Vec<f64> = (0..3).map(|t| model.marginal_price(t, load[t]).unwrap()).collect();
        let starts = [2u32, 0, 1];
        let report = consistency_bounds(&model, 0, &prices, &starts, &prices, &starts, &load, 2.0, 2, 0.0).unwrap();
        assert_eq!(report.price_violations, 0);
        assert_eq!(report.count_violations, 0);
        assert_eq!(report.corollary_violations, 0);
        for p in &report.price {
            assert_eq!(p.diff, 0.0);
        }
    }

    #[test]
    fn consistency_corollary_interval() {
        let model = CostModel::affine(500.0).unwrap();
        let load = [100.0; 4];
        let prices = [0.2; 4];
        let report =
            consistency_bounds(&model, 0, &prices, &[0; 4], &prices, &[0; 4], &load, 2.0, 12, 0.0).unwrap();
        assert_eq!(report.corollary_interval, (-13, 12));
        // Affine, constant power, eta = 0: the per-step bounds collapse to
        // [-D, D] (tighter than the hard interval).
        for c in &report.counts {
            assert_eq!(c.lower, Some(-12));
            if c.t + 1 < 4 {
                assert_eq!(c.upper, Some(12));
            }
        }
    }

    #[test]
    fn consistency_flags_violation() {
        let model = CostModel::affine(500.0).unwrap();
        let load = [100.0; 4];
        let ref_prices: Vec<f64> = (0..4).map(|t| model.marginal_price(t, 100.0).unwrap()).collect();
        // Clearing price far below any admissible deviation.
        let mut prices = ref_prices.clone();
        prices[1] = 0.0;
        let report = consistency_bounds(
            &model,
            0,
            &prices,
            &[0, 40, 0, 0],
            &ref_prices,
            &[0; 4],
            &load,
            2.0,
            2,
            1e-6,
        )
        .unwrap();
        assert!(report.price_violations >= 1);
        assert!(report.corollary_violations >= 1);
    }

    #[test]
    fn regret_cases() {
        let grid = TimeGrid::new(0, 4, 1.0).unwrap();
        let prices = [0.5, 0.1, 0.3, 0.9];
        let spec = DeviceSpec::constant(DeviceId(0), 3, 1, 2.0).unwrap();
        // Started at the retrospective optimum (step 1, payment 0.2).
        assert_eq!(regret(&spec, &grid, &prices, 0.2, 1.0).unwrap(), 0.0);
        // Started at step 0 (payment 1.0): regret 0.8.
        assert!((regret(&spec, &grid, &prices, 1.0, 1.0).unwrap() - 0.8).abs() < 1e-12);
        // Forced start: window of one step.
        let forced = DeviceSpec::constant(DeviceId(1), 1, 1, 2.0).unwrap();
        assert_eq!(regret(&forced, &grid, &prices, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn regret_two_step_device() {
        let grid = TimeGrid::new(0, 4, 5.0).unwrap();
        let prices = [0.5, 0.1, 0.3, 0.9];
        let spec = DeviceSpec::constant(DeviceId(0), 4, 2, 2.0).unwrap();
        // Payments: start 0 -> 5*2*(0.6)=6, start 1 -> 5*2*0.4=4, start 2 -> 5*2*1.2=12.
        let r = regret(&spec, &grid, &prices, 6.0, 5.0).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }
}
