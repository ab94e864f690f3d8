//! Per-device optimal threshold bidding by backward induction over the price
//! forecast, plus the baseline bidding policies used for comparison runs.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::forecast::{ForecastError, PriceForecast};
use crate::model::{DeviceSpec, DeviceState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BidError {
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error("device {id} infeasible at step {t}: latest start {latest} already passed")]
    InfeasibleDevice { id: u32, t: usize, latest: usize },
    #[error("interior thresholds require a rapid-starting device (P_0 > 0)")]
    NotRapidStarting,
}

/// Step demand function `b(x) = quantity if x <= threshold, else 0`, plus the
/// tie-break token submitted alongside it. `threshold` uses IEEE infinities
/// as the always/never sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidFunction {
    pub threshold: f64,
    pub quantity: f64,
    pub tie_token: f64,
}

impl BidFunction {
    /// Demand at price `x`.
    pub fn demand_at(&self, x: f64) -> f64 {
        if x <= self.threshold {
            self.quantity
        } else {
            0.0
        }
    }
}

/// Optimal expected costs `C*_t` and interior thresholds `z_t` for a waiting
/// device, covering `t in [start, latest_start]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub start: usize,
    pub latest_start: usize,
    pub values: Vec<f64>,
    /// `thresholds[t - start]` is `z_t`; infinite at `latest_start`.
    pub thresholds: Vec<f64>,
}

impl ValueFunction {
    pub fn value_at(&self, t: usize) -> f64 {
        self.values[t - self.start]
    }

    pub fn threshold_at(&self, t: usize) -> f64 {
        self.thresholds[t - self.start]
    }
}

/// Expected total running cost of starting at `t` with a clearing price of
/// `x_t`: the realized first-step cost plus expected-price tail.
pub fn expected_start_cost(
    spec: &DeviceSpec,
    t: usize,
    x_t: f64,
    forecast: &PriceForecast,
    dt_minutes: f64,
) -> Result<f64, BidError> {
    let mut cost = x_t * spec.pattern[0] * dt_minutes;
    for i in 1..spec.duration {
        cost += forecast.mean(t + i)? * spec.pattern[i] * dt_minutes;
    }
    Ok(cost)
}

fn expected_tail_cost(
    spec: &DeviceSpec,
    t: usize,
    forecast: &PriceForecast,
    dt_minutes: f64,
) -> Result<f64, BidError> {
    let mut tail = 0.0;
    for i in 1..spec.duration {
        tail += forecast.mean(t + i)? * spec.pattern[i] * dt_minutes;
    }
    Ok(tail)
}

/// Backward recursion for the optimal expected cost of a waiting device.
///
/// The base case at the latest start is the unconditional expected start
/// cost; earlier values weigh starting (price at or below the indifference
/// threshold) against waiting, with expectations taken over the discretized
/// step distribution.
pub fn compute_value_function(
    spec: &DeviceSpec,
    state: &DeviceState,
    t_now: usize,
    forecast: &PriceForecast,
    dt_minutes: f64,
) -> Result<ValueFunction, BidError> {
    debug_assert!(state.is_waiting());
    let latest = state.latest_start(spec);
    if t_now > latest {
        return Err(BidError::InfeasibleDevice { id: spec.id.0, t: t_now, latest });
    }
    let n = latest - t_now + 1;
    let mut values = alloc::vec![0.0; n];
    let mut thresholds = alloc::vec![f64::INFINITY; n];

    // Forced start at the latest feasible step. The first step is paid at
    // the realized price, so its expectation is taken on the same
    // discretized support the recursion integrates over; later steps use
    // the forecast means.
    let mut base = forecast.step(latest)?.discretized_mean() * spec.pattern[0] * dt_minutes;
    for i in 1..spec.duration {
        base += forecast.mean(latest + i)? * spec.pattern[i] * dt_minutes;
    }
    values[n - 1] = base;

    if n > 1 && !spec.is_rapid_starting() {
        return Err(BidError::NotRapidStarting);
    }
    for t in (t_now..latest).rev() {
        let idx = t - t_now;
        let next = values[idx + 1];
        let tail = expected_tail_cost(spec, t, forecast, dt_minutes)?;
        // Indifference point: expected start cost at z equals the value of
        // waiting. Closed form since the start cost is linear in the price.
        let z = (next - tail) / (spec.pattern[0] * dt_minutes);
        let dist = forecast.step(t)?;
        let p_le = dist.prob_le(z);
        let partial = dist.partial_expectation_le(z);
        values[idx] = (1.0 - p_le) * next + partial * spec.pattern[0] * dt_minutes + p_le * tail;
        thresholds[idx] = z;
    }
    Ok(ValueFunction { start: t_now, latest_start: latest, values, thresholds })
}

/// Draw a tie-break token in [0, 1).
fn draw_token<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Optimal bid for the current step given a value function computed at `t`.
pub fn threshold_bid<R: RngCore + ?Sized>(
    spec: &DeviceSpec,
    state: &DeviceState,
    t: usize,
    value_function: &ValueFunction,
    rng: &mut R,
) -> BidFunction {
    let tie_token = draw_token(rng);
    if state.is_finished(spec) {
        return BidFunction { threshold: f64::NEG_INFINITY, quantity: 0.0, tie_token };
    }
    if state.is_running(spec) {
        return BidFunction { threshold: f64::INFINITY, quantity: spec.pattern[state.status], tie_token };
    }
    if t >= state.latest_start(spec) {
        return BidFunction { threshold: f64::INFINITY, quantity: spec.pattern[0], tie_token };
    }
    BidFunction { threshold: value_function.threshold_at(t), quantity: spec.pattern[0], tie_token }
}

/// Forecast-support deadline adjustment: when the current step's price is
/// strictly below the device's threshold for every realization, starting
/// now is optimal regardless of the outcome, so the effective deadline
/// collapses to `t + D`. A realization that ties the threshold is left to
/// the market's tie-break instead. Returns true when the state was adjusted.
pub fn apply_deadline_adjustment(
    spec: &DeviceSpec,
    state: &mut DeviceState,
    t: usize,
    forecast: &PriceForecast,
    threshold: f64,
) -> Result<bool, BidError> {
    debug_assert!(state.is_waiting());
    if t >= state.latest_start(spec) {
        return Ok(false);
    }
    // Evaluated against the underlying distribution's support, not its
    // discretization: an unbounded tail (log-normal) never triggers this,
    // only genuinely bounded forecasts (point masses) do.
    if forecast.step(t)?.always_below(threshold) {
        state.effective_deadline = t + spec.duration;
        return Ok(true);
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyVariant {
    MdpOptimal,
    PointForecast,
    Naive,
    LatestStart,
}

impl PolicyVariant {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyVariant::MdpOptimal => "mdp",
            PolicyVariant::PointForecast => "point-forecast",
            PolicyVariant::Naive => "naive",
            PolicyVariant::LatestStart => "latest-start",
        }
    }
}

/// A device's bidding policy; MDP-style variants cache the value function
/// computed for the current step.
#[derive(Debug, Clone)]
pub struct BidPolicy {
    pub variant: PolicyVariant,
    pub cached: Option<ValueFunction>,
}

impl BidPolicy {
    pub fn new(variant: PolicyVariant) -> Self {
        Self { variant, cached: None }
    }

    /// Compute this step's bid. May adjust the device's effective deadline
    /// (MDP variants) as a side effect.
    pub fn bid<R: RngCore + ?Sized>(
        &mut self,
        spec: &DeviceSpec,
        state: &mut DeviceState,
        t: usize,
        forecast: &PriceForecast,
        dt_minutes: f64,
        rng: &mut R,
    ) -> Result<BidFunction, BidError> {
        if state.is_finished(spec) || state.is_running(spec) || t >= state.latest_start(spec) {
            // Non-waiting and forced-start cases are policy independent.
            let dummy = ValueFunction {
                start: t,
                latest_start: t,
                values: Vec::new(),
                thresholds: Vec::new(),
            };
            return Ok(threshold_bid(spec, state, t, &dummy, rng));
        }
        match self.variant {
            PolicyVariant::MdpOptimal => self.mdp_bid(spec, state, t, forecast, dt_minutes, false, rng),
            PolicyVariant::PointForecast => {
                let point = forecast.to_point_mass();
                self.mdp_bid(spec, state, t, &point, dt_minutes, true, rng)
            }
            PolicyVariant::Naive => Ok(naive_bid(spec, state, t, forecast, rng)),
            PolicyVariant::LatestStart => Ok(latest_start_bid(spec, state, t, rng)),
        }
    }

    fn mdp_bid<R: RngCore + ?Sized>(
        &mut self,
        spec: &DeviceSpec,
        state: &mut DeviceState,
        t: usize,
        forecast: &PriceForecast,
        dt_minutes: f64,
        force_on_sure_win: bool,
        rng: &mut R,
    ) -> Result<BidFunction, BidError> {
        let vf = compute_value_function(spec, state, t, forecast, dt_minutes)?;
        // Point-forecast devices collapse their deadline the moment the
        // (certain) current price sits below their threshold; with many
        // devices reading the same forecast this bulk-switches the fleet.
        // Probabilistic forecasts keep tail mass on every future step, so
        // the same rule would only ever trigger on the degenerate zero-lead
        // step, pre-empting the very auction that resolves that price; the
        // threshold bid already encodes the start decision there.
        if force_on_sure_win {
            let z = vf.threshold_at(t);
            apply_deadline_adjustment(spec, state, t, forecast, z)?;
        }
        let bid = threshold_bid(spec, state, t, &vf, rng);
        self.cached = Some(vf);
        Ok(bid)
    }
}

/// No-coordination baseline: wait silently until the forced start.
pub fn latest_start_bid<R: RngCore + ?Sized>(
    spec: &DeviceSpec,
    state: &DeviceState,
    t: usize,
    rng: &mut R,
) -> BidFunction {
    let tie_token = draw_token(rng);
    if state.is_waiting() && t < state.latest_start(spec) {
        BidFunction { threshold: f64::NEG_INFINITY, quantity: 0.0, tie_token }
    } else {
        BidFunction { threshold: f64::INFINITY, quantity: spec.pattern[0], tie_token }
    }
}

/// Naive baseline: interpolate from the minimum to the maximum expected price
/// seen before the latest start, so the bid rises as the deadline approaches.
pub fn naive_bid<R: RngCore + ?Sized>(
    spec: &DeviceSpec,
    state: &DeviceState,
    t: usize,
    forecast: &PriceForecast,
    rng: &mut R,
) -> BidFunction {
    let tie_token = draw_token(rng);
    if !state.is_waiting() || t >= state.latest_start(spec) {
        return BidFunction { threshold: f64::INFINITY, quantity: spec.pattern[0], tie_token };
    }
    let latest = spec.latest_start();
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let hi = latest.saturating_sub(1).min(forecast.end().saturating_sub(1));
    for s in forecast.start..=hi {
        let m = forecast.steps[s - forecast.start].mean;
        x_min = x_min.min(m);
        x_max = x_max.max(m);
    }
    let denom = latest as f64 - 1.0;
    let threshold = if !x_min.is_finite() || denom <= 0.0 {
        // Degenerate window: bid the maximum (forced-start semantics).
        if x_max.is_finite() {
            x_max
        } else {
            f64::INFINITY
        }
    } else {
        x_min + (t as f64) * (x_max - x_min) / denom
    };
    BidFunction { threshold, quantity: spec.pattern[0], tie_token }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{uniform_open01, StepDistribution};
    use crate::model::DeviceId;
    use alloc::vec;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn point_forecast(start: usize, means: &[f64]) -> PriceForecast {
        PriceForecast::new(start, means.iter().map(|m| StepDistribution::point_mass(*m)).collect())
    }

    #[test]
    fn expected_start_cost_two_steps() {
        let spec = DeviceSpec::constant(DeviceId(0), 10, 2, 2.0).unwrap();
        let f = point_forecast(0, &[0.0, 4.0, 0.0]);
        let c = expected_start_cost(&spec, 0, 3.0, &f, 1.0).unwrap();
        assert!((c - 14.0).abs() < 1e-12);
    }

    #[test]
    fn expected_start_cost_single_step() {
        let spec = DeviceSpec::constant(DeviceId(0), 10, 1, 2.0).unwrap();
        let f = point_forecast(0, &[9.0]);
        let c = expected_start_cost(&spec, 0, 3.0, &f, 5.0).unwrap();
        assert!((c - 3.0 * 2.0 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn expected_start_cost_long_cycle_oracle() {
        // Independent accumulation oracle for a 12-step constant pattern.
        let d = 12;
        let spec = DeviceSpec::constant(DeviceId(0), 40, d, 2.0).unwrap();
        let means: Vec<f64> = (0..40).map(|i| 0.2 + 0.01 * i as f64).collect();
        let f = point_forecast(0, &means);
        let (t, x_t, dt) = (7usize, 0.31, 5.0);
        let mut oracle = x_t * 2.0 * dt;
        for i in 1..d {
            oracle += means[t + i] * 2.0 * dt;
        }
        let got = expected_start_cost(&spec, t, x_t, &f, dt).unwrap();
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn expected_start_cost_window_overrun() {
        let spec = DeviceSpec::constant(DeviceId(0), 10, 3, 2.0).unwrap();
        let f = point_forecast(0, &[1.0, 1.0]);
        assert!(matches!(expected_start_cost(&spec, 0, 1.0, &f, 1.0), Err(BidError::Forecast(_))));
    }

    #[test]
    fn value_function_base_case() {
        let spec = DeviceSpec::constant(DeviceId(0), 5, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let f = point_forecast(0, &[1.0, 1.0, 1.0, 3.0, 5.0]);
        // t_now equals the latest start (3): single entry, cost at means.
        let vf = compute_value_function(&spec, &state, 3, &f, 1.0).unwrap();
        assert_eq!(vf.values.len(), 1);
        assert!((vf.value_at(3) - (3.0 * 2.0 + 5.0 * 2.0)).abs() < 1e-12);
        assert!(vf.threshold_at(3).is_infinite());
    }

    #[test]
    fn value_function_point_mass_min_recursion() {
        let spec = DeviceSpec::constant(DeviceId(0), 6, 1, 1.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let means = [4.0, 2.0, 3.0, 1.0, 6.0, 6.0];
        let f = point_forecast(0, &means);
        let vf = compute_value_function(&spec, &state, 0, &f, 1.0).unwrap();
        // With degenerate distributions C*_t = min(C^s_t(mean_t), C*_{t+1}).
        let mut expect = means[5];
        for t in (0..5).rev() {
            expect = means[t].min(expect);
            assert!((vf.value_at(t) - expect).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn value_function_uniform_three_point() {
        // Two-step window, X uniform on {1,2,3}, D=1, P=1, dt=1.
        let spec = DeviceSpec::constant(DeviceId(0), 2, 1, 1.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let uni = StepDistribution::empirical(
            vec![(1.0, 1.0 / 3.0), (2.0, 1.0 / 3.0), (3.0, 1.0 / 3.0)],
            2.0,
            0.0,
        )
        .unwrap();
        let f = PriceForecast::new(0, vec![uni.clone(), uni]);
        let vf = compute_value_function(&spec, &state, 0, &f, 1.0).unwrap();
        assert!((vf.value_at(1) - 2.0).abs() < 1e-12);
        assert!((vf.threshold_at(0) - 2.0).abs() < 1e-12);
        // Exhaustive enumeration over the 3-point support: start on 1 or 2,
        // wait on 3 -> (1/3)*2 + (1/3)*1 + (1/3)*2 = 5/3.
        assert!((vf.value_at(0) - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn value_function_infeasible_window() {
        let spec = DeviceSpec::constant(DeviceId(0), 4, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let f = point_forecast(0, &[1.0; 6]);
        assert!(matches!(
            compute_value_function(&spec, &state, 3, &f, 1.0),
            Err(BidError::InfeasibleDevice { .. })
        ));
    }

    #[test]
    fn threshold_indifference() {
        // C^s_t(z_t) == C*_{t+1} for every interior threshold.
        let spec = DeviceSpec::constant(DeviceId(0), 10, 3, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let steps: Vec<StepDistribution> =
            (0..12).map(|i| StepDistribution::log_normal(1.0 + 0.2 * (i % 4) as f64, 0.3).unwrap()).collect();
        let f = PriceForecast::new(0, steps);
        let vf = compute_value_function(&spec, &state, 0, &f, 5.0).unwrap();
        for t in 0..vf.latest_start {
            let z = vf.threshold_at(t);
            let cs = expected_start_cost(&spec, t, z, &f, 5.0).unwrap();
            assert!((cs - vf.value_at(t + 1)).abs() <= 1e-9, "t={t}");
        }
    }

    #[test]
    fn waiting_never_worse_than_unconditional_start() {
        let spec = DeviceSpec::constant(DeviceId(0), 10, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let steps: Vec<StepDistribution> =
            (0..12).map(|i| StepDistribution::log_normal(0.8 + 0.1 * (i % 5) as f64, 0.25).unwrap()).collect();
        let f = PriceForecast::new(0, steps);
        let vf = compute_value_function(&spec, &state, 0, &f, 1.0).unwrap();
        for t in 0..=vf.latest_start {
            let dist = f.step(t).unwrap();
            let unconditional = dist.discretized_mean() * spec.pattern[0]
                + expected_tail_cost(&spec, t, &f, 1.0).unwrap();
            assert!(vf.value_at(t) <= unconditional + 1e-9, "t={t}");
        }
    }

    #[test]
    fn rollout_matches_value_function() {
        // Monte Carlo rollout of the threshold policy against the
        // discretized forecast reproduces C*_{t0} within sampling error.
        let spec = DeviceSpec::constant(DeviceId(0), 8, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let steps: Vec<StepDistribution> =
            (0..9).map(|i| StepDistribution::log_normal(1.0 + 0.15 * (i % 3) as f64, 0.3).unwrap()).collect();
        let f = PriceForecast::new(0, steps);
        let dt = 1.0;
        let vf = compute_value_function(&spec, &state, 0, &f, dt).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 60_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let mut cost = None;
            for t in 0..=vf.latest_start {
                let x = f.step(t).unwrap().sample(&mut rng);
                if t == vf.latest_start || x <= vf.threshold_at(t) {
                    cost = Some(expected_start_cost(&spec, t, x, &f, dt).unwrap());
                    break;
                }
            }
            acc += cost.unwrap();
        }
        let mean = acc / n as f64;
        let c0 = vf.value_at(0);
        assert!((mean - c0).abs() < 0.01 * c0, "rollout {mean} vs C* {c0}");
    }

    #[test]
    fn bid_shapes() {
        let spec = DeviceSpec::constant(DeviceId(0), 10, 2, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dummy = ValueFunction { start: 0, latest_start: 0, values: vec![], thresholds: vec![] };

        let finished = DeviceState { status: 2, effective_deadline: 10 };
        let b = threshold_bid(&spec, &finished, 3, &dummy, &mut rng);
        assert_eq!(b.quantity, 0.0);
        assert!(b.threshold == f64::NEG_INFINITY);

        let running = DeviceState { status: 1, effective_deadline: 10 };
        let b = threshold_bid(&spec, &running, 3, &dummy, &mut rng);
        assert_eq!(b.quantity, 2.0);
        assert!(b.threshold == f64::INFINITY);

        let waiting = DeviceState::waiting(&spec);
        let b = threshold_bid(&spec, &waiting, 8, &dummy, &mut rng);
        assert!(b.threshold == f64::INFINITY, "forced start at d - D");
        assert!(b.tie_token >= 0.0 && b.tie_token < 1.0);
    }

    #[test]
    fn point_mass_future_threshold() {
        let spec = DeviceSpec::constant(DeviceId(0), 4, 1, 1.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let f = point_forecast(0, &[9.0, 9.0, 9.0, 5.0]);
        let vf = compute_value_function(&spec, &state, 2, &f, 1.0).unwrap();
        assert!((vf.threshold_at(2) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn deadline_adjustment_cases() {
        let spec = DeviceSpec::constant(DeviceId(0), 10, 2, 2.0).unwrap();

        // Point mass below the threshold: adjusted.
        let mut state = DeviceState::waiting(&spec);
        let f = point_forecast(0, &[1.0; 10]);
        assert!(apply_deadline_adjustment(&spec, &mut state, 3, &f, 2.0).unwrap());
        assert_eq!(state.effective_deadline, 5);

        // Support above the threshold: unchanged.
        let mut state = DeviceState::waiting(&spec);
        let steps: Vec<StepDistribution> = (0..10).map(|_| StepDistribution::log_normal(1.0, 0.5).unwrap()).collect();
        let f = PriceForecast::new(0, steps);
        assert!(!apply_deadline_adjustment(&spec, &mut state, 3, &f, 2.0).unwrap());
        assert_eq!(state.effective_deadline, 10);

        // Unbounded tail: never adjusted, even when the threshold exceeds
        // every discretization point.
        let mut state = DeviceState::waiting(&spec);
        let d = StepDistribution::log_normal(1.0, 0.2).unwrap();
        let cap = d.max_support();
        let f = PriceForecast::new(0, (0..10).map(|_| d.clone()).collect());
        assert!(!apply_deadline_adjustment(&spec, &mut state, 3, &f, cap).unwrap());
        assert_eq!(state.effective_deadline, 10);

        // Bounded empirical support strictly below the threshold: adjusted.
        let mut state = DeviceState::waiting(&spec);
        let e = StepDistribution::empirical(vec![(0.5, 0.5), (1.5, 0.5)], 1.0, 0.5).unwrap();
        let f = PriceForecast::new(0, (0..10).map(|_| e.clone()).collect());
        assert!(apply_deadline_adjustment(&spec, &mut state, 3, &f, 1.6).unwrap());
        assert_eq!(state.effective_deadline, 5);

        // Support that ties the threshold: the tie stays with the market.
        let mut state = DeviceState::waiting(&spec);
        assert!(!apply_deadline_adjustment(&spec, &mut state, 3, &f, 1.5).unwrap());
        assert_eq!(state.effective_deadline, 10);
    }

    #[test]
    fn deadline_ordering_lemma() {
        // Identical rapid-starting devices with distinct deadlines bid a
        // strictly decreasing sequence of thresholds.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        for _ in 0..80 {
            let d = 2;
            let steps: Vec<StepDistribution> = (0..20)
                .map(|_| {
                    let m = 0.5 + 1.5 * uniform_open01(&mut rng);
                    StepDistribution::log_normal(m, 0.2 + 0.3 * uniform_open01(&mut rng)).unwrap()
                })
                .collect();
            let f = PriceForecast::new(0, steps);
            let deadlines = [8usize, 11, 15];
            let vfs: Vec<ValueFunction> = deadlines
                .iter()
                .enumerate()
                .map(|(i, dl)| {
                    let spec = DeviceSpec::constant(DeviceId(i as u32), *dl, d, 2.0).unwrap();
                    let state = DeviceState::waiting(&spec);
                    compute_value_function(&spec, &state, 0, &f, 5.0).unwrap()
                })
                .collect();
            // The ordering statement requires a positive tail probability
            // above every interior threshold; skip instances where the
            // bounded discretized support violates that precondition.
            let tail_ok = vfs.iter().all(|vf| {
                (vf.start..vf.latest_start)
                    .all(|t| vf.threshold_at(t) < f.step(t).unwrap().max_support())
            });
            if !tail_ok {
                continue;
            }
            checked += 1;
            for w in vfs.windows(2) {
                let (z1, z2) = (w[0].threshold_at(0), w[1].threshold_at(0));
                assert!(z1 > z2, "earlier deadline must bid strictly higher: {z1} vs {z2}");
            }
        }
        assert!(checked >= 20, "too few valid instances: {checked}");
    }

    #[test]
    fn equal_deadlines_equal_thresholds() {
        let steps: Vec<StepDistribution> = (0..12).map(|_| StepDistribution::log_normal(1.0, 0.4).unwrap()).collect();
        let f = PriceForecast::new(0, steps);
        let a = DeviceSpec::constant(DeviceId(0), 9, 2, 2.0).unwrap();
        let b = DeviceSpec::constant(DeviceId(1), 9, 2, 2.0).unwrap();
        let va = compute_value_function(&a, &DeviceState::waiting(&a), 0, &f, 5.0).unwrap();
        let vb = compute_value_function(&b, &DeviceState::waiting(&b), 0, &f, 5.0).unwrap();
        assert_eq!(va.thresholds, vb.thresholds);
    }

    #[test]
    fn naive_bid_interpolates() {
        let spec = DeviceSpec::constant(DeviceId(0), 8, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let f = point_forecast(0, &[0.4, 0.2, 0.9, 0.5, 0.6, 0.3, 0.7, 0.8]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Window is [0, 5]: min 0.2, max 0.9; at t=0 the bid is x_min.
        let b0 = naive_bid(&spec, &state, 0, &f, &mut rng);
        assert!((b0.threshold - 0.2).abs() < 1e-12);
        // At t = d-D-1 = 5 the bid reaches x_max.
        let b5 = naive_bid(&spec, &state, 5, &f, &mut rng);
        assert!((b5.threshold - 0.9).abs() < 1e-12);
    }

    #[test]
    fn naive_degenerate_window_bids_max() {
        let spec = DeviceSpec::constant(DeviceId(0), 3, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let f = point_forecast(0, &[0.4, 0.7, 0.2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = naive_bid(&spec, &state, 0, &f, &mut rng);
        assert!((b.threshold - 0.4).abs() < 1e-12, "window [0,0] -> x_max = 0.4");
    }

    #[test]
    fn latest_start_waits_then_forces() {
        let spec = DeviceSpec::constant(DeviceId(0), 8, 2, 2.0).unwrap();
        let state = DeviceState::waiting(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let early = latest_start_bid(&spec, &state, 2, &mut rng);
        assert_eq!(early.quantity, 0.0);
        let forced = latest_start_bid(&spec, &state, 6, &mut rng);
        assert!(forced.threshold == f64::INFINITY);
    }

    #[test]
    fn point_forecast_policy_equals_mdp_on_point_masses() {
        // An expensive current step, so the forced-start rule stays out of
        // the picture and the two policies reduce to the same backward
        // induction.
        let spec = DeviceSpec::constant(DeviceId(0), 9, 2, 2.0).unwrap();
        let f = point_forecast(0, &[0.9, 0.2, 0.9, 0.5, 0.6, 0.3, 0.7, 0.8, 0.4]);
        let mut rng_a = ChaCha8Rng::seed_from_u64(5);
        let mut rng_b = ChaCha8Rng::seed_from_u64(5);
        let mut pol_a = BidPolicy::new(PolicyVariant::MdpOptimal);
        let mut pol_b = BidPolicy::new(PolicyVariant::PointForecast);
        let mut st_a = DeviceState::waiting(&spec);
        let mut st_b = DeviceState::waiting(&spec);
        let ba = pol_a.bid(&spec, &mut st_a, 0, &f, 1.0, &mut rng_a).unwrap();
        let bb = pol_b.bid(&spec, &mut st_b, 0, &f, 1.0, &mut rng_b).unwrap();
        assert_eq!(ba.threshold, bb.threshold);
        assert_eq!(ba.quantity, bb.quantity);
    }

    #[test]
    fn point_forecast_forces_start_on_sure_win() {
        // A cheap certain current step collapses the point-forecast
        // device's deadline (forced start); the probabilistic policy leaves
        // the decision with the auction.
        let spec = DeviceSpec::constant(DeviceId(0), 9, 2, 2.0).unwrap();
        let f = point_forecast(0, &[0.4, 0.2, 0.9, 0.5, 0.6, 0.3, 0.7, 0.8, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pf = BidPolicy::new(PolicyVariant::PointForecast);
        let mut st = DeviceState::waiting(&spec);
        let b = pf.bid(&spec, &mut st, 0, &f, 1.0, &mut rng).unwrap();
        assert_eq!(b.threshold, f64::INFINITY);
        assert_eq!(st.effective_deadline, 2);

        let mut mdp = BidPolicy::new(PolicyVariant::MdpOptimal);
        let mut st2 = DeviceState::waiting(&spec);
        let b2 = mdp.bid(&spec, &mut st2, 0, &f, 1.0, &mut rng).unwrap();
        assert!(b2.threshold.is_finite());
        assert_eq!(st2.effective_deadline, 9);
    }
}
