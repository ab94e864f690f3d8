//! Rolling-horizon cost-optimal reference scheduling for identical devices,
//! the exhaustive oracle used to certify it, reference-price forecasting and
//! the deadline-priority realization of a reference solution.
//!
//! The solver minimizes total generation cost over integer per-step start
//! counts subject to cumulative-start (deadline) constraints. Strategy:
//! projected-gradient descent on the continuous relaxation in cumulative
//! coordinates, rounding with feasibility repair, then steepest-descent
//! local search over single start moves (with a pairwise deepening pass on
//! small windows).

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::forecast::{sample_log_normal, PriceForecast, StepDistribution};
use crate::model::{CostModel, DeviceId, ModelError, TimeGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("infeasible: {count} device(s) must start before window step {window_start} (latest start {latest})")]
    Infeasible { window_start: usize, latest: usize, count: usize },
    #[error("enumeration guard exceeded: about {estimate} start tuples")]
    GuardExceeded { estimate: u64 },
    #[error("inconsistent input: {0}")]
    Inconsistent(&'static str),
    #[error("start allocation violates the deadline of device {device} (start {start}, latest {latest})")]
    AllocationDeadline { device: u32, start: usize, latest: usize },
    #[error("constraint violated at window step {step}: {what}")]
    ConstraintViolated { step: usize, what: &'static str },
}

/// One rolling-horizon scheduling instance over window
/// `window_start .. window_start + len` for identical devices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleProblem {
    pub window_start: usize,
    pub dt_minutes: f64,
    /// Per-device constant power draw (kW).
    pub device_power: f64,
    /// Cycle duration in steps.
    pub duration: usize,
    /// `start_requirement[r]`: number of waiting devices whose latest start
    /// is at or before window step `r`. Non-decreasing; the last entry is
    /// the total number of waiting devices.
    pub start_requirement: Vec<usize>,
    /// Devices already running (fixed commitments), as counts per window step.
    pub committed: Vec<u32>,
    /// Inflexible load per window step (kW).
    pub inflexible: Vec<f64>,
}

impl ScheduleProblem {
    /// Build a problem from waiting-device latest starts and running
    /// commitments. Errors if any waiting device can no longer start inside
    /// the window.
    pub fn new(
        window_start: usize,
        window_len: usize,
        dt_minutes: f64,
        device_power: f64,
        duration: usize,
        waiting_latest_starts: &[usize],
        committed: Vec<u32>,
        inflexible: Vec<f64>,
    ) -> Result<Self, ScheduleError> {
        if committed.len() != window_len || inflexible.len() != window_len {
            return Err(ScheduleError::Inconsistent("committed/inflexible length must equal window length"));
        }
        let late: Vec<usize> =
            waiting_latest_starts.iter().copied().filter(|l| *l < window_start).collect();
        if !late.is_empty() {
            return Err(ScheduleError::Infeasible {
                window_start,
                latest: late.into_iter().max().unwrap(),
                count: waiting_latest_starts.iter().filter(|l| **l < window_start).count(),
            });
        }
        let mut req = alloc::vec![0usize; window_len];
        for l in waiting_latest_starts {
            let r = l - window_start;
            if r >= window_len {
                return Err(ScheduleError::Inconsistent("latest start beyond window"));
            }
            req[r] += 1;
        }
        for r in 1..window_len {
            req[r] += req[r - 1];
        }
        Ok(Self {
            window_start,
            dt_minutes,
            device_power,
            duration,
            start_requirement: req,
            committed,
            inflexible,
        })
    }

    pub fn len(&self) -> usize {
        self.inflexible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inflexible.is_empty()
    }

    pub fn total_waiting(&self) -> usize {
        self.start_requirement.last().copied().unwrap_or(0)
    }

    /// Running-device counts implied by start counts plus commitments.
    pub fn occupancy(&self, sigma: &[u32]) -> Vec<u32> {
        let n = self.len();
        let mut o = alloc::vec![0u32; n];
        let mut window_sum = 0u32;
        for r in 0..n {
            window_sum += sigma[r];
            if r >= self.duration {
                window_sum -= sigma[r - self.duration];
            }
            o[r] = self.committed[r] + window_sum;
        }
        o
    }

    fn step_cost(&self, model: &CostModel, r: usize, occupancy: u32) -> Result<f64, ScheduleError> {
        let load = self.inflexible[r] + occupancy as f64 * self.device_power;
        Ok(model.generation_cost(self.window_start + r, load, self.dt_minutes)?)
    }

    pub fn objective(&self, model: &CostModel, sigma: &[u32]) -> Result<f64, ScheduleError> {
        let o = self.occupancy(sigma);
        let mut total = 0.0;
        for r in 0..self.len() {
            total += self.step_cost(model, r, o[r])?;
        }
        Ok(total)
    }
}

/// Cost-optimal start counts, occupancy, dispatch and reference prices for
/// one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub window_start: usize,
    pub sigma: Vec<u32>,
    pub running: Vec<u32>,
    pub flexible_gen: Vec<f64>,
    pub prices: Vec<f64>,
    pub objective: f64,
}

impl ReferenceSolution {
    fn from_sigma(problem: &ScheduleProblem, model: &CostModel, sigma: Vec<u32>) -> Result<Self, ScheduleError> {
        let o = problem.occupancy(&sigma);
        let n = problem.len();
        let mut gen = Vec::with_capacity(n);
        let mut prices = Vec::with_capacity(n);
        let mut objective = 0.0;
        for r in 0..n {
            let t = problem.window_start + r;
            let load = problem.inflexible[r] + o[r] as f64 * problem.device_power;
            gen.push(model.flexible_output(t, load));
            prices.push(model.marginal_price(t, load)?);
            objective += model.generation_cost(t, load, problem.dt_minutes)?;
        }
        Ok(Self { window_start: problem.window_start, sigma, running: o, flexible_gen: gen, prices, objective })
    }
}

/// Number of devices with deadlines at or before each grid step:
/// `phi[i] = #{deadline <= start_index + i}` for `i in 0..=num_steps`.
pub fn deadline_counts(deadlines: &[usize], grid: &TimeGrid) -> Vec<usize> {
    let mut phi = alloc::vec![0usize; grid.num_steps + 1];
    for d in deadlines {
        let i = d.saturating_sub(grid.start_index).min(grid.num_steps);
        phi[i] += 1;
    }
    for i in 1..=grid.num_steps {
        phi[i] += phi[i - 1];
    }
    phi
}

const RELAX_ITERS: usize = 250;
/// Window size up to which the pairwise deepening and earliest-start
/// canonicalization passes run; the quadratic pair scan is only affordable
/// (and only needed for exact-oracle agreement) on small instances.
const DEEPEN_LIMIT: usize = 12;

/// Solve the windowed scheduling problem. `warm` seeds the search with a
/// previous solution (repaired for feasibility) instead of the relaxation.
pub fn reference_schedule(
    problem: &ScheduleProblem,
    model: &CostModel,
    warm: Option<&[u32]>,
) -> Result<ReferenceSolution, ScheduleError> {
    let n = problem.len();
    let total = problem.total_waiting();
    if total == 0 {
        return ReferenceSolution::from_sigma(problem, model, alloc::vec![0u32; n]);
    }
    let mut sigma = match warm {
        Some(w) => {
            let mut s: Vec<u32> = w.to_vec();
            s.resize(n, 0);
            repair_feasibility(&mut s, &problem.start_requirement);
            s
        }
        None => round_relaxation(problem, model)?,
    };
    local_search(problem, model, &mut sigma)?;
    if n <= DEEPEN_LIMIT {
        canonicalize_earliest(problem, model, &mut sigma)?;
    }
    let solution = ReferenceSolution::from_sigma(problem, model, sigma)?;
    verify_reference(problem, model, &solution)?;
    Ok(solution)
}

/// Continuous per-step load implied by a cumulative-start curve.
fn relaxed_load(problem: &ScheduleProblem, c: &[f64], r: usize) -> f64 {
    let d = problem.duration;
    let prev = if r >= d { c[r - d] } else { 0.0 };
    problem.inflexible[r] + (problem.committed[r] as f64 + c[r] - prev) * problem.device_power
}

/// Projected-gradient descent on the continuous relaxation in cumulative
/// coordinates. Returns the cumulative-start curve.
fn solve_relaxation(
    problem: &ScheduleProblem,
    model: &CostModel,
    iters: usize,
) -> Result<Vec<f64>, ScheduleError> {
    let n = problem.len();
    let d = problem.duration;
    let total = problem.total_waiting() as f64;
    let req = &problem.start_requirement;

    // Start from the deadline envelope.
    let mut c: Vec<f64> = req.iter().map(|r| *r as f64).collect();
    let objective = |c: &[f64]| -> Result<f64, ScheduleError> {
        let mut acc = 0.0;
        for r in 0..n {
            acc += model.generation_cost(problem.window_start + r, relaxed_load(problem, c, r), problem.dt_minutes)?;
        }
        Ok(acc)
    };

    let mut obj = objective(&c)?;
    let mut alpha = 1.0;
    let mut grad = alloc::vec![0.0; n];
    for _ in 0..iters {
        for r in 0..n {
            let here = model.marginal_price(problem.window_start + r, relaxed_load(problem, &c, r))?;
            let later = if r + d < n {
                model.marginal_price(problem.window_start + r + d, relaxed_load(problem, &c, r + d))?
            } else {
                0.0
            };
            grad[r] = problem.device_power * problem.dt_minutes * (here - later);
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut trial: Vec<f64> = (0..n).map(|r| c[r] - alpha * grad[r]).collect();
            project_cumulative(&mut trial, req, total);
            let trial_obj = objective(&trial)?;
            if trial_obj < obj - 1e-15 {
                c = trial;
                obj = trial_obj;
                alpha *= 1.3;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(c)
}

const PRICE_RELAX_ITERS: usize = 2000;

/// Marginal prices along the continuous relaxation of the window problem.
/// The fluid optimum equalizes each device's candidate window sums exactly,
/// so these prices carry no integer-rounding wobble; they are the broadcast
/// signal, while the integer schedule remains the dispatch plan.
pub fn relaxed_prices(problem: &ScheduleProblem, model: &CostModel) -> Result<Vec<f64>, ScheduleError> {
    let n = problem.len();
    let c = if problem.total_waiting() == 0 {
        alloc::vec![0.0; n]
    } else {
        solve_relaxation(problem, model, PRICE_RELAX_ITERS)?
    };
    let mut prices = Vec::with_capacity(n);
    for r in 0..n {
        prices.push(model.marginal_price(problem.window_start + r, relaxed_load(problem, &c, r))?);
    }
    Ok(prices)
}

/// Relaxation rounded to integers with feasibility repair.
fn round_relaxation(problem: &ScheduleProblem, model: &CostModel) -> Result<Vec<u32>, ScheduleError> {
    let n = problem.len();
    let total = problem.total_waiting() as f64;
    let req = &problem.start_requirement;
    let c = solve_relaxation(problem, model, RELAX_ITERS)?;

    // Round the cumulative curve, keeping it monotone and feasible.
    let mut c_int = alloc::vec![0u32; n];
    let mut prev = 0u32;
    for r in 0..n {
        let rounded = libm::round(c[r]) as i64;
        let v = rounded
            .max(req[r] as i64)
            .max(prev as i64)
            .min(total as i64) as u32;
        c_int[r] = v;
        prev = v;
    }
    let mut sigma = alloc::vec![0u32; n];
    let mut last = 0u32;
    for r in 0..n {
        sigma[r] = c_int[r] - last;
        last = c_int[r];
    }
    repair_feasibility(&mut sigma, req);
    Ok(sigma)
}

/// Project onto {non-decreasing, req <= c <= total}: isotonic fit (pool
/// adjacent violators) followed by clamping to the monotone bounds.
fn project_cumulative(c: &mut [f64], req: &[usize], total: f64) {
    let n = c.len();
    // PAV for a non-decreasing fit under L2.
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut weight: Vec<f64> = Vec::with_capacity(n);
    for r in 0..n {
        let mut v = c[r];
        let mut w = 1.0;
        while let Some(&last) = level.last() {
            if last <= v {
                break;
            }
            let lw = weight.pop().unwrap();
            let lv = level.pop().unwrap();
            v = (v * w + lv * lw) / (w + lw);
            w += lw;
        }
        level.push(v);
        weight.push(w);
    }
    let mut idx = 0;
    for (v, w) in level.iter().zip(&weight) {
        for _ in 0..*w as usize {
            c[idx] = *v;
            idx += 1;
        }
    }
    for r in 0..n {
        c[r] = c[r].max(req[r] as f64).min(total);
    }
}

/// Make the prefix sums of `sigma` satisfy `req` while keeping the total at
/// `req`'s last entry: add missing starts as late as allowed, then drop
/// surplus starts from the latest slots with slack.
fn repair_feasibility(sigma: &mut [u32], req: &[usize]) {
    let n = sigma.len();
    if n == 0 {
        return;
    }
    let mut prefix = 0usize;
    for r in 0..n {
        prefix += sigma[r] as usize;
        if prefix < req[r] {
            sigma[r] += (req[r] - prefix) as u32;
            prefix = req[r];
        }
    }
    let total = *req.last().unwrap();
    let mut surplus = prefix.saturating_sub(total);
    // Remove from the back; removing at r lowers every prefix from r on, so
    // walk suffix slack.
    let mut r = n;
    while surplus > 0 && r > 0 {
        r -= 1;
        while surplus > 0 && sigma[r] > 0 {
            // Removal is safe if all prefixes >= r keep their requirement.
            let mut ok = true;
            let mut p = 0usize;
            for (i, s) in sigma.iter().enumerate() {
                p += *s as usize;
                if i >= r && p - 1 < req[i] {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
            sigma[r] -= 1;
            surplus -= 1;
        }
    }
}

/// Cost change from moving one start from slot `a` to slot `b`.
fn move_delta(
    problem: &ScheduleProblem,
    model: &CostModel,
    o: &[u32],
    a: usize,
    b: usize,
) -> Result<f64, ScheduleError> {
    let d = problem.duration;
    let n = problem.len();
    let mut delta = 0.0;
    let lo = a.min(b);
    let hi = (a.max(b) + d).min(n);
    for r in lo..hi {
        let in_a = r >= a && r < a + d;
        let in_b = r >= b && r < b + d;
        if in_a == in_b {
            continue;
        }
        let new_o = if in_b { o[r] + 1 } else { o[r] - 1 };
        delta += problem.step_cost(model, r, new_o)? - problem.step_cost(model, r, o[r])?;
    }
    Ok(delta)
}

/// For each slot, the first later window step whose prefix slack is zero
/// (moves may not push a start past it).
fn move_limits(sigma: &[u32], req: &[usize]) -> Vec<usize> {
    let n = sigma.len();
    let mut limit = alloc::vec![n; n];
    let mut prefix = 0usize;
    let mut slack = alloc::vec![0usize; n];
    for r in 0..n {
        prefix += sigma[r] as usize;
        slack[r] = prefix - req[r];
    }
    let mut next_zero = n;
    for r in (0..n).rev() {
        if slack[r] == 0 {
            next_zero = r;
        }
        limit[r] = next_zero;
    }
    limit
}

fn improvement_tol(objective: f64) -> f64 {
    1e-12 * (1.0 + objective.abs())
}

/// Steepest-descent local search over single start moves.
fn local_search(problem: &ScheduleProblem, model: &CostModel, sigma: &mut [u32]) -> Result<(), ScheduleError> {
    let n = problem.len();
    loop {
        let o = problem.occupancy(sigma);
        let obj = problem.objective(model, sigma)?;
        let tol = improvement_tol(obj);
        let limit = move_limits(sigma, &problem.start_requirement);
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            if sigma[a] == 0 {
                continue;
            }
            for b in 0..n {
                if b == a {
                    continue;
                }
                if b > a && b > limit[a] {
                    break;
                }
                let delta = move_delta(problem, model, &o, a, b)?;
                if delta < best.map(|(_, _, d)| d).unwrap_or(-tol) {
                    best = Some((a, b, delta));
                }
            }
        }
        match best {
            Some((a, b, _)) => {
                sigma[a] -= 1;
                sigma[b] += 1;
            }
            None => {
                if n <= DEEPEN_LIMIT && deepen_pair(problem, model, sigma)? {
                    continue;
                }
                return Ok(());
            }
        }
    }
}

/// Try one improving pair of simultaneous moves; used on small windows where
/// single moves can stall short of the optimum.
fn deepen_pair(problem: &ScheduleProblem, model: &CostModel, sigma: &mut [u32]) -> Result<bool, ScheduleError> {
    let n = problem.len();
    let obj = problem.objective(model, sigma)?;
    let tol = improvement_tol(obj);
    let moves: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    v.push((a, b));
                }
            }
        }
        v
    };
    let feasible = |s: &[u32]| -> bool {
        let mut p = 0usize;
        for (r, x) in s.iter().enumerate() {
            p += *x as usize;
            if p < problem.start_requirement[r] {
                return false;
            }
        }
        true
    };
    for (a1, b1) in &moves {
        if sigma[*a1] == 0 {
            continue;
        }
        let mut s1 = sigma.to_vec();
        s1[*a1] -= 1;
        s1[*b1] += 1;
        if !feasible(&s1) {
            continue;
        }
        for (a2, b2) in &moves {
            if s1[*a2] == 0 {
                continue;
            }
            let mut s2 = s1.clone();
            s2[*a2] -= 1;
            s2[*b2] += 1;
            if !feasible(&s2) {
                continue;
            }
            if problem.objective(model, &s2)? < obj - tol {
                sigma.copy_from_slice(&s2);
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Shift cost-neutral starts to earlier slots (earliest-start tie-break on
/// small windows).
fn canonicalize_earliest(
    problem: &ScheduleProblem,
    model: &CostModel,
    sigma: &mut [u32],
) -> Result<(), ScheduleError> {
    loop {
        let o = problem.occupancy(sigma);
        let obj = problem.objective(model, sigma)?;
        let tol = improvement_tol(obj);
        let mut moved = false;
        'outer: for a in (1..problem.len()).rev() {
            if sigma[a] == 0 {
                continue;
            }
            for b in 0..a {
                let delta = move_delta(problem, model, &o, a, b)?;
                if delta <= tol {
                    sigma[a] -= 1;
                    sigma[b] += 1;
                    moved = true;
                    break 'outer;
                }
            }
        }
        if !moved {
            return Ok(());
        }
    }
}

const BRUTE_FORCE_GUARD: u64 = 10_000_000;

/// Exhaustive enumeration over all feasible start tuples; exact global
/// optimum with the lexicographically earliest start vector among ties.
/// Refuses instances beyond the tuple guard.
pub fn brute_force_schedule(problem: &ScheduleProblem, model: &CostModel) -> Result<ReferenceSolution, ScheduleError> {
    let n = problem.len();
    let total = problem.total_waiting();
    if total == 0 {
        return ReferenceSolution::from_sigma(problem, model, alloc::vec![0u32; n]);
    }
    // Per-device latest starts (window-relative), ascending.
    let mut latests = Vec::with_capacity(total);
    let req = &problem.start_requirement;
    let mut prev = 0usize;
    for (r, cum) in req.iter().enumerate() {
        for _ in prev..*cum {
            latests.push(r);
        }
        prev = *cum;
    }

    // Count non-decreasing start tuples s_i <= latest_i before enumerating.
    let mut count = alloc::vec![0u64; n + 1];
    count[0] = 1; // counts by last start value are folded below
    let mut tuples: Vec<Vec<u64>> = Vec::with_capacity(total + 1);
    tuples.push(alloc::vec![1u64; n + 1]); // prefix counts: ways with s_i <= v
    for l in &latests {
        let prevrow = tuples.last().unwrap().clone();
        let mut row = alloc::vec![0u64; n + 1];
        // ways for this device to start at exactly v (non-decreasing chain)
        let mut acc = 0u64;
        for v in 0..n {
            if v <= *l {
                acc = acc.saturating_add(prevrow[v + 1].min(BRUTE_FORCE_GUARD));
            }
            row[v + 1] = acc.min(u64::MAX);
        }
        tuples.push(row);
    }
    let estimate = tuples.last().unwrap()[n];
    let _ = &mut count;
    if estimate > BRUTE_FORCE_GUARD {
        return Err(ScheduleError::GuardExceeded { estimate });
    }

    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut sigma = alloc::vec![0u32; n];
    enumerate_starts(problem, model, &latests, 0, 0, &mut sigma, &mut best)?;
    let (_, sigma) = best.ok_or(ScheduleError::Inconsistent("no feasible start tuple"))?;
    ReferenceSolution::from_sigma(problem, model, sigma)
}

fn enumerate_starts(
    problem: &ScheduleProblem,
    model: &CostModel,
    latests: &[usize],
    device: usize,
    min_start: usize,
    sigma: &mut Vec<u32>,
    best: &mut Option<(f64, Vec<u32>)>,
) -> Result<(), ScheduleError> {
    if device == latests.len() {
        let obj = problem.objective(model, sigma)?;
        let better = match best {
            None => true,
            Some((b, _)) => obj < *b - improvement_tol(*b),
        };
        if better {
            *best = Some((obj, sigma.clone()));
        }
        return Ok(());
    }
    // Devices are processed in ascending latest-start order; enumerating
    // starts in ascending order yields the lexicographically earliest
    // optimum first.
    for s in min_start..=latests[device] {
        sigma[s] += 1;
        enumerate_starts(problem, model, latests, device + 1, s, sigma, best)?;
        sigma[s] -= 1;
    }
    Ok(())
}

/// Independent constraint checker for a reference solution; written against
/// the constraint definitions rather than the solver's bookkeeping.
pub fn verify_reference(
    problem: &ScheduleProblem,
    model: &CostModel,
    solution: &ReferenceSolution,
) -> Result<(), ScheduleError> {
    let n = problem.len();
    if solution.sigma.len() != n || solution.running.len() != n {
        return Err(ScheduleError::Inconsistent("solution length mismatch"));
    }
    let d = problem.duration;
    let mut prefix = 0usize;
    let mut o_prev = 0u32;
    for r in 0..n {
        prefix += solution.sigma[r] as usize;
        if prefix < problem.start_requirement[r] {
            return Err(ScheduleError::ConstraintViolated { step: r, what: "cumulative starts below deadline requirement" });
        }
        // Occupancy recursion: o_t = sigma_t + o_{t-1} - sigma_{t-D},
        // with commitments tracked separately.
        let flex_prev = if r == 0 { 0 } else { o_prev - problem.committed[r - 1] };
        let dropped = if r >= d { solution.sigma[r - d] } else { 0 };
        let flex_now = solution.sigma[r] + flex_prev - dropped;
        let o_now = flex_now + problem.committed[r];
        if o_now != solution.running[r] {
            return Err(ScheduleError::ConstraintViolated { step: r, what: "occupancy recursion mismatch" });
        }
        o_prev = o_now;

        let t = problem.window_start + r;
        let load = problem.inflexible[r] + o_now as f64 * problem.device_power;
        let gen = solution.flexible_gen[r];
        if gen < -1e-9 {
            return Err(ScheduleError::ConstraintViolated { step: r, what: "negative flexible generation" });
        }
        if gen + model.renewable_at(t) < load - 1e-9 {
            return Err(ScheduleError::ConstraintViolated { step: r, what: "supply below demand" });
        }
        let price = model.marginal_price(t, load)?;
        if (price - solution.prices[r]).abs() > 1e-9 {
            return Err(ScheduleError::ConstraintViolated { step: r, what: "reference price mismatch" });
        }
    }
    if prefix != problem.total_waiting() {
        return Err(ScheduleError::ConstraintViolated { step: n.saturating_sub(1), what: "total starts != waiting devices" });
    }
    Ok(())
}

/// Assign the reference start slots to waiting devices in earliest-deadline
/// order, breaking ties uniformly at random. The result is an evaluation
/// aid; it is never fed back to the device agents.
pub fn realize_start_priority<R: RngCore + ?Sized>(
    solution: &ReferenceSolution,
    waiting: &[(DeviceId, usize)],
    rng: &mut R,
) -> Result<Vec<(DeviceId, usize)>, ScheduleError> {
    let total: u32 = solution.sigma.iter().sum();
    if total as usize != waiting.len() {
        return Err(ScheduleError::Inconsistent("start slots do not match waiting devices"));
    }
    let mut queue: Vec<(DeviceId, usize, u64)> =
        waiting.iter().map(|(id, latest)| (*id, *latest, rng.next_u64())).collect();
    queue.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)));
    let mut out = Vec::with_capacity(waiting.len());
    let mut next = 0usize;
    for (r, s) in solution.sigma.iter().enumerate() {
        let t = solution.window_start + r;
        for _ in 0..*s {
            let (id, latest, _) = queue[next];
            next += 1;
            if t > latest {
                return Err(ScheduleError::AllocationDeadline { device: id.0, start: t, latest });
            }
            out.push((id, t));
        }
    }
    Ok(out)
}

/// Forecast-noise parameterization: standard deviations grow linearly with
/// lead time, scaled by the day-ahead uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastModel {
    pub day_ahead_uncertainty: f64,
    pub issue: usize,
}

impl ForecastModel {
    pub fn sd_at(&self, reference_price: f64, t: usize, dt_minutes: f64) -> f64 {
        let lead_hours = (t - self.issue) as f64 * dt_minutes / 60.0;
        reference_price * self.day_ahead_uncertainty * lead_hours / 24.0
    }

    /// Build the device-facing probabilistic forecast from reference prices:
    /// each step's expected price is itself one log-normal draw around the
    /// reference price, and devices receive a log-normal with that mean and
    /// the lead-time SD. Zero reference prices become point masses at zero.
    pub fn generate<R: RngCore + ?Sized>(
        &self,
        reference_prices: &[f64],
        window_start: usize,
        dt_minutes: f64,
        rng: &mut R,
    ) -> PriceForecast {
        debug_assert!(window_start >= self.issue);
        let steps = reference_prices
            .iter()
            .enumerate()
            .map(|(r, x_star)| {
                let t = window_start + r;
                if *x_star <= 0.0 {
                    return StepDistribution::point_mass(0.0);
                }
                let sd = self.sd_at(*x_star, t, dt_minutes);
                let xbar = sample_log_normal(*x_star, sd, rng);
                StepDistribution::log_normal(xbar, sd).expect("positive mean")
            })
            .collect();
        PriceForecast::new(window_start, steps)
    }
}
