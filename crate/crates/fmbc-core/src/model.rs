//! Shared domain types: the time grid, device descriptions, the generation
//! cost model and elementary cost/price arithmetic.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Errors from cost-model evaluation and type construction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
    #[error("demand {demand} kW exceeds tabulated supply capacity {capacity} kW at step {t}")]
    CapacityExceeded { t: usize, demand: f64, capacity: f64 },
    #[error("delta_m requires 0 <= P_i <= P*, got P*={p_star}, P_i={p_i}")]
    DeltaDomain { p_star: f64, p_i: f64 },
}

/// Discrete scheduling horizon: `num_steps` intervals of `step_minutes` each,
/// indexed `start_index .. start_index + num_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub start_index: usize,
    pub num_steps: usize,
    pub step_minutes: f64,
}

impl TimeGrid {
    pub fn new(start_index: usize, num_steps: usize, step_minutes: f64) -> Result<Self, ModelError> {
        if num_steps < 1 {
            return Err(ModelError::Invalid("num_steps must be >= 1"));
        }
        if !(step_minutes > 0.0) {
            return Err(ModelError::Invalid("step_minutes must be > 0"));
        }
        Ok(Self { start_index, num_steps, step_minutes })
    }

    /// One past the last valid step index.
    pub fn end_index(&self) -> usize {
        self.start_index + self.num_steps
    }

    pub fn contains(&self, t: usize) -> bool {
        t >= self.start_index && t < self.end_index()
    }
}

/// Opaque device identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceId(pub u32);

impl core::fmt::Display for DeviceId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An uninterruptible deferrable load: once started it draws
/// `pattern[0..duration]` over `duration` consecutive steps and must be
/// finished by step `deadline` (latest start is `deadline - duration`).
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    pub id: DeviceId,
    pub deadline: usize,
    pub duration: usize,
    pub pattern: Vec<f64>,
}

impl DeviceSpec {
    pub fn new(id: DeviceId, deadline: usize, duration: usize, pattern: Vec<f64>) -> Result<Self, ModelError> {
        if duration < 1 || pattern.len() != duration {
            return Err(ModelError::Invalid("duration must be >= 1 and match pattern length"));
        }
        if pattern.iter().any(|p| !(*p >= 0.0)) {
            return Err(ModelError::Invalid("pattern powers must be >= 0"));
        }
        if deadline < duration {
            return Err(ModelError::Invalid("deadline leaves no feasible start (deadline < duration)"));
        }
        Ok(Self { id, deadline, duration, pattern })
    }

    /// Fixed-power convenience constructor.
    pub fn constant(id: DeviceId, deadline: usize, duration: usize, power: f64) -> Result<Self, ModelError> {
        Self::new(id, deadline, duration, alloc::vec![power; duration])
    }

    /// Latest step at which the device can still start and meet its deadline.
    pub fn latest_start(&self) -> usize {
        self.deadline - self.duration
    }

    /// A rapid-starting device consumes power in its first cycle step.
    pub fn is_rapid_starting(&self) -> bool {
        self.pattern[0] > 0.0
    }
}

/// Run status of a device: `0` waiting, `1..duration` running (value = cycle
/// position of the *next* step), `duration` finished. The effective deadline
/// starts equal to the spec deadline and can only move earlier via the
/// forecast-support deadline adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceState {
    pub status: usize,
    pub effective_deadline: usize,
}

impl DeviceState {
    pub fn waiting(spec: &DeviceSpec) -> Self {
        Self { status: 0, effective_deadline: spec.deadline }
    }

    pub fn is_waiting(&self) -> bool {
        self.status == 0
    }

    pub fn is_finished(&self, spec: &DeviceSpec) -> bool {
        self.status >= spec.duration
    }

    pub fn is_running(&self, spec: &DeviceSpec) -> bool {
        self.status > 0 && self.status < spec.duration
    }

    /// Latest start implied by the effective deadline.
    pub fn latest_start(&self, spec: &DeviceSpec) -> usize {
        self.effective_deadline.saturating_sub(spec.duration)
    }

    /// Advance by one cleared step. `started` is true when a waiting device
    /// was accepted this step. Status never decreases (uninterruptibility).
    pub fn advance(&mut self, spec: &DeviceSpec, started: bool) {
        if self.status == 0 {
            if started {
                self.status = 1;
            }
        } else if self.status < spec.duration {
            self.status += 1;
        }
    }

    /// Power drawn during the current step, given whether a waiting device
    /// starts this step.
    pub fn power_now(&self, spec: &DeviceSpec, started: bool) -> f64 {
        if self.status == 0 {
            if started {
                spec.pattern[0]
            } else {
                0.0
            }
        } else if self.status < spec.duration {
            spec.pattern[self.status]
        } else {
            0.0
        }
    }
}

/// Marginal price curve of the flexible generation fleet, as a function of
/// flexible generation output `P^g >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum CostCurve {
    /// `m(P^g) = P^g / k`, with `k` in kW^2 * min.
    Affine { k: f64 },
    /// Non-decreasing piecewise-linear curve through `(power, price)`
    /// breakpoints; the first breakpoint must be at power 0. Lookups beyond
    /// the last breakpoint are a capacity error.
    Tabulated { points: Vec<(f64, f64)> },
}

impl CostCurve {
    pub fn affine(k: f64) -> Result<Self, ModelError> {
        if !(k > 0.0) {
            return Err(ModelError::Invalid("affine k must be > 0"));
        }
        Ok(CostCurve::Affine { k })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if points.len() < 2 || points[0].0 != 0.0 {
            return Err(ModelError::Invalid("tabulated curve needs >= 2 points starting at power 0"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                return Err(ModelError::Invalid(
                    "tabulated breakpoints must have increasing power and non-decreasing price",
                ));
            }
        }
        if points.iter().any(|(_, m)| !(*m >= 0.0)) {
            return Err(ModelError::Invalid("tabulated prices must be >= 0"));
        }
        Ok(CostCurve::Tabulated { points })
    }

    /// Marginal price at flexible output `pg`.
    pub fn price(&self, pg: f64) -> Result<f64, ModelError> {
        match self {
            CostCurve::Affine { k } => Ok(pg / k),
            CostCurve::Tabulated { points } => {
                let last = points[points.len() - 1];
                if pg > last.0 {
                    return Err(ModelError::CapacityExceeded { t: 0, demand: pg, capacity: last.0 });
                }
                for w in points.windows(2) {
                    let (p0, m0) = w[0];
                    let (p1, m1) = w[1];
                    if pg <= p1 {
                        return Ok(m0 + (m1 - m0) * (pg - p0) / (p1 - p0));
                    }
                }
                Ok(last.1)
            }
        }
    }

    /// Integral of the marginal price from 0 to `pg` (cost per minute of
    /// running at that output).
    pub fn integral(&self, pg: f64) -> Result<f64, ModelError> {
        match self {
            CostCurve::Affine { k } => Ok(pg * pg / (2.0 * k)),
            CostCurve::Tabulated { points } => {
                let last = points[points.len() - 1];
                if pg > last.0 {
                    return Err(ModelError::CapacityExceeded { t: 0, demand: pg, capacity: last.0 });
                }
                let mut acc = 0.0;
                for w in points.windows(2) {
                    let (p0, m0) = w[0];
                    let (p1, m1) = w[1];
                    if pg <= p0 {
                        break;
                    }
                    let hi = if pg < p1 { pg } else { p1 };
                    let m_hi = m0 + (m1 - m0) * (hi - p0) / (p1 - p0);
                    acc += 0.5 * (m0 + m_hi) * (hi - p0);
                }
                Ok(acc)
            }
        }
    }

    /// Largest flexible output whose marginal price does not exceed `price`
    /// (inverse of the marginal curve, taking the right edge of flat
    /// segments).
    pub fn inverse(&self, price: f64) -> Result<f64, ModelError> {
        match self {
            CostCurve::Affine { k } => Ok((price * k).max(0.0)),
            CostCurve::Tabulated { points } => {
                let last = points[points.len() - 1];
                if price >= last.1 {
                    return Ok(last.0);
                }
                if price < points[0].1 {
                    return Ok(0.0);
                }
                let mut q = 0.0;
                for w in points.windows(2) {
                    let (p0, m0) = w[0];
                    let (p1, m1) = w[1];
                    if price >= m1 {
                        q = p1;
                    } else if price >= m0 {
                        if m1 > m0 {
                            q = p0 + (p1 - p0) * (price - m0) / (m1 - m0);
                        } else {
                            q = p1;
                        }
                        break;
                    }
                }
                Ok(q)
            }
        }
    }

    /// Slope dm/dP at output `pg` (segment slope for tabulated curves).
    pub fn slope(&self, pg: f64) -> Result<f64, ModelError> {
        match self {
            CostCurve::Affine { k } => Ok(1.0 / k),
            CostCurve::Tabulated { points } => {
                let last = points[points.len() - 1];
                if pg > last.0 {
                    return Err(ModelError::CapacityExceeded { t: 0, demand: pg, capacity: last.0 });
                }
                for w in points.windows(2) {
                    let (p0, m0) = w[0];
                    let (p1, m1) = w[1];
                    if pg <= p1 {
                        return Ok((m1 - m0) / (p1 - p0));
                    }
                }
                Ok(0.0)
            }
        }
    }
}

/// Generation-side model: the flexible marginal cost curve plus per-step
/// zero-marginal-cost curtailable renewable availability.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub curve: CostCurve,
    /// Renewable availability in kW, indexed by absolute step; steps beyond
    /// the vector have zero availability.
    pub renewable: Vec<f64>,
}

impl CostModel {
    pub fn new(curve: CostCurve, renewable: Vec<f64>) -> Self {
        Self { curve, renewable }
    }

    pub fn affine(k: f64) -> Result<Self, ModelError> {
        Ok(Self::new(CostCurve::affine(k)?, Vec::new()))
    }

    pub fn renewable_at(&self, t: usize) -> f64 {
        self.renewable.get(t).copied().unwrap_or(0.0)
    }

    /// Flexible generation required to serve `total_demand` at step `t`;
    /// renewable surplus is curtailed.
    pub fn flexible_output(&self, t: usize, total_demand: f64) -> f64 {
        (total_demand - self.renewable_at(t)).max(0.0)
    }

    /// Marginal price of serving `total_demand` at step `t`.
    pub fn marginal_price(&self, t: usize, total_demand: f64) -> Result<f64, ModelError> {
        self.curve.price(self.flexible_output(t, total_demand)).map_err(|e| at_step(e, t))
    }

    /// Cost of serving `total_demand` for one interval of `dt_minutes`.
    pub fn generation_cost(&self, t: usize, total_demand: f64, dt_minutes: f64) -> Result<f64, ModelError> {
        Ok(dt_minutes * self.curve.integral(self.flexible_output(t, total_demand)).map_err(|e| at_step(e, t))?)
    }

    /// Marginal-price increment `m_t(P*) - m_t(P* - P_i)`.
    pub fn delta_m(&self, t: usize, p_star: f64, p_i: f64) -> Result<f64, ModelError> {
        if !(p_i >= 0.0) || p_i > p_star {
            return Err(ModelError::DeltaDomain { p_star, p_i });
        }
        Ok(self.marginal_price(t, p_star)? - self.marginal_price(t, p_star - p_i)?)
    }

    /// Total demand servable at `price` (inverse marginal curve plus
    /// renewable availability).
    pub fn supply_quantity(&self, t: usize, price: f64) -> Result<f64, ModelError> {
        Ok(self.curve.inverse(price)? + self.renewable_at(t))
    }

    /// Integral of the marginal price over total demand in `[lo, hi]`.
    pub fn demand_integral(&self, t: usize, lo: f64, hi: f64) -> Result<f64, ModelError> {
        let w = self.renewable_at(t);
        let a = (lo - w).max(0.0);
        let b = (hi - w).max(0.0);
        Ok(self.curve.integral(b).map_err(|e| at_step(e, t))? - self.curve.integral(a).map_err(|e| at_step(e, t))?)
    }

    /// Slope of the marginal price in total demand at `total_demand`
    /// (0 while renewable surplus is being curtailed).
    pub fn demand_slope(&self, t: usize, total_demand: f64) -> Result<f64, ModelError> {
        let pg = total_demand - self.renewable_at(t);
        if pg < 0.0 {
            return Ok(0.0);
        }
        self.curve.slope(pg).map_err(|e| at_step(e, t))
    }
}

fn at_step(e: ModelError, t: usize) -> ModelError {
    match e {
        ModelError::CapacityExceeded { demand, capacity, .. } => ModelError::CapacityExceeded { t, demand, capacity },
        other => other,
    }
}

/// A realized or planned allocation: aggregate load per step plus per-device
/// start times.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Total load (inflexible plus flexible consumption), indexed by
    /// absolute step.
    pub aggregate_load: Vec<f64>,
    pub start_times: BTreeMap<DeviceId, usize>,
}
