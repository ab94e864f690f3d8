//! One-shot double-auction clearing per time step: crossing the aggregate
//! step demand with the marginal-cost supply curve, randomized rationing of
//! tied bids, and settlement with budget-imbalance accounting.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::bidding::BidFunction;
use crate::forecast::uniform_open01;
use crate::model::{CostModel, DeviceId, ModelError};

/// Absolute price tolerance for tie detection between a bid threshold and
/// the supply price.
pub const PRICE_TIE_TOL: f64 = 1e-12;
/// Quantity slack when packing tied bids against the supply quantity.
const QTY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuctionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("clearing failure at step {1}: {0}")]
    Clearing(&'static str, usize),
    #[error("tie_break called without a pending tie")]
    NoTie,
}

/// A bid attributed to its submitting device.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmittedBid {
    pub device: DeviceId,
    pub bid: BidFunction,
}

/// Inflexible load plus the flexible bids for one step. Total demand at
/// price `x` is `inflexible + sum of quantities with threshold >= x`, a
/// non-increasing step function.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateDemand {
    pub inflexible: f64,
    pub bids: Vec<SubmittedBid>,
}

impl AggregateDemand {
    pub fn demand_at(&self, x: f64) -> f64 {
        self.inflexible + self.bids.iter().map(|b| b.bid.demand_at(x)).sum::<f64>()
    }
}

/// Tied bids waiting for rationing: all share a threshold equal to the
/// clearing price.
#[derive(Debug, Clone, PartialEq)]
pub struct TieContext {
    pub tied: Vec<SubmittedBid>,
    /// Demand already committed at the clearing price (inflexible plus
    /// higher-threshold bids).
    pub demand_before: f64,
    /// Supply quantity at the clearing price.
    pub supply_quantity: f64,
}

/// Result of clearing one step. `tie` is populated by [`clear`] when the
/// crossing lands on one or more bid thresholds, and consumed by
/// [`tie_break`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarketOutcome {
    pub t: usize,
    pub price: f64,
    pub accepted: Vec<DeviceId>,
    /// Marginal tied device and whether its probabilistic acceptance fired.
    pub marginal: Option<(DeviceId, bool)>,
    pub rho_star: Option<f64>,
    /// Total demand served: inflexible plus accepted flexible bids.
    pub accepted_demand: f64,
    /// Supply quantity at the clearing price (the generation set-point the
    /// generator is paid for).
    pub supply_setpoint: f64,
    /// Flexible generation dispatched to serve the accepted demand.
    pub dispatched: f64,
    /// Load payments minus generator payment, filled in by [`settle`].
    pub imbalance: f64,
    pub tie: Option<TieContext>,
}

impl MarketOutcome {
    pub fn has_pending_tie(&self) -> bool {
        self.tie.is_some()
    }
}

/// Find the price at which the step demand crosses the supply curve.
///
/// If the crossing falls strictly inside a demand step, every bid above the
/// price is accepted and the set-point equals the accepted demand. If it
/// lands on one or more thresholds, those bids are left in a [`TieContext`]
/// for [`tie_break`].
pub fn clear(model: &CostModel, t: usize, demand: &AggregateDemand) -> Result<MarketOutcome, AuctionError> {
    if demand.inflexible < 0.0 {
        return Err(AuctionError::Clearing("negative inflexible load", t));
    }

    // Group bids with positive quantity by threshold, descending.
    let mut active: Vec<&SubmittedBid> =
        demand.bids.iter().filter(|b| b.bid.quantity > 0.0 && b.bid.threshold > f64::NEG_INFINITY).collect();
    active.sort_by(|a, b| {
        b.bid
            .threshold
            .partial_cmp(&a.bid.threshold)
            .unwrap()
            .then(a.device.cmp(&b.device))
    });

    let mut accepted: Vec<DeviceId> = Vec::new();
    let mut served = demand.inflexible;

    let mut i = 0;
    while i < active.len() {
        let threshold = active[i].bid.threshold;
        let mut j = i;
        let mut group_qty = 0.0;
        // Exact equality first: infinite thresholds compare equal but their
        // difference is NaN.
        while j < active.len()
            && (active[j].bid.threshold == threshold
                || (active[j].bid.threshold - threshold).abs() <= PRICE_TIE_TOL)
        {
            group_qty += active[j].bid.quantity;
            j += 1;
        }
        let p_without = model.marginal_price(t, served)?;
        let p_with = model.marginal_price(t, served + group_qty)?;

        if threshold > p_with + PRICE_TIE_TOL {
            // Whole group clears strictly above the resulting supply price.
            for b in &active[i..j] {
                accepted.push(b.device);
            }
            served += group_qty;
            i = j;
            continue;
        }
        if threshold < p_without - PRICE_TIE_TOL {
            // Crossing is strictly inside the previous demand step.
            break;
        }
        // Crossing lands on this group's threshold: tie.
        let price = threshold;
        let supply_q = model.supply_quantity(t, price)?.clamp(served, served + group_qty);
        return Ok(MarketOutcome {
            t,
            price,
            accepted,
            marginal: None,
            rho_star: None,
            accepted_demand: served,
            supply_setpoint: supply_q,
            dispatched: model.flexible_output(t, served),
            imbalance: 0.0,
            tie: Some(TieContext {
                tied: active[i..j].iter().map(|b| (*b).clone()).collect(),
                demand_before: served,
                supply_quantity: supply_q,
            }),
        });
    }

    let price = model.marginal_price(t, served)?;
    Ok(MarketOutcome {
        t,
        price,
        accepted,
        marginal: None,
        rho_star: None,
        accepted_demand: served,
        supply_setpoint: served,
        dispatched: model.flexible_output(t, served),
        imbalance: 0.0,
        tie: None,
    })
}

/// Ration tied bids by their tokens: accept in ascending token order while
/// demand fits under the supply quantity at the clearing price; the first
/// bid that would overshoot is accepted with probability `gamma / P`, where
/// `gamma` is the residual supply.
pub fn tie_break<R: RngCore + ?Sized>(
    mut outcome: MarketOutcome,
    model: &CostModel,
    rng: &mut R,
) -> Result<MarketOutcome, AuctionError> {
    let ctx = outcome.tie.take().ok_or(AuctionError::NoTie)?;
    let mut tied = ctx.tied;
    // Token order; identical tokens fall back to device id for determinism.
    tied.sort_by(|a, b| {
        a.bid
            .tie_token
            .partial_cmp(&b.bid.tie_token)
            .unwrap()
            .then(a.device.cmp(&b.device))
    });

    let room = ctx.supply_quantity - ctx.demand_before;
    let mut used = 0.0;
    let mut rho_star = None;
    let mut served = ctx.demand_before;
    let mut iter = tied.into_iter();
    for sb in iter.by_ref() {
        let p = sb.bid.quantity;
        if used + p <= room + QTY_TOL {
            used += p;
            served += p;
            rho_star = Some(sb.bid.tie_token);
            outcome.accepted.push(sb.device);
            continue;
        }
        // Marginal device.
        let gamma = (room - used).clamp(0.0, p);
        debug_assert!(gamma < p + QTY_TOL);
        let take = uniform_open01(rng) < gamma / p;
        if take {
            served += p;
            rho_star = Some(sb.bid.tie_token);
            outcome.accepted.push(sb.device);
        }
        outcome.marginal = Some((sb.device, take));
        break;
    }
    // Bids after the marginal one are rejected.
    drop(iter);

    outcome.rho_star = rho_star;
    outcome.accepted_demand = served;
    outcome.supply_setpoint = ctx.supply_quantity;
    outcome.dispatched = model.flexible_output(outcome.t, served);
    Ok(outcome)
}

/// Per-step cash flows implied by a finalized outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Settlement {
    /// Payment by each accepted flexible device: `price * quantity * dt`.
    pub device_payments: Vec<(DeviceId, f64)>,
    pub inflexible_payment: f64,
    /// Generator revenue at the clearing price on its set-point.
    pub generator_revenue: f64,
    /// Load payments minus generator payment; nonzero only on tie steps.
    pub imbalance: f64,
}

/// Charge accepted loads the clearing price and pay the generator the
/// clearing price on its set-point; the mismatch on tie steps is the budget
/// imbalance (zero in expectation over tie resolutions).
pub fn settle(outcome: &mut MarketOutcome, demand: &AggregateDemand, dt_minutes: f64) -> Settlement {
    let price = outcome.price;
    let mut device_payments = Vec::with_capacity(outcome.accepted.len());
    let mut load_total = 0.0;
    for id in &outcome.accepted {
        let qty = demand
            .bids
            .iter()
            .find(|b| b.device == *id)
            .map(|b| b.bid.quantity)
            .unwrap_or(0.0);
        let pay = price * qty * dt_minutes;
        load_total += pay;
        device_payments.push((*id, pay));
    }
    let inflexible_payment = price * demand.inflexible * dt_minutes;
    load_total += inflexible_payment;
    let generator_revenue = price * outcome.supply_setpoint * dt_minutes;
    let imbalance = load_total - generator_revenue;
    outcome.imbalance = imbalance;
    Settlement { device_payments, inflexible_payment, generator_revenue, imbalance }
}
