use std::fmt;

use crate::net::NodeId;

/// State at the end of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    /// 1-based round index.
    pub round: u64,
    pub alive: usize,
    pub packets_cum: u64,
    pub residual_j: f64,
    /// Heads active during the round, ascending.
    pub heads: Vec<NodeId>,
}

/// A death milestone: rounds fully survived before the milestone death, or
/// not reached within the simulated horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Milestone {
    Round(u64),
    Beyond(u64),
}

impl Milestone {
    pub fn round(self) -> Option<u64> {
        match self {
            Milestone::Round(r) => Some(r),
            Milestone::Beyond(_) => None,
        }
    }
}

impl fmt::Display for Milestone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Milestone::Round(r) => write!(f, "{r}"),
            Milestone::Beyond(max) => write!(f, ">{max}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifetimeSummary {
    pub first_death: Milestone,
    pub half_death: Milestone,
    pub last_death: Milestone,
    pub packets_total: u64,
}

/// Extract first/half/last death milestones from a metrics series of a network
/// that started with `n_nodes` nodes.
///
/// A milestone is the number of rounds completed before the round in which the
/// dead count first reached 1, ⌈N/2⌉, and N respectively.
pub fn lifetime_summary(metrics: &[RoundMetrics], n_nodes: usize) -> LifetimeSummary {
    assert!(!metrics.is_empty(), "no metrics");
    let horizon = metrics[metrics.len() - 1].round;
    let milestone = |dead: usize| {
        metrics
            .iter()
            .find(|m| n_nodes - m.alive.min(n_nodes) >= dead)
            .map_or(Milestone::Beyond(horizon), |m| {
                Milestone::Round(m.round - 1)
            })
    };
    LifetimeSummary {
        first_death: milestone(1),
        half_death: milestone(n_nodes.div_ceil(2)),
        last_death: milestone(n_nodes),
        packets_total: metrics[metrics.len() - 1].packets_cum,
    }
}
