//! First-order radio energy model and the analytical per-round cluster
//! energy used to size the number of clusters.
//!
//! Two families live here:
//!
//! * [`transmit_energy`], [`receive_energy`] and [`aggregation_energy`] are the
//!   physically complete per-message costs the simulator charges.
//! * [`head_round_energy`], [`member_round_energy`], [`total_round_energy`] and
//!   [`optimal_cluster_count`] reproduce the closed-form sizing model term for
//!   term. The head's uplink there carries no electronics term and its
//!   per-message electronics cost is the receive-side one, which is what makes
//!   the closed-form cluster count come out as it does.

use std::f64::consts::PI;
use std::num::NonZeroU64;

use crate::error::EnergyError;

/// Message size in bits. Always non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageBits(NonZeroU64);

impl MessageBits {
    /// 516-byte data message.
    pub const DEFAULT: MessageBits = match NonZeroU64::new(516 * 8) {
        Some(b) => MessageBits(b),
        None => unreachable!(),
    };

    pub fn new(bits: u64) -> Result<Self, EnergyError> {
        NonZeroU64::new(bits)
            .map(MessageBits)
            .ok_or(EnergyError::ZeroBits)
    }

    pub fn get(self) -> u64 {
        self.0.get()
    }

    fn as_f64(self) -> f64 {
        self.0.get() as f64
    }
}

impl Default for MessageBits {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Radio constants, all per bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Transmitter electronics, J/bit.
    pub e_tx: f64,
    /// Receiver electronics, J/bit.
    pub e_rx: f64,
    /// Data aggregation, J/bit per fused message.
    pub e_da: f64,
    /// Free-space amplifier, J/(bit·m²).
    pub eps_fs: f64,
    /// Two-ray amplifier, J/(bit·m⁴).
    pub eps_tr: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            e_tx: 50e-9,
            e_rx: 50e-9,
            e_da: 5e-9,
            eps_fs: 10e-12,
            eps_tr: 0.0013e-12,
        }
    }
}

impl EnergyParams {
    /// Crossover distance where the free-space and two-ray amplifier costs meet.
    pub fn crossover_distance(&self) -> f64 {
        (self.eps_fs / self.eps_tr).sqrt()
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let fields = [
            ("e_tx", self.e_tx),
            ("e_rx", self.e_rx),
            ("e_da", self.e_da),
            ("eps_fs", self.eps_fs),
            ("eps_tr", self.eps_tr),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(EnergyError::NonPositiveConstant(name));
            }
        }
        Ok(())
    }
}

/// Energy to transmit one `bits`-sized message over `distance` meters.
pub fn transmit_energy(bits: MessageBits, distance: f64, params: &EnergyParams) -> f64 {
    debug_assert!(distance >= 0.0);
    let b = bits.as_f64();
    let electronics = params.e_tx * b;
    if distance < params.crossover_distance() {
        electronics + params.eps_fs * distance * distance * b
    } else {
        electronics + params.eps_tr * distance.powi(4) * b
    }
}

pub fn receive_energy(bits: MessageBits, params: &EnergyParams) -> f64 {
    params.e_rx * bits.as_f64()
}

/// Cost of fusing `messages` messages of `bits` each.
pub fn aggregation_energy(bits: MessageBits, messages: u64, params: &EnergyParams) -> f64 {
    params.e_da * bits.as_f64() * messages as f64
}

/// Analytical energy a head spends per frame: electronics and aggregation for
/// `nodes_per_cluster` messages plus a two-ray uplink over `uplink_distance`.
pub fn head_round_energy(
    bits: MessageBits,
    nodes_per_cluster: f64,
    uplink_distance: f64,
    params: &EnergyParams,
) -> f64 {
    debug_assert!(nodes_per_cluster >= 0.0 && uplink_distance >= 0.0);
    let b = bits.as_f64();
    b * params.e_rx * nodes_per_cluster
        + b * params.e_da * nodes_per_cluster
        + b * params.eps_tr * uplink_distance.powi(4)
}

/// Mean member-to-head distance when `clusters` heads sit at the centres of
/// equal circular clusters covering a `side`×`side` field.
pub fn expected_member_distance(side: f64, clusters: f64) -> f64 {
    debug_assert!(side > 0.0 && clusters >= 1.0);
    (side * side / (2.0 * PI * clusters)).sqrt()
}

/// Analytical energy a member spends per frame (free-space hop to its head).
pub fn member_round_energy(
    bits: MessageBits,
    side: f64,
    clusters: f64,
    params: &EnergyParams,
) -> f64 {
    let b = bits.as_f64();
    b * params.e_tx + b * params.eps_fs * side * side / (2.0 * PI * clusters)
}

/// Total analytical energy per frame over all `clusters` clusters of an
/// `nodes`-node field.
pub fn total_round_energy(
    bits: MessageBits,
    nodes: f64,
    clusters: f64,
    side: f64,
    uplink_distance: f64,
    params: &EnergyParams,
) -> f64 {
    debug_assert!(nodes >= clusters && clusters >= 1.0);
    let b = bits.as_f64();
    b * (2.0 * params.e_tx * nodes
        + params.e_da * nodes
        + clusters * params.eps_tr * uplink_distance.powi(4)
        + (nodes - clusters) * params.eps_fs * side * side / (2.0 * PI * clusters))
}

/// Closed-form cluster count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterCount {
    pub real: f64,
    /// `real` rounded half-up and clamped to `[1, nodes]`.
    pub count: usize,
}

/// Optimal number of clusters for `nodes` nodes on a `side`×`side` field
/// whose base station is `uplink_distance` away.
///
/// Fails with [`EnergyError::NoOptimum`] when `eps_tr·d⁴ ≤ e_tx`, where the
/// closed form has no real root.
pub fn optimal_cluster_count(
    nodes: usize,
    side: f64,
    uplink_distance: f64,
    params: &EnergyParams,
) -> Result<ClusterCount, EnergyError> {
    let denom = params.eps_tr * uplink_distance.powi(4) - params.e_tx;
    if denom.is_nan() || denom <= 0.0 {
        return Err(EnergyError::NoOptimum { uplink_distance });
    }
    let n = nodes as f64;
    let real = side * ((n / (2.0 * PI)) * (params.eps_fs / denom)).sqrt();
    let rounded = (real + 0.5).floor();
    let count = if rounded < 1.0 {
        1
    } else {
        (rounded as usize).min(nodes.max(1))
    };
    Ok(ClusterCount { real, count })
}
