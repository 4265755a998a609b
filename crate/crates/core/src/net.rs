//! Sensor field: node and configuration types plus random deployment.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::MessageBits;
use crate::error::ConfigViolation;

pub type NodeId = usize;

/// Deterministic generator used for every random draw in a run.
pub type SimRng = ChaCha8Rng;

/// Identifier written to run metadata so traces can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Role {
    #[default]
    Member,
    ClusterHead,
}

/// Outcome of charging a node for one radio action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Charge {
    /// The action completed; this much energy was drawn.
    Paid(f64),
    /// The node could not afford the action. Its remaining energy was drained
    /// and it is now dead.
    Exhausted(f64),
}

impl Charge {
    pub fn drawn(self) -> f64 {
        match self {
            Charge::Paid(e) | Charge::Exhausted(e) => e,
        }
    }

    pub fn completed(self) -> bool {
        matches!(self, Charge::Paid(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub id: NodeId,
    pub position: Position,
    residual_energy: f64,
    alive: bool,
    pub role: Role,
}

impl SensorNode {
    pub fn new(id: NodeId, position: Position, energy: f64) -> Self {
        let energy = energy.max(0.0);
        Self {
            id,
            position,
            residual_energy: energy,
            alive: energy > 0.0,
            role: Role::Member,
        }
    }

    pub fn residual_energy(&self) -> f64 {
        self.residual_energy
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    /// Draw `cost` joules. An action the node cannot afford is not performed
    /// and leaves the node dead at exactly zero.
    pub fn charge(&mut self, cost: f64) -> Charge {
        debug_assert!(self.alive, "dead node {} charged", self.id);
        debug_assert!(cost >= 0.0);
        if cost <= self.residual_energy {
            self.residual_energy -= cost;
            if self.residual_energy == 0.0 {
                self.alive = false;
            }
            Charge::Paid(cost)
        } else {
            let drained = self.residual_energy;
            self.kill();
            Charge::Exhausted(drained)
        }
    }

    /// Zero the battery. Returns the energy that was lost.
    pub fn kill(&mut self) -> f64 {
        let lost = self.residual_energy;
        self.residual_energy = 0.0;
        self.alive = false;
        self.role = Role::Member;
        lost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_nodes: usize,
    /// Side of the square field, meters.
    pub field_side: f64,
    pub base_station: Position,
    /// Neighbour radius of the hello-packet radio graph, meters.
    pub comm_range: f64,
    /// Initial battery, joules.
    pub initial_energy: f64,
    pub message_bits: u64,
    /// Rounds between periodic re-clustering. `None` disables it.
    pub recluster_period: Option<u64>,
    /// Number of ranked fault-tolerant head plans kept by the base station.
    pub ft_depth: usize,
    pub rng_seed: u64,
    pub max_rounds: u64,
    /// Cluster count used when the closed form has no optimum.
    pub fallback_clusters: usize,
    /// Energy-driven head handover inside clusters.
    pub rotation: bool,
}

impl NetworkConfig {
    /// Base station centred on the top edge, 90 m outside the field.
    pub fn default_base_station(field_side: f64) -> Position {
        Position::new(field_side / 2.0, field_side + 90.0)
    }

    /// Base-station distance used for cluster sizing: the gap between the
    /// base station and the nearest point of the field.
    pub fn uplink_distance(&self) -> f64 {
        let clamp = |v: f64| v.clamp(0.0, self.field_side);
        let nearest = Position::new(clamp(self.base_station.x), clamp(self.base_station.y));
        nearest.distance(&self.base_station)
    }

    pub fn bits(&self) -> MessageBits {
        MessageBits::new(self.message_bits).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), Vec<ConfigViolation>> {
        validate_config(self)
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            field_side: 100.0,
            base_station: Self::default_base_station(100.0),
            comm_range: 25.0,
            initial_energy: 2.0,
            message_bits: MessageBits::DEFAULT.get(),
            recluster_period: Some(20),
            ft_depth: 4,
            rng_seed: 1,
            max_rounds: 10_000,
            fallback_clusters: 7,
            rotation: true,
        }
    }
}

/// Collects every violated invariant rather than stopping at the first.
pub fn validate_config(config: &NetworkConfig) -> Result<(), Vec<ConfigViolation>> {
    let mut errors = Vec::new();
    let mut check = |ok: bool, field: &'static str, requirement: &'static str| {
        if !ok {
            errors.push(ConfigViolation { field, requirement });
        }
    };
    let positive = |v: f64| v.is_finite() && v > 0.0;

    check(config.n_nodes >= 1, "n_nodes", "n_nodes ≥ 1");
    check(positive(config.field_side), "field_side", "field_side > 0");
    check(
        config.base_station.is_finite(),
        "base_station",
        "finite coordinates",
    );
    check(positive(config.comm_range), "comm_range", "comm_range > 0");
    check(
        positive(config.initial_energy),
        "initial_energy",
        "initial_energy > 0",
    );
    check(config.message_bits > 0, "message_bits", "message_bits > 0");
    check(
        config.recluster_period != Some(0),
        "recluster_period",
        "recluster_period ≥ 1 or unset",
    );
    check(config.ft_depth >= 1, "ft_depth", "ft_depth ≥ 1");
    check(
        config.fallback_clusters >= 1,
        "fallback_clusters",
        "fallback_clusters ≥ 1",
    );

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Scatter `n_nodes` nodes uniformly over the field, all fully charged.
///
/// The config must already be valid.
pub fn deploy(config: &NetworkConfig, rng: &mut SimRng) -> Vec<SensorNode> {
    let side = config.field_side;
    (0..config.n_nodes)
        .map(|id| {
            let position = loop {
                let p = Position::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side);
                if p != config.base_station {
                    break p;
                }
            };
            SensorNode::new(id, position, config.initial_energy)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert_eq!(validate_config(&NetworkConfig::default()), Ok(()));
    }

    #[test]
    fn reports_every_violation() {
        let config = NetworkConfig {
            n_nodes: 0,
            initial_energy: -1.0,
            ..NetworkConfig::default()
        };
        let errors = validate_config(&config).unwrap_err();
        let fields: Vec<_> = errors.iter().map(|e| e.field).collect();
        assert_eq!(fields, ["n_nodes", "initial_energy"]);
        assert_eq!(errors[0].requirement, "n_nodes ≥ 1");
        assert_eq!(errors[1].requirement, "initial_energy > 0");
    }

    #[test]
    fn default_base_station_is_90m_beyond_field() {
        let config = NetworkConfig::default();
        assert_eq!(config.base_station, Position::new(50.0, 190.0));
        assert_eq!(config.uplink_distance(), 90.0);
    }

    #[test]
    fn single_node_deploy() {
        let config = NetworkConfig {
            n_nodes: 1,
            ..NetworkConfig::default()
        };
        let nodes = deploy(&config, &mut rng_from_seed(3));
        assert_eq!(nodes.len(), 1);
        let p = nodes[0].position;
        assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
        assert_eq!(nodes[0].residual_energy(), 2.0);
    }

    #[test]
    fn default_field_deploy() {
        let config = NetworkConfig::default();
        let nodes = deploy(&config, &mut rng_from_seed(11));
        assert_eq!(nodes.len(), 100);
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(n.id, i);
            assert!(n.is_alive());
            assert_eq!(n.role, Role::Member);
            assert_eq!(n.residual_energy(), 2.0);
            assert!(n.position.x >= 0.0 && n.position.x <= 100.0);
            assert!(n.position.y >= 0.0 && n.position.y <= 100.0);
        }
    }

    #[test]
    fn deploy_is_deterministic() {
        let config = NetworkConfig::default();
        let a = deploy(&config, &mut rng_from_seed(42));
        let b = deploy(&config, &mut rng_from_seed(42));
        assert_eq!(a, b);
        let c = deploy(&config, &mut rng_from_seed(43));
        assert_ne!(a, c);
    }

    #[test]
    fn deploy_quadrants_roughly_uniform() {
        let config = NetworkConfig {
            n_nodes: 10_000,
            ..NetworkConfig::default()
        };
        let nodes = deploy(&config, &mut rng_from_seed(7));
        let mut quadrant = [0usize; 4];
        for n in &nodes {
            let q = (n.position.x >= 50.0) as usize + 2 * (n.position.y >= 50.0) as usize;
            quadrant[q] += 1;
        }
        for count in quadrant {
            assert!((2000..=3000).contains(&count), "{quadrant:?}");
        }
    }

    #[test]
    fn charge_exact_balance_completes_and_kills() {
        let mut n = SensorNode::new(0, Position::default(), 1.0);
        assert_eq!(n.charge(0.25), Charge::Paid(0.25));
        assert!(n.is_alive());
        assert_eq!(n.charge(0.75), Charge::Paid(0.75));
        assert!(!n.is_alive());
        assert_eq!(n.residual_energy(), 0.0);
    }

    #[test]
    fn overdraw_is_refused_and_drains() {
        let mut n = SensorNode::new(0, Position::default(), 0.5);
        let c = n.charge(0.6);
        assert_eq!(c, Charge::Exhausted(0.5));
        assert!(!c.completed());
        assert!(!n.is_alive());
        assert_eq!(n.residual_energy(), 0.0);
    }
}
