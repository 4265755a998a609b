//! Round-based lifetime simulation.
//!
//! Each round every alive member sends one message to its head, the head fuses
//! the received messages with its own reading and uplinks one packet straight
//! to the base station. Between rounds the engine re-forms clusters when the
//! period elapses or a head handover happened, and fails over to a ranked
//! alternative head set when a head dies.
//!
//! Costs are charged with [`transmit_energy`], [`receive_energy`] and
//! [`aggregation_energy`]. A node that cannot afford an action skips it and
//! dies at exactly zero, so every joule that leaves a battery is accounted for
//! in [`EnergyLedger`].

mod assign;
mod faults;
mod metrics;

pub use assign::assign_members;
pub use faults::FaultScript;
pub use metrics::{lifetime_summary, LifetimeSummary, Milestone, RoundMetrics};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;

use crate::cluster::{
    build_matrix, fault_tolerant_plans, heads_of, plan_for_head_count, ClusterPlan,
    DissimilarityMatrix, PlanContext, PriorityPlanList,
};
use crate::energy::{
    aggregation_energy, optimal_cluster_count, receive_energy, transmit_energy, EnergyParams,
    MessageBits,
};
use crate::error::SimError;
use crate::net::{deploy, rng_from_seed, NetworkConfig, NodeId, Role, SensorNode, SimRng};
use crate::routing::{all_trajectories, build_graph, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    /// Trajectory-clustering head selection with ranked failover.
    Fttc,
    /// Heads drawn uniformly at random each epoch.
    Baseline,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Fttc => "fttc",
            Protocol::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fttc" => Ok(Protocol::Fttc),
            "baseline" => Ok(Protocol::Baseline),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// Where every joule went.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub initial: f64,
    /// Energy drawn by radio actions, including the final drain of a node that
    /// could not afford its last action.
    pub charged: f64,
    /// Energy zeroed by injected faults.
    pub fault_drained: f64,
}

/// Current head set and who reports to whom.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    /// Ascending.
    pub heads: Vec<NodeId>,
    /// Alive node → head; heads map to themselves.
    pub assignment: BTreeMap<NodeId, NodeId>,
    /// Rank of the priority plan in force; 1 right after clustering.
    pub rank: usize,
    /// Round in which the epoch was formed.
    pub formed_at: u64,
}

impl Epoch {
    fn new(nodes: &[SensorNode], heads: Vec<NodeId>, rank: usize, formed_at: u64) -> Self {
        let assignment = assign_members(nodes, &heads);
        Self {
            heads,
            assignment,
            rank,
            formed_at,
        }
    }

    /// Members of each head, ascending, heads excluded.
    pub fn clusters(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> =
            self.heads.iter().map(|&h| (h, Vec::new())).collect();
        for (&node, &head) in &self.assignment {
            if node != head {
                out.entry(head).or_default().push(node);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimEvent {
    Fault {
        round: u64,
        node: NodeId,
    },
    /// Full cluster formation at the start of `round`.
    Setup {
        round: u64,
        heads: Vec<NodeId>,
    },
    /// A head handed its cluster to a better-charged member after `round`.
    Handover {
        round: u64,
        from: NodeId,
        to: NodeId,
    },
    /// Ranked alternative activated at the start of `round`.
    Failover {
        round: u64,
        rank: usize,
        heads: Vec<NodeId>,
    },
}

/// Trajectory clustering for one alive set. Positions never change, so the
/// clustering only needs redoing after a death.
#[derive(Debug, Clone)]
struct Clustering {
    alive: Vec<bool>,
    trajectories: Vec<Trajectory>,
    matrix: DissimilarityMatrix,
    plan: ClusterPlan,
}

/// One simulated network.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: NetworkConfig,
    params: EnergyParams,
    protocol: Protocol,
    bits: MessageBits,
    nodes: Vec<SensorNode>,
    rng: SimRng,
    faults: FaultScript,
    epoch: Option<Epoch>,
    plans: PriorityPlanList,
    clustering: Option<Clustering>,
    recluster_pending: bool,
    round: u64,
    packets: u64,
    ledger: EnergyLedger,
    metrics: Vec<RoundMetrics>,
    events: Vec<SimEvent>,
}

impl Simulation {
    /// Deploy a fresh field from `config.rng_seed`.
    pub fn new(config: NetworkConfig, protocol: Protocol) -> Result<Self, SimError> {
        config.validate().map_err(SimError::InvalidConfig)?;
        let mut rng = rng_from_seed(config.rng_seed);
        let nodes = deploy(&config, &mut rng);
        Ok(Self::assemble(config, protocol, nodes, rng))
    }

    /// Run over a prepared node list. Ids must be `0..len`.
    pub fn with_nodes(
        config: NetworkConfig,
        protocol: Protocol,
        nodes: Vec<SensorNode>,
    ) -> Result<Self, SimError> {
        let mut errors = config.validate().err().unwrap_or_default();
        if nodes.is_empty() || nodes.iter().enumerate().any(|(i, n)| n.id != i) {
            errors.push(crate::error::ConfigViolation {
                field: "nodes",
                requirement: "non-empty with ids 0..N−1",
            });
        }
        if !errors.is_empty() {
            return Err(SimError::InvalidConfig(errors));
        }
        let rng = rng_from_seed(config.rng_seed);
        Ok(Self::assemble(config, protocol, nodes, rng))
    }

    fn assemble(
        config: NetworkConfig,
        protocol: Protocol,
        nodes: Vec<SensorNode>,
        rng: SimRng,
    ) -> Self {
        let initial = nodes.iter().map(SensorNode::residual_energy).sum();
        Self {
            bits: config.bits(),
            config,
            params: EnergyParams::default(),
            protocol,
            nodes,
            rng,
            faults: FaultScript::new(),
            epoch: None,
            plans: PriorityPlanList::default(),
            clustering: None,
            recluster_pending: false,
            round: 0,
            packets: 0,
            ledger: EnergyLedger {
                initial,
                ..EnergyLedger::default()
            },
            metrics: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn with_faults(mut self, faults: FaultScript) -> Result<Self, SimError> {
        if let Some(max) = faults.max_node() {
            if max >= self.nodes.len() {
                return Err(SimError::FaultScript {
                    line: 0,
                    message: format!("node {max} does not exist"),
                });
            }
        }
        self.faults = faults;
        Ok(self)
    }

    pub fn with_energy_params(mut self, params: EnergyParams) -> Result<Self, SimError> {
        params.validate()?;
        self.params = params;
        Ok(self)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn epoch(&self) -> Option<&Epoch> {
        self.epoch.as_ref()
    }

    pub fn priority_plans(&self) -> &PriorityPlanList {
        &self.plans
    }

    /// Trajectory clustering behind the current priority plans.
    pub fn cluster_plan(&self) -> Option<&ClusterPlan> {
        self.clustering.as_ref().map(|c| &c.plan)
    }

    pub fn metrics(&self) -> &[RoundMetrics] {
        &self.metrics
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    pub fn ledger(&self) -> EnergyLedger {
        self.ledger
    }

    pub fn residual_total(&self) -> f64 {
        self.nodes.iter().map(SensorNode::residual_energy).sum()
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_alive()).count()
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.max_rounds || self.alive_count() == 0
    }

    /// Advance one round. Returns `Ok(None)` once the network is dead or the
    /// round limit is reached.
    pub fn step(&mut self) -> Result<Option<&RoundMetrics>, SimError> {
        if self.is_finished() {
            return Ok(None);
        }
        let round = self.round + 1;
        self.inject_faults(round);

        if self.alive_count() > 0 {
            self.prepare_epoch(round)?;
        }
        self.round = round;
        self.run_round();
        if self.protocol == Protocol::Fttc && self.config.rotation {
            self.rotate_if_needed();
        }
        Ok(self.metrics.last())
    }

    /// Run to completion and return the metrics series.
    pub fn run(mut self) -> Result<Vec<RoundMetrics>, SimError> {
        while self.step()?.is_some() {}
        Ok(self.metrics)
    }

    fn inject_faults(&mut self, round: u64) {
        let kills = self.faults.kills_at(round).to_vec();
        for id in kills {
            let node = &mut self.nodes[id];
            if node.is_alive() {
                self.ledger.fault_drained += node.kill();
                self.events.push(SimEvent::Fault { round, node: id });
            }
        }
    }

    fn prepare_epoch(&mut self, round: u64) -> Result<(), SimError> {
        let Some(epoch) = &self.epoch else {
            return self.epoch_setup(round);
        };
        let head_lost = epoch.heads.iter().any(|&h| !self.nodes[h].is_alive());
        if head_lost {
            return self.apply_fault_tolerance(round);
        }
        let period_due = self
            .config
            .recluster_period
            .is_some_and(|p| round - epoch.formed_at >= p);
        if period_due || self.recluster_pending {
            self.epoch_setup(round)?;
        }
        Ok(())
    }

    fn cluster_target(&self, alive: usize) -> usize {
        optimal_cluster_count(
            alive,
            self.config.field_side,
            self.config.uplink_distance(),
            &self.params,
        )
        .map_or(self.config.fallback_clusters, |c| c.count)
        .clamp(1, alive)
    }

    /// Form clusters from scratch over the alive topology.
    pub fn epoch_setup(&mut self, round: u64) -> Result<(), SimError> {
        let alive = self.alive_count();
        if alive == 0 {
            return Err(SimError::NetworkDead);
        }
        let target = self.cluster_target(alive);
        let heads = match self.protocol {
            Protocol::Fttc => self.trajectory_heads(target),
            Protocol::Baseline => self.baseline_round_policy(target),
        };
        let mut epoch = Epoch::new(&self.nodes, heads, 1, round);
        if self.protocol == Protocol::Fttc && self.config.rotation {
            self.hand_over(&mut epoch, round);
        }
        self.install(epoch);
        self.recluster_pending = false;
        let heads = self
            .epoch
            .as_ref()
            .map(|e| e.heads.clone())
            .unwrap_or_default();
        self.events.push(SimEvent::Setup { round, heads });
        Ok(())
    }

    fn trajectory_heads(&mut self, target: usize) -> Vec<NodeId> {
        let alive: Vec<bool> = self.nodes.iter().map(SensorNode::is_alive).collect();
        if self.clustering.as_ref().is_none_or(|c| c.alive != alive) {
            let graph = build_graph(
                &self.nodes,
                self.config.base_station,
                self.config.comm_range,
            );
            // the node nearest the base station always links to it, so this
            // is never empty while anything lives
            let trajectories = all_trajectories(&graph).trajectories;
            let matrix = build_matrix(&trajectories);
            let plan = plan_for_head_count(&matrix, &trajectories, target);
            self.clustering = Some(Clustering {
                alive,
                trajectories,
                matrix,
                plan,
            });
        }
        let c = self.clustering.as_ref().expect("clustering just built");

        let ctx = PlanContext {
            nodes: &self.nodes,
            base: self.config.base_station,
            bits: self.bits,
            params: &self.params,
        };
        self.plans = fault_tolerant_plans(
            &c.plan,
            &c.matrix,
            &c.trajectories,
            self.config.ft_depth,
            &ctx,
        );
        heads_of(&c.trajectories, &c.plan.representatives)
    }

    /// Draw `target` distinct heads uniformly from the alive nodes.
    pub fn baseline_round_policy(&mut self, target: usize) -> Vec<NodeId> {
        let alive: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.is_alive())
            .map(|n| n.id)
            .collect();
        let mut heads: Vec<NodeId> = if target >= alive.len() {
            alive
        } else {
            sample(&mut self.rng, alive.len(), target)
                .into_iter()
                .map(|i| alive[i])
                .collect()
        };
        heads.sort_unstable();
        heads
    }

    fn install(&mut self, epoch: Epoch) {
        for n in &mut self.nodes {
            n.role = Role::Member;
        }
        for &h in &epoch.heads {
            self.nodes[h].role = Role::ClusterHead;
        }
        self.epoch = Some(epoch);
    }

    /// Replace a head set that lost a node with the next fully-alive ranked
    /// plan, or re-cluster when none is left.
    pub fn apply_fault_tolerance(&mut self, round: u64) -> Result<(), SimError> {
        let current = self.epoch.as_ref().map_or(0, |e| e.rank);
        if self.protocol == Protocol::Fttc {
            let replacement = self
                .plans
                .plans
                .iter()
                .filter(|p| p.rank > current)
                .find(|p| p.heads.iter().all(|&h| self.nodes[h].is_alive()))
                .map(|p| (p.rank, p.heads.clone()));
            if let Some((rank, heads)) = replacement {
                let formed_at = self.epoch.as_ref().map_or(round, |e| e.formed_at);
                let epoch = Epoch::new(&self.nodes, heads.clone(), rank, formed_at);
                self.install(epoch);
                self.recluster_pending = false;
                self.events.push(SimEvent::Failover { round, rank, heads });
                return Ok(());
            }
        }
        self.epoch_setup(round)
    }

    fn charge(&mut self, id: NodeId, cost: f64) -> bool {
        let c = self.nodes[id].charge(cost);
        self.ledger.charged += c.drawn();
        c.completed()
    }

    /// One collect → fuse → uplink cycle over every cluster.
    pub fn run_round(&mut self) {
        let bits = self.bits;
        let base = self.config.base_station;
        let (heads, clusters) = match &self.epoch {
            Some(e) if self.alive_count() > 0 => (e.heads.clone(), e.clusters()),
            _ => (Vec::new(), BTreeMap::new()),
        };

        for (&head, members) in &clusters {
            if !self.nodes[head].is_alive() {
                continue;
            }
            let head_pos = self.nodes[head].position;
            let mut received = 0u64;
            let mut head_ok = true;
            for &m in members {
                if !self.nodes[m].is_alive() {
                    continue;
                }
                let d = self.nodes[m].position.distance(&head_pos);
                if !self.charge(m, transmit_energy(bits, d, &self.params)) {
                    continue;
                }
                if !self.charge(head, receive_energy(bits, &self.params)) {
                    head_ok = false;
                    break;
                }
                received += 1;
            }
            if !head_ok {
                continue;
            }
            let fused = received + 1;
            if !self.charge(head, aggregation_energy(bits, fused, &self.params)) {
                continue;
            }
            let uplink = transmit_energy(bits, head_pos.distance(&base), &self.params);
            if self.charge(head, uplink) {
                self.packets += fused;
            }
        }

        self.metrics.push(RoundMetrics {
            round: self.round,
            alive: self.alive_count(),
            packets_cum: self.packets,
            residual_j: self.residual_total(),
            heads,
        });
    }

    /// Hand each cluster whose head now holds less energy than every alive
    /// member to its best-charged member. Any handover schedules re-clustering
    /// for the next round.
    pub fn rotate_if_needed(&mut self) {
        let Some(mut epoch) = self.epoch.take() else {
            return;
        };
        if self.hand_over(&mut epoch, self.round) {
            self.recluster_pending = true;
        }
        self.install(epoch);
    }

    fn hand_over(&mut self, epoch: &mut Epoch, round: u64) -> bool {
        let mut changed = false;
        for (head, members) in epoch.clusters() {
            let head_node = &self.nodes[head];
            if !head_node.is_alive() {
                continue;
            }
            let alive: Vec<&SensorNode> = members
                .iter()
                .map(|&m| &self.nodes[m])
                .filter(|n| n.is_alive())
                .collect();
            let Some(weakest) = alive.iter().map(|n| n.residual_energy()).reduce(f64::min) else {
                continue;
            };
            if head_node.residual_energy() >= weakest {
                continue;
            }
            let mut best = alive[0];
            for n in &alive[1..] {
                if n.residual_energy() > best.residual_energy() {
                    best = n;
                }
            }
            let to = best.id;
            for h in epoch.assignment.values_mut() {
                if *h == head {
                    *h = to;
                }
            }
            let pos = epoch.heads.binary_search(&head).expect("head listed");
            epoch.heads.remove(pos);
            let at = epoch.heads.binary_search(&to).unwrap_err();
            epoch.heads.insert(at, to);
            self.events.push(SimEvent::Handover {
                round,
                from: head,
                to,
            });
            changed = true;
        }
        changed
    }
}

/// Deploy, simulate until the network dies or `max_rounds`, and return the
/// metrics series.
pub fn run_simulation(
    config: &NetworkConfig,
    protocol: Protocol,
) -> Result<Vec<RoundMetrics>, SimError> {
    Simulation::new(config.clone(), protocol)?.run()
}
