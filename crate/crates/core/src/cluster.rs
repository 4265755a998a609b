//! Trajectory dissimilarity and the clustering routines that turn hello paths
//! into cluster-head sets.
//!
//! Trajectories are compared by their vertex positions only. The one-way
//! distance from `a` to `b` is the mean, over the points of `a`, of each
//! point's distance to the closest point of `b`; the trajectory distance is the
//! larger of the two one-way distances, which makes it symmetric.
//!
//! Clustering runs in three steps over a precomputed [`DissimilarityMatrix`]:
//! sequential leader clustering under a threshold ([`init_clusters`]), medoid
//! selection ([`rep_traj`]), and medoid refinement until the representatives
//! stop changing ([`recluster`]). All indices are positions in the trajectory
//! slice the matrix was built from, and every tie goes to the lowest index.

use std::collections::{BTreeMap, BTreeSet};

use crate::energy::{head_round_energy, EnergyParams, MessageBits};
use crate::net::{NodeId, Position, SensorNode};
use crate::routing::Trajectory;
use crate::sim::assign_members;

/// Hard cap on refinement iterations.
pub const MAX_RECLUSTER_ITERATIONS: usize = 100;

/// Distance from `p` to the nearest vertex of `t`.
pub fn point_to_traj(p: &Position, t: &Trajectory) -> f64 {
    t.points
        .iter()
        .map(|q| p.distance(q))
        .fold(f64::INFINITY, f64::min)
}

/// Mean over the points of `from` of their distance to `to`.
pub fn one_way(from: &Trajectory, to: &Trajectory) -> f64 {
    let total: f64 = from.points.iter().map(|p| point_to_traj(p, to)).sum();
    total / from.points.len() as f64
}

pub fn traj_dist(a: &Trajectory, b: &Trajectory) -> f64 {
    one_way(a, b).max(one_way(b, a))
}

/// Symmetric pairwise trajectory distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Build from a full row-major table. Panics if it isn't square and
    /// symmetric with a zero diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix is not square");
            d.extend_from_slice(row);
        }
        let m = Self { n, d };
        for i in 0..n {
            assert_eq!(m.get(i, i), 0.0, "non-zero diagonal");
            for j in 0..i {
                assert_eq!(m.get(i, j), m.get(j, i), "matrix is not symmetric");
                assert!(m.get(i, j) >= 0.0, "negative dissimilarity");
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of distances from `i` to every member of `cluster`, in cluster order.
    fn cumulative(&self, i: usize, cluster: &[usize]) -> f64 {
        let row = self.row(i);
        cluster.iter().map(|&j| row[j]).sum()
    }
}

pub fn build_matrix(trajs: &[Trajectory]) -> DissimilarityMatrix {
    let n = trajs.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = traj_dist(&trajs[i], &trajs[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DissimilarityMatrix { n, d }
}

/// Sequential leader clustering.
///
/// The lowest unclassified index seeds a cluster; every later unclassified
/// index within `threshold` of that seed joins it. Each returned cluster is
/// ascending and starts with its seed.
pub fn init_clusters(m: &DissimilarityMatrix, threshold: f64) -> Vec<Vec<usize>> {
    let mut classified = vec![false; m.len()];
    let mut clusters = Vec::new();
    for seed in 0..m.len() {
        if classified[seed] {
            continue;
        }
        classified[seed] = true;
        let mut cluster = vec![seed];
        let row = m.row(seed);
        for j in seed + 1..m.len() {
            if !classified[j] && row[j] <= threshold {
                classified[j] = true;
                cluster.push(j);
            }
        }
        clusters.push(cluster);
    }
    clusters
}

/// Medoid: the member with the smallest summed distance to the rest.
pub fn rep_traj(cluster: &[usize], m: &DissimilarityMatrix) -> usize {
    assert!(!cluster.is_empty(), "empty cluster");
    let mut best = (f64::INFINITY, usize::MAX);
    for &i in cluster {
        let c = m.cumulative(i, cluster);
        if c < best.0 || (c == best.0 && i < best.1) {
            best = (c, i);
        }
    }
    best.1
}

/// Clusters with one representative (medoid) each.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlan {
    /// Ascending index lists; together they partition `0..n`.
    pub clusters: Vec<Vec<usize>>,
    /// `representatives[c]` is a member of `clusters[c]`.
    pub representatives: Vec<usize>,
    /// Leader-clustering threshold the plan was seeded from.
    pub threshold: f64,
}

impl ClusterPlan {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Σ over clusters of Σ over members of the distance to the representative.
    pub fn within_cost(&self, m: &DissimilarityMatrix) -> f64 {
        self.clusters
            .iter()
            .zip(&self.representatives)
            .map(|(c, &r)| m.cumulative(r, c))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReclusterOutcome {
    pub plan: ClusterPlan,
    pub iterations: usize,
    /// True when the iteration cap stopped refinement before a fixpoint.
    pub hit_cap: bool,
    /// Within-cluster cost after each assignment step.
    pub cost_trace: Vec<f64>,
}

fn assign_to_reps(m: &DissimilarityMatrix, reps: &[usize]) -> Vec<Vec<usize>> {
    let mut clusters = vec![Vec::new(); reps.len()];
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by_key(|&c| reps[c]);
    for i in 0..m.len() {
        let c = match reps.iter().position(|&r| r == i) {
            Some(own) => own,
            None => {
                let row = m.row(i);
                let mut best = order[0];
                for &c in &order[1..] {
                    if row[reps[c]] < row[reps[best]] {
                        best = c;
                    }
                }
                best
            }
        };
        clusters[c].push(i);
    }
    clusters
}

/// Refine medoids until the representative set is stable.
///
/// Each trajectory joins its nearest representative (a representative always
/// keeps itself), then every cluster's medoid is recomputed.
pub fn recluster(m: &DissimilarityMatrix, initial_reps: &[usize]) -> ReclusterOutcome {
    assert!(!initial_reps.is_empty(), "no initial representatives");
    let mut reps = initial_reps.to_vec();
    let mut cost_trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let clusters = assign_to_reps(m, &reps);
        cost_trace.push(
            clusters
                .iter()
                .zip(&reps)
                .map(|(c, &r)| m.cumulative(r, c))
                .sum(),
        );
        let next: Vec<usize> = clusters.iter().map(|c| rep_traj(c, m)).collect();
        let stable = next == reps;
        if stable || iterations >= MAX_RECLUSTER_ITERATIONS {
            let (clusters, reps) = if stable {
                (clusters, reps)
            } else {
                (assign_to_reps(m, &next), next)
            };
            return ReclusterOutcome {
                plan: ClusterPlan {
                    clusters,
                    representatives: reps,
                    threshold: f64::NAN,
                },
                iterations,
                hit_cap: !stable,
                cost_trace,
            };
        }
        reps = next;
    }
}

/// Search the threshold whose leader clustering yields a cluster count closest
/// to `target_k`, preferring the smaller threshold on ties.
///
/// The cluster structure only changes at matrix entries, so the search runs
/// over the sorted distinct entries.
pub fn tune_threshold(m: &DissimilarityMatrix, target_k: usize) -> (f64, ClusterPlan) {
    assert!(
        target_k >= 1 && target_k <= m.len(),
        "target_k out of range"
    );
    let mut candidates: Vec<f64> = Vec::with_capacity(m.len() * m.len() / 2 + 1);
    candidates.push(0.0);
    for i in 0..m.len() {
        candidates.extend_from_slice(&m.row(i)[i + 1..]);
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best: Option<(usize, f64, Vec<Vec<usize>>)> = None;
    let (mut lo, mut hi) = (0isize, candidates.len() as isize - 1);
    while lo <= hi {
        let mid = ((lo + hi) / 2) as usize;
        let t = candidates[mid];
        let clusters = init_clusters(m, t);
        let k = clusters.len();
        let gap = k.abs_diff(target_k);
        let better = match &best {
            None => true,
            Some((g, bt, _)) => gap < *g || (gap == *g && t < *bt),
        };
        if better {
            best = Some((gap, t, clusters));
        }
        if k > target_k {
            lo = mid as isize + 1;
        } else {
            hi = mid as isize - 1;
        }
    }

    let (_, threshold, clusters) = best.expect("at least one candidate");
    let representatives = clusters.iter().map(|c| rep_traj(c, m)).collect();
    (
        threshold,
        ClusterPlan {
            clusters,
            representatives,
            threshold,
        },
    )
}

/// Cluster so that the representatives' nodes give a head set whose size is
/// closest to `target_heads`.
///
/// Walks the trajectory-cluster count upwards from one, seeding each count with
/// [`tune_threshold`] and refining with [`recluster`], and stops once the head
/// count reaches the target. Ties keep the smaller cluster count.
pub fn plan_for_head_count(
    m: &DissimilarityMatrix,
    trajs: &[Trajectory],
    target_heads: usize,
) -> ClusterPlan {
    assert!(!m.is_empty() && m.len() == trajs.len());
    let mut best: Option<(usize, ClusterPlan)> = None;
    for k in 1..=m.len() {
        let (threshold, seeded) = tune_threshold(m, k);
        let mut plan = recluster(m, &seeded.representatives).plan;
        plan.threshold = threshold;
        let heads = heads_of(trajs, &plan.representatives).len();
        let gap = heads.abs_diff(target_heads);
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, plan));
        }
        if heads >= target_heads {
            break;
        }
    }
    best.expect("at least one trajectory").1
}

/// Union of the node ids on the given trajectories, ascending.
pub fn heads_of(trajs: &[Trajectory], chosen: &[usize]) -> Vec<NodeId> {
    chosen
        .iter()
        .flat_map(|&t| trajs[t].node_path.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// One ranked alternative head set.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityPlan {
    pub rank: usize,
    pub heads: Vec<NodeId>,
    /// Nodes served per head, the head itself included.
    pub members_per_head: BTreeMap<NodeId, usize>,
    pub expected_lifetime_rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriorityPlanList {
    pub plans: Vec<PriorityPlan>,
}

impl PriorityPlanList {
    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn get(&self, rank: usize) -> Option<&PriorityPlan> {
        self.plans.get(rank.checked_sub(1)?)
    }
}

/// What the expected-lifetime estimate needs from the running network.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    pub nodes: &'a [SensorNode],
    pub base: Position,
    pub bits: MessageBits,
    pub params: &'a EnergyParams,
}

/// Ranked head sets for failover.
///
/// Rank `r` takes, from every cluster, the member with the r-th smallest
/// summed distance to its cluster (rank 1 is the medoid). A cluster with fewer
/// than `r` members contributes its last one. Heads are all nodes on the
/// chosen trajectories.
pub fn fault_tolerant_plans(
    plan: &ClusterPlan,
    m: &DissimilarityMatrix,
    trajs: &[Trajectory],
    depth: usize,
    ctx: &PlanContext<'_>,
) -> PriorityPlanList {
    assert!(depth >= 1, "depth must be at least 1");
    let ranked: Vec<Vec<usize>> = plan
        .clusters
        .iter()
        .map(|c| {
            let mut scored: Vec<(f64, usize)> =
                c.iter().map(|&i| (m.cumulative(i, c), i)).collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored.into_iter().map(|(_, i)| i).collect()
        })
        .collect();

    let plans = (1..=depth)
        .map(|rank| {
            let chosen: Vec<usize> = ranked
                .iter()
                .map(|r| r[(rank - 1).min(r.len() - 1)])
                .collect();
            let heads = heads_of(trajs, &chosen);
            let assignment = assign_members(ctx.nodes, &heads);
            let mut members_per_head: BTreeMap<NodeId, usize> =
                heads.iter().map(|&h| (h, 0)).collect();
            for head in assignment.values() {
                *members_per_head.entry(*head).or_default() += 1;
            }
            let expected_lifetime_rounds = heads
                .iter()
                .map(|&h| {
                    let node = &ctx.nodes[h];
                    let served = members_per_head[&h] as f64;
                    let per_round = head_round_energy(
                        ctx.bits,
                        served,
                        node.position.distance(&ctx.base),
                        ctx.params,
                    );
                    (node.residual_energy() / per_round).floor() as u64
                })
                .min()
                .unwrap_or(0);
            PriorityPlan {
                rank,
                heads,
                members_per_head,
                expected_lifetime_rounds,
            }
        })
        .collect();
    PriorityPlanList { plans }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(points: &[(f64, f64)]) -> Trajectory {
        Trajectory::from_points(
            0,
            points.iter().map(|&(x, y)| Position::new(x, y)).collect(),
        )
    }

    fn three_point_matrix() -> DissimilarityMatrix {
        DissimilarityMatrix::from_rows(&[
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
        ])
    }

    #[test]
    fn point_distances() {
        let t = traj(&[(3.0, 4.0), (6.0, 8.0)]);
        assert_eq!(point_to_traj(&Position::new(0.0, 0.0), &t), 5.0);
        assert_eq!(point_to_traj(&Position::new(6.0, 8.0), &t), 0.0);
        let flat = traj(&[(0.0, 0.0), (2.0, 0.0)]);
        assert_eq!(point_to_traj(&Position::new(1.0, 1.0), &flat), 2f64.sqrt());
    }

    #[test]
    fn one_way_values() {
        let a = traj(&[(0.0, 0.0), (0.0, 2.0)]);
        let b = traj(&[(1.0, 0.0), (1.0, 2.0)]);
        assert_eq!(one_way(&a, &b), 1.0);

        let single = traj(&[(0.0, 0.0)]);
        let pair = traj(&[(0.0, 0.0), (0.0, 4.0)]);
        assert_eq!(one_way(&single, &pair), 0.0);
        assert_eq!(one_way(&pair, &single), 2.0);
        assert_eq!(traj_dist(&single, &pair), 2.0);
        assert_eq!(traj_dist(&pair, &single), 2.0);
        assert_eq!(traj_dist(&pair, &pair), 0.0);
    }

    #[test]
    fn matrix_small_cases() {
        let m = build_matrix(&[traj(&[(1.0, 1.0)])]);
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0, 0), 0.0);

        let t = traj(&[(1.0, 1.0), (4.0, 5.0)]);
        let m = build_matrix(&[t.clone(), t]);
        assert!((0..2).all(|i| (0..2).all(|j| m.get(i, j) == 0.0)));
    }

    #[test]
    fn leader_clustering_limits() {
        let m = three_point_matrix();
        assert_eq!(init_clusters(&m, f64::INFINITY), vec![vec![0, 1, 2]]);
        assert_eq!(init_clusters(&m, 0.0), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(init_clusters(&m, 2.0), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn leader_clustering_measures_from_seed() {
        // 1 is near 0, 2 is near 1 but far from the seed 0
        let m = DissimilarityMatrix::from_rows(&[
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ]);
        assert_eq!(init_clusters(&m, 1.5), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn medoid_small_clusters() {
        let m = three_point_matrix();
        assert_eq!(rep_traj(&[2], &m), 2);
        assert_eq!(rep_traj(&[0, 1], &m), 0);
        assert_eq!(rep_traj(&[1, 2], &m), 1);
    }

    #[test]
    fn recluster_fixpoint_in_one_iteration() {
        let m = three_point_matrix();
        let out = recluster(&m, &[0, 2]);
        assert_eq!(out.iterations, 1);
        assert!(!out.hit_cap);
        assert_eq!(out.plan.clusters, vec![vec![0, 1], vec![2]]);
        assert_eq!(out.plan.representatives, vec![0, 2]);
    }

    #[test]
    fn recluster_two_tight_pairs() {
        let trajs = [
            traj(&[(0.0, 0.0)]),
            traj(&[(50.0, 50.0)]),
            traj(&[(0.0, 1.0)]),
            traj(&[(50.0, 51.0)]),
        ];
        let m = build_matrix(&trajs);
        let out = recluster(&m, &[2, 3]);
        let mut clusters = out.plan.clusters.clone();
        clusters.sort();
        assert_eq!(clusters, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(out.plan.representatives, vec![0, 1]);
    }

    #[test]
    fn recluster_single_rep_finds_global_medoid() {
        let trajs: Vec<_> = [(0.0, 0.0), (1.0, 0.0), (5.0, 0.0), (2.0, 0.0), (9.0, 0.0)]
            .iter()
            .map(|&p| traj(&[p]))
            .collect();
        let m = build_matrix(&trajs);
        let out = recluster(&m, &[4]);
        let all: Vec<usize> = (0..5).collect();
        assert_eq!(out.plan.representatives, vec![rep_traj(&all, &m)]);
        assert_eq!(out.plan.clusters, vec![all]);
    }

    #[test]
    fn recluster_keeps_coincident_reps_non_empty() {
        let m = DissimilarityMatrix::from_rows(&[
            vec![0.0, 0.0, 4.0],
            vec![0.0, 0.0, 4.0],
            vec![4.0, 4.0, 0.0],
        ]);
        let out = recluster(&m, &[1, 0]);
        assert!(out.plan.clusters.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn tune_threshold_targets() {
        let m = three_point_matrix();
        let (t, plan) = tune_threshold(&m, 2);
        assert!((1.0..10.0).contains(&t));
        assert_eq!(plan.clusters, vec![vec![0, 1], vec![2]]);
        assert_eq!(plan.representatives, vec![0, 2]);

        let (t, plan) = tune_threshold(&m, 3);
        assert_eq!(t, 0.0);
        assert_eq!(plan.len(), 3);

        let (t, plan) = tune_threshold(&m, 1);
        assert!(t >= m.max_entry());
        assert_eq!(plan.len(), 1);
    }

    #[test]
    fn head_count_target_picks_closest_union() {
        // three parallel two-hop paths: one cluster gives two heads, two give
        // four, three give six
        let trajs: Vec<Trajectory> = (0..3)
            .map(|i| {
                let x = 100.0 * i as f64;
                Trajectory {
                    id: 2 * i,
                    node_path: vec![2 * i, 2 * i + 1],
                    points: vec![Position::new(x, 0.0), Position::new(x, 10.0)],
                    cost: 0.0,
                }
            })
            .collect();
        let m = build_matrix(&trajs);
        let plan = plan_for_head_count(&m, &trajs, 4);
        assert_eq!(plan.len(), 2);
        assert_eq!(heads_of(&trajs, &plan.representatives).len(), 4);
        let plan = plan_for_head_count(&m, &trajs, 1);
        assert_eq!(plan.len(), 1);
        let plan = plan_for_head_count(&m, &trajs, 50);
        assert_eq!(plan.len(), 3);
    }

    #[test]
    fn ranked_plans_walk_cumulative_order() {
        // one cluster of three collinear single-point trajectories
        let nodes: Vec<SensorNode> = [(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| SensorNode::new(i, Position::new(x, y), 2.0))
            .collect();
        let trajs: Vec<Trajectory> = nodes
            .iter()
            .map(|n| Trajectory {
                id: n.id,
                node_path: vec![n.id],
                points: vec![n.position],
                cost: 0.0,
            })
            .collect();
        let m = build_matrix(&trajs);
        // sums: 0 → 4, 1 → 3, 2 → 5
        let plan = ClusterPlan {
            clusters: vec![vec![0, 1, 2]],
            representatives: vec![1],
            threshold: f64::INFINITY,
        };
        let params = EnergyParams::default();
        let ctx = PlanContext {
            nodes: &nodes,
            base: Position::new(1.0, 90.0),
            bits: MessageBits::DEFAULT,
            params: &params,
        };
        let list = fault_tolerant_plans(&plan, &m, &trajs, 4, &ctx);
        let heads: Vec<_> = list.plans.iter().map(|p| p.heads.clone()).collect();
        assert_eq!(heads, vec![vec![1], vec![0], vec![2], vec![2]]);
        assert_eq!(
            list.plans.iter().map(|p| p.rank).collect::<Vec<_>>(),
            [1, 2, 3, 4]
        );
        assert_eq!(list.plans[0].members_per_head[&1], 3);
        // head 1 at 90 m serving three nodes
        let per_round = head_round_energy(MessageBits::DEFAULT, 3.0, 90.0, &params);
        assert_eq!(
            list.plans[0].expected_lifetime_rounds,
            (2.0 / per_round).floor() as u64
        );
    }
}
