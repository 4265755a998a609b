use fttc::energy::{receive_energy, transmit_energy};
use fttc::{
    all_trajectories, assign_members, build_graph, build_matrix, init_clusters, lifetime_summary,
    one_way, recluster, rep_traj, shortest_path, traj_dist, tune_threshold, EnergyParams,
    FaultScript, MessageBits, NetworkConfig, Position, Protocol, SensorNode, Simulation,
    Trajectory,
};
use proptest::prelude::*;

fn position() -> impl Strategy<Value = Position> {
    (0.0..100.0f64, 0.0..100.0f64).prop_map(|(x, y)| Position::new(x, y))
}

fn trajectory(id: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(position(), 1..6).prop_map(move |pts| Trajectory::from_points(id, pts))
}

fn trajectories(max: usize) -> impl Strategy<Value = Vec<Trajectory>> {
    (1..=max).prop_flat_map(|n| (0..n).map(trajectory).collect::<Vec<_>>())
}

fn field(max: usize) -> impl Strategy<Value = Vec<SensorNode>> {
    prop::collection::vec(position(), 1..=max).prop_map(|ps| {
        ps.into_iter()
            .enumerate()
            .map(|(i, p)| SensorNode::new(i, p, 2.0))
            .collect()
    })
}

proptest! {
    #[test]
    fn trajectory_distance_is_a_symmetric_dissimilarity(a in trajectory(0), b in trajectory(1)) {
        let d = traj_dist(&a, &b);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, traj_dist(&b, &a));
        prop_assert_eq!(traj_dist(&a, &a), 0.0);
        prop_assert!(d >= one_way(&a, &b) && d >= one_way(&b, &a));
    }

    #[test]
    fn energy_is_linear_in_message_size(d in 0.0..300.0f64, k in 1u64..50) {
        let p = EnergyParams::default();
        let one = MessageBits::new(100).unwrap();
        let many = MessageBits::new(100 * k).unwrap();
        let tx = transmit_energy(one, d, &p);
        prop_assert!(tx > 0.0);
        prop_assert!((transmit_energy(many, d, &p) / tx - k as f64).abs() < 1e-9);
        prop_assert!((receive_energy(many, &p) / receive_energy(one, &p) - k as f64).abs() < 1e-9);
    }

    #[test]
    fn transmit_cost_grows_with_distance(a in 0.0..300.0f64, b in 0.0..300.0f64) {
        let p = EnergyParams::default();
        let bits = MessageBits::DEFAULT;
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(transmit_energy(bits, near, &p) <= transmit_energy(bits, far, &p));
    }

    #[test]
    fn shortest_paths_are_consistent_and_locally_optimal(nodes in field(30)) {
        let base = Position::new(50.0, 190.0);
        let graph = build_graph(&nodes, base, 25.0);
        let set = all_trajectories(&graph);
        prop_assert_eq!(set.trajectories.len() + set.unreachable.len(), nodes.len());
        for t in &set.trajectories {
            // every suffix of a shortest path is the shortest path of its first node
            for i in 1..t.node_path.len() {
                let sub = shortest_path(&graph, t.node_path[i]).unwrap();
                prop_assert_eq!(&sub.node_path[..], &t.node_path[i..]);
            }
            // no single detour through a neighbour beats it
            let s = t.node_path[0];
            if let Some(w) = graph.base_link(s) {
                prop_assert!(t.cost <= w + 1e-9);
            }
            for &(v, w) in graph.neighbours(s) {
                if let Ok(via) = shortest_path(&graph, v) {
                    prop_assert!(t.cost <= w + via.cost + 1e-9);
                }
            }
        }
    }

    #[test]
    fn leader_clusters_partition_and_stay_near_their_seed(
        trajs in trajectories(20),
        frac in 0.0..1.0f64,
    ) {
        let m = build_matrix(&trajs);
        let threshold = frac * m.max_entry();
        let clusters = init_clusters(&m, threshold);
        let mut seen: Vec<usize> = clusters.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..trajs.len()).collect::<Vec<_>>());
        for c in &clusters {
            for &j in c {
                prop_assert!(m.get(c[0], j) <= threshold);
            }
        }
    }

    #[test]
    fn medoid_minimises_summed_distance(trajs in trajectories(10)) {
        let m = build_matrix(&trajs);
        let cluster: Vec<usize> = (0..trajs.len()).collect();
        let rep = rep_traj(&cluster, &m);
        let cost = |i: usize| cluster.iter().map(|&j| m.get(i, j)).sum::<f64>();
        for &i in &cluster {
            prop_assert!(cost(rep) <= cost(i));
        }
    }

    #[test]
    fn recluster_never_increases_cost(trajs in trajectories(30), k in 1usize..6) {
        let m = build_matrix(&trajs);
        let k = k.min(trajs.len());
        let (_, seeded) = tune_threshold(&m, k);
        let out = recluster(&m, &seeded.representatives);
        for w in out.cost_trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(!out.hit_cap);
        let plan = &out.plan;
        let mut seen: Vec<usize> = plan.clusters.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..trajs.len()).collect::<Vec<_>>());
        for (c, &r) in plan.clusters.iter().zip(&plan.representatives) {
            prop_assert!(c.contains(&r));
            prop_assert_eq!(rep_traj(c, &m), r);
        }
    }

    #[test]
    fn members_join_their_nearest_head(nodes in field(25), picks in prop::collection::btree_set(0usize..25, 1..5)) {
        let heads: Vec<usize> = picks.into_iter().filter(|&h| h < nodes.len()).collect();
        prop_assume!(!heads.is_empty());
        let assignment = assign_members(&nodes, &heads);
        prop_assert_eq!(assignment.len(), nodes.len());
        for (&node, &head) in &assignment {
            if heads.contains(&node) {
                prop_assert_eq!(head, node);
                continue;
            }
            let d = nodes[node].position.distance(&nodes[head].position);
            for &h in &heads {
                prop_assert!(d <= nodes[node].position.distance(&nodes[h].position));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulations_conserve_energy_and_are_deterministic(
        n in 1usize..40,
        seed in any::<u64>(),
        energy in 0.01..0.2f64,
        fttc in any::<bool>(),
        rotation in any::<bool>(),
        faults in prop::collection::vec((1u64..60, 0usize..40), 0..6),
    ) {
        let config = NetworkConfig {
            n_nodes: n,
            initial_energy: energy,
            rng_seed: seed,
            rotation,
            max_rounds: 400,
            ..NetworkConfig::default()
        };
        let protocol = if fttc { Protocol::Fttc } else { Protocol::Baseline };
        let mut script = FaultScript::new();
        for (round, node) in faults {
            if node < n {
                script.kill(round, node);
            }
        }
        let build = || {
            Simulation::new(config.clone(), protocol)
                .unwrap()
                .with_faults(script.clone())
                .unwrap()
        };
        let mut sim = build();
        while sim.step().unwrap().is_some() {}
        let ledger = sim.ledger();
        let spent = ledger.initial - sim.residual_total();
        let accounted = ledger.charged + ledger.fault_drained;
        prop_assert!((spent - accounted).abs() <= 1e-9 * ledger.initial);
        prop_assert!(sim.nodes().iter().all(|node| node.residual_energy() >= 0.0));

        let metrics = sim.metrics();
        for w in metrics.windows(2) {
            prop_assert!(w[1].packets_cum >= w[0].packets_cum);
            prop_assert!(w[1].alive <= w[0].alive);
            prop_assert!(w[1].residual_j <= w[0].residual_j);
        }
        let s = lifetime_summary(metrics, n);
        let order = |m: fttc::Milestone| match m {
            fttc::Milestone::Round(r) => r,
            fttc::Milestone::Beyond(h) => h + 1,
        };
        prop_assert!(order(s.first_death) <= order(s.half_death));
        prop_assert!(order(s.half_death) <= order(s.last_death));

        let again = build().run().unwrap();
        prop_assert_eq!(metrics, &again[..]);
    }
}
