//! Hello-packet routing: the spatial radio graph and each node's shortest
//! path to the base station.
//!
//! Edge weights are Euclidean distances. Node–node edges exist when two alive
//! nodes are within the communication range. The base station links to every
//! node within the same range; when no node is that close (the base station is
//! normally far outside the field) it links to the band of nodes within one
//! communication range of the nearest node, so the graph stays rooted.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::net::{NodeId, Position, SensorNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("node {0} has no path to the base station")]
pub struct Unreachable(pub NodeId);

#[derive(Debug, Clone)]
pub struct RadioGraph {
    positions: Vec<Option<Position>>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
    base: Position,
    /// Weight of the direct hop to the base station, per node.
    base_links: Vec<Option<f64>>,
}

impl RadioGraph {
    pub fn base(&self) -> Position {
        self.base
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.positions.get(id).is_some_and(Option::is_some)
    }

    pub fn position(&self, id: NodeId) -> Option<Position> {
        self.positions.get(id).copied().flatten()
    }

    /// Alive node ids, ascending.
    pub fn vertices(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.positions
            .iter()
            .enumerate()
            .filter_map(|(id, p)| p.map(|_| id))
    }

    /// Node–node neighbours of `id`, ascending by id.
    pub fn neighbours(&self, id: NodeId) -> &[(NodeId, f64)] {
        self.adjacency.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn base_link(&self, id: NodeId) -> Option<f64> {
        self.base_links.get(id).copied().flatten()
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.neighbours(a)
            .binary_search_by_key(&b, |&(v, _)| v)
            .ok()
            .map(|i| self.adjacency[a][i].1)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Graph with explicit weights instead of the distance rule. Weights must
    /// be non-negative; positions still locate the trajectory points.
    pub fn from_weighted_edges(
        positions: Vec<Position>,
        base: Position,
        edges: &[(NodeId, NodeId, f64)],
        base_edges: &[(NodeId, f64)],
    ) -> Self {
        let len = positions.len();
        let mut adjacency = vec![Vec::new(); len];
        for &(a, b, w) in edges {
            assert!(w >= 0.0 && a != b);
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            list.dedup_by_key(|e| e.0);
        }
        let mut base_links = vec![None; len];
        for &(id, w) in base_edges {
            assert!(w >= 0.0);
            base_links[id] = Some(w);
        }
        Self {
            positions: positions.into_iter().map(Some).collect(),
            adjacency,
            base,
            base_links,
        }
    }
}

/// Build the radio graph over the alive nodes.
pub fn build_graph(nodes: &[SensorNode], base: Position, range: f64) -> RadioGraph {
    let len = nodes.iter().map(|n| n.id + 1).max().unwrap_or(0);
    let mut positions = vec![None; len];
    for n in nodes.iter().filter(|n| n.is_alive()) {
        positions[n.id] = Some(n.position);
    }

    let alive: Vec<(NodeId, Position)> = positions
        .iter()
        .enumerate()
        .filter_map(|(id, p)| p.map(|p| (id, p)))
        .collect();

    let mut adjacency = vec![Vec::new(); len];
    for (i, &(a, pa)) in alive.iter().enumerate() {
        for &(b, pb) in &alive[i + 1..] {
            let d = pa.distance(&pb);
            if d <= range {
                adjacency[a].push((b, d));
                adjacency[b].push((a, d));
            }
        }
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(v, _)| v);
    }

    let nearest = alive
        .iter()
        .map(|(_, p)| p.distance(&base))
        .fold(f64::INFINITY, f64::min);
    let gateway_range = if nearest <= range {
        range
    } else {
        nearest + range
    };
    let mut base_links = vec![None; len];
    for &(id, p) in &alive {
        let d = p.distance(&base);
        if d <= gateway_range {
            base_links[id] = Some(d);
        }
    }

    RadioGraph {
        positions,
        adjacency,
        base,
        base_links,
    }
}

/// A node's hello-packet path to the base station. The base station itself is
/// the implicit terminus and is not part of `node_path`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Source node id; doubles as the trajectory id.
    pub id: NodeId,
    pub node_path: Vec<NodeId>,
    pub points: Vec<Position>,
    /// Path length including the final hop to the base station.
    pub cost: f64,
}

impl Trajectory {
    /// Build from a node path that follows graph edges and ends next to the
    /// base station. Panics otherwise.
    pub fn from_path(graph: &RadioGraph, node_path: Vec<NodeId>) -> Self {
        assert!(!node_path.is_empty(), "empty trajectory");
        let points: Vec<Position> = node_path
            .iter()
            .map(|&id| graph.position(id).expect("node not in graph"))
            .collect();
        let hops: f64 = node_path
            .windows(2)
            .map(|w| {
                graph
                    .edge_weight(w[0], w[1])
                    .expect("path leaves the graph")
            })
            .sum();
        let last = node_path[node_path.len() - 1];
        let cost = hops + graph.base_link(last).expect("path does not reach the base");
        Self {
            id: node_path[0],
            node_path,
            points,
            cost,
        }
    }

    /// Free-standing trajectory over bare points, ids assigned 0.. in order.
    pub fn from_points(id: NodeId, points: Vec<Position>) -> Self {
        assert!(!points.is_empty(), "empty trajectory");
        Self {
            id,
            node_path: (0..points.len()).collect(),
            points,
            cost: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    dist: f64,
    hops: usize,
}

impl Key {
    fn cmp(&self, other: &Key) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.hops.cmp(&other.hops))
    }
}

#[derive(Debug, PartialEq)]
struct Entry {
    key: Key,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .cmp(&self.key)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NextHop {
    Base,
    Node(NodeId),
}

/// Shortest-path tree rooted at the base station.
///
/// Ties on distance prefer fewer hops, then the lowest next-hop id, which makes
/// every returned path the lexicographically smallest among the optimal ones.
struct PathTree {
    next: Vec<Option<NextHop>>,
}

impl PathTree {
    fn build(graph: &RadioGraph) -> Self {
        let len = graph.positions.len();
        let mut key: Vec<Option<Key>> = vec![None; len];
        let mut settled = vec![false; len];
        let mut heap = BinaryHeap::new();

        for id in graph.vertices() {
            if let Some(w) = graph.base_link(id) {
                let k = Key { dist: w, hops: 1 };
                key[id] = Some(k);
                heap.push(Entry { key: k, node: id });
            }
        }

        while let Some(Entry { key: k, node }) = heap.pop() {
            if settled[node] {
                continue;
            }
            settled[node] = true;
            for &(v, w) in graph.neighbours(node) {
                if settled[v] {
                    continue;
                }
                let candidate = Key {
                    dist: k.dist + w,
                    hops: k.hops + 1,
                };
                let better = key[v].is_none_or(|cur| candidate.cmp(&cur) == Ordering::Less);
                if better {
                    key[v] = Some(candidate);
                    heap.push(Entry {
                        key: candidate,
                        node: v,
                    });
                }
            }
        }

        let mut next = vec![None; len];
        for v in graph.vertices() {
            let Some(kv) = key[v] else { continue };
            if kv.hops == 1 {
                next[v] = Some(NextHop::Base);
                continue;
            }
            // neighbours are sorted, so the first match is the lowest id
            next[v] = graph.neighbours(v).iter().find_map(|&(u, w)| {
                let ku = key[u]?;
                let via = Key {
                    dist: ku.dist + w,
                    hops: ku.hops + 1,
                };
                (via.cmp(&kv) == Ordering::Equal).then_some(NextHop::Node(u))
            });
        }
        Self { next }
    }

    fn path(&self, source: NodeId) -> Option<Vec<NodeId>> {
        let mut path = vec![source];
        let mut cur = source;
        loop {
            match (*self.next.get(cur)?)? {
                NextHop::Base => return Some(path),
                NextHop::Node(u) => {
                    path.push(u);
                    cur = u;
                }
            }
        }
    }
}

/// Shortest hello path from `source` to the base station.
pub fn shortest_path(graph: &RadioGraph, source: NodeId) -> Result<Trajectory, Unreachable> {
    if !graph.contains(source) {
        return Err(Unreachable(source));
    }
    PathTree::build(graph)
        .path(source)
        .map(|p| Trajectory::from_path(graph, p))
        .ok_or(Unreachable(source))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectorySet {
    /// One per reachable node, ascending by source id.
    pub trajectories: Vec<Trajectory>,
    pub unreachable: Vec<NodeId>,
}

pub fn all_trajectories(graph: &RadioGraph) -> TrajectorySet {
    let tree = PathTree::build(graph);
    let mut set = TrajectorySet::default();
    for id in graph.vertices() {
        match tree.path(id) {
            Some(p) => set.trajectories.push(Trajectory::from_path(graph, p)),
            None => set.unreachable.push(id),
        }
    }
    set
}
