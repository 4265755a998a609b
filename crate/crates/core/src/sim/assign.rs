use std::collections::BTreeMap;

use crate::net::{NodeId, SensorNode};

/// Map every alive node to its nearest head; heads map to themselves.
///
/// `heads` must be non-empty, ascending, and index into `nodes`. Equidistant
/// heads resolve to the lower id.
pub fn assign_members(nodes: &[SensorNode], heads: &[NodeId]) -> BTreeMap<NodeId, NodeId> {
    assert!(!heads.is_empty(), "no heads to assign to");
    debug_assert!(heads.windows(2).all(|w| w[0] < w[1]));
    let mut map = BTreeMap::new();
    for node in nodes.iter().filter(|n| n.is_alive()) {
        let head = if heads.binary_search(&node.id).is_ok() {
            node.id
        } else {
            let mut best = heads[0];
            let mut best_d = node.position.distance(&nodes[best].position);
            for &h in &heads[1..] {
                let d = node.position.distance(&nodes[h].position);
                if d < best_d {
                    best = h;
                    best_d = d;
                }
            }
            best
        };
        map.insert(node.id, head);
    }
    map
}
