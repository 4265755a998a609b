//! Scripted hardware faults.
//!
//! One directive per line: `kill <round> <node_id>`. Blank lines and text after
//! `#` are ignored. A killed node's battery is zeroed at the start of the round.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::SimError;
use crate::net::NodeId;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultScript {
    kills: BTreeMap<u64, Vec<NodeId>>,
}

impl FaultScript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kill(&mut self, round: u64, node: NodeId) -> &mut Self {
        let list = self.kills.entry(round).or_default();
        if !list.contains(&node) {
            list.push(node);
            list.sort_unstable();
        }
        self
    }

    pub fn kills_at(&self, round: u64) -> &[NodeId] {
        self.kills.get(&round).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.kills.is_empty()
    }

    pub fn max_node(&self) -> Option<NodeId> {
        self.kills.values().flatten().copied().max()
    }

    pub fn to_script(&self) -> String {
        let mut out = String::new();
        for (round, nodes) in &self.kills {
            for node in nodes {
                out.push_str(&format!("kill {round} {node}\n"));
            }
        }
        out
    }
}

impl FromStr for FaultScript {
    type Err = SimError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut script = FaultScript::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SimError::FaultScript {
                line: line_no,
                message,
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["kill", round, node] => {
                    let round: u64 = round
                        .parse()
                        .map_err(|_| err(format!("bad round `{round}`")))?;
                    if round == 0 {
                        return Err(err("rounds start at 1".into()));
                    }
                    let node: NodeId = node
                        .parse()
                        .map_err(|_| err(format!("bad node id `{node}`")))?;
                    script.kill(round, node);
                }
                [directive, ..] if *directive != "kill" => {
                    return Err(err(format!("unknown directive `{directive}`")));
                }
                _ => return Err(err("expected `kill <round> <node_id>`".into())),
            }
        }
        Ok(script)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directives_and_comments() {
        let s: FaultScript = "# faults\nkill 50 3\n\nkill 50 1  # second\nkill 7 0\n"
            .parse()
            .unwrap();
        assert_eq!(s.kills_at(50), [1, 3]);
        assert_eq!(s.kills_at(7), [0]);
        assert!(s.kills_at(8).is_empty());
        assert_eq!(s.to_script().parse::<FaultScript>().unwrap(), s);
    }

    #[test]
    fn reports_line_numbers() {
        let e = "kill 1 2\nkill x 2\n".parse::<FaultScript>().unwrap_err();
        assert!(matches!(e, SimError::FaultScript { line: 2, .. }));
        let e = "revive 1 2".parse::<FaultScript>().unwrap_err();
        assert!(matches!(e, SimError::FaultScript { line: 1, .. }));
        let e = "kill 0 2".parse::<FaultScript>().unwrap_err();
        assert!(matches!(e, SimError::FaultScript { line: 1, .. }));
        let e = "kill 3".parse::<FaultScript>().unwrap_err();
        assert!(matches!(e, SimError::FaultScript { line: 1, .. }));
    }
}
