//! Per-node, frame-indexed step series with zero-order hold.
//!
//! Used for both RSSI and solar traces. A query before the first sample of a
//! node returns that first sample; a query after the last sample holds the
//! last value. Networks larger than the trace reuse the traced nodes
//! round-robin: node `k` reads traced node `k mod m` in ascending id order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSeries<T> {
    /// Traced node ids, ascending, with their (frame, value) samples.
    nodes: Vec<(u32, Vec<(u32, T)>)>,
}

impl<T: Copy> NodeSeries<T> {
    /// Builds from `(node, frame, value)` rows. Frames must be non-decreasing
    /// per node; a repeated frame keeps the later row.
    pub fn from_rows(rows: impl IntoIterator<Item = (u32, u32, T)>) -> Result<Self> {
        let mut map: BTreeMap<u32, Vec<(u32, T)>> = BTreeMap::new();
        for (node, frame, value) in rows {
            let samples = map.entry(node).or_default();
            match samples.last_mut() {
                Some(last) if last.0 > frame => {
                    return Err(Error::InvalidTable(format!(
                        "node {node}: frame {frame} after frame {}",
                        last.0
                    )))
                }
                Some(last) if last.0 == frame => last.1 = value,
                _ => samples.push((frame, value)),
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidTable("trace has no samples".into()));
        }
        Ok(NodeSeries {
            nodes: map.into_iter().collect(),
        })
    }

    pub fn traced_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn value(&self, node: NodeId, frame: u32) -> T {
        let (_, samples) = &self.nodes[node.index() % self.nodes.len()];
        let at = samples.partition_point(|(f, _)| *f <= frame);
        if at == 0 {
            samples[0].1
        } else {
            samples[at - 1].1
        }
    }
}
