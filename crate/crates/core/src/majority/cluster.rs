use serde::Serialize;

use crate::codes::BitString;

use super::{Comparison, MajorityError};

/// Positions whose mutual relations the comparisons have fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    /// 1-based, ascending.
    pub positions: Vec<usize>,
    pub zeros: usize,
    pub ones: usize,
}

impl Cluster {
    /// `|#zeros − #ones|`.
    pub fn weight(&self) -> usize {
        self.zeros.abs_diff(self.ones)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterPartition {
    /// Ordered by smallest position.
    pub clusters: Vec<Cluster>,
    /// The cluster whose weight exceeds the total weight of all others, if any.
    pub dominant: Option<usize>,
}

impl ClusterPartition {
    pub fn weights(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::weight).collect()
    }
}

/// Union-find with the parity of each node relative to its parent.
struct ParityForest {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl ParityForest {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), parity: vec![false; n] }
    }

    /// Root of `v` and the parity of `v` relative to it.
    fn find(&mut self, v: usize) -> (usize, bool) {
        let p = self.parent[v];
        if p == v {
            return (v, false);
        }
        let (root, up) = self.find(p);
        self.parent[v] = root;
        self.parity[v] ^= up;
        (root, self.parity[v])
    }

    /// Records `v ⊕ w = differ`; false if that contradicts earlier records.
    fn union(&mut self, v: usize, w: usize, differ: bool) -> bool {
        let (rv, pv) = self.find(v);
        let (rw, pw) = self.find(w);
        if rv == rw {
            return pv ^ pw == differ;
        }
        self.parent[rv] = rw;
        self.parity[rv] = pv ^ pw ^ differ;
        true
    }
}

/// Groups positions by the relations the transcript establishes and weighs
/// each group with the actual bits of `x`.
pub fn cluster_analyze(transcript: &[Comparison], x: &BitString) -> Result<ClusterPartition, MajorityError> {
    let n = x.len();
    let mut forest = ParityForest::new(n);
    for c in transcript {
        for position in [c.a, c.b] {
            if position == 0 || position > n {
                return Err(MajorityError::PositionOutOfRange { position, n });
            }
        }
        if c.a == c.b {
            return Err(MajorityError::SelfComparison(c.a));
        }
        if !forest.union(c.a - 1, c.b - 1, !c.equal) {
            return Err(MajorityError::InconsistentTranscript { a: c.a, b: c.b });
        }
        if (x.get(c.a - 1) == x.get(c.b - 1)) != c.equal {
            return Err(MajorityError::TranscriptContradictsInput { a: c.a, b: c.b });
        }
    }

    let mut slot_of_root = vec![usize::MAX; n];
    let mut clusters: Vec<Cluster> = Vec::new();
    for v in 0..n {
        let (root, _) = forest.find(v);
        if slot_of_root[root] == usize::MAX {
            slot_of_root[root] = clusters.len();
            clusters.push(Cluster { positions: Vec::new(), zeros: 0, ones: 0 });
        }
        let cluster = &mut clusters[slot_of_root[root]];
        cluster.positions.push(v + 1);
        if x.get(v) == Some(true) {
            cluster.ones += 1;
        } else {
            cluster.zeros += 1;
        }
    }

    let total: usize = clusters.iter().map(Cluster::weight).sum();
    let dominant = clusters.iter().position(|c| 2 * c.weight() > total);
    Ok(ClusterPartition { clusters, dominant })
}
