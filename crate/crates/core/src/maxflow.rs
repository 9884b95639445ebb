//! Dinic's maximum flow on real capacities.

use std::collections::VecDeque;

const NONE: usize = usize::MAX;

/// A flow network where every arc is stored together with its reverse.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    nodes: usize,
    to: Vec<usize>,
    residual: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    /// Capacity scale of each arc pair; residuals below `RESIDUAL_TOL` times
    /// this count as saturated.
    scale: Vec<f64>,
}

const RESIDUAL_TOL: f64 = 1e-12;

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { nodes, to: Vec::new(), residual: Vec::new(), adjacency: vec![Vec::new(); nodes], scale: Vec::new() }
    }

    /// Adds an arc `u → v` with capacity `forward` and `v → u` with capacity `backward`.
    pub fn add_edge(&mut self, u: usize, v: usize, forward: f64, backward: f64) {
        debug_assert!(forward >= 0.0 && backward >= 0.0);
        let a = self.to.len();
        self.to.push(v);
        self.residual.push(forward);
        self.to.push(u);
        self.residual.push(backward);
        self.adjacency[u].push(a);
        self.adjacency[v].push(a + 1);
        let scale = forward.max(backward);
        self.scale.push(scale);
        self.scale.push(scale);
    }

    #[inline]
    fn open(&self, a: usize) -> bool {
        self.residual[a] > RESIDUAL_TOL * self.scale[a]
    }

    fn levels(&self, source: usize) -> Vec<usize> {
        let mut level = vec![NONE; self.nodes];
        let mut queue = VecDeque::new();
        level[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adjacency[v] {
                let w = self.to[a];
                if self.open(a) && level[w] == NONE {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    /// Pushes a maximum flow from `source` to `sink`; returns its value and the
    /// number of level-graph phases.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> (f64, usize) {
        let mut total = 0.0;
        let mut phases = 0;
        loop {
            let mut level = self.levels(source);
            if level[sink] == NONE {
                return (total, phases);
            }
            phases += 1;
            let mut next = vec![0usize; self.nodes];
            let mut path: Vec<usize> = Vec::new();
            let mut v = source;
            loop {
                if v == sink {
                    let bottleneck = path.iter().map(|&a| self.residual[a]).fold(f64::INFINITY, f64::min);
                    let mut cut_at = path.len();
                    for (k, &a) in path.iter().enumerate() {
                        self.residual[a] -= bottleneck;
                        self.residual[a ^ 1] += bottleneck;
                        if !self.open(a) && cut_at == path.len() {
                            cut_at = k;
                        }
                    }
                    total += bottleneck;
                    path.truncate(cut_at);
                    v = path.last().map_or(source, |&a| self.to[a]);
                    continue;
                }
                let mut advanced = false;
                while next[v] < self.adjacency[v].len() {
                    let a = self.adjacency[v][next[v]];
                    let w = self.to[a];
                    if self.open(a) && level[w] != NONE && level[w] == level[v] + 1 {
                        path.push(a);
                        v = w;
                        advanced = true;
                        break;
                    }
                    next[v] += 1;
                }
                if !advanced {
                    level[v] = NONE;
                    match path.pop() {
                        None => break,
                        Some(a) => {
                            v = self.to[a ^ 1];
                            next[v] += 1;
                        }
                    }
                }
            }
        }
    }

    /// Nodes reachable from `source` in the residual network (after `max_flow`,
    /// the source side of a minimum cut).
    pub fn source_side(&self, source: usize) -> Vec<bool> {
        let level = self.levels(source);
        level.iter().map(|&l| l != NONE).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS figure 26.1, max flow 23
        let mut g = FlowNetwork::new(6);
        for &(u, v, c) in &[
            (0, 1, 16.0),
            (0, 2, 13.0),
            (2, 1, 4.0),
            (1, 3, 12.0),
            (3, 2, 9.0),
            (2, 4, 14.0),
            (4, 3, 7.0),
            (3, 5, 20.0),
            (4, 5, 4.0),
        ] {
            g.add_edge(u, v, c, 0.0);
        }
        let (flow, _) = g.max_flow(0, 5);
        assert!((flow - 23.0).abs() < 1e-12);
        let side = g.source_side(0);
        assert!(side[0] && !side[5]);
        // the cut {0,1,2,4} has capacity 12 + 7 + 4 = 23
        assert_eq!(side, vec![true, true, true, false, true, false]);
    }

    #[test]
    fn undirected_edges() {
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 2.0, 0.0);
        g.add_edge(1, 2, 0.5, 0.5);
        let (flow, _) = g.max_flow(0, 2);
        assert!((flow - 0.5).abs() < 1e-15);
        assert_eq!(g.source_side(0), vec![true, true, false]);
    }

    #[test]
    fn tolerance_is_per_arc() {
        // a unit arc next to an enormous one must still carry flow
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 1.0, 0.0);
        g.add_edge(1, 2, 1e16, 1e16);
        assert!((g.max_flow(0, 2).0 - 1.0).abs() < 1e-15);
        assert_eq!(g.source_side(0), vec![true, false, false]);
    }

    #[test]
    fn disconnected() {
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 1.0, 0.0);
        assert_eq!(g.max_flow(0, 2).0, 0.0);
    }
}
