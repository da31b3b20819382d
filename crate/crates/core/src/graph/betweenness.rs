//! Brandes edge betweenness on weighted undirected graphs.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::paths::{check_weights, tie_tolerance, Cost};
use super::SpatialNetwork;
use crate::error::Result;

/// Sources handled per work unit. Fixed, so the floating-point reduction
/// order does not depend on the number of threads.
const SOURCES_PER_BLOCK: usize = 32;

/// Edge betweenness over all ordered node pairs, normalized by `N(N-1)`.
/// Equal-cost paths share each pair fractionally. Indexed by edge index.
pub fn weighted_edge_betweenness(net: &SpatialNetwork, weight: &[f64]) -> Result<Vec<f64>> {
    check_weights(net, weight, true)?;
    let n = net.node_count();
    let m = net.edge_count();
    if n < 2 {
        return Ok(alloc::vec![0.0; m]);
    }
    let blocks: Vec<(usize, usize)> = (0..n)
        .step_by(SOURCES_PER_BLOCK)
        .map(|s| (s, (s + SOURCES_PER_BLOCK).min(n)))
        .collect();
    let partial = crate::par::map(&blocks, |&(lo, hi)| {
        let mut acc = alloc::vec![0.0; m];
        let mut work = Workspace::new(n);
        for s in lo..hi {
            work.accumulate(net, weight, s, &mut acc);
        }
        acc
    });
    let mut total = alloc::vec![0.0; m];
    for acc in partial {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
    }
    let norm = (n * (n - 1)) as f64;
    for t in &mut total {
        *t /= norm;
    }
    Ok(total)
}

struct Workspace {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    settled: Vec<bool>,
    preds: Vec<Vec<(usize, usize)>>,
    order: Vec<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            dist: alloc::vec![f64::INFINITY; n],
            sigma: alloc::vec![0.0; n],
            delta: alloc::vec![0.0; n],
            settled: alloc::vec![false; n],
            preds: alloc::vec![Vec::new(); n],
            order: Vec::with_capacity(n),
        }
    }

    fn accumulate(&mut self, net: &SpatialNetwork, weight: &[f64], s: usize, acc: &mut [f64]) {
        for &v in &self.order {
            self.dist[v] = f64::INFINITY;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
            self.settled[v] = false;
            self.preds[v].clear();
        }
        self.order.clear();
        // The search runs to exhaustion, so every node given a label is
        // settled and `order` lists exactly what the next call must reset.
        self.dist[s] = 0.0;
        self.sigma[s] = 1.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Cost(0.0), s)));
        while let Some(Reverse((Cost(d), u))) = heap.pop() {
            if self.settled[u] || d > self.dist[u] {
                continue;
            }
            self.settled[u] = true;
            self.order.push(u);
            for &(v, e) in net.neighbors(u) {
                if self.settled[v] {
                    continue;
                }
                let nd = d + weight[e];
                let cur = self.dist[v];
                if !cur.is_finite() || nd < cur - tie_tolerance(cur) {
                    self.dist[v] = nd;
                    self.sigma[v] = self.sigma[u];
                    self.preds[v].clear();
                    self.preds[v].push((u, e));
                    heap.push(Reverse((Cost(nd), v)));
                } else if (nd - cur).abs() <= tie_tolerance(cur) {
                    self.sigma[v] += self.sigma[u];
                    self.preds[v].push((u, e));
                }
            }
        }
        for &w in self.order.iter().rev() {
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &(v, e) in &self.preds[w] {
                let c = self.sigma[v] * coeff;
                acc[e] += c;
                self.delta[v] += c;
            }
        }
    }
}
