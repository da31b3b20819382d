use alloc::vec::Vec;

use super::SpatialNetwork;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Component label per node index; `None` for nodes with no edge
    /// passing the filter. Labels follow the smallest member node.
    pub labels: Vec<Option<usize>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Undirected components over the edges accepted by `filter` (called with
/// edge indices). Only nodes touching an accepted edge take part.
pub fn connected_components(net: &SpatialNetwork, filter: impl Fn(usize) -> bool) -> Components {
    let n = net.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut active = alloc::vec![false; n];
    for e in 0..net.edge_count() {
        if !filter(e) {
            continue;
        }
        let (u, v) = net.edge_ends(e);
        active[u] = true;
        active[v] = true;
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            let (lo, hi) = if ru < rv { (ru, rv) } else { (rv, ru) };
            parent[hi] = lo;
        }
    }
    let mut root_label = alloc::vec![usize::MAX; n];
    let mut labels = alloc::vec![None; n];
    let mut count = 0;
    for v in 0..n {
        if !active[v] {
            continue;
        }
        let r = find(&mut parent, v);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        labels[v] = Some(root_label[r]);
    }
    Components { count, labels }
}
