//! A slow, independent re-implementation of the growth pipeline: all-pairs
//! Floyd-Warshall routing, brute-force seeding and crossing tests, and
//! betweenness from path counts.

use bikegrow_core::{EdgeKind, Point};

use super::fixture::City;

const INF: f64 = f64::INFINITY;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    dist(p, Point::new(a.x + t * dx, a.y + t * dy))
}

fn orient(a: Point, b: Point, c: Point) -> i8 {
    let v = ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / dist(a, b);
    if v > 1e-9 {
        1
    } else if v < -1e-9 {
        -1
    } else {
        0
    }
}

/// Proper crossing or collinear overlap of positive length.
pub fn crosses(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let (o1, o2) = (orient(p1, p2, q1), orient(p1, p2, q2));
    let (o3, o4) = (orient(q1, q2, p1), orient(q1, q2, p2));
    if o1 == 0 && o2 == 0 {
        let len = dist(p1, p2);
        let (ux, uy) = ((p2.x - p1.x) / len, (p2.y - p1.y) / len);
        let t = |q: Point| (q.x - p1.x) * ux + (q.y - p1.y) * uy;
        let (a, b) = (t(q1).min(t(q2)), t(q1).max(t(q2)));
        return b.min(len) - a.max(0.0) > 1e-9;
    }
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Undirected multigraph with edges sorted by id.
pub struct Graph {
    pub ids: Vec<u64>,
    pub pts: Vec<Point>,
    /// `(u, v, length, kind, edge id)` with node indices.
    pub edges: Vec<(usize, usize, f64, EdgeKind, u64)>,
}

impl Graph {
    pub fn from_city(city: &City) -> Graph {
        let mut nodes = city.nodes.clone();
        nodes.sort_by_key(|n| n.0);
        let ids: Vec<u64> = nodes.iter().map(|n| n.0).collect();
        let pts: Vec<Point> = nodes.iter().map(|n| n.1).collect();
        let ix = |id: u64| ids.binary_search(&id).unwrap();
        let mut edges: Vec<_> = city
            .edges
            .iter()
            .map(|&(id, u, v, kind)| {
                let (a, b) = (ix(u), ix(v));
                (a, b, dist(pts[a], pts[b]), kind, id)
            })
            .collect();
        edges.sort_by_key(|e| e.4);
        Graph { ids, pts, edges }
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.0].push((e.1, k));
            adj[e.1].push((e.0, k));
        }
        for a in &mut adj {
            a.sort();
        }
        adj
    }
}

/// All-pairs distances, row-major.
pub fn floyd(n: usize, edges: &[(usize, usize)], w: &[f64]) -> Vec<f64> {
    let mut d = vec![INF; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for (k, &(u, v)) in edges.iter().enumerate() {
        if w[k] < d[u * n + v] {
            d[u * n + v] = w[k];
            d[v * n + u] = w[k];
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let c = dik + d[k * n + j];
                if c < d[i * n + j] {
                    d[i * n + j] = c;
                }
            }
        }
    }
    d
}

/// Lexicographically smallest shortest path, by walking to the smallest
/// neighbor that stays on a shortest path.
fn walk(
    adj: &[Vec<(usize, usize)>],
    w: &[f64],
    d: &[f64],
    n: usize,
    s: usize,
    t: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if d[s * n + t] == INF {
        return None;
    }
    let (mut nodes, mut edges, mut u) = (vec![s], Vec::new(), s);
    while u != t {
        let &(v, e) = adj[u]
            .iter()
            .find(|&&(v, e)| close(w[e] + d[v * n + t], d[u * n + t]))
            .expect("a tight edge exists");
        nodes.push(v);
        edges.push(e);
        u = v;
    }
    Some((nodes, edges))
}

/// Edge betweenness from shortest-path counts, over ordered node pairs,
/// divided by `N (N - 1)`.
pub fn betweenness(n: usize, edges: &[(usize, usize)], w: &[f64]) -> Vec<f64> {
    let d = floyd(n, edges, w);
    // sigma[s][v]: number of shortest s-v paths.
    let mut sigma = vec![0.0f64; n * n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&v| d[s * n + v] < INF).collect();
        order.sort_by(|&a, &b| d[s * n + a].total_cmp(&d[s * n + b]));
        sigma[s * n + s] = 1.0;
        for &v in order.iter().skip(1) {
            let mut c = 0.0;
            for (k, &(a, b)) in edges.iter().enumerate() {
                for (x, y) in [(a, b), (b, a)] {
                    if y == v && d[s * n + x] < INF && close(d[s * n + x] + w[k], d[s * n + v]) {
                        c += sigma[s * n + x];
                    }
                }
            }
            sigma[s * n + v] = c;
        }
    }
    let mut bc = vec![0.0; edges.len()];
    for s in 0..n {
        for t in 0..n {
            if s == t || d[s * n + t] == INF {
                continue;
            }
            let total = sigma[s * n + t];
            for (k, &(a, b)) in edges.iter().enumerate() {
                for (x, y) in [(a, b), (b, a)] {
                    if d[s * n + x] < INF
                        && d[y * n + t] < INF
                        && close(d[s * n + x] + w[k] + d[y * n + t], d[s * n + t])
                    {
                        bc[k] += sigma[s * n + x] * sigma[t * n + y] / total;
                    }
                }
            }
        }
    }
    let norm = (n * (n - 1)) as f64;
    bc.iter().map(|b| b / norm).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefMetrics {
    pub crash: f64,
    pub trip_d0: f64,
    pub trip_d25: f64,
}

pub struct RefRun {
    pub baseline: RefMetrics,
    pub at_d: RefMetrics,
    pub selected: usize,
    pub charged_km: f64,
}

fn nearest(g: &Graph, p: Point) -> (usize, f64) {
    let mut best = (0, INF);
    for (i, q) in g.pts.iter().enumerate() {
        let d = dist(p, *q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn evaluate(g: &Graph, bike: &[bool], city: &City, buffer: f64) -> RefMetrics {
    let covered = city
        .crashes
        .iter()
        .filter(|c| {
            g.edges
                .iter()
                .enumerate()
                .any(|(k, e)| bike[k] && seg_dist(c.location, g.pts[e.0], g.pts[e.1]) <= buffer)
        })
        .count();
    let adj = g.adjacency();
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.0, e.1)).collect();
    let n = g.n();
    let trip = |detour: f64| {
        let w: Vec<f64> = g
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| if bike[k] { e.2 } else { e.2 * (1.0 + detour) })
            .collect();
        let d = floyd(n, &pairs, &w);
        let (mut on_bike, mut total) = (0.0, 0.0);
        for r in &city.od {
            let (o, od) = nearest(g, r.origin);
            let (t, td) = nearest(g, r.destination);
            if od > 500.0 || td > 500.0 || o == t {
                continue;
            }
            if let Some((_, edges)) = walk(&adj, &w, &d, n, o, t) {
                for e in edges {
                    total += g.edges[e].2;
                    if bike[e] {
                        on_bike += g.edges[e].2;
                    }
                }
            }
        }
        on_bike / total
    };
    RefMetrics {
        crash: covered as f64 / city.crashes.len() as f64,
        trip_d0: trip(0.0),
        trip_d25: trip(0.25),
    }
}

/// Greedy-triangulation growth at one budget, evaluated before and after.
pub fn run(city: &City, alpha: f64, delta: f64, buffer: f64, d_km: f64) -> RefRun {
    let g = Graph::from_city(city);
    let n = g.n();
    let adj = g.adjacency();
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.0, e.1)).collect();
    let len: Vec<f64> = g.edges.iter().map(|e| e.2).collect();
    let d = floyd(n, &pairs, &len);

    // Seeds.
    let mut on_bike = vec![false; n];
    for e in &g.edges {
        if e.3 == EdgeKind::Bike {
            on_bike[e.0] = true;
            on_bike[e.1] = true;
        }
    }
    let mut seeds: Vec<usize> = Vec::new();
    let clear =
        |seeds: &[usize], v: usize| seeds.iter().all(|&s| dist(g.pts[s], g.pts[v]) >= delta);
    for (v, &bike) in on_bike.iter().enumerate() {
        if bike && clear(&seeds, v) {
            seeds.push(v);
        }
    }
    let (mut lo, mut hi) = (g.pts[0], g.pts[0]);
    for p in &g.pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let nx = ((hi.x - lo.x) / delta + 1e-9).floor() as usize + 1;
    let ny = ((hi.y - lo.y) / delta + 1e-9).floor() as usize + 1;
    for j in 0..ny {
        for i in 0..nx {
            let (v, _) = nearest(
                &g,
                Point::new(lo.x + i as f64 * delta, lo.y + j as f64 * delta),
            );
            if !seeds.contains(&v) && clear(&seeds, v) {
                seeds.push(v);
            }
        }
    }

    // Greedy triangulation on route distance.
    let m = seeds.len();
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let r = d[seeds[i] * n + seeds[j]];
            if r < INF {
                cand.push((r, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut accepted: Vec<(usize, usize)> = Vec::new();
    for &(_, i, j) in &cand {
        let (p, q) = (g.pts[seeds[i]], g.pts[seeds[j]]);
        if !accepted
            .iter()
            .any(|&(a, b)| crosses(p, q, g.pts[seeds[a]], g.pts[seeds[b]]))
        {
            accepted.push((i, j));
        }
    }

    // Links: routes, then existing bike edges.
    struct Link {
        ends: (usize, usize),
        nodes: Vec<usize>,
        edges: Vec<usize>,
        length: f64,
        candidate: bool,
    }
    let mut links: Vec<Link> = accepted
        .iter()
        .map(|&(i, j)| {
            let (nodes, edges) = walk(&adj, &len, &d, n, seeds[i], seeds[j]).unwrap();
            let length = edges.iter().map(|&e| len[e]).sum();
            Link {
                ends: (seeds[i], seeds[j]),
                nodes,
                edges,
                length,
                candidate: true,
            }
        })
        .collect();
    for (k, e) in g.edges.iter().enumerate() {
        if e.3 == EdgeKind::Bike {
            links.push(Link {
                ends: (e.0, e.1),
                nodes: vec![e.0, e.1],
                edges: vec![k],
                length: e.2,
                candidate: false,
            });
        }
    }

    // Trips and densities.
    let mut transits = vec![0.0; n];
    for r in &city.od {
        let (o, od) = nearest(&g, r.origin);
        let (t, td) = nearest(&g, r.destination);
        if od > 500.0 || td > 500.0 || o == t {
            continue;
        }
        if let Some((nodes, _)) = walk(&adj, &len, &d, n, o, t) {
            for v in nodes {
                transits[v] += 1.0;
            }
        }
    }
    let n_trip: Vec<f64> = links
        .iter()
        .map(|l| {
            let mut nodes = l.nodes.clone();
            nodes.sort();
            nodes.dedup();
            nodes.iter().map(|&v| transits[v]).sum::<f64>() / (l.length / 1000.0)
        })
        .collect();
    let n_crash: Vec<f64> = links
        .iter()
        .map(|l| {
            let near = city
                .crashes
                .iter()
                .filter(|c| {
                    l.edges.iter().any(|&e| {
                        seg_dist(c.location, g.pts[g.edges[e].0], g.pts[g.edges[e].1]) <= buffer
                    })
                })
                .count();
            near as f64 / (l.length / 1000.0)
        })
        .collect();
    let max_t = n_trip.iter().cloned().fold(0.0, f64::max);
    let max_c = n_crash.iter().cloned().fold(0.0, f64::max);
    let dw: Vec<f64> = links
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let nt = if max_t > 0.0 { n_trip[k] / max_t } else { 0.0 };
            let nc = if max_c > 0.0 { n_crash[k] / max_c } else { 0.0 };
            alpha * (l.length + 1.0) / (1.0 + 9.0 * nt)
                + (1.0 - alpha) * (l.length + 1.0) / (1.0 + 9.0 * nc)
        })
        .collect();

    // Abstract graph over seeds and bike nodes.
    let mut abs_nodes: Vec<usize> = seeds.clone();
    abs_nodes.extend((0..n).filter(|&v| on_bike[v]));
    abs_nodes.sort();
    abs_nodes.dedup();
    let at = |v: usize| abs_nodes.binary_search(&v).unwrap();
    let abs_edges: Vec<(usize, usize)> =
        links.iter().map(|l| (at(l.ends.0), at(l.ends.1))).collect();
    let bc = betweenness(abs_nodes.len(), &abs_edges, &dw);

    // Ranking, charging, budget.
    let mut order: Vec<usize> = (0..links.len()).filter(|&k| links[k].candidate).collect();
    order.sort_by(|&a, &b| bc[b].total_cmp(&bc[a]).then(a.cmp(&b)));
    let mut bike: Vec<bool> = g.edges.iter().map(|e| e.3 == EdgeKind::Bike).collect();
    let baseline = evaluate(&g, &bike, city, buffer);
    let mut km = 0.0;
    let mut selected = 0;
    for &k in &order {
        if km >= d_km {
            break;
        }
        for &e in &links[k].edges {
            if !bike[e] {
                bike[e] = true;
                km += len[e] / 1000.0;
            }
        }
        selected += 1;
    }
    RefRun {
        baseline,
        at_d: evaluate(&g, &bike, city, buffer),
        selected,
        charged_km: km,
    }
}
