use super::GraphInstance;

/// Complete backtracking decision of `colors`-colourability.
///
/// Vertices are coloured in DSatur order (most distinct neighbour colours
/// first, ties by degree); a new colour is only opened one at a time.
pub fn col_solve(graph: &GraphInstance, colors: u32) -> bool {
    let n = graph.n as usize;
    if n == 0 {
        return true;
    }
    if colors == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &graph.edges {
        let (a, b) = (a as usize - 1, b as usize - 1);
        if !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut color = vec![u32::MAX; n];
    search(&adj, colors, &mut color, 0, 0)
}

fn search(adj: &[Vec<usize>], k: u32, color: &mut [u32], done: usize, used: u32) -> bool {
    if done == color.len() {
        return true;
    }
    // DSatur pick
    let mut best = None;
    let mut best_key = (0usize, 0usize);
    for v in 0..color.len() {
        if color[v] != u32::MAX {
            continue;
        }
        let mut seen = 0u64;
        for &w in &adj[v] {
            if color[w] != u32::MAX && color[w] < 64 {
                seen |= 1 << color[w];
            }
        }
        let key = (seen.count_ones() as usize, adj[v].len());
        if best.is_none() || key > best_key {
            best = Some(v);
            best_key = key;
        }
    }
    let v = best.unwrap();
    let limit = (used + 1).min(k);
    for c in 0..limit {
        if adj[v].iter().any(|&w| color[w] == c) {
            continue;
        }
        color[v] = c;
        if search(adj, k, color, done + 1, used.max(c + 1)) {
            return true;
        }
    }
    color[v] = u32::MAX;
    false
}
