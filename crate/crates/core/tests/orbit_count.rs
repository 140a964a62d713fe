//! Isomorphism-class counts by Burnside's lemma, independent of the
//! enumerator and of `Model`.

use compartdb::enumerate::{enumerate_keyed, EnumerationConfig};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Vertices reachable from `start` along `adj` (bit j of adj[i] = edge i -> j).
fn closure(adj: &[u8], start: u8) -> u8 {
    let mut seen = start;
    loop {
        let mut next = seen;
        for (i, row) in adj.iter().enumerate() {
            if seen & (1 << i) != 0 {
                next |= row;
            }
        }
        if next == seen {
            return seen;
        }
        seen = next;
    }
}

fn admissible(n: usize, adj: &[u8], out: u8) -> bool {
    let full = ((1u16 << n) - 1) as u8;
    let mut undirected = adj.to_vec();
    let mut reverse = vec![0u8; n];
    for (i, &row) in adj.iter().enumerate() {
        for j in 0..n {
            if row & (1 << j) != 0 {
                undirected[j] |= 1 << i;
                reverse[j] |= 1 << i;
            }
        }
    }
    closure(&undirected, 1) == full && closure(&reverse, out) == full
}

fn permute_mask(m: u8, p: &[usize]) -> u8 {
    (0..p.len())
        .filter(|&i| m & (1 << i) != 0)
        .fold(0, |acc, i| acc | (1 << p[i]))
}

fn orbit_count(n: usize, max_inputs: u32) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let subsets: Vec<u8> = (0..1u16 << n).map(|m| m as u8).collect();
    let mut fixed_total = 0usize;
    for k in 0..1u32 << pairs.len() {
        let mut adj = vec![0u8; n];
        for (e, &(i, j)) in pairs.iter().enumerate() {
            if k & (1 << e) != 0 {
                adj[i] |= 1 << j;
            }
        }
        for o in 0..n {
            let out = 1u8 << o;
            if !admissible(n, &adj, out) {
                continue;
            }
            for p in &perms {
                let mut padj = vec![0u8; n];
                for i in 0..n {
                    padj[p[i]] = permute_mask(adj[i], p);
                }
                if padj != adj || permute_mask(out, p) != out {
                    continue;
                }
                let stable = subsets
                    .iter()
                    .filter(|&&s| permute_mask(s, p) == s)
                    .collect::<Vec<_>>();
                let inputs = stable.iter().filter(|s| s.count_ones() <= max_inputs).count();
                fixed_total += inputs * stable.len();
            }
        }
    }
    assert_eq!(fixed_total % perms.len(), 0);
    fixed_total / perms.len()
}

#[test]
fn burnside_matches_enumerator() {
    for n in 1..=4 {
        let expected = orbit_count(n, 2);
        let got = enumerate_keyed(&EnumerationConfig::new(n)).unwrap().len();
        assert_eq!(got, expected, "n = {n}");
    }
    assert_eq!(orbit_count(2, 2), 32);
    assert_eq!(orbit_count(3, 2), 920);
}
