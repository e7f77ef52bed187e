//! Approximate minimum degree ordering on the quotient graph.
//!
//! Variables are eliminated in order of an approximate external degree
//! (the bound used by AMD: `|A_i| + |L_p \ i| + sum_e |L_e \ L_p|`).
//! Elements fully contained in a new element are absorbed. Supervariable
//! detection and mass elimination are not performed; at desk scale the
//! plain quotient graph is fast enough.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::sparse::SparseReal;

/// Returns a fill-reducing permutation for a matrix with symmetric
/// pattern. `perm[k]` is the original index eliminated at step `k`.
pub fn fill_reducing_order(a: &SparseReal) -> Vec<usize> {
    let n = a.n_rows();
    // pattern of A + A^T without the diagonal
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j && i < n && j < n {
            var_adj[i].push(j);
            var_adj[j].push(i);
        }
    }
    for adj in &mut var_adj {
        adj.sort_unstable();
        adj.dedup();
    }

    let mut var_elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elem_alive = vec![false; n];
    let mut eliminated = vec![false; n];
    let mut degree: Vec<usize> = var_adj.iter().map(Vec::len).collect();

    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((degree[i], i))).collect();

    let mut mark = vec![0usize; n];
    let mut wmark = vec![0usize; n];
    let mut w = vec![0usize; n];
    let mut stamp = 0usize;
    let mut order = Vec::with_capacity(n);

    for k in 0..n {
        let p = loop {
            let Reverse((d, i)) = heap.pop().expect("heap holds every live variable");
            if !eliminated[i] && degree[i] == d {
                break i;
            }
        };
        order.push(p);
        eliminated[p] = true;
        stamp += 1;

        // new element L_p = (A_p ∪ ⋃ L_e) \ p
        let mut lp = Vec::new();
        for &j in &var_adj[p] {
            if !eliminated[j] && mark[j] != stamp {
                mark[j] = stamp;
                lp.push(j);
            }
        }
        for e in std::mem::take(&mut var_elems[p]) {
            if !elem_alive[e] {
                continue;
            }
            for &j in &elems[e] {
                if !eliminated[j] && mark[j] != stamp {
                    mark[j] = stamp;
                    lp.push(j);
                }
            }
            elem_alive[e] = false;
            elems[e] = Vec::new();
        }
        var_adj[p] = Vec::new();

        // w[e] = |L_e \ L_p| for every live element touching L_p
        for &i in &lp {
            for &e in &var_elems[i] {
                if !elem_alive[e] {
                    continue;
                }
                if wmark[e] != stamp {
                    wmark[e] = stamp;
                    w[e] = elems[e].len();
                }
                w[e] -= 1;
            }
        }
        // aggressive absorption of elements covered by L_p
        for &i in &lp {
            for &e in &var_elems[i] {
                if elem_alive[e] && wmark[e] == stamp && w[e] == 0 {
                    elem_alive[e] = false;
                    elems[e] = Vec::new();
                }
            }
        }

        let remaining = n - k - 1;
        for &i in &lp {
            var_elems[i].retain(|&e| elem_alive[e]);
            var_adj[i].retain(|&j| !eliminated[j] && mark[j] != stamp);
            let external: usize = var_elems[i].iter().map(|&e| w[e]).sum();
            var_elems[i].push(p);
            let d = (var_adj[i].len() + lp.len() - 1 + external).min(remaining);
            if d != degree[i] {
                degree[i] = d;
                heap.push(Reverse((d, i)));
            }
        }
        elems[p] = lp;
        elem_alive[p] = true;
    }
    order
}

/// Number of nonzeros in the Cholesky factor `L` (diagonal included) of
/// `P A P^T`, computed symbolically from the elimination tree.
pub fn symbolic_factor_nnz(a: &SparseReal, perm: &[usize]) -> usize {
    let c = a
        .permute_symmetric(perm)
        .expect("perm has the matrix order");
    let parent = elimination_tree(&c);
    column_counts(&c, &parent).iter().sum()
}

pub(crate) const NONE: usize = usize::MAX;

/// Elimination tree of a symmetric matrix, read from its lower triangle.
pub(crate) fn elimination_tree(c: &SparseReal) -> Vec<usize> {
    let n = c.n_rows();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        let (cols, _) = c.row(k);
        for &j in cols.iter().take_while(|&&j| j < k) {
            let mut i = j;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Column counts of `L` (diagonal included) by walking row subtrees.
pub(crate) fn column_counts(c: &SparseReal, parent: &[usize]) -> Vec<usize> {
    let n = c.n_rows();
    let mut counts = vec![1usize; n];
    let mut mark = vec![NONE; n];
    for k in 0..n {
        mark[k] = k;
        let (cols, _) = c.row(k);
        for &j in cols.iter().take_while(|&&j| j < k) {
            let mut i = j;
            while mark[i] != k {
                counts[i] += 1;
                mark[i] = k;
                i = parent[i];
            }
        }
    }
    counts
}
