use alloc::vec::Vec;

use super::matrix::CMatrix;

/// `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Matrix of `k x k` minors of `m`, rows and columns indexed by `k`-subsets in
/// lexicographic order. For `k = 1` this is `m` itself.
pub fn exterior_power(m: &CMatrix, k: usize) -> CMatrix {
    assert!(m.is_square());
    let d = m.rows();
    assert!((1..=d).contains(&k), "exterior power index {k} out of 1..={d}");
    if k == 1 {
        return m.clone();
    }
    let sets = subsets(d, k);
    let size = sets.len();
    let mut out = CMatrix::zeros(size, size);
    let mut minor = CMatrix::zeros(k, k);
    for (r, rows) in sets.iter().enumerate() {
        for (c, cols) in sets.iter().enumerate() {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    minor[(i, j)] = m[(ri, cj)];
                }
            }
            out[(r, c)] = minor.det();
        }
    }
    out
}
