//! Permutations in one-line notation with entries `1..=m`.

use crate::error::{KernelError, Result};

pub type Permutation = Vec<usize>;

pub const MAX_DEGREE: usize = 8;

/// All permutations of `1..=m` in lexicographic order.
pub fn enumerate(m: usize) -> Result<Vec<Permutation>> {
    if m == 0 || m > MAX_DEGREE {
        return Err(KernelError::InvalidArgument(format!(
            "permutation degree {m} outside 1..={MAX_DEGREE}"
        )));
    }
    let mut cur: Permutation = (1..=m).collect();
    let mut out = vec![cur.clone()];
    loop {
        // next lexicographic permutation
        let Some(i) = (0..m - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    Ok(out)
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x == 0 || x > p.len() || seen[x - 1] {
            return false;
        }
        seen[x - 1] = true;
    }
    true
}

pub fn inversions(p: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                n += 1;
            }
        }
    }
    n
}

pub fn sign(p: &[usize]) -> i32 {
    if inversions(p).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Composition `(p∘q)(i) = p(q(i))`.
pub fn compose(p: &[usize], q: &[usize]) -> Permutation {
    q.iter().map(|&i| p[i - 1]).collect()
}

/// A reduced word for `p`: swapping positions `s` and `s+1` for each entry in
/// order sorts `p`.
pub fn reduced_word(p: &[usize]) -> Vec<usize> {
    // bubble sort records the adjacent swaps taking p to the identity
    let mut w = p.to_vec();
    let mut swaps = Vec::new();
    loop {
        let mut done = true;
        for i in 0..w.len().saturating_sub(1) {
            if w[i] > w[i + 1] {
                w.swap(i, i + 1);
                swaps.push(i + 1);
                done = false;
            }
        }
        if done {
            break;
        }
    }
    swaps
}

/// Graded sign of `p` for a homogeneous parity vector: the product of
/// `(-1)^{|i||i+1|}` over a reduced word.
pub fn epsilon(p: &[usize], parities: &[u8]) -> Result<i32> {
    if parities.len() != p.len() {
        return Err(KernelError::InvalidArgument(
            "parity vector length differs from permutation degree".into(),
        ));
    }
    if parities.windows(2).any(|w| w[0] != w[1]) {
        return Err(KernelError::Parity(
            "graded sign is only defined for homogeneous parity vectors".into(),
        ));
    }
    let mut e = 1;
    for s in reduced_word(p) {
        if parities[s - 1] & parities[s] == 1 {
            e = -e;
        }
    }
    Ok(e)
}

/// Image of a pair `(x, y)` of positions in the current index set of size
/// `p` (1-based, lexicographic), per the projection table.
fn omega_pair(p: usize, a: usize, b: usize) -> (usize, usize) {
    if a < p && b < p {
        (b, a)
    } else if b == p && a < p - 1 {
        (p - 1, a)
    } else if a == p && b < p - 1 {
        (b, p - 1)
    } else {
        // {a, b} = {p-1, p}
        (p - 1, p - 2)
    }
}

/// The projection `σ ↦ σ'` on `S_p`. The result always ends in `p`; the
/// outer pairs of `σ` fill positions `(i, p-i)` of the result, each pair
/// mapped on the index set left after deleting the pairs already consumed.
pub fn omega(sigma: &[usize]) -> Result<Permutation> {
    let p = sigma.len();
    if p < 2 || !is_permutation(sigma) {
        return Err(KernelError::InvalidArgument(
            "omega needs a permutation of degree at least 2".into(),
        ));
    }
    let mut out = vec![0usize; p];
    out[p - 1] = p;
    let mut current: Vec<usize> = (1..=p).collect();
    let mut i = 0;
    while current.len() >= 2 && i < p - 1 - i {
        let q = current.len();
        let pos = |k: usize| current.iter().position(|&c| c == k).unwrap() + 1;
        let (x, y) = (sigma[i], sigma[p - 1 - i]);
        if q == 2 {
            out[i] = current[0];
            break;
        }
        let (bx, by) = omega_pair(q, pos(x), pos(y));
        out[i] = current[bx - 1];
        out[p - 2 - i] = current[by - 1];
        current.retain(|&c| c != x && c != y);
        i += 1;
    }
    debug_assert!(is_permutation(&out), "omega produced {out:?} from {sigma:?}");
    Ok(out)
}
