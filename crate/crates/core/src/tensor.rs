//! Z2-graded tensor calculus on `End(V)^{⊗m} ⊗ A` for `V = C^{M|N}`.
//!
//! A tensor is a sparse sum of `E_{r_1 c_1} ⊗ ⋯ ⊗ E_{r_m c_m} ⊗ a` with the
//! coefficient `a` written rightmost. Products and the action on
//! `V^{⊗m} ⊗ A` follow the Koszul sign rule.

use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{KernelError, Result};
use crate::perm;
use crate::rat::Rat;
use crate::ring::Coeff;

pub type Multi = SmallVec<[u8; 8]>;

/// Grading data of `C^{M|N}`. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SuperContext {
    pub m: usize,
    pub n: usize,
}

impl SuperContext {
    pub fn new(m: usize, n: usize) -> Result<SuperContext> {
        if m + n == 0 {
            return Err(KernelError::InvalidArgument("M+N must be positive".into()));
        }
        if m + n > 16 {
            return Err(KernelError::InvalidArgument("M+N too large".into()));
        }
        Ok(SuperContext { m, n })
    }

    /// Context for the twisted setting, where the odd block must pair up.
    pub fn twisted(m: usize, n: usize) -> Result<SuperContext> {
        if !n.is_multiple_of(2) {
            return Err(KernelError::Config(format!("N = {n} must be even")));
        }
        SuperContext::new(m, n)
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn parity(&self, i: u8) -> u8 {
        u8::from(i as usize > self.m)
    }

    pub fn indices(&self) -> impl Iterator<Item = u8> {
        1..=(self.dim() as u8)
    }

    /// `+1` on the first half of each block pairing, `-1` on the second half
    /// of the odd block.
    pub fn theta(&self, i: u8) -> i64 {
        if (i as usize) <= self.m + self.n / 2 {
            1
        } else {
            -1
        }
    }

    /// The index reflection: reversal within the even block and within the
    /// odd block.
    pub fn bar(&self, i: u8) -> u8 {
        let i = i as usize;
        if i <= self.m {
            (self.m + 1 - i) as u8
        } else {
            (2 * self.m + self.n + 1 - i) as u8
        }
    }

    pub fn multi_parity(&self, idx: &[u8]) -> u8 {
        idx.iter().fold(0, |s, &i| s ^ self.parity(i))
    }

    fn all_multis(&self, slots: usize) -> Vec<Multi> {
        let mut out = vec![Multi::new()];
        for _ in 0..slots {
            let mut next = Vec::with_capacity(out.len() * self.dim());
            for m in &out {
                for i in self.indices() {
                    let mut x = m.clone();
                    x.push(i);
                    next.push(x);
                }
            }
            out = next;
        }
        out
    }
}

fn sgn(odd: bool) -> Rat {
    if odd {
        Rat::int(-1)
    } else {
        Rat::one()
    }
}

/// Sign picked up when `E_{r c}` (slotwise) acts on `e_c`: each slot operator
/// passes the vectors in the earlier slots.
fn action_sign(ctx: &SuperContext, rows: &[u8], cols: &[u8]) -> bool {
    let mut acc = 0u8;
    let mut odd = false;
    for k in 0..rows.len() {
        let e = ctx.parity(rows[k]) ^ ctx.parity(cols[k]);
        if e & acc == 1 {
            odd = !odd;
        }
        acc ^= ctx.parity(cols[k]);
    }
    odd
}

#[derive(Clone, PartialEq)]
pub struct SuperTensor<A: Coeff> {
    pub ctx: SuperContext,
    pub slots: usize,
    /// Key is `rows ++ cols`.
    pub entries: FxHashMap<SmallVec<[u8; 16]>, A>,
}

impl<A: Coeff> fmt::Debug for SuperTensor<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.entries.keys().collect();
        keys.sort();
        write!(f, "SuperTensor[{} slots]{{", self.slots)?;
        for k in keys {
            write!(f, " {:?}:{:?}", k.as_slice(), self.entries[k])?;
        }
        write!(f, " }}")
    }
}

fn key(rows: &[u8], cols: &[u8]) -> SmallVec<[u8; 16]> {
    let mut k = SmallVec::new();
    k.extend_from_slice(rows);
    k.extend_from_slice(cols);
    k
}

impl<A: Coeff> SuperTensor<A> {
    pub fn zero(ctx: &SuperContext, slots: usize) -> Self {
        SuperTensor { ctx: ctx.clone(), slots, entries: FxHashMap::default() }
    }

    pub fn unit(ctx: &SuperContext, slots: usize) -> Self {
        let mut t = Self::zero(ctx, slots);
        for idx in ctx.all_multis(slots) {
            t.entries.insert(key(&idx, &idx), A::one());
        }
        t
    }

    pub fn rows_cols(&self, k: &[u8]) -> (Multi, Multi) {
        (Multi::from_slice(&k[..self.slots]), Multi::from_slice(&k[self.slots..]))
    }

    pub fn get(&self, rows: &[u8], cols: &[u8]) -> A {
        self.entries.get(&key(rows, cols)).cloned().unwrap_or_else(A::zero)
    }

    pub fn add_entry(&mut self, rows: &[u8], cols: &[u8], a: A) {
        let k = key(rows, cols);
        match self.entries.get_mut(&k) {
            Some(x) => {
                x.add_assign(&a);
                if x.is_zero() {
                    self.entries.remove(&k);
                }
            }
            None => {
                if !a.is_zero() {
                    self.entries.insert(k, a);
                }
            }
        }
    }

    /// `E_{ij}` placed in `slot` (0-based), identity elsewhere.
    pub fn matrix_unit(ctx: &SuperContext, slots: usize, slot: usize, i: u8, j: u8) -> Self {
        let mut t = Self::zero(ctx, slots);
        for idx in ctx.all_multis(slots - 1) {
            let mut r = idx.clone();
            r.insert(slot, i);
            let mut c = idx;
            c.insert(slot, j);
            t.add_entry(&r, &c, A::one());
        }
        t
    }

    /// `Σ_{ij} E_{ij} ⊗ x_{ij}` placed in `slot`, identity elsewhere.
    pub fn from_slot_matrix(ctx: &SuperContext, slots: usize, slot: usize, x: &[Vec<A>]) -> Self {
        let mut t = Self::zero(ctx, slots);
        let rest = ctx.all_multis(slots - 1);
        for i in ctx.indices() {
            for j in ctx.indices() {
                let a = &x[i as usize - 1][j as usize - 1];
                if a.is_zero() {
                    continue;
                }
                for idx in &rest {
                    let mut r = idx.clone();
                    r.insert(slot, i);
                    let mut c = idx.clone();
                    c.insert(slot, j);
                    t.add_entry(&r, &c, a.clone());
                }
            }
        }
        t
    }

    /// Builds the tensor of an operator given by its action on basis vectors.
    pub fn from_action<F>(ctx: &SuperContext, slots: usize, f: F) -> Self
    where
        F: Fn(&Multi) -> Vec<(Multi, A)>,
    {
        let mut t = Self::zero(ctx, slots);
        for c in ctx.all_multis(slots) {
            for (r, a) in f(&c) {
                let odd = action_sign(ctx, &r, &c) ^ (a.parity() & ctx.multi_parity(&c) == 1);
                let a = if odd { a.neg() } else { a };
                t.add_entry(&r, &c, a);
            }
        }
        t
    }

    pub fn map<B: Coeff, F: Fn(&A) -> B>(&self, f: F) -> SuperTensor<B> {
        let mut t = SuperTensor::zero(&self.ctx, self.slots);
        for (k, a) in &self.entries {
            let b = f(a);
            if !b.is_zero() {
                t.entries.insert(k.clone(), b);
            }
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.clone();
        for (k, a) in &o.entries {
            let (r, c) = o.rows_cols(k);
            t.add_entry(&r, &c, a.clone());
        }
        t
    }

    pub fn scale(&self, q: &Rat) -> Self {
        self.map(|a| a.scale(q))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Rat::int(-1)))
    }

    /// Multiplies every coefficient on the right by `c` (an even scalar).
    pub fn scale_by(&self, c: &A) -> Self {
        self.map(|a| a.mul(c))
    }

    fn slot_parities(&self, rows: &[u8], cols: &[u8]) -> SmallVec<[u8; 8]> {
        rows.iter().zip(cols).map(|(&r, &c)| self.ctx.parity(r) ^ self.ctx.parity(c)).collect()
    }

    /// Graded product.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.slots, o.slots, "slot count mismatch");
        let m = self.slots;
        let mut by_rows: FxHashMap<Multi, Vec<(Multi, &A, SmallVec<[u8; 8]>)>> = FxHashMap::default();
        for (k, b) in &o.entries {
            let (r, c) = o.rows_cols(k);
            let ps = o.slot_parities(&r, &c);
            by_rows.entry(r).or_default().push((c, b, ps));
        }
        let mut out = Self::zero(&self.ctx, m);
        for (k, a) in &self.entries {
            let (r, c) = self.rows_cols(k);
            let Some(list) = by_rows.get(&c) else { continue };
            let xp = self.slot_parities(&r, &c);
            let pa = a.parity();
            for (c2, b, yp) in list {
                let mut odd = false;
                for kk in 0..m {
                    if yp[kk] == 0 {
                        continue;
                    }
                    let mut tail = pa;
                    for l in kk + 1..m {
                        tail ^= xp[l];
                    }
                    if tail == 1 {
                        odd = !odd;
                    }
                }
                let prod = a.mul(b);
                let prod = if odd { prod.neg() } else { prod };
                out.add_entry(&r, c2, prod);
            }
        }
        out
    }

    /// Applies an even linear map to one slot of every entry.
    fn map_slot<F>(&self, slot: usize, f: F) -> Self
    where
        F: Fn(u8, u8) -> Option<(u8, u8, Rat)>,
    {
        let mut out = Self::zero(&self.ctx, self.slots);
        for (k, a) in &self.entries {
            let (mut r, mut c) = self.rows_cols(k);
            if let Some((i, j, s)) = f(r[slot], c[slot]) {
                r[slot] = i;
                c[slot] = j;
                out.add_entry(&r, &c, a.scale(&s));
            }
        }
        out
    }

    /// Partial graded transposition `E_{ab} ↦ (-1)^{|a||b|+|a|} E_{ba}` on `slot`.
    pub fn partial_transpose_t(&self, slot: usize) -> Self {
        let ctx = self.ctx.clone();
        self.map_slot(slot, |a, b| {
            let (pa, pb) = (ctx.parity(a), ctx.parity(b));
            Some((b, a, sgn((pa & pb) ^ pa == 1)))
        })
    }

    /// Partial ι-transposition `E_{ab} ↦ (-1)^{|a||b|+|b|} θ_{a'} θ_{b'} E_{b'a'}` on `slot`.
    pub fn partial_transpose_iota(&self, slot: usize) -> Result<Self> {
        if !self.ctx.n.is_multiple_of(2) {
            return Err(KernelError::Config("ι needs an even odd block".into()));
        }
        let ctx = self.ctx.clone();
        Ok(self.map_slot(slot, |a, b| {
            let (pa, pb) = (ctx.parity(a), ctx.parity(b));
            let (ab, bb) = (ctx.bar(a), ctx.bar(b));
            let s = sgn((pa & pb) ^ pb == 1).mul(&Rat::int(ctx.theta(ab) * ctx.theta(bb)));
            Some((bb, ab, s))
        }))
    }

    /// Supertrace over `slot`, removing it.
    pub fn partial_supertrace(&self, slot: usize) -> Self {
        let mut out = Self::zero(&self.ctx, self.slots - 1);
        for (k, a) in &self.entries {
            let (mut r, mut c) = self.rows_cols(k);
            if r[slot] != c[slot] {
                continue;
            }
            let s = sgn(self.ctx.parity(r[slot]) == 1);
            r.remove(slot);
            c.remove(slot);
            out.add_entry(&r, &c, a.scale(&s));
        }
        out
    }

    /// Full supertrace.
    pub fn supertrace(&self) -> A {
        let mut t = self.clone();
        while t.slots > 0 {
            t = t.partial_supertrace(t.slots - 1);
        }
        t.get(&[], &[])
    }

    /// Places this tensor on the given slots of a larger tensor, identity elsewhere.
    pub fn embed(&self, slots: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.slots);
        let others: Vec<usize> = (0..slots).filter(|p| !positions.contains(p)).collect();
        let mut out = Self::zero(&self.ctx, slots);
        let rest = self.ctx.all_multis(others.len());
        for (k, a) in &self.entries {
            let (r, c) = self.rows_cols(k);
            for idx in &rest {
                let mut rr: Multi = smallvec::smallvec![0; slots];
                let mut cc: Multi = smallvec::smallvec![0; slots];
                for (q, &p) in positions.iter().enumerate() {
                    rr[p] = r[q];
                    cc[p] = c[q];
                }
                for (q, &p) in others.iter().enumerate() {
                    rr[p] = idx[q];
                    cc[p] = idx[q];
                }
                out.add_entry(&rr, &cc, a.clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|a| a.is_zero())
    }

    /// Acts on a graded vector.
    pub fn apply(&self, v: &SuperVector<A>) -> SuperVector<A> {
        let mut by_cols: FxHashMap<Multi, Vec<(Multi, &A)>> = FxHashMap::default();
        for (k, a) in &self.entries {
            let (r, c) = self.rows_cols(k);
            by_cols.entry(c).or_default().push((r, a));
        }
        let mut out = SuperVector::zero(&self.ctx, v.slots);
        for (c, b) in &v.entries {
            let Some(list) = by_cols.get(c) else { continue };
            let pc = self.ctx.multi_parity(c);
            for (r, a) in list {
                let odd = action_sign(&self.ctx, r, c) ^ (a.parity() & pc == 1);
                let prod = a.mul(b);
                out.add(r, if odd { prod.neg() } else { prod });
            }
        }
        out
    }
}

impl SuperTensor<Rat> {
    pub fn lift<A: Coeff>(&self) -> SuperTensor<A> {
        self.map(|q| A::from_rat(q.clone()))
    }
}

/// `P_{ab} = Σ (-1)^{|j|} E_{ij} ⊗ E_{ji}` acting on slots `a` and `b`.
pub fn super_permutation(ctx: &SuperContext, slots: usize, a: usize, b: usize) -> SuperTensor<Rat> {
    let mut p = SuperTensor::zero(ctx, 2);
    for i in ctx.indices() {
        for j in ctx.indices() {
            p.add_entry(&[i, j], &[j, i], sgn(ctx.parity(j) == 1));
        }
    }
    p.embed(slots, &[a, b])
}

/// `R_{ab}(x) = 1 - P_{ab}/x` at a nonzero rational point.
pub fn r_matrix(ctx: &SuperContext, slots: usize, a: usize, b: usize, x: &Rat) -> Result<SuperTensor<Rat>> {
    let inv = x
        .recip()
        .ok_or_else(|| KernelError::InvalidArgument("R-matrix at zero".into()))?;
    Ok(SuperTensor::unit(ctx, slots).sub(&super_permutation(ctx, slots, a, b).scale(&inv)))
}

/// `R^ι_{ab}(x) = 1 - P^ι_{ab}/x`, transposed in slot `a`.
pub fn r_matrix_iota(ctx: &SuperContext, slots: usize, a: usize, b: usize, x: &Rat) -> Result<SuperTensor<Rat>> {
    let inv = x
        .recip()
        .ok_or_else(|| KernelError::InvalidArgument("R-matrix at zero".into()))?;
    let p = super_permutation(ctx, slots, a, b).partial_transpose_iota(a)?;
    Ok(SuperTensor::unit(ctx, slots).sub(&p.scale(&inv)))
}

/// `R(u_1,…,u_m) = R_{m-1,m} (R_{m-2,m} R_{m-2,m-1}) ⋯ (R_{1m} ⋯ R_{12})` with
/// `R_{ij} = R_{ij}(u_i - u_j)`.
pub fn r_product(ctx: &SuperContext, points: &[Rat]) -> Result<SuperTensor<Rat>> {
    let m = points.len();
    let mut out = SuperTensor::unit(ctx, m);
    for i in (0..m.saturating_sub(1)).rev() {
        for j in (i + 1..m).rev() {
            out = out.mul(&r_matrix(ctx, m, i, j, &points[i].sub(&points[j]))?);
        }
    }
    Ok(out)
}

/// Signed permutation of tensor factors: `σ` sends the factor in position
/// `k` to position `σ(k)`.
pub fn permute_vector_basis(ctx: &SuperContext, sigma: &[usize], v: &[u8]) -> (Multi, bool) {
    // adjacent transpositions along a reduced word, each with its Koszul sign
    let mut w: Multi = Multi::from_slice(v);
    let mut pos: Vec<usize> = sigma.to_vec();
    let mut odd = false;
    loop {
        let mut done = true;
        for i in 0..pos.len().saturating_sub(1) {
            if pos[i] > pos[i + 1] {
                if ctx.parity(w[i]) & ctx.parity(w[i + 1]) == 1 {
                    odd = !odd;
                }
                w.swap(i, i + 1);
                pos.swap(i, i + 1);
                done = false;
            }
        }
        if done {
            break;
        }
    }
    (w, odd)
}

/// Image of `σ` under the representation on `V^{⊗m}` generated by the
/// super-permutations of adjacent factors.
pub fn permutation_operator(ctx: &SuperContext, sigma: &[usize]) -> SuperTensor<Rat> {
    SuperTensor::from_action(ctx, sigma.len(), |c| {
        let (w, odd) = permute_vector_basis(ctx, sigma, c);
        vec![(w, sgn(odd))]
    })
}

fn symmetrizer_sum(ctx: &SuperContext, m: usize, alternate: bool) -> Result<SuperTensor<Rat>> {
    let mut out = SuperTensor::zero(ctx, m);
    for sigma in perm::enumerate(m)? {
        let op = permutation_operator(ctx, &sigma);
        let s = if alternate { perm::sign(&sigma) } else { 1 };
        out = out.add(&op.scale(&Rat::int(s as i64)));
    }
    Ok(out)
}

/// Image of `Σ sgn(σ) σ`.
pub fn antisymmetrizer(ctx: &SuperContext, m: usize) -> Result<SuperTensor<Rat>> {
    symmetrizer_sum(ctx, m, true)
}

/// Image of `Σ σ`.
pub fn symmetrizer(ctx: &SuperContext, m: usize) -> Result<SuperTensor<Rat>> {
    symmetrizer_sum(ctx, m, false)
}

/// Projector onto the even (`odd = false`) or odd basis vectors in one slot.
pub fn block_projector(ctx: &SuperContext, slots: usize, slot: usize, odd: bool) -> SuperTensor<Rat> {
    let mut t = SuperTensor::zero(ctx, 1);
    for i in ctx.indices() {
        if (ctx.parity(i) == 1) == odd {
            t.add_entry(&[i], &[i], Rat::one());
        }
    }
    t.embed(slots, &[slot])
}

/// Projector onto `V_0^{⊗p} ⊗ V_1^{⊗q}` on `p + q` slots.
pub fn block_pattern_projector(ctx: &SuperContext, p: usize, q: usize) -> SuperTensor<Rat> {
    SuperTensor::from_action(ctx, p + q, |c| {
        let ok = c.iter().enumerate().all(|(k, &i)| (ctx.parity(i) == 1) == (k >= p));
        if ok {
            vec![(c.clone(), Rat::one())]
        } else {
            vec![]
        }
    })
}

/// Antisymmetrizer on the first `p` slots times symmetrizer on the next `q`.
pub fn berezinian_symmetrizer(ctx: &SuperContext, p: usize, q: usize) -> Result<SuperTensor<Rat>> {
    let slots = p + q;
    let mut out = SuperTensor::unit(ctx, slots);
    if p > 0 {
        let g = antisymmetrizer(ctx, p)?;
        out = out.mul(&g.embed(slots, &(0..p).collect::<Vec<_>>()));
    }
    if q > 0 {
        let h = symmetrizer(ctx, q)?;
        out = out.mul(&h.embed(slots, &(p..slots).collect::<Vec<_>>()));
    }
    Ok(out)
}

/// Sparse element of `V^{⊗m} ⊗ A`, coefficients written on the right.
#[derive(Clone, PartialEq)]
pub struct SuperVector<A: Coeff> {
    pub ctx: SuperContext,
    pub slots: usize,
    pub entries: FxHashMap<Multi, A>,
}

impl<A: Coeff> fmt::Debug for SuperVector<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.entries.keys().collect();
        keys.sort();
        write!(f, "SuperVector{{")?;
        for k in keys {
            write!(f, " {:?}:{:?}", k.as_slice(), self.entries[k])?;
        }
        write!(f, " }}")
    }
}

impl<A: Coeff> SuperVector<A> {
    pub fn zero(ctx: &SuperContext, slots: usize) -> Self {
        SuperVector { ctx: ctx.clone(), slots, entries: FxHashMap::default() }
    }

    pub fn basis(ctx: &SuperContext, idx: &[u8]) -> Self {
        let mut v = Self::zero(ctx, idx.len());
        v.entries.insert(Multi::from_slice(idx), A::one());
        v
    }

    pub fn add(&mut self, idx: &[u8], a: A) {
        match self.entries.get_mut(idx) {
            Some(x) => {
                x.add_assign(&a);
                if x.is_zero() {
                    self.entries.remove(idx);
                }
            }
            None => {
                if !a.is_zero() {
                    self.entries.insert(Multi::from_slice(idx), a);
                }
            }
        }
    }

    pub fn get(&self, idx: &[u8]) -> A {
        self.entries.get(idx).cloned().unwrap_or_else(A::zero)
    }

    pub fn map<F: Fn(&A) -> A>(&self, f: F) -> Self {
        let mut out = Self::zero(&self.ctx, self.slots);
        for (k, a) in &self.entries {
            let b = f(a);
            if !b.is_zero() {
                out.entries.insert(k.clone(), b);
            }
        }
        out
    }

    /// Applies `Σ_{ij} E_{ij} ⊗ x_{ij}` placed in `slot`, where each `x_{ij}`
    /// has parity `|i|+|j|`.
    pub fn apply_slot_matrix(&self, slot: usize, x: &[Vec<A>]) -> Self {
        let ctx = &self.ctx;
        let mut out = Self::zero(ctx, self.slots);
        for (w, b) in &self.entries {
            let before = ctx.multi_parity(&w[..slot]);
            let total = ctx.multi_parity(w);
            let j = w[slot];
            for i in ctx.indices() {
                let a = &x[i as usize - 1][j as usize - 1];
                if a.is_zero() {
                    continue;
                }
                let pe = ctx.parity(i) ^ ctx.parity(j);
                let odd = (pe & before) ^ (pe & total) == 1;
                let mut w2 = w.clone();
                w2[slot] = i;
                let prod = a.mul(b);
                out.add(&w2, if odd { prod.neg() } else { prod });
            }
        }
        out
    }

    /// Applies a numeric operator and then multiplies by an even scalar `c`
    /// placed on the left of the existing coefficients.
    pub fn apply_numeric(&self, t: &SuperTensor<Rat>, c: &A) -> Self {
        let mut by_cols: FxHashMap<Multi, Vec<(Multi, Rat)>> = FxHashMap::default();
        for (k, a) in &t.entries {
            let (r, col) = t.rows_cols(k);
            let odd = action_sign(&self.ctx, &r, &col);
            by_cols.entry(col).or_default().push((r, if odd { a.neg() } else { a.clone() }));
        }
        let mut out = Self::zero(&self.ctx, self.slots);
        for (w, b) in &self.entries {
            let Some(list) = by_cols.get(w) else { continue };
            let cb = c.mul(b);
            for (r, q) in list {
                out.add(r, cb.scale(q));
            }
        }
        out
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, a) in &o.entries {
            out.add(k, a.clone());
        }
        out
    }

    pub fn scale(&self, q: &Rat) -> Self {
        self.map(|a| a.scale(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(m: usize, n: usize) -> SuperContext {
        SuperContext::new(m, n).unwrap()
    }

    #[test]
    fn permutation_acts_with_koszul_sign() {
        let c = ctx(1, 1);
        let p = super_permutation(&c, 2, 0, 1);
        for i in 1..=2u8 {
            for j in 1..=2u8 {
                let v = p.apply(&SuperVector::basis(&c, &[i, j]));
                let expect = if c.parity(i) & c.parity(j) == 1 { Rat::int(-1) } else { Rat::one() };
                assert_eq!(v.entries.len(), 1);
                assert_eq!(v.get(&[j, i]), expect);
            }
        }
    }

    #[test]
    fn permutation_squares_to_one() {
        let c = ctx(1, 1);
        let p = super_permutation(&c, 2, 0, 1);
        assert_eq!(p.mul(&p), SuperTensor::unit(&c, 2));
        let c = ctx(2, 1);
        let p = super_permutation(&c, 3, 0, 2);
        assert_eq!(p.mul(&p), SuperTensor::unit(&c, 3));
    }

    #[test]
    fn transposition_of_matrix_units() {
        let c = ctx(1, 1);
        let e12 = SuperTensor::<Rat>::matrix_unit(&c, 1, 0, 1, 2);
        let e21 = SuperTensor::<Rat>::matrix_unit(&c, 1, 0, 2, 1);
        assert_eq!(e12.partial_transpose_t(0), e21);
        assert_eq!(e21.partial_transpose_t(0), e12.scale(&Rat::int(-1)));
    }

    #[test]
    fn supertrace_of_matrix_units() {
        let c = ctx(1, 2);
        for i in c.indices() {
            let e = SuperTensor::<Rat>::matrix_unit(&c, 1, 0, i, i);
            let want = if c.parity(i) == 1 { -1 } else { 1 };
            assert_eq!(e.supertrace(), Rat::int(want));
        }
        assert_eq!(SuperTensor::<Rat>::unit(&c, 1).supertrace(), Rat::int(-1));
    }

    #[test]
    fn yang_baxter_at_fixed_point() {
        let c = ctx(1, 1);
        let (u, v) = (Rat::int(2), Rat::int(3));
        let r12 = r_matrix(&c, 3, 0, 1, &u).unwrap();
        let r13 = r_matrix(&c, 3, 0, 2, &u.add(&v)).unwrap();
        let r23 = r_matrix(&c, 3, 1, 2, &v).unwrap();
        assert_eq!(r12.mul(&r13).mul(&r23), r23.mul(&r13).mul(&r12));
        assert!(r_matrix(&c, 2, 0, 1, &Rat::zero()).is_err());
    }

    #[test]
    fn antisymmetrizer_product_form() {
        // G = (1 - P_13 - P_12)(1 - P_23) for m = 3
        for (m, n) in [(1, 1), (2, 1), (1, 2)] {
            let c = ctx(m, n);
            let one = SuperTensor::<Rat>::unit(&c, 3);
            let p12 = super_permutation(&c, 3, 0, 1);
            let p13 = super_permutation(&c, 3, 0, 2);
            let p23 = super_permutation(&c, 3, 1, 2);
            let g = one.sub(&p13).sub(&p12).mul(&one.sub(&p23));
            assert_eq!(g, antisymmetrizer(&c, 3).unwrap());
            let h = one.add(&p13).add(&p12).mul(&one.add(&p23));
            assert_eq!(h, symmetrizer(&c, 3).unwrap());
        }
    }

    #[test]
    fn antisymmetrizer_is_quasi_idempotent() {
        let c = ctx(1, 2);
        for m in 2..=3 {
            let g = antisymmetrizer(&c, m).unwrap();
            let f: i64 = (1..=m as i64).product();
            assert_eq!(g.mul(&g), g.scale(&Rat::int(f)));
            let h = symmetrizer(&c, m).unwrap();
            assert_eq!(h.mul(&h), h.scale(&Rat::int(f)));
        }
    }

    #[test]
    fn block_projector_is_idempotent() {
        let c = ctx(2, 2);
        let j = block_pattern_projector(&c, 2, 2);
        assert_eq!(j.mul(&j), j);
        let mut prod = SuperTensor::unit(&c, 4);
        for s in 0..4 {
            prod = prod.mul(&block_projector(&c, 4, s, s >= 2));
        }
        assert_eq!(prod, j);
    }

    #[test]
    fn iota_is_an_involution_and_matches_conjugated_transpose() {
        let c = ctx(1, 2);
        let p = super_permutation(&c, 2, 0, 1);
        let x = p.add(&SuperTensor::matrix_unit(&c, 2, 0, 1, 3)).add(&SuperTensor::matrix_unit(&c, 2, 1, 2, 3));
        assert_eq!(x.partial_transpose_iota(0).unwrap().partial_transpose_iota(0).unwrap(), x);
        // P^{ι1} = P^{ι2}
        assert_eq!(p.partial_transpose_iota(0).unwrap(), p.partial_transpose_iota(1).unwrap());
    }

    #[test]
    fn permutation_with_partial_transposes() {
        // P P^{t1} = J_1 P^{t1} = P^{t2} P
        for (m, n) in [(1, 1), (1, 2), (2, 2)] {
            let c = ctx(m, n);
            let p = super_permutation(&c, 2, 0, 1);
            let pt1 = p.partial_transpose_t(0);
            let pt2 = p.partial_transpose_t(1);
            let mut j1 = SuperTensor::<Rat>::zero(&c, 1);
            for i in c.indices() {
                j1.add_entry(&[i], &[i], sgn(c.parity(i) == 1));
            }
            let j1 = j1.embed(2, &[0]);
            assert_eq!(p.mul(&pt1), j1.mul(&pt1));
            assert_eq!(p.mul(&pt1), pt2.mul(&p));
        }
    }

    #[test]
    fn fused_r_matrices_give_the_symmetrizers() {
        for (m, n) in [(1, 1), (2, 1)] {
            let c = ctx(m, n);
            for k in 2..=3 {
                let down: Vec<Rat> = (0..k).map(|i| Rat::int(5 - i as i64)).collect();
                let up: Vec<Rat> = (0..k).map(|i| Rat::int(i as i64 - 1)).collect();
                assert_eq!(r_product(&c, &down).unwrap(), antisymmetrizer(&c, k).unwrap());
                assert_eq!(r_product(&c, &up).unwrap(), symmetrizer(&c, k).unwrap());
            }
        }
    }

    #[test]
    fn iota_r_matrix_unitarity() {
        let c = SuperContext::twisted(1, 2).unwrap();
        let u = Rat::int(2);
        let a = r_matrix_iota(&c, 2, 0, 1, &u).unwrap();
        let b = r_matrix_iota(&c, 2, 0, 1, &u.neg().add(&Rat::int(-1))).unwrap();
        assert_eq!(a.mul(&b), SuperTensor::unit(&c, 2));
        assert!(r_matrix_iota(&ctx(1, 1), 2, 0, 1, &u).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn yang_baxter_random_points(a in -20i64..20, b in 1i64..7, c in -20i64..20, d in 1i64..7) {
            let u = Rat::new(a, b);
            let v = Rat::new(c, d);
            prop_assume!(!u.is_zero() && !v.is_zero() && !u.add(&v).is_zero());
            let cx = ctx(1, 2);
            let r12 = r_matrix(&cx, 3, 0, 1, &u).unwrap();
            let r13 = r_matrix(&cx, 3, 0, 2, &u.add(&v)).unwrap();
            let r23 = r_matrix(&cx, 3, 1, 2, &v).unwrap();
            prop_assert_eq!(r12.mul(&r13).mul(&r23), r23.mul(&r13).mul(&r12));
        }

        #[test]
        fn product_is_associative(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let cx = ctx(1, 1);
            let mut rand_tensor = || {
                let mut t = SuperTensor::<Rat>::zero(&cx, 2);
                for _ in 0..6 {
                    let r = [rng.gen_range(1..=2u8), rng.gen_range(1..=2u8)];
                    let c = [rng.gen_range(1..=2u8), rng.gen_range(1..=2u8)];
                    t.add_entry(&r, &c, Rat::int(rng.gen_range(-3..=3)));
                }
                t
            };
            let (x, y, z) = (rand_tensor(), rand_tensor(), rand_tensor());
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        }
    }
}
