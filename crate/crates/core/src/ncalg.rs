//! Noncommutative polynomials over the rationals in Yangian generators, and
//! PBW normal forms from rewrite rules derived from the RTT relation.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtOrd};
use std::sync::Arc;

use dashmap::DashMap;
use rustc_hash::{FxBuildHasher, FxHashMap};
use smallvec::SmallVec;

use crate::check::Verdict;
use crate::error::{KernelError, Result};
use crate::rat::Rat;
use crate::ring::Coeff;
use crate::tensor::{super_permutation, SuperContext, SuperTensor};

/// Symbol families. The numeric order of the packed symbol is the PBW order:
/// central symbols first, then generators of the first tensor factor sorted
/// by `(level, i, j)`, then those of the second factor.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Central = 0,
    T = 1,
    /// Generators of the second factor of `Y ⊗ Y`.
    T2 = 2,
    /// Free generators with no relations.
    Free = 3,
}

/// A packed generator: `family | level | i | j | parity`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub u32);

impl Sym {
    pub fn new(family: Family, i: u8, j: u8, level: u32, parity: u8) -> Sym {
        assert!(level < 1024);
        Sym(((family as u32) << 30) | (level << 20) | ((i as u32) << 12) | ((j as u32) << 4) | (parity as u32 & 1))
    }

    pub fn t(ctx: &SuperContext, i: u8, j: u8, level: u32) -> Sym {
        Sym::new(Family::T, i, j, level, ctx.parity(i) ^ ctx.parity(j))
    }

    pub fn t2(ctx: &SuperContext, i: u8, j: u8, level: u32) -> Sym {
        Sym::new(Family::T2, i, j, level, ctx.parity(i) ^ ctx.parity(j))
    }

    pub fn free(ctx: &SuperContext, i: u8, j: u8, level: u32) -> Sym {
        Sym::new(Family::Free, i, j, level, ctx.parity(i) ^ ctx.parity(j))
    }

    pub fn central(level: u32) -> Sym {
        Sym::new(Family::Central, 0, 0, level, 0)
    }

    pub fn family(self) -> Family {
        match self.0 >> 30 {
            0 => Family::Central,
            1 => Family::T,
            2 => Family::T2,
            _ => Family::Free,
        }
    }

    pub fn level(self) -> u32 {
        (self.0 >> 20) & 1023
    }

    pub fn i(self) -> u8 {
        ((self.0 >> 12) & 255) as u8
    }

    pub fn j(self) -> u8 {
        ((self.0 >> 4) & 255) as u8
    }

    pub fn parity(self) -> u8 {
        (self.0 & 1) as u8
    }

    pub fn with_family(self, f: Family) -> Sym {
        Sym((self.0 & !(3 << 30)) | ((f as u32) << 30))
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family() {
            Family::Central => write!(f, "c[{}]", self.level()),
            Family::T => write!(f, "t[{},{},{}]", self.i(), self.j(), self.level()),
            Family::T2 => write!(f, "t'[{},{},{}]", self.i(), self.j(), self.level()),
            Family::Free => write!(f, "s[{},{},{}]", self.i(), self.j(), self.level()),
        }
    }
}

pub type Word = SmallVec<[Sym; 6]>;

fn word_parity(w: &[Sym]) -> u8 {
    w.iter().fold(0, |p, s| p ^ s.parity())
}

fn word_level(w: &[Sym]) -> u32 {
    w.iter().map(|s| s.level()).sum()
}

/// Finite sum of rational multiples of words.
#[derive(Clone, Default)]
pub struct NcPoly {
    pub terms: FxHashMap<Word, Rat>,
}

impl PartialEq for NcPoly {
    fn eq(&self, o: &NcPoly) -> bool {
        self.terms == o.terms
    }
}

impl NcPoly {
    pub fn zero() -> NcPoly {
        NcPoly { terms: FxHashMap::default() }
    }

    pub fn constant(q: Rat) -> NcPoly {
        let mut p = NcPoly::zero();
        if !q.is_zero() {
            p.terms.insert(Word::new(), q);
        }
        p
    }

    pub fn sym(s: Sym) -> NcPoly {
        NcPoly::word(&[s], Rat::one())
    }

    pub fn word(w: &[Sym], q: Rat) -> NcPoly {
        let mut p = NcPoly::zero();
        if !q.is_zero() {
            p.terms.insert(Word::from_slice(w), q);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: &[Sym], q: &Rat) {
        if q.is_zero() {
            return;
        }
        match self.terms.get_mut(w) {
            Some(x) => {
                *x = x.add(q);
                if x.is_zero() {
                    self.terms.remove(w);
                }
            }
            None => {
                self.terms.insert(Word::from_slice(w), q.clone());
            }
        }
    }

    pub fn add_poly_scaled(&mut self, o: &NcPoly, q: &Rat) {
        if q.is_zero() {
            return;
        }
        for (w, c) in &o.terms {
            self.add_term(w, &c.mul(q));
        }
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Word::new()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn max_level(&self) -> u32 {
        self.terms.keys().map(|w| word_level(w)).max().unwrap_or(0)
    }

    /// Terms sorted by total level, then length, then symbols.
    pub fn sorted_terms(&self) -> Vec<(&Word, &Rat)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| cmp_words(a.0, b.0));
        v
    }

    pub fn symbols(&self) -> Vec<Sym> {
        let mut s: Vec<Sym> = self.terms.keys().flat_map(|w| w.iter().copied()).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn map_syms<F: Fn(Sym) -> Sym>(&self, f: F) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            let w2: Word = w.iter().map(|&s| f(s)).collect();
            out.add_term(&w2, c);
        }
        out
    }
}

pub fn cmp_words(a: &[Sym], b: &[Sym]) -> Ordering {
    word_level(a)
        .cmp(&word_level(b))
        .then(a.len().cmp(&b.len()))
        .then_with(|| a.cmp(b))
}

impl Coeff for NcPoly {
    fn zero() -> NcPoly {
        NcPoly::zero()
    }
    fn one() -> NcPoly {
        NcPoly::constant(Rat::one())
    }
    fn from_rat(q: Rat) -> NcPoly {
        NcPoly::constant(q)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_assign(&mut self, o: &NcPoly) {
        if self.terms.is_empty() {
            *self = o.clone();
            return;
        }
        for (w, c) in &o.terms {
            self.add_term(w, c);
        }
    }
    fn mul(&self, o: &NcPoly) -> NcPoly {
        let mut out = NcPoly::zero();
        out.terms.reserve(self.terms.len() * o.terms.len());
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w: Word = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(&w, &c1.mul(c2));
            }
        }
        out
    }
    fn scale(&self, q: &Rat) -> NcPoly {
        if q.is_zero() {
            return NcPoly::zero();
        }
        NcPoly { terms: self.terms.iter().map(|(w, c)| (w.clone(), c.mul(q))).collect() }
    }
    fn parity(&self) -> u8 {
        self.terms.keys().next().map(|w| word_parity(w)).unwrap_or(0)
    }
    fn as_scalar(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Word::new()).cloned(),
            _ => None,
        }
    }
}

impl fmt::Debug for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical rendering: terms in sorted order, `coeff*sym*sym`.
impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.signum() < 0;
            let mag = if neg { c.neg() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if w.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            for (n, s) in w.iter().enumerate() {
                if n > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// `y x = sign * x y + correction` for an out-of-order adjacent pair `(y, x)`;
/// `sign == 0` encodes the square of an odd generator.
#[derive(Clone, Debug)]
pub struct Rule {
    pub sign: i8,
    pub correction: NcPoly,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

/// Rewrite system for `Y(gl_{M|N})` with rules for all generator pairs of
/// level at most `cutoff`.
pub struct RewriteRules {
    pub ctx: SuperContext,
    pub cutoff: u32,
    rules: FxHashMap<(Sym, Sym), Rule>,
    memo: DashMap<Word, Arc<NcPoly>, FxBuildHasher>,
    pub step_budget: u64,
}

fn t_matrix_coefficient(ctx: &SuperContext, level: u32, slot: usize) -> SuperTensor<NcPoly> {
    if level == 0 {
        return SuperTensor::unit(ctx, 2);
    }
    let mut x = vec![vec![NcPoly::zero(); ctx.dim()]; ctx.dim()];
    for i in ctx.indices() {
        for j in ctx.indices() {
            x[i as usize - 1][j as usize - 1] = NcPoly::sym(Sym::t(ctx, i, j, level));
        }
    }
    SuperTensor::from_slot_matrix(ctx, 2, slot, &x)
}

/// Derives the quadratic rewrite rules from the coefficients of the cleared
/// relation `((u-v) - P) T_1(u) T_2(v) = T_2(v) T_1(u) ((u-v) - P)`.
///
/// Reading off `u^{-a} v^{-b}` gives
/// `Δ_{a+1,b} = Δ_{a,b+1} + P X_{a,b} - X'_{a,b} P`, with
/// `X_{a,b} = T_1^{(a)} T_2^{(b)}`, `X'_{a,b} = T_2^{(b)} T_1^{(a)}` and
/// `Δ = X - X'`. Since `Δ_{0,*} = 0`, summing gives every `Δ_{r,s}` as a
/// combination of lower-degree products.
pub fn derive_rules(ctx: &SuperContext, cutoff: u32) -> RewriteRules {
    let p = super_permutation(ctx, 2, 0, 1).lift::<NcPoly>();
    let mut cache: FxHashMap<(u32, u32), (SuperTensor<NcPoly>, SuperTensor<NcPoly>)> = FxHashMap::default();
    let mut cross = |a: u32, b: u32| -> SuperTensor<NcPoly> {
        let (x, xp) = cache.entry((a, b)).or_insert_with(|| {
            let t1 = t_matrix_coefficient(ctx, a, 0);
            let t2 = t_matrix_coefficient(ctx, b, 1);
            (t1.mul(&t2), t2.mul(&t1))
        });
        p.mul(x).sub(&xp.mul(&p))
    };
    let mut rules: FxHashMap<(Sym, Sym), Rule> = FxHashMap::default();
    for r in 1..=cutoff {
        for s in 1..=cutoff {
            let mut delta = SuperTensor::<NcPoly>::zero(ctx, 2);
            for a in 0..r {
                delta = delta.add(&cross(a, r + s - 1 - a));
            }
            for i in ctx.indices() {
                for j in ctx.indices() {
                    for k in ctx.indices() {
                        for l in ctx.indices() {
                            let x = Sym::t(ctx, i, j, r);
                            let y = Sym::t(ctx, k, l, s);
                            // sgn x y - y x = c
                            let c = delta.get(&[i, k], &[j, l]);
                            let sgn: i8 = if x.parity() & y.parity() == 1 { -1 } else { 1 };
                            match y.cmp(&x) {
                                Ordering::Greater => {
                                    rules.insert((y, x), Rule { sign: sgn, correction: c.neg() });
                                }
                                Ordering::Equal if x.parity() == 1 => {
                                    rules.insert((x, x), Rule { sign: 0, correction: c.scale(&Rat::new(-1, 2)) });
                                }
                                _ => {}
                            }
                        }
                    }
                }
            }
        }
    }
    RewriteRules {
        ctx: ctx.clone(),
        cutoff,
        rules,
        memo: DashMap::with_hasher(FxBuildHasher),
        step_budget: 50_000_000,
    }
}

enum Step {
    Normal,
    Rewrite(Vec<(Word, Rat)>),
}

impl RewriteRules {
    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, y: Sym, x: Sym) -> Option<&Rule> {
        self.rules.get(&(y, x))
    }

    /// All rules as `((y, x), rule)`, in symbol order.
    pub fn sorted_rules(&self) -> Vec<((Sym, Sym), &Rule)> {
        let mut v: Vec<_> = self.rules.iter().map(|(k, r)| (*k, r)).collect();
        v.sort_by_key(|a| a.0);
        v
    }

    pub fn clear_memo(&self) {
        self.memo.clear();
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Rewrite for the adjacent pair `(y, x)`, or `None` if already ordered.
    fn pair_rewrite(&self, y: Sym, x: Sym) -> Result<Option<(i8, Option<NcPoly>)>> {
        let (fy, fx) = (y.family(), x.family());
        if fy == Family::Free || fx == Family::Free {
            // central symbols still move to the front past free ones
            if fx == Family::Central && fy != Family::Central {
                return Ok(Some((1, None)));
            }
            return Ok(None);
        }
        if fx == Family::Central || fy == Family::Central {
            return Ok(if y > x { Some((1, None)) } else { None });
        }
        if fy != fx {
            // different tensor factors supercommute
            if y > x {
                let s = if x.parity() & y.parity() == 1 { -1 } else { 1 };
                return Ok(Some((s, None)));
            }
            return Ok(None);
        }
        if y < x || (y == x && y.parity() == 0) {
            return Ok(None);
        }
        let (yy, xx) = (y.with_family(Family::T), x.with_family(Family::T));
        let need = yy.level().max(xx.level());
        let rule = self
            .rules
            .get(&(yy, xx))
            .ok_or(KernelError::CutoffExceeded { cutoff: self.cutoff, needed: need })?;
        let corr = if fy == Family::T2 {
            rule.correction.map_syms(|s| if s.family() == Family::T { s.with_family(Family::T2) } else { s })
        } else {
            rule.correction.clone()
        };
        Ok(Some((rule.sign, Some(corr))))
    }

    fn step(&self, w: &[Sym], strategy: Strategy) -> Result<Step> {
        let n = w.len();
        if n < 2 {
            return Ok(Step::Normal);
        }
        let positions: Box<dyn Iterator<Item = usize>> = match strategy {
            Strategy::Leftmost => Box::new(0..n - 1),
            Strategy::Rightmost => Box::new((0..n - 1).rev()),
        };
        for p in positions {
            if let Some((sign, corr)) = self.pair_rewrite(w[p], w[p + 1])? {
                let mut out = Vec::new();
                if sign != 0 {
                    let mut sw: Word = Word::from_slice(w);
                    sw.swap(p, p + 1);
                    out.push((sw, Rat::int(sign as i64)));
                }
                if let Some(c) = corr {
                    for (cw, q) in &c.terms {
                        let mut nw: Word = Word::from_slice(&w[..p]);
                        nw.extend_from_slice(cw);
                        nw.extend_from_slice(&w[p + 2..]);
                        out.push((nw, q.clone()));
                    }
                }
                return Ok(Step::Rewrite(out));
            }
        }
        Ok(Step::Normal)
    }

    pub fn is_normal_word(&self, w: &[Sym]) -> Result<bool> {
        Ok(matches!(self.step(w, Strategy::Leftmost)?, Step::Normal))
    }

    fn nf_word(&self, w: &[Sym], steps: &AtomicU64) -> Result<Arc<NcPoly>> {
        if let Some(r) = self.memo.get(w) {
            return Ok(r.clone());
        }
        let res = match self.step(w, Strategy::Leftmost)? {
            Step::Normal => NcPoly::word(w, Rat::one()),
            Step::Rewrite(parts) => {
                if steps.fetch_add(1, AtOrd::Relaxed) > self.step_budget {
                    return Err(KernelError::StepBudget(self.step_budget));
                }
                let mut acc = NcPoly::zero();
                for (nw, q) in parts {
                    let sub = self.nf_word(&nw, steps)?;
                    acc.add_poly_scaled(&sub, &q);
                }
                acc
            }
        };
        let res = Arc::new(res);
        self.memo.insert(Word::from_slice(w), res.clone());
        Ok(res)
    }

    /// PBW normal form (leftmost-first rewriting, memoized).
    pub fn normal_form(&self, p: &NcPoly) -> Result<NcPoly> {
        let steps = AtomicU64::new(0);
        let mut out = NcPoly::zero();
        for (w, c) in &p.terms {
            if matches!(self.step(w, Strategy::Leftmost)?, Step::Normal) {
                out.add_term(w, c);
            } else {
                let nf = self.nf_word(w, &steps)?;
                out.add_poly_scaled(&nf, c);
            }
        }
        Ok(out)
    }

    /// Normal form by plain worklist rewriting with the chosen strategy and
    /// no shared memo; used to cross-check confluence.
    pub fn normal_form_with(&self, p: &NcPoly, strategy: Strategy) -> Result<NcPoly> {
        let mut work: FxHashMap<Word, Rat> = p.terms.clone();
        let mut out = NcPoly::zero();
        let mut steps = 0u64;
        while let Some(w) = work.keys().next().cloned() {
            let c = work.remove(&w).unwrap();
            match self.step(&w, strategy)? {
                Step::Normal => out.add_term(&w, &c),
                Step::Rewrite(parts) => {
                    steps += 1;
                    if steps > self.step_budget {
                        return Err(KernelError::StepBudget(self.step_budget));
                    }
                    for (nw, q) in parts {
                        let e = work.entry(nw).or_insert_with(Rat::zero);
                        *e = e.add(&c.mul(&q));
                    }
                    work.retain(|_, v| !v.is_zero());
                }
            }
        }
        Ok(out)
    }

    /// Rewrites random words with leftmost and rightmost strategies and with
    /// the memoized normal form; all three must agree. Words have 2 to 4
    /// letters whose levels sum to at most `cutoff`.
    pub fn confluence_sample(&self, seed: u64, count: usize) -> Result<Verdict> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = self.ctx.dim() as u8;
        for _ in 0..count {
            let len = rng.gen_range(2..=4usize.min(self.cutoff as usize).max(2));
            let mut budget = self.cutoff.max(len as u32);
            let mut w = Word::new();
            for k in 0..len {
                let left = (len - k - 1) as u32;
                let r = if k + 1 == len { rng.gen_range(1..=budget.min(self.cutoff)) } else { rng.gen_range(1..=(budget - left).min(self.cutoff)) };
                budget -= r;
                w.push(Sym::t(&self.ctx, rng.gen_range(1..=dim), rng.gen_range(1..=dim), r));
            }
            let p = NcPoly::word(&w, Rat::one());
            let a = self.normal_form_with(&p, Strategy::Leftmost)?;
            let b = self.normal_form_with(&p, Strategy::Rightmost)?;
            let c = self.normal_form(&p)?;
            if a != b || a != c {
                return Ok(Verdict::fail(format!("rewriting {p} is strategy dependent: {a} vs {b}")));
            }
        }
        Ok(Verdict::Pass)
    }

    /// `[x, y] = x y - (-1)^{|x||y|} y x` in normal form.
    pub fn super_commutator(&self, x: &NcPoly, y: &NcPoly) -> Result<NcPoly> {
        let s = if x.parity() & y.parity() == 1 { Rat::one() } else { Rat::int(-1) };
        let mut c = x.mul(y);
        c.add_poly_scaled(&y.mul(x), &s);
        self.normal_form(&c)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MorphismKind {
    Hom,
    /// Reverses products with the Koszul sign: `φ(xy) = (-1)^{|x||y|} φ(y) φ(x)`.
    AntiHom,
}

/// Extends generator images to polynomials. Symbols without an image are
/// fixed.
pub fn apply_morphism<F>(p: &NcPoly, image: F, kind: MorphismKind) -> NcPoly
where
    F: Fn(Sym) -> Option<NcPoly>,
{
    let mut cache: FxHashMap<Sym, NcPoly> = FxHashMap::default();
    let mut out = NcPoly::zero();
    for (w, c) in &p.terms {
        let mut acc = NcPoly::constant(c.clone());
        let mut odd = false;
        let syms: Vec<Sym> = match kind {
            MorphismKind::Hom => w.to_vec(),
            MorphismKind::AntiHom => {
                let mut pre = 0u8;
                for s in w.iter() {
                    if s.parity() & pre == 1 {
                        odd = !odd;
                    }
                    pre ^= s.parity();
                }
                w.iter().rev().copied().collect()
            }
        };
        for s in syms {
            let img = cache
                .entry(s)
                .or_insert_with(|| image(s).unwrap_or_else(|| NcPoly::sym(s)))
                .clone();
            acc = acc.mul(&img);
            if acc.is_empty() {
                break;
            }
        }
        if odd {
            acc = acc.neg();
        }
        out.add_assign(&acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn t(ctx: &SuperContext, i: u8, j: u8, r: u32) -> NcPoly {
        NcPoly::sym(Sym::t(ctx, i, j, r))
    }

    #[test]
    fn symbol_packing_round_trips() {
        let ctx = SuperContext::new(1, 2).unwrap();
        let s = Sym::t(&ctx, 1, 3, 4);
        assert_eq!((s.i(), s.j(), s.level(), s.parity()), (1, 3, 4, 1));
        assert_eq!(s.family(), Family::T);
        assert!(Sym::central(9) < Sym::t(&ctx, 1, 1, 1));
        assert!(Sym::t(&ctx, 3, 3, 1) < Sym::t(&ctx, 1, 1, 2));
        assert_eq!(s.to_string(), "t[1,3,4]");
    }

    #[test]
    fn even_gl1_is_commutative() {
        let ctx = SuperContext::new(1, 0).unwrap();
        let rules = derive_rules(&ctx, 3);
        let p = t(&ctx, 1, 1, 2).mul(&t(&ctx, 1, 1, 1));
        assert_eq!(rules.normal_form(&p).unwrap(), t(&ctx, 1, 1, 1).mul(&t(&ctx, 1, 1, 2)));
    }

    #[test]
    fn first_level_relations_by_hand() {
        // (-1)^{|x||y|} t_ij t_kl - t_kl t_ij
        //   = (-1)^{|k|} δ_kj t_il - (-1)^{|j| + (|i|+|j|)(|k|+|j|)} δ_il t_kj
        for (m, n) in [(1, 1), (2, 1), (0, 2)] {
            let ctx = SuperContext::new(m, n).unwrap();
            let rules = derive_rules(&ctx, 2);
            let sg = |odd: bool| if odd { Rat::int(-1) } else { Rat::one() };
            for i in ctx.indices() {
                for j in ctx.indices() {
                    for k in ctx.indices() {
                        for l in ctx.indices() {
                            let (x, y) = (t(&ctx, i, j, 1), t(&ctx, k, l, 1));
                            let mut lhs = x.mul(&y).scale(&sg(x.parity() & y.parity() == 1));
                            lhs.add_poly_scaled(&y.mul(&x), &Rat::int(-1));
                            let (pi, pj, pk) = (ctx.parity(i), ctx.parity(j), ctx.parity(k));
                            let mut rhs = NcPoly::zero();
                            if k == j {
                                rhs.add_poly_scaled(&t(&ctx, i, l, 1), &sg(pk == 1));
                            }
                            if i == l {
                                rhs.add_poly_scaled(&t(&ctx, k, j, 1), &sg(pj ^ ((pi ^ pj) & (pk ^ pj)) == 0));
                            }
                            assert_eq!(rules.normal_form(&lhs).unwrap(), rules.normal_form(&rhs).unwrap(), "({m}|{n}) t{i}{j} t{k}{l}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn odd_square_rule() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let rules = derive_rules(&ctx, 2);
        let x = t(&ctx, 1, 2, 1);
        // [x, x] = 2x^2 = δ t_12 - ... = 0 at level one
        assert_eq!(rules.normal_form(&x.mul(&x)).unwrap(), NcPoly::zero());
        let y = t(&ctx, 1, 2, 2);
        let sq = rules.normal_form(&y.mul(&y)).unwrap();
        assert_eq!(sq.parity(), 0);
        for w in sq.terms.keys() {
            assert!(rules.is_normal_word(w).unwrap());
        }
    }

    #[test]
    fn strategies_agree_on_random_words() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let rules = derive_rules(&ctx, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let len = rng.gen_range(2..=4);
            let mut w = Word::new();
            let mut budget = 4u32;
            for k in 0..len {
                let r = if k + 1 == len { budget.max(1) } else { rng.gen_range(1..=budget.saturating_sub((len - k - 1) as u32).max(1)) };
                budget = budget.saturating_sub(r);
                w.push(Sym::t(&ctx, rng.gen_range(1..=2), rng.gen_range(1..=2), r.min(4)));
            }
            let p = NcPoly::word(&w, Rat::one());
            let a = rules.normal_form_with(&p, Strategy::Leftmost).unwrap();
            let b = rules.normal_form_with(&p, Strategy::Rightmost).unwrap();
            assert_eq!(a, b, "word {w:?}");
            assert_eq!(a, rules.normal_form(&p).unwrap());
        }
    }

    #[test]
    fn confluence_sample_on_mixed_shape() {
        let ctx = SuperContext::new(1, 2).unwrap();
        let rules = derive_rules(&ctx, 3);
        assert_eq!(rules.confluence_sample(11, 30).unwrap(), Verdict::Pass);
    }

    #[test]
    fn tensor_factors_supercommute() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let rules = derive_rules(&ctx, 2);
        let a = NcPoly::sym(Sym::t2(&ctx, 1, 2, 1));
        let b = t(&ctx, 2, 1, 1);
        assert_eq!(rules.normal_form(&a.mul(&b)).unwrap(), b.mul(&a).neg());
    }

    #[test]
    fn anti_morphism_reverses_with_sign() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let x = t(&ctx, 1, 2, 1);
        let y = t(&ctx, 2, 1, 1);
        let p = x.mul(&y);
        let q = apply_morphism(&p, |_| None, MorphismKind::AntiHom);
        assert_eq!(q, y.mul(&x).neg());
    }

    #[test]
    fn display_is_sorted() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let mut p = t(&ctx, 1, 1, 2).scale(&Rat::new(-1, 2));
        p.add_assign(&t(&ctx, 2, 2, 1));
        p.add_assign(&NcPoly::constant(Rat::int(3)));
        assert_eq!(p.to_string(), "3 + t[2,2,1] - 1/2*t[1,1,2]");
    }
}
