//! Truncated formal series in `u^{-1}` (and in two variables) with exact
//! precision tracking, and matrices of series with the graded product.
//!
//! A coefficient is stored under the exponent `k` of `u^{-k}`; negative keys
//! are positive powers of `u`. Every series carries a watermark: all
//! coefficients with key at most `prec` are exact, nothing beyond is known.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{KernelError, Result};
use crate::rat::{binom, Rat};
use crate::ring::Coeff;
use crate::tensor::SuperContext;

/// Watermark of a series known to all orders.
pub const EXACT: i64 = 1 << 40;

fn clamp(p: i64) -> i64 {
    p.min(EXACT)
}

#[derive(Clone, PartialEq)]
pub struct Series<A: Coeff> {
    pub coeffs: BTreeMap<i64, A>,
    pub prec: i64,
}

impl<A: Coeff> fmt::Debug for Series<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prec >= EXACT {
            write!(f, "Series[exact]{{")?;
        } else {
            write!(f, "Series[prec {}]{{", self.prec)?;
        }
        for (k, a) in &self.coeffs {
            write!(f, " u^-{k}: {a:?};")?;
        }
        write!(f, " }}")
    }
}

impl<A: Coeff> Series<A> {
    pub fn exact_zero() -> Self {
        Series { coeffs: BTreeMap::new(), prec: EXACT }
    }

    pub fn constant(a: A) -> Self {
        let mut s = Self::exact_zero();
        if !a.is_zero() {
            s.coeffs.insert(0, a);
        }
        s
    }

    /// `Σ_k coeffs[k] u^{-k}` for `k = 0..`, exact up to `prec`.
    pub fn from_coeffs(coeffs: Vec<A>, prec: i64) -> Self {
        let mut s = Series { coeffs: BTreeMap::new(), prec };
        for (k, a) in coeffs.into_iter().enumerate() {
            if k as i64 <= prec && !a.is_zero() {
                s.coeffs.insert(k as i64, a);
            }
        }
        s
    }

    /// `u^k` as an exact series.
    pub fn u_power(k: i64) -> Self {
        let mut s = Self::exact_zero();
        s.coeffs.insert(-k, A::one());
        s
    }

    pub fn get(&self, k: i64) -> A {
        self.coeffs.get(&k).cloned().unwrap_or_else(A::zero)
    }

    pub fn insert(&mut self, k: i64, a: A) {
        if k <= self.prec && !a.is_zero() {
            self.coeffs.insert(k, a);
        }
    }

    /// Lowest key that can be nonzero.
    pub fn lo(&self) -> i64 {
        let first = self.coeffs.keys().next().copied().unwrap_or(i64::MAX);
        first.min(self.prec.saturating_add(1))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        let prec = prec.min(self.prec);
        Series { coeffs: self.coeffs.range(..=prec).map(|(k, a)| (*k, a.clone())).collect(), prec }
    }

    pub fn map<F: Fn(&A) -> A>(&self, f: F) -> Self {
        let mut out = Series { coeffs: BTreeMap::new(), prec: self.prec };
        for (k, a) in &self.coeffs {
            let b = f(a);
            if !b.is_zero() {
                out.coeffs.insert(*k, b);
            }
        }
        out
    }

    pub fn try_map<F: Fn(&A) -> Result<A>>(&self, f: F) -> Result<Self> {
        let mut out = Series { coeffs: BTreeMap::new(), prec: self.prec };
        for (k, a) in &self.coeffs {
            let b = f(a)?;
            if !b.is_zero() {
                out.coeffs.insert(*k, b);
            }
        }
        Ok(out)
    }

    pub fn scale_rat(&self, q: &Rat) -> Self {
        self.map(|a| a.scale(q))
    }

    /// Multiplies by `u^k`.
    pub fn mul_u_power(&self, k: i64) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|(key, a)| (key - k, a.clone())).collect(),
            prec: if self.prec >= EXACT { EXACT } else { self.prec - k },
        }
    }

    /// `s(εu + c)` with `ε = ±1`, re-expanded in `u^{-1}`. Exact series whose
    /// re-expansion is infinite are cut at `cap`.
    pub fn substitute(&self, eps: i64, c: &Rat, cap: i64) -> Self {
        assert!(eps == 1 || eps == -1);
        let infinite = !c.is_zero() && self.coeffs.keys().any(|&k| k > 0);
        let prec = if infinite { self.prec.min(cap) } else { self.prec };
        let ce = c.mul(&Rat::int(eps));
        let mut out: BTreeMap<i64, A> = BTreeMap::new();
        let mut push = |key: i64, a: A| {
            if key > prec || a.is_zero() {
                return;
            }
            match out.get_mut(&key) {
                Some(x) => x.add_assign(&a),
                None => {
                    out.insert(key, a);
                }
            }
        };
        for (&k, a) in &self.coeffs {
            if k >= 1 {
                // (εu + c)^{-k} = ε^k u^{-k} Σ_j binom(-k, j) (cε)^j u^{-j}
                let lead = if k % 2 == 1 && eps == -1 { Rat::int(-1) } else { Rat::one() };
                let mut j = 0i64;
                while k + j <= prec {
                    let q = lead.mul(&binom(&Rat::int(-k), j as u32)).mul(&ce.pow(j as u32));
                    push(k + j, a.scale(&q));
                    if c.is_zero() {
                        break;
                    }
                    j += 1;
                }
            } else {
                // (εu + c)^m = Σ_j binom(m, j) (εu)^{m-j} c^j
                let m = -k;
                for j in 0..=m {
                    let e = if (m - j) % 2 == 1 && eps == -1 { Rat::int(-1) } else { Rat::one() };
                    let q = binom(&Rat::int(m), j as u32).mul(&c.pow(j as u32)).mul(&e);
                    push(j - m, a.scale(&q));
                }
            }
        }
        out.retain(|_, a| !a.is_zero());
        Series { coeffs: out, prec }
    }

    pub fn shift(&self, c: &Rat, cap: i64) -> Self {
        self.substitute(1, c, cap)
    }

    /// Inverse of a series whose leading coefficient is an invertible scalar.
    /// The result is exact up to `min(prec - 2 lo, cap)`.
    pub fn invert(&self, cap: i64) -> Result<Self> {
        self.invert_with(cap, |a| Ok(a.clone()))
    }

    /// Like [`Series::invert`], passing every new coefficient through
    /// `reduce` (typically a normal form) as soon as it is computed.
    pub fn invert_with<F: Fn(&A) -> Result<A>>(&self, cap: i64, reduce: F) -> Result<Self> {
        let k0 = self.lo();
        let lead = self
            .coeffs
            .get(&k0)
            .ok_or_else(|| KernelError::NotInvertible("series vanishes within its precision".into()))?;
        let inv_lead = lead
            .as_scalar()
            .and_then(|q| q.recip())
            .ok_or_else(|| KernelError::NotInvertible("leading coefficient is not a nonzero scalar".into()))?;
        // s = lead u^{-k0} (1 + y), then z_k = -Σ_{j≥1} y_j z_{k-j}
        let normalized = self.mul_u_power(k0).scale_rat(&inv_lead);
        let target = normalized.prec.min(cap.saturating_add(k0));
        if target >= EXACT {
            return Err(KernelError::Precision("inverting an exact series needs a finite cap".into()));
        }
        let mut z: Vec<A> = vec![A::one()];
        for k in 1..=target.max(0) {
            let mut acc = A::zero();
            for j in 1..=k {
                let y = normalized.get(j);
                if y.is_zero() || z[(k - j) as usize].is_zero() {
                    continue;
                }
                acc.add_assign(&y.mul(&z[(k - j) as usize]));
            }
            z.push(reduce(&acc.neg())?);
        }
        Ok(Series::from_coeffs(z, target).scale_rat(&inv_lead).mul_u_power(k0))
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        let mut out = self.truncate(prec);
        for (k, a) in o.coeffs.range(..=prec) {
            match out.coeffs.get_mut(k) {
                Some(x) => {
                    x.add_assign(a);
                    if x.is_zero() {
                        out.coeffs.remove(k);
                    }
                }
                None => {
                    out.coeffs.insert(*k, a.clone());
                }
            }
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale_rat(&Rat::int(-1)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = clamp((self.prec.saturating_add(o.lo())).min(o.prec.saturating_add(self.lo())));
        let mut out: BTreeMap<i64, A> = BTreeMap::new();
        for (k1, a) in &self.coeffs {
            for (k2, b) in &o.coeffs {
                let k = k1 + k2;
                if k > prec {
                    break;
                }
                let p = a.mul(b);
                if p.is_zero() {
                    continue;
                }
                match out.get_mut(&k) {
                    Some(x) => x.add_assign(&p),
                    None => {
                        out.insert(k, p);
                    }
                }
            }
        }
        out.retain(|_, a| !a.is_zero());
        Series { coeffs: out, prec }
    }

    /// Multiplies each coefficient on the left by a constant element.
    pub fn left_mul_coeff(&self, c: &A) -> Self {
        self.map(|a| c.mul(a))
    }
}

impl<A: Coeff> Coeff for Series<A> {
    fn zero() -> Self {
        Series::exact_zero()
    }
    fn one() -> Self {
        Series::constant(A::one())
    }
    fn from_rat(q: Rat) -> Self {
        Series::constant(A::from_rat(q))
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec >= EXACT
    }
    fn add_assign(&mut self, o: &Self) {
        *self = Series::add(self, o);
    }
    fn mul(&self, o: &Self) -> Self {
        Series::mul(self, o)
    }
    fn scale(&self, q: &Rat) -> Self {
        self.scale_rat(q)
    }
    fn parity(&self) -> u8 {
        self.coeffs.values().next().map(|a| a.parity()).unwrap_or(0)
    }
    fn as_scalar(&self) -> Option<Rat> {
        if self.prec < EXACT {
            return None;
        }
        match self.coeffs.len() {
            0 => Some(Rat::zero()),
            1 => self.coeffs.get(&0).and_then(|a| a.as_scalar()),
            _ => None,
        }
    }
}

/// Expansion of `p(u)/q(u)` in `u^{-1}` exact up to `prec`. Polynomials are
/// given by ascending coefficient lists.
pub fn expand_rational<A: Coeff>(num: &[Rat], den: &[Rat], prec: i64) -> Result<Series<A>> {
    let poly = |c: &[Rat]| {
        let mut s = Series::<A>::exact_zero();
        for (k, q) in c.iter().enumerate() {
            s.insert(-(k as i64), A::from_rat(q.clone()));
        }
        s
    };
    let d = poly(den);
    if d.coeffs.is_empty() {
        return Err(KernelError::InvalidArgument("zero denominator".into()));
    }
    let n = poly(num);
    let num_deg = num.iter().rposition(|q| !q.is_zero()).unwrap_or(0) as i64;
    let inv = d.invert(prec + num_deg)?;
    Ok(n.mul(&inv).truncate(prec))
}

/// `1/(a u + b)` expanded to `prec`.
pub fn linear_reciprocal<A: Coeff>(a: &Rat, b: &Rat, prec: i64) -> Result<Series<A>> {
    expand_rational(&[Rat::one()], &[b.clone(), a.clone()], prec)
}

/// Two-variable series in `u^{-1}`, `v^{-1}` with finitely many positive
/// powers. Every possibly nonzero cell `(a, b)` (coefficient of
/// `u^{-a} v^{-b}`) satisfies `a >= lo_a`, `b >= lo_b`, `a + b >= lo_t`; the
/// cells with `a <= prec_a`, `b <= prec_b` and `a + b <= prec_t` are exact.
#[derive(Clone, PartialEq)]
pub struct BiSeries<A: Coeff> {
    pub cells: BTreeMap<(i64, i64), A>,
    pub lo: [i64; 3],
    pub prec: [i64; 3],
}

impl<A: Coeff> fmt::Debug for BiSeries<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiSeries[lo {:?} prec {:?}]{{", self.lo, self.prec)?;
        for (k, a) in &self.cells {
            write!(f, " {k:?}: {a:?};")?;
        }
        write!(f, " }}")
    }
}

fn functionals(a: i64, b: i64) -> [i64; 3] {
    [a, b, a + b]
}

impl<A: Coeff> BiSeries<A> {
    pub fn exact_zero() -> Self {
        BiSeries { cells: BTreeMap::new(), lo: [EXACT + 1; 3], prec: [EXACT; 3] }
    }

    /// Exact finite sum of monomials.
    pub fn polynomial(cells: &[((i64, i64), A)]) -> Self {
        let mut s = Self::exact_zero();
        for ((a, b), c) in cells {
            if c.is_zero() {
                continue;
            }
            let f = functionals(*a, *b);
            for k in 0..3 {
                s.lo[k] = s.lo[k].min(f[k]);
            }
            match s.cells.get_mut(&(*a, *b)) {
                Some(x) => x.add_assign(c),
                None => {
                    s.cells.insert((*a, *b), c.clone());
                }
            }
        }
        s.cells.retain(|_, c| !c.is_zero());
        s
    }

    /// Embeds a series in `u` (`second = false`) or in `v`.
    pub fn from_series(s: &Series<A>, second: bool) -> Self {
        let lo = s.lo();
        let mut out = BiSeries {
            cells: BTreeMap::new(),
            lo: if second { [0, lo, lo] } else { [lo, 0, lo] },
            prec: if second { [EXACT, s.prec, EXACT] } else { [s.prec, EXACT, EXACT] },
        };
        for (k, a) in &s.coeffs {
            let key = if second { (0, *k) } else { (*k, 0) };
            out.cells.insert(key, a.clone());
        }
        out
    }

    pub fn in_window(&self, a: i64, b: i64) -> bool {
        let f = functionals(a, b);
        (0..3).all(|k| f[k] <= self.prec[k])
    }

    pub fn get(&self, a: i64, b: i64) -> A {
        self.cells.get(&(a, b)).cloned().unwrap_or_else(A::zero)
    }

    /// All exactly known cells that may be nonzero.
    pub fn window_cells(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        if self.lo[0] > self.prec[0] || self.lo[1] > self.prec[1] {
            return out;
        }
        let amax = self.prec[0].min(self.prec[2].saturating_sub(self.lo[1]));
        let bmax = self.prec[1].min(self.prec[2].saturating_sub(self.lo[0]));
        if amax >= EXACT / 2 || bmax >= EXACT / 2 {
            return self.cells.keys().copied().collect();
        }
        for a in self.lo[0]..=amax {
            for b in self.lo[1]..=bmax {
                if a + b >= self.lo[2] && self.in_window(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Narrows the window.
    pub fn truncate(&self, prec: [i64; 3]) -> Self {
        let prec = [0, 1, 2].map(|k| prec[k].min(self.prec[k]));
        let mut out = BiSeries { cells: BTreeMap::new(), lo: self.lo, prec };
        for ((a, b), c) in &self.cells {
            if out.in_window(*a, *b) {
                out.cells.insert((*a, *b), c.clone());
            }
        }
        out
    }

    pub fn map<F: Fn(&A) -> A>(&self, f: F) -> Self {
        let mut out = BiSeries { cells: BTreeMap::new(), lo: self.lo, prec: self.prec };
        for (k, a) in &self.cells {
            let b = f(a);
            if !b.is_zero() {
                out.cells.insert(*k, b);
            }
        }
        out
    }

    pub fn try_map<F: Fn(&A) -> Result<A>>(&self, f: F) -> Result<Self> {
        let mut out = BiSeries { cells: BTreeMap::new(), lo: self.lo, prec: self.prec };
        for (k, a) in &self.cells {
            let b = f(a)?;
            if !b.is_zero() {
                out.cells.insert(*k, b);
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = [0, 1, 2].map(|k| self.prec[k].min(o.prec[k]));
        let lo = [0, 1, 2].map(|k| self.lo[k].min(o.lo[k]));
        let mut out: Self = BiSeries { cells: BTreeMap::new(), lo, prec };
        for src in [self, o] {
            for ((a, b), c) in &src.cells {
                if !out.in_window(*a, *b) {
                    continue;
                }
                match out.cells.get_mut(&(*a, *b)) {
                    Some(x) => x.add_assign(c),
                    None => {
                        out.cells.insert((*a, *b), c.clone());
                    }
                }
            }
        }
        out.cells.retain(|_, c| !c.is_zero());
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let lo = [0, 1, 2].map(|k| self.lo[k].saturating_add(o.lo[k]).min(EXACT + 1));
        let prec = [0, 1, 2].map(|k| clamp(self.prec[k].saturating_add(o.lo[k]).min(o.prec[k].saturating_add(self.lo[k]))));
        let mut out: Self = BiSeries { cells: BTreeMap::new(), lo, prec };
        for ((a1, b1), x) in &self.cells {
            for ((a2, b2), y) in &o.cells {
                let (a, b) = (a1 + a2, b1 + b2);
                if !out.in_window(a, b) {
                    continue;
                }
                let p = x.mul(y);
                if p.is_zero() {
                    continue;
                }
                match out.cells.get_mut(&(a, b)) {
                    Some(z) => z.add_assign(&p),
                    None => {
                        out.cells.insert((a, b), p);
                    }
                }
            }
        }
        out.cells.retain(|_, c| !c.is_zero());
        out
    }
}

impl<A: Coeff> Coeff for BiSeries<A> {
    fn zero() -> Self {
        BiSeries::exact_zero()
    }
    fn one() -> Self {
        BiSeries::polynomial(&[((0, 0), A::one())])
    }
    fn from_rat(q: Rat) -> Self {
        BiSeries::polynomial(&[((0, 0), A::from_rat(q))])
    }
    fn is_zero(&self) -> bool {
        self.cells.is_empty() && self.prec.iter().all(|&p| p >= EXACT)
    }
    fn add_assign(&mut self, o: &Self) {
        *self = BiSeries::add(self, o);
    }
    fn mul(&self, o: &Self) -> Self {
        BiSeries::mul(self, o)
    }
    fn scale(&self, q: &Rat) -> Self {
        if q.is_zero() {
            let mut z = self.clone();
            z.cells.clear();
            return z;
        }
        self.map(|a| a.scale(q))
    }
    fn parity(&self) -> u8 {
        self.cells.values().next().map(|a| a.parity()).unwrap_or(0)
    }
    fn as_scalar(&self) -> Option<Rat> {
        if self.prec.iter().any(|&p| p < EXACT) {
            return None;
        }
        match self.cells.len() {
            0 => Some(Rat::zero()),
            1 => self.cells.get(&(0, 0)).and_then(|a| a.as_scalar()),
            _ => None,
        }
    }
}

/// Square or rectangular matrix of series with row and column parities.
#[derive(Clone, PartialEq)]
pub struct SeriesMatrix<A: Coeff> {
    pub row_par: Vec<u8>,
    pub col_par: Vec<u8>,
    pub entries: Vec<Series<A>>,
}

impl<A: Coeff> fmt::Debug for SeriesMatrix<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SeriesMatrix {}x{}", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                writeln!(f, "  ({},{}) {:?}", i + 1, j + 1, self.at(i, j))?;
            }
        }
        Ok(())
    }
}

fn sign_rat(odd: bool) -> Rat {
    if odd {
        Rat::int(-1)
    } else {
        Rat::one()
    }
}

impl<A: Coeff> SeriesMatrix<A> {
    pub fn new(row_par: Vec<u8>, col_par: Vec<u8>) -> Self {
        let n = row_par.len() * col_par.len();
        SeriesMatrix { row_par, col_par, entries: vec![Series::exact_zero(); n] }
    }

    pub fn square(ctx: &SuperContext) -> Self {
        let p: Vec<u8> = ctx.indices().map(|i| ctx.parity(i)).collect();
        Self::new(p.clone(), p)
    }

    pub fn identity(ctx: &SuperContext) -> Self {
        let mut m = Self::square(ctx);
        for i in 0..m.rows() {
            m.set(i, i, Series::constant(A::one()));
        }
        m
    }

    pub fn from_fn<F: Fn(usize, usize) -> Series<A>>(row_par: Vec<u8>, col_par: Vec<u8>, f: F) -> Self {
        let mut m = Self::new(row_par, col_par);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.row_par.len()
    }

    pub fn cols(&self) -> usize {
        self.col_par.len()
    }

    /// 0-based access.
    pub fn at(&self, i: usize, j: usize) -> &Series<A> {
        &self.entries[i * self.cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series<A>) {
        let c = self.cols();
        self.entries[i * c + j] = s;
    }

    /// 1-based access by super indices.
    pub fn entry(&self, i: u8, j: u8) -> &Series<A> {
        self.at(i as usize - 1, j as usize - 1)
    }

    pub fn prec(&self) -> i64 {
        self.entries.iter().map(|s| s.prec).min().unwrap_or(EXACT)
    }

    pub fn map<F: Fn(&Series<A>) -> Series<A>>(&self, f: F) -> Self {
        SeriesMatrix {
            row_par: self.row_par.clone(),
            col_par: self.col_par.clone(),
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map<F: Fn(&Series<A>) -> Result<Series<A>>>(&self, f: F) -> Result<Self> {
        Ok(SeriesMatrix {
            row_par: self.row_par.clone(),
            col_par: self.col_par.clone(),
            entries: self.entries.iter().map(f).collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows(), self.cols()), (o.rows(), o.cols()));
        let mut out = self.clone();
        for (k, e) in out.entries.iter_mut().enumerate() {
            *e = e.add(&o.entries[k]);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Rat::int(-1)))
    }

    pub fn scale(&self, q: &Rat) -> Self {
        self.map(|s| s.scale_rat(q))
    }

    /// Multiplies every entry by a scalar series (even, central).
    pub fn scale_series(&self, c: &Series<A>) -> Self {
        self.map(|s| c.mul(s))
    }

    /// Graded product `(XY)_{il} = Σ_j (-1)^{(|i|+|j|)(|j|+|l|)} x_{ij} y_{jl}`.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.col_par, o.row_par, "inner parities differ");
        let mut out = Self::new(self.row_par.clone(), o.col_par.clone());
        for i in 0..self.rows() {
            for l in 0..o.cols() {
                let mut acc = Series::exact_zero();
                let mut first = true;
                for j in 0..self.cols() {
                    let x = self.at(i, j);
                    let y = o.at(j, l);
                    let odd = (self.row_par[i] ^ self.col_par[j]) & (o.row_par[j] ^ o.col_par[l]) == 1;
                    let p = x.mul(y);
                    let p = if odd { p.scale_rat(&Rat::int(-1)) } else { p };
                    acc = if first { p } else { acc.add(&p) };
                    first = false;
                }
                out.set(i, l, acc);
            }
        }
        out
    }

    pub fn substitute(&self, eps: i64, c: &Rat, cap: i64) -> Self {
        self.map(|s| s.substitute(eps, c, cap))
    }

    pub fn shift(&self, c: &Rat, cap: i64) -> Self {
        self.substitute(1, c, cap)
    }

    pub fn truncate(&self, prec: i64) -> Self {
        self.map(|s| s.truncate(prec))
    }

    /// Graded transpose `X^t_{ij} = (-1)^{|i||j|+|j|} X_{ji}`.
    pub fn transpose_t(&self) -> Self {
        assert_eq!(self.row_par, self.col_par, "transpose needs a square graded matrix");
        let mut out = Self::new(self.col_par.clone(), self.row_par.clone());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let (pi, pj) = (self.row_par[i], self.col_par[j]);
                out.set(i, j, self.at(j, i).scale_rat(&sign_rat((pi & pj) ^ pj == 1)));
            }
        }
        out
    }

    /// `X^ι_{ij} = (-1)^{|i||j|+|i|} θ_i θ_j X_{j'i'}`.
    pub fn transpose_iota(&self, ctx: &SuperContext) -> Self {
        let mut out = Self::square(ctx);
        for i in ctx.indices() {
            for j in ctx.indices() {
                let (pi, pj) = (ctx.parity(i), ctx.parity(j));
                let s = sign_rat((pi & pj) ^ pi == 1).mul(&Rat::int(ctx.theta(i) * ctx.theta(j)));
                out.set(i as usize - 1, j as usize - 1, self.entry(ctx.bar(j), ctx.bar(i)).scale_rat(&s));
            }
        }
        out
    }

    /// Matrix of constant terms, if all are scalars.
    fn constant_part(&self) -> Option<Vec<Vec<Rat>>> {
        let mut c = vec![vec![Rat::zero(); self.cols()]; self.rows()];
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let s = self.at(i, j);
                if s.lo() < 0 {
                    return None;
                }
                c[i][j] = s.get(0).as_scalar()?;
            }
        }
        Some(c)
    }

    /// Inverse for the graded product; the constant term must be an
    /// invertible even scalar matrix and no positive powers may occur.
    pub fn invert(&self, cap: i64) -> Result<Self> {
        self.invert_with(cap, |a| Ok(a.clone()))
    }

    /// Like [`SeriesMatrix::invert`], reducing each new coefficient entry.
    pub fn invert_with<F: Fn(&A) -> Result<A>>(&self, cap: i64, reduce: F) -> Result<Self> {
        if self.rows() != self.cols() || self.row_par != self.col_par {
            return Err(KernelError::NotInvertible("matrix is not square".into()));
        }
        let c = self
            .constant_part()
            .ok_or_else(|| KernelError::NotInvertible("constant term is not a scalar matrix".into()))?;
        let cinv = invert_rational_matrix(&c)
            .ok_or_else(|| KernelError::NotInvertible("constant term is singular".into()))?;
        let n = self.rows();
        let target = self.prec().min(cap);
        if target >= EXACT {
            return Err(KernelError::Precision("inverting an exact matrix needs a finite cap".into()));
        }
        let par = &self.row_par;
        // graded product of coefficient matrices
        let gmul = |a: &[Vec<A>], b: &[Vec<A>]| -> Vec<Vec<A>> {
            let mut out = vec![vec![A::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    for l in 0..n {
                        if b[j][l].is_zero() {
                            continue;
                        }
                        let p = a[i][j].mul(&b[j][l]);
                        if (par[i] ^ par[j]) & (par[j] ^ par[l]) == 1 {
                            out[i][l].add_assign(&p.neg());
                        } else {
                            out[i][l].add_assign(&p);
                        }
                    }
                }
            }
            out
        };
        let coef = |k: i64| -> Vec<Vec<A>> { (0..n).map(|i| (0..n).map(|j| self.at(i, j).get(k)).collect()).collect() };
        let cinv_a: Vec<Vec<A>> = cinv.iter().map(|r| r.iter().map(|q| A::from_rat(q.clone())).collect()).collect();
        // X = Σ X_k u^{-k}, Z_0 = C^{-1}, Z_k = -C^{-1} Σ_{j≥1} X_j Z_{k-j}
        let xs: Vec<Vec<Vec<A>>> = (0..=target.max(0)).map(coef).collect();
        let mut zs: Vec<Vec<Vec<A>>> = vec![cinv_a.clone()];
        for k in 1..=target.max(0) as usize {
            let mut acc = vec![vec![A::zero(); n]; n];
            for j in 1..=k {
                let p = gmul(&xs[j], &zs[k - j]);
                for (ra, rp) in acc.iter_mut().zip(p) {
                    for (a, b) in ra.iter_mut().zip(rp) {
                        a.add_assign(&b);
                    }
                }
            }
            let zk = gmul(&cinv_a, &acc);
            let zk = zk
                .into_iter()
                .map(|r| r.into_iter().map(|a| reduce(&a.neg())).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            zs.push(zk);
        }
        Ok(SeriesMatrix::from_fn(self.row_par.clone(), self.col_par.clone(), |i, j| {
            Series::from_coeffs(zs.iter().map(|z| z[i][j].clone()).collect(), target)
        }))
    }

    /// Submatrix on the given 0-based rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let rp = rows.iter().map(|&i| self.row_par[i]).collect();
        let cp = cols.iter().map(|&j| self.col_par[j]).collect();
        SeriesMatrix::from_fn(rp, cp, |i, j| self.at(rows[i], cols[j]).clone())
    }

    /// Quasideterminant `|X|_{ij} = x_ij - r_i^j (X^{ij})^{-1} c_j^i` (0-based).
    pub fn quasi_determinant(&self, i: usize, j: usize, cap: i64) -> Result<Series<A>> {
        let rows: Vec<usize> = (0..self.rows()).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols()).filter(|&c| c != j).collect();
        if rows.is_empty() {
            return Ok(self.at(i, j).clone());
        }
        let inner = self.submatrix(&rows, &cols).invert(cap)?;
        let r = self.submatrix(&[i], &cols);
        let c = self.submatrix(&rows, &[j]);
        let prod = r.mul(&inner).mul(&c);
        Ok(self.at(i, j).sub(prod.at(0, 0)))
    }

    /// Schur complement `D - C A^{-1} B` of the leading `k×k` block.
    pub fn schur_complement(&self, k: usize, cap: i64) -> Result<Self> {
        let n = self.rows();
        let head: Vec<usize> = (0..k).collect();
        let tail: Vec<usize> = (k..n).collect();
        let d = self.submatrix(&tail, &tail);
        if k == 0 {
            return Ok(d);
        }
        let a_inv = self.submatrix(&head, &head).invert(cap)?;
        let b = self.submatrix(&head, &tail);
        let c = self.submatrix(&tail, &head);
        Ok(d.sub(&c.mul(&a_inv).mul(&b)))
    }

    /// Gauss decomposition `X = F D E` with `F` lower unitriangular, `D`
    /// diagonal and `E` upper unitriangular.
    pub fn gauss_decompose(&self, cap: i64) -> Result<GaussFactors<A>> {
        let n = self.rows();
        let mut d = Vec::with_capacity(n);
        let mut e = SeriesMatrix::from_fn(self.row_par.clone(), self.col_par.clone(), |i, j| {
            if i == j {
                Series::constant(A::one())
            } else {
                Series::exact_zero()
            }
        });
        let mut f = e.clone();
        for i in 0..n {
            let lead: Vec<usize> = (0..i).collect();
            let block = |r: usize, c: usize| {
                let mut rows = lead.clone();
                rows.push(r);
                let mut cols = lead.clone();
                cols.push(c);
                self.submatrix(&rows, &cols)
            };
            let di = block(i, i).quasi_determinant(i, i, cap)?;
            let di_inv = di.invert(cap)?;
            for j in i + 1..n {
                let upper = block(i, j).quasi_determinant(i, i, cap)?;
                let lower = block(j, i).quasi_determinant(i, i, cap)?;
                e.set(i, j, di_inv.mul(&upper));
                f.set(j, i, lower.mul(&di_inv));
            }
            d.push(di);
        }
        Ok(GaussFactors { f, d, e })
    }
}

pub struct GaussFactors<A: Coeff> {
    pub f: SeriesMatrix<A>,
    pub d: Vec<Series<A>>,
    pub e: SeriesMatrix<A>,
}

impl<A: Coeff> GaussFactors<A> {
    pub fn recompose(&self) -> SeriesMatrix<A> {
        let mut dm = SeriesMatrix::new(self.f.row_par.clone(), self.f.col_par.clone());
        for (i, s) in self.d.iter().enumerate() {
            dm.set(i, i, s.clone());
        }
        self.f.mul(&dm).mul(&self.e)
    }
}

/// Gauss–Jordan inverse over the rationals.
pub fn invert_rational_matrix(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].recip()?;
        for k in 0..n {
            a[col][k] = a[col][k].mul(&p);
            inv[col][k] = inv[col][k].mul(&p);
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..n {
                    a[r][k] = a[r][k].sub(&f.mul(&a[col][k]));
                    inv[r][k] = inv[r][k].sub(&f.mul(&inv[col][k]));
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::{NcPoly, Sym};
    use crate::tensor::SuperTensor;
    use proptest::prelude::*;

    fn q(n: i64) -> Rat {
        Rat::int(n)
    }

    #[test]
    fn geometric_expansion() {
        // 1/(u - 1) = Σ_{k>=1} u^{-k}
        let s: Series<Rat> = expand_rational(&[q(1)], &[q(-1), q(1)], 5).unwrap();
        for k in 1..=5 {
            assert_eq!(s.get(k), q(1));
        }
        assert_eq!(s.get(0), q(0));
        assert_eq!(s.prec, 5);
        // u/(u+2) = 1 - 2u^{-1} + 4u^{-2} - ...
        let s: Series<Rat> = expand_rational(&[q(0), q(1)], &[q(2), q(1)], 4).unwrap();
        assert_eq!((s.get(0), s.get(1), s.get(2), s.get(4)), (q(1), q(-2), q(4), q(16)));
        assert_eq!(s.prec, 4);
    }

    #[test]
    fn shift_composes() {
        let s = Series::from_coeffs(vec![q(1), q(2), q(-1), q(3)], 3);
        let a = s.shift(&Rat::new(1, 2), 10).shift(&Rat::new(-3, 2), 10);
        let b = s.shift(&q(-1), 10);
        assert_eq!(a, b);
        let neg = s.substitute(-1, &q(0), 10);
        assert_eq!((neg.get(1), neg.get(2), neg.get(3)), (q(-2), q(-1), q(-3)));
    }

    #[test]
    fn inverse_times_series_is_one() {
        let s = Series::from_coeffs(vec![q(2), q(1), q(0), q(5)], 3);
        let inv = s.invert(EXACT).unwrap();
        assert_eq!(inv.prec, 3);
        let p = s.mul(&inv);
        assert_eq!(p.prec, 3);
        assert_eq!(p.coeffs.len(), 1);
        assert_eq!(p.get(0), q(1));
    }

    #[test]
    fn watermarks_propagate() {
        let a = Series::from_coeffs(vec![q(1), q(1)], 1);
        let b = Series::from_coeffs(vec![q(0), q(0), q(1), q(1)], 3);
        assert_eq!(a.mul(&b).prec, 3);
        let u = Series::<Rat>::u_power(1);
        assert_eq!(u.mul(&a).prec, 0);
    }

    #[test]
    fn bivariate_window() {
        let su = BiSeries::from_series(&Series::from_coeffs(vec![q(1), q(1), q(1)], 2), false);
        let sv = BiSeries::from_series(&Series::from_coeffs(vec![q(1), q(2)], 1), true);
        let p = su.mul(&sv);
        assert_eq!(p.prec, [2, 1, EXACT]);
        let u_minus_v = BiSeries::polynomial(&[((-1, 0), q(1)), ((0, -1), q(-1))]);
        let c = u_minus_v.mul(&p);
        assert_eq!(c.prec[0], 1);
        assert_eq!(c.prec[1], 0);
        // (u - v) * (1 + u^-1 + ...) * (1 + 2 v^-1): coefficient of u^0 v^0 is 1 - 2
        assert_eq!(c.get(0, 0), q(-1));
        let cells = c.window_cells();
        assert!(cells.contains(&(-1, 0)) && cells.contains(&(1, 0)) && !cells.contains(&(2, 0)));
    }

    fn generic_matrix(ctx: &SuperContext, prec: i64) -> SeriesMatrix<NcPoly> {
        SeriesMatrix::from_fn(
            ctx.indices().map(|i| ctx.parity(i)).collect(),
            ctx.indices().map(|i| ctx.parity(i)).collect(),
            |i, j| {
                let mut c = vec![NcPoly::constant(if i == j { q(1) } else { q(0) })];
                for r in 1..=prec {
                    c.push(NcPoly::sym(Sym::free(ctx, i as u8 + 1, j as u8 + 1, r as u32)));
                }
                Series::from_coeffs(c, prec)
            },
        )
    }

    #[test]
    fn matrix_inverse_both_sides() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let x = generic_matrix(&ctx, 3);
        let xi = x.invert(EXACT).unwrap();
        let one = SeriesMatrix::identity(&ctx).truncate(3);
        assert_eq!(x.mul(&xi), one);
        assert_eq!(xi.mul(&x), one);
    }

    #[test]
    fn graded_product_matches_tensor_product() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let x = generic_matrix(&ctx, 2);
        let y = x.substitute(-1, &q(1), 4);
        let as_rows = |m: &SeriesMatrix<NcPoly>| -> Vec<Vec<Series<NcPoly>>> {
            (0..2).map(|i| (0..2).map(|j| m.at(i, j).clone()).collect()).collect()
        };
        let tx = SuperTensor::from_slot_matrix(&ctx, 1, 0, &as_rows(&x));
        let ty = SuperTensor::from_slot_matrix(&ctx, 1, 0, &as_rows(&y));
        let txy = tx.mul(&ty);
        let xy = x.mul(&y);
        for i in ctx.indices() {
            for j in ctx.indices() {
                assert_eq!(txy.get(&[i], &[j]), *xy.entry(i, j));
            }
        }
    }

    #[test]
    fn transposes() {
        let ctx = SuperContext::new(1, 2).unwrap();
        let x = generic_matrix(&ctx, 1);
        // (X^t)^t = J X J
        let tt = x.transpose_t().transpose_t();
        for i in ctx.indices() {
            for j in ctx.indices() {
                let s = if (ctx.parity(i) ^ ctx.parity(j)) == 1 { q(-1) } else { q(1) };
                assert_eq!(*tt.entry(i, j), x.entry(i, j).scale_rat(&s));
            }
        }
        assert_eq!(x.transpose_iota(&ctx).transpose_iota(&ctx), x);
        // ι = G t G^{-1} with G = Σ (-1)^{|i|} θ_i E_{ii'}
        let g = SeriesMatrix::<NcPoly>::from_fn(x.row_par.clone(), x.col_par.clone(), |i, j| {
            let (a, b) = (i as u8 + 1, j as u8 + 1);
            if b == ctx.bar(a) {
                let v = if ctx.parity(a) == 1 { -ctx.theta(a) } else { ctx.theta(a) };
                Series::constant(NcPoly::constant(q(v)))
            } else {
                Series::exact_zero()
            }
        });
        let gi = g.invert(5).unwrap();
        assert_eq!(g.mul(&x.transpose_t()).mul(&gi), x.transpose_iota(&ctx));
    }

    #[test]
    fn quasi_determinant_of_two_by_two() {
        // |X|_{22} = x22 - x21 x11^{-1} x12 in the even case
        let ctx = SuperContext::new(2, 0).unwrap();
        let x = generic_matrix(&ctx, 2);
        let qd = x.quasi_determinant(1, 1, 2).unwrap();
        let expect = x.at(1, 1).sub(&x.at(1, 0).mul(&x.at(0, 0).invert(2).unwrap()).mul(x.at(0, 1)));
        assert_eq!(qd, expect);
    }

    #[test]
    fn gauss_factors_recompose() {
        for (m, n) in [(1, 1), (2, 1), (1, 2)] {
            let ctx = SuperContext::new(m, n).unwrap();
            let x = generic_matrix(&ctx, 2);
            let g = x.gauss_decompose(2).unwrap();
            assert_eq!(g.recompose(), x, "({m}|{n})");
        }
    }

    proptest! {
        #[test]
        fn expansion_times_denominator_is_numerator(a in -5i64..5, b in 1i64..4, c in -5i64..5) {
            let num = [q(a), q(1)];
            let den = [q(c), q(b)];
            let s: Series<Rat> = expand_rational(&num, &den, 6).unwrap();
            let d = Series::from_coeffs(vec![], EXACT).add(&{
                let mut p = Series::<Rat>::exact_zero();
                p.insert(0, q(c));
                p.insert(-1, q(b));
                p
            });
            let back = s.mul(&d);
            prop_assert_eq!(back.get(-1), q(1));
            prop_assert_eq!(back.get(0), q(a));
            for k in 1..=back.prec {
                prop_assert_eq!(back.get(k), q(0));
            }
        }
    }
}
