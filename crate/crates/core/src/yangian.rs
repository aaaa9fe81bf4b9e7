//! The super Yangian `Y(gl_{M|N})` in its RTT presentation with generic
//! generators: (anti-)automorphisms, the center, the quantum Berezinian in
//! explicit, fused and supertrace forms, and the coproduct.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::check::Verdict;
use crate::error::{KernelError, Result};
use crate::ncalg::{apply_morphism, derive_rules, Family, MorphismKind, NcPoly, RewriteRules, Sym};
use crate::perm;
use crate::rat::Rat;
use crate::ring::Coeff;
use crate::series::{BiSeries, Series, SeriesMatrix};
use crate::tensor::{
    berezinian_symmetrizer, block_pattern_projector, super_permutation, SuperContext, SuperTensor, SuperVector,
};

pub const MAX_DIM: usize = 5;
pub const MAX_DEPTH: i64 = 6;

pub type PolySeries = Series<NcPoly>;
pub type PolyMatrix = SeriesMatrix<NcPoly>;

/// `δ_ij + Σ_{r ≤ depth} x_ij^{(r)} u^{-r}` with symbols from `family`.
pub fn generic_matrix(ctx: &SuperContext, depth: i64, family: Family) -> PolyMatrix {
    let par: Vec<u8> = ctx.indices().map(|i| ctx.parity(i)).collect();
    SeriesMatrix::from_fn(par.clone(), par, |i, j| {
        let (a, b) = (i as u8 + 1, j as u8 + 1);
        let mut c = vec![if i == j { NcPoly::one() } else { NcPoly::zero() }];
        for r in 1..=depth {
            c.push(NcPoly::sym(Sym::new(family, a, b, r as u32, ctx.parity(a) ^ ctx.parity(b))));
        }
        Series::from_coeffs(c, depth)
    })
}

/// Counit: every generator of positive level goes to zero.
pub fn counit(p: &NcPoly) -> Rat {
    p.constant_term()
}

pub fn counit_series(s: &PolySeries) -> Series<Rat> {
    let mut out = Series { coeffs: Default::default(), prec: s.prec };
    for (k, a) in &s.coeffs {
        out.insert(*k, counit(a));
    }
    out
}

/// Scalar series lifted to polynomial coefficients.
pub fn lift_series(s: &Series<Rat>) -> PolySeries {
    let mut out = Series { coeffs: Default::default(), prec: s.prec };
    for (k, q) in &s.coeffs {
        out.insert(*k, NcPoly::constant(q.clone()));
    }
    out
}

fn sign(odd: bool) -> Rat {
    if odd {
        Rat::int(-1)
    } else {
        Rat::one()
    }
}

pub struct Yangian {
    pub ctx: SuperContext,
    /// Generators `t^{(r)}` with `r ≤ depth` are present; series are exact
    /// up to `u^{-depth}`.
    pub depth: i64,
    pub rules: Arc<RewriteRules>,
    pub t: PolyMatrix,
    pub t_tilde: PolyMatrix,
}

impl Yangian {
    /// Rules cover words of total level up to `2 * depth`.
    pub fn new(m: usize, n: usize, depth: i64) -> Result<Yangian> {
        Yangian::with_cutoff(SuperContext::new(m, n)?, depth, 2 * depth as u32)
    }

    pub fn with_cutoff(ctx: SuperContext, depth: i64, cutoff: u32) -> Result<Yangian> {
        if ctx.dim() > MAX_DIM {
            return Err(KernelError::InvalidArgument(format!("M+N = {} exceeds {MAX_DIM}", ctx.dim())));
        }
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(KernelError::InvalidArgument(format!("depth {depth} outside 1..={MAX_DEPTH}")));
        }
        let rules = Arc::new(derive_rules(&ctx, cutoff.max(depth as u32)));
        Yangian::with_rules(ctx, depth, rules)
    }

    /// Shares an existing rule set (which must belong to the same context).
    pub fn with_rules(ctx: SuperContext, depth: i64, rules: Arc<RewriteRules>) -> Result<Yangian> {
        if rules.ctx != ctx {
            return Err(KernelError::InvalidArgument("rule set belongs to another context".into()));
        }
        let t = generic_matrix(&ctx, depth, Family::T);
        let t_tilde = t.invert_with(depth, |a| rules.normal_form(a))?;
        Ok(Yangian { ctx, depth, rules, t, t_tilde })
    }

    pub fn m(&self) -> usize {
        self.ctx.m
    }

    pub fn n(&self) -> usize {
        self.ctx.n
    }

    /// `M - N`.
    pub fn super_dim(&self) -> i64 {
        self.ctx.m as i64 - self.ctx.n as i64
    }

    pub fn nf(&self, p: &NcPoly) -> Result<NcPoly> {
        self.rules.normal_form(p)
    }

    pub fn nf_series(&self, s: &PolySeries) -> Result<PolySeries> {
        s.try_map(|a| self.nf(a))
    }

    pub fn nf_matrix(&self, x: &PolyMatrix) -> Result<PolyMatrix> {
        x.try_map(|s| self.nf_series(s))
    }

    pub fn mul(&self, a: &PolySeries, b: &PolySeries) -> Result<PolySeries> {
        self.nf_series(&a.mul(b))
    }

    pub fn mul_matrix(&self, a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix> {
        self.nf_matrix(&a.mul(b))
    }

    pub fn invert_matrix(&self, x: &PolyMatrix) -> Result<PolyMatrix> {
        x.invert_with(self.depth, |a| self.nf(a))
    }

    pub fn invert_series(&self, s: &PolySeries) -> Result<PolySeries> {
        s.invert_with(self.depth, |a| self.nf(a))
    }

    /// `s(εu + c)` within the working depth.
    pub fn at(&self, s: &PolySeries, eps: i64, c: &Rat) -> PolySeries {
        s.substitute(eps, c, self.depth)
    }

    pub fn at_matrix(&self, x: &PolyMatrix, eps: i64, c: &Rat) -> PolyMatrix {
        x.substitute(eps, c, self.depth)
    }

    /// `T^*(u) = T̃^t(u)`.
    pub fn t_star(&self) -> PolyMatrix {
        self.t_tilde.transpose_t()
    }

    pub fn generators(&self, max_level: u32) -> Vec<Sym> {
        let mut out = Vec::new();
        for r in 1..=max_level {
            for i in self.ctx.indices() {
                for j in self.ctx.indices() {
                    out.push(Sym::t(&self.ctx, i, j, r));
                }
            }
        }
        out
    }

    /// Every exact coefficient in normal form vanishes.
    pub fn series_vanishes(&self, s: &PolySeries, what: &str) -> Result<Verdict> {
        for (k, a) in &s.coeffs {
            let r = self.nf(a)?;
            if !r.is_empty() {
                return Ok(Verdict::fail(format!("{what}: coefficient of {} is {r}", power("u", *k))));
            }
        }
        Ok(Verdict::Pass)
    }

    pub fn series_equal(&self, a: &PolySeries, b: &PolySeries, what: &str) -> Result<Verdict> {
        self.series_vanishes(&a.sub(b), what)
    }

    /// Every exactly known cell of every entry vanishes in normal form.
    pub fn tensor_vanishes(&self, x: &SuperTensor<BiSeries<NcPoly>>, what: &str) -> Result<Verdict> {
        let mut keys: Vec<_> = x.entries.keys().cloned().collect();
        keys.sort();
        for k in keys {
            let e = &x.entries[&k];
            let (r, c) = x.rows_cols(&k);
            for (a, b) in e.window_cells() {
                let p = self.nf(&e.get(a, b))?;
                if !p.is_empty() {
                    return Ok(Verdict::fail(format!(
                        "{what}: entry {:?}x{:?} at {} {} is {p}",
                        r.as_slice(),
                        c.as_slice(),
                        power("u", a),
                        power("v", b)
                    )));
                }
            }
        }
        Ok(Verdict::Pass)
    }

    /// Relation `((u-v) - P) T_1(u) T_2(v) - T_2(v) T_1(u) ((u-v) - P)`.
    pub fn rtt_defect(&self) -> SuperTensor<BiSeries<NcPoly>> {
        let ctx = &self.ctx;
        let t1 = bi_slot(ctx, 2, 0, &self.t, false);
        let t2 = bi_slot(ctx, 2, 1, &self.t, true);
        let r = r_clearing(ctx);
        r.mul(&t1).mul(&t2).sub(&t2.mul(&t1).mul(&r))
    }

    pub fn check_rtt(&self) -> Result<Verdict> {
        self.tensor_vanishes(&self.rtt_defect(), "cleared RTT relation")
    }

    /// Checks that the defining relations hold among the images of the
    /// generators under a (anti-)homomorphism, for all relations among
    /// generators whose images are exactly known.
    pub fn check_images_satisfy_relations(&self, images: &MorphismImages) -> Result<Verdict> {
        for ((y, x), rule) in self.rules.sorted_rules() {
            if (y.level() + x.level()) as i64 - 1 > self.depth {
                continue;
            }
            // y x - sign x y - correction
            let mut rel = NcPoly::sym(y).mul(&NcPoly::sym(x));
            rel.add_poly_scaled(&NcPoly::sym(x).mul(&NcPoly::sym(y)), &Rat::int(-(rule.sign as i64)));
            rel.add_poly_scaled(&rule.correction, &Rat::int(-1));
            let img = self.nf(&images.apply(&rel))?;
            if !img.is_empty() {
                return Ok(Verdict::fail(format!("relation for ({y}, {x}) maps to {img}")));
            }
        }
        Ok(Verdict::Pass)
    }
}

/// `var^-k`, written with a positive exponent when `k < 0`.
pub(crate) fn power(var: &str, k: i64) -> String {
    if k < 0 {
        format!("{var}^{}", -k)
    } else {
        format!("{var}^-{k}")
    }
}

/// `Σ E_{ij} ⊗ x_ij` in `slot` as a two-variable tensor; the series variable
/// is `u` or (`second`) `v`.
pub fn bi_slot(ctx: &SuperContext, slots: usize, slot: usize, x: &PolyMatrix, second: bool) -> SuperTensor<BiSeries<NcPoly>> {
    let rows: Vec<Vec<BiSeries<NcPoly>>> = (0..x.rows())
        .map(|i| (0..x.cols()).map(|j| BiSeries::from_series(x.at(i, j), second)).collect())
        .collect();
    SuperTensor::from_slot_matrix(ctx, slots, slot, &rows)
}

/// The polynomial `a u + b v + c`.
pub fn uv_linear(a: i64, b: i64, c: &Rat) -> BiSeries<NcPoly> {
    BiSeries::polynomial(&[
        ((-1, 0), NcPoly::constant(Rat::int(a))),
        ((0, -1), NcPoly::constant(Rat::int(b))),
        ((0, 0), NcPoly::constant(c.clone())),
    ])
}

/// `(u - v) - P` on two slots.
pub fn r_clearing(ctx: &SuperContext) -> SuperTensor<BiSeries<NcPoly>> {
    let p = super_permutation(ctx, 2, 0, 1).lift::<BiSeries<NcPoly>>();
    SuperTensor::unit(ctx, 2).scale_by(&uv_linear(1, -1, &Rat::zero())).sub(&p)
}

/// Generator images of a morphism together with its multiplicativity type.
#[derive(Clone, Debug)]
pub struct MorphismImages {
    pub kind: MorphismKind,
    pub images: FxHashMap<Sym, NcPoly>,
}

impl MorphismImages {
    /// Reads the images of `t_ij^{(r)}`, `r ≤ depth`, off a matrix of series.
    pub fn from_matrix(ctx: &SuperContext, depth: i64, x: &PolyMatrix, family: Family, kind: MorphismKind) -> Self {
        let mut images = FxHashMap::default();
        for i in ctx.indices() {
            for j in ctx.indices() {
                let s = x.entry(i, j);
                for r in 1..=depth {
                    let sym = Sym::new(family, i, j, r as u32, ctx.parity(i) ^ ctx.parity(j));
                    images.insert(sym, s.get(r));
                }
            }
        }
        MorphismImages { kind, images }
    }

    pub fn apply(&self, p: &NcPoly) -> NcPoly {
        apply_morphism(p, |s| self.images.get(&s).cloned(), self.kind)
    }

    pub fn apply_series(&self, s: &PolySeries) -> PolySeries {
        s.map(|a| self.apply(a))
    }
}

/// The (anti-)automorphisms of the Yangian.
#[derive(Clone, Debug)]
pub enum Morphism {
    /// `T(u) ↦ f(u) T(u)` for a scalar series with `f(∞) = 1`.
    MulSeries(Series<Rat>),
    /// `T(u) ↦ T(u - λ)`.
    Shift(Rat),
    /// `T(u) ↦ B T(u) B^{-1}` for an even invertible matrix.
    Conjugate(Vec<Vec<Rat>>),
    /// `T(u) ↦ T(-u)`, anti.
    Negate,
    /// `T(u) ↦ T^t(u)`, anti.
    Transpose,
    /// `T(u) ↦ T̃(u)`, anti.
    Antipode,
    /// `T(u) ↦ T^t(-u)`.
    Rho,
    /// `T(u) ↦ T^*(u)`.
    Star,
}

impl Morphism {
    pub fn name(&self) -> &'static str {
        match self {
            Morphism::MulSeries(_) => "mul-series",
            Morphism::Shift(_) => "shift",
            Morphism::Conjugate(_) => "conjugate",
            Morphism::Negate => "negate",
            Morphism::Transpose => "transpose",
            Morphism::Antipode => "antipode",
            Morphism::Rho => "rho",
            Morphism::Star => "star",
        }
    }

    pub fn is_anti(&self) -> bool {
        matches!(self, Morphism::Negate | Morphism::Transpose | Morphism::Antipode)
    }
}

impl Yangian {
    /// Image of `T(u)` under a morphism, entries in normal form.
    pub fn morphism_matrix(&self, m: &Morphism) -> Result<PolyMatrix> {
        let d = self.depth;
        let x = match m {
            Morphism::MulSeries(f) => {
                if f.lo() < 0 || f.get(0) != Rat::one() {
                    return Err(KernelError::InvalidArgument("series must have leading term 1".into()));
                }
                self.t.scale_series(&lift_series(f)).truncate(d)
            }
            Morphism::Shift(l) => self.at_matrix(&self.t, 1, &l.neg()),
            Morphism::Conjugate(b) => {
                let dim = self.ctx.dim();
                if b.len() != dim || b.iter().any(|r| r.len() != dim) {
                    return Err(KernelError::InvalidArgument("matrix has the wrong size".into()));
                }
                for i in self.ctx.indices() {
                    for j in self.ctx.indices() {
                        if self.ctx.parity(i) != self.ctx.parity(j) && !b[i as usize - 1][j as usize - 1].is_zero() {
                            return Err(KernelError::Parity("conjugating matrix must be even".into()));
                        }
                    }
                }
                let binv = crate::series::invert_rational_matrix(b)
                    .ok_or_else(|| KernelError::NotInvertible("conjugating matrix is singular".into()))?;
                let lift = |q: &Vec<Vec<Rat>>| {
                    let par: Vec<u8> = self.ctx.indices().map(|i| self.ctx.parity(i)).collect();
                    SeriesMatrix::from_fn(par.clone(), par, |i, j| Series::constant(NcPoly::constant(q[i][j].clone())))
                };
                lift(b).mul(&self.t).mul(&lift(&binv))
            }
            Morphism::Negate => self.at_matrix(&self.t, -1, &Rat::zero()),
            Morphism::Transpose => self.t.transpose_t(),
            Morphism::Antipode => self.t_tilde.clone(),
            Morphism::Rho => self.at_matrix(&self.t, -1, &Rat::zero()).transpose_t(),
            Morphism::Star => self.t_star(),
        };
        self.nf_matrix(&x)
    }

    pub fn morphism(&self, m: &Morphism) -> Result<MorphismImages> {
        let kind = if m.is_anti() { MorphismKind::AntiHom } else { MorphismKind::Hom };
        Ok(MorphismImages::from_matrix(&self.ctx, self.depth, &self.morphism_matrix(m)?, Family::T, kind))
    }

    /// Image of a polynomial, in normal form.
    pub fn apply(&self, images: &MorphismImages, p: &NcPoly) -> Result<NcPoly> {
        self.nf(&images.apply(p))
    }

    pub fn apply_series(&self, images: &MorphismImages, s: &PolySeries) -> Result<PolySeries> {
        s.try_map(|a| self.apply(images, a))
    }
}

// ---------------------------------------------------------------------------
// center

impl Yangian {
    /// `C_ij = Σ_k t̃_kj(u) t_ik(u+M-N)`.
    pub fn centre_contraction(&self) -> Result<PolyMatrix> {
        let shifted = self.at_matrix(&self.t, 1, &Rat::int(self.super_dim()));
        let dim = self.ctx.dim();
        let mut out = SeriesMatrix::square(&self.ctx);
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Series::exact_zero();
                for k in 0..dim {
                    let p = self.t_tilde.at(k, j).mul(shifted.at(i, k));
                    acc = if k == 0 { p } else { acc.add(&p) };
                }
                out.set(i, j, self.nf_series(&acc)?);
            }
        }
        Ok(out)
    }

    /// `C'_ij = Σ_k t_kj(u+M-N) t̃_ik(u)`.
    pub fn centre_contraction_dual(&self) -> Result<PolyMatrix> {
        let shifted = self.at_matrix(&self.t, 1, &Rat::int(self.super_dim()));
        let dim = self.ctx.dim();
        let mut out = SeriesMatrix::square(&self.ctx);
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Series::exact_zero();
                for k in 0..dim {
                    let p = shifted.at(k, j).mul(self.t_tilde.at(i, k));
                    acc = if k == 0 { p } else { acc.add(&p) };
                }
                out.set(i, j, self.nf_series(&acc)?);
            }
        }
        Ok(out)
    }

    /// The common diagonal value of a contraction that must be scalar.
    pub fn scalar_value(&self, c: &PolyMatrix, what: &str) -> Result<PolySeries> {
        let dim = self.ctx.dim();
        let z = c.at(0, 0).clone();
        for i in 0..dim {
            for j in 0..dim {
                let e = c.at(i, j);
                let ok = if i == j { e.sub(&z).coeffs.is_empty() } else { e.coeffs.is_empty() };
                if !ok {
                    return Err(KernelError::InvalidArgument(format!(
                        "{what} is not scalar: entry ({}, {}) differs",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(z)
    }

    /// The central series `z(u)`.
    pub fn z_series(&self) -> Result<PolySeries> {
        self.scalar_value(&self.centre_contraction()?, "center contraction")
    }

    /// Super-commutators of the exact coefficients of `x` (keys `1..=upto`)
    /// with the given generators vanish.
    pub fn centrality(&self, x: &PolySeries, upto: i64, scope: &[Sym]) -> Result<Verdict> {
        for k in 1..=upto.min(x.prec) {
            let c = x.get(k);
            for &g in scope {
                let r = self.rules.super_commutator(&c, &NcPoly::sym(g))?;
                if !r.is_empty() {
                    return Ok(Verdict::fail(format!("coefficient u^-{k} fails to commute with {g}: {r}")));
                }
            }
        }
        Ok(Verdict::Pass)
    }
}

// ---------------------------------------------------------------------------
// fusion

/// One factor of an operator product on `V^{⊗m} ⊗ Y`.
#[derive(Clone, Debug)]
pub enum Factor {
    /// A matrix of series placed in one slot.
    Slot(usize, PolyMatrix),
    /// `1 + c X` for a numeric operator `X` on the listed slots and an even
    /// scalar series `c`.
    Affine(Vec<usize>, SuperTensor<Rat>, PolySeries),
}

impl Factor {
    fn act(&self, v: &SuperVector<PolySeries>) -> SuperVector<PolySeries> {
        match self {
            Factor::Slot(s, x) => {
                let rows: Vec<Vec<PolySeries>> =
                    (0..x.rows()).map(|i| (0..x.cols()).map(|j| x.at(i, j).clone()).collect()).collect();
                v.apply_slot_matrix(*s, &rows)
            }
            Factor::Affine(_, op, c) => v.plus(&v.apply_numeric(op, c)),
        }
    }

    fn slots(&self) -> Vec<usize> {
        match self {
            Factor::Slot(s, _) => vec![*s],
            Factor::Affine(s, _, _) => s.clone(),
        }
    }
}

/// `e_{i_1} ⊗ ⋯` survives `ℑ A` when restricted to the given final slots:
/// block pattern `p|q` and no repeated index inside a block.
fn admissible(ctx: &SuperContext, p: usize, w: &[u8], fin: &[bool]) -> bool {
    let mut seen = [false; 32];
    for (s, &i) in w.iter().enumerate() {
        if !fin[s] {
            continue;
        }
        if (ctx.parity(i) == 1) != (s >= p) || seen[i as usize] {
            return false;
        }
        seen[i as usize] = true;
    }
    true
}

/// Projected symmetrizer `ℑ A^{(p|q)}`.
pub fn fusion_projector(ctx: &SuperContext, p: usize, q: usize) -> Result<SuperTensor<Rat>> {
    Ok(block_pattern_projector(ctx, p, q).mul(&berezinian_symmetrizer(ctx, p, q)?))
}

impl Yangian {
    fn nf_vector(&self, v: &SuperVector<PolySeries>) -> Result<SuperVector<PolySeries>> {
        let mut out = SuperVector::zero(&v.ctx, v.slots);
        for (k, s) in &v.entries {
            let s = self.nf_series(s)?;
            if !s.coeffs.is_empty() {
                out.entries.insert(k.clone(), s);
            }
        }
        Ok(out)
    }

    /// Applies `ℑ A^{(p|q)} F_1 ⋯ F_r` to `start` (factors act right to
    /// left). Components that `ℑ A` is known to annihilate are dropped as
    /// soon as their slots are final.
    pub fn apply_fused(
        &self,
        start: SuperVector<PolySeries>,
        factors: &[Factor],
        p: usize,
        q: usize,
    ) -> Result<SuperVector<PolySeries>> {
        let ctx = &self.ctx;
        let slots = p + q;
        let mut fin = vec![true; slots];
        for f in factors {
            for s in f.slots() {
                fin[s] = false;
            }
        }
        let prune = |v: SuperVector<PolySeries>, fin: &[bool]| {
            let mut v = v;
            v.entries.retain(|w, _| admissible(ctx, p, w, fin));
            v
        };
        let mut v = prune(start, &fin);
        for (pos, f) in factors.iter().enumerate().rev() {
            v = self.nf_vector(&f.act(&v))?;
            // slots untouched further left are now final
            for s in 0..slots {
                fin[s] = !factors[..pos].iter().any(|g| g.slots().contains(&s));
            }
            v = prune(v, &fin);
        }
        let proj = fusion_projector(ctx, p, q)?;
        self.nf_vector(&v.apply_numeric(&proj, &PolySeries::one()))
    }

    /// Applies `F_1 ⋯ F_r` to `start`, right to left, in normal form.
    pub fn apply_chain(&self, start: SuperVector<PolySeries>, factors: &[Factor]) -> Result<SuperVector<PolySeries>> {
        let mut v = start;
        for f in factors.iter().rev() {
            v = self.nf_vector(&f.act(&v))?;
        }
        Ok(v)
    }

    /// The argument ladder `w_i`: `u+M-N-i` on the even block and
    /// `u-M-N-1+i` on the odd block, as offsets from `u`.
    pub fn ladder(&self) -> Vec<Rat> {
        let (m, n) = (self.m() as i64, self.n() as i64);
        (1..=m + n).map(|i| Rat::int(if i <= m { m - n - i } else { -m - n - 1 + i })).collect()
    }

    fn berezinian_factors(&self) -> Vec<Factor> {
        let star = self.t_star();
        let m = self.m();
        self.ladder()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let base = if k < m { &self.t } else { &star };
                Factor::Slot(k, self.at_matrix(base, 1, c))
            })
            .collect()
    }

    fn ordered_basis(&self) -> Vec<u8> {
        self.ctx.indices().collect()
    }

    /// The fused product applied to `e_1 ⊗ ⋯ ⊗ e_{M+N}`; its coefficient at the
    /// same vector is the Berezinian. Fails if the image is not the expected
    /// multiple of `ℑ A e_v`.
    pub fn berezinian_fusion(&self) -> Result<PolySeries> {
        let v = self.ordered_basis();
        let (m, n) = (self.m(), self.n());
        let img = self.apply_fused(SuperVector::basis(&self.ctx, &v), &self.berezinian_factors(), m, n)?;
        let b = img.get(&v);
        let reference = fusion_projector(&self.ctx, m, n)?.apply(&SuperVector::basis(&self.ctx, &v));
        for (w, s) in &img.entries {
            let expect = b.scale_rat(&reference.get(w));
            if !s.sub(&expect).coeffs.is_empty() {
                return Err(KernelError::InvalidArgument(format!(
                    "fused image is not proportional to the symmetrized vector at {:?}",
                    w.as_slice()
                )));
            }
        }
        for w in reference.entries.keys() {
            if img.get(w).coeffs.is_empty() && !b.coeffs.is_empty() {
                return Err(KernelError::InvalidArgument(format!("fused image misses component {:?}", w.as_slice())));
            }
        }
        Ok(b)
    }

    /// `Str_{1..M+N}(ℑ A T_1(w_1) ⋯ T^*_{M+N}(w_{M+N}))` together with the
    /// scalar `Str(ℑ A)`.
    pub fn berezinian_supertrace(&self) -> Result<(PolySeries, Rat)> {
        let (m, n) = (self.m(), self.n());
        let proj = fusion_projector(&self.ctx, m, n)?;
        let factors = self.berezinian_factors();
        let mut total = Series::exact_zero();
        let mut norm = Rat::zero();
        for w in pattern_vectors(&self.ctx, m, n) {
            let sg = sign(self.ctx.multi_parity(&w) == 1);
            let img = self.apply_fused(SuperVector::basis(&self.ctx, &w), &factors, m, n)?;
            total = total.add(&img.get(&w).scale_rat(&sg));
            norm = norm.add(&proj.get(&w, &w).mul(&sg));
        }
        Ok((total, norm))
    }

    /// Explicit double sum
    /// `Σ_σ sgn σ t_{σ(1)1}(u+M-N-1) ⋯ t_{σ(M)M}(u-N) ·
    ///  Σ_σ sgn σ t̃_{M+1,M+σ(1)}(u-N) ⋯ t̃_{M+N,M+σ(N)}(u-1)`.
    pub fn berezinian_explicit(&self) -> Result<PolySeries> {
        let (m, n) = (self.m(), self.n());
        let ladder = self.ladder();
        let t_at: Vec<PolyMatrix> = (0..m).map(|k| self.at_matrix(&self.t, 1, &ladder[k])).collect();
        let tt_at: Vec<PolyMatrix> = (0..n).map(|k| self.at_matrix(&self.t_tilde, 1, &ladder[m + k])).collect();
        let mut even = PolySeries::one();
        if m > 0 {
            even = Series::exact_zero();
            for s in perm::enumerate(m)? {
                let mut prod = PolySeries::one();
                for k in 0..m {
                    prod = self.mul(&prod, t_at[k].at(s[k] - 1, k))?;
                }
                even = even.add(&prod.scale_rat(&Rat::int(perm::sign(&s) as i64)));
            }
        }
        let mut odd = PolySeries::one();
        if n > 0 {
            odd = Series::exact_zero();
            for s in perm::enumerate(n)? {
                let mut prod = PolySeries::one();
                for k in 0..n {
                    prod = self.mul(&prod, tt_at[k].at(m + k, m + s[k] - 1))?;
                }
                odd = odd.add(&prod.scale_rat(&Rat::int(perm::sign(&s) as i64)));
            }
        }
        self.mul(&even, &odd)
    }

    /// Series obtained by applying `ρ` coefficientwise to the Berezinian.
    pub fn p_series(&self, berezinian: &PolySeries) -> Result<PolySeries> {
        let rho = self.morphism(&Morphism::Rho)?;
        self.apply_series(&rho, berezinian)
    }
}

/// All `e_w` with `w` in block pattern `p|q`.
pub fn pattern_vectors(ctx: &SuperContext, p: usize, q: usize) -> Vec<Vec<u8>> {
    let even: Vec<u8> = ctx.indices().filter(|&i| ctx.parity(i) == 0).collect();
    let odd: Vec<u8> = ctx.indices().filter(|&i| ctx.parity(i) == 1).collect();
    let mut out = vec![Vec::new()];
    for s in 0..p + q {
        let pool = if s < p { &even } else { &odd };
        out = out
            .into_iter()
            .flat_map(|w| {
                pool.iter().map(move |&i| {
                    let mut x = w.clone();
                    x.push(i);
                    x
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------------------
// coproduct

/// `Y ⊗ Y` realized with the second factor's generators in their own family.
impl Yangian {
    /// `Δ(t_ij^{(r)}) = Σ_k Σ_{a+b=r} (-1)^{(|i|+|k|)(|k|+|j|)} t_ik^{(a)} ⊗ t_kj^{(b)}`.
    pub fn coproduct(&self) -> MorphismImages {
        let ctx = &self.ctx;
        let left = &self.t;
        let right = generic_matrix(ctx, self.depth, Family::T2);
        // the graded matrix product carries exactly this sign
        let prod = left.mul(&right);
        MorphismImages::from_matrix(ctx, self.depth, &prod, Family::T, MorphismKind::Hom)
    }

    /// Generic element of the second tensor factor.
    pub fn second_factor(&self, p: &NcPoly) -> NcPoly {
        p.map_syms(|s| if s.family() == Family::T { s.with_family(Family::T2) } else { s })
    }

    /// `Δ(x y) = Δ(x) Δ(y)` on random products of two generators whose
    /// levels sum to at most `depth + 1`.
    pub fn check_coproduct(&self, seed: u64, count: usize) -> Result<Verdict> {
        use rand::{Rng, SeedableRng};
        let delta = self.coproduct();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = self.ctx.dim() as u8;
        for _ in 0..count {
            let r = rng.gen_range(1..=self.depth as u32);
            let s = rng.gen_range(1..=(self.depth as u32 + 1 - r).min(self.depth as u32));
            let x = NcPoly::sym(Sym::t(&self.ctx, rng.gen_range(1..=dim), rng.gen_range(1..=dim), r));
            let y = NcPoly::sym(Sym::t(&self.ctx, rng.gen_range(1..=dim), rng.gen_range(1..=dim), s));
            let lhs = self.nf(&delta.apply(&self.nf(&x.mul(&y))?))?;
            let rhs = self.nf(&delta.apply(&x).mul(&delta.apply(&y)))?;
            if lhs != rhs {
                return Ok(Verdict::fail(format!("coproduct of {x} * {y}: {lhs} vs {rhs}")));
            }
        }
        Ok(Verdict::Pass)
    }
}

impl Yangian {
    /// `t_11(u-2)(t̃_22(u-2) t̃_33(u-1) - t̃_23(u-2) t̃_32(u-1))`, only for `(1|2)`.
    pub fn berezinian_one_two(&self) -> Result<PolySeries> {
        if (self.m(), self.n()) != (1, 2) {
            return Err(KernelError::InvalidArgument("closed form is for M=1, N=2".into()));
        }
        let t2 = self.at_matrix(&self.t, 1, &Rat::int(-2));
        let tt2 = self.at_matrix(&self.t_tilde, 1, &Rat::int(-2));
        let tt1 = self.at_matrix(&self.t_tilde, 1, &Rat::int(-1));
        let a = self.mul(tt2.entry(2, 2), tt1.entry(3, 3))?;
        let b = self.mul(tt2.entry(2, 3), tt1.entry(3, 2))?;
        self.mul(t2.entry(1, 1), &a.sub(&b))
    }

    /// `z(u) 𝔅(u) - 𝔅(u+1)` vanishes.
    pub fn check_liouville(&self, z: &PolySeries, berezinian: &PolySeries) -> Result<Verdict> {
        let lhs = self.mul(z, berezinian)?;
        let rhs = self.at(berezinian, 1, &Rat::one());
        self.series_equal(&lhs, &rhs, "Liouville formula")
    }

    /// `ρ(z(u)) z(-u-M+N) = 1`.
    pub fn check_rho_z(&self, z: &PolySeries) -> Result<Verdict> {
        let rho = self.morphism(&Morphism::Rho)?;
        let rz = self.apply_series(&rho, z)?;
        let reflected = self.at(z, -1, &Rat::int(-self.super_dim()));
        let prod = self.mul(&rz, &reflected)?;
        self.series_vanishes(&prod.sub(&PolySeries::one()), "rho(z(u)) z(-u-M+N) - 1")
    }

    /// The antipode sends `z(u)` to `z(u)^{-1}`.
    pub fn check_antipode_z(&self, z: &PolySeries) -> Result<Verdict> {
        let s = self.morphism(&Morphism::Antipode)?;
        self.series_equal(&self.apply_series(&s, z)?, &self.invert_series(z)?, "S(z) - z^{-1}")
    }

    pub fn check_transpose_z(&self, z: &PolySeries) -> Result<Verdict> {
        let tau = self.morphism(&Morphism::Transpose)?;
        self.series_equal(&self.apply_series(&tau, z)?, z, "tau(z) - z")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::r_matrix;

    #[test]
    fn build_counts_generators() {
        let y = Yangian::new(1, 1, 2).unwrap();
        assert_eq!(y.generators(2).len(), 8);
        let y = Yangian::new(2, 1, 3).unwrap();
        assert_eq!(y.generators(3).len(), 27);
        assert!(Yangian::new(3, 3, 2).is_err());
        assert!(Yangian::new(1, 1, 7).is_err());
    }

    #[test]
    fn inverse_matrix_is_two_sided() {
        let y = Yangian::new(1, 1, 3).unwrap();
        let one = SeriesMatrix::identity(&y.ctx).truncate(3);
        assert_eq!(y.mul_matrix(&y.t, &y.t_tilde).unwrap(), one);
        assert_eq!(y.mul_matrix(&y.t_tilde, &y.t).unwrap(), one);
    }

    #[test]
    fn rtt_holds_on_window() {
        for (m, n) in [(1, 1), (2, 1)] {
            let y = Yangian::new(m, n, 2).unwrap();
            assert_eq!(y.check_rtt().unwrap(), Verdict::Pass);
        }
    }

    #[test]
    fn rtt_detects_a_broken_generator_matrix() {
        let mut y = Yangian::new(1, 1, 2).unwrap();
        // swapping two entries of T breaks the relation
        let a = y.t.at(0, 0).clone();
        let b = y.t.at(1, 1).clone();
        y.t.set(0, 0, b);
        y.t.set(1, 1, a);
        assert!(!y.check_rtt().unwrap().passed());
    }

    #[test]
    fn all_morphisms_respect_relations() {
        let y = Yangian::new(1, 1, 3).unwrap();
        let f = Series::from_coeffs(vec![Rat::one(), Rat::int(2), Rat::new(1, 3), Rat::int(5)], 3);
        let b = vec![vec![Rat::int(2), Rat::zero()], vec![Rat::zero(), Rat::int(-3)]];
        let all = [
            Morphism::MulSeries(f),
            Morphism::Shift(Rat::new(3, 2)),
            Morphism::Conjugate(b),
            Morphism::Negate,
            Morphism::Transpose,
            Morphism::Antipode,
            Morphism::Rho,
            Morphism::Star,
        ];
        for m in &all {
            let im = y.morphism(m).unwrap();
            assert_eq!(y.check_images_satisfy_relations(&im).unwrap(), Verdict::Pass, "{}", m.name());
        }
    }

    #[test]
    fn transpose_is_not_a_homomorphism() {
        let y = Yangian::new(1, 1, 2).unwrap();
        let mut im = y.morphism(&Morphism::Transpose).unwrap();
        im.kind = MorphismKind::Hom;
        assert!(!y.check_images_satisfy_relations(&im).unwrap().passed());
    }

    #[test]
    fn morphism_argument_errors() {
        let y = Yangian::new(1, 1, 2).unwrap();
        let odd = vec![vec![Rat::one(), Rat::one()], vec![Rat::zero(), Rat::one()]];
        assert!(matches!(y.morphism(&Morphism::Conjugate(odd)), Err(KernelError::Parity(_))));
        let singular = vec![vec![Rat::zero(), Rat::zero()], vec![Rat::zero(), Rat::one()]];
        assert!(y.morphism(&Morphism::Conjugate(singular)).is_err());
        let bad = Series::from_coeffs(vec![Rat::int(2)], 2);
        assert!(y.morphism(&Morphism::MulSeries(bad)).is_err());
    }

    #[test]
    fn trivial_series_multiplication_is_identity() {
        let y = Yangian::new(1, 1, 2).unwrap();
        let im = y.morphism(&Morphism::MulSeries(Series::constant(Rat::one()).truncate(2))).unwrap();
        for g in y.generators(2) {
            assert_eq!(im.images[&g], NcPoly::sym(g));
        }
    }

    #[test]
    fn rho_squares_to_the_parity_automorphism() {
        // with the graded transpose, (X^t)^t_ij = (-1)^{|i|+|j|} X_ij
        let y = Yangian::new(1, 1, 3).unwrap();
        let rho = y.morphism(&Morphism::Rho).unwrap();
        for g in y.generators(3) {
            let twice = y.apply(&rho, &y.apply(&rho, &NcPoly::sym(g)).unwrap()).unwrap();
            let expect = if g.parity() == 1 { NcPoly::sym(g).neg() } else { NcPoly::sym(g) };
            assert_eq!(twice, expect);
        }
    }

    #[test]
    fn centre_formulas_agree() {
        for (m, n) in [(1, 1), (1, 2), (2, 1)] {
            let y = Yangian::new(m, n, 3).unwrap();
            let z = y.z_series().unwrap();
            let z2 = y.scalar_value(&y.centre_contraction_dual().unwrap(), "dual").unwrap();
            assert_eq!(z, z2);
            assert!(z.get(1).is_empty());
            assert_eq!(counit_series(&z), Series::constant(Rat::one()).truncate(3));
        }
    }

    #[test]
    fn centre_coefficients_commute_with_generators() {
        let y = Yangian::new(1, 1, 3).unwrap();
        let z = y.z_series().unwrap();
        assert_eq!(y.centrality(&z, 3, &y.generators(3)).unwrap(), Verdict::Pass);
        // negative control
        let x = NcPoly::sym(Sym::t(&y.ctx, 1, 1, 1));
        let c = y.rules.super_commutator(&x, &NcPoly::sym(Sym::t(&y.ctx, 1, 2, 1))).unwrap();
        assert!(!c.is_empty());
    }

    #[test]
    fn centre_under_transpose_antipode_and_rho() {
        let y = Yangian::new(1, 1, 3).unwrap();
        let z = y.z_series().unwrap();
        assert_eq!(y.check_transpose_z(&z).unwrap(), Verdict::Pass);
        assert_eq!(y.check_antipode_z(&z).unwrap(), Verdict::Pass);
        assert_eq!(y.check_rho_z(&z).unwrap(), Verdict::Pass);
    }

    #[test]
    fn berezinian_forms_agree() {
        for (m, n) in [(1, 1), (1, 2), (2, 1)] {
            let y = Yangian::new(m, n, 2).unwrap();
            let e = y.berezinian_explicit().unwrap();
            assert_eq!(y.series_equal(&e, &y.berezinian_fusion().unwrap(), "fusion").unwrap(), Verdict::Pass);
            let (st, norm) = y.berezinian_supertrace().unwrap();
            let factorial = |k: usize| (1..=k as i64).product::<i64>();
            let expect = factorial(m) * factorial(n) * if n % 2 == 1 { -1 } else { 1 };
            assert_eq!(norm, Rat::int(expect));
            assert_eq!(y.series_equal(&st, &e.scale_rat(&norm), "supertrace").unwrap(), Verdict::Pass);
            assert_eq!(counit_series(&e), Series::constant(Rat::one()).truncate(2));
        }
    }

    #[test]
    fn berezinian_of_one_by_zero_is_the_entry() {
        let y = Yangian::new(1, 0, 3).unwrap();
        assert_eq!(y.berezinian_explicit().unwrap(), *y.t.entry(1, 1));
        assert_eq!(y.berezinian_fusion().unwrap(), *y.t.entry(1, 1));
    }

    #[test]
    fn one_two_closed_form() {
        let y = Yangian::new(1, 2, 2).unwrap();
        let e = y.berezinian_explicit().unwrap();
        assert_eq!(y.series_equal(&e, &y.berezinian_one_two().unwrap(), "closed").unwrap(), Verdict::Pass);
        assert!(Yangian::new(1, 1, 1).unwrap().berezinian_one_two().is_err());
    }

    #[test]
    fn liouville_formula() {
        let y = Yangian::new(1, 1, 3).unwrap();
        let z = y.z_series().unwrap();
        let b = y.berezinian_explicit().unwrap();
        assert_eq!(y.check_liouville(&z, &b).unwrap(), Verdict::Pass);
    }

    #[test]
    fn reflected_berezinian_differs_from_rho_image() {
        let y = Yangian::new(1, 2, 2).unwrap();
        let b = y.berezinian_explicit().unwrap();
        let p = y.p_series(&b).unwrap();
        assert!(!y.series_equal(&p, &y.at(&b, -1, &Rat::int(3)), "reflected").unwrap().passed());
        let rho = y.morphism(&Morphism::Rho).unwrap();
        assert_eq!(y.apply_series(&rho, &p).unwrap(), b);
    }

    #[test]
    fn coproduct_is_multiplicative() {
        let y = Yangian::new(1, 1, 2).unwrap();
        assert_eq!(y.check_coproduct(3, 20).unwrap(), Verdict::Pass);
        let d = y.coproduct();
        // Δ(t^{(1)}) = t^{(1)} ⊗ 1 + 1 ⊗ t^{(1)}
        let g = Sym::t(&y.ctx, 1, 2, 1);
        let mut expect = NcPoly::sym(g);
        expect.add_assign(&NcPoly::sym(g.with_family(Family::T2)));
        assert_eq!(d.images[&g], expect);
    }

    #[test]
    fn slotwise_action_matches_tensor_product() {
        let ctx = SuperContext::new(1, 1).unwrap();
        let x = generic_matrix(&ctx, 1, Family::Free);
        let y = generic_matrix(&ctx, 1, Family::Free).shift(&Rat::int(2), 1);
        let r = r_matrix(&ctx, 2, 0, 1, &Rat::int(3)).unwrap().lift::<PolySeries>();
        let rows = |m: &PolyMatrix| -> Vec<Vec<PolySeries>> {
            (0..2).map(|i| (0..2).map(|j| m.at(i, j).clone()).collect()).collect()
        };
        let tx = SuperTensor::from_slot_matrix(&ctx, 2, 0, &rows(&x));
        let ty = SuperTensor::from_slot_matrix(&ctx, 2, 1, &rows(&y));
        let full = tx.mul(&r).mul(&ty);
        for w in [[1u8, 1], [1, 2], [2, 1], [2, 2]] {
            let v = SuperVector::basis(&ctx, &w);
            let seq = v.apply_slot_matrix(1, &rows(&y)).apply_numeric(&super_permutation(&ctx, 2, 0, 1), &PolySeries::one());
            let seq = v.apply_slot_matrix(1, &rows(&y)).plus(&seq.scale(&Rat::new(-1, 3)));
            let seq = seq.apply_slot_matrix(0, &rows(&x));
            assert_eq!(seq, full.apply(&v), "{w:?}");
        }
    }
}
