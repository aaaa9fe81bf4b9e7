//! The twisted super Yangian, realized inside `Y(gl_{M|N})` by
//! `𝒮(u) = c(u) T(u) T^ι(-u)`, or generated freely when an identity only
//! involves generator matrices and their inverses.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::check::Verdict;
use crate::error::{KernelError, Result};
use crate::ncalg::{Family, MorphismKind, NcPoly, Sym};
use crate::perm;
use crate::rat::Rat;
use crate::ring::Coeff;
use crate::series::{expand_rational, linear_reciprocal, BiSeries, Series, SeriesMatrix};
use crate::tensor::{super_permutation, SuperContext, SuperTensor, SuperVector};
use crate::yangian::{
    bi_slot, fusion_projector, generic_matrix, lift_series, r_clearing, uv_linear, Factor, Morphism,
    MorphismImages, PolyMatrix, PolySeries, Yangian,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `c(u) = 1`: both defining relations hold.
    Strict,
    /// `c(u) = 1 + Σ c^{(r)} u^{-r}` with free central `c^{(r)}`: only the
    /// quaternary relation holds.
    Extended,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Strict => "strict",
            Mode::Extended => "extended",
        }
    }
}

/// Which partial transposition enters a quaternary relation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Flip {
    Super,
    Iota,
}

pub struct Twisted {
    pub base: Yangian,
    pub mode: Mode,
    /// Free generators instead of the realization in `Y(gl_{M|N})`.
    pub formal: bool,
    pub scalar: PolySeries,
    /// `𝒮(u)`.
    pub gen: PolyMatrix,
    /// `𝒮(u)^{-1}`.
    pub gen_inv: PolyMatrix,
}

fn central_series(depth: i64) -> PolySeries {
    let mut c = vec![NcPoly::one()];
    for r in 1..=depth {
        c.push(NcPoly::sym(Sym::central(r as u32)));
    }
    Series::from_coeffs(c, depth)
}

fn constant_matrix(ctx: &SuperContext, x: &[Vec<Rat>]) -> PolyMatrix {
    let par: Vec<u8> = ctx.indices().map(|i| ctx.parity(i)).collect();
    SeriesMatrix::from_fn(par.clone(), par, |i, j| Series::constant(NcPoly::constant(x[i][j].clone())))
}

fn sign(odd: bool) -> Rat {
    if odd {
        Rat::int(-1)
    } else {
        Rat::one()
    }
}

/// `𝒢₀ = Σ (-1)^{|i|} θ_i E_{i i'}`.
pub fn form_matrix(ctx: &SuperContext) -> Vec<Vec<Rat>> {
    let d = ctx.dim();
    let mut g = vec![vec![Rat::zero(); d]; d];
    for i in ctx.indices() {
        let v = sign(ctx.parity(i) == 1).mul(&Rat::int(ctx.theta(i)));
        g[i as usize - 1][ctx.bar(i) as usize - 1] = v;
    }
    g
}

/// `P^ι` on slots `a < b` of `slots`, transposed in slot `a`.
pub fn p_iota(ctx: &SuperContext, slots: usize, a: usize, b: usize) -> Result<SuperTensor<Rat>> {
    super_permutation(ctx, slots, a, b).partial_transpose_iota(a)
}

/// `(a u + b)^{-1}` as a polynomial-coefficient series.
fn reciprocal(a: i64, b: &Rat, prec: i64) -> Result<PolySeries> {
    Ok(lift_series(&linear_reciprocal::<Rat>(&Rat::int(a), b, prec)?))
}

fn rat_series(num: &[Rat], den: &[Rat], prec: i64) -> Result<PolySeries> {
    Ok(lift_series(&expand_rational::<Rat>(num, den, prec)?))
}

/// Arguments of the fused product: slot `k` carries `u + even[k]` on the
/// even block and `u + odd[k]` on the odd block; odd factors are
/// `𝒮̃(-u - odd[k] - shift)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    pub even: Vec<Rat>,
    pub odd: Vec<Rat>,
    pub shift: Rat,
}

impl Ladder {
    /// Ladder of the quantum Berezinian of the `(M|N)` algebra.
    pub fn full(m: usize, n: usize) -> Ladder {
        let (mi, ni) = (m as i64, n as i64);
        let shift = Rat::new(mi - ni, 2);
        Ladder {
            even: (1..=mi).map(|i| Rat::int(mi - ni - i)).collect(),
            odd: (1..=ni).map(|j| Rat::int(-ni - 1 + j).sub(&shift)).collect(),
            shift,
        }
    }

    /// The first `p` even and first `q` odd rungs of the full ladder.
    pub fn leading(m: usize, n: usize, p: usize, q: usize) -> Ladder {
        let f = Ladder::full(m, n);
        Ladder { even: f.even[..p].to_vec(), odd: f.odd[..q].to_vec(), shift: f.shift }
    }

    /// The rungs sitting at the given positions of the full ladder.
    pub fn positional(m: usize, n: usize, even: &[usize], odd: &[usize]) -> Ladder {
        let f = Ladder::full(m, n);
        Ladder {
            even: even.iter().map(|&k| f.even[k].clone()).collect(),
            odd: odd.iter().map(|&k| f.odd[k].clone()).collect(),
            shift: f.shift,
        }
    }

    pub fn slots(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    /// The same ladder at `u + c`.
    pub fn shifted(&self, c: &Rat) -> Ladder {
        Ladder {
            even: self.even.iter().map(|x| x.add(c)).collect(),
            odd: self.odd.iter().map(|x| x.add(c)).collect(),
            shift: self.shift.clone(),
        }
    }
}

impl Twisted {
    /// `𝒮(u) = c(u) T(u) T^ι(-u)` in `Y(gl_{M|N})`.
    pub fn model(m: usize, n: usize, depth: i64, mode: Mode) -> Result<Twisted> {
        let ctx = SuperContext::twisted(m, n)?;
        let base = Yangian::with_cutoff(ctx, depth, 2 * depth as u32)?;
        Twisted::over(base, mode)
    }

    pub fn over(base: Yangian, mode: Mode) -> Result<Twisted> {
        if !base.ctx.n.is_multiple_of(2) {
            return Err(KernelError::Config(format!("N = {} must be even", base.ctx.n)));
        }
        let scalar = match mode {
            Mode::Strict => PolySeries::one(),
            Mode::Extended => central_series(base.depth),
        };
        let reflected = base.at_matrix(&base.t, -1, &Rat::zero()).transpose_iota(&base.ctx);
        let gen = base.nf_matrix(&base.t.mul(&reflected).scale_series(&scalar))?;
        let gen_inv = base.invert_matrix(&gen)?;
        Ok(Twisted { base, mode, formal: false, scalar, gen, gen_inv })
    }

    /// Free generators `𝔰_ij^{(r)}`, `r ≤ depth`, with no relations.
    pub fn formal(m: usize, n: usize, depth: i64) -> Result<Twisted> {
        let ctx = SuperContext::twisted(m, n)?;
        let base = Yangian::with_cutoff(ctx.clone(), depth, 1)?;
        let gen = generic_matrix(&ctx, depth, Family::Free);
        let gen_inv = base.invert_matrix(&gen)?;
        Ok(Twisted { base, mode: Mode::Extended, formal: true, scalar: PolySeries::one(), gen, gen_inv })
    }

    pub fn ctx(&self) -> &SuperContext {
        &self.base.ctx
    }

    pub fn depth(&self) -> i64 {
        self.base.depth
    }

    pub fn m(&self) -> usize {
        self.base.ctx.m
    }

    pub fn n(&self) -> usize {
        self.base.ctx.n
    }

    /// `(M - N)/2`.
    pub fn half_super_dim(&self) -> Rat {
        Rat::new(self.base.super_dim(), 2)
    }

    fn require_model(&self, what: &str) -> Result<()> {
        if self.formal {
            return Err(KernelError::InvalidArgument(format!("{what} needs the realization in Y(gl)")));
        }
        Ok(())
    }

    fn require_strict(&self, what: &str) -> Result<()> {
        self.require_model(what)?;
        if self.mode != Mode::Strict {
            return Err(KernelError::InvalidArgument(format!("{what} needs strict mode")));
        }
        Ok(())
    }

    /// `S(u) = 𝒮(u) 𝒢₀`.
    pub fn s_matrix(&self) -> Result<PolyMatrix> {
        let g = constant_matrix(self.ctx(), &form_matrix(self.ctx()));
        self.base.mul_matrix(&self.gen, &g)
    }

    /// `S(u)` assembled directly as `c(u) T(u) 𝒢₀ T^t(-u)`.
    pub fn s_matrix_direct(&self) -> Result<PolyMatrix> {
        self.require_model("the direct assembly")?;
        let y = &self.base;
        let g = constant_matrix(self.ctx(), &form_matrix(self.ctx()));
        let tt = y.at_matrix(&y.t, -1, &Rat::zero()).transpose_t();
        y.nf_matrix(&y.t.mul(&g).mul(&tt).scale_series(&self.scalar))
    }

    /// `s_ij(u)` by the entry formula
    /// `Σ_{a,b} (-1)^{|i||j|+|i||a|+|j|+|a|} g_ab t_ia(u) t_jb(-u)`.
    pub fn s_entry_expanded(&self, i: u8, j: u8) -> Result<PolySeries> {
        self.require_model("the entry formula")?;
        let ctx = self.ctx();
        let y = &self.base;
        let g = form_matrix(ctx);
        let neg = y.at_matrix(&y.t, -1, &Rat::zero());
        let mut acc = Series::exact_zero();
        for a in ctx.indices() {
            for b in ctx.indices() {
                let gab = &g[a as usize - 1][b as usize - 1];
                if gab.is_zero() {
                    continue;
                }
                let (pi, pj, pa) = (ctx.parity(i), ctx.parity(j), ctx.parity(a));
                let s = sign((pi & pj) ^ (pi & pa) ^ pj ^ pa == 1).mul(gab);
                acc = acc.add(&y.t.entry(i, a).mul(neg.entry(j, b)).scale_rat(&s));
            }
        }
        y.nf_series(&self.scalar.mul(&acc))
    }

    pub fn check_embedding(&self) -> Result<Verdict> {
        let a = self.s_matrix()?;
        let b = self.s_matrix_direct()?;
        let ctx = self.ctx().clone();
        for i in ctx.indices() {
            for j in ctx.indices() {
                let v = self.base.series_equal(a.entry(i, j), b.entry(i, j), &format!("S = 𝒮𝒢₀ entry ({i},{j})"))?;
                if !v.passed() {
                    return Ok(v);
                }
                let e = self.s_entry_expanded(i, j)?;
                let v = self.base.series_equal(&e, a.entry(i, j), &format!("entry formula ({i},{j})"))?;
                if !v.passed() {
                    return Ok(v);
                }
            }
        }
        Ok(Verdict::Pass)
    }
}

// ---------------------------------------------------------------------------
// defining relations

impl Twisted {
    pub fn quaternary_defect(&self, x: &PolyMatrix, flip: Flip, left: usize, right: usize) -> Result<SuperTensor<BiSeries<NcPoly>>> {
        quaternary_defect(self.ctx(), x, flip, left, right)
    }

    /// The quaternary relation for `S(u)` with transpositions `t_1` and `t_2`.
    pub fn check_quaternary_s(&self) -> Result<Verdict> {
        let s = self.s_matrix()?;
        self.base.tensor_vanishes(&self.quaternary_defect(&s, Flip::Super, 0, 1)?, "quaternary relation for S")
    }

    /// The quaternary relation for `𝒮(u)` with `ι_1` on both sides.
    pub fn check_quaternary_cal(&self) -> Result<Verdict> {
        self.base
            .tensor_vanishes(&self.quaternary_defect(&self.gen, Flip::Iota, 0, 0)?, "quaternary relation for 𝒮")
    }

    /// `S̃(-u-(M-N)/2)` with `t_2` on the left and `t_1` on the right.
    pub fn check_inverse_quaternary_s(&self) -> Result<Verdict> {
        let s = self.s_matrix()?;
        let inv = self.base.invert_matrix(&s)?;
        let x = self.base.at_matrix(&inv, -1, &self.half_super_dim().neg());
        self.base
            .tensor_vanishes(&self.quaternary_defect(&x, Flip::Super, 1, 0)?, "quaternary relation for S̃")
    }

    /// `𝒮̃(-u-(M-N)/2)` with `ι_1` on both sides.
    pub fn check_inverse_quaternary_cal(&self) -> Result<Verdict> {
        let x = self.varpi_matrix();
        self.base
            .tensor_vanishes(&self.quaternary_defect(&x, Flip::Iota, 0, 0)?, "quaternary relation for 𝒮̃")
    }

    /// `2u (J X^t(-u) - X(u)) - X(u) + X(-u)` for `X = S`, or the same with
    /// `X^ι` in place of `J X^t` for `X = 𝒮`.
    pub fn symmetry_defect(&self, flip: Flip) -> Result<PolyMatrix> {
        let x = match flip {
            Flip::Super => self.s_matrix()?,
            Flip::Iota => self.gen.clone(),
        };
        self.symmetry_defect_of(&x, flip)
    }

    /// The symmetry defect of an arbitrary matrix `x` playing the role of
    /// `S` or `𝒮`.
    pub fn symmetry_defect_of(&self, x: &PolyMatrix, flip: Flip) -> Result<PolyMatrix> {
        let y = &self.base;
        let ctx = self.ctx();
        let reflected = match flip {
            Flip::Super => {
                let mut r = y.at_matrix(x, -1, &Rat::zero()).transpose_t();
                for i in 0..ctx.dim() {
                    if ctx.parity(i as u8 + 1) == 1 {
                        for j in 0..ctx.dim() {
                            let e = r.at(i, j).scale_rat(&Rat::int(-1));
                            r.set(i, j, e);
                        }
                    }
                }
                r
            }
            Flip::Iota => y.at_matrix(x, -1, &Rat::zero()).transpose_iota(ctx),
        };
        let neg = y.at_matrix(x, -1, &Rat::zero());
        let main = reflected.sub(x).map(|s| s.mul_u_power(1).scale_rat(&Rat::int(2)));
        y.nf_matrix(&main.sub(x).add(&neg))
    }

    /// Lowest order at which some entry of `x` is nonzero in normal form.
    pub fn first_nonzero(&self, x: &PolyMatrix) -> Result<Option<(i64, u8, u8, NcPoly)>> {
        let mut best: Option<(i64, u8, u8, NcPoly)> = None;
        let ctx = self.ctx().clone();
        for i in ctx.indices() {
            for j in ctx.indices() {
                for (k, a) in &x.entry(i, j).coeffs {
                    if best.as_ref().is_some_and(|b| b.0 <= *k) {
                        break;
                    }
                    let r = self.base.nf(a)?;
                    if !r.is_empty() {
                        best = Some((*k, i, j, r));
                        break;
                    }
                }
            }
        }
        Ok(best)
    }

    pub fn check_symmetry(&self, flip: Flip) -> Result<Verdict> {
        let d = self.symmetry_defect(flip)?;
        self.defect_verdict(&d, "symmetry relation")
    }

    fn defect_verdict(&self, d: &PolyMatrix, what: &str) -> Result<Verdict> {
        Ok(match self.first_nonzero(d)? {
            None => Verdict::Pass,
            Some((k, i, j, p)) => Verdict::fail(format!("{what}: entry ({i},{j}) at u^-{k} is {p}")),
        })
    }

    /// `S(u) ↦ f(u) S(u)`: returns the verdicts for the quaternary and the
    /// symmetry relation of the image. The latter needs `f(u) = f(-u)`.
    pub fn check_mu_tw(&self, f: &Series<Rat>) -> Result<(Verdict, Verdict)> {
        self.require_strict("the rescaling automorphism")?;
        if f.lo() < 0 || f.get(0) != Rat::one() {
            return Err(KernelError::InvalidArgument("series must have leading term 1".into()));
        }
        let x = self.s_matrix()?.scale_series(&lift_series(f)).truncate(self.depth());
        let x = self.base.nf_matrix(&x)?;
        let quaternary = self
            .base
            .tensor_vanishes(&self.quaternary_defect(&x, Flip::Super, 0, 1)?, "quaternary relation for f S")?;
        let symmetry = self.defect_verdict(&self.symmetry_defect_of(&x, Flip::Super)?, "symmetry relation for f S")?;
        Ok((quaternary, symmetry))
    }

    /// `μ_f` on `Y(gl_{M|N})` restricts to `S(u) ↦ g(u) S(u)` with
    /// `g(u) = f(u) f(-u)` and sends `𝔷(u)` to `g(u+M-N) g(u)^{-1} 𝔷(u)`.
    pub fn check_mu_tw_center(&self, f: &Series<Rat>) -> Result<Verdict> {
        self.require_strict("the rescaling automorphism")?;
        let y = &self.base;
        let images = y.morphism(&Morphism::MulSeries(f.clone()))?;
        let g = lift_series(&f.mul(&f.substitute(-1, &Rat::zero(), self.depth())));
        let s = self.s_matrix()?;
        let expect = y.nf_matrix(&s.scale_series(&g).truncate(self.depth()))?;
        let ctx = self.ctx().clone();
        for i in ctx.indices() {
            for j in ctx.indices() {
                let v = y.series_equal(&y.apply_series(&images, s.entry(i, j))?, expect.entry(i, j), &format!("μ_f(s_{i}{j})"))?;
                if !v.passed() {
                    return Ok(v);
                }
            }
        }
        let z = self.z_tw()?;
        let ratio = y.mul(&y.at(&g, 1, &Rat::int(y.super_dim())), &y.invert_series(&g)?)?;
        y.series_equal(&y.apply_series(&images, &z)?, &y.mul(&ratio, &z)?, "μ_f(𝔷)")
    }

    /// Whether coefficients `1..=upto` of `x` are fixed by `μ_f`.
    pub fn is_mu_invariant(&self, x: &PolySeries, f: &Series<Rat>, upto: i64) -> Result<Verdict> {
        self.require_model("the invariance predicate")?;
        let y = &self.base;
        let images = y.morphism(&Morphism::MulSeries(f.clone()))?;
        let image = y.apply_series(&images, x)?;
        y.series_equal(&image.truncate(upto), &x.truncate(upto), "μ_f invariance")
    }
}

// ---------------------------------------------------------------------------
// center

impl Twisted {
    fn contraction(&self, first_inverse: bool) -> Result<PolyMatrix> {
        let y = &self.base;
        let ctx = self.ctx().clone();
        let s = self.s_matrix()?;
        let inv = y.invert_matrix(&s)?;
        let inv_neg = y.at_matrix(&inv, -1, &Rat::zero());
        let s_shift = y.at_matrix(&s, -1, &Rat::int(-y.super_dim()));
        let mut out = SeriesMatrix::square(&ctx);
        for i in ctx.indices() {
            for j in ctx.indices() {
                let mut acc = Series::exact_zero();
                for k in ctx.indices() {
                    let (pi, pj, pk) = (ctx.parity(i), ctx.parity(j), ctx.parity(k));
                    let sg = sign((pj & pk) ^ (pi & pk) ^ pi == 1);
                    let term = if first_inverse {
                        inv_neg.entry(j, k).mul(s_shift.entry(k, i))
                    } else {
                        s_shift.entry(j, k).mul(inv_neg.entry(k, i))
                    };
                    acc = acc.add(&term.scale_rat(&sg));
                }
                out.set(i as usize - 1, j as usize - 1, y.nf_series(&acc)?);
            }
        }
        Ok(out)
    }

    /// `𝔷(u) = z(u) z(-u-M+N)^{-1}`.
    pub fn z_tw(&self) -> Result<PolySeries> {
        self.require_model("the twisted center series")?;
        let y = &self.base;
        let z = y.z_series()?;
        let shift = Rat::int(-y.super_dim());
        y.mul(&z, &y.invert_series(&y.at(&z, -1, &shift))?)
    }

    /// The contraction `Σ_k ± s̃_jk(-u) s_ki(-u-M+N)` (or, with
    /// `first_inverse = false`, `Σ_k ± s_jk(-u-M+N) s̃_ki(-u)`) is scalar and
    /// equals `𝔷(u)`, times `c(-u-M+N) c(-u)^{-1}` in extended mode.
    pub fn check_center_contraction(&self, first_inverse: bool) -> Result<Verdict> {
        let what = if first_inverse { "center contraction s̃ s" } else { "center contraction s s̃" };
        let value = match self.base.scalar_value(&self.contraction(first_inverse)?, what) {
            Ok(v) => v,
            Err(KernelError::InvalidArgument(msg)) => return Ok(Verdict::fail(msg)),
            Err(e) => return Err(e),
        };
        let y = &self.base;
        let mut expect = self.z_tw()?;
        if self.mode == Mode::Extended {
            let shift = Rat::int(-y.super_dim());
            let ratio = y.at(&self.scalar, -1, &shift).mul(&y.invert_series(&y.at(&self.scalar, -1, &Rat::zero()))?);
            expect = y.mul(&ratio, &expect)?;
        }
        y.series_equal(&value, &expect, what)
    }

    /// `𝔷(u)` together with the vanishing of its first two coefficients.
    pub fn check_z_tw(&self) -> Result<(PolySeries, Verdict)> {
        let z = self.z_tw()?;
        let mut v = Verdict::Pass;
        for k in 1..=2.min(z.prec) {
            let c = self.base.nf(&z.get(k))?;
            if !c.is_empty() {
                v = v.and(Verdict::fail(format!("twisted center coefficient {k} is {c}")));
            }
        }
        Ok((z, v))
    }

    /// Coefficients of `S(u)` as elements of `Y(gl_{M|N})`.
    pub fn generator_images(&self, max_level: i64) -> Result<Vec<NcPoly>> {
        let s = self.s_matrix()?;
        let mut out = Vec::new();
        for r in 1..=max_level.min(self.depth()) {
            for e in &s.entries {
                let c = e.get(r);
                if !c.is_empty() {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// Coefficients `1..=upto` of `x` supercommute with every element of `scope`.
    pub fn commutes_with(&self, x: &PolySeries, upto: i64, scope: &[NcPoly]) -> Result<Verdict> {
        for k in 1..=upto.min(x.prec) {
            let c = x.get(k);
            for g in scope {
                let r = self.base.rules.super_commutator(&c, g)?;
                if !r.is_empty() {
                    return Ok(Verdict::fail(format!("coefficient u^-{k} fails to commute with {g}")));
                }
            }
        }
        Ok(Verdict::Pass)
    }
}

// ---------------------------------------------------------------------------
// fusion, minors and the quantum Berezinian

impl Twisted {
    /// `⟨𝒮_1,…,𝒮_p⟩·⟨𝒮̃_{p+1},…,𝒮̃_{p+q}⟩` as a list of factors.
    pub fn bracket_factors(&self, ladder: &Ladder) -> Result<Vec<Factor>> {
        let y = &self.base;
        let ctx = self.ctx();
        let (p, slots) = (ladder.even.len(), ladder.slots());
        let offsets: Vec<Rat> = ladder.even.iter().chain(ladder.odd.iter()).cloned().collect();
        let mut out = Vec::new();
        for k in 0..slots {
            let end = if k < p { p } else { slots };
            let x = if k < p {
                y.at_matrix(&self.gen, 1, &offsets[k])
            } else {
                y.at_matrix(&self.gen_inv, -1, &offsets[k].add(&ladder.shift).neg())
            };
            out.push(Factor::Slot(k, x));
            for l in k + 1..end {
                let c = reciprocal(2, &offsets[k].add(&offsets[l]), self.depth())?;
                out.push(Factor::Affine(vec![k, l], p_iota(ctx, slots, k, l)?, c));
            }
        }
        Ok(out)
    }

    /// `ℑ A^{(p|q)} ⟨…⟩⟨…⟩ ℑ e_lower`.
    pub fn fused_image(&self, ladder: &Ladder, lower: &[u8]) -> Result<SuperVector<PolySeries>> {
        let (p, q) = (ladder.even.len(), ladder.odd.len());
        let ctx = self.ctx();
        if lower.len() != p + q
            || lower.iter().enumerate().any(|(k, &i)| i == 0 || i as usize > ctx.dim() || (ctx.parity(i) == 1) != (k >= p))
        {
            return Err(KernelError::InvalidArgument(format!(
                "indices {lower:?} do not follow the block split {p}|{q}"
            )));
        }
        let factors = self.bracket_factors(ladder)?;
        self.base.apply_fused(SuperVector::basis(ctx, lower), &factors, p, q)
    }

    /// The quantum minor `𝒮^{upper}_{lower}(u)` for the given ladder.
    pub fn minor(&self, ladder: &Ladder, upper: &[u8], lower: &[u8]) -> Result<PolySeries> {
        if upper.len() != lower.len() {
            return Err(KernelError::InvalidArgument("minor needs as many upper as lower indices".into()));
        }
        Ok(self.fused_image(ladder, lower)?.get(upper))
    }

    /// `𝔅^tw(u)`, read off the fused product on `e_1 ⊗ ⋯ ⊗ e_{M+N}`. In the
    /// realization the image must be proportional to `ℑ A e_v`.
    pub fn berezinian_fusion(&self) -> Result<PolySeries> {
        let ctx = self.ctx().clone();
        let v: Vec<u8> = ctx.indices().collect();
        let ladder = Ladder::full(self.m(), self.n());
        let img = self.fused_image(&ladder, &v)?;
        let b = img.get(&v);
        if self.formal {
            return Ok(b);
        }
        let reference = fusion_projector(&ctx, self.m(), self.n())?.apply(&SuperVector::basis(&ctx, &v));
        for (w, s) in &img.entries {
            if !s.sub(&b.scale_rat(&reference.get(w))).coeffs.is_empty() {
                return Err(KernelError::InvalidArgument(format!(
                    "twisted fused image is not proportional to the symmetrized vector at {:?}",
                    w.as_slice()
                )));
            }
        }
        for w in reference.entries.keys() {
            if img.get(w).coeffs.is_empty() && !b.coeffs.is_empty() {
                return Err(KernelError::InvalidArgument(format!(
                    "twisted fused image misses component {:?}",
                    w.as_slice()
                )));
            }
        }
        Ok(b)
    }

    /// `((2u-M-N-1)/(2u-M-1)) 𝔅(u) 𝔓(u)` for the underlying Yangian.
    pub fn berezinian_factorized(&self) -> Result<PolySeries> {
        self.require_strict("the factorized form")?;
        let y = &self.base;
        let (m, n) = (self.m() as i64, self.n() as i64);
        let bz = y.berezinian_fusion()?;
        let reflected = y.p_series(&bz)?;
        let f = rat_series(&[Rat::int(-m - n - 1), Rat::int(2)], &[Rat::int(-m - 1), Rat::int(2)], self.depth())?;
        y.mul(&f, &y.mul(&bz, &reflected)?)
    }

    /// `𝔰^ι_ij(x)` at `x = εu + c`.
    fn iota_entry(&self, i: u8, j: u8, eps: i64, c: &Rat) -> PolySeries {
        let ctx = self.ctx();
        let s = sign((ctx.parity(i) & ctx.parity(j)) ^ ctx.parity(i) == 1)
            .mul(&Rat::int(ctx.theta(i) * ctx.theta(j)));
        self.base.at(self.gen.entry(ctx.bar(j), ctx.bar(i)), eps, c).scale_rat(&s)
    }

    /// `𝔰^♮_ij(u + a) = (1 + 𝔠) s̃_ij(-u-a) + 𝔠 θ_i θ_j s̃_{j'i'}(-u-a)` with
    /// `𝔠 = 1/(-2u - 2a + M - N - 1)`.
    pub fn natural_entry(&self, i: u8, j: u8, a: &Rat) -> Result<PolySeries> {
        let ctx = self.ctx();
        let y = &self.base;
        let (m, n) = (self.m() as i64, self.n() as i64);
        let c = reciprocal(-2, &a.mul(&Rat::int(-2)).add(&Rat::int(m - n - 1)), self.depth())?;
        let direct = y.at(self.gen_inv.entry(i, j), -1, &a.neg());
        let swapped = y
            .at(self.gen_inv.entry(ctx.bar(j), ctx.bar(i)), -1, &a.neg())
            .scale_rat(&Rat::int(ctx.theta(i) * ctx.theta(j)));
        y.nf_series(&direct.add(&c.mul(&direct)).add(&c.mul(&swapped)))
    }

    /// The double sum over `S_M` and `S_N` with `σ' = Ω(σ)`.
    pub fn berezinian_explicit(&self) -> Result<PolySeries> {
        let y = &self.base;
        let (m, n) = (self.m(), self.n());
        let (mi, ni) = (m as i64, n as i64);
        let half = m / 2;
        let mut even = PolySeries::one();
        if m > 0 {
            // factor k (1-based): 𝔰^ι at -w_k for k ≤ ⌊M/2⌋, 𝔰 at w_k after
            let factor = |k: usize, i: u8, j: u8| -> PolySeries {
                let w = Rat::int(mi - ni - k as i64);
                if k <= half {
                    self.iota_entry(i, j, -1, &w.neg())
                } else {
                    y.at(self.gen.entry(i, j), 1, &w)
                }
            };
            even = Series::exact_zero();
            for s in perm::enumerate(m)? {
                let sp = if m >= 2 { perm::omega(&s)? } else { s.clone() };
                let mut prod = PolySeries::one();
                for k in 1..=m {
                    prod = y.mul(&prod, &factor(k, s[k - 1] as u8, sp[k - 1] as u8))?;
                }
                let sg = perm::sign(&s) * perm::sign(&sp);
                even = even.add(&prod.scale_rat(&Rat::int(sg as i64)));
            }
        }
        let mut odd = PolySeries::one();
        if n > 0 {
            let half_n = n / 2;
            odd = Series::exact_zero();
            for s in perm::enumerate(n)? {
                let sp = if n >= 2 { perm::omega(&s)? } else { s.clone() };
                let mut prod = PolySeries::one();
                for k in 1..=n {
                    let (i, j) = ((m + s[k - 1]) as u8, (m + sp[k - 1]) as u8);
                    let wbar = Rat::int(-ni - 1 + k as i64);
                    let f = if k <= half_n {
                        self.natural_entry(i, j, &wbar)?
                    } else {
                        y.at(self.gen_inv.entry(i, j), -1, &wbar.neg())
                    };
                    prod = y.mul(&prod, &f)?;
                }
                let sg = perm::sign(&s) * perm::sign(&sp);
                odd = odd.add(&prod.scale_rat(&Rat::int(sg as i64)));
            }
        }
        y.mul(&even, &odd)
    }

    /// `𝔷(u) 𝔅^tw(u) = r(u) 𝔅^tw(u+1)` with
    /// `r = (2u-M-N-1)(2u-M+1) / ((2u-M-N+1)(2u-M-1))`.
    pub fn check_liouville(&self, z: &PolySeries, berezinian: &PolySeries) -> Result<Verdict> {
        let y = &self.base;
        let (m, n) = (self.m() as i64, self.n() as i64);
        let r = rat_series(
            &poly_mul(&[Rat::int(-m - n - 1), Rat::int(2)], &[Rat::int(-m + 1), Rat::int(2)]),
            &poly_mul(&[Rat::int(-m - n + 1), Rat::int(2)], &[Rat::int(-m - 1), Rat::int(2)]),
            self.depth(),
        )?;
        let lhs = y.mul(z, berezinian)?;
        let rhs = y.mul(&r, &y.at(berezinian, 1, &Rat::one()))?;
        y.series_equal(&lhs, &rhs, "twisted Liouville formula")
    }
}

/// `((u-v) - P) X_1(u) ((u+v) + P^{τ_a}) X_2(v) - X_2(v) ((u+v) + P^{τ_b}) X_1(u) ((u-v) - P)`,
/// the quaternary relation cleared of denominators, for a matrix over `ctx`.
pub fn quaternary_defect(
    ctx: &SuperContext,
    x: &PolyMatrix,
    flip: Flip,
    left: usize,
    right: usize,
) -> Result<SuperTensor<BiSeries<NcPoly>>> {
    let p = super_permutation(ctx, 2, 0, 1);
    let flipped = |slot: usize| -> Result<SuperTensor<Rat>> {
        match flip {
            Flip::Super => Ok(p.partial_transpose_t(slot)),
            Flip::Iota => p.partial_transpose_iota(slot),
        }
    };
    let sum = SuperTensor::unit(ctx, 2).scale_by(&uv_linear(1, 1, &Rat::zero()));
    let a = sum.add(&flipped(left)?.lift());
    let b = sum.add(&flipped(right)?.lift());
    let x1 = bi_slot(ctx, 2, 0, x, false);
    let x2 = bi_slot(ctx, 2, 1, x, true);
    let r = r_clearing(ctx);
    Ok(r.mul(&x1).mul(&a).mul(&x2).sub(&x2.mul(&b).mul(&x1).mul(&r)))
}

/// Product of ascending coefficient lists.
pub fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// the extended algebra: ℰ(u), ϖ and ψ_K

impl Twisted {
    /// `(𝒮^ι(u) - 𝒮(u)/(2u)) 𝒮(-u)^{-1}`, which must be scalar.
    pub fn e_series_closed(&self) -> Result<PolySeries> {
        let y = &self.base;
        let ctx = self.ctx();
        let iota = self.gen.transpose_iota(ctx);
        let half = self.gen.map(|s| s.mul_u_power(-1).scale_rat(&Rat::new(1, 2)));
        let inv_neg = y.at_matrix(&self.gen_inv, -1, &Rat::zero());
        let e = y.mul_matrix(&iota.sub(&half), &inv_neg)?;
        y.scalar_value(&e, "closed form of ℰ")
    }

    /// `ℰ(u)` from `𝒮̃_2(-u) R(2u) 𝒮_1(u) P^ι`: the operator is applied to
    /// `P^ι (e_1 ⊗ e_{1'})`, and the image must be a multiple of it.
    pub fn e_series_relation(&self) -> Result<PolySeries> {
        let y = &self.base;
        let ctx = self.ctx().clone();
        let piota = p_iota(&ctx, 2, 0, 1)?;
        let start_rat = piota.apply(&SuperVector::basis(&ctx, &[1, ctx.bar(1)]));
        let start = start_rat.map(|q| q.clone());
        let mut lifted = SuperVector::zero(&ctx, 2);
        for (k, q) in &start.entries {
            lifted.add(k, Series::constant(NcPoly::constant(q.clone())));
        }
        let minus_half = reciprocal(-2, &Rat::zero(), self.depth())?;
        let factors = vec![
            Factor::Slot(1, y.at_matrix(&self.gen_inv, -1, &Rat::zero())),
            Factor::Affine(vec![0, 1], super_permutation(&ctx, 2, 0, 1), minus_half),
            Factor::Slot(0, self.gen.clone()),
        ];
        let img = y.apply_chain(lifted, &factors)?;
        let (key, q) = start
            .entries
            .iter()
            .min_by(|a, b| a.0.cmp(b.0))
            .map(|(k, q)| (k.clone(), q.clone()))
            .ok_or_else(|| KernelError::InvalidArgument("P^ι vanishes on the test vector".into()))?;
        let e = img.get(&key).scale_rat(&q.recip().unwrap());
        for (k, s) in &img.entries {
            let expect = e.scale_rat(&start.get(k));
            if !y.nf_series(&s.sub(&expect))?.coeffs.is_empty() {
                return Err(KernelError::InvalidArgument(format!(
                    "image of P^ι is not a multiple of it at {:?}",
                    k.as_slice()
                )));
            }
        }
        for k in start.entries.keys() {
            if img.get(k).coeffs.is_empty() && !e.coeffs.is_empty() {
                return Err(KernelError::InvalidArgument(format!("image of P^ι misses {:?}", k.as_slice())));
            }
        }
        Ok(e)
    }

    /// `1 - 1/(2u)`, times `c(u) c(-u)^{-1}` in extended mode.
    pub fn e_series_expected(&self) -> Result<PolySeries> {
        self.require_model("the expected ℰ")?;
        let y = &self.base;
        let base = rat_series(&[Rat::int(-1), Rat::int(2)], &[Rat::zero(), Rat::int(2)], self.depth())?;
        if self.mode == Mode::Strict {
            return Ok(base);
        }
        let ratio = self.scalar.mul(&y.invert_series(&y.at(&self.scalar, -1, &Rat::zero()))?);
        y.mul(&ratio, &base)
    }

    /// `𝒮̃(-u-(M-N)/2)`, the image of `𝒮(u)` under `ϖ`.
    pub fn varpi_matrix(&self) -> PolyMatrix {
        self.base.at_matrix(&self.gen_inv, -1, &self.half_super_dim().neg())
    }

    /// Free generators sent to their `ϖ`-images in this algebra.
    pub fn varpi_images(&self) -> MorphismImages {
        MorphismImages::from_matrix(self.ctx(), self.depth(), &self.varpi_matrix(), Family::Free, MorphismKind::Hom)
    }

    /// Free generators sent to the generators of this algebra.
    pub fn realization(&self) -> MorphismImages {
        MorphismImages::from_matrix(self.ctx(), self.depth(), &self.gen, Family::Free, MorphismKind::Hom)
    }

    /// `ϖ² = 1` on the free generators: requires a formal algebra.
    pub fn check_varpi_involution(&self) -> Result<Verdict> {
        if !self.formal {
            return Err(KernelError::InvalidArgument("ϖ² is checked on free generators".into()));
        }
        let img = self.varpi_images();
        let ctx = self.ctx().clone();
        for r in 1..=self.depth() as u32 {
            for i in ctx.indices() {
                for j in ctx.indices() {
                    let g = Sym::free(&ctx, i, j, r);
                    let twice = img.apply(&img.apply(&NcPoly::sym(g)));
                    if twice != NcPoly::sym(g) {
                        return Ok(Verdict::fail(format!("ϖ² moves {g} to {twice}")));
                    }
                }
            }
        }
        Ok(Verdict::Pass)
    }

    /// `D(u) - C(u) A(u)^{-1} B(u)` for the leading `K × K` block `A`, at `u - K/2`.
    pub fn psi_matrix(&self, k: usize) -> Result<PolyMatrix> {
        let d = self.ctx().dim();
        if k > self.m() {
            return Err(KernelError::InvalidArgument(format!("K = {k} exceeds M = {}", self.m())));
        }
        let y = &self.base;
        let lead: Vec<usize> = (0..k).collect();
        let rest: Vec<usize> = (k..d).collect();
        let mut out = self.gen.submatrix(&rest, &rest);
        if k > 0 {
            let a = self.gen.submatrix(&lead, &lead);
            let b = self.gen.submatrix(&lead, &rest);
            let c = self.gen.submatrix(&rest, &lead);
            let ainv = a.invert_with(self.depth(), |p| y.nf(p))?;
            out = y.nf_matrix(&out.sub(&c.mul(&ainv).mul(&b)))?;
        }
        Ok(y.at_matrix(&out, 1, &Rat::new(-(k as i64), 2)))
    }

    /// Free generators of the `(M-K|N)` algebra sent to their `ψ_K`-images here.
    pub fn psi_images(&self, k: usize) -> Result<MorphismImages> {
        let small = SuperContext::twisted(self.m() - k.min(self.m()), self.n())?;
        Ok(MorphismImages::from_matrix(&small, self.depth(), &self.psi_matrix(k)?, Family::Free, MorphismKind::Hom))
    }

    /// `ϖ_{big} ∘ ν_K ∘ ϖ_{small}` on the `(M-K|N)` free generators, computed
    /// from inverse blocks.
    pub fn psi_via_varpi(&self, k: usize) -> Result<MorphismImages> {
        let y = &self.base;
        let (m, n) = (self.m() - k, self.n());
        let d = self.ctx().dim();
        let rest: Vec<usize> = (k..d).collect();
        let h_small = Rat::new(m as i64 - n as i64, 2);
        // ν_K ∘ ϖ_small: 𝒮(u) ↦ D(-u-h)^{-1}
        let block = self.gen.submatrix(&rest, &rest);
        let block_inv = block.invert_with(self.depth(), |p| y.nf(p))?;
        let stage = y.at_matrix(&block_inv, -1, &h_small.neg());
        // ϖ_big on the entries of D
        let vimg = self.varpi_images();
        let out = y.nf_matrix(&stage.map(|s| vimg.apply_series(s)))?;
        let small = SuperContext::twisted(m, n)?;
        Ok(MorphismImages::from_matrix(&small, self.depth(), &out, Family::Free, MorphismKind::Hom))
    }
}

/// `𝒮_{K+i,K+j}(u)` of `big` satisfies the quaternary relation of the
/// `(M-K|N)` algebra, i.e. the index shift is a homomorphism. With
/// `psi = true` the same is asked of the `ψ_K` image.
pub fn check_shift_embedding(big: &Twisted, k: usize, psi: bool) -> Result<Verdict> {
    if k > big.m() {
        return Err(KernelError::InvalidArgument(format!("K = {k} exceeds M = {}", big.m())));
    }
    let small = SuperContext::twisted(big.m() - k, big.n())?;
    let x = if psi {
        big.psi_matrix(k)?
    } else {
        let rest: Vec<usize> = (k..big.ctx().dim()).collect();
        big.gen.submatrix(&rest, &rest)
    };
    let what = if psi { "quaternary relation for the ψ image" } else { "quaternary relation for the shifted block" };
    big.base.tensor_vanishes(&quaternary_defect(&small, &x, Flip::Iota, 0, 0)?, what)
}

/// `ψ_{K₁} ∘ ψ_{K₂} = ψ_{K₁+K₂}` on the free generators of `(M|N)`.
pub fn check_psi_composition(m: usize, n: usize, k1: usize, k2: usize, depth: i64) -> Result<Verdict> {
    let mid = Twisted::formal(m + k2, n, depth)?;
    let big = Twisted::formal(m + k1 + k2, n, depth)?;
    let inner = mid.psi_images(k2)?;
    let outer = big.psi_images(k1)?;
    let direct = big.psi_images(k1 + k2)?;
    let small = SuperContext::twisted(m, n)?;
    for r in 1..=depth as u32 {
        for i in small.indices() {
            for j in small.indices() {
                let g = Sym::free(&small, i, j, r);
                let a = big.base.nf(&outer.apply(&inner.apply(&NcPoly::sym(g))))?;
                let b = big.base.nf(&direct.apply(&NcPoly::sym(g)))?;
                if a != b {
                    return Ok(Verdict::fail(format!("ψ composition differs on {g}")));
                }
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Images of two morphisms agree on all free generators they define.
pub fn same_images(a: &MorphismImages, b: &MorphismImages, what: &str) -> Verdict {
    let mut keys: Vec<&Sym> = a.images.keys().collect();
    keys.sort();
    for k in keys {
        match b.images.get(k) {
            Some(p) if *p == a.images[k] => {}
            _ => return Verdict::fail(format!("{what}: images of {k} differ")),
        }
    }
    Verdict::Pass
}

/// Applies generator images to a formal series and normalizes in `target`.
pub fn transport(target: &Twisted, images: &MorphismImages, s: &PolySeries) -> Result<PolySeries> {
    target.base.nf_series(&images.apply_series(s))
}

/// Conventions for the arguments of a quantum minor that is not the full
/// Berezinian.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum MinorLadder {
    /// The first `p` even and `q` odd rungs of the ambient ladder.
    Leading,
    /// The rungs at the positions of the minor's indices.
    Positional,
    /// The full ladder of a `(p|q)` algebra, with the ambient odd shift.
    Local,
}

impl MinorLadder {
    pub const ALL: [MinorLadder; 3] = [MinorLadder::Leading, MinorLadder::Positional, MinorLadder::Local];

    /// Ladder for the principal minor on the contiguous indices `first..first+p+q`.
    pub fn ladder(self, m: usize, n: usize, first: usize, p: usize, q: usize) -> Ladder {
        match self {
            MinorLadder::Leading => Ladder::leading(m, n, p, q),
            MinorLadder::Positional => {
                let even: Vec<usize> = (first..first + p).collect();
                let odd: Vec<usize> = (first + p..first + p + q).map(|k| k - m).collect();
                Ladder::positional(m, n, &even, &odd)
            }
            MinorLadder::Local => {
                let mut l = Ladder::full(p, q);
                l.shift = Rat::new(m as i64 - n as i64, 2);
                l
            }
        }
    }
}

impl Twisted {
    /// The principal minor on indices `first+1 ..= first+len`.
    pub fn principal_minor(&self, convention: MinorLadder, first: usize, len: usize) -> Result<PolySeries> {
        let m = self.m();
        let idx: Vec<u8> = (first + 1..=first + len).map(|i| i as u8).collect();
        let p = idx.iter().filter(|&&i| (i as usize) <= m).count();
        let ladder = convention.ladder(m, self.n(), first, p, len - p);
        if len == 0 {
            return Ok(PolySeries::one());
        }
        self.minor(&ladder, &idx, &idx)
    }
}

/// Quantum Sylvester identity `ψ_K(𝔅^tw_{M|N}(u)) = 𝔅^tw_{K+M|N}(u+3K/2)
/// (𝒮^{1..K}_{1..K}(u+3K/2))^{-1}` in the algebra `big` of shape `(K+M|N)`.
pub fn check_sylvester(big: &Twisted, k: usize, convention: MinorLadder) -> Result<Verdict> {
    big.require_model("the Sylvester identity")?;
    let y = &big.base;
    let small = Twisted::formal(big.m() - k, big.n(), big.depth())?;
    let lhs = transport(big, &big.psi_images(k)?, &small.berezinian_fusion()?)?;
    let shift = Rat::new(3 * k as i64, 2);
    let whole = y.at(&big.berezinian_fusion()?, 1, &shift);
    let corner = y.at(&big.principal_minor(convention, 0, k)?, 1, &shift);
    let rhs = y.mul(&whole, &y.invert_series(&corner)?)?;
    y.series_equal(&lhs, &rhs, &format!("Sylvester identity for K = {k}"))
}

/// `𝔅^tw(u) ϖ(𝒮^{K+1..M+N}(x)) = 𝒮^{1..K}(u)` with `x = -u-(3M-5N)/2+1`
/// for `K ≤ M` and `x = -u+(M+N)/2-1` otherwise.
pub fn check_complementary_minors(tw: &Twisted, k: usize, convention: MinorLadder) -> Result<Verdict> {
    tw.require_model("the complementary minor identity")?;
    let (m, n) = (tw.m(), tw.n());
    let (mi, ni) = (m as i64, n as i64);
    let y = &tw.base;
    let formal = Twisted::formal(m, n, tw.depth())?;
    let d = m + n;
    let rest = formal.principal_minor(convention, k, d - k)?;
    let c = if k <= m { Rat::new(-(3 * mi - 5 * ni), 2).add(&Rat::one()) } else { Rat::new(mi + ni, 2).sub(&Rat::one()) };
    let rest_at = formal.base.at(&rest, -1, &c);
    let image = transport(tw, &tw.varpi_images(), &rest_at)?;
    let lhs = y.mul(&tw.berezinian_fusion()?, &image)?;
    let rhs = tw.principal_minor(convention, 0, k)?;
    y.series_equal(&lhs, &rhs, &format!("complementary minors for K = {k}"))
}

/// Coideal property: `Δ(S(u)) = T(u) S'(u) T^t(-u)` with `S'` built from
/// the second tensor factor.
pub fn check_coideal(tw: &Twisted) -> Result<Verdict> {
    tw.require_strict("the coideal check")?;
    let y = &tw.base;
    let ctx = tw.ctx().clone();
    let s = tw.s_matrix()?;
    let delta = y.coproduct();
    let image = y.nf_matrix(&s.map(|e| delta.apply_series(e)))?;
    let second = s.map(|e| e.map(|p| y.second_factor(p)));
    let tt = y.at_matrix(&y.t, -1, &Rat::zero()).transpose_t();
    let expect = y.nf_matrix(&y.t.mul(&second).mul(&tt))?;
    for i in ctx.indices() {
        for j in ctx.indices() {
            let v = y.series_equal(image.entry(i, j), expect.entry(i, j), &format!("coproduct of s_{i}{j}"))?;
            if !v.passed() {
                return Ok(v);
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Per-symbol summary used by reports.
pub fn image_sizes(images: &MorphismImages) -> FxHashMap<Sym, usize> {
    images.images.iter().map(|(k, v)| (*k, v.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn form_matrix_squares_to_the_parity_diagonal() {
        for (m, n) in [(1, 2), (2, 2), (3, 0), (0, 4)] {
            let ctx = SuperContext::twisted(m, n).unwrap();
            let g = form_matrix(&ctx);
            let d = ctx.dim();
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Rat::zero();
                    for k in 0..d {
                        acc = acc.add(&g[i][k].mul(&g[k][j]));
                    }
                    let want = if i != j {
                        Rat::zero()
                    } else if i < m {
                        Rat::one()
                    } else {
                        Rat::int(-1)
                    };
                    assert_eq!(acc, want, "({m}|{n}) entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn odd_n_is_rejected() {
        assert!(matches!(Twisted::model(1, 1, 2, Mode::Strict), Err(KernelError::Config(_))));
        assert!(Twisted::formal(2, 3, 1).is_err());
    }

    #[test]
    fn first_coefficient_by_hand() {
        // 𝒮^{(1)} = T^{(1)} - (T^{(1)})^ι, written out entrywise.
        let tw = Twisted::model(1, 2, 2, Mode::Strict).unwrap();
        let ctx = tw.ctx().clone();
        for i in ctx.indices() {
            for j in ctx.indices() {
                let (pi, pj) = (ctx.parity(i), ctx.parity(j));
                let s = sign((pi & pj) ^ pi == 1).mul(&Rat::int(ctx.theta(i) * ctx.theta(j)));
                let mut want = NcPoly::sym(Sym::t(&ctx, i, j, 1));
                want.add_poly_scaled(&NcPoly::sym(Sym::t(&ctx, ctx.bar(j), ctx.bar(i), 1)), &s.neg());
                assert_eq!(tw.gen.entry(i, j).get(1), want, "s_{i}{j}");
            }
        }
        assert_eq!(tw.gen.entry(1, 1).get(0), NcPoly::one());
        assert!(tw.gen.entry(1, 2).get(0).is_empty());
    }

    #[test]
    fn three_assemblies_of_s_agree() {
        for (m, n) in [(1, 2), (0, 2), (2, 0)] {
            let tw = Twisted::model(m, n, 2, Mode::Strict).unwrap();
            assert_eq!(tw.check_embedding().unwrap(), Verdict::Pass, "({m}|{n})");
        }
    }

    #[test]
    fn formal_generators_refuse_model_only_operations() {
        let f = Twisted::formal(1, 2, 1).unwrap();
        assert!(matches!(f.s_matrix_direct(), Err(KernelError::InvalidArgument(_))));
        assert!(f.z_tw().is_err());
    }

    #[test]
    fn extended_mode_carries_central_scalar() {
        let tw = Twisted::model(0, 2, 2, Mode::Extended).unwrap();
        assert_eq!(tw.scalar.get(2), NcPoly::sym(Sym::central(2)));
        assert_eq!(tw.check_quaternary_cal().unwrap(), Verdict::Pass);
    }

    #[test]
    fn ladder_shift_moves_both_blocks() {
        let l = Ladder::full(1, 2);
        let s = l.shifted(&Rat::new(1, 2));
        assert_eq!(s.slots(), l.slots());
        assert_eq!(s.shift, l.shift);
        for (a, b) in s.even.iter().chain(&s.odd).zip(l.even.iter().chain(&l.odd)) {
            assert_eq!(a.sub(b), Rat::new(1, 2));
        }
    }
}
