//! Named verification suites and the records they produce.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::check::Verdict;
use crate::error::{KernelError, Result};
use crate::ncalg::NcPoly;
use crate::perm;
use crate::rat::Rat;
use crate::series::Series;
use crate::tensor::{
    antisymmetrizer, berezinian_symmetrizer, block_pattern_projector, r_matrix, r_matrix_iota, r_product,
    super_permutation, symmetrizer, SuperContext, SuperTensor,
};
use crate::twisted::{
    check_coideal, check_complementary_minors, check_psi_composition, check_shift_embedding, check_sylvester,
    same_images, Flip, Ladder, MinorLadder, Mode, Twisted,
};
use crate::yangian::{Morphism, PolySeries, Yangian, MAX_DEPTH, MAX_DIM};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub depth: i64,
    pub mode: Mode,
    pub suites: Vec<String>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(m: usize, n: usize, depth: i64) -> RunConfig {
        RunConfig { m, n, depth, mode: Mode::Strict, suites: Vec::new(), seed: DEFAULT_SEED }
    }

    pub fn with_mode(mut self, mode: Mode) -> RunConfig {
        self.mode = mode;
        self
    }

    /// Resolves suite names and checks the shape bounds.
    pub fn validate(&self) -> Result<Vec<Suite>> {
        let suites: Vec<Suite> = if self.suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            self.suites.iter().map(|s| Suite::parse(s)).collect::<Result<_>>()?
        };
        if self.m + self.n == 0 || self.m + self.n > MAX_DIM {
            return Err(KernelError::Config(format!("M+N must lie in 1..={MAX_DIM}")));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return Err(KernelError::Config(format!("D must lie in 1..={MAX_DEPTH}")));
        }
        if !self.n.is_multiple_of(2) {
            if let Some(s) = suites.iter().find(|s| s.twisted()) {
                return Err(KernelError::Config(format!("suite {} needs even N, got N = {}", s.name(), self.n)));
            }
        }
        Ok(suites)
    }

    fn params(&self) -> String {
        format!("M={},N={},mode={}", self.m, self.n, self.mode.name())
    }
}

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub anchor: String,
    pub params: String,
    pub window: String,
    pub status: Status,
    /// First mismatch, or the reason for skipping.
    pub mismatch: Option<String>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub total_runtime_ms: u64,
}

impl Report {
    pub fn new(config: RunConfig, mut checks: Vec<CheckRecord>, total_runtime_ms: u64) -> Report {
        checks.sort_by(|a, b| (&a.suite, &a.name, &a.params).cmp(&(&b.suite, &b.name, &b.params)));
        Report { tool_version: env!("CARGO_PKG_VERSION").to_string(), config, checks, total_runtime_ms }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// Zeroes all timings so that reports can be compared byte for byte.
    pub fn without_timings(mut self) -> Report {
        self.total_runtime_ms = 0;
        for c in &mut self.checks {
            c.runtime_ms = 0;
        }
        self
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out += &format!("{status} {}/{} [{}; {}] {}ms\n", c.suite, c.name, c.params, c.window, c.runtime_ms);
            if let Some(m) = &c.mismatch {
                out += &format!("     {m}\n");
            }
        }
        let count = |s: Status| self.checks.iter().filter(|c| c.status == s).count();
        out += &format!(
            "{} passed, {} failed, {} skipped in {}ms\n",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skipped),
            self.total_runtime_ms
        );
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Rtt,
    Center,
    Berezinian,
    TwistedRelations,
    TwistedCenter,
    TwistedBerezinian,
    Extended,
    Sylvester,
    TensorLemmas,
    Morphisms,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::TensorLemmas,
        Suite::Rtt,
        Suite::Center,
        Suite::Berezinian,
        Suite::Morphisms,
        Suite::TwistedRelations,
        Suite::TwistedCenter,
        Suite::TwistedBerezinian,
        Suite::Extended,
        Suite::Sylvester,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rtt => "rtt",
            Suite::Center => "center",
            Suite::Berezinian => "berezinian",
            Suite::TwistedRelations => "twisted-relations",
            Suite::TwistedCenter => "twisted-center",
            Suite::TwistedBerezinian => "twisted-berezinian",
            Suite::Extended => "extended",
            Suite::Sylvester => "sylvester",
            Suite::TensorLemmas => "tensor-lemmas",
            Suite::Morphisms => "morphisms",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Suite::Rtt => "RTT relation on the window, rewriting confluence, inverse matrix",
            Suite::Center => "central series z(u) and its behaviour under τ, S and ρ",
            Suite::Berezinian => "explicit, fused and supertrace Berezinians, Liouville formula",
            Suite::TwistedRelations => "quaternary and symmetry relations of the twisted generators",
            Suite::TwistedCenter => "twisted central series and its centrality",
            Suite::TwistedBerezinian => "twisted Berezinian: fusion, factorized and explicit forms",
            Suite::Extended => "extended twisted algebra: ℰ(u) and the automorphism ϖ",
            Suite::Sylvester => "quasi-determinant map ψ_K and the quantum Sylvester identity",
            Suite::TensorLemmas => "R-matrix, permutation and symmetrizer identities",
            Suite::Morphisms => "automorphisms, coproduct and coideal property",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| KernelError::Config(format!("unknown suite '{s}'")))
    }

    /// Whether the suite needs the twisted setting (even `N`).
    pub fn twisted(self) -> bool {
        matches!(
            self,
            Suite::TwistedRelations | Suite::TwistedCenter | Suite::TwistedBerezinian | Suite::Extended | Suite::Sylvester
        )
    }

    pub fn run(self, cfg: &RunConfig, budget: Option<Duration>) -> Vec<CheckRecord> {
        let mut r = Runner::new(self.name(), cfg.params(), budget);
        let outcome = match self {
            Suite::Rtt => rtt(cfg, &mut r),
            Suite::Center => center(cfg, &mut r),
            Suite::Berezinian => berezinian(cfg, &mut r),
            Suite::TwistedRelations => twisted_relations(cfg, &mut r),
            Suite::TwistedCenter => twisted_center(cfg, &mut r),
            Suite::TwistedBerezinian => twisted_berezinian(cfg, &mut r),
            Suite::Extended => extended(cfg, &mut r),
            Suite::Sylvester => sylvester(cfg, &mut r),
            Suite::TensorLemmas => tensor_lemmas(cfg, &mut r),
            Suite::Morphisms => morphisms(cfg, &mut r),
        };
        if let Err(e) = outcome {
            r.record("setup", "construction of the models", "", Status::Fail, Some(e.to_string()), 0);
        }
        r.records
    }
}

/// Collects records for one suite and enforces its wall-clock budget.
pub struct Runner {
    suite: &'static str,
    params: String,
    start: Instant,
    budget: Option<Duration>,
    pub records: Vec<CheckRecord>,
}

impl Runner {
    pub fn new(suite: &'static str, params: String, budget: Option<Duration>) -> Runner {
        Runner { suite, params, start: Instant::now(), budget, records: Vec::new() }
    }

    fn record(&mut self, name: &str, anchor: &str, window: &str, status: Status, mismatch: Option<String>, ms: u64) {
        self.records.push(CheckRecord {
            suite: self.suite.to_string(),
            name: name.to_string(),
            anchor: anchor.to_string(),
            params: self.params.clone(),
            window: window.to_string(),
            status,
            mismatch,
            runtime_ms: ms,
        });
    }

    fn over_budget(&self) -> bool {
        self.budget.is_some_and(|b| self.start.elapsed() > b)
    }

    /// Runs one check unless the budget is spent. Kernel errors count as
    /// failures.
    pub fn check<F: FnOnce() -> Result<Verdict>>(&mut self, name: &str, anchor: &str, window: &str, f: F) {
        if self.over_budget() {
            self.record(name, anchor, window, Status::Skipped, Some("skipped (budget)".into()), 0);
            return;
        }
        let t = Instant::now();
        let (status, mismatch) = match f() {
            Ok(Verdict::Pass) => (Status::Pass, None),
            Ok(Verdict::Fail(m)) => (Status::Fail, Some(m)),
            Err(e) => (Status::Fail, Some(e.to_string())),
        };
        self.record(name, anchor, window, status, mismatch, t.elapsed().as_millis() as u64);
    }

    /// A check that does not apply to this configuration.
    pub fn skip(&mut self, name: &str, anchor: &str, reason: &str) {
        self.record(name, anchor, "", Status::Skipped, Some(reason.to_string()), 0);
    }
}

fn window(d: i64) -> String {
    format!("u^0..u^-{d}")
}

fn bi_window(d: i64) -> String {
    format!("u^a v^b, a,b <= {d}")
}

fn expect_eq(a: &SuperTensor<Rat>, b: &SuperTensor<Rat>, what: &str) -> Verdict {
    if a == b {
        Verdict::Pass
    } else {
        Verdict::fail(format!("{what}: tensors differ"))
    }
}

fn random_point(rng: &mut impl Rng) -> Rat {
    loop {
        let q = Rat::new(rng.gen_range(-40..=40), rng.gen_range(1..=9));
        if !q.is_zero() {
            return q;
        }
    }
}

fn expect_differ(v: Verdict, what: &str) -> Verdict {
    if v.passed() {
        Verdict::fail(format!("{what}: expected a nonzero difference"))
    } else {
        Verdict::Pass
    }
}

/// Coefficients `1..=upto` of the series vanish.
fn low_coefficients_vanish(y: &Yangian, s: &PolySeries, upto: i64, what: &str) -> Result<Verdict> {
    for k in 1..=upto.min(s.prec) {
        let c = y.nf(&s.get(k))?;
        if !c.is_empty() {
            return Ok(Verdict::fail(format!("{what}: coefficient of u^-{k} is {c}")));
        }
    }
    Ok(Verdict::Pass)
}

// ---------------------------------------------------------------------------

fn tensor_lemmas(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let ctx = SuperContext::new(cfg.m, cfg.n)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<(Rat, Rat)> = (0..20)
        .map(|_| loop {
            let (u, v) = (random_point(&mut rng), random_point(&mut rng));
            if !u.add(&v).is_zero() {
                break (u, v);
            }
        })
        .collect();
    r.check("yang-baxter", "Yang-Baxter equation", "20 random rational points", || {
        for (u, v) in &points {
            let r12 = r_matrix(&ctx, 3, 0, 1, u)?;
            let r13 = r_matrix(&ctx, 3, 0, 2, &u.add(v))?;
            let r23 = r_matrix(&ctx, 3, 1, 2, v)?;
            if r12.mul(&r13).mul(&r23) != r23.mul(&r13).mul(&r12) {
                return Ok(Verdict::fail(format!("Yang-Baxter equation fails at u = {u}, v = {v}")));
            }
        }
        Ok(Verdict::Pass)
    });
    r.check("permutation-involution", "P^2 = 1", "exact", || {
        let p = super_permutation(&ctx, 2, 0, 1);
        Ok(expect_eq(&p.mul(&p), &SuperTensor::unit(&ctx, 2), "P^2"))
    });
    r.check("symmetrizer-idempotents", "G^(m) and H^(m) square to m! times themselves", "m <= 4", || {
        for m in 2..=4 {
            let f = Rat::int((1..=m as i64).product());
            let g = antisymmetrizer(&ctx, m)?;
            let h = symmetrizer(&ctx, m)?;
            if g.mul(&g) != g.scale(&f) {
                return Ok(Verdict::fail(format!("G^({m}) is not quasi-idempotent")));
            }
            if h.mul(&h) != h.scale(&f) {
                return Ok(Verdict::fail(format!("H^({m}) is not quasi-idempotent")));
            }
        }
        Ok(Verdict::Pass)
    });
    r.check("fusion-formula", "fused R-matrices at unit steps give G^(m) and H^(m)", "m <= 4", || {
        for m in 2..=4 {
            let down: Vec<Rat> = (0..m).map(|i| Rat::int(-(i as i64))).collect();
            let up: Vec<Rat> = (0..m).map(|i| Rat::int(i as i64)).collect();
            if r_product(&ctx, &down)? != antisymmetrizer(&ctx, m)? {
                return Ok(Verdict::fail(format!("R(u_1..u_{m}) with unit descent differs from G^({m})")));
            }
            if r_product(&ctx, &up)? != symmetrizer(&ctx, m)? {
                return Ok(Verdict::fail(format!("R(u_1..u_{m}) with unit ascent differs from H^({m})")));
            }
        }
        Ok(Verdict::Pass)
    });
    let unitary_points: Vec<Rat> = (0..5).map(|_| random_point(&mut rng)).collect();
    r.check("r-unitarity", "R(u) R(-u) = 1 - u^-2", "5 random rational points", || {
        for u in &unitary_points {
            let lhs = r_matrix(&ctx, 2, 0, 1, u)?.mul(&r_matrix(&ctx, 2, 0, 1, &u.neg())?);
            let c = Rat::one().sub(&u.mul(u).recip().unwrap());
            if lhs != SuperTensor::unit(&ctx, 2).scale(&c) {
                return Ok(Verdict::fail(format!("R(u) R(-u) at u = {u}")));
            }
        }
        Ok(Verdict::Pass)
    });
    r.check("block-projector", "ℑ is idempotent and commutes with A^(M|N)", "exact", || {
        let j = block_pattern_projector(&ctx, cfg.m, cfg.n);
        let a = berezinian_symmetrizer(&ctx, cfg.m, cfg.n)?;
        Ok(expect_eq(&j.mul(&j), &j, "ℑ^2").and(expect_eq(&j.mul(&a), &a.mul(&j), "ℑ A")))
    });
    if !cfg.n.is_multiple_of(2) {
        r.skip("iota-unitarity", "R^ι(u) R^ι(-u+M-N) = 1", "ι needs an even odd block");
        r.skip("iota-involution", "(X^ι)^ι = X", "ι needs an even odd block");
        return Ok(());
    }
    let sd = Rat::int(cfg.m as i64 - cfg.n as i64);
    r.check("iota-unitarity", "R^ι(u) R^ι(-u+M-N) = 1", "5 random rational points", || {
        for u in &unitary_points {
            let other = u.neg().add(&sd);
            if other.is_zero() {
                continue;
            }
            let lhs = r_matrix_iota(&ctx, 2, 0, 1, u)?.mul(&r_matrix_iota(&ctx, 2, 0, 1, &other)?);
            if lhs != SuperTensor::unit(&ctx, 2) {
                return Ok(Verdict::fail(format!("R^ι(u) R^ι(-u+M-N) at u = {u}")));
            }
        }
        Ok(Verdict::Pass)
    });
    r.check("iota-involution", "(X^ι)^ι = X", "random sparse tensors", || {
        let dim = ctx.dim() as u8;
        for _ in 0..10 {
            let mut x = SuperTensor::<Rat>::zero(&ctx, 2);
            for _ in 0..6 {
                let rows = [rng.gen_range(1..=dim), rng.gen_range(1..=dim)];
                let cols = [rng.gen_range(1..=dim), rng.gen_range(1..=dim)];
                x.add_entry(&rows, &cols, Rat::int(rng.gen_range(-3..=3)));
            }
            for slot in 0..2 {
                if x.partial_transpose_iota(slot)?.partial_transpose_iota(slot)? != x {
                    return Ok(Verdict::fail("ι is not an involution"));
                }
            }
        }
        Ok(Verdict::Pass)
    });
    Ok(())
}

fn rtt(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let y = Yangian::new(cfg.m, cfg.n, cfg.depth)?;
    let d = cfg.depth;
    r.check("rtt-relation", "cleared RTT relation", &bi_window(d), || y.check_rtt());
    r.check("confluence", "rewriting is independent of the strategy", "200 random words", || {
        y.rules.confluence_sample(cfg.seed, 200)
    });
    r.check("inverse-matrix", "T(u) T̃(u) = T̃(u) T(u) = 1", &window(d), || {
        let one = crate::series::SeriesMatrix::identity(&y.ctx).truncate(d);
        let a = y.mul_matrix(&y.t, &y.t_tilde)?;
        let b = y.mul_matrix(&y.t_tilde, &y.t)?;
        Ok(if a == one && b == one { Verdict::Pass } else { Verdict::fail("T T̃ differs from the identity") })
    });
    Ok(())
}

fn center(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let y = Yangian::new(cfg.m, cfg.n, cfg.depth)?;
    let d = cfg.depth;
    let z = match y.z_series() {
        Ok(z) => z,
        Err(e) => {
            r.check("z-scalar", "the contraction is scalar", &window(d), || Err(e));
            return Ok(());
        }
    };
    r.check("z-scalar", "both contractions give the same scalar series", &window(d), || {
        let dual = y.scalar_value(&y.centre_contraction_dual()?, "dual contraction")?;
        y.series_equal(&z, &dual, "z(u) from the two contractions")
    });
    r.check("z-first-coefficient", "z^(1) = 0", "u^-1", || low_coefficients_vanish(&y, &z, 1, "z(u)"));
    r.check("z-centrality", "coefficients of z(u) are central", &window(d), || {
        y.centrality(&z, d, &y.generators(d as u32))
    });
    r.check("z-transpose", "τ(z(u)) = z(u)", &window(d), || y.check_transpose_z(&z));
    r.check("z-antipode", "S(z(u)) = z(u)^-1", &window(d), || y.check_antipode_z(&z));
    r.check("z-rho", "ρ(z(u)) z(-u-M+N) = 1", &window(d), || y.check_rho_z(&z));
    Ok(())
}

fn berezinian(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let y = Yangian::new(cfg.m, cfg.n, cfg.depth)?;
    let d = cfg.depth;
    let explicit = y.berezinian_explicit()?;
    r.check("fusion", "explicit Berezinian equals the fused one", &window(d), || {
        y.series_equal(&explicit, &y.berezinian_fusion()?, "explicit - fused")
    });
    r.check("supertrace", "supertrace realization", &window(d), || {
        let (st, norm) = y.berezinian_supertrace()?;
        y.series_equal(&st, &explicit.scale_rat(&norm), "supertrace - Str(ℑA) explicit")
    });
    if (cfg.m, cfg.n) == (1, 2) {
        r.check("closed-form", "closed form of the (1|2) Berezinian", &window(d), || {
            y.series_equal(&explicit, &y.berezinian_one_two()?, "explicit - closed form")
        });
    }
    r.check("liouville", "z(u) 𝔅(u) = 𝔅(u+1)", &window(d), || y.check_liouville(&y.z_series()?, &explicit));
    let reflected = y.p_series(&explicit)?;
    r.check("rho-reflection", "ρ(𝔅(u)) differs from 𝔅(-u+N+1) unless M = 0", &window(d), || {
        let v = y.series_equal(&reflected, &y.at(&explicit, -1, &Rat::int(cfg.n as i64 + 1)), "ρ(𝔅(u)) - 𝔅(-u+N+1)")?;
        Ok(if cfg.m == 0 { v } else { expect_differ(v, "ρ(𝔅(u)) - 𝔅(-u+N+1)") })
    });
    r.check("rho-reflection-shift", "ρ(𝔅(u)) = 𝔅(-u+N-M+1)", &window(d), || {
        let c = Rat::int(cfg.n as i64 - cfg.m as i64 + 1);
        y.series_equal(&reflected, &y.at(&explicit, -1, &c), "ρ(𝔅(u)) - 𝔅(-u+N-M+1)")
    });
    Ok(())
}

fn sample_morphisms(ctx: &SuperContext) -> Vec<Morphism> {
    let dim = ctx.dim();
    let mut b = vec![vec![Rat::zero(); dim]; dim];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = Rat::int(i as i64 + 1);
    }
    if ctx.m >= 2 {
        b[0][1] = Rat::new(1, 2);
    }
    vec![
        Morphism::MulSeries(Series::from_coeffs(vec![Rat::one(), Rat::int(2), Rat::new(-1, 3)], MAX_DEPTH)),
        Morphism::Shift(Rat::new(3, 2)),
        Morphism::Conjugate(b),
        Morphism::Negate,
        Morphism::Antipode,
        Morphism::Rho,
        Morphism::Star,
    ]
}

fn morphisms(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let y = Yangian::new(cfg.m, cfg.n, cfg.depth)?;
    let d = cfg.depth;
    for m in sample_morphisms(&y.ctx) {
        let name = format!("morphism-{}", m.name());
        r.check(&name, "images of the generators satisfy the defining relations", &window(d), || {
            y.check_images_satisfy_relations(&y.morphism(&m)?)
        });
    }
    r.check("morphism-transpose", "τ is an anti-homomorphism, not a homomorphism", &window(d), || {
        let tau = y.morphism(&Morphism::Transpose)?;
        let as_hom = crate::yangian::MorphismImages { kind: crate::ncalg::MorphismKind::Hom, ..tau.clone() };
        Ok(y.check_images_satisfy_relations(&tau)?.and(expect_differ(
            y.check_images_satisfy_relations(&as_hom)?,
            "τ applied as a homomorphism",
        )))
    });
    r.check("coproduct", "Δ is multiplicative", "40 random generator pairs", || y.check_coproduct(cfg.seed, 40));
    if !cfg.n.is_multiple_of(2) {
        r.skip("coideal", "Δ(S(u)) = T(u) S(u) T^t(-u)", "needs even N");
        r.skip("twisted-rescaling", "S(u) ↦ f(u) S(u)", "needs even N");
        return Ok(());
    }
    let tw = Twisted::over(y, Mode::Strict)?;
    r.check("coideal", "Δ(S(u)) = T(u) S(u) T^t(-u)", &window(d), || check_coideal(&tw));
    let f = Series::from_coeffs(vec![Rat::one(), Rat::one()], d);
    let even = f.mul(&f.substitute(-1, &Rat::zero(), d));
    r.check("twisted-rescaling-even", "S(u) ↦ g(u) S(u) for g(u) = f(u) f(-u)", &window(d), || {
        let (a, b) = tw.check_mu_tw(&even)?;
        Ok(a.and(b))
    });
    r.check("twisted-rescaling", "S(u) ↦ f(u) S(u) for f(u) = 1 + u^-1", &window(d), || {
        let (a, b) = tw.check_mu_tw(&f)?;
        Ok(a.and(b))
    });
    r.check("twisted-rescaling-center", "μ_f sends 𝔷(u) to g(u+M-N) g(u)^-1 𝔷(u)", &window(d), || {
        tw.check_mu_tw_center(&f)
    });
    Ok(())
}

fn twisted_relations(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let tw = Twisted::model(cfg.m, cfg.n, cfg.depth, cfg.mode)?;
    let d = cfg.depth;
    if cfg.mode == Mode::Strict {
        r.check("embedding", "S(u) = 𝒮(u) 𝒢₀ and the entry formula", &window(d), || tw.check_embedding());
    }
    r.check("quaternary-s", "quaternary relation for S(u)", &bi_window(d), || tw.check_quaternary_s());
    r.check("quaternary-iota", "quaternary relation for 𝒮(u)", &bi_window(d), || tw.check_quaternary_cal());
    r.check("quaternary-inverse-s", "quaternary relation for S̃(-u-(M-N)/2)", &bi_window(d), || {
        tw.check_inverse_quaternary_s()
    });
    r.check("quaternary-inverse-iota", "quaternary relation for 𝒮̃(-u-(M-N)/2)", &bi_window(d), || {
        tw.check_inverse_quaternary_cal()
    });
    match cfg.mode {
        Mode::Strict => {
            r.check("symmetry-s", "symmetry relation for S(u)", &window(d), || tw.check_symmetry(Flip::Super));
            r.check("symmetry-iota", "symmetry relation for 𝒮(u)", &window(d), || tw.check_symmetry(Flip::Iota));
            let ext = Twisted::model(cfg.m, cfg.n, 1, Mode::Extended)?;
            r.check("symmetry-negative-control", "free c(u) breaks the symmetry relation at order 1", "u^-1", || {
                symmetry_breaks_at_first_order(&ext)
            });
        }
        Mode::Extended => {
            r.check("symmetry-negative-control", "free c(u) breaks the symmetry relation at order 1", "u^-1", || {
                symmetry_breaks_at_first_order(&tw)
            });
        }
    }
    Ok(())
}

fn symmetry_breaks_at_first_order(tw: &Twisted) -> Result<Verdict> {
    let def = tw.symmetry_defect(Flip::Super)?;
    Ok(match tw.first_nonzero(&def)? {
        None => Verdict::fail("symmetry relation holds with a free c(u)"),
        Some((k, i, j, p)) if k > 1 => Verdict::fail(format!("first violation at u^-{k} ({i},{j}): {p}")),
        Some(_) => Verdict::Pass,
    })
}

fn twisted_center(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let tw = Twisted::model(cfg.m, cfg.n, cfg.depth, Mode::Strict)?;
    let d = cfg.depth;
    let (z, low) = tw.check_z_tw()?;
    r.check("z-tw-low-coefficients", "𝔷^(1) = 𝔷^(2) = 0", &window(d.min(2)), || Ok(low));
    r.check("z-tw-counit", "𝔷(u) = 1 at the counit", &window(d), || {
        let c = crate::yangian::counit_series(&z);
        Ok(if c == Series::constant(Rat::one()).truncate(c.prec) {
            Verdict::Pass
        } else {
            Verdict::fail(format!("counit of 𝔷(u) is {c:?}"))
        })
    });
    let upto = d;
    r.check("z-tw-centrality", "coefficients of 𝔷(u) supercommute with all s-generators", &window(upto), || {
        tw.commutes_with(&z, upto, &tw.generator_images(d)?)
    });
    for (name, first) in [("contraction-inverse-first", true), ("contraction-inverse-last", false)] {
        r.check(name, "Σ_k ± s̃_jk(-u) s_ki(-u-M+N) is δ_ij 𝔷(u)", &window(d), || {
            tw.check_center_contraction(first)
        });
    }
    Ok(())
}

fn twisted_berezinian(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let tw = Twisted::model(cfg.m, cfg.n, cfg.depth, Mode::Strict)?;
    let d = cfg.depth;
    let y = &tw.base;
    let fused = tw.berezinian_fusion()?;
    r.check("factorized", "𝔅^tw(u) = ((2u-M-N-1)/(2u-M-1)) 𝔅(u) 𝔓(u)", &window(d), || {
        y.series_equal(&fused, &tw.berezinian_factorized()?, "fused - factorized")
    });
    r.check("explicit", "double sum over S_M × S_N with Ω", &window(d), || {
        y.series_equal(&fused, &tw.berezinian_explicit()?, "fused - explicit")
    });
    r.check("liouville", "twisted Liouville formula", &window(d), || tw.check_liouville(&tw.z_tw()?, &fused));
    r.check("natural-diagonal", "𝔰^♮_{ii'}(-u) = s̃_{ii'}(u)", &window(d), || {
        let ctx = tw.ctx().clone();
        for i in ctx.indices().filter(|&i| ctx.parity(i) == 1) {
            let nat = tw.natural_entry(i, ctx.bar(i), &Rat::zero())?;
            let plain = y.at(tw.gen_inv.entry(i, ctx.bar(i)), -1, &Rat::zero());
            let v = y.series_equal(&nat, &plain, &format!("𝔰^♮ at ({i},{})", ctx.bar(i)))?;
            if !v.passed() {
                return Ok(v);
            }
        }
        Ok(Verdict::Pass)
    });
    r.check("minor-antisymmetry", "permuting upper indices of a minor multiplies it by the sign", &window(d), || {
        minor_antisymmetry(&tw)
    });
    Ok(())
}

/// The full fused image evaluated at permuted upper indices.
fn minor_antisymmetry(tw: &Twisted) -> Result<Verdict> {
    let ctx = tw.ctx().clone();
    let lower: Vec<u8> = ctx.indices().collect();
    let ladder = Ladder::full(tw.m(), tw.n());
    let img = tw.fused_image(&ladder, &lower)?;
    let base = img.get(&lower);
    let (m, n) = (tw.m(), tw.n());
    for sigma in perm::enumerate(m)? {
        for tau in perm::enumerate(n)? {
            let mut upper = lower.clone();
            for k in 0..m {
                upper[k] = lower[sigma[k] - 1];
            }
            for k in 0..n {
                upper[m + k] = lower[m + tau[k] - 1];
            }
            let s = Rat::int((perm::sign(&sigma) * perm::sign(&tau)) as i64);
            let v = tw.base.series_equal(&img.get(&upper), &base.scale_rat(&s), &format!("minor at {upper:?}"))?;
            if !v.passed() {
                return Ok(v);
            }
        }
    }
    Ok(Verdict::Pass)
}

fn extended(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let d = cfg.depth;
    for mode in [Mode::Strict, Mode::Extended] {
        let tw = Twisted::model(cfg.m, cfg.n, d, mode)?;
        let tag = mode.name();
        let e = tw.e_series_relation();
        r.check(&format!("e-series-{tag}"), "ℰ(u) from the rank-one relation", &window(d), || {
            tw.base.series_equal(&e.clone()?, &tw.e_series_expected()?, "ℰ(u) - expected")
        });
        r.check(&format!("e-closed-form-{tag}"), "ℰ(u) = (𝒮^ι(u) - 𝒮(u)/2u) 𝒮(-u)^-1", &window(d), || {
            tw.base.series_equal(&tw.e_series_closed()?, &e.clone()?, "closed form - relation")
        });
        if mode == Mode::Extended {
            r.check("e-centrality", "coefficients of ℰ(u) are central", &window(d), || {
                tw.commutes_with(&e.clone()?, d, &generator_images_of(&tw, d))
            });
            r.check("quaternary-extended", "quaternary relation with free c(u)", &bi_window(d), || {
                tw.check_quaternary_cal()
            });
        }
    }
    let formal = Twisted::formal(cfg.m, cfg.n, d)?;
    r.check("varpi-involution", "ϖ² = 1 on the generators", &window(d), || formal.check_varpi_involution());
    Ok(())
}

/// Coefficients of `𝒮(u)` in the realization.
fn generator_images_of(tw: &Twisted, d: i64) -> Vec<NcPoly> {
    let mut out = Vec::new();
    for r in 1..=d {
        for e in &tw.gen.entries {
            let c = e.get(r);
            if !c.is_empty() {
                out.push(c);
            }
        }
    }
    out
}

fn sylvester(cfg: &RunConfig, r: &mut Runner) -> Result<()> {
    let d = cfg.depth;
    let (m, n) = (cfg.m, cfg.n);
    if m + n + 1 > MAX_DIM {
        r.skip("sylvester", "quantum Sylvester identity", "the (M+1|N) algebra exceeds the size bound");
        return Ok(());
    }
    if m + n + 2 <= MAX_DIM {
        r.check("psi-composition", "ψ_1 ∘ ψ_1 = ψ_2 on the generators", "u^0..u^-1", || {
            check_psi_composition(m, n, 1, 1, 1)
        });
    }
    let formal_big = Twisted::formal(m + 1, n, d)?;
    r.check("psi-via-varpi", "ψ_1 = ϖ ∘ ν_1 ∘ ϖ", &window(d), || {
        Ok(same_images(&formal_big.psi_images(1)?, &formal_big.psi_via_varpi(1)?, "ψ_1"))
    });
    let big = Twisted::model(m + 1, n, d, cfg.mode)?;
    r.check("shift-homomorphism", "s_ij(u) ↦ s_{1+i,1+j}(u) respects the quaternary relation", &bi_window(d), || {
        check_shift_embedding(&big, 1, false)
    });
    r.check("psi-homomorphism", "ψ_1 images satisfy the quaternary relation", &bi_window(d), || {
        check_shift_embedding(&big, 1, true)
    });
    r.check("sylvester", "ψ_1(𝔅^tw(u)) = 𝔅^tw(u+3/2) (𝒮^1_1(u+3/2))^-1", &window(d), || {
        check_sylvester(&big, 1, MinorLadder::Leading)
    });
    let small = Twisted::model(m, n, d, cfg.mode)?;
    for k in [1, m + n - 1] {
        if k == 0 || k >= m + n {
            continue;
        }
        r.check(&format!("complementary-minors-{k}"), "𝔅^tw(u) ϖ(𝒮^{K+1..}(x)) = 𝒮^{1..K}(u)", &window(d), || {
            check_complementary_minors(&small, k, MinorLadder::Leading)
        });
    }
    Ok(())
}

/// Canonical one-line rendering: terms by increasing power of `u^{-1}`,
/// each coefficient in PBW order.
pub fn render_series(s: &PolySeries) -> String {
    let mut parts = Vec::new();
    for (k, a) in &s.coeffs {
        if a.is_empty() {
            continue;
        }
        let c = a.to_string();
        let wrapped = if a.len() > 1 { format!("({c})") } else { c };
        parts.push(match k {
            0 => wrapped,
            k if *k > 0 => format!("{wrapped}*u^-{k}"),
            k => format!("{wrapped}*u^{}", -k),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Coeff;

    #[test]
    fn unknown_suite_and_odd_n_are_config_errors() {
        let mut c = RunConfig::new(1, 2, 2);
        c.suites = vec!["nope".into()];
        assert!(matches!(c.validate(), Err(KernelError::Config(_))));
        let mut c = RunConfig::new(1, 3, 2);
        c.suites = vec!["twisted-relations".into()];
        assert!(matches!(c.validate(), Err(KernelError::Config(_))));
        c.suites = vec!["rtt".into()];
        assert_eq!(c.validate().unwrap(), vec![Suite::Rtt]);
        assert!(RunConfig::new(3, 3, 2).validate().is_err());
        assert!(RunConfig::new(1, 0, 7).validate().is_err());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
    }

    #[test]
    fn exhausted_budget_skips() {
        let mut r = Runner::new("x", String::new(), Some(Duration::ZERO));
        std::thread::sleep(Duration::from_millis(2));
        r.check("c", "", "", || Ok(Verdict::Pass));
        assert_eq!(r.records[0].status, Status::Skipped);
    }

    #[test]
    fn rendering_is_canonical() {
        let y = Yangian::new(1, 1, 2).unwrap();
        assert_eq!(render_series(&PolySeries::one()), "1");
        assert_eq!(render_series(&Series::exact_zero()), "0");
        let s = render_series(y.t.entry(1, 2));
        assert_eq!(s, "t[1,2,1]*u^-1 + t[1,2,2]*u^-2");
    }

    #[test]
    fn tensor_lemmas_pass_on_small_shape() {
        let recs = Suite::TensorLemmas.run(&RunConfig::new(1, 2, 1), None);
        assert!(recs.iter().all(|c| c.status == Status::Pass), "{recs:?}");
    }
}
