//! Degreewise localization at homogeneous elements and Čech complexes on
//! finite covers by distinguished opens.
//!
//! `(M_f)_d` is realized at a denominator cap `N` as `M_{d+N·deg f}` modulo
//! the stable kernel of multiplication by powers of `f`, i.e. the span of
//! fractions `m / f^t` with `t ≤ N`. Sections over `W = D(f_1) ∪ ... ∪ D(f_n)`
//! are the kernel of the truncated Čech differential; the cap is escalated
//! until the window's dimension table stops moving.
//!
//! Sign convention: `(d⁰s)_{ij} = s_j - s_i` and
//! `(d¹c)_{ijk} = c_{jk} - c_{ik} + c_{ij}` for `i < j < k` in cover order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::graded::{
    field_of, BasisLabel, DegreewiseModule, FPGradedModule, GradedModuleMap, GradedPiece, Memo,
    Module, ModuleMap,
};
use crate::linalg::{image_quotient, Mat, Quotient, Scalar, Subspace};
use crate::poly::{format_exponents, HomogPoly, PolyRing};

/// `W = D(f_1) ∪ ... ∪ D(f_n)` inside `Spec R`.
#[derive(Clone, Debug)]
pub struct OpenSubset {
    ring: Arc<PolyRing>,
    denominators: Vec<HomogPoly>,
}

impl OpenSubset {
    pub fn new(ring: Arc<PolyRing>, denominators: Vec<HomogPoly>) -> Result<Self> {
        if denominators.is_empty() {
            return Err(Error::InvalidInput("an open subset needs at least one denominator".into()));
        }
        if denominators.iter().any(HomogPoly::is_zero) {
            return Err(Error::InvalidInput("D(0) is empty; zero denominators are not allowed".into()));
        }
        Ok(OpenSubset { ring, denominators })
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn denominators(&self) -> &[HomogPoly] {
        &self.denominators
    }

    pub fn len(&self) -> usize {
        self.denominators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.denominators.is_empty()
    }

    pub fn describe(&self) -> String {
        self.denominators
            .iter()
            .map(|f| format!("D({})", f.display(&self.ring)))
            .collect::<Vec<_>>()
            .join(" ∪ ")
    }

    fn product(&self, idx: &[usize]) -> HomogPoly {
        let mut p = HomogPoly::constant(&self.ring, self.ring.field().one());
        for &i in idx {
            p = p.mul(&self.denominators[i], &self.ring);
        }
        p
    }
}

/// How the stable kernel of `f`-powers was determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stabilization {
    /// Exact torsion exponent read off the presentation.
    Certified { exponent: u32 },
    /// `ker f^t = ker f^{t+1}` observed on the piece.
    Heuristic { steps: u32 },
}

/// Aggregate over all localized pieces touched by a computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StabilizationSummary {
    pub heuristic: bool,
    pub max_steps: u32,
}

impl StabilizationSummary {
    fn absorb(&mut self, s: Stabilization) {
        if let Stabilization::Heuristic { steps } = s {
            self.heuristic = true;
            self.max_steps = self.max_steps.max(steps);
        }
    }

    pub fn merge(&mut self, other: StabilizationSummary) {
        self.heuristic |= other.heuristic;
        self.max_steps = self.max_steps.max(other.max_steps);
    }

    pub fn flag(&self) -> String {
        if self.heuristic {
            format!("localization=heuristic(t<={})", self.max_steps)
        } else {
            "localization=certified".into()
        }
    }
}

/// Multiplication by a fixed homogeneous polynomial on a module.
struct Multiplier {
    module: Module,
    p: HomogPoly,
    acts: Memo<i64, Arc<Mat>>,
}

impl Multiplier {
    fn new(module: Module, p: HomogPoly) -> Self {
        Multiplier { module, p, acts: Memo::new() }
    }

    fn act(&self, from: i64) -> Arc<Mat> {
        self.acts.get_or(from, || Arc::new(crate::graded::poly_action(self.module.as_ref(), &self.p, from)))
    }

    /// `p^k : M_from -> M_{from + k deg p}`.
    fn power(&self, from: i64, k: u32) -> Mat {
        if let Some(e) = self.p.monomial_exponent() {
            if self.p.terms.values().next().is_some_and(Scalar::is_one) {
                let ek: Vec<u32> = e.iter().map(|&a| a * k).collect();
                return self.module.monomial_act(&ek, from);
            }
        }
        let f = field_of(self.module.as_ref());
        let mut acc = Mat::identity(f, self.module.dim(from));
        for s in 0..k as i64 {
            acc = self.act(from + s * self.p.degree).mul(&acc);
        }
        acc
    }
}

/// `M_D / (0 :_{M_D} f^∞)` for one numerator degree `D`.
#[derive(Clone, Debug)]
pub struct StableQuotient {
    pub quotient: Quotient,
    pub status: Stabilization,
}

/// One realized piece `(M_f)_d` at a given cap.
#[derive(Clone, Debug)]
pub struct LocalizedPiece {
    pub degree: i64,
    pub cap: u32,
    pub numerator_degree: i64,
    pub quotient: Quotient,
    pub status: Stabilization,
}

impl LocalizedPiece {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }
}

/// The localization `M_f`, memoized by numerator degree so that pieces are
/// shared across caps.
pub struct Localization {
    module: Module,
    mult: Multiplier,
    torsion: Option<u32>,
    stable: Memo<i64, Arc<StableQuotient>>,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl Localization {
    pub fn new(module: Module, f: HomogPoly) -> Arc<Self> {
        assert!(!f.is_zero(), "localization at zero");
        let torsion = module.torsion_exponent(&f);
        Arc::new(Localization {
            mult: Multiplier::new(module.clone(), f),
            module,
            torsion,
            stable: Memo::new(),
            acts: Memo::new(),
        })
    }

    pub fn denominator(&self) -> &HomogPoly {
        &self.mult.p
    }

    pub fn module(&self) -> &Module {
        &self.module
    }

    /// Stable kernel of `f`-powers on `M_D`.
    pub fn stable_quotient(&self, numerator_degree: i64) -> Arc<StableQuotient> {
        self.stable.get_or(numerator_degree, || Arc::new(self.compute_stable(numerator_degree)))
    }

    fn compute_stable(&self, dd: i64) -> StableQuotient {
        let f = field_of(self.module.as_ref());
        let n = self.module.dim(dd);
        let e = self.mult.p.degree;
        let (kernel_of, status) = match self.torsion {
            Some(s0) => (self.mult.power(dd, s0), Stabilization::Certified { exponent: s0 }),
            None => {
                // iterate t = 1, 2, ... until ker f^t = ker f^{t+1}; the chain is
                // bounded by dim M_D so this terminates
                let mut pow = self.mult.act(dd).as_ref().clone();
                let mut t = 1u32;
                let mut rank = pow.rank();
                loop {
                    let next = self.mult.act(dd + t as i64 * e).mul(&pow);
                    let next_rank = next.rank();
                    if next_rank == rank {
                        break (pow, Stabilization::Heuristic { steps: t });
                    }
                    pow = next;
                    rank = next_rank;
                    t += 1;
                }
            }
        };
        let kernel = kernel_of.kernel_basis();
        StableQuotient { quotient: image_quotient(f, &kernel, n), status }
    }

    /// `(M_f)_d` at denominator exponent `cap`.
    pub fn piece(&self, d: i64, cap: u32) -> LocalizedPiece {
        let dd = d + cap as i64 * self.mult.p.degree;
        let s = self.stable_quotient(dd);
        LocalizedPiece { degree: d, cap, numerator_degree: dd, quotient: s.quotient.clone(), status: s.status }
    }

    /// Variable action on realized pieces with numerator degree `dd -> dd + 1`.
    pub fn act_numerator(&self, var: usize, dd: i64) -> Arc<Mat> {
        self.acts.get_or((var, dd), || {
            let lo = self.stable_quotient(dd);
            let hi = self.stable_quotient(dd + 1);
            Arc::new(hi.quotient.projection.mul(&self.module.act(var, dd)).mul(&lo.quotient.lift()))
        })
    }
}

pub fn localize_piece(m: &Module, f: &HomogPoly, d: i64, cap: u32) -> LocalizedPiece {
    Localization::new(m.clone(), f.clone()).piece(d, cap)
}

/// Localizations of one module at every product `f_I` for `|I| ≤ 3`.
pub struct CoverData {
    module: Module,
    open: OpenSubset,
    singles: Vec<Arc<Localization>>,
    pairs: Vec<((usize, usize), Arc<Localization>)>,
    triples: Vec<((usize, usize, usize), Arc<Localization>)>,
}

/// A module on a cover, with complexes and sections memoized per cap.
pub struct CechCover {
    data: Arc<CoverData>,
    complexes: Memo<u32, Arc<CechComplex>>,
    sections: Memo<u32, Arc<SectionsModule>>,
}

impl CechCover {
    pub fn new(module: Module, open: &OpenSubset) -> Arc<Self> {
        let n = open.len();
        let loc = |idx: &[usize]| Localization::new(module.clone(), open.product(idx));
        let singles = (0..n).map(|i| loc(&[i])).collect();
        let mut pairs = Vec::new();
        let mut triples = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push(((i, j), loc(&[i, j])));
                for k in (j + 1)..n {
                    triples.push(((i, j, k), loc(&[i, j, k])));
                }
            }
        }
        let data = Arc::new(CoverData { module: module.clone(), open: open.clone(), singles, pairs, triples });
        Arc::new(CechCover { data, complexes: Memo::new(), sections: Memo::new() })
    }

    pub fn module(&self) -> &Module {
        &self.data.module
    }

    pub fn open(&self) -> &OpenSubset {
        &self.data.open
    }

    pub fn at_cap(&self, cap: u32) -> Arc<CechComplex> {
        self.complexes.get_or(cap, || {
            Arc::new(CechComplex { cover: self.data.clone(), cap, degrees: Memo::new(), c0_acts: Memo::new() })
        })
    }

    /// `Γ(W, M~)` at a cap; the same object is returned for repeated calls.
    pub fn sections_at(&self, cap: u32) -> Arc<SectionsModule> {
        self.sections.get_or(cap, || SectionsModule::new(self.at_cap(cap)))
    }
}

/// One degree of the truncated Čech complex.
#[derive(Debug)]
pub struct CechDegree {
    pub degree: i64,
    pub c0: Vec<LocalizedPiece>,
    pub c1: Vec<LocalizedPiece>,
    pub c2: Vec<LocalizedPiece>,
    pub d0: Mat,
    pub d1: Mat,
    /// `H⁰ = ker d⁰ ⊆ C⁰`.
    pub h0: Subspace,
    pub h1_dim: usize,
    pub status: StabilizationSummary,
}

impl CechDegree {
    pub fn c0_dim(&self) -> usize {
        self.c0.iter().map(LocalizedPiece::dim).sum()
    }

    pub fn c1_dim(&self) -> usize {
        self.c1.iter().map(LocalizedPiece::dim).sum()
    }

    pub fn c0_offsets(&self) -> Vec<usize> {
        offsets(&self.c0)
    }

    pub fn c1_offsets(&self) -> Vec<usize> {
        offsets(&self.c1)
    }

    pub fn d1_after_d0_vanishes(&self) -> bool {
        self.d1.mul(&self.d0).is_zero()
    }
}

fn offsets(pieces: &[LocalizedPiece]) -> Vec<usize> {
    let mut acc = 0;
    pieces
        .iter()
        .map(|p| {
            let o = acc;
            acc += p.dim();
            o
        })
        .collect()
}

/// The Čech complex of a module on a cover, truncated at one cap.
pub struct CechComplex {
    cover: Arc<CoverData>,
    cap: u32,
    degrees: Memo<i64, Arc<CechDegree>>,
    c0_acts: Memo<(usize, i64), Arc<Mat>>,
}

impl fmt::Debug for CechComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CechComplex({} on {}, cap {})", self.cover.module.name(), self.cover.open.describe(), self.cap)
    }
}

impl CechComplex {
    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn module(&self) -> &Module {
        &self.cover.module
    }

    pub fn open(&self) -> &OpenSubset {
        &self.cover.open
    }

    pub fn degree(&self, d: i64) -> Arc<CechDegree> {
        self.degrees.get_or(d, || Arc::new(self.build(d)))
    }

    /// `f_i^k` acting on numerators of a localization of this module.
    fn raise(&self, factor: usize, from: i64) -> Mat {
        self.cover.singles[factor].mult.power(from, self.cap)
    }

    fn build(&self, d: i64) -> CechDegree {
        let f = field_of(self.cover.module.as_ref());
        let cap = self.cap;
        let c0: Vec<LocalizedPiece> = self.cover.singles.iter().map(|l| l.piece(d, cap)).collect();
        let c1: Vec<LocalizedPiece> = self.cover.pairs.iter().map(|(_, l)| l.piece(d, cap)).collect();
        let c2: Vec<LocalizedPiece> = self.cover.triples.iter().map(|(_, l)| l.piece(d, cap)).collect();
        let (o0, o1) = (offsets(&c0), offsets(&c1));
        let dim0: usize = c0.iter().map(LocalizedPiece::dim).sum();
        let dim1: usize = c1.iter().map(LocalizedPiece::dim).sum();
        let dim2: usize = c2.iter().map(LocalizedPiece::dim).sum();

        // component map: numerator of `src` times f_factor^cap, projected into `dst`
        let component = |src: &LocalizedPiece, dst: &LocalizedPiece, factor: usize, sign: bool| {
            let m = dst.quotient.projection.mul(&self.raise(factor, src.numerator_degree)).mul(&src.quotient.lift());
            if sign {
                m
            } else {
                m.scale(&f.neg(&f.one()))
            }
        };

        let mut d0 = Mat::zeros(f, dim1, dim0);
        for (row, ((i, j), _)) in self.cover.pairs.iter().enumerate() {
            let dst = &c1[row];
            d0.paste(o1[row], o0[*j], &component(&c0[*j], dst, *i, true));
            d0.paste(o1[row], o0[*i], &component(&c0[*i], dst, *j, false));
        }

        let pair_index = |a: usize, b: usize| self.cover.pairs.iter().position(|(p, _)| *p == (a, b)).unwrap();
        let o2 = offsets(&c2);
        let mut d1 = Mat::zeros(f, dim2, dim1);
        for (row, ((i, j, k), _)) in self.cover.triples.iter().enumerate() {
            let dst = &c2[row];
            let jk = pair_index(*j, *k);
            let ik = pair_index(*i, *k);
            let ij = pair_index(*i, *j);
            d1.paste(o2[row], o1[jk], &component(&c1[jk], dst, *i, true));
            d1.paste(o2[row], o1[ik], &component(&c1[ik], dst, *j, false));
            d1.paste(o2[row], o1[ij], &component(&c1[ij], dst, *k, true));
        }

        let h0 = Subspace::kernel(&d0);
        let ker_d1 = dim1 - d1.rank();
        let h1_dim = ker_d1 - (dim0 - h0.dim());
        let mut status = StabilizationSummary::default();
        for p in c0.iter().chain(&c1).chain(&c2) {
            status.absorb(p.status);
        }
        CechDegree { degree: d, c0, c1, c2, d0, d1, h0, h1_dim, status }
    }

    /// Block-diagonal variable action on `C⁰_d -> C⁰_{d+1}`.
    pub fn c0_act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.c0_acts.get_or((var, d), || {
            let f = field_of(self.cover.module.as_ref());
            let lo = self.degree(d);
            let blocks: Vec<Arc<Mat>> = self
                .cover
                .singles
                .iter()
                .zip(&lo.c0)
                .map(|(l, p)| l.act_numerator(var, p.numerator_degree))
                .collect();
            let refs: Vec<&Mat> = blocks.iter().map(|b| b.as_ref()).collect();
            Arc::new(Mat::block_diag(f, &refs))
        })
    }

    /// The diagonal `M_d -> C⁰_d`, `m ↦ (m / 1)_i`.
    pub fn diagonal(&self, d: i64) -> Mat {
        let f = field_of(self.cover.module.as_ref());
        let deg = self.degree(d);
        let mut out = Mat::zeros(f, deg.c0_dim(), self.cover.module.dim(d));
        for (i, (p, off)) in deg.c0.iter().zip(deg.c0_offsets()).enumerate() {
            out.paste(off, 0, &p.quotient.projection.mul(&self.raise(i, d)));
        }
        out
    }

    /// `C⁰` map induced by `φ : M -> M'`; both complexes must share the open and the cap.
    pub fn induced_c0(&self, other: &CechComplex, phi: &GradedModuleMap, d: i64) -> Mat {
        assert_eq!(self.cap, other.cap, "induced maps need a common cap");
        let f = field_of(self.cover.module.as_ref());
        let src = self.degree(d);
        let dst = other.degree(d);
        let mut out = Mat::zeros(f, dst.c0_dim(), src.c0_dim());
        for (i, (sp, tp)) in src.c0.iter().zip(&dst.c0).enumerate() {
            let m = tp.quotient.projection.mul(&phi.matrix(sp.numerator_degree)).mul(&sp.quotient.lift());
            out.paste(dst.c0_offsets()[i], src.c0_offsets()[i], &m);
        }
        out
    }

    /// Human-readable form of a `C¹` vector, e.g. `x^-1*y^-1 on D(x*y)`.
    pub fn describe_c1(&self, d: i64, v: &[Scalar]) -> String {
        let deg = self.degree(d);
        let ring = self.cover.module.ring().clone();
        let mut parts = Vec::new();
        for (((_, loc), piece), off) in self.cover.pairs.iter().zip(&deg.c1).zip(deg.c1_offsets()) {
            let local = &v[off..off + piece.dim()];
            if local.iter().all(Scalar::is_zero) {
                continue;
            }
            let numerator = piece.quotient.lift_vec(local);
            let labels = self.cover.module.piece(piece.numerator_degree).labels.clone();
            let den = loc.denominator();
            let body = describe_fraction(&ring, &numerator, &labels, den, self.cap);
            parts.push(format!("{body} on D({})", den.display(&ring)));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("; ")
        }
    }
}

fn describe_fraction(ring: &PolyRing, numerator: &[Scalar], labels: &[BasisLabel], den: &HomogPoly, cap: u32) -> String {
    let mut terms = Vec::new();
    for (c, label) in numerator.iter().zip(labels) {
        if c.is_zero() {
            continue;
        }
        let coeff = if c.is_one() { String::new() } else { format!("{c}*") };
        match (label, den.monomial_exponent()) {
            (BasisLabel::Term { generator, monomial }, Some(de)) if den.terms.values().next().is_some_and(|x| x.is_one()) => {
                let e: Vec<i64> = monomial.iter().zip(de).map(|(&a, &b)| a as i64 - (b * cap) as i64).collect();
                let gen = if labels.iter().any(|l| matches!(l, BasisLabel::Term { generator: g, .. } if *g != 0)) {
                    format!("*g{}", generator + 1)
                } else {
                    String::new()
                };
                terms.push(format!("{coeff}{}{gen}", format_exponents(ring.var_names(), &e)));
            }
            (BasisLabel::Term { generator, monomial }, _) => {
                terms.push(format!(
                    "{coeff}{}*g{}/({})^{cap}",
                    ring.format_monomial(monomial),
                    generator + 1,
                    den.display(ring)
                ));
            }
            (BasisLabel::Opaque(k), _) => terms.push(format!("{coeff}b{k}/({})^{cap}", den.display(ring))),
        }
    }
    terms.join(" + ")
}

/// Sections `Γ(W, M~)` at a fixed cap, as a module.
pub struct SectionsModule {
    complex: Arc<CechComplex>,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl SectionsModule {
    pub fn new(complex: Arc<CechComplex>) -> Arc<Self> {
        Arc::new(SectionsModule { complex, acts: Memo::new() })
    }

    pub fn complex(&self) -> &Arc<CechComplex> {
        &self.complex
    }

    pub fn cap(&self) -> u32 {
        self.complex.cap
    }
}

impl DegreewiseModule for SectionsModule {
    fn ring(&self) -> &Arc<PolyRing> {
        self.complex.module().ring()
    }

    fn name(&self) -> String {
        format!("Γ({}, {}~)", self.complex.open().describe(), self.complex.module().name())
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        Arc::new(GradedPiece::opaque(d, self.complex.degree(d).h0.dim()))
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.acts.get_or((var, d), || {
            let lo = self.complex.degree(d);
            let hi = self.complex.degree(d + 1);
            let moved = self.complex.c0_act(var, d).mul(&lo.h0.inclusion());
            debug_assert!(moved.columns().iter().all(|c| hi.h0.contains(c)));
            Arc::new(hi.h0.coords_matrix().mul(&moved))
        })
    }
}

/// Escalation policy for the denominator cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CapPolicy {
    pub initial: u32,
    pub step: u32,
    pub max_escalations: u32,
}

impl CapPolicy {
    /// Start at `hi - lo + 2`, step by 2, at most 5 escalations.
    pub fn for_window(lo: i64, hi: i64) -> Self {
        CapPolicy { initial: (hi - lo).max(0) as u32 + 2, step: 2, max_escalations: 5 }
    }

    pub fn with_initial(self, initial: u32) -> Self {
        CapPolicy { initial, ..self }
    }

    pub fn max_cap(&self) -> u32 {
        self.initial + self.step * self.max_escalations
    }

    /// Flag recording where a result stabilized.
    pub fn flag(&self, cap: u32) -> String {
        format!("cap={} stable-through={}", cap, cap + 2 * self.step)
    }
}

/// Finds the first cap `c` at which `eval(c) = eval(c + step) = eval(c + 2 step)`.
pub fn stabilize<T: PartialEq>(policy: &CapPolicy, eval: impl FnMut(u32) -> Result<T>) -> Result<(u32, T)> {
    stabilize_by(policy, eval, |a, b| a == b)
}

/// As [`stabilize`], with a custom notion of "unchanged".
pub fn stabilize_by<T>(
    policy: &CapPolicy,
    mut eval: impl FnMut(u32) -> Result<T>,
    same: impl Fn(&T, &T) -> bool,
) -> Result<(u32, T)> {
    let caps: Vec<u32> = (0..=policy.max_escalations).map(|k| policy.initial + k * policy.step).collect();
    let mut values: Vec<T> = Vec::new();
    for (k, &cap) in caps.iter().enumerate() {
        values.push(eval(cap)?);
        if k >= 2 && same(&values[k], &values[k - 1]) && same(&values[k - 1], &values[k - 2]) {
            let v = values.swap_remove(k - 2);
            return Ok((caps[k - 2], v));
        }
    }
    Err(Error::CapExhausted { max_cap: policy.max_cap() })
}

/// Per-degree dimensions of `H⁰` and `H¹` over a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyTable {
    pub h0: BTreeMap<i64, usize>,
    pub h1: BTreeMap<i64, usize>,
}

/// Which part of the cohomology table must stop moving.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StableOn {
    H0,
    H1,
    Both,
}

/// Result of a cap-stabilized Čech computation.
#[derive(Clone)]
pub struct StableCech {
    pub cover: Arc<CechCover>,
    pub complex: Arc<CechComplex>,
    pub table: CohomologyTable,
    pub cap: u32,
    pub status: StabilizationSummary,
}

impl StableCech {
    pub fn sections(&self) -> Arc<SectionsModule> {
        self.cover.sections_at(self.cap)
    }

    pub fn flags(&self, policy: &CapPolicy) -> Vec<String> {
        vec![policy.flag(self.cap), self.status.flag()]
    }
}

/// Stabilization status over the window, for every localization touched.
pub fn status_over(complex: &CechComplex, lo: i64, hi: i64) -> StabilizationSummary {
    let mut status = StabilizationSummary::default();
    for d in lo..=hi {
        status.merge(complex.degree(d).status);
    }
    status
}

fn table_at(complex: &CechComplex, lo: i64, hi: i64) -> CohomologyTable {
    let mut h0 = BTreeMap::new();
    let mut h1 = BTreeMap::new();
    for d in lo..=hi {
        let deg = complex.degree(d);
        h0.insert(d, deg.h0.dim());
        h1.insert(d, deg.h1_dim);
    }
    CohomologyTable { h0, h1 }
}

/// Runs the Čech complex of a cover over `[lo, hi]` with cap escalation.
pub fn cech_stable_on(cover: &Arc<CechCover>, lo: i64, hi: i64, policy: &CapPolicy, on: StableOn) -> Result<StableCech> {
    let (cap, table) = stabilize_by(
        policy,
        |cap| Ok(table_at(&cover.at_cap(cap), lo, hi)),
        |a: &CohomologyTable, b: &CohomologyTable| match on {
            StableOn::H0 => a.h0 == b.h0,
            StableOn::H1 => a.h1 == b.h1,
            StableOn::Both => a == b,
        },
    )?;
    let complex = cover.at_cap(cap);
    let status = status_over(&complex, lo, hi);
    Ok(StableCech { cover: cover.clone(), complex, table, cap, status })
}

pub fn cech_stable(m: &Module, w: &OpenSubset, lo: i64, hi: i64, policy: &CapPolicy) -> Result<StableCech> {
    cech_stable_on(&CechCover::new(m.clone(), w), lo, hi, policy, StableOn::Both)
}

pub fn cech_complex(m: &Module, w: &OpenSubset, cap: u32) -> Arc<CechComplex> {
    CechCover::new(m.clone(), w).at_cap(cap)
}

/// `Γ(W, M~)`, with the cap escalated until the window's dimensions stop moving.
pub fn sections_window(m: &Module, w: &OpenSubset, lo: i64, hi: i64, policy: &CapPolicy) -> Result<Arc<SectionsModule>> {
    Ok(cech_stable_on(&CechCover::new(m.clone(), w), lo, hi, policy, StableOn::H0)?.sections())
}

/// `dim H¹(W, M~)_d` over the window.
pub fn h1_window(m: &Module, w: &OpenSubset, lo: i64, hi: i64, policy: &CapPolicy) -> Result<BTreeMap<i64, usize>> {
    Ok(cech_stable_on(&CechCover::new(m.clone(), w), lo, hi, policy, StableOn::H1)?.table.h1)
}

/// The canonical map `M -> Γ(W, M~)`.
pub fn restriction_to_sections(sections: &Arc<SectionsModule>) -> ModuleMap {
    let s = sections.clone();
    GradedModuleMap::from_fn(sections.complex.module().clone(), sections.clone(), 0, move |d| {
        let deg = s.complex.degree(d);
        deg.h0.coords_matrix().mul(&s.complex.diagonal(d))
    })
}

/// `Γ(W, φ) : Γ(W, M~) -> Γ(W, M'~)`; both sections modules must share the open and the cap.
pub fn induced_on_sections(phi: &ModuleMap, src: &Arc<SectionsModule>, dst: &Arc<SectionsModule>) -> ModuleMap {
    let (phi, s, t) = (phi.clone(), src.clone(), dst.clone());
    GradedModuleMap::from_fn(src.clone(), dst.clone(), 0, move |d| {
        let c0 = s.complex.induced_c0(&t.complex, &phi, d);
        let moved = c0.mul(&s.complex.degree(d).h0.inclusion());
        let hi = t.complex.degree(d);
        debug_assert!(moved.columns().iter().all(|c| hi.h0.contains(c)));
        hi.h0.coords_matrix().mul(&moved)
    })
}

/// Reads a piece of the structure module as polynomials.
fn as_polynomial(module: &dyn DegreewiseModule, degree: i64, coords: &[Scalar]) -> Result<HomogPoly> {
    let piece = module.piece(degree);
    let ring = module.ring();
    let mut terms = Vec::new();
    for (c, label) in coords.iter().zip(&piece.labels) {
        match label {
            BasisLabel::Term { generator: 0, monomial } if module.generator_degrees() == Some(vec![0]) => {
                if !c.is_zero() {
                    terms.push((monomial.clone(), c.clone()));
                }
            }
            _ => return Err(Error::InvalidInput(format!("{} is not the structure module", module.name()))),
        }
    }
    let mut p = HomogPoly::from_terms(ring, terms).map_err(Error::InvalidInput)?;
    p.degree = degree;
    Ok(p)
}

/// The structure module `R`.
pub fn structure_module(ring: &Arc<PolyRing>) -> Arc<FPGradedModule> {
    FPGradedModule::free(ring.clone(), "R", vec![0])
}

/// Monomial multiples `x^α v` of a fixed `v ∈ M_from`, extended one degree at a time on demand.
pub struct MultiplesCache {
    module: Module,
    from: i64,
    levels: Mutex<Vec<Arc<Vec<Vec<Scalar>>>>>,
}

impl MultiplesCache {
    pub fn new(module: Module, v: Vec<Scalar>, from: i64) -> Self {
        MultiplesCache { module, from, levels: Mutex::new(vec![Arc::new(vec![v])]) }
    }

    pub fn degree(&self) -> i64 {
        self.from
    }

    /// Multiples by all monomials of degree `k`, in graded-lex order.
    pub fn level(&self, k: u32) -> Arc<Vec<Vec<Scalar>>> {
        let mut levels = self.levels.lock().unwrap();
        let ring = self.module.ring().clone();
        while levels.len() <= k as usize {
            let j = levels.len() - 1;
            let prev = levels[j].clone();
            let prev_basis = ring.basis(j as i64);
            let next_basis = ring.basis(j as i64 + 1);
            let acts: Vec<Arc<Mat>> =
                (0..ring.nvars()).map(|var| self.module.act(var, self.from + j as i64)).collect();
            let next = next_basis
                .monomials
                .iter()
                .map(|e| {
                    let var = e.iter().position(|&a| a > 0).unwrap();
                    let mut lower = e.clone();
                    lower[var] -= 1;
                    acts[var].mul_vec(&prev[prev_basis.index_of(&lower).unwrap()])
                })
                .collect();
            levels.push(Arc::new(next));
        }
        levels[k as usize].clone()
    }

    fn times(&self, p: &HomogPoly) -> Vec<Scalar> {
        let f = field_of(self.module.as_ref());
        let mut out = vec![f.zero(); self.module.dim(self.from + p.degree)];
        if p.is_zero() {
            return out;
        }
        let level = self.level(p.degree as u32);
        let basis = self.module.ring().basis(p.degree);
        for (e, c) in &p.terms {
            for (o, x) in out.iter_mut().zip(&level[basis.index_of(e).unwrap()]) {
                if !x.is_zero() {
                    *o = f.add(o, &f.mul(c, x));
                }
            }
        }
        out
    }
}

/// `a_k · res(m)` for sections `a_k ∈ Γ(W, O)_{da}` given as `C⁰` vectors of `ring_cx`,
/// where `m ∈ M_e` is fixed by `m_cache` and `res(m) = (m/1)_i`.
///
/// Results are `C⁰` vectors of `out_cx` (same cap as `ring_cx`) in degree `da + e`.
pub fn times_restriction(
    ring_cx: &CechComplex,
    a: &[Vec<Scalar>],
    da: i64,
    m_cache: &MultiplesCache,
    out_cx: &CechComplex,
) -> Result<Vec<Vec<Scalar>>> {
    if out_cx.cap != ring_cx.cap {
        return Err(Error::InvalidInput("products with restrictions keep the cap of the coefficient".into()));
    }
    let caches: Vec<&MultiplesCache> = vec![m_cache; out_cx.cover.singles.len()];
    products(ring_cx, a, da, &caches, m_cache.from, out_cx)
}

fn products(
    ring_cx: &CechComplex,
    a: &[Vec<Scalar>],
    da: i64,
    caches: &[&MultiplesCache],
    ds: i64,
    out_cx: &CechComplex,
) -> Result<Vec<Vec<Scalar>>> {
    let f = ring_cx.module().ring().field();
    let ra = ring_cx.degree(da);
    let out = out_cx.degree(da + ds);
    let (ao, oo) = (ra.c0_offsets(), out.c0_offsets());
    let mut results = vec![vec![f.zero(); out.c0_dim()]; a.len()];
    for (i, cache) in caches.iter().enumerate() {
        let (ap, op) = (&ra.c0[i], &out.c0[i]);
        if ap.dim() == 0 || op.dim() == 0 {
            continue;
        }
        for (r, ak) in results.iter_mut().zip(a) {
            let a_num = ap.quotient.lift_vec(&ak[ao[i]..ao[i] + ap.dim()]);
            let poly = as_polynomial(ring_cx.module().as_ref(), ap.numerator_degree, &a_num)?;
            let prod = cache.times(&poly);
            debug_assert_eq!(cache.from + ap.numerator_degree, op.numerator_degree);
            r[oo[i]..oo[i] + op.dim()].clone_from_slice(&op.quotient.project(&prod));
        }
    }
    Ok(results)
}

/// Products `a_k · s` of sections `a_k ∈ Γ(W, O)_{da}` (`C⁰` vectors of `ring_cx`) with one
/// `C⁰` vector `s` of `module_cx` in degree `ds`.
///
/// Results are `C⁰` vectors of `out_cx` in degree `da + ds`, whose cap must be
/// the sum of the two input caps.
pub fn section_products(
    ring_cx: &CechComplex,
    a: &[Vec<Scalar>],
    da: i64,
    module_cx: &CechComplex,
    s: &[Scalar],
    ds: i64,
    out_cx: &CechComplex,
) -> Result<Vec<Vec<Scalar>>> {
    if out_cx.cap != ring_cx.cap + module_cx.cap {
        return Err(Error::InvalidInput("product cap must be the sum of the factor caps".into()));
    }
    let ms = module_cx.degree(ds);
    let caches: Vec<MultiplesCache> = ms
        .c0
        .iter()
        .zip(ms.c0_offsets())
        .map(|(p, o)| MultiplesCache::new(module_cx.module().clone(), p.quotient.lift_vec(&s[o..o + p.dim()]), p.numerator_degree))
        .collect();
    let refs: Vec<&MultiplesCache> = caches.iter().collect();
    products(ring_cx, a, da, &refs, ds, out_cx)
}

/// `a · s` for single sections; see [`section_products`].
pub fn section_mult(
    ring_cx: &CechComplex,
    a: &[Scalar],
    da: i64,
    module_cx: &CechComplex,
    s: &[Scalar],
    ds: i64,
    out_cx: &CechComplex,
) -> Result<Vec<Scalar>> {
    Ok(section_products(ring_cx, &[a.to_vec()], da, module_cx, s, ds, out_cx)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{map_from_gen_images, Relation};
    use crate::linalg::FieldSpec;

    fn ring() -> Arc<PolyRing> {
        PolyRing::new(FieldSpec::Rationals, &["x", "y"]).unwrap()
    }

    fn punctured(r: &Arc<PolyRing>) -> OpenSubset {
        OpenSubset::new(r.clone(), vec![r.var(0), r.var(1)]).unwrap()
    }

    /// Brute-force oracle: Laurent monomials `x^a y^b` (a + b = d) in the Čech
    /// complex of `R` on the punctured plane. Sections are those with `a, b ≥ 0`;
    /// `H¹` classes are those with `a, b < 0`.
    fn laurent_oracle(d: i64) -> (usize, usize) {
        let mut h0 = 0;
        let mut h1 = 0;
        for a in -40..=40i64 {
            let b = d - a;
            if a >= 0 && b >= 0 {
                h0 += 1;
            }
            if a < 0 && b < 0 {
                h1 += 1;
            }
        }
        (h0, h1)
    }

    #[test]
    fn localization_examples() {
        let r = ring();
        let free: Module = structure_module(&r);
        let p = localize_piece(&free, &r.var(0), 0, 3);
        assert_eq!(p.dim(), 4);
        assert_eq!(p.status, Stabilization::Certified { exponent: 0 });

        let kx: Module = FPGradedModule::cyclic(r.clone(), "k[x]", 0, vec![r.var(1)]);
        for d in -4..4 {
            assert_eq!(localize_piece(&kx, &r.var(1), d, 5).dim(), 0);
            assert_eq!(localize_piece(&kx, &r.var(0), d, 5).dim(), 1);
        }
    }

    #[test]
    fn heuristic_localization_reports_steps() {
        let r = ring();
        let f = r.field();
        let minus_x = HomogPoly::from_terms(&r, vec![(vec![1, 0], f.from_i64(-1))]).unwrap();
        let rel = Relation::new(&[1, 1], vec![r.var(1), minus_x]).unwrap().unwrap();
        let ideal: Module = FPGradedModule::new(r.clone(), "I", vec![1, 1], vec![rel]);
        let p = localize_piece(&ideal, &r.var(0), 0, 4);
        assert_eq!(p.dim(), 5);
        assert_eq!(p.status, Stabilization::Heuristic { steps: 1 });
    }

    #[test]
    fn punctured_plane_matches_laurent_oracle() {
        let r = ring();
        let free: Module = structure_module(&r);
        let w = punctured(&r);
        let cx = cech_complex(&free, &w, 12);
        for d in -6..=6 {
            let deg = cx.degree(d);
            assert_eq!((deg.h0.dim(), deg.h1_dim), laurent_oracle(d), "degree {d}");
            // C⁰ = x^a y^b with a ≥ -12, b ≥ 0 plus the symmetric set; C¹ has a, b ≥ -12
            let c0 = 2 * (d + 12 + 1).max(0) as usize;
            let c1 = (d + 24 + 1).max(0) as usize;
            assert_eq!((deg.c0_dim(), deg.c1_dim()), (c0, c1));
            assert!(deg.d1_after_d0_vanishes());
        }
    }

    #[test]
    fn single_cover_is_the_localization() {
        let r = ring();
        let kx: Module = FPGradedModule::cyclic(r.clone(), "k[x]", 0, vec![r.var(1)]);
        let w = OpenSubset::new(r.clone(), vec![r.var(0)]).unwrap();
        let cx = cech_complex(&kx, &w, 7);
        for d in -5..5 {
            let deg = cx.degree(d);
            assert_eq!(deg.c1_dim(), 0);
            assert_eq!(deg.h0.dim(), localize_piece(&kx, &r.var(0), d, 7).dim());
            assert_eq!(deg.h1_dim, 0);
        }
    }

    #[test]
    fn zero_module_gives_zero_complex() {
        let r = ring();
        let zero: Module = FPGradedModule::free(r.clone(), "0", vec![]);
        let cx = cech_complex(&zero, &punctured(&r), 5);
        for d in -3..3 {
            let deg = cx.degree(d);
            assert_eq!((deg.c0_dim(), deg.c1_dim(), deg.h1_dim), (0, 0, 0));
        }
    }

    #[test]
    fn three_element_cover_complex() {
        let r = PolyRing::new(FieldSpec::Rationals, &["x", "y", "z"]).unwrap();
        let free: Module = structure_module(&r);
        let w = OpenSubset::new(r.clone(), vec![r.var(0), r.var(1), r.var(2)]).unwrap();
        let cx = cech_complex(&free, &w, 4);
        for d in -3..=2 {
            let deg = cx.degree(d);
            assert!(deg.d1_after_d0_vanishes());
            assert_eq!(deg.h0.dim(), r.hilbert(d));
            // H¹ of O on A³ minus the origin vanishes in every degree
            assert_eq!(deg.h1_dim, 0, "degree {d}");
        }
    }

    #[test]
    fn sections_of_k_x_on_punctured_plane() {
        let r = ring();
        let kx: Module = FPGradedModule::cyclic(r.clone(), "k[x]", 0, vec![r.var(1)]);
        let w = punctured(&r);
        let policy = CapPolicy::for_window(-6, 6);
        let st = cech_stable(&kx, &w, -6, 6, &policy).unwrap();
        assert!(st.table.h0.values().all(|&v| v == 1));
        assert!(st.table.h1.values().all(|&v| v == 0));
        assert!(!st.status.heuristic);
        let s = st.sections();
        assert!(crate::graded::actions_commute(s.as_ref(), -6, 5));
    }

    #[test]
    fn restriction_examples() {
        let r = ring();
        let w = punctured(&r);
        let policy = CapPolicy::for_window(-3, 3);
        let free: Module = structure_module(&r);
        let s = sections_window(&free, &w, -3, 3, &policy).unwrap();
        let res = restriction_to_sections(&s);
        for d in 0..=3 {
            assert_eq!(res.rank(d), r.hilbert(d));
        }
        assert!(res.is_natural(-3, 3));

        let k: Module = FPGradedModule::cyclic(r.clone(), "k", 0, vec![r.var(0), r.var(1)]);
        let s = sections_window(&k, &w, -3, 3, &policy).unwrap();
        assert!((-3..=3).all(|d| s.dim(d) == 0));
        assert!(restriction_to_sections(&s).matrix(0).is_zero());
    }

    #[test]
    fn stabilize_finds_first_plateau() {
        let policy = CapPolicy { initial: 2, step: 2, max_escalations: 5 };
        let (cap, v) = stabilize(&policy, |c| Ok((c.min(6)) as i32)).unwrap();
        assert_eq!((cap, v), (6, 6));
        let err = stabilize(&policy, Ok).unwrap_err();
        assert_eq!(err, Error::CapExhausted { max_cap: 12 });
    }

    #[test]
    fn section_multiplication_by_one_and_by_x() {
        let r = ring();
        let f = r.field();
        let w = punctured(&r);
        let o = structure_module(&r);
        let om: Module = o.clone();
        let kx: Module = FPGradedModule::cyclic(r.clone(), "k[x]", 0, vec![r.var(1)]);
        let ring_cx = cech_complex(&om, &w, 6);
        let m_cx = cech_complex(&kx, &w, 6);
        let out_cx = cech_complex(&kx, &w, 12);
        // 1 ∈ Γ(W, O)_0 is the diagonal image of 1
        let one = ring_cx.diagonal(0).mul_vec(&[f.one()]);
        let s_deg = -3;
        let h0 = m_cx.degree(s_deg).h0.clone();
        assert_eq!(h0.dim(), 1);
        let s = h0.basis_vector(0);
        let prod = section_mult(&ring_cx, &one, 0, &m_cx, &s, s_deg, &out_cx).unwrap();
        // compare with s raised to cap 12: numerators multiplied by f_i^6
        let raised: Vec<Scalar> = {
            let up = cech_complex(&kx, &w, 12);
            let deg = up.degree(s_deg);
            assert!(deg.h0.contains(&prod));
            prod.clone()
        };
        assert!(raised.iter().any(|c| !c.is_zero()));

        // x · (x^-3) = x^-2
        let x_sec = ring_cx.diagonal(1).mul_vec(&o.element(&[r.var(0)], 1).unwrap());
        let prod = section_mult(&ring_cx, &x_sec, 1, &m_cx, &s, s_deg, &out_cx).unwrap();
        let expected_cx = cech_complex(&kx, &w, 12);
        let target = expected_cx.degree(-2);
        assert!(target.h0.contains(&prod));
        assert!(prod.iter().any(|c| !c.is_zero()));
        // the product agrees with the module action x : Γ_{-3} -> Γ_{-2} transported to cap 12
        let lifted = expected_cx.degree(-3);
        let act = expected_cx.c0_act(0, -3);
        let s12 = lifted.h0.basis_vector(0);
        let via_action = act.mul_vec(&s12);
        let a = Subspace::from_columns(&Mat::from_columns(f, prod.len(), std::slice::from_ref(&prod)));
        assert!(a.contains(&via_action));
    }

    #[test]
    fn maps_induce_on_sections() {
        let r = ring();
        let w = punctured(&r);
        let free = structure_module(&r);
        let kx = FPGradedModule::cyclic(r.clone(), "k[x]", 0, vec![r.var(1)]);
        let proj = map_from_gen_images(&free, kx.as_module(), vec![vec![r.field().one()]]).unwrap();
        let sr = SectionsModule::new(cech_complex(&free.as_module(), &w, 10));
        let sk = SectionsModule::new(cech_complex(&kx.as_module(), &w, 10));
        let g = induced_on_sections(&proj, &sr, &sk);
        for d in -6..=4 {
            assert_eq!(g.rank(d), if d >= 0 { 1 } else { 0 }, "degree {d}");
        }
        assert!(g.is_natural(-5, 3));
    }
}
