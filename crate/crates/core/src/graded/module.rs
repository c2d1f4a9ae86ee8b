use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use crate::linalg::{FieldSpec, Mat, Scalar};
use crate::poly::{Exponent, HomogPoly, PolyRing};

/// A pure per-key cache. Values are computed outside the lock, so concurrent
/// readers may race to compute a value but always observe the first one stored.
pub(crate) struct Memo<K, V> {
    map: Mutex<HashMap<K, V>>,
}

impl<K: Eq + Hash + Clone, V: Clone> Memo<K, V> {
    pub(crate) fn new() -> Self {
        Memo { map: Mutex::new(HashMap::new()) }
    }

    pub(crate) fn get_or(&self, key: K, compute: impl FnOnce() -> V) -> V {
        if let Some(v) = self.map.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v = compute();
        self.map.lock().unwrap().entry(key).or_insert(v).clone()
    }
}

impl<K, V> fmt::Debug for Memo<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Memo")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    /// `monomial * generator` in a finitely presented module.
    Term { generator: usize, monomial: Exponent },
    /// Basis vector of a derived space with no natural name.
    Opaque(usize),
}

/// One finite-dimensional graded piece.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    pub degree: i64,
    pub dim: usize,
    pub labels: Vec<BasisLabel>,
}

impl GradedPiece {
    pub fn opaque(degree: i64, dim: usize) -> Self {
        GradedPiece { degree, dim, labels: (0..dim).map(BasisLabel::Opaque).collect() }
    }
}

/// A graded module over a standard-graded polynomial ring, known through its
/// pieces and the multiplication maps `x_i : M_d -> M_{d+1}`.
///
/// Pieces and actions must be pure functions of the degree; implementations
/// memoize them.
pub trait DegreewiseModule: Send + Sync {
    fn ring(&self) -> &Arc<PolyRing>;

    fn name(&self) -> String;

    fn piece(&self, d: i64) -> Arc<GradedPiece>;

    /// Matrix of multiplication by variable `var`, `dim(d+1) × dim(d)`.
    fn act(&self, var: usize, d: i64) -> Arc<Mat>;

    fn dim(&self, d: i64) -> usize {
        self.piece(d).dim
    }

    /// Matrix of multiplication by the monomial `x^e`, `M_from -> M_{from + |e|}`.
    fn monomial_act(&self, e: &[u32], from: i64) -> Mat {
        let f = self.ring().field();
        let mut acc = Mat::identity(f, self.dim(from));
        let mut d = from;
        for (var, &k) in e.iter().enumerate() {
            for _ in 0..k {
                acc = self.act(var, d).mul(&acc);
                d += 1;
            }
        }
        acc
    }

    /// An exponent `s` with `0 :_M f^∞ = 0 :_M f^s`, when it can be read off exactly.
    fn torsion_exponent(&self, _f: &HomogPoly) -> Option<u32> {
        None
    }

    /// Degrees of a generating set, when the module is finitely presented.
    fn generator_degrees(&self) -> Option<Vec<i64>> {
        None
    }

    /// For a graded dual `N^∨`, the module `N`.
    fn dual_base(&self) -> Option<&Module> {
        None
    }
}

pub type Module = Arc<dyn DegreewiseModule>;

impl fmt::Debug for dyn DegreewiseModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DegreewiseModule({})", self.name())
    }
}

pub fn field_of(m: &dyn DegreewiseModule) -> FieldSpec {
    m.ring().field()
}

/// Matrices of all monomials of degree `k` acting from degree `from`, in graded-lex order.
pub fn monomial_actions(m: &dyn DegreewiseModule, from: i64, k: u32) -> Vec<Mat> {
    let ring = m.ring();
    let f = ring.field();
    let mut level = vec![Mat::identity(f, m.dim(from))];
    for j in 0..k {
        let prev_basis = ring.basis(j as i64);
        let next_basis = ring.basis(j as i64 + 1);
        let acts: Vec<Arc<Mat>> = (0..ring.nvars()).map(|v| m.act(v, from + j as i64)).collect();
        level = next_basis
            .monomials
            .iter()
            .map(|e| {
                let v = e.iter().position(|&a| a > 0).unwrap();
                let mut lower = e.clone();
                lower[v] -= 1;
                acts[v].mul(&level[prev_basis.index_of(&lower).unwrap()])
            })
            .collect();
    }
    level
}

/// All monomial multiples of degree `k` of a vector `v ∈ M_from`, in graded-lex order.
pub fn monomial_multiples(m: &dyn DegreewiseModule, v: &[Scalar], from: i64, k: u32) -> Vec<Vec<Scalar>> {
    let ring = m.ring();
    let mut level = vec![v.to_vec()];
    for j in 0..k {
        let prev_basis = ring.basis(j as i64);
        let next_basis = ring.basis(j as i64 + 1);
        let acts: Vec<Arc<Mat>> = (0..ring.nvars()).map(|var| m.act(var, from + j as i64)).collect();
        level = next_basis
            .monomials
            .iter()
            .map(|e| {
                let var = e.iter().position(|&a| a > 0).unwrap();
                let mut lower = e.clone();
                lower[var] -= 1;
                acts[var].mul_vec(&level[prev_basis.index_of(&lower).unwrap()])
            })
            .collect();
    }
    level
}

/// Matrix of multiplication by a homogeneous polynomial, `M_from -> M_{from + deg p}`.
pub fn poly_action(m: &dyn DegreewiseModule, p: &HomogPoly, from: i64) -> Mat {
    let f = field_of(m);
    let target = from + p.degree;
    let mut out = Mat::zeros(f, m.dim(target), m.dim(from));
    if p.is_zero() || p.degree < 0 {
        return out;
    }
    if p.degree == 0 {
        let c = p.terms.values().next().unwrap();
        return Mat::identity(f, m.dim(from)).scale(c);
    }
    let basis = m.ring().basis(p.degree);
    let actions = monomial_actions(m, from, p.degree as u32);
    for (e, c) in &p.terms {
        out = out.add(&actions[basis.index_of(e).unwrap()].scale(c));
    }
    out
}

/// Multiplies `v ∈ M_from` by `p`.
pub fn poly_times(m: &dyn DegreewiseModule, p: &HomogPoly, v: &[Scalar], from: i64) -> Vec<Scalar> {
    let f = field_of(m);
    let mut out = vec![f.zero(); m.dim(from + p.degree)];
    if p.is_zero() || p.degree < 0 {
        return out;
    }
    let basis = m.ring().basis(p.degree);
    let multiples = monomial_multiples(m, v, from, p.degree as u32);
    for (e, c) in &p.terms {
        let w = &multiples[basis.index_of(e).unwrap()];
        for (o, x) in out.iter_mut().zip(w) {
            if !x.is_zero() {
                *o = f.add(o, &f.mul(c, x));
            }
        }
    }
    out
}

/// Checks `x_i x_j = x_j x_i` as maps `M_d -> M_{d+2}` for `d` in `[lo, hi]`.
pub fn actions_commute(m: &dyn DegreewiseModule, lo: i64, hi: i64) -> bool {
    let n = m.ring().nvars();
    for d in lo..=hi {
        for i in 0..n {
            for j in (i + 1)..n {
                let ij = m.act(i, d + 1).mul(&m.act(j, d));
                let ji = m.act(j, d + 1).mul(&m.act(i, d));
                if ij != ji {
                    return false;
                }
            }
        }
    }
    true
}

type MatrixFn = dyn Fn(i64) -> Mat + Send + Sync;

/// A degree-preserving (up to `shift`) module homomorphism, given degreewise.
pub struct GradedModuleMap {
    source: Module,
    target: Module,
    shift: i64,
    matrices: Box<MatrixFn>,
    cache: Memo<i64, Arc<Mat>>,
}

pub type ModuleMap = Arc<GradedModuleMap>;

impl GradedModuleMap {
    /// `matrix(d)` must be `dim target(d + shift) × dim source(d)`.
    pub fn from_fn(
        source: Module,
        target: Module,
        shift: i64,
        matrices: impl Fn(i64) -> Mat + Send + Sync + 'static,
    ) -> ModuleMap {
        Arc::new(GradedModuleMap { source, target, shift, matrices: Box::new(matrices), cache: Memo::new() })
    }

    pub fn identity(m: Module) -> ModuleMap {
        let inner = m.clone();
        let f = field_of(m.as_ref());
        Self::from_fn(m.clone(), m, 0, move |d| Mat::identity(f, inner.dim(d)))
    }

    pub fn zero(source: Module, target: Module) -> ModuleMap {
        let (s, t) = (source.clone(), target.clone());
        let f = field_of(source.as_ref());
        Self::from_fn(source, target, 0, move |d| Mat::zeros(f, t.dim(d), s.dim(d)))
    }

    /// `g ∘ f`.
    pub fn compose(g: &ModuleMap, f: &ModuleMap) -> ModuleMap {
        let (g2, f2) = (g.clone(), f.clone());
        let fs = f.shift;
        Self::from_fn(f.source.clone(), g.target.clone(), f.shift + g.shift, move |d| {
            g2.matrix(d + fs).mul(&f2.matrix(d))
        })
    }

    pub fn source(&self) -> &Module {
        &self.source
    }

    pub fn target(&self) -> &Module {
        &self.target
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn matrix(&self, d: i64) -> Arc<Mat> {
        self.cache.get_or(d, || {
            let m = (self.matrices)(d);
            debug_assert_eq!(m.rows(), self.target.dim(d + self.shift));
            debug_assert_eq!(m.cols(), self.source.dim(d));
            Arc::new(m)
        })
    }

    pub fn rank(&self, d: i64) -> usize {
        self.matrix(d).rank()
    }

    /// Naturality squares `φ ∘ x_i = x_i ∘ φ` for `d` in `[lo, hi]`.
    pub fn is_natural(&self, lo: i64, hi: i64) -> bool {
        let n = self.source.ring().nvars();
        (lo..=hi).all(|d| {
            (0..n).all(|v| {
                let left = self.matrix(d + 1).mul(&self.source.act(v, d));
                let right = self.target.act(v, d + self.shift).mul(&self.matrix(d));
                left == right
            })
        })
    }
}

impl fmt::Debug for GradedModuleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedModuleMap({} -> {})", self.source.name(), self.target.name())
    }
}
