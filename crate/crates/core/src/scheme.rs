//! The double-origin class of schemes `X = U ⊔_W V` (two copies of `Spec R`
//! glued along a union of distinguished opens), quasicoherent sheaves on it,
//! sections over `X, U, V, W`, and the checks built on them.
//!
//! Sheaves are either glued by the identity from patch modules, or direct
//! images `ι_{U,*}Ñ`, whose `V` patch is `Γ(W, Ñ)` realized at a cap. Anything
//! involving `W` is realized at a denominator cap and escalated until the
//! verdict-bearing table stops moving.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cech::{
    cech_stable_on, induced_on_sections, restriction_to_sections, stabilize_by, status_over, CapPolicy, CechCover,
    MultiplesCache, OpenSubset, StabilizationSummary, StableCech, StableOn,
};
use crate::error::{Error, Result};
use crate::graded::{
    kernel_dw, tensor_quotient, DegreewiseModule, DirectSum, FPGradedModule, GradedModuleMap, KernelModule, Memo,
    Module, ModuleMap,
};
use crate::linalg::{Mat, Scalar, Subspace};
use crate::poly::{HomogPoly, PolyRing};

/// One of the four opens every computation can be asked about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Patch {
    X,
    U,
    V,
    W,
}

impl FromStr for Patch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Patch::X),
            "U" | "u" => Ok(Patch::U),
            "V" | "v" => Ok(Patch::V),
            "W" | "w" => Ok(Patch::W),
            other => Err(Error::InvalidInput(format!("unknown open `{other}` (expected X, U, V or W)"))),
        }
    }
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Patch::X => "X",
            Patch::U => "U",
            Patch::V => "V",
            Patch::W => "W",
        };
        f.write_str(s)
    }
}

fn address(m: &Module) -> usize {
    Arc::as_ptr(m) as *const () as usize
}

fn same_module(a: &Module, b: &Module) -> bool {
    address(a) == address(b)
}

/// How the two patch modules are identified over `W`.
#[derive(Clone)]
pub enum Gluing {
    /// `m_V` is glued to `m_U` by the identity on localizations.
    Identity { patch_v: Module },
    /// `ι_{U,*}`: the `V` patch is `Γ(W, m_U~)`.
    DirectImage,
}

/// A quasicoherent sheaf on `X`.
pub struct QcohSheafOnX {
    name: String,
    patch_u: Module,
    gluing: Gluing,
}

impl QcohSheafOnX {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn patch_u(&self) -> &Module {
        &self.patch_u
    }

    pub fn gluing(&self) -> &Gluing {
        &self.gluing
    }

    pub fn is_direct_image(&self) -> bool {
        matches!(self.gluing, Gluing::DirectImage)
    }

    /// True when both patches carry the same module object.
    fn single_module(&self) -> bool {
        match &self.gluing {
            Gluing::Identity { patch_v } => same_module(patch_v, &self.patch_u),
            Gluing::DirectImage => true,
        }
    }
}

impl fmt::Debug for QcohSheafOnX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.is_direct_image() { "direct image" } else { "glued" };
        write!(f, "QcohSheafOnX({}: {} of {})", self.name, kind, self.patch_u.name())
    }
}

/// A morphism of sheaves, determined by its `U` component.
pub struct SheafMap {
    source: Arc<QcohSheafOnX>,
    target: Arc<QcohSheafOnX>,
    on_u: ModuleMap,
}

impl SheafMap {
    /// Both sheaves must be glued the same way; identity gluings need one module per sheaf.
    pub fn new(source: Arc<QcohSheafOnX>, target: Arc<QcohSheafOnX>, on_u: ModuleMap) -> Result<Arc<Self>> {
        if !same_module(on_u.source(), &source.patch_u) || !same_module(on_u.target(), &target.patch_u) {
            return Err(Error::InvalidInput(format!(
                "map {} -> {} does not act on the U patches of {} and {}",
                on_u.source().name(),
                on_u.target().name(),
                source.name,
                target.name
            )));
        }
        if source.is_direct_image() != target.is_direct_image() {
            return Err(Error::InvalidInput("sheaf maps need both sheaves glued the same way".into()));
        }
        if !source.single_module() || !target.single_module() {
            return Err(Error::InvalidInput("sheaf maps need the same module on both patches".into()));
        }
        Ok(Arc::new(SheafMap { source, target, on_u }))
    }

    pub fn source(&self) -> &Arc<QcohSheafOnX> {
        &self.source
    }

    pub fn target(&self) -> &Arc<QcohSheafOnX> {
        &self.target
    }

    pub fn on_u(&self) -> &ModuleMap {
        &self.on_u
    }
}

/// `X = U ⊔_W V` with `U = V = Spec R`.
pub struct DoubleGluedScheme {
    ring: Arc<PolyRing>,
    overlap: OpenSubset,
    structure: Arc<FPGradedModule>,
    covers: Memo<usize, Arc<CechCover>>,
    equalizers: Memo<(usize, u32), Arc<KernelModule>>,
}

impl fmt::Debug for DoubleGluedScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleGluedScheme(glued along {})", self.overlap.describe())
    }
}

/// Dimension table of sections over one open.
#[derive(Clone, Debug)]
pub struct SectionsTable {
    pub open: Patch,
    pub module: Module,
    pub dims: BTreeMap<i64, usize>,
    pub cap: Option<u32>,
    pub status: StabilizationSummary,
}

/// Per-degree codimension of `image(M(U) ⊗ O(W) -> M(W))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionCertificate {
    pub sections: BTreeMap<i64, usize>,
    pub image: BTreeMap<i64, usize>,
    pub codim: BTreeMap<i64, usize>,
    pub generator_range: (i64, i64),
    pub cap: u32,
    pub status: StabilizationSummary,
}

impl ObstructionCertificate {
    pub fn obstructed_degrees(&self) -> Vec<i64> {
        self.codim.iter().filter(|(_, &c)| c > 0).map(|(&d, _)| d).collect()
    }

    pub fn is_obstructed(&self) -> bool {
        !self.obstructed_degrees().is_empty()
    }
}

/// Degreewise comparison of `M ⊗ Γ(W, O)` with `Γ(W, M~)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectTable {
    pub tensor: BTreeMap<i64, usize>,
    pub sections: BTreeMap<i64, usize>,
    pub kernel: BTreeMap<i64, usize>,
    pub cokernel: BTreeMap<i64, usize>,
    pub defect: BTreeMap<i64, usize>,
    pub cap: u32,
    pub status: StabilizationSummary,
}

impl DefectTable {
    pub fn is_zero(&self) -> bool {
        self.defect.values().all(|&v| v == 0)
    }
}

/// Closed set of exactness verdicts for `A -> B -> C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceVerdict {
    Exact,
    LeftExactNotRightExact,
    NotLeftExact,
    NotAComplex,
}

impl SequenceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            SequenceVerdict::Exact => "exact",
            SequenceVerdict::LeftExactNotRightExact => "left-exact-not-right-exact",
            SequenceVerdict::NotLeftExact => "not-left-exact",
            SequenceVerdict::NotAComplex => "not-a-complex",
        }
    }
}

/// Per-degree homology of `0 -> A -> B -> C -> 0` over one open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub open: Patch,
    pub dims_a: BTreeMap<i64, usize>,
    pub dims_b: BTreeMap<i64, usize>,
    pub dims_c: BTreeMap<i64, usize>,
    pub kernel: BTreeMap<i64, usize>,
    pub homology: BTreeMap<i64, usize>,
    pub cokernel: BTreeMap<i64, usize>,
    pub composite_zero: bool,
    pub cap: Option<u32>,
    pub status: StabilizationSummary,
}

impl ExactnessReport {
    pub fn verdict(&self) -> SequenceVerdict {
        let zero = |t: &BTreeMap<i64, usize>| t.values().all(|&v| v == 0);
        if !self.composite_zero {
            SequenceVerdict::NotAComplex
        } else if !zero(&self.kernel) || !zero(&self.homology) {
            SequenceVerdict::NotLeftExact
        } else if !zero(&self.cokernel) {
            SequenceVerdict::LeftExactNotRightExact
        } else {
            SequenceVerdict::Exact
        }
    }

    /// Degrees where right exactness fails.
    pub fn failing_degrees(&self) -> Vec<i64> {
        self.cokernel.iter().filter(|(_, &c)| c > 0).map(|(&d, _)| d).collect()
    }

    fn same_homology(&self, other: &Self) -> bool {
        self.kernel == other.kernel
            && self.homology == other.homology
            && self.cokernel == other.cokernel
            && self.composite_zero == other.composite_zero
    }
}

/// A nonzero `H¹` class with an explicit Čech cocycle.
#[derive(Clone, Debug)]
pub struct Witness {
    pub degree: i64,
    pub cap: u32,
    pub cocycle: Vec<Scalar>,
    pub representative: String,
    pub not_a_coboundary: bool,
    pub h1: BTreeMap<i64, usize>,
}

impl DoubleGluedScheme {
    pub fn new(overlap: OpenSubset) -> Arc<Self> {
        let ring = overlap.ring().clone();
        Arc::new(DoubleGluedScheme {
            structure: FPGradedModule::free(ring.clone(), "R", vec![0]),
            ring,
            overlap,
            covers: Memo::new(),
            equalizers: Memo::new(),
        })
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn overlap(&self) -> &OpenSubset {
        &self.overlap
    }

    pub fn structure_module(&self) -> Module {
        self.structure.clone()
    }

    /// The structure sheaf, glued by the identity.
    pub fn structure_sheaf(&self) -> Arc<QcohSheafOnX> {
        self.glued("O_X", self.structure_module())
    }

    /// `M~` on both patches, glued by the identity.
    pub fn glued(&self, name: &str, m: Module) -> Arc<QcohSheafOnX> {
        Arc::new(QcohSheafOnX { name: name.into(), patch_u: m.clone(), gluing: Gluing::Identity { patch_v: m } })
    }

    /// Separate patch modules glued by the identity over `W`; checked when sections over `W` are taken.
    pub fn glued_pair(&self, name: &str, u: Module, v: Module) -> Arc<QcohSheafOnX> {
        Arc::new(QcohSheafOnX { name: name.into(), patch_u: u, gluing: Gluing::Identity { patch_v: v } })
    }

    /// `ι_{U,*}(Ñ)`.
    pub fn direct_image_from_u(&self, name: &str, n: Module) -> Arc<QcohSheafOnX> {
        Arc::new(QcohSheafOnX { name: name.into(), patch_u: n, gluing: Gluing::DirectImage })
    }

    /// Čech data of a module on `W`, shared by every computation on this scheme.
    pub fn cover(&self, m: &Module) -> Arc<CechCover> {
        self.covers.get_or(address(m), || CechCover::new(m.clone(), &self.overlap))
    }

    /// Sections over an open, realized at `cap` where `W` is involved.
    pub fn sections_at(&self, s: &Arc<QcohSheafOnX>, open: Patch, cap: u32) -> Result<Module> {
        Ok(match open {
            Patch::U => s.patch_u.clone(),
            Patch::V => match &s.gluing {
                Gluing::Identity { patch_v } => patch_v.clone(),
                Gluing::DirectImage => self.cover(&s.patch_u).sections_at(cap),
            },
            Patch::W => self.cover(&s.patch_u).sections_at(cap),
            Patch::X => self.equalizer(s, cap)?,
        })
    }

    /// `Γ(X) = ker(m_U ⊕ m_V -> Γ(W), (a, b) ↦ res a - res b)`.
    fn equalizer(&self, s: &Arc<QcohSheafOnX>, cap: u32) -> Result<Arc<KernelModule>> {
        if !s.single_module() {
            return Err(Error::InvalidInput(format!(
                "sections over X of {} need the same module on both patches",
                s.name
            )));
        }
        let key = (Arc::as_ptr(s) as usize, cap);
        Ok(self.equalizers.get_or(key, || {
            let w = self.cover(&s.patch_u).sections_at(cap);
            let res_u = restriction_to_sections(&w);
            let direct = s.is_direct_image();
            let patch_v: Module = if direct { w.clone() } else { s.patch_u.clone() };
            let sum: Module = DirectSum::new(vec![s.patch_u.clone(), patch_v]);
            let f = self.ring.field();
            let wm: Module = w.clone();
            let diff = GradedModuleMap::from_fn(sum, w.clone(), 0, move |d| {
                let ru = res_u.matrix(d);
                let rv = if direct { Mat::identity(f, wm.dim(d)) } else { ru.as_ref().clone() };
                ru.hstack(&rv.scale(&f.neg(&f.one())))
            });
            kernel_dw(&diff)
        }))
    }

    /// The map induced on sections over an open, realized at `cap`.
    pub fn map_at(&self, m: &SheafMap, open: Patch, cap: u32) -> Result<ModuleMap> {
        let direct = m.source.is_direct_image();
        let on_w = || {
            induced_on_sections(
                &m.on_u,
                &self.cover(&m.source.patch_u).sections_at(cap),
                &self.cover(&m.target.patch_u).sections_at(cap),
            )
        };
        Ok(match open {
            Patch::U => m.on_u.clone(),
            Patch::V if direct => on_w(),
            Patch::V => m.on_u.clone(),
            Patch::W => on_w(),
            Patch::X => {
                let src = self.equalizer(&m.source, cap)?;
                let tgt = self.equalizer(&m.target, cap)?;
                let on_v = if direct { on_w() } else { m.on_u.clone() };
                let on_u = m.on_u.clone();
                let f = self.ring.field();
                let (s2, t2) = (src.clone(), tgt.clone());
                GradedModuleMap::from_fn(src, tgt, 0, move |d| {
                    let block = Mat::block_diag(f, &[on_u.matrix(d).as_ref(), on_v.matrix(d).as_ref()]);
                    t2.subspace(d).coords_matrix().mul(&block).mul(&s2.subspace(d).inclusion())
                })
            }
        })
    }

    fn involves_w(s: &QcohSheafOnX, open: Patch) -> bool {
        match open {
            Patch::U => false,
            Patch::V => s.is_direct_image(),
            Patch::W | Patch::X => true,
        }
    }

    /// Dimension table of sections over `open`, with cap escalation where `W` is involved.
    ///
    /// For gluings with distinct patch modules, sections over `W` are computed from
    /// both sides and compared.
    pub fn sheaf_sections(
        &self,
        s: &Arc<QcohSheafOnX>,
        open: Patch,
        lo: i64,
        hi: i64,
        policy: &CapPolicy,
    ) -> Result<SectionsTable> {
        let dims_of = |m: &Module| (lo..=hi).map(|d| (d, m.dim(d))).collect::<BTreeMap<_, _>>();
        if !Self::involves_w(s, open) {
            let module = self.sections_at(s, open, 0)?;
            let dims = dims_of(&module);
            return Ok(SectionsTable { open, module, dims, cap: None, status: StabilizationSummary::default() });
        }
        let (cap, (module, dims)) = stabilize_by(
            policy,
            |cap| {
                let m = self.sections_at(s, open, cap)?;
                let dims = dims_of(&m);
                Ok((m, dims))
            },
            |a, b| a.1 == b.1,
        )?;
        let mut status = status_over(&self.cover(&s.patch_u).at_cap(cap), lo, hi);
        if let (Patch::W, Gluing::Identity { patch_v }) = (open, &s.gluing) {
            if !same_module(patch_v, &s.patch_u) {
                let other = cech_stable_on(&self.cover(patch_v), lo, hi, policy, StableOn::H0)?;
                for (d, &u_side) in &dims {
                    let v_side = other.table.h0[d];
                    if u_side != v_side {
                        return Err(Error::GluingMismatch { degree: *d, u_side, v_side });
                    }
                }
                status.merge(other.status);
            }
        }
        Ok(SectionsTable { open, module, dims, cap: Some(cap), status })
    }

    /// Codimension of the `O(W)`-span of `res(M(U))` inside `M(W)`, degree by degree.
    ///
    /// Elements of `M(U)` are taken from degrees `[lo - buffer, hi]` with
    /// `buffer = max generator degree + 2`.
    pub fn flat_quotient_obstruction(
        &self,
        s: &Arc<QcohSheafOnX>,
        lo: i64,
        hi: i64,
        policy: &CapPolicy,
    ) -> Result<ObstructionCertificate> {
        let m = s.patch_u.clone();
        let gens = m.generator_degrees().ok_or_else(|| {
            Error::InvalidInput(format!("obstruction needs a finitely presented U patch, got {}", m.name()))
        })?;
        let buffer = gens.iter().copied().max().unwrap_or(0).max(0) + 2;
        let range = (lo - buffer, hi);
        if let Some(&bad) = gens.iter().find(|&&e| e < range.0 || e > range.1) {
            return Err(Error::BufferTooSmall { degree: bad, lo: range.0, hi: range.1 });
        }
        let f = self.ring.field();
        let caches: Vec<MultiplesCache> = (range.0..=range.1)
            .flat_map(|e| {
                let n = m.dim(e);
                let m = m.clone();
                (0..n).map(move |j| {
                    let mut v = vec![f.zero(); n];
                    v[j] = f.one();
                    MultiplesCache::new(m.clone(), v, e)
                })
            })
            .collect();
        let ring_cover = self.cover(&self.structure_module());
        let m_cover = self.cover(&m);
        let eval = |cap: u32| -> Result<ObstructionCertificate> {
            let rcx = ring_cover.at_cap(cap);
            let mcx = m_cover.at_cap(cap);
            let mut cert = ObstructionCertificate {
                sections: BTreeMap::new(),
                image: BTreeMap::new(),
                codim: BTreeMap::new(),
                generator_range: range,
                cap,
                status: status_over(&mcx, lo, hi),
            };
            cert.status.merge(status_over(&rcx, range.0 - hi, hi - range.0));
            for d in lo..=hi {
                let target = mcx.degree(d);
                let mut columns = Vec::new();
                for cache in &caches {
                    let da = d - cache.degree();
                    let ring_deg = rcx.degree(da);
                    let a: Vec<Vec<Scalar>> = (0..ring_deg.h0.dim()).map(|k| ring_deg.h0.basis_vector(k)).collect();
                    if a.is_empty() {
                        continue;
                    }
                    for v in crate::cech::times_restriction(&rcx, &a, da, cache, &mcx)? {
                        columns.push(target.h0.coords(&v));
                    }
                }
                let dim = target.h0.dim();
                let rank = Mat::from_columns(f, dim, &columns).rank();
                cert.sections.insert(d, dim);
                cert.image.insert(d, rank);
                cert.codim.insert(d, dim - rank);
            }
            Ok(cert)
        };
        let (_, cert) = stabilize_by(policy, eval, |a, b| a.codim == b.codim)?;
        Ok(cert)
    }

    /// Homology of the sections of `A -f-> B -g-> C` over one open.
    pub fn sequence_report(
        &self,
        f: &SheafMap,
        g: &SheafMap,
        open: Patch,
        lo: i64,
        hi: i64,
        policy: &CapPolicy,
    ) -> Result<ExactnessReport> {
        if !Arc::ptr_eq(&f.target, &g.source) {
            return Err(Error::InvalidInput("maps do not compose: target of f is not the source of g".into()));
        }
        let involves = Self::involves_w(&f.source, open)
            || Self::involves_w(&f.target, open)
            || Self::involves_w(&g.target, open);
        let eval = |cap: u32| -> Result<ExactnessReport> {
            let fm = self.map_at(f, open, cap)?;
            let gm = self.map_at(g, open, cap)?;
            let mut r = sequence_tables(&fm, &gm, lo, hi);
            r.open = open;
            if involves {
                r.cap = Some(cap);
                for s in [&f.source, &f.target, &g.target] {
                    r.status.merge(status_over(&self.cover(&s.patch_u).at_cap(cap), lo, hi));
                }
            }
            Ok(r)
        };
        if !involves {
            return eval(0);
        }
        Ok(stabilize_by(policy, eval, |a, b| a.same_homology(b))?.1)
    }
}

/// Homology tables of `A -f-> B -g-> C` from the degreewise matrices.
pub fn sequence_tables(f: &ModuleMap, g: &ModuleMap, lo: i64, hi: i64) -> ExactnessReport {
    let mut r = ExactnessReport {
        open: Patch::U,
        dims_a: BTreeMap::new(),
        dims_b: BTreeMap::new(),
        dims_c: BTreeMap::new(),
        kernel: BTreeMap::new(),
        homology: BTreeMap::new(),
        cokernel: BTreeMap::new(),
        composite_zero: true,
        cap: None,
        status: StabilizationSummary::default(),
    };
    for d in lo..=hi {
        let (a, b, c) = (f.source().dim(d), f.target().dim(d), g.target().dim(d));
        let (rf, rg) = (f.rank(d), g.rank(d));
        r.dims_a.insert(d, a);
        r.dims_b.insert(d, b);
        r.dims_c.insert(d, c);
        r.kernel.insert(d, a - rf);
        r.homology.insert(d, b - rg - rf);
        r.cokernel.insert(d, c - rg);
        if !g.matrix(d).mul(&f.matrix(d)).is_zero() {
            r.composite_zero = false;
        }
    }
    r
}

/// Degreewise kernel and cokernel of `F ⊗ Γ(W, O) -> Γ(W, F~)`, `g ⊗ a ↦ a · res(g)`.
pub fn flat_sections_defect(
    module: &Arc<FPGradedModule>,
    w: &OpenSubset,
    lo: i64,
    hi: i64,
    policy: &CapPolicy,
) -> Result<DefectTable> {
    let ring = module.ring().clone();
    let ring_cover = CechCover::new(FPGradedModule::free(ring.clone(), "R", vec![0]), w);
    flat_sections_defect_with(module, &ring_cover, lo, hi, policy)
}

/// As [`flat_sections_defect`], reusing Čech data of the structure module.
pub fn flat_sections_defect_with(
    module: &Arc<FPGradedModule>,
    ring_cover: &Arc<CechCover>,
    lo: i64,
    hi: i64,
    policy: &CapPolicy,
) -> Result<DefectTable> {
    let ring = module.ring().clone();
    let f = ring.field();
    let m: Module = module.clone();
    let gens = module.gen_degrees().to_vec();
    let caches: Vec<MultiplesCache> = (0..gens.len())
        .map(|i| {
            let polys: Vec<HomogPoly> = gens
                .iter()
                .enumerate()
                .map(|(j, &e)| {
                    if j == i {
                        HomogPoly::constant(&ring, f.one())
                    } else {
                        HomogPoly::zero(gens[i] - e)
                    }
                })
                .collect();
            Ok(MultiplesCache::new(m.clone(), module.element(&polys, gens[i])?, gens[i]))
        })
        .collect::<Result<_>>()?;
    let m_cover = CechCover::new(m.clone(), ring_cover.open());
    let eval = |cap: u32| -> Result<DefectTable> {
        let rcx = ring_cover.at_cap(cap);
        let mcx = m_cover.at_cap(cap);
        let gamma_o = ring_cover.sections_at(cap);
        let mut t = DefectTable {
            tensor: BTreeMap::new(),
            sections: BTreeMap::new(),
            kernel: BTreeMap::new(),
            cokernel: BTreeMap::new(),
            defect: BTreeMap::new(),
            cap,
            status: status_over(&mcx, lo, hi),
        };
        for d in lo..=hi {
            let target = mcx.degree(d);
            let tq = tensor_quotient(module, gamma_o.as_ref(), d);
            let mut columns = Vec::with_capacity(tq.ambient);
            for (i, cache) in caches.iter().enumerate() {
                let da = d - gens[i];
                let rdeg = rcx.degree(da);
                t.status.merge(rdeg.status);
                let a: Vec<Vec<Scalar>> = (0..rdeg.h0.dim()).map(|k| rdeg.h0.basis_vector(k)).collect();
                if a.is_empty() {
                    continue;
                }
                for v in crate::cech::times_restriction(&rcx, &a, da, cache, &mcx)? {
                    columns.push(target.h0.coords(&v));
                }
            }
            let dim = target.h0.dim();
            let phi = Mat::from_columns(f, dim, &columns).mul(&tq.lift());
            let rank = phi.rank();
            t.tensor.insert(d, tq.dim());
            t.sections.insert(d, dim);
            t.kernel.insert(d, tq.dim() - rank);
            t.cokernel.insert(d, dim - rank);
            t.defect.insert(d, tq.dim() - rank + dim - rank);
        }
        Ok(t)
    };
    Ok(stabilize_by(policy, eval, |a, b| a.defect == b.defect && a.kernel == b.kernel)?.1)
}

/// Searches the window from the top for a nonzero `H¹(W, M~)` class.
///
/// Absence in the window proves nothing about affineness.
pub fn witness_nonaffine(
    w: &OpenSubset,
    lo: i64,
    hi: i64,
    module: &Module,
    policy: &CapPolicy,
) -> Result<Option<Witness>> {
    let cover = CechCover::new(module.clone(), w);
    let stable = cech_stable_on(&cover, lo, hi, policy, StableOn::H1)?;
    Ok(witness_in(&stable))
}

/// The top-degree nonzero `H¹` class of an already stabilized Čech computation.
pub fn witness_in(stable: &StableCech) -> Option<Witness> {
    let degree = stable.table.h1.iter().rev().find(|(_, &h)| h > 0).map(|(&d, _)| d)?;
    let cx = &stable.complex;
    let deg = cx.degree(degree);
    let f = cx.module().ring().field();
    let n = deg.c1_dim();
    let image = Subspace::from_columns(&deg.d0);
    let is_class = |v: &[Scalar]| deg.d1.mul_vec(v).iter().all(Scalar::is_zero) && !image.contains(v);
    let standard = (0..n).map(|k| {
        let mut v = vec![f.zero(); n];
        v[k] = f.one();
        v
    });
    let cocycle = standard
        .chain(deg.d1.kernel_basis().columns())
        .find(|v| is_class(v))
        .expect("a nonzero H¹ class has a cocycle outside the coboundaries");
    let with = deg.d0.hstack(&Mat::from_columns(f, n, std::slice::from_ref(&cocycle)));
    let not_a_coboundary = with.rank() == deg.d0.rank() + 1;
    Some(Witness {
        degree,
        cap: stable.cap,
        representative: cx.describe_c1(degree, &cocycle),
        cocycle,
        not_a_coboundary,
        h1: stable.table.h1.clone(),
    })
}
