//! Graded Matlis duality `M^∨ = Hom(M, E)` with `E = R^∨`, realized degreewise
//! as the vector-space dual with transposed variable actions, and the
//! sheaf-level `(-)⁺ = ι_{U,*}((-)(U)^∨)~`.

use std::sync::Arc;

use crate::cech::CapPolicy;
use crate::error::Result;
use crate::graded::{DegreewiseModule, GradedModuleMap, GradedPiece, Memo, Module, ModuleMap};
use crate::linalg::Mat;
use crate::poly::{HomogPoly, PolyRing};
use crate::scheme::{DoubleGluedScheme, ExactnessReport, Patch, QcohSheafOnX, SheafMap};

/// `(M^∨)_d = (M_{-d})^*`, with `x_i` acting by the transpose of `x_i : M_{-d-1} -> M_{-d}`.
pub struct DualizedModule {
    base: Module,
    name: String,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl DualizedModule {
    pub fn new(base: Module) -> Arc<Self> {
        let name = format!("({})^∨", base.name());
        Self::named(base, name)
    }

    pub fn named(base: Module, name: String) -> Arc<Self> {
        Arc::new(DualizedModule { base, name, acts: Memo::new() })
    }

    pub fn base(&self) -> &Module {
        &self.base
    }
}

impl DegreewiseModule for DualizedModule {
    fn ring(&self) -> &Arc<PolyRing> {
        self.base.ring()
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        Arc::new(GradedPiece::opaque(d, self.base.dim(-d)))
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.acts.get_or((var, d), || Arc::new(self.base.act(var, -d - 1).transpose()))
    }

    fn monomial_act(&self, e: &[u32], from: i64) -> Mat {
        let k: i64 = e.iter().map(|&a| a as i64).sum();
        self.base.monomial_act(e, -from - k).transpose()
    }

    /// A bidual has the pieces and actions of the original module.
    fn torsion_exponent(&self, f: &HomogPoly) -> Option<u32> {
        self.base.dual_base().and_then(|m| m.torsion_exponent(f))
    }

    fn dual_base(&self) -> Option<&Module> {
        Some(&self.base)
    }
}

pub fn matlis_dual(m: &Module) -> Arc<DualizedModule> {
    DualizedModule::new(m.clone())
}

/// The graded injective hull `E = R^∨` of the residue field.
pub fn injective_hull(ring: &Arc<PolyRing>) -> Arc<DualizedModule> {
    DualizedModule::named(crate::cech::structure_module(ring), "E".into())
}

/// `f^∨ : N^∨ -> M^∨` for `f : M -> N`, between the given dual objects.
pub fn matlis_dual_map_between(f: &ModuleMap, dual_target: Module, dual_source: Module) -> ModuleMap {
    assert_eq!(f.shift(), 0, "only degree-preserving maps are dualized");
    let g = f.clone();
    GradedModuleMap::from_fn(dual_target, dual_source, 0, move |d| g.matrix(-d).transpose())
}

/// `f^∨ : N^∨ -> M^∨`, with fresh dual objects.
pub fn matlis_dual_map(f: &ModuleMap) -> ModuleMap {
    let dt: Module = matlis_dual(f.target());
    let ds: Module = matlis_dual(f.source());
    matlis_dual_map_between(f, dt, ds)
}

/// `𝓜⁺ = ι_{U,*}((𝓜(U)^∨)~)`.
pub fn plus_functor(x: &DoubleGluedScheme, s: &QcohSheafOnX) -> Arc<QcohSheafOnX> {
    let dual: Module = matlis_dual(s.patch_u());
    x.direct_image_from_u(&format!("{}+", s.name()), dual)
}

/// `f⁺ : 𝓝⁺ -> 𝓜⁺` for `f : 𝓜 -> 𝓝`, between the given plus sheaves.
pub fn plus_map(f: &SheafMap, plus_target: &Arc<QcohSheafOnX>, plus_source: &Arc<QcohSheafOnX>) -> Result<Arc<SheafMap>> {
    let on_u = matlis_dual_map_between(f.on_u(), plus_target.patch_u().clone(), plus_source.patch_u().clone());
    SheafMap::new(plus_target.clone(), plus_source.clone(), on_u)
}

/// Both halves of the biduality computation.
#[derive(Clone, Debug)]
pub struct BidualReport {
    /// `C⁺ -> B⁺ -> A⁺` over `U`.
    pub plus_over_u: ExactnessReport,
    /// `A⁺⁺ -> B⁺⁺ -> C⁺⁺` over `V`.
    pub plusplus_over_v: ExactnessReport,
}

/// Applies `(-)⁺` twice to `A -f-> B -g-> C` and reports exactness over `V`,
/// together with the intermediate `⁺`-sequence over `U`.
pub fn bidual_pipeline(
    x: &DoubleGluedScheme,
    f: &SheafMap,
    g: &SheafMap,
    lo: i64,
    hi: i64,
    policy: &CapPolicy,
) -> Result<BidualReport> {
    let (a, b, c) = (f.source(), f.target(), g.target());
    let (ap, bp, cp) = (plus_functor(x, a), plus_functor(x, b), plus_functor(x, c));
    let gp = plus_map(g, &cp, &bp)?;
    let fp = plus_map(f, &bp, &ap)?;
    let plus_over_u = x.sequence_report(&gp, &fp, Patch::U, -hi, -lo, policy)?;
    let (app, bpp, cpp) = (plus_functor(x, &ap), plus_functor(x, &bp), plus_functor(x, &cp));
    let fpp = plus_map(&fp, &app, &bpp)?;
    let gpp = plus_map(&gp, &bpp, &cpp)?;
    let plusplus_over_v = x.sequence_report(&fpp, &gpp, Patch::V, lo, hi, policy)?;
    Ok(BidualReport { plus_over_u, plusplus_over_v })
}
