use std::sync::Arc;

use super::fp::FPGradedModule;
use super::module::{field_of, poly_action, DegreewiseModule, GradedModuleMap, GradedPiece, Memo, Module, ModuleMap};
use crate::linalg::{image_quotient, Mat, Quotient, Subspace};
use crate::poly::PolyRing;

/// Kernel of a map, a submodule of its source.
pub struct KernelModule {
    map: ModuleMap,
    spaces: Memo<i64, Arc<Subspace>>,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl KernelModule {
    pub fn subspace(&self, d: i64) -> Arc<Subspace> {
        self.spaces.get_or(d, || Arc::new(Subspace::kernel(&self.map.matrix(d))))
    }

    pub fn inclusion(self: &Arc<Self>) -> ModuleMap {
        let me = self.clone();
        GradedModuleMap::from_fn(self.clone(), self.map.source().clone(), 0, move |d| me.subspace(d).inclusion())
    }
}

impl DegreewiseModule for KernelModule {
    fn ring(&self) -> &Arc<PolyRing> {
        self.map.source().ring()
    }

    fn name(&self) -> String {
        format!("ker({} -> {})", self.map.source().name(), self.map.target().name())
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        Arc::new(GradedPiece::opaque(d, self.subspace(d).dim()))
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.acts.get_or((var, d), || {
            let lo = self.subspace(d);
            let hi = self.subspace(d + 1);
            let moved = self.map.source().act(var, d).mul(&lo.inclusion());
            debug_assert!(moved.columns().iter().all(|c| hi.contains(c)));
            Arc::new(hi.coords_matrix().mul(&moved))
        })
    }
}

/// Image of a map, a submodule of its target.
pub struct ImageModule {
    map: ModuleMap,
    spaces: Memo<i64, Arc<Subspace>>,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl ImageModule {
    pub fn subspace(&self, d: i64) -> Arc<Subspace> {
        self.spaces.get_or(d, || Arc::new(Subspace::from_columns(&self.map.matrix(d - self.map.shift()))))
    }

    pub fn inclusion(self: &Arc<Self>) -> ModuleMap {
        let me = self.clone();
        GradedModuleMap::from_fn(self.clone(), self.map.target().clone(), 0, move |d| me.subspace(d).inclusion())
    }

    /// The corestriction `source -> image`.
    pub fn corestriction(self: &Arc<Self>) -> ModuleMap {
        let me = self.clone();
        let shift = self.map.shift();
        GradedModuleMap::from_fn(self.map.source().clone(), self.clone(), shift, move |d| {
            me.subspace(d + shift).coords_matrix().mul(&me.map.matrix(d))
        })
    }
}

impl DegreewiseModule for ImageModule {
    fn ring(&self) -> &Arc<PolyRing> {
        self.map.target().ring()
    }

    fn name(&self) -> String {
        format!("im({} -> {})", self.map.source().name(), self.map.target().name())
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        Arc::new(GradedPiece::opaque(d, self.subspace(d).dim()))
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.acts.get_or((var, d), || {
            let lo = self.subspace(d);
            let hi = self.subspace(d + 1);
            let moved = self.map.target().act(var, d).mul(&lo.inclusion());
            debug_assert!(moved.columns().iter().all(|c| hi.contains(c)));
            Arc::new(hi.coords_matrix().mul(&moved))
        })
    }
}

/// Cokernel of a map, a quotient of its target.
pub struct CokernelModule {
    map: ModuleMap,
    quotients: Memo<i64, Arc<Quotient>>,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl CokernelModule {
    pub fn quotient(&self, d: i64) -> Arc<Quotient> {
        self.quotients.get_or(d, || {
            let f = field_of(self.map.target().as_ref());
            let m = self.map.matrix(d - self.map.shift());
            Arc::new(image_quotient(f, &m, self.map.target().dim(d)))
        })
    }

    pub fn projection(self: &Arc<Self>) -> ModuleMap {
        let me = self.clone();
        GradedModuleMap::from_fn(self.map.target().clone(), self.clone(), 0, move |d| {
            me.quotient(d).projection.clone()
        })
    }
}

impl DegreewiseModule for CokernelModule {
    fn ring(&self) -> &Arc<PolyRing> {
        self.map.target().ring()
    }

    fn name(&self) -> String {
        format!("coker({} -> {})", self.map.source().name(), self.map.target().name())
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        Arc::new(GradedPiece::opaque(d, self.quotient(d).dim()))
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.acts.get_or((var, d), || {
            let lo = self.quotient(d);
            let hi = self.quotient(d + 1);
            Arc::new(hi.projection.mul(&self.map.target().act(var, d)).mul(&lo.lift()))
        })
    }
}

pub fn kernel_dw(map: &ModuleMap) -> Arc<KernelModule> {
    Arc::new(KernelModule { map: map.clone(), spaces: Memo::new(), acts: Memo::new() })
}

pub fn image_dw(map: &ModuleMap) -> Arc<ImageModule> {
    Arc::new(ImageModule { map: map.clone(), spaces: Memo::new(), acts: Memo::new() })
}

pub fn cokernel_dw(map: &ModuleMap) -> Arc<CokernelModule> {
    Arc::new(CokernelModule { map: map.clone(), quotients: Memo::new(), acts: Memo::new() })
}

/// `A ⊕ B ⊕ ...` with block-diagonal actions.
pub struct DirectSum {
    ring: Arc<PolyRing>,
    summands: Vec<Module>,
}

impl DirectSum {
    pub fn new(summands: Vec<Module>) -> Arc<Self> {
        assert!(!summands.is_empty(), "empty direct sum");
        let ring = summands[0].ring().clone();
        Arc::new(DirectSum { ring, summands })
    }

    pub fn summands(&self) -> &[Module] {
        &self.summands
    }

    /// Offsets of each summand inside `piece(d)`.
    pub fn offsets(&self, d: i64) -> Vec<usize> {
        let mut acc = 0;
        self.summands
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.dim(d);
                o
            })
            .collect()
    }
}

impl DegreewiseModule for DirectSum {
    fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    fn name(&self) -> String {
        self.summands.iter().map(|s| s.name()).collect::<Vec<_>>().join(" ⊕ ")
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        Arc::new(GradedPiece::opaque(d, self.summands.iter().map(|s| s.dim(d)).sum()))
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        let blocks: Vec<Arc<Mat>> = self.summands.iter().map(|s| s.act(var, d)).collect();
        let refs: Vec<&Mat> = blocks.iter().map(|b| b.as_ref()).collect();
        Arc::new(Mat::block_diag(self.ring.field(), &refs))
    }

    fn torsion_exponent(&self, f: &crate::poly::HomogPoly) -> Option<u32> {
        self.summands.iter().map(|s| s.torsion_exponent(f)).try_fold(0, |acc, t| t.map(|t| acc.max(t)))
    }
}

/// Degree-`d` homomorphisms `M -> N`: tuples `(v_i) ∈ ⊕ N_{d+e_i}` killing every relation.
pub fn hom_space(m: &FPGradedModule, n: &dyn DegreewiseModule, d: i64) -> Subspace {
    let f = field_of(n);
    let gens = m.gen_degrees();
    let widths: Vec<usize> = gens.iter().map(|e| n.dim(d + e)).collect();
    let total: usize = widths.iter().sum();
    let mut constraints = Mat::zeros(f, 0, total);
    for rel in m.relations() {
        let rows = n.dim(d + rel.degree);
        let mut block = Mat::zeros(f, rows, total);
        let mut col = 0;
        for (i, p) in rel.entries.iter().enumerate() {
            block.paste(0, col, &poly_action(n, p, d + gens[i]));
            col += widths[i];
        }
        constraints = constraints.vstack(&block);
    }
    Subspace::kernel(&constraints)
}

pub fn hom_piece(m: &FPGradedModule, n: &dyn DegreewiseModule, d: i64) -> GradedPiece {
    GradedPiece::opaque(d, hom_space(m, n, d).dim())
}

/// `(M ⊗ N)_d = (⊕ N_{d-e_i}) / (relation action)`.
///
/// The quotient's ambient space is the concatenation of the `N_{d-e_i}`, in generator order.
pub fn tensor_quotient(m: &FPGradedModule, n: &dyn DegreewiseModule, d: i64) -> Quotient {
    let f = field_of(n);
    let gens = m.gen_degrees();
    let widths: Vec<usize> = gens.iter().map(|e| n.dim(d - e)).collect();
    let total: usize = widths.iter().sum();
    let mut sub = Mat::zeros(f, total, 0);
    for rel in m.relations() {
        let from = d - rel.degree;
        let cols = n.dim(from);
        let mut block = Mat::zeros(f, total, cols);
        let mut row = 0;
        for (i, p) in rel.entries.iter().enumerate() {
            block.paste(row, 0, &poly_action(n, p, from));
            row += widths[i];
        }
        sub = sub.hstack(&block);
    }
    image_quotient(f, &sub, total)
}

pub fn tensor_piece(m: &FPGradedModule, n: &dyn DegreewiseModule, d: i64) -> GradedPiece {
    GradedPiece::opaque(d, tensor_quotient(m, n, d).dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::fp::{map_from_gen_images, Relation};
    use crate::graded::module::actions_commute;
    use crate::linalg::FieldSpec;
    use crate::poly::HomogPoly;

    fn ring() -> Arc<PolyRing> {
        PolyRing::new(FieldSpec::Rationals, &["x", "y"]).unwrap()
    }

    fn ideal(r: &Arc<PolyRing>) -> Arc<FPGradedModule> {
        let f = r.field();
        let minus_x = HomogPoly::from_terms(r, vec![(vec![1, 0], f.from_i64(-1))]).unwrap();
        let rel = Relation::new(&[1, 1], vec![r.var(1), minus_x]).unwrap().unwrap();
        FPGradedModule::new(r.clone(), "I", vec![1, 1], vec![rel])
    }

    #[test]
    fn cokernel_of_y_is_k_x() {
        let r = ring();
        let free = FPGradedModule::free(r.clone(), "R", vec![0]);
        let shifted = FPGradedModule::free(r.clone(), "R(-1)", vec![1]);
        let y = map_from_gen_images(&shifted, free.as_module(), vec![free.element(&[r.var(1)], 1).unwrap()]).unwrap();
        let c = cokernel_dw(&y);
        for d in -3..8 {
            assert_eq!(c.dim(d), if d >= 0 { 1 } else { 0 });
        }
        assert!(actions_commute(c.as_ref(), -2, 6));
        let k = kernel_dw(&y);
        assert!((-2..8).all(|d| k.dim(d) == 0));
        // short exact: dim B = dim A + dim C
        let im = image_dw(&y);
        for d in -2..8 {
            assert_eq!(free.dim(d), im.dim(d) + c.dim(d));
        }
        assert!(c.projection().is_natural(-2, 5));
        assert!(im.corestriction().is_natural(-2, 5));
    }

    #[test]
    fn trivial_kernels_and_images() {
        let r = ring();
        let free: Module = FPGradedModule::free(r.clone(), "R", vec![0]);
        let id = GradedModuleMap::identity(free.clone());
        assert!((-2..5).all(|d| kernel_dw(&id).dim(d) == 0));
        let zero = GradedModuleMap::zero(free.clone(), free.clone());
        assert!((-2..5).all(|d| image_dw(&zero).dim(d) == 0));
    }

    #[test]
    fn hom_examples() {
        let r = ring();
        let free = FPGradedModule::free(r.clone(), "R", vec![0]);
        for d in -2..5 {
            assert_eq!(hom_piece(&free, free.as_ref(), d).dim, free.dim(d));
        }
        let k = FPGradedModule::cyclic(r.clone(), "k", 0, vec![r.var(0), r.var(1)]);
        for d in -4..5 {
            assert_eq!(hom_piece(&k, free.as_ref(), d).dim, 0);
        }
        let i = ideal(&r);
        assert_eq!(hom_piece(&i, free.as_ref(), 0).dim, 1);
    }

    #[test]
    fn tensor_examples() {
        let r = ring();
        let free = FPGradedModule::free(r.clone(), "R", vec![0]);
        let k = FPGradedModule::cyclic(r.clone(), "k", 0, vec![r.var(0), r.var(1)]);
        assert_eq!(tensor_piece(&k, free.as_ref(), 0).dim, 1);
        assert_eq!(tensor_piece(&k, free.as_ref(), 1).dim, 0);
        assert_eq!(tensor_piece(&k, free.as_ref(), 3).dim, 0);
        let i = ideal(&r);
        let dims: Vec<usize> = (0..5).map(|d| tensor_piece(&i, free.as_ref(), d).dim).collect();
        assert_eq!(dims, vec![0, 2, 3, 4, 5]);
        for d in -2..4 {
            assert_eq!(tensor_piece(&free, k.as_ref(), d).dim, k.dim(d));
        }
    }

    #[test]
    fn direct_sum_blocks() {
        let r = ring();
        let a: Module = FPGradedModule::free(r.clone(), "R", vec![0]);
        let b: Module = FPGradedModule::cyclic(r.clone(), "k[x]", 0, vec![r.var(1)]);
        let s = DirectSum::new(vec![a, b]);
        assert_eq!(s.dim(3), 5);
        assert_eq!(s.offsets(3), vec![0, 4]);
        assert!(actions_commute(s.as_ref(), -1, 4));
    }
}
