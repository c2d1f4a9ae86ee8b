use std::collections::HashMap;
use std::sync::Arc;

use super::module::{BasisLabel, DegreewiseModule, GradedModuleMap, GradedPiece, Memo, Module, ModuleMap};
use crate::error::{Error, Result};
use crate::linalg::{image_quotient, Mat, Quotient, Scalar};
use crate::poly::{Exponent, HomogPoly, PolyRing};

/// A homogeneous column `Σ_i r_i e_i` in `⊕ R(-e_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub degree: i64,
    pub entries: Vec<HomogPoly>,
}

impl Relation {
    /// Infers the column degree and checks that every entry agrees with it.
    pub fn new(gen_degrees: &[i64], entries: Vec<HomogPoly>) -> Result<Option<Self>, String> {
        if entries.len() != gen_degrees.len() {
            return Err(format!("relation has {} entries for {} generators", entries.len(), gen_degrees.len()));
        }
        let mut degree = None;
        for (p, e) in entries.iter().zip(gen_degrees) {
            if p.is_zero() {
                continue;
            }
            let d = p.degree + e;
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => return Err(format!("relation entries land in degrees {d0} and {d}")),
                _ => {}
            }
        }
        Ok(degree.map(|degree| {
            let entries = entries
                .into_iter()
                .zip(gen_degrees)
                .map(|(p, e)| if p.is_zero() { HomogPoly::zero(degree - e) } else { p })
                .collect();
            Relation { degree, entries }
        }))
    }
}

struct Realized {
    piece: Arc<GradedPiece>,
    ambient: Vec<(usize, Exponent)>,
    index: HashMap<(usize, Exponent), usize>,
    quotient: Quotient,
}

/// `coker(⊕_j R(-δ_j) -> ⊕_i R(-e_i))`, realized one degree at a time.
pub struct FPGradedModule {
    ring: Arc<PolyRing>,
    name: String,
    gen_degrees: Vec<i64>,
    relations: Vec<Relation>,
    pieces: Memo<i64, Arc<Realized>>,
    acts: Memo<(usize, i64), Arc<Mat>>,
}

impl FPGradedModule {
    pub fn new(ring: Arc<PolyRing>, name: &str, gen_degrees: Vec<i64>, relations: Vec<Relation>) -> Arc<Self> {
        for r in &relations {
            for (p, e) in r.entries.iter().zip(&gen_degrees) {
                assert!(p.is_zero() || p.degree + e == r.degree, "relation is not homogeneous");
            }
        }
        Arc::new(FPGradedModule {
            ring,
            name: name.to_string(),
            gen_degrees,
            relations,
            pieces: Memo::new(),
            acts: Memo::new(),
        })
    }

    /// `⊕ R(-a_i)`.
    pub fn free(ring: Arc<PolyRing>, name: &str, degrees: Vec<i64>) -> Arc<Self> {
        Self::new(ring, name, degrees, Vec::new())
    }

    /// `R(-shift)/(p_1, ..., p_k)`.
    pub fn cyclic(ring: Arc<PolyRing>, name: &str, shift: i64, polys: Vec<HomogPoly>) -> Arc<Self> {
        let relations = polys
            .into_iter()
            .filter(|p| !p.is_zero())
            .map(|p| Relation { degree: p.degree + shift, entries: vec![p] })
            .collect();
        Self::new(ring, name, vec![shift], relations)
    }

    pub fn gen_degrees(&self) -> &[i64] {
        &self.gen_degrees
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn as_module(self: &Arc<Self>) -> Module {
        self.clone()
    }

    fn realize(&self, d: i64) -> Arc<Realized> {
        self.pieces.get_or(d, || Arc::new(self.compute(d)))
    }

    fn compute(&self, d: i64) -> Realized {
        let f = self.ring.field();
        let mut ambient = Vec::new();
        for (i, &e) in self.gen_degrees.iter().enumerate() {
            for m in &self.ring.basis(d - e).monomials {
                ambient.push((i, m.clone()));
            }
        }
        let index: HashMap<(usize, Exponent), usize> =
            ambient.iter().enumerate().map(|(k, x)| (x.clone(), k)).collect();
        let mut columns = Vec::new();
        for rel in self.relations.iter().filter(|r| r.degree <= d) {
            for mu in &self.ring.basis(d - rel.degree).monomials {
                let mut col = vec![f.zero(); ambient.len()];
                for (i, p) in rel.entries.iter().enumerate() {
                    for (e, c) in &p.terms {
                        let mono: Exponent = e.iter().zip(mu).map(|(a, b)| a + b).collect();
                        let k = index[&(i, mono)];
                        col[k] = f.add(&col[k], c);
                    }
                }
                columns.push(col);
            }
        }
        let sub = Mat::from_columns(f, ambient.len(), &columns);
        let quotient = image_quotient(f, &sub, ambient.len());
        let labels = quotient
            .coset
            .iter()
            .map(|&k| BasisLabel::Term { generator: ambient[k].0, monomial: ambient[k].1.clone() })
            .collect();
        let piece = Arc::new(GradedPiece { degree: d, dim: quotient.dim(), labels });
        Realized { piece, ambient, index, quotient }
    }

    /// Coordinates (in `piece(degree)`) of the element `Σ p_i g_i`.
    pub fn element(&self, polys: &[HomogPoly], degree: i64) -> Result<Vec<Scalar>> {
        if polys.len() != self.gen_degrees.len() {
            return Err(Error::InvalidInput(format!(
                "element of {} needs {} components, got {}",
                self.name,
                self.gen_degrees.len(),
                polys.len()
            )));
        }
        let f = self.ring.field();
        let r = self.realize(degree);
        let mut v = vec![f.zero(); r.ambient.len()];
        for (i, p) in polys.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if p.degree + self.gen_degrees[i] != degree {
                return Err(Error::InvalidInput(format!(
                    "component {} of degree {} does not land in degree {degree}",
                    i + 1,
                    p.degree
                )));
            }
            for (e, c) in &p.terms {
                v[r.index[&(i, e.clone())]] = c.clone();
            }
        }
        Ok(r.quotient.project(&v))
    }

    /// True when every relation is a single monomial term in one generator.
    fn is_monomial_presentation(&self) -> bool {
        self.relations.iter().all(|r| {
            let nonzero: Vec<&HomogPoly> = r.entries.iter().filter(|p| !p.is_zero()).collect();
            nonzero.len() == 1 && nonzero[0].terms.len() == 1
        })
    }
}

impl DegreewiseModule for FPGradedModule {
    fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn piece(&self, d: i64) -> Arc<GradedPiece> {
        self.realize(d).piece.clone()
    }

    fn act(&self, var: usize, d: i64) -> Arc<Mat> {
        self.acts.get_or((var, d), || {
            let src = self.realize(d);
            let tgt = self.realize(d + 1);
            let targets: Vec<usize> = src
                .quotient
                .coset
                .iter()
                .map(|&k| {
                    let (g, mono) = &src.ambient[k];
                    let mut up = mono.clone();
                    up[var] += 1;
                    tgt.index[&(*g, up)]
                })
                .collect();
            Arc::new(tgt.quotient.projection.select_columns(&targets))
        })
    }

    fn monomial_act(&self, e: &[u32], from: i64) -> Mat {
        let src = self.realize(from);
        let tgt = self.realize(from + e.iter().map(|&k| k as i64).sum::<i64>());
        let targets: Vec<usize> = src
            .quotient
            .coset
            .iter()
            .map(|&k| {
                let (g, mono) = &src.ambient[k];
                let up: Exponent = mono.iter().zip(e).map(|(a, b)| a + b).collect();
                tgt.index[&(*g, up)]
            })
            .collect();
        tgt.quotient.projection.select_columns(&targets)
    }

    fn torsion_exponent(&self, f: &HomogPoly) -> Option<u32> {
        if f.is_zero() {
            return None;
        }
        if f.degree == 0 || self.relations.is_empty() {
            // units act invertibly; free modules over a domain are torsion-free
            return Some(0);
        }
        let support = f.monomial_exponent()?;
        if !self.is_monomial_presentation() {
            return None;
        }
        let mut bound = 0;
        for r in &self.relations {
            for p in r.entries.iter().filter(|p| !p.is_zero()) {
                for e in p.terms.keys() {
                    for (v, &a) in e.iter().enumerate() {
                        if support[v] > 0 {
                            bound = bound.max(a);
                        }
                    }
                }
            }
        }
        Some(bound)
    }

    fn generator_degrees(&self) -> Option<Vec<i64>> {
        Some(self.gen_degrees.clone())
    }
}

/// The map out of a finitely presented module determined by generator images.
///
/// `images[i]` are coordinates in `target.piece(e_i)`.
pub fn map_from_gen_images(source: &Arc<FPGradedModule>, target: Module, images: Vec<Vec<Scalar>>) -> Result<ModuleMap> {
    if !source.ring().same_as(target.ring()) {
        return Err(Error::InvalidInput("source and target live over different rings".into()));
    }
    if images.len() != source.gen_degrees.len() {
        return Err(Error::InvalidInput(format!(
            "{} generator images given for {} generators",
            images.len(),
            source.gen_degrees.len()
        )));
    }
    for (i, (img, &e)) in images.iter().zip(&source.gen_degrees).enumerate() {
        if img.len() != target.dim(e) {
            return Err(Error::InvalidInput(format!("image of generator {} has wrong length", i + 1)));
        }
    }
    let f = source.ring().field();
    for (j, rel) in source.relations.iter().enumerate() {
        let mut sum = vec![f.zero(); target.dim(rel.degree)];
        for (i, p) in rel.entries.iter().enumerate() {
            let term = super::module::poly_times(target.as_ref(), p, &images[i], source.gen_degrees[i]);
            for (s, t) in sum.iter_mut().zip(term) {
                *s = f.add(s, &t);
            }
        }
        if sum.iter().any(|x| !x.is_zero()) {
            return Err(Error::RelationNotKilled { relation: j });
        }
    }
    let src = source.clone();
    let tgt = target.clone();
    let multiples: Memo<(usize, i64), Arc<Vec<Vec<Scalar>>>> = Memo::new();
    Ok(GradedModuleMap::from_fn(source.as_module(), target, 0, move |d| {
        let piece = src.piece(d);
        let mut cols = Vec::with_capacity(piece.dim);
        for label in &piece.labels {
            let BasisLabel::Term { generator, monomial } = label else { unreachable!() };
            let e = src.gen_degrees[*generator];
            let k = d - e;
            let mults = multiples.get_or((*generator, k), || {
                Arc::new(super::module::monomial_multiples(tgt.as_ref(), &images[*generator], e, k as u32))
            });
            let idx = src.ring.basis(k).index_of(monomial).unwrap();
            cols.push(mults[idx].clone());
        }
        Mat::from_columns(f, tgt.dim(d), &cols)
    }))
}
