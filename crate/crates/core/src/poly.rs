//! Standard-graded polynomial rings, monomial bases, homogeneous polynomials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::linalg::{FieldSpec, Scalar};

pub type Exponent = Vec<u32>;

/// Monomials of one total degree in graded-lex order with an index lookup.
#[derive(Debug)]
pub struct MonomialBasis {
    pub degree: i64,
    pub monomials: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// `k[x_1, ..., x_n]` with every variable in degree one.
pub struct PolyRing {
    field: FieldSpec,
    vars: Vec<String>,
    bases: Mutex<HashMap<i64, Arc<MonomialBasis>>>,
}

impl PolyRing {
    pub fn new(field: FieldSpec, vars: &[&str]) -> Result<Arc<Self>> {
        Self::from_names(field, vars.iter().map(|s| s.to_string()).collect())
    }

    pub fn from_names(field: FieldSpec, vars: Vec<String>) -> Result<Arc<Self>> {
        if vars.is_empty() {
            return Err(Error::InvalidInput("polynomial ring needs at least one variable".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::InvalidInput(format!("bad variable name `{v}`")));
            }
            if !v.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                return Err(Error::InvalidInput(format!("variable `{v}` must start with a letter")));
            }
            if vars[..i].contains(v) {
                return Err(Error::InvalidInput(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Arc::new(PolyRing { field, vars, bases: Mutex::new(HashMap::new()) }))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Monomial basis of `R_d` (empty for `d < 0`).
    pub fn basis(&self, d: i64) -> Arc<MonomialBasis> {
        if let Some(b) = self.bases.lock().unwrap().get(&d) {
            return b.clone();
        }
        let monomials = if d < 0 { Vec::new() } else { monomials_of_degree(self.nvars(), d as u32) };
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let b = Arc::new(MonomialBasis { degree: d, monomials, index });
        self.bases.lock().unwrap().entry(d).or_insert(b).clone()
    }

    /// `dim R_d`.
    pub fn hilbert(&self, d: i64) -> usize {
        self.basis(d).len()
    }

    pub fn same_as(&self, other: &PolyRing) -> bool {
        self.field == other.field && self.vars == other.vars
    }

    pub fn var(&self, i: usize) -> HomogPoly {
        let mut e = vec![0; self.nvars()];
        e[i] = 1;
        HomogPoly::monomial(self, e, self.field.one())
    }

    pub fn format_monomial(&self, e: &[u32]) -> String {
        format_exponents(&self.vars, &e.iter().map(|&x| x as i64).collect::<Vec<_>>())
    }
}

impl fmt::Debug for PolyRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.field, self.vars.join(","))
    }
}

/// Formats a (possibly Laurent) monomial like `x^-1*y^-1`; the empty monomial is `1`.
pub fn format_exponents(vars: &[String], e: &[i64]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .zip(e)
        .filter(|(_, &a)| a != 0)
        .map(|(v, &a)| if a == 1 { v.clone() } else { format!("{v}^{a}") })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Exponent vectors of total degree `d` in `n` variables, lex-descending
/// (`x^2, xy, y^2` for two variables in degree 2).
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fill(&mut out, &mut cur, 0, d);
    out
}

fn fill(out: &mut Vec<Exponent>, cur: &mut Exponent, pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

/// A homogeneous polynomial; the zero polynomial carries whatever degree it was built with.
#[derive(Clone, PartialEq, Eq)]
pub struct HomogPoly {
    pub degree: i64,
    pub terms: BTreeMap<Exponent, Scalar>,
}

impl HomogPoly {
    pub fn zero(degree: i64) -> Self {
        HomogPoly { degree, terms: BTreeMap::new() }
    }

    pub fn constant(ring: &PolyRing, c: Scalar) -> Self {
        Self::monomial(ring, vec![0; ring.nvars()], c)
    }

    pub fn monomial(_ring: &PolyRing, e: Exponent, c: Scalar) -> Self {
        let degree = e.iter().map(|&a| a as i64).sum();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        HomogPoly { degree, terms }
    }

    /// Builds from arbitrary terms, rejecting mixed degrees.
    pub fn from_terms(ring: &PolyRing, terms: Vec<(Exponent, Scalar)>) -> Result<Self, String> {
        let f = ring.field();
        let mut acc: BTreeMap<Exponent, Scalar> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), ring.nvars());
            let slot = acc.entry(e).or_insert_with(|| f.zero());
            *slot = f.add(slot, &c);
        }
        acc.retain(|_, c| !c.is_zero());
        let mut degree = None;
        for e in acc.keys() {
            let d: i64 = e.iter().map(|&a| a as i64).sum();
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    return Err(format!("terms of degrees {d0} and {d}"));
                }
                _ => {}
            }
        }
        Ok(HomogPoly { degree: degree.unwrap_or(0), terms: acc })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for a single term with coefficient one (including the constant `1`).
    pub fn monomial_exponent(&self) -> Option<&Exponent> {
        if self.terms.len() == 1 {
            self.terms.keys().next()
        } else {
            None
        }
    }

    /// Coordinates in the graded-lex basis of `R_degree`.
    pub fn coords(&self, ring: &PolyRing) -> Vec<Scalar> {
        let basis = ring.basis(self.degree);
        let mut v = vec![ring.field().zero(); basis.len()];
        for (e, c) in &self.terms {
            v[basis.index_of(e).expect("monomial in basis")] = c.clone();
        }
        v
    }

    pub fn from_coords(ring: &PolyRing, degree: i64, coords: &[Scalar]) -> Self {
        let basis = ring.basis(degree);
        let terms = basis
            .monomials
            .iter()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        HomogPoly { degree, terms }
    }

    pub fn mul(&self, other: &HomogPoly, ring: &PolyRing) -> HomogPoly {
        let f = ring.field();
        let mut terms: BTreeMap<Exponent, Scalar> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e: Exponent = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let slot = terms.entry(e).or_insert_with(|| f.zero());
                *slot = f.add(slot, &f.mul(ca, cb));
            }
        }
        terms.retain(|_, c| !c.is_zero());
        HomogPoly { degree: self.degree + other.degree, terms }
    }

    pub fn pow(&self, n: u32, ring: &PolyRing) -> HomogPoly {
        let mut acc = HomogPoly::constant(ring, ring.field().one());
        for _ in 0..n {
            acc = acc.mul(self, ring);
        }
        acc
    }

    pub fn display(&self, ring: &PolyRing) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        // leading term first
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono = ring.format_monomial(e);
            let neg = c.is_negative();
            let cabs = if neg { ring.field().neg(c) } else { c.clone() };
            let body = if mono == "1" {
                cabs.to_string()
            } else if cabs.is_one() {
                mono
            } else {
                format!("{cabs}*{mono}")
            };
            match (i, neg) {
                (0, true) => out.push_str(&format!("-{body}")),
                (0, false) => out.push_str(&body),
                (_, true) => out.push_str(&format!(" - {body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
            }
        }
        out
    }
}

impl fmt::Debug for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogPoly(deg {}, {:?})", self.degree, self.terms)
    }
}

/// Parses infix polynomial text such as `x^2*y - 3*y^3` or `-2/3*x`.
///
/// Returns the raw term list; homogeneity is checked by the caller.
pub fn parse_terms(ring: &PolyRing, text: &str) -> Result<Vec<(Exponent, Scalar)>, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut terms = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1i64;
        while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            // allow negative exponents to be rejected explicitly below
            if bytes[i] == b'^' && i + 1 < bytes.len() && bytes[i + 1] == b'-' {
                return Err("negative exponent".into());
            }
            i += 1;
        }
        let term = &s[start..i];
        if term.is_empty() {
            return Err("dangling sign".into());
        }
        terms.push(parse_term(ring, term, sign)?);
    }
    Ok(terms)
}

fn parse_term(ring: &PolyRing, term: &str, sign: i64) -> Result<(Exponent, Scalar), String> {
    let f = ring.field();
    let mut num = BigInt::from(sign);
    let mut den = BigInt::from(1);
    let mut e = vec![0u32; ring.nvars()];
    for factor in term.split('*') {
        if factor.is_empty() {
            return Err(format!("empty factor in `{term}`"));
        }
        if factor.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            let (n, d) = match factor.split_once('/') {
                Some((n, d)) => (n, d),
                None => (factor, "1"),
            };
            let n: BigInt = n.parse().map_err(|_| format!("bad coefficient `{factor}`"))?;
            let d: BigInt = d.parse().map_err(|_| format!("bad coefficient `{factor}`"))?;
            num *= n;
            den *= d;
        } else {
            let (name, exp) = match factor.split_once('^') {
                Some((v, x)) => (v, x.parse::<u32>().map_err(|_| format!("bad exponent in `{factor}`"))?),
                None => (factor, 1),
            };
            let idx = ring.var_index(name).ok_or_else(|| format!("unknown variable `{name}`"))?;
            e[idx] += exp;
        }
    }
    let c = f.from_ratio(&num, &den).map_err(|e| e.to_string())?;
    Ok((e, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Arc<PolyRing> {
        PolyRing::new(FieldSpec::Rationals, &["x", "y"]).unwrap()
    }

    #[test]
    fn graded_lex_order() {
        let r = ring();
        assert_eq!(r.basis(2).monomials, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(r.basis(-1).is_empty());
        assert_eq!(r.basis(0).monomials, vec![vec![0, 0]]);
    }

    #[test]
    fn hilbert_function_of_polynomial_ring() {
        let r3 = PolyRing::new(FieldSpec::Rationals, &["a", "b", "c"]).unwrap();
        for d in 0..8i64 {
            let expected = ((d + 1) * (d + 2) / 2) as usize;
            assert_eq!(r3.hilbert(d), expected);
            assert_eq!(ring().hilbert(d), d as usize + 1);
        }
    }

    #[test]
    fn parses_and_prints() {
        let r = ring();
        let p = HomogPoly::from_terms(&r, parse_terms(&r, "x^2*y - 3*y^3").unwrap()).unwrap();
        assert_eq!(p.degree, 3);
        assert_eq!(p.display(&r), "x^2*y - 3*y^3");
        let p = HomogPoly::from_terms(&r, parse_terms(&r, "-2/4*x").unwrap()).unwrap();
        assert_eq!(p.display(&r), "-1/2*x");
        assert!(HomogPoly::from_terms(&r, parse_terms(&r, "x + 1").unwrap()).is_err());
        assert!(parse_terms(&r, "z").is_err());
        assert!(parse_terms(&r, "x^-1").is_err());
    }

    #[test]
    fn rejects_duplicate_vars() {
        assert!(PolyRing::new(FieldSpec::Rationals, &["x", "x"]).is_err());
        assert!(PolyRing::new(FieldSpec::Rationals, &[]).is_err());
    }
}
