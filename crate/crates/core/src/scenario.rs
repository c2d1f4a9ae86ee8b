//! Scenario files: a line-oriented description of a ring, a cover, module
//! presentations, maps, sheaves and the checks to run on them.
//!
//! ```text
//! # comment
//! [scenario]
//! name = example
//! window = -6:6
//!
//! [ring]
//! field = Q            # or Fp:65537
//! vars = x, y
//!
//! [scheme]
//! cover = x; y         # W = D(x) ∪ D(y)
//!
//! [module I]
//! gens = 1, 1          # generator degrees
//! rel = y; -x          # one line per relation, one entry per generator
//!
//! [map y: A -> B]
//! image = y            # one line per source generator, one entry per target generator
//!
//! [sheaf I]
//! direct_image = I     # or: glue = M   /   glue = M_U, M_V
//!
//! [check sections-W: sections]
//! sheaf = I
//! open = W
//!
//! [expect]
//! sections-W = computed
//! ```
//!
//! The module name `R` refers to the structure module unless defined.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cech::{structure_module, OpenSubset};
use crate::error::{Error, Result};
use crate::graded::{map_from_gen_images, FPGradedModule, Module, ModuleMap, Relation};
use crate::linalg::FieldSpec;
use crate::poly::{parse_terms, HomogPoly, PolyRing};
use crate::scheme::Patch;

/// Every verdict a check can produce.
pub const VERDICTS: &[&str] = &[
    "computed",
    "obstructed",
    "no-obstruction-in-window",
    "exact",
    "left-exact-not-right-exact",
    "not-left-exact",
    "not-a-complex",
    "h1-nonzero",
    "h1-zero-in-window",
    "witness-found",
    "no-witness-in-window",
    "no-defect-in-window",
    "defect",
    "inconclusive",
    "error",
];

pub const DEFAULT_WINDOW: (i64, i64) = (-6, 6);

/// Command-line overrides applied while building a scenario.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub window: Option<(i64, i64)>,
    pub den_cap: Option<u32>,
    pub field: Option<FieldSpec>,
}

/// How a sheaf is assembled from modules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafSpec {
    Glue { u: String, v: String },
    DirectImage { module: String },
}

/// Gluing used for sheaves built on the fly from modules in sequence checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceGluing {
    Glue,
    DirectImage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafRef {
    Sheaf(String),
    /// The module glued to itself by the identity.
    Module(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Sections { target: SheafRef, open: Patch },
    H1 { module: String },
    Obstruction { target: SheafRef },
    StarSequence { f: String, g: String, gluing: SequenceGluing, open: Patch },
    Bidual { f: String, g: String, gluing: SequenceGluing },
    Lemma21 { modules: Vec<String> },
    NonaffineWitness { module: String },
}

impl CheckKind {
    pub fn label(&self) -> &'static str {
        match self {
            CheckKind::Sections { .. } => "sections",
            CheckKind::H1 { .. } => "h1",
            CheckKind::Obstruction { .. } => "obstruction",
            CheckKind::StarSequence { .. } => "star-sequence",
            CheckKind::Bidual { .. } => "bidual",
            CheckKind::Lemma21 { .. } => "lemma21",
            CheckKind::NonaffineWitness { .. } => "nonaffine-witness",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckSpec {
    pub name: String,
    pub kind: CheckKind,
}

#[derive(Clone)]
pub struct MapDef {
    pub source: String,
    pub target: String,
    pub map: ModuleMap,
}

/// A parsed and validated scenario.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub window: (i64, i64),
    pub den_cap: Option<u32>,
    pub ring: Arc<PolyRing>,
    pub cover: OpenSubset,
    pub modules: BTreeMap<String, Arc<FPGradedModule>>,
    pub maps: BTreeMap<String, MapDef>,
    pub sheaves: BTreeMap<String, SheafSpec>,
    pub checks: Vec<CheckSpec>,
    pub expect: BTreeMap<String, String>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("window", &self.window)
            .field("cover", &self.cover.describe())
            .field("modules", &self.modules.keys().collect::<Vec<_>>())
            .field("maps", &self.maps.keys().collect::<Vec<_>>())
            .field("sheaves", &self.sheaves)
            .field("checks", &self.checks)
            .field("expect", &self.expect)
            .finish()
    }
}

impl Scenario {
    pub fn module(&self, name: &str) -> Result<Module> {
        self.modules.get(name).map(|m| m.as_module()).ok_or_else(|| Error::UnknownName(name.into()))
    }

    pub fn map(&self, name: &str) -> Result<&MapDef> {
        self.maps.get(name).ok_or_else(|| Error::UnknownName(name.into()))
    }
}

/// One `key = value` line.
#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

#[derive(Clone, Debug)]
struct Section {
    line: usize,
    header: String,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Parse { line: self.line, message: format!("missing `{key}` in [{}]", self.header) })
    }

    fn only_keys(&self, allowed: &[&str]) -> Result<()> {
        let mut seen: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(Error::Parse { line: e.line, message: format!("unknown key `{}` in [{}]", e.key, self.header) });
            }
            let repeatable = matches!(e.key.as_str(), "rel" | "image");
            if !repeatable && seen.contains(&e.key.as_str()) {
                return Err(Error::Parse { line: e.line, message: format!("duplicate key `{}`", e.key) });
            }
            seen.push(&e.key);
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let header = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, message: "section header must end with `]`".into() })?
                .trim()
                .to_string();
            if header.is_empty() {
                return Err(Error::Parse { line, message: "empty section header".into() });
            }
            sections.push(Section { line, header, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected `key = value`, got `{body}`") });
        };
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::Parse { line, message: "entry before any section header".into() })?;
        section.entries.push(Entry { line, key: key.trim().to_string(), value: value.trim().to_string() });
    }
    if sections.is_empty() {
        return Err(Error::Parse { line: 1, message: "empty scenario".into() });
    }
    Ok(sections)
}

fn list(value: &str, sep: char) -> Vec<String> {
    if value.trim().is_empty() {
        return Vec::new();
    }
    value.split(sep).map(|s| s.trim().to_string()).collect()
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse { line, message: format!("expected an integer, got `{}`", s.trim()) })
}

/// Parses `LO:HI`.
pub fn parse_window(s: &str) -> Result<(i64, i64)> {
    parse_window_at(s, 0)
}

fn parse_window_at(s: &str, line: usize) -> Result<(i64, i64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse { line, message: format!("window must be LO:HI, got `{s}`") })?;
    let (lo, hi) = (parse_int(lo, line)?, parse_int(hi, line)?);
    if lo > hi {
        return Err(Error::Parse { line, message: format!("window {lo}:{hi} has lo > hi") });
    }
    Ok((lo, hi))
}

fn parse_poly(ring: &PolyRing, text: &str, line: usize) -> Result<HomogPoly> {
    let terms = parse_terms(ring, text).map_err(|message| Error::Parse { line, message })?;
    HomogPoly::from_terms(ring, terms).map_err(|message| Error::NonHomogeneous { line, message })
}

fn name_ok(name: &str, line: usize) -> Result<String> {
    let bad = name.is_empty() || name.chars().any(|c| matches!(c, ',' | ';' | '=' | ':' | '[' | ']' | '#') || c.is_whitespace());
    if bad {
        return Err(Error::Parse { line, message: format!("invalid name `{name}`") });
    }
    Ok(name.to_string())
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_scenario_with(text, &Overrides::default())
}

pub fn parse_scenario_with(text: &str, overrides: &Overrides) -> Result<Scenario> {
    let sections = split_sections(text)?;
    let find = |h: &str| sections.iter().find(|s| s.header == h);
    for s in &sections {
        let kind = s.header.split_whitespace().next().unwrap_or("");
        let singleton = matches!(kind, "scenario" | "ring" | "scheme" | "expect");
        if singleton && sections.iter().filter(|t| t.header == s.header).count() > 1 {
            return Err(Error::Parse { line: s.line, message: format!("duplicate [{}] section", s.header) });
        }
        if !matches!(kind, "scenario" | "ring" | "scheme" | "expect" | "module" | "map" | "sheaf" | "check")
            || (singleton && s.header != kind)
        {
            return Err(Error::Parse { line: s.line, message: format!("unknown section [{}]", s.header) });
        }
    }

    let mut name = "unnamed".to_string();
    let mut window = DEFAULT_WINDOW;
    let mut den_cap = None;
    if let Some(s) = find("scenario") {
        s.only_keys(&["name", "window", "den_cap"])?;
        if let Some(e) = s.get("name") {
            name = e.value.clone();
        }
        if let Some(e) = s.get("window") {
            window = parse_window_at(&e.value, e.line)?;
        }
        if let Some(e) = s.get("den_cap") {
            den_cap = Some(parse_int(&e.value, e.line)?);
        }
    }
    window = overrides.window.unwrap_or(window);
    den_cap = overrides.den_cap.or(den_cap);

    let ring_section = find("ring").ok_or(Error::Parse { line: 1, message: "missing [ring] section".into() })?;
    ring_section.only_keys(&["field", "vars"])?;
    let field = match (&overrides.field, ring_section.get("field")) {
        (Some(f), _) => *f,
        (None, Some(e)) => FieldSpec::parse(&e.value).map_err(|err| Error::Parse { line: e.line, message: err.to_string() })?,
        (None, None) => FieldSpec::Rationals,
    };
    let vars_entry = ring_section.require("vars")?;
    let ring = PolyRing::from_names(field, list(&vars_entry.value, ','))
        .map_err(|err| Error::Parse { line: vars_entry.line, message: err.to_string() })?;

    let scheme = find("scheme").ok_or(Error::Parse { line: 1, message: "missing [scheme] section".into() })?;
    scheme.only_keys(&["cover"])?;
    let cover_entry = scheme.require("cover")?;
    let mut dens = Vec::new();
    for p in list(&cover_entry.value, ';') {
        let poly = parse_poly(&ring, &p, cover_entry.line)?;
        if poly.is_zero() {
            return Err(Error::Parse { line: cover_entry.line, message: "D(0) is empty; zero denominators are not allowed".into() });
        }
        dens.push(poly);
    }
    let cover = OpenSubset::new(ring.clone(), dens).map_err(|e| Error::Parse { line: cover_entry.line, message: e.to_string() })?;

    let mut modules: BTreeMap<String, Arc<FPGradedModule>> = BTreeMap::new();
    for s in sections.iter().filter(|s| s.header.starts_with("module ")) {
        let mname = name_ok(s.header["module ".len()..].trim(), s.line)?;
        s.only_keys(&["gens", "rel"])?;
        let gens_entry = s.require("gens")?;
        let gens: Vec<i64> =
            list(&gens_entry.value, ',').iter().map(|g| parse_int(g, gens_entry.line)).collect::<Result<_>>()?;
        let mut relations = Vec::new();
        for e in s.all("rel") {
            let entries = list(&e.value, ';');
            if entries.len() != gens.len() {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("relation has {} entries for {} generators", entries.len(), gens.len()),
                });
            }
            let polys: Vec<HomogPoly> = entries.iter().map(|p| parse_poly(&ring, p, e.line)).collect::<Result<_>>()?;
            if let Some(rel) = Relation::new(&gens, polys).map_err(|message| Error::NonHomogeneous { line: e.line, message })? {
                relations.push(rel);
            }
        }
        if modules.contains_key(&mname) {
            return Err(Error::Parse { line: s.line, message: format!("module `{mname}` defined twice") });
        }
        modules.insert(mname.clone(), FPGradedModule::new(ring.clone(), &mname, gens, relations));
    }
    if !modules.contains_key("R") {
        modules.insert("R".into(), structure_module(&ring));
    }
    let module_ref = |n: &str| modules.get(n).cloned().ok_or_else(|| Error::UnknownName(n.into()));

    let mut maps = BTreeMap::new();
    for s in sections.iter().filter(|s| s.header.starts_with("map ")) {
        let spec = &s.header["map ".len()..];
        let parse_err = || Error::Parse { line: s.line, message: "map header must be `map NAME: SRC -> TGT`".into() };
        let (mname, rest) = spec.split_once(':').ok_or_else(parse_err)?;
        let (src, tgt) = rest.split_once("->").ok_or_else(parse_err)?;
        let (mname, src, tgt) = (name_ok(mname.trim(), s.line)?, src.trim().to_string(), tgt.trim().to_string());
        s.only_keys(&["image"])?;
        let source = module_ref(&src)?;
        let target = module_ref(&tgt)?;
        let images: Vec<&Entry> = s.all("image").collect();
        if images.len() != source.gen_degrees().len() {
            return Err(Error::Parse {
                line: s.line,
                message: format!("{} image lines for {} source generators", images.len(), source.gen_degrees().len()),
            });
        }
        let mut vectors = Vec::new();
        for (e, &deg) in images.iter().zip(source.gen_degrees()) {
            let entries = list(&e.value, ';');
            if entries.len() != target.gen_degrees().len() {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("image has {} entries for {} target generators", entries.len(), target.gen_degrees().len()),
                });
            }
            let mut polys = Vec::new();
            for (p, &t) in entries.iter().zip(target.gen_degrees()) {
                let poly = parse_poly(&ring, p, e.line)?;
                if poly.is_zero() {
                    polys.push(HomogPoly::zero(deg - t));
                } else if poly.degree != deg - t {
                    return Err(Error::NonHomogeneous {
                        line: e.line,
                        message: format!("entry `{p}` has degree {} but must have degree {}", poly.degree, deg - t),
                    });
                } else {
                    polys.push(poly);
                }
            }
            vectors.push(target.element(&polys, deg)?);
        }
        let map = map_from_gen_images(&source, target.as_module(), vectors)?;
        if maps.contains_key(&mname) {
            return Err(Error::Parse { line: s.line, message: format!("map `{mname}` defined twice") });
        }
        maps.insert(mname, MapDef { source: src, target: tgt, map });
    }

    let mut sheaves = BTreeMap::new();
    for s in sections.iter().filter(|s| s.header.starts_with("sheaf ")) {
        let sname = name_ok(s.header["sheaf ".len()..].trim(), s.line)?;
        s.only_keys(&["glue", "direct_image"])?;
        let spec = match (s.get("glue"), s.get("direct_image")) {
            (Some(e), None) => {
                let parts = list(&e.value, ',');
                let (u, v) = match parts.as_slice() {
                    [m] => (m.clone(), m.clone()),
                    [u, v] => (u.clone(), v.clone()),
                    _ => return Err(Error::Parse { line: e.line, message: "glue takes one or two modules".into() }),
                };
                module_ref(&u)?;
                module_ref(&v)?;
                SheafSpec::Glue { u, v }
            }
            (None, Some(e)) => {
                module_ref(&e.value)?;
                SheafSpec::DirectImage { module: e.value.clone() }
            }
            _ => return Err(Error::Parse { line: s.line, message: "a sheaf needs exactly one of `glue` or `direct_image`".into() }),
        };
        sheaves.insert(sname, spec);
    }

    let mut checks: Vec<CheckSpec> = Vec::new();
    for s in sections.iter().filter(|s| s.header.starts_with("check")) {
        let spec = s.header["check".len()..].trim();
        let (cname, kind) = match spec.split_once(':') {
            Some((n, k)) => (n.trim(), k.trim()),
            None => (spec, spec),
        };
        let cname = name_ok(cname, s.line)?;
        let open = |default: Patch| -> Result<Patch> {
            match s.get("open") {
                Some(e) => e.value.parse().map_err(|err: Error| Error::Parse { line: e.line, message: err.to_string() }),
                None => Ok(default),
            }
        };
        let target = || -> Result<SheafRef> {
            match (s.get("sheaf"), s.get("module")) {
                (Some(e), None) => {
                    if !sheaves.contains_key(&e.value) {
                        return Err(Error::UnknownName(e.value.clone()));
                    }
                    Ok(SheafRef::Sheaf(e.value.clone()))
                }
                (None, Some(e)) => {
                    module_ref(&e.value)?;
                    Ok(SheafRef::Module(e.value.clone()))
                }
                _ => Err(Error::Parse { line: s.line, message: "give exactly one of `sheaf` or `module`".into() }),
            }
        };
        let module_or_r = || -> Result<String> {
            let m = s.get("module").map(|e| e.value.clone()).unwrap_or_else(|| "R".into());
            module_ref(&m)?;
            Ok(m)
        };
        let gluing = || -> Result<SequenceGluing> {
            match s.get("gluing").map(|e| (e.line, e.value.as_str())) {
                None | Some((_, "glue")) => Ok(SequenceGluing::Glue),
                Some((_, "direct_image")) => Ok(SequenceGluing::DirectImage),
                Some((line, other)) => Err(Error::Parse { line, message: format!("unknown gluing `{other}`") }),
            }
        };
        let pair = || -> Result<(String, String)> {
            let e = s.require("maps")?;
            let names = list(&e.value, ',');
            let [f, g] = names.as_slice() else {
                return Err(Error::Parse { line: e.line, message: "`maps` takes two map names".into() });
            };
            let (fd, gd) = (
                maps.get(f).ok_or_else(|| Error::UnknownName(f.clone()))?,
                maps.get(g).ok_or_else(|| Error::UnknownName(g.clone()))?,
            );
            if fd.target != gd.source {
                return Err(Error::Parse { line: e.line, message: format!("maps `{f}` and `{g}` do not compose") });
            }
            Ok((f.clone(), g.clone()))
        };
        let kind = match kind {
            "sections" => {
                s.only_keys(&["sheaf", "module", "open"])?;
                CheckKind::Sections { target: target()?, open: open(Patch::W)? }
            }
            "h1" => {
                s.only_keys(&["module"])?;
                CheckKind::H1 { module: module_or_r()? }
            }
            "obstruction" => {
                s.only_keys(&["sheaf", "module"])?;
                CheckKind::Obstruction { target: target()? }
            }
            "star-sequence" => {
                s.only_keys(&["maps", "gluing", "open"])?;
                let (f, g) = pair()?;
                CheckKind::StarSequence { f, g, gluing: gluing()?, open: open(Patch::W)? }
            }
            "bidual" => {
                s.only_keys(&["maps", "gluing"])?;
                let (f, g) = pair()?;
                CheckKind::Bidual { f, g, gluing: gluing()? }
            }
            "lemma21" => {
                s.only_keys(&["modules"])?;
                let e = s.require("modules")?;
                let names = list(&e.value, ',');
                for n in &names {
                    module_ref(n)?;
                }
                CheckKind::Lemma21 { modules: names }
            }
            "nonaffine-witness" => {
                s.only_keys(&["module"])?;
                CheckKind::NonaffineWitness { module: module_or_r()? }
            }
            other => return Err(Error::Parse { line: s.line, message: format!("unknown check kind `{other}`") }),
        };
        if checks.iter().any(|c| c.name == cname) {
            return Err(Error::Parse { line: s.line, message: format!("check `{cname}` defined twice") });
        }
        checks.push(CheckSpec { name: cname, kind });
    }

    let mut expect = BTreeMap::new();
    if let Some(s) = find("expect") {
        for e in &s.entries {
            if !checks.iter().any(|c| c.name == e.key) {
                return Err(Error::UnknownName(e.key.clone()));
            }
            if !VERDICTS.contains(&e.value.as_str()) {
                return Err(Error::Parse { line: e.line, message: format!("unknown verdict `{}`", e.value) });
            }
            expect.insert(e.key.clone(), e.value.clone());
        }
    }

    Ok(Scenario { name, window, den_cap, ring, cover, modules, maps, sheaves, checks, expect })
}

const DOUBLE_ORIGIN_FLAT: &str = "\
# Plane with a doubled origin: two copies of A^2 glued along the punctured plane.
# The ideal sheaf of one origin, pushed forward from U, is not a quotient of a flat sheaf.
[scenario]
name = double-origin-flat

[ring]
field = Q
vars = x, y

[scheme]
cover = x; y

[module I]
# the ideal (x, y) with its Koszul relation
gens = 1, 1
rel = y; -x

[sheaf I]
direct_image = I

[check ideal-sections-U: sections]
sheaf = I
open = U

[check ideal-sections-V: sections]
sheaf = I
open = V

[check ideal-sections-W: sections]
sheaf = I
open = W

[check ideal-sections-X: sections]
sheaf = I
open = X

[check restriction-image: obstruction]
sheaf = I

[check structure-sheaf-control: obstruction]
module = R

[expect]
ideal-sections-U = computed
ideal-sections-V = computed
ideal-sections-W = computed
ideal-sections-X = computed
restriction-image = obstructed
structure-sheaf-control = no-obstruction-in-window
";

const SECTIONS_STAR: &str = "\
# 0 -> R(-1) -y-> R -> R/(y) -> 0, glued on both patches, over W and over U.
[scenario]
name = sections-star

[ring]
field = Q
vars = x, y

[scheme]
cover = x; y

[module A]
gens = 1

[module B]
gens = 0

[module C]
gens = 0
rel = y

[map y: A -> B]
image = y

[map p: B -> C]
image = 1

[check star-over-W: star-sequence]
maps = y, p
open = W

[check star-over-U: star-sequence]
maps = y, p
open = U

[check quotient-sections-W: sections]
module = C
open = W

[expect]
star-over-W = left-exact-not-right-exact
star-over-U = exact
quotient-sections-W = computed
";

const H1_PUNCTURED: &str = "\
# First cohomology of the punctured plane, with an explicit cocycle.
[scenario]
name = h1-punctured

[ring]
field = Q
vars = x, y

[scheme]
cover = x; y

[module Ry]
gens = 0
rel = y

[check h1-structure: h1]
module = R

[check witness-structure: nonaffine-witness]
module = R

[check h1-quotient: h1]
module = Ry

[check witness-quotient: nonaffine-witness]
module = Ry

[expect]
h1-structure = h1-nonzero
witness-structure = witness-found
h1-quotient = h1-zero-in-window
witness-quotient = no-witness-in-window
";

const MATLIS_BIDUAL: &str = "\
# Applying the Matlis-dual sheaf functor twice to 0 -> R(-1) -y-> R -> R/(y) -> 0.
[scenario]
name = matlis-bidual

[ring]
field = Q
vars = x, y

[scheme]
cover = x; y

[module A]
gens = 1

[module B]
gens = 0

[module C]
gens = 0
rel = y

[map y: A -> B]
image = y

[map p: B -> C]
image = 1

[check bidual-over-V: bidual]
maps = y, p

[expect]
bidual-over-V = left-exact-not-right-exact
";

const AFFINE_CONTROL: &str = "\
# Control runs with an affine overlap W = D(x).
[scenario]
name = affine-control

[ring]
field = Q
vars = x, y

[scheme]
cover = x

[module X1]
# the principal ideal (x), free on one generator of degree 1
gens = 1

[sheaf X1]
direct_image = X1

[module A]
gens = 1

[module B]
gens = 0

[module C]
gens = 0
rel = y

[map y: A -> B]
image = y

[map p: B -> C]
image = 1

[check principal-obstruction: obstruction]
sheaf = X1

[check witness-structure: nonaffine-witness]
module = R

[check star-over-W: star-sequence]
maps = y, p
open = W

[check bidual-over-V: bidual]
maps = y, p

[expect]
principal-obstruction = no-obstruction-in-window
witness-structure = no-witness-in-window
star-over-W = exact
bidual-over-V = exact
";

/// Free modules for the tensor-restriction suite: `R(-a)^r` for `r ≤ 4`, `|a| ≤ 3`,
/// plus two-summand modules `R(-a) ⊕ R(-b)` with `a < b`, 48 in total.
pub fn lemma21_free_modules() -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for r in 1..=4usize {
        for a in -3..=3i64 {
            out.push(vec![a; r]);
        }
    }
    'outer: for a in -3..=3i64 {
        for b in (a + 1)..=3 {
            if out.len() == 48 {
                break 'outer;
            }
            out.push(vec![a, b]);
        }
    }
    out
}

fn lemma21_text() -> String {
    let mut text = String::from(
        "# Tensoring the restriction map with free modules loses nothing; a torsion module does.\n\
         [scenario]\nname = lemma21-free\n\n[ring]\nfield = Q\nvars = x, y\n\n[scheme]\ncover = x; y\n\n",
    );
    let mut names = Vec::new();
    for gens in lemma21_free_modules() {
        let name = free_module_name(&gens);
        let list: Vec<String> = gens.iter().map(i64::to_string).collect();
        text.push_str(&format!("[module {name}]\ngens = {}\n\n", list.join(", ")));
        names.push(name);
    }
    text.push_str("[module k]\ngens = 0\nrel = x\nrel = y\n\n");
    text.push_str(&format!("[check free-modules: lemma21]\nmodules = {}\n\n", names.join(", ")));
    text.push_str("[check residue-field: lemma21]\nmodules = k\n\n");
    text.push_str("[expect]\nfree-modules = no-defect-in-window\nresidue-field = defect\n");
    text
}

fn free_module_name(gens: &[i64]) -> String {
    let uniform = gens.iter().all(|&a| a == gens[0]);
    let shift = |a: i64| format!("R({})", -a);
    if uniform {
        format!("{}^{}", shift(gens[0]), gens.len())
    } else {
        gens.iter().map(|&a| shift(a)).collect::<Vec<_>>().join("+")
    }
}

pub const BUILTIN_NAMES: &[&str] =
    &["double-origin-flat", "sections-star", "h1-punctured", "matlis-bidual", "lemma21-free", "affine-control"];

/// Text of a built-in scenario.
pub fn builtin_text(name: &str) -> Option<String> {
    Some(match name {
        "double-origin-flat" => DOUBLE_ORIGIN_FLAT.to_string(),
        "sections-star" => SECTIONS_STAR.to_string(),
        "h1-punctured" => H1_PUNCTURED.to_string(),
        "matlis-bidual" => MATLIS_BIDUAL.to_string(),
        "lemma21-free" => lemma21_text(),
        "affine-control" => AFFINE_CONTROL.to_string(),
        _ => return None,
    })
}

pub fn builtin(name: &str, overrides: &Overrides) -> Result<Scenario> {
    let text = builtin_text(name).ok_or_else(|| Error::UnknownName(name.into()))?;
    parse_scenario_with(&text, overrides)
}
