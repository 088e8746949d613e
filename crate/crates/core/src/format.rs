//! Plain-text instance files.
//!
//! ```text
//! # comments run to the end of the line
//! KIND family                # algebra (default) | family | geometry
//! NAME toy
//! N 2
//! RING
//!   omega 1
//!   maslov 0
//!   vars 2 0
//! BASIS 1 x y xy
//! DEGREES 0 1 1 2
//! UNIT 1
//! MU 0
//!   -> (T^[1]) xy
//! MU 2
//!   x y -> (-1) xy
//! Q 1 1
//!   x | u1 -> (1/2 * T^[1] * t0) y
//! P 1 0
//!   x -> (-1) ux
//! SPHERE 1
//!   | u1 -> (-1 * T^[1]) uxy
//! GEOMETRY
//!   target u1 ux uy uxy 1X
//!   degrees 2 3 3 4 0
//!   one 1X
//!   d ux -> uxy
//!   zeta u1
//!   eta 0
//! ```
//!
//! Headers start in column 1, entries are indented. An element is `0` or a
//! sum of terms `(c) g`, where `c` uses the scalar grammar and a bare `g`
//! means coefficient 1. `MU k` is shorthand for `Q k 0`. Geometry files also
//! accept `dl a -> ..`, `mul a b -> ..`, `push g -> ..` and `pull g -> ..`
//! inside GEOMETRY, and take their algebra from `dl` and `mul`.

use crate::ainfty::{builtins, AInfty, InteriorAlgebra, QFamily};
use crate::family::{LinearMap, SparseFamily};
use crate::graded::{Element, Gen, GradedModule};
use crate::openclosed::toy::{curved_toy, toy_zero_energy, ToyGeometry};
use crate::openclosed::{OCInstance, SphereTerms};
use crate::scalars::{Cap, FormalVarSpec, PiGroup, Q, Ring, ScalarError};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Clone, Debug)]
pub enum Instance {
    Algebra(AInfty),
    Family(Box<OCInstance>),
    Geometry(Box<ToyGeometry>),
}

impl Instance {
    pub fn name(&self) -> String {
        match self {
            Instance::Algebra(a) => a.name.clone(),
            Instance::Family(f) => f.name.clone(),
            Instance::Geometry(g) => format!("geometry(n={})", g.n),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Algebra(_) => "algebra",
            Instance::Family(_) => "family",
            Instance::Geometry(_) => "geometry",
        }
    }

    /// The underlying A-infinity algebra.
    pub fn algebra(&self) -> AInfty {
        match self {
            Instance::Algebra(a) => a.clone(),
            Instance::Family(f) => f.algebra(),
            Instance::Geometry(g) => g.algebra("geometry", &Element::zero()),
        }
    }
}

/// Names accepted by [`load`] besides file paths.
pub const BUILTINS: [&str; 7] = [
    "dual_numbers",
    "exterior(r)",
    "curved_matrix",
    "ground_field",
    "toy_zero_energy",
    "toy_zero_energy(n=3)",
    "curved_toy",
];

/// A builtin name or a path to an instance file.
pub fn load(spec: &str) -> Result<Instance, FormatError> {
    let path = Path::new(spec);
    if path.is_file() {
        return parse_instance(path);
    }
    let bad = |e: String| FormatError::Invalid(e);
    match spec.trim() {
        "toy_zero_energy" | "toy_zero_energy(n=2)" => {
            Ok(Instance::Family(Box::new(toy_zero_energy(2).map_err(|e| bad(e.to_string()))?)))
        }
        "toy_zero_energy(n=3)" => Ok(Instance::Family(Box::new(toy_zero_energy(3).map_err(|e| bad(e.to_string()))?))),
        "curved_toy" => Ok(Instance::Family(Box::new(curved_toy().map_err(|e| bad(e.to_string()))?.inst))),
        name => builtins::by_name(name).map(Instance::Algebra).map_err(|_| FormatError::Io {
            path: spec.to_string(),
            msg: format!("no such file or builtin (builtins: {})", BUILTINS.join(", ")),
        }),
    }
}

pub fn parse_instance(path: &Path) -> Result<Instance, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_instance_str(&text)
}

pub fn parse_instance_str(text: &str) -> Result<Instance, FormatError> {
    let sections = split_sections(text)?;
    Builder::new(&sections)?.build()
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, col, msg: msg.into() }
}

#[derive(Clone, Copy)]
struct Line<'a> {
    no: usize,
    text: &'a str,
}

struct Section<'a> {
    key: &'a str,
    head: Line<'a>,
    /// Header arguments with their columns.
    args: Vec<(usize, &'a str)>,
    body: Vec<Line<'a>>,
}

const KEYS: [&str; 12] = ["KIND", "NAME", "N", "RING", "BASIS", "DEGREES", "UNIT", "MU", "Q", "P", "SPHERE", "GEOMETRY"];

fn tokens(s: &str, col: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((col + st, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((col + st, &s[st..]));
    }
    out
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>, FormatError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let line = Line { no, text: body };
        if body.starts_with(char::is_whitespace) {
            match out.last_mut() {
                Some(s) => s.body.push(line),
                None => return Err(perr(no, 1, "indented entry before any section header")),
            }
            continue;
        }
        let toks = tokens(body, 1);
        let key = toks[0].1;
        if !KEYS.contains(&key) {
            return Err(perr(no, 1, format!("unknown section `{key}`")));
        }
        out.push(Section { key, head: line, args: toks[1..].to_vec(), body: Vec::new() });
    }
    Ok(out)
}

fn int_arg<T: std::str::FromStr>(line: usize, (col, s): (usize, &str)) -> Result<T, FormatError> {
    s.parse().map_err(|_| perr(line, col, format!("expected an integer, found `{s}`")))
}

fn scalar_err(line: usize, col: usize, e: ScalarError) -> FormatError {
    match e {
        ScalarError::Parse { col: c, msg } => perr(line, col + c - 1, msg),
        other => perr(line, col, other.to_string()),
    }
}

/// Parses `0` or `(c) g + (c) g + ...` starting at column `col`.
fn parse_element(ring: &Ring, module: &GradedModule, text: &str, line: usize, col: usize) -> Result<Element, FormatError> {
    let b = text.as_bytes();
    let mut i = 0;
    let skip = |i: &mut usize| {
        while *i < b.len() && b[*i].is_ascii_whitespace() {
            *i += 1;
        }
    };
    if text.trim() == "0" {
        return Ok(Element::zero());
    }
    let mut out = Element::zero();
    loop {
        skip(&mut i);
        if i == b.len() {
            return Err(perr(line, col + i, "expected a term `(c) g`"));
        }
        let mut coeff = ring.one();
        if b[i] == b'(' {
            let close = text[i..]
                .find(')')
                .map(|j| i + j)
                .ok_or_else(|| perr(line, col + i, "unclosed `(`"))?;
            coeff = ring.parse(&text[i + 1..close]).map_err(|e| scalar_err(line, col + i + 1, e))?;
            i = close + 1;
            skip(&mut i);
        }
        let start = i;
        while i < b.len() && !b[i].is_ascii_whitespace() && b[i] != b'+' {
            i += 1;
        }
        if start == i {
            return Err(perr(line, col + start, "expected a generator name"));
        }
        let g = module
            .index(&text[start..i])
            .map_err(|e| perr(line, col + start, e.to_string()))?;
        out.add_term(g, &coeff);
        skip(&mut i);
        if i == b.len() {
            return Ok(out);
        }
        if b[i] != b'+' {
            return Err(perr(line, col + i, "expected `+` between terms"));
        }
        i += 1;
    }
}

/// Parses an element written as by [`Element::display`].
pub fn parse_element_str(ring: &Ring, module: &GradedModule, text: &str) -> Result<Element, FormatError> {
    parse_element(ring, module, text, 1, 1)
}

/// An entry `a b | g h -> value`.
struct Entry<'a> {
    boundary: Vec<(usize, &'a str)>,
    interior: Vec<(usize, &'a str)>,
    has_bar: bool,
    value: &'a str,
    value_col: usize,
}

fn split_entry<'a>(l: &Line<'a>) -> Result<Entry<'a>, FormatError> {
    let arrow = l
        .text
        .find("->")
        .ok_or_else(|| perr(l.no, l.text.len() + 1, "expected `->`"))?;
    let lhs = &l.text[..arrow];
    let (bnd, int, has_bar) = match lhs.find('|') {
        Some(j) => (&lhs[..j], Some((j + 1, &lhs[j + 1..])), true),
        None => (lhs, None, false),
    };
    Ok(Entry {
        boundary: tokens(bnd, 1),
        interior: int.map(|(off, s)| tokens(s, off + 1)).unwrap_or_default(),
        has_bar,
        value: &l.text[arrow + 2..],
        value_col: arrow + 3,
    })
}

fn resolve(m: &GradedModule, line: usize, toks: &[(usize, &str)]) -> Result<Vec<Gen>, FormatError> {
    toks.iter()
        .map(|&(c, s)| m.index(s).map_err(|e| perr(line, c, e.to_string())))
        .collect()
}

struct Builder<'s, 'a> {
    sections: &'s [Section<'a>],
    kind: &'a str,
    name: String,
    n: Option<i64>,
    ring: Arc<Ring>,
    module: Option<Arc<GradedModule>>,
    unit: Option<Gen>,
}

impl<'s, 'a> Builder<'s, 'a> {
    fn new(sections: &'s [Section<'a>]) -> Result<Self, FormatError> {
        let mut b = Builder {
            sections,
            kind: "algebra",
            name: "unnamed".into(),
            n: None,
            ring: Arc::new(Ring::rationals()),
            module: None,
            unit: None,
        };
        if sections.iter().any(|s| matches!(s.key, "P" | "SPHERE" | "GEOMETRY")) {
            b.kind = "family";
        }
        for key in ["KIND", "NAME", "N", "RING", "BASIS", "DEGREES", "UNIT", "GEOMETRY"] {
            let found: Vec<&Section> = sections.iter().filter(|s| s.key == key).collect();
            if found.len() > 1 {
                return Err(perr(found[1].head.no, 1, format!("duplicate section {key}")));
            }
        }
        if let Some(s) = b.single("KIND") {
            let arg = s.args.first().ok_or_else(|| perr(s.head.no, 5, "KIND needs a value"))?;
            b.kind = match arg.1 {
                "algebra" => "algebra",
                "family" => "family",
                "geometry" => "geometry",
                other => return Err(perr(s.head.no, arg.0, format!("unknown kind `{other}`"))),
            };
        }
        if let Some(s) = b.single("NAME") {
            b.name = s.head.text.trim()["NAME".len()..].trim().to_string();
        }
        if let Some(s) = b.single("N") {
            let arg = *s.args.first().ok_or_else(|| perr(s.head.no, 2, "N needs a value"))?;
            b.n = Some(int_arg(s.head.no, arg)?);
        }
        if let Some(s) = b.single("RING") {
            b.ring = Arc::new(parse_ring(s)?);
        }
        let basis = b.single("BASIS").ok_or_else(|| perr(1, 1, "missing BASIS section"))?;
        let names: Vec<String> = basis.args.iter().map(|a| a.1.to_string()).collect();
        let degrees: Vec<i64> = match b.single("DEGREES") {
            Some(d) => d.args.iter().map(|&a| int_arg(d.head.no, a)).collect::<Result<_, _>>()?,
            None => return Err(perr(basis.head.no, 1, "missing DEGREES section")),
        };
        if names.len() != degrees.len() {
            let d = b.single("DEGREES").unwrap();
            return Err(perr(d.head.no, 1, format!("{} degrees for {} basis elements", degrees.len(), names.len())));
        }
        let module = GradedModule::new(names, degrees).map_err(|e| perr(basis.head.no, 1, e.to_string()))?;
        if let Some(u) = b.single("UNIT") {
            let arg = *u.args.first().ok_or_else(|| perr(u.head.no, 5, "UNIT needs a generator"))?;
            b.unit = Some(resolve(&module, u.head.no, &[arg])?[0]);
        }
        b.module = Some(Arc::new(module));
        Ok(b)
    }

    fn single(&self, key: &str) -> Option<&'s Section<'a>> {
        self.sections.iter().find(|s| s.key == key)
    }

    fn module(&self) -> &Arc<GradedModule> {
        self.module.as_ref().expect("basis parsed")
    }

    fn n(&self) -> Result<i64, FormatError> {
        self.n.ok_or_else(|| perr(1, 1, format!("a {} needs an N section", self.kind)))
    }

    fn element(&self, m: &GradedModule, text: &str, line: usize, col: usize) -> Result<Element, FormatError> {
        parse_element(&self.ring, m, text, line, col)
    }

    /// `Q`/`MU`/`P`/`SPHERE` sections as `(key, k, l, section)`.
    fn op_sections(&self) -> Result<Vec<(&'a str, usize, usize, &'s Section<'a>)>, FormatError> {
        let mut out = Vec::new();
        for s in self.sections {
            let want = match s.key {
                "MU" | "SPHERE" => 1,
                "Q" | "P" => 2,
                _ => continue,
            };
            if s.args.len() != want {
                return Err(perr(s.head.no, 1, format!("{} takes {want} integer argument(s)", s.key)));
            }
            let a: usize = int_arg(s.head.no, s.args[0])?;
            let (k, l) = match s.key {
                "MU" => (a, 0),
                "SPHERE" => (0, a),
                _ => (a, int_arg(s.head.no, s.args[1])?),
            };
            out.push((s.key, k, l, s));
        }
        Ok(out)
    }

    fn family(&self, s: &Section, k: usize, l: usize, out: &GradedModule, interior: &GradedModule) -> Result<SparseFamily, FormatError> {
        let mut f = SparseFamily::new();
        for line in &s.body {
            let e = split_entry(line)?;
            if e.boundary.len() != k || e.interior.len() != l {
                return Err(perr(
                    line.no,
                    1,
                    format!("{} {k} {l} entry has {} boundary and {} interior inputs", s.key, e.boundary.len(), e.interior.len()),
                ));
            }
            if l > 0 && !e.has_bar {
                return Err(perr(line.no, 1, "interior inputs must follow `|`"));
            }
            let bnd = resolve(self.module(), line.no, &e.boundary)?;
            let int = resolve(interior, line.no, &e.interior)?;
            let v = self.element(out, e.value, line.no, e.value_col)?;
            f.add(&bnd, &int, &v);
        }
        Ok(f)
    }

    fn build(self) -> Result<Instance, FormatError> {
        match self.kind {
            "algebra" => self.build_algebra(),
            "family" => self.build_family(),
            _ => self.build_geometry(),
        }
    }

    fn build_algebra(self) -> Result<Instance, FormatError> {
        let m = self.module().clone();
        let mut a = AInfty::new(&self.name, self.ring.clone(), m.clone(), self.unit);
        for (key, k, l, s) in self.op_sections()? {
            if key != "MU" {
                return Err(perr(s.head.no, 1, format!("{key} sections need KIND family")));
            }
            let f = self.family(s, k, l, &m, &GradedModule::from_pairs(&[]))?;
            for (t, _, v) in f.sorted_entries() {
                a.add_op(t, v);
            }
        }
        a.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(Instance::Algebra(a))
    }

    fn target(&self, g: &'s Section<'a>) -> Result<(GradedModule, HashMap<&'a str, Vec<Line<'a>>>), FormatError> {
        let mut keyed: HashMap<&str, Vec<Line>> = HashMap::new();
        for line in &g.body {
            let toks = tokens(line.text, 1);
            keyed.entry(toks[0].1).or_default().push(*line);
        }
        let get = |k: &str| -> Result<Line, FormatError> {
            keyed
                .get(k)
                .and_then(|v| v.first().copied())
                .ok_or_else(|| perr(g.head.no, 1, format!("GEOMETRY needs a `{k}` line")))
        };
        let names = get("target")?;
        let degs = get("degrees")?;
        let names: Vec<String> = tokens(names.text, 1)[1..].iter().map(|t| t.1.to_string()).collect();
        let degrees: Vec<i64> = tokens(degs.text, 1)[1..]
            .iter()
            .map(|&t| int_arg(degs.no, t))
            .collect::<Result<_, _>>()?;
        if names.len() != degrees.len() {
            return Err(perr(degs.no, 1, format!("{} degrees for {} target elements", degrees.len(), names.len())));
        }
        let m = GradedModule::new(names, degrees).map_err(|e| perr(g.head.no, 1, e.to_string()))?;
        Ok((m, keyed))
    }

    /// `key g -> value` lines as a linear map.
    fn linear(&self, lines: Option<&Vec<Line<'a>>>, src: &GradedModule, dst: &GradedModule, degree: i64) -> Result<LinearMap, FormatError> {
        let mut f = LinearMap::new(degree);
        for line in lines.into_iter().flatten() {
            let e = split_entry(line)?;
            if e.boundary.len() != 2 || e.has_bar {
                return Err(perr(line.no, 1, "expected `<key> g -> value`"));
            }
            let g = resolve(src, line.no, &e.boundary[1..])?[0];
            let value = self.element(dst, e.value, line.no, e.value_col)?;
            let mut img = f.image(g);
            img.add_assign(&value);
            f.set(g, img);
        }
        Ok(f)
    }

    fn keyed_element(&self, lines: Option<&Vec<Line<'a>>>, m: &GradedModule) -> Result<Option<Element>, FormatError> {
        match lines.and_then(|v| v.first()) {
            None => Ok(None),
            Some(line) => {
                let t = line.text.trim_start();
                let key_end = t.find(char::is_whitespace).unwrap_or(t.len());
                let offset = line.text.len() - t.len() + key_end;
                self.element(m, &line.text[offset..], line.no, offset + 1).map(Some)
            }
        }
    }

    fn build_family(self) -> Result<Instance, FormatError> {
        let n = self.n()?;
        let g = self.single("GEOMETRY").ok_or_else(|| perr(1, 1, "a family needs a GEOMETRY section"))?;
        let (t, keyed) = self.target(g)?;
        let t = Arc::new(t);
        let one = match keyed.get("one").and_then(|v| v.first()) {
            Some(line) => {
                let toks = tokens(line.text, 1);
                let arg = *toks.get(1).ok_or_else(|| perr(line.no, 1, "`one` needs a generator"))?;
                Some(resolve(&t, line.no, &[arg])?[0])
            }
            None => None,
        };
        let d = self.linear(keyed.get("d"), &t, &t, 1)?;
        let zeta = self.keyed_element(keyed.get("zeta"), &t)?;
        let eta = self.keyed_element(keyed.get("eta"), &t)?;
        for key in keyed.keys() {
            if !["target", "degrees", "one", "d", "zeta", "eta"].contains(key) {
                let line = keyed[key][0];
                return Err(perr(line.no, 1, format!("unknown GEOMETRY key `{key}` for a family")));
            }
        }
        let l = self.module().clone();
        let mut ops = SparseFamily::new();
        let mut p = SparseFamily::new();
        let mut sphere = SparseFamily::new();
        for (key, k, lv, s) in self.op_sections()? {
            let (dst, acc) = match key {
                "MU" | "Q" => (&l, &mut ops),
                "P" => (&t, &mut p),
                _ => (&t, &mut sphere),
            };
            for (b, i, v) in self.family(s, k, lv, dst, &t)?.sorted_entries() {
                acc.add(b, i, v);
            }
        }
        let mut classical = LinearMap::new(1);
        for (b, i, v) in ops.sorted_entries() {
            if b.len() == 1 && i.is_empty() {
                let mut e = Element::zero();
                for (h, s) in v.iter() {
                    e.add_term(h, &s.filter(|m| m.is_unit()));
                }
                classical.set(b[0], e);
            }
        }
        let q = QFamily {
            ring: self.ring.clone(),
            module: l,
            interior: InteriorAlgebra { module: t.clone(), differential: d, one },
            ops,
            unit: self.unit,
            classical_d: Some(classical),
        };
        let sphere = match (zeta, sphere.is_empty() && eta.is_none()) {
            (Some(zeta), _) => Some(SphereTerms { ops: sphere, zeta, eta }),
            (None, true) => None,
            (None, false) => return Err(FormatError::Invalid("sphere terms or eta given without zeta".into())),
        };
        let inst = OCInstance { name: self.name.clone(), n, q, p, sphere };
        validate_family(&inst)?;
        Ok(Instance::Family(Box::new(inst)))
    }

    fn build_geometry(self) -> Result<Instance, FormatError> {
        let n = self.n()?;
        if self.unit != Some(0) {
            return Err(FormatError::Invalid("a geometry needs UNIT set to the first basis element".into()));
        }
        if let Some((_, _, _, s)) = self.op_sections()?.first() {
            return Err(perr(s.head.no, 1, "a geometry takes its operations from GEOMETRY"));
        }
        let g = self.single("GEOMETRY").ok_or_else(|| perr(1, 1, "a geometry needs a GEOMETRY section"))?;
        let (x, keyed) = self.target(g)?;
        let l = self.module().clone();
        let one_line = keyed
            .get("one")
            .and_then(|v| v.first())
            .ok_or_else(|| perr(g.head.no, 1, "GEOMETRY needs a `one` line"))?;
        let toks = tokens(one_line.text, 1);
        let arg = *toks.get(1).ok_or_else(|| perr(one_line.no, 1, "`one` needs a generator"))?;
        let one_x = resolve(&x, one_line.no, &[arg])?[0];
        let d_l = self.linear(keyed.get("dl"), &l, &l, 1)?;
        let d_x = self.linear(keyed.get("d"), &x, &x, 1)?;
        let push = self.linear(keyed.get("push"), &l, &x, n)?;
        let pull = self.linear(keyed.get("pull"), &x, &l, 0)?;
        let mut product = HashMap::new();
        for line in keyed.get("mul").into_iter().flatten() {
            let e = split_entry(line)?;
            if e.boundary.len() != 3 || e.has_bar {
                return Err(perr(line.no, 1, "expected `mul a b -> value`"));
            }
            let ab = resolve(&l, line.no, &e.boundary[1..])?;
            let v = self.element(&l, e.value, line.no, e.value_col)?;
            product.entry((ab[0], ab[1])).or_insert_with(Element::zero).add_assign(&v);
        }
        for key in keyed.keys() {
            if !["target", "degrees", "one", "d", "dl", "mul", "push", "pull"].contains(key) {
                let line = keyed[key][0];
                return Err(perr(line.no, 1, format!("unknown GEOMETRY key `{key}` for a geometry")));
            }
        }
        let geom = ToyGeometry {
            n,
            ring: self.ring.clone(),
            l,
            d_l,
            product,
            x: Arc::new(x),
            d_x,
            one_x,
            push,
            pull,
        };
        validate_geometry(&geom)?;
        Ok(Instance::Geometry(Box::new(geom)))
    }
}

fn parse_ring(s: &Section) -> Result<Ring, FormatError> {
    let mut omega = Vec::new();
    let mut maslov = Vec::new();
    let mut vars = Vec::new();
    for line in &s.body {
        let toks = tokens(line.text, 1);
        let rest = &toks[1..];
        match toks[0].1 {
            "omega" => {
                for &(c, t) in rest {
                    omega.push(t.parse::<Q>().map_err(|e| perr(line.no, c, e))?);
                }
            }
            "maslov" => {
                for &a in rest {
                    maslov.push(int_arg(line.no, a)?);
                }
            }
            "vars" => {
                for &a in rest {
                    vars.push(int_arg(line.no, a)?);
                }
            }
            other => return Err(perr(line.no, toks[0].0, format!("unknown RING key `{other}`"))),
        }
    }
    let pi = PiGroup::new(omega, maslov).map_err(|e| perr(s.head.no, 1, e.to_string()))?;
    Ok(Ring::new(pi, FormalVarSpec::new(vars)))
}

/// A cap large enough that no structure constant is truncated.
fn loose_cap() -> Cap {
    Cap::new(Q::int(1 << 40), 8, 1 << 20)
}

fn degree_law(
    ring: &Ring,
    label: &str,
    inputs: String,
    value: &Element,
    out: &GradedModule,
    expected: i64,
) -> Result<(), FormatError> {
    for (g, s) in value.iter() {
        for (m, _) in s.terms() {
            let found = out.degree(g) + ring.monomial_degree(m);
            if found != expected {
                return Err(FormatError::Invalid(format!(
                    "degree law violated at {label}({inputs}): term {m} {} has degree {found}, expected {expected}",
                    out.name(g)
                )));
            }
        }
    }
    Ok(())
}

fn fmt_inputs(b: &GradedModule, i: &GradedModule, bnd: &[Gen], int: &[Gen]) -> String {
    if int.is_empty() {
        b.fmt_tuple(bnd)
    } else {
        format!("{}; {}", b.fmt_tuple(bnd), i.fmt_tuple(int))
    }
}

/// Degree laws of `q`, `p`, the sphere terms and `d_T`, `d_T^2 = 0`, and `d η = -ζ`.
pub fn validate_family(inst: &OCInstance) -> Result<(), FormatError> {
    let ring = inst.ring();
    let l = inst.boundary();
    let t = &*inst.target().module;
    let n = inst.n;
    inst.algebra().validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    for (b, i, v) in inst.q.ops.sorted_entries() {
        let exp = l.tuple_unshifted(b) + t.tuple_unshifted(i) + 2 - b.len() as i64 - 2 * i.len() as i64;
        degree_law(ring, &format!("q_{{{},{}}}", b.len(), i.len()), fmt_inputs(l, t, b, i), v, l, exp)?;
    }
    for (b, i, v) in inst.p.sorted_entries() {
        let exp = l.tuple_unshifted(b) + t.tuple_unshifted(i) + n + 1 - b.len() as i64 - 2 * i.len() as i64;
        degree_law(ring, &format!("p_{{{},{}}}", b.len(), i.len()), fmt_inputs(l, t, b, i), v, t, exp)?;
    }
    let cap = loose_cap();
    let d = &inst.target().differential;
    for g in t.gens() {
        degree_law(ring, "d_T", t.name(g).to_string(), &d.image(g), t, t.degree(g) + 1)?;
        if !d.apply(ring, &d.image(g), &cap).is_zero() {
            return Err(FormatError::Invalid(format!("d_T^2 = 0 fails on {}", t.name(g))));
        }
    }
    if let Some(s) = &inst.sphere {
        for (_, i, v) in s.ops.sorted_entries() {
            let exp = t.tuple_unshifted(i) + 4 - 2 * i.len() as i64;
            degree_law(ring, &format!("q_{{∅,{}}}", i.len()), t.fmt_tuple(i), v, t, exp)?;
        }
        degree_law(ring, "zeta", String::new(), &s.zeta, t, n)?;
        if let Some(eta) = &s.eta {
            let mut r = d.apply(ring, eta, &cap);
            r.add_assign(&s.zeta);
            if !r.is_zero() {
                return Err(FormatError::Invalid(format!("d eta = -zeta fails: d eta + zeta = {}", r.display(t))));
            }
        }
    }
    Ok(())
}

pub fn validate_geometry(g: &ToyGeometry) -> Result<(), FormatError> {
    let ring = &*g.ring;
    for a in g.l.gens() {
        degree_law(ring, "d_L", g.l.name(a).to_string(), &g.d_l.image(a), &g.l, g.l.degree(a) + 1)?;
        degree_law(ring, "i_*", g.l.name(a).to_string(), &g.push.image(a), &g.x, g.l.degree(a) + g.n)?;
        for b in g.l.gens() {
            let exp = g.l.degree(a) + g.l.degree(b);
            degree_law(ring, "product", g.l.fmt_tuple(&[a, b]), &g.mul(a, b), &g.l, exp)?;
        }
    }
    for x in g.x.gens() {
        degree_law(ring, "d_T", g.x.name(x).to_string(), &g.d_x.image(x), &g.x, g.x.degree(x) + 1)?;
        degree_law(ring, "i^*", g.x.name(x).to_string(), &g.pull.image(x), &g.l, g.x.degree(x))?;
    }
    for line in g.check(&loose_cap()) {
        if !line.passed {
            return Err(FormatError::Invalid(format!("{} fails: {}", line.name, line.detail)));
        }
    }
    Ok(())
}

pub fn write_instance(inst: &Instance) -> String {
    match inst {
        Instance::Algebra(a) => write_algebra(a),
        Instance::Family(f) => write_family(f),
        Instance::Geometry(g) => write_geometry(g),
    }
}

fn write_header(out: &mut String, kind: &str, name: &str, n: Option<i64>, ring: &Ring, m: &GradedModule, unit: Option<Gen>) {
    let _ = writeln!(out, "KIND {kind}");
    let _ = writeln!(out, "NAME {name}");
    if let Some(n) = n {
        let _ = writeln!(out, "N {n}");
    }
    if ring.rank() > 0 || ring.nvars() > 0 {
        let join = |v: Vec<String>| v.iter().map(|s| format!(" {s}")).collect::<String>();
        let _ = writeln!(out, "RING");
        let _ = writeln!(out, "  omega{}", join(ring.pi.omega.iter().map(|q| q.to_string()).collect()));
        let _ = writeln!(out, "  maslov{}", join(ring.pi.maslov.iter().map(|q| q.to_string()).collect()));
        let _ = writeln!(out, "  vars{}", join(ring.vars.degrees.iter().map(|q| q.to_string()).collect()));
    }
    let _ = writeln!(out, "BASIS {}", m.names().join(" "));
    let degs: Vec<String> = m.degrees().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "DEGREES {}", degs.join(" "));
    if let Some(u) = unit {
        let _ = writeln!(out, "UNIT {}", m.name(u));
    }
}

fn names(m: &GradedModule, t: &[Gen]) -> String {
    t.iter().map(|&g| m.name(g)).collect::<Vec<_>>().join(" ")
}

/// Writes `family` grouped into sections `header(k, l)`.
fn write_ops(
    out: &mut String,
    family: &SparseFamily,
    header: impl Fn(usize, usize) -> String,
    b: &GradedModule,
    i: &GradedModule,
    dst: &GradedModule,
) {
    let mut groups: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    for (bnd, int, v) in family.sorted_entries() {
        if v.is_zero() {
            continue;
        }
        let lhs = match (bnd.is_empty(), int.is_empty()) {
            (_, true) => names(b, bnd),
            (true, false) => format!("| {}", names(i, int)),
            (false, false) => format!("{} | {}", names(b, bnd), names(i, int)),
        };
        let sep = if lhs.is_empty() { "" } else { " " };
        groups
            .entry((bnd.len(), int.len()))
            .or_default()
            .push(format!("  {lhs}{sep}-> {}", v.display(dst)));
    }
    for ((k, l), lines) in groups {
        let _ = writeln!(out, "{}", header(k, l));
        for line in lines {
            let _ = writeln!(out, "{line}");
        }
    }
}

fn write_map(out: &mut String, key: &str, f: &LinearMap, src: &GradedModule, dst: &GradedModule) {
    for (g, v) in f.sorted_images() {
        if !v.is_zero() {
            let _ = writeln!(out, "  {key} {} -> {}", src.name(g), v.display(dst));
        }
    }
}

fn write_target(out: &mut String, t: &GradedModule) {
    let _ = writeln!(out, "GEOMETRY");
    let _ = writeln!(out, "  target {}", t.names().join(" "));
    let degs: Vec<String> = t.degrees().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "  degrees {}", degs.join(" "));
}

pub fn write_algebra(a: &AInfty) -> String {
    let mut out = String::new();
    write_header(&mut out, "algebra", &a.name, None, &a.ring, &a.module, a.unit);
    let mut f = SparseFamily::new();
    for (t, v) in a.sorted_ops() {
        f.add(t, &[], v);
    }
    let empty = GradedModule::from_pairs(&[]);
    write_ops(&mut out, &f, |k, _| format!("MU {k}"), &a.module, &empty, &a.module);
    out
}

pub fn write_family(inst: &OCInstance) -> String {
    let mut out = String::new();
    let (l, t) = (inst.boundary(), &*inst.target().module);
    write_header(&mut out, "family", &inst.name, Some(inst.n), inst.ring(), l, inst.q.unit);
    let q_head = |k: usize, lv: usize| if lv == 0 { format!("MU {k}") } else { format!("Q {k} {lv}") };
    write_ops(&mut out, &inst.q.ops, q_head, l, t, l);
    write_ops(&mut out, &inst.p, |k, lv| format!("P {k} {lv}"), l, t, t);
    if let Some(s) = &inst.sphere {
        write_ops(&mut out, &s.ops, |_, lv| format!("SPHERE {lv}"), l, t, t);
    }
    write_target(&mut out, t);
    if let Some(one) = inst.target().one {
        let _ = writeln!(out, "  one {}", t.name(one));
    }
    write_map(&mut out, "d", &inst.target().differential, t, t);
    if let Some(s) = &inst.sphere {
        let _ = writeln!(out, "  zeta {}", s.zeta.display(t));
        if let Some(eta) = &s.eta {
            let _ = writeln!(out, "  eta {}", eta.display(t));
        }
    }
    out
}

pub fn write_geometry(g: &ToyGeometry) -> String {
    let mut out = String::new();
    write_header(&mut out, "geometry", &format!("geometry(n={})", g.n), Some(g.n), &g.ring, &g.l, Some(0));
    write_target(&mut out, &g.x);
    let _ = writeln!(out, "  one {}", g.x.name(g.one_x));
    write_map(&mut out, "dl", &g.d_l, &g.l, &g.l);
    let mut keys: Vec<_> = g.product.keys().copied().collect();
    keys.sort_unstable();
    for (a, b) in keys {
        let v = &g.product[&(a, b)];
        if !v.is_zero() {
            let _ = writeln!(out, "  mul {} {} -> {}", g.l.name(a), g.l.name(b), v.display(&g.l));
        }
    }
    write_map(&mut out, "d", &g.d_x, &g.x, &g.x);
    write_map(&mut out, "push", &g.push, &g.l, &g.x);
    write_map(&mut out, "pull", &g.pull, &g.x, &g.l);
    out
}
