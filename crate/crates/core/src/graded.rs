//! Graded generators, elements over the coefficient ring, and tensor words.
//!
//! Degrees are stored unshifted. The shifted degree used by bar-type
//! constructions is `|x| - 1`; it has the same parity as `|x| + 1`, so every
//! sign below depends only on unshifted parities.

use crate::scalars::{Cap, Ring, Scalar};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Index of a generator inside its [`GradedModule`].
pub type Gen = u16;

/// A pure tensor of generators `x_1 ⊗ ... ⊗ x_k`.
pub type Tuple = SmallVec<[Gen; 8]>;

/// Sign exponent modulo 2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug, Serialize, Deserialize)]
pub struct Parity(pub bool);

impl Parity {
    pub const EVEN: Parity = Parity(false);
    pub const ODD: Parity = Parity(true);

    pub fn of(n: i64) -> Parity {
        Parity(n.rem_euclid(2) == 1)
    }

    pub fn is_odd(self) -> bool {
        self.0
    }

    /// `(-1)^self` as an integer.
    pub fn sign(self) -> i64 {
        if self.0 {
            -1
        } else {
            1
        }
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;
    fn add(self, o: Parity) -> Parity {
        Parity(self.0 ^ o.0)
    }
}

impl std::ops::AddAssign for Parity {
    fn add_assign(&mut self, o: Parity) {
        self.0 ^= o.0;
    }
}

impl std::ops::Mul for Parity {
    type Output = Parity;
    fn mul(self, o: Parity) -> Parity {
        Parity(self.0 && o.0)
    }
}

impl std::iter::Sum for Parity {
    fn sum<I: Iterator<Item = Parity>>(it: I) -> Parity {
        it.fold(Parity::EVEN, |a, b| a + b)
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 as u8)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradedError {
    #[error("{names} names but {degrees} degrees")]
    Shape { names: usize, degrees: usize },
    #[error("duplicate generator name `{0}`")]
    Duplicate(String),
    #[error("unknown generator `{0}`")]
    Unknown(String),
    #[error("too many generators ({0})")]
    TooMany(usize),
}

/// Named homogeneous generators of a free graded module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedModule {
    names: Vec<String>,
    degrees: Vec<i64>,
}

impl GradedModule {
    pub fn new(names: Vec<String>, degrees: Vec<i64>) -> Result<GradedModule, GradedError> {
        if names.len() != degrees.len() {
            return Err(GradedError::Shape {
                names: names.len(),
                degrees: degrees.len(),
            });
        }
        if names.len() > Gen::MAX as usize {
            return Err(GradedError::TooMany(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(GradedError::Duplicate(n.clone()));
            }
        }
        Ok(GradedModule { names, degrees })
    }

    /// Convenience constructor from string slices; panics on malformed input.
    pub fn from_pairs(pairs: &[(&str, i64)]) -> GradedModule {
        GradedModule::new(
            pairs.iter().map(|(n, _)| n.to_string()).collect(),
            pairs.iter().map(|(_, d)| *d).collect(),
        )
        .expect("well-formed module")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> {
        0..self.names.len() as Gen
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn index(&self, name: &str) -> Result<Gen, GradedError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as Gen)
            .ok_or_else(|| GradedError::Unknown(name.to_string()))
    }

    pub fn degree(&self, g: Gen) -> i64 {
        self.degrees[g as usize]
    }

    pub fn shifted(&self, g: Gen) -> i64 {
        self.degrees[g as usize] - 1
    }

    pub fn parity(&self, g: Gen) -> Parity {
        Parity::of(self.degree(g))
    }

    pub fn shifted_parity(&self, g: Gen) -> Parity {
        Parity::of(self.shifted(g))
    }

    /// Sum of shifted degrees.
    pub fn tuple_degree(&self, t: &[Gen]) -> i64 {
        t.iter().map(|&g| self.shifted(g)).sum()
    }

    pub fn tuple_parity(&self, t: &[Gen]) -> Parity {
        t.iter().map(|&g| self.shifted_parity(g)).sum()
    }

    /// Sum of unshifted degrees.
    pub fn tuple_unshifted(&self, t: &[Gen]) -> i64 {
        t.iter().map(|&g| self.degree(g)).sum()
    }

    pub fn fmt_tuple(&self, t: &[Gen]) -> String {
        if t.is_empty() {
            return "1".to_string();
        }
        t.iter()
            .map(|&g| self.name(g))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// All tuples of length exactly `k`, in lexicographic order.
    pub fn tuples_of_length(&self, k: usize) -> Vec<Tuple> {
        let n = self.len() as Gen;
        let mut out = vec![Tuple::new()];
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for t in &out {
                for g in 0..n {
                    let mut u = t.clone();
                    u.push(g);
                    next.push(u);
                }
            }
            out = next;
        }
        out
    }
}

/// `sum_g s_g * g` with scalar coefficients on the left.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<Gen, Scalar>,
}

impl Element {
    pub fn zero() -> Element {
        Element::default()
    }

    pub fn single(g: Gen, s: Scalar) -> Element {
        let mut e = Element::zero();
        e.add_term(g, &s);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Gen, &Scalar)> {
        self.terms.iter().map(|(g, s)| (*g, s))
    }

    pub fn coeff(&self, g: Gen) -> Scalar {
        self.terms.get(&g).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, g: Gen, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        let e = self.terms.entry(g).or_default();
        e.add_assign(s);
        if e.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn add_assign(&mut self, o: &Element) {
        for (g, s) in o.iter() {
            self.add_term(g, s);
        }
    }

    pub fn sub_assign(&mut self, o: &Element) {
        for (g, s) in o.iter() {
            self.add_term(g, &s.neg());
        }
    }

    pub fn neg(&self) -> Element {
        Element {
            terms: self.terms.iter().map(|(g, s)| (*g, s.neg())).collect(),
        }
    }

    pub fn signed(self, p: Parity) -> Element {
        if p.is_odd() {
            self.neg()
        } else {
            self
        }
    }

    /// `c * self`, multiplying `c` on the left of every coefficient.
    pub fn scale(&self, ring: &Ring, c: &Scalar, cap: &Cap) -> Element {
        let mut out = Element::zero();
        for (g, s) in self.iter() {
            out.add_term(g, &ring.mul_capped(c, s, cap));
        }
        out
    }

    pub fn truncate(&self, ring: &Ring, cap: &Cap) -> Element {
        let mut out = Element::zero();
        for (g, s) in self.iter() {
            out.add_term(g, &ring.truncate(s, cap));
        }
        out
    }

    /// Total degrees `|g| + |s|` of all monomial terms.
    pub fn term_degrees<'a>(
        &'a self,
        ring: &'a Ring,
        module: &'a GradedModule,
    ) -> impl Iterator<Item = i64> + 'a {
        self.iter().flat_map(move |(g, s)| {
            s.terms()
                .map(move |(m, _)| module.degree(g) + ring.monomial_degree(m))
        })
    }

    pub fn display(&self, module: &GradedModule) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.iter()
            .map(|(g, s)| format!("({s}) {}", module.name(g)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Finite linear combination of tuples; an element of the tensor coalgebra.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Word {
    terms: BTreeMap<Tuple, Scalar>,
}

impl Word {
    pub fn zero() -> Word {
        Word::default()
    }

    pub fn single(t: Tuple, s: Scalar) -> Word {
        let mut w = Word::zero();
        w.add_term(t, &s);
        w
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, t: &[Gen]) -> Scalar {
        self.terms.get(t).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, t: Tuple, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(s);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_owned(&mut self, t: Tuple, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&s);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &Word) {
        for (t, s) in o.iter() {
            self.add_term(t.clone(), s);
        }
    }

    pub fn sub_assign(&mut self, o: &Word) {
        for (t, s) in o.iter() {
            self.add_owned(t.clone(), s.neg());
        }
    }

    pub fn neg(&self) -> Word {
        Word {
            terms: self.terms.iter().map(|(t, s)| (t.clone(), s.neg())).collect(),
        }
    }

    /// `c * self`, with `c` multiplied on the left of every coefficient.
    pub fn scale(&self, ring: &Ring, c: &Scalar, cap: &Cap) -> Word {
        let mut out = Word::zero();
        out.add_scaled(ring, c, self, cap);
        out
    }

    /// `self += c * w`.
    pub fn add_scaled(&mut self, ring: &Ring, c: &Scalar, w: &Word, cap: &Cap) {
        if let Some(q) = c.as_constant() {
            if q == crate::scalars::Q::one() {
                self.add_assign(w);
                return;
            }
        }
        for (t, s) in w.iter() {
            self.add_owned(t.clone(), ring.mul_capped(c, s, cap));
        }
    }

    pub fn truncate(&self, ring: &Ring, cap: &Cap) -> Word {
        self.iter()
            .map(|(t, s)| (t.clone(), ring.truncate(s, cap)))
            .collect()
    }

    pub fn max_weight(&self) -> Option<usize> {
        self.terms.keys().map(|t| t.len()).max()
    }

    /// Keeps the terms whose tuple passes `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Tuple) -> bool) -> Word {
        Word {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, s)| (t.clone(), s.clone()))
                .collect(),
        }
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Tuple, Scalar)> {
        self.terms.into_iter()
    }

    pub fn display(&self, module: &GradedModule) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.iter()
            .map(|(t, s)| format!("({s}) [{}]", module.fmt_tuple(t)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl FromIterator<(Tuple, Scalar)> for Word {
    fn from_iter<I: IntoIterator<Item = (Tuple, Scalar)>>(it: I) -> Word {
        let mut w = Word::zero();
        for (t, s) in it {
            w.add_owned(t, s);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Q;

    #[test]
    fn module_lookup_and_degrees() {
        let m = GradedModule::from_pairs(&[("1", 0), ("x", 1), ("y", 1), ("xy", 2)]);
        assert_eq!(m.index("xy"), Ok(3));
        assert_eq!(m.shifted(0), -1);
        assert_eq!(m.tuple_degree(&[1, 2]), 0);
        assert!(m.index("z").is_err());
        assert!(GradedModule::new(vec!["a".into(), "a".into()], vec![0, 0]).is_err());
    }

    #[test]
    fn word_cancellation() {
        let r = Ring::rationals();
        let mut w = Word::single(Tuple::from_slice(&[0, 1]), r.one());
        w.add_term(Tuple::from_slice(&[0, 1]), &r.constant(Q::int(-1)));
        assert!(w.is_zero());
    }

    #[test]
    fn tuples_enumeration() {
        let m = GradedModule::from_pairs(&[("a", 0), ("b", 1)]);
        assert_eq!(m.tuples_of_length(3).len(), 8);
        assert_eq!(m.tuples_of_length(0), vec![Tuple::new()]);
    }
}
