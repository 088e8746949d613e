//! Multilinear operator families given on basis generators, and their
//! extension to inputs with scalar coefficients.
//!
//! An operator `f(alpha_1, ..., alpha_k; gamma_1, ..., gamma_l)` has boundary
//! inputs from one module and interior inputs from another. Scalars are pulled
//! to the front with these exponents:
//!
//! * interior slot `j`: `|e| * |gamma_{[1:j-1]}|`
//! * boundary slot `i`: `|c| * (D + ||alpha_{[1:i-1]}|| + |gamma|)`
//!
//! where `D` is the parity of the operator. For the open-closed family
//! `D = n + 1`; for `q` and `mu`, `D = 1`.

use crate::graded::{Element, Gen, GradedModule, Parity, Tuple};
use crate::scalars::{Cap, Ring, Scalar};
use std::collections::HashMap;

/// A family of multilinear maps specified on basis generators.
pub trait Multilinear: Send + Sync {
    /// Value on pure generators; zero when the family has no such term.
    fn eval(&self, boundary: &[Gen], interior: &[Gen]) -> Element;
    /// Largest boundary arity with a possibly nonzero value.
    fn max_boundary(&self) -> usize;
    /// Largest interior arity with a possibly nonzero value.
    fn max_interior(&self) -> usize;
}

/// Finitely many structure constants `(boundary, interior) -> output`.
#[derive(Clone, Debug, Default)]
pub struct SparseFamily {
    entries: HashMap<(Tuple, Tuple), Element>,
    max_k: usize,
    max_l: usize,
}

impl SparseFamily {
    pub fn new() -> SparseFamily {
        SparseFamily::default()
    }

    /// Adds `value` to the entry for the given inputs.
    pub fn add(&mut self, boundary: &[Gen], interior: &[Gen], value: &Element) {
        if value.is_zero() {
            return;
        }
        let key = (Tuple::from_slice(boundary), Tuple::from_slice(interior));
        let e = self.entries.entry(key.clone()).or_default();
        e.add_assign(value);
        if e.is_zero() {
            self.entries.remove(&key);
        } else {
            self.max_k = self.max_k.max(boundary.len());
            self.max_l = self.max_l.max(interior.len());
        }
    }

    pub fn get(&self, boundary: &[Gen], interior: &[Gen]) -> Option<&Element> {
        // Avoid allocating keys for the common miss.
        if boundary.len() > self.max_k || interior.len() > self.max_l {
            return None;
        }
        self.entries
            .get(&(Tuple::from_slice(boundary), Tuple::from_slice(interior)))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in a deterministic order.
    pub fn sorted_entries(&self) -> Vec<(&Tuple, &Tuple, &Element)> {
        let mut v: Vec<_> = self.entries.iter().map(|((b, i), e)| (b, i, e)).collect();
        v.sort_by(|x, y| (x.0.len(), x.1.len(), x.0, x.1).cmp(&(y.0.len(), y.1.len(), y.0, y.1)));
        v
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tuple, &Tuple, &Element)> {
        self.entries.iter().map(|((b, i), e)| (b, i, e))
    }
}

impl Multilinear for SparseFamily {
    fn eval(&self, boundary: &[Gen], interior: &[Gen]) -> Element {
        self.get(boundary, interior).cloned().unwrap_or_default()
    }

    fn max_boundary(&self) -> usize {
        self.max_k
    }

    fn max_interior(&self) -> usize {
        self.max_l
    }
}

/// Linear map of a fixed degree between free graded modules, given on generators.
#[derive(Clone, Debug, Default)]
pub struct LinearMap {
    pub degree: i64,
    images: HashMap<Gen, Element>,
}

impl LinearMap {
    pub fn new(degree: i64) -> LinearMap {
        LinearMap {
            degree,
            images: HashMap::new(),
        }
    }

    pub fn set(&mut self, g: Gen, image: Element) {
        if image.is_zero() {
            self.images.remove(&g);
        } else {
            self.images.insert(g, image);
        }
    }

    pub fn image(&self, g: Gen) -> Element {
        self.images.get(&g).cloned().unwrap_or_default()
    }

    pub fn sorted_images(&self) -> Vec<(Gen, &Element)> {
        let mut v: Vec<_> = self.images.iter().map(|(g, e)| (*g, e)).collect();
        v.sort_by_key(|x| x.0);
        v
    }

    /// `f(c g) = (-1)^{|c| deg f} c f(g)`.
    pub fn apply(&self, ring: &Ring, x: &Element, cap: &Cap) -> Element {
        let twist = Parity::of(self.degree);
        let mut out = Element::zero();
        for (g, c) in x.iter() {
            if let Some(img) = self.images.get(&g) {
                let c = twist_odd(ring, c, twist);
                out.add_assign(&img.scale(ring, &c, cap));
            }
        }
        out
    }

    pub fn compose(&self, ring: &Ring, other: &LinearMap, domain: &GradedModule, cap: &Cap) -> LinearMap {
        let mut out = LinearMap::new(self.degree + other.degree);
        for g in domain.gens() {
            let img = self.apply(ring, &other.image(g), cap);
            out.set(g, img);
        }
        out
    }
}

/// `c` with its odd part negated when `flag` is odd: the Koszul sign `(-1)^{|c| flag}`.
pub fn twist_odd(ring: &Ring, c: &Scalar, flag: Parity) -> Scalar {
    if !flag.is_odd() || !ring.vars.degrees.iter().any(|d| d % 2 != 0) {
        return c.clone();
    }
    let (even, odd) = ring.split_parity(c);
    let mut out = even;
    out.sub_assign(&odd);
    out
}

/// Context for evaluating a [`Multilinear`] family on elements.
pub struct Evaluator<'a> {
    pub ring: &'a Ring,
    pub cap: &'a Cap,
    pub boundary: &'a GradedModule,
    pub interior: &'a GradedModule,
    /// Parity `D` of the operator seen by boundary scalars.
    pub parity: Parity,
}

impl Evaluator<'_> {
    /// Multilinear extension of `f` to general inputs.
    pub fn apply(&self, f: &dyn Multilinear, boundary: &[&Element], interior: &[&Element]) -> Element {
        let mut out = Element::zero();
        if boundary.iter().chain(interior).any(|e| e.is_zero()) {
            return out;
        }
        let mut bgens: Vec<Gen> = Vec::with_capacity(boundary.len());
        let mut igens: Vec<Gen> = Vec::with_capacity(interior.len());
        self.expand_interior(f, boundary, interior, &mut igens, &mut bgens, 0, self.ring.one(), &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn expand_interior(
        &self,
        f: &dyn Multilinear,
        boundary: &[&Element],
        interior: &[&Element],
        igens: &mut Vec<Gen>,
        bgens: &mut Vec<Gen>,
        before: i64,
        acc: Scalar,
        out: &mut Element,
    ) {
        let j = igens.len();
        if j == interior.len() {
            let total_interior = before;
            self.expand_boundary(f, boundary, igens, bgens, total_interior, 0, acc, out);
            return;
        }
        for (h, e) in interior[j].iter() {
            let e = twist_odd(self.ring, e, Parity::of(before));
            let acc2 = self.ring.mul_capped(&acc, &e, self.cap);
            if acc2.is_zero() {
                continue;
            }
            igens.push(h);
            self.expand_interior(f, boundary, interior, igens, bgens, before + self.interior.degree(h), acc2, out);
            igens.pop();
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn expand_boundary(
        &self,
        f: &dyn Multilinear,
        boundary: &[&Element],
        igens: &[Gen],
        bgens: &mut Vec<Gen>,
        interior_total: i64,
        before: i64,
        acc: Scalar,
        out: &mut Element,
    ) {
        let i = bgens.len();
        if i == boundary.len() {
            let v = f.eval(bgens, igens);
            if !v.is_zero() {
                out.add_assign(&v.scale(self.ring, &acc, self.cap));
            }
            return;
        }
        let flag = self.parity + Parity::of(before + interior_total);
        for (g, c) in boundary[i].iter() {
            let c = twist_odd(self.ring, c, flag);
            let acc2 = self.ring.mul_capped(&acc, &c, self.cap);
            if acc2.is_zero() {
                continue;
            }
            bgens.push(g);
            self.expand_boundary(f, boundary, igens, bgens, interior_total, before + self.boundary.shifted(g), acc2, out);
            bgens.pop();
        }
    }
}

/// A family defined by a closure, for lazily generated structure constants.
pub struct FnFamily<F> {
    pub f: F,
    pub max_k: usize,
    pub max_l: usize,
}

impl<F> Multilinear for FnFamily<F>
where
    F: Fn(&[Gen], &[Gen]) -> Element + Send + Sync,
{
    fn eval(&self, boundary: &[Gen], interior: &[Gen]) -> Element {
        if boundary.len() > self.max_k || interior.len() > self.max_l {
            return Element::zero();
        }
        (self.f)(boundary, interior)
    }

    fn max_boundary(&self) -> usize {
        self.max_k
    }

    fn max_interior(&self) -> usize {
        self.max_l
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{FormalVarSpec, PiGroup, Q};

    #[test]
    fn odd_scalar_sign_in_boundary_slot() {
        // f(x, y) = z on generators; pulling an odd scalar out of slot 2 past
        // an odd operator and ||x|| even.
        let ring = Ring::new(PiGroup::trivial(), FormalVarSpec::new(vec![1]));
        let m = GradedModule::from_pairs(&[("x", 1), ("y", 0), ("z", 0)]);
        let mut f = SparseFamily::new();
        f.add(&[0, 1], &[], &Element::single(2, ring.one()));
        let cap = Cap::new(Q::int(5), 4, 4);
        let ev = Evaluator {
            ring: &ring,
            cap: &cap,
            boundary: &m,
            interior: &m,
            parity: Parity::ODD,
        };
        let t = ring.var(0).unwrap();
        let x = Element::single(0, ring.one());
        let ty = Element::single(1, t.clone());
        let out = ev.apply(&f, &[&x, &ty], &[]);
        // exponent |t| * (1 + ||x||) = 1 * (1 + 0) = 1
        assert_eq!(out, Element::single(2, t.neg()));
    }

    #[test]
    fn linear_map_koszul() {
        let ring = Ring::new(PiGroup::trivial(), FormalVarSpec::new(vec![1]));
        let mut d = LinearMap::new(1);
        d.set(0, Element::single(1, ring.one()));
        let cap = Cap::new(Q::int(5), 4, 4);
        let t = ring.var(0).unwrap();
        let out = d.apply(&ring, &Element::single(0, t.clone()), &cap);
        assert_eq!(out, Element::single(1, t.neg()));
    }
}
