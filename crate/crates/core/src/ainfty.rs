//! Curved A-infinity algebras given by structure constants, the coderivation
//! `mu-hat` on the tensor coalgebra, and the bulk/boundary deformation of a
//! closed-open family `q`.

use crate::family::{twist_odd, Evaluator, LinearMap, Multilinear, SparseFamily};
use crate::graded::{Element, Gen, GradedError, GradedModule, Parity, Tuple, Word};
use crate::scalars::{Cap, Q, Ring, Scalar, ScalarError, Valuation};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AinftyError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error("degree law violated at {inputs}: output term {term} has shifted degree {found}, expected {expected}")]
    DegreeLaw {
        inputs: String,
        term: String,
        expected: i64,
        found: i64,
    },
    #[error("curvature must have positive valuation, found {0}")]
    CurvatureValuation(String),
    #[error("structure constant at {0} has negative valuation")]
    NegativeValuation(String),
    #[error("the algebra has no unit")]
    NoUnit,
    #[error("unknown builtin algebra `{0}`")]
    UnknownBuiltin(String),
    #[error("deformation precondition: {0}")]
    Deformation(String),
    #[error("generator index {0} out of range")]
    BadGenerator(Gen),
    #[error("{0}")]
    BadPermutation(String),
}

/// Curved A-infinity algebra on a free graded module.
///
/// `mu_k(x_1, ..., x_k)` is stored for pure generator inputs. Each `mu_k` has
/// shifted degree `+1`; `mu_0` is the curvature.
#[derive(Clone, Debug)]
pub struct AInfty {
    pub name: String,
    pub ring: Arc<Ring>,
    pub module: Arc<GradedModule>,
    pub unit: Option<Gen>,
    ops: HashMap<Tuple, Element>,
    max_arity: usize,
}

impl AInfty {
    pub fn new(name: &str, ring: Arc<Ring>, module: Arc<GradedModule>, unit: Option<Gen>) -> AInfty {
        AInfty {
            name: name.to_string(),
            ring,
            module,
            unit,
            ops: HashMap::new(),
            max_arity: 0,
        }
    }

    /// Adds `value` to `mu(inputs)`.
    pub fn add_op(&mut self, inputs: &[Gen], value: &Element) {
        if value.is_zero() {
            return;
        }
        let key = Tuple::from_slice(inputs);
        let e = self.ops.entry(key.clone()).or_default();
        e.add_assign(value);
        if e.is_zero() {
            self.ops.remove(&key);
        } else {
            self.max_arity = self.max_arity.max(inputs.len());
        }
    }

    pub fn mu(&self, inputs: &[Gen]) -> Option<&Element> {
        if inputs.len() > self.max_arity {
            return None;
        }
        self.ops.get(inputs)
    }

    pub fn curvature(&self) -> Element {
        self.mu(&[]).cloned().unwrap_or_default()
    }

    pub fn is_curved(&self) -> bool {
        self.mu(&[]).is_some()
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    /// Structure constants in a deterministic order.
    pub fn sorted_ops(&self) -> Vec<(&Tuple, &Element)> {
        let mut v: Vec<_> = self.ops.iter().collect();
        v.sort_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)));
        v
    }

    /// Checks the degree law, valuations, and unit degree.
    pub fn validate(&self) -> Result<(), AinftyError> {
        let m = &self.module;
        for (inputs, out) in self.sorted_ops() {
            if let Some(&g) = inputs.iter().find(|&&g| g as usize >= m.len()) {
                return Err(AinftyError::BadGenerator(g));
            }
            let expected = m.tuple_degree(inputs) + 1;
            for (g, s) in out.iter() {
                if g as usize >= m.len() {
                    return Err(AinftyError::BadGenerator(g));
                }
                self.ring.check(s)?;
                for (mono, _) in s.terms() {
                    let found = m.shifted(g) + self.ring.monomial_degree(mono);
                    if found != expected {
                        return Err(AinftyError::DegreeLaw {
                            inputs: format!("mu_{}({})", inputs.len(), m.fmt_tuple(inputs)),
                            term: format!("{mono} {}", m.name(g)),
                            expected,
                            found,
                        });
                    }
                }
            }
        }
        if let Some(c) = self.mu(&[]) {
            for (_, s) in c.iter() {
                match self.ring.valuation(s) {
                    Valuation::Finite(v) if !(v > Q::zero()) => {
                        return Err(AinftyError::CurvatureValuation(v.to_string()))
                    }
                    _ => {}
                }
            }
        }
        if let Some(u) = self.unit {
            if u as usize >= m.len() {
                return Err(AinftyError::BadGenerator(u));
            }
        }
        Ok(())
    }

    /// All monomials appearing in structure constants.
    pub fn structure_monomials(&self) -> Vec<crate::scalars::Monomial> {
        let mut v: Vec<_> = self
            .ops
            .values()
            .flat_map(|e| e.iter().flat_map(|(_, s)| s.terms().map(|(m, _)| m.clone())).collect::<Vec<_>>())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// The part of every structure constant of valuation zero.
    pub fn energy_zero_part(&self) -> AInfty {
        let mut out = AInfty::new(
            &format!("{} (energy 0)", self.name),
            self.ring.clone(),
            self.module.clone(),
            self.unit,
        );
        for (inputs, e) in self.sorted_ops() {
            let mut f = Element::zero();
            for (g, s) in e.iter() {
                f.add_term(g, &s.filter(|m| self.ring.monomial_valuation(m).is_zero()));
            }
            out.add_op(inputs, &f);
        }
        out
    }

    /// The same algebra with generators enumerated in a different order:
    /// old generator `g` becomes new generator `perm[g]`.
    pub fn permuted(&self, perm: &[Gen]) -> Result<AInfty, AinftyError> {
        let n = self.module.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| (p as usize) >= n || std::mem::replace(&mut seen[p as usize], true)) {
            return Err(AinftyError::BadPermutation(format!("{perm:?} is not a permutation of {n} generators")));
        }
        let mut names = vec![String::new(); n];
        let mut degrees = vec![0; n];
        for g in self.module.gens() {
            names[perm[g as usize] as usize] = self.module.name(g).to_string();
            degrees[perm[g as usize] as usize] = self.module.degree(g);
        }
        let module = Arc::new(GradedModule::new(names, degrees)?);
        let mut out = AInfty::new(&self.name, self.ring.clone(), module, self.unit.map(|u| perm[u as usize]));
        for (inputs, e) in self.sorted_ops() {
            let t: Tuple = inputs.iter().map(|&g| perm[g as usize]).collect();
            let mut f = Element::zero();
            for (g, s) in e.iter() {
                f.add_term(perm[g as usize], s);
            }
            out.add_op(&t, &f);
        }
        Ok(out)
    }

    /// `mu-hat` on a pure tuple: the sum over splittings `l1 | l2 | l3` of
    /// `(-1)^{||l1||} l1 ⊗ mu(l2) ⊗ l3`.
    pub fn hat_on_tuple(&self, t: &[Gen], cap: &Cap) -> Word {
        let k = t.len();
        let mut out = Word::zero();
        let mut prefix = Parity::EVEN;
        for i in 0..=k {
            for j in i..=k.min(i + self.max_arity) {
                if let Some(val) = self.mu(&t[i..j]) {
                    for (g, s) in val.iter() {
                        let mut nt = Tuple::with_capacity(k + i + 1 - j);
                        nt.extend_from_slice(&t[..i]);
                        nt.push(g);
                        nt.extend_from_slice(&t[j..]);
                        // the structure-constant scalar moves left past l1
                        let c = twist_odd(&self.ring, &self.ring.truncate(s, cap), prefix);
                        out.add_owned(nt, c.signed(prefix.is_odd()));
                    }
                }
            }
            if i < k {
                prefix += self.module.shifted_parity(t[i]);
            }
        }
        out
    }

    /// `mu-hat` on a general word; `mu-hat(c w) = (-1)^{|c|} c mu-hat(w)`.
    pub fn hat_extension(&self, w: &Word, cap: &Cap) -> Word {
        let mut out = Word::zero();
        for (t, c) in w.iter() {
            let c = twist_odd(&self.ring, c, Parity::ODD);
            out.add_scaled(&self.ring, &c, &self.hat_on_tuple(t, cap), cap);
        }
        out
    }

    /// Checks `mu-hat ∘ mu-hat = 0` on every basis tuple of length at most `cap.weight`.
    pub fn residual(&self, cap: &Cap) -> ResidualReport {
        let tuples: Vec<Tuple> = (0..=cap.weight)
            .flat_map(|k| self.module.tuples_of_length(k))
            .collect();
        let failures: Vec<Witness> = tuples
            .par_iter()
            .filter_map(|t| {
                let r = self.hat_extension(&self.hat_on_tuple(t, cap), cap);
                (!r.is_zero()).then(|| Witness {
                    input: self.module.fmt_tuple(t),
                    value: r.display(&self.module),
                })
            })
            .collect();
        ResidualReport::new(tuples.len(), failures)
    }

    /// Strict-unit axioms: `|e| = 0`, `mu_2(e, x) = x`,
    /// `mu_2(x, e) = (-1)^{||x|| + 1} x`, and `mu_k(..., e, ...) = 0` for `k != 2`.
    pub fn unit_check(&self) -> Result<UnitReport, AinftyError> {
        let e = self.unit.ok_or(AinftyError::NoUnit)?;
        let m = &self.module;
        let mut checks = Vec::new();
        let deg = m.degree(e);
        checks.push(CheckLine::new(
            "unit has degree 0",
            deg == 0,
            format!("|{}| = {deg}", m.name(e)),
        ));
        let mut bad = Vec::new();
        for (inputs, val) in self.sorted_ops() {
            if inputs.len() != 2 && inputs.contains(&e) && !val.is_zero() {
                bad.push(format!("mu_{}({}) = {}", inputs.len(), m.fmt_tuple(inputs), val.display(m)));
            }
        }
        checks.push(CheckLine::new(
            "mu_k vanishes on the unit for k != 2",
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        ));
        let mut left = Vec::new();
        let mut right = Vec::new();
        for x in m.gens() {
            let want = Element::single(x, self.ring.one());
            let got = self.mu(&[e, x]).cloned().unwrap_or_default();
            if got != want {
                left.push(format!("mu_2({}, {}) = {}", m.name(e), m.name(x), got.display(m)));
            }
            let want = want.signed(m.shifted_parity(x) + Parity::ODD);
            let got = self.mu(&[x, e]).cloned().unwrap_or_default();
            if got != want {
                right.push(format!("mu_2({}, {}) = {}", m.name(x), m.name(e), got.display(m)));
            }
        }
        checks.push(CheckLine::new(
            "left unit",
            left.is_empty(),
            left.first().cloned().unwrap_or_default(),
        ));
        checks.push(CheckLine::new(
            "right unit with sign (-1)^{||x||+1}",
            right.is_empty(),
            right.first().cloned().unwrap_or_default(),
        ));
        Ok(UnitReport { checks })
    }
}

/// A failing input and the offending value, rendered as text.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub input: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub checked: usize,
    pub failures: usize,
    /// The first few failures in basis order.
    pub witnesses: Vec<Witness>,
}

impl ResidualReport {
    pub fn new(checked: usize, mut failures: Vec<Witness>) -> ResidualReport {
        let n = failures.len();
        failures.truncate(8);
        ResidualReport {
            checked,
            failures: n,
            witnesses: failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: &str, passed: bool, detail: String) -> CheckLine {
        CheckLine {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitReport {
    pub checks: Vec<CheckLine>,
}

impl UnitReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Interior (ambient) algebra: a free graded module with a differential.
#[derive(Clone, Debug)]
pub struct InteriorAlgebra {
    pub module: Arc<GradedModule>,
    pub differential: LinearMap,
    /// The constant function `1_X`, when present.
    pub one: Option<Gen>,
}

impl InteriorAlgebra {
    pub fn trivial() -> InteriorAlgebra {
        InteriorAlgebra {
            module: Arc::new(GradedModule::from_pairs(&[])),
            differential: LinearMap::new(1),
            one: None,
        }
    }
}

/// Closed-open family `q_{k,l}`, summed over classes.
#[derive(Clone, Debug)]
pub struct QFamily {
    pub ring: Arc<Ring>,
    pub module: Arc<GradedModule>,
    pub interior: InteriorAlgebra,
    pub ops: SparseFamily,
    pub unit: Option<Gen>,
    /// The class-zero part of `q_{1,0}`, i.e. the de Rham differential.
    pub classical_d: Option<LinearMap>,
}

fn factorial(n: usize) -> Q {
    (1..=n as i128).fold(Q::one(), |a, b| a * Q::int(b))
}

/// Increasing position lists `0 <= i_1 < ... < i_k < s`.
pub(crate) fn combinations(s: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, s: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..s {
            if s - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, s, k, cur, out);
            cur.pop();
        }
    }
    go(0, s, k, &mut cur, &mut out);
    out
}

/// Checks the bulk/boundary deformation parameters: homogeneous degree and positive valuation.
pub(crate) fn check_deformation_input(
    ring: &Ring,
    module: &GradedModule,
    x: &Element,
    degree: i64,
    what: &str,
) -> Result<(), AinftyError> {
    for (g, s) in x.iter() {
        for (m, _) in s.terms() {
            let d = module.degree(g) + ring.monomial_degree(m);
            if d != degree {
                return Err(AinftyError::Deformation(format!(
                    "{what} must have degree {degree}, term {m} {} has degree {d}",
                    module.name(g)
                )));
            }
            if !(ring.monomial_valuation(m) > Q::zero()) {
                return Err(AinftyError::Deformation(format!(
                    "{what} must have positive valuation, term {m} {} has valuation {}",
                    module.name(g),
                    ring.monomial_valuation(m)
                )));
            }
        }
    }
    Ok(())
}

impl QFamily {
    /// `q^{b,gamma}_{k,l}` on pure inputs:
    /// `sum_{s,t} 1/(t-l)! sum_{i_1<...<i_k} q_{s,t}(b.. alpha_1 b.. alpha_k b..; delta ⊗ gamma^{t-l})`.
    pub fn deformed_value(
        &self,
        b: &Element,
        gamma: &Element,
        alpha: &[Gen],
        delta: &[Gen],
        cap: &Cap,
    ) -> Element {
        let ev = Evaluator {
            ring: &self.ring,
            cap,
            boundary: &self.module,
            interior: &self.interior.module,
            parity: Parity::ODD,
        };
        let k = alpha.len();
        let l = delta.len();
        let singles: Vec<Element> = alpha.iter().map(|&g| Element::single(g, self.ring.one())).collect();
        let dsingles: Vec<Element> = delta.iter().map(|&g| Element::single(g, self.ring.one())).collect();
        let smax = if b.is_zero() { k } else { self.ops.max_boundary().max(k) };
        let tmax = if gamma.is_zero() { l } else { self.ops.max_interior().max(l) };
        let mut out = Element::zero();
        for t in l..=tmax {
            let mut interior: Vec<&Element> = dsingles.iter().collect();
            interior.extend(std::iter::repeat_n(gamma, t - l));
            let coef = self.ring.constant(factorial(t - l).recip());
            for s in k..=smax {
                for pos in combinations(s, k) {
                    let mut boundary: Vec<&Element> = vec![b; s];
                    for (slot, x) in pos.iter().zip(&singles) {
                        boundary[*slot] = x;
                    }
                    let v = ev.apply(&self.ops, &boundary, &interior);
                    out.add_assign(&v.scale(&self.ring, &coef, cap));
                }
            }
        }
        out
    }

    fn check_parameters(&self, b: &Element, gamma: &Element, cap: &Cap) -> Result<(), AinftyError> {
        check_deformation_input(&self.ring, &self.module, b, 1, "b")?;
        check_deformation_input(&self.ring, &self.interior.module, gamma, 2, "gamma")?;
        let dg = self.interior.differential.apply(&self.ring, gamma, cap);
        if !dg.is_zero() {
            return Err(AinftyError::Deformation("gamma must be closed".into()));
        }
        Ok(())
    }

    /// The slice `q^{b,gamma}_{k,l}` on all pure inputs.
    pub fn deform_q(
        &self,
        b: &Element,
        gamma: &Element,
        k: usize,
        l: usize,
        cap: &Cap,
    ) -> Result<SparseFamily, AinftyError> {
        self.check_parameters(b, gamma, cap)?;
        let mut out = SparseFamily::new();
        for alpha in self.module.tuples_of_length(k) {
            for delta in self.interior.module.tuples_of_length(l) {
                let v = self.deformed_value(b, gamma, &alpha, &delta, cap);
                out.add(&alpha, &delta, &v);
            }
        }
        Ok(out)
    }

    /// The A-infinity algebra `m_k = q^{b,gamma}_{k,0}`.
    pub fn deformed_ainfty(
        &self,
        name: &str,
        b: &Element,
        gamma: &Element,
        cap: &Cap,
    ) -> Result<AInfty, AinftyError> {
        self.check_parameters(b, gamma, cap)?;
        let mut a = AInfty::new(name, self.ring.clone(), self.module.clone(), self.unit);
        for k in 0..=self.ops.max_boundary() {
            for alpha in self.module.tuples_of_length(k) {
                let v = self.deformed_value(b, gamma, &alpha, &[], cap);
                a.add_op(&alpha, &v);
            }
        }
        Ok(a)
    }

    /// The undeformed algebra `m_k = q_{k,0}`.
    pub fn ainfty(&self, name: &str) -> AInfty {
        let mut a = AInfty::new(name, self.ring.clone(), self.module.clone(), self.unit);
        for (bnd, int, v) in self.ops.sorted_entries() {
            if int.is_empty() {
                a.add_op(bnd, v);
            }
        }
        a
    }
}

/// Builds the A-infinity structure of a curved DGA: `mu_0 = c`, `mu_1 = d`,
/// `mu_2(x, y) = (-1)^{|x|} x y`.
pub fn from_dga(
    name: &str,
    ring: Arc<Ring>,
    module: Arc<GradedModule>,
    unit: Option<Gen>,
    curvature: &Element,
    d: &LinearMap,
    product: impl Fn(Gen, Gen) -> Element,
) -> AInfty {
    let mut a = AInfty::new(name, ring, module.clone(), unit);
    a.add_op(&[], curvature);
    for x in module.gens() {
        a.add_op(&[x], &d.image(x));
        for y in module.gens() {
            let v = product(x, y).signed(module.parity(x));
            a.add_op(&[x, y], &v);
        }
    }
    a
}

pub mod builtins {
    //! Small reference algebras.

    use super::*;
    use crate::scalars::{FormalVarSpec, PiGroup};

    pub const NAMES: [&str; 4] = ["dual_numbers", "exterior(r)", "curved_matrix", "ground_field"];

    /// `Q` with unit `e`, `mu_2(e, e) = e`.
    pub fn ground_field() -> AInfty {
        let ring = Arc::new(Ring::rationals());
        let module = Arc::new(GradedModule::from_pairs(&[("1", 0)]));
        let one = ring.one();
        from_dga("ground_field", ring, module, Some(0), &Element::zero(), &LinearMap::new(1), |_, _| {
            Element::single(0, one.clone())
        })
    }

    /// `Q[eps]/eps^2` with `|eps| = 0` and zero differential.
    pub fn dual_numbers() -> AInfty {
        let ring = Arc::new(Ring::rationals());
        let module = Arc::new(GradedModule::from_pairs(&[("1", 0), ("eps", 0)]));
        let one = ring.one();
        from_dga("dual_numbers", ring, module, Some(0), &Element::zero(), &LinearMap::new(1), |x, y| {
            match (x, y) {
                (0, y) => Element::single(y, one.clone()),
                (x, 0) => Element::single(x, one.clone()),
                _ => Element::zero(),
            }
        })
    }

    fn subset_name(mask: u32, r: usize) -> String {
        if mask == 0 {
            return "1".into();
        }
        (0..r)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| format!("x{}", i + 1))
            .collect::<Vec<_>>()
            .join("")
    }

    /// Exterior algebra on `r` generators of degree 1 with zero differential.
    pub fn exterior(r: usize) -> AInfty {
        assert!(r <= 8, "exterior algebra rank too large");
        let ring = Arc::new(Ring::rationals());
        let masks: Vec<u32> = {
            let mut v: Vec<u32> = (0..1u32 << r).collect();
            v.sort_by_key(|m| (m.count_ones(), *m));
            v
        };
        let names: Vec<String> = masks.iter().map(|&m| subset_name(m, r)).collect();
        let degrees: Vec<i64> = masks.iter().map(|m| m.count_ones() as i64).collect();
        let module = Arc::new(GradedModule::new(names, degrees).expect("distinct subsets"));
        let index: HashMap<u32, Gen> = masks.iter().enumerate().map(|(i, &m)| (m, i as Gen)).collect();
        let one = ring.one();
        let product = |x: Gen, y: Gen| {
            let (a, b) = (masks[x as usize], masks[y as usize]);
            if a & b != 0 {
                return Element::zero();
            }
            // sign of sorting x_S x_T: pairs s in S, t in T with s > t
            let mut inv = 0;
            for s in 0..r {
                if a >> s & 1 == 1 {
                    inv += (b & ((1u32 << s) - 1)).count_ones();
                }
            }
            Element::single(index[&(a | b)], one.clone()).signed(Parity(inv % 2 == 1))
        };
        from_dga(&format!("exterior({r})"), ring, module, Some(0), &Element::zero(), &LinearMap::new(1), product)
    }

    /// 2x2 matrices with `|E12| = 1`, `|E21| = -1`, differential `[a, -]` for
    /// `a = E12 + T E21`, and curvature `a^2 = T I`.
    pub fn curved_matrix() -> AInfty {
        let ring = Arc::new(Ring::new(
            PiGroup::new(vec![Q::one()], vec![2]).expect("even Maslov"),
            FormalVarSpec::default(),
        ));
        // basis I, E11, E12, E21; matrix units e11, e12, e21, e22 have degrees 0, 1, -1, 0
        let module = Arc::new(GradedModule::from_pairs(&[("I", 0), ("E11", 0), ("E12", 1), ("E21", -1)]));
        let cap = Cap::new(Q::int(1 << 20), 0, 0);
        let t = ring.t_class(&[1]).expect("class");
        let one = ring.one();
        let zero = Scalar::zero();
        type Mat = [[Scalar; 2]; 2];
        let unit_mat = |i: usize, j: usize, c: &Scalar| -> Mat {
            let mut m: Mat = Default::default();
            m[i][j] = c.clone();
            m
        };
        let to_mat = |g: Gen| -> Mat {
            match g {
                0 => {
                    let mut m = unit_mat(0, 0, &one);
                    m[1][1] = one.clone();
                    m
                }
                1 => unit_mat(0, 0, &one),
                2 => unit_mat(0, 1, &one),
                _ => unit_mat(1, 0, &one),
            }
        };
        let mul = |x: &Mat, y: &Mat| -> Mat {
            let mut m: Mat = Default::default();
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let p = ring.mul_capped(&x[i][k], &y[k][j], &cap);
                        m[i][j].add_assign(&p);
                    }
                }
            }
            m
        };
        let from_mat = |m: &Mat| -> Element {
            let mut e = Element::zero();
            e.add_term(0, &m[1][1]);
            let mut c = m[0][0].clone();
            c.sub_assign(&m[1][1]);
            e.add_term(1, &c);
            e.add_term(2, &m[0][1]);
            e.add_term(3, &m[1][0]);
            e
        };
        let a: Mat = [[zero.clone(), one.clone()], [t.clone(), zero.clone()]];
        let curvature = from_mat(&mul(&a, &a));
        let mut d = LinearMap::new(1);
        for g in module.gens() {
            let x = to_mat(g);
            let mut v = from_mat(&mul(&a, &x));
            let xa = from_mat(&mul(&x, &a)).signed(module.parity(g));
            v.sub_assign(&xa);
            d.set(g, v);
        }
        from_dga("curved_matrix", ring.clone(), module, Some(0), &curvature, &d, |x, y| {
            from_mat(&mul(&to_mat(x), &to_mat(y)))
        })
    }

    /// Looks up a builtin by name; `exterior(r)` takes the rank in parentheses.
    pub fn by_name(name: &str) -> Result<AInfty, AinftyError> {
        let name = name.trim();
        match name {
            "dual_numbers" => Ok(dual_numbers()),
            "curved_matrix" => Ok(curved_matrix()),
            "ground_field" => Ok(ground_field()),
            _ => {
                if let Some(r) = name.strip_prefix("exterior(").and_then(|s| s.strip_suffix(')')) {
                    let r: usize = r
                        .trim()
                        .parse()
                        .map_err(|_| AinftyError::UnknownBuiltin(name.to_string()))?;
                    if (1..=6).contains(&r) {
                        return Ok(exterior(r));
                    }
                }
                Err(AinftyError::UnknownBuiltin(name.to_string()))
            }
        }
    }

    /// The four reference algebras used by sweeps.
    pub fn all() -> Vec<AInfty> {
        vec![dual_numbers(), exterior(2), curved_matrix(), ground_field()]
    }
}

#[cfg(test)]
mod tests {
    use super::builtins::*;
    use super::*;

    fn cap(w: usize) -> Cap {
        Cap::new(Q::int(3), w, 0)
    }

    #[test]
    fn builtins_validate() {
        for a in all() {
            a.validate().unwrap_or_else(|e| panic!("{}: {e}", a.name));
            assert!(a.unit_check().unwrap().passed(), "{}", a.name);
        }
    }

    #[test]
    fn exterior_two_shape() {
        let a = exterior(2);
        assert_eq!(a.module.len(), 4);
        assert_eq!(a.module.degrees(), &[0, 1, 1, 2]);
    }

    #[test]
    fn curvature_of_matrix_algebra() {
        let a = curved_matrix();
        let c = a.curvature();
        let t = a.ring.t_class(&[1]).unwrap();
        assert_eq!(c, Element::single(0, t));
        assert!(a.validate().is_ok());
    }

    #[test]
    fn residual_small() {
        for a in all() {
            let r = a.residual(&cap(3));
            assert!(r.passed(), "{}: {:?}", a.name, r.witnesses);
        }
    }

    #[test]
    fn wrong_sign_product_fails_residual() {
        // mu_2 = plain product (no sign) breaks the relations on exterior(2)
        let e = exterior(2);
        let mut bad = AInfty::new("bad", e.ring.clone(), e.module.clone(), e.unit);
        for (inp, v) in e.sorted_ops() {
            let v = if inp.len() == 2 { v.clone().signed(e.module.parity(inp[0])) } else { v.clone() };
            bad.add_op(inp, &v);
        }
        assert!(!bad.residual(&cap(3)).passed());
    }

    #[test]
    fn unit_of_wrong_degree() {
        let ring = Arc::new(Ring::rationals());
        let m = Arc::new(GradedModule::from_pairs(&[("u", 1)]));
        let a = AInfty::new("u", ring, m, Some(0));
        let r = a.unit_check().unwrap();
        assert!(!r.checks[0].passed);
        assert_eq!(AInfty::new("x", Arc::new(Ring::rationals()), a.module.clone(), None).unit_check().unwrap_err(), AinftyError::NoUnit);
    }

    #[test]
    fn degree_law_violation_reported() {
        let ring = Arc::new(Ring::rationals());
        let m = Arc::new(GradedModule::from_pairs(&[("x", 0)]));
        let mut a = AInfty::new("x", ring.clone(), m, None);
        a.add_op(&[0], &Element::single(0, ring.one()));
        assert!(matches!(a.validate(), Err(AinftyError::DegreeLaw { .. })));
    }

    #[test]
    fn insertion_patterns() {
        // one input among two insertions: three placements
        assert_eq!(combinations(3, 1).len(), 3);
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(2, 0).len(), 1);
    }
}
