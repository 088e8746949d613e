//! Open-closed operator families `p_{k,l}`: boundary inputs from an
//! A-infinity algebra `A`, interior inputs and outputs in a target complex
//! `(T, d_T)`. The family has parity `n + 1`, where `n` is the dimension of
//! the Lagrangian.
//!
//! The structure equation is
//!
//! ```text
//! d p(α;γ) = p(α; d(γ))
//!   + Σ_{I⊔J, σ} (-1)^{s1_σ(α) + |γ| + s(γ_I ⊗ γ_J) + (n+1)(|γ_J|+1)}
//!       p_{k1,|I|}(q_{k2,|J|}(α^σ_(1); γ_J) ⊗ α^σ_(2); γ_I)
//!   + δ_{k,0} (-1)^{|γ|} q_{∅,l+1}(γ ⊗ ζ)
//! ```
//!
//! and on `l = 0` slices it reduces to `d p = (-1)^{n+1} p ∘ ∂` on cyclic chains.

pub mod axioms;
pub mod toy;

use crate::ainfty::{
    check_deformation_input, AInfty, AinftyError, CheckLine, InteriorAlgebra, QFamily, ResidualReport, Witness,
};
use crate::complexes::{hoch_diff, t_tuple, Complex, ComplexError, Variant};
use crate::family::{twist_odd, Evaluator, FnFamily, Multilinear, SparseFamily};
use crate::graded::{Element, Gen, GradedModule, Parity, Tuple, Word};
use crate::homology::{homology_with, HomologyError, HomologyOptions, Truncation};
use crate::linalg::{Echelon, SparseVec};
use crate::scalars::{Cap, Monomial, Q, Ring, Scalar};
use crate::signs::{rotate, shuffle_sign, SignError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpenClosedError {
    #[error(transparent)]
    Ainfty(#[from] AinftyError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Sign(#[from] SignError),
    #[error("instance has no sphere terms (needed for k = 0)")]
    MissingSphere,
    #[error("reduced variants need zeta")]
    MissingZeta,
    #[error("zeta has no generator with a constant coefficient")]
    ZetaPivot,
    #[error("no primitive eta with d eta = -zeta")]
    NoEta,
    #[error("d eta + zeta = {0}, expected 0")]
    EtaPrimitive(String),
    #[error("family is not cyclically symmetric: {0}")]
    NotCyclic(String),
    #[error("structure equation fails at {input}: residual {value}")]
    Structure { input: String, value: String },
    #[error("invalid toy geometry: {0}")]
    Geometry(String),
    #[error("missing refinement data: {0}")]
    MissingRefinement(String),
}

/// Operators with no boundary inputs: `q_{∅,l}`, the class `ζ = i_* 1_L`
/// and an optional primitive `η`, `d η = -ζ`.
#[derive(Clone, Debug, Default)]
pub struct SphereTerms {
    pub ops: SparseFamily,
    pub zeta: Element,
    pub eta: Option<Element>,
}

/// The data of an open-closed instance. `q.interior` is the target complex;
/// interior inputs of both `q` and `p` live in the same module.
#[derive(Clone, Debug)]
pub struct OCInstance {
    pub name: String,
    pub n: i64,
    pub q: QFamily,
    pub p: SparseFamily,
    pub sphere: Option<SphereTerms>,
}

impl OCInstance {
    pub fn ring(&self) -> &Ring {
        &self.q.ring
    }

    pub fn boundary(&self) -> &GradedModule {
        &self.q.module
    }

    pub fn target(&self) -> &InteriorAlgebra {
        &self.q.interior
    }

    pub fn algebra(&self) -> AInfty {
        self.q.ainfty(&self.name)
    }

    pub fn zeta(&self) -> Option<&Element> {
        self.sphere.as_ref().map(|s| &s.zeta)
    }

    fn p_eval<'a>(&'a self, cap: &'a Cap) -> Evaluator<'a> {
        Evaluator {
            ring: &self.q.ring,
            cap,
            boundary: &self.q.module,
            interior: &self.q.interior.module,
            parity: Parity::of(self.n + 1),
        }
    }

    fn singles(&self, gens: &[Gen]) -> Vec<Element> {
        gens.iter().map(|&g| Element::single(g, self.ring().one())).collect()
    }
}

/// Kinds of terms on the right side of the structure equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermKind {
    /// `p(α; d(γ))`, counted as one term.
    DGamma,
    /// `p(q(α^σ_(1); γ_J) ⊗ α^σ_(2); γ_I)`.
    Composite { rotation: usize, inner_k: usize, inner: Vec<usize>, outer: Vec<usize> },
    /// The composite with `q_{1,0}` of class zero, listed separately when excluded.
    DOnAlpha { rotation: usize, inner: Vec<usize>, outer: Vec<usize> },
    /// `q_{∅,l+1}(γ ⊗ ζ)`.
    Sphere,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureTerm {
    #[serde(flatten)]
    pub kind: TermKind,
    pub text: String,
}

fn names(prefix: &str, idx: impl IntoIterator<Item = usize>) -> Vec<String> {
    idx.into_iter().map(|i| format!("{prefix}{}", i + 1)).collect()
}

/// Symbolic right side of the structure equation for `(k, l)`. With
/// `exclude_d`, composites whose inner operator is `q_{1,0}` are reported as
/// `DOnAlpha` terms; the number of terms is the same either way.
pub fn structure_terms(k: usize, l: usize, exclude_d: bool) -> Vec<StructureTerm> {
    let mut out = Vec::new();
    out.push(StructureTerm {
        kind: TermKind::DGamma,
        text: format!("p_{{{k},{l}}}(α; d(γ))"),
    });
    for shift in 0..k.max(1) {
        let order: Vec<usize> = (0..k).map(|j| (j + shift) % k.max(1)).collect();
        for k2 in 0..=k {
            for mask in 0..(1usize << l) {
                let inner: Vec<usize> = (0..l).filter(|j| mask >> j & 1 == 1).collect();
                let outer: Vec<usize> = (0..l).filter(|j| mask >> j & 1 == 0).collect();
                let q_args = format!(
                    "q_{{{k2},{}}}({}; {})",
                    inner.len(),
                    names("α", order[..k2].iter().copied()).join(" ⊗ "),
                    names("γ", inner.iter().copied()).join(", ")
                );
                let mut p_args = vec![q_args];
                p_args.extend(names("α", order[k2..].iter().copied()));
                let text = format!(
                    "(-1)^{{s1_σ{shift}(α) + |γ| + s(γ_I,γ_J) + (n+1)(|γ_J|+1)}} p_{{{},{}}}({}; {})",
                    k - k2 + 1,
                    outer.len(),
                    p_args.join(" ⊗ "),
                    names("γ", outer.iter().copied()).join(", ")
                );
                let kind = if exclude_d && k2 == 1 && inner.is_empty() {
                    TermKind::DOnAlpha { rotation: shift, inner, outer }
                } else {
                    TermKind::Composite { rotation: shift, inner_k: k2, inner, outer }
                };
                out.push(StructureTerm { kind, text });
            }
        }
    }
    if k == 0 {
        out.push(StructureTerm {
            kind: TermKind::Sphere,
            text: format!("(-1)^{{|γ|}} q_{{∅,{}}}(γ ⊗ ζ)", l + 1),
        });
    }
    out
}

/// `d_T p(α; γ)` on pure inputs.
pub fn structure_lhs(inst: &OCInstance, alpha: &[Gen], gamma: &[Gen], cap: &Cap) -> Element {
    let v = inst.p.eval(alpha, gamma);
    inst.target().differential.apply(inst.ring(), &v, cap)
}

/// Right side of the structure equation on pure inputs.
pub fn structure_rhs(
    inst: &OCInstance,
    alpha: &[Gen],
    gamma: &[Gen],
    cap: &Cap,
) -> Result<Element, OpenClosedError> {
    let ring = inst.ring();
    let x = &inst.target().module;
    let ev = inst.p_eval(cap);
    let (k, l) = (alpha.len(), gamma.len());
    let sa = inst.singles(alpha);
    let sg = inst.singles(gamma);
    let gdeg: Vec<i64> = gamma.iter().map(|&g| x.degree(g)).collect();
    let gtotal: i64 = gdeg.iter().sum();
    let mut out = Element::zero();

    let a_refs: Vec<&Element> = sa.iter().collect();
    let mut before = 0;
    for j in 0..l {
        let dg = inst.target().differential.apply(ring, &sg[j], cap);
        if !dg.is_zero() {
            let mut interior: Vec<&Element> = sg.iter().collect();
            interior[j] = &dg;
            out.add_assign(&ev.apply(&inst.p, &a_refs, &interior).signed(Parity::of(before)));
        }
        before += gdeg[j];
    }

    let adeg: Vec<i64> = alpha.iter().map(|&g| inst.boundary().degree(g)).collect();
    for shift in 0..k.max(1) {
        let (rot, s1) = if k == 0 {
            (Vec::new(), Parity::EVEN)
        } else {
            let (r, _, s1) = rotate(alpha, &adeg, shift)?;
            (r, s1)
        };
        for k2 in 0..=k {
            for mask in 0..(1usize << l) {
                let jset: Vec<usize> = (0..l).filter(|j| mask >> j & 1 == 1).collect();
                let iset: Vec<usize> = (0..l).filter(|j| mask >> j & 1 == 0).collect();
                let inner_int: Vec<Gen> = jset.iter().map(|&j| gamma[j]).collect();
                let inner = inst.q.ops.eval(&rot[..k2], &inner_int);
                if inner.is_zero() {
                    continue;
                }
                let gj: i64 = jset.iter().map(|&j| gdeg[j]).sum();
                let sign = s1
                    + Parity::of(gtotal)
                    + shuffle_sign(&gdeg, &iset, &jset)?
                    + Parity::of((inst.n + 1) * (gj + 1));
                let rest = inst.singles(&rot[k2..]);
                let mut bnd: Vec<&Element> = vec![&inner];
                bnd.extend(rest.iter());
                let interior: Vec<&Element> = iset.iter().map(|&i| &sg[i]).collect();
                out.add_assign(&ev.apply(&inst.p, &bnd, &interior).signed(sign));
            }
        }
    }

    if k == 0 {
        let sphere = inst.sphere.as_ref().ok_or(OpenClosedError::MissingSphere)?;
        let mut interior: Vec<&Element> = sg.iter().collect();
        interior.push(&sphere.zeta);
        let v = ev.apply(&sphere.ops, &[], &interior);
        out.add_assign(&v.signed(Parity::of(gtotal)));
    }
    Ok(out)
}

fn all_tuples(module: &GradedModule, max_len: usize, min_len: usize) -> Vec<Tuple> {
    (min_len..=max_len).flat_map(|k| module.tuples_of_length(k)).collect()
}

/// Residual of the structure equation over all boundary tuples of weight at
/// most `cap.weight` and interior tuples of length at most `max_l`.
pub fn structure_residual(inst: &OCInstance, cap: &Cap, max_l: usize) -> Result<ResidualReport, OpenClosedError> {
    let alphas = all_tuples(inst.boundary(), cap.weight, 0);
    let gammas = all_tuples(&inst.target().module, max_l, 0);
    let results: Vec<Result<Vec<Witness>, OpenClosedError>> = alphas
        .par_iter()
        .map(|alpha| {
            let mut bad = Vec::new();
            for gamma in &gammas {
                let mut r = structure_lhs(inst, alpha, gamma, cap);
                r.sub_assign(&structure_rhs(inst, alpha, gamma, cap)?);
                if !r.is_zero() {
                    bad.push(Witness {
                        input: format!(
                            "{}; {}",
                            inst.boundary().fmt_tuple(alpha),
                            inst.target().module.fmt_tuple(gamma)
                        ),
                        value: r.display(&inst.target().module),
                    });
                }
            }
            Ok(bad)
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(ResidualReport::new(alphas.len() * gammas.len(), failures))
}

fn factorial(n: usize) -> Q {
    (1..=n as i128).fold(Q::one(), |a, b| a * Q::int(b))
}

/// Weak compositions of `s` into `k` parts.
fn compositions(s: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if s == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=s {
        for mut rest in compositions(s - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `Σ_l 1/l! f(α; η ⊗ γ^l)` for a boundary list of elements.
pub fn deform_interior(
    ev: &Evaluator,
    f: &dyn Multilinear,
    boundary: &[&Element],
    eta: &[&Element],
    gamma: &Element,
) -> Element {
    let tmax = if gamma.is_zero() { 0 } else { f.max_interior().saturating_sub(eta.len()) };
    let mut out = Element::zero();
    for t in 0..=tmax {
        let mut interior: Vec<&Element> = eta.to_vec();
        interior.extend(std::iter::repeat_n(gamma, t));
        let v = ev.apply(f, boundary, &interior);
        out.add_assign(&v.scale(ev.ring, &ev.ring.constant(factorial(t).recip()), ev.cap));
    }
    out
}

/// `p^{b,γ}_{k,l}(α; η)` on pure inputs. The `b` insertions sit before each
/// `α_j`; for `k = 0` there are none.
pub fn deformed_p_value(
    inst: &OCInstance,
    b: &Element,
    gamma: &Element,
    alpha: &[Gen],
    eta: &[Gen],
    cap: &Cap,
) -> Element {
    let ring = inst.ring();
    let ev = inst.p_eval(cap);
    let k = alpha.len();
    let sa = inst.singles(alpha);
    let se = inst.singles(eta);
    let eta_refs: Vec<&Element> = se.iter().collect();
    let smax = if b.is_zero() || k == 0 { 0 } else { inst.p.max_boundary().saturating_sub(k) };
    let mut out = Element::zero();
    for s in 0..=smax {
        for comp in compositions(s, k) {
            let mut bnd: Vec<&Element> = Vec::with_capacity(k + s);
            for (j, &i) in comp.iter().enumerate() {
                bnd.extend(std::iter::repeat_n(b, i));
                bnd.push(&sa[j]);
            }
            out.add_assign(&deform_interior(&ev, &inst.p, &bnd, &eta_refs, gamma));
        }
    }
    out.truncate(ring, cap)
}

fn check_parameters(inst: &OCInstance, b: &Element, gamma: &Element, cap: &Cap) -> Result<(), OpenClosedError> {
    check_deformation_input(inst.ring(), inst.boundary(), b, 1, "b")?;
    check_deformation_input(inst.ring(), &inst.target().module, gamma, 2, "gamma")?;
    if !inst.target().differential.apply(inst.ring(), gamma, cap).is_zero() {
        return Err(AinftyError::Deformation("gamma must be closed".into()).into());
    }
    Ok(())
}

/// The `l = 0` slice of `p^{b,γ}` on all boundary tuples of weight at most `cap.weight`.
pub fn deformed_p(inst: &OCInstance, b: &Element, gamma: &Element, cap: &Cap) -> Result<SparseFamily, OpenClosedError> {
    check_parameters(inst, b, gamma, cap)?;
    let mut out = SparseFamily::new();
    for alpha in all_tuples(inst.boundary(), cap.weight, 0) {
        let v = deformed_p_value(inst, b, gamma, &alpha, &[], cap);
        out.add(&alpha, &[], &v);
    }
    Ok(out)
}

/// `q^γ_{∅,1}(x) = Σ_l 1/l! q_{∅,l+1}(x, γ^l)`.
pub fn sphere_deformed(inst: &OCInstance, gamma: &Element, x: &Element, cap: &Cap) -> Result<Element, OpenClosedError> {
    let sphere = inst.sphere.as_ref().ok_or(OpenClosedError::MissingSphere)?;
    let ev = inst.p_eval(cap);
    Ok(deform_interior(&ev, &sphere.ops, &[], &[x], gamma))
}

/// The extended map: `p^{b,γ}` on nonempty tuples and
/// `P(1) = p^{b,γ}_0(1) + q^γ_{∅,1}(η)` on the empty tuple.
pub fn extended_p(
    inst: &OCInstance,
    b: &Element,
    gamma: &Element,
    eta: &Element,
    cap: &Cap,
) -> Result<SparseFamily, OpenClosedError> {
    let sphere = inst.sphere.as_ref().ok_or(OpenClosedError::MissingSphere)?;
    let mut de = inst.target().differential.apply(inst.ring(), eta, cap);
    de.add_assign(&sphere.zeta);
    if !de.is_zero() {
        return Err(OpenClosedError::EtaPrimitive(de.display(&inst.target().module)));
    }
    let mut fam = deformed_p(inst, b, gamma, cap)?;
    fam.add(&[], &[], &sphere_deformed(inst, gamma, eta, cap)?);
    Ok(fam)
}

/// Checks that `q^γ_{∅,1}` commutes with `d_T` on every generator of `T`.
pub fn sphere_chain_map_check(inst: &OCInstance, gamma: &Element, cap: &Cap) -> Result<CheckLine, OpenClosedError> {
    let ring = inst.ring();
    let t = inst.target();
    let mut bad = Vec::new();
    for g in t.module.gens() {
        let x = Element::single(g, ring.one());
        let lhs = t.differential.apply(ring, &sphere_deformed(inst, gamma, &x, cap)?, cap);
        let rhs = sphere_deformed(inst, gamma, &t.differential.apply(ring, &x, cap), cap)?;
        if lhs != rhs {
            bad.push(t.module.name(g).to_string());
        }
    }
    Ok(CheckLine::new(
        "sphere operator is a chain map",
        bad.is_empty(),
        if bad.is_empty() { format!("{} generators", t.module.len()) } else { format!("fails on {}", bad.join(", ")) },
    ))
}

/// `P(w) = Σ twist(c, n+1) c P(t)` on a word with boundary inputs only.
pub fn apply_p(ring: &Ring, p: &dyn Multilinear, n: i64, w: &Word, cap: &Cap) -> Element {
    let mut out = Element::zero();
    for (t, c) in w.iter() {
        let v = p.eval(t, &[]);
        if !v.is_zero() {
            out.add_assign(&v.scale(ring, &twist_odd(ring, c, Parity::of(n + 1)), cap));
        }
    }
    out
}

/// Reduction modulo the submodule generated by `ζ`, through a generator
/// whose coefficient in `ζ` is a nonzero constant.
#[derive(Clone, Debug)]
pub struct ZetaQuotient {
    pivot: Gen,
    inv: Q,
    zeta: Element,
}

impl ZetaQuotient {
    pub fn new(zeta: &Element) -> Result<ZetaQuotient, OpenClosedError> {
        for (g, s) in zeta.iter() {
            if let Some(c) = s.as_constant() {
                if !c.is_zero() {
                    return Ok(ZetaQuotient { pivot: g, inv: c.recip(), zeta: zeta.clone() });
                }
            }
        }
        Err(OpenClosedError::ZetaPivot)
    }

    pub fn reduce(&self, ring: &Ring, x: &Element, cap: &Cap) -> Element {
        let s = x.coeff(self.pivot);
        if s.is_zero() {
            return x.clone();
        }
        let mut out = x.clone();
        out.sub_assign(&self.zeta.scale(ring, &s.scale(self.inv), cap));
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainMapReport {
    pub variant: Variant,
    /// Exponent `e` in `d P = (-1)^e P ∂`, as a parity.
    pub sign: String,
    pub residual: ResidualReport,
    pub descent: Vec<CheckLine>,
}

impl ChainMapReport {
    pub fn passed(&self) -> bool {
        self.residual.passed() && self.descent.iter().all(|c| c.passed)
    }
}

/// Checks the `l = 0` structure equation `d p(α) = (-1)^{n+1} Σ_σ Σ_r (-1)^{s1} p(μ(α^σ[..r]) ⊗ α^σ[r..])`
/// for `1 <= k <= cap.weight`.
pub fn boundary_structure_residual(
    a: &AInfty,
    p: &dyn Multilinear,
    target: &InteriorAlgebra,
    n: i64,
    cap: &Cap,
) -> Result<ResidualReport, OpenClosedError> {
    let tuples = all_tuples(&a.module, cap.weight, 1);
    let failures: Result<Vec<Option<Witness>>, OpenClosedError> = tuples
        .par_iter()
        .map(|t| {
            let mut r = target.differential.apply(&a.ring, &p.eval(t, &[]), cap);
            let mut rhs = rewrite_tuple(a, p, n, t, cap)?;
            rhs = rhs.signed(Parity::of(n + 1));
            r.sub_assign(&rhs);
            Ok((!r.is_zero()).then(|| Witness {
                input: a.module.fmt_tuple(t),
                value: r.display(&target.module),
            }))
        })
        .collect();
    Ok(ResidualReport::new(tuples.len(), failures?.into_iter().flatten().collect()))
}

/// `d_T P(c) - (-1)^{n+1} P(∂c)` on the canonical basis chains of `variant`,
/// computed modulo `ζ` for the reduced variants.
pub fn chain_map_residual(
    a: &AInfty,
    p: &dyn Multilinear,
    target: &InteriorAlgebra,
    n: i64,
    variant: Variant,
    cap: &Cap,
    zeta: Option<&Element>,
) -> Result<ChainMapReport, OpenClosedError> {
    chain_map_residual_signed(a, p, target, n, variant, cap, zeta, Parity::of(n + 1))
}

/// [`chain_map_residual`] with an explicit sign in `d P = (-1)^sign P ∂`.
#[allow(clippy::too_many_arguments)]
pub fn chain_map_residual_signed(
    a: &AInfty,
    p: &dyn Multilinear,
    target: &InteriorAlgebra,
    n: i64,
    variant: Variant,
    cap: &Cap,
    zeta: Option<&Element>,
    sign: Parity,
) -> Result<ChainMapReport, OpenClosedError> {
    let pre = boundary_structure_residual(a, p, target, n, cap)?;
    if let Some(w) = pre.witnesses.first() {
        return Err(OpenClosedError::Structure { input: w.input.clone(), value: w.value.clone() });
    }
    let cx = Complex::new(a, variant)?;
    let ring = &*a.ring;
    let quotient = if variant.is_reduced() {
        Some(ZetaQuotient::new(zeta.ok_or(OpenClosedError::MissingZeta)?)?)
    } else {
        None
    };
    let reduce = |x: Element| match &quotient {
        Some(qz) => qz.reduce(ring, &x, cap),
        None => x,
    };
    let basis = cx.basis(cap.weight);
    let results: Result<Vec<Option<Witness>>, OpenClosedError> = basis
        .par_iter()
        .map(|t| {
            let c = Word::single(t.clone(), ring.one());
            let lhs = target.differential.apply(ring, &apply_p(ring, p, n, &c, cap), cap);
            let dc = cx.diff(&c, cap)?;
            let mut r = lhs;
            r.sub_assign(&apply_p(ring, p, n, &dc, cap).signed(sign));
            let r = reduce(r);
            Ok((!r.is_zero()).then(|| Witness {
                input: a.module.fmt_tuple(t),
                value: r.display(&target.module),
            }))
        })
        .collect();
    let residual = ResidualReport::new(basis.len(), results?.into_iter().flatten().collect());
    let descent = descent_checks(a, p, target, n, variant, cap, quotient.as_ref())?;
    Ok(ChainMapReport {
        variant,
        sign: if sign.is_odd() { "odd".into() } else { "even".into() },
        residual,
        descent,
    })
}

/// Checks that `p` descends to the quotient defining `variant`.
fn descent_checks(
    a: &AInfty,
    p: &dyn Multilinear,
    target: &InteriorAlgebra,
    n: i64,
    variant: Variant,
    cap: &Cap,
    quotient: Option<&ZetaQuotient>,
) -> Result<Vec<CheckLine>, OpenClosedError> {
    let ring = &*a.ring;
    let tuples = all_tuples(&a.module, cap.weight, 1);
    let mut out = Vec::new();
    if variant.is_cyclic() {
        let bad = tuples.iter().find(|t| {
            let (u, s) = t_tuple(&a.module, t);
            p.eval(t, &[]) != p.eval(&u, &[]).signed(s)
        });
        out.push(CheckLine::new(
            "P ∘ t = P",
            bad.is_none(),
            match bad {
                None => format!("{} tuples", tuples.len()),
                Some(t) => format!("fails on {}", a.module.fmt_tuple(t)),
            },
        ));
    }
    if let Some(e) = a.unit {
        if variant == Variant::NormalizedHochschild {
            let bad = tuples.iter().find(|t| t[1..].contains(&e) && !p.eval(t, &[]).is_zero());
            out.push(CheckLine::new(
                "P vanishes on degenerate chains",
                bad.is_none(),
                match bad {
                    None => "ok".into(),
                    Some(t) => format!("P({}) != 0", a.module.fmt_tuple(t)),
                },
            ));
        }
        if let Some(qz) = quotient {
            let bad = tuples
                .iter()
                .find(|t| t.contains(&e) && !qz.reduce(ring, &p.eval(t, &[]), cap).is_zero());
            out.push(CheckLine::new(
                "P vanishes mod zeta on chains containing the unit",
                bad.is_none(),
                match bad {
                    None => "ok".into(),
                    Some(t) => format!("P({}) not in <zeta>", a.module.fmt_tuple(t)),
                },
            ));
            let pe = apply_p(ring, p, n, &Word::single(Tuple::from_slice(&[e]), ring.one()), cap);
            out.push(CheckLine::new(
                "unit chain",
                qz.reduce(ring, &pe, cap).is_zero(),
                format!("P({}) = {}", a.module.name(e), pe.display(&target.module)),
            ));
        }
    }
    Ok(out)
}

/// `Σ_σ Σ_{r=0..k} (-1)^{s1_σ} P(μ(α^σ[..r]) ⊗ α^σ[r..])` on a pure tuple.
fn rewrite_tuple(a: &AInfty, p: &dyn Multilinear, n: i64, t: &[Gen], cap: &Cap) -> Result<Element, OpenClosedError> {
    let ring = &*a.ring;
    let ev = Evaluator {
        ring,
        cap,
        boundary: &a.module,
        interior: &a.module,
        parity: Parity::of(n + 1),
    };
    let k = t.len();
    let deg: Vec<i64> = t.iter().map(|&g| a.module.degree(g)).collect();
    let mut out = Element::zero();
    for shift in 0..k {
        let (rot, _, s1) = rotate(t, &deg, shift)?;
        for r in 0..=k {
            let Some(m) = a.mu(&rot[..r]) else { continue };
            let rest: Vec<Element> = rot[r..].iter().map(|&g| Element::single(g, ring.one())).collect();
            let mut bnd: Vec<&Element> = vec![m];
            bnd.extend(rest.iter());
            out.add_assign(&ev.apply(p, &bnd, &[]).signed(s1));
        }
    }
    Ok(out)
}

/// `P(∂w) - Σ_σ Σ_r (-1)^{s1_σ} P(μ(w^σ[..r]) ⊗ w^σ[r..])` on a Hochschild
/// word of positive weight, for any family `P`.
pub fn theorem1_rewrite_residual(
    a: &AInfty,
    p: &dyn Multilinear,
    n: i64,
    w: &Word,
    cap: &Cap,
) -> Result<Element, OpenClosedError> {
    let ring = &*a.ring;
    let mut out = apply_p(ring, p, n, &hoch_diff(a, w, cap), cap);
    for (t, c) in w.iter() {
        if t.is_empty() {
            continue;
        }
        let v = rewrite_tuple(a, p, n, t, cap)?;
        let c = twist_odd(ring, c, Parity::of(n));
        out.sub_assign(&v.scale(ring, &c, cap));
    }
    Ok(out)
}

/// Checks `P(t) = (-1)^{s1} P(t rotated by one)` on the given tuples.
pub fn cyclic_symmetry_check(module: &GradedModule, p: &dyn Multilinear, tuples: &[Tuple]) -> Result<(), OpenClosedError> {
    for t in tuples {
        if t.len() < 2 {
            continue;
        }
        let deg: Vec<i64> = t.iter().map(|&g| module.degree(g)).collect();
        let (rot, _, s1) = rotate(t, &deg, 1)?;
        if p.eval(t, &[]) != p.eval(&rot, &[]).signed(s1) {
            return Err(OpenClosedError::NotCyclic(module.fmt_tuple(t)));
        }
    }
    Ok(())
}

/// The Theorem-1 rewrite over a list of words, after checking cyclic symmetry
/// of `P` on every tuple where it is evaluated.
pub fn theorem1_rewrite_check(
    a: &AInfty,
    p: &dyn Multilinear,
    n: i64,
    words: &[Word],
    cap: &Cap,
) -> Result<ResidualReport, OpenClosedError> {
    let mut seen: Vec<Tuple> = Vec::new();
    for w in words {
        seen.extend(w.iter().map(|(t, _)| t.clone()));
        seen.extend(hoch_diff(a, w, cap).iter().map(|(t, _)| t.clone()));
    }
    seen.sort();
    seen.dedup();
    cyclic_symmetry_check(&a.module, p, &seen)?;
    let results: Result<Vec<Option<Witness>>, OpenClosedError> = words
        .par_iter()
        .map(|w| {
            let r = theorem1_rewrite_residual(a, p, n, w, cap)?;
            Ok((!r.is_zero()).then(|| Witness { input: w.display(&a.module), value: format!("{r:?}") }))
        })
        .collect();
    Ok(ResidualReport::new(words.len(), results?.into_iter().flatten().collect()))
}

/// A pseudo-random family on boundary tuples: `raw(t)` is a small integer
/// times a target generator, drawn from a stream keyed by `(seed, t)`. With
/// `symmetric`, the family is `P(t) = Σ_σ (-1)^{s1_σ(t)} raw(t^σ)`, which is
/// cyclically symmetric.
pub fn random_family(
    seed: u64,
    boundary: std::sync::Arc<GradedModule>,
    ring: std::sync::Arc<Ring>,
    target_len: usize,
    max_k: usize,
    symmetric: bool,
) -> impl Multilinear {
    let base = boundary.len() as u64 + 1;
    let raw = move |t: &[Gen]| -> Element {
        let key = t.iter().fold(t.len() as u64, |acc, &g| acc.wrapping_mul(base).wrapping_add(g as u64 + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(key);
        let c: i128 = rng.gen_range(-3..=3);
        let g = rng.gen_range(0..target_len) as Gen;
        if c == 0 {
            Element::zero()
        } else {
            Element::single(g, ring.int(c))
        }
    };
    let module = boundary.clone();
    FnFamily {
        f: move |t: &[Gen], int: &[Gen]| -> Element {
            if !int.is_empty() || t.is_empty() {
                return Element::zero();
            }
            if !symmetric {
                return raw(t);
            }
            let deg: Vec<i64> = t.iter().map(|&g| module.degree(g)).collect();
            let mut out = Element::zero();
            for shift in 0..t.len() {
                let (rot, _, s1) = rotate(t, &deg, shift).expect("valid rotation");
                out.add_assign(&raw(&rot).signed(s1));
            }
            out
        },
        max_k,
        max_l: 0,
    }
}

/// Whether `x` lies in `d_T(T)`: candidate preimages are generators times the
/// monomials `m / m'` where `m` occurs in `x` and `m'` in an image of `d_T`.
pub fn is_exact(ring: &Ring, target: &InteriorAlgebra, x: &Element, cap: &Cap) -> bool {
    if x.is_zero() {
        return true;
    }
    let mut d_monos: Vec<Monomial> = Vec::new();
    for (_, img) in target.differential.sorted_images() {
        for (_, s) in img.iter() {
            d_monos.extend(s.terms().map(|(m, _)| m.clone()));
        }
    }
    d_monos.sort();
    d_monos.dedup();
    let mut quotients: Vec<Monomial> = Vec::new();
    for (_, s) in x.iter() {
        for (m, _) in s.terms() {
            for dm in &d_monos {
                if let Some(qm) = divide(ring, m, dm) {
                    quotients.push(qm);
                }
            }
        }
    }
    quotients.sort();
    quotients.dedup();
    let mut index: HashMap<(Gen, Monomial), usize> = HashMap::new();
    let mut coords = |e: &Element| -> Vec<(usize, Q)> {
        let mut v = Vec::new();
        for (g, s) in e.iter() {
            for (m, c) in s.terms() {
                let next = index.len();
                let i = *index.entry((g, m.clone())).or_insert(next);
                v.push((i, c));
            }
        }
        v
    };
    let mut ech = Echelon::new(false);
    for g in target.module.gens() {
        for qm in &quotients {
            let pre = Element::single(g, Scalar::from_term(qm.clone(), Q::one()));
            let img = target.differential.apply(ring, &pre, cap);
            ech.insert(SparseVec::from_rationals(&coords(&img)));
        }
    }
    ech.contains(&SparseVec::from_rationals(&coords(x)))
}

fn divide(ring: &Ring, m: &Monomial, d: &Monomial) -> Option<Monomial> {
    let mut q = m.clone();
    for (a, b) in q.beta.iter_mut().zip(&d.beta) {
        *a -= b;
    }
    for (a, b) in q.exps.iter_mut().zip(&d.exps) {
        *a = a.checked_sub(*b)?;
    }
    (ring.check_monomial(&q).is_ok() && ring.monomial_valuation(&q) >= Q::zero()).then_some(q)
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaReport {
    pub checks: Vec<CheckLine>,
}

impl EtaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Compares the extended maps built from two primitives of `-ζ`: both must be
/// chain maps on the extended cyclic complex, and their difference must be
/// exact in `T` on the empty chain and on every homology representative.
pub fn eta_independence(
    inst: &OCInstance,
    gamma: &Element,
    eta1: &Element,
    eta2: &Element,
    trunc: &Truncation,
) -> Result<EtaReport, OpenClosedError> {
    let cap = &trunc.cap;
    let ring = inst.ring();
    let a = inst.algebra();
    let zero = Element::zero();
    let p1 = extended_p(inst, &zero, gamma, eta1, cap)?;
    let p2 = extended_p(inst, &zero, gamma, eta2, cap)?;
    let mut checks = Vec::new();
    for (name, p) in [("eta", &p1), ("eta'", &p2)] {
        let r = chain_map_residual(&a, p, inst.target(), inst.n, Variant::ExtendedConnes, cap, inst.zeta())?;
        checks.push(CheckLine::new(
            &format!("chain map with {name}"),
            r.passed(),
            format!("{} chains, {} failures", r.residual.checked, r.residual.failures),
        ));
    }
    let diff = |w: &Word| {
        let mut d = apply_p(ring, &p2, inst.n, w, cap);
        d.sub_assign(&apply_p(ring, &p1, inst.n, w, cap));
        d
    };
    let empty = diff(&Word::single(Tuple::new(), ring.one()));
    checks.push(CheckLine::new(
        "P'(1) - P(1) is exact",
        is_exact(ring, inst.target(), &empty, cap),
        empty.display(&inst.target().module),
    ));
    let report = homology_with(
        &a,
        Variant::ExtendedConnes,
        trunc,
        &HomologyOptions { representatives: true, levels: false },
    )?;
    let mut reps = 0;
    let mut bad = Vec::new();
    for (deg, cycles) in &report.cycles {
        for c in cycles {
            reps += 1;
            let d = diff(c);
            if !is_exact(ring, inst.target(), &d, cap) {
                bad.push(format!("degree {deg}: {}", d.display(&inst.target().module)));
            }
        }
    }
    checks.push(CheckLine::new(
        "P' - P exact on homology representatives",
        bad.is_empty(),
        if bad.is_empty() { format!("{reps} representatives") } else { bad.join("; ") },
    ));
    Ok(EtaReport { checks })
}
