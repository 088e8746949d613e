//! Property checks for an open-closed family: linearity signs, cyclic and
//! interior symmetry, degree, unit, energy zero, top degree, fundamental
//! class and divisor.

use super::toy::{ToyGeometry, ONE, X, Y};
use super::{deform_interior, OCInstance, OpenClosedError};
use crate::ainfty::CheckLine;
use crate::family::{Evaluator, LinearMap, Multilinear, SparseFamily};
use crate::graded::{Element, Gen, GradedModule, Parity, Tuple};
use crate::scalars::{Cap, FormalVarSpec, PiGroup, Q, Ring, Scalar};
use crate::signs::{permutation_sign, rotate};
use serde::Serialize;
use std::sync::Arc;

/// Class-refined data for the fundamental class and divisor checks: the
/// bulk parameter is `γ = t0 1_X + t1 h`.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub t0: usize,
    pub t1: usize,
    pub h: Gen,
    /// `∫_β h` for each class `β` that occurs.
    pub pairing: Vec<(Vec<i32>, Q)>,
}

pub struct AxiomInput<'a> {
    pub ring: &'a Ring,
    pub n: i64,
    pub boundary: &'a GradedModule,
    pub interior: &'a GradedModule,
    pub p: &'a dyn Multilinear,
    pub unit: Option<Gen>,
    pub one_x: Option<Gen>,
    pub zeta: Option<&'a Element>,
    pub push: Option<&'a LinearMap>,
    pub refinement: Option<&'a Refinement>,
    /// Boundary tuples up to `cap.weight`, interior tuples up to `max_l`.
    pub cap: Cap,
    pub max_l: usize,
}

impl<'a> AxiomInput<'a> {
    pub fn from_instance(inst: &'a OCInstance, cap: Cap, max_l: usize) -> AxiomInput<'a> {
        AxiomInput {
            ring: inst.ring(),
            n: inst.n,
            boundary: inst.boundary(),
            interior: &inst.target().module,
            p: &inst.p,
            unit: inst.q.unit,
            one_x: inst.target().one,
            zeta: inst.zeta(),
            push: None,
            refinement: None,
            cap,
            max_l,
        }
    }

    fn ev(&self) -> Evaluator<'_> {
        Evaluator {
            ring: self.ring,
            cap: &self.cap,
            boundary: self.boundary,
            interior: self.interior,
            parity: Parity::of(self.n + 1),
        }
    }

    fn alphas(&self, min: usize) -> Vec<Tuple> {
        (min..=self.cap.weight).flat_map(|k| self.boundary.tuples_of_length(k)).collect()
    }

    fn gammas(&self, max: usize) -> Vec<Tuple> {
        (0..=max).flat_map(|l| self.interior.tuples_of_length(l)).collect()
    }

    fn single(&self, g: Gen) -> Element {
        Element::single(g, self.ring.one())
    }

    fn fmt(&self, a: &[Gen], g: &[Gen]) -> String {
        format!("{}; {}", self.boundary.fmt_tuple(a), self.interior.fmt_tuple(g))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<CheckLine>,
    pub skipped: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn line(name: &str, checked: usize, bad: Option<String>) -> CheckLine {
    match bad {
        None => CheckLine::new(name, true, format!("{checked} cases")),
        Some(b) => CheckLine::new(name, false, b),
    }
}

/// Runs every check the input supports.
pub fn axiom_suite(input: &AxiomInput) -> Result<AxiomReport, OpenClosedError> {
    let mut checks = vec![
        linearity(input)?,
        cyclic_symmetry(input)?,
        interior_symmetry(input),
        degree_law(input)?,
        top_degree(input),
    ];
    let mut skipped = Vec::new();
    match unit_law(input) {
        Ok(mut c) => checks.append(&mut c),
        Err(e) => skipped.push(format!("unit: {e}")),
    }
    match energy_zero(input) {
        Ok(c) => checks.push(c),
        Err(e) => skipped.push(format!("energy zero: {e}")),
    }
    match fundamental_class(input) {
        Ok(mut c) => checks.append(&mut c),
        Err(e) => skipped.push(format!("fundamental class: {e}")),
    }
    match divisor(input) {
        Ok(mut c) => checks.append(&mut c),
        Err(e) => skipped.push(format!("divisor: {e}")),
    }
    Ok(AxiomReport { checks, skipped })
}

fn test_scalars(input: &AxiomInput) -> Result<Vec<Scalar>, OpenClosedError> {
    let ring = input.ring;
    let mut out = vec![ring.int(3)];
    for i in 0..ring.nvars() {
        out.push(ring.var(i).map_err(|e| OpenClosedError::Geometry(e.to_string()))?);
    }
    if ring.rank() > 0 {
        let mut beta = vec![0; ring.rank()];
        beta[0] = 1;
        if let Ok(t) = ring.t_class(&beta) {
            out.push(t);
        }
    }
    Ok(out)
}

/// `p(.., a α_i, ..) = (-1)^{|a|(n+1+||α_{<i}||+|γ|)} a p` and
/// `p(..; .., a γ_j, ..) = (-1)^{|a||γ_{<j}|} a p`.
pub fn linearity(input: &AxiomInput) -> Result<CheckLine, OpenClosedError> {
    let ring = input.ring;
    let ev = input.ev();
    let scalars = test_scalars(input)?;
    let mut checked = 0;
    for alpha in input.alphas(0) {
        let sa: Vec<Element> = alpha.iter().map(|&g| input.single(g)).collect();
        for gamma in input.gammas(input.max_l.min(2)) {
            let sg: Vec<Element> = gamma.iter().map(|&g| input.single(g)).collect();
            let base = input.p.eval(&alpha, &gamma);
            let gdeg = input.interior.tuple_unshifted(&gamma);
            for a in &scalars {
                let da = ring.degree(a).map_err(|e| OpenClosedError::Geometry(e.to_string()))?;
                let expected = |flag: i64| base.scale(ring, a, &input.cap).signed(Parity::of(da * flag));
                for i in 0..alpha.len() {
                    let scaled = sa[i].scale(ring, a, &input.cap);
                    let mut bnd: Vec<&Element> = sa.iter().collect();
                    bnd[i] = &scaled;
                    let got = ev.apply(input.p, &bnd, &sg.iter().collect::<Vec<_>>());
                    let flag = input.n + 1 + input.boundary.tuple_degree(&alpha[..i]) + gdeg;
                    checked += 1;
                    if got != expected(flag) {
                        return Ok(line("linearity", checked, Some(format!("boundary slot {} at {}", i + 1, input.fmt(&alpha, &gamma)))));
                    }
                }
                for j in 0..gamma.len() {
                    let scaled = sg[j].scale(ring, a, &input.cap);
                    let mut int: Vec<&Element> = sg.iter().collect();
                    int[j] = &scaled;
                    let got = ev.apply(input.p, &sa.iter().collect::<Vec<_>>(), &int);
                    checked += 1;
                    if got != expected(input.interior.tuple_unshifted(&gamma[..j])) {
                        return Ok(line("linearity", checked, Some(format!("interior slot {} at {}", j + 1, input.fmt(&alpha, &gamma)))));
                    }
                }
            }
        }
    }
    Ok(line("linearity", checked, None))
}

/// `p(α; γ) = (-1)^{s1_σ(α)} p(α^σ; γ)` for every cyclic `σ`.
pub fn cyclic_symmetry(input: &AxiomInput) -> Result<CheckLine, OpenClosedError> {
    let mut checked = 0;
    for alpha in input.alphas(2) {
        let deg: Vec<i64> = alpha.iter().map(|&g| input.boundary.degree(g)).collect();
        for gamma in input.gammas(input.max_l.min(2)) {
            let base = input.p.eval(&alpha, &gamma);
            for shift in 1..alpha.len() {
                let (rot, _, s1) = rotate(&alpha, &deg, shift)?;
                checked += 1;
                if base != input.p.eval(&rot, &gamma).signed(s1) {
                    return Ok(line("cyclic symmetry", checked, Some(format!("shift {shift} at {}", input.fmt(&alpha, &gamma)))));
                }
            }
        }
    }
    Ok(line("cyclic symmetry", checked, None))
}

fn permutations(l: usize) -> Vec<Vec<usize>> {
    if l == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(l - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, l - 1);
            out.push(q);
        }
    }
    out
}

/// `p(α; γ) = (-1)^{s_σ(γ)} p(α; γ^σ)` for every permutation `σ`.
pub fn interior_symmetry(input: &AxiomInput) -> CheckLine {
    let mut checked = 0;
    for alpha in input.alphas(0) {
        for gamma in input.gammas(input.max_l.min(3)) {
            let deg: Vec<i64> = gamma.iter().map(|&g| input.interior.degree(g)).collect();
            let base = input.p.eval(&alpha, &gamma);
            for perm in permutations(gamma.len()) {
                let permuted: Vec<Gen> = perm.iter().map(|&i| gamma[i]).collect();
                checked += 1;
                if base != input.p.eval(&alpha, &permuted).signed(permutation_sign(&perm, &deg)) {
                    return line("interior symmetry", checked, Some(format!("{perm:?} at {}", input.fmt(&alpha, &gamma))));
                }
            }
        }
    }
    line("interior symmetry", checked, None)
}

/// With degree-2 interior inputs, `p_{k,l}` has degree `n + 1 - k`.
pub fn degree_law(input: &AxiomInput) -> Result<CheckLine, OpenClosedError> {
    let ring = input.ring;
    let twos: Vec<Gen> = input.interior.gens().filter(|&g| input.interior.degree(g) == 2).collect();
    let mut checked = 0;
    for alpha in input.alphas(0) {
        let want = input.boundary.tuple_unshifted(&alpha) + input.n + 1 - alpha.len() as i64;
        for l in 0..=input.max_l {
            for gamma in tuples_from(&twos, l) {
                let v = input.p.eval(&alpha, &gamma);
                checked += 1;
                for (g, s) in v.iter() {
                    for (m, _) in s.terms() {
                        let d = input.interior.degree(g) + ring.monomial_degree(m);
                        if d != want {
                            return Ok(line(
                                "degree",
                                checked,
                                Some(format!("{} has a term of degree {d}, expected {want}", input.fmt(&alpha, &gamma))),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(line("degree", checked, None))
}

fn tuples_from(gens: &[Gen], l: usize) -> Vec<Tuple> {
    let mut out = vec![Tuple::new()];
    for _ in 0..l {
        out = out
            .into_iter()
            .flat_map(|t| {
                gens.iter().map(move |&g| {
                    let mut u = t.clone();
                    u.push(g);
                    u
                })
            })
            .collect();
    }
    out
}

fn is_beta0(m: &crate::scalars::Monomial) -> bool {
    m.beta.iter().all(|&b| b == 0)
}

/// Outputs lie below degree `2n` in the target, except `p^{β0}_{1,0}`.
pub fn top_degree(input: &AxiomInput) -> CheckLine {
    let mut checked = 0;
    for alpha in input.alphas(0) {
        for gamma in input.gammas(input.max_l) {
            let v = input.p.eval(&alpha, &gamma);
            checked += 1;
            let exempt_kl = alpha.len() == 1 && gamma.is_empty();
            for (g, s) in v.iter() {
                if input.interior.degree(g) < 2 * input.n {
                    continue;
                }
                if s.terms().any(|(m, _)| !(exempt_kl && is_beta0(m))) {
                    return line("top degree", checked, Some(format!("{} reaches degree 2n", input.fmt(&alpha, &gamma))));
                }
            }
        }
    }
    line("top degree", checked, None)
}

/// `p(.., 1_L, ..) = 0` except `p_{1,0}(1_L) = (-1)^{n+1} ζ`.
pub fn unit_law(input: &AxiomInput) -> Result<Vec<CheckLine>, OpenClosedError> {
    let e = input.unit.ok_or_else(|| OpenClosedError::MissingRefinement("no unit".into()))?;
    let zeta = input.zeta.ok_or(OpenClosedError::MissingZeta)?;
    let mut checked = 0;
    let mut bad = None;
    'outer: for alpha in input.alphas(1) {
        if !alpha.contains(&e) {
            continue;
        }
        for gamma in input.gammas(input.max_l) {
            if alpha.len() == 1 && gamma.is_empty() {
                continue;
            }
            checked += 1;
            if !input.p.eval(&alpha, &gamma).is_zero() {
                bad = Some(format!("p({}) != 0", input.fmt(&alpha, &gamma)));
                break 'outer;
            }
        }
    }
    let got = input.p.eval(&[e], &[]);
    let want = zeta.clone().signed(Parity::of(input.n + 1));
    Ok(vec![
        line("unit: vanishing branch", checked, bad),
        CheckLine::new(
            "unit: p_{1,0}(1_L) = (-1)^{n+1} zeta",
            got == want,
            format!("p(1_L) = {}", got.display(input.interior)),
        ),
    ])
}

/// The class-zero part of `p` is `(-1)^{(n+1)||α||} i_* α` on `(1, 0)` and zero elsewhere.
pub fn energy_zero(input: &AxiomInput) -> Result<CheckLine, OpenClosedError> {
    let push = input.push.ok_or_else(|| OpenClosedError::MissingRefinement("no pushforward".into()))?;
    let mut checked = 0;
    for alpha in input.alphas(0) {
        for gamma in input.gammas(input.max_l) {
            let v = input.p.eval(&alpha, &gamma);
            let mut zero_part = Element::zero();
            for (g, s) in v.iter() {
                zero_part.add_term(g, &s.filter(is_beta0));
            }
            let want = if alpha.len() == 1 && gamma.is_empty() {
                push.image(alpha[0]).signed(Parity::of((input.n + 1) * input.boundary.shifted(alpha[0])))
            } else {
                Element::zero()
            };
            checked += 1;
            if zero_part != want {
                return Ok(line("energy zero", checked, Some(input.fmt(&alpha, &gamma))));
            }
        }
    }
    Ok(line("energy zero", checked, None))
}

fn refinement<'a>(input: &'a AxiomInput) -> Result<(&'a Refinement, Gen), OpenClosedError> {
    let r = input
        .refinement
        .ok_or_else(|| OpenClosedError::MissingRefinement("no class refinement or bulk variables".into()))?;
    let one_x = input.one_x.ok_or_else(|| OpenClosedError::MissingRefinement("no 1_X".into()))?;
    if r.t0.max(r.t1) >= input.ring.nvars() {
        return Err(OpenClosedError::MissingRefinement("bulk variable index out of range".into()));
    }
    Ok((r, one_x))
}

fn bulk(input: &AxiomInput, r: &Refinement, one_x: Gen) -> Result<Element, OpenClosedError> {
    let var = |i| input.ring.var(i).map_err(|e| OpenClosedError::Geometry(e.to_string()));
    let mut g = Element::single(one_x, var(r.t0)?);
    g.add_assign(&Element::single(r.h, var(r.t1)?));
    Ok(g)
}

fn deformed(input: &AxiomInput, alpha: &[Gen], gamma: &Element) -> Element {
    let sa: Vec<Element> = alpha.iter().map(|&g| input.single(g)).collect();
    deform_interior(&input.ev(), input.p, &sa.iter().collect::<Vec<_>>(), &[], gamma)
}

fn map_scalars(x: &Element, mut f: impl FnMut(&Scalar) -> Result<Scalar, OpenClosedError>) -> Result<Element, OpenClosedError> {
    let mut out = Element::zero();
    for (g, s) in x.iter() {
        out.add_term(g, &f(s)?);
    }
    Ok(out)
}

/// `p(α; 1_X, γ) = 0`, and `∂_{t0} p^γ = 0` for `γ = t0 1_X + t1 h`.
pub fn fundamental_class(input: &AxiomInput) -> Result<Vec<CheckLine>, OpenClosedError> {
    let one_x = input.one_x.ok_or_else(|| OpenClosedError::MissingRefinement("no 1_X".into()))?;
    let mut checked = 0;
    let mut bad = None;
    'outer: for alpha in input.alphas(0) {
        for gamma in input.gammas(input.max_l.saturating_sub(1)) {
            let mut g = vec![one_x];
            g.extend_from_slice(&gamma);
            checked += 1;
            if !input.p.eval(&alpha, &g).is_zero() {
                bad = Some(format!("p({}) != 0", input.fmt(&alpha, &g)));
                break 'outer;
            }
        }
    }
    let mut out = vec![line("fundamental class: p(α; 1_X, γ) = 0", checked, bad)];
    let (r, one_x) = refinement(input)?;
    let gamma = bulk(input, r, one_x)?;
    let mut bad = None;
    let alphas = input.alphas(0);
    for alpha in &alphas {
        let v = deformed(input, alpha, &gamma);
        let d = map_scalars(&v, |s| input.ring.partial(s, r.t0).map_err(|e| OpenClosedError::Geometry(e.to_string())))?;
        if !d.is_zero() {
            bad = Some(format!("∂_t0 p^γ({}) = {}", input.boundary.fmt_tuple(alpha), d.display(input.interior)));
            break;
        }
    }
    out.push(line("fundamental class: ∂_t0 p^γ = 0", alphas.len(), bad));
    Ok(out)
}

/// `p^β(α; h ⊗ γ) = (∫_β h) p^β(α; γ)`, and `∂_{t1} p^{γ,β} = (∫_β h) p^{γ,β}`
/// compared one step below the energy and variable caps, since `∂_{t1}`
/// lowers both.
pub fn divisor(input: &AxiomInput) -> Result<Vec<CheckLine>, OpenClosedError> {
    let (r, one_x) = refinement(input)?;
    let ring = input.ring;
    let part = |x: &Element, beta: &[i32]| {
        let mut out = Element::zero();
        for (g, s) in x.iter() {
            out.add_term(g, &s.filter(|m| m.beta.as_slice() == beta));
        }
        out
    };
    let mut checked = 0;
    let mut bad = None;
    'outer: for alpha in input.alphas(0) {
        for gamma in input.gammas(input.max_l.saturating_sub(1)) {
            let mut g = vec![r.h];
            g.extend_from_slice(&gamma);
            let with_h = input.p.eval(&alpha, &g);
            let without = input.p.eval(&alpha, &gamma);
            for (beta, a) in &r.pairing {
                checked += 1;
                if part(&with_h, beta) != part(&without, beta).scale(ring, &ring.constant(*a), &input.cap) {
                    bad = Some(format!("class {beta:?} at {}", input.fmt(&alpha, &g)));
                    break 'outer;
                }
            }
        }
    }
    let mut out = vec![line("divisor: p^β(α; h, γ) = (∫_β h) p^β(α; γ)", checked, bad)];
    let gamma = bulk(input, r, one_x)?;
    let lower = Cap::new(input.cap.energy - Q::one(), input.cap.weight, input.cap.var_total.saturating_sub(1));
    let mut checked = 0;
    let mut bad = None;
    'outer2: for alpha in input.alphas(0) {
        let v = deformed(input, &alpha, &gamma);
        for (beta, a) in &r.pairing {
            let vb = part(&v, beta);
            let lhs = map_scalars(&vb, |s| ring.partial(s, r.t1).map_err(|e| OpenClosedError::Geometry(e.to_string())))?
                .truncate(ring, &lower);
            let rhs = vb.scale(ring, &ring.constant(*a), &lower);
            checked += 1;
            if lhs != rhs {
                bad = Some(format!("class {beta:?} at {}", input.boundary.fmt_tuple(&alpha)));
                break 'outer2;
            }
        }
    }
    out.push(line("divisor: ∂_t1 p^{γ,β} = (∫_β h) p^{γ,β}", checked, bad));
    Ok(out)
}

/// A class-graded family on the `n = 2` toy with bulk variables `t0` (degree 2),
/// `t1` (degree 0) and an odd variable `s` (degree 1):
/// `p^β_{k,l}(α; γ) = Π_j c_β(γ_j) f^β_k(α)` with `c_β(h) = β`, zero on other
/// interior generators, `f^0` classical and `f^β` for `β = 1, 2` supported on
/// `x`, `y` and `(x, y)`. With `corrupt`, the `l >= 1` terms carry an extra
/// factor `l + 1`, which breaks the divisor axiom.
pub struct SyntheticFamily {
    pub geometry: ToyGeometry,
    pub h: Gen,
    pub p: SparseFamily,
    pub refinement: Refinement,
    pub zeta: Element,
    pub cap: Cap,
    pub max_l: usize,
}

impl SyntheticFamily {
    pub fn input(&self) -> AxiomInput<'_> {
        let g = &self.geometry;
        AxiomInput {
            ring: &g.ring,
            n: g.n,
            boundary: &g.l,
            interior: &g.x,
            p: &self.p,
            unit: Some(ONE),
            one_x: Some(g.one_x),
            zeta: Some(&self.zeta),
            push: Some(&g.push),
            refinement: Some(&self.refinement),
            cap: self.cap.clone(),
            max_l: self.max_l,
        }
    }
}

pub fn synthetic_family(corrupt: bool) -> Result<SyntheticFamily, OpenClosedError> {
    let geo_err = |e: crate::scalars::ScalarError| OpenClosedError::Geometry(e.to_string());
    let ring = Arc::new(Ring::new(
        PiGroup::new(vec![Q::one()], vec![0]).map_err(geo_err)?,
        FormalVarSpec::new(vec![2, 0, 1]),
    ));
    let geom = ToyGeometry::standard(2, ring.clone(), &[("h", 2)])?;
    let h = geom.x.index("h").map_err(|e| OpenClosedError::Geometry(e.to_string()))?;
    let max_l = 3;
    let mut p = geom.classical_p();
    let deg: Vec<i64> = vec![geom.l.degree(X), geom.l.degree(Y)];
    let (_, _, s1) = rotate(&[X, Y], &deg, 1)?;
    for beta in 1..=2i32 {
        let t = ring.t_class(&[beta]).map_err(geo_err)?;
        for l in 0..=max_l {
            let mut factor = (0..l).fold(Q::one(), |acc, _| acc * Q::int(beta as i128));
            if corrupt && l >= 1 {
                factor = factor * Q::int(l as i128 + 1);
            }
            let c = t.scale(factor);
            let hs = vec![h; l];
            for g in [X, Y] {
                p.add(&[g], &hs, &Element::single(g, c.clone()));
            }
            let v = Element::single(X, c.clone());
            p.add(&[X, Y], &hs, &v);
            p.add(&[Y, X], &hs, &v.signed(s1));
        }
    }
    let zeta = geom.zeta();
    Ok(SyntheticFamily {
        zeta,
        geometry: geom,
        h,
        p,
        refinement: Refinement {
            t0: 0,
            t1: 1,
            h,
            pairing: vec![(vec![0], Q::zero()), (vec![1], Q::int(1)), (vec![2], Q::int(2))],
        },
        cap: Cap::new(Q::int(5), 2, 3),
        max_l,
    })
}

/// The zero-energy toy over a ring with bulk variables `t0`, `t1` and a
/// closed degree-2 class `h` in the target, with refinement data.
pub fn toy_axiom_family(n: i64) -> Result<(ToyGeometry, Refinement), OpenClosedError> {
    let ring = Arc::new(Ring::new(PiGroup::trivial(), FormalVarSpec::new(vec![2, 0])));
    let geom = ToyGeometry::standard(n, ring, &[("h", 2)])?;
    let h = geom.x.index("h").map_err(|e| OpenClosedError::Geometry(e.to_string()))?;
    Ok((geom, Refinement { t0: 0, t1: 1, h, pairing: vec![(vec![], Q::zero())] }))
}
