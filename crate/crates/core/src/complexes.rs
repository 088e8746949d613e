//! Hochschild-type chain complexes of a curved A-infinity algebra.
//!
//! Chains are words in the tensor coalgebra. The Hochschild differential on
//! `x ⊗ l` is
//!
//! ```text
//! (-1)^{||x||} x ⊗ mu-hat(l)
//!   + sum (-1)^{||l3|| (||x|| + ||l1|| + ||l2||)} mu(l3 ⊗ x ⊗ l1) ⊗ l2
//! ```
//!
//! The cyclic variants are quotients by the image of `1 - t`; their chains are
//! represented by canonical rotations. Normalized and reduced variants kill
//! words containing the unit.

use crate::ainfty::{AInfty, ResidualReport, Witness};
use crate::family::twist_odd;
use crate::graded::{Gen, GradedModule, Parity, Tuple, Word};
use crate::scalars::{Cap, Q, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("variant {0} needs a strict unit")]
    NoUnit(Variant),
    #[error("weight-0 chain in the non-extended variant {0}")]
    WeightZero(Variant),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
}

/// The six chain complexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Hochschild,
    NormalizedHochschild,
    Connes,
    ReducedConnes,
    ExtendedConnes,
    ExtendedReducedConnes,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Hochschild,
        Variant::NormalizedHochschild,
        Variant::Connes,
        Variant::ReducedConnes,
        Variant::ExtendedConnes,
        Variant::ExtendedReducedConnes,
    ];

    pub fn is_cyclic(self) -> bool {
        !matches!(self, Variant::Hochschild | Variant::NormalizedHochschild)
    }

    pub fn is_extended(self) -> bool {
        matches!(self, Variant::ExtendedConnes | Variant::ExtendedReducedConnes)
    }

    /// Words containing the unit anywhere are killed.
    pub fn is_reduced(self) -> bool {
        matches!(self, Variant::ReducedConnes | Variant::ExtendedReducedConnes)
    }

    pub fn needs_unit(self) -> bool {
        self.is_reduced() || self == Variant::NormalizedHochschild
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Hochschild => "hochschild",
            Variant::NormalizedHochschild => "normalized",
            Variant::Connes => "connes",
            Variant::ReducedConnes => "reduced-connes",
            Variant::ExtendedConnes => "extended-connes",
            Variant::ExtendedReducedConnes => "extended-reduced-connes",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ComplexError;
    fn from_str(s: &str) -> Result<Variant, ComplexError> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| ComplexError::UnknownVariant(s.to_string()))
    }
}

/// The cyclic operator on a pure tuple: `t(x_1..x_n) = (-1)^{||x_n|| (||x_1|| + ... + ||x_{n-1}||)} x_n x_1 .. x_{n-1}`.
pub fn t_tuple(module: &GradedModule, t: &[Gen]) -> (Tuple, Parity) {
    let k = t.len();
    if k <= 1 {
        return (Tuple::from_slice(t), Parity::EVEN);
    }
    let last = t[k - 1];
    let sign = module.shifted_parity(last) * module.tuple_parity(&t[..k - 1]);
    let mut out = Tuple::with_capacity(k);
    out.push(last);
    out.extend_from_slice(&t[..k - 1]);
    (out, sign)
}

/// `t` on words; the identity on weight 0 and 1.
pub fn t_op(module: &GradedModule, w: &Word) -> Word {
    w.iter()
        .map(|(t, s)| {
            let (u, p) = t_tuple(module, t);
            (u, s.clone().signed(p.is_odd()))
        })
        .collect()
}

/// `(1 - t) w`.
pub fn one_minus_t(module: &GradedModule, w: &Word) -> Word {
    let mut out = w.clone();
    out.sub_assign(&t_op(module, w));
    out
}

/// Canonical representative of the class of `t` modulo `im(1 - t)`:
/// the lexicographically least rotation with its sign, or `None` if the class is zero.
pub fn connes_canonical(module: &GradedModule, t: &[Gen]) -> Option<(Tuple, Parity)> {
    let k = t.len();
    if k <= 1 {
        return Some((Tuple::from_slice(t), Parity::EVEN));
    }
    // The class of w equals the class of t^j w.
    let mut cur = Tuple::from_slice(t);
    let mut sign = Parity::EVEN;
    let mut best = cur.clone();
    let mut best_sign = sign;
    let mut clash = false;
    for _ in 1..k {
        let (next, p) = t_tuple(module, &cur);
        cur = next;
        sign += p;
        match cur.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = cur.clone();
                best_sign = sign;
                clash = false;
            }
            std::cmp::Ordering::Equal => {
                if sign != best_sign {
                    clash = true;
                }
            }
            std::cmp::Ordering::Greater => {}
        }
    }
    // a tuple equal to its own rotation with the opposite sign is zero in the quotient
    if clash {
        return None;
    }
    Some((best, best_sign))
}

/// A chain complex of a given variant over an A-infinity algebra.
#[derive(Clone, Copy)]
pub struct Complex<'a> {
    pub algebra: &'a AInfty,
    pub variant: Variant,
}

impl<'a> Complex<'a> {
    pub fn new(algebra: &'a AInfty, variant: Variant) -> Result<Complex<'a>, ComplexError> {
        if variant.needs_unit() && algebra.unit.is_none() {
            return Err(ComplexError::NoUnit(variant));
        }
        Ok(Complex { algebra, variant })
    }

    fn module(&self) -> &GradedModule {
        &self.algebra.module
    }

    /// Image of a pure tuple in the canonical basis of this variant.
    pub fn canonical(&self, t: &[Gen]) -> Option<(Tuple, Parity)> {
        if t.is_empty() {
            return self.variant.is_extended().then(|| (Tuple::new(), Parity::EVEN));
        }
        let unit = self.algebra.unit;
        match self.variant {
            Variant::Hochschild => Some((Tuple::from_slice(t), Parity::EVEN)),
            Variant::NormalizedHochschild => {
                if t[1..].iter().any(|&g| Some(g) == unit) {
                    None
                } else {
                    Some((Tuple::from_slice(t), Parity::EVEN))
                }
            }
            _ => {
                if self.variant.is_reduced() && t.iter().any(|&g| Some(g) == unit) {
                    return None;
                }
                connes_canonical(self.module(), t)
            }
        }
    }

    /// Projection of a word to canonical chains.
    pub fn project(&self, w: &Word) -> Word {
        let mut out = Word::zero();
        for (t, s) in w.iter() {
            if let Some((u, p)) = self.canonical(t) {
                out.add_owned(u, s.clone().signed(p.is_odd()));
            }
        }
        out
    }

    /// Whether a pure tuple is a canonical basis chain.
    pub fn is_basis(&self, t: &[Gen]) -> bool {
        match self.canonical(t) {
            Some((u, p)) => u.as_slice() == t && !p.is_odd(),
            None => false,
        }
    }

    /// Canonical basis chains of weight at most `max_weight`.
    pub fn basis(&self, max_weight: usize) -> Vec<Tuple> {
        let start = if self.variant.is_extended() { 0 } else { 1 };
        (start..=max_weight)
            .flat_map(|k| self.module().tuples_of_length(k))
            .filter(|t| self.is_basis(t))
            .collect()
    }

    /// The differential, projected to canonical chains.
    pub fn diff(&self, w: &Word, cap: &Cap) -> Result<Word, ComplexError> {
        if !self.variant.is_extended() && w.iter().any(|(t, _)| t.is_empty()) {
            return Err(ComplexError::WeightZero(self.variant));
        }
        Ok(self.project(&hoch_diff(self.algebra, w, cap)))
    }
}

/// The Hochschild differential on a pure tuple, without any projection.
/// On the empty tuple it is the curvature `mu_0`.
pub fn hoch_diff_tuple(a: &AInfty, t: &[Gen], cap: &Cap) -> Word {
    let m = &a.module;
    let ring = &a.ring;
    let mut out = Word::zero();
    if t.is_empty() {
        for (g, s) in a.curvature().iter() {
            out.add_owned(Tuple::from_slice(&[g]), ring.truncate(s, cap));
        }
        return out;
    }
    let x = t[0];
    let l = &t[1..];
    let px = m.shifted_parity(x);
    // x ⊗ mu-hat(l)
    for (u, s) in a.hat_on_tuple(l, cap).into_terms() {
        let mut nt = Tuple::with_capacity(u.len() + 1);
        nt.push(x);
        nt.extend_from_slice(&u);
        let c = twist_odd(ring, &s, px);
        out.add_owned(nt, c.signed(px.is_odd()));
    }
    // mu(l3 ⊗ x ⊗ l1) ⊗ l2 with l = l1 l2 l3
    let n = l.len();
    let max = a.max_arity();
    for i in 0..=n {
        for j in i..=n {
            let (l1, l2, l3) = (&l[..i], &l[i..j], &l[j..]);
            if l1.len() + l3.len() + 1 > max {
                continue;
            }
            let mut input = Tuple::with_capacity(l1.len() + l3.len() + 1);
            input.extend_from_slice(l3);
            input.push(x);
            input.extend_from_slice(l1);
            if let Some(val) = a.mu(&input) {
                let p3 = m.tuple_parity(l3);
                let sign = p3 * (px + m.tuple_parity(l1) + m.tuple_parity(l2));
                for (g, s) in val.iter() {
                    let mut nt = Tuple::with_capacity(l2.len() + 1);
                    nt.push(g);
                    nt.extend_from_slice(l2);
                    out.add_owned(nt, ring.truncate(s, cap).signed(sign.is_odd()));
                }
            }
        }
    }
    out
}

/// The Hochschild differential on words; `d(c w) = (-1)^{|c|} c d(w)`.
pub fn hoch_diff(a: &AInfty, w: &Word, cap: &Cap) -> Word {
    let mut out = Word::zero();
    for (t, c) in w.iter() {
        let c = twist_odd(&a.ring, c, Parity::ODD);
        out.add_scaled(&a.ring, &c, &hoch_diff_tuple(a, t, cap), cap);
    }
    out
}

/// `d^2` on every canonical basis chain of weight at most `cap.weight`.
pub fn dsquare_sweep(a: &AInfty, variant: Variant, cap: &Cap) -> Result<ResidualReport, ComplexError> {
    let cx = Complex::new(a, variant)?;
    let basis = cx.basis(cap.weight);
    let failures: Vec<Witness> = basis
        .par_iter()
        .filter_map(|t| {
            let w = Word::single(t.clone(), a.ring.one());
            let d1 = cx.diff(&w, cap).expect("canonical input");
            let d2 = cx.diff(&d1, cap).expect("canonical input");
            (!d2.is_zero()).then(|| Witness {
                input: a.module.fmt_tuple(t),
                value: d2.display(&a.module),
            })
        })
        .collect();
    Ok(ResidualReport::new(basis.len(), failures))
}

/// `d(d(1))` in the Hochschild complex extended by a weight-0 generator, with no
/// cyclic quotient. It equals `-mu_0 ⊗ mu_0`, which is why the extension only
/// makes sense on the Connes side.
pub fn curvature_square(a: &AInfty, cap: &Cap) -> Word {
    let d1 = hoch_diff_tuple(a, &[], cap);
    hoch_diff(a, &d1, cap)
}

/// Checks `d ∘ (1 - t) = (1 - t) ∘ mu-hat` on random words.
pub fn t_lemma_check(a: &AInfty, cap: &Cap, trials: usize, seed: u64) -> ResidualReport {
    let m = &a.module;
    let words: Vec<Word> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let terms = rng.gen_range(1..=3);
                (0..terms)
                    .map(|_| {
                        let k = rng.gen_range(1..=cap.weight.max(1));
                        let t: Tuple = (0..k).map(|_| rng.gen_range(0..m.len()) as Gen).collect();
                        let c = Q::new(rng.gen_range(-5..=5), rng.gen_range(1..=3));
                        (t, a.ring.constant(c))
                    })
                    .collect::<Word>()
            })
            .collect()
    };
    let failures: Vec<Witness> = words
        .par_iter()
        .filter_map(|w| {
            let lhs = hoch_diff(a, &one_minus_t(m, w), cap);
            let rhs = one_minus_t(m, &a.hat_extension(w, cap));
            let mut r = lhs;
            r.sub_assign(&rhs);
            (!r.is_zero()).then(|| Witness {
                input: w.display(m),
                value: r.display(m),
            })
        })
        .collect();
    ResidualReport::new(words.len(), failures)
}

/// Checks that the differential preserves the degenerate subcomplex killed by
/// the normalized or reduced variant: every generator of that subcomplex of
/// weight at most `cap.weight` has differential vanishing in the quotient.
pub fn degeneracy_check(a: &AInfty, variant: Variant, cap: &Cap) -> Result<ResidualReport, ComplexError> {
    let unit = a.unit.ok_or(ComplexError::NoUnit(variant))?;
    let quotient = Complex::new(a, variant)?;
    let ambient = match variant {
        Variant::NormalizedHochschild => Variant::Hochschild,
        Variant::ReducedConnes => Variant::Connes,
        Variant::ExtendedReducedConnes => Variant::ExtendedConnes,
        other => return Ok(ResidualReport::new(0, vec![Witness {
            input: other.to_string(),
            value: "variant has no degenerate subcomplex".into(),
        }])),
    };
    let amb = Complex::new(a, ambient)?;
    let gens: Vec<Tuple> = amb
        .basis(cap.weight)
        .into_iter()
        .filter(|t| match variant {
            Variant::NormalizedHochschild => t.iter().skip(1).any(|&g| g == unit),
            _ => t.contains(&unit),
        })
        .collect();
    let failures: Vec<Witness> = gens
        .par_iter()
        .filter_map(|t| {
            let d = amb.diff(&Word::single(t.clone(), a.ring.one()), cap).expect("canonical");
            let r = quotient.project(&d);
            (!r.is_zero()).then(|| Witness {
                input: a.module.fmt_tuple(t),
                value: r.display(&a.module),
            })
        })
        .collect();
    Ok(ResidualReport::new(gens.len(), failures))
}

/// `sum_j c_j t_j` with all coefficients `1`, for tests.
pub fn word_of(a: &AInfty, tuples: &[&[Gen]]) -> Word {
    tuples
        .iter()
        .map(|t| (Tuple::from_slice(t), a.ring.one()))
        .collect()
}

/// A single scalar multiple of a pure tuple.
pub fn chain(t: &[Gen], s: Scalar) -> Word {
    Word::single(Tuple::from_slice(t), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::builtins::*;

    fn cap(w: usize) -> Cap {
        Cap::new(Q::int(3), w, 0)
    }

    #[test]
    fn t_on_weight_one_is_identity() {
        let a = exterior(2);
        let w = chain(&[1], a.ring.one());
        assert_eq!(t_op(&a.module, &w), w);
        let w0 = chain(&[], a.ring.one());
        assert_eq!(t_op(&a.module, &w0), w0);
    }

    #[test]
    fn t_to_the_k_is_identity() {
        let a = exterior(2);
        let w = word_of(&a, &[&[1, 2, 3], &[0, 1, 1]]);
        let mut v = w.clone();
        for _ in 0..3 {
            v = t_op(&a.module, &v);
        }
        assert_eq!(v, w);
    }

    #[test]
    fn canonical_kills_sign_inconsistent_orbits() {
        // x ⊗ x with ||x|| odd: t(x x) = -(x x), so the class is zero
        let a = dual_numbers();
        assert_eq!(connes_canonical(&a.module, &[1, 1]), None);
        let e = exterior(2);
        // ||x1|| even: survives
        assert!(connes_canonical(&e.module, &[1, 1]).is_some());
    }

    #[test]
    fn differential_of_unit_in_extended_is_curvature() {
        let a = curved_matrix();
        let cx = Complex::new(&a, Variant::ExtendedConnes).unwrap();
        let d = cx.diff(&chain(&[], a.ring.one()), &cap(2)).unwrap();
        let t = a.ring.t_class(&[1]).unwrap();
        assert_eq!(d, chain(&[0], t));
    }

    #[test]
    fn non_extended_rejects_weight_zero() {
        let a = curved_matrix();
        let cx = Complex::new(&a, Variant::Connes).unwrap();
        assert!(cx.diff(&chain(&[], a.ring.one()), &cap(2)).is_err());
    }

    #[test]
    fn curvature_square_is_minus_mu0_squared() {
        let a = curved_matrix();
        let c = cap(3);
        let r = curvature_square(&a, &c);
        let t2 = a.ring.t_class(&[2]).unwrap();
        assert_eq!(r, chain(&[0, 0], t2.neg()));
        assert!(!r.is_zero());
    }

    #[test]
    fn dsquare_small() {
        for a in all() {
            for v in Variant::ALL {
                let r = dsquare_sweep(&a, v, &cap(3)).unwrap();
                assert!(r.passed(), "{} {v}: {:?}", a.name, r.witnesses);
            }
        }
    }

    #[test]
    fn t_lemma_small() {
        for a in all() {
            let r = t_lemma_check(&a, &cap(4), 100, 1);
            assert!(r.passed(), "{}: {:?}", a.name, r.witnesses);
        }
    }

    #[test]
    fn degeneracy_small() {
        for a in all() {
            for v in [Variant::NormalizedHochschild, Variant::ReducedConnes, Variant::ExtendedReducedConnes] {
                let r = degeneracy_check(&a, v, &cap(3)).unwrap();
                assert!(r.passed(), "{} {v}: {:?}", a.name, r.witnesses);
            }
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("cyclic".parse::<Variant>().is_err());
    }
}
