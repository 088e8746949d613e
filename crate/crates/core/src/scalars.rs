//! Coefficient ring: truncated power series in `T^beta` and graded formal variables.
//!
//! A [`Scalar`] is a finite sum of monomials `c * T^beta * t0^e0 * ... * tN^eN`
//! with exact rational `c`. The grading comes from a Maslov functional on the
//! lattice of classes `beta` and from the declared degrees of the `t_i`; odd
//! variables anticommute. Energy truncation drops monomials of valuation above
//! the cap, which is a quotient by an ideal, so ring identities survive it.

use num::rational::Ratio;
use num::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Exact rational number. Arithmetic panics on `i128` overflow instead of wrapping.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Q(Ratio<i128>);

impl Q {
    pub fn new(n: i128, d: i128) -> Q {
        assert!(d != 0, "zero denominator");
        Q(Ratio::new(n, d))
    }

    pub fn int(n: i128) -> Q {
        Q(Ratio::from_integer(n))
    }

    pub fn zero() -> Q {
        Q::int(0)
    }

    pub fn one() -> Q {
        Q::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        Q(self.0.recip())
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> i128 {
        self.0.floor().to_integer()
    }
}

fn overflow() -> ! {
    panic!("rational overflow: coefficient exceeds i128 range")
}

impl std::ops::Add for Q {
    type Output = Q;
    fn add(self, o: Q) -> Q {
        Q(self.0.checked_add(&o.0).unwrap_or_else(|| overflow()))
    }
}

impl std::ops::Sub for Q {
    type Output = Q;
    fn sub(self, o: Q) -> Q {
        Q(self.0.checked_sub(&o.0).unwrap_or_else(|| overflow()))
    }
}

impl std::ops::Mul for Q {
    type Output = Q;
    fn mul(self, o: Q) -> Q {
        Q(self.0.checked_mul(&o.0).unwrap_or_else(|| overflow()))
    }
}

impl std::ops::Div for Q {
    type Output = Q;
    fn div(self, o: Q) -> Q {
        self * o.recip()
    }
}

impl std::ops::Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        if *self.0.numer() == i128::MIN {
            overflow()
        }
        Q(-self.0)
    }
}

impl std::ops::AddAssign for Q {
    fn add_assign(&mut self, o: Q) {
        *self = *self + o;
    }
}

impl std::ops::SubAssign for Q {
    fn sub_assign(&mut self, o: Q) {
        *self = *self - o;
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Q {
    type Err = String;
    fn from_str(s: &str) -> Result<Q, String> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: i128 = n.parse().map_err(|_| format!("bad rational `{s}`"))?;
        let d: i128 = d.parse().map_err(|_| format!("bad rational `{s}`"))?;
        if d == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Q::new(n, d))
    }
}

impl Serialize for Q {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("context mismatch: expected {expected}, found {found}")]
    ContextMismatch { expected: String, found: String },
    #[error("degree of the zero scalar is undefined")]
    ZeroDegree,
    #[error("scalar is not homogeneous: degrees {0} and {1}")]
    NonHomogeneous(i64, i64),
    #[error("class {beta:?} has negative energy {energy}")]
    NegativeEnergy { beta: Vec<i32>, energy: Q },
    #[error("odd variable t{0} raised to power {1}")]
    OddPower(usize, u16),
    #[error("no formal variable t{0}")]
    NoSuchVariable(usize),
    #[error("Maslov index of lattice generator {0} is odd ({1})")]
    OddMaslov(usize, i64),
    #[error("lattice data: omega has {0} entries, maslov has {1}")]
    LatticeShape(usize, usize),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

/// Lattice of classes with energy (`omega`) and Maslov index functionals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiGroup {
    pub omega: Vec<Q>,
    pub maslov: Vec<i64>,
}

impl PiGroup {
    pub fn new(omega: Vec<Q>, maslov: Vec<i64>) -> Result<PiGroup, ScalarError> {
        if omega.len() != maslov.len() {
            return Err(ScalarError::LatticeShape(omega.len(), maslov.len()));
        }
        if let Some((i, &m)) = maslov.iter().enumerate().find(|(_, m)| *m % 2 != 0) {
            return Err(ScalarError::OddMaslov(i, m));
        }
        Ok(PiGroup { omega, maslov })
    }

    pub fn trivial() -> PiGroup {
        PiGroup {
            omega: vec![],
            maslov: vec![],
        }
    }

    pub fn rank(&self) -> usize {
        self.omega.len()
    }

    pub fn energy(&self, beta: &[i32]) -> Q {
        beta.iter()
            .zip(&self.omega)
            .fold(Q::zero(), |acc, (&b, &w)| acc + Q::int(b as i128) * w)
    }

    pub fn maslov_index(&self, beta: &[i32]) -> i64 {
        beta.iter().zip(&self.maslov).map(|(&b, &m)| b as i64 * m).sum()
    }
}

/// Degrees of the formal variables `t_0, ..., t_N`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalVarSpec {
    pub degrees: Vec<i64>,
}

impl FormalVarSpec {
    pub fn new(degrees: Vec<i64>) -> FormalVarSpec {
        FormalVarSpec { degrees }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.degrees[i] % 2 != 0
    }
}

/// Truncation bounds: energy, tensor word length, and total formal-variable degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cap {
    pub energy: Q,
    pub weight: usize,
    pub var_total: u32,
}

impl Cap {
    pub fn new(energy: Q, weight: usize, var_total: u32) -> Cap {
        Cap {
            energy,
            weight,
            var_total,
        }
    }

    pub fn with_weight(&self, weight: usize) -> Cap {
        Cap {
            weight,
            ..self.clone()
        }
    }
}

/// `T^beta * t^e`; the coefficient lives in the owning [`Scalar`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    pub beta: SmallVec<[i32; 2]>,
    pub exps: SmallVec<[u16; 4]>,
}

impl Monomial {
    pub fn unit(rank: usize, nvars: usize) -> Monomial {
        Monomial {
            beta: SmallVec::from_elem(0, rank),
            exps: SmallVec::from_elem(0, nvars),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.beta.iter().all(|&b| b == 0) && self.exps.iter().all(|&e| e == 0)
    }

    pub fn var_total(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.beta.iter().any(|&b| b != 0) {
            let b: Vec<String> = self.beta.iter().map(|b| b.to_string()).collect();
            parts.push(format!("T^[{}]", b.join(",")));
        }
        for (i, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("t{i}")),
                _ => parts.push(format!("t{i}^{e}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" * "))
        }
    }
}

/// Valuation `nu`: minimum energy plus variable degree over the monomials; `+inf` on zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Q),
    Infinite,
}

/// Finite sum of monomials with nonzero rational coefficients, sorted by monomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    terms: SmallVec<[(Monomial, Q); 1]>,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::default()
    }

    pub fn from_term(m: Monomial, c: Q) -> Scalar {
        let mut s = Scalar::zero();
        if !c.is_zero() {
            s.terms.push((m, c));
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Q)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the given monomial.
    pub fn coeff(&self, m: &Monomial) -> Q {
        match self.terms.binary_search_by(|(k, _)| k.cmp(m)) {
            Ok(i) => self.terms[i].1,
            Err(_) => Q::zero(),
        }
    }

    /// The rational value when the scalar is a multiple of the unit monomial.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 if self.terms[0].0.is_unit() => Some(self.terms[0].1),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(k, _)| k.cmp(&m)) {
            Ok(i) => {
                let v = self.terms[i].1 + c;
                if v.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].1 = v;
                }
            }
            Err(i) => self.terms.insert(i, (m, c)),
        }
    }

    pub fn add_assign(&mut self, o: &Scalar) {
        if self.terms.is_empty() {
            self.terms = o.terms.clone();
            return;
        }
        for (m, c) in o.terms.iter() {
            self.add_term(m.clone(), *c);
        }
    }

    pub fn sub_assign(&mut self, o: &Scalar) {
        for (m, c) in o.terms.iter() {
            self.add_term(m.clone(), -*c);
        }
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -*c)).collect(),
        }
    }

    pub fn scale(&self, q: Q) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), *c * q)).collect(),
        }
    }

    /// Multiplies by `(-1)^e`.
    pub fn signed(self, odd: bool) -> Scalar {
        if odd {
            self.neg()
        } else {
            self
        }
    }

    /// Keeps only the monomials accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Scalar {
        Scalar {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).cloned().collect(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_unit() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} * {m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The coefficient ring: lattice data plus formal variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ring {
    pub pi: PiGroup,
    pub vars: FormalVarSpec,
}

impl Ring {
    pub fn new(pi: PiGroup, vars: FormalVarSpec) -> Ring {
        Ring { pi, vars }
    }

    /// `Q` with no classes and no formal variables.
    pub fn rationals() -> Ring {
        Ring::new(PiGroup::trivial(), FormalVarSpec::default())
    }

    pub fn rank(&self) -> usize {
        self.pi.rank()
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn unit_monomial(&self) -> Monomial {
        Monomial::unit(self.rank(), self.nvars())
    }

    pub fn one(&self) -> Scalar {
        self.constant(Q::one())
    }

    pub fn constant(&self, q: Q) -> Scalar {
        Scalar::from_term(self.unit_monomial(), q)
    }

    pub fn int(&self, n: i128) -> Scalar {
        self.constant(Q::int(n))
    }

    /// `c * T^beta * t^exps`, validated against the ring.
    pub fn monomial(&self, c: Q, beta: &[i32], exps: &[u16]) -> Result<Scalar, ScalarError> {
        let m = Monomial {
            beta: beta.iter().copied().collect(),
            exps: exps.iter().copied().collect(),
        };
        self.check_monomial(&m)?;
        Ok(Scalar::from_term(m, c))
    }

    /// `T^beta`.
    pub fn t_class(&self, beta: &[i32]) -> Result<Scalar, ScalarError> {
        self.monomial(Q::one(), beta, &vec![0; self.nvars()])
    }

    /// The formal variable `t_i`.
    pub fn var(&self, i: usize) -> Result<Scalar, ScalarError> {
        if i >= self.nvars() {
            return Err(ScalarError::NoSuchVariable(i));
        }
        let mut e = vec![0u16; self.nvars()];
        e[i] = 1;
        self.monomial(Q::one(), &vec![0; self.rank()], &e)
    }

    fn shape(&self) -> String {
        format!("rank {} with {} formal variables", self.rank(), self.nvars())
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<(), ScalarError> {
        if m.beta.len() != self.rank() || m.exps.len() != self.nvars() {
            return Err(ScalarError::ContextMismatch {
                expected: self.shape(),
                found: format!(
                    "rank {} with {} formal variables",
                    m.beta.len(),
                    m.exps.len()
                ),
            });
        }
        let e = self.pi.energy(&m.beta);
        if e.is_negative() {
            return Err(ScalarError::NegativeEnergy {
                beta: m.beta.to_vec(),
                energy: e,
            });
        }
        for (i, &x) in m.exps.iter().enumerate() {
            if x > 1 && self.vars.is_odd(i) {
                return Err(ScalarError::OddPower(i, x));
            }
        }
        Ok(())
    }

    pub fn check(&self, s: &Scalar) -> Result<(), ScalarError> {
        s.terms.iter().try_for_each(|(m, _)| self.check_monomial(m))
    }

    pub fn monomial_valuation(&self, m: &Monomial) -> Q {
        self.pi.energy(&m.beta) + Q::int(m.var_total() as i128)
    }

    pub fn monomial_degree(&self, m: &Monomial) -> i64 {
        self.pi.maslov_index(&m.beta)
            + m.exps
                .iter()
                .zip(&self.vars.degrees)
                .map(|(&e, &d)| e as i64 * d)
                .sum::<i64>()
    }

    pub fn monomial_is_odd(&self, m: &Monomial) -> bool {
        m.exps
            .iter()
            .enumerate()
            .filter(|&(i, &e)| e % 2 == 1 && self.vars.is_odd(i))
            .count()
            % 2
            == 1
    }

    pub fn valuation(&self, s: &Scalar) -> Valuation {
        s.terms
            .iter()
            .map(|(m, _)| self.monomial_valuation(m))
            .min()
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    pub fn degree(&self, s: &Scalar) -> Result<i64, ScalarError> {
        let mut it = s.terms.iter().map(|(m, _)| self.monomial_degree(m));
        let d = it.next().ok_or(ScalarError::ZeroDegree)?;
        for e in it {
            if e != d {
                return Err(ScalarError::NonHomogeneous(d, e));
            }
        }
        Ok(d)
    }

    /// Splits into even and odd parts; Koszul signs are applied to each separately.
    pub fn split_parity(&self, s: &Scalar) -> (Scalar, Scalar) {
        let even = s.filter(|m| !self.monomial_is_odd(m));
        let odd = s.filter(|m| self.monomial_is_odd(m));
        (even, odd)
    }

    /// `Some(parity)` when every monomial has the same parity.
    pub fn parity(&self, s: &Scalar) -> Option<bool> {
        let mut it = s.terms.iter().map(|(m, _)| self.monomial_is_odd(m));
        let p = it.next().unwrap_or(false);
        it.all(|q| q == p).then_some(p)
    }

    /// True when the monomial survives the cap.
    pub fn within_cap(&self, m: &Monomial, cap: &Cap) -> bool {
        m.var_total() <= cap.var_total && self.monomial_valuation(m) <= cap.energy
    }

    pub fn truncate(&self, s: &Scalar, cap: &Cap) -> Scalar {
        s.filter(|m| self.within_cap(m, cap))
    }

    /// Product of monomials with the Koszul sign of reordering odd variables, or `None` if it vanishes.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
        let mut odd = false;
        // Sign: each odd variable of `b` passes the odd variables of `a` with larger index.
        let n = a.exps.len();
        let mut a_odd_after = vec![0usize; n + 1];
        for i in (0..n).rev() {
            let here = (a.exps[i] % 2 == 1 && self.vars.is_odd(i)) as usize;
            a_odd_after[i] = a_odd_after[i + 1] + here;
        }
        let mut exps: SmallVec<[u16; 4]> = SmallVec::with_capacity(n);
        for i in 0..n {
            let e = a.exps[i] + b.exps[i];
            if self.vars.is_odd(i) {
                if e > 1 {
                    return None;
                }
                if b.exps[i] == 1
                    && a_odd_after[i + 1] % 2 == 1 {
                        odd = !odd;
                    }
            }
            exps.push(e);
        }
        let beta = a.beta.iter().zip(&b.beta).map(|(x, y)| x + y).collect();
        Some((Monomial { beta, exps }, odd))
    }

    /// Product truncated by `cap`; fails on shape mismatch.
    pub fn mul(&self, a: &Scalar, b: &Scalar, cap: &Cap) -> Result<Scalar, ScalarError> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        Ok(self.mul_capped(a, b, cap))
    }

    fn check_shape(&self, s: &Scalar) -> Result<(), ScalarError> {
        for (m, _) in s.terms.iter() {
            if m.beta.len() != self.rank() || m.exps.len() != self.nvars() {
                return Err(ScalarError::ContextMismatch {
                    expected: self.shape(),
                    found: format!(
                        "rank {} with {} formal variables",
                        m.beta.len(),
                        m.exps.len()
                    ),
                });
            }
        }
        Ok(())
    }

    /// Product truncated by `cap`, for operands already known to belong to this ring.
    pub fn mul_capped(&self, a: &Scalar, b: &Scalar, cap: &Cap) -> Scalar {
        if a.is_zero() || b.is_zero() {
            return Scalar::zero();
        }
        if let Some(c) = a.as_constant() {
            if b.terms.iter().all(|(m, _)| self.within_cap(m, cap)) {
                return b.scale(c);
            }
        }
        if let Some(c) = b.as_constant() {
            if a.terms.iter().all(|(m, _)| self.within_cap(m, cap)) {
                return a.scale(c);
            }
        }
        let mut out = Scalar::zero();
        for (ma, ca) in a.terms.iter() {
            for (mb, cb) in b.terms.iter() {
                if let Some((m, odd)) = self.mul_monomials(ma, mb) {
                    if self.within_cap(&m, cap) {
                        let c = *ca * *cb;
                        out.add_term(m, if odd { -c } else { c });
                    }
                }
            }
        }
        out
    }

    /// Left partial derivative in `t_j`.
    pub fn partial(&self, s: &Scalar, j: usize) -> Result<Scalar, ScalarError> {
        if j >= self.nvars() {
            return Err(ScalarError::NoSuchVariable(j));
        }
        self.check_shape(s)?;
        let mut out = Scalar::zero();
        for (m, c) in s.terms.iter() {
            let e = m.exps[j];
            if e == 0 {
                continue;
            }
            let before: i64 = (0..j).map(|i| m.exps[i] as i64 * self.vars.degrees[i]).sum();
            let odd = (self.vars.degrees[j] * before).rem_euclid(2) == 1;
            let mut m2 = m.clone();
            m2.exps[j] -= 1;
            let v = *c * Q::int(e as i128);
            out.add_term(m2, if odd { -v } else { v });
        }
        Ok(out)
    }

    /// Parses the textual form `c * T^[b1,...,br] * t0^e0 * ... + ...`.
    pub fn parse(&self, text: &str) -> Result<Scalar, ScalarError> {
        let mut p = Parser {
            s: text.as_bytes(),
            pos: 0,
        };
        let s = p.scalar(self)?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        self.check(&s)?;
        Ok(s)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ScalarError {
        ScalarError::Parse {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i128, ScalarError> {
        self.ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse().map_err(|_| {
            self.pos = start;
            self.err("expected an integer")
        })
    }

    fn scalar(&mut self, ring: &Ring) -> Result<Scalar, ScalarError> {
        let mut out = Scalar::zero();
        let (m, c) = self.term(ring)?;
        out.add_term(m, c);
        loop {
            self.ws();
            let neg = match self.peek() {
                Some(b'+') => false,
                Some(b'-') => true,
                _ => break,
            };
            self.pos += 1;
            let (m, c) = self.term(ring)?;
            out.add_term(m, if neg { -c } else { c });
        }
        Ok(out)
    }

    fn term(&mut self, ring: &Ring) -> Result<(Monomial, Q), ScalarError> {
        let mut c = Q::one();
        let mut m = ring.unit_monomial();
        self.ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            c = -c;
        }
        let mut first = true;
        loop {
            self.ws();
            match self.peek() {
                Some(b'T') => {
                    self.pos += 1;
                    if !self.eat(b'^') || !self.eat(b'[') {
                        return Err(self.err("expected `T^[...]`"));
                    }
                    let mut beta = Vec::new();
                    if !self.eat(b']') {
                        loop {
                            beta.push(self.int()? as i32);
                            if self.eat(b']') {
                                break;
                            }
                            if !self.eat(b',') {
                                return Err(self.err("expected `,` or `]`"));
                            }
                        }
                    }
                    if beta.len() != ring.rank() {
                        return Err(self.err(&format!(
                            "class has {} entries, lattice rank is {}",
                            beta.len(),
                            ring.rank()
                        )));
                    }
                    for (x, b) in m.beta.iter_mut().zip(beta) {
                        *x += b;
                    }
                }
                Some(b't') => {
                    self.pos += 1;
                    let i = self.int()?;
                    if i < 0 || i as usize >= ring.nvars() {
                        return Err(self.err(&format!("no formal variable t{i}")));
                    }
                    let e = if self.eat(b'^') { self.int()? } else { 1 };
                    if e < 0 {
                        return Err(self.err("negative exponent"));
                    }
                    let e = u16::try_from(e).map_err(|_| self.err("exponent too large"))?;
                    let i = i as usize;
                    if ring.vars.is_odd(i) && m.exps[i] > 0 {
                        // repeated odd variable squares to zero
                        c = Q::zero();
                    }
                    m.exps[i] += e;
                    if ring.vars.is_odd(i) && m.exps[i] > 1 {
                        c = Q::zero();
                        m.exps[i] = 1;
                    }
                }
                Some(ch) if ch.is_ascii_digit() => {
                    let n = self.int()?;
                    let d = if self.eat(b'/') { self.int()? } else { 1 };
                    if d == 0 {
                        return Err(self.err("zero denominator"));
                    }
                    c = c * Q::new(n, d);
                }
                _ => {
                    return Err(self.err(if first {
                        "expected a coefficient, `T^[...]` or `t<i>`"
                    } else {
                        "expected a factor after `*`"
                    }))
                }
            }
            first = false;
            self.ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((m, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_odd() -> Ring {
        // one class of energy 1 and Maslov 2; t0 odd, t1 even
        Ring::new(
            PiGroup::new(vec![Q::one()], vec![2]).unwrap(),
            FormalVarSpec::new(vec![1, 2]),
        )
    }

    fn cap() -> Cap {
        Cap::new(Q::int(10), 4, 10)
    }

    #[test]
    fn odd_variables_anticommute() {
        let r = Ring::new(PiGroup::trivial(), FormalVarSpec::new(vec![1, 1]));
        let t0 = r.var(0).unwrap();
        let t1 = r.var(1).unwrap();
        let a = r.mul(&t0, &t1, &cap()).unwrap();
        let b = r.mul(&t1, &t0, &cap()).unwrap();
        assert_eq!(a, b.neg());
        assert!(r.mul(&t0, &t0, &cap()).unwrap().is_zero());
    }

    #[test]
    fn valuation_of_class_times_variable() {
        let r = Ring::new(
            PiGroup::new(vec![Q::one()], vec![2]).unwrap(),
            FormalVarSpec::new(vec![0]),
        );
        let s = r.mul(&r.t_class(&[1]).unwrap(), &r.var(0).unwrap(), &cap()).unwrap();
        assert_eq!(r.valuation(&s), Valuation::Finite(Q::int(2)));
        assert_eq!(r.valuation(&Scalar::zero()), Valuation::Infinite);
    }

    #[test]
    fn degree_rules() {
        let r = ring_odd();
        let s = r.parse("T^[1] * t0").unwrap();
        assert_eq!(r.degree(&s), Ok(3));
        assert_eq!(r.degree(&Scalar::zero()), Err(ScalarError::ZeroDegree));
        let mixed = r.parse("1 + t0").unwrap();
        assert!(matches!(r.degree(&mixed), Err(ScalarError::NonHomogeneous(..))));
    }

    #[test]
    fn cap_drops_high_energy() {
        let r = ring_odd();
        let c = Cap::new(Q::int(1), 4, 10);
        let s = r.mul(&r.t_class(&[1]).unwrap(), &r.t_class(&[1]).unwrap(), &c).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn var_total_cap() {
        let r = ring_odd();
        let c = Cap::new(Q::int(10), 4, 1);
        let t1 = r.var(1).unwrap();
        assert!(r.mul(&t1, &t1, &c).unwrap().is_zero());
    }

    #[test]
    fn partial_derivative_sign() {
        let r = Ring::new(PiGroup::trivial(), FormalVarSpec::new(vec![1, 1]));
        // d/dt1 (t0 t1) = -t0
        let s = r.parse("t0 * t1").unwrap();
        assert_eq!(r.partial(&s, 1).unwrap(), r.var(0).unwrap().neg());
        assert_eq!(r.partial(&s, 0).unwrap(), r.var(1).unwrap());
    }

    #[test]
    fn context_mismatch() {
        let r1 = ring_odd();
        let r2 = Ring::rationals();
        let a = r1.one();
        let b = r2.one();
        assert!(matches!(
            r1.mul(&a, &b, &cap()),
            Err(ScalarError::ContextMismatch { .. })
        ));
    }

    #[test]
    fn negative_energy_rejected() {
        let r = Ring::new(
            PiGroup::new(vec![Q::one()], vec![2]).unwrap(),
            FormalVarSpec::default(),
        );
        assert!(matches!(
            r.t_class(&[-1]),
            Err(ScalarError::NegativeEnergy { .. })
        ));
        assert!(PiGroup::new(vec![Q::one()], vec![1]).is_err());
    }

    #[test]
    fn parse_and_display() {
        let r = ring_odd();
        let s = r.parse("3/2 * T^[1] * t1^2 - t0 + 2").unwrap();
        let back = r.parse(&s.to_string()).unwrap();
        assert_eq!(s, back);
        assert_eq!(r.parse("0").unwrap(), Scalar::zero());
        let e = r.parse("3 * q").unwrap_err();
        assert!(matches!(e, ScalarError::Parse { col: 5, .. }));
    }
}
