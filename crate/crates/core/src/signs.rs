//! Splittings, permutations of lists, and the sign exponents attached to them.
//!
//! Degree arguments are unshifted degrees; shifted quantities use `|a| + 1`,
//! which has the parity of the shifted degree. Every function returns an
//! exponent of `-1` reduced mod 2.

use crate::graded::Parity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignError {
    #[error("index {0} appears in both I and J")]
    Overlap(usize),
    #[error("index {0} is missing from I and J")]
    Missing(usize),
    #[error("index {0} is out of range for a list of length {1}")]
    OutOfRange(usize, usize),
    #[error("shift {0} is not a rotation of a list of length {1}")]
    BadRotation(usize, usize),
}

/// All ways to cut a list of length `k` into `r` consecutive (possibly empty) blocks.
///
/// Each splitting is returned as the `r + 1` block boundaries `0 = c_0 <= ... <= c_r = k`.
pub fn split_enum(k: usize, r: usize) -> Vec<Vec<usize>> {
    assert!(r >= 1, "a splitting needs at least one block");
    let mut out = Vec::new();
    let mut cuts = vec![0usize; r + 1];
    cuts[r] = k;
    fn go(pos: usize, lo: usize, k: usize, r: usize, cuts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == r {
            out.push(cuts.clone());
            return;
        }
        for c in lo..=k {
            cuts[pos] = c;
            go(pos + 1, c, k, r, cuts, out);
        }
    }
    go(1, 0, k, r, &mut cuts, &mut out);
    out
}

/// Koszul exponent `s_sigma` of listing `degrees` in the order `perm`:
/// the sum over `i < j` with `perm[i] > perm[j]` of `deg[perm[i]] * deg[perm[j]]`.
pub fn permutation_sign(perm: &[usize], degrees: &[i64]) -> Parity {
    let mut odd = false;
    for i in 0..perm.len() {
        if degrees[perm[i]] % 2 == 0 {
            continue;
        }
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] && degrees[perm[j]] % 2 != 0 {
                odd = !odd;
            }
        }
    }
    Parity(odd)
}

/// Same as [`permutation_sign`] with shifted degrees.
pub fn permutation_sign_shifted(perm: &[usize], degrees: &[i64]) -> Parity {
    let shifted: Vec<i64> = degrees.iter().map(|d| d + 1).collect();
    permutation_sign(perm, &shifted)
}

/// The cyclic permutation `j -> j + shift (mod k)`, zero-based.
pub fn rotation(k: usize, shift: usize) -> Vec<usize> {
    (0..k).map(|j| (j + shift) % k.max(1)).collect()
}

/// Rotated list `a^sigma = (a_{sigma(1)}, ..., a_{sigma(k)})` with `(s_sigma, s^[1]_sigma)`.
pub fn rotate<T: Clone>(
    items: &[T],
    degrees: &[i64],
    shift: usize,
) -> Result<(Vec<T>, Parity, Parity), SignError> {
    let k = items.len();
    if (k == 0 && shift != 0) || (k > 0 && shift >= k) {
        return Err(SignError::BadRotation(shift, k));
    }
    let perm = rotation(k, shift);
    let rotated = perm.iter().map(|&j| items[j].clone()).collect();
    Ok((
        rotated,
        permutation_sign(&perm, degrees),
        permutation_sign_shifted(&perm, degrees),
    ))
}

/// Sign of the shuffle taking `gamma_I ⊗ gamma_J` back to `gamma` (zero-based index sets).
pub fn shuffle_sign(degrees: &[i64], i: &[usize], j: &[usize]) -> Result<Parity, SignError> {
    let l = degrees.len();
    let mut seen = vec![false; l];
    for &x in i.iter().chain(j) {
        if x >= l {
            return Err(SignError::OutOfRange(x, l));
        }
        if seen[x] {
            return Err(SignError::Overlap(x));
        }
        seen[x] = true;
    }
    if let Some(m) = seen.iter().position(|s| !s) {
        return Err(SignError::Missing(m));
    }
    let perm: Vec<usize> = i.iter().chain(j).copied().collect();
    Ok(permutation_sign(&perm, degrees))
}

fn tri(k: i64) -> i64 {
    k * (k + 1) / 2
}

fn total(a: &[i64]) -> i64 {
    a.iter().sum()
}

/// `eps(a) = 1 + sum_j j * (|a_j| + 1)`.
pub fn eps(a: &[i64]) -> Parity {
    Parity::of(1 + a.iter().enumerate().map(|(j, d)| (j as i64 + 1) * (d + 1)).sum::<i64>())
}

/// `eps_p(a) = sum_j (n + j) * (|a_j| + 1)`.
pub fn eps_p(a: &[i64], n: i64) -> Parity {
    Parity::of(a.iter().enumerate().map(|(j, d)| (n + j as i64 + 1) * (d + 1)).sum::<i64>())
}

/// `eps'(k) = k(k+1)/2 + 1`.
pub fn eps_prime(k: usize) -> Parity {
    Parity::of(tri(k as i64) + 1)
}

/// `eps''(a) = sum_j j |a_j|`.
pub fn eps_dprime(a: &[i64]) -> Parity {
    Parity::of(a.iter().enumerate().map(|(j, d)| (j as i64 + 1) * d).sum::<i64>())
}

/// `eps'_p(k) = kn + k(k+1)/2`.
pub fn eps_p_prime(k: usize, n: i64) -> Parity {
    Parity::of(k as i64 * n + tri(k as i64))
}

/// `eps''_p(a) = n|a| + sum_j j |a_j|`.
pub fn eps_p_dprime(a: &[i64], n: i64) -> Parity {
    Parity::of(n * total(a)) + eps_dprime(a)
}

/// Outcome of one family of sign identities.
#[derive(Clone, Debug, Serialize)]
pub struct SignCheck {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub counterexample: Option<String>,
}

impl SignCheck {
    fn new(name: &str) -> SignCheck {
        SignCheck {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SignLemmaReport {
    pub checks: Vec<SignCheck>,
}

impl SignLemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(SignCheck::passed)
    }
}

/// Bounds for [`lemma_sign_suite`].
#[derive(Clone, Debug)]
pub struct SignSuiteParams {
    /// Largest list length for the rotation identities (exhaustive over parities).
    pub rotation_k: usize,
    /// Largest list length for the splitting identities (exhaustive over parities and splittings).
    pub splitting_k: usize,
    /// Additional random integer degree assignments per identity.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SignSuiteParams {
    fn default() -> Self {
        SignSuiteParams {
            rotation_k: 6,
            splitting_k: 8,
            trials: 2000,
            seed: 0,
        }
    }
}

fn parity_vectors(k: usize) -> impl Iterator<Item = Vec<i64>> {
    (0u32..1 << k).map(move |m| (0..k).map(|j| ((m >> j) & 1) as i64).collect())
}

fn rotation_case(a: &[i64], n: i64, t: usize) -> (Parity, Parity, Parity) {
    let k = a.len();
    let perm = rotation(k, t);
    let rot: Vec<i64> = perm.iter().map(|&j| a[j]).collect();
    let lhs_p = eps_p(&rot, n) + eps_p(a, n);
    let lhs = eps(&rot) + eps(a);
    let mut rhs = 0i64;
    for i in 0..k {
        for j in 0..i {
            if perm[j] > perm[i] {
                rhs += a[perm[i]] - a[perm[j]];
            }
        }
    }
    (lhs_p, lhs, Parity::of(rhs))
}

/// The splitting identities for one case; returns (non-p triple, p triple) as (lhs, rhs) pairs.
fn splitting_case(a: &[i64], n: i64, i: usize, k2: usize, gj: i64) -> [(Parity, Parity); 6] {
    let k = a.len();
    let k1 = k + 1 - k2;
    let a1 = &a[..i - 1];
    let a2 = &a[i - 1..i - 1 + k2];
    let a3 = &a[i - 1 + k2..];
    let mut merged: Vec<i64> = a1.to_vec();
    merged.push(total(a2) + gj + k2 as i64);
    merged.extend_from_slice(a3);
    let (ii, k1i, k2i, ki) = (i as i64, k1 as i64, k2 as i64, k as i64);
    let (ta, ta1, ta3) = (total(a), total(a1), total(a3));

    let l1 = eps_prime(k1) + eps_prime(k2);
    let r1 = eps_prime(k) + Parity::of(ki + k1i * k2i);
    let l2 = eps_dprime(&merged) + eps_dprime(a2);
    let r2 = eps_dprime(a) + Parity::of(ii * k2i + k2i * ta3 + ta + ta1 + ii * gj);
    let l3 = eps(&merged) + eps(a2);
    let r3 = eps(a) + Parity::of(ta + ki + ta1 + ii * gj + k2i * ta3 + k1i * k2i + ii * k2i);

    let pl1 = eps_p_prime(k1, n) + eps_prime(k2);
    let pr1 = eps_p_prime(k, n) + Parity::of(ki + k1i * k2i + k2i * n + n);
    let pl2 = eps_p_dprime(&merged, n) + eps_dprime(a2);
    let pr2 = eps_p_dprime(a, n)
        + Parity::of((ii + n) * k2i + k2i * ta3 + ta + ta1 + (ii + n) * gj);
    let pl3 = eps_p(&merged, n) + eps(a2);
    let pr3 = eps_p(a, n)
        + Parity::of(ta + ki + ta1 + (ii + n) * gj + k2i * ta3 + k1i * k2i + ii * k2i + n);
    [(l1, r1), (l2, r2), (l3, r3), (pl1, pr1), (pl2, pr2), (pl3, pr3)]
}

const SPLIT_NAMES: [&str; 6] = [
    "split:eps' sum",
    "split:eps'' sum",
    "split:eps sum",
    "split_p:eps'_p + eps'",
    "split_p:eps''_p + eps''",
    "split_p:eps_p + eps",
];

/// Checks the rotation identity for `eps`/`eps_p` and the three splitting
/// congruences (plain and `p` versions), exhaustively over degree parities and
/// then on random integer degrees in `-2..=3`.
pub fn lemma_sign_suite(params: &SignSuiteParams) -> SignLemmaReport {
    let mut rot_p = SignCheck::new("rotation:eps_p difference");
    let mut rot = SignCheck::new("rotation:eps difference");
    let mut split: Vec<SignCheck> = SPLIT_NAMES.iter().map(|n| SignCheck::new(n)).collect();

    let mut run_rotation = |a: &[i64], n: i64| {
        for t in 0..a.len() {
            let (lp, l, r) = rotation_case(a, n, t);
            rot_p.record(lp == r, || format!("degrees {a:?}, n = {n}, shift {t}"));
            rot.record(l == r, || format!("degrees {a:?}, shift {t}"));
        }
    };
    for n in 0..2 {
        for k in 1..=params.rotation_k {
            for a in parity_vectors(k) {
                run_rotation(&a, n);
            }
        }
    }

    let mut run_split = |a: &[i64], n: i64, gj: i64| {
        let k = a.len();
        for i in 1..=k + 1 {
            for k2 in 0..=k + 1 - i {
                let res = splitting_case(a, n, i, k2, gj);
                for (c, (l, r)) in split.iter_mut().zip(res) {
                    c.record(l == r, || {
                        format!("degrees {a:?}, n = {n}, i = {i}, k2 = {k2}, |gamma_J| = {gj}")
                    });
                }
            }
        }
    };
    for n in 0..2 {
        for gj in 0..2 {
            for k in 0..=params.splitting_k {
                for a in parity_vectors(k) {
                    run_split(&a, n, gj);
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.trials {
        let n = rng.gen_range(0..6);
        let k = rng.gen_range(1..=params.rotation_k.max(1));
        let a: Vec<i64> = (0..k).map(|_| rng.gen_range(-2..=3)).collect();
        run_rotation(&a, n);
        let k = rng.gen_range(0..=params.splitting_k);
        let a: Vec<i64> = (0..k).map(|_| rng.gen_range(-2..=3)).collect();
        let gj = rng.gen_range(-2..=3);
        run_split(&a, n, gj);
    }

    let mut checks = vec![rot_p, rot];
    checks.extend(split);
    SignLemmaReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitting_counts() {
        assert_eq!(split_enum(2, 3).len(), 6);
        assert_eq!(split_enum(0, 2).len(), 1);
        assert_eq!(split_enum(3, 2).len(), 4);
        for s in split_enum(4, 3) {
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rotation_of_pair() {
        // (x, y) with |x| = 1, |y| = 2: swapping gives s = 1*2 = 0 and s^[1] = 2*3 = 0.
        let (r, s, s1) = rotate(&['x', 'y'], &[1, 2], 1).unwrap();
        assert_eq!(r, vec!['y', 'x']);
        assert_eq!(s, Parity::EVEN);
        assert_eq!(s1, Parity::EVEN);
        let (_, s, s1) = rotate(&['x', 'y'], &[1, 1], 1).unwrap();
        assert_eq!(s, Parity::ODD);
        assert_eq!(s1, Parity::EVEN);
        assert!(rotate(&['x'], &[0], 1).is_err());
    }

    #[test]
    fn shuffle_of_two_odd() {
        assert_eq!(shuffle_sign(&[1, 1], &[1], &[0]), Ok(Parity::ODD));
        assert_eq!(shuffle_sign(&[1, 1], &[0], &[1]), Ok(Parity::EVEN));
        assert_eq!(shuffle_sign(&[1, 1], &[0], &[0]), Err(SignError::Overlap(0)));
        assert_eq!(shuffle_sign(&[1, 1], &[0], &[]), Err(SignError::Missing(1)));
    }

    #[test]
    fn eps_small_value() {
        assert_eq!(eps(&[1, 1]), Parity::ODD);
        assert_eq!(eps(&[]), Parity::ODD);
        assert_eq!(eps_p(&[], 3), Parity::EVEN);
    }

    #[test]
    fn eps_decomposes() {
        for k in 0..6 {
            for a in parity_vectors(k) {
                for n in 0..2 {
                    assert_eq!(eps(&a), eps_prime(k) + eps_dprime(&a));
                    assert_eq!(eps_p(&a, n), eps_p_prime(k, n) + eps_p_dprime(&a, n));
                }
            }
        }
    }

    #[test]
    fn suite_passes_small() {
        let r = lemma_sign_suite(&SignSuiteParams {
            rotation_k: 4,
            splitting_k: 4,
            trials: 100,
            seed: 7,
        });
        for c in &r.checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
