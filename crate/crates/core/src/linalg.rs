//! Exact linear algebra over the rationals.
//!
//! [`Echelon`] is an incremental, fraction-free sparse echelon form over the
//! integers: vectors are cleared of denominators, pivots are eliminated by
//! integer cross-multiplication, and each reduced vector is divided by the gcd
//! of its entries. It optionally tracks the combination of inserted vectors
//! producing each row, which yields kernel vectors.
//!
//! [`dense_rank`] is a separate dense elimination over `BigRational`, used by
//! the naive homology oracle.

use crate::scalars::Q;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;

/// Sparse integer vector with sorted, nonzero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec(pub Vec<(usize, BigInt)>);

impl SparseVec {
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lead(&self) -> Option<usize> {
        self.0.first().map(|x| x.0)
    }

    pub fn get(&self, i: usize) -> BigInt {
        match self.0.binary_search_by_key(&i, |x| x.0) {
            Ok(k) => self.0[k].1.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    /// Integer vector proportional to the given rational entries.
    pub fn from_rationals(entries: &[(usize, Q)]) -> SparseVec {
        let mut e: Vec<(usize, Q)> = entries.iter().filter(|x| !x.1.is_zero()).cloned().collect();
        e.sort_by_key(|x| x.0);
        let mut merged: Vec<(usize, Q)> = Vec::with_capacity(e.len());
        for (i, q) in e {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += q,
                _ => merged.push((i, q)),
            }
        }
        merged.retain(|x| !x.1.is_zero());
        let l = merged
            .iter()
            .fold(BigInt::one(), |acc, (_, q)| acc.lcm(&BigInt::from(q.denom())));
        SparseVec(
            merged
                .into_iter()
                .map(|(i, q)| (i, BigInt::from(q.numer()) * (&l / BigInt::from(q.denom()))))
                .collect(),
        )
    }

    pub fn unit(i: usize) -> SparseVec {
        SparseVec(vec![(i, BigInt::one())])
    }

    /// `a * self - b * other`.
    fn combine(&self, a: &BigInt, other: &SparseVec, b: &BigInt) -> SparseVec {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let ki = self.0.get(i).map(|x| x.0);
            let kj = other.0.get(j).map(|x| x.0);
            match (ki, kj) {
                (Some(x), Some(y)) if x == y => {
                    let v = a * &self.0[i].1 - b * &other.0[j].1;
                    if !v.is_zero() {
                        out.push((x, v));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push((x, a * &self.0[i].1));
                    i += 1;
                }
                (Some(x), None) => {
                    out.push((x, a * &self.0[i].1));
                    i += 1;
                }
                (_, Some(y)) => {
                    out.push((y, -(b * &other.0[j].1)));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SparseVec(out)
    }

    fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, (_, v)| g.gcd(v))
    }

    fn divide(&mut self, g: &BigInt) {
        for (_, v) in self.0.iter_mut() {
            *v = &*v / g;
        }
    }
}

/// Incremental echelon form of a set of integer vectors.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, (SparseVec, SparseVec)>,
    inserted: usize,
    track: bool,
}

impl Echelon {
    /// With `track`, each inserted vector is tagged by its insertion index so
    /// that dependent insertions return a kernel combination.
    pub fn new(track: bool) -> Echelon {
        Echelon {
            pivots: BTreeMap::new(),
            inserted: 0,
            track,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn reduce(&self, mut v: SparseVec, mut comb: SparseVec) -> (SparseVec, SparseVec) {
        while let Some(lead) = v.lead() {
            let Some((p, pc)) = self.pivots.get(&lead) else { break };
            let a = p.0[0].1.clone();
            let b = v.0[0].1.clone();
            let g = a.gcd(&b);
            let (a, b) = (&a / &g, &b / &g);
            v = v.combine(&a, p, &b);
            if self.track {
                comb = comb.combine(&a, pc, &b);
            }
            let mut g = v.content();
            if self.track {
                g = g.gcd(&comb.content());
            }
            if !g.is_zero() && !g.is_one() {
                v.divide(&g);
                comb.divide(&g);
            }
        }
        (v, comb)
    }

    /// Inserts `v`; returns the kernel combination when `v` depends on earlier insertions.
    pub fn insert(&mut self, v: SparseVec) -> Option<SparseVec> {
        let tag = if self.track {
            SparseVec::unit(self.inserted)
        } else {
            SparseVec::default()
        };
        self.inserted += 1;
        let (mut r, mut c) = self.reduce(v, tag);
        match r.lead() {
            None => Some(c),
            Some(lead) => {
                if r.0[0].1.is_negative() {
                    for (_, x) in r.0.iter_mut().chain(c.0.iter_mut()) {
                        *x = -&*x;
                    }
                }
                self.pivots.insert(lead, (r, c));
                None
            }
        }
    }

    /// Whether `v` lies in the span of the inserted vectors.
    pub fn contains(&self, v: &SparseVec) -> bool {
        let mut r = v.clone();
        while let Some(lead) = r.lead() {
            let Some((p, _)) = self.pivots.get(&lead) else { return false };
            let a = p.0[0].1.clone();
            let b = r.0[0].1.clone();
            let g = a.gcd(&b);
            r = r.combine(&(&a / &g), p, &(&b / &g));
            let c = r.content();
            if !c.is_zero() && !c.is_one() {
                r.divide(&c);
            }
        }
        true
    }
}

/// Rank of a list of sparse rational columns.
pub fn rank_of_columns(cols: &[Vec<(usize, Q)>]) -> usize {
    let mut e = Echelon::new(false);
    for c in cols {
        e.insert(SparseVec::from_rationals(c));
    }
    e.rank()
}

/// A basis of the kernel of the map whose columns are given, as integer
/// combinations of the columns.
pub fn kernel_of_columns(cols: &[Vec<(usize, Q)>]) -> Vec<SparseVec> {
    let mut e = Echelon::new(true);
    cols.iter()
        .filter_map(|c| e.insert(SparseVec::from_rationals(c)))
        .collect()
}

/// Reduced row echelon form of integer vectors over the rationals; returns
/// nonzero rows scaled to integer vectors with positive leading entries.
pub fn reduced_echelon(rows: &[SparseVec], dim: usize) -> Vec<SparseVec> {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![BigRational::zero(); dim];
            for (i, x) in &r.0 {
                v[*i] = BigRational::from_integer(x.clone());
            }
            v
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..dim {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for x in m[pivot_row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..m.len() {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let (pr, rr) = if r < pivot_row {
                    let (a, b) = m.split_at_mut(pivot_row);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = m.split_at_mut(r);
                    (&a[pivot_row], &mut b[0])
                };
                for (x, y) in rr.iter_mut().zip(pr.iter()) {
                    if !y.is_zero() {
                        *x = &*x - &f * y;
                    }
                }
            }
        }
        pivot_row += 1;
        if pivot_row == m.len() {
            break;
        }
    }
    m.truncate(pivot_row);
    m.into_iter()
        .map(|row| {
            let l = row
                .iter()
                .filter(|x| !x.is_zero())
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            SparseVec(
                row.into_iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (i, (x * BigRational::from_integer(l.clone())).to_integer()))
                    .collect(),
            )
        })
        .collect()
}

/// Rank of a dense rational matrix given by rows, by plain Gaussian elimination.
pub fn dense_rank(mut m: Vec<Vec<BigRational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot = &top[rank];
        let inv = pivot[col].recip();
        for row in rest.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] * &inv;
            for c in col..cols {
                if !pivot[c].is_zero() {
                    row[c] = &row[c] - &f * &pivot[c];
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128) -> Q {
        Q::int(n)
    }

    #[test]
    fn sparse_and_dense_rank_agree() {
        let cols = vec![
            vec![(0, q(1)), (1, q(2))],
            vec![(0, q(2)), (1, q(4))],
            vec![(2, Q::new(1, 3))],
            vec![(0, q(1)), (1, q(2)), (2, q(5))],
        ];
        assert_eq!(rank_of_columns(&cols), 2);
        let mut dense = vec![vec![BigRational::zero(); 4]; 3];
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c {
                dense[*i][j] = BigRational::new(x.numer().into(), x.denom().into());
            }
        }
        assert_eq!(dense_rank(dense), 2);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let cols = vec![
            vec![(0, q(1)), (1, q(1))],
            vec![(1, q(1)), (2, q(1))],
            vec![(0, q(1)), (2, q(-1))],
        ];
        let k = kernel_of_columns(&cols);
        assert_eq!(k.len(), 1);
        // c0 - c1 - c2 = 0 up to sign
        let v = &k[0];
        let mut acc = vec![BigInt::zero(); 3];
        for (j, coef) in &v.0 {
            for (i, x) in &cols[*j] {
                acc[*i] += coef * BigInt::from(x.numer());
            }
        }
        assert!(acc.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn membership() {
        let mut e = Echelon::new(false);
        e.insert(SparseVec::from_rationals(&[(0, q(2)), (3, q(1))]));
        assert!(e.contains(&SparseVec::from_rationals(&[(0, q(-4)), (3, q(-2))])));
        assert!(!e.contains(&SparseVec::from_rationals(&[(3, q(1))])));
    }

    #[test]
    fn rref_rows() {
        let rows = vec![
            SparseVec::from_rationals(&[(0, q(2)), (1, q(4))]),
            SparseVec::from_rationals(&[(0, q(1)), (1, q(3))]),
        ];
        let r = reduced_echelon(&rows, 2);
        assert_eq!(r, vec![SparseVec::unit(0), SparseVec::unit(1)]);
    }
}
