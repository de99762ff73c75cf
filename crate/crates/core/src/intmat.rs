//! Exact integer linear algebra: determinants, Hermite and Smith normal forms,
//! row-lattice membership and unimodular inverses.
//!
//! Every routine runs first over checked `i128` and restarts over `BigInt`
//! when an intermediate value overflows.

use num_bigint::BigInt;
use num_traits::{Euclid, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub type Matrix = Vec<Vec<i64>>;

pub(crate) trait Ring: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
    /// Exact division (the caller guarantees divisibility).
    fn div_exact(&self, o: &Self) -> Option<Self>;
    /// Euclidean quotient: `self - q*o` lies in `[0, |o|)`.
    fn div_euclid(&self, o: &Self) -> Option<Self>;
    fn abs_lt(&self, o: &Self) -> bool;
    fn to_big(&self) -> BigInt;
}

impl Ring for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        self.checked_div(*o)
    }
    fn div_euclid(&self, o: &Self) -> Option<Self> {
        self.checked_div_euclid(*o)
    }
    fn abs_lt(&self, o: &Self) -> bool {
        self.unsigned_abs() < o.unsigned_abs()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn div_euclid(&self, o: &Self) -> Option<Self> {
        Some(Euclid::div_euclid(self, o))
    }
    fn abs_lt(&self, o: &Self) -> bool {
        self.abs() < o.abs()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

fn lift<T: Ring>(a: &[Vec<i64>]) -> Vec<Vec<T>> {
    a.iter()
        .map(|r| r.iter().map(|&x| T::from_i64(x)).collect())
        .collect()
}

fn to_big_matrix<T: Ring>(a: &[Vec<T>]) -> Vec<Vec<BigInt>> {
    a.iter().map(|r| r.iter().map(Ring::to_big).collect()).collect()
}

/// `row[i] -= q * row[j]` over the whole row.
fn row_axpy<T: Ring>(a: &mut [Vec<T>], i: usize, j: usize, q: &T) -> Option<()> {
    if q.is_zero() {
        return Some(());
    }
    let (src, dst) = if i < j {
        let (lo, hi) = a.split_at_mut(j);
        (&hi[0], &mut lo[i])
    } else {
        let (lo, hi) = a.split_at_mut(i);
        (&lo[j], &mut hi[0])
    };
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        if !s.is_zero() {
            *d = d.sub(&q.mul(s)?)?;
        }
    }
    Some(())
}

fn det_generic<T: Ring>(mut a: Vec<Vec<T>>) -> Option<T> {
    let n = a.len();
    if n == 0 {
        return Some(T::one());
    }
    let mut sign_neg = false;
    let mut prev = T::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Some(T::zero());
            };
            a.swap(k, p);
            sign_neg = !sign_neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].mul(&a[k][k])?.sub(&a[i][k].mul(&a[k][j])?)?;
                a[i][j] = t.div_exact(&prev)?;
            }
            a[i][k] = T::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign_neg {
        d.neg()
    } else {
        Some(d)
    }
}

/// Exact determinant of a square matrix (fraction-free elimination).
pub fn det(a: &[Vec<i64>]) -> BigInt {
    assert!(a.iter().all(|r| r.len() == a.len()), "det of non-square matrix");
    match det_generic::<i128>(lift(a)) {
        Some(d) => BigInt::from(d),
        None => det_generic::<BigInt>(lift(a)).expect("bigint arithmetic is total"),
    }
}

/// Determinant when it fits in an `i128`; `None` only on overflow.
pub fn det_i128(a: &[Vec<i64>]) -> Option<i128> {
    det_generic::<i128>(lift(a))
}

/// Row-style Hermite normal form `U * A = H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteForm {
    /// Nonzero rows of `H` (upper echelon, positive pivots, reduced above).
    pub h: Vec<Vec<BigInt>>,
    /// Column index of each pivot.
    pub pivots: Vec<usize>,
    /// The unimodular transform, all rows (including those mapping to zero).
    pub u: Vec<Vec<BigInt>>,
}

impl HermiteForm {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

type HnfParts<T> = (Vec<Vec<T>>, Vec<usize>, Vec<Vec<T>>);

fn hnf_generic<T: Ring>(mut a: Vec<Vec<T>>, track: bool) -> Option<HnfParts<T>> {
    let r = a.len();
    let c = a.first().map_or(0, Vec::len);
    let mut u: Vec<Vec<T>> = if track {
        (0..r)
            .map(|i| (0..r).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect()
    } else {
        Vec::new()
    };
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..c {
        if row == r {
            break;
        }
        let mut found = false;
        loop {
            let mut best: Option<usize> = None;
            for i in row..r {
                if !a[i][col].is_zero() && best.map_or(true, |b| a[i][col].abs_lt(&a[b][col])) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            found = true;
            a.swap(row, b);
            if track {
                u.swap(row, b);
            }
            let mut clear = true;
            for i in row + 1..r {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_euclid(&a[row][col])?;
                row_axpy(&mut a, i, row, &q)?;
                if track {
                    row_axpy(&mut u, i, row, &q)?;
                }
                if !a[i][col].is_zero() {
                    clear = false;
                }
            }
            if clear {
                break;
            }
        }
        if !found {
            continue;
        }
        if a[row][col].is_negative() {
            for x in a[row].iter_mut() {
                *x = x.neg()?;
            }
            if track {
                for x in u[row].iter_mut() {
                    *x = x.neg()?;
                }
            }
        }
        for i in 0..row {
            let q = a[i][col].div_euclid(&a[row][col])?;
            row_axpy(&mut a, i, row, &q)?;
            if track {
                row_axpy(&mut u, i, row, &q)?;
            }
        }
        pivots.push(col);
        row += 1;
    }
    a.truncate(pivots.len());
    Some((a, pivots, u))
}

/// Hermite normal form with transform.
pub fn hnf(a: &[Vec<i64>]) -> HermiteForm {
    let (h, pivots, u) = match hnf_generic::<i128>(lift(a), true) {
        Some((h, p, u)) => (to_big_matrix(&h), p, to_big_matrix(&u)),
        None => {
            let (h, p, u) = hnf_generic::<BigInt>(lift(a), true).expect("bigint arithmetic is total");
            (h, p, u)
        }
    };
    HermiteForm { h, pivots, u }
}

fn rem<T: Ring>(a: &T, p: &T) -> Option<T> {
    a.sub(&p.mul(&a.div_euclid(p)?)?)
}

fn snf_generic<T: Ring>(mut a: Vec<Vec<T>>) -> Option<Vec<T>> {
    let r = a.len();
    let c = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    for t in 0..r.min(c) {
        // Pick the smallest nonzero entry of the trailing block as pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs_lt(&a[bi][bj])) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..r {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_euclid(&a[t][t])?;
                row_axpy(&mut a, i, t, &q)?;
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_euclid(&a[t][t])?;
                for i in t..r {
                    let v = a[i][j].sub(&q.mul(&a[i][t])?)?;
                    a[i][j] = v;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // Move the smallest remaining entry of row/column t to the pivot.
                let mut best = (t, t);
                for i in t..r {
                    if !a[i][t].is_zero() && a[i][t].abs_lt(&a[best.0][best.1]) {
                        best = (i, t);
                    }
                }
                for j in t..c {
                    if !a[t][j].is_zero() && a[t][j].abs_lt(&a[best.0][best.1]) {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
                continue;
            }
            // Divisibility: fold any offending row into row t and redo.
            let p = a[t][t].clone();
            let mut bad = None;
            'scan: for i in t + 1..r {
                for j in t + 1..c {
                    if !rem(&a[i][j], &p)?.is_zero() {
                        bad = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let one = T::one().neg()?;
                    row_axpy(&mut a, t, i, &one)?;
                }
                None => break,
            }
        }
        let p = a[t][t].clone();
        diag.push(if p.is_negative() { p.neg()? } else { p });
    }
    Some(diag)
}

/// Nonzero Smith invariant factors (their count is the rank).
pub fn invariant_factors(a: &[Vec<i64>]) -> Vec<BigInt> {
    match snf_generic::<i128>(lift(a)) {
        Some(d) => d.into_iter().map(BigInt::from).collect(),
        None => snf_generic::<BigInt>(lift(a)).expect("bigint arithmetic is total"),
    }
}

fn member_generic<T: Ring>(rows: Vec<Vec<T>>, x: Vec<T>) -> Option<bool> {
    let (h, pivots, _) = hnf_generic(rows, false)?;
    reduce_generic(&h, &pivots, x).map(|rem| rem.iter().all(Ring::is_zero))
}

fn reduce_generic<T: Ring>(h: &[Vec<T>], pivots: &[usize], mut x: Vec<T>) -> Option<Vec<T>> {
    for (row, &pc) in h.iter().zip(pivots) {
        if x[pc].is_zero() {
            continue;
        }
        let q = x[pc].div_euclid(&row[pc])?;
        if !x[pc].sub(&q.mul(&row[pc])?)?.is_zero() {
            return Some(x);
        }
        for (xi, ri) in x.iter_mut().zip(row) {
            if !ri.is_zero() {
                *xi = xi.sub(&q.mul(ri)?)?;
            }
        }
    }
    Some(x)
}

/// Whether `x` lies in the integer row span of `rows`.
pub fn in_row_lattice(rows: &[Vec<i64>], x: &[i64]) -> bool {
    if rows.is_empty() {
        return x.iter().all(|&v| v == 0);
    }
    match member_generic::<i128>(lift(rows), x.iter().map(|&v| v as i128).collect()) {
        Some(b) => b,
        None => member_generic::<BigInt>(lift(rows), x.iter().map(|&v| BigInt::from(v)).collect())
            .expect("bigint arithmetic is total"),
    }
}

/// Exact inverse of a square integer matrix with determinant ±1, or `None`.
pub fn unimodular_inverse(a: &[Vec<i64>]) -> Option<Vec<Vec<BigInt>>> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let f = hnf(a);
    let identity = f.rank() == n
        && f.h.iter().enumerate().all(|(i, r)| {
            r.iter().enumerate().all(|(j, v)| if i == j { v.is_one() } else { Zero::is_zero(v) })
        });
    identity.then_some(f.u)
}

/// Same as [`unimodular_inverse`] but insists on `i64` entries.
pub fn unimodular_inverse_i64(a: &[Vec<i64>]) -> Option<Matrix> {
    unimodular_inverse(a).and_then(|m| to_i64(&m))
}

pub fn to_i64(m: &[Vec<BigInt>]) -> Option<Matrix> {
    m.iter()
        .map(|r| r.iter().map(ToPrimitive::to_i64).collect::<Option<Vec<_>>>())
        .collect()
}

/// `A * B` with overflow detection.
pub fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<Matrix> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            debug_assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| {
                    let mut s: i64 = 0;
                    for k in 0..inner {
                        s = s.checked_add(row[k].checked_mul(b[k][j])?)?;
                    }
                    Some(s)
                })
                .collect()
        })
        .collect()
}

/// `A * B` over `BigInt`.
pub fn mul_big(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn transpose(a: &[Vec<i64>]) -> Matrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}
