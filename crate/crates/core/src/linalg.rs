//! Exact sparse linear algebra over ℚ and multimodular characteristic
//! polynomials of integer matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Rational number with an `i64` fast path.
#[derive(Clone, PartialEq, Eq)]
pub enum Q {
    Small(i64, i64),
    Big(Box<Rational>),
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

impl Q {
    pub const ZERO: Q = Q::Small(0, 1);
    pub const ONE: Q = Q::Small(1, 1);

    pub fn int(n: i64) -> Q {
        Q::Small(n, 1)
    }

    fn from_i128(n: i128, d: i128) -> Q {
        let g = gcd_i128(n, d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Q::Small(a, b),
            _ => Q::Big(Box::new(Rational::new(BigInt::from(n), BigInt::from(d)))),
        }
    }

    pub fn from_rational(r: &Rational) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) => Q::Small(a, b),
            _ => Q::Big(Box::new(r.clone())),
        }
    }

    fn normalize(r: Rational) -> Q {
        Q::from_rational(&r)
    }

    pub fn to_rational(&self) -> Rational {
        match self {
            Q::Small(a, b) => Rational::new(BigInt::from(*a), BigInt::from(*b)),
            Q::Big(r) => (**r).clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Q::Small(a, b) => *a as f64 / *b as f64,
            Q::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _)) || matches!(self, Q::Big(r) if r.is_zero())
    }

    pub fn recip(&self) -> Q {
        match self {
            Q::Small(a, b) => Q::from_i128(*b as i128, *a as i128),
            Q::Big(r) => Q::normalize(r.recip()),
        }
    }

    pub fn div(&self, o: &Q) -> Q {
        self * &o.recip()
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

impl Add for &Q {
    type Output = Q;
    fn add(self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                if b == d {
                    Q::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    Q::from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
                }
            }
            _ => Q::normalize(self.to_rational() + o.to_rational()),
        }
    }
}

impl Sub for &Q {
    type Output = Q;
    fn sub(self, o: &Q) -> Q {
        self + &(-o)
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::Small(a, b) => Q::from_i128(-(*a as i128), *b as i128),
            Q::Big(r) => Q::normalize(-(**r).clone()),
        }
    }
}

impl Mul for &Q {
    type Output = Q;
    fn mul(self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
            _ => Q::normalize(self.to_rational() * o.to_rational()),
        }
    }
}

/// Sparse vector with strictly increasing indices and no stored zeros.
pub type SparseVec = Vec<(usize, Q)>;

/// `x + c·y`
pub fn axpy(x: &SparseVec, c: &Q, y: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i].clone());
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            out.push((y[j].0, c * &y[j].1));
            j += 1;
        } else {
            let v = &x[i].1 + &(c * &y[j].1);
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn sparse_from_pairs(mut pairs: Vec<(usize, Q)>) -> SparseVec {
    pairs.sort_by_key(|p| p.0);
    let mut out: SparseVec = Vec::with_capacity(pairs.len());
    for (i, v) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 = &last.1 + &v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|p| !p.1.is_zero());
    out
}

pub fn sparse_get(v: &SparseVec, i: usize) -> Option<&Q> {
    v.binary_search_by_key(&i, |p| p.0).ok().map(|k| &v[k].1)
}

/// Column-major sparse matrix over ℚ.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, ncols: usize) -> SparseMatrix {
        SparseMatrix { rows, cols: vec![Vec::new(); ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut pairs = Vec::new();
        for (j, c) in v {
            for (i, a) in &self.cols[*j] {
                pairs.push((*i, a * c));
            }
        }
        sparse_from_pairs(pairs)
    }

    /// `self · other`
    pub fn compose(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), other.rows);
        SparseMatrix { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols()]; self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c {
                d[*i][j] = v.to_f64();
            }
        }
        d
    }

    pub fn rank(&self) -> usize {
        column_reduce(self, false).rank
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub rank: usize,
    /// Columns that reduced to zero; each carries one kernel vector.
    pub zero_cols: Vec<usize>,
    /// Kernel basis; `kernel[k]` has coefficient 1 at `zero_cols[k]` and
    /// 0 at every other zero column.
    pub kernel: Vec<SparseVec>,
}

/// Left-to-right column reduction with lowest-row pivots.
pub fn column_reduce(m: &SparseMatrix, track_kernel: bool) -> Reduction {
    let n = m.ncols();
    let mut pivot_col: Vec<usize> = vec![usize::MAX; m.rows];
    let mut reduced: Vec<SparseVec> = vec![Vec::new(); n];
    let mut transforms: Vec<SparseVec> = if track_kernel { vec![Vec::new(); n] } else { Vec::new() };
    let mut rank = 0;
    let mut zero_cols = Vec::new();
    let mut kernel = Vec::new();
    for j in 0..n {
        let mut col = m.cols[j].clone();
        let mut v: SparseVec = if track_kernel { vec![(j, Q::ONE)] } else { Vec::new() };
        while let Some((low, val)) = col.last().cloned() {
            let k = pivot_col[low];
            if k == usize::MAX {
                pivot_col[low] = j;
                break;
            }
            let pk = &reduced[k];
            let factor = -&val.div(&pk.last().unwrap().1);
            col = axpy(&col, &factor, pk);
            if track_kernel {
                v = axpy(&v, &factor, &transforms[k]);
            }
        }
        if col.is_empty() {
            zero_cols.push(j);
            if track_kernel {
                kernel.push(v);
            }
        } else {
            rank += 1;
            reduced[j] = col;
            if track_kernel {
                transforms[j] = v;
            }
        }
    }
    Reduction { rank, zero_cols, kernel }
}

/// Signed permutation acting on basis vectors: `e_x ↦ sign[x]·e_{perm[x]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPerm {
    pub perm: Vec<usize>,
    pub sign: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> SignedPerm {
        SignedPerm { perm: (0..n).collect(), sign: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let pairs = v
            .iter()
            .map(|(i, c)| (self.perm[*i], if self.sign[*i] < 0 { -c } else { c.clone() }))
            .collect();
        sparse_from_pairs(pairs)
    }

    pub fn trace(&self) -> i64 {
        (0..self.perm.len()).filter(|&i| self.perm[i] == i).map(|i| self.sign[i] as i64).sum()
    }

    pub fn as_matrix(&self) -> SparseMatrix {
        let cols = (0..self.perm.len()).map(|i| vec![(self.perm[i], Q::int(self.sign[i] as i64))]).collect();
        SparseMatrix { rows: self.perm.len(), cols }
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        for &p in &self.perm {
            if p >= seen.len() || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        self.sign.len() == self.perm.len() && self.sign.iter().all(|&s| s == 1 || s == -1)
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    if p >> 32 == 0 {
        return (a * b) % p;
    }
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below `2^31`, descending.
pub fn primes_31bit() -> impl Iterator<Item = u64> {
    (1u64 << 30..(1u64 << 31)).rev().filter(|&n| is_prime(n))
}

/// Characteristic polynomial `det(xI − M)` mod `p` via Hessenberg reduction;
/// coefficients in increasing degree.
pub fn charpoly_mod(m: &[Vec<u64>], p: u64) -> Vec<u64> {
    let n = m.len();
    let mut h: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|&x| x % p).collect()).collect();
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h[i][j] != 0) else { continue };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = inv_mod(h[j + 1][j], p);
        for k in j + 2..n {
            if h[k][j] == 0 {
                continue;
            }
            let u = mul_mod(h[k][j], inv, p);
            // row_k -= u·row_{j+1}
            let (top, bottom) = h.split_at_mut(k);
            let src = &top[j + 1];
            for (dst, &s) in bottom[0].iter_mut().zip(src.iter()) {
                *dst = (*dst + p - mul_mod(u, s, p)) % p;
            }
            // col_{j+1} += u·col_k
            for row in h.iter_mut() {
                let add = mul_mod(u, row[k], p);
                row[j + 1] = (row[j + 1] + add) % p;
            }
        }
    }
    // Hessenberg recurrence, 1-indexed as p_m
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for mm in 1..=n {
        let a = h[mm - 1][mm - 1];
        let prev = &polys[mm - 1];
        let mut next = vec![0u64; mm + 1];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] = (next[i + 1] + c) % p;
            next[i] = (next[i] + p - mul_mod(a, c, p)) % p;
        }
        let mut t = 1u64;
        for i in 1..mm {
            t = mul_mod(t, h[mm - i][mm - i - 1], p);
            if t == 0 {
                break;
            }
            let coef = mul_mod(h[mm - i - 1][mm - 1], t, p);
            if coef == 0 {
                continue;
            }
            for (d, &c) in polys[mm - i - 1].iter().enumerate() {
                next[d] = (next[d] + p - mul_mod(coef, c, p)) % p;
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// Exact characteristic polynomial of an integer matrix whose coefficients
/// are known to be bounded by `bound` in absolute value.
pub fn charpoly_integer(m: &[Vec<i64>], bound: &BigInt) -> Vec<BigInt> {
    let n = m.len();
    let target: BigInt = bound * 2 + 1;
    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    for p in primes_31bit() {
        let mp: Vec<Vec<u64>> =
            m.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect()).collect();
        let cp = charpoly_mod(&mp, p);
        let pb = BigInt::from(p);
        let minv = inv_mod((&modulus % &pb).to_u64().unwrap(), p);
        for (k, c) in cp.iter().enumerate() {
            let cur = (&acc[k] % &pb).to_u64().unwrap();
            let t = mul_mod((c + p - cur) % p, minv, p);
            acc[k] += &modulus * BigInt::from(t);
        }
        modulus *= &pb;
        if modulus > target {
            break;
        }
    }
    let half = &modulus >> 1;
    acc.into_iter().map(|x| if x > half { x - &modulus } else { x }).collect()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Rank of an integer matrix modulo `p`.
pub fn rank_mod(m: &[Vec<i64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(piv, rank);
        let inv = inv_mod(a[rank][c], p);
        for r in rank + 1..rows {
            if a[r][c] != 0 {
                let u = mul_mod(a[r][c], inv, p);
                let (top, bottom) = a.split_at_mut(r);
                for (dst, &s) in bottom[0].iter_mut().zip(top[rank].iter()) {
                    *dst = (*dst + p - mul_mod(u, s, p)) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.abs().gcd(&b.abs())
}
