//! Exact integer and rational matrices.
//!
//! Everything in this module is arbitrary precision; there is no floating
//! point anywhere in the crate. Rational matrices are stored as an integer
//! matrix together with a positive common denominator in lowest terms, so
//! equality is structural.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Int = BigInt;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Int>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data size mismatch");
        IntMatrix { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![Int::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&v| int(v)));
        }
        IntMatrix::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<Int> {
        self.row(i).to_vec()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -self[(i, c)].clone();
            self[(i, c)] = v;
        }
    }

    /// row_i -= q * row_j
    pub fn subtract_row(&mut self, i: usize, j: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self[(i, c)] - q * &self[(j, c)];
            self[(i, c)] = v;
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = &out[(i, j)] + a * &other[(k, j)];
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn scale(&self, k: &Int) -> IntMatrix {
        IntMatrix::new(self.rows, self.cols, self.data.iter().map(|v| v * k).collect())
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = IntMatrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Fraction-free Bareiss determinant.
    pub fn det(&self) -> Int {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
                a[(i, k)] = Int::zero();
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in 0..self.rows {
            if i == skip_row {
                continue;
            }
            for j in 0..self.cols {
                if j == skip_col {
                    continue;
                }
                data.push(self[(i, j)].clone());
            }
        }
        IntMatrix::new(self.rows - 1, self.cols - 1, data)
    }

    /// Adjugate: adj(A) * A = det(A) * I.
    pub fn adjugate(&self) -> IntMatrix {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return IntMatrix::zero(0, 0);
        }
        let mut out = IntMatrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(i, j).det();
                out[(j, i)] = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Rational matrix as (integer matrix, positive denominator) in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatMatrix {
    pub num: IntMatrix,
    pub den: Int,
}

impl RatMatrix {
    pub fn new(num: IntMatrix, den: Int) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut m = RatMatrix { num, den };
        m.reduce();
        m
    }

    pub fn from_int(m: IntMatrix) -> Self {
        RatMatrix { num: m, den: Int::one() }
    }

    pub fn identity(n: usize) -> Self {
        RatMatrix::from_int(IntMatrix::identity(n))
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            self.num = self.num.scale(&int(-1));
        }
        let mut g = self.den.clone();
        for v in &self.num.data {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
        if !g.is_one() && !g.is_zero() {
            self.den = &self.den / &g;
            self.num = IntMatrix::new(
                self.num.rows,
                self.num.cols,
                self.num.data.iter().map(|v| v / &g).collect(),
            );
        }
    }

    pub fn rows(&self) -> usize {
        self.num.rows
    }

    pub fn cols(&self) -> usize {
        self.num.cols
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix::new(self.num.mul(&other.num), &self.den * &other.den)
    }

    pub fn is_identity(&self) -> bool {
        self.den.is_one() && self.num == IntMatrix::identity(self.num.rows)
    }

    /// Exact inverse; panics on singular input (callers check det first).
    pub fn inverse(&self) -> RatMatrix {
        let d = self.num.det();
        assert!(!d.is_zero(), "inverting singular matrix");
        // (N/q)^-1 = q * adj(N) / det(N)
        RatMatrix::new(self.num.adjugate().scale(&self.den), d)
    }

    /// Returns the integer matrix if the denominator is 1.
    pub fn to_int(&self) -> Option<IntMatrix> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    /// Apply to an integer vector; result as (numerators, denominator).
    pub fn mul_int_vec(&self, v: &[Int]) -> RatVec {
        RatVec::new(self.num.mul_vec(v), self.den.clone())
    }

    pub fn mul_rat_vec(&self, v: &RatVec) -> RatVec {
        RatVec::new(self.num.mul_vec(&v.num), &self.den * &v.den)
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "(1/{}){}", self.den, self.num)
        }
    }
}

/// Rational vector as (numerators, positive denominator) in lowest terms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatVec {
    pub num: Vec<Int>,
    pub den: Int,
}

impl RatVec {
    pub fn new(num: Vec<Int>, den: Int) -> Self {
        assert!(!den.is_zero());
        let mut v = RatVec { num, den };
        v.reduce();
        v
    }

    pub fn from_int(v: Vec<Int>) -> Self {
        RatVec { num: v, den: Int::one() }
    }

    pub fn zero(n: usize) -> Self {
        RatVec::from_int(vec![Int::zero(); n])
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for v in &mut self.num {
                *v = -v.clone();
            }
        }
        let mut g = self.den.clone();
        for v in &self.num {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
        if !g.is_one() && !g.is_zero() {
            self.den = &self.den / &g;
            for v in &mut self.num {
                *v = &*v / &g;
            }
        }
    }

    pub fn to_int(&self) -> Option<Vec<Int>> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        assert_eq!(self.num.len(), other.num.len());
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &other.den + b * &self.den)
            .collect();
        RatVec::new(num, &self.den * &other.den)
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        assert_eq!(self.num.len(), other.num.len());
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &other.den - b * &self.den)
            .collect();
        RatVec::new(num, &self.den * &other.den)
    }
}

pub fn vec_add(a: &[Int], b: &[Int]) -> Vec<Int> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Int], b: &[Int]) -> Vec<Int> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_neg(a: &[Int]) -> Vec<Int> {
    a.iter().map(|x| -x).collect()
}

pub fn vec_is_zero(a: &[Int]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn vec_i64(a: &[i64]) -> Vec<Int> {
    a.iter().map(|&v| int(v)).collect()
}
