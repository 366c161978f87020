//! Monic integer polynomials: characteristic polynomials and extraction of
//! unimodular content (divisors with constant term ±1) by bounded trial
//! division. Degrees and coefficient heights here are desk scale; the
//! enumeration refuses rather than silently truncating when the candidate
//! space exceeds its budget.

use crate::matrix::{int, Int, IntMatrix};
use crate::Error;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Coefficients low to high; always trimmed and (for our inputs) monic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntPoly(pub Vec<Int>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<Int>) -> IntPoly {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn one() -> IntPoly {
        IntPoly(vec![Int::one()])
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }

    pub fn constant_term(&self) -> &Int {
        &self.0[0]
    }

    pub fn eval(&self, x: &Int) -> Int {
        let mut acc = Int::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluate at a square matrix.
    pub fn eval_matrix(&self, a: &IntMatrix) -> IntMatrix {
        let n = a.rows();
        let mut acc = IntMatrix::zero(n, n);
        for c in self.0.iter().rev() {
            acc = acc.mul(a);
            for i in 0..n {
                let v = &acc[(i, i)] + c;
                acc[(i, i)] = v;
            }
        }
        acc
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = vec![Int::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Exact division by a monic divisor; None when it does not divide.
    pub fn div_exact(&self, divisor: &IntPoly) -> Option<IntPoly> {
        assert!(divisor.0.last().map_or(false, |c| c.is_one()), "monic divisor expected");
        if divisor.degree() > self.degree() {
            return None;
        }
        let mut rem = self.0.clone();
        let d = divisor.degree();
        let mut quot = vec![Int::zero(); self.degree() - d + 1];
        for i in (0..quot.len()).rev() {
            let c = rem[i + d].clone();
            quot[i] = c.clone();
            if c.is_zero() {
                continue;
            }
            for (j, b) in divisor.0.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &c * b;
            }
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(IntPoly::new(quot))
        } else {
            None
        }
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match i {
                0 => write!(f, "{}", a)?,
                1 => {
                    if a.is_one() {
                        write!(f, "u")?
                    } else {
                        write!(f, "{}u", a)?
                    }
                }
                _ => {
                    if a.is_one() {
                        write!(f, "u^{}", i)?
                    } else {
                        write!(f, "{}u^{}", a, i)?
                    }
                }
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Characteristic polynomial det(uI - A) by the Faddeev-LeVerrier scheme
/// (all divisions exact over Z).
pub fn char_poly(a: &IntMatrix) -> IntPoly {
    assert!(a.is_square());
    let n = a.rows();
    let mut coeffs = vec![Int::zero(); n + 1];
    coeffs[n] = Int::one();
    let mut m = IntMatrix::identity(n);
    for k in 1..=n {
        m = a.mul(&m);
        let tr: Int = (0..n).map(|i| m[(i, i)].clone()).sum();
        let c = -tr / int(k as i64);
        coeffs[n - k] = c.clone();
        for i in 0..n {
            let v = &m[(i, i)] + &c;
            m[(i, i)] = v;
        }
    }
    IntPoly::new(coeffs)
}

fn binomial(n: usize, k: usize) -> Int {
    let mut r = Int::one();
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

const CANDIDATE_BUDGET: u128 = 4_000_000;

/// Split a monic polynomial as (unimodular part, rest): the unimodular part
/// is the product of all monic divisors with constant term ±1, extracted by
/// trial division with Cauchy-bound coefficient ranges.
pub fn unimodular_split(f: &IntPoly) -> Result<(IntPoly, IntPoly), Error> {
    assert!(f.0.last().map_or(false, |c| c.is_one()), "monic input expected");
    let mut rest = f.clone();
    let mut uni = IntPoly::one();
    // Cauchy root bound of the original polynomial bounds all divisor roots.
    let rho: Int = f.0[..f.degree()]
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Int::zero)
        + 1;
    'outer: loop {
        if rest.degree() == 0 {
            break;
        }
        for d in 1..=rest.degree() {
            if let Some(g) = find_unimodular_divisor(&rest, d, &rho)? {
                rest = rest.div_exact(&g).expect("divisor verified");
                uni = uni.mul(&g);
                continue 'outer;
            }
        }
        break;
    }
    Ok((uni, rest))
}

/// Search for a monic degree-d divisor of f with constant term ±1.
fn find_unimodular_divisor(f: &IntPoly, d: usize, rho: &Int) -> Result<Option<IntPoly>, Error> {
    if d == f.degree() {
        // f itself qualifies iff its constant term is ±1.
        if f.constant_term().abs().is_one() {
            return Ok(Some(f.clone()));
        }
        return Ok(None);
    }
    // Degree-1 divisors with constant ±1 are exactly u - 1 and u + 1.
    if d == 1 {
        for c0 in [int(-1), int(1)] {
            let g = IntPoly::new(vec![c0, Int::one()]);
            if f.div_exact(&g).is_some() {
                return Ok(Some(g));
            }
        }
        return Ok(None);
    }
    // Coefficient i of a degree-d divisor is an elementary symmetric function
    // of d roots bounded by rho.
    let mut bounds = Vec::with_capacity(d - 1);
    let mut budget: u128 = 2; // the ±1 constant term
    for i in 1..d {
        let b = binomial(d, i) * rho.pow((d - i) as u32);
        let b128 = u128::try_from(&b).unwrap_or(u128::MAX);
        budget = budget.saturating_mul(2 * b128 + 1);
        if budget > CANDIDATE_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "trial division at degree {} exceeds the candidate budget",
                d
            )));
        }
        bounds.push(b);
    }
    let f1 = f.eval(&int(1));
    let fm1 = f.eval(&int(-1));
    let mut coeffs: Vec<Int> = bounds.iter().map(|b| -b.clone()).collect();
    loop {
        for c0 in [int(1), int(-1)] {
            let mut g_coeffs = Vec::with_capacity(d + 1);
            g_coeffs.push(c0);
            g_coeffs.extend(coeffs.iter().cloned());
            g_coeffs.push(Int::one());
            let g = IntPoly::new(g_coeffs);
            if g.degree() != d {
                continue;
            }
            // cheap divisibility filters at u = ±1 before exact division
            let g1 = g.eval(&int(1));
            if !(f1.is_zero() || (!g1.is_zero() && f1.is_multiple_of(&g1))) {
                continue;
            }
            let gm1 = g.eval(&int(-1));
            if !(fm1.is_zero() || (!gm1.is_zero() && fm1.is_multiple_of(&gm1))) {
                continue;
            }
            if f.div_exact(&g).is_some() {
                return Ok(Some(g));
            }
        }
        // odometer over the middle coefficients
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return Ok(None);
            }
            coeffs[i] = &coeffs[i] + 1u32;
            if coeffs[i] <= bounds[i] {
                break;
            }
            coeffs[i] = -bounds[i].clone();
            i += 1;
        }
    }
}

/// Exactness certificate for a single integer matrix: true iff the
/// characteristic polynomial has no divisor with constant term ±1.
pub fn has_no_unimodular_factor(a: &IntMatrix) -> Result<bool, Error> {
    let (uni, _) = unimodular_split(&char_poly(a))?;
    Ok(uni.is_one())
}


#[cfg(test)]
mod budget_tests {
    use super::*;

    #[test]
    fn oversized_factorization_reports_budget() {
        // a polynomial with a huge root bound exhausts the candidate budget
        // instead of silently truncating
        let mut coeffs = vec![int(0); 7];
        coeffs[0] = int(1_000_003);
        coeffs[3] = int(999_999);
        coeffs[6] = int(1);
        let f = IntPoly::new(coeffs);
        assert!(matches!(
            unimodular_split(&f),
            Err(crate::Error::BudgetExceeded(_))
        ));
    }
}
