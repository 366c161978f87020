//! Action specifications for the two backends: integer-matrix actions on
//! Z^n and full shifts over a finite group. Validation covers injectivity,
//! presentation relations, and a bounded faithfulness certificate.

use crate::matrix::{Int, IntMatrix, RatMatrix};
use crate::monoid::{MonoidKind, MonoidPresentation, Word};
use crate::report::Verdict;
use crate::shift::{FiniteGroup, ShiftElem};
use crate::Error;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// An action of the monoid on Z^n by injective integer matrices.
#[derive(Clone, Debug)]
pub struct MatrixAction {
    pub monoid: MonoidPresentation,
    pub dim: usize,
    pub gens: Vec<IntMatrix>,
}

/// The full S-shift over a finite group sigma.
#[derive(Clone, Debug)]
pub struct ShiftAction {
    pub monoid: MonoidPresentation,
    pub sigma: FiniteGroup,
}

#[derive(Clone, Debug)]
pub enum Action {
    Matrix(MatrixAction),
    Shift(ShiftAction),
}

/// A group element of the acted-on group: a vector of Z^n or a
/// finite-support shift element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum GElem {
    Vec(Vec<Int>),
    Shift(ShiftElem),
}

impl GElem {
    pub fn as_vec(&self) -> &Vec<Int> {
        match self {
            GElem::Vec(v) => v,
            GElem::Shift(_) => panic!("expected vector element"),
        }
    }

    pub fn as_shift(&self) -> &ShiftElem {
        match self {
            GElem::Shift(s) => s,
            GElem::Vec(_) => panic!("expected shift element"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// Per generator: injective (nonzero determinant / shift always).
    pub injective: Vec<bool>,
    /// Presentation relations hold as matrix identities.
    pub relations_ok: bool,
    /// Bounded faithfulness certificate.
    pub faithful: Verdict,
    pub faithful_bound: usize,
    /// Every generator invertible over Z (matrix) / over S (shift: never).
    pub automorphic: bool,
}

impl Action {
    pub fn monoid(&self) -> &MonoidPresentation {
        match self {
            Action::Matrix(a) => &a.monoid,
            Action::Shift(a) => &a.monoid,
        }
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, Action::Matrix(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Action::Matrix(a) => {
                let gens: Vec<String> = a
                    .gens
                    .iter()
                    .enumerate()
                    .map(|(i, m)| format!("{} -> {}", a.monoid.generator_name(i), m))
                    .collect();
                format!("{} acting on Z^{} by {}", a.monoid.describe(), a.dim, gens.join(", "))
            }
            Action::Shift(a) => {
                format!("full {}-shift over {}", a.monoid.describe(), a.sigma.name)
            }
        }
    }

    pub fn identity_elem(&self) -> GElem {
        match self {
            Action::Matrix(a) => GElem::Vec(vec![Int::zero(); a.dim]),
            Action::Shift(_) => GElem::Shift(ShiftElem::identity()),
        }
    }
}

impl MatrixAction {
    pub fn new(monoid: MonoidPresentation, dim: usize, gens: Vec<IntMatrix>) -> Result<Self, Error> {
        if gens.len() != monoid.num_generators() {
            return Err(Error::InvalidAction(format!(
                "expected {} generator matrices, got {}",
                monoid.num_generators(),
                gens.len()
            )));
        }
        for (i, g) in gens.iter().enumerate() {
            if !g.is_square() || g.rows() != dim {
                return Err(Error::InvalidAction(format!(
                    "generator {} is not a {}x{} matrix",
                    monoid.generator_name(i),
                    dim,
                    dim
                )));
            }
        }
        Ok(MatrixAction { monoid, dim, gens })
    }

    /// Evaluate the matrix of a monoid word.
    pub fn matrix_of_word(&self, w: &Word) -> IntMatrix {
        match w {
            Word::Free(letters) => {
                let mut m = IntMatrix::identity(self.dim);
                for &l in letters {
                    m = m.mul(&self.gens[l]);
                }
                m
            }
            Word::Abelian(exps) => {
                let mut m = IntMatrix::identity(self.dim);
                for (i, &e) in exps.iter().enumerate() {
                    if e > 0 {
                        m = m.mul(&self.gens[i].pow(e));
                    }
                }
                m
            }
            Word::Numeric(v) => {
                let counts = self
                    .monoid
                    .numeric_factorization(*v)
                    .expect("word must belong to the numerical monoid");
                let mut m = IntMatrix::identity(self.dim);
                for (i, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        m = m.mul(&self.gens[i].pow(c));
                    }
                }
                m
            }
        }
    }

    /// Rational matrix of a word over {gen, gen^{-1}} in the enveloping
    /// group of the globalized action.
    pub fn rat_matrix_of_signed_word(&self, w: &[(usize, bool)]) -> RatMatrix {
        let mut m = RatMatrix::identity(self.dim);
        for &(g, inverse) in w {
            let f = RatMatrix::from_int(self.gens[g].clone());
            m = m.mul(&if inverse { f.inverse() } else { f });
        }
        m
    }
}

impl ShiftAction {
    pub fn new(monoid: MonoidPresentation, sigma: FiniteGroup) -> Result<Self, Error> {
        if sigma.order < 2 {
            return Err(Error::InvalidAction("sigma must be non-trivial".into()));
        }
        // every supported kind has a non-invertible element, so the shift is
        // non-automorphic by construction
        Ok(ShiftAction { monoid, sigma })
    }
}

/// Apply the action of a word to a group element.
pub fn apply(action: &Action, w: &Word, x: &GElem) -> GElem {
    match (action, x) {
        (Action::Matrix(a), GElem::Vec(v)) => GElem::Vec(a.matrix_of_word(w).mul_vec(v)),
        (Action::Shift(a), GElem::Shift(s)) => {
            GElem::Shift(s.translate_support(&a.monoid, w))
        }
        _ => panic!("element does not match action backend"),
    }
}

/// Validate the standing assumptions; hard violations (singular generator,
/// broken relation, bad sigma) are errors, the faithfulness certificate is a
/// three-valued verdict.
pub fn validate(action: &Action, faithful_bound: usize) -> Result<ValidationReport, Error> {
    match action {
        Action::Matrix(a) => {
            let mut injective = Vec::new();
            let mut automorphic = true;
            for (i, g) in a.gens.iter().enumerate() {
                let d = g.det();
                if d.is_zero() {
                    return Err(Error::InvalidAction(format!(
                        "generator {} is singular",
                        a.monoid.generator_name(i)
                    )));
                }
                if !d.abs().is_one() {
                    automorphic = false;
                }
                injective.push(true);
            }
            // relations of the presentation
            let relations_ok = match &a.monoid.kind {
                MonoidKind::Free { .. } => true,
                MonoidKind::FreeAbelian { .. } => {
                    let mut ok = true;
                    'outer: for i in 0..a.gens.len() {
                        for j in i + 1..a.gens.len() {
                            if a.gens[i].mul(&a.gens[j]) != a.gens[j].mul(&a.gens[i]) {
                                ok = false;
                                break 'outer;
                            }
                        }
                    }
                    ok
                }
                MonoidKind::Numerical { generators } => {
                    let mut ok = true;
                    'outer2: for i in 0..a.gens.len() {
                        for j in 0..a.gens.len() {
                            if i == j {
                                continue;
                            }
                            if a.gens[i].mul(&a.gens[j]) != a.gens[j].mul(&a.gens[i])
                                || a.gens[i].pow(generators[j]) != a.gens[j].pow(generators[i])
                            {
                                ok = false;
                                break 'outer2;
                            }
                        }
                    }
                    ok
                }
            };
            if !relations_ok {
                return Err(Error::InvalidAction(
                    "generator matrices violate the monoid presentation relations".into(),
                ));
            }
            // faithfulness: distinct words up to the bound give distinct matrices
            let faithful = faithfulness_verdict(a, faithful_bound);
            Ok(ValidationReport {
                injective,
                relations_ok,
                faithful,
                faithful_bound,
                automorphic,
            })
        }
        Action::Shift(a) => {
            // shifts are always faithful: left translation of S on itself is
            let faithful = Verdict::holds("left translation on the index set is faithful");
            Ok(ValidationReport {
                injective: vec![true; a.monoid.num_generators()],
                relations_ok: true,
                faithful,
                faithful_bound,
                automorphic: false,
            })
        }
    }
}

fn faithfulness_verdict(a: &MatrixAction, bound: usize) -> Verdict {
    let mut seen: BTreeMap<IntMatrix, Word> = BTreeMap::new();
    for w in a.monoid.words_up_to(bound) {
        let m = a.matrix_of_word(&w);
        if let Some(prev) = seen.get(&m) {
            if *prev != w {
                return Verdict::fails(format!(
                    "words {} and {} act by the same matrix",
                    a.monoid.display_word(prev),
                    a.monoid.display_word(&w)
                ));
            }
        } else {
            seen.insert(m, w);
        }
    }
    // determinant growth certifies injectivity of the word map for a single
    // generator of non-unit determinant
    if a.gens.len() == 1 && !a.gens[0].det().abs().is_one() {
        return Verdict::holds("|det| >= 2 separates all powers of the generator");
    }
    Verdict::unknown(bound)
}

/// Globalization data: each generator with its exact rational inverse.
#[derive(Clone, Debug)]
pub struct GlobalizedAction {
    pub inverses: Vec<RatMatrix>,
}

/// Pair each generator with its exact rational inverse, realizing the
/// enveloping action on Q^n.
pub fn globalize(action: &MatrixAction) -> GlobalizedAction {
    GlobalizedAction {
        inverses: action
            .gens
            .iter()
            .map(|g| RatMatrix::from_int(g.clone()).inverse())
            .collect(),
    }
}
