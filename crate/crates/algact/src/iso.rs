//! The inverse semigroup of partial bijections generated by translations
//! and the acting endomorphisms: standard forms t_h ∘ core ∘ t_{g⁻¹} with
//! the core fixing the identity, composition, inverses, fix sets, the
//! globalized form, and the joint-faithfulness / E-unitary checks.
//!
//! Matrix cores are (rational matrix, domain lattice) pairs; shift cores are
//! canonical sets of coordinate rewrites (u → v means the coordinate at u·t
//! moves to v·t) whose sources generate the domain ideal.

use crate::action::{Action, GElem};
use crate::family::{elem_add, elem_sub, ConstructibleFamily, GroupCoset, Subgroup};
use crate::lattice::{self, Coset, Lattice};
use crate::matrix::{vec_sub, Int, IntMatrix, RatMatrix, RatVec};
use crate::monoid::{MonoidPresentation, Word};
use crate::report::Verdict;
use crate::shift::{ideal_preimage, left_divides, left_quotient, RightIdeal, ShiftElem};
use crate::Error;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Matrix-backend core: a partial group isomorphism x ↦ Qx on a domain
/// lattice with Q·domain ⊆ Z^n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MatCore {
    pub q: RatMatrix,
    pub domain: Lattice,
}

/// Shift-backend core: coordinate rewrites with antichain sources.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ShiftCore {
    pub pairs: Vec<(Word, Word)>,
}

impl ShiftCore {
    pub fn identity(monoid: &MonoidPresentation, domain: &RightIdeal) -> ShiftCore {
        ShiftCore {
            pairs: domain.gens.iter().map(|g| (g.clone(), g.clone())).collect(),
        }
        .canonical(monoid)
    }

    pub fn canonical(mut self, monoid: &MonoidPresentation) -> ShiftCore {
        self.pairs.sort();
        self.pairs.dedup();
        // drop pairs subsumed by another pair with a consistent rewrite
        let pairs = self.pairs.clone();
        self.pairs.retain(|(u, v)| {
            !pairs.iter().any(|(u2, v2)| {
                (u2 != u || v2 != v)
                    && left_divides(monoid, u2, u)
                    && left_quotient(monoid, u2, u)
                        .map(|w| monoid.mul(v2, &w) == *v)
                        .unwrap_or(false)
            })
        });
        self
    }

    pub fn domain_ideal(&self, monoid: &MonoidPresentation) -> RightIdeal {
        RightIdeal::from_gens(monoid, self.pairs.iter().map(|(u, _)| u.clone()).collect())
    }

    pub fn image_ideal(&self, monoid: &MonoidPresentation) -> RightIdeal {
        RightIdeal::from_gens(monoid, self.pairs.iter().map(|(_, v)| v.clone()).collect())
    }

    pub fn is_identity_map(&self) -> bool {
        self.pairs.iter().all(|(u, v)| u == v)
    }

    /// Where the coordinate at s moves: v·(u⁻¹ s) for a covering pair.
    pub fn next(&self, monoid: &MonoidPresentation, s: &Word) -> Option<Word> {
        for (u, v) in &self.pairs {
            if let Some(t) = left_quotient(monoid, u, s) {
                return Some(monoid.mul(v, &t));
            }
        }
        None
    }

    /// Which coordinate moves to r: u·(v⁻¹ r) for a covering target.
    pub fn prev(&self, monoid: &MonoidPresentation, r: &Word) -> Option<Word> {
        for (u, v) in &self.pairs {
            if let Some(t) = left_quotient(monoid, v, r) {
                return Some(monoid.mul(u, &t));
            }
        }
        None
    }

    /// Apply to an element supported in the domain ideal.
    pub fn apply(&self, monoid: &MonoidPresentation, y: &ShiftElem) -> Option<ShiftElem> {
        let mut coords = BTreeMap::new();
        for (p, &v) in &y.coords {
            let moved = self.next(monoid, p)?;
            coords.insert(moved, v);
        }
        Some(ShiftElem { coords })
    }

    pub fn inverse(&self, monoid: &MonoidPresentation) -> ShiftCore {
        ShiftCore {
            pairs: self.pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect(),
        }
        .canonical(monoid)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Core {
    Mat(MatCore),
    Sh(ShiftCore),
}

/// An element of the inverse semigroup in standard form, or ZERO. The
/// triple (h, core, g) represents t_h ∘ core ∘ t_{g⁻¹}: the domain is
/// g + dom(core), the value at g is h, and the core fixes the identity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PartialIso {
    Zero,
    Iso { h: GElem, core: Core, g: GElem },
}

/// A primitive partial bijection; words are given in composition order,
/// `word[0] ∘ word[1] ∘ …` (the last entry applies first).
#[derive(Clone, Debug)]
pub enum IsoOp {
    Translate(GElem),
    Sigma(Word),
    SigmaInv(Word),
    IdCoset(GroupCoset),
}

impl PartialIso {
    pub fn identity(action: &Action) -> PartialIso {
        let e = action.identity_elem();
        match action {
            Action::Matrix(a) => PartialIso::Iso {
                h: e.clone(),
                core: Core::Mat(MatCore {
                    q: RatMatrix::identity(a.dim),
                    domain: Lattice::full(a.dim),
                }),
                g: e,
            },
            Action::Shift(a) => PartialIso::Iso {
                h: e.clone(),
                core: Core::Sh(ShiftCore::identity(&a.monoid, &RightIdeal::full(&a.monoid))),
                g: e,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PartialIso::Zero)
    }

    pub fn domain(&self, action: &Action) -> Option<GroupCoset> {
        match self {
            PartialIso::Zero => None,
            PartialIso::Iso { core, g, .. } => {
                let sub = match core {
                    Core::Mat(c) => Subgroup::Lat(c.domain.clone()),
                    Core::Sh(c) => Subgroup::Sh(match action {
                        Action::Shift(a) => c.domain_ideal(&a.monoid),
                        _ => panic!("backend mismatch"),
                    }),
                };
                Some(GroupCoset::new(action, g.clone(), sub))
            }
        }
    }

    pub fn image(&self, action: &Action) -> Option<GroupCoset> {
        match self {
            PartialIso::Zero => None,
            PartialIso::Iso { h, core, .. } => {
                let sub = match core {
                    Core::Mat(c) => Subgroup::Lat(image_rat(&c.q, &c.domain)),
                    Core::Sh(c) => Subgroup::Sh(match action {
                        Action::Shift(a) => c.image_ideal(&a.monoid),
                        _ => panic!("backend mismatch"),
                    }),
                };
                Some(GroupCoset::new(action, h.clone(), sub))
            }
        }
    }

    pub fn eval(&self, action: &Action, x: &GElem) -> Option<GElem> {
        match self {
            PartialIso::Zero => None,
            PartialIso::Iso { h, core, g } => {
                let y = elem_sub(action, x, g);
                let moved = match (core, &y) {
                    (Core::Mat(c), GElem::Vec(v)) => {
                        if !c.domain.contains_vec(v) {
                            return None;
                        }
                        GElem::Vec(c.q.mul_int_vec(v).to_int()?)
                    }
                    (Core::Sh(c), GElem::Shift(s)) => match action {
                        Action::Shift(a) => GElem::Shift(c.apply(&a.monoid, s)?),
                        _ => panic!("backend mismatch"),
                    },
                    _ => panic!("backend mismatch"),
                };
                Some(elem_add(action, h, &moved))
            }
        }
    }

    /// Canonicalize the base point to the reduced coset representative.
    fn canonicalize(self, action: &Action) -> PartialIso {
        match self {
            PartialIso::Zero => PartialIso::Zero,
            PartialIso::Iso { h, core, g } => {
                let dom_sub = match &core {
                    Core::Mat(c) => Subgroup::Lat(c.domain.clone()),
                    Core::Sh(c) => Subgroup::Sh(match action {
                        Action::Shift(a) => c.domain_ideal(&a.monoid),
                        _ => panic!("backend mismatch"),
                    }),
                };
                let g_c = dom_sub.reduce_elem(action, &g);
                if g_c == g {
                    return PartialIso::Iso { h, core, g };
                }
                // the core is unchanged by a base-point move; the value at
                // the new base point is forced
                let tmp = PartialIso::Iso { h, core: core.clone(), g };
                let h_c = tmp
                    .eval(action, &g_c)
                    .expect("canonical representative lies in the domain");
                PartialIso::Iso { h: h_c, core, g: g_c }
            }
        }
    }

    pub fn inverse(&self, action: &Action) -> PartialIso {
        match self {
            PartialIso::Zero => PartialIso::Zero,
            PartialIso::Iso { h, core, g } => {
                let inv_core = match core {
                    Core::Mat(c) => Core::Mat(MatCore {
                        q: c.q.inverse(),
                        domain: image_rat(&c.q, &c.domain),
                    }),
                    Core::Sh(c) => Core::Sh(match action {
                        Action::Shift(a) => c.inverse(&a.monoid),
                        _ => panic!("backend mismatch"),
                    }),
                };
                PartialIso::Iso {
                    h: g.clone(),
                    core: inv_core,
                    g: h.clone(),
                }
                .canonicalize(action)
            }
        }
    }

    /// True iff the element acts as the identity on its domain coset.
    pub fn is_idempotent(&self, _action: &Action) -> bool {
        match self {
            PartialIso::Zero => true,
            PartialIso::Iso { h, core, g } => {
                if h != g {
                    return false;
                }
                match core {
                    Core::Mat(c) => (0..c.domain.rank()).all(|i| {
                        let b = c.domain.basis().row_vec(i);
                        c.q.mul_int_vec(&b) == RatVec::from_int(b)
                    }),
                    Core::Sh(c) => c.is_identity_map(),
                }
            }
        }
    }
}

/// Image of a lattice under an invertible rational matrix (must be integral
/// on the lattice).
pub fn image_rat(q: &RatMatrix, l: &Lattice) -> Lattice {
    let raw = l.basis().mul(&q.num.transpose());
    let mut rows = Vec::with_capacity(raw.rows() * raw.cols());
    for i in 0..raw.rows() {
        for j in 0..raw.cols() {
            let (quo, rem) = num_integer::Integer::div_rem(&raw[(i, j)], &q.den);
            assert!(rem.is_zero(), "core must map its domain into Z^n");
            rows.push(quo);
        }
    }
    Lattice::from_rows(&IntMatrix::new(raw.rows(), raw.cols(), rows))
}

/// Preimage coset {x : Q x ∈ target} for invertible rational Q.
fn coset_preimage_rat(q: &RatMatrix, target: &Coset) -> Option<Coset> {
    let n = q.rows();
    let modulus = target.lattice().scale(&q.den);
    let rhs: Vec<Int> = target.rep().iter().map(|v| v * &q.den).collect();
    // particular solution of N x ≡ rhs (mod modulus)
    let k = modulus.rank();
    let mut stacked = IntMatrix::zero(n + k, n);
    let nt = q.num.transpose();
    for i in 0..n {
        for j in 0..n {
            stacked[(i, j)] = nt[(i, j)].clone();
        }
    }
    for i in 0..k {
        for j in 0..n {
            stacked[(n + i, j)] = modulus.basis()[(i, j)].clone();
        }
    }
    let coeffs = lattice::solve_row_combination(&stacked, &rhs)?;
    let x0: Vec<Int> = coeffs[..n].to_vec();
    let sol_lattice = lattice::preimage_rat(q, target.lattice());
    Some(Coset::new(x0, sol_lattice))
}

/// Compose two standard-form elements: phi ∘ psi (psi applies first).
pub fn compose(action: &Action, phi: &PartialIso, psi: &PartialIso) -> PartialIso {
    match (phi, psi) {
        (PartialIso::Zero, _) | (_, PartialIso::Zero) => PartialIso::Zero,
        (
            PartialIso::Iso { h: _, core: c1, g: g1 },
            PartialIso::Iso { h: h2, core: c2, g: g2 },
        ) => match (c1, c2) {
            (Core::Mat(m1), Core::Mat(m2)) => {
                // domain: {x in g2 + D2 : psi(x) in g1 + D1}
                let c = vec_sub(g1.as_vec(), h2.as_vec());
                let target = Coset::new(c, m1.domain.clone());
                let pre = match coset_preimage_rat(&m2.q, &target) {
                    Some(p) => p,
                    None => return PartialIso::Zero,
                };
                let dom_y = match lattice::coset_meet(&pre, &Coset::subgroup(m2.domain.clone())) {
                    Some(d) => d,
                    None => return PartialIso::Zero,
                };
                let dom_x = dom_y.translate(g2.as_vec());
                let g = GElem::Vec(dom_x.rep().to_vec());
                let mid = psi.eval(action, &g).expect("g lies in dom(psi)");
                let h = phi.eval(action, &mid).expect("psi(g) lies in dom(phi)");
                PartialIso::Iso {
                    h,
                    core: Core::Mat(MatCore {
                        q: m1.q.mul(&m2.q),
                        domain: dom_x.lattice().clone(),
                    }),
                    g,
                }
                .canonicalize(action)
            }
            (Core::Sh(s1), Core::Sh(s2)) => {
                let monoid = match action {
                    Action::Shift(a) => &a.monoid,
                    _ => panic!("backend mismatch"),
                };
                let x1 = s1.domain_ideal(monoid);
                // condition: c2(y) ≡ h2⁻¹g1 (mod ⊕_{X1}Σ) pins finitely many
                // coordinates of y and frees exactly X' = c2-preimage of X1
                let d_elem = elem_sub(action, g1, h2);
                let d = d_elem.as_shift();
                let mut pinned = ShiftElem::identity();
                for (r, &val) in &d.coords {
                    if x1.contains(monoid, r) {
                        continue;
                    }
                    match s2.prev(monoid, r) {
                        Some(p) => {
                            pinned.coords.insert(p, val);
                        }
                        None => return PartialIso::Zero,
                    }
                }
                let mut xprime_gens = Vec::new();
                let mut pairs = Vec::new();
                for (u2, v2) in &s2.pairs {
                    for w in &ideal_preimage(monoid, v2, &x1).gens {
                        let source = monoid.mul(u2, w);
                        let midc = monoid.mul(v2, w);
                        let target = s1.next(monoid, &midc).expect("mid lies in dom");
                        xprime_gens.push(source.clone());
                        pairs.push((source, target));
                    }
                }
                let xprime = RightIdeal::from_gens(monoid, xprime_gens);
                let rep = elem_add(action, g2, &GElem::Shift(pinned));
                let dom = GroupCoset::new(action, rep, Subgroup::Sh(xprime));
                let g = dom.rep();
                let mid = match psi.eval(action, &g) {
                    Some(m) => m,
                    None => return PartialIso::Zero,
                };
                let h = match phi.eval(action, &mid) {
                    Some(h) => h,
                    None => return PartialIso::Zero,
                };
                PartialIso::Iso {
                    h,
                    core: Core::Sh(ShiftCore { pairs }.canonical(monoid)),
                    g,
                }
                .canonicalize(action)
            }
            _ => panic!("backend mismatch"),
        },
    }
}

/// Evaluate a word of primitive partial bijections into standard form.
pub fn to_standard_form(action: &Action, word: &[IsoOp]) -> PartialIso {
    let mut acc = PartialIso::identity(action);
    for op in word.iter().rev() {
        let prim = primitive(action, op);
        acc = compose(action, &prim, &acc);
        if acc.is_zero() {
            return PartialIso::Zero;
        }
    }
    acc
}

fn primitive(action: &Action, op: &IsoOp) -> PartialIso {
    match op {
        IsoOp::Translate(t) => match PartialIso::identity(action) {
            PartialIso::Iso { core, g, .. } => PartialIso::Iso { h: t.clone(), core, g },
            PartialIso::Zero => unreachable!(),
        },
        IsoOp::Sigma(w) => match action {
            Action::Matrix(a) => PartialIso::Iso {
                h: action.identity_elem(),
                core: Core::Mat(MatCore {
                    q: RatMatrix::from_int(a.matrix_of_word(w)),
                    domain: Lattice::full(a.dim),
                }),
                g: action.identity_elem(),
            },
            Action::Shift(a) => PartialIso::Iso {
                h: action.identity_elem(),
                core: Core::Sh(ShiftCore {
                    pairs: vec![(a.monoid.identity(), w.clone())],
                }),
                g: action.identity_elem(),
            },
        },
        IsoOp::SigmaInv(w) => match action {
            Action::Matrix(a) => {
                let m = a.matrix_of_word(w);
                PartialIso::Iso {
                    h: action.identity_elem(),
                    core: Core::Mat(MatCore {
                        q: RatMatrix::from_int(m.clone()).inverse(),
                        domain: lattice::image(&m, &Lattice::full(a.dim)),
                    }),
                    g: action.identity_elem(),
                }
            }
            Action::Shift(a) => PartialIso::Iso {
                h: action.identity_elem(),
                core: Core::Sh(ShiftCore {
                    pairs: vec![(w.clone(), a.monoid.identity())],
                }),
                g: action.identity_elem(),
            },
        },
        IsoOp::IdCoset(c) => {
            let rep = c.rep();
            let core = match c.subgroup() {
                Subgroup::Lat(l) => Core::Mat(MatCore {
                    q: RatMatrix::identity(l.ambient_rank()),
                    domain: l,
                }),
                Subgroup::Sh(x) => Core::Sh(match action {
                    Action::Shift(a) => ShiftCore::identity(&a.monoid, &x),
                    _ => panic!("backend mismatch"),
                }),
            };
            PartialIso::Iso { h: rep.clone(), core, g: rep }
        }
    }
}

/// The exact fixed-point set of a standard-form element.
pub fn fix_set(action: &Action, phi: &PartialIso) -> Result<Option<GroupCoset>, Error> {
    match phi {
        PartialIso::Zero => Ok(None),
        PartialIso::Iso { h, core, g } => match core {
            Core::Mat(c) => {
                // (Q - I) x = Qg - h on the domain coset
                let qg = c.q.mul_int_vec(g.as_vec());
                let rhs = qg.sub(&RatVec::from_int(h.as_vec().clone()));
                let dom = Coset::new(g.as_vec().clone(), c.domain.clone());
                Ok(lattice::solve_affine(&c.q, &rhs, &dom).map(GroupCoset::Lat))
            }
            Core::Sh(c) => fix_set_shift(action, h.as_shift(), c, g.as_shift()),
        },
    }
}

/// Shift fix sets: identity cores fix their whole domain or nothing;
/// non-identity cores have at most one fixed point, found by chasing the
/// coordinate orbits against the constant h⁻¹g.
fn fix_set_shift(
    action: &Action,
    h: &ShiftElem,
    core: &ShiftCore,
    g: &ShiftElem,
) -> Result<Option<GroupCoset>, Error> {
    let (monoid, sigma) = match action {
        Action::Shift(a) => (&a.monoid, &a.sigma),
        _ => panic!("backend mismatch"),
    };
    let dom_ideal = core.domain_ideal(monoid);
    if core.is_identity_map() {
        // phi is the translation t_{h g⁻¹} restricted to its domain
        return Ok(if h == g {
            Some(GroupCoset::new(
                action,
                GElem::Shift(g.clone()),
                Subgroup::Sh(dom_ideal),
            ))
        } else {
            None
        });
    }
    // solve c(y) = m·y with m = h⁻¹g; the candidate is unique because
    // y ↦ c(y)y⁻¹ is injective for a non-identity rewrite
    let m = h.inv(sigma).mul(g, sigma);
    let image_ideal = core.image_ideal(monoid);
    // candidate support: backward orbit of supp(m) through the rewrites
    let mut candidates: Vec<Word> = Vec::new();
    for c in m.coords.keys() {
        let mut cur = c.clone();
        for _ in 0..256 {
            if dom_ideal.contains(monoid, &cur) {
                candidates.push(cur.clone());
            }
            match core.prev(monoid, &cur) {
                Some(p) => {
                    if p == cur {
                        break;
                    }
                    cur = p;
                }
                None => break,
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut y = ShiftElem::identity();
    for s in &candidates {
        let v = orbit_product(s, core, monoid, sigma, &m, &dom_ideal)?;
        if v != 0 {
            y.coords.insert(s.clone(), v);
        }
    }
    // verify every equation (m·y)_r = (c applied to y)_r on the check set
    let mut check: Vec<Word> = m.coords.keys().cloned().collect();
    for s in y.coords.keys() {
        check.push(s.clone());
        if let Some(n) = core.next(monoid, s) {
            check.push(n);
        }
    }
    for s in m.coords.keys() {
        if dom_ideal.contains(monoid, s) {
            if let Some(n) = core.next(monoid, s) {
                check.push(n);
            }
        }
    }
    check.sort();
    check.dedup();
    for r in &check {
        let lhs = sigma.mul(m.get(r), y.get(r));
        let rhs = if image_ideal.contains(monoid, r) {
            match core.prev(monoid, r) {
                Some(p) => y.get(&p),
                None => 0,
            }
        } else {
            0
        };
        if lhs != rhs {
            return Ok(None);
        }
    }
    // the single fixed point x = g·y is a coset of the zero subgroup
    let x = g.mul(&y, sigma);
    Ok(Some(GroupCoset::new(
        action,
        GElem::Shift(x),
        Subgroup::Sh(RightIdeal::empty()),
    )))
}

fn word_size(w: &Word) -> u64 {
    match w {
        Word::Free(v) => v.len() as u64,
        Word::Abelian(v) => v.iter().sum(),
        Word::Numeric(v) => *v,
    }
}

/// y(s) = m(s₁)·m(s₂)⋯ along the forward orbit s → next(s) → …, stopping
/// once the orbit leaves the domain or can no longer meet supp(m).
fn orbit_product(
    s: &Word,
    core: &ShiftCore,
    monoid: &MonoidPresentation,
    sigma: &crate::shift::FiniteGroup,
    m: &ShiftElem,
    dom: &RightIdeal,
) -> Result<usize, Error> {
    let max_support = m.coords.keys().map(word_size).max().unwrap_or(0);
    let non_shrinking = core
        .pairs
        .iter()
        .all(|(u, v)| word_size(v) >= word_size(u));
    let mut acc = 0usize; // identity of sigma
    let mut cur = s.clone();
    for _ in 0..512usize {
        if !dom.contains(monoid, &cur) {
            return Ok(acc);
        }
        let n = core.next(monoid, &cur).expect("cur lies in the domain ideal");
        acc = sigma.mul(acc, m.get(&n));
        if n == cur {
            return Ok(acc);
        }
        if non_shrinking && word_size(&n) > max_support {
            // every later coordinate is even larger, so all remaining
            // m-values vanish
            return Ok(acc);
        }
        cur = n;
    }
    Err(Error::UnsupportedBackendForm)
}

/// The pair (g_φ, s_φ) with φ(x) = g_φ + σ̃_{s_φ}(x) on dom(φ); matrix
/// backend only.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GlobalizedForm {
    pub g_phi: RatVec,
    pub s_phi: RatMatrix,
}

pub fn globalized_form(phi: &PartialIso) -> Result<GlobalizedForm, Error> {
    match phi {
        PartialIso::Zero => Err(Error::PreconditionFailed(
            "the zero element has no globalized form".into(),
        )),
        PartialIso::Iso { h, core, g } => match core {
            Core::Mat(c) => {
                let qg = c.q.mul_int_vec(g.as_vec());
                Ok(GlobalizedForm {
                    g_phi: RatVec::from_int(h.as_vec().clone()).sub(&qg),
                    s_phi: c.q.clone(),
                })
            }
            Core::Sh(_) => Err(Error::BackendMismatch(
                "globalized forms are computed for the matrix backend".into(),
            )),
        },
    }
}

/// Joint faithfulness of the globalized action on the constructible family.
pub fn check_jf(action: &Action, family: &ConstructibleFamily, word_bound: usize) -> Verdict {
    match action {
        Action::Matrix(a) => {
            // every generated member of full rank spans Q^n, so a globalized
            // element fixing it pointwise is the identity matrix; it remains
            // to certify that distinct words give distinct matrices
            let all_full_rank = family
                .members
                .iter()
                .all(|m| m.as_lattice().rank() == a.dim);
            let faithful = crate::action::validate(action, word_bound)
                .map(|r| r.faithful)
                .unwrap_or(Verdict::unknown(word_bound));
            if let Verdict::Fails { witness } = &faithful {
                return Verdict::fails(format!(
                    "globalized words collapse: {} (their quotient fixes every member)",
                    witness
                ));
            }
            if all_full_rank {
                Verdict::holds(format!(
                    "every generated member spans Q^{}, so a fixing word acts as the identity matrix; words distinct up to length {}",
                    a.dim, word_bound
                ))
            } else {
                Verdict::unknown(word_bound)
            }
        }
        Action::Shift(a) => {
            if family.zero_member().is_some() {
                return Verdict::fails(
                    "C = {e} is constructible and is fixed by every globalized element",
                );
            }
            if a.monoid.left_reversible().is_holds() {
                Verdict::holds(
                    "left reversible monoid embeds in its enveloping group and no proper word fixes a coordinate cone",
                )
            } else {
                Verdict::unknown(word_bound)
            }
        }
    }
}

/// I is 0-E-unitary iff the translation-free part is E-unitary: search for
/// a non-idempotent core word acting as the identity on a member.
pub fn check_e_unitary(action: &Action, family: &ConstructibleFamily, bound: usize) -> Verdict {
    let jf = check_jf(action, family, bound);
    match jf {
        Verdict::Holds { witness } => {
            return Verdict::holds(format!(
                "implied by the joint-faithfulness condition: {}",
                witness
            ))
        }
        Verdict::Fails { witness } => return Verdict::fails(witness),
        Verdict::Unknown { .. } => {}
    }
    // bounded search for a core word phi != id with phi|_C = id_C
    for w in core_words(action, bound) {
        let phi = to_standard_form(action, &w);
        if phi.is_zero() || phi.is_idempotent(action) {
            continue;
        }
        if let Ok(Some(fix)) = fix_set(action, &phi) {
            let fix_sub = fix.subgroup();
            if fix.contains(action, &action.identity_elem()) {
                for m in &family.members {
                    if m.is_subset_of(action, &fix_sub) {
                        return Verdict::fails(format!(
                            "a non-idempotent element of the core semigroup fixes {} pointwise",
                            m.describe(action)
                        ));
                    }
                }
            }
        }
    }
    Verdict::unknown(bound)
}

/// An element in the closed form available over left Ore monoids:
/// σ_s⁻¹ ∘ id_{restriction} ∘ t_g ∘ σ_t (no restriction means id_G).
#[derive(Clone, Debug)]
pub struct OreForm {
    pub s: Word,
    pub restriction: Option<GroupCoset>,
    pub g: GElem,
    pub t: Word,
}

/// Image of a coset under the word action σ_w.
fn coset_image_word(action: &Action, w: &Word, c: &GroupCoset) -> GroupCoset {
    let rep = crate::action::apply(action, w, &c.rep());
    GroupCoset::new(action, rep, c.subgroup().image_word(action, w))
}

/// Closed-form product of two Ore-form elements (first ∘ second): with
/// t u⁻¹ = α⁻¹ β in the group of fractions,
/// σ_s⁻¹ e₁ t_g σ_t · σ_u⁻¹ e₂ t_k σ_v
///   = σ_{αs}⁻¹ id_{σ_α(e₁) ∩ (σ_α(g)+σ_{αt}G) ∩ σ_β(e₂)} t_{σ_α(g)+σ_β(k)} σ_{βv}.
pub fn ore_compose(action: &Action, first: &OreForm, second: &OreForm) -> Option<OreForm> {
    let monoid = action.monoid();
    let (alpha, beta) = monoid.ore_pair(&first.t, &second.s)?;
    let full = Subgroup::full(action);
    let full_coset = GroupCoset::subgroup_coset(action, full.clone());
    let e1 = first
        .restriction
        .clone()
        .unwrap_or_else(|| full_coset.clone());
    let e2 = second
        .restriction
        .clone()
        .unwrap_or_else(|| full_coset.clone());
    let alpha_e1 = coset_image_word(action, &alpha, &e1);
    let beta_e2 = coset_image_word(action, &beta, &e2);
    let alpha_t = monoid.mul(&alpha, &first.t);
    let principal = GroupCoset::subgroup_coset(action, full.image_word(action, &alpha_t));
    let inner = principal.meet(action, &beta_e2)?;
    let shifted = inner.translate(action, &crate::action::apply(action, &alpha, &first.g));
    let restriction = alpha_e1.meet(action, &shifted)?;
    let g = elem_add(
        action,
        &crate::action::apply(action, &alpha, &first.g),
        &crate::action::apply(action, &beta, &second.g),
    );
    Some(OreForm {
        s: monoid.mul(&alpha, &first.s),
        restriction: Some(restriction),
        g,
        t: monoid.mul(&beta, &second.t),
    })
}

/// Evaluate an Ore form into standard form.
pub fn ore_to_iso(action: &Action, f: &OreForm) -> PartialIso {
    let mut ops = Vec::new();
    let monoid = action.monoid();
    if !monoid.is_identity(&f.s) {
        ops.push(IsoOp::SigmaInv(f.s.clone()));
    }
    if let Some(r) = &f.restriction {
        ops.push(IsoOp::IdCoset(r.clone()));
    }
    ops.push(IsoOp::Translate(f.g.clone()));
    if !monoid.is_identity(&f.t) {
        ops.push(IsoOp::Sigma(f.t.clone()));
    }
    to_standard_form(action, &ops)
}

/// Words over {σ_s, σ_s⁻¹} up to the given letter count.
pub fn core_words(action: &Action, bound: usize) -> Vec<Vec<IsoOp>> {
    let gens: Vec<Word> = action.monoid().generators();
    let mut alphabet = Vec::new();
    for g in &gens {
        alphabet.push(IsoOp::Sigma(g.clone()));
        alphabet.push(IsoOp::SigmaInv(g.clone()));
    }
    let mut out: Vec<Vec<IsoOp>> = vec![vec![]];
    let mut frontier: Vec<Vec<IsoOp>> = vec![vec![]];
    for _ in 0..bound {
        let mut next = Vec::new();
        for w in &frontier {
            for a in &alphabet {
                let mut nw = w.clone();
                nw.push(a.clone());
                out.push(nw.clone());
                next.push(nw);
            }
        }
        frontier = next;
    }
    out
}


#[cfg(test)]
mod ore_tests {
    use super::*;
    use crate::family::test_actions::*;

    fn v(x: &[i64]) -> GElem {
        GElem::Vec(crate::matrix::vec_i64(x))
    }

    #[test]
    fn ore_formula_matches_naive_composition() {
        // diag(2,3) generates a left Ore (abelian) monoid action
        let act = diag(2, 3);
        let cases = [
            (Word::Abelian(vec![1]), v(&[1, 0]), Word::Abelian(vec![0])),
            (Word::Abelian(vec![0]), v(&[0, 2]), Word::Abelian(vec![1])),
            (Word::Abelian(vec![2]), v(&[1, 1]), Word::Abelian(vec![1])),
            (Word::Abelian(vec![1]), v(&[-3, 5]), Word::Abelian(vec![2])),
        ];
        let mut nonzero = 0;
        for (s1, g1, t1) in &cases {
            for (s2, g2, t2) in &cases {
                let f1 = OreForm {
                    s: s1.clone(),
                    restriction: None,
                    g: g1.clone(),
                    t: t1.clone(),
                };
                let f2 = OreForm {
                    s: s2.clone(),
                    restriction: None,
                    g: g2.clone(),
                    t: t2.clone(),
                };
                let naive = compose(&act, &ore_to_iso(&act, &f1), &ore_to_iso(&act, &f2));
                let closed = match ore_compose(&act, &f1, &f2) {
                    Some(f) => ore_to_iso(&act, &f),
                    None => PartialIso::Zero,
                };
                assert_eq!(naive, closed);
                if !naive.is_zero() {
                    nonzero += 1;
                }
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn ore_formula_shift_backend() {
        let act = nshift(2);
        let e0 = GElem::Shift(crate::shift::ShiftElem::single(Word::Abelian(vec![0]), 1));
        let e1 = GElem::Shift(crate::shift::ShiftElem::single(Word::Abelian(vec![1]), 1));
        let id = GElem::Shift(crate::shift::ShiftElem::identity());
        let cases = [
            (Word::Abelian(vec![1]), id.clone(), Word::Abelian(vec![0])),
            (Word::Abelian(vec![0]), e0.clone(), Word::Abelian(vec![1])),
            (Word::Abelian(vec![1]), e1.clone(), Word::Abelian(vec![1])),
            (Word::Abelian(vec![2]), e0.clone(), Word::Abelian(vec![0])),
        ];
        for (s1, g1, t1) in &cases {
            for (s2, g2, t2) in &cases {
                let f1 = OreForm {
                    s: s1.clone(),
                    restriction: None,
                    g: g1.clone(),
                    t: t1.clone(),
                };
                let f2 = OreForm {
                    s: s2.clone(),
                    restriction: None,
                    g: g2.clone(),
                    t: t2.clone(),
                };
                let naive = compose(&act, &ore_to_iso(&act, &f1), &ore_to_iso(&act, &f2));
                let closed = match ore_compose(&act, &f1, &f2) {
                    Some(f) => ore_to_iso(&act, &f),
                    None => PartialIso::Zero,
                };
                assert_eq!(naive, closed);
            }
        }
    }
}

#[cfg(test)]
mod form_tests {
    use super::*;
    use crate::family::test_actions::*;
    

    /// Core words fix the identity, so their standard form has g = h = e.
    #[test]
    fn core_words_have_trivial_base_points() {
        for action in [times2(), diag(2, 3), free2_shift(2), nshift(2)] {
            for w in core_words(&action, 3) {
                let phi = to_standard_form(&action, &w);
                if let PartialIso::Iso { h, g, .. } = &phi {
                    assert_eq!(*g, action.identity_elem());
                    assert_eq!(*h, action.identity_elem());
                }
            }
        }
    }

    /// Composition always returns the canonical base point.
    #[test]
    fn compose_is_canonical() {
        let act = times2();
        let words = core_words(&act, 2);
        let t3 = to_standard_form(&act, &[IsoOp::Translate(GElem::Vec(crate::matrix::vec_i64(&[3])))]);
        for w in &words {
            let phi = compose(&act, &to_standard_form(&act, w), &t3);
            if let PartialIso::Iso { core, g, .. } = &phi {
                let dom = match core {
                    Core::Mat(c) => Subgroup::Lat(c.domain.clone()),
                    Core::Sh(_) => unreachable!(),
                };
                assert_eq!(dom.reduce_elem(&act, g), *g, "base point is reduced");
            }
        }
    }
}

#[cfg(test)]
mod associativity_tests {
    use super::*;
    use crate::family::test_actions::*;
    use crate::monoid::Word;

    fn words_for(action: &Action) -> Vec<Vec<IsoOp>> {
        let mut base = core_words(action, 2);
        let t = match action {
            Action::Matrix(_) => IsoOp::Translate(GElem::Vec(crate::matrix::vec_i64(&[1]))),
            Action::Shift(a) => IsoOp::Translate(GElem::Shift(crate::shift::ShiftElem::single(
                a.monoid.identity(),
                1,
            ))),
        };
        let mut with_translates = Vec::new();
        for w in base.drain(..) {
            let mut tw = vec![t.clone()];
            tw.extend(w.iter().cloned());
            with_translates.push(w);
            with_translates.push(tw);
        }
        with_translates
    }

    #[test]
    fn composition_is_associative() {
        for action in [times2(), free2_shift(2), nshift(2)] {
            let words = words_for(&action);
            let elems: Vec<PartialIso> = words
                .iter()
                .map(|w| to_standard_form(&action, w))
                .collect();
            let sample: Vec<&PartialIso> = elems.iter().take(8).collect();
            for a in &sample {
                for b in &sample {
                    for c in &sample {
                        let lhs = compose(&action, &compose(&action, a, b), c);
                        let rhs = compose(&action, a, &compose(&action, b, c));
                        assert_eq!(lhs, rhs, "associativity");
                    }
                }
            }
        }
    }

    #[test]
    fn shift_word_variants_compose_consistently() {
        // the same abstract element written via different words composes to
        // the same standard form
        let act = nshift(2);
        let one = Word::Abelian(vec![1]);
        let two = Word::Abelian(vec![2]);
        let a = to_standard_form(&act, &[IsoOp::Sigma(one.clone()), IsoOp::Sigma(one.clone())]);
        let b = to_standard_form(&act, &[IsoOp::Sigma(two.clone())]);
        assert_eq!(a, b);
        let inv_chain = to_standard_form(
            &act,
            &[IsoOp::SigmaInv(one.clone()), IsoOp::SigmaInv(one.clone())],
        );
        let inv_two = to_standard_form(&act, &[IsoOp::SigmaInv(two)]);
        assert_eq!(inv_chain, inv_two);
    }
}

#[cfg(test)]
mod roundtrip_tests {
    use super::*;
    use crate::family::test_actions::*;
    use crate::monoid::Word;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Standard form agrees with step-by-step word evaluation on arbitrary
    /// probes, including the domain membership predicate (None vs Some).
    #[test]
    fn roundtrip_includes_domain_predicate() {
        let act = times2();
        let mut rng = StdRng::seed_from_u64(7);
        let one = Word::Abelian(vec![1]);
        for _ in 0..300 {
            let len = rng.gen_range(1..=4);
            let ops: Vec<IsoOp> = (0..len)
                .map(|_| match rng.gen_range(0..3) {
                    0 => IsoOp::Translate(GElem::Vec(crate::matrix::vec_i64(&[
                        rng.gen_range(-3..=3)
                    ]))),
                    1 => IsoOp::Sigma(one.clone()),
                    _ => IsoOp::SigmaInv(one.clone()),
                })
                .collect();
            let phi = to_standard_form(&act, &ops);
            for probe in -8i64..=8 {
                let x = GElem::Vec(crate::matrix::vec_i64(&[probe]));
                let direct = ops.iter().rev().try_fold(x.clone(), |cur, op| {
                    to_standard_form(&act, std::slice::from_ref(op)).eval(&act, &cur)
                });
                assert_eq!(phi.eval(&act, &x), direct);
            }
        }
    }

    /// The closed Ore form and naive domain chasing agree on 100 random
    /// words over diag(2,3).
    #[test]
    fn ore_oracle_diag23_hundred_words() {
        let act = diag(2, 3);
        let mut rng = StdRng::seed_from_u64(23);
        let mut rand_form = |rng: &mut StdRng| OreForm {
            s: Word::Abelian(vec![rng.gen_range(0..3u64)]),
            restriction: None,
            g: GElem::Vec(crate::matrix::vec_i64(&[
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
            ])),
            t: Word::Abelian(vec![rng.gen_range(0..3u64)]),
        };
        for _ in 0..100 {
            let f1 = rand_form(&mut rng);
            let f2 = rand_form(&mut rng);
            let naive = compose(&act, &ore_to_iso(&act, &f1), &ore_to_iso(&act, &f2));
            let closed = match ore_compose(&act, &f1, &f2) {
                Some(f) => ore_to_iso(&act, &f),
                None => PartialIso::Zero,
            };
            assert_eq!(naive, closed);
        }
    }
}
