//! Finite-level models of the character space and its tight boundary.
//!
//! At a finite meet-closed family every filter is principal, so a level
//! character is a pair (minimal member, compatible representative): the
//! character of the coset semilattice with χ(gC) = 1 iff C contains the
//! minimal member and the representative lies in gC. Verdicts computed here
//! are always relative to the generating level.

use crate::action::{Action, GElem};
use crate::family::{transversal_cosets, ConstructibleFamily, GroupCoset, Subgroup};
use crate::iso::{image_rat, Core, PartialIso};
use crate::lattice::IndexValue;
use crate::report::Verdict;
use crate::shift::RightIdeal;
use crate::Error;
use serde_json::json;

/// A filter on the generated family: the upward closure of a (principal)
/// basis, with the finite-hereditarity certificate relative to the level.
#[derive(Clone, Debug)]
pub struct FilterOnC {
    pub basis: Vec<Subgroup>,
    pub min: Subgroup,
    pub finitely_hereditary: bool,
}

/// A character of the coset semilattice at level: principal filter plus a
/// canonical representative on the minimal member.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Character {
    pub min: Subgroup,
    pub rep: GElem,
}

/// The finite model of the boundary over a finite-index family: all
/// compatible representative systems, indexed by residues mod the minimal
/// member.
#[derive(Clone, Debug)]
pub struct BoundaryLevel {
    pub members: Vec<Subgroup>,
    pub min: Subgroup,
    pub points: Vec<GElem>,
}

/// The character with χ(kC) = 1 for every member C.
pub fn chi_k(action: &Action, family: &ConstructibleFamily, k: &GElem) -> Character {
    let min = family.meet_all(action);
    let rep = min.reduce_elem(action, k);
    Character { min, rep }
}

/// χ(gC): Some(true/false) when decidable at this level, None otherwise.
pub fn eval_char(
    action: &Action,
    family: &ConstructibleFamily,
    chi: &Character,
    coset: &GroupCoset,
) -> Option<bool> {
    let c = coset.subgroup();
    if chi.min.is_subset_of(action, &c) {
        return Some(coset.contains(action, &chi.rep));
    }
    if family.contains(&c) {
        // the level filter is the upward closure of the minimal member
        return Some(false);
    }
    None
}

/// Representatives of the character on every filter member.
pub fn reps_view(
    action: &Action,
    family: &ConstructibleFamily,
    chi: &Character,
) -> Vec<(Subgroup, GElem)> {
    family
        .members
        .iter()
        .filter(|m| chi.min.is_subset_of(action, m))
        .map(|m| (m.clone(), m.reduce_elem(action, &chi.rep)))
        .collect()
}

/// Forget representatives; the filter of the character.
pub fn project_to_filter(
    action: &Action,
    family: &ConstructibleFamily,
    chi: &Character,
) -> FilterOnC {
    let basis: Vec<Subgroup> = family
        .members
        .iter()
        .filter(|m| chi.min.is_subset_of(action, m))
        .cloned()
        .collect();
    let fh = hereditary_violation(action, family, &chi.min).is_none();
    FilterOnC {
        basis,
        min: chi.min.clone(),
        finitely_hereditary: fh,
    }
}

fn hereditary_violation(
    action: &Action,
    family: &ConstructibleFamily,
    min: &Subgroup,
) -> Option<(Subgroup, Subgroup)> {
    for c in &family.members {
        if !min.is_subset_of(action, c) {
            continue;
        }
        for d in &family.members {
            if d == c {
                continue;
            }
            if d.is_subset_of(action, c)
                && !min.is_subset_of(action, d)
                && matches!(d.index_in(action, c), Ok(IndexValue::Finite(_)))
            {
                return Some((c.clone(), d.clone()));
            }
        }
    }
    None
}

/// Tightness at level: the filter must select a cell of every finite-index
/// decomposition of a selected member, which at a finite meet-closed level
/// is exactly finite-hereditarity of the filter.
pub fn is_tight(action: &Action, family: &ConstructibleFamily, chi: &Character) -> Verdict {
    match hereditary_violation(action, family, &chi.min) {
        None => Verdict::holds(
            "the filter selects a cell of every finite-index decomposition at this level",
        ),
        Some((c, d)) => Verdict::fails(format!(
            "χ selects {} but no cell of its finite-index decomposition into {}-cosets",
            c.describe(action),
            d.describe(action)
        )),
    }
}

/// Image of a subgroup (contained in the core's domain) under the core.
fn core_image_subgroup(action: &Action, core: &Core, sub: &Subgroup) -> Subgroup {
    match (core, sub) {
        (Core::Mat(c), Subgroup::Lat(l)) => Subgroup::Lat(image_rat(&c.q, l)),
        (Core::Sh(c), Subgroup::Sh(x)) => match action {
            Action::Shift(a) => {
                let gens = x
                    .gens
                    .iter()
                    .map(|g| c.next(&a.monoid, g).expect("subgroup inside core domain"))
                    .collect();
                Subgroup::Sh(RightIdeal::from_gens(&a.monoid, gens))
            }
            _ => panic!("backend mismatch"),
        },
        _ => panic!("backend mismatch"),
    }
}

/// The partial action on characters: transported character, or None when
/// χ(dom φ) is 0 or undecidable at this level.
pub fn act(
    action: &Action,
    family: &ConstructibleFamily,
    phi: &PartialIso,
    chi: &Character,
) -> Option<Character> {
    let dom = phi.domain(action)?;
    if eval_char(action, family, chi, &dom) != Some(true) {
        return None;
    }
    let new_rep = phi
        .eval(action, &chi.rep)
        .expect("χ(dom φ) = 1 places the representative in the domain");
    let core = match phi {
        PartialIso::Iso { core, .. } => core,
        PartialIso::Zero => unreachable!("zero has no domain"),
    };
    // min ⊆ dom(core) because χ(dom φ) = 1, so the image is a subgroup
    let new_min = core_image_subgroup(action, core, &chi.min);
    let rep = new_min.reduce_elem(action, &new_rep);
    Some(Character { min: new_min, rep })
}

/// All compatible representative systems over a finite-index family.
pub fn enumerate_boundary(
    action: &Action,
    family: &ConstructibleFamily,
) -> Result<BoundaryLevel, Error> {
    let full = Subgroup::full(action);
    for m in &family.members {
        match m.index_in(action, &full) {
            Ok(IndexValue::Finite(_)) => {}
            _ => {
                return Err(Error::InfiniteIndexMember(format!(
                    "{} has infinite index in G",
                    m.describe(action)
                )))
            }
        }
    }
    let min = family.meet_all(action);
    let cells = transversal_cosets(action, &min, &full)?;
    let mut points: Vec<GElem> = cells.iter().map(|c| c.rep()).collect();
    points.sort();
    Ok(BoundaryLevel {
        members: family.members.clone(),
        min,
        points,
    })
}

impl BoundaryLevel {
    /// The level character sitting at an enumerated point.
    pub fn character_at(&self, action: &Action, point: &GElem) -> Character {
        Character {
            min: self.min.clone(),
            rep: self.min.reduce_elem(action, point),
        }
    }

    pub fn to_json(&self, action: &Action) -> serde_json::Value {
        let members: Vec<String> = self.members.iter().map(|m| m.describe(action)).collect();
        let points: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| {
                let residues: Vec<serde_json::Value> = self
                    .members
                    .iter()
                    .map(|m| {
                        json!({
                            "member": m.describe(action),
                            "residue": describe_elem(&m.reduce_elem(action, p)),
                        })
                    })
                    .collect();
                json!({
                    "rep": describe_elem(p),
                    "residues": residues,
                })
            })
            .collect();
        json!({
            "members": members,
            "min": self.min.describe(action),
            "point_count": self.points.len(),
            "points": points,
        })
    }
}

pub fn describe_elem(g: &GElem) -> String {
    match g {
        GElem::Vec(v) => format!(
            "({})",
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        ),
        GElem::Shift(s) => format!("{}", s),
    }
}

/// Report for the two-subset situation: a constructible zero subgroup plus
/// principal cofinality away from it pins down the unique proper closed
/// invariant subset of the boundary.
#[derive(Clone, Debug)]
pub struct UniqueSubsetReport {
    pub zero_provenance: String,
    pub wpc: Verdict,
    pub principal_meet_trivial: Verdict,
    pub statement: String,
    pub dense_orbit_certificate: String,
}

pub fn unique_invariant_subset_report(
    action: &Action,
    family: &ConstructibleFamily,
    word_bound: usize,
) -> Result<UniqueSubsetReport, Error> {
    let zero = family.zero_member().ok_or_else(|| {
        Error::PreconditionFailed("the zero subgroup {e} is not constructible at this level".into())
    })?;
    let wpc = crate::family::check_wpc(action, family, word_bound);
    if !wpc.is_holds() {
        return Err(Error::PreconditionFailed(format!(
            "the weak principal-cofinality condition is not verified: {}",
            wpc
        )));
    }
    // ∩_s σ_s G = {e}: certified for shifts by intersecting principal ideals
    let principal_meet_trivial = match action {
        Action::Shift(_) => {
            let full = Subgroup::full(action);
            let mut meet = full.clone();
            for w in action.monoid().nontrivial_words_up_to(word_bound) {
                meet = meet.intersect(action, &full.image_word(action, &w));
                if meet.is_zero() {
                    break;
                }
            }
            if meet.is_zero() {
                Verdict::holds("the meet of principal subgroups over short words is already {e}")
            } else {
                Verdict::unknown(word_bound)
            }
        }
        Action::Matrix(_) => Verdict::unknown(word_bound),
    };
    let zero_provenance = family
        .provenance
        .get(zero)
        .map(|p| p.describe(action))
        .unwrap_or_else(|| "{e}".into());
    Ok(UniqueSubsetReport {
        zero_provenance,
        wpc,
        principal_meet_trivial,
        statement: "the set of point characters {χ_k} is open, dense and invariant; its complement is the unique non-empty proper closed invariant subset of the boundary".into(),
        dense_orbit_certificate:
            "a level character selects the zero member iff it is χ_k for k = its representative; these are exactly the isolated points"
                .into(),
    })
}
