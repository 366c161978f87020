//! Orchestration: run the property checkers over a generated family in a
//! fixed order and assemble the structural report with its classification
//! chain.

use crate::action::{validate, Action};
use crate::family::{self, ConstructibleFamily};
use crate::groupoid::{self, ExactnessResult};
use crate::monoid::MonoidKind;
use crate::report::{CheckResult, StructuralReport, Verdict};
use crate::Error;

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub depth: usize,
    pub word_bound: usize,
    pub level: usize,
    /// Empty means all checks.
    pub checks: Vec<String>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            depth: 3,
            word_bound: 6,
            level: 3,
            checks: Vec::new(),
        }
    }
}

fn wanted(opts: &AnalysisOptions, name: &str) -> bool {
    opts.checks.is_empty() || opts.checks.iter().any(|c| c == name || c == "all")
}

/// Run the full pipeline: validate, generate, check, classify.
pub fn analyze(action: &Action, opts: &AnalysisOptions) -> Result<StructuralReport, Error> {
    let validation = validate(action, opts.word_bound)?;
    let family = family::generate(action, opts.depth);
    let level = format!("depth {}, word bound {}", opts.depth, opts.word_bound);
    let mut checks: Vec<CheckResult> = Vec::new();
    let push = |name: &str, verdict: Verdict, citation: &str, checks: &mut Vec<CheckResult>| {
        checks.push(CheckResult {
            name: name.to_string(),
            verdict,
            level: level.clone(),
            citation: citation.to_string(),
        });
    };

    push(
        "faithful",
        validation.faithful.clone(),
        "standing assumption: distinct monoid elements act by distinct endomorphisms",
        &mut checks,
    );
    push(
        "left_reversible",
        action.monoid().left_reversible(),
        "sS ∩ tS ≠ ∅ for all s, t",
        &mut checks,
    );

    let exact = groupoid::check_exact(action, &family, opts.word_bound);
    if wanted(opts, "exact") {
        push(
            "exact",
            exact.verdict.clone(),
            match action {
                Action::Matrix(_) => {
                    "exact iff the largest subgroup with automorphic restriction is trivial; for one matrix, iff its characteristic polynomial has no divisor with constant term ±1"
                }
                Action::Shift(_) => "full shifts are exact: the principal right ideals intersect trivially",
            },
            &mut checks,
        );
    }
    if wanted(opts, "top_free") {
        push(
            "topologically_free",
            groupoid::check_top_free(action, &exact),
            "for abelian coefficients the boundary groupoid is topologically free iff the action is exact",
            &mut checks,
        );
    }
    let fi = groupoid::check_fi(action);
    if wanted(opts, "fi") {
        push(
            "finite_index",
            fi.clone(),
            "finite index property: [G : σ_s(G)] < ∞ for every generator",
            &mut checks,
        );
    }
    if wanted(opts, "pc") {
        push(
            "principal_cofinal",
            family::check_pc(action, &family, opts.word_bound),
            "every constructible subgroup contains a principal one",
            &mut checks,
        );
    }
    let wpc = family::check_wpc(action, &family, opts.word_bound);
    if wanted(opts, "wpc") {
        push(
            "weak_principal_cofinal",
            wpc.clone(),
            "every nonzero constructible subgroup contains a principal one",
            &mut checks,
        );
    }
    if wanted(opts, "ii") {
        push(
            "infinite_index",
            family::check_ii(action, &family),
            "every strict containment of constructible subgroups has infinite index",
            &mut checks,
        );
    }
    if wanted(opts, "jf") {
        push(
            "joint_faithfulness",
            crate::iso::check_jf(action, &family, opts.word_bound),
            "a globalized word fixing a constructible subgroup pointwise is the identity",
            &mut checks,
        );
    }
    if wanted(opts, "e_unitary") {
        push(
            "e_unitary",
            crate::iso::check_e_unitary(action, &family, opts.word_bound.min(4)),
            "the inverse semigroup is 0-E-unitary iff its translation-free part is E-unitary",
            &mut checks,
        );
    }
    let hausdorff = groupoid::check_hausdorff(action, &family, opts.word_bound.min(4));
    if wanted(opts, "hausdorff") {
        push(
            "hausdorff",
            hausdorff.clone(),
            "Hausdorff iff every fix set is a finite union of constructible cosets",
            &mut checks,
        );
    }
    let minimal = groupoid::check_minimal(action, &family, opts.word_bound.min(4));
    if wanted(opts, "minimal") {
        push(
            "minimal",
            minimal.clone(),
            "minimality of the boundary groupoid; fails exactly when a proper closed invariant subset exists",
            &mut checks,
        );
    }
    let purely_infinite = if validation.automorphic {
        Verdict::fails(
            "automorphic action: the boundary is a single point and carries an invariant measure",
        )
    } else if minimal.is_holds() {
        Verdict::holds("a minimal boundary groupoid is purely infinite: every basic compact open set admits two disjoint compressions")
    } else if minimal.is_fails() && wpc.is_holds() && family.zero_member().is_some() {
        Verdict::holds("the reduction to the unique proper closed invariant subset is purely infinite")
    } else {
        Verdict::unknown(opts.word_bound)
    };
    if wanted(opts, "purely_infinite") {
        push(
            "purely_infinite",
            purely_infinite.clone(),
            "minimal implies purely infinite; in the unique-ideal case the reduction is purely infinite",
            &mut checks,
        );
    }

    let orbits = family::ie_orbits(action, &family, opts.word_bound.min(3));
    let isotropy = groupoid::isotropy_at_chi_e(action, &family, &exact);
    let mut notes = vec![
        format!("automorphic: {}", validation.automorphic),
        format!(
            "constructible family at depth {}: {} members, stabilized = {}",
            opts.depth,
            family.members.len(),
            family.stabilized
        ),
        format!("orbits of the generator moves on the family: {}", orbits.len()),
        format!(
            "core subgroup G_c = {}{}",
            isotropy.core_subgroup.describe(action),
            if isotropy.core_exactly_known {
                " (exact)"
            } else {
                " (level upper bound)"
            }
        ),
        format!(
            "isotropy at the identity character is generated by translations from G_c and the core semigroup ({})",
            isotropy.ie_generators.join(", ")
        ),
    ];

    let classification = if validation.automorphic {
        "automorphic action: every generator is invertible, the constructible family is {G} and the boundary is a single point; the non-automorphic structural theory does not apply".to_string()
    } else {
        classify_chain(
            action,
            &family,
            &exact,
            &minimal,
            &hausdorff,
            &wpc,
            &purely_infinite,
            &mut notes,
            opts,
        )
    };

    Ok(StructuralReport {
        version: 1,
        action: action.describe(),
        checks,
        classification,
        notes,
        timing_ms: 0,
    })
}

#[allow(clippy::too_many_arguments)]
fn classify_chain(
    action: &Action,
    family: &ConstructibleFamily,
    exact: &ExactnessResult,
    minimal: &Verdict,
    hausdorff: &Verdict,
    wpc: &Verdict,
    purely_infinite: &Verdict,
    notes: &mut Vec<String>,
    opts: &AnalysisOptions,
) -> String {
    let commutative = action.monoid().left_reversible().is_holds();
    // Cuntz detection: the full shift over Z/n indexed by the natural numbers
    let cuntz = match action {
        Action::Shift(a) => {
            let n_monoid = matches!(
                a.monoid.kind,
                MonoidKind::FreeAbelian { rank: 1 } | MonoidKind::Free { letters: 1 }
            );
            if n_monoid && a.sigma.name.starts_with("Z/") {
                Some(a.sigma.order)
            } else {
                None
            }
        }
        _ => None,
    };

    if minimal.is_holds() && exact.verdict.is_holds() {
        let mut s = String::from("exact ✓, minimal ✓, topologically free ✓, purely infinite ✓");
        if hausdorff.is_holds() {
            s.push_str(", Hausdorff ✓");
        }
        s.push_str(
            ": the essential algebra of the boundary groupoid is simple and purely infinite",
        );
        if commutative {
            s.push_str(
                "; the enveloping group is abelian, hence amenable, so the concrete algebra is simple, purely infinite, nuclear, and satisfies the UCT (UCT Kirchberg algebra)",
            );
        } else {
            s.push_str(
                "; under the cited amenability hypothesis on the enveloping group the concrete algebra is a UCT Kirchberg algebra",
            );
            notes.push(
                "amenability of the enveloping group is reported as an assumption, not decided"
                    .to_string(),
            );
        }
        if let Some(n) = cuntz {
            s.push_str(&format!("; the concrete algebra is the Cuntz algebra O_{}", n));
        }
        return s;
    }
    if family.zero_member().is_some() && wpc.is_holds() {
        if let Ok(rep) =
            crate::boundary::unique_invariant_subset_report(action, family, opts.word_bound)
        {
            notes.push(format!(
                "zero subgroup provenance: {}; dense orbit certificate: {}",
                rep.zero_provenance, rep.dense_orbit_certificate
            ));
            return "not minimal: {e} is constructible; the boundary has a unique non-empty, proper closed invariant subset; the concrete algebra has a unique non-zero, proper ideal (the compact operators) and the quotient is simple and purely infinite".to_string();
        }
    }
    if exact.verdict.is_fails() {
        let mut s = format!(
            "NOT exact and NOT topologically free: G_c = {}",
            exact.core_subgroup.describe(action)
        );
        if minimal.is_holds() {
            s.push_str("; still minimal");
        }
        if purely_infinite.is_holds() {
            s.push_str(" and purely infinite");
        }
        return s;
    }
    "no headline classification at this level; see the individual verdicts".to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::test_actions::*;

    #[test]
    fn classify_times2() {
        let r = analyze(&times2(), &AnalysisOptions::default()).unwrap();
        assert!(r.classification.contains("UCT Kirchberg"));
        assert!(r.check("exact").unwrap().verdict.is_holds());
        assert!(r.check("minimal").unwrap().verdict.is_holds());
        assert!(r.check("hausdorff").unwrap().verdict.is_holds());
        assert!(r.check("topologically_free").unwrap().verdict.is_holds());
        assert!(r.check("purely_infinite").unwrap().verdict.is_holds());
    }

    #[test]
    fn classify_nshift() {
        let r = analyze(&nshift(3), &AnalysisOptions::default()).unwrap();
        assert!(r.classification.contains("Cuntz algebra O_3"));
        assert!(r.check("finite_index").unwrap().verdict.is_holds());
        assert!(r.check("left_reversible").unwrap().verdict.is_holds());
    }

    #[test]
    fn classify_free2_shift() {
        let opts = AnalysisOptions {
            depth: 2,
            word_bound: 3,
            ..Default::default()
        };
        let r = analyze(&free2_shift(2), &opts).unwrap();
        assert!(r.classification.contains("unique non-zero, proper ideal"));
        assert!(r.check("minimal").unwrap().verdict.is_fails());
        assert!(r.check("weak_principal_cofinal").unwrap().verdict.is_holds());
        assert!(r.check("infinite_index").unwrap().verdict.is_holds());
    }

    #[test]
    fn classify_diag21() {
        let r = analyze(&diag(2, 1), &AnalysisOptions::default()).unwrap();
        assert!(r.classification.contains("NOT exact"));
        assert!(r.classification.contains("minimal"));
        assert!(r.classification.contains("purely infinite"));
        assert!(r.check("exact").unwrap().verdict.is_fails());
        assert!(r.check("topologically_free").unwrap().verdict.is_fails());
    }

    #[test]
    fn report_roundtrip() {
        let r = analyze(&times2(), &AnalysisOptions::default()).unwrap();
        let json = r.to_json();
        let back = StructuralReport::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        assert!(!r.render_text().is_empty());
    }

    #[test]
    fn deterministic_reports() {
        for action in [times2(), diag(2, 1), nshift(2), free2_shift(2)] {
            let opts = AnalysisOptions {
                depth: 2,
                word_bound: 3,
                ..Default::default()
            };
            let a = analyze(&action, &opts).unwrap().to_json();
            let b = analyze(&action, &opts).unwrap().to_json();
            assert_eq!(a, b);
        }
    }
}
