//! Monoid presentations and word calculus for the three supported kinds:
//! free monoids, free abelian monoids N^d, and numerical monoids (additive
//! submonoids of the positive integers). All three are left cancellative
//! with decidable ideal arithmetic at desk scale.

use crate::report::Verdict;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonoidKind {
    Free { letters: usize },
    FreeAbelian { rank: usize },
    Numerical { generators: Vec<u64> },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonoidPresentation {
    pub kind: MonoidKind,
    gen_names: Vec<String>,
}

/// A monoid element in canonical form: raw word for free monoids, sorted
/// exponent vector for N^d, integer value for numerical monoids.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Word {
    Free(Vec<usize>),
    Abelian(Vec<u64>),
    Numeric(u64),
}

impl MonoidPresentation {
    pub fn new(kind: MonoidKind) -> Result<Self, crate::Error> {
        let gen_names = match &kind {
            MonoidKind::Free { letters } => {
                if *letters == 0 {
                    return Err(crate::Error::InvalidAction(
                        "free monoid needs at least one letter".into(),
                    ));
                }
                (0..*letters).map(letter_name).collect()
            }
            MonoidKind::FreeAbelian { rank } => {
                if *rank == 0 {
                    return Err(crate::Error::InvalidAction(
                        "free abelian monoid needs positive rank".into(),
                    ));
                }
                (0..*rank).map(letter_name).collect()
            }
            MonoidKind::Numerical { generators } => {
                if generators.is_empty() || generators.iter().any(|&g| g == 0) {
                    return Err(crate::Error::InvalidAction(
                        "numerical monoid needs positive generators".into(),
                    ));
                }
                let mut sorted = generators.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.iter().map(|g| g.to_string()).collect()
            }
        };
        let kind = match kind {
            MonoidKind::Numerical { generators } => {
                let mut sorted = generators;
                sorted.sort_unstable();
                sorted.dedup();
                MonoidKind::Numerical { generators: sorted }
            }
            k => k,
        };
        Ok(MonoidPresentation { kind, gen_names })
    }

    pub fn num_generators(&self) -> usize {
        self.gen_names.len()
    }

    pub fn generator_name(&self, i: usize) -> &str {
        &self.gen_names[i]
    }

    pub fn identity(&self) -> Word {
        match &self.kind {
            MonoidKind::Free { .. } => Word::Free(vec![]),
            MonoidKind::FreeAbelian { rank } => Word::Abelian(vec![0; *rank]),
            MonoidKind::Numerical { .. } => Word::Numeric(0),
        }
    }

    pub fn generator(&self, i: usize) -> Word {
        match &self.kind {
            MonoidKind::Free { .. } => Word::Free(vec![i]),
            MonoidKind::FreeAbelian { rank } => {
                let mut e = vec![0u64; *rank];
                e[i] = 1;
                Word::Abelian(e)
            }
            MonoidKind::Numerical { generators } => Word::Numeric(generators[i]),
        }
    }

    pub fn generators(&self) -> Vec<Word> {
        (0..self.num_generators()).map(|i| self.generator(i)).collect()
    }

    pub fn mul(&self, a: &Word, b: &Word) -> Word {
        match (a, b) {
            (Word::Free(x), Word::Free(y)) => {
                let mut w = x.clone();
                w.extend_from_slice(y);
                Word::Free(w)
            }
            (Word::Abelian(x), Word::Abelian(y)) => {
                Word::Abelian(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            (Word::Numeric(x), Word::Numeric(y)) => Word::Numeric(x + y),
            _ => panic!("mixed word kinds"),
        }
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        match w {
            Word::Free(x) => x.is_empty(),
            Word::Abelian(x) => x.iter().all(|&v| v == 0),
            Word::Numeric(x) => *x == 0,
        }
    }

    /// Number of generator letters in the word (minimal for numerical kinds).
    pub fn length(&self, w: &Word) -> usize {
        match w {
            Word::Free(x) => x.len(),
            Word::Abelian(x) => x.iter().sum::<u64>() as usize,
            Word::Numeric(x) => self
                .numeric_factorization(*x)
                .map(|f| f.iter().sum::<u64>() as usize)
                .unwrap_or(usize::MAX),
        }
    }

    /// All distinct monoid elements expressible with at most `len` generators,
    /// identity included, in deterministic order.
    pub fn words_up_to(&self, len: usize) -> Vec<Word> {
        match &self.kind {
            MonoidKind::Free { letters } => {
                let mut out = vec![Word::Free(vec![])];
                let mut frontier = vec![vec![]];
                for _ in 0..len {
                    let mut next = Vec::new();
                    for w in &frontier {
                        for l in 0..*letters {
                            let mut nw = w.clone();
                            nw.push(l);
                            out.push(Word::Free(nw.clone()));
                            next.push(nw);
                        }
                    }
                    frontier = next;
                }
                out
            }
            MonoidKind::FreeAbelian { rank } => {
                let mut out = Vec::new();
                let mut e = vec![0u64; *rank];
                loop {
                    if e.iter().sum::<u64>() as usize <= len {
                        out.push(Word::Abelian(e.clone()));
                    }
                    let mut i = 0;
                    loop {
                        if i == *rank {
                            out.sort();
                            return out;
                        }
                        e[i] += 1;
                        if e.iter().sum::<u64>() as usize <= len {
                            break;
                        }
                        e[i] = 0;
                        i += 1;
                    }
                }
            }
            MonoidKind::Numerical { generators } => {
                let mut values: BTreeSet<u64> = BTreeSet::new();
                values.insert(0);
                for _ in 0..len {
                    let snapshot: Vec<u64> = values.iter().cloned().collect();
                    for v in snapshot {
                        for g in generators {
                            values.insert(v + g);
                        }
                    }
                }
                values.into_iter().map(Word::Numeric).collect()
            }
        }
    }

    /// Non-identity words with at most `len` generators.
    pub fn nontrivial_words_up_to(&self, len: usize) -> Vec<Word> {
        self.words_up_to(len)
            .into_iter()
            .filter(|w| !self.is_identity(w))
            .collect()
    }

    /// sS ∩ tS ≠ ∅ for all s,t: holds for the abelian kinds and FREE(1),
    /// fails with witness for FREE(k ≥ 2).
    pub fn left_reversible(&self) -> Verdict {
        match &self.kind {
            MonoidKind::Free { letters } if *letters >= 2 => Verdict::fails(format!(
                "{}S ∩ {}S = ∅ in the free monoid",
                self.gen_names[0], self.gen_names[1]
            )),
            MonoidKind::Free { .. } => Verdict::holds("free monoid on one letter is commutative"),
            MonoidKind::FreeAbelian { .. } => Verdict::holds("commutative monoid"),
            MonoidKind::Numerical { .. } => Verdict::holds("commutative monoid"),
        }
    }

    /// Cancellative and right reversible; admits a group of fractions.
    pub fn is_left_ore(&self) -> bool {
        matches!(self.left_reversible(), Verdict::Holds { .. })
    }

    /// For left Ore kinds: α, β with α·t = β·u (so t u^{-1} = α^{-1} β).
    pub fn ore_pair(&self, t: &Word, u: &Word) -> Option<(Word, Word)> {
        match (t, u) {
            (Word::Abelian(tv), Word::Abelian(uv)) => {
                let m: Vec<u64> = tv.iter().zip(uv).map(|(a, b)| (*a).max(*b)).collect();
                let alpha: Vec<u64> = m.iter().zip(tv).map(|(a, b)| a - b).collect();
                let beta: Vec<u64> = m.iter().zip(uv).map(|(a, b)| a - b).collect();
                Some((Word::Abelian(alpha), Word::Abelian(beta)))
            }
            (Word::Numeric(tv), Word::Numeric(uv)) => {
                let start = (*tv).max(*uv);
                for w in start..start + 4 * self.numeric_conductor() + 1 {
                    if self.numeric_contains(w - tv) && self.numeric_contains(w - uv) {
                        return Some((Word::Numeric(w - tv), Word::Numeric(w - uv)));
                    }
                }
                None
            }
            (Word::Free(tv), Word::Free(uv)) => {
                // only FREE(1) is Ore; words are powers of the single letter
                let (a, b) = (tv.len() as u64, uv.len() as u64);
                let m = a.max(b);
                Some((
                    Word::Free(vec![0; (m - a) as usize]),
                    Word::Free(vec![0; (m - b) as usize]),
                ))
            }
            _ => None,
        }
    }

    /// Membership of a value in the numerical monoid.
    pub fn numeric_contains(&self, v: u64) -> bool {
        match &self.kind {
            MonoidKind::Numerical { .. } => self.numeric_factorization(v).is_some(),
            _ => panic!("numeric_contains on non-numerical kind"),
        }
    }

    /// Factor a value over the numerical generators (counts per generator).
    pub fn numeric_factorization(&self, v: u64) -> Option<Vec<u64>> {
        let generators = match &self.kind {
            MonoidKind::Numerical { generators } => generators,
            _ => panic!("numeric_factorization on non-numerical kind"),
        };
        // DP over values; desk scale.
        let v_usize = usize::try_from(v).ok()?;
        let mut table: Vec<Option<(usize, u64)>> = vec![None; v_usize + 1];
        table[0] = Some((usize::MAX, 0));
        for x in 1..=v_usize {
            for (gi, g) in generators.iter().enumerate() {
                let g = *g as usize;
                if g <= x && table[x - g].is_some() {
                    table[x] = Some((gi, (x - g) as u64));
                    break;
                }
            }
        }
        table[v_usize]?;
        let mut counts = vec![0u64; generators.len()];
        let mut cur = v_usize;
        while cur > 0 {
            let (gi, prev) = table[cur].unwrap();
            counts[gi] += 1;
            cur = prev as usize;
        }
        Some(counts)
    }

    /// Bound past which every multiple of gcd(generators) is representable.
    pub fn numeric_conductor(&self) -> u64 {
        match &self.kind {
            MonoidKind::Numerical { generators } => {
                let g = generators.iter().fold(0u64, |a, &b| gcd(a, b));
                if generators.len() == 1 {
                    return generators[0];
                }
                let a = generators[0] / g;
                let b = generators[1] / g;
                // crude Frobenius-style bound, enough for desk scale
                g * (a * b + 1)
            }
            _ => panic!("numeric_conductor on non-numerical kind"),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            MonoidKind::Free { letters } => format!("FREE({})", letters),
            MonoidKind::FreeAbelian { rank } => format!("FREE_ABELIAN({})", rank),
            MonoidKind::Numerical { generators } => {
                let names: Vec<String> = generators.iter().map(|g| g.to_string()).collect();
                format!("NUMERICAL<{}>", names.join(","))
            }
        }
    }

    pub fn display_word(&self, w: &Word) -> String {
        match w {
            Word::Free(x) => {
                if x.is_empty() {
                    "1".to_string()
                } else {
                    x.iter().map(|&l| self.gen_names[l].clone()).collect::<Vec<_>>().join("")
                }
            }
            Word::Abelian(x) => {
                if x.iter().all(|&v| v == 0) {
                    return "1".to_string();
                }
                let mut parts = Vec::new();
                for (i, &e) in x.iter().enumerate() {
                    if e == 1 {
                        parts.push(self.gen_names[i].clone());
                    } else if e > 1 {
                        parts.push(format!("{}^{}", self.gen_names[i], e));
                    }
                }
                parts.join("·")
            }
            Word::Numeric(v) => v.to_string(),
        }
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn letter_name(i: usize) -> String {
    let letters = ["a", "b", "c", "d", "e", "f", "g", "h"];
    if i < letters.len() {
        letters[i].to_string()
    } else {
        format!("x{}", i)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::Free(x) => write!(f, "w{:?}", x),
            Word::Abelian(x) => write!(f, "{:?}", x),
            Word::Numeric(v) => write!(f, "{}", v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_enumeration_counts() {
        let free2 = MonoidPresentation::new(MonoidKind::Free { letters: 2 }).unwrap();
        assert_eq!(free2.words_up_to(3).len(), 1 + 2 + 4 + 8);
        let n2 = MonoidPresentation::new(MonoidKind::FreeAbelian { rank: 2 }).unwrap();
        assert_eq!(n2.words_up_to(2).len(), 6); // (0,0),(1,0),(0,1),(2,0),(1,1),(0,2)
        let num = MonoidPresentation::new(MonoidKind::Numerical { generators: vec![2, 3] }).unwrap();
        let vals: Vec<u64> = num
            .words_up_to(2)
            .iter()
            .map(|w| match w {
                Word::Numeric(v) => *v,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(vals, vec![0, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn reversibility() {
        let free2 = MonoidPresentation::new(MonoidKind::Free { letters: 2 }).unwrap();
        assert!(matches!(free2.left_reversible(), Verdict::Fails { .. }));
        let free1 = MonoidPresentation::new(MonoidKind::Free { letters: 1 }).unwrap();
        assert!(matches!(free1.left_reversible(), Verdict::Holds { .. }));
        let n2 = MonoidPresentation::new(MonoidKind::FreeAbelian { rank: 2 }).unwrap();
        assert!(matches!(n2.left_reversible(), Verdict::Holds { .. }));
        let num = MonoidPresentation::new(MonoidKind::Numerical { generators: vec![2, 3] }).unwrap();
        assert!(matches!(num.left_reversible(), Verdict::Holds { .. }));
    }

    #[test]
    fn ore_pairs() {
        let n2 = MonoidPresentation::new(MonoidKind::FreeAbelian { rank: 2 }).unwrap();
        let t = Word::Abelian(vec![2, 0]);
        let u = Word::Abelian(vec![1, 1]);
        let (alpha, beta) = n2.ore_pair(&t, &u).unwrap();
        assert_eq!(n2.mul(&alpha, &t), n2.mul(&beta, &u));
        let num = MonoidPresentation::new(MonoidKind::Numerical { generators: vec![2, 3] }).unwrap();
        let (a, b) = num.ore_pair(&Word::Numeric(2), &Word::Numeric(3)).unwrap();
        assert_eq!(num.mul(&a, &Word::Numeric(2)), num.mul(&b, &Word::Numeric(3)));
    }

    #[test]
    fn numeric_membership() {
        let num = MonoidPresentation::new(MonoidKind::Numerical { generators: vec![3, 5] }).unwrap();
        assert!(num.numeric_contains(0));
        assert!(!num.numeric_contains(1));
        assert!(!num.numeric_contains(2));
        assert!(num.numeric_contains(3));
        assert!(!num.numeric_contains(4));
        assert!(num.numeric_contains(8));
        assert!(!num.numeric_contains(7));
        for v in 8..40 {
            assert!(num.numeric_contains(v), "conductor of <3,5> is 8");
        }
    }
}
