//! Finite approximations of limit sets: `ω(x)` over all long words, `ω_w(x)`
//! along the prefixes of a word, and `ω_{F_w}(x)` over the words extending a
//! long prefix of it. Also the constructions realizing a finite set as such
//! a limit set.

mod realize;

use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicDistance;
use crate::error::{Error, Result};
use crate::patterns::{hausdorff_blocks, Block, Configuration};
use crate::words::{Letter, ReducedWord, Signature};

pub use realize::{
    realize, realize_cict_as_omega_w, realize_ibt_as_omega_fw, realize_with_shadowing, stitch_stages, ConstructionLog,
    Realization, RealizeMode, StageLog, StageWitness, StitchedSites,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Omega,
    OmegaW,
    OmegaFw,
}

impl FromStr for LimitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(LimitKind::Omega),
            "omega-w" => Ok(LimitKind::OmegaW),
            "omega-fw" => Ok(LimitKind::OmegaFw),
            _ => Err(Error::Parse(format!(
                "limit kind must be omega, omega-w or omega-fw, got {s:?}"
            ))),
        }
    }
}

/// The words `u` with `n < |u| <= N` that a limit-set approximation ranges
/// over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordRange {
    All {
        inner: usize,
        outer: usize,
    },
    /// Prefixes `w|_j` of a word.
    Prefixes {
        word: ReducedWord,
        inner: usize,
        outer: usize,
    },
    /// Words having `w|_n` as a prefix.
    Subtree {
        word: ReducedWord,
        inner: usize,
        outer: usize,
    },
}

impl WordRange {
    /// `word` must be at least `outer` long for prefixes and at least `inner`
    /// long for subtrees; longer words are truncated.
    pub fn new(kind: LimitKind, word: Option<&ReducedWord>, inner: usize, outer: usize) -> Result<Self> {
        let need = |len: usize| -> Result<ReducedWord> {
            let w = word.ok_or_else(|| Error::Construction("this limit kind needs a word".into()))?;
            if w.len() < len {
                return Err(Error::Construction(format!(
                    "word prefix has length {}, need at least {len}",
                    w.len()
                )));
            }
            Ok(w.prefix(len))
        };
        Ok(match kind {
            LimitKind::Omega => WordRange::All { inner, outer },
            LimitKind::OmegaW => WordRange::Prefixes {
                word: need(outer)?,
                inner,
                outer,
            },
            LimitKind::OmegaFw => WordRange::Subtree {
                word: need(inner)?,
                inner,
                outer,
            },
        })
    }

    pub fn inner(&self) -> usize {
        match self {
            WordRange::All { inner, .. } | WordRange::Prefixes { inner, .. } | WordRange::Subtree { inner, .. } => {
                *inner
            }
        }
    }

    pub fn outer(&self) -> usize {
        match self {
            WordRange::All { outer, .. } | WordRange::Prefixes { outer, .. } | WordRange::Subtree { outer, .. } => {
                *outer
            }
        }
    }

    pub fn contains(&self, u: &ReducedWord) -> bool {
        let (n, big_n) = (self.inner(), self.outer());
        if u.len() <= n || u.len() > big_n {
            return false;
        }
        match self {
            WordRange::All { .. } => true,
            WordRange::Prefixes { word, .. } => u.is_prefix_of(word),
            WordRange::Subtree { word, .. } => word.prefix(n).is_prefix_of(u),
        }
    }

    /// The words of the range, shortest first and in ball order.
    pub fn words(&self, sig: Signature) -> Result<Vec<ReducedWord>> {
        let (n, big_n) = (self.inner(), self.outer());
        if big_n <= n {
            return Ok(Vec::new());
        }
        Ok(match self {
            WordRange::All { .. } => sig.ball(big_n + 1)?.iter().filter(|u| u.len() > n).cloned().collect(),
            WordRange::Prefixes { word, .. } => (n + 1..=big_n).map(|j| word.prefix(j)).collect(),
            WordRange::Subtree { word, .. } => {
                let stem = word.prefix(n);
                sig.ball(big_n - n + 1)?
                    .iter()
                    .filter(|v| !v.is_empty())
                    .map(|v| stem.concat(v))
                    .filter(|u| u.len() > n && stem.is_prefix_of(u))
                    .collect()
            }
        })
    }
}

/// A distinct block of the approximation and the first word producing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Member {
    pub word: ReducedWord,
    pub block: Block,
}

/// `{σ_u(x)|Σ^D : u in the range}`, deduplicated in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitApproximation {
    pub kind: LimitKind,
    pub inner: usize,
    pub outer: usize,
    pub depth: usize,
    pub candidates: usize,
    pub members: Vec<Member>,
}

impl LimitApproximation {
    pub fn blocks(&self) -> Vec<Block> {
        self.members.iter().map(|m| m.block.clone()).collect()
    }
}

pub fn approximate(
    kind: LimitKind,
    x: &Configuration,
    word: Option<&ReducedWord>,
    inner: usize,
    outer: usize,
    depth: usize,
) -> Result<LimitApproximation> {
    let range = WordRange::new(kind, word, inner, outer)?;
    let sig = x.signature();
    if let Some(w) = word {
        sig.check_word(w)?;
    }
    let words = range.words(sig)?;
    let mut seen: HashMap<Block, ()> = HashMap::new();
    let mut members = Vec::new();
    for u in &words {
        let block = x.shift(u).central_block(depth)?;
        if seen.insert(block.clone(), ()).is_none() {
            members.push(Member { word: u.clone(), block });
        }
    }
    Ok(LimitApproximation {
        kind,
        inner,
        outer,
        depth,
        candidates: words.len(),
        members,
    })
}

pub fn omega_approx(x: &Configuration, inner: usize, outer: usize, depth: usize) -> Result<LimitApproximation> {
    approximate(LimitKind::Omega, x, None, inner, outer, depth)
}

pub fn omega_w_approx(
    x: &Configuration,
    word: &ReducedWord,
    inner: usize,
    outer: usize,
    depth: usize,
) -> Result<LimitApproximation> {
    approximate(LimitKind::OmegaW, x, Some(word), inner, outer, depth)
}

/// Ranges over `u` with `w|_n` a prefix and `n < |u| <= N`.
pub fn omega_fw_approx(
    x: &Configuration,
    word: &ReducedWord,
    inner: usize,
    outer: usize,
    depth: usize,
) -> Result<LimitApproximation> {
    approximate(LimitKind::OmegaFw, x, Some(word), inner, outer, depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub inner: usize,
    pub members: usize,
    /// Hausdorff distance to the previous row.
    pub step: Option<DyadicDistance>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizationScan {
    pub kind: LimitKind,
    pub depth: usize,
    pub outer: usize,
    pub rows: Vec<ScanRow>,
    /// Smallest `n >= 1` from which every step is below resolution.
    pub stabilized_at: Option<usize>,
}

/// Approximations `A_n` over `n < |u| <= N_max` for `n = 0..=N_max/2`, and
/// where consecutive ones stop changing on `Σ^D`.
pub fn stabilization_scan(
    kind: LimitKind,
    x: &Configuration,
    word: Option<&ReducedWord>,
    depth: usize,
    outer: usize,
) -> Result<StabilizationScan> {
    let mut rows = Vec::new();
    let mut prev: Option<Vec<Block>> = None;
    for n in 0..=outer / 2 {
        let a = approximate(kind, x, word, n, outer, depth)?;
        let blocks = a.blocks();
        let step = match &prev {
            Some(p) => Some(hausdorff_blocks(p, &blocks)?),
            None => None,
        };
        rows.push(ScanRow {
            inner: n,
            members: blocks.len(),
            step,
        });
        prev = Some(blocks);
    }
    let stable = |r: &ScanRow| matches!(r.step, Some(DyadicDistance::AtMost(_)));
    let stabilized_at = (1..rows.len()).find(|&n| rows[n..].iter().all(stable));
    Ok(StabilizationScan {
        kind,
        depth,
        outer,
        rows,
        stabilized_at,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceFailure {
    pub member: usize,
    pub word: ReducedWord,
    pub letter: Option<Letter>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub kind: LimitKind,
    pub depth: usize,
    pub members: usize,
    pub passes: bool,
    pub failures: Vec<InvarianceFailure>,
}

/// Checks the invariance each limit set enjoys, on an approximation of depth
/// at least `D + 1` compared on `Σ^D`:
/// `ω` and `ω_{F_w}` are invariant under every generator; over a group every
/// member of `ω_w` has at least two generators keeping it inside; over a
/// monoid every member has a successor and a predecessor inside.
pub fn invariance_check(approx: &LimitApproximation, depth: usize) -> Result<InvarianceReport> {
    if approx.depth < depth + 1 {
        return Err(Error::DepthTooSmall {
            needed: depth + 1,
            got: approx.depth,
        });
    }
    let sig = match approx.members.first() {
        Some(m) => m.block.signature(),
        None => {
            return Ok(InvarianceReport {
                kind: approx.kind,
                depth,
                members: 0,
                passes: true,
                failures: Vec::new(),
            })
        }
    };
    let truncated: Vec<Block> = approx
        .members
        .iter()
        .map(|m| m.block.restrict(depth))
        .collect::<Result<_>>()?;
    let inside = |b: &Block| truncated.contains(b);
    let shifted = |m: &Member, l: Letter| m.block.sub_block(&ReducedWord::letter(l), depth);
    let mut failures = Vec::new();
    for (i, m) in approx.members.iter().enumerate() {
        let mut good = Vec::new();
        for l in sig.letters() {
            if inside(&shifted(m, l)?) {
                good.push(l);
            } else if approx.kind != LimitKind::OmegaW {
                failures.push(InvarianceFailure {
                    member: i,
                    word: m.word.clone(),
                    letter: Some(l),
                    reason: "shift leaves the set".into(),
                });
            }
        }
        if approx.kind != LimitKind::OmegaW {
            continue;
        }
        if sig.is_group() {
            if good.len() < 2 {
                failures.push(InvarianceFailure {
                    member: i,
                    word: m.word.clone(),
                    letter: None,
                    reason: format!("only {} generators keep it inside", good.len()),
                });
            }
        } else {
            if good.is_empty() {
                failures.push(InvarianceFailure {
                    member: i,
                    word: m.word.clone(),
                    letter: None,
                    reason: "no successor inside".into(),
                });
            }
            let mut has_pred = false;
            'pred: for z in &approx.members {
                for l in sig.letters() {
                    if shifted(z, l)? == truncated[i] {
                        has_pred = true;
                        break 'pred;
                    }
                }
            }
            if !has_pred {
                failures.push(InvarianceFailure {
                    member: i,
                    word: m.word.clone(),
                    letter: None,
                    reason: "no predecessor inside".into(),
                });
            }
        }
    }
    Ok(InvarianceReport {
        kind: approx.kind,
        depth,
        members: approx.members.len(),
        passes: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    #[test]
    fn constant_point_has_one_member() {
        let x = Configuration::constant(Signature::group(2), 1);
        let a = omega_approx(&x, 1, 3, 3).unwrap();
        assert_eq!(a.members.len(), 1);
        let scan = stabilization_scan(LimitKind::Omega, &x, None, 2, 4).unwrap();
        assert_eq!(scan.stabilized_at, Some(1));
    }

    #[test]
    fn parity_along_a_word() {
        let sig = Signature::monoid(1);
        let x = fixtures::parity_pair(sig).remove(0);
        let word = w("aaaaaaaaaa");
        let a = omega_w_approx(&x, &word, 2, 8, 3).unwrap();
        assert_eq!(a.members.len(), 2);
        assert!(invariance_check(&a, 2).unwrap().passes);
    }

    #[test]
    fn subtree_range_nests_in_full_range() {
        let sig = Signature::group(2);
        let word = w("abab");
        let sub = WordRange::new(LimitKind::OmegaFw, Some(&word), 2, 4).unwrap();
        let all = WordRange::new(LimitKind::Omega, None, 2, 4).unwrap();
        let words = sub.words(sig).unwrap();
        assert_eq!(words.len(), 3 + 9);
        assert!(words.iter().all(|u| sub.contains(u) && all.contains(u)));
    }
}
