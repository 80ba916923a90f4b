//! Shifts of finite type given by forbidden blocks, membership checks and
//! point enumeration, and the search for obstructions to finite type.
//!
//! A forbidden `M`-block occurs at `u` inside a block of depth `n` only when
//! the whole ball `u Σ^M` fits inside `Σ^n`, that is when `|u| + M <= n`.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::patterns::{check_sig, Alphabet, Block, Configuration, Sym};
use crate::words::{ball_cap, Letter, ReducedWord, Signature};

/// A shift of finite type: configurations avoiding every forbidden block.
/// All forbidden blocks share the depth `step`.
#[derive(Clone, Debug)]
pub struct ShiftSystem {
    sig: Signature,
    alphabet: Alphabet,
    step: usize,
    forbidden: Vec<Block>,
    lookup: HashSet<Vec<Sym>>,
}

/// For a block depth `n` and window depth `m`: for each position `u` with
/// `|u| + m <= n`, the ball indices of `u v` for `v` in `Σ^m`.
#[derive(Debug)]
pub struct PositionTable {
    pub positions: Vec<ReducedWord>,
    pub windows: Vec<Vec<u32>>,
}

type TableCache = Mutex<HashMap<(Signature, usize, usize), Arc<PositionTable>>>;

pub fn position_table(sig: Signature, n: usize, m: usize) -> Result<Arc<PositionTable>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache").get(&(sig, n, m)) {
        return Ok(t.clone());
    }
    let window = sig.ball(m)?;
    let positions: Vec<ReducedWord> = if n >= m {
        sig.ball(n - m + 1)?.to_vec()
    } else {
        Vec::new()
    };
    let windows = positions
        .iter()
        .map(|u| window.iter().map(|v| sig.ball_index(&u.concat(v)) as u32).collect())
        .collect();
    let table = Arc::new(PositionTable { positions, windows });
    cache.lock().expect("table cache").insert((sig, n, m), table.clone());
    Ok(table)
}

/// Expands every forbidden block of depth below `step` into all of its
/// extensions to depth `step`. The result is sorted and deduplicated.
pub fn normalize_forbidden(sig: Signature, alphabet: &Alphabet, blocks: &[Block], step: usize) -> Result<Vec<Block>> {
    let full = sig.ball(step)?.len();
    let mut out: Vec<Block> = Vec::new();
    for b in blocks {
        check_sig(sig, b.signature())?;
        if b.depth() > step {
            return Err(Error::Construction(format!(
                "forbidden block of depth {} exceeds step {step}",
                b.depth()
            )));
        }
        if let Some(&s) = b.entries().iter().find(|&&s| s as usize >= alphabet.len()) {
            return Err(Error::Construction(format!("symbol {s} is not in the alphabet")));
        }
        let free = full - b.entries().len();
        let count = (alphabet.len() as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
        if count.saturating_add(out.len() as u128) > ball_cap() as u128 {
            return Err(Error::ResourceLimit {
                what: "normalized forbidden blocks".into(),
                needed: count,
                cap: ball_cap(),
            });
        }
        let fixed = b.entries().len();
        let k = alphabet.len() as u128;
        let mut entries = b.entries().to_vec();
        entries.resize(full, 0);
        for mut code in 0..count {
            for slot in entries[fixed..].iter_mut().rev() {
                *slot = (code % k) as Sym;
                code /= k;
            }
            out.push(Block::new(sig, step, entries.clone())?);
        }
    }
    out.sort_by(|a, b| a.entries().cmp(b.entries()));
    out.dedup();
    Ok(out)
}

/// An occurrence of a forbidden block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub position: ReducedWord,
    pub forbidden_index: usize,
}

impl ShiftSystem {
    /// Builds a system whose step is the largest forbidden depth (at least 1).
    pub fn new(sig: Signature, alphabet: Alphabet, forbidden: Vec<Block>) -> Result<Self> {
        let step = forbidden.iter().map(Block::depth).max().unwrap_or(1).max(1);
        ShiftSystem::with_step(sig, alphabet, forbidden, step)
    }

    pub fn with_step(sig: Signature, alphabet: Alphabet, forbidden: Vec<Block>, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::Construction("step must be at least 1".into()));
        }
        let forbidden = normalize_forbidden(sig, &alphabet, &forbidden, step)?;
        let lookup = forbidden.iter().map(|b| b.entries().to_vec()).collect();
        Ok(ShiftSystem {
            sig,
            alphabet,
            step,
            forbidden,
            lookup,
        })
    }

    pub fn full_shift(sig: Signature, alphabet: Alphabet) -> Self {
        ShiftSystem::new(sig, alphabet, Vec::new()).expect("full shift")
    }

    /// The system of depth-2 blocks in which every neighbor `(c, l, d)` with
    /// center `c`, letter `l` and neighbor symbol `d` satisfies `allowed`.
    pub fn nearest_neighbor(
        sig: Signature,
        alphabet: Alphabet,
        allowed: impl Fn(Sym, Letter, Sym) -> bool,
    ) -> Result<Self> {
        let letters = sig.letters();
        let k = alphabet.len() as Sym;
        let mut forbidden = Vec::new();
        let mut entries = vec![0 as Sym; letters.len() + 1];
        loop {
            let ok = letters
                .iter()
                .enumerate()
                .all(|(i, &l)| allowed(entries[0], l, entries[i + 1]));
            if !ok {
                forbidden.push(Block::new(sig, 2, entries.clone())?);
            }
            let mut i = entries.len();
            loop {
                if i == 0 {
                    return ShiftSystem::with_step(sig, alphabet, forbidden, 2);
                }
                i -= 1;
                entries[i] += 1;
                if entries[i] < k {
                    break;
                }
                entries[i] = 0;
            }
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// The step `M`: every forbidden block lives on `Σ^M`.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn forbidden(&self) -> &[Block] {
        &self.forbidden
    }

    pub fn is_forbidden(&self, window: &[Sym]) -> bool {
        self.lookup.contains(window)
    }

    /// Every forbidden occurrence inside `block`, in ball order of positions.
    pub fn occurrences(&self, block: &Block) -> Result<Vec<Occurrence>> {
        check_sig(self.sig, block.signature())?;
        let table = position_table(self.sig, block.depth(), self.step)?;
        let mut window = Vec::with_capacity(self.sig.ball(self.step)?.len());
        let mut out = Vec::new();
        for (u, idx) in table.positions.iter().zip(&table.windows) {
            window.clear();
            window.extend(idx.iter().map(|&i| block.entries()[i as usize]));
            if self.lookup.contains(&window) {
                let forbidden_index = self
                    .forbidden
                    .binary_search_by(|b| b.entries().cmp(&window))
                    .expect("forbidden block is listed");
                out.push(Occurrence {
                    position: u.clone(),
                    forbidden_index,
                });
            }
        }
        Ok(out)
    }

    pub fn is_admissible(&self, block: &Block) -> Result<bool> {
        check_sig(self.sig, block.signature())?;
        if block.entries().iter().any(|&s| s as usize >= self.alphabet.len()) {
            return Ok(false);
        }
        let table = position_table(self.sig, block.depth(), self.step)?;
        let mut window = Vec::new();
        for idx in &table.windows {
            window.clear();
            window.extend(idx.iter().map(|&i| block.entries()[i as usize]));
            if self.lookup.contains(&window) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `x|Σ^D` is admissible.
    pub fn member_to_depth(&self, x: &Configuration, depth: usize) -> Result<bool> {
        check_sig(self.sig, x.signature())?;
        self.is_admissible(&x.central_block(depth)?)
    }

    /// All admissible blocks on `Σ^D`, in lexicographic order of entries.
    pub fn enumerate_points(&self, depth: usize) -> Result<Vec<Block>> {
        let mut out = Vec::new();
        let cap = ball_cap();
        self.search(depth, &mut |entries| {
            if out.len() >= cap {
                return Err(Error::ResourceLimit {
                    what: format!("admissible blocks of depth {depth}"),
                    needed: out.len() as u128 + 1,
                    cap,
                });
            }
            out.push(Block::new(self.sig, depth, entries.to_vec())?);
            Ok(())
        })?;
        Ok(out)
    }

    /// The number of admissible blocks on `Σ^D`.
    pub fn count_points(&self, depth: usize) -> Result<u64> {
        let mut n = 0u64;
        self.search(depth, &mut |_| {
            n += 1;
            Ok(())
        })?;
        Ok(n)
    }

    fn search(&self, depth: usize, emit: &mut dyn FnMut(&[Sym]) -> Result<()>) -> Result<()> {
        let size = self.sig.ball(depth)?.len();
        let table = position_table(self.sig, depth, self.step)?;
        // Each window is checked once its last site has been assigned.
        let mut due: Vec<Vec<usize>> = vec![Vec::new(); size];
        for (p, idx) in table.windows.iter().enumerate() {
            let last = *idx.iter().max().expect("nonempty window") as usize;
            due[last].push(p);
        }
        let mut entries = vec![0 as Sym; size];
        let mut window = Vec::new();
        self.extend(0, &mut entries, &due, &table, &mut window, emit)
    }

    fn extend(
        &self,
        site: usize,
        entries: &mut Vec<Sym>,
        due: &[Vec<usize>],
        table: &PositionTable,
        window: &mut Vec<Sym>,
        emit: &mut dyn FnMut(&[Sym]) -> Result<()>,
    ) -> Result<()> {
        if site == entries.len() {
            return emit(entries);
        }
        for s in self.alphabet.symbols() {
            entries[site] = s;
            let ok = due[site].iter().all(|&p| {
                window.clear();
                window.extend(table.windows[p].iter().map(|&i| entries[i as usize]));
                !self.lookup.contains(window.as_slice())
            });
            if ok {
                self.extend(site + 1, entries, due, table, window, emit)?;
            }
        }
        Ok(())
    }
}

/// A family of forbidden blocks given depth by depth, possibly infinite.
pub trait ForbiddenFamily {
    fn signature(&self) -> Signature;

    /// The forbidden blocks of depth exactly `m`.
    fn blocks(&self, m: usize) -> Result<Vec<Block>>;
}

/// A finite list of forbidden blocks of various depths.
#[derive(Clone, Debug)]
pub struct FiniteFamily {
    pub sig: Signature,
    pub blocks: Vec<Block>,
}

impl ForbiddenFamily for FiniteFamily {
    fn signature(&self) -> Signature {
        self.sig
    }

    fn blocks(&self, m: usize) -> Result<Vec<Block>> {
        Ok(self.blocks.iter().filter(|b| b.depth() == m).cloned().collect())
    }
}

/// Result of checking one proper sub-block of a candidate obstruction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubBlockCheck {
    pub position: ReducedWord,
    pub depth: usize,
    pub forbidden: bool,
}

/// A forbidden block none of whose proper sub-blocks is forbidden.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub block: Block,
    pub checks: Vec<SubBlockCheck>,
}

/// Searches depths `n < m <= max_depth` for a forbidden `m`-block all of whose
/// proper sub-blocks are allowed. `Ok(None)` means none exists in that range.
pub fn non_sft_obstruction(family: &dyn ForbiddenFamily, n: usize, max_depth: usize) -> Result<Option<Obstruction>> {
    let sig = family.signature();
    let mut by_depth: HashMap<usize, HashSet<Vec<Sym>>> = HashMap::new();
    let mut budget = ball_cap();
    for m in (n + 1)..=max_depth {
        for candidate in family.blocks(m)? {
            check_sig(sig, candidate.signature())?;
            let mut checks = Vec::new();
            let mut clean = true;
            for l in 1..=m {
                if let Entry::Vacant(e) = by_depth.entry(l) {
                    e.insert(family.blocks(l)?.iter().map(|b| b.entries().to_vec()).collect());
                }
                let forbidden_l = &by_depth[&l];
                for u in sig.ball(m - l + 1)?.iter() {
                    if l == m && u.is_empty() {
                        continue;
                    }
                    budget = budget
                        .checked_sub(1)
                        .ok_or(Error::SearchBudgetExhausted(ball_cap() as u64))?;
                    let sub = candidate.sub_block(u, l)?;
                    let forbidden = forbidden_l.contains(sub.entries());
                    clean &= !forbidden;
                    checks.push(SubBlockCheck {
                        position: u.clone(),
                        depth: l,
                        forbidden,
                    });
                }
            }
            if clean {
                return Ok(Some(Obstruction {
                    block: candidate,
                    checks,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_mean(sig: Signature) -> ShiftSystem {
        ShiftSystem::nearest_neighbor(sig, Alphabet::binary(), |c, _, d| !(c == 1 && d == 1)).unwrap()
    }

    #[test]
    fn two_point_system_has_thirty_forbidden_blocks() {
        let g2 = Signature::group(2);
        let sys = ShiftSystem::nearest_neighbor(g2, Alphabet::binary(), |c, _, d| c == d).unwrap();
        assert_eq!(sys.forbidden().len(), 30);
        assert_eq!(sys.count_points(3).unwrap(), 2);
    }

    #[test]
    fn golden_mean_admissibility() {
        let g2 = Signature::group(2);
        let sys = golden_mean(g2);
        let zero = Configuration::constant(g2, 0);
        let bad =
            Configuration::overriding_words(zero.clone(), 2, &[("".parse().unwrap(), 1), ("a".parse().unwrap(), 1)])
                .unwrap();
        assert!(!sys.member_to_depth(&bad, 2).unwrap());
        assert!(sys.member_to_depth(&zero, 4).unwrap());
        let occ = sys.occurrences(&bad.central_block(3).unwrap()).unwrap();
        assert!(occ.iter().any(|o| o.position.is_empty()));
    }

    #[test]
    fn golden_mean_monoid_counts() {
        let sys = golden_mean(Signature::monoid(2));
        assert_eq!(sys.count_points(2).unwrap(), 5);
        assert_eq!(sys.enumerate_points(2).unwrap().len(), 5);
    }

    #[test]
    fn occurrence_must_fit_inside() {
        // The adjacent pair a, aa lies in the depth-3 ball but its window at
        // `a` only fits from depth 3 on.
        let g1 = Signature::group(1);
        let sys = golden_mean(g1);
        let x = Configuration::overriding_words(
            Configuration::constant(g1, 0),
            3,
            &[("a".parse().unwrap(), 1), ("aa".parse().unwrap(), 1)],
        )
        .unwrap();
        assert!(sys.member_to_depth(&x, 2).unwrap());
        assert!(!sys.member_to_depth(&x, 3).unwrap());
        let occ = sys.occurrences(&x.central_block(3).unwrap()).unwrap();
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].position.to_string(), "a");
    }

    #[test]
    fn normalization_expands_to_step() {
        let g2 = Signature::group(2);
        let one = Block::constant(g2, 1, 1).unwrap();
        let blocks = normalize_forbidden(g2, &Alphabet::binary(), &[one], 2).unwrap();
        assert_eq!(blocks.len(), 16);
        assert!(blocks.iter().all(|b| b.entries()[0] == 1));
    }

    #[test]
    fn finite_family_has_no_obstruction_beyond_its_step() {
        let sys = golden_mean(Signature::group(2));
        let fam = FiniteFamily {
            sig: sys.signature(),
            blocks: sys.forbidden().to_vec(),
        };
        for n in 2..4 {
            assert!(non_sft_obstruction(&fam, n, 4).unwrap().is_none());
        }
    }
}
