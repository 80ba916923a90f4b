use proptest::prelude::*;
use treeshift_core::fixtures::{self, HollowBallFamily, UnionFamily};
use treeshift_core::patterns::{Alphabet, Block, Sym};
use treeshift_core::shifts::{non_sft_obstruction, FiniteFamily, ForbiddenFamily, ShiftSystem};
use treeshift_core::words::{ReducedWord, Signature, SignatureKind};

/// Labelings of `Σ^D` with no two adjacent sites both `1`, by a transfer
/// recursion over subtree heights.
fn golden_mean_count(sig: Signature, depth: usize) -> u64 {
    let r = sig.num_letters() as u64;
    let later = match sig.kind {
        SignatureKind::Group => r - 1,
        SignatureKind::Monoid => r,
    };
    // sub[s] = labelings of a subtree with `h` levels below a root labeled s,
    // counting only the descendants.
    let mut sub = [1u64, 1u64];
    for _ in 1..depth.saturating_sub(1) {
        let child0 = sub[0] + sub[1];
        let child1 = sub[0];
        sub = [child0.pow(later as u32), child1.pow(later as u32)];
    }
    if depth == 0 {
        return 1;
    }
    if depth == 1 {
        return 2;
    }
    let root0 = (sub[0] + sub[1]).pow(r as u32);
    let root1 = sub[0].pow(r as u32);
    root0 + root1
}

#[test]
fn golden_mean_counts_match_transfer_recursion() {
    for (kind, rank, max) in [
        (SignatureKind::Monoid, 1, 7),
        (SignatureKind::Monoid, 2, 4),
        (SignatureKind::Group, 1, 7),
        (SignatureKind::Group, 2, 3),
    ] {
        let sig = Signature::new(kind, rank).unwrap();
        let sys = fixtures::golden_mean(sig);
        for depth in 1..=max {
            assert_eq!(
                sys.count_points(depth).unwrap(),
                golden_mean_count(sig, depth),
                "{sig} D={depth}"
            );
        }
    }
}

#[test]
fn enumerated_blocks_are_exactly_the_admissible_ones() {
    let sig = Signature::monoid(2);
    let sys = fixtures::golden_mean(sig);
    let depth = 3;
    let listed = sys.enumerate_points(depth).unwrap();
    let size = sig.ball(depth).unwrap().len();
    let mut admissible = 0;
    for code in 0u32..(1 << size) {
        let entries: Vec<Sym> = (0..size).map(|i| ((code >> i) & 1) as Sym).collect();
        let b = Block::new(sig, depth, entries).unwrap();
        let direct = sig.ball(depth).unwrap().iter().all(|u| {
            u.len() + 1 >= depth
                || sig
                    .successors(u)
                    .iter()
                    .all(|&l| !(b.get(u) == Some(1) && b.get(&u.with(l)) == Some(1)))
        });
        assert_eq!(sys.is_admissible(&b).unwrap(), direct);
        admissible += direct as usize;
        assert_eq!(listed.contains(&b), direct);
    }
    assert_eq!(listed.len(), admissible);
}

/// Does `b` contain `f` at a position where the whole window fits?
fn contains_at(sig: Signature, b: &Block, f: &Block) -> bool {
    let m = f.depth();
    if b.depth() < m {
        return false;
    }
    sig.ball(b.depth() - m + 1)
        .unwrap()
        .iter()
        .any(|u| b.sub_block(u, m).unwrap() == *f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Forbidden blocks of mixed depths normalized to one step forbid the
    /// same blocks as the raw list, at every position where a window of the
    /// step fits.
    #[test]
    fn mixed_depth_normalization(
        raw in prop::collection::vec((1usize..=2, prop::collection::vec(0u16..2, 7)), 1..4),
        entries in prop::collection::vec(0u16..2, 15),
    ) {
        let sig = Signature::monoid(2);
        let blocks: Vec<Block> = raw
            .iter()
            .map(|(d, e)| {
                let n = sig.ball(*d).unwrap().len();
                Block::new(sig, *d, e[..n].to_vec()).unwrap()
            })
            .collect();
        let sys = ShiftSystem::with_step(sig, Alphabet::binary(), blocks.clone(), 2).unwrap();
        let depth = 4;
        let b = Block::new(sig, depth, entries).unwrap();
        let step = sys.step();
        // Dual check: raw blocks of depth m at positions with |u| + step <= D.
        let bad = sig.ball(depth - step + 1).unwrap().iter().any(|u| {
            blocks.iter().any(|f| b.sub_block(u, f.depth()).unwrap() == *f)
        });
        prop_assert_eq!(sys.is_admissible(&b).unwrap(), !bad);
    }
}

#[test]
fn occurrences_need_the_whole_window() {
    let sig = Signature::monoid(1);
    let sys = fixtures::golden_mean(sig);
    let a: ReducedWord = "aa".parse().unwrap();
    let b = Block::from_fn(sig, 3, |u| Sym::from(u.len() == a.len())).unwrap();
    assert!(sys.is_admissible(&b).unwrap());
    let b = Block::from_fn(sig, 3, |u| Sym::from(!u.is_empty())).unwrap();
    assert!(!sys.is_admissible(&b).unwrap());
    assert_eq!(sys.occurrences(&b).unwrap().len(), 1);
}

#[test]
fn hollow_family_is_not_of_finite_type() {
    for sig in [Signature::monoid(2), Signature::group(2)] {
        let fam = HollowBallFamily { sig };
        for n in 1..=3 {
            let ob = non_sft_obstruction(&fam, n, n + 1).unwrap().expect("obstruction");
            assert_eq!(ob.block.depth(), n + 1);
            assert!(ob.checks.iter().all(|c| !c.forbidden));
            // Independently: no smaller member of the family sits inside it.
            for m in 2..=n {
                for f in fam.blocks(m).unwrap() {
                    assert!(!contains_at(sig, &ob.block, &f));
                }
            }
        }
    }
}

#[test]
fn finite_and_mixed_families() {
    let sig = Signature::monoid(2);
    let single = Block::new(sig, 1, vec![1]).unwrap();
    let finite = FiniteFamily {
        sig,
        blocks: vec![single.clone()],
    };
    assert!(non_sft_obstruction(&finite, 1, 4).unwrap().is_none());
    let hollow = HollowBallFamily { sig };
    let mixed = UnionFamily {
        parts: vec![&finite, &hollow],
    };
    // Every hollow block contains the forbidden single `1`.
    assert!(non_sft_obstruction(&mixed, 1, 4).unwrap().is_none());
    let zero = FiniteFamily {
        sig,
        blocks: vec![Block::new(sig, 1, vec![0]).unwrap()],
    };
    let mixed = UnionFamily {
        parts: vec![&zero, &hollow],
    };
    let ob = non_sft_obstruction(&mixed, 2, 4).unwrap();
    assert!(ob.is_none(), "hollow blocks of depth >= 3 contain a 0");
    assert_eq!(mixed.blocks(3).unwrap().len(), 1);
}
