//! Named systems, point sets and orbits used by the tests, the benchmarks
//! and the command-line gallery.

use rand::Rng;

use crate::error::{Error, Result};
use crate::orbits::{PseudoOrbit, TailRule};
use crate::patterns::{Alphabet, Block, Configuration, Sym, WordAutomaton};
use crate::shifts::{ForbiddenFamily, ShiftSystem};
use crate::words::{Letter, ReducedWord, Signature, SignatureKind};

fn letter(c: char) -> Letter {
    Letter::from_char(c).expect("ascii letter")
}

fn word(s: &str) -> ReducedWord {
    s.parse().expect("fixture word")
}

/// No two neighbors both carry symbol 1.
pub fn golden_mean(sig: Signature) -> ShiftSystem {
    ShiftSystem::nearest_neighbor(sig, Alphabet::binary(), |c, _, d| !(c == 1 && d == 1)).expect("golden mean")
}

/// Neighbors always agree, so the only points are the two constants.
pub fn two_point_system(sig: Signature) -> ShiftSystem {
    ShiftSystem::nearest_neighbor(sig, Alphabet::binary(), |c, _, d| c == d).expect("two-point system")
}

/// Neighbors always carry distinct colors.
pub fn proper_coloring(sig: Signature, colors: usize) -> ShiftSystem {
    ShiftSystem::nearest_neighbor(sig, Alphabet::numeric(colors), |c, _, d| c != d).expect("coloring")
}

pub fn full_shift(sig: Signature, symbols: usize) -> ShiftSystem {
    ShiftSystem::full_shift(sig, Alphabet::numeric(symbols))
}

/// `u ↦ (φ(u) + offset) mod m`, where `φ` is the exponent sum (the length for
/// monoids). Shifting by a generator adds one.
pub fn cyclic_point(sig: Signature, modulus: usize, offset: usize) -> Configuration {
    let rows = (0..modulus)
        .map(|s| {
            sig.letters()
                .into_iter()
                .map(|l| {
                    let next = if l.is_inverse() {
                        (s + modulus - 1) % modulus
                    } else {
                        (s + 1) % modulus
                    };
                    (l, next)
                })
                .collect()
        })
        .collect();
    let output = (0..modulus).map(|s| s as Sym).collect();
    let a = WordAutomaton::new(sig, offset % modulus, rows, output).expect("cyclic automaton");
    Configuration::automaton(sig, a)
}

/// The two points `u ↦ 1` on even lengths and `u ↦ 1` on odd lengths,
/// swapped by every generator.
pub fn parity_pair(sig: Signature) -> Vec<Configuration> {
    let flip = |offset: usize| {
        let rows = (0..2)
            .map(|s| sig.letters().into_iter().map(|l| (l, 1 - s)).collect())
            .collect();
        let a = WordAutomaton::new(sig, offset, rows, vec![1, 0]).expect("parity automaton");
        Configuration::automaton(sig, a)
    };
    vec![flip(0), flip(1)]
}

/// The three points `(φ(u) + r) mod 3`, cyclically permuted by generators.
pub fn mod3_triple(sig: Signature) -> Vec<Configuration> {
    (0..3).map(|r| cyclic_point(sig, 3, r)).collect()
}

/// Over the rank-2 free group: `1` on words `a^m b^n` with `n > 0`, else `0`.
/// With `symbol = 2` this is the companion point that carries `2` instead.
pub fn x0_with(symbol: Sym) -> Configuration {
    let sig = Signature::group(2);
    let (a, big_a, b, big_b) = (letter('a'), letter('A'), letter('b'), letter('B'));
    let rows = vec![
        vec![(a, 0), (b, 1), (big_a, 2), (big_b, 2)],
        vec![(a, 2), (b, 1), (big_a, 2), (big_b, 2)],
        vec![(a, 2), (b, 2), (big_a, 2), (big_b, 2)],
    ];
    let a = WordAutomaton::new(sig, 0, rows, vec![0, symbol, 0]).expect("x0 automaton");
    Configuration::automaton(sig, a)
}

pub fn x0() -> Configuration {
    x0_with(1)
}

/// Which way the companion points are translated in the chain-transitivity
/// counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleDirection {
    /// `x_{2+i} = σ_{a^i}(x_2)` for `i = 1..=2`, exactly as stated.
    Literal,
    /// Translates by `a^{-i}` instead and adds the bridge points
    /// `σ_{a^i}(x_1)`, which makes the family internally chain transitive.
    Corrected,
}

impl std::str::FromStr for ExampleDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ExampleDirection::Literal),
            "corrected" => Ok(ExampleDirection::Corrected),
            _ => Err(Error::Parse(format!(
                "direction must be literal or corrected, got {s:?}"
            ))),
        }
    }
}

/// The family whose point `x_0` is only entered by `b` and only left by `B`.
/// Index 0 is `x_0` and index 1 is `x_1 = σ_B(x_0)`.
pub fn ict_not_cict(direction: ExampleDirection) -> Vec<Configuration> {
    let x0 = x0();
    let x1 = x0.shift(&word("B"));
    let x2 = x0_with(2);
    match direction {
        ExampleDirection::Literal => vec![x0, x1, x2.clone(), x2.shift(&word("a")), x2.shift(&word("aa"))],
        ExampleDirection::Corrected => vec![
            x0,
            x1.clone(),
            x1.shift(&word("a")),
            x1.shift(&word("aa")),
            x2.clone(),
            x2.shift(&word("A")),
            x2.shift(&word("AA")),
            x2.shift(&word("AAA")),
        ],
    }
}

/// The asymptotic pseudo-orbit with no shadow in the two-point system: the
/// branch starting with `j` carries the all-0 point, every other site the
/// all-1 point. Its only defect sits between `e` and `j`.
pub fn asymptotic_counterexample(rank: u8, j: Letter, radius: usize) -> Result<(ShiftSystem, PseudoOrbit)> {
    let sig = Signature::group(rank);
    sig.check_letter(j)?;
    let zero = Configuration::constant(sig, 0);
    let one = Configuration::constant(sig, 1);
    let points = sig
        .ball(radius + 1)?
        .iter()
        .map(|u| {
            if u.first() == Some(j) {
                zero.clone()
            } else {
                one.clone()
            }
        })
        .collect();
    let orbit = PseudoOrbit::on_ball(sig, radius, points, TailRule::ShiftExtend)?;
    Ok((two_point_system(sig), orbit))
}

/// For every depth `m >= 2`, forbids the block with `1` at the identity and on
/// the whole sphere of length `m - 1`, and `0` in between. No forbidden block
/// contains another, so the family does not define a shift of finite type.
#[derive(Clone, Copy, Debug)]
pub struct HollowBallFamily {
    pub sig: Signature,
}

impl ForbiddenFamily for HollowBallFamily {
    fn signature(&self) -> Signature {
        self.sig
    }

    fn blocks(&self, m: usize) -> Result<Vec<Block>> {
        if m < 2 {
            return Ok(Vec::new());
        }
        let b = Block::from_fn(self.sig, m, |u| Sym::from(u.is_empty() || u.len() == m - 1))?;
        Ok(vec![b])
    }
}

/// A finite family together with an infinite one.
pub struct UnionFamily<'a> {
    pub parts: Vec<&'a dyn ForbiddenFamily>,
}

impl ForbiddenFamily for UnionFamily<'_> {
    fn signature(&self) -> Signature {
        self.parts[0].signature()
    }

    fn blocks(&self, m: usize) -> Result<Vec<Block>> {
        let mut out = Vec::new();
        for p in &self.parts {
            out.extend(p.blocks(m)?);
        }
        out.sort_by(|a, b| a.entries().cmp(b.entries()));
        out.dedup();
        Ok(out)
    }
}

/// A random automaton point over `sig` with `states` states and symbols in
/// `0..symbols`.
pub fn random_automaton_point<R: Rng>(rng: &mut R, sig: Signature, states: usize, symbols: usize) -> Configuration {
    let rows = (0..states)
        .map(|_| {
            sig.letters()
                .into_iter()
                .map(|l| (l, rng.gen_range(0..states)))
                .collect()
        })
        .collect();
    let output = (0..states).map(|_| rng.gen_range(0..symbols) as Sym).collect();
    let a = WordAutomaton::new(sig, 0, rows, output).expect("random automaton");
    Configuration::automaton(sig, a)
}

/// A random finite point set over a monoid: shifts of one random automaton
/// point, deduplicated on `Σ^depth`.
pub fn random_monoid_points<R: Rng>(rng: &mut R, rank: u8, depth: usize) -> Vec<Configuration> {
    let sig = Signature::new(SignatureKind::Monoid, rank).expect("rank");
    let states = rng.gen_range(2..=4);
    let base = random_automaton_point(rng, sig, states, 2);
    let count = rng.gen_range(1..=5);
    let mut points: Vec<Configuration> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    for _ in 0..count {
        let len = rng.gen_range(0..=3);
        let letters: Vec<Letter> = (0..len).map(|_| Letter::generator(rng.gen_range(0..rank))).collect();
        let p = base.shift(&ReducedWord::from_reduced(letters).expect("monoid word"));
        let b = p.central_block(depth).expect("small ball");
        if !blocks.contains(&b) {
            blocks.push(b);
            points.push(p);
        }
    }
    points
}

/// Names accepted by the command-line gallery.
pub const GALLERY: &[&str] = &[
    "two-point-no-shadow",
    "ict-not-cict",
    "golden-mean-monoid",
    "full-shift-2",
];
