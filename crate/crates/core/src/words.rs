//! Reduced words over a free group or free monoid, balls of words, and
//! eventually periodic infinite words.
//!
//! Letters are shared between signatures: generator `g` is written with the
//! lowercase letter `'a' + g` and its inverse with the uppercase one. Ball
//! order is length first, then lexicographic in letter code order
//! `a < A < b < B < ...`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_RANK: u8 = 26;
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

static BALL_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_BALL_CAP);

/// Sets the largest ball (in words) that may be materialized.
pub fn set_ball_cap(cap: usize) {
    BALL_CAP.store(cap, AtomicOrdering::Relaxed);
}

pub fn ball_cap() -> usize {
    BALL_CAP.load(AtomicOrdering::Relaxed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignatureKind {
    Group,
    Monoid,
}

/// Free group or free monoid on `rank` generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Signature {
    pub kind: SignatureKind,
    pub rank: u8,
}

#[derive(Deserialize)]
struct SignatureRepr {
    kind: SignatureKind,
    rank: u8,
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SignatureRepr::deserialize(d)?;
        Signature::new(r.kind, r.rank).map_err(serde::de::Error::custom)
    }
}

/// One letter of `S`: a generator or (for groups) the inverse of one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn generator(g: u8) -> Self {
        Letter(2 * g)
    }

    pub fn inverse_of(g: u8) -> Self {
        Letter(2 * g + 1)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn gen(self) -> u8 {
        self.0 / 2
    }

    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.gen()) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        if c.is_ascii_lowercase() {
            Some(Letter::generator(c as u8 - b'a'))
        } else if c.is_ascii_uppercase() {
            Some(Letter::inverse_of(c as u8 - b'A'))
        } else {
            None
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Letter::from_char), chars.next()) {
            (Some(l), None) => Ok(l),
            _ => Err(serde::de::Error::custom(format!("bad letter {s:?}"))),
        }
    }
}

/// A freely reduced word. Ordered by length, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn empty() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        ReducedWord(vec![l])
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = ReducedWord::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Wraps letters that are already reduced; returns `None` otherwise.
    pub fn from_reduced(letters: Vec<Letter>) -> Option<Self> {
        let ok = letters.windows(2).all(|p| p[1] != p[0].inverse());
        ok.then_some(ReducedWord(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Appends a letter with free cancellation.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    pub fn with(&self, l: Letter) -> ReducedWord {
        let mut w = self.clone();
        w.push(l);
        w
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// The prefix `w|_k` of length `min(k, |w|)`.
    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn parent(&self) -> Option<ReducedWord> {
        (!self.0.is_empty()).then(|| self.prefix(self.0.len() - 1))
    }

    pub fn is_prefix_of(&self, other: &ReducedWord) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_proper_prefix_of(&self, other: &ReducedWord) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// `self^{-1} other` when `self` is a prefix of `other`.
    pub fn strip_prefix(&self, prefix: &ReducedWord) -> Option<ReducedWord> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|s| ReducedWord(s.to_vec()))
    }

    pub fn common_prefix_len(&self, other: &ReducedWord) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// Renders the identity as `e` for human-readable output.
    pub fn human(&self) -> String {
        if self.is_empty() {
            "e".to_string()
        } else {
            self.to_string()
        }
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Parses a reduced word, accepting `e` for the identity. Does not check
    /// membership in any particular signature.
    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(ReducedWord::empty());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(Letter::from_char(c).ok_or_else(|| Error::InvalidLetter {
                letter: c,
                signature: "any signature".into(),
            })?);
        }
        ReducedWord::from_reduced(letters).ok_or_else(|| Error::NotReduced(s.to_string()))
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReducedWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

type BallCache = Mutex<HashMap<(Signature, usize), Arc<[ReducedWord]>>>;

fn ball_cache() -> &'static BallCache {
    static CACHE: OnceLock<BallCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Signature {
    pub fn new(kind: SignatureKind, rank: u8) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::Construction(format!(
                "rank must be between 1 and {MAX_RANK}, got {rank}"
            )));
        }
        Ok(Signature { kind, rank })
    }

    pub fn group(rank: u8) -> Self {
        Signature::new(SignatureKind::Group, rank).expect("valid rank")
    }

    pub fn monoid(rank: u8) -> Self {
        Signature::new(SignatureKind::Monoid, rank).expect("valid rank")
    }

    pub fn is_group(&self) -> bool {
        self.kind == SignatureKind::Group
    }

    /// The letters of `S` in code order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.rank)
            .flat_map(|g| {
                let gen = std::iter::once(Letter::generator(g));
                let inv = self.is_group().then(|| Letter::inverse_of(g));
                gen.chain(inv)
            })
            .collect()
    }

    pub fn num_letters(&self) -> usize {
        match self.kind {
            SignatureKind::Group => 2 * self.rank as usize,
            SignatureKind::Monoid => self.rank as usize,
        }
    }

    pub fn has_letter(&self, l: Letter) -> bool {
        l.gen() < self.rank && (self.is_group() || !l.is_inverse())
    }

    /// Letters `l` such that `u l` is reduced and one letter longer than `u`.
    pub fn successors(&self, u: &ReducedWord) -> Vec<Letter> {
        let back = u.last().map(Letter::inverse);
        self.letters().into_iter().filter(|&l| Some(l) != back).collect()
    }

    fn invalid(&self, c: char) -> Error {
        Error::InvalidLetter {
            letter: c,
            signature: self.to_string(),
        }
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        if l.gen() >= self.rank {
            return Err(self.invalid(l.to_char()));
        }
        if l.is_inverse() && !self.is_group() {
            return Err(Error::MonoidHasNoInverses);
        }
        Ok(())
    }

    pub fn check_word(&self, w: &ReducedWord) -> Result<()> {
        w.letters().iter().try_for_each(|&l| self.check_letter(l))
    }

    fn letters_of(&self, s: &str) -> Result<Vec<Letter>> {
        if s == "e" {
            return Ok(Vec::new());
        }
        s.chars()
            .map(|c| {
                let l = Letter::from_char(c).ok_or_else(|| self.invalid(c))?;
                self.check_letter(l)?;
                Ok(l)
            })
            .collect()
    }

    /// Parses a word that must already be reduced.
    pub fn parse_word(&self, s: &str) -> Result<ReducedWord> {
        let letters = self.letters_of(s)?;
        ReducedWord::from_reduced(letters).ok_or_else(|| Error::NotReduced(s.to_string()))
    }

    /// Parses an arbitrary string of letters and freely reduces it.
    pub fn reduce_str(&self, s: &str) -> Result<ReducedWord> {
        Ok(ReducedWord::reduce(self.letters_of(s)?))
    }

    pub fn concat(&self, u: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord> {
        self.check_word(u)?;
        self.check_word(v)?;
        Ok(u.concat(v))
    }

    pub fn invert(&self, u: &ReducedWord) -> Result<ReducedWord> {
        self.check_word(u)?;
        if !self.is_group() {
            return Err(Error::MonoidHasNoInverses);
        }
        Ok(u.inverse())
    }

    /// Number of reduced words of length exactly `k`.
    pub fn sphere_len(&self, k: usize) -> Option<u128> {
        let (first, rest) = self.branching();
        if k == 0 {
            return Some(1);
        }
        let mut n = first as u128;
        for _ in 1..k {
            n = n.checked_mul(rest as u128)?;
        }
        Some(n)
    }

    /// `|Σ^n|`, the number of words of length strictly less than `n`.
    pub fn ball_len(&self, n: usize) -> Option<u128> {
        let mut total: u128 = 0;
        for k in 0..n {
            total = total.checked_add(self.sphere_len(k)?)?;
        }
        Some(total)
    }

    /// Choices for the first letter and for every later letter.
    fn branching(&self) -> (usize, usize) {
        match self.kind {
            SignatureKind::Group => (self.num_letters(), self.num_letters() - 1),
            SignatureKind::Monoid => (self.num_letters(), self.num_letters()),
        }
    }

    /// Position of `w` in the ball order of any ball containing it.
    pub fn ball_index(&self, w: &ReducedWord) -> usize {
        self.ball_index_letters(w.letters())
    }

    /// [`Signature::ball_index`] for a reduced letter slice.
    pub fn ball_index_letters(&self, letters: &[Letter]) -> usize {
        let (_, rest) = self.branching();
        let mut idx: usize = 0;
        let mut prev: Option<Letter> = None;
        for &l in letters {
            let digit = match (self.kind, prev) {
                (SignatureKind::Monoid, _) => l.gen() as usize,
                (SignatureKind::Group, None) => l.code() as usize,
                (SignatureKind::Group, Some(p)) => {
                    let c = l.code();
                    (c - u8::from(c > p.inverse().code())) as usize
                }
            };
            idx = if prev.is_none() { digit } else { idx * rest + digit };
            prev = Some(l);
        }
        let below = self.ball_len(letters.len()).expect("ball index overflow") as usize;
        below + idx
    }

    /// The ball `Σ^n` in ball order, memoized.
    pub fn ball(&self, n: usize) -> Result<Arc<[ReducedWord]>> {
        let cap = ball_cap();
        let needed = self.ball_len(n).unwrap_or(u128::MAX);
        if needed > cap as u128 {
            return Err(Error::ResourceLimit {
                what: format!("ball of radius {n} over {self}"),
                needed,
                cap,
            });
        }
        if let Some(b) = ball_cache().lock().expect("ball cache").get(&(*self, n)) {
            return Ok(b.clone());
        }
        let mut words = Vec::with_capacity(needed as usize);
        if n > 0 {
            words.push(ReducedWord::empty());
        }
        let mut level_start = 0;
        for _ in 1..n {
            let level_end = words.len();
            for i in level_start..level_end {
                let u = words[i].clone();
                for l in self.successors(&u) {
                    let mut v = u.clone();
                    v.0.push(l);
                    words.push(v);
                }
            }
            level_start = level_end;
        }
        let ball: Arc<[ReducedWord]> = words.into();
        ball_cache()
            .lock()
            .expect("ball cache")
            .insert((*self, n), ball.clone());
        Ok(ball)
    }

    /// Words of length exactly `k`, in ball order.
    pub fn sphere(&self, k: usize) -> Result<Vec<ReducedWord>> {
        let ball = self.ball(k + 1)?;
        Ok(ball.iter().filter(|w| w.len() == k).cloned().collect())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SignatureKind::Group => "group",
            SignatureKind::Monoid => "monoid",
        };
        write!(f, "{kind}:{}", self.rank)
    }
}

impl FromStr for Signature {
    type Err = Error;

    /// Parses `group:N` or `monoid:N`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rank) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected group:N or monoid:N, got {s:?}")))?;
        let kind = match kind {
            "group" => SignatureKind::Group,
            "monoid" => SignatureKind::Monoid,
            _ => return Err(Error::Parse(format!("unknown signature kind {kind:?}"))),
        };
        let rank = rank.parse().map_err(|_| Error::Parse(format!("bad rank {rank:?}")))?;
        Signature::new(kind, rank)
    }
}

/// The infinite word `head cycle cycle cycle ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicWord {
    head: ReducedWord,
    cycle: ReducedWord,
}

impl EventuallyPeriodicWord {
    pub fn new(head: ReducedWord, cycle: ReducedWord) -> Result<Self> {
        let Some(c0) = cycle.first() else {
            return Err(Error::Construction("cycle must be nonempty".into()));
        };
        let c1 = cycle.last().expect("nonempty cycle");
        if c1 == c0.inverse() {
            return Err(Error::Construction(format!("cycle {cycle} does not repeat freely")));
        }
        if head.last() == Some(c0.inverse()) {
            return Err(Error::Construction(format!(
                "head {head} cancels against cycle {cycle}"
            )));
        }
        Ok(EventuallyPeriodicWord { head, cycle })
    }

    pub fn head(&self) -> &ReducedWord {
        &self.head
    }

    pub fn cycle(&self) -> &ReducedWord {
        &self.cycle
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        sig.check_word(&self.head)?;
        sig.check_word(&self.cycle)
    }

    pub fn letter_at(&self, i: usize) -> Letter {
        let h = self.head.len();
        if i < h {
            self.head.letters()[i]
        } else {
            self.cycle.letters()[(i - h) % self.cycle.len()]
        }
    }

    /// `w|_k`.
    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord((0..k).map(|i| self.letter_at(i)).collect())
    }
}

impl fmt::Display for EventuallyPeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.head, self.cycle)
    }
}

impl FromStr for EventuallyPeriodicWord {
    type Err = Error;

    /// Parses `head(cycle)`, e.g. `a(bA)` or `(ab)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected head(cycle), got {s:?}"));
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let cycle = rest.strip_suffix(')').ok_or_else(bad)?;
        let head = if head.is_empty() {
            ReducedWord::empty()
        } else {
            head.parse()?
        };
        EventuallyPeriodicWord::new(head, cycle.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    #[test]
    fn reduction_examples() {
        let g2 = Signature::group(2);
        assert_eq!(g2.reduce_str("aAb").unwrap(), w("b"));
        assert_eq!(g2.concat(&w("ab"), &w("Ba")).unwrap(), w("aa"));
        assert_eq!(g2.invert(&w("ab")).unwrap(), w("BA"));
        assert_eq!(g2.parse_word("e").unwrap(), ReducedWord::empty());
        assert!(matches!(g2.parse_word("aA"), Err(Error::NotReduced(_))));
        assert!(matches!(g2.parse_word("c"), Err(Error::InvalidLetter { .. })));
    }

    #[test]
    fn monoid_rejects_inverses() {
        let m2 = Signature::monoid(2);
        assert_eq!(m2.concat(&w("ab"), &w("a")).unwrap(), w("aba"));
        assert_eq!(m2.parse_word("aA"), Err(Error::MonoidHasNoInverses));
        assert_eq!(m2.invert(&w("ab")), Err(Error::MonoidHasNoInverses));
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(Signature::group(2).ball(3).unwrap().len(), 17);
        assert_eq!(Signature::group(1).ball(4).unwrap().len(), 7);
        assert_eq!(Signature::monoid(2).ball(3).unwrap().len(), 7);
        assert_eq!(Signature::monoid(3).ball(0).unwrap().len(), 0);
        assert_eq!(Signature::group(2).ball_len(3), Some(17));
    }

    #[test]
    fn ball_order_and_index_agree() {
        for sig in [Signature::group(2), Signature::group(3), Signature::monoid(3)] {
            let ball = sig.ball(5).unwrap();
            for (i, u) in ball.iter().enumerate() {
                assert_eq!(sig.ball_index(u), i, "{sig} {u}");
            }
            assert!(ball.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn ball_order_starts_with_letters_in_code_order() {
        let ball = Signature::group(2).ball(2).unwrap();
        let names: Vec<String> = ball.iter().map(|u| u.human()).collect();
        assert_eq!(names, ["e", "a", "A", "b", "B"]);
    }

    #[test]
    fn ball_respects_cap() {
        set_ball_cap(100);
        let r = Signature::group(3).ball(5);
        set_ball_cap(DEFAULT_BALL_CAP);
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn eventually_periodic() {
        let p = EventuallyPeriodicWord::new(w("a"), w("b")).unwrap();
        assert_eq!(p.prefix(4), w("abbb"));
        assert!(EventuallyPeriodicWord::new(w("a"), w("A")).is_err());
        assert!(EventuallyPeriodicWord::new(w(""), w("aBA")).is_err());
        let q: EventuallyPeriodicWord = "(ab)".parse().unwrap();
        assert_eq!(q.prefix(5), w("ababa"));
    }

    #[test]
    fn signature_parsing() {
        assert_eq!("group:2".parse::<Signature>().unwrap(), Signature::group(2));
        assert!("group:0".parse::<Signature>().is_err());
        assert!("ring:2".parse::<Signature>().is_err());
        let json = serde_json::to_string(&Signature::monoid(3)).unwrap();
        assert_eq!(json, r#"{"kind":"monoid","rank":3}"#);
    }
}
