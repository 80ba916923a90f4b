//! Alphabets, blocks on balls, configurations, and the prefix metric.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, DyadicDistance};
use crate::error::{Error, Result};
use crate::words::{Letter, ReducedWord, Signature, MAX_RANK};

/// A symbol, stored as an index into an [`Alphabet`].
pub type Sym = u16;

/// A finite alphabet with display names for its symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Construction("alphabet must be nonempty".into()));
        }
        if names.len() > Sym::MAX as usize {
            return Err(Error::Construction("alphabet too large".into()));
        }
        Ok(Alphabet { names })
    }

    /// The alphabet `{0, 1, ..., n-1}`.
    pub fn numeric(n: usize) -> Self {
        Alphabet::new((0..n).map(|i| i.to_string()).collect()).expect("nonempty alphabet")
    }

    pub fn binary() -> Self {
        Alphabet::numeric(2)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> {
        0..self.names.len() as Sym
    }
}

/// A pattern on the ball `Σ^depth`, stored in ball order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    sig: Signature,
    depth: usize,
    entries: Vec<Sym>,
}

impl Block {
    pub fn new(sig: Signature, depth: usize, entries: Vec<Sym>) -> Result<Self> {
        let len = sig.ball(depth)?.len();
        if entries.len() != len {
            return Err(Error::Construction(format!(
                "block of depth {depth} over {sig} needs {len} entries, got {}",
                entries.len()
            )));
        }
        Ok(Block { sig, depth, entries })
    }

    pub fn from_fn(sig: Signature, depth: usize, mut f: impl FnMut(&ReducedWord) -> Sym) -> Result<Self> {
        let entries = sig.ball(depth)?.iter().map(&mut f).collect();
        Ok(Block { sig, depth, entries })
    }

    pub fn constant(sig: Signature, depth: usize, s: Sym) -> Result<Self> {
        Block::from_fn(sig, depth, |_| s)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn entries(&self) -> &[Sym] {
        &self.entries
    }

    pub fn get(&self, u: &ReducedWord) -> Option<Sym> {
        (u.len() < self.depth).then(|| self.entries[self.sig.ball_index(u)])
    }

    /// The block `σ_u(B)|Σ^depth`, which requires `|u| + depth <= self.depth`.
    pub fn sub_block(&self, u: &ReducedWord, depth: usize) -> Result<Block> {
        if u.len() + depth > self.depth {
            return Err(Error::DepthTooSmall {
                needed: u.len() + depth,
                got: self.depth,
            });
        }
        Block::from_fn(self.sig, depth, |v| self.entries[self.sig.ball_index(&u.concat(v))])
    }

    /// The restriction to the smaller ball `Σ^depth`.
    pub fn restrict(&self, depth: usize) -> Result<Block> {
        self.sub_block(&ReducedWord::empty(), depth)
    }

    /// Prefix-metric distance between blocks of the same depth.
    pub fn distance(&self, other: &Block) -> DyadicDistance {
        debug_assert_eq!(self.depth, other.depth);
        let n = self.depth.min(other.depth);
        match self.entries.iter().zip(&other.entries).position(|(a, b)| a != b) {
            Some(i) => {
                let mut m = 0;
                while self.sig.ball_len(m + 1).expect("small ball") as usize <= i {
                    m += 1;
                }
                DyadicDistance::Exact(Dyadic::pow2_neg(m as u32))
            }
            None => DyadicDistance::AtMost(Dyadic::pow2_neg(n as u32)),
        }
    }

    /// Words paired with their symbols, in ball order.
    pub fn iter(&self) -> Result<impl Iterator<Item = (ReducedWord, Sym)> + '_> {
        let ball = self.sig.ball(self.depth)?;
        Ok((0..self.entries.len()).map(move |i| (ball[i].clone(), self.entries[i])))
    }
}

/// A deterministic automaton over the letters of a signature that reads a
/// reduced word from the left and outputs the symbol attached to its final
/// state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordAutomaton {
    start: usize,
    /// `transitions[state][letter code]`.
    transitions: Vec<Vec<usize>>,
    output: Vec<Sym>,
}

impl WordAutomaton {
    pub fn new(sig: Signature, start: usize, transitions: Vec<Vec<(Letter, usize)>>, output: Vec<Sym>) -> Result<Self> {
        let n = output.len();
        if n == 0 || transitions.len() != n || start >= n {
            return Err(Error::Construction(
                "automaton needs one transition row and one output per state".into(),
            ));
        }
        let width = 2 * sig.rank as usize;
        let mut table = vec![vec![usize::MAX; width]; n];
        for (state, row) in transitions.iter().enumerate() {
            for &(l, next) in row {
                sig.check_letter(l)?;
                if next >= n {
                    return Err(Error::Construction(format!("transition to missing state {next}")));
                }
                table[state][l.code() as usize] = next;
            }
            if let Some(l) = sig
                .letters()
                .into_iter()
                .find(|l| table[state][l.code() as usize] == usize::MAX)
            {
                return Err(Error::Construction(format!("state {state} has no transition on {l}")));
            }
        }
        Ok(WordAutomaton {
            start,
            transitions: table,
            output,
        })
    }

    pub fn states(&self) -> usize {
        self.output.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn output(&self) -> &[Sym] {
        &self.output
    }

    pub fn next(&self, state: usize, l: Letter) -> usize {
        self.transitions[state][l.code() as usize]
    }

    pub fn run(&self, letters: &[Letter]) -> Sym {
        let state = letters.iter().fold(self.start, |s, &l| self.next(s, l));
        self.output[state]
    }
}

/// A finite prefix-closed set of words, each carrying a configuration.
///
/// Evaluating at `u` finds the longest stored prefix `u'` of `u` and reads
/// the stored configuration at `u'^{-1} u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteTree {
    points: Vec<Configuration>,
    nodes: Vec<SiteNode>,
    continuation: Option<Vec<Vec<Option<usize>>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct SiteNode {
    word: ReducedWord,
    point: usize,
    children: Vec<(Letter, u32)>,
}

impl SiteTree {
    /// Builds a tree from sites and indices into `points`. The sites must be
    /// prefix-closed and contain the identity.
    pub fn new(points: Vec<Configuration>, mut sites: Vec<(ReducedWord, usize)>) -> Result<Self> {
        sites.sort();
        for w in sites.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Construction(format!("site {} assigned twice", w[0].0.human())));
            }
        }
        if sites.first().map(|s| !s.0.is_empty()).unwrap_or(true) {
            return Err(Error::Construction("site tree must contain the identity".into()));
        }
        let mut nodes: Vec<SiteNode> = Vec::with_capacity(sites.len());
        let mut index = std::collections::HashMap::with_capacity(sites.len());
        for (word, point) in sites {
            if point >= points.len() {
                return Err(Error::Construction(format!(
                    "site {} refers to missing point {point}",
                    word.human()
                )));
            }
            if let Some(parent) = word.parent() {
                let &p = index
                    .get(&parent)
                    .ok_or_else(|| Error::Construction(format!("site {} has no parent site", word.human())))?;
                let id = nodes.len() as u32;
                let node: &mut SiteNode = &mut nodes[p as usize];
                node.children.push((word.last().expect("nonempty"), id));
            }
            index.insert(word.clone(), nodes.len() as u32);
            nodes.push(SiteNode {
                word,
                point,
                children: Vec::new(),
            });
        }
        Ok(SiteTree {
            points,
            nodes,
            continuation: None,
        })
    }

    /// Past the stored sites, steps from point `p` by letter `l` to
    /// `table[p][l.code()]` when present, before falling back to shifting.
    pub fn with_continuation(mut self, table: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let width = 2 * MAX_RANK as usize;
        if table.len() != self.points.len() {
            return Err(Error::Construction(format!(
                "continuation needs {} rows, got {}",
                self.points.len(),
                table.len()
            )));
        }
        for row in &table {
            if row.len() > width || row.iter().flatten().any(|&q| q >= self.points.len()) {
                return Err(Error::Construction(
                    "continuation refers to a missing point or letter".into(),
                ));
            }
        }
        self.continuation = Some(table);
        Ok(self)
    }

    pub fn continuation(&self) -> Option<&[Vec<Option<usize>>]> {
        self.continuation.as_deref()
    }

    pub fn points(&self) -> &[Configuration] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sites and point indices in ball order.
    pub fn sites(&self) -> impl Iterator<Item = (&ReducedWord, usize)> {
        self.nodes.iter().map(|n| (&n.word, n.point))
    }

    /// The longest stored prefix of `letters`: its length and point index.
    pub fn lookup(&self, letters: &[Letter]) -> (usize, usize) {
        let mut node = &self.nodes[0];
        let mut depth = 0;
        for &l in letters {
            match node.children.iter().find(|c| c.0 == l) {
                Some(&(_, id)) => {
                    node = &self.nodes[id as usize];
                    depth += 1;
                }
                None => break,
            }
        }
        (depth, node.point)
    }

    /// Like [`SiteTree::lookup`], then follows the continuation table.
    pub fn resolve(&self, letters: &[Letter]) -> (usize, usize) {
        let (mut depth, mut point) = self.lookup(letters);
        if let Some(table) = &self.continuation {
            for &l in &letters[depth..] {
                match table[point].get(l.code() as usize).copied().flatten() {
                    Some(q) => {
                        point = q;
                        depth += 1;
                    }
                    None => break,
                }
            }
        }
        (depth, point)
    }

    pub fn get(&self, u: &ReducedWord) -> Option<usize> {
        let (depth, point) = self.lookup(u.letters());
        (depth == u.len()).then_some(point)
    }

    /// The configuration carried at `u` under the longest-prefix rule.
    pub fn at(&self, u: &ReducedWord) -> Configuration {
        let (depth, point) = self.resolve(u.letters());
        let rest = ReducedWord::from_reduced(u.letters()[depth..].to_vec()).expect("suffix of reduced word");
        self.points[point].shift(&rest)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Constant(Sym),
    Automaton(WordAutomaton),
    /// `entries` is indexed in ball order on `Σ^depth`; `None` falls through
    /// to the base.
    Override {
        base: Configuration,
        depth: usize,
        entries: Vec<Option<Sym>>,
    },
    Shifted {
        base: Configuration,
        by: ReducedWord,
    },
    /// `x(u) = O(u')(u'^{-1} u)` for the longest stored prefix `u'` of `u`.
    Readout(SiteTree),
}

/// A configuration `x: F -> A`, given by a finite description.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    sig: Signature,
    node: Arc<Node>,
}

impl Configuration {
    pub fn constant(sig: Signature, s: Sym) -> Self {
        Configuration {
            sig,
            node: Arc::new(Node::Constant(s)),
        }
    }

    pub fn automaton(sig: Signature, a: WordAutomaton) -> Self {
        Configuration {
            sig,
            node: Arc::new(Node::Automaton(a)),
        }
    }

    /// `block` on `Σ^n`, `base` elsewhere.
    pub fn with_block(base: Configuration, block: &Block) -> Result<Self> {
        check_sig(base.sig, block.sig)?;
        let entries = block.entries.iter().map(|&s| Some(s)).collect();
        Configuration::overriding(base, block.depth, entries)
    }

    /// Overrides selected entries of `Σ^depth`, listed in ball order.
    pub fn overriding(base: Configuration, depth: usize, entries: Vec<Option<Sym>>) -> Result<Self> {
        let len = base.sig.ball(depth)?.len();
        if entries.len() != len {
            return Err(Error::Construction(format!(
                "override of depth {depth} needs {len} slots, got {}",
                entries.len()
            )));
        }
        let sig = base.sig;
        Ok(Configuration {
            sig,
            node: Arc::new(Node::Override { base, depth, entries }),
        })
    }

    /// Overrides the listed words; they must lie in `Σ^depth`.
    pub fn overriding_words(base: Configuration, depth: usize, words: &[(ReducedWord, Sym)]) -> Result<Self> {
        let sig = base.sig;
        let mut entries = vec![None; sig.ball(depth)?.len()];
        for (u, s) in words {
            sig.check_word(u)?;
            if u.len() >= depth {
                return Err(Error::Construction(format!(
                    "word {} lies outside the ball of depth {depth}",
                    u.human()
                )));
            }
            entries[sig.ball_index(u)] = Some(*s);
        }
        Configuration::overriding(base, depth, entries)
    }

    pub fn readout(sig: Signature, tree: SiteTree) -> Result<Self> {
        for p in tree.points() {
            check_sig(sig, p.sig)?;
        }
        Ok(Configuration {
            sig,
            node: Arc::new(Node::Readout(tree)),
        })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// `x(u)`.
    pub fn eval(&self, u: &ReducedWord) -> Sym {
        self.eval_letters(u.letters())
    }

    fn eval_letters(&self, u: &[Letter]) -> Sym {
        match &*self.node {
            Node::Constant(s) => *s,
            Node::Automaton(a) => a.run(u),
            Node::Override { base, depth, entries } => {
                if u.len() < *depth {
                    if let Some(s) = entries[self.sig.ball_index_letters(u)] {
                        return s;
                    }
                }
                base.eval_letters(u)
            }
            Node::Shifted { base, by } => {
                let mut w = by.clone();
                for &l in u {
                    w.push(l);
                }
                base.eval_letters(w.letters())
            }
            Node::Readout(tree) => {
                let (depth, point) = tree.resolve(u);
                tree.points[point].eval_letters(&u[depth..])
            }
        }
    }

    /// `σ_u(x)`, defined by `σ_u(x)(v) = x(u v)`.
    pub fn shift(&self, u: &ReducedWord) -> Configuration {
        if u.is_empty() {
            return self.clone();
        }
        let (base, by) = match &*self.node {
            Node::Shifted { base, by } => (base.clone(), by.concat(u)),
            _ => (self.clone(), u.clone()),
        };
        if by.is_empty() {
            return base;
        }
        Configuration {
            sig: self.sig,
            node: Arc::new(Node::Shifted { base, by }),
        }
    }

    pub fn shift_letter(&self, l: Letter) -> Configuration {
        self.shift(&ReducedWord::letter(l))
    }

    /// `x|Σ^n`.
    pub fn central_block(&self, n: usize) -> Result<Block> {
        Block::from_fn(self.sig, n, |u| self.eval(u))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Constant(s) => write!(f, "constant({s})"),
            Node::Automaton(a) => write!(f, "automaton({} states)", a.states()),
            Node::Override { base, depth, .. } => write!(f, "override({base}, depth {depth})"),
            Node::Shifted { base, by } => write!(f, "shift({base}, {})", by.human()),
            Node::Readout(t) => write!(f, "readout({} sites)", t.len()),
        }
    }
}

pub(crate) fn check_sig(expected: Signature, found: Signature) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SignatureMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

/// `d(x, y)` computed on `Σ^D`: `Exact(2^-m)` for the first length `m < D`
/// where the configurations differ, `AtMost(2^-D)` if they agree on `Σ^D`.
pub fn distance(x: &Configuration, y: &Configuration, depth: usize) -> Result<DyadicDistance> {
    check_sig(x.sig, y.sig)?;
    let ball = x.sig.ball(depth)?;
    for u in ball.iter() {
        if x.eval(u) != y.eval(u) {
            return Ok(DyadicDistance::Exact(Dyadic::pow2_neg(u.len() as u32)));
        }
    }
    Ok(DyadicDistance::AtMost(Dyadic::pow2_neg(depth as u32)))
}

/// Whether `x` and `y` agree on `Σ^n`.
pub fn agree_on(x: &Configuration, y: &Configuration, n: usize) -> Result<bool> {
    Ok(!distance(x, y, n)?.is_exact())
}

/// Hausdorff distance between finite sets of blocks of equal depth.
pub fn hausdorff_blocks(a: &[Block], b: &[Block]) -> Result<DyadicDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("hausdorff distance needs nonempty sets".into()));
    }
    let one_sided = |from: &[Block], to: &[Block]| {
        from.iter()
            .map(|p| to.iter().map(|q| p.distance(q)).min().expect("nonempty"))
            .max()
            .expect("nonempty")
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Hausdorff distance between finite sets of configurations on `Σ^D`.
pub fn hausdorff(a: &[Configuration], b: &[Configuration], depth: usize) -> Result<DyadicDistance> {
    let blocks = |s: &[Configuration]| -> Result<Vec<Block>> { s.iter().map(|x| x.central_block(depth)).collect() };
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        check_sig(x.sig, y.sig)?;
    }
    hausdorff_blocks(&blocks(a)?, &blocks(b)?)
}
