//! Chain transitivity of finite point sets: the labeled edge graph at a
//! resolution, chains, and the deciders for internal chain transitivity
//! (ICT), its letter-constrained form (CICT) and the tree-shaped variants
//! (IBT, with final and i,j-final witnesses).
//!
//! The deciders work on an abstract [`StepGraph`]; the wrappers taking
//! configurations build the graph with [`edge_graph`] and re-validate every
//! witness against the metric.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::orbits::{validate_pseudo_orbit, PseudoOrbit, TailRule};
use crate::patterns::{check_sig, distance, Block, Configuration};
use crate::words::{Letter, ReducedWord, Signature};

/// Default node budget for the CICT assignment search.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// A finite directed graph whose edges carry letters of a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepGraph {
    sig: Signature,
    out: Vec<Vec<(Letter, usize)>>,
}

impl StepGraph {
    pub fn new(sig: Signature, n: usize, edges: impl IntoIterator<Item = (usize, Letter, usize)>) -> Result<Self> {
        let mut out = vec![Vec::new(); n];
        for (p, l, q) in edges {
            sig.check_letter(l)?;
            if p >= n || q >= n {
                return Err(Error::Construction(format!("edge {p} -> {q} leaves the graph")));
            }
            out[p].push((l, q));
        }
        for row in &mut out {
            row.sort();
            row.dedup();
        }
        Ok(StepGraph { sig, out })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn out_edges(&self, v: usize) -> &[(Letter, usize)] {
        &self.out[v]
    }

    pub fn has_edge(&self, p: usize, l: Letter, q: usize) -> bool {
        self.out[p].binary_search(&(l, q)).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, Letter, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(p, row)| row.iter().map(move |&(l, q)| (p, l, q)))
    }

    /// Letters of edges leaving `v`.
    pub fn out_letters(&self, v: usize) -> Vec<Letter> {
        let mut ls: Vec<Letter> = self.out[v].iter().map(|e| e.0).collect();
        ls.dedup();
        ls
    }

    /// Letters of edges entering `v`.
    pub fn in_letters(&self, v: usize) -> Vec<Letter> {
        let mut ls: Vec<Letter> = self.edges().filter(|e| e.2 == v).map(|e| e.1).collect();
        ls.sort();
        ls.dedup();
        ls
    }

    /// Steps usable between neighboring sites of a pseudo-orbit on the whole
    /// tree. Over a group the step from `u` to `u l` is checked in both
    /// directions, so only edges whose reverse `(q, l^-1, p)` also exists
    /// remain.
    pub fn tree_steps(&self) -> StepGraph {
        if !self.sig.is_group() {
            return self.clone();
        }
        let edges: Vec<_> = self
            .edges()
            .filter(|&(p, l, q)| self.has_edge(q, l.inverse(), p))
            .collect();
        StepGraph::new(self.sig, self.len(), edges).expect("subgraph")
    }

    /// The largest vertex set in which every vertex has, for every letter, an
    /// edge to the set.
    pub fn full_core(&self) -> Vec<bool> {
        let letters = self.sig.letters();
        let mut alive = vec![true; self.len()];
        loop {
            let mut changed = false;
            for v in 0..self.len() {
                if alive[v]
                    && !letters
                        .iter()
                        .all(|&l| self.out[v].iter().any(|&(m, q)| m == l && alive[q]))
                {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                return alive;
            }
        }
    }

    fn allows(&self, prev: Option<Letter>, next: Letter) -> bool {
        prev.map_or(true, |p| !self.sig.is_group() || next != p.inverse())
    }

    /// States `(vertex, last letter)` reachable by nonempty reduced paths that
    /// start at `from` with a letter accepted by `first`, restricted to `alive`.
    fn reach_states(&self, from: usize, first: &dyn Fn(Letter) -> bool, alive: &[bool]) -> Vec<Vec<bool>> {
        let width = 2 * self.sig.rank as usize;
        let mut seen = vec![vec![false; width]; self.len()];
        let mut queue = VecDeque::new();
        for &(l, q) in &self.out[from] {
            if first(l) && alive[q] && !seen[q][l.code() as usize] {
                seen[q][l.code() as usize] = true;
                queue.push_back((q, l));
            }
        }
        while let Some((v, l)) = queue.pop_front() {
            for &(m, q) in &self.out[v] {
                if self.allows(Some(l), m) && alive[q] && !seen[q][m.code() as usize] {
                    seen[q][m.code() as usize] = true;
                    queue.push_back((q, m));
                }
            }
        }
        seen
    }
}

/// A chain `from = p_0, p_1, ..., p_n = to` with `(p_{t-1}, l_t, p_t)` edges and
/// `word = l_1 ... l_n` reduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainWitness {
    pub from: usize,
    pub to: usize,
    pub word: ReducedWord,
    pub vertices: Vec<usize>,
}

impl ChainWitness {
    /// Re-checks the chain against the metric rather than the edge set.
    pub fn verify(&self, points: &[Configuration], eps: Dyadic, depth: usize) -> Result<bool> {
        let letters = self.word.letters();
        if letters.is_empty()
            || self.vertices.len() != letters.len() + 1
            || self.vertices[0] != self.from
            || *self.vertices.last().expect("nonempty") != self.to
        {
            return Ok(false);
        }
        if ReducedWord::from_reduced(letters.to_vec()).is_none() {
            return Ok(false);
        }
        for (t, &l) in letters.iter().enumerate() {
            let p = &points[self.vertices[t]];
            let q = &points[self.vertices[t + 1]];
            if !distance(&p.shift_letter(l), q, depth)?.is_below(eps) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// BFS predecessor of a (point, last letter) state.
type Pred = Option<(usize, Option<Letter>)>;

/// Shortest nonempty reduced chain from `from` to `to`, optionally fixing the
/// first and last letters. Ties are broken by letter order.
pub fn find_chain(
    g: &StepGraph,
    from: usize,
    to: usize,
    first: Option<Letter>,
    last: Option<Letter>,
) -> Option<ChainWitness> {
    let width = 2 * g.sig.rank as usize;
    let mut parent: Vec<Vec<Pred>> = vec![vec![None; width]; g.len()];
    let mut queue = VecDeque::new();
    for &(l, q) in g.out_edges(from) {
        if first.map_or(true, |f| f == l) && parent[q][l.code() as usize].is_none() {
            parent[q][l.code() as usize] = Some((from, None));
            queue.push_back((q, l));
        }
    }
    while let Some((v, l)) = queue.pop_front() {
        if v == to && last.map_or(true, |t| t == l) {
            let mut letters = vec![l];
            let mut vertices = vec![v];
            let (mut cv, mut cl) = (v, l);
            while let Some((pv, pl)) = parent[cv][cl.code() as usize] {
                vertices.push(pv);
                match pl {
                    Some(pl) => {
                        letters.push(pl);
                        cv = pv;
                        cl = pl;
                    }
                    None => break,
                }
            }
            letters.reverse();
            vertices.reverse();
            return Some(ChainWitness {
                from,
                to,
                word: ReducedWord::from_reduced(letters).expect("reduced by construction"),
                vertices,
            });
        }
        for &(m, q) in g.out_edges(v) {
            if g.allows(Some(l), m) && parent[q][m.code() as usize].is_none() {
                parent[q][m.code() as usize] = Some((v, Some(l)));
                queue.push_back((q, m));
            }
        }
    }
    None
}

/// The labeled graph of a finite point set at resolution `ε = 2^-k`:
/// `(x, i, y)` is an edge when `d(σ_i x, y) < ε`, that is when the two agree
/// on `Σ^{k+1}`.
#[derive(Clone, Debug)]
pub struct EdgeGraph {
    pub points: Vec<Configuration>,
    pub eps: Dyadic,
    pub depth: usize,
    pub graph: StepGraph,
}

pub fn edge_graph(points: &[Configuration], eps: Dyadic, depth: usize) -> Result<EdgeGraph> {
    let first = points
        .first()
        .ok_or_else(|| Error::EmptySet("edge graph needs at least one point".into()))?;
    let sig = first.signature();
    for p in points {
        check_sig(sig, p.signature())?;
    }
    let k = eps.exp as usize;
    if depth < k + 1 {
        return Err(Error::ResolutionDepthMismatch {
            k: eps.exp,
            depth,
            needed: k + 1,
        });
    }
    let full: Vec<Block> = points.iter().map(|p| p.central_block(depth)).collect::<Result<_>>()?;
    for i in 0..full.len() {
        for j in (i + 1)..full.len() {
            if full[i] == full[j] {
                return Err(Error::DuplicatePoints(i, j));
            }
        }
    }
    let near: Vec<Block> = full.iter().map(|b| b.restrict(k + 1)).collect::<Result<_>>()?;
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for l in sig.letters() {
            let shifted = p.shift_letter(l).central_block(k + 1)?;
            for (j, b) in near.iter().enumerate() {
                if *b == shifted {
                    edges.push((i, l, j));
                }
            }
        }
    }
    Ok(EdgeGraph {
        points: points.to_vec(),
        eps,
        depth,
        graph: StepGraph::new(sig, points.len(), edges)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Witnessed,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IctReport {
    pub verdict: Verdict,
    /// One chain for every ordered pair when witnessed.
    pub chains: Vec<ChainWitness>,
    /// The first ordered pair with no chain.
    pub unreachable: Option<(usize, usize)>,
}

pub fn is_ict_graph(g: &StepGraph) -> IctReport {
    let mut chains = Vec::new();
    for x in 0..g.len() {
        for y in 0..g.len() {
            match find_chain(g, x, y, None, None) {
                Some(c) => chains.push(c),
                None => {
                    return IctReport {
                        verdict: Verdict::Refuted,
                        chains: Vec::new(),
                        unreachable: Some((x, y)),
                    }
                }
            }
        }
    }
    IctReport {
        verdict: Verdict::Witnessed,
        chains,
        unreachable: None,
    }
}

pub fn is_ict(points: &[Configuration], eps: Dyadic, depth: usize) -> Result<IctReport> {
    Ok(is_ict_graph(&edge_graph(points, eps, depth)?.graph))
}

/// Why no letter assignment exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CictRefutation {
    /// Every letter leaving `point` is the inverse of every letter entering it.
    LetterObstruction {
        point: usize,
        in_letters: Vec<Letter>,
        out_letters: Vec<Letter>,
    },
    Unreachable {
        from: usize,
        to: usize,
    },
    /// Exhaustive search found no consistent assignment.
    NoAssignment {
        nodes: u64,
    },
}

/// First and terminal letters `(i(x), t(x))` for one point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LetterPair {
    pub first: Letter,
    pub last: Letter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CictReport {
    pub verdict: Verdict,
    pub assignment: Vec<LetterPair>,
    pub chains: Vec<ChainWitness>,
    pub refutation: Option<CictRefutation>,
    pub nodes: u64,
}

fn refuted(r: CictRefutation, nodes: u64) -> CictReport {
    CictReport {
        verdict: Verdict::Refuted,
        assignment: Vec::new(),
        chains: Vec::new(),
        refutation: Some(r),
        nodes,
    }
}

/// Decides CICT: letters `i(x), t(x)` with `i(x) != t(x)^-1` such that every
/// ordered pair `(x, y)` has a chain starting with `i(x)` and ending with
/// `t(y)`. The returned assignment is the least one in point and letter order.
pub fn is_cict_graph(g: &StepGraph, budget: u64) -> Result<CictReport> {
    let n = g.len();
    let sig = g.sig;
    for v in 0..n {
        let ins = g.in_letters(v);
        let outs = g.out_letters(v);
        let blocked = outs
            .iter()
            .all(|&i| ins.iter().all(|&t| sig.is_group() && i == t.inverse()));
        if blocked {
            return Ok(refuted(
                CictRefutation::LetterObstruction {
                    point: v,
                    in_letters: ins,
                    out_letters: outs,
                },
                0,
            ));
        }
    }
    if let Some((from, to)) = is_ict_graph(g).unreachable {
        return Ok(refuted(CictRefutation::Unreachable { from, to }, 0));
    }

    let letters = sig.letters();
    let all = vec![true; n];
    // reach[x][i][y][t]: a chain x -> y starts with i and ends with t.
    let reach: Vec<Vec<Vec<Vec<bool>>>> = (0..n)
        .map(|x| {
            letters
                .iter()
                .map(|&i| {
                    let states = g.reach_states(x, &|l| l == i, &all);
                    states
                        .iter()
                        .map(|row| letters.iter().map(|t| row[t.code() as usize]).collect())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut domains: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|x| {
            let mut d = Vec::new();
            for (a, &i) in letters.iter().enumerate() {
                for (b, &t) in letters.iter().enumerate() {
                    if sig.is_group() && i == t.inverse() {
                        continue;
                    }
                    let firsts_ok = (0..n).all(|y| (0..letters.len()).any(|c| reach[x][a][y][c]));
                    let lasts_ok = (0..n).all(|y| (0..letters.len()).any(|c| reach[y][c][x][b]));
                    if reach[x][a][x][b] && firsts_ok && lasts_ok {
                        d.push((a, b));
                    }
                }
            }
            d
        })
        .collect();

    let mut nodes = 0u64;
    let mut chosen = vec![(0usize, 0usize); n];
    let found = assign(0, &reach, &mut domains, &mut chosen, &mut nodes, budget)?;
    if !found {
        return Ok(refuted(CictRefutation::NoAssignment { nodes }, nodes));
    }
    let assignment: Vec<LetterPair> = chosen
        .iter()
        .map(|&(a, b)| LetterPair {
            first: letters[a],
            last: letters[b],
        })
        .collect();
    let mut chains = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let c = find_chain(g, x, y, Some(assignment[x].first), Some(assignment[y].last))
                .expect("assignment is consistent");
            chains.push(c);
        }
    }
    Ok(CictReport {
        verdict: Verdict::Witnessed,
        assignment,
        chains,
        refutation: None,
        nodes,
    })
}

fn assign(
    x: usize,
    reach: &[Vec<Vec<Vec<bool>>>],
    domains: &mut Vec<Vec<(usize, usize)>>,
    chosen: &mut Vec<(usize, usize)>,
    nodes: &mut u64,
    budget: u64,
) -> Result<bool> {
    let n = domains.len();
    if x == n {
        return Ok(true);
    }
    let options = domains[x].clone();
    for (a, b) in options {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::SearchBudgetExhausted(budget));
        }
        chosen[x] = (a, b);
        // Forward checking against the later points.
        let saved: Vec<Vec<(usize, usize)>> = domains[x + 1..].to_vec();
        let mut ok = true;
        for z in x + 1..n {
            domains[z].retain(|&(c, d)| reach[x][a][z][d] && reach[z][c][x][b]);
            if domains[z].is_empty() {
                ok = false;
                break;
            }
        }
        if ok && assign(x + 1, reach, domains, chosen, nodes, budget)? {
            return Ok(true);
        }
        for (z, d) in saved.into_iter().enumerate() {
            domains[x + 1 + z] = d;
        }
    }
    Ok(false)
}

pub fn is_cict(points: &[Configuration], eps: Dyadic, depth: usize) -> Result<CictReport> {
    is_cict_graph(&edge_graph(points, eps, depth)?.graph, DEFAULT_SEARCH_BUDGET)
}

/// Which tree-shaped property to decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeProperty {
    /// A pseudo-orbit on the whole tree whose values cover the set.
    Ibt,
    /// Additionally some `y` sits at two sites ending in distinct letters,
    /// neither a prefix of the other nor of any covering site (groups).
    IbtStar,
    /// Additionally `O(e) = y` and `y` sits at a nonempty site that is not a
    /// prefix of any covering site (monoids).
    IbtCirc,
}

/// Sites of a tree-shaped witness, with vertex labels on `Σ^{R+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreePlan {
    pub root: usize,
    pub radius: usize,
    /// `(point, site)`: the covering site of each point.
    pub targets: Vec<(usize, ReducedWord)>,
    /// `(point, site)`: the extra sites of the final point.
    pub special: Vec<(usize, ReducedWord)>,
    /// Vertex label of every site of `Σ^{R+1}`, in ball order.
    pub labels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndLetters {
    pub root: usize,
    pub point: usize,
    pub letters: Vec<Letter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeRefutation {
    /// These points cannot sit anywhere in a pseudo-orbit on the whole tree.
    OutsideCore { points: Vec<usize> },
    /// No admissible root reaches every point; lists what each root misses.
    NoRoot { missing: Vec<(usize, Vec<usize>)> },
    /// No point is reached along tree paths ending in enough distinct letters.
    NoFinalPoint { end_letters: Vec<EndLetters> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    pub property: TreeProperty,
    pub verdict: Verdict,
    pub core: Vec<usize>,
    pub plan: Option<TreePlan>,
    pub refutation: Option<TreeRefutation>,
    pub note: Option<String>,
}

/// Optional restriction on the final point of a star or circ witness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FinalConstraint {
    pub point: Option<usize>,
    pub first_end: Option<Letter>,
    pub second_end: Option<Letter>,
}

struct Placement<'a> {
    sig: Signature,
    steps: &'a StepGraph,
    alive: &'a [bool],
    radius: usize,
    labels: BTreeMap<ReducedWord, usize>,
    targets: Vec<ReducedWord>,
}

impl<'a> Placement<'a> {
    fn new(steps: &'a StepGraph, alive: &'a [bool], radius: usize, root: usize) -> Self {
        let mut labels = BTreeMap::new();
        labels.insert(ReducedWord::empty(), root);
        Placement {
            sig: steps.sig,
            steps,
            alive,
            radius,
            labels,
            targets: Vec::new(),
        }
    }

    fn blocked(&self, s: &ReducedWord) -> bool {
        self.targets.iter().any(|t| t.is_prefix_of(s))
    }

    /// Places `target` at a fresh site reached from an unblocked labeled site,
    /// with last letter accepted by `end`. Returns the site, or `Err(true)`
    /// when only the radius prevented it.
    fn place(&mut self, target: usize, end: &dyn Fn(Letter) -> bool) -> std::result::Result<ReducedWord, bool> {
        match self.search(target, end, Some(self.radius)) {
            Some(path) => {
                let site = self.commit(path);
                Ok(site)
            }
            None => Err(self.search(target, end, None).is_some()),
        }
    }

    fn search(
        &self,
        target: usize,
        end: &dyn Fn(Letter) -> bool,
        limit: Option<usize>,
    ) -> Option<(ReducedWord, Vec<(Letter, usize)>)> {
        let width = 2 * self.sig.rank as usize;
        let n = self.steps.len();
        let mut seen = vec![vec![false; width]; n];
        // Each queue entry: (source site, path of (letter, vertex)).
        let mut queue: VecDeque<(usize, usize, Letter)> = VecDeque::new();
        let mut nodes: Vec<(Option<usize>, Letter, usize)> = Vec::new();
        let mut sources: Vec<ReducedWord> = Vec::new();
        let mut origin: Vec<usize> = Vec::new();
        for (s, &v) in &self.labels {
            if self.blocked(s) {
                continue;
            }
            if limit.is_some_and(|r| s.len() + 1 > r) {
                continue;
            }
            let src = sources.len();
            sources.push(s.clone());
            for l in self.sig.successors(s) {
                if self.labels.contains_key(&s.with(l)) {
                    continue;
                }
                for &(m, q) in self.steps.out_edges(v) {
                    if m == l && self.alive[q] && !seen[q][l.code() as usize] {
                        seen[q][l.code() as usize] = true;
                        nodes.push((None, l, q));
                        origin.push(src);
                        queue.push_back((nodes.len() - 1, s.len() + 1, l));
                    }
                }
            }
        }
        while let Some((id, len, l)) = queue.pop_front() {
            let v = nodes[id].2;
            if v == target && end(l) {
                let mut path = Vec::new();
                let mut cur = Some(id);
                while let Some(c) = cur {
                    path.push((nodes[c].1, nodes[c].2));
                    cur = nodes[c].0;
                }
                path.reverse();
                let mut root = id;
                while let Some(p) = nodes[root].0 {
                    root = p;
                }
                return Some((sources[origin[root]].clone(), path));
            }
            if limit.is_some_and(|r| len + 1 > r) {
                continue;
            }
            for &(m, q) in self.steps.out_edges(v) {
                if m != l.inverse() && self.alive[q] && !seen[q][m.code() as usize] {
                    seen[q][m.code() as usize] = true;
                    nodes.push((Some(id), m, q));
                    origin.push(origin[id]);
                    queue.push_back((nodes.len() - 1, len + 1, m));
                }
            }
        }
        None
    }

    fn commit(&mut self, (source, path): (ReducedWord, Vec<(Letter, usize)>)) -> ReducedWord {
        let mut site = source;
        for (l, v) in path {
            site = site.with(l);
            self.labels.insert(site.clone(), v);
        }
        self.targets.push(site.clone());
        site
    }

    fn fill(&self) -> Result<Vec<usize>> {
        let ball = self.sig.ball(self.radius + 1)?;
        let mut labels = Vec::with_capacity(ball.len());
        let mut by_site: BTreeMap<&ReducedWord, usize> = BTreeMap::new();
        for u in ball.iter() {
            let v = match self.labels.get(u) {
                Some(&v) => v,
                None => {
                    let parent = u.parent().expect("root is labeled");
                    let pv = by_site[&parent];
                    let l = u.last().expect("nonempty");
                    self.steps
                        .out_edges(pv)
                        .iter()
                        .find(|&&(m, q)| m == l && self.alive[q])
                        .map(|&(_, q)| q)
                        .ok_or_else(|| Error::Construction(format!("no step {l} from vertex {pv}")))?
                }
            };
            by_site.insert(u, v);
            labels.push(v);
        }
        Ok(labels)
    }
}

/// End letters of nonempty reduced step paths from `root` to each vertex.
fn end_letters(steps: &StepGraph, alive: &[bool], root: usize) -> Vec<Vec<Letter>> {
    let states = steps.reach_states(root, &|_| true, alive);
    let letters = steps.sig.letters();
    states
        .iter()
        .map(|row| letters.iter().copied().filter(|l| row[l.code() as usize]).collect())
        .collect()
}

/// Decides a tree-shaped property on an abstract graph of `ε` edges.
pub fn tree_property_graph(
    g: &StepGraph,
    property: TreeProperty,
    radius: usize,
    constraint: FinalConstraint,
) -> Result<TreeReport> {
    let sig = g.sig;
    match property {
        TreeProperty::IbtStar if !sig.is_group() => {
            return Err(Error::Construction(
                "i,j-final witnesses are defined over groups".into(),
            ))
        }
        TreeProperty::IbtCirc if sig.is_group() => {
            return Err(Error::Construction("final witnesses are defined over monoids".into()))
        }
        _ => {}
    }
    let n = g.len();
    let steps = g.tree_steps();
    let alive = steps.full_core();
    let core: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let report = |verdict, plan, refutation, note: Option<String>| TreeReport {
        property,
        verdict,
        core: core.clone(),
        plan,
        refutation,
        note,
    };
    let outside: Vec<usize> = (0..n).filter(|&v| !alive[v]).collect();
    if !outside.is_empty() {
        return Ok(report(
            Verdict::Refuted,
            None,
            Some(TreeRefutation::OutsideCore { points: outside }),
            None,
        ));
    }

    let ends: Vec<Vec<Vec<Letter>>> = (0..n).map(|r| end_letters(&steps, &alive, r)).collect();
    let reaches = |r: usize, y: usize| y == r || !ends[r][y].is_empty();
    let roots: Vec<usize> = match property {
        TreeProperty::IbtCirc => (0..n).filter(|&y| constraint.point.map_or(true, |p| p == y)).collect(),
        _ => (0..n).collect(),
    };
    let good_roots: Vec<usize> = roots
        .iter()
        .copied()
        .filter(|&r| (0..n).all(|y| reaches(r, y)))
        .collect();
    if good_roots.is_empty() {
        let missing = roots
            .iter()
            .map(|&r| (r, (0..n).filter(|&y| !reaches(r, y)).collect()))
            .collect();
        return Ok(report(
            Verdict::Refuted,
            None,
            Some(TreeRefutation::NoRoot { missing }),
            None,
        ));
    }
    let final_ok = |r: usize, y: usize| match property {
        TreeProperty::Ibt => true,
        TreeProperty::IbtStar => ends[r][y].len() >= 2,
        TreeProperty::IbtCirc => r == y && !ends[r][y].is_empty(),
    };
    let any_final = good_roots
        .iter()
        .any(|&r| (0..n).any(|y| final_ok(r, y) && constraint.point.map_or(true, |p| p == y)));
    if !any_final {
        let end_letters = good_roots
            .iter()
            .flat_map(|&r| {
                let ends = &ends;
                (0..n).map(move |y| EndLetters {
                    root: r,
                    point: y,
                    letters: ends[r][y].clone(),
                })
            })
            .collect();
        return Ok(report(
            Verdict::Refuted,
            None,
            Some(TreeRefutation::NoFinalPoint { end_letters }),
            None,
        ));
    }

    let mut radius_short = false;
    for &root in &good_roots {
        let finals: Vec<Option<usize>> = match property {
            TreeProperty::Ibt => vec![None],
            TreeProperty::IbtStar => (0..n)
                .filter(|&y| final_ok(root, y) && constraint.point.map_or(true, |p| p == y))
                .map(Some)
                .collect(),
            TreeProperty::IbtCirc => vec![Some(root)],
        };
        for y in finals {
            let firsts: Vec<Option<Letter>> = match (property, y) {
                (TreeProperty::IbtStar, Some(y)) => ends[root][y]
                    .iter()
                    .copied()
                    .filter(|&l| constraint.first_end.map_or(true, |f| f == l))
                    .map(Some)
                    .collect(),
                _ => vec![None],
            };
            for first in firsts {
                let mut p = Placement::new(&steps, &alive, radius, root);
                let mut special = Vec::new();
                let mut ok = true;
                if let Some(y) = y {
                    let end1 = move |l: Letter| first.map_or(true, |f| f == l);
                    match p.place(y, &end1) {
                        Ok(site) => special.push((y, site)),
                        Err(short) => {
                            radius_short |= short;
                            ok = false;
                        }
                    }
                    if ok && property == TreeProperty::IbtStar {
                        let taken = first.expect("star has a first end letter");
                        let second = constraint.second_end;
                        let end2 = move |l: Letter| l != taken && second.map_or(true, |s| s == l);
                        match p.place(y, &end2) {
                            Ok(site) => special.push((y, site)),
                            Err(short) => {
                                radius_short |= short;
                                ok = false;
                            }
                        }
                    }
                }
                let mut targets = Vec::new();
                for x in 0..n {
                    if !ok {
                        break;
                    }
                    match p.place(x, &|_| true) {
                        Ok(site) => targets.push((x, site)),
                        Err(short) => {
                            radius_short |= short;
                            ok = false;
                        }
                    }
                }
                if ok {
                    let labels = p.fill()?;
                    return Ok(report(
                        Verdict::Witnessed,
                        Some(TreePlan {
                            root,
                            radius,
                            targets,
                            special,
                            labels,
                        }),
                        None,
                        None,
                    ));
                }
            }
        }
    }
    if radius_short {
        return Err(Error::RadiusTooSmall {
            radius,
            needed: radius + 1,
        });
    }
    Ok(report(
        Verdict::Inconclusive,
        None,
        None,
        Some("no placement of covering sites was found".into()),
    ))
}

/// A tree-shaped witness realized as a pseudo-orbit on `Σ^{R+1}`.
#[derive(Clone, Debug)]
pub struct TreeWitness {
    pub plan: TreePlan,
    pub orbit: PseudoOrbit,
}

#[derive(Clone, Debug)]
pub struct TreeDecision {
    pub report: TreeReport,
    pub witness: Option<TreeWitness>,
}

/// Decides a tree-shaped property for configurations at `ε`, comparing on
/// `Σ^D`, with witnesses on the ball of radius `R`. Witnesses are rebuilt as
/// pseudo-orbits and re-validated against the metric.
pub fn tree_property(
    points: &[Configuration],
    property: TreeProperty,
    eps: Dyadic,
    depth: usize,
    radius: usize,
    constraint: FinalConstraint,
) -> Result<TreeDecision> {
    let eg = edge_graph(points, eps, depth)?;
    let report = tree_property_graph(&eg.graph, property, radius, constraint)?;
    let witness = match &report.plan {
        Some(plan) => {
            let sig = eg.graph.sig;
            let values = plan.labels.iter().map(|&v| points[v].clone()).collect();
            let orbit = PseudoOrbit::on_ball(sig, radius, values, TailRule::ShiftExtend)?;
            let check = validate_pseudo_orbit(&orbit, eps, depth)?;
            if !check.passes {
                return Err(Error::Verification(format!(
                    "tree witness fails at {} letter {}",
                    check.worst_site.human(),
                    check.worst_letter
                )));
            }
            Some(TreeWitness {
                plan: plan.clone(),
                orbit,
            })
        }
        None => None,
    };
    Ok(TreeDecision { report, witness })
}

pub fn is_ibt(points: &[Configuration], eps: Dyadic, depth: usize, radius: usize) -> Result<TreeDecision> {
    tree_property(
        points,
        TreeProperty::Ibt,
        eps,
        depth,
        radius,
        FinalConstraint::default(),
    )
}

pub fn is_ibt_star(points: &[Configuration], eps: Dyadic, depth: usize, radius: usize) -> Result<TreeDecision> {
    tree_property(
        points,
        TreeProperty::IbtStar,
        eps,
        depth,
        radius,
        FinalConstraint::default(),
    )
}

pub fn is_ibt_circ(points: &[Configuration], eps: Dyadic, depth: usize, radius: usize) -> Result<TreeDecision> {
    tree_property(
        points,
        TreeProperty::IbtCirc,
        eps,
        depth,
        radius,
        FinalConstraint::default(),
    )
}
