//! Realizing a finite point set as a limit set of one configuration.
//!
//! Every construction lays out stages of witnesses along a word, each stage
//! at a resolution no coarser than the previous one, reads off a point from
//! the resulting pseudo-orbit, and then checks the claimed limit set against
//! an independent approximation.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::Serialize;

use super::{approximate, LimitApproximation, LimitKind};
use crate::dyadic::{Dyadic, DyadicDistance};
use crate::error::{Error, Result};
use crate::orbits::{validate_pseudo_orbit, PseudoOrbit, ShadowingOracle, TailRule};
use crate::patterns::{check_sig, hausdorff_blocks, Block, Configuration};
use crate::shifts::ShiftSystem;
use crate::transitivity::{
    edge_graph, find_chain, is_cict_graph, tree_property, CictReport, FinalConstraint, LetterPair, StepGraph, TreePlan,
    TreeProperty, Verdict, DEFAULT_SEARCH_BUDGET,
};
use crate::words::{ReducedWord, Signature};

/// Largest witness radius tried when none is given.
const MAX_WITNESS_RADIUS: usize = 6;
/// Upper bound on the number of stages of one construction.
const MAX_STAGES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealizeMode {
    /// Chains through the set with constrained letters, read along a word.
    Cict,
    /// Group witnesses glued at their two final sites.
    IbtStar,
    /// Monoid witnesses glued at their final site.
    IbtCirc,
}

impl RealizeMode {
    pub fn limit_kind(self) -> LimitKind {
        match self {
            RealizeMode::Cict => LimitKind::OmegaW,
            RealizeMode::IbtStar | RealizeMode::IbtCirc => LimitKind::OmegaFw,
        }
    }
}

impl FromStr for RealizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cict" => Ok(RealizeMode::Cict),
            "ibt-star" => Ok(RealizeMode::IbtStar),
            "ibt-circ" => Ok(RealizeMode::IbtCirc),
            _ => Err(Error::Parse(format!(
                "mode must be cict, ibt-star or ibt-circ, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageLog {
    pub resolution: Dyadic,
    /// Where the stage is attached: a spine position or an anchor word.
    pub anchor: ReducedWord,
    /// Chain words, or the covering sites of the witness relative to the
    /// anchor.
    pub words: Vec<ReducedWord>,
    /// The chain leading to the next stage, if any.
    pub bridge: Option<ReducedWord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionLog {
    pub mode: RealizeMode,
    pub step: usize,
    pub resolution: Dyadic,
    /// Resolution of every stage, in order.
    pub chain_scale: Vec<Dyadic>,
    pub shadow_scale: Option<Dyadic>,
    pub oracle: Option<String>,
    pub stages: Vec<StageLog>,
    pub assignment: Vec<LetterPair>,
    pub witness_radius: Option<usize>,
    pub final_point: Option<usize>,
    pub sites: usize,
    pub orbit_delta: Dyadic,
    pub orbit_defect: DyadicDistance,
    pub hausdorff: DyadicDistance,
    pub admissible_depth: usize,
    pub admissible: bool,
}

/// A point `x` with `ω_w(x)` or `ω_{F_w}(x)` close to the set, and the range
/// `(n*, N*]` on which this was checked.
#[derive(Clone, Debug, Serialize)]
pub struct Realization {
    pub kind: LimitKind,
    pub point: Configuration,
    /// The prefix of `w` the construction fixes.
    pub word: ReducedWord,
    pub inner: usize,
    pub outer: usize,
    pub approximation: LimitApproximation,
    #[serde(serialize_with = "crate::codec::serialize_orbit")]
    pub orbit: PseudoOrbit,
    pub log: ConstructionLog,
}

/// Stage resolutions: the listed ones, then `repeat` as often as needed.
#[derive(Clone, Debug)]
struct Schedule {
    first: Vec<u32>,
    repeat: u32,
}

impl Schedule {
    fn at(&self, t: usize) -> u32 {
        self.first.get(t).copied().unwrap_or(self.repeat)
    }

    fn finest(&self) -> u32 {
        self.first.iter().copied().max().unwrap_or(0).max(self.repeat)
    }

    /// Coarse stages from `M+1` up to `s = max(k, M) + 1`, then `s`.
    fn refining(step: usize, k: u32) -> Self {
        let m = step as u32;
        let s = k.max(m) + 1;
        Schedule {
            first: (m + 1..s).collect(),
            repeat: s,
        }
    }
}

/// Edge graphs by resolution. A resolution at which two points coincide
/// falls back to the finest graph, whose edges are valid at every coarser
/// resolution.
struct Graphs<'a> {
    points: &'a [Configuration],
    finest: u32,
    cache: HashMap<u32, StepGraph>,
}

impl<'a> Graphs<'a> {
    fn new(points: &'a [Configuration], finest: u32) -> Self {
        Graphs {
            points,
            finest,
            cache: HashMap::new(),
        }
    }

    fn at(&mut self, m: u32) -> Result<&StepGraph> {
        if !self.cache.contains_key(&m) {
            let g = match edge_graph(self.points, Dyadic::pow2_neg(m), m as usize + 1) {
                Ok(eg) => eg.graph,
                Err(Error::DuplicatePoints(..)) if m < self.finest => {
                    let f = self.finest;
                    self.at(f)?.clone()
                }
                Err(e) => return Err(e),
            };
            self.cache.insert(m, g);
        }
        Ok(&self.cache[&m])
    }
}

/// `table[p][l]`: the first edge target from `p` by `l` among `alive`.
fn continuation(g: &StepGraph, alive: &[bool]) -> Vec<Vec<Option<usize>>> {
    let width = 2 * g.signature().rank as usize;
    (0..g.len())
        .map(|p| {
            let mut row = vec![None; width];
            for &(l, q) in g.out_edges(p) {
                let slot = &mut row[l.code() as usize];
                if slot.is_none() && alive[q] {
                    *slot = Some(q);
                }
            }
            row
        })
        .collect()
}

struct Built {
    kind: LimitKind,
    sites: Vec<(ReducedWord, usize)>,
    table: Vec<Vec<Option<usize>>>,
    word: ReducedWord,
    inner: usize,
    outer: usize,
    chain_scale: Vec<Dyadic>,
    stages: Vec<StageLog>,
    assignment: Vec<LetterPair>,
    witness_radius: Option<usize>,
    final_point: Option<usize>,
}

fn check_points(points: &[Configuration]) -> Result<Signature> {
    let first = points
        .first()
        .ok_or_else(|| Error::EmptySet("cannot realize an empty set".into()))?;
    let sig = first.signature();
    for p in points {
        check_sig(sig, p.signature())?;
    }
    Ok(sig)
}

fn refutation_text<T: Serialize>(r: &T) -> String {
    serde_json::to_string(r).unwrap_or_else(|_| "refuted".into())
}

fn cict_assignment(graphs: &mut Graphs, finest: u32) -> Result<CictReport> {
    let report = is_cict_graph(graphs.at(finest)?, DEFAULT_SEARCH_BUDGET)?;
    match report.verdict {
        Verdict::Witnessed => Ok(report),
        _ => Err(Error::NotCict(
            report
                .refutation
                .as_ref()
                .map_or("no assignment".into(), refutation_text),
        )),
    }
}

/// Lays chains through `x_0, ..., x_{n-1}` stage after stage along one word.
/// The stages are joined by bridges `x_{n-1} -> x_0`; the last stage is the
/// first repeated stage with at least `margin` letters of repeated stages
/// before it.
fn build_cict(points: &[Configuration], schedule: &Schedule, margin: usize) -> Result<Built> {
    check_points(points)?;
    let finest = schedule.finest();
    let mut graphs = Graphs::new(points, finest);
    let report = cict_assignment(&mut graphs, finest)?;
    let a = &report.assignment;
    let n = points.len();
    let pairs: Vec<(usize, usize)> = if n == 1 {
        vec![(0, 0)]
    } else {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    };
    let chain = |g: &StepGraph, p: usize, q: usize| {
        find_chain(g, p, q, Some(a[p].first), Some(a[q].last))
            .ok_or_else(|| Error::Verification(format!("no chain from {p} to {q} under the assignment")))
    };

    let mut letters = Vec::new();
    let mut verts = vec![0usize];
    let mut starts = Vec::new();
    let mut stages: Vec<StageLog> = Vec::new();
    let mut chain_scale = Vec::new();
    let first_repeat = schedule.first.len();
    let mut t = 0;
    loop {
        if t >= MAX_STAGES {
            return Err(Error::Construction("too many stages".into()));
        }
        let m = schedule.at(t);
        let start = letters.len();
        starts.push(start);
        chain_scale.push(Dyadic::pow2_neg(m));
        let g = graphs.at(m)?.clone();
        let mut words = Vec::new();
        for &(p, q) in &pairs {
            let c = chain(&g, p, q)?;
            letters.extend_from_slice(c.word.letters());
            verts.extend_from_slice(&c.vertices[1..]);
            words.push(c.word);
        }
        stages.push(StageLog {
            resolution: Dyadic::pow2_neg(m),
            anchor: ReducedWord::from_reduced(letters[..start].to_vec()).expect("spine is reduced"),
            words,
            bridge: None,
        });
        let repeats = (t + 1).saturating_sub(first_repeat);
        let behind = start.saturating_sub(starts.get(first_repeat).copied().unwrap_or(start));
        if t >= first_repeat && repeats >= 2 && behind >= margin {
            break;
        }
        let c = chain(&g, n - 1, 0)?;
        letters.extend_from_slice(c.word.letters());
        verts.extend_from_slice(&c.vertices[1..]);
        stages.last_mut().expect("stage").bridge = Some(c.word);
        t += 1;
    }
    let word = ReducedWord::from_reduced(letters)
        .ok_or_else(|| Error::Verification("chains do not join into a reduced word".into()))?;
    let sites = (0..=word.len()).map(|j| (word.prefix(j), verts[j])).collect();
    let fine = graphs.at(finest)?.clone();
    let table = continuation(&fine, &vec![true; n]);
    let last_start = *starts.last().expect("stage");
    Ok(Built {
        kind: LimitKind::OmegaW,
        sites,
        table,
        inner: last_start - 1,
        outer: word.len(),
        word,
        chain_scale,
        stages,
        assignment: report.assignment.clone(),
        witness_radius: None,
        final_point: None,
    })
}

/// One stage of a tree-shaped construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageWitness {
    pub resolution: Dyadic,
    pub plan: TreePlan,
}

/// The glued site map of a tree-shaped construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StitchedSites {
    pub sites: Vec<(ReducedWord, usize)>,
    /// Where each stage's identity is placed.
    pub anchors: Vec<ReducedWord>,
    /// The word after each stage: `w_n` over groups, `P_n` over monoids.
    pub ends: Vec<ReducedWord>,
}

fn special_sites(sig: Signature, plan: &TreePlan) -> Result<(usize, ReducedWord, Option<ReducedWord>)> {
    let bad = |site: &ReducedWord| Error::SeamConflict { site: site.human() };
    match (sig.is_group(), plan.special.as_slice()) {
        (true, [(y, ui), (z, uj)]) => {
            if y != z
                || ui.is_empty()
                || uj.is_empty()
                || ui.is_prefix_of(uj)
                || uj.is_prefix_of(ui)
                || ui.last() == uj.last()
            {
                return Err(bad(uj));
            }
            Ok((*y, ui.clone(), Some(uj.clone())))
        }
        (false, [(y, u)]) => {
            if u.is_empty() || *y != plan.root {
                return Err(bad(u));
            }
            Ok((*y, u.clone(), None))
        }
        _ => Err(Error::Construction(
            "witness does not carry the final sites of its kind".into(),
        )),
    }
}

/// Glues stage witnesses. Over a group stage `n` is placed so that its site
/// `u_i` lands on `w_{n-1}`, and `w_n` is where its site `u_j` lands; sites
/// beyond `u_i` or `u_j` are left to the neighbouring stages. Over a monoid
/// stage `n` hangs below `P_{n-1}` and `P_n = P_{n-1} u`.
pub fn stitch_stages(sig: Signature, stages: &[StageWitness]) -> Result<StitchedSites> {
    let mut map: BTreeMap<ReducedWord, usize> = BTreeMap::new();
    let mut anchors = Vec::new();
    let mut ends = Vec::new();
    let mut end = ReducedWord::empty();
    for (t, st) in stages.iter().enumerate() {
        let (_, ui, uj) = special_sites(sig, &st.plan)?;
        let anchor = match (&uj, t) {
            (_, 0) => ReducedWord::empty(),
            (Some(_), _) => end.concat(&ui.inverse()),
            (None, _) => end.clone(),
        };
        let ball = sig.ball(st.plan.radius + 1)?;
        if ball.len() != st.plan.labels.len() {
            return Err(Error::Construction("witness labels do not cover its ball".into()));
        }
        for (v, &label) in ball.iter().zip(&st.plan.labels) {
            let beyond = match &uj {
                Some(uj) => ui.is_proper_prefix_of(v) || uj.is_proper_prefix_of(v),
                None => ui.is_proper_prefix_of(v),
            };
            if beyond {
                continue;
            }
            let site = anchor.concat(v);
            match map.get(&site) {
                Some(&old) if old != label => return Err(Error::SeamConflict { site: site.human() }),
                Some(_) => {}
                None => {
                    map.insert(site, label);
                }
            }
        }
        end = anchor.concat(uj.as_ref().unwrap_or(&ui));
        anchors.push(anchor);
        ends.push(end.clone());
    }
    Ok(StitchedSites {
        sites: map.into_iter().collect(),
        anchors,
        ends,
    })
}

/// The first witness with radius up to [`MAX_WITNESS_RADIUS`] (or exactly
/// `radius`), or why none exists.
fn tree_witness(
    points: &[Configuration],
    property: TreeProperty,
    m: u32,
    radius: Option<usize>,
    constraint: FinalConstraint,
) -> Result<std::result::Result<TreePlan, String>> {
    let radii: Vec<usize> = match radius {
        Some(r) => vec![r],
        None => (1..=MAX_WITNESS_RADIUS).collect(),
    };
    let mut why = format!("no witness up to radius {}", radii.last().copied().unwrap_or(0));
    for r in radii {
        match tree_property(points, property, Dyadic::pow2_neg(m), m as usize + 1, r, constraint) {
            Ok(d) => match (d.report.verdict, d.report.plan) {
                (Verdict::Witnessed, Some(plan)) => return Ok(Ok(plan)),
                (Verdict::Refuted, _) => {
                    return Ok(Err(d
                        .report
                        .refutation
                        .as_ref()
                        .map_or("refuted".into(), refutation_text)))
                }
                _ => {}
            },
            Err(Error::RadiusTooSmall { .. }) => {}
            Err(Error::DuplicatePoints(i, j)) => why = format!("points {i} and {j} coincide"),
            Err(e) => return Err(e),
        }
    }
    Ok(Err(why))
}

fn build_tree(points: &[Configuration], schedule: &Schedule, margin: usize, radius: Option<usize>) -> Result<Built> {
    let sig = check_points(points)?;
    let property = if sig.is_group() {
        TreeProperty::IbtStar
    } else {
        TreeProperty::IbtCirc
    };
    let refuse = |why: String| match property {
        TreeProperty::IbtStar => Error::NotIbtStar(why),
        _ => Error::NotIbtCirc(why),
    };
    let finest = schedule.finest();
    let fine = tree_witness(points, property, finest, radius, FinalConstraint::default())?.map_err(refuse)?;
    let (y, ui, uj) = special_sites(sig, &fine)?;
    let constraint = FinalConstraint {
        point: Some(y),
        first_end: if sig.is_group() { ui.last() } else { None },
        second_end: uj.as_ref().and_then(ReducedWord::last),
    };
    let mut stages: Vec<StageWitness> = schedule
        .first
        .iter()
        .map(|&m| {
            let plan =
                tree_witness(points, property, m, Some(fine.radius), constraint)?.unwrap_or_else(|_| fine.clone());
            Ok(StageWitness {
                resolution: Dyadic::pow2_neg(m),
                plan,
            })
        })
        .collect::<Result<_>>()?;
    let first_repeat = stages.len();
    let repeat = StageWitness {
        resolution: Dyadic::pow2_neg(schedule.repeat),
        plan: fine.clone(),
    };
    // Stage p is the first repeated stage with `margin` letters of repeated
    // stages above its end; stage p + 1 carries the covering sites.
    let (stitched, p) = loop {
        stages.push(repeat.clone());
        if stages.len() > MAX_STAGES {
            return Err(Error::Construction("too many stages".into()));
        }
        let stitched = stitch_stages(sig, &stages)?;
        let base = if first_repeat == 0 {
            0
        } else {
            stitched.ends[first_repeat - 1].len()
        };
        let p = (first_repeat..stages.len()).find(|&p| stitched.ends[p].len() - base >= margin);
        if let Some(p) = p {
            if p + 1 < stages.len() {
                break (stitched, p);
            }
        }
    };
    let inner = stitched.ends[p].len();
    let anchor = &stitched.anchors[p + 1];
    let outer = stages[p + 1]
        .plan
        .targets
        .iter()
        .map(|(_, v)| anchor.concat(v).len())
        .max()
        .unwrap_or(inner + 1)
        .max(inner + 1);
    let g = edge_graph(points, Dyadic::pow2_neg(finest), finest as usize + 1)?.graph;
    let steps = g.tree_steps();
    let table = continuation(&steps, &steps.full_core());
    let logs = stages
        .iter()
        .zip(&stitched.anchors)
        .map(|(st, anchor)| StageLog {
            resolution: st.resolution,
            anchor: anchor.clone(),
            words: st
                .plan
                .special
                .iter()
                .chain(&st.plan.targets)
                .map(|(_, v)| v.clone())
                .collect(),
            bridge: None,
        })
        .collect();
    Ok(Built {
        kind: LimitKind::OmegaFw,
        sites: stitched.sites,
        table,
        word: stitched.ends.last().expect("stage").clone(),
        inner,
        outer,
        chain_scale: stages.iter().map(|s| s.resolution).collect(),
        stages: logs,
        assignment: Vec::new(),
        witness_radius: Some(fine.radius),
        final_point: Some(y),
    })
}

fn build(points: &[Configuration], mode: RealizeMode, schedule: &Schedule, radius: Option<usize>) -> Result<Built> {
    let sig = check_points(points)?;
    // Over a group the readout near a site also depends on the sites above
    // it, so the stages above the checked range must be fine enough.
    let margin = if sig.is_group() {
        schedule.finest() as usize + 2
    } else {
        0
    };
    match mode {
        RealizeMode::Cict => build_cict(points, schedule, margin),
        RealizeMode::IbtStar if !sig.is_group() => {
            Err(Error::NotIbtStar("i,j-final witnesses are defined over groups".into()))
        }
        RealizeMode::IbtCirc if sig.is_group() => {
            Err(Error::NotIbtCirc("final witnesses are defined over monoids".into()))
        }
        RealizeMode::IbtStar | RealizeMode::IbtCirc => build_tree(points, schedule, margin.max(1), radius),
    }
}

/// Validates the stitched orbit, reads off (or shadows) the point and checks
/// the claimed limit set on `Σ^k`.
fn finish(
    points: &[Configuration],
    sys: &ShiftSystem,
    mode: RealizeMode,
    k: u32,
    built: Built,
    delta: Dyadic,
    oracle: Option<&dyn ShadowingOracle>,
) -> Result<Realization> {
    let sig = sys.signature();
    let orbit = PseudoOrbit::from_sites(sig, points.to_vec(), built.sites, TailRule::ShiftExtend)?
        .with_continuation(built.table)?;
    let defect = validate_pseudo_orbit(&orbit, delta, delta.exp as usize + 1)?;
    if !defect.passes {
        return Err(Error::Verification(format!(
            "stitched orbit has defect {} at {} letter {}",
            defect.max_defect,
            defect.worst_site.human(),
            defect.worst_letter
        )));
    }
    let eps = Dyadic::pow2_neg(k);
    let point = match oracle {
        Some(o) => o.shadow(&orbit, eps)?,
        None => orbit.readout()?,
    };
    let approximation = approximate(
        built.kind,
        &point,
        Some(&built.word),
        built.inner,
        built.outer,
        k as usize,
    )?;
    let target: Vec<Block> = points
        .iter()
        .map(|p| p.central_block(k as usize))
        .collect::<Result<_>>()?;
    let hausdorff = hausdorff_blocks(&target, &approximation.blocks())?;
    if !hausdorff.is_at_most(eps) {
        return Err(Error::Verification(format!(
            "limit set approximation is {hausdorff} from the target, above {eps}"
        )));
    }
    let m = sys.step();
    let admissible_depth = (k as usize).max(m) + 2;
    let mut admissible = sys.member_to_depth(&point, admissible_depth)?;
    for member in &approximation.members {
        admissible &= sys.member_to_depth(&point.shift(&member.word), m + 1)?;
    }
    for j in 0..=built.word.len() {
        admissible &= sys.member_to_depth(&point.shift(&built.word.prefix(j)), m + 1)?;
    }
    if !admissible {
        return Err(Error::Verification("realized point leaves the system".into()));
    }
    let log = ConstructionLog {
        mode,
        step: m,
        resolution: eps,
        chain_scale: built.chain_scale,
        shadow_scale: oracle.map(|_| eps),
        oracle: oracle.map(|o| if o.is_asymptotic() { "sft-asymptotic" } else { "sft" }.to_string()),
        stages: built.stages,
        assignment: built.assignment,
        witness_radius: built.witness_radius,
        final_point: built.final_point,
        sites: orbit.tree().len(),
        orbit_delta: delta,
        orbit_defect: defect.max_defect,
        hausdorff,
        admissible_depth,
        admissible,
    };
    Ok(Realization {
        kind: built.kind,
        point,
        word: built.word,
        inner: built.inner,
        outer: built.outer,
        approximation,
        orbit,
        log,
    })
}

fn check_system(points: &[Configuration], sys: &ShiftSystem, k: u32) -> Result<()> {
    let sig = check_points(points)?;
    check_sig(sys.signature(), sig)?;
    if k == 0 {
        return Err(Error::Construction("resolution exponent must be positive".into()));
    }
    Ok(())
}

/// A point `x` of `sys` and a word `w` with `ω_w(x)` within `2^-k` of the
/// points, which must be CICT at the finest stage resolution.
pub fn realize_cict_as_omega_w(points: &[Configuration], sys: &ShiftSystem, k: u32) -> Result<Realization> {
    realize(points, sys, RealizeMode::Cict, k, None)
}

/// A point `x` of `sys` and a word `w` with `ω_{F_w}(x)` within `2^-k` of the
/// points: i,j-final witnesses over groups, final witnesses over monoids.
pub fn realize_ibt_as_omega_fw(
    points: &[Configuration],
    sys: &ShiftSystem,
    k: u32,
    radius: Option<usize>,
) -> Result<Realization> {
    let sig = check_points(points)?;
    let mode = if sig.is_group() {
        RealizeMode::IbtStar
    } else {
        RealizeMode::IbtCirc
    };
    realize(points, sys, mode, k, radius)
}

/// Stages refine from `2^-(M+1)` to `2^-s`, `s = max(k, M) + 1`, so the
/// stitched orbit is a `2^-(M+1)` pseudo-orbit with values in the set and its
/// readout lies in the system.
pub fn realize(
    points: &[Configuration],
    sys: &ShiftSystem,
    mode: RealizeMode,
    k: u32,
    radius: Option<usize>,
) -> Result<Realization> {
    check_system(points, sys, k)?;
    let schedule = Schedule::refining(sys.step(), k);
    let built = build(points, mode, &schedule, radius)?;
    let delta = Dyadic::pow2_neg(sys.step() as u32 + 1);
    finish(points, sys, mode, k, built, delta, None)
}

/// The same constructions with every stage at least as fine as the
/// oracle's modulus `δ(2^-k)` (or `chain_scale`, if finer), handing the
/// stitched pseudo-orbit to the oracle. An asymptotic oracle gets stages
/// that refine once more after the first.
pub fn realize_with_shadowing(
    points: &[Configuration],
    oracle: Option<&dyn ShadowingOracle>,
    mode: RealizeMode,
    k: u32,
    chain_scale: Option<u32>,
) -> Result<Realization> {
    let oracle = oracle.ok_or(Error::OracleUnavailable)?;
    let sys = oracle.system();
    check_system(points, sys, k)?;
    let delta = oracle.modulus(Dyadic::pow2_neg(k))?;
    let c = chain_scale.unwrap_or(delta.exp);
    if c < delta.exp {
        return Err(Error::Construction(format!(
            "chain scale 2^-{c} is coarser than the shadowing modulus {delta}"
        )));
    }
    let schedule = if oracle.is_asymptotic() {
        Schedule {
            first: vec![c],
            repeat: c + 1,
        }
    } else {
        Schedule {
            first: Vec::new(),
            repeat: c,
        }
    };
    let built = build(points, mode, &schedule, None)?;
    finish(points, sys, mode, k, built, delta, Some(oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::orbits::{SftAsymptoticShadowing, SftShadowing};

    #[test]
    fn parity_pair_along_a_word() {
        let sig = Signature::group(2);
        let sys = fixtures::golden_mean(sig);
        let y = fixtures::parity_pair(sig);
        let r = realize_cict_as_omega_w(&y, &sys, 3).unwrap();
        assert!(r.log.hausdorff.is_at_most(Dyadic::pow2_neg(3)));
        assert_eq!(r.approximation.members.len(), 2);
    }

    #[test]
    fn not_cict_cites_x0() {
        let y = fixtures::ict_not_cict(fixtures::ExampleDirection::Literal);
        let sys = fixtures::full_shift(Signature::group(2), 3);
        match realize_cict_as_omega_w(&y, &sys, 2) {
            Err(Error::NotCict(msg)) => assert!(msg.contains("\"point\":0"), "{msg}"),
            other => panic!("expected NotCict, got {other:?}"),
        }
    }

    #[test]
    fn star_witnesses_glue() {
        let sig = Signature::group(2);
        let sys = fixtures::proper_coloring(sig, 3);
        let y = fixtures::mod3_triple(sig);
        let r = realize_ibt_as_omega_fw(&y, &sys, 2, None).unwrap();
        assert_eq!(r.approximation.members.len(), 3);
        assert!(r.word.len() >= r.inner);
    }

    #[test]
    fn circ_witnesses_glue() {
        let sig = Signature::monoid(2);
        let sys = fixtures::golden_mean(sig);
        let y = fixtures::parity_pair(sig);
        let r = realize_ibt_as_omega_fw(&y, &sys, 3, None).unwrap();
        assert_eq!(r.approximation.members.len(), 2);
    }

    #[test]
    fn tampered_witness_conflicts() {
        let sig = Signature::group(2);
        let y = fixtures::mod3_triple(sig);
        let d = tree_property(
            &y,
            TreeProperty::IbtStar,
            Dyadic::pow2_neg(2),
            3,
            2,
            FinalConstraint::default(),
        )
        .unwrap();
        let mut plan = d.report.plan.unwrap();
        let ui = plan.special[0].1.clone();
        plan.special[1].1 = ui.with(sig.successors(&ui)[0]);
        let st = StageWitness {
            resolution: Dyadic::pow2_neg(2),
            plan,
        };
        assert!(matches!(
            stitch_stages(sig, &[st.clone(), st]),
            Err(Error::SeamConflict { .. })
        ));
    }

    #[test]
    fn shadowed_realizations() {
        let sig = Signature::group(2);
        let two = fixtures::two_point_system(sig);
        let zero = vec![Configuration::constant(sig, 0)];
        let oracle = SftShadowing { system: &two };
        let r = realize_with_shadowing(&zero, Some(&oracle), RealizeMode::Cict, 3, None).unwrap();
        assert!(
            crate::patterns::distance(&r.point, &zero[0], 5).unwrap() <= DyadicDistance::AtMost(Dyadic::pow2_neg(5))
        );

        let gm = fixtures::golden_mean(sig);
        let oracle = SftAsymptoticShadowing { system: &gm };
        let y = fixtures::parity_pair(sig);
        let r = realize_with_shadowing(&y, Some(&oracle), RealizeMode::Cict, 3, None).unwrap();
        assert!(r.log.hausdorff.is_at_most(Dyadic::pow2_neg(3)));

        assert_eq!(
            realize_with_shadowing(&y, None, RealizeMode::Cict, 3, None).unwrap_err(),
            Error::OracleUnavailable
        );
    }
}
