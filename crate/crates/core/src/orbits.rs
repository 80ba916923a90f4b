//! Pseudo-orbits on finite sets of sites, their validation, and shadowing in
//! shifts of finite type.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, DyadicDistance};
use crate::error::{Error, Result};
use crate::patterns::{check_sig, distance, Block, Configuration, SiteTree};
use crate::shifts::ShiftSystem;
use crate::words::{Letter, ReducedWord, Signature};

/// How a pseudo-orbit is read beyond its assigned sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRule {
    /// `O(u) = σ_{u'^{-1} u}(O(u'))` for the longest assigned prefix `u'`.
    ShiftExtend,
    None,
}

/// A map from a finite prefix-closed set of sites to configurations.
///
/// Orbits built on a ball assign every site of `Σ^{R+1}`; orbits built by the
/// realization constructors assign a prefix-closed tree of sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoOrbit {
    sig: Signature,
    radius: usize,
    tree: SiteTree,
    tail: TailRule,
}

impl PseudoOrbit {
    /// Assigns `points[i]` to the `i`-th word of `Σ^{R+1}` in ball order.
    pub fn on_ball(sig: Signature, radius: usize, points: Vec<Configuration>, tail: TailRule) -> Result<Self> {
        let ball = sig.ball(radius + 1)?;
        if points.len() != ball.len() {
            return Err(Error::Construction(format!(
                "ball of radius {radius} has {} sites, got {} points",
                ball.len(),
                points.len()
            )));
        }
        let mut table: Vec<Configuration> = Vec::new();
        let mut index: HashMap<Configuration, usize> = HashMap::new();
        let mut sites = Vec::with_capacity(ball.len());
        for (u, p) in ball.iter().zip(points) {
            check_sig(sig, p.signature())?;
            let id = *index.entry(p.clone()).or_insert_with(|| {
                table.push(p);
                table.len() - 1
            });
            sites.push((u.clone(), id));
        }
        PseudoOrbit::from_sites(sig, table, sites, tail)
    }

    /// An orbit on an arbitrary prefix-closed site set.
    pub fn from_sites(
        sig: Signature,
        points: Vec<Configuration>,
        sites: Vec<(ReducedWord, usize)>,
        tail: TailRule,
    ) -> Result<Self> {
        for (u, _) in &sites {
            sig.check_word(u)?;
        }
        for p in &points {
            check_sig(sig, p.signature())?;
        }
        let radius = sites.iter().map(|(u, _)| u.len()).max().unwrap_or(0);
        let tree = SiteTree::new(points, sites)?;
        Ok(PseudoOrbit {
            sig,
            radius,
            tree,
            tail,
        })
    }

    /// Extends the orbit past its sites along a step table; see
    /// [`SiteTree::with_continuation`].
    pub fn with_continuation(mut self, table: Vec<Vec<Option<usize>>>) -> Result<Self> {
        self.tree = self.tree.with_continuation(table)?;
        Ok(self)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// The largest length of an assigned site.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    pub fn tree(&self) -> &SiteTree {
        &self.tree
    }

    pub fn points(&self) -> &[Configuration] {
        self.tree.points()
    }

    /// Assigned sites with point indices, in ball order.
    pub fn sites(&self) -> impl Iterator<Item = (&ReducedWord, usize)> {
        self.tree.sites()
    }

    pub fn get(&self, u: &ReducedWord) -> Option<&Configuration> {
        self.tree.get(u).map(|i| &self.tree.points()[i])
    }

    /// `O(u)`, using the tail rule off the assigned sites.
    pub fn at(&self, u: &ReducedWord) -> Option<Configuration> {
        match (self.get(u), self.tail) {
            (Some(p), _) => Some(p.clone()),
            (None, TailRule::ShiftExtend) => Some(self.tree.at(u)),
            (None, TailRule::None) => None,
        }
    }

    /// The configuration `x(u) = O(u)(e)` read off the orbit.
    pub fn readout(&self) -> Result<Configuration> {
        Configuration::readout(self.sig, self.tree.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShellDefect {
    pub shell: usize,
    pub defect: DyadicDistance,
}

/// Result of checking `d(σ_i(O(u)), O(u i)) < δ` over assigned steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefectReport {
    pub delta: Dyadic,
    pub depth: usize,
    pub passes: bool,
    pub max_defect: DyadicDistance,
    pub worst_site: ReducedWord,
    pub worst_letter: Letter,
    pub steps_checked: usize,
    /// Largest defect among steps whose inner endpoint has length `shell`.
    pub shells: Vec<ShellDefect>,
}

/// Checks every step `(u, i)` with both `u` and `u i` assigned, comparing on
/// `Σ^D`. Steps leaving the assigned sites follow the tail rule exactly and
/// carry no defect.
pub fn validate_pseudo_orbit(orbit: &PseudoOrbit, delta: Dyadic, depth: usize) -> Result<DefectReport> {
    let k = delta.exp;
    if depth < k as usize + 1 {
        return Err(Error::ResolutionDepthMismatch {
            k,
            depth,
            needed: k as usize + 1,
        });
    }
    let sig = orbit.sig;
    let points = orbit.points();
    let blocks: Vec<Block> = points.iter().map(|p| p.central_block(depth)).collect::<Result<_>>()?;
    let mut shifted: HashMap<(usize, Letter), Block> = HashMap::new();
    let mut best: Option<(DyadicDistance, ReducedWord, Letter)> = None;
    let mut shells: Vec<Option<DyadicDistance>> = vec![None; orbit.radius + 1];
    let mut steps = 0;
    for (u, p) in orbit.sites() {
        for l in sig.letters() {
            let v = u.with(l);
            let Some(q) = orbit.tree.get(&v) else { continue };
            let d = match shifted.entry((p, l)) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(points[p].shift_letter(l).central_block(depth)?),
            }
            .distance(&blocks[q]);
            steps += 1;
            let shell = u.len().min(v.len());
            shells[shell] = Some(shells[shell].map_or(d, |s| s.max(d)));
            if best.as_ref().map_or(true, |b| d > b.0) {
                best = Some((d, u.clone(), l));
            }
        }
    }
    let floor = DyadicDistance::AtMost(Dyadic::pow2_neg(depth as u32));
    let (max_defect, worst_site, worst_letter) = best.unwrap_or((floor, ReducedWord::empty(), sig.letters()[0]));
    let used = shells.iter().rposition(Option::is_some).map_or(0, |r| r + 1);
    Ok(DefectReport {
        delta,
        depth,
        passes: max_defect.is_below(delta),
        max_defect,
        worst_site,
        worst_letter,
        steps_checked: steps,
        shells: shells[..used]
            .iter()
            .enumerate()
            .map(|(shell, d)| ShellDefect {
                shell,
                defect: d.unwrap_or(floor),
            })
            .collect(),
    })
}

/// Per-shell maximal defect on `Σ^D`.
pub fn asymptotic_defect(orbit: &PseudoOrbit, depth: usize) -> Result<Vec<ShellDefect>> {
    Ok(validate_pseudo_orbit(orbit, Dyadic::ONE, depth.max(1))?.shells)
}

/// Sites `u` and words `v` with `|v| <= m - 2` for which `O(u)(v) != O(u v)(e)`
/// although `u v` is assigned. Empty for every `2^-m` pseudo-orbit.
pub fn trace_violations(orbit: &PseudoOrbit, m: usize) -> Result<Vec<(ReducedWord, ReducedWord)>> {
    let mut out = Vec::new();
    if m < 2 {
        return Ok(out);
    }
    let vs = orbit.sig.ball(m - 1)?;
    let e = ReducedWord::empty();
    for (u, p) in orbit.sites() {
        for v in vs.iter() {
            if let Some(q) = orbit.get(&u.concat(v)) {
                if orbit.points()[p].eval(v) != q.eval(&e) {
                    out.push((u.clone(), v.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// For a shift of finite type with step `M` and `ε = 2^-k`, `k > M`, every
/// `2^-(k+1)` pseudo-orbit is `ε`-shadowed.
pub fn shadowing_modulus(sys: &ShiftSystem, eps: Dyadic) -> Result<Dyadic> {
    if (eps.exp as usize) <= sys.step() {
        return Err(Error::ResolutionTooCoarse {
            k: eps.exp,
            step: sys.step(),
        });
    }
    Ok(eps.half())
}

fn check_points_in_system(orbit: &PseudoOrbit, sys: &ShiftSystem, depth: usize) -> Result<()> {
    for (i, p) in orbit.points().iter().enumerate() {
        if !sys.member_to_depth(p, depth)? {
            return Err(Error::Construction(format!(
                "orbit point {i} is not admissible to depth {depth}"
            )));
        }
    }
    Ok(())
}

/// The shadowing point `x(u) = O(u)(e)` of a `2^-(k+1)` pseudo-orbit in a shift
/// of finite type with step `M < k`.
pub fn shadow_sft(orbit: &PseudoOrbit, sys: &ShiftSystem, k: u32) -> Result<Configuration> {
    check_sig(sys.signature(), orbit.sig)?;
    let delta = shadowing_modulus(sys, Dyadic::pow2_neg(k))?;
    let report = validate_pseudo_orbit(orbit, delta, k as usize + 2)?;
    if !report.passes {
        return Err(defect_error(&report));
    }
    check_points_in_system(orbit, sys, k as usize + 2)?;
    orbit.readout()
}

fn defect_error(report: &DefectReport) -> Error {
    Error::DefectTooLarge {
        site: report.worst_site.human(),
        letter: report.worst_letter.to_string(),
        defect: report.max_defect.to_string(),
        delta: report.delta.to_string(),
    }
}

/// Shell-wise guarantee for the asymptotic shadow at resolution `2^-k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShellGuarantee {
    pub resolution: Dyadic,
    /// The last shell whose defect is not below `2^-(k+1)`, if any.
    pub last_bad_shell: Option<usize>,
    /// From this length on, `σ_u(x)` and `O(u)` agree on `Σ^k`.
    pub exact_from_shell: usize,
}

#[derive(Clone, Debug)]
pub struct AsymptoticShadow {
    pub point: Configuration,
    /// Whether the orbit is also a `2^-(M+1)` pseudo-orbit everywhere.
    pub uniform_hypothesis: bool,
    pub admissible: bool,
    pub admissible_depth: usize,
    pub shells: Vec<ShellDefect>,
    pub guarantees: Vec<ShellGuarantee>,
}

/// Shadows an asymptotic pseudo-orbit: defects may be large near the root
/// but must fall below `2^-(M+1)` on the outermost shell.
///
/// The readout point is returned even when the orbit is not a uniform
/// `2^-(M+1)` pseudo-orbit; in that case its admissibility is reported
/// rather than assumed.
pub fn shadow_sft_asymptotic(orbit: &PseudoOrbit, sys: &ShiftSystem, depth: usize) -> Result<AsymptoticShadow> {
    check_sig(sys.signature(), orbit.sig)?;
    let m = sys.step();
    let delta = Dyadic::pow2_neg(m as u32 + 1);
    let report = validate_pseudo_orbit(orbit, delta, depth)?;
    let last = report
        .shells
        .last()
        .ok_or_else(|| Error::EmptySet("orbit has no steps".into()))?;
    if !last.defect.is_below(delta) {
        return Err(defect_error(&report));
    }
    let point = orbit.readout()?;
    let admissible_depth = orbit.radius + 1;
    let admissible = sys.member_to_depth(&point, admissible_depth)?;
    let guarantees = ((m as u32 + 1)..(depth as u32))
        .map(|k| {
            let finer = Dyadic::pow2_neg(k + 1);
            let last_bad_shell = report
                .shells
                .iter()
                .rev()
                .find(|s| !s.defect.is_below(finer))
                .map(|s| s.shell);
            ShellGuarantee {
                resolution: Dyadic::pow2_neg(k),
                last_bad_shell,
                exact_from_shell: last_bad_shell.map_or(0, |l| l + 1) + k as usize,
            }
        })
        .collect();
    Ok(AsymptoticShadow {
        point,
        uniform_hypothesis: report.passes,
        admissible,
        admissible_depth,
        shells: report.shells,
        guarantees,
    })
}

/// A shadowing procedure for a system, used by the realization constructors.
pub trait ShadowingOracle {
    /// `δ` such that every `δ` pseudo-orbit is `ε`-shadowed.
    fn modulus(&self, eps: Dyadic) -> Result<Dyadic>;

    fn shadow(&self, orbit: &PseudoOrbit, eps: Dyadic) -> Result<Configuration>;

    fn is_asymptotic(&self) -> bool;

    fn system(&self) -> &ShiftSystem;
}

pub struct SftShadowing<'a> {
    pub system: &'a ShiftSystem,
}

impl ShadowingOracle for SftShadowing<'_> {
    fn modulus(&self, eps: Dyadic) -> Result<Dyadic> {
        shadowing_modulus(self.system, eps)
    }

    fn shadow(&self, orbit: &PseudoOrbit, eps: Dyadic) -> Result<Configuration> {
        shadow_sft(orbit, self.system, eps.exp)
    }

    fn is_asymptotic(&self) -> bool {
        false
    }

    fn system(&self) -> &ShiftSystem {
        self.system
    }
}

pub struct SftAsymptoticShadowing<'a> {
    pub system: &'a ShiftSystem,
}

impl ShadowingOracle for SftAsymptoticShadowing<'_> {
    fn modulus(&self, eps: Dyadic) -> Result<Dyadic> {
        shadowing_modulus(self.system, eps)
    }

    fn shadow(&self, orbit: &PseudoOrbit, eps: Dyadic) -> Result<Configuration> {
        let out = shadow_sft_asymptotic(orbit, self.system, eps.exp as usize + 2)?;
        if !out.admissible {
            return Err(Error::Verification("asymptotic shadow is not admissible".into()));
        }
        Ok(out.point)
    }

    fn is_asymptotic(&self) -> bool {
        true
    }

    fn system(&self) -> &ShiftSystem {
        self.system
    }
}

/// For one candidate point and each shell `n`, a site of length at least `n`
/// where it fails to track the orbit within `2^-1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrackingFailure {
    pub shell: usize,
    pub site: Option<ReducedWord>,
    pub error: DyadicDistance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointTracking {
    pub point: usize,
    pub failures: Vec<TrackingFailure>,
}

/// Evidence that no point of a system asymptotically shadows an orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoShadowCertificate {
    /// Admissible blocks found at `enumeration_depth`, all accounted for by
    /// the candidate points.
    pub enumeration_depth: usize,
    pub enumerated: usize,
    pub points: Vec<PointTracking>,
    /// Every candidate fails on every shell up to `max_shell`.
    pub valid: bool,
}

/// Certifies that none of `candidates` tracks `orbit` within `2^-1` beyond
/// any shell up to `max_shell`, after checking that the candidates exhaust the
/// admissible blocks of depth `enumeration_depth`.
pub fn no_shadow_certificate(
    sys: &ShiftSystem,
    orbit: &PseudoOrbit,
    candidates: &[Configuration],
    enumeration_depth: usize,
    max_shell: usize,
) -> Result<NoShadowCertificate> {
    let blocks = sys.enumerate_points(enumeration_depth)?;
    let cand_blocks: Vec<Block> = candidates
        .iter()
        .map(|c| c.central_block(enumeration_depth))
        .collect::<Result<_>>()?;
    let exhaustive = blocks.iter().all(|b| cand_blocks.contains(b));
    let half = Dyadic::pow2_neg(1);
    let mut points = Vec::new();
    let mut valid = exhaustive;
    for (i, z) in candidates.iter().enumerate() {
        let mut failures = Vec::new();
        let mut found_at: Vec<Option<(ReducedWord, DyadicDistance)>> = vec![None; max_shell + 1];
        for len in (0..=max_shell).rev() {
            for u in orbit.sig.sphere(len)? {
                let target = orbit
                    .at(&u)
                    .ok_or_else(|| Error::Construction(format!("orbit undefined at {}", u.human())))?;
                let d = distance(&z.shift(&u), &target, 2)?;
                if !d.is_below(half) {
                    found_at[len] = Some((u, d));
                    break;
                }
            }
        }
        // A failure on a longer site also witnesses every shorter shell.
        for shell in (0..max_shell).rev() {
            if found_at[shell].is_none() {
                found_at[shell] = found_at[shell + 1].clone();
            }
        }
        for (shell, found) in found_at.into_iter().enumerate() {
            valid &= found.is_some();
            let (site, error) = match found {
                Some((u, d)) => (Some(u), d),
                None => (None, DyadicDistance::AtMost(Dyadic::pow2_neg(2))),
            };
            failures.push(TrackingFailure { shell, site, error });
        }
        points.push(PointTracking { point: i, failures });
    }
    Ok(NoShadowCertificate {
        enumeration_depth,
        enumerated: blocks.len(),
        points,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::Alphabet;

    fn two_point(sig: Signature) -> ShiftSystem {
        ShiftSystem::nearest_neighbor(sig, Alphabet::binary(), |c, _, d| c == d).unwrap()
    }

    #[test]
    fn modulus_examples() {
        let g2 = Signature::group(2);
        let sys = two_point(g2);
        assert_eq!(
            shadowing_modulus(&sys, Dyadic::pow2_neg(3)).unwrap(),
            Dyadic::pow2_neg(4)
        );
        assert!(matches!(
            shadowing_modulus(&sys, Dyadic::pow2_neg(2)),
            Err(Error::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn constant_orbit_shadows_itself() {
        let g2 = Signature::group(2);
        let sys = two_point(g2);
        let one = Configuration::constant(g2, 1);
        let n = g2.ball(4).unwrap().len();
        let orbit = PseudoOrbit::on_ball(g2, 3, vec![one.clone(); n], TailRule::ShiftExtend).unwrap();
        let report = validate_pseudo_orbit(&orbit, Dyadic::pow2_neg(4), 5).unwrap();
        assert!(report.passes);
        let x = shadow_sft(&orbit, &sys, 3).unwrap();
        assert!(!distance(&x, &one, 6).unwrap().is_exact());
    }

    #[test]
    fn defect_is_reported_at_its_site() {
        let g1 = Signature::group(1);
        let zero = Configuration::constant(g1, 0);
        let one = Configuration::constant(g1, 1);
        let ball = g1.ball(3).unwrap();
        let pts: Vec<_> = ball
            .iter()
            .map(|u| {
                if u.to_string() == "aa" {
                    one.clone()
                } else {
                    zero.clone()
                }
            })
            .collect();
        let orbit = PseudoOrbit::on_ball(g1, 2, pts, TailRule::ShiftExtend).unwrap();
        let report = validate_pseudo_orbit(&orbit, Dyadic::pow2_neg(2), 3).unwrap();
        assert!(!report.passes);
        assert_eq!(report.max_defect, DyadicDistance::Exact(Dyadic::ONE));
        assert_eq!(report.worst_site.to_string(), "a");
        assert_eq!(report.shells[1].shell, 1);
        assert!(report.shells[0].defect.is_below(Dyadic::pow2_neg(2)));
        assert!(!trace_violations(&orbit, 3).unwrap().is_empty());
    }

    #[test]
    fn depth_must_cover_resolution() {
        let g1 = Signature::group(1);
        let zero = Configuration::constant(g1, 0);
        let orbit = PseudoOrbit::on_ball(g1, 1, vec![zero; 3], TailRule::None).unwrap();
        assert!(matches!(
            validate_pseudo_orbit(&orbit, Dyadic::pow2_neg(3), 3),
            Err(Error::ResolutionDepthMismatch { .. })
        ));
    }
}
