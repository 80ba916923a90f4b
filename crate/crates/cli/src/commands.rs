use anyhow::{anyhow, bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use treeshift_core::codec;
use treeshift_core::fixtures::{self, HollowBallFamily, GALLERY};
use treeshift_core::limits::{
    approximate, invariance_check, realize, realize_with_shadowing, stabilization_scan, LimitKind, RealizeMode,
};
use treeshift_core::orbits::{
    asymptotic_defect, no_shadow_certificate, shadow_sft, shadow_sft_asymptotic, validate_pseudo_orbit,
    SftAsymptoticShadowing, SftShadowing, ShadowingOracle,
};
use treeshift_core::patterns::{distance, hausdorff};
use treeshift_core::shifts::{non_sft_obstruction, ShiftSystem};
use treeshift_core::transitivity::{
    edge_graph, is_cict, is_ibt, is_ibt_circ, is_ibt_star, is_ict, TreeDecision, Verdict,
};
use treeshift_core::words::{EventuallyPeriodicWord, ReducedWord, Signature};
use treeshift_core::{Configuration, Dyadic, DyadicDistance};

use crate::input::{self, COUNTEREXAMPLE_RADIUS};
use crate::output::{CommandResult, Output};
use crate::render;
use crate::{Cli, Command, Format, OracleChoice, PointArgs, WordOp};

pub fn run(cli: &Cli) -> Result<Output> {
    let sig = cli.global.sig;
    let r = match &cli.command {
        Command::Words { op } => words(sig, op)?,
        Command::Ball { n, count } => {
            let ball = sig.ball(*n)?;
            if *count {
                CommandResult::ok(json!({ "count": ball.len() }))
            } else {
                CommandResult::ok(json!({ "count": ball.len(), "words": &*ball }))
            }
        }
        Command::Block { config, depth } => {
            let x = input::config(config, sig)?;
            let b = x.central_block(*depth)?;
            let sites: Vec<Value> = b.iter()?.map(|(u, s)| json!([u, s])).collect();
            CommandResult::ok(json!({ "block": b, "sites": sites }))
        }
        Command::CheckSft {
            system,
            config,
            block,
            depth,
            hollow,
        } => check_sft(
            sig,
            system.as_deref(),
            config.as_deref(),
            block.as_deref(),
            *depth,
            *hollow,
        )?,
        Command::Enumerate { system, depth, count } => {
            let sys = input::system(system)?;
            if *count {
                CommandResult::ok(json!({ "count": sys.count_points(*depth)? }))
            } else {
                let blocks = sys.enumerate_points(*depth)?;
                CommandResult::ok(json!({ "count": blocks.len(), "blocks": blocks }))
            }
        }
        Command::ValidateOrbit { orbit, delta, depth } => {
            let orbit = input::orbit(orbit, sig)?;
            let delta: Dyadic = delta.parse()?;
            let report = validate_pseudo_orbit(&orbit, delta, *depth)?;
            CommandResult::verdict(report.passes, serde_json::to_value(&report)?)
        }
        Command::Shadow {
            orbit,
            system,
            resolution,
        } => shadow(sig, orbit, system, resolution)?,
        Command::ShadowAsymptotic { orbit, system, depth } => {
            let orbit = input::orbit(orbit, sig)?;
            let sys = input::system(system)?;
            let out = shadow_sft_asymptotic(&orbit, &sys, *depth)?;
            CommandResult::verdict(
                out.admissible,
                json!({
                    "point": out.point,
                    "uniform_hypothesis": out.uniform_hypothesis,
                    "admissible": out.admissible,
                    "admissible_depth": out.admissible_depth,
                    "shells": out.shells,
                    "guarantees": out.guarantees,
                }),
            )
        }
        Command::Edges { args, dot } => {
            let (_, points) = input::points(&args.points, sig)?;
            let g = edge_graph(&points, args.epsilon.parse()?, args.depth)?;
            if *dot {
                return Ok(Output::Text(render::edges_dot(&g)));
            }
            let edges: Vec<Value> = g.graph.edges().map(|(p, l, q)| json!([p, l, q])).collect();
            CommandResult::ok(json!({
                "points": points.len(),
                "epsilon": g.eps,
                "depth": g.depth,
                "edges": edges,
            }))
        }
        Command::Ict { args } => {
            let (points, eps) = decider_input(sig, args)?;
            let r = is_ict(&points, eps, args.depth)?;
            CommandResult::verdict(r.verdict != Verdict::Refuted, serde_json::to_value(&r)?)
        }
        Command::Cict { args } => {
            let (points, eps) = decider_input(sig, args)?;
            let r = is_cict(&points, eps, args.depth)?;
            CommandResult::verdict(r.verdict != Verdict::Refuted, serde_json::to_value(&r)?)
        }
        Command::Ibt { args, radius } => {
            let (points, eps) = decider_input(sig, args)?;
            tree_result(is_ibt(&points, eps, args.depth, *radius)?)?
        }
        Command::IbtStar { args, radius } => {
            let (points, eps) = decider_input(sig, args)?;
            tree_result(is_ibt_star(&points, eps, args.depth, *radius)?)?
        }
        Command::IbtCirc { args, radius } => {
            let (points, eps) = decider_input(sig, args)?;
            tree_result(is_ibt_circ(&points, eps, args.depth, *radius)?)?
        }
        Command::Limit {
            kind,
            config,
            word,
            inner,
            outer,
            depth,
            scan,
            invariance,
        } => limit(
            sig,
            kind,
            config,
            word.as_deref(),
            *inner,
            *outer,
            *depth,
            *scan,
            *invariance,
        )?,
        Command::Hausdorff { a, b, depth } => {
            let (_, a) = input::points(a, sig)?;
            let (_, b) = input::points(b, sig)?;
            CommandResult::ok(json!({ "distance": hausdorff(&a, &b, *depth)? }))
        }
        Command::Realize {
            mode,
            points,
            system,
            resolution,
            construction,
            oracle,
            chain_scale,
            radius,
        } => {
            let (_, points) = input::points(points, sig)?;
            let k = input::exponent(resolution)?;
            let sys = match system {
                Some(s) => Some(input::system(s)?),
                None => None,
            };
            realize_command(
                &points,
                sys.as_ref(),
                mode,
                construction,
                *oracle,
                k,
                *chain_scale,
                *radius,
            )?
        }
        Command::Example {
            name,
            direction,
            verify,
        } => example(cli.global.seed, name, direction.as_deref(), *verify)?,
        Command::Render {
            config,
            points,
            depth,
            epsilon,
            format,
        } => {
            let text = match (config, points) {
                (Some(c), _) => {
                    let b = input::config(c, sig)?.central_block(*depth)?;
                    match format {
                        Format::Ascii => render::block_ascii(&b)?,
                        Format::Dot => render::block_dot(&b)?,
                    }
                }
                (None, Some(p)) => {
                    let (_, points) = input::points(p, sig)?;
                    let eps = epsilon
                        .as_deref()
                        .ok_or_else(|| anyhow!("rendering an edge graph needs --epsilon"))?;
                    let g = edge_graph(&points, eps.parse()?, *depth)?;
                    match format {
                        Format::Ascii => render::edges_ascii(&g),
                        Format::Dot => render::edges_dot(&g),
                    }
                }
                (None, None) => bail!("render needs --config or --points"),
            };
            return Ok(Output::Text(text));
        }
    };
    Ok(Output::Result(r))
}

fn words(sig: Signature, op: &WordOp) -> Result<CommandResult> {
    let show = |w: &ReducedWord| json!({ "word": w, "length": w.len() });
    Ok(match op {
        WordOp::Reduce { letters } => CommandResult::ok(show(&sig.reduce_str(letters)?)),
        WordOp::Concat { u, v } => {
            let (u, v) = (sig.parse_word(u)?, sig.parse_word(v)?);
            CommandResult::ok(show(&sig.concat(&u, &v)?))
        }
        WordOp::Invert { u } => CommandResult::ok(show(&sig.invert(&sig.parse_word(u)?)?)),
        WordOp::IsPrefix { u, v } => {
            let (u, v) = (sig.parse_word(u)?, sig.parse_word(v)?);
            CommandResult::ok(json!({ "prefix": u.is_prefix_of(&v) }))
        }
        WordOp::Prefix { word, k } => {
            let w: EventuallyPeriodicWord = word.parse()?;
            w.check(&sig)?;
            CommandResult::ok(show(&w.prefix(*k)))
        }
    })
}

fn check_sft(
    sig: Signature,
    system: Option<&str>,
    config: Option<&str>,
    block: Option<&str>,
    depth: usize,
    hollow: Option<usize>,
) -> Result<CommandResult> {
    if let Some(n) = hollow {
        let fam = HollowBallFamily { sig };
        let found = non_sft_obstruction(&fam, n, depth.max(n + 1))?;
        return Ok(match found {
            Some(ob) => CommandResult::ok(json!({
                "obstruction": ob.block,
                "checks": ob.checks,
            })),
            None => CommandResult::verdict(false, json!({ "obstruction": null })),
        });
    }
    let sys = input::system(system.ok_or_else(|| anyhow!("check-sft needs --system"))?)?;
    let b = match (config, block) {
        (Some(c), _) => input::config(c, sys.signature())?.central_block(depth)?,
        (None, Some(b)) => codec::block_from_json(sys.signature(), &serde_json::from_str(b)?)?,
        (None, None) => bail!("check-sft needs --config or --block"),
    };
    let occurrences = sys.occurrences(&b)?;
    Ok(CommandResult::verdict(
        occurrences.is_empty(),
        json!({ "admissible": occurrences.is_empty(), "depth": b.depth(), "occurrences": occurrences }),
    ))
}

fn shadow(sig: Signature, orbit: &str, system: &str, resolution: &str) -> Result<CommandResult> {
    let orbit = input::orbit(orbit, sig)?;
    let sys = input::system(system)?;
    let k = input::exponent(resolution)?;
    let x = shadow_sft(&orbit, &sys, k)?;
    // Worst tracking error over the assigned ball.
    let mut worst = DyadicDistance::AtMost(Dyadic::pow2_neg(k + 1));
    for u in orbit.signature().ball(orbit.radius() + 1)?.iter() {
        let target = orbit
            .at(u)
            .ok_or_else(|| anyhow!("orbit has no value at {}", u.human()))?;
        worst = worst.max(distance(&x.shift(u), &target, k as usize + 1)?);
    }
    let eps = Dyadic::pow2_neg(k);
    Ok(CommandResult::verdict(
        worst.is_below(eps),
        json!({ "point": x, "resolution": eps, "tracking": worst }),
    ))
}

fn decider_input(sig: Signature, args: &PointArgs) -> Result<(Vec<Configuration>, Dyadic)> {
    let (_, points) = input::points(&args.points, sig)?;
    Ok((points, args.epsilon.parse()?))
}

fn tree_result(d: TreeDecision) -> Result<CommandResult> {
    let mut payload = serde_json::to_value(&d.report)?;
    if let Some(w) = &d.witness {
        payload["orbit"] = codec::orbit_to_json(&w.orbit);
    }
    Ok(CommandResult::verdict(d.report.verdict != Verdict::Refuted, payload))
}

#[allow(clippy::too_many_arguments)]
fn limit(
    sig: Signature,
    kind: &str,
    config: &str,
    word: Option<&str>,
    inner: usize,
    outer: usize,
    depth: usize,
    scan: bool,
    invariance: Option<usize>,
) -> Result<CommandResult> {
    let kind: LimitKind = kind.parse()?;
    let x = input::config(config, sig)?;
    let sig = x.signature();
    let word = match word {
        Some(w) if w.contains('(') => {
            let p: EventuallyPeriodicWord = w.parse()?;
            p.check(&sig)?;
            Some(p.prefix(outer.max(inner)))
        }
        Some(w) => Some(sig.parse_word(w)?),
        None => None,
    };
    let approx = approximate(kind, &x, word.as_ref(), inner, outer, depth)?;
    let mut payload = json!({ "approximation": approx });
    let mut passes = true;
    if scan {
        payload["scan"] = serde_json::to_value(stabilization_scan(kind, &x, word.as_ref(), depth, outer)?)?;
    }
    if let Some(d) = invariance {
        let report = invariance_check(&approx, d)?;
        passes = report.passes;
        payload["invariance"] = serde_json::to_value(report)?;
    }
    Ok(CommandResult::verdict(passes, payload))
}

#[allow(clippy::too_many_arguments)]
fn realize_command(
    points: &[Configuration],
    sys: Option<&ShiftSystem>,
    mode: &str,
    construction: &str,
    oracle: OracleChoice,
    k: u32,
    chain_scale: Option<u32>,
    radius: Option<usize>,
) -> Result<CommandResult> {
    let r = if mode == "shadowed" {
        let sys = sys.ok_or_else(|| anyhow!("shadowed realization needs --system for its oracle"))?;
        let sft = SftShadowing { system: sys };
        let asymptotic = SftAsymptoticShadowing { system: sys };
        let oracle: Option<&dyn ShadowingOracle> = match oracle {
            OracleChoice::Sft => Some(&sft),
            OracleChoice::SftAsymptotic => Some(&asymptotic),
            OracleChoice::None => None,
        };
        realize_with_shadowing(points, oracle, construction.parse()?, k, chain_scale)?
    } else {
        let sys = sys.ok_or_else(|| anyhow!("realize needs --system"))?;
        let mode: RealizeMode = mode.parse()?;
        realize(points, sys, mode, k, radius)?
    };
    let mut payload = serde_json::to_value(&r)?;
    let log = payload
        .as_object_mut()
        .and_then(|m| m.remove("log"))
        .unwrap_or(Value::Null);
    Ok(CommandResult::ok(payload).with_log(log))
}

fn example(seed: u64, name: &str, direction: Option<&str>, verify: bool) -> Result<CommandResult> {
    let variant = direction.map(|d| format!(":{d}")).unwrap_or_default();
    let eps3 = Dyadic::pow2_neg(3);
    match name {
        "list" => Ok(CommandResult::ok(
            json!({ "examples": GALLERY, "random": ["random-monoid"] }),
        )),
        "two-point-no-shadow" => {
            let sys = input::system("example:two-point-no-shadow")?;
            let orbit = input::orbit("example:two-point-no-shadow", sys.signature())?;
            let mut payload = json!({
                "system": codec::system_to_json(&sys),
                "orbit": codec::orbit_to_json(&orbit),
            });
            if !verify {
                return Ok(CommandResult::ok(payload));
            }
            let sig = sys.signature();
            let candidates = [Configuration::constant(sig, 0), Configuration::constant(sig, 1)];
            let shells = asymptotic_defect(&orbit, 3)?;
            let readout = shadow_sft_asymptotic(&orbit, &sys, 4)?;
            let cert = no_shadow_certificate(&sys, &orbit, &candidates, 3, COUNTEREXAMPLE_RADIUS)?;
            payload["shells"] = serde_json::to_value(shells)?;
            payload["uniform_hypothesis"] = json!(readout.uniform_hypothesis);
            payload["readout_admissible"] = json!(readout.admissible);
            payload["certificate"] = serde_json::to_value(&cert)?;
            Ok(CommandResult::verdict(cert.valid && !readout.admissible, payload))
        }
        "ict-not-cict" => {
            let (_, points) = input::points(&format!("example:ict-not-cict{variant}"), Signature::group(2))?;
            let mut payload = json!({
                "direction": direction.unwrap_or("literal"),
                "points": points,
            });
            if !verify {
                return Ok(CommandResult::ok(payload));
            }
            let ict = is_ict(&points, eps3, 5)?;
            let cict = is_cict(&points, eps3, 5)?;
            let expected = cict.verdict == Verdict::Refuted
                && (direction != Some("corrected") || ict.verdict == Verdict::Witnessed);
            payload["ict"] = serde_json::to_value(&ict)?;
            payload["cict"] = serde_json::to_value(&cict)?;
            Ok(CommandResult::verdict(expected, payload))
        }
        "golden-mean-monoid" => {
            let sys = input::system("example:golden-mean-monoid")?;
            let (sig, points) = input::points("example:golden-mean-monoid", Signature::monoid(2))?;
            let mut payload = json!({
                "system": codec::system_to_json(&sys),
                "points": codec::points_to_json(sig, &points),
            });
            if !verify {
                return Ok(CommandResult::ok(payload));
            }
            let cict = realize(&points, &sys, RealizeMode::Cict, 3, None)?;
            let circ = realize(&points, &sys, RealizeMode::IbtCirc, 3, None)?;
            payload["cict_hausdorff"] = json!(cict.log.hausdorff);
            payload["circ_hausdorff"] = json!(circ.log.hausdorff);
            Ok(CommandResult::ok(payload))
        }
        "full-shift-2" => {
            let sys = input::system("example:full-shift-2")?;
            let (sig, points) = input::points("example:full-shift-2", Signature::group(2))?;
            let mut payload = json!({
                "system": codec::system_to_json(&sys),
                "points": codec::points_to_json(sig, &points),
            });
            if !verify {
                return Ok(CommandResult::ok(payload));
            }
            let count = sys.count_points(2)?;
            let r = realize(&points, &sys, RealizeMode::Cict, 2, None)?;
            payload["count_depth_2"] = json!(count);
            payload["hausdorff"] = json!(r.log.hausdorff);
            Ok(CommandResult::verdict(count == 32, payload))
        }
        "random-monoid" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = fixtures::random_monoid_points(&mut rng, 2, 3);
            let sig = Signature::monoid(2);
            let mut payload = json!({ "seed": seed, "points": codec::points_to_json(sig, &points) });
            if !verify {
                return Ok(CommandResult::ok(payload));
            }
            let eps = Dyadic::pow2_neg(2);
            let ict = is_ict(&points, eps, 3)?.verdict;
            let cict = is_cict(&points, eps, 3)?.verdict;
            payload["ict"] = json!(ict);
            payload["cict"] = json!(cict);
            Ok(CommandResult::verdict(ict == cict, payload))
        }
        other => bail!("unknown example {other:?}; try `example list`"),
    }
}
