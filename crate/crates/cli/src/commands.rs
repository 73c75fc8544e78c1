use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use secluded::bounds::{
    construction_params, lower_bound_k_diameter, lower_bound_k_measure, nfl_lower, table, tolerance_upper, TableRow,
};
use secluded::depth::{depth_decomposition, multiplicity_identity_check, pigeonhole_witness};
use secluded::neighborhood::{AuditResult, WitnessReport, DEFAULT_EXACT_LIMIT};
use secluded::rounding::{adversarial_transversal, replicate_collapse, uniform_choice_oracle, OutputSetReport};
use secluded::sperner::{find_rich_point, validate_no_opposite_faces};
use secluded::{
    audit_seclusion, build_profile, lower_bound_witness, AuditOptions, BallKind, BoxFamily, Error, GridColoring,
    MemberId, NormKind, PartitionSpec, Point, Representative, RoundingScheme, Scalar, Strategy,
};

use crate::report::{emit, emit_bytes, Report};
use crate::{Command, Format, GlobalOpts, Verdict};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Rep {
    Center,
    Corner,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Ball {
    Closed,
    Open,
}

impl From<Ball> for BallKind {
    fn from(b: Ball) -> Self {
        match b {
            Ball::Closed => BallKind::Closed,
            Ball::Open => BallKind::Open,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum StrategyArg {
    Exact,
    Randomized,
}

#[derive(Args, Debug)]
pub struct RoundArgs {
    /// Dimension; defaults to the dimension of --x.
    #[arg(long)]
    pub d: Option<usize>,
    /// Accuracy ε₀ of the approximation being rounded.
    #[arg(long)]
    pub eps0: String,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Partition spec (JSON text or a file); default is the staggered layered partition.
    #[arg(long)]
    pub spec: Option<String>,
    /// Scale applied to the partition; default 2dε₀ without --spec and 1 with it.
    #[arg(long)]
    pub scale: Option<String>,
    #[arg(long, value_enum, default_value_t = Rep::Center)]
    pub representative: Rep,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Partition spec (JSON text or a file).
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub epsilon: String,
    #[arg(long, value_enum, default_value_t = Ball::Closed)]
    pub ball: Ball,
    #[arg(long, value_enum, default_value_t = StrategyArg::Exact)]
    pub strategy: StrategyArg,
    /// Random starts for the randomized strategy.
    #[arg(long, default_value_t = 64)]
    pub starts: u64,
    /// Cap on the candidate points the exact strategy may span.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Claimed degree; exit 1 if some ball meets more members.
    #[arg(long)]
    pub claim_k: Option<BigUint>,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub epsilon: String,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long)]
    pub d: usize,
    /// Block dimension; defaults to d (a single layered block).
    #[arg(long)]
    pub block: Option<usize>,
    /// Audit the construction at its claimed tolerance.
    #[arg(long)]
    pub verify: bool,
    /// Print only the partition spec JSON.
    #[arg(long, conflicts_with = "verify")]
    pub spec_only: bool,
}

#[derive(Args, Debug)]
pub struct DepthArgs {
    /// Box family (JSON text or a file).
    #[arg(long)]
    pub family: String,
}

#[derive(Args, Debug)]
pub struct SpernerArgs {
    /// Grid coloring (JSON text or a file).
    #[arg(long, required_unless_present = "orthants", conflicts_with = "orthants")]
    pub coloring: Option<String>,
    /// Use the orthant coloring of this dimension.
    #[arg(long)]
    pub orthants: Option<usize>,
    #[arg(long)]
    pub epsilon: String,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub which: BoundsCommand,
}

#[derive(Subcommand, Debug)]
pub enum BoundsCommand {
    /// Degree lower bounds per norm, one row per dimension and norm.
    Table {
        /// Dimensions: `a..b` (inclusive), a comma list, or one value.
        #[arg(long, default_value = "1..20")]
        d: String,
        #[arg(long)]
        eps: String,
        /// Upper bound on the measure of each member.
        #[arg(long, default_value = "1")]
        measure: String,
        #[arg(long, default_value = "linf,l1,l2")]
        norms: String,
        #[arg(long, default_value_t = 30)]
        digits: u32,
    },
    /// Degree lower bound from a measure or diameter bound on the members.
    K {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: String,
        #[arg(long, conflicts_with = "diameter")]
        measure: Option<String>,
        #[arg(long)]
        diameter: Option<String>,
        #[arg(long, default_value = "linf")]
        norm: String,
    },
    /// Upper bound ln(k)/d on the tolerance of a degree-k partition.
    Tolerance {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: BigUint,
    },
    /// Degree and tolerance of the glued construction.
    Construction {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        block: usize,
    },
    /// Smallest tolerance a k-pseudodeterministic scheme on an ε₀-accurate oracle can have.
    Nfl {
        #[arg(long)]
        eps0: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: BigUint,
    },
}

#[derive(Args, Debug)]
pub struct NflArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub eps0: String,
    #[arg(long, default_value = "1/2")]
    pub delta: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Scale of the staggered layered partition; default 2dε₀.
    #[arg(long)]
    pub scale: Option<String>,
}

pub fn execute(g: &GlobalOpts, cmd: &Command) -> Result<Verdict> {
    match cmd {
        Command::Round(a) => round(g, a),
        Command::OutputSet(a) => output_set(g, a),
        Command::Audit(a) => audit(g, a),
        Command::Witness(a) => witness(g, a),
        Command::Construct(a) => construct(g, a),
        Command::Depth(a) => depth(g, a),
        Command::Sperner(a) => sperner(g, a),
        Command::Bounds(a) => bounds(g, &a.which),
        Command::NflDemo(a) => nfl_demo(g, a),
    }
}

fn scalar(g: &GlobalOpts, text: &str) -> Result<Scalar> {
    let v = if g.allow_inexact {
        Scalar::parse_allow_inexact(text)
    } else {
        text.parse()
    };
    Ok(v?)
}

fn point(g: &GlobalOpts, text: &str) -> Result<Point> {
    let t = text.trim();
    let body = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
    let coords = body.split(',').map(|c| scalar(g, c)).collect::<Result<Vec<_>>>()?;
    Ok(Point::new(coords)?)
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn json_arg(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn load_spec(arg: &str) -> Result<PartitionSpec> {
    Ok(PartitionSpec::from_json(&json_arg(arg)?)?)
}

fn spec_value(spec: &PartitionSpec) -> Value {
    serde_json::to_value(spec).expect("specs serialize")
}

fn corners(spec: &PartitionSpec, ids: &[MemberId]) -> Result<Vec<Point>> {
    Ok(ids
        .iter()
        .map(|id| spec.corner_of(id))
        .collect::<secluded::Result<_>>()?)
}

fn parse_dims(text: &str) -> Result<Vec<usize>> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let a: usize = a.trim().parse().context("dimension range start")?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .context("dimension range end")?;
        if a == 0 || a > b {
            bail!("dimension range `{t}` must satisfy 1 ≤ a ≤ b");
        }
        return Ok((a..=b).collect());
    }
    t.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("dimension `{s}`")))
        .collect()
}

/// Report a guaranteed statement that failed, then signal exit code 1.
fn violation(g: &GlobalOpts, command: &str, params: Value, seed: Option<u64>, e: &Error) -> Result<Verdict> {
    emit(
        g,
        &Report::new(command, params, seed, json!({ "violation": e.to_string() })),
    )?;
    Ok(Verdict::Violated)
}

struct SchemeChoice {
    scheme: RoundingScheme,
    universal: bool,
}

fn scheme_for(g: &GlobalOpts, a: &RoundArgs, eps0: &Scalar, x: &Point) -> Result<SchemeChoice> {
    let d = a.d.unwrap_or(x.dim());
    x.check_dim(d)?;
    let rep = match a.representative {
        Rep::Center => Representative::Center,
        Rep::Corner => Representative::Corner,
    };
    let (spec, default_scale) = match &a.spec {
        Some(s) => (load_spec(s)?, Scalar::one()),
        None => (PartitionSpec::layered_staggered(d)?, Scalar::from(2 * d as i64) * eps0),
    };
    let scale = match &a.scale {
        Some(s) => scalar(g, s)?,
        None => default_scale,
    };
    let universal = a.spec.is_none() && a.scale.is_none() && matches!(a.representative, Rep::Center);
    Ok(SchemeChoice {
        scheme: RoundingScheme::new(spec, scale, rep)?,
        universal,
    })
}

fn round_params(a: &RoundArgs, choice: &SchemeChoice, eps0: &Scalar, x: &Point) -> Value {
    json!({
        "eps0": eps0,
        "x": x,
        "spec": spec_value(&choice.scheme.spec),
        "scale": choice.scheme.scale,
        "representative": choice.scheme.representative,
        "universal": choice.universal,
        "d": a.d.unwrap_or(x.dim()),
    })
}

fn round(g: &GlobalOpts, a: &RoundArgs) -> Result<Verdict> {
    let eps0 = scalar(g, &a.eps0)?;
    let x = point(g, &a.x)?;
    let choice = scheme_for(g, a, &eps0, &x)?;
    let s = &choice.scheme;
    let member = s.member_of(&x)?;
    let rounded = s.representative_of(&member)?;
    let result = json!({
        "rounded": rounded,
        "member": member,
        "distance": rounded.dist_inf(&x)?,
        "accuracy_bound": s.accuracy(&eps0),
    });
    emit(
        g,
        &Report::new("round", round_params(a, &choice, &eps0, &x), None, result),
    )?;
    Ok(Verdict::Holds)
}

fn output_set(g: &GlobalOpts, a: &RoundArgs) -> Result<Verdict> {
    let eps0 = scalar(g, &a.eps0)?;
    let x = point(g, &a.x)?;
    let choice = scheme_for(g, a, &eps0, &x)?;
    let report: OutputSetReport = choice.scheme.output_set(&x, &eps0)?;
    let d = x.dim();
    // only the universal scheme carries a claim: at most d + 1 outputs
    let holds = !choice.universal || report.k_observed <= d + 1;
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        report: OutputSetReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        claimed_max: Option<usize>,
    }
    let out = Out {
        report,
        claimed_max: choice.universal.then_some(d + 1),
    };
    emit(
        g,
        &Report::new("output-set", round_params(a, &choice, &eps0, &x), None, out),
    )?;
    Ok(if holds { Verdict::Holds } else { Verdict::Violated })
}

fn audit(g: &GlobalOpts, a: &AuditArgs) -> Result<Verdict> {
    let spec = load_spec(&a.spec)?;
    let eps = scalar(g, &a.epsilon)?;
    let ball = BallKind::from(a.ball);
    let (opts, seed) = match a.strategy {
        StrategyArg::Exact => (
            AuditOptions {
                budget: a.budget.unwrap_or(DEFAULT_EXACT_LIMIT),
                ..AuditOptions::exact(ball)
            },
            None,
        ),
        StrategyArg::Randomized => (AuditOptions::randomized(ball, a.starts, g.seed), Some(g.seed)),
    };
    let params = json!({
        "spec": spec_value(&spec),
        "epsilon": eps,
        "ball": ball,
        "strategy": opts.strategy,
        "budget": opts.budget,
        "claim_k": a.claim_k.as_ref().map(|k| k.to_string()),
    });
    let result: AuditResult = match audit_seclusion(&spec, &eps, &opts) {
        Ok(r) => r,
        Err(e @ Error::TheoremViolation(_)) => return violation(g, "audit", params, seed, &e),
        Err(e) => return Err(e.into()),
    };
    let holds = a.claim_k.as_ref().is_none_or(|k| BigUint::from(result.max_count) <= *k);
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        audit: AuditResult,
        witness_corners: Vec<Point>,
        #[serde(skip_serializing_if = "Option::is_none")]
        claim_holds: Option<bool>,
    }
    let out = Out {
        witness_corners: corners(&spec, &result.witness_members)?,
        audit: result,
        claim_holds: a.claim_k.as_ref().map(|_| holds),
    };
    debug_assert!(out.audit.strategy == Strategy::Exact || seed.is_some());
    emit(g, &Report::new("audit", params, seed, out))?;
    Ok(if holds { Verdict::Holds } else { Verdict::Violated })
}

fn witness(g: &GlobalOpts, a: &WitnessArgs) -> Result<Verdict> {
    let spec = load_spec(&a.spec)?;
    let eps = scalar(g, &a.epsilon)?;
    let params = json!({ "spec": spec_value(&spec), "epsilon": eps });
    let w: WitnessReport = match lower_bound_witness(&spec, &eps) {
        Ok(w) => w,
        Err(e @ Error::TheoremViolation(_)) => return violation(g, "witness", params, None, &e),
        Err(e) => return Err(e.into()),
    };
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        witness: WitnessReport,
        corners: Vec<Point>,
    }
    let out = Out {
        corners: corners(&spec, &w.members)?,
        witness: w,
    };
    emit(g, &Report::new("witness", params, None, out))?;
    Ok(Verdict::Holds)
}

fn construct(g: &GlobalOpts, a: &ConstructArgs) -> Result<Verdict> {
    let block = a.block.unwrap_or(a.d);
    if block == 0 || block > a.d {
        bail!("block dimension must lie in 1..={}", a.d);
    }
    let (spec, claim) = build_profile(|_| block, a.d)?;
    if a.spec_only {
        let mut text = spec.to_json();
        text.push('\n');
        emit_bytes(g, text.as_bytes())?;
        return Ok(Verdict::Holds);
    }
    let params = json!({ "d": a.d, "block": block, "verify": a.verify });
    let mut result = json!({ "spec": spec_value(&spec), "claim": claim });
    let mut verdict = Verdict::Holds;
    if a.verify {
        let r = audit_seclusion(&spec, &claim.epsilon, &AuditOptions::exact(BallKind::Closed))?;
        let holds = BigUint::from(r.max_count) <= claim.k;
        if !holds {
            verdict = Verdict::Violated;
        }
        result["audit"] = json!({
            "max_count": r.max_count,
            "witness": r.witness,
            "candidates_examined": r.candidates_examined,
            "claim_holds": holds,
        });
    }
    emit(g, &Report::new("construct", params, None, result))?;
    Ok(verdict)
}

fn depth(g: &GlobalOpts, a: &DepthArgs) -> Result<Verdict> {
    let fam = BoxFamily::from_json(&json_arg(&a.family)?)?;
    let params = json!({ "family": fam });
    let cells = depth_decomposition(&fam)?;
    let check = multiplicity_identity_check(&fam)?;
    let w = match pigeonhole_witness(&fam) {
        Ok(w) => w,
        Err(e @ Error::TheoremViolation(_)) => return violation(g, "depth", params, None, &e),
        Err(e) => return Err(e.into()),
    };
    let result = json!({
        "cells": cells,
        "max_depth": w.depth,
        "witness": w.point,
        "guarantee": w.guarantee.to_string(),
        "sum_volumes": check.sum_of_volumes,
        "integral": check.depth_integral,
        "identity_holds": check.equal,
    });
    emit(g, &Report::new("depth", params, None, result))?;
    Ok(if check.equal { Verdict::Holds } else { Verdict::Violated })
}

fn sperner(g: &GlobalOpts, a: &SpernerArgs) -> Result<Verdict> {
    let coloring = match (&a.coloring, a.orthants) {
        (Some(c), None) => GridColoring::from_json(&json_arg(c)?)?,
        (None, Some(d)) => GridColoring::orthants(d)?,
        _ => bail!("give exactly one of --coloring and --orthants"),
    };
    let eps = scalar(g, &a.epsilon)?;
    let faces = validate_no_opposite_faces(&coloring);
    if let Some(v) = faces.violations.first() {
        return Err(anyhow!(Error::OppositeFaces {
            color: v.color,
            axis: v.axis
        }))
        .context(format!(
            "coloring is not admissible ({} violations)",
            faces.violations.len()
        ));
    }
    let params = json!({ "coloring": coloring, "epsilon": eps });
    match find_rich_point(&coloring, &eps) {
        Ok(r) => {
            emit(g, &Report::new("sperner", params, None, r))?;
            Ok(Verdict::Holds)
        }
        Err(e @ Error::TheoremViolation(_)) => violation(g, "sperner", params, None, &e),
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct CsvRow {
    d: usize,
    norm: &'static str,
    epsilon: String,
    measure: String,
    value: String,
    exact_value: String,
    k: String,
    approx: String,
}

impl From<&TableRow> for CsvRow {
    fn from(r: &TableRow) -> Self {
        CsvRow {
            d: r.d,
            norm: r.norm.name(),
            epsilon: r.epsilon.to_string(),
            measure: r.measure.to_string(),
            value: r.value.clone(),
            exact_value: r.exact_value.as_ref().map(Scalar::to_string).unwrap_or_default(),
            k: r.k.to_string(),
            approx: r.approx.map(|x| format!("{x:.6}")).unwrap_or_default(),
        }
    }
}

fn bounds(g: &GlobalOpts, which: &BoundsCommand) -> Result<Verdict> {
    match which {
        BoundsCommand::Table {
            d,
            eps,
            measure,
            norms,
            digits,
        } => {
            let dims = parse_dims(d)?;
            let eps = scalar(g, eps)?;
            let m = scalar(g, measure)?;
            let norms = norms
                .split(',')
                .map(|n| n.trim().parse::<NormKind>())
                .collect::<secluded::Result<Vec<_>>>()?;
            if *digits == 0 {
                bail!("--digits must be at least 1");
            }
            let rows = table(dims.iter().copied(), &eps, &m, &norms, *digits)?;
            match g.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for r in &rows {
                        w.serialize(CsvRow::from(r))?;
                    }
                    let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
                    emit_bytes(g, &bytes)?;
                }
                Format::Json => {
                    let params = json!({
                        "d": dims,
                        "eps": eps,
                        "measure": m,
                        "norms": norms,
                        "digits": digits,
                    });
                    emit(g, &Report::new("bounds table", params, None, rows))?;
                }
            }
        }
        BoundsCommand::K {
            d,
            eps,
            measure,
            diameter,
            norm,
        } => {
            let eps = scalar(g, eps)?;
            let norm: NormKind = norm.parse()?;
            let (k, params) = match (measure, diameter) {
                (_, Some(dia)) => {
                    if norm != NormKind::LInf {
                        bail!("--diameter bounds are for the linf norm only");
                    }
                    let dia = scalar(g, dia)?;
                    let k = lower_bound_k_diameter(*d, &eps, &dia)?;
                    (k, json!({ "d": d, "eps": eps, "diameter": dia }))
                }
                (m, None) => {
                    let m = match m {
                        Some(m) => scalar(g, m)?,
                        None => Scalar::one(),
                    };
                    let k = lower_bound_k_measure(*d, &eps, &m, norm)?;
                    (k, json!({ "d": d, "eps": eps, "measure": m, "norm": norm }))
                }
            };
            emit(g, &Report::new("bounds k", params, None, json!({ "k": k.to_string() })))?;
        }
        BoundsCommand::Tolerance { d, k } => {
            let t = tolerance_upper(*d, k)?;
            let params = json!({ "d": d, "k": k.to_string() });
            emit(
                g,
                &Report::new("bounds tolerance", params, None, json!({ "epsilon_upper": t })),
            )?;
        }
        BoundsCommand::Construction { d, block } => {
            let claim = construction_params(|_| *block, *d)?;
            let params = json!({ "d": d, "block": block });
            emit(g, &Report::new("bounds construction", params, None, claim))?;
        }
        BoundsCommand::Nfl { eps0, d, k } => {
            let eps0 = scalar(g, eps0)?;
            let v = nfl_lower(&eps0, *d, k)?;
            let params = json!({ "eps0": eps0, "d": d, "k": k.to_string() });
            emit(
                g,
                &Report::new("bounds nfl", params, None, json!({ "epsilon_lower": v })),
            )?;
        }
    }
    Ok(Verdict::Holds)
}

fn nfl_demo(g: &GlobalOpts, a: &NflArgs) -> Result<Verdict> {
    let eps0 = scalar(g, &a.eps0)?;
    let delta = scalar(g, &a.delta)?;
    if delta.is_negative() || delta >= Scalar::one() {
        bail!("--delta must lie in [0, 1)");
    }
    if a.trials == 0 {
        bail!("--trials must be positive");
    }
    let d = a.d;
    let scale = match &a.scale {
        Some(s) => scalar(g, s)?,
        None => Scalar::from(2 * d as i64) * &eps0,
    };
    let scheme = RoundingScheme::new(PartitionSpec::layered_staggered(d)?, scale, Representative::Center)?;
    let params = json!({
        "d": d,
        "eps0": eps0,
        "delta": delta,
        "trials": a.trials,
        "spec": spec_value(&scheme.spec),
        "scale": scheme.scale,
    });
    let t = match adversarial_transversal(&scheme, &eps0) {
        Ok(t) => t,
        Err(e @ Error::TheoremViolation(_)) => return violation(g, "nfl-demo", params, Some(g.seed), &e),
        Err(e) => return Err(e.into()),
    };
    let stats = replicate_collapse(
        &scheme,
        uniform_choice_oracle(t.points.clone()),
        &t.center,
        a.trials,
        g.seed,
    )?;
    let observed = stats.k_for_mass(&delta);
    let size = t.points.len();
    let k_lower = ((Scalar::one() - &delta) * Scalar::from(size as i64)).ceil();
    let degree = scheme.degree(&eps0)?;
    let result = json!({
        "transversal_size": size,
        "transversal_bound": t.bound.to_string(),
        "transversal": t,
        "k_lower_bound": k_lower.to_string(),
        "observed_collapse": observed,
        "distinct_outputs": stats.distinct,
        "histogram": stats.histogram,
        "max_oracle_error": stats.max_oracle_error,
        "scheme_degree": degree,
        "scheme_accuracy": scheme.accuracy(&eps0),
        "nfl_lower": nfl_lower(&eps0, d, &BigUint::from(degree))?,
    });
    emit(g, &Report::new("nfl-demo", params, Some(g.seed), result))?;
    Ok(Verdict::Holds)
}
