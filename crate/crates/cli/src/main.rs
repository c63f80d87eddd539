use std::path::PathBuf;
use std::process::ExitCode;

use abext::arith::parse_scientific;
use abext::asymptotics::{
    disc_prob_s1, empirical_disc_prob, leading_constant, pole_order, ProductMode, SplitVerdict, TailBound,
    WildPlaceTreatment,
};
use abext::counting::counting_by_name;
use abext::enumerate::{enumerate, fast_count, EnumerationQuery};
use abext::group::FiniteAbelianGroup;
use abext::specfile::{parse_event_file, parse_spec_file};
use abext::stats::{
    chebotarev_report, empirical_conditional, independence_report, ratio_report, theory_ratio, Event,
};
use abext::viability::{viability_exact, viability_search, viable_specs_at_2, ViabilityStatus};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "abext", version, about = "Counting abelian extensions of Q by local data")]
struct Cli {
    /// Worker threads (overrides ABEXT_THREADS). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// Invariant factors, e.g. `2,4`.
    #[arg(long, value_delimiter = ',', required = true)]
    group: Vec<u64>,
    /// conductor | radical | discriminant | artin:<json list of dual characters>
    #[arg(long, default_value = "conductor")]
    counting: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Wild {
    Excluded,
    TameShaped,
    ExactLocal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tail {
    Integers,
    Progression,
}

#[derive(Subcommand)]
enum Cmd {
    /// List characters with C < bound.
    Enumerate {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        bound: String,
        /// Pinned local specifications.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Include non-surjective characters.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Count characters with C < bound.
    Count {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        bound: String,
        #[arg(long)]
        all: bool,
    },
    /// Empirical probability of an event, optionally conditioned on another.
    Probs {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        bound: String,
        #[arg(long)]
        event: PathBuf,
        #[arg(long)]
        given: Option<PathBuf>,
    },
    /// Splitting of a fixed prime given that it is unramified.
    Cheb {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        prime: u64,
        #[arg(long, value_delimiter = ',', default_value = "1e5,2e5,4e5")]
        bounds: Vec<String>,
    },
    /// Independence defect of two events at disjoint places.
    Indep {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        spec1: PathBuf,
        #[arg(long)]
        spec2: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1e5,2e5,4e5")]
        bounds: Vec<String>,
    },
    /// Ratio of two event probabilities against the local-weight prediction.
    Ratio {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long)]
        spec1: PathBuf,
        #[arg(long)]
        spec2: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1e5,2e5,4e5")]
        bounds: Vec<String>,
    },
    /// Leading constant of a fair counting function.
    Constant {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, default_value = "1e6")]
        truncation: String,
        /// Plain product without L-value acceleration (uncertified).
        #[arg(long)]
        direct: bool,
    },
    /// Complete splitting of q in Z/p^2-extensions ordered by discriminant.
    Discprob {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value = "1e5")]
        truncation: String,
        #[arg(long, value_enum, default_value = "excluded")]
        wild: Wild,
        #[arg(long, value_enum, default_value = "integers")]
        tail: Tail,
        /// Also measure by brute force up to this discriminant bound.
        #[arg(long)]
        empirical_bound: Option<String>,
    },
    /// Whether local specifications occur in some G-extension.
    Viability {
        #[command(flatten)]
        g: GroupArgs,
        #[arg(long, required_unless_present = "at_2")]
        spec: Option<PathBuf>,
        #[arg(long, default_value = "1e5")]
        search_bound: String,
        /// Also run the exact criterion (needs specs at 2, primes dividing |G|, infinity).
        #[arg(long)]
        exact: bool,
        /// Classify every specification at 2.
        #[arg(long)]
        at_2: bool,
    },
    /// Fairness of a counting function.
    Fairness {
        #[command(flatten)]
        g: GroupArgs,
    },
}

fn bound(s: &str) -> Result<u128> {
    let b = parse_scientific(s).with_context(|| format!("cannot parse bound {s:?}"))?;
    if b == 0 {
        bail!("bounds must be positive");
    }
    Ok(b)
}

fn bounds(v: &[String]) -> Result<Vec<u128>> {
    let b: Vec<u128> = v.iter().map(|s| bound(s)).collect::<Result<_>>()?;
    if b.windows(2).any(|w| w[0] >= w[1]) {
        bail!("bounds must be strictly increasing");
    }
    Ok(b)
}

fn setup(g: &GroupArgs) -> Result<(FiniteAbelianGroup, abext::counting::CountingFunction)> {
    let group = FiniteAbelianGroup::new(g.group.clone())?;
    let c = counting_by_name(&group, &g.counting)?;
    Ok((group, c))
}

fn header(g: &GroupArgs) -> Value {
    json!({ "group": g.group, "counting": g.counting })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

fn trend_word(ok: bool, yes: &str, no: &str) -> String {
    if ok { yes.into() } else { no.into() }
}

/// Runs a command; returns the text to print and whether the verdict was inconclusive.
fn run(cli: Cli) -> Result<(String, bool)> {
    let threads = cli.threads.unwrap_or_else(abext::enumerate::threads_from_env).max(1);
    let json_out = |v: Value| Ok((serde_json::to_string_pretty(&v)? + "\n", false));
    match cli.cmd {
        Cmd::Enumerate { g, bound: b, spec, all, budget, format } => {
            let (group, c) = setup(&g)?;
            let mut q = EnumerationQuery::new(&c, bound(&b)?);
            q.threads = threads;
            q.surjective_only = !all;
            q.budget = budget;
            if let Some(path) = spec {
                q.pins = parse_spec_file(&group, &path)?;
            }
            let chars = enumerate(&q)?;
            match format {
                Format::Tsv => {
                    let mut out = String::from("value\tconductor\tcharacter\n");
                    for e in &chars {
                        out += &format!("{}\t{}\t{}\n", e.value, e.conductor, e.serialized);
                    }
                    Ok((out, false))
                }
                Format::Json => {
                    let items: Vec<Value> = chars
                        .iter()
                        .map(|e| {
                            Ok(json!({
                                "value": e.value.to_string(),
                                "conductor": e.conductor.to_string(),
                                "character": serde_json::from_str::<Value>(&e.serialized)?,
                            }))
                        })
                        .collect::<Result<_>>()?;
                    json_out(merge(header(&g), json!({ "bound": b, "surjectiveOnly": !all, "characters": items })))
                }
            }
        }
        Cmd::Count { g, bound: b, all } => {
            let (_, c) = setup(&g)?;
            let x = bound(&b)?;
            let t = fast_count(&c, x, x, !all)?;
            json_out(merge(header(&g), json!({ "bound": x.to_string(), "surjectiveOnly": !all, "total": t.total })))
        }
        Cmd::Probs { g, bound: b, event, given } => {
            let (group, c) = setup(&g)?;
            let ev = parse_event_file(&group, &event)?;
            let giv = match given {
                Some(p) => parse_event_file(&group, &p)?,
                None => Event::everything(),
            };
            let est = empirical_conditional(&c, bound(&b)?, &ev, &giv, threads)?;
            let fair = c.is_fair();
            let target = if fair {
                let both = ev.and(&giv).unwrap_or_else(|_| ev.clone());
                Some(theory_ratio(&c, &both, &giv))
            } else {
                None
            };
            let rel: Vec<Option<f64>> = est
                .schedule
                .iter()
                .map(|s| target.as_ref().map(|t| (s.estimate.value - t.value) / t.value))
                .collect();
            let errs: Vec<f64> = rel.iter().flatten().map(|x| x.abs()).collect();
            let trend = if errs.len() == 3 { trend_word(errs[2] < errs[0], "improving", "not improving") } else { "no target".into() };
            json_out(merge(
                header(&g),
                json!({ "fair": fair, "advisory": !fair, "empirical": est, "target": target, "relative_error": rel, "trend": trend }),
            ))
        }
        Cmd::Cheb { g, prime, bounds: bs } => {
            let (_, c) = setup(&g)?;
            let r = chebotarev_report(&c, prime, &bounds(&bs)?, threads)?;
            let target: Vec<Value> = r.points[0].rows.iter().map(|x| json!({ "numPrimes": x.num_primes, "target": x.target })).collect();
            let rel: Vec<Vec<f64>> = r
                .points
                .iter()
                .map(|pt| pt.rows.iter().map(|x| if x.target > 0.0 { (x.empirical - x.target) / x.target } else { x.empirical }).collect())
                .collect();
            let total = |v: &Vec<f64>| v.iter().map(|x| x.abs()).sum::<f64>();
            let trend = trend_word(total(rel.last().unwrap()) < total(&rel[0]), "improving", "not improving");
            let exact_target = !abext::viability::s0(c.group()).contains(&prime);
            json_out(merge(
                header(&g),
                json!({ "prime": prime, "fair": c.is_fair(), "exactTarget": exact_target, "empirical": r.points, "target": target, "relative_error": rel, "trend": trend }),
            ))
        }
        Cmd::Indep { g, spec1, spec2, bounds: bs } => {
            let (group, c) = setup(&g)?;
            let a = parse_event_file(&group, &spec1)?;
            let b = parse_event_file(&group, &spec2)?;
            if a.places().iter().any(|p| b.places().contains(p)) {
                bail!("the two events must concern disjoint places");
            }
            let r = independence_report(&c, &bounds(&bs)?, &a, &b, threads)?;
            let defects: Vec<f64> = r.points.iter().map(|p| p.defect).collect();
            json_out(merge(
                header(&g),
                json!({ "fair": c.is_fair(), "empirical": r.points, "target": 0.0, "relative_error": defects, "trend": r.trend }),
            ))
        }
        Cmd::Ratio { g, spec1, spec2, bounds: bs } => {
            let (group, c) = setup(&g)?;
            let a = parse_event_file(&group, &spec1)?;
            let b = parse_event_file(&group, &spec2)?;
            let r = ratio_report(&c, &bounds(&bs)?, &a, &b, threads)?;
            let rel: Vec<f64> = r.points.iter().map(|p| p.relative_error).collect();
            json_out(merge(
                header(&g),
                json!({
                    "fair": r.fair,
                    "advisory": !r.fair,
                    "empirical": r.points,
                    "target": r.target,
                    "relative_error": rel,
                    "trend": trend_word(r.improving, "improving", "not improving"),
                }),
            ))
        }
        Cmd::Constant { g, truncation, direct } => {
            let (_, c) = setup(&g)?;
            let n = u64::try_from(bound(&truncation)?).context("truncation too large")?;
            let mode = if direct { ProductMode::Direct } else { ProductMode::Accelerated };
            let r = leading_constant(&c, n, mode)?;
            json_out(merge(header(&g), json!({ "poleOrder": pole_order(&c).to_string(), "report": r })))
        }
        Cmd::Discprob { p, q, truncation, wild, tail, empirical_bound } => {
            let n = u64::try_from(bound(&truncation)?).context("truncation too large")?;
            let wild = match wild {
                Wild::Excluded => WildPlaceTreatment::Excluded,
                Wild::TameShaped => WildPlaceTreatment::TameShaped,
                Wild::ExactLocal => WildPlaceTreatment::ExactLocal,
            };
            let tail = match tail {
                Tail::Integers => TailBound::Integers,
                Tail::Progression => TailBound::Progression,
            };
            let r = disc_prob_s1(p, q, n, wild, tail)?;
            let p2 = p * p;
            let verdict = match r.verdict {
                SplitVerdict::BelowOneOverP2 => format!("below 1/{p2}"),
                SplitVerdict::AboveOneOverP2 => format!("above 1/{p2}"),
                SplitVerdict::Inconclusive => "inconclusive".to_string(),
            };
            let empirical = match empirical_bound {
                Some(b) => Some(empirical_disc_prob(p, q, bound(&b)?, threads)?),
                None => None,
            };
            let inconclusive = r.verdict == SplitVerdict::Inconclusive;
            let v = json!({ "verdict": verdict, "report": r, "empirical": empirical });
            Ok((serde_json::to_string_pretty(&v)? + "\n", inconclusive))
        }
        Cmd::Viability { g, spec, search_bound, exact, at_2 } => {
            let (group, c) = setup(&g)?;
            let b = bound(&search_bound)?;
            if at_2 {
                let list = viable_specs_at_2(&group, b)?;
                let inviable = list.iter().filter(|s| !s.exact).count();
                return json_out(merge(
                    header(&g),
                    json!({ "searchBound": b.to_string(), "total": list.len(), "inviable": inviable, "specs": list }),
                ));
            }
            let specs = parse_spec_file(&group, spec.as_ref().expect("clap enforces --spec"))?;
            let v = viability_search(&group, &specs, b)?;
            let exact_verdict = if exact { Some(viability_exact(&c, &specs)?) } else { None };
            let status = match (v.status, exact_verdict) {
                (ViabilityStatus::NoWitnessBelowBound, Some(false)) => ViabilityStatus::Inviable,
                (s, _) => s,
            };
            let witness = v.witness.as_ref().map(|w| serde_json::from_str::<Value>(&w.serialize())).transpose()?;
            let out = json!({ "status": status, "exact": exact_verdict, "witness": witness });
            Ok((serde_json::to_string_pretty(&merge(header(&g), out))? + "\n", status == ViabilityStatus::NoWitnessBelowBound))
        }
        Cmd::Fairness { g } => {
            let (_, c) = setup(&g)?;
            json_out(merge(header(&g), serde_json::to_value(c.fairness())?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, inconclusive)) => {
            print!("{out}");
            if inconclusive { ExitCode::from(2) } else { ExitCode::SUCCESS }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

