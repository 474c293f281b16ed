//! `zerosum`: subsequence-sum counts, Davenport constants and extremal-sequence
//! checks over finite abelian groups, with human or JSON reports.

mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use zerosum::counting::extremal_set_from_counts;
use zerosum::davenport::{davenport, davenport_formula, DEFAULT_EXACT_CAP};
use zerosum::group::SUBGROUP_ENUMERATION_CAP;
use zerosum::search::{
    conjecture1_harness_with_budget, conjecture2_harness_with_budget, construct_extremal, find_extremals_with_budget,
    random_search, ExtremalCatalog, DEFAULT_BUDGET,
};
use zerosum::structure::{check_cyclic_characterization, construct_unbounded_family};
use zerosum::verify::{
    check_transform_random, equivalences, sweep_corollary, sweep_es_chain, sweep_lower_bound, sweep_odd_structure,
    sweep_one_and_all, sweep_subgroup_es,
};
use zerosum::{count_all, davenport_value, Error, Group, GroupElement, Method, Sequence, VerificationReport};

use report::{Report, Status};

#[derive(Parser, Debug)]
#[command(name = "zerosum", version, about = "Zero-sum counting and extremal-sequence workbench")]
struct Cli {
    /// Emit the machine-readable report instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Leave the timestamp out of the report, making output byte-reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Facts about a group.
    Group {
        #[command(subcommand)]
        action: GroupAction,
    },
    /// N_g(S) for every g, or for one g.
    Count {
        group: String,
        sequence: String,
        #[arg(long)]
        g: Option<String>,
    },
    /// The Davenport constant.
    Davenport {
        group: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        davenport_cap: u64,
    },
    /// Catalog of extremal sequences, exhaustive or sampled.
    Extremal {
        group: String,
        /// Longest length swept (default D(G) + 3).
        #[arg(long)]
        max_len: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Sample this many random sequences of length --max-len instead of sweeping.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs one checker as a bounded sweep.
    Verify {
        id: CheckId,
        /// Not used by `cn`, which takes --n.
        group: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        /// Longest length swept (default D(G) + 3, or n + 2 for `cn`).
        #[arg(long)]
        max_len: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Random pairs for `transform`.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Counterexample search for one of the two structure conjectures.
    Conjecture {
        id: ConjectureId,
        group: String,
        /// Longest length swept (default D(G) + 3, raised to d*(G) + rank + 1 for conjecture 2).
        #[arg(long)]
        max_len: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Builds sequences that attain the lower bound.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
}

#[derive(Subcommand, Debug)]
enum GroupAction {
    Info { group: String },
}

#[derive(Subcommand, Debug)]
enum ConstructKind {
    /// A sequence of length m with N_g = 2^(m - D + 1).
    Extremal {
        group: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        m: u64,
    },
    /// S h^k for an order-two h with D(G) = D(G/<h>) + 1.
    Family {
        group: String,
        #[arg(long)]
        h: String,
        #[arg(long)]
        k: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Formula,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckId {
    LowerBound,
    Transform,
    OneAndAll,
    EsChain,
    SubgroupEs,
    Cn,
    OddStructure,
    Corollary,
    Equivalences,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConjectureId {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

type Failure = Box<(Report, Error)>;
type Outcome = Result<Report, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stamp = !cli.no_timestamp;
    let report = match run(cli.command, stamp) {
        Ok(report) => report,
        Err(failure) => {
            let (mut report, err) = *failure;
            report.status = Status::Error;
            report.result = json!({ "error": err.to_string() });
            report
        }
    };
    if cli.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_table());
    }
    if report.status == Status::Error {
        if let Some(msg) = report.result.get("error").and_then(Value::as_str) {
            eprintln!("error: {msg}");
        }
    }
    ExitCode::from(report.status.exit_code() as u8)
}

fn run(command: Command, stamp: bool) -> Outcome {
    match command {
        Command::Group { action: GroupAction::Info { group } } => group_info(&group, stamp),
        Command::Count { group, sequence, g } => count(&group, &sequence, g.as_deref(), stamp),
        Command::Davenport { group, method, davenport_cap } => davenport_cmd(&group, method, davenport_cap, stamp),
        Command::Extremal { group, max_len, budget, trials, seed } => {
            extremal(&group, max_len, budget, trials, seed, stamp)
        }
        Command::Verify { id, group, n, max_len, budget, trials, seed } => {
            verify(id, group.as_deref(), n, max_len, budget, trials, seed, stamp)
        }
        Command::Conjecture { id, group, max_len, budget } => conjecture(id, &group, max_len, budget, stamp),
        Command::Construct { kind } => construct(kind, stamp),
    }
}

/// Attaches the report skeleton to an error.
trait Within<T> {
    fn within(self, report: &Report) -> Result<T, Failure>;
}

impl<T> Within<T> for zerosum::Result<T> {
    fn within(self, report: &Report) -> Result<T, Failure> {
        self.map_err(|e| Box::new((report.clone(), e)))
    }
}

fn parse_group(spec: &str, command: &str, stamp: bool) -> Result<(Group, Report), Failure> {
    let report = Report::new(command, spec.trim(), stamp);
    let group: Group = spec.parse().within(&report)?;
    let mut report = report;
    report.group = group.to_string();
    Ok((group, report))
}

fn parse_element(group: &Group, text: &str) -> zerosum::Result<GroupElement> {
    let s = Sequence::parse(group, text)?;
    if s.len() != 1 {
        return Err(Error::MalformedTerm { term: text.to_string(), reason: "expected a single element".into() });
    }
    Ok(s.terms().remove(0))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn group_info(spec: &str, stamp: bool) -> Outcome {
    let (group, mut report) = parse_group(spec, "group info", stamp)?;
    report.param("spec", spec);
    report.cap("subgroup_enumeration", SUBGROUP_ENUMERATION_CAP);
    let subgroups = group.all_subgroups().ok().map(|s| s.len());
    report.result = json!({
        "canonical": group.to_string(),
        "invariants": group.invariants(),
        "order": group.order(),
        "rank": group.rank(),
        "d_star": group.d_star(),
        "trivial": group.is_trivial(),
        "cyclic": group.is_cyclic(),
        "p_group": group.is_p_group(),
        "davenport_formula": davenport_formula(&group),
        "subgroup_count": subgroups,
    });
    Ok(report)
}

fn count(spec: &str, text: &str, g: Option<&str>, stamp: bool) -> Outcome {
    let (group, mut report) = parse_group(spec, "count", stamp)?;
    report.param("sequence", text);
    let s = Sequence::parse(&group, text).within(&report)?;
    let counts = count_all(&s);
    if let Some(g) = g {
        report.param("g", g);
        let x = parse_element(&group, g).within(&report)?;
        report.result = json!({ "sequence": s.to_string(), "g": x.to_string(), "count": counts.get(&x).to_string() });
        return Ok(report);
    }
    let mut result = json!({
        "sequence": s.to_string(),
        "length": s.len(),
        "counts": to_value(&counts),
        "total": counts.total().to_string(),
    });
    match davenport_value(&group) {
        Ok(d) => {
            result["davenport"] = json!(d);
            result["extremal_set"] = match extremal_set_from_counts(&counts, d) {
                Ok(es) => json!(es.members.iter().map(ToString::to_string).collect::<Vec<_>>()),
                Err(_) => Value::Null,
            };
        }
        Err(e) => result["davenport"] = json!(format!("unavailable: {e}")),
    }
    report.result = result;
    Ok(report)
}

fn davenport_cmd(spec: &str, method: MethodArg, cap: u64, stamp: bool) -> Outcome {
    let (group, mut report) = parse_group(spec, "davenport", stamp)?;
    let method = match method {
        MethodArg::Exact => Method::Exact,
        MethodArg::Formula => Method::Formula,
        MethodArg::Both => Method::Both,
    };
    report.param("method", format!("{method:?}").to_lowercase());
    report.cap("davenport_cap", cap);
    let r = davenport(&group, method, cap).within(&report)?;
    report.result = json!({
        "value": r.value,
        "method": format!("{:?}", r.method).to_lowercase(),
        "methods_agree": matches!(r.method, Method::Both),
        "formula": davenport_formula(&group),
        "d_star": group.d_star(),
        "witness": r.witness.to_string(),
    });
    Ok(report)
}

fn catalog_value(c: &ExtremalCatalog) -> Value {
    json!({
        "davenport": c.davenport,
        "count": c.len(),
        "max_length_found": c.max_length_found,
        "length_cap": c.length_cap,
        "exhaustive": c.exhaustive,
        "examined": c.examined,
        "entries": c.entries.iter().map(|(s, es)| json!({
            "sequence": s.to_string(),
            "extremal_set": es.members.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn extremal(spec: &str, max_len: Option<u64>, budget: u64, trials: Option<u64>, seed: u64, stamp: bool) -> Outcome {
    let (group, mut report) = parse_group(spec, "extremal", stamp)?;
    let d = davenport_value(&group).within(&report)?;
    let max_len = max_len.unwrap_or(d + 3);
    report.param("max_len", max_len);
    let catalog = match trials {
        Some(trials) => {
            report.param("mode", "random").param("trials", trials);
            report.provenance.seed = Some(seed);
            random_search(&group, max_len, trials, seed).within(&report)?
        }
        None => {
            report.param("mode", "exhaustive");
            report.cap("budget", budget);
            let c = find_extremals_with_budget(&group, max_len, budget).within(&report)?;
            report.status = Status::from_outcome(false, c.exhaustive);
            c
        }
    };
    report.cap("max_len", max_len);
    report.result = catalog_value(&catalog);
    Ok(report)
}

fn verification(report: &mut Report, v: &VerificationReport) {
    report.status = Status::from_outcome(v.verdict.is_failure(), v.exhaustive || v.check == "transform");
    report.result = to_value(v);
}

#[allow(clippy::too_many_arguments)]
fn verify(
    id: CheckId,
    spec: Option<&str>,
    n: Option<u64>,
    max_len: Option<u64>,
    budget: u64,
    trials: u64,
    seed: u64,
    stamp: bool,
) -> Outcome {
    let name = id.to_possible_value().expect("named").get_name().to_string();
    let command = format!("verify {name}");
    if id == CheckId::Cn {
        let n = n.or_else(|| spec.and_then(|s| s.parse::<Group>().ok()).filter(Group::is_cyclic).map(|g| g.order()));
        let mut report = Report::new(&command, n.map(|n| format!("C{n}")).unwrap_or_default(), stamp);
        let Some(n) = n else {
            return Err(Box::new((report, Error::Precondition("verify cn needs --n".into()))));
        };
        let max_len = max_len.unwrap_or(n + 2);
        report.param("n", n).param("max_len", max_len).cap("max_len", max_len);
        let v = check_cyclic_characterization(n, max_len).within(&report)?;
        verification(&mut report, &v);
        return Ok(report);
    }
    let Some(spec) = spec else {
        return Err(Box::new((
            Report::new(&command, "", stamp),
            Error::Precondition(format!("verify {name} needs a group")),
        )));
    };
    let (group, mut report) = parse_group(spec, &command, stamp)?;
    let d = davenport_value(&group).within(&report)?;
    let max_len = max_len.unwrap_or(d + 3);
    report.param("max_len", max_len).cap("max_len", max_len).cap("budget", budget);
    let v = match id {
        CheckId::LowerBound => sweep_lower_bound(&group, max_len, budget),
        CheckId::OneAndAll => sweep_one_and_all(&group, max_len, budget),
        CheckId::EsChain => sweep_es_chain(&group, max_len, budget),
        CheckId::SubgroupEs => sweep_subgroup_es(&group, max_len, budget),
        CheckId::OddStructure => sweep_odd_structure(&group, max_len, budget),
        CheckId::Corollary => sweep_corollary(&group, max_len, budget),
        CheckId::Transform => {
            report.param("trials", trials);
            report.provenance.seed = Some(seed);
            check_transform_random(&group, max_len, trials, seed)
        }
        CheckId::Equivalences => {
            let e = equivalences(&group, max_len, budget).within(&report)?;
            verification(&mut report, &e.report);
            report.result = json!({
                "cond_iii": e.profile.cond_iii,
                "t": e.profile.t,
                "offending_h": e.profile.offending_h.as_ref().map(|h| h.generators()[0].to_string()),
                "unbounded_family": e.family.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "extremal_ceiling": e.extremal_ceiling,
                "sweep_cap": e.sweep_cap,
                "report": to_value(&e.report),
            });
            return Ok(report);
        }
        CheckId::Cn => unreachable!("handled above"),
    }
    .within(&report)?;
    verification(&mut report, &v);
    Ok(report)
}

fn conjecture(id: ConjectureId, spec: &str, max_len: Option<u64>, budget: u64, stamp: bool) -> Outcome {
    let label = match id {
        ConjectureId::One => "1",
        ConjectureId::Two => "2",
    };
    let (group, mut report) = parse_group(spec, &format!("conjecture {label}"), stamp)?;
    let d = davenport_value(&group).within(&report)?;
    let floor = group.d_star() + group.rank() as u64 + 1;
    let max_len = match id {
        ConjectureId::One => max_len.unwrap_or(d + 3),
        ConjectureId::Two => max_len.unwrap_or((d + 3).max(floor)),
    };
    report.param("max_len", max_len).cap("max_len", max_len).cap("budget", budget);
    match id {
        ConjectureId::One => {
            let v = conjecture1_harness_with_budget(&group, max_len, budget).within(&report)?;
            verification(&mut report, &v);
            report.result["qualifying"] = json!(!v.is_skipped());
        }
        ConjectureId::Two => {
            let o = conjecture2_harness_with_budget(&group, max_len, budget).within(&report)?;
            verification(&mut report, &o.report);
            report.result = json!({
                "qualifying": !o.report.is_skipped(),
                "bound": o.bound,
                "max_length": o.max_length,
                "bound_attained": o.bound_attained,
                "product_witness": o.product_witness.to_string(),
                "product_witness_extremal": o.product_witness_extremal,
                "product_witness_in_scope": o.product_witness_in_scope,
                "longest": o.longest.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "report": to_value(&o.report),
            });
        }
    }
    Ok(report)
}

fn construct(kind: ConstructKind, stamp: bool) -> Outcome {
    match kind {
        ConstructKind::Extremal { group, g, m } => {
            let (group, mut report) = parse_group(&group, "construct extremal", stamp)?;
            report.param("g", &g).param("m", m);
            let x = parse_element(&group, &g).within(&report)?;
            let s = construct_extremal(&group, &x, m).within(&report)?;
            let d = davenport_value(&group).within(&report)?;
            report.result = json!({
                "sequence": s.to_string(),
                "length": s.len(),
                "davenport": d,
                "n_g": count_all(&s).get(&x).to_string(),
            });
            Ok(report)
        }
        ConstructKind::Family { group, h, k } => {
            let (group, mut report) = parse_group(&group, "construct family", stamp)?;
            report.param("h", &h).param("k", k);
            let x = parse_element(&group, &h).within(&report)?;
            let sub = group.subgroup_closure(std::slice::from_ref(&x)).within(&report)?;
            let s = construct_unbounded_family(&group, &sub, k).within(&report)?;
            let counts = count_all(&s);
            report.result = json!({
                "sequence": s.to_string(),
                "length": s.len(),
                "n_0": counts.zero_count().to_string(),
                "n_h": counts.get(&x).to_string(),
            });
            Ok(report)
        }
    }
}
