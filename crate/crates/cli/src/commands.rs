use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use cardmatch::certificates::{verify_run, Verdict};
use cardmatch::engine::{solve as run_engine, DualPolicy, EngineError, Mode, Snapshot, Status};
use cardmatch::graph::{normalize_weights, parse_instance, Instance, ParseError};
use cardmatch::oracle::{min_weight_by_cardinality, OracleError, DEFAULT_NODE_LIMIT};
use cardmatch::rational::{serde_str, Display as R, Rational};
use cardmatch::reductions::{build_auxiliary_completion, build_doubled_graph, check_perfect_certificate};
use cardmatch::scenario::{compare_dual_policies, three_forest_instance, ScenarioError, THREE_FOREST_LABELS};
use cardmatch::schema::{
    pairs_one_based, parse_amount_line, parse_script, verify_document, DualsDoc, OracleDoc, RunDoc, ScenarioDoc,
    SchemaError, VerdictDoc,
};

pub const INFEASIBLE: u8 = 1;
pub const VERIFICATION_FAILED: u8 = 2;
pub const INPUT_ERROR: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {source}")]
    Document {
        path: PathBuf,
        #[source]
        source: SchemaError,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("policy must be `uniform` or `scripted=<file>`, got {0:?}")]
    Policy(String),
    #[error("expected <snapshots.json>:<k>, got {0:?}")]
    AuxiliarySpec(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn load_run(path: &Path) -> Result<RunDoc, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Document {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

fn emit<T: Serialize>(value: &T) {
    print!("{}", to_json(value));
}

fn report_verdict(what: &str, verdict: &Verdict) {
    if verdict.pass() {
        eprintln!("{what}: pass");
        return;
    }
    eprintln!("{what}: FAIL ({} violations)", verdict.violations.len());
    for v in verdict.violations.iter().take(10) {
        eprintln!("  {v}");
    }
}

pub struct SolveOptions {
    pub file: PathBuf,
    pub perfect: bool,
    pub policy: String,
    pub beta: Rational,
    pub snapshots: Option<PathBuf>,
    pub verify: bool,
    pub oracle_check: bool,
}

#[derive(Serialize)]
struct Mismatch {
    k: usize,
    #[serde(with = "serde_str")]
    weight: Rational,
    #[serde(with = "serde_str")]
    oracle: Rational,
}

#[derive(Serialize)]
struct OracleCheck {
    pass: bool,
    nu: usize,
    mismatches: Vec<Mismatch>,
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    run: RunDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerdictDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_check: Option<OracleCheck>,
}

fn policy_from(text: &str) -> Result<DualPolicy, CliError> {
    if text == "uniform" {
        return Ok(DualPolicy::Uniform);
    }
    let path = text.strip_prefix("scripted=").ok_or_else(|| CliError::Policy(text.to_string()))?;
    let path = Path::new(path);
    let phases = parse_script(&read(path)?).map_err(|source| CliError::Document {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(DualPolicy::Scripted(phases))
}

pub fn solve(opts: &SolveOptions) -> Result<u8, CliError> {
    let inst = load_instance(&opts.file)?;
    let policy = policy_from(&opts.policy)?;
    let mode = if opts.perfect { Mode::Perfect } else { Mode::Maximum };
    let (shifted, record) = normalize_weights(&inst);
    let run = run_engine(&shifted, mode, &policy, opts.beta.clone())?;
    let doc = RunDoc::new(&run, &record);

    let verification = opts.verify.then(|| verify_run(&shifted, &run));
    let oracle_check = if opts.oracle_check {
        let table = min_weight_by_cardinality(&inst, DEFAULT_NODE_LIMIT)?;
        let mismatches: Vec<Mismatch> = doc
            .snapshots
            .iter()
            .filter_map(|s| {
                let best = table.min_weight(s.k)?;
                (best != &s.weight).then(|| Mismatch { k: s.k, weight: s.weight.clone(), oracle: best.clone() })
            })
            .collect();
        let final_k = doc.snapshots.last().map_or(0, |s| s.k);
        let pass = mismatches.is_empty() && (run.status == Status::PerfectFound || final_k == table.nu);
        Some(OracleCheck { pass, nu: table.nu, mismatches })
    } else {
        None
    };

    let status = match run.status {
        Status::PerfectFound => "perfect matching found",
        Status::NoPerfectMatching => "no perfect matching",
    };
    eprintln!("{status}; {} snapshots, shift {}", doc.snapshots.len(), R(&doc.shift));
    for s in &doc.snapshots {
        eprintln!("  k={:<3} weight {}", s.k, R(&s.weight));
    }
    if let Some(v) = &verification {
        report_verdict("verification", v);
    }
    if let Some(check) = &oracle_check {
        eprintln!("oracle check: {} (nu = {})", if check.pass { "pass" } else { "FAIL" }, check.nu);
        for m in &check.mismatches {
            eprintln!("  k={}: weight {} vs oracle {}", m.k, R(&m.weight), R(&m.oracle));
        }
    }

    if let Some(path) = &opts.snapshots {
        write(path, &to_json(&doc))?;
    }
    let failed = verification.as_ref().is_some_and(|v| !v.pass()) || oracle_check.as_ref().is_some_and(|c| !c.pass);
    emit(&SolveOutput {
        run: doc,
        verification: verification.as_ref().map(Into::into),
        oracle_check,
    });
    Ok(if failed {
        VERIFICATION_FAILED
    } else if run.is_infeasible() {
        INFEASIBLE
    } else {
        0
    })
}

pub fn oracle(file: &Path, limit: usize) -> Result<u8, CliError> {
    let inst = load_instance(file)?;
    let table = min_weight_by_cardinality(&inst, limit)?;
    eprintln!("nu = {}", table.nu);
    for c in &table.by_cardinality {
        eprintln!("  k={:<3} min weight {}", c.k, R(&c.min_weight));
    }
    emit(&OracleDoc::from(&table));
    Ok(0)
}

pub fn verify(file: &Path, run: &Path) -> Result<u8, CliError> {
    let inst = load_instance(file)?;
    let doc = load_run(run)?;
    let verdict = verify_document(&inst, &doc)?;
    report_verdict("verification", &verdict);
    emit(&VerdictDoc::from(&verdict));
    Ok(if verdict.pass() { 0 } else { VERIFICATION_FAILED })
}

pub fn counterexample(amounts: &str, instance: Option<&Path>) -> Result<u8, CliError> {
    let amounts = parse_amount_line(amounts)?;
    let inst = match instance {
        Some(path) => load_instance(path)?,
        None => three_forest_instance(),
    };
    let report = compare_dual_policies(&inst, &amounts)?;
    let (shifted, _) = normalize_weights(&inst);
    let uniform_verdict = verify_run(&shifted, &report.uniform_run);
    let scripted_verdict = report.scripted_run.as_ref().map(|run| verify_run(&shifted, run));

    if instance.is_none() {
        let labels: Vec<String> = THREE_FOREST_LABELS.iter().enumerate().map(|(i, l)| format!("{}={l}", i + 1)).collect();
        eprintln!("nodes: {}", labels.join(" "));
    }
    eprintln!("{:>3}  {:>10}  {:>10}  {:>10}", "k", "uniform", "scripted", "oracle");
    for (k, w) in &report.uniform {
        let scripted = match &report.scripted {
            Ok(list) => list.iter().find(|(j, _)| j == k).map_or("-".to_string(), |(_, s)| R(s).to_string()),
            Err(_) => "-".to_string(),
        };
        let best = report.oracle.min_weight(*k).map_or("-".to_string(), |b| R(b).to_string());
        eprintln!("{k:>3}  {:>10}  {scripted:>10}  {best:>10}", R(w).to_string());
    }
    if let Err(e) = &report.scripted {
        eprintln!("scripted run rejected: {e}");
    }
    match &report.divergence {
        Some(d) => eprintln!(
            "divergence at k={}: scripted {} > optimum {}",
            d.k,
            R(&d.scripted),
            R(&d.oracle)
        ),
        None => eprintln!("no divergence"),
    }
    report_verdict("uniform certificates", &uniform_verdict);
    if let Some(v) = &scripted_verdict {
        report_verdict("scripted certificates", v);
    }
    emit(&ScenarioDoc::new(&report, &amounts, &uniform_verdict, scripted_verdict.as_ref()));
    Ok(0)
}

#[derive(Serialize)]
struct DoubledOutput {
    construction: &'static str,
    nodes: usize,
    edges: usize,
    instance: String,
}

pub fn reduce_doubled(file: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let inst = load_instance(file)?;
    let doubled = build_doubled_graph(&inst);
    let text = doubled.to_dimacs();
    if let Some(path) = out {
        write(path, &text)?;
    }
    eprintln!(
        "doubled graph: {} nodes, {} edges; mirror of node v is v + {}",
        doubled.node_count(),
        doubled.edge_count(),
        inst.node_count()
    );
    emit(&DoubledOutput {
        construction: "doubled",
        nodes: doubled.node_count(),
        edges: doubled.edge_count(),
        instance: text,
    });
    Ok(0)
}

#[derive(Serialize)]
struct AuxiliaryOutput {
    construction: &'static str,
    k: usize,
    #[serde(with = "serde_str")]
    shift: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    refused: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    completion: Option<CompletionDoc>,
}

#[derive(Serialize)]
struct CompletionDoc {
    exposed: Vec<usize>,
    added: Vec<usize>,
    instance: String,
    matching: Vec<[usize; 2]>,
    lifted_duals: DualsDoc,
    verdict: VerdictDoc,
}

pub fn reduce_auxiliary(file: &Path, spec: &str, out: Option<&Path>) -> Result<u8, CliError> {
    let (path, k) = spec
        .rsplit_once(':')
        .and_then(|(p, k)| Some((p, k.parse::<usize>().ok()?)))
        .ok_or_else(|| CliError::AuxiliarySpec(spec.to_string()))?;
    let inst = load_instance(file)?;
    let doc = load_run(Path::new(path))?;
    let (shifted, record) = normalize_weights(&inst);
    if record.shift != doc.shift {
        return Err(SchemaError::ShiftMismatch {
            document: R(&doc.shift).to_string(),
            instance: R(&record.shift).to_string(),
        }
        .into());
    }
    let (claim, duals) = doc.decode_snapshot(k, inst.node_count())?;
    let snapshot = Snapshot {
        cardinality: claim.matching.len(),
        matching: claim.matching,
        duals,
        weight: claim.weight,
    };
    let mut output = AuxiliaryOutput {
        construction: "auxiliary",
        k,
        shift: record.shift.clone(),
        refused: None,
        completion: None,
    };
    let code = match build_auxiliary_completion(&shifted, &snapshot) {
        Err(e) => {
            eprintln!("completion refused: {e}");
            output.refused = Some(e.to_string());
            VERIFICATION_FAILED
        }
        Ok(comp) => {
            let verdict = check_perfect_certificate(&comp);
            let n = comp.original_node_count();
            let text = comp.aux_instance.to_dimacs();
            if let Some(path) = out {
                write(path, &text)?;
            }
            eprintln!(
                "auxiliary completion: {} exposed nodes, {} nodes, {} edges",
                comp.exposed.len(),
                comp.aux_instance.node_count(),
                comp.aux_instance.edge_count()
            );
            report_verdict("perfect-matching certificate", &verdict);
            let code = if verdict.pass() { 0 } else { VERIFICATION_FAILED };
            output.completion = Some(CompletionDoc {
                exposed: comp.exposed.iter().map(|v| v + 1).collect(),
                added: (n + 1..=comp.aux_instance.node_count()).collect(),
                instance: text,
                matching: pairs_one_based(&comp.extended_matching),
                lifted_duals: (&comp.lifted_duals).into(),
                verdict: (&verdict).into(),
            });
            code
        }
    };
    emit(&output);
    Ok(code)
}
