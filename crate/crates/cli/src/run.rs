//! Task dispatch: builds the report payload for one task, maps library
//! errors onto the exit-code contract, and renders the envelope.
//!
//! Exit codes: 0 success, 2 parse/config error, 3 contract refusal (a
//! mathematical precondition failed; the reason names the precondition and
//! states it), 4 budget exhausted (a partial report is still written, with
//! `partial: true`).

use std::path::PathBuf;

use coarsetop::complexes::rips::rips_complex;
use coarsetop::complexes::{relative_collar_complex, ComplexError};
use coarsetop::coset::bundle::finite_index_check;
use coarsetop::coset::{
    quotient_window, CosetError, QuotientParams, Subgroup, SubgroupSpec,
};
use coarsetop::ends::{
    coarse_h1_rank, ends_estimate, splitting_criterion, EndsError, MarginRule, SplitParams,
};
use coarsetop::euler::{
    chi_amalgam, chi_finite_index, chi_hnn, eulerchar_report, gogeuler_check, one_relator_chi,
    parse_chi, rational_label, BigRational, EulerError,
};
use coarsetop::groups::{ball, Group, GroupError, GroupSpec, Marked};
use coarsetop::homology::family::{kunneth_sweep, probe_set, uct_sweep};
use coarsetop::homology::{cohomology_c, homology, kunneth_check, HomologyError};
use coarsetop::report::ReportEnvelope;
use coarsetop::ring::RingSpec;
use coarsetop::window::{MetricWindow, WindowError};
use serde_json::{json, Value};

use crate::config::{parse_ring, TaskConfig};

pub const TASKS: [&str; 8] = [
    "ball",
    "quotient",
    "ends",
    "split-report",
    "homology",
    "kunneth-check",
    "uct-check",
    "euler",
];

/// Why a run could not produce a normal report.
#[derive(Debug)]
pub enum Failure {
    /// Invalid config, flags, words, or parameter ranges.
    Parse(String),
    /// A mathematical precondition failed; named and stated.
    Refusal { name: &'static str, statement: String },
    /// The node budget ran out. A partial payload may still be reportable.
    Budget { statement: String, partial: Option<Value> },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Refusal { .. } => 3,
            Failure::Budget { .. } => 4,
        }
    }

    /// Machine-readable reason written to stderr.
    pub fn reason_json(&self) -> String {
        let v = match self {
            Failure::Parse(s) => json!({"error": {"kind": "parse", "statement": s}}),
            Failure::Refusal { name, statement } => json!({
                "error": {"kind": "refusal", "precondition": name, "statement": statement}
            }),
            Failure::Budget { statement, .. } => {
                json!({"error": {"kind": "budget", "statement": statement}})
            }
        };
        let mut s = serde_json::to_string(&v).expect("reason serialization");
        s.push('\n');
        s
    }
}

fn map_window(w: WindowError) -> Failure {
    Failure::Refusal { name: "window-validity", statement: w.to_string() }
}

fn map_group(e: GroupError) -> Failure {
    match e {
        GroupError::UnknownGenerator(_)
        | GroupError::BadToken(_)
        | GroupError::ExponentTooLarge(_)
        | GroupError::RankOutOfRange(..)
        | GroupError::BadBsParameters(_)
        | GroupError::TooManyFactors(_) => Failure::Parse(e.to_string()),
        GroupError::BudgetExceeded { .. } => {
            Failure::Budget { statement: e.to_string(), partial: None }
        }
        GroupError::Window(w) => map_window(w),
    }
}

fn map_coset(e: CosetError) -> Failure {
    match e {
        CosetError::Group(g) => map_group(g),
        CosetError::Window(w) => map_window(w),
        CosetError::EmptySubgroup => Failure::Refusal {
            name: "nontrivial-subgroup",
            statement: e.to_string(),
        },
        CosetError::NotInWindow(..) => Failure::Refusal {
            name: "element-within-window",
            statement: e.to_string(),
        },
        CosetError::BadMargin { .. } => Failure::Refusal {
            name: "positive-certification-margin",
            statement: e.to_string(),
        },
    }
}

fn map_complex(e: ComplexError) -> Failure {
    let name = match e {
        ComplexError::CollarTooWide(..) => "collar-within-radius",
        ComplexError::NoWindow | ComplexError::NoMembers | ComplexError::NoControl => {
            "window-data-present"
        }
        _ => "complex-validity",
    };
    Failure::Refusal { name, statement: e.to_string() }
}

fn map_homology(e: HomologyError) -> Failure {
    match e {
        HomologyError::Ring(r) => Failure::Parse(r.to_string()),
        HomologyError::Complex(c) => map_complex(c),
        HomologyError::Snf(s) => Failure::Refusal {
            name: "matrix-arithmetic",
            statement: s.to_string(),
        },
    }
}

fn map_ends(e: EndsError) -> Failure {
    match e {
        EndsError::Window(w) => map_window(w),
        EndsError::Group(g) => map_group(g),
        EndsError::Coset(c) => map_coset(c),
        EndsError::Complex(c) => map_complex(c),
        EndsError::Homology(h) => map_homology(h),
        EndsError::EmptySchedule => Failure::Refusal {
            name: "nonempty-schedule",
            statement: e.to_string(),
        },
    }
}

fn map_euler(e: EulerError) -> Failure {
    match e {
        EulerError::BadRational(_) | EulerError::BadEdgeEndpoint(..) => {
            Failure::Parse(e.to_string())
        }
        EulerError::HypothesisViolated(_) => Failure::Refusal {
            name: "chi-nonpositive",
            statement: e.to_string(),
        },
        EulerError::NonReduced(_) => Failure::Refusal {
            name: "reduced-graph-of-groups",
            statement: e.to_string(),
        },
        EulerError::BadIndex(_) => Failure::Refusal {
            name: "positive-index",
            statement: e.to_string(),
        },
        EulerError::Disconnected(_) => Failure::Refusal {
            name: "connected-graph",
            statement: e.to_string(),
        },
        EulerError::EmptyGraph => Failure::Refusal {
            name: "nonempty-graph",
            statement: e.to_string(),
        },
    }
}

/// CLI flag overrides; each wins over the config file when present.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub task: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

/// Everything main() needs to finish the run.
pub struct RunPlan {
    pub exit: i32,
    pub bytes: Option<Vec<u8>>,
    pub out: Option<PathBuf>,
    pub stderr: Option<String>,
}

pub fn execute(config_text: &str, ov: Overrides) -> RunPlan {
    match execute_inner(config_text, &ov) {
        Ok((bytes, out)) => RunPlan { exit: 0, bytes: Some(bytes), out, stderr: None },
        Err((failure, report)) => {
            let (bytes, out) = match report {
                Some((b, o)) => (Some(b), o),
                None => (None, None),
            };
            RunPlan { exit: failure.exit_code(), bytes, out, stderr: Some(failure.reason_json()) }
        }
    }
}

type ReportBytes = (Vec<u8>, Option<PathBuf>);

fn execute_inner(
    config_text: &str,
    ov: &Overrides,
) -> Result<ReportBytes, (Failure, Option<ReportBytes>)> {
    let cfg: TaskConfig = toml::from_str(config_text)
        .map_err(|e| (Failure::Parse(format!("config: {e}")), None))?;

    let task = ov
        .task
        .clone()
        .or_else(|| cfg.task.clone())
        .ok_or_else(|| (Failure::Parse("no task given (config `task` or --task)".into()), None))?;
    if !TASKS.contains(&task.as_str()) {
        return Err((
            Failure::Parse(format!(
                "unknown task {task:?} (expected one of: {})",
                TASKS.join(", ")
            )),
            None,
        ));
    }

    let format = ov
        .format
        .clone()
        .or_else(|| cfg.format.clone())
        .unwrap_or_else(|| "json".into());
    if format != "json" && format != "csv" {
        return Err((
            Failure::Parse(format!("unknown format {format:?} (expected json or csv)")),
            None,
        ));
    }

    let out = ov.out.clone().or_else(|| cfg.out.clone().map(PathBuf::from));
    let seed = ov.seed.or(cfg.seed);
    let budget =
        usize::try_from(ov.budget.or(cfg.budget).unwrap_or(coarsetop::DEFAULT_BUDGET as u64))
            .map_err(|_| (Failure::Parse("budget exceeds the address space".into()), None))?;

    let render = |payload: Value| -> Vec<u8> {
        let envelope =
            ReportEnvelope::new(&task, config_text, seed, Some(budget as u64), payload);
        match format.as_str() {
            "csv" => envelope.to_csv_bytes(),
            _ => envelope.to_json_bytes(),
        }
    };

    match dispatch(&task, &cfg, seed, budget) {
        Ok(payload) => Ok((render(payload), out)),
        Err(Failure::Budget { statement, partial }) => {
            // Budget exhaustion still reports: whatever partial data the
            // task salvaged, flagged as such.
            let mut payload = partial.unwrap_or_else(|| json!({}));
            if let Some(map) = payload.as_object_mut() {
                map.insert("partial".into(), Value::Bool(true));
                map.insert("budget_exceeded".into(), Value::String(statement.clone()));
            }
            let bytes = render(payload);
            Err((
                Failure::Budget { statement, partial: None },
                Some((bytes, out)),
            ))
        }
        Err(f) => Err((f, None)),
    }
}

fn build_group(cfg: &TaskConfig) -> Result<Group, Failure> {
    let spec: &GroupSpec = cfg
        .group
        .as_ref()
        .ok_or_else(|| Failure::Parse("this task needs a [group] section".into()))?;
    spec.build().map_err(map_group)
}

fn build_subgroup(cfg: &TaskConfig, g: &Group) -> Result<Subgroup, Failure> {
    let spec: &SubgroupSpec = cfg
        .subgroup
        .as_ref()
        .ok_or_else(|| Failure::Parse("this task needs a [subgroup] section".into()))?;
    Subgroup::parse(g, spec).map_err(map_coset)
}

fn dispatch(
    task: &str,
    cfg: &TaskConfig,
    seed: Option<u64>,
    budget: usize,
) -> Result<Value, Failure> {
    match task {
        "ball" => run_ball(cfg, budget),
        "quotient" => run_quotient(cfg, budget),
        "ends" => run_ends(cfg, budget),
        "split-report" => run_split(cfg, budget),
        "homology" => run_homology(cfg, budget),
        "kunneth-check" => run_kunneth(cfg, seed, budget),
        "uct-check" => run_uct(cfg),
        "euler" => run_euler(cfg),
        _ => unreachable!("validated above"),
    }
}

fn ball_payload(
    g: &Group,
    b: &coarsetop::groups::Ball<coarsetop::groups::GroupElement>,
    requested: u32,
    include_labels: bool,
    include_edges: bool,
) -> Value {
    let mut layers = vec![0usize; b.radius as usize + 1];
    for d in &b.depths {
        layers[*d as usize] += 1;
    }
    json!({
        "group": g.name(),
        "requested_radius": requested,
        "radius": b.radius,
        "size": b.len(),
        "layer_sizes": layers,
        "edge_count": b.edges.len(),
        "labels": include_labels.then(|| b.labels.clone()),
        "edges": include_edges.then(|| b.edges.clone()),
        "partial": b.radius < requested,
    })
}

fn run_ball(cfg: &TaskConfig, budget: usize) -> Result<Value, Failure> {
    let g = build_group(cfg)?;
    let s = &cfg.ball;
    match ball(&g, s.radius, budget) {
        Ok(b) => Ok(ball_payload(&g, &b, s.radius, s.include_labels, s.include_edges)),
        Err(GroupError::BudgetExceeded { radius, budget: bu }) => {
            // Salvage the largest complete smaller ball as a partial result.
            let statement =
                GroupError::BudgetExceeded { radius, budget: bu }.to_string();
            let mut partial = None;
            for r in (0..s.radius).rev() {
                if let Ok(b) = ball(&g, r, budget) {
                    partial = Some(ball_payload(
                        &g,
                        &b,
                        s.radius,
                        s.include_labels,
                        s.include_edges,
                    ));
                    break;
                }
            }
            Err(Failure::Budget { statement, partial })
        }
        Err(e) => Err(map_group(e)),
    }
}

fn run_quotient(cfg: &TaskConfig, budget: usize) -> Result<Value, Failure> {
    let g = build_group(cfg)?;
    let h = build_subgroup(cfg, &g)?;
    let s = &cfg.quotient;
    let qw = quotient_window(
        &g,
        &h,
        &QuotientParams { radius: s.radius, margin: s.margin, budget },
    )
    .map_err(map_coset)?;
    Ok(json!({
        "window": &qw,
        "scale_1_edges": qw.scale_edges(1),
        "diameter": qw.diameter(),
        "all_converged": qw.all_converged(),
    }))
}

fn run_ends(cfg: &TaskConfig, budget: usize) -> Result<Value, Failure> {
    let g = build_group(cfg)?;
    let s = &cfg.ends;
    let w = g.ball_window(s.radius, budget, Some(s.collar)).map_err(map_group)?;
    let rule = if s.margin == 0 {
        MarginRule::TwiceR
    } else {
        MarginRule::Fixed { margin: s.margin }
    };
    let rep = ends_estimate(&w, &s.schedule, rule).map_err(map_ends)?;
    let h1 = if s.include_h1 {
        Some(coarse_h1_rank(&w, s.collar, s.h1_scale).map_err(map_ends)?)
    } else {
        None
    };
    Ok(json!({"report": rep, "h1_rank": h1}))
}

fn run_split(cfg: &TaskConfig, budget: usize) -> Result<Value, Failure> {
    let g = build_group(cfg)?;
    let h = build_subgroup(cfg, &g)?;
    let s = &cfg.split;
    let params = SplitParams {
        quotient_radius: s.quotient_radius,
        quotient_margin: s.quotient_margin,
        comm_radius: s.comm_radius,
        budget,
        max_connect_scale: s.max_connect_scale,
        ends_schedule: s.ends_schedule.clone(),
        ends_margin: s.ends_margin,
    };
    let rep = splitting_criterion(&g, &h, &params).map_err(map_ends)?;
    // The finite-index detail is informative next to the verdict.
    let mut schedule = vec![s.quotient_radius.saturating_sub(2).max(1), s.quotient_radius];
    schedule.dedup();
    let fi = finite_index_check(&g, &h, &schedule, s.quotient_margin, budget)
        .map_err(map_coset)?;
    Ok(json!({"report": rep, "finite_index": fi}))
}

fn run_homology(cfg: &TaskConfig, budget: usize) -> Result<Value, Failure> {
    let s = &cfg.homology;
    let ring = parse_ring(&s.ring).map_err(Failure::Parse)?;
    let g = build_group(cfg)?;
    let mw: MetricWindow = match s.source.as_str() {
        "ball" => g.ball_window(s.radius, budget, None).map_err(map_group)?.metric_window(),
        "quotient" => {
            let h = build_subgroup(cfg, &g)?;
            quotient_window(
                &g,
                &h,
                &QuotientParams { radius: s.radius, margin: s.margin, budget },
            )
            .map_err(map_coset)?
            .metric_window()
            .map_err(map_window)?
        }
        other => {
            return Err(Failure::Parse(format!(
                "unknown homology source {other:?} (expected ball or quotient)"
            )))
        }
    };
    let rips = rips_complex(&mw, s.scale, s.max_degree).map_err(map_complex)?;
    let h = homology(&rips, ring).map_err(map_homology)?;
    let labels: Vec<String> = h.iter().map(|x| x.label(ring)).collect();
    let relative = if s.relative_collar > 0 {
        let (rel, census) =
            relative_collar_complex(&rips, s.relative_collar).map_err(map_complex)?;
        let hc = cohomology_c(&rel, ring).map_err(map_homology)?;
        let rel_labels: Vec<String> = hc.iter().map(|x| x.label(ring)).collect();
        Some(json!({
            "collar": s.relative_collar,
            "kept_per_degree": census.kept,
            "killed_per_degree": census.killed,
            "cohomology": hc,
            "labels": rel_labels,
        }))
    } else {
        None
    };
    Ok(json!({
        "group": g.name(),
        "source": s.source,
        "scale": s.scale,
        "ring": ring.label(),
        "f_vector": rips.f_vector(),
        "homology": h,
        "labels": labels,
        "relative": relative,
    }))
}

fn parse_rings(names: &[String]) -> Result<Vec<RingSpec>, Failure> {
    names.iter().map(|n| parse_ring(n).map_err(Failure::Parse)).collect()
}

fn run_kunneth(cfg: &TaskConfig, seed: Option<u64>, budget: usize) -> Result<Value, Failure> {
    let s = &cfg.kunneth;
    let rings = parse_rings(&s.rings)?;
    match s.mode.as_str() {
        "sweep" | "random" => {
            let pairs = if s.mode == "random" { s.random_pairs } else { 0 };
            let seed_val = if pairs > 0 {
                seed.ok_or_else(|| {
                    Failure::Parse("kunneth mode \"random\" requires a seed".into())
                })?
            } else {
                0
            };
            let mut reports = Vec::new();
            for ring in &rings {
                reports.push(kunneth_sweep(*ring, pairs, seed_val).map_err(map_homology)?);
            }
            let all_pass = reports.iter().all(|r| r.failures.is_empty());
            Ok(json!({
                "mode": s.mode,
                "random_pairs": pairs,
                "reports": reports,
                "all_pass": all_pass,
            }))
        }
        "probes" => {
            let probes = probe_set();
            let mut cases = Vec::new();
            let mut all_pass = true;
            for ring in &rings {
                for (ln, lc) in &probes {
                    for (rn, rc) in &probes {
                        let rep = kunneth_check(lc, rc, *ring).map_err(map_homology)?;
                        all_pass &= rep.all_equal;
                        cases.push(json!({
                            "left": ln,
                            "right": rn,
                            "ring": ring.label(),
                            "all_equal": rep.all_equal,
                        }));
                    }
                }
            }
            Ok(json!({"mode": "probes", "cases": cases, "all_pass": all_pass}))
        }
        "windows" => {
            let lspec = s.left.as_ref().ok_or_else(|| {
                Failure::Parse("kunneth mode \"windows\" needs kunneth.left".into())
            })?;
            let rspec = s.right.as_ref().ok_or_else(|| {
                Failure::Parse("kunneth mode \"windows\" needs kunneth.right".into())
            })?;
            let gl = lspec.build().map_err(map_group)?;
            let gr = rspec.build().map_err(map_group)?;
            let wl = gl.ball_window(s.radius, budget, None).map_err(map_group)?;
            let wr = gr.ball_window(s.radius, budget, None).map_err(map_group)?;
            let cl =
                rips_complex(&wl.metric_window(), s.scale, s.max_degree).map_err(map_complex)?;
            let cr =
                rips_complex(&wr.metric_window(), s.scale, s.max_degree).map_err(map_complex)?;
            let mut reports = Vec::new();
            for ring in &rings {
                reports.push(kunneth_check(&cl, &cr, *ring).map_err(map_homology)?);
            }
            let all_pass = reports.iter().all(|r| r.all_equal);
            Ok(json!({
                "mode": "windows",
                "left": gl.name(),
                "right": gr.name(),
                "radius": s.radius,
                "scale": s.scale,
                "reports": reports,
                "all_pass": all_pass,
            }))
        }
        other => Err(Failure::Parse(format!(
            "unknown kunneth mode {other:?} (expected sweep, random, probes, or windows)"
        ))),
    }
}

fn run_uct(cfg: &TaskConfig) -> Result<Value, Failure> {
    let targets = parse_rings(&cfg.uct.targets)?;
    for t in &targets {
        if !t.is_field() {
            return Err(Failure::Refusal {
                name: "field-target",
                statement: format!(
                    "universal-coefficient targets must be fields; {} is not",
                    t.label()
                ),
            });
        }
    }
    let mut reports = Vec::new();
    for t in &targets {
        reports.push(uct_sweep(*t).map_err(map_homology)?);
    }
    let all_pass = reports.iter().all(|r| r.failures.is_empty());
    Ok(json!({"reports": reports, "all_pass": all_pass}))
}

fn chi_field(value: &Option<String>, field: &str, op: &str) -> Result<BigRational, Failure> {
    let text = value
        .as_ref()
        .ok_or_else(|| Failure::Parse(format!("euler op {op:?} requires euler.{field}")))?;
    parse_chi(text).map_err(map_euler)
}

fn run_euler(cfg: &TaskConfig) -> Result<Value, Failure> {
    let s = &cfg.euler;
    let op = s
        .op
        .as_deref()
        .ok_or_else(|| Failure::Parse("task euler requires euler.op".into()))?;
    match op {
        "amalgam" => {
            let a = chi_field(&s.chi_a, "chi_a", op)?;
            let b = chi_field(&s.chi_b, "chi_b", op)?;
            let c = chi_field(&s.chi_c, "chi_c", op)?;
            Ok(json!({"op": op, "chi": rational_label(&chi_amalgam(&a, &b, &c))}))
        }
        "hnn" => {
            let a = chi_field(&s.chi_a, "chi_a", op)?;
            let c = chi_field(&s.chi_c, "chi_c", op)?;
            Ok(json!({"op": op, "chi": rational_label(&chi_hnn(&a, &c))}))
        }
        "finite-index" => {
            let chi = chi_field(&s.chi, "chi", op)?;
            let index = s
                .index
                .ok_or_else(|| Failure::Parse("euler op finite-index requires euler.index".into()))?;
            let out = chi_finite_index(&chi, index).map_err(map_euler)?;
            Ok(json!({"op": op, "index": index, "chi": rational_label(&out)}))
        }
        "graph" => {
            let graph = s
                .graph
                .as_ref()
                .ok_or_else(|| Failure::Parse("euler op graph requires euler.graph".into()))?;
            let chi = graph.chi().map_err(map_euler)?;
            Ok(json!({"op": op, "graph": graph, "chi": rational_label(&chi)}))
        }
        "gog-check" => {
            let chi_h = chi_field(&s.chi_h, "chi_h", op)?;
            let shape = s.shape.as_ref().ok_or_else(|| {
                Failure::Parse("euler op gog-check requires euler.shape".into())
            })?;
            let rep = gogeuler_check(&chi_h, shape).map_err(map_euler)?;
            Ok(json!({"op": op, "chi_h": rational_label(&chi_h), "report": rep}))
        }
        "one-relator" => {
            let n = s
                .n
                .ok_or_else(|| Failure::Parse("euler op one-relator requires euler.n".into()))?;
            let m = s
                .m
                .ok_or_else(|| Failure::Parse("euler op one-relator requires euler.m".into()))?;
            let rep = one_relator_chi(n, m).map_err(map_euler)?;
            Ok(json!({"op": op, "n": n, "m": m, "report": rep}))
        }
        "report" => {
            let chi_g = chi_field(&s.chi_g, "chi_g", op)?;
            let chi_h = chi_field(&s.chi_h, "chi_h", op)?;
            let shape = s
                .shape
                .as_ref()
                .ok_or_else(|| Failure::Parse("euler op report requires euler.shape".into()))?;
            let rep = eulerchar_report(&chi_g, &chi_h, shape).map_err(map_euler)?;
            Ok(json!({"op": op, "report": rep}))
        }
        other => Err(Failure::Parse(format!(
            "unknown euler op {other:?} (expected amalgam, hnn, finite-index, graph, \
             gog-check, one-relator, or report)"
        ))),
    }
}
