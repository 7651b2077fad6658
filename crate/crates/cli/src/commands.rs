use serde::Serialize;
use socialnet_core::analysis::{
    anarchy_vs_monarchy, verify_lemma, windfall_experiment, FlipDirection, LemmaGrid, LemmaId, ScenarioComparison,
    WindfallReport, Winner,
};
use socialnet_core::equilibrium::{
    best_response_dynamics, brute_force_social_optimum, enumerate_pne, linear_config, DynamicsOutcome, Schedule,
};
use socialnet_core::netgame::{to_dot, InducedGraph};
use socialnet_core::social_matrix::classify;
use socialnet_core::{Cost, Error, NetGameConfig, PurchaseProfile, Result, SocialRangeMatrix};

use crate::output::{cost_cells, read, write_csv, write_json, write_text};
use crate::{
    AnarchyMonarchyArgs, ClassifyArgs, Cli, Command, DynamicsArgs, EnumerateArgs, ExperimentKind, FlipArgs,
    OptimumArgs, Status, VerifyArgs,
};

/// Runs one command. Errors are reported on standard error and mapped to
/// exit statuses.
pub fn run(cli: Cli) -> Status {
    let result = match cli.command {
        Command::Enumerate(a) => enumerate(a),
        Command::Optimum(a) => optimum(a),
        Command::Dynamics(a) => dynamics(a),
        Command::Experiment(e) => match e.kind {
            ExperimentKind::AnarchyMonarchy(a) => anarchy_monarchy(a),
            ExperimentKind::Windfall(a) => flips(a, FlipDirection::Friendship),
            ExperimentKind::IllWill(a) => flips(a, FlipDirection::IllWill),
            ExperimentKind::VerifyLemmas(a) => verify(a),
        },
        Command::Classify(a) => classify_matrix(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        match e {
            Error::CapExceeded { .. } => Status::CapExceeded,
            _ => Status::Failed,
        }
    })
}

fn load_config(path: &std::path::Path) -> Result<NetGameConfig> {
    NetGameConfig::from_json(&read(path)?)
}

fn load_matrix(path: &std::path::Path) -> Result<SocialRangeMatrix> {
    SocialRangeMatrix::parse_any(&read(path)?)
}

fn enumerate(a: EnumerateArgs) -> Result<Status> {
    let config = load_config(&a.game)?;
    let matrix = load_matrix(&a.matrix)?;
    let report = enumerate_pne(&config, &matrix, a.cap, a.method.into())?;
    if let Some(dot) = &a.dot {
        let best = report.pne.iter().min_by(|x, y| x.cost.cmp(&y.cost));
        let profile = best.map_or_else(|| PurchaseProfile::empty(config.n), |e| e.profile.clone());
        write_text(Some(dot), &to_dot(&profile))?;
    }
    write_json(a.out.as_deref(), &report)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct OptimumReport {
    config: NetGameConfig,
    #[serde(with = "socialnet_core::report::cost_json")]
    cost: Cost,
    /// Number of optimal graphs.
    count: usize,
    /// The first optimal graphs in edge-subset order, as edge lists.
    graphs: Vec<Vec<(usize, usize)>>,
    /// The first optimal graph with each link paid by its lower endpoint.
    profile: PurchaseProfile,
}

fn optimum(a: OptimumArgs) -> Result<Status> {
    let config = load_config(&a.game)?;
    let opt = brute_force_social_optimum(&config)?;
    let report = OptimumReport {
        config,
        cost: opt.cost,
        count: opt.count,
        graphs: opt.graphs.iter().map(InducedGraph::edges).collect(),
        profile: opt.profile(),
    };
    if let Some(dot) = &a.dot {
        write_text(Some(dot), &to_dot(&report.profile))?;
    }
    write_json(a.out.as_deref(), &report)?;
    Ok(Status::Ok)
}

fn parse_schedule(s: &str) -> Result<Schedule> {
    if s == "round-robin" {
        return Ok(Schedule::RoundRobin);
    }
    let order = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad schedule entry `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule::Order(order))
}

fn dynamics(a: DynamicsArgs) -> Result<Status> {
    let config = load_config(&a.game)?;
    let matrix = load_matrix(&a.matrix)?;
    let start = match a.start.as_str() {
        "empty" => PurchaseProfile::empty(config.n),
        path => PurchaseProfile::from_json(&read(std::path::Path::new(path))?)?,
    };
    let schedule = parse_schedule(&a.schedule)?;
    let trace = best_response_dynamics(&config, &matrix, &start, &schedule, a.max_steps)?;
    if let Some(dot) = &a.dot {
        let last = PurchaseProfile::new(trace.outcome.profile().to_vec())?;
        write_text(Some(dot), &to_dot(&last))?;
    }
    write_json(a.trace.as_deref(), &trace)?;
    Ok(match trace.outcome {
        DynamicsOutcome::Converged { .. } => Status::Ok,
        DynamicsOutcome::Cycle { first_seen, repeat_at, .. } => {
            eprintln!("cycle: profile after step {repeat_at} repeats the one after step {first_seen}");
            Status::Cycle
        }
        DynamicsOutcome::Cutoff { .. } => {
            eprintln!("cutoff: still improving after {} steps", a.max_steps);
            Status::Cutoff
        }
    })
}

fn winner_name(w: Winner) -> &'static str {
    match w {
        Winner::Anarchy => "anarchy",
        Winner::Monarchy => "monarchy",
        Winner::Tie => "tie",
    }
}

fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn anarchy_monarchy(a: AnarchyMonarchyArgs) -> Result<Status> {
    let mut rows = Vec::new();
    let mut results: Vec<ScenarioComparison> = Vec::new();
    for &n in &a.players {
        for &alpha in &a.alphas {
            let c = anarchy_vs_monarchy(n, alpha)?;
            let mut row = vec![n.to_string(), alpha.to_string()];
            for (cost, closed) in [
                (c.anarchy.cost, c.anarchy.closed_form),
                (c.monarchy.cost, c.monarchy.closed_form),
                (c.optimum_cost, c.optimum_closed_form),
            ] {
                row.extend(cost_cells(cost));
                row.push(closed.to_string());
            }
            row.push(winner_name(c.winner).to_string());
            row.push(verdict(c.matches_closed_forms()));
            row.push(c.note.clone().unwrap_or_default());
            rows.push(row);
            if !c.matches_closed_forms() {
                eprintln!("closed form missed at n={n} alpha={alpha}");
            }
            results.push(c);
        }
    }
    if let Some(path) = &a.output.csv {
        let header = [
            "n",
            "alpha",
            "anarchy_cost",
            "anarchy_decimal",
            "anarchy_closed_form",
            "monarchy_cost",
            "monarchy_decimal",
            "monarchy_closed_form",
            "optimum_cost",
            "optimum_decimal",
            "optimum_closed_form",
            "winner",
            "verdict",
            "note",
        ];
        write_csv(path, &header, &rows)?;
    }
    write_json(a.output.out.as_deref(), &results)?;
    Ok(if results.iter().all(ScenarioComparison::matches_closed_forms) { Status::Ok } else { Status::Failed })
}

fn flip_config(a: &FlipArgs) -> Result<NetGameConfig> {
    match (&a.game, a.players, a.alpha) {
        (Some(path), _, _) => load_config(path),
        (None, Some(n), Some(alpha)) => {
            let config = linear_config(n, alpha, 1);
            config.validate()?;
            Ok(config)
        }
        _ => Err(Error::InvalidParameter("give either --game or both --n and --alpha".into())),
    }
}

fn flips(a: FlipArgs, direction: FlipDirection) -> Result<Status> {
    let config = flip_config(&a)?;
    let matrix = match &a.matrix {
        Some(path) => load_matrix(path)?,
        None => SocialRangeMatrix::identity(config.n)?,
    };
    let report = windfall_experiment(&config, &matrix, &a.flips, direction)?;
    if let Some(path) = &a.output.csv {
        write_csv(path, &flip_header(), &[flip_row(&report)])?;
    }
    write_json(a.output.out.as_deref(), &report)?;
    if !report.holds() {
        eprintln!("equilibrium cost moved against the claimed direction");
    }
    Ok(if report.holds() { Status::Ok } else { Status::Failed })
}

fn flip_header() -> Vec<&'static str> {
    vec![
        "n",
        "alpha",
        "direction",
        "flips",
        "worst_before",
        "worst_before_decimal",
        "worst_after",
        "worst_after_decimal",
        "best_before",
        "best_before_decimal",
        "best_after",
        "best_after_decimal",
        "constructed_before",
        "constructed_before_decimal",
        "constructed_after",
        "constructed_after_decimal",
        "verdict",
    ]
}

fn flip_row(r: &WindfallReport) -> Vec<String> {
    let direction = match r.direction {
        FlipDirection::Friendship => "friendship",
        FlipDirection::IllWill => "ill-will",
    };
    let flips: Vec<String> = r.flips.iter().map(|(i, j)| format!("{i}-{j}")).collect();
    let mut row = vec![r.config.n.to_string(), r.config.alpha.to_string(), direction.to_string(), flips.join(" ")];
    for (before, after) in [
        (r.before.worst_cost, r.after.worst_cost),
        (r.before.best_cost, r.after.best_cost),
        (r.before.constructed_cost, r.after.constructed_cost),
    ] {
        row.extend(cost_cells(before));
        row.extend(cost_cells(after));
    }
    row.push(verdict(r.holds()));
    row
}

fn grid(a: &VerifyArgs) -> LemmaGrid {
    let mut g = LemmaGrid::default();
    if !a.players.is_empty() {
        g.players = a.players.clone();
    }
    if !a.alphas.is_empty() {
        g.alphas = a.alphas.clone();
    }
    if !a.radii.is_empty() {
        g.radii = a.radii.clone();
    }
    if !a.utilities.is_empty() {
        g.utilities = a.utilities.clone();
    }
    if let Some(s) = a.samples {
        g.samples = s;
    }
    g
}

fn opt_string<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn verify(a: VerifyArgs) -> Result<Status> {
    let grid = grid(&a);
    if let Some(&n) = grid.players.iter().find(|&&n| n > 6) {
        return Err(Error::InvalidParameter(format!("n = {n} is beyond the brute-force limit of 6")));
    }
    let lemmas = if a.lemmas.is_empty() { LemmaId::ALL.to_vec() } else { a.lemmas.clone() };
    let mut verdicts = Vec::new();
    for lemma in lemmas {
        verdicts.extend(verify_lemma(lemma, &grid)?);
    }
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.passed()).collect();
    for v in &failed {
        eprintln!("FAIL {} {}: {}", v.lemma, v.point, v.note.as_deref().unwrap_or(""));
    }
    eprintln!("{} verdicts, {} failed", verdicts.len(), failed.len());
    if let Some(path) = &a.output.csv {
        let header = [
            "lemma",
            "n",
            "alpha",
            "radius",
            "utility",
            "detail",
            "precondition",
            "conclusion",
            "verdict",
            "counterexample",
            "note",
        ];
        let rows: Vec<Vec<String>> = verdicts
            .iter()
            .map(|v| {
                vec![
                    v.lemma.to_string(),
                    v.point.n.to_string(),
                    opt_string(v.point.alpha),
                    opt_string(v.point.radius),
                    opt_string(v.point.utility.map(|u| u.name())),
                    v.point.detail.clone().unwrap_or_default(),
                    v.precondition.to_string(),
                    v.conclusion.to_string(),
                    verdict(v.passed()),
                    opt_string(v.counterexample.as_ref()),
                    v.note.clone().unwrap_or_default(),
                ]
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }
    write_json(a.output.out.as_deref(), &verdicts)?;
    Ok(if failed.is_empty() { Status::Ok } else { Status::Failed })
}

#[derive(Serialize)]
struct Classification {
    n: usize,
    #[serde(flatten)]
    profile: socialnet_core::social_matrix::SocietyProfile,
}

fn classify_matrix(a: ClassifyArgs) -> Result<Status> {
    let matrix = load_matrix(&a.matrix)?;
    write_json(a.out.as_deref(), &Classification { n: matrix.n(), profile: classify(&matrix) })?;
    Ok(Status::Ok)
}
