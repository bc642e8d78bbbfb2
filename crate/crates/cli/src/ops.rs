//! Command implementations. Every artifact starts with a "#" comment header
//! recording the resolved run configuration, so identical configurations
//! produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use netprior::admm::SolverConfig;
use netprior::error::{Error, Result};
use netprior::eval::{bound_value, correct_curve, default_release_budget, release_eval, BoundInputs};
use netprior::graph::{
    sample_observations_with_report, save_edge_list, save_mask, SamplingMode, SamplingSpec,
};
use netprior::pipeline::{
    cross_validate, infer_scores, HyperGrid, Hyperparams, Method, Prediction, PredictionSet,
};
use netprior::{generate_power_law, ObservationMask};

use crate::labels::{
    load_mask_flexible, load_network_flexible, write_idmap_if_labeled, LabelSpace,
};
use crate::{
    BoundArgs, Command, CvArgs, EvalArgs, GenerateArgs, InferArgs, ReleasesArgs, RunStatus,
    SampleArgs, SolverArgs,
};

pub fn run(command: Command) -> Result<RunStatus> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Sample(args) => sample(args),
        Command::Infer(args) => infer(args),
        Command::Cv(args) => cv(args),
        Command::Eval(args) => eval(args),
        Command::Releases(args) => releases(args),
        Command::Bound(args) => bound(args),
    }
}

fn header(command: &str, pairs: &[(&str, String)]) -> Vec<String> {
    let mut lines = vec![format!("netprior {command}")];
    for (k, v) in pairs {
        lines.push(format!("{k}={v}"));
    }
    lines
}

fn solver_pairs(s: &SolverArgs) -> Vec<(&'static str, String)> {
    vec![
        ("rho", s.rho.to_string()),
        ("lambda", s.lambda.to_string()),
        ("c", s.c.to_string()),
        ("alpha", s.alpha.to_string()),
        ("rank", s.rank.to_string()),
        ("eta", s.eta.to_string()),
        ("outer_iters", s.outer_iters.to_string()),
    ]
}

fn solver_config(s: &SolverArgs, seed: u64) -> SolverConfig {
    SolverConfig {
        rho: s.rho,
        lambda: s.lambda,
        eta: s.eta,
        rank: s.rank,
        outer_iters: s.outer_iters,
        seed,
        ..Default::default()
    }
}

fn hyperparams(s: &SolverArgs) -> Hyperparams {
    Hyperparams {
        rho: s.rho,
        lambda: s.lambda,
        c: s.c,
        alpha: s.alpha,
    }
}

fn total_pairs(p: usize) -> usize {
    p * (p - 1) / 2
}

fn resolve_k(k: Option<usize>, k_fraction: Option<f64>, p: usize) -> Result<usize> {
    match (k, k_fraction) {
        (Some(k), None) => Ok(k),
        (None, Some(f)) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidParam(format!(
                    "k-fraction must lie in (0,1], got {f}"
                )));
            }
            Ok(((f * total_pairs(p) as f64).round() as usize).max(1))
        }
        (None, None) => Err(Error::InvalidParam(
            "one of --k or --k-fraction is required".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap marks the flags as conflicting"),
    }
}

fn write_lines(path: &str, header_lines: &[String], body: &[String]) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for line in header_lines {
        writeln!(w, "# {line}")?;
    }
    for line in body {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<RunStatus> {
    let net = generate_power_law(args.p, args.m, args.seed)?;
    let pairs = [
        ("p", args.p.to_string()),
        ("m", args.m.to_string()),
        ("seed", args.seed.to_string()),
    ];
    save_edge_list(&net, &args.out, &header("generate", &pairs))?;
    println!("generated p={} edges={} -> {}", net.p(), net.num_edges(), args.out);
    Ok(RunStatus::Success)
}

fn parse_mode(s: &str) -> Result<SamplingMode> {
    match s {
        "uniform" => Ok(SamplingMode::Uniform),
        "over" => Ok(SamplingMode::Over),
        "under" => Ok(SamplingMode::Under),
        other => Err(Error::InvalidParam(format!("unknown sampling mode {other:?}"))),
    }
}

fn sample(args: SampleArgs) -> Result<RunStatus> {
    let mut space = LabelSpace::new();
    let net = load_network_flexible(&args.input, &mut space)?;
    let spec = SamplingSpec {
        mode: parse_mode(&args.mode)?,
        rate_hub: args.rate_hub,
        rate_nonhub: args.rate_nonhub,
        hub_fraction: args.hub_fraction,
        seed: args.seed,
    };
    let (mask, report) = sample_observations_with_report(&net, &spec)?;
    let pairs = [
        ("input", args.input.clone()),
        ("mode", args.mode.clone()),
        ("rate_hub", args.rate_hub.to_string()),
        ("rate_nonhub", args.rate_nonhub.to_string()),
        ("hub_fraction", args.hub_fraction.to_string()),
        ("seed", args.seed.to_string()),
    ];
    save_mask(&mask, &args.out, &header("sample", &pairs))?;

    let report_lines = vec![
        format!("hub_kept={}", report.hub_kept),
        format!("hub_total={}", report.hub_total),
        format!("nonhub_kept={}", report.nonhub_kept),
        format!("nonhub_total={}", report.nonhub_total),
        format!("kept={}", mask.num_observed()),
        format!("total={}", net.num_edges()),
    ];
    let report_path = format!("{}.report", args.out);
    write_lines(&report_path, &header("sample", &pairs), &report_lines)?;
    if let Some(map_path) = write_idmap_if_labeled(&space, &args.out, &header("sample", &pairs))? {
        println!("labeled input mapped to dense ids; mapping -> {map_path}");
    }
    for line in &report_lines {
        println!("{line}");
    }
    Ok(RunStatus::Success)
}

fn write_predictions(
    path: &str,
    header_lines: &[String],
    preds: &PredictionSet,
) -> Result<()> {
    let body: Vec<String> = preds
        .entries()
        .iter()
        .enumerate()
        .map(|(idx, p)| format!("{}\t{}\t{}\t{}", p.u, p.v, p.score, idx + 1))
        .collect();
    write_lines(path, header_lines, &body)
}

fn infer(args: InferArgs) -> Result<RunStatus> {
    let mut space = LabelSpace::new();
    let mask = load_mask_flexible(&args.mask, &mut space)?;
    let k = resolve_k(args.k, args.k_fraction, mask.p())?;
    let method = Method::parse(&args.method)?;
    let out = infer_scores(
        &mask,
        k,
        method,
        &hyperparams(&args.solver),
        &solver_config(&args.solver, args.seed),
        args.seed,
    )?;
    let mut pairs = vec![
        ("mask", args.mask.clone()),
        ("k", k.to_string()),
        ("method", args.method.clone()),
    ];
    pairs.extend(solver_pairs(&args.solver));
    pairs.push(("seed", args.seed.to_string()));
    pairs.push(("converged", out.converged.to_string()));
    write_predictions(&args.out, &header("infer", &pairs), &out.predictions)?;
    if let Some(map_path) = write_idmap_if_labeled(&space, &args.out, &header("infer", &pairs))? {
        println!("labeled mask mapped to dense ids; mapping -> {map_path}");
    }
    println!(
        "wrote {} predictions -> {} (converged={})",
        out.predictions.len(),
        args.out,
        out.converged
    );
    Ok(if out.converged {
        RunStatus::Success
    } else {
        RunStatus::SolverDidNotConverge
    })
}

fn parse_grid_file(path: &str, grid: &mut HyperGrid) -> Result<()> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split(',');
        let name = fields.next().unwrap_or_default().trim();
        let values: Vec<f64> = fields
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad grid value {f:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "grid row needs at least one value".into(),
            });
        }
        match name {
            "rho" => grid.rho_values = values,
            "lambda" => grid.lambda_values = values,
            "c" => grid.c_values = values,
            "alpha" => grid.alpha_values = values,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown grid parameter {other:?}"),
                })
            }
        }
    }
    Ok(())
}

fn cv_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var("DEGREEPRIOR_THREADS") {
        Err(_) => Ok(None),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                Error::InvalidParam(format!("DEGREEPRIOR_THREADS must be a positive integer, got {raw:?}"))
            })?;
            if n == 0 {
                return Err(Error::InvalidParam(
                    "DEGREEPRIOR_THREADS must be a positive integer".into(),
                ));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
            Ok(Some(pool))
        }
    }
}

fn cv(args: CvArgs) -> Result<RunStatus> {
    let mut space = LabelSpace::new();
    let mask = load_mask_flexible(&args.mask, &mut space)?;
    let k = resolve_k(args.k, args.k_fraction, mask.p())?;
    let method = Method::parse(&args.method)?;
    let mut grid = HyperGrid {
        holdout_fraction: args.holdout,
        n_seeds: args.n_seeds,
        ..Default::default()
    };
    if let Some(path) = &args.grid {
        parse_grid_file(path, &mut grid)?;
    }
    let base = solver_config(&args.solver, args.seed);

    let outcome = match cv_pool()? {
        Some(pool) => pool.install(|| cross_validate(&mask, k, &grid, method, &base, args.seed)),
        None => cross_validate(&mask, k, &grid, method, &base, args.seed),
    }?;

    let mut pairs = vec![
        ("mask", args.mask.clone()),
        ("k", k.to_string()),
        ("method", args.method.clone()),
        ("holdout", args.holdout.to_string()),
        ("n_seeds", args.n_seeds.to_string()),
    ];
    if let Some(g) = &args.grid {
        pairs.push(("grid", g.clone()));
    }
    pairs.extend(solver_pairs(&args.solver));
    pairs.push(("seed", args.seed.to_string()));
    let header_lines = header("cv", &pairs);

    let mut body = vec!["rho,lambda,c,alpha,seed,score".to_string()];
    for cell in &outcome.cells {
        for (s, score) in cell.scores.iter().enumerate() {
            body.push(format!(
                "{},{},{},{},{},{}",
                cell.hyper.rho, cell.hyper.lambda, cell.hyper.c, cell.hyper.alpha, s, score
            ));
        }
    }
    write_lines(&args.out, &header_lines, &body)?;

    let best = outcome.best;
    let best_lines = vec![
        format!("rho={}", best.rho),
        format!("lambda={}", best.lambda),
        format!("c={}", best.c),
        format!("alpha={}", best.alpha),
    ];
    let best_path = format!("{}.best", args.out);
    write_lines(&best_path, &header_lines, &best_lines)?;
    if let Some(map_path) = write_idmap_if_labeled(&space, &args.out, &header_lines)? {
        println!("labeled mask mapped to dense ids; mapping -> {map_path}");
    }
    for line in &best_lines {
        println!("{line}");
    }
    Ok(if outcome.all_converged {
        RunStatus::Success
    } else {
        RunStatus::SolverDidNotConverge
    })
}

fn load_predictions(path: &str) -> Result<PredictionSet> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected u, v, score columns".into(),
            });
        }
        let parse_id = |f: &str| -> Result<usize> {
            f.parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad node id {f:?}: {e}"),
            })
        };
        let u = parse_id(fields[0])?;
        let v = parse_id(fields[1])?;
        let score: f64 = fields[2].parse().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad score {:?}: {e}", fields[2]),
        })?;
        entries.push(Prediction { u, v, score });
    }
    PredictionSet::from_entries(entries)
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|f| {
            f.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidParam(format!("bad {what} value {f:?}")))
        })
        .collect()
}

fn eval(args: EvalArgs) -> Result<RunStatus> {
    let preds = load_predictions(&args.input)?;
    let mut space = match &args.id_map {
        Some(path) => LabelSpace::from_file(path)?,
        None => LabelSpace::new(),
    };
    let truth = load_network_flexible(&args.truth, &mut space)?;
    let mask = load_mask_flexible(&args.mask, &mut space)?;
    let ks: Vec<usize> = match (&args.k, &args.k_fraction) {
        (Some(raw), None) => parse_list(raw, "budget")?,
        (None, Some(raw)) => {
            let fractions: Vec<f64> = parse_list(raw, "budget fraction")?;
            let total = total_pairs(truth.p());
            fractions
                .iter()
                .map(|f| ((f * total as f64).round() as usize).max(1))
                .collect()
        }
        (None, None) => {
            return Err(Error::InvalidParam("one of --k or --k-fraction is required".into()))
        }
        (Some(_), Some(_)) => unreachable!("clap marks the flags as conflicting"),
    };
    let curve = correct_curve(&preds, &truth, &mask, &ks)?;

    let pairs = [
        ("input", args.input.clone()),
        ("truth", args.truth.clone()),
        ("mask", args.mask.clone()),
        ("ks", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")),
    ];
    let mut body = vec!["k,fraction_of_pairs,correct".to_string()];
    for (k, correct) in curve.ks.iter().zip(&curve.correct) {
        body.push(format!(
            "{},{},{}",
            k,
            *k as f64 / curve.total_pairs as f64,
            correct
        ));
    }
    write_lines(&args.out, &header("eval", &pairs), &body)?;
    println!("wrote curve with {} budgets -> {}", curve.ks.len(), args.out);
    Ok(RunStatus::Success)
}

fn releases(args: ReleasesArgs) -> Result<RunStatus> {
    let mut space = LabelSpace::new();
    let old = load_network_flexible(&args.old, &mut space)?;
    let new = load_network_flexible(&args.new, &mut space)?;
    let mask = ObservationMask::new(old.p(), old.edges())?;
    let k = match (args.k, args.k_fraction) {
        (None, None) => default_release_budget(old.p()),
        (k, f) => resolve_k(k, f, old.p())?,
    };
    let methods: Vec<Method> = match &args.method {
        Some(m) => vec![Method::parse(m)?],
        None => vec![Method::Tri, Method::TriL1, Method::TriDegree],
    };
    let hyper = hyperparams(&args.solver);
    let base = solver_config(&args.solver, args.seed);

    let mut all_converged = true;
    let mut lines = Vec::new();
    for method in methods {
        let out = infer_scores(&mask, k, method, &hyper, &base, args.seed)?;
        all_converged &= out.converged;
        let ratio = release_eval(&old, &new, &out.predictions, k)?;
        lines.push(format!("{}\t{}", method.name(), ratio));
    }
    for line in &lines {
        println!("{line}");
    }
    if let Some(path) = &args.out {
        let mut pairs = vec![
            ("old", args.old.clone()),
            ("new", args.new.clone()),
            ("k", k.to_string()),
        ];
        pairs.extend(solver_pairs(&args.solver));
        pairs.push(("seed", args.seed.to_string()));
        write_lines(path, &header("releases", &pairs), &lines)?;
        if let Some(map_path) = write_idmap_if_labeled(&space, path, &header("releases", &pairs))? {
            println!("labeled releases mapped to dense ids; mapping -> {map_path}");
        }
    }
    Ok(if all_converged {
        RunStatus::Success
    } else {
        RunStatus::SolverDidNotConverge
    })
}

fn bound(args: BoundArgs) -> Result<RunStatus> {
    let inputs = BoundInputs {
        t: args.t,
        r: args.r,
        s: args.s,
        d_star_max: args.d_star_max,
        d_max: args.d_max,
        alpha: args.alpha,
        rho: args.rho,
        q: args.q,
        delta: args.delta,
        c_universal: args.c_universal,
    };
    let breakdown = bound_value(&inputs)?;
    let lines = vec![
        format!("gamma={}", breakdown.gamma),
        format!("a_term={}", breakdown.a_term),
        format!("b_term={}", breakdown.b_term),
        format!("deviation={}", breakdown.deviation),
        format!("bound={}", breakdown.bound),
    ];
    for line in &lines {
        println!("{line}");
    }
    if let Some(path) = &args.out {
        let pairs = [
            ("t", args.t.to_string()),
            ("r", args.r.to_string()),
            ("s", args.s.to_string()),
            ("d_star_max", args.d_star_max.to_string()),
            ("d_max", args.d_max.to_string()),
            ("alpha", args.alpha.to_string()),
            ("rho", args.rho.to_string()),
            ("q", args.q.to_string()),
            ("delta", args.delta.to_string()),
            ("c_universal", args.c_universal.to_string()),
        ];
        write_lines(path, &header("bound", &pairs), &lines)?;
    }
    Ok(RunStatus::Success)
}
