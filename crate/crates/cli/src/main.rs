mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use cfdim::construct::{
    check_distortion, check_gap, make_set, sample_point, Chooser, DigitRule, DistortionOptions, Magnitude,
    SetKind, SetParams,
};
use cfdim::dimension::{
    cover_upper_bound, em_report, estimate_s, jarnik_bounds, limit_formula_spec, predict, Which,
    S_DEFAULT_DEPTH, S_DEFAULT_MS,
};
use cfdim::stochastic::{bb_experiment, limsup_statistic};
use cfdim::{cylinder, expand, DigitWord, Error, GrowthSpec, Rational, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use run::{csv, RunDir};

#[derive(Parser)]
#[command(
    name = "cfdim",
    version,
    about = "Continued-fraction digit growth and Hausdorff dimension experiments"
)]
struct Cli {
    /// Worker threads for parallel checks (0 = all cores).
    #[arg(long, global = true, env = "CFDIM_THREADS", default_value_t = 0)]
    threads: usize,

    /// Directory under which run directories are created.
    #[arg(long, global = true, env = "CFDIM_OUT", default_value = "runs")]
    out: PathBuf,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical digits of a rational `p/q` in [0, 1).
    Expand { x: String },
    /// Print the cylinder of a digit word such as `2,3` or `"2 3"`.
    Cylinder {
        word: String,
        #[arg(long)]
        json: bool,
    },
    /// Limits A, B, xi and the regime of a growth function.
    Asymptotics(AsymptoticsArgs),
    /// Closed-form dimension of E_sup, E or E_inf.
    Predict(PredictArgs),
    /// Moran, limit-formula or cover-count estimates.
    Estimate(EstimateArgs),
    /// Build a Cantor set, sample a point and run the finite-depth checks.
    Construct(ConstructArgs),
    /// Monte Carlo experiments on random continued fractions.
    Montecarlo(MonteCarloArgs),
}

#[derive(Args, Serialize)]
struct AsymptoticsArgs {
    #[arg(long)]
    psi: String,
    #[arg(long, default_value_t = 4096)]
    horizon: u64,
}

#[derive(Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    psi: String,
    /// sup, lim or inf.
    #[arg(long = "set")]
    which: String,
    #[arg(long, default_value_t = 4096)]
    horizon: u64,
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("target").required(true).args(["em", "s", "limit", "cover"])))]
struct EstimateArgs {
    /// Moran root of E_M.
    #[arg(long)]
    em: Option<u64>,
    /// Bracket on S(alpha) from the F_M sets.
    #[arg(long, value_name = "ALPHA")]
    s: Option<f64>,
    /// Truncated limit formula for the spec given by --psi.
    #[arg(long, requires = "psi")]
    limit: bool,
    /// Cover counts for the spec given by --psi.
    #[arg(long, requires = "psi")]
    cover: bool,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Values of M for --s.
    #[arg(long, value_delimiter = ',')]
    ms: Vec<u64>,
}

#[derive(Args, Serialize)]
struct ConstructArgs {
    /// e-m-psi, f-m-alpha, e-dn, e-lower or e-inf-ln.
    #[arg(long = "set")]
    kind: String,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 20)]
    depth: usize,
    /// min, max or random:SEED.
    #[arg(long)]
    sample: Option<String>,
    /// Parent levels for the gap check.
    #[arg(long, value_delimiter = ',')]
    check_gap: Vec<usize>,
    /// Levels for the distortion check.
    #[arg(long, value_delimiter = ',')]
    check_distortion: Vec<usize>,
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("experiment").required(true).args(["bb", "limsup"])))]
struct MonteCarloArgs {
    /// Count n <= N with a_n >= psi(n).
    #[arg(long, requires = "psi")]
    bb: bool,
    /// max_{n <= N} log a_n / (log n log log n).
    #[arg(long)]
    limsup: bool,
    #[arg(long)]
    psi: Option<String>,
    /// Horizon N.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T> {
    s.parse()
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn document(command: &str, precision: Value, result: Value) -> Result<Vec<u8>> {
    let doc = json!({
        "schema_version": run::SCHEMA_VERSION,
        "command": command,
        "precision": precision,
        "result": result,
    });
    Ok((serde_json::to_string_pretty(&doc)? + "\n").into_bytes())
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_expand(x: &str) -> Result<()> {
    let w = expand(&parse::<Rational>(x)?)?;
    let digits: Vec<String> = w.digits().iter().map(u64::to_string).collect();
    println!("{}", digits.join(" "));
    Ok(())
}

fn cmd_cylinder(word: &str, as_json: bool) -> Result<()> {
    let c = cylinder(&parse::<DigitWord>(word)?);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&c)?);
    } else {
        println!("word    {}", c.word);
        println!("left    {}", c.left);
        println!("right   {}", c.right);
        println!("length  {} (exact rational)", c.length());
    }
    Ok(())
}

fn cmd_asymptotics(cli: &Cli, a: &AsymptoticsArgs) -> Result<Option<PathBuf>> {
    let spec: GrowthSpec = parse(&a.psi)?;
    let r = spec.asymptotics(a.horizon)?;
    let source = if r.closed_form.is_some() { "closed form" } else { "tail-window proxy" };
    println!("psi {spec}: regime {}, A = {}, B = {}, xi = {} ({source})", r.regime, r.a, r.b, r.xi);
    let mut run = RunDir::new(&cli.out, "asymptotics", to_value(a)?, None);
    let precision = json!({ "kind": source, "horizon": a.horizon });
    run.write("report.json", &document("asymptotics", precision, to_value(&r)?)?);
    run.write("trace.csv", csv(&r.trace)?.as_bytes());
    Ok(Some(run.finish(rayon::current_num_threads())?))
}

fn cmd_predict(cli: &Cli, a: &PredictArgs) -> Result<Option<PathBuf>> {
    let spec: GrowthSpec = parse(&a.psi)?;
    let which: Which = parse(&a.which)?;
    let r = predict(&spec, which, a.horizon)?;
    println!("dim {which}({spec}) = {} [{:?}]", r.value, r.method);
    warn(&r.warnings);
    let mut run = RunDir::new(&cli.out, "predict", to_value(a)?, None);
    let precision =
        json!({ "kind": if r.value.exact().is_some() { "exact" } else { "f64" }, "horizon": a.horizon });
    run.write("report.json", &document("predict", precision, to_value(&r)?)?);
    run.write("trace.csv", r.trace_csv().as_bytes());
    Ok(Some(run.finish(rayon::current_num_threads())?))
}

fn cmd_estimate(cli: &Cli, a: &EstimateArgs) -> Result<Option<PathBuf>> {
    let mut run = RunDir::new(&cli.out, "estimate", to_value(a)?, None);
    let tol = json!({ "kind": "bisection", "tolerance": a.tol });
    if let Some(m) = a.em {
        let depth = a.depth.unwrap_or(10);
        let depths: Vec<usize> = (1..=depth).collect();
        let r = em_report(m, &depths, a.tol)?;
        let bracket = jarnik_bounds(m)
            .map(|j| format!(", Jarnik bracket [{:.6}, {:.6}]", j.lo, j.hi))
            .unwrap_or_default();
        println!("dim E_{m} ~ {} (Moran root at depth {depth}{bracket})", r.value);
        warn(&r.warnings);
        run.write("report.json", &document("estimate", tol, to_value(&r)?)?);
        run.write("trace.csv", r.trace_csv().as_bytes());
    } else if let Some(alpha) = a.s {
        let depth = a.depth.unwrap_or(S_DEFAULT_DEPTH);
        let ms = if a.ms.is_empty() { S_DEFAULT_MS.to_vec() } else { a.ms.clone() };
        let r = estimate_s(alpha, &ms, depth, a.tol)?;
        println!("S({alpha}) in [{:.6}, {:.6}] (F_M Moran roots at depth {depth})", r.lo, r.hi);
        #[derive(Serialize)]
        struct Row {
            m: u64,
            root: f64,
            lo: f64,
            hi: f64,
            method: String,
        }
        let rows: Vec<Row> = r
            .per_m
            .iter()
            .map(|(m, e)| Row { m: *m, root: e.root, lo: e.lo, hi: e.hi, method: format!("{:?}", e.method) })
            .collect();
        run.write("report.json", &document("estimate", tol, to_value(&r)?)?);
        run.write("trace.csv", csv(&rows)?.as_bytes());
    } else {
        let spec: GrowthSpec = parse(a.psi.as_deref().unwrap_or_default())?;
        let depth = a.depth.unwrap_or(20);
        if a.limit {
            let r = limit_formula_spec(&spec, depth as u64)?;
            let last = r.values.last().copied().unwrap_or(f64::NAN);
            let proxy = r.liminf_proxy.last().copied().unwrap_or(f64::NAN);
            println!("limit formula for {spec} at depth {depth}: {last:.10}, liminf proxy {proxy:.10}");
            #[derive(Serialize)]
            struct Row {
                depth: usize,
                value: f64,
                liminf_proxy: f64,
            }
            let rows: Vec<Row> = r
                .values
                .iter()
                .zip(&r.liminf_proxy)
                .enumerate()
                .map(|(i, (&value, &liminf_proxy))| Row { depth: i + 1, value, liminf_proxy })
                .collect();
            let precision = json!({ "kind": "truncated limit", "depth": depth });
            run.write("report.json", &document("estimate", precision, to_value(&r)?)?);
            run.write("trace.csv", csv(&rows)?.as_bytes());
        } else {
            let r = cover_upper_bound(&spec, a.eps, depth as u64)?;
            let within = r.rows.iter().filter(|row| row.within_bound).count();
            println!(
                "cover counts for {spec}, eps {}: {within} of {} levels within the product bound, quotient liminf proxy {:?}, target {:?}",
                a.eps,
                r.rows.len(),
                r.liminf_proxy(),
                r.target
            );
            if !r.empty_windows.is_empty() {
                eprintln!("warning: empty digit windows at {:?}", r.empty_windows);
            }
            let precision =
                json!({ "kind": "exact counts where representable, else log domain", "depth": depth });
            run.write("report.json", &document("estimate", precision, to_value(&r)?)?);
            run.write("trace.csv", csv(&r.rows)?.as_bytes());
        }
    }
    Ok(Some(run.finish(rayon::current_num_threads())?))
}

/// Whether digit magnitude `d` lies in `rule`; log-domain digits are compared in the log domain.
fn within(rule: &DigitRule, d: &Magnitude) -> bool {
    match *d {
        Magnitude::Int(v) => rule.admits(v),
        Magnitude::Log(x) => {
            let slack = 1e-12 * x.abs().max(1.0);
            rule.lo().ln() <= x + slack && x <= rule.hi().ln() + slack
        }
    }
}

fn cmd_construct(cli: &Cli, a: &ConstructArgs) -> Result<Option<PathBuf>> {
    let kind: SetKind = parse(&a.kind)?;
    let params = SetParams {
        spec: a.psi.as_deref().map(parse::<GrowthSpec>).transpose()?,
        m: a.m,
        eps: a.eps,
        alpha: a.alpha,
    };
    let set = make_set(kind, &params, a.depth)?;
    println!("{kind}: M = {}, depth {}, sparse indices {:?}", set.m, set.depth, set.sparse_indices);
    warn(&set.warnings);

    let seed = match a.sample.as_deref().map(parse::<Chooser>).transpose()? {
        Some(Chooser::Random(s)) => Some(s),
        _ => None,
    };
    let mut run = RunDir::new(&cli.out, "construct", to_value(a)?, seed);
    run.write("set.json", (set.to_json()? + "\n").as_bytes());

    #[derive(Serialize)]
    struct Row {
        n: usize,
        lo: String,
        hi: String,
        ln_count: f64,
        sparse: bool,
    }
    let rows: Vec<Row> = set
        .constraint
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| Row {
            n: i + 1,
            lo: r.lo().to_string(),
            hi: r.hi().to_string(),
            ln_count: r.ln_count(),
            sparse: set.sparse_indices.contains(&(i as u64 + 1)),
        })
        .collect();
    run.write("trace.csv", csv(&rows)?.as_bytes());

    if let Some(chooser) = &a.sample {
        let p = sample_point(&set, parse(chooser)?, a.depth)?;
        let admissible = match &p.word {
            Some(w) => set.admits(w),
            None => p
                .digits
                .iter()
                .enumerate()
                .all(|(i, d)| set.constraint.rule(i + 1).is_some_and(|r| within(r, d))),
        };
        match &p.word {
            Some(w) => println!("sample word {w}"),
            None => {
                let digits: Vec<String> = p.digits.iter().map(Magnitude::to_string).collect();
                println!("sample digits [{}] (e^x marks digits kept as logarithms)", digits.join(","));
            }
        }
        println!(
            "admissible {admissible}; ln|I_n| in [{:.6e}, {:.6e}]{}",
            p.bounds.ln_length_lo,
            p.bounds.ln_length_hi,
            if p.certified_bounds_only { " (log-domain bounds only)" } else { " (exact cylinder)" }
        );
        let precision = json!({
            "kind": if p.certified_bounds_only { "log-domain bounds" } else { "exact" },
        });
        let mut result = to_value(&p)?;
        result["admissible"] = Value::Bool(admissible);
        run.write("sample.json", &document("construct", precision, result)?);
    }

    if !a.check_gap.is_empty() || !a.check_distortion.is_empty() {
        let mut gap = Vec::new();
        for &n in &a.check_gap {
            let r = check_gap(&set, n)?;
            println!(
                "gap level {n}: {} pairs, {} violations, min gap/bound {:.4}",
                r.level.pairs,
                r.violations.len(),
                r.level.min_ratio
            );
            gap.push(r);
        }
        let mut distortion = Vec::new();
        let opts = DistortionOptions::new(a.eps.unwrap_or(1.0));
        for &n in &a.check_distortion {
            let r = check_distortion(&set, n, &opts)?;
            println!(
                "distortion level {n}: N1 = {:?}, asserted {}, {} words, {} violations",
                r.n1,
                r.level.asserted,
                r.level.words_checked,
                r.asserted_violations()
            );
            distortion.push(r);
        }
        let precision = json!({ "kind": "exact rational comparisons", "distortion_sample_seed": opts.seed });
        let result = json!({ "gap": to_value(&gap)?, "distortion": to_value(&distortion)? });
        run.write("checks.json", &document("construct", precision, result)?);
    }
    Ok(Some(run.finish(rayon::current_num_threads())?))
}

fn cmd_montecarlo(cli: &Cli, a: &MonteCarloArgs) -> Result<Option<PathBuf>> {
    let r = if a.bb {
        let spec: GrowthSpec = parse(a.psi.as_deref().unwrap_or_default())?;
        bb_experiment(&spec, a.samples, a.n, a.seed)?
    } else {
        limsup_statistic(a.samples, a.n, a.seed)?
    };
    let s = &r.summary;
    if a.bb {
        println!(
            "hits per sample: mean {:.4} (expected {:?}), first quarter {:.4}, last quarter {:.4}; {} samples, seed {}",
            s.mean_hits, s.expected_hits, s.mean_hits_quarter, s.mean_hits_late, a.samples, a.seed
        );
    } else {
        println!(
            "limsup statistic: median {:.4}, IQR {:.4}; {} samples, seed {}",
            s.median, s.iqr, a.samples, a.seed
        );
    }
    let mut run = RunDir::new(&cli.out, "montecarlo", to_value(a)?, Some(a.seed));
    let precision = json!({
        "kind": "statistical",
        "samples": a.samples,
        "generator": "ChaCha8, one stream per sample",
        "bit_budget": r.config.bit_budget,
    });
    run.write("report.json", &document("montecarlo", precision, to_value(&r)?)?);
    run.write("samples.csv", r.to_csv().as_bytes());
    Ok(Some(run.finish(rayon::current_num_threads())?))
}

fn dispatch(cli: &Cli) -> Result<Option<PathBuf>> {
    match &cli.cmd {
        Command::Expand { x } => cmd_expand(x).map(|_| None),
        Command::Cylinder { word, json } => cmd_cylinder(word, *json).map(|_| None),
        Command::Asymptotics(a) => cmd_asymptotics(cli, a),
        Command::Predict(a) => cmd_predict(cli, a),
        Command::Estimate(a) => cmd_estimate(cli, a),
        Command::Construct(a) => cmd_construct(cli, a),
        Command::Montecarlo(a) => cmd_montecarlo(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(Some(dir)) => {
            println!("run {}", dir.display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
