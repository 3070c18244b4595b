use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader, Write as _};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::json;

use secretary_gap::algorithms::SingleSelection;
use secretary_gap::bounds::{
    alpha_exact, consistency, frontier_with, guarantee_bounded_error, guarantee_exact_gap,
    l_selection_bound, robustness, tau_for_k, two_three_tie_prob, two_three_tie_prob_exact,
    KAggregation,
};
use secretary_gap::generators::{
    read_replay, write_replay, InstanceFamily, ReplayHeader, SeededRng,
};
use secretary_gap::montecarlo::{
    estimate_cells, estimate_l_selection, AlgoKind, Cell, GapSpec, LSelectionConfig, ProfileSource,
    RatioEstimate, TauPolicy, Variant,
};
use secretary_gap::Error;

use crate::args::{
    BoundsArgs, Cli, Command, ExperimentArgs, FrontierArgs, InstancesArgs, ReplayArgs,
    SimulateArgs, SweepArgs, VerifyArgs,
};
use crate::checks;
use crate::CliError;

/// Header of every simulate and sweep CSV.
pub const CSV_HEADER: &str = "family,algo,n,iters,k,tau,gamma,sigma,epsilon,L,seed,ratio_mean,ratio_stderr,select_best_prob,none_prob";

/// Bumped whenever the CSV layout changes.
pub const CSV_SCHEMA: u32 = 1;

/// Record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; replaying parses them again.
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub master_seed: Option<u64>,
    pub version: String,
    pub csv_schema: u32,
    pub output: PathBuf,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }
}

/// Runs a parsed command. `argv` excludes the program name and is stored in
/// run manifests.
pub fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => {
            let csv = with_threads(a.exp.threads, || simulate_csv(&a))?;
            emit(
                a.exp.out.as_deref(),
                &csv,
                "simulate",
                argv,
                &a,
                Some(a.exp.seed),
            )
        }
        Command::Sweep(a) => {
            let csv = with_threads(a.exp.threads, || sweep_csv(&a))?;
            emit(
                a.exp.out.as_deref(),
                &csv,
                "sweep",
                argv,
                &a,
                Some(a.exp.seed),
            )
        }
        Command::Bounds(a) => {
            let json = bounds_json(&a)?;
            to_stdout(&format!("{json}\n"))
        }
        Command::Frontier(a) => {
            let csv = with_threads(a.threads, || frontier_csv(&a))?;
            emit(a.out.as_deref(), &csv, "frontier", argv, &a, None)
        }
        Command::Verify(a) => verify(&a),
        Command::Instances(a) => {
            let text = instances_text(&a)?;
            emit(a.out.as_deref(), &text, "instances", argv, &a, Some(a.seed))
        }
        Command::Replay(a) => replay(&a),
    }
}

pub(crate) fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::Usage("threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(f),
    }
}

fn emit<P: Serialize>(
    out: Option<&Path>,
    content: &str,
    command: &str,
    argv: &[String],
    params: &P,
    master_seed: Option<u64>,
) -> Result<(), CliError> {
    let Some(path) = out else {
        return to_stdout(content);
    };
    fs::write(path, content)?;
    let manifest = RunManifest {
        command: command.to_string(),
        argv: argv.to_vec(),
        params: serde_json::to_value(params).map_err(|e| CliError::Internal(e.to_string()))?,
        master_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        csv_schema: CSV_SCHEMA,
        output: path.to_path_buf(),
    };
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(RunManifest::path_for(path), text + "\n")?;
    Ok(())
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Parses a family name and applies the family-specific flags.
pub fn parse_family(name: &str, df: u32, factor: f64) -> Result<InstanceFamily, CliError> {
    let family = match name.parse::<InstanceFamily>()? {
        InstanceFamily::ChiSquared { .. } => InstanceFamily::ChiSquared { df },
        InstanceFamily::ExpSuperstar { .. } => InstanceFamily::ExpSuperstar { factor },
        other => other,
    };
    family.validate()?;
    Ok(family)
}

fn source_of(a: &ExperimentArgs) -> Result<(ProfileSource, usize, String), CliError> {
    match &a.replay_file {
        Some(path) => {
            let file = fs::File::open(path)
                .map_err(|e| usage(format!("cannot open replay file {}: {e}", path.display())))?;
            let (header, profiles) =
                read_replay(BufReader::new(file)).map_err(|e| usage(e.to_string()))?;
            if profiles.is_empty() {
                return Err(usage("replay file contains no profiles"));
            }
            Ok((
                ProfileSource::Replay(profiles),
                header.n,
                format!("replay:{}", header.family),
            ))
        }
        None => {
            let family = parse_family(&a.family, a.df, a.factor)?;
            Ok((ProfileSource::Family(family), a.n, family.tag().to_string()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum AlgoChoice {
    Single(AlgoKind),
    LSelect,
}

impl AlgoChoice {
    fn parse(s: &str) -> Result<Self, CliError> {
        if s == "l-select" {
            Ok(Self::LSelect)
        } else {
            Ok(Self::Single(s.parse::<AlgoKind>()?))
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Self::Single(kind) => kind.tag(),
            Self::LSelect => "l-select",
        }
    }
}

fn parse_policy(s: &str, tau: f64) -> Result<TauPolicy, CliError> {
    match s {
        "fixed" => Ok(TauPolicy::Fixed(tau)),
        "from-k" => Ok(TauPolicy::FromK),
        "min" => Ok(TauPolicy::Min(tau)),
        other => Err(usage(format!(
            "unknown tau policy '{other}' (expected fixed, from-k or min)"
        ))),
    }
}

fn parse_k(s: &str) -> Result<Option<usize>, CliError> {
    if s == "unknown" {
        return Ok(None);
    }
    s.parse::<usize>()
        .map(Some)
        .map_err(|_| usage(format!("k must be an integer or 'unknown', got '{s}'")))
}

/// One output row before estimation.
struct RowSpec {
    k: Option<usize>,
    sigma: f64,
    algo: AlgoChoice,
    tau: f64,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    l: Option<usize>,
    target: Target,
}

enum Target {
    /// Index into the shared single-selection cells.
    Shared(usize),
    LSelect(LSelectionConfig),
}

struct Grid<'a> {
    args: &'a ExperimentArgs,
    source: ProfileSource,
    n: usize,
    label: String,
    cells: Vec<Cell>,
    rows: Vec<RowSpec>,
}

impl<'a> Grid<'a> {
    fn new(args: &'a ExperimentArgs) -> Result<Self, CliError> {
        if args.iters == 0 {
            return Err(usage("iters must be at least 1"));
        }
        let (source, n, label) = source_of(args)?;
        Ok(Self {
            args,
            source,
            n,
            label,
            cells: Vec::new(),
            rows: Vec::new(),
        })
    }

    fn policies(&self) -> Result<Vec<TauPolicy>, CliError> {
        if self.args.tau_from_k {
            return Ok(vec![TauPolicy::FromK]);
        }
        self.args
            .tau_policy
            .iter()
            .map(|p| parse_policy(p, self.args.tau))
            .collect()
    }

    /// Reuses an identical cell so that e.g. a classical baseline is
    /// estimated once however many k values it is reported under.
    fn cell_index(&mut self, cell: Cell) -> usize {
        match self.cells.iter().position(|c| *c == cell) {
            Some(i) => i,
            None => {
                self.cells.push(cell);
                self.cells.len() - 1
            }
        }
    }

    fn add(
        &mut self,
        k: Option<usize>,
        sigma: f64,
        algo: AlgoChoice,
        policy: TauPolicy,
    ) -> Result<(), CliError> {
        let a = self.args;
        if let Some(k) = k {
            if !(2..=self.n).contains(&k) {
                return Err(Error::GapIndexOutOfRange { k, n: self.n }.into());
            }
        }
        match algo {
            AlgoChoice::Single(kind) => {
                let variant = Variant::new(kind, policy)
                    .with_gamma(a.gamma)
                    .with_epsilon(a.epsilon);
                let algorithm = variant.instantiate(k)?;
                let gap = if !kind.uses_gap() {
                    GapSpec::none()
                } else {
                    let base = match (a.gap, k) {
                        (Some(c), _) => GapSpec::absolute(c),
                        (None, Some(k)) => GapSpec::exact(k).with_sigma(sigma),
                        (None, None) => {
                            return Err(usage(format!(
                                "{} needs a gap: pass --k INT, or --gap VALUE with --k unknown",
                                kind.tag()
                            )))
                        }
                    };
                    if kind == AlgoKind::BoundedError {
                        base.with_noise(a.epsilon)
                    } else {
                        base
                    }
                };
                let index = self.cell_index(Cell { algorithm, gap });
                self.rows.push(RowSpec {
                    k,
                    sigma,
                    algo,
                    tau: algorithm.tau(),
                    gamma: matches!(algorithm, SingleSelection::RobustConsistent { .. })
                        .then_some(a.gamma),
                    epsilon: (kind == AlgoKind::BoundedError).then_some(a.epsilon),
                    l: None,
                    target: Target::Shared(index),
                });
            }
            AlgoChoice::LSelect => {
                let tau = policy.resolve(k)?;
                let config = LSelectionConfig {
                    source: self.source.clone(),
                    n: self.n,
                    iterations: a.iters,
                    master_seed: a.seed,
                    tau,
                    l: a.l,
                    sigma,
                    absolute_gap: a.gap,
                };
                self.rows.push(RowSpec {
                    k,
                    sigma,
                    algo,
                    tau,
                    gamma: None,
                    epsilon: None,
                    l: Some(a.l),
                    target: Target::LSelect(config),
                });
            }
        }
        Ok(())
    }

    fn add_product(
        &mut self,
        ks: &[Option<usize>],
        sigmas: &[f64],
        algos: &[AlgoChoice],
    ) -> Result<(), CliError> {
        let policies = self.policies()?;
        for &k in ks {
            for &sigma in sigmas {
                for &algo in algos {
                    for &policy in &policies {
                        self.add(k, sigma, algo, policy)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn render(self) -> Result<String, CliError> {
        let a = self.args;
        let shared = if self.cells.is_empty() {
            Vec::new()
        } else {
            estimate_cells(&self.source, self.n, a.iters, a.seed, &self.cells)?
        };
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let est: RatioEstimate = match &row.target {
                Target::Shared(i) => shared[*i],
                Target::LSelect(config) => estimate_l_selection(config)?,
            };
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.label,
                row.algo.tag(),
                self.n,
                a.iters,
                row.k.map_or("unknown".to_string(), |k| k.to_string()),
                row.tau,
                opt(row.gamma),
                row.sigma,
                opt(row.epsilon),
                row.l.map(|l| l.to_string()).unwrap_or_default(),
                a.seed,
                est.mean,
                est.stderr,
                est.select_best_prob,
                est.none_prob,
            )
            .expect("writing to a String");
        }
        Ok(out)
    }
}

fn parse_algos(a: &ExperimentArgs) -> Result<Vec<AlgoChoice>, CliError> {
    if a.algo.is_empty() {
        return Err(usage("--algo needs at least one algorithm"));
    }
    a.algo.iter().map(|s| AlgoChoice::parse(s)).collect()
}

fn parse_ks(a: &ExperimentArgs) -> Result<Vec<Option<usize>>, CliError> {
    if a.k.is_empty() {
        return Ok(vec![None]);
    }
    a.k.iter().map(|s| parse_k(s)).collect()
}

fn check_sigmas(sigmas: &[f64]) -> Result<(), CliError> {
    if sigmas.is_empty() {
        return Err(usage("--sigma needs at least one value"));
    }
    for &s in sigmas {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(usage(format!("sigma must lie in [0,inf), got {s}")));
        }
    }
    Ok(())
}

pub fn simulate_csv(a: &SimulateArgs) -> Result<String, CliError> {
    let a = &a.exp;
    let mut grid = Grid::new(a)?;
    check_sigmas(&a.sigma)?;
    grid.add_product(&parse_ks(a)?, &a.sigma, &parse_algos(a)?)?;
    grid.render()
}

/// `from, from + step, ...` up to `to`, with values rounded to 12 decimals
/// so that e.g. a step of 0.1 yields 0.3 rather than 0.30000000000000004.
pub fn float_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(usage(format!("step must be positive, got {step}")));
    }
    if !(from.is_finite() && to.is_finite()) || to < from {
        return Err(usage(format!(
            "range must satisfy from <= to, got [{from}, {to}]"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn sweep_csv(s: &SweepArgs) -> Result<String, CliError> {
    let a = &s.exp;
    let mut grid = Grid::new(a)?;
    let algos = parse_algos(a)?;
    match s.sweep.as_str() {
        "k" => {
            let is_int = |v: f64| v.fract() == 0.0 && v >= 0.0;
            if !(is_int(s.from) && is_int(s.to) && is_int(s.step)) {
                return Err(usage("k sweeps need integer --from, --to and --step"));
            }
            let ks: Vec<Option<usize>> = float_range(s.from, s.to, s.step)?
                .into_iter()
                .map(|k| Some(k as usize))
                .collect();
            check_sigmas(&a.sigma)?;
            let baseline = SingleSelection::Classical {
                tau: s.baseline_tau,
            };
            baseline.validate()?;
            for &k in &ks {
                for &sigma in &a.sigma {
                    grid.add(
                        k,
                        sigma,
                        AlgoChoice::Single(AlgoKind::Classical),
                        TauPolicy::Fixed(s.baseline_tau),
                    )?;
                    for &algo in &algos {
                        for policy in grid.policies()? {
                            grid.add(k, sigma, algo, policy)?;
                        }
                    }
                }
            }
        }
        "sigma" => {
            let sigmas = float_range(s.from, s.to, s.step)?;
            check_sigmas(&sigmas)?;
            grid.add_product(&parse_ks(a)?, &sigmas, &algos)?;
        }
        other => return Err(usage(format!("--sweep must be k or sigma, got '{other}'"))),
    }
    grid.render()
}

fn require<T>(value: Option<T>, flag: &str, which: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage(format!("--which {which} requires {flag}")))
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn bounds_json(a: &BoundsArgs) -> Result<String, CliError> {
    let value = match a.which.as_str() {
        "exact" => {
            let k = require(a.k, "--k", "exact")?;
            let tau = match a.tau {
                Some(t) => t,
                None => tau_for_k(k)?,
            };
            let report = alpha_exact(tau, k)?;
            json!({
                "which": "exact",
                "tau": tau,
                "k": k,
                "alpha": report.alpha,
                "binding_term": report.binding_term,
                "components": to_json(&report.components),
                "guarantee_at_tau_for_k": guarantee_exact_gap(k)?,
            })
        }
        "rc" => {
            let tau = a.tau.unwrap_or(0.2);
            let gamma = require(a.gamma, "--gamma", "rc")?;
            let aggregation = a.k.map_or(KAggregation::worst_case(), KAggregation::Index);
            let report = consistency(tau, gamma, aggregation)?;
            json!({
                "which": "rc",
                "tau": tau,
                "gamma": gamma,
                "aggregation": aggregation.to_string(),
                "consistency": report.alpha,
                "binding_term": report.binding_term,
                "components": to_json(&report.components),
                "robustness": robustness(tau, gamma)?,
            })
        }
        "bounded" => {
            let k = require(a.k, "--k", "bounded")?;
            let tau = match a.tau {
                Some(t) => t,
                None => tau_for_k(k)?,
            };
            if a.epsilon.is_nan() || a.epsilon < 0.0 {
                return Err(usage(format!(
                    "epsilon must lie in [0,inf), got {}",
                    a.epsilon
                )));
            }
            let g = guarantee_bounded_error(tau, k)?;
            json!({
                "which": "bounded",
                "tau": tau,
                "k": k,
                "epsilon": a.epsilon,
                "alpha": g.alpha(),
                "binding_term": g.report.binding_term,
                "components": to_json(&g.report.components),
                "lower_bound_at_w1_1": g.lower_bound(1.0, a.epsilon),
                "statement": g.to_string(),
            })
        }
        "tie23" => {
            let tau = require(a.tau, "--tau", "tie23")?;
            let mut v = json!({
                "which": "tie23",
                "tau": tau,
                "probability": two_three_tie_prob(tau)?,
            });
            if let Some(n) = a.n {
                v["n"] = json!(n);
                v["probability_exact_n"] = json!(two_three_tie_prob_exact(tau, n)?);
            }
            v
        }
        "lselect" => {
            let l = require(a.l, "--L", "lselect")?;
            let beta = require(a.beta, "--beta", "lselect")?;
            json!({
                "which": "lselect",
                "L": l,
                "beta": beta,
                "bound": l_selection_bound(l, beta)?,
            })
        }
        other => {
            return Err(usage(format!(
                "--which must be exact, rc, bounded, tie23 or lselect, got '{other}'"
            )))
        }
    };
    Ok(serde_json::to_string_pretty(&value).expect("json value serializes"))
}

pub fn frontier_csv(a: &FrontierArgs) -> Result<String, CliError> {
    let targets = float_range(a.r_from, a.r_to, a.r_step)?;
    let aggregation = a.k.map_or(KAggregation::worst_case(), KAggregation::Index);
    let f = frontier_with(&targets, a.grid_step, aggregation)?;
    let mut out =
        String::from("robustness_target,feasible,tau,gamma,consistency,robustness,aggregation\n");
    for p in &f.points {
        match p.optimum {
            Some(o) => writeln!(
                out,
                "{},true,{},{},{},{},{}",
                p.robustness_target, o.tau, o.gamma, o.consistency, o.robustness, f.aggregation
            ),
            None => writeln!(out, "{},false,,,,,{}", p.robustness_target, f.aggregation),
        }
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn instances_text(a: &InstancesArgs) -> Result<String, CliError> {
    let family = parse_family(&a.family, a.df, a.factor)?;
    if a.count == 0 {
        return Err(usage("count must be at least 1"));
    }
    let seeds = SeededRng::new(a.seed);
    let profiles = (0..a.count)
        .map(|i| family.generate(a.n, &mut seeds.stream(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let header = ReplayHeader {
        family: family.tag().to_string(),
        seed: a.seed,
        n: a.n,
    };
    let mut buf = Vec::new();
    write_replay(&mut buf, &header, &profiles)?;
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

/// Replaces the value of `--out` in `argv`, appending the flag if absent.
fn with_out(argv: &[String], out: &Path) -> Vec<String> {
    let out = out.to_string_lossy().into_owned();
    let mut result = Vec::with_capacity(argv.len() + 2);
    let mut replaced = false;
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        if arg == "--out" {
            iter.next();
            result.push(arg.clone());
            result.push(out.clone());
            replaced = true;
        } else if arg.starts_with("--out=") {
            result.push(format!("--out={out}"));
            replaced = true;
        } else {
            result.push(arg.clone());
        }
    }
    if !replaced {
        result.push("--out".into());
        result.push(out);
    }
    result
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.manifest).map_err(|e| {
        usage(format!(
            "cannot read manifest {}: {e}",
            a.manifest.display()
        ))
    })?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| usage(format!("malformed manifest: {e}")))?;
    let argv = match &a.out {
        Some(out) => with_out(&manifest.argv, out),
        None => manifest.argv.clone(),
    };
    if argv.first().map(String::as_str) == Some("replay") {
        return Err(usage("a manifest cannot replay another replay"));
    }
    let cli =
        Cli::try_parse_from(std::iter::once("secgap".to_string()).chain(argv.iter().cloned()))
            .map_err(|e| usage(format!("manifest arguments no longer parse: {e}")))?;
    run(cli, &argv)
}

/// A closed pipe (e.g. `| head`) ends output quietly.
fn to_stdout(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let suite: checks::Suite = a.suite.parse().map_err(usage)?;
    let settings = checks::Settings {
        fast: a.fast,
        seed: a.seed,
    };
    let mut failed = Vec::new();
    to_stdout(&format!("{}\n", checks::TABLE_HEADER))?;
    for id in suite.criteria() {
        let c = checks::run_criterion(id, &settings, &checks::in_process_runner);
        to_stdout(&format!("{}\n", c.line()))?;
        if !c.passed {
            failed.push(format!("#{} {}", c.id, c.title));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "failed checks: {}",
            failed.join("; ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("secgap").chain(args.iter().copied())).unwrap()
    }

    fn simulate(args: &[&str]) -> Result<String, CliError> {
        match parse(args).command {
            Command::Simulate(a) => simulate_csv(&a),
            _ => unreachable!(),
        }
    }

    #[test]
    fn float_range_is_clean() {
        let r = float_range(0.0, 3.0, 0.1).unwrap();
        assert_eq!(r.len(), 31);
        assert_eq!(r[3], 0.3);
        assert_eq!(r[30], 3.0);
        assert!(float_range(0.0, 1.0, 0.0).is_err());
        assert!(float_range(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn tau_out_of_range_is_a_usage_error() {
        let err = simulate(&[
            "simulate",
            "--algo",
            "exact-gap",
            "--tau",
            "1.5",
            "--k",
            "2",
            "--iters",
            "10",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("tau must lie in [0,1)"), "{err}");
    }

    #[test]
    fn unknown_k_needs_an_override() {
        let err = simulate(&[
            "simulate",
            "--algo",
            "exact-gap",
            "--k",
            "unknown",
            "--iters",
            "10",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let ok = simulate(&[
            "simulate",
            "--algo",
            "exact-gap",
            "--k",
            "unknown",
            "--gap",
            "0.5",
            "--iters",
            "10",
        ]);
        assert!(ok.unwrap().lines().nth(1).unwrap().contains(",unknown,"));
    }

    #[test]
    fn rows_follow_the_cartesian_product() {
        let csv = simulate(&[
            "simulate",
            "--family",
            "exp",
            "--n",
            "20",
            "--iters",
            "50",
            "--algo",
            "classical,exact-gap",
            "--k",
            "2,5",
            "--sigma",
            "0,1",
        ])
        .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        assert!(lines[1].starts_with("exp,classical,20,50,2,0.2,,0,"));
        assert!(lines[2].starts_with("exp,exact-gap,20,50,2,0.2,,0,"));
        // Zero prediction reproduces the classical row.
        let tail = |l: &str| l.split(',').skip(11).collect::<Vec<_>>().join(",");
        assert_eq!(tail(lines[1]), tail(lines[2]));
    }

    #[test]
    fn with_out_rewrites_or_appends() {
        let argv: Vec<String> = ["simulate", "--out", "a.csv", "--n", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(with_out(&argv, Path::new("b.csv"))[2], "b.csv");
        let argv: Vec<String> = ["simulate", "--out=a.csv"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(with_out(&argv, Path::new("b.csv"))[1], "--out=b.csv");
        let argv: Vec<String> = vec!["simulate".into()];
        assert_eq!(with_out(&argv, Path::new("b.csv")).len(), 3);
    }

    #[test]
    fn bounds_rc_point() {
        let cli = parse(&["bounds", "--which", "rc", "--tau", "0.2", "--gamma", "0.6"]);
        let Command::Bounds(a) = cli.command else {
            unreachable!()
        };
        let v: serde_json::Value = serde_json::from_str(&bounds_json(&a).unwrap()).unwrap();
        assert!((v["consistency"].as_f64().unwrap() - 0.383).abs() < 1e-3);
        assert!((v["robustness"].as_f64().unwrap() - 0.1833).abs() < 5e-4);
        assert_eq!(v["binding_term"], "alpha1");
    }

    #[test]
    fn bounds_missing_flag() {
        let cli = parse(&["bounds", "--which", "exact"]);
        let Command::Bounds(a) = cli.command else {
            unreachable!()
        };
        assert_eq!(bounds_json(&a).unwrap_err().exit_code(), 2);
    }
}
