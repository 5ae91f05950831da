//! Command-line front end: argument parsing, orchestration and file output.

use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance;
use crate::error::{Error, Result};
use crate::floquet_oracle::{oracle_spectrum, OracleSource, Window};
use crate::linalg::C64;
use crate::operator_matrix::{build_matrix, dump_matrix_csv, Bc};
use crate::potential::{builtin, load_potential_file, BuiltinParams, PotentialSpec, Weight};
use crate::riesz_projection::{projection_report, RadiusPolicy};
use crate::sequence_analysis::{
    case_row, classify_case, decay_classify_with_floor, resolution_floor, riesz_criterion, sandwich_report,
};
use crate::spectral_pairing::{build_slate, Parity, SlateOptions, SpectralSlate};

#[derive(Parser, Debug)]
#[command(name = "hill-spectra", version, about = "Spectra of Hill operators with singular periodic potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalue slate: gaps, deviations, reduced 2x2 data and invariant pairs.
    Slate(RunArgs),
    /// Entries of the reduced 2x2 matrix at z* and z+.
    Beta(RunArgs),
    /// Riesz projection norms and boundary-value diagnostics.
    Projections(RunArgs),
    /// Shooting-oracle roots compared with the truncated matrices.
    Oracle(OracleArgs),
    /// Riesz-basis criterion ratios and verdicts.
    Criterion(RunArgs),
    /// Decay classification of gap and deviation sequences.
    Smoothness(SmoothnessArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PotentialArgs {
    /// zero, mathieu, delta_comb, gasymov, sawtooth or random_weighted.
    #[arg(long, conflicts_with = "potential_file")]
    pub builtin: Option<String>,
    /// JSON file with {"family", "params"} or {"coeffs": [[k, re, im], ...]}.
    #[arg(long)]
    pub potential_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Weight for random_weighted: sobolev:A, exp:C or gevrey:C,G.
    #[arg(long, default_value = "sobolev:1")]
    pub weight: String,
    /// Target H(Ω) norm for random_weighted.
    #[arg(long, default_value_t = 1.0)]
    pub target: f64,
    /// Band limit F of truncated families.
    #[arg(long = "F", default_value_t = 64)]
    pub band: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PotentialArgs {
    pub fn build(&self) -> Result<PotentialSpec> {
        let params = BuiltinParams {
            c: self.c,
            s: self.s,
            x0: self.x0,
            r: self.r,
            band: self.band,
            seed: self.seed,
            weight: Weight::parse(&self.weight)?,
            target: self.target,
        };
        match (&self.builtin, &self.potential_file) {
            (Some(name), None) => builtin(name, &params),
            (None, Some(path)) => load_potential_file(path, &params),
            (None, None) => Err(Error::Config("one of --builtin or --potential-file is required".into())),
            (Some(_), Some(_)) => Err(Error::Config("--builtin and --potential-file are exclusive".into())),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Truncation: 2K+1 periodic modes, 2K Dirichlet and 2K+1 Neumann modes.
    #[arg(long = "K", default_value_t = 64)]
    pub k: usize,
    /// Index range A..B, inclusive at both ends.
    #[arg(long = "n", default_value = "6..40")]
    pub n: String,
    /// Comma-separated list of per+, per-, dir, neu.
    #[arg(long, default_value = "per+")]
    pub bc: String,
    /// Disc radius policy: fixed or shrinking.
    #[arg(long, default_value = "fixed")]
    pub radius: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Directory for CSV and JSON output; CSV goes to standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the truncated matrix of the first listed boundary condition as CSV.
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Integration steps for smooth potentials.
    #[arg(long, default_value_t = 2048)]
    pub steps: usize,
    /// Discriminant samples per unit of sqrt(lambda) in the grid file.
    #[arg(long, default_value_t = 16)]
    pub grid_density: usize,
    /// Residual bound each located root must satisfy.
    #[arg(long, default_value_t = 1e-8)]
    pub root_tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SmoothnessArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Weight Ω used for the partial sums: sobolev:A, exp:C or gevrey:C,G.
    #[arg(long, default_value = "sobolev:2")]
    pub decay_weight: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// Check a subsample of indices against the oracle.
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_range(s: &str) -> Result<RangeInclusive<i64>> {
    let bad = || Error::Config(format!("cannot parse index range '{s}' (expected A..B)"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a < 1 || b < a {
        return Err(Error::Config(format!("index range {a}..{b} must satisfy 1 ≤ A ≤ B")));
    }
    Ok(a..=b)
}

pub fn parse_bcs(s: &str) -> Result<Vec<Bc>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let bc = Bc::parse(part).map_err(|e| Error::Config(e.to_string()))?;
        if !out.contains(&bc) {
            out.push(bc);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty --bc list".into()));
    }
    Ok(out)
}

/// Validated configuration shared by the slate-based subcommands.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(skip)]
    pub potential: PotentialSpec,
    pub family: String,
    pub k: usize,
    pub band_limit: usize,
    pub n_range: (i64, i64),
    pub bcs: Vec<&'static str>,
    pub radius_policy: &'static str,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub args: RunArgs,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<RunConfig> {
        let potential = args.potential.build()?;
        if args.k < 4 {
            return Err(Error::TruncationTooSmall(args.k));
        }
        let range = parse_range(&args.n)?;
        let bcs = parse_bcs(&args.bc)?;
        let policy = RadiusPolicy::parse(&args.radius).map_err(|e| Error::Config(e.to_string()))?;
        if !(args.tol > 0.0 && args.tol.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive, got {}", args.tol)));
        }
        let band = potential.band_limit() as i64;
        if *range.end() > args.k as i64 - band {
            log::warn!("n_max = {} exceeds K - F = {}", range.end(), args.k as i64 - band);
        }
        if *range.start() <= 4 {
            log::warn!("n_min = {} lies at or below 4, where discs may not be isolated", range.start());
        }
        Ok(RunConfig {
            family: potential.family().tag().to_string(),
            band_limit: potential.band_limit(),
            potential,
            k: args.k,
            n_range: (*range.start(), *range.end()),
            bcs: bcs.iter().map(|b| b.name()).collect(),
            radius_policy: policy.name(),
            tol: args.tol,
            out: args.out.clone(),
            seed: args.potential.seed,
            args: args.clone(),
        })
    }

    pub fn range(&self) -> RangeInclusive<i64> {
        self.n_range.0..=self.n_range.1
    }

    pub fn bc_list(&self) -> Vec<Bc> {
        self.bcs.iter().map(|b| Bc::parse(b).expect("validated")).collect()
    }

    pub fn policy(&self) -> RadiusPolicy {
        RadiusPolicy::parse(self.radius_policy).expect("validated")
    }

    /// Parity follows the periodic conditions listed; dir/neu-only lists keep both.
    pub fn parity(&self) -> Parity {
        let bcs = self.bc_list();
        match (bcs.contains(&Bc::PerPlus), bcs.contains(&Bc::PerMinus)) {
            (true, false) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::Both,
        }
    }

    pub fn slate(&self, pairs: bool) -> Result<SpectralSlate> {
        let opts = SlateOptions { policy: self.policy(), n_floor: None, parity: self.parity(), pairs };
        build_slate(&self.potential, self.k, self.range(), &opts)
    }
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn cplx(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}

fn push_c(row: &mut Vec<String>, z: C64) {
    row.push(fmt_f(z.re));
    row.push(fmt_f(z.im));
}

fn fmt_f(x: f64) -> String {
    // -0 and 0 print alike
    format!("{:.16e}", x + 0.0)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

fn write_csv<W: Write>(w: W, table: &Table) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(&table.0).map_err(io)?;
    for r in &table.1 {
        wr.write_record(r).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Emits the main table to `<out>/<name>.csv` (or standard output) and the
/// JSON summary to `<out>/<name>.json`.
fn emit(out: &Option<PathBuf>, name: &str, table: &Table, summary: Value) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_csv(fs::File::create(dir.join(format!("{name}.csv")))?, table)?;
            write_json(&dir.join(format!("{name}.json")), &summary)?;
        }
        None => write_csv(io::stdout().lock(), table)?,
    }
    Ok(())
}

fn summary(command: &str, config: &impl Serialize, result: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "dependencies": { "faer": "0.24", "rayon": "1" },
        "config": config,
        "result": result,
    })
}

fn dump_matrix(cfg: &RunConfig) -> Result<()> {
    if let Some(path) = &cfg.args.dump_matrix {
        let op = build_matrix(&cfg.potential, cfg.bc_list()[0], cfg.k)?;
        dump_matrix_csv(&op, io::BufWriter::new(fs::File::create(path)?))?;
    }
    Ok(())
}

fn slate_table(slate: &SpectralSlate, tol: f64) -> Table {
    let mut header = vec!["n".to_string(), "bc".to_string()];
    for name in [
        "lambda_plus", "lambda_minus", "mu", "nu", "gamma", "delta_dir", "delta_neu", "z_star", "alpha11", "alpha22",
        "beta_plus", "beta_minus", "beta_plus_zp", "beta_minus_zp",
    ] {
        header.extend(cplx(name));
    }
    for name in ["char_residual", "xi_abs", "g_dot", "identity_residual", "boundary_ratio", "case", "case1_bound"] {
        header.push(name.into());
    }
    let rows = slate
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.n.to_string(), r.bc.name().to_string()];
            for z in [
                r.lambda_plus, r.lambda_minus, r.mu, r.nu, r.gamma, r.delta_dir, r.delta_neu, r.z_star, r.alpha11,
                r.alpha22, r.beta_plus, r.beta_minus, r.beta_plus_zp, r.beta_minus_zp,
            ] {
                push_c(&mut v, z);
            }
            let cr = case_row(r, tol);
            v.push(fmt_f(r.char_residual));
            v.push(fmt_opt(r.xi_abs()));
            v.push(fmt_opt(r.pair.as_ref().map(|p| p.g_dot)));
            v.push(fmt_opt(r.pair.as_ref().map(|p| p.identity_residual)));
            v.push(fmt_opt(r.pair.as_ref().map(|p| p.boundary_ratio)));
            v.push(cr.case.name().into());
            v.push(cr.case1_bound.map(|b| b.to_string()).unwrap_or_default());
            v
        })
        .collect();
    (header, rows)
}

fn slate_meta(slate: &SpectralSlate) -> Value {
    json!({
        "rows": slate.rows.len(),
        "skipped": slate.skipped,
        "observed_onset": slate.observed_onset,
        "unassigned": slate.unassigned,
        "pair_errors": slate.rows.iter().filter_map(|r| r.pair_error.as_ref().map(|e| json!({"n": r.n, "error": e}))).collect::<Vec<_>>(),
    })
}

fn cmd_slate(args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::from_args(args)?;
    dump_matrix(&cfg)?;
    let slate = cfg.slate(true)?;
    let sandwiches = sandwich_report(&slate, cfg.tol);
    let result = json!({
        "slate": slate_meta(&slate),
        "sandwich_first_all_pass": sandwiches.first_all_pass,
        "sandwich_split_rows": sandwiches.split_rows,
    });
    emit(&cfg.out, "slate", &slate_table(&slate, cfg.tol), summary("slate", &cfg, result))
}

fn cmd_beta(args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::from_args(args)?;
    dump_matrix(&cfg)?;
    let slate = cfg.slate(false)?;
    let mut header = vec!["n".to_string()];
    for name in ["z_star", "alpha11", "alpha22", "beta_plus", "beta_minus", "beta_plus_zp", "beta_minus_zp", "v_plus_2n", "v_plus_minus_2n"] {
        header.extend(cplx(name));
    }
    header.extend(["first_order_plus".into(), "first_order_minus".into(), "case".into()]);
    let p = &cfg.potential;
    let rows = slate
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.n.to_string()];
            let (vp, vm) = (p.v_plus(2 * r.n), p.v_plus(-2 * r.n));
            for z in [r.z_star, r.alpha11, r.alpha22, r.beta_plus, r.beta_minus, r.beta_plus_zp, r.beta_minus_zp, vp, vm] {
                push_c(&mut v, z);
            }
            v.push(fmt_f((r.beta_plus - vp).norm()));
            v.push(fmt_f((r.beta_minus - vm).norm()));
            v.push(classify_case(r).name().into());
            v
        })
        .collect();
    emit(&cfg.out, "beta", &(header, rows), summary("beta", &cfg, json!({ "slate": slate_meta(&slate) })))
}

fn cmd_projections(args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::from_args(args)?;
    dump_matrix(&cfg)?;
    let slate = cfg.slate(true)?;
    let policy = cfg.policy();
    let reports = slate
        .rows
        .par_iter()
        .map(|r| {
            let op = build_matrix(&cfg.potential, r.bc, cfg.k)?;
            projection_report(&op, r.n, policy.radius(r.n))
        })
        .collect::<Result<Vec<_>>>()?;
    let header = [
        "n", "norm_p_diff", "norm_dp_diff", "norm_dp_diff_over_n", "value_deviation", "quasi_derivative_deviation_over_n",
        "g_dot", "identity_residual", "nodes", "converged",
    ]
    .map(String::from)
    .to_vec();
    let rows = slate
        .rows
        .iter()
        .zip(&reports)
        .map(|(r, rep)| {
            vec![
                r.n.to_string(),
                fmt_f(rep.norm_p_diff),
                fmt_f(rep.norm_dp_diff),
                fmt_f(rep.norm_dp_diff / r.n as f64),
                fmt_opt(r.pair.as_ref().map(|p| p.kappa0)),
                fmt_opt(r.pair.as_ref().map(|p| p.kappa1)),
                fmt_opt(r.pair.as_ref().map(|p| p.g_dot)),
                fmt_opt(r.pair.as_ref().map(|p| p.identity_residual)),
                rep.nodes.to_string(),
                rep.converged.to_string(),
            ]
        })
        .collect();
    let result = json!({ "slate": slate_meta(&slate), "reports": reports });
    emit(&cfg.out, "projections", &(header, rows), summary("projections", &cfg, result))
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let cfg = RunConfig::from_args(&args.run)?;
    dump_matrix(&cfg)?;
    let p = &cfg.potential;
    let src = if p.family().tag() == "delta_comb" {
        OracleSource::exact_for(p)?
    } else {
        OracleSource::smooth(p, args.steps)?
    };
    let real = p.is_real();
    let bcs = cfg.bc_list();
    let ops = bcs.iter().map(|&bc| build_matrix(p, bc, cfg.k)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, i64)> = bcs
        .iter()
        .enumerate()
        .flat_map(|(i, &bc)| cfg.range().filter(move |&n| bc.has_level(n)).map(move |n| (i, n)))
        .collect();
    let found = jobs
        .par_iter()
        .map(|&(i, n)| -> Result<Vec<Vec<String>>> {
            let bc = ops[i].bc;
            let c = (n * n) as f64;
            let r = cfg.policy().radius(n);
            let roots = oracle_spectrum(&src, bc, Window::around(c, r, real), args.root_tol)?;
            let mut mine: Vec<C64> = ops[i].spectrum()?.iter().copied().filter(|z| (z - c).norm() < r).collect();
            crate::linalg::sort_spectrum(&mut mine);
            Ok(roots
                .iter()
                .enumerate()
                .map(|(j, z)| {
                    let m = mine.get(j).copied();
                    let mut v = vec![bc.name().to_string(), n.to_string()];
                    push_c(&mut v, *z);
                    v.push(fmt_opt(m.map(|m| m.re)));
                    v.push(fmt_opt(m.map(|m| m.im)));
                    v.push(fmt_opt(m.map(|m| (m - z).norm())));
                    v.push((roots.len() == mine.len()).to_string());
                    v
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let header = ["bc", "n", "root_re", "root_im", "matrix_re", "matrix_im", "gap", "count_match"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = found.into_iter().flatten().collect();
    let max_gap = rows.iter().filter_map(|r| r[6].parse::<f64>().ok()).fold(0.0, f64::max);
    let result = json!({ "exact": src.is_exact(), "roots": rows.len(), "max_gap": max_gap });
    if let Some(dir) = &cfg.out {
        let (lo, hi) = (cfg.n_range.0 as f64 - 0.5, cfg.n_range.1 as f64 + 0.5);
        let count = ((hi - lo) * args.grid_density as f64).ceil() as usize + 1;
        let grid = (0..count)
            .into_par_iter()
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (count - 1) as f64;
                let lam = C64::new(t * t, 0.0);
                let m = src.monodromy(lam)?;
                let mut v = vec![fmt_f(lam.re)];
                push_c(&mut v, m.discriminant);
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        fs::create_dir_all(dir)?;
        let gh = ["lambda", "discriminant_re", "discriminant_im"].map(String::from).to_vec();
        write_csv(fs::File::create(dir.join("oracle_grid.csv"))?, &(gh, grid))?;
    }
    emit(&cfg.out, "oracle", &(header, rows), summary("oracle", args, result))
}

fn cmd_criterion(args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::from_args(args)?;
    dump_matrix(&cfg)?;
    let slate = cfg.slate(false)?;
    let rep = riesz_criterion(&slate, cfg.tol);
    let header = ["n", "delta_neu_over_gamma", "delta_dir_over_gamma", "beta_minus_over_beta_plus", "running_sup_neu"]
        .map(String::from)
        .to_vec();
    let rows = rep
        .points
        .iter()
        .zip(&rep.neu.running_sup)
        .map(|(p, s)| vec![p.n.to_string(), fmt_f(p.neu), fmt_f(p.dir), fmt_f(p.beta), fmt_f(s.1)])
        .collect();
    let mut err = io::stderr().lock();
    writeln!(err, "neumann ratio: {} (sup {:.3e}, exponent {:?})", rep.neu.trend.name(), rep.neu.sup, rep.neu.exponent)?;
    writeln!(err, "dirichlet ratio: {} (sup {:.3e})", rep.dir.trend.name(), rep.dir.sup)?;
    writeln!(err, "inf |beta-|/|beta+|: {:?}", rep.beta_inf)?;
    writeln!(err, "basis failure: {}", rep.basis_failure)?;
    for note in &rep.notes {
        writeln!(err, "note: {note}")?;
    }
    let result = serde_json::to_value(&rep).map_err(|e| Error::Io(e.to_string()))?;
    emit(&cfg.out, "criterion", &(header, rows), summary("criterion", &cfg, result))
}

fn cmd_smoothness(args: &SmoothnessArgs) -> Result<()> {
    let cfg = RunConfig::from_args(&args.run)?;
    let w = Weight::parse(&args.decay_weight).map_err(|e| Error::Config(e.to_string()))?;
    dump_matrix(&cfg)?;
    let slate = cfg.slate(false)?;
    let floor = |n: i64| slate.row(n).map_or(0.0, |r| resolution_floor(r, cfg.tol));
    let seqs: [(&str, Vec<(i64, f64)>); 3] = [
        ("gamma", slate.rows.iter().map(|r| (r.n, r.gamma.norm())).collect()),
        ("delta_neu", slate.rows.iter().map(|r| (r.n, r.delta_neu.norm())).collect()),
        ("delta_dir", slate.rows.iter().map(|r| (r.n, r.delta_dir.norm())).collect()),
    ];
    let mut reports = serde_json::Map::new();
    let mut err = io::stderr().lock();
    let mut sums = Vec::new();
    for (name, seq) in &seqs {
        match decay_classify_with_floor(seq, w, floor) {
            Ok(rep) => {
                writeln!(err, "{name}: {} (weighted sums converge: {})", rep.class.name(), rep.converges)?;
                sums.push(rep.partial_sums.iter().map(|p| p.1).collect::<Vec<_>>());
                reports.insert(name.to_string(), serde_json::to_value(&rep).map_err(|e| Error::Io(e.to_string()))?);
            }
            Err(e @ Error::InsufficientData { .. }) => {
                writeln!(err, "{name}: {e}")?;
                sums.push(vec![]);
                reports.insert(name.to_string(), json!({ "error": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let header = ["n", "gamma_abs", "delta_neu_abs", "delta_dir_abs", "gamma_sum", "delta_neu_sum", "delta_dir_sum"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = slate
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = vec![r.n.to_string(), fmt_f(seqs[0].1[i].1), fmt_f(seqs[1].1[i].1), fmt_f(seqs[2].1[i].1)];
            for s in &sums {
                v.push(fmt_opt(s.get(i).copied()));
            }
            v
        })
        .collect();
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        let ph = ["n", "log10_gamma", "log10_delta_neu", "log10_delta_dir"].map(String::from).to_vec();
        let plot = slate
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = vec![r.n.to_string()];
                v.extend(seqs.iter().map(|s| fmt_f(s.1[i].1.log10())));
                v
            })
            .collect();
        write_csv(fs::File::create(dir.join("smoothness_plot.csv"))?, &(ph, plot))?;
    }
    emit(&cfg.out, "smoothness", &(header, rows), summary("smoothness", args, Value::Object(reports)))
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let outcomes = acceptance::run_all(args.quick, |o| {
        println!("{o}");
    });
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("verify.json"), &summary("verify", args, json!(outcomes)))?;
    }
    Ok(failed == 0)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

fn report_error(e: &Error) -> i32 {
    let code = exit_code(e);
    let body = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
    eprintln!("{body}");
    code
}

fn configure_threads() -> Result<()> {
    faer::set_global_parallelism(faer::Par::Seq);
    if let Ok(v) = std::env::var("HILL_SPECTRA_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("HILL_SPECTRA_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report_error(&Error::Config(e.to_string().trim().to_string()));
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(&e);
    }
    let res = match &cli.command {
        Command::Slate(a) => cmd_slate(a).map(|_| true),
        Command::Beta(a) => cmd_beta(a).map(|_| true),
        Command::Projections(a) => cmd_projections(a).map(|_| true),
        Command::Oracle(a) => cmd_oracle(a).map(|_| true),
        Command::Criterion(a) => cmd_criterion(a).map(|_| true),
        Command::Smoothness(a) => cmd_smoothness(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => report_error(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("6..40").unwrap(), 6..=40);
        assert_eq!(parse_range("6..=40").unwrap(), 6..=40);
        assert!(parse_range("40..6").unwrap_err().is_config());
        assert!(parse_range("x").unwrap_err().is_config());
        assert_eq!(parse_bcs("per+,dir,per+").unwrap(), vec![Bc::PerPlus, Bc::Dir]);
        assert!(parse_bcs("foo").unwrap_err().is_config());
    }

    #[test]
    fn config_validation() {
        let args = |extra: &[&str]| {
            let mut v = vec!["hill-spectra", "slate", "--builtin", "mathieu"];
            v.extend_from_slice(extra);
            match Cli::try_parse_from(v).unwrap().command {
                Command::Slate(a) => a,
                _ => unreachable!(),
            }
        };
        assert_eq!(RunConfig::from_args(&args(&["--K", "3"])).unwrap_err(), Error::TruncationTooSmall(3));
        assert!(RunConfig::from_args(&args(&["--tol", "0"])).unwrap_err().is_config());
        let cfg = RunConfig::from_args(&args(&["--bc", "per+,per-"])).unwrap();
        assert_eq!(cfg.parity(), Parity::Both);
        assert_eq!(RunConfig::from_args(&args(&[])).unwrap().parity(), Parity::Even);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::TruncationTooSmall(3)), 2);
        assert_eq!(exit_code(&Error::NotConverged(1.0)), 3);
        assert_eq!(run(["hill-spectra", "slate", "--K", "64"]), 2);
        assert_eq!(run(["hill-spectra", "nonsense"]), 2);
    }
}
