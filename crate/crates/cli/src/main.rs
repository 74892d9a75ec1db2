//! Batch entry point: scenario sweeps, the market workflow, unquoted-bond
//! pricing, curve fitting, and input diagnostics.
//!
//! Exit codes: 0 success, 1 usage, 2 data, 3 numerical.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use bondliq::curves::{quotes_from_csv_path, DiscountCurve};
use bondliq::io::{
    load_config, write_calibration_csv, write_classification_csv, write_curve_params,
    write_recommendation_csv, write_sweep_csv, LoadedConfig, Provenance,
};
use bondliq::lookback::CaseId;
use bondliq::marketcal::{
    bucket_of, calibrate_frequency, classify_quotes, price_unquoted, recommend_frequency,
    LiquidityLabel,
};
use bondliq::models::feller_margin;
use bondliq::simulate::{simulate, McConfig, TimeGrid};
use bondliq::spread::{sweep, ModelEnv};
use bondliq::Error;

#[derive(Parser)]
#[command(name = "bondliq", version, about = "Liquidity spreads for defaultable bonds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the number of repeated estimations.
    #[arg(long)]
    repeats: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-coupon spread sweep over maturities, probing spacings, and cases.
    Sweep(CommonArgs),
    /// Full market workflow: classify quotes, calibrate probing frequencies,
    /// recommend spacings, and price the target bond.
    Market(CommonArgs),
    /// Spread table for the configured bond at the configured spacings.
    PriceUnquoted(CommonArgs),
    /// Input diagnostics: parameter sanity, curve shape, simulation checks.
    Validate(CommonArgs),
    /// Fit the Svensson curve to the liquid representatives of the quotes.
    FitCurve(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Market(args) => cmd_market(args),
        Command::PriceUnquoted(args) => cmd_price_unquoted(args),
        Command::Validate(args) => cmd_validate(args),
        Command::FitCurve(args) => cmd_fit_curve(args),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput { .. } => 1,
        Error::Data(_) | Error::Io(_) | Error::Csv(_) | Error::DateOrder { .. }
        | Error::Schedule(_) => 2,
        Error::SolverDiverged { .. }
        | Error::NoBracket { .. }
        | Error::Simulation { .. }
        | Error::Extrapolation { .. }
        | Error::TimeOrder { .. } => 3,
    }
}

struct Run {
    loaded: LoadedConfig,
    mc: McConfig,
    curve: Arc<DiscountCurve>,
    out: PathBuf,
}

impl Run {
    fn provenance(&self) -> Provenance {
        Provenance {
            seed: self.mc.seed,
            config_hash: self.config_hash(),
        }
    }

    fn config_hash(&self) -> String {
        // Overrides become part of the provenance hash.
        format!(
            "{}-p{}m{}",
            self.loaded.config_hash, self.mc.n_paths, self.mc.n_repeats
        )
    }

    fn env(&self) -> ModelEnv {
        ModelEnv::new(
            self.loaded.config.g2pp,
            self.loaded.config.cir,
            Arc::clone(&self.curve),
            self.loaded.config.credit.recovery_rate,
        )
    }

    fn case(&self) -> CaseId {
        self.loaded.config.credit.case
    }
}

fn setup(args: &CommonArgs) -> Result<Run, Error> {
    let loaded = load_config(&args.config)?;
    let mut mc = loaded.config.mc.to_mc_config();
    if let Some(seed) = args.seed {
        mc.seed = seed;
    }
    if let Some(paths) = args.paths {
        mc.n_paths = paths;
    }
    if let Some(repeats) = args.repeats {
        mc.n_repeats = repeats;
    }
    let curve_path = loaded.resolve(&loaded.config.files.curve);
    let curve = Arc::new(DiscountCurve::from_csv_path(&curve_path)?);
    Ok(Run {
        loaded,
        mc,
        curve,
        out: args.out.clone(),
    })
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), Error> {
    let run = setup(args)?;
    let section = run.loaded.config.sweep.clone().ok_or_else(|| {
        Error::invalid("config", "sweep command needs a [sweep] section")
    })?;
    if section.maturities.is_empty() || section.dt_days.is_empty() {
        return Err(Error::invalid("sweep", "maturities and dt_days must be nonempty"));
    }
    let cells = sweep(
        &run.env(),
        &section.maturities,
        &section.dt_days,
        &section.cases,
        &run.mc,
    )?;
    let path = run.out.join("sweep.csv");
    write_sweep_csv(&path, &run.provenance(), &cells)?;
    let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
    println!(
        "sweep: {} cells ({failed} failed) -> {}",
        cells.len(),
        path.display()
    );
    if failed > 0 {
        return Err(Error::SolverDiverged {
            what: format!("{failed} sweep cells"),
            iterations: 0,
            residual: f64::NAN,
        });
    }
    Ok(())
}

fn load_quotes(run: &Run) -> Result<Vec<bondliq::curves::BondQuote>, Error> {
    let quotes_path = run
        .loaded
        .config
        .files
        .quotes
        .as_ref()
        .ok_or_else(|| Error::invalid("config", "this command needs files.quotes"))?;
    let quotes_path = run.loaded.resolve(quotes_path);
    quotes_from_csv_path(&quotes_path, run.loaded.config.valuation.reference_date)
}

fn cmd_market(args: &CommonArgs) -> Result<(), Error> {
    let run = setup(args)?;
    let config = &run.loaded.config;
    let quotes = load_quotes(&run)?;
    if quotes.len() < 6 {
        return Err(Error::Data(format!(
            "market workflow needs at least 6 quotes, got {}",
            quotes.len()
        )));
    }
    let window = config.market.volume_window;
    let (classification, params, selection) = classify_quotes(&quotes, window)?;
    let prov = run.provenance();
    write_classification_csv(&run.out.join("classification.csv"), &prov, &classification.bonds)?;
    write_curve_params(&run.out.join("liquid_curve.toml"), &prov, &params)?;
    if !selection.skipped_buckets.is_empty() {
        println!("untraded buckets skipped: {}", selection.skipped_buckets.join(" "));
    }
    if !classification.excluded_buckets.is_empty() {
        println!(
            "buckets excluded (fewer than 2 bonds): {}",
            classification.excluded_buckets.join(" ")
        );
    }
    for stale in classification.bonds.iter().filter(|b| b.stale) {
        println!("stale quote {} ({:.0} bp below the curve)", stale.id, -stale.spread_bps);
    }

    // Calibrate probing frequency for every illiquid bond.
    let env = run.env();
    let case = run.case();
    let mut calibrations = Vec::new();
    for bond in classification.illiquid() {
        let quote = quotes.iter().find(|q| q.id == bond.id).unwrap();
        let cal = calibrate_frequency(
            &env,
            &bond.id,
            &quote.bond,
            quote.as_of,
            bond.spread_bps,
            case,
            &run.mc,
        )?;
        calibrations.push((bond.bucket.to_string(), bond.ttm, cal));
    }
    write_calibration_csv(
        &run.out.join("calibration.csv"),
        &prov,
        &calibrations,
    )?;

    // Recommend spacings from the target bond's bucket and price it.
    let bond_section = config
        .bond
        .as_ref()
        .ok_or_else(|| Error::invalid("config", "market command needs a [bond] section"))?;
    let bond = bond_section.to_bond_spec();
    let asof = config.valuation.reference_date;
    let ttm = bondliq::curves::year_fraction(
        asof,
        bond.maturity_date,
        bondliq::curves::DayCount::act_365_fixed(),
    )?;
    let target_bucket = match &config.market.target_bucket {
        Some(name) => name.clone(),
        None => bucket_of(ttm)?.name.to_string(),
    };
    let in_bucket: Vec<_> = calibrations
        .iter()
        .filter(|(b, _, _)| *b == target_bucket)
        .map(|(_, _, c)| c.clone())
        .collect();
    let rec = recommend_frequency(&in_bucket)?;
    println!(
        "bucket {target_bucket}: probing spacings 1sd={} 2sd={} max={} (removed: {})",
        rec.dt_1sd,
        rec.dt_2sd,
        rec.dt_max,
        if rec.removed.is_empty() { "none".to_string() } else { rec.removed.join(" ") }
    );
    let mut dts = vec![rec.dt_1sd, rec.dt_2sd, rec.dt_max];
    dts.dedup();
    let priced = price_unquoted(&env, &bond, asof, &dts, case, &run.mc)?;
    let labels = ["1 std dev.", "2 std dev.", "Sample max."];
    let mut rows = Vec::new();
    for (i, &dt) in [rec.dt_1sd, rec.dt_2sd, rec.dt_max].iter().enumerate() {
        let result = priced.iter().find(|(d, _)| *d == dt).unwrap().1.clone();
        rows.push((labels[i].to_string(), dt, result));
    }
    write_recommendation_csv(&run.out.join("recommendation.csv"), &prov, Some(&rec), &rows)?;
    for (label, dt, result) in &rows {
        println!("{label}: dt = {dt} days -> {:.0} bps", result.gamma_bps());
    }
    Ok(())
}

fn cmd_price_unquoted(args: &CommonArgs) -> Result<(), Error> {
    let run = setup(args)?;
    let config = &run.loaded.config;
    let bond = config
        .bond
        .as_ref()
        .ok_or_else(|| Error::invalid("config", "price-unquoted needs a [bond] section"))?
        .to_bond_spec();
    let dts = config
        .unquoted
        .as_ref()
        .ok_or_else(|| Error::invalid("config", "price-unquoted needs an [unquoted] section"))?
        .dt_days
        .clone();
    if dts.is_empty() {
        return Err(Error::invalid("unquoted.dt_days", "must be nonempty"));
    }
    let results = price_unquoted(
        &run.env(),
        &bond,
        config.valuation.reference_date,
        &dts,
        run.case(),
        &run.mc,
    )?;
    let rows: Vec<(String, u32, _)> = results
        .into_iter()
        .map(|(dt, r)| (format!("dt{dt}"), dt, r))
        .collect();
    write_recommendation_csv(&run.out.join("unquoted.csv"), &run.provenance(), None, &rows)?;
    for (_, dt, result) in &rows {
        println!(
            "dt = {dt:3} days -> gamma = {:.0} bps (se {:.2})",
            result.gamma_bps(),
            result.gamma_std_bps()
        );
    }
    Ok(())
}

fn cmd_validate(args: &CommonArgs) -> Result<(), Error> {
    let run = setup(args)?;
    let config = &run.loaded.config;
    let mut failures = 0usize;
    println!("seed: {}", run.mc.seed);
    println!("config hash: {}", run.config_hash());

    let margin = feller_margin(&config.cir);
    println!(
        "feller margin 2*kappa*theta - sigma^2 = {margin:.6} ({})",
        if margin > 0.0 { "ok" } else { "FAILED: origin attainable" }
    );
    if margin <= 0.0 {
        failures += 1;
    }

    // Curve sanity: unit factor at zero, positive nonincreasing factors.
    let mut prev = f64::INFINITY;
    let mut curve_ok = true;
    for (t, df) in run.curve.pillars() {
        if df > prev + 1e-12 || (t > 0.0 && df > 1.0) {
            curve_ok = false;
        }
        prev = df;
    }
    println!(
        "curve: {} pillars to {:.2}y, nonincreasing in (0,1]: {}",
        run.curve.pillars().count(),
        run.curve.max_time(),
        if curve_ok { "ok" } else { "FAILED" }
    );
    if !curve_ok {
        failures += 1;
    }

    // Martingale check: simulated discount factors against curve pillars.
    let horizon = run.curve.max_time().min(10.0);
    let checks: Vec<f64> = [1.0, 5.0, 10.0]
        .into_iter()
        .filter(|&t| t <= horizon)
        .collect();
    let grid = Arc::new(TimeGrid::build(horizon, &checks, 0.25)?);
    let scn = simulate(&config.g2pp, &config.cir, &run.curve, &grid, &run.mc)?;
    for &t in &checks {
        let k = grid.index_of(t).unwrap();
        let values: Vec<f64> = (0..scn.n_paths)
            .map(|i| (-scn.path(i).int_r[k]).exp())
            .collect();
        let (mean, se) = bondliq::math::mean_and_se(&values);
        let target = run.curve.discount(t)?;
        let ok = (mean - target).abs() <= 3.0 * se;
        println!(
            "discount check t={t}: mc {mean:.6} vs curve {target:.6} (se {se:.2e}) {}",
            if ok { "ok" } else { "FAILED" }
        );
        if !ok {
            failures += 1;
        }
    }

    if failures > 0 {
        return Err(Error::SolverDiverged {
            what: format!("{failures} diagnostics"),
            iterations: 0,
            residual: f64::NAN,
        });
    }
    println!("all diagnostics passed");
    Ok(())
}

fn cmd_fit_curve(args: &CommonArgs) -> Result<(), Error> {
    let run = setup(args)?;
    let quotes = load_quotes(&run)?;
    if quotes.len() < 6 {
        return Err(Error::Data(format!(
            "curve fit needs at least 6 quotes, got {}",
            quotes.len()
        )));
    }
    let (classification, params, _) = classify_quotes(&quotes, run.loaded.config.market.volume_window)?;
    write_curve_params(&run.out.join("liquid_curve.toml"), &run.provenance(), &params)?;
    let n_liquid = classification
        .bonds
        .iter()
        .filter(|b| b.label != LiquidityLabel::Illiquid)
        .count();
    println!(
        "fitted liquid curve on {} quotes ({} classified liquid) -> {}",
        quotes.len(),
        n_liquid,
        run.out.join("liquid_curve.toml").display()
    );
    Ok(())
}
