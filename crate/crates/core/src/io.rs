//! Run configuration and result files.
//!
//! Configuration is TOML with sections mirroring the parameter tables the
//! values come from. Every emitted CSV starts with comment lines carrying
//! the tool version, the seed, and a hash of the configuration, so identical
//! runs produce identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curves::{BondSpec, DayCount};
use crate::error::{Error, Result};
use crate::lookback::CaseId;
use crate::marketcal::{
    ClassifiedBond, FrequencyCalibration, FrequencyRecommendation, VolumeWindow,
};
use crate::models::{CirParams, G2ppParams};
use crate::simulate::McConfig;
use crate::spread::{LiquiditySpreadResult, SweepCell};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilesSection {
    pub curve: PathBuf,
    #[serde(default)]
    pub quotes: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValuationSection {
    pub reference_date: NaiveDate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreditSection {
    #[serde(default = "default_recovery")]
    pub recovery_rate: f64,
    #[serde(default = "default_case")]
    pub case: CaseId,
}

fn default_recovery() -> f64 {
    0.4
}

fn default_case() -> CaseId {
    CaseId::Case4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McSection {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Liquid-market probes per business day; 8 means hourly.
    #[serde(default = "default_probes_per_day")]
    pub liquid_probes_per_day: f64,
    #[serde(default)]
    pub antithetic: bool,
}

fn default_paths() -> usize {
    10_000
}
fn default_repeats() -> usize {
    20
}
fn default_seed() -> u64 {
    42
}
fn default_probes_per_day() -> f64 {
    8.0
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            n_paths: default_paths(),
            repeats: default_repeats(),
            seed: default_seed(),
            liquid_probes_per_day: default_probes_per_day(),
            antithetic: false,
        }
    }
}

impl McSection {
    pub fn to_mc_config(&self) -> McConfig {
        McConfig {
            n_paths: self.n_paths,
            n_repeats: self.repeats,
            seed: self.seed,
            liquid_step: 1.0 / (252.0 * self.liquid_probes_per_day),
            antithetic: self.antithetic,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSection {
    pub maturities: Vec<f64>,
    pub dt_days: Vec<u32>,
    #[serde(default = "all_cases")]
    pub cases: Vec<CaseId>,
}

fn all_cases() -> Vec<CaseId> {
    CaseId::ALL.to_vec()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BondSection {
    #[serde(default)]
    pub issue_date: Option<NaiveDate>,
    pub maturity_date: NaiveDate,
    pub coupon_rate: f64,
    pub coupon_freq_months: u32,
    #[serde(default = "default_notional")]
    pub notional: f64,
}

fn default_notional() -> f64 {
    100.0
}

impl BondSection {
    pub fn to_bond_spec(&self) -> BondSpec {
        BondSpec {
            issue_date: self.issue_date,
            maturity_date: self.maturity_date,
            coupon_rate: self.coupon_rate,
            coupon_freq_months: self.coupon_freq_months,
            day_count: DayCount::thirty_360_modified_following(),
            notional: self.notional,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnquotedSection {
    pub dt_days: Vec<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MarketSection {
    #[serde(default)]
    pub volume_window: VolumeWindow,
    /// Bucket whose calibrations feed the recommendation; derived from the
    /// target bond when absent.
    #[serde(default)]
    pub target_bucket: Option<String>,
}

/// Full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub files: FilesSection,
    pub valuation: ValuationSection,
    pub g2pp: G2ppParams,
    pub cir: CirParams,
    #[serde(default = "default_credit_section")]
    pub credit: CreditSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub bond: Option<BondSection>,
    #[serde(default)]
    pub unquoted: Option<UnquotedSection>,
    #[serde(default)]
    pub market: MarketSection,
}

fn default_credit_section() -> CreditSection {
    CreditSection {
        recovery_rate: default_recovery(),
        case: default_case(),
    }
}

/// Configuration plus the hash of its serialized bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub config_hash: String,
    /// Directory of the config file; relative data paths resolve against it.
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let raw = std::fs::read_to_string(path)?;
    let config: RunConfig = toml::from_str(&raw)
        .map_err(|e| Error::Data(format!("config {}: {e}", path.display())))?;
    config.g2pp.validate()?;
    config.cir.validate()?;
    Ok(LoadedConfig {
        config,
        config_hash: sha256_hex(raw.as_bytes()),
        base_dir: path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Header block stamped on every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# bondliq {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# seed={} config=sha256:{}", self.seed, self.config_hash)?;
        Ok(())
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// Sweep results: `maturity_years,dt_days,case,gamma_bps,gamma_std_bps,n_paths,m`.
/// Failed cells are recorded as comment lines.
pub fn write_sweep_csv(path: &Path, prov: &Provenance, cells: &[SweepCell]) -> Result<()> {
    let mut w = create(path)?;
    prov.write(&mut w)?;
    writeln!(w, "maturity_years,dt_days,case,gamma_bps,gamma_std_bps,n_paths,m")?;
    for cell in cells {
        match &cell.outcome {
            Ok(r) => writeln!(
                w,
                "{:.6},{},{},{:.4},{:.4},{},{}",
                cell.maturity,
                cell.dt_days,
                cell.case,
                r.gamma_bps(),
                r.gamma_std_bps(),
                r.n_paths,
                r.n_repeats
            )?,
            Err(msg) => writeln!(
                w,
                "# failed maturity={:.6} dt_days={} case={}: {}",
                cell.maturity,
                cell.dt_days,
                cell.case,
                msg.replace('\n', " ")
            )?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Classification: `id,bucket,ttm,yield_bps,curve_yield_bps,spread_bps,label`.
pub fn write_classification_csv(
    path: &Path,
    prov: &Provenance,
    bonds: &[ClassifiedBond],
) -> Result<()> {
    let mut w = create(path)?;
    prov.write(&mut w)?;
    writeln!(w, "id,bucket,ttm,yield_bps,curve_yield_bps,spread_bps,label")?;
    for b in bonds {
        writeln!(
            w,
            "{},{},{:.6},{:.2},{:.2},{:.2},{}",
            b.id,
            b.bucket,
            b.ttm,
            b.flat_yield * 1e4,
            b.curve_yield * 1e4,
            b.spread_bps,
            b.label
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Per-bond calibration:
/// `id,bucket,ttm_years,market_spread_bps,model_spread_bps,dt_days,status`.
pub fn write_calibration_csv(
    path: &Path,
    prov: &Provenance,
    rows: &[(String, f64, FrequencyCalibration)],
) -> Result<()> {
    let mut w = create(path)?;
    prov.write(&mut w)?;
    writeln!(
        w,
        "id,bucket,ttm_years,market_spread_bps,model_spread_bps,dt_days,status"
    )?;
    for (bucket, ttm, cal) in rows {
        writeln!(
            w,
            "{},{},{:.6},{:.0},{:.0},{},{}",
            cal.id, bucket, ttm, cal.market_spread_bps, cal.model_spread_bps, cal.dt_days, cal.status
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Spread table of an unquoted bond: `distribution_ref,dt_days,gamma_bps`.
pub fn write_recommendation_csv(
    path: &Path,
    prov: &Provenance,
    rec: Option<&FrequencyRecommendation>,
    rows: &[(String, u32, LiquiditySpreadResult)],
) -> Result<()> {
    let mut w = create(path)?;
    prov.write(&mut w)?;
    if let Some(rec) = rec {
        if !rec.removed.is_empty() {
            writeln!(w, "# outliers removed: {}", rec.removed.join(" "))?;
        }
    }
    writeln!(w, "distribution_ref,dt_days,gamma_bps")?;
    for (label, dt, result) in rows {
        writeln!(w, "{label},{dt},{:.0}", result.gamma_bps())?;
    }
    w.flush()?;
    Ok(())
}

/// Fitted liquid-curve parameters as TOML.
pub fn write_curve_params(
    path: &Path,
    prov: &Provenance,
    params: &crate::curves::SvenssonParams,
) -> Result<()> {
    let mut w = create(path)?;
    prov.write(&mut w)?;
    let body = toml::to_string(params).map_err(|e| Error::Data(e.to_string()))?;
    w.write_all(body.as_bytes())?;
    w.flush()?;
    Ok(())
}
