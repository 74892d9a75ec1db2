//! Bond quotes: market observations attached to a bond's contractual terms.

use std::io::Read;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::curves::daycount::DayCount;
use crate::curves::discount::parse_date;
use crate::curves::schedule::{accrued_interest, to_model_cashflows, BondSpec};
use crate::curves::svensson::SvenssonParams;
use crate::curves::yields::price_from_yield;
use crate::error::{Error, Result};

/// A dated bid/ask observation on a bond. Prices are clean, in percent of
/// notional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BondQuote {
    pub id: String,
    pub bond: BondSpec,
    pub bid_price: f64,
    pub ask_price: f64,
    /// Amount traded in the reporting window (currency units).
    pub volume: f64,
    /// Valuation date of the observation.
    pub as_of: NaiveDate,
    /// Date of the last trade, when known.
    pub last_trade_date: Option<NaiveDate>,
}

impl BondQuote {
    pub fn validate(&self) -> Result<()> {
        if !(self.bid_price > 0.0) {
            return Err(Error::invalid("bid_price", "must be positive"));
        }
        if self.ask_price < self.bid_price {
            return Err(Error::invalid("ask_price", "ask must not be below bid"));
        }
        if self.volume < 0.0 {
            return Err(Error::invalid("volume", "must be nonnegative"));
        }
        self.bond.validate()
    }

    pub fn mid_clean(&self) -> f64 {
        0.5 * (self.bid_price + self.ask_price)
    }

    /// Dirty mid price per unit notional.
    pub fn mid_dirty(&self) -> Result<f64> {
        let accrued = accrued_interest(&self.bond, self.as_of)? / self.bond.notional;
        Ok(self.mid_clean() / 100.0 + accrued)
    }

    pub fn bid_ask_spread(&self) -> f64 {
        self.ask_price - self.bid_price
    }

    /// Build a quote priced at a flat continuously compounded yield.
    /// `maturity` is expressed as a year fraction from `as_of` and rounded to
    /// whole calendar days.
    pub fn from_flat_yield(
        id: &str,
        as_of: NaiveDate,
        maturity: f64,
        coupon_rate: f64,
        flat_yield: f64,
        volume: f64,
        bid_ask: f64,
    ) -> Result<Self> {
        let bond = BondSpec {
            issue_date: None,
            maturity_date: as_of + Duration::days((maturity * 365.0).round() as i64),
            coupon_rate,
            coupon_freq_months: 12,
            day_count: DayCount::thirty_360_modified_following(),
            notional: 100.0,
        };
        let cashflows = to_model_cashflows(&bond, as_of)?;
        let dirty = price_from_yield(&cashflows, flat_yield);
        let accrued = accrued_interest(&bond, as_of)? / bond.notional;
        let clean = (dirty - accrued) * 100.0;
        Ok(BondQuote {
            id: id.to_string(),
            bond,
            bid_price: clean - 0.5 * bid_ask,
            ask_price: clean + 0.5 * bid_ask,
            volume,
            as_of,
            last_trade_date: Some(as_of),
        })
    }

    /// Build a quote priced off a Svensson zero curve (each cashflow
    /// discounted at its own zero yield).
    pub fn priced_on_curve(
        id: &str,
        as_of: NaiveDate,
        maturity: f64,
        coupon_rate: f64,
        curve: &SvenssonParams,
        volume: f64,
        bid_ask: f64,
    ) -> Result<Self> {
        let bond = BondSpec {
            issue_date: None,
            maturity_date: as_of + Duration::days((maturity * 365.0).round() as i64),
            coupon_rate,
            coupon_freq_months: 12,
            day_count: DayCount::thirty_360_modified_following(),
            notional: 100.0,
        };
        let cashflows = to_model_cashflows(&bond, as_of)?;
        let dirty: f64 = cashflows
            .times
            .iter()
            .zip(&cashflows.amounts)
            .map(|(&t, &c)| c * curve.discount(t))
            .sum();
        let accrued = accrued_interest(&bond, as_of)? / bond.notional;
        let clean = (dirty - accrued) * 100.0;
        Ok(BondQuote {
            id: id.to_string(),
            bond,
            bid_price: clean - 0.5 * bid_ask,
            ask_price: clean + 0.5 * bid_ask,
            volume,
            as_of,
            last_trade_date: Some(as_of),
        })
    }
}

/// Load quotes from CSV with header
/// `id,maturity_date,coupon_rate,coupon_freq_months,bid,ask,volume,last_trade_date`.
pub fn quotes_from_csv_reader<R: Read>(reader: R, as_of: NaiveDate) -> Result<Vec<BondQuote>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("quote csv: missing column `{name}`")))
    };
    let idx_id = col("id")?;
    let idx_mat = col("maturity_date")?;
    let idx_rate = col("coupon_rate")?;
    let idx_freq = col("coupon_freq_months")?;
    let idx_bid = col("bid")?;
    let idx_ask = col("ask")?;
    let idx_vol = col("volume")?;
    let idx_ltd = col("last_trade_date")?;

    let num = |rec: &csv::StringRecord, idx: usize, name: &str| -> Result<f64> {
        let raw = rec.get(idx).unwrap_or("");
        raw.parse::<f64>()
            .map_err(|_| Error::Data(format!("quote csv: bad `{name}` value `{raw}`")))
    };

    let mut quotes = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let freq = num(&rec, idx_freq, "coupon_freq_months")? as u32;
        let last_trade = {
            let raw = rec.get(idx_ltd).unwrap_or("");
            if raw.is_empty() {
                None
            } else {
                Some(parse_date(raw)?)
            }
        };
        let quote = BondQuote {
            id: rec.get(idx_id).unwrap_or("").to_string(),
            bond: BondSpec {
                issue_date: None,
                maturity_date: parse_date(rec.get(idx_mat).unwrap_or(""))?,
                coupon_rate: num(&rec, idx_rate, "coupon_rate")?,
                coupon_freq_months: freq,
                day_count: DayCount::thirty_360_modified_following(),
                notional: 100.0,
            },
            bid_price: num(&rec, idx_bid, "bid")?,
            ask_price: num(&rec, idx_ask, "ask")?,
            volume: num(&rec, idx_vol, "volume")?,
            as_of,
            last_trade_date: last_trade,
        };
        quote.validate()?;
        quotes.push(quote);
    }
    Ok(quotes)
}

pub fn quotes_from_csv_path<P: AsRef<Path>>(path: P, as_of: NaiveDate) -> Result<Vec<BondQuote>> {
    let file = std::fs::File::open(path.as_ref())?;
    quotes_from_csv_reader(file, as_of)
}
