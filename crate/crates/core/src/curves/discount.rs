//! Discount curves with log-linear interpolation between pillars.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::curves::daycount::{year_fraction, DayCount};
use crate::error::{Error, Result};

/// Dated discount factors with log-linear interpolation in the factor
/// (piecewise-constant instantaneous forwards between pillars).
///
/// Extrapolation beyond the last pillar is an error, never silent.
#[derive(Debug, Clone)]
pub struct DiscountCurve {
    reference_date: Option<NaiveDate>,
    times: Vec<f64>,
    log_factors: Vec<f64>,
}

impl DiscountCurve {
    /// Build from `(year_fraction, discount_factor)` pillars. A pillar at
    /// `t = 0` with factor 1 is prepended when absent.
    pub fn from_times(mut pillars: Vec<(f64, f64)>) -> Result<Self> {
        if pillars.is_empty() {
            return Err(Error::invalid("pillars", "empty curve"));
        }
        pillars.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pillars[0].0 > 0.0 {
            pillars.insert(0, (0.0, 1.0));
        }
        if pillars[0].0 < 0.0 {
            return Err(Error::invalid("pillars", "negative pillar time"));
        }
        if (pillars[0].1 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "pillars",
                "discount factor at the reference date must be 1.0",
            ));
        }
        let mut times = Vec::with_capacity(pillars.len());
        let mut log_factors = Vec::with_capacity(pillars.len());
        for (t, df) in pillars {
            if let Some(&last) = times.last() {
                if t <= last {
                    return Err(Error::invalid("pillars", "pillar times must strictly increase"));
                }
            }
            if !(df > 0.0) || !df.is_finite() {
                return Err(Error::invalid("pillars", "discount factors must be positive"));
            }
            times.push(t);
            log_factors.push(df.ln());
        }
        Ok(DiscountCurve {
            reference_date: None,
            times,
            log_factors,
        })
    }

    /// Build from dated pillars; times are ACT/365F year fractions from the
    /// reference date (the first pillar, which must carry factor 1).
    pub fn from_dates(reference_date: NaiveDate, pillars: &[(NaiveDate, f64)]) -> Result<Self> {
        let dc = DayCount::act_365_fixed();
        let mut timed = Vec::with_capacity(pillars.len());
        for &(date, df) in pillars {
            timed.push((year_fraction(reference_date, date, dc)?, df));
        }
        let mut curve = Self::from_times(timed)?;
        curve.reference_date = Some(reference_date);
        Ok(curve)
    }

    pub fn reference_date(&self) -> Option<NaiveDate> {
        self.reference_date
    }

    pub fn with_reference_date(mut self, date: NaiveDate) -> Self {
        self.reference_date = Some(date);
        self
    }

    /// Last pillar time; the curve is defined on `[0, max_time]`.
    pub fn max_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn pillars(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.log_factors)
            .map(|(&t, &lf)| (t, lf.exp()))
    }

    /// `ln P(0, t)`, log-linear between pillars.
    pub fn ln_discount(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::invalid("t", "time before the reference date"));
        }
        let max_t = self.max_time();
        if t > max_t {
            return Err(Error::Extrapolation { t, max_t });
        }
        let idx = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Ok(self.log_factors[i]),
            Err(i) => i,
        };
        // idx >= 1 because times[0] = 0 <= t, and idx <= len-1 because t <= max.
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (l0, l1) = (self.log_factors[idx - 1], self.log_factors[idx]);
        let w = (t - t0) / (t1 - t0);
        Ok(l0 + w * (l1 - l0))
    }

    /// Discount factor `P(0, t)` for a year fraction `t`.
    pub fn discount(&self, t: f64) -> Result<f64> {
        Ok(self.ln_discount(t)?.exp())
    }

    /// Discount factor at a calendar date (requires a dated curve).
    pub fn discount_on(&self, date: NaiveDate) -> Result<f64> {
        let reference = self.reference_date.ok_or_else(|| {
            Error::invalid("curve", "discount_on requires a curve with a reference date")
        })?;
        let t = year_fraction(reference, date, DayCount::act_365_fixed())?;
        self.discount(t)
    }

    /// Read a curve from CSV. Two layouts are accepted:
    /// `date,discount_factor` (first row is the reference date) and
    /// `time_years,discount_factor`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let df_idx = col("discount_factor").ok_or_else(|| {
            Error::Data("curve csv: missing column `discount_factor`".to_string())
        })?;
        if let Some(t_idx) = col("time_years") {
            let mut pillars = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                pillars.push((parse_f64(&rec, t_idx)?, parse_f64(&rec, df_idx)?));
            }
            Self::from_times(pillars)
        } else if let Some(d_idx) = col("date") {
            let mut dated = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                let date = parse_date(rec.get(d_idx).unwrap_or(""))?;
                dated.push((date, parse_f64(&rec, df_idx)?));
            }
            if dated.is_empty() {
                return Err(Error::Data("curve csv: no pillar rows".to_string()));
            }
            let reference = dated.iter().map(|&(d, _)| d).min().unwrap();
            Self::from_dates(reference, &dated)
        } else {
            Err(Error::Data(
                "curve csv: expected a `date` or `time_years` column".to_string(),
            ))
        }
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }
}

fn parse_f64(rec: &csv::StringRecord, idx: usize) -> Result<f64> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse::<f64>()
        .map_err(|_| Error::Data(format!("curve csv: cannot parse number from `{raw}`")))
}

/// Accepts ISO `yyyy-mm-dd` and `dd/mm/yyyy`.
pub fn parse_date(raw: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(raw, "%d/%m/%Y"))
        .map_err(|_| Error::Data(format!("cannot parse date from `{raw}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refdata::{bund_curve, section3_curve};

    #[test]
    fn pillar_lookup_is_exact() {
        let curve = bund_curve();
        assert_eq!(curve.discount(0.0).unwrap(), 1.0);
        assert!((curve.discount(2.0).unwrap() - 0.94).abs() < 1e-15);
        assert!((curve.discount(10.0).unwrap() - 0.768).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_log_linear() {
        let curve = bund_curve();
        // Midpoint between the 2y (0.94) and 3y (0.917) pillars.
        let expected = (0.94f64.ln() * 0.5 + 0.917f64.ln() * 0.5).exp();
        assert!((curve.discount(2.5).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_is_an_error() {
        let curve = bund_curve();
        assert!(matches!(
            curve.discount(31.0),
            Err(Error::Extrapolation { .. })
        ));
    }

    #[test]
    fn bundled_curves_are_nonincreasing() {
        for curve in [bund_curve(), section3_curve()] {
            let mut prev = f64::INFINITY;
            for (_, df) in curve.pillars() {
                assert!(df <= prev + 1e-15);
                prev = df;
            }
        }
    }

    #[test]
    fn csv_round_trip_time_layout() {
        let csv = "time_years,discount_factor\n0,1\n1,0.97\n5,0.86\n";
        let curve = DiscountCurve::from_csv_reader(csv.as_bytes()).unwrap();
        assert!((curve.discount(5.0).unwrap() - 0.86).abs() < 1e-15);
    }

    #[test]
    fn csv_date_layout_uses_first_date_as_reference() {
        let csv = "date,discount_factor\n2023-12-29,1.0\n2024-12-29,0.96\n";
        let curve = DiscountCurve::from_csv_reader(csv.as_bytes()).unwrap();
        let t = 366.0 / 365.0; // 2024 is a leap year
        assert!((curve.discount(t).unwrap() - 0.96).abs() < 1e-12);
    }

    #[test]
    fn missing_columns_are_reported() {
        let csv = "tenor,df\n1,0.97\n";
        assert!(DiscountCurve::from_csv_reader(csv.as_bytes()).is_err());
    }

    #[test]
    fn first_factor_must_be_one() {
        assert!(DiscountCurve::from_times(vec![(0.0, 0.99), (1.0, 0.95)]).is_err());
    }
}
