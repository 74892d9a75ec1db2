//! Regenerates `data/quotes_sample.csv`: a 40-bond synthetic issuer with one
//! planted illiquid bond (priced 25 bp above the curve, untraded) in each
//! maturity bucket. Liquid bonds are priced exactly on a known curve.

use chrono::{Duration, NaiveDate};

use bondliq::curves::{BondQuote, SvenssonParams};

fn main() {
    let asof = NaiveDate::from_ymd_opt(2024, 5, 31).unwrap();
    let truth = SvenssonParams {
        beta0: 0.032,
        beta1: -0.008,
        beta2: 0.004,
        beta3: 0.002,
        tau1: 1.5,
        tau2: 8.0,
    };

    // (bucket, liquid ttms, planted illiquid ttms). Bucket G carries three
    // planted bonds so the downstream frequency recommendation has a sample.
    let layout: [(&str, &[f64], &[f64]); 7] = [
        ("B", &[0.30, 0.35, 0.40, 0.45, 0.48], &[0.42]),
        ("C", &[0.55, 0.60, 0.65, 0.70, 0.72], &[0.68]),
        ("D", &[0.80, 0.85, 0.90, 0.95, 1.00], &[0.88]),
        ("E", &[1.10, 1.20, 1.30, 1.45], &[1.25]),
        ("F", &[1.60, 1.80, 2.00, 2.20, 2.40], &[1.90]),
        ("G", &[2.60, 3.00, 3.40], &[2.70, 2.95, 3.20]),
        ("H", &[3.60, 4.00, 4.50, 4.80], &[4.20]),
    ];

    let mut quotes: Vec<BondQuote> = Vec::new();
    for (bucket, liquid_ttms, planted_ttms) in layout {
        for (i, &ttm) in liquid_ttms.iter().enumerate() {
            let coupon = 0.01 + 0.005 * (i as f64);
            let spread = 0.03 + 0.02 * i as f64;
            let volume = 500.0 + 250.0 * i as f64;
            let q = BondQuote::priced_on_curve(
                &format!("LIQ_{bucket}{i}"),
                asof,
                ttm,
                coupon,
                &truth,
                volume,
                spread,
            )
            .unwrap();
            quotes.push(q);
        }
        // Planted illiquid: 25 bp above the curve at its exact maturity,
        // untraded, wide.
        for (i, &planted_ttm) in planted_ttms.iter().enumerate() {
            let maturity = asof + Duration::days((planted_ttm * 365.0).round() as i64);
            let exact_ttm = (maturity - asof).num_days() as f64 / 365.0;
            let mut q = BondQuote::from_flat_yield(
                &format!("ILLIQ_{bucket}{i}"),
                asof,
                planted_ttm,
                0.02,
                truth.yield_at(exact_ttm) + 0.0025,
                0.0,
                0.60,
            )
            .unwrap();
            q.last_trade_date = None;
            quotes.push(q);
        }
    }

    let mut out = String::from(
        "id,maturity_date,coupon_rate,coupon_freq_months,bid,ask,volume,last_trade_date\n",
    );
    for q in &quotes {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{},{}\n",
            q.id,
            q.bond.maturity_date,
            q.bond.coupon_rate,
            q.bond.coupon_freq_months,
            q.bid_price,
            q.ask_price,
            q.volume,
            q.last_trade_date.map(|d| d.to_string()).unwrap_or_default()
        ));
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/quotes_sample.csv");
    std::fs::write(path, out).unwrap();
    println!("wrote {} quotes to {path}", quotes.len());
}
