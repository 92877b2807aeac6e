//! Price loading and log returns.
//!
//! Input is a wide CSV: a `date` column (ISO-8601) followed by one column per
//! ticker. Tickers with any blank, unparseable, non-finite or non-positive cell
//! are dropped whole; the remaining tickers share one date grid.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of price rows (T + 1). Four returns give two degrees of
/// freedom for the correlation t-test.
pub const MIN_ROWS: usize = 5;

#[derive(Debug, Clone)]
pub struct CsvFormat {
    pub delimiter: u8,
    pub date_column: String,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            date_column: "date".to_string(),
        }
    }
}

/// Aligned prices for N tickers over T + 1 trading days.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    // row-major, one row per ticker
    prices: Vec<f64>,
}

impl PriceTable {
    /// Builds a table, checking every invariant (positive finite prices,
    /// ascending dates, N >= 2, T + 1 >= 5).
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.len() != rows.len() {
            return Err(Error::Malformed(format!(
                "{} tickers but {} price rows",
                tickers.len(),
                rows.len()
            )));
        }
        if tickers.len() < 2 {
            return Err(Error::TooFewTickers { found: tickers.len() });
        }
        if dates.len() < MIN_ROWS {
            return Err(Error::TooFewRows { found: dates.len() });
        }
        for (k, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonAscendingDates {
                    row: k + 1,
                    date: w[1].to_string(),
                });
            }
        }
        let mut prices = Vec::with_capacity(tickers.len() * dates.len());
        for (ticker, row) in tickers.iter().zip(&rows) {
            if row.len() != dates.len() {
                return Err(Error::Malformed(format!(
                    "{ticker}: {} prices for {} dates",
                    row.len(),
                    dates.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::Malformed(format!("{ticker}: non-positive price {p}")));
            }
            prices.extend_from_slice(row);
        }
        Ok(Self { tickers, dates, prices })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dates.len();
        &self.prices[i * d..(i + 1) * d]
    }
}

/// N × T matrix of daily log returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    tickers: Vec<String>,
    t_len: usize,
    returns: Vec<f64>,
}

impl ReturnMatrix {
    /// Wraps caller-provided return rows. All rows must have the same,
    /// nonzero length and finite entries.
    pub fn from_rows(tickers: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.len() != rows.len() {
            return Err(Error::Malformed(format!(
                "{} tickers but {} return rows",
                tickers.len(),
                rows.len()
            )));
        }
        let t_len = rows.first().map_or(0, Vec::len);
        if t_len == 0 {
            return Err(Error::Malformed("empty return rows".into()));
        }
        let mut returns = Vec::with_capacity(rows.len() * t_len);
        for row in &rows {
            if row.len() != t_len {
                return Err(Error::Malformed("ragged return rows".into()));
            }
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::Malformed("non-finite return".into()));
            }
            returns.extend_from_slice(row);
        }
        Ok(Self { tickers, t_len, returns })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    /// Number of returns per ticker (T).
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.returns[i * self.t_len..(i + 1) * self.t_len]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedTicker {
    pub ticker: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedPrices {
    pub table: PriceTable,
    pub dropped: Vec<DroppedTicker>,
}

pub fn load_prices(path: &Path, format: &CsvFormat) -> Result<LoadedPrices> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_prices(file, format).map_err(|e| match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Parses wide-CSV prices from any reader. See [`load_prices`].
pub fn read_prices<R: std::io::Read>(reader: R, format: &CsvFormat) -> Result<LoadedPrices> {
    let csv_err = |source| Error::Csv {
        path: "<input>".into(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() < 2 {
        return Err(Error::MalformedHeader("expected a date column and at least one ticker".into()));
    }
    if header[0] != *format.date_column {
        return Err(Error::MalformedHeader(format!(
            "first column must be `{}`, found `{}`",
            format.date_column, &header[0]
        )));
    }
    let tickers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    {
        let mut seen = std::collections::HashSet::new();
        for t in &tickers {
            if t.is_empty() {
                return Err(Error::MalformedHeader("empty ticker name".into()));
            }
            if !seen.insert(t.as_str()) {
                return Err(Error::MalformedHeader(format!("duplicate ticker `{t}`")));
            }
        }
    }

    let mut dates = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); tickers.len()];
    let mut reasons: Vec<Option<String>> = vec![None; tickers.len()];

    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(Error::Malformed(format!(
                "row {} has {} fields, header has {}",
                row_idx + 1,
                record.len(),
                header.len()
            )));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| Error::Malformed(format!("row {}: bad date `{}`: {e}", row_idx + 1, &record[0])))?;
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(Error::NonAscendingDates {
                    row: row_idx + 1,
                    date: date.to_string(),
                });
            }
        }
        dates.push(date);
        for (k, cell) in record.iter().skip(1).enumerate() {
            if reasons[k].is_some() {
                continue;
            }
            match parse_price(cell) {
                Ok(p) => columns[k].push(p),
                Err(why) => reasons[k] = Some(format!("{why} on {date}")),
            }
        }
    }

    if dates.len() < MIN_ROWS {
        return Err(Error::TooFewRows { found: dates.len() });
    }

    let mut kept_tickers = Vec::new();
    let mut kept_rows = Vec::new();
    let mut dropped = Vec::new();
    for ((ticker, col), reason) in tickers.into_iter().zip(columns).zip(reasons) {
        match reason {
            Some(reason) => dropped.push(DroppedTicker { ticker, reason }),
            None => {
                kept_tickers.push(ticker);
                kept_rows.push(col);
            }
        }
    }
    if kept_tickers.len() < 2 {
        return Err(Error::TooFewTickers {
            found: kept_tickers.len(),
        });
    }
    let table = PriceTable::new(kept_tickers, dates, kept_rows)?;
    Ok(LoadedPrices { table, dropped })
}

fn parse_price(cell: &str) -> std::result::Result<f64, &'static str> {
    if cell.is_empty() {
        return Err("missing price");
    }
    let p: f64 = cell.parse().map_err(|_| "unparseable price")?;
    if !p.is_finite() {
        Err("non-finite price")
    } else if p <= 0.0 {
        Err("non-positive price")
    } else {
        Ok(p)
    }
}

/// `returns[i][t] = ln(P_i(t+1) / P_i(t))`.
pub fn log_returns(p: &PriceTable) -> ReturnMatrix {
    let t_len = p.n_days() - 1;
    let mut returns = Vec::with_capacity(p.n_tickers() * t_len);
    for i in 0..p.n_tickers() {
        returns.extend(p.row(i).windows(2).map(|w| (w[1] / w[0]).ln()));
    }
    ReturnMatrix {
        tickers: p.tickers.clone(),
        t_len,
        returns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        (0..n).map(|k| d0 + chrono::Days::new(k as u64)).collect()
    }

    fn csv_text(cols: &[(&str, Vec<&str>)], rows: usize) -> String {
        let mut s = String::from("date");
        for (t, _) in cols {
            s.push(',');
            s.push_str(t);
        }
        s.push('\n');
        for (r, d) in dates(rows).iter().enumerate() {
            s.push_str(&d.to_string());
            for (_, v) in cols {
                s.push(',');
                s.push_str(v[r]);
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn blank_cell_drops_ticker() {
        let a: Vec<&str> = vec!["10"; 10];
        let b: Vec<&str> = vec!["20", "21", "22", "23", "24", "25", "26", "27", "28", "29"];
        let mut c: Vec<&str> = vec!["5"; 10];
        c[4] = "";
        let text = csv_text(&[("AAA", a), ("BBB", b), ("CCC", c)], 10);
        let loaded = read_prices(text.as_bytes(), &CsvFormat::default()).unwrap();
        assert_eq!(loaded.table.tickers(), ["AAA", "BBB"]);
        assert_eq!(loaded.dropped.len(), 1);
        assert_eq!(loaded.dropped[0].ticker, "CCC");
        assert!(loaded.dropped[0].reason.contains("missing"));
    }

    #[test]
    fn clean_input_passes_through() {
        let text = csv_text(&[("X", vec!["1", "2", "3", "4", "5"]), ("Y", vec!["5", "4", "3", "2", "1"])], 5);
        let loaded = read_prices(text.as_bytes(), &CsvFormat::default()).unwrap();
        assert_eq!(loaded.table.n_tickers(), 2);
        assert_eq!(loaded.table.n_days(), 5);
        assert!(loaded.dropped.is_empty());
        assert_eq!(loaded.table.row(1), &[5.0, 4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn zero_price_drops_ticker() {
        let text = csv_text(
            &[
                ("X", vec!["1", "2", "3", "4", "5"]),
                ("Y", vec!["5", "4", "3", "2", "1"]),
                ("Z", vec!["5", "4", "0", "2", "1"]),
            ],
            5,
        );
        let loaded = read_prices(text.as_bytes(), &CsvFormat::default()).unwrap();
        assert_eq!(loaded.table.tickers(), ["X", "Y"]);
        assert_eq!(loaded.dropped[0].ticker, "Z");
        assert!(loaded.dropped[0].reason.contains("non-positive"));
    }

    #[test]
    fn error_paths() {
        let fmt = CsvFormat::default();
        let bad_header = "day,X,Y\n2020-01-01,1,2\n";
        assert!(matches!(read_prices(bad_header.as_bytes(), &fmt), Err(Error::MalformedHeader(_))));

        let few_rows = csv_text(&[("X", vec!["1"; 4]), ("Y", vec!["2"; 4])], 4);
        assert!(matches!(
            read_prices(few_rows.as_bytes(), &fmt),
            Err(Error::TooFewRows { found: 4 })
        ));

        let one_left = csv_text(&[("X", vec!["1"; 5]), ("Y", vec!["-2"; 5])], 5);
        assert!(matches!(
            read_prices(one_left.as_bytes(), &fmt),
            Err(Error::TooFewTickers { found: 1 })
        ));

        let unordered = "date,X,Y\n2020-01-02,1,2\n2020-01-01,1,2\n";
        assert!(matches!(
            read_prices(unordered.as_bytes(), &fmt),
            Err(Error::NonAscendingDates { row: 2, .. })
        ));

        let missing = load_prices(Path::new("/nonexistent/prices.csv"), &fmt);
        assert!(matches!(missing, Err(Error::Io { .. })));
    }

    #[test]
    fn log_return_values() {
        let t = PriceTable::new(
            vec!["A".into(), "B".into()],
            dates(5),
            vec![vec![100.0; 5], vec![100.0, 110.0, 55.0, 55.0, 55.0]],
        )
        .unwrap();
        let r = log_returns(&t);
        assert_eq!(r.t_len(), 4);
        assert_eq!(r.row(0), &[0.0; 4]);
        assert!((r.row(1)[0] - 0.095_310_179_804_324_9).abs() < 1e-15);
        assert!((r.row(1)[1] + std::f64::consts::LN_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn returns_telescope(prices in prop::collection::vec(0.01f64..1e4, 5..60)) {
            let n = prices.len();
            let t = PriceTable::new(
                vec!["A".into(), "B".into()],
                dates(n),
                vec![prices.clone(), vec![1.0; n]],
            ).unwrap();
            let r = log_returns(&t);
            let sum: f64 = r.row(0).iter().sum();
            let total = (prices[n - 1] / prices[0]).ln();
            prop_assert!((sum - total).abs() <= 1e-12 * total.abs().max(1.0));
        }

        #[test]
        fn scaling_prices_keeps_returns(prices in prop::collection::vec(0.01f64..1e4, 5..40), k in 1u32..20) {
            // powers of two keep every ratio bit-identical
            let scale = f64::from(1u32 << k);
            let n = prices.len();
            let scaled: Vec<f64> = prices.iter().map(|p| p * scale).collect();
            let t = PriceTable::new(vec!["A".into(), "B".into()], dates(n), vec![prices, scaled]).unwrap();
            let r = log_returns(&t);
            prop_assert_eq!(r.row(0), r.row(1));
        }
    }
}
