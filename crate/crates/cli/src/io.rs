//! CSV/JSON ingestion and output with a units header line.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Weekday};
use gammabs::pricing::{OptionContract, OptionKind, Quote};
use gammabs::volest::MarketSeries;
use serde::Deserialize;

/// Bad or missing user input; maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// A result that breaks a documented invariant; maps to exit code 4.
#[derive(Debug)]
pub struct InvariantViolation(pub String);

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantViolation {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

pub fn invariant(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(anyhow::Error::new(InvariantViolation(msg())))
    }
}

/// Resolve an input file against the working directory, then the config directory.
pub fn resolve_input(p: &Path, config_dir: Option<&Path>) -> Result<PathBuf> {
    let found = if p.exists() {
        Some(p.to_path_buf())
    } else {
        config_dir.map(|d| d.join(p)).filter(|q| !p.is_absolute() && q.exists())
    };
    match found {
        Some(q) => Ok(std::path::absolute(&q).unwrap_or(q)),
        None => Err(input_error(match config_dir {
            Some(d) => format!("file not found: {} (also looked in {})", p.display(), d.display()),
            None => format!("file not found: {}", p.display()),
        })),
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(d) = DateTime::parse_from_rfc3339(s) {
        return Some(d.naive_utc());
    }
    for f in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(d) = NaiveDateTime::parse_from_str(s, f) {
            return Some(d);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(f))
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

pub struct PriceTable {
    pub stamps: Vec<String>,
    pub series: MarketSeries,
}

/// `timestamp,price` rows; times become sample index / day_length.
pub fn read_prices(path: &Path, day_length: usize, allow_gaps: bool) -> Result<PriceTable> {
    if day_length == 0 {
        return Err(input_error("--day-length must be at least 1"));
    }
    let mut rdr = reader(path)?;
    let headers = rdr.headers().with_context(|| format!("reading header of {}", path.display()))?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != ["timestamp", "price"] {
        return Err(input_error(format!("{}: expected header `timestamp,price`, found `{}`", path.display(), headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut stamps = Vec::new();
    let mut secs: Vec<f64> = Vec::new();
    let mut prices = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let line = line_of(&rec);
        let ts = parse_timestamp(&rec[0]).ok_or_else(|| input_error(format!("{} line {line}: cannot parse timestamp `{}` as ISO-8601", path.display(), &rec[0])))?;
        let price: f64 = rec[1].parse().map_err(|_| input_error(format!("{} line {line}: cannot parse price `{}`", path.display(), &rec[1])))?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(input_error(format!("{} line {line}: price {price} must be positive", path.display())));
        }
        let s = ts.and_utc().timestamp_millis() as f64 / 1000.0;
        if let Some(&prev) = secs.last() {
            if s <= prev {
                return Err(input_error(format!("{} line {line}: timestamp `{}` is not after the previous row (timestamps must increase)", path.display(), &rec[0])));
            }
        }
        stamps.push(rec[0].to_string());
        secs.push(s);
        prices.push(price);
        lines.push(line);
    }
    if prices.len() < 2 {
        return Err(input_error(format!("{}: need at least 2 rows, found {}", path.display(), prices.len())));
    }
    // spacing inside a trading day must be regular unless gaps are allowed
    let steps: Vec<(usize, f64)> = (1..secs.len()).filter(|i| day_length == 1 || i % day_length != 0).map(|i| (i, secs[i] - secs[i - 1])).collect();
    if !allow_gaps && !steps.is_empty() {
        let mut d: Vec<f64> = steps.iter().map(|s| s.1).collect();
        d.sort_by(f64::total_cmp);
        let median = d[d.len() / 2];
        if let Some(&(i, gap)) = steps.iter().find(|s| s.1 > 5.0 * median) {
            return Err(input_error(format!(
                "{} line {}: gap of {:.0}s is more than 5x the median spacing {:.0}s; pass --allow-gaps to accept irregular sampling",
                path.display(),
                lines[i],
                gap,
                median
            )));
        }
    }
    let times = (0..prices.len()).map(|i| i as f64 / day_length as f64).collect();
    let series = MarketSeries::new(times, prices, day_length).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(PriceTable { stamps, series })
}

/// The `value` column (or the last column) of a CSV series.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().with_context(|| format!("reading header of {}", path.display()))?.clone();
    if headers.is_empty() {
        return Err(input_error(format!("{}: empty header", path.display())));
    }
    let col = headers.iter().position(|h| h.eq_ignore_ascii_case("value")).unwrap_or(headers.len() - 1);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let line = line_of(&rec);
        let raw = rec.get(col).ok_or_else(|| input_error(format!("{} line {line}: missing column {}", path.display(), col + 1)))?;
        let v: f64 = raw.parse().map_err(|_| input_error(format!("{} line {line}: cannot parse `{raw}` as a number", path.display())))?;
        if !v.is_finite() {
            return Err(input_error(format!("{} line {line}: non-finite value", path.display())));
        }
        out.push(v);
    }
    Ok(out)
}

/// Weekdays in (from, to].
pub fn trading_days_between(from: NaiveDate, to: NaiveDate) -> i64 {
    from.iter_days().skip(1).take_while(|d| *d <= to).filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)).count() as i64
}

#[derive(Deserialize)]
struct QuoteRow {
    date: String,
    spot: f64,
    strike: f64,
    expiry_date: String,
    observed_price: f64,
    rate: f64,
    #[serde(default)]
    kind: Option<OptionKind>,
}

/// Quotes CSV `date,spot,strike,expiry_date,observed_price,rate[,kind]`, rate annualized.
pub fn read_quotes(path: &Path, trading_days_per_year: f64) -> Result<Vec<Quote>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().with_context(|| format!("reading header of {}", path.display()))?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let line = line_of(&rec);
        let row: QuoteRow = rec.deserialize(Some(&headers)).map_err(|e| input_error(format!("{} line {line}: {e}", path.display())))?;
        let day = |s: &str| parse_timestamp(s).map(|d| d.date()).ok_or_else(|| input_error(format!("{} line {line}: cannot parse date `{s}`", path.display())));
        let (d0, d1) = (day(&row.date)?, day(&row.expiry_date)?);
        let t = trading_days_between(d0, d1);
        if t < 1 {
            return Err(input_error(format!("{} line {line}: expiry {} is not after {}", path.display(), row.expiry_date, row.date)));
        }
        let contract = OptionContract::new(row.spot, row.strike, row.rate / trading_days_per_year, t as f64, row.kind.unwrap_or(OptionKind::Call))
            .map_err(|e| input_error(format!("{} line {line}: {e}", path.display())))?;
        if !(row.observed_price.is_finite() && row.observed_price >= 0.0) {
            return Err(input_error(format!("{} line {line}: observed price {} must be nonnegative", path.display(), row.observed_price)));
        }
        out.push(Quote { contract, observed: row.observed_price });
    }
    if out.is_empty() {
        return Err(input_error(format!("{}: no quotes", path.display())));
    }
    Ok(out)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// CSV with a leading `# units:` line, to a file or stdout.
pub fn write_table(path: Option<&Path>, units: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = sink(path)?;
    writeln!(w, "# units: {units}")?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(header)?;
        for r in rows {
            c.write_record(r)?;
        }
        c.flush()?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON to stdout with a `units` entry added to the top-level object.
pub fn emit_json(mut value: serde_json::Value, units: &str) -> Result<()> {
    if let Some(obj) = value.as_object_mut() {
        obj.insert("units".into(), serde_json::Value::String(units.into()));
    }
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert!(parse_timestamp("2024-01-02").is_some());
        assert!(parse_timestamp("2024-01-02T09:30:00").is_some());
        assert!(parse_timestamp("2024-01-02T09:30:00+01:00").is_some());
        assert!(parse_timestamp("2024-01-02 09:30").is_some());
        assert!(parse_timestamp("02/01/2024").is_none());
    }

    #[test]
    fn weekday_count() {
        let d = |s| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        // Friday to Monday
        assert_eq!(trading_days_between(d("2024-01-05"), d("2024-01-08")), 1);
        assert_eq!(trading_days_between(d("2024-01-01"), d("2024-01-31")), 22);
        assert_eq!(trading_days_between(d("2024-01-08"), d("2024-01-08")), 0);
    }
}
