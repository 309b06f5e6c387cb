//! Price history CSV: a header row `date,SYM1,SYM2,…` followed by one row of
//! decimal close prices per date.

use std::path::Path;

use crate::error::{CliError, CliResult};

pub const SYNTHETIC_PRICES: &str = include_str!("../data/synthetic_prices.csv");

#[derive(Clone, Debug, PartialEq)]
pub struct PriceTable {
    pub symbols: Vec<String>,
    pub dates: Vec<String>,
    /// `dates × symbols`.
    pub prices: Vec<Vec<f64>>,
}

impl PriceTable {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| CliError::Data(format!("price header: {e}")))?;
        if header.len() < 2 {
            return Err(CliError::Data("price CSV needs a date column and at least one asset".into()));
        }
        let symbols: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut prices = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let row = k + 2;
            let record = record.map_err(|e| CliError::Data(format!("price row {row}: {e}")))?;
            let date = record.get(0).unwrap_or_default().to_string();
            let mut values = Vec::with_capacity(symbols.len());
            for (c, sym) in symbols.iter().enumerate() {
                let cell = record.get(c + 1).unwrap_or("");
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::Data(format!("price row {row} ({date}), column {sym}: missing or invalid value '{cell}'"))
                })?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Data(format!(
                        "price row {row} ({date}), column {sym}: price {v} must be positive"
                    )));
                }
                values.push(v);
            }
            dates.push(date);
            prices.push(values);
        }
        if prices.len() < 2 {
            return Err(CliError::Data("price CSV needs at least two rows".into()));
        }
        Ok(Self { symbols, dates, prices })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn synthetic() -> Self {
        Self::parse(SYNTHETIC_PRICES).expect("bundled price file is valid")
    }

    /// Restricts the table to the first `count` assets.
    pub fn first_assets(&self, count: usize) -> CliResult<Self> {
        if count == 0 || count > self.symbols.len() {
            return Err(CliError::Config(format!(
                "requested {count} assets, price table has {}",
                self.symbols.len()
            )));
        }
        Ok(Self {
            symbols: self.symbols[..count].to_vec(),
            dates: self.dates.clone(),
            prices: self.prices.iter().map(|r| r[..count].to_vec()).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table() {
        let t = PriceTable::synthetic();
        assert_eq!(t.symbols, ["ALPHA", "BRAVO", "CHARLIE", "DELTA"]);
        assert_eq!(t.prices.len(), 121);
        assert_eq!(t.first_assets(2).unwrap().prices[0], [100.0, 50.0]);
        assert!(t.first_assets(5).is_err());
    }

    #[test]
    fn missing_value_names_the_row() {
        let text = "date,A,B\n2024-01-01,1.0,2.0\n2024-01-02,1.5,\n";
        match PriceTable::parse(text) {
            Err(CliError::Data(m)) => assert!(m.contains("row 3") && m.contains("column B"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(PriceTable::parse("date,A\n2024-01-01,-1\n2024-01-02,1\n").is_err());
    }
}
