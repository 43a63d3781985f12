//! Report envelopes and CSV series.

use cantor_doubling::rational::to_decimal;
use cantor_doubling::SeriesPoint;
use serde::Serialize;

use crate::config::SCHEMA;

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

/// Top-level JSON document. `generated_at` is the only field that varies
/// between identical runs.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: u32,
    pub generated_at: String,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, name: Option<String>, result: T) -> Self {
        Report {
            schema: SCHEMA,
            generated_at: timestamp(),
            command,
            name,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// `depth,sup_ratio,exact` rows; `exact` is false when the decimal is
/// truncated.
pub fn series_csv(series: &[SeriesPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["depth", "sup_ratio", "exact"])
        .expect("in-memory writes succeed");
    for p in series {
        let (text, exact) = to_decimal(&p.sup_ratio, CSV_DIGITS);
        w.write_record([p.depth.to_string(), text, exact.to_string()])
            .expect("in-memory writes succeed");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}
