//! Report emission: deterministic JSON bodies with a separate
//! non-deterministic `meta` field, plus optional CSV companions.

use serde_json::{json, Value};
use std::path::PathBuf;

pub struct OutputSink {
    pub out: Option<PathBuf>,
    pub csv: bool,
}

/// Writes `body` as the report. The body is a pure function of the config
/// and seed; wall-clock data lives only under `meta`, so stripping `meta`
/// yields byte-identical output across runs.
pub fn write_report(
    sink: &OutputSink,
    body: &Value,
    csv: Option<String>,
) -> Result<(), hilbvol::Error> {
    let mut full = body.clone();
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    full["meta"] = json!({
        "tool": "hilbvol",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": stamp,
    });
    let text = serde_json::to_string_pretty(&full).map_err(hilbvol::Error::Schema)?;
    match &sink.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    if sink.csv {
        let Some(csv) = csv else {
            return Err(hilbvol::Error::Invalid(
                "this subcommand has no curve data; use --format json".into(),
            ));
        };
        match &sink.out {
            Some(path) => {
                let mut csv_path = path.clone();
                let ext = match csv_path.extension().and_then(|e| e.to_str()) {
                    Some(e) => format!("{e}.csv"),
                    None => "csv".to_string(),
                };
                csv_path.set_extension(ext);
                std::fs::write(csv_path, csv)?;
            }
            None => println!("{csv}"),
        }
    }
    Ok(())
}
