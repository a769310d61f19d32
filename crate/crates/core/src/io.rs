use crate::channel::Channel;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::Path;

/// On-disk object: either a channel `{"rows": [[...]]}` (row-stochastic,
/// row-major) or a distribution `{"probs": [...]}`.
#[derive(Debug, Deserialize)]
struct FileObject {
    #[serde(default)]
    rows: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    probs: Option<Vec<f64>>,
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    let text = std::fs::read_to_string(path)?;
    parse_channel(&text).map_err(|e| at_path(e, path))
}

pub fn read_distribution(path: &Path) -> Result<Distribution> {
    let text = std::fs::read_to_string(path)?;
    parse_distribution(&text).map_err(|e| at_path(e, path))
}

pub fn parse_channel(text: &str) -> Result<Channel> {
    let obj: FileObject =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    match obj.rows {
        Some(rows) => Channel::from_rows(rows),
        None => Err(Error::Parse(
            "expected a channel object with a \"rows\" field".into(),
        )),
    }
}

pub fn parse_distribution(text: &str) -> Result<Distribution> {
    let obj: FileObject =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    match obj.probs {
        Some(probs) => Distribution::new(probs),
        None => Err(Error::Parse(
            "expected a distribution object with a \"probs\" field".into(),
        )),
    }
}

pub fn channel_to_json(w: &Channel) -> String {
    let rows: Vec<&[f64]> = w.rows().collect();
    serde_json::json!({ "rows": rows }).to_string()
}

pub fn distribution_to_json(p: &Distribution) -> String {
    serde_json::json!({ "probs": p.probs() }).to_string()
}

fn at_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::InvalidChannel { row, value, reason } => {
            Error::Parse(format!("{}: row {row}: {reason} (value {value})", path.display()))
        }
        Error::InvalidDistribution { index, value, reason } => Error::Parse(format!(
            "{}: entry {index}: {reason} (value {value})",
            path.display()
        )),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_round_trip() {
        let w = Channel::bsc(0.15).unwrap();
        let s = channel_to_json(&w);
        let back = parse_channel(&s).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn distribution_round_trip() {
        let p = Distribution::new(vec![0.25, 0.75]).unwrap();
        let back = parse_distribution(&distribution_to_json(&p)).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn bad_row_sum_names_the_row() {
        let r = parse_channel(r#"{"rows": [[0.5, 0.5], [0.6, 0.6]]}"#);
        match r {
            Err(Error::InvalidChannel { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected InvalidChannel, got {other:?}"),
        }
    }

    #[test]
    fn negative_prob_names_the_entry() {
        let r = parse_distribution(r#"{"probs": [0.5, 0.6, -0.1]}"#);
        match r {
            Err(Error::InvalidDistribution { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected InvalidDistribution, got {other:?}"),
        }
    }

    #[test]
    fn wrong_shape_is_a_parse_error() {
        assert!(parse_channel(r#"{"probs": [1.0]}"#).is_err());
        assert!(parse_distribution("not json").is_err());
    }
}
