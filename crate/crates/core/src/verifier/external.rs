//! Text boundary to external complete verifiers.
//!
//! Query files:
//!
//! ```text
//! query v1
//! net <path>
//! x0 <reals>
//! delta <real>
//! label <index>
//! ```
//!
//! Witness files returned by the external tool:
//!
//! ```text
//! witness v1
//! x <reals>
//! ```
//!
//! A witness is only turned into a SAT verdict after it re-validates
//! against the network.

use std::fmt::Write as _;

use super::{Verdict, VerdictKind, VerificationQuery, VerifierStats};
use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::format::format_reals;
use crate::network::Network;

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedQuery {
    pub net_path: String,
    pub x0: Vec<f64>,
    pub delta: f64,
    pub label: usize,
}

pub fn export_query(net_path: &str, q: &VerificationQuery) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "query v1");
    let _ = writeln!(out, "net {net_path}");
    let _ = writeln!(out, "x0 {}", format_reals(&q.x0));
    let _ = writeln!(out, "delta {}", format_reals(&[q.delta]));
    let _ = writeln!(out, "label {}", q.label0);
    out
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn keyed<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> std::result::Result<(usize, &'a str), ParseError> {
    let (line, content) = lines
        .next()
        .ok_or_else(|| ParseError::new(0, ParseErrorKind::UnexpectedEof(format!("`{key}` line"))))?;
    let rest = content
        .strip_prefix(key)
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        .ok_or_else(|| {
            ParseError::new(line, ParseErrorKind::MalformedHeader(format!("expected `{key}`, found `{content}`")))
        })?;
    Ok((line, rest.trim()))
}

fn reals(line: usize, text: &str) -> std::result::Result<Vec<f64>, ParseError> {
    text.split_whitespace()
        .map(|tok| match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(ParseError::new(line, ParseErrorKind::NonFinite(tok.into()))),
            Err(_) => Err(ParseError::new(line, ParseErrorKind::BadNumber(tok.into()))),
        })
        .collect()
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    expected: &str,
) -> std::result::Result<(), ParseError> {
    let (line, content) = lines
        .next()
        .ok_or_else(|| ParseError::new(0, ParseErrorKind::UnexpectedEof(expected.into())))?;
    if content != expected {
        return Err(ParseError::new(
            line,
            ParseErrorKind::MalformedHeader(format!("expected `{expected}`, found `{content}`")),
        ));
    }
    Ok(())
}

pub fn parse_query(text: &str) -> Result<ExportedQuery> {
    let mut lines = content_lines(text);
    header(&mut lines, "query v1")?;
    let (_, net_path) = keyed(&mut lines, "net")?;
    let (line, x0) = keyed(&mut lines, "x0")?;
    let x0 = reals(line, x0)?;
    let (line, delta) = keyed(&mut lines, "delta")?;
    let delta = match reals(line, delta)?.as_slice() {
        [d] => *d,
        _ => return Err(ParseError::new(line, ParseErrorKind::DimensionMismatch("delta takes one value".into())).into()),
    };
    let (line, label) = keyed(&mut lines, "label")?;
    let label = label
        .parse()
        .map_err(|_| ParseError::new(line, ParseErrorKind::BadNumber(label.into())))?;
    if let Some((line, _)) = lines.next() {
        return Err(ParseError::new(line, ParseErrorKind::TrailingContent).into());
    }
    Ok(ExportedQuery { net_path: net_path.to_string(), x0, delta, label })
}

pub fn write_witness(x: &[f64]) -> String {
    format!("witness v1\nx {}\n", format_reals(x))
}

pub fn parse_witness(text: &str) -> Result<Vec<f64>> {
    let mut lines = content_lines(text);
    header(&mut lines, "witness v1")?;
    let (line, x) = keyed(&mut lines, "x")?;
    let x = reals(line, x)?;
    if let Some((line, _)) = lines.next() {
        return Err(ParseError::new(line, ParseErrorKind::TrailingContent).into());
    }
    Ok(x)
}

/// Parses an external witness and accepts it as SAT only if it lies in the
/// query region and changes the label.
pub fn import_witness(net: &Network, q: &VerificationQuery, text: &str) -> Result<Verdict> {
    let x = parse_witness(text)?;
    if x.len() != net.input_size() {
        return Err(Error::WitnessRejected(format!(
            "witness has {} coordinates, network takes {}",
            x.len(),
            net.input_size()
        )));
    }
    if !q.is_counterexample(net, &x) {
        return Err(Error::WitnessRejected(
            "point is outside the query region or keeps the original label".into(),
        ));
    }
    Ok(Verdict { kind: VerdictKind::Sat(x), stats: VerifierStats::default() })
}
