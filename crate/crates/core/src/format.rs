//! `relunet v1` text format.
//!
//! ```text
//! relunet v1
//! <layer sizes>
//! <input lower bounds>
//! <input upper bounds>
//! [labels <name> ...]
//! <one line per neuron, layer by layer: weight row followed by bias>
//! ```
//!
//! `#` starts a comment that runs to the end of the line; blank lines are
//! ignored. The writer emits 17 significant digits so that
//! `save(load(text)) == text` for files it produced.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::network::{Layer, Network};

pub const HEADER: &str = "relunet v1";

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate() }
    }

    /// Next non-empty content line with its 1-based line number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.inner.by_ref() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                return Some((idx + 1, content));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> std::result::Result<(usize, &'a str), ParseError> {
        self.next_content()
            .ok_or_else(|| ParseError::new(0, ParseErrorKind::UnexpectedEof(what.to_string())))
    }
}

fn parse_reals(line: usize, content: &str) -> std::result::Result<Vec<f64>, ParseError> {
    content
        .split_whitespace()
        .map(|tok| {
            let v: f64 = tok
                .parse()
                .map_err(|_| ParseError::new(line, ParseErrorKind::BadNumber(tok.to_string())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ParseError::new(line, ParseErrorKind::NonFinite(tok.to_string())))
            }
        })
        .collect()
}

fn parse_bounds(
    lines: &mut Lines<'_>,
    expected: usize,
    which: &str,
) -> std::result::Result<Vec<f64>, ParseError> {
    let (line, content) = lines
        .next_content()
        .ok_or_else(|| ParseError::new(0, ParseErrorKind::MissingBounds))?;
    let values = parse_reals(line, content)?;
    if values.len() != expected {
        return Err(ParseError::new(
            line,
            ParseErrorKind::DimensionMismatch(format!(
                "{which} bounds have {} entries, expected {expected}",
                values.len()
            )),
        ));
    }
    Ok(values)
}

/// Parses a network from text.
pub fn parse_network(text: &str) -> std::result::Result<Network, ParseError> {
    let mut lines = Lines::new(text);

    let (line, header) = lines.expect("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["relunet", "v1"] {
        return Err(ParseError::new(
            line,
            ParseErrorKind::MalformedHeader(format!("expected `{HEADER}`, found `{header}`")),
        ));
    }

    let (line, sizes_text) = lines.expect("layer sizes")?;
    let sizes: Vec<usize> = sizes_text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| {
                ParseError::new(
                    line,
                    ParseErrorKind::MalformedHeader(format!("bad layer size `{tok}`")),
                )
            })
        })
        .collect::<std::result::Result<_, _>>()?;
    if sizes.len() < 3 {
        return Err(ParseError::new(
            line,
            ParseErrorKind::MalformedHeader(
                "need input, at least one hidden, and output layer sizes".into(),
            ),
        ));
    }
    if sizes.contains(&0) {
        return Err(ParseError::new(
            line,
            ParseErrorKind::MalformedHeader("layer sizes must be positive".into()),
        ));
    }

    let lower = parse_bounds(&mut lines, sizes[0], "lower")?;
    let upper = parse_bounds(&mut lines, sizes[0], "upper")?;
    if let Some(i) = (0..sizes[0]).find(|&i| lower[i] > upper[i]) {
        return Err(ParseError::new(
            0,
            ParseErrorKind::InvalidNetwork(format!("lower bound exceeds upper bound in dimension {i}")),
        ));
    }

    let mut pending = lines.next_content();
    let mut labels = None;
    if let Some((line, content)) = pending {
        if let Some(rest) = content.strip_prefix("labels") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.len() != sizes[sizes.len() - 1] {
                    return Err(ParseError::new(
                        line,
                        ParseErrorKind::DimensionMismatch(format!(
                            "{} labels for {} outputs",
                            names.len(),
                            sizes[sizes.len() - 1]
                        )),
                    ));
                }
                labels = Some(names);
                pending = lines.next_content();
            }
        }
    }

    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for (k, pair) in sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let mut rows = Vec::with_capacity(fan_out);
        let mut bias = Vec::with_capacity(fan_out);
        for j in 0..fan_out {
            let (line, content) = pending.take().ok_or_else(|| {
                ParseError::new(0, ParseErrorKind::UnexpectedEof(format!("layer {k} neuron {j}")))
            })?;
            let mut values = parse_reals(line, content)?;
            if values.len() != fan_in + 1 {
                return Err(ParseError::new(
                    line,
                    ParseErrorKind::DimensionMismatch(format!(
                        "layer {k} neuron {j}: expected {} values ({fan_in} weights and a bias), found {}",
                        fan_in + 1,
                        values.len()
                    )),
                ));
            }
            bias.push(values.pop().unwrap_or_default());
            rows.push(values);
            pending = lines.next_content();
        }
        let layer = Layer::from_rows(rows, bias)
            .map_err(|e| ParseError::new(0, ParseErrorKind::InvalidNetwork(e.to_string())))?;
        layers.push(layer);
    }
    if let Some((line, _)) = pending {
        return Err(ParseError::new(line, ParseErrorKind::TrailingContent));
    }

    Network::new(layers, lower, upper, labels)
        .map_err(|e| ParseError::new(0, ParseErrorKind::InvalidNetwork(e.to_string())))
}

pub fn load_network(bytes: &[u8]) -> Result<Network> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ParseError::new(0, ParseErrorKind::MalformedHeader(format!("not UTF-8: {e}"))))?;
    Ok(parse_network(text)?)
}

pub fn read_network(path: impl AsRef<Path>) -> Result<Network> {
    load_network(&std::fs::read(path)?)
}

/// Formats a real with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Space-separated [`format_real`]s.
pub fn format_reals(values: &[f64]) -> String {
    values.iter().map(|v| format_real(*v)).collect::<Vec<_>>().join(" ")
}

/// Serializes a network in canonical form.
pub fn save_network(net: &Network) -> String {
    let mut out = String::new();
    let sizes: Vec<String> = net.layer_sizes().iter().map(usize::to_string).collect();
    // Writing into a String cannot fail.
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "{}", sizes.join(" "));
    let _ = writeln!(out, "{}", format_reals(net.input_lower()));
    let _ = writeln!(out, "{}", format_reals(net.input_upper()));
    if let Some(labels) = net.labels() {
        let _ = writeln!(out, "labels {}", labels.join(" "));
    }
    for layer in net.layers() {
        for j in 0..layer.outputs() {
            let _ = writeln!(out, "{} {}", format_reals(layer.row(j)), format_real(layer.bias()[j]));
        }
    }
    out
}

pub fn write_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, save_network(net)).map_err(Error::from)
}
