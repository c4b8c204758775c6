//! On-disk formats: trace sample files, suite configuration, and expected
//! solution lists.
//!
//! A trace file is UTF-8 text where `#` starts a comment. Lines consisting
//! of `---` split it into up to three blocks: positive traces, negative
//! traces, and an optional list of proposition names (comma-separated;
//! default names are `p0,p1,...`). Each trace is one line — states
//! separated by `;`, each state a comma-separated 0/1 vector, with an
//! optional `::k` suffix giving the 0-based loop start (default: the last
//! state loops to itself).
//!
//! ```text
//! # one positive, one negative, over ready/done
//! 0,0;1,0;0,1::1
//! ---
//! 0,0::0
//! ---
//! ready,done
//! ```

use std::time::Duration;

use ltlearn_core::formula::Prop;
use ltlearn_core::trace::{LassoTrace, Sample, TraceError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: expected a 0/1 value, found `{token}`")]
    BadBit { line: usize, token: String },
    #[error("line {line}: bad loop start `{token}`")]
    BadLoop { line: usize, token: String },
    #[error("line {line}: empty state vector")]
    EmptyState { line: usize },
    #[error("a trace file has at most three `---` blocks, found {got}")]
    TooManyBlocks { got: usize },
    #[error("`{name}` is not a usable proposition name")]
    BadPropName { name: String },
    #[error("proposition `{name}` is listed twice")]
    DupProp { name: String },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: `{value}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("line {line}: expected `key = value`")]
    NotKeyValue { line: usize },
}

/// Strips the `#` comment and surrounding whitespace, keeping 1-based line
/// numbers for the non-empty remainder.
fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            None
        } else {
            Some((idx + 1, line))
        }
    })
}

/// States of one trace plus its loop start, if the line gave one.
type RawTrace = (Vec<Vec<bool>>, Option<usize>);

fn parse_trace_line(line_no: usize, line: &str) -> Result<RawTrace, FormatError> {
    let (body, loop_part) = match line.split_once("::") {
        Some((a, b)) => (a, Some(b.trim())),
        None => (line, None),
    };
    let mut states = Vec::new();
    for state_src in body.split(';') {
        if state_src.trim().is_empty() {
            return Err(FormatError::EmptyState { line: line_no });
        }
        let mut state = Vec::new();
        for token in state_src.split(',') {
            match token.trim() {
                "0" => state.push(false),
                "1" => state.push(true),
                other => {
                    return Err(FormatError::BadBit { line: line_no, token: other.to_string() })
                }
            }
        }
        states.push(state);
    }
    let loop_start = match loop_part {
        Some(tok) => Some(tok.parse::<usize>().map_err(|_| FormatError::BadLoop {
            line: line_no,
            token: tok.to_string(),
        })?),
        None => None,
    };
    Ok((states, loop_start))
}

fn valid_prop_name(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    // single capital letters G/F/X/U are formula operators, not atoms
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "G" | "F" | "X" | "U")
}

/// Parses a full trace file into a validated [`Sample`].
pub fn parse_trace_file(text: &str) -> Result<Sample, FormatError> {
    let mut blocks: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (line_no, line) in meaningful_lines(text) {
        if line == "---" {
            blocks.push(Vec::new());
        } else {
            blocks.last_mut().unwrap().push((line_no, line));
        }
    }
    if blocks.len() > 3 {
        return Err(FormatError::TooManyBlocks { got: blocks.len() });
    }

    let mut raw: [Vec<RawTrace>; 2] = [Vec::new(), Vec::new()];
    for (which, block) in blocks.iter().take(2).enumerate() {
        for &(line_no, line) in block {
            raw[which].push(parse_trace_line(line_no, line)?);
        }
    }

    let ap: Vec<Prop> = if blocks.len() == 3 {
        let mut names = Vec::new();
        for &(_, line) in &blocks[2] {
            names.extend(line.split(',').map(str::trim).filter(|s| !s.is_empty()));
        }
        for (i, name) in names.iter().enumerate() {
            if !valid_prop_name(name) {
                return Err(FormatError::BadPropName { name: name.to_string() });
            }
            if names[..i].contains(name) {
                return Err(FormatError::DupProp { name: name.to_string() });
            }
        }
        names.iter().enumerate().map(|(i, n)| Prop::new(*n, i)).collect()
    } else {
        let width = raw
            .iter()
            .flatten()
            .next()
            .map(|(states, _)| states[0].len())
            .unwrap_or(0);
        (0..width).map(|i| Prop::new(format!("p{i}"), i)).collect()
    };

    let mut traces: [Vec<LassoTrace>; 2] = [Vec::new(), Vec::new()];
    for (which, block) in raw.into_iter().enumerate() {
        for (states, loop_start) in block {
            let loop_start = loop_start.unwrap_or(states.len() - 1);
            traces[which].push(LassoTrace::new(ap.clone(), states, loop_start)?);
        }
    }
    let [positives, negatives] = traces;
    Ok(Sample::new(ap, positives, negatives)?)
}

/// Renders a sample in the format [`parse_trace_file`] reads.
pub fn write_trace_file(sample: &Sample) -> String {
    fn line(t: &LassoTrace) -> String {
        let states = t
            .states
            .iter()
            .map(|s| {
                s.iter().map(|&b| if b { "1" } else { "0" }).collect::<Vec<_>>().join(",")
            })
            .collect::<Vec<_>>()
            .join(";");
        format!("{states}::{}", t.loop_start)
    }
    let mut out = String::new();
    for t in &sample.positives {
        out.push_str(&line(t));
        out.push('\n');
    }
    out.push_str("---\n");
    for t in &sample.negatives {
        out.push_str(&line(t));
        out.push('\n');
    }
    out.push_str("---\n");
    let names: Vec<&str> = sample.ap.iter().map(|p| p.name.as_str()).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteMode {
    Learn,
    Enumerate,
}

/// Settings of one benchmark suite, read from its `suite.cfg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub mode: SuiteMode,
    pub max_nodes: usize,
    pub presets: Vec<String>,
    pub limit: usize,
    pub timeout: Option<Duration>,
    pub iterative: bool,
    pub co_optimal: bool,
    pub default_size_objective: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            mode: SuiteMode::Learn,
            max_nodes: 6,
            presets: Vec::new(),
            limit: 10,
            timeout: None,
            iterative: false,
            co_optimal: false,
            default_size_objective: true,
        }
    }
}

/// Parses `key = value` lines (`#` comments allowed) into a [`SuiteConfig`].
pub fn parse_suite_config(text: &str) -> Result<SuiteConfig, FormatError> {
    let mut cfg = SuiteConfig::default();
    for (line_no, line) in meaningful_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or(FormatError::NotKeyValue { line: line_no })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || FormatError::BadValue {
            line: line_no,
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "mode" => {
                cfg.mode = match value {
                    "learn" => SuiteMode::Learn,
                    "enumerate" => SuiteMode::Enumerate,
                    _ => return Err(bad()),
                }
            }
            "max_nodes" => cfg.max_nodes = value.parse().map_err(|_| bad())?,
            "presets" => {
                cfg.presets =
                    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
            }
            "limit" => cfg.limit = value.parse().map_err(|_| bad())?,
            "timeout" => {
                cfg.timeout = Some(Duration::from_secs(value.parse().map_err(|_| bad())?))
            }
            "iterative" => cfg.iterative = value.parse().map_err(|_| bad())?,
            "co_optimal" => cfg.co_optimal = value.parse().map_err(|_| bad())?,
            "default_size" => {
                cfg.default_size_objective = value.parse().map_err(|_| bad())?
            }
            _ => return Err(FormatError::UnknownKey { line: line_no, key: key.to_string() }),
        }
    }
    Ok(cfg)
}

/// Non-comment lines of an expected-solutions file, one formula each.
pub fn parse_expected_file(text: &str) -> Vec<String> {
    meaningful_lines(text).map(|(_, line)| line.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_traces_comments_and_the_ap_block() {
        let src = "\
# mixed sample
0,0;1,0;0,1::1   # loops at position 1
1,1
---
0,0::0
---
ready,done
";
        let s = parse_trace_file(src).unwrap();
        assert_eq!(s.ap.len(), 2);
        assert_eq!(s.ap[0].name, "ready");
        assert_eq!(s.ap[1].name, "done");
        assert_eq!(s.positives.len(), 2);
        assert_eq!(s.negatives.len(), 1);
        assert_eq!(s.positives[0].loop_start, 1);
        assert_eq!(s.positives[0].states[1], vec![true, false]);
        // default loop start is the last state
        assert_eq!(s.positives[1].loop_start, 0);
        assert_eq!(s.negatives[0].loop_start, 0);
    }

    #[test]
    fn default_names_cover_the_state_width() {
        let s = parse_trace_file("0,1,0\n---\n").unwrap();
        let names: Vec<&str> = s.ap.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["p0", "p1", "p2"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert_eq!(
            parse_trace_file("0,2\n").unwrap_err(),
            FormatError::BadBit { line: 1, token: "2".into() }
        );
        assert_eq!(
            parse_trace_file("0;1::x\n").unwrap_err(),
            FormatError::BadLoop { line: 1, token: "x".into() }
        );
        assert_eq!(
            parse_trace_file("0;;1\n").unwrap_err(),
            FormatError::EmptyState { line: 1 }
        );
        assert_eq!(
            parse_trace_file("1\n---\n0\n---\np\n---\n").unwrap_err(),
            FormatError::TooManyBlocks { got: 4 }
        );
        assert_eq!(
            parse_trace_file("1\n---\n\n---\nU\n").unwrap_err(),
            FormatError::BadPropName { name: "U".into() }
        );
        assert_eq!(
            parse_trace_file("1,1\n---\n\n---\na,a\n").unwrap_err(),
            FormatError::DupProp { name: "a".into() }
        );
        // out-of-range loop start surfaces the trace validation error
        assert!(matches!(
            parse_trace_file("0;1::2\n"),
            Err(FormatError::Trace(TraceError::LoopOutOfRange { .. }))
        ));
    }

    #[test]
    fn trace_files_round_trip() {
        let src = "0,0;1,0;0,1::1\n1,1\n---\n0,0::0\n---\nready,done\n";
        let s = parse_trace_file(src).unwrap();
        assert_eq!(write_trace_file(&s), "0,0;1,0;0,1::1\n1,1::0\n---\n0,0::0\n---\nready,done\n");
        let again = parse_trace_file(&write_trace_file(&s)).unwrap();
        assert_eq!(again.positives, s.positives);
        assert_eq!(again.negatives, s.negatives);
    }

    #[test]
    fn suite_config_defaults_and_overrides() {
        assert_eq!(parse_suite_config(""), Ok(SuiteConfig::default()));
        let cfg = parse_suite_config(
            "# voting\nmode = enumerate\nmax_nodes = 5\npresets = no-dag-reuse, nnf\nlimit = 10\ntimeout = 60\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, SuiteMode::Enumerate);
        assert_eq!(cfg.max_nodes, 5);
        assert_eq!(cfg.presets, ["no-dag-reuse", "nnf"]);
        assert_eq!(cfg.limit, 10);
        assert_eq!(cfg.timeout, Some(Duration::from_secs(60)));
        assert_eq!(
            parse_suite_config("modes = learn\n"),
            Err(FormatError::UnknownKey { line: 1, key: "modes".into() })
        );
        assert_eq!(
            parse_suite_config("max_nodes = many\n"),
            Err(FormatError::BadValue {
                line: 1,
                key: "max_nodes".into(),
                value: "many".into()
            })
        );
    }

    #[test]
    fn expected_files_keep_formula_lines_only() {
        let lines = parse_expected_file("# candidates\nG (!(a & b))\n\nF a   # fallback\n");
        assert_eq!(lines, ["G (!(a & b))", "F a"]);
    }
}
