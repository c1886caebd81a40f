//! Flat key-value run configuration.
//!
//! ```text
//! # global keys
//! n = 1
//! L = 4
//! G = 256
//! seed = 7
//!
//! [2.1i]
//! alpha = 0.5
//! p = 3, 3
//!
//! [2.1i refused]
//! alpha = 0.5
//! p = 4, 4
//! expect: refusal
//! ```
//!
//! `=` and `:` both separate keys from values. A section header is a theorem
//! id optionally followed by a label; the same id may appear several times.

use std::path::Path;

use mfl_core::{ExponentInputs, ExponentSet, Kernel, KernelVector, TheoremId};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value {value:?} for {key}: {reason}")]
    BadValue { line: usize, key: String, value: String, reason: String },
    #[error("section [{section}] at line {line}: missing key {key:?}")]
    Missing { line: usize, section: String, key: String },
    #[error("section [{section}] at line {line}: {reason}")]
    Section { line: usize, section: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// What a theorem section is expected to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    /// Hypotheses hold and every exact check passes.
    Pass,
    /// The hypotheses are violated; the check must refuse.
    Refusal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremSection {
    pub theorem: TheoremId,
    pub label: Option<String>,
    pub line: usize,
    pub exps: ExponentSet,
    /// Kernel descriptors; defaults to `const:1` for every slot.
    pub kernels: Vec<String>,
    pub expect: Expect,
}

impl TheoremSection {
    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => format!("{} {l}", self.theorem),
            None => self.theorem.to_string(),
        }
    }

    /// Kernels for the statement: one per inner function, or one for the HLS form.
    pub fn kernel_vector(&self, n: usize) -> Result<KernelVector, ConfigError> {
        let bad = |reason: String| ConfigError::Section { line: self.line, section: self.name(), reason };
        let kernels = self
            .kernels
            .iter()
            .map(|d| Kernel::parse(d, n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        KernelVector::new(kernels).map_err(|e| bad(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub half_width: f64,
    pub points: usize,
    pub seed: u64,
    pub corpus_size: usize,
    pub stride: usize,
    pub refine: bool,
    /// Corpus pairs fed to the exact suite; 0 disables it.
    pub exact_pairs: usize,
    /// Adversarial search steps per theorem; 0 disables it.
    pub budget: usize,
    /// Write argmax members as MFL1 files next to the report.
    pub dump: bool,
    pub sections: Vec<TheoremSection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 1,
            half_width: 4.0,
            points: 256,
            seed: 0,
            corpus_size: 8,
            stride: 4,
            refine: false,
            exact_pairs: 0,
            budget: 0,
            dump: false,
            sections: Vec::new(),
        }
    }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct RawSection {
    line: usize,
    header: String,
    entries: Vec<Entry>,
}

fn parse_value<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    e.value.parse::<T>().map_err(|err| ConfigError::BadValue {
        line: e.line,
        key: e.key.clone(),
        value: e.value.clone(),
        reason: err.to_string(),
    })
}

fn parse_real(e: &Entry) -> Result<f64, ConfigError> {
    match e.value.as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => parse_value::<f64>(e),
    }
}

fn parse_list(e: &Entry) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split(',')
        .map(|v| Entry { line: e.line, key: e.key.clone(), value: v.trim().to_string() })
        .map(|v| parse_real(&v))
        .collect()
}

fn parse_bool(e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            line: e.line,
            key: e.key.clone(),
            value: e.value.clone(),
            reason: "expected true or false".into(),
        }),
    }
}

fn split_lines(text: &str) -> Result<(Vec<Entry>, Vec<RawSection>), ConfigError> {
    let mut globals = Vec::new();
    let mut sections: Vec<RawSection> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let header = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?;
            sections.push(RawSection { line, header: header.trim().to_string(), entries: Vec::new() });
            continue;
        }
        let sep = content
            .find(['=', ':'])
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected key = value, got {content:?}") })?;
        let key = content[..sep].trim().to_string();
        let value = content[sep + 1..].trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line, message: "empty key".into() });
        }
        let entries = match sections.last_mut() {
            Some(s) => &mut s.entries,
            None => &mut globals,
        };
        if entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::Duplicate { line, key });
        }
        entries.push(Entry { line, key, value });
    }
    Ok((globals, sections))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let (globals, raw_sections) = split_lines(text)?;
        let mut cfg = RunConfig::default();
        for e in &globals {
            match e.key.as_str() {
                "n" => cfg.n = parse_value(e)?,
                "L" => cfg.half_width = parse_value(e)?,
                "G" => cfg.points = parse_value(e)?,
                "seed" => cfg.seed = parse_value(e)?,
                "corpus_size" => cfg.corpus_size = parse_value(e)?,
                "stride" => cfg.stride = parse_value(e)?,
                "refine" => cfg.refine = parse_bool(e)?,
                "exact_pairs" => cfg.exact_pairs = parse_value(e)?,
                "budget" => cfg.budget = parse_value(e)?,
                "dump" => cfg.dump = parse_bool(e)?,
                _ => return Err(ConfigError::UnknownKey { line: e.line, key: e.key.clone() }),
            }
        }
        for raw in raw_sections {
            cfg.sections.push(parse_section(&raw, cfg.n)?);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Self::parse(&text)
    }
}

fn parse_section(raw: &RawSection, n: usize) -> Result<TheoremSection, ConfigError> {
    let mut words = raw.header.split_whitespace();
    let id = words.next().unwrap_or("");
    let label = {
        let rest: Vec<&str> = words.collect();
        (!rest.is_empty()).then(|| rest.join(" "))
    };
    let section_err = |reason: String| ConfigError::Section { line: raw.line, section: raw.header.clone(), reason };
    let theorem = TheoremId::parse(id).map_err(|e| section_err(e.to_string()))?;
    let (mut alpha, mut s, mut p, mut kappa, mut outer_p, mut kernels, mut expect) =
        (None, f64::INFINITY, None, 0.0, None, None, Expect::Pass);
    for e in &raw.entries {
        match e.key.as_str() {
            "alpha" => alpha = Some(parse_real(e)?),
            "s" => s = parse_real(e)?,
            "p" => p = Some(parse_list(e)?),
            "kappa" => kappa = parse_real(e)?,
            "outer_p" => outer_p = Some(parse_real(e)?),
            "kernels" => kernels = Some(e.value.split(',').map(|k| k.trim().to_string()).collect::<Vec<_>>()),
            "expect" => {
                expect = match e.value.as_str() {
                    "pass" => Expect::Pass,
                    "refusal" => Expect::Refusal,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line: e.line,
                            key: e.key.clone(),
                            value: e.value.clone(),
                            reason: "expected pass or refusal".into(),
                        })
                    }
                }
            }
            _ => return Err(ConfigError::UnknownKey { line: e.line, key: e.key.clone() }),
        }
    }
    let missing = |key: &str| ConfigError::Missing { line: raw.line, section: raw.header.clone(), key: key.into() };
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    let p = p.ok_or_else(|| missing("p"))?;
    let m = p.len();
    let exps = ExponentSet::derive(ExponentInputs { n, alpha, s, p_list: p, kappa, outer_p })
        .map_err(|e| section_err(e.to_string()))?;
    let slots = if theorem == TheoremId::HlsKernel { 1 } else { m };
    let kernels = kernels.unwrap_or_else(|| vec!["const:1".to_string(); slots]);
    let section = TheoremSection { theorem, label, line: raw.line, exps, kernels, expect };
    section.kernel_vector(n)?;
    Ok(section)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_globals_and_sections() {
        let cfg = RunConfig::parse(
            "n = 1\nL: 2\nG = 128 # trailing\n\n[2.1i]\nalpha = 0.5\np = 3, 3\n[2.1i bad]\nalpha=0.5\np=4,4\nexpect: refusal\n",
        )
        .unwrap();
        assert_eq!((cfg.n, cfg.half_width, cfg.points), (1, 2.0, 128));
        assert_eq!(cfg.sections.len(), 2);
        assert_eq!(cfg.sections[1].expect, Expect::Refusal);
        assert_eq!(cfg.sections[1].label.as_deref(), Some("bad"));
        assert_eq!(cfg.sections[0].kernels, vec!["const:1", "const:1"]);
    }

    #[test]
    fn unknown_keys_carry_line_numbers() {
        assert_eq!(
            RunConfig::parse("n = 1\nbogus = 3\n"),
            Err(ConfigError::UnknownKey { line: 2, key: "bogus".into() })
        );
        let err = RunConfig::parse("[2.1i]\nalpha = 0.5\np = 3,3\nbeta = 1\n").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { line: 4, key: "beta".into() });
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(RunConfig::parse("[2.1i\n"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse("G = many\n"), Err(ConfigError::BadValue { line: 1, .. })));
        assert!(matches!(RunConfig::parse("[9.9]\nalpha=1\np=2\n"), Err(ConfigError::Section { .. })));
        assert!(matches!(RunConfig::parse("[2.1i]\np=2\n"), Err(ConfigError::Missing { .. })));
        assert!(matches!(RunConfig::parse("n=1\nn=2\n"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(RunConfig::parse("[2.1i]\nalpha=0.5\np=3,3\nkernels=const:1,wobble\n"), Err(ConfigError::Section { .. })));
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::parse("# nothing\n").unwrap(), RunConfig::default());
    }
}
