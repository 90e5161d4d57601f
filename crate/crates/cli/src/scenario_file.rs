//! TOML scenario files.
//!
//! ```toml
//! schema_version = 1
//! blocks = 1            # optional
//! entropy_base = "e"    # optional, "e" or a number > 1
//!
//! [reward]
//! kind = "linear"       # or "constant" (r0) / "power" (a, gamma)
//! rho = 1.0
//!
//! [[miners]]
//! id = "m1"
//! alpha = 1.0
//! beta = 0.0
//! ```

use std::fmt;
use std::ops::Range;
use std::path::Path;

use pouw_core::{MinerParams, RewardSpec, Scenario};
use serde::Deserialize;
use toml::Spanned;

pub const SCHEMA_VERSION: i64 = 1;

/// A parse or validation failure, located by line where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFileError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ScenarioFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ScenarioFileError {}

/// Logarithm base for entropy reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBase(pub f64);

impl Default for EntropyBase {
    fn default() -> Self {
        EntropyBase(std::f64::consts::E)
    }
}

impl std::str::FromStr for EntropyBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" {
            return Ok(EntropyBase::default());
        }
        let b: f64 = s
            .parse()
            .map_err(|_| format!("expected \"e\" or a number > 1, got `{s}`"))?;
        if b.is_finite() && b > 1.0 {
            Ok(EntropyBase(b))
        } else {
            Err(format!("base must be > 1, got {b}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario<f64>,
    pub entropy_base: EntropyBase,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: Spanned<i64>,
    miners: Spanned<Vec<Spanned<RawMiner>>>,
    reward: Spanned<RawReward>,
    blocks: Option<Spanned<i64>>,
    entropy_base: Option<Spanned<RawBase>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMiner {
    id: Spanned<String>,
    alpha: Spanned<f64>,
    beta: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReward {
    kind: Spanned<String>,
    rho: Option<Spanned<f64>>,
    r0: Option<Spanned<f64>>,
    a: Option<Spanned<f64>>,
    gamma: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBase {
    Number(f64),
    Name(String),
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn error(
        &self,
        span: Range<usize>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> ScenarioFileError {
        ScenarioFileError {
            line: Some(self.line(span)),
            field: Some(field.into()),
            message: message.into(),
        }
    }
}

fn core_message(err: pouw_core::Error) -> String {
    match err {
        pouw_core::Error::InvalidParameter { reason, .. } => reason,
        other => other.to_string(),
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioFileError> {
    let loc = Locator { text };
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioFileError {
        line: e.span().map(|s| loc.line(s)),
        field: None,
        message: e.message().trim().to_owned(),
    })?;

    if *raw.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(loc.error(
            raw.schema_version.span(),
            "schema_version",
            format!(
                "unsupported version {}, expected {SCHEMA_VERSION}",
                raw.schema_version.get_ref()
            ),
        ));
    }

    let mut miners = Vec::new();
    for (i, m) in raw.miners.get_ref().iter().enumerate() {
        let m = m.get_ref();
        let field = |name: &str| format!("miners[{i}].{name}");
        if m.id.get_ref().trim().is_empty() {
            return Err(loc.error(m.id.span(), field("id"), "must not be empty"));
        }
        let alpha = *m.alpha.get_ref();
        let beta = *m.beta.get_ref();
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(loc.error(
                m.alpha.span(),
                field("alpha"),
                format!("must be > 0, got {alpha}"),
            ));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(loc.error(
                m.beta.span(),
                field("beta"),
                format!("must be >= 0, got {beta}"),
            ));
        }
        let params = MinerParams::new(m.id.get_ref().clone(), alpha, beta)
            .map_err(|e| loc.error(m.id.span(), field("id"), core_message(e)))?;
        miners.push(params);
    }

    let reward = parse_reward(&loc, raw.reward.get_ref(), raw.reward.span())?;

    let mut scenario = Scenario::new(miners, reward).map_err(|e| match e {
        pouw_core::Error::DuplicateMinerId(id) => {
            let span = raw
                .miners
                .get_ref()
                .iter()
                .filter(|m| m.get_ref().id.get_ref() == &id)
                .nth(1)
                .map(|m| m.get_ref().id.span())
                .unwrap_or_else(|| raw.miners.span());
            loc.error(span, "miners", format!("duplicate miner id `{id}`"))
        }
        other => loc.error(raw.miners.span(), "miners", core_message(other)),
    })?;

    if let Some(blocks) = &raw.blocks {
        let b = *blocks.get_ref();
        let b = u32::try_from(b).ok().filter(|&b| b >= 1).ok_or_else(|| {
            loc.error(
                blocks.span(),
                "blocks",
                format!("must be a positive integer, got {b}"),
            )
        })?;
        scenario = scenario
            .with_blocks(b)
            .map_err(|e| loc.error(blocks.span(), "blocks", core_message(e)))?;
    }

    let entropy_base = match &raw.entropy_base {
        None => EntropyBase::default(),
        Some(base) => {
            let parsed = match base.get_ref() {
                RawBase::Name(s) => s.parse(),
                RawBase::Number(b) => b.to_string().parse(),
            };
            parsed.map_err(|msg| loc.error(base.span(), "entropy_base", msg))?
        }
    };

    Ok(ScenarioFile {
        scenario,
        entropy_base,
    })
}

fn parse_reward(
    loc: &Locator<'_>,
    raw: &RawReward,
    span: Range<usize>,
) -> Result<RewardSpec<f64>, ScenarioFileError> {
    let need = |value: &Option<Spanned<f64>>,
                name: &str|
     -> Result<(f64, Range<usize>), ScenarioFileError> {
        value
            .as_ref()
            .map(|v| (*v.get_ref(), v.span()))
            .ok_or_else(|| loc.error(span.clone(), format!("reward.{name}"), "missing"))
    };
    let reject_extra =
        |present: &[(&Option<Spanned<f64>>, &str)]| -> Result<(), ScenarioFileError> {
            for (value, name) in present {
                if let Some(v) = value {
                    return Err(loc.error(
                        v.span(),
                        format!("reward.{name}"),
                        format!("not a parameter of reward kind `{}`", raw.kind.get_ref()),
                    ));
                }
            }
            Ok(())
        };

    match raw.kind.get_ref().as_str() {
        "linear" => {
            reject_extra(&[(&raw.r0, "r0"), (&raw.a, "a"), (&raw.gamma, "gamma")])?;
            let (rho, s) = need(&raw.rho, "rho")?;
            RewardSpec::linear(rho).map_err(|e| loc.error(s, "reward.rho", core_message(e)))
        }
        "constant" => {
            reject_extra(&[(&raw.rho, "rho"), (&raw.a, "a"), (&raw.gamma, "gamma")])?;
            let (r0, s) = need(&raw.r0, "r0")?;
            RewardSpec::constant(r0).map_err(|e| loc.error(s, "reward.r0", core_message(e)))
        }
        "power" => {
            reject_extra(&[(&raw.rho, "rho"), (&raw.r0, "r0")])?;
            let (a, sa) = need(&raw.a, "a")?;
            let (gamma, sg) = need(&raw.gamma, "gamma")?;
            RewardSpec::power(a, gamma).map_err(|e| match &e {
                pouw_core::Error::InvalidParameter { field, .. } if field == "a" => {
                    loc.error(sa, "reward.a", core_message(e))
                }
                _ => loc.error(sg, "reward.gamma", core_message(e)),
            })
        }
        other => Err(loc.error(
            raw.kind.span(),
            "reward.kind",
            format!("expected \"linear\", \"constant\" or \"power\", got \"{other}\""),
        )),
    }
}

pub fn read_scenario(path: &Path) -> Result<ScenarioFile, ScenarioFileError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioFileError {
        line: None,
        field: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_scenario(&text)
}
