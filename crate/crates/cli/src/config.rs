//! Declarative run configuration. A TOML file supplies the base values and
//! command-line flags override individual fields.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use docspan_core::augment::{
    AugmentConfig, BudgetSide, LengthFilter, UnitMode, DEFAULT_CHAR_BUDGET,
};
use docspan_core::corpus::CorpusFormat;
use docspan_core::postprocess::{PostprocessOptions, RepetitionRule};
use docspan_core::schedule::{WindowLimits, DEFAULT_NONOVERLAP_LIMIT};
use docspan_core::strategy::{Cascade, PositionLabel, ValidityRules};
use docspan_core::translate::{BackendSpec, ClientOptions};
use docspan_core::SeparatorToken;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub budget: usize,
    pub upsample: usize,
    pub max_units: Option<usize>,
    pub unit_mode: String,
    pub budget_side: String,
}

impl Default for AugmentSection {
    fn default() -> Self {
        Self {
            budget: DEFAULT_CHAR_BUDGET,
            upsample: 1,
            max_units: None,
            unit_mode: "est-subwords".into(),
            budget_side: "source".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub mode: String,
    pub pre: usize,
    pub main: usize,
    pub total: usize,
    pub limit: usize,
}

impl Default for WindowSection {
    fn default() -> Self {
        let limits = WindowLimits::default();
        Self {
            mode: "windows".into(),
            pre: limits.pre_max,
            main: limits.main_max,
            total: limits.total_max,
            limit: DEFAULT_NONOVERLAP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositionalSection {
    pub cascade: String,
    pub max_repeats: usize,
    pub max_wordlen: usize,
}

impl Default for PositionalSection {
    fn default() -> Self {
        let rules = ValidityRules::default();
        Self {
            cascade: Cascade::default().to_string(),
            max_repeats: rules.max_word_repeats,
            max_wordlen: rules.max_word_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub default: String,
    /// Position label (e.g. `2/3`) to backend spec.
    pub per_label: BTreeMap<String, String>,
    pub retries: u32,
    pub timeout_secs: u64,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            default: "mock:identity".into(),
            per_label: BTreeMap::new(),
            retries: 2,
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocessSection {
    pub repetitions: bool,
    pub quotes: bool,
    pub keep_runs: usize,
    pub max_runs: usize,
    pub min_phrase: usize,
    pub max_phrase: usize,
    /// Restart quote pairing after every separator token.
    pub per_segment: bool,
}

impl Default for PostprocessSection {
    fn default() -> Self {
        let rule = RepetitionRule::default();
        Self {
            repetitions: false,
            quotes: false,
            keep_runs: rule.keep,
            max_runs: rule.max_allowed_runs,
            min_phrase: rule.min_phrase_words,
            max_phrase: rule.max_phrase_words,
            per_segment: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsistencySection {
    pub skip_punctuation: bool,
    pub name_a: String,
    pub name_b: String,
}

impl Default for ConsistencySection {
    fn default() -> Self {
        Self {
            skip_punctuation: false,
            name_a: "A".into(),
            name_b: "B".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub separator: String,
    pub seed: u64,
    pub workers: usize,
    pub format: String,
    pub augment: AugmentSection,
    pub windows: WindowSection,
    pub positional: PositionalSection,
    pub backend: BackendSection,
    pub postprocess: PostprocessSection,
    pub consistency: ConsistencySection,
    /// Named input/output paths, used when the matching flag is absent.
    pub paths: BTreeMap<String, PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            separator: SeparatorToken::default().as_str().to_string(),
            seed: 0,
            workers: 1,
            format: "blank-line".into(),
            augment: AugmentSection::default(),
            windows: WindowSection::default(),
            positional: PositionalSection::default(),
            backend: BackendSection::default(),
            postprocess: PostprocessSection::default(),
            consistency: ConsistencySection::default(),
            paths: BTreeMap::new(),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn path(&self, flag: &Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| self.paths.get(key).cloned())
            .ok_or_else(|| {
                CliError::Config(format!("missing path `{key}` (flag or [paths] entry)"))
            })
    }

    pub fn optional_path(&self, flag: &Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.clone().or_else(|| self.paths.get(key).cloned())
    }

    pub fn separator_token(&self) -> Result<SeparatorToken, CliError> {
        SeparatorToken::new(self.separator.clone()).map_err(config_err)
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat, CliError> {
        self.format.parse().map_err(config_err)
    }

    pub fn augment_config(&self) -> Result<AugmentConfig, CliError> {
        let a = &self.augment;
        let unit_mode: UnitMode = a.unit_mode.parse().map_err(config_err)?;
        let budget_side: BudgetSide = a.budget_side.parse().map_err(config_err)?;
        let config = AugmentConfig {
            char_budget: a.budget,
            separator: self.separator_token()?,
            seed: self.seed,
            upsample_factor: a.upsample,
            length_filter: a.max_units.map(|max_units| LengthFilter {
                max_units,
                unit_mode,
            }),
            budget_side,
        };
        config.validate().map_err(config_err)?;
        Ok(config)
    }

    pub fn window_limits(&self) -> Result<WindowLimits, CliError> {
        let limits = WindowLimits {
            pre_max: self.windows.pre,
            main_max: self.windows.main,
            total_max: self.windows.total,
        };
        limits.validate().map_err(config_err)?;
        Ok(limits)
    }

    pub fn decode_mode(&self) -> Result<DecodeMode, CliError> {
        match self.windows.mode.as_str() {
            "windows" => Ok(DecodeMode::Windows),
            "nonoverlap" => {
                if self.windows.limit == 0 {
                    return Err(CliError::Config("nonoverlap limit must be positive".into()));
                }
                Ok(DecodeMode::NonOverlap)
            }
            other => Err(CliError::Config(format!(
                "unknown mode {other:?} (expected windows or nonoverlap)"
            ))),
        }
    }

    pub fn validity_rules(&self) -> Result<ValidityRules, CliError> {
        let rules = ValidityRules {
            max_word_repeats: self.positional.max_repeats,
            max_word_len: self.positional.max_wordlen,
        };
        rules.validate().map_err(config_err)?;
        Ok(rules)
    }

    pub fn cascade(&self) -> Result<Cascade, CliError> {
        self.positional.cascade.parse().map_err(config_err)
    }

    pub fn client_options(&self) -> Result<ClientOptions, CliError> {
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(ClientOptions {
            workers: self.workers,
            retries: self.backend.retries,
            timeout: Duration::from_secs(self.backend.timeout_secs),
        })
    }

    pub fn default_backend(&self) -> Result<BackendSpec, CliError> {
        self.backend.default.parse().map_err(config_err)
    }

    pub fn label_backends(&self) -> Result<Vec<(PositionLabel, BackendSpec)>, CliError> {
        self.backend
            .per_label
            .iter()
            .map(|(label, spec)| {
                Ok((
                    label.parse().map_err(config_err)?,
                    spec.parse().map_err(config_err)?,
                ))
            })
            .collect()
    }

    pub fn postprocess_options(&self) -> Result<PostprocessOptions, CliError> {
        let p = &self.postprocess;
        let repetitions = if p.repetitions {
            let rule = RepetitionRule {
                min_phrase_words: p.min_phrase,
                max_phrase_words: p.max_phrase,
                max_allowed_runs: p.max_runs,
                keep: p.keep_runs,
            };
            rule.validate().map_err(config_err)?;
            Some(rule)
        } else {
            None
        };
        Ok(PostprocessOptions {
            repetitions,
            quotes: p.quotes,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Windows,
    NonOverlap,
}
