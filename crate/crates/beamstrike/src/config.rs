//! TOML run configuration: attack hyperparameters plus one section per
//! pluggable component (victim, provider, similarity, tagger).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use beamstrike_core::importance::ImportanceMethod;
use beamstrike_core::{AttackConfig, ExpansionPolicy, LimeConfig};
use serde::{Deserialize, Serialize};

use crate::adapters::{
    load_http_victim, CachedProvider, HttpProvider, HttpSimilarity, HttpTagger, StdioProvider,
    StdioTagger, StdioVictim,
};
use crate::{RunnerError, CACHE_DIR_ENV};
use beamstrike_core::analysis::{RuleTagger, Tagger};
use beamstrike_core::bodega::{Similarity, TokenF1Similarity};
use beamstrike_core::candidates::{CandidateProvider, TableProvider};
use beamstrike_core::victim::{KeywordRuleVictim, LinearBagVictim, Victim};

fn default_timeout_s() -> u64 {
    10
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaSection {
    /// Task label used to group analysis figures; defaults to the dataset
    /// file stem.
    pub task: Option<String>,
    /// Victim label for reports; defaults to the victim kind.
    pub victim_label: Option<String>,
}

/// The `[attack]` section: every search hyperparameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSection {
    pub beam_size_k: usize,
    pub branching_b: usize,
    pub hypothesis_count_h: usize,
    pub importance_method: ImportanceMethod,
    pub max_depth: Option<usize>,
    pub max_queries: u64,
    pub expansion_policy: ExpansionPolicy,
}

impl Default for AttackSection {
    fn default() -> Self {
        let base = AttackConfig::default();
        AttackSection {
            beam_size_k: base.beam_size_k,
            branching_b: base.branching_b,
            hypothesis_count_h: base.hypothesis_count_h,
            importance_method: base.importance_method,
            max_depth: base.max_depth,
            max_queries: base.max_queries,
            expansion_policy: base.expansion_policy,
        }
    }
}

impl AttackSection {
    pub fn to_attack_config(&self, lime: LimeConfig) -> AttackConfig {
        AttackConfig {
            beam_size_k: self.beam_size_k,
            branching_b: self.branching_b,
            hypothesis_count_h: self.hypothesis_count_h,
            importance_method: self.importance_method,
            max_depth: self.max_depth,
            max_queries: self.max_queries,
            expansion_policy: self.expansion_policy,
            lime,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VictimSpec {
    LinearBag {
        #[serde(default)]
        vocabulary: BTreeMap<String, f64>,
        #[serde(default)]
        bias: f64,
    },
    KeywordRule {
        triggers: Vec<String>,
    },
    Http {
        url: String,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
    Stdio {
        command: Vec<String>,
    },
}

impl Default for VictimSpec {
    fn default() -> Self {
        VictimSpec::LinearBag {
            vocabulary: BTreeMap::new(),
            bias: 0.0,
        }
    }
}

impl VictimSpec {
    pub fn label(&self) -> String {
        match self {
            VictimSpec::LinearBag { .. } => "linear_bag".to_string(),
            VictimSpec::KeywordRule { .. } => "keyword_rule".to_string(),
            VictimSpec::Http { url, .. } => format!("http:{url}"),
            VictimSpec::Stdio { command } => format!("stdio:{}", command.join(" ")),
        }
    }

    /// Build the victim; external adapters run one health-check probe and
    /// fail with `VictimUnavailable` when it does not pass.
    pub fn build(&self) -> Result<Arc<dyn Victim + Send + Sync>, RunnerError> {
        match self {
            VictimSpec::LinearBag { vocabulary, bias } => Ok(Arc::new(LinearBagVictim::new(
                vocabulary.clone(),
                *bias,
            ))),
            VictimSpec::KeywordRule { triggers } => {
                Ok(Arc::new(KeywordRuleVictim::new(triggers.iter().cloned())))
            }
            VictimSpec::Http { url, timeout_s } => {
                let victim = load_http_victim(url, Duration::from_secs(*timeout_s))
                    .map_err(|e| RunnerError::VictimUnavailable(e.to_string()))?;
                Ok(Arc::new(victim))
            }
            VictimSpec::Stdio { command } => {
                let victim = StdioVictim::spawn(command)
                    .map_err(|e| RunnerError::VictimUnavailable(e.to_string()))?;
                Ok(Arc::new(victim))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderSpec {
    Table {
        #[serde(default)]
        table: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        fallback: Vec<String>,
    },
    Http {
        url: String,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
    Stdio {
        command: Vec<String>,
    },
}

impl Default for ProviderSpec {
    fn default() -> Self {
        ProviderSpec::Table {
            table: BTreeMap::new(),
            fallback: Vec::new(),
        }
    }
}

impl ProviderSpec {
    pub fn label(&self) -> String {
        match self {
            ProviderSpec::Table { .. } => "table".to_string(),
            ProviderSpec::Http { url, .. } => format!("http:{url}"),
            ProviderSpec::Stdio { command } => format!("stdio:{}", command.join(" ")),
        }
    }

    /// Build the provider. Remote providers are wrapped in a filesystem
    /// response cache when `BEAMSTRIKE_CACHE_DIR` is set.
    pub fn build(&self) -> Result<Arc<dyn CandidateProvider + Send + Sync>, RunnerError> {
        let remote: Arc<dyn CandidateProvider + Send + Sync> = match self {
            ProviderSpec::Table { table, fallback } => {
                return Ok(Arc::new(TableProvider::new(table.clone(), fallback.clone())));
            }
            ProviderSpec::Http { url, timeout_s } => {
                Arc::new(HttpProvider::new(url, Duration::from_secs(*timeout_s)))
            }
            ProviderSpec::Stdio { command } => Arc::new(
                StdioProvider::spawn(command).map_err(RunnerError::ConfigInvalid)?,
            ),
        };
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) => Ok(Arc::new(CachedProvider::new(remote, dir.into())?)),
            None => Ok(remote),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimilaritySpec {
    #[default]
    TokenF1,
    Http {
        url: String,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
}

impl SimilaritySpec {
    pub fn label(&self) -> String {
        match self {
            SimilaritySpec::TokenF1 => "token_f1".to_string(),
            SimilaritySpec::Http { url, .. } => format!("http:{url}"),
        }
    }

    pub fn build(&self) -> Arc<dyn Similarity + Send + Sync> {
        match self {
            SimilaritySpec::TokenF1 => Arc::new(TokenF1Similarity),
            SimilaritySpec::Http { url, timeout_s } => {
                Arc::new(HttpSimilarity::new(url, Duration::from_secs(*timeout_s)))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaggerSpec {
    #[default]
    Rule,
    Http {
        url: String,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
    Stdio {
        command: Vec<String>,
    },
}

impl TaggerSpec {
    pub fn build(&self) -> Result<Arc<dyn Tagger + Send + Sync>, RunnerError> {
        match self {
            TaggerSpec::Rule => Ok(Arc::new(RuleTagger)),
            TaggerSpec::Http { url, timeout_s } => {
                Ok(Arc::new(HttpTagger::new(url, Duration::from_secs(*timeout_s))))
            }
            TaggerSpec::Stdio { command } => Ok(Arc::new(
                StdioTagger::spawn(command).map_err(RunnerError::ConfigInvalid)?,
            )),
        }
    }
}

/// The `[sweep.grid]` table: value lists for the swept hyperparameters.
/// Unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub k: Option<Vec<usize>>,
    pub b: Option<Vec<usize>>,
    pub h: Option<Vec<usize>>,
    pub importance_method: Option<Vec<ImportanceMethod>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub grid: GridSection,
    pub subset_size: usize,
    #[serde(default)]
    pub seed: u64,
}

/// One config file drives `attack` and `sweep`; the `[sweep]` section is
/// only required for the latter.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub meta: MetaSection,
    pub attack: AttackSection,
    pub lime: LimeConfig,
    pub victim: VictimSpec,
    pub provider: ProviderSpec,
    pub similarity: SimilaritySpec,
    pub tagger: TaggerSpec,
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, RunnerError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| RunnerError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&raw)
            .map_err(|e| RunnerError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        config
            .attack_config()
            .validate()
            .map_err(|e| RunnerError::ConfigInvalid(e.to_string()))?;
        Ok(config)
    }

    pub fn attack_config(&self) -> AttackConfig {
        self.attack.to_attack_config(self.lime.clone())
    }
}
