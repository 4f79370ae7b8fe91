//! Adapters that put external models behind the core traits: victims over
//! HTTP or stdio, fill-mask candidate providers, a BLEURT-style similarity
//! scorer, and POS taggers — plus a filesystem response cache for remote
//! providers.

use std::path::PathBuf;
use std::time::Duration;

use beamstrike_core::analysis::{Tagger, TaggerError};
use beamstrike_core::bodega::{Similarity, SimilarityError};
use beamstrike_core::candidates::{sanitize_candidates, CandidateProvider, ProviderError};
use beamstrike_core::victim::{Victim, VictimError};
use sha2::{Digest, Sha256};

use crate::rpc::{
    check_schema, FillMaskRequest, FillMaskResponse, HttpClient, PredictRequest, PredictResponse,
    SimilarityRequest, SimilarityResponse, StdioTransport, TagRequest, TagResponse,
    FILL_MASK_PATH, PREDICT_PROBA_PATH, SCHEMA_VERSION, SIMILARITY_PATH, TAG_PATH,
};
use crate::RunnerError;

const PROBE_TEXT: &str = "beamstrike health check";

fn validate_probabilities(probs: &[Vec<f64>], texts: usize) -> Result<(), String> {
    if probs.len() != texts {
        return Err(format!("expected {} probability vectors, got {}", texts, probs.len()));
    }
    for (i, vector) in probs.iter().enumerate() {
        if vector.len() < 2 {
            return Err(format!("vector {i} has {} classes, need at least 2", vector.len()));
        }
        let sum: f64 = vector.iter().sum();
        if vector.iter().any(|p| *p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > 1e-6 {
            return Err(format!("vector {i} is not a probability distribution: {vector:?}"));
        }
    }
    Ok(())
}

/// Victim served over HTTP POST `/predict_proba`.
#[derive(Debug)]
pub struct HttpVictim {
    client: HttpClient,
    num_classes: usize,
}

/// Connect to an HTTP victim and run one health-check probe; the probe
/// response fixes the class count.
pub fn load_http_victim(url: &str, timeout: Duration) -> Result<HttpVictim, VictimError> {
    let client = HttpClient::new(url, timeout);
    let probe = predict_over_http(&client, &[PROBE_TEXT]).map_err(VictimError::Unavailable)?;
    validate_probabilities(&probe, 1).map_err(VictimError::Unavailable)?;
    Ok(HttpVictim {
        client,
        num_classes: probe[0].len(),
    })
}

fn predict_over_http(client: &HttpClient, texts: &[&str]) -> Result<Vec<Vec<f64>>, String> {
    let request = PredictRequest {
        schema: SCHEMA_VERSION.to_string(),
        texts: texts.iter().map(|t| t.to_string()).collect(),
    };
    let response: PredictResponse = client.post(PREDICT_PROBA_PATH, &request)?;
    check_schema(&response.schema)?;
    Ok(response.probabilities)
}

impl Victim for HttpVictim {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError> {
        let probs = predict_over_http(&self.client, texts).map_err(VictimError::Unavailable)?;
        validate_probabilities(&probs, texts.len()).map_err(VictimError::Unavailable)?;
        Ok(probs)
    }
}

/// Victim spoken to over line-delimited JSON on a child process's stdio.
#[derive(Debug)]
pub struct StdioVictim {
    transport: StdioTransport,
    num_classes: usize,
}

impl StdioVictim {
    pub fn spawn(command: &[String]) -> Result<StdioVictim, VictimError> {
        let transport = StdioTransport::spawn(command).map_err(VictimError::Unavailable)?;
        let probe = predict_over_stdio(&transport, &[PROBE_TEXT]).map_err(VictimError::Unavailable)?;
        validate_probabilities(&probe, 1).map_err(VictimError::Unavailable)?;
        let num_classes = probe[0].len();
        Ok(StdioVictim {
            transport,
            num_classes,
        })
    }
}

fn predict_over_stdio(transport: &StdioTransport, texts: &[&str]) -> Result<Vec<Vec<f64>>, String> {
    let request = PredictRequest {
        schema: SCHEMA_VERSION.to_string(),
        texts: texts.iter().map(|t| t.to_string()).collect(),
    };
    let response: PredictResponse = transport.round_trip(&request)?;
    check_schema(&response.schema)?;
    Ok(response.probabilities)
}

impl Victim for StdioVictim {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError> {
        let probs = predict_over_stdio(&self.transport, texts).map_err(VictimError::Unavailable)?;
        validate_probabilities(&probs, texts.len()).map_err(VictimError::Unavailable)?;
        Ok(probs)
    }
}

/// Placeholder victim substituted when the configured one failed its health
/// probe: every call reports the original failure, which turns each sample
/// into a failure outcome instead of crashing the run.
#[derive(Debug)]
pub struct UnavailableVictim {
    pub detail: String,
}

impl Victim for UnavailableVictim {
    fn num_classes(&self) -> usize {
        2
    }

    fn predict_proba(&self, _texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError> {
        Err(VictimError::Unavailable(self.detail.clone()))
    }
}

/// Fill-mask candidate provider over HTTP POST `/fill_mask`.
#[derive(Debug)]
pub struct HttpProvider {
    client: HttpClient,
}

impl HttpProvider {
    pub fn new(url: &str, timeout: Duration) -> Self {
        HttpProvider {
            client: HttpClient::new(url, timeout),
        }
    }
}

impl CandidateProvider for HttpProvider {
    fn top_candidates(
        &self,
        text_with_mask: &str,
        original_word: &str,
        limit: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let request = FillMaskRequest {
            schema: SCHEMA_VERSION.to_string(),
            text: text_with_mask.to_string(),
            top_k: limit,
        };
        let response: FillMaskResponse = self
            .client
            .post(FILL_MASK_PATH, &request)
            .map_err(ProviderError::Failure)?;
        check_schema(&response.schema).map_err(ProviderError::Failure)?;
        Ok(sanitize_candidates(response.candidates, original_word, limit))
    }
}

/// Fill-mask candidate provider over stdio.
#[derive(Debug)]
pub struct StdioProvider {
    transport: StdioTransport,
}

impl StdioProvider {
    pub fn spawn(command: &[String]) -> Result<StdioProvider, String> {
        Ok(StdioProvider {
            transport: StdioTransport::spawn(command)?,
        })
    }
}

impl CandidateProvider for StdioProvider {
    fn top_candidates(
        &self,
        text_with_mask: &str,
        original_word: &str,
        limit: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let request = FillMaskRequest {
            schema: SCHEMA_VERSION.to_string(),
            text: text_with_mask.to_string(),
            top_k: limit,
        };
        let response: FillMaskResponse = self
            .transport
            .round_trip(&request)
            .map_err(ProviderError::Failure)?;
        check_schema(&response.schema).map_err(ProviderError::Failure)?;
        Ok(sanitize_candidates(response.candidates, original_word, limit))
    }
}

/// Filesystem cache around a remote provider, keyed by the full request.
/// Activated through the `BEAMSTRIKE_CACHE_DIR` environment variable.
pub struct CachedProvider {
    inner: std::sync::Arc<dyn CandidateProvider + Send + Sync>,
    dir: PathBuf,
}

impl CachedProvider {
    pub fn new(
        inner: std::sync::Arc<dyn CandidateProvider + Send + Sync>,
        dir: PathBuf,
    ) -> Result<CachedProvider, RunnerError> {
        std::fs::create_dir_all(&dir)?;
        Ok(CachedProvider { inner, dir })
    }

    fn key_path(&self, text_with_mask: &str, original_word: &str, limit: usize) -> PathBuf {
        let mut hasher = Sha256::new();
        hasher.update(text_with_mask.as_bytes());
        hasher.update([0x1f]);
        hasher.update(original_word.as_bytes());
        hasher.update([0x1f]);
        hasher.update(limit.to_le_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{hex}.json"))
    }
}

impl CandidateProvider for CachedProvider {
    fn top_candidates(
        &self,
        text_with_mask: &str,
        original_word: &str,
        limit: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let path = self.key_path(text_with_mask, original_word, limit);
        if let Ok(raw) = std::fs::read_to_string(&path) {
            if let Ok(cached) = serde_json::from_str::<Vec<String>>(&raw) {
                return Ok(cached);
            }
        }
        let fresh = self
            .inner
            .top_candidates(text_with_mask, original_word, limit)?;
        if let Ok(serialized) = serde_json::to_string(&fresh) {
            if let Err(e) = std::fs::write(&path, serialized) {
                eprintln!("warning: failed to write provider cache {}: {e}", path.display());
            }
        }
        Ok(fresh)
    }
}

/// Semantic scorer over HTTP POST `/similarity` (the BLEURT adapter slot).
/// Scores are clamped to [0, 1].
#[derive(Debug)]
pub struct HttpSimilarity {
    client: HttpClient,
}

impl HttpSimilarity {
    pub fn new(url: &str, timeout: Duration) -> Self {
        HttpSimilarity {
            client: HttpClient::new(url, timeout),
        }
    }
}

impl Similarity for HttpSimilarity {
    fn score(&self, original: &str, modified: &str) -> Result<f64, SimilarityError> {
        let request = SimilarityRequest {
            schema: SCHEMA_VERSION.to_string(),
            original: original.to_string(),
            modified: modified.to_string(),
        };
        let response: SimilarityResponse = self
            .client
            .post(SIMILARITY_PATH, &request)
            .map_err(SimilarityError)?;
        check_schema(&response.schema).map_err(SimilarityError)?;
        Ok(response.score.clamp(0.0, 1.0))
    }
}

fn tag_pairs(response: TagResponse) -> Result<Vec<(String, String)>, String> {
    check_schema(&response.schema)?;
    if response.tokens.len() != response.tags.len() {
        return Err(format!(
            "tagger returned {} tokens but {} tags",
            response.tokens.len(),
            response.tags.len()
        ));
    }
    Ok(response.tokens.into_iter().zip(response.tags).collect())
}

/// POS tagger over HTTP POST `/tag`.
#[derive(Debug)]
pub struct HttpTagger {
    client: HttpClient,
}

impl HttpTagger {
    pub fn new(url: &str, timeout: Duration) -> Self {
        HttpTagger {
            client: HttpClient::new(url, timeout),
        }
    }
}

impl Tagger for HttpTagger {
    fn tag(&self, text: &str) -> Result<Vec<(String, String)>, TaggerError> {
        let request = TagRequest {
            schema: SCHEMA_VERSION.to_string(),
            text: text.to_string(),
        };
        let response: TagResponse = self.client.post(TAG_PATH, &request).map_err(TaggerError)?;
        tag_pairs(response).map_err(TaggerError)
    }
}

/// POS tagger over stdio.
pub struct StdioTagger {
    transport: StdioTransport,
}

impl StdioTagger {
    pub fn spawn(command: &[String]) -> Result<StdioTagger, String> {
        Ok(StdioTagger {
            transport: StdioTransport::spawn(command)?,
        })
    }
}

impl Tagger for StdioTagger {
    fn tag(&self, text: &str) -> Result<Vec<(String, String)>, TaggerError> {
        let request = TagRequest {
            schema: SCHEMA_VERSION.to_string(),
            text: text.to_string(),
        };
        let response: TagResponse = self.transport.round_trip(&request).map_err(TaggerError)?;
        tag_pairs(response).map_err(TaggerError)
    }
}
