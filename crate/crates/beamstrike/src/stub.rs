//! Bundled stub servers speaking the v1 RPC schema, for desk-scale testing
//! of the external-adapter paths. Each stub wraps one of the deterministic
//! built-in components.

use std::sync::Arc;

use beamstrike_core::analysis::Tagger;
use beamstrike_core::bodega::Similarity;
use beamstrike_core::candidates::CandidateProvider;
use beamstrike_core::victim::Victim;

use crate::rpc::{
    check_schema, FillMaskRequest, FillMaskResponse, Handler, PredictRequest, PredictResponse,
    SimilarityRequest, SimilarityResponse, TagRequest, TagResponse, FILL_MASK_PATH,
    PREDICT_PROBA_PATH, SCHEMA_VERSION, SIMILARITY_PATH, TAG_PATH,
};

fn bad_request(message: String) -> (u16, String) {
    (400, message)
}

/// Handler serving a victim on `/predict_proba`.
pub fn victim_handler(victim: Arc<dyn Victim + Send + Sync>) -> Handler {
    Arc::new(move |path, body| {
        if !path.is_empty() && path != PREDICT_PROBA_PATH {
            return Err((404, format!("unknown path {path}")));
        }
        let request: PredictRequest =
            serde_json::from_str(body).map_err(|e| bad_request(format!("bad request: {e}")))?;
        check_schema(&request.schema).map_err(bad_request)?;
        let texts: Vec<&str> = request.texts.iter().map(String::as_str).collect();
        let probabilities = victim
            .predict_proba(&texts)
            .map_err(|e| (500, e.to_string()))?;
        let response = PredictResponse {
            schema: SCHEMA_VERSION.to_string(),
            probabilities,
        };
        Ok(serde_json::to_string(&response).expect("serializable response"))
    })
}

/// Handler serving a candidate provider on `/fill_mask`.
///
/// The wire request carries no original word, so self-filtering stays the
/// client's job — stub responses may echo the masked word.
pub fn provider_handler(provider: Arc<dyn CandidateProvider + Send + Sync>) -> Handler {
    Arc::new(move |path, body| {
        if !path.is_empty() && path != FILL_MASK_PATH {
            return Err((404, format!("unknown path {path}")));
        }
        let request: FillMaskRequest =
            serde_json::from_str(body).map_err(|e| bad_request(format!("bad request: {e}")))?;
        check_schema(&request.schema).map_err(bad_request)?;
        let candidates = provider
            .top_candidates(&request.text, "", request.top_k)
            .map_err(|e| (500, e.to_string()))?;
        let response = FillMaskResponse {
            schema: SCHEMA_VERSION.to_string(),
            candidates,
        };
        Ok(serde_json::to_string(&response).expect("serializable response"))
    })
}

/// Handler serving a similarity scorer on `/similarity`.
pub fn similarity_handler(similarity: Arc<dyn Similarity + Send + Sync>) -> Handler {
    Arc::new(move |path, body| {
        if !path.is_empty() && path != SIMILARITY_PATH {
            return Err((404, format!("unknown path {path}")));
        }
        let request: SimilarityRequest =
            serde_json::from_str(body).map_err(|e| bad_request(format!("bad request: {e}")))?;
        check_schema(&request.schema).map_err(bad_request)?;
        let score = similarity
            .score(&request.original, &request.modified)
            .map_err(|e| (500, e.to_string()))?;
        let response = SimilarityResponse {
            schema: SCHEMA_VERSION.to_string(),
            score,
        };
        Ok(serde_json::to_string(&response).expect("serializable response"))
    })
}

/// Handler serving a POS tagger on `/tag`.
pub fn tagger_handler(tagger: Arc<dyn Tagger + Send + Sync>) -> Handler {
    Arc::new(move |path, body| {
        if !path.is_empty() && path != TAG_PATH {
            return Err((404, format!("unknown path {path}")));
        }
        let request: TagRequest =
            serde_json::from_str(body).map_err(|e| bad_request(format!("bad request: {e}")))?;
        check_schema(&request.schema).map_err(bad_request)?;
        let pairs = tagger.tag(&request.text).map_err(|e| (500, e.to_string()))?;
        let (tokens, tags) = pairs.into_iter().unzip();
        let response = TagResponse {
            schema: SCHEMA_VERSION.to_string(),
            tokens,
            tags,
        };
        Ok(serde_json::to_string(&response).expect("serializable response"))
    })
}

/// The demo vocabulary served by `beamstrike stub victim` when no config is
/// given: a linear bag-of-words leaning on misinformation trigger words.
pub fn demo_victim() -> beamstrike_core::LinearBagVictim {
    let vocab: std::collections::BTreeMap<String, f64> = [
        ("fake", 2.0),
        ("hoax", 1.6),
        ("fraud", 1.2),
        ("shocking", 0.8),
        ("truth", -0.7),
        ("verified", -1.1),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    beamstrike_core::LinearBagVictim::new(vocab, 0.0)
}

/// The demo replacement table served by `beamstrike stub mlm`.
pub fn demo_provider() -> beamstrike_core::TableProvider {
    let table: std::collections::BTreeMap<String, Vec<String>> = [
        ("fake", vec!["true", "real", "plain"]),
        ("hoax", vec!["story", "report"]),
        ("fraud", vec!["filing", "case"]),
        ("together.", vec!["apart.", "pants.", "over."]),
    ]
    .into_iter()
    .map(|(k, vs)| (k.to_string(), vs.into_iter().map(String::from).collect()))
    .collect();
    beamstrike_core::TableProvider::new(table, vec!["the".to_string(), "a".to_string()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rpc::StubServer;

    #[test]
    fn victim_stub_round_trips() {
        let server = StubServer::spawn(
            "127.0.0.1:0",
            victim_handler(Arc::new(demo_victim())),
        )
        .unwrap();
        let victim =
            crate::adapters::load_http_victim(&server.base_url(), std::time::Duration::from_secs(2))
                .unwrap();
        let probs = victim.predict_proba(&["fake news"]).unwrap();
        assert_eq!(probs.len(), 1);
        assert!((probs[0][1] - 0.8807970779778823).abs() < 1e-9);
    }

    #[test]
    fn stub_rejects_wrong_schema() {
        let server = StubServer::spawn(
            "127.0.0.1:0",
            victim_handler(Arc::new(demo_victim())),
        )
        .unwrap();
        let client = crate::rpc::HttpClient::new(&server.base_url(), std::time::Duration::from_secs(2));
        let err = client
            .post::<_, PredictResponse>(
                PREDICT_PROBA_PATH,
                &serde_json::json!({"schema": "v0", "texts": ["x"]}),
            )
            .unwrap_err();
        assert!(err.contains("400"), "expected 400 in {err}");
    }
}
