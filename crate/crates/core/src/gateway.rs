//! Boundary to external language services: paraphrase generation and
//! span/formula alignment checking.
//!
//! Two backends implement the same surface. [`MockBackend`] is fully offline
//! and deterministic: paraphrases come from a fixed synonym table keyed by a
//! stable hash of the request, and the alignment check compares normalized
//! text against the formula's canonical rendering. [`RemoteBackend`] forwards
//! both capabilities over a single-endpoint JSON protocol (see
//! `docs/file-formats.md`), configured through `NL2SPATIAL_LLM_URL` and
//! `NL2SPATIAL_LLM_TOKEN`.
//!
//! Paraphrases are narrative texture for datasets; they are never used as
//! ground truth anywhere in this crate.

use std::time::Duration;

use crate::formula::{parse_formula, serialize_formula, Formula, ParseError};
use crate::hlt::CheckVerdict;
use crate::render::render_canonical;

/// Request for `k` reworded variants of a canonical description. The formula
/// rides along as a conditioning signal for remote backends.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaphraseRequest {
    pub canonical: String,
    pub formula: String,
    pub k: usize,
}

/// Request to judge whether `formula` captures the meaning of `span_text`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentRequest {
    pub span_text: String,
    pub formula: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("formula in request does not parse: {0}")]
    FormulaParse(#[from] ParseError),
}

/// A paraphrase/alignment service. Implementations must be safe to call from
/// multiple threads; the mock is stateless.
pub trait LanguageBackend: Send + Sync {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, GatewayError>;
    fn check(&self, req: &AlignmentRequest) -> Result<CheckVerdict, GatewayError>;
}

/// Produces exactly `req.k` paraphrases of the canonical text.
pub fn paraphrase_node(
    req: &ParaphraseRequest,
    backend: &dyn LanguageBackend,
) -> Result<Vec<String>, GatewayError> {
    backend.paraphrase(req)
}

/// Judges span/formula alignment through the configured backend.
pub fn check_alignment(
    req: &AlignmentRequest,
    backend: &dyn LanguageBackend,
) -> Result<CheckVerdict, GatewayError> {
    backend.check(req)
}

/// Phrase alternatives applied by the mock paraphraser. Every canonical
/// template surfaces at least one of these phrases, so each variant differs
/// from its source text.
pub const SYNONYM_TABLE: &[(&str, &[&str; 2])] = &[
    ("is in contact with", &["touches", "is touching"]),
    ("lies strictly inside", &["is fully contained in", "sits entirely within"]),
    ("lies strictly between", &["sits squarely between", "is positioned between"]),
    ("the distance between", &["the separation between", "the gap between"]),
    ("is at most", &["does not exceed", "stays under"]),
    ("is at least", &["is no less than", "never drops below"]),
    ("partially overlaps", &["partly covers", "partially intersects"]),
    ("without containment", &["while neither contains the other", "with neither one inside the other"]),
    ("is strictly to the left of", &["sits left of", "stays on the left side of"]),
    ("is strictly to the right of", &["sits right of", "stays on the right side of"]),
    ("is strictly above", &["sits higher than", "stays up over"]),
    ("is strictly below", &["sits lower than", "stays down under"]),
    ("is aligned with that of", &["points the same way as that of", "matches the direction of that of"]),
    ("it is not the case that", &["it never happens that", "it is false that"]),
    ("throughout", &["at every moment during", "for the whole of"]),
    ("sometime within", &["at some point during", "eventually within"]),
    ("until then", &["before that moment", "in the meantime"]),
];

/// FNV-1a; stable across runs, platforms, and toolchain versions.
fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Deterministic offline backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

/// How many mock paraphrase variants the alignment check probes before
/// rejecting a span.
const ALIGNMENT_PROBE_VARIANTS: usize = 4;

impl MockBackend {
    fn variant(&self, canonical: &str, formula: &str, index: usize) -> String {
        let seed = stable_hash(canonical.as_bytes()) ^ stable_hash(formula.as_bytes());
        let mut text = canonical.to_string();
        for (entry, (phrase, alts)) in SYNONYM_TABLE.iter().enumerate() {
            let pick = (seed
                .wrapping_add((entry as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
                .wrapping_add(index as u64)) as usize
                % alts.len();
            text = replace_phrase(&text, phrase, alts[pick]);
        }
        text
    }
}

/// Replaces every occurrence of `phrase`, matching a sentence-initial capital
/// as well and preserving it on the replacement.
fn replace_phrase(text: &str, phrase: &str, replacement: &str) -> String {
    let mut out = text.replace(phrase, replacement);
    let capitalized = capitalize(phrase);
    if out.contains(&capitalized) {
        out = out.replace(&capitalized, &capitalize(replacement));
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut out = s.to_string();
    if let Some(first) = out.get(..1) {
        let upper = first.to_ascii_uppercase();
        out.replace_range(..1, &upper);
    }
    out
}

/// Lowercases, strips punctuation, and collapses whitespace.
pub fn normalize_for_alignment(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_space = true;
    for c in text.chars() {
        let c = if c.is_ascii_uppercase() { c.to_ascii_lowercase() } else { c };
        if c.is_whitespace() || matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '(' | ')' | '"' | '\'') {
            if !in_space {
                out.push(' ');
                in_space = true;
            }
        } else {
            out.push(c);
            in_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

impl LanguageBackend for MockBackend {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, GatewayError> {
        Ok((0..req.k)
            .map(|index| self.variant(&req.canonical, &req.formula, index))
            .collect())
    }

    fn check(&self, req: &AlignmentRequest) -> Result<CheckVerdict, GatewayError> {
        let formula: Formula = parse_formula(&req.formula)?;
        let canonical = render_canonical(&formula).text;
        let span_norm = normalize_for_alignment(&req.span_text);
        if span_norm == normalize_for_alignment(&canonical) {
            return Ok(CheckVerdict::accepted("span equals the canonical rendering"));
        }
        let machine = serialize_formula(&formula);
        for index in 0..ALIGNMENT_PROBE_VARIANTS {
            let variant = self.variant(&canonical, &machine, index);
            if span_norm == normalize_for_alignment(&variant) {
                return Ok(CheckVerdict::accepted(
                    "span equals a known paraphrase of the canonical rendering",
                ));
            }
        }
        Ok(CheckVerdict::rejected(format!(
            "span text does not normalize to the canonical rendering `{canonical}`"
        )))
    }
}

/// Environment variable naming the remote endpoint URL.
pub const ENV_URL: &str = "NL2SPATIAL_LLM_URL";
/// Environment variable holding the bearer token, if any.
pub const ENV_TOKEN: &str = "NL2SPATIAL_LLM_TOKEN";

/// Forwards requests to a single JSON endpoint with bounded retries.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    url: String,
    token: Option<String>,
    /// Transport retries after the first attempt (exponential backoff).
    pub retries: u32,
    /// Backoff base; attempt `n` sleeps `base * 2^n`.
    pub retry_base: Duration,
}

impl RemoteBackend {
    pub fn new(url: impl Into<String>, token: Option<String>) -> Self {
        RemoteBackend {
            url: url.into(),
            token,
            retries: 2,
            retry_base: Duration::from_millis(100),
        }
    }

    /// Reads the endpoint configuration from the environment.
    pub fn from_env() -> Result<Self, GatewayError> {
        let url = std::env::var(ENV_URL).map_err(|_| {
            GatewayError::BackendUnavailable(format!("{ENV_URL} is not set"))
        })?;
        Ok(RemoteBackend::new(url, std::env::var(ENV_TOKEN).ok()))
    }

    fn post(&self, payload: &serde_json::Value) -> Result<serde_json::Value, GatewayError> {
        let mut last_err = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(self.retry_base * 2u32.pow(attempt - 1));
            }
            let mut request = ureq::post(&self.url);
            if let Some(token) = &self.token {
                request = request.header("authorization", &format!("Bearer {token}"));
            }
            match request.send_json(payload) {
                Ok(mut response) => {
                    return response
                        .body_mut()
                        .read_json::<serde_json::Value>()
                        .map_err(|e| GatewayError::MalformedResponse(e.to_string()));
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(GatewayError::BackendUnavailable(last_err))
    }
}

impl LanguageBackend for RemoteBackend {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, GatewayError> {
        let payload = serde_json::json!({
            "task": "paraphrase",
            "canonical": req.canonical,
            "formula": req.formula,
            "k": req.k,
        });
        let body = self.post(&payload)?;
        let texts = body
            .get("texts")
            .and_then(|v| v.as_array())
            .ok_or_else(|| GatewayError::MalformedResponse("missing `texts` array".into()))?;
        texts
            .iter()
            .map(|t| {
                t.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| GatewayError::MalformedResponse("non-string paraphrase".into()))
            })
            .collect()
    }

    fn check(&self, req: &AlignmentRequest) -> Result<CheckVerdict, GatewayError> {
        let payload = serde_json::json!({
            "task": "check",
            "canonical": req.span_text,
            "formula": req.formula,
        });
        let body = self.post(&payload)?;
        let accept = body
            .get("accept")
            .and_then(|v| v.as_bool())
            .ok_or_else(|| GatewayError::MalformedResponse("missing `accept` bool".into()))?;
        let reason = body
            .get("reason")
            .and_then(|v| v.as_str())
            .unwrap_or("")
            .to_string();
        if accept {
            Ok(CheckVerdict::accepted(reason))
        } else if reason.is_empty() {
            Err(GatewayError::MalformedResponse(
                "rejection without a reason".into(),
            ))
        } else {
            Ok(CheckVerdict::rejected(reason))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variants_is_empty() {
        let req = ParaphraseRequest {
            canonical: "obj_1 is in contact with obj_2 (tolerance 0.1).".into(),
            formula: "touch(obj_1,obj_2;0.1)".into(),
            k: 0,
        };
        assert!(paraphrase_node(&req, &MockBackend).unwrap().is_empty());
    }

    #[test]
    fn mock_is_deterministic() {
        let req = ParaphraseRequest {
            canonical: "The distance between obj_1 and obj_2 is at most 2.".into(),
            formula: "closeTo(obj_1,obj_2;2)".into(),
            k: 3,
        };
        let a = paraphrase_node(&req, &MockBackend).unwrap();
        let b = paraphrase_node(&req, &MockBackend).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn variants_substitute_table_phrases() {
        let req = ParaphraseRequest {
            canonical: "obj_r is in contact with obj_g.".into(),
            formula: "touch(obj_r,obj_g;0.05)".into(),
            k: 1,
        };
        let out = paraphrase_node(&req, &MockBackend).unwrap();
        let expected: Vec<String> = ["touches", "is touching"]
            .iter()
            .map(|alt| format!("obj_r {alt} obj_g."))
            .collect();
        assert!(expected.contains(&out[0]), "got {:?}", out[0]);
        // consecutive variants pick different alternatives of a matched entry
        let req2 = ParaphraseRequest { k: 2, ..req };
        let two = paraphrase_node(&req2, &MockBackend).unwrap();
        assert_ne!(two[0], two[1]);
    }

    #[test]
    fn alignment_accepts_the_canonical_text() {
        let req = AlignmentRequest {
            span_text: "The distance between obj_1 and obj_2 is at most 2.".into(),
            formula: "closeTo(obj_1,obj_2;2)".into(),
        };
        let verdict = check_alignment(&req, &MockBackend).unwrap();
        assert!(verdict.accept);
    }

    #[test]
    fn alignment_accepts_shipped_paraphrases() {
        let formula = "touch(obj_r,obj_g;0.05)";
        let canonical = render_canonical(&parse_formula(formula).unwrap()).text;
        let variant = MockBackend.variant(&canonical, formula, 0);
        let verdict = check_alignment(
            &AlignmentRequest {
                span_text: variant,
                formula: formula.into(),
            },
            &MockBackend,
        )
        .unwrap();
        assert!(verdict.accept);
    }

    #[test]
    fn alignment_rejects_swapped_arguments() {
        let req = AlignmentRequest {
            span_text: "The distance between obj_b and obj_r is at most 0.3.".into(),
            formula: "closeTo(obj_r,obj_b;0.3)".into(),
        };
        let verdict = check_alignment(&req, &MockBackend).unwrap();
        assert!(!verdict.accept);
        assert!(!verdict.reason.is_empty());
    }

    #[test]
    fn alignment_normalization_ignores_case_and_punctuation() {
        let req = AlignmentRequest {
            span_text: "the distance between obj_1 and obj_2 is at most 2".into(),
            formula: "closeTo(obj_1,obj_2;2)".into(),
        };
        assert!(check_alignment(&req, &MockBackend).unwrap().accept);
    }

    #[test]
    fn alignment_propagates_formula_errors() {
        let req = AlignmentRequest {
            span_text: "anything".into(),
            formula: "nonsense(obj_1;1)".into(),
        };
        assert!(matches!(
            check_alignment(&req, &MockBackend),
            Err(GatewayError::FormulaParse(_))
        ));
    }

    #[test]
    fn unreachable_remote_is_reported_unavailable() {
        let mut backend = RemoteBackend::new("http://127.0.0.1:9", None);
        backend.retries = 1;
        backend.retry_base = Duration::from_millis(1);
        let err = backend
            .paraphrase(&ParaphraseRequest {
                canonical: "x".into(),
                formula: "touch(obj_1,obj_2;0.1)".into(),
                k: 1,
            })
            .unwrap_err();
        assert!(matches!(err, GatewayError::BackendUnavailable(_)));
    }
}
