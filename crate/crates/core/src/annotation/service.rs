//! HTTP client for a sentence annotation service.
//!
//! The service contract is a single POST endpoint taking `{"text": "..."}`
//! and returning annotation JSON (see [`super::parse_annotation_json`]).

use std::time::Duration;

use thiserror::Error;

use super::{AnnotationError, Sentence};

/// Errors from the annotation service, split by failure category so callers
/// can distinguish "service down" from "service returned garbage".
#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("connection to annotation service failed: {0}")]
    Connection(String),
    #[error("annotation service returned HTTP status {0}")]
    Status(u16),
    #[error("annotation service returned an invalid response: {0}")]
    Schema(#[from] AnnotationError),
}

/// Connection settings for [`fetch_annotations`].
#[derive(Debug, Clone)]
pub struct ServiceOptions {
    /// Per-request timeout.
    pub timeout: Duration,
    /// Extra attempts after the first on connection errors and 5xx statuses.
    pub retries: u32,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            timeout: Duration::from_secs(30),
            retries: 0,
        }
    }
}

/// Sends `text` to the annotation service and parses the response.
///
/// Connection failures and server errors (5xx) are retried up to
/// `options.retries` extra times; client errors (4xx) and malformed
/// responses are returned immediately.
pub fn fetch_annotations(
    endpoint: &str,
    text: &str,
    options: &ServiceOptions,
) -> Result<Vec<Sentence>, ServiceError> {
    let agent = ureq::AgentBuilder::new().timeout(options.timeout).build();
    let body = serde_json::json!({ "text": text });
    let mut attempt = 0;
    loop {
        attempt += 1;
        let outcome = agent.post(endpoint).send_json(body.clone());
        let retryable = match &outcome {
            Ok(_) => false,
            Err(ureq::Error::Status(code, _)) => *code >= 500,
            Err(ureq::Error::Transport(_)) => true,
        };
        if retryable && attempt <= options.retries as usize {
            log::warn!("annotation request failed (attempt {attempt}), retrying");
            continue;
        }
        return match outcome {
            Ok(response) => {
                let payload = response
                    .into_string()
                    .map_err(|e| ServiceError::Connection(e.to_string()))?;
                Ok(super::parse_annotation_json(&payload)?)
            }
            Err(ureq::Error::Status(code, _)) => Err(ServiceError::Status(code)),
            Err(ureq::Error::Transport(transport)) => {
                Err(ServiceError::Connection(transport.to_string()))
            }
        };
    }
}
