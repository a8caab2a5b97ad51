use std::collections::HashMap;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("translation timed out")]
    Timeout,
    #[error("transport: {0}")]
    Transport(String),
    #[error("backend returned non-UTF-8 output")]
    NonUtf8,
}

/// A machine translation system that carries `<E>…</E>` markup through.
///
/// Implementations receive tagged text only and return tagged text, or an
/// empty string when they produce nothing.
pub trait MtBackend: Send + Sync {
    fn translate(&self, tagged: &str, src: &str, tgt: &str) -> Result<String, BackendError>;
}

/// What the stub returns for inputs missing from its lexicon.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Unmapped {
    #[default]
    Echo,
    Empty,
    Error,
}

impl FromStr for Unmapped {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "echo" => Ok(Unmapped::Echo),
            "empty" => Ok(Unmapped::Empty),
            "error" => Ok(Unmapped::Error),
            other => Err(format!(
                "unknown fallback {other:?} (expected echo, empty or error)"
            )),
        }
    }
}

/// Deterministic lexicon lookup standing in for a real MT system.
#[derive(Debug, Clone, Default)]
pub struct StubBackend {
    lexicon: HashMap<String, String>,
    unmapped: Unmapped,
}

/// One lexicon entry as stored in stub lexicon JSONL files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub source: String,
    pub target: String,
}

impl StubBackend {
    pub fn new(lexicon: impl IntoIterator<Item = (String, String)>, unmapped: Unmapped) -> Self {
        StubBackend {
            lexicon: lexicon.into_iter().collect(),
            unmapped,
        }
    }

    /// Reads a lexicon of `{"source": …, "target": …}` lines. Blank lines
    /// are skipped; errors carry the 1-based line number.
    pub fn read_lexicon(reader: impl std::io::BufRead) -> Result<Vec<(String, String)>, String> {
        let mut out = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
            if line.trim().is_empty() {
                continue;
            }
            let e: LexiconEntry =
                serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
            out.push((e.source, e.target));
        }
        Ok(out)
    }

    /// The three example rows English → German.
    pub fn example_lexicon() -> Vec<(String, String)> {
        [
            (
                "Clinically, a <E>severe neuropsychological syndrome</E> was found when the patient was taken over.",
                "Klinisch fand sich bei Übernahme des Patienten in <E>schweres neuropsychologisches Syndrom</E>.",
            ),
            ("Patient denies <E>headache</E>.", "Patient verneint <E>Kopfschmerzen</E>."),
            ("Thus, a <E>tumour</E> cannot be ruled out.", "Ein <E>Tumor</E> kann daher nicht ausgeschlossen werden."),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
    }
}

impl MtBackend for StubBackend {
    fn translate(&self, tagged: &str, _src: &str, _tgt: &str) -> Result<String, BackendError> {
        if let Some(t) = self.lexicon.get(tagged) {
            return Ok(t.clone());
        }
        match self.unmapped {
            Unmapped::Echo => Ok(tagged.to_string()),
            Unmapped::Empty => Ok(String::new()),
            Unmapped::Error => Err(BackendError::Transport(format!(
                "no stub translation for {tagged:?}"
            ))),
        }
    }
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    text: &'a str,
    src: &'a str,
    tgt: &'a str,
}

#[derive(Deserialize)]
struct HttpResponse {
    text: String,
}

/// Local MT server speaking `POST {"text","src","tgt"}` → `{"text"}`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    endpoint: url::Url,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpBackend {
    /// Only plain `http://` endpoints are supported; the MT server is
    /// expected to run on the local network.
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self, String> {
        let endpoint =
            url::Url::parse(endpoint).map_err(|e| format!("bad endpoint {endpoint:?}: {e}"))?;
        if endpoint.scheme() != "http" {
            return Err(format!(
                "unsupported endpoint scheme {:?}",
                endpoint.scheme()
            ));
        }
        if endpoint.host_str().is_none() {
            return Err(format!("endpoint {endpoint} has no host"));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(HttpBackend {
            endpoint,
            timeout,
            agent,
        })
    }

    pub fn endpoint(&self) -> &url::Url {
        &self.endpoint
    }
}

impl MtBackend for HttpBackend {
    fn translate(&self, tagged: &str, src: &str, tgt: &str) -> Result<String, BackendError> {
        if self.timeout.is_zero() {
            return Err(BackendError::Timeout);
        }
        let body = serde_json::to_string(&HttpRequest {
            text: tagged,
            src,
            tgt,
        })
        .map_err(|e| BackendError::Transport(e.to_string()))?;
        let mut resp = self
            .agent
            .post(self.endpoint.as_str())
            .header("content-type", "application/json")
            .send(body)
            .map_err(map_ureq_error)?;
        if !resp.status().is_success() {
            return Err(BackendError::Transport(format!(
                "server answered {}",
                resp.status()
            )));
        }
        let bytes = resp.body_mut().read_to_vec().map_err(map_ureq_error)?;
        let text = String::from_utf8(bytes).map_err(|_| BackendError::NonUtf8)?;
        let parsed: HttpResponse = serde_json::from_str(&text)
            .map_err(|e| BackendError::Transport(format!("bad response body: {e}")))?;
        Ok(parsed.text)
    }
}

fn map_ureq_error(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::Io(io)
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) =>
        {
            BackendError::Timeout
        }
        other => BackendError::Transport(other.to_string()),
    }
}
