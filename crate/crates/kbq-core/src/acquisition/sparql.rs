use std::collections::BTreeMap;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::Value;

use crate::rdf::{BlankNode, Iri, Literal, Term};

use super::{queries, AcquisitionError};

/// Retry schedule for 5xx responses and transport timeouts. 4xx responses
/// fail immediately.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        // 3 retries after the initial attempt, sleeping 1 s, 2 s, 4 s
        RetryPolicy { max_retries: 3, base_delay: Duration::from_secs(1) }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt)
    }
}

/// Decoded `application/sparql-results+json` document.
#[derive(Debug, Clone, PartialEq)]
pub struct SparqlResultSet {
    pub variables: Vec<String>,
    pub rows: Vec<BTreeMap<String, Term>>,
}

impl SparqlResultSet {
    pub fn from_json(text: &str) -> Result<Self, AcquisitionError> {
        let malformed = |m: &str| AcquisitionError::MalformedResult(m.to_string());
        let doc: Value =
            serde_json::from_str(text).map_err(|e| malformed(&format!("invalid JSON: {e}")))?;
        let vars = doc
            .pointer("/head/vars")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing head.vars"))?;
        let variables: Vec<String> = vars
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| malformed("head.vars must be strings"))?;
        let bindings = doc
            .pointer("/results/bindings")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing results.bindings"))?;
        let mut rows = Vec::with_capacity(bindings.len());
        for binding in bindings {
            let obj = binding.as_object().ok_or_else(|| malformed("binding is not an object"))?;
            let mut row = BTreeMap::new();
            for (name, term) in obj {
                if !variables.iter().any(|v| v == name) {
                    return Err(malformed(&format!("binding for undeclared variable ?{name}")));
                }
                row.insert(name.clone(), decode_term(term)?);
            }
            rows.push(row);
        }
        Ok(SparqlResultSet { variables, rows })
    }
}

fn decode_term(value: &Value) -> Result<Term, AcquisitionError> {
    let malformed = |m: String| AcquisitionError::MalformedResult(m);
    let obj = value.as_object().ok_or_else(|| malformed("term is not an object".into()))?;
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("term has no type".into()))?;
    let text = obj
        .get("value")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("term has no value".into()))?;
    match kind {
        "uri" => Iri::new(text).map(Term::Iri).map_err(|e| malformed(e.to_string())),
        "bnode" => Ok(Term::BlankNode(sanitize_bnode_label(text))),
        // "typed-literal" is the legacy Virtuoso spelling
        "literal" | "typed-literal" => {
            if let Some(lang) = obj.get("xml:lang").and_then(Value::as_str) {
                Literal::lang_tagged(text, lang)
                    .map(Term::Literal)
                    .map_err(|e| malformed(e.to_string()))
            } else if let Some(dt) = obj.get("datatype").and_then(Value::as_str) {
                let dt = Iri::new(dt).map_err(|e| malformed(e.to_string()))?;
                Ok(Term::Literal(Literal::typed(text, dt)))
            } else {
                Ok(Term::Literal(Literal::string(text)))
            }
        }
        other => Err(malformed(format!("unknown term type {other:?}"))),
    }
}

// Endpoint blank-node labels (e.g. Virtuoso's "nodeID://b123") may use
// characters outside the N-Triples label charset. Identity only matters
// within one result set, so nonconforming characters are mapped to '_'.
fn sanitize_bnode_label(label: &str) -> BlankNode {
    let mut clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    if clean.is_empty() || clean.starts_with('-') {
        clean.insert(0, 'b');
    }
    BlankNode::new(clean).expect("sanitized label is valid")
}

struct Gate {
    limit: usize,
    state: Mutex<usize>,
    cond: Condvar,
}

impl Gate {
    fn new(limit: usize) -> Self {
        Gate { limit: limit.max(1), state: Mutex::new(0), cond: Condvar::new() }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut in_flight = self.state.lock().unwrap();
        while *in_flight >= self.limit {
            in_flight = self.cond.wait(in_flight).unwrap();
        }
        *in_flight += 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut in_flight = self.gate.state.lock().unwrap();
        *in_flight -= 1;
        self.gate.cond.notify_one();
    }
}

/// SPARQL 1.1 protocol client. Queries go out as HTTP GET with a `query`
/// parameter and fall back to form-encoded POST beyond 2 KB; results are
/// requested as SPARQL JSON.
pub struct SparqlClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    token: Option<String>,
    retry: RetryPolicy,
    gate: Gate,
}

const POST_THRESHOLD: usize = 2048;
const ACCEPT_SPARQL_JSON: &str = "application/sparql-results+json";

impl SparqlClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .expect("client construction");
        SparqlClient {
            http,
            endpoint: endpoint.into(),
            token: None,
            retry: RetryPolicy::default(),
            gate: Gate::new(4),
        }
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token;
        self
    }

    /// Pick up a bearer token from `KBQ_SPARQL_TOKEN` when set.
    pub fn with_env_token(self) -> Self {
        let token = std::env::var(super::SPARQL_TOKEN_ENV).ok().filter(|t| !t.is_empty());
        self.with_token(token)
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_in_flight(mut self, limit: usize) -> Self {
        self.gate = Gate::new(limit);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("client construction");
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Run a query and decode the JSON result set, retrying per policy.
    pub fn query(&self, sparql: &str) -> Result<SparqlResultSet, AcquisitionError> {
        let _slot = self.gate.acquire();
        let mut attempt = 0u32;
        loop {
            match self.send_once(sparql) {
                Ok(body) => return SparqlResultSet::from_json(&body),
                Err(e) if e.retriable() && attempt < self.retry.max_retries => {
                    std::thread::sleep(self.retry.delay(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e.into_error()),
            }
        }
    }

    fn send_once(&self, sparql: &str) -> Result<String, SendFailure> {
        let request = if sparql.len() > POST_THRESHOLD {
            self.http.post(&self.endpoint).form(&[("query", sparql)])
        } else {
            self.http.get(&self.endpoint).query(&[("query", sparql)])
        };
        let request = request.header(reqwest::header::ACCEPT, ACCEPT_SPARQL_JSON);
        let request = match &self.token {
            Some(token) => {
                request.header(reqwest::header::AUTHORIZATION, format!("Bearer {token}"))
            }
            None => request,
        };
        let response = request.send().map_err(|e| SendFailure::Transport {
            message: e.to_string(),
            retriable: e.is_timeout() || e.is_connect(),
        })?;
        let status = response.status();
        let body = response.text().map_err(|e| SendFailure::Transport {
            message: format!("reading response body: {e}"),
            retriable: true,
        })?;
        if status.is_success() {
            Ok(body)
        } else {
            let mut excerpt: String = body.chars().take(200).collect();
            if excerpt.len() < body.len() {
                excerpt.push('…');
            }
            SendFailure::status(status.as_u16(), excerpt)
        }
    }

    /// count(C): `SELECT COUNT(DISTINCT ?s)` over the class.
    pub fn fetch_count(&self, class: &Iri) -> Result<u64, AcquisitionError> {
        self.single_u64(&queries::count_query(class), "COUNT")
    }

    /// freq(p, C): triple count of one property over the class instances.
    pub fn fetch_freq(&self, class: &Iri, property: &Iri) -> Result<u64, AcquisitionError> {
        self.single_u64(&queries::freq_query(class, property), "FREQ")
    }

    /// NP(C): distinct predicate count over the class instances.
    pub fn fetch_np(&self, class: &Iri) -> Result<u64, AcquisitionError> {
        self.single_u64(&queries::np_query(class), "NP")
    }

    /// Per-subject cardinality histogram of one property, with the 0 bucket
    /// derived as count(C) minus the number of subjects holding a value.
    pub fn fetch_cardinality_histogram(
        &self,
        class: &Iri,
        property: &Iri,
    ) -> Result<BTreeMap<u64, u64>, AcquisitionError> {
        let rs = self.query(&queries::cardinality_query(class, property))?;
        let mut hist = BTreeMap::new();
        for row in &rs.rows {
            let card = binding_u64(row, "card")?;
            let count = binding_u64(row, "count")?;
            if hist.insert(card, count).is_some() {
                return Err(AcquisitionError::MalformedResult(format!(
                    "duplicate cardinality bucket {card}"
                )));
            }
        }
        let with_values: u64 = hist.values().sum();
        let count = self.fetch_count(class)?;
        if count < with_values {
            return Err(AcquisitionError::NegativeZeroBucket { count, with_values });
        }
        if count > with_values {
            hist.insert(0, count - with_values);
        }
        Ok(hist)
    }

    /// Distinct predicates of the class, sorted; used for endpoint profiling.
    pub fn fetch_distinct_properties(&self, class: &Iri) -> Result<Vec<Iri>, AcquisitionError> {
        let rs = self.query(&queries::properties_query(class))?;
        let mut out = Vec::with_capacity(rs.rows.len());
        for row in &rs.rows {
            let term = row
                .get("p")
                .ok_or_else(|| AcquisitionError::MissingBinding("p".to_string()))?;
            match term {
                Term::Iri(iri) => out.push(iri.clone()),
                other => {
                    return Err(AcquisitionError::MalformedResult(format!(
                        "predicate binding is a {}",
                        other.kind()
                    )))
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn single_u64(&self, sparql: &str, var: &str) -> Result<u64, AcquisitionError> {
        let rs = self.query(sparql)?;
        if rs.rows.len() != 1 {
            return Err(AcquisitionError::MalformedResult(format!(
                "expected exactly one row, got {}",
                rs.rows.len()
            )));
        }
        binding_u64(&rs.rows[0], var)
    }
}

fn binding_u64(row: &BTreeMap<String, Term>, var: &str) -> Result<u64, AcquisitionError> {
    let term = row.get(var).ok_or_else(|| AcquisitionError::MissingBinding(var.to_string()))?;
    let lexical = match term {
        Term::Literal(lit) => lit.lexical(),
        other => {
            return Err(AcquisitionError::MalformedResult(format!(
                "?{var} is a {}, expected an integer literal",
                other.kind()
            )))
        }
    };
    lexical.parse::<u64>().map_err(|_| {
        AcquisitionError::MalformedResult(format!("?{var} is not a non-negative integer: {lexical:?}"))
    })
}

enum SendFailure {
    Status { status: u16, body: String },
    Transport { message: String, retriable: bool },
}

impl SendFailure {
    fn status(status: u16, body: String) -> Result<String, Self> {
        Err(SendFailure::Status { status, body })
    }

    fn retriable(&self) -> bool {
        match self {
            SendFailure::Status { status, .. } => *status >= 500,
            SendFailure::Transport { retriable, .. } => *retriable,
        }
    }

    fn into_error(self) -> AcquisitionError {
        match self {
            SendFailure::Status { status, body } => {
                AcquisitionError::EndpointStatus { status, body }
            }
            SendFailure::Transport { message, .. } => AcquisitionError::EndpointTransport(message),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_count_binding() {
        let body = r#"{"head":{"vars":["COUNT"]},
            "results":{"bindings":[{"COUNT":{"type":"literal",
            "datatype":"http://www.w3.org/2001/XMLSchema#integer","value":"689"}}]}}"#;
        let rs = SparqlResultSet::from_json(body).unwrap();
        assert_eq!(rs.variables, ["COUNT"]);
        assert_eq!(binding_u64(&rs.rows[0], "COUNT").unwrap(), 689);
    }

    #[test]
    fn non_integer_count_is_malformed() {
        let rs = SparqlResultSet::from_json(
            r#"{"head":{"vars":["COUNT"]},
            "results":{"bindings":[{"COUNT":{"type":"literal","value":"lots"}}]}}"#,
        )
        .unwrap();
        assert!(matches!(
            binding_u64(&rs.rows[0], "COUNT").unwrap_err(),
            AcquisitionError::MalformedResult(_)
        ));
    }

    #[test]
    fn undeclared_variable_is_rejected() {
        let err = SparqlResultSet::from_json(
            r#"{"head":{"vars":["a"]},
            "results":{"bindings":[{"b":{"type":"literal","value":"1"}}]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, AcquisitionError::MalformedResult(_)));
    }

    #[test]
    fn term_types_decode() {
        let rs = SparqlResultSet::from_json(
            r#"{"head":{"vars":["x","y","z","w"]},
            "results":{"bindings":[{
              "x":{"type":"uri","value":"http://e/a"},
              "y":{"type":"bnode","value":"nodeID://b42"},
              "z":{"type":"literal","value":"hi","xml:lang":"en"},
              "w":{"type":"typed-literal","value":"2","datatype":"http://www.w3.org/2001/XMLSchema#integer"}
            }]}}"#,
        )
        .unwrap();
        let row = &rs.rows[0];
        assert_eq!(row["x"], Term::iri("http://e/a").unwrap());
        assert!(matches!(row["y"], Term::BlankNode(_)));
        assert_eq!(row["z"].as_literal().unwrap().language(), Some("en"));
        assert_eq!(row["w"].as_literal().unwrap().lexical(), "2");
    }

    #[test]
    fn missing_binding_is_reported_by_name() {
        let rs = SparqlResultSet::from_json(
            r#"{"head":{"vars":["COUNT"]},"results":{"bindings":[{}]}}"#,
        )
        .unwrap();
        let err = binding_u64(&rs.rows[0], "COUNT").unwrap_err();
        assert!(matches!(err, AcquisitionError::MissingBinding(v) if v == "COUNT"));
    }
}
