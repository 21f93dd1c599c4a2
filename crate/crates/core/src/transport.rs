//! Blocking HTTP plumbing shared by the remote world-model and chat clients.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::Value;

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
pub struct ConcurrencyLimit {
    available: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a> {
    limit: &'a ConcurrencyLimit,
}

impl ConcurrencyLimit {
    pub fn new(max: usize) -> Self {
        ConcurrencyLimit {
            available: Mutex::new(max.max(1)),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap();
        while *n == 0 {
            n = self.freed.wait(n).unwrap();
        }
        *n -= 1;
        Permit { limit: self }
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.limit.available.lock().unwrap() += 1;
        self.limit.freed.notify_one();
    }
}

#[derive(Debug)]
pub enum HttpFault {
    /// Connection, timeout or body-read failure.
    Transport(String),
    /// Non-success status; body kept for error decoding.
    Status(u16, Vec<u8>),
}

pub struct HttpSettings {
    pub timeout: Duration,
    pub max_in_flight: usize,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            timeout: Duration::from_secs(60),
            max_in_flight: 4,
        }
    }
}

pub fn build_client(settings: &HttpSettings) -> Client {
    Client::builder()
        .timeout(settings.timeout)
        .build()
        .expect("http client configuration is static")
}

/// POST a JSON body, retrying once on transport faults.
pub fn post_json(
    client: &Client,
    url: &str,
    body: Vec<u8>,
    bearer: Option<&str>,
    request_id: Option<&str>,
) -> Result<Vec<u8>, HttpFault> {
    let attempt = || {
        let mut req = client
            .post(url)
            .header("content-type", "application/json")
            .body(body.clone());
        if let Some(token) = bearer {
            req = req.bearer_auth(token);
        }
        if let Some(id) = request_id {
            req = req.header("x-request-id", id);
        }
        send(req)
    };
    match attempt() {
        Err(HttpFault::Transport(_)) => attempt(),
        other => other,
    }
}

pub fn get(client: &Client, url: &str) -> Result<Vec<u8>, HttpFault> {
    send(client.get(url))
}

fn send(req: reqwest::blocking::RequestBuilder) -> Result<Vec<u8>, HttpFault> {
    let resp = req.send().map_err(|e| HttpFault::Transport(e.to_string()))?;
    let status = resp.status();
    let bytes = resp
        .bytes()
        .map_err(|e| HttpFault::Transport(e.to_string()))?
        .to_vec();
    if status.is_success() {
        Ok(bytes)
    } else {
        Err(HttpFault::Status(status.as_u16(), bytes))
    }
}

/// `{error: {code, message}}` if the body carries one.
pub fn error_body(bytes: &[u8]) -> Option<(String, String)> {
    let v: Value = serde_json::from_slice(bytes).ok()?;
    let err = v.get("error")?;
    let code = err.get("code").map(value_text).unwrap_or_default();
    let message = err.get("message").map(value_text).unwrap_or_default();
    Some((code, message))
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}
