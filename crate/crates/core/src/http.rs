//! Small blocking JSON-over-HTTP client shared by the remote backends.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Counting semaphore bounding in-flight requests.
pub(crate) struct Semaphore {
    available: Mutex<usize>,
    cond: Condvar,
}

pub(crate) struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    pub(crate) fn new(permits: usize) -> Self {
        Self {
            available: Mutex::new(permits.max(1)),
            cond: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap_or_else(|p| p.into_inner());
        while *n == 0 {
            n = self.cond.wait(n).unwrap_or_else(|p| p.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.available.lock().unwrap_or_else(|p| p.into_inner());
        *n += 1;
        self.0.cond.notify_one();
    }
}

pub(crate) struct JsonClient {
    agent: ureq::Agent,
    base_url: String,
    max_retries: usize,
    permits: Semaphore,
}

impl JsonClient {
    pub(crate) fn new(
        base_url: &str,
        timeout: Duration,
        max_retries: usize,
        concurrency: usize,
    ) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
            max_retries,
            permits: Semaphore::new(concurrency),
        }
    }

    /// POSTs `body` to `path`. Transport errors and 5xx responses are retried;
    /// 4xx responses fail immediately.
    pub(crate) fn post<B: Serialize, R: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<R, String> {
        let url = format!("{}{}", self.base_url, path);
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 * attempt as u64));
            }
            let _permit = self.permits.acquire();
            let mut resp = match self.agent.post(&url).send_json(body) {
                Ok(r) => r,
                Err(e) => {
                    last = format!("{url}: {e}");
                    log::warn!("attempt {}: {last}", attempt + 1);
                    continue;
                }
            };
            let status = resp.status().as_u16();
            let text = match resp.body_mut().read_to_string() {
                Ok(t) => t,
                Err(e) => {
                    last = format!("{url}: {e}");
                    continue;
                }
            };
            match status {
                200..=299 => {
                    return serde_json::from_str(&text)
                        .map_err(|e| format!("{url}: malformed response: {e}"));
                }
                500..=599 => {
                    last = format!("{url}: HTTP {status}: {text}");
                    log::warn!("attempt {}: {last}", attempt + 1);
                }
                _ => return Err(format!("{url}: HTTP {status}: {text}")),
            }
        }
        Err(last)
    }
}
