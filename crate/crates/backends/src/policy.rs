//! Clocks, retry schedules and the request rate limiter.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::error::BackendError;

pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d)
    }
}

/// Test clock: sleeping advances time instantly and is recorded.
#[derive(Debug, Default)]
pub struct ManualClock {
    state: Mutex<(Duration, Vec<Duration>)>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        self.state.lock().unwrap().0 += d;
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.state.lock().unwrap().1.clone()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        self.state.lock().unwrap().0
    }

    fn sleep(&self, d: Duration) {
        let mut s = self.state.lock().unwrap();
        s.0 += d;
        s.1.push(d);
    }
}

/// Capped exponential backoff: attempt `i` (0-based) that fails waits
/// `min(base * 2^i, cap)` before the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(8) }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy { max_retries: 0, ..Self::default() }
    }

    pub fn max_attempts(&self) -> u32 {
        self.max_retries.saturating_add(1)
    }

    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.min(31)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }

    /// Runs `op` until it succeeds, fails with a non-retryable error, or the
    /// attempt budget is spent. Returns the value and the number of attempts.
    pub fn run<T, F>(&self, backend: &str, clock: &dyn Clock, mut op: F) -> Result<(T, u32), BackendError>
    where
        F: FnMut() -> Result<T, BackendError>,
    {
        let mut attempt = 0;
        loop {
            match op() {
                Ok(v) => return Ok((v, attempt + 1)),
                Err(e) if e.is_retryable() => {
                    if attempt + 1 >= self.max_attempts() {
                        return Err(BackendError::Unavailable {
                            backend: backend.to_string(),
                            attempts: attempt + 1,
                            message: e.to_string(),
                        });
                    }
                    tracing::debug!(backend, attempt, error = %e, "retrying");
                    clock.sleep(self.delay(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Sliding one-minute window limiter. Callers over budget block until a slot
/// frees up; requests are delayed, never dropped.
pub struct RateLimiter {
    per_minute: u32,
    clock: Arc<dyn Clock>,
    sent: Mutex<VecDeque<Duration>>,
}

const WINDOW: Duration = Duration::from_secs(60);

impl RateLimiter {
    pub fn new(per_minute: u32, clock: Arc<dyn Clock>) -> Self {
        assert!(per_minute > 0, "rate limit must be positive");
        RateLimiter { per_minute, clock, sent: Mutex::new(VecDeque::new()) }
    }

    /// Blocks until a request may be dispatched and returns the dispatch time.
    pub fn acquire(&self) -> Duration {
        loop {
            let wait = {
                let mut sent = self.sent.lock().unwrap();
                let now = self.clock.now();
                while sent.front().is_some_and(|t| now.saturating_sub(*t) >= WINDOW) {
                    sent.pop_front();
                }
                if sent.len() < self.per_minute as usize {
                    sent.push_back(now);
                    return now;
                }
                (sent[0] + WINDOW).saturating_sub(now)
            };
            self.clock.sleep(wait.max(Duration::from_millis(1)));
        }
    }
}

impl std::fmt::Debug for RateLimiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateLimiter").field("per_minute", &self.per_minute).finish()
    }
}
