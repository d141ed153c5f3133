//! Service configuration and the translation of requested limits into
//! solver limits.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use serde::Deserialize;
use sparc_core::solve::{SolveLimits, DEFAULT_MAX_ANSWER_SETS, DEFAULT_TIMEOUT, MAX_TIMEOUT};

/// What happens to a requested timeout above the maximum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeoutPolicy {
    #[default]
    Reject,
    Clamp,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, rename_all = "snake_case", deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub default_timeout_sec: f64,
    pub max_timeout_sec: f64,
    pub timeout_policy: TimeoutPolicy,
    pub max_concurrent_solves: usize,
    pub max_answer_sets: usize,
    pub max_program_bytes: usize,
    pub session_ttl_sec: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("sparc-data"),
            default_timeout_sec: DEFAULT_TIMEOUT.as_secs_f64(),
            max_timeout_sec: MAX_TIMEOUT.as_secs_f64(),
            timeout_policy: TimeoutPolicy::Reject,
            max_concurrent_solves: 8,
            max_answer_sets: DEFAULT_MAX_ANSWER_SETS,
            max_program_bytes: 1 << 20,
            session_ttl_sec: 24 * 60 * 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LimitError {
    #[error("the timeout must be a positive number of seconds, got {0}")]
    NonPositiveTimeout(f64),
    #[error("the timeout of {requested} s exceeds the maximum of {max} s")]
    TimeoutTooLarge { requested: f64, max: f64 },
    #[error("the answer-set cap must be at least 1")]
    ZeroAnswerSetCap,
}

impl ServiceConfig {
    /// Solver limits for a request. A missing timeout takes the default; one
    /// above the maximum is rejected or clamped per [`TimeoutPolicy`]. The
    /// answer-set cap never exceeds the configured cap.
    pub fn limits_for(&self, timeout_sec: Option<f64>, max_models: Option<usize>) -> Result<SolveLimits, LimitError> {
        let max = self.max_timeout_sec.min(MAX_TIMEOUT.as_secs_f64());
        let requested = timeout_sec.unwrap_or(self.default_timeout_sec);
        if requested.is_nan() || requested <= 0.0 {
            return Err(LimitError::NonPositiveTimeout(requested));
        }
        let secs = if requested <= max {
            requested
        } else {
            match self.timeout_policy {
                TimeoutPolicy::Reject => return Err(LimitError::TimeoutTooLarge { requested, max }),
                TimeoutPolicy::Clamp => max,
            }
        };
        let cap = match max_models {
            Some(0) => return Err(LimitError::ZeroAnswerSetCap),
            Some(n) => n.min(self.max_answer_sets),
            None => self.max_answer_sets,
        };
        Ok(SolveLimits {
            timeout: Duration::from_secs_f64(secs),
            max_answer_sets: cap,
            ..SolveLimits::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_bounds() {
        let c = ServiceConfig::default();
        assert_eq!(c.limits_for(None, None).unwrap().timeout, Duration::from_secs(20));
        assert_eq!(c.limits_for(Some(50.0), None).unwrap().timeout, Duration::from_secs(50));
        assert_eq!(
            c.limits_for(Some(51.0), None),
            Err(LimitError::TimeoutTooLarge { requested: 51.0, max: 50.0 })
        );
        assert!(matches!(c.limits_for(Some(0.0), None), Err(LimitError::NonPositiveTimeout(_))));
        assert!(matches!(c.limits_for(Some(f64::NAN), None), Err(LimitError::NonPositiveTimeout(_))));
    }

    #[test]
    fn clamping_policy() {
        let c = ServiceConfig {
            timeout_policy: TimeoutPolicy::Clamp,
            ..ServiceConfig::default()
        };
        assert_eq!(c.limits_for(Some(51.0), None).unwrap().timeout, Duration::from_secs(50));
    }

    #[test]
    fn answer_set_cap_is_bounded_by_config() {
        let c = ServiceConfig {
            max_answer_sets: 10,
            ..ServiceConfig::default()
        };
        assert_eq!(c.limits_for(None, Some(3)).unwrap().max_answer_sets, 3);
        assert_eq!(c.limits_for(None, Some(30)).unwrap().max_answer_sets, 10);
        assert_eq!(c.limits_for(None, Some(0)), Err(LimitError::ZeroAnswerSetCap));
    }
}
