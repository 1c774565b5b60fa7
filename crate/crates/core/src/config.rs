//! Backend configuration resolution and run digests.
//!
//! HTTP settings are layered: command-line flags, then environment
//! variables, then an optional TOML file of the form
//!
//! ```toml
//! [http]
//! api_url = "https://example.invalid/v1/extract"
//! api_key = "..."
//! model = "some-model"
//! timeout_secs = 600
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::extraction::HttpConfig;

pub const ENV_API_URL: &str = "NARRATIVE_NET_API_URL";
pub const ENV_API_KEY: &str = "NARRATIVE_NET_API_KEY";
pub const ENV_MODEL: &str = "NARRATIVE_NET_MODEL";
pub const DEFAULT_MODEL: &str = "default";
pub const DEFAULT_TIMEOUT_SECS: u64 = 600;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing config {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error("no API URL: pass --api-url, set {ENV_API_URL}, or add http.api_url to the config file")]
    MissingApiUrl,
}

/// One layer of HTTP settings; unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpSettings {
    pub api_url: Option<String>,
    pub api_key: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: Option<u64>,
}

impl HttpSettings {
    /// Fills unset fields from `lower`.
    pub fn or(self, lower: HttpSettings) -> HttpSettings {
        HttpSettings {
            api_url: self.api_url.or(lower.api_url),
            api_key: self.api_key.or(lower.api_key),
            model: self.model.or(lower.model),
            timeout_secs: self.timeout_secs.or(lower.timeout_secs),
        }
    }

    /// Reads the environment layer through `lookup`.
    pub fn from_env(lookup: impl Fn(&str) -> Option<String>) -> HttpSettings {
        let get = |k: &str| lookup(k).filter(|v| !v.is_empty());
        HttpSettings {
            api_url: get(ENV_API_URL),
            api_key: get(ENV_API_KEY),
            model: get(ENV_MODEL),
            timeout_secs: None,
        }
    }

    pub fn into_config(self) -> Result<HttpConfig, ConfigError> {
        Ok(HttpConfig {
            api_url: self.api_url.ok_or(ConfigError::MissingApiUrl)?,
            api_key: self.api_key,
            model: self.model.unwrap_or_else(|| DEFAULT_MODEL.to_string()),
            timeout_secs: self.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS),
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    http: HttpSettings,
}

pub fn parse_config_file(text: &str, path: &str) -> Result<HttpSettings, ConfigError> {
    toml::from_str::<ConfigFile>(text)
        .map(|f| f.http)
        .map_err(|source| ConfigError::Parse {
            path: path.to_string(),
            source,
        })
}

pub fn read_config_file(path: &Path) -> Result<HttpSettings, ConfigError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: shown.clone(),
        source,
    })?;
    parse_config_file(&text, &shown)
}

/// Resolves flags > environment > file.
pub fn resolve_http(
    flags: HttpSettings,
    env: impl Fn(&str) -> Option<String>,
    file: Option<&Path>,
) -> Result<HttpConfig, ConfigError> {
    let file = match file {
        Some(p) => read_config_file(p)?,
        None => HttpSettings::default(),
    };
    flags.or(HttpSettings::from_env(env)).or(file).into_config()
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Digest of a JSON value. Object keys serialize sorted, so equal
/// configurations digest equally regardless of construction order.
pub fn config_digest(value: &serde_json::Value) -> String {
    sha256_hex(value.to_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn env(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> =
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn precedence_flags_env_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(
            &path,
            "[http]\napi_url = \"http://file\"\nmodel = \"file-model\"\ntimeout_secs = 30\napi_key = \"file-key\"\n",
        )
        .unwrap();
        let flags = HttpSettings {
            model: Some("flag-model".into()),
            ..Default::default()
        };
        let cfg = resolve_http(
            flags,
            env(&[(ENV_API_URL, "http://env"), (ENV_MODEL, "env-model")]),
            Some(&path),
        )
        .unwrap();
        assert_eq!(cfg.api_url, "http://env");
        assert_eq!(cfg.model, "flag-model");
        assert_eq!(cfg.api_key.as_deref(), Some("file-key"));
        assert_eq!(cfg.timeout_secs, 30);
    }

    #[test]
    fn defaults_and_missing_url() {
        let cfg = resolve_http(HttpSettings::default(), env(&[(ENV_API_URL, "http://x")]), None).unwrap();
        assert_eq!((cfg.model.as_str(), cfg.timeout_secs), (DEFAULT_MODEL, DEFAULT_TIMEOUT_SECS));
        assert!(cfg.api_key.is_none());
        // empty environment values count as unset
        assert!(matches!(
            resolve_http(HttpSettings::default(), env(&[(ENV_API_URL, "")]), None),
            Err(ConfigError::MissingApiUrl)
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config_file("[http]\nurl = \"x\"\n", "c").is_err());
        assert_eq!(parse_config_file("", "c").unwrap(), HttpSettings::default());
    }

    #[test]
    fn digest_is_key_order_independent() {
        let a = serde_json::json!({"a": 1, "b": [1, 2]});
        let b: serde_json::Value = serde_json::from_str(r#"{"b":[1,2],"a":1}"#).unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_ne!(config_digest(&a), config_digest(&serde_json::json!({"a": 2})));
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
