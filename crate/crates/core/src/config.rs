//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, list values are
//! comma-separated. Keys are case-sensitive and may appear once.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::channel::NetworkConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: "empty key".into(),
                });
            }
            if entries
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: *line,
                    reason: format!("unknown key `{key}`"),
                });
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some((line, value)) = self.entries.get(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|_| Error::Parse {
            line: *line,
            reason: format!("`{key}`: cannot parse `{value}`"),
        })
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((line, value)) = self.entries.get(key) else {
            return Ok(None);
        };
        value
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse().map_err(|_| Error::Parse {
                    line: *line,
                    reason: format!("`{key}`: cannot parse list item `{item}`"),
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }
}

/// Keys understood by [`network_config`].
pub const NETWORK_KEYS: &[&str] = &[
    "K", "distances", "eta", "p_c", "P_avg", "P_max", "N0", "T", "alpha", "ref_loss",
];

/// Builds a network from the reference deployment and the keys present.
///
/// `distances` replaces the deployment outright; otherwise `K` selects the
/// first `K` reference users. `P_max` defaults to `5 * P_avg`.
pub fn network_config(kv: &KeyValues) -> Result<NetworkConfig> {
    let mut config = match kv.get::<usize>("K")? {
        Some(k) if !kv.contains("distances") => NetworkConfig::reference(k)?,
        _ => NetworkConfig::reference(5)?,
    };
    apply_network_keys(&mut config, kv, &["K"])?;
    if let (Some(k), true) = (kv.get::<usize>("K")?, kv.contains("distances")) {
        if k != config.num_users() {
            return Err(Error::config(
                "K",
                format!("{k} does not match {} distances", config.num_users()),
            ));
        }
    }
    config.validate()?;
    Ok(config)
}

/// Overwrites the fields of `config` named in `kv`, except keys in `skip`.
///
/// A new `distances` list resets `eta` to the default unless `eta` is also
/// given. `eta` is a single value or one value per user. Setting `P_avg`
/// without `P_max` keeps the peak at five times the average.
pub fn apply_network_keys(config: &mut NetworkConfig, kv: &KeyValues, skip: &[&str]) -> Result<()> {
    let take = |key: &str| !skip.contains(&key);
    if take("distances") {
        if let Some(d) = kv.get_list::<f64>("distances")? {
            config.eta = vec![NetworkConfig::DEFAULT_ETA; d.len()];
            config.distances = d;
        }
    }
    if take("eta") {
        if let Some(eta) = kv.get_list::<f64>("eta")? {
            config.eta = match eta.as_slice() {
                [single] => vec![*single; config.num_users()],
                _ => eta,
            };
        }
    }
    let scalars: [(&str, &mut f64); 6] = [
        ("p_c", &mut config.p_c),
        ("P_avg", &mut config.p_avg),
        ("N0", &mut config.n0),
        ("T", &mut config.epoch_duration),
        ("alpha", &mut config.path_loss_exponent),
        ("ref_loss", &mut config.ref_loss),
    ];
    for (key, slot) in scalars {
        if take(key) {
            if let Some(v) = kv.get(key)? {
                *slot = v;
            }
        }
    }
    if take("P_max") {
        if let Some(v) = kv.get("P_max")? {
            config.p_max = v;
        } else if take("P_avg") && kv.contains("P_avg") {
            config.p_max = 5.0 * config.p_avg;
        }
    }
    Ok(())
}
