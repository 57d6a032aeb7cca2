//! Config files: a flat TOML table with one key per [`ScenarioConfig`]
//! field, or a run manifest whose `config` object is replayed.

use std::fs;
use std::path::Path;

use cv2x_aoi_core::ScenarioConfig;

use crate::error::{Error, Result};

/// Applies every key of a flat TOML document to `cfg`.
pub fn apply_toml(cfg: &mut ScenarioConfig, text: &str, path: &Path) -> Result<()> {
    let table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| Error::ConfigFile { path: path.into(), message: e.to_string() })?;
    for (key, value) in &table {
        let value = match value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            _ => {
                return Err(Error::ConfigFile {
                    path: path.into(),
                    message: format!("`{key}` must be a string, number or boolean"),
                })
            }
        };
        cfg.set(key, &value)?;
    }
    Ok(())
}

/// Applies the `config` object of a `manifest.json` to `cfg`.
pub fn apply_manifest(cfg: &mut ScenarioConfig, text: &str, path: &Path) -> Result<()> {
    let bad = |message: String| Error::ConfigFile { path: path.into(), message };
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let entries = doc.get("config").and_then(|c| c.as_object()).ok_or_else(|| bad("no `config` object".into()))?;
    for (key, value) in entries {
        let value = value.as_str().ok_or_else(|| bad(format!("`{key}` must be a string")))?;
        cfg.set(key, value)?;
    }
    Ok(())
}

/// Reads `path` into `cfg`; `.json` files are treated as manifests.
pub fn load_into(cfg: &mut ScenarioConfig, path: &Path) -> Result<()> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::ConfigFile { path: path.into(), message: e.to_string() })?;
    if path.extension().is_some_and(|e| e == "json") {
        apply_manifest(cfg, &text, path)
    } else {
        apply_toml(cfg, &text, path)
    }
}

/// Applies `key=value` overrides in order.
pub fn apply_overrides<S: AsRef<str>>(cfg: &mut ScenarioConfig, overrides: &[S]) -> Result<()> {
    for item in overrides {
        let (key, value) = split_override(item.as_ref())?;
        cfg.set(key, value)?;
    }
    Ok(())
}

pub fn split_override(item: &str) -> Result<(&str, &str)> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Usage(format!("expected key=value, got `{item}`")))
}

/// Renders `cfg` as a TOML document that [`apply_toml`] reads back exactly.
pub fn to_toml(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    for (key, value) in cfg.entries() {
        out.push_str(&format!("{key} = {}\n", toml::Value::String(value)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_values_are_accepted() {
        let mut cfg = ScenarioConfig::default();
        let text = "num_vehicles = 12\nspeed_kmh = 90.0\naccess_mode = \"noma\"\nsic_gated = true\nmax_range = \"none\"\n";
        apply_toml(&mut cfg, text, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.num_vehicles, 12);
        assert!((cfg.speed - 25.0).abs() < 1e-12);
        assert!(cfg.sic_gated);
    }

    #[test]
    fn tables_and_unknown_keys_are_rejected() {
        let mut cfg = ScenarioConfig::default();
        let err = apply_toml(&mut cfg, "[phy]\neta = 2\n", Path::new("x.toml")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = apply_toml(&mut cfg, "warp = 9\n", Path::new("x.toml")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn toml_rendering_round_trips() {
        let cfg = ScenarioConfig { num_vehicles: 7, path_loss_exponent: 3.3, max_range: Some(150.5), ..Default::default() };
        let mut back = ScenarioConfig { num_vehicles: 99, ..Default::default() };
        apply_toml(&mut back, &to_toml(&cfg), Path::new("x.toml")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_need_an_equals_sign() {
        let mut cfg = ScenarioConfig::default();
        apply_overrides(&mut cfg, &["rri = 50", "seed=4"]).unwrap();
        assert_eq!((cfg.rri, cfg.rng_seed), (50, 4));
        assert!(matches!(apply_overrides(&mut cfg, &["rri"]), Err(Error::Usage(_))));
    }
}
