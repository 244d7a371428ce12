//! Per-run manifest: what ran, on which input, producing which files.

use serde::Serialize;

use egl_core::model::SolverSettings;

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub root: f64,
    pub phi: f64,
    pub foc: f64,
    pub steady_state: f64,
    pub alpha: f64,
}

impl From<&SolverSettings> for Tolerances {
    fn from(s: &SolverSettings) -> Self {
        Tolerances {
            root: s.root_tol,
            phi: s.phi_tol,
            foc: s.foc_tol,
            steady_state: s.steady_state_tol,
            alpha: s.alpha_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical input document.
    pub digest: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, digest: String) -> Self {
        RunManifest {
            command: command.into(),
            digest,
            version: env!("CARGO_PKG_VERSION").into(),
            tolerances: None,
            parameters: serde_json::Map::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
