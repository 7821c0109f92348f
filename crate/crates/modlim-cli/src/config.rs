//! Input plumbing: domain files, experiment config files, prime-end
//! tokens, output directories, and the reproducibility manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use modlim::report::Manifest;
use modlim::{
    boundary_from_json, build_graph_domain, BoundaryQuadruple, Edge, GraphDomain, PrimeEnd, Side,
};

use crate::error::CliError;

/// Read a file, mapping errors to exit 1 with the path in the message.
pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

/// Load and validate a graph domain from its JSON description file.
pub fn load_domain(path: &Path) -> Result<GraphDomain, CliError> {
    let text = read_file(path)?;
    let f = boundary_from_json(&text)?;
    Ok(build_graph_domain(f)?)
}

/// Parse one prime-end token: `X` or `X:left` / `X:right` (side tags mark
/// the face of a profile wall and are meaningful on the top edge only).
pub fn parse_prime_end(token: &str, edge: Edge) -> Result<PrimeEnd, CliError> {
    let (xs, side) = match token.split_once(':') {
        None => (token, Side::None),
        Some((xs, "left")) => (xs, Side::Left),
        Some((xs, "right")) => (xs, Side::Right),
        Some((_, other)) => {
            return Err(CliError::Usage(format!(
                "bad prime-end token {token:?}: side must be \"left\" or \"right\", got {other:?}"
            )))
        }
    };
    let x: f64 = xs.parse().map_err(|_| {
        CliError::Usage(format!("bad prime-end token {token:?}: {xs:?} is not a number"))
    })?;
    Ok(PrimeEnd { x, edge, side })
}

/// Build the boundary quadruple from four tokens (a, b on the bottom edge
/// and c, d on the top edge), or the full-arcs quadruple when absent.
pub fn parse_quad(
    domain: &GraphDomain,
    tokens: &Option<Vec<String>>,
) -> Result<BoundaryQuadruple, CliError> {
    match tokens {
        None => Ok(BoundaryQuadruple::full_arcs(domain)),
        Some(t) => {
            debug_assert_eq!(t.len(), 4, "clap enforces num_args(4)");
            let a = parse_prime_end(&t[0], Edge::Bottom)?;
            let b = parse_prime_end(&t[1], Edge::Bottom)?;
            let c = parse_prime_end(&t[2], Edge::Top)?;
            let d = parse_prime_end(&t[3], Edge::Top)?;
            Ok(BoundaryQuadruple::new(domain, a, b, c, d)?)
        }
    }
}

/// Either an inline profile object or a path to a profile file.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Path(String),
    Inline(serde_json::Value),
}

/// Experiment configuration for `sweep eps`, `sweep eta`, and `sandwich`.
///
/// ```json
/// {
///   "domain": {"kind": "step", "interval": [0, 2], "breakpoints": [1], "values": [1, 2]},
///   "quad": ["0", "2", "2", "0"],
///   "eps_list": [0.5, 0.25, 0.125],
///   "eta_list": [0.4, 0.2, 0.1],
///   "h": 0.02,
///   "h_divisor": 8.0,
///   "tol": 1e-3,
///   "max_iter": 200,
///   "rel_error_bound": 0.02
/// }
/// ```
///
/// `domain` may also be a string holding a path to a profile file
/// (relative paths resolve against the config file's directory).  Each
/// command reads the fields it needs: `eps_list` for `sweep eps`,
/// `eta_list` + `h` for `sweep eta`, and all three for `sandwich`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainRef,
    #[serde(default)]
    pub quad: Option<Vec<String>>,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default)]
    pub eta_list: Option<Vec<f64>>,
    /// Cell size for the width-restricted solves.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub h_divisor: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    /// Acceptance bound on the extrapolated limit's relative error
    /// (`sweep eps` only; default 0.02).
    #[serde(default)]
    pub rel_error_bound: Option<f64>,
}

/// A parsed config plus the hash of the bytes it came from.
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub config_hash: String,
    config_dir: PathBuf,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Io(format!("config {}: {e}", path.display())))?;
    Ok(LoadedConfig {
        config,
        config_hash: sha256_hex(&bytes),
        config_dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
    })
}

impl LoadedConfig {
    /// Resolve the config's domain: inline object or referenced file.
    pub fn domain(&self) -> Result<GraphDomain, CliError> {
        match &self.config.domain {
            DomainRef::Inline(v) => {
                let text = serde_json::to_string(v).expect("value re-serializes");
                let f = boundary_from_json(&text)?;
                Ok(build_graph_domain(f)?)
            }
            DomainRef::Path(p) => {
                let p = Path::new(p);
                let resolved = if p.is_absolute() { p.to_path_buf() } else { self.config_dir.join(p) };
                load_domain(&resolved)
            }
        }
    }

    pub fn sweep_config(&self) -> modlim::SweepConfig {
        let mut s = modlim::SweepConfig::default();
        if let Some(v) = self.config.h_divisor {
            s.h_divisor = v;
        }
        if let Some(v) = self.config.tol {
            s.tol = v;
        }
        if let Some(v) = self.config.max_iter {
            s.max_iter = v;
        }
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Collects files written during a run and emits `manifest.json` last.
pub struct OutputWriter {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl OutputWriter {
    /// Create the output directory (and parents) if needed.
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Write the manifest recording what this run produced.
    pub fn finish(mut self, command: &str, seed: u64, config_hash: &str) -> Result<(), CliError> {
        let mut outputs = self.outputs.clone();
        outputs.push("manifest.json".to_string());
        let manifest = Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash: config_hash.to_string(),
            outputs,
        };
        self.write("manifest.json", &manifest.to_json())
    }
}
