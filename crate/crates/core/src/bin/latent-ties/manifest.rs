use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use latent_ties::store::sha256_hex;

use crate::{CliError, Common};

/// Written next to every output. Holds no timestamps and no thread count,
/// so identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: &'static str,
    pub subcommand: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    /// Input path to SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(skip)]
    root: Option<PathBuf>,
}

impl RunManifest {
    pub fn new(subcommand: &str, common: &Common) -> Self {
        let mut config = BTreeMap::new();
        config.insert("tau_max".into(), common.tau_max.to_string());
        config.insert("bin_seconds".into(), common.bin_seconds.to_string());
        config.insert("folds".into(), common.folds.to_string());
        config.insert("permutations".into(), common.permutations.to_string());
        config.insert("epsilon_kl".into(), common.epsilon_kl.to_string());
        config.insert("threshold_rule".into(), format!("{:?}", common.threshold_rule).to_lowercase());
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            seed: common.seed,
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            root: None,
        }
    }

    /// Record paths relative to `root` when they lie beneath it.
    pub fn relative_to(mut self, root: &Path) -> Self {
        self.root = Some(root.to_path_buf());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    fn name(&self, path: &Path) -> String {
        let shown = self
            .root
            .as_deref()
            .and_then(|r| path.strip_prefix(r).ok())
            .unwrap_or(path);
        shown.to_string_lossy().replace('\\', "/")
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::input(path, e))?;
        self.inputs.insert(self.name(path), sha256_hex(&bytes));
        Ok(())
    }

    pub fn output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.insert(self.name(path), sha256_hex(bytes));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::input(path, e))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::input(path, e))
    }
}
