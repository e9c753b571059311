//! Run configuration: flags take precedence over the config file, which
//! takes precedence over defaults.

use std::path::PathBuf;

use serde::Deserialize;

/// Usage-level failure (missing seed, malformed bits); exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

/// Optional values loadable from a TOML config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub prime_bits: Option<usize>,
    pub tolerances: Option<qxot::Tolerances>,
}

/// Resolved settings shared by every command.
#[derive(Debug)]
pub struct RunContext {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub prime_bits: Option<usize>,
    pub tolerances: qxot::Tolerances,
}

impl RunContext {
    pub fn build(common: &crate::CommonArgs) -> anyhow::Result<Self> {
        let file: FileConfig = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read config {path:?}: {e}")))?;
                toml::from_str(&text)
                    .map_err(|e| UsageError(format!("malformed config {path:?}: {e}")))?
            }
            None => FileConfig::default(),
        };
        let seed = common
            .seed
            .or(file.seed)
            .or_else(|| std::env::var("QXOT_SEED").ok().and_then(|s| s.parse().ok()));
        let Some(seed) = seed else {
            return Err(UsageError(
                "a seed is required: pass --seed, set it in the config file, or export QXOT_SEED"
                    .into(),
            )
            .into());
        };
        let out_dir = common
            .out_dir
            .clone()
            .or(file.out_dir)
            .unwrap_or_else(|| PathBuf::from("out"));
        let jobs = common.jobs.or(file.jobs).unwrap_or(1).max(1);
        Ok(Self {
            seed,
            out_dir,
            jobs,
            prime_bits: file.prime_bits,
            tolerances: file.tolerances.unwrap_or_default(),
        })
    }

    /// Writes a JSON value with sorted keys; byte-identical for identical
    /// inputs.
    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> anyhow::Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> anyhow::Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Parses a bit-string argument like "1011" into bits.
pub fn parse_bits(s: &str) -> anyhow::Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            other => Err(UsageError(format!("invalid bit character '{other}'")).into()),
        })
        .collect()
}

/// Two-bit pair from a bit string of length 2.
pub fn parse_bit_pair(s: &str) -> anyhow::Result<(u8, u8)> {
    let bits = parse_bits(s)?;
    if bits.len() != 2 {
        return Err(UsageError(format!("expected exactly 2 bits, got '{s}'")).into());
    }
    Ok((bits[0], bits[1]))
}
