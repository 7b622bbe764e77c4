//! File formats: two-column CSV data, JSON-lines chain files with a
//! metadata header, and JSON reports. All writers go through a
//! write-to-temp-then-rename step so failed runs never leave partial files.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::FrechetSample;
use crate::margins::{GevFit, GevParams};
use crate::mcmc::KeptState;
use crate::prior::PriorConfig;
use crate::summary::PosteriorSummary;

/// FNV-1a digest used to tie chain files to the data they were fit on.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Write bytes atomically: temp file in the target directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("not a file path: {}", path.display())))?;
    let mut tmp = dir.map(Path::to_path_buf).unwrap_or_default();
    tmp.push(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}

/// Write unit-Fréchet pairs as CSV with a `y1,y2` header.
pub fn write_pairs_csv(path: &Path, pairs: &[(f64, f64)]) -> Result<()> {
    let mut out = String::with_capacity(16 * pairs.len() + 8);
    out.push_str("y1,y2\n");
    for &(y1, y2) in pairs {
        out.push_str(&format!("{y1},{y2}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// Read a two-column numeric CSV; a single non-numeric header line is
/// accepted and skipped.
pub fn read_pairs_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut cols = trimmed.split(',');
        let (a, b) = (cols.next(), cols.next());
        if cols.next().is_some() {
            return Err(Error::Format(format!(
                "{}:{}: expected two columns",
                path.display(),
                idx + 1
            )));
        }
        match (a.and_then(|v| v.trim().parse::<f64>().ok()), b.and_then(|v| v.trim().parse::<f64>().ok())) {
            (Some(x), Some(y)) => pairs.push((x, y)),
            _ if idx == 0 => continue, // header line
            _ => {
                return Err(Error::Format(format!(
                    "{}:{}: could not parse `{trimmed}` as two numbers",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Format(format!("{}: no data rows", path.display())));
    }
    Ok(pairs)
}

/// Read a CSV of unit-Fréchet pairs (header `y1,y2`).
pub fn read_frechet_csv(path: &Path) -> Result<FrechetSample<f64>> {
    FrechetSample::new(read_pairs_csv(path)?)
}

/// Metadata header stored as the first line of a chain file; chains are
/// self-describing so downstream commands never re-state fit options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub prior: PriorConfig,
    pub init_k: Option<usize>,
    pub refresh_prob: f64,
    pub n_obs: usize,
    pub data_digest: String,
    pub acceptance_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refresh_acceptance_rate: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    meta: ChainMeta,
}

/// Persist a chain: one metadata line, then one JSON object per kept state.
pub fn write_chain(path: &Path, meta: &ChainMeta, states: &[KeptState]) -> Result<()> {
    let mut out = Vec::with_capacity(64 * states.len() + 256);
    serde_json::to_writer(&mut out, &MetaLine { meta: meta.clone() })
        .map_err(|e| Error::Format(e.to_string()))?;
    out.push(b'\n');
    for s in states {
        serde_json::to_writer(&mut out, s).map_err(|e| Error::Format(e.to_string()))?;
        out.push(b'\n');
    }
    atomic_write(path, &out)
}

/// Load a chain file written by [`write_chain`].
pub fn read_chain(path: &Path) -> Result<(ChainMeta, Vec<KeptState>)> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty chain file", path.display())))??;
    let meta: MetaLine = serde_json::from_str(&header)
        .map_err(|e| Error::Format(format!("{}: bad metadata line: {e}", path.display())))?;
    let mut states = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let state: KeptState = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{}:{}: bad state: {e}", path.display(), idx + 2)))?;
        states.push(state);
    }
    Ok((meta.meta, states))
}

/// Fitted margins as persisted to JSON; standard errors are optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginsFile {
    pub margin1: GevParams<f64>,
    pub margin2: GevParams<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_errors1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_errors2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_likelihood1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_likelihood2: Option<f64>,
}

impl MarginsFile {
    pub fn from_fits(fit1: &GevFit, fit2: &GevFit) -> Self {
        let clean = |se: &[f64; 3]| -> Option<Vec<f64>> {
            if se.iter().all(|v| v.is_finite()) {
                Some(se.to_vec())
            } else {
                None
            }
        };
        MarginsFile {
            margin1: fit1.params,
            margin2: fit2.params,
            std_errors1: clean(&fit1.std_errors),
            std_errors2: clean(&fit2.std_errors),
            log_likelihood1: Some(fit1.log_likelihood),
            log_likelihood2: Some(fit2.log_likelihood),
        }
    }

    pub fn params(&self) -> Result<(GevParams<f64>, GevParams<f64>)> {
        let m1 = GevParams::new(self.margin1.mu, self.margin1.sigma, self.margin1.xi)?;
        let m2 = GevParams::new(self.margin2.mu, self.margin2.sigma, self.margin2.xi)?;
        Ok((m1, m2))
    }
}

#[derive(Serialize, Deserialize)]
struct AngularJson {
    k: usize,
    eta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PickandsJson {
    k: usize,
    beta: Vec<f64>,
}

/// Write angular coefficients as `{"k": ..., "eta": [...]}`.
pub fn write_angular_json(path: &Path, c: &crate::AngularCoefficients) -> Result<()> {
    write_json(path, &AngularJson { k: c.k(), eta: c.eta().to_vec() })
}

/// Read and validate angular coefficients.
pub fn read_angular_json(path: &Path) -> Result<crate::AngularCoefficients> {
    let raw: AngularJson = read_json(path)?;
    if raw.eta.len() != raw.k {
        return Err(Error::Format(format!(
            "{}: k = {} but {} coefficients",
            path.display(),
            raw.k,
            raw.eta.len()
        )));
    }
    crate::AngularCoefficients::new(raw.eta)
}

/// Write Pickands coefficients as `{"k": ..., "beta": [...]}`.
pub fn write_pickands_json(path: &Path, c: &crate::PickandsCoefficients) -> Result<()> {
    write_json(path, &PickandsJson { k: c.k(), beta: c.beta().to_vec() })
}

/// Read and validate Pickands coefficients.
pub fn read_pickands_json(path: &Path) -> Result<crate::PickandsCoefficients> {
    let raw: PickandsJson = read_json(path)?;
    if raw.beta.len() != raw.k + 1 {
        return Err(Error::Format(format!(
            "{}: k = {} but {} coefficients",
            path.display(),
            raw.k,
            raw.beta.len()
        )));
    }
    crate::PickandsCoefficients::new(raw.beta)
}

/// Serialize any report as pretty JSON (atomically).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// Parse a JSON file.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Write the posterior summary as a plot-ready CSV: one row per grid point
/// with the Pickands and angular-density bands.
pub fn write_summary_csv(path: &Path, summary: &PosteriorSummary) -> Result<()> {
    let mut out = String::new();
    out.push_str("t,A_mean,A_q05,A_q95,h_mean,h_q05,h_q95\n");
    for j in 0..summary.grid.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            summary.grid[j],
            summary.pickands.mean[j],
            summary.pickands.q05[j],
            summary.pickands.q95[j],
            summary.angular_density.mean[j],
            summary.angular_density.q05[j],
            summary.angular_density.q95[j],
        ));
    }
    atomic_write(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn pairs_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("pairs.csv");
        let pairs = vec![(1.5, 2.25), (0.125, 97.0)];
        write_pairs_csv(&path, &pairs).unwrap();
        let back = read_pairs_csv(&path).unwrap();
        assert_eq!(back, pairs);
        // headerless files parse too
        fs::write(&path, "1,2\n3,4\n").unwrap();
        assert_eq!(read_pairs_csv(&path).unwrap(), vec![(1.0, 2.0), (3.0, 4.0)]);
        // malformed interior line fails with a position
        fs::write(&path, "y1,y2\n1,2\nnope,4\n").unwrap();
        assert!(matches!(read_pairs_csv(&path), Err(Error::Format(_))));
        fs::write(&path, "1,2,3\n").unwrap();
        assert!(read_pairs_csv(&path).is_err());
    }

    #[test]
    fn chain_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("chain.jsonl");
        let meta = ChainMeta {
            seed: 7,
            iterations: 1000,
            burn_in: 100,
            thin: 2,
            prior: PriorConfig::Poisson { mean: 7.0 },
            init_k: None,
            refresh_prob: 0.5,
            n_obs: 100,
            data_digest: format!("{:016x}", fnv1a64(b"data")),
            acceptance_rate: 0.31,
            refresh_acceptance_rate: Some(0.7),
        };
        let states = vec![
            KeptState { k: 3, eta: vec![0.0, 0.5, 1.0], log_likelihood: -12.0 },
            KeptState { k: 4, eta: vec![0.1, 0.4, 0.6, 0.9], log_likelihood: -11.5 },
        ];
        write_chain(&path, &meta, &states).unwrap();
        let (meta_back, states_back) = read_chain(&path).unwrap();
        assert_eq!(meta_back, meta);
        assert_eq!(states_back, states);
        // states rebuild into validated coefficients
        for s in &states_back {
            s.coefficients().unwrap();
        }
    }

    #[test]
    fn margins_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("margins.json");
        let file = MarginsFile {
            margin1: GevParams { mu: 0.0055, sigma: 0.0025, xi: 0.0249 },
            margin2: GevParams { mu: 0.0068, sigma: 0.0030, xi: 0.1199 },
            std_errors1: None,
            std_errors2: None,
            log_likelihood1: None,
            log_likelihood2: None,
        };
        write_json(&path, &file).unwrap();
        let back: MarginsFile = read_json(&path).unwrap();
        let (m1, m2) = back.params().unwrap();
        assert_eq!(m1.mu, 0.0055);
        assert_eq!(m2.xi, 0.1199);
        // invalid scale is rejected on load
        fs::write(&path, r#"{"margin1":{"mu":0,"sigma":-1,"xi":0},"margin2":{"mu":0,"sigma":1,"xi":0}}"#).unwrap();
        let bad: MarginsFile = read_json(&path).unwrap();
        assert!(bad.params().is_err());
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, b"hello").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"hello");
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn coefficient_json_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("eta.json");
        let eta = crate::AngularCoefficients::new(vec![0.1, 0.4, 0.6, 0.9]).unwrap();
        write_angular_json(&path, &eta).unwrap();
        assert_eq!(read_angular_json(&path).unwrap().eta(), eta.eta());

        let beta_path = dir.path().join("beta.json");
        let beta = eta.to_pickands();
        write_pickands_json(&beta_path, &beta).unwrap();
        assert_eq!(read_pickands_json(&beta_path).unwrap().beta(), beta.beta());

        // schema mismatches and invalid vectors are rejected
        fs::write(&path, r#"{"k":3,"eta":[0.1,0.4,0.6,0.9]}"#).unwrap();
        assert!(read_angular_json(&path).is_err());
        fs::write(&path, r#"{"k":3,"eta":[0.6,0.5,0.4]}"#).unwrap();
        assert!(read_angular_json(&path).is_err());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"y1,y2\n"), fnv1a64(b"y1,y2\n"));
        assert_ne!(fnv1a64(b"a"), fnv1a64(b"b"));
    }
}
