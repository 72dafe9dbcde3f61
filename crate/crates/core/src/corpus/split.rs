use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{CorpusError, TypedProcess};
use crate::{seed, IoError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl SplitRatios {
    pub const DEFAULT: SplitRatios = SplitRatios {
        train: 0.8,
        dev: 0.1,
        test: 0.1,
    };

    pub fn new(train: f64, dev: f64, test: f64) -> Result<Self, CorpusError> {
        let r = SplitRatios { train, dev, test };
        let all = [train, dev, test];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(CorpusError::InvalidSplit(format!("bad ratios {all:?}")));
        }
        if ((train + dev + test) - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidSplit(format!(
                "ratios {all:?} do not sum to 1"
            )));
        }
        Ok(r)
    }
}

impl FromStr for SplitRatios {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CorpusError::InvalidSplit(format!("`{s}`: {e}")))?;
        match parts[..] {
            [train, dev, test] => SplitRatios::new(train, dev, test),
            _ => Err(CorpusError::InvalidSplit(format!(
                "`{s}`: expected three comma-separated ratios"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<TypedProcess>,
    pub dev: Vec<TypedProcess>,
    pub test: Vec<TypedProcess>,
    pub seed: u64,
    pub ratios: SplitRatios,
}

/// Membership record shared by every model trained or evaluated on a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratios: SplitRatios,
    pub sizes: [usize; 3],
    pub train_ids: Vec<String>,
    pub dev_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub digest: String,
}

fn ids(ps: &[TypedProcess]) -> Vec<String> {
    ps.iter().map(|p| p.id.clone()).collect()
}

fn split_paths(prefix: &Path) -> [PathBuf; 4] {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    [
        with(".train.jsonl"),
        with(".dev.jsonl"),
        with(".test.jsonl"),
        with(".manifest.json"),
    ]
}

impl DatasetSplit {
    pub fn manifest(&self) -> SplitManifest {
        let (train_ids, dev_ids, test_ids) = (ids(&self.train), ids(&self.dev), ids(&self.test));
        let payload = serde_json::to_vec(&(&train_ids, &dev_ids, &test_ids))
            .expect("id lists serialise");
        SplitManifest {
            seed: self.seed,
            ratios: self.ratios,
            sizes: [self.train.len(), self.dev.len(), self.test.len()],
            digest: seed::hex_digest(&payload),
            train_ids,
            dev_ids,
            test_ids,
        }
    }

    /// All processes, train then dev then test.
    pub fn all(&self) -> impl Iterator<Item = &TypedProcess> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }

    /// Writes `P.train.jsonl`, `P.dev.jsonl`, `P.test.jsonl` and `P.manifest.json`.
    pub fn write(&self, prefix: &Path) -> Result<(), CorpusError> {
        let [train, dev, test, manifest] = split_paths(prefix);
        crate::write_jsonl(&train, &self.train)?;
        crate::write_jsonl(&dev, &self.dev)?;
        crate::write_jsonl(&test, &self.test)?;
        let mut json = serde_json::to_string_pretty(&self.manifest()).expect("manifest serialises");
        json.push('\n');
        std::fs::write(&manifest, json).map_err(|e| IoError::io(&manifest, e))?;
        Ok(())
    }

    /// Reads a split written by [`DatasetSplit::write`] and checks it against its manifest.
    pub fn read(prefix: &Path) -> Result<Self, CorpusError> {
        let [train, dev, test, manifest_path] = split_paths(prefix);
        let text =
            std::fs::read_to_string(&manifest_path).map_err(|e| IoError::io(&manifest_path, e))?;
        let manifest: SplitManifest = serde_json::from_str(&text).map_err(|source| IoError::Json {
            path: manifest_path.clone(),
            line: 0,
            source,
        })?;
        let split = DatasetSplit {
            train: crate::read_jsonl(&train)?,
            dev: crate::read_jsonl(&dev)?,
            test: crate::read_jsonl(&test)?,
            seed: manifest.seed,
            ratios: manifest.ratios,
        };
        if split.manifest() != manifest {
            return Err(CorpusError::InvalidSplit(format!(
                "split files under {} do not match their manifest",
                prefix.display()
            )));
        }
        Ok(split)
    }
}

fn portion(n: usize, ratio: f64) -> usize {
    // the epsilon keeps e.g. 0.29 * 100 = 28.999999999999996 at 29
    (n as f64 * ratio + 1e-9).floor() as usize
}

/// Seeded shuffle of the id-sorted dataset; dev and test sizes are floored,
/// train takes the remainder.
pub fn split_dataset(
    dataset: &[TypedProcess],
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetSplit, CorpusError> {
    let ratios = SplitRatios::new(ratios.train, ratios.dev, ratios.test)?;
    let n = dataset.len();
    if n < 3 {
        return Err(CorpusError::InvalidSplit(format!(
            "need at least 3 processes, got {n}"
        )));
    }
    let mut items = dataset.to_vec();
    items.sort_by(|a, b| a.id.cmp(&b.id));
    let unique: BTreeSet<&str> = items.iter().map(|p| p.id.as_str()).collect();
    if unique.len() != n {
        return Err(CorpusError::InvalidSplit("duplicate process ids".into()));
    }
    items.shuffle(&mut seed::rng_for(seed, seed::SPLIT));

    let n_dev = portion(n, ratios.dev);
    let n_test = portion(n, ratios.test);
    if n_dev == 0 || n_test == 0 || n_dev + n_test >= n {
        return Err(CorpusError::InvalidSplit(format!(
            "ratios {ratios:?} leave an empty split for {n} processes"
        )));
    }
    let test = items.split_off(n - n_test);
    let dev = items.split_off(n - n_test - n_dev);
    Ok(DatasetSplit {
        train: items,
        dev,
        test,
        seed,
        ratios,
    })
}
