//! Cacheable pipeline stages driven by a [`PipelineConfig`].
//!
//! Each stage writes into `<output_dir>/cache/<stage>/<key>/`, where the key
//! hashes the configuration the stage reads plus the keys of its upstream
//! stages. A directory is only renamed into place once complete, so a
//! present cache directory is always whole. Completed outputs are then
//! copied to `<output_dir>/<stage>/` and recorded in `manifest.json`.

pub mod config;
pub mod files;
pub mod manifest;
mod report;
mod stages;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::SvdOptions;
use crate::sentprop::SeedSet;

pub use config::{validate_config, Overrides, PipelineConfig};
pub use manifest::{RunManifest, StageRecord, TOOL_VERSION};

const DIGESTS_FILE: &str = "_digests.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Vectors,
    Embed,
    Induce,
    Compare,
    Cluster,
    Misalign,
    Report,
}

impl Stage {
    /// Execution order of a full run.
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Vectors,
        Stage::Embed,
        Stage::Induce,
        Stage::Compare,
        Stage::Cluster,
        Stage::Misalign,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Vectors => "vectors",
            Stage::Embed => "embed",
            Stage::Induce => "induce",
            Stage::Compare => "compare",
            Stage::Cluster => "cluster",
            Stage::Misalign => "misalign",
            Stage::Report => "report",
        }
    }

    /// Stages whose caches must exist first, in the order they are checked.
    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Vectors | Stage::Embed => &[Stage::Ingest],
            Stage::Induce => &[Stage::Embed],
            Stage::Compare | Stage::Cluster | Stage::Misalign => &[Stage::Vectors, Stage::Induce],
            Stage::Report => &[Stage::Induce, Stage::Compare, Stage::Cluster, Stage::Misalign],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub key: String,
    pub cache_hit: bool,
    /// Directory holding the stage's published outputs.
    pub output_dir: PathBuf,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    seeds: SeedSet,
    stop_words: BTreeSet<String>,
    input_digests: Vec<String>,
    keys: BTreeMap<Stage, String>,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        let seeds = cfg.seed_set()?;
        let stop_words = cfg.stop_words()?;
        let input_digests = cfg
            .inputs
            .iter()
            .map(|p| manifest::file_digest(p))
            .collect::<Result<Vec<_>>>()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let mut p = Self {
            cfg,
            seeds,
            stop_words,
            input_digests,
            keys: BTreeMap::new(),
            pool,
        };
        for stage in Stage::ALL {
            let upstream: Vec<&String> = stage.prerequisites().iter().map(|s| &p.keys[s]).collect();
            let key = manifest::value_digest(&json!({
                "stage": stage.name(),
                "version": TOOL_VERSION,
                "params": p.stage_params(stage),
                "upstream": upstream,
            }));
            p.keys.insert(stage, key[..16].to_string());
        }
        Ok(p)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn output_dir(&self) -> &Path {
        &self.cfg.output_dir
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.cfg.output_dir.join("manifest.json")
    }

    pub fn key(&self, stage: Stage) -> &str {
        &self.keys[&stage]
    }

    /// Hash of every setting that can change results.
    pub fn config_hash(&self) -> String {
        let mut c = self.cfg.clone();
        c.output_dir = PathBuf::new();
        c.workers = 0;
        c.inputs = Vec::new();
        manifest::value_digest(&json!({ "config": c, "inputs": self.input_digests }))
    }

    // Exactly the settings each stage reads.
    fn stage_params(&self, stage: Stage) -> serde_json::Value {
        let c = &self.cfg;
        match stage {
            Stage::Ingest => json!({
                "inputs": self.input_digests,
                "fields": c.fields,
                "selection": c.selection,
                "n_dummy": c.tokenizer.n_dummy,
            }),
            Stage::Vectors => json!({
                "tfidf": c.tfidf,
                "stop_words": self.stop_words,
                "rng_seed": c.rng_seed,
            }),
            Stage::Embed => json!({
                "embed": c.embed,
                "keep": self.seeds.all(),
                "rng_seed": c.rng_seed,
            }),
            Stage::Induce => json!({
                "propagation": c.propagation,
                "seeds": self.seeds,
                "sensitivity": c.sensitivity,
                "rng_seed": c.rng_seed,
            }),
            Stage::Compare => json!({
                "low": c.analysis.outlier_low,
                "high": c.analysis.outlier_high,
                "top_pairs": c.analysis.top_pairs,
            }),
            Stage::Cluster => json!({
                "clusters": c.analysis.clusters,
                "linkage": c.analysis.linkage,
            }),
            Stage::Misalign => json!({ "top_pairs": c.analysis.top_pairs }),
            Stage::Report => json!({
                "report": c.report,
                "seeds": self.seeds,
                "stop_words_source": c.stop_words_source(),
            }),
        }
    }

    pub fn cache_dir(&self, stage: Stage) -> PathBuf {
        self.cfg.output_dir.join("cache").join(stage.name()).join(self.key(stage))
    }

    pub fn is_cached(&self, stage: Stage) -> bool {
        self.cache_dir(stage).join(DIGESTS_FILE).is_file()
    }

    fn svd_options(&self) -> SvdOptions {
        SvdOptions {
            seed: self.cfg.rng_seed,
            ..SvdOptions::default()
        }
    }

    /// Runs one stage, or reuses its cache when the key matches.
    pub fn run_stage(&self, stage: Stage) -> Result<StageOutcome> {
        for &pre in stage.prerequisites() {
            if !self.is_cached(pre) {
                return Err(Error::MissingPrerequisite {
                    stage: stage.name().to_string(),
                    missing: pre.name().to_string(),
                });
            }
        }
        let started_at = manifest::unix_now();
        let dir = self.cache_dir(stage);
        let cache_hit = self.is_cached(stage);
        if cache_hit {
            log::info!("{stage}: cache hit ({})", self.key(stage));
        } else {
            log::info!("{stage}: running ({})", self.key(stage));
            let partial = dir.with_extension("partial");
            if partial.exists() {
                std::fs::remove_dir_all(&partial).map_err(|e| Error::io(&partial, e))?;
            }
            std::fs::create_dir_all(&partial).map_err(|e| Error::io(&partial, e))?;
            self.pool.install(|| self.execute(stage, &partial))?;
            let mut digests = BTreeMap::new();
            for rel in files::list_files(&partial)? {
                digests.insert(rel.to_string_lossy().into_owned(), manifest::file_digest(&partial.join(&rel))?);
            }
            files::write_json(&partial.join(DIGESTS_FILE), &digests)?;
            if dir.exists() {
                std::fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            }
            std::fs::rename(&partial, &dir).map_err(|e| Error::io(&dir, e))?;
        }
        let outputs: BTreeMap<String, String> = files::read_json(&dir.join(DIGESTS_FILE))?;
        let output_dir = self.publish(stage, &dir, &outputs)?;

        let mut inputs = BTreeMap::new();
        if stage == Stage::Ingest {
            for (p, d) in self.cfg.inputs.iter().zip(&self.input_digests) {
                inputs.insert(p.display().to_string(), d.clone());
            }
        }
        for &pre in stage.prerequisites() {
            let theirs: BTreeMap<String, String> = files::read_json(&self.cache_dir(pre).join(DIGESTS_FILE))?;
            inputs.insert(pre.name().to_string(), manifest::value_digest(&theirs));
        }
        let path = self.manifest_path();
        let mut m = RunManifest::load_or_new(&path, &self.config_hash());
        m.stages.insert(
            stage.name().to_string(),
            StageRecord {
                key: self.key(stage).to_string(),
                started_at,
                finished_at: manifest::unix_now(),
                cache_hit,
                inputs,
                outputs,
            },
        );
        m.save(&path)?;
        Ok(StageOutcome {
            stage,
            key: self.key(stage).to_string(),
            cache_hit,
            output_dir,
        })
    }

    /// Every stage in order.
    pub fn run_all(&self) -> Result<Vec<StageOutcome>> {
        Stage::ALL.iter().map(|&s| self.run_stage(s)).collect()
    }

    fn execute(&self, stage: Stage, dir: &Path) -> Result<()> {
        match stage {
            Stage::Ingest => self.ingest(dir),
            Stage::Vectors => self.vectors(dir),
            Stage::Embed => self.embed(dir),
            Stage::Induce => self.induce(dir),
            Stage::Compare => self.compare(dir),
            Stage::Cluster => self.cluster(dir),
            Stage::Misalign => self.misalign(dir),
            Stage::Report => self.report(dir),
        }
    }

    // Token streams and embedding matrices stay in the cache; everything
    // else is copied out.
    fn publish(&self, stage: Stage, cache: &Path, outputs: &BTreeMap<String, String>) -> Result<PathBuf> {
        let dest = self.cfg.output_dir.join(stage.name());
        if dest.exists() {
            std::fs::remove_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
        }
        for rel in outputs.keys() {
            let internal = rel.starts_with("streams") || rel.starts_with("embeddings") || rel == "users.tsv";
            if internal {
                continue;
            }
            let to = dest.join(rel);
            if let Some(parent) = to.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::copy(cache.join(rel), &to).map_err(|e| Error::io(&to, e))?;
        }
        Ok(dest)
    }
}
