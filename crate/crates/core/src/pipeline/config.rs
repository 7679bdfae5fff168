//! The pipeline configuration file (TOML) and its validation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::cluster::Linkage;
use crate::community_vectors::DfBounds;
use crate::embeddings::EmbedParams;
use crate::error::{Error, Result};
use crate::ingest::{CommunitySelection, FieldNames, DEFAULT_STOP_WORDS};
use crate::sentprop::{PropParams, SeedSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerConfig {
    /// Separator tokens inserted between comments; must cover the window.
    pub n_dummy: usize,
    /// Replaces the built-in stop-word list when set.
    pub stop_words: Option<Vec<String>>,
    /// One stop word per line; takes precedence over `stop_words`.
    pub stop_words_file: Option<PathBuf>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            n_dummy: 5,
            stop_words: None,
            stop_words_file: None,
        }
    }
}

/// Document-frequency filters as `[lower, upper]`, keeping `lower < df <= upper`.
/// Unset bounds scale the 400-community defaults to the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfIdfConfig {
    pub dims: usize,
    pub text_df: Option<(usize, usize)>,
    pub user_df: Option<(usize, usize)>,
}

impl Default for TfIdfConfig {
    fn default() -> Self {
        Self {
            dims: 100,
            text_df: None,
            user_df: None,
        }
    }
}

impl TfIdfConfig {
    pub fn text_bounds(&self, n: usize) -> DfBounds {
        self.text_df
            .map_or_else(|| DfBounds::text_default(n), |(lower, upper)| DfBounds { lower, upper })
    }

    pub fn user_bounds(&self, n: usize) -> DfBounds {
        self.user_df
            .map_or_else(|| DfBounds::user_default(n), |(lower, upper)| DfBounds { lower, upper })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub clusters: usize,
    pub linkage: Linkage,
    pub outlier_low: f64,
    pub outlier_high: f64,
    /// Most and least similar pairs listed per representation.
    pub top_pairs: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            clusters: 20,
            linkage: Linkage::Average,
            outlier_low: 0.2,
            outlier_high: 0.8,
            top_pairs: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub top_polar: usize,
    pub top_variance: usize,
    /// Words whose per-community profile is always reported.
    pub profile_words: Vec<String>,
    /// Words whose embedding neighbors are exported per community.
    pub neighbor_words: Vec<String>,
    pub neighbors: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            top_polar: 10,
            top_variance: 20,
            profile_words: Vec::new(),
            neighbor_words: Vec::new(),
            neighbors: 10,
        }
    }
}

/// Optional (beta, K) robustness sweep for one community during `induce`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub community: Option<String>,
    pub grid: Vec<(f64, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub rng_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Seed-word file; the built-in lists are used when unset.
    pub seeds: Option<PathBuf>,
    pub fields: FieldNames,
    pub selection: CommunitySelection,
    pub tokenizer: TokenizerConfig,
    pub tfidf: TfIdfConfig,
    pub embed: EmbedParams,
    pub propagation: PropParams,
    pub sensitivity: SensitivityConfig,
    pub analysis: AnalysisConfig,
    pub report: ReportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            output_dir: PathBuf::from("commrep-out"),
            rng_seed: 0,
            workers: 0,
            seeds: None,
            fields: FieldNames::default(),
            selection: CommunitySelection::default(),
            tokenizer: TokenizerConfig::default(),
            tfidf: TfIdfConfig::default(),
            embed: EmbedParams::default(),
            propagation: PropParams::default(),
            sensitivity: SensitivityConfig::default(),
            analysis: AnalysisConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub rng_seed: Option<u64>,
    pub window: Option<usize>,
    pub beta: Option<f64>,
    pub knn: Option<usize>,
    pub runs: Option<usize>,
    /// Applies to both community vectors and word embeddings.
    pub dims: Option<usize>,
    pub top_words: Option<usize>,
    pub clusters: Option<usize>,
}

impl PipelineConfig {
    /// Parses TOML text, applies overrides, resolves relative paths against
    /// `base_dir` and checks every bound. All violations are reported at once.
    pub fn resolve(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Validation(vec![e.to_string()]))?;
        cfg.apply(overrides);
        cfg.absolutize(base_dir);
        cfg.propagation.rng_seed = cfg.rng_seed;
        let errs = cfg.check();
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(errs))
        }
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.rng_seed {
            self.rng_seed = v;
        }
        if let Some(v) = o.window {
            self.embed.window = v;
        }
        if let Some(v) = o.beta {
            self.propagation.beta = v;
        }
        if let Some(v) = o.knn {
            self.propagation.k = v;
        }
        if let Some(v) = o.runs {
            self.propagation.runs = v;
        }
        if let Some(v) = o.dims {
            self.tfidf.dims = v;
            self.embed.dims = v;
        }
        if let Some(v) = o.top_words {
            self.embed.top_words = v;
        }
        if let Some(v) = o.clusters {
            self.analysis.clusters = v;
        }
    }

    fn absolutize(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.inputs.iter_mut().for_each(fix);
        fix(&mut self.output_dir);
        if let Some(p) = self.seeds.as_mut() {
            fix(p);
        }
        if let Some(p) = self.tokenizer.stop_words_file.as_mut() {
            fix(p);
        }
    }

    fn check(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.inputs.is_empty() {
            errs.push("inputs: at least one input path is required".to_string());
        }
        for (i, p) in self.inputs.iter().enumerate() {
            if !p.is_file() {
                errs.push(format!("inputs[{i}]: {} does not exist", p.display()));
            }
        }
        if let Some(p) = &self.seeds {
            if !p.is_file() {
                errs.push(format!("seeds: {} does not exist", p.display()));
            } else if let Err(e) = SeedSet::load(p) {
                errs.push(format!("seeds: {e}"));
            }
        }
        if let Some(p) = &self.tokenizer.stop_words_file {
            if !p.is_file() {
                errs.push(format!("tokenizer.stop_words_file: {} does not exist", p.display()));
            }
        }
        if self.selection.top_n == 0 {
            errs.push("selection.top_n: must be at least 1".to_string());
        }
        if self.selection.min_subscribers.is_some() && self.selection.subscribers.is_empty() {
            errs.push("selection.subscribers: required when selection.min_subscribers is set".to_string());
        }
        if let Some((lo, hi)) = self.selection.date_range {
            if lo > hi {
                errs.push(format!("selection.date_range: start {lo} is after end {hi}"));
            }
        }
        if self.tokenizer.n_dummy < self.embed.window {
            errs.push(format!(
                "tokenizer.n_dummy: {} is smaller than embed.window {}",
                self.tokenizer.n_dummy, self.embed.window
            ));
        }
        if self.tfidf.dims == 0 {
            errs.push("tfidf.dims: must be at least 1".to_string());
        }
        for (key, bounds) in [("tfidf.text_df", self.tfidf.text_df), ("tfidf.user_df", self.tfidf.user_df)] {
            if let Some((lo, hi)) = bounds {
                if lo >= hi {
                    errs.push(format!("{key}: lower {lo} must be below upper {hi}"));
                }
            }
        }
        errs.extend(self.embed.validate().into_iter().map(|e| format!("embed.{e}")));
        errs.extend(self.propagation.validate().into_iter().map(|e| format!("propagation.{e}")));
        for (i, &(beta, k)) in self.sensitivity.grid.iter().enumerate() {
            if !(0.0..1.0).contains(&beta) {
                errs.push(format!("sensitivity.grid[{i}]: beta {beta} not in [0, 1)"));
            }
            if k == 0 {
                errs.push(format!("sensitivity.grid[{i}]: K must be at least 1"));
            }
        }
        if !self.sensitivity.grid.is_empty() && self.sensitivity.community.is_none() {
            errs.push("sensitivity.community: required when sensitivity.grid is set".to_string());
        }
        let a = &self.analysis;
        if a.clusters == 0 {
            errs.push("analysis.clusters: must be at least 1".to_string());
        }
        if !(-1.0..=1.0).contains(&a.outlier_low) || !(-1.0..=1.0).contains(&a.outlier_high) {
            errs.push("analysis.outlier_low/outlier_high: must lie in [-1, 1]".to_string());
        } else if a.outlier_low > a.outlier_high {
            errs.push(format!(
                "analysis.outlier_low: {} exceeds outlier_high {}",
                a.outlier_low, a.outlier_high
            ));
        }
        if self.report.neighbors == 0 && !self.report.neighbor_words.is_empty() {
            errs.push("report.neighbors: must be at least 1".to_string());
        }
        errs
    }

    pub fn seed_set(&self) -> Result<SeedSet> {
        match &self.seeds {
            Some(p) => SeedSet::load(p),
            None => Ok(SeedSet::default()),
        }
    }

    pub fn stop_words(&self) -> Result<BTreeSet<String>> {
        if let Some(p) = &self.tokenizer.stop_words_file {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            return Ok(text
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect());
        }
        Ok(match &self.tokenizer.stop_words {
            Some(list) => list.iter().map(|w| w.to_lowercase()).collect(),
            None => DEFAULT_STOP_WORDS.iter().map(|w| w.to_string()).collect(),
        })
    }

    /// Where the stop-word list came from, for run metadata.
    pub fn stop_words_source(&self) -> String {
        match (&self.tokenizer.stop_words_file, &self.tokenizer.stop_words) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(_)) => "config".to_string(),
            (None, None) => "builtin".to_string(),
        }
    }
}

/// Reads and validates a config file. Relative paths inside it are taken
/// relative to the file's directory.
pub fn validate_config(path: &Path, overrides: &Overrides) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    PipelineConfig::resolve(&text, &base, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str, base: &Path) -> Vec<String> {
        match PipelineConfig::resolve(text, base, &Overrides::default()) {
            Err(Error::Validation(e)) => e,
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_only_lacks_inputs() {
        let errs = errors("", Path::new("/nonexistent"));
        assert_eq!(errs, vec!["inputs: at least one input path is required".to_string()]);
        let d = PipelineConfig::default();
        assert_eq!(d.embed.window, 4);
        assert_eq!(d.embed.smoothing_c, 0.75);
        assert_eq!(d.embed.dims, 100);
        assert_eq!(d.tfidf.dims, 100);
        assert_eq!(d.propagation.beta, 0.9);
        assert_eq!(d.propagation.k, 25);
        assert_eq!(d.propagation.runs, 50);
        assert_eq!(d.embed.top_words, 5000);
        assert_eq!(d.analysis.clusters, 20);
    }

    #[test]
    fn bound_violation_names_key() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.jsonl"), "").unwrap();
        let errs = errors("inputs = [\"c.jsonl\"]\n[propagation]\nbeta = 1.5\n", dir.path());
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("beta"), "{errs:?}");
    }

    #[test]
    fn defaults_fill_omitted_keys() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.jsonl"), "").unwrap();
        let cfg = PipelineConfig::resolve(
            "inputs = [\"c.jsonl\"]\nrng_seed = 7\n[propagation]\nruns = 5\n",
            dir.path(),
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.propagation.k, 25);
        assert_eq!(cfg.propagation.runs, 5);
        assert_eq!(cfg.propagation.rng_seed, 7);
        assert_eq!(cfg.inputs[0], dir.path().join("c.jsonl"));
    }

    #[test]
    fn overrides_and_multiple_errors() {
        let dir = tempfile::tempdir().unwrap();
        let o = Overrides {
            window: Some(9),
            knn: Some(0),
            ..Default::default()
        };
        let err = PipelineConfig::resolve("inputs = [\"missing.jsonl\"]", dir.path(), &o).unwrap_err();
        let Error::Validation(errs) = err else { panic!() };
        let joined = errs.join("\n");
        assert!(joined.contains("inputs[0]"));
        assert!(joined.contains("tokenizer.n_dummy"));
        assert!(joined.contains("propagation.k"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let errs = errors("[embed]\nwindw = 3\n", Path::new("."));
        assert!(errs[0].contains("windw"), "{errs:?}");
    }
}
