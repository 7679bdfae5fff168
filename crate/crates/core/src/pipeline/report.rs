//! The `report` stage: lexicon tables plus summaries of the comparison stages.

use std::path::Path;

use serde::Serialize;

use super::files::{self, fmt6, r6};
use super::stages::{ClusterSummary, CompareSummary, InduceSummary, Z2Summary};
use super::{Pipeline, Stage};
use crate::analysis::lexicon_report::{top_polar_words, word_profile, word_variance_ranking};
use crate::error::{Error, Result};

#[derive(Debug, Serialize)]
struct Metadata {
    communities: Vec<String>,
    rng_seed: u64,
    window: usize,
    smoothing_c: f64,
    embedding_dims: usize,
    top_words: usize,
    singular_value_exponent: f64,
    beta: f64,
    k: usize,
    runs: usize,
    seed_fraction: f64,
    linkage: String,
    stop_words: String,
    z2_ranks: &'static str,
    z2_normalization: &'static str,
}

#[derive(Debug, Serialize)]
struct VarianceRow {
    word: String,
    variance: f64,
    most_positive: String,
    most_negative: String,
}

#[derive(Debug, Serialize)]
struct WordScore {
    word: String,
    mean: f64,
}

#[derive(Debug, Serialize)]
struct PolarRow {
    community: String,
    positive: Vec<WordScore>,
    negative: Vec<WordScore>,
}

#[derive(Debug, Serialize)]
struct ProfileRow {
    community: String,
    mean: f64,
    std: f64,
}

#[derive(Debug, Serialize)]
struct Profile {
    word: String,
    entries: Vec<ProfileRow>,
    missing: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Report {
    metadata: Metadata,
    seeds: Vec<InduceSummary>,
    compare: CompareSummary,
    clusters: ClusterSummary,
    misalignment: Vec<Z2Summary>,
    word_variance: Vec<VarianceRow>,
    top_polar: Vec<PolarRow>,
    profiles: Vec<Profile>,
    /// Requested profile words found in no lexicon.
    unknown_words: Vec<String>,
}

fn scores(list: Vec<(String, f64)>) -> Vec<WordScore> {
    list.into_iter().map(|(word, m)| WordScore { word, mean: r6(m) }).collect()
}

impl Pipeline {
    pub(super) fn report(&self, dir: &Path) -> Result<()> {
        let rc = &self.cfg.report;
        let lexicons = self.load_lexicons()?;
        let variance = word_variance_ranking(&lexicons)?;

        let mut wanted: Vec<String> = rc.profile_words.clone();
        for v in variance.iter().take(3) {
            if !wanted.contains(&v.word) {
                wanted.push(v.word.clone());
            }
        }
        let mut profiles = Vec::new();
        let mut unknown_words = Vec::new();
        for w in &wanted {
            match word_profile(w, &lexicons) {
                Ok(p) => profiles.push(Profile {
                    word: p.word,
                    entries: p
                        .entries
                        .into_iter()
                        .map(|e| ProfileRow {
                            community: e.community,
                            mean: r6(e.mean),
                            std: r6(e.std),
                        })
                        .collect(),
                    missing: p.missing,
                }),
                Err(Error::WordNotFound(w)) => unknown_words.push(w),
                Err(e) => return Err(e),
            }
        }

        let top_polar = lexicons
            .values()
            .map(|lex| {
                let (pos, neg) = top_polar_words(lex, &self.seeds, rc.top_polar);
                PolarRow {
                    community: lex.community.clone(),
                    positive: scores(pos),
                    negative: scores(neg),
                }
            })
            .collect();

        if !rc.neighbor_words.is_empty() {
            let embs = self.load_embeddings()?;
            let mut rows = Vec::new();
            for (c, e) in &embs {
                for w in &rc.neighbor_words {
                    for (rank, (n, cos)) in e.nearest_neighbors(w, rc.neighbors).into_iter().enumerate() {
                        rows.push(vec![c.clone(), w.clone(), (rank + 1).to_string(), n, fmt6(cos)]);
                    }
                }
            }
            files::write_table_tsv(
                &dir.join("neighbors.tsv"),
                &["community", "word", "rank", "neighbor", "cosine"],
                &rows,
            )?;
        }

        let c = &self.cfg;
        let report = Report {
            metadata: Metadata {
                communities: self.communities()?,
                rng_seed: c.rng_seed,
                window: c.embed.window,
                smoothing_c: c.embed.smoothing_c,
                embedding_dims: c.embed.dims,
                top_words: c.embed.top_words,
                singular_value_exponent: c.embed.eig_exponent,
                beta: c.propagation.beta,
                k: c.propagation.k,
                runs: c.propagation.runs,
                seed_fraction: c.propagation.seed_fraction,
                linkage: format!("{:?}", c.analysis.linkage).to_lowercase(),
                stop_words: c.stop_words_source(),
                z2_ranks: "ascending per row, diagonal excluded, average ties",
                z2_normalization: "columns then rows",
            },
            seeds: files::read_json(&self.cache_dir(Stage::Induce).join("summary.json"))?,
            compare: files::read_json(&self.cache_dir(Stage::Compare).join("compare.json"))?,
            clusters: files::read_json(&self.cache_dir(Stage::Cluster).join("ami.json"))?,
            misalignment: files::read_json(&self.cache_dir(Stage::Misalign).join("misalign.json"))?,
            word_variance: variance
                .iter()
                .take(rc.top_variance)
                .map(|v| VarianceRow {
                    word: v.word.clone(),
                    variance: r6(v.variance),
                    most_positive: v.most_positive.clone(),
                    most_negative: v.most_negative.clone(),
                })
                .collect(),
            top_polar,
            profiles,
            unknown_words,
        };
        files::write_json(&dir.join("report.json"), &report)?;
        files::write_text(&dir.join("report.txt"), &render_text(&report))
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let mut section = |title: &str, rows: Vec<Vec<String>>| {
        out.push_str(title);
        out.push('\n');
        out.push_str(&"-".repeat(title.len()));
        out.push('\n');
        out.push_str(&files::aligned(&rows));
        out.push('\n');
    };
    let s = |x: &str| x.to_string();
    let opt = |x: Option<f64>| x.map_or_else(|| s("n/a"), fmt6);

    let m = &r.metadata;
    section(
        "Run",
        vec![
            vec![s("communities"), m.communities.len().to_string()],
            vec![s("rng_seed"), m.rng_seed.to_string()],
            vec![s("window / c"), format!("{} / {}", m.window, fmt6(m.smoothing_c))],
            vec![s("dims / top words"), format!("{} / {}", m.embedding_dims, m.top_words)],
            vec![s("beta / K / runs"), format!("{} / {} / {}", fmt6(m.beta), m.k, m.runs)],
            vec![s("linkage / clusters"), format!("{} / {}", m.linkage, r.clusters.k)],
        ],
    );

    let mut rows = vec![vec![s("a"), s("b"), s("pairs"), s("spearman"), s("p")]];
    for c in &r.compare.correlations {
        rows.push(vec![c.a.to_string(), c.b.to_string(), c.pairs.to_string(), opt(c.rho), opt(c.p_value)]);
    }
    section("Similarity correlations", rows);

    let mut rows = vec![vec![s("a"), s("b"), s("ami")]];
    for a in &r.clusters.ami {
        rows.push(vec![a.a.to_string(), a.b.to_string(), fmt6(a.ami)]);
    }
    section("Cluster agreement", rows);

    let mut rows = vec![vec![s("kind"), s("rank"), s("most similar"), s(""), s("least similar"), s("")]];
    for e in &r.compare.extremes {
        let n = e.most_similar.len().max(e.least_similar.len());
        for i in 0..n {
            let cell = |list: &Vec<super::stages::PairValue>| {
                list.get(i).map_or((s(""), s("")), |p| (format!("{}-{}", p.first, p.second), fmt6(p.value)))
            };
            let (a, av) = cell(&e.most_similar);
            let (b, bv) = cell(&e.least_similar);
            let kind = if i == 0 { format!("{} (mean {})", e.kind, fmt6(e.mean)) } else { s("") };
            rows.push(vec![kind, (i + 1).to_string(), a, av, b, bv]);
        }
    }
    section("Similarity extremes", rows);

    let mut rows = vec![vec![s("pair"), s("sim_text"), s("sim_user"), s("direction")]];
    for o in &r.compare.outliers {
        rows.push(vec![format!("{}-{}", o.first, o.second), fmt6(o.sim_text), fmt6(o.sim_user), o.direction.clone()]);
    }
    section("Text/user outliers", rows);

    let mut rows = vec![vec![s("a vs b"), s("pair"), s("z2")]];
    for z in &r.misalignment {
        for p in z.top_positive.iter().chain(&z.top_negative) {
            rows.push(vec![format!("{} vs {}", z.a, z.b), format!("{}-{}", p.first, p.second), fmt6(p.value)]);
        }
    }
    section("z2 misalignment", rows);

    let mut rows = vec![vec![s("word"), s("variance"), s("most positive"), s("most negative")]];
    for v in &r.word_variance {
        rows.push(vec![v.word.clone(), fmt6(v.variance), v.most_positive.clone(), v.most_negative.clone()]);
    }
    section("Words with the most varied sentiment", rows);

    let mut rows = vec![vec![s("community"), s("positive"), s(""), s("negative"), s("")]];
    for p in &r.top_polar {
        for i in 0..p.positive.len().max(p.negative.len()) {
            let cell = |l: &Vec<WordScore>| l.get(i).map_or((s(""), s("")), |w| (w.word.clone(), fmt6(w.mean)));
            let (a, av) = cell(&p.positive);
            let (b, bv) = cell(&p.negative);
            rows.push(vec![if i == 0 { p.community.clone() } else { s("") }, a, av, b, bv]);
        }
    }
    section("Most polar non-seed words", rows);

    let mut rows = vec![vec![s("word"), s("community"), s("mean"), s("std")]];
    for p in &r.profiles {
        for (i, e) in p.entries.iter().enumerate() {
            rows.push(vec![
                if i == 0 { p.word.clone() } else { s("") },
                e.community.clone(),
                fmt6(e.mean),
                fmt6(e.std),
            ]);
        }
    }
    section("Word profiles", rows);

    let mut rows = vec![vec![s("community"), s("words"), s("missing seeds")]];
    for sd in &r.seeds {
        let missing: Vec<&str> = sd.missing_positive.iter().chain(&sd.missing_negative).map(String::as_str).collect();
        rows.push(vec![sd.community.clone(), sd.words.to_string(), missing.join(" ")]);
    }
    section("Seed coverage", rows);
    out
}
