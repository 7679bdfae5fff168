//! Stage bodies. Each reads its upstream caches and writes into `dir`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::files::{self, fmt6, r6};
use super::{Pipeline, Stage};
use crate::analysis::ami::adjusted_mutual_information;
use crate::analysis::cluster::agglomerative_cluster;
use crate::analysis::misalign::{misalignment_outliers, z2_misalignment};
use crate::analysis::similarity::{cosine_similarity_matrix, SimilarityMatrix};
use crate::analysis::stats::spearman;
use crate::community_vectors::{
    build_text_matrix, build_user_matrix, reduce_and_normalize, CommunityVector, RepresentationKind, TfIdfMatrix,
};
use crate::embeddings::{build_embeddings, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::ingest::{
    concat_with_dummies, filter_communities, parse_files, read_token_stream, tokenize, user_counts,
    write_token_stream, TokenStream,
};
use crate::sentprop::{assemble_sentiment_vectors, bootstrap_lexicon, sensitivity_sweep, SentimentLexicon};

const KINDS: [RepresentationKind; 3] = [RepresentationKind::Text, RepresentationKind::User, RepresentationKind::Sentiment];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct CommunitySummary {
    pub name: String,
    pub comments: usize,
    pub tokens: usize,
    pub users: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct IngestSummary {
    pub records: usize,
    pub malformed: usize,
    pub communities: Vec<CommunitySummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixSummary {
    kind: RepresentationKind,
    features: usize,
    df_lower: usize,
    df_upper: usize,
    dims: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EmbedSummary {
    community: String,
    words: usize,
    dims: usize,
    missing_seeds: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct InduceSummary {
    pub community: String,
    pub words: usize,
    pub missing_positive: Vec<String>,
    pub missing_negative: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct CorrelationRow {
    pub a: RepresentationKind,
    pub b: RepresentationKind,
    pub pairs: usize,
    /// `None` when either side is constant.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct PairValue {
    pub first: String,
    pub second: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct Extremes {
    pub kind: RepresentationKind,
    pub mean: f64,
    pub most_similar: Vec<PairValue>,
    pub least_similar: Vec<PairValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct OutlierRow {
    pub first: String,
    pub second: String,
    pub sim_text: f64,
    pub sim_user: f64,
    /// `text>user` or `user>text`.
    pub direction: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct CompareSummary {
    pub correlations: Vec<CorrelationRow>,
    pub outliers: Vec<OutlierRow>,
    pub extremes: Vec<Extremes>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct AmiRow {
    pub a: RepresentationKind,
    pub b: RepresentationKind,
    pub ami: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct ClusterSummary {
    pub k: usize,
    pub linkage: crate::analysis::cluster::Linkage,
    pub ami: Vec<AmiRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct Z2Summary {
    pub a: RepresentationKind,
    pub b: RepresentationKind,
    pub degenerate: usize,
    /// Pairs far more similar under `a` than under `b`.
    pub top_positive: Vec<PairValue>,
    pub top_negative: Vec<PairValue>,
}

fn pairs(list: &[(usize, usize, f64)], names: &[String]) -> Vec<PairValue> {
    list.iter()
        .map(|&(i, j, v)| PairValue {
            first: names[i].clone(),
            second: names[j].clone(),
            value: r6(v),
        })
        .collect()
}

impl Pipeline {
    fn stream_paths(dir: &Path, i: usize) -> (std::path::PathBuf, std::path::PathBuf) {
        (dir.join(format!("streams/{i}.tokens")), dir.join(format!("streams/{i}.bounds")))
    }

    pub fn communities(&self) -> Result<Vec<String>> {
        let path = self.cache_dir(Stage::Ingest).join("communities.txt");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(text.lines().map(str::to_string).collect())
    }

    fn load_streams(&self) -> Result<BTreeMap<String, TokenStream>> {
        let dir = self.cache_dir(Stage::Ingest);
        self.communities()?
            .into_par_iter()
            .enumerate()
            .map(|(i, c)| {
                let (t, b) = Self::stream_paths(&dir, i);
                read_token_stream(&c, &t, &b).map(|s| (c, s))
            })
            .collect()
    }

    fn load_users(&self) -> Result<BTreeMap<String, BTreeMap<String, u64>>> {
        let path = self.cache_dir(Stage::Ingest).join("users.tsv");
        let r = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
        let mut out: BTreeMap<String, BTreeMap<String, u64>> =
            self.communities()?.into_iter().map(|c| (c, BTreeMap::new())).collect();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            let parts: Vec<&str> = line.split('\t').collect();
            let bad = || Error::Cache {
                path: path.clone(),
                reason: format!("line {}: expected community, author, count", n + 1),
            };
            let [c, a, k] = parts[..] else { return Err(bad()) };
            let k: u64 = k.parse().map_err(|_| bad())?;
            out.entry(c.to_string()).or_default().insert(a.to_string(), k);
        }
        Ok(out)
    }

    pub fn load_embeddings(&self) -> Result<BTreeMap<String, EmbeddingMatrix>> {
        let dir = self.cache_dir(Stage::Embed);
        self.communities()?
            .into_par_iter()
            .enumerate()
            .map(|(i, c)| {
                let m = dir.join(format!("embeddings/{i}.bin"));
                let v = dir.join(format!("embeddings/{i}.vocab"));
                EmbeddingMatrix::read(&m, &v).map(|e| (c, e))
            })
            .collect()
    }

    pub fn load_lexicons(&self) -> Result<BTreeMap<String, SentimentLexicon>> {
        let dir = self.cache_dir(Stage::Induce);
        self.communities()?
            .into_iter()
            .map(|c| {
                let path = dir.join("lexicons").join(format!("{}.tsv", files::safe_name(&c)));
                SentimentLexicon::read_tsv(&c, &path).map(|l| (c, l))
            })
            .collect()
    }

    fn load_vectors(&self, kind: RepresentationKind) -> Result<Vec<CommunityVector>> {
        if kind == RepresentationKind::Sentiment {
            return Ok(assemble_sentiment_vectors(&self.load_lexicons()?)?.1);
        }
        files::read_vectors_tsv(&self.cache_dir(Stage::Vectors).join(format!("{kind}_vectors.tsv")))
    }

    fn similarity(&self, kind: RepresentationKind) -> Result<SimilarityMatrix> {
        cosine_similarity_matrix(&self.load_vectors(kind)?)
    }

    pub(super) fn ingest(&self, dir: &Path) -> Result<()> {
        let parsed = parse_files(&self.cfg.inputs, &self.cfg.fields)?;
        if parsed.malformed > 0 {
            log::warn!("skipped {} malformed records", parsed.malformed);
        }
        let records = parsed.records.len();
        let selection = self.cfg.selection.clone().resolve()?;
        let groups = filter_communities(parsed.records, &selection);
        if groups.is_empty() {
            return Err(Error::EmptyCorpus("no community passed the selection filters".into()));
        }
        let users = user_counts(&groups);
        let streams: Vec<TokenStream> = groups
            .par_iter()
            .map(|(c, recs)| {
                let comments: Vec<Vec<String>> = recs.iter().map(|r| tokenize(&r.body)).collect();
                concat_with_dummies(c, &comments, self.cfg.tokenizer.n_dummy, self.cfg.embed.window)
            })
            .collect::<Result<_>>()?;

        std::fs::create_dir_all(dir.join("streams")).map_err(|e| Error::io(dir, e))?;
        let names: Vec<&str> = groups.keys().map(String::as_str).collect();
        files::write_text(&dir.join("communities.txt"), &(names.join("\n") + "\n"))?;
        let mut summary = Vec::new();
        for (i, s) in streams.iter().enumerate() {
            let (t, b) = Self::stream_paths(dir, i);
            write_token_stream(s, &t, &b)?;
            summary.push(CommunitySummary {
                name: s.community.clone(),
                comments: s.comment_count(),
                tokens: s.words().count(),
                users: users[&s.community].len(),
            });
        }
        let rows: Vec<Vec<String>> = users
            .iter()
            .flat_map(|(c, us)| us.iter().map(move |(u, k)| vec![c.clone(), u.clone(), k.to_string()]))
            .collect();
        let mut text = String::new();
        for r in rows {
            text.push_str(&r.join("\t"));
            text.push('\n');
        }
        files::write_text(&dir.join("users.tsv"), &text)?;
        files::write_json(
            &dir.join("summary.json"),
            &IngestSummary {
                records,
                malformed: parsed.malformed,
                communities: summary,
            },
        )
    }

    pub(super) fn vectors(&self, dir: &Path) -> Result<()> {
        let streams = self.load_streams()?;
        let users = self.load_users()?;
        let n = streams.len();
        let stop: HashSet<String> = self.stop_words.iter().cloned().collect();
        let text_bounds = self.cfg.tfidf.text_bounds(n);
        let user_bounds = self.cfg.tfidf.user_bounds(n);
        let text = build_text_matrix(&streams, text_bounds, &stop)?;
        let user = build_user_matrix(&users, user_bounds)?;
        let mut summary = Vec::new();
        for (kind, m, b) in [
            (RepresentationKind::Text, &text, text_bounds),
            (RepresentationKind::User, &user, user_bounds),
        ] {
            let dims = self.reduced_dims(m, kind);
            let vecs = reduce_and_normalize(m, kind, dims, &self.svd_options())?;
            files::write_vectors_tsv(&dir.join(format!("{kind}_vectors.tsv")), &vecs)?;
            summary.push(MatrixSummary {
                kind,
                features: m.features.len(),
                df_lower: b.lower,
                df_upper: b.upper,
                dims,
            });
        }
        files::write_json(&dir.join("summary.json"), &summary)
    }

    fn reduced_dims(&self, m: &TfIdfMatrix, kind: RepresentationKind) -> usize {
        let limit = m.weights.rows().min(m.weights.cols());
        let dims = self.cfg.tfidf.dims;
        if dims > limit {
            log::warn!("{kind}: {dims} dims requested but the matrix has rank at most {limit}; using {limit}");
            limit
        } else {
            dims
        }
    }

    pub(super) fn embed(&self, dir: &Path) -> Result<()> {
        let streams = self.load_streams()?;
        let keep = self.seeds.all();
        let opts = self.svd_options();
        let built: Vec<EmbeddingMatrix> = streams
            .par_iter()
            .map(|(_, s)| build_embeddings(s, &self.cfg.embed, &keep, &opts))
            .collect::<Result<_>>()?;
        std::fs::create_dir_all(dir.join("embeddings")).map_err(|e| Error::io(dir, e))?;
        let mut summary = Vec::new();
        for (i, (c, e)) in streams.keys().zip(&built).enumerate() {
            e.write(
                &dir.join(format!("embeddings/{i}.bin")),
                &dir.join(format!("embeddings/{i}.vocab")),
            )?;
            summary.push(EmbedSummary {
                community: c.clone(),
                words: e.len(),
                dims: e.dims,
                missing_seeds: keep.iter().filter(|w| e.vector(w).is_none()).cloned().collect(),
            });
        }
        files::write_json(&dir.join("summary.json"), &summary)
    }

    pub(super) fn induce(&self, dir: &Path) -> Result<()> {
        let embs = self.load_embeddings()?;
        std::fs::create_dir_all(dir.join("lexicons")).map_err(|e| Error::io(dir, e))?;
        let mut summary = Vec::new();
        let mut file_names = HashSet::new();
        for (c, e) in &embs {
            let lex = bootstrap_lexicon(e, &self.seeds, &self.cfg.propagation, c)?;
            let name = format!("{}.tsv", files::safe_name(c));
            if !file_names.insert(name.clone()) {
                return Err(Error::Config(format!("community names collide on lexicon file {name}")));
            }
            lex.write_tsv(&dir.join("lexicons").join(name))?;
            let missing = |ws: &[String]| ws.iter().filter(|w| lex.get(w).is_none()).cloned().collect();
            summary.push(InduceSummary {
                community: c.clone(),
                words: lex.entries.len(),
                missing_positive: missing(&self.seeds.positive),
                missing_negative: missing(&self.seeds.negative),
            });
        }
        files::write_json(&dir.join("summary.json"), &summary)?;

        let sens = &self.cfg.sensitivity;
        if let (Some(c), false) = (&sens.community, sens.grid.is_empty()) {
            let e = embs
                .get(c)
                .ok_or_else(|| Error::Config(format!("sensitivity.community `{c}` is not in the corpus")))?;
            let rows = sensitivity_sweep(e, &self.seeds, &self.cfg.propagation, &sens.grid, c)?;
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![fmt6(r.beta), r.k.to_string(), fmt6(r.pearson)])
                .collect();
            files::write_table_tsv(&dir.join("sensitivity.tsv"), &["beta", "k", "pearson"], &cells)?;
        }
        Ok(())
    }

    pub(super) fn compare(&self, dir: &Path) -> Result<()> {
        let sims: Vec<SimilarityMatrix> = KINDS.iter().map(|&k| self.similarity(k)).collect::<Result<_>>()?;
        for s in &sims {
            files::write_similarity_tsv(&dir.join(format!("similarity_{}.tsv", s.kind)), s)?;
        }
        let mut correlations = Vec::new();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let xs: Vec<f64> = sims[a].upper_triangle().iter().map(|t| t.2).collect();
            let ys: Vec<f64> = sims[b].upper_triangle().iter().map(|t| t.2).collect();
            let (rho, p_value) = match spearman(&xs, &ys) {
                Ok(c) => (Some(r6(c.rho)), Some(r6(c.p_value))),
                Err(e) => {
                    log::warn!("spearman {} vs {}: {e}", sims[a].kind, sims[b].kind);
                    (None, None)
                }
            };
            correlations.push(CorrelationRow {
                a: sims[a].kind,
                b: sims[b].kind,
                pairs: xs.len(),
                rho,
                p_value,
            });
        }

        let (text, user) = (&sims[0], &sims[1]);
        let a = &self.cfg.analysis;
        let flagged = misalignment_outliers(text, user, a.outlier_low, a.outlier_high)?;
        let outliers: Vec<OutlierRow> = flagged
            .iter()
            .map(|o| OutlierRow {
                first: o.first.clone(),
                second: o.second.clone(),
                sim_text: r6(o.sim_a),
                sim_user: r6(o.sim_b),
                direction: if o.high_in_a { "text>user" } else { "user>text" }.to_string(),
            })
            .collect();
        let is_flagged: HashSet<(&str, &str)> =
            flagged.iter().map(|o| (o.first.as_str(), o.second.as_str())).collect();
        let scatter: Vec<Vec<String>> = text
            .upper_triangle()
            .into_iter()
            .map(|(i, j, s)| {
                let (x, y) = (&text.communities[i], &text.communities[j]);
                vec![
                    format!("{x}|{y}"),
                    fmt6(s),
                    fmt6(user.values[i][j]),
                    is_flagged.contains(&(x.as_str(), y.as_str())).to_string(),
                ]
            })
            .collect();
        files::write_table_tsv(&dir.join("scatter.tsv"), &["pair", "sim_text", "sim_user", "flagged"], &scatter)?;

        let extremes = sims
            .iter()
            .map(|s| {
                let mut upper = s.upper_triangle();
                let mean = upper.iter().map(|t| t.2).sum::<f64>() / upper.len().max(1) as f64;
                upper.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
                let top: Vec<_> = upper.iter().take(a.top_pairs).copied().collect();
                upper.sort_by(|x, y| x.2.total_cmp(&y.2).then((x.0, x.1).cmp(&(y.0, y.1))));
                let bottom: Vec<_> = upper.iter().take(a.top_pairs).copied().collect();
                Extremes {
                    kind: s.kind,
                    mean: r6(mean),
                    most_similar: pairs(&top, &s.communities),
                    least_similar: pairs(&bottom, &s.communities),
                }
            })
            .collect();
        files::write_json(
            &dir.join("compare.json"),
            &CompareSummary {
                correlations,
                outliers,
                extremes,
            },
        )
    }

    pub(super) fn cluster(&self, dir: &Path) -> Result<()> {
        let vectors: Vec<Vec<CommunityVector>> = KINDS.iter().map(|&k| self.load_vectors(k)).collect::<Result<_>>()?;
        let n = vectors[0].len();
        let mut k = self.cfg.analysis.clusters;
        if k > n {
            log::warn!("{k} clusters requested for {n} communities; using {n}");
            k = n;
        }
        let linkage = self.cfg.analysis.linkage;
        let assignments = vectors
            .iter()
            .map(|v| agglomerative_cluster(v, k, linkage))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<String>> = assignments[0]
            .communities
            .iter()
            .map(|c| {
                std::iter::once(c.clone())
                    .chain(assignments.iter().map(|a| a.label_of(c).expect("same communities").to_string()))
                    .collect()
            })
            .collect();
        files::write_table_tsv(&dir.join("clusters.tsv"), &["community", "text", "user", "sentiment"], &rows)?;
        let ami = [(0, 1), (0, 2), (1, 2)]
            .into_iter()
            .map(|(a, b)| {
                Ok(AmiRow {
                    a: KINDS[a],
                    b: KINDS[b],
                    ami: r6(adjusted_mutual_information(&assignments[a], &assignments[b])?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        files::write_json(&dir.join("ami.json"), &ClusterSummary { k, linkage, ami })
    }

    pub(super) fn misalign(&self, dir: &Path) -> Result<()> {
        let sims: Vec<SimilarityMatrix> = KINDS.iter().map(|&k| self.similarity(k)).collect::<Result<_>>()?;
        let top = self.cfg.analysis.top_pairs;
        let mut out = Vec::new();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let m = z2_misalignment(&sims[a], &sims[b])?;
            if m.degenerate > 0 {
                log::warn!("z2 {} vs {}: {} zero-variance lines set to 0", KINDS[a], KINDS[b], m.degenerate);
            }
            files::write_matrix_tsv(&dir.join(format!("z2_{}_{}.tsv", KINDS[a], KINDS[b])), &m.communities, &m.z2)?;
            let ranked = m.ranked();
            let positive: Vec<_> = ranked.iter().filter(|t| t.2 > 0.0).take(top).copied().collect();
            let negative: Vec<_> = ranked.iter().rev().filter(|t| t.2 < 0.0).take(top).copied().collect();
            out.push(Z2Summary {
                a: KINDS[a],
                b: KINDS[b],
                degenerate: m.degenerate,
                top_positive: pairs(&positive, &m.communities),
                top_negative: pairs(&negative, &m.communities),
            });
        }
        files::write_json(&dir.join("misalign.json"), &out)
    }
}
