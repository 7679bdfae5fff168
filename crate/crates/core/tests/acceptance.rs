//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use commrep::analysis::ami::ami_from_labels;
use commrep::analysis::lexicon_report::word_variance_ranking;
use commrep::analysis::misalign::z2_misalignment;
use commrep::analysis::similarity::SimilarityMatrix;
use commrep::community_vectors::{build_tfidf, reduce_and_normalize, tfidf_weight, DfBounds, RepresentationKind};
use commrep::embeddings::{count_cooccurrences, ppmi, EmbeddingMatrix};
use commrep::ingest::{concat_with_dummies, DUMMY_TOKEN};
use commrep::linalg::{norm, SvdOptions};
use commrep::pipeline::files::list_files;
use commrep::pipeline::{Overrides, Pipeline, PipelineConfig};
use commrep::sentprop::{
    bootstrap_lexicon, bootstrap_runs, build_knn_graph, random_walk, sensitivity_sweep, PropParams,
    PropagationGraph, SeedSet,
};
use commrep::synthetic::{self, SyntheticConfig, OPPOSITE_USAGE, PLANTED_NEGATIVE, PLANTED_POSITIVE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Ctx {
    _tmp: tempfile::TempDir,
    corpus: std::path::PathBuf,
    first_run: Pipeline,
    elapsed: Duration,
    embeddings: BTreeMap<String, EmbeddingMatrix>,
}

fn pipeline_for(corpus: &Path, out: &Path, workers: usize) -> Pipeline {
    let text = format!(
        "inputs = [{:?}]\noutput_dir = {:?}\nworkers = {workers}\n[report]\nprofile_words = [\"{OPPOSITE_USAGE}\"]\n",
        corpus.display().to_string(),
        out.display().to_string(),
    );
    let cfg = PipelineConfig::resolve(&text, out, &Overrides::default()).expect("valid config");
    Pipeline::new(cfg).expect("pipeline")
}

fn setup() -> Ctx {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("synthetic.jsonl");
    synthetic::write_jsonl(&synthetic::generate(&SyntheticConfig::default()), &corpus).unwrap();
    let first_run = pipeline_for(&corpus, &tmp.path().join("run1"), 1);
    let start = Instant::now();
    first_run.run_all().expect("full pipeline run");
    let elapsed = start.elapsed();
    let embeddings = first_run.load_embeddings().unwrap();
    Ctx {
        _tmp: tmp,
        corpus,
        first_run,
        elapsed,
        embeddings,
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// Dense brute force: every ordered position pair within the window, then
// PPMI with a smoothed context marginal.
fn dense_ppmi(tokens: &[String], window: usize, c: f64) -> HashMap<(String, String), f64> {
    let mut counts: BTreeMap<(String, String), f64> = BTreeMap::new();
    for i in 0..tokens.len() {
        for j in 0..tokens.len() {
            if i == j || i.abs_diff(j) > window || tokens[i] == DUMMY_TOKEN || tokens[j] == DUMMY_TOKEN {
                continue;
            }
            *counts.entry((tokens[i].clone(), tokens[j].clone())).or_default() += 1.0;
        }
    }
    let total: f64 = counts.values().sum();
    let mut row: HashMap<&str, f64> = HashMap::new();
    let mut col: HashMap<&str, f64> = HashMap::new();
    for ((w, x), n) in &counts {
        *row.entry(w).or_default() += n;
        *col.entry(x).or_default() += n;
    }
    let smoothed_total: f64 = col.values().map(|v| v.powf(c)).sum();
    counts
        .iter()
        .map(|((w, x), n)| {
            let pmi = ((n / total) / ((row[w.as_str()] / total) * (col[x.as_str()].powf(c) / smoothed_total))).ln();
            ((w.clone(), x.clone()), pmi.max(0.0))
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = rng.random_range(2..=30);
        let window = rng.random_range(1..=5);
        let budget = rng.random_range(50..=1000);
        let mut comments = Vec::new();
        let mut used = 0;
        while used < budget {
            let len = rng.random_range(1..=40).min(budget - used);
            comments.push((0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect::<Vec<_>>());
            used += len;
        }
        let stream = concat_with_dummies("toy", &comments, window, window).map_err(|e| e.to_string())?;
        let counts = count_cooccurrences(&stream, window, 1);
        let sparse = ppmi(&counts, 0.75).map_err(|e| e.to_string())?;
        let oracle = dense_ppmi(&stream.tokens, window, 0.75);
        for (i, w) in counts.vocab.iter().enumerate() {
            for (j, x) in counts.vocab.iter().enumerate() {
                let want = oracle.get(&(w.clone(), x.clone())).copied().unwrap_or(0.0);
                worst = worst.max((sparse.get(i, j) - want).abs());
            }
        }
        let oracle_words: BTreeSet<&String> = oracle.keys().map(|k| &k.0).collect();
        check(
            oracle_words == counts.vocab.iter().collect(),
            format!("corpus {seed}: vocabulary differs from brute force"),
        )?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-10, format!("max |diff| {worst:e} > 1e-10"))?;
    check(secs < 1.0, format!("took {secs:.3} s"))?;
    Ok(format!("20 corpora, max |diff| {worst:.1e}, {secs:.3} s"))
}

// L1 norm of beta*T*p + (1-beta)*s - p with T rebuilt from the adjacency.
fn residual(g: &PropagationGraph, p: &[f64], seeds: &[usize], beta: f64) -> f64 {
    let deg: Vec<f64> = g.adj.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    let uniq: BTreeSet<usize> = seeds.iter().copied().collect();
    (0..g.len())
        .map(|i| {
            let spread: f64 = if deg[i] == 0.0 {
                p[i]
            } else {
                g.adj[i].iter().map(|&(j, w)| w / (deg[i] * deg[j]).sqrt() * p[j]).sum()
            };
            let s = if uniq.contains(&i) { 1.0 / uniq.len() as f64 } else { 0.0 };
            (beta * spread + (1.0 - beta) * s - p[i]).abs()
        })
        .sum()
}

fn criterion_2(ctx: &Ctx) -> Outcome {
    let mut worst = 0f64;
    let mut walks = 0;
    let mut graphs: Vec<PropagationGraph> = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let words: Vec<String> = (0..60).map(|i| format!("v{i}")).collect();
        let data: Vec<f64> = (0..60 * 10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let emb = EmbeddingMatrix::new(words, 10, data).unwrap();
        graphs.push(build_knn_graph(&emb, 5).unwrap());
    }
    for emb in ctx.embeddings.values() {
        graphs.push(build_knn_graph(emb, 25).unwrap());
    }
    for (gi, g) in graphs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(gi as u64);
        for beta in [0.5, 0.9, 0.99] {
            let seeds: Vec<usize> = (0..4).map(|_| rng.random_range(0..g.len())).collect();
            let p = random_walk(g, &seeds, beta, 1e-6, 100_000).map_err(|e| e.to_string())?;
            worst = worst.max(residual(g, &p, &seeds, beta));
            walks += 1;

            let p0 = random_walk(g, &seeds, 0.0, 1e-6, 10).map_err(|e| e.to_string())?;
            let uniq: BTreeSet<usize> = seeds.iter().copied().collect();
            for (i, &v) in p0.iter().enumerate() {
                let s = if uniq.contains(&i) { 1.0 / uniq.len() as f64 } else { 0.0 };
                check(v == s, format!("beta = 0 changed node {i}: {v} != {s}"))?;
            }
        }
    }
    check(worst < 1e-6, format!("residual {worst:e} >= 1e-6"))?;

    let two = PropagationGraph::from_edges(vec!["a".into(), "b".into()], &[(0, 1, 1.0)]);
    let p = random_walk(&two, &[0], 0.5, 1e-13, 10_000).map_err(|e| e.to_string())?;
    let err = (p[0] - 2.0 / 3.0).abs().max((p[1] - 1.0 / 3.0).abs());
    check(err <= 1e-9, format!("2-node case gave ({}, {})", p[0], p[1]))?;
    Ok(format!("{walks} walks, max residual {worst:.3e}; beta=0 exact; 2-node error {err:.1e}"))
}

fn criterion_3(ctx: &Ctx) -> Outcome {
    let seeds = SeedSet::default();
    let swapped = seeds.swapped();
    let params = PropParams::default();
    let mut compared = 0usize;
    for (c, emb) in &ctx.embeddings {
        let g = build_knn_graph(emb, params.k).unwrap();
        let a = bootstrap_runs(&g, &seeds, &params, c).map_err(|e| e.to_string())?;
        let b = bootstrap_runs(&g, &swapped, &params, c).map_err(|e| e.to_string())?;
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.standardized.iter().zip(&rb.standardized) {
                check((-x).to_bits() == y.to_bits() || (*x == 0.0 && *y == 0.0), format!("{c}: {x} vs {y}"))?;
                compared += 1;
            }
        }
        let la = bootstrap_lexicon(emb, &seeds, &params, c).map_err(|e| e.to_string())?;
        let lb = bootstrap_lexicon(emb, &swapped, &params, c).map_err(|e| e.to_string())?;
        for (w, ea) in &la.entries {
            let eb = lb.entries[w];
            check(
                (-ea.mean).to_bits() == eb.mean.to_bits() && ea.std.to_bits() == eb.std.to_bits(),
                format!("{c}/{w}: lexicon not antisymmetric"),
            )?;
        }
    }
    Ok(format!("{compared} standardized scores negated exactly across 3 communities"))
}

fn criterion_4(ctx: &Ctx) -> Outcome {
    let seeds = SeedSet::default();
    let params = PropParams::default();
    let mut summary = Vec::new();
    for (c, emb) in &ctx.embeddings {
        let g = build_knn_graph(emb, params.k).unwrap();
        let runs = bootstrap_runs(&g, &seeds, &params, c).map_err(|e| e.to_string())?;
        let mean = |idx: &[usize], raw: &[f64]| idx.iter().map(|&i| raw[i]).sum::<f64>() / idx.len() as f64;
        let ok = runs
            .iter()
            .filter(|r| mean(&r.positive_seeds, &r.raw) > mean(&r.negative_seeds, &r.raw))
            .count();
        check(ok == runs.len() && runs.len() == 50, format!("{c}: {ok}/{} runs separated", runs.len()))?;
        summary.push(format!("{c} {ok}/{}", runs.len()));
    }
    Ok(summary.join(", "))
}

fn criterion_5(ctx: &Ctx) -> Outcome {
    let lexicons = ctx.first_run.load_lexicons().map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    for (c, lex) in &lexicons {
        let pos = lex.get(PLANTED_POSITIVE).ok_or(format!("{c}: {PLANTED_POSITIVE} missing"))?.mean;
        let neg = lex.get(PLANTED_NEGATIVE).ok_or(format!("{c}: {PLANTED_NEGATIVE} missing"))?.mean;
        check(pos > 1.0, format!("{c}: {PLANTED_POSITIVE} mean {pos}"))?;
        check(neg < -1.0, format!("{c}: {PLANTED_NEGATIVE} mean {neg}"))?;
        details.push(format!("{c} {pos:+.2}/{neg:+.2}"));
    }
    let ranking = word_variance_ranking(&lexicons).map_err(|e| e.to_string())?;
    check(ranking[0].word == OPPOSITE_USAGE, format!("top variance word is {}", ranking[0].word))?;
    let secs = ctx.elapsed.as_secs_f64();
    check(secs < 60.0, format!("full pipeline took {secs:.1} s"))?;
    Ok(format!(
        "planted means {}; `{}` ranked first; full pipeline {secs:.1} s on 1 worker",
        details.join(", "),
        ranking[0].word
    ))
}

fn partitions(n: usize, min_k: usize, max_k: usize) -> Vec<Vec<usize>> {
    // restricted growth strings
    fn rec(cur: &mut Vec<usize>, n: usize, max_k: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next.min(max_k - 1) {
            cur.push(l);
            rec(cur, n, max_k, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, max_k, &mut out);
    out.retain(|p| {
        let k = p.iter().max().unwrap() + 1;
        (min_k..=max_k).contains(&k)
    });
    out
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn oracle_ami(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as u64;
    let nf = n as f64;
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let h = |m: &[u64]| -m.iter().filter(|&&v| v > 0).map(|&v| v as f64 / nf * (v as f64 / nf).ln()).sum::<f64>();
    let mut mi = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if v > 0 {
                mi += v as f64 / nf * (nf * v as f64 / (rows[i] * cols[j]) as f64).ln();
            }
        }
    }
    let mut emi = 0.0;
    for &ai in &rows {
        for &bj in &cols {
            for nij in 1..=ai.min(bj) {
                let p = (binom(ai, nij) * binom(n - ai, bj - nij)) as f64 / binom(n, bj) as f64;
                emi += p * nij as f64 / nf * (nf * nij as f64 / (ai * bj) as f64).ln();
            }
        }
    }
    (mi - emi) / (0.5 * (h(&rows) + h(&cols)) - emi)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut self_worst = 0f64;
    let mut perm_worst = 0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=60);
        let k = rng.random_range(2..=n.min(10));
        let x: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        self_worst = self_worst.max((ami_from_labels(&x, &x).map_err(|e| e.to_string())? - 1.0).abs());
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut relabel: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            relabel.swap(i, rng.random_range(0..=i));
        }
        let xp: Vec<usize> = x.iter().map(|&l| relabel[l] + 7).collect();
        let base = ami_from_labels(&x, &y).map_err(|e| e.to_string())?;
        let permuted = ami_from_labels(&xp, &y).map_err(|e| e.to_string())?;
        perm_worst = perm_worst.max((base - permuted).abs());
    }
    check(self_worst <= 1e-10, format!("AMI(X, X) off by {self_worst:e}"))?;
    check(perm_worst <= 1e-12, format!("relabeling changed AMI by {perm_worst:e}"))?;

    let mut pairs = 0usize;
    let mut worst = 0f64;
    for n in 2..=8 {
        let all = partitions(n, 2, 4);
        for a in &all {
            for b in &all {
                let got = ami_from_labels(a, b).map_err(|e| e.to_string())?;
                let want = oracle_ami(a, b);
                worst = worst.max((got - want).abs());
                pairs += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("max |AMI - oracle| {worst:e}"))?;
    Ok(format!(
        "self {self_worst:.1e}, permutation {perm_worst:.1e}; {pairs} labeling pairs vs oracle, max diff {worst:.1e}"
    ))
}

fn criterion_7(ctx: &Ctx) -> Outcome {
    for n in 1..=400 {
        for tf in [1, 2, 17, 1000] {
            check(tfidf_weight(tf, n, n).unwrap() == 0.0, format!("df = N = {n} weighs nonzero"))?;
        }
    }
    // feature `d{k}` occurs in exactly k communities
    let scan = |n: usize, bounds: DfBounds| -> Result<(), String> {
        let counts: BTreeMap<String, HashMap<String, u64>> = (0..n)
            .map(|c| {
                let feats = (1..=n).filter(|&k| c < k).map(|k| (format!("d{k}"), 1 + (c % 3) as u64)).collect();
                (format!("c{c:03}"), feats)
            })
            .collect();
        let m = build_tfidf(&counts, bounds, None).map_err(|e| e.to_string())?;
        let kept: BTreeSet<usize> = m.df.iter().copied().collect();
        let want: BTreeSet<usize> = (1..=n).filter(|&d| d > bounds.lower && d <= bounds.upper).collect();
        check(kept == want, format!("N = {n}: bounds ({}, {}] kept {kept:?}", bounds.lower, bounds.upper))?;
        if let Some(col) = m.features.iter().position(|f| f == &format!("d{n}")) {
            check(
                m.weights.iter().all(|(_, j, v)| j != col || v == 0.0),
                format!("N = {n}: df = N feature carries weight"),
            )?;
        }
        Ok(())
    };
    let text = DfBounds::text_default(400);
    let user = DfBounds::user_default(400);
    check((text.lower, text.upper) == (5, 380), format!("text bounds {text:?}"))?;
    check((user.lower, user.upper) == (1, 380), format!("user bounds {user:?}"))?;
    scan(400, text)?;
    scan(400, user)?;
    scan(400, DfBounds { lower: 0, upper: 400 })?;
    for n in 2..=60 {
        scan(n, DfBounds::text_default(n))?;
        scan(n, DfBounds::user_default(n))?;
    }

    let mut worst = 0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10 {
        let n = rng.random_range(3..40);
        let counts: BTreeMap<String, HashMap<String, u64>> = (0..n)
            .map(|c| {
                let feats = (0..200)
                    .filter_map(|f| rng.random_bool(0.3).then(|| (format!("f{f}"), rng.random_range(1..50))))
                    .chain([(format!("own{c}"), 1)])
                    .collect();
                (format!("c{c}"), feats)
            })
            .collect();
        let m = build_tfidf(&counts, DfBounds { lower: 0, upper: n - 1 }, None).map_err(|e| e.to_string())?;
        let dims = 1 + trial % n.min(m.features.len());
        let vecs = reduce_and_normalize(&m, RepresentationKind::Text, dims, &SvdOptions::default())
            .map_err(|e| e.to_string())?;
        for v in vecs {
            worst = worst.max((norm(&v.values) - 1.0).abs());
        }
    }
    for kind in ["text", "user"] {
        let path = ctx.first_run.cache_dir(commrep::pipeline::Stage::Vectors).join(format!("{kind}_vectors.tsv"));
        for v in commrep::pipeline::files::read_vectors_tsv(&path).map_err(|e| e.to_string())? {
            worst = worst.max((norm(&v.values) - 1.0).abs());
        }
    }
    check(worst <= 1e-9, format!("norm off by {worst:e}"))?;
    Ok(format!("df = N weighs 0; bounds scanned for N = 2..60 and 400; max |norm - 1| {worst:.1e}"))
}

fn sim(values: Vec<Vec<f64>>) -> SimilarityMatrix {
    SimilarityMatrix {
        communities: (0..values.len()).map(|i| format!("c{i}")).collect(),
        kind: RepresentationKind::Text,
        values,
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 3..12 {
        let mut v = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = rng.random_range(-1.0..1.0);
                v[i][j] = x;
                v[j][i] = x;
            }
        }
        let m = z2_misalignment(&sim(v.clone()), &sim(v)).map_err(|e| e.to_string())?;
        check(m.z2.iter().flatten().all(|&z| z == 0.0), format!("n = {n}: identical inputs gave nonzero z2"))?;
    }
    let base = |s01: f64| {
        let u = [[0.0, s01, 0.4, 0.3], [0.0, 0.0, 0.6, 0.2], [0.0, 0.0, 0.0, 0.7], [0.0; 4]];
        let mut v = vec![vec![1.0; 4]; 4];
        for i in 0..4 {
            for j in i + 1..4 {
                v[i][j] = u[i][j];
                v[j][i] = u[i][j];
            }
        }
        sim(v)
    };
    let m = z2_misalignment(&base(0.9), &base(0.05)).map_err(|e| e.to_string())?;
    let max = m.z2.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    check(m.z2[0][1] >= max, format!("planted pair z2 {} < max {max}", m.z2[0][1]))?;
    Ok(format!("identical inputs give zeros; planted pair z2 {:.4} = max", m.z2[0][1]))
}

fn criterion_9(ctx: &Ctx) -> Outcome {
    let seeds = SeedSet::default();
    let base = PropParams::default();
    let mut details = Vec::new();
    for (c, emb) in &ctx.embeddings {
        let rows = sensitivity_sweep(emb, &seeds, &base, &[(0.9, 15), (0.9, 35)], c).map_err(|e| e.to_string())?;
        let (k15, k35) = (rows[0].pearson, rows[1].pearson);
        check(k15 > 0.8, format!("{c}: r(K25, K15) = {k15}"))?;
        check(k35 > k15 - 0.1, format!("{c}: r(K25, K35) = {k35} vs r(K25, K15) = {k15}"))?;
        details.push(format!("{c} K15 {k15:.4} K35 {k35:.4}"));
    }
    Ok(details.join(", "))
}

fn criterion_10(ctx: &Ctx) -> Outcome {
    let out2 = ctx._tmp.path().join("run2");
    let second = pipeline_for(&ctx.corpus, &out2, 0);
    second.run_all().map_err(|e| e.to_string())?;
    let out1 = ctx.first_run.output_dir();
    let mut compared = 0;
    for sub in ["induce/lexicons", "report"] {
        let a = list_files(&out1.join(sub)).map_err(|e| e.to_string())?;
        let b = list_files(&out2.join(sub)).map_err(|e| e.to_string())?;
        check(a == b && !a.is_empty(), format!("{sub}: file sets differ"))?;
        for rel in a {
            let x = std::fs::read(out1.join(sub).join(&rel)).unwrap();
            let y = std::fs::read(out2.join(sub).join(&rel)).unwrap();
            check(x == y, format!("{sub}/{} differs", rel.display()))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} lexicon and report files byte-identical across two runs"))
}

fn main() {
    let ctx = setup();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("PPMI oracle equivalence", Box::new(criterion_1)),
        ("random-walk correctness", Box::new(|| criterion_2(&ctx))),
        ("label-swap antisymmetry", Box::new(|| criterion_3(&ctx))),
        ("seed separation", Box::new(|| criterion_4(&ctx))),
        ("synthetic polarity recovery", Box::new(|| criterion_5(&ctx))),
        ("AMI correctness", Box::new(criterion_6)),
        ("tf-idf contract", Box::new(|| criterion_7(&ctx))),
        ("z2 contract", Box::new(criterion_8)),
        ("sensitivity to K", Box::new(|| criterion_9(&ctx))),
        ("determinism", Box::new(|| criterion_10(&ctx))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
