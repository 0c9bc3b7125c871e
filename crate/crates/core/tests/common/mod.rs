//! Fixtures and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the scoring code under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use graphrag_core::expansion::Beam;
use graphrag_core::kg::{load_kg, KgLoadOptions, KgStore, Triple};
use graphrag_core::llm::MockScript;
use graphrag_core::retrieval::{ingest_corpus, CorpusIndex, RankedList};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const GOLDEN_QUESTION: &str =
    "Which river flows past the birthplace of the architect of the Harbor Library?";

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn golden_corpus() -> CorpusIndex {
    let f = File::open(fixture("golden/passages.jsonl")).unwrap();
    ingest_corpus(BufReader::new(f)).unwrap().0
}

pub fn golden_kg() -> KgStore {
    let f = File::open(fixture("golden/kg.jsonl")).unwrap();
    load_kg(BufReader::new(f), KgLoadOptions::default()).unwrap().0
}

pub fn golden_script() -> MockScript {
    MockScript::from_file(&fixture("golden/mock.json")).unwrap()
}

/// Golden runs retrieve three passages per step so that the second step
/// has something left to add.
pub fn golden_config() -> graphrag_core::agent::AgentConfig {
    graphrag_core::agent::AgentConfig {
        k: 3,
        ..Default::default()
    }
}

pub fn t(s: &str, p: &str, o: &str) -> Triple {
    Triple::new(s, p, o).unwrap()
}

// ---------------------------------------------------------------- text

pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

// ---------------------------------------------------------------- BM25

/// Exhaustive BM25 over raw texts: every document scored against every
/// distinct query term; zero scores dropped; descending score, then index.
pub fn bm25_oracle(docs: &[String], query: &str, k1: f64, b: f64) -> Vec<(usize, f64)> {
    let toks: Vec<Vec<String>> = docs.iter().map(|d| oracle_tokens(d)).collect();
    let n = docs.len() as f64;
    let avgdl = toks.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut q: Vec<String> = Vec::new();
    for term in oracle_tokens(query) {
        if !q.contains(&term) {
            q.push(term);
        }
    }
    let mut out = Vec::new();
    for (i, d) in toks.iter().enumerate() {
        let mut score = 0.0;
        for term in &q {
            let tf = d.iter().filter(|x| *x == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = toks.iter().filter(|d| d.contains(term)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let norm = if avgdl > 0.0 { d.len() as f64 / avgdl } else { 0.0 };
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
        }
        if score > 0.0 {
            out.push((i, score));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------- dense

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 14695981039346656037;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(1099511628211);
    }
    h
}

pub fn hashed_tf(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for tok in oracle_tokens(text) {
        v[(fnv(tok.as_bytes()) % dim as u64) as usize] += 1.0;
    }
    v
}

pub fn dense_oracle(docs: &[String], query: &str, dim: usize) -> Vec<(usize, f64)> {
    let q = hashed_tf(query, dim);
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = Vec::new();
    for (i, d) in docs.iter().enumerate() {
        let v = hashed_tf(d, dim);
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if qn == 0.0 || vn == 0.0 {
            continue;
        }
        let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
        let s = dot / (qn * vn);
        if s > 0.0 {
            out.push((i, s));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------- RRF

/// Dictionary accumulator: Σ 1/(κ + rank) per id; descending score, then id.
pub fn rrf_oracle(lists: &[Vec<String>], kappa: f64) -> Vec<(String, f64)> {
    let mut acc: HashMap<String, f64> = HashMap::new();
    for list in lists {
        for (r, id) in list.iter().enumerate() {
            *acc.entry(id.clone()).or_insert(0.0) += 1.0 / (kappa + (r + 1) as f64);
        }
    }
    let mut out: Vec<(String, f64)> = acc.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------- comparison

/// Equal lengths, scores within `tol` position by position, and identical
/// ids except inside groups of scores tied within `tol`, where the id sets
/// must agree.
pub fn ranked_matches(actual: &[(String, f64)], expected: &[(String, f64)], tol: f64) -> Result<(), String> {
    if actual.len() != expected.len() {
        return Err(format!("length {} != {}", actual.len(), expected.len()));
    }
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        if (a.1 - e.1).abs() > tol {
            return Err(format!("rank {i}: score {} != {}", a.1, e.1));
        }
    }
    let mut i = 0;
    while i < expected.len() {
        let mut j = i + 1;
        while j < expected.len() && (expected[j].1 - expected[j - 1].1).abs() <= tol {
            j += 1;
        }
        let a: HashSet<&str> = actual[i..j].iter().map(|x| x.0.as_str()).collect();
        let e: HashSet<&str> = expected[i..j].iter().map(|x| x.0.as_str()).collect();
        if a != e {
            return Err(format!("ranks {i}..{j}: {a:?} != {e:?}"));
        }
        i = j;
    }
    Ok(())
}

pub fn pairs(list: &RankedList) -> Vec<(String, f64)> {
    list.iter().map(|e| (e.id.clone(), e.score)).collect()
}

// ---------------------------------------------------------------- random data

const VOCAB: &[&str] = &[
    "river", "bridge", "castle", "museum", "library", "architect", "painter", "born", "city",
    "village", "north", "south", "station", "harbor", "ship", "king", "queen", "war", "peace",
    "music", "opera", "film", "director", "actor", "novel", "poet", "mountain", "lake", "forest",
    "garden", "tower", "church", "school", "university", "market", "island", "coast", "valley",
    "winter", "summer",
];

pub fn random_text<R: Rng>(rng: &mut R, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    (0..n)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn random_corpus<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    (0..n).map(|_| random_text(rng, 3, 25)).collect()
}

/// Random store over a small entity pool so that triples connect.
pub fn random_triples<R: Rng>(rng: &mut R, n: usize) -> Vec<Triple> {
    let entities = rng.random_range(4..=12);
    let preds = ["located in", "born in", "part of", "designed", "river", "capital of"];
    let mut out: Vec<Triple> = Vec::new();
    while out.len() < n {
        let s = format!("e{}", rng.random_range(0..entities));
        let o = format!("e{}", rng.random_range(0..entities));
        let triple = t(&s, preds.choose(rng).unwrap(), &o);
        if !out.contains(&triple) {
            out.push(triple);
        }
    }
    out
}

// ---------------------------------------------------------------- beams

fn oracle_verbalize(x: &Triple) -> String {
    format!("{} {} {}", x.subject(), x.predicate(), x.object())
}

fn coverage(x: &Triple, query: &str) -> f64 {
    let mut terms: Vec<String> = Vec::new();
    for w in oracle_tokens(query) {
        if !terms.contains(&w) {
            terms.push(w);
        }
    }
    if terms.is_empty() {
        return 0.0;
    }
    let toks = oracle_tokens(&oracle_verbalize(x));
    terms.iter().filter(|w| toks.contains(w)).count() as f64 / terms.len() as f64
}

fn connected(a: &Triple, b: &Triple) -> bool {
    [a.subject(), a.object()]
        .iter()
        .any(|e| *e == b.subject() || *e == b.object())
}

fn pick(all: &[Triple], cands: Vec<Vec<usize>>, rel: &[f64], width: usize) -> Vec<Vec<usize>> {
    let mean = |p: &Vec<usize>| p.iter().map(|&i| rel[i]).sum::<f64>() / p.len() as f64;
    let mut cands = cands;
    cands.sort_by(|a, b| {
        mean(b).total_cmp(&mean(a)).then_with(|| {
            let va: Vec<String> = a.iter().map(|&i| oracle_verbalize(&all[i])).collect();
            let vb: Vec<String> = b.iter().map(|&i| oracle_verbalize(&all[i])).collect();
            va.cmp(&vb)
        })
    });
    let mut lasts = HashSet::new();
    let mut kept = Vec::new();
    for c in cands {
        if kept.len() == width {
            break;
        }
        if lasts.insert(*c.last().unwrap()) {
            kept.push(c);
        }
    }
    kept
}

/// Level-by-level enumeration of every entity-connected sequence that
/// extends a surviving sequence, filtered by the diversity/top-B rule.
pub fn beam_oracle(all: &[Triple], seeds: &[Triple], query: &str, width: usize, depth: usize) -> Vec<(Vec<Triple>, f64)> {
    let rel: Vec<f64> = all.iter().map(|x| coverage(x, query)).collect();
    let mut start: Vec<Vec<usize>> = Vec::new();
    for s in seeds {
        if let Some(i) = all.iter().position(|x| x == s) {
            if !start.iter().any(|p| p[0] == i) {
                start.push(vec![i]);
            }
        }
    }
    let mut beams = pick(all, start, &rel, width);
    for _ in 0..depth {
        let mut next = Vec::new();
        for b in &beams {
            let last = &all[*b.last().unwrap()];
            let ext: Vec<usize> = (0..all.len())
                .filter(|i| !b.contains(i) && connected(last, &all[*i]))
                .collect();
            if ext.is_empty() {
                next.push(b.clone());
            }
            for i in ext {
                let mut p = b.clone();
                p.push(i);
                next.push(p);
            }
        }
        beams = pick(all, next, &rel, width);
    }
    beams
        .into_iter()
        .map(|p| {
            let score = p.iter().map(|&i| rel[i]).sum::<f64>() / p.len() as f64;
            (p.into_iter().map(|i| all[i].clone()).collect(), score)
        })
        .collect()
}

pub fn flatten_oracle(beams: &[Beam]) -> Vec<Triple> {
    let mut seen: Vec<Triple> = Vec::new();
    let longest = beams.iter().map(|b| b.triples.len()).max().unwrap_or(0);
    for pos in 0..longest {
        for b in beams {
            if pos < b.triples.len() && !seen.contains(&b.triples[pos]) {
                seen.push(b.triples[pos].clone());
            }
        }
    }
    seen
}

/// Document frequency per term, counted with a plain map.
pub fn df_oracle(docs: &[String]) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for d in docs {
        let uniq: HashSet<String> = oracle_tokens(d).into_iter().collect();
        for w in uniq {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    df
}

// ---------------------------------------------------------------- parser fixtures

/// Messy reader outputs and the triples a careful human reads from them.
pub fn triple_cases() -> Vec<(&'static str, Vec<Triple>)> {
    vec![
        (
            r#"("Neville A. Stanton", "employer", "University of Southampton"), ("University of Southampton", "founded in", "1862")"#,
            vec![
                t("Neville A. Stanton", "employer", "University of Southampton"),
                t("University of Southampton", "founded in", "1862"),
            ],
        ),
        (r#"("a", "b", "c")"#, vec![t("a", "b", "c")]),
        (r#"("a","b","c"), ("a","b","c")"#, vec![t("a", "b", "c")]),
        (
            "(Edward L. Cahn, director of, Laughter in Hell)",
            vec![t("Edward L. Cahn", "director of", "Laughter in Hell")],
        ),
        (
            r#"Facts: ("Eiffel Tower", "located in", "Paris, France") and that is all I found."#,
            vec![t("Eiffel Tower", "located in", "Paris, France")],
        ),
        (
            "(Edward L. Cahn, born on, February 12, 1899)",
            vec![t("Edward L. Cahn", "born on", "February 12, 1899")],
        ),
        (
            "\u{201c}x\u{201d} is not a group. (\u{201c}Inter Miami CF\u{201d}, \u{201c}head coach\u{201d}, \u{201c}Gerardo Martino\u{201d})",
            vec![t("Inter Miami CF", "head coach", "Gerardo Martino")],
        ),
        (
            "1. (\"Glomma\", \"country\", \"Norway\")\n2. (\"Glomma\", \"length\")\n3. (\"\", \"p\", \"o\")",
            vec![t("Glomma", "country", "Norway")],
        ),
        ("I could not find any relevant facts in these documents.", vec![]),
        (
            r#"[("Pacific Geoducks", "fertilization method", "external fertilization"),("Pacific Geoducks", "reproductive method", "broadcast spawning")]"#,
            vec![
                t("Pacific Geoducks", "fertilization method", "external fertilization"),
                t("Pacific Geoducks", "reproductive method", "broadcast spawning"),
            ],
        ),
        (
            "(  \"spaced out\" ,\"p\",   \"o\"  ) trailing (unclosed, group",
            vec![t("spaced out", "p", "o")],
        ),
    ]
}

/// `None` expectation means the parser must report failure.
pub fn rewrite_cases() -> Vec<(&'static str, Option<Option<&'static str>>)> {
    vec![
        ("{Yes}", Some(None)),
        ("{No} {Who is the coach of Inter Miami CF?}", Some(Some("Who is the coach of Inter Miami CF?"))),
        ("{No} {England's cotton imports}", Some(Some("England's cotton imports"))),
        (" {no} {find X}", Some(Some("find X"))),
        ("{YES} the triples suffice", Some(None)),
        ("{No}\n{When was the University of Southampton founded?}", Some(Some("When was the University of Southampton founded?"))),
        ("I think so", None),
        ("{No}", None),
        ("{No} {   }", None),
        ("{Maybe} {x}", None),
        ("Answer: {Yes}", None),
        ("", None),
    ]
}

/// `None` expectation means the parser must report failure.
pub fn rerank_cases() -> Vec<(&'static str, usize, Option<Vec<usize>>)> {
    vec![
        ("[3] > [1]", 5, Some(vec![3, 1])),
        ("None", 5, Some(vec![])),
        ("[4] > [6] > [1]", 6, Some(vec![4, 6, 1])),
        ("[2] > [2]", 3, Some(vec![2])),
        ("none", 3, Some(vec![])),
        ("[2] > [9]", 5, Some(vec![2])),
        ("Reranked Passages: [ 5 ] > [1] > [3]", 5, Some(vec![5, 1, 3])),
        ("[0] > [1]", 2, Some(vec![1])),
        ("The most relevant is [2], then [1].", 2, Some(vec![2, 1])),
        ("I cannot rank these.", 4, None),
        ("", 4, None),
        ("3 > 1", 4, None),
    ]
}

// ---------------------------------------------------------------- topic-misalignment fixtures

pub struct RegressionCase {
    pub question: &'static str,
    pub corpus: CorpusIndex,
    pub kg: KgStore,
    pub script: MockScript,
}

/// `name` is `geoduck` or `hottub`.
pub fn regression_case(name: &str) -> RegressionCase {
    let open = |f: &str| BufReader::new(File::open(fixture(&format!("regression/{name}_{f}"))).unwrap());
    RegressionCase {
        question: match name {
            "geoduck" => "Do frilled lizards and geoducks share any reproductive characteristics?",
            _ => "How come I always have to reset the high limit switch on my hot tub heater after draining and refilling the spa?",
        },
        corpus: ingest_corpus(open("passages.jsonl")).unwrap().0,
        kg: load_kg(open("kg.jsonl"), KgLoadOptions::default()).unwrap().0,
        script: MockScript::from_file(&fixture(&format!("regression/{name}_mock.json"))).unwrap(),
    }
}
