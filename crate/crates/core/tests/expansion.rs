mod common;

use common::*;
use graphrag_core::expansion::{expand_beams, flatten_beams, Beam, ExpansionConfig};
use graphrag_core::kg::KgStore;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn beams_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..60 {
        let n = rng.random_range(5..=40);
        let triples = random_triples(&mut rng, n);
        let store = KgStore::from_triples(triples.clone());
        let seeds: Vec<_> = (0..rng.random_range(1..=3))
            .map(|_| store.triples().choose(&mut rng).unwrap().clone())
            .collect();
        let query = format!(
            "e{} {} e{}",
            rng.random_range(0..12),
            ["born", "located", "river", "capital"][rng.random_range(0..4)],
            rng.random_range(0..12)
        );
        let b = rng.random_range(1..=3);
        let d = rng.random_range(1..=2);
        let got = expand_beams(&store, &seeds, &query, &ExpansionConfig::new(b, d).unwrap());
        let want = beam_oracle(store.triples(), &seeds, &query, b, d);
        assert_eq!(got.len(), want.len(), "case {case}");
        assert!(got.len() <= b);
        for (g, (path, score)) in got.iter().zip(&want) {
            assert_eq!(&g.triples, path, "case {case}");
            assert!((g.score - score).abs() < 1e-12);
            assert!(g.triples.iter().all(|x| store.contains(x)));
        }
    }
}

#[test]
fn chain_follows_only_extension() {
    let store = KgStore::from_triples([t("a", "p", "b"), t("b", "q", "c")]);
    let beams = expand_beams(&store, &[t("a", "p", "b")], "what is c", &ExpansionConfig::new(1, 1).unwrap());
    assert_eq!(beams.len(), 1);
    assert_eq!(beams[0].triples, [t("a", "p", "b"), t("b", "q", "c")]);
}

#[test]
fn empty_or_foreign_seeds_give_nothing() {
    let store = KgStore::from_triples([t("a", "p", "b")]);
    let cfg = ExpansionConfig::default();
    assert!(expand_beams(&store, &[], "q", &cfg).is_empty());
    assert!(expand_beams(&store, &[t("x", "y", "z")], "q", &cfg).is_empty());
}

#[test]
fn diversity_keeps_one_beam_per_last_triple() {
    // two seeds both reach (hub, r, end) as their only extension
    let store = KgStore::from_triples([
        t("a", "p", "hub"),
        t("b", "p", "hub"),
        t("hub", "r", "end"),
    ]);
    let beams = expand_beams(
        &store,
        &[t("a", "p", "hub"), t("b", "p", "hub")],
        "end",
        &ExpansionConfig::new(4, 1).unwrap(),
    );
    let lasts: Vec<_> = beams.iter().map(|b| b.triples.last().unwrap().clone()).collect();
    let mut dedup = lasts.clone();
    dedup.dedup();
    assert_eq!(lasts.len(), dedup.len());
}

fn random_beams(rng: &mut ChaCha8Rng) -> Vec<Beam> {
    let pool = random_triples(rng, 12);
    (0..rng.random_range(0..=6))
        .map(|_| Beam {
            triples: (0..rng.random_range(1..=3))
                .map(|_| pool.choose(rng).unwrap().clone())
                .collect(),
            score: rng.random(),
        })
        .collect()
}

#[test]
fn flatten_matches_position_major_traversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let beams = random_beams(&mut rng);
        let flat = flatten_beams(&beams);
        assert_eq!(flat, flatten_oracle(&beams));
        let mut uniq = flat.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), flat.len());
        assert!(flat.iter().all(|x| beams.iter().any(|b| b.triples.contains(x))));
    }
}

#[test]
fn flatten_drops_repeated_head() {
    let (x, y, z) = (t("x", "p", "1"), t("y", "p", "2"), t("z", "p", "3"));
    let beams = [
        Beam { triples: vec![x.clone(), y.clone()], score: 1.0 },
        Beam { triples: vec![x.clone(), z.clone()], score: 0.5 },
    ];
    assert_eq!(flatten_beams(&beams), [x, y, z]);
}
