//! Seeded synthetic data: RDF corpora for parser/profiler stress tests and
//! Gaussian cluster datasets for classifier checks.

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::learn::Dataset;
use crate::rdf::{vocab, BlankNode, Iri, Literal, Term, Triple};

/// Generate a deterministic corpus of `n` triples spread over a handful of
/// classes and properties, mixing IRI, literal (typed, plain, language
/// tagged) and blank-node objects. Every subject gets a type assertion,
/// counted within `n`.
pub fn triples(seed: u64, n: usize) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes: Vec<Iri> = (0..4)
        .map(|i| Iri::new(format!("http://synth.example/class/C{i}")).unwrap())
        .collect();
    let properties: Vec<Iri> = (0..8)
        .map(|i| Iri::new(format!("http://synth.example/prop/p{i}")).unwrap())
        .collect();
    let rdf_type = Iri::new(vocab::RDF_TYPE).unwrap();
    let n_subjects = (n / 5).max(1);

    let mut out = Vec::with_capacity(n);
    let mut subjects = Vec::with_capacity(n_subjects);
    for s in 0..n_subjects {
        if out.len() >= n {
            break;
        }
        let subject = Term::iri(format!("http://synth.example/entity/e{s}")).unwrap();
        let class = classes.choose(&mut rng).unwrap().clone();
        out.push(Triple::new(subject.clone(), rdf_type.clone(), Term::Iri(class)).unwrap());
        subjects.push(subject);
    }
    while out.len() < n {
        let subject = subjects.choose(&mut rng).unwrap().clone();
        let predicate = properties.choose(&mut rng).unwrap().clone();
        let object = random_object(&mut rng, &subjects);
        out.push(Triple::new(subject, predicate, object).unwrap());
    }
    out
}

fn random_object<R: Rng>(rng: &mut R, subjects: &[Term]) -> Term {
    match rng.random_range(0..6u8) {
        0 => subjects.choose(rng).unwrap().clone(),
        1 => Term::iri(format!("http://synth.example/thing/t{}", rng.random_range(0..500u32)))
            .unwrap(),
        2 => Term::Literal(Literal::string(random_text(rng))),
        3 => Term::Literal(Literal::lang_tagged(random_text(rng), "en").unwrap()),
        4 => Term::Literal(Literal::typed(
            format!("{}", rng.random_range(0..10_000u32)),
            Iri::new(vocab::XSD_INTEGER).unwrap(),
        )),
        _ => Term::BlankNode(BlankNode::new(format!("b{}", rng.random_range(0..200u32))).unwrap()),
    }
}

fn random_text<R: Rng>(rng: &mut R) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'c', 'd', 'e', ' ', 'é', 'ü', '"', '\\', '\n', '\t', 'ж', '中', '😀', '.', '<',
        '>',
    ];
    let len = rng.random_range(0..24usize);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// Two Gaussian clusters in `width` dimensions whose means sit `separation`
/// standard deviations apart on every axis. Labels are "neg"/"pos",
/// round-robin, so classes are balanced.
pub fn gaussian_blobs(seed: u64, rows: usize, width: usize, separation: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut features = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let positive = i % 2 == 1;
        let center = if positive { separation } else { 0.0 };
        let row: Vec<f64> = (0..width).map(|_| center + unit.sample(&mut rng)).collect();
        features.push(row);
        labels.push(if positive { "pos".to_string() } else { "neg".to_string() });
    }
    Dataset::new(features, labels).expect("blob dataset is well-formed")
}
