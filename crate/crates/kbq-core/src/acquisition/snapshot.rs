use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::BufReader;
use std::path::Path;

use crate::rdf::{read_lenient, read_strict, Iri, MalformedLine, Term, Triple};

use super::AcquisitionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    Strict,
    /// Skip malformed lines; they are returned alongside the snapshot.
    Lenient,
}

/// One release's triples, indexed by predicate, by subject and by class.
/// Immutable after load and freely shareable across threads.
#[derive(Debug, Clone)]
pub struct Snapshot {
    release_id: String,
    triples: Vec<Triple>,
    by_predicate: HashMap<Iri, Vec<usize>>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_type: HashMap<Iri, BTreeSet<Term>>,
}

impl Snapshot {
    pub fn from_triples(release_id: impl Into<String>, triples: Vec<Triple>) -> Self {
        let mut by_predicate: HashMap<Iri, Vec<usize>> = HashMap::new();
        let mut by_subject: HashMap<Term, Vec<usize>> = HashMap::new();
        let mut by_type: HashMap<Iri, BTreeSet<Term>> = HashMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_predicate.entry(t.predicate().clone()).or_default().push(i);
            by_subject.entry(t.subject().clone()).or_default().push(i);
            if t.is_type_assertion() {
                if let Term::Iri(class) = t.object() {
                    by_type.entry(class.clone()).or_default().insert(t.subject().clone());
                }
            }
        }
        Snapshot { release_id: release_id.into(), triples, by_predicate, by_subject, by_type }
    }

    /// Load an N-Triples dump. In lenient mode the malformed lines are
    /// returned for reporting; in strict mode the first one aborts the load.
    pub fn load_dump(
        path: impl AsRef<Path>,
        release_id: impl Into<String>,
        mode: ParseMode,
    ) -> Result<(Self, Vec<MalformedLine>), AcquisitionError> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|source| AcquisitionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let reader = BufReader::new(file);
        let (triples, errors) = match mode {
            ParseMode::Strict => (read_strict(reader)?, Vec::new()),
            ParseMode::Lenient => {
                let (pairs, errors) = read_lenient(reader);
                (pairs.into_iter().map(|(_, t)| t).collect(), errors)
            }
        };
        Ok((Self::from_triples(release_id, triples), errors))
    }

    pub fn release_id(&self) -> &str {
        &self.release_id
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Distinct subjects carrying `rdf:type <class>`, in term order.
    pub fn instances_of(&self, class: &Iri) -> impl Iterator<Item = &Term> {
        self.by_type.get(class).into_iter().flatten()
    }

    pub fn is_instance_of(&self, subject: &Term, class: &Iri) -> bool {
        self.by_type.get(class).is_some_and(|set| set.contains(subject))
    }

    /// Classes the given term is typed with, sorted.
    pub fn classes_of(&self, term: &Term) -> Vec<&Iri> {
        let mut out: Vec<&Iri> = self
            .triples_with_subject(term)
            .filter(|t| t.is_type_assertion())
            .filter_map(|t| t.object().as_iri())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// All classes present in the snapshot (objects of `rdf:type`), sorted.
    pub fn classes(&self) -> Vec<&Iri> {
        let mut out: Vec<&Iri> = self.by_type.keys().collect();
        out.sort();
        out
    }

    pub fn triples_with_subject(&self, subject: &Term) -> impl Iterator<Item = &Triple> {
        self.by_subject.get(subject).into_iter().flatten().map(|&i| &self.triples[i])
    }

    pub fn triples_with_predicate(&self, predicate: &Iri) -> impl Iterator<Item = &Triple> {
        self.by_predicate.get(predicate).into_iter().flatten().map(|&i| &self.triples[i])
    }

    /// count(C): distinct subjects typed with the class.
    pub fn count(&self, class: &Iri) -> u64 {
        self.by_type.get(class).map_or(0, |s| s.len() as u64)
    }

    /// freq(p, C): triples with the given predicate whose subject is typed C.
    /// `rdf:type` rows count like any other predicate here; profile-level
    /// exclusion is a profiler concern.
    pub fn freq(&self, class: &Iri, property: &Iri) -> u64 {
        let Some(instances) = self.by_type.get(class) else { return 0 };
        self.triples_with_predicate(property)
            .filter(|t| instances.contains(t.subject()))
            .count() as u64
    }

    /// NP(C): distinct predicates attached to instances of the class.
    pub fn np(&self, class: &Iri) -> u64 {
        let Some(instances) = self.by_type.get(class) else { return 0 };
        let mut predicates: BTreeSet<&Iri> = BTreeSet::new();
        for subject in instances {
            for t in self.triples_with_subject(subject) {
                predicates.insert(t.predicate());
            }
        }
        predicates.len() as u64
    }

    /// Per-subject value counts of a property over the class instances,
    /// including the 0 bucket for instances without the property.
    pub fn cardinality_histogram(&self, class: &Iri, property: &Iri) -> BTreeMap<u64, u64> {
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        let Some(instances) = self.by_type.get(class) else { return hist };
        let mut per_subject: HashMap<&Term, u64> = HashMap::new();
        for t in self.triples_with_predicate(property) {
            if instances.contains(t.subject()) {
                *per_subject.entry(t.subject()).or_default() += 1;
            }
        }
        let with_values = per_subject.len() as u64;
        for (_, card) in per_subject {
            *hist.entry(card).or_default() += 1;
        }
        let zero = instances.len() as u64 - with_values;
        if zero > 0 {
            *hist.entry(0).or_default() += zero;
        }
        hist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_line;

    fn snapshot(lines: &[&str]) -> Snapshot {
        let triples =
            lines.iter().enumerate().map(|(i, l)| parse_line(l, i as u64 + 1).unwrap()).collect();
        Snapshot::from_triples("test", triples)
    }

    #[test]
    fn empty_dump_yields_empty_snapshot() {
        let snap = Snapshot::from_triples("r", Vec::new());
        assert!(snap.is_empty());
        assert_eq!(snap.count(&Iri::new("http://c").unwrap()), 0);
    }

    #[test]
    fn type_index_counts_typed_subjects() {
        let snap = snapshot(&[
            "<http://s1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
            "<http://s2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
            "<http://s1> <http://p> \"v\" .",
            "<http://s3> <http://p> \"v\" .",
            "<http://s2> <http://q> <http://o> .",
        ]);
        let class = Iri::new("http://C").unwrap();
        assert_eq!(snap.len(), 5);
        assert_eq!(snap.count(&class), 2);
        assert_eq!(snap.freq(&class, &Iri::new("http://p").unwrap()), 1);
        assert_eq!(snap.np(&class), 3);
    }

    #[test]
    fn cardinality_histogram_has_zero_bucket() {
        let snap = snapshot(&[
            "<http://s1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
            "<http://s2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
            "<http://s3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
            "<http://s1> <http://p> \"a\" .",
            "<http://s1> <http://p> \"b\" .",
            "<http://s2> <http://p> \"c\" .",
        ]);
        let class = Iri::new("http://C").unwrap();
        let prop = Iri::new("http://p").unwrap();
        let hist = snap.cardinality_histogram(&class, &prop);
        assert_eq!(hist, BTreeMap::from([(0, 1), (1, 1), (2, 1)]));
        assert_eq!(hist.values().sum::<u64>(), snap.count(&class));
    }

    #[test]
    fn absent_property_is_all_zero_bucket() {
        let snap = snapshot(&[
            "<http://s1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
            "<http://s2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://C> .",
        ]);
        let hist = snap.cardinality_histogram(
            &Iri::new("http://C").unwrap(),
            &Iri::new("http://missing").unwrap(),
        );
        assert_eq!(hist, BTreeMap::from([(0, 2)]));
    }
}
