//! SPARQL query templates. `<C>` and `<p>` are placeholders replaced by the
//! bracketed class and property IRIs; everything else is sent as-is.

use crate::rdf::Iri;

pub const COUNT_TEMPLATE: &str = "SELECT COUNT(DISTINCT ?s) AS ?COUNT\nWHERE {  ?s a <C> . }";

pub const FREQ_TEMPLATE: &str =
    "SELECT COUNT(*) AS ?FREQ\nWHERE {\n    ?s <p> ?o.\n    ?s a <C>.\n}";

pub const NP_TEMPLATE: &str =
    "SELECT COUNT(DISTINCT ?p) AS ?NP\nWHERE {\n    ?s ?p ?o.\n    ?s a <C>.\n}";

/// Star-join cardinality estimation, bound to one property. The outer query
/// buckets subjects by their per-subject value count; subjects with no value
/// never appear, so the 0 bucket is derived from the class count afterwards.
pub const CARDINALITY_TEMPLATE: &str = "SELECT ?card (COUNT (?s) as ?count )\nWHERE {\n  SELECT ?s (COUNT (?o) as ?card)\n  WHERE {\n     ?s a <C> ;\n     <p> ?o\n   } GROUP BY ?s\n} GROUP BY ?card ORDER BY DESC(?count)";

/// Enumerates the distinct predicates of a class, for endpoint-backed profiling.
pub const PROPERTIES_TEMPLATE: &str =
    "SELECT DISTINCT ?p\nWHERE {\n    ?s ?p ?o.\n    ?s a <C>.\n}";

fn fill(template: &str, class: &Iri, property: Option<&Iri>) -> String {
    let mut q = template.replace("<C>", &format!("<{class}>"));
    if let Some(p) = property {
        q = q.replace("<p>", &format!("<{p}>"));
    }
    q
}

pub fn count_query(class: &Iri) -> String {
    fill(COUNT_TEMPLATE, class, None)
}

pub fn freq_query(class: &Iri, property: &Iri) -> String {
    fill(FREQ_TEMPLATE, class, Some(property))
}

pub fn np_query(class: &Iri) -> String {
    fill(NP_TEMPLATE, class, None)
}

pub fn cardinality_query(class: &Iri, property: &Iri) -> String {
    fill(CARDINALITY_TEMPLATE, class, Some(property))
}

pub fn properties_query(class: &Iri) -> String {
    fill(PROPERTIES_TEMPLATE, class, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_replaced_with_bracketed_iris() {
        let class = Iri::new("http://linkedevents.org/ontology/Event").unwrap();
        let prop = Iri::new("http://linkedevents.org/ontology/atPlace").unwrap();
        let q = freq_query(&class, &prop);
        assert!(q.contains("?s <http://linkedevents.org/ontology/atPlace> ?o."));
        assert!(q.contains("?s a <http://linkedevents.org/ontology/Event>."));
        assert!(!q.contains("<C>") && !q.contains("<p>"));
    }

    #[test]
    fn count_query_shape() {
        let class = Iri::new("http://C1").unwrap();
        assert_eq!(
            count_query(&class),
            "SELECT COUNT(DISTINCT ?s) AS ?COUNT\nWHERE {  ?s a <http://C1> . }"
        );
    }
}
