//! Feature matrix CSV: `class,property,<feature columns>`, with an optional
//! leading provenance comment line.

use std::io::{Read, Write};

use super::FeatureError;

/// One class-property feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub class: String,
    pub property: String,
    pub values: Vec<f64>,
}

pub fn write_feature_matrix<W: Write>(
    mut out: W,
    feature_names: &[&str],
    rows: &[FeatureRow],
    provenance: Option<&str>,
) -> Result<(), FeatureError> {
    if let Some(line) = provenance {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["class", "property"];
    header.extend_from_slice(feature_names);
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.class.clone(), row.property.clone()];
        record.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a feature matrix; returns the feature column names and the rows.
pub fn read_feature_matrix<R: Read>(
    reader: R,
) -> Result<(Vec<String>, Vec<FeatureRow>), FeatureError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let mut columns = headers.iter();
    if columns.next() != Some("class") || columns.next() != Some("property") {
        return Err(FeatureError::MissingColumn("class"));
    }
    let names: Vec<String> = columns.map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let row_no = i as u64 + 2;
        let record = record?;
        if record.len() != names.len() + 2 {
            return Err(FeatureError::BadRow {
                row: row_no,
                reason: format!("expected {} fields, got {}", names.len() + 2, record.len()),
            });
        }
        let values: Vec<f64> = record
            .iter()
            .skip(2)
            .map(|f| {
                f.parse::<f64>().map_err(|_| FeatureError::BadRow {
                    row: row_no,
                    reason: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<_, _>>()?;
        rows.push(FeatureRow {
            class: record[0].to_string(),
            property: record[1].to_string(),
            values,
        });
    }
    Ok((names, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trips_with_provenance() {
        let rows = vec![
            FeatureRow { class: "c1".into(), property: "p1".into(), values: vec![0.5, 1.0] },
            FeatureRow { class: "c1".into(), property: "p,2".into(), values: vec![-3.25, 0.0] },
        ];
        let mut buf = Vec::new();
        write_feature_matrix(&mut buf, &["f1", "f2"], &rows, Some("kbq test seed=1 mode=raw"))
            .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# kbq test seed=1 mode=raw\n"));
        assert!(text.contains("\"p,2\""), "commas are quoted: {text}");
        let (names, back) = read_feature_matrix(buf.as_slice()).unwrap();
        assert_eq!(names, ["f1", "f2"]);
        assert_eq!(back, rows);
    }

    #[test]
    fn header_is_mandatory() {
        let err = read_feature_matrix("nope,really\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FeatureError::MissingColumn("class")));
    }
}
