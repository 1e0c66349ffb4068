//! Manual-validation annotation files: `class,property,task,label` CSV.
//! Labels are the five-way cardinality vocabulary plus the range kinds;
//! unknown labels are rejected at load time.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    MinCard,
    MaxCard,
    Range,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::MinCard => "min_card",
            Task::MaxCard => "max_card",
            Task::Range => "range",
        }
    }

    /// Valid annotation labels for the task.
    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            Task::MinCard => &["MIN0", "MIN1", "MIN1+"],
            Task::MaxCard => &["MAX1", "MAX1+"],
            Task::Range => &["IRI", "LIT"],
        }
    }

    /// Binary label used for training; MIN1 folds into MIN1+.
    pub fn training_label(&self, label: &str) -> String {
        if *self == Task::MinCard && label == "MIN1" {
            "MIN1+".to_string()
        } else {
            label.to_string()
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_card" => Ok(Task::MinCard),
            "max_card" => Ok(Task::MaxCard),
            "range" => Ok(Task::Range),
            other => Err(format!("unknown task {other:?} (expected min_card, max_card or range)")),
        }
    }
}

/// One annotated class-property pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub class: String,
    pub property: String,
    pub task: Task,
    pub label: String,
}

impl Annotation {
    pub fn new(
        class: impl Into<String>,
        property: impl Into<String>,
        task: Task,
        label: impl Into<String>,
    ) -> Result<Self, FeatureError> {
        let label = label.into();
        if !task.labels().contains(&label.as_str()) {
            return Err(FeatureError::UnknownLabel { row: 0, label, task });
        }
        Ok(Annotation { class: class.into(), property: property.into(), task, label })
    }
}

/// Read annotations from CSV with a mandatory `class,property,task,label`
/// header. Leading `#` comment lines are skipped.
pub fn read_annotations<R: Read>(reader: R) -> Result<Vec<Annotation>, FeatureError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let index_of = |name: &'static str| -> Result<usize, FeatureError> {
        headers.iter().position(|h| h == name).ok_or(FeatureError::MissingColumn(name))
    };
    let class_at = index_of("class")?;
    let property_at = index_of("property")?;
    let task_at = index_of("task")?;
    let label_at = index_of("label")?;

    let mut out = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let row = i as u64 + 2; // header is row 1
        let record = record?;
        let field = |at: usize| -> Result<&str, FeatureError> {
            record.get(at).ok_or(FeatureError::BadRow {
                row,
                reason: format!("expected at least {} fields", at + 1),
            })
        };
        let task = Task::from_str(field(task_at)?)
            .map_err(|reason| FeatureError::BadRow { row, reason })?;
        let label = field(label_at)?.to_string();
        if !task.labels().contains(&label.as_str()) {
            return Err(FeatureError::UnknownLabel { row, label, task });
        }
        out.push(Annotation {
            class: field(class_at)?.to_string(),
            property: field(property_at)?.to_string(),
            task,
            label,
        });
    }
    Ok(out)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>, FeatureError> {
    let file = fs::File::open(path)?;
    read_annotations(std::io::BufReader::new(file))
}

pub fn write_annotations<W: Write>(writer: W, rows: &[Annotation]) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["class", "property", "task", "label"])?;
    for a in rows {
        w.write_record([a.class.as_str(), a.property.as_str(), a.task.as_str(), &a.label])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_annotations(path: impl AsRef<Path>, rows: &[Annotation]) -> Result<(), FeatureError> {
    let file = fs::File::create(path)?;
    write_annotations(std::io::BufWriter::new(file), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_rows() {
        let csv = "class,property,task,label\n\
                   dbo:Person,dbo:deathDate,min_card,MIN0\n\
                   dbo:Person,dbo:deathDate,max_card,MAX1+\n\
                   dbo:Person,dbo:name,range,LIT\n";
        let rows = read_annotations(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].task, Task::MinCard);
        assert_eq!(rows[0].label, "MIN0");
    }

    #[test]
    fn unknown_label_is_rejected_with_row() {
        let csv = "class,property,task,label\nc,p,min_card,MIN2\n";
        let err = read_annotations(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, FeatureError::UnknownLabel { row: 2, .. }), "{err}");
    }

    #[test]
    fn missing_column_is_reported() {
        let csv = "class,property,label\nc,p,MIN0\n";
        let err = read_annotations(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, FeatureError::MissingColumn("task")));
    }

    #[test]
    fn round_trip_preserves_rows() {
        let rows: Vec<Annotation> = (0..174)
            .map(|i| {
                Annotation::new(
                    "http://dbpedia.org/ontology/Person",
                    format!("http://dbpedia.org/property/p{i}"),
                    Task::MinCard,
                    if i % 3 == 0 { "MIN0" } else { "MIN1+" },
                )
                .unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_annotations(&mut buf, &rows).unwrap();
        let back = read_annotations(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 174);
        assert_eq!(back, rows);
    }

    #[test]
    fn label_vocabulary_is_task_scoped() {
        // IRI is a range label, not a cardinality label
        let csv = "class,property,task,label\nc,p,min_card,IRI\n";
        assert!(read_annotations(csv.as_bytes()).is_err());
        assert!(Annotation::new("c", "p", Task::Range, "IRI").is_ok());
    }
}
