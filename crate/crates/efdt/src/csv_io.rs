//! CSV streams: comma-separated, header row first, class in the last column.
//! A header may carry a `:nominal` tag (`color:nominal`) to force a column to
//! be nominal; otherwise a column is nominal iff any of its values fails to
//! parse as a finite number. Nominal values and class labels are indexed in
//! order of first appearance.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use efdt_core::{AttributeKind, AttributeSpec, Instance, Schema, SplitEvent, Value};

use crate::{Error, Result};

const NOMINAL_TAG: &str = ":nominal";

fn load_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Load { path: path.to_path_buf(), message: message.into() }
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|e| load_err(path, e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> =
        reader.headers().map_err(|e| load_err(path, e.to_string()))?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(load_err(path, "empty file: missing header row"));
    }
    if header.len() < 2 {
        return Err(load_err(path, "need at least one attribute column and a class column"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| load_err(path, e.to_string()))?;
        if record.len() != header.len() {
            return Err(load_err(
                path,
                format!("line {}: expected {} fields, found {}", i + 2, header.len(), record.len()),
            ));
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(load_err(path, "no data rows"));
    }
    Ok((header, rows))
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn first_appearance<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for v in values {
        if !seen.iter().any(|s| s == v) {
            seen.push(v.to_owned());
        }
    }
    seen
}

/// Loads a CSV file, inferring the schema from its header and values.
pub fn load_csv(path: &Path) -> Result<(Schema, Vec<Instance>)> {
    let (header, rows) = read_rows(path)?;
    let m = header.len() - 1;
    let mut attributes = Vec::with_capacity(m);
    for (i, name) in header[..m].iter().enumerate() {
        let (name, tagged) = match name.strip_suffix(NOMINAL_TAG) {
            Some(base) => (base, true),
            None => (name.as_str(), false),
        };
        let column = || rows.iter().map(|r| r[i].as_str());
        if tagged || column().any(|v| parse_number(v).is_none()) {
            let values = first_appearance(column());
            if values.len() < 2 {
                return Err(load_err(path, format!("nominal column `{name}` has fewer than 2 distinct values")));
            }
            attributes.push(AttributeSpec::nominal(name, values));
        } else {
            attributes.push(AttributeSpec::numeric(name));
        }
    }
    let classes = first_appearance(rows.iter().map(|r| r[m].as_str()));
    let schema = Schema::new(attributes, classes).map_err(|e| load_err(path, e.to_string()))?;
    let instances = rows_to_instances(path, &schema, &rows)?;
    Ok((schema, instances))
}

/// Loads a CSV file against a known schema. Header names must match the
/// schema (tags ignored); unknown values and labels are errors.
pub fn load_csv_with_schema(path: &Path, schema: &Schema) -> Result<Vec<Instance>> {
    let (header, rows) = read_rows(path)?;
    if header.len() != schema.attribute_count() + 1 {
        return Err(load_err(
            path,
            format!("header has {} columns, schema expects {}", header.len(), schema.attribute_count() + 1),
        ));
    }
    for (h, a) in header.iter().zip(schema.attributes()) {
        let h = h.strip_suffix(NOMINAL_TAG).unwrap_or(h);
        if h != a.name {
            return Err(load_err(path, format!("column `{h}` does not match schema attribute `{}`", a.name)));
        }
    }
    rows_to_instances(path, schema, &rows)
}

fn rows_to_instances(path: &Path, schema: &Schema, rows: &[Vec<String>]) -> Result<Vec<Instance>> {
    let m = schema.attribute_count();
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2;
            let values = schema
                .attributes()
                .iter()
                .zip(row)
                .map(|(a, raw)| match &a.kind {
                    AttributeKind::Nominal { values } => {
                        values.iter().position(|v| v == raw).map(|j| Value::Nominal(j as u32)).ok_or_else(|| {
                            load_err(path, format!("line {line}: unknown value `{raw}` for `{}`", a.name))
                        })
                    }
                    AttributeKind::Numeric => parse_number(raw).map(Value::Numeric).ok_or_else(|| {
                        load_err(path, format!("line {line}: `{raw}` is not a number for `{}`", a.name))
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            let label = schema
                .class_names()
                .iter()
                .position(|c| *c == row[m])
                .ok_or_else(|| load_err(path, format!("line {line}: unknown class `{}`", row[m])))?;
            Ok(Instance::new(values, label))
        })
        .collect()
}

/// Writes instances in the same CSV format, tagging nominal columns.
pub fn write_stream_csv<W: Write>(
    out: W,
    schema: &Schema,
    instances: impl IntoIterator<Item = Instance>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = schema
        .attributes()
        .iter()
        .map(|a| if a.is_nominal() { format!("{}{NOMINAL_TAG}", a.name) } else { a.name.clone() })
        .collect();
    header.push("class".into());
    w.write_record(&header)?;
    for inst in instances {
        let mut record: Vec<String> = schema
            .attributes()
            .iter()
            .zip(&inst.values)
            .map(|(a, v)| match (&a.kind, v) {
                (AttributeKind::Nominal { values }, Value::Nominal(j)) => values[*j as usize].clone(),
                (_, Value::Numeric(x)) => x.to_string(),
                (_, Value::Nominal(j)) => j.to_string(),
            })
            .collect();
        record.push(schema.class_names()[inst.label].clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn attr_name(schema: &Schema, test: Option<efdt_core::SplitTest>) -> String {
    test.map(|t| schema.attribute(t.attribute()).name.clone()).unwrap_or_default()
}

/// Split-event log as `timestep,node_id,event,old_attr,new_attr`; a missing
/// attribute (leaf before a split, leaf after a kill) is an empty field.
pub fn write_events_csv<W: Write>(out: W, schema: &Schema, events: &[SplitEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestep", "node_id", "event", "old_attr", "new_attr"])?;
    for e in events {
        w.write_record([
            e.timestep.to_string(),
            e.node_id.to_string(),
            e.kind.as_str().to_owned(),
            attr_name(schema, e.old),
            attr_name(schema, e.new),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn create(path: &Path) -> Result<io::BufWriter<File>> {
    File::create(path).map(io::BufWriter::new).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use efdt_core::SplitEventKind;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn numeric_columns_are_inferred() {
        let f = write_tmp("x,y,label\n1.5,2,a\n-3,0.25,b\n4,1e3,a\n");
        let (schema, data) = load_csv(f.path()).unwrap();
        assert_eq!(schema.attribute_count(), 2);
        assert!(schema.attributes().iter().all(|a| !a.is_nominal()));
        assert_eq!(schema.class_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(data.len(), 3);
        assert_eq!(data[1], Instance::new(vec![Value::Numeric(-3.0), Value::Numeric(0.25)], 1));
    }

    #[test]
    fn nominal_tag_and_first_appearance_indexing() {
        let f = write_tmp("color:nominal,size,class\nred,1,no\nblue,2,yes\nred,3,yes\n");
        let (schema, data) = load_csv(f.path()).unwrap();
        let color = schema.attribute(0);
        assert_eq!(color.name, "color");
        assert_eq!(color.value_count(), Some(2));
        assert_eq!(data[1].values[0], Value::Nominal(1));
        // tag forces numbers to be nominal too
        let f = write_tmp("n:nominal,class\n1,a\n2,b\n1,a\n");
        let (schema, _) = load_csv(f.path()).unwrap();
        assert!(schema.attribute(0).is_nominal());
        // untagged non-numeric values make a column nominal
        let f = write_tmp("w,class\n1,a\nx,b\n");
        assert!(load_csv(f.path()).unwrap().0.attribute(0).is_nominal());
    }

    #[test]
    fn load_errors_are_descriptive() {
        let empty = write_tmp("");
        assert!(matches!(load_csv(empty.path()), Err(Error::Load { .. })));
        let header_only = write_tmp("a,class\n");
        assert!(load_csv(header_only.path()).unwrap_err().to_string().contains("no data rows"));
        let ragged = write_tmp("a,b,class\n1,2,x\n1,y\n");
        let msg = load_csv(ragged.path()).unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("expected 3 fields"), "{msg}");
        let one_class = write_tmp("a,class\n1,x\n2,x\n");
        assert!(load_csv(one_class.path()).is_err());
        assert!(load_csv(Path::new("/nonexistent/file.csv")).is_err());
    }

    #[test]
    fn unknown_values_against_schema() {
        let schema = Schema::uniform_nominal(1, 2, 2).unwrap();
        let f = write_tmp("a0:nominal,class\nv0,c1\nv2,c0\n");
        let msg = load_csv_with_schema(f.path(), &schema).unwrap_err().to_string();
        assert!(msg.contains("unknown value `v2`"), "{msg}");
        let f = write_tmp("a0,class\nv0,c9\n");
        assert!(load_csv_with_schema(f.path(), &schema).unwrap_err().to_string().contains("unknown class"));
        let f = write_tmp("zz,class\nv0,c0\n");
        assert!(load_csv_with_schema(f.path(), &schema).is_err());
    }

    #[test]
    fn events_format() {
        let schema = Schema::uniform_nominal(2, 2, 2).unwrap();
        let t0 = efdt_core::SplitTest::Nominal { attribute: 0 };
        let t1 = efdt_core::SplitTest::Nominal { attribute: 1 };
        let events = [
            SplitEvent { timestep: 200, node_id: 0, kind: SplitEventKind::Split, old: None, new: Some(t0) },
            SplitEvent { timestep: 4200, node_id: 0, kind: SplitEventKind::Replace, old: Some(t0), new: Some(t1) },
            SplitEvent { timestep: 6200, node_id: 0, kind: SplitEventKind::Kill, old: Some(t1), new: None },
        ];
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &schema, &events).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "timestep,node_id,event,old_attr,new_attr\n200,0,split,,a0\n4200,0,replace,a0,a1\n6200,0,kill,a1,\n"
        );
    }
}
