use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A header plus string records.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch {
                expected: self.header.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("records are UTF-8")
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path.display().to_string(), 0, format!("{other:?}")),
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    table
        .write_csv(BufWriter::new(f))
        .map_err(|e| csv_error(path, e))
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rd
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        rows.push(
            rec.map_err(|e| csv_error(path, e))?
                .iter()
                .map(String::from)
                .collect(),
        );
    }
    Ok(Table { header, rows })
}

/// Two whitespace-separated columns, one point per line.
pub fn emit_plotdata(series: &[(f64, f64)], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for (x, y) in series {
        writeln!(w, "{x:.12e} {y:.12e}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_plotdata(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(origin.clone(), i + 1, format!("'{s}' is not a number")))
        };
        if cols.len() != 2 {
            return Err(Error::parse(origin.clone(), i + 1, "expected two columns"));
        }
        out.push((num(cols[0])?, num(cols[1])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_csv(&Table::new(["a", "b"]), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
        assert_eq!(read_csv(&path).unwrap(), Table::new(["a", "b"]));
    }

    #[test]
    fn quoting_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(["name", "value"]);
        t.push(vec!["x, \"y\"".into(), "1.5".into()]).unwrap();
        assert!(t.push(vec!["short".into()]).is_err());
        emit_csv(&t, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), t);
    }

    #[test]
    fn plot_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.dat");
        let s = vec![(1.0, 0.25), (2.0, -3.5e-9)];
        emit_plotdata(&s, &path).unwrap();
        assert_eq!(read_plotdata(&path).unwrap(), s);
    }

    #[test]
    fn missing_directory_names_the_path() {
        let err = emit_csv(&Table::new(["a"]), Path::new("/nonexistent/dir/t.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/dir/t.csv"));
    }
}
