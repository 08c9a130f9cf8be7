//! CSV point ingestion and export.
//!
//! One point per row with `d` numeric columns, optionally followed by a
//! `weight` column. A first row that does not parse as numbers is a header.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointSet;

pub fn read_points<R: Read>(reader: R, weight_column: bool) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::input(format!("row {}: {e}", line + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::input("no points in CSV input"));
    }
    if weight_column {
        let mut weights = Vec::with_capacity(rows.len());
        for r in rows.iter_mut() {
            if r.len() < 2 {
                return Err(Error::input("weight column requested but rows have fewer than 2 columns"));
            }
            weights.push(r.pop().unwrap());
        }
        PointSet::from_rows(&rows)?.with_weights(weights)
    } else {
        PointSet::from_rows(&rows)
    }
}

pub fn read_points_file(path: &Path, weight_column: bool) -> Result<PointSet> {
    let f = std::fs::File::open(path)?;
    read_points(std::io::BufReader::new(f), weight_column)
}

/// Writes `d` coordinate columns followed by a `weight` column.
pub fn write_weighted_points<W: Write>(writer: W, points: &PointSet, weights: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..points.dim()).map(|c| format!("x{c}")).collect();
    header.push("weight".into());
    w.write_record(&header)?;
    for (p, wt) in points.points().zip(weights) {
        let mut rec: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        rec.push(wt.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points<W: Write>(writer: W, points: &PointSet, with_weights: bool) -> Result<()> {
    if with_weights {
        return write_weighted_points(writer, points, points.weights());
    }
    let mut w = csv::Writer::from_writer(writer);
    for p in points.points() {
        w.write_record(p.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_header_and_weights() {
        let src = "x,y,weight\n0,0,1\n2,0,3.5\n";
        let p = read_points(src.as_bytes(), true).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.dim(), 2);
        assert_eq!(p.weights(), &[1.0, 3.5]);
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert!(read_points("1,2\n3\n".as_bytes(), false).is_err());
        assert!(read_points("1,2\nfoo,3\n".as_bytes(), false).is_err());
        assert!(read_points("".as_bytes(), false).is_err());
        assert!(read_points("1,2\n3,-1\n".as_bytes(), true).is_err());
    }

    #[test]
    fn weighted_export_round_trips() {
        let p = PointSet::from_rows(&[vec![0.5, -1.0], vec![2.0, 3.0]])
            .unwrap()
            .with_weights(vec![0.25, 4.0])
            .unwrap();
        let mut buf = Vec::new();
        write_points(&mut buf, &p, true).unwrap();
        let back = read_points(buf.as_slice(), true).unwrap();
        assert_eq!(back, p);
    }
}
