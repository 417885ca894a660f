//! Dataset CSV format: one header line, one row per sample, LF endings,
//! floats in shortest round-trip form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::analysis::Dataset;
use crate::error::{Error, Result};
use crate::geometry::ShapeKind;
use crate::oracle::Sample;
use crate::sampler::{FeatureVector, FEATURE_COLUMNS, NUM_FEATURES};

pub const LOAD_COLUMN: &str = "thermal_load_kwh_m2";

pub fn header() -> Vec<&'static str> {
    let mut h = vec!["shape"];
    h.extend(FEATURE_COLUMNS);
    h.push(LOAD_COLUMN);
    h
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn write_csv<W: Write>(out: W, ds: &Dataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io_err = |e: csv::Error| Error::InvalidInput(format!("writing CSV: {e}"));
    w.write_record(header()).map_err(io_err)?;
    for r in &ds.rows {
        let mut rec = Vec::with_capacity(NUM_FEATURES + 2);
        rec.push(r.shape.token().to_string());
        rec.extend(r.features.to_array().iter().map(|v| v.to_string()));
        rec.push(r.load.to_string());
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("writing CSV: {e}")))
}

pub fn to_csv_string(ds: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, ds)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Parses a dataset. Malformed text is reported by line, rows that parse
/// but violate sample invariants by 1-based data row.
pub fn read_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let found = rdr.headers().map_err(csv_err)?.clone();
    let expected = header();
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let shape: ShapeKind = rec[0]
            .parse()
            .map_err(|_| parse_err(format!("unknown shape {:?}", &rec[0])))?;
        let mut vals = [0.0; NUM_FEATURES + 1];
        for (j, v) in vals.iter_mut().enumerate() {
            *v = rec[j + 1].parse().map_err(|_| {
                parse_err(format!(
                    "column {}: not a number: {:?}",
                    expected[j + 1],
                    &rec[j + 1]
                ))
            })?;
        }
        let row = i + 1;
        let invalid = |e: Error| Error::InvalidRow {
            row,
            message: e.to_string(),
        };
        let features = FeatureVector::from_array(vals[..NUM_FEATURES].try_into().unwrap());
        features.validate().map_err(invalid)?;
        rows.push(Sample::new(shape, features, vals[NUM_FEATURES]).map_err(invalid)?);
    }
    Dataset::new(rows, None).map_err(|_| Error::Parse {
        line: 2,
        message: "dataset has no rows".into(),
    })
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let text = to_csv_string(ds)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(shape: ShapeKind, load: f64) -> Sample {
        let f = FeatureVector::from_array([
            0.1 + 0.2,
            1.0 / 3.0,
            0.5,
            0.7,
            0.2,
            1.0,
            2000.0,
            1e-7 + 1000.0,
        ]);
        Sample::new(shape, f, load).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let ds = Dataset::new(
            vec![
                sample(ShapeKind::Square, 265.98676208903254),
                sample(ShapeKind::LShape, 1e-3 + 300.0),
            ],
            None,
        )
        .unwrap();
        let text = to_csv_string(&ds).unwrap();
        assert!(text.starts_with(
            "shape,orientation_deg,wwr,shading_depth_m,glazing_u_w_m2k,wall_thickness_m,\
             wall_conductivity_w_mk,wall_density_kg_m3,wall_shc_j_kgk,thermal_load_kwh_m2\n"
        ));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 3);
        let back = read_csv(text.as_bytes()).unwrap();
        for (a, b) in ds.rows.iter().zip(&back.rows) {
            assert_eq!(a.shape, b.shape);
            assert_eq!(a.load.to_bits(), b.load.to_bits());
            for (x, y) in a.features.to_array().iter().zip(b.features.to_array()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn malformed_input_is_located() {
        let good =
            to_csv_string(&Dataset::new(vec![sample(ShapeKind::TShape, 300.0)], None).unwrap())
                .unwrap();
        let bad_num = good.clone() + "u,1,0.2,0,0.7,0.2,1,2000,x,300\n";
        match read_csv(bad_num.as_bytes()).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("wall_shc_j_kgk"), "{message}");
            }
            e => panic!("{e}"),
        }
        let bad_shape = good.clone() + "z,1,0.2,0,0.7,0.2,1,2000,1000,300\n";
        assert!(matches!(
            read_csv(bad_shape.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let short = good.clone() + "u,1,0.2\n";
        assert!(matches!(
            read_csv(short.as_bytes()),
            Err(Error::Parse { .. })
        ));
        let negative = good.clone() + "u,1,0.2,0,0.7,0.2,1,2000,1000,-5\n";
        assert!(matches!(
            read_csv(negative.as_bytes()),
            Err(Error::InvalidRow { row: 2, .. })
        ));
        let wwr = good + "u,1,1.2,0,0.7,0.2,1,2000,1000,300\n";
        assert!(matches!(
            read_csv(wwr.as_bytes()),
            Err(Error::InvalidRow { row: 2, .. })
        ));
        assert!(matches!(
            read_csv("a,b\n1,2\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_dataset(Path::new("/nonexistent/data.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/data.csv"));
        assert_eq!(err.exit_code(), 4);
    }
}
