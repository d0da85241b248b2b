//! CSV in and out: numeric data matrices (optional header row) and score files.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scoring::ScoreVector;

/// Scientific notation with 12 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Reads a numeric matrix. A first record that does not parse as numbers is taken as a
/// header; any later non-numeric cell is an error.
pub fn read_matrix_csv<R: Read>(input: R) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => rows.push(values),
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(Error::Csv(format!(
                    "non-numeric cell on record {}",
                    line + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    DenseMatrix::from_rows(&rows).map_err(|e| match e {
        Error::Dimension(msg) => Error::Csv(msg),
        other => other,
    })
}

/// Writes `index,score` for every point.
pub fn write_scores_csv<W: Write>(mut out: W, scores: &ScoreVector) -> Result<()> {
    writeln!(out, "index,score")?;
    for (i, s) in scores.values.iter().enumerate() {
        writeln!(out, "{i},{}", format_float(*s))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        let with = read_matrix_csv("a,b\n1,2\n3,4.5\n".as_bytes()).unwrap();
        let without = read_matrix_csv("1,2\n3,4.5\n".as_bytes()).unwrap();
        assert_eq!(with, without);
        assert_eq!(with.row(1), &[3.0, 4.5]);
    }

    #[test]
    fn rejects_bad_cells_and_ragged_rows() {
        assert!(matches!(
            read_matrix_csv("1,2\n3,x\n".as_bytes()),
            Err(Error::Csv(_))
        ));
        assert!(read_matrix_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_matrix_csv("x,y\n".as_bytes()).is_err());
        assert!(matches!(
            read_matrix_csv("1,nan\n".as_bytes()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn scores_file_format() {
        let mut buf = Vec::new();
        let s = ScoreVector {
            values: vec![0.5, 1.0 / 3.0],
            reference: 0,
        };
        write_scores_csv(&mut buf, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,score\n0,5.00000000000e-1\n1,3.33333333333e-1\n"
        );
    }
}
