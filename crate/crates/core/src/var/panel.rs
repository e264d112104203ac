use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Matrix, Result};

/// T x n observations with one owner per column.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    values: Matrix,
    owners: Vec<String>,
    timestamps: Option<Vec<String>>,
}

/// What to do with empty / `NA` cells when reading CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    Reject,
    /// Drop the whole row so that every column keeps the same time index.
    DropRows,
}

const TIMESTAMP_HEADER: &str = "timestamp";

impl TimeSeriesPanel {
    pub fn new(
        values: Matrix,
        owners: Vec<String>,
        timestamps: Option<Vec<String>>,
    ) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidPanel("panel needs T >= 1 and n >= 1".into()));
        }
        if owners.len() != values.ncols() {
            return Err(Error::shape("panel owners", values.ncols(), owners.len()));
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidPanel(format!(
                "non-finite value at row {}, column {}",
                idx % values.nrows(),
                idx / values.nrows()
            )));
        }
        let mut seen = HashSet::new();
        for o in &owners {
            if !seen.insert(o.as_str()) {
                return Err(Error::InvalidPanel(format!("duplicate owner `{o}`")));
            }
        }
        if let Some(ts) = &timestamps {
            if ts.len() != values.nrows() {
                return Err(Error::shape("panel timestamps", values.nrows(), ts.len()));
            }
            if let Some(w) = ts.windows(2).position(|w| w[0] >= w[1]) {
                return Err(Error::InvalidPanel(format!(
                    "timestamps not increasing at row {}",
                    w + 1
                )));
            }
        }
        Ok(Self {
            values,
            owners,
            timestamps,
        })
    }

    /// Panel with generated owner labels `owner1..ownerN`.
    pub fn from_values(values: Matrix) -> Result<Self> {
        let owners = (1..=values.ncols()).map(|i| format!("owner{i}")).collect();
        Self::new(values, owners, None)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }

    pub fn owners(&self) -> &[String] {
        &self.owners
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).iter().copied().collect()
    }

    /// Same owners and timestamps, new values of identical shape.
    pub fn with_values(&self, values: Matrix) -> Result<Self> {
        if values.shape() != self.values.shape() {
            return Err(Error::shape(
                "panel values",
                format!("{:?}", self.values.shape()),
                format!("{:?}", values.shape()),
            ));
        }
        Self::new(values, self.owners.clone(), self.timestamps.clone())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = Vec::with_capacity(self.n_series() + 1);
        if self.timestamps.is_some() {
            header.push(TIMESTAMP_HEADER);
        }
        header.extend(self.owners.iter().map(String::as_str));
        wtr.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for t in 0..self.len() {
            record.clear();
            if let Some(ts) = &self.timestamps {
                record.push(ts[t].clone());
            }
            record.extend(self.values.row(t).iter().map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(r: R, policy: MissingPolicy) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let has_ts = header
            .first()
            .is_some_and(|h| h.eq_ignore_ascii_case(TIMESTAMP_HEADER));
        let owners: Vec<String> = header[usize::from(has_ts)..].to_vec();
        if owners.is_empty() {
            return Err(Error::Ingestion {
                reason: "no series columns".into(),
                rows: vec![],
            });
        }
        let n = owners.len();
        let mut data = Vec::new();
        let mut timestamps = Vec::new();
        let mut bad_rows = Vec::new();
        let mut missing_rows = Vec::new();
        for (row_idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = row_idx + 1;
            if rec.len() != header.len() {
                bad_rows.push(line);
                continue;
            }
            let mut row = Vec::with_capacity(n);
            let mut missing = false;
            let mut bad = false;
            for field in rec.iter().skip(usize::from(has_ts)) {
                if field.is_empty() || field == "NA" {
                    missing = true;
                    continue;
                }
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => row.push(v),
                    _ => bad = true,
                }
            }
            if bad {
                bad_rows.push(line);
            } else if missing {
                missing_rows.push(line);
            } else {
                data.extend(row);
                if has_ts {
                    timestamps.push(rec[0].to_owned());
                }
            }
        }
        if !bad_rows.is_empty() {
            return Err(Error::Ingestion {
                reason: "non-finite, unparsable or short rows".into(),
                rows: bad_rows,
            });
        }
        if !missing_rows.is_empty() && policy == MissingPolicy::Reject {
            return Err(Error::Ingestion {
                reason: "missing values".into(),
                rows: missing_rows,
            });
        }
        let t = data.len() / n;
        let values = Matrix::from_row_slice(t, n, &data);
        Self::new(values, owners, has_ts.then_some(timestamps))
    }

    pub fn from_csv_path(path: impl AsRef<Path>, policy: MissingPolicy) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f), policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_owners_and_nan() {
        let v = Matrix::zeros(3, 2);
        assert!(TimeSeriesPanel::new(v.clone(), vec!["a".into(), "a".into()], None).is_err());
        let mut bad = v;
        bad[(1, 1)] = f64::NAN;
        assert!(TimeSeriesPanel::from_values(bad).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let v = Matrix::from_row_slice(3, 2, &[0.1, -1.0 / 3.0, 1e-17, 2.5, 7.0, -0.0]);
        let p = TimeSeriesPanel::from_values(v).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = TimeSeriesPanel::read_csv(&buf[..], MissingPolicy::Reject).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn missing_rows_dropped_or_rejected() {
        let csv = "timestamp,a,b\n2011-02-01 08,1,2\n2011-02-01 09,,3\n2011-02-01 10,4,NA\n2011-02-01 11,5,6\n";
        let p = TimeSeriesPanel::read_csv(csv.as_bytes(), MissingPolicy::DropRows).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.timestamps().unwrap()[1], "2011-02-01 11");
        match TimeSeriesPanel::read_csv(csv.as_bytes(), MissingPolicy::Reject) {
            Err(Error::Ingestion { rows, .. }) => assert_eq!(rows, vec![2, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_rows_are_listed() {
        let csv = "a,b\n1,2\ninf,3\n4,x\n";
        match TimeSeriesPanel::read_csv(csv.as_bytes(), MissingPolicy::DropRows) {
            Err(Error::Ingestion { rows, .. }) => assert_eq!(rows, vec![2, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
