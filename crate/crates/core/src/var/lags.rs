use serde::{Deserialize, Serialize};

use super::TimeSeriesPanel;
use crate::{Error, Matrix, Result};

/// Strictly increasing positive lags, e.g. `[1, 2, 24]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LagSpec {
    lags: Vec<usize>,
}

impl LagSpec {
    pub fn new(lags: Vec<usize>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::InvalidLag("lag list is empty".into()));
        }
        if lags[0] == 0 {
            return Err(Error::InvalidLag("lags must be positive".into()));
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLag(format!(
                "lags must be strictly increasing, got {lags:?}"
            )));
        }
        Ok(Self { lags })
    }

    /// Lags `1..=p`.
    pub fn consecutive(p: usize) -> Result<Self> {
        Self::new((1..=p).collect())
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    /// Number of lags, `p`.
    pub fn count(&self) -> usize {
        self.lags.len()
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().expect("non-empty by construction")
    }

    pub fn is_consecutive(&self) -> bool {
        self.lags.iter().enumerate().all(|(q, &l)| l == q + 1)
    }
}

impl TryFrom<Vec<usize>> for LagSpec {
    type Error = Error;

    fn try_from(lags: Vec<usize>) -> Result<Self> {
        Self::new(lags)
    }
}

impl From<LagSpec> for Vec<usize> {
    fn from(spec: LagSpec) -> Self {
        spec.lags
    }
}

/// Regression form `Y = Z B + E` of a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct LagEmbedding {
    pub z: Matrix,
    pub y: Matrix,
    pub lags: LagSpec,
    pub n_series: usize,
}

pub fn build_lag_embedding(panel: &TimeSeriesPanel, lags: &LagSpec) -> Result<LagEmbedding> {
    embed_values(panel.values(), lags)
}

pub(crate) fn embed_values(values: &Matrix, lags: &LagSpec) -> Result<LagEmbedding> {
    let (t_len, n) = values.shape();
    let l_max = lags.max_lag();
    if l_max >= t_len {
        return Err(Error::InvalidLag(format!(
            "max lag {l_max} must be below panel length {t_len}"
        )));
    }
    let rows = t_len - l_max;
    let p = lags.count();
    let z = Matrix::from_fn(rows, n * p, |t, c| {
        let (q, i) = (c / n, c % n);
        values[(t + l_max - lags.lags()[q], i)]
    });
    let y = values.rows(l_max, rows).into_owned();
    Ok(LagEmbedding {
        z,
        y,
        lags: lags.clone(),
        n_series: n,
    })
}

impl LagEmbedding {
    pub fn rows(&self) -> usize {
        self.y.nrows()
    }

    /// Column indices of `Z` belonging to series `i`, in lag order.
    pub fn owner_columns(&self, i: usize) -> Vec<usize> {
        (0..self.lags.count())
            .map(|q| q * self.n_series + i)
            .collect()
    }

    /// `Z_{A_i}`: the lags of series `i` only.
    pub fn owner_block(&self, i: usize) -> Matrix {
        self.z.select_columns(self.owner_columns(i).iter())
    }

    pub fn owner_target(&self, i: usize) -> Matrix {
        Matrix::from_column_slice(self.y.nrows(), 1, self.y.column(i).as_slice())
    }

    /// Rows of `B` belonging to series `i`, i.e. `B_{A_i}`.
    pub fn owner_coefficients(&self, b: &Matrix, i: usize) -> Matrix {
        b.select_rows(self.owner_columns(i).iter())
    }

    /// Inverse of [`Self::owner_coefficients`] across all owners.
    pub fn stack_owner_coefficients(&self, blocks: &[Matrix]) -> Result<Matrix> {
        let n = self.n_series;
        let p = self.lags.count();
        if blocks.len() != n {
            return Err(Error::shape("owner coefficient blocks", n, blocks.len()));
        }
        let cols = blocks[0].ncols();
        let mut b = Matrix::zeros(n * p, cols);
        for (i, blk) in blocks.iter().enumerate() {
            if blk.shape() != (p, cols) {
                return Err(Error::shape(
                    "owner coefficient block",
                    format!("({p}, {cols})"),
                    format!("{:?}", blk.shape()),
                ));
            }
            for q in 0..p {
                b.row_mut(q * n + i).copy_from(&blk.row(q));
            }
        }
        Ok(b)
    }

    /// Rebuilds the source panel from `Y` plus the first `L` rows held in `Z`.
    /// Only defined for consecutive lags, where every early value appears in row 0.
    pub fn reconstruct_panel(&self) -> Result<Matrix> {
        if !self.lags.is_consecutive() {
            return Err(Error::InvalidLag(
                "reconstruction needs consecutive lags".into(),
            ));
        }
        let n = self.n_series;
        let l_max = self.lags.max_lag();
        let rows = self.rows();
        let mut out = Matrix::zeros(rows + l_max, n);
        if rows == 0 {
            return Ok(out);
        }
        for s in 0..l_max {
            // panel row s sits in Z row 0 at lag l_max - s
            let q = l_max - s - 1;
            for i in 0..n {
                out[(s, i)] = self.z[(0, q * n + i)];
            }
        }
        out.rows_mut(l_max, rows).copy_from(&self.y);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lags() {
        assert!(LagSpec::new(vec![]).is_err());
        assert!(LagSpec::new(vec![0, 1]).is_err());
        assert!(LagSpec::new(vec![2, 2]).is_err());
        assert!(LagSpec::new(vec![3, 1]).is_err());
        assert!(LagSpec::new(vec![1, 2, 24]).is_ok());
    }

    #[test]
    fn single_series_shift() {
        let panel = TimeSeriesPanel::from_values(Matrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]))
            .unwrap();
        let e = build_lag_embedding(&panel, &LagSpec::consecutive(1).unwrap()).unwrap();
        assert_eq!(e.y.as_slice(), &[2.0, 3.0]);
        assert_eq!(e.z.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn lag_beyond_panel_is_rejected() {
        let panel = TimeSeriesPanel::from_values(Matrix::zeros(3, 1)).unwrap();
        assert!(matches!(
            build_lag_embedding(&panel, &LagSpec::new(vec![3]).unwrap()),
            Err(Error::InvalidLag(_))
        ));
    }

    #[test]
    fn two_series_layout() {
        // z_t = [y_{t-1}, y_{t-2}]
        let v = Matrix::from_fn(5, 2, |t, i| (10 * t + i) as f64);
        let e = embed_values(&v, &LagSpec::consecutive(2).unwrap()).unwrap();
        assert_eq!(
            e.z.row(0).iter().copied().collect::<Vec<_>>(),
            vec![10.0, 11.0, 0.0, 1.0]
        );
        assert_eq!(
            e.y.row(0).iter().copied().collect::<Vec<_>>(),
            vec![20.0, 21.0]
        );
        assert_eq!(
            e.owner_block(1).row(0).iter().copied().collect::<Vec<_>>(),
            vec![11.0, 1.0]
        );
    }

    #[test]
    fn owner_coefficient_split_round_trips() {
        let v = Matrix::from_fn(8, 3, |t, i| (t * 3 + i) as f64);
        let e = embed_values(&v, &LagSpec::consecutive(2).unwrap()).unwrap();
        let b = Matrix::from_fn(6, 3, |r, c| (r * 3 + c) as f64);
        let blocks: Vec<_> = (0..3).map(|i| e.owner_coefficients(&b, i)).collect();
        assert_eq!(e.stack_owner_coefficients(&blocks).unwrap(), b);
        let sum: Matrix = (0..3).fold(Matrix::zeros(6, 3), |acc, i| {
            acc + e.owner_block(i) * &blocks[i]
        });
        assert!((sum - &e.z * &b).norm() < 1e-12);
    }
}
