//! Owner 2 recovering owner 1's lag block and target from the messages of
//! the two-party product protocol used to assemble `Z^T Z` and `Z^T Y`.

use super::predict::Attacker;
use super::report::{AttackStatus, BreachReport};
use crate::linalg::{condition_number, derive_seed, max_abs_diff, shape_of};
use crate::smc::{ac_two_party, Roles, TwoPartyOptions, LABEL_A_M_RIGHT, LABEL_MINV_TOP_C};
use crate::transcript::{Party, ProtocolTranscript};
use crate::{Error, Matrix, Result};

const MAX_STACKED_CONDITION: f64 = 1e12;

/// Distinct values in a `T x p` lag block of one series with consecutive lags.
pub fn hankel_unique_values(t: usize, p: usize) -> usize {
    if t == 0 || p == 0 {
        0
    } else {
        t + p - 1
    }
}

/// The three product runs between owner 1 (`Owner(0)`) and owner 2 (`Owner(1)`).
#[derive(Debug, Clone)]
pub struct ThreeRunTranscripts {
    /// `Z_1^T Z_2`, owner 1 holds `A = Z_1^T`.
    pub zz: ProtocolTranscript,
    /// `Z_1^T Y_2`, owner 1 holds `A = Z_1^T`.
    pub zy: ProtocolTranscript,
    /// `Z_2^T Y_1`, owner 1 holds `C = Y_1`.
    pub y: ProtocolTranscript,
    /// The jointly generated masks of the three runs, as known to owner 2.
    pub masks: Option<[Matrix; 3]>,
}

impl ThreeRunTranscripts {
    pub fn run(z1: &Matrix, y1: &Matrix, z2: &Matrix, y2: &Matrix, seed: u64) -> Result<Self> {
        let t = z1.nrows();
        if y1.shape() != (t, 1) || z2.nrows() != t || y2.shape() != (t, 1) {
            return Err(Error::shape(
                "protocol inputs",
                format!("{t} rows, single target columns"),
                format!(
                    "Y1 {}, Z2 {}, Y2 {}",
                    shape_of(y1),
                    shape_of(z2),
                    shape_of(y2)
                ),
            ));
        }
        let forward = TwoPartyOptions::default();
        let backward = TwoPartyOptions {
            roles: Roles {
                a_holder: Party::Owner(1),
                c_holder: Party::Owner(0),
            },
            ..TwoPartyOptions::default()
        };
        let z1t = z1.transpose();
        let zz = ac_two_party(&z1t, z2, &forward, derive_seed(seed, 1))?;
        let zy = ac_two_party(&z1t, y2, &forward, derive_seed(seed, 2))?;
        let yy = ac_two_party(&z2.transpose(), y1, &backward, derive_seed(seed, 3))?;
        let masks = match (zz.mask, zy.mask, yy.mask) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        Ok(Self {
            zz: zz.transcript,
            zy: zy.transcript,
            y: yy.transcript,
            masks,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolRecovery {
    pub z: Option<Matrix>,
    pub y: Option<Matrix>,
    pub status: AttackStatus,
    pub z_error: Option<f64>,
    pub y_error: Option<f64>,
    /// Values owner 1 sent across the three runs.
    pub observed_values: usize,
    pub unique_values: usize,
    pub detail: String,
}

impl ProtocolRecovery {
    fn inconclusive(observed_values: usize, unique_values: usize, detail: String) -> Self {
        Self {
            z: None,
            y: None,
            status: AttackStatus::Inconclusive,
            z_error: None,
            y_error: None,
            observed_values,
            unique_values,
            detail,
        }
    }

    pub fn to_report(&self) -> BreachReport {
        let error = match (self.z_error, self.y_error) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        BreachReport {
            attack: "linear_algebra_protocol".into(),
            attacker: Attacker::SemiTrustedOwner,
            noise: "none".into(),
            prediction: None,
            iterations_used: 3,
            equations: self.observed_values as u128,
            unknowns: self.unique_values as u128 + 1,
            structured_unknowns: self.unique_values as u128 + 1,
            status: self.status,
            solved: self.status == AttackStatus::Solved,
            reconstruction_error: error,
            residual: None,
            starts: 0,
            converged_starts: 0,
            distinct_solutions: 0,
            detail: self.detail.clone(),
            recovered: self
                .y
                .as_ref()
                .map(|y| vec![(0, y.iter().copied().collect())])
                .unwrap_or_default(),
        }
    }
}

/// `Z_1^T = [X_1 X_2] [M_right, M*_right]^{-1}`; the first `T - 1` entries of
/// `Y_1` follow from the lag ties and the last one from `(M**^{-1})_top Y_1`.
///
/// `truth = (Z_1, Y_1)` is used only for the error columns; `Solved` needs
/// both errors within `tol` when it is supplied.
pub fn attack_linear_algebra_protocol(
    transcripts: &ThreeRunTranscripts,
    truth: Option<(&Matrix, &Matrix)>,
    tol: f64,
) -> Result<ProtocolRecovery> {
    let owner1 = Party::Owner(0);
    let x1 = transcripts.zz.require(owner1, LABEL_A_M_RIGHT)?;
    let x2 = transcripts.zy.require(owner1, LABEL_A_M_RIGHT)?;
    let v = transcripts.y.require(owner1, LABEL_MINV_TOP_C)?;
    let (p, half) = (x1.rows, x1.cols);
    let t = 2 * half;
    let observed = x1.value_count() + x2.value_count() + v.value_count();
    let unique = hankel_unique_values(t, p);
    if (x2.rows, x2.cols) != (p, half) || (v.rows, v.cols) != (half, 1) {
        return Err(Error::shape(
            "protocol messages",
            format!("{p}x{half}, {p}x{half}, {half}x1"),
            format!("{}x{}, {}x{}", x2.rows, x2.cols, v.rows, v.cols),
        ));
    }
    let Some([m, m_star, m_star2]) = &transcripts.masks else {
        return Ok(ProtocolRecovery::inconclusive(
            observed,
            unique,
            format!(
                "masks unknown: {} values observed for {} unknowns",
                observed,
                t * p + t
            ),
        ));
    };
    let (Some(x1), Some(x2), Some(v)) = (x1.matrix(), x2.matrix(), v.matrix()) else {
        return Err(Error::MissingMessage(
            "values (shapes-only transcript)".into(),
        ));
    };
    if m.shape() != (t, t) || m_star.shape() != (t, t) || m_star2.shape() != (t, t) {
        return Err(Error::shape(
            "protocol masks",
            format!("{t}x{t}"),
            shape_of(m),
        ));
    }

    let mut stacked = Matrix::zeros(t, t);
    stacked
        .columns_mut(0, half)
        .copy_from(&m.columns(half, half));
    stacked
        .columns_mut(half, half)
        .copy_from(&m_star.columns(half, half));
    if !(condition_number(&stacked) < MAX_STACKED_CONDITION) {
        return Ok(ProtocolRecovery::inconclusive(
            observed,
            unique,
            "stacked mask is singular".into(),
        ));
    }
    let mut xs = Matrix::zeros(p, t);
    xs.columns_mut(0, half).copy_from(&x1);
    xs.columns_mut(half, half).copy_from(&x2);
    // Z_1 = S^{-T} [X_1 X_2]^T
    let Some(z) = stacked.transpose().lu().solve(&xs.transpose()) else {
        return Ok(ProtocolRecovery::inconclusive(
            observed,
            unique,
            "stacked mask is singular".into(),
        ));
    };

    // s[i] = Z[r, q] for r + p - 1 - q = i, averaged over the ties
    let mut s = vec![0.0; t + p];
    let mut hits = vec![0usize; t + p];
    for r in 0..t {
        for q in 0..p {
            s[r + p - 1 - q] += z[(r, q)];
            hits[r + p - 1 - q] += 1;
        }
    }
    for (v, h) in s.iter_mut().zip(&hits).take(t + p - 1) {
        *v /= *h as f64;
    }
    let tie_spread = (0..t)
        .flat_map(|r| (0..p).map(move |q| (r, q)))
        .map(|(r, q)| (z[(r, q)] - s[r + p - 1 - q]).abs())
        .fold(0.0, f64::max);

    let inv = m_star2
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("third-run mask"))?;
    let top = inv.rows(0, half);
    let mut y = Matrix::zeros(t, 1);
    for r in 0..t - 1 {
        y[(r, 0)] = s[r + p];
    }
    let g = top.column(t - 1);
    let gg = g.norm_squared();
    if !(gg > 0.0) {
        return Ok(ProtocolRecovery::inconclusive(
            observed,
            unique,
            "last target value is masked out".into(),
        ));
    }
    let rest = v - top * &y;
    y[(t - 1, 0)] = g.dot(&rest.column(0)) / gg;

    let (z_error, y_error) = match truth {
        Some((zt, yt)) => (Some(max_abs_diff(&z, zt)), Some(max_abs_diff(&y, yt))),
        None => (None, None),
    };
    let ok = z_error.is_none_or(|e| e < tol) && y_error.is_none_or(|e| e < tol);
    Ok(ProtocolRecovery {
        z: Some(z),
        y: Some(y),
        status: if ok {
            AttackStatus::Solved
        } else {
            AttackStatus::Mismatch
        },
        z_error,
        y_error,
        observed_values: observed,
        unique_values: unique,
        detail: format!("lag-tie spread {tie_spread:.2e}"),
    })
}
