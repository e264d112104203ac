use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    condition_number, gaussian_matrix, lstsq, random_invertible, random_orthogonal, rng_from_seed,
    shape_of,
};
use crate::transcript::{Party, ProtocolTranscript, TranscriptMode};
use crate::{Error, Matrix, Result};

/// Condition-number gate applied to every generated square key.
pub const DEFAULT_MASK_CONDITION: f64 = 1e8;

const KEY_RETRIES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    /// One `k x T_r` block per record owner.
    PreRecord,
    /// `[N_z, N_y]`
    PostFeature,
    /// `[M, N, r]`
    RidgeOutsource,
}

/// Private random matrices of one masking scheme. Never written to a
/// [`ProtocolTranscript`]; the serialized form carries `"secret": true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingKey {
    pub kind: MaskKind,
    pub matrices: Vec<Matrix>,
    pub condition_bound: f64,
    #[serde(default = "secret_marker")]
    pub secret: bool,
}

fn secret_marker() -> bool {
    true
}

impl MaskingKey {
    fn build(kind: MaskKind, matrices: Vec<Matrix>, condition_bound: f64) -> Result<Self> {
        for m in &matrices {
            if m.is_square() && m.nrows() > 0 && condition_number(m) >= condition_bound {
                return Err(Error::Singular("masking key"));
            }
        }
        Ok(Self {
            kind,
            matrices,
            condition_bound,
            secret: true,
        })
    }

    /// Blocks `M_{A_r}` (`k x T_r`) for record owners with `record_counts[r]` rows.
    /// With `orthogonal`, `k` must equal the total record count and the stacked
    /// `[M_{A_1}, ..., M_{A_n}]` is a Haar orthogonal matrix.
    pub fn pre_record<R: Rng + ?Sized>(
        record_counts: &[usize],
        k: usize,
        orthogonal: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let total: usize = record_counts.iter().sum();
        let stacked = if orthogonal {
            if k != total {
                return Err(Error::param(
                    "k",
                    format!("orthogonal masks need k = T = {total}"),
                ));
            }
            random_orthogonal(k, rng)
        } else if k == total {
            random_invertible(k, DEFAULT_MASK_CONDITION, rng)?
        } else {
            gaussian_matrix(k, total, 1.0, rng)
        };
        let mut blocks = Vec::with_capacity(record_counts.len());
        let mut start = 0;
        for &c in record_counts {
            blocks.push(stacked.columns(start, c).into_owned());
            start += c;
        }
        Self::build(MaskKind::PreRecord, blocks, DEFAULT_MASK_CONDITION)
    }

    pub fn post_feature<R: Rng + ?Sized>(s: usize, w: usize, rng: &mut R) -> Result<Self> {
        let nz = random_invertible(s, DEFAULT_MASK_CONDITION, rng)?;
        let ny = random_invertible(w, DEFAULT_MASK_CONDITION, rng)?;
        Self::build(MaskKind::PostFeature, vec![nz, ny], DEFAULT_MASK_CONDITION)
    }

    pub fn ridge<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        let mm = random_invertible(m, DEFAULT_MASK_CONDITION, rng)?;
        let nn = random_invertible(m, DEFAULT_MASK_CONDITION, rng)?;
        let r = gaussian_matrix(m, 1, 1.0, rng);
        Self::build(
            MaskKind::RidgeOutsource,
            vec![mm, nn, r],
            DEFAULT_MASK_CONDITION,
        )
    }

    /// Ridge key from explicit `M`, `N`, `r`.
    pub fn ridge_from(m: Matrix, n: Matrix, r: Matrix) -> Result<Self> {
        if !m.is_square() || m.shape() != n.shape() || r.shape() != (m.nrows(), 1) {
            return Err(Error::shape(
                "ridge key",
                "square M, N of equal size and column r",
                format!("M {}, N {}, r {}", shape_of(&m), shape_of(&n), shape_of(&r)),
            ));
        }
        Self::build(
            MaskKind::RidgeOutsource,
            vec![m, n, r],
            DEFAULT_MASK_CONDITION,
        )
    }
}

/// One owner of a record (row) split.
#[derive(Debug, Clone)]
pub struct RecordParty {
    pub z: Matrix,
    pub y: Matrix,
    pub mask: Matrix,
}

#[derive(Debug, Clone)]
pub struct MaskedRecords {
    pub mz: Matrix,
    pub my: Matrix,
    /// `k` is below the covariate count, so `MZ` cannot keep full column rank.
    pub rank_loss: bool,
}

/// `MZ = sum_r M_{A_r} Z_r`, `MY = sum_r M_{A_r} Y_r`.
pub fn premultiply_mask(parties: &[RecordParty]) -> Result<MaskedRecords> {
    let first = parties
        .first()
        .ok_or_else(|| Error::param("parties", "empty"))?;
    let k = first.mask.nrows();
    let (zc, yc) = (first.z.ncols(), first.y.ncols());
    let mut mz = Matrix::zeros(k, zc);
    let mut my = Matrix::zeros(k, yc);
    for p in parties {
        if p.mask.nrows() != k
            || p.mask.ncols() != p.z.nrows()
            || p.z.nrows() != p.y.nrows()
            || p.z.ncols() != zc
            || p.y.ncols() != yc
        {
            return Err(Error::shape(
                "record party",
                format!("mask {k}xT_r, Z T_rx{zc}, Y T_rx{yc}"),
                format!(
                    "mask {}, Z {}, Y {}",
                    shape_of(&p.mask),
                    shape_of(&p.z),
                    shape_of(&p.y)
                ),
            ));
        }
        mz += &p.mask * &p.z;
        my += &p.mask * &p.y;
    }
    Ok(MaskedRecords {
        mz,
        my,
        rank_loss: k < zc,
    })
}

#[derive(Debug, Clone)]
pub struct PostMaskDiagnostic {
    pub b_raw: Matrix,
    pub b_masked: Matrix,
    /// `|| B' - N_z^{-1} B N_y ||_F`
    pub identity_error: f64,
}

/// Post-multiplied data `(Z N_z, Y N_y)` together with the evidence that the
/// masked fit only maps back to the real one through the secret keys.
pub fn postmultiply_mask(
    z: &Matrix,
    y: &Matrix,
    nz: &Matrix,
    ny: &Matrix,
) -> Result<(Matrix, Matrix, PostMaskDiagnostic)> {
    if nz.shape() != (z.ncols(), z.ncols()) || ny.shape() != (y.ncols(), y.ncols()) {
        return Err(Error::shape(
            "post-multiplication keys",
            format!("{0}x{0} and {1}x{1}", z.ncols(), y.ncols()),
            format!("{} and {}", shape_of(nz), shape_of(ny)),
        ));
    }
    let nz_inv = nz.clone().try_inverse().ok_or(Error::Singular("N_z"))?;
    let zn = z * nz;
    let yn = y * ny;
    let b_raw = lstsq(z, y)?.coefficients;
    let b_masked = lstsq(&zn, &yn)?.coefficients;
    let identity_error = (&b_masked - nz_inv * &b_raw * ny).norm();
    Ok((
        zn,
        yn,
        PostMaskDiagnostic {
            b_raw,
            b_masked,
            identity_error,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct RidgeOutsourceResult {
    pub beta: Matrix,
    pub transcript: ProtocolTranscript,
    pub attempts: usize,
}

/// Owner-side normal equations `(Z^T Z + lambda I, Z^T y)`.
pub fn ridge_system(z: &Matrix, y: &Matrix, lambda: f64) -> (Matrix, Matrix) {
    let m = z.ncols();
    (
        z.transpose() * z + Matrix::identity(m, m) * lambda,
        z.transpose() * y,
    )
}

/// Server solves `(M A N) beta' = M (b + A r)`; the owner unmasks
/// `beta = N beta' - r`.
pub fn ridge_outsource(a: &Matrix, b: &Matrix, key: &MaskingKey) -> Result<RidgeOutsourceResult> {
    if key.kind != MaskKind::RidgeOutsource {
        return Err(Error::param("key", "expected a ridge outsourcing key"));
    }
    let (m, n, r) = (&key.matrices[0], &key.matrices[1], &key.matrices[2]);
    if a.shape() != m.shape() || b.nrows() != a.nrows() {
        return Err(Error::shape(
            "ridge system",
            shape_of(m),
            format!("A {}, b {}", shape_of(a), shape_of(b)),
        ));
    }
    let mut transcript = ProtocolTranscript::new("ridge_outsource", TranscriptMode::Full);
    let man = m * a * n;
    let rhs = m * (b + a * r);
    transcript.record(None, Party::Owner(0), Party::Server, "MAN", &man);
    transcript.record(None, Party::Owner(0), Party::Server, "M(b+Ar)", &rhs);
    if condition_number(&man) >= key.condition_bound * key.condition_bound {
        return Err(Error::Singular("masked ridge system"));
    }
    let beta_masked = man
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("masked ridge system"))?;
    transcript.record(None, Party::Server, Party::Owner(0), "beta'", &beta_masked);
    let beta = n * beta_masked - r;
    Ok(RidgeOutsourceResult {
        beta,
        transcript,
        attempts: 1,
    })
}

/// [`ridge_outsource`] with keys drawn from `seed`, regenerated when the
/// masked system comes out singular.
pub fn ridge_outsource_seeded(a: &Matrix, b: &Matrix, seed: u64) -> Result<RidgeOutsourceResult> {
    let mut rng = rng_from_seed(seed);
    for attempt in 1..=KEY_RETRIES {
        let key = MaskingKey::ridge(a.nrows(), &mut rng)?;
        match ridge_outsource(a, b, &key) {
            Ok(mut res) => {
                res.attempts = attempt;
                return Ok(res);
            }
            Err(Error::Singular(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Singular("masked ridge system"))
}
