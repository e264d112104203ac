use serde::Serialize;

use crate::linalg::{orthogonal_complement, rng_from_seed, shape_of};
use crate::transcript::{Party, ProtocolTranscript, TranscriptMode};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone)]
pub struct KarrRun {
    /// `A^T C`, computed by owner 1.
    pub product: Matrix,
    pub transcript: ProtocolTranscript,
    /// Numerical rank of `(I - W W^T) C`.
    pub projected_rank: usize,
    /// `g = 0`: `C` travelled in the clear.
    pub clear_text: bool,
    pub w: Matrix,
}

/// `A^T C` for `A` (`m x k`, owner 1) and `C` (`m x s`, owner 2).
///
/// Owner 1 sends `W` (`m x g`, orthonormal, `W^T A = 0`); owner 2 replies with
/// `(I - W W^T) C`, from which owner 1 gets `A^T (I - W W^T) C = A^T C`.
pub fn karr_multiply(a: &Matrix, c: &Matrix, g: usize, seed: u64) -> Result<KarrRun> {
    let (m, k) = a.shape();
    if c.nrows() != m {
        return Err(Error::shape(
            "karr inputs",
            format!("{m} rows"),
            shape_of(c),
        ));
    }
    let max = m.saturating_sub(k);
    if g > max {
        return Err(Error::OrthogonalityImpossible { g, max });
    }
    let mut rng = rng_from_seed(seed);
    let complement = orthogonal_complement(a, &mut rng);
    let w = complement.columns(complement.ncols() - g, g).into_owned();
    let mut transcript = ProtocolTranscript::new("karr", TranscriptMode::Full);
    transcript.record(None, Party::Owner(0), Party::Owner(1), "W", &w);
    let projected = c - &w * (w.transpose() * c);
    transcript.record(
        None,
        Party::Owner(1),
        Party::Owner(0),
        "(I-WW^T)C",
        &projected,
    );
    let product = a.transpose() * &projected;
    let projected_rank = projected.rank(1e-10 * projected.amax().max(1.0) * m as f64);
    Ok(KarrRun {
        product,
        transcript,
        projected_rank,
        clear_text: g == 0,
        w,
    })
}

/// `(NLIE(owner 1), NLIE(owner 2)) = (k s + k g, k s + s (m - g))`.
pub fn nlie_counts(m: u64, k: u64, s: u64, g: u64) -> (u64, u64) {
    (k * s + k * g, k * s + s * (m - g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NlieBalance {
    pub g_star: f64,
    /// `g* (k + s) = s m`
    pub g_numerator: u64,
    pub g_denominator: u64,
    pub nlie_owner1: f64,
    pub nlie_owner2: f64,
    /// `NLIE (k + s)` for each owner, exact in integers.
    pub scaled_owner1: u128,
    pub scaled_owner2: u128,
}

impl NlieBalance {
    pub fn is_integral(&self) -> bool {
        self.g_numerator % self.g_denominator == 0
    }
}

/// `g* = s m / (k + s)`, the `g` that equalises both owners' NLIE.
pub fn nlie_optimal_g(m: u64, k: u64, s: u64) -> Result<NlieBalance> {
    if m == 0 || k == 0 || s == 0 {
        return Err(Error::param("m, k, s", "must be positive"));
    }
    let num = s * m;
    let den = k + s;
    let g_star = num as f64 / den as f64;
    let (m128, k128, s128, num128, den128) =
        (m as u128, k as u128, s as u128, num as u128, den as u128);
    let scaled_owner1 = k128 * s128 * den128 + k128 * num128;
    let scaled_owner2 = k128 * s128 * den128 + s128 * (m128 * den128 - num128);
    Ok(NlieBalance {
        g_star,
        g_numerator: num,
        g_denominator: den,
        nlie_owner1: (k * s) as f64 + k as f64 * g_star,
        nlie_owner2: (k * s) as f64 + s as f64 * (m as f64 - g_star),
        scaled_owner1,
        scaled_owner2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;

    #[test]
    fn balance_example() {
        let b = nlie_optimal_g(100, 5, 5).unwrap();
        assert_eq!(b.g_star, 50.0);
        assert_eq!(b.nlie_owner1, 275.0);
        assert_eq!(b.nlie_owner2, 275.0);
        assert_eq!(nlie_counts(100, 5, 5, 50), (275, 275));
    }

    #[test]
    fn symmetric_owners_split_in_half() {
        for m in [2u64, 10, 37] {
            assert_eq!(nlie_optimal_g(m, 4, 4).unwrap().g_star, m as f64 / 2.0);
        }
    }

    #[test]
    fn too_many_columns() {
        let a = Matrix::zeros(5, 3);
        let c = Matrix::zeros(5, 2);
        assert!(matches!(
            karr_multiply(&a, &c, 3, 0),
            Err(Error::OrthogonalityImpossible { g: 3, max: 2 })
        ));
    }

    #[test]
    fn zero_g_sends_in_clear() {
        let mut rng = rng_from_seed(1);
        let a = gaussian_matrix(8, 2, 1.0, &mut rng);
        let c = gaussian_matrix(8, 3, 1.0, &mut rng);
        let run = karr_multiply(&a, &c, 0, 2).unwrap();
        assert!(run.clear_text);
        assert_eq!(run.transcript.entries()[1].matrix().unwrap(), c);
    }
}
