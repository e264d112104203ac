use super::product::{ac_two_party, ProductRun, Roles, ShareSplit, TwoPartyOptions};
use crate::linalg::{derive_seed, random_invertible, rng_from_seed, shape_of};
use crate::transcript::{Party, ProtocolTranscript};
use crate::{Error, Matrix, Result};

// roundoff allowance, in units of eps * cond(P) * cond(Q)
const SINGULAR_GROWTH: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct SumInverseRun {
    /// Shares of `(A + C)^{-1}`: `v_a` with the owner of `A`, `v_c` with the owner of `C`.
    pub shares: ShareSplit,
    pub transcript: ProtocolTranscript,
}

/// `(A + C)^{-1}` for square `A` (owner 1) and `C` (owner 2).
///
/// Owner 2 draws secret invertible `P`, `Q`. Two product runs give owner 1
/// `P (A + C) Q`, which it inverts to `Q^{-1} (A + C)^{-1} P^{-1}`; two more
/// runs strip `Q` and `P` again, leaving additive shares of the inverse.
pub fn sum_inverse(
    a: &Matrix,
    c: &Matrix,
    opts: &TwoPartyOptions,
    seed: u64,
) -> Result<SumInverseRun> {
    if !a.is_square() || a.shape() != c.shape() {
        return Err(Error::shape(
            "sum_inverse inputs",
            "equal square matrices",
            format!("{} and {}", shape_of(a), shape_of(c)),
        ));
    }
    let m = a.nrows();
    let o1 = opts.roles.a_holder;
    let o2 = opts.roles.c_holder;
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let p = random_invertible(m, opts.max_condition, &mut rng)?;
    let q = random_invertible(m, opts.max_condition, &mut rng)?;
    let mut transcript = ProtocolTranscript::new("sum_inverse", opts.mode);
    let run = |x: &Matrix,
               y: &Matrix,
               x_holder: Party,
               y_holder: Party,
               stream: u64,
               tr: &mut ProtocolTranscript|
     -> Result<ShareSplit> {
        let o = TwoPartyOptions {
            roles: Roles {
                a_holder: x_holder,
                c_holder: y_holder,
            },
            ..*opts
        };
        let ProductRun {
            shares, transcript, ..
        } = ac_two_party(x, y, &o, derive_seed(seed, stream))?;
        tr.extend(transcript);
        Ok(shares)
    };

    // step 1: P A Q = S1 Q + (S2 Q), with S1 + S2 = P A
    let pa = run(&p, a, o2, o1, 1, &mut transcript)?;
    let s2q = run(&pa.v_c, &q, o1, o2, 2, &mut transcript)?;
    let owner2_part = &pa.v_a * &q + &s2q.v_c + &p * c * &q;
    transcript.record(None, o2, o1, "P(A+C)Q share", &owner2_part);
    let masked = &s2q.v_a + owner2_part;
    // sigma_min(A + C) <= sigma_min(masked) ||P^-1|| ||Q^-1||; compare that bound
    // with the roundoff the masking itself introduces
    let sv = |x: &Matrix| x.clone().svd(false, false).singular_values;
    let (sp, sq, sm) = (sv(&p), sv(&q), sv(&masked));
    let bound = sm.min() / (sp.min() * sq.min());
    let noise = f64::EPSILON
        * SINGULAR_GROWTH
        * (sp.max() / sp.min())
        * (sq.max() / sq.min())
        * (a.norm() + c.norm());
    if !(bound > noise) {
        return Err(Error::Singular("A + C"));
    }
    let g = masked.try_inverse().ok_or(Error::Singular("A + C"))?;

    // step 2: Q G P = U1 P + (U2 P), with U1 + U2 = Q G
    let qg = run(&q, &g, o2, o1, 3, &mut transcript)?;
    let u2p = run(&qg.v_c, &p, o1, o2, 4, &mut transcript)?;
    let v_c = &qg.v_a * &p + u2p.v_c;
    Ok(SumInverseRun {
        shares: ShareSplit { v_a: u2p.v_a, v_c },
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_plus_zero() {
        let run = sum_inverse(
            &Matrix::identity(4, 4),
            &Matrix::zeros(4, 4),
            &TwoPartyOptions::default(),
            3,
        )
        .unwrap();
        assert!((run.shares.sum() - Matrix::identity(4, 4)).amax() < 1e-8);
    }

    #[test]
    fn singular_sum_is_reported() {
        let a = Matrix::identity(2, 2);
        let c = -Matrix::identity(2, 2);
        let r = sum_inverse(&a, &c, &TwoPartyOptions::default(), 1);
        assert!(
            matches!(r, Err(Error::Singular(_))),
            "{:?}",
            r.map(|r| r.shares.sum())
        );
    }
}
