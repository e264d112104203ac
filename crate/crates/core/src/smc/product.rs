use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{derive_seed, gaussian_matrix, random_invertible, rng_from_seed, shape_of};
use crate::privacy::DEFAULT_MASK_CONDITION;
use crate::transcript::{Party, ProtocolTranscript, TranscriptMode};
use crate::{Error, Matrix, Result};

pub const LABEL_A_M_RIGHT: &str = "A*M_right";
pub const LABEL_MINV_TOP_C: &str = "Minv_top*C";
pub const LABEL_A_MASKED: &str = "A+R_a";
pub const LABEL_C_MASKED: &str = "C+R_c";
pub const LABEL_COMMODITY_T: &str = "T";

/// Additive shares of a product; only their sum is the product.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareSplit {
    /// Held by the owner of `A`.
    pub v_a: Matrix,
    /// Held by the owner of `C`.
    pub v_c: Matrix,
}

impl ShareSplit {
    /// Reconstruction, for verification outside the protocol.
    pub fn sum(&self) -> Matrix {
        &self.v_a + &self.v_c
    }
}

/// Which parties hold `A` and `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub a_holder: Party,
    pub c_holder: Party,
}

impl Default for Roles {
    fn default() -> Self {
        Self {
            a_holder: Party::Owner(0),
            c_holder: Party::Owner(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OddPolicy {
    #[default]
    Reject,
    /// Pads `A` with a zero column and `C` with a zero row; the transmitted
    /// matrices then have `(s + 1) / 2` columns / rows.
    ZeroPad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoPartyOptions {
    pub odd: OddPolicy,
    pub roles: Roles,
    pub mode: TranscriptMode,
    pub max_condition: f64,
}

impl Default for TwoPartyOptions {
    fn default() -> Self {
        Self {
            odd: OddPolicy::Reject,
            roles: Roles::default(),
            mode: TranscriptMode::Full,
            max_condition: DEFAULT_MASK_CONDITION,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProductRun {
    pub shares: ShareSplit,
    pub transcript: ProtocolTranscript,
    /// The jointly generated `M` (two-party protocol only), known to both owners.
    pub mask: Option<Matrix>,
}

/// Two-party `A C` with a jointly generated invertible `s x s` mask `M`
/// drawn from `seed`.
pub fn ac_two_party(
    a: &Matrix,
    c: &Matrix,
    opts: &TwoPartyOptions,
    seed: u64,
) -> Result<ProductRun> {
    check_inner(a, c)?;
    let s = padded_inner(a.ncols(), opts.odd)?;
    let mut rng = rng_from_seed(seed);
    let mask = random_invertible(s, opts.max_condition, &mut rng)?;
    ac_two_party_with_mask(a, c, &mask, opts)
}

/// Two-party protocol with an explicit mask.
///
/// The owner of `A` sends `A M_right`, the owner of `C` sends `(M^{-1})_top C`;
/// `V_a = A M_left (M^{-1})_top C`, `V_c = A M_right (M^{-1})_bottom C`.
pub fn ac_two_party_with_mask(
    a: &Matrix,
    c: &Matrix,
    mask: &Matrix,
    opts: &TwoPartyOptions,
) -> Result<ProductRun> {
    check_inner(a, c)?;
    let s = padded_inner(a.ncols(), opts.odd)?;
    if mask.shape() != (s, s) {
        return Err(Error::shape(
            "product mask",
            format!("{s}x{s}"),
            shape_of(mask),
        ));
    }
    let (a, c) = if s != a.ncols() {
        (
            a.clone().insert_column(a.ncols(), 0.0),
            c.clone().insert_row(c.nrows(), 0.0),
        )
    } else {
        (a.clone(), c.clone())
    };
    let inv = mask
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("product mask"))?;
    let h = s / 2;
    let m_left = mask.columns(0, h);
    let m_right = mask.columns(h, h);
    let inv_top = inv.rows(0, h);
    let inv_bottom = inv.rows(h, h);

    let roles = opts.roles;
    let mut transcript = ProtocolTranscript::new("ac_two_party", opts.mode);
    let a_right = &a * m_right;
    transcript.record(
        None,
        roles.a_holder,
        roles.c_holder,
        LABEL_A_M_RIGHT,
        &a_right,
    );
    let top_c = inv_top * &c;
    transcript.record(
        None,
        roles.c_holder,
        roles.a_holder,
        LABEL_MINV_TOP_C,
        &top_c,
    );

    let v_a = &a * m_left * &top_c;
    let v_c = a_right * (inv_bottom * &c);
    Ok(ProductRun {
        shares: ShareSplit { v_a, v_c },
        transcript,
        mask: Some(mask.clone()),
    })
}

fn check_inner(a: &Matrix, c: &Matrix) -> Result<()> {
    if a.ncols() != c.nrows() || a.ncols() == 0 {
        return Err(Error::shape(
            "A C inner dimension",
            shape_of(a),
            shape_of(c),
        ));
    }
    Ok(())
}

fn padded_inner(s: usize, odd: OddPolicy) -> Result<usize> {
    match (s % 2, odd) {
        (0, _) => Ok(s),
        (_, OddPolicy::Reject) => Err(Error::OddInnerDimension(s)),
        (_, OddPolicy::ZeroPad) => Ok(s + 1),
    }
}

/// Correlated randomness from the commodity server:
/// `r_a + r_c = R_a R_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommodityMaterial {
    pub big_r_a: Matrix,
    pub big_r_c: Matrix,
    pub r_a: Matrix,
    pub r_c: Matrix,
}

impl CommodityMaterial {
    pub fn generate<R: Rng + ?Sized>(
        m: usize,
        s: usize,
        k: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let big_r_a = gaussian_matrix(m, s, scale, rng);
        let big_r_c = gaussian_matrix(s, k, scale, rng);
        let r_a = gaussian_matrix(m, k, scale * scale, rng);
        let r_c = &big_r_a * &big_r_c - &r_a;
        Self {
            big_r_a,
            big_r_c,
            r_a,
            r_c,
        }
    }

    /// All-zero material: no masking at all.
    pub fn zeros(m: usize, s: usize, k: usize) -> Self {
        Self {
            big_r_a: Matrix::zeros(m, s),
            big_r_c: Matrix::zeros(s, k),
            r_a: Matrix::zeros(m, k),
            r_c: Matrix::zeros(m, k),
        }
    }

    pub fn inconsistency(&self) -> f64 {
        (&self.r_a + &self.r_c - &self.big_r_a * &self.big_r_c).amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommodityOptions {
    pub roles: Roles,
    pub mode: TranscriptMode,
    /// Standard deviation of the commodity matrices and of the share `V_c`.
    pub mask_scale: f64,
    /// Abort threshold on `|r_a + r_c - R_a R_c|`, relative to the material's magnitude.
    pub consistency_tol: f64,
}

impl Default for CommodityOptions {
    fn default() -> Self {
        Self {
            roles: Roles::default(),
            mode: TranscriptMode::Full,
            mask_scale: 1.0,
            consistency_tol: 1e-9,
        }
    }
}

/// Commodity-server `A C`: material from `seed`, fresh share `V_c`.
pub fn ac_commodity(
    a: &Matrix,
    c: &Matrix,
    opts: &CommodityOptions,
    seed: u64,
) -> Result<ProductRun> {
    check_inner(a, c)?;
    let mut server_rng = rng_from_seed(derive_seed(seed, 0));
    let material = CommodityMaterial::generate(
        a.nrows(),
        a.ncols(),
        c.ncols(),
        opts.mask_scale,
        &mut server_rng,
    );
    let mut rng_c = rng_from_seed(derive_seed(seed, 1));
    let v_c = gaussian_matrix(a.nrows(), c.ncols(), opts.mask_scale, &mut rng_c);
    ac_commodity_with(a, c, &material, v_c, opts)
}

/// Commodity protocol with explicit material and `C`-holder share `V_c`.
///
/// `T = (A + R_a) C + (r_c - V_c)`, `V_a = T + r_a - R_a (C + R_c)`.
pub fn ac_commodity_with(
    a: &Matrix,
    c: &Matrix,
    material: &CommodityMaterial,
    v_c: Matrix,
    opts: &CommodityOptions,
) -> Result<ProductRun> {
    check_inner(a, c)?;
    let (m, s, k) = (a.nrows(), a.ncols(), c.ncols());
    if material.big_r_a.shape() != (m, s)
        || material.big_r_c.shape() != (s, k)
        || material.r_a.shape() != (m, k)
        || material.r_c.shape() != (m, k)
        || v_c.shape() != (m, k)
    {
        return Err(Error::shape(
            "commodity material",
            format!("R_a {m}x{s}, R_c {s}x{k}, r {m}x{k}"),
            "mismatch",
        ));
    }
    let scale = (material.big_r_a.amax() * material.big_r_c.amax() * s as f64).max(1.0);
    let bad = material.inconsistency();
    if !(bad <= opts.consistency_tol * scale) {
        return Err(Error::CommodityInconsistent(bad));
    }
    let roles = opts.roles;
    let mut transcript = ProtocolTranscript::new("ac_commodity", opts.mode);
    transcript.record(
        None,
        Party::Commodity,
        roles.a_holder,
        "R_a",
        &material.big_r_a,
    );
    transcript.record(None, Party::Commodity, roles.a_holder, "r_a", &material.r_a);
    transcript.record(
        None,
        Party::Commodity,
        roles.c_holder,
        "R_c",
        &material.big_r_c,
    );
    transcript.record(None, Party::Commodity, roles.c_holder, "r_c", &material.r_c);

    let a_hat = a + &material.big_r_a;
    transcript.record(None, roles.a_holder, roles.c_holder, LABEL_A_MASKED, &a_hat);
    let c_hat = c + &material.big_r_c;
    transcript.record(None, roles.c_holder, roles.a_holder, LABEL_C_MASKED, &c_hat);
    let t = &a_hat * c + (&material.r_c - &v_c);
    transcript.record(None, roles.c_holder, roles.a_holder, LABEL_COMMODITY_T, &t);
    let v_a = t + &material.r_a - &material.big_r_a * &c_hat;
    Ok(ProductRun {
        shares: ShareSplit { v_a, v_c },
        transcript,
        mask: None,
    })
}
