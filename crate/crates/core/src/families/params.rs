use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Parameters selecting one commuting pair of the classification.
///
/// Serialized as a flat JSON object tagged by `"variant"`, complex numbers as
/// `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum FamilyParams {
    General {
        lambda: C,
        mu: C,
        alpha1: C,
        alpha2: C,
    },
    /// `lambda = pi i`, `mu = (2m+1) lambda / 4`, `alpha1 = 0`.
    Case1 { m: i64, alpha: C, beta: C },
    /// `alpha1 = mu = 0`, kernel `1 / sinh(lambda z / 2)`.
    Case2 { lambda: C, alpha: C, beta: C },
    /// `lambda = mu = 0`, kernel `1/beta + 1/z`, `p'(0) = 0`.
    Case3 { beta: C, p: Vec<C> },
    /// `lambda = mu = alpha1 = 0`, kernel `1/z`.
    Case4 { beta: C, p: Vec<C> },
}

impl FamilyParams {
    pub fn general(lambda: C, mu: C, alpha1: C, alpha2: C) -> Self {
        FamilyParams::General {
            lambda,
            mu,
            alpha1,
            alpha2,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            FamilyParams::General { .. } => "general",
            FamilyParams::Case1 { .. } => "case1",
            FamilyParams::Case2 { .. } => "case2",
            FamilyParams::Case3 { .. } => "case3",
            FamilyParams::Case4 { .. } => "case4",
        }
    }
}
