//! Built-in Néron-Severi models: the sublattice spanned by fiber classes of
//! the covering maps, together with the matrices of the covering
//! involutions acting on it.
//!
//! The involution matrices are written down by hand and checked when a
//! model is built: each must square to the identity, preserve the Gram
//! matrix, and fix the classes pulled back from its base.
//!
//! For the tridegree-(2,2,2) surface the pairing `L_i · L_j = 2` (`i != j`),
//! `L_i^2 = 0` is the standard one for the three fiber classes; it is
//! confirmed indirectly by the entropy of `s1 s2 s3`. For the Wehler
//! surface the pairing `F1 · F2 = 4` is the value for which `s1 s2` has
//! spectral radius `7 + 4√3`.

use num::rational::{BigRational, Ratio};
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{is_isometry, spectral_logradius, EntropyValue, GramMatrix, LatticeMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModel {
    pub name: String,
    pub gram: GramMatrix,
    pub basis_labels: Vec<String>,
    pub involutions: Vec<LatticeMap>,
}

/// Integer coordinates of a divisor class in a model's basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivisorClass {
    pub coords: Vec<i64>,
}

impl DivisorClass {
    pub fn new(model: &SurfaceModel, coords: Vec<i64>) -> Result<Self> {
        if coords.len() != model.gram.dim() {
            return Err(Error::DimensionMismatch { expected: model.gram.dim(), got: coords.len() });
        }
        Ok(DivisorClass { coords })
    }
}

impl SurfaceModel {
    fn validated(name: &str, gram: GramMatrix, labels: &[&str], involutions: Vec<LatticeMap>) -> Result<Self> {
        let dim = gram.dim();
        if labels.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: labels.len() });
        }
        // signature (1, dim - 1): one positive eigenvalue
        let (pos, neg) = signature(&gram);
        if pos != 1 || neg != dim - 1 {
            return Err(Error::Parameter(format!("model {name}: gram is not hyperbolic")));
        }
        let id = LatticeMap::identity(dim);
        for (i, s) in involutions.iter().enumerate() {
            if s.compose(s)? != id {
                return Err(Error::Parameter(format!("model {name}: s{} is not an involution", i + 1)));
            }
            if !is_isometry(&gram, s)? {
                return Err(Error::Parameter(format!("model {name}: s{} is not an isometry", i + 1)));
            }
        }
        Ok(SurfaceModel {
            name: name.to_string(),
            gram,
            basis_labels: labels.iter().map(|s| s.to_string()).collect(),
            involutions,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    /// Product of involutions for a 1-based word; the rightmost letter acts first.
    pub fn word_matrix(&self, word: &[usize]) -> Result<LatticeMap> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        let mut out = LatticeMap::identity(self.dim());
        for &idx in word {
            if idx == 0 || idx > self.involutions.len() {
                return Err(Error::InvalidIndex { index: idx, len: self.involutions.len() });
            }
            out = out.compose(&self.involutions[idx - 1])?;
        }
        Ok(out)
    }

    pub fn apply(&self, involution: usize, class: &DivisorClass) -> Result<DivisorClass> {
        let m = self.word_matrix(&[involution])?;
        Ok(DivisorClass { coords: m.apply(&class.coords)? })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "basis": self.basis_labels,
            "gram": self.gram.matrix().rows(),
            "involutions": self.involutions.iter().map(|s| s.matrix().rows()).collect::<Vec<_>>(),
        })
    }
}

/// Number of positive and negative eigenvalues. Uses the signs of the
/// leading principal minors when none vanish, and Descartes' rule on the
/// characteristic polynomial otherwise (exact, all roots being real).
fn signature(g: &GramMatrix) -> (usize, usize) {
    let n = g.dim();
    let m = g.matrix();
    let mut minors = vec![1i128];
    for k in 1..=n {
        let rows: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| m.get(i, j)).collect()).collect();
        let d = crate::lattice::IntMatrix::from_rows(&rows).and_then(|x| x.det()).unwrap_or(0);
        minors.push(d);
    }
    if minors.iter().all(|&d| d != 0) {
        let neg = minors.windows(2).filter(|w| (w[0] > 0) != (w[1] > 0)).count();
        return (n - neg, neg);
    }
    // Jacobi fails on a zero minor: count sign changes of the characteristic polynomial
    // coefficients (Descartes is exact for real-rooted polynomials).
    let cp = crate::poly::charpoly(n, m.entries());
    let changes = |coeffs: Vec<num::BigInt>| {
        let nz: Vec<_> = coeffs.into_iter().filter(|c| !c.is_zero()).collect();
        nz.windows(2).filter(|w| w[0].is_positive() != w[1].is_positive()).count()
    };
    let pos = changes(cp.clone());
    let neg_poly: Vec<num::BigInt> =
        cp.iter().enumerate().map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() }).collect();
    (pos, changes(neg_poly))
}

fn map(rows: &[[i64; 3]]) -> LatticeMap {
    LatticeMap::from_rows(rows).expect("static 3x3 matrix")
}

/// Smooth tridegree-(2,2,2) surface in (P^1)^3 with its three Vieta
/// involutions, on the span of the fiber classes `L1, L2, L3`.
///
/// `s_i` fixes the two classes pulled back from the base it covers and
/// sends `L_i` to `-L_i + 2 L_j + 2 L_k`.
pub fn model_triple_quadric() -> SurfaceModel {
    let gram = GramMatrix::from_rows(&[[0, 2, 2], [2, 0, 2], [2, 2, 0]]).expect("static gram");
    let s1 = map(&[[-1, 0, 0], [2, 1, 0], [2, 0, 1]]);
    let s2 = map(&[[1, 2, 0], [0, -1, 0], [0, 2, 1]]);
    let s3 = map(&[[1, 0, 2], [0, 1, 2], [0, 0, -1]]);
    SurfaceModel::validated("triple-quadric", gram, &["L1", "L2", "L3"], vec![s1, s2, s3])
        .expect("built-in model is consistent")
}

/// Generic Wehler surface: two fiber classes `F1, F2` with `F_i^2 = 2`,
/// `F1 · F2 = 4`, and the reflections `x ↦ -x + (x · F_i) F_i`.
pub fn model_wehler() -> SurfaceModel {
    let gram = GramMatrix::from_rows(&[[2, 4], [4, 2]]).expect("static gram");
    let s1 = LatticeMap::from_rows(&[[1, 4], [0, -1]]).expect("static map");
    let s2 = LatticeMap::from_rows(&[[-1, 0], [4, 1]]).expect("static map");
    SurfaceModel::validated("wehler", gram, &["F1", "F2"], vec![s1, s2]).expect("built-in model is consistent")
}

/// Look up a built-in model by CLI name.
pub fn model_by_name(name: &str) -> Result<SurfaceModel> {
    match name {
        "triple-quadric" | "triple_quadric" => Ok(model_triple_quadric()),
        "wehler" => Ok(model_wehler()),
        other => Err(Error::Parameter(format!("unknown model '{other}' (expected triple-quadric or wehler)"))),
    }
}

/// Entropy of the automorphism given by a word in the covering involutions.
pub fn composed_entropy(model: &SurfaceModel, word: &[usize]) -> Result<EntropyValue> {
    Ok(spectral_logradius(&model.word_matrix(word)?))
}

/// Real numbers `y_i` written as rational coordinate vectors over a fixed
/// set of Q-linearly independent reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalVectorFamily {
    vectors: Vec<Vec<BigRational>>,
}

impl RationalVectorFamily {
    pub fn new(vectors: Vec<Vec<BigRational>>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.len() != first.len()) {
                return Err(Error::RaggedFamily);
            }
        }
        Ok(RationalVectorFamily { vectors })
    }

    pub fn from_integers(vectors: &[&[i64]]) -> Result<Self> {
        Self::new(
            vectors
                .iter()
                .map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Dimension over Q of the span, by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows = self.vectors.clone();
        let cols = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
                continue;
            };
            rows.swap(rank, pivot);
            let p = rows[rank][c].clone();
            for r in 0..rows.len() {
                if r != rank && !rows[r][c].is_zero() {
                    let factor = &rows[r][c] / &p;
                    for k in c..cols {
                        let t = &factor * &rows[rank][k];
                        rows[r][k] -= t;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Real Picard number of an abelian surface: `4 - dim_Q(Q y1 + Q y2 + Q y3)`.
pub fn picard_number_torus(ys: &RationalVectorFamily) -> Result<i64> {
    if ys.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: ys.len() });
    }
    if ys.vectors[0].iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroFamily);
    }
    Ok(4 - ys.rank() as i64)
}

/// Concordance of a real abelian surface from its real Picard number and,
/// for Picard number 2, whether the intersection form represents zero.
pub fn abelian_concordance(rho: i64, represents_zero: bool) -> Result<Ratio<i64>> {
    match rho {
        1 => Ok(Ratio::from_integer(1)),
        2 if represents_zero => Ok(Ratio::from_integer(1)),
        2 | 3 => Ok(Ratio::new(1, 2)),
        other => Err(Error::PicardOutOfRange(other)),
    }
}
