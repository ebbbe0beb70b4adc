//! Filtered nilmanifold models realized inside unitriangular rational matrices.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{self, Vector};
use super::matrix::{RatMatrix, RatMatrixJson};
use crate::arith::is_integer;
use crate::error::{Error, Result};

/// A group element: an exact unitriangular rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitriangularElement(RatMatrix);

impl UnitriangularElement {
    pub fn new(m: RatMatrix) -> Result<Self> {
        if !m.is_unitriangular() {
            return Err(Error::NotInGroup("matrix is not unitriangular".into()));
        }
        Ok(UnitriangularElement(m))
    }

    pub fn identity(dim: usize) -> Self {
        UnitriangularElement(RatMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    pub fn mul(&self, other: &Self) -> Self {
        UnitriangularElement(self.0.mul(&other.0))
    }

    pub fn inverse(&self) -> Self {
        UnitriangularElement(self.0.inverse_unipotent())
    }

    pub fn log(&self) -> RatMatrix {
        self.0.log_unipotent()
    }

    pub fn exp(x: &RatMatrix) -> Result<Self> {
        if !x.is_strictly_upper() {
            return Err(Error::Precondition("exp needs a strictly upper-triangular matrix".into()));
        }
        Ok(UnitriangularElement(x.exp_nilpotent()))
    }

    /// `g^e = exp(e log g)`, defined for every rational exponent.
    pub fn pow(&self, e: &BigRational) -> Self {
        if e.is_zero() {
            return Self::identity(self.dim());
        }
        if e.is_one() {
            return self.clone();
        }
        UnitriangularElement(self.log().scale(e).exp_nilpotent())
    }

    pub fn pow_int(&self, e: &BigInt) -> Self {
        self.pow(&BigRational::from_integer(e.clone()))
    }

    /// The unique `q`-th root `exp(log(g) / q)`.
    pub fn root(&self, q: u64) -> Self {
        self.pow(&BigRational::new(BigInt::one(), BigInt::from(q)))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.inverse().mul(&other.inverse()).mul(self).mul(other)
    }
}

/// Reads Lie-algebra coordinates in the basis `X_1..X_m` from a fixed set of
/// pivot entries, then confirms the full reconstruction.
#[derive(Clone, Debug)]
struct CoordinateReader {
    pivots: Vec<usize>,
    inverse: Vec<Vector>,
    flat: Vec<Vector>,
}

impl CoordinateReader {
    fn new(basis: &[RatMatrix]) -> Result<Self> {
        let flat: Vec<Vector> = basis.iter().map(RatMatrix::upper_entries).collect();
        let mut echelon = flat.clone();
        let pivots = linalg::rref(&mut echelon);
        if pivots.len() < basis.len() {
            return Err(Error::InvalidModel("basis matrices are linearly dependent".into()));
        }
        let square: Vec<Vector> = flat
            .iter()
            .map(|row| pivots.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let inverse = linalg::inverse(&square)
            .ok_or_else(|| Error::Internal("pivot block is singular".into()))?;
        Ok(CoordinateReader { pivots, inverse, flat })
    }

    fn read(&self, x: &RatMatrix) -> Option<Vector> {
        let v = x.upper_entries();
        let at_pivots: Vector = self.pivots.iter().map(|&c| v[c].clone()).collect();
        let c = linalg::row_times(&at_pivots, &self.inverse);
        (linalg::row_times(&c, &self.flat) == v).then_some(c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelJson {
    #[serde(default)]
    pub name: Option<String>,
    pub dimension: usize,
    pub basis: Vec<RatMatrixJson>,
    #[serde(rename = "levelDims")]
    pub level_dims: Vec<usize>,
    pub degree: usize,
    #[serde(default)]
    pub prefiltration: bool,
}

/// `(G/Gamma, G_., X)` with `G` the exponential of the span of the basis.
///
/// Coordinates are ordered so that `G_i` is the tail `{0}^{m - m_i} x R^{m_i}`.
#[derive(Clone, Debug)]
pub struct FilteredNilmanifoldModel {
    name: String,
    dim: usize,
    basis: Vec<RatMatrix>,
    level_dims: Vec<usize>,
    prefiltration: bool,
    reader: CoordinateReader,
}

impl FilteredNilmanifoldModel {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        basis: Vec<RatMatrix>,
        level_dims: Vec<usize>,
        prefiltration: bool,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let m = basis.len();
        if m == 0 {
            return bad("empty basis".into());
        }
        for (j, x) in basis.iter().enumerate() {
            if x.dim() != dim || !x.is_strictly_upper() {
                return bad(format!("basis matrix {} is not strictly upper triangular of size {dim}", j + 1));
            }
        }
        if level_dims.len() < 2 {
            return bad("levelDims must list m_0..m_s with s >= 1".into());
        }
        if level_dims.windows(2).any(|w| w[0] < w[1]) {
            return bad("levelDims must be non-increasing".into());
        }
        if level_dims[0] > m || *level_dims.last().unwrap() == 0 {
            return bad("levelDims must satisfy m >= m_0 and m_s > 0".into());
        }
        if !prefiltration && (level_dims[0] != m || level_dims[1] != m) {
            return bad("a filtration needs m_0 = m_1 = m".into());
        }
        let reader = CoordinateReader::new(&basis)?;
        let model = FilteredNilmanifoldModel {
            name: name.into(),
            dim,
            basis,
            level_dims,
            prefiltration,
            reader,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let m = self.m();
        for a in 0..m {
            for b in 0..m {
                let br = self.basis[a].bracket(&self.basis[b]);
                let c = self.reader.read(&br).ok_or_else(|| {
                    Error::InvalidModel(format!("[X_{}, X_{}] leaves the span of the basis", a + 1, b + 1))
                })?;
                // span(X_{j+1..m}) is an ideal for every j
                if c[..=a.max(b)].iter().any(|x| !x.is_zero()) {
                    return Err(Error::InvalidModel(format!(
                        "[X_{}, X_{}] is not in span(X_{}..X_{m})",
                        a + 1,
                        b + 1,
                        a.max(b) + 2
                    )));
                }
                let g0 = self.level_start(0);
                if a < g0 && b < g0 {
                    continue;
                }
                let (la, lb) = (self.coord_level(a), self.coord_level(b));
                let target = self.level_start(la + lb);
                if c[..target.min(m)].iter().any(|x| !x.is_zero()) {
                    return Err(Error::InvalidModel(format!(
                        "[G_{la}, G_{lb}] is not contained in G_{}",
                        la + lb
                    )));
                }
            }
        }
        // Gamma must be closed under products of basis generators
        let one = BigRational::one();
        for a in 0..m {
            for b in 0..m {
                for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let x = self.exp_coord(a, &(&one * BigRational::from_integer(sa.into())));
                    let y = self.exp_coord(b, &(&one * BigRational::from_integer(sb.into())));
                    if !self.in_gamma(&x.mul(&y))? {
                        return Err(Error::InvalidModel(format!(
                            "integral coordinates are not closed under multiplication (X_{}, X_{})",
                            a + 1,
                            b + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(json: &ModelJson) -> Result<Self> {
        let basis = json
            .basis
            .iter()
            .map(RatMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        if json.level_dims.len() != json.degree + 1 {
            return Err(Error::InvalidModel(format!(
                "levelDims has {} entries but degree {} needs {}",
                json.level_dims.len(),
                json.degree,
                json.degree + 1
            )));
        }
        Self::new(
            json.name.clone().unwrap_or_else(|| "custom".into()),
            json.dimension,
            basis,
            json.level_dims.clone(),
            json.prefiltration,
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            name: Some(self.name.clone()),
            dimension: self.dim,
            basis: self.basis.iter().map(RatMatrixJson::from).collect(),
            level_dims: self.level_dims.clone(),
            degree: self.degree(),
            prefiltration: self.prefiltration,
        }
    }

    /// Heisenberg group with its lower central series (degree 2).
    pub fn heisenberg_lcs() -> Self {
        Self::heisenberg("heisenberg-lcs", vec![3, 3, 1])
    }

    /// Heisenberg group with `G_2 = G_3 = center` (degree 3).
    pub fn heisenberg_deg3() -> Self {
        Self::heisenberg("heisenberg-deg3", vec![3, 3, 1, 1])
    }

    fn heisenberg(name: &str, level_dims: Vec<usize>) -> Self {
        let one = BigRational::one();
        let basis = vec![
            RatMatrix::unit(3, 0, 1, one.clone()),
            RatMatrix::unit(3, 1, 2, one.clone()),
            RatMatrix::unit(3, 0, 2, one),
        ];
        Self::new(name, 3, basis, level_dims, false).expect("built-in Heisenberg model is valid")
    }

    /// `R^m / Z^m` with coordinate `j` placed in level `min(j, s)` and the last
    /// coordinate in level `s`.
    pub fn torus(m: usize, s: usize) -> Result<Self> {
        if m == 0 || s == 0 {
            return Err(Error::InvalidModel("torus needs m >= 1 and s >= 1".into()));
        }
        let basis = (0..m)
            .map(|j| RatMatrix::unit(m + 1, 0, j + 1, BigRational::one()))
            .collect();
        let level = |j: usize| if j == m { s } else { j.min(s) };
        let level_dims = (0..=s)
            .map(|i| (1..=m).filter(|&j| level(j) >= i).count())
            .collect();
        Self::new(format!("torus:m={m},s={s}"), m + 1, basis, level_dims, false)
    }

    /// Resolves "heisenberg-lcs", "heisenberg-deg3" and "torus:m=..,s=..".
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "heisenberg-lcs" => Ok(Self::heisenberg_lcs()),
            "heisenberg-deg3" => Ok(Self::heisenberg_deg3()),
            _ => {
                let rest = name.strip_prefix("torus:").ok_or_else(|| {
                    Error::InvalidModel(format!(
                        "unknown model {name:?}; expected heisenberg-lcs, heisenberg-deg3 or torus:m=M,s=S"
                    ))
                })?;
                let (mut m, mut s) = (None, None);
                for part in rest.split(',') {
                    let (k, v) = part
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidModel(format!("bad torus parameter {part:?}")))?;
                    let v: usize = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidModel(format!("bad torus parameter {part:?}")))?;
                    match k.trim() {
                        "m" => m = Some(v),
                        "s" => s = Some(v),
                        _ => return Err(Error::InvalidModel(format!("bad torus parameter {part:?}"))),
                    }
                }
                Self::torus(m.unwrap_or(1), s.unwrap_or(1))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Matrix size kappa.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m = dim G`.
    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> usize {
        self.level_dims.len() - 1
    }

    pub fn is_prefiltration(&self) -> bool {
        self.prefiltration
    }

    pub fn basis(&self) -> &[RatMatrix] {
        &self.basis
    }

    pub fn level_dims(&self) -> &[usize] {
        &self.level_dims
    }

    /// `m_i`, zero beyond the degree.
    pub fn level_dim(&self, i: usize) -> usize {
        self.level_dims.get(i).copied().unwrap_or(0)
    }

    /// Index of the first coordinate of `G_i`, i.e. `m - m_i`.
    pub fn level_start(&self, i: usize) -> usize {
        self.m() - self.level_dim(i)
    }

    /// `r_i = m_i - m_{i+1}`.
    pub fn r(&self, i: usize) -> usize {
        self.level_dim(i) - self.level_dim(i + 1)
    }

    /// Coordinate range read by `psi_i`.
    pub fn level_range(&self, i: usize) -> std::ops::Range<usize> {
        self.level_start(i)..self.level_start(i + 1)
    }

    /// Largest `i` with coordinate `j` inside `G_i` (coordinates outside `G_0`
    /// of a prefiltration get level 0).
    fn coord_level(&self, j: usize) -> usize {
        (0..=self.degree()).rev().find(|&i| j >= self.level_start(i)).unwrap_or(0)
    }

    pub fn identity(&self) -> UnitriangularElement {
        UnitriangularElement::identity(self.dim)
    }

    /// Coordinates of a Lie algebra element in the basis `X_1..X_m`.
    pub fn lie_coords(&self, x: &RatMatrix) -> Result<Vector> {
        self.reader
            .read(x)
            .ok_or_else(|| Error::NotInGroup("matrix is outside the Lie algebra of the model".into()))
    }

    pub fn lie_element(&self, coords: &[BigRational]) -> RatMatrix {
        let mut x = RatMatrix::zero(self.dim);
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                x = x.add(&b.scale(c));
            }
        }
        x
    }

    /// `exp(t X_j)`.
    pub fn exp_coord(&self, j: usize, t: &BigRational) -> UnitriangularElement {
        UnitriangularElement(self.basis[j].scale(t).exp_nilpotent())
    }

    /// Mal'cev coordinates of the second kind by peeling.
    pub fn malcev_coords(&self, g: &UnitriangularElement) -> Result<Vector> {
        if g.dim() != self.dim {
            return Err(Error::NotInGroup(format!("element has size {} but the model has {}", g.dim(), self.dim)));
        }
        let mut residual = g.clone();
        let mut t = Vec::with_capacity(self.m());
        for j in 0..self.m() {
            let c = self.lie_coords(&residual.log())?;
            if c[..j].iter().any(|x| !x.is_zero()) {
                return Err(Error::NotInGroup("peeling left the ideal chain".into()));
            }
            let tj = c[j].clone();
            if !tj.is_zero() {
                residual = self.exp_coord(j, &-tj.clone()).mul(&residual);
            }
            t.push(tj);
        }
        if !residual.is_identity() {
            return Err(Error::NotInGroup("element is not a product of the basis flows".into()));
        }
        Ok(t)
    }

    /// `psi^{-1}(t) = exp(t_1 X_1) ... exp(t_m X_m)`.
    pub fn from_coords(&self, t: &[BigRational]) -> UnitriangularElement {
        let mut g = self.identity();
        for (j, tj) in t.iter().enumerate() {
            if !tj.is_zero() {
                g = g.mul(&self.exp_coord(j, tj));
            }
        }
        g
    }

    /// Element of `G_i` whose level-`i` coordinates are `t` and whose deeper
    /// coordinates vanish.
    pub fn from_level_coords(&self, i: usize, t: &[BigRational]) -> UnitriangularElement {
        let mut full = vec![BigRational::zero(); self.m()];
        for (slot, v) in full[self.level_range(i)].iter_mut().zip(t) {
            *slot = v.clone();
        }
        self.from_coords(&full)
    }

    pub fn in_gamma(&self, g: &UnitriangularElement) -> Result<bool> {
        Ok(self.malcev_coords(g)?.iter().all(is_integer))
    }

    /// `g in G_i`: the first `m - m_i` coordinates vanish.
    pub fn in_level(&self, g: &UnitriangularElement, i: usize) -> Result<bool> {
        let t = self.malcev_coords(g)?;
        Ok(t[..self.level_start(i)].iter().all(Zero::is_zero))
    }

    /// `psi_i(g)`: the level-`i` slice of the coordinates of `g in G_i`.
    pub fn psi_level(&self, g: &UnitriangularElement, i: usize) -> Result<Vector> {
        let t = self.malcev_coords(g)?;
        if t[..self.level_start(i)].iter().any(|x| !x.is_zero()) {
            return Err(Error::LevelViolation { index: i });
        }
        Ok(t[self.level_range(i)].to_vec())
    }

    /// `g = {g}[g]` with `psi({g}) in [0,1)^m` and `[g] in Gamma`.
    pub fn frac_int_parts(
        &self,
        g: &UnitriangularElement,
    ) -> Result<(UnitriangularElement, UnitriangularElement)> {
        // Peel from the right: after fixing the first j coordinates of {g},
        // right multiplication by exp(n X_j) only moves coordinates >= j.
        let mut frac_part = g.clone();
        let mut int_part = self.identity();
        for j in 0..self.m() {
            let t = self.malcev_coords(&frac_part)?;
            let n = t[j].floor();
            if !n.is_zero() {
                let step = self.exp_coord(j, &n);
                frac_part = frac_part.mul(&step.inverse());
                int_part = step.mul(&int_part);
            }
        }
        debug_assert!(self.malcev_coords(&frac_part)?.iter().all(|x| !x.is_negative() && x < &BigRational::one()));
        Ok((frac_part, int_part))
    }

    /// Largest numerator or denominator appearing in the basis.
    pub fn rational_height(&self) -> BigInt {
        self.basis.iter().map(RatMatrix::max_height).max().unwrap_or_else(BigInt::zero)
    }
}

pub type ModelRef = Arc<FilteredNilmanifoldModel>;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn builtins_are_valid() {
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        assert_eq!((h.m(), h.degree(), h.r(1), h.r(2)), (3, 2, 2, 1));
        let h3 = FilteredNilmanifoldModel::heisenberg_deg3();
        assert_eq!((h3.r(1), h3.r(2), h3.r(3)), (2, 0, 1));
        let t = FilteredNilmanifoldModel::builtin("torus:m=2,s=2").unwrap();
        assert_eq!(t.level_dims(), &[2, 2, 1]);
        let line = FilteredNilmanifoldModel::builtin("torus:m=1,s=2").unwrap();
        assert_eq!(line.level_dims(), &[1, 1, 1]);
        assert!(FilteredNilmanifoldModel::builtin("sphere").is_err());
    }

    #[test]
    fn heisenberg_coordinates() {
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        let t = vec![q(2, 3), q(-5, 2), q(7, 11)];
        let g = h.exp_coord(0, &t[0]).mul(&h.exp_coord(1, &t[1])).mul(&h.exp_coord(2, &t[2]));
        assert_eq!(h.malcev_coords(&g).unwrap(), t);
        // psi([[1,x,z],[0,1,y],[0,0,1]]) = (x, y, z - xy)
        let m = g.matrix();
        assert_eq!(m.get(0, 2) - m.get(0, 1) * m.get(1, 2), t[2]);
        assert!(h.malcev_coords(&h.identity()).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn rejects_non_ideal_ordering() {
        let one = BigRational::one();
        let basis = vec![
            RatMatrix::unit(3, 0, 2, one.clone()),
            RatMatrix::unit(3, 0, 1, one.clone()),
            RatMatrix::unit(3, 1, 2, one),
        ];
        assert!(FilteredNilmanifoldModel::new("bad", 3, basis, vec![3, 3, 1], false).is_err());
    }

    #[test]
    fn rejects_bad_filtration() {
        let one = BigRational::one();
        let basis = vec![
            RatMatrix::unit(3, 0, 1, one.clone()),
            RatMatrix::unit(3, 1, 2, one.clone()),
            RatMatrix::unit(3, 0, 2, one),
        ];
        // G_2 = 0 would need an abelian group
        assert!(FilteredNilmanifoldModel::new("bad", 3, basis, vec![3, 3], false).is_err());
    }

    #[test]
    fn element_outside_group() {
        let h = FilteredNilmanifoldModel::torus(1, 1).unwrap();
        let mut g = RatMatrix::identity(2);
        g.set(0, 1, q(1, 2));
        assert!(h.malcev_coords(&UnitriangularElement::new(g).unwrap()).is_ok());
        let h = FilteredNilmanifoldModel::torus(2, 1).unwrap();
        let mut g = RatMatrix::identity(3);
        g.set(1, 2, q(1, 2));
        assert!(h.malcev_coords(&UnitriangularElement::new(g).unwrap()).is_err());
    }

    #[test]
    fn frac_int_example() {
        let h = FilteredNilmanifoldModel::heisenberg_lcs();
        let g = h.from_coords(&[q(3, 2), q(-1, 4), q(7, 3)]);
        let (f, i) = h.frac_int_parts(&g).unwrap();
        assert_eq!(f.mul(&i), g);
        assert!(h.in_gamma(&i).unwrap());
        for c in h.malcev_coords(&f).unwrap() {
            assert!(!c.is_negative() && c < BigRational::one());
        }
    }

    #[test]
    fn json_round_trip() {
        let h = FilteredNilmanifoldModel::heisenberg_deg3();
        let s = serde_json::to_string(&h.to_json()).unwrap();
        let back = FilteredNilmanifoldModel::from_json_str(&s).unwrap();
        assert_eq!(back.level_dims(), h.level_dims());
        assert_eq!(back.basis(), h.basis());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn coordinates_are_bijective(vals in proptest::collection::vec((-20i64..20, 1i64..9), 3)) {
            let h = FilteredNilmanifoldModel::heisenberg_lcs();
            let t: Vec<_> = vals.iter().map(|&(n, d)| q(n, d)).collect();
            let g = h.from_coords(&t);
            prop_assert_eq!(h.malcev_coords(&g).unwrap(), t);
            let (f, i) = h.frac_int_parts(&g).unwrap();
            prop_assert_eq!(f.mul(&i), g);
            prop_assert!(h.in_gamma(&i).unwrap());
        }

        #[test]
        fn torus_coordinates_are_bijective(vals in proptest::collection::vec((-20i64..20, 1i64..9), 3)) {
            let t3 = FilteredNilmanifoldModel::torus(3, 2).unwrap();
            let t: Vec<_> = vals.iter().map(|&(n, d)| q(n, d)).collect();
            prop_assert_eq!(t3.malcev_coords(&t3.from_coords(&t)).unwrap(), t);
        }
    }
}
