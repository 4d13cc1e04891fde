//! Square matrices over [`TSeries`] or [`LaurentU`], and the jet map `ρ_[k]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::laurent::{LaurentJson, LaurentU};
use crate::tseries::{TSeries, TSeriesJson};

pub trait Entry: Clone + Send + Sync {
    fn zero_in(field: &Field) -> Self;
    fn one_in(field: &Field) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_exact_zero(&self) -> bool;
    /// Valuation that makes the entry a usable pivot, `None` if it is not a unit.
    fn pivot_score(&self) -> Option<i64>;
    fn inv_unit(&self) -> Result<Self>;
    /// `(smallest known nonzero valuation, precision)`.
    fn residual_of(&self) -> (Option<i64>, i64);
}

impl Entry for LaurentU {
    fn zero_in(field: &Field) -> Self {
        LaurentU::zero(field)
    }
    fn one_in(field: &Field) -> Self {
        LaurentU::one(field)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_exact_zero(&self) -> bool {
        LaurentU::is_exact_zero(self)
    }
    fn pivot_score(&self) -> Option<i64> {
        self.valuation()
    }
    fn inv_unit(&self) -> Result<Self> {
        self.inv()
    }
    fn residual_of(&self) -> (Option<i64>, i64) {
        (self.valuation(), self.prec())
    }
}

impl Entry for TSeries {
    fn zero_in(field: &Field) -> Self {
        TSeries::zero(field)
    }
    fn one_in(field: &Field) -> Self {
        TSeries::one(field)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_exact_zero(&self) -> bool {
        self.is_polynomial() && self.coeffs().is_empty()
    }
    fn pivot_score(&self) -> Option<i64> {
        self.coeff(0).and_then(|c| c.valuation())
    }
    fn inv_unit(&self) -> Result<Self> {
        if self.is_polynomial() {
            if self.coeffs().len() == 1 {
                let c = self.coeffs()[0].inv()?;
                return Ok(TSeries::constant(c));
            }
            return Err(Error::Invalid("inverting a non-constant polynomial needs a t-truncation".into()));
        }
        self.inv(self.tprec())
    }
    fn residual_of(&self) -> (Option<i64>, i64) {
        (self.coeffs().iter().filter_map(|c| c.valuation()).min(), self.min_prec())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    field: Field,
    n: usize,
    data: Vec<R>,
}

/// Matrix over `t`-series: `Θ`, `Θ̃`, trivializations and their jets.
pub type BlockMat = Matrix<TSeries>;
/// Matrix of evaluated values.
pub type ValueMat = Matrix<LaurentU>;

impl<R: Entry> Matrix<R> {
    pub fn new(field: &Field, n: usize, data: Vec<R>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        Ok(Matrix { field: field.clone(), n, data })
    }

    pub fn from_fn(field: &Field, n: usize, f: impl Fn(usize, usize) -> R) -> Self {
        let data = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        Matrix { field: field.clone(), n, data }
    }

    pub fn zero(field: &Field, n: usize) -> Self {
        Self::from_fn(field, n, |_, _| R::zero_in(field))
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Self::from_fn(field, n, |i, j| if i == j { R::one_in(field) } else { R::zero_in(field) })
    }

    pub fn scalar(field: &Field, n: usize, c: &R) -> Self {
        Self::from_fn(field, n, |i, j| if i == j { c.clone() } else { R::zero_in(field) })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[R] {
        &self.data
    }

    pub fn map<S: Entry>(&self, f: impl Fn(&R) -> S + Sync + Send) -> Matrix<S> {
        Matrix { field: self.field.clone(), n: self.n, data: self.data.par_iter().map(f).collect() }
    }

    pub fn try_map<S: Entry>(&self, f: impl Fn(&R) -> Result<S> + Sync + Send) -> Result<Matrix<S>> {
        let data = self.data.par_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Matrix { field: self.field.clone(), n: self.n, data })
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch(format!("{}x{0} vs {}x{1}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Ok(Matrix { field: self.field.clone(), n: self.n, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        Ok(Matrix { field: self.field.clone(), n: self.n, data })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let n = self.n;
        let data = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let mut acc = R::zero_in(&self.field);
                for l in 0..n {
                    let (a, b) = (self.get(i, l), other.get(l, j));
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                acc
            })
            .collect();
        Ok(Matrix { field: self.field.clone(), n, data })
    }

    pub fn scale(&self, c: &R) -> Self {
        self.map(|x| c.mul(x))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| self.get(j, i).clone())
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::identity(&self.field, self.n);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Square block of rows and columns `start..start+size`.
    pub fn block(&self, start: usize, size: usize) -> Result<Self> {
        if start + size > self.n {
            return Err(Error::ShapeMismatch(format!("block {start}+{size} outside {}", self.n)));
        }
        Ok(Self::from_fn(&self.field, size, |i, j| self.get(start + i, start + j).clone()))
    }

    /// `r x r` block at block position `(bi, bj)`.
    pub fn sub_block(&self, r: usize, bi: usize, bj: usize) -> Self {
        Self::from_fn(&self.field, r, |i, j| self.get(bi * r + i, bj * r + j).clone())
    }

    /// Assembles a square matrix from a square grid of equally sized blocks.
    pub fn from_blocks(field: &Field, blocks: &[Vec<Self>]) -> Result<Self> {
        let b = blocks.len();
        let r = blocks.first().and_then(|row| row.first()).map_or(0, |m| m.n);
        if blocks.iter().any(|row| row.len() != b || row.iter().any(|m| m.n != r)) {
            return Err(Error::ShapeMismatch("ragged block grid".into()));
        }
        Ok(Self::from_fn(field, b * r, |i, j| blocks[i / r][j / r].get(i % r, j % r).clone()))
    }

    /// Determinant by Berkowitz' division-free algorithm.
    pub fn det(&self) -> R {
        let n = self.n;
        let f = &self.field;
        if n == 0 {
            return R::one_in(f);
        }
        // coefficients of det(x - A_r), leading first
        let mut v = vec![R::one_in(f), self.get(0, 0).neg()];
        for r in 1..n {
            let mut t = vec![R::one_in(f), self.get(r, r).neg()];
            let mut w: Vec<R> = (0..r).map(|i| self.get(i, r).clone()).collect();
            for k in 0..r {
                let mut s = R::zero_in(f);
                for (j, wj) in w.iter().enumerate() {
                    s = s.add(&self.get(r, j).mul(wj));
                }
                t.push(s.neg());
                if k + 1 < r {
                    w = (0..r)
                        .map(|i| {
                            let mut s = R::zero_in(f);
                            for (j, wj) in w.iter().enumerate() {
                                s = s.add(&self.get(i, j).mul(wj));
                            }
                            s
                        })
                        .collect();
                }
            }
            let next = (0..r + 2)
                .map(|i| {
                    let mut s = R::zero_in(f);
                    for j in 0..=i.min(r) {
                        s = s.add(&t[i - j].mul(&v[j]));
                    }
                    s
                })
                .collect();
            v = next;
        }
        if n % 2 == 1 {
            v[n].neg()
        } else {
            v[n].clone()
        }
    }

    /// Gauss-Jordan inverse; every pivot must be a unit at the tracked precision.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let f = &self.field;
        let mut a = self.data.clone();
        let mut b = Self::identity(f, n).data;
        for col in 0..n {
            let pivot = (col..n)
                .filter_map(|r| a[r * n + col].pivot_score().map(|s| (s, r)))
                .min()
                .map(|(_, r)| r)
                .ok_or(Error::SingularPivot(col))?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    b.swap(pivot * n + j, col * n + j);
                }
            }
            let inv = a[col * n + col].inv_unit()?;
            for j in 0..n {
                a[col * n + j] = inv.mul(&a[col * n + j]);
                b[col * n + j] = inv.mul(&b[col * n + j]);
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_exact_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    a[r * n + j] = a[r * n + j].sub(&factor.mul(&a[col * n + j]));
                    b[r * n + j] = b[r * n + j].sub(&factor.mul(&b[col * n + j]));
                }
            }
        }
        Ok(Matrix { field: f.clone(), n, data: b })
    }

    /// Smallest known nonzero valuation among entries of `self - other`, with the least precision.
    pub fn residual(&self, other: &Self) -> Result<(Option<i64>, i64)> {
        let d = self.sub(other)?;
        let mut val = None::<i64>;
        let mut prec = i64::MAX;
        for e in &d.data {
            let (v, p) = e.residual_of();
            val = match (val, v) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            prec = prec.min(p);
        }
        Ok((val, prec))
    }

    pub fn agrees(&self, other: &Self) -> bool {
        matches!(self.residual(other), Ok((None, _)))
    }
}

impl Matrix<TSeries> {
    pub fn hyperderive(&self, k: usize) -> Self {
        self.map(|x| x.hyperderive(k))
    }

    pub fn twist(&self, k: i32) -> Result<Self> {
        self.try_map(|x| x.twist(k))
    }

    pub fn eval_at_theta(&self) -> Result<ValueMat> {
        self.try_map(|x| x.eval_at_theta(None))
    }

    pub fn to_json(&self) -> Vec<Vec<TSeriesJson>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).to_json()).collect()).collect()
    }

    pub fn from_json(field: &Field, rows: &[Vec<TSeriesJson>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("matrix rows must form a square".into()));
        }
        let data = rows.iter().flatten().map(|e| TSeries::from_json(field, e)).collect::<Result<Vec<_>>>()?;
        Matrix::new(field, n, data)
    }
}

impl Matrix<LaurentU> {
    pub fn to_json(&self) -> Vec<Vec<LaurentJson>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).to_json()).collect()).collect()
    }

    pub fn from_json(field: &Field, rows: &[Vec<LaurentJson>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("matrix rows must form a square".into()));
        }
        let data = rows.iter().flatten().map(|e| LaurentU::from_json(field, e)).collect::<Result<Vec<_>>>()?;
        Matrix::new(field, n, data)
    }
}

/// Upper-triangular Toeplitz matrix with first row `first_row`.
pub fn toeplitz_upper<R: Entry>(field: &Field, first_row: &[R]) -> Matrix<R> {
    Matrix::from_fn(field, first_row.len(), |i, j| {
        if j >= i {
            first_row[j - i].clone()
        } else {
            R::zero_in(field)
        }
    })
}

/// `ρ_[k](f)`: entry `(i, j)` is `∂^(j-i) f` on and above the diagonal.
pub fn rho(f: &TSeries, k: usize) -> BlockMat {
    let derivs: Vec<TSeries> = (0..=k).map(|j| f.hyperderive(j)).collect();
    toeplitz_upper(f.field(), &derivs)
}

/// `ρ_[k](Θ)`: block `(i, j)` is `∂^(j-i) Θ`.
pub fn rho_mat(theta: &BlockMat, k: usize) -> BlockMat {
    let f = theta.field();
    let r = theta.n();
    let derivs: Vec<BlockMat> = (0..=k).map(|j| theta.hyperderive(j)).collect();
    Matrix::from_fn(f, r * (k + 1), |i, j| {
        let (bi, bj) = (i / r, j / r);
        if bj >= bi {
            derivs[bj - bi].get(i % r, j % r).clone()
        } else {
            TSeries::zero(f)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    /// Leading `(l+1)r` block equals `ρ_[l](Θ)`.
    pub sub: bool,
    /// Trailing `(k-l)r` block equals `ρ_[k-l-1](Θ)`.
    pub quotient: bool,
}

/// Checks that `a = ρ_[k](Θ)` contains `ρ_[l](Θ)` and projects onto `ρ_[k-l-1](Θ)`.
pub fn block_structure_check(a: &BlockMat, r: usize, k: usize, l: usize) -> Result<BlockStructure> {
    if r == 0 || a.n() != r * (k + 1) || l > k {
        return Err(Error::ShapeMismatch(format!("size {} is not r(k+1) = {r}*{} or l > k", a.n(), k + 1)));
    }
    let theta = a.block(0, r)?;
    let sub = a.block(0, r * (l + 1))?.agrees(&rho_mat(&theta, l));
    let quotient = if k == l {
        true
    } else {
        let size = r * (k - l);
        a.block(a.n() - size, size)?.agrees(&rho_mat(&theta, k - l - 1))
    };
    Ok(BlockStructure { sub, quotient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaloisField;

    fn poly(f: &Field, cs: &[i64]) -> TSeries {
        TSeries::polynomial(f, cs.iter().map(|&c| LaurentU::from_int(f, c)).collect())
    }

    #[test]
    fn rho_examples() {
        let f = GaloisField::for_q(3, 1).unwrap();
        let tt = TSeries::t_minus_theta(&f);
        assert_eq!(rho(&tt, 0), Matrix::new(&f, 1, vec![tt.clone()]).unwrap());
        let expected = Matrix::new(&f, 2, vec![tt.clone(), TSeries::one(&f), TSeries::zero(&f), tt.clone()]).unwrap();
        assert_eq!(rho(&tt, 1), expected);
        let one_by_one = Matrix::new(&f, 1, vec![tt.clone()]).unwrap();
        assert_eq!(rho_mat(&one_by_one, 3), rho(&tt, 3));
        assert_eq!(rho_mat(&one_by_one, 0), one_by_one);
    }

    #[test]
    fn berkowitz_matches_cofactor_expansion() {
        let f = GaloisField::for_q(5, 1).unwrap();
        let m = Matrix::from_fn(&f, 3, |i, j| LaurentU::from_int(&f, (i * 3 + j * j + 1) as i64));
        let g = |i, j| m.get(i, j).clone();
        let cof = &(&(&g(0, 0) * &(&(&g(1, 1) * &g(2, 2)) - &(&g(1, 2) * &g(2, 1))))
            - &(&g(0, 1) * &(&(&g(1, 0) * &g(2, 2)) - &(&g(1, 2) * &g(2, 0)))))
            + &(&g(0, 2) * &(&(&g(1, 0) * &g(2, 1)) - &(&g(1, 1) * &g(2, 0))));
        assert_eq!(m.det(), cof);
        assert_eq!(Matrix::<LaurentU>::identity(&f, 4).det(), LaurentU::one(&f));
    }

    #[test]
    fn det_of_rho_is_power() {
        let f = GaloisField::for_q(2, 1).unwrap();
        let tt = TSeries::t_minus_theta(&f);
        for k in 0..4 {
            assert_eq!(rho(&tt, k).det(), tt.pow(k as u32 + 1));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = GaloisField::for_q(3, 1).unwrap();
        let th = LaurentU::theta(&f);
        let m = Matrix::from_fn(&f, 3, |i, j| if i <= j { th.pow((i + j) as u32) } else { LaurentU::u(&f) })
            .map(|x| x.truncate(60));
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().agrees(&Matrix::identity(&f, 3)));
        let singular = Matrix::<LaurentU>::zero(&f, 2);
        assert!(matches!(singular.inverse(), Err(Error::SingularPivot(0))));
    }

    #[test]
    fn block_structure_examples() {
        let f = GaloisField::for_q(2, 1).unwrap();
        let theta = Matrix::new(&f, 2, vec![poly(&f, &[1, 1]), poly(&f, &[0, 0, 1]), poly(&f, &[1]), poly(&f, &[0, 1, 1, 1])])
            .unwrap();
        let a = rho_mat(&theta, 3);
        assert_eq!(block_structure_check(&a, 2, 3, 1).unwrap(), BlockStructure { sub: true, quotient: true });
        let a1 = rho_mat(&theta, 1);
        assert_eq!(a1.block(0, 2).unwrap(), theta);
        assert_eq!(a1.block(2, 2).unwrap(), theta);
        assert_eq!(block_structure_check(&a, 2, 3, 3).unwrap(), BlockStructure { sub: true, quotient: true });
        let mut broken = a.clone();
        broken.set(7, 7, poly(&f, &[1]));
        assert!(!block_structure_check(&broken, 2, 3, 1).unwrap().quotient);
        assert!(block_structure_check(&a, 3, 3, 1).is_err());
    }

    #[test]
    fn json_rejects_ragged() {
        let f = GaloisField::for_q(2, 1).unwrap();
        let m = rho(&TSeries::t_minus_theta(&f), 1);
        let j = m.to_json();
        assert_eq!(BlockMat::from_json(&f, &j).unwrap(), m);
        let mut ragged = j.clone();
        ragged[0].pop();
        assert!(BlockMat::from_json(&f, &ragged).is_err());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::field::GaloisField;
    use proptest::prelude::*;

    fn arb_poly(f: Field) -> impl Strategy<Value = TSeries> {
        let order = f.order() as u32;
        prop::collection::vec((0..order, -3i64..3), 0..5).prop_map(move |cs| {
            let coeffs = cs.into_iter().map(|(c, e)| LaurentU::monomial(&f, f.from_packed(c).unwrap(), e)).collect();
            TSeries::polynomial(&f, coeffs)
        })
    }

    fn arb_mat(f: Field) -> impl Strategy<Value = BlockMat> {
        let g = f.clone();
        prop::collection::vec(arb_poly(f), 4).prop_map(move |d| Matrix::new(&g, 2, d).unwrap())
    }

    proptest! {
        #[test]
        fn rho_is_multiplicative(a in arb_poly(GaloisField::for_q(3, 1).unwrap()),
                                 b in arb_poly(GaloisField::for_q(3, 1).unwrap()), k in 0usize..5) {
            prop_assert_eq!(rho(&(&a * &b), k), rho(&a, k).mul(&rho(&b, k)).unwrap());
        }

        #[test]
        fn rho_mat_is_multiplicative(a in arb_mat(GaloisField::for_q(2, 1).unwrap()),
                                     b in arb_mat(GaloisField::for_q(2, 1).unwrap()), k in 0usize..4) {
            let lhs = rho_mat(&a.mul(&b).unwrap(), k);
            let rhs = rho_mat(&a, k).mul(&rho_mat(&b, k)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rho_commutes_with_twist(a in arb_mat(GaloisField::for_q(3, 1).unwrap()), k in 0usize..4) {
            prop_assert_eq!(rho_mat(&a.twist(1).unwrap(), k), rho_mat(&a, k).twist(1).unwrap());
            let up = a.twist(1).unwrap();
            prop_assert_eq!(rho_mat(&up.twist(-1).unwrap(), k), rho_mat(&up, k).twist(-1).unwrap());
        }

        #[test]
        fn det_rho_is_power(a in arb_poly(GaloisField::for_q(2, 1).unwrap()), k in 0usize..4) {
            prop_assert_eq!(rho(&a, k).det(), a.pow(k as u32 + 1));
        }

        #[test]
        fn scalar_consistency(c in arb_poly(GaloisField::for_q(3, 1).unwrap()),
                              a in arb_mat(GaloisField::for_q(3, 1).unwrap()), k in 0usize..3) {
            let f = a.field().clone();
            let lhs = rho_mat(&a.scale(&c), k);
            let c_block = rho_mat(&Matrix::scalar(&f, 2, &c), k);
            prop_assert_eq!(lhs, c_block.mul(&rho_mat(&a, k)).unwrap());
            prop_assert_eq!(rho_mat(&BlockMat::identity(&f, 2), k), BlockMat::identity(&f, 2 * (k + 1)));
        }
    }
}
