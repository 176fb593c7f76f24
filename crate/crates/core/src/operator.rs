//! Dense operator algebra on few-spin Hilbert spaces.
//!
//! Basis convention: each spin has basis `{↑, ↓}` = indices `{0, 1}` with
//! `σ_z|↑⟩ = +|↑⟩`. Multi-spin indices are big-endian: site 0 is the most
//! significant bit, so the two-site basis reads `{↑↑, ↑↓, ↓↑, ↓↓}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest spin count any operator may carry (dimension 4096).
pub const MAX_SPINS: usize = 12;

/// Tolerance used to accept an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex square matrix acting on `spins` spin-1/2 sites.
#[derive(Clone, PartialEq)]
pub struct ComplexOperator {
    spins: usize,
    mat: DMatrix<C64>,
}

impl fmt::Debug for ComplexOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexOperator({} spins){}", self.spins, self.mat)
    }
}

impl ComplexOperator {
    pub fn new(spins: usize, mat: DMatrix<C64>) -> Result<Self> {
        if spins > MAX_SPINS {
            return Err(Error::TooManySpins { spins, max: MAX_SPINS });
        }
        let dim = 1usize << spins;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {spins} spins",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { spins, mat })
    }

    /// Wraps a square matrix whose dimension is a power of two.
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        Self::new(dim.trailing_zeros() as usize, mat)
    }

    /// Builds a `2^spins` square operator from a row-major slice.
    pub fn from_rows(spins: usize, entries: &[C64]) -> Result<Self> {
        let dim = 1usize << spins;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} operator",
                entries.len()
            )));
        }
        Self::new(spins, DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Same as [`from_rows`](Self::from_rows) for purely real entries.
    pub fn from_real_rows(spins: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(spins, &c)
    }

    pub(crate) fn from_parts_unchecked(spins: usize, mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << spins);
        Self { spins, mat }
    }

    pub fn identity(spins: usize) -> Self {
        let dim = 1 << spins;
        Self { spins, mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(spins: usize) -> Self {
        let dim = 1 << spins;
        Self { spins, mat: DMatrix::zeros(dim, dim) }
    }

    /// `|ket⟩⟨bra|` for two state vectors of equal dimension.
    pub fn ket_bra(ket: &DVector<C64>, bra: &DVector<C64>) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} against bra of length {}",
                ket.len(),
                bra.len()
            )));
        }
        Self::from_matrix(ket * bra.adjoint())
    }

    /// Projector onto a single computational basis state.
    pub fn basis_projector(spins: usize, index: usize) -> Self {
        let mut op = Self::zeros(spins);
        op.mat[(index, index)] = C64::new(1.0, 0.0);
        op
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { spins: self.spins, mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { spins: self.spins, mat: &self.mat * s }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.mat * v
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self { spins: self.spins, mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0) }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { spins: self.spins, mat: &self.mat * &other.mat - &other.mat * &self.mat })
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { spins: self.spins, mat: &self.mat * &other.mat + &other.mat * &self.mat })
    }

    /// Real eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        let mut ev: Vec<f64> = h.mat.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.spins != other.spins {
            return Err(Error::DimensionMismatch(format!(
                "{}-spin operator against {}-spin operator",
                self.spins, other.spins
            )));
        }
        Ok(())
    }
}

impl<'a> Add<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.spins, rhs.spins, "spin count mismatch in add");
        ComplexOperator { spins: self.spins, mat: &self.mat + &rhs.mat }
    }
}

impl Add for ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: ComplexOperator) -> ComplexOperator {
        &self + &rhs
    }
}

impl<'a> Sub<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.spins, rhs.spins, "spin count mismatch in sub");
        ComplexOperator { spins: self.spins, mat: &self.mat - &rhs.mat }
    }
}

impl Sub for ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: ComplexOperator) -> ComplexOperator {
        &self - &rhs
    }
}

impl<'a> Mul<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.spins, rhs.spins, "spin count mismatch in mul");
        ComplexOperator { spins: self.spins, mat: &self.mat * &rhs.mat }
    }
}

impl Mul for ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: ComplexOperator) -> ComplexOperator {
        &self * &rhs
    }
}

impl Neg for ComplexOperator {
    type Output = ComplexOperator;
    fn neg(self) -> ComplexOperator {
        ComplexOperator { spins: self.spins, mat: -self.mat }
    }
}

impl std::iter::Sum for ComplexOperator {
    fn sum<I: Iterator<Item = ComplexOperator>>(mut iter: I) -> ComplexOperator {
        let first = iter.next().expect("sum of an empty operator iterator");
        iter.fold(first, |acc, x| acc + x)
    }
}

/// Single-spin operator labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
    /// `σ⁺ = |↑⟩⟨↓|`
    Plus,
    /// `σ⁻ = |↓⟩⟨↑| = (σ_x − iσ_y)/2`
    Minus,
}

impl Pauli {
    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "i" | "I" | "1" | "identity" => Pauli::I,
            "x" | "X" => Pauli::X,
            "y" | "Y" => Pauli::Y,
            "z" | "Z" => Pauli::Z,
            "+" | "plus" => Pauli::Plus,
            "-" | "minus" => Pauli::Minus,
            _ => return None,
        })
    }
}

pub fn pauli(axis: Pauli) -> ComplexOperator {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let e = match axis {
        Pauli::I => [l, o, o, l],
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
        Pauli::Plus => [o, l, o, o],
        Pauli::Minus => [o, o, l, o],
    };
    ComplexOperator::from_parts_unchecked(1, DMatrix::from_row_slice(2, 2, &e))
}

/// Bloch vector of a single spin-1/2 state.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BlochState {
    pub alpha: [f64; 3],
}

impl BlochState {
    /// Slack accepted beyond the unit sphere.
    pub const BALL_TOL: f64 = 1e-12;

    pub fn new(alpha: [f64; 3]) -> Result<Self> {
        let len = norm3(alpha);
        if !len.is_finite() || len > 1.0 + Self::BALL_TOL {
            return Err(Error::OutsideBlochBall(len));
        }
        Ok(Self { alpha })
    }

    pub const fn maximally_mixed() -> Self {
        Self { alpha: [0.0; 3] }
    }

    /// Scales the vector back onto the unit sphere if it lies outside.
    pub fn projected(alpha: [f64; 3]) -> Self {
        let len = norm3(alpha);
        if len > 1.0 {
            Self { alpha: alpha.map(|a| a / len) }
        } else {
            Self { alpha }
        }
    }

    pub fn length(&self) -> f64 {
        norm3(self.alpha)
    }

    pub fn density(&self) -> ComplexOperator {
        let [x, y, z] = self.alpha;
        let h = 0.5;
        let e = [
            C64::new(h * (1.0 + z), 0.0),
            C64::new(h * x, -h * y),
            C64::new(h * x, h * y),
            C64::new(h * (1.0 - z), 0.0),
        ];
        ComplexOperator::from_parts_unchecked(1, DMatrix::from_row_slice(2, 2, &e))
    }

    /// `tr(op ρ)` for a single-spin operator.
    pub fn expectation(&self, op: &ComplexOperator) -> C64 {
        (op.matrix() * self.density().matrix()).trace()
    }
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// `ρ = (1 + α·σ)/2`, rejecting vectors outside the Bloch ball.
pub fn bloch_to_density(alpha: [f64; 3]) -> Result<ComplexOperator> {
    Ok(BlochState::new(alpha)?.density())
}

/// Tensor product, leftmost factor on the most significant sites.
pub fn kron(a: &ComplexOperator, b: &ComplexOperator) -> Result<ComplexOperator> {
    let spins = a.spins + b.spins;
    if spins > MAX_SPINS {
        return Err(Error::TooManySpins { spins, max: MAX_SPINS });
    }
    Ok(ComplexOperator::from_parts_unchecked(spins, a.mat.kronecker(&b.mat)))
}

/// Tensor product of a non-empty list of operators.
pub fn kron_all<'a, I>(ops: I) -> Result<ComplexOperator>
where
    I: IntoIterator<Item = &'a ComplexOperator>,
{
    let mut iter = ops.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty tensor product".into()))?
        .clone();
    iter.try_fold(first, |acc, op| kron(&acc, op))
}

fn check_sites(sites: &[usize], spins: usize) -> Result<()> {
    for (k, &s) in sites.iter().enumerate() {
        if s >= spins || sites[..k].contains(&s) {
            return Err(Error::InvalidSite { site: s, spins });
        }
    }
    Ok(())
}

/// Gathers the bits of `index` at `sites` (big-endian over `spins`) into a
/// compact index whose most significant bit is `sites[0]`.
#[inline]
fn gather_bits(index: usize, sites: &[usize], spins: usize) -> usize {
    sites
        .iter()
        .fold(0, |acc, &s| (acc << 1) | ((index >> (spins - 1 - s)) & 1))
}

/// Embeds an operator on `sites.len()` spins into an `spins`-spin space,
/// acting as identity elsewhere. `sites[k]` receives the `k`-th factor.
pub fn embed(op: &ComplexOperator, sites: &[usize], spins: usize) -> Result<ComplexOperator> {
    if op.spins() != sites.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}-spin operator placed on {} sites",
            op.spins(),
            sites.len()
        )));
    }
    if spins > MAX_SPINS {
        return Err(Error::TooManySpins { spins, max: MAX_SPINS });
    }
    check_sites(sites, spins)?;
    let rest_mask = (0..spins)
        .filter(|s| !sites.contains(s))
        .fold(0usize, |m, s| m | (1 << (spins - 1 - s)));
    let dim = 1usize << spins;
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        let rs = gather_bits(r, sites, spins);
        for c in 0..dim {
            if r & rest_mask == c & rest_mask {
                out[(r, c)] = op.mat[(rs, gather_bits(c, sites, spins))];
            }
        }
    }
    Ok(ComplexOperator::from_parts_unchecked(spins, out))
}

/// Partial trace keeping `keep` (in the given order) and tracing out every
/// other site.
pub fn partial_trace(op: &ComplexOperator, keep: &[usize]) -> Result<ComplexOperator> {
    let n = op.spins();
    check_sites(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let scatter = |k: usize, t: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &s) in keep.iter().enumerate() {
            let bit = (k >> (keep.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - s);
        }
        for (pos, &s) in traced.iter().enumerate() {
            let bit = (t >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - s);
        }
        idx
    };
    let mut out = DMatrix::zeros(kd, kd);
    for r in 0..kd {
        for c in 0..kd {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                acc += op.mat[(scatter(r, t), scatter(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(ComplexOperator::from_parts_unchecked(keep.len(), out))
}

/// Block of `op` with the spins at `sites` pinned to the basis state
/// `fixed` (big-endian over `sites`) in both row and column; the result acts
/// on the remaining spins in their original order.
pub fn site_block(op: &ComplexOperator, sites: &[usize], fixed: usize) -> Result<ComplexOperator> {
    let n = op.spins();
    check_sites(sites, n)?;
    let free: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let scatter = |f: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &s) in free.iter().enumerate() {
            idx |= ((f >> (free.len() - 1 - pos)) & 1) << (n - 1 - s);
        }
        for (pos, &s) in sites.iter().enumerate() {
            idx |= ((fixed >> (sites.len() - 1 - pos)) & 1) << (n - 1 - s);
        }
        idx
    };
    let d = 1usize << free.len();
    let mat = DMatrix::from_fn(d, d, |r, c| op.mat[(scatter(r), scatter(c))]);
    Ok(ComplexOperator::from_parts_unchecked(free.len(), mat))
}

/// Lindblad dissipator `cρc† − ½{c†c, ρ}`.
pub fn dissipator(c: &ComplexOperator, rho: &ComplexOperator) -> Result<ComplexOperator> {
    c.check_same(rho)?;
    let cd = c.mat.adjoint();
    let cdc = &cd * &c.mat;
    let half = C64::new(0.5, 0.0);
    let mat = &c.mat * &rho.mat * &cd - (&cdc * &rho.mat + &rho.mat * &cdc) * half;
    Ok(ComplexOperator::from_parts_unchecked(c.spins, mat))
}

/// Trace norm of a Hermitian operator: the sum of absolute eigenvalues.
///
/// The input is symmetrized before the eigensolve; deviations from
/// Hermiticity above [`HERMITIAN_TOL`] (relative to the operator scale)
/// are rejected.
pub fn trace_norm_hermitian(op: &ComplexOperator) -> Result<f64> {
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_TOL * op.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(op.hermitian_eigenvalues().iter().map(|e| e.abs()).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellSign {
    Plus,
    Minus,
}

/// `|ψ±⟩ = (|↑↓⟩ ± |↓↑⟩)/√2`.
pub fn bell_state(sign: BellSign) -> DVector<C64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let b = match sign {
        BellSign::Plus => a,
        BellSign::Minus => -a,
    };
    DVector::from_vec(vec![
        C64::new(0.0, 0.0),
        C64::new(a, 0.0),
        C64::new(b, 0.0),
        C64::new(0.0, 0.0),
    ])
}

/// Computational basis vector on `spins` sites.
pub fn basis_ket(spins: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(1 << spins);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Single-spin pure state with polar angle `theta` and azimuth `phi`.
pub fn spin_coherent_ket(theta: f64, phi: f64) -> DVector<C64> {
    DVector::from_vec(vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// `exp(−i θ n̂·σ / 2)` for a unit axis `n̂`.
pub fn spin_rotation(axis: [f64; 3], theta: f64) -> ComplexOperator {
    let len = norm3(axis);
    let [x, y, z] = axis.map(|a| a / len);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = [
        C64::new(c, -s * z),
        C64::new(-s * y, -s * x),
        C64::new(s * y, -s * x),
        C64::new(c, s * z),
    ];
    ComplexOperator::from_parts_unchecked(1, DMatrix::from_row_slice(2, 2, &e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_conventions() {
        let z = pauli(Pauli::Z);
        assert_eq!(z.get(0, 0), c(1.0, 0.0));
        assert_eq!(z.get(1, 1), c(-1.0, 0.0));
        // σ⁻ lowers ↑ (index 0) to ↓ (index 1)
        let m = pauli(Pauli::Minus);
        assert_eq!(m.get(1, 0), c(1.0, 0.0));
        assert_eq!(m.max_abs_diff(&ComplexOperator::basis_projector(1, 0)), 1.0);
        let lowered = (&pauli(Pauli::X) - &pauli(Pauli::Y).scale(c(0.0, 1.0))).scale_re(0.5);
        assert!(lowered.max_abs_diff(&m) < 1e-15);
        let xx = &pauli(Pauli::X) * &pauli(Pauli::X);
        assert!(xx.max_abs_diff(&ComplexOperator::identity(1)) < 1e-15);
    }

    #[test]
    fn bloch_examples() {
        let up = bloch_to_density([0.0, 0.0, 1.0]).unwrap();
        assert!(up.max_abs_diff(&ComplexOperator::basis_projector(1, 0)) < 1e-15);
        let mixed = bloch_to_density([0.0; 3]).unwrap();
        assert!(mixed.max_abs_diff(&ComplexOperator::identity(1).scale_re(0.5)) < 1e-15);
        let plus_x = bloch_to_density([1.0, 0.0, 0.0]).unwrap();
        let want = ComplexOperator::from_real_rows(1, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(plus_x.max_abs_diff(&want) < 1e-15);
        assert!(matches!(
            bloch_to_density([1.0, 1e-3, 0.0]),
            Err(Error::OutsideBlochBall(_))
        ));
    }

    #[test]
    fn kron_examples() {
        let i4 = kron(&ComplexOperator::identity(1), &ComplexOperator::identity(1)).unwrap();
        assert_eq!(i4, ComplexOperator::identity(2));
        let up = ComplexOperator::basis_projector(1, 0);
        let down = ComplexOperator::basis_projector(1, 1);
        assert_eq!(kron(&up, &down).unwrap(), ComplexOperator::basis_projector(2, 1));
        // σ_z ⊗ σ_x maps ↑↑ to ↑↓ with weight (+1)(1)
        let zx = kron(&pauli(Pauli::Z), &pauli(Pauli::X)).unwrap();
        assert_eq!(zx.get(1, 0), c(1.0, 0.0));
        assert_eq!(zx.get(3, 2), c(-1.0, 0.0));
    }

    #[test]
    fn kron_rejects_oversized_products() {
        let big = ComplexOperator::identity(7);
        assert!(matches!(kron(&big, &big), Err(Error::TooManySpins { spins: 14, .. })));
    }

    #[test]
    fn embed_matches_kron() {
        let a = pauli(Pauli::X);
        let b = pauli(Pauli::Y);
        let ab = kron(&a, &b).unwrap();
        let direct = kron(&ab, &ComplexOperator::identity(1)).unwrap();
        assert!(embed(&ab, &[0, 1], 3).unwrap().max_abs_diff(&direct) < 1e-15);
        // reversed placement equals the swapped product
        let ba = kron(&kron(&b, &ComplexOperator::identity(1)).unwrap(), &a).unwrap();
        assert!(embed(&ab, &[2, 0], 3).unwrap().max_abs_diff(&ba) < 1e-15);
        assert!(matches!(embed(&ab, &[0, 0], 3), Err(Error::InvalidSite { .. })));
    }

    #[test]
    fn partial_trace_examples() {
        let a = ComplexOperator::from_rows(1, &[c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0), c(-1.0, 3.0)])
            .unwrap();
        let b = ComplexOperator::from_rows(1, &[c(0.3, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.2, 0.1)])
            .unwrap();
        let ab = kron(&a, &b).unwrap();
        let got = partial_trace(&ab, &[0]).unwrap();
        assert!(got.max_abs_diff(&a.scale(b.trace())) < 1e-14);
        let got = partial_trace(&ab, &[1]).unwrap();
        assert!(got.max_abs_diff(&b.scale(a.trace())) < 1e-14);

        let psi = bell_state(BellSign::Plus);
        let bell = ComplexOperator::ket_bra(&psi, &psi).unwrap();
        let marginal = partial_trace(&bell, &[0]).unwrap();
        assert!(marginal.max_abs_diff(&ComplexOperator::identity(1).scale_re(0.5)) < 1e-15);

        assert!(matches!(partial_trace(&bell, &[2]), Err(Error::InvalidSite { site: 2, .. })));
    }

    #[test]
    fn partial_trace_reorders_kept_sites() {
        let a = pauli(Pauli::X);
        let b = pauli(Pauli::Z);
        let rho = kron(&kron(&a, &ComplexOperator::identity(1)).unwrap(), &b).unwrap();
        let kept = partial_trace(&rho, &[2, 0]).unwrap();
        assert!(kept.max_abs_diff(&kron(&b, &a).unwrap().scale_re(2.0)) < 1e-15);
    }

    #[test]
    fn dissipator_examples() {
        let up = ComplexOperator::basis_projector(1, 0);
        let down = ComplexOperator::basis_projector(1, 1);
        let d = dissipator(&pauli(Pauli::Minus), &up).unwrap();
        assert!(d.max_abs_diff(&(&down - &up)) < 1e-15);
        // dark state
        let d = dissipator(&pauli(Pauli::Minus), &down).unwrap();
        assert!(d.max_abs() < 1e-15);
        assert!(dissipator(&pauli(Pauli::Minus), &ComplexOperator::identity(2)).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        let d = ComplexOperator::from_real_rows(1, &[0.5, 0.0, 0.0, -0.5]).unwrap();
        assert!((trace_norm_hermitian(&d).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_norm_hermitian(&ComplexOperator::zeros(2)).unwrap(), 0.0);
        assert!(matches!(
            trace_norm_hermitian(&pauli(Pauli::Plus)),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn bell_states() {
        let p = bell_state(BellSign::Plus);
        let m = bell_state(BellSign::Minus);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p[1].re - s).abs() < 1e-15 && (p[2].re - s).abs() < 1e-15);
        assert!((m[1].re - s).abs() < 1e-15 && (m[2].re + s).abs() < 1e-15);
        assert!(p.dotc(&m).norm() < 1e-15);
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_is_exponential_of_generator() {
        // R = cos(θ/2) − i sin(θ/2) n̂·σ
        let axis = [0.3, -0.4, 0.5];
        let r = spin_rotation(axis, 0.9);
        let u = &r * &r.adjoint();
        assert!(u.max_abs_diff(&ComplexOperator::identity(1)) < 1e-14);
        let rz = spin_rotation([0.0, 0.0, 1.0], 0.9);
        assert!((rz.get(0, 0) - C64::from_polar(1.0, -0.45)).norm() < 1e-14);
    }

    #[test]
    fn coherent_ket_matches_bloch_density() {
        let (theta, phi) = (1.1, -0.7);
        let v = spin_coherent_ket(theta, phi);
        let rho = ComplexOperator::ket_bra(&v, &v).unwrap();
        let alpha = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        assert!(rho.max_abs_diff(&BlochState::new(alpha).unwrap().density()) < 1e-14);
    }
}
