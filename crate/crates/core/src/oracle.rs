//! Exact Liouvillians of small spin clusters.
//!
//! Vectorization stacks columns, `vec(AXB) = (Bᵀ ⊗ A) vec(X)`, so
//!
//! ```text
//! L = −i(1 ⊗ H − Hᵀ ⊗ 1) + Σ_c [c̄ ⊗ c − ½(1 ⊗ c†c + (c†c)ᵀ ⊗ 1)]
//! ```

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::DissipativeModel;
use crate::operator::{embed, trace_norm_hermitian, ComplexOperator};

/// Dense superoperators beyond this many spins are refused.
pub const MAX_CLUSTER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Chain,
    Ring,
    Complete,
}

impl Topology {
    /// Oriented bonds `(i, j)` with `i` carrying the first tensor factor.
    pub fn bonds(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Topology::Chain => (1..n).map(|i| (i - 1, i)).collect(),
            Topology::Ring => {
                let mut b = Topology::Chain.bonds(n);
                // two sites share a single bond, not a doubled one
                if n > 2 {
                    b.push((n - 1, 0));
                }
                b
            }
            Topology::Complete => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "chain" => Ok(Self::Chain),
            "ring" => Ok(Self::Ring),
            "complete" => Ok(Self::Complete),
            other => Err(Error::Config(format!("unknown topology '{other}' (expected chain, ring or complete)"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Chain => "chain",
            Self::Ring => "ring",
            Self::Complete => "complete",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub n: usize,
    pub matrix: DMatrix<C64>,
    pub bonds: Vec<(usize, usize)>,
}

/// Cluster Hamiltonian and jump operators, every term placed on every site
/// or bond.
pub fn cluster_terms(
    model: &DissipativeModel,
    n: usize,
    topology: Topology,
) -> Result<(ComplexOperator, Vec<ComplexOperator>)> {
    check_size(n)?;
    let bonds = topology.bonds(n);
    let mut h = ComplexOperator::zeros(n);
    for term in &model.hamiltonian_terms {
        for sites in placements(term.arity(), n, &bonds) {
            h = &h + &embed(term.matrix(), &sites, n)?;
        }
    }
    let mut jumps = Vec::new();
    for term in &model.jump_terms {
        for sites in placements(term.arity(), n, &bonds) {
            jumps.push(embed(term.matrix(), &sites, n)?);
        }
    }
    Ok((h, jumps))
}

fn placements(arity: usize, n: usize, bonds: &[(usize, usize)]) -> Vec<Vec<usize>> {
    match arity {
        1 => (0..n).map(|s| vec![s]).collect(),
        _ => bonds.iter().map(|&(i, j)| vec![i, j]).collect(),
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CLUSTER {
        return Err(Error::TooManySpins { spins: n, max: MAX_CLUSTER });
    }
    Ok(())
}

fn kron_dense(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Superoperator of a Hamiltonian and jump operators on a common space.
pub fn superoperator(h: &ComplexOperator, jumps: &[ComplexOperator]) -> DMatrix<C64> {
    let d = h.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let hm = h.matrix();
    let mut l = (kron_dense(&id, hm) - kron_dense(&hm.transpose(), &id)) * C64::new(0.0, -1.0);
    for c in jumps {
        let cm = c.matrix();
        let cdc = cm.adjoint() * cm;
        l += kron_dense(&cm.conjugate(), cm);
        l -= (kron_dense(&id, &cdc) + kron_dense(&cdc.transpose(), &id)) * C64::new(0.5, 0.0);
    }
    l
}

pub fn build_liouvillian(model: &DissipativeModel, n: usize, topology: Topology) -> Result<Liouvillian> {
    let (h, jumps) = cluster_terms(model, n, topology)?;
    Ok(Liouvillian { n, matrix: superoperator(&h, &jumps), bonds: topology.bonds(n) })
}

pub fn vectorize(rho: &ComplexOperator) -> DVector<C64> {
    DVector::from_column_slice(rho.matrix().as_slice())
}

pub fn devectorize(v: &DVector<C64>, spins: usize) -> Result<ComplexOperator> {
    let d = 1usize << spins;
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!("vector of length {} is not a {d}×{d} operator", v.len())));
    }
    ComplexOperator::new(spins, DMatrix::from_column_slice(d, d, v.as_slice()))
}

impl Liouvillian {
    pub fn apply(&self, rho: &ComplexOperator) -> Result<ComplexOperator> {
        if rho.spins() != self.n {
            return Err(Error::DimensionMismatch(format!("state on {} spins, Liouvillian on {}", rho.spins(), self.n)));
        }
        devectorize(&(&self.matrix * vectorize(rho)), self.n)
    }

    /// All eigenvalues via a complex Schur form.
    ///
    /// Degenerate spectra can stall deflation at machine precision, so the
    /// tolerance is relaxed step by step before giving up.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let iters = 200 * self.matrix.nrows().max(10);
        for eps in [f64::EPSILON, 1e-14, 1e-13, 1e-12] {
            if let Some(schur) = Schur::try_new(self.matrix.clone(), eps, iters) {
                let (_, t) = schur.unpack();
                return Ok(t.diagonal().iter().copied().collect());
            }
        }
        Err(Error::Eigensolver)
    }
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub null_dimension: usize,
    /// Hermitian, trace-one operators spanning the steady manifold.
    pub steady_states: Vec<ComplexOperator>,
    pub spectral_gap: f64,
    pub eigenvalues: Vec<C64>,
}

/// Null space of `L` from its singular values, plus the spectrum.
///
/// The steady manifold is spanned by Hermitian operators because `L`
/// commutes with the adjoint. One trace-carrying element is normalized to
/// trace one and shifted by each traceless element to give the
/// representatives.
pub fn steady_states(l: &Liouvillian, tol: f64) -> Result<SteadyStateReport> {
    let eigenvalues = l.eigenvalues()?;
    let svd = l.matrix.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or(Error::Eigensolver)?;
    let null: Vec<DVector<C64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < tol)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect();
    let null_dimension = null.len();

    // Hermitian spanning set, orthonormalized in the Frobenius inner product
    let mut herm: Vec<DMatrix<C64>> = Vec::new();
    for v in &null {
        let x = devectorize(v, l.n)?.into_matrix();
        for cand in [&x + x.adjoint(), (&x - x.adjoint()) * C64::new(0.0, 1.0)] {
            let mut y = cand;
            for b in &herm {
                let overlap = b.dotc(&y);
                y -= b * overlap;
            }
            let norm = y.norm();
            if norm > 1e-8 && herm.len() < null_dimension {
                herm.push(y / C64::new(norm, 0.0));
            }
        }
    }

    let mut steady = Vec::new();
    if let Some(k) = (0..herm.len()).max_by(|&a, &b| herm[a].trace().norm().total_cmp(&herm[b].trace().norm())) {
        let t = herm[k].trace();
        if t.norm() > 1e-10 {
            let anchor = &herm[k] / t;
            steady.push(ComplexOperator::new(l.n, anchor.clone())?.hermitian_part());
            for (j, b) in herm.iter().enumerate() {
                if j == k {
                    continue;
                }
                let traceless = b - &anchor * b.trace();
                let shifted = &anchor + traceless;
                steady.push(ComplexOperator::new(l.n, shifted)?.hermitian_part());
            }
        }
    }

    let spectral_gap = eigenvalues
        .iter()
        .filter(|e| e.norm() >= tol)
        .map(|e| -e.re)
        .fold(f64::INFINITY, f64::min);
    let spectral_gap = if spectral_gap.is_finite() { spectral_gap.max(0.0) } else { 0.0 };
    Ok(SteadyStateReport { null_dimension, steady_states: steady, spectral_gap, eigenvalues })
}

/// `‖L(ρ)‖₁` for a full cluster state.
pub fn exact_norm(model: &DissipativeModel, full_state: &ComplexOperator, n: usize, topology: Topology) -> Result<f64> {
    if full_state.spins() != n {
        return Err(Error::DimensionMismatch(format!("state on {} spins, cluster of {n}", full_state.spins())));
    }
    let l = build_liouvillian(model, n, topology)?;
    trace_norm_hermitian(&l.apply(full_state)?.hermitian_part())
}
