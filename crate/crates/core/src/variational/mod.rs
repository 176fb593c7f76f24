//! Variational steady states of translation-invariant dissipative lattices.
//!
//! The state is a product of single-site density matrices, either identical
//! on every site (uniform) or alternating between two sublattices
//! (bipartite). The many-body functional `‖dρ/dt‖` is bounded by a sum over
//! bonds of the trace norm of the two-site reduced derivative
//!
//! ```text
//! dρ_ij/dt = ρ̇_loc + ρ̇_int + ρ̇_mf
//! ```
//!
//! where the mean-field part collects the `2(z − 1)` bonds that connect the
//! pair to the rest of the lattice. On a homogeneous lattice every bond
//! contributes the same amount, so a single bond norm is minimized.

mod critical;
mod functional;
mod landau;
mod minimize;
mod nelder_mead;

pub use critical::{fit_critical, fit_power_law, CriticalFit, FitWindow, OrderParameter, ORDER_THRESHOLD};
pub use functional::VariationalFunctional;
pub use landau::{landau_expansion, u2_root, LandauDirection, LandauFit};
pub use minimize::{minimize_norm, MinimizeOptions, Minimum};
pub use nelder_mead::{NelderMead, Simplex, SimplexOutcome};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{AnsatzKind, DissipativeModel};
use crate::operator::{
    dissipator, embed, kron, kron_all, partial_trace, pauli, trace_norm_hermitian, BlochState,
    ComplexOperator, Pauli,
};

/// Product state `ρ_A ⊗ ρ_B ⊗ ρ_A ⊗ …`; `b == a` for the uniform kind.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ProductAnsatz {
    pub kind: AnsatzKind,
    pub a: BlochState,
    pub b: BlochState,
}

impl ProductAnsatz {
    pub fn uniform(state: BlochState) -> Self {
        Self { kind: AnsatzKind::Uniform, a: state, b: state }
    }

    pub fn bipartite(a: BlochState, b: BlochState) -> Self {
        Self { kind: AnsatzKind::Bipartite, a, b }
    }

    /// Two-site state `ρ_A ⊗ ρ_B` on a bond.
    pub fn pair_state(&self) -> ComplexOperator {
        kron(&self.a.density(), &self.b.density()).expect("two spins")
    }

    /// Finite chain `ρ_A ⊗ ρ_B ⊗ ρ_A ⊗ …` on `n` sites.
    pub fn chain_state(&self, n: usize) -> Result<ComplexOperator> {
        let (ra, rb) = (self.a.density(), self.b.density());
        let factors: Vec<&ComplexOperator> = (0..n).map(|s| if s % 2 == 0 { &ra } else { &rb }).collect();
        kron_all(factors)
    }
}

/// `(m, m_s)`: in-plane magnetization averaged over the sublattices and
/// staggered z-magnetization.
pub fn order_parameters(ansatz: &ProductAnsatz) -> (f64, f64) {
    let inplane = |s: &BlochState| s.alpha[0].hypot(s.alpha[1]);
    let m = 0.5 * (inplane(&ansatz.a) + inplane(&ansatz.b));
    let ms = 0.5 * (ansatz.a.alpha[2] - ansatz.b.alpha[2]).abs();
    (m, ms)
}

/// The three contributions to the two-site reduced derivative.
#[derive(Clone, Debug)]
pub struct NormBreakdown {
    pub d_loc: ComplexOperator,
    pub d_int: ComplexOperator,
    pub d_mf: ComplexOperator,
    pub total_norm: f64,
}

impl NormBreakdown {
    pub fn total(&self) -> ComplexOperator {
        &(&self.d_loc + &self.d_int) + &self.d_mf
    }
}

/// Which site of the central bond a mean-field term acts on. Two-site terms
/// are oriented from sublattice A to B, so the `I` slot is the first factor
/// of its outer bonds and the `J` slot the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    I,
    J,
}

impl Slot {
    fn index(self) -> usize {
        match self {
            Slot::I => 0,
            Slot::J => 1,
        }
    }

    /// Placement of an oriented bond term on the 3-site space
    /// `(i, j, k)` = sites `(0, 1, 2)`.
    fn bond_sites(self) -> [usize; 2] {
        match self {
            Slot::I => [0, 2],
            Slot::J => [2, 1],
        }
    }
}

fn check_bond(op: &ComplexOperator, what: &str) -> Result<()> {
    if op.spins() != 2 {
        return Err(Error::DimensionMismatch(format!("{what} must act on two sites, got {}", op.spins())));
    }
    Ok(())
}

/// Single-slot generator `G` such that the neighbor's coherent contribution
/// to the pair is `−i[G, ρ_ij]`, via the Pauli-basis decomposition
/// `H = Σ h_μν σ_μ ⊗ σ_ν` and `G = Σ h_μν ⟨σ_ν⟩_k σ_μ` (slot `I`).
pub fn mean_field_hamiltonian_term(
    h_bond: &ComplexOperator,
    slot: Slot,
    neighbor: &BlochState,
) -> Result<ComplexOperator> {
    check_bond(h_bond, "bond hamiltonian")?;
    let basis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].map(pauli);
    let mut single = ComplexOperator::zeros(1);
    for smu in &basis {
        for snu in &basis {
            let product = kron(smu, snu)?;
            let coeff = (&product.adjoint() * h_bond).trace() / 4.0;
            if coeff.norm() == 0.0 {
                continue;
            }
            let (target, on_neighbor) = match slot {
                Slot::I => (smu, snu),
                Slot::J => (snu, smu),
            };
            let mean = neighbor.expectation(on_neighbor);
            single = &single + &target.scale(coeff * mean);
        }
    }
    embed(&single, &[slot.index()], 2)
}

/// `tr_k[D(c)(ρ_ij ⊗ ρ_k)]` for a bond jump between the pair slot and an
/// outer neighbor `k`, built on the explicit 3-site space.
pub fn mean_field_jump_term(
    c_bond: &ComplexOperator,
    slot: Slot,
    neighbor: &BlochState,
    pair_state: &ComplexOperator,
) -> Result<ComplexOperator> {
    check_bond(c_bond, "bond jump")?;
    check_bond(pair_state, "pair state")?;
    let three = kron(pair_state, &neighbor.density())?;
    let c3 = embed(c_bond, &slot.bond_sites(), 3)?;
    partial_trace(&dissipator(&c3, &three)?, &[0, 1])
}

fn minus_i_commutator(h: &ComplexOperator, rho: &ComplexOperator) -> Result<ComplexOperator> {
    Ok(h.commutator(rho)?.scale(C64::new(0.0, -1.0)))
}

/// Assembles the reduced derivative of the central bond term by term.
///
/// This is the explicit route built from [`mean_field_hamiltonian_term`] and
/// [`mean_field_jump_term`]; [`VariationalFunctional`] evaluates the same
/// quantity on fixed-size matrices for optimization.
pub fn reduced_derivative(model: &DissipativeModel, ansatz: &ProductAnsatz) -> Result<NormBreakdown> {
    if ansatz.kind == AnsatzKind::Bipartite && !model.lattice.bipartite {
        return Err(Error::InvalidLattice("bipartite ansatz on a non-bipartite lattice".into()));
    }
    let pair = ansatz.pair_state();
    let id = ComplexOperator::identity(1);

    let mut d_loc = ComplexOperator::zeros(2);
    for c in model.local_jumps() {
        for placed in [kron(c, &id)?, kron(&id, c)?] {
            d_loc = &d_loc + &dissipator(&placed, &pair)?;
        }
    }
    for h in model.local_hamiltonians() {
        let both = &kron(h, &id)? + &kron(&id, h)?;
        d_loc = &d_loc + &minus_i_commutator(&both, &pair)?;
    }

    let mut d_int = ComplexOperator::zeros(2);
    for c in model.bond_jumps() {
        d_int = &d_int + &dissipator(c, &pair)?;
    }
    for h in model.bond_hamiltonians() {
        d_int = &d_int + &minus_i_commutator(h, &pair)?;
    }

    // neighbors of the A site live on B and vice versa
    let outer = (model.lattice.z - 1) as f64;
    let mut d_mf = ComplexOperator::zeros(2);
    for (slot, neighbor) in [(Slot::I, ansatz.b), (Slot::J, ansatz.a)] {
        let mut one = ComplexOperator::zeros(2);
        for c in model.bond_jumps() {
            one = &one + &mean_field_jump_term(c, slot, &neighbor, &pair)?;
        }
        for h in model.bond_hamiltonians() {
            let g = mean_field_hamiltonian_term(h, slot, &neighbor)?;
            one = &one + &minus_i_commutator(&g, &pair)?;
        }
        d_mf = &d_mf + &one.scale_re(outer);
    }

    let total = &(&d_loc + &d_int) + &d_mf;
    let total_norm = trace_norm_hermitian(&total)?;
    Ok(NormBreakdown { d_loc, d_int, d_mf, total_norm })
}

#[cfg(test)]
mod tests;
