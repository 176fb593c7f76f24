//! Adiabatic elimination of fast-decaying auxiliary spins.
//!
//! For each decay channel `k` the non-Hermitian Hamiltonian
//! `H̃_k = H_e − (i/2) c_k† c_k` is inverted on the decaying manifold and
//! yields
//!
//! ```text
//! H_eff  = H_g − ½ Σ_k V_k⁻ [H̃_k⁻¹ + (H̃_k⁻¹)†] V_k⁺
//! c_eff_k = c_k H̃_k⁻¹ V_k⁺
//! ```
//!
//! Jump matrices carry their rate: `c_k = √γ_k × unit`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{dissipator, partial_trace, site_block, trace_norm_hermitian, ComplexOperator, HERMITIAN_TOL};

/// Microscopic problem on the full system ⊗ auxiliary space.
#[derive(Clone, Debug)]
pub struct EliminationProblem {
    pub ground_hamiltonian: ComplexOperator,
    pub excited_hamiltonian: ComplexOperator,
    /// `V_k⁺`, one per decay channel.
    pub excitations: Vec<ComplexOperator>,
    /// `V_k⁻`, one per decay channel.
    pub deexcitations: Vec<ComplexOperator>,
    /// `c_k` with the rate folded in.
    pub jumps: Vec<ComplexOperator>,
    pub excited_projector: ComplexOperator,
    /// Sites holding auxiliary spins; traced out when comparing dynamics.
    pub auxiliary_sites: Vec<usize>,
}

impl EliminationProblem {
    /// Builds a problem whose de-excitations are the adjoints of the
    /// excitations. Checks dimensions, the projector, and that `H_e` stays
    /// inside the decaying manifold.
    pub fn hermitian_pair(
        ground_hamiltonian: ComplexOperator,
        excited_hamiltonian: ComplexOperator,
        excitations: Vec<ComplexOperator>,
        jumps: Vec<ComplexOperator>,
        excited_projector: ComplexOperator,
        auxiliary_sites: Vec<usize>,
    ) -> Result<Self> {
        let deexcitations = excitations.iter().map(ComplexOperator::adjoint).collect();
        let p = Self {
            ground_hamiltonian,
            excited_hamiltonian,
            excitations,
            deexcitations,
            jumps,
            excited_projector,
            auxiliary_sites,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn spins(&self) -> usize {
        self.ground_hamiltonian.spins()
    }

    pub fn channels(&self) -> usize {
        self.jumps.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.spins();
        let all = std::iter::once(&self.excited_hamiltonian)
            .chain(&self.excitations)
            .chain(&self.deexcitations)
            .chain(&self.jumps)
            .chain(std::iter::once(&self.excited_projector));
        for op in all {
            if op.spins() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{}-spin operator in a {n}-spin elimination problem",
                    op.spins()
                )));
            }
        }
        if self.excitations.len() != self.jumps.len() || self.deexcitations.len() != self.jumps.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} excitations, {} de-excitations, {} jumps",
                self.excitations.len(),
                self.deexcitations.len(),
                self.jumps.len()
            )));
        }
        for &s in &self.auxiliary_sites {
            if s >= n {
                return Err(Error::InvalidSite { site: s, spins: n });
            }
        }
        let p = &self.excited_projector;
        let idem = (p * p).max_abs_diff(p);
        if idem > 1e-10 || !p.is_hermitian(1e-10) {
            return Err(Error::InvalidModel(format!(
                "excited projector is not an orthogonal projector (idempotency defect {idem:e})"
            )));
        }
        let leak = self.excited_hamiltonian.commutator(p)?.max_abs();
        if leak > 1e-10 {
            return Err(Error::InvalidModel(format!(
                "excited hamiltonian leaves the decaying manifold (commutator {leak:e})"
            )));
        }
        Ok(())
    }

    /// Full microscopic Hamiltonian `H_g + H_e + Σ (V⁺ + V⁻)`.
    pub fn full_hamiltonian(&self) -> ComplexOperator {
        let mut h = &self.ground_hamiltonian + &self.excited_hamiltonian;
        for (vp, vm) in self.excitations.iter().zip(&self.deexcitations) {
            h = &(&h + vp) + vm;
        }
        h
    }
}

#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pub hamiltonian: ComplexOperator,
    pub jumps: Vec<ComplexOperator>,
}

/// `P (H_e − (i/2) c_k†c_k) P` for channel `k`.
pub fn nonhermitian_hamiltonian(p: &EliminationProblem, k: usize) -> Result<ComplexOperator> {
    let c = p.jumps.get(k).ok_or_else(|| {
        Error::DimensionMismatch(format!("channel {k} of {}", p.channels()))
    })?;
    let decay = (&c.adjoint() * c).scale(C64::new(0.0, -0.5));
    let h = &p.excited_hamiltonian + &decay;
    let proj = &p.excited_projector;
    Ok(&(proj * &h) * proj)
}

/// Inverse of `h_tilde` on the range of `projector`, zero on its complement.
pub fn invert_on_decaying_manifold(
    h_tilde: &ComplexOperator,
    projector: &ComplexOperator,
) -> Result<ComplexOperator> {
    h_tilde.check_same(projector)?;
    let dim = projector.dim();
    // orthonormal basis of range(P)
    let eig = projector.hermitian_part().into_matrix().symmetric_eigen();
    let cols: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    if cols.is_empty() {
        return Ok(ComplexOperator::zeros(projector.spins()));
    }
    let q = DMatrix::from_fn(dim, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
    let block = q.adjoint() * h_tilde.matrix() * &q;
    let smallest = block
        .clone()
        .singular_values()
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s));
    if !(smallest > 1e-12) {
        return Err(Error::GaplessElimination(smallest));
    }
    let inv = block.try_inverse().ok_or(Error::GaplessElimination(smallest))?;
    ComplexOperator::new(projector.spins(), &q * inv * q.adjoint())
}

fn channel_inverses(p: &EliminationProblem) -> Result<Vec<ComplexOperator>> {
    (0..p.channels())
        .map(|k| invert_on_decaying_manifold(&nonhermitian_hamiltonian(p, k)?, &p.excited_projector))
        .collect()
}

fn hamiltonian_from_inverses(p: &EliminationProblem, inverses: &[ComplexOperator]) -> Result<ComplexOperator> {
    let mut h = p.ground_hamiltonian.clone();
    for ((inv, vp), vm) in inverses.iter().zip(&p.excitations).zip(&p.deexcitations) {
        let sym = inv + &inv.adjoint();
        h = &h - &(&(vm * &sym) * vp).scale_re(0.5);
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(h.hermitian_part())
}

pub fn effective_hamiltonian(p: &EliminationProblem) -> Result<ComplexOperator> {
    hamiltonian_from_inverses(p, &channel_inverses(p)?)
}

pub fn effective_jumps(p: &EliminationProblem) -> Result<Vec<ComplexOperator>> {
    let inverses = channel_inverses(p)?;
    Ok(p.jumps
        .iter()
        .zip(&inverses)
        .zip(&p.excitations)
        .map(|((c, inv), vp)| &(c * inv) * vp)
        .collect())
}

pub fn eliminate(p: &EliminationProblem) -> Result<EffectiveModel> {
    let inverses = channel_inverses(p)?;
    let hamiltonian = hamiltonian_from_inverses(p, &inverses)?;
    let jumps = p
        .jumps
        .iter()
        .zip(&inverses)
        .zip(&p.excitations)
        .map(|((c, inv), vp)| &(c * inv) * vp)
        .collect();
    Ok(EffectiveModel { hamiltonian, jumps })
}

/// Drops the auxiliary spins by pinning them to `↓` (the ground manifold).
pub fn strip_auxiliary(op: &ComplexOperator, auxiliary_sites: &[usize]) -> Result<ComplexOperator> {
    let all_down = (1usize << auxiliary_sites.len()) - 1;
    site_block(op, auxiliary_sites, all_down)
}

/// `−i[H, ρ] + Σ D(c)`.
pub fn lindblad_rhs(h: &ComplexOperator, jumps: &[ComplexOperator], rho: &ComplexOperator) -> Result<ComplexOperator> {
    let mut out = h.commutator(rho)?.scale(C64::new(0.0, -1.0));
    for c in jumps {
        out = &out + &dissipator(c, rho)?;
    }
    Ok(out)
}

fn rk4_step(h: &ComplexOperator, jumps: &[ComplexOperator], rho: &ComplexOperator, dt: f64) -> Result<ComplexOperator> {
    let k1 = lindblad_rhs(h, jumps, rho)?;
    let k2 = lindblad_rhs(h, jumps, &(rho + &k1.scale_re(dt / 2.0)))?;
    let k3 = lindblad_rhs(h, jumps, &(rho + &k2.scale_re(dt / 2.0)))?;
    let k4 = lindblad_rhs(h, jumps, &(rho + &k3.scale_re(dt)))?;
    let incr = &(&k1 + &k2.scale_re(2.0)) + &(&k3.scale_re(2.0) + &k4);
    Ok(rho + &incr.scale_re(dt / 6.0))
}

/// Fixed-step RK4 trajectory sampled at every step, including `t = 0`.
pub fn integrate_lindblad(
    h: &ComplexOperator,
    jumps: &[ComplexOperator],
    rho0: &ComplexOperator,
    t_max: f64,
    steps: usize,
) -> Result<Vec<ComplexOperator>> {
    let dt = t_max / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(rho0.clone());
    let mut rho = rho0.clone();
    for _ in 0..steps {
        rho = rk4_step(h, jumps, &rho, dt)?;
        if rho.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integrator(format!("non-finite state at dt = {dt:e}")));
        }
        out.push(rho.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// `max_t ½‖tr_aux ρ_full(t) − tr_aux ρ_eff(t)‖₁`
    pub max_trace_distance: f64,
    pub steps: usize,
    pub dt: f64,
}

fn trajectories_distance(
    p: &EliminationProblem,
    eff: &EffectiveModel,
    rho0: &ComplexOperator,
    t_max: f64,
    steps: usize,
) -> Result<f64> {
    let keep: Vec<usize> = (0..p.spins()).filter(|s| !p.auxiliary_sites.contains(s)).collect();
    let full = integrate_lindblad(&p.full_hamiltonian(), &p.jumps, rho0, t_max, steps)?;
    let effective = integrate_lindblad(&eff.hamiltonian, &eff.jumps, rho0, t_max, steps)?;
    let mut worst = 0.0f64;
    for (a, b) in full.iter().zip(&effective) {
        let d = &partial_trace(a, &keep)? - &partial_trace(b, &keep)?;
        worst = worst.max(0.5 * trace_norm_hermitian(&d.hermitian_part())?);
    }
    Ok(worst)
}

/// Integrates the microscopic and the effective master equations from the
/// same initial state (system state ⊗ auxiliaries in `↓`) and reports the
/// largest trace distance between the reduced system states on `[0, t_max]`.
///
/// The step count is doubled until two successive resolutions agree to
/// `tol`; after 8 doublings the integrator gives up.
pub fn validate_elimination(
    p: &EliminationProblem,
    eff: &EffectiveModel,
    system_state: &ComplexOperator,
    t_max: f64,
    tol: f64,
) -> Result<ValidationReport> {
    let n = p.spins();
    let system_sites = n - p.auxiliary_sites.len();
    if system_state.spins() != system_sites {
        return Err(Error::DimensionMismatch(format!(
            "{}-spin initial state for {system_sites} system spins",
            system_state.spins()
        )));
    }
    let rho0 = embed_with_auxiliary_down(system_state, &p.auxiliary_sites, n)?;
    let rate = p
        .jumps
        .iter()
        .chain(&eff.jumps)
        .map(|c| (&c.adjoint() * c).max_abs())
        .chain(std::iter::once(p.full_hamiltonian().max_abs()))
        .fold(0.0f64, f64::max);
    let mut steps = ((t_max * rate.max(1e-12) / 0.05).ceil() as usize).max(16);
    let mut prev = trajectories_distance(p, eff, &rho0, t_max, steps)?;
    for _ in 0..8 {
        steps *= 2;
        let next = trajectories_distance(p, eff, &rho0, t_max, steps)?;
        if (next - prev).abs() <= tol {
            return Ok(ValidationReport { max_trace_distance: next, steps, dt: t_max / steps as f64 });
        }
        prev = next;
    }
    Err(Error::Integrator(format!("no step-size convergence to {tol:e} after {steps} steps")))
}

/// `ρ_sys` on the system sites with every auxiliary site in `|↓⟩⟨↓|`.
pub fn embed_with_auxiliary_down(
    system_state: &ComplexOperator,
    auxiliary_sites: &[usize],
    spins: usize,
) -> Result<ComplexOperator> {
    let system: Vec<usize> = (0..spins).filter(|s| !auxiliary_sites.contains(s)).collect();
    let all_down = (1usize << auxiliary_sites.len()) - 1;
    let mut out = ComplexOperator::zeros(spins);
    let mut m = out.matrix().clone();
    let place = |f: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &s) in system.iter().enumerate() {
            idx |= ((f >> (system.len() - 1 - pos)) & 1) << (spins - 1 - s);
        }
        for (pos, &s) in auxiliary_sites.iter().enumerate() {
            idx |= ((all_down >> (auxiliary_sites.len() - 1 - pos)) & 1) << (spins - 1 - s);
        }
        idx
    };
    let d = system_state.dim();
    for r in 0..d {
        for c in 0..d {
            m[(place(r), place(c))] = system_state.get(r, c);
        }
    }
    out = ComplexOperator::new(spins, m)?;
    Ok(out)
}

/// Ready-made elimination problems for single-site and correlated jumps.
pub mod examples {
    use super::*;
    use crate::operator::{bell_state, embed, kron, pauli, BellSign, Pauli};
    use nalgebra::DVector;

    fn x_ket(sign: f64) -> DVector<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DVector::from_vec(vec![C64::new(s, 0.0), C64::new(sign * s, 0.0)])
    }

    fn aux_parts(spins: usize, aux: usize, gamma: f64, detuning: f64) -> (ComplexOperator, ComplexOperator, ComplexOperator) {
        let up = ComplexOperator::basis_projector(1, 0);
        let projector = embed(&up, &[aux], spins).unwrap();
        let he = projector.scale_re(detuning);
        let c = embed(&pauli(Pauli::Minus), &[aux], spins).unwrap().scale_re(gamma.sqrt());
        (projector, he, c)
    }

    /// System spin 0 coupled to auxiliary spin 1 by `E₀|−⟩⟨+| ⊗ σ⁺ + H.c.`,
    /// auxiliary decaying `↑ → ↓` at rate `γ` and detuned by `Δ`.
    pub fn single_site_flip(e0: f64, gamma: f64, detuning: f64) -> EliminationProblem {
        let minus_plus = ComplexOperator::ket_bra(&x_ket(-1.0), &x_ket(1.0)).unwrap();
        let vp = kron(&minus_plus, &pauli(Pauli::Plus)).unwrap().scale_re(e0);
        let (projector, he, c) = aux_parts(2, 1, gamma, detuning);
        EliminationProblem::hermitian_pair(ComplexOperator::zeros(2), he, vec![vp], vec![c], projector, vec![1])
            .expect("consistent single-site problem")
    }

    /// System spins 0, 1 coupled to auxiliary spin 2 by
    /// `E₀|ψ₊⟩⟨ψ₋| ⊗ σ⁺ + H.c.`.
    pub fn bell_pump(e0: f64, gamma: f64, detuning: f64) -> EliminationProblem {
        let pm = ComplexOperator::ket_bra(&bell_state(BellSign::Plus), &bell_state(BellSign::Minus)).unwrap();
        let vp = kron(&pm, &pauli(Pauli::Plus)).unwrap().scale_re(e0);
        let (projector, he, c) = aux_parts(3, 2, gamma, detuning);
        EliminationProblem::hermitian_pair(ComplexOperator::zeros(3), he, vec![vp], vec![c], projector, vec![2])
            .expect("consistent correlated problem")
    }

    /// `|−⟩⟨+|` on a single spin.
    pub fn minus_plus() -> ComplexOperator {
        ComplexOperator::ket_bra(&x_ket(-1.0), &x_ket(1.0)).unwrap()
    }

    /// `|+⟩⟨+|` on a single spin.
    pub fn plus_state() -> ComplexOperator {
        ComplexOperator::ket_bra(&x_ket(1.0), &x_ket(1.0)).unwrap()
    }
}
