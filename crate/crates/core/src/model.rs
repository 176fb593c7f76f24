//! Dissipative lattice models: lattice parameters, jump-term sets and the
//! purely dissipative XXZ (Heisenberg) model.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{basis_ket, bell_state, kron, pauli, BellSign, ComplexOperator, Pauli};

/// Coordination number and sublattice structure of the underlying lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    pub z: usize,
    pub bipartite: bool,
    /// Divide two-site rates by `z − 1`.
    pub renormalize: bool,
}

impl LatticeSpec {
    pub fn new(z: usize, bipartite: bool, renormalize: bool) -> Result<Self> {
        if z < 2 {
            return Err(Error::InvalidLattice(format!("coordination number {z} < 2")));
        }
        Ok(Self { z, bipartite, renormalize })
    }

    /// Simple cubic lattice: z = 6, bipartite.
    pub fn cubic(renormalize: bool) -> Self {
        Self { z: 6, bipartite: true, renormalize }
    }

    /// Number of outer neighbors of a single bond, `2(z − 1)`.
    pub fn mean_field_neighbors(&self) -> usize {
        2 * (self.z - 1)
    }
}

/// A jump operator acting on one site or on an oriented pair of sites. The
/// rate is folded into the matrix.
#[derive(Clone, Debug)]
pub struct JumpTerm {
    pub label: String,
    matrix: ComplexOperator,
}

impl JumpTerm {
    pub fn new(label: impl Into<String>, matrix: ComplexOperator) -> Result<Self> {
        if !(1..=2).contains(&matrix.spins()) {
            return Err(Error::InvalidModel(format!(
                "jump terms act on 1 or 2 sites, got {}",
                matrix.spins()
            )));
        }
        Ok(Self { label: label.into(), matrix })
    }

    /// `√rate × unit`.
    pub fn with_rate(label: impl Into<String>, unit: &ComplexOperator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::NegativeRate(rate));
        }
        Self::new(label, unit.scale_re(rate.sqrt()))
    }

    pub fn arity(&self) -> usize {
        self.matrix.spins()
    }

    pub fn matrix(&self) -> &ComplexOperator {
        &self.matrix
    }
}

/// Hamiltonian contribution on one site or an oriented pair of sites.
#[derive(Clone, Debug)]
pub struct HamiltonianTerm {
    pub label: String,
    matrix: ComplexOperator,
}

impl HamiltonianTerm {
    pub fn new(label: impl Into<String>, matrix: ComplexOperator) -> Result<Self> {
        if !(1..=2).contains(&matrix.spins()) {
            return Err(Error::InvalidModel(format!(
                "hamiltonian terms act on 1 or 2 sites, got {}",
                matrix.spins()
            )));
        }
        if !matrix.is_hermitian(crate::operator::HERMITIAN_TOL) {
            return Err(Error::NotHermitian(matrix.hermiticity_defect()));
        }
        Ok(Self { label: label.into(), matrix })
    }

    pub fn arity(&self) -> usize {
        self.matrix.spins()
    }

    pub fn matrix(&self) -> &ComplexOperator {
        &self.matrix
    }
}

/// Translation-invariant master equation on a lattice.
///
/// Two-site terms are oriented: on a bipartite lattice every bond carries
/// the term with its first factor on the A site.
#[derive(Clone, Debug)]
pub struct DissipativeModel {
    pub lattice: LatticeSpec,
    pub hamiltonian_terms: Vec<HamiltonianTerm>,
    pub jump_terms: Vec<JumpTerm>,
}

impl DissipativeModel {
    pub fn new(
        lattice: LatticeSpec,
        hamiltonian_terms: Vec<HamiltonianTerm>,
        jump_terms: Vec<JumpTerm>,
    ) -> Self {
        Self { lattice, hamiltonian_terms, jump_terms }
    }

    pub fn is_purely_dissipative(&self) -> bool {
        self.hamiltonian_terms.is_empty()
    }

    pub fn local_jumps(&self) -> impl Iterator<Item = &ComplexOperator> {
        self.jump_terms.iter().filter(|t| t.arity() == 1).map(JumpTerm::matrix)
    }

    pub fn bond_jumps(&self) -> impl Iterator<Item = &ComplexOperator> {
        self.jump_terms.iter().filter(|t| t.arity() == 2).map(JumpTerm::matrix)
    }

    pub fn local_hamiltonians(&self) -> impl Iterator<Item = &ComplexOperator> {
        self.hamiltonian_terms.iter().filter(|t| t.arity() == 1).map(HamiltonianTerm::matrix)
    }

    pub fn bond_hamiltonians(&self) -> impl Iterator<Item = &ComplexOperator> {
        self.hamiltonian_terms.iter().filter(|t| t.arity() == 2).map(HamiltonianTerm::matrix)
    }

    /// Same model with every jump matrix replaced.
    pub fn map_jumps(&self, f: impl Fn(&JumpTerm) -> ComplexOperator) -> Self {
        let jump_terms = self
            .jump_terms
            .iter()
            .map(|t| JumpTerm { label: t.label.clone(), matrix: f(t) })
            .collect();
        Self { lattice: self.lattice, hamiltonian_terms: self.hamiltonian_terms.clone(), jump_terms }
    }
}

fn two_site_ket(label: &str) -> DVector<C64> {
    match label {
        "uu" => basis_ket(2, 0),
        "ud" => basis_ket(2, 1),
        "du" => basis_ket(2, 2),
        "dd" => basis_ket(2, 3),
        "psi+" => bell_state(BellSign::Plus),
        "psi-" => bell_state(BellSign::Minus),
        _ => unreachable!("unknown two-site label {label}"),
    }
}

fn ket_bra2(ket: &str, bra: &str) -> ComplexOperator {
    ComplexOperator::ket_bra(&two_site_ket(ket), &two_site_ket(bra)).expect("equal dimensions")
}

/// `|↑↑⟩⟨ψ₋|`, `|↓↓⟩⟨ψ₋|`, `|ψ₊⟩⟨ψ₋|`: pump the singlet into the triplet.
pub fn ferro_pump_jumps() -> Vec<JumpTerm> {
    [("uu", "c_ferro_uu"), ("dd", "c_ferro_dd"), ("psi+", "c_ferro_psi+")]
        .into_iter()
        .map(|(target, label)| JumpTerm::new(label, ket_bra2(target, "psi-")).unwrap())
        .collect()
}

/// `√λ {|↑↓⟩⟨↑↑|, |↓↑⟩⟨↑↑|, |↑↓⟩⟨↓↓|, |↓↑⟩⟨↓↓|}`.
pub fn anisotropy_jumps(lambda: f64) -> Result<Vec<JumpTerm>> {
    if !(lambda >= 0.0) {
        return Err(Error::NegativeRate(lambda));
    }
    [("ud", "uu"), ("du", "uu"), ("ud", "dd"), ("du", "dd")]
        .into_iter()
        .map(|(k, b)| JumpTerm::with_rate(format!("c_aniso_{k}<-{b}"), &ket_bra2(k, b), lambda))
        .collect()
}

/// Both jump sets with no Hamiltonian. With `lattice.renormalize` the rates
/// are divided by `z − 1`.
pub fn dissipative_heisenberg(lambda: f64, lattice: LatticeSpec) -> Result<DissipativeModel> {
    let mut jumps = ferro_pump_jumps();
    jumps.extend(anisotropy_jumps(lambda)?);
    let model = DissipativeModel::new(lattice, Vec::new(), jumps);
    Ok(renormalized(model))
}

/// Applies the `z − 1` rate renormalization to two-site terms if requested.
pub fn renormalized(model: DissipativeModel) -> DissipativeModel {
    if !model.lattice.renormalize {
        return model;
    }
    let amp = 1.0 / ((model.lattice.z - 1) as f64).sqrt();
    let energy = 1.0 / (model.lattice.z - 1) as f64;
    let mut out = model.map_jumps(|t| {
        if t.arity() == 2 {
            t.matrix().scale_re(amp)
        } else {
            t.matrix().clone()
        }
    });
    for h in &mut out.hamiltonian_terms {
        if h.arity() == 2 {
            h.matrix = h.matrix.scale_re(energy);
        }
    }
    out
}

/// Equilibrium XXZ bond term `−J[σxσx + σyσy + (1 − λ)σzσz]`.
pub fn xxz_hamiltonian(j: f64, lambda: f64) -> ComplexOperator {
    let xx = kron(&pauli(Pauli::X), &pauli(Pauli::X)).unwrap();
    let yy = kron(&pauli(Pauli::Y), &pauli(Pauli::Y)).unwrap();
    let zz = kron(&pauli(Pauli::Z), &pauli(Pauli::Z)).unwrap();
    (&(&xx + &yy) + &zz.scale_re(1.0 - lambda)).scale_re(-j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Uniform,
    Bipartite,
}

impl FromStr for AnsatzKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "bipartite" => Ok(Self::Bipartite),
            other => Err(Error::Config(format!("unknown ansatz '{other}'"))),
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Bipartite => "bipartite",
        })
    }
}

/// Plain-text `key = value` model configuration.
///
/// Recognized keys: `lambda`, `z`, `bipartite`, `renormalize`, `ansatz`.
/// Blank lines and `#` comments are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub lambda: f64,
    pub z: usize,
    pub bipartite: bool,
    pub renormalize: bool,
    pub ansatz: AnsatzKind,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { lambda: 0.0, z: 6, bipartite: true, renormalize: true, ansatz: AnsatzKind::Uniform }
    }
}

fn parse_bool(line: usize, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Parse { line, msg: format!("expected a boolean, got '{v}'") }),
    }
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, msg: format!("expected 'key = value', got '{content}'") })?;
            let (key, value) = (key.trim(), value.trim());
            let num_err = |e: &dyn fmt::Display| Error::Parse { line, msg: format!("{key}: {e}") };
            match key {
                "lambda" => cfg.lambda = value.parse().map_err(|e| num_err(&e))?,
                "z" => cfg.z = value.parse().map_err(|e| num_err(&e))?,
                "bipartite" => cfg.bipartite = parse_bool(line, value)?,
                "renormalize" => cfg.renormalize = parse_bool(line, value)?,
                "ansatz" => {
                    cfg.ansatz = value.parse().map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?
                }
                other => return Err(Error::Parse { line, msg: format!("unknown key '{other}'") }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        LatticeSpec::new(self.z, self.bipartite, self.renormalize)?;
        if !(self.lambda >= 0.0) {
            return Err(Error::NegativeRate(self.lambda));
        }
        if self.ansatz == AnsatzKind::Bipartite && !self.bipartite {
            return Err(Error::InvalidLattice(
                "bipartite ansatz requested on a non-bipartite lattice".into(),
            ));
        }
        Ok(())
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec { z: self.z, bipartite: self.bipartite, renormalize: self.renormalize }
    }

    pub fn heisenberg(&self, lambda: f64) -> Result<DissipativeModel> {
        dissipative_heisenberg(lambda, self.lattice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{dissipator, embed, spin_coherent_ket, spin_rotation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lattice() -> LatticeSpec {
        LatticeSpec::new(6, true, false).unwrap()
    }

    fn random_density(rng: &mut impl Rng, spins: usize) -> ComplexOperator {
        let d = 1 << spins;
        let a = nalgebra::DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        ComplexOperator::from_matrix(m / tr).unwrap()
    }

    fn total_dissipator(jumps: &[JumpTerm], rho: &ComplexOperator) -> ComplexOperator {
        jumps.iter().map(|j| dissipator(j.matrix(), rho).unwrap()).sum()
    }

    #[test]
    fn ferro_pump_matrices() {
        let jumps = ferro_pump_jumps();
        assert_eq!(jumps.len(), 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = jumps[0].matrix();
        assert!((c.get(0, 1).re - s).abs() < 1e-15);
        assert!((c.get(0, 2).re + s).abs() < 1e-15);
        let c1 = jumps[1].matrix();
        assert!((c1.get(3, 1).re - s).abs() < 1e-15);
        assert!((c1.get(3, 2).re + s).abs() < 1e-15);
        let want = ComplexOperator::from_real_rows(
            2,
            &[0.0, 0.0, 0.0, 0.0, 0.0, 0.5, -0.5, 0.0, 0.0, 0.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(jumps[2].matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn ferro_pump_annihilates_symmetric_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let psi = spin_coherent_ket(rng.random_range(0.0..3.14), rng.random_range(-3.14..3.14));
            let pair = psi.kronecker(&psi);
            for j in ferro_pump_jumps() {
                assert!(j.matrix().apply(&pair).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn anisotropy_matrices() {
        let jumps = anisotropy_jumps(1.0).unwrap();
        assert_eq!(jumps.len(), 4);
        assert_eq!(jumps[0].matrix().get(1, 0).re, 1.0);
        assert_eq!(jumps[1].matrix().get(2, 0).re, 1.0);
        assert_eq!(jumps[2].matrix().get(1, 3).re, 1.0);
        assert_eq!(jumps[3].matrix().get(2, 3).re, 1.0);
        let scaled = anisotropy_jumps(0.25).unwrap();
        assert!((scaled[0].matrix().get(1, 0).re - 0.5).abs() < 1e-15);
        for j in &jumps {
            assert!(j.matrix().apply(&basis_ket(2, 1)).norm() == 0.0);
            assert!(j.matrix().apply(&basis_ket(2, 2)).norm() == 0.0);
        }
        assert!(anisotropy_jumps(0.0).unwrap().iter().all(|j| j.matrix().max_abs() == 0.0));
        assert!(matches!(anisotropy_jumps(-0.1), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn heisenberg_counts_and_renormalization() {
        let m = dissipative_heisenberg(1.0, lattice()).unwrap();
        assert_eq!(m.jump_terms.len(), 7);
        assert!(m.is_purely_dissipative());
        let r = dissipative_heisenberg(1.0, LatticeSpec::new(6, true, true).unwrap()).unwrap();
        for (a, b) in m.jump_terms.iter().zip(&r.jump_terms) {
            let diff = a.matrix().scale_re(1.0 / 5f64.sqrt()).max_abs_diff(b.matrix());
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn heisenberg_dark_states_at_zero_lambda() {
        let m = dissipative_heisenberg(0.0, lattice()).unwrap();
        let psi = spin_coherent_ket(0.8, 2.1);
        let pair = psi.kronecker(&psi);
        let rho = ComplexOperator::ket_bra(&pair, &pair).unwrap();
        assert!(total_dissipator(&m.jump_terms, &rho).max_abs() < 1e-14);
    }

    #[test]
    fn heisenberg_is_u1_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = dissipative_heisenberg(0.7, lattice()).unwrap();
        let r1 = spin_rotation([0.0, 0.0, 1.0], 0.7);
        let r = kron(&r1, &r1).unwrap();
        let rho = random_density(&mut rng, 2);
        let rotated = &(&r * &rho) * &r.adjoint();
        let lhs = total_dissipator(&m.jump_terms, &rotated);
        let rhs = &(&r * &total_dissipator(&m.jump_terms, &rho)) * &r.adjoint();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn heisenberg_is_su2_symmetric_at_zero_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = dissipative_heisenberg(0.0, lattice()).unwrap();
        for _ in 0..5 {
            let axis = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let r1 = spin_rotation(axis, rng.random_range(0.0..6.0));
            let r = kron(&r1, &r1).unwrap();
            let rho = random_density(&mut rng, 2);
            let lhs = total_dissipator(&m.jump_terms, &(&(&r * &rho) * &r.adjoint()));
            let rhs = &(&r * &total_dissipator(&m.jump_terms, &rho)) * &r.adjoint();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }
        // finite λ breaks the symmetry for a rotation about x
        let m = dissipative_heisenberg(1.0, lattice()).unwrap();
        let r1 = spin_rotation([1.0, 0.0, 0.0], 0.9);
        let r = kron(&r1, &r1).unwrap();
        let rho = random_density(&mut rng, 2);
        let lhs = total_dissipator(&m.jump_terms, &(&(&r * &rho) * &r.adjoint()));
        let rhs = &(&r * &total_dissipator(&m.jump_terms, &rho)) * &r.adjoint();
        assert!(lhs.max_abs_diff(&rhs) > 1e-3);
    }

    #[test]
    fn jump_sets_do_not_commute() {
        let c = ferro_pump_jumps()[0].matrix().clone();
        let n = &c.adjoint() * &c;
        let worst = anisotropy_jumps(1.0)
            .unwrap()
            .iter()
            .map(|t| n.commutator(t.matrix()).unwrap().max_abs())
            .fold(0.0, f64::max);
        assert!(worst > 0.1);
    }

    #[test]
    fn xxz_bond_spectrum() {
        let h = xxz_hamiltonian(1.0, 0.0);
        let ev = h.hermitian_eigenvalues();
        let want = [-1.0, -1.0, -1.0, 3.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        // commutes with total S_z and S_x at λ = 0
        for axis in [Pauli::X, Pauli::Z] {
            let s = &embed(&pauli(axis), &[0], 2).unwrap() + &embed(&pauli(axis), &[1], 2).unwrap();
            assert!(h.commutator(&s).unwrap().max_abs() < 1e-14);
        }
        let xy = xxz_hamiltonian(1.0, 1.0);
        for i in 0..4 {
            assert_eq!(xy.get(i, i).norm(), 0.0);
        }
    }

    #[test]
    fn config_parsing() {
        let cfg = ModelConfig::parse(
            "# cubic lattice\nlambda = 0.25\nz = 6\nbipartite = true\nrenormalize = off\nansatz = bipartite\n",
        )
        .unwrap();
        assert_eq!(cfg.lambda, 0.25);
        assert!(!cfg.renormalize);
        assert_eq!(cfg.ansatz, AnsatzKind::Bipartite);
        assert!(matches!(ModelConfig::parse("z = 1"), Err(Error::InvalidLattice(_))));
        assert!(matches!(ModelConfig::parse("lambda = 1\nfoo = 2"), Err(Error::Parse { line: 2, .. })));
        assert!(ModelConfig::parse("bipartite = false\nansatz = bipartite").is_err());
    }
}
