use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{
    anisotropy_jumps, dissipative_heisenberg, xxz_hamiltonian, HamiltonianTerm, JumpTerm, LatticeSpec,
};
use crate::operator::partial_trace;
use crate::oracle::{devectorize, exact_norm, superoperator, vectorize, Topology};

fn random_bloch(rng: &mut ChaCha8Rng) -> BlochState {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if let Ok(s) = BlochState::new(v) {
            return s;
        }
    }
}

fn random_operator(spins: usize, rng: &mut ChaCha8Rng) -> ComplexOperator {
    let d = 1 << spins;
    let e: Vec<C64> = (0..d * d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    ComplexOperator::from_rows(spins, &e).unwrap()
}

fn random_density(spins: usize, rng: &mut ChaCha8Rng) -> ComplexOperator {
    let a = random_operator(spins, rng);
    let rho = &a * &a.adjoint();
    let tr = rho.trace();
    rho.scale(C64::new(1.0, 0.0) / tr)
}

/// Model with every kind of term so both routes are fully exercised.
fn busy_model(rng: &mut ChaCha8Rng, lattice: LatticeSpec) -> DissipativeModel {
    let h_loc = random_operator(1, rng).hermitian_part();
    let h_bond = random_operator(2, rng).hermitian_part();
    let mut jumps = vec![
        JumpTerm::new("loc", random_operator(1, rng)).unwrap(),
        JumpTerm::new("bond", random_operator(2, rng)).unwrap(),
    ];
    jumps.extend(anisotropy_jumps(0.7).unwrap());
    DissipativeModel::new(
        lattice,
        vec![HamiltonianTerm::new("h", h_loc).unwrap(), HamiltonianTerm::new("hb", h_bond).unwrap()],
        jumps,
    )
}

fn heisenberg(lambda: f64, z: usize) -> DissipativeModel {
    dissipative_heisenberg(lambda, LatticeSpec::new(z, true, true).unwrap()).unwrap()
}

/// `tr_k[L_bond(ρ_pair ⊗ ρ_k)]` through the exact superoperator.
fn brute_force_outer(
    h: Option<&ComplexOperator>,
    c: Option<&ComplexOperator>,
    slot: Slot,
    neighbor: &BlochState,
    pair: &ComplexOperator,
) -> ComplexOperator {
    let sites = slot.bond_sites();
    let h3 = match h {
        Some(h) => embed(h, &sites, 3).unwrap(),
        None => ComplexOperator::zeros(3),
    };
    let jumps: Vec<_> = c.map(|c| embed(c, &sites, 3).unwrap()).into_iter().collect();
    let l = superoperator(&h3, &jumps);
    let three = kron(pair, &neighbor.density()).unwrap();
    let out = devectorize(&(&l * vectorize(&three)), 3).unwrap();
    partial_trace(&out, &[0, 1]).unwrap()
}

#[test]
fn order_parameter_examples() {
    let s = |v| BlochState::new(v).unwrap();
    assert_eq!(order_parameters(&ProductAnsatz::uniform(s([1.0, 0.0, 0.0]))), (1.0, 0.0));
    assert_eq!(order_parameters(&ProductAnsatz::bipartite(s([0.0, 0.0, 1.0]), s([0.0, 0.0, -1.0]))), (0.0, 1.0));
    assert_eq!(order_parameters(&ProductAnsatz::uniform(BlochState::maximally_mixed())), (0.0, 0.0));
}

fn single_entry(row: usize, col: usize) -> ComplexOperator {
    let mut e = [0.0; 16];
    e[4 * row + col] = 1.0;
    ComplexOperator::from_real_rows(2, &e).unwrap()
}

#[test]
fn mean_field_jump_pumps_slot_i() {
    let up = BlochState::new([0.0, 0.0, 1.0]).unwrap();
    let pair = kron(&up.density(), &up.density()).unwrap();
    // |↓↑⟩⟨↑↑| on (i, k) flips i: |↑↑⟩ loses weight to |↓↑⟩
    let c = single_entry(2, 0);
    let got = mean_field_jump_term(&c, Slot::I, &up, &pair).unwrap();
    assert!(got.trace().norm() < 1e-14);
    assert!((got.get(0, 0).re + 1.0).abs() < 1e-14);
    assert!((got.get(2, 2).re - 1.0).abs() < 1e-14);
    assert!(got.max_abs_diff(&brute_force_outer(None, Some(&c), Slot::I, &up, &pair)) < 1e-14);
    // |↑↓⟩⟨↑↑| flips only the traced neighbor, leaving the pair untouched
    let c = single_entry(1, 0);
    let got = mean_field_jump_term(&c, Slot::I, &up, &pair).unwrap();
    assert!(got.max_abs() < 1e-14);
    assert!(got.max_abs_diff(&brute_force_outer(None, Some(&c), Slot::I, &up, &pair)) < 1e-14);
}

#[test]
fn dark_neighbor_gives_zero_mean_field() {
    let up = BlochState::new([0.0, 0.0, 1.0]).unwrap();
    let pair = kron(&up.density(), &up.density()).unwrap();
    for c in crate::model::ferro_pump_jumps() {
        for slot in [Slot::I, Slot::J] {
            assert!(mean_field_jump_term(c.matrix(), slot, &up, &pair).unwrap().max_abs() < 1e-15);
        }
    }
}

#[test]
fn mean_field_terms_match_three_site_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let h = random_operator(2, &mut rng).hermitian_part();
        let c = random_operator(2, &mut rng);
        let neighbor = random_bloch(&mut rng);
        let pair = random_density(2, &mut rng);
        for slot in [Slot::I, Slot::J] {
            let g = mean_field_hamiltonian_term(&h, slot, &neighbor).unwrap();
            let coherent = minus_i_commutator(&g, &pair).unwrap();
            let want_h = brute_force_outer(Some(&h), None, slot, &neighbor, &pair);
            assert!(coherent.max_abs_diff(&want_h) < 1e-12);
            let jump = mean_field_jump_term(&c, slot, &neighbor, &pair).unwrap();
            let want_c = brute_force_outer(None, Some(&c), slot, &neighbor, &pair);
            assert!(jump.max_abs_diff(&want_c) < 1e-12);
        }
    }
}

#[test]
fn fast_route_matches_explicit_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for z in [2, 3, 6] {
        let model = busy_model(&mut rng, LatticeSpec::new(z, true, false).unwrap());
        let f = VariationalFunctional::new(&model);
        for _ in 0..20 {
            let (a, b) = (random_bloch(&mut rng), random_bloch(&mut rng));
            let slow = reduced_derivative(&model, &ProductAnsatz::bipartite(a, b)).unwrap();
            let [loc, int, mf] = f.breakdown(&a.alpha, &b.alpha);
            assert!(loc.max_abs_diff(&slow.d_loc) < 1e-12);
            assert!(int.max_abs_diff(&slow.d_int) < 1e-12);
            assert!(mf.max_abs_diff(&slow.d_mf) < 1e-12);
            assert!((f.norm(&a.alpha, &b.alpha) - slow.total_norm).abs() < 1e-12);
        }
    }
}

#[test]
fn bipartite_ansatz_needs_bipartite_lattice() {
    let model = dissipative_heisenberg(0.5, LatticeSpec::new(6, false, true).unwrap()).unwrap();
    let s = BlochState::maximally_mixed();
    assert!(reduced_derivative(&model, &ProductAnsatz::bipartite(s, s)).is_err());
    assert!(minimize_norm(&model, AnsatzKind::Bipartite, &MinimizeOptions::default()).is_err());
    assert!(reduced_derivative(&model, &ProductAnsatz::uniform(s)).is_ok());
}

#[test]
fn ferromagnetic_states_are_dark_at_zero_anisotropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for z in [2, 4, 6] {
        let model = heisenberg(0.0, z);
        for _ in 0..10 {
            let v = random_bloch(&mut rng).alpha;
            let len = crate::operator::norm3(v);
            let unit = BlochState::new(v.map(|x| x / len)).unwrap();
            let b = reduced_derivative(&model, &ProductAnsatz::uniform(unit)).unwrap();
            assert!(b.total_norm < 1e-12, "{}", b.total_norm);
        }
    }
    let x = BlochState::new([1.0, 0.0, 0.0]).unwrap();
    assert!(reduced_derivative(&heisenberg(0.0, 6), &ProductAnsatz::uniform(x)).unwrap().total_norm < 1e-14);
}

#[test]
fn neel_state_is_dark_for_anisotropy_alone() {
    let model = DissipativeModel::new(LatticeSpec::cubic(true), Vec::new(), anisotropy_jumps(1.0).unwrap());
    let model = crate::model::renormalized(model);
    let up = BlochState::new([0.0, 0.0, 1.0]).unwrap();
    let down = BlochState::new([0.0, 0.0, -1.0]).unwrap();
    let b = reduced_derivative(&model, &ProductAnsatz::bipartite(up, down)).unwrap();
    assert!(b.total_norm < 1e-14);
}

#[test]
fn two_neighbor_lattice_matches_four_site_assembly() {
    // z = 2: pair (i, j) = sites (1, 2) with outer neighbors 0 and 3
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = dissipative_heisenberg(1.0, LatticeSpec::new(2, true, true).unwrap()).unwrap();
    let uni = random_bloch(&mut rng);
    for ansatz in [ProductAnsatz::uniform(uni), ProductAnsatz::bipartite(random_bloch(&mut rng), random_bloch(&mut rng))] {
        // chain B A B A, bonds oriented A → B
        let bonds = [[1, 0], [1, 2], [3, 2]];
        let jumps: Vec<_> = model
            .bond_jumps()
            .flat_map(|c| bonds.iter().map(move |s| embed(c, s, 4).unwrap()))
            .collect();
        let l = superoperator(&ComplexOperator::zeros(4), &jumps);
        let (ra, rb) = (ansatz.a.density(), ansatz.b.density());
        let full = kron_all([&rb, &ra, &rb, &ra]).unwrap();
        let reduced = partial_trace(&devectorize(&(&l * vectorize(&full)), 4).unwrap(), &[1, 2]).unwrap();
        let b = reduced_derivative(&model, &ansatz).unwrap();
        assert!(b.total().max_abs_diff(&reduced) < 1e-13);
        assert!((b.total_norm - trace_norm_hermitian(&reduced).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn renormalized_parts_scale_with_coordination() {
    let s = ProductAnsatz::bipartite(
        BlochState::new([0.3, -0.2, 0.5]).unwrap(),
        BlochState::new([-0.1, 0.4, 0.2]).unwrap(),
    );
    let norms: Vec<(f64, f64)> = [4usize, 6, 12]
        .iter()
        .map(|&z| {
            let b = reduced_derivative(&heisenberg(0.8, z), &s).unwrap();
            let n = |op: &ComplexOperator| trace_norm_hermitian(op).unwrap();
            (n(&b.d_int) * (z - 1) as f64, n(&b.d_mf))
        })
        .collect();
    for w in norms.windows(2) {
        assert!((w[0].0 - w[1].0).abs() < 1e-12, "{norms:?}");
        assert!((w[0].1 - w[1].1).abs() < 1e-12, "{norms:?}");
    }
    assert!(norms[0].1 > 0.0);
}

#[test]
fn upper_bound_on_four_site_ring() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let lambda = rng.random_range(0.0..2.0);
        let model = dissipative_heisenberg(lambda, LatticeSpec::new(2, true, true).unwrap()).unwrap();
        let ansatz = ProductAnsatz::bipartite(random_bloch(&mut rng), random_bloch(&mut rng));
        let bound = 4.0 * reduced_derivative(&model, &ansatz).unwrap().total_norm;
        let exact = exact_norm(&model, &ansatz.chain_state(4).unwrap(), 4, Topology::Ring).unwrap();
        assert!(exact <= bound + 1e-12, "{exact} > {bound}");
    }
}

#[test]
fn dark_variational_states_are_dark_on_clusters() {
    let model = heisenberg(0.0, 2);
    let s = BlochState::new([0.6, 0.0, 0.8]).unwrap();
    let rho = ProductAnsatz::uniform(s).chain_state(4).unwrap();
    assert!(exact_norm(&model, &rho, 4, Topology::Ring).unwrap() < 1e-12);
}

#[test]
fn xy_minimum_lies_in_plane() {
    let model = heisenberg(0.2, 6);
    let min = minimize_norm(&model, AnsatzKind::Uniform, &MinimizeOptions::default()).unwrap();
    let (m, _) = order_parameters(&min.ansatz);
    assert!(min.converged);
    assert!(min.ansatz.a.alpha[2].abs() < 1e-6);
    assert!(m > 0.05, "{m}");
}

#[test]
fn u1_rotation_leaves_norm_unchanged() {
    let model = heisenberg(0.2, 6);
    let f = VariationalFunctional::new(&model);
    let min = minimize_norm(&model, AnsatzKind::Uniform, &MinimizeOptions::default()).unwrap();
    let [x, _, z] = min.ansatz.a.alpha;
    let rotated = [0.0, x, z];
    assert!((f.norm(&rotated, &rotated) - min.norm).abs() < 1e-9);
    let free = minimize_norm(&model, AnsatzKind::Uniform, &MinimizeOptions { gauge_fix: false, ..Default::default() })
        .unwrap();
    assert!((free.norm - min.norm).abs() < 1e-9, "{} vs {}", free.norm, min.norm);
}

#[test]
fn intermediate_phase_is_disordered() {
    let model = heisenberg(1.0, 6);
    for kind in [AnsatzKind::Uniform, AnsatzKind::Bipartite] {
        let min = minimize_norm(&model, kind, &MinimizeOptions::default()).unwrap();
        let (m, ms) = order_parameters(&min.ansatz);
        assert!(m < 1e-4 && ms < 1e-4, "{kind}: {m} {ms}");
    }
}

#[test]
fn ising_phase_is_staggered() {
    let min = minimize_norm(&heisenberg(2.0, 6), AnsatzKind::Bipartite, &MinimizeOptions::default()).unwrap();
    let (_, ms) = order_parameters(&min.ansatz);
    assert!(ms > 0.1, "{ms}");
}

#[test]
fn minimizer_is_deterministic() {
    let model = heisenberg(0.45, 6);
    let opts = MinimizeOptions { seed: 9, ..Default::default() };
    let a = minimize_norm(&model, AnsatzKind::Bipartite, &opts).unwrap();
    let b = minimize_norm(&model, AnsatzKind::Bipartite, &opts).unwrap();
    assert_eq!(a.ansatz, b.ansatz);
    assert_eq!(a.norm, b.norm);
}

#[test]
fn zero_restarts_rejected() {
    let opts = MinimizeOptions { restarts: 0, ..Default::default() };
    assert!(minimize_norm(&heisenberg(0.1, 6), AnsatzKind::Uniform, &opts).is_err());
}

#[test]
fn landau_coefficient_signs_around_xy_transition() {
    let below = landau_expansion(&heisenberg(0.4, 6), LandauDirection::InPlane, 0.05, 11).unwrap();
    let above = landau_expansion(&heisenberg(0.6, 6), LandauDirection::InPlane, 0.05, 11).unwrap();
    assert!(below.u2 < 0.0, "{below:?}");
    assert!(above.u2 > 0.0, "{above:?}");
    assert_eq!(below.phi_grid.len(), 11);
    assert!(landau_expansion(&heisenberg(0.4, 6), LandauDirection::InPlane, 0.05, 4).is_err());
}

#[test]
fn landau_needs_bipartite_lattice_for_staggered_direction() {
    let model = dissipative_heisenberg(1.6, LatticeSpec::new(6, false, true).unwrap()).unwrap();
    assert!(landau_expansion(&model, LandauDirection::StaggeredZ, 0.05, 7).is_err());
}

#[test]
fn xxz_bond_hamiltonian_is_accepted() {
    // coherent bond terms flow through both routes
    let model = DissipativeModel::new(
        LatticeSpec::cubic(false),
        vec![HamiltonianTerm::new("xxz", xxz_hamiltonian(1.0, 0.3)).unwrap()],
        anisotropy_jumps(0.5).unwrap(),
    );
    let a = BlochState::new([0.2, 0.1, -0.4]).unwrap();
    let b = BlochState::new([0.0, 0.5, 0.3]).unwrap();
    let slow = reduced_derivative(&model, &ProductAnsatz::bipartite(a, b)).unwrap();
    let fast = VariationalFunctional::new(&model).norm(&a.alpha, &b.alpha);
    assert!((slow.total_norm - fast).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parts_are_hermitian_and_traceless(
        lambda in 0.0f64..3.0,
        a in proptest::array::uniform3(-0.57f64..0.57),
        b in proptest::array::uniform3(-0.57f64..0.57),
    ) {
        let ansatz = ProductAnsatz::bipartite(BlochState::new(a).unwrap(), BlochState::new(b).unwrap());
        let br = reduced_derivative(&heisenberg(lambda, 6), &ansatz).unwrap();
        for part in [&br.d_loc, &br.d_int, &br.d_mf] {
            prop_assert!(part.hermiticity_defect() < 1e-10);
            prop_assert!(part.trace().norm() < 1e-10);
        }
        prop_assert!(br.total_norm >= 0.0);
    }

    #[test]
    fn minimizer_stays_in_the_ball(lambda in 0.0f64..2.5, seed in 0u64..1000, bip in any::<bool>()) {
        let kind = if bip { AnsatzKind::Bipartite } else { AnsatzKind::Uniform };
        let opts = MinimizeOptions { restarts: 3, seed, gauge_fix: seed % 2 == 0, ..Default::default() };
        let min = minimize_norm(&heisenberg(lambda, 6), kind, &opts).unwrap();
        prop_assert!(min.ansatz.a.length() <= 1.0 + 1e-9);
        prop_assert!(min.ansatz.b.length() <= 1.0 + 1e-9);
    }
}
