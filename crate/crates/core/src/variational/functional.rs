use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{AnsatzKind, DissipativeModel};
use crate::operator::ComplexOperator;

type M2 = Matrix2<C64>;
type M4 = Matrix4<C64>;

fn to_m4(op: &ComplexOperator) -> M4 {
    M4::from_fn(|r, c| op.get(r, c))
}

fn to_m2(op: &ComplexOperator) -> M2 {
    M2::from_fn(|r, c| op.get(r, c))
}

fn kron2(a: &M2, b: &M2) -> M4 {
    M4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

/// Traces out the second site of a two-site operator.
fn trace_second(x: &M4) -> M2 {
    M2::from_fn(|r, c| x[(2 * r, 2 * c)] + x[(2 * r + 1, 2 * c + 1)])
}

/// Traces out the first site of a two-site operator.
fn trace_first(x: &M4) -> M2 {
    M2::from_fn(|r, c| x[(r, c)] + x[(2 + r, 2 + c)])
}

fn density(alpha: &[f64; 3]) -> M2 {
    let [x, y, z] = *alpha;
    M2::new(
        C64::new(0.5 * (1.0 + z), 0.0),
        C64::new(0.5 * x, -0.5 * y),
        C64::new(0.5 * x, 0.5 * y),
        C64::new(0.5 * (1.0 - z), 0.0),
    )
}

struct Jump {
    c: M4,
    c_dag: M4,
    c_dag_c: M4,
}

impl Jump {
    fn new(c: M4) -> Self {
        let c_dag = c.adjoint();
        let c_dag_c = c_dag * c;
        Self { c, c_dag, c_dag_c }
    }

    fn apply(&self, rho: &M4) -> M4 {
        self.c * rho * self.c_dag - (self.c_dag_c * rho + rho * self.c_dag_c) * C64::new(0.5, 0.0)
    }
}

/// Two-site reduced derivative on fixed-size matrices.
///
/// Uses that for a product pair `ρ_A ⊗ ρ_B` the outer bonds of slot `i`
/// (neighbors in state `ρ_B`) contribute `tr_j[ρ̇_int] ⊗ ρ_B`, and those of
/// slot `j` contribute `ρ_A ⊗ tr_i[ρ̇_int]`.
pub struct VariationalFunctional {
    outer: f64,
    bipartite_lattice: bool,
    local_jumps: Vec<Jump>,
    local_h: M4,
    bond_jumps: Vec<Jump>,
    bond_h: M4,
}

impl VariationalFunctional {
    pub fn new(model: &DissipativeModel) -> Self {
        let id = M2::identity();
        let mut local_jumps = Vec::new();
        for c in model.local_jumps() {
            let c = to_m2(c);
            local_jumps.push(Jump::new(kron2(&c, &id)));
            local_jumps.push(Jump::new(kron2(&id, &c)));
        }
        let local_h = model
            .local_hamiltonians()
            .map(|h| {
                let h = to_m2(h);
                kron2(&h, &id) + kron2(&id, &h)
            })
            .fold(M4::zeros(), |a, b| a + b);
        let bond_jumps = model.bond_jumps().map(|c| Jump::new(to_m4(c))).collect();
        let bond_h = model.bond_hamiltonians().map(to_m4).fold(M4::zeros(), |a, b| a + b);
        Self {
            outer: (model.lattice.z - 1) as f64,
            bipartite_lattice: model.lattice.bipartite,
            local_jumps,
            local_h,
            bond_jumps,
            bond_h,
        }
    }

    pub fn check_kind(&self, kind: AnsatzKind) -> Result<()> {
        if kind == AnsatzKind::Bipartite && !self.bipartite_lattice {
            return Err(Error::InvalidLattice("bipartite ansatz on a non-bipartite lattice".into()));
        }
        Ok(())
    }

    fn parts(&self, a: &[f64; 3], b: &[f64; 3]) -> (M4, M4, M4) {
        let (ra, rb) = (density(a), density(b));
        let pair = kron2(&ra, &rb);
        let mi = C64::new(0.0, -1.0);

        let mut loc = (self.local_h * pair - pair * self.local_h) * mi;
        for j in &self.local_jumps {
            loc += j.apply(&pair);
        }
        let mut int = (self.bond_h * pair - pair * self.bond_h) * mi;
        for j in &self.bond_jumps {
            int += j.apply(&pair);
        }
        let outer = C64::new(self.outer, 0.0);
        let mf = (kron2(&trace_second(&int), &rb) + kron2(&ra, &trace_first(&int))) * outer;
        (loc, int, mf)
    }

    /// `(d_loc, d_int, d_mf)` as operators.
    pub fn breakdown(&self, a: &[f64; 3], b: &[f64; 3]) -> [ComplexOperator; 3] {
        let (loc, int, mf) = self.parts(a, b);
        [loc, int, mf].map(|m| ComplexOperator::from_parts_unchecked(2, DMatrix::from_fn(4, 4, |r, c| m[(r, c)])))
    }

    /// Trace norm of the reduced derivative for sublattice Bloch vectors
    /// `a`, `b` (pass `a == b` for the uniform ansatz).
    pub fn norm(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        let (loc, int, mf) = self.parts(a, b);
        let total = loc + int + mf;
        let herm = (total + total.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum()
    }
}
