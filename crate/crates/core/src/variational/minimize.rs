use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NelderMead, ProductAnsatz, VariationalFunctional};
use crate::error::Result;
use crate::model::{AnsatzKind, DissipativeModel};
use crate::operator::BlochState;

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Fix `α_y = 0` on sublattice A, removing the U(1) flat direction.
    pub gauge_fix: bool,
    pub max_iter: usize,
    /// Simplex diameter at which a descent counts as converged.
    pub tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, gauge_fix: true, max_iter: 4000, tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub ansatz: ProductAnsatz,
    pub norm: f64,
    pub converged: bool,
    pub restarts_used: usize,
    pub evaluations: usize,
}

/// Maps between optimizer coordinates and sublattice Bloch vectors.
#[derive(Clone, Copy)]
struct Layout {
    kind: AnsatzKind,
    gauge_fix: bool,
}

impl Layout {
    fn a_len(self) -> usize {
        if self.gauge_fix { 2 } else { 3 }
    }

    fn unpack(self, x: &[f64]) -> ([f64; 3], [f64; 3]) {
        let a = if self.gauge_fix { [x[0], 0.0, x[1]] } else { [x[0], x[1], x[2]] };
        let b = match self.kind {
            AnsatzKind::Uniform => a,
            AnsatzKind::Bipartite => {
                let k = self.a_len();
                [x[k], x[k + 1], x[k + 2]]
            }
        };
        (a, b)
    }

    fn pack(self, a: [f64; 3], b: [f64; 3]) -> Vec<f64> {
        let mut x = if self.gauge_fix { vec![a[0], a[2]] } else { a.to_vec() };
        if self.kind == AnsatzKind::Bipartite {
            x.extend_from_slice(&b);
        }
        x
    }

    fn project(self, x: &mut [f64]) {
        let k = self.a_len();
        radial(&mut x[..k]);
        if self.kind == AnsatzKind::Bipartite {
            radial(&mut x[k..]);
        }
    }
}

fn radial(v: &mut [f64]) {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r > 1.0 {
        v.iter_mut().for_each(|x| *x /= r);
    }
}

fn random_in_ball(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

/// Starting points: ±x, ±z, Néel, mixed, origin, then random.
fn seeds(kind: AnsatzKind, count: usize, rng: &mut ChaCha8Rng) -> Vec<([f64; 3], [f64; 3])> {
    let r = 0.9;
    let same = |v: [f64; 3]| (v, v);
    let neel = match kind {
        AnsatzKind::Bipartite => ([0.0, 0.0, r], [0.0, 0.0, -r]),
        // a Néel start collapses onto +z for the uniform kind; tilt it instead
        AnsatzKind::Uniform => same([0.6, 0.0, 0.6]),
    };
    let fixed = [
        same([r, 0.0, 0.0]),
        same([-r, 0.0, 0.0]),
        same([0.0, 0.0, r]),
        same([0.0, 0.0, -r]),
        neel,
        same([0.3, 0.0, 0.3]),
        same([0.0; 3]),
    ];
    let mut out: Vec<_> = fixed.into_iter().take(count).collect();
    while out.len() < count {
        let a = random_in_ball(rng);
        let b = if kind == AnsatzKind::Bipartite { random_in_ball(rng) } else { a };
        out.push((a, b));
    }
    out
}

/// Minimizes the bond norm over the product ansatz of the given kind.
///
/// Each restart runs a full simplex descent; the best point is then polished
/// by one more descent with a smaller initial simplex. Deterministic for a
/// fixed `opts.seed`.
pub fn minimize_norm(model: &DissipativeModel, kind: AnsatzKind, opts: &MinimizeOptions) -> Result<Minimum> {
    let functional = VariationalFunctional::new(model);
    functional.check_kind(kind)?;
    if opts.restarts == 0 {
        return Err(crate::Error::Fit("at least one restart is required".into()));
    }
    let layout = Layout { kind, gauge_fix: opts.gauge_fix };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let nm = NelderMead { max_iter: opts.max_iter, diameter_tol: opts.tol, ..Default::default() };
    let objective = |x: &[f64]| {
        let (a, b) = layout.unpack(x);
        functional.norm(&a, &b)
    };
    let project = |x: &mut [f64]| layout.project(x);

    let mut evaluations = 0;
    let mut best: Option<super::SimplexOutcome> = None;
    let starts = seeds(kind, opts.restarts, &mut rng);
    for (a, b) in &starts {
        let mut x0 = layout.pack(*a, *b);
        layout.project(&mut x0);
        let out = nm.minimize(objective, project, &x0);
        evaluations += out.evaluations;
        if best.as_ref().is_none_or(|b| out.value < b.value) {
            best = Some(out);
        }
    }
    let mut best = best.expect("at least one restart");

    let polish = NelderMead { initial_step: 0.02, ..nm };
    let out = polish.minimize(objective, project, &best.best);
    evaluations += out.evaluations;
    if out.value <= best.value {
        best = out;
    }

    let (a, b) = layout.unpack(&best.best);
    let (a, b) = (BlochState::projected(a), BlochState::projected(b));
    let ansatz = match kind {
        AnsatzKind::Uniform => ProductAnsatz::uniform(a),
        AnsatzKind::Bipartite => ProductAnsatz::bipartite(a, b),
    };
    Ok(Minimum { ansatz, norm: best.value, converged: best.converged, restarts_used: starts.len(), evaluations })
}
