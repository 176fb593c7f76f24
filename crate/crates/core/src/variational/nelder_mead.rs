/// Derivative-free simplex descent with a projection hook for constraints.
#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Converged once the largest vertex distance from the best vertex drops
    /// below this.
    pub diameter_tol: f64,
    /// Converged once the best value improved by less than this over
    /// `stall_window` iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iter: 4000, diameter_tol: 1e-9, stall_tol: 1e-12, stall_window: 50, initial_step: 0.2 }
    }
}

#[derive(Clone, Debug)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl Simplex {
    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&i, &j| self.values[i].total_cmp(&self.values[j]));
        self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    pub fn diameter(&self) -> f64 {
        let best = &self.vertices[0];
        self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(best).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

impl NelderMead {
    /// Minimizes `f` from `start`. Every trial point passes through `project`
    /// before evaluation, so the simplex never leaves the feasible set.
    pub fn minimize<F, P>(&self, mut f: F, project: P, start: &[f64]) -> SimplexOutcome
    where
        F: FnMut(&[f64]) -> f64,
        P: Fn(&mut [f64]),
    {
        let n = start.len();
        let mut evaluations = 0;
        let mut eval = |x: &mut Vec<f64>| {
            project(x);
            evaluations += 1;
            let v = f(x);
            if v.is_finite() { v } else { f64::INFINITY }
        };

        let mut vertices = Vec::with_capacity(n + 1);
        let mut first = start.to_vec();
        let v0 = eval(&mut first);
        vertices.push(first);
        let mut values = vec![v0];
        for k in 0..n {
            let mut v = vertices[0].clone();
            // step toward the interior so vertices on the sphere stay distinct
            v[k] += if v[k] > 0.0 { -self.initial_step } else { self.initial_step };
            values.push(eval(&mut v));
            vertices.push(v);
        }
        let mut simplex = Simplex { vertices, values };
        simplex.sort();

        if n == 0 {
            return SimplexOutcome {
                best: simplex.vertices.swap_remove(0),
                value: simplex.values[0],
                iterations: 0,
                evaluations,
                converged: true,
            };
        }

        let mut history = vec![simplex.values[0]];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < self.max_iter {
            if simplex.diameter() < self.diameter_tol {
                converged = true;
                break;
            }
            if history.len() > self.stall_window {
                let past = history[history.len() - 1 - self.stall_window];
                if past - simplex.values[0] < self.stall_tol {
                    converged = true;
                    break;
                }
            }
            iterations += 1;

            let worst = simplex.vertices[n].clone();
            let centroid: Vec<f64> = (0..n)
                .map(|d| simplex.vertices[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
                .collect();

            let mut reflected = affine(&centroid, &worst, -1.0);
            let fr = eval(&mut reflected);
            if fr < simplex.values[0] {
                let mut expanded = affine(&centroid, &worst, -2.0);
                let fe = eval(&mut expanded);
                if fe < fr {
                    simplex.vertices[n] = expanded;
                    simplex.values[n] = fe;
                } else {
                    simplex.vertices[n] = reflected;
                    simplex.values[n] = fr;
                }
            } else if fr < simplex.values[n - 1] {
                simplex.vertices[n] = reflected;
                simplex.values[n] = fr;
            } else {
                let (mut contracted, limit) = if fr < simplex.values[n] {
                    (affine(&centroid, &worst, -0.5), fr)
                } else {
                    (affine(&centroid, &worst, 0.5), simplex.values[n])
                };
                let fc = eval(&mut contracted);
                if fc < limit {
                    simplex.vertices[n] = contracted;
                    simplex.values[n] = fc;
                } else {
                    let best = simplex.vertices[0].clone();
                    for k in 1..=n {
                        let mut shrunk = affine(&best, &simplex.vertices[k], 0.5);
                        simplex.values[k] = eval(&mut shrunk);
                        simplex.vertices[k] = shrunk;
                    }
                }
            }
            simplex.sort();
            history.push(simplex.values[0]);
        }

        SimplexOutcome {
            best: simplex.vertices.swap_remove(0),
            value: simplex.values[0],
            iterations,
            evaluations,
            converged,
        }
    }
}
