//! Derivative-free minimization with the Nelder-Mead simplex.

/// Settings for [`minimize`].
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub x_tolerance: f64,
    /// ... or once vertex values agree to this relative tolerance.
    pub f_tolerance: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            x_tolerance: 1e-8,
            f_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    pub fn with_max_iterations(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            ..Self::default()
        }
    }

    /// Minimizes `f` from `start`, building the initial simplex by moving
    /// each coordinate by the matching entry of `steps`.
    ///
    /// Non-finite objective values are treated as `+inf`, so a closure can
    /// encode box constraints by returning `f64::INFINITY`.
    pub fn minimize<F>(&self, mut f: F, start: &[f64], steps: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        assert_eq!(start.len(), steps.len());
        let n = start.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        if n == 0 {
            let value = eval(start);
            return Minimum {
                x: Vec::new(),
                value,
                iterations: 0,
                evaluations: 1,
                converged: true,
            };
        }

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(start.to_vec());
        for i in 0..n {
            let mut v = start.to_vec();
            v[i] += if steps[i] != 0.0 { steps[i] } else { 0.00025 };
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        loop {
            // Stable sort keeps the ordering deterministic among ties.
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if self.has_converged(&simplex, &values) {
                converged = true;
                break;
            }
            if iterations >= self.max_iterations {
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let reflected = along(REFLECT);
            let f_reflected = eval(&reflected);
            if f_reflected < values[0] {
                let expanded = along(EXPAND);
                let f_expanded = eval(&expanded);
                if f_expanded < f_reflected {
                    simplex[n] = expanded;
                    values[n] = f_expanded;
                } else {
                    simplex[n] = reflected;
                    values[n] = f_reflected;
                }
                continue;
            }
            if f_reflected < values[n - 1] {
                simplex[n] = reflected;
                values[n] = f_reflected;
                continue;
            }
            let (contracted, f_contracted) = if f_reflected < values[n] {
                let c = along(REFLECT * CONTRACT);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(-CONTRACT);
                let fc = eval(&c);
                (c, fc)
            };
            if f_contracted < values[n].min(f_reflected) {
                simplex[n] = contracted;
                values[n] = f_contracted;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=n {
                for (x, b) in simplex[i].iter_mut().zip(&best) {
                    *x = b + SHRINK * (*x - b);
                }
                values[i] = eval(&simplex[i]);
            }
        }

        Minimum {
            x: simplex[0].clone(),
            value: values[0],
            iterations,
            evaluations,
            converged,
        }
    }

    fn has_converged(&self, simplex: &[Vec<f64>], values: &[f64]) -> bool {
        let best = &simplex[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if x_spread <= self.x_tolerance {
            return true;
        }
        let worst = values[values.len() - 1];
        if !values[0].is_finite() || !worst.is_finite() {
            return false;
        }
        worst - values[0] <= self.f_tolerance * values[0].abs().max(1e-300)
    }
}
