//! Derivative-free simplex minimization (Nelder-Mead).

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Initial step along each coordinate.
    pub step: f64,
    /// Stop once `f_max - f_min` over the simplex drops below this.
    pub f_tol: f64,
    pub max_iterations: usize,
    /// Number of times to rebuild the simplex around the best point after
    /// convergence. Guards against premature collapse.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            f_tol: 1e-12,
            max_iterations: 5000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Run {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    evaluations: usize,
}

fn run(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64, f_tol: f64, max_iter: usize) -> Run {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < max_iter {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        if (vals[worst] - vals[best]).abs() <= f_tol {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[best] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < vals[worst].min(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        let anchor = pts[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for (x, a) in pts[i].iter_mut().zip(&anchor) {
                *x = a + 0.5 * (*x - a);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)))
        .expect("non-empty simplex");
    Run {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
        evaluations: evals,
    }
}

/// Minimizes `f` starting from `x0`.
pub fn minimize(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome {
    assert!(!x0.is_empty(), "simplex search needs at least one parameter");
    let mut current = run(&mut f, x0, opts.step, opts.f_tol, opts.max_iterations);
    let mut iterations = current.iterations;
    let mut evaluations = current.evaluations;
    let mut step = opts.step;
    for _ in 0..opts.restarts {
        step = (step * 0.1).max(1e-6);
        let next = run(&mut f, &current.x, step, opts.f_tol, opts.max_iterations);
        iterations += next.iterations;
        evaluations += next.evaluations;
        let improved = next.value < current.value - opts.f_tol;
        if next.value < current.value {
            current = next;
        }
        if !improved {
            break;
        }
    }
    SimplexOutcome {
        x: current.x,
        value: current.value,
        iterations,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let out = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 5.0,
            &[0.0, 0.0],
            &SimplexOptions::default(),
        );
        assert!((out.x[0] - 1.0).abs() < 1e-5);
        assert!((out.x[1] + 2.0).abs() < 1e-5);
        assert!((out.value - 5.0).abs() < 1e-10);
    }

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &SimplexOptions {
                step: 0.5,
                f_tol: 1e-16,
                max_iterations: 20_000,
                restarts: 3,
            },
        );
        assert!((out.x[0] - 1.0).abs() < 1e-4, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-4, "{:?}", out.x);
    }

    #[test]
    fn trigonometric_objective() {
        // maximum of cos(a)cos(b) at the origin
        let out = minimize(
            |x| -(x[0].cos() * x[1].cos()),
            &[0.3, -0.2],
            &SimplexOptions::default(),
        );
        assert!((out.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() + x[1].cos() * x[2];
        let x0 = [0.4, 0.1, -0.3];
        let out = minimize(f, &x0, &SimplexOptions::default());
        assert!(out.value <= f(&x0));
    }
}
