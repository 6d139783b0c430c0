//! Nelder–Mead minimization with dimension-adaptive coefficients
//! (reflection 1, expansion 1+2/n, contraction 0.75−1/(2n), shrink 1−1/n).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Convergence needs every vertex within `xatol` (max norm) of the best
    /// vertex and every value within `fatol` of the best value.
    pub xatol: f64,
    pub fatol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
    /// The objective asked to stop early.
    pub aborted: bool,
}

/// Initial simplex: `x0` plus `x0` moved by 5% along each coordinate, or by
/// 2.5e-4 where the coordinate is zero.
pub fn default_simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let mut sim = vec![x0.to_vec()];
    for k in 0..x0.len() {
        let mut y = x0.to_vec();
        y[k] = if y[k] != 0.0 { 1.05 * y[k] } else { 0.00025 };
        sim.push(y);
    }
    sim
}

/// Minimizes `f` from the given `n+1` vertices. `f` returns `None` to abort
/// the search; non-finite values rank last.
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> Option<f64>,
    simplex: Vec<Vec<f64>>,
    opts: &SimplexOptions,
) -> SimplexOutcome {
    let n = simplex.len() - 1;
    let nf = n.max(1) as f64;
    let (rho, chi, psi, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut evals = 0usize;
    let mut aborted = false;
    let mut eval = |x: &[f64], evals: &mut usize, aborted: &mut bool| -> f64 {
        if *aborted {
            return f64::INFINITY;
        }
        *evals += 1;
        match f(x) {
            Some(v) if v.is_nan() => f64::INFINITY,
            Some(v) => v,
            None => {
                *aborted = true;
                f64::INFINITY
            }
        }
    };

    let mut sim = simplex;
    let mut fsim: Vec<f64> = Vec::with_capacity(n + 1);
    for x in &sim {
        let v = eval(x, &mut evals, &mut aborted);
        fsim.push(v);
    }
    sort(&mut sim, &mut fsim);

    let mut converged = false;
    let mut xbar = vec![0.0; n];
    let point = |a: f64, xbar: &[f64], b: f64, worst: &[f64]| -> Vec<f64> {
        xbar.iter().zip(worst).map(|(m, w)| a * m + b * w).collect()
    };

    while !aborted && evals < opts.max_evals && n > 0 {
        let fspread = fsim.iter().map(|v| (v - fsim[0]).abs()).fold(0.0, f64::max);
        let xspread = sim[1..]
            .iter()
            .flat_map(|x| x.iter().zip(&sim[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if fspread <= opts.fatol && xspread <= opts.xatol {
            converged = true;
            break;
        }

        xbar.iter_mut().for_each(|v| *v = 0.0);
        for x in &sim[..n] {
            for (m, xi) in xbar.iter_mut().zip(x) {
                *m += xi;
            }
        }
        xbar.iter_mut().for_each(|v| *v /= nf);

        let worst = sim[n].clone();
        let xr = point(1.0 + rho, &xbar, -rho, &worst);
        let fxr = eval(&xr, &mut evals, &mut aborted);
        let mut shrink = false;
        if fxr < fsim[0] {
            let xe = point(1.0 + rho * chi, &xbar, -rho * chi, &worst);
            let fxe = eval(&xe, &mut evals, &mut aborted);
            if fxe < fxr {
                sim[n] = xe;
                fsim[n] = fxe;
            } else {
                sim[n] = xr;
                fsim[n] = fxr;
            }
        } else if fxr < fsim[n - 1] {
            sim[n] = xr;
            fsim[n] = fxr;
        } else if fxr < fsim[n] {
            let xc = point(1.0 + psi * rho, &xbar, -psi * rho, &worst);
            let fxc = eval(&xc, &mut evals, &mut aborted);
            if fxc <= fxr {
                sim[n] = xc;
                fsim[n] = fxc;
            } else {
                shrink = true;
            }
        } else {
            let xcc = point(1.0 - psi, &xbar, psi, &worst);
            let fxcc = eval(&xcc, &mut evals, &mut aborted);
            if fxcc < fsim[n] {
                sim[n] = xcc;
                fsim[n] = fxcc;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = sim[0].clone();
            for j in 1..=n {
                for (v, b) in sim[j].iter_mut().zip(&best) {
                    *v = b + sigma * (*v - b);
                }
                fsim[j] = eval(&sim[j], &mut evals, &mut aborted);
            }
        }
        sort(&mut sim, &mut fsim);
    }

    SimplexOutcome { x: sim[0].clone(), value: fsim[0], evals, converged, aborted }
}

/// Orders vertices by value; ties keep their current order.
fn sort(sim: &mut Vec<Vec<f64>>, fsim: &mut Vec<f64>) {
    let mut idx: Vec<usize> = (0..fsim.len()).collect();
    idx.sort_by(|&a, &b| fsim[a].total_cmp(&fsim[b]));
    let s: Vec<Vec<f64>> = idx.iter().map(|&i| std::mem::take(&mut sim[i])).collect();
    let v: Vec<f64> = idx.iter().map(|&i| fsim[i]).collect();
    *sim = s;
    *fsim = v;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_evals: usize) -> SimplexOptions {
        SimplexOptions { max_evals, xatol: 1e-10, fatol: 1e-14 }
    }

    #[test]
    fn quadratic_minimum() {
        let mut f = |x: &[f64]| Some((x[0] - 1.0).powi(2) + 4.0 * (x[1] + 2.0).powi(2) + 0.5 * (x[2] - 0.3).powi(2));
        let out = minimize(&mut f, default_simplex(&[0.0, 0.0, 0.0]), &opts(10_000));
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] + 2.0).abs() < 1e-6 && (out.x[2] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let mut f = |x: &[f64]| Some(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let out = minimize(&mut f, default_simplex(&[-1.2, 1.0]), &opts(10_000));
        assert!(out.value < 1e-12, "{out:?}");
    }

    #[test]
    fn respects_budget_and_abort() {
        let mut calls = 0;
        let mut f = |x: &[f64]| {
            calls += 1;
            Some(x.iter().map(|v| v * v).sum())
        };
        let out = minimize(&mut f, default_simplex(&[1.0; 8]), &opts(50));
        assert!(out.evals <= 50 + 9);
        let mut k = 0;
        let mut g = |x: &[f64]| {
            k += 1;
            if k > 20 {
                None
            } else {
                Some(x[0].abs())
            }
        };
        let out = minimize(&mut g, default_simplex(&[3.0, 1.0]), &opts(1000));
        assert!(out.aborted);
        assert_eq!(out.evals, 21);
    }

    #[test]
    fn nan_ranks_last() {
        let mut f = |x: &[f64]| Some(if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) });
        let out = minimize(&mut f, default_simplex(&[0.1]), &opts(1000));
        assert!((out.x[0] - 0.5).abs() < 1e-5);
    }
}
