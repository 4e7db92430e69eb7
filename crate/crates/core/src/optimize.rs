//! Derivative-free minimisation: Nelder-Mead with restarts and a
//! deterministic multistart over lattice seeds.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evals: usize,
}

fn eval(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// One Nelder-Mead run. Converges when the simplex diameter (∞-norm) drops
/// below `xtol`, or when the spread of values drops below
/// `ftol·max(1, |f|)` (flat directions never shrink the simplex).
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], xtol: f64, ftol: f64, max_evals: usize) -> Minimum {
    let d = x0.len();
    let mut evals = 0;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), eval(f, x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = eval(f, &x);
        simplex.push((x, v));
    }
    evals += d + 1;
    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let diam = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diam < xtol || (worst - best).abs() <= ftol * best.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut c = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { c.iter().zip(&simplex[d].0).map(|(ci, wi)| ci + t * (ci - wi)).collect() };
        let xr = along(1.0);
        let fr = eval(f, &xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(f, &xe);
            evals += 1;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let x = along(0.5);
                let v = eval(f, &x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(f, &x);
                (x, v)
            };
            evals += 1;
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x0) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = eval(f, x);
                }
                evals += d;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, converged, evals }
}

/// Nelder-Mead restarted from its own optimum with a fresh simplex until a
/// restart no longer improves the value.
pub fn nelder_mead_restarted(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], xtol: f64, max_evals: usize) -> Minimum {
    let ftol = 1e-14;
    let mut m = nelder_mead(f, x0, step, xtol, ftol, max_evals);
    let mut total = m.evals;
    for round in 0..4 {
        let scale = 0.1f64.powi(round);
        let s: Vec<f64> = step.iter().map(|v| (v * scale).max(10.0 * xtol)).collect();
        let r = nelder_mead(f, &m.x, &s, xtol, ftol, max_evals);
        total += r.evals;
        let improved = r.value < m.value - 1e-13 * m.value.abs().max(1.0);
        if r.value <= m.value {
            m = Minimum { converged: r.converged, ..r };
        }
        if !improved {
            break;
        }
    }
    m.evals = total;
    m
}

/// Centres of the 3^d cells of the box `[lo, hi]`.
pub fn lattice_seeds(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let d = lo.len();
    let mut out = vec![Vec::with_capacity(d)];
    for i in 0..d {
        let w = (hi[i] - lo[i]) / 3.0;
        let mut next = Vec::with_capacity(out.len() * 3);
        for s in &out {
            for k in 0..3 {
                let mut t = s.clone();
                t.push(lo[i] + w * (k as f64 + 0.5));
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Best restarted Nelder-Mead run over `seeds`; the earliest seed wins ties.
pub fn minimize_multistart(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    seeds: &[Vec<f64>],
    step: &[f64],
    xtol: f64,
    max_evals: usize,
) -> Result<Minimum> {
    let mut best: Option<Minimum> = None;
    for s in seeds {
        let m = nelder_mead_restarted(f, s, step, xtol, max_evals);
        let tie = 1e-12 * m.value.abs().max(1.0);
        if m.value.is_finite() && best.as_ref().map_or(true, |b| m.value < b.value - tie) {
            best = Some(m);
        }
    }
    best.ok_or_else(|| Error::Optimization("no seed produced a finite value".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead_restarted(&f, &[-1.2, 1.0], &[0.5, 0.5], 1e-10, 20_000);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn lattice_has_cell_centres() {
        let s = lattice_seeds(&[0.0, -3.0], &[3.0, 3.0]);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], vec![0.5, -2.0]);
        assert_eq!(s[8], vec![2.5, 2.0]);
    }
}
