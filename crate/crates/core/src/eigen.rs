//! Lowest eigenpairs of sparse Hermitian operators.
//!
//! Small blocks go to a dense Hermitian solve. Larger ones use a
//! thick-restart Lanczos iteration with full reorthogonalisation, started
//! from a fixed-seed random vector so repeated runs agree bit for bit.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::operator::SparseOperator;

/// Blocks up to this size are diagonalised densely.
pub const DENSE_LIMIT: usize = 400;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    /// `‖Hv - Ev‖` per pair.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { krylov: 40, max_restarts: 2000, seed: 0x5eed_1a9c }
    }
}

/// Scalar field the Lanczos kernel runs over (real or complex).
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += x.conjugate() * *y;
    }
    s
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

fn axpy<T: Scalar>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * *xi;
    }
}

fn orthogonalize<T: Scalar>(w: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for v in basis {
            let h = dot(v, w);
            axpy(w, h, v);
        }
    }
}

fn random_unit<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize, against: &[&[Vec<T>]]) -> Option<Vec<T>> {
    for _ in 0..8 {
        let mut v: Vec<T> = (0..dim).map(|_| T::from_real(rng.gen::<f64>() - 0.5)).collect();
        for b in against {
            orthogonalize(&mut v, b);
        }
        let n = norm(&v);
        if n > 1e-8 {
            let inv = T::from_real(1.0 / n);
            v.iter_mut().for_each(|x| *x *= inv);
            return Some(v);
        }
    }
    None
}

fn hermitian_eigen<T: Scalar>(s: DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Thick-restart Lanczos for the `k` lowest eigenpairs of the operator
/// restricted to the orthogonal complement of `locked`.
fn thick_restart<T: Scalar>(
    dim: usize,
    k: usize,
    apply: &dyn Fn(&[T], &mut [T]),
    locked: &[Vec<T>],
    tol: f64,
    opts: &LanczosOptions,
    seed_offset: u64,
) -> Result<(Vec<f64>, Vec<Vec<T>>)> {
    let avail = dim - locked.len();
    if k > avail {
        return invalid("requested more eigenpairs than the space holds");
    }
    let m = opts.krylov.max(2 * k + 10).min(avail);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(seed_offset));
    let v0 = random_unit::<T>(&mut rng, dim, &[locked]).ok_or(Error::NoConvergence { residual: f64::NAN })?;
    let mut v: Vec<Vec<T>> = vec![v0];
    let mut s = DMatrix::<T>::zeros(m, m);
    let mut processed = 0usize;
    let mut w = vec![T::zero(); dim];
    let mut hnorm: f64 = 0.0;
    let mut best = f64::INFINITY;
    for _restart in 0..=opts.max_restarts {
        let mut f: Option<(Vec<T>, f64)> = None;
        let mut exhausted = false;
        while processed < v.len() {
            let q = processed;
            apply(&v[q], &mut w);
            if !locked.is_empty() {
                orthogonalize(&mut w, locked);
            }
            let mut c = vec![T::zero(); v.len()];
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let h = dot(vi, &w);
                    c[i] += h;
                    axpy(&mut w, h, vi);
                }
            }
            for (i, ci) in c.iter().enumerate() {
                s[(i, q)] = *ci;
                s[(q, i)] = ci.conjugate();
                hnorm = hnorm.max(ci.modulus());
            }
            processed += 1;
            let beta = norm(&w);
            let breakdown = beta <= 1e-12 * hnorm.max(1.0);
            if v.len() < m {
                if breakdown {
                    match random_unit::<T>(&mut rng, dim, &[locked, &v[..]]) {
                        Some(r) => v.push(r),
                        None => exhausted = true,
                    }
                } else {
                    let inv = T::from_real(1.0 / beta);
                    v.push(w.iter().map(|&x| x * inv).collect());
                }
            } else {
                f = if breakdown { None } else { Some((w.clone(), beta)) };
                if breakdown {
                    exhausted = true;
                }
            }
        }
        let l = v.len();
        let mut sl = s.view((0, 0), (l, l)).into_owned();
        let sh = sl.adjoint();
        sl = (sl + sh) * T::from_real(0.5);
        let (theta, y) = hermitian_eigen(sl);
        let fnorm = f.as_ref().map(|x| x.1).unwrap_or(0.0);
        let resid: Vec<f64> = (0..k).map(|i| fnorm * y[(l - 1, i)].modulus()).collect();
        let worst = resid.iter().cloned().fold(0.0, f64::max);
        best = best.min(worst);
        if worst < tol || exhausted || l >= avail {
            let vecs = (0..k)
                .map(|i| {
                    let mut u = vec![T::zero(); dim];
                    for (j, vj) in v.iter().enumerate() {
                        let coef = y[(j, i)];
                        for (ui, x) in u.iter_mut().zip(vj) {
                            *ui += coef * *x;
                        }
                    }
                    let n = norm(&u);
                    let inv = T::from_real(1.0 / n);
                    u.iter_mut().for_each(|x| *x *= inv);
                    u
                })
                .collect();
            return Ok((theta[..k].to_vec(), vecs));
        }
        let keep = ((k + l) / 2).max(k).min(l - 1);
        let mut nv: Vec<Vec<T>> = Vec::with_capacity(m);
        for i in 0..keep {
            let mut u = vec![T::zero(); dim];
            for (j, vj) in v.iter().enumerate() {
                let coef = y[(j, i)];
                for (ui, x) in u.iter_mut().zip(vj) {
                    *ui += coef * *x;
                }
            }
            nv.push(u);
        }
        s.fill(T::zero());
        for i in 0..keep {
            s[(i, i)] = T::from_real(theta[i]);
        }
        let (fv, fnorm) = f.expect("residual exists when not exhausted");
        let inv = T::from_real(1.0 / fnorm);
        let mut fv: Vec<T> = fv.iter().map(|&x| x * inv).collect();
        orthogonalize(&mut fv, &nv);
        let n = norm(&fv);
        let inv = T::from_real(1.0 / n);
        fv.iter_mut().for_each(|x| *x *= inv);
        nv.push(fv);
        v = nv;
        processed = keep;
    }
    Err(Error::NoConvergence { residual: best })
}

fn lanczos<T: Scalar>(
    dim: usize,
    k: usize,
    apply: &dyn Fn(&[T], &mut [T]),
    tol: f64,
    opts: &LanczosOptions,
) -> Result<(Vec<f64>, Vec<Vec<T>>)> {
    let (mut vals, mut vecs) = thick_restart(dim, k, apply, &[], tol, opts, 0)?;
    if k == 1 {
        return Ok((vals, vecs));
    }
    // a Krylov space can miss one partner of an exactly degenerate pair;
    // search the complement of the found vectors for anything lower
    for round in 1..=k as u64 {
        if vecs.len() >= dim {
            break;
        }
        let (extra, ev) = thick_restart(dim, 1, apply, &vecs, tol, opts, round)?;
        let top = *vals.last().unwrap();
        if extra[0] < top - tol.max(1e-10 * top.abs()) {
            vals.pop();
            vecs.pop();
            let pos = vals.partition_point(|&e| e <= extra[0]);
            vals.insert(pos, extra[0]);
            vecs.insert(pos, ev.into_iter().next().unwrap());
        } else {
            break;
        }
    }
    Ok((vals, vecs))
}

fn dense(h: &SparseOperator, k: usize) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = h.dim();
    if h.is_real() {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            for (c, v) in h.row(r) {
                m[(r, c)] = v.re;
            }
        }
        let (vals, vecs) = hermitian_eigen(m);
        let out = (0..k).map(|i| vecs.column(i).iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        (vals[..k].to_vec(), out)
    } else {
        let (vals, vecs) = hermitian_eigen(h.to_dense());
        let out = (0..k).map(|i| vecs.column(i).iter().copied().collect()).collect();
        (vals[..k].to_vec(), out)
    }
}

/// Rotate so the largest component (lowest index among ties) is real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let i = v.iter().position(|x| x.norm() >= max * (1.0 - 1e-9)).unwrap();
    let ph = v[i].conj() / v[i].norm();
    v.iter_mut().for_each(|x| *x *= ph);
}

/// `k` lowest eigenpairs of a Hermitian operator.
pub fn lowest_eigenpairs(h: &SparseOperator, k: usize, tol: f64) -> Result<EigenResult> {
    lowest_eigenpairs_with(h, k, tol, &LanczosOptions::default())
}

pub fn lowest_eigenpairs_with(h: &SparseOperator, k: usize, tol: f64, opts: &LanczosOptions) -> Result<EigenResult> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return invalid(format!("k = {k} outside 1..={dim}"));
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let (vals, mut vecs) = if dim <= DENSE_LIMIT || (4 * k >= dim && dim <= 4 * DENSE_LIMIT) {
        dense(h, k)
    } else if h.is_real() {
        let apply = |x: &[f64], y: &mut [f64]| h.apply_real(x, y);
        let (vals, vecs) = lanczos::<f64>(dim, k, &apply, tol, opts)?;
        (vals, vecs.into_iter().map(|v| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()).collect())
    } else {
        let apply = |x: &[Complex64], y: &mut [Complex64]| h.apply(x, y);
        lanczos::<Complex64>(dim, k, &apply, tol, opts)?
    };
    vecs.iter_mut().for_each(|v| fix_phase(v));
    let mut pairs: Vec<(f64, Vec<Complex64>)> = vals.into_iter().zip(vecs).collect();
    order_degenerate(&mut pairs);
    let mut residuals = Vec::with_capacity(k);
    let mut hv = vec![Complex64::new(0.0, 0.0); dim];
    for (e, v) in &pairs {
        h.apply(v, &mut hv);
        let r = hv.iter().zip(v).map(|(a, b)| (a - b * *e).norm_sqr()).sum::<f64>().sqrt();
        residuals.push(r);
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if worst > tol.max(1e-11 * pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max)) * 10.0 {
        return Err(Error::NoConvergence { residual: worst });
    }
    let (energies, vectors) = pairs.into_iter().unzip();
    Ok(EigenResult { energies, vectors, residuals })
}

/// Within groups of equal energy, order by descending magnitude at the
/// lowest basis index where the group has weight.
fn order_degenerate(pairs: &mut [(f64, Vec<Complex64>)]) {
    let mut start = 0;
    while start < pairs.len() {
        let e0 = pairs[start].0;
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end].0 - e0).abs() <= 1e-9 * e0.abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let dim = pairs[start].1.len();
            let idx = (0..dim)
                .find(|&i| pairs[start..end].iter().any(|p| p.1[i].norm() > 1e-8))
                .unwrap_or(0);
            pairs[start..end].sort_by(|a, b| b.1[idx].norm().total_cmp(&a.1[idx].norm()));
        }
        start = end;
    }
}
