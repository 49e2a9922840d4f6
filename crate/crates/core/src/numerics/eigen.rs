//! Dense nonsymmetric eigensolver: balancing, Hessenberg reduction by
//! stabilized elementary similarity transforms, shifted Francis QR for the
//! eigenvalues, and inverse iteration for the eigenvectors that are asked for.

use super::linalg::{ComplexLu, Matrix, RealLu};
use crate::error::{Error, Result};
use num_complex::Complex64;

const MAX_QR_ITERATIONS: usize = 60;
const INVERSE_ITERATIONS: usize = 4;

/// An eigenvalue with a unit-norm eigenvector whose first significant
/// component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

impl EigenPair {
    /// Real parts of the eigenvector components.
    pub fn real_vector(&self) -> Vec<f64> {
        self.vector.iter().map(|c| c.re).collect()
    }

    pub fn is_real(&self, rel_tol: f64) -> bool {
        self.value.im.abs() <= rel_tol * self.value.norm()
    }

    /// ‖A v − λ v‖₂.
    pub fn residual(&self, a: &Matrix) -> f64 {
        let av = a.mul_complex_vec(&self.vector);
        av.iter().zip(&self.vector).map(|(x, v)| (x - self.value * v).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Relevance key used when the caller does not supply one: |Re(1/λ)|.
pub fn inverse_real_part_key(lambda: Complex64) -> f64 {
    if lambda.norm() == 0.0 {
        f64::INFINITY
    } else {
        lambda.inv().re.abs()
    }
}

/// Eigenpairs of a dense real matrix, sorted by descending `|Re(1/λ)|`,
/// truncated to the first `n_want`.
pub fn eig_real_dense(a: &Matrix, n_want: usize) -> Result<Vec<EigenPair>> {
    eig_real_dense_by(a, n_want, inverse_real_part_key)
}

/// Eigenpairs ordered by descending `key(λ)`, with eigenvectors computed only
/// for the first `n_want`. Ties keep the ordering of the QR output.
pub fn eig_real_dense_by<K>(a: &Matrix, n_want: usize, key: K) -> Result<Vec<EigenPair>>
where
    K: Fn(Complex64) -> f64,
{
    if !a.is_square() {
        return Err(Error::InvalidInput("eigensolver requires a square matrix".into()));
    }
    let n = a.rows();
    if n_want == 0 || n_want > n {
        return Err(Error::InvalidInput(format!("n_want = {n_want} outside 1..={n}")));
    }
    let mut values = eigenvalues(a)?;
    values.sort_by(|x, y| key(*y).total_cmp(&key(*x)));
    values.into_iter().take(n_want).map(|value| Ok(EigenPair { value, vector: eigenvector(a, value)? })).collect()
}

/// All eigenvalues of a dense real matrix (complex pairs adjacent).
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("eigensolver requires a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // One-based working copy keeps the classic index arithmetic readable.
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a[(i, j)];
        }
    }
    balance(&mut h, n);
    to_hessenberg(&mut h, n);
    hessenberg_qr(&mut h, n)
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i > j + 1 {
                a[i][j] = 0.0;
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

#[allow(clippy::many_single_char_names)]
fn hessenberg_qr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<Complex64>> {
    let n_i = n as isize;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let at = |i: isize| i as usize;
    let mut nn: isize = n_i;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[at(l - 1)][at(l - 1)].abs() + a[at(l)][at(l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[at(l)][at(l - 1)].abs() <= f64::EPSILON * s {
                    a[at(l)][at(l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[at(nn)][at(nn)];
            if l == nn {
                wr[at(nn)] = x + t;
                wi[at(nn)] = 0.0;
                nn -= 1;
            } else {
                let mut y = a[at(nn - 1)][at(nn - 1)];
                let mut w = a[at(nn)][at(nn - 1)] * a[at(nn - 1)][at(nn)];
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[at(nn - 1)] = x + z;
                        wr[at(nn)] = x + z;
                        if z != 0.0 {
                            wr[at(nn)] = x - w / z;
                        }
                        wi[at(nn - 1)] = 0.0;
                        wi[at(nn)] = 0.0;
                    } else {
                        wr[at(nn - 1)] = x + p;
                        wr[at(nn)] = x + p;
                        wi[at(nn - 1)] = -z;
                        wi[at(nn)] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_QR_ITERATIONS {
                        return Err(Error::NoConvergence { what: "Hessenberg QR", iterations: its });
                    }
                    if its > 0 && its % 10 == 0 {
                        // Exceptional shift.
                        t += x;
                        for i in 1..=at(nn) {
                            a[i][i] -= x;
                        }
                        let s = a[at(nn)][at(nn - 1)].abs() + a[at(nn - 1)][at(nn - 2)].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let (mut p, mut q, mut r);
                    let mut m = nn - 2;
                    let mut z;
                    loop {
                        z = a[at(m)][at(m)];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[at(m + 1)][at(m)] + a[at(m)][at(m + 1)];
                        q = a[at(m + 1)][at(m + 1)] - z - r - s;
                        r = a[at(m + 2)][at(m + 1)];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[at(m)][at(m - 1)].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[at(m - 1)][at(m - 1)].abs() + z.abs() + a[at(m + 1)][at(m + 1)].abs());
                        if u <= f64::EPSILON * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[at(i)][at(i - 2)] = 0.0;
                        if i != m + 2 {
                            a[at(i)][at(i - 3)] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[at(k)][at(k - 1)];
                            q = a[at(k + 1)][at(k - 1)];
                            r = 0.0;
                            if k != nn - 1 {
                                r = a[at(k + 2)][at(k - 1)];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[at(k)][at(k - 1)] = -a[at(k)][at(k - 1)];
                                }
                            } else {
                                a[at(k)][at(k - 1)] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let mut pp = a[at(k)][at(j)] + q * a[at(k + 1)][at(j)];
                                if k != nn - 1 {
                                    pp += r * a[at(k + 2)][at(j)];
                                    a[at(k + 2)][at(j)] -= pp * z;
                                }
                                a[at(k + 1)][at(j)] -= pp * y;
                                a[at(k)][at(j)] -= pp * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let mut pp = x * a[at(i)][at(k)] + y * a[at(i)][at(k + 1)];
                                if k != nn - 1 {
                                    pp += z * a[at(i)][at(k + 2)];
                                    a[at(i)][at(k + 2)] -= pp * r;
                                }
                                a[at(i)][at(k + 1)] -= pp * q;
                                a[at(i)][at(k)] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Eigenvector for a known eigenvalue by shifted inverse iteration on `a`.
pub fn eigenvector(a: &Matrix, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    // A slightly perturbed shift keeps the factorization regular.
    let delta = 1e-12 * scale;
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666).sin()).collect();
    let mut v = if lambda.im == 0.0 {
        let lu = RealLu::shifted(a, lambda.re + delta)?;
        let mut v = start;
        for _ in 0..INVERSE_ITERATIONS {
            v = lu.solve(&v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::NoConvergence { what: "inverse iteration", iterations: INVERSE_ITERATIONS });
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v.into_iter().map(|x| Complex64::new(x, 0.0)).collect::<Vec<_>>()
    } else {
        let lu = ComplexLu::shifted(a, lambda + delta)?;
        let mut v: Vec<Complex64> = start.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        for _ in 0..INVERSE_ITERATIONS {
            v = lu.solve(&v);
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::NoConvergence { what: "inverse iteration", iterations: INVERSE_ITERATIONS });
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    };
    fix_phase(&mut v);
    Ok(v)
}

// Rotate so the first component above 1e-9 of the largest is real positive.
fn fix_phase(v: &mut [Complex64]) {
    let largest = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    if let Some(first) = v.iter().find(|x| x.norm() > 1e-9 * largest).copied() {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}
