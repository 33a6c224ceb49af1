//! Dense linear algebra kernels: threaded complex matmul, blocked LU with
//! partial pivoting, the scaling-and-squaring matrix exponential, and a
//! Jacobi eigensolver for small real symmetric matrices.

use matrixmultiply::CGemmOption;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};

/// C = beta·C + alpha·A·B.
pub fn gemm_into(alpha: C64, a: &Array2<C64>, b: &Array2<C64>, beta: C64, c: &mut Array2<C64>) {
    let (m, k) = a.dim();
    let (kb, n) = b.dim();
    assert_eq!(k, kb, "inner dimensions must agree");
    assert_eq!(c.dim(), (m, n), "output shape mismatch");
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            a.strides()[0],
            a.strides()[1],
            b.as_ptr() as *const [f64; 2],
            b.strides()[0],
            b.strides()[1],
            [beta.re, beta.im],
            c.as_mut_ptr() as *mut [f64; 2],
            c.strides()[0],
            c.strides()[1],
        );
    }
}

pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let mut c = Array2::zeros((a.nrows(), b.ncols()));
    gemm_into(C64::new(1.0, 0.0), a, b, C64::new(0.0, 0.0), &mut c);
    c
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_elem(n, C64::new(1.0, 0.0)))
}

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Maximum absolute column sum.
pub fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// LU factors of a square matrix, P·A = L·U with unit-diagonal L.
pub struct LuFactors {
    lu: Array2<C64>,
    piv: Vec<usize>,
}

const LU_BLOCK: usize = 48;

/// Blocked right-looking LU with partial pivoting; trailing updates via gemm.
pub fn lu_factor(a: &Array2<C64>) -> Result<LuFactors> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "LU needs a square matrix");
    let mut lu = a.to_owned();
    let mut piv = vec![0usize; n];
    let mut k0 = 0;
    while k0 < n {
        let k1 = (k0 + LU_BLOCK).min(n);
        // Unblocked panel factorization over columns k0..k1 (full row swaps).
        for j in k0..k1 {
            let mut p = j;
            let mut best = lu[(j, j)].norm();
            for i in j + 1..n {
                let v = lu[(i, j)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(CoreError::InternalConsistency(format!(
                    "singular matrix in LU factorization at column {j}"
                )));
            }
            piv[j] = p;
            if p != j {
                for c in 0..n {
                    lu.swap((j, c), (p, c));
                }
            }
            let d = lu[(j, j)];
            for i in j + 1..n {
                let l = lu[(i, j)] / d;
                lu[(i, j)] = l;
                for c in j + 1..k1 {
                    let u = lu[(j, c)];
                    lu[(i, c)] -= l * u;
                }
            }
        }
        if k1 < n {
            // U block row: solve L11·X = A[k0..k1, k1..n] in place.
            for j in k0..k1 {
                for i in j + 1..k1 {
                    let l = lu[(i, j)];
                    if l != C64::new(0.0, 0.0) {
                        let (row_j, mut row_i) = {
                            let (top, bottom) = lu.multi_slice_mut((
                                ndarray::s![j, k1..n],
                                ndarray::s![i, k1..n],
                            ));
                            (top.to_owned(), bottom)
                        };
                        row_i.zip_mut_with(&row_j, |x, &yj| *x -= l * yj);
                    }
                }
            }
            // Trailing update A22 -= L21 · U12.
            let l21 = lu.slice(ndarray::s![k1..n, k0..k1]).to_owned();
            let u12 = lu.slice(ndarray::s![k0..k1, k1..n]).to_owned();
            let mut a22 = lu.slice(ndarray::s![k1..n, k1..n]).to_owned();
            gemm_into(C64::new(-1.0, 0.0), &l21, &u12, C64::new(1.0, 0.0), &mut a22);
            lu.slice_mut(ndarray::s![k1..n, k1..n]).assign(&a22);
        }
        k0 = k1;
    }
    Ok(LuFactors { lu, piv })
}

impl LuFactors {
    /// Solve A·X = B for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &Array2<C64>) -> Array2<C64> {
        let n = self.lu.nrows();
        assert_eq!(b.nrows(), n);
        let mut x = b.to_owned();
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                for c in 0..x.ncols() {
                    x.swap((j, c), (p, c));
                }
            }
        }
        // Forward substitution with unit-diagonal L, blocked.
        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + LU_BLOCK).min(n);
            for j in k0..k1 {
                for i in j + 1..k1 {
                    let l = self.lu[(i, j)];
                    if l != C64::new(0.0, 0.0) {
                        let (row_j, mut row_i) = {
                            let (top, bottom) =
                                x.multi_slice_mut((ndarray::s![j, ..], ndarray::s![i, ..]));
                            (top.to_owned(), bottom)
                        };
                        row_i.zip_mut_with(&row_j, |v, &yj| *v -= l * yj);
                    }
                }
            }
            if k1 < n {
                let l21 = self.lu.slice(ndarray::s![k1..n, k0..k1]).to_owned();
                let xk = x.slice(ndarray::s![k0..k1, ..]).to_owned();
                let mut xb = x.slice(ndarray::s![k1..n, ..]).to_owned();
                gemm_into(C64::new(-1.0, 0.0), &l21, &xk, C64::new(1.0, 0.0), &mut xb);
                x.slice_mut(ndarray::s![k1..n, ..]).assign(&xb);
            }
            k0 = k1;
        }
        // Backward substitution with U.
        let mut k1 = n;
        while k1 > 0 {
            let k0 = k1.saturating_sub(LU_BLOCK);
            for j in (k0..k1).rev() {
                let d = self.lu[(j, j)];
                {
                    let mut row_j = x.slice_mut(ndarray::s![j, ..]);
                    row_j.mapv_inplace(|v| v / d);
                }
                for i in k0..j {
                    let u = self.lu[(i, j)];
                    if u != C64::new(0.0, 0.0) {
                        let (row_j, mut row_i) = {
                            let (bottom, top) =
                                x.multi_slice_mut((ndarray::s![j, ..], ndarray::s![i, ..]));
                            (bottom.to_owned(), top)
                        };
                        row_i.zip_mut_with(&row_j, |v, &yj| *v -= u * yj);
                    }
                }
            }
            if k0 > 0 {
                let u_above = self.lu.slice(ndarray::s![0..k0, k0..k1]).to_owned();
                let xk = x.slice(ndarray::s![k0..k1, ..]).to_owned();
                let mut xa = x.slice(ndarray::s![0..k0, ..]).to_owned();
                gemm_into(C64::new(-1.0, 0.0), &u_above, &xk, C64::new(1.0, 0.0), &mut xa);
                x.slice_mut(ndarray::s![0..k0, ..]).assign(&xa);
            }
            k1 = k0;
        }
        x
    }
}

// Padé order thresholds from Higham, "The Scaling and Squaring Method for the
// Matrix Exponential Revisited" (2005), Table 2.3.
const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

const MAX_SQUARINGS: u32 = 64;

fn pade_coeffs(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17_297_280.0, 8_648_640.0, 1_995_840.0, 277_200.0, 25_200.0, 1_512.0, 56.0, 1.0],
        9 => &[
            17_643_225_600.0,
            8_821_612_800.0,
            2_075_673_600.0,
            302_702_400.0,
            30_270_240.0,
            2_162_160.0,
            110_880.0,
            3_960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64_764_752_532_480_000.0,
            32_382_376_266_240_000.0,
            7_771_770_303_897_600.0,
            1_187_353_796_428_800.0,
            129_060_195_264_000.0,
            10_559_470_521_600.0,
            670_442_572_800.0,
            33_522_128_640.0,
            1_323_241_920.0,
            40_840_800.0,
            960_960.0,
            16_380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé order"),
    }
}

/// exp(A) for a dense complex square matrix by scaling-and-squaring with a
/// Padé kernel of order chosen from the 1-norm.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(CoreError::ExpOverflow { norm });
    }

    let mut order = 13;
    let mut squarings = 0u32;
    if norm <= THETA[3].1 {
        for &(m, theta) in &THETA[..4] {
            if norm <= theta {
                order = m;
                break;
            }
        }
    } else if norm > THETA[4].1 {
        squarings = (norm / THETA[4].1).log2().ceil() as u32;
        if squarings > MAX_SQUARINGS {
            return Err(CoreError::ExpOverflow { norm });
        }
    }

    let scale = C64::new((0.5f64).powi(squarings as i32), 0.0);
    let a_s = a.mapv(|z| z * scale);
    let b = pade_coeffs(order);
    let eye = identity(n);
    let a2 = matmul(&a_s, &a_s);

    let (u, v) = if order == 13 {
        let a4 = matmul(&a2, &a2);
        let a6 = matmul(&a2, &a4);
        let w1 = &a6 * C64::new(b[13], 0.0) + &a4 * C64::new(b[11], 0.0) + &a2 * C64::new(b[9], 0.0);
        let w2 = matmul(&w1, &a6)
            + &a6 * C64::new(b[7], 0.0)
            + &a4 * C64::new(b[5], 0.0)
            + &a2 * C64::new(b[3], 0.0)
            + &eye * C64::new(b[1], 0.0);
        let u = matmul(&a_s, &w2);
        let v1 =
            &a6 * C64::new(b[12], 0.0) + &a4 * C64::new(b[10], 0.0) + &a2 * C64::new(b[8], 0.0);
        let v = matmul(&v1, &a6)
            + &a6 * C64::new(b[6], 0.0)
            + &a4 * C64::new(b[4], 0.0)
            + &a2 * C64::new(b[2], 0.0)
            + &eye * C64::new(b[0], 0.0);
        (u, v)
    } else {
        // Even powers A², A⁴, …; U = A·(Σ b_{2k+1} A^{2k}), V = Σ b_{2k} A^{2k}.
        let mut powers = vec![eye.clone(), a2.clone()];
        while powers.len() <= order / 2 {
            let next = matmul(powers.last().unwrap(), &a2);
            powers.push(next);
        }
        let mut u_poly: Array2<C64> = Array2::zeros((n, n));
        let mut v: Array2<C64> = Array2::zeros((n, n));
        for k in 0..=order / 2 {
            u_poly = u_poly + &powers[k] * C64::new(b[2 * k + 1], 0.0);
            v = v + &powers[k] * C64::new(b[2 * k], 0.0);
        }
        (matmul(&a_s, &u_poly), v)
    };

    let p = &v + &u;
    let q = &v - &u;
    let lu = lu_factor(&q)?;
    let mut f = lu.solve_matrix(&p);
    for _ in 0..squarings {
        f = matmul(&f, &f);
    }
    Ok(f)
}

/// exp(A) for a small real matrix (delegates to the complex kernel).
pub fn expm_real(a: &Array2<f64>) -> Result<Array2<f64>> {
    let ac = a.mapv(|x| C64::new(x, 0.0));
    Ok(expm(&ac)?.mapv(|z| z.re))
}

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a real
/// symmetric matrix, by cyclic Jacobi rotations.
pub fn sym_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "symmetric eigensolver needs a square matrix");
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let off = |m: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let scale: f64 = (0..n).map(|i| m[(i, i)].abs()).fold(one_norm_real(&m), f64::max);
    let tol = 1e-15 * scale.max(1e-300);
    for _sweep in 0..60 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new)] = v[(r, old)];
        }
    }
    (eigenvalues, vectors)
}

fn one_norm_real(a: &Array2<f64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        best = best.max(col.iter().map(|x| x.abs()).sum());
    }
    best
}

/// Determinant of a small real matrix by Gaussian elimination.
pub fn det_small(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.to_owned();
    let mut det = 1.0;
    for j in 0..n {
        let mut p = j;
        for i in j + 1..n {
            if m[(i, j)].abs() > m[(p, j)].abs() {
                p = i;
            }
        }
        if m[(p, j)] == 0.0 {
            return 0.0;
        }
        if p != j {
            det = -det;
            for c in 0..n {
                m.swap((j, c), (p, c));
            }
        }
        det *= m[(j, j)];
        for i in j + 1..n {
            let f = m[(i, j)] / m[(j, j)];
            for c in j..n {
                let v = m[(j, c)];
                m[(i, c)] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_against_hand_product() {
        let a = array![[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, -1.0), c(1.0, 0.0)]];
        let b = array![[c(3.0, 0.0), c(0.0, 1.0)], [c(1.0, 0.0), c(1.0, 1.0)]];
        let p = matmul(&a, &b);
        assert!((p[(0, 0)] - c(5.0, 3.0)).norm() < 1e-14);
        assert!((p[(0, 1)] - c(1.0, 3.0)).norm() < 1e-14);
        assert!((p[(1, 0)] - c(1.0, -3.0)).norm() < 1e-14);
        assert!((p[(1, 1)] - c(2.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn lu_solve_recovers_random_system() {
        let n = 97;
        // Deterministic pseudo-random fill.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Array2::from_shape_fn((n, n), |_| c(next(), next()));
        let x_true = Array2::from_shape_fn((n, 3), |_| c(next(), next()));
        let b = matmul(&a, &x_true);
        let x = lu_factor(&a).unwrap().solve_matrix(&b);
        let err = (&x - &x_true).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-10, "solve error {err}");
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = Array2::<C64>::zeros((5, 5));
        let e = expm(&z).unwrap();
        let err = (&e - &identity(5)).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn expm_diagonal_phases() {
        let n = 6;
        let mut a = Array2::<C64>::zeros((n, n));
        for k in 0..n {
            a[(k, k)] = c(0.0, std::f64::consts::PI * k as f64);
        }
        let e = expm(&a).unwrap();
        for k in 0..n {
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((e[(k, k)] - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_matches_taylor_series_oracle() {
        // Independent series evaluation at very small scaled norm.
        let a = array![
            [c(0.3, 0.2), c(-0.1, 0.4), c(0.05, 0.0)],
            [c(0.0, -0.3), c(0.2, 0.1), c(0.7, -0.2)],
            [c(0.1, 0.0), c(-0.4, -0.1), c(-0.2, 0.3)]
        ];
        let mut series = identity(3);
        let mut term = identity(3);
        for k in 1..60 {
            term = matmul(&term, &a).mapv(|z| z / k as f64);
            series = series + &term;
        }
        let e = expm(&a).unwrap();
        let err = (&e - &series).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-12, "expm vs series: {err}");
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        let a = array![[c(0.0, 42.0)]];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - C64::new(42.0f64.cos(), 42.0f64.sin())).norm() < 1e-11);
    }

    #[test]
    fn expm_overflow_budget_errors() {
        let a = array![[c(1e30, 0.0)]];
        assert!(matches!(expm(&a), Err(CoreError::ExpOverflow { .. })));
    }

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        let a = array![[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let (vals, vecs) = sym_eigen(&a);
        // Eigenvalues of this tridiagonal: 1, 2, 4.
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 4.0).abs() < 1e-12);
        // Residual ‖A·v − λ·v‖.
        for j in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[(i, k)] * vecs[(k, j)]).sum();
                assert!((av - vals[j] * vecs[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn determinant_of_singular_and_regular() {
        let s = array![[1.0, 2.0], [2.0, 4.0]];
        assert_eq!(det_small(&s), 0.0);
        let r = array![[2.0, 1.0], [1.0, 3.0]];
        assert!((det_small(&r) - 5.0).abs() < 1e-14);
    }
}
