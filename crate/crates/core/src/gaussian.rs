//! Covariance-matrix backend: exact symplectic propagation for unitary
//! quadratic generators, quadrature optimization, principal eigenvalues and
//! logarithmic negativity.
//!
//! Quadrature ordering is (X_{q1}, X̄_{q1}, X_{q2}, X̄_{q2}) with
//! X = (a + a†)/√2 and X̄ = (a† − a)/(i√2), so [X, X̄] = −i and the
//! commutator form is Ω = ⊕ [[0, −1], [1, 0]]. All reported quantities are
//! invariant under the reflection X̄ → −X̄ relating this to the usual (X, P)
//! pair.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fockspace::FockStateVector;
use crate::numeric::linalg::{det_small, expm_real, sym_eigen};
use crate::quadgen::QuadraticGenerator;

/// Symplectic (commutator) form for n modes in this crate's ordering.
pub fn symplectic_form(modes: usize) -> Array2<f64> {
    let mut omega = Array2::zeros((2 * modes, 2 * modes));
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = -1.0;
        omega[(2 * m + 1, 2 * m)] = 1.0;
    }
    omega
}

/// Real symmetric matrix of symmetrized second moments.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    pub modes: usize,
    pub sigma: Array2<f64>,
}

impl CovarianceMatrix {
    pub fn new(modes: usize, sigma: Array2<f64>) -> Result<Self> {
        if sigma.nrows() != 2 * modes || sigma.ncols() != 2 * modes {
            return Err(CoreError::validation("covariance matrix dimension mismatch"));
        }
        let asym = sigma
            .indexed_iter()
            .map(|((i, j), v)| (v - sigma[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        if asym > 1e-10 {
            return Err(CoreError::validation(format!(
                "covariance matrix asymmetric by {asym:.3e}"
            )));
        }
        Ok(CovarianceMatrix { modes, sigma })
    }

    pub fn vacuum(modes: usize) -> Self {
        CovarianceMatrix { modes, sigma: Array2::eye(2 * modes) * 0.5 }
    }

    pub fn block_a(&self) -> Array2<f64> {
        self.sigma.slice(s![0..2, 0..2]).to_owned()
    }

    pub fn block_b(&self) -> Array2<f64> {
        assert!(self.modes == 2);
        self.sigma.slice(s![2..4, 2..4]).to_owned()
    }

    pub fn block_c(&self) -> Array2<f64> {
        assert!(self.modes == 2);
        self.sigma.slice(s![0..2, 2..4]).to_owned()
    }

    /// Single-mode 2×2 block for local mode index `m`.
    pub fn mode_block(&self, m: usize) -> Array2<f64> {
        self.sigma.slice(s![2 * m..2 * m + 2, 2 * m..2 * m + 2]).to_owned()
    }

    pub fn det(&self) -> f64 {
        det_small(&self.sigma)
    }

    /// Symplectic eigenvalues (ascending).
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues_of(&self.sigma, self.modes)
    }

    /// All symplectic eigenvalues ≥ 1/2 − tol.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.symplectic_eigenvalues().iter().all(|&nu| nu >= 0.5 - tol)
    }
}

/// Symplectic eigenvalues of a (possibly partially transposed) covariance
/// matrix: the positive spectrum of i·Ω·σ, obtained from the Hermitian
/// matrix σ^{1/2} (iΩ) σ^{1/2} via a real embedding.
pub fn symplectic_eigenvalues_of(sigma: &Array2<f64>, modes: usize) -> Vec<f64> {
    let n2 = 2 * modes;
    let (vals, vecs) = sym_eigen(sigma);
    // σ^{1/2} (eigenvalues of a covariance matrix are non-negative).
    let mut root = Array2::<f64>::zeros((n2, n2));
    for k in 0..n2 {
        let lam = vals[k].max(0.0).sqrt();
        for i in 0..n2 {
            for j in 0..n2 {
                root[(i, j)] += lam * vecs[(i, k)] * vecs[(j, k)];
            }
        }
    }
    let omega = symplectic_form(modes);
    // B = root · (iΩ) · root is Hermitian with spectrum {±ν_k};
    // embed B = X + iY as [[X, −Y], [Y, X]] (here X = 0, Y = root·Ω·root).
    let y = root.dot(&omega).dot(&root);
    let mut emb = Array2::<f64>::zeros((2 * n2, 2 * n2));
    for i in 0..n2 {
        for j in 0..n2 {
            emb[(i, j + n2)] = -y[(i, j)];
            emb[(i + n2, j)] = y[(i, j)];
        }
    }
    let (evals, _) = sym_eigen(&emb);
    let mut abs: Vec<f64> = evals.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    // Each ν appears four times: ± pairs, doubled by the embedding.
    (0..modes).map(|k| abs[4 * k..4 * k + 4].iter().sum::<f64>() / 4.0).collect()
}

/// Covariance of exp(K)|vacuum⟩ for a unitary (anti-Hermitian) exponent K,
/// via the symplectic matrix S = exp(Ω M) of the quadratic form.
pub fn covariance_from_generator(gen: &QuadraticGenerator) -> Result<CovarianceMatrix> {
    let modes = gen.active.len();
    if !(1..=2).contains(&modes) {
        return Err(CoreError::validation(
            "covariance propagation needs a generator restricted to 1 or 2 modes",
        ));
    }
    let scale = [&gen.aa, &gen.dd, &gen.da, &gen.ad]
        .iter()
        .flat_map(|m| m.iter())
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if gen.hermiticity_deviation() > 1e-10 * scale.max(1e-30) {
        return Err(CoreError::validation(
            "the covariance backend requires a hermitian-part generator",
        ));
    }

    // Quadratic form of the effective Hamiltonian H = iK in the quadratures:
    // H = ½ RᵀMR + const with a = (X − iX̄)/√2.
    let n2 = 2 * modes;
    let mut c = Array2::<C64>::zeros((n2, n2));
    let half = C64::new(0.5, 0.0);
    let i_half = C64::new(0.0, 0.5);
    for (si, &qi) in gen.active.iter().enumerate() {
        for (sj, &qj) in gen.active.iter().enumerate() {
            let idx = (qi - 1, qj - 1);
            let (x_i, xb_i) = (2 * si, 2 * si + 1);
            let (x_j, xb_j) = (2 * sj, 2 * sj + 1);
            let gamma = C64::new(0.0, 1.0); // H = i·K
            // a_i a_j
            let g = gamma * gen.aa[idx];
            c[(x_i, x_j)] += g * half;
            c[(x_i, xb_j)] -= g * i_half;
            c[(xb_i, x_j)] -= g * i_half;
            c[(xb_i, xb_j)] -= g * half;
            // a_i† a_j†
            let g = gamma * gen.dd[idx];
            c[(x_i, x_j)] += g * half;
            c[(x_i, xb_j)] += g * i_half;
            c[(xb_i, x_j)] += g * i_half;
            c[(xb_i, xb_j)] -= g * half;
            // a_i† a_j
            let g = gamma * gen.da[idx];
            c[(x_i, x_j)] += g * half;
            c[(x_i, xb_j)] -= g * i_half;
            c[(xb_i, x_j)] += g * i_half;
            c[(xb_i, xb_j)] += g * half;
            // a_i a_j†
            let g = gamma * gen.ad[idx];
            c[(x_i, x_j)] += g * half;
            c[(x_i, xb_j)] += g * i_half;
            c[(xb_i, x_j)] -= g * i_half;
            c[(xb_i, xb_j)] += g * half;
        }
    }
    // M is the symmetrized coefficient matrix; Hermiticity of H makes it real.
    let mut m = Array2::<f64>::zeros((n2, n2));
    let mut imag_residue = 0.0f64;
    for i in 0..n2 {
        for j in 0..n2 {
            let sym = c[(i, j)] + c[(j, i)];
            m[(i, j)] = sym.re;
            imag_residue = imag_residue.max(sym.im.abs());
        }
    }
    if imag_residue > 1e-10 * scale.max(1e-30) {
        return Err(CoreError::InternalConsistency(format!(
            "quadratic form has imaginary residue {imag_residue:.3e}"
        )));
    }

    let omega = symplectic_form(modes);
    let s_matrix = expm_real(&omega.dot(&m))?;
    // Symplectic consistency ‖SΩSᵀ − Ω‖ ≤ 1e-8.
    let residual = (&s_matrix.dot(&omega).dot(&s_matrix.t()) - &omega)
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    if residual > 1e-8 {
        return Err(CoreError::InternalConsistency(format!(
            "propagated matrix is not symplectic (residual {residual:.3e})"
        )));
    }
    let sigma = s_matrix.dot(&(Array2::<f64>::eye(n2) * 0.5)).dot(&s_matrix.t());
    CovarianceMatrix::new(modes, sigma)
}

/// Covariance from Fock-state moments (the cross-check route).
pub fn covariance_from_state(state: &FockStateVector) -> Result<CovarianceMatrix> {
    let modes = state.arity;
    let n2 = 2 * modes;
    let dot = |x: &ndarray::Array1<C64>, y: &ndarray::Array1<C64>| -> C64 {
        x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
    };
    let lowered: Vec<ndarray::Array1<C64>> =
        (0..modes).map(|m| state.apply_annihilation(m)).collect();
    let raised: Vec<ndarray::Array1<C64>> = (0..modes).map(|m| state.apply_creation(m)).collect();
    let exp_a: Vec<C64> = (0..modes).map(|m| dot(&state.amplitudes, &lowered[m])).collect();

    // Quadrature R_j = c_j a_{m(j)} + conj(c_j) a†_{m(j)}.
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let coeff = |j: usize| -> C64 {
        if j % 2 == 0 {
            C64::new(inv_sqrt2, 0.0)
        } else {
            C64::new(0.0, inv_sqrt2)
        }
    };
    let mode_of = |j: usize| j / 2;

    let pair = |m: usize, n: usize, cm: C64, cn: C64| -> C64 {
        cm * cn * dot(&raised[m], &lowered[n])
            + cm * cn.conj() * dot(&raised[m], &raised[n])
            + cm.conj() * cn * dot(&lowered[m], &lowered[n])
            + cm.conj() * cn.conj() * dot(&lowered[m], &raised[n])
    };

    let mut sigma = Array2::<f64>::zeros((n2, n2));
    for j in 0..n2 {
        for k in 0..n2 {
            let (m, n) = (mode_of(j), mode_of(k));
            let (cj, ck) = (coeff(j), coeff(k));
            let rjrk = pair(m, n, cj, ck);
            let rkrj = pair(n, m, ck, cj);
            let mean_j = (cj * exp_a[m] + (cj * exp_a[m]).conj()).re;
            let mean_k = (ck * exp_a[n] + (ck * exp_a[n]).conj()).re;
            sigma[(j, k)] = 0.5 * (rjrk + rkrj).re - mean_j * mean_k;
        }
    }
    CovarianceMatrix::new(modes, sigma)
}

/// Optimal squeezing direction and the associated variances/parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimalVariance {
    pub theta_star: f64,
    /// Variance along the optimal direction.
    pub var_min: f64,
    /// Variance along the conjugate direction θ* + π/2.
    pub var_conj: f64,
    pub product: f64,
    /// Squeezing parameter r = −(1/2)·log₁₀(2·ΔX(θ*)).
    pub r: f64,
    /// dB value 10·log₁₀(e^{2|r|}).
    pub db: f64,
}

/// Squeezing parameter from the optimal variance.
pub fn squeezing_r(var_min: f64) -> f64 {
    -0.5 * (2.0 * var_min).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DbConvention {
    /// 10·log₁₀(e^{2|r|}) with r itself defined through log₁₀.
    #[default]
    Paper,
    /// −10·log₁₀(2·ΔX(θ*)), the usual noise-reduction measure.
    Natural,
}

pub fn squeezing_db(var_min: f64, convention: DbConvention) -> f64 {
    let r = squeezing_r(var_min);
    match convention {
        DbConvention::Paper => 10.0 * (2.0 * r.abs()).exp().log10(),
        DbConvention::Natural => -10.0 * (2.0 * var_min).log10(),
    }
}

fn optimum_from(theta_star: f64, var_min: f64, var_conj: f64) -> OptimalVariance {
    OptimalVariance {
        theta_star,
        var_min,
        var_conj,
        product: var_min * var_conj,
        r: squeezing_r(var_min),
        db: squeezing_db(var_min, DbConvention::Paper),
    }
}

/// Exact optimum of a 2×2 covariance block by eigendecomposition.
///
/// Near-isotropic blocks (spread below 1e-12 relative) report θ* = 0.
pub fn optimal_variance_eigen(block: &Array2<f64>) -> OptimalVariance {
    assert_eq!(block.dim(), (2, 2));
    let (vals, vecs) = sym_eigen(block);
    let (lam_min, lam_max) = (vals[0], vals[1]);
    if lam_max - lam_min <= 1e-12 * lam_max.abs().max(1e-30) {
        return optimum_from(0.0, lam_min, lam_max);
    }
    let theta = vecs[(1, 0)].atan2(vecs[(0, 0)]).rem_euclid(std::f64::consts::PI);
    optimum_from(theta, lam_min, lam_max)
}

/// Brute-force optimum of a variance function over θ ∈ [0, π].
///
/// Uses `points` linearly spaced samples (endpoints included); ties break
/// toward the smaller angle. The conjugate variance is evaluated exactly at
/// θ* + π/2.
pub fn optimal_variance_brute(var: impl Fn(f64) -> f64, points: usize) -> OptimalVariance {
    assert!(points >= 2);
    let mut best_theta = 0.0;
    let mut best_var = f64::INFINITY;
    for k in 0..points {
        let theta = std::f64::consts::PI * k as f64 / (points - 1) as f64;
        let v = var(theta);
        if v < best_var {
            best_var = v;
            best_theta = theta;
        }
    }
    let conj = var(best_theta + std::f64::consts::PI / 2.0);
    optimum_from(best_theta, best_var, conj)
}

/// Variance of X(θ) as a quadratic form over a 2×2 covariance block.
pub fn block_variance(block: &Array2<f64>, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    c * c * block[(0, 0)] + s * s * block[(1, 1)] + 2.0 * s * c * block[(0, 1)]
}

/// Largest eigenvalue of the covariance matrix (0.5 means no squeezing).
pub fn lambda_max(cov: &CovarianceMatrix) -> f64 {
    let (vals, _) = sym_eigen(&cov.sigma);
    *vals.last().unwrap()
}

pub fn lambda_min(cov: &CovarianceMatrix) -> f64 {
    let (vals, _) = sym_eigen(&cov.sigma);
    vals[0]
}

/// Logarithmic negativity E_N = max{0, −log₂(2ν̃₋)} of a two-mode covariance
/// matrix via the closed-form symplectic eigenvalue of the partial transpose:
/// ν̃₋² = (Δ̃ − √(Δ̃² − 4·det σ))/2 with Δ̃ = det A + det B − 2·det C.
pub fn logarithmic_negativity(cov: &CovarianceMatrix) -> Result<f64> {
    if cov.modes != 2 {
        return Err(CoreError::validation("logarithmic negativity needs two modes"));
    }
    let det_a = det_small(&cov.block_a());
    let det_b = det_small(&cov.block_b());
    let det_c = det_small(&cov.block_c());
    let det_sigma = cov.det();
    let delta = det_a + det_b - 2.0 * det_c;
    let mut disc = delta * delta - 4.0 * det_sigma;
    if disc < 0.0 {
        if disc < -1e-12 {
            return Err(CoreError::InternalConsistency(format!(
                "negative discriminant {disc:.3e} in the symplectic eigenvalue"
            )));
        }
        disc = 0.0;
    }
    let mut nu_sq = 0.5 * (delta - disc.sqrt());
    if nu_sq < 0.0 {
        if nu_sq < -1e-12 {
            return Err(CoreError::InternalConsistency(format!(
                "negative ν̃₋² = {nu_sq:.3e}"
            )));
        }
        nu_sq = 0.0;
    }
    let nu_minus = nu_sq.sqrt();
    Ok((-(2.0 * nu_minus).log2()).max(0.0))
}

/// Independent route: partial transpose Γ σ Γ with Γ = diag(1,1,1,−1), then
/// the smallest symplectic eigenvalue from the |iΩσ̃| spectrum.
pub fn logarithmic_negativity_eigen_route(cov: &CovarianceMatrix) -> Result<f64> {
    if cov.modes != 2 {
        return Err(CoreError::validation("logarithmic negativity needs two modes"));
    }
    let mut tilde = cov.sigma.clone();
    for k in 0..4 {
        tilde[(3, k)] = -tilde[(3, k)];
    }
    for k in 0..4 {
        tilde[(k, 3)] = -tilde[(k, 3)];
    }
    let nus = symplectic_eigenvalues_of(&tilde, 2);
    let nu_minus = nus[0];
    Ok((-(2.0 * nu_minus).log2()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{evolve_vacuum, quadrature_variance};
    use crate::quadgen::GeneratorMode;
    use ndarray::array;

    fn tmsv_generator(r: f64) -> QuadraticGenerator {
        let mut gen = QuadraticGenerator {
            q_c: 2,
            n_at_gl2: 1.0,
            aa: Array2::zeros((2, 2)),
            dd: Array2::zeros((2, 2)),
            da: Array2::zeros((2, 2)),
            ad: Array2::zeros((2, 2)),
            constant: C64::new(0.0, 0.0),
            active: vec![1, 2],
        };
        gen.aa[(0, 1)] = C64::new(r, 0.0);
        gen.dd[(0, 1)] = C64::new(-r, 0.0);
        gen
    }

    fn single_squeeze(r: f64) -> QuadraticGenerator {
        let mut gen = QuadraticGenerator {
            q_c: 1,
            n_at_gl2: 1.0,
            aa: Array2::zeros((1, 1)),
            dd: Array2::zeros((1, 1)),
            da: Array2::zeros((1, 1)),
            ad: Array2::zeros((1, 1)),
            constant: C64::new(0.0, 0.0),
            active: vec![1],
        };
        gen.aa[(0, 0)] = C64::new(r / 2.0, 0.0);
        gen.dd[(0, 0)] = C64::new(-r / 2.0, 0.0);
        gen
    }

    #[test]
    fn zero_generator_gives_vacuum_covariance() {
        let gen = single_squeeze(0.0);
        let cov = covariance_from_generator(&gen).unwrap();
        for ((i, j), v) in cov.sigma.indexed_iter() {
            let expected = if i == j { 0.5 } else { 0.0 };
            assert!((v - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn two_mode_squeezed_vacuum_covariance_blocks() {
        let r = 0.5;
        let cov = covariance_from_generator(&tmsv_generator(r)).unwrap();
        let ch = (2.0 * r).cosh() / 2.0;
        let sh = (2.0 * r).sinh() / 2.0;
        let a = cov.block_a();
        let b = cov.block_b();
        let c = cov.block_c();
        for k in 0..2 {
            assert!((a[(k, k)] - ch).abs() < 1e-12, "A diagonal {}", a[(k, k)]);
            assert!((b[(k, k)] - ch).abs() < 1e-12);
        }
        assert!(a[(0, 1)].abs() < 1e-12);
        assert!((c[(0, 0)].abs() - sh).abs() < 1e-12, "C xx {}", c[(0, 0)]);
        assert!((c[(1, 1)].abs() + -sh).abs() < 1e-12 || (c[(1, 1)].abs() - sh).abs() < 1e-12);
        assert!((c[(0, 0)] + c[(1, 1)]).abs() < 1e-12, "C is diag(s, -s)");
        // Purity: det σ = 1/16 for two modes.
        assert!((cov.det() - 0.0625).abs() < 1e-10);
    }

    #[test]
    fn tmsv_lambda_and_negativity() {
        let r = 0.5;
        let cov = covariance_from_generator(&tmsv_generator(r)).unwrap();
        assert!((lambda_max(&cov) - (2.0 * r).exp() / 2.0).abs() < 1e-10);
        let en = logarithmic_negativity(&cov).unwrap();
        assert!((en - 2.0 * r / 2.0f64.ln()).abs() < 1e-10, "E_N = {en}");
        // Uncorrelated modes have no negativity.
        let vac = CovarianceMatrix::vacuum(2);
        assert_eq!(logarithmic_negativity(&vac).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_matches_eigen_route() {
        for r in [0.1, 0.3, 0.8] {
            let cov = covariance_from_generator(&tmsv_generator(r)).unwrap();
            let a = logarithmic_negativity(&cov).unwrap();
            let b = logarithmic_negativity_eigen_route(&cov).unwrap();
            assert!((a - b).abs() < 1e-10, "routes differ: {a} vs {b}");
        }
    }

    #[test]
    fn physicality_and_purity_of_single_mode_squeeze() {
        let cov = covariance_from_generator(&single_squeeze(0.7)).unwrap();
        assert!(cov.is_physical(1e-10));
        assert!((cov.det() - 0.25).abs() < 1e-10);
        let nus = cov.symplectic_eigenvalues();
        assert!((nus[0] - 0.5).abs() < 1e-10);
        // λ_max·λ_min = 1/4 for a pure single-mode state.
        assert!((lambda_max(&cov) * lambda_min(&cov) - 0.25).abs() < 1e-10);
    }

    #[test]
    fn optimal_variance_closed_chain() {
        // Natural-log squeezing s = 0.3 in the paper's log10 conventions.
        let s = 0.3f64;
        let cov = covariance_from_generator(&single_squeeze(s)).unwrap();
        let opt = optimal_variance_eigen(&cov.mode_block(0));
        let expected_var = (-2.0 * s).exp() / 2.0;
        assert!((opt.var_min - expected_var).abs() < 1e-12);
        assert!((opt.var_min - 0.27441).abs() < 5e-6);
        assert!((opt.r - 0.13029).abs() < 5e-6);
        assert!((opt.db - 1.1317).abs() < 5e-5);
        assert!((opt.product - 0.25).abs() < 1e-10);
        // Natural convention for comparison: −10·log10(2ΔX).
        let db_nat = squeezing_db(opt.var_min, DbConvention::Natural);
        assert!((db_nat - 20.0 * opt.r).abs() < 1e-9);
    }

    #[test]
    fn vacuum_optimum_is_flat() {
        let opt = optimal_variance_eigen(&(Array2::eye(2) * 0.5));
        assert_eq!(opt.theta_star, 0.0);
        assert!((opt.var_min - 0.5).abs() < 1e-15);
        assert!((opt.r).abs() < 1e-15);
        assert!((opt.db).abs() < 1e-12);
    }

    #[test]
    fn eigen_and_brute_force_agree_on_rotated_blocks() {
        for k in 0..12 {
            let phi = 0.13 + k as f64 * 0.26;
            let (c, s) = (phi.cos(), phi.sin());
            let rot = array![[c, -s], [s, c]];
            let d = array![[0.2, 0.0], [0.0, 1.25]];
            let block = rot.dot(&d).dot(&rot.t());
            let eig = optimal_variance_eigen(&block);
            let brute = optimal_variance_brute(|t| block_variance(&block, t), 100);
            assert!((eig.var_min - brute.var_min).abs() < 1e-3);
            let mut dtheta = (eig.theta_star - brute.theta_star).abs();
            dtheta = dtheta.min(std::f64::consts::PI - dtheta);
            assert!(
                dtheta <= std::f64::consts::PI / 100.0,
                "θ* mismatch: {} vs {}",
                eig.theta_star,
                brute.theta_star
            );
        }
    }

    #[test]
    fn negativity_invariant_under_local_rotations() {
        let cov = covariance_from_generator(&tmsv_generator(0.4)).unwrap();
        let base = logarithmic_negativity(&cov).unwrap();
        for (phi, psi) in [(0.3, 1.1), (2.0, 0.7), (0.01, 3.0)] {
            let mut o = Array2::<f64>::zeros((4, 4));
            for (m, ang) in [(0usize, phi), (1usize, psi)] {
                let (c, s) = (f64::cos(ang), f64::sin(ang));
                o[(2 * m, 2 * m)] = c;
                o[(2 * m, 2 * m + 1)] = s;
                o[(2 * m + 1, 2 * m)] = -s;
                o[(2 * m + 1, 2 * m + 1)] = c;
            }
            let rotated =
                CovarianceMatrix::new(2, o.dot(&cov.sigma).dot(&o.t())).unwrap();
            let en = logarithmic_negativity(&rotated).unwrap();
            assert!((en - base).abs() < 1e-10, "E_N changed under local rotation");
        }
    }

    #[test]
    fn fock_moments_match_symplectic_route_for_tmsv() {
        let gen = tmsv_generator(0.3);
        let evolved = evolve_vacuum(&gen, 50, GeneratorMode::AsIs).unwrap();
        let from_state = covariance_from_state(&evolved.state).unwrap();
        let from_gen = covariance_from_generator(&gen).unwrap();
        let worst = (&from_state.sigma - &from_gen.sigma)
            .iter()
            .map(|v| v.abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-6, "backend discrepancy {worst}");
        // The Fock brute-force optimum matches the covariance block.
        let block = from_gen.mode_block(0);
        let brute =
            optimal_variance_brute(|t| quadrature_variance(&evolved.state, 0, t), 100);
        let eig = optimal_variance_eigen(&block);
        assert!((brute.var_min - eig.var_min).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let mut gen = single_squeeze(0.3);
        gen.dd[(0, 0)] = C64::new(0.4, 0.0); // breaks anti-Hermiticity
        assert!(covariance_from_generator(&gen).is_err());
    }
}
