//! Truncated-Fock-space backend: ladder operators, operator exponentials,
//! vacuum evolution under quadratic generators, quadrature statistics,
//! heralding projections, partial traces and Wigner functions.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::numeric::linalg::{self, adjoint, expm, matmul};
use crate::quadgen::{GeneratorMode, QuadraticGenerator};

/// Default per-mode Fock cutoff (levels 0..=50, a 51-dimensional mode space).
pub const DEFAULT_CUTOFF: usize = 50;

/// Top-level population above this is reported as a truncation warning …
pub const TRUNCATION_WARN: f64 = 1e-6;
/// … and above this it becomes a hard error.
pub const TRUNCATION_ERROR: f64 = 1e-3;

/// Dense operator on 1 or 2 truncated modes.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub n_cutoff: usize,
    pub arity: usize,
    pub matrix: Array2<C64>,
}

impl TruncatedOperator {
    pub fn new(n_cutoff: usize, arity: usize, matrix: Array2<C64>) -> Self {
        let dim = (n_cutoff + 1).pow(arity as u32);
        assert_eq!(matrix.nrows(), dim);
        assert_eq!(matrix.ncols(), dim);
        TruncatedOperator { n_cutoff, arity, matrix }
    }
}

/// Annihilation operator: √n on the superdiagonal.
pub fn annihilation(n_cutoff: usize) -> Array2<C64> {
    let dim = n_cutoff + 1;
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(n_cutoff: usize) -> Array2<C64> {
    adjoint(&annihilation(n_cutoff))
}

/// Parity (-1)^n as a diagonal vector.
pub fn parity_diagonal(n_cutoff: usize) -> Vec<f64> {
    (0..=n_cutoff).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Per-mode (annihilation, creation) pairs embedded in the joint space.
pub fn build_ladder(arity: usize, n_cutoff: usize) -> Result<Vec<(Array2<C64>, Array2<C64>)>> {
    if n_cutoff < 2 {
        return Err(CoreError::validation(format!(
            "Fock cutoff must be at least 2, got {n_cutoff}"
        )));
    }
    if !(1..=2).contains(&arity) {
        return Err(CoreError::validation(format!(
            "joint Fock spaces support 1 or 2 modes, got {arity}"
        )));
    }
    let a = annihilation(n_cutoff);
    let id = linalg::identity(n_cutoff + 1);
    let mut out = Vec::with_capacity(arity);
    for slot in 0..arity {
        let low = if arity == 1 {
            a.clone()
        } else if slot == 0 {
            ndarray::linalg::kron(&a, &id)
        } else {
            ndarray::linalg::kron(&id, &a)
        };
        let high = adjoint(&low);
        out.push((low, high));
    }
    Ok(out)
}

/// exp(M) in the truncated space by scaling-and-squaring.
pub fn op_exponential(m: &Array2<C64>) -> Result<Array2<C64>> {
    expm(m)
}

/// Displacement operator D(α) = exp(α a† − α* a) in the truncated space.
pub fn displacement(alpha: C64, n_cutoff: usize) -> Result<Array2<C64>> {
    let dim = n_cutoff + 1;
    let mut gen = Array2::zeros((dim, dim));
    for n in 1..dim {
        let root = C64::new((n as f64).sqrt(), 0.0);
        gen[(n, n - 1)] = alpha * root; // α a†
        gen[(n - 1, n)] = -alpha.conj() * root; // -α* a
    }
    op_exponential(&gen)
}

/// Pure state on 1 or 2 truncated modes; two-mode layout is n1·(nc+1) + n2.
#[derive(Debug, Clone)]
pub struct FockStateVector {
    pub n_cutoff: usize,
    pub arity: usize,
    pub amplitudes: Array1<C64>,
}

impl FockStateVector {
    pub fn vacuum(arity: usize, n_cutoff: usize) -> Self {
        let dim = (n_cutoff + 1).pow(arity as u32);
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[0] = C64::new(1.0, 0.0);
        FockStateVector { n_cutoff, arity, amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn mode_dim(&self) -> usize {
        self.n_cutoff + 1
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply the annihilation operator of one mode slot.
    pub fn apply_annihilation(&self, slot: usize) -> Array1<C64> {
        let d = self.mode_dim();
        let mut out = Array1::zeros(self.dim());
        match (self.arity, slot) {
            (1, 0) => {
                for n in 1..d {
                    out[n - 1] = (n as f64).sqrt() * self.amplitudes[n];
                }
            }
            (2, 0) => {
                for n1 in 1..d {
                    let r = (n1 as f64).sqrt();
                    for n2 in 0..d {
                        out[(n1 - 1) * d + n2] = r * self.amplitudes[n1 * d + n2];
                    }
                }
            }
            (2, 1) => {
                for n1 in 0..d {
                    for n2 in 1..d {
                        out[n1 * d + n2 - 1] = (n2 as f64).sqrt() * self.amplitudes[n1 * d + n2];
                    }
                }
            }
            _ => panic!("mode slot {slot} out of range for arity {}", self.arity),
        }
        out
    }

    /// Apply the creation operator of one mode slot (truncated at the top).
    pub fn apply_creation(&self, slot: usize) -> Array1<C64> {
        let d = self.mode_dim();
        let mut out = Array1::zeros(self.dim());
        match (self.arity, slot) {
            (1, 0) => {
                for n in 0..d - 1 {
                    out[n + 1] = ((n + 1) as f64).sqrt() * self.amplitudes[n];
                }
            }
            (2, 0) => {
                for n1 in 0..d - 1 {
                    let r = ((n1 + 1) as f64).sqrt();
                    for n2 in 0..d {
                        out[(n1 + 1) * d + n2] = r * self.amplitudes[n1 * d + n2];
                    }
                }
            }
            (2, 1) => {
                for n1 in 0..d {
                    for n2 in 0..d - 1 {
                        out[n1 * d + n2 + 1] =
                            ((n2 + 1) as f64).sqrt() * self.amplitudes[n1 * d + n2];
                    }
                }
            }
            _ => panic!("mode slot {slot} out of range for arity {}", self.arity),
        }
        out
    }

    /// Probability mass sitting at the top Fock level of any mode.
    pub fn top_level_population(&self) -> f64 {
        let d = self.mode_dim();
        match self.arity {
            1 => self.amplitudes[d - 1].norm_sqr(),
            2 => {
                let mut p = 0.0;
                for n2 in 0..d {
                    p += self.amplitudes[(d - 1) * d + n2].norm_sqr();
                }
                for n1 in 0..d - 1 {
                    p += self.amplitudes[n1 * d + d - 1].norm_sqr();
                }
                p
            }
            _ => unreachable!(),
        }
    }
}

fn inner(x: &Array1<C64>, y: &Array1<C64>) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Exponent matrix Σ aa·a a + dd·a†a† + da·a†a + ad·a a† + c·1 on the
/// active modes of the generator.
pub fn generator_matrix(gen: &QuadraticGenerator, n_cutoff: usize) -> Result<Array2<C64>> {
    let arity = gen.active.len();
    if !(1..=2).contains(&arity) {
        return Err(CoreError::validation(format!(
            "Fock evolution needs a generator restricted to 1 or 2 modes, got {arity}"
        )));
    }
    let ladders = build_ladder(arity, n_cutoff)?;
    let dim = (n_cutoff + 1).pow(arity as u32);
    let mut m: Array2<C64> = &linalg::identity(dim) * gen.constant;
    for (si, &qi) in gen.active.iter().enumerate() {
        for (sj, &qj) in gen.active.iter().enumerate() {
            let (ref a_i, ref ad_i) = ladders[si];
            let (ref a_j, ref ad_j) = ladders[sj];
            let idx = (qi - 1, qj - 1);
            let terms = [
                (gen.aa[idx], a_i, a_j),
                (gen.dd[idx], ad_i, ad_j),
                (gen.da[idx], ad_i, a_j),
                (gen.ad[idx], a_i, ad_j),
            ];
            for (coeff, left, right) in terms {
                if coeff != C64::new(0.0, 0.0) {
                    m = m + &matmul(left, right).mapv(|z| z * coeff);
                }
            }
        }
    }
    Ok(m)
}

/// Result of evolving the vacuum under a quadratic generator.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub state: FockStateVector,
    /// Norm of exp(K)|0⟩ before renormalization; its square's deficit from 1
    /// is the leading-order population leaked to the ground branch.
    pub pre_norm: f64,
    pub top_population: f64,
}

/// Build the exponent from the generator, exponentiate, apply to the vacuum
/// and renormalize.
pub fn evolve_vacuum(
    gen: &QuadraticGenerator,
    n_cutoff: usize,
    mode: GeneratorMode,
) -> Result<EvolvedState> {
    let g = gen.apply_mode(mode);
    let m = generator_matrix(&g, n_cutoff)?;
    let u = op_exponential(&m)?;
    let arity = g.active.len();
    let mut state = FockStateVector::vacuum(arity, n_cutoff);
    state.amplitudes.assign(&u.column(0));
    let pre_norm = state.norm();
    if pre_norm < 1e-300 {
        return Err(CoreError::InternalConsistency(
            "evolved vacuum has vanishing norm".to_string(),
        ));
    }
    state.amplitudes.mapv_inplace(|z| z / pre_norm);
    let top_population = state.top_level_population();
    if top_population > TRUNCATION_ERROR {
        return Err(CoreError::Truncation { population: top_population, limit: TRUNCATION_ERROR });
    }
    if top_population > TRUNCATION_WARN {
        log::warn!(
            "top Fock level holds population {top_population:.3e}; results may be \
             truncation-limited (n_cutoff = {n_cutoff})"
        );
    }
    Ok(EvolvedState { state, pre_norm, top_population })
}

/// Variance of X(θ) = X cosθ + X̄ sinθ = (e^{iθ} a + e^{-iθ} a†)/√2.
pub fn quadrature_variance(state: &FockStateVector, slot: usize, theta: f64) -> f64 {
    let u = state.apply_annihilation(slot);
    let w = state.apply_creation(slot);
    let phase = C64::new(0.0, theta).exp();
    let exp_a = inner(&state.amplitudes, &u);
    let exp_aa = inner(&w, &u); // ⟨a a⟩
    let exp_ada = inner(&u, &u); // ⟨a† a⟩
    let exp_aad = inner(&w, &w); // ⟨a a†⟩
    let mean = (phase * exp_a + (phase * exp_a).conj()) / C64::new(2.0f64.sqrt(), 0.0);
    let second = 0.5
        * ((phase * phase * exp_aa + (phase * phase * exp_aa).conj()).re + exp_ada.re
            + exp_aad.re);
    second - mean.re * mean.re
}

/// Density operator on a single truncated mode.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub n_cutoff: usize,
    pub rho: Array2<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity and unit trace to 1e-10.
    pub fn new(n_cutoff: usize, rho: Array2<C64>) -> Result<Self> {
        let dim = n_cutoff + 1;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(CoreError::validation("density matrix dimension mismatch"));
        }
        let trace: C64 = (0..dim).map(|k| rho[(k, k)]).sum();
        if (trace - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(CoreError::validation(format!(
                "density matrix trace {} must be 1",
                trace
            )));
        }
        let herm_dev = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| (rho[(i, j)] - rho[(j, i)].conj()).norm())
            .fold(0.0f64, f64::max);
        if herm_dev > 1e-10 {
            return Err(CoreError::validation(format!(
                "density matrix violates Hermiticity by {herm_dev:.3e}"
            )));
        }
        Ok(DensityOperator { n_cutoff, rho })
    }

    pub fn from_pure(state: &FockStateVector) -> Result<Self> {
        assert_eq!(state.arity, 1, "density from pure state needs a single mode");
        let dim = state.mode_dim();
        let mut rho = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] = state.amplitudes[i] * state.amplitudes[j].conj();
            }
        }
        DensityOperator::new(state.n_cutoff, rho)
    }

    /// Smallest eigenvalue (positivity check; within -1e-10 passes).
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.n_cutoff + 1;
        // Hermitian → real symmetric embedding [[Re, -Im], [Im, Re]].
        let mut emb = Array2::<f64>::zeros((2 * dim, 2 * dim));
        for i in 0..dim {
            for j in 0..dim {
                let z = self.rho[(i, j)];
                emb[(i, j)] = z.re;
                emb[(i, j + dim)] = -z.im;
                emb[(i + dim, j)] = z.im;
                emb[(i + dim, j + dim)] = z.re;
            }
        }
        let (vals, _) = linalg::sym_eigen(&emb);
        vals[0]
    }
}

/// Herald (at least one photon in `herald_slot`) and trace that mode out.
///
/// Returns the normalized kept-mode density operator and the success
/// probability P = 1 − (marginal weight of the herald-mode vacuum slice).
pub fn partial_trace_herald(
    state: &FockStateVector,
    herald_slot: usize,
) -> Result<(DensityOperator, f64)> {
    assert_eq!(state.arity, 2, "heralding needs a two-mode state");
    assert!(herald_slot < 2, "herald slot must be 0 or 1");
    let d = state.mode_dim();
    let mut rho: Array2<C64> = Array2::zeros((d, d));
    let mut p_success = 0.0;
    // Σ_{n_h > 0} |v_{n_h}⟩⟨v_{n_h}| where v_{n_h} is the kept-mode slice.
    for nh in 1..d {
        let slice: Vec<C64> = (0..d)
            .map(|nk| {
                if herald_slot == 1 {
                    state.amplitudes[nk * d + nh]
                } else {
                    state.amplitudes[nh * d + nk]
                }
            })
            .collect();
        let weight: f64 = slice.iter().map(|z| z.norm_sqr()).sum();
        p_success += weight;
        for i in 0..d {
            for j in 0..d {
                rho[(i, j)] += slice[i] * slice[j].conj();
            }
        }
    }
    if p_success < 1e-15 {
        return Err(CoreError::HeraldImpossible { p_success });
    }
    rho.mapv_inplace(|z| z / p_success);
    Ok((DensityOperator::new(state.n_cutoff, rho)?, p_success))
}

/// Rectangular (x, p) grid specification for Wigner sampling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        WignerGridSpec { x_min: -5.0, x_max: 5.0, p_min: -5.0, p_max: 5.0, nx: 201, np: 201 }
    }
}

/// Sampled Wigner function W(x, p).
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Row index runs over x, column over p.
    pub values: Array2<f64>,
}

impl WignerGrid {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// ∫∫ W dx dp by 2-D trapezoid.
    pub fn integral(&self) -> f64 {
        let nx = self.xs.len();
        let np = self.ps.len();
        let hx = (self.xs[nx - 1] - self.xs[0]) / (nx - 1) as f64;
        let hp = (self.ps[np - 1] - self.ps[0]) / (np - 1) as f64;
        let mut total = 0.0;
        for i in 0..nx {
            let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            for j in 0..np {
                let wp = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                total += wx * wp * self.values[(i, j)];
            }
        }
        total * hx * hp
    }
}

/// Wigner function by the displaced-parity formula
/// W(x, p) = tr[ρ D(α) Π D†(α)] / π with α = (x + ip)/√2.
pub fn wigner_function(rho: &DensityOperator, spec: &WignerGridSpec) -> Result<WignerGrid> {
    let n_cutoff = rho.n_cutoff;
    let xs: Vec<f64> = (0..spec.nx)
        .map(|i| spec.x_min + (spec.x_max - spec.x_min) * i as f64 / (spec.nx - 1) as f64)
        .collect();
    let ps: Vec<f64> = (0..spec.np)
        .map(|j| spec.p_min + (spec.p_max - spec.p_min) * j as f64 / (spec.np - 1) as f64)
        .collect();
    let parity = parity_diagonal(n_cutoff);
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| {
            ps.iter()
                .map(|&p| {
                    let alpha = C64::new(x, p) / C64::new(2.0f64.sqrt(), 0.0);
                    let d = displacement(alpha, n_cutoff)?;
                    // D·Π is a column rescale of D by (-1)^n.
                    let mut dp = d.clone();
                    for (j, &s) in parity.iter().enumerate() {
                        if s < 0.0 {
                            dp.column_mut(j).mapv_inplace(|z| -z);
                        }
                    }
                    let t = matmul(&dp, &adjoint(&d));
                    let mut w = C64::new(0.0, 0.0);
                    for i in 0..=n_cutoff {
                        for j in 0..=n_cutoff {
                            w += rho.rho[(i, j)] * t[(j, i)];
                        }
                    }
                    Ok(w.re / std::f64::consts::PI)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Array2::zeros((spec.nx, spec.np));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    Ok(WignerGrid { xs, ps, values })
}
