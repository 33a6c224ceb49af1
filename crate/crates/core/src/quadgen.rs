//! Displacement amplitudes χ_q and the coefficients of the bilinear photonic
//! generator obtained by integrating the dipole cross-element against the
//! mode phases of the quantized field.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dipole::DipoleSeries;
use crate::error::{CoreError, Result};
use crate::numeric::quad::{cumulative_simpson, integrate_complex, QuadOptions, UniformGrid};
use crate::pulse::{LaserPulse, ModeGrid};

/// How the (generally non-Hermitian-form) generator is exponentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorMode {
    /// Exponentiate the generator as constructed and renormalize the state.
    #[default]
    AsIs,
    /// Replace the quadratic form by its Hermitian part, which makes the
    /// exponent anti-Hermitian and the evolution exactly norm-preserving.
    HermitianPart,
}

impl std::fmt::Display for GeneratorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorMode::AsIs => write!(f, "as-is"),
            GeneratorMode::HermitianPart => write!(f, "hermitian-part"),
        }
    }
}

/// Coherent displacement amplitudes per harmonic mode, χ_q.
#[derive(Debug, Clone)]
pub struct DisplacementVector {
    pub chi: Vec<C64>,
}

impl DisplacementVector {
    pub fn chi_for_mode(&self, q: usize) -> C64 {
        self.chi[q - 1]
    }

    /// |χ_q|² per mode: the coherent-amplitude harmonic spectrum.
    pub fn spectrum(&self) -> Vec<f64> {
        self.chi.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// χ_q = -(g_q/ħ) ∫ f(τ) μ_ee(τ) e^{iω_q τ} dτ over the full pulse.
///
/// The sign and phase convention is fixed here once; a global phase on χ is
/// unobservable downstream.
pub fn displacement_amplitudes(
    series: &DipoleSeries,
    pulse: &LaserPulse,
    grid: &ModeGrid,
) -> DisplacementVector {
    let n = series.len();
    let h = series.dt();
    let chi = (1..=grid.q_c)
        .map(|q| {
            let omega_q = grid.frequency(q);
            let samples: Vec<C64> = (0..n)
                .map(|k| {
                    let t = series.time(k);
                    series.mu_ee[k]
                        * pulse.envelope(t)
                        * C64::new(0.0, omega_q * t).exp()
                })
                .collect();
            let cumulative = cumulative_simpson(&samples, h);
            -grid.coupling(q) * cumulative[n - 1]
        })
        .collect();
    DisplacementVector { chi }
}

/// Coefficient matrices of the quadratic photonic exponent
/// Σ_{qq'} [ aa·a_q a_q' + dd·a_q†a_q'† + da·a_q†a_q' + ad·a_q a_q'† ] + constant.
///
/// Row index q is the outer (later-time) mode, column q' the inner one.
/// Every entry is exactly linear in the collective coupling N_at·g_L².
#[derive(Debug, Clone)]
pub struct QuadraticGenerator {
    pub q_c: usize,
    pub n_at_gl2: f64,
    /// Coefficients of a_q a_q'.
    pub aa: Array2<C64>,
    /// Coefficients of a_q† a_q'†.
    pub dd: Array2<C64>,
    /// Coefficients of a_q† a_q'.
    pub da: Array2<C64>,
    /// Coefficients of a_q a_q'†.
    pub ad: Array2<C64>,
    /// Scalar term of the exponent (kept for normal-ordered rewrites).
    pub constant: C64,
    /// Modes the generator currently acts on (sorted, 1-based).
    pub active: Vec<usize>,
}

impl QuadraticGenerator {
    /// Adjoint of the exponent operator: (aa, dd, da, ad, c) → (dd†, aa†, da†, ad†, c̄).
    pub fn dagger(&self) -> Self {
        let adj = |m: &Array2<C64>| m.t().mapv(|z| z.conj());
        QuadraticGenerator {
            q_c: self.q_c,
            n_at_gl2: self.n_at_gl2,
            aa: adj(&self.dd),
            dd: adj(&self.aa),
            da: adj(&self.da),
            ad: adj(&self.ad),
            constant: self.constant.conj(),
            active: self.active.clone(),
        }
    }

    /// Unitary (norm-preserving) part of the generator.
    ///
    /// Writing the exponent as K = -iH + G with H, G Hermitian, this keeps
    /// -iH = (K - K†)/2, i.e. the Hermitian part of the effective quadratic
    /// Hamiltonian, and drops the damping part G that feeds the ground
    /// branch. exp of the result is exactly unitary.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dagger();
        let half_diff = |x: &Array2<C64>, y: &Array2<C64>| (x - y).mapv(|z| 0.5 * z);
        QuadraticGenerator {
            q_c: self.q_c,
            n_at_gl2: self.n_at_gl2,
            aa: half_diff(&self.aa, &d.aa),
            dd: half_diff(&self.dd, &d.dd),
            da: half_diff(&self.da, &d.da),
            ad: half_diff(&self.ad, &d.ad),
            constant: 0.5 * (self.constant - d.constant),
            active: self.active.clone(),
        }
    }

    /// Canonical slot form: aa/dd symmetrized (a_q a_q' commute), the a a†
    /// slot folded into a†a plus the commutator constant. Two generators
    /// with equal canonical slots are the same operator.
    fn canonical_slots(&self) -> (Array2<C64>, Array2<C64>, Array2<C64>, C64) {
        let sym = |m: &Array2<C64>| (m + &m.t()).mapv(|z| 0.5 * z);
        let da = &self.da + &self.ad.t();
        let trace_ad: C64 = (0..self.q_c).map(|k| self.ad[(k, k)]).sum();
        (sym(&self.aa), sym(&self.dd), da, self.constant + trace_ad)
    }

    /// Max operator-level deviation of the exponent from its unitary part.
    pub fn hermiticity_deviation(&self) -> f64 {
        let (aa_s, dd_s, da_c, _) = self.canonical_slots();
        let (aa_h, dd_h, da_h, _) = self.hermitian_part().canonical_slots();
        let dev = |x: &Array2<C64>, y: &Array2<C64>| {
            x.iter().zip(y.iter()).map(|(a, b)| (*a - *b).norm()).fold(0.0f64, f64::max)
        };
        dev(&aa_s, &aa_h).max(dev(&dd_s, &dd_h)).max(dev(&da_c, &da_h))
    }

    pub fn apply_mode(&self, mode: GeneratorMode) -> Self {
        match mode {
            GeneratorMode::AsIs => self.clone(),
            GeneratorMode::HermitianPart => self.hermitian_part(),
        }
    }

    /// Rescale to a different collective coupling (entries are linear in it).
    pub fn scaled_to(&self, n_at_gl2: f64) -> Self {
        let factor = C64::new(n_at_gl2 / self.n_at_gl2, 0.0);
        QuadraticGenerator {
            q_c: self.q_c,
            n_at_gl2,
            aa: self.aa.mapv(|z| z * factor),
            dd: self.dd.mapv(|z| z * factor),
            da: self.da.mapv(|z| z * factor),
            ad: self.ad.mapv(|z| z * factor),
            constant: self.constant * factor,
            active: self.active.clone(),
        }
    }

    /// Zero every coefficient outside `modes × modes`.
    pub fn restrict(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(CoreError::validation("mode subset must not be empty"));
        }
        let mut sorted: Vec<usize> = modes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(CoreError::validation("mode subset contains duplicates"));
        }
        for &q in &sorted {
            if q < 1 || q > self.q_c {
                return Err(CoreError::validation(format!(
                    "mode {q} outside the grid [1, {}]",
                    self.q_c
                )));
            }
        }
        let keep = |m: &Array2<C64>| {
            let mut out = Array2::zeros(m.raw_dim());
            for &q in &sorted {
                for &qp in &sorted {
                    out[(q - 1, qp - 1)] = m[(q - 1, qp - 1)];
                }
            }
            out
        };
        Ok(QuadraticGenerator {
            q_c: self.q_c,
            n_at_gl2: self.n_at_gl2,
            aa: keep(&self.aa),
            dd: keep(&self.dd),
            da: keep(&self.da),
            ad: keep(&self.ad),
            constant: self.constant,
            active: sorted,
        })
    }
}

/// Generator coefficients from the dipole series.
///
/// Solving the excited-branch evolution equation gives the exponent
/// K = -(N_at/ħ²) ∫₀ᵀ dt μ_eg(t)Ê(t) ∫₀ᵗ dτ μ_ge(τ)Ê(τ), whose Hermitian
/// part is negative semidefinite (the damping that feeds the ground branch),
/// with Ê_q(t) = -i f(t) g_q [a_q e^{-iω_q t} - a_q† e^{+iω_q t}].
///
/// Expanding the product Ê_q(t)Ê_q'(τ) yields four phase kernels; with the
/// shorthand
///
///   D^{st,sτ}_{qq'} = ∫₀ᵀ dt μ_eg(t) f(t) e^{st·iω_q t}
///                     ∫₀ᵗ dτ μ_ge(τ) f(τ) e^{sτ·iω_q' τ}
///
/// each kernel e^{∓iω_q t} carries the weight ∓i·g_q·f(t) from Ê, so the
/// slot assignments are (row q = outer time, column q' = inner time;
/// k = N_at g_L²·√(q q') after folding the quantization volume into g_L):
///
///   a_q a_q'   : weights (-i)(-i) = -1, sign -(-1) → aa[q,q'] = +k · D^{--}
///   a_q†a_q'†  : weights (+i)(+i) = -1, sign -(-1) → dd[q,q'] = +k · D^{++}
///   a_q†a_q'   : weights (+i)(-i) = +1, sign -(+1) → da[q,q'] = -k · D^{+-}
///   a_q a_q'†  : weights (-i)(+i) = +1, sign -(+1) → ad[q,q'] = -k · D^{-+}
///
/// The inner integral is a cumulative Simpson pass on the dipole grid; the
/// outer one is adaptive with the integrand interpolated cubically.
pub fn generator_coefficients(
    series: &DipoleSeries,
    pulse: &LaserPulse,
    grid: &ModeGrid,
    n_at_gl2: f64,
    opts: &QuadOptions,
) -> Result<QuadraticGenerator> {
    if !(n_at_gl2 > 0.0) {
        return Err(CoreError::validation(format!(
            "collective coupling N_at g_L^2 must be positive, got {n_at_gl2}"
        )));
    }
    let q_c = grid.q_c;
    let n = series.len();
    let h = series.dt();
    let t0 = series.t_start();
    let t_end = series.t_end();

    // Inner cumulative integrals I_{q'}^{±}(t) = ∫₀ᵗ f μ_ge e^{±iω_q' τ} dτ.
    let inner: Vec<[UniformGrid; 2]> = (1..=q_c)
        .map(|qp| {
            let w = grid.frequency(qp);
            let build = |sign: f64| {
                let samples: Vec<C64> = (0..n)
                    .map(|k| {
                        let t = series.time(k);
                        series.mu_ge[k] * pulse.envelope(t) * C64::new(0.0, sign * w * t).exp()
                    })
                    .collect();
                UniformGrid::new(t0, h, cumulative_simpson(&samples, h))
            };
            [build(1.0), build(-1.0)] // index 0: e^{+iωτ}, index 1: e^{-iωτ}
        })
        .collect();

    let mu_eg_grid =
        UniformGrid::new(t0, h, series.mu_eg.clone());

    // Outer integrals for every (q, q', st, sτ) combination, in parallel.
    let jobs: Vec<(usize, usize, usize, usize)> = (0..q_c)
        .flat_map(|q| {
            (0..q_c).flat_map(move |qp| {
                [(q, qp, 0usize, 0usize), (q, qp, 0, 1), (q, qp, 1, 0), (q, qp, 1, 1)]
            })
        })
        .collect();
    let results: Vec<C64> = jobs
        .par_iter()
        .map(|&(q, qp, st_idx, stau_idx)| {
            let w_q = grid.frequency(q + 1);
            let sign_t = if st_idx == 0 { 1.0 } else { -1.0 };
            let inner_grid = &inner[qp][stau_idx];
            let f = |t: f64| {
                mu_eg_grid.eval(t)
                    * pulse.envelope(t)
                    * C64::new(0.0, sign_t * w_q * t).exp()
                    * inner_grid.eval(t)
            };
            integrate_complex(f, t0, t_end, opts).map(|r| r.value).map_err(|e| match e {
                CoreError::QuadratureNonConvergent {
                    error_estimate,
                    subintervals,
                    worst_a,
                    worst_b,
                    ..
                } => CoreError::QuadratureNonConvergent {
                    error_estimate,
                    subintervals,
                    worst_a,
                    worst_b,
                    context: format!(" for generator entry (q = {}, q' = {})", q + 1, qp + 1),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut aa = Array2::zeros((q_c, q_c));
    let mut dd = Array2::zeros((q_c, q_c));
    let mut da = Array2::zeros((q_c, q_c));
    let mut ad = Array2::zeros((q_c, q_c));
    for (job, value) in jobs.iter().zip(results) {
        let &(q, qp, st_idx, stau_idx) = job;
        // N_at g_q g_q' with the quantization volume folded into N_at g_L².
        let k = n_at_gl2 * ((q + 1) as f64 * (qp + 1) as f64).sqrt();
        match (st_idx, stau_idx) {
            (1, 1) => aa[(q, qp)] = k * value,  // e^{-iω_q t} e^{-iω_q' τ}
            (0, 0) => dd[(q, qp)] = k * value,  // e^{+iω_q t} e^{+iω_q' τ}
            (0, 1) => da[(q, qp)] = -k * value, // e^{+iω_q t} e^{-iω_q' τ}
            (1, 0) => ad[(q, qp)] = -k * value, // e^{-iω_q t} e^{+iω_q' τ}
            _ => unreachable!(),
        }
    }

    Ok(QuadraticGenerator {
        q_c,
        n_at_gl2,
        aa,
        dd,
        da,
        ad,
        constant: C64::new(0.0, 0.0),
        active: (1..=q_c).collect(),
    })
}

/// Serializable export of a generator with complex entries as [re, im] pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct GeneratorExport {
    pub q_c: usize,
    pub n_at_gl2: f64,
    pub active_modes: Vec<usize>,
    pub omega_l: f64,
    pub g_l: f64,
    pub aa: Vec<Vec<[f64; 2]>>,
    pub dd: Vec<Vec<[f64; 2]>>,
    pub da: Vec<Vec<[f64; 2]>>,
    pub ad: Vec<Vec<[f64; 2]>>,
    pub constant: [f64; 2],
}

pub fn matrix_to_pairs(m: &Array2<C64>) -> Vec<Vec<[f64; 2]>> {
    m.rows().into_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl GeneratorExport {
    pub fn new(gen: &QuadraticGenerator, grid: &ModeGrid) -> Self {
        GeneratorExport {
            q_c: gen.q_c,
            n_at_gl2: gen.n_at_gl2,
            active_modes: gen.active.clone(),
            omega_l: grid.omega_l,
            g_l: grid.g_l,
            aa: matrix_to_pairs(&gen.aa),
            dd: matrix_to_pairs(&gen.dd),
            da: matrix_to_pairs(&gen.da),
            ad: matrix_to_pairs(&gen.ad),
            constant: [gen.constant.re, gen.constant.im],
        }
    }
}
