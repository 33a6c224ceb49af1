//! Time-dependent dipole matrix elements μ_gg, μ_ge, μ_eg, μ_ee for a
//! two-bound-state atom driven by a strong pulse, computed in the
//! strong-field approximation (momentum integrals by saddle point, time
//! integrals adaptive), or ingested from a CSV file.
//!
//! Each element combines a field-free bound-bound term with a
//! continuum-mediated path: ionization at τ, Volkov propagation at the
//! stationary momentum, recombination at t.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::numeric::quad::{integrate_multi, QuadOptions, UniformRealGrid};
use crate::pulse::LaserPulse;

/// Minimum number of time samples in a dipole series.
pub const MIN_SAMPLES: usize = 1 << 10;

/// Hermiticity deviations above this trigger a symmetrization warning.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Radial character of an s-like bound state, fixing the shape of its
/// bound-continuum dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// Nodeless hydrogenic s state (1s-type).
    NodelessS,
    /// Single-node hydrogenic s state (2s-type), as for the first excited
    /// state of a hydrogenic ion.
    SingleNodeS,
}

/// Two-level atomic system with continuum access, He⁺-like defaults
/// (1s ground state, 2s first excited state).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Ionization potential of the ground state (a.u.).
    pub ip_ground: f64,
    /// Ionization potential of the excited state (a.u.).
    pub ip_excited: f64,
    /// Direct bound-bound dipole. Zero for two s-like states (parity).
    pub d_eg: f64,
    /// Saddle-point prefactor regularization.
    pub epsilon: f64,
    /// Radial form of the ground state.
    pub ground_form: BoundForm,
    /// Radial form of the excited state.
    pub excited_form: BoundForm,
}

impl Default for AtomSpec {
    fn default() -> Self {
        AtomSpec {
            ip_ground: 2.0,
            ip_excited: 0.5,
            d_eg: 0.0,
            epsilon: 1e-3,
            ground_form: BoundForm::NodelessS,
            excited_form: BoundForm::SingleNodeS,
        }
    }
}

impl AtomSpec {
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.ip_ground > self.ip_excited) {
            violations.push(format!(
                "ground-state ionization potential ({}) must exceed the excited one ({})",
                self.ip_ground, self.ip_excited
            ));
        }
        if !(self.ip_excited > 0.0) {
            violations.push(format!(
                "excited-state ionization potential must be positive, got {}",
                self.ip_excited
            ));
        }
        if !(self.epsilon > 0.0) {
            violations.push(format!("regularization must be positive, got {}", self.epsilon));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Validation(violations))
        }
    }
}

/// Bound-continuum dipole d(p) = i·g(p) for an s-like state with
/// κ = √(2Ip); `g` is real and odd in the momentum along the polarization.
///
/// Nodeless (1s-type):    g(p) = (2^{7/2}κ^{5/2}/π) · p/(p² + κ²)³
/// Single-node (2s-type): g(p) = (2^{9/2}κ^{5/2}/π) · p(2κ² − p²)/(p² + κ²)⁴
///
/// Both follow from plane-wave continuum states and the hydrogenic radial
/// functions; the 2s-type carries the momentum-space node at p = √2·κ.
#[inline]
fn bound_continuum_dipole(p: f64, ip: f64, form: BoundForm) -> f64 {
    let kappa_sq = 2.0 * ip;
    match form {
        BoundForm::NodelessS => {
            let norm = 2.0f64.powf(3.5) * kappa_sq.powf(1.25) / PI;
            norm * p / (p * p + kappa_sq).powi(3)
        }
        BoundForm::SingleNodeS => {
            let norm = 2.0f64.powf(4.5) * kappa_sq.powf(1.25) / PI;
            norm * p * (2.0 * kappa_sq - p * p) / (p * p + kappa_sq).powi(4)
        }
    }
}

/// Complex dipole samples on a uniform time grid (atomic units).
#[derive(Debug, Clone)]
pub struct DipoleSeries {
    t0: f64,
    dt: f64,
    pub mu_gg: Vec<C64>,
    pub mu_ge: Vec<C64>,
    pub mu_eg: Vec<C64>,
    pub mu_ee: Vec<C64>,
}

impl DipoleSeries {
    /// Build a series; μ_ge is symmetrized against conj(μ_eg), with a warning
    /// when the deviation exceeds [`HERMITICITY_TOL`].
    pub fn new(
        t0: f64,
        dt: f64,
        mu_gg: Vec<C64>,
        mu_ge: Vec<C64>,
        mut mu_eg: Vec<C64>,
        mu_ee: Vec<C64>,
    ) -> Result<Self> {
        let n = mu_gg.len();
        if n < MIN_SAMPLES {
            return Err(CoreError::validation(format!(
                "dipole series needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if mu_ge.len() != n || mu_eg.len() != n || mu_ee.len() != n {
            return Err(CoreError::validation("dipole arrays must share one time grid"));
        }
        if !(dt > 0.0) {
            return Err(CoreError::validation(format!("time step must be positive, got {dt}")));
        }
        let worst = mu_ge
            .iter()
            .zip(&mu_eg)
            .map(|(ge, eg)| (*ge - eg.conj()).norm())
            .fold(0.0f64, f64::max);
        if worst > HERMITICITY_TOL {
            log::warn!(
                "dipole series violates mu_ge = conj(mu_eg) by up to {worst:.3e}; symmetrizing"
            );
        }
        let mu_ge: Vec<C64> = mu_ge
            .iter()
            .zip(&mu_eg)
            .map(|(ge, eg)| (*ge + eg.conj()) * 0.5)
            .collect();
        for (eg, ge) in mu_eg.iter_mut().zip(&mu_ge) {
            *eg = ge.conj();
        }
        Ok(DipoleSeries { t0, dt, mu_gg, mu_ge, mu_eg, mu_ee })
    }

    pub fn len(&self) -> usize {
        self.mu_gg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_gg.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }
}

/// Max-magnitude summary of a dipole series.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub max_abs_ee: f64,
    pub max_abs_eg: f64,
    pub max_abs_gg: f64,
    /// True when max|μ_ee| > max|μ_eg| > max|μ_gg| strictly.
    pub hierarchy: bool,
}

/// Ordered max-magnitudes of the dipole elements and the hierarchy flag.
pub fn check_hierarchy(series: &DipoleSeries) -> HierarchyReport {
    let max_abs = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let max_abs_ee = max_abs(&series.mu_ee);
    let max_abs_eg = max_abs(&series.mu_eg);
    let max_abs_gg = max_abs(&series.mu_gg);
    HierarchyReport {
        max_abs_ee,
        max_abs_eg,
        max_abs_gg,
        hierarchy: max_abs_ee > max_abs_eg && max_abs_eg > max_abs_gg,
    }
}

/// Sampled field quantities for fast evaluation inside the time integrals.
struct FieldTables {
    e: UniformRealGrid,
    a: UniformRealGrid,
    int_a: UniformRealGrid,
    int_a_sq: UniformRealGrid,
}

const TABLE_SAMPLES: usize = (1 << 15) + 1;

impl FieldTables {
    fn build(pulse: &LaserPulse) -> Self {
        let va = pulse.vector_potential();
        let t_end = pulse.t_end();
        let h = t_end / (TABLE_SAMPLES - 1) as f64;
        let ts: Vec<f64> = (0..TABLE_SAMPLES).map(|k| k as f64 * h).collect();
        FieldTables {
            e: UniformRealGrid::new(0.0, h, ts.iter().map(|&t| pulse.field_unchecked(t)).collect()),
            a: UniformRealGrid::new(0.0, h, ts.iter().map(|&t| va.a(t)).collect()),
            int_a: UniformRealGrid::new(0.0, h, ts.iter().map(|&t| va.int_a(t)).collect()),
            int_a_sq: UniformRealGrid::new(0.0, h, ts.iter().map(|&t| va.int_a_sq(t)).collect()),
        }
    }
}

/// The four continuum-path kernels K_ij(t) for (i,j) ∈ {gg, eg, ge, ee},
/// evaluated by one shared adaptive pass over the ionization time τ.
///
///   K_ij(t) = -i ∫₀ᵗ dτ E(τ) d_i*(p_st + A(t)) d_j(p_st + A(τ))
///             · exp(-i S_ij) · (π / (ε + i(t-τ)/2))^{3/2}
///
/// with p_st the stationary momentum of the closed excursion and the action
/// S_ij = ∫_τ^t (p_st + A)²/2 dt″ + Ip_i·t − Ip_j·τ, so that the continuum
/// phase matches the field-free bound phase e^{i(Ip_j − Ip_i)t} as τ → t.
fn continuum_kernels(
    tables: &FieldTables,
    atom: &AtomSpec,
    t: f64,
    opts: &QuadOptions,
) -> Result<[C64; 4]> {
    if t <= 0.0 {
        return Ok([C64::new(0.0, 0.0); 4]);
    }
    let ip = [atom.ip_ground, atom.ip_excited];
    let form = [atom.ground_form, atom.excited_form];
    // Kernel order (i, j): gg, eg, ge, ee.
    const IJ: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let eps = atom.epsilon;
    let a_t = tables.a.eval(t);
    let b_t = tables.int_a.eval(t);
    let c_t = tables.int_a_sq.eval(t);
    let pref_mag = PI.powf(1.5);

    let integrand = |tau: f64| -> [C64; 4] {
        let excursion = t - tau;
        if excursion < 1e-12 {
            return [C64::new(0.0, 0.0); 4];
        }
        let a_tau = tables.a.eval(tau);
        let db = b_t - tables.int_a.eval(tau);
        let dc = c_t - tables.int_a_sq.eval(tau);
        let p_st = -db / excursion;
        let v_t = p_st + a_t;
        let v_tau = p_st + a_tau;
        let s_kin = 0.5 * (dc - db * db / excursion);
        let e_tau = tables.e.eval(tau);
        // (π/(ε + i·excursion/2))^{3/2} as magnitude and phase.
        let r2 = eps * eps + 0.25 * excursion * excursion;
        let mag = pref_mag * r2.powf(-0.75);
        let pref_angle = -1.5 * (0.5 * excursion).atan2(eps);
        // d_i*(v_t)·d_j(v_τ) = g_i(v_t)·g_j(v_τ) with real odd g.
        let g_t = [
            bound_continuum_dipole(v_t, ip[0], form[0]),
            bound_continuum_dipole(v_t, ip[1], form[1]),
        ];
        let g_tau = [
            bound_continuum_dipole(v_tau, ip[0], form[0]),
            bound_continuum_dipole(v_tau, ip[1], form[1]),
        ];
        let mut out = [C64::new(0.0, 0.0); 4];
        for (k, &(i, j)) in IJ.iter().enumerate() {
            let amp = g_t[i] * g_tau[j] * e_tau * mag;
            let angle = pref_angle - (s_kin + ip[i] * t - ip[j] * tau);
            // overall -i from the ionization amplitude
            out[k] = C64::new(0.0, -amp) * C64::new(angle.cos(), angle.sin());
        }
        out
    };

    let r = integrate_multi(integrand, 0.0, t, opts)?;
    Ok(r.values)
}

/// Compute the dipole series in the strong-field approximation.
///
/// Deterministic for fixed inputs; samples are independent and evaluated in
/// parallel.
pub fn compute_sfa_dipoles(
    pulse: &LaserPulse,
    atom: &AtomSpec,
    n_t: usize,
    opts: &QuadOptions,
) -> Result<DipoleSeries> {
    atom.validate()?;
    if n_t < MIN_SAMPLES {
        return Err(CoreError::validation(format!(
            "dipole computation needs at least {MIN_SAMPLES} samples, got {n_t}"
        )));
    }
    let tables = FieldTables::build(pulse);
    let dt = pulse.t_end() / (n_t - 1) as f64;
    let delta_ip = atom.ip_ground - atom.ip_excited;

    let kernels: Vec<[C64; 4]> = (0..n_t)
        .into_par_iter()
        .map(|k| {
            continuum_kernels(&tables, atom, k as f64 * dt, opts).map_err(|e| match e {
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
                    context: format!(" while integrating dipole sample t = {}", k as f64 * dt),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut mu_gg = Vec::with_capacity(n_t);
    let mut mu_ge = Vec::with_capacity(n_t);
    let mut mu_eg = Vec::with_capacity(n_t);
    let mut mu_ee = Vec::with_capacity(n_t);
    for (k, [k_gg, k_eg, k_ge, k_ee]) in kernels.into_iter().enumerate() {
        let t = k as f64 * dt;
        // Diagonal elements: path + reversed path (real by construction).
        mu_gg.push(k_gg + k_gg.conj());
        mu_ee.push(k_ee + k_ee.conj());
        // Off-diagonal: direct bound-bound term plus the two conjugate paths.
        let direct = atom.d_eg * C64::new(0.0, delta_ip * t).exp();
        let eg = direct + k_eg + k_ge.conj();
        mu_eg.push(eg);
        mu_ge.push(eg.conj());
    }
    DipoleSeries::new(0.0, dt, mu_gg, mu_ge, mu_eg, mu_ee)
}

const CSV_HEADER: [&str; 9] = [
    "t", "re_mu_gg", "im_mu_gg", "re_mu_ge", "im_mu_ge", "re_mu_eg", "im_mu_eg", "re_mu_ee",
    "im_mu_ee",
];

/// Write a dipole series in the canonical CSV schema.
pub fn save_dipole_series(series: &DipoleSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for k in 0..series.len() {
        w.write_record([
            format!("{}", series.time(k)),
            format!("{}", series.mu_gg[k].re),
            format!("{}", series.mu_gg[k].im),
            format!("{}", series.mu_ge[k].re),
            format!("{}", series.mu_ge[k].im),
            format!("{}", series.mu_eg[k].re),
            format!("{}", series.mu_eg[k].im),
            format!("{}", series.mu_ee[k].re),
            format!("{}", series.mu_ee[k].im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dipole_series_to_path(series: &DipoleSeries, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    save_dipole_series(series, std::io::BufWriter::new(file))
}

/// Load a dipole series, enforcing the uniform grid and Hermiticity rules.
pub fn load_dipole_series(path: impl AsRef<Path>) -> Result<DipoleSeries> {
    let file = std::fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    {
        let headers = reader.headers()?;
        let expected: Vec<&str> = CSV_HEADER.to_vec();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(CoreError::Parse {
                line: 1,
                message: format!("unexpected header {got:?}, expected {expected:?}"),
            });
        }
    }
    let mut times = Vec::new();
    let mut cols: [Vec<C64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 9 {
            return Err(CoreError::Parse {
                line,
                message: format!("expected 9 fields, found {}", record.len()),
            });
        }
        let mut fields = [0.0f64; 9];
        for (idx, raw) in record.iter().enumerate() {
            fields[idx] = raw.trim().parse::<f64>().map_err(|e| CoreError::Parse {
                line,
                message: format!("field `{}`: {e}", CSV_HEADER[idx]),
            })?;
        }
        times.push(fields[0]);
        for c in 0..4 {
            cols[c].push(C64::new(fields[1 + 2 * c], fields[2 + 2 * c]));
        }
    }
    if times.len() < 2 {
        return Err(CoreError::Parse {
            line: 0,
            message: format!("need at least {MIN_SAMPLES} rows, found {}", times.len()),
        });
    }
    let t0 = times[0];
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(CoreError::Parse {
            line: 3,
            message: format!("time column must increase uniformly, first step is {dt}"),
        });
    }
    let tol = 1e-9 * dt.abs().max(1e-300);
    for (k, &t) in times.iter().enumerate() {
        let expected = t0 + k as f64 * dt;
        if (t - expected).abs() > tol * (1.0 + t.abs() / dt) {
            return Err(CoreError::Parse {
                line: (k + 2) as u64,
                message: format!("non-uniform time grid: expected t = {expected}, found {t}"),
            });
        }
    }
    let [mu_gg, mu_ge, mu_eg, mu_ee] = cols;
    DipoleSeries::new(t0, dt, mu_gg, mu_ge, mu_eg, mu_ee)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::EnvelopeKind;

    fn zero_field_pulse() -> LaserPulse {
        LaserPulse::new(0.0, 0.057, 6, EnvelopeKind::Sin2).unwrap()
    }

    #[test]
    fn field_free_limit_keeps_bound_phase_only() {
        let atom = AtomSpec { d_eg: 0.3, ..AtomSpec::default() };
        let series =
            compute_sfa_dipoles(&zero_field_pulse(), &atom, MIN_SAMPLES, &QuadOptions::default())
                .unwrap();
        for k in (0..series.len()).step_by(97) {
            let t = series.time(k);
            assert!(series.mu_ee[k].norm() < 1e-14);
            assert!(series.mu_gg[k].norm() < 1e-14);
            let expected = 0.3 * C64::new(0.0, 1.5 * t).exp();
            assert!(
                (series.mu_eg[k] - expected).norm() < 1e-12,
                "free phase mismatch at t = {t}"
            );
            assert!((series.mu_eg[k].norm() - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn hierarchy_holds_for_default_atom() {
        let pulse = LaserPulse::from_intensity_wavelength(1e14, 800.0, 6).unwrap();
        let series = compute_sfa_dipoles(
            &pulse,
            &AtomSpec::default(),
            MIN_SAMPLES,
            &QuadOptions::default(),
        )
        .unwrap();
        let report = check_hierarchy(&series);
        assert!(report.hierarchy, "{report:?}");
        // Conservative reading of the magnitude separation on defaults.
        assert!(report.max_abs_ee >= 5.0 * report.max_abs_eg, "{report:?}");
        assert!(report.max_abs_eg >= 5.0 * report.max_abs_gg, "{report:?}");
    }

    #[test]
    fn hierarchy_flag_degenerate_cases() {
        let n = MIN_SAMPLES;
        let zeros = vec![C64::new(0.0, 0.0); n];
        let series =
            DipoleSeries::new(0.0, 0.1, zeros.clone(), zeros.clone(), zeros.clone(), zeros)
                .unwrap();
        let report = check_hierarchy(&series);
        assert!(!report.hierarchy);
        assert_eq!(report.max_abs_ee, 0.0);

        // A gg element blown up by 1e6 breaks the ordering.
        let big = vec![C64::new(1e6, 0.0); n];
        let small = vec![C64::new(1.0, 0.0); n];
        let mid = vec![C64::new(10.0, 0.0); n];
        let series = DipoleSeries::new(0.0, 0.1, big, small.clone(), small, mid).unwrap();
        assert!(!check_hierarchy(&series).hierarchy);
    }

    #[test]
    fn refinement_of_the_time_grid_leaves_samples_unchanged() {
        // Each sample is an independent adaptive integral, so a nested grid
        // reproduces the coarse samples; the check guards that independence.
        let pulse = LaserPulse::from_intensity_wavelength(1e14, 800.0, 2).unwrap();
        let atom = AtomSpec::default();
        let coarse =
            compute_sfa_dipoles(&pulse, &atom, MIN_SAMPLES, &QuadOptions::default()).unwrap();
        let fine =
            compute_sfa_dipoles(&pulse, &atom, 2 * MIN_SAMPLES - 1, &QuadOptions::default())
                .unwrap();
        for k in (0..coarse.len()).step_by(111) {
            let rel = (coarse.mu_ee[k] - fine.mu_ee[2 * k]).norm()
                / coarse.mu_ee[k].norm().max(1e-30);
            assert!(rel < 1e-4, "sample {k} drifted by {rel}");
        }
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let atom = AtomSpec { d_eg: 0.25, ..AtomSpec::default() };
        let series =
            compute_sfa_dipoles(&zero_field_pulse(), &atom, MIN_SAMPLES, &QuadOptions::default())
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dipoles.csv");
        save_dipole_series_to_path(&series, &path).unwrap();
        let loaded = load_dipole_series(&path).unwrap();
        assert_eq!(series.len(), loaded.len());
        for k in 0..series.len() {
            assert_eq!(series.mu_eg[k], loaded.mu_eg[k]);
            assert_eq!(series.mu_ee[k], loaded.mu_ee[k]);
            assert_eq!(series.time(k).to_bits(), loaded.time(k).to_bits());
        }
    }

    #[test]
    fn shuffled_time_column_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let mut body = String::from(
            "t,re_mu_gg,im_mu_gg,re_mu_ge,im_mu_ge,re_mu_eg,im_mu_eg,re_mu_ee,im_mu_ee\n",
        );
        for k in 0..MIN_SAMPLES {
            // Swap two interior times.
            let t = match k {
                100 => 101.0,
                101 => 100.0,
                _ => k as f64,
            };
            body.push_str(&format!("{t},0,0,0,0,0,0,0,0\n"));
        }
        std::fs::write(&path, body).unwrap();
        match load_dipole_series(&path) {
            Err(CoreError::Parse { line, message }) => {
                assert!(message.contains("non-uniform"), "{message}");
                assert!(line >= 100);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn hermiticity_violation_is_symmetrized() {
        let n = MIN_SAMPLES;
        let mu_eg: Vec<C64> = (0..n).map(|k| C64::new(1.0, 1e-6 * k as f64 / n as f64)).collect();
        // Deliberately off by 1e-6 from conj(mu_eg).
        let mu_ge: Vec<C64> = mu_eg.iter().map(|z| z.conj() + C64::new(1e-6, 0.0)).collect();
        let zeros = vec![C64::new(0.0, 0.0); n];
        let series = DipoleSeries::new(0.0, 0.1, zeros.clone(), mu_ge, mu_eg, zeros).unwrap();
        for k in (0..n).step_by(127) {
            assert!((series.mu_ge[k] - series.mu_eg[k].conj()).norm() < 1e-15);
        }
    }
}
