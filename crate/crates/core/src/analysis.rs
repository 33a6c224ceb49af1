//! Figure-level pipelines: single-mode squeezing scans, two-mode landscapes,
//! heralded photon subtraction, harmonic spectra, and the dual-backend
//! cross-check.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::config::{DipoleSource, RunConfig};
use crate::dipole::{compute_sfa_dipoles, load_dipole_series, DipoleSeries};
use crate::error::{CoreError, Result};
use crate::fockspace::{
    evolve_vacuum, partial_trace_herald, quadrature_variance, wigner_function, WignerGrid,
    WignerGridSpec,
};
use crate::gaussian::{
    covariance_from_generator, covariance_from_state, lambda_max, lambda_min,
    logarithmic_negativity, optimal_variance_brute, optimal_variance_eigen, squeezing_db,
    OptimalVariance,
};
use crate::pulse::{LaserPulse, ModeGrid};
use crate::quadgen::{
    displacement_amplitudes, generator_coefficients, DisplacementVector, GeneratorMode,
    QuadraticGenerator,
};

/// Everything the figure pipelines need, computed once per configuration.
pub struct Pipeline {
    pub config: RunConfig,
    pub pulse: LaserPulse,
    pub grid: ModeGrid,
    pub series: DipoleSeries,
    pub generator: QuadraticGenerator,
}

impl Pipeline {
    pub fn prepare(config: &RunConfig) -> Result<Pipeline> {
        config.validate()?;
        let pulse = config.laser_pulse()?;
        let atom = config.atom_spec();
        let grid = config.mode_grid()?;
        let quad = config.quad_options();
        let series = match &config.io.dipole_source {
            DipoleSource::Sfa => compute_sfa_dipoles(&pulse, &atom, config.numerics.n_t, &quad)?,
            DipoleSource::File(path) => load_dipole_series(path)?,
        };
        let generator =
            generator_coefficients(&series, &pulse, &grid, config.physics.n_at_gl2, &quad)?;
        Ok(Pipeline { config: config.resolved(), pulse, grid, series, generator })
    }

    pub fn displacements(&self) -> DisplacementVector {
        displacement_amplitudes(&self.series, &self.pulse, &self.grid)
    }
}

/// 17 log-spaced collective couplings in [1e-4, 2].
pub fn default_sweep() -> Vec<f64> {
    let (lo, hi, n) = (1e-4f64, 2.0f64, 17);
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleModeRecord {
    pub q: usize,
    /// Brute-force optimum over the θ grid on the evolved Fock state.
    pub fock: OptimalVariance,
    /// Eigendecomposition optimum of the covariance block (unitary part).
    pub gaussian: OptimalVariance,
    /// 1 − ‖exp(K)|0⟩‖²: leading-order population leaked to the ground branch.
    pub norm_deficit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_at_gl2: f64,
    /// dB per harmonic order (index q−1), Fock backend.
    pub db_by_q: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub config: RunConfig,
    pub records: Vec<SingleModeRecord>,
    pub sweep: Vec<SweepPoint>,
}

/// Per-mode squeezing optimization on both backends plus a coupling sweep.
pub fn single_mode_scan(pipeline: &Pipeline) -> Result<SqueezingReport> {
    let numerics = &pipeline.config.numerics;
    let mut records = Vec::with_capacity(pipeline.grid.q_c);
    for q in 1..=pipeline.grid.q_c {
        let gen_q = pipeline.generator.restrict(&[q])?;
        let evolved = evolve_vacuum(&gen_q, numerics.n_cutoff, numerics.generator_mode)?;
        let fock = optimal_variance_brute(
            |theta| quadrature_variance(&evolved.state, 0, theta),
            numerics.theta_points,
        );
        let cov = covariance_from_generator(&gen_q.hermitian_part())?;
        let gaussian = optimal_variance_eigen(&cov.mode_block(0));
        records.push(SingleModeRecord {
            q,
            fock,
            gaussian,
            norm_deficit: 1.0 - evolved.pre_norm * evolved.pre_norm,
        });
    }
    let mut sweep = Vec::new();
    for coupling in default_sweep() {
        let mut db_by_q = Vec::with_capacity(pipeline.grid.q_c);
        for q in 1..=pipeline.grid.q_c {
            let gen_q = pipeline.generator.restrict(&[q])?.scaled_to(coupling);
            let evolved = evolve_vacuum(&gen_q, numerics.n_cutoff, numerics.generator_mode)?;
            let opt = optimal_variance_brute(
                |theta| quadrature_variance(&evolved.state, 0, theta),
                numerics.theta_points,
            );
            db_by_q.push(opt.db);
        }
        sweep.push(SweepPoint { n_at_gl2: coupling, db_by_q });
    }
    Ok(SqueezingReport { config: pipeline.config.clone(), records, sweep })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoModeRecord {
    pub q1: usize,
    pub q2: usize,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub log_negativity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoModeReport {
    pub config: RunConfig,
    pub records: Vec<TwoModeRecord>,
}

impl TwoModeReport {
    pub fn record(&self, q1: usize, q2: usize) -> Option<&TwoModeRecord> {
        self.records.iter().find(|r| (r.q1, r.q2) == (q1, q2))
    }

    /// Pair with the largest logarithmic negativity.
    pub fn strongest_pair(&self) -> (usize, usize) {
        let r = self
            .records
            .iter()
            .max_by(|a, b| a.log_negativity.total_cmp(&b.log_negativity))
            .expect("at least one pair");
        (r.q1, r.q2)
    }

    /// Pair with the largest covariance eigenvalue.
    pub fn max_lambda_pair(&self) -> (usize, usize) {
        let r = self
            .records
            .iter()
            .max_by(|a, b| a.lambda_max.total_cmp(&b.lambda_max))
            .expect("at least one pair");
        (r.q1, r.q2)
    }
}

/// λ and E_N for every pair q1 < q2 ≤ q_max from the covariance backend.
pub fn two_mode_scan(pipeline: &Pipeline) -> Result<TwoModeReport> {
    let mut records = Vec::new();
    for q1 in 1..=pipeline.grid.q_c {
        for q2 in q1 + 1..=pipeline.grid.q_c {
            let gen_pair = pipeline.generator.restrict(&[q1, q2])?.hermitian_part();
            let cov = covariance_from_generator(&gen_pair)?;
            records.push(TwoModeRecord {
                q1,
                q2,
                lambda_max: lambda_max(&cov),
                lambda_min: lambda_min(&cov),
                log_negativity: logarithmic_negativity(&cov)?,
            });
        }
    }
    Ok(TwoModeReport { config: pipeline.config.clone(), records })
}

/// Which of the two modes is measured (photon-subtracted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeraldOn {
    Q1,
    Q2,
}

impl std::fmt::Display for HeraldOn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeraldOn::Q1 => write!(f, "q1"),
            HeraldOn::Q2 => write!(f, "q2"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeraldReport {
    pub config: RunConfig,
    pub q1: usize,
    pub q2: usize,
    /// Harmonic index of the measured (subtracted) mode.
    pub herald_mode: usize,
    /// Harmonic index of the kept mode the Wigner function refers to.
    pub kept_mode: usize,
    pub p_success: f64,
    pub w_min: f64,
    /// ∫∫ W dx dp on the sampled grid.
    pub wigner_integral: f64,
    /// File the Wigner samples were written to, when emitted by the driver.
    pub wigner_csv: Option<String>,
}

/// Evolve the pair, herald at least one photon in the chosen mode, and map
/// the kept mode's Wigner function.
pub fn herald_pipeline(
    pipeline: &Pipeline,
    q1: usize,
    q2: usize,
    herald_on: HeraldOn,
    spec: &WignerGridSpec,
) -> Result<(HeraldReport, WignerGrid)> {
    if q1 == q2 {
        return Err(CoreError::validation("heralding needs two distinct modes"));
    }
    let herald_q = match herald_on {
        HeraldOn::Q1 => q1,
        HeraldOn::Q2 => q2,
    };
    let kept_q = if herald_q == q1 { q2 } else { q1 };
    let gen_pair = pipeline.generator.restrict(&[q1, q2])?;
    // Heralding acts on the full (as-constructed) evolution.
    let evolved = evolve_vacuum(&gen_pair, pipeline.config.numerics.n_cutoff, GeneratorMode::AsIs)?;
    // Mode slots are sorted by harmonic index inside the generator.
    let herald_slot = gen_pair.active.iter().position(|&q| q == herald_q).expect("mode present");
    let (rho, p_success) = partial_trace_herald(&evolved.state, herald_slot)?;
    let wigner = wigner_function(&rho, spec)?;
    let report = HeraldReport {
        config: pipeline.config.clone(),
        q1,
        q2,
        herald_mode: herald_q,
        kept_mode: kept_q,
        p_success,
        w_min: wigner.min_value(),
        wigner_integral: wigner.integral(),
        wigner_csv: None,
    };
    Ok((report, wigner))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub config: RunConfig,
    pub modes: Vec<usize>,
    pub max_abs_discrepancy: f64,
    pub worst_entry: (usize, usize),
    pub seconds: f64,
}

/// Compare every covariance entry computed from Fock-state moments against
/// the symplectic route, for the unitary part of the generator.
pub fn crosscheck_fock_gaussian(pipeline: &Pipeline, modes: &[usize]) -> Result<CrosscheckReport> {
    let start = std::time::Instant::now();
    let gen = pipeline.generator.restrict(modes)?.hermitian_part();
    let evolved = evolve_vacuum(&gen, pipeline.config.numerics.n_cutoff, GeneratorMode::AsIs)?;
    let from_state = covariance_from_state(&evolved.state)?;
    let from_gen = covariance_from_generator(&gen)?;
    let mut worst = 0.0f64;
    let mut worst_entry = (0, 0);
    for ((i, j), v) in from_state.sigma.indexed_iter() {
        let d = (v - from_gen.sigma[(i, j)]).abs();
        if d > worst {
            worst = d;
            worst_entry = (i, j);
        }
    }
    let report = CrosscheckReport {
        config: pipeline.config.clone(),
        modes: modes.to_vec(),
        max_abs_discrepancy: worst,
        worst_entry,
        seconds: start.elapsed().as_secs_f64(),
    };
    if worst > 1e-4 {
        return Err(CoreError::InternalConsistency(format!(
            "backend covariance entries disagree by {worst:.3e} at {worst_entry:?} for modes {modes:?}"
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub config: RunConfig,
    /// χ_q as [re, im] pairs, index q−1.
    pub chi: Vec<[f64; 2]>,
    /// |χ_q|², index q−1.
    pub spectrum: Vec<f64>,
}

/// Coherent-amplitude harmonic spectrum |χ_q|².
pub fn harmonic_spectrum(pipeline: &Pipeline) -> SpectrumReport {
    let chi = pipeline.displacements();
    SpectrumReport {
        config: pipeline.config.clone(),
        chi: chi.chi.iter().map(|z| [z.re, z.im]).collect(),
        spectrum: chi.spectrum(),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_writer(std::fs::File::create(path)?))
}

/// Per-mode optimum data (both backends), one row per harmonic.
pub fn write_fig1_csv(report: &SqueezingReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "q",
        "theta_star_fock",
        "var_min_fock",
        "var_conj_fock",
        "product_fock",
        "r_fock",
        "db_fock",
        "theta_star_gaussian",
        "var_min_gaussian",
        "var_conj_gaussian",
        "product_gaussian",
        "r_gaussian",
        "db_gaussian",
        "norm_deficit",
    ])?;
    for rec in &report.records {
        w.write_record([
            rec.q.to_string(),
            rec.fock.theta_star.to_string(),
            rec.fock.var_min.to_string(),
            rec.fock.var_conj.to_string(),
            rec.fock.product.to_string(),
            rec.fock.r.to_string(),
            rec.fock.db.to_string(),
            rec.gaussian.theta_star.to_string(),
            rec.gaussian.var_min.to_string(),
            rec.gaussian.var_conj.to_string(),
            rec.gaussian.product.to_string(),
            rec.gaussian.r.to_string(),
            rec.gaussian.db.to_string(),
            rec.norm_deficit.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Coupling sweep of the squeezing in dB, one row per (coupling, mode).
pub fn write_fig2a_csv(report: &SqueezingReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["n_at_gl2", "q", "db"])?;
    for point in &report.sweep {
        for (idx, db) in point.db_by_q.iter().enumerate() {
            w.write_record([
                point.n_at_gl2.to_string(),
                (idx + 1).to_string(),
                db.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_fig3a_csv(report: &TwoModeReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["q1", "q2", "lambda_max", "lambda_min"])?;
    for rec in &report.records {
        w.write_record([
            rec.q1.to_string(),
            rec.q2.to_string(),
            rec.lambda_max.to_string(),
            rec.lambda_min.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fig3b_csv(report: &TwoModeReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["q1", "q2", "log_negativity"])?;
    for rec in &report.records {
        w.write_record([
            rec.q1.to_string(),
            rec.q2.to_string(),
            rec.log_negativity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wigner samples as `x,p,w` rows.
pub fn write_wigner_csv(grid: &WignerGrid, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "p", "w"])?;
    for (i, &x) in grid.xs.iter().enumerate() {
        for (j, &p) in grid.ps.iter().enumerate() {
            w.write_record([x.to_string(), p.to_string(), grid.values[(i, j)].to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv(report: &SpectrumReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["q", "re_chi", "im_chi", "abs_chi_sq"])?;
    for (idx, ([re, im], p)) in report.chi.iter().zip(&report.spectrum).enumerate() {
        w.write_record([
            (idx + 1).to_string(),
            re.to_string(),
            im.to_string(),
            p.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// dB value under the configured reporting convention.
pub fn db_for_report(var_min: f64, config: &RunConfig) -> f64 {
    squeezing_db(var_min, config.io.db_convention)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::{DipoleSeries, MIN_SAMPLES};
    use crate::pulse::EnvelopeKind;
    use num_complex::Complex64 as C64;

    /// Pipeline with a manufactured dipole series (no SFA computation).
    fn synthetic_pipeline(mu_eg: impl Fn(f64) -> C64, mu_ee: impl Fn(f64) -> C64) -> Pipeline {
        let mut config = RunConfig::default();
        config.numerics.n_cutoff = 20;
        config.physics.q_max = 4;
        config.pulse.e0_au = Some(0.05);
        config.pulse.omega_au = Some(0.057);
        config.pulse.n_cycles = 2;
        let config = config.resolved();
        let pulse = config.laser_pulse().unwrap();
        let grid = config.mode_grid().unwrap();
        let n = MIN_SAMPLES;
        let dt = pulse.t_end() / (n - 1) as f64;
        let ts: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let series = DipoleSeries::new(
            0.0,
            dt,
            vec![C64::new(0.0, 0.0); n],
            ts.iter().map(|&t| mu_eg(t).conj()).collect(),
            ts.iter().map(|&t| mu_eg(t)).collect(),
            ts.iter().map(|&t| mu_ee(t)).collect(),
        )
        .unwrap();
        let generator = generator_coefficients(
            &series,
            &pulse,
            &grid,
            config.physics.n_at_gl2,
            &config.quad_options(),
        )
        .unwrap();
        Pipeline { config, pulse, grid, series, generator }
    }

    #[test]
    fn zero_cross_dipole_scan_reports_no_squeezing() {
        let pipeline = synthetic_pipeline(|_| C64::new(0.0, 0.0), |t| C64::new(t.cos(), 0.0));
        let report = single_mode_scan(&pipeline).unwrap();
        for rec in &report.records {
            assert!(rec.fock.r.abs() < 1e-12, "mode {} has r = {}", rec.q, rec.fock.r);
            assert!(rec.gaussian.r.abs() < 1e-12);
            assert!((rec.fock.var_min - 0.5).abs() < 1e-12);
            assert!(rec.norm_deficit.abs() < 1e-12);
        }
        let two = two_mode_scan(&pipeline).unwrap();
        for rec in &two.records {
            assert!(rec.log_negativity.abs() < 1e-10);
            assert!((rec.lambda_max - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_coupling_herald_is_impossible() {
        let pipeline = synthetic_pipeline(|_| C64::new(0.0, 0.0), |_| C64::new(0.0, 0.0));
        let err = herald_pipeline(&pipeline, 1, 3, HeraldOn::Q2, &WignerGridSpec::default())
            .unwrap_err();
        assert!(matches!(err, CoreError::HeraldImpossible { .. }));
    }

    #[test]
    fn herald_rejects_equal_modes() {
        let pipeline = synthetic_pipeline(|_| C64::new(0.0, 0.0), |_| C64::new(0.0, 0.0));
        assert!(matches!(
            herald_pipeline(&pipeline, 2, 2, HeraldOn::Q1, &WignerGridSpec::default()),
            Err(CoreError::Validation(_))
        ));
    }

    #[test]
    fn monochromatic_excited_dipole_concentrates_the_spectrum() {
        let omega = 0.057;
        let pipeline =
            synthetic_pipeline(|_| C64::new(0.0, 0.0), move |t| C64::new((omega * t).cos(), 0.0));
        let report = harmonic_spectrum(&pipeline);
        let total: f64 = report.spectrum.iter().sum();
        assert!(report.spectrum[0] > 0.99 * total, "fundamental dominates: {:?}", report.spectrum);
        // |χ_q|² scales as g_L² at fixed dipole: doubling g_L quadruples it.
        let mut config2 = pipeline.config.clone();
        config2.physics.g_l *= 2.0;
        let pipeline2 = Pipeline {
            config: config2.resolved(),
            pulse: pipeline.pulse,
            grid: ModeGrid::new(
                pipeline.grid.q_c,
                pipeline.grid.omega_l,
                pipeline.grid.g_l * 2.0,
            )
            .unwrap(),
            series: pipeline.series.clone(),
            generator: pipeline.generator.clone(),
        };
        let report2 = harmonic_spectrum(&pipeline2);
        assert!((report2.spectrum[0] / report.spectrum[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn crosscheck_passes_on_synthetic_correlated_dipole() {
        let pipeline = synthetic_pipeline(
            |t| C64::new((0.057 * t).cos() * 0.02, (0.114 * t).sin() * 0.012),
            |_| C64::new(0.0, 0.0),
        );
        let report = crosscheck_fock_gaussian(&pipeline, &[1, 2]).unwrap();
        assert!(report.max_abs_discrepancy < 1e-5, "{report:?}");
    }

    #[test]
    fn sweep_grid_is_log_spaced_and_pinned() {
        let sweep = default_sweep();
        assert_eq!(sweep.len(), 17);
        assert!((sweep[0] - 1e-4).abs() < 1e-12);
        assert!((sweep[16] - 2.0).abs() < 1e-12);
        let ratio = sweep[1] / sweep[0];
        for k in 1..16 {
            assert!((sweep[k + 1] / sweep[k] - ratio).abs() < 1e-9);
        }
    }
}
