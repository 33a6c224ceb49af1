//! Driving pulse, harmonic mode grid and per-mode couplings.
//!
//! Everything is expressed in atomic units (ħ = m_e = |e| = 1). The driver
//! is a single carrier under a sin² envelope; harmonic mode q oscillates at
//! ω_q = q·ω_L and couples with g_q = g_L·√q.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Conversion constant: E0[a.u.] = sqrt(I0[W/cm²] / 3.509e16).
pub const INTENSITY_AU: f64 = 3.509e16;
/// Conversion constant: ω[a.u.] = 45.563 / λ[nm].
pub const WAVELENGTH_AU_NM: f64 = 45.563;

/// Peak field in atomic units from intensity in W/cm².
pub fn field_from_intensity(i0_w_cm2: f64) -> f64 {
    (i0_w_cm2 / INTENSITY_AU).sqrt()
}

/// Carrier angular frequency in atomic units from wavelength in nm.
pub fn frequency_from_wavelength(lambda_nm: f64) -> f64 {
    WAVELENGTH_AU_NM / lambda_nm
}

/// Coupling g_L from the collective control parameter N_at·g_L².
pub fn coupling_from_product(n_at: f64, n_at_gl2: f64) -> f64 {
    (n_at_gl2 / n_at).sqrt()
}

/// Envelope shapes for the driving pulse.
///
/// `Sin2` is the physical default; `Flat` (f ≡ 1 over the pulse window) is a
/// diagnostic envelope used by closed-form checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeKind {
    #[default]
    Sin2,
    Flat,
}

/// Classical driving pulse E_cl(t) = f(t)·E0·cos(ω_L t) on t ∈ [0, T].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LaserPulse {
    pub e0: f64,
    pub omega: f64,
    pub n_cycles: u32,
    pub envelope: EnvelopeKind,
}

impl LaserPulse {
    /// A zero-amplitude pulse (e0 = 0) is accepted as a degenerate diagnostic input.
    pub fn new(e0: f64, omega: f64, n_cycles: u32, envelope: EnvelopeKind) -> Result<Self> {
        let mut violations = Vec::new();
        if !(e0 >= 0.0) {
            violations.push(format!("peak field must be non-negative, got {e0}"));
        }
        if !(omega > 0.0) {
            violations.push(format!("carrier frequency must be positive, got {omega}"));
        }
        if n_cycles < 1 {
            violations.push("pulse must last at least one cycle".to_string());
        }
        if violations.is_empty() {
            Ok(LaserPulse { e0, omega, n_cycles, envelope })
        } else {
            Err(CoreError::Validation(violations))
        }
    }

    pub fn from_intensity_wavelength(
        i0_w_cm2: f64,
        lambda_nm: f64,
        n_cycles: u32,
    ) -> Result<Self> {
        if !(i0_w_cm2 >= 0.0) || !(lambda_nm > 0.0) {
            return Err(CoreError::validation(format!(
                "intensity must be >= 0 and wavelength > 0, got I0 = {i0_w_cm2}, lambda = {lambda_nm}"
            )));
        }
        LaserPulse::new(
            field_from_intensity(i0_w_cm2),
            frequency_from_wavelength(lambda_nm),
            n_cycles,
            EnvelopeKind::Sin2,
        )
    }

    pub fn t_start(&self) -> f64 {
        0.0
    }

    pub fn t_end(&self) -> f64 {
        self.n_cycles as f64 * 2.0 * std::f64::consts::PI / self.omega
    }

    pub fn duration(&self) -> f64 {
        self.t_end()
    }

    /// Envelope f(t) ∈ [0, 1]; zero outside the pulse window.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < self.t_start() || t > self.t_end() {
            return 0.0;
        }
        match self.envelope {
            EnvelopeKind::Sin2 => {
                let x = std::f64::consts::PI * t / self.duration();
                let s = x.sin();
                s * s
            }
            EnvelopeKind::Flat => 1.0,
        }
    }

    /// E_cl(t) = f(t)·E0·cos(ω_L t); errors outside the pulse window.
    pub fn classical_field(&self, t: f64) -> Result<f64> {
        if t < self.t_start() || t > self.t_end() {
            return Err(CoreError::Domain(format!(
                "time {t} outside pulse window [0, {}]",
                self.t_end()
            )));
        }
        Ok(self.envelope(t) * self.e0 * (self.omega * t).cos())
    }

    /// Same as [`classical_field`](Self::classical_field) but zero outside the window.
    pub fn field_unchecked(&self, t: f64) -> f64 {
        self.envelope(t) * self.e0 * (self.omega * t).cos()
    }

    /// Closed-form vector potential A = -∫E and its running integrals.
    pub fn vector_potential(&self) -> VectorPotential {
        VectorPotential::from_pulse(self)
    }
}

/// Vector potential A(t) = Σ_k a_k sin(ν_k t) + λt with exact antiderivatives.
///
/// The sin²·cos driver decomposes into at most three cosine lines, so A, ∫A
/// and ∫A² all have closed forms. The λt piece only appears for single-cycle
/// sin² pulses, where one spectral line degenerates to zero frequency.
#[derive(Debug, Clone)]
pub struct VectorPotential {
    terms: Vec<(f64, f64)>, // (amplitude, frequency) of sin components
    linear: f64,
}

impl VectorPotential {
    fn from_pulse(pulse: &LaserPulse) -> Self {
        // E(t) = Σ e_k cos(ν_k t); A(t) = -Σ e_k sin(ν_k t)/ν_k (or -e_k t at ν = 0).
        let w = pulse.omega;
        let lines: Vec<(f64, f64)> = match pulse.envelope {
            EnvelopeKind::Flat => vec![(pulse.e0, w)],
            EnvelopeKind::Sin2 => {
                let big_omega = std::f64::consts::PI / pulse.duration();
                vec![
                    (pulse.e0 / 2.0, w),
                    (-pulse.e0 / 4.0, w + 2.0 * big_omega),
                    (-pulse.e0 / 4.0, w - 2.0 * big_omega),
                ]
            }
        };
        let mut terms = Vec::new();
        let mut linear = 0.0;
        for (e, nu) in lines {
            if nu.abs() < 1e-14 * w {
                linear -= e;
            } else {
                terms.push((-e / nu, nu));
            }
        }
        VectorPotential { terms, linear }
    }

    /// A(t).
    pub fn a(&self, t: f64) -> f64 {
        let mut v = self.linear * t;
        for &(amp, nu) in &self.terms {
            v += amp * (nu * t).sin();
        }
        v
    }

    /// ∫₀ᵗ A ds.
    pub fn int_a(&self, t: f64) -> f64 {
        let mut v = 0.5 * self.linear * t * t;
        for &(amp, nu) in &self.terms {
            v += amp * (1.0 - (nu * t).cos()) / nu;
        }
        v
    }

    /// ∫₀ᵗ A² ds.
    pub fn int_a_sq(&self, t: f64) -> f64 {
        // ∫ cos(μ s) ds with the μ → 0 limit.
        fn int_cos(mu: f64, t: f64) -> f64 {
            if mu.abs() < 1e-300 {
                t
            } else {
                (mu * t).sin() / mu
            }
        }
        let mut v = self.linear * self.linear * t * t * t / 3.0;
        for &(ai, ni) in &self.terms {
            if self.linear != 0.0 {
                // 2λ a_i ∫ s sin(ν s) ds
                v += 2.0 * self.linear * ai * ((ni * t).sin() / (ni * ni) - t * (ni * t).cos() / ni);
            }
            for &(aj, nj) in &self.terms {
                v += 0.5 * ai * aj * (int_cos(ni - nj, t) - int_cos(ni + nj, t));
            }
        }
        v
    }
}

/// Harmonic mode ladder: ω_q = q·ω_L, g_q = g_L·√q for q ∈ [1, q_c].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeGrid {
    pub q_c: usize,
    pub omega_l: f64,
    pub g_l: f64,
}

impl ModeGrid {
    pub fn new(q_c: usize, omega_l: f64, g_l: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if q_c < 1 {
            violations.push("mode grid needs at least the fundamental (q_c >= 1)".to_string());
        }
        if !(omega_l > 0.0) {
            violations.push(format!("fundamental frequency must be positive, got {omega_l}"));
        }
        if !(g_l > 0.0) {
            violations.push(format!("coupling scale g_L must be positive, got {g_l}"));
        }
        if violations.is_empty() {
            Ok(ModeGrid { q_c, omega_l, g_l })
        } else {
            Err(CoreError::Validation(violations))
        }
    }

    pub fn frequency(&self, q: usize) -> f64 {
        q as f64 * self.omega_l
    }

    pub fn coupling(&self, q: usize) -> f64 {
        self.g_l * (q as f64).sqrt()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (1..=self.q_c).map(|q| self.frequency(q)).collect()
    }
}

/// Per-mode couplings g_q = g_L·√q, length q_c.
pub fn coupling_constants(grid: &ModeGrid) -> Vec<f64> {
    (1..=grid.q_c).map(|q| grid.coupling(q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig5_pulse() -> LaserPulse {
        LaserPulse::from_intensity_wavelength(1e14, 800.0, 6).unwrap()
    }

    #[test]
    fn unit_conversion_matches_reported_parameters() {
        let p = fig5_pulse();
        assert!((p.e0 - 0.053).abs() < 1e-3, "E0 = {}", p.e0);
        assert!((p.omega - 0.057).abs() < 1e-3, "omega = {}", p.omega);
    }

    #[test]
    fn envelope_vanishes_at_edges_and_peaks_at_center() {
        let p = fig5_pulse();
        assert_eq!(p.classical_field(p.t_start()).unwrap(), 0.0);
        assert!(p.envelope(p.t_end()).abs() < 1e-12);
        assert!((p.envelope(p.duration() / 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_bounded_by_peak() {
        let p = fig5_pulse();
        for k in 0..=5000 {
            let t = p.t_end() * k as f64 / 5000.0;
            assert!(p.classical_field(t).unwrap().abs() <= p.e0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn field_outside_window_is_domain_error() {
        let p = fig5_pulse();
        assert!(matches!(p.classical_field(-1.0), Err(CoreError::Domain(_))));
        assert!(matches!(p.classical_field(p.t_end() + 1.0), Err(CoreError::Domain(_))));
    }

    #[test]
    fn couplings_scale_with_sqrt_q() {
        let grid = ModeGrid::new(4, 0.057, 2.0).unwrap();
        let g = coupling_constants(&grid);
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 2.0);
        assert!((g[3] - 4.0).abs() < 1e-15); // sqrt(4) = 2 times g_L
    }

    #[test]
    fn frequency_ladder_is_exactly_integer() {
        let grid = ModeGrid::new(9, 0.057, 1e-8).unwrap();
        for q in 1..=9 {
            assert_eq!(grid.frequency(q) / grid.omega_l, q as f64);
        }
    }

    #[test]
    fn coupling_from_collective_parameter() {
        // N_at g_L² = 1 with N_at = 1e16 pins g_L = 1e-8.
        assert!((coupling_from_product(1e16, 1.0) - 1e-8).abs() < 1e-22);
    }

    #[test]
    fn nonpositive_coupling_rejected() {
        assert!(ModeGrid::new(3, 0.057, 0.0).is_err());
        assert!(ModeGrid::new(3, 0.057, -1.0).is_err());
    }

    /// Closed-form A, ∫A, ∫A² against a fine trapezoid oracle.
    #[test]
    fn vector_potential_antiderivatives_match_quadrature() {
        for n_cycles in [1u32, 2, 6] {
            let p = LaserPulse::new(0.053, 0.057, n_cycles, EnvelopeKind::Sin2).unwrap();
            let va = p.vector_potential();
            let n = 400_000;
            let h = p.t_end() / n as f64;
            let mut a_acc = 0.0; // ∫ E
            let mut b_acc = 0.0; // ∫ A
            let mut c_acc = 0.0; // ∫ A²
            let mut prev_e = p.field_unchecked(0.0);
            let mut prev_a = va.a(0.0);
            let mut prev_a2 = prev_a * prev_a;
            for k in 1..=n {
                let t = k as f64 * h;
                let e = p.field_unchecked(t);
                a_acc += 0.5 * h * (prev_e + e);
                prev_e = e;
                let a_t = -a_acc;
                let a_cf = va.a(t);
                assert!(
                    (a_cf - a_t).abs() < 1e-6,
                    "A mismatch at t={t}: {a_cf} vs {a_t}"
                );
                b_acc += 0.5 * h * (prev_a + a_cf);
                c_acc += 0.5 * h * (prev_a2 + a_cf * a_cf);
                prev_a = a_cf;
                prev_a2 = a_cf * a_cf;
                if k % (n / 8) == 0 {
                    assert!((va.int_a(t) - b_acc).abs() < 1e-5, "∫A mismatch at t={t}");
                    assert!((va.int_a_sq(t) - c_acc).abs() < 1e-5, "∫A² mismatch at t={t}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn envelope_always_in_unit_interval(
            frac in 0.0f64..1.0,
            n_cycles in 1u32..12,
        ) {
            let p = LaserPulse::new(0.05, 0.057, n_cycles, EnvelopeKind::Sin2).unwrap();
            let f = p.envelope(frac * p.t_end());
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
