//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands, plus the
//! uniform-grid helpers (cumulative Simpson, local cubic interpolation) used
//! by the generator integrals.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};

// 21-point Kronrod / 10-point Gauss nodes and weights on [-1, 1] (QUADPACK dqk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Convergence floor relative to ∫|f|: integrands built from
    /// cubic-interpolated samples have derivative kinks that cap the
    /// achievable accuracy near this level, well below the interpolation
    /// error itself.
    pub rel_resabs_floor: f64,
    /// At the subinterval cap, results with an error estimate below this
    /// are accepted rather than reported as non-convergent.
    pub cap_accept_abs: f64,
    /// Hard cap on the number of subintervals in the adaptive subdivision.
    pub max_subintervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            rel_resabs_floor: 1e-9,
            cap_accept_abs: 1e-7,
            max_subintervals: 1000,
        }
    }
}

impl QuadOptions {
    pub fn with_cap(max_subintervals: usize) -> Self {
        QuadOptions { max_subintervals, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: C64,
    pub abs_error: f64,
    pub subintervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    values: [C64; N],
    error: f64,
    resabs: f64,
}

fn gk21<const N: usize>(f: &mut impl FnMut(f64) -> [C64; N], a: f64, b: f64) -> Panel<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let zero = [C64::new(0.0, 0.0); N];
    let mut evals = [[C64::new(0.0, 0.0); N]; 21];
    evals[20] = f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        evals[2 * j] = f(center - dx);
        evals[2 * j + 1] = f(center + dx);
    }
    let mut kronrod = zero;
    let mut gauss = zero;
    let mut resabs = [0.0f64; N];
    for k in 0..N {
        kronrod[k] = WGK[10] * evals[20][k];
        resabs[k] = WGK[10] * evals[20][k].norm();
        for j in 0..10 {
            let fsum = evals[2 * j][k] + evals[2 * j + 1][k];
            kronrod[k] += WGK[j] * fsum;
            resabs[k] += WGK[j] * (evals[2 * j][k].norm() + evals[2 * j + 1][k].norm());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * fsum;
            }
        }
    }
    // QUADPACK-style tempered error: collapse the raw Gauss/Kronrod gap once
    // it drops below the panel variation scale, with a rounding floor.
    let mut values = zero;
    let mut error = 0.0f64;
    let habs = half.abs();
    for k in 0..N {
        values[k] = kronrod[k] * half;
        let mean = kronrod[k] * 0.5;
        let mut resasc = WGK[10] * (evals[20][k] - mean).norm();
        for j in 0..10 {
            resasc += WGK[j]
                * ((evals[2 * j][k] - mean).norm() + (evals[2 * j + 1][k] - mean).norm());
        }
        resasc *= habs;
        let raw = ((kronrod[k] - gauss[k]) * half).norm();
        let mut err = raw;
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        err = err.max(50.0 * f64::EPSILON * resabs[k] * habs);
        error += err;
    }
    let resabs_total = resabs.iter().sum::<f64>() * habs;
    Panel { a, b, values, error, resabs: resabs_total }
}

/// Result of a batched quadrature over `N` integrands sharing evaluations.
#[derive(Debug, Clone, Copy)]
pub struct MultiQuadResult<const N: usize> {
    pub values: [C64; N],
    pub abs_error: f64,
    pub subintervals: usize,
}

/// Integrate `N` integrands sharing the evaluation points over [a, b] with
/// adaptive bisection of the worst panel.
///
/// Fails with [`CoreError::QuadratureNonConvergent`] carrying the worst
/// subinterval if the tolerance is not met under the subinterval cap.
pub fn integrate_multi<const N: usize>(
    mut f: impl FnMut(f64) -> [C64; N],
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<MultiQuadResult<N>> {
    let zero = [C64::new(0.0, 0.0); N];
    if a == b {
        return Ok(MultiQuadResult { values: zero, abs_error: 0.0, subintervals: 1 });
    }
    let mut panels = vec![gk21(&mut f, a, b)];
    loop {
        let mut totals = zero;
        let mut err = 0.0f64;
        let mut resabs = 0.0f64;
        for p in &panels {
            for k in 0..N {
                totals[k] += p.values[k];
            }
            err += p.error;
            resabs += p.resabs;
        }
        let scale: f64 = totals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // The rounding/kink floor bounds what refinement can achieve; treat
        // reaching it as convergence.
        let tol = opts
            .abs_tol
            .max(opts.rel_tol * scale)
            .max(opts.rel_resabs_floor * resabs)
            .max(55.0 * f64::EPSILON * resabs);
        if err <= tol {
            return Ok(MultiQuadResult {
                values: totals,
                abs_error: err,
                subintervals: panels.len(),
            });
        }
        if panels.len() >= opts.max_subintervals {
            if err <= opts.cap_accept_abs {
                return Ok(MultiQuadResult {
                    values: totals,
                    abs_error: err,
                    subintervals: panels.len(),
                });
            }
            let worst = panels
                .iter()
                .max_by(|p, q| p.error.total_cmp(&q.error))
                .expect("at least one panel");
            return Err(CoreError::QuadratureNonConvergent {
                error_estimate: err,
                subintervals: panels.len(),
                worst_a: worst.a,
                worst_b: worst.b,
                context: String::new(),
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .expect("at least one panel");
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        panels.push(gk21(&mut f, pa, mid));
        panels.push(gk21(&mut f, mid, pb));
    }
}

/// Integrate a single complex integrand over [a, b].
pub fn integrate_complex(
    mut f: impl FnMut(f64) -> C64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let r = integrate_multi(|x| [f(x)], a, b, opts)?;
    Ok(QuadResult { value: r.values[0], abs_error: r.abs_error, subintervals: r.subintervals })
}

/// Cumulative integral of uniformly sampled data: each interval integrates
/// the cubic through the symmetric 4-point stencil around it (one-sided at
/// the ends), giving O(h⁴) accuracy at every sample.
///
/// Returns `out[k] = ∫_{t0}^{t_k} y dt` with `out[0] = 0`.
pub fn cumulative_simpson(y: &[C64], h: f64) -> Vec<C64> {
    let n = y.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    match n {
        0 | 1 => return out,
        2 => {
            out[1] = 0.5 * h * (y[0] + y[1]);
            return out;
        }
        3 => {
            out[1] = h / 12.0 * (5.0 * y[0] + 8.0 * y[1] - y[2]);
            out[2] = out[1] + h / 12.0 * (-y[0] + 8.0 * y[1] + 5.0 * y[2]);
            return out;
        }
        _ => {}
    }
    let c = h / 24.0;
    for k in 0..n - 1 {
        let seg = if k == 0 {
            c * (9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3])
        } else if k == n - 2 {
            c * (y[n - 4] - 5.0 * y[n - 3] + 19.0 * y[n - 2] + 9.0 * y[n - 1])
        } else {
            c * (-y[k - 1] + 13.0 * y[k] + 13.0 * y[k + 1] - y[k + 2])
        };
        out[k + 1] = out[k] + seg;
    }
    out
}

/// Uniform real-valued samples with 4-point (cubic Lagrange) interpolation.
#[derive(Debug, Clone)]
pub struct UniformRealGrid {
    pub t0: f64,
    pub h: f64,
    pub samples: Vec<f64>,
}

impl UniformRealGrid {
    pub fn new(t0: f64, h: f64, samples: Vec<f64>) -> Self {
        assert!(samples.len() >= 4, "cubic interpolation needs at least 4 samples");
        UniformRealGrid { t0, h, samples }
    }

    /// Cubic interpolation; clamps to the grid range.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.samples.len();
        let x = ((t - self.t0) / self.h).clamp(0.0, (n - 1) as f64);
        let j = (x as usize).clamp(1, n - 3);
        let s = x - j as f64;
        let (ym1, y0, y1, y2) =
            (self.samples[j - 1], self.samples[j], self.samples[j + 1], self.samples[j + 2]);
        let c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        ym1 * c0 + y0 * c1 + y1 * c2 + y2 * c3
    }
}

/// Uniform-grid data with 4-point (cubic Lagrange) interpolation.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    pub t0: f64,
    pub h: f64,
    pub samples: Vec<C64>,
}

impl UniformGrid {
    pub fn new(t0: f64, h: f64, samples: Vec<C64>) -> Self {
        assert!(samples.len() >= 4, "cubic interpolation needs at least 4 samples");
        UniformGrid { t0, h, samples }
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h * (self.samples.len() - 1) as f64
    }

    /// Cubic interpolation; clamps to the grid range.
    pub fn eval(&self, t: f64) -> C64 {
        let n = self.samples.len();
        let x = ((t - self.t0) / self.h).clamp(0.0, (n - 1) as f64);
        // Stencil [j-1, j, j+1, j+2] around the containing interval.
        let j = (x.floor() as usize).clamp(1, n - 3);
        let s = x - j as f64; // s ∈ [-1, 2] after clamping
        let (ym1, y0, y1, y2) =
            (self.samples[j - 1], self.samples[j], self.samples[j + 1], self.samples[j + 2]);
        let c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        ym1 * c0 + y0 * c1 + y1 * c2 + y2 * c3
    }
}
