//! Log-domain adaptive Gauss–Kronrod integration.
//!
//! Integrates `exp(h(q))` for exponents `h` that can be astronomically large
//! or small. All interval estimates are held relative to a common log-scale
//! `shift`, which is raised (and the stored estimates rescaled) whenever a
//! newly evaluated node exceeds it, so nothing overflows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Margin kept between the running log-scale and any exponent seen, so that
/// `exp(h - shift)` stays far from overflow.
const HEADROOM: f64 = 1.0;

/// The 15 Kronrod abscissae of `[a, b]`, used for exponent pre-scans.
pub fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [center; 15];
    for j in 0..7 {
        out[2 * j] = center - half * XGK[j];
        out[2 * j + 1] = center + half * XGK[j];
    }
    out
}

/// Plain GK15 on a linear-scale integrand, returning `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Clone, Copy, Debug)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Global adaptive integrator for `∫ exp(h(q)) dq` over a union of intervals.
pub struct LogExpIntegrator<H> {
    h: H,
    shift: f64,
    heap: BinaryHeap<Interval>,
    value_sum: f64,
    error_sum: f64,
    max_depth: u32,
}

impl<H: Fn(f64) -> f64> LogExpIntegrator<H> {
    /// `shift_hint` should be close to the largest value of `h` on the domain;
    /// it is raised automatically if a larger exponent is encountered.
    pub fn new(h: H, shift_hint: f64) -> Self {
        let shift = if shift_hint.is_finite() { shift_hint } else { 0.0 };
        Self {
            h,
            shift,
            heap: BinaryHeap::new(),
            value_sum: 0.0,
            error_sum: 0.0,
            max_depth: 60,
        }
    }

    fn raise_shift(&mut self, new_shift: f64) {
        let factor = (self.shift - new_shift).exp();
        let drained: Vec<Interval> = self.heap.drain().collect();
        self.heap = drained
            .into_iter()
            .map(|mut iv| {
                iv.value *= factor;
                iv.error *= factor;
                iv
            })
            .collect();
        self.value_sum *= factor;
        self.error_sum *= factor;
        self.shift = new_shift;
    }

    fn evaluate(&mut self, a: f64, b: f64, depth: u32) -> Interval {
        let nodes = kronrod_nodes(a, b);
        let mut hs = [0.0f64; 15];
        let mut peak = f64::NEG_INFINITY;
        for (slot, &q) in hs.iter_mut().zip(nodes.iter()) {
            let v = (self.h)(q);
            *slot = v;
            if v > peak {
                peak = v;
            }
        }
        if peak > self.shift + HEADROOM {
            self.raise_shift(peak);
        }
        let shift = self.shift;
        // nodes are laid out as (center - dx_j, center + dx_j) pairs, then the center
        let center_term = (hs[14] - shift).exp();
        let mut kronrod = center_term * WGK[7];
        let mut gauss = center_term * WG[3];
        for j in 0..7 {
            let s = (hs[2 * j] - shift).exp() + (hs[2 * j + 1] - shift).exp();
            kronrod += WGK[j] * s;
            if j % 2 == 1 {
                gauss += WG[j / 2] * s;
            }
        }
        let half = 0.5 * (b - a);
        Interval {
            a,
            b,
            value: kronrod * half,
            error: ((kronrod - gauss) * half).abs(),
            depth,
        }
    }

    fn insert(&mut self, iv: Interval) {
        self.value_sum += iv.value;
        self.error_sum += iv.error;
        self.heap.push(iv);
    }

    /// Adds `[a, b]` and returns its current estimate as a natural log.
    pub fn push(&mut self, a: f64, b: f64) -> f64 {
        let iv = self.evaluate(a, b, 0);
        let out = iv.value.ln() + self.shift;
        self.insert(iv);
        out
    }

    /// Natural log of the running total.
    pub fn log_total(&self) -> f64 {
        self.value_sum.ln() + self.shift
    }

    /// Bisects the worst interval until the summed error estimate falls to
    /// `rel_tol` of the total or `max_intervals` is reached. Returns the log
    /// of the final total.
    pub fn refine(mut self, rel_tol: f64, max_intervals: usize) -> f64 {
        while self.heap.len() < max_intervals {
            if self.error_sum <= rel_tol * self.value_sum {
                break;
            }
            let Some(worst) = self.heap.pop() else { break };
            if worst.depth >= self.max_depth || worst.error <= f64::MIN_POSITIVE {
                // cannot make progress on this one; keep it and stop
                self.heap.push(worst);
                break;
            }
            self.value_sum -= worst.value;
            self.error_sum -= worst.error;
            let mid = 0.5 * (worst.a + worst.b);
            // insert each half before evaluating the next so a shift raise rescales it
            let left = self.evaluate(worst.a, mid, worst.depth + 1);
            self.insert(left);
            let right = self.evaluate(mid, worst.b, worst.depth + 1);
            self.insert(right);
        }
        // exact resum; the running sums drift under repeated subtraction
        self.heap.iter().map(|iv| iv.value).sum::<f64>().ln() + self.shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_is_exact_for_low_degree_polynomials() {
        // Kronrod-15 integrates degree 22 exactly; the embedded Gauss-7 degree 13
        let (k, e) = gk15(|x| x.powi(12) - 3.0 * x.powi(5) + 1.0, -1.0, 2.0);
        let exact = (2f64.powi(13) + 1.0) / 13.0 - 0.5 * (64.0 - 1.0) + 3.0;
        assert!((k - exact).abs() < 1e-10 * exact.abs(), "{k} vs {exact}");
        assert!(e < 1e-8);
    }

    #[test]
    fn log_integral_of_huge_exponential() {
        // log ∫_0^1 e^{1000 q} dq = 1000 + log((1 - e^{-1000}) / 1000)
        let mut integ = LogExpIntegrator::new(|q: f64| 1000.0 * q, 0.0);
        integ.push(0.0, 1.0);
        let got = integ.refine(1e-12, 2000);
        let want = 1000.0 + (1.0f64 / 1000.0).ln();
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn log_integral_matches_closed_form_gaussian() {
        // ∫_{-10}^{10} e^{-x²/2} dx ≈ sqrt(2π)
        let mut integ = LogExpIntegrator::new(|x: f64| -0.5 * x * x, 0.0);
        integ.push(-10.0, 0.0);
        integ.push(0.0, 10.0);
        let got = integ.refine(1e-13, 4000).exp();
        let want = (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - want).abs() < 1e-11, "{got} vs {want}");
    }
}
