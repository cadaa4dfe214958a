//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and semi-infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae; odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`] and [`integrate_to_infinity`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections per finite panel.
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_subdivisions: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One 15-point Kronrod evaluation; the error is the Kronrod/Gauss gap.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`: the panel with the
/// largest error estimate is bisected until the total error meets
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let first = kronrod15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::QuadratureNonConvergence { achieved: f64::INFINITY });
    }
    let mut total = first;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, est: first });

    for _ in 0..opts.max_subdivisions {
        let target = opts.abs_tol.max(opts.rel_tol * total.value.abs());
        if total.error <= target {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point.
            heap.push(worst);
            break;
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push(Panel { a: worst.a, b: mid, est: left });
        heap.push(Panel { a: mid, b: worst.b, est: right });
    }

    // Re-sum to shed accumulated cancellation from the running totals.
    let value: f64 = heap.iter().map(|p| p.est.value).sum();
    let error: f64 = heap.iter().map(|p| p.est.error).sum();
    let target = opts.abs_tol.max(opts.rel_tol * value.abs());
    if error <= target {
        Ok(Estimate { value, error })
    } else {
        Err(Error::QuadratureNonConvergence { achieved: error })
    }
}

/// Integrates a nonnegative, eventually decreasing `f` over `[start, inf)`.
///
/// The range is cut into panels `[start + s*2^(k-1), start + s*2^k]`
/// (plus an initial `[start, start + s]`) that are each integrated
/// adaptively. Marching stops once `tail_bound(b)` — an upper bound on the
/// integrand beyond `b` — times the panel length is negligible against the
/// running total.
pub fn integrate_to_infinity<F, T>(
    f: F,
    start: f64,
    scale: f64,
    tail_bound: T,
    opts: &QuadratureOptions,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!("panel scale must be positive, got {scale}")));
    }
    const TAIL_CUTOFF: f64 = 1e-14;
    const MAX_PANELS: usize = 1100;

    let mut total = Estimate { value: 0.0, error: 0.0 };
    let mut lo = start;
    let mut width = scale;
    for _ in 0..MAX_PANELS {
        let hi = lo + width;
        if hi == lo {
            break;
        }
        let panel_opts = QuadratureOptions {
            abs_tol: opts.abs_tol.max(0.25 * opts.rel_tol * total.value.abs()),
            ..*opts
        };
        let piece = integrate(&f, lo, hi, &panel_opts)?;
        total.value += piece.value;
        total.error += piece.error;

        let bound = tail_bound(hi);
        let negligible = bound * (hi - start) <= 1e-3 * opts.rel_tol * total.value.abs()
            || bound == 0.0;
        if bound < TAIL_CUTOFF && negligible {
            return Ok(total);
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::QuadratureNonConvergence { achieved: f64::INFINITY })
}
