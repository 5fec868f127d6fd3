//! Error-function family and certified series tail bounds.
//!
//! `erf`/`erfc` are ported from the FreeBSD libm rational approximations
//! (via the Go standard library), accurate to a couple of ulps over the
//! whole double range. On top of them sit the scaled complement
//! `erfcx(x) = e^{x²}·erfc(x)` and the integrated-Gaussian kernel
//!
//! ```text
//! H(x) = e^{-x²}/√π − x·erfc(x) = 1/√π − ∫_0^x erfc(s) ds
//! ```
//!
//! which weights every term of the heat-content path expansion. For large x
//! the two addends of `H` cancel almost completely (`H(x) ≈ e^{-x²}/(2√π x²)`),
//! so `H` is evaluated through `erfcx` as `e^{-x²}·(1/√π − x·erfcx(x))`,
//! keeping the relative error near `2x²·ulp` instead of losing the result
//! entirely. The path-sum evaluators add up many near-cancelling `H` terms,
//! which is why the guard is not optional.
//!
//! The tail helpers at the bottom turn the combinatorial path-count bound
//! `#(P_n ∩ P_{V_D}) ≤ 2·d_max^{n−1}` and the Gaussian bound
//! `H(x) ≤ e^{-x²}/√π` into closed-form geometric majorants for everything
//! the evaluators truncate away.

// The coefficient table keeps the published digit strings.
#![allow(clippy::excessive_precision)]

// Coefficients below are from FreeBSD's msun s_erf.c:
//
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.

const ERX: f64 = 8.450_629_115_104_675_3e-1;

// |x| < 0.84375
const PP0: f64 = 1.283_791_670_955_125_6e-1;
const PP1: f64 = -3.250_421_072_470_015e-1;
const PP2: f64 = -2.848_174_957_559_851e-2;
const PP3: f64 = -5.770_270_296_489_442e-3;
const PP4: f64 = -2.376_301_665_665_016_3e-5;
const QQ1: f64 = 3.979_172_239_591_553_5e-1;
const QQ2: f64 = 6.502_224_998_876_729e-2;
const QQ3: f64 = 5.081_306_281_875_766e-3;
const QQ4: f64 = 1.324_947_380_043_216_4e-4;
const QQ5: f64 = -3.960_228_278_775_368e-6;

// 0.84375 <= |x| < 1.25
const PA0: f64 = -2.362_118_560_752_659_4e-3;
const PA1: f64 = 4.148_561_186_837_483_4e-1;
const PA2: f64 = -3.722_078_760_357_013_3e-1;
const PA3: f64 = 3.183_466_199_011_617_5e-1;
const PA4: f64 = -1.108_946_942_823_966_8e-1;
const PA5: f64 = 3.547_830_432_561_823_6e-2;
const PA6: f64 = -2.166_375_594_868_790_8e-3;
const QA1: f64 = 1.064_208_804_008_442_3e-1;
const QA2: f64 = 5.403_979_177_021_710_4e-1;
const QA3: f64 = 7.182_865_441_419_627e-2;
const QA4: f64 = 1.261_712_198_087_616_4e-1;
const QA5: f64 = 1.363_708_391_202_905e-2;
const QA6: f64 = 1.198_449_984_679_910_7e-2;

// 1.25 <= |x| < 1/0.35
const RA0: f64 = -9.864_944_034_847_148e-3;
const RA1: f64 = -6.938_585_727_071_818e-1;
const RA2: f64 = -1.055_862_622_532_329_1e1;
const RA3: f64 = -6.237_533_245_032_6e1;
const RA4: f64 = -1.623_966_694_625_734_7e2;
const RA5: f64 = -1.846_050_929_067_110_4e2;
const RA6: f64 = -8.128_743_550_630_66e1;
const RA7: f64 = -9.814_329_344_169_146e0;
const SA1: f64 = 1.965_127_166_743_925_7e1;
const SA2: f64 = 1.376_577_541_435_190_4e2;
const SA3: f64 = 4.345_658_774_752_292_3e2;
const SA4: f64 = 6.453_872_717_332_679e2;
const SA5: f64 = 4.290_081_400_275_678_4e2;
const SA6: f64 = 1.086_350_055_417_794_4e2;
const SA7: f64 = 6.570_249_770_319_282e0;
const SA8: f64 = -6.042_441_521_485_81e-2;

// 1/0.35 <= |x| < 28
const RB0: f64 = -9.864_942_924_700_099e-3;
const RB1: f64 = -7.992_832_376_805_23e-1;
const RB2: f64 = -1.775_795_491_775_475_2e1;
const RB3: f64 = -1.606_363_848_558_219_2e2;
const RB4: f64 = -6.375_664_433_683_896e2;
const RB5: f64 = -1.025_095_131_611_077_2e3;
const RB6: f64 = -4.835_191_916_086_514e2;
const SB1: f64 = 3.033_806_074_348_246e1;
const SB2: f64 = 3.257_925_129_965_739_2e2;
const SB3: f64 = 1.536_729_586_084_437e3;
const SB4: f64 = 3.199_858_219_508_595_5e3;
const SB5: f64 = 2.553_050_406_433_164_4e3;
const SB6: f64 = 4.745_285_412_069_553_7e2;
const SB7: f64 = -2.244_095_244_658_581_8e1;

const TINY: f64 = 1.387_778_780_781_445_7e-17; // 2^-56
const VERY_TINY: f64 = 2.848_094_538_889_218e-306;
const EFX: f64 = 1.283_791_670_955_125_9e-1;
const EFX8: f64 = 1.027_033_336_764_100_7e0;

pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// 0.84375 <= |x| < 1.25 rational piece, shared by `erf` and `erfc`.
fn erf_mid(x: f64) -> f64 {
    let s = x - 1.0;
    let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
    let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
    p / q
}

/// `R/S` exponent correction for the asymptotic branches, `x >= 1.25`.
fn erfc_rs(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    if x < 1.0 / 0.35 {
        let r = RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7))))));
        let q = 1.0
            + s * (SA1
                + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8)))))));
        r / q
    } else {
        let r = RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6)))));
        let q = 1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7))))));
        r / q
    }
}

/// Error function `erf(x) = (2/√π) ∫_0^x e^{-s²} ds`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return -1.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    let r = if x < 0.84375 {
        if x < 3.725_290_298_461_914e-9 {
            if x < VERY_TINY {
                0.125 * (8.0 * x + EFX8 * x)
            } else {
                x + EFX * x
            }
        } else {
            let z = x * x;
            let p = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let q = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            x + x * (p / q)
        }
    } else if x < 1.25 {
        ERX + erf_mid(x)
    } else if x >= 6.0 {
        1.0
    } else {
        // pseudo-single-precision split keeps exp(-x²) to full accuracy
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let r = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + erfc_rs(x)).exp();
        1.0 - r / x
    };
    if sign {
        -r
    } else {
        r
    }
}

/// Complementary error function `erfc(x) = (2/√π) ∫_x^∞ e^{-s²} ds`.
///
/// Relative accuracy is a few ulps for `|x| <= 27`; past the underflow
/// boundary it returns exactly `0` (resp. `2`).
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    if x < 0.84375 {
        let temp = if x < TINY {
            x
        } else {
            let z = x * x;
            let p = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let q = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = x * (p / q);
            if x < 0.25 {
                x + y
            } else {
                0.5 + (y + (x - 0.5))
            }
        };
        return if sign { 1.0 + temp } else { 1.0 - temp };
    }
    if x < 1.25 {
        let p = erf_mid(x);
        return if sign { 1.0 + ERX + p } else { 1.0 - ERX - p };
    }
    if x < 28.0 {
        if sign && x > 6.0 {
            return 2.0;
        }
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let r = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + erfc_rs(x)).exp();
        return if sign { 2.0 - r / x } else { r / x };
    }
    if sign {
        2.0
    } else {
        0.0
    }
}

/// Scaled complementary error function `erfcx(x) = e^{x²}·erfc(x)`, `x >= 0`.
///
/// In the rational-approximation range the scaling cancels analytically
/// (`erfcx = e^{R/S − 0.5625}/x`), so no overflowing intermediate appears;
/// beyond `x = 28` the asymptotic series in `1/(2x²)` converges to machine
/// precision in a handful of terms.
pub fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 1.25 {
        return (x * x).exp() * erfc(x);
    }
    if x < 28.0 {
        return (erfc_rs(x) - 0.5625).exp() / x;
    }
    let u = 0.5 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -(2.0 * f64::from(k) - 1.0) * u;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() || k > 30 {
            break;
        }
    }
    sum * FRAC_1_SQRT_PI / x
}

/// Integrated-Gaussian kernel `H(x) = e^{-x²}/√π − x·erfc(x)`.
///
/// Strictly positive, strictly decreasing, strictly convex, with
/// `H(0) = 1/√π`, `H'(x) = −erfc(x)` and `H(x) ≤ e^{-x²}/√π` for `x ≥ 0`.
pub fn h(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // H(-x) = H(x) + 2x, both addends positive: no cancellation
        return h(-x) - 2.0 * x;
    }
    if x < 1.0 {
        (-x * x).exp() * FRAC_1_SQRT_PI - x * erfc(x)
    } else {
        (-x * x).exp() * (FRAC_1_SQRT_PI - x * erfcx(x))
    }
}

/// Absolute accuracy budget for a truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBudget(pub f64);

impl TailBudget {
    pub fn new(target_abs_error: f64) -> Self {
        assert!(
            target_abs_error > 0.0 && target_abs_error.is_finite(),
            "tail budget must be positive and finite"
        );
        TailBudget(target_abs_error)
    }
}

/// Closed-form majorant of the geometric-Gaussian tail
/// `Σ_{n > n0} d^n e^{-n² c}`.
///
/// Uses `n² − (n0+1)² ≥ (2n0+3)(n − n0 − 1)` to dominate the tail by a
/// geometric series. Returns `+∞` when the starting ratio
/// `d·e^{-(2n0+1)c}` is not below one, in which case the caller must raise
/// the cutoff.
pub(crate) fn geometric_gauss_tail(d: f64, c: f64, n0: u32) -> f64 {
    let n0f = f64::from(n0);
    let ratio_at_n0 = d * (-(2.0 * n0f + 1.0) * c).exp();
    if !(ratio_at_n0 < 1.0) {
        return f64::INFINITY;
    }
    let q = d * (-(2.0 * n0f + 3.0) * c).exp();
    // leading term d^{n0+1} e^{-(n0+1)² c}, evaluated in log space
    let ln_lead = (n0f + 1.0) * d.ln() - (n0f + 1.0) * (n0f + 1.0) * c;
    if ln_lead < -745.0 {
        return 0.0;
    }
    ln_lead.exp() / (1.0 - q)
}

/// Certified bound on the truncated-away part of the heat-content path sum.
///
/// The evaluator retains every directed boundary-to-boundary path of at most
/// `n0 = ⌈L/ℓ_min⌉` bonds — in particular every path of metric length at most
/// `L`, since `ℓ(p) ≥ #p·ℓ_min`. What is discarded are the paths with more
/// than `n0` bonds, of which there are at most `2·d_max^{n−1}` at `n` bonds,
/// each of length at least `n·ℓ_min` and weight `|α| ≤ 1`. Combining with
/// `H(x) ≤ e^{-x²}/√π` gives
///
/// ```text
/// 4√t·Σ_discarded |α(p)|·H(ℓ(p)/2√t)
///     ≤ (8√t/√π)·(1/d)·Σ_{n > n0} d^n e^{-n²ℓ_min²/4t},
/// ```
///
/// which this function evaluates by geometric domination. Returns `+∞` when
/// the ratio test fails at `n0` (caller must raise `L`). Non-increasing in
/// `L` and vanishing as `L → ∞` at fixed `t`.
pub fn path_tail_bound(d_max: usize, l_min: f64, t: f64, l_cutoff: f64) -> f64 {
    assert!(l_min > 0.0 && t > 0.0 && l_cutoff >= l_min);
    let n0 = (l_cutoff / l_min).ceil() as u32;
    let d = (d_max.max(1)) as f64;
    let c = l_min * l_min / (4.0 * t);
    let tail = geometric_gauss_tail(d, c, n0);
    4.0 * t.sqrt() * FRAC_1_SQRT_PI * (2.0 / d) * tail
}

/// Same construction for the Hadamard-derivative series, whose terms carry
/// an extra traversal count `#_{e0} p ≤ #p` against `erfc` instead of `H`.
/// With `erfc(x) ≤ e^{-x²}/(√π x)` the count cancels against the length:
/// `#p·erfc(#p·ℓ_min/2√t) ≤ 2√t e^{-(#p)²c}/(√π ℓ_min)`.
pub(crate) fn derivative_tail_bound(d_max: usize, l_min: f64, t: f64, n0: u32) -> f64 {
    let d = (d_max.max(1)) as f64;
    let c = l_min * l_min / (4.0 * t);
    let tail = geometric_gauss_tail(d, c, n0);
    2.0 * (2.0 / d) * 2.0 * t.sqrt() * FRAC_1_SQRT_PI / l_min * tail
}

/// Compensated (Neumaier) summation; the path sums mix signs heavily.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Total of |terms|, for rounding-slack estimates.
    pub fn abs_total(&self) -> f64 {
        self.abs
    }
}
