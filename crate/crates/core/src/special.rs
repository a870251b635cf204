//! Log-gamma and multivariate log-beta.
//!
//! `ln_gamma` uses a Lanczos approximation (r = 10.900511, 11 terms) for
//! non-integer arguments and an exact factorial table for small integers, so
//! `ln_gamma(1) == ln_gamma(2) == 0.0` exactly.
//!
//! `ln_beta2` keeps relative accuracy when one argument is large by computing
//! `ln Γ(b) − ln Γ(a + b)` from the Stirling series difference instead of
//! subtracting two large log-gamma values.

use std::f64::consts::{E, PI};

const LANCZOS_R: f64 = 10.900511;
const LANCZOS_COEFFS: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
/// ln(2·sqrt(e/π))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_222_345_518_445_781_647_212_251_852_647_9;
/// ln(sqrt(2π))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_639_861_397_473_6;

/// Largest integer argument served from the factorial table.
const FACTORIAL_TABLE_MAX: usize = 171;
/// Arguments at or above this use the Stirling difference in `ln_beta2`.
const STIRLING_MIN: f64 = 10.0;

fn ln_factorial_table() -> &'static [f64; FACTORIAL_TABLE_MAX] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_MAX]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // table[k] = ln(k!) for k < 171; k! is finite in f64 up to 170!
        let mut table = [0.0; FACTORIAL_TABLE_MAX];
        let mut fact = 1.0_f64;
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *slot = fact.ln();
        }
        table
    })
}

/// Natural log of the gamma function for `x > 0`.
///
/// Returns NaN for non-positive or NaN input.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x.fract() == 0.0 && x <= FACTORIAL_TABLE_MAX as f64 {
        return ln_factorial_table()[x as usize - 1];
    }
    if x < 0.5 {
        let s = LANCZOS_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEFFS[0], |s, (i, c)| s + c / (i as f64 - x));
        PI.ln()
            - (PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_R) / E).ln()
    } else {
        let s = LANCZOS_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEFFS[0], |s, (i, c)| s + c / (x + i as f64 - 1.0));
        s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / E).ln()
    }
}

/// Remainder of the Stirling series, `ln Γ(x) − [(x−½)ln x − x + ln √(2π)]`,
/// accurate to double precision for `x ≥ 10`.
fn stirling_remainder(x: f64) -> f64 {
    // Bernoulli terms B_{2k} / (2k(2k−1) x^{2k−1})
    const TERMS: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in TERMS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln Γ(x)` through the Stirling series; used only for `x ≥ STIRLING_MIN`.
fn ln_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_remainder(x)
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta2(a: f64, b: f64) -> f64 {
    if !(a > 0.0 && b > 0.0) {
        return f64::NAN;
    }
    let (small, large) = if a <= b { (a, b) } else { (b, a) };
    if large < STIRLING_MIN {
        return ln_gamma(small) + ln_gamma(large) - ln_gamma(small + large);
    }
    // ln Γ(large) − ln Γ(small + large) without forming either term.
    let sum = small + large;
    let diff = -(sum - 0.5) * (small / large).ln_1p() - small * large.ln()
        + small
        + (stirling_remainder(large) - stirling_remainder(sum));
    let head = if small < STIRLING_MIN { ln_gamma(small) } else { ln_gamma_stirling(small) };
    head + diff
}

/// Multivariate `ln B(z) = Σ ln Γ(z_c) − ln Γ(Σ z_c)`.
///
/// Evaluated as a chain of two-argument betas,
/// `B(z₁,…,z_C) = Π_k B(z₁+…+z_{k−1}, z_k)`, which keeps the relative error
/// small for large pseudo-counts. A single component gives 0.
pub fn ln_beta(z: &[f64]) -> f64 {
    let mut iter = z.iter();
    let Some(&first) = iter.next() else {
        return 0.0;
    };
    let mut running = first;
    let mut acc = 0.0;
    for &zc in iter {
        acc += ln_beta2(running, zc);
        running += zc;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// ln((n-1)!) summed term by term; independent of the factorial table.
    fn ln_factorial_sum(n: u32) -> f64 {
        (2..n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn integer_arguments_match_log_factorials() {
        for n in 1..=170u32 {
            let expected = ln_factorial_sum(n);
            assert_relative_eq!(ln_gamma(n as f64), expected, max_relative = 1e-13, epsilon = 1e-300);
        }
        assert_eq!(ln_gamma(1.0), 0.0);
        assert_eq!(ln_gamma(2.0), 0.0);
    }

    #[test]
    fn non_integer_arguments_match_reference() {
        // 40-digit mpmath references
        let cases = [
            (0.5, 0.572_364_942_924_700_087_071_713_7),
            (1.5, -0.120_782_237_635_245_222_345_518_4),
            (2.5, 0.284_682_870_472_919_159_632_494_7),
            (10.5, 13.940_625_219_403_763_633_161_24),
            (100.5, 361.435_540_467_777_621_555_251_9),
            (1000.5, 5_908.674_175_848_677_488_683_875),
            (12345.5, 103_958.242_965_123_229_131_571_8),
            (1_000_000.5, 12_815_511.476_902_765_642_114_02),
            (0.1, 2.252_712_651_734_205_902_006_238),
            (3.7, 1.428_072_326_665_388_129_200_498),
            (200.0, 857.933_669_825_857_436_818_253_4),
        ];
        for (x, expected) in cases {
            assert_relative_eq!(ln_gamma(x), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn ln_beta_half_integer_references() {
        let cases = [
            (0.5, 0.5, 1.144_729_885_849_400_174_143_427),
            (1.5, 2.5, -1.627_858_836_390_381_063_525_501),
            (10.5, 0.5, -0.591_422_410_747_051_574_992_757_8),
            (0.5, 1_000_000.5, -6.335_390_461_057_436_964_977_052),
            (1_000_000.5, 1_000_000.5, -1_386_300.696_510_351_676_271_429),
            (3.5, 999_999.5, -47.153_315_975_520_260_142_514_92),
            (250.5, 17.5, -65.143_150_536_785_639_121_542_21),
            (12.5, 12.5, -17.316_034_374_239_427_786_825_1),
            (100_000.5, 0.5, -5.184_099_039_560_414_117_764_932),
        ];
        for (a, b, expected) in cases {
            assert_relative_eq!(ln_beta(&[a, b]), expected, max_relative = 1e-12);
            assert_relative_eq!(ln_beta(&[b, a]), expected, max_relative = 1e-12);
        }
        assert_relative_eq!(
            ln_beta(&[1.5, 2.5, 7.5]),
            -8.593_735_606_970_834_427_799_26,
            max_relative = 1e-12
        );
    }

    #[test]
    fn small_integer_betas_are_exact_factorial_ratios() {
        assert_eq!(ln_beta(&[1.0, 1.0]), 0.0);
        // B(4,3) = 3!·2!/6! = 1/60
        assert_relative_eq!(ln_beta(&[4.0, 3.0]), (1.0f64 / 60.0).ln(), max_relative = 1e-14);
        // B(4,1) = 3!/4! = 1/4
        assert_relative_eq!(ln_beta(&[4.0, 1.0]), (0.25f64).ln(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ln_gamma(0.0).is_nan());
        assert!(ln_gamma(-1.5).is_nan());
        assert!(ln_beta2(0.0, 1.0).is_nan());
    }

    #[test]
    fn stirling_branch_agrees_with_lanczos_at_switch() {
        for x in [10.0, 10.25, 11.5, 25.75, 60.5] {
            assert_relative_eq!(ln_gamma_stirling(x), ln_gamma(x), max_relative = 1e-14);
        }
    }
}
