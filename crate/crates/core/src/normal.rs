//! Univariate and bivariate standard normal functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Standard normal CDF through the complementary error function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Inverse of [`std_normal_cdf`].
///
/// Acklam's rational approximation (relative error about 1e-9) followed by one
/// Newton step against the erfc-based CDF. The upper half is computed by
/// reflection so the Newton residual is always taken in the lower tail, where
/// `erfc` keeps full relative precision.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(p));
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    let x = acklam(p);
    let err = std_normal_cdf(x) - p;
    x - err / std_normal_pdf(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `P(X <= h, Y <= k)` for a standard bivariate normal with correlation `r`.
///
/// Genz's refinement of the Drezner–Wesolowsky single-integral reduction,
/// with 6, 12 or 20 point Gauss–Legendre rules depending on `|r|`.
/// Accurate to roughly 1e-15 in double precision.
pub fn bivariate_normal_cdf(h: f64, k: f64, r: f64) -> f64 {
    upper_orthant(-h, -k, r)
}

// P(X > dh, Y > dk)
fn upper_orthant(dh: f64, dk: f64, r: f64) -> f64 {
    if dh == f64::INFINITY || dk == f64::INFINITY {
        return 0.0;
    }
    if dh == f64::NEG_INFINITY {
        return if dk == f64::NEG_INFINITY {
            1.0
        } else {
            std_normal_cdf(-dk)
        };
    }
    if dk == f64::NEG_INFINITY {
        return std_normal_cdf(-dh);
    }
    if r == 0.0 {
        return std_normal_cdf(-dh) * std_normal_cdf(-dk);
    }

    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6_W, &GL6_X)
    } else if r.abs() < 0.75 {
        (&GL12_W, &GL12_X)
    } else {
        (&GL20_W, &GL20_X)
    };

    let tp = 2.0 * PI;
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        for (&wi, &xi) in w.iter().zip(x) {
            for node in [1.0 - xi, 1.0 + xi] {
                let sn = (asr * node).sin();
                bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / tp + std_normal_cdf(-h) * std_normal_cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = 1.0 - r * r;
            let mut a = a_s.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            let asr = -(bs / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (bs - a_s) * (1.0 - d * bs) / 3.0 + c * d * a_s * a_s);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = tp.sqrt() * std_normal_cdf(-b / a);
                bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            for (&wi, &xi) in w.iter().zip(x) {
                for node in [1.0 - xi, 1.0 + xi] {
                    let xs = (a * node) * (a * node);
                    let asr = -(bs / xs + hk) / 2.0;
                    if asr > -100.0 {
                        let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                        let rs = (1.0 - xs).sqrt();
                        let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                        bvn += a * wi * asr.exp() * (ep - sp);
                    }
                }
            }
            bvn = -bvn / tp;
        }
        if r > 0.0 {
            bvn += std_normal_cdf(-h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 {
                std_normal_cdf(k) - std_normal_cdf(h)
            } else {
                std_normal_cdf(-h) - std_normal_cdf(-k)
            };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

const GL6_W: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4];
const GL6_X: [f64; 3] = [0.932_469_514_203_152_2, 0.661_209_386_466_264_7, 0.238_619_186_083_197];

const GL12_W: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const GL12_X: [f64; 6] = [
    0.981_560_634_246_719_1,
    0.904_117_256_370_475,
    0.769_902_674_194_305,
    0.587_317_954_286_617_1,
    0.367_831_498_998_180_2,
    0.125_233_408_511_469_2,
];

const GL20_W: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];
const GL20_X: [f64; 10] = [
    0.993_128_599_185_094_9,
    0.963_971_927_277_913_8,
    0.912_234_428_251_325_9,
    0.839_116_971_822_218_8,
    0.746_331_906_460_150_8,
    0.636_053_680_726_515,
    0.510_867_001_950_827_1,
    0.373_706_088_715_419_6,
    0.227_785_851_141_645_1,
    0.076_526_521_133_497_33,
];

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson on the density; independent of the erfc route.
    fn integrate_pdf(lo: f64, hi: f64, panels: usize) -> f64 {
        let h = (hi - lo) / panels as f64;
        let mut s = std_normal_pdf(lo) + std_normal_pdf(hi);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * std_normal_pdf(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let eps = 1.0 - std_normal_cdf(8.0);
        assert!(eps < 1e-15 && eps >= 0.0);
        // 0.5 + integral over [0, 1.959964]
        let oracle = 0.5 + integrate_pdf(0.0, 1.959964, 20_000);
        assert!((std_normal_cdf(1.959964) - oracle).abs() < 1e-12);
        // mpmath: 0.975000000903557598
        assert!((std_normal_cdf(1.959964) - 0.975_000_000_903_557_6).abs() < 1e-12);
    }

    #[test]
    fn cdf_monotone_on_grid() {
        let mut prev = 0.0;
        for i in -4000..=4000 {
            let v = std_normal_cdf(i as f64 * 0.002);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        // bisection on the CDF, frozen via mpmath: 1.95996398454005423
        assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!(std_normal_quantile(1e-300).unwrap() < -37.0);
        for p in [1e-12, 0.01, 0.2, 0.37] {
            let a = std_normal_quantile(p).unwrap();
            let b = std_normal_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-6 * a.abs().max(1.0), "p={p}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let z = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(z) - p).abs() < 1e-9);
        }
        for p in [1e-10, 1e-6, 1.0 - 1e-6] {
            let z = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(z) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std_normal_quantile(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn bivariate_reference_points() {
        // mpmath single-integral quadrature at Phi^-1 of the listed (u, v).
        let cases = [
            (0.3, 0.7, 0.5, 0.266_903_848_867_363_1),
            (0.1, 0.2, -0.7, 0.000_298_123_934_777_122_6),
            (0.9, 0.95, 0.95, 0.897_333_789_777_230_5),
            (0.25, 0.6, -0.3, 0.111_883_661_109_479),
        ];
        for (u, v, r, want) in cases {
            let a = std_normal_quantile(u).unwrap();
            let b = std_normal_quantile(v).unwrap();
            let got = bivariate_normal_cdf(a, b, r);
            assert!((got - want).abs() < 1e-12, "({u},{v},{r}): {got} vs {want}");
        }
    }

    #[test]
    fn bivariate_limits() {
        assert!((bivariate_normal_cdf(0.0, 0.0, 0.0) - 0.25).abs() < 1e-15);
        let q = bivariate_normal_cdf(0.0, 0.0, 0.5);
        assert!((q - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(bivariate_normal_cdf(f64::INFINITY, f64::INFINITY, 0.3), 1.0);
        assert_eq!(bivariate_normal_cdf(f64::NEG_INFINITY, 0.4, 0.3), 0.0);
        let m = bivariate_normal_cdf(1.2, f64::INFINITY, -0.6);
        assert!((m - std_normal_cdf(1.2)).abs() < 1e-15);
    }
}
