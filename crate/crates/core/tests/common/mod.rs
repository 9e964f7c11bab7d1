#![allow(dead_code)]

// Kronrod 15-point abscissae and weights, with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth >= 60 {
            return val;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_means(series: &[f64], batches: usize) -> (f64, f64) {
    let len = series.len() / batches;
    let used = &series[..len * batches];
    let mean = used.iter().sum::<f64>() / used.len() as f64;
    let bm: Vec<f64> = used.chunks(len).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    let var = bm.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

/// Kendall's tau of `(2/pi) asin(rho)` for a Gaussian copula, written out here
/// so tests do not lean on the library for the reference.
pub fn gaussian_tau(rho: f64) -> f64 {
    2.0 / std::f64::consts::PI * rho.asin()
}

pub fn report(criterion: u32, pass: bool, detail: &str) {
    println!("criterion {criterion:>2}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
}
