//! Shared 1-D quadrature primitives: Gauss-Legendre panels, adaptive Simpson,
//! and compensated summation.

/// Kahan-compensated accumulator for long f64 sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
///
/// Only the nonnegative nodes are tabulated; the rule is symmetric.
const GL16_NODES: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_91,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_75,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_73,
    0.124_628_971_255_533_87,
    0.095_158_511_682_492_79,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_095,
];

/// Integrate `f` over `[a, b]` with `panels` panels of 16-point Gauss-Legendre.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = KahanSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for k in 0..8 {
            let x = GL16_NODES[k] * half;
            acc.add(GL16_WEIGHTS[k] * half * (f(mid + x) + f(mid - x)));
        }
    }
    acc.value()
}

/// Integrate with 2-point Gauss-Legendre panels (order 4). Used where a low
/// fixed order is wanted so refinement ratios are observable.
pub fn gauss_legendre_2pt(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let node = 1.0 / 3f64.sqrt();
    let h = (b - a) / panels as f64;
    let mut acc = KahanSum::new();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let x = node * 0.5 * h;
        acc.add(0.5 * h * (f(mid + x) + f(mid - x)));
    }
    acc.value()
}

/// Adaptive Simpson over `[a, b]` split into `pieces` equal panels first, so
/// an integrand concentrated between the coarse sample points cannot fool
/// the refinement test into stopping at zero.
pub fn adaptive_simpson_piecewise(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    pieces: usize,
    tol: f64,
) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut acc = KahanSum::new();
    for p in 0..pieces {
        acc.add(adaptive_simpson(f, a + p as f64 * h, a + (p + 1) as f64 * h, tol / pieces as f64));
    }
    acc.value()
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
