//! Adaptive Gauss–Kronrod (10/21) quadrature for complex-valued integrands
//! and angular rules on the unit sphere.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::{Complex64, Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute tolerance on the total error estimate.
    pub tol: f64,
    /// Number of equal pieces the interval is cut into before adapting.
    pub initial_pieces: usize,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            initial_pieces: 4,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// Single 21-point Kronrod panel with the embedded 10-point Gauss estimate.
pub fn gk21<F>(f: &F, a: f64, b: f64) -> Estimate
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let err = ((kron - gauss) * half).norm();
    let ah = half.abs();
    Estimate {
        value: kron * half,
        err: rescale_error(err, res_abs * ah, res_asc * ah),
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// On failure the error carries the best estimate of the real part.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let n0 = opts.initial_pieces.max(1);
    let h = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(opts.max_intervals + n0);
    for k in 0..n0 {
        let (lo, hi) = (a + h * k as f64, if k + 1 == n0 { b } else { a + h * (k + 1) as f64 });
        let e = gk21(&f, lo, hi);
        heap.push(Piece { a: lo, b: hi, value: e.value, err: e.err });
    }
    loop {
        let (value, err) = totals(&heap);
        if err <= opts.tol {
            return Ok(Estimate { value, err });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNotConverged { best: value.re, err });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let (value, err) = totals(&heap);
            return Err(Error::QuadratureNotConverged { best: value.re, err });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let e = gk21(&f, lo, hi);
            heap.push(Piece { a: lo, b: hi, value: e.value, err: e.err });
        }
    }
}

fn totals(heap: &BinaryHeap<Piece>) -> (Complex64, f64) {
    // Sum in interval order so the result does not depend on heap layout.
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    pieces.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| {
        (v + p.value, e + p.err)
    })
}

/// Nodes and weights on the unit sphere; weights sum to 4π.
#[derive(Debug, Clone)]
pub struct AngularRule {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl AngularRule {
    /// The antipodal pair ±ẑ with weight 2π each. Exact for every integrand
    /// of the form a + b·n̂, which covers all sphere averages of couplings
    /// whose spinor direction does not depend on the angle.
    pub fn antipodal() -> Self {
        AngularRule {
            nodes: vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
            weights: vec![2.0 * PI, 2.0 * PI],
        }
    }

    /// Gauss–Legendre in cos θ times the trapezoid rule in φ; integrates
    /// spherical harmonics up to degree `min(2·n_theta − 1, n_phi − 1)`
    /// exactly.
    pub fn product(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let dphi = 2.0 * PI / n_phi as f64;
        for (ct, wt) in x.iter().zip(w.iter()) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = (k as f64 + 0.5) * dphi;
                nodes.push([st * phi.cos(), st * phi.sin(), *ct]);
                weights.push(wt * dphi);
            }
        }
        AngularRule { nodes, weights }
    }

    /// Σ wᵢ f(n̂ᵢ).
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn([f64; 3]) -> Complex64,
    {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .fold(Complex64::new(0.0, 0.0), |acc, (n, w)| acc + f(*n) * *w)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}
