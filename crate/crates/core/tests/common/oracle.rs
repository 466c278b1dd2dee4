//! Reference math written independently of the crate.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type Mat = DMatrix<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn sigma_x() -> Mat {
    Mat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn hadamard() -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])
}

pub fn swap() -> Mat {
    let mut m = Mat::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = c(1., 0.);
    }
    m
}

/// diag(0, 1, ..., n-1)
pub fn number(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| if i == j { c(i as f64, 0.) } else { c(0., 0.) })
}

/// a + a† on n levels.
pub fn ladder_sum(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            c((i.max(j) as f64).sqrt(), 0.)
        } else {
            c(0., 0.)
        }
    })
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Mat::from_row_slice(
        2,
        2,
        &[
            c(co, 0.),
            -C64::from_polar(si, lambda),
            C64::from_polar(si, phi),
            C64::from_polar(co, phi + lambda),
        ],
    )
}

/// Plain index-arithmetic Kronecker product, `a` as the outer factor.
fn kron(a: &Mat, b: &Mat) -> Mat {
    let (br, bc) = b.shape();
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Arguments in subsystem order; subsystem 0 is the least significant
/// (rightmost) factor.
pub fn kron2(s0: &Mat, s1: &Mat) -> Mat {
    kron(s1, s0)
}

pub fn kron3(s0: &Mat, s1: &Mat, s2: &Mat) -> Mat {
    kron(s2, &kron(s1, s0))
}

/// max |A - e^{ia} B| with a = arg tr(B† A).
pub fn phase_distance(a: &Mat, b: &Mat) -> f64 {
    let tr = (b.adjoint() * a).trace();
    let ph = if tr.norm() > 0.0 { tr / tr.norm() } else { c(1., 0.) };
    (a - b * ph).iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// Reduced density matrix of qubit `k` of an `n`-qubit state, qubit k being
/// bit k of the basis index.
pub fn reduced_qubit(psi: &[C64], n: usize, k: usize) -> Mat {
    assert_eq!(psi.len(), 1 << n);
    let mut rho = Mat::zeros(2, 2);
    let bit = 1 << k;
    for i in 0..psi.len() {
        if i & bit != 0 {
            continue;
        }
        let v = [psi[i], psi[i | bit]];
        for a in 0..2 {
            for b in 0..2 {
                rho[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    rho
}

/// Chi-square survival function with 3 degrees of freedom:
/// 1 - integral over u in [0, sqrt(x)] of 2 u^2 exp(-u^2/2) / sqrt(2 pi).
pub fn chi2_sf_3(x: f64) -> f64 {
    let f = |u: f64| 2.0 * u * u * (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let top = x.max(0.0).sqrt();
    let n = 4000;
    let h = top / n as f64;
    let mut s = f(0.0) + f(top);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (1.0 - s * h / 3.0).max(0.0)
}

pub fn shape2<T>(m: &[Vec<T>]) -> Option<(usize, usize)> {
    let w = m.first().map_or(0, Vec::len);
    m.iter().all(|r| r.len() == w).then_some((m.len(), w))
}

pub fn shape3<T>(m: &[Vec<Vec<T>>]) -> Option<(usize, usize, usize)> {
    let (r, l) = m.first().and_then(|x| shape2(x)).unwrap_or((0, 0));
    m.iter().all(|x| shape2(x) == Some((r, l))).then_some((m.len(), r, l))
}

