//! Independent reference propagators used by several test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use ion_crystal::gaussian::QuadraticModel;

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Echo of the two-mode quench `g -> e` from exact diagonalization of
/// `H_e` in a truncated Fock basis of the `g` oscillators.
///
/// `g` must be centered at the origin with diagonal stiffness
/// `diag(ω₀², ω₁²)` and zero offset. `e` has stiffness `k_e`, minimum
/// `c_e` and classical offset `off_e`. Energies are measured from the `g`
/// ground level, as in the Gaussian propagator.
pub fn fock_echo(omega_g: [f64; 2], k_e: &DMatrix<f64>, c_e: [f64; 2], off_e: f64, levels: usize, times: &[f64]) -> Vec<Complex64> {
    let big = levels + 4;
    let mut a = DMatrix::<f64>::zeros(big, big);
    for k in 1..big {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    let ad = a.transpose();
    let cut = |m: DMatrix<f64>| m.view((0, 0), (levels, levels)).into_owned();
    let id = DMatrix::<f64>::identity(levels, levels);
    let mut q = Vec::new();
    let mut q2 = Vec::new();
    let mut p2 = Vec::new();
    for (mode, w) in omega_g.iter().enumerate() {
        let x = (&a + &ad) / (2.0 * w).sqrt();
        let d = &ad - &a;
        let (xx, pp) = (cut(&x * &x), cut(-(w / 2.0) * (&d * &d)));
        let place = |m: DMatrix<f64>| if mode == 0 { kron(&m, &id) } else { kron(&id, &m) };
        q.push(place(cut(x.clone())));
        q2.push(place(xx));
        p2.push(place(pp));
    }
    let c = nalgebra::Vector2::new(c_e[0], c_e[1]);
    let kc = k_e * nalgebra::DVector::from_column_slice(c.as_slice());
    let dim = levels * levels;
    let mut h = DMatrix::<f64>::identity(dim, dim) * (off_e + 0.5 * c.dot(&nalgebra::Vector2::new(kc[0], kc[1])));
    for i in 0..2 {
        h += 0.5 * &p2[i];
        h += 0.5 * k_e[(i, i)] * &q2[i];
        h -= kc[i] * &q[i];
    }
    h += k_e[(0, 1)] * kron(&cut((&a + &ad) / (2.0 * omega_g[0]).sqrt()), &cut((&a + &ad) / (2.0 * omega_g[1]).sqrt()));
    let eig = SymmetricEigen::new(h);
    let e0 = 0.5 * (omega_g[0] + omega_g[1]);
    times
        .iter()
        .map(|&t| {
            (0..dim)
                .map(|n| {
                    let w = eig.eigenvectors[(0, n)].powi(2);
                    Complex64::from_polar(w, -(eig.eigenvalues[n] - e0) * t)
                })
                .sum()
        })
        .collect()
}

/// One-dimensional echo by Strang split-operator propagation on a uniform
/// grid: the ground state of `ω_g` evolved under
/// `p²/2 + ω_e² (x - d)²/2 + off`, energy zero at `ω_g / 2`.
pub fn grid_echo(omega_g: f64, omega_e: f64, d: f64, off: f64, points: usize, half_width: f64, dt: f64, times: &[f64]) -> Vec<Complex64> {
    let dx = 2.0 * half_width / points as f64;
    let x: Vec<f64> = (0..points).map(|k| -half_width + k as f64 * dx).collect();
    let kgrid: Vec<f64> = (0..points)
        .map(|k| {
            let m = if k < points / 2 { k as f64 } else { k as f64 - points as f64 };
            2.0 * std::f64::consts::PI * m / (points as f64 * dx)
        })
        .collect();
    let norm = (omega_g / std::f64::consts::PI).powf(0.25);
    let psi0: Vec<Complex64> = x.iter().map(|x| Complex64::new(norm * (-0.5 * omega_g * x * x).exp(), 0.0)).collect();
    let half_v: Vec<Complex64> = x
        .iter()
        .map(|x| Complex64::from_polar(1.0, -0.5 * dt * (0.5 * omega_e * omega_e * (x - d).powi(2) + off)))
        .collect();
    let kin: Vec<Complex64> = kgrid.iter().map(|k| Complex64::from_polar(1.0 / points as f64, -dt * 0.5 * k * k)).collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(points);
    let inv = planner.plan_fft_inverse(points);
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut out = Vec::new();
    for &target in times {
        let steps = ((target - t) / dt).round() as usize;
        for _ in 0..steps {
            psi.iter_mut().zip(&half_v).for_each(|(p, v)| *p *= v);
            fwd.process(&mut psi);
            psi.iter_mut().zip(&kin).for_each(|(p, k)| *p *= k);
            inv.process(&mut psi);
            psi.iter_mut().zip(&half_v).for_each(|(p, v)| *p *= v);
        }
        t += steps as f64 * dt;
        let ov: Complex64 = psi0.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dx;
        out.push(ov * Complex64::from_polar(1.0, 0.5 * omega_g * t));
    }
    out
}

/// Two-mode test pair: uncoupled `g` at the origin and a rotated,
/// displaced, softer `e`.
pub fn two_mode_quench() -> ([f64; 2], DMatrix<f64>, [f64; 2], f64) {
    let (s, c) = 0.35f64.sin_cos();
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let k_e = &r * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.6f64.powi(2), 1.3f64.powi(2)])) * r.transpose();
    ([1.0, 1.7], k_e, [0.4, -0.3], 0.25)
}

/// The pair of [`two_mode_quench`] as quadratic models.
pub fn two_mode_models() -> (QuadraticModel, QuadraticModel) {
    let (wg, k_e, c_e, off) = two_mode_quench();
    let k_g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![wg[0] * wg[0], wg[1] * wg[1]]));
    let g = QuadraticModel::from_hessian(&[0.0, 0.0], &k_g, 0.0).unwrap();
    let e = QuadraticModel::from_hessian(&c_e, &k_e, off).unwrap();
    (g, e)
}
