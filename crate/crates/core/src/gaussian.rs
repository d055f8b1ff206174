//! Exact vibrational quantum dynamics in the harmonic approximation.
//!
//! Quantum states live in oscillator units: positions are measured in
//! `σ l`, momenta in `ħ / (σ l)`, energies in `ħ ν_x` and times in `1/ν_x`.
//! In these units `ħ = m = 1` and the quadratic Hamiltonian of a crystal is
//! `H = ½ pᵀp + ½ (x - c)ᵀ K (x - c) + E₀`, where `K` is the dimensionless
//! Hessian and `c = r⁽⁰⁾ / σ`.
//!
//! Phase convention: the energy zero of an echo is the ground level of the
//! initial model (classical minimum plus zero-point energy). The excited
//! model's classical offset and zero-point energy both enter the phase.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{
    analytic_equilibrium, find_equilibrium, lowest_stable_equilibrium, potential_energy, EquilibriumResult,
    IonConfiguration, SpinPattern, StructureKind, TrapParams,
};
use crate::error::{Error, Result};
use crate::modes::{modes_at, NormalModes};

/// Modes softer than this are refused.
pub const SOFT_MODE_LIMIT: f64 = 1e-4;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quadratic expansion of a crystal potential about a stable equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    /// Equilibrium in units of `l`.
    pub equilibrium: IonConfiguration,
    pub modes: NormalModes,
    /// Classical energy at the equilibrium in units of `ħ ν_x`.
    pub energy_offset: f64,
    /// Quantum fluctuation scale `σ` converting `l` to oscillator units.
    pub sigma: f64,
}

impl QuadraticModel {
    /// Expansion of the crystal potential about `config`, which must be a
    /// stable equilibrium without soft modes.
    pub fn new(config: &IonConfiguration, trap: &TrapParams, spins: &SpinPattern, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Invalid(format!("sigma must be positive, got {sigma}")));
        }
        let modes = modes_at(config, trap, spins)?;
        let energy = potential_energy(config, trap, spins)?;
        let model = Self { equilibrium: config.clone(), modes, energy_offset: energy / (sigma * sigma), sigma };
        model.check(&format!("alpha = {}, delta_alpha = {}", trap.alpha, trap.delta_alpha))?;
        Ok(model)
    }

    /// Model with Hessian `k`, minimum at `center` and offset `energy_offset`,
    /// all given directly in oscillator units (`σ = 1`).
    pub fn from_hessian(center: &[f64], k: &DMatrix<f64>, energy_offset: f64) -> Result<Self> {
        if k.nrows() != center.len() || k.ncols() != center.len() || center.len() % 2 != 0 {
            return Err(Error::Invalid("Hessian and center dimensions disagree".into()));
        }
        let model = Self {
            equilibrium: IonConfiguration::from_flat(center),
            modes: NormalModes::from_hessian(k),
            energy_offset,
            sigma: 1.0,
        };
        model.check("explicit Hessian")?;
        Ok(model)
    }

    fn check(&self, context: &str) -> Result<()> {
        if !self.modes.stable {
            return Err(Error::Unstable(format!(
                "{context}: lowest squared frequency {:.3e}",
                self.modes.eigenvalues[0]
            )));
        }
        if self.modes.lowest() < SOFT_MODE_LIMIT {
            return Err(Error::Unstable(format!(
                "{context}: soft mode with frequency {:.3e} below {SOFT_MODE_LIMIT:e}",
                self.modes.lowest()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Potential minimum in oscillator units.
    pub fn center(&self) -> DVector<f64> {
        self.equilibrium.to_vector() / self.sigma
    }

    /// Ground-level energy `E₀ + ½ Σ ω_k`.
    pub fn ground_energy(&self) -> f64 {
        self.energy_offset + self.modes.zero_point()
    }

    /// `K = V diag(ω²) Vᵀ`.
    pub fn hessian(&self) -> DMatrix<f64> {
        let v = &self.modes.vectors;
        v * DMatrix::from_diagonal(&DVector::from_vec(self.modes.eigenvalues.clone())) * v.transpose()
    }

    /// Same model with the energy offset shifted by `-reference`.
    pub fn relative_to(&self, reference: f64) -> Self {
        Self { energy_offset: self.energy_offset - reference, ..self.clone() }
    }
}

/// Normalized Gaussian
/// `ψ(x) = (det Re A / πⁿ)^¼ exp(-½ (x-q)ᵀ A (x-q) + i pᵀ(x-q) + iγ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPureState {
    pub mean_q: DVector<f64>,
    pub mean_p: DVector<f64>,
    /// Complex symmetric width matrix with positive-definite real part.
    pub width: DMatrix<Complex64>,
    /// Global phase, not reduced modulo `2π`.
    pub phase: f64,
}

impl GaussianPureState {
    pub fn dim(&self) -> usize {
        self.mean_q.len()
    }

    /// `⟨ψ|ψ⟩`, evaluated with the general overlap formula.
    pub fn norm(&self) -> Result<f64> {
        Ok(overlap(self, self)?.re)
    }

    /// Position covariance `½ (Re A)⁻¹`.
    pub fn position_covariance(&self) -> Result<DMatrix<f64>> {
        let re = self.width.map(|z| z.re);
        let chol = Cholesky::new(re).ok_or_else(|| Error::Domain("Re A is not positive definite".into()))?;
        Ok(chol.inverse() * 0.5)
    }

    /// `⟨H⟩` under `model`.
    pub fn energy(&self, model: &QuadraticModel) -> Result<f64> {
        let k = model.hessian();
        let re = self.width.map(|z| z.re);
        let im = self.width.map(|z| z.im);
        let sx = self.position_covariance()?;
        let sp = (&re + &im * (&sx * 2.0) * &im) * 0.5;
        let d = &self.mean_q - model.center();
        Ok(model.energy_offset
            + 0.5 * self.mean_p.norm_squared()
            + 0.5 * d.dot(&(&k * &d))
            + 0.5 * (&k * sx).trace()
            + 0.5 * sp.trace())
    }
}

/// Ground state of `model`: `A = V diag(ω) Vᵀ`, centered at the minimum,
/// zero momentum and zero phase.
pub fn ground_state(model: &QuadraticModel) -> Result<GaussianPureState> {
    model.check("ground state")?;
    let v = &model.modes.vectors;
    let a = v * DMatrix::from_diagonal(&DVector::from_vec(model.modes.frequencies.clone())) * v.transpose();
    let a = (&a + a.transpose()) * 0.5;
    Ok(GaussianPureState {
        mean_q: model.center(),
        mean_p: DVector::zeros(model.dim()),
        width: a.map(|x| Complex64::new(x, 0.0)),
        phase: 0.0,
    })
}

// Σ ln λ_k over the eigenvalues of `m`, all of which lie in the open right
// half plane, so the principal branch is the continuous one.
fn log_det_right_half(m: DMatrix<Complex64>) -> Result<Complex64> {
    if let Some(ev) = Schur::try_new(m.clone(), 1e-15, 10_000).and_then(|s| s.eigenvalues()) {
        return Ok(ev.iter().map(|z| z.ln()).sum());
    }
    let n = m.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let x = &m - &id;
    let det = |s: f64| (&id + &x * Complex64::new(s, 0.0)).determinant();
    let mut s = 0.0f64;
    let mut h = 1.0 / 16.0;
    let mut prev = det(0.0);
    let mut arg = 0.0;
    while s < 1.0 {
        let next_s = (s + h).min(1.0);
        let next = det(next_s);
        let step = (next / prev).arg();
        if step.abs() > 0.25 && h > 1e-6 {
            h *= 0.5;
            continue;
        }
        arg += step;
        prev = next;
        s = next_s;
        h *= 2.0;
    }
    Ok(Complex64::new(prev.norm().ln(), arg))
}

fn symmetrize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.transpose()) * Complex64::new(0.5, 0.0)
}

/// Evolves `state` for time `t` (either sign) under `model`.
///
/// Each normal mode evolves with its exact propagator. The means follow
/// the classical trajectory, the width follows `A(t) = -i P Q⁻¹`, and the
/// phase collects the classical action plus `-½ arg det Q(t)` on the branch
/// continuous from `t = 0`.
pub fn evolve(state: &GaussianPureState, model: &QuadraticModel, t: f64) -> Result<GaussianPureState> {
    model.check("evolution")?;
    let n = model.dim();
    if state.dim() != n {
        return Err(Error::Invalid(format!("state has dimension {}, model {n}", state.dim())));
    }
    let v = &model.modes.vectors;
    let vc = v.map(|x| Complex64::new(x, 0.0));
    let om = &model.modes.frequencies;
    let c = model.center();
    let z0 = v.transpose() * (&state.mean_q - &c);
    let p0 = v.transpose() * &state.mean_p;
    let a0 = vc.transpose() * &state.width * &vc;

    let cs: Vec<f64> = om.iter().map(|w| (w * t).cos()).collect();
    let sn: Vec<f64> = om.iter().map(|w| (w * t).sin()).collect();
    let ia = &a0 * I;
    let q = DMatrix::from_fn(n, n, |r, k| {
        let diag = if r == k { Complex64::new(cs[r], 0.0) } else { Complex64::new(0.0, 0.0) };
        diag + ia[(r, k)] * (sn[r] / om[r])
    });
    let p = DMatrix::from_fn(n, n, |r, k| {
        let diag = if r == k { Complex64::new(-om[r] * sn[r], 0.0) } else { Complex64::new(0.0, 0.0) };
        diag + ia[(r, k)] * cs[r]
    });
    let q_inv = q.try_inverse().ok_or_else(|| Error::Domain("singular propagator block".into()))?;
    let at = symmetrize(&p * q_inv * (-I));

    let mut action = 0.0;
    let mut zt = DVector::zeros(n);
    let mut pt = DVector::zeros(n);
    for k in 0..n {
        let w = om[k];
        zt[k] = cs[k] * z0[k] + sn[k] / w * p0[k];
        pt[k] = -w * sn[k] * z0[k] + cs[k] * p0[k];
        action += 0.5 * (p0[k] * p0[k] - w * w * z0[k] * z0[k]) * (2.0 * w * t).sin() / (2.0 * w)
            + z0[k] * p0[k] * ((2.0 * w * t).cos() - 1.0) / 2.0;
    }
    action -= model.energy_offset * t;

    // det Q = exp(iΣωt) det(½(1 + B)) det(1 + W e^{-2iΩt}) with the Cayley
    // transform W of B = Ω^{-½} A Ω^{-½}; ‖W‖ < 1 keeps the logs on branch.
    let b = DMatrix::from_fn(n, n, |r, k| a0[(r, k)] / (om[r] * om[k]).sqrt());
    let id = DMatrix::<Complex64>::identity(n, n);
    let half = (&id + &b) * Complex64::new(0.5, 0.0);
    let plus_inv = (&id + &b).try_inverse().ok_or_else(|| Error::Domain("singular 1 + B".into()))?;
    let w = plus_inv * (&id - &b);
    let rot = DMatrix::from_fn(n, n, |r, k| w[(r, k)] * (-2.0 * I * om[k] * t).exp());
    let log_det_q = I * om.iter().sum::<f64>() * t + log_det_right_half(half)? + log_det_right_half(&id + rot)?;

    Ok(GaussianPureState {
        mean_q: c + v * zt,
        mean_p: v * pt,
        width: symmetrize(&vc * at * vc.transpose()),
        phase: state.phase + action - 0.5 * log_det_q.im,
    })
}

/// `⟨a|b⟩` in closed form.
///
/// Fails with a domain error if `Re(A_a* + A_b)` is not positive definite.
pub fn overlap(a: &GaussianPureState, b: &GaussianPureState) -> Result<Complex64> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::Invalid("states of different dimension".into()));
    }
    let aa = a.width.map(|z| z.conj());
    let ab = &b.width;
    let cm = &aa + ab;
    let delta = (&b.mean_q - &a.mean_q).map(|x| Complex64::new(x, 0.0));
    let pa = a.mean_p.map(|x| Complex64::new(x, 0.0));
    let pb = b.mean_p.map(|x| Complex64::new(x, 0.0));
    let j = ab * &delta + (&pb - &pa) * I;
    let c0 = -0.5 * delta.dot(&(ab * &delta)) - I * pb.dot(&delta) + I * (b.phase - a.phase);

    let re = cm.map(|z| z.re);
    let im = cm.map(|z| z.im);
    let chol = Cholesky::new(re).ok_or_else(|| Error::Domain("Re(A_a* + A_b) is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Domain("singular Cholesky factor".into()))?;
    let m = &l_inv * im * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let mut sqrt_det = Complex64::new(l.diagonal().product(), 0.0);
    for mu in SymmetricEigen::new(m).eigenvalues.iter() {
        sqrt_det *= Complex64::new(1.0, *mu).sqrt();
    }
    let sol = cm.lu().solve(&j).ok_or_else(|| Error::Domain("singular overlap matrix".into()))?;
    let norm = |s: &GaussianPureState| -> Result<f64> {
        let d = Cholesky::new(s.width.map(|z| z.re))
            .ok_or_else(|| Error::Domain("Re A is not positive definite".into()))?
            .determinant();
        Ok((d / PI.powi(n as i32)).powf(0.25))
    };
    let pref = norm(a)? * norm(b)? * (2.0 * PI).powf(n as f64 / 2.0);
    Ok(pref / sqrt_det * (0.5 * j.dot(&sol) + c0).exp())
}

/// Context stored with an echo series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EchoMetadata {
    pub alpha: f64,
    pub delta_alpha: f64,
    pub species: Option<String>,
    /// Axial angular frequency in rad/s.
    pub nu_x: Option<f64>,
}

/// Complex overlap `I(t)` sampled on a time grid in units of `1/ν_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub metadata: EchoMetadata,
}

impl OverlapSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// Times in microseconds, when `ν_x` is known.
    pub fn times_us(&self) -> Option<Vec<f64>> {
        self.metadata.nu_x.map(|nu| self.times.iter().map(|t| t / nu * 1e6).collect())
    }
}

/// `n` equally spaced samples on `[0, t_max]`.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// Loschmidt echo `I(t) = ⟨φ(0)|φ(t)⟩` where `φ(0)` is the ground state of
/// `g_model` and `φ(t)` its evolution under `e_model`, measured from the
/// ground level of `g_model`. Time samples are evaluated in parallel.
pub fn loschmidt_echo(g_model: &QuadraticModel, e_model: &QuadraticModel, times: &[f64]) -> Result<OverlapSeries> {
    let psi0 = ground_state(g_model)?;
    let e = e_model.relative_to(g_model.energy_offset);
    let e = e.relative_to(g_model.modes.zero_point());
    let values = times
        .par_iter()
        .map(|&t| overlap(&psi0, &evolve(&psi0, &e, t)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapSeries { times: times.to_vec(), values, metadata: EchoMetadata::default() })
}

/// Closed-form one-dimensional echo: the ground state of `ω_g` evolved
/// under an oscillator `ω_e` whose minimum is displaced by `displacement`
/// (oscillator units). Both minima have the same classical energy and the
/// energy zero is `½ ω_g`.
pub fn single_mode_echo_reference(omega_g: f64, omega_e: f64, displacement: f64, t: f64) -> Complex64 {
    let (s, c) = (omega_e * t).sin_cos();
    let b = omega_g / omega_e;
    let w = (1.0 - b) / (1.0 + b);
    let log_q = I * omega_e * t + Complex64::new(0.5 * (1.0 + b), 0.0).ln()
        + (1.0 + w * (-2.0 * I * omega_e * t).exp()).ln();
    let action = -omega_e * displacement * displacement * (2.0 * omega_e * t).sin() / 4.0 + 0.5 * omega_g * t;
    let gamma = action - 0.5 * log_q.im;
    let at = (omega_g * c + I * omega_e * s) / (c + I * b * s);
    let qt = displacement * c;
    let pt = -omega_e * displacement * s;
    let delta = qt - displacement;
    let cm = omega_g + at;
    let j = at * delta + I * pt;
    let c0 = -0.5 * at * delta * delta - I * pt * delta + I * gamma;
    let norm = (omega_g * at.re).powf(0.25) / PI.sqrt();
    norm * (2.0 * PI).sqrt() / cm.sqrt() * (0.5 * j * j / cm + c0).exp()
}

/// Lowest-energy stable equilibrium of the all-ground crystal.
pub fn ground_equilibrium(trap: &TrapParams) -> Result<EquilibriumResult> {
    lowest_stable_equilibrium(trap, &SpinPattern::all_ground(trap.n_ions))
}

/// The pair of quadratic models of an echo: the all-ground crystal and
/// the crystal with `spins` excited, expanded about the stable minimum
/// reached from the ground configuration.
pub fn echo_models(trap: &TrapParams, spins: &SpinPattern, sigma: f64) -> Result<(QuadraticModel, QuadraticModel)> {
    let g_eq = ground_equilibrium(trap)?;
    let g = QuadraticModel::new(&g_eq.config, trap, &SpinPattern::all_ground(trap.n_ions), sigma)?;
    let from_ground = find_equilibrium(trap, spins, &g_eq.config).ok().filter(|r| r.stable);
    let e_eq = match from_ground {
        Some(r) => r,
        None => {
            let mut guesses = Vec::new();
            for kind in [StructureKind::LinX, StructureKind::ZigzagX, StructureKind::ZigzagY] {
                if let Ok(c) = analytic_equilibrium(kind, trap, spins) {
                    guesses.push(c);
                }
            }
            guesses
                .iter()
                .filter_map(|c| find_equilibrium(trap, spins, c).ok())
                .filter(|r| r.stable)
                .min_by(|a, b| a.config.distance(&g_eq.config).total_cmp(&b.config.distance(&g_eq.config)))
                .ok_or_else(|| {
                    Error::Unstable(format!(
                        "no stable crystal with spins {spins} at alpha = {}, delta_alpha = {}",
                        trap.alpha, trap.delta_alpha
                    ))
                })?
        }
    };
    let e = QuadraticModel::new(&e_eq.config, trap, spins, sigma)?;
    Ok((g, e))
}
