//! Trust-region dogleg solver for square nonlinear systems `f(x) = 0`.
//!
//! Each iteration minimises the local model `½‖f + J·p‖²` over the dogleg
//! path inside a ball of radius Δ, then accepts or rejects the step by the
//! ratio of actual to predicted reduction of `½‖f‖²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FkError, Result};

/// A square system of nonlinear equations.
pub trait SquareSystem {
    fn dim(&self) -> usize;

    fn residual(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Analytic Jacobian, if the system has one.
    fn jacobian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

/// Adapter turning a closure into a [`SquareSystem`] without analytic
/// derivatives.
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> SquareSystem for FnSystem<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JacobianMode {
    /// Use the system's analytic Jacobian; falls back to forward differences
    /// when the system does not provide one.
    Analytic,
    /// Forward differences with relative step `step`.
    ForwardDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_trust_radius: f64,
    pub min_trust_radius: f64,
    pub max_trust_radius: f64,
    pub jacobian_mode: JacobianMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_tolerance: 1e-10,
            step_tolerance: 1e-12,
            initial_trust_radius: 1.0,
            min_trust_radius: 1e-14,
            max_trust_radius: 1e3,
            jacobian_mode: JacobianMode::Analytic,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iterations >= 1
            && self.residual_tolerance > 0.0
            && self.step_tolerance > 0.0
            && self.min_trust_radius > 0.0
            && self.min_trust_radius <= self.initial_trust_radius
            && self.initial_trust_radius <= self.max_trust_radius
            && match self.jacobian_mode {
                JacobianMode::Analytic => true,
                JacobianMode::ForwardDifference { step } => step > 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(FkError::SolverFailed(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
    TrustRadiusCollapse,
    SingularJacobian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub termination: Termination,
    /// Number of iterations where the Gauss-Newton step was unavailable and
    /// the steepest-descent (Cauchy) step was used instead.
    pub cauchy_fallbacks: usize,
    /// `‖f‖` after each accepted step, starting with the guess.
    pub residual_history: Vec<f64>,
}

/// Reciprocal condition number below which the Jacobian is treated as singular.
const SINGULAR_RCOND: f64 = 1e-14;
/// Minimum gain ratio for a step to be accepted.
const ACCEPT_RATIO: f64 = 1e-4;

pub fn jacobian<S: SquareSystem + ?Sized>(
    system: &S,
    x: &DVector<f64>,
    mode: JacobianMode,
) -> Result<DMatrix<f64>> {
    let jac = match mode {
        JacobianMode::Analytic => match system.jacobian(x) {
            Some(j) => j,
            None => forward_difference(system, x, 1e-7)?,
        },
        JacobianMode::ForwardDifference { step } => forward_difference(system, x, step)?,
    };
    if jac.iter().all(|v| v.is_finite()) {
        Ok(jac)
    } else {
        Err(FkError::NonFiniteResidual)
    }
}

fn forward_difference<S: SquareSystem + ?Sized>(
    system: &S,
    x: &DVector<f64>,
    step: f64,
) -> Result<DMatrix<f64>> {
    let f0 = system.residual(x);
    if !is_finite(&f0) {
        return Err(FkError::NonFiniteResidual);
    }
    let n = x.len();
    let mut jac = DMatrix::zeros(f0.len(), n);
    let mut xp = x.clone();
    for j in 0..n {
        let h = step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fj = system.residual(&xp);
        xp[j] = x[j];
        jac.set_column(j, &((fj - &f0) / h));
    }
    Ok(jac)
}

fn is_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Dogleg step for trust radius `delta`.
///
/// `gauss_newton` is `−J⁻¹f` (or `None` when `J` is singular), `cauchy` the
/// minimiser of the model along the steepest-descent direction and
/// `gradient` is `Jᵀf`.
pub fn dogleg_step(
    gauss_newton: Option<&DVector<f64>>,
    cauchy: &DVector<f64>,
    gradient: &DVector<f64>,
    delta: f64,
) -> DVector<f64> {
    if let Some(gn) = gauss_newton {
        if gn.norm() <= delta {
            return gn.clone();
        }
    }
    let cauchy_norm = cauchy.norm();
    if cauchy_norm >= delta {
        let gnorm = gradient.norm();
        return if gnorm > 0.0 {
            gradient * (-delta / gnorm)
        } else {
            DVector::zeros(gradient.len())
        };
    }
    let Some(gn) = gauss_newton else {
        return cauchy.clone();
    };
    // p = pc + t (gn − pc), t ∈ [0, 1], with ‖p‖ = Δ
    let d = gn - cauchy;
    let a = d.norm_squared();
    let b = 2.0 * cauchy.dot(&d);
    let c = cauchy_norm * cauchy_norm - delta * delta;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    // c < 0, so the positive root is well defined; use the stable form
    let t = if b > 0.0 {
        -2.0 * c / (b + disc.sqrt())
    } else {
        (-b + disc.sqrt()) / (2.0 * a)
    };
    cauchy + d * t.clamp(0.0, 1.0)
}

/// Solves `f(x) = 0` from `guess`.
pub fn solve<S: SquareSystem + ?Sized>(
    system: &S,
    guess: &[f64],
    options: &SolverOptions,
) -> Result<SolveReport> {
    options.validate()?;
    let n = system.dim();
    if guess.len() != n {
        return Err(FkError::DimensionMismatch {
            expected: n,
            actual: guess.len(),
        });
    }
    let mut x = DVector::from_column_slice(guess);
    let mut f = system.residual(&x);
    if f.len() != n {
        return Err(FkError::DimensionMismatch {
            expected: n,
            actual: f.len(),
        });
    }
    if !is_finite(&f) {
        return Err(FkError::NonFiniteResidual);
    }

    let mut fnorm = f.norm();
    let mut delta = options.initial_trust_radius;
    let mut history = vec![fnorm];
    let mut cauchy_fallbacks = 0;
    let mut iterations = 0;
    let mut last_singular;

    let finish = |x: DVector<f64>,
                  fnorm: f64,
                  iterations: usize,
                  termination: Termination,
                  cauchy_fallbacks: usize,
                  history: Vec<f64>| {
        let converged = fnorm <= options.residual_tolerance;
        SolveReport {
            solution: x.as_slice().to_vec(),
            converged,
            iterations,
            residual_norm: fnorm,
            termination: if converged {
                Termination::Converged
            } else {
                termination
            },
            cauchy_fallbacks,
            residual_history: history,
        }
    };

    while iterations < options.max_iterations {
        if fnorm <= options.residual_tolerance {
            return Ok(finish(x, fnorm, iterations, Termination::Converged, cauchy_fallbacks, history));
        }
        iterations += 1;

        let jac = jacobian(system, &x, options.jacobian_mode)?;
        let gradient = jac.tr_mul(&f);
        let jg = &jac * &gradient;
        let jg2 = jg.norm_squared();
        if gradient.norm() == 0.0 || jg2 == 0.0 {
            // stationary point of ‖f‖² that is not a root
            return Ok(finish(x, fnorm, iterations, Termination::SingularJacobian, cauchy_fallbacks, history));
        }
        let cauchy = &gradient * (-gradient.norm_squared() / jg2);
        let gauss_newton = gauss_newton_step(&jac, &f);
        last_singular = gauss_newton.is_none();
        if last_singular {
            cauchy_fallbacks += 1;
        }

        loop {
            let step = dogleg_step(gauss_newton.as_ref(), &cauchy, &gradient, delta);
            let step_norm = step.norm();
            if step_norm <= options.step_tolerance * (x.norm() + options.step_tolerance) {
                let reason = if last_singular {
                    Termination::SingularJacobian
                } else {
                    Termination::TrustRadiusCollapse
                };
                return Ok(finish(x, fnorm, iterations, reason, cauchy_fallbacks, history));
            }
            let predicted = fnorm * fnorm - (&f + &jac * &step).norm_squared();
            let x_new = &x + &step;
            let f_new = system.residual(&x_new);
            let new_norm = if is_finite(&f_new) { f_new.norm() } else { f64::INFINITY };
            let actual = fnorm * fnorm - new_norm * new_norm;
            let ratio = if predicted > 0.0 { actual / predicted } else { -1.0 };

            if ratio < 0.25 {
                delta = 0.25 * step_norm.min(delta);
            } else if ratio > 0.75 && step_norm >= 0.99 * delta {
                delta = (2.0 * delta).min(options.max_trust_radius);
            }

            if ratio > ACCEPT_RATIO && new_norm <= fnorm {
                x = x_new;
                f = f_new;
                fnorm = new_norm;
                history.push(fnorm);
                break;
            }
            if delta < options.min_trust_radius {
                let reason = if last_singular {
                    Termination::SingularJacobian
                } else {
                    Termination::TrustRadiusCollapse
                };
                return Ok(finish(x, fnorm, iterations, reason, cauchy_fallbacks, history));
            }
        }
    }
    let reason = if fnorm <= options.residual_tolerance {
        Termination::Converged
    } else {
        Termination::MaxIterations
    };
    Ok(finish(x, fnorm, iterations, reason, cauchy_fallbacks, history))
}

/// `−J⁻¹f`, or `None` when `J` is numerically singular.
fn gauss_newton_step(jac: &DMatrix<f64>, f: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= SINGULAR_RCOND * smax {
        return None;
    }
    let step = svd.solve(f, 0.0).ok()?;
    Some(-step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn scalar_quadratic_root() {
        let sys = FnSystem::new(1, |x: &DVector<f64>| vec(&[x[0] * x[0] - 4.0]));
        let report = solve(&sys, &[1.0], &SolverOptions::default()).unwrap();
        assert!(report.converged);
        assert!((report.solution[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn linear_two_by_two() {
        let sys = FnSystem::new(2, |x: &DVector<f64>| vec(&[x[0] + x[1] - 3.0, x[0] - x[1] - 1.0]));
        let report = solve(&sys, &[0.0, 0.0], &SolverOptions::default()).unwrap();
        assert!(report.converged);
        assert!((report.solution[0] - 2.0).abs() < 1e-10);
        assert!((report.solution[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rosenbrock_style_system() {
        // f = (10(y − x²), 1 − x), root (1, 1)
        let sys = FnSystem::new(2, |x: &DVector<f64>| {
            vec(&[10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        });
        let report = solve(&sys, &[-1.2, 1.0], &SolverOptions::default()).unwrap();
        assert!(report.converged, "{report:?}");
        assert!((report.solution[0] - 1.0).abs() < 1e-9);
        assert!((report.solution[1] - 1.0).abs() < 1e-9);
        for w in report.residual_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn dimension_mismatch_and_non_finite() {
        let sys = FnSystem::new(2, |x: &DVector<f64>| x.clone());
        assert_eq!(
            solve(&sys, &[1.0], &SolverOptions::default()),
            Err(FkError::DimensionMismatch { expected: 2, actual: 1 })
        );
        let bad = FnSystem::new(1, |x: &DVector<f64>| vec(&[x[0].ln()]));
        assert_eq!(
            solve(&bad, &[-1.0], &SolverOptions::default()),
            Err(FkError::NonFiniteResidual)
        );
    }

    #[test]
    fn forward_difference_jacobian() {
        let sys = FnSystem::new(1, |x: &DVector<f64>| vec(&[x[0] * x[0]]));
        let j = jacobian(&sys, &vec(&[3.0]), JacobianMode::ForwardDifference { step: 1e-7 }).unwrap();
        assert!((j[(0, 0)] - 6.0).abs() < 1e-5);

        let lin = FnSystem::new(2, |x: &DVector<f64>| vec(&[2.0 * x[0] - x[1], 0.5 * x[1]]));
        // power-of-two step keeps the difference quotient free of rounding
        let step = 2f64.powi(-24);
        let j = jacobian(&lin, &vec(&[0.3, -7.0]), JacobianMode::ForwardDifference { step }).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.0, 0.5]);
        assert!((j - expected).amax() < 1e-9);
    }

    #[test]
    fn singular_jacobian_falls_back_to_cauchy() {
        // inconsistent pair (x + y = 0, x + y = 1): rank-one Jacobian everywhere
        let sys = FnSystem::new(2, |x: &DVector<f64>| vec(&[x[0] + x[1], x[0] + x[1] - 1.0]));
        let report = solve(&sys, &[0.0, 0.0], &SolverOptions::default()).unwrap();
        assert!(!report.converged);
        assert!(report.cauchy_fallbacks > 0);
        assert_eq!(report.termination, Termination::SingularJacobian);
    }

    #[test]
    fn dogleg_takes_gauss_newton_inside_region() {
        let gn = vec(&[0.1, -0.2]);
        let pc = vec(&[0.05, -0.05]);
        let g = vec(&[-1.0, 1.0]);
        assert_eq!(dogleg_step(Some(&gn), &pc, &g, 1.0), gn);
    }

    #[test]
    fn dogleg_step_lands_on_boundary() {
        let gn = vec(&[3.0, 0.0]);
        let pc = vec(&[0.5, 0.5]);
        let g = vec(&[-1.0, -1.0]);
        let p = dogleg_step(Some(&gn), &pc, &g, 1.0);
        assert!((p.norm() - 1.0).abs() < 1e-12);
        let p = dogleg_step(Some(&gn), &vec(&[2.0, 2.0]), &g, 1.0);
        assert!((p.norm() - 1.0).abs() < 1e-12);
        assert!((p[0] - p[1]).abs() < 1e-12);
    }
}
