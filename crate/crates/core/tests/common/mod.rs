//! Shared helpers for the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Rotation3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swm_core::{CableLengths, MechanismConfig, PlatformPose, Vec3};

pub fn reference() -> MechanismConfig {
    MechanismConfig::default()
}

pub fn lengths(l: [f64; 4]) -> CableLengths {
    CableLengths::new(l).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_lengths(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> CableLengths {
    lengths(std::array::from_fn(|_| rng.random_range(lo..hi)))
}

/// Lowest-potential rigid placement found by the energy oracle.
#[derive(Debug, Clone)]
pub struct OracleMinimum {
    pub pose: PlatformPose,
    /// `|AᵢBᵢ| − lᵢ` at the minimiser (m).
    pub gaps: [f64; 4],
}

impl OracleMinimum {
    pub fn active(&self, tol: f64) -> Vec<usize> {
        (0..4).filter(|&i| self.gaps[i].abs() <= tol).collect()
    }
}

/// Pose from the rotation vector `v[0..3]` and the centre of gravity `v[3..6]`.
fn pose_of(v: &DVector<f64>, cfg: &MechanismConfig) -> PlatformPose {
    let rot = Rotation3::new(Vec3::new(v[0], v[1], v[2]));
    let c = Vec3::new(v[3], v[4], v[5]);
    let place = |p: Vec3| rot * (p - cfg.local_centre()) + c;
    PlatformPose::new(
        place(cfg.local_attachment(0)),
        place(cfg.local_attachment(1)),
        place(cfg.local_attachment(2)),
        c,
    )
}

fn gaps(v: &DVector<f64>, l: &CableLengths, cfg: &MechanismConfig) -> [f64; 4] {
    let p = pose_of(v, cfg);
    let b = p.attachments();
    std::array::from_fn(|i| (b[i] - cfg.anchor(i)).norm() - l.get(i))
}

/// Minimises `f` from `x0` by BFGS with central-difference gradients and a
/// backtracking line search.
fn bfgs(f: &dyn Fn(&DVector<f64>) -> f64, x0: DVector<f64>) -> DVector<f64> {
    let n = x0.len();
    let grad = |x: &DVector<f64>| {
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let h = 1e-7 * (1.0 + x[i].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
        }
        g
    };
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut stalled = 0;
    for _ in 0..500 {
        if g.norm() < 1e-10 || stalled >= 3 {
            break;
        }
        let mut d = -(&hinv * &g);
        if d.dot(&g) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            d = -g.clone();
        }
        let mut t = 1.0;
        let slope = d.dot(&g);
        let (x_new, f_new) = loop {
            let xt = &x + &d * t;
            let ft = f(&xt);
            if ft <= fx + 1e-4 * t * slope || t < 1e-16 {
                break (xt, ft);
            }
            t *= 0.5;
        };
        if f_new >= fx && t < 1e-16 {
            break;
        }
        let g_new = grad(&x_new);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let left = &i - &s * y.transpose() * rho;
            let right = &i - &y * s.transpose() * rho;
            hinv = &left * &hinv * &right + &s * s.transpose() * rho;
        }
        stalled = if fx - f_new < 1e-15 { stalled + 1 } else { 0 };
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    x
}

/// Minimises the height of the centre of gravity over rigid placements of
/// the platform subject to `|AᵢBᵢ| ≤ lᵢ`, by an augmented Lagrangian with
/// several starting placements. The best feasible local minimum is returned.
pub fn energy_oracle(l: &CableLengths, cfg: &MechanismConfig) -> OracleMinimum {
    let scale = cfg.a;
    let l_min = (0..4).map(|i| l.get(i)).fold(f64::INFINITY, f64::min);
    let mut starts = Vec::new();
    let mut r = rng(0x5eed);
    for k in 0..3 {
        let tilt = if k == 0 { 0.0 } else { 0.05 };
        starts.push(DVector::from_vec(vec![
            r.random_range(-tilt..=tilt),
            r.random_range(-tilt..=tilt),
            r.random_range(-tilt..=tilt),
            cfg.k1 * cfg.a + r.random_range(-0.3..=0.3),
            cfg.k2 * cfg.b + r.random_range(-0.3..=0.3),
            -(l_min - 0.5) - cfg.h,
        ]));
    }

    let mut best: Option<(f64, DVector<f64>)> = None;
    for x0 in starts {
        let mut x = x0;
        let mut lambda = [0.0; 4];
        let mut rho = 10.0;
        for _ in 0..60 {
            let lam = lambda;
            let objective = |v: &DVector<f64>| {
                let g = gaps(v, l, cfg);
                let mut val = v[5] / scale;
                for i in 0..4 {
                    let s = (lam[i] + rho * g[i] / scale).max(0.0);
                    val += (s * s - lam[i] * lam[i]) / (2.0 * rho);
                }
                val
            };
            x = bfgs(&objective, x);
            let g = gaps(&x, l, cfg);
            for i in 0..4 {
                lambda[i] = (lambda[i] + rho * g[i] / scale).max(0.0);
            }
            let violation = g.iter().fold(0.0_f64, |m, v| m.max(*v));
            if violation < 1e-11 {
                let comp = (0..4).fold(0.0_f64, |m, i| m.max((lambda[i] * g[i]).abs()));
                if comp < 1e-11 {
                    break;
                }
            }
            if violation > 1e-9 {
                rho = (rho * 4.0).min(1e8);
            }
        }
        let g = gaps(&x, l, cfg);
        if g.iter().all(|v| *v < 1e-8) && best.as_ref().is_none_or(|(cz, _)| x[5] < *cz) {
            best = Some((x[5], x));
        }
    }
    let (_, x) = best.expect("oracle found no feasible placement");
    OracleMinimum {
        pose: pose_of(&x, cfg),
        gaps: gaps(&x, l, cfg),
    }
}
