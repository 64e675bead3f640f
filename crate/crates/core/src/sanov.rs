//! Relative-entropy rate of the screened event for discrete models,
//! computed directly as `inf { H(Q‖P) : E_Q A ≥ ε, E_Q B ≥ -u }` over laws
//! on the support, with `A`, `B` the signed centered observables of a
//! [`RateVariant`].

use crate::dist::{self, DistributionModel, Observable, ObservablePair};
use crate::error::{Error, Result};
use crate::rates::{self, RateVariant};
use crate::rng::RandomStream;

/// Largest support handled.
pub const MAX_SUPPORT: usize = 64;

const FEASIBILITY_TOL: f64 = 1e-12;
const PRIMAL_ITERATIONS: usize = 50_000;
const GRADIENT_FLOOR: f64 = 1e-12;

/// `Σ qⱼ log(qⱼ/pⱼ)` with `0 log 0 = 0`; `+∞` if `q` charges an atom `p` does not.
pub fn relative_entropy(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::Input(format!("{} vs {} probabilities", q.len(), p.len())));
    }
    let mut total = 0.0;
    for (&qj, &pj) in q.iter().zip(p) {
        if qj <= 0.0 {
            continue;
        }
        if pj <= 0.0 {
            return Ok(f64::INFINITY);
        }
        total += qj * (qj / pj).ln();
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SanovResult {
    pub q_star: Vec<f64>,
    pub entropy: f64,
    /// The Legendre rate of the same event.
    pub fenchel_value: f64,
    pub gap: f64,
    pub feasible: bool,
    /// The event is reachable only on its boundary (equality forced).
    pub degenerate: bool,
    /// Entropy reached by the tilted (dual) path.
    pub dual_entropy: f64,
    /// Entropy reached by projected gradient (primal) path.
    pub primal_entropy: f64,
}

/// Constraint data `a·q ≥ ε`, `b·q ≥ -u` over the simplex.
struct Problem {
    p: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    epsilon: f64,
    /// `None` when the screen is dropped.
    u: Option<f64>,
}

impl Problem {
    fn violation(&self, q: &[f64]) -> f64 {
        let mut v = (self.epsilon - dot(&self.a, q)).max(0.0);
        if let Some(u) = self.u {
            v = v.max(-u - dot(&self.b, q));
        }
        v.max((q.iter().sum::<f64>() - 1.0).abs())
            .max(q.iter().fold(0.0f64, |m, &x| m.max(-x)))
    }

    /// `max a·q` over laws satisfying the screen, attained on one atom or on a
    /// pair of atoms straddling `b·q = -u`.
    fn max_reachable(&self) -> f64 {
        let Some(u) = self.u else {
            return self.a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        };
        let n = self.a.len();
        let floor = -u;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if self.b[i] >= floor {
                best = best.max(self.a[i]);
            }
            for j in 0..n {
                // mix i (screen satisfied) with j (violated) so b·q = -u exactly
                if self.b[i] > floor && self.b[j] < floor {
                    let w = (floor - self.b[j]) / (self.b[i] - self.b[j]);
                    best = best.max(w * self.a[i] + (1.0 - w) * self.a[j]);
                }
            }
        }
        best
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Minimal relative entropy of the event of `variant` at `(ε, u)`; `u = ∞`
/// drops the screening constraint.
pub fn sanov_rate(
    model: &DistributionModel,
    pair: &ObservablePair,
    epsilon: f64,
    u: f64,
    variant: RateVariant,
) -> Result<SanovResult> {
    let Some((atoms, p)) = model.atoms() else {
        return Err(Error::Capability("relative-entropy rate needs a discrete model".into()));
    };
    if atoms.len() > MAX_SUPPORT {
        return Err(Error::Capability(format!("support of {} atoms exceeds {MAX_SUPPORT}", atoms.len())));
    }
    if !(u > 0.0) {
        return Err(Error::Domain { what: "u", value: u });
    }
    let (mu, nu) = dist::means(model, pair)?;
    let (f, uv) = pair.tabulate(model)?;
    let (sf, su) = variant.signs();
    let problem = Problem {
        a: f.iter().map(|v| sf * (v - mu)).collect(),
        b: uv.iter().map(|v| su * (v - nu)).collect(),
        p,
        epsilon,
        u: u.is_finite().then_some(u),
    };
    let fenchel = rates::rate_sup(model, pair, epsilon, u, variant)?;

    let reach = problem.max_reachable();
    if reach < epsilon - FEASIBILITY_TOL {
        return Ok(SanovResult {
            q_star: problem.p.clone(),
            entropy: f64::INFINITY,
            fenchel_value: fenchel.value,
            gap: if fenchel.value == f64::INFINITY { 0.0 } else { f64::INFINITY },
            feasible: false,
            degenerate: false,
            dual_entropy: f64::INFINITY,
            primal_entropy: f64::INFINITY,
        });
    }
    let degenerate = reach <= epsilon + FEASIBILITY_TOL;

    let dual = fenchel.theta.map(|t| dual_path(&problem, t));
    let primal = primal_path(&problem);
    let score = |q: &[f64]| {
        if problem.violation(q) <= 1e-9 {
            relative_entropy(q, &problem.p).unwrap_or(f64::INFINITY)
        } else {
            f64::INFINITY
        }
    };
    let dual_entropy = dual.as_deref().map_or(f64::INFINITY, score);
    let primal_entropy = score(&primal);
    let (q_star, entropy) = match dual {
        Some(q) if dual_entropy <= primal_entropy => (q, dual_entropy),
        _ => (primal, primal_entropy),
    };
    Ok(SanovResult {
        q_star,
        entropy,
        fenchel_value: fenchel.value,
        gap: (entropy - fenchel.value).abs(),
        feasible: true,
        degenerate,
        dual_entropy,
        primal_entropy,
    })
}

/// `Q_θ ∝ P e^{θ₁ A + θ₂ B}`.
fn tilt(problem: &Problem, t1: f64, t2: f64) -> Vec<f64> {
    let logs: Vec<f64> = problem
        .p
        .iter()
        .zip(&problem.a)
        .zip(&problem.b)
        .map(|((p, a), b)| p.ln() + t1 * a + t2 * b)
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Exponential tilt at the Legendre maximizer, polished by Newton steps on
/// the dual over the constraints active there.
fn dual_path(problem: &Problem, theta: (f64, f64)) -> Vec<f64> {
    let (mut t1, mut t2) = theta;
    let u = problem.u.unwrap_or(0.0);
    // a θ₂ at rounding level means the screen is slack
    if t2 <= 1e-9 * t1.max(1.0) {
        t2 = 0.0;
    }
    let active2 = problem.u.is_some() && t2 > 0.0;
    // dual gradient on the active coordinates; its norm drives the line search
    // because dual values stop resolving progress near the optimum
    let residual = |t1: f64, t2: f64| {
        let q = tilt(problem, t1, t2);
        let ga = problem.epsilon - dot(&q, &problem.a);
        let gb = if active2 { -u - dot(&q, &problem.b) } else { 0.0 };
        let ga = if t1 == 0.0 { ga.max(0.0) } else { ga };
        ga.hypot(gb)
    };
    for _ in 0..100 {
        let q = tilt(problem, t1, t2);
        let ma = dot(&q, &problem.a);
        let mb = dot(&q, &problem.b);
        let ga = problem.epsilon - ma;
        let gb = -u - mb;
        let mut vaa = 0.0;
        let mut vab = 0.0;
        let mut vbb = 0.0;
        for ((qj, a), b) in q.iter().zip(&problem.a).zip(&problem.b) {
            vaa += qj * (a - ma) * (a - ma);
            vab += qj * (a - ma) * (b - mb);
            vbb += qj * (b - mb) * (b - mb);
        }
        // Newton direction for the concave dual: Cov · d = gradient
        let (d1, d2) = if active2 {
            let det = vaa * vbb - vab * vab;
            if !(det > 0.0) {
                break;
            }
            ((vbb * ga - vab * gb) / det, (vaa * gb - vab * ga) / det)
        } else {
            if !(vaa > 0.0) {
                break;
            }
            (ga / vaa, 0.0)
        };
        if !(d1.is_finite() && d2.is_finite()) {
            break;
        }
        let base = residual(t1, t2);
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-12 {
            let n1 = (t1 + step * d1).max(0.0);
            let n2 = if active2 { (t2 + step * d2).max(0.0) } else { t2 };
            if residual(n1, n2) < base {
                moved = (n1 - t1).abs() + (n2 - t2).abs() > 0.0;
                t1 = n1;
                t2 = n2;
                break;
            }
            step *= 0.5;
        }
        if !moved || (ga.abs() < 1e-15 && (!active2 || gb.abs() < 1e-15)) {
            break;
        }
    }
    tilt(problem, t1, t2)
}

fn project_simplex(y: &mut [f64]) {
    let mut s: Vec<f64> = y.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, v) in s.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            tau = t;
        }
    }
    for v in y.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
}

/// Smallest `t ≥ 0` with `reach(t) ≥ target` for nondecreasing `reach`;
/// `t = 0` when already met.
fn monotone_root<F: FnMut(f64) -> f64>(mut reach: F, target: f64) -> f64 {
    if reach(0.0) >= target {
        return 0.0;
    }
    let mut hi = 1.0;
    while reach(hi) < target {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reach(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Euclidean projection onto simplex ∩ `{a·x ≥ ε}` ∩ `{b·x ≥ -u}`.
///
/// The projection is `P_Δ(y + λa + κb)` at the multipliers maximizing the
/// concave dual; each partial derivative is monotone in its own multiplier,
/// so nested bisection finds them: `λ(κ)` solves the `a` constraint for a
/// given `κ`, and `b·x` is nondecreasing along `κ ↦ (λ(κ), κ)`.
fn project_feasible(problem: &Problem, y: &[f64]) -> Vec<f64> {
    let point = |lambda: f64, kappa: f64| {
        let mut z: Vec<f64> = y
            .iter()
            .zip(&problem.a)
            .zip(&problem.b)
            .map(|((v, a), b)| v + lambda * a + kappa * b)
            .collect();
        project_simplex(&mut z);
        z
    };
    let lambda_for = |kappa: f64| monotone_root(|l| dot(&problem.a, &point(l, kappa)), problem.epsilon);
    let kappa = match problem.u {
        Some(u) => monotone_root(|k| dot(&problem.b, &point(lambda_for(k), k)), -u),
        None => 0.0,
    };
    point(lambda_for(kappa), kappa)
}

fn entropy_and_gradient(q: &[f64], p: &[f64]) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let grad = q
        .iter()
        .zip(p)
        .map(|(&qj, &pj)| {
            // at the boundary the true slope is -∞; a floor keeps the smooth
            // model usable for backtracking
            let r = qj.max(GRADIENT_FLOOR) / pj;
            if qj > 0.0 {
                value += qj * (qj / pj).ln();
            }
            r.ln() + 1.0
        })
        .collect();
    (value, grad)
}

/// Accelerated projected gradient on `H(·‖P)` with backtracking, from `P`.
fn primal_path(problem: &Problem) -> Vec<f64> {
    let p = &problem.p;
    let mut x = project_feasible(problem, p);
    let mut fx = relative_entropy(&x, p).unwrap_or(f64::INFINITY);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut lip = 1.0f64;
    let mut still = 0;
    for _ in 0..PRIMAL_ITERATIONS {
        let (fy, g) = entropy_and_gradient(&y, p);
        let mut next;
        let mut fnext;
        loop {
            let step: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - gi / lip).collect();
            next = project_feasible(problem, &step);
            fnext = relative_entropy(&next, p).unwrap_or(f64::INFINITY);
            let d: Vec<f64> = next.iter().zip(&y).map(|(a, b)| a - b).collect();
            let model = fy + dot(&g, &d) + 0.5 * lip * dot(&d, &d);
            if fnext <= model + 1e-15 * fy.abs().max(1.0) || lip > 1e18 {
                break;
            }
            lip *= 2.0;
        }
        let change = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if fnext > fx {
            if lip > 1e18 {
                // no step from the current point decreases the entropy
                break;
            }
            // restart momentum
            t = 1.0;
            y = x.clone();
            lip *= 2.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = next;
        fx = fnext;
        t = t_next;
        lip *= 0.9;
        if change < 1e-15 {
            still += 1;
            if still > 20 {
                break;
            }
        } else {
            still = 0;
        }
    }
    x
}

/// A random discrete instance whose event is strictly reachable.
#[derive(Clone, Debug, PartialEq)]
pub struct SanovInstance {
    pub model: DistributionModel,
    pub pair: ObservablePair,
    pub epsilon: f64,
    pub u: f64,
}

/// Draws 2 to 8 atoms with positive weights and tabulated `F`, `U`, then
/// picks `(ε, u)` so that a random law `Q₀` satisfies both constraints of
/// the `LambdaPlus` event strictly.
pub fn random_instance(stream: &mut RandomStream) -> Result<SanovInstance> {
    loop {
        let n = 2 + (stream.uniform() * 7.0) as usize;
        let weights: Vec<f64> = (0..n).map(|_| 0.05 + stream.uniform()).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let f: Vec<f64> = (0..n).map(|_| 2.0 * stream.uniform() - 1.0).collect();
        let u: Vec<f64> = (0..n).map(|_| 2.0 * stream.uniform() - 1.0).collect();
        let q0: Vec<f64> = {
            let w: Vec<f64> = (0..n).map(|_| stream.uniform()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        };
        let mu = dot(&probs, &f);
        let nu = dot(&probs, &u);
        let shift_f = dot(&q0, &f) - mu;
        let shift_u = dot(&q0, &u) - nu;
        if shift_f < 0.02 {
            continue;
        }
        let epsilon = shift_f * (0.3 + 0.6 * stream.uniform());
        let u_level = shift_u.max(0.0) + 0.005 + 0.2 * stream.uniform();
        let atoms: Vec<f64> = (0..n).map(|j| j as f64).collect();
        let model = DistributionModel::finite(atoms, probs)?;
        let pair = ObservablePair::new(Observable::Table { values: f }, Observable::Table { values: u });
        return Ok(SanovInstance { model, pair, epsilon, u: u_level });
    }
}
