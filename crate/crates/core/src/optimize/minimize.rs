//! Nonlinear conjugate gradient and momentum gradient descent over a flat
//! parameter vector. Every call to the objective counts as one step.

use crate::cost::Objective;
use crate::error::{Error, Result};

use super::config::{LineSearchConfig, Method, OptimizerConfig};
use super::trace::{ConvergenceTrace, Recorder, Status};

#[derive(Debug, Clone)]
pub struct Minimum {
    /// Best parameters seen over all calls.
    pub x: Vec<f64>,
    pub cost: f64,
    /// Completed line searches for CG, steps for gradient descent.
    pub iterations: usize,
    pub trace: ConvergenceTrace,
}

const FLAT_REL: f64 = 1e-12;

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

/// Wraps the objective with call accounting, the trace and best-point tracking.
struct Evaluator<'a, O: Objective + ?Sized> {
    obj: &'a O,
    budget: usize,
    rec: Recorder,
    best: Option<(Vec<f64>, f64)>,
    iterations: usize,
}

#[derive(Clone)]
struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

impl<'a, O: Objective + ?Sized> Evaluator<'a, O> {
    fn new(obj: &'a O, budget: usize) -> Self {
        Self { obj, budget, rec: Recorder::new(), best: None, iterations: 0 }
    }

    fn calls(&self) -> usize {
        self.rec.records.len()
    }

    fn exhausted(&self) -> bool {
        self.calls() >= self.budget
    }

    fn eval(&mut self, x: Vec<f64>) -> Result<Point> {
        let (f, g) = self.obj.value_grad(&x)?;
        let gn = inf_norm(&g);
        self.rec.push(f, gn);
        if f.is_finite() && gn.is_finite() && self.best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            self.best = Some((x.clone(), f));
        }
        Ok(Point { x, f, g })
    }

    fn finish(self, status: Status, fallback: Vec<f64>) -> Minimum {
        let (x, cost) = self.best.unwrap_or((fallback, f64::NAN));
        Minimum {
            x,
            cost,
            iterations: self.iterations,
            trace: ConvergenceTrace { records: self.rec.records, status, provenance: None },
        }
    }
}

/// Minimizes `obj` from `x0` with the method in `config`.
///
/// Returns the best point seen. A non-finite value at the starting point (or
/// anywhere along a gradient-descent run) is an error; in a line search it is
/// treated as an overly long step.
pub fn minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<Minimum> {
    config.validate()?;
    if x0.len() != obj.num_params() {
        return Err(Error::Dimension(format!(
            "initial point has {} entries, objective expects {}",
            x0.len(),
            obj.num_params()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "initial parameter", step: 0 });
    }
    match config.method {
        Method::Cg => conjugate_gradient(obj, x0, config),
        Method::GdMomentum => gd_momentum(obj, x0, config),
    }
}

fn check_finite(p: &Point, step: usize) -> Result<()> {
    if !p.f.is_finite() {
        return Err(Error::NonFinite { what: "cost", step });
    }
    if p.g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "gradient", step });
    }
    Ok(())
}

fn conjugate_gradient<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<Minimum> {
    let mut ev = Evaluator::new(obj, config.max_steps);
    let mut cur = ev.eval(x0.to_vec())?;
    check_finite(&cur, 1)?;

    let mut dir: Vec<f64> = cur.g.iter().map(|v| -v).collect();
    // mirrors the usual first-step heuristic: f_prev = f + ‖g‖/2
    let mut f_prev = cur.f + dot(&cur.g, &cur.g).sqrt() / 2.0;

    loop {
        if inf_norm(&cur.g) <= config.tol {
            return Ok(ev.finish(Status::Converged, cur.x));
        }
        if ev.exhausted() {
            return Ok(ev.finish(Status::StepCap, cur.x));
        }
        let mut slope = dot(&cur.g, &dir);
        if !(slope < 0.0) {
            dir = cur.g.iter().map(|v| -v).collect();
            slope = -dot(&cur.g, &cur.g);
        }
        let mut alpha0 = (1.01 * 2.0 * (cur.f - f_prev) / slope).min(1.0);
        if !(alpha0 > 0.0) || !alpha0.is_finite() {
            alpha0 = 1.0;
        }

        let next = match line_search(&mut ev, &cur, &dir, slope, alpha0, &config.line_search)? {
            Search::Found(p) => p,
            Search::Budget => return Ok(ev.finish(Status::StepCap, cur.x)),
            Search::Failed => {
                // retry once along steepest descent before giving up
                let sd: Vec<f64> = cur.g.iter().map(|v| -v).collect();
                let sd_slope = -dot(&cur.g, &cur.g);
                if dir == sd {
                    return Ok(ev.finish(Status::LineSearchFailure, cur.x));
                }
                let a0 = (1.0 / inf_norm(&cur.g)).min(1.0);
                match line_search(&mut ev, &cur, &sd, sd_slope, a0, &config.line_search)? {
                    Search::Found(p) => {
                        dir = sd;
                        p
                    }
                    Search::Budget => return Ok(ev.finish(Status::StepCap, cur.x)),
                    Search::Failed => return Ok(ev.finish(Status::LineSearchFailure, cur.x)),
                }
            }
        };

        ev.iterations += 1;
        // Polak–Ribière+
        let gg = dot(&cur.g, &cur.g);
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let beta = (dot(&next.g, &y) / gg).max(0.0);
        dir = next.g.iter().zip(&dir).map(|(g, d)| -g + beta * d).collect();
        f_prev = cur.f;
        cur = next;
    }
}

enum Search {
    Found(Point),
    Failed,
    Budget,
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Minimizer of the quadratic through `(a, fa, da)` and `(b, fb)`.
fn quad_min(a: f64, fa: f64, da: f64, b: f64, fb: f64) -> Option<f64> {
    let h = b - a;
    let curv = fb - fa - da * h;
    if !(curv > 0.0) {
        return None;
    }
    let t = a - da * h * h / (2.0 * curv);
    t.is_finite().then_some(t)
}

/// Strong-Wolfe line search with cubic interpolation in the zoom phase.
fn line_search<O: Objective + ?Sized>(
    ev: &mut Evaluator<'_, O>,
    start: &Point,
    dir: &[f64],
    slope0: f64,
    alpha0: f64,
    ls: &LineSearchConfig,
) -> Result<Search> {
    let f0 = start.f;
    // Near a minimizer f differences drown in rounding; there the decrease is
    // judged from the derivative under a quadratic model instead.
    let flat = FLAT_REL * f0.abs().max(1.0);
    let armijo = |a: f64, f: f64, d: f64| {
        f <= f0 + ls.c1 * a * slope0 || (f <= f0 + flat && d <= (2.0 * ls.c1 - 1.0) * slope0)
    };
    let curvature = |d: f64| d.abs() <= -ls.c2 * slope0;

    // bracket: lo always satisfies the sufficient-decrease test
    let mut lo = (0.0, f0, slope0, None::<Point>);
    let mut hi: Option<(f64, f64, f64)> = None;
    let mut alpha = alpha0;
    let mut prev = (0.0, f0, slope0);

    for _ in 0..ls.max_probes {
        if ev.exhausted() {
            return Ok(match lo.3 {
                Some(p) => Search::Found(p),
                None => Search::Budget,
            });
        }
        let p = ev.eval(axpy(&start.x, alpha, dir))?;
        let finite = p.f.is_finite() && p.g.iter().all(|v| v.is_finite());
        if !finite {
            hi = Some((alpha, f64::INFINITY, f64::NAN));
            alpha = lo.0 + ls.shrink * (alpha - lo.0);
            continue;
        }
        let d = dot(&p.g, dir);

        match hi {
            None => {
                if !armijo(alpha, p.f, d) || p.f > prev.1 + flat && prev.0 > 0.0 {
                    hi = Some((alpha, p.f, d));
                } else if curvature(d) {
                    return Ok(Search::Found(p));
                } else if d >= 0.0 {
                    hi = Some((lo.0, lo.1, lo.2));
                    lo = (alpha, p.f, d, Some(p));
                } else {
                    // still descending: extrapolate
                    let next = cubic_min(prev.0, prev.1, prev.2, alpha, p.f, d)
                        .filter(|t| *t > alpha)
                        .unwrap_or(4.0 * alpha)
                        .min(10.0 * alpha);
                    prev = (alpha, p.f, d);
                    lo = (alpha, p.f, d, Some(p));
                    alpha = next;
                    continue;
                }
            }
            Some(_) => {
                if !armijo(alpha, p.f, d) || (p.f >= lo.1 && !(p.f <= lo.1 + flat && d.abs() < lo.2.abs())) {
                    hi = Some((alpha, p.f, d));
                } else {
                    if curvature(d) {
                        return Ok(Search::Found(p));
                    }
                    if d * (hi.unwrap().0 - alpha) >= 0.0 {
                        hi = Some((lo.0, lo.1, lo.2));
                    }
                    lo = (alpha, p.f, d, Some(p));
                }
            }
        }

        // zoom: next trial inside the bracket
        let (h_a, h_f, h_d) = hi.unwrap();
        let (l_a, l_f, l_d) = (lo.0, lo.1, lo.2);
        let width = (h_a - l_a).abs();
        let (min_a, max_a) = (l_a.min(h_a), l_a.max(h_a));
        let safe = |t: f64| t > min_a + 0.01 * width && t < max_a - 0.01 * width;
        let trial = if h_f.is_finite() && h_d.is_finite() {
            cubic_min(l_a, l_f, l_d, h_a, h_f, h_d).filter(|t| safe(*t))
        } else {
            None
        }
        .or_else(|| {
            if h_f.is_finite() {
                quad_min(l_a, l_f, l_d, h_a, h_f).filter(|t| safe(*t))
            } else {
                None
            }
        });
        alpha = trial.unwrap_or(if h_f.is_finite() {
            0.5 * (l_a + h_a)
        } else {
            l_a + ls.shrink * (h_a - l_a)
        });
        if width <= f64::EPSILON * max_a.max(1e-300) {
            break;
        }
    }
    // out of probes: any point with sufficient decrease is still progress
    Ok(match lo.3 {
        Some(p) => Search::Found(p),
        None => Search::Failed,
    })
}

fn gd_momentum<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<Minimum> {
    let mut ev = Evaluator::new(obj, config.max_steps);
    let mut x = x0.to_vec();
    let mut velocity = vec![0.0; x.len()];
    loop {
        let p = ev.eval(x.clone())?;
        check_finite(&p, ev.calls())?;
        if config.tol > 0.0 && inf_norm(&p.g) <= config.tol {
            return Ok(ev.finish(Status::Converged, x));
        }
        if ev.exhausted() {
            return Ok(ev.finish(Status::StepCap, x));
        }
        ev.iterations += 1;
        for ((xi, vi), gi) in x.iter_mut().zip(velocity.iter_mut()).zip(&p.g) {
            *vi = config.momentum * *vi - config.learning_rate * gi;
            *xi += *vi;
        }
    }
}
