//! Dense BFGS with box constraints via a logistic reparameterisation.
//!
//! The search runs unconstrained in `u`-space with
//! `x_i = lo_i + (hi_i - lo_i) * sigmoid(u_i)`; gradients are chain-ruled
//! accordingly. Line-search candidates are scored with the value-only
//! callback; the gradient callback runs once per accepted step. Good enough
//! for the handful of kernel hyperparameters this crate optimises.

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

const U_CAP: f64 = 40.0;

struct BoxMap {
    lo: Vec<f64>,
    span: Vec<f64>,
}

impl BoxMap {
    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lo.iter().zip(&self.span))
            .map(|(&ui, (&lo, &span))| lo + span * sigmoid(ui))
            .collect()
    }

    fn to_u(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.span))
            .map(|(&xi, (&lo, &span))| {
                let p = ((xi - lo) / span).clamp(1e-12, 1.0 - 1e-12);
                logit(p).clamp(-U_CAP, U_CAP)
            })
            .collect()
    }

    fn chain(&self, u: &[f64], grad_x: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(grad_x.iter().zip(&self.span))
            .map(|(&ui, (&gx, &span))| {
                let s = sigmoid(ui);
                gx * span * s * (1.0 - s)
            })
            .collect()
    }
}

/// Maximise inside `[lo, hi]` from `start`.
///
/// `value` returns the objective alone; `value_grad` additionally returns
/// the gradient with respect to the box coordinates. `None` marks numeric
/// failure and is treated as -inf by the line search. Returns the final
/// point and value, or `None` when the start point fails to evaluate.
pub(crate) fn bfgs_box_maximize<FV, FG>(
    value: &FV,
    value_grad: &FG,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iter: usize,
    grad_tol: f64,
) -> Option<(Vec<f64>, f64)>
where
    FV: Fn(&[f64]) -> Option<f64>,
    FG: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let dim = start.len();
    let map = BoxMap {
        lo: lo.to_vec(),
        span: lo.iter().zip(hi).map(|(&l, &h)| h - l).collect(),
    };
    // minimise the negated objective in u-space
    let neg_value = |u: &[f64]| -> Option<f64> { value(&map.to_x(u)).map(|v| -v) };
    let neg_value_grad = |u: &[f64]| -> Option<(f64, Vec<f64>)> {
        let (v, grad_x) = value_grad(&map.to_x(u))?;
        let grad_u = map.chain(u, &grad_x);
        Some((-v, grad_u.iter().map(|g| -g).collect()))
    };

    let mut u = map.to_u(start);
    let (mut fval, mut grad) = neg_value_grad(&u)?;
    let mut h = vec![0.0; dim * dim];
    for i in 0..dim {
        h[i * dim + i] = 1.0;
    }
    let mut first_update_done = false;

    for _ in 0..max_iter {
        let gnorm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gnorm < grad_tol {
            break;
        }
        // d = -H g
        let mut dir = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += h[i * dim + j] * grad[j];
            }
            dir[i] = -acc;
        }
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            // not a descent direction: reset to steepest descent
            for i in 0..dim {
                dir[i] = -grad[i];
                for j in 0..dim {
                    h[i * dim + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            first_update_done = false;
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }

        // Armijo backtracking on values only
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let u_new: Vec<f64> = u
                .iter()
                .zip(&dir)
                .map(|(&ui, &di)| (ui + step * di).clamp(-U_CAP, U_CAP))
                .collect();
            if let Some(v_new) = neg_value(&u_new) {
                if v_new <= fval + 1e-4 * step * slope {
                    accepted = Some((u_new, v_new));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((u_new, _)) = accepted else {
            break;
        };
        let Some((v_new, g_new)) = neg_value_grad(&u_new) else {
            break;
        };

        let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let step_size = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            if !first_update_done {
                // Nocedal-Wright initial scaling before the first update
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                for i in 0..dim {
                    for j in 0..dim {
                        h[i * dim + j] = if i == j { scale } else { 0.0 };
                    }
                }
                first_update_done = true;
            }
            bfgs_update(&mut h, &s, &y, sy, dim);
        }
        u = u_new;
        fval = v_new;
        grad = g_new;
        if step_size < 1e-13 {
            break;
        }
    }
    Some((map.to_x(&u), -fval))
}

/// H <- (I - r s y^T) H (I - r y s^T) + r s s^T with r = 1/(y^T s)
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, dim: usize) {
    let r = 1.0 / sy;
    // hy = H y
    let mut hy = vec![0.0; dim];
    for i in 0..dim {
        let mut acc = 0.0;
        for j in 0..dim {
            acc += h[i * dim + j] * y[j];
        }
        hy[i] = acc;
    }
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..dim {
        for j in 0..dim {
            h[i * dim + j] += r * r * (sy + yhy) * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair<F, G>(f: F, g: G) -> (F, G)
    where
        F: Fn(&[f64]) -> Option<f64>,
        G: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
    {
        (f, g)
    }

    #[test]
    fn quadratic_interior_optimum() {
        let (v, vg) = pair(
            |x: &[f64]| Some(-(x[0] - 1.2) * (x[0] - 1.2) - 2.0 * (x[1] + 0.4) * (x[1] + 0.4)),
            |x: &[f64]| {
                let val = -(x[0] - 1.2) * (x[0] - 1.2) - 2.0 * (x[1] + 0.4) * (x[1] + 0.4);
                Some((val, vec![-2.0 * (x[0] - 1.2), -4.0 * (x[1] + 0.4)]))
            },
        );
        let (x, fval) =
            bfgs_box_maximize(&v, &vg, &[0.0, 0.0], &[-3.0, -3.0], &[3.0, 3.0], 100, 1e-8)
                .unwrap();
        assert!((x[0] - 1.2).abs() < 1e-5 && (x[1] + 0.4).abs() < 1e-5, "{x:?}");
        assert!(fval > -1e-9);
    }

    #[test]
    fn optimum_pinned_at_bound() {
        let (v, vg) = pair(
            |x: &[f64]| Some(x[0]),
            |x: &[f64]| Some((x[0], vec![1.0])),
        );
        let (x, _) = bfgs_box_maximize(&v, &vg, &[0.5], &[0.0], &[1.0], 200, 1e-9).unwrap();
        assert!(x[0] > 0.999, "{}", x[0]);
    }

    #[test]
    fn failing_start_returns_none() {
        let v = |_: &[f64]| None;
        let vg = |_: &[f64]| None;
        assert!(bfgs_box_maximize(&v, &vg, &[0.5], &[0.0], &[1.0], 50, 1e-6).is_none());
    }

    #[test]
    fn rosenbrock_like_valley() {
        let val = |x: &[f64]| -(1.0 - x[0]).powi(2) - 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (v, vg) = pair(
            move |x: &[f64]| Some(val(x)),
            move |x: &[f64]| {
                let (a, b) = (x[0], x[1]);
                let da = -2.0 * (a - 1.0) + 400.0 * a * (b - a * a);
                let db = -200.0 * (b - a * a);
                Some((val(x), vec![da, db]))
            },
        );
        let (x, _) =
            bfgs_box_maximize(&v, &vg, &[-1.0, 1.0], &[-2.0, -2.0], &[2.0, 2.0], 500, 1e-8)
                .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-3 && (x[1] - 1.0).abs() < 1e-3, "{x:?}");
    }
}
