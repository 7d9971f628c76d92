//! Nelder–Mead simplex descent on three parameters.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub initial_step: f64,
    pub max_iterations: usize,
    /// Stop once every vertex lies within this distance of the best one.
    pub x_tol: f64,
    /// Stop once the best value drops below this.
    pub f_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            initial_step: 0.25,
            max_iterations: 4000,
            x_tol: 1e-12,
            f_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexResult {
    pub x: [f64; 3],
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(a: &[f64; 3], b: &[f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i] + t * (b[i] - a[i]))
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

/// Minimizes `f` starting from `x0`.
///
/// The start point is a vertex of the initial simplex, so the returned value
/// never exceeds `f(x0)`.
pub fn minimize<F>(f: F, x0: [f64; 3], opts: &SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64; 3]) -> f64,
{
    let mut verts = [x0; 4];
    for (i, v) in verts.iter_mut().skip(1).enumerate() {
        v[i] += opts.initial_step;
    }
    let mut vals = verts.map(|v| f(&v));

    let mut iterations = 0;
    loop {
        // Sort ascending; stable so ties keep insertion order.
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = idx.map(|i| verts[i]);
        vals = idx.map(|i| vals[i]);

        let diameter = verts[1..]
            .iter()
            .map(|v| dist(v, &verts[0]))
            .fold(0.0, f64::max);
        if vals[0] <= opts.f_tol || diameter < opts.x_tol {
            return SimplexResult {
                x: verts[0],
                fx: vals[0],
                iterations,
                converged: true,
            };
        }
        if iterations == opts.max_iterations {
            return SimplexResult {
                x: verts[0],
                fx: vals[0],
                iterations,
                converged: false,
            };
        }
        iterations += 1;

        let centroid = [0, 1, 2].map(|i| (verts[0][i] + verts[1][i] + verts[2][i]) / 3.0);
        let worst = verts[3];

        let reflected = lerp(&centroid, &worst, -REFLECT);
        let fr = f(&reflected);
        if fr < vals[0] {
            let expanded = lerp(&centroid, &worst, -EXPAND);
            let fe = f(&expanded);
            if fe < fr {
                verts[3] = expanded;
                vals[3] = fe;
            } else {
                verts[3] = reflected;
                vals[3] = fr;
            }
            continue;
        }
        if fr < vals[2] {
            verts[3] = reflected;
            vals[3] = fr;
            continue;
        }

        let (candidate, fc) = if fr < vals[3] {
            let c = lerp(&centroid, &reflected, CONTRACT);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = lerp(&centroid, &worst, CONTRACT);
            let fc = f(&c);
            (c, fc)
        };
        if fc < vals[3].min(fr) {
            verts[3] = candidate;
            vals[3] = fc;
            continue;
        }

        let best = verts[0];
        for k in 1..4 {
            verts[k] = lerp(&best, &verts[k], SHRINK);
            vals[k] = f(&verts[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f =
            |x: &[f64; 3]| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0 * x[2].powi(2);
        let r = minimize(f, [0.0; 3], &SimplexOptions::default());
        assert!(r.converged);
        assert!(r.fx < 1e-20, "fx = {}", r.fx);
        assert!((r.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rosenbrock_like() {
        let f = |x: &[f64; 3]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2) + x[2].powi(2)
        };
        let r = minimize(f, [-1.2, 1.0, 0.3], &SimplexOptions::default());
        assert!(r.fx < 1e-14, "fx = {}", r.fx);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64; 3]| x[0].sin() + x[1].cos() * x[2];
        let x0 = [0.3, -0.2, 0.9];
        let r = minimize(
            f,
            x0,
            &SimplexOptions {
                max_iterations: 5,
                f_tol: f64::NEG_INFINITY,
                ..Default::default()
            },
        );
        assert!(r.fx <= f(&x0));
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }

    #[test]
    fn f_tol_stops_immediately_at_zero() {
        let r = minimize(|x| x[0] * x[0], [0.0; 3], &SimplexOptions::default());
        assert_eq!(r.iterations, 0);
        assert_eq!(r.fx, 0.0);
    }
}
