//! Scalar and coordinate-descent minimization for smooth unimodal
//! objectives.

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. The bracket shrinks by the golden ratio per
/// evaluation; `max_evals` bounds the total number of calls to `f`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, max_evals: usize) -> (f64, f64) {
    const PHI: f64 = 1.618_033_988_749_895;
    const RESP: f64 = 2.0 - PHI;

    let mut x1 = a + RESP * (b - a);
    let mut x2 = b - RESP * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;

    let tol = |a: f64, b: f64| 1e-12 * (a.abs() + b.abs()).max(1e-300);
    while evals < max_evals && (b - a).abs() > tol(a, b) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + RESP * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - RESP * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate descent with golden-section line searches for a smooth,
/// locally unimodal 2-D objective. `x0` is the start, `scale` the
/// initial bracket half-width per coordinate. Returns `(x, f(x))`.
pub fn coordinate_descent_2d(
    f: impl Fn(f64, f64) -> f64,
    x0: (f64, f64),
    scale: (f64, f64),
    rel_tol: f64,
    max_sweeps: usize,
) -> ((f64, f64), f64) {
    let (mut x, mut y) = x0;
    let (mut sx, mut sy) = scale;
    let mut best = f(x, y);

    for _ in 0..max_sweeps {
        let (nx, fx) = golden_section_min(|t| f(t, y), x - sx, x + sx, 120);
        if fx < best {
            best = fx;
            x = nx;
        }
        let (ny, fy) = golden_section_min(|t| f(x, t), y - sy, y + sy, 120);
        if fy < best {
            best = fy;
            y = ny;
        }
        let moved = ((nx - x).abs() + (ny - y).abs()).max(0.0);
        // Shrink the brackets toward the current point.
        sx = (0.25 * sx).max(rel_tol * x.abs().max(1e-300));
        sy = (0.25 * sy).max(rel_tol * y.abs().max(1e-300));
        if moved <= rel_tol * (x.abs() + y.abs()) && sx <= 2.0 * rel_tol * x.abs().max(1e-300) {
            break;
        }
    }
    ((x, y), best)
}
