//! Derivative-free scalar minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Returns the best abscissa seen and its value. The interval shrinks by
/// `1/φ` per evaluation until it is narrower than `tol`.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Evaluates `f` on `grid`, then refines the best grid point with a
/// golden-section search over its two neighbouring cells. The refined point
/// is kept only when it is at least as good as the best grid point.
pub fn grid_then_golden<F>(mut f: F, grid: &[f64], tol: f64) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let (best_i, best_f) = grid
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    if lo == hi {
        return Some((grid[best_i], best_f));
    }
    let (x, fx) = golden_section(&mut f, lo, hi, tol);
    if fx <= best_f {
        Some((x, fx))
    } else {
        Some((grid[best_i], best_f))
    }
}

/// `n` points spaced evenly in log space from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..n)
                .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
                .collect();
            g[0] = lo;
            g[n - 1] = hi;
            g
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let mut g: Vec<f64> = (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect();
            g[n - 1] = hi;
            g
        }
    }
}
