//! One-dimensional minimization of convex functions on the real line.

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const MAX_BRACKET_STEPS: usize = 200;
const MAX_GOLDEN_STEPS: usize = 400;

/// Minimizes a convex `f: R -> R`.
///
/// The bracket starts at `[0, 1]` and doubles toward the lower side until the
/// midpoint is no worse than both ends; golden-section search then shrinks it
/// to `width_tol`.
pub fn minimize_convex(mut f: impl FnMut(f64) -> f64, width_tol: f64) -> f64 {
    let (mut a, mut c) = (0.0_f64, 1.0_f64);
    let (mut fa, mut fc) = (f(a), f(c));
    for _ in 0..MAX_BRACKET_STEPS {
        let m = 0.5 * (a + c);
        let fm = f(m);
        if fm <= fa && fm <= fc {
            break;
        }
        let w = c - a;
        if fa < fm {
            a -= w;
            fa = f(a);
        } else {
            c += w;
            fc = f(c);
        }
    }

    let mut x1 = c - GOLDEN * (c - a);
    let mut x2 = a + GOLDEN * (c - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..MAX_GOLDEN_STEPS {
        if c - a <= width_tol {
            break;
        }
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - GOLDEN * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (c - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}
