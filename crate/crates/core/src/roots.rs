//! Bracketed scalar root finding.

/// Plain bisection of a sign change of `f` on `[a, b]` down to width `tol`.
/// Returns the midpoint of the final bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Illinois (modified regula falsi) on a bracket with `f(a)`, `f(b)` of opposite
/// sign. Fallible callback; stops when the bracket is narrower than `tol` or a
/// step lands within `tol` of the previous iterate. Returns the final bracket.
pub fn illinois<E, F>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok((a, a));
    }
    if fb == 0.0 {
        return Ok((b, b));
    }
    let mut side = 0i8;
    for i in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        // every fourth step bisect, so slow tails cannot stall
        let mut c = if i % 4 == 3 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        let (lo, hi) = (a.min(b), a.max(b));
        if !(c > lo && c < hi) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok((c, c));
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok((a.min(b), a.max(b)))
}

/// Convenience wrapper returning the midpoint of the final Illinois bracket.
pub fn illinois_root<E, F>(f: F, a: f64, b: f64, fa: f64, fb: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (lo, hi) = illinois(f, a, b, fa, fb, tol, 200)?;
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn illinois_converges_on_flat_function() {
        let f = |x: f64| Ok::<_, ()>((x - 0.3).powi(3) + 1e-3 * (x - 0.3));
        let r = illinois_root(f, -1.0, 2.0, f(-1.0).unwrap(), f(2.0).unwrap(), 1e-13).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }

    #[test]
    fn illinois_propagates_errors() {
        let r = illinois_root(|_| Err::<f64, &str>("boom"), 0.0, 1.0, -1.0, 1.0, 1e-12);
        assert_eq!(r, Err("boom"));
    }
}
