//! Scalar root bracketing and maximisation used by the neutral-curve searches.

use crate::error::{Error, Result};

/// Root of `f` in `[a, b]` by Brent's method; `f(a)` and `f(b)` must differ in sign.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::SearchRange(alloc::format!(
            "f({a}) = {fa:.4e} and f({b}) = {fb:.4e} share a sign"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Ok(b)
}

/// Maximiser of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cube_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-13).unwrap();
        assert!((r - libm::cbrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(matches!(
            brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-10),
            Err(Error::SearchRange(_))
        ));
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| Ok(3.0 - (x - 1.25) * (x - 1.25)), 0.0, 4.0, 1e-9).unwrap();
        // Comparisons locate a smooth peak only to sqrt(eps |f| / |f''|) ~ 2e-8.
        assert!((x - 1.25).abs() < 1e-7);
        assert!((fx - 3.0).abs() < 1e-12);
    }
}
