//! Finite-difference stencils on uniform 1-D grids.
//!
//! First derivatives use five-point, fourth-order stencils (central in the
//! interior, one-sided/offset near the ends); they are exact on polynomials
//! of degree <= 4, which keeps composed boundary operators free of
//! low-order endpoint artefacts. Second derivatives use the classical
//! three-point central stencil with four-point one-sided closures at the
//! ends (second order).

use num_complex::Complex64 as C64;

/// Minimum number of grid points the stencils support.
pub const MIN_POINTS: usize = 8;

/// First-derivative stencil row at grid index `i` of an `m`-point grid.
///
/// Returns (column indices, coefficients); coefficients already include 1/h.
pub fn d1_row(m: usize, i: usize, h: f64) -> ([usize; 5], [f64; 5]) {
    assert!(m >= MIN_POINTS && i < m);
    let w = 1.0 / (12.0 * h);
    if i == 0 {
        ([0, 1, 2, 3, 4], [-25.0 * w, 48.0 * w, -36.0 * w, 16.0 * w, -3.0 * w])
    } else if i == 1 {
        ([0, 1, 2, 3, 4], [-3.0 * w, -10.0 * w, 18.0 * w, -6.0 * w, 1.0 * w])
    } else if i == m - 2 {
        ([m - 5, m - 4, m - 3, m - 2, m - 1], [-1.0 * w, 6.0 * w, -18.0 * w, 10.0 * w, 3.0 * w])
    } else if i == m - 1 {
        ([m - 5, m - 4, m - 3, m - 2, m - 1], [3.0 * w, -16.0 * w, 36.0 * w, -48.0 * w, 25.0 * w])
    } else {
        ([i - 2, i - 1, i, i + 1, i + 2], [1.0 * w, -8.0 * w, 0.0, 8.0 * w, -1.0 * w])
    }
}

/// Second-derivative stencil row at grid index `i`; coefficients include 1/h^2.
///
/// The one-sided closures at the ends are error-matched to the central
/// stencil: their truncation is f'' + (h^2/12) f'''' + O(h^3), the same
/// leading term as in the interior, so composed operators see a smooth
/// error field instead of an O(h^2) jump at the ends.
pub fn d2_row(m: usize, i: usize, h: f64) -> ([usize; 5], [f64; 5]) {
    assert!(m >= MIN_POINTS && i < m);
    let w = 1.0 / (h * h);
    if i == 0 {
        ([0, 1, 2, 3, 4], [3.0 * w, -9.0 * w, 10.0 * w, -5.0 * w, 1.0 * w])
    } else if i == m - 1 {
        ([m - 5, m - 4, m - 3, m - 2, m - 1], [1.0 * w, -5.0 * w, 10.0 * w, -9.0 * w, 3.0 * w])
    } else {
        // pad with zero coefficients so the return type stays uniform
        ([i - 1, i, i + 1, i, i], [w, -2.0 * w, w, 0.0, 0.0])
    }
}

/// d/ds of a complex profile.
pub fn deriv1(profile: &[C64], h: f64) -> Vec<C64> {
    let m = profile.len();
    let mut out = vec![C64::ZERO; m];
    for i in 0..m {
        let (cols, coeffs) = d1_row(m, i, h);
        let mut acc = C64::ZERO;
        for (c, w) in cols.iter().zip(coeffs.iter()) {
            acc += profile[*c] * *w;
        }
        out[i] = acc;
    }
    out
}

/// d^2/ds^2 of a complex profile.
pub fn deriv2(profile: &[C64], h: f64) -> Vec<C64> {
    let m = profile.len();
    let mut out = vec![C64::ZERO; m];
    for i in 0..m {
        out[i] = deriv2_at(profile, h, i);
    }
    out
}

/// First derivative at a single grid index.
pub fn deriv1_at(profile: &[C64], h: f64, i: usize) -> C64 {
    let (cols, coeffs) = d1_row(profile.len(), i, h);
    cols.iter().zip(coeffs.iter()).map(|(c, w)| profile[*c] * *w).sum()
}

/// Second derivative at a single grid index.
pub fn deriv2_at(profile: &[C64], h: f64, i: usize) -> C64 {
    let (cols, coeffs) = d2_row(profile.len(), i, h);
    cols.iter().zip(coeffs.iter()).map(|(c, w)| profile[*c] * *w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, f: impl Fn(f64) -> f64) -> (Vec<C64>, f64, Vec<f64>) {
        let h = 2.0 / (m - 1) as f64;
        let s: Vec<f64> = (0..m).map(|i| -1.0 + i as f64 * h).collect();
        (s.iter().map(|&x| C64::new(f(x), 0.0)).collect(), h, s)
    }

    #[test]
    fn d1_exact_on_quartics_everywhere() {
        let m = 17;
        let (p, h, s) = sample(m, |x| 3.0 * x.powi(4) - 2.0 * x.powi(3) + x - 5.0);
        let d = deriv1(&p, h);
        for i in 0..m {
            let exact = 12.0 * s[i].powi(3) - 6.0 * s[i] * s[i] + 1.0;
            assert!((d[i].re - exact).abs() < 1e-10, "i={i}: {} vs {exact}", d[i].re);
        }
    }

    #[test]
    fn d2_exact_on_cubics_everywhere() {
        let m = 12;
        let (p, h, s) = sample(m, |x| x.powi(3) - 4.0 * x * x + 7.0);
        let d = deriv2(&p, h);
        for i in 0..m {
            let exact = 6.0 * s[i] - 8.0;
            assert!((d[i].re - exact).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn d1_fourth_order_on_sine() {
        let mut errs = Vec::new();
        for &m in &[41usize, 81, 161] {
            let (p, h, s) = sample(m, |x| (2.0 * x).sin());
            let d = deriv1(&p, h);
            let err = (0..m)
                .map(|i| (d[i].re - 2.0 * (2.0 * s[i]).cos()).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let rate = (errs[0] / errs[2]).log2() / 2.0;
        assert!((rate - 4.0).abs() < 0.3, "measured rate {rate}, errors {errs:?}");
    }

    #[test]
    fn d2_error_constant_is_matched_at_the_ends() {
        // on f = x^4 every row (central and one-sided) must return
        // f'' + 2 h^2 exactly: the closures share the central error constant
        let m = 14;
        let (p, h, s) = sample(m, |x| x.powi(4));
        let d = deriv2(&p, h);
        for i in 0..m {
            let expect = 12.0 * s[i] * s[i] + 2.0 * h * h;
            assert!((d[i].re - expect).abs() < 1e-9, "i={i}: {} vs {expect}", d[i].re);
        }
    }

    #[test]
    fn d2_second_order_on_sine() {
        let mut errs = Vec::new();
        for &m in &[41usize, 81, 161] {
            let (p, h, s) = sample(m, |x| (2.0 * x).sin());
            let d = deriv2(&p, h);
            let err = (0..m)
                .map(|i| (d[i].re + 4.0 * (2.0 * s[i]).sin()).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let rate = (errs[0] / errs[2]).log2() / 2.0;
        assert!((rate - 2.0).abs() < 0.3, "measured rate {rate}, errors {errs:?}");
    }
}
