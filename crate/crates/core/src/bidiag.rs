//! Singular value decomposition of real bidiagonal matrices to high relative
//! accuracy.
//!
//! This follows the implicit QR scheme of Demmel and Kahan: zero-shift sweeps
//! whenever a shift could spoil small singular values, shifted sweeps
//! otherwise, and a relative convergence criterion on the off-diagonal. Tiny
//! singular values (the exponentially small edge-mode energies of long
//! modular chains) come out with full relative precision, and so do the
//! singular vectors whenever the relative gap is large.
//!
//! All rotations are tracked so that `B = U diag(σ) Vᵀ` holds for the input.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_ITER_FACTOR: usize = 6;

#[derive(Debug, Clone)]
pub struct BidiagSvd {
    /// Singular values, non-negative and in descending order.
    pub sigma: Vec<f64>,
    /// Left singular vectors as columns.
    pub u: DMatrix<f64>,
    /// Right singular vectors as columns.
    pub v: DMatrix<f64>,
}

/// Plane rotation with `c·f + s·g = r` and `-s·f + c·g = 0`.
fn givens(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        (1.0, 0.0, f)
    } else if f == 0.0 {
        (0.0, 1.0, g)
    } else {
        let r = f.hypot(g);
        let (c, s) = (f / r, g / r);
        if f.abs() > g.abs() && c < 0.0 {
            (-c, -s, -r)
        } else {
            (c, s, r)
        }
    }
}

/// `col_i ← c·col_i + s·col_j`, `col_j ← c·col_j - s·col_i`.
fn rot_cols(m: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    if c == 1.0 && s == 0.0 {
        return;
    }
    let rows = m.nrows();
    let data = m.as_mut_slice();
    let (lo, hi, sj) = if i < j { (i, j, s) } else { (j, i, -s) };
    let (a, b) = data.split_at_mut(hi * rows);
    let ci = &mut a[lo * rows..(lo + 1) * rows];
    let cj = &mut b[..rows];
    // for i > j the rotation in (lo, hi) order has the sign of s flipped
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi + sj * yj;
        *y = c * yj - sj * xi;
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b.is_sign_negative() {
        -a.abs()
    } else {
        a.abs()
    }
}

/// Singular values of the 2×2 upper triangular matrix `[[f, g], [0, h]]`,
/// returned as `(σ_min, σ_max)`.
pub(crate) fn svd2_values(f: f64, g: f64, h: f64) -> (f64, f64) {
    let (fa, ga, ha) = (f.abs(), g.abs(), h.abs());
    let fhmn = fa.min(ha);
    let fhmx = fa.max(ha);
    if fhmn == 0.0 {
        let ssmax = if fhmx == 0.0 {
            ga
        } else {
            let (mx, mn) = (fhmx.max(ga), fhmx.min(ga));
            mx * (1.0 + (mn / mx).powi(2)).sqrt()
        };
        (0.0, ssmax)
    } else if ga < fhmx {
        let as_ = 1.0 + fhmn / fhmx;
        let at = (fhmx - fhmn) / fhmx;
        let au = (ga / fhmx).powi(2);
        let c = 2.0 / ((as_ * as_ + au).sqrt() + (at * at + au).sqrt());
        (fhmn * c, fhmx / c)
    } else {
        let au = fhmx / ga;
        if au == 0.0 {
            ((fhmn * fhmx) / ga, ga)
        } else {
            let as_ = 1.0 + fhmn / fhmx;
            let at = (fhmx - fhmn) / fhmx;
            let c = 1.0 / ((1.0 + (as_ * au).powi(2)).sqrt() + (1.0 + (at * au).powi(2)).sqrt());
            (2.0 * (fhmn * c) * au, ga / (c + c))
        }
    }
}

/// Full SVD of `[[f, g], [0, h]]`:
/// `[[cl, sl], [-sl, cl]] · A · [[cr, -sr], [sr, cr]] = diag(σ_max, σ_min)`.
///
/// Returns `(σ_min, σ_max, sr, cr, sl, cl)` with signed singular values.
pub(crate) fn svd2(f: f64, g: f64, h: f64) -> (f64, f64, f64, f64, f64, f64) {
    let mut ft = f;
    let mut fa = ft.abs();
    let mut ht = h;
    let mut ha = h.abs();
    let mut pmax = 1;
    let swap = ha > fa;
    if swap {
        pmax = 3;
        std::mem::swap(&mut ft, &mut ht);
        std::mem::swap(&mut fa, &mut ha);
    }
    let gt = g;
    let ga = gt.abs();
    let (mut clt, mut crt, mut slt, mut srt);
    let (mut ssmin, mut ssmax);
    if ga == 0.0 {
        ssmin = ha;
        ssmax = fa;
        clt = 1.0;
        crt = 1.0;
        slt = 0.0;
        srt = 0.0;
    } else {
        let mut gasmal = true;
        clt = 0.0;
        crt = 0.0;
        slt = 0.0;
        srt = 0.0;
        ssmin = 0.0;
        ssmax = 0.0;
        if ga > fa {
            pmax = 2;
            if fa / ga < f64::EPSILON / 2.0 {
                gasmal = false;
                ssmax = ga;
                ssmin = if ha > 1.0 {
                    fa / (ga / ha)
                } else {
                    (fa / ga) * ha
                };
                clt = 1.0;
                slt = ht / gt;
                srt = 1.0;
                crt = ft / gt;
            }
        }
        if gasmal {
            let d = fa - ha;
            let mut l = if d == fa { 1.0 } else { d / fa };
            let m = gt / ft;
            let mut t = 2.0 - l;
            let mm = m * m;
            let tt = t * t;
            let s = (tt + mm).sqrt();
            let r = if l == 0.0 {
                m.abs()
            } else {
                (l * l + mm).sqrt()
            };
            let a = 0.5 * (s + r);
            ssmin = ha / a;
            ssmax = fa * a;
            if mm == 0.0 {
                t = if l == 0.0 {
                    sign(2.0, ft) * sign(1.0, gt)
                } else {
                    gt / sign(d, ft) + m / t
                };
            } else {
                t = (m / (s + t) + m / (r + l)) * (1.0 + a);
            }
            l = (t * t + 4.0).sqrt();
            crt = 2.0 / l;
            srt = t / l;
            clt = (crt + srt * m) / a;
            slt = (ht / ft) * srt / a;
        }
    }
    let (csl, snl, csr, snr) = if swap {
        (srt, crt, slt, clt)
    } else {
        (clt, slt, crt, srt)
    };
    let tsign = match pmax {
        1 => sign(1.0, csr) * sign(1.0, csl) * sign(1.0, f),
        2 => sign(1.0, snr) * sign(1.0, csl) * sign(1.0, g),
        _ => sign(1.0, snr) * sign(1.0, snl) * sign(1.0, h),
    };
    ssmax = sign(ssmax, tsign);
    ssmin = sign(ssmin, tsign * sign(1.0, f) * sign(1.0, h));
    (ssmin, ssmax, snr, csr, snl, csl)
}

/// SVD of the square upper bidiagonal matrix with diagonal `d` and
/// superdiagonal `e` (`e.len() == d.len() - 1`).
pub fn svd_upper(d: &[f64], e: &[f64]) -> Result<BidiagSvd> {
    let n = d.len();
    assert!(n >= 1 && e.len() + 1 == n, "bidiagonal shape mismatch");
    let mut d = d.to_vec();
    let mut e = e.to_vec();
    let mut u = DMatrix::identity(n, n);
    let mut v = DMatrix::identity(n, n);
    if n > 1 {
        qr_iterate(&mut d, &mut e, &mut u, &mut v)?;
    }
    Ok(finish(d, u, v))
}

/// SVD of the `m × (m+1)` upper bidiagonal matrix with diagonal `d` (length
/// `m`) and superdiagonal `e` (length `m`, the last entry sitting in the
/// extra column).
///
/// Returns the thin SVD (`v` is `(m+1) × m`) and the unit null vector.
pub fn svd_upper_wide(d: &[f64], e: &[f64]) -> Result<(BidiagSvd, Vec<f64>)> {
    let m = d.len();
    assert!(m >= 1 && e.len() == m, "bidiagonal shape mismatch");
    let mut d = d.to_vec();
    let mut e = e.to_vec();
    let mut vfull = DMatrix::identity(m + 1, m + 1);
    // Right rotations fold the extra column away, leaving a lower bidiagonal
    // block with subdiagonal `e[..m-1]`.
    for i in 0..m {
        let (c, s, r) = givens(d[i], e[i]);
        d[i] = r;
        if i + 1 < m {
            e[i] = s * d[i + 1];
            d[i + 1] *= c;
        } else {
            e[i] = 0.0;
        }
        rot_cols(&mut vfull, i, i + 1, c, s);
    }
    let mut u = DMatrix::identity(m, m);
    // Left rotations turn the lower bidiagonal into an upper one.
    for i in 0..m.saturating_sub(1) {
        let (c, s, r) = givens(d[i], e[i]);
        d[i] = r;
        e[i] = s * d[i + 1];
        d[i + 1] *= c;
        rot_cols(&mut u, i, i + 1, c, s);
    }
    e.truncate(m - 1);
    let mut v = vfull.columns(0, m).into_owned();
    let null: Vec<f64> = vfull.column(m).iter().copied().collect();
    if m > 1 {
        qr_iterate(&mut d, &mut e, &mut u, &mut v)?;
    }
    Ok((finish(d, u, v), null))
}

fn finish(mut d: Vec<f64>, mut u: DMatrix<f64>, mut v: DMatrix<f64>) -> BidiagSvd {
    let n = d.len();
    for (i, di) in d.iter_mut().enumerate() {
        if *di < 0.0 {
            *di = -*di;
            v.column_mut(i).neg_mut();
        }
    }
    // selection sort into descending order, swapping vectors alongside
    for i in 0..n {
        let mut best = i;
        for j in i + 1..n {
            if d[j] > d[best] {
                best = j;
            }
        }
        if best != i {
            d.swap(i, best);
            u.swap_columns(i, best);
            v.swap_columns(i, best);
        }
    }
    BidiagSvd { sigma: d, u, v }
}

fn qr_iterate(
    d: &mut [f64],
    e: &mut [f64],
    u: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON / 2.0;
    let unfl = f64::MIN_POSITIVE;
    let tolmul = 10f64.max(100f64.min(eps.powf(-0.125)));
    let tol = tolmul * eps;
    let maxit = MAX_ITER_FACTOR * n * n;

    let mut sminoa = d[0].abs();
    if sminoa != 0.0 {
        let mut mu = sminoa;
        for i in 1..n {
            mu = d[i].abs() * (mu / (mu + e[i - 1].abs()));
            sminoa = sminoa.min(mu);
            if sminoa == 0.0 {
                break;
            }
        }
    }
    sminoa /= (n as f64).sqrt();
    let thresh = (tol * sminoa).max(MAX_ITER_FACTOR as f64 * (n as f64 * (n as f64 * unfl)));

    let mut iter = 0usize;
    let mut oldll: isize = -1;
    let mut oldm: isize = -1;
    let mut idir = 0u8;
    // `hi` is the last row of the active block
    let mut hi: isize = n as isize - 1;

    'outer: while hi > 0 {
        if iter > maxit {
            return Err(Error::NoConvergence(iter));
        }
        let h = hi as usize;

        // locate the bottom unreduced block lo..=h
        let mut smax = d[h].abs();
        let mut lo = 0usize;
        for ll in (0..h).rev() {
            let abss = d[ll].abs();
            let abse = e[ll].abs();
            if abse <= thresh {
                e[ll] = 0.0;
                if ll == h - 1 {
                    hi -= 1;
                    continue 'outer;
                }
                lo = ll + 1;
                break;
            }
            smax = smax.max(abss).max(abse);
        }

        if lo + 1 == h {
            let (sigmn, sigmx, sinr, cosr, sinl, cosl) = svd2(d[lo], e[lo], d[h]);
            d[lo] = sigmx;
            e[lo] = 0.0;
            d[h] = sigmn;
            rot_cols(v, lo, h, cosr, sinr);
            rot_cols(u, lo, h, cosl, sinl);
            hi -= 2;
            continue;
        }

        if lo as isize > oldm || (h as isize) < oldll {
            idir = if d[lo].abs() >= d[h].abs() { 1 } else { 2 };
        }

        let mut sminl;
        if idir == 1 {
            if e[h - 1].abs() <= tol * d[h].abs() {
                e[h - 1] = 0.0;
                continue;
            }
            let mut mu = d[lo].abs();
            sminl = mu;
            for l in lo..h {
                if e[l].abs() <= tol * mu {
                    e[l] = 0.0;
                    continue 'outer;
                }
                mu = d[l + 1].abs() * (mu / (mu + e[l].abs()));
                sminl = sminl.min(mu);
            }
        } else {
            if e[lo].abs() <= tol * d[lo].abs() {
                e[lo] = 0.0;
                continue;
            }
            let mut mu = d[h].abs();
            sminl = mu;
            for l in (lo..h).rev() {
                if e[l].abs() <= tol * mu {
                    e[l] = 0.0;
                    continue 'outer;
                }
                mu = d[l].abs() * (mu / (mu + e[l].abs()));
                sminl = sminl.min(mu);
            }
        }
        oldll = lo as isize;
        oldm = h as isize;

        let mut shift = 0.0;
        if n as f64 * tol * (sminl / smax) > eps.max(0.01 * tol) {
            let (sll, (s, _)) = if idir == 1 {
                (d[lo].abs(), svd2_values(d[h - 1], e[h - 1], d[h]))
            } else {
                (d[h].abs(), svd2_values(d[lo], e[lo], d[lo + 1]))
            };
            shift = s;
            if sll > 0.0 && (shift / sll).powi(2) < eps {
                shift = 0.0;
            }
        }
        iter += h - lo;

        match (shift == 0.0, idir == 1) {
            (true, true) => {
                let (mut cs, mut oldcs, mut oldsn) = (1.0, 1.0, 0.0);
                for i in lo..h {
                    let (c, s, r) = givens(d[i] * cs, e[i]);
                    cs = c;
                    if i > lo {
                        e[i - 1] = oldsn * r;
                    }
                    let (oc, os, di) = givens(oldcs * r, d[i + 1] * s);
                    oldcs = oc;
                    oldsn = os;
                    d[i] = di;
                    rot_cols(v, i, i + 1, c, s);
                    rot_cols(u, i, i + 1, oc, os);
                }
                let hh = d[h] * cs;
                d[h] = hh * oldcs;
                e[h - 1] = hh * oldsn;
                if e[h - 1].abs() <= thresh {
                    e[h - 1] = 0.0;
                }
            }
            (true, false) => {
                let (mut cs, mut oldcs, mut oldsn) = (1.0, 1.0, 0.0);
                for i in (lo + 1..=h).rev() {
                    let (c, s, r) = givens(d[i] * cs, e[i - 1]);
                    cs = c;
                    if i < h {
                        e[i] = oldsn * r;
                    }
                    let (oc, os, di) = givens(oldcs * r, d[i - 1] * s);
                    oldcs = oc;
                    oldsn = os;
                    d[i] = di;
                    rot_cols(u, i - 1, i, c, -s);
                    rot_cols(v, i - 1, i, oc, -os);
                }
                let hh = d[lo] * cs;
                d[lo] = hh * oldcs;
                e[lo] = hh * oldsn;
                if e[lo].abs() <= thresh {
                    e[lo] = 0.0;
                }
            }
            (false, true) => {
                let mut f = (d[lo].abs() - shift) * (sign(1.0, d[lo]) + shift / d[lo]);
                let mut g = e[lo];
                for i in lo..h {
                    let (cosr, sinr, r) = givens(f, g);
                    if i > lo {
                        e[i - 1] = r;
                    }
                    f = cosr * d[i] + sinr * e[i];
                    e[i] = cosr * e[i] - sinr * d[i];
                    g = sinr * d[i + 1];
                    d[i + 1] *= cosr;
                    let (cosl, sinl, r) = givens(f, g);
                    d[i] = r;
                    f = cosl * e[i] + sinl * d[i + 1];
                    d[i + 1] = cosl * d[i + 1] - sinl * e[i];
                    if i + 1 < h {
                        g = sinl * e[i + 1];
                        e[i + 1] *= cosl;
                    }
                    rot_cols(v, i, i + 1, cosr, sinr);
                    rot_cols(u, i, i + 1, cosl, sinl);
                }
                e[h - 1] = f;
                if e[h - 1].abs() <= thresh {
                    e[h - 1] = 0.0;
                }
            }
            (false, false) => {
                let mut f = (d[h].abs() - shift) * (sign(1.0, d[h]) + shift / d[h]);
                let mut g = e[h - 1];
                for i in (lo + 1..=h).rev() {
                    let (cosr, sinr, r) = givens(f, g);
                    if i < h {
                        e[i] = r;
                    }
                    f = cosr * d[i] + sinr * e[i - 1];
                    e[i - 1] = cosr * e[i - 1] - sinr * d[i];
                    g = sinr * d[i - 1];
                    d[i - 1] *= cosr;
                    let (cosl, sinl, r) = givens(f, g);
                    d[i] = r;
                    f = cosl * e[i - 1] + sinl * d[i - 1];
                    d[i - 1] = cosl * d[i - 1] - sinl * e[i - 1];
                    if i > lo + 1 {
                        g = sinl * e[i - 2];
                        e[i - 2] *= cosl;
                    }
                    rot_cols(u, i - 1, i, cosr, -sinr);
                    rot_cols(v, i - 1, i, cosl, -sinl);
                }
                e[lo] = f;
                if e[lo].abs() <= thresh {
                    e[lo] = 0.0;
                }
            }
        }
    }
    Ok(())
}
