//! Shared numerical kernels: quadrature, finite differences, interpolation
//! and small linear-algebra helpers used by the solver and virial modules.

/// Composite Simpson rule on a uniform grid with spacing `h`.
///
/// Handles an odd number of intervals by closing the last three with the
/// Simpson 3/8 rule, so the scheme stays fourth order throughout.
pub fn simpson_uniform(h: f64, f: &[f64]) -> f64 {
    let n = f.len();
    assert!(n >= 2, "simpson_uniform needs at least two samples");
    if n == 2 {
        return 0.5 * h * (f[0] + f[1]);
    }
    let intervals = n - 1;
    let (simpson_end, mut total) = if intervals % 2 == 0 {
        (n - 1, 0.0)
    } else {
        // 3/8 rule on the final three intervals.
        let m = n - 4;
        let tail = 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
        (m, tail)
    };
    if simpson_end >= 2 {
        let mut sum = f[0] + f[simpson_end];
        let mut i = 1;
        while i < simpson_end {
            sum += 4.0 * f[i];
            if i + 1 < simpson_end {
                sum += 2.0 * f[i + 1];
            }
            i += 2;
        }
        total += h / 3.0 * sum;
    }
    total
}

/// Second-order first derivative on a uniform grid.
///
/// Central differences in the interior, one-sided three-point stencils at the
/// ends. When `even_at_origin` is set the left boundary uses the symmetry
/// f(-h) = f(h), which makes the derivative at the first point exactly zero;
/// radial profiles with f'(0) = 0 fall in this case.
pub fn gradient_uniform(h: f64, f: &[f64], even_at_origin: bool) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "gradient_uniform needs at least three samples");
    let mut g = vec![0.0; n];
    g[0] = if even_at_origin {
        0.0
    } else {
        (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    };
    for i in 1..n - 1 {
        g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    g
}

/// Cubic (four-point Lagrange) interpolation of uniformly gridded samples.
///
/// `x` is measured from the first node in units of the grid; values beyond
/// the last node evaluate to 0, matching a fully decayed tail. Exact at the
/// nodes.
pub fn cubic_interp_uniform(h: f64, f: &[f64], x: f64) -> f64 {
    let n = f.len();
    assert!(n >= 4, "cubic interpolation needs at least four samples");
    let t = x / h;
    if t <= 0.0 {
        return f[0];
    }
    if t >= (n - 1) as f64 {
        return 0.0;
    }
    let i = t.floor() as usize;
    if (t - i as f64).abs() == 0.0 {
        return f[i];
    }
    // Stencil [i-1, i, i+1, i+2], clamped at the ends.
    let base = i.saturating_sub(1).min(n - 4);
    let s = t - base as f64;
    let mut acc = 0.0;
    for (k, &fk) in f[base..base + 4].iter().enumerate() {
        let mut w = 1.0;
        for j in 0..4 {
            if j != k {
                w *= (s - j as f64) / (k as f64 - j as f64);
            }
        }
        acc += w * fk;
    }
    acc
}

/// Bisection for a root of `f` bracketed by [a, b] (f(a) and f(b) of opposite
/// sign). Returns the midpoint of the final interval.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut fa = f(a);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for a minimum of `f` on [a, b].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if b - a <= f64::EPSILON * (a.abs() + b.abs() + 1e-300) {
            break;
        }
        if fc < fd {
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
    }
    0.5 * (a + b)
}

/// A 2x2 block used by the coupled-field Jacobian.
#[derive(Clone, Copy, Debug, Default)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.a * self.d - self.b * self.c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2 {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        })
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
            d: self.d - o.d,
        }
    }
}

/// Solves a block-tridiagonal system with 2x2 blocks by the Thomas algorithm.
///
/// `lower[i]`, `diag[i]`, `upper[i]` are the blocks of row i (lower[0] and
/// upper[n-1] are ignored); `rhs` is overwritten with intermediate data.
/// Returns None if a pivot block is singular.
pub fn solve_block_tridiag(
    lower: &[Mat2],
    diag: &[Mat2],
    upper: &[Mat2],
    rhs: &[[f64; 2]],
) -> Option<Vec<[f64; 2]>> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut coef = vec![Mat2::default(); n];
    let mut carry = vec![[0.0; 2]; n];
    let inv0 = diag[0].inverse()?;
    coef[0] = inv0.mul(&upper[0]);
    carry[0] = inv0.mul_vec(rhs[0]);
    for i in 1..n {
        let denom = diag[i].sub(&lower[i].mul(&coef[i - 1]));
        let inv = denom.inverse()?;
        if i < n - 1 {
            coef[i] = inv.mul(&upper[i]);
        }
        let lc = lower[i].mul_vec(carry[i - 1]);
        carry[i] = inv.mul_vec([rhs[i][0] - lc[0], rhs[i][1] - lc[1]]);
    }
    let mut x = vec![[0.0; 2]; n];
    x[n - 1] = carry[n - 1];
    for i in (0..n - 1).rev() {
        let cx = coef[i].mul_vec(x[i + 1]);
        x[i] = [carry[i][0] - cx[0], carry[i][1] - cx[1]];
    }
    Some(x)
}

/// Least-squares fit of ln(r·|f|) = ln B - kappa·r over the given index range.
///
/// Models the radial decay f ~ B e^{-kappa r} / r; returns (kappa, B) or None
/// when the data is unusable (fewer than 4 points, zeros, or non-decaying).
pub fn fit_radial_exp_tail(r: &[f64], f: &[f64], from: usize, to: usize) -> Option<(f64, f64)> {
    if to <= from + 3 || to > r.len() {
        return None;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in from..to {
        let v = (r[i] * f[i].abs()).abs();
        if v > 0.0 && v.is_finite() && r[i] > 0.0 {
            xs.push(r[i]);
            ys.push(v.ln());
        }
    }
    if xs.len() < 4 {
        return None;
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let kappa = -slope;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return None;
    }
    Some((kappa, intercept.exp()))
}
