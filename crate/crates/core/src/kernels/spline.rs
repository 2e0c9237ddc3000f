//! Cubic spline with not-a-knot boundary conditions over strictly
//! increasing knots.

/// Cubic spline interpolant; clamps to the boundary values outside the knots.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() == ys.len() && xs.len() >= 4, "need >= 4 knots");
        assert!(
            xs.windows(2).all(|w| w[1] > w[0]),
            "knots must be strictly increasing"
        );
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        // Interior equations for the second derivatives M_i:
        //   (h_{i-1}/6) M_{i-1} + ((h_{i-1}+h_i)/3) M_i + (h_i/6) M_{i+1} = d_i.
        // Not-a-knot: continuous third derivative across the second and the
        // second-to-last knot:
        //   M_0 = ((h0+h1) M_1 - h0 M_2) / h1
        //   M_{n-1} = ((h_{n-2}+h_{n-3}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
        // folded into the first/last interior rows, leaving a tridiagonal
        // system for M_1 .. M_{n-2}.
        let k = n - 2; // interior unknowns
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            sub[j] = h[i - 1] / 6.0;
            diag[j] = (h[i - 1] + h[i]) / 3.0;
            sup[j] = h[i] / 6.0;
            rhs[j] = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        }
        // fold M_0 into row for i = 1
        diag[0] += sub[0] * (h[0] + h[1]) / h[1];
        sup[0] += sub[0] * (-h[0] / h[1]);
        sub[0] = 0.0;
        // fold M_{n-1} into row for i = n-2
        let last = k - 1;
        diag[last] += sup[last] * (h[n - 3] + h[n - 2]) / h[n - 3];
        sub[last] += sup[last] * (-h[n - 2] / h[n - 3]);
        sup[last] = 0.0;

        // Thomas algorithm
        let mut cp = vec![0.0; k];
        let mut dp = vec![0.0; k];
        cp[0] = sup[0] / diag[0];
        dp[0] = rhs[0] / diag[0];
        for j in 1..k {
            let denom = diag[j] - sub[j] * cp[j - 1];
            cp[j] = sup[j] / denom;
            dp[j] = (rhs[j] - sub[j] * dp[j - 1]) / denom;
        }
        let mut mi = vec![0.0; k];
        mi[k - 1] = dp[k - 1];
        for j in (0..k - 1).rev() {
            mi[j] = dp[j] - cp[j] * mi[j + 1];
        }
        let mut m = vec![0.0; n];
        m[1..=k].copy_from_slice(&mi);
        m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
        m[n - 1] = ((h[n - 2] + h[n - 3]) * m[n - 2] - h[n - 2] * m[n - 3]) / h[n - 3];
        CubicSpline { xs, ys, m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.xs[hi] - self.xs[lo];
        let t = (x - self.xs[lo]) / h;
        let u = 1.0 - t;
        u * self.ys[lo]
            + t * self.ys[hi]
            + h * h / 6.0 * (u * (u * u - 1.0) * self.m[lo] + t * (t * t - 1.0) * self.m[hi])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (x * 0.7).cos() * (-0.1 * x).exp()).collect();
        let sp = CubicSpline::new(xs, ys);
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let x = 0.01 + i as f64 * 0.0099;
            let exact = (x * 0.7_f64).cos() * (-0.1 * x).exp();
            worst = worst.max((sp.eval(x) - exact).abs());
        }
        assert!(worst < 2e-7, "spline error {worst}");
    }

    #[test]
    fn exact_on_cubics() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 2.0 + x - 0.5 * x * x + 0.25 * x * x * x).collect();
        let sp = CubicSpline::new(xs, ys);
        for i in 0..90 {
            let x = 0.05 + i as f64 * 0.1;
            let exact = 2.0 + x - 0.5 * x * x + 0.25 * x * x * x;
            assert!((sp.eval(x) - exact).abs() < 1e-10);
        }
    }
}
