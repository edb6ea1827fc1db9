//! 2×2 real linear algebra used throughout the model code.

use num_complex::Complex64;

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn axpy(alpha: f64, x: Vec2, y: Vec2) -> Vec2 {
    [alpha * x[0] + y[0], alpha * x[1] + y[1]]
}

#[inline]
pub fn scale(alpha: f64, x: Vec2) -> Vec2 {
    [alpha * x[0], alpha * x[1]]
}

/// Row-major 2×2 matrix `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self { m: [[m00, m01], [m10, m11]] }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn mul_vec(&self, x: Vec2) -> Vec2 {
        [
            self.m[0][0] * x[0] + self.m[0][1] * x[1],
            self.m[1][0] * x[0] + self.m[1][1] * x[1],
        ]
    }

    pub fn sub(&self, other: &Mat2) -> Self {
        Self::new(
            self.m[0][0] - other.m[0][0],
            self.m[0][1] - other.m[0][1],
            self.m[1][0] - other.m[1][0],
            self.m[1][1] - other.m[1][1],
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(s * self.m[0][0], s * self.m[0][1], s * self.m[1][0], s * self.m[1][1])
    }

    /// Cramer's rule; `None` when the determinant is negligible relative to the entries.
    pub fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        let det = self.det();
        let norm = self.m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if !det.is_finite() || det.abs() <= 1e-14 * norm * norm.max(1.0) {
            return None;
        }
        Some([
            (rhs[0] * self.m[1][1] - self.m[0][1] * rhs[1]) / det,
            (self.m[0][0] * rhs[1] - self.m[1][0] * rhs[0]) / det,
        ])
    }

    /// Roots of `λ² − tr λ + det`, ordered by descending real part.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        quadratic_eigenvalues(self.trace(), self.det())
    }
}

/// Roots of `λ² − t λ + h = 0`, larger real part first.
pub fn quadratic_eigenvalues(t: f64, h: f64) -> [Complex64; 2] {
    let disc = t * t - 4.0 * h;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // avoid cancellation in the smaller root
        let q = 0.5 * if t >= 0.0 { t + s } else { t - s };
        let (r1, r2) = if q != 0.0 { (q, h / q) } else { (0.5 * s, -0.5 * s) };
        let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * t, im), Complex64::new(0.5 * t, -im)]
    }
}
