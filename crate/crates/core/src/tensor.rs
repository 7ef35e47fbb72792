use std::ops::{Add, Mul, Neg, Sub};

/// A 2×2 tensor, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor2(pub [[f64; 2]; 2]);

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2([[0.0; 2]; 2]);

    pub fn new(xx: f64, xy: f64, yx: f64, yy: f64) -> Self {
        Tensor2([[xx, xy], [yx, yy]])
    }

    pub fn sym(xx: f64, yy: f64, xy: f64) -> Self {
        Tensor2([[xx, xy], [xy, yy]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Tensor2([[a, 0.0], [0.0, b]])
    }

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    /// From four comma-separable row-major entries.
    pub fn from_row_major(v: [f64; 4]) -> Self {
        Tensor2([[v[0], v[1]], [v[2], v[3]]])
    }

    pub fn to_row_major(&self) -> [f64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Tensor2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    /// Double contraction `A : B`.
    pub fn ddot(&self, other: &Tensor2) -> f64 {
        let (a, b) = (&self.0, &other.0);
        a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        let off = self.0[0][1] - self.0[1][0];
        off.abs() <= 1e-12 * (1.0 + self.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, o: Tensor2) -> Tensor2 {
        let (a, b) = (self.0, o.0);
        Tensor2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, o: Tensor2) -> Tensor2 {
        self + (-o)
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self * -1.0
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Tensor2 {
        let a = self.0;
        Tensor2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }
}
