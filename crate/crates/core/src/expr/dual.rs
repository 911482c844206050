use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type the tree walker is generic over.
pub(super) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn pow_lit(self, c: f64) -> Self;
}

fn pow_value(u: f64, c: f64) -> f64 {
    if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
        u.powi(c as i32)
    } else {
        u.powf(c)
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn pow_lit(self, c: f64) -> Self {
        pow_value(self, c)
    }
}

/// Forward-mode dual number `v + d·ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn seeded(v: f64) -> Self {
        Dual { v, d: 1.0 }
    }

    // chain rule with a zero tangent short-circuit, so infinite local
    // slopes (sqrt(0), pow(0, c<1)) do not produce 0 * inf
    fn chain(self, v: f64, slope: impl FnOnce() -> f64) -> Self {
        let d = if self.d == 0.0 { 0.0 } else { slope() * self.d };
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            d: -self.d,
        }
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn abs(self) -> Self {
        let sign = if self.v > 0.0 {
            1.0
        } else if self.v < 0.0 {
            -1.0
        } else {
            0.0
        };
        Dual {
            v: self.v.abs(),
            d: sign * self.d,
        }
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, || 0.5 / r)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, || e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), || 1.0 / self.v)
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), || self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), || -self.v.sin())
    }
    fn pow_lit(self, c: f64) -> Self {
        let v = pow_value(self.v, c);
        if c == 0.0 {
            return Dual { v, d: 0.0 };
        }
        self.chain(v, || c * pow_value(self.v, c - 1.0))
    }
}
