//! Closed-form values and derivatives of the control maps.
//!
//! Every map component has the form `N(r) / sqrt(D(r))` where `N` and `D`
//! are sums of exponentials and trigonometric terms. Numerators are scaled
//! by `exp(-shift)` and the denominator by `exp(-2 shift)` with
//! `shift = max(2 a r, 0)`, which leaves the quotients unchanged.

use super::{PhysParams, Spin};
use crate::scalar::Real;

/// Value and first two derivatives of a control map at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapJet<T> {
    pub value: Spin<T>,
    pub d1: [T; 3],
    pub d2: [T; 3],
    /// `1 - v3^2`, formed as `v1^2 + v2^2`.
    pub one_minus_v3sq: T,
    structure: Structure<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Structure<T> {
    Generic,
    /// `(v1, v2) = g (cos k, sin k)`.
    FixedAzimuth {
        g: [T; 3],
        sin_k: T,
        cos_k: T,
    },
}

impl<T: Real> MapJet<T> {
    /// `v2 v1' - v1 v2'`.
    pub fn wronskian(&self) -> T {
        match self.structure {
            Structure::Generic => self.value.v2 * self.d1[0] - self.value.v1 * self.d1[1],
            Structure::FixedAzimuth { g, sin_k, cos_k } => {
                g[0] * g[1] * (sin_k * cos_k - cos_k * sin_k)
            }
        }
    }

    /// `v2 v1'' - v1 v2''` and the larger of its two terms.
    pub fn azimuthal_curvature(&self) -> (T, T) {
        match self.structure {
            Structure::Generic => {
                let a = self.value.v2 * self.d2[0];
                let b = self.value.v1 * self.d2[1];
                (a - b, a.abs().max(b.abs()))
            }
            Structure::FixedAzimuth { g, sin_k, cos_k } => {
                let gg = g[0] * g[2];
                (
                    gg * (sin_k * cos_k - cos_k * sin_k),
                    (gg * sin_k * cos_k).abs(),
                )
            }
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.d1.iter().all(|x| x.is_finite())
            && self.d2.iter().all(|x| x.is_finite())
    }
}

/// `D`, `D'`, `D''` (scaled).
struct Denominator<T> {
    d: T,
    d1: T,
    d2: T,
}

impl<T: Real> Denominator<T> {
    /// `(N / sqrt(D), (N / sqrt(D))', (N / sqrt(D))'')`.
    fn quotient(&self, n: T, n1: T, n2: T) -> [T; 3] {
        let half = T::lit(0.5);
        let sd = self.d.sqrt();
        let d32 = self.d * sd;
        let v = n / sd;
        let v1 = (n1 * self.d - half * n * self.d1) / d32;
        let v2 = n2 / sd - (n1 * self.d1 + half * n * self.d2) / d32
            + T::lit(0.75) * n * self.d1 * self.d1 / (d32 * self.d);
        [v, v1, v2]
    }
}

/// Scaled exponentials shared by both maps for growth rate `a`:
/// `(exp(2 a r - shift), exp(-shift), exp(a r - shift))`.
fn scaled_exponentials<T: Real>(a: T, r: T) -> (T, T, T) {
    let x = T::lit(2.0) * a * r;
    let shift = x.max(T::zero());
    ((x - shift).exp(), (-shift).exp(), (a * r - shift).exp())
}

struct MapIParts<T> {
    a: T,
    b: T,
    k_s: T,
    es: T,
    one: T,
    n3: T,
    theta: T,
    phase: T,
    den: Denominator<T>,
    c0: T,
}

fn map_i_parts<T: Real>(p: &PhysParams<T>, r: T) -> MapIParts<T> {
    let two = T::lit(2.0);
    let e2 = p.epsilon() * p.epsilon();
    let (s, c) = e2.sin_cos();
    let mu = p.mu();
    let a = mu * c;
    let b = mu * s;
    let stiff = p.stiffness();
    let m = p.beta() * T::lit(0.5);
    let am = p.alpha() + m;
    let (es, one, e3) = scaled_exponentials(a, r);
    // (alpha + m)^2 - alpha (alpha + beta) cos^2 = (alpha + m)^2 sin^2 + m^2 cos^2 > 0
    let c0 = am * am * s * s + m * m * c * c;
    let d = if p.alpha() >= T::zero() {
        es * es + two * am * es * one + c0 * one * one
    } else {
        let g = es + am * one;
        g * g - p.alpha() * stiff * c * c * one * one
    };
    let den = Denominator {
        d,
        d1: T::lit(4.0) * a * es * (es + am * one),
        d2: T::lit(8.0) * a * a * es * (two * es + am * one),
    };
    let theta = b * r;
    MapIParts {
        a,
        b,
        k_s: stiff * s,
        es,
        one,
        n3: (two * stiff).sqrt() * c * e3,
        theta,
        phase: e2 + theta,
        den,
        c0,
    }
}

pub(super) fn map_i_value<T: Real>(p: &PhysParams<T>, r: T) -> Spin<T> {
    let q = map_i_parts(p, r);
    let m = p.beta() * T::lit(0.5);
    let (st, ct) = q.theta.sin_cos();
    let (sp, cp) = q.phase.sin_cos();
    let em = q.es - m * q.one;
    let sd = q.den.d.sqrt();
    Spin::new(
        (q.k_s * cp * q.one - st * em) / sd,
        (q.k_s * sp * q.one + ct * em) / sd,
        q.n3 / sd,
    )
}

pub(super) fn map_i_jet<T: Real>(p: &PhysParams<T>, r: T) -> MapJet<T> {
    let q = map_i_parts(p, r);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let m = p.beta() * T::lit(0.5);
    let (a, b) = (q.a, q.b);
    let (st, ct) = q.theta.sin_cos();
    let (sp, cp) = q.phase.sin_cos();
    let em = q.es - m * q.one;
    let ks1 = q.k_s * q.one;

    let n1 = ks1 * cp - st * em;
    let n1_1 = -ks1 * b * sp - b * ct * em - two * a * q.es * st;
    let n1_2 =
        -ks1 * b * b * cp + b * b * st * em - four * a * b * q.es * ct - four * a * a * q.es * st;

    let n2 = ks1 * sp + ct * em;
    let n2_1 = ks1 * b * cp - b * st * em + two * a * q.es * ct;
    let n2_2 =
        -ks1 * b * b * sp - b * b * ct * em - four * a * b * q.es * st + four * a * a * q.es * ct;

    let v1 = q.den.quotient(n1, n1_1, n1_2);
    let v2 = q.den.quotient(n2, n2_1, n2_2);
    let mut v3 = q.den.quotient(q.n3, a * q.n3, a * a * q.n3);
    // v3' = a N3 (c0 - E^2) / D^{3/2}, free of the cancellation in the generic quotient
    v3[1] = a * q.n3 * (q.c0 * q.one * q.one - q.es * q.es) / (q.den.d * q.den.d.sqrt());

    MapJet {
        value: Spin::new(v1[0], v2[0], v3[0]),
        d1: [v1[1], v2[1], v3[1]],
        d2: [v1[2], v2[2], v3[2]],
        one_minus_v3sq: v1[0] * v1[0] + v2[0] * v2[0],
        structure: Structure::Generic,
    }
}

struct MapIIParts<T> {
    es: T,
    one: T,
    n3: T,
    den: Denominator<T>,
}

fn map_ii_parts<T: Real>(p: &PhysParams<T>, r: T) -> MapIIParts<T> {
    let two = T::lit(2.0);
    let mu = p.mu();
    let m = p.beta() * T::lit(0.5);
    let ma = m + p.alpha();
    let (es, one, e3) = scaled_exponentials(mu, r);
    let g = es + m * one;
    MapIIParts {
        es,
        one,
        n3: (two * p.stiffness()).sqrt() * e3,
        den: Denominator {
            d: g * g + two * p.alpha() * es * one,
            d1: T::lit(4.0) * mu * es * (es + ma * one),
            d2: T::lit(8.0) * mu * mu * es * (two * es + ma * one),
        },
    }
}

pub(super) fn map_ii_value<T: Real>(p: &PhysParams<T>, k: T, r: T) -> Spin<T> {
    let q = map_ii_parts(p, r);
    let m = p.beta() * T::lit(0.5);
    let sd = q.den.d.sqrt();
    let g = (q.es - m * q.one) / sd;
    let (sk, ck) = k.sin_cos();
    Spin::new(g * ck, g * sk, q.n3 / sd)
}

pub(super) fn map_ii_jet<T: Real>(p: &PhysParams<T>, k: T, r: T) -> MapJet<T> {
    let q = map_ii_parts(p, r);
    let mu = p.mu();
    let m = p.beta() * T::lit(0.5);
    let g = q.den.quotient(
        q.es - m * q.one,
        T::lit(2.0) * mu * q.es,
        T::lit(4.0) * mu * mu * q.es,
    );
    let mut v3 = q.den.quotient(q.n3, mu * q.n3, mu * mu * q.n3);
    // v3' = mu N3 (m^2 - E^2) / D^{3/2}
    v3[1] = mu * q.n3 * (m * m * q.one * q.one - q.es * q.es) / (q.den.d * q.den.d.sqrt());
    let (sk, ck) = k.sin_cos();
    MapJet {
        value: Spin::new(g[0] * ck, g[0] * sk, v3[0]),
        d1: [g[1] * ck, g[1] * sk, v3[1]],
        d2: [g[2] * ck, g[2] * sk, v3[2]],
        one_minus_v3sq: g[0] * g[0],
        structure: Structure::FixedAzimuth {
            g,
            sin_k: sk,
            cos_k: ck,
        },
    }
}
