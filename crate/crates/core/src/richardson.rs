//! Richardson-extrapolated central differences.
//!
//! Used as an oracle for closed-form derivatives: the tableau combines
//! central differences at steps `h, h/2, ..., h/2^levels`, cancelling the
//! even powers of `h` in their error expansion one level at a time.

use crate::scalar::Real;

/// First derivative of a vector-valued `f` at `x`.
pub fn first<T: Real, const N: usize>(
    f: impl Fn(T) -> [T; N],
    x: T,
    h: T,
    levels: usize,
) -> [T; N] {
    tableau(
        |step| {
            let fp = f(x + step);
            let fm = f(x - step);
            std::array::from_fn(|i| (fp[i] - fm[i]) / (step + step))
        },
        h,
        levels,
    )
}

/// Second derivative of a vector-valued `f` at `x`.
pub fn second<T: Real, const N: usize>(
    f: impl Fn(T) -> [T; N],
    x: T,
    h: T,
    levels: usize,
) -> [T; N] {
    let f0 = f(x);
    tableau(
        |step| {
            let fp = f(x + step);
            let fm = f(x - step);
            std::array::from_fn(|i| (fp[i] - (f0[i] + f0[i]) + fm[i]) / (step * step))
        },
        h,
        levels,
    )
}

/// Scalar convenience wrapper around [`first`].
pub fn first_scalar<T: Real>(f: impl Fn(T) -> T, x: T, h: T, levels: usize) -> T {
    first(|t| [f(t)], x, h, levels)[0]
}

/// Scalar convenience wrapper around [`second`].
pub fn second_scalar<T: Real>(f: impl Fn(T) -> T, x: T, h: T, levels: usize) -> T {
    second(|t| [f(t)], x, h, levels)[0]
}

fn tableau<T: Real, const N: usize>(estimate: impl Fn(T) -> [T; N], h: T, levels: usize) -> [T; N] {
    let half = T::lit(0.5);
    let mut prev: Vec<[T; N]> = vec![estimate(h)];
    let mut step = h;
    for level in 1..=levels {
        step = step * half;
        let mut row = vec![estimate(step)];
        let mut factor = T::one();
        for k in 1..=level {
            factor = factor * T::lit(4.0);
            let fine = row[k - 1];
            let coarse = prev[k - 1];
            row.push(std::array::from_fn(|i| {
                fine[i] + (fine[i] - coarse[i]) / (factor - T::one())
            }));
        }
        prev = row;
    }
    prev[levels]
}
