//! Uniform tensor grids on `[-L, L]^dim`, scalar and spin fields on them,
//! and the central-difference stencil shared by every solver.
//!
//! Nodes are stored row-major: the first axis varies slowest. Derivatives
//! at the box faces use mirrored ghost nodes, i.e. a zero normal derivative.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin_maps::{self, MapKind, PhysParams, Spin};

/// `n` nodes per axis on `[-half_width, half_width]^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    half_width: T,
    n: usize,
}

impl<T: Real> GridSpec<T> {
    /// `dim` in 1..=3, odd `n >= 3` (so the origin is a node), `half_width > 0`.
    pub fn new(dim: usize, half_width: T, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "points per axis must be odd and >= 3, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > T::zero()) {
            return Err(Error::Config(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(Self { dim, half_width, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// `h = 2 L / (n - 1)`.
    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_count(self.n - 1)
    }

    /// Total number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same box, grid refined so that `h` halves.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }

    /// Per-axis indices of node `idx`; unused axes are zero.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.n + multi[a])
    }

    /// Coordinate of an axis index.
    pub fn axis_coord(&self, i: usize) -> T {
        -self.half_width + T::from_count(i) * self.spacing()
    }

    /// Coordinates of node `idx`; unused axes are zero.
    pub fn coords(&self, idx: usize) -> [T; 3] {
        let m = self.multi_index(idx);
        let mut x = [T::zero(); 3];
        for a in 0..self.dim {
            x[a] = self.axis_coord(m[a]);
        }
        x
    }

    /// Euclidean distance of node `idx` from the origin.
    pub fn radius(&self, idx: usize) -> T {
        let x = self.coords(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.dim).any(|a| m[a] == 0 || m[a] == self.n - 1)
    }

    /// Index of the node nearest to the origin-centred point `x`.
    pub fn nearest_node(&self, x: [T; 3]) -> usize {
        let h = self.spacing();
        let mut m = [0; 3];
        for a in 0..self.dim {
            let i = ((x[a] + self.half_width) / h)
                .round()
                .to_f64()
                .unwrap_or(0.0);
            m[a] = (i.max(0.0) as usize).min(self.n - 1);
        }
        self.flat_index(m)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.half_width == other.half_width
    }
}

/// Values of a scalar on every grid node at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
    time: T,
}

impl<T: Real> ScalarField<T> {
    /// Requires `values.len() == grid.len()` and finite values.
    pub fn new(grid: GridSpec<T>, values: Vec<T>, time: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values, time })
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn(grid: GridSpec<T>, time: T, f: impl Fn([T; 3]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::new(grid, values, time)
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec<T>, values: Vec<T>, time: T) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, time }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// `max - min`.
    pub fn range(&self) -> T {
        self.max() - self.min()
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Nodewise image under `f`.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_parts_unchecked(
            self.grid,
            self.values.iter().map(|&v| f(v)).collect(),
            self.time,
        )
    }

    /// Discrete Laplacian at every node.
    pub fn laplacian(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.values.len()];
        for_each_local(&self.grid, &self.values, |i, l| out[i] = l.laplacian());
        out
    }

    /// Central-difference `|grad|^2` at every node.
    pub fn grad_sq(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.values.len()];
        for_each_local(&self.grid, &self.values, |i, l| out[i] = l.grad_sq());
        out
    }

    /// Writes `x1,...,xdim,value` rows, one node per line, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write_header(&mut w, self.grid.dim, &["value"])?;
        for (i, v) in self.values.iter().enumerate() {
            write_coords(&mut w, &self.grid, i)?;
            writeln!(w, "{}", v.as_f64())?;
        }
        Ok(())
    }
}

fn write_header<W: Write>(w: &mut W, dim: usize, tail: &[&str]) -> io::Result<()> {
    let mut cols: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
    cols.extend(tail.iter().map(|s| s.to_string()));
    writeln!(w, "{}", cols.join(","))
}

fn write_coords<T: Real, W: Write>(w: &mut W, grid: &GridSpec<T>, idx: usize) -> io::Result<()> {
    let x = grid.coords(idx);
    for xa in x.iter().take(grid.dim) {
        write!(w, "{},", xa.as_f64())?;
    }
    Ok(())
}

/// Spins on every grid node at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinField<T> {
    grid: GridSpec<T>,
    spins: Vec<Spin<T>>,
    time: T,
}

impl<T: Real> SpinField<T> {
    pub fn new(grid: GridSpec<T>, spins: Vec<Spin<T>>, time: T) -> Result<Self> {
        if spins.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, spins, time })
    }

    /// `u = v(r)` nodewise.
    pub fn compose(p: &PhysParams<T>, kind: MapKind<T>, r: &ScalarField<T>) -> Result<Self> {
        let spins = r
            .values()
            .iter()
            .map(|&x| spin_maps::eval_map(p, kind, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: *r.grid(),
            spins,
            time: r.time(),
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn spins(&self) -> &[Spin<T>] {
        &self.spins
    }

    pub fn time(&self) -> T {
        self.time
    }

    /// Component `c` (0, 1 or 2) as a scalar field.
    pub fn component(&self, c: usize) -> ScalarField<T> {
        let values = self.spins.iter().map(|s| s.to_array()[c]).collect();
        ScalarField::from_parts_unchecked(self.grid, values, self.time)
    }

    /// Largest `||u| - 1|` over the grid.
    pub fn max_norm_defect(&self) -> T {
        self.spins
            .iter()
            .fold(T::zero(), |m, s| m.max((s.norm() - T::one()).abs()))
    }

    /// Writes `x1,...,xdim,u1,u2,u3` rows, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write_header(&mut w, self.grid.dim, &["u1", "u2", "u3"])?;
        for (i, s) in self.spins.iter().enumerate() {
            write_coords(&mut w, &self.grid, i)?;
            writeln!(w, "{},{},{}", s.v1.as_f64(), s.v2.as_f64(), s.v3.as_f64())?;
        }
        Ok(())
    }
}

/// Central-difference jet of a field at one node. Entries for axes beyond
/// the grid dimension are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Local<T> {
    pub value: T,
    pub grad: [T; 3],
    pub hess: [[T; 3]; 3],
}

impl<T: Real> Local<T> {
    pub fn laplacian(&self) -> T {
        self.hess[0][0] + self.hess[1][1] + self.hess[2][2]
    }

    pub fn grad_sq(&self) -> T {
        self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1] + self.grad[2] * self.grad[2]
    }

    /// `sum_ij w_i w_j w_ij`.
    pub fn grad_hess_grad(&self) -> T {
        let g = self.grad;
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + g[i] * g[j] * self.hess[i][j];
            }
        }
        acc
    }
}

/// Visits every node with its central-difference [`Local`] jet. With
/// `full_hessian = false` the mixed second derivatives are left at zero.
pub fn for_each_local<T: Real>(grid: &GridSpec<T>, values: &[T], f: impl FnMut(usize, &Local<T>)) {
    for_each_local_with(grid, values, true, f)
}

pub(crate) fn for_each_local_with<T: Real>(
    grid: &GridSpec<T>,
    values: &[T],
    full_hessian: bool,
    f: impl FnMut(usize, &Local<T>),
) {
    assert_eq!(values.len(), grid.len());
    match grid.dim {
        1 => sweep::<T, 1>(grid, values, full_hessian, f),
        2 => sweep::<T, 2>(grid, values, full_hessian, f),
        _ => sweep::<T, 3>(grid, values, full_hessian, f),
    }
}

fn sweep<T: Real, const D: usize>(
    grid: &GridSpec<T>,
    v: &[T],
    full_hessian: bool,
    mut f: impl FnMut(usize, &Local<T>),
) {
    let n = grid.n;
    let h = grid.spacing();
    let inv2h = T::one() / (h + h);
    let invh2 = T::one() / (h * h);
    let inv4h2 = T::lit(0.25) * invh2;
    let two = T::lit(2.0);
    // mirrored neighbours: -1 -> 1, n -> n - 2
    let prev: Vec<usize> = (0..n).map(|i| if i == 0 { 1 } else { i - 1 }).collect();
    let next: Vec<usize> = (0..n)
        .map(|i| if i == n - 1 { n - 2 } else { i + 1 })
        .collect();
    let mut stride = [0usize; D];
    for a in 0..D {
        stride[a] = n.pow((D - 1 - a) as u32);
    }
    let mut m = [0usize; D];
    for idx in 0..v.len() {
        let c = v[idx];
        let mut lo = [0usize; D];
        let mut hi = [0usize; D];
        let mut local = Local {
            value: c,
            grad: [T::zero(); 3],
            hess: [[T::zero(); 3]; 3],
        };
        for a in 0..D {
            lo[a] = idx - m[a] * stride[a] + prev[m[a]] * stride[a];
            hi[a] = idx - m[a] * stride[a] + next[m[a]] * stride[a];
            let (fl, fh) = (v[lo[a]], v[hi[a]]);
            local.grad[a] = (fh - fl) * inv2h;
            local.hess[a][a] = (fh - two * c + fl) * invh2;
        }
        if full_hessian {
            for a in 0..D {
                for b in (a + 1)..D {
                    let shift = |base: usize, to: usize| base - m[b] * stride[b] + to * stride[b];
                    let pp = v[shift(hi[a], next[m[b]])];
                    let pm = v[shift(hi[a], prev[m[b]])];
                    let mp = v[shift(lo[a], next[m[b]])];
                    let mm = v[shift(lo[a], prev[m[b]])];
                    let mixed = (pp - pm - mp + mm) * inv4h2;
                    local.hess[a][b] = mixed;
                    local.hess[b][a] = mixed;
                }
            }
        }
        f(idx, &local);
        // advance the row-major counter
        for a in (0..D).rev() {
            m[a] += 1;
            if m[a] < n {
                break;
            }
            m[a] = 0;
        }
    }
}
