//! Field values on a periodic grid: scalars, velocity vectors, rank-2 tensors.
//!
//! A `VectorField` carries exactly one representation at a time, physical
//! samples or Fourier coefficients, plus the grid it lives on. Conversions
//! return new values; nothing mutates in place after construction.

use ndarray::Array3;

use crate::error::CoreError;
use crate::fft;
use crate::grid::Grid3;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Debug, Clone)]
enum VecData {
    Phys([Array3<f64>; 3]),
    Spec([Array3<C64>; 3]),
}

/// Three-component velocity field on a `Grid3`.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Grid3,
    data: VecData,
}

impl VectorField {
    pub fn zeros(grid: &Grid3, repr: Representation) -> Self {
        let n = grid.n();
        let shape = (n, n, n);
        let data = match repr {
            Representation::Physical => {
                VecData::Phys([Array3::zeros(shape), Array3::zeros(shape), Array3::zeros(shape)])
            }
            Representation::Spectral => {
                VecData::Spec([Array3::zeros(shape), Array3::zeros(shape), Array3::zeros(shape)])
            }
        };
        VectorField { grid: grid.clone(), data }
    }

    /// Wraps physical samples, rejecting non-finite entries and shape mismatches.
    pub fn from_physical(grid: &Grid3, comps: [Array3<f64>; 3]) -> Result<Self, CoreError> {
        let n = grid.n();
        for (c, a) in comps.iter().enumerate() {
            if a.shape() != [n, n, n] {
                return Err(CoreError::GridMismatch(format!(
                    "component {c} has shape {:?}, grid wants {n}^3",
                    a.shape()
                )));
            }
            if !a.iter().all(|v| v.is_finite()) {
                return Err(CoreError::NonFinite(format!("physical component {c}")));
            }
        }
        Ok(VectorField { grid: grid.clone(), data: VecData::Phys(comps) })
    }

    /// Wraps spectral coefficients, rejecting non-finite entries and shape mismatches.
    pub fn from_spectral(grid: &Grid3, comps: [Array3<C64>; 3]) -> Result<Self, CoreError> {
        let n = grid.n();
        for (c, a) in comps.iter().enumerate() {
            if a.shape() != [n, n, n] {
                return Err(CoreError::GridMismatch(format!(
                    "component {c} has shape {:?}, grid wants {n}^3",
                    a.shape()
                )));
            }
            if !a.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(CoreError::NonFinite(format!("spectral component {c}")));
            }
        }
        Ok(VectorField { grid: grid.clone(), data: VecData::Spec(comps) })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            VecData::Phys(_) => Representation::Physical,
            VecData::Spec(_) => Representation::Spectral,
        }
    }

    /// Returns the field in spectral representation (no-op clone if already there).
    pub fn to_spectral(&self) -> VectorField {
        match &self.data {
            VecData::Spec(_) => self.clone(),
            VecData::Phys(p) => {
                let spec = [fft::analyze_real(&p[0]), fft::analyze_real(&p[1]), fft::analyze_real(&p[2])];
                VectorField { grid: self.grid.clone(), data: VecData::Spec(spec) }
            }
        }
    }

    /// Returns the field in physical representation (no-op clone if already there).
    pub fn to_physical(&self) -> VectorField {
        match &self.data {
            VecData::Phys(_) => self.clone(),
            VecData::Spec(s) => {
                let phys =
                    [fft::synthesize_real(&s[0]), fft::synthesize_real(&s[1]), fft::synthesize_real(&s[2])];
                VectorField { grid: self.grid.clone(), data: VecData::Phys(phys) }
            }
        }
    }

    /// Physical components; panics unless in physical representation.
    pub fn physical(&self) -> &[Array3<f64>; 3] {
        match &self.data {
            VecData::Phys(p) => p,
            VecData::Spec(_) => panic!("field is spectral, convert with to_physical first"),
        }
    }

    /// Spectral components; panics unless in spectral representation.
    pub fn spectral(&self) -> &[Array3<C64>; 3] {
        match &self.data {
            VecData::Spec(s) => s,
            VecData::Phys(_) => panic!("field is physical, convert with to_spectral first"),
        }
    }

    pub(crate) fn spectral_mut(&mut self) -> &mut [Array3<C64>; 3] {
        match &mut self.data {
            VecData::Spec(s) => s,
            VecData::Phys(_) => panic!("field is physical, convert with to_spectral first"),
        }
    }

    /// Coefficient of integer mode `m` in one component (spectral only).
    pub fn mode(&self, m: [i64; 3], comp: usize) -> C64 {
        let idx = [
            self.grid.index_of_mode(m[0]),
            self.grid.index_of_mode(m[1]),
            self.grid.index_of_mode(m[2]),
        ];
        self.spectral()[comp][idx]
    }

    /// Sets the coefficient of integer mode `m` in one component (spectral only).
    pub fn set_mode(&mut self, m: [i64; 3], comp: usize, value: C64) {
        let idx = [
            self.grid.index_of_mode(m[0]),
            self.grid.index_of_mode(m[1]),
            self.grid.index_of_mode(m[2]),
        ];
        self.spectral_mut()[comp][idx] = value;
    }

    /// Pointwise Euclidean magnitude `|u(x)|` as physical samples.
    pub fn magnitude(&self) -> Array3<f64> {
        let p = self.to_physical();
        let [a, b, c] = p.physical();
        let mut out = a.mapv(|v| v * v);
        out.zip_mut_with(b, |acc, v| *acc += v * v);
        out.zip_mut_with(c, |acc, v| *acc += v * v);
        out.mapv_inplace(f64::sqrt);
        out
    }

    /// Largest pointwise speed `max_x |u(x)|`.
    pub fn max_speed(&self) -> f64 {
        self.magnitude().iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Squared L2 norm `int |u|^2 dx`, evaluated in whichever representation is held.
    pub fn l2_norm_sq(&self) -> f64 {
        match &self.data {
            VecData::Phys(p) => {
                let s: f64 = p.iter().map(|a| a.iter().map(|v| v * v).sum::<f64>()).sum();
                s * self.grid.cell_volume()
            }
            VecData::Spec(s) => {
                let sum: f64 = s.iter().map(|a| a.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
                sum * self.grid.length().powi(3)
            }
        }
    }

    /// `self + other`, in the representation of `self`.
    pub fn add(&self, other: &VectorField) -> Result<VectorField, CoreError> {
        self.add_scaled(other, 1.0)
    }

    /// `self - other`, in the representation of `self`.
    pub fn sub(&self, other: &VectorField) -> Result<VectorField, CoreError> {
        self.add_scaled(other, -1.0)
    }

    /// `self + c * other`, in the representation of `self`.
    pub fn add_scaled(&self, other: &VectorField, c: f64) -> Result<VectorField, CoreError> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch("add over distinct grids".into()));
        }
        let mut out = self.clone();
        match (&mut out.data, &other.data) {
            (VecData::Phys(a), VecData::Phys(b)) => {
                for i in 0..3 {
                    a[i].zip_mut_with(&b[i], |x, y| *x += c * y);
                }
            }
            (VecData::Spec(a), VecData::Spec(b)) => {
                for i in 0..3 {
                    a[i].zip_mut_with(&b[i], |x, y| *x += y * c);
                }
            }
            _ => {
                let o = match out.representation() {
                    Representation::Physical => other.to_physical(),
                    Representation::Spectral => other.to_spectral(),
                };
                return out.add_scaled(&o, c);
            }
        }
        Ok(out)
    }

    /// `c * self`.
    pub fn scale(&self, c: f64) -> VectorField {
        let mut out = self.clone();
        match &mut out.data {
            VecData::Phys(a) => {
                for comp in a.iter_mut() {
                    comp.mapv_inplace(|v| c * v);
                }
            }
            VecData::Spec(a) => {
                for comp in a.iter_mut() {
                    comp.mapv_inplace(|z| z * c);
                }
            }
        }
        out
    }

    /// Pointwise product with a scalar field, computed on physical samples.
    pub fn multiply_scalar(&self, chi: &ScalarField) -> Result<VectorField, CoreError> {
        if self.grid != *chi.grid() {
            return Err(CoreError::GridMismatch("scalar product over distinct grids".into()));
        }
        let p = self.to_physical();
        let mut comps = p.physical().clone();
        for comp in comps.iter_mut() {
            comp.zip_mut_with(chi.data(), |v, c| *v *= c);
        }
        Ok(VectorField { grid: self.grid.clone(), data: VecData::Phys(comps) })
    }

    /// Divergence diagnostic: `(max_k |k . u_hat(k)|, max_k |u_hat(k)|)`.
    pub fn divergence_stats(&self) -> (f64, f64) {
        let s = self.to_spectral();
        let [a, b, c] = s.spectral();
        let g = &self.grid;
        let n = g.n();
        let (mut max_div, mut max_coeff) = (0.0f64, 0.0f64);
        let (af, bf, cf) =
            (a.as_slice().unwrap(), b.as_slice().unwrap(), c.as_slice().unwrap());
        let mut idx = 0usize;
        for i in 0..n {
            let ki = g.wavenumber(i);
            for j in 0..n {
                let kj = g.wavenumber(j);
                for l in 0..n {
                    let kl = g.wavenumber(l);
                    let (u, v, w) = (af[idx], bf[idx], cf[idx]);
                    let div = u * ki + v * kj + w * kl;
                    max_div = max_div.max(div.norm());
                    max_coeff = max_coeff.max(u.norm()).max(v.norm()).max(w.norm());
                    idx += 1;
                }
            }
        }
        (max_div, max_coeff)
    }

    /// True when `max_k |k . u_hat|` is at most `1e-10 * max_k |u_hat|`.
    pub fn is_solenoidal(&self) -> bool {
        let (d, c) = self.divergence_stats();
        d <= 1e-10 * c.max(f64::MIN_POSITIVE)
    }

    /// Mean (integer mode zero) of each component.
    pub fn mean(&self) -> [f64; 3] {
        let s = self.to_spectral();
        [s.mode([0; 3], 0).re, s.mode([0; 3], 1).re, s.mode([0; 3], 2).re]
    }
}

/// Scalar samples on a grid (cutoffs, pressure, test functions).
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid3,
    data: Array3<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid3, data: Array3<f64>) -> Result<Self, CoreError> {
        let n = grid.n();
        if data.shape() != [n, n, n] {
            return Err(CoreError::GridMismatch(format!(
                "scalar has shape {:?}, grid wants {n}^3",
                data.shape()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFinite("scalar field".into()));
        }
        Ok(ScalarField { grid: grid.clone(), data })
    }

    pub fn constant(grid: &Grid3, value: f64) -> Self {
        let n = grid.n();
        ScalarField { grid: grid.clone(), data: Array3::from_elem((n, n, n), value) }
    }

    /// Builds a scalar field from a function of the sample point.
    pub fn from_fn(grid: &Grid3, mut f: impl FnMut([usize; 3]) -> f64) -> Self {
        let n = grid.n();
        let mut data = Array3::zeros((n, n, n));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data[[i, j, k]] = f([i, j, k]);
                }
            }
        }
        ScalarField { grid: grid.clone(), data }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// `int f dx` over the box.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Rank-2 tensor in spectral representation, usually an outer product `f_i g_j`.
///
/// Components are stored row-major: entry `(i, j)` sits at `comps[3 * i + j]`.
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: Grid3,
    comps: Vec<Array3<C64>>,
}

impl TensorField {
    /// Outer product `f (x) g` formed on physical samples and analyzed.
    /// The product is dealiased when `dealias` is set, which is the rule for
    /// every nonlinear term fed back into spectral operators.
    pub fn outer_product(f: &VectorField, g: &VectorField, dealias: bool) -> Result<Self, CoreError> {
        if f.grid() != g.grid() {
            return Err(CoreError::GridMismatch("outer product over distinct grids".into()));
        }
        let fp = f.to_physical();
        let gp = g.to_physical();
        let fa = fp.physical();
        let ga = gp.physical();
        let mut comps = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                let mut prod = fa[i].clone();
                prod.zip_mut_with(&ga[j], |x, y| *x *= y);
                let mut spec = fft::analyze_real(&prod);
                if dealias {
                    crate::spectral::dealias_array(f.grid(), &mut spec);
                }
                comps.push(spec);
            }
        }
        Ok(TensorField { grid: f.grid().clone(), comps })
    }

    /// Wraps explicit spectral components (row-major `(i, j)` order).
    pub fn from_spectral(grid: &Grid3, comps: Vec<Array3<C64>>) -> Result<Self, CoreError> {
        if comps.len() != 9 {
            return Err(CoreError::InvalidParameter(format!(
                "tensor wants 9 components, got {}",
                comps.len()
            )));
        }
        let n = grid.n();
        for a in &comps {
            if a.shape() != [n, n, n] {
                return Err(CoreError::GridMismatch("tensor component shape".into()));
            }
        }
        Ok(TensorField { grid: grid.clone(), comps })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn component(&self, i: usize, j: usize) -> &Array3<C64> {
        &self.comps[3 * i + j]
    }
}
