//! Three-dimensional complex FFT on cubic arrays.
//!
//! Convention: the forward transform carries the `1/n^3` normalization, so
//! spectral entries are Fourier series coefficients. A real sample array
//! `f(x_j) = cos(2 pi x_1 / L)` therefore transforms to the pair of
//! coefficients `1/2` at integer modes `m = (1, 0, 0)` and `(-1, 0, 0)`. The
//! inverse transform is the plain unnormalized synthesis sum.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use ndarray::{Array3, Axis};
use once_cell::sync::Lazy;
use rustfft::Fft;

use crate::C64;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut map = PLANS.lock().expect("fft plan cache poisoned");
    map.entry((n, forward))
        .or_insert_with(|| {
            let mut planner = rustfft::FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// In-place 3-D transform of a cubic array. `forward = true` analyzes and
/// normalizes by `1/n^3`; `forward = false` synthesizes without scaling.
pub fn fft3_inplace(a: &mut Array3<C64>, forward: bool) {
    let shape = a.shape().to_vec();
    assert!(shape[0] == shape[1] && shape[1] == shape[2], "cubic arrays only");
    let n = shape[0];
    let fft = plan(n, forward);
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    {
        let flat = a.as_slice_mut().expect("standard layout");
        for lane in flat.chunks_exact_mut(n) {
            fft.process_with_scratch(lane, &mut scratch);
        }
    }

    let mut lane = vec![C64::new(0.0, 0.0); n];
    for axis in [0usize, 1] {
        for mut l in a.lanes_mut(Axis(axis)) {
            for (dst, src) in lane.iter_mut().zip(l.iter()) {
                *dst = *src;
            }
            fft.process_with_scratch(&mut lane, &mut scratch);
            for (dst, src) in l.iter_mut().zip(lane.iter()) {
                *dst = *src;
            }
        }
    }

    if forward {
        let scale = 1.0 / (n * n * n) as f64;
        for v in a.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward transform of real samples into Fourier coefficients.
pub fn analyze_real(data: &Array3<f64>) -> Array3<C64> {
    let mut c = data.mapv(|x| C64::new(x, 0.0));
    fft3_inplace(&mut c, true);
    c
}

/// Inverse transform of coefficients back to real samples.
///
/// For Hermitian-symmetric input the imaginary residue is pure roundoff; it
/// is discarded here.
pub fn synthesize_real(spec: &Array3<C64>) -> Array3<f64> {
    let mut c = spec.clone();
    fft3_inplace(&mut c, false);
    c.mapv(|z| z.re)
}

/// Inverse transform keeping the complex result.
pub fn synthesize(spec: &Array3<C64>) -> Array3<C64> {
    let mut c = spec.clone();
    fft3_inplace(&mut c, false);
    c
}
