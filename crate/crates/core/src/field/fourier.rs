use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::SampledField;
use crate::error::Result;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    plan.process(buf);
}

fn alternate(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Riemann-sum transform `Δ Σ_j e^{s·2πi x_j ξ_k} v_j` onto the frequency grid.
///
/// With `x_j = −L + jΔ`, `ξ_k = −L' + kΔ'` and `LL' = N/4` the kernel factors
/// as `(−1)^{j+k} e^{s·2πi jk/N}`, so no shift of the FFT output is needed.
fn transform(f: &SampledField, inverse: bool) -> SampledField {
    let grid = f.grid();
    let out_grid = grid.frequency_grid();
    let mut buf: Vec<Complex64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| v * alternate(j))
        .collect();
    fft_in_place(&mut buf, inverse);
    let step = grid.step();
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= step * alternate(k);
    }
    SampledField::from_parts(out_grid, buf, None)
}

/// `F f(ξ) = ∫ e^{−2πixξ} f(x) dx`, sampled on `f.grid().frequency_grid()`.
pub fn fourier(f: &SampledField) -> SampledField {
    transform(f, false)
}

/// `F⁻¹ g(x) = ∫ e^{2πixξ} g(ξ) dξ`. The frequency grid of a frequency grid
/// is the original grid, so `fourier_inv(fourier(f))` lives where `f` does.
pub fn fourier_inv(g: &SampledField) -> SampledField {
    transform(g, true)
}

/// `(f ⋆ e)(x_m) ≈ Δ Σ_j f_j e(x_m − x_j)`, computed as a circular FFT
/// convolution after rolling `e` by half a period. Both inputs must decay
/// well inside the box.
pub fn convolve(f: &SampledField, e: &SampledField) -> Result<SampledField> {
    f.check_same_grid(e)?;
    let n = f.grid().len();
    let mut a: Vec<Complex64> = f.values().to_vec();
    let mut b: Vec<Complex64> = (0..n).map(|i| e.values()[(i + n / 2) % n]).collect();
    fft_in_place(&mut a, false);
    fft_in_place(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_in_place(&mut a, true);
    let scale = f.grid().step() / n as f64;
    for v in a.iter_mut() {
        *v *= scale;
    }
    Ok(SampledField::from_parts(*f.grid(), a, None))
}
