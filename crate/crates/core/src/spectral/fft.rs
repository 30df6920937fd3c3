//! FFT plumbing over rustfft.
//!
//! Forward transforms are unnormalized; inverse transforms divide by the
//! number of points, so `inverse(forward(x)) == x`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                planner.plan_fft(len, dir)
            })
            .clone()
    })
}

/// Transforms every contiguous run of `len` values in `data`.
fn batch(data: &mut [Complex64], len: usize, inverse: bool) {
    let fft = plan(len, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
}

/// Transposes a `rows × cols` row-major block into `out` (`cols × rows`).
fn transpose(src: &[Complex64], out: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    out[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// In-place 2-D transform of one N×N plane (index `iy·N + ix`).
pub(crate) fn fft2(plane: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(plane.len(), n * n);
    let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
    batch(plane, n, inverse);
    transpose(plane, &mut tmp, n, n);
    batch(&mut tmp, n, inverse);
    transpose(&tmp, plane, n, n);
    if inverse {
        let s = 1.0 / (n * n) as f64;
        plane.iter_mut().for_each(|z| *z *= s);
    }
}

/// In-place 3-D transform of an `m × n × n` block (time slowest).
pub(crate) fn fft3(block: &mut [Complex64], m: usize, n: usize, inverse: bool) {
    let nn = n * n;
    debug_assert_eq!(block.len(), m * nn);
    for slice in block.chunks_mut(nn) {
        fft2(slice, n, inverse);
    }
    // time axis: gather each spatial point's series
    let mut series = vec![Complex64::new(0.0, 0.0); m * nn];
    transpose(block, &mut series, m, nn);
    batch(&mut series, m, inverse);
    transpose(&series, block, nn, m);
    if inverse {
        let s = 1.0 / m as f64;
        block.iter_mut().for_each(|z| *z *= s);
    }
}
