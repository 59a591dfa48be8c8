//! Multi-dimensional complex FFT on a cubic grid, built from 1-D `rustfft`
//! passes along each axis.
//!
//! Data is stored row-major with axis 0 slowest. Non-contiguous axes are
//! handled by transposing each `n x stride` block into a scratch buffer so
//! that every 1-D transform runs on contiguous memory.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct FftEngine {
    dim: usize,
    n: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftEngine")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl FftEngine {
    pub(crate) fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftEngine {
            dim,
            n,
            len: n.pow(dim as u32),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized forward transform, `sum_x f(x) e^{-i k x}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse transform, `sum_k c(k) e^{+i k x}`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len, "buffer does not match grid size");
        WORK.with(|cell| {
            let mut guard = cell.borrow_mut();
            let (scratch, block_buf) = &mut *guard;
            self.run_with(data, fft, scratch, block_buf);
        });
    }

    fn run_with(
        &self,
        data: &mut [Complex64],
        fft: &Arc<dyn Fft<f64>>,
        scratch: &mut Vec<Complex64>,
        block_buf: &mut Vec<Complex64>,
    ) {
        let n = self.n;
        scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());

        // Last axis: rows are already contiguous.
        fft.process_with_scratch(data, scratch);

        for axis in (0..self.dim - 1).rev() {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            block_buf.resize(block, Complex64::default());
            for chunk in data.chunks_exact_mut(block) {
                // chunk[j * stride + s] -> block_buf[s * n + j]
                for j in 0..n {
                    let row = &chunk[j * stride..(j + 1) * stride];
                    for (s, v) in row.iter().enumerate() {
                        block_buf[s * n + j] = *v;
                    }
                }
                fft.process_with_scratch(&mut block_buf[..block], scratch);
                for j in 0..n {
                    let row = &mut chunk[j * stride..(j + 1) * stride];
                    for (s, v) in row.iter_mut().enumerate() {
                        *v = block_buf[s * n + j];
                    }
                }
            }
        }
    }
}

type Buffers = (Vec<Complex64>, Vec<Complex64>);

thread_local! {
    // Transposition and FFT scratch reused across calls on the same thread.
    static WORK: RefCell<Buffers> = const { RefCell::new((Vec::new(), Vec::new())) };
}
