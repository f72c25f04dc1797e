//! Cached three-dimensional complex FFTs on cubic arrays.
//!
//! Arrays are row-major with the first axis slowest. A transform runs the
//! batched 1D FFT along the contiguous axis and then rotates the axes, three
//! times, so every axis is contiguous once and the layout ends where it began.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Lines handed to one worker at a time.
const LINES_PER_TASK: usize = 64;

impl Fft3 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Shared plan for cubes of side `n`.
    pub(crate) fn cached(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(Fft3::new(n)))
            .clone()
    }

    pub(crate) fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub(crate) fn forward(&self, data: &mut Vec<Complex64>) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the 1/n³ normalization.
    pub(crate) fn inverse(&self, data: &mut Vec<Complex64>) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, data: &mut Vec<Complex64>, fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "fft buffer has wrong length");
        let mut rotated = vec![Complex64::default(); data.len()];
        for _ in 0..3 {
            self.lines(data, fft);
            self.rotate(data, &mut rotated);
            std::mem::swap(data, &mut rotated);
        }
    }

    fn lines(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let chunk = self.n * LINES_PER_TASK;
        let scratch_len = fft.get_inplace_scratch_len();
        #[cfg(feature = "parallel")]
        data.par_chunks_mut(chunk).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, block| fft.process_with_scratch(block, scratch),
        );
        #[cfg(not(feature = "parallel"))]
        {
            let mut scratch = vec![Complex64::default(); scratch_len];
            for block in data.chunks_mut(chunk) {
                fft.process_with_scratch(block, &mut scratch);
            }
        }
    }

    /// out[k][i][j] = input[i][j][k]
    fn rotate(&self, input: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let plane = |(k, block): (usize, &mut [Complex64])| {
            for i in 0..n {
                for j in 0..n {
                    block[i * n + j] = input[(i * n + j) * n + k];
                }
            }
        };
        #[cfg(feature = "parallel")]
        out.par_chunks_mut(n * n).enumerate().for_each(plane);
        #[cfg(not(feature = "parallel"))]
        out.chunks_mut(n * n).enumerate().for_each(plane);
    }
}

/// Signed FFT frequency index for position `i` of an axis of length `n`.
pub(crate) fn frequency_index(i: usize, n: usize) -> isize {
    if i < n.div_ceil(2) {
        i as isize
    } else {
        i as isize - n as isize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_dft() {
        let n = 4;
        let plan = Fft3::cached(n);
        let input: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = input.clone();
        plan.forward(&mut data);
        let tau = std::f64::consts::TAU;
        for (out_idx, got) in data.iter().enumerate() {
            let (a, b, c) = (out_idx / (n * n), (out_idx / n) % n, out_idx % n);
            let mut want = Complex64::default();
            for (in_idx, x) in input.iter().enumerate() {
                let (i, j, k) = (in_idx / (n * n), (in_idx / n) % n, in_idx % n);
                let phase = -tau * ((a * i + b * j + c * k) as f64) / n as f64;
                want += x * Complex64::new(phase.cos(), phase.sin());
            }
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        plan.inverse(&mut data);
        for (x, y) in data.iter().zip(&input) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn frequency_layout() {
        let got: Vec<isize> = (0..6).map(|i| frequency_index(i, 6)).collect();
        assert_eq!(got, vec![0, 1, 2, -3, -2, -1]);
    }
}
