//! Counter-based pseudorandom generator.
//!
//! The generator is a fixed 64-bit mixing function (the splitmix64
//! finalizer) applied to `seed + (counter+1) * GOLDEN`. State is just the
//! pair `(seed, counter)`, so the i-th draw of a stream is a pure function
//! of `(seed, i)`: identical state gives bit-identical draws, streams can
//! be split by offsetting counters, and there is no rejection loop whose
//! iteration count could differ between platforms. Gaussian variates come
//! from Box-Muller on this stream.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Reproducible generator state: a seed and a draw counter.
#[derive(Debug, Clone, PartialEq)]
pub struct RngState {
    seed: u64,
    counter: u64,
    spare_gaussian: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            counter: 0,
            spare_gaussian: None,
        }
    }

    /// Stream `s` starts its counter at `s << 40`, leaving 2^40 draws per
    /// stream before overlap. Workers that share a seed should take
    /// distinct streams.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngState {
            seed,
            counter: stream << 40,
            spare_gaussian: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        let mut z = self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the open interval (0, 1): 53 random bits offset by 1/2,
    /// so the result is never 0 and logs are safe.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached so consecutive draws cost one pair of uniforms.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare_gaussian.take() {
            return g;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(r * phi.sin());
        r * phi.cos()
    }

    /// Uniform draw from {-1, +1}.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform on [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }

    /// Uniform integer in [0, n).
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Modulo bias is below 2^-50 for the sizes used here.
        (self.next_u64() % n as u64) as usize
    }

    /// First `m` entries of a Fisher-Yates shuffle of 0..n.
    pub fn choose_indices(&mut self, n: usize, m: usize) -> Vec<usize> {
        debug_assert!(m <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = i + self.next_index(n - i);
            idx.swap(i, j);
        }
        idx.truncate(m);
        idx
    }

    /// Standard exponential variate.
    pub fn next_exponential(&mut self) -> f64 {
        -self.next_uniform().ln()
    }
}
