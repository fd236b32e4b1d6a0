//! Counter-based 64-bit generator ("SplitMix64-CB").
//!
//! Every random number is a pure function of `(seed, stream, counter)`:
//!
//! ```text
//! GAMMA = 0x9E3779B97F4A7C15
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          return z ^ (z >> 31)
//! key(seed, stream)        = mix(seed + mix(stream + GAMMA))
//! draw(seed, stream, ctr)  = mix(key(seed, stream) + (ctr + 1) * GAMMA)
//! uniform(seed, stream, c) = (draw(seed, stream, c) >> 11) * 2^-53
//! ```
//!
//! All arithmetic is wrapping modulo 2^64. Because particle `i` always
//! draws from stream `i`, the first `N` particles sampled for any larger
//! count are identical to a standalone sample of size `N`.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One independent stream of the counter-based generator.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix(seed.wrapping_add(mix(stream.wrapping_add(GAMMA)))),
            counter: 0,
        }
    }

    /// Number of values drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller (consumes two draws).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_pure_functions_of_their_coordinates() {
        let mut a = Stream::new(42, 7);
        let mut b = Stream::new(42, 7);
        let xs: Vec<u64> = (0..5).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..5).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        let mut c = Stream::new(42, 8);
        assert_ne!(xs[0], c.next_u64());
    }

    #[test]
    fn frozen_reference_values() {
        // Pins the documented algorithm so alternate implementations can
        // reproduce streams bit-exactly.
        assert_eq!(mix(0), 0);
        let mut s = Stream::new(0, 0);
        let first = s.next_u64();
        let key = mix(mix(GAMMA));
        assert_eq!(first, mix(key.wrapping_add(GAMMA)));
    }

    #[test]
    fn uniform_moments() {
        let mut s = Stream::new(1, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| s.uniform()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 5e-3);
    }
}
