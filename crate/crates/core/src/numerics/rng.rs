use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Source of uniform draws on `[0, 1)`.
pub trait UnitSource {
    fn next_unit(&mut self) -> f64;
}

/// Seeded generator: ChaCha with 8 rounds, keyed from the 64-bit seed
/// through `SeedableRng::seed_from_u64` (PCG32 expansion). Both algorithms
/// are fixed by their published definitions, so a seed yields the same
/// stream on every platform.
///
/// Unit draws take the top 53 bits of a `u64`: `(x >> 11) · 2⁻⁵³`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[a, b)` for `a < b`.
    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        debug_assert!(a < b);
        loop {
            let x = a + (b - a) * self.next_unit();
            // rounding can land on b when the span is large relative to a
            if x < b {
                return x;
            }
        }
    }

    /// Uniform on the open interval `(−bound, bound)`; 0 when `bound` is 0.
    pub fn symmetric_open(&mut self, bound: f64) -> f64 {
        if bound == 0.0 {
            return 0.0;
        }
        loop {
            let x = self.uniform(-bound, bound);
            if x > -bound {
                return x;
            }
        }
    }
}

impl UnitSource for SeededRng {
    fn next_unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
