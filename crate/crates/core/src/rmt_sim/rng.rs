use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A reproducible random stream: ChaCha20 keyed by `seed`, with `stream` as
/// the cipher's stream selector. Equal pairs give bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut r = ChaCha20Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// Independent sub-stream `i` of this stream.
    pub fn child(&self, i: u64) -> Self {
        Self { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(i.wrapping_add(1))) }
    }
}

/// Standard complex Gaussian scaled so that real and imaginary parts each
/// have variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = var.sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Splits `total` samples into chunks of `chunk_size`, runs `f(rng, count)`
/// on each chunk with its own child stream, and returns the results in chunk
/// order. Output depends only on `stream`, `total` and `chunk_size`, never on
/// the number of worker threads.
pub fn chunked<T, F>(stream: &RngStream, total: usize, chunk_size: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha20Rng, usize) -> T + Sync,
{
    let chunk_size = chunk_size.max(1);
    let chunks = total.div_ceil(chunk_size);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = chunk_size.min(total - c * chunk_size);
            let mut rng = stream.child(c as u64).rng();
            f(&mut rng, count)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_reproduce_and_differ() {
        let a: Vec<u64> = (0..4).map({ let mut r = RngStream::new(1, 0).rng(); move |_| r.random() }).collect();
        let b: Vec<u64> = (0..4).map({ let mut r = RngStream::new(1, 0).rng(); move |_| r.random() }).collect();
        let c: Vec<u64> = (0..4).map({ let mut r = RngStream::new(1, 1).rng(); move |_| r.random() }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(RngStream::new(1, 0).child(0), RngStream::new(1, 0).child(1));
    }

    #[test]
    fn chunked_is_thread_count_independent() {
        let s = RngStream::new(42, 3);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| chunked(&s, 1000, 64, |rng, n| (0..n).map(|_| rng.random::<f64>()).sum::<f64>()))
        };
        assert_eq!(run(1), run(4));
    }
}
