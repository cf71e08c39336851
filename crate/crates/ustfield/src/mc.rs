//! Seeded Monte Carlo over fixed-size chunks.
//!
//! Chunk `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, and
//! results are concatenated in chunk order, so the output depends on the seed
//! and sample count only, never on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNK: usize = 1000;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `draw` `samples` times. Each chunk builds its own state with `init`
/// (samplers carry scratch buffers). `threads = None` uses rayon's default.
pub fn run_chunks<S, T, E>(
    seed: u64,
    samples: usize,
    threads: Option<usize>,
    init: impl Fn() -> Result<S, E> + Sync,
    draw: impl Fn(&mut S, &mut ChaCha8Rng) -> Result<T, E> + Sync,
) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let mut rng = chunk_rng(seed, i as u64);
                let mut state = init()?;
                let len = CHUNK.min(samples - i * CHUNK);
                (0..len).map(|_| draw(&mut state, &mut rng)).collect::<Result<Vec<T>, E>>()
            })
            .collect::<Result<Vec<Vec<T>>, E>>()
    };
    let parts = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build().expect("thread pool").install(job),
        None => job(),
    }?;
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn thread_count_does_not_change_results() {
        let run = |t| run_chunks(9, 2500, Some(t), || Ok::<_, ()>(()), |_, rng| Ok(rng.random::<f64>())).unwrap();
        let a = run(1);
        assert_eq!(a.len(), 2500);
        assert_eq!(a, run(3));
        assert_ne!(a[0], a[CHUNK]);
    }
}
