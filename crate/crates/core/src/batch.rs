//! Independent transforms over many inputs. Each item gets its own engine
//! run, so items can be spread across threads.

use crate::engine::{self, CycleReport};
use crate::error::Result;
use crate::fixed_point::FixedComplex;
use crate::modring::Polynomial;
use crate::par::{self, Execution};

pub fn ntt_batch(polys: &[Polynomial], exec: Execution) -> Vec<Result<(Polynomial, CycleReport)>> {
    par::map(exec, polys, engine::ntt)
}

pub fn fft_batch(
    inputs: &[Vec<FixedComplex>],
    exec: Execution,
) -> Vec<Result<(Vec<FixedComplex>, CycleReport)>> {
    par::map(exec, inputs, |x| engine::fft(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::Modulus;
    use crate::rng::random_poly;

    #[test]
    fn batch_matches_single_runs() {
        let polys: Vec<_> = (0..8).map(|s| random_poly(Modulus::Kyber, s)).collect();
        let par = ntt_batch(&polys, Execution::Parallel);
        let seq = ntt_batch(&polys, Execution::Sequential);
        for ((p, a), b) in polys.iter().zip(par).zip(seq) {
            let (a, b) = (a.unwrap(), b.unwrap());
            assert_eq!(a, b);
            assert_eq!(a, engine::ntt(p).unwrap());
        }
    }
}
