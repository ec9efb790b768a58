//! Halton points with Cranley–Patterson rotations.

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Point `i` of the Halton sequence in [0,1)^d shifted by `shift` mod 1.
#[inline]
pub fn halton_into(i: u64, shift: &[f64], out: &mut [f64]) {
    for (k, v) in out.iter_mut().enumerate() {
        let x = radical_inverse(i + 1, PRIMES[k]) + shift.get(k).copied().unwrap_or(0.0);
        *v = x - x.floor();
    }
}

pub fn max_dim() -> usize {
    PRIMES.len()
}
