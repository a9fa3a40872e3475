use rand::Rng;

/// Applies `1..=max_mutations` single-byte substitutions at random offsets.
/// Each substitution changes the byte it lands on; length is preserved.
pub fn mutate<R: Rng + ?Sized>(seed: &[u8], rng: &mut R, max_mutations: u32) -> Vec<u8> {
    let mut out = seed.to_vec();
    mutate_in_place(&mut out, rng, max_mutations);
    out
}

pub fn mutate_in_place<R: Rng + ?Sized>(buf: &mut [u8], rng: &mut R, max_mutations: u32) {
    if buf.is_empty() {
        return;
    }
    let n = rng.gen_range(1..=max_mutations.max(1));
    for _ in 0..n {
        let at = rng.gen_range(0..buf.len());
        buf[at] ^= rng.gen_range(1..=u8::MAX);
    }
}
