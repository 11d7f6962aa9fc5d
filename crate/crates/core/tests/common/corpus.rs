use std::cmp::Ordering;

use nocup::hyperint::HyperInt;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact denotation: either the integer itself or `2^e`.
#[derive(Clone, Debug)]
enum Denot {
    Int(BigUint),
    Pow2(BigUint),
}

/// Exponents up to this many bits are materialized in full.
const MATERIALIZE: u64 = 1 << 16;

fn denote(h: &HyperInt) -> Denot {
    match h {
        HyperInt::Exact(x) => Denot::Int(x.clone()),
        HyperInt::Tower { height: 1, top } => match u64::try_from(top.clone()) {
            Ok(t) if t <= MATERIALIZE => Denot::Int(BigUint::from(1u32) << t),
            _ => Denot::Pow2(top.clone()),
        },
        other => panic!("{other} is outside the corpus"),
    }
}

fn cmp_int_pow2(x: &BigUint, e: &BigUint) -> Ordering {
    // 2^e has e + 1 bits; x == 2^e iff x has e + 1 bits and only one set bit
    let bits = BigUint::from(x.bits());
    let target = e + 1u32;
    match bits.cmp(&target) {
        Ordering::Equal if x.count_ones() == 1 => Ordering::Equal,
        Ordering::Equal => Ordering::Greater,
        o => o,
    }
}

pub fn full_cmp(a: &HyperInt, b: &HyperInt) -> Ordering {
    match (denote(a), denote(b)) {
        (Denot::Int(x), Denot::Int(y)) => x.cmp(&y),
        (Denot::Pow2(s), Denot::Pow2(t)) => s.cmp(&t),
        (Denot::Int(x), Denot::Pow2(e)) => cmp_int_pow2(&x, &e),
        (Denot::Pow2(e), Denot::Int(x)) => cmp_int_pow2(&x, &e).reverse(),
    }
}

/// 200 values whose denotations have at most `2^32` bits.
pub fn corpus() -> Vec<HyperInt> {
    let mut v: Vec<HyperInt> = Vec::new();
    for n in [0u64, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 65, 255, 256, 65535, 65536, u64::MAX] {
        v.push(HyperInt::from(n));
    }
    for j in [1u64, 10, 32, 63, 64, 65, 100, 1000, 4096] {
        let p = BigUint::from(1u32) << j;
        v.push(HyperInt::Exact(p.clone() - 1u32));
        v.push(HyperInt::Exact(p.clone()));
        v.push(HyperInt::Exact(p + 1u32));
    }
    let two = |k: u64, m: u64| HyperInt::tower(k, &HyperInt::from(m));
    v.extend([two(2, 5), two(2, 6), two(3, 3), two(3, 4), two(4, 2), two(1, 64), two(1, 65536)]);
    for t in [64u64, 65, 100, 1000, 4095, 4096, 4097, 65536, 65537, 1 << 20, (1 << 31) + 7, (1 << 32) - 1] {
        v.push(HyperInt::tower_of(1, BigUint::from(t)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    while v.len() < 200 {
        let h = match rng.gen_range(0..3) {
            0 => HyperInt::from(rng.gen::<u64>() >> rng.gen_range(0..64)),
            1 => {
                let words: Vec<u32> = (0..rng.gen_range(1..80)).map(|_| rng.gen()).collect();
                HyperInt::Exact(BigUint::new(words))
            }
            _ => HyperInt::tower_of(1, BigUint::from(rng.gen_range(64u64..1 << 32))),
        };
        v.push(h);
    }
    v
}

