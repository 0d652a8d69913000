//! Source generators: named reference sources and seeded random pmfs for
//! batch validation and benchmarks. Every source has variables `X`, `Y`, `Z`
//! in that order.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist::JointPmf;

/// V, W, W' iid uniform bits; `Y = (V, W)`, `Z = (V, W')`, `X = (V, W xor W')`.
/// Pairs are encoded as `2 * first + second`.
pub fn worked_source() -> JointPmf {
    JointPmf::from_fn(["X", "Y", "Z"], vec![4, 4, 4], |d| {
        let (x, y, z) = (d[0], d[1], d[2]);
        let (v, w, w2) = (y >> 1, y & 1, z & 1);
        if z >> 1 == v && x == 2 * v + (w ^ w2) {
            0.125
        } else {
            0.0
        }
    })
    .expect("valid table")
}

/// Doubly symmetric binary pair `(Y, Z)` with the given crossover, and `X = Y`.
pub fn doubly_symmetric(crossover: f64) -> JointPmf {
    JointPmf::from_fn(["X", "Y", "Z"], vec![2, 2, 2], |d| {
        if d[0] != d[1] {
            0.0
        } else if d[1] == d[2] {
            (1.0 - crossover) / 2.0
        } else {
            crossover / 2.0
        }
    })
    .expect("valid table")
}

/// `Y`, `Z` independent uniform bits and `X = (Y, Z)` encoded as `2y + z`.
pub fn direct_extraction_source() -> JointPmf {
    JointPmf::from_fn(["X", "Y", "Z"], vec![4, 2, 2], |d| {
        if d[0] == 2 * d[1] + d[2] {
            0.25
        } else {
            0.0
        }
    })
    .expect("valid table")
}

/// X, Y, Z mutually independent with the given marginals.
pub fn independent_source(px: &[f64], py: &[f64], pz: &[f64]) -> JointPmf {
    JointPmf::from_fn(["X", "Y", "Z"], vec![px.len(), py.len(), pz.len()], |d| {
        px[d[0]] * py[d[1]] * pz[d[2]]
    })
    .expect("valid table")
}

/// `Y = Z` uniform over `k` symbols and `X = Y`.
pub fn shared_source(k: usize) -> JointPmf {
    JointPmf::from_fn(["X", "Y", "Z"], vec![k, k, k], |d| {
        if d[0] == d[1] && d[1] == d[2] {
            1.0 / k as f64
        } else {
            0.0
        }
    })
    .expect("valid table")
}

/// Normalized vector of `Exp(1)` draws, with each entry zeroed with
/// probability `zero_frac`; at least one entry stays positive.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, len: usize, zero_frac: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len)
        .map(|_| {
            if rng.random::<f64>() < zero_frac {
                0.0
            } else {
                -(1.0 - rng.random::<f64>()).ln()
            }
        })
        .collect();
    if v.iter().all(|&q| q <= 0.0) {
        v[rng.random_range(0..len)] = 1.0;
    }
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|q| *q /= sum);
    v
}

/// Random pmf over `(X, Y, Z)` with the given cardinalities.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, cards: [usize; 3], zero_frac: f64) -> JointPmf {
    let probs = random_simplex(rng, cards.iter().product(), zero_frac);
    JointPmf::new(probs, ["X", "Y", "Z"], cards.to_vec(), 1e-9).expect("valid table")
}

/// Random pmf with each cardinality drawn from `1..=max_card` and a random
/// sparsity level, so that disconnected supports occur regularly.
pub fn random_small_pmf<R: Rng + ?Sized>(rng: &mut R, max_card: usize) -> JointPmf {
    let cards = [
        rng.random_range(1..=max_card),
        rng.random_range(1..=max_card),
        rng.random_range(1..=max_card),
    ];
    let zero_frac = [0.0, 0.3, 0.6, 0.8][rng.random_range(0..4)];
    random_pmf(rng, cards, zero_frac)
}

/// Random deterministically correlated source: a component label `C` is
/// drawn first, then `Y` and `Z` independently given `C` from disjoint
/// per-component blocks, and `X` from an arbitrary channel of `(Y, Z)`.
/// Symbol orders of `Y` and `Z` are shuffled.
pub fn random_det_correlated<R: Rng + ?Sized>(rng: &mut R) -> JointPmf {
    let comps = rng.random_range(1..=3usize);
    let pc = random_simplex(rng, comps, 0.0);
    let ysizes: Vec<usize> = (0..comps).map(|_| rng.random_range(1..=2)).collect();
    let zsizes: Vec<usize> = (0..comps).map(|_| rng.random_range(1..=2)).collect();
    let ny: usize = ysizes.iter().sum();
    let nz: usize = zsizes.iter().sum();

    // (component, conditional prob) per raw symbol
    let block = |rng: &mut R, sizes: &[usize]| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (c, &k) in sizes.iter().enumerate() {
            for q in random_simplex(rng, k, 0.0) {
                out.push((c, q));
            }
        }
        out.shuffle(rng);
        out
    };
    let ys = block(rng, &ysizes);
    let zs = block(rng, &zsizes);

    let nx = rng.random_range(1..=3usize);
    let channel: Vec<Vec<f64>> = (0..ny * nz).map(|_| random_simplex(rng, nx, 0.3)).collect();

    JointPmf::from_fn(["X", "Y", "Z"], vec![nx, ny, nz], |d| {
        let (cy, qy) = ys[d[1]];
        let (cz, qz) = zs[d[2]];
        if cy != cz {
            0.0
        } else {
            pc[cy] * qy * qz * channel[d[1] * nz + d[2]][d[0]]
        }
    })
    .expect("valid table")
}
