//! Oracles shared by the integration suites. Nothing here goes through the
//! library's entropy or partition code.

#![allow(dead_code)]

use std::collections::HashMap;

use pkcap::JointPmf;
use rand::Rng;

/// Support of a pmf as `(multi-index, probability)` pairs, decoded by hand.
pub fn points(p: &JointPmf) -> Vec<(Vec<usize>, f64)> {
    let cards = p.cardinalities();
    p.probs()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(mut i, &q)| {
            let mut d = vec![0; cards.len()];
            for k in (0..cards.len()).rev() {
                d[k] = i % cards[k];
                i /= cards[k];
            }
            (d, q)
        })
        .collect()
}

/// Entropy of a projection of a list of weighted outcomes.
pub fn entropy_by<K, F>(pts: &[(Vec<usize>, f64)], key: F) -> f64
where
    K: std::hash::Hash + Eq,
    F: Fn(&[usize]) -> K,
{
    let mut m: HashMap<K, f64> = HashMap::new();
    for (d, q) in pts {
        *m.entry(key(d)).or_insert(0.0) += q;
    }
    m.values().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum::<f64>() / std::f64::consts::LN_2
}

/// I(A ; B | C) for index sets into the outcome tuples.
pub fn cmi(pts: &[(Vec<usize>, f64)], a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let pick = |idx: Vec<usize>| move |d: &[usize]| idx.iter().map(|&i| d[i]).collect::<Vec<_>>();
    let ac: Vec<usize> = a.iter().chain(c).copied().collect();
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
    entropy_by(pts, pick(ac)) + entropy_by(pts, pick(bc))
        - entropy_by(pts, pick(abc))
        - entropy_by(pts, pick(c.to_vec()))
}

/// All set partitions of `items`, each as a label per item (restricted
/// growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let used = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=used {
            prefix.push(l);
            rec(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// `fine` refines `coarse` (labels per item).
pub fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    let mut image = HashMap::new();
    fine.iter()
        .zip(coarse)
        .all(|(f, c)| *image.entry(*f).or_insert(*c) == *c)
}

pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    refines(a, b) && refines(b, a)
}

/// Number of classes of a label vector.
pub fn class_count(labels: &[usize]) -> usize {
    let mut v = labels.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Pmf over (X, Y, Z) where the conditional rows P(Z | y) come from a small
/// pool, so that several symbols of Y share a row.
pub fn random_pooled_rows<R: Rng>(rng: &mut R) -> JointPmf {
    let ny = rng.random_range(1..=5usize);
    let nz = rng.random_range(1..=3usize);
    let nx = rng.random_range(1..=3usize);
    let pool: Vec<Vec<f64>> = (0..rng.random_range(1..=3usize))
        .map(|_| pkcap::gen::random_simplex(rng, nz, 0.3))
        .collect();
    let rows: Vec<usize> = (0..ny).map(|_| rng.random_range(0..pool.len())).collect();
    let py = pkcap::gen::random_simplex(rng, ny, 0.2);
    let chan: Vec<Vec<f64>> = (0..ny * nz).map(|_| pkcap::gen::random_simplex(rng, nx, 0.3)).collect();
    JointPmf::from_fn(["X", "Y", "Z"], vec![nx, ny, nz], |d| {
        py[d[1]] * pool[rows[d[1]]][d[2]] * chan[d[1] * nz + d[2]][d[0]]
    })
    .unwrap()
}

/// Pmf with a random 0/1 support pattern on (Y, Z), `|Y|, |Z| <= 4`.
pub fn random_support_pattern<R: Rng>(rng: &mut R) -> JointPmf {
    let ny = rng.random_range(1..=4usize);
    let nz = rng.random_range(1..=4usize);
    let density = [0.2, 0.35, 0.5, 0.8][rng.random_range(0..4)];
    let mut mask: Vec<bool> = (0..ny * nz).map(|_| rng.random::<f64>() < density).collect();
    if !mask.iter().any(|&m| m) {
        let k = rng.random_range(0..mask.len());
        mask[k] = true;
    }
    let nx = rng.random_range(1..=2usize);
    let w: Vec<f64> = (0..nx * ny * nz).map(|_| 0.1 + rng.random::<f64>()).collect();
    let total: f64 = (0..nx * ny * nz)
        .filter(|i| mask[i % (ny * nz)])
        .map(|i| w[i])
        .sum();
    JointPmf::from_fn(["X", "Y", "Z"], vec![nx, ny, nz], |d| {
        let cell = d[1] * nz + d[2];
        if mask[cell] {
            w[d[0] * ny * nz + cell] / total
        } else {
            0.0
        }
    })
    .unwrap()
}

/// Finest common partition of the Y-support found by enumerating every
/// partition of it. Returns `(support symbols, labels)`.
pub fn finest_common_partition(p: &JointPmf) -> (Vec<usize>, Vec<usize>) {
    let pts = points(p);
    let mut ys: Vec<usize> = pts.iter().map(|(d, _)| d[1]).collect();
    ys.sort_unstable();
    ys.dedup();
    let pos = |y: usize| ys.iter().position(|&s| s == y).unwrap();
    let mut best: Option<Vec<usize>> = None;
    for f in set_partitions(ys.len()) {
        // common iff each z sees a single class of f
        let mut z_class: HashMap<usize, usize> = HashMap::new();
        let common = pts
            .iter()
            .all(|(d, _)| *z_class.entry(d[2]).or_insert(f[pos(d[1])]) == f[pos(d[1])]);
        if common && best.as_ref().is_none_or(|b| class_count(&f) > class_count(b)) {
            best = Some(f);
        }
    }
    (ys, best.expect("the constant partition is always common"))
}

/// All common partitions of the Y-support.
pub fn common_partitions(p: &JointPmf) -> Vec<Vec<usize>> {
    let pts = points(p);
    let mut ys: Vec<usize> = pts.iter().map(|(d, _)| d[1]).collect();
    ys.sort_unstable();
    ys.dedup();
    let pos = |y: usize| ys.iter().position(|&s| s == y).unwrap();
    set_partitions(ys.len())
        .into_iter()
        .filter(|f| {
            let mut z_class: HashMap<usize, usize> = HashMap::new();
            pts.iter()
                .all(|(d, _)| *z_class.entry(d[2]).or_insert(f[pos(d[1])]) == f[pos(d[1])])
        })
        .collect()
}
