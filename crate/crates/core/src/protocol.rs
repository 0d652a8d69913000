//! Exact evaluation of deterministic public-discussion protocols at a fixed
//! blocklength.
//!
//! Terminals X, Y, Z observe `n` i.i.d. samples of the source. Messages go
//! out in `3 * rounds` slots; slot `t` (1-based) belongs to terminal
//! `((t - 1) mod 3)`, i.e. X, Y, Z, X, ... Each message is a lookup
//! `table[own sequence][transcript so far]`. Keys are lookups on
//! `[own sequence][full transcript]`.
//!
//! Sequences are indexed in base `|alphabet|` with the first sample most
//! significant; transcripts likewise in mixed radix over the slot alphabet
//! sizes, first message most significant. A null transmission is a slot
//! with alphabet size 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{entropy_of_masses, JointPmf};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::region::Point;

pub const PROTOCOL_SCHEMA: &str = "pkcap-protocol/1";
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    X,
    Y,
    Z,
}

/// Transmitting terminal of 1-based slot `t`.
pub fn slot_terminal(t: usize) -> Terminal {
    match (t.max(1) - 1) % 3 {
        0 => Terminal::X,
        1 => Terminal::Y,
        _ => Terminal::Z,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotTable {
    /// Message alphabet size `m_t`.
    pub alphabet: usize,
    /// `table[own sequence][transcript index]`.
    pub table: Vec<Vec<usize>>,
}

/// Key maps of one pair: `k_map` on X's side, `l_map` on the partner's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaps {
    pub alphabet: usize,
    pub k_map: Vec<Vec<usize>>,
    pub l_map: Vec<Vec<usize>>,
}

impl KeyMaps {
    /// Both sides output `0` on alphabet `{0, .., alphabet - 1}`.
    pub fn constant(alphabet: usize, x_seqs: usize, peer_seqs: usize, transcripts: usize) -> Self {
        KeyMaps {
            alphabet,
            k_map: vec![vec![0; transcripts]; x_seqs],
            l_map: vec![vec![0; transcripts]; peer_seqs],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub blocklength: usize,
    pub rounds: usize,
    pub slots: Vec<SlotTable>,
    pub key_xy: KeyMaps,
    pub key_xz: KeyMaps,
}

fn default_schema() -> String {
    PROTOCOL_SCHEMA.to_string()
}

fn malformed(msg: String) -> Error {
    Error::MalformedTable(msg)
}

fn check_map(name: &str, map: &[Vec<usize>], rows: usize, cols: usize, limit: usize) -> Result<()> {
    if map.len() != rows {
        return Err(malformed(format!("{name} has {} rows, expected {rows}", map.len())));
    }
    for (i, row) in map.iter().enumerate() {
        if row.len() != cols {
            return Err(malformed(format!("{name}[{i}] has {} entries, expected {cols}", row.len())));
        }
        if let Some(v) = row.iter().find(|&&v| v >= limit) {
            return Err(malformed(format!("{name}[{i}] contains {v}, alphabet size is {limit}")));
        }
    }
    Ok(())
}

fn checked_pow(base: usize, n: usize) -> Result<usize> {
    base.checked_pow(n as u32)
        .ok_or_else(|| malformed("sequence space overflows".into()))
}

impl ProtocolSpec {
    /// Checks that every table is total over its domain with outputs in
    /// range, for a source with alphabet sizes `cards = [|X|, |Y|, |Z|]`.
    pub fn validate(&self, cards: [usize; 3]) -> Result<()> {
        if self.schema != PROTOCOL_SCHEMA {
            return Err(malformed(format!("unknown schema `{}`", self.schema)));
        }
        if self.blocklength == 0 {
            return Err(malformed("blocklength must be at least 1".into()));
        }
        if self.slots.len() != 3 * self.rounds {
            return Err(malformed(format!(
                "{} rounds need {} slots, found {}",
                self.rounds,
                3 * self.rounds,
                self.slots.len()
            )));
        }
        let seqs = self.sequence_counts(cards)?;
        let mut transcripts = 1usize;
        for (k, slot) in self.slots.iter().enumerate() {
            if slot.alphabet == 0 {
                return Err(malformed(format!("slot {} has an empty alphabet", k + 1)));
            }
            let own = seqs[k % 3];
            check_map(&format!("slot {}", k + 1), &slot.table, own, transcripts, slot.alphabet)?;
            transcripts = transcripts
                .checked_mul(slot.alphabet)
                .ok_or_else(|| malformed("transcript space overflows".into()))?;
        }
        for (name, keys, peer) in [("key_xy", &self.key_xy, seqs[1]), ("key_xz", &self.key_xz, seqs[2])] {
            if keys.alphabet == 0 {
                return Err(malformed(format!("{name} has an empty alphabet")));
            }
            check_map(&format!("{name}.k_map"), &keys.k_map, seqs[0], transcripts, keys.alphabet)?;
            check_map(&format!("{name}.l_map"), &keys.l_map, peer, transcripts, keys.alphabet)?;
        }
        Ok(())
    }

    fn sequence_counts(&self, cards: [usize; 3]) -> Result<[usize; 3]> {
        Ok([
            checked_pow(cards[0], self.blocklength)?,
            checked_pow(cards[1], self.blocklength)?,
            checked_pow(cards[2], self.blocklength)?,
        ])
    }

    /// Number of distinct full transcripts.
    pub fn transcript_count(&self) -> usize {
        self.slots.iter().map(|s| s.alphabet).product()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    /// Largest number of joint sequences `(x^n, y^n, z^n)` to enumerate.
    pub budget: u64,
    pub exec: Exec,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            budget: DEFAULT_BUDGET,
            exec: Exec::default(),
        }
    }
}

/// Exact per-symbol metrics of one protocol run, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub blocklength: usize,
    /// Pr{K_XY != L_XY}
    pub error_xy: f64,
    pub error_xz: f64,
    /// (1/n) max(I(K_XY ; F, Z^n), I(L_XY ; F, Z^n))
    pub leak_xy: f64,
    /// (1/n) max(I(K_XZ ; F, Y^n), I(L_XZ ; F, Y^n))
    pub leak_xz: f64,
    /// (1/n) (log2 |K_XY| - H(K_XY))
    pub unif_xy: f64,
    pub unif_xz: f64,
    /// (1/n) H(K_XY)
    pub rate_xy: f64,
    pub rate_xz: f64,
}

/// Joint law of (K, L, F, helper sequence) for one key pair.
type PairTable = BTreeMap<(usize, usize, usize, usize), f64>;

struct PairMetrics {
    error: f64,
    leak: f64,
    h_key: f64,
}

fn marginal_entropy<K: Ord>(table: &PairTable, key: impl Fn(&(usize, usize, usize, usize)) -> K) -> f64 {
    let mut m: BTreeMap<K, f64> = BTreeMap::new();
    for (k, &p) in table {
        *m.entry(key(k)).or_insert(0.0) += p;
    }
    entropy_of_masses(m.into_values())
}

fn pair_metrics(table: &PairTable) -> PairMetrics {
    let error = table
        .iter()
        .filter(|((k, l, _, _), _)| k != l)
        .map(|(_, &p)| p)
        .sum();
    let h_fh = marginal_entropy(table, |t| (t.2, t.3));
    let h_k = marginal_entropy(table, |t| t.0);
    let h_l = marginal_entropy(table, |t| t.1);
    let h_kfh = marginal_entropy(table, |t| (t.0, t.2, t.3));
    let h_lfh = marginal_entropy(table, |t| (t.1, t.2, t.3));
    let leak_k = h_k + h_fh - h_kfh;
    let leak_l = h_l + h_fh - h_lfh;
    PairMetrics {
        error,
        leak: leak_k.max(leak_l).max(0.0),
        h_key: h_k,
    }
}

fn digits(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for slot in d.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    d
}

/// Enumerates every joint sequence, runs the protocol, and computes the
/// metrics from the exact joint laws of keys, transcript and helper data.
pub fn evaluate_protocol(p: &JointPmf, spec: &ProtocolSpec, opts: &EnumOptions) -> Result<EvaluationReport> {
    p.terminals()?;
    let c = p.cardinalities();
    let cards = [c[0], c[1], c[2]];
    let n = spec.blocklength;
    let needed = (cards[0] as u128 * cards[1] as u128 * cards[2] as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if n > 0 && needed > u128::from(opts.budget) {
        return Err(Error::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    spec.validate(cards)?;
    let seqs = spec.sequence_counts(cards)?;

    let decoded: [Vec<Vec<usize>>; 3] =
        std::array::from_fn(|i| (0..seqs[i]).map(|s| digits(s, cards[i], n)).collect());
    let probs = p.probs();
    let (syz, sz) = (cards[1] * cards[2], cards[2]);

    // one chunk per x-sequence; merged in index order below
    let chunks = opts.exec.map_indexed(seqs[0], |xs| {
        let mut xy = PairTable::new();
        let mut xz = PairTable::new();
        let xd = &decoded[0][xs];
        for (ys, yd) in decoded[1].iter().enumerate() {
            for (zs, zd) in decoded[2].iter().enumerate() {
                let mut prob = 1.0;
                for i in 0..n {
                    prob *= probs[xd[i] * syz + yd[i] * sz + zd[i]];
                }
                if prob == 0.0 {
                    continue;
                }
                let own = [xs, ys, zs];
                let mut f = 0usize;
                for (k, slot) in spec.slots.iter().enumerate() {
                    f = f * slot.alphabet + slot.table[own[k % 3]][f];
                }
                let kxy = spec.key_xy.k_map[xs][f];
                let lxy = spec.key_xy.l_map[ys][f];
                let kxz = spec.key_xz.k_map[xs][f];
                let lxz = spec.key_xz.l_map[zs][f];
                *xy.entry((kxy, lxy, f, zs)).or_insert(0.0) += prob;
                *xz.entry((kxz, lxz, f, ys)).or_insert(0.0) += prob;
            }
        }
        (xy, xz)
    });
    let mut xy = PairTable::new();
    let mut xz = PairTable::new();
    for (a, b) in chunks {
        for (k, v) in a {
            *xy.entry(k).or_insert(0.0) += v;
        }
        for (k, v) in b {
            *xz.entry(k).or_insert(0.0) += v;
        }
    }

    let nf = n as f64;
    let mxy = pair_metrics(&xy);
    let mxz = pair_metrics(&xz);
    let unif = |alphabet: usize, h: f64| (((alphabet as f64).log2() - h) / nf).max(0.0);
    Ok(EvaluationReport {
        blocklength: n,
        error_xy: mxy.error.clamp(0.0, 1.0),
        error_xz: mxz.error.clamp(0.0, 1.0),
        leak_xy: mxy.leak / nf,
        leak_xz: mxz.leak / nf,
        unif_xy: unif(spec.key_xy.alphabet, mxy.h_key),
        unif_xz: unif(spec.key_xz.alphabet, mxz.h_key),
        rate_xy: mxy.h_key / nf,
        rate_xz: mxz.h_key / nf,
    })
}

/// `(XY pair is an eps-PK, XZ pair is an eps-PK)`.
pub fn check_eps_pk(rep: &EvaluationReport, eps: f64) -> (bool, bool) {
    (
        rep.error_xy <= eps && rep.leak_xy <= eps && rep.unif_xy <= eps,
        rep.error_xz <= eps && rep.leak_xz <= eps && rep.unif_xz <= eps,
    )
}

/// `(R_XY, R_XZ)` of the evaluated protocol.
pub fn rate_point(rep: &EvaluationReport) -> Point {
    [rep.rate_xy, rep.rate_xz]
}

/// Reference protocols for the bundled example sources.
pub mod library {
    use super::*;

    fn seq_count(card: usize, n: usize) -> usize {
        card.pow(n as u32)
    }

    /// Source `X = (Y, Z)` (X encoded `2y + z`), no communication: X keys
    /// the Y-part of its observation with Y and the Z-part with Z.
    pub fn direct_extraction(n: usize) -> ProtocolSpec {
        let xs = seq_count(4, n);
        let bits = seq_count(2, n);
        let part = |x: usize, shift: usize| {
            digits(x, 4, n)
                .into_iter()
                .fold(0, |acc, sym| acc * 2 + ((sym >> shift) & 1))
        };
        ProtocolSpec {
            schema: default_schema(),
            blocklength: n,
            rounds: 0,
            slots: Vec::new(),
            key_xy: KeyMaps {
                alphabet: bits,
                k_map: (0..xs).map(|x| vec![part(x, 1)]).collect(),
                l_map: (0..bits).map(|y| vec![y]).collect(),
            },
            key_xz: KeyMaps {
                alphabet: bits,
                k_map: (0..xs).map(|x| vec![part(x, 0)]).collect(),
                l_map: (0..bits).map(|z| vec![z]).collect(),
            },
        }
    }

    /// Same source, `n = 1`: Y broadcasts its bit in slot 2 and both X and
    /// Y use it as the XY key. The XZ pair keys on Z's bit without talking.
    pub fn public_broadcast() -> ProtocolSpec {
        let slots = vec![
            SlotTable { alphabet: 1, table: vec![vec![0]; 4] },
            SlotTable { alphabet: 2, table: vec![vec![0], vec![1]] },
            SlotTable { alphabet: 1, table: vec![vec![0, 0]; 2] },
        ];
        ProtocolSpec {
            schema: default_schema(),
            blocklength: 1,
            rounds: 1,
            slots,
            key_xy: KeyMaps {
                alphabet: 2,
                k_map: vec![vec![0, 1]; 4],
                l_map: vec![vec![0, 1]; 2],
            },
            key_xz: KeyMaps {
                alphabet: 2,
                k_map: (0..4).map(|x| vec![x & 1; 2]).collect(),
                l_map: (0..2).map(|z| vec![z; 2]).collect(),
            },
        }
    }

    /// No communication, both keys constant on the given alphabets.
    pub fn constant_keys(cards: [usize; 3], n: usize, alphabet_xy: usize, alphabet_xz: usize) -> ProtocolSpec {
        ProtocolSpec {
            schema: default_schema(),
            blocklength: n,
            rounds: 0,
            slots: Vec::new(),
            key_xy: KeyMaps::constant(alphabet_xy, seq_count(cards[0], n), seq_count(cards[1], n), 1),
            key_xz: KeyMaps::constant(alphabet_xz, seq_count(cards[0], n), seq_count(cards[2], n), 1),
        }
    }

    /// Worked source (`Y = 2v + w`, `Z = 2v + w'`, `X = 2v + (w xor w')`),
    /// `n = 1`: Z broadcasts `w'` in slot 3, X recovers `w`, and X and Y
    /// key on `w`. The XZ key is constant.
    pub fn worked_source_helper() -> ProtocolSpec {
        let slots = vec![
            SlotTable { alphabet: 1, table: vec![vec![0]; 4] },
            SlotTable { alphabet: 1, table: vec![vec![0]; 4] },
            SlotTable { alphabet: 2, table: (0..4).map(|z| vec![z & 1]).collect() },
        ];
        ProtocolSpec {
            schema: default_schema(),
            blocklength: 1,
            rounds: 1,
            slots,
            key_xy: KeyMaps {
                alphabet: 2,
                k_map: (0..4).map(|x| (0..2).map(|w2| (x & 1) ^ w2).collect()).collect(),
                l_map: (0..4).map(|y| vec![y & 1; 2]).collect(),
            },
            key_xz: KeyMaps::constant(1, 4, 4, 2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;
    use crate::gen;
    use crate::region::outer_region;

    #[test]
    fn slot_owner_cycles() {
        let owners: Vec<Terminal> = (1..=9).map(slot_terminal).collect();
        use Terminal::*;
        assert_eq!(owners, vec![X, Y, Z, X, Y, Z, X, Y, Z]);
    }

    #[test]
    fn direct_extraction_is_perfect() {
        let p = gen::direct_extraction_source();
        let rep = evaluate_protocol(&p, &direct_extraction(2), &EnumOptions::default()).unwrap();
        assert_eq!(rep.error_xy, 0.0);
        assert_eq!(rep.error_xz, 0.0);
        assert_eq!(rep.leak_xy, 0.0);
        assert_eq!(rep.leak_xz, 0.0);
        assert_eq!(rep.unif_xy, 0.0);
        assert_eq!(rep.unif_xz, 0.0);
        assert_eq!(rate_point(&rep), [1.0, 1.0]);
        assert_eq!(check_eps_pk(&rep, 0.0), (true, true));
    }

    #[test]
    fn broadcast_key_leaks() {
        let p = gen::direct_extraction_source();
        let rep = evaluate_protocol(&p, &public_broadcast(), &EnumOptions::default()).unwrap();
        assert_eq!(rep.error_xy, 0.0);
        assert_eq!(rep.leak_xy, 1.0);
        assert_eq!(rep.leak_xz, 0.0);
        assert!(!check_eps_pk(&rep, 0.5).0);
        assert!(check_eps_pk(&rep, 0.5).1);
    }

    #[test]
    fn constant_key_is_not_uniform() {
        let p = gen::direct_extraction_source();
        let rep = evaluate_protocol(&p, &constant_keys([4, 2, 2], 1, 2, 1), &EnumOptions::default()).unwrap();
        assert_eq!(rep.unif_xy, 1.0);
        assert_eq!(rep.error_xy, 0.0);
        assert_eq!(rep.leak_xy, 0.0);
        assert!(check_eps_pk(&rep, 1.0).0);
        assert!(!check_eps_pk(&rep, 0.99).0);
        assert_eq!(rate_point(&rep), [0.0, 0.0]);
    }

    #[test]
    fn worked_source_helper_protocol() {
        let p = gen::worked_source();
        let rep = evaluate_protocol(&p, &worked_source_helper(), &EnumOptions::default()).unwrap();
        assert_eq!(rep.error_xy, 0.0);
        assert_eq!(rep.leak_xy, 0.0);
        assert_eq!(rep.rate_xy, 1.0);
        assert_eq!(rep.rate_xz, 0.0);
        assert_eq!(check_eps_pk(&rep, 0.0), (true, true));
        assert!(outer_region(&p).unwrap().contains(rate_point(&rep), 1e-9));
    }

    #[test]
    fn keying_on_common_part_leaks_to_helper() {
        // X and Y key on v, which Z also sees
        let p = gen::worked_source();
        let mut spec = constant_keys([4, 4, 4], 1, 2, 1);
        spec.key_xy.k_map = (0..4).map(|x| vec![x >> 1]).collect();
        spec.key_xy.l_map = (0..4).map(|y| vec![y >> 1]).collect();
        let rep = evaluate_protocol(&p, &spec, &EnumOptions::default()).unwrap();
        assert_eq!(rep.error_xy, 0.0);
        assert_eq!(rep.leak_xy, 1.0);
    }

    #[test]
    fn partitioning_does_not_change_reports() {
        let p = gen::direct_extraction_source();
        let spec = direct_extraction(3);
        let a = evaluate_protocol(&p, &spec, &EnumOptions { exec: Exec::Parallel, ..Default::default() }).unwrap();
        let b = evaluate_protocol(&p, &spec, &EnumOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn budget_and_malformed_tables() {
        let p = gen::direct_extraction_source();
        let e = evaluate_protocol(&p, &direct_extraction(2), &EnumOptions { budget: 100, ..Default::default() })
            .unwrap_err();
        assert_eq!(e.code(), "BUDGET_EXCEEDED");

        let mut bad = direct_extraction(1);
        bad.key_xy.k_map[0][0] = 7;
        assert_eq!(
            evaluate_protocol(&p, &bad, &EnumOptions::default()).unwrap_err().code(),
            "MALFORMED_TABLE"
        );

        let mut bad = public_broadcast();
        bad.slots[1].table.pop();
        assert_eq!(
            evaluate_protocol(&p, &bad, &EnumOptions::default()).unwrap_err().code(),
            "MALFORMED_TABLE"
        );

        let mut bad = public_broadcast();
        bad.slots.pop();
        assert!(evaluate_protocol(&p, &bad, &EnumOptions::default()).is_err());
    }
}
