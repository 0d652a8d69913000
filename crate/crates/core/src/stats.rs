//! Structural statistics of a pair of variables: minimal sufficient
//! statistics, the maximal common function (Gács–Körner common part), and
//! the deterministic-correlation test.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::aux::AuxChannel;
use crate::dist::{JointPmf, VariableGroup};
use crate::error::{Error, Result};

/// Default tolerance of the conditional-independence check.
pub const DEFAULT_CI_TOL: f64 = 1e-9;

/// Decimal digits kept when comparing conditional rows.
const ROW_DIGITS: i32 = 12;

/// A deterministic labeling of one variable's alphabet.
///
/// Zero-probability symbols carry no label. Labels are canonical: label 0
/// is the class of the smallest labeled symbol, then increasing by first
/// appearance in symbol order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statistic {
    variable: String,
    labels: Vec<Option<usize>>,
    classes: usize,
}

impl Statistic {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(variable: impl Into<String>, labels: Vec<Option<usize>>) -> Self {
        let mut remap = BTreeMap::new();
        let labels: Vec<Option<usize>> = labels
            .into_iter()
            .map(|l| {
                l.map(|raw| {
                    let next = remap.len();
                    *remap.entry(raw).or_insert(next)
                })
            })
            .collect();
        Statistic {
            variable: variable.into(),
            labels,
            classes: remap.len(),
        }
    }

    /// Identity labeling on the support of `variable`.
    pub fn identity(p: &JointPmf, variable: &str) -> Result<Self> {
        let m = p.marginal_of(variable)?;
        Ok(Self::from_labels(
            variable,
            m.iter().enumerate().map(|(s, &q)| (q > 0.0).then_some(s)).collect(),
        ))
    }

    /// Single class on the support of `variable`.
    pub fn constant(p: &JointPmf, variable: &str) -> Result<Self> {
        let m = p.marginal_of(variable)?;
        Ok(Self::from_labels(
            variable,
            m.iter().map(|&q| (q > 0.0).then_some(0)).collect(),
        ))
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label(&self, symbol: usize) -> Option<usize> {
        self.labels.get(symbol).copied().flatten()
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    /// Symbols of each class, in label order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes];
        for (s, l) in self.labels.iter().enumerate() {
            if let Some(l) = l {
                out[*l].push(s);
            }
        }
        out
    }

    /// True if every class of `self` lies inside a class of `coarser`
    /// (both must label the same symbols).
    pub fn refines(&self, coarser: &Statistic) -> bool {
        if self.labels.len() != coarser.labels.len() {
            return false;
        }
        let mut image: Vec<Option<usize>> = vec![None; self.classes];
        for (fine, coarse) in self.labels.iter().zip(&coarser.labels) {
            match (fine, coarse) {
                (None, None) => {}
                (Some(f), Some(c)) => match image[*f] {
                    None => image[*f] = Some(*c),
                    Some(prev) if prev != *c => return false,
                    Some(_) => {}
                },
                _ => return false,
            }
        }
        true
    }

    /// Same partition of the same symbols, ignoring label names.
    pub fn same_partition(&self, other: &Statistic) -> bool {
        self.canonical().labels == other.canonical().labels
    }

    fn canonical(&self) -> Statistic {
        Statistic::from_labels(self.variable.clone(), self.labels.clone())
    }
}

/// A common function of two variables: `f(a) = g(b)` whenever `P(a, b) > 0`.
///
/// Both sides use the component numbering of `on_a`, so `on_b` is not
/// necessarily canonical on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonFunction {
    pub on_a: Statistic,
    pub on_b: Statistic,
    pub components: usize,
}

/// Outcome of the deterministic-correlation test.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCorrelation {
    pub holds: bool,
    /// Largest `|P(a,b|u) - P(a|u) P(b|u)|` over components `u`.
    pub residual: f64,
    pub common: CommonFunction,
}

/// Merges the support symbols of `of` whose conditional rows `P(wrt | of)`
/// agree after rounding to 12 decimals.
pub fn minimal_sufficient_statistic(
    p: &JointPmf,
    of: &str,
    wrt: &VariableGroup,
) -> Result<Statistic> {
    if wrt.names().iter().any(|n| n == of) {
        return Err(Error::OverlappingGroups(of.to_string()));
    }
    let card = p.card_of(of)?;
    let rows: Vec<Vec<f64>> = if wrt.is_empty() {
        p.marginal_of(of)?.into_iter().map(|q| vec![q]).collect()
    } else {
        p.joint_matrix(&VariableGroup::from(of), wrt)?
    };
    let scale = 10f64.powi(ROW_DIGITS);
    let mut keys: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut labels = vec![None; card];
    for (sym, row) in rows.iter().enumerate() {
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            continue;
        }
        let key: Vec<i64> = if wrt.is_empty() {
            Vec::new()
        } else {
            row.iter().map(|&v| (v / mass * scale).round() as i64).collect()
        };
        let next = keys.len();
        labels[sym] = Some(*keys.entry(key).or_insert(next));
    }
    if keys.is_empty() {
        return Err(Error::EmptySupport(of.to_string()));
    }
    Ok(Statistic::from_labels(of, labels))
}

/// Connected components of the bipartite support graph of `(a, b)`.
pub fn maximal_common_function(p: &JointPmf, a: &str, b: &str) -> Result<CommonFunction> {
    if a == b {
        return Err(Error::OverlappingGroups(a.to_string()));
    }
    let m = p.joint_matrix(&VariableGroup::from(a), &VariableGroup::from(b))?;
    let na = m.len();
    let nb = m.first().map_or(0, Vec::len);

    let mut dsu = DisjointSets::new(na + nb);
    for (i, row) in m.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            if q > 0.0 {
                dsu.union(i, na + j);
            }
        }
    }
    let a_support: Vec<bool> = m.iter().map(|r| r.iter().any(|&q| q > 0.0)).collect();
    let b_support: Vec<bool> = (0..nb).map(|j| m.iter().any(|r| r[j] > 0.0)).collect();
    if !a_support.iter().any(|&s| s) {
        return Err(Error::EmptySupport(a.to_string()));
    }

    let mut comp_of_root = BTreeMap::new();
    let mut la = vec![None; na];
    for i in 0..na {
        if a_support[i] {
            let r = dsu.find(i);
            let next = comp_of_root.len();
            la[i] = Some(*comp_of_root.entry(r).or_insert(next));
        }
    }
    let lb: Vec<Option<usize>> = (0..nb)
        .map(|j| {
            if b_support[j] {
                comp_of_root.get(&dsu.find(na + j)).copied()
            } else {
                None
            }
        })
        .collect();
    let components = comp_of_root.len();
    Ok(CommonFunction {
        on_a: Statistic::from_labels(a, la),
        on_b: Statistic {
            variable: b.to_string(),
            labels: lb,
            classes: components,
        },
        components,
    })
}

/// Checks whether `a` and `b` are conditionally independent given their
/// maximal common function.
pub fn is_deterministically_correlated(
    p: &JointPmf,
    a: &str,
    b: &str,
    ci_tol: f64,
) -> Result<DetCorrelation> {
    let common = maximal_common_function(p, a, b)?;
    let m = p.joint_matrix(&VariableGroup::from(a), &VariableGroup::from(b))?;
    let classes_a = common.on_a.classes();
    let classes_b = common.on_b.classes();

    let mut residual: f64 = 0.0;
    for (ya, zb) in classes_a.iter().zip(&classes_b) {
        let pu: f64 = ya.iter().map(|&y| m[y].iter().sum::<f64>()).sum();
        if pu <= 0.0 {
            continue;
        }
        for &y in ya {
            let py = m[y].iter().sum::<f64>() / pu;
            for &z in zb {
                let pz = m.iter().map(|r| r[z]).sum::<f64>() / pu;
                residual = residual.max((m[y][z] / pu - py * pz).abs());
            }
        }
    }
    Ok(DetCorrelation {
        holds: residual <= ci_tol,
        residual,
        common,
    })
}

/// A pseudorandom channel from the common-function components to an
/// auxiliary alphabet of size `aux_card`. Deterministic in `seed`.
///
/// Rows are Dirichlet draws with a per-channel concentration spread over
/// `[0.05, 2]`, so samples range from near-deterministic to diffuse.
pub fn sample_feasible_aux(cf: &CommonFunction, aux_card: usize, seed: u64) -> AuxChannel {
    let aux_card = aux_card.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = 0.05f64 * 40f64.powf(rng.random::<f64>());
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    let rows = (0..cf.components)
        .map(|_| {
            let mut row: Vec<f64> = (0..aux_card).map(|_| gamma.sample(&mut rng)).collect();
            let sum: f64 = row.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                row.iter_mut().for_each(|w| *w /= sum);
            } else {
                let hot = rng.random_range(0..aux_card);
                row.iter_mut().enumerate().for_each(|(u, w)| *w = f64::from(u8::from(u == hot)));
            }
            row
        })
        .collect();
    AuxChannel::new(rows).expect("rows are on the simplex")
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins; any rule works since labels are canonicalized later
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
