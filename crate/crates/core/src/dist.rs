//! Dense joint probability tables over small named finite variables.
//!
//! Tables are stored row-major with the last variable varying fastest.
//! All information quantities are reported in bits.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::stats::Statistic;

/// Default tolerance on `|sum - 1|` when loading a table.
pub const DEFAULT_SUM_TOL: f64 = 1e-9;

/// Negative (conditional) mutual information above `-NUM_TOL` is rounding noise.
pub const NUM_TOL: f64 = 1e-12;

/// `-Σ p log2 p` over the given masses, skipping zeros.
pub fn entropy_of_masses<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    let h: f64 = masses
        .into_iter()
        .filter(|&m| m > 0.0)
        .map(|m| -m * m.log2())
        .sum();
    // an all-zero-but-one table yields -0.0
    h.max(0.0)
}

/// A set of variable names, used to select the arguments of H(.) and I(. ; . | .).
///
/// Names are kept sorted and deduplicated; the order in which a group is
/// resolved against a table is always the table's own variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VariableGroup(Vec<String>);

impl VariableGroup {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        VariableGroup(set.into_iter().collect())
    }

    pub fn empty() -> Self {
        VariableGroup(Vec::new())
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &VariableGroup) -> VariableGroup {
        VariableGroup::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    fn first_shared(&self, other: &VariableGroup) -> Option<&String> {
        self.0.iter().find(|n| other.0.contains(n))
    }
}

impl From<&str> for VariableGroup {
    fn from(name: &str) -> Self {
        VariableGroup::new([name])
    }
}

impl<const N: usize> From<[&str; N]> for VariableGroup {
    fn from(names: [&str; N]) -> Self {
        VariableGroup::new(names)
    }
}

impl From<&[&str]> for VariableGroup {
    fn from(names: &[&str]) -> Self {
        VariableGroup::new(names.iter().copied())
    }
}

/// A validated joint pmf over an ordered tuple of named finite variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    variables: Vec<String>,
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// Validates and wraps a raw table. No renormalization is performed.
    pub fn new<S: Into<String>>(
        probs: Vec<f64>,
        names: impl IntoIterator<Item = S>,
        cards: Vec<usize>,
        sum_tol: f64,
    ) -> Result<Self> {
        let variables: Vec<String> = names.into_iter().map(Into::into).collect();
        if variables.len() != cards.len() {
            return Err(Error::ShapeMismatch {
                expected: cards.len(),
                got: variables.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        if cards.contains(&0) {
            return Err(Error::InvalidParameter("cardinalities must be positive".into()));
        }
        let expected = cards
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::InvalidParameter("table size overflows".into()))?;
        if probs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        for (index, &value) in probs.iter().enumerate() {
            if value.is_nan() || value.is_infinite() {
                return Err(Error::NonFiniteEntry { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > sum_tol {
            return Err(Error::SumOutOfTolerance { sum, tol: sum_tol });
        }
        Ok(JointPmf {
            variables,
            cards,
            probs,
        })
    }

    /// Builds a table from a function of the multi-index. Intended for
    /// hand-constructed sources; still validated.
    pub fn from_fn<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        cards: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let total: usize = cards.iter().product();
        let mut probs = Vec::with_capacity(total);
        let mut digits = vec![0usize; cards.len()];
        for _ in 0..total {
            probs.push(f(&digits));
            increment(&mut digits, &cards);
        }
        JointPmf::new(probs, names, cards, DEFAULT_SUM_TOL)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn card_of(&self, name: &str) -> Result<usize> {
        Ok(self.cards[self.index_of(name)?])
    }

    /// Names of the three terminal variables `(X, Y, Z)`, by position.
    pub fn terminals(&self) -> Result<[&str; 3]> {
        match self.variables.as_slice() {
            [x, y, z] => Ok([x.as_str(), y.as_str(), z.as_str()]),
            _ => Err(Error::InvalidParameter(format!(
                "expected three variables (X, Y, Z), found {}",
                self.variables.len()
            ))),
        }
    }

    /// `base`, primed until it does not clash with an existing variable.
    pub fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.variables.contains(&name) {
            name.push('\'');
        }
        name
    }

    /// Positions of the group's variables, in table order.
    fn resolve(&self, g: &VariableGroup) -> Result<Vec<usize>> {
        let mut idx = g
            .names()
            .iter()
            .map(|n| self.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        Ok(idx)
    }

    /// Marginal table over the given variable positions (sorted ascending).
    fn marginal_probs(&self, keep: &[usize]) -> Vec<f64> {
        let out_cards: Vec<usize> = keep.iter().map(|&i| self.cards[i]).collect();
        let out_len: usize = out_cards.iter().product();
        // stride of each kept variable in the output table
        let mut out_stride = vec![0usize; self.cards.len()];
        let mut s = 1;
        for (k, &i) in keep.iter().enumerate().rev() {
            out_stride[i] = s;
            s *= out_cards[k];
        }
        let mut out = vec![0.0; out_len];
        let mut digits = vec![0usize; self.cards.len()];
        for &p in &self.probs {
            let j: usize = digits.iter().zip(&out_stride).map(|(d, s)| d * s).sum();
            out[j] += p;
            increment(&mut digits, &self.cards);
        }
        out
    }

    /// Sums out every variable not in `g`. Variable order is preserved.
    pub fn marginal(&self, g: &VariableGroup) -> Result<JointPmf> {
        if g.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let keep = self.resolve(g)?;
        Ok(JointPmf {
            variables: keep.iter().map(|&i| self.variables[i].clone()).collect(),
            cards: keep.iter().map(|&i| self.cards[i]).collect(),
            probs: self.marginal_probs(&keep),
        })
    }

    /// Joint table `P(a, b)` as a matrix: rows index the configurations of
    /// `a`, columns those of `b` (each mixed-radix in table order).
    pub fn joint_matrix(&self, a: &VariableGroup, b: &VariableGroup) -> Result<Vec<Vec<f64>>> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if let Some(n) = a.first_shared(b) {
            return Err(Error::OverlappingGroups(n.clone()));
        }
        let ai = self.resolve(a)?;
        let bi = self.resolve(b)?;
        let strides = |pos: &[usize]| {
            let mut st = vec![0usize; self.cards.len()];
            let mut s = 1;
            for &i in pos.iter().rev() {
                st[i] = s;
                s *= self.cards[i];
            }
            (st, s)
        };
        let (sa, na) = strides(&ai);
        let (sb, nb) = strides(&bi);
        let mut m = vec![vec![0.0; nb]; na];
        let mut digits = vec![0usize; self.cards.len()];
        for &p in &self.probs {
            let r: usize = digits.iter().zip(&sa).map(|(d, s)| d * s).sum();
            let c: usize = digits.iter().zip(&sb).map(|(d, s)| d * s).sum();
            m[r][c] += p;
            increment(&mut digits, &self.cards);
        }
        Ok(m)
    }

    /// Single-variable marginal by name.
    pub fn marginal_of(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.index_of(name)?;
        Ok(self.marginal_probs(&[i]))
    }

    /// Symbols of `name` with positive probability, ascending.
    pub fn support(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self
            .marginal_of(name)?
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, _)| s)
            .collect())
    }

    /// H(g) in bits.
    pub fn entropy(&self, g: &VariableGroup) -> Result<f64> {
        if g.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let keep = self.resolve(g)?;
        Ok(entropy_of_masses(self.marginal_probs(&keep)))
    }

    /// Entropy that treats the empty group as a point mass (H = 0).
    fn entropy_or_zero(&self, g: &VariableGroup) -> Result<f64> {
        if g.is_empty() {
            Ok(0.0)
        } else {
            self.entropy(g)
        }
    }

    /// H(a | c) computed directly as `-Σ p(a,c) log2 p(a|c)`.
    pub fn cond_entropy(&self, a: &VariableGroup, c: &VariableGroup) -> Result<f64> {
        if a.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if let Some(n) = a.first_shared(c) {
            return Err(Error::OverlappingGroups(n.clone()));
        }
        if c.is_empty() {
            return self.entropy(a);
        }
        let keep = self.resolve(&a.union(c))?;
        let cond_pos = self.resolve(c)?;
        let joint = self.marginal_probs(&keep);
        let cond = self.marginal_probs(&cond_pos);

        let kept_cards: Vec<usize> = keep.iter().map(|&i| self.cards[i]).collect();
        let mut cond_stride = vec![0usize; keep.len()];
        let mut s = 1;
        for (k, &i) in keep.iter().enumerate().rev() {
            if cond_pos.contains(&i) {
                cond_stride[k] = s;
                s *= self.cards[i];
            }
        }
        let mut digits = vec![0usize; keep.len()];
        let mut h = 0.0;
        for &p in &joint {
            if p > 0.0 {
                let j: usize = digits.iter().zip(&cond_stride).map(|(d, s)| d * s).sum();
                h -= p * (p / cond[j]).log2();
            }
            increment(&mut digits, &kept_cards);
        }
        Ok(h.max(0.0))
    }

    /// I(a ; b | c) in bits; `c` may be empty. Rounding negatives are clamped to 0.
    pub fn cond_mutual_info(
        &self,
        a: &VariableGroup,
        b: &VariableGroup,
        c: &VariableGroup,
    ) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyGroup);
        }
        for (x, y) in [(a, b), (a, c), (b, c)] {
            if let Some(n) = x.first_shared(y) {
                return Err(Error::OverlappingGroups(n.clone()));
            }
        }
        let ac = a.union(c);
        let bc = b.union(c);
        let abc = ac.union(b);
        let v = (self.entropy(&ac)? + self.entropy(&bc)?)
            - self.entropy(&abc)?
            - self.entropy_or_zero(c)?;
        debug_assert!(v >= -1e3 * NUM_TOL, "conditional mutual information {v} < 0");
        Ok(v.max(0.0))
    }

    /// I(a ; b).
    pub fn mutual_info(&self, a: &VariableGroup, b: &VariableGroup) -> Result<f64> {
        self.cond_mutual_info(a, b, &VariableGroup::empty())
    }

    /// Appends `new_name = s(of)` as a new last variable.
    pub fn attach_statistic(&self, s: &Statistic, of: &str, new_name: &str) -> Result<JointPmf> {
        let card = self.card_of(of)?;
        if s.labels().len() != card {
            return Err(Error::ShapeMismatch {
                expected: card,
                got: s.labels().len(),
            });
        }
        let support = self.support(of)?;
        for &sym in &support {
            if s.label(sym).is_none() {
                return Err(Error::LabelMissing {
                    variable: of.to_string(),
                    symbol: sym,
                });
            }
        }
        let classes = s.num_classes().max(1);
        let rows: Vec<Vec<f64>> = (0..card)
            .map(|sym| {
                let mut row = vec![0.0; classes];
                // zero-probability symbols carry no label; any column works
                row[s.label(sym).unwrap_or(0)] = 1.0;
                row
            })
            .collect();
        self.attach_conditional(of, &rows, new_name)
    }

    /// Appends a new last variable drawn from `rows[of-symbol]`, a
    /// conditional pmf indexed by the symbol of `of`.
    pub fn attach_conditional(
        &self,
        of: &str,
        rows: &[Vec<f64>],
        new_name: &str,
    ) -> Result<JointPmf> {
        let of_idx = self.index_of(of)?;
        if self.variables.iter().any(|v| v == new_name) {
            return Err(Error::DuplicateVariable(new_name.to_string()));
        }
        let card = self.cards[of_idx];
        if rows.len() != card {
            return Err(Error::ShapeMismatch {
                expected: card,
                got: rows.len(),
            });
        }
        let new_card = rows.first().map_or(0, Vec::len);
        if new_card == 0 || rows.iter().any(|r| r.len() != new_card) {
            return Err(Error::InvalidParameter("conditional rows must share a positive width".into()));
        }
        let mut probs = Vec::with_capacity(self.probs.len() * new_card);
        let mut digits = vec![0usize; self.cards.len()];
        for &p in &self.probs {
            let row = &rows[digits[of_idx]];
            probs.extend(row.iter().map(|&w| p * w));
            increment(&mut digits, &self.cards);
        }
        let mut variables = self.variables.clone();
        variables.push(new_name.to_string());
        let mut cards = self.cards.clone();
        cards.push(new_card);
        Ok(JointPmf {
            variables,
            cards,
            probs,
        })
    }
}

/// Advances a row-major multi-index (last digit fastest); wraps to zero.
pub(crate) fn increment(digits: &mut [usize], cards: &[usize]) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < cards[k] {
            return;
        }
        digits[k] = 0;
    }
}
