//! Maximization of I(U ; X) over auxiliary variables U.
//!
//! Under the double Markov constraints `U -> Y -> XZ` and `U -> Z -> XY`,
//! the conditional law of U given Y is (on the support) a function of y
//! alone and, through the second chain, of z alone. It is therefore
//! constant on the connected components of the support graph of (Y, Z), so
//! every feasible U is a channel `w(u | c)` from the maximal common function
//! `c`. Data processing along `U -> C -> X` caps I(U ; X) at I(C ; X), which
//! `U = C` attains. [`dominance_oracle`] and [`double_markov_residual`] check
//! this characterization independently on the full joint table.
//!
//! The stricter constraint set that additionally asks for `Y -> U -> Z` is
//! searched numerically by [`max_aux_info_thm3`].

use crate::dist::{JointPmf, VariableGroup};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Exec};
use crate::stats::{maximal_common_function, sample_feasible_aux, CommonFunction, Statistic};

/// Default feasibility tolerance on I(Y ; Z | U).
pub const DEFAULT_FEAS_TOL: f64 = 1e-7;
/// Default number of solver restarts.
pub const DEFAULT_RESTARTS: usize = 64;
/// Default base seed.
pub const DEFAULT_SEED: u64 = 42;

const PENALTY_SCHEDULE: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
const MIN_IMPROVEMENT: f64 = 1e-12;
const STEP_FRACTIONS: [f64; 6] = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];
const MAX_SWEEPS: usize = 500;
const SIMPLEX_TOL: f64 = 1e-12;

/// A conditional pmf `w(u | c)` from common-function components to an
/// auxiliary alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxChannel {
    rows: Vec<Vec<f64>>,
}

impl AuxChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 {
            return Err(Error::InvalidParameter("channel needs at least one row and column".into()));
        }
        for r in &rows {
            if r.len() != width {
                return Err(Error::InvalidParameter("ragged channel rows".into()));
            }
            if r.iter().any(|&w| w.is_nan() || w < 0.0) || (r.iter().sum::<f64>() - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidParameter("channel row is not on the simplex".into()));
            }
        }
        Ok(AuxChannel { rows })
    }

    /// `U = C`.
    pub fn identity(components: usize) -> Self {
        AuxChannel {
            rows: (0..components)
                .map(|c| (0..components).map(|u| f64::from(u8::from(u == c))).collect())
                .collect(),
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn components(&self) -> usize {
        self.rows.len()
    }

    pub fn aux_card(&self) -> usize {
        self.rows[0].len()
    }

    /// Appends `new_name ~ w(. | labels(of))` to `p`. Symbols of `of` without
    /// a label have zero probability and get an arbitrary row.
    pub fn augment(&self, p: &JointPmf, of: &str, labels: &Statistic, new_name: &str) -> Result<JointPmf> {
        if labels.num_classes() > self.components() {
            return Err(Error::InvalidParameter(format!(
                "channel has {} rows but the statistic has {} classes",
                self.components(),
                labels.num_classes()
            )));
        }
        let rows: Vec<Vec<f64>> = labels
            .labels()
            .iter()
            .map(|l| self.rows[l.unwrap_or(0)].clone())
            .collect();
        p.attach_conditional(of, &rows, new_name)
    }
}

/// Options for [`max_aux_info_thm3`].
#[derive(Debug, Clone, Copy)]
pub struct Thm3Options {
    /// Auxiliary alphabet size; defaults to the number of components.
    pub aux_card: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub feas_tol: f64,
    pub exec: Exec,
}

impl Default for Thm3Options {
    fn default() -> Self {
        Thm3Options {
            aux_card: None,
            restarts: DEFAULT_RESTARTS,
            seed: DEFAULT_SEED,
            feas_tol: DEFAULT_FEAS_TOL,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    /// I(U ; X) of the reported channel, in bits.
    pub value: f64,
    pub channel: AuxChannel,
    /// I(Y ; Z | U) of the reported channel.
    pub residual: f64,
    pub restarts: usize,
    pub converged: bool,
    pub seed: u64,
    pub aux_card: usize,
    /// Restart that produced the reported channel.
    pub best_restart: usize,
    /// Residuals of the accepted penalty-stage iterates of that restart.
    pub residual_trace: Vec<f64>,
}

/// Maximum of I(U ; X) under the double Markov constraints, with the
/// maximizing statistic (the Y-side maximal common function).
pub fn max_aux_info_outer(p: &JointPmf) -> Result<(f64, Statistic)> {
    let [x, y, z] = p.terminals()?;
    let cf = maximal_common_function(p, y, z)?;
    let u = p.fresh_name("U");
    let q = p.attach_statistic(&cf.on_a, y, &u)?;
    let value = q.mutual_info(&VariableGroup::from(u.as_str()), &VariableGroup::from(x))?;
    Ok((value, cf.on_a))
}

/// max(I(U ; X,Z | Y), I(U ; X,Y | Z)) on a table that already contains `u`.
/// Zero exactly when both Markov chains hold.
pub fn double_markov_residual(q: &JointPmf, u: &str, x: &str, y: &str, z: &str) -> Result<f64> {
    let ug = VariableGroup::from(u);
    let a = q.cond_mutual_info(&ug, &[x, z].into(), &y.into())?;
    let b = q.cond_mutual_info(&ug, &[x, y].into(), &z.into())?;
    Ok(a.max(b))
}

/// Largest I(U ; X) over `trials` sampled double-Markov channels, with
/// auxiliary cardinalities cycling through `1..=components + 2`. Each value
/// is computed on the full augmented table.
pub fn dominance_oracle(p: &JointPmf, trials: usize, seed: u64) -> Result<f64> {
    let [x, y, z] = p.terminals()?;
    let cf = maximal_common_function(p, y, z)?;
    let u = p.fresh_name("U");
    let values = Exec::default().map_indexed(trials, |t| -> Result<f64> {
        let card = 1 + t % (cf.components + 2);
        let ch = sample_feasible_aux(&cf, card, derive_seed(seed, t as u64));
        let q = ch.augment(p, y, &cf.on_a, &u)?;
        q.mutual_info(&VariableGroup::from(u.as_str()), &VariableGroup::from(x))
    });
    values
        .into_iter()
        .try_fold(0.0f64, |best, v| Ok(best.max(v?)))
}

/// Searches channels `w(u | c)` on the common-function components for the
/// largest I(U ; X) subject to I(Y ; Z | U) <= `feas_tol`.
///
/// Each restart starts from a seeded random channel and runs coordinate
/// ascent on `I(U;X) - lambda * I(Y;Z|U)` for each penalty weight in turn,
/// moving mass between two entries of one row at a time. A stage result is
/// accepted only if its residual does not exceed the previously accepted one.
pub fn max_aux_info_thm3(p: &JointPmf, opts: &Thm3Options) -> Result<SolverReport> {
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    if opts.aux_card == Some(0) {
        return Err(Error::InvalidParameter("aux_card must be at least 1".into()));
    }
    let problem = Problem::new(p)?;
    let aux_card = opts.aux_card.unwrap_or(problem.cf.components);

    let outcomes = opts.exec.map_indexed(opts.restarts, |r| {
        let start = sample_feasible_aux(&problem.cf, aux_card, derive_seed(opts.seed, r as u64));
        problem.run_restart(start.rows, opts.feas_tol)
    });

    let feasible = |o: &RestartOutcome| o.residual <= opts.feas_tol;
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            let by_feasibility = feasible(b).cmp(&feasible(a));
            let by_quality = if feasible(a) {
                b.value
                    .total_cmp(&a.value)
                    .then(a.residual.total_cmp(&b.residual))
            } else {
                a.residual
                    .total_cmp(&b.residual)
                    .then(b.value.total_cmp(&a.value))
            };
            by_feasibility.then(by_quality).then(i.cmp(j))
        })
        .expect("at least one restart");

    Ok(SolverReport {
        value: best.value,
        channel: AuxChannel::new(best.channel.clone())?,
        residual: best.residual,
        restarts: opts.restarts,
        converged: feasible(best),
        seed: opts.seed,
        aux_card,
        best_restart,
        residual_trace: best.trace.clone(),
    })
}

struct RestartOutcome {
    value: f64,
    residual: f64,
    channel: Vec<Vec<f64>>,
    trace: Vec<f64>,
}

type Terms = (f64, f64);

/// Component-level sufficient data: everything the objective needs.
struct Problem {
    cf: CommonFunction,
    pc: Vec<f64>,
    pcx: Vec<Vec<f64>>,
    pcz: Vec<Vec<f64>>,
    hx: f64,
    hz_given_y: f64,
}

fn eta(t: f64) -> f64 {
    if t > 0.0 {
        t * t.log2()
    } else {
        0.0
    }
}

impl Problem {
    fn new(p: &JointPmf) -> Result<Self> {
        let [x, y, z] = p.terminals()?;
        let cf = maximal_common_function(p, y, z)?;
        let yx = p.joint_matrix(&y.into(), &x.into())?;
        let yz = p.joint_matrix(&y.into(), &z.into())?;
        let comps = cf.components;
        let mut pcx = vec![vec![0.0; yx[0].len()]; comps];
        let mut pcz = vec![vec![0.0; yz[0].len()]; comps];
        for (sym, label) in cf.on_a.labels().iter().enumerate() {
            if let Some(c) = label {
                pcx[*c].iter_mut().zip(&yx[sym]).for_each(|(a, b)| *a += b);
                pcz[*c].iter_mut().zip(&yz[sym]).for_each(|(a, b)| *a += b);
            }
        }
        let pc = pcx.iter().map(|r| r.iter().sum()).collect();
        Ok(Problem {
            pc,
            pcx,
            pcz,
            hx: p.entropy(&x.into())?,
            hz_given_y: p.cond_entropy(&z.into(), &y.into())?,
            cf,
        })
    }

    /// `(sum_x eta(P(u,x)) - eta(P(u)), sum_z eta(P(u,z)) - eta(P(u)))` for
    /// one auxiliary symbol, given its column `w(u | .)`.
    fn column_terms(&self, col: impl Fn(usize) -> f64) -> Terms {
        let comps = self.pc.len();
        let pu: f64 = (0..comps).map(|c| self.pc[c] * col(c)).sum();
        let nx = self.pcx[0].len();
        let nz = self.pcz[0].len();
        let ax: f64 = (0..nx)
            .map(|i| eta((0..comps).map(|c| self.pcx[c][i] * col(c)).sum()))
            .sum();
        let az: f64 = (0..nz)
            .map(|i| eta((0..comps).map(|c| self.pcz[c][i] * col(c)).sum()))
            .sum();
        (ax - eta(pu), az - eta(pu))
    }

    /// (I(U;X), I(Y;Z|U)) from per-column terms.
    fn value_and_residual(&self, terms: &[(f64, f64)]) -> (f64, f64) {
        let a: f64 = terms.iter().map(|t| t.0).sum();
        let b: f64 = terms.iter().map(|t| t.1).sum();
        // I(Y;Z|U) = H(Z|U) - H(Z|Y) because U depends on (Y,Z) only through Y
        ((self.hx + a).max(0.0), (-b - self.hz_given_y).max(0.0))
    }

    fn all_terms(&self, w: &[Vec<f64>]) -> Vec<(f64, f64)> {
        let k = w[0].len();
        (0..k).map(|u| self.column_terms(|c| w[c][u])).collect()
    }

    fn ascend(&self, w: &mut [Vec<f64>], lambda: f64) {
        let comps = w.len();
        let k = w[0].len();
        let mut terms = self.all_terms(w);
        let score = |t: (f64, f64)| t.0 + lambda * t.1;

        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for c in 0..comps {
                for from in 0..k {
                    for to in 0..k {
                        if from == to || w[c][from] <= 0.0 {
                            continue;
                        }
                        let before = score(terms[from]) + score(terms[to]);
                        // (gain, step fraction, new column terms for `from` and `to`)
                        let mut best: Option<(f64, f64, Terms, Terms)> = None;
                        for frac in STEP_FRACTIONS {
                            let (new_from, new_to) = if frac == 1.0 {
                                (0.0, w[c][to] + w[c][from])
                            } else {
                                let t = frac * w[c][from];
                                (w[c][from] - t, w[c][to] + t)
                            };
                            let tf = self.column_terms(|cc| if cc == c { new_from } else { w[cc][from] });
                            let tt = self.column_terms(|cc| if cc == c { new_to } else { w[cc][to] });
                            let gain = score(tf) + score(tt) - before;
                            if gain >= MIN_IMPROVEMENT && best.is_none_or(|b| gain > b.0) {
                                best = Some((gain, frac, tf, tt));
                            }
                        }
                        if let Some((_, frac, tf, tt)) = best {
                            if frac == 1.0 {
                                w[c][to] += w[c][from];
                                w[c][from] = 0.0;
                            } else {
                                let t = frac * w[c][from];
                                w[c][from] -= t;
                                w[c][to] += t;
                            }
                            terms[from] = tf;
                            terms[to] = tt;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                break;
            }
        }
    }

    fn run_restart(&self, w: Vec<Vec<f64>>, feas_tol: f64) -> RestartOutcome {
        // (value, residual, channel) of accepted stage iterates
        let mut accepted: Vec<(f64, f64, Vec<Vec<f64>>)> = Vec::new();
        for lambda in PENALTY_SCHEDULE {
            let mut cand = accepted.last().map_or_else(|| w.clone(), |a| a.2.clone());
            self.ascend(&mut cand, lambda);
            let (value, residual) = self.value_and_residual(&self.all_terms(&cand));
            if accepted.last().is_none_or(|a| residual <= a.1) {
                accepted.push((value, residual, cand));
            }
        }
        let trace = accepted.iter().map(|a| a.1).collect();
        let best_feasible = accepted
            .iter()
            .enumerate()
            .filter(|(_, a)| a.1 <= feas_tol)
            .min_by(|(i, a), (j, b)| {
                b.0.total_cmp(&a.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(i.cmp(j))
            })
            .map(|(i, _)| i);
        let pick = best_feasible.unwrap_or(accepted.len() - 1);
        let (value, residual, channel) = accepted.swap_remove(pick);
        RestartOutcome {
            value,
            residual,
            channel,
            trace,
        }
    }
}
