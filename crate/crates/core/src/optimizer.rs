//! Minimizing metaconflict.
//!
//! For a fixed number of subsets the optimizer hill-climbs by moving one
//! evidence at a time. Whether a move of `e_q` from its home subset `χ_i` to
//! `χ_j` helps is decided by comparing two quotients:
//!
//! ```text
//! ρ_j = Σ_{A_k ∈ χ_j, A_k ∩ e_q^p = ∅} m(e_q^p)·m(A_k) / (1 - c_j)      (j ≠ i)
//! ρ_i = Δ / (1 - c_i*)                                                 (home)
//! ```
//!
//! where `Δ` is the conflict `e_q` adds to its home subset and `c_i*` is the
//! home conflict without it. The move lowers the metaconflict exactly when
//! `ρ_j < ρ_i`, and among several such moves the one maximizing
//! `(1 - ρ_k)/(1 - ρ_i)` lowers it most.
//!
//! Around the hill climb, [`solve`] schedules subset counts: it visits counts
//! in order of increasing domain conflict, drops smaller counts once a count
//! with more prior mass is visited, and drops any count whose domain conflict
//! alone exceeds the best metaconflict found so far.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::criterion::{
    evaluate, metaconflict_from_parts, Breakdown, DomainDistribution, Partition,
};
use crate::error::{Error, Result};
use crate::evidence::{CombinedState, Evidence};

/// A target quotient must undercut the home quotient by more than this.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-12;

// 1 - c below this counts as a fully conflicting subset.
const SATURATED: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub improvement_tolerance: f64,
    /// Maximum number of transfers per subset count; `10·n²` when unset.
    pub iteration_cap: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            improvement_tolerance: IMPROVEMENT_TOLERANCE,
            iteration_cap: None,
        }
    }
}

/// Members of one subset and their combined (unnormalized) masses.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetState {
    members: Vec<usize>,
    combined: CombinedState,
}

impl SubsetState {
    fn build(members: Vec<usize>, evidences: &[Evidence]) -> Result<Self> {
        let shape = evidences[members[0]].shape();
        let combined = CombinedState::of(shape, members.iter().map(|&q| &evidences[q]))?;
        Ok(SubsetState { members, combined })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn combined(&self) -> &CombinedState {
        &self.combined
    }

    pub fn conflict(&self) -> f64 {
        self.combined.conflict()
    }
}

/// Combined state of `subset` with evidence `q` left out, refolded from the
/// remaining members.
pub fn masses_without(
    subset: &SubsetState,
    q: usize,
    evidences: &[Evidence],
) -> Result<CombinedState> {
    if !subset.members.contains(&q) {
        return Err(Error::Domain(format!(
            "evidence {q} is not a member of the subset"
        )));
    }
    let shape = subset.combined.shape();
    CombinedState::of(
        shape,
        subset
            .members
            .iter()
            .filter(|&&p| p != q)
            .map(|&p| &evidences[p]),
    )
}

/// Quotients of one evidence against every subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferEvaluation {
    pub evidence: usize,
    pub home: usize,
    pub rho: Vec<f64>,
    /// Conflict the evidence adds to each subset; for the home subset,
    /// relative to the home subset without it.
    pub added_conflict: Vec<f64>,
    pub best_target: usize,
    /// `(1 - ρ_k)/(1 - ρ_i)`, or 1 when the best target is home.
    pub ratio: f64,
    pub favourable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transfer {
    pub evidence: usize,
    pub from: usize,
    pub to: usize,
    pub ratio: f64,
}

/// A carried-out move with closed-form predictions of the new conflicts next
/// to the values held by the updated subset states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedTransfer {
    pub evidence: usize,
    pub from: usize,
    pub to: usize,
    /// `c_i - Δ`.
    pub predicted_from_conflict: f64,
    /// `c_j + Σ m(e_q^p)·m(A_k)` over conflicting pairs.
    pub predicted_to_conflict: f64,
    pub from_conflict: f64,
    pub to_conflict: f64,
    pub mcf_before: f64,
    pub mcf_after: f64,
}

/// A partition of a corpus together with one [`SubsetState`] per subset.
#[derive(Debug, Clone)]
pub struct PartitionState<'a> {
    evidences: &'a [Evidence],
    dist: &'a DomainDistribution,
    partition: Partition,
    subsets: Vec<SubsetState>,
}

impl<'a> PartitionState<'a> {
    pub fn new(
        evidences: &'a [Evidence],
        dist: &'a DomainDistribution,
        partition: Partition,
    ) -> Result<Self> {
        if partition.len() != evidences.len() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} evidences, corpus has {}",
                partition.len(),
                evidences.len()
            )));
        }
        let subsets = partition
            .blocks()
            .into_iter()
            .map(|members| SubsetState::build(members, evidences))
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionState {
            evidences,
            dist,
            partition,
            subsets,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn into_partition(self) -> Partition {
        self.partition
    }

    pub fn subsets(&self) -> &[SubsetState] {
        &self.subsets
    }

    pub fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    pub fn conflicts(&self) -> Vec<f64> {
        self.subsets.iter().map(SubsetState::conflict).collect()
    }

    pub fn metaconflict(&self) -> f64 {
        let c0 = self.dist.domain_conflict(self.subset_count());
        metaconflict_from_parts(c0, &self.conflicts())
    }

    fn check_evidence(&self, q: usize) -> Result<()> {
        if q >= self.evidences.len() {
            return Err(Error::Domain(format!("no evidence with index {q}")));
        }
        Ok(())
    }

    /// Home quotient of `q` together with the conflict it adds at home.
    fn home_quotient(&self, q: usize) -> Result<(f64, f64)> {
        let home = &self.subsets[self.partition.subset_of(q)];
        let without = masses_without(home, q, self.evidences)?;
        let delta = without.added_conflict(&self.evidences[q])?;
        let keep = 1.0 - without.conflict();
        // The rest of the home subset is already impossible; leaving changes nothing.
        let rho = if keep <= SATURATED { 0.0 } else { delta / keep };
        Ok((rho, delta))
    }

    fn foreign_quotient(&self, q: usize, j: usize) -> Result<(f64, f64)> {
        let target = &self.subsets[j];
        let added = target.combined.added_conflict(&self.evidences[q])?;
        let keep = 1.0 - target.conflict();
        let rho = if keep <= SATURATED { 1.0 } else { added / keep };
        Ok((rho, added))
    }

    /// `ρ_j^q` for the evidence `q` and subset `j`.
    pub fn rho(&self, q: usize, j: usize) -> Result<f64> {
        self.check_evidence(q)?;
        if j >= self.subset_count() {
            return Err(Error::Domain(format!("no subset with index {j}")));
        }
        if j == self.partition.subset_of(q) {
            Ok(self.home_quotient(q)?.0)
        } else {
            Ok(self.foreign_quotient(q, j)?.0)
        }
    }

    pub fn evaluate(&self, q: usize, tolerance: f64) -> Result<TransferEvaluation> {
        self.check_evidence(q)?;
        let home = self.partition.subset_of(q);
        let mut rho = Vec::with_capacity(self.subset_count());
        let mut added_conflict = Vec::with_capacity(self.subset_count());
        for j in 0..self.subset_count() {
            let (r, added) = if j == home {
                self.home_quotient(q)?
            } else {
                self.foreign_quotient(q, j)?
            };
            rho.push(r);
            added_conflict.push(added);
        }
        let mut best_target = 0;
        for j in 1..rho.len() {
            if rho[j] < rho[best_target] {
                best_target = j;
            }
        }
        let favourable = best_target != home && rho[best_target] < rho[home] - tolerance;
        let ratio = if best_target == home {
            1.0
        } else if 1.0 - rho[home] <= 0.0 {
            f64::INFINITY
        } else {
            (1.0 - rho[best_target]) / (1.0 - rho[home])
        };
        Ok(TransferEvaluation {
            evidence: q,
            home,
            rho,
            added_conflict,
            best_target,
            ratio,
            favourable,
        })
    }

    /// Evaluations for every evidence outside a singleton subset, by index.
    pub fn evaluate_all(&self, tolerance: f64) -> Result<Vec<TransferEvaluation>> {
        (0..self.evidences.len())
            .filter(|&q| self.subsets[self.partition.subset_of(q)].members.len() > 1)
            .map(|q| self.evaluate(q, tolerance))
            .collect()
    }

    /// Moves `q` into subset `to`; `to == subset_count()` opens a new subset.
    pub fn apply(&mut self, q: usize, to: usize) -> Result<AppliedTransfer> {
        self.check_evidence(q)?;
        let from = self.partition.subset_of(q);
        if from == to || to > self.subset_count() {
            return Err(Error::Domain(format!(
                "cannot move evidence {q} to subset {to}"
            )));
        }
        if self.subsets[from].members.len() < 2 {
            return Err(Error::Domain(format!(
                "evidence {q} is alone in subset {from} and cannot leave it"
            )));
        }
        let mcf_before = self.metaconflict();
        let evidence = &self.evidences[q];

        let without = masses_without(&self.subsets[from], q, self.evidences)?;
        let delta = without.added_conflict(evidence)?;
        let predicted_from_conflict = self.subsets[from].conflict() - delta;

        let (target_state, target_conflict) = match self.subsets.get(to) {
            Some(s) => (s.combined.clone(), s.conflict()),
            None => (CombinedState::unit(evidence.shape()), 0.0),
        };
        let predicted_to_conflict = target_conflict + target_state.added_conflict(evidence)?;
        let to_combined = target_state.combine(evidence)?;

        self.subsets[from].members.retain(|&p| p != q);
        self.subsets[from].combined = without;
        if to == self.subsets.len() {
            self.subsets.push(SubsetState {
                members: vec![q],
                combined: to_combined,
            });
        } else {
            let target = &mut self.subsets[to];
            let at = target.members.partition_point(|&p| p < q);
            target.members.insert(at, q);
            target.combined = to_combined;
        }
        self.partition.move_to(q, to);

        Ok(AppliedTransfer {
            evidence: q,
            from,
            to,
            predicted_from_conflict,
            predicted_to_conflict,
            from_conflict: self.subsets[from].conflict(),
            to_conflict: self.subsets[to].conflict(),
            mcf_before,
            mcf_after: self.metaconflict(),
        })
    }
}

/// `ρ_j^q` in the given partition state.
pub fn rho(q: usize, j: usize, state: &PartitionState<'_>) -> Result<f64> {
    state.rho(q, j)
}

/// Picks the favourable evaluation with the largest selection ratio; ties go
/// to the lowest evidence index.
pub fn select_transfer(evaluations: &[TransferEvaluation]) -> Option<Transfer> {
    let mut best: Option<&TransferEvaluation> = None;
    for e in evaluations.iter().filter(|e| e.favourable) {
        if best.is_none_or(|b| e.ratio > b.ratio) {
            best = Some(e);
        }
    }
    best.map(|e| Transfer {
        evidence: e.evidence,
        from: e.home,
        to: e.best_target,
        ratio: e.ratio,
    })
}

/// Most favourable single-evidence move, if any move lowers the metaconflict.
pub fn best_transfer(state: &PartitionState<'_>, tolerance: f64) -> Result<Option<Transfer>> {
    Ok(select_transfer(&state.evaluate_all(tolerance)?))
}

/// One evidence split off into a new subset while building a starting partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    /// Home quotients of the candidates, as `(evidence, ρ)`.
    pub home_rho: Vec<(usize, f64)>,
    pub evidence: usize,
    pub from: usize,
    pub to: usize,
    pub mcf: f64,
}

/// Starting partition for `r` subsets.
///
/// Starts from `prev` (or from everything in one subset) and, until there are
/// `r` subsets, moves the evidence with the largest home quotient into a new
/// subset, updating the conflicts after each move.
pub fn initial_partition(
    prev: Option<&Partition>,
    r: usize,
    evidences: &[Evidence],
    dist: &DomainDistribution,
) -> Result<(Partition, Vec<Extraction>)> {
    let n = evidences.len();
    if r == 0 || r > n {
        return Err(Error::Infeasible {
            subsets: r,
            evidences: n,
        });
    }
    let start = match prev {
        Some(p) if p.subset_count() > r => {
            return Err(Error::Domain(format!(
                "previous partition has {} subsets, more than {r}",
                p.subset_count()
            )))
        }
        Some(p) => p.clone(),
        None => Partition::single(n)?,
    };
    let mut state = PartitionState::new(evidences, dist, start)?;
    let mut extractions = Vec::new();
    while state.subset_count() < r {
        let mut home_rho = Vec::new();
        for q in 0..n {
            if state.subsets[state.partition.subset_of(q)].members.len() > 1 {
                home_rho.push((q, state.home_quotient(q)?.0));
            }
        }
        let mut pick = home_rho[0];
        for &(q, rho) in &home_rho[1..] {
            if rho > pick.1 {
                pick = (q, rho);
            }
        }
        let to = state.subset_count();
        let applied = state.apply(pick.0, to)?;
        extractions.push(Extraction {
            home_rho,
            evidence: pick.0,
            from: applied.from,
            to,
            mcf: applied.mcf_after,
        });
    }
    Ok((state.into_partition(), extractions))
}

/// One round of quotient evaluation and the move it led to.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPass {
    pub evaluations: Vec<TransferEvaluation>,
    pub selected: Option<Transfer>,
    pub applied: Option<AppliedTransfer>,
    pub mcf: f64,
    pub conflicts: Vec<f64>,
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    pub partition: Partition,
    pub mcf: f64,
    pub conflicts: Vec<f64>,
    pub passes: Vec<TransferPass>,
    /// The iteration cap stopped the climb before a local optimum was certified.
    pub capped: bool,
}

impl LocalOutcome {
    pub fn transfers(&self) -> impl Iterator<Item = &AppliedTransfer> {
        self.passes.iter().filter_map(|p| p.applied.as_ref())
    }
}

/// Hill climbing over single-evidence moves between `r` subsets.
pub fn local_optimize(
    r: usize,
    evidences: &[Evidence],
    dist: &DomainDistribution,
    initial: Partition,
    options: &SolverOptions,
) -> Result<LocalOutcome> {
    if initial.subset_count() != r {
        return Err(Error::InvalidPartition(format!(
            "initial partition has {} subsets, expected {r}",
            initial.subset_count()
        )));
    }
    let n = evidences.len();
    let cap = options.iteration_cap.unwrap_or(10 * n * n);
    let mut state = PartitionState::new(evidences, dist, initial)?;
    let mut passes = Vec::new();
    let mut capped = false;
    if r > 1 {
        let mut moves = 0;
        loop {
            let evaluations = state.evaluate_all(options.improvement_tolerance)?;
            let selected = select_transfer(&evaluations);
            if selected.is_some() && moves == cap {
                capped = true;
            }
            let applied = match selected {
                Some(t) if !capped => {
                    moves += 1;
                    Some(state.apply(t.evidence, t.to)?)
                }
                _ => None,
            };
            let done = applied.is_none();
            passes.push(TransferPass {
                evaluations,
                selected,
                applied,
                mcf: state.metaconflict(),
                conflicts: state.conflicts(),
                assignment: state.partition.assignment().to_vec(),
            });
            if done {
                break;
            }
        }
    }
    Ok(LocalOutcome {
        mcf: state.metaconflict(),
        conflicts: state.conflicts(),
        partition: state.into_partition(),
        passes,
        capped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountConflict {
    pub r: usize,
    pub domain_conflict: f64,
}

/// One record per step of the schedule, in the order the steps happen.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "step")]
pub enum TraceRecord {
    /// Domain conflict for every candidate count.
    #[serde(rename = "1")]
    DomainConflicts { conflicts: Vec<CountConflict> },
    /// Candidate count with the least domain conflict.
    #[serde(rename = "2")]
    ChooseCount { r: usize, candidates: Vec<usize> },
    /// `r` marked visited; smaller counts dropped.
    #[serde(rename = "3")]
    Schedule {
        r: usize,
        visited: Vec<usize>,
        remaining: Vec<usize>,
        discarded: Vec<usize>,
        /// Dropped counts whose prior mass equals that of `r`.
        equal_mass_discards: Vec<usize>,
    },
    #[serde(rename = "4.1")]
    InitialPartition {
        r: usize,
        extractions: Vec<Extraction>,
        assignment: Vec<usize>,
        conflicts: Vec<f64>,
        mcf: f64,
    },
    #[serde(rename = "4.3")]
    Evaluate {
        r: usize,
        evaluations: Vec<TransferEvaluation>,
    },
    #[serde(rename = "4.4")]
    Select {
        r: usize,
        transfer: Option<Transfer>,
    },
    #[serde(rename = "4.5")]
    Update {
        r: usize,
        applied: Option<AppliedTransfer>,
        assignment: Vec<usize>,
        conflicts: Vec<f64>,
        mcf: f64,
        capped: bool,
    },
    /// Counts whose domain conflict exceeds the best metaconflict so far.
    #[serde(rename = "5")]
    Prune {
        r: usize,
        best_mcf: f64,
        removed: Vec<usize>,
        remaining: Vec<usize>,
    },
    #[serde(rename = "6")]
    Answer {
        r: usize,
        mcf: f64,
        visited: Vec<usize>,
        assignment: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub r: usize,
    pub partition: Partition,
    pub mcf: f64,
    pub capped: bool,
    pub transfers: Vec<AppliedTransfer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub partition: Partition,
    pub breakdown: Breakdown,
    pub per_count: Vec<CountResult>,
    pub trace: Vec<TraceRecord>,
}

impl Solution {
    pub fn subset_count(&self) -> usize {
        self.partition.subset_count()
    }

    pub fn mcf(&self) -> f64 {
        self.breakdown.metaconflict
    }
}

fn validate_inputs(evidences: &[Evidence], dist: &DomainDistribution) -> Result<()> {
    let Some(first) = evidences.first() else {
        return Err(Error::Domain("at least one evidence is required".into()));
    };
    if evidences.iter().any(|e| e.shape() != first.shape()) {
        return Err(Error::FrameMismatch);
    }
    dist.check_support(evidences.len())
}

fn optimize_count(
    r: usize,
    prev: Option<&Partition>,
    evidences: &[Evidence],
    dist: &DomainDistribution,
    options: &SolverOptions,
    trace: &mut Vec<TraceRecord>,
) -> Result<CountResult> {
    let (initial, extractions) = initial_partition(prev, r, evidences, dist)?;
    let start = PartitionState::new(evidences, dist, initial.clone())?;
    trace.push(TraceRecord::InitialPartition {
        r,
        extractions,
        assignment: initial.assignment().to_vec(),
        conflicts: start.conflicts(),
        mcf: start.metaconflict(),
    });
    let outcome = local_optimize(r, evidences, dist, initial, options)?;
    for pass in &outcome.passes {
        trace.push(TraceRecord::Evaluate {
            r,
            evaluations: pass.evaluations.clone(),
        });
        trace.push(TraceRecord::Select {
            r,
            transfer: pass.selected,
        });
        trace.push(TraceRecord::Update {
            r,
            applied: pass.applied.clone(),
            assignment: pass.assignment.clone(),
            conflicts: pass.conflicts.clone(),
            mcf: pass.mcf,
            capped: outcome.capped && pass.applied.is_none(),
        });
    }
    if outcome.passes.is_empty() {
        trace.push(TraceRecord::Update {
            r,
            applied: None,
            assignment: outcome.partition.assignment().to_vec(),
            conflicts: outcome.conflicts.clone(),
            mcf: outcome.mcf,
            capped: false,
        });
    }
    let transfers = outcome.transfers().cloned().collect();
    Ok(CountResult {
        r,
        mcf: outcome.mcf,
        capped: outcome.capped,
        partition: outcome.partition,
        transfers,
    })
}

fn answer(
    evidences: &[Evidence],
    dist: &DomainDistribution,
    per_count: Vec<CountResult>,
    mut trace: Vec<TraceRecord>,
) -> Result<Solution> {
    let mut best = &per_count[0];
    for c in &per_count[1..] {
        if c.mcf < best.mcf || (c.mcf == best.mcf && c.r < best.r) {
            best = c;
        }
    }
    let mut visited: Vec<usize> = per_count.iter().map(|c| c.r).collect();
    visited.sort_unstable();
    trace.push(TraceRecord::Answer {
        r: best.r,
        mcf: best.mcf,
        visited,
        assignment: best.partition.assignment().to_vec(),
    });
    let partition = best.partition.clone();
    let breakdown = evaluate(&partition, evidences, dist)?;
    Ok(Solution {
        partition,
        breakdown,
        per_count,
        trace,
    })
}

/// Searches subset counts and partitions for the least metaconflict.
///
/// Counts are visited in order of increasing domain conflict (smallest count
/// on ties). Visiting `r` drops every smaller count still pending, and after
/// each visit any count whose domain conflict exceeds the best metaconflict so
/// far is dropped too. Each count is optimized from the final partition of the
/// previous one.
pub fn solve(
    evidences: &[Evidence],
    dist: &DomainDistribution,
    options: &SolverOptions,
) -> Result<Solution> {
    validate_inputs(evidences, dist)?;
    let n = evidences.len();
    let mut remaining: BTreeSet<usize> = (1..=n).collect();
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut trace = vec![TraceRecord::DomainConflicts {
        conflicts: remaining
            .iter()
            .map(|&r| CountConflict {
                r,
                domain_conflict: dist.domain_conflict(r),
            })
            .collect(),
    }];
    let mut per_count: Vec<CountResult> = Vec::new();
    let mut best_mcf = f64::INFINITY;

    while !remaining.is_empty() {
        let candidates: Vec<usize> = remaining.iter().copied().collect();
        let mut r = candidates[0];
        for &c in &candidates[1..] {
            if dist.domain_conflict(c) < dist.domain_conflict(r) {
                r = c;
            }
        }
        trace.push(TraceRecord::ChooseCount { r, candidates });

        visited.insert(r);
        let discarded: Vec<usize> = remaining.range(..r).copied().collect();
        let equal_mass_discards = discarded
            .iter()
            .copied()
            .filter(|&j| dist.mass(j) == dist.mass(r))
            .collect();
        remaining.retain(|&j| j > r);
        trace.push(TraceRecord::Schedule {
            r,
            visited: visited.iter().copied().collect(),
            remaining: remaining.iter().copied().collect(),
            discarded,
            equal_mass_discards,
        });

        let prev = per_count.last().map(|c| &c.partition);
        let result = optimize_count(r, prev, evidences, dist, options, &mut trace)?;
        best_mcf = best_mcf.min(result.mcf);
        per_count.push(result);

        let removed: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&j| crate::criterion::domain_bound_excludes(dist, j, best_mcf))
            .collect();
        remaining.retain(|j| !removed.contains(j));
        trace.push(TraceRecord::Prune {
            r,
            best_mcf,
            removed,
            remaining: remaining.iter().copied().collect(),
        });
    }
    answer(evidences, dist, per_count, trace)
}

/// Optimizes a single, given subset count from the all-in-one starting point.
pub fn solve_fixed(
    evidences: &[Evidence],
    dist: &DomainDistribution,
    r: usize,
    options: &SolverOptions,
) -> Result<Solution> {
    validate_inputs(evidences, dist)?;
    let mut trace = Vec::new();
    let result = optimize_count(r, None, evidences, dist, options, &mut trace)?;
    answer(evidences, dist, vec![result], trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::Frame;

    fn twins() -> (Vec<Evidence>, DomainDistribution) {
        let f = Frame::with_event_count(["A", "B"], 2).unwrap();
        let a = f.focal(&["A"], &["E1", "E2"]).unwrap();
        let evs = vec![
            Evidence::simple_support("x", a, 0.5).unwrap(),
            Evidence::simple_support("y", a, 0.5).unwrap(),
        ];
        (evs, DomainDistribution::point(2).unwrap())
    }

    #[test]
    fn masses_without_requires_membership() {
        let (evs, _) = twins();
        let s = SubsetState::build(vec![0], &evs).unwrap();
        assert!(masses_without(&s, 1, &evs).is_err());
        let unit = masses_without(&s, 0, &evs).unwrap();
        assert_eq!(unit, CombinedState::unit(evs[0].shape()));
    }

    #[test]
    fn identical_compatible_evidences_do_not_move() {
        let (evs, d) = twins();
        let p = Partition::new(vec![0, 1], 2).unwrap();
        let state = PartitionState::new(&evs, &d, p).unwrap();
        assert_eq!(best_transfer(&state, IMPROVEMENT_TOLERANCE).unwrap(), None);
        // Both singletons: nothing is even evaluated.
        assert!(state
            .evaluate_all(IMPROVEMENT_TOLERANCE)
            .unwrap()
            .is_empty());
        assert_eq!(state.rho(0, 1).unwrap(), 0.0);
        assert_eq!(state.rho(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn initial_partition_bounds() {
        let (evs, d) = twins();
        assert!(matches!(
            initial_partition(None, 3, &evs, &d),
            Err(Error::Infeasible {
                subsets: 3,
                evidences: 2
            })
        ));
        let (p, ex) = initial_partition(None, 1, &evs, &d).unwrap();
        assert_eq!(p.subset_count(), 1);
        assert!(ex.is_empty());
        let (p, ex) = initial_partition(None, 2, &evs, &d).unwrap();
        assert_eq!(p.blocks(), vec![vec![1], vec![0]]);
        assert_eq!(ex.len(), 1);
    }

    #[test]
    fn single_count_returns_initial_unchanged() {
        let (evs, _) = twins();
        let d = DomainDistribution::point(1).unwrap();
        let out = local_optimize(
            1,
            &evs,
            &d,
            Partition::single(2).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(out.passes.is_empty());
        assert_eq!(out.mcf, 0.0);
    }

    #[test]
    fn wrong_initial_count_is_rejected() {
        let (evs, d) = twins();
        let r = local_optimize(
            2,
            &evs,
            &d,
            Partition::single(2).unwrap(),
            &SolverOptions::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn solve_rejects_empty_input() {
        let d = DomainDistribution::point(1).unwrap();
        assert!(solve(&[], &d, &SolverOptions::default()).is_err());
    }

    #[test]
    fn solve_rejects_support_beyond_evidence_count() {
        let (evs, _) = twins();
        let d = DomainDistribution::point(3).unwrap();
        assert!(matches!(
            solve(&evs, &d, &SolverOptions::default()),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn zero_cap_flags_the_outcome() {
        let f = Frame::with_event_count(["A", "B"], 1).unwrap();
        let a = f.focal(&["A"], &["E1"]).unwrap();
        let b = f.focal(&["B"], &["E1"]).unwrap();
        let evs = vec![
            Evidence::simple_support("a1", a, 0.9).unwrap(),
            Evidence::simple_support("a2", a, 0.9).unwrap(),
            Evidence::simple_support("b1", b, 0.9).unwrap(),
            Evidence::simple_support("b2", b, 0.9).unwrap(),
        ];
        let d = DomainDistribution::point(2).unwrap();
        let start = Partition::new(vec![0, 1, 0, 1], 2).unwrap();
        let opts = SolverOptions {
            iteration_cap: Some(0),
            ..SolverOptions::default()
        };
        let out = local_optimize(2, &evs, &d, start.clone(), &opts).unwrap();
        assert!(out.capped);
        assert_eq!(out.partition, start);

        let free = local_optimize(2, &evs, &d, start, &SolverOptions::default()).unwrap();
        assert!(!free.capped);
        assert_eq!(free.partition.canonical_code(), vec![0, 0, 1, 1]);
    }
}
