//! Exhaustive reference computations for small instances.
//!
//! Nothing here prunes or reuses optimizer machinery: conflicts are summed
//! over every selection of one focal element per evidence, and optima are
//! found by walking every set partition.

use crate::criterion::{DomainDistribution, Partition};
use crate::error::{Error, Result};
use crate::evidence::Evidence;

/// Largest corpus the partition search accepts.
pub const MAX_ORACLE_EVIDENCES: usize = 10;

/// Largest number of focal selections summed by [`conflict_by_enumeration`].
pub const MAX_SELECTIONS: u64 = 10_000_000;

/// Restricted-growth strings of length `n`, in lexicographic order.
///
/// Each string `a` has `a[0] = 0` and `a[i] ≤ 1 + max(a[..i])`, so every set
/// partition of `n` items appears exactly once. With a block count given,
/// only strings using exactly that many blocks are produced.
#[derive(Debug, Clone)]
pub struct PartitionEnumerator {
    n: usize,
    blocks: Option<usize>,
    code: Vec<usize>,
    started: bool,
    finished: bool,
}

impl PartitionEnumerator {
    pub fn new(n: usize, blocks: Option<usize>) -> Self {
        PartitionEnumerator {
            n,
            blocks,
            code: vec![0; n],
            started: false,
            finished: n == 0,
        }
    }

    fn advance(&mut self) -> bool {
        for i in (1..self.n).rev() {
            let prefix_max = self.code[..i].iter().copied().max().unwrap_or(0);
            if self.code[i] <= prefix_max {
                self.code[i] += 1;
                for c in &mut self.code[i + 1..] {
                    *c = 0;
                }
                return true;
            }
        }
        false
    }

    fn block_count(&self) -> usize {
        self.code.iter().copied().max().map_or(0, |m| m + 1)
    }
}

impl Iterator for PartitionEnumerator {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        while !self.finished {
            if self.started {
                if !self.advance() {
                    self.finished = true;
                    return None;
                }
            } else {
                self.started = true;
            }
            if self.blocks.is_none_or(|b| b == self.block_count()) {
                return Some(self.code.clone());
            }
        }
        None
    }
}

/// Stirling number of the second kind, `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> u64 {
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as u64 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

/// Conflict of a set of evidences straight from its definition: the total
/// product mass of all focal selections whose intersection is empty.
pub fn conflict_by_enumeration(evidences: &[Evidence]) -> Result<f64> {
    let Some(first) = evidences.first() else {
        return Err(Error::Domain(
            "conflict of an empty set of evidences".into(),
        ));
    };
    let shape = first.shape();
    if evidences.iter().any(|e| e.shape() != shape) {
        return Err(Error::FrameMismatch);
    }
    let mut space: u64 = 1;
    for e in evidences {
        space = space.saturating_mul(e.focals().len() as u64);
        if space > MAX_SELECTIONS {
            return Err(Error::OracleTooLarge(format!(
                "more than {MAX_SELECTIONS} focal selections"
            )));
        }
    }
    let mut digits = vec![0usize; evidences.len()];
    let mut conflict = 0.0;
    loop {
        let mut actions = shape.action_mask();
        let mut events = shape.event_mask();
        let mut product = 1.0;
        for (e, &d) in evidences.iter().zip(&digits) {
            let (focal, mass) = &e.focals()[d];
            actions &= focal.actions();
            events &= focal.events();
            product *= mass;
        }
        if actions == 0 || events == 0 {
            conflict += product;
        }
        // Mixed-radix increment, last digit fastest.
        let mut i = digits.len();
        loop {
            if i == 0 {
                return Ok(conflict);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < evidences[i].focals().len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptimum {
    pub partition: Partition,
    pub mcf: f64,
}

/// Exhaustive optimum for every subset count `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    /// `per_count[r - 1]` is the best partition into exactly `r` subsets.
    pub per_count: Vec<OracleOptimum>,
    /// Best over all counts; ties go to the lexicographically smallest code.
    pub best: OracleOptimum,
}

impl OracleTable {
    pub fn min_mcf(&self, r: usize) -> f64 {
        self.per_count[r - 1].mcf
    }
}

fn check_size(evidences: &[Evidence]) -> Result<()> {
    if evidences.is_empty() {
        return Err(Error::Domain("at least one evidence is required".into()));
    }
    if evidences.len() > MAX_ORACLE_EVIDENCES {
        return Err(Error::OracleTooLarge(format!(
            "{} evidences, at most {MAX_ORACLE_EVIDENCES} supported",
            evidences.len()
        )));
    }
    Ok(())
}

/// Conflict of every nonempty subset of the corpus, indexed by member bitmask.
fn subset_conflict_table(evidences: &[Evidence]) -> Result<Vec<f64>> {
    let n = evidences.len();
    let mut table = vec![0.0; 1 << n];
    for (mask, slot) in table.iter_mut().enumerate().skip(1) {
        let members: Vec<Evidence> = (0..n)
            .filter(|q| mask & (1 << q) != 0)
            .map(|q| evidences[q].clone())
            .collect();
        *slot = conflict_by_enumeration(&members)?;
    }
    Ok(table)
}

fn domain_conflict(dist: &DomainDistribution, r: usize) -> f64 {
    dist.entries()
        .filter(|&(count, _)| count != r)
        .map(|(_, m)| m)
        .sum()
}

fn mcf_of_code(code: &[usize], blocks: usize, table: &[f64], dist: &DomainDistribution) -> f64 {
    let mut masks = vec![0usize; blocks];
    for (q, &b) in code.iter().enumerate() {
        masks[b] |= 1 << q;
    }
    let mut keep = 1.0 - domain_conflict(dist, blocks);
    for m in masks {
        keep *= 1.0 - table[m];
    }
    1.0 - keep
}

/// Per-count and overall exhaustive optima.
pub fn brute_force_table(evidences: &[Evidence], dist: &DomainDistribution) -> Result<OracleTable> {
    check_size(evidences)?;
    let n = evidences.len();
    let table = subset_conflict_table(evidences)?;
    let mut best_per_count: Vec<Option<(Vec<usize>, f64)>> = vec![None; n];
    for code in PartitionEnumerator::new(n, None) {
        let blocks = code.iter().max().unwrap() + 1;
        let mcf = mcf_of_code(&code, blocks, &table, dist);
        let slot = &mut best_per_count[blocks - 1];
        if slot.as_ref().is_none_or(|(_, m)| mcf < *m) {
            *slot = Some((code, mcf));
        }
    }
    let per_count = best_per_count
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            let (code, mcf) = slot.expect("every count 1..=n has a partition");
            Ok(OracleOptimum {
                partition: Partition::new(code, i + 1)?,
                mcf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = &per_count[0];
    for o in &per_count[1..] {
        if o.mcf < best.mcf
            || (o.mcf == best.mcf && o.partition.canonical_code() < best.partition.canonical_code())
        {
            best = o;
        }
    }
    let best = best.clone();
    Ok(OracleTable { per_count, best })
}

/// Exhaustive minimum metaconflict, over all counts or for a given count.
pub fn brute_force_min_mcf(
    evidences: &[Evidence],
    dist: &DomainDistribution,
    r: Option<usize>,
) -> Result<OracleOptimum> {
    check_size(evidences)?;
    match r {
        None => Ok(brute_force_table(evidences, dist)?.best),
        Some(r) if r == 0 || r > evidences.len() => Err(Error::Infeasible {
            subsets: r,
            evidences: evidences.len(),
        }),
        Some(r) => {
            let table = subset_conflict_table(evidences)?;
            let mut best: Option<(Vec<usize>, f64)> = None;
            for code in PartitionEnumerator::new(evidences.len(), Some(r)) {
                let mcf = mcf_of_code(&code, r, &table, dist);
                if best.as_ref().is_none_or(|(_, m)| mcf < *m) {
                    best = Some((code, mcf));
                }
            }
            let (code, mcf) = best.expect("1 <= r <= n has a partition");
            Ok(OracleOptimum {
                partition: Partition::new(code, r)?,
                mcf,
            })
        }
    }
}
