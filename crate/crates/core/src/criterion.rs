//! The metaconflict criterion.
//!
//! Every subset's internal conflict `c_i` and the domain conflict `c_0`
//! between the subset count `r` and the prior over the number of events are
//! treated as independent pieces of evidence against the partition. Fusing
//! them gives
//!
//! ```text
//! Mcf = 1 - (1 - c_0) · Π_i (1 - c_i)
//! ```
//!
//! which is one minus the plausibility of the partition. Lower is better.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evidence::{fold, Evidence, MASS_TOLERANCE};

/// Prior masses `m(E_i)` over the number of events `i ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDistribution {
    masses: BTreeMap<usize, f64>,
}

impl DomainDistribution {
    pub fn new<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut masses = BTreeMap::new();
        for (count, mass) in pairs {
            if count == 0 {
                return Err(Error::InvalidDistribution("event counts start at 1".into()));
            }
            if !(0.0..=1.0).contains(&mass) {
                return Err(Error::InvalidDistribution(format!(
                    "mass {mass} for {count} events outside [0, 1]"
                )));
            }
            if masses.insert(count, mass).is_some() {
                return Err(Error::InvalidDistribution(format!(
                    "event count {count} listed twice"
                )));
            }
        }
        let total: f64 = masses.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(DomainDistribution { masses })
    }

    /// All mass on exactly `count` events.
    pub fn point(count: usize) -> Result<Self> {
        DomainDistribution::new([(count, 1.0)])
    }

    pub fn mass(&self, count: usize) -> f64 {
        self.masses.get(&count).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.masses.iter().map(|(c, m)| (*c, *m))
    }

    /// Largest count carrying positive mass.
    pub fn max_supported_count(&self) -> usize {
        self.masses
            .iter()
            .rev()
            .find(|(_, m)| **m > 0.0)
            .map(|(c, _)| *c)
            .unwrap_or(0)
    }

    /// Rejects distributions putting mass on more events than there are evidences.
    pub fn check_support(&self, evidence_count: usize) -> Result<()> {
        let max = self.max_supported_count();
        if max > evidence_count {
            return Err(Error::InvalidDistribution(format!(
                "positive mass on {max} events but only {evidence_count} evidences"
            )));
        }
        Ok(())
    }

    /// `c_0 = Σ_{i ≠ r} m(E_i)`.
    pub fn domain_conflict(&self, r: usize) -> f64 {
        let c0: f64 = self
            .masses
            .iter()
            .filter(|(count, _)| **count != r)
            .map(|(_, m)| m)
            .sum();
        c0.clamp(0.0, 1.0)
    }
}

/// `c_0` for `r` subsets.
pub fn domain_conflict(dist: &DomainDistribution, r: usize) -> f64 {
    dist.domain_conflict(r)
}

/// Assignment of evidences (by index) to `r` nonempty subsets `0..r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    subset_count: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, subset_count: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidPartition("no evidences".into()));
        }
        let mut sizes = vec![0usize; subset_count];
        for (q, &s) in assignment.iter().enumerate() {
            let slot = sizes.get_mut(s).ok_or_else(|| {
                Error::InvalidPartition(format!(
                    "evidence {q} assigned to subset {s} of {subset_count}"
                ))
            })?;
            *slot += 1;
        }
        if let Some(empty) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidPartition(format!("subset {empty} is empty")));
        }
        Ok(Partition {
            assignment,
            subset_count,
        })
    }

    /// Builds a partition from explicit blocks of evidence indices.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut assignment = vec![usize::MAX; n];
        for (s, block) in blocks.iter().enumerate() {
            for &q in block {
                match assignment.get_mut(q) {
                    Some(slot) if *slot == usize::MAX => *slot = s,
                    _ => {
                        return Err(Error::InvalidPartition(format!(
                            "evidence {q} missing, repeated or out of range"
                        )))
                    }
                }
            }
        }
        Partition::new(assignment, blocks.len())
    }

    /// Everything in one subset.
    pub fn single(n: usize) -> Result<Self> {
        Partition::new(vec![0; n], 1)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn subset_count(&self) -> usize {
        self.subset_count
    }

    pub fn subset_of(&self, q: usize) -> usize {
        self.assignment[q]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, subset: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| self.assignment[q] == subset)
            .collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.subset_count).map(|s| self.members(s)).collect()
    }

    pub fn subset_size(&self, subset: usize) -> usize {
        self.assignment.iter().filter(|&&s| s == subset).count()
    }

    /// Restricted-growth code: subsets relabelled by first occurrence.
    pub fn canonical_code(&self) -> Vec<usize> {
        let mut relabel = vec![usize::MAX; self.subset_count];
        let mut next = 0;
        self.assignment
            .iter()
            .map(|&s| {
                if relabel[s] == usize::MAX {
                    relabel[s] = next;
                    next += 1;
                }
                relabel[s]
            })
            .collect()
    }

    /// Same grouping of evidences, ignoring subset labels.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.canonical_code() == other.canonical_code()
    }

    pub(crate) fn move_to(&mut self, q: usize, subset: usize) {
        if subset == self.subset_count {
            self.subset_count += 1;
        }
        self.assignment[q] = subset;
    }
}

/// `1 - (1 - c_0) · Π (1 - c_i)`, clamped to `[0, 1]`.
pub fn metaconflict_from_parts(domain_conflict: f64, subset_conflicts: &[f64]) -> f64 {
    let keep: f64 = subset_conflicts
        .iter()
        .fold(1.0 - domain_conflict, |acc, c| acc * (1.0 - c));
    (1.0 - keep).clamp(0.0, 1.0)
}

/// The pieces of a metaconflict evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub domain_conflict: f64,
    pub subset_conflicts: Vec<f64>,
    pub metaconflict: f64,
}

impl Breakdown {
    pub fn plausibility(&self) -> f64 {
        1.0 - self.metaconflict
    }
}

fn check_sizes(partition: &Partition, evidences: &[Evidence]) -> Result<()> {
    if partition.len() != evidences.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} evidences, corpus has {}",
            partition.len(),
            evidences.len()
        )));
    }
    Ok(())
}

pub fn evaluate(
    partition: &Partition,
    evidences: &[Evidence],
    dist: &DomainDistribution,
) -> Result<Breakdown> {
    check_sizes(partition, evidences)?;
    let domain_conflict = dist.domain_conflict(partition.subset_count());
    let subset_conflicts = partition
        .blocks()
        .iter()
        .map(|block| {
            let members: Vec<Evidence> = block.iter().map(|&q| evidences[q].clone()).collect();
            fold(&members).map(|s| s.conflict())
        })
        .collect::<Result<Vec<_>>>()?;
    let metaconflict = metaconflict_from_parts(domain_conflict, &subset_conflicts);
    Ok(Breakdown {
        domain_conflict,
        subset_conflicts,
        metaconflict,
    })
}

pub fn metaconflict(
    partition: &Partition,
    evidences: &[Evidence],
    dist: &DomainDistribution,
) -> Result<f64> {
    Ok(evaluate(partition, evidences, dist)?.metaconflict)
}

/// `Pls(Partition) = 1 - Mcf`. The belief in a partition is always 0.
pub fn plausibility(
    partition: &Partition,
    evidences: &[Evidence],
    dist: &DomainDistribution,
) -> Result<f64> {
    Ok(evaluate(partition, evidences, dist)?.plausibility())
}

/// Whether subset count `count` can be discarded given an achieved minimum.
///
/// Any partition into `count` subsets has `Mcf ≥ c_0(count)`, so once
/// `c_0(count)` exceeds the best metaconflict found, that count cannot win.
pub fn domain_bound_excludes(dist: &DomainDistribution, count: usize, best_mcf: f64) -> bool {
    dist.domain_conflict(count) > best_mcf
}

/// Metaconflict change when one evidence is split off into a new subset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMargin {
    pub evidence: usize,
    pub subset: usize,
    pub mcf_after: f64,
    /// `mcf_after - mcf`; positive means the split is rejected.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub mcf: f64,
    pub margins: Vec<SplitMargin>,
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        self.margins.iter().all(|m| m.margin > 0.0)
    }

    pub fn smallest_margin(&self) -> Option<&SplitMargin> {
        self.margins
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Recomputes the metaconflict for every evidence of a non-singleton subset
/// moved into a fresh subset `r + 1`.
pub fn stability_margin(
    partition: &Partition,
    evidences: &[Evidence],
    dist: &DomainDistribution,
) -> Result<Stability> {
    let base = evaluate(partition, evidences, dist)?;
    let r = partition.subset_count();
    let split_domain = dist.domain_conflict(r + 1);
    let mut margins = Vec::new();
    for q in 0..partition.len() {
        let home = partition.subset_of(q);
        if partition.subset_size(home) < 2 {
            continue;
        }
        let rest: Vec<Evidence> = partition
            .members(home)
            .into_iter()
            .filter(|&p| p != q)
            .map(|p| evidences[p].clone())
            .collect();
        let mut conflicts = base.subset_conflicts.clone();
        conflicts[home] = fold(&rest)?.conflict();
        conflicts.push(0.0);
        let mcf_after = metaconflict_from_parts(split_domain, &conflicts);
        margins.push(SplitMargin {
            evidence: q,
            subset: home,
            mcf_after,
            margin: mcf_after - base.metaconflict,
        });
    }
    Ok(Stability {
        mcf: base.metaconflict,
        margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::Frame;

    fn baker_distribution() -> DomainDistribution {
        DomainDistribution::new([(1, 0.6), (2, 0.4)]).unwrap()
    }

    #[test]
    fn domain_conflict_values() {
        let d = baker_distribution();
        assert!((domain_conflict(&d, 1) - 0.4).abs() < 1e-15);
        assert!((domain_conflict(&d, 2) - 0.6).abs() < 1e-15);
        assert_eq!(domain_conflict(&d, 3), 1.0);
        assert_eq!(
            domain_conflict(&DomainDistribution::point(3).unwrap(), 3),
            0.0
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(DomainDistribution::new([(1, 0.5), (2, 0.4)]).is_err());
        assert!(DomainDistribution::new([(0, 1.0)]).is_err());
        assert!(DomainDistribution::new([(1, 0.5), (1, 0.5)]).is_err());
        assert!(DomainDistribution::new([(1, 1.2), (2, -0.2)]).is_err());
        let d = DomainDistribution::new([(1, 0.5), (2, 0.5), (5, 0.0)]).unwrap();
        assert_eq!(d.max_supported_count(), 2);
        assert!(d.check_support(2).is_ok());
        assert!(d.check_support(1).is_err());
    }

    #[test]
    fn domain_bound() {
        let d = baker_distribution();
        assert!(domain_bound_excludes(&d, 3, 0.884));
        assert!(!domain_bound_excludes(&d, 2, 0.884));
        let p = DomainDistribution::point(2).unwrap();
        assert!(!domain_bound_excludes(&p, 2, 0.0));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 2], 3).is_err());
        assert!(Partition::new(vec![0, 3], 2).is_err());
        assert!(Partition::new(vec![], 0).is_err());
        assert!(Partition::from_blocks(&[vec![0, 1], vec![1]]).is_err());
        assert!(Partition::from_blocks(&[vec![0, 2]]).is_err());
        let p = Partition::from_blocks(&[vec![1, 2], vec![0, 3]]).unwrap();
        assert_eq!(p.assignment(), &[1, 0, 0, 1]);
        assert_eq!(p.canonical_code(), vec![0, 1, 1, 0]);
        let q = Partition::new(vec![0, 1, 1, 0], 2).unwrap();
        assert!(p.same_grouping(&q));
    }

    #[test]
    fn singletons_without_domain_conflict_have_zero_metaconflict() {
        let f = Frame::with_event_count(["A", "B"], 3).unwrap();
        let a = f.focal(&["A"], &["E1"]).unwrap();
        let b = f.focal(&["B"], &["E1"]).unwrap();
        let evs = vec![
            Evidence::simple_support("x", a, 0.9).unwrap(),
            Evidence::simple_support("y", b, 0.9).unwrap(),
            Evidence::simple_support("z", a, 0.3).unwrap(),
        ];
        let d = DomainDistribution::point(3).unwrap();
        let p = Partition::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(metaconflict(&p, &evs, &d).unwrap(), 0.0);
        assert_eq!(plausibility(&p, &evs, &d).unwrap(), 1.0);
    }

    #[test]
    fn impossible_partition_has_zero_plausibility() {
        let f = Frame::with_event_count(["A", "B"], 1).unwrap();
        let evs = vec![
            Evidence::new("x", vec![(f.focal(&["A"], &["E1"]).unwrap(), 1.0)]).unwrap(),
            Evidence::new("y", vec![(f.focal(&["B"], &["E1"]).unwrap(), 1.0)]).unwrap(),
        ];
        let d = DomainDistribution::point(1).unwrap();
        let p = Partition::single(2).unwrap();
        assert_eq!(metaconflict(&p, &evs, &d).unwrap(), 1.0);
        assert_eq!(plausibility(&p, &evs, &d).unwrap(), 0.0);
    }

    #[test]
    fn single_evidence_is_fully_plausible() {
        let f = Frame::with_event_count(["A"], 1).unwrap();
        let evs = vec![Evidence::vacuous("x", f.shape())];
        let d = DomainDistribution::point(1).unwrap();
        assert_eq!(
            plausibility(&Partition::single(1).unwrap(), &evs, &d).unwrap(),
            1.0
        );
    }

    #[test]
    fn singleton_members_are_not_split() {
        let f = Frame::with_event_count(["A"], 1).unwrap();
        let evs: Vec<Evidence> = (0..3)
            .map(|i| Evidence::vacuous(format!("v{i}"), f.shape()))
            .collect();
        let d = DomainDistribution::new([(2, 0.5), (3, 0.5)]).unwrap();
        let p = Partition::new(vec![0, 0, 1], 2).unwrap();
        let s = stability_margin(&p, &evs, &d).unwrap();
        let split: Vec<usize> = s.margins.iter().map(|m| m.evidence).collect();
        assert_eq!(split, vec![0, 1]);
        // Equal mass on 2 and 3 events: splitting costs nothing.
        assert!(s.margins.iter().all(|m| m.margin.abs() < 1e-15));
        assert!(!s.is_stable());
    }
}
