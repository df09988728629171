//! Human-readable and machine-readable solver reports.
//!
//! The JSON form prints every real number with exactly nine decimals and
//! keeps fields in declaration order, so equal inputs give byte-equal output.
//! Evidence and subset indices inside the trace are 0-based positions; the
//! rest of the report uses evidence ids and 1-based subset numbers.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::criterion::{stability_margin, DomainDistribution, Partition};
use crate::error::Result;
use crate::evidence::Evidence;
use crate::optimizer::{Solution, TraceRecord};
use crate::oracle::{brute_force_min_mcf, OracleOptimum};

/// Two metaconflict values closer than this are reported as agreeing.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SubsetReport {
    pub subset: usize,
    pub members: Vec<String>,
    pub conflict: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginReport {
    pub evidence: String,
    pub subset: usize,
    pub mcf_after_split: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub r: usize,
    pub metaconflict: f64,
    pub subsets: Vec<Vec<String>>,
    pub capped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub subset_count: usize,
    pub subsets: Vec<Vec<String>>,
    pub metaconflict: f64,
    pub agrees: bool,
    pub same_partition: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub evidences: Vec<String>,
    /// Groups of input ids merged into one evidence before solving.
    pub precombined: Vec<Vec<String>>,
    pub subset_count: usize,
    pub subsets: Vec<SubsetReport>,
    pub domain_conflict: f64,
    pub metaconflict: f64,
    pub plausibility: f64,
    pub stable: bool,
    pub stability: Vec<MarginReport>,
    pub per_count: Vec<CountReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    pub trace: bool,
    pub oracle: bool,
}

fn named_blocks(partition: &Partition, ids: &[String]) -> Vec<Vec<String>> {
    partition
        .blocks()
        .into_iter()
        .map(|b| b.into_iter().map(|q| ids[q].clone()).collect())
        .collect()
}

impl Report {
    pub fn build(
        evidences: &[Evidence],
        dist: &DomainDistribution,
        solution: &Solution,
        precombined: Vec<Vec<String>>,
        options: ReportOptions,
    ) -> Result<Report> {
        let ids: Vec<String> = evidences.iter().map(|e| e.id().to_string()).collect();
        let partition = &solution.partition;
        let breakdown = &solution.breakdown;
        let subsets = named_blocks(partition, &ids)
            .into_iter()
            .zip(&breakdown.subset_conflicts)
            .enumerate()
            .map(|(i, (members, &conflict))| SubsetReport {
                subset: i + 1,
                members,
                conflict,
            })
            .collect();
        let stability = stability_margin(partition, evidences, dist)?;
        let oracle = if options.oracle {
            let OracleOptimum {
                partition: best,
                mcf,
            } = brute_force_min_mcf(evidences, dist, None)?;
            Some(OracleReport {
                subset_count: best.subset_count(),
                subsets: named_blocks(&best, &ids),
                metaconflict: mcf,
                agrees: (mcf - breakdown.metaconflict).abs() <= AGREEMENT_TOLERANCE,
                same_partition: best.same_grouping(partition),
            })
        } else {
            None
        };
        Ok(Report {
            precombined,
            subset_count: partition.subset_count(),
            subsets,
            domain_conflict: breakdown.domain_conflict,
            metaconflict: breakdown.metaconflict,
            plausibility: breakdown.plausibility(),
            stable: stability.is_stable(),
            stability: stability
                .margins
                .iter()
                .map(|m| MarginReport {
                    evidence: ids[m.evidence].clone(),
                    subset: m.subset + 1,
                    mcf_after_split: m.mcf_after,
                    margin: m.margin,
                })
                .collect(),
            per_count: solution
                .per_count
                .iter()
                .map(|c| CountReport {
                    r: c.r,
                    metaconflict: c.mcf,
                    subsets: named_blocks(&c.partition, &ids),
                    capped: c.capped,
                })
                .collect(),
            oracle,
            trace: options.trace.then(|| solution.trace.clone()),
            evidences: ids,
        })
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("reports serialize");
        fix_decimals(&mut value);
        let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out).expect("writing to a String");
        out
    }

    fn write_text(&self, out: &mut String) -> std::fmt::Result {
        writeln!(out, "evidences: {}", self.evidences.join(", "))?;
        for group in &self.precombined {
            writeln!(out, "precombined: {}", group.join(" + "))?;
        }
        writeln!(out, "subsets: r = {}", self.subset_count)?;
        for s in &self.subsets {
            writeln!(
                out,
                "  χ_{} = {{{}}}  c_{} = {}",
                s.subset,
                s.members.join(", "),
                s.subset,
                fixed(s.conflict)
            )?;
        }
        writeln!(out, "domain conflict c_0 = {}", fixed(self.domain_conflict))?;
        writeln!(out, "metaconflict Mcf   = {}", fixed(self.metaconflict))?;
        writeln!(out, "plausibility       = {}", fixed(self.plausibility))?;
        writeln!(
            out,
            "stability: {}",
            if self.stable { "stable" } else { "unstable" }
        )?;
        for m in &self.stability {
            writeln!(
                out,
                "  split {} off χ_{}: Mcf {} (change {})",
                m.evidence,
                m.subset,
                fixed(m.mcf_after_split),
                signed(m.margin)
            )?;
        }
        writeln!(out, "per subset count:")?;
        for c in &self.per_count {
            writeln!(
                out,
                "  r = {}: Mcf = {}  {}{}",
                c.r,
                fixed(c.metaconflict),
                braces(&c.subsets),
                if c.capped {
                    "  (iteration cap reached)"
                } else {
                    ""
                }
            )?;
        }
        if let Some(o) = &self.oracle {
            writeln!(
                out,
                "oracle: r = {}, Mcf = {}  {}  agrees: {}, same partition: {}",
                o.subset_count,
                fixed(o.metaconflict),
                braces(&o.subsets),
                yes_no(o.agrees),
                yes_no(o.same_partition)
            )?;
        }
        if let Some(trace) = &self.trace {
            writeln!(out, "trace:")?;
            for record in trace {
                self.write_record(out, record)?;
            }
        }
        Ok(())
    }

    fn write_record(&self, out: &mut String, record: &TraceRecord) -> std::fmt::Result {
        let id = |q: usize| self.evidences[q].as_str();
        match record {
            TraceRecord::DomainConflicts { conflicts } => {
                let parts: Vec<String> = conflicts
                    .iter()
                    .map(|c| format!("r = {}: {}", c.r, fixed(c.domain_conflict)))
                    .collect();
                writeln!(out, "  step 1: domain conflict c_0 {}", parts.join(", "))
            }
            TraceRecord::ChooseCount { r, candidates } => writeln!(
                out,
                "  step 2: least domain conflict among S = {} at r = {r}",
                set(candidates)
            ),
            TraceRecord::Schedule {
                visited,
                remaining,
                discarded,
                equal_mass_discards,
                ..
            } => {
                write!(
                    out,
                    "  step 3: T = {}, S = {}",
                    set(visited),
                    set(remaining)
                )?;
                if !discarded.is_empty() {
                    write!(out, ", dropped smaller counts {}", set(discarded))?;
                }
                if !equal_mass_discards.is_empty() {
                    write!(
                        out,
                        " (note: {} had prior mass equal to r's)",
                        set(equal_mass_discards)
                    )?;
                }
                writeln!(out)
            }
            TraceRecord::InitialPartition {
                r,
                extractions,
                assignment,
                mcf,
                ..
            } => {
                if extractions.is_empty() {
                    writeln!(
                        out,
                        "  step 4.1: r = {r}, start from {}",
                        self.assignment_text(assignment)
                    )?;
                }
                for x in extractions {
                    let rhos: Vec<String> = x
                        .home_rho
                        .iter()
                        .map(|(q, rho)| format!("{} {}", id(*q), fixed(*rho)))
                        .collect();
                    writeln!(
                        out,
                        "  step 4.1: r = {r}, home ρ: {}; move {} from χ_{} to χ_{}, Mcf = {}",
                        rhos.join(", "),
                        id(x.evidence),
                        x.from + 1,
                        x.to + 1,
                        fixed(x.mcf)
                    )?;
                }
                writeln!(
                    out,
                    "  step 4.1: initial partition {}, Mcf = {}",
                    self.assignment_text(assignment),
                    fixed(*mcf)
                )
            }
            TraceRecord::Evaluate { evaluations, .. } => {
                if evaluations.is_empty() {
                    return writeln!(out, "  step 4.3: every evidence is alone in its subset");
                }
                for e in evaluations {
                    let cells: Vec<String> = e
                        .rho
                        .iter()
                        .enumerate()
                        .map(|(j, rho)| {
                            let home = if j == e.home { "*" } else { "" };
                            format!("ρ(χ_{}){home} = {}", j + 1, fixed(*rho))
                        })
                        .collect();
                    writeln!(
                        out,
                        "  step 4.3: {}: {}; ratio {}",
                        id(e.evidence),
                        cells.join(", "),
                        fixed(e.ratio)
                    )?;
                }
                Ok(())
            }
            TraceRecord::Select { transfer, .. } => match transfer {
                Some(t) => writeln!(
                    out,
                    "  step 4.4: move {} from χ_{} to χ_{} (ratio {})",
                    id(t.evidence),
                    t.from + 1,
                    t.to + 1,
                    fixed(t.ratio)
                ),
                None => writeln!(out, "  step 4.4: no favourable transfer"),
            },
            TraceRecord::Update {
                applied,
                assignment,
                conflicts,
                mcf,
                capped,
                ..
            } => {
                let cs: Vec<String> = conflicts
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("c_{} = {}", i + 1, fixed(*c)))
                    .collect();
                let what = if applied.is_some() {
                    "updated"
                } else {
                    "unchanged"
                };
                writeln!(
                    out,
                    "  step 4.5: {what}: {}, Mcf = {}, {}{}",
                    self.assignment_text(assignment),
                    fixed(*mcf),
                    cs.join(", "),
                    if *capped {
                        " (iteration cap reached)"
                    } else {
                        ""
                    }
                )
            }
            TraceRecord::Prune {
                best_mcf,
                removed,
                remaining,
                ..
            } => writeln!(
                out,
                "  step 5: best Mcf {}; S := S - {} = {}",
                fixed(*best_mcf),
                set(removed),
                set(remaining)
            ),
            TraceRecord::Answer {
                r,
                mcf,
                visited,
                assignment,
            } => {
                let labels: Vec<String> = (1..=*r).map(|i| format!("χ_{i}")).collect();
                writeln!(
                    out,
                    "  step 6: T = {}; answer {{{}}} = {} for r = {r}, Mcf = {}",
                    set(visited),
                    labels.join(", "),
                    self.assignment_text(assignment),
                    fixed(*mcf)
                )
            }
        }
    }

    fn assignment_text(&self, assignment: &[usize]) -> String {
        let count = assignment.iter().max().map_or(0, |m| m + 1);
        let parts: Vec<String> = (0..count)
            .map(|s| {
                let members: Vec<&str> = assignment
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b == s)
                    .map(|(q, _)| self.evidences[q].as_str())
                    .collect();
                format!("χ_{} = {{{}}}", s + 1, members.join(", "))
            })
            .collect();
        parts.join(", ")
    }
}

fn fixed(x: f64) -> String {
    format!("{x:.9}")
}

fn signed(x: f64) -> String {
    format!("{x:+.9}")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn set(items: &[usize]) -> String {
    let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn braces(blocks: &[Vec<String>]) -> String {
    let parts: Vec<String> = blocks
        .iter()
        .map(|b| format!("{{{}}}", b.join(", ")))
        .collect();
    parts.join(" ")
}

// Rewrites every non-integer number with nine fixed decimals.
fn fix_decimals(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("finite");
            *n = fixed(x).parse::<Number>().expect("decimal literal");
        }
        Value::Array(items) => items.iter_mut().for_each(fix_decimals),
        Value::Object(map) => map.values_mut().for_each(fix_decimals),
        _ => {}
    }
}
