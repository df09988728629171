//! Corpus files.
//!
//! A corpus is a TOML document with three sections:
//!
//! ```toml
//! [frame]
//! actions = ["BO", "BI", "R"]
//! events = ["E1", "E2"]
//!
//! [[distribution]]
//! count = 1
//! mass = 0.6
//!
//! [[distribution]]
//! count = 2
//! mass = 0.4
//!
//! [[evidence]]
//! id = "e1"
//! focals = [{ actions = ["BO"], events = ["E1"], mass = 0.8 }]
//! ```
//!
//! A focal element without `actions` spans every action atom and one without
//! `events` spans every event, so `{ mass = 0.2 }` is Θ. When an evidence's
//! masses sum to less than one, the remainder goes to Θ.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::criterion::DomainDistribution;
use crate::evidence::{Evidence, FocalElement, Frame, MASS_TOLERANCE};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, {field}: {message}")]
    Invalid {
        line: usize,
        field: String,
        message: String,
    },
}

/// A validated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub frame: Frame,
    pub distribution: DomainDistribution,
    pub evidences: Vec<Evidence>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    frame: Spanned<RawFrame>,
    #[serde(default)]
    distribution: Vec<Spanned<RawCount>>,
    #[serde(default)]
    evidence: Vec<Spanned<RawEvidence>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    actions: Vec<Spanned<String>>,
    events: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCount {
    count: Spanned<i64>,
    mass: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvidence {
    id: Spanned<String>,
    focals: Vec<Spanned<RawFocal>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFocal {
    actions: Option<Vec<Spanned<String>>>,
    events: Option<Vec<Spanned<String>>>,
    mass: Spanned<f64>,
}

struct Locator<'s> {
    source: &'s str,
}

impl Locator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.source.len());
        self.source[..end].matches('\n').count() + 1
    }

    fn invalid(
        &self,
        span: Range<usize>,
        field: String,
        message: impl Into<String>,
    ) -> CorpusError {
        CorpusError::Invalid {
            line: self.line(span),
            field,
            message: message.into(),
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&source)
}

pub fn parse_corpus(source: &str) -> Result<Corpus, CorpusError> {
    let at = Locator { source };
    let raw: RawCorpus = toml::from_str(source).map_err(|e| CorpusError::Syntax {
        line: e.span().map_or(1, |s| at.line(s)),
        message: e.message().to_string(),
    })?;

    let frame_span = raw.frame.span();
    let raw_frame = raw.frame.into_inner();
    let frame = Frame::new(
        raw_frame.actions.iter().map(|s| s.get_ref().clone()),
        raw_frame.events.iter().map(|s| s.get_ref().clone()),
    )
    .map_err(|e| at.invalid(frame_span.clone(), "frame".into(), e.to_string()))?;

    if raw.distribution.is_empty() {
        return Err(at.invalid(0..0, "distribution".into(), "no [[distribution]] entries"));
    }
    let mut pairs = Vec::new();
    for (i, entry) in raw.distribution.iter().enumerate() {
        let entry = entry.get_ref();
        let count = *entry.count.get_ref();
        if count < 1 {
            return Err(at.invalid(
                entry.count.span(),
                format!("distribution[{i}].count"),
                format!("event count {count} must be at least 1"),
            ));
        }
        let mass = *entry.mass.get_ref();
        if !(0.0..=1.0).contains(&mass) {
            return Err(at.invalid(
                entry.mass.span(),
                format!("distribution[{i}].mass"),
                format!("mass {mass} outside [0, 1]"),
            ));
        }
        pairs.push((count as usize, mass));
    }
    let first_entry = raw.distribution[0].span();
    let distribution = DomainDistribution::new(pairs)
        .map_err(|e| at.invalid(first_entry, "distribution".into(), e.to_string()))?;

    if raw.evidence.is_empty() {
        return Err(at.invalid(0..0, "evidence".into(), "no [[evidence]] entries"));
    }
    let mut evidences: Vec<Evidence> = Vec::with_capacity(raw.evidence.len());
    for (i, entry) in raw.evidence.iter().enumerate() {
        let span = entry.span();
        let entry = entry.get_ref();
        let id = entry.id.get_ref();
        if evidences.iter().any(|e| e.id() == id) {
            return Err(at.invalid(
                entry.id.span(),
                format!("evidence[{i}].id"),
                format!("duplicate evidence id `{id}`"),
            ));
        }
        let evidence = build_evidence(&at, &frame, i, entry)
            .and_then(|e| e.map_err(|err| at.invalid(span, format!("evidence[{i}]"), err)))?;
        evidences.push(evidence);
    }

    Ok(Corpus {
        frame,
        distribution,
        evidences,
    })
}

fn resolve_names(
    at: &Locator<'_>,
    names: &Option<Vec<Spanned<String>>>,
    lookup: impl Fn(&str) -> Option<usize>,
    all: u64,
    field: &str,
    kind: &str,
    fallback: Range<usize>,
) -> Result<u64, CorpusError> {
    let Some(names) = names else {
        return Ok(all);
    };
    let mut bits = 0u64;
    for name in names {
        let index = lookup(name.get_ref()).ok_or_else(|| {
            at.invalid(
                name.span(),
                field.to_string(),
                format!("unknown {kind} `{}`", name.get_ref()),
            )
        })?;
        bits |= 1 << index;
    }
    if bits == 0 {
        return Err(at.invalid(
            fallback,
            field.to_string(),
            format!("empty {kind} list makes an impossible focal element"),
        ));
    }
    Ok(bits)
}

// Outer error: located diagnostics. Inner error: whole-evidence problems
// reported against the evidence entry.
fn build_evidence(
    at: &Locator<'_>,
    frame: &Frame,
    index: usize,
    raw: &RawEvidence,
) -> Result<Result<Evidence, String>, CorpusError> {
    let shape = frame.shape();
    let mut focals: Vec<(FocalElement, f64)> = Vec::new();
    for (k, focal) in raw.focals.iter().enumerate() {
        let field = format!("evidence[{index}].focals[{k}]");
        let focal_span = focal.span();
        let focal = focal.get_ref();
        let actions = resolve_names(
            at,
            &focal.actions,
            |n| frame.action_index(n),
            shape.action_mask(),
            &format!("{field}.actions"),
            "action atom",
            focal_span.clone(),
        )?;
        let events = resolve_names(
            at,
            &focal.events,
            |n| frame.event_index(n),
            shape.event_mask(),
            &format!("{field}.events"),
            "event label",
            focal_span.clone(),
        )?;
        let mass = *focal.mass.get_ref();
        if !(mass > 0.0 && mass <= 1.0) {
            return Err(at.invalid(
                focal.mass.span(),
                format!("{field}.mass"),
                format!("mass {mass} outside (0, 1]"),
            ));
        }
        let element = FocalElement::new(shape, actions, events)
            .map_err(|e| at.invalid(focal_span.clone(), field.clone(), e.to_string()))?;
        if focals.iter().any(|(f, _)| *f == element) {
            return Err(at.invalid(focal_span, field, "focal element listed twice"));
        }
        focals.push((element, mass));
    }
    if focals.is_empty() {
        return Ok(Err("no focal elements".into()));
    }
    let total: f64 = focals.iter().map(|(_, m)| m).sum();
    if total > 1.0 + MASS_TOLERANCE {
        return Ok(Err(format!("masses sum to {total}, more than 1")));
    }
    let deficit = 1.0 - total;
    if deficit > MASS_TOLERANCE {
        let full = frame.full();
        match focals.iter_mut().find(|(f, _)| *f == full) {
            Some((_, m)) => *m += deficit,
            None => focals.push((full, deficit)),
        }
    }
    Ok(Evidence::new(raw.id.get_ref().clone(), focals).map_err(|e| e.to_string()))
}

#[derive(Serialize)]
struct OutCorpus<'a> {
    frame: OutFrame<'a>,
    distribution: Vec<OutCount>,
    evidence: Vec<OutEvidence<'a>>,
}

#[derive(Serialize)]
struct OutFrame<'a> {
    actions: &'a [String],
    events: &'a [String],
}

#[derive(Serialize)]
struct OutCount {
    count: usize,
    mass: f64,
}

#[derive(Serialize)]
struct OutEvidence<'a> {
    id: &'a str,
    focals: Vec<OutFocal<'a>>,
}

#[derive(Serialize)]
struct OutFocal<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    actions: Option<Vec<&'a str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    events: Option<Vec<&'a str>>,
    mass: f64,
}

/// Writes a corpus back out in the same format, with Θ listed explicitly.
pub fn to_toml(corpus: &Corpus) -> String {
    let frame = &corpus.frame;
    let shape = frame.shape();
    let out = OutCorpus {
        frame: OutFrame {
            actions: frame.actions(),
            events: frame.events(),
        },
        distribution: corpus
            .distribution
            .entries()
            .map(|(count, mass)| OutCount { count, mass })
            .collect(),
        evidence: corpus
            .evidences
            .iter()
            .map(|e| OutEvidence {
                id: e.id(),
                focals: e
                    .focals()
                    .iter()
                    .map(|(f, mass)| OutFocal {
                        actions: (f.actions() != shape.action_mask())
                            .then(|| frame.action_names(f)),
                        events: (f.events() != shape.event_mask()).then(|| frame.event_names(f)),
                        mass: *mass,
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&out).expect("corpus documents always serialize")
}
