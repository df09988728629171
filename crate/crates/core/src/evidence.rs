//! Frames, focal elements and mass functions over the product of action
//! hypotheses and event identities, together with Dempster's rule of
//! combination that keeps the conflict mass instead of normalizing it away.
//!
//! A focal element is a pair `(actions, events)`. It is empty when either
//! component is empty: action parts that cannot both hold are in conflict, and
//! so are event parts that cannot refer to the same event. Both situations fall
//! out of the same componentwise intersection.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance used for every mass-sum check.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Largest number of action atoms, and of events, a frame may declare.
pub const MAX_FRAME_WIDTH: usize = 64;

fn low_bits(count: u8) -> u64 {
    if count as usize >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

/// Width of a frame: how many action atoms and how many events it has.
///
/// Focal elements carry their shape so that elements from differently sized
/// frames are never silently intersected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    action_count: u8,
    event_count: u8,
}

impl Shape {
    pub fn new(action_count: usize, event_count: usize) -> Result<Self> {
        if action_count == 0 || action_count > MAX_FRAME_WIDTH {
            return Err(Error::InvalidFrame(format!(
                "action atom count {action_count} outside 1..={MAX_FRAME_WIDTH}"
            )));
        }
        if event_count == 0 || event_count > MAX_FRAME_WIDTH {
            return Err(Error::InvalidFrame(format!(
                "event count {event_count} outside 1..={MAX_FRAME_WIDTH}"
            )));
        }
        Ok(Shape {
            action_count: action_count as u8,
            event_count: event_count as u8,
        })
    }

    pub fn action_count(&self) -> usize {
        self.action_count as usize
    }

    pub fn event_count(&self) -> usize {
        self.event_count as usize
    }

    pub fn action_mask(&self) -> u64 {
        low_bits(self.action_count)
    }

    pub fn event_mask(&self) -> u64 {
        low_bits(self.event_count)
    }
}

/// The frame of discernment: named action atoms times named events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    actions: Vec<String>,
    events: Vec<String>,
    shape: Shape,
}

impl Frame {
    pub fn new<A, E>(actions: A, events: E) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        E: IntoIterator,
        E::Item: Into<String>,
    {
        let actions: Vec<String> = actions.into_iter().map(Into::into).collect();
        let events: Vec<String> = events.into_iter().map(Into::into).collect();
        check_names("action atom", &actions)?;
        check_names("event label", &events)?;
        let shape = Shape::new(actions.len(), events.len())?;
        Ok(Frame {
            actions,
            events,
            shape,
        })
    }

    /// Frame whose events are labelled `E1..En`.
    pub fn with_event_count<A>(actions: A, event_count: usize) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<String>,
    {
        Frame::new(actions, (1..=event_count).map(|i| format!("E{i}")))
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn event_count_max(&self) -> usize {
        self.events.len()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn event_index(&self, label: &str) -> Option<usize> {
        self.events.iter().position(|e| e == label)
    }

    pub fn full(&self) -> FocalElement {
        FocalElement::full(self.shape)
    }

    /// Builds a focal element from atom names and event labels.
    pub fn focal(&self, actions: &[&str], events: &[&str]) -> Result<FocalElement> {
        let mut action_bits = 0u64;
        for name in actions {
            let i = self
                .action_index(name)
                .ok_or_else(|| Error::InvalidFrame(format!("unknown action atom `{name}`")))?;
            action_bits |= 1 << i;
        }
        let mut event_bits = 0u64;
        for label in events {
            let i = self
                .event_index(label)
                .ok_or_else(|| Error::InvalidFrame(format!("unknown event label `{label}`")))?;
            event_bits |= 1 << i;
        }
        FocalElement::new(self.shape, action_bits, event_bits)
    }

    pub fn action_names(&self, focal: &FocalElement) -> Vec<&str> {
        bit_indices(focal.actions())
            .map(|i| self.actions[i].as_str())
            .collect()
    }

    pub fn event_names(&self, focal: &FocalElement) -> Vec<&str> {
        bit_indices(focal.events())
            .map(|i| self.events[i].as_str())
            .collect()
    }

    /// Short human-readable rendering, `Θ` for the full element.
    pub fn describe(&self, focal: &FocalElement) -> String {
        if focal.is_full() {
            return "Θ".to_string();
        }
        let actions = if focal.actions() == self.shape.action_mask() {
            "*".to_string()
        } else {
            self.action_names(focal).join("|")
        };
        let events = if focal.events() == self.shape.event_mask() {
            "*".to_string()
        } else {
            self.event_names(focal).join(",")
        };
        format!("{actions}@{{{events}}}")
    }
}

fn check_names(kind: &str, names: &[String]) -> Result<()> {
    for (i, name) in names.iter().enumerate() {
        if name.trim().is_empty() {
            return Err(Error::InvalidFrame(format!(
                "{kind} #{} has an empty name",
                i + 1
            )));
        }
        if names[..i].contains(name) {
            return Err(Error::InvalidFrame(format!("duplicate {kind} `{name}`")));
        }
    }
    Ok(())
}

pub(crate) fn bit_indices(bits: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| bits & (1u64 << i) != 0)
}

/// A subset of the product frame, stored as an action bitset and an event bitset.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FocalElement {
    shape: Shape,
    actions: u64,
    events: u64,
}

impl FocalElement {
    pub fn new(shape: Shape, actions: u64, events: u64) -> Result<Self> {
        if actions & !shape.action_mask() != 0 || events & !shape.event_mask() != 0 {
            return Err(Error::FrameMismatch);
        }
        Ok(FocalElement {
            shape,
            actions,
            events,
        })
    }

    pub fn full(shape: Shape) -> Self {
        FocalElement {
            shape,
            actions: shape.action_mask(),
            events: shape.event_mask(),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn actions(&self) -> u64 {
        self.actions
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Empty when no action remains possible or no event remains possible.
    pub fn is_empty(&self) -> bool {
        self.actions == 0 || self.events == 0
    }

    pub fn is_full(&self) -> bool {
        self.actions == self.shape.action_mask() && self.events == self.shape.event_mask()
    }

    pub fn intersect(&self, other: &FocalElement) -> Result<FocalElement> {
        if self.shape != other.shape {
            return Err(Error::FrameMismatch);
        }
        Ok(FocalElement {
            shape: self.shape,
            actions: self.actions & other.actions,
            events: self.events & other.events,
        })
    }

    /// The event index when exactly one event is referenced.
    pub fn single_event(&self) -> Option<usize> {
        (self.events.count_ones() == 1).then(|| self.events.trailing_zeros() as usize)
    }
}

impl fmt::Debug for FocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:#b} x {:#b})", self.actions, self.events)
    }
}

/// A mass function over a frame, identified by a label.
///
/// Focal elements are kept in canonical order so every fold over them sums in
/// the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    id: String,
    shape: Shape,
    focals: Vec<(FocalElement, f64)>,
}

impl Evidence {
    pub fn new(id: impl Into<String>, focals: Vec<(FocalElement, f64)>) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidEvidence {
            id: id.clone(),
            reason,
        };
        if id.trim().is_empty() {
            return Err(invalid("empty id".into()));
        }
        let Some(shape) = focals.first().map(|(f, _)| f.shape()) else {
            return Err(invalid("no focal elements".into()));
        };
        let mut sorted = focals;
        sorted.sort_by_key(|a| a.0);
        for (i, (focal, mass)) in sorted.iter().enumerate() {
            if focal.shape() != shape {
                return Err(Error::FrameMismatch);
            }
            if focal.is_empty() {
                return Err(invalid("empty focal element".into()));
            }
            if !(*mass > 0.0 && *mass <= 1.0) {
                return Err(invalid(format!("mass {mass} outside (0, 1]")));
            }
            if i > 0 && sorted[i - 1].0 == *focal {
                return Err(invalid("focal element listed twice".into()));
            }
        }
        let total: f64 = sorted.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("masses sum to {total}, expected 1")));
        }
        Ok(Evidence {
            id,
            shape,
            focals: sorted,
        })
    }

    /// `{(focal, support), (Θ, 1 - support)}`.
    pub fn simple_support(
        id: impl Into<String>,
        focal: FocalElement,
        support: f64,
    ) -> Result<Self> {
        let full = FocalElement::full(focal.shape());
        if focal == full || support == 1.0 {
            let focal = if support == 1.0 { focal } else { full };
            return Evidence::new(id, vec![(focal, 1.0)]);
        }
        Evidence::new(id, vec![(focal, support), (full, 1.0 - support)])
    }

    /// The mass function with all mass on Θ.
    pub fn vacuous(id: impl Into<String>, shape: Shape) -> Self {
        Evidence {
            id: id.into(),
            shape,
            focals: vec![(FocalElement::full(shape), 1.0)],
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn focals(&self) -> &[(FocalElement, f64)] {
        &self.focals
    }

    /// The single event this evidence certainly refers to, if every focal
    /// element other than Θ names that same one event.
    pub fn specific_event(&self) -> Option<usize> {
        let mut event = None;
        for (focal, _) in self.focals.iter().filter(|(f, _)| !f.is_full()) {
            let e = focal.single_event()?;
            match event {
                None => event = Some(e),
                Some(prev) if prev != e => return None,
                Some(_) => {}
            }
        }
        event
    }
}

/// Unnormalized result of combining a sequence of evidences.
///
/// Mass landing on empty intersections is collected in `conflict` rather than
/// redistributed, so `conflict + Σ masses = 1` holds throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedState {
    shape: Shape,
    focals: BTreeMap<FocalElement, f64>,
    conflict: f64,
}

impl CombinedState {
    /// `Θ: 1`, no conflict. Neutral element of [`CombinedState::combine`].
    pub fn unit(shape: Shape) -> Self {
        CombinedState {
            shape,
            focals: BTreeMap::from([(FocalElement::full(shape), 1.0)]),
            conflict: 0.0,
        }
    }

    /// Folds `combine` over `evidences`, starting from the unit state.
    pub fn of<'a, I>(shape: Shape, evidences: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Evidence>,
    {
        evidences
            .into_iter()
            .try_fold(CombinedState::unit(shape), |state, e| state.combine(e))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn conflict(&self) -> f64 {
        self.conflict
    }

    pub fn focals(&self) -> impl Iterator<Item = (&FocalElement, f64)> + '_ {
        self.focals.iter().map(|(f, m)| (f, *m))
    }

    pub fn focal_count(&self) -> usize {
        self.focals.len()
    }

    pub fn mass_of(&self, focal: &FocalElement) -> f64 {
        self.focals.get(focal).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.focals.values().sum()
    }

    /// Dempster's rule without normalization.
    pub fn combine(&self, e: &Evidence) -> Result<CombinedState> {
        if e.shape() != self.shape {
            return Err(Error::FrameMismatch);
        }
        let mut focals = BTreeMap::new();
        let mut conflict = self.conflict;
        for (a, ma) in &self.focals {
            for (b, mb) in e.focals() {
                let meet = a.intersect(b)?;
                let mass = ma * mb;
                if meet.is_empty() {
                    conflict += mass;
                } else {
                    *focals.entry(meet).or_insert(0.0) += mass;
                }
            }
        }
        Ok(CombinedState {
            shape: self.shape,
            focals,
            conflict,
        })
    }

    /// Conflict that combining `e` into this state would add:
    /// `Σ m(A_k)·m(e^p)` over pairs with empty intersection.
    pub fn added_conflict(&self, e: &Evidence) -> Result<f64> {
        if e.shape() != self.shape {
            return Err(Error::FrameMismatch);
        }
        let mut added = 0.0;
        for (a, ma) in &self.focals {
            for (b, mb) in e.focals() {
                if a.intersect(b)?.is_empty() {
                    added += ma * mb;
                }
            }
        }
        Ok(added)
    }

    /// Focal masses divided by `1 - conflict`.
    pub fn normalized(&self) -> Option<Vec<(FocalElement, f64)>> {
        let keep = 1.0 - self.conflict;
        if keep <= MASS_TOLERANCE {
            return None;
        }
        Some(self.focals.iter().map(|(f, m)| (*f, m / keep)).collect())
    }
}

fn common_shape(evidences: &[Evidence]) -> Result<Option<Shape>> {
    let Some(first) = evidences.first() else {
        return Ok(None);
    };
    if evidences.iter().any(|e| e.shape() != first.shape()) {
        return Err(Error::FrameMismatch);
    }
    Ok(Some(first.shape()))
}

/// Unnormalized combination of all `evidences`.
pub fn fold(evidences: &[Evidence]) -> Result<CombinedState> {
    let shape = common_shape(evidences)?
        .ok_or_else(|| Error::Domain("cannot combine an empty list of evidences".into()))?;
    CombinedState::of(shape, evidences)
}

/// Conflict `c` of Dempster's rule applied to all `evidences`.
pub fn subset_conflict(evidences: &[Evidence]) -> Result<f64> {
    Ok(fold(evidences)?.conflict())
}

/// Merges evidences that are specific to the same single event.
///
/// Each group of two or more such evidences is replaced, at the position of
/// its first member, by their normalized Dempster combination whose id joins
/// the member ids with `+`. Everything else passes through unchanged.
pub fn precombine_specific(evidences: &[Evidence]) -> Result<Vec<Evidence>> {
    common_shape(evidences)?;
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in evidences.iter().enumerate() {
        if let Some(event) = e.specific_event() {
            groups.entry(event).or_default().push(i);
        }
    }
    let mut replacement: BTreeMap<usize, Evidence> = BTreeMap::new();
    let mut dropped = vec![false; evidences.len()];
    for members in groups.values().filter(|m| m.len() > 1) {
        let group: Vec<Evidence> = members.iter().map(|&i| evidences[i].clone()).collect();
        let ids: Vec<String> = group.iter().map(|e| e.id().to_string()).collect();
        let combined = fold(&group)?;
        let focals = combined
            .normalized()
            .ok_or_else(|| Error::ImpossibleEvidence { ids: ids.clone() })?;
        replacement.insert(members[0], renormalized(ids.join("+"), focals)?);
        for &i in &members[1..] {
            dropped[i] = true;
        }
    }
    Ok(evidences
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped[*i])
        .map(|(i, e)| replacement.remove(&i).unwrap_or_else(|| e.clone()))
        .collect())
}

// Normalization leaves a rounding residue; fold it into the largest focal so
// the result passes the mass-sum check exactly.
fn renormalized(id: String, mut focals: Vec<(FocalElement, f64)>) -> Result<Evidence> {
    let total: f64 = focals.iter().map(|(_, m)| m).sum();
    if let Some(largest) = focals.iter_mut().max_by(|a, b| a.1.total_cmp(&b.1)) {
        largest.1 += 1.0 - total;
    }
    Evidence::new(id, focals)
}
