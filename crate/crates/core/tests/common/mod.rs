#![allow(dead_code)]

use metaconflict::{DomainDistribution, Evidence, FocalElement, Frame, Shape};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The four burglary witnesses and the 0.6 / 0.4 prior on one or two events,
/// built directly rather than through the corpus loader.
pub fn baker_street() -> (Frame, Vec<Evidence>, DomainDistribution) {
    let f = Frame::with_event_count(["BO", "BI", "R"], 2).unwrap();
    let e1 = Evidence::simple_support("e1", f.focal(&["BO"], &["E1"]).unwrap(), 0.8).unwrap();
    let e2 = Evidence::simple_support("e2", f.focal(&["BI"], &["E1", "E2"]).unwrap(), 0.7).unwrap();
    let e3 = Evidence::simple_support("e3", f.focal(&["R"], &["E2"]).unwrap(), 0.6).unwrap();
    let e4 = Evidence::simple_support("e4", f.focal(&["BO", "BI"], &["E1", "E2"]).unwrap(), 0.5)
        .unwrap();
    let d = DomainDistribution::new([(1, 0.6), (2, 0.4)]).unwrap();
    (f, vec![e1, e2, e3, e4], d)
}

pub fn corpus_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpora")
        .join(name)
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusSpec {
    pub max_evidences: usize,
    pub max_actions: usize,
    pub max_events: usize,
    /// Focal elements per evidence, Θ included when present.
    pub max_focals: usize,
    /// Every evidence keeps some mass on Θ.
    pub with_theta: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            max_evidences: 7,
            max_actions: 4,
            max_events: 3,
            max_focals: 3,
            with_theta: true,
        }
    }
}

pub struct RandomCorpus {
    pub shape: Shape,
    pub evidences: Vec<Evidence>,
    pub distribution: DomainDistribution,
}

fn random_bits(rng: &mut TestRng, mask: u64, allowed: u64) -> u64 {
    loop {
        let bits = rng.gen::<u64>() & mask & allowed;
        if bits != 0 {
            return bits;
        }
    }
}

/// Random nonempty, non-Θ focal element using only `allowed_actions`.
pub fn random_focal(rng: &mut TestRng, shape: Shape, allowed_actions: u64) -> FocalElement {
    loop {
        let actions = random_bits(rng, shape.action_mask(), allowed_actions);
        let events = random_bits(rng, shape.event_mask(), u64::MAX);
        let f = FocalElement::new(shape, actions, events).unwrap();
        if !f.is_full() {
            return f;
        }
    }
}

pub fn random_evidence_over(
    rng: &mut TestRng,
    shape: Shape,
    id: String,
    max_focals: usize,
    with_theta: bool,
    allowed_actions: u64,
) -> Evidence {
    let specific = if with_theta {
        rng.gen_range(1..max_focals.max(2))
    } else {
        rng.gen_range(1..=max_focals)
    };
    let mut focals: Vec<FocalElement> = Vec::new();
    for _ in 0..specific * 4 {
        if focals.len() == specific {
            break;
        }
        let f = random_focal(rng, shape, allowed_actions);
        if !focals.contains(&f) {
            focals.push(f);
        }
    }
    if with_theta {
        focals.push(FocalElement::full(shape));
    }
    let weights: Vec<f64> = focals.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut masses: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = masses[..masses.len() - 1].iter().sum();
    *masses.last_mut().unwrap() = 1.0 - head;
    Evidence::new(id, focals.into_iter().zip(masses).collect()).unwrap()
}

/// Random prior over `1..=n` with between one and three supported counts.
pub fn random_distribution(rng: &mut TestRng, n: usize) -> DomainDistribution {
    let mut counts: Vec<usize> = (1..=n).collect();
    counts.shuffle(rng);
    let support = rng.gen_range(1..=n.min(3));
    counts.truncate(support);
    counts.sort_unstable();
    let weights: Vec<f64> = counts.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut pairs: Vec<(usize, f64)> = counts
        .iter()
        .zip(&weights)
        .map(|(&c, w)| (c, w / total))
        .collect();
    let head: f64 = pairs[..pairs.len() - 1].iter().map(|p| p.1).sum();
    pairs.last_mut().unwrap().1 = 1.0 - head;
    DomainDistribution::new(pairs).unwrap()
}

pub fn random_corpus(rng: &mut TestRng, spec: CorpusSpec) -> RandomCorpus {
    let n = rng.gen_range(1..=spec.max_evidences);
    let actions = rng.gen_range(2..=spec.max_actions);
    let events = rng.gen_range(1..=spec.max_events);
    let shape = Shape::new(actions, events).unwrap();
    let evidences = (0..n)
        .map(|i| {
            random_evidence_over(
                rng,
                shape,
                format!("e{}", i + 1),
                spec.max_focals,
                spec.with_theta,
                u64::MAX,
            )
        })
        .collect();
    RandomCorpus {
        shape,
        evidences,
        distribution: random_distribution(rng, n),
    }
}

pub fn subset_of(evidences: &[Evidence], members: &[usize]) -> Vec<Evidence> {
    members.iter().map(|&q| evidences[q].clone()).collect()
}
