//! Oriented link diagrams in PD form, with the crossing surgeries (switch,
//! smooth, Reidemeister rewrites) that the skein engine is built on.
//!
//! A crossing stores its four incident arc labels counterclockwise starting
//! from the incoming under-strand: `[a, b, c, d]` has the under-strand running
//! a -> c. A positive crossing carries the over-strand d -> b (an arrow coming
//! from the left passes over), a negative one b -> d. Arc labels are arbitrary
//! distinct positive integers; each label is produced by exactly one out-slot
//! and consumed by exactly one in-slot. Zero-crossing unknot components are
//! counted in `free_loops` rather than labeled.

mod moves;
mod skein;

pub use moves::{reidemeister, Move};
pub use skein::{
    jones_at_level, jones_laurent, skein_evaluate, skein_generic, skein_generic_all_pivots,
    witten_residuals, Laurent1, Laurent2, SkeinSpec, SkeinValue, MAX_CROSSINGS,
};

use crate::expr::poly::CanonError;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KnotError {
    #[error("bad PD input: {0}")]
    Parse(String),
    #[error("crossing sign must be 1 or -1, got {0}")]
    BadSign(i64),
    #[error("arc {0} does not appear exactly twice")]
    ArcDegree(usize),
    #[error("arc {0} is not traversed once in and once out")]
    Orientation(usize),
    #[error("input says {given} components, diagram traces {traced}")]
    ComponentCount { given: usize, traced: usize },
    #[error("no crossing with index {0}")]
    InvalidCrossing(usize),
    #[error("no arc labeled {0}")]
    UnknownArc(usize),
    #[error("move does not apply: {0}")]
    PatternNotPresent(&'static str),
    #[error("diagram has {0} crossings, limit is {MAX_CROSSINGS}")]
    TooManyCrossings(usize),
    #[error("level must be a positive integer")]
    BadLevel,
    #[error("value left the Laurent ring: {0}")]
    NotLaurent(String),
    #[error(transparent)]
    Canon(#[from] CanonError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub sign: i8,
    pub arcs: [usize; 4],
}

impl Crossing {
    pub fn new(sign: i8, arcs: [usize; 4]) -> Result<Self, KnotError> {
        if sign != 1 && sign != -1 {
            return Err(KnotError::BadSign(sign as i64));
        }
        Ok(Crossing { sign, arcs })
    }

    /// Slot indices that consume an arc: always the under-in 0, plus the
    /// over-in (3 for positive, 1 for negative).
    pub fn in_slots(&self) -> [usize; 2] {
        [0, if self.sign > 0 { 3 } else { 1 }]
    }

    pub fn out_slots(&self) -> [usize; 2] {
        [2, if self.sign > 0 { 1 } else { 3 }]
    }

    /// Out-slot reached by the strand entering at `slot`.
    pub fn continuation(&self, slot: usize) -> usize {
        if slot == 0 {
            2
        } else if self.sign > 0 {
            1
        } else {
            3
        }
    }

    pub fn over_slots(&self) -> [usize; 2] {
        if self.sign > 0 {
            [3, 1]
        } else {
            [1, 3]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDiagram {
    pub crossings: Vec<Crossing>,
    pub free_loops: usize,
    /// arc label -> component id, ids numbered by smallest arc in the
    /// component; free loops are not included.
    pub component_of: BTreeMap<usize, usize>,
    /// traced components, excluding free loops
    pub components: usize,
}

impl LinkDiagram {
    pub fn new(crossings: Vec<Crossing>, free_loops: usize) -> Result<Self, KnotError> {
        for c in &crossings {
            if c.sign != 1 && c.sign != -1 {
                return Err(KnotError::BadSign(c.sign as i64));
            }
        }
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        for c in &crossings {
            for &a in &c.arcs {
                *degree.entry(a).or_insert(0) += 1;
            }
        }
        if let Some((&a, _)) = degree.iter().find(|(_, &n)| n != 2) {
            return Err(KnotError::ArcDegree(a));
        }
        let mut in_at: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut out_seen: BTreeSet<usize> = BTreeSet::new();
        for (idx, c) in crossings.iter().enumerate() {
            for slot in c.in_slots() {
                if in_at.insert(c.arcs[slot], (idx, slot)).is_some() {
                    return Err(KnotError::Orientation(c.arcs[slot]));
                }
            }
            for slot in c.out_slots() {
                if !out_seen.insert(c.arcs[slot]) {
                    return Err(KnotError::Orientation(c.arcs[slot]));
                }
            }
        }
        for &a in degree.keys() {
            if !in_at.contains_key(&a) || !out_seen.contains(&a) {
                return Err(KnotError::Orientation(a));
            }
        }

        let mut component_of = BTreeMap::new();
        let mut components = 0;
        for &start in degree.keys() {
            if component_of.contains_key(&start) {
                continue;
            }
            let id = components;
            components += 1;
            let mut cur = start;
            loop {
                component_of.insert(cur, id);
                let (idx, slot) = in_at[&cur];
                cur = crossings[idx].arcs[crossings[idx].continuation(slot)];
                if cur == start {
                    break;
                }
            }
        }
        Ok(LinkDiagram {
            crossings,
            free_loops,
            component_of,
            components,
        })
    }

    pub fn unknot() -> Self {
        LinkDiagram::new(Vec::new(), 1).expect("empty diagram")
    }

    pub fn unlink(n: usize) -> Self {
        LinkDiagram::new(Vec::new(), n).expect("empty diagram")
    }

    /// Total components including free loops.
    pub fn total_components(&self) -> usize {
        self.components + self.free_loops
    }

    pub fn max_arc(&self) -> usize {
        self.crossings
            .iter()
            .flat_map(|c| c.arcs.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn consumer_of(&self, arc: usize) -> Option<(usize, usize)> {
        for (idx, c) in self.crossings.iter().enumerate() {
            for slot in c.in_slots() {
                if c.arcs[slot] == arc {
                    return Some((idx, slot));
                }
            }
        }
        None
    }

    /// Crossings first reached on the under-strand when components are walked
    /// from their smallest arc in component order. A diagram with none is
    /// descending, hence an unlink.
    pub fn bad_crossings(&self) -> Vec<usize> {
        let mut in_at: HashMap<usize, (usize, usize)> = HashMap::new();
        for (idx, c) in self.crossings.iter().enumerate() {
            for slot in c.in_slots() {
                in_at.insert(c.arcs[slot], (idx, slot));
            }
        }
        let mut seen = vec![false; self.crossings.len()];
        let mut visited: BTreeSet<usize> = BTreeSet::new();
        let mut bad = Vec::new();
        let arcs: BTreeSet<usize> = in_at.keys().copied().collect();
        for &start in &arcs {
            if visited.contains(&start) {
                continue;
            }
            let mut cur = start;
            loop {
                visited.insert(cur);
                let (idx, slot) = in_at[&cur];
                if !seen[idx] {
                    seen[idx] = true;
                    if slot == 0 {
                        bad.push(idx);
                    }
                }
                cur = self.crossings[idx].arcs[self.crossings[idx].continuation(slot)];
                if cur == start {
                    break;
                }
            }
        }
        bad.sort_unstable();
        bad
    }
}

/// n_+ - n_-.
pub fn writhe(d: &LinkDiagram) -> i64 {
    d.crossings.iter().map(|c| c.sign as i64).sum()
}

/// Same crossing point with the over/under roles exchanged: the arc list
/// rotates so the new under-in leads, and the sign flips.
pub fn switch_crossing(d: &LinkDiagram, c: usize) -> Result<LinkDiagram, KnotError> {
    let cr = *d
        .crossings
        .get(c)
        .ok_or(KnotError::InvalidCrossing(c))?;
    let [a, b, cc, dd] = cr.arcs;
    let new = if cr.sign > 0 {
        Crossing {
            sign: -1,
            arcs: [dd, a, b, cc],
        }
    } else {
        Crossing {
            sign: 1,
            arcs: [b, cc, dd, a],
        }
    };
    let mut crossings = d.crossings.clone();
    crossings[c] = new;
    LinkDiagram::new(crossings, d.free_loops)
}

/// Oriented smoothing: incoming strands reconnect to the outgoing slots that
/// respect orientation, deleting the crossing. Merged arcs keep the smallest
/// label; a merge class that no longer touches any crossing becomes a free
/// loop.
pub fn smooth_crossing(d: &LinkDiagram, c: usize) -> Result<LinkDiagram, KnotError> {
    let cr = *d
        .crossings
        .get(c)
        .ok_or(KnotError::InvalidCrossing(c))?;
    let [a, b, cc, dd] = cr.arcs;
    let pairs = if cr.sign > 0 {
        [(a, b), (dd, cc)]
    } else {
        [(a, dd), (b, cc)]
    };
    let mut rest: Vec<Crossing> = d
        .crossings
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != c)
        .map(|(_, cr)| *cr)
        .collect();
    let loops = merge_arcs(&mut rest, &pairs.iter().map(|&(p, q)| vec![p, q]).collect::<Vec<_>>());
    LinkDiagram::new(rest, d.free_loops + loops)
}

/// Unify each listed group of arc labels (smallest survives) and rewrite the
/// crossings in place. Returns how many unified classes vanished from the
/// diagram entirely, i.e. closed up into free loops.
pub(crate) fn merge_arcs(crossings: &mut [Crossing], groups: &[Vec<usize>]) -> usize {
    let mut repr: HashMap<usize, usize> = HashMap::new();
    for g in groups {
        for &a in g {
            repr.entry(a).or_insert(a);
        }
    }
    fn find(repr: &mut HashMap<usize, usize>, a: usize) -> usize {
        let p = repr[&a];
        if p == a {
            return a;
        }
        let r = find(repr, p);
        repr.insert(a, r);
        r
    }
    for g in groups {
        for w in g.windows(2) {
            let (ra, rb) = (find(&mut repr, w[0]), find(&mut repr, w[1]));
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            repr.insert(hi, lo);
        }
    }
    let members: Vec<usize> = repr.keys().copied().collect();
    let mut roots: BTreeSet<usize> = BTreeSet::new();
    let mut map: HashMap<usize, usize> = HashMap::new();
    for a in members {
        let r = find(&mut repr, a);
        roots.insert(r);
        map.insert(a, r);
    }
    let mut alive: BTreeSet<usize> = BTreeSet::new();
    for cr in crossings.iter_mut() {
        for slot in 0..4 {
            if let Some(&r) = map.get(&cr.arcs[slot]) {
                cr.arcs[slot] = r;
            }
            alive.insert(cr.arcs[slot]);
        }
    }
    roots.iter().filter(|r| !alive.contains(r)).count()
}

/// The three diagrams of the skein relation at one crossing of `d`; `d`
/// itself fills the slot matching its sign there.
#[derive(Clone, Debug)]
pub struct SkeinTriple {
    pub plus: LinkDiagram,
    pub minus: LinkDiagram,
    pub zero: LinkDiagram,
}

pub fn skein_triple(d: &LinkDiagram, c: usize) -> Result<SkeinTriple, KnotError> {
    let cr = d
        .crossings
        .get(c)
        .ok_or(KnotError::InvalidCrossing(c))?;
    let switched = switch_crossing(d, c)?;
    let zero = smooth_crossing(d, c)?;
    Ok(if cr.sign > 0 {
        SkeinTriple {
            plus: d.clone(),
            minus: switched,
            zero,
        }
    } else {
        SkeinTriple {
            plus: switched,
            minus: d.clone(),
            zero,
        }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PdFile {
    components: usize,
    crossings: Vec<PdCrossing>,
    #[serde(default)]
    free_loops: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PdCrossing {
    sign: i64,
    arcs: [u64; 4],
}

/// Read the PD JSON format: {"components": c, "crossings": [{"sign": 1,
/// "arcs": [a,b,c,d]}, ...], "free_loops": m}. The component count is checked
/// against the traced diagram.
pub fn parse_pd(json: &str) -> Result<LinkDiagram, KnotError> {
    let file: PdFile = serde_json::from_str(json).map_err(|e| KnotError::Parse(e.to_string()))?;
    let mut crossings = Vec::with_capacity(file.crossings.len());
    for c in file.crossings {
        if c.sign != 1 && c.sign != -1 {
            return Err(KnotError::BadSign(c.sign));
        }
        crossings.push(Crossing {
            sign: c.sign as i8,
            arcs: [
                c.arcs[0] as usize,
                c.arcs[1] as usize,
                c.arcs[2] as usize,
                c.arcs[3] as usize,
            ],
        });
    }
    let d = LinkDiagram::new(crossings, file.free_loops)?;
    let traced = d.total_components();
    if traced != file.components {
        return Err(KnotError::ComponentCount {
            given: file.components,
            traced,
        });
    }
    Ok(d)
}

/// Stock diagrams used across tests and the command-line examples.
pub mod diagrams {
    use super::{Crossing, LinkDiagram};

    fn build(signed: &[(i8, [usize; 4])], loops: usize) -> LinkDiagram {
        let crossings = signed
            .iter()
            .map(|&(sign, arcs)| Crossing { sign, arcs })
            .collect();
        LinkDiagram::new(crossings, loops).expect("stock diagram")
    }

    /// Positive Hopf link, writhe +2.
    pub fn hopf_positive() -> LinkDiagram {
        build(&[(1, [1, 4, 2, 3]), (1, [4, 1, 3, 2])], 0)
    }

    /// Negative Hopf link, writhe -2: the positive one with both crossings
    /// switched.
    pub fn hopf_negative() -> LinkDiagram {
        build(&[(-1, [3, 1, 4, 2]), (-1, [2, 4, 1, 3])], 0)
    }

    /// Right-handed trefoil as the closure of three positive braid crossings,
    /// writhe +3.
    pub fn trefoil_positive() -> LinkDiagram {
        build(
            &[(1, [2, 4, 3, 1]), (1, [4, 6, 5, 3]), (1, [6, 2, 1, 5])],
            0,
        )
    }

    /// Mirror of the positive trefoil, writhe -3.
    pub fn trefoil_negative() -> LinkDiagram {
        build(
            &[(-1, [1, 2, 4, 3]), (-1, [3, 4, 6, 5]), (-1, [5, 6, 2, 1])],
            0,
        )
    }

    /// Unknot drawn with one negative kink, writhe -1.
    pub fn kinked_unknot_negative() -> LinkDiagram {
        build(&[(-1, [1, 2, 2, 1])], 0)
    }

    /// Unknot drawn with one positive kink, writhe +1.
    pub fn kinked_unknot_positive() -> LinkDiagram {
        build(&[(1, [1, 1, 2, 2])], 0)
    }

    /// Three-component diagram with a clean triangle: component A runs over
    /// strands B and C, which cross each other inside the triangle and once
    /// more outside. Admits a Reidemeister III slide at (0, 1, 2).
    pub fn triangle_slide() -> LinkDiagram {
        // Y: A over B, X: B over C, Z: A over C, W: closing B/C crossing,
        // K: kink keeping A's two triangle visits on distinct arcs
        build(
            &[
                (1, [11, 22, 12, 24]), // Y
                (1, [31, 13, 32, 12]), // X
                (-1, [32, 22, 33, 21]), // Z
                (-1, [13, 33, 11, 31]), // W
                (1, [21, 24, 23, 23]), // K
            ],
            0,
        )
    }

    /// Granny knot: connect sum of two positive trefoils, writhe +6.
    pub fn granny() -> LinkDiagram {
        build(
            &[
                (1, [2, 4, 3, 1]),
                (1, [4, 12, 5, 3]),
                (1, [6, 2, 1, 5]),
                (1, [8, 10, 9, 7]),
                (1, [10, 6, 11, 9]),
                (1, [12, 8, 7, 11]),
            ],
            0,
        )
    }
}
