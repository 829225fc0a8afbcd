//! Reidemeister rewrites on PD diagrams.
//!
//! Each move validates its applicability pattern before touching the diagram
//! and returns a freshly validated diagram, so a successful rewrite is always
//! a legal diagram of the same link. Arc labels created by insertions are
//! fresh (above the current maximum); labels merged by removals keep the
//! smallest member, so an insert followed by the matching removal returns the
//! original diagram verbatim.

use super::{merge_arcs, Crossing, KnotError, LinkDiagram};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    /// Put a kink of the given sign on an arc.
    R1Insert { arc: usize, sign: i8 },
    /// Delete a kink crossing.
    R1Remove { crossing: usize },
    /// Slide one strand over another: `over` passes above `under`.
    R2Insert { over: usize, under: usize },
    /// Cancel two crossings forming a bigon.
    R2Remove { c1: usize, c2: usize },
    /// Slide the strand running over (or under) both of its crossings in the
    /// triangle past the third crossing.
    R3 { c1: usize, c2: usize, c3: usize },
}

pub fn reidemeister(d: &LinkDiagram, mv: &Move) -> Result<LinkDiagram, KnotError> {
    match *mv {
        Move::R1Insert { arc, sign } => r1_insert(d, arc, sign),
        Move::R1Remove { crossing } => r1_remove(d, crossing),
        Move::R2Insert { over, under } => r2_insert(d, over, under),
        Move::R2Remove { c1, c2 } => r2_remove(d, c1, c2),
        Move::R3 { c1, c2, c3 } => r3(d, c1, c2, c3),
    }
}

/// The slot currently consuming `arc`, for rerouting its tail to a new label.
fn consumer(d: &LinkDiagram, arc: usize) -> Result<(usize, usize), KnotError> {
    d.consumer_of(arc).ok_or(KnotError::UnknownArc(arc))
}

fn r1_insert(d: &LinkDiagram, arc: usize, sign: i8) -> Result<LinkDiagram, KnotError> {
    if sign != 1 && sign != -1 {
        return Err(KnotError::BadSign(sign as i64));
    }
    let (idx, slot) = consumer(d, arc)?;
    let f = d.max_arc() + 1; // kink loop
    let g = d.max_arc() + 2; // continuation toward the old consumer
    let mut crossings = d.crossings.clone();
    crossings[idx].arcs[slot] = g;
    // strand order along the kink: arc, then f, then g
    crossings.push(if sign > 0 {
        Crossing {
            sign: 1,
            arcs: [arc, g, f, f],
        }
    } else {
        Crossing {
            sign: -1,
            arcs: [arc, f, f, g],
        }
    });
    LinkDiagram::new(crossings, d.free_loops)
}

/// Kink layouts: the loop arc occupies two adjacent slots. For either sign it
/// can sit on the under-out/over-in pair or on the over-out/under-in pair.
fn kink_parts(c: &Crossing) -> Option<(usize, [usize; 2])> {
    let [a, b, cc, dd] = c.arcs;
    if c.sign > 0 {
        if cc == dd {
            return Some((cc, [a, b]));
        }
        if a == b {
            return Some((a, [dd, cc]));
        }
    } else {
        if b == cc {
            return Some((b, [a, dd]));
        }
        if dd == a {
            return Some((dd, [b, cc]));
        }
    }
    None
}

fn r1_remove(d: &LinkDiagram, crossing: usize) -> Result<LinkDiagram, KnotError> {
    let cr = d
        .crossings
        .get(crossing)
        .ok_or(KnotError::InvalidCrossing(crossing))?;
    let (loop_arc, outer) = kink_parts(cr).ok_or(KnotError::PatternNotPresent(
        "crossing is not a kink: no adjacent repeated arc",
    ))?;
    let mut rest: Vec<Crossing> = d
        .crossings
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != crossing)
        .map(|(_, c)| *c)
        .collect();
    let loops = merge_arcs(&mut rest, &[vec![outer[0], loop_arc, outer[1]]]);
    LinkDiagram::new(rest, d.free_loops + loops)
}

fn r2_insert(d: &LinkDiagram, over: usize, under: usize) -> Result<LinkDiagram, KnotError> {
    if over == under {
        return Err(KnotError::PatternNotPresent(
            "the two strands of a slide must be distinct arcs",
        ));
    }
    let (oi, os) = consumer(d, over)?;
    let (ui, us) = consumer(d, under)?;
    let base = d.max_arc();
    let (m, n, f, h) = (base + 1, base + 2, base + 3, base + 4);
    let mut crossings = d.crossings.clone();
    crossings[oi].arcs[os] = f;
    crossings[ui].arcs[us] = h;
    // first crossing is positive, second negative; over runs over -> m -> f,
    // under runs under -> n -> h
    crossings.push(Crossing {
        sign: 1,
        arcs: [under, m, n, over],
    });
    crossings.push(Crossing {
        sign: -1,
        arcs: [n, m, h, f],
    });
    LinkDiagram::new(crossings, d.free_loops)
}

/// Slots of `c` occupied by `arc`, split into over-strand and under-strand
/// occurrences.
fn occupancy(c: &Crossing, arc: usize) -> (bool, bool) {
    let over = c.over_slots().iter().any(|&s| c.arcs[s] == arc);
    let under = c.arcs[0] == arc || c.arcs[2] == arc;
    (over, under)
}

fn shared_arcs(a: &Crossing, b: &Crossing) -> Vec<usize> {
    let mut v: Vec<usize> = a
        .arcs
        .iter()
        .copied()
        .filter(|x| b.arcs.contains(x))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn r2_remove(d: &LinkDiagram, c1: usize, c2: usize) -> Result<LinkDiagram, KnotError> {
    if c1 == c2 {
        return Err(KnotError::PatternNotPresent(
            "a bigon needs two distinct crossings",
        ));
    }
    let a = *d.crossings.get(c1).ok_or(KnotError::InvalidCrossing(c1))?;
    let b = *d.crossings.get(c2).ok_or(KnotError::InvalidCrossing(c2))?;
    if a.sign == b.sign {
        return Err(KnotError::PatternNotPresent(
            "bigon crossings must have opposite signs",
        ));
    }
    let shared = shared_arcs(&a, &b);
    if shared.len() != 2 {
        return Err(KnotError::PatternNotPresent(
            "bigon crossings must share exactly two arcs",
        ));
    }
    let classify = |arc: usize| -> Result<bool, KnotError> {
        let (oa, ua) = occupancy(&a, arc);
        let (ob, ub) = occupancy(&b, arc);
        if oa && ob {
            Ok(true)
        } else if ua && ub {
            Ok(false)
        } else {
            Err(KnotError::PatternNotPresent(
                "a shared arc changes strands between the two crossings",
            ))
        }
    };
    let (first_over, second_over) = (classify(shared[0])?, classify(shared[1])?);
    if first_over == second_over {
        return Err(KnotError::PatternNotPresent(
            "bigon needs one over-strand and one under-strand arc",
        ));
    }
    let (m, n) = if first_over {
        (shared[0], shared[1])
    } else {
        (shared[1], shared[0])
    };

    // outer arcs of each strand: where it enters the bigon and where it leaves
    let over_io = |c: &Crossing| -> (usize, usize) {
        let slots = c.over_slots();
        (c.arcs[slots[0]], c.arcs[slots[1]])
    };
    let under_io = |c: &Crossing| (c.arcs[0], c.arcs[2]);
    let strand_group = |io_a: (usize, usize), io_b: (usize, usize), mid: usize| {
        // mid is out of one crossing and into the other
        if io_a.1 == mid {
            vec![io_a.0, mid, io_b.1]
        } else {
            vec![io_b.0, mid, io_a.1]
        }
    };
    let over_group = strand_group(over_io(&a), over_io(&b), m);
    let under_group = strand_group(under_io(&a), under_io(&b), n);

    let mut rest: Vec<Crossing> = d
        .crossings
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != c1 && *i != c2)
        .map(|(_, c)| *c)
        .collect();
    let loops = merge_arcs(&mut rest, &[over_group, under_group]);
    LinkDiagram::new(rest, d.free_loops + loops)
}

fn r3(d: &LinkDiagram, c1: usize, c2: usize, c3: usize) -> Result<LinkDiagram, KnotError> {
    let idx = [c1, c2, c3];
    if c1 == c2 || c1 == c3 || c2 == c3 {
        return Err(KnotError::PatternNotPresent(
            "a triangle needs three distinct crossings",
        ));
    }
    let cr: Vec<Crossing> = idx
        .iter()
        .map(|&i| {
            d.crossings
                .get(i)
                .copied()
                .ok_or(KnotError::InvalidCrossing(i))
        })
        .collect::<Result<_, _>>()?;
    let pair_share = [
        shared_arcs(&cr[0], &cr[1]),
        shared_arcs(&cr[0], &cr[2]),
        shared_arcs(&cr[1], &cr[2]),
    ];
    if pair_share.iter().any(|s| s.len() != 1) {
        return Err(KnotError::PatternNotPresent(
            "each pair of triangle crossings must share exactly one arc",
        ));
    }
    let sides = [pair_share[0][0], pair_share[1][0], pair_share[2][0]];
    if sides[0] == sides[1] || sides[0] == sides[2] || sides[1] == sides[2] {
        return Err(KnotError::PatternNotPresent(
            "triangle sides must be three distinct arcs",
        ));
    }
    // Pairs of crossing positions (into idx/cr) and the shared arc between
    // them; find the one whose shared strand runs over at both ends. That
    // strand slides; the remaining crossing is the one it slides across.
    let pairs = [((0, 1), sides[0]), ((0, 2), sides[1]), ((1, 2), sides[2])];
    let mut slide = None;
    for &((i, j), arc) in &pairs {
        let (oi, _) = occupancy(&cr[i], arc);
        let (oj, _) = occupancy(&cr[j], arc);
        if oi && oj {
            slide = Some((i, j));
            break;
        }
    }
    let (yi, zi) = slide.ok_or(KnotError::PatternNotPresent(
        "no strand of the triangle is over at both of its crossings",
    ))?;
    let xi = 3 - yi - zi;
    let (y, z, x) = (idx[yi], idx[zi], idx[xi]);
    let beta = shared_between(&pair_share, yi, xi);
    let gamma = shared_between(&pair_share, zi, xi);

    let mut crossings = d.crossings.clone();
    reroute_strand(&mut crossings, y, x, beta)?;
    reroute_strand(&mut crossings, z, x, gamma)?;
    LinkDiagram::new(crossings, d.free_loops)
}

fn shared_between(share: &[Vec<usize>; 3], a: usize, b: usize) -> usize {
    let key = (a.min(b), a.max(b));
    match key {
        (0, 1) => share[0][0],
        (0, 2) => share[1][0],
        _ => share[2][0],
    }
}

/// In/out slots of the strand through `arc` at crossing `idx`.
fn strand_slots(c: &Crossing, arc: usize) -> Result<(usize, usize), KnotError> {
    if c.arcs[0] == arc || c.arcs[2] == arc {
        Ok((0, 2))
    } else {
        let [i, o] = if c.sign > 0 { [3, 1] } else { [1, 3] };
        if c.arcs[i] == arc || c.arcs[o] == arc {
            Ok((i, o))
        } else {
            Err(KnotError::UnknownArc(arc))
        }
    }
}

/// The triangle side `mid` runs between crossings `a` and `b`; swap the order
/// in which its strand visits them, keeping each crossing's other strand and
/// sign fixed.
fn reroute_strand(crossings: &mut [Crossing], a: usize, b: usize, mid: usize) -> Result<(), KnotError> {
    let (a_in, a_out) = strand_slots(&crossings[a], mid)?;
    let (b_in, b_out) = strand_slots(&crossings[b], mid)?;
    // identify which crossing the strand meets first
    let (first, f_in, f_out, second, s_in, s_out) = if crossings[a].arcs[a_out] == mid {
        (a, a_in, a_out, b, b_in, b_out)
    } else {
        (b, b_in, b_out, a, a_in, a_out)
    };
    let entry = crossings[first].arcs[f_in];
    let exit = crossings[second].arcs[s_out];
    crossings[second].arcs[s_in] = entry;
    crossings[second].arcs[s_out] = mid;
    crossings[first].arcs[f_in] = mid;
    crossings[first].arcs[f_out] = exit;
    Ok(())
}
