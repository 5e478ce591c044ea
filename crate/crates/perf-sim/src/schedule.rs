//! Shift-add scheduling of a 2-D transform for the tap-by-tap engine.
//!
//! The full transform T·s·Tᵀ unrolled in time is a set of dot products with
//! constant integer coefficients. The PE accumulates one (shifted) term per
//! cycle; coefficients that are not powers of two cost one cycle per nonzero
//! digit of their canonical signed-digit form (5·a = (a≪2) + a). Common
//! subexpression elimination shares coefficient pairs that appear in several
//! dots over the same input vector (greedy, most-frequent pair first).

use winograd_core::IntMat;

/// Nonzero digits of the canonical signed-digit representation of |c|.
fn csd_terms(c: i64) -> u32 {
    let mut v = c.unsigned_abs();
    let mut count = 0u32;
    while v != 0 {
        if v & 1 == 1 {
            count += 1;
            // canonical SD: runs of ones collapse via +1 carry
            if v & 2 == 2 {
                v += 1;
            }
        }
        v >>= 1;
    }
    count
}

#[derive(Clone)]
struct Dot {
    /// (input slot, coefficient) pairs, coefficient != 0
    terms: Vec<(usize, i64)>,
}

/// Ops to evaluate a set of dot products over one shared input vector,
/// after greedy pairwise sharing. Each term costs its signed-digit count;
/// a shared pair is materialized once (cost of its two terms) and replaces
/// both terms with one in every dot that uses it.
fn schedule_shared_vector(rows: &IntMat) -> u64 {
    let mut dots: Vec<Dot> = (0..rows.rows())
        .map(|i| Dot {
            terms: rows
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(j, &c)| (j, c))
                .collect(),
        })
        .collect();

    let mut extra_slots = rows.cols();
    let mut shared_cost = 0u64;
    loop {
        // count normalized pairs (sorted by slot, scaled so the first coeff
        // is positive and the pair is primitive); BTreeMap keeps the greedy
        // tie-breaking deterministic
        use std::collections::BTreeMap;
        let mut counts: BTreeMap<(usize, usize, i64, i64), usize> = BTreeMap::new();
        for d in &dots {
            for a in 0..d.terms.len() {
                for b in a + 1..d.terms.len() {
                    if let Some(key) = pair_key(d.terms[a], d.terms[b]) {
                        *counts.entry(key).or_insert(0) += 1;
                    }
                }
            }
        }
        // extracting a pair saves (occurrences − materialization) cycles;
        // materialization costs the pair's own term count
        let best = counts
            .into_iter()
            .max_by_key(|&((_, _, c1, c2), n)| {
                n as i64 - (csd_terms(c1) + csd_terms(c2)) as i64
            })
            .filter(|&((_, _, c1, c2), n)| n as i64 > (csd_terms(c1) + csd_terms(c2)) as i64);
        let Some(((s1, s2, c1, c2), _)) = best else {
            break;
        };
        shared_cost += (csd_terms(c1) + csd_terms(c2)) as u64;
        let new_slot = extra_slots;
        extra_slots += 1;
        for d in &mut dots {
            let mut found: Option<(usize, usize, i64)> = None;
            for a in 0..d.terms.len() {
                for b in a + 1..d.terms.len() {
                    if let Some((ka, kb, kc1, kc2)) = pair_key(d.terms[a], d.terms[b]) {
                        if (ka, kb, kc1, kc2) == (s1, s2, c1, c2) {
                            // scale of this occurrence relative to the key
                            let scale = d.terms[a].1 / if d.terms[a].0 == ka { c1 } else { c2 };
                            found = Some((a, b, scale));
                            break;
                        }
                    }
                }
                if found.is_some() {
                    break;
                }
            }
            if let Some((a, b, scale)) = found {
                d.terms.remove(b);
                d.terms.remove(a);
                d.terms.push((new_slot, scale));
            }
        }
    }

    shared_cost
        + dots
            .iter()
            .map(|d| d.terms.iter().map(|&(_, c)| csd_terms(c) as u64).sum::<u64>())
            .sum::<u64>()
}

fn pair_key(a: (usize, i64), b: (usize, i64)) -> Option<(usize, usize, i64, i64)> {
    let ((s1, mut c1), (s2, mut c2)) = if a.0 < b.0 { (a, b) } else { (b, a) };
    if s1 == s2 {
        return None;
    }
    let g = gcd(c1.unsigned_abs(), c2.unsigned_abs()) as i64;
    c1 /= g;
    c2 /= g;
    if c1 < 0 {
        c1 = -c1;
        c2 = -c2;
    }
    Some((s1, s2, c1, c2))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Total shift-add ops for one full 2-D transform T·s·Tᵀ with an in_cols-wide
/// tile: stage one applies T's rows to each of the tile's `in_cols` columns,
/// stage two applies them to each of the `h` intermediate rows.
pub fn shift_add_ops_2d(t_int: &IntMat, in_cols: usize) -> u64 {
    let per_vector = schedule_shared_vector(t_int);
    let stage1 = per_vector * in_cols as u64;
    let stage2 = per_vector * t_int.rows() as u64;
    stage1 + stage2
}
