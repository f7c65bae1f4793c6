//! Small SSGs with probabilities in {1/4, 1/2, 3/4}: every game with one
//! or two non-sink vertices, seeded samples with three and four, and a few
//! slow-absorbing chains.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ssg::{SsgInstance, Vertex, VertexKind};
use crate::rational::{q, Q};

fn splits() -> Vec<Vec<Q>> {
    vec![
        vec![q(1, 4), q(3, 4)],
        vec![q(1, 2), q(1, 2)],
        vec![q(3, 4), q(1, 4)],
        vec![q(1, 4), q(1, 4), q(1, 2)],
        vec![q(1, 4), q(1, 2), q(1, 4)],
        vec![q(1, 2), q(1, 4), q(1, 4)],
        vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
    ]
}

fn subsets(k: usize, items: &[usize]) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut with: Vec<Vec<usize>> = subsets(k - 1, &items[1..]);
    for s in &mut with {
        s.insert(0, items[0]);
    }
    with.extend(subsets(k, &items[1..]));
    with
}

/// Every non-sink vertex over `targets`, up to reordering of edges.
fn vertex_options(targets: &[usize]) -> Vec<Vertex> {
    let mut out = Vec::new();
    for kind in [VertexKind::Max, VertexKind::Min] {
        for k in 1..=targets.len() {
            for s in subsets(k, targets) {
                out.push(SsgInstance::player(kind, &s));
            }
        }
    }
    for split in splits() {
        for s in subsets(split.len(), targets) {
            let edges: Vec<(usize, Q)> = s.into_iter().zip(split.iter().cloned()).collect();
            out.push(SsgInstance::random(&edges));
        }
    }
    out
}

fn with_sinks(inner: Vec<Vertex>) -> SsgInstance {
    let mut vs = inner;
    vs.push(SsgInstance::sink(VertexKind::ZeroSink));
    vs.push(SsgInstance::sink(VertexKind::OneSink));
    SsgInstance::new(vs, 0).expect("catalog games are well formed")
}

pub fn random_ssg<R: Rng>(n: usize, rng: &mut R) -> SsgInstance {
    let targets: Vec<usize> = (0..n + 2).collect();
    let splits: Vec<Vec<Q>> = splits().into_iter().filter(|s| s.len() <= targets.len()).collect();
    let inner = (0..n)
        .map(|_| match rng.gen_range(0..3) {
            0 | 1 => {
                let kind = if rng.gen_bool(0.5) { VertexKind::Max } else { VertexKind::Min };
                let k = rng.gen_range(1..=3);
                let s: Vec<usize> = targets.choose_multiple(rng, k).copied().collect();
                SsgInstance::player(kind, &s)
            }
            _ => {
                let split = splits.choose(rng).expect("non-empty");
                let s: Vec<usize> = targets.choose_multiple(rng, split.len()).copied().collect();
                SsgInstance::random(&s.into_iter().zip(split.iter().cloned()).collect::<Vec<_>>())
            }
        })
        .collect();
    with_sinks(inner)
}

/// A chain of `n` random vertices that stay put with probability 3/4 and
/// advance otherwise; the last one advances into `exit`.
pub fn slow_chain(n: usize, exit_to_one: bool) -> SsgInstance {
    let (zero, one) = (n, n + 1);
    let inner = (0..n)
        .map(|i| {
            let next = if i + 1 < n { i + 1 } else if exit_to_one { one } else { zero };
            SsgInstance::random(&[(i, q(3, 4)), (next, q(1, 4))])
        })
        .collect();
    with_sinks(inner)
}

pub const CATALOG_SEED: u64 = 0xc47a_1095;

/// The catalog used to certify the default precision plan.
pub fn ssg_catalog() -> Vec<(String, SsgInstance)> {
    let mut out = Vec::new();
    for (i, v) in vertex_options(&[0, 1, 2]).into_iter().enumerate() {
        out.push((format!("one/{i}"), with_sinks(vec![v])));
    }
    let two = vertex_options(&[0, 1, 2, 3]);
    for (a, va) in two.iter().enumerate() {
        for (b, vb) in two.iter().enumerate() {
            out.push((format!("two/{a}-{b}"), with_sinks(vec![va.clone(), vb.clone()])));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CATALOG_SEED);
    for i in 0..300 {
        out.push((format!("three/{i}"), random_ssg(3, &mut rng)));
    }
    for i in 0..40 {
        out.push((format!("four/{i}"), random_ssg(4, &mut rng)));
    }
    for n in 1..=4 {
        out.push((format!("chain/{n}/one"), slow_chain(n, true)));
        out.push((format!("chain/{n}/zero"), slow_chain(n, false)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let c = ssg_catalog();
        let ones = c.iter().filter(|(n, _)| n.starts_with("one/")).count();
        // 7 + 7 player vertices plus 3 * 3 two-way and 3 * 1 three-way splits.
        assert_eq!(ones, 26);
        assert!(c.iter().all(|(_, g)| g.inner_vertices().len() <= 4));
    }
}
