//! Constructive first-stage heuristics.

use rand::Rng;

use crate::model::Instance;
use crate::tu::Tu;

/// Random first vehicle, then repeatedly a vehicle with the least added
/// overload, ties broken by the least idle time and then uniformly.
pub fn naive_greedy<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Vec<usize> {
    let n = instance.horizon();
    if n == 0 {
        return Vec::new();
    }
    let first = rng.random_range(0..n);
    naive_greedy_from(instance, first, rng)
}

pub(crate) fn naive_greedy_from<R: Rng + ?Sized>(instance: &Instance, first: usize, rng: &mut R) -> Vec<usize> {
    let n = instance.horizon();
    let k = instance.n_stations();
    let c = instance.cycle;
    let lengths: Vec<Tu> = instance.stations.iter().map(|s| s.length).collect();

    let mut z = vec![Tu::ZERO; k];
    let mut seq = Vec::with_capacity(n);
    let mut left: Vec<usize> = (0..n).filter(|&v| v != first).collect();
    let place = |v: usize, z: &mut [Tu]| {
        for (s, zs) in z.iter_mut().enumerate() {
            let b = instance.vehicles[v].processing[s];
            let w = (*zs + b - lengths[s]).pos();
            *zs = (*zs + b - w - c).pos();
        }
    };
    place(first, &mut z);
    seq.push(first);

    let mut best: Vec<usize> = Vec::with_capacity(n);
    while !left.is_empty() {
        best.clear();
        let mut best_key = (Tu::from_tenths(i64::MAX), Tu::from_tenths(i64::MAX));
        for (idx, &v) in left.iter().enumerate() {
            let mut over = Tu::ZERO;
            let mut idle = Tu::ZERO;
            for s in 0..k {
                let reach = z[s] + instance.vehicles[v].processing[s];
                over += (reach - lengths[s]).pos();
                idle += (c - reach).pos();
            }
            let key = (over, idle);
            if key < best_key {
                best_key = key;
                best.clear();
            }
            if key == best_key {
                best.push(idx);
            }
        }
        let idx = best[rng.random_range(0..best.len())];
        let v = left.remove(idx);
        place(v, &mut z);
        seq.push(v);
    }
    seq
}

/// Deterministic spreading heuristic: vehicles ranked by their highest
/// station utilization `max_k p_kv / c` (descending, index on ties) are laid
/// out in bit-reversed rank order, interleaving heavy and light vehicles.
pub fn utilization_greedy(instance: &Instance) -> Vec<usize> {
    let n = instance.horizon();
    let mut ranked: Vec<usize> = (0..n).collect();
    // max_k p_kv / c orders the same as max_k p_kv
    let score = |v: usize| {
        instance.vehicles[v]
            .processing
            .iter()
            .copied()
            .max()
            .unwrap_or(Tu::ZERO)
    };
    ranked.sort_by(|&a, &b| score(b).cmp(&score(a)).then(a.cmp(&b)));
    bit_reversal_order(n).into_iter().map(|rank| ranked[rank]).collect()
}

/// Ranks `0..n` in the order of their bit-reversed indices over the
/// smallest enclosing power of two.
pub(crate) fn bit_reversal_order(n: usize) -> Vec<usize> {
    if n <= 1 {
        return (0..n).collect();
    }
    let bits = usize::BITS - (n - 1).leading_zeros();
    (0..1usize << bits)
        .map(|i| i.reverse_bits() >> (usize::BITS - bits))
        .filter(|&r| r < n)
        .collect()
}
