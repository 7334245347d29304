//! Small combinatorial helpers: binomials, m-subset enumeration, and
//! canonical enumeration of set partitions into equal-size blocks.

use num_bigint::BigUint;
use num_traits::One;

/// C(n, k) as u128, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial_big(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of ways to split `n` labelled items into unordered blocks of
/// size `block`: n! / (block!^(n/block) (n/block)!). Zero when `block`
/// does not divide `n`.
pub fn equal_block_partitions(n: usize, block: usize) -> BigUint {
    if block == 0 || !n.is_multiple_of(block) {
        return BigUint::ZERO;
    }
    let parts = n / block;
    let denom = factorial_big(block).pow(parts as u32) * factorial_big(parts);
    factorial_big(n) / denom
}

/// Calls `f` on every `m`-subset of `pool`, in lexicographic order of
/// positions within `pool`.
pub fn for_each_combination(pool: &[usize], m: usize, mut f: impl FnMut(&[usize])) {
    if m > pool.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    let mut current: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
    loop {
        f(&current);
        // advance the rightmost index that still has room
        let Some(i) = (0..m).rev().find(|&i| idx[i] < pool.len() - m + i) else {
            return;
        };
        idx[i] += 1;
        current[i] = pool[idx[i]];
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
            current[j] = pool[idx[j]];
        }
    }
}

/// All `m`-subsets of `pool` (small inputs only).
pub fn combinations(pool: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_combination(pool, m, |c| out.push(c.to_vec()));
    out
}

/// Enumerates every partition of `items` into blocks of size `block`, each
/// in canonical form (ascending within a block, blocks ordered by their
/// smallest element).
pub fn for_each_equal_block_partition(
    items: &[usize],
    block: usize,
    mut f: impl FnMut(&[Vec<usize>]),
) {
    assert!(block > 0 && items.len().is_multiple_of(block));
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mut parts = Vec::with_capacity(items.len() / block);
    recurse(&sorted, block, &mut parts, &mut f);

    fn recurse(
        remaining: &[usize],
        block: usize,
        parts: &mut Vec<Vec<usize>>,
        f: &mut impl FnMut(&[Vec<usize>]),
    ) {
        let Some((&head, rest)) = remaining.split_first() else {
            f(parts);
            return;
        };
        for mates in combinations(rest, block - 1) {
            let mut part = Vec::with_capacity(block);
            part.push(head);
            part.extend_from_slice(&mates);
            let left: Vec<usize> = rest
                .iter()
                .copied()
                .filter(|x| !mates.contains(x))
                .collect();
            parts.push(part);
            recurse(&left, block, parts, f);
            parts.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 1), 6);
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(binomial(99, 3), 156849);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial_big(59, 3), BigUint::from(32509u32));
    }

    #[test]
    fn combination_walk_is_complete_and_ordered() {
        let pool = [2, 4, 7, 9, 11];
        let all = combinations(&pool, 3);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![2, 4, 7]);
        assert_eq!(all[9], vec![7, 9, 11]);
        assert_eq!(combinations(&pool, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(&pool, 5).len(), 1);
        assert!(combinations(&pool, 6).is_empty());
    }

    #[test]
    fn partition_counts_match_closed_form() {
        for (n, b, expect) in [
            (6, 2, 15u32),
            (4, 2, 3),
            (12, 3, 15400),
            (9, 3, 280),
            (8, 4, 35),
        ] {
            let items: Vec<usize> = (0..n).collect();
            let mut count = 0u32;
            for_each_equal_block_partition(&items, b, |parts| {
                assert!(parts.iter().all(|p| p.len() == b));
                assert!(parts.windows(2).all(|w| w[0][0] < w[1][0]));
                count += 1;
            });
            assert_eq!(count, expect);
            assert_eq!(equal_block_partitions(n, b), BigUint::from(expect));
        }
    }
}
