use std::cmp::Ordering;

use evirank_core::Scalar;

/// Descending by score, NaN last, ties by ascending index.
pub fn rank_desc<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| cmp_desc(scores[a], scores[b]).then(a.cmp(&b)));
    idx
}

fn cmp_desc<T: Scalar>(a: T, b: T) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => b.partial_cmp(&a).expect("non-NaN values compare"),
    }
}

/// `head` followed by every index in `0..n` not in `head`, in reading order.
pub fn complete_with_reading_order(mut head: Vec<usize>, n: usize) -> Vec<usize> {
    let mut placed = vec![false; n];
    for &i in &head {
        placed[i] = true;
    }
    head.extend((0..n).filter(|i| !placed[*i]));
    head
}
