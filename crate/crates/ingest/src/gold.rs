use std::collections::BTreeSet;

/// Outcome of [`normalize`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldCleanup {
    pub sets: Vec<BTreeSet<usize>>,
    pub duplicates: usize,
    pub supersets: usize,
    pub capped: usize,
}

/// Sorts gold sets by (size, members), drops duplicates and strict
/// supersets of other sets, then keeps at most `cap` sets (smallest first).
pub fn normalize(mut sets: Vec<BTreeSet<usize>>, cap: Option<usize>) -> GoldCleanup {
    sets.retain(|s| !s.is_empty());
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let before = sets.len();
    sets.dedup();
    let duplicates = before - sets.len();

    let mut kept: Vec<BTreeSet<usize>> = Vec::with_capacity(sets.len());
    let mut supersets = 0;
    // Sorted by size, so any subset of `s` is already in `kept`.
    for s in sets {
        if kept.iter().any(|k| k.is_subset(&s)) {
            supersets += 1;
        } else {
            kept.push(s);
        }
    }
    let mut capped = 0;
    if let Some(cap) = cap {
        if kept.len() > cap {
            capped = kept.len() - cap;
            kept.truncate(cap);
        }
    }
    GoldCleanup { sets: kept, duplicates, supersets, capped }
}

/// Claim-level sets from per-sub-claim alternatives: one alternative per
/// sub-claim, unioned. Stops expanding once `limit` raw combinations have
/// been produced. Returns `None` if some sub-claim has no alternative.
pub fn cross_product(alternatives: &[Vec<BTreeSet<usize>>], limit: usize) -> Option<Vec<BTreeSet<usize>>> {
    if alternatives.iter().any(Vec::is_empty) {
        return None;
    }
    let mut acc: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    for alts in alternatives {
        let mut next = Vec::new();
        for partial in &acc {
            for alt in alts {
                let mut u = partial.clone();
                u.extend(alt.iter().copied());
                next.push(u);
            }
        }
        // Prune between steps so the expansion stays small.
        next = normalize(next, None).sets;
        if next.len() > limit {
            next.truncate(limit);
        }
        acc = next;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn prunes_supersets_and_duplicates() {
        let out = normalize(vec![s(&[1, 2]), s(&[1]), s(&[3, 4]), s(&[4, 3]), s(&[])], None);
        assert_eq!(out.sets, vec![s(&[1]), s(&[3, 4])]);
        assert_eq!((out.duplicates, out.supersets), (1, 1));
    }

    #[test]
    fn cap_keeps_smallest() {
        let sets: Vec<_> = (0..20).map(|i| s(&[i, 100 + i, 200 + i][..1 + i % 3])).collect();
        let out = normalize(sets, Some(16));
        assert_eq!(out.sets.len(), 16);
        assert_eq!(out.capped, 4);
        assert!(out.sets.windows(2).all(|w| w[0].len() <= w[1].len()));
    }

    #[test]
    fn cross_product_enumerates() {
        let alts = vec![vec![s(&[0]), s(&[1])], vec![s(&[2])]];
        assert_eq!(cross_product(&alts, 100).unwrap(), vec![s(&[0, 2]), s(&[1, 2])]);
        assert!(cross_product(&[vec![s(&[0])], vec![]], 100).is_none());
    }
}
