use alloc::vec::Vec;

/// Average-linkage agglomerative clustering of `n` items with a row-major
/// distance matrix, stopped at `g` clusters.
///
/// A cluster is identified by its smallest member. Each step merges the pair
/// with the smallest `(distance, smaller id, larger id)`. Clusters come back
/// ordered by smallest member, members ascending.
pub fn average_linkage(dist: &[f64], n: usize, g: usize) -> Vec<Vec<usize>> {
    assert_eq!(dist.len(), n * n, "distance matrix must be n x n");
    let g = g.clamp(1, n.max(1));
    let mut d = dist.to_vec();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(alloc::vec![i])).collect();
    let mut active = n;
    while active > g {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if members[i].is_none() {
                continue;
            }
            for j in i + 1..n {
                if members[j].is_none() {
                    continue;
                }
                let v = d[i * n + j];
                let better = match best {
                    None => true,
                    Some((bv, _, _)) => v < bv,
                };
                if better {
                    best = Some((v, i, j));
                }
            }
        }
        // Slots are indexed by cluster id and scanned in (i, j) order, so the
        // strict `<` above already applies the id tie-break.
        let (_, a, b) = best.expect("at least two active clusters");
        let nb = members[b].take().expect("active");
        let na_len = members[a].as_ref().expect("active").len() as f64;
        let nb_len = nb.len() as f64;
        for k in 0..n {
            if k == a || members[k].is_none() {
                continue;
            }
            let v = (na_len * d[a * n + k] + nb_len * d[b * n + k]) / (na_len + nb_len);
            d[a * n + k] = v;
            d[k * n + a] = v;
        }
        members[a].as_mut().expect("active").extend(nb);
        active -= 1;
    }
    members
        .into_iter()
        .flatten()
        .map(|mut m| {
            m.sort_unstable();
            m
        })
        .collect()
}
