/// Symmetric, irreflexive adjacency stored as one bitset row per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut adj = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                adj.add_edge(i, j);
            }
        }
        adj
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    /// Adds the undirected edge `{i, j}`; self loops are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
        self.rows[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.row(i).iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn edge_count(&self) -> u64 {
        (0..self.n).map(|i| self.degree(i)).sum::<u64>() / 2
    }

    /// Neighbours of `i` with index strictly greater than `from`.
    fn neighbours_after(&self, i: usize, from: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.row(i);
        let start = from + 1;
        (start / 64..self.words).flat_map(move |w| {
            let mut word = row[w];
            if w == start / 64 {
                word &= u64::MAX.checked_shl((start % 64) as u32).unwrap_or(0);
            }
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbours_after(i, i).map(move |j| (i, j)))
    }

    /// Number of unordered triples `i < j < k` with all three edges present.
    pub fn count_triangles(&self) -> u64 {
        let mut total = 0u64;
        for (i, j) in self.edges() {
            let (ri, rj) = (self.row(i), self.row(j));
            let start = j + 1;
            for w in start / 64..self.words {
                let mut common = ri[w] & rj[w];
                if w == start / 64 {
                    common &= u64::MAX.checked_shl((start % 64) as u32).unwrap_or(0);
                }
                total += common.count_ones() as u64;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_triangles(adj: &Adjacency) -> u64 {
        let n = adj.node_count();
        let mut t = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if adj.has_edge(i, j) && adj.has_edge(j, k) && adj.has_edge(i, k) {
                        t += 1;
                    }
                }
            }
        }
        t
    }

    #[test]
    fn complete_and_empty() {
        assert_eq!(Adjacency::complete(4).count_triangles(), 4);
        assert_eq!(Adjacency::empty(10).count_triangles(), 0);
        assert_eq!(
            Adjacency::complete(130).count_triangles(),
            130 * 129 * 128 / 6
        );
        assert_eq!(Adjacency::complete(0).edge_count(), 0);
    }

    #[test]
    fn symmetric_and_irreflexive() {
        let mut a = Adjacency::empty(70);
        a.add_edge(3, 65);
        a.add_edge(5, 5);
        assert!(a.has_edge(65, 3));
        assert!(!a.has_edge(5, 5));
        assert_eq!(a.edges().collect::<Vec<_>>(), vec![(3, 65)]);
    }

    #[test]
    fn counting_matches_triple_scan_across_word_boundaries() {
        let mut a = Adjacency::empty(150);
        let mut x: u64 = 0x9E37_79B9_7F4A_7C15;
        for i in 0..150 {
            for j in i + 1..150 {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                if x.is_multiple_of(5) {
                    a.add_edge(i, j);
                }
            }
        }
        assert_eq!(a.count_triangles(), brute_triangles(&a));
    }
}
