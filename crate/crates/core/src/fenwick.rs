//! Fenwick tree over non-negative f64 masses, supporting point updates,
//! appends and sampling by cumulative mass in O(log n).

#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<f64>,
    len: usize,
}

impl Fenwick {
    pub fn with_capacity(capacity: usize) -> Self {
        Fenwick {
            tree: Vec::with_capacity(capacity + 1),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Append a new slot with the given mass at index `len()`.
    pub fn push(&mut self, value: f64) {
        self.len += 1;
        let i = self.len; // 1-based position
        // Internal node i aggregates the trailing lowbit(i) values; all of
        // them are already present since we only ever append.
        let mut agg = value;
        let lb = i & i.wrapping_neg();
        let mut j = 1;
        while j < lb {
            agg += self.tree[i - j];
            j <<= 1;
        }
        if self.tree.len() <= i {
            self.tree.resize(i + 1, 0.0);
        }
        self.tree[i] = agg;
    }

    /// Add `delta` to the mass at 0-based index `idx`.
    pub fn add(&mut self, idx: usize, delta: f64) {
        debug_assert!(idx < self.len);
        let mut i = idx + 1;
        while i <= self.len {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of masses over 0-based indices `0..=idx`.
    pub fn prefix_sum(&self, idx: usize) -> f64 {
        debug_assert!(idx < self.len);
        let mut i = idx + 1;
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    pub fn total(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.prefix_sum(self.len - 1)
        }
    }

    /// Smallest 0-based index i with prefix_sum(i) > target. Requires
    /// target < total(); zero-mass slots are skipped by construction. If
    /// rounding pushes the descent past the end, fall back to the last
    /// positive-mass slot.
    pub fn search(&self, target: f64) -> usize {
        let mut pos = 0usize; // 1-based, exclusive prefix already consumed
        let mut rem = target;
        let mut step = self.len.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.len && self.tree[next] <= rem {
                rem -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        if pos < self.len {
            return pos;
        }
        let mut idx = self.len - 1;
        while idx > 0 && self.value(idx) <= 0.0 {
            idx -= 1;
        }
        idx
    }

    /// Current mass at 0-based index `idx` (reconstructed from prefix sums).
    pub fn value(&self, idx: usize) -> f64 {
        if idx == 0 {
            self.prefix_sum(0)
        } else {
            self.prefix_sum(idx) - self.prefix_sum(idx - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_match_naive() {
        let values = [0.5, 0.0, 2.0, 1.25, 3.0, 0.0, 0.25, 7.0, 1.0];
        let mut fw = Fenwick::with_capacity(values.len());
        for &v in &values {
            fw.push(v);
        }
        let mut acc = 0.0;
        for (i, &v) in values.iter().enumerate() {
            acc += v;
            assert!((fw.prefix_sum(i) - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn add_then_search_selects_by_mass() {
        let mut fw = Fenwick::with_capacity(4);
        for &v in &[1.0, 0.0, 2.0, 1.0] {
            fw.push(v);
        }
        fw.add(1, 4.0); // masses now 1,4,2,1, total 8
        assert_eq!(fw.search(0.5), 0);
        assert_eq!(fw.search(1.0), 1);
        assert_eq!(fw.search(4.999), 1);
        assert_eq!(fw.search(5.0), 2);
        assert_eq!(fw.search(6.999), 2);
        assert_eq!(fw.search(7.5), 3);
    }

    #[test]
    fn search_agrees_with_linear_scan() {
        use rand::Rng;
        let mut rng = crate::rng::master_rng(99);
        let mut fw = Fenwick::with_capacity(0);
        let mut values: Vec<f64> = Vec::new();
        for step in 0..200 {
            let v = if step % 5 == 0 { 0.0 } else { rng.random::<f64>() };
            fw.push(v);
            values.push(v);
            if step % 3 == 0 {
                let idx = rng.random_range(0..values.len());
                fw.add(idx, 0.5);
                values[idx] += 0.5;
            }
            let total: f64 = values.iter().sum();
            if total == 0.0 {
                continue;
            }
            for _ in 0..4 {
                let target = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut expect = values.len() - 1;
                for (i, &v) in values.iter().enumerate() {
                    acc += v;
                    if acc > target {
                        expect = i;
                        break;
                    }
                }
                assert_eq!(fw.search(target), expect, "step {step}");
            }
        }
    }
}
