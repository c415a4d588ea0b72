/// Binary tree of partial sums over per-site rates. Parents are recomputed
/// from their children on every update, so the totals carry no drift.
#[derive(Debug, Clone)]
pub(crate) struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(values: &[f64]) -> Self {
        let leaves = values.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * leaves];
        nodes[leaves..leaves + values.len()].copy_from_slice(values);
        for i in (1..leaves).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        Self { leaves, nodes }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut node = self.leaves + i;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative interval contains `u` in `[0, total)`. Never
    /// returns a zero-weight leaf while the total is positive.
    pub fn find(&self, mut u: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            if (u < left && left > 0.0) || right <= 0.0 {
                node *= 2;
            } else {
                u -= left;
                node = 2 * node + 1;
            }
        }
        node - self.leaves
    }
}
