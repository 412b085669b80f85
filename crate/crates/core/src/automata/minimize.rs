//! Hopcroft partition refinement over colored complete automata.
//!
//! The color of a state is its acceptance bit for a DFA and the index of its
//! output for a DFAO; the same routine minimizes both.

use super::bfs_order;

pub(crate) struct Minimized {
    pub delta: Vec<u32>,
    pub colors: Vec<u64>,
}

/// Refinable partition of `0..n` (blocks are contiguous ranges of `elems`).
struct Partition {
    elems: Vec<u32>,
    loc: Vec<u32>,
    block: Vec<u32>,
    first: Vec<u32>,
    end: Vec<u32>,
    marked: Vec<u32>,
}

impl Partition {
    fn new(colors: &[u64]) -> Self {
        let n = colors.len();
        let mut elems: Vec<u32> = (0..n as u32).collect();
        elems.sort_by_key(|&q| (colors[q as usize], q));
        let mut loc = vec![0u32; n];
        let mut block = vec![0u32; n];
        let (mut first, mut end) = (Vec::new(), Vec::new());
        for (i, &q) in elems.iter().enumerate() {
            if i == 0 || colors[q as usize] != colors[elems[i - 1] as usize] {
                if i > 0 {
                    end.push(i as u32);
                }
                first.push(i as u32);
            }
            loc[q as usize] = i as u32;
            block[q as usize] = first.len() as u32 - 1;
        }
        end.push(n as u32);
        let marked = vec![0; first.len()];
        Partition {
            elems,
            loc,
            block,
            first,
            end,
            marked,
        }
    }

    fn num_blocks(&self) -> usize {
        self.first.len()
    }

    fn members(&self, b: usize) -> &[u32] {
        &self.elems[self.first[b] as usize..self.end[b] as usize]
    }

    /// Moves `q` into the marked prefix of its block; returns true when this
    /// is the first mark in that block.
    fn mark(&mut self, q: usize) -> bool {
        let b = self.block[q] as usize;
        let boundary = self.first[b] + self.marked[b];
        let pos = self.loc[q];
        if pos < boundary {
            return false;
        }
        let other = self.elems[boundary as usize];
        self.elems.swap(pos as usize, boundary as usize);
        self.loc[other as usize] = pos;
        self.loc[q] = boundary;
        self.marked[b] += 1;
        self.marked[b] == 1
    }

    /// Splits off the marked part of `b`; returns the new block if any.
    fn split(&mut self, b: usize) -> Option<usize> {
        let m = self.marked[b];
        self.marked[b] = 0;
        if m == self.end[b] - self.first[b] {
            return None;
        }
        let nb = self.first.len();
        self.first.push(self.first[b]);
        self.end.push(self.first[b] + m);
        self.marked.push(0);
        self.first[b] += m;
        for i in self.first[nb]..self.end[nb] {
            self.block[self.elems[i as usize] as usize] = nb as u32;
        }
        Some(nb)
    }

    fn size(&self, b: usize) -> u32 {
        self.end[b] - self.first[b]
    }
}

/// Returns the minimal automaton restricted to states reachable from
/// `initial`, renumbered breadth-first with the initial state as 0.
pub(crate) fn minimize_colored(
    alpha: usize,
    initial: usize,
    delta: &[u32],
    colors: &[u64],
) -> Minimized {
    // restrict to reachable states
    let total = colors.len();
    let order = bfs_order(total, alpha, initial, delta);
    let n = order.len();
    let mut index = vec![u32::MAX; total];
    for (i, &q) in order.iter().enumerate() {
        index[q] = i as u32;
    }
    let mut d = Vec::with_capacity(n * alpha);
    for &q in &order {
        for s in 0..alpha {
            d.push(index[delta[q * alpha + s] as usize]);
        }
    }
    let c: Vec<u64> = order.iter().map(|&q| colors[q]).collect();

    // inverse transitions in CSR layout, keyed by (symbol, target)
    let mut start = vec![0u32; alpha * n + 1];
    for q in 0..n {
        for s in 0..alpha {
            start[s * n + d[q * alpha + s] as usize + 1] += 1;
        }
    }
    for i in 1..start.len() {
        start[i] += start[i - 1];
    }
    let mut fill = start.clone();
    let mut preds = vec![0u32; n * alpha];
    for q in 0..n {
        for s in 0..alpha {
            let key = s * n + d[q * alpha + s] as usize;
            preds[fill[key] as usize] = q as u32;
            fill[key] += 1;
        }
    }

    let mut p = Partition::new(&c);
    let mut in_work = vec![true; p.num_blocks()];
    let mut work: Vec<usize> = (0..p.num_blocks()).collect();
    let mut touched = Vec::new();
    while let Some(b) = work.pop() {
        in_work[b] = false;
        let splitter: Vec<u32> = p.members(b).to_vec();
        for s in 0..alpha {
            for &t in &splitter {
                let key = s * n + t as usize;
                for &q in &preds[start[key] as usize..start[key + 1] as usize] {
                    if p.mark(q as usize) {
                        touched.push(p.block[q as usize] as usize);
                    }
                }
            }
            for tb in touched.drain(..) {
                if let Some(nb) = p.split(tb) {
                    if in_work[tb] {
                        in_work.push(true);
                        work.push(nb);
                    } else {
                        let smaller = if p.size(nb) <= p.size(tb) { nb } else { tb };
                        in_work.push(false);
                        in_work[smaller] = true;
                        work.push(smaller);
                    }
                }
            }
        }
    }

    // quotient, then canonical renumbering
    let nb = p.num_blocks();
    let mut qdelta = vec![0u32; nb * alpha];
    let mut qcolors = vec![0u64; nb];
    for b in 0..nb {
        let rep = p.members(b)[0] as usize;
        qcolors[b] = c[rep];
        for s in 0..alpha {
            qdelta[b * alpha + s] = p.block[d[rep * alpha + s] as usize];
        }
    }
    let qinit = p.block[0] as usize;
    let border = bfs_order(nb, alpha, qinit, &qdelta);
    let mut bindex = vec![0u32; nb];
    for (i, &b) in border.iter().enumerate() {
        bindex[b] = i as u32;
    }
    let mut out_delta = Vec::with_capacity(nb * alpha);
    for &b in &border {
        for s in 0..alpha {
            out_delta.push(bindex[qdelta[b * alpha + s] as usize]);
        }
    }
    Minimized {
        delta: out_delta,
        colors: border.iter().map(|&b| qcolors[b]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_equivalent_states() {
        // 0 -a-> 1, 0 -b-> 2, 1,2 accepting sinks; 3 unreachable.
        let delta = vec![1, 2, 1, 1, 2, 2, 3, 3];
        let m = minimize_colored(2, 0, &delta, &[0, 1, 1, 1]);
        assert_eq!(m.colors, vec![0, 1]);
        assert_eq!(m.delta, vec![1, 1, 1, 1]);
    }

    #[test]
    fn distinguishes_by_future() {
        // counts ones mod 3, accepting on 0
        let delta = vec![0, 1, 1, 2, 2, 0];
        let m = minimize_colored(2, 0, &delta, &[1, 0, 0]);
        assert_eq!(m.colors.len(), 3);
    }
}
