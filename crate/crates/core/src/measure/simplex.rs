//! Network simplex for dense transportation problems.
//!
//! A port of the LEMON primal network simplex (block search pivoting,
//! strongly feasible spanning trees, thread-list tree updates) specialised
//! to a complete bipartite graph with uncapacitated arcs. Arcs are implicit,
//! so only node-indexed arrays and one state byte per arc are stored.

use num_bigint::BigInt;

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const INF: i128 = i128::MAX;
const NONE: usize = usize::MAX;

#[derive(Debug)]
pub(crate) struct Solution {
    /// `(source, sink, flow)` for every arc with positive flow.
    pub flows: Vec<(usize, usize, i128)>,
    /// Node potentials; sources first, then sinks.
    pub pi: Vec<i128>,
    pub objective: BigInt,
}

struct Simplex<'a, C: Fn(usize, usize) -> i64> {
    n1: usize,
    n2: usize,
    arc_num: usize,
    root: usize,
    cost: &'a C,
    art_cost: i64,
    /// Whether the artificial arc of a node points to the root.
    art_up: Vec<bool>,
    state: Vec<i8>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_flow: Vec<i128>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty_revs: Vec<usize>,
    pi: Vec<i128>,
    block_size: usize,
    next_arc: usize,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i128,
}

impl<'a, C: Fn(usize, usize) -> i64> Simplex<'a, C> {
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.n2
        } else {
            let u = e - self.arc_num;
            if self.art_up[u] {
                u
            } else {
                self.root
            }
        }
    }

    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.n1 + e % self.n2
        } else {
            let u = e - self.arc_num;
            if self.art_up[u] {
                self.root
            } else {
                u
            }
        }
    }

    fn arc_cost(&self, e: usize) -> i128 {
        if e < self.arc_num {
            (self.cost)(e / self.n2, e % self.n2) as i128
        } else if self.art_up[e - self.arc_num] {
            0
        } else {
            self.art_cost as i128
        }
    }

    fn new(supply: &[i128], n1: usize, n2: usize, cost: &'a C, max_cost: i64) -> Self {
        let node_num = n1 + n2;
        let arc_num = n1 * n2;
        let root = node_num;
        let art_cost = (max_cost + 1) * (node_num as i64 + 1);
        let mut s = Simplex {
            n1,
            n2,
            arc_num,
            root,
            cost,
            art_cost,
            art_up: vec![false; node_num],
            state: vec![STATE_LOWER; arc_num],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            pred_flow: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            pi: vec![0; node_num + 1],
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0,
        };
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        for u in 0..node_num {
            s.parent[u] = root;
            s.pred[u] = arc_num + u;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            if supply[u] >= 0 {
                s.art_up[u] = true;
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = 0;
                s.pred_flow[u] = supply[u];
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost as i128;
                s.pred_flow[u] = -supply[u];
            }
        }
        s
    }

    fn reduced(&self, e: usize) -> i128 {
        let i = e / self.n2;
        let j = self.n1 + e % self.n2;
        (self.cost)(i, e % self.n2) as i128 + self.pi[i] - self.pi[j]
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min: i128 = 0;
        let mut cnt = self.block_size;
        let mut e = self.next_arc;
        let mut found = false;
        for pass in 0..2 {
            let (start, end) = if pass == 0 { (self.next_arc, self.arc_num) } else { (0, self.next_arc) };
            e = start;
            while e != end {
                if self.state[e] != STATE_TREE {
                    let c = self.reduced(e);
                    if c < min {
                        min = c;
                        self.in_arc = e;
                    }
                }
                cnt -= 1;
                if cnt == 0 {
                    if min < 0 {
                        found = true;
                        break;
                    }
                    cnt = self.block_size;
                }
                e += 1;
            }
            if found {
                break;
            }
        }
        if !found && min >= 0 {
            return false;
        }
        self.next_arc = if found { e } else { self.next_arc };
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        // entering arcs are always at their lower bound
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        self.delta = INF;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            let d = if self.pred_dir[u] == DIR_DOWN { INF } else { self.pred_flow[u] };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        u = second;
        while u != self.join {
            let d = if self.pred_dir[u] == DIR_UP { INF } else { self.pred_flow[u] };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    /// Pushes `delta` around the cycle; returns the new flow on the entering arc.
    fn change_flow(&mut self) -> i128 {
        let val = self.delta;
        if val > 0 {
            let mut u = self.source(self.in_arc);
            while u != self.join {
                self.pred_flow[u] -= self.pred_dir[u] as i128 * val;
                u = self.parent[u];
            }
            u = self.target(self.in_arc);
            while u != self.join {
                self.pred_flow[u] += self.pred_dir[u] as i128 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        debug_assert_eq!(self.pred_flow[self.u_out], 0);
        if out < self.arc_num {
            self.state[out] = STATE_LOWER;
        }
        val
    }

    fn update_tree_structure(&mut self, in_flow: i128) {
        let (u_in, v_in, u_out, join, in_arc) = (self.u_in, self.v_in, self.u_out, self.join, self.in_arc);
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];
        let in_dir = if u_in == self.source(in_arc) { DIR_UP } else { DIR_DOWN };

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.pred_flow[u_in] = in_flow;
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in { self.thread[old_last_succ] } else { self.thread[v_in] };
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);
                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;
                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;
                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;
            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }
            let mut tmp_sc: isize = 0;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            let mut p = self.parent[u];
            while u != u_in {
                self.pred[u] = self.pred[p];
                self.pred_flow[u] = self.pred_flow[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc += self.succ_num[u] as isize - self.succ_num[p] as isize;
                self.succ_num[u] = tmp_sc as usize;
                self.last_succ[p] = tmp_ls;
                u = p;
                p = self.parent[u];
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.pred_flow[u_in] = in_flow;
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }
        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }
        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - self.pred_dir[self.u_in] as i128 * self.arc_cost(self.in_arc);
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn run(&mut self) {
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            assert!(change && self.delta < INF, "transport problem cannot be unbounded");
            let in_flow = self.change_flow();
            self.update_tree_structure(in_flow);
            self.update_potential();
        }
    }
}

/// Solves `min sum c_ij x_ij` subject to row sums `a` and column sums `b` (equal totals).
pub(crate) fn solve<C: Fn(usize, usize) -> i64>(a: &[i128], b: &[i128], cost: &C) -> Solution {
    let (n1, n2) = (a.len(), b.len());
    let mut max_cost = 0i64;
    for i in 0..n1 {
        for j in 0..n2 {
            max_cost = max_cost.max(cost(i, j));
        }
    }
    let mut supply: Vec<i128> = a.to_vec();
    supply.extend(b.iter().map(|x| -x));
    let mut s = Simplex::new(&supply, n1, n2, cost, max_cost);
    s.run();
    let mut flows = Vec::new();
    let mut objective = BigInt::from(0);
    for u in 0..n1 + n2 {
        let e = s.pred[u];
        let f = s.pred_flow[u];
        if e < s.arc_num {
            if f > 0 {
                let (i, j) = (e / n2, e % n2);
                objective += BigInt::from(f) * BigInt::from(cost(i, j));
                flows.push((i, j, f));
            }
        } else {
            assert_eq!(f, 0, "artificial arc carries flow: supplies do not balance");
        }
    }
    flows.sort_unstable();
    s.pi.truncate(n1 + n2);
    Solution { flows, pi: s.pi, objective }
}

/// Checks that `pi` certifies optimality: nonnegative reduced costs everywhere, zero on used arcs.
pub(crate) fn certify<C: Fn(usize, usize) -> i64>(sol: &Solution, n1: usize, n2: usize, cost: &C) -> bool {
    for i in 0..n1 {
        for j in 0..n2 {
            if cost(i, j) as i128 + sol.pi[i] - sol.pi[n1 + j] < 0 {
                return false;
            }
        }
    }
    sol.flows.iter().all(|&(i, j, _)| cost(i, j) as i128 + sol.pi[i] - sol.pi[n1 + j] == 0)
}
