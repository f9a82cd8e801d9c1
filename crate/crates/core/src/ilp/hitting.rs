//! Exact minimum-cost hitting sets for the core-guided solver.
//!
//! A core is a set of objective variables at least one of which must be 1 in
//! every feasible solution. The cheapest set of variables meeting every core
//! is a lower bound on the optimum. Elements whose core memberships are
//! covered by a no-costlier element are discarded first; among equals the
//! highest variable index survives, which keeps later polishing short.

use alloc::vec;
use alloc::vec::Vec;

use super::model::VarId;
use super::propagate::Halt;
use crate::budget::{Interrupt, POLL_INTERVAL};

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
    fn count_new(&self, covered: &Bits) -> u32 {
        self.0
            .iter()
            .zip(&covered.0)
            .map(|(a, b)| (a & !b).count_ones())
            .sum()
    }
}

pub(crate) struct HittingSetProblem<'a> {
    pub cores: &'a [Vec<VarId>],
    pub cost: &'a [i64],
    /// Variables that must be in the set.
    pub forced: &'a [VarId],
    /// Variables that may not be used.
    pub excluded: &'a dyn Fn(VarId) -> bool,
    /// Only solutions costing at most this much are of interest.
    pub ceiling: Option<i64>,
}

pub(crate) enum HittingOutcome {
    Found {
        set: Vec<VarId>,
        cost: i64,
    },
    /// No hitting set exists (within the ceiling, if one was given).
    None,
}

struct Search<'a> {
    /// Per reduced element: which active cores it hits.
    sig: Vec<Bits>,
    cost: Vec<i64>,
    var: Vec<VarId>,
    /// Per active core: reduced elements in preference order.
    members: Vec<Vec<usize>>,
    num_cores: usize,
    best: Option<(Vec<usize>, i64)>,
    ceiling: i64,
    steps: u64,
    interrupt: &'a dyn Interrupt,
}

pub(crate) fn solve(
    problem: &HittingSetProblem<'_>,
    interrupt: &dyn Interrupt,
) -> Result<HittingOutcome, Halt> {
    let forced_cost: i64 = problem.forced.iter().map(|&v| problem.cost[v]).sum();
    let mut forced_sorted = problem.forced.to_vec();
    forced_sorted.sort_unstable();

    let mut active: Vec<Vec<VarId>> = Vec::new();
    for core in problem.cores {
        if core.iter().any(|v| forced_sorted.binary_search(v).is_ok()) {
            continue;
        }
        let mut usable: Vec<VarId> = core
            .iter()
            .copied()
            .filter(|&v| !(problem.excluded)(v))
            .collect();
        if usable.is_empty() {
            return Ok(HittingOutcome::None);
        }
        usable.sort_unstable();
        usable.dedup();
        active.push(usable);
    }
    let ceiling = problem.ceiling.map_or(i64::MAX, |c| c - forced_cost);
    if ceiling < 0 {
        return Ok(HittingOutcome::None);
    }
    if active.is_empty() {
        let mut set = forced_sorted;
        set.dedup();
        return Ok(HittingOutcome::Found {
            set,
            cost: forced_cost,
        });
    }
    active.sort();
    active.dedup();
    let num_cores = active.len();

    let mut elements: Vec<VarId> = active.iter().flatten().copied().collect();
    elements.sort_unstable();
    elements.dedup();
    let mut sigs: Vec<Bits> = elements.iter().map(|_| Bits::new(num_cores)).collect();
    for (ci, core) in active.iter().enumerate() {
        for v in core {
            let e = elements.binary_search(v).expect("element collected above");
            sigs[e].set(ci);
        }
    }

    // Cheapest first, then widest, then highest index.
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| {
        problem.cost[elements[a]]
            .cmp(&problem.cost[elements[b]])
            .then(sigs[b].count().cmp(&sigs[a].count()))
            .then(elements[b].cmp(&elements[a]))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &e in &order {
        let dominated = kept.iter().any(|&k| {
            problem.cost[elements[k]] <= problem.cost[elements[e]] && sigs[e].subset_of(&sigs[k])
        });
        if !dominated {
            kept.push(e);
        }
    }

    let mut search = Search {
        sig: kept.iter().map(|&e| sigs[e].clone()).collect(),
        cost: kept.iter().map(|&e| problem.cost[elements[e]]).collect(),
        var: kept.iter().map(|&e| elements[e]).collect(),
        members: vec![Vec::new(); num_cores],
        num_cores,
        best: None,
        ceiling,
        steps: 0,
        interrupt,
    };
    for (r, s) in search.sig.iter().enumerate() {
        for (ci, members) in search.members.iter_mut().enumerate() {
            if s.get(ci) {
                members.push(r);
            }
        }
    }
    if search.members.iter().any(|m| m.is_empty()) {
        return Ok(HittingOutcome::None);
    }

    search.greedy();
    let mut chosen = Vec::new();
    let covered = Bits::new(num_cores);
    let banned = Bits::new(search.var.len());
    search.branch(&mut chosen, 0, &covered, &banned)?;

    match search.best {
        Some((picked, cost)) => {
            let mut set: Vec<VarId> = picked.iter().map(|&r| search.var[r]).collect();
            set.extend_from_slice(&forced_sorted);
            set.sort_unstable();
            set.dedup();
            Ok(HittingOutcome::Found {
                set,
                cost: cost + forced_cost,
            })
        }
        None => Ok(HittingOutcome::None),
    }
}

impl Search<'_> {
    fn offer(&mut self, picked: &[usize], cost: i64) {
        if cost > self.ceiling {
            return;
        }
        if self.best.as_ref().is_none_or(|(_, c)| cost < *c) {
            self.best = Some((picked.to_vec(), cost));
        }
    }

    fn greedy(&mut self) {
        let mut covered = Bits::new(self.num_cores);
        let mut picked = Vec::new();
        let mut cost = 0;
        while (covered.count() as usize) < self.num_cores {
            let best = (0..self.var.len())
                .filter(|&r| self.sig[r].count_new(&covered) > 0)
                .min_by(|&a, &b| {
                    // Lowest cost per newly covered core.
                    let lhs = self.cost[a] * self.sig[b].count_new(&covered) as i64;
                    let rhs = self.cost[b] * self.sig[a].count_new(&covered) as i64;
                    lhs.cmp(&rhs)
                })
                .expect("every core has a member");
            covered.union_with(&self.sig[best]);
            cost += self.cost[best];
            picked.push(best);
        }
        self.offer(&picked, cost);
    }

    /// Sum of the cheapest usable member over a greedily chosen family of
    /// uncovered cores that share no usable member.
    fn lower_bound(&self, covered: &Bits, banned: &Bits) -> Option<i64> {
        let mut cores: Vec<(usize, usize)> = Vec::new();
        for ci in 0..self.num_cores {
            if covered.get(ci) {
                continue;
            }
            let usable = self.members[ci].iter().filter(|&&r| !banned.get(r)).count();
            if usable == 0 {
                return None;
            }
            cores.push((usable, ci));
        }
        cores.sort_unstable();
        let mut used = Bits::new(self.var.len());
        let mut bound = 0;
        for (_, ci) in cores {
            let mut usable = self.members[ci].iter().copied().filter(|&r| !banned.get(r));
            if usable.clone().any(|r| used.get(r)) {
                continue;
            }
            let mut cheapest = i64::MAX;
            for r in usable.by_ref() {
                used.set(r);
                cheapest = cheapest.min(self.cost[r]);
            }
            bound += cheapest;
        }
        Some(bound)
    }

    fn branch(
        &mut self,
        chosen: &mut Vec<usize>,
        cost: i64,
        covered: &Bits,
        banned: &Bits,
    ) -> Result<(), Halt> {
        self.steps += 1;
        if self.steps.is_multiple_of(POLL_INTERVAL) && self.interrupt.interrupted() {
            return Err(Halt::Interrupted);
        }
        let Some(core) = (0..self.num_cores)
            .filter(|&ci| !covered.get(ci))
            .min_by_key(|&ci| self.members[ci].iter().filter(|&&r| !banned.get(r)).count())
        else {
            self.offer(chosen, cost);
            return Ok(());
        };
        let Some(bound) = self.lower_bound(covered, banned) else {
            return Ok(());
        };
        let limit = self
            .best
            .as_ref()
            .map_or(self.ceiling.saturating_add(1), |(_, c)| *c);
        if cost + bound >= limit {
            return Ok(());
        }
        let mut candidates: Vec<usize> = self.members[core]
            .iter()
            .copied()
            .filter(|&r| !banned.get(r))
            .collect();
        candidates.sort_by(|&a, &b| {
            self.cost[a]
                .cmp(&self.cost[b])
                .then(
                    self.sig[b]
                        .count_new(covered)
                        .cmp(&self.sig[a].count_new(covered)),
                )
                .then(self.var[b].cmp(&self.var[a]))
        });
        let mut banned = banned.clone();
        for r in candidates {
            let mut next = covered.clone();
            next.union_with(&self.sig[r]);
            chosen.push(r);
            self.branch(chosen, cost + self.cost[r], &next, &banned)?;
            chosen.pop();
            banned.set(r);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NoClock;

    fn run(cores: &[Vec<VarId>], cost: &[i64]) -> Option<(Vec<VarId>, i64)> {
        let problem = HittingSetProblem {
            cores,
            cost,
            forced: &[],
            excluded: &|_| false,
            ceiling: None,
        };
        match solve(&problem, &NoClock).unwrap() {
            HittingOutcome::Found { set, cost } => Some((set, cost)),
            HittingOutcome::None => None,
        }
    }

    #[test]
    fn shared_element_wins() {
        let cores = [vec![0, 1], vec![1, 2], vec![2, 3]];
        let (set, cost) = run(&cores, &[1, 1, 1, 1]).unwrap();
        assert_eq!(cost, 2);
        assert_eq!(set.len(), 2);
        for core in &cores {
            assert!(core.iter().any(|v| set.contains(v)));
        }
    }

    #[test]
    fn matches_brute_force() {
        let cores = [
            vec![0, 2, 4],
            vec![1, 2],
            vec![3, 4, 5],
            vec![0, 5],
            vec![1, 3],
        ];
        let cost = [3, 1, 2, 2, 1, 2];
        let mut best = i64::MAX;
        for mask in 0u32..64 {
            if cores.iter().all(|c| c.iter().any(|&v| mask >> v & 1 == 1)) {
                let c: i64 = (0..6)
                    .filter(|&v| mask >> v & 1 == 1)
                    .map(|v| cost[v])
                    .sum();
                best = best.min(c);
            }
        }
        assert_eq!(run(&cores, &cost).unwrap().1, best);
    }

    #[test]
    fn exclusions_and_ceiling() {
        let cores = [vec![0, 1]];
        let problem = HittingSetProblem {
            cores: &cores,
            cost: &[1, 1],
            forced: &[],
            excluded: &|v| v <= 1,
            ceiling: None,
        };
        assert!(matches!(
            solve(&problem, &NoClock).unwrap(),
            HittingOutcome::None
        ));
        let problem = HittingSetProblem {
            cores: &cores,
            cost: &[1, 1],
            forced: &[],
            excluded: &|_| false,
            ceiling: Some(0),
        };
        assert!(matches!(
            solve(&problem, &NoClock).unwrap(),
            HittingOutcome::None
        ));
    }
}
