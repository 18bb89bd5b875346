//! Reference dynamic program over an explicit edge budget `t`.
//!
//! Each cell `C(p, ·, B)` or `M(pq, ·, B)` is stored as the list of budgets at
//! which its value strictly improves, so the value at budget `t` is the entry
//! with the largest budget not exceeding `t`. Budgets are processed in
//! increasing order; a candidate built from entries at budgets `t1` and `t2`
//! becomes available at budget `t1 + t2` (or `t1 + 1` for a single edge). This
//! represents the full `t`-indexed tables exactly while only touching cells
//! whose value changes.

use crate::dijkstra::SolverOutput;
use crate::error::{Error, Result};
use crate::freespace::{FreeSpaceGraph, ReferenceSet, TriangleCache};
use crate::geometry::orient;
use crate::instance::Instance;
use crate::label::{check_capacity, SolverStats};
use crate::mask::SubsetMask;
use crate::scalar::Weight;
use crate::walk::{extract_closed, CStep, Derivations, MStep, Walk};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Base,
    Edge,
    Split,
}

#[derive(Clone, Copy, Debug)]
struct Prov {
    rule: Rule,
    vertex: u32,
    mask: u32,
    t1: u32,
}

#[derive(Clone, Copy, Debug)]
struct Breakpoint<S> {
    t: u32,
    value: S,
    prov: Prov,
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    C(usize, u32),
    M(usize, usize, u32),
}

#[derive(Clone, Copy, Debug)]
struct Candidate<S> {
    cell: Cell,
    value: S,
    prov: Prov,
}

pub struct DpTables<'a, S: Weight> {
    fsg: &'a FreeSpaceGraph<S>,
    tri: TriangleCache<'a, S>,
    n: usize,
    k: usize,
    nm: usize,
    t_max: u32,
    c: Vec<Vec<Breakpoint<S>>>,
    m: Vec<Vec<Breakpoint<S>>>,
    c_masks: Vec<Vec<u32>>,
    m_masks: Vec<Vec<u32>>,
    buckets: Vec<Vec<Candidate<S>>>,
    pub stats: SolverStats,
}

fn at_budget<S: Weight>(front: &[Breakpoint<S>], t: u32) -> Option<&Breakpoint<S>> {
    let i = front.partition_point(|b| b.t <= t);
    (i > 0).then(|| &front[i - 1])
}

impl<'a, S: Weight> DpTables<'a, S> {
    /// Fills all tables up to budget `t_max`.
    pub fn build(inst: &Instance<S>, fsg: &'a FreeSpaceGraph<S>, t_max: u32) -> Result<Self> {
        let k = inst.k();
        check_capacity(k)?;
        let n = fsg.n();
        let nm = 1usize << k;
        let mut dp = DpTables {
            fsg,
            tri: TriangleCache::new(fsg, ReferenceSet::new(inst)),
            n,
            k,
            nm,
            t_max,
            c: vec![Vec::new(); n * nm],
            m: vec![Vec::new(); n * n * nm],
            c_masks: vec![Vec::new(); n],
            m_masks: vec![Vec::new(); n * n],
            buckets: vec![Vec::new(); t_max as usize + 1],
            stats: SolverStats::default(),
        };
        let base = Prov { rule: Rule::Base, vertex: 0, mask: 0, t1: 0 };
        for p in 0..n {
            dp.buckets[0].push(Candidate { cell: Cell::C(p, 0), value: S::zero(), prov: base });
        }
        for t in 0..=t_max {
            dp.process_layer(t);
        }
        dp.buckets = Vec::new();
        dp.stats.triangles = dp.tri.len();
        Ok(dp)
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    fn ci(&self, p: usize, mask: u32) -> usize {
        p * self.nm + mask as usize
    }

    fn mi(&self, a: usize, b: usize, mask: u32) -> usize {
        (a * self.n + b) * self.nm + mask as usize
    }

    fn front(&self, cell: Cell) -> &Vec<Breakpoint<S>> {
        match cell {
            Cell::C(p, m) => &self.c[self.ci(p, m)],
            Cell::M(a, b, m) => &self.m[self.mi(a, b, m)],
        }
    }

    /// `C(p, t, B)`.
    pub fn c_at(&self, p: usize, t: u32, mask: u32) -> S {
        at_budget(&self.c[self.ci(p, mask)], t).map_or(S::infinity(), |b| b.value)
    }

    /// `M(pq, t, B)`.
    pub fn m_at(&self, a: usize, b: usize, t: u32, mask: u32) -> S {
        at_budget(&self.m[self.mi(a, b, mask)], t).map_or(S::infinity(), |b| b.value)
    }

    fn schedule(&mut self, t: u32, cand: Candidate<S>) {
        if t <= self.t_max && !cand.value.is_infinite() {
            self.buckets[t as usize].push(cand);
            self.stats.pushes += 1;
        }
    }

    fn process_layer(&mut self, t: u32) {
        let mut cands = std::mem::take(&mut self.buckets[t as usize]);
        self.stats.queue_peak = self.stats.queue_peak.max(cands.len());
        let key = |c: &Candidate<S>| match c.cell {
            Cell::C(p, m) => (0u8, p, 0usize, m),
            Cell::M(a, b, m) => (1u8, a, b, m),
        };
        cands.sort_by(|x, y| {
            key(x)
                .cmp(&key(y))
                .then(x.value.partial_cmp(&y.value).unwrap())
                .then((x.prov.rule as u8).cmp(&(y.prov.rule as u8)))
                .then(x.prov.vertex.cmp(&y.prov.vertex))
                .then(x.prov.mask.cmp(&y.prov.mask))
                .then(x.prov.t1.cmp(&y.prov.t1))
        });
        let mut i = 0;
        while i < cands.len() {
            let best = cands[i];
            while i < cands.len() && key(&cands[i]) == key(&best) {
                i += 1;
            }
            let current = self.front(best.cell).last().map_or(S::infinity(), |b| b.value);
            if best.value >= current {
                continue;
            }
            let bp = Breakpoint { t, value: best.value, prov: best.prov };
            match best.cell {
                Cell::C(p, m) => {
                    let idx = self.ci(p, m);
                    if self.c[idx].is_empty() {
                        self.c_masks[p].push(m);
                    }
                    self.c[idx].push(bp);
                    self.stats.finalized += 1;
                    self.expand_c(p, m, t, best.value);
                }
                Cell::M(a, b, m) => {
                    let idx = self.mi(a, b, m);
                    if self.m[idx].is_empty() {
                        self.m_masks[a * self.n + b].push(m);
                    }
                    self.m[idx].push(bp);
                    self.stats.finalized += 1;
                    self.expand_m(a, b, m, t, best.value);
                }
            }
        }
    }

    fn expand_c(&mut self, p: usize, mask: u32, t: u32, value: S) {
        let fsg = self.fsg;
        for &(q, w) in fsg.neighbors(p) {
            let prov = Prov { rule: Rule::Edge, vertex: 0, mask: 0, t1: t };
            self.schedule(t + 1, Candidate { cell: Cell::M(p, q, mask), value: value + w, prov });
        }
        if mask == 0 {
            return;
        }
        for j in 0..self.c_masks[p].len() {
            let other = self.c_masks[p][j];
            if other == 0 || other & mask != 0 {
                continue;
            }
            let idx = self.ci(p, other);
            for bi in 0..self.c[idx].len() {
                let bp = self.c[idx][bi];
                let prov = Prov { rule: Rule::Split, vertex: 0, mask, t1: t };
                let cand = Candidate { cell: Cell::C(p, mask | other), value: value + bp.value, prov };
                self.schedule(t + bp.t, cand);
            }
        }
    }

    fn expand_m(&mut self, a: usize, b: usize, mask: u32, t: u32, value: S) {
        let n = self.n;
        if let Some(w) = self.fsg.weight(b, a) {
            let prov = Prov { rule: Rule::Edge, vertex: a as u32, mask: 0, t1: t };
            self.schedule(t + 1, Candidate { cell: Cell::C(b, mask), value: w + value, prov });
        }
        let pt = |v: usize| self.fsg.point(v);
        for q in 0..n {
            if self.m_masks[b * n + q].is_empty() || orient(pt(a), pt(b), pt(q)) != 1 {
                continue;
            }
            let tc = self.tri.get(a, b, q);
            if tc.penalty_sum.is_infinite() || tc.required_mask.bits() & mask != 0 {
                continue;
            }
            let base = mask | tc.required_mask.bits();
            for j in 0..self.m_masks[b * n + q].len() {
                let m2 = self.m_masks[b * n + q][j];
                if m2 & base != 0 {
                    continue;
                }
                let idx = self.mi(b, q, m2);
                for bi in 0..self.m[idx].len() {
                    let bp = self.m[idx][bi];
                    let prov = Prov { rule: Rule::Split, vertex: b as u32, mask, t1: t };
                    let v = value + bp.value + tc.penalty_sum;
                    self.schedule(t + bp.t, Candidate { cell: Cell::M(a, q, base | m2), value: v, prov });
                }
            }
        }
        for p in 0..n {
            if self.m_masks[p * n + a].is_empty() || orient(pt(p), pt(a), pt(b)) != 1 {
                continue;
            }
            let tc = self.tri.get(p, a, b);
            if tc.penalty_sum.is_infinite() || tc.required_mask.bits() & mask != 0 {
                continue;
            }
            let base = mask | tc.required_mask.bits();
            for j in 0..self.m_masks[p * n + a].len() {
                let m1 = self.m_masks[p * n + a][j];
                if m1 & base != 0 {
                    continue;
                }
                let idx = self.mi(p, a, m1);
                for bi in 0..self.m[idx].len() {
                    let bp = self.m[idx][bi];
                    let prov = Prov { rule: Rule::Split, vertex: a as u32, mask: m1, t1: bp.t };
                    let v = bp.value + value + tc.penalty_sum;
                    self.schedule(t + bp.t, Candidate { cell: Cell::M(p, b, base | m1), value: v, prov });
                }
            }
        }
    }

    /// Minimum of `C(p, t_max, R)` over `p`, lowest vertex id on ties.
    pub fn root(&self) -> Option<(usize, S)> {
        let full = SubsetMask::full(self.k).bits();
        let mut best: Option<(usize, S)> = None;
        for p in 0..self.n {
            let v = self.c_at(p, self.t_max, full);
            if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
                best = Some((p, v));
            }
        }
        best
    }

    /// Closed walk realizing `C(p, t, B)`.
    pub fn extract_walk(&self, p: usize, t: u32, mask: u32) -> Result<Walk<S>> {
        extract_closed(self, (p, mask, t), self.fsg)
    }
}

impl<'a, S: Weight> Derivations for DpTables<'a, S> {
    type C = (usize, u32, u32);
    type M = (usize, usize, u32, u32);

    fn c_vertex(&self, c: Self::C) -> usize {
        c.0
    }

    fn m_target(&self, m: Self::M) -> usize {
        m.1
    }

    fn c_step(&self, (p, mask, t): Self::C) -> Result<CStep<Self::C, Self::M>> {
        let bp = at_budget(&self.c[self.ci(p, mask)], t)
            .ok_or_else(|| Error::Internal(format!("C({p}, {t}, {mask:#b}) is infinite")))?;
        Ok(match bp.prov.rule {
            Rule::Base => CStep::Point,
            Rule::Edge => {
                let q = bp.prov.vertex as usize;
                CStep::Edge { m: (q, p, mask, bp.t - 1) }
            }
            Rule::Split => {
                let b1 = bp.prov.mask;
                CStep::Compose((p, b1, bp.prov.t1), (p, mask & !b1, bp.t - bp.prov.t1))
            }
        })
    }

    fn m_step(&self, (a, b, mask, t): Self::M) -> Result<MStep<Self::C, Self::M>> {
        let bp = at_budget(&self.m[self.mi(a, b, mask)], t)
            .ok_or_else(|| Error::Internal(format!("M({a}, {b}, {t}, {mask:#b}) is infinite")))?;
        Ok(match bp.prov.rule {
            Rule::Base => return Err(Error::Internal("open walk with base provenance".into())),
            Rule::Edge => MStep::Edge { c: (a, mask, bp.t - 1) },
            Rule::Split => {
                let r = bp.prov.vertex as usize;
                let b1 = bp.prov.mask;
                let tc = self.tri.get(a, r, b);
                let b2 = mask & !b1 & !tc.required_mask.bits();
                MStep::Triangle {
                    left: (a, r, b1, bp.prov.t1),
                    right: (r, b, b2, bp.t - bp.prov.t1),
                }
            }
        })
    }
}

/// Solves with budget `6 n`, where `n` is the number of free-space vertices.
pub fn solve_dp<S: Weight>(inst: &Instance<S>, fsg: &FreeSpaceGraph<S>) -> Result<SolverOutput<S>> {
    solve_dp_with_budget(inst, fsg, 6 * fsg.n() as u32)
}

pub fn solve_dp_with_budget<S: Weight>(
    inst: &Instance<S>,
    fsg: &FreeSpaceGraph<S>,
    t_max: u32,
) -> Result<SolverOutput<S>> {
    crate::freespace::assert_superiority(fsg)?;
    let tables = DpTables::build(inst, fsg, t_max)?;
    if tables.k == 0 {
        let walk = if fsg.n() == 0 { Walk::empty() } else { Walk::point(0) };
        return Ok(SolverOutput { cost: S::zero(), walk, stats: tables.stats });
    }
    match tables.root() {
        Some((p, cost)) => {
            let full = SubsetMask::full(tables.k).bits();
            let walk = tables.extract_walk(p, t_max, full)?;
            Ok(SolverOutput { cost, walk, stats: tables.stats })
        }
        None => Ok(SolverOutput { cost: S::infinity(), walk: Walk::empty(), stats: tables.stats }),
    }
}

/// Evaluates the closed-walk recurrence for one cell directly from the tables.
pub fn dp_cell_c<S: Weight>(tables: &DpTables<'_, S>, p: usize, t: u32, mask: u32) -> S {
    if mask == 0 {
        return S::zero();
    }
    if t <= 1 {
        return S::infinity();
    }
    let mut best = S::infinity();
    for &(q, w) in tables.fsg.neighbors(p) {
        best = best.min(w + tables.m_at(q, p, t - 1, mask));
    }
    for (b1, b2) in SubsetMask(mask).bipartitions() {
        for t1 in 1..t {
            best = best.min(tables.c_at(p, t1, b1.bits()) + tables.c_at(p, t - t1, b2.bits()));
        }
    }
    best
}

/// Evaluates the open-walk recurrence for one cell directly from the tables.
pub fn dp_cell_m<S: Weight>(tables: &DpTables<'_, S>, a: usize, b: usize, t: u32, mask: u32) -> S {
    if t == 0 {
        return S::infinity();
    }
    let mut best = S::infinity();
    if let Some(w) = tables.fsg.weight(a, b) {
        best = tables.c_at(a, t - 1, mask) + w;
    }
    let pt = |v: usize| tables.fsg.point(v);
    for r in 0..tables.n {
        if orient(pt(a), pt(r), pt(b)) != 1 {
            continue;
        }
        let tc = tables.tri.get(a, r, b);
        let tm = tc.required_mask.bits();
        if tm & !mask != 0 {
            continue;
        }
        for sub in SubsetMask(mask & !tm).submasks() {
            let rest = mask & !tm & !sub.bits();
            for t1 in 1..t {
                let v = tables.m_at(a, r, t1, sub.bits())
                    + tables.m_at(r, b, t - t1, rest)
                    + tc.penalty_sum;
                best = best.min(v);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dijkstra;
    use crate::freespace::compute_free_space_edges;
    use crate::geometry::Point;
    use crate::instance::{validate_and_subdivide, InputPolygon, Mode};
    use crate::walk::evaluate_dp_cost;

    fn sq(x: i64, y: i64, s: i64) -> Vec<Point> {
        vec![
            Point::new(x, y),
            Point::new(x + s, y),
            Point::new(x + s, y + s),
            Point::new(x, y + s),
        ]
    }

    fn build(polys: Vec<InputPolygon<f64>>) -> (Instance<f64>, FreeSpaceGraph<f64>) {
        let inst = validate_and_subdivide(Instance::new(polys, Mode::Enclose)).unwrap();
        let fsg = compute_free_space_edges(&inst);
        (inst, fsg)
    }

    #[test]
    fn square_perimeter() {
        let (inst, fsg) = build(vec![InputPolygon::required("a", sq(0, 0, 2))]);
        let out = solve_dp(&inst, &fsg).unwrap();
        assert!((out.cost - 8.0).abs() < 1e-9);
        assert_eq!(out.walk.edge_count(), 4);
    }

    #[test]
    fn empty_mask_is_free_and_small_budgets_infinite() {
        let (inst, fsg) = build(vec![InputPolygon::required("a", sq(0, 0, 2))]);
        let tables = DpTables::build(&inst, &fsg, 8).unwrap();
        for p in 0..fsg.n() {
            for t in 0..=8 {
                assert_eq!(tables.c_at(p, t, 0), 0.0);
            }
            assert!(tables.c_at(p, 1, 1).is_infinite());
            assert!(dp_cell_c(&tables, p, 1, 1).is_infinite());
            // a square needs four edges
            assert!(tables.c_at(p, 3, 1).is_infinite());
            assert!((tables.c_at(p, 4, 1) - 8.0).abs() < 1e-9);
        }
        let (a, b) = (0, 1);
        let w = fsg.weight(a, b).unwrap();
        assert_eq!(tables.m_at(a, b, 1, 0), w);
    }

    #[test]
    fn triangle_mouth() {
        // triangle obstacle with required object; M over its base at t = 2
        let (inst, fsg) = build(vec![InputPolygon::required(
            "t",
            vec![Point::new(0, 0), Point::new(4, 0), Point::new(2, 3)],
        )]);
        let tables = DpTables::build(&inst, &fsg, 6).unwrap();
        let p = fsg.vertex_id(Point::new(0, 0).scaled(inst.refinement)).unwrap();
        let r = fsg.vertex_id(Point::new(4, 0).scaled(inst.refinement)).unwrap();
        let q = fsg.vertex_id(Point::new(2, 3).scaled(inst.refinement)).unwrap();
        let legs = fsg.weight(p, r).unwrap() + fsg.weight(r, q).unwrap();
        assert!((tables.m_at(p, q, 2, 1) - legs).abs() < 1e-9);
        assert!((dp_cell_m(&tables, p, q, 2, 1) - legs).abs() < 1e-9);
    }

    #[test]
    fn tables_satisfy_recurrences() {
        let (inst, fsg) = build(vec![
            InputPolygon::required("a", sq(0, 0, 1)),
            InputPolygon::optional("b", sq(2, 0, 1), 0.3),
            InputPolygon::required("c", vec![Point::new(1, 2), Point::new(3, 2), Point::new(2, 3)]),
        ]);
        let t_max = 10;
        let tables = DpTables::build(&inst, &fsg, t_max).unwrap();
        let n = fsg.n();
        for t in 0..=t_max {
            for mask in 0..4u32 {
                for p in 0..n {
                    let v = tables.c_at(p, t, mask);
                    let rhs = dp_cell_c(&tables, p, t, mask);
                    assert!(v == rhs || (v - rhs).abs() < 1e-9, "C({p},{t},{mask}) {v} vs {rhs}");
                    for q in 0..n {
                        if p == q {
                            continue;
                        }
                        let v = tables.m_at(p, q, t, mask);
                        let rhs = dp_cell_m(&tables, p, q, t, mask);
                        assert!(v == rhs || (v - rhs).abs() < 1e-9, "M({p},{q},{t},{mask}) {v} vs {rhs}");
                    }
                }
            }
        }
    }

    #[test]
    fn agrees_with_label_setting() {
        let (inst, fsg) = build(vec![
            InputPolygon::required("a", sq(0, 0, 1)),
            InputPolygon::required("b", sq(3, 0, 1)),
            InputPolygon::optional("c", sq(1, 2, 1), 0.5),
        ]);
        let dp = solve_dp(&inst, &fsg).unwrap();
        let lab = dijkstra::solve(&inst, &fsg).unwrap();
        assert!((dp.cost - lab.cost).abs() < 1e-9, "{} vs {}", dp.cost, lab.cost);
        let c = evaluate_dp_cost(&dp.walk, &inst, &fsg).unwrap();
        assert!((c - dp.cost).abs() < 1e-9);
    }
}
