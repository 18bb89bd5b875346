//! Label-setting engine over closed-walk labels `C(p, B)` and open-walk labels `M(pq, B)`.
//!
//! Labels are finalized in nondecreasing order of value. Whenever a label is
//! finalized, every rule in which it appears as an operand is evaluated against
//! the already-finalized partner labels. Extensions can add further label kinds
//! to the same queue.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::bound::HullBound;
use crate::error::{Error, Result};
use crate::freespace::{FreeSpaceGraph, ReferenceSet, TriangleCache};
use crate::geometry::orient;
use crate::instance::Instance;
use crate::mask::{SubsetMask, MAX_REQUIRED};
use crate::scalar::{OrdWeight, Weight};
use crate::walk::{CStep, Derivations, MStep};

pub(crate) const KIND_C: u8 = 0;
pub(crate) const KIND_M: u8 = 1;

/// Queue entry, ordered by value, then kind, vertex ids and mask.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Entry<S: Weight> {
    pub value: OrdWeight<S>,
    pub kind: u8,
    pub a: u32,
    pub b: u32,
    pub mask: u32,
}

impl<S: Weight> PartialEq for Entry<S> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}

impl<S: Weight> Eq for Entry<S> {}

impl<S: Weight> Ord for Entry<S> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.value, self.kind, self.a, self.b, self.mask)
            .cmp(&(o.value, o.kind, o.a, o.b, o.mask))
    }
}

impl<S: Weight> PartialOrd for Entry<S> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Packed provenance: two tag bits, a vertex id and a mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Prov(u64);

pub(crate) const TAG_BASE: u64 = 1;
pub(crate) const TAG_EDGE: u64 = 2;
pub(crate) const TAG_SPLIT: u64 = 3;

impl Prov {
    pub fn new(tag: u64, v: usize, mask: u32) -> Self {
        Prov(tag << 62 | (v as u64) << MAX_REQUIRED | mask as u64)
    }
    pub fn tag(self) -> u64 {
        self.0 >> 62
    }
    pub fn vertex(self) -> usize {
        ((self.0 >> MAX_REQUIRED) & ((1 << 42) - 1)) as usize
    }
    pub fn mask(self) -> u32 {
        (self.0 & ((1 << MAX_REQUIRED) - 1)) as u32
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct SolverStats {
    pub finalized: usize,
    pub pushes: usize,
    pub queue_peak: usize,
    pub triangles: usize,
    /// Finalized labels skipped by the completion bound.
    pub pruned: usize,
    /// Threshold rounds of the bounded search.
    pub rounds: usize,
}

pub(crate) enum Outcome<S: Weight> {
    /// First finalized `C(p, R)`.
    Full(usize),
    /// The next label exceeds the bound threshold; carries its value.
    Exceeded(f64),
    /// An extension asked to stop at this entry.
    Stopped(Entry<S>),
    Exhausted,
}

pub(crate) trait Extension<S: Weight> {
    fn on_c_final(&mut self, _core: &mut Core<'_, S>, _p: usize, _mask: u32, _value: S) {}
    fn on_m_final(&mut self, _core: &mut Core<'_, S>, _a: usize, _b: usize, _mask: u32, _value: S) {}
    /// Handles a popped entry of an extension kind; returns true to stop.
    fn on_pop(&mut self, _core: &mut Core<'_, S>, _e: Entry<S>) -> bool {
        false
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    /// Right operand; the payload is the shared middle vertex.
    Right(usize),
}

pub(crate) struct NoExtension;
impl<S: Weight> Extension<S> for NoExtension {}

pub(crate) struct Core<'a, S: Weight> {
    pub fsg: &'a FreeSpaceGraph<S>,
    pub tri: TriangleCache<'a, S>,
    pub n: usize,
    pub k: usize,
    pub full: u32,
    nm: usize,
    pub c_val: Vec<S>,
    c_fin: Vec<bool>,
    c_prov: Vec<Prov>,
    pub m_val: Vec<S>,
    m_fin: Vec<bool>,
    m_prov: Vec<Prov>,
    pub fin_c: Vec<Vec<u32>>,
    pub fin_m: Vec<Vec<u32>>,
    /// `succ[b]` holds every `q` with a finalized `M(bq, ·)`, `pred[a]` every
    /// `p` with a finalized `M(pa, ·)`.
    succ: Vec<Vec<u32>>,
    pred: Vec<Vec<u32>>,
    /// `orient(a, b, q) == 1` for all triples, when small enough to tabulate.
    ccw: Vec<bool>,
    queue: BinaryHeap<Reverse<Entry<S>>>,
    scratch: Vec<u32>,
    pub bound: Option<HullBound>,
    /// Smallest value plus bound among pruned labels.
    pub min_pruned: f64,
    pub stats: SolverStats,
}

/// Triples beyond this count are oriented on the fly instead.
const CCW_TABLE_LIMIT: usize = 1 << 24;

fn ccw_table<S: Weight>(fsg: &FreeSpaceGraph<S>) -> Vec<bool> {
    let n = fsg.n();
    if n.saturating_pow(3) > CCW_TABLE_LIMIT {
        return Vec::new();
    }
    let mut t = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                t.push(orient(fsg.point(a), fsg.point(b), fsg.point(c)) == 1);
            }
        }
    }
    t
}

pub(crate) fn check_capacity(k: usize) -> Result<()> {
    if k > MAX_REQUIRED {
        return Err(Error::Capacity { k, limit: MAX_REQUIRED });
    }
    Ok(())
}

impl<'a, S: Weight> Core<'a, S> {
    pub fn new(inst: &Instance<S>, fsg: &'a FreeSpaceGraph<S>) -> Result<Self> {
        let k = inst.k();
        check_capacity(k)?;
        let n = fsg.n();
        let nm = 1usize << k;
        let c_len = n * nm;
        let m_len = n
            .checked_mul(n)
            .and_then(|x| x.checked_mul(nm))
            .ok_or(Error::Capacity { k, limit: MAX_REQUIRED })?;
        let mut core = Core {
            fsg,
            tri: TriangleCache::new(fsg, ReferenceSet::new(inst)),
            n,
            k,
            full: SubsetMask::full(k).bits(),
            nm,
            c_val: vec![S::infinity(); c_len],
            c_fin: vec![false; c_len],
            c_prov: vec![Prov::default(); c_len],
            m_val: vec![S::infinity(); m_len],
            m_fin: vec![false; m_len],
            m_prov: vec![Prov::default(); m_len],
            fin_c: vec![Vec::new(); n],
            fin_m: vec![Vec::new(); n * n],
            succ: vec![Vec::new(); n],
            pred: vec![Vec::new(); n],
            ccw: ccw_table(fsg),
            queue: BinaryHeap::new(),
            scratch: Vec::new(),
            bound: None,
            min_pruned: f64::INFINITY,
            stats: SolverStats::default(),
        };
        for p in 0..n {
            core.offer_c(p, 0, S::zero(), Prov::new(TAG_BASE, 0, 0));
        }
        Ok(core)
    }

    #[inline]
    pub fn ci(&self, p: usize, mask: u32) -> usize {
        p * self.nm + mask as usize
    }

    #[inline]
    pub fn mi(&self, a: usize, b: usize, mask: u32) -> usize {
        (a * self.n + b) * self.nm + mask as usize
    }

    #[inline]
    fn is_ccw(&self, a: usize, b: usize, c: usize) -> bool {
        if self.ccw.is_empty() {
            self.orient(a, b, c) == 1
        } else {
            self.ccw[(a * self.n + b) * self.n + c]
        }
    }

    #[inline]
    pub fn orient(&self, a: usize, b: usize, c: usize) -> i32 {
        orient(self.fsg.point(a), self.fsg.point(b), self.fsg.point(c))
    }

    pub fn queue_is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn push(&mut self, e: Entry<S>) {
        self.queue.push(Reverse(e));
        self.stats.pushes += 1;
        self.stats.queue_peak = self.stats.queue_peak.max(self.queue.len());
    }

    pub fn offer_c(&mut self, p: usize, mask: u32, value: S, prov: Prov) {
        let i = self.ci(p, mask);
        if !self.c_fin[i] && value < self.c_val[i] {
            self.c_val[i] = value;
            self.c_prov[i] = prov;
            self.push(Entry { value: OrdWeight(value), kind: KIND_C, a: p as u32, b: 0, mask });
        }
    }

    pub fn offer_m(&mut self, a: usize, b: usize, mask: u32, value: S, prov: Prov) {
        let i = self.mi(a, b, mask);
        if !self.m_fin[i] && value < self.m_val[i] {
            self.m_val[i] = value;
            self.m_prov[i] = prov;
            self.push(Entry {
                value: OrdWeight(value),
                kind: KIND_M,
                a: a as u32,
                b: b as u32,
                mask,
            });
        }
    }

    pub fn run<E: Extension<S>>(&mut self, ext: &mut E, stop_on_full: bool) -> Outcome<S> {
        while let Some(Reverse(e)) = self.queue.pop() {
            let value = e.value.0;
            if let Some(bound) = &self.bound {
                let g = value.to_f64_lossy();
                if bound.exceeds(g, 0.0) {
                    self.stats.triangles = self.tri.len();
                    return Outcome::Exceeded(g);
                }
            }
            match e.kind {
                KIND_C => {
                    let (p, mask) = (e.a as usize, e.mask);
                    let i = self.ci(p, mask);
                    if self.c_fin[i] || value > self.c_val[i] {
                        continue;
                    }
                    self.c_fin[i] = true;
                    self.stats.finalized += 1;
                    self.fin_c[p].push(mask);
                    if stop_on_full && mask == self.full {
                        self.stats.triangles = self.tri.len();
                        return Outcome::Full(p);
                    }
                    if let Some(bound) = &self.bound {
                        let (g, h) = (value.to_f64_lossy(), bound.closed(self.fsg.point(p), mask));
                        if bound.exceeds(g, h) {
                            self.prune(g + h);
                            continue;
                        }
                    }
                    self.relax_c(p, mask, value);
                    ext.on_c_final(self, p, mask, value);
                }
                KIND_M => {
                    let (a, b, mask) = (e.a as usize, e.b as usize, e.mask);
                    let i = self.mi(a, b, mask);
                    if self.m_fin[i] || value > self.m_val[i] {
                        continue;
                    }
                    self.m_fin[i] = true;
                    self.stats.finalized += 1;
                    if let Some(bound) = &self.bound {
                        let g = value.to_f64_lossy();
                        let h = bound.open(self.fsg.point(a), self.fsg.point(b), mask);
                        if bound.exceeds(g, h) {
                            // kept out of the partner lists; combining with it is
                            // still valid, just not needed
                            self.prune(g + h);
                            continue;
                        }
                    }
                    let pair = a * self.n + b;
                    if self.fin_m[pair].is_empty() {
                        self.succ[a].push(b as u32);
                        self.pred[b].push(a as u32);
                    }
                    self.fin_m[pair].push(mask);
                    self.relax_m(a, b, mask, value);
                    ext.on_m_final(self, a, b, mask, value);
                }
                _ => {
                    if ext.on_pop(self, e) {
                        self.stats.triangles = self.tri.len();
                        return Outcome::Stopped(e);
                    }
                }
            }
        }
        self.stats.triangles = self.tri.len();
        Outcome::Exhausted
    }

    fn prune(&mut self, f: f64) {
        self.stats.pruned += 1;
        self.min_pruned = self.min_pruned.min(f);
    }

    fn relax_c(&mut self, p: usize, mask: u32, value: S) {
        let fsg = self.fsg;
        for &(q, w) in fsg.neighbors(p) {
            self.offer_m(p, q, mask, value + w, Prov::new(TAG_EDGE, 0, 0));
        }
        if mask == 0 {
            return;
        }
        let mut partners = std::mem::take(&mut self.scratch);
        self.disjoint_c(p, self.full & !mask, &mut partners);
        for &other in &partners {
            if other == 0 {
                continue;
            }
            let v = value + self.c_val[self.ci(p, other)];
            self.offer_c(p, mask | other, v, Prov::new(TAG_SPLIT, 0, mask));
        }
        self.scratch = partners;
    }

    fn relax_m(&mut self, a: usize, b: usize, mask: u32, value: S) {
        if let Some(w) = self.fsg.weight(b, a) {
            self.offer_c(b, mask, w + value, Prov::new(TAG_EDGE, a, 0));
        }
        // as the left operand: M(ab) + M(bq) over triangle a b q
        for j in 0..self.succ[b].len() {
            let q = self.succ[b][j] as usize;
            if !self.is_ccw(a, b, q) {
                continue;
            }
            let t = self.tri.get(a, b, q);
            if t.penalty_sum.is_infinite() || t.required_mask.bits() & mask != 0 {
                continue;
            }
            let base = mask | t.required_mask.bits();
            self.combine(Side::Left, value, t.penalty_sum, (b, q), (a, q), base, Prov::new(TAG_SPLIT, b, mask));
        }
        // as the right operand: M(pa) + M(ab) over triangle p a b
        for j in 0..self.pred[a].len() {
            let p = self.pred[a][j] as usize;
            if !self.is_ccw(p, a, b) {
                continue;
            }
            let t = self.tri.get(p, a, b);
            if t.penalty_sum.is_infinite() || t.required_mask.bits() & mask != 0 {
                continue;
            }
            let base = mask | t.required_mask.bits();
            self.combine(Side::Right(a), value, t.penalty_sum, (p, a), (p, b), base, Prov::default());
        }
    }

    /// Offers `dst` labels joining the just-finalized label of value `value`
    /// with every finalized label of the `src` pair whose mask avoids `base`.
    /// Finalized targets never hold a larger value than `value`, so a plain
    /// comparison against the stored value is enough.
    #[allow(clippy::too_many_arguments)]
    #[inline(always)]
    fn combine(
        &mut self,
        side: Side,
        value: S,
        penalty: S,
        src: (usize, usize),
        dst: (usize, usize),
        base: u32,
        prov: Prov,
    ) {
        let (n, nm) = (self.n, self.nm);
        let free = self.full & !base;
        let src_pair = src.0 * n + src.1;
        let src_row = src_pair * nm;
        let dst_row = (dst.0 * n + dst.1) * nm;
        let Core { m_val, m_prov, m_fin, fin_m, queue, stats, .. } = self;
        let mut offer = |m: u32| {
            let partner = m_val[src_row + m as usize];
            let v = match side {
                Side::Left => value + partner + penalty,
                Side::Right(_) => partner + value + penalty,
            };
            let i = dst_row + (base | m) as usize;
            if v < m_val[i] {
                m_val[i] = v;
                m_prov[i] = match side {
                    Side::Left => prov,
                    Side::Right(mid) => Prov::new(TAG_SPLIT, mid, m),
                };
                queue.push(Reverse(Entry {
                    value: OrdWeight(v),
                    kind: KIND_M,
                    a: dst.0 as u32,
                    b: dst.1 as u32,
                    mask: base | m,
                }));
                stats.pushes += 1;
                stats.queue_peak = stats.queue_peak.max(queue.len());
            }
        };
        let list = &fin_m[src_pair];
        if list.len() >> free.count_ones() == 0 {
            for &m in list {
                if m & !free == 0 {
                    offer(m);
                }
            }
        } else {
            let mut m = free;
            loop {
                if m_fin[src_row + m as usize] {
                    offer(m);
                }
                if m == 0 {
                    break;
                }
                m = (m - 1) & free;
            }
        }
    }

    /// Finalized masks of `C(p, ·)` inside `free`, into `out`. Walks whichever
    /// is shorter: the finalized list or the submasks of `free`.
    fn disjoint_c(&self, p: usize, free: u32, out: &mut Vec<u32>) {
        out.clear();
        let list = &self.fin_c[p];
        if list.len() >> free.count_ones() == 0 {
            out.extend(list.iter().copied().filter(|&m| m & !free == 0));
        } else {
            out.extend(SubsetMask(free).submasks().map(SubsetMask::bits).filter(|&m| self.c_fin[self.ci(p, m)]));
        }
    }

    pub fn c_value(&self, p: usize, mask: u32) -> S {
        self.c_val[self.ci(p, mask)]
    }

    pub fn m_value(&self, a: usize, b: usize, mask: u32) -> S {
        self.m_val[self.mi(a, b, mask)]
    }

    /// Right-hand side of the closed-walk equation at `(p, mask)` over current values.
    pub fn rhs_c(&self, p: usize, mask: u32) -> S {
        if mask == 0 {
            return S::zero();
        }
        let mut best = S::infinity();
        for &(q, w) in self.fsg.neighbors(p) {
            best = best.min(w + self.m_value(q, p, mask));
        }
        for (b1, b2) in SubsetMask(mask).bipartitions() {
            best = best.min(self.c_value(p, b1.bits()) + self.c_value(p, b2.bits()));
        }
        best
    }

    /// Right-hand side of the open-walk equation at `(a, b, mask)` over current values.
    pub fn rhs_m(&self, a: usize, b: usize, mask: u32) -> S {
        let mut best = S::infinity();
        if let Some(w) = self.fsg.weight(a, b) {
            best = self.c_value(a, mask) + w;
        }
        for r in 0..self.n {
            if self.orient(a, r, b) != 1 {
                continue;
            }
            let t = self.tri.get(a, r, b);
            let tm = t.required_mask.bits();
            if tm & !mask != 0 || t.penalty_sum.is_infinite() {
                continue;
            }
            for sub in SubsetMask(mask & !tm).submasks() {
                let rest = mask & !tm & !sub.bits();
                let v = self.m_value(a, r, sub.bits()) + self.m_value(r, b, rest) + t.penalty_sum;
                best = best.min(v);
            }
        }
        best
    }
}

impl<'a, S: Weight> Derivations for Core<'a, S> {
    type C = (usize, u32);
    type M = (usize, usize, u32);

    fn c_vertex(&self, c: Self::C) -> usize {
        c.0
    }

    fn m_target(&self, m: Self::M) -> usize {
        m.1
    }

    fn c_step(&self, (p, mask): Self::C) -> Result<CStep<Self::C, Self::M>> {
        let prov = self.c_prov[self.ci(p, mask)];
        match prov.tag() {
            TAG_BASE => Ok(CStep::Point),
            TAG_EDGE => {
                let q = prov.vertex();
                Ok(CStep::Edge { m: (q, p, mask) })
            }
            TAG_SPLIT => {
                let b1 = prov.mask();
                Ok(CStep::Compose((p, b1), (p, mask & !b1)))
            }
            _ => Err(Error::Internal(format!("C({p}, {mask:#b}) has no provenance"))),
        }
    }

    fn m_step(&self, (a, b, mask): Self::M) -> Result<MStep<Self::C, Self::M>> {
        let prov = self.m_prov[self.mi(a, b, mask)];
        match prov.tag() {
            TAG_EDGE => Ok(MStep::Edge { c: (a, mask) }),
            TAG_SPLIT => {
                let r = prov.vertex();
                let b1 = prov.mask();
                let t = self.tri.get(a, r, b);
                let b2 = mask & !b1 & !t.required_mask.bits();
                Ok(MStep::Triangle {
                    left: (a, r, b1),
                    right: (r, b, b2),
                })
            }
            _ => Err(Error::Internal(format!("M({a}, {b}, {mask:#b}) has no provenance"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prov_packing_roundtrip() {
        let p = Prov::new(TAG_SPLIT, 123_456, 0b1010_1010_1010_1010_1010);
        assert_eq!(p.tag(), TAG_SPLIT);
        assert_eq!(p.vertex(), 123_456);
        assert_eq!(p.mask(), 0b1010_1010_1010_1010_1010);
    }
}
