//! Inverted problem: required objects outside a clockwise polygon, penalties
//! paid for optional objects outside it.
//!
//! The outside is grown from a left half-plane: planks below segments are added
//! at the lower end `p` and planks above segments at the upper end `q`, each
//! together with a pocket `M` between the segment and the walk, until `p = q`
//! and a right half-plane closes the region. Vertical lines are sheared
//! symbolically: `r` lies left of the line through `v` iff `r <lex v`.

use crate::dijkstra::SolverOutput;
use crate::error::{Error, Result};
use crate::freespace::{assert_superiority, FreeSpaceGraph, ReferenceSet, TriangleContent};
use crate::geometry::{orient, Point};
use crate::instance::Instance;
use crate::label::{Core, Entry, Extension, Outcome};
use crate::scalar::{OrdWeight, Weight};
use crate::walk::{expand, Piece, Walk};

pub type RegionContent<S> = TriangleContent<S>;

/// A closed walk piece `C(p, mask)` or an open piece `M(a, b, mask)`.
type UPiece = Piece<(usize, u32), (usize, usize, u32)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlankDir {
    Up,
    Down,
}

/// Reference points strictly left (`r <lex v`) or right (`r >lex v`) of the
/// sheared vertical line through `v`.
pub fn halfplane_content<S: Weight>(v: Point, side: Side, refs: &ReferenceSet<S>) -> RegionContent<S> {
    match side {
        Side::Left => refs.content_where(|r| r < v),
        Side::Right => refs.content_where(|r| r > v),
    }
}

/// Reference points strictly between the sheared vertical lines through `a`
/// and `b`, on or above (`Up`) or on or below (`Down`) the segment `ab`.
pub fn plank_content<S: Weight>(a: Point, b: Point, dir: PlankDir, refs: &ReferenceSet<S>) -> RegionContent<S> {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    refs.content_where(|r| {
        a < r
            && r < b
            && match dir {
                PlankDir::Up => orient(a, b, r) >= 0,
                PlankDir::Down => orient(a, b, r) <= 0,
            }
    })
}

const KIND_U: u8 = 2;
const KIND_FINAL: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum UStep {
    None,
    /// Closed walk at the start vertex with this mask.
    Base(u32),
    /// Extended at the lower end from `p_old` by a pocket with this mask.
    Down(usize, u32),
    /// Extended at the upper end from `q_old` by a pocket with this mask.
    Up(usize, u32),
}

struct Unbounded<S: Weight> {
    n: usize,
    nm: usize,
    pts: Vec<Point>,
    left: Vec<RegionContent<S>>,
    right: Vec<RegionContent<S>>,
    up: Vec<RegionContent<S>>,
    down: Vec<RegionContent<S>>,
    unbounded_penalty: S,
    u_val: Vec<S>,
    u_fin: Vec<bool>,
    u_prov: Vec<UStep>,
    fin_u: Vec<Vec<u32>>,
    f_val: Vec<S>,
    f_mask: Vec<u32>,
}

impl<S: Weight> Unbounded<S> {
    fn new(core: &Core<'_, S>, inst: &Instance<S>) -> Self {
        let n = core.n;
        let nm = 1usize << core.k;
        let refs = ReferenceSet::new(inst);
        let pts: Vec<Point> = (0..n).map(|v| core.fsg.point(v)).collect();
        let mut up = vec![TriangleContent::empty(); n * n];
        let mut down = vec![TriangleContent::empty(); n * n];
        for a in 0..n {
            for b in 0..n {
                if pts[a] < pts[b] {
                    up[a * n + b] = plank_content(pts[a], pts[b], PlankDir::Up, &refs);
                    down[a * n + b] = plank_content(pts[a], pts[b], PlankDir::Down, &refs);
                }
            }
        }
        Unbounded {
            n,
            nm,
            left: pts.iter().map(|&v| halfplane_content(v, Side::Left, &refs)).collect(),
            right: pts.iter().map(|&v| halfplane_content(v, Side::Right, &refs)).collect(),
            pts,
            up,
            down,
            unbounded_penalty: inst.unbounded_penalty(),
            u_val: vec![S::infinity(); n * n * nm],
            u_fin: vec![false; n * n * nm],
            u_prov: vec![UStep::None; n * n * nm],
            fin_u: vec![Vec::new(); n * n],
            f_val: vec![S::infinity(); n],
            f_mask: vec![0; n],
        }
    }

    fn ui(&self, p: usize, q: usize, mask: u32) -> usize {
        (p * self.n + q) * self.nm + mask as usize
    }

    fn offer_u(&mut self, core: &mut Core<'_, S>, p: usize, q: usize, mask: u32, value: S, step: UStep) {
        let i = self.ui(p, q, mask);
        if !self.u_fin[i] && value < self.u_val[i] {
            self.u_val[i] = value;
            self.u_prov[i] = step;
            core.push(Entry { value: OrdWeight(value), kind: KIND_U, a: p as u32, b: q as u32, mask });
        }
    }

    fn offer_final(&mut self, core: &mut Core<'_, S>, s: usize, mask: u32, value: S) {
        if value < self.f_val[s] {
            self.f_val[s] = value;
            self.f_mask[s] = mask;
            core.push(Entry { value: OrdWeight(value), kind: KIND_FINAL, a: s as u32, b: 0, mask });
        }
    }

    /// Adds `content` and a pocket to a region with mask `mask`, if compatible.
    fn extend(mask: u32, content: &RegionContent<S>, pocket: u32) -> Option<u32> {
        let c = content.required_mask.bits();
        if content.penalty_sum.is_infinite() || mask & c != 0 || (mask | c) & pocket != 0 {
            return None;
        }
        Some(mask | c | pocket)
    }

    fn relax_u(&mut self, core: &mut Core<'_, S>, p: usize, q: usize, mask: u32, value: S) {
        let n = self.n;
        // lower end moves right from p to p2 along a pocket M(p2, p)
        for p2 in 0..n {
            if self.pts[p2] <= self.pts[p] || core.fin_m[p2 * n + p].is_empty() {
                continue;
            }
            let plank = self.down[p * n + p2];
            for j in 0..core.fin_m[p2 * n + p].len() {
                let bm = core.fin_m[p2 * n + p][j];
                if let Some(m) = Self::extend(mask, &plank, bm) {
                    let v = value + plank.penalty_sum + core.m_value(p2, p, bm);
                    self.offer_u(core, p2, q, m, v, UStep::Down(p, bm));
                }
            }
        }
        // upper end moves right from q to q2 along a pocket M(q, q2)
        for q2 in 0..n {
            if self.pts[q2] <= self.pts[q] || core.fin_m[q * n + q2].is_empty() {
                continue;
            }
            let plank = self.up[q * n + q2];
            for j in 0..core.fin_m[q * n + q2].len() {
                let bm = core.fin_m[q * n + q2][j];
                if let Some(m) = Self::extend(mask, &plank, bm) {
                    let v = value + plank.penalty_sum + core.m_value(q, q2, bm);
                    self.offer_u(core, p, q2, m, v, UStep::Up(q, bm));
                }
            }
        }
        if p == q {
            let right = self.right[p];
            if let Some(m) = Self::extend(mask, &right, 0) {
                if m == core.full {
                    let v = S::add_inf(value + right.penalty_sum, self.unbounded_penalty);
                    self.offer_final(core, p, mask, v);
                }
            }
        }
    }
}

impl<S: Weight> Extension<S> for Unbounded<S> {
    fn on_c_final(&mut self, core: &mut Core<'_, S>, v: usize, mask: u32, value: S) {
        let left = self.left[v];
        if let Some(m) = Self::extend(0, &left, mask) {
            self.offer_u(core, v, v, m, left.penalty_sum + value, UStep::Base(mask));
        }
    }

    fn on_m_final(&mut self, core: &mut Core<'_, S>, a: usize, b: usize, bm: u32, value: S) {
        let n = self.n;
        if self.pts[a] > self.pts[b] {
            // pocket M(p2 = a, p = b) at the lower end
            let plank = self.down[b * n + a];
            for q in 0..n {
                for j in 0..self.fin_u[b * n + q].len() {
                    let bu = self.fin_u[b * n + q][j];
                    if let Some(m) = Self::extend(bu, &plank, bm) {
                        let v = self.u_val[self.ui(b, q, bu)] + plank.penalty_sum + value;
                        self.offer_u(core, a, q, m, v, UStep::Down(b, bm));
                    }
                }
            }
        } else {
            // pocket M(q = a, q2 = b) at the upper end
            let plank = self.up[a * n + b];
            for p in 0..n {
                for j in 0..self.fin_u[p * n + a].len() {
                    let bu = self.fin_u[p * n + a][j];
                    if let Some(m) = Self::extend(bu, &plank, bm) {
                        let v = self.u_val[self.ui(p, a, bu)] + plank.penalty_sum + value;
                        self.offer_u(core, p, b, m, v, UStep::Up(a, bm));
                    }
                }
            }
        }
    }

    fn on_pop(&mut self, core: &mut Core<'_, S>, e: Entry<S>) -> bool {
        let value = e.value.0;
        match e.kind {
            KIND_U => {
                let (p, q, mask) = (e.a as usize, e.b as usize, e.mask);
                let i = self.ui(p, q, mask);
                if self.u_fin[i] || value > self.u_val[i] {
                    return false;
                }
                self.u_fin[i] = true;
                core.stats.finalized += 1;
                self.fin_u[p * self.n + q].push(mask);
                self.relax_u(core, p, q, mask, value);
                false
            }
            KIND_FINAL => value <= self.f_val[e.a as usize],
            _ => false,
        }
    }
}

impl<S: Weight> Unbounded<S> {
    /// Closed walk of the final label at `s`: lower-end pockets from the
    /// outside in, the base closed walk, then upper-end pockets from the inside out.
    fn extract(&self, core: &Core<'_, S>, s: usize) -> Result<Vec<usize>> {
        let (mut p, mut q, mut mask) = (s, s, self.f_mask[s]);
        let mut front: Vec<UPiece> = Vec::new();
        let mut back = Vec::new();
        loop {
            match self.u_prov[self.ui(p, q, mask)] {
                UStep::None => return Err(Error::Internal(format!("U({p}, {q}, {mask:#b}) has no provenance"))),
                UStep::Base(bc) => {
                    front.push(Piece::C((p, bc)));
                    break;
                }
                UStep::Down(p_old, bm) => {
                    front.push(Piece::M((p, p_old, bm)));
                    let plank = self.down[p_old * self.n + p];
                    mask &= !bm & !plank.required_mask.bits();
                    p = p_old;
                }
                UStep::Up(q_old, bm) => {
                    back.push(Piece::M((q_old, q, bm)));
                    let plank = self.up[q_old * self.n + q];
                    mask &= !bm & !plank.required_mask.bits();
                    q = q_old;
                }
            }
        }
        back.reverse();
        front.extend(back);
        expand(core, front)
    }
}

/// Minimum over clockwise closed walks `W` of weight plus penalties of
/// optional objects outside `W`, with every required object outside. The walk
/// is returned as derived (outside on its left); a point is a valid solution.
pub fn solve_inverted<S: Weight>(inst: &Instance<S>, fsg: &FreeSpaceGraph<S>) -> Result<SolverOutput<S>> {
    assert_superiority(fsg)?;
    let mut core = Core::new(inst, fsg)?;
    let point_cost = inst
        .polygons
        .iter()
        .filter(|p| p.kind == crate::instance::Kind::Optional)
        .fold(S::zero(), |a, p| S::add_inf(a, p.penalty));
    if fsg.n() == 0 {
        return Ok(SolverOutput { cost: point_cost, walk: Walk::empty(), stats: core.stats });
    }
    let mut ext = Unbounded::new(&core, inst);
    let outcome = core.run(&mut ext, false);
    core.stats.triangles = core.tri.len();
    let found = match outcome {
        Outcome::Stopped(e) if e.kind == KIND_FINAL => Some((e.a as usize, e.value.0)),
        _ => None,
    };
    match found {
        Some((s, cost)) if cost <= point_cost => {
            let vs = ext.extract(&core, s)?;
            let walk = Walk::closed_from(vs, fsg)?;
            Ok(SolverOutput { cost, walk, stats: core.stats })
        }
        _ => Ok(SolverOutput { cost: point_cost, walk: Walk::point(0), stats: core.stats }),
    }
}
