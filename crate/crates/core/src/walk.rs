//! Walks on the free-space graph and reconstruction from solver provenance.

use crate::error::{Error, Result};
use crate::freespace::FreeSpaceGraph;
use crate::geometry::{winding_number, Point};
use crate::instance::Instance;
use crate::scalar::Weight;

/// Sequence of free-space vertex ids. A closed walk repeats its first vertex at
/// the end; a point walk is a single vertex; the empty walk has no vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk<S> {
    pub vertices: Vec<usize>,
    pub closed: bool,
    pub weight: S,
}

impl<S: Weight> Walk<S> {
    pub fn empty() -> Self {
        Walk {
            vertices: Vec::new(),
            closed: true,
            weight: S::zero(),
        }
    }

    pub fn point(v: usize) -> Self {
        Walk {
            vertices: vec![v],
            closed: true,
            weight: S::zero(),
        }
    }

    /// Closed walk through `vertices` (first vertex repeated at the end, or a single point).
    pub fn closed_from(vertices: Vec<usize>, fsg: &FreeSpaceGraph<S>) -> Result<Self> {
        let mut w = Walk {
            vertices,
            closed: true,
            weight: S::zero(),
        };
        if w.vertices.len() > 1 && w.vertices.first() != w.vertices.last() {
            return Err(Error::Internal("closed walk does not return to its start".into()));
        }
        w.weight = w.compute_weight(fsg)?;
        Ok(w)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Sum of free-space edge weights; fails if a step is not a free-space edge.
    pub fn compute_weight(&self, fsg: &FreeSpaceGraph<S>) -> Result<S> {
        let mut total = S::zero();
        for w in self.vertices.windows(2) {
            let e = fsg.weight(w[0], w[1]).ok_or_else(|| {
                Error::Internal(format!("walk step {}-{} is not a free-space edge", w[0], w[1]))
            })?;
            total = total + e;
        }
        Ok(total)
    }

    /// Vertex positions of a closed walk, without the repeated endpoint.
    pub fn ring(&self, fsg: &FreeSpaceGraph<S>) -> Vec<Point> {
        let mut pts: Vec<Point> = self.vertices.iter().map(|&v| fsg.point(v)).collect();
        if self.closed && pts.len() > 1 {
            pts.pop();
        }
        pts
    }
}

/// One derivation step of a closed-walk label.
pub(crate) enum CStep<C, M> {
    Point,
    /// `p -> q` followed by the walk of `M(qp)`.
    Edge { m: M },
    Compose(C, C),
}

/// One derivation step of an open-walk label from `p` to `q`.
pub(crate) enum MStep<C, M> {
    /// Closed walk at `p` followed by the edge `pq`.
    Edge { c: C },
    /// Walk `p -> r` followed by walk `r -> q`.
    Triangle { left: M, right: M },
}

/// Provenance of C- and M-labels, shared by the solvers.
pub(crate) trait Derivations {
    type C: Copy;
    type M: Copy;
    fn c_vertex(&self, c: Self::C) -> usize;
    fn m_target(&self, m: Self::M) -> usize;
    fn c_step(&self, c: Self::C) -> Result<CStep<Self::C, Self::M>>;
    fn m_step(&self, m: Self::M) -> Result<MStep<Self::C, Self::M>>;
}

pub(crate) enum Piece<C, M> {
    C(C),
    M(M),
    Vertex(usize),
}

/// Expands a sequence of pieces into a vertex list. Adjacent walks share their
/// junction vertex, which is emitted once.
pub(crate) fn expand<D: Derivations>(d: &D, pieces: Vec<Piece<D::C, D::M>>) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    let mut stack: Vec<Piece<D::C, D::M>> = pieces.into_iter().rev().collect();
    let mut steps = 0usize;
    while let Some(piece) = stack.pop() {
        steps += 1;
        if steps > 1 << 28 {
            return Err(Error::Internal("provenance does not terminate".into()));
        }
        match piece {
            Piece::Vertex(v) => {
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
            Piece::C(c) => match d.c_step(c)? {
                CStep::Point => stack.push(Piece::Vertex(d.c_vertex(c))),
                CStep::Edge { m } => {
                    stack.push(Piece::M(m));
                    stack.push(Piece::Vertex(d.c_vertex(c)));
                }
                CStep::Compose(a, b) => {
                    stack.push(Piece::C(b));
                    stack.push(Piece::C(a));
                }
            },
            Piece::M(m) => match d.m_step(m)? {
                MStep::Edge { c } => {
                    stack.push(Piece::Vertex(d.m_target(m)));
                    stack.push(Piece::C(c));
                }
                MStep::Triangle { left, right } => {
                    stack.push(Piece::M(right));
                    stack.push(Piece::M(left));
                }
            },
        }
    }
    Ok(out)
}

/// Closed walk of a C-label.
pub(crate) fn extract_closed<D: Derivations, S: Weight>(
    d: &D,
    c: D::C,
    fsg: &FreeSpaceGraph<S>,
) -> Result<Walk<S>> {
    let vs = expand(d, vec![Piece::C(c)])?;
    Walk::closed_from(vs, fsg)
}

/// Winding numbers of a closed walk around the required reference points, in mask order.
pub fn required_windings<S: Weight>(
    walk: &Walk<S>,
    inst: &Instance<S>,
    fsg: &FreeSpaceGraph<S>,
) -> Result<Vec<i64>> {
    let ring = walk.ring(fsg);
    let ids: Vec<usize> = inst.required_indices();
    ids.iter()
        .map(|&i| {
            winding_number(&ring, inst.reference(i))
                .map_err(|_| Error::ReferenceOnWalk(inst.polygons[i].id.clone()))
        })
        .collect()
}

/// Walk weight plus winding-number-weighted penalties of optional reference points.
pub fn evaluate_dp_cost<S: Weight>(
    walk: &Walk<S>,
    inst: &Instance<S>,
    fsg: &FreeSpaceGraph<S>,
) -> Result<S> {
    let ring = walk.ring(fsg);
    let mut cost = walk.compute_weight(fsg)?;
    for (i, p) in inst.polygons.iter().enumerate() {
        if p.unbounded {
            continue;
        }
        let w = winding_number(&ring, inst.reference(i))
            .map_err(|_| Error::ReferenceOnWalk(p.id.clone()))?;
        if w != 0 && p.kind == crate::instance::Kind::Optional {
            cost = S::add_inf(cost, S::from_i64(w).unwrap() * p.penalty);
        }
    }
    Ok(cost)
}
