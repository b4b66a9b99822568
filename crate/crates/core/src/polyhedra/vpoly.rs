use serde::{Deserialize, Serialize};

use super::dd::cone_generators;
use super::hpoly::{Constraint, HPolyhedron};
use crate::arith::{QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpConstraint, LpProblem};

/// `conv(vertices) + cone(rays)`; empty when there are no vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VPolyhedron {
    dim: usize,
    vertices: Vec<QVector>,
    rays: Vec<QVector>,
}

fn check_all(dim: usize, vs: &[QVector]) -> Result<()> {
    match vs.iter().find(|v| v.dim() != dim) {
        Some(v) => Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        }),
        None => Ok(()),
    }
}

impl VPolyhedron {
    /// Sorts and deduplicates generators; rays are scaled to primitive
    /// integer directions and zero rays are dropped. Rays without vertices
    /// describe the empty set.
    pub fn new(dim: usize, vertices: Vec<QVector>, rays: Vec<QVector>) -> Result<Self> {
        check_all(dim, &vertices)?;
        check_all(dim, &rays)?;
        let mut vertices = vertices;
        vertices.sort();
        vertices.dedup();
        let mut rays: Vec<QVector> = if vertices.is_empty() {
            Vec::new()
        } else {
            rays.into_iter()
                .filter(|r| !r.is_zero())
                .map(|r| r.primitive())
                .collect()
        };
        rays.sort();
        rays.dedup();
        Ok(VPolyhedron {
            dim,
            vertices,
            rays,
        })
    }

    pub fn empty(dim: usize) -> Self {
        VPolyhedron {
            dim,
            vertices: Vec::new(),
            rays: Vec::new(),
        }
    }

    pub fn point(v: QVector) -> Self {
        VPolyhedron {
            dim: v.dim(),
            vertices: vec![v],
            rays: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[QVector] {
        &self.vertices
    }

    pub fn rays(&self) -> &[QVector] {
        &self.rays
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn contains_point(&self, x: &QVector) -> Result<bool> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        if self.is_empty() {
            return Ok(false);
        }
        in_hull(x, &self.vertices, &self.rays)
    }

    /// Drops generators that are combinations of the others (one LP each).
    pub fn remove_redundant(&self) -> Result<VPolyhedron> {
        let mut rays = self.rays.clone();
        let mut i = 0;
        while i < rays.len() {
            let others: Vec<QVector> = rays
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| r.clone())
                .collect();
            if !others.is_empty() && in_hull(&rays[i], &[], &others)? {
                rays.remove(i);
            } else {
                i += 1;
            }
        }
        let mut vertices = self.vertices.clone();
        let mut i = 0;
        while i < vertices.len() {
            let others: Vec<QVector> = vertices
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.clone())
                .collect();
            if !others.is_empty() && in_hull(&vertices[i], &others, &rays)? {
                vertices.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(VPolyhedron {
            dim: self.dim,
            vertices,
            rays,
        })
    }

    /// `{M·x + c}` for generators pushed through the map.
    pub fn affine_image(&self, m: &QMatrix, shift: &QVector) -> Result<VPolyhedron> {
        if m.col_count() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.col_count(),
            });
        }
        if shift.dim() != m.row_count() {
            return Err(Error::DimensionMismatch {
                expected: m.row_count(),
                found: shift.dim(),
            });
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| Ok(m.mul_vec(v)?.add(shift)))
            .collect::<Result<Vec<_>>>()?;
        let rays = self
            .rays
            .iter()
            .map(|r| m.mul_vec(r))
            .collect::<Result<Vec<_>>>()?;
        VPolyhedron::new(m.row_count(), vertices, rays)?.remove_redundant()
    }

    pub fn neg(&self) -> VPolyhedron {
        VPolyhedron::new(
            self.dim,
            self.vertices.iter().map(QVector::neg).collect(),
            self.rays.iter().map(QVector::neg).collect(),
        )
        .unwrap()
    }

    /// Constraint form by double description on the cone of valid
    /// inequalities `{(a, β) : a·v ≤ β, a·r ≤ 0}`.
    pub fn to_h(&self) -> HPolyhedron {
        let n = self.dim;
        if self.is_empty() {
            return HPolyhedron::empty(n);
        }
        let minus_one = QVector::from_ints(&[-1]);
        let zero = QVector::zeros(1);
        let mut hs: Vec<QVector> = self.vertices.iter().map(|v| v.concat(&minus_one)).collect();
        hs.extend(self.rays.iter().map(|r| r.concat(&zero)));
        let g = cone_generators(n + 1, &hs);
        let mut cons = Vec::new();
        for r in &g.rays {
            cons.push(Constraint::le(r.slice(0..n), r[n].clone()));
        }
        for l in &g.lines {
            cons.push(Constraint::le(l.slice(0..n), l[n].clone()));
            cons.push(Constraint::ge(l.slice(0..n), l[n].clone()));
        }
        let h = HPolyhedron::closed(n, cons).unwrap();
        if g.lines.is_empty() {
            h
        } else {
            h.remove_redundant().unwrap()
        }
    }
}

/// Generator form by double description on the homogenized cone
/// `{(x, s) : a·x ≤ b·s, s ≥ 0}`. Lineality is emitted as `±` ray pairs.
pub fn h_to_v(p: &HPolyhedron) -> Result<VPolyhedron> {
    if !p.is_closed() {
        return Err(Error::OpenInput("convert_representation"));
    }
    let n = p.dim();
    if p.is_marked_empty() {
        return Ok(VPolyhedron::empty(n));
    }
    let mut hs = vec![QVector::unit(n + 1, n).neg()];
    for c in p.constraints() {
        let mut h = c.a.clone();
        h.push(-c.b.clone());
        hs.push(h);
    }
    let g = cone_generators(n + 1, &hs);
    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for r in &g.rays {
        let s = &r[n];
        if s.is_zero() {
            rays.push(r.slice(0..n));
        } else {
            vertices.push(r.slice(0..n).scale(&s.recip()));
        }
    }
    if vertices.is_empty() {
        return Ok(VPolyhedron::empty(n));
    }
    for l in &g.lines {
        debug_assert!(l[n].is_zero());
        rays.push(l.slice(0..n));
        rays.push(l.slice(0..n).neg());
    }
    VPolyhedron::new(n, vertices, rays)
}

/// Either representation converted to the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Representation {
    H(HPolyhedron),
    V(VPolyhedron),
}

pub fn convert_representation(p: &Representation) -> Result<Representation> {
    Ok(match p {
        Representation::H(h) => Representation::V(h_to_v(h)?),
        Representation::V(v) => Representation::H(v.to_h()),
    })
}

/// `x ∈ conv(vertices) + cone(rays)`; with no vertices, plain cone
/// membership.
pub fn in_hull(x: &QVector, vertices: &[QVector], rays: &[QVector]) -> Result<bool> {
    let dim = x.dim();
    let (nv, nr) = (vertices.len(), rays.len());
    let nvar = nv + nr;
    if nvar == 0 {
        return Ok(x.is_zero());
    }
    let mut p = LpProblem::feasibility(nvar);
    for j in 0..nvar {
        p.push(LpConstraint::ge(QVector::unit(nvar, j), Rational::zero()));
    }
    if nv > 0 {
        let mut s = QVector::zeros(nvar);
        for j in 0..nv {
            s[j] = Rational::one();
        }
        p.push(LpConstraint::eq(s, Rational::one()));
    }
    for i in 0..dim {
        let row: QVector = vertices
            .iter()
            .chain(rays.iter())
            .map(|g| g[i].clone())
            .collect();
        p.push(LpConstraint::eq(row, x[i].clone()));
    }
    Ok(solve_lp(&p)?.is_feasible())
}

/// `P ⊕ Q` on generators: pairwise vertex sums, union of rays.
pub fn minkowski_sum(p: &VPolyhedron, q: &VPolyhedron) -> Result<VPolyhedron> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    if p.is_empty() || q.is_empty() {
        return Ok(VPolyhedron::empty(p.dim));
    }
    let mut vertices = Vec::with_capacity(p.vertices.len() * q.vertices.len());
    for a in &p.vertices {
        for b in &q.vertices {
            vertices.push(a.add(b));
        }
    }
    let mut rays = p.rays.clone();
    rays.extend(q.rays.iter().cloned());
    VPolyhedron::new(p.dim, vertices, rays)?.remove_redundant()
}

/// A closed convex cone `{Σ λᵢ gᵢ : λᵢ ≥ 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cone {
    dim: usize,
    generators: Vec<QVector>,
}

impl Cone {
    pub fn new(dim: usize, generators: Vec<QVector>) -> Result<Self> {
        check_all(dim, &generators)?;
        let mut generators: Vec<QVector> = generators
            .into_iter()
            .filter(|g| !g.is_zero())
            .map(|g| g.primitive())
            .collect();
        generators.sort();
        generators.dedup();
        Ok(Cone { dim, generators })
    }

    pub fn trivial(dim: usize) -> Self {
        Cone {
            dim,
            generators: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[QVector] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, f: &QVector) -> Result<bool> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.dim(),
            });
        }
        in_hull(f, &[], &self.generators)
    }

    /// Mutual generator membership.
    pub fn set_eq(&self, other: &Cone) -> Result<bool> {
        for g in &other.generators {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_vpoly(&self) -> VPolyhedron {
        VPolyhedron::new(
            self.dim,
            vec![QVector::zeros(self.dim)],
            self.generators.clone(),
        )
        .unwrap()
    }

    pub fn to_h(&self) -> HPolyhedron {
        self.to_vpoly().to_h()
    }

    /// Sum of cones: union of generators.
    pub fn sum(&self, other: &Cone) -> Result<Cone> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Cone::new(self.dim, g)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawV {
    dim: usize,
    vertices: Vec<QVector>,
    #[serde(default)]
    rays: Vec<QVector>,
}

impl<'de> Deserialize<'de> for VPolyhedron {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawV::deserialize(d)?;
        VPolyhedron::new(raw.dim, raw.vertices, raw.rays).map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    dim: usize,
    generators: Vec<QVector>,
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCone::deserialize(d)?;
        Cone::new(raw.dim, raw.generators).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qv};

    fn square() -> HPolyhedron {
        HPolyhedron::cube(2, q(-1, 1), q(1, 1))
    }

    #[test]
    fn square_to_vertices() {
        let v = h_to_v(&square()).unwrap();
        assert_eq!(
            v.vertices(),
            &[qv(&[-1, -1]), qv(&[-1, 1]), qv(&[1, -1]), qv(&[1, 1])]
        );
        assert!(v.rays().is_empty());
        assert_eq!(v.to_h(), square());
    }

    #[test]
    fn orthant_to_vertex_and_rays() {
        let p = HPolyhedron::from_ints(2, &[(&[-1, 0], 0), (&[0, -1], 0)]);
        let v = h_to_v(&p).unwrap();
        assert_eq!(v.vertices(), &[qv(&[0, 0])]);
        assert_eq!(v.rays(), &[qv(&[0, 1]), qv(&[1, 0])]);
        assert_eq!(v.to_h(), p);
    }

    #[test]
    fn halfline() {
        let p = HPolyhedron::from_ints(1, &[(&[1], 0)]);
        let v = h_to_v(&p).unwrap();
        assert_eq!(v.vertices(), &[qv(&[0])]);
        assert_eq!(v.rays(), &[qv(&[-1])]);
    }

    #[test]
    fn halfplane_has_lineality() {
        let p = HPolyhedron::from_ints(2, &[(&[1, 0], 0)]);
        let v = h_to_v(&p).unwrap();
        assert_eq!(v.vertices().len(), 1);
        assert_eq!(v.rays().len(), 3);
        assert_eq!(v.to_h(), p);
    }

    #[test]
    fn open_input_rejected() {
        assert!(h_to_v(&square().strict_version()).is_err());
    }

    #[test]
    fn empty_and_point() {
        let e = HPolyhedron::from_ints(1, &[(&[1], 0), (&[-1], -1)]);
        assert!(h_to_v(&e).unwrap().is_empty());
        let pt = VPolyhedron::point(qv(&[2, 3]));
        let h = pt.to_h();
        assert!(h.contains_point(&qv(&[2, 3])).unwrap());
        assert!(!h.contains_point(&qv(&[2, 4])).unwrap());
        assert_eq!(h.constraints().len(), 4);
    }

    #[test]
    fn minkowski_examples() {
        let i = VPolyhedron::new(1, vec![qv(&[0]), qv(&[1])], vec![]).unwrap();
        let s = minkowski_sum(&i, &i).unwrap();
        assert_eq!(s.vertices(), &[qv(&[0]), qv(&[2])]);
        let sq = h_to_v(&square()).unwrap();
        let shifted = minkowski_sum(&sq, &VPolyhedron::point(qv(&[5, 0]))).unwrap();
        assert_eq!(
            shifted.vertices(),
            &[qv(&[4, -1]), qv(&[4, 1]), qv(&[6, -1]), qv(&[6, 1])]
        );
        let hseg = VPolyhedron::new(2, vec![qv(&[0, 0]), qv(&[1, 0])], vec![]).unwrap();
        let vseg = VPolyhedron::new(2, vec![qv(&[0, 0]), qv(&[0, 1])], vec![]).unwrap();
        let unit = minkowski_sum(&hseg, &vseg).unwrap();
        assert_eq!(unit.to_h(), HPolyhedron::cube(2, q(0, 1), q(1, 1)));
    }

    #[test]
    fn affine_images() {
        let sq = h_to_v(&square()).unwrap();
        let proj = sq
            .affine_image(&QMatrix::from_ints(&[&[1, 0]]), &qv(&[0]))
            .unwrap();
        assert_eq!(proj.vertices(), &[qv(&[-1]), qv(&[1])]);
        let id = sq
            .affine_image(&QMatrix::identity(2), &qv(&[0, 0]))
            .unwrap();
        assert_eq!(id, sq);
        let orth = Cone::new(2, vec![qv(&[1, 0]), qv(&[0, 1])])
            .unwrap()
            .to_vpoly();
        let img = orth
            .affine_image(&QMatrix::from_ints(&[&[1, 1]]), &qv(&[0]))
            .unwrap();
        assert_eq!(img.vertices(), &[qv(&[0])]);
        assert_eq!(img.rays(), &[qv(&[1])]);
    }

    #[test]
    fn cone_membership() {
        let c = Cone::new(2, vec![qv(&[1, 0]), qv(&[0, 1])]).unwrap();
        assert!(c.contains(&qv(&[2, 3])).unwrap());
        assert!(!c.contains(&qv(&[-1, 0])).unwrap());
        assert!(Cone::trivial(2).contains(&qv(&[0, 0])).unwrap());
        let h = c.to_h();
        assert_eq!(
            h,
            HPolyhedron::from_ints(2, &[(&[-1, 0], 0), (&[0, -1], 0)])
        );
    }
}
