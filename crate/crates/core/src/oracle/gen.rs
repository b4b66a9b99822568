use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{rank, QMatrix, QVector, Rational};
use crate::convex::SublinearFunc;
use crate::function::{AffinePiece, PolyhedralFunction};
use crate::polyhedra::{Constraint, HPolyhedron};
use crate::setvalued::SetValuedMap;

/// FNV-1a, 64-bit.
pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Seeded instance source. The ChaCha8 key is
/// `seed ‖ fnv1a(stream) ‖ index ‖ 0⁶⁴`, all little-endian, so every
/// `(seed, stream, index)` triple owns an independent stream.
pub struct Gen {
    rng: ChaCha8Rng,
    coeff_bound: i64,
}

impl Gen {
    pub fn new(seed: u64, stream: &str, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&fnv1a(stream).to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        Gen {
            rng: ChaCha8Rng::from_seed(key),
            coeff_bound: 3,
        }
    }

    pub fn with_coeff_bound(mut self, bound: i64) -> Self {
        self.coeff_bound = bound.clamp(1, 16);
        self
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        self.rng.gen_ratio(num, den)
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    /// `k/d` with `|k| ≤ bound·d` and `d ∈ {1, 2}`.
    pub fn rational(&mut self, bound: i64) -> Rational {
        let d = self.int(1, 2);
        Rational::new(self.int(-bound * d, bound * d), d)
    }

    /// Entries in `{-1, -1/2, 0, 1/2, 1}`.
    pub fn small_point(&mut self, dim: usize) -> QVector {
        (0..dim)
            .map(|_| Rational::new(self.int(-2, 2), 2))
            .collect()
    }

    pub fn point(&mut self, dim: usize, bound: i64) -> QVector {
        (0..dim).map(|_| self.rational(bound)).collect()
    }

    pub fn int_vec(&mut self, dim: usize) -> QVector {
        let b = self.coeff_bound;
        (0..dim)
            .map(|_| Rational::from_integer(self.int(-b, b)))
            .collect()
    }

    pub fn nonzero_int_vec(&mut self, dim: usize) -> QVector {
        loop {
            let v = self.int_vec(dim);
            if !v.is_zero() {
                return v;
            }
        }
    }

    /// `k × n` integer matrix of rank `min(k, n)`.
    pub fn full_rank_matrix(&mut self, k: usize, n: usize) -> QMatrix {
        loop {
            let rows: Vec<QVector> = (0..k).map(|_| self.int_vec(n)).collect();
            let m = QMatrix::with_cols(rows, n).expect("row width");
            if rank(&m) == k.min(n) {
                return m;
            }
        }
    }

    /// `extra` random halfspaces keeping `center` at slack ≥ 1/2, plus a box
    /// of half-width 1 or 2 around `center` when `bounded`.
    pub fn set_around(&mut self, center: &QVector, extra: usize, bounded: bool) -> HPolyhedron {
        let dim = center.dim();
        let mut cons = Vec::new();
        for _ in 0..extra {
            let a = self.nonzero_int_vec(dim).primitive();
            let slack = Rational::new(self.int(1, 4), 2);
            let b = a.dot(center) + slack;
            cons.push(Constraint::le(a, b));
        }
        if bounded {
            for i in 0..dim {
                let w = Rational::from_integer(self.int(1, 2));
                cons.push(Constraint::le(QVector::unit(dim, i), &center[i] + &w));
                cons.push(Constraint::ge(QVector::unit(dim, i), &center[i] - &w));
            }
        }
        if cons.is_empty() {
            let a = self.nonzero_int_vec(dim);
            let b = a.dot(center) + Rational::one();
            cons.push(Constraint::le(a, b));
        }
        HPolyhedron::closed(dim, cons).expect("row width")
    }

    /// A full-dimensional closed set: bounded two times in three.
    pub fn set(&mut self, dim: usize) -> HPolyhedron {
        let c = self.small_point(dim);
        self.set_with_center(&c)
    }

    pub fn set_with_center(&mut self, c: &QVector) -> HPolyhedron {
        let dim = c.dim();
        let bounded = self.chance(2, 3);
        let extra = if bounded {
            self.int(0, 2)
        } else {
            self.int(1, dim as i64 + 1)
        };
        self.set_around(c, extra as usize, bounded)
    }

    pub fn polytope(&mut self, dim: usize) -> HPolyhedron {
        let c = self.small_point(dim);
        let extra = self.int(0, 2) as usize;
        self.set_around(&c, extra, true)
    }

    /// A full-dimensional convex graph, bounded in `y` over a box in `x`
    /// two times in three.
    pub fn map_around(&mut self, cx: &QVector, cy: &QVector) -> SetValuedMap {
        let c = cx.concat(cy);
        let g = self.set_with_center(&c);
        SetValuedMap::new(cx.dim(), cy.dim(), g).expect("graph dims")
    }

    /// `max(gᵢ·x + cᵢ)` on a full-dimensional domain around `center` (or on
    /// the whole space).
    pub fn function_around(&mut self, center: &QVector) -> PolyhedralFunction {
        let dim = center.dim();
        let k = self.int(1, 3) as usize;
        let pieces = self.affine_pieces(dim, k);
        let domain = if self.chance(3, 4) {
            Some(self.set_with_center(center))
        } else {
            None
        };
        PolyhedralFunction::max_affine(dim, &pieces, domain.as_ref()).expect("finite pieces")
    }

    pub fn affine_pieces(&mut self, dim: usize, k: usize) -> Vec<AffinePiece> {
        (0..k)
            .map(|_| AffinePiece {
                g: self.int_vec(dim),
                c: Rational::from_integer(self.int(-2, 2)),
            })
            .collect()
    }

    /// A sublinear function with `k` pieces, one of them zero when `nonneg`.
    pub fn sublinear(&mut self, dim: usize, k: usize, nonneg: bool) -> SublinearFunc {
        let mut pieces: Vec<QVector> = (0..k).map(|_| self.int_vec(dim)).collect();
        if nonneg {
            pieces.push(QVector::zeros(dim));
        }
        SublinearFunc::new(pieces).expect("nonempty pieces")
    }

    /// A sublinear function `p ≥ 0` with `0 ∈ core(conv pieces)`, so that `p`
    /// is a norm-like gauge and every `g ≤ p` on a subspace extends.
    pub fn norm_like(&mut self, dim: usize) -> SublinearFunc {
        let mut pieces = Vec::new();
        for i in 0..dim {
            let w = Rational::from_integer(self.int(1, 2));
            pieces.push(QVector::unit(dim, i).scale(&w));
            let w = Rational::from_integer(self.int(1, 2));
            pieces.push(QVector::unit(dim, i).scale(&-w));
        }
        for _ in 0..self.int(0, 2) {
            pieces.push(self.int_vec(dim));
        }
        SublinearFunc::new(pieces).expect("nonempty pieces")
    }
}
