//! Double description: generators of `{z : hₖ·z ≤ 0}`.

use crate::arith::{QVector, Rational};

/// Lineality basis and extreme rays of a polyhedral cone.
#[derive(Clone, Debug, Default)]
pub(crate) struct ConeGenerators {
    pub lines: Vec<QVector>,
    pub rays: Vec<QVector>,
}

#[derive(Clone)]
struct Ray {
    v: QVector,
    zeros: Vec<u64>,
}

fn bit_set(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

/// Incremental double description over the halfspaces in order, starting
/// from the whole space as a lineality basis. Adjacency uses the
/// combinatorial test with the rank-count prefilter.
pub(crate) fn cone_generators(dim: usize, halfspaces: &[QVector]) -> ConeGenerators {
    let words = halfspaces.len().div_ceil(64).max(1);
    let mut lines: Vec<QVector> = (0..dim).map(|i| QVector::unit(dim, i)).collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (k, h) in halfspaces.iter().enumerate() {
        if h.is_zero() {
            for r in rays.iter_mut() {
                bit_set(&mut r.zeros, k);
            }
            continue;
        }
        if let Some(li) = lines.iter().position(|l| !h.dot(l).is_zero()) {
            let mut l = lines.remove(li);
            let mut hl = h.dot(&l);
            if hl.is_positive() {
                l = l.neg();
                hl = -hl;
            }
            let project = |z: &QVector| -> QVector {
                let hz = h.dot(z);
                if hz.is_zero() {
                    z.clone()
                } else {
                    z.add_scaled(&-(&hz / &hl), &l).primitive()
                }
            };
            for line in lines.iter_mut() {
                *line = project(line);
            }
            for r in rays.iter_mut() {
                r.v = project(&r.v);
                bit_set(&mut r.zeros, k);
            }
            let mut zeros = vec![0u64; words];
            for j in 0..k {
                bit_set(&mut zeros, j);
            }
            rays.push(Ray {
                v: l.primitive(),
                zeros,
            });
            continue;
        }

        let vals: Vec<Rational> = rays.iter().map(|r| h.dot(&r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        if pos.is_empty() {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    bit_set(&mut r.zeros, k);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let pointed_dim = dim - lines.len();
        let mut next: Vec<Ray> = Vec::new();
        for i in 0..rays.len() {
            if vals[i].is_positive() {
                continue;
            }
            let mut r = rays[i].clone();
            if vals[i].is_zero() {
                bit_set(&mut r.zeros, k);
            }
            next.push(r);
        }
        for &p in &pos {
            for &n in &neg {
                let common = and(&rays[p].zeros, &rays[n].zeros);
                if popcount(&common) + 2 < pointed_dim {
                    continue;
                }
                let adjacent =
                    (0..rays.len()).all(|o| o == p || o == n || !subset(&common, &rays[o].zeros));
                if !adjacent {
                    continue;
                }
                let v = rays[n]
                    .v
                    .scale(&vals[p])
                    .add_scaled(&-vals[n].clone(), &rays[p].v)
                    .primitive();
                let mut zeros = common;
                bit_set(&mut zeros, k);
                next.push(Ray { v, zeros });
            }
        }
        rays = next;
    }

    let mut rays: Vec<QVector> = rays.into_iter().map(|r| r.v).collect();
    rays.sort();
    rays.dedup();
    ConeGenerators { lines, rays }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qv;

    #[test]
    fn orthant() {
        let g = cone_generators(2, &[qv(&[-1, 0]), qv(&[0, -1])]);
        assert!(g.lines.is_empty());
        assert_eq!(g.rays, vec![qv(&[0, 1]), qv(&[1, 0])]);
    }

    #[test]
    fn halfplane_keeps_a_line() {
        let g = cone_generators(2, &[qv(&[1, 0])]);
        assert_eq!(g.lines.len(), 1);
        assert_eq!(g.rays, vec![qv(&[-1, 0])]);
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        // cone over the square |x|,|y| ≤ s
        let h = [
            qv(&[1, 0, -1]),
            qv(&[-1, 0, -1]),
            qv(&[0, 1, -1]),
            qv(&[0, -1, -1]),
        ];
        let g = cone_generators(3, &h);
        assert!(g.lines.is_empty());
        assert_eq!(g.rays.len(), 4);
        for r in &g.rays {
            assert_eq!(r[2], Rational::one());
        }
    }

    #[test]
    fn trivial_cone() {
        let g = cone_generators(1, &[qv(&[1]), qv(&[-1])]);
        assert!(g.lines.is_empty());
        assert!(g.rays.is_empty());
    }
}
