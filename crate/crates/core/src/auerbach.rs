//! Auerbach systems: unit vectors `e_i` spanning a finite-dimensional
//! subspace with biorthogonal functionals of unit dual norm.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::RMatrix;
use crate::scalar::{exact_sqrt, from_f64, ratio, scalar_serde, to_f64, Scalar};
use crate::space::{pair, AmbientSpace};
use crate::vector::CoefVector;

/// Largest defect accepted from the numerical optimizer.
pub const AUERBACH_TOLERANCE: f64 = 1e-6;

const MAX_NUMERIC_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuerbachSystem {
    pub space: AmbientSpace,
    pub vectors: Vec<CoefVector>,
    pub functionals: Vec<CoefVector>,
    /// Exact upper bound for the norm defects `|‖e_i‖ - 1|`, `|‖e*_i‖ - 1|`.
    /// Biorthogonality is always exact.
    #[serde(with = "scalar_serde")]
    pub tau: Scalar,
    pub method: String,
}

impl AuerbachSystem {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// `max |e*_i(e_j) - δ_ij|`, computed exactly.
    pub fn biorthogonality_defect(&self) -> Scalar {
        let mut worst = Scalar::zero();
        for (i, f) in self.functionals.iter().enumerate() {
            for (j, e) in self.vectors.iter().enumerate() {
                let target = if i == j { Scalar::one() } else { Scalar::zero() };
                let d = (pair(f, e) - target).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Recomputed exact bound on the norm defects (same quantity as `tau`).
    pub fn norm_defect(&self) -> Scalar {
        let mut worst = Scalar::zero();
        for v in &self.vectors {
            worst = worst.max(unit_defect(&self.space.norm(v)));
        }
        for f in &self.functionals {
            worst = worst.max(unit_defect(&self.space.dual_norm(f)));
        }
        worst
    }

    /// `y = Σ e*_i(y) e_i` for `y` in the span.
    pub fn coordinates(&self, y: &CoefVector) -> Vec<Scalar> {
        self.functionals.iter().map(|f| pair(f, y)).collect()
    }
}

/// Exact bound on `|‖v‖ - 1|` (through `|‖v‖² - 1|` for squared values).
fn unit_defect(n: &crate::scalar::NormValue) -> Scalar {
    if n.is_squared() {
        match exact_sqrt(n.stored()) {
            Some(r) => (r - Scalar::one()).abs(),
            None => (n.stored() - Scalar::one()).abs(),
        }
    } else {
        (n.stored() - Scalar::one()).abs()
    }
}

/// Coordinates touched by the span, and the `coords × d` matrix of the span.
fn span_matrix(span: &[CoefVector]) -> (Vec<usize>, RMatrix) {
    let mut coords: Vec<usize> = span.iter().flat_map(|v| v.support()).collect();
    coords.sort_unstable();
    coords.dedup();
    let mut b = RMatrix::zeros(coords.len(), span.len());
    for (c, v) in span.iter().enumerate() {
        for (i, x) in v.iter() {
            let r = coords.binary_search(&i).unwrap();
            b.set(r, c, x.clone());
        }
    }
    (coords, b)
}

pub fn auerbach_basis(span: &[CoefVector], space: AmbientSpace) -> Result<AuerbachSystem> {
    if span.is_empty() {
        return Ok(AuerbachSystem {
            space,
            vectors: Vec::new(),
            functionals: Vec::new(),
            tau: Scalar::zero(),
            method: "empty".into(),
        });
    }
    let (coords, b) = span_matrix(span);
    let d = span.len();
    if b.rank() < d {
        return Err(FrameError::DependentSpan);
    }
    match space {
        AmbientSpace::L2 => Ok(orthonormal(span)),
        _ if span.iter().all(|v| v.support_len() == 1) => Ok(coordinate_system(&coords, space)),
        _ => {
            if d > MAX_NUMERIC_DIM {
                return Err(FrameError::Precondition(format!(
                    "numerical Auerbach search supports d <= {MAX_NUMERIC_DIM}, got {d}"
                )));
            }
            determinant_maximizer(&coords, &b, space)
        }
    }
}

fn coordinate_system(coords: &[usize], space: AmbientSpace) -> AuerbachSystem {
    AuerbachSystem {
        space,
        vectors: coords.iter().map(|&c| CoefVector::unit(c)).collect(),
        functionals: coords.iter().map(|&c| CoefVector::unit(c)).collect(),
        tau: Scalar::zero(),
        method: "coordinates".into(),
    }
}

/// Rational Gram–Schmidt. Each `u_i` is scaled by a rational close to
/// `1/‖u_i‖` (exactly when `‖u_i‖` is rational) and paired with the
/// functional `u_i / (scale ‖u_i‖²)`, so biorthogonality is exact.
fn orthonormal(span: &[CoefVector]) -> AuerbachSystem {
    let mut us: Vec<(CoefVector, Scalar)> = Vec::new();
    for v in span {
        let mut u = v.clone();
        for (w, nn) in &us {
            let c = pair(w, v) / nn;
            u = u.add_scaled(&-c, w);
        }
        let nn = pair(&u, &u);
        us.push((u, nn));
    }
    let mut vectors = Vec::new();
    let mut functionals = Vec::new();
    for (u, nn) in &us {
        let s = match exact_sqrt(nn) {
            Some(r) => Scalar::one() / r,
            None => from_f64(1.0 / to_f64(nn).sqrt()),
        };
        vectors.push(u.scale(&s));
        functionals.push(u.scale(&(Scalar::one() / (&s * nn))));
    }
    let mut sys = AuerbachSystem {
        space: AmbientSpace::L2,
        vectors,
        functionals,
        tau: Scalar::zero(),
        method: "gram-schmidt".into(),
    };
    sys.tau = sys.norm_defect();
    sys
}

fn lp_solution(problem: &Problem, vars: &[minilp::Variable]) -> Option<Vec<f64>> {
    let sol = problem.solve().ok()?;
    Some(vars.iter().map(|v| *sol.var_value(*v)).collect())
}

/// Maximizes `w·c` over `{c : ‖B c‖ ≤ 1}`.
fn maximize_on_ball(b: &DMatrix<f64>, w: &[f64], space: AmbientSpace) -> Option<Vec<f64>> {
    let (rows, d) = b.shape();
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let c: Vec<_> = w.iter().map(|&wi| p.add_var(wi, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let row_expr = |r: usize| {
        let mut e = LinearExpr::empty();
        for (i, v) in c.iter().enumerate().take(d) {
            e.add(*v, b[(r, i)]);
        }
        e
    };
    match space {
        AmbientSpace::Linf => {
            for r in 0..rows {
                p.add_constraint(row_expr(r), ComparisonOp::Le, 1.0);
                p.add_constraint(row_expr(r), ComparisonOp::Ge, -1.0);
            }
        }
        _ => {
            let t: Vec<_> = (0..rows).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
            for (r, tr) in t.iter().enumerate() {
                let mut up = row_expr(r);
                up.add(*tr, -1.0);
                p.add_constraint(up, ComparisonOp::Le, 0.0);
                let mut lo = row_expr(r);
                lo.add(*tr, 1.0);
                p.add_constraint(lo, ComparisonOp::Ge, 0.0);
            }
            let sum: Vec<_> = t.iter().map(|v| (*v, 1.0)).collect();
            p.add_constraint(sum.as_slice(), ComparisonOp::Le, 1.0);
        }
    }
    lp_solution(&p, &c)
}

/// Least dual-norm `g` on the coordinates with `g(e_j) = δ_ij`.
fn extend_functional(e: &DMatrix<f64>, i: usize, space: AmbientSpace) -> Option<Vec<f64>> {
    let (rows, d) = e.shape();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let g: Vec<_> = (0..rows).map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for j in 0..d {
        let expr: Vec<_> = (0..rows).map(|r| (g[r], e[(r, j)])).collect();
        p.add_constraint(expr.as_slice(), ComparisonOp::Eq, if i == j { 1.0 } else { 0.0 });
    }
    match space {
        // dual of ℓ1 is ℓ∞: minimize s with |g_r| ≤ s
        AmbientSpace::L1 => {
            let s = p.add_var(1.0, (0.0, f64::INFINITY));
            for gr in &g {
                p.add_constraint(&[(*gr, 1.0), (s, -1.0)], ComparisonOp::Le, 0.0);
                p.add_constraint(&[(*gr, 1.0), (s, 1.0)], ComparisonOp::Ge, 0.0);
            }
        }
        _ => {
            for gr in &g {
                let u = p.add_var(1.0, (0.0, f64::INFINITY));
                p.add_constraint(&[(*gr, 1.0), (u, -1.0)], ComparisonOp::Le, 0.0);
                p.add_constraint(&[(*gr, 1.0), (u, 1.0)], ComparisonOp::Ge, 0.0);
            }
        }
    }
    lp_solution(&p, &g)
}

fn det(c: &DMatrix<f64>) -> f64 {
    c.clone().determinant()
}

/// Coordinate ascent on `|det C|` where the system vectors are `B c_i`.
/// Each step maximizes the (linear) cofactor functional of one column over
/// the unit ball of the span.
fn ascend(b: &DMatrix<f64>, mut c: DMatrix<f64>, space: AmbientSpace) -> Option<(DMatrix<f64>, f64)> {
    let d = c.ncols();
    let mut value = det(&c).abs();
    for _sweep in 0..200 {
        let before = value;
        for i in 0..d {
            let w: Vec<f64> = (0..d)
                .map(|k| {
                    let mut m = c.clone();
                    for r in 0..d {
                        m[(r, i)] = if r == k { 1.0 } else { 0.0 };
                    }
                    det(&m)
                })
                .collect();
            let col = maximize_on_ball(b, &w, space)?;
            for r in 0..d {
                c[(r, i)] = col[r];
            }
            value = det(&c).abs();
        }
        if value - before <= 1e-14 * value.max(1e-300) {
            break;
        }
    }
    Some((c, value))
}

fn rationalize(x: f64) -> Scalar {
    let scale = 1u64 << 40;
    let n = (x * scale as f64).round() as i64;
    ratio(n, scale as i64)
}

fn determinant_maximizer(coords: &[usize], b: &RMatrix, space: AmbientSpace) -> Result<AuerbachSystem> {
    let d = b.cols();
    let bf = b.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best: Option<(DMatrix<f64>, f64)> = None;
    for restart in 0..4 {
        let start = if restart == 0 {
            DMatrix::identity(d, d)
        } else {
            DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0))
        };
        if let Some((c, v)) = ascend(&bf, start, space) {
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                best = Some((c, v));
            }
        }
    }
    let (c, _) = best.ok_or(FrameError::AuerbachStagnation { tau: f64::INFINITY })?;

    // exact unit vectors in the span
    let cq = RMatrix::from_rows((0..d).map(|r| (0..d).map(|i| rationalize(c[(r, i)])).collect()).collect());
    let eq = b.mul(&cq);
    let mut vectors = Vec::with_capacity(d);
    for i in 0..d {
        let v = CoefVector::from_pairs(coords.iter().enumerate().map(|(r, &co)| (co, eq.get(r, i).clone())));
        let n = space.norm(&v).stored().clone();
        if n.is_zero() {
            return Err(FrameError::AuerbachStagnation { tau: f64::INFINITY });
        }
        vectors.push(v.scale(&(Scalar::one() / n)));
    }

    // functionals from the extension LP, corrected to exact biorthogonality
    let ef = DMatrix::from_fn(coords.len(), d, |r, i| to_f64(&vectors[i].get(coords[r])));
    let mut raw = Vec::with_capacity(d);
    for i in 0..d {
        let g = extend_functional(&ef, i, space).ok_or(FrameError::AuerbachStagnation { tau: f64::INFINITY })?;
        raw.push(CoefVector::from_pairs(coords.iter().zip(&g).map(|(&co, &x)| (co, rationalize(x)))));
    }
    let gram = RMatrix::from_rows(raw.iter().map(|g| vectors.iter().map(|e| pair(g, e)).collect()).collect());
    let inv = gram.inverse().ok_or(FrameError::DependentSpan)?;
    let functionals: Vec<CoefVector> = (0..d)
        .map(|i| {
            raw.iter()
                .enumerate()
                .fold(CoefVector::zero(), |acc, (k, g)| acc.add_scaled(inv.get(i, k), g))
        })
        .collect();
    let mut sys = AuerbachSystem {
        space,
        vectors,
        functionals,
        tau: Scalar::zero(),
        method: "determinant-ascent".into(),
    };
    sys.tau = sys.norm_defect();
    let tau = to_f64(&sys.tau);
    if tau > AUERBACH_TOLERANCE {
        return Err(FrameError::AuerbachStagnation { tau });
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn v(p: &[(usize, i64)]) -> CoefVector {
        CoefVector::from_ints(p)
    }

    #[test]
    fn l2_orthogonal_pair() {
        let s = auerbach_basis(&[v(&[(1, 1), (2, 1)]), v(&[(1, 1), (2, -1)])], AmbientSpace::L2).unwrap();
        assert_eq!(s.biorthogonality_defect(), int(0));
        assert!(to_f64(&s.tau) < 1e-15);
        let s = auerbach_basis(&[v(&[(1, 3), (2, 4)]), v(&[(3, 2)])], AmbientSpace::L2).unwrap();
        assert_eq!(s.tau, int(0));
    }

    #[test]
    fn l1_coordinates() {
        let s = auerbach_basis(&[v(&[(1, 1)]), v(&[(2, 1)])], AmbientSpace::L1).unwrap();
        assert_eq!(s.tau, int(0));
        assert_eq!(s.vectors, vec![CoefVector::unit(1), CoefVector::unit(2)]);
        let s = auerbach_basis(&[v(&[(7, -2)]), v(&[(4, 3)])], AmbientSpace::Linf).unwrap();
        assert_eq!(s.method, "coordinates");
        assert_eq!(s.tau, int(0));
    }

    #[test]
    fn dependent_span_errors() {
        assert!(matches!(
            auerbach_basis(&[v(&[(1, 1)]), v(&[(1, 2)])], AmbientSpace::L1),
            Err(FrameError::DependentSpan)
        ));
    }

    /// Max of |det| over pairs of points on the ℓ∞ unit square boundary.
    fn grid_oracle() -> f64 {
        let steps = 2000;
        let pts: Vec<(f64, f64)> = (0..4 * steps)
            .map(|t| {
                let s = -1.0 + 2.0 * (t % steps) as f64 / steps as f64;
                match t / steps {
                    0 => (1.0, s),
                    1 => (-s, 1.0),
                    2 => (-1.0, -s),
                    _ => (s, -1.0),
                }
            })
            .collect();
        let mut best: f64 = 0.0;
        for a in pts.iter().step_by(7) {
            for b in &pts {
                best = best.max((a.0 * b.1 - a.1 * b.0).abs());
            }
        }
        best
    }

    #[test]
    fn linf_general_span_matches_grid_oracle() {
        let span = [v(&[(1, 1), (3, 1)]), v(&[(1, 1), (2, 1), (3, 1)])];
        let s = auerbach_basis(&span, AmbientSpace::Linf).unwrap();
        assert_eq!(s.biorthogonality_defect(), int(0));
        assert!(to_f64(&s.tau) <= 1e-6);

        // the plain plane span{(1,0),(1,1)} is all of ℓ∞²
        let plane = [v(&[(1, 1)]), v(&[(1, 1), (2, 1)])];
        let s = auerbach_basis(&plane, AmbientSpace::Linf).unwrap();
        let e = &s.vectors;
        let det = to_f64(&(e[0].get(1) * e[1].get(2) - e[0].get(2) * e[1].get(1))).abs();
        let oracle = grid_oracle();
        assert!((oracle - 2.0).abs() < 1e-2);
        assert!(det >= oracle - 1e-2, "det {det} oracle {oracle}");
        for f in &s.functionals {
            assert!((AmbientSpace::Linf.dual_norm(f).to_f64() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn l1_general_span() {
        let span = [v(&[(1, 1), (2, 2), (3, -1)]), v(&[(1, 3), (2, -1)])];
        let s = auerbach_basis(&span, AmbientSpace::L1).unwrap();
        assert_eq!(s.biorthogonality_defect(), int(0));
        for e in &s.vectors {
            assert_eq!(AmbientSpace::L1.norm(e).stored(), &int(1));
        }
    }
}
