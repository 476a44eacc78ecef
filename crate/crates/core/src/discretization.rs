//! Galerkin discretization of the spectral problem on the energy space.
//!
//! Degrees of freedom are hat functions at interior nodes. At a finite right
//! endpoint the form domain forces a zero boundary value, so the endpoint
//! carries no dof. On an infinite string the last node either carries a
//! plateau function (ramp up, then identically one) or is treated as a hard
//! zero boundary; the plateau keeps the far field visible through the mean
//! value of w and the residual mass of υ, the hard boundary is a pure
//! truncation.
//!
//! Assembly produces three symmetric matrices over the dofs: the energy Gram
//! matrix A (tridiagonal, 1/h couplings), the ω-form B with entries
//! −∫ w·(φᵢφⱼ)′, and the υ-form C with entries ∫ φᵢφⱼ dυ. For the plateau
//! pair the product φ²ₙ does not vanish at infinity and the boundary term of
//! the integration by parts survives as the mean value of w; that constant is
//! exactly the Cesàro limit of w and is required to exist.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficients::{cesaro_mean_limit, ExtendedLength, GIString};
use crate::poly::{strictly_increasing, Poly};
use crate::{Error, Result};

/// Treatment of the last node on an infinite string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTreatment {
    /// Ramp up to the last node, constant one beyond. Sees the far field.
    Plateau,
    /// Zero at the last node; plain truncation of the string.
    Dirichlet,
}

/// Assembled Galerkin matrices over the hat-function dofs.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    /// Node positions of the dofs (interior nodes, plus the last node when it
    /// carries a plateau).
    pub dof_nodes: Vec<f64>,
    /// Energy Gram matrix, symmetric positive definite.
    pub a: DMatrix<f64>,
    /// Form of the ω-operator.
    pub b: DMatrix<f64>,
    /// Form of the υ-operator, positive semidefinite.
    pub c: DMatrix<f64>,
}

/// Cholesky-whitened pencil data: eigenvalues of `m` are the reciprocals
/// 1/z of the approximated spectrum.
#[derive(Debug, Clone)]
pub struct WhitenedPencil {
    /// L⁻¹ B L⁻ᵀ where A = LLᵀ, symmetrized.
    pub k_omega: DMatrix<f64>,
    /// Factor with EEᵀ = clipped L⁻¹ C L⁻ᵀ; one column per retained mode.
    pub e: DMatrix<f64>,
    /// Block linearization [[K_ω, E], [Eᵀ, 0]].
    pub m: DMatrix<f64>,
}

/// Relative cutoff under which υ-modes are treated as zero when factoring
/// the whitened quadratic term.
pub const CLIP_TOL: f64 = 1e-10;

pub fn build_galerkin(
    s: &GIString,
    nodes: &[f64],
    boundary: BoundaryTreatment,
) -> Result<GalerkinSystem> {
    let len = s.length();
    if nodes.len() < 2 || nodes[0] != 0.0 || !strictly_increasing(nodes) {
        return Err(Error::InvalidNodes(
            "nodes must start at 0 and strictly increase".into(),
        ));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidNodes("nodes must be finite".into()));
    }
    let last = *nodes.last().unwrap();
    let n_nodes = nodes.len() - 1; // index of the last node
    let plateau = match len {
        ExtendedLength::Finite(l) => {
            if last != l {
                return Err(Error::InvalidNodes(
                    "on a finite string the nodes must end at the length".into(),
                ));
            }
            false
        }
        ExtendedLength::Infinite => boundary == BoundaryTreatment::Plateau,
    };
    let ndof = if plateau { n_nodes } else { n_nodes - 1 };
    if ndof == 0 {
        return Err(Error::InvalidNodes("no degrees of freedom".into()));
    }
    // dof i sits at node i+1
    let dof_of_node = |m: usize| -> Option<usize> {
        if m == 0 || m > ndof {
            None
        } else {
            Some(m - 1)
        }
    };

    let mut a = DMatrix::zeros(ndof, ndof);
    let mut b = DMatrix::zeros(ndof, ndof);
    let mut c = DMatrix::zeros(ndof, ndof);

    let w = s.w();
    let upsilon = s.upsilon();
    let atoms = upsilon.atoms();
    let mut atom_idx = 0usize;

    for k in 0..n_nodes {
        let (lo, hi) = (nodes[k], nodes[k + 1]);
        let h = hi - lo;
        // dofs alive on this cell, as affine functions with origin lo
        let mut local: Vec<(usize, Poly)> = Vec::new();
        if let Some(i) = dof_of_node(k) {
            local.push((i, Poly::linear(1.0, -1.0 / h)));
        }
        if let Some(i) = dof_of_node(k + 1) {
            local.push((i, Poly::linear(0.0, 1.0 / h)));
        }
        for (i, pi) in &local {
            for (j, pj) in &local {
                if i > j {
                    continue;
                }
                let prod = affine_product(pi, pj);
                let da = gauss_stiffness(pi, pj, h);
                let bv = -w.weighted_integral(&prod.derivative(), lo, lo, hi, len);
                let cv = upsilon.weighted_density_integral(&prod, lo, lo, hi, len);
                a[(*i, *j)] += da;
                b[(*i, *j)] += bv;
                c[(*i, *j)] += cv;
                if i != j {
                    a[(*j, *i)] += da;
                    b[(*j, *i)] += bv;
                    c[(*j, *i)] += cv;
                }
            }
        }
        // atoms of υ inside [lo, hi)
        while atom_idx < atoms.len() && atoms[atom_idx].0 < hi {
            let (x, u) = atoms[atom_idx];
            if x >= lo && u != 0.0 {
                for (i, pi) in &local {
                    for (j, pj) in &local {
                        if i > j {
                            continue;
                        }
                        let v = u * pi.eval(x - lo) * pj.eval(x - lo);
                        c[(*i, *j)] += v;
                        if i != j {
                            c[(*j, *i)] += v;
                        }
                    }
                }
            }
            atom_idx += 1;
        }
    }

    if plateau {
        let i = ndof - 1;
        let cmean = cesaro_mean_limit(w, len).ok_or(Error::CesaroUndefined)?;
        b[(i, i)] += cmean;
        let residual = upsilon.mass_from(last, len);
        if !residual.is_finite() {
            return Err(Error::DivergentIntegral(
                "upsilon carries infinite mass beyond the last node".into(),
            ));
        }
        c[(i, i)] += residual;
    }

    if b.iter().chain(c.iter()).any(|v: &f64| !v.is_finite()) {
        return Err(Error::DivergentIntegral(
            "a form integral diverges on this node set".into(),
        ));
    }

    let dof_nodes = nodes[1..=ndof].to_vec();
    Ok(GalerkinSystem { dof_nodes, a, b, c })
}

/// ∫ φ′ᵢφ′ⱼ over a cell of width h for affine φ.
fn gauss_stiffness(pi: &Poly, pj: &Poly, h: f64) -> f64 {
    pi.coeffs[1] * pj.coeffs[1] * h
}

fn affine_product(p: &Poly, q: &Poly) -> Poly {
    debug_assert!(p.coeffs[2] == 0.0 && p.coeffs[3] == 0.0);
    debug_assert!(q.coeffs[2] == 0.0 && q.coeffs[3] == 0.0);
    Poly::new([
        p.coeffs[0] * q.coeffs[0],
        p.coeffs[0] * q.coeffs[1] + p.coeffs[1] * q.coeffs[0],
        p.coeffs[1] * q.coeffs[1],
        0.0,
    ])
}

/// Whiten the pencil by the Cholesky factor of the energy Gram matrix and
/// linearize: eigenvalues of the returned block matrix are the 1/z.
pub fn whiten(sys: &GalerkinSystem, clip_tol: f64) -> Result<WhitenedPencil> {
    let n = sys.a.nrows();
    let chol = sys.a.clone().cholesky().ok_or(Error::CholeskyFailed)?;
    let lmat = chol.l();
    let whitened = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let y = lmat.solve_lower_triangular(m).ok_or(Error::CholeskyFailed)?;
        let x = lmat
            .solve_lower_triangular(&y.transpose())
            .ok_or(Error::CholeskyFailed)?;
        let xt = x.transpose();
        Ok(0.5 * (x + xt))
    };
    let k_omega = whitened(&sys.b)?;
    let c_w = whitened(&sys.c)?;

    let eig = c_w.symmetric_eigen();
    let numax = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    let floor = clip_tol * numax.max(1.0);
    if let Some(&nu) = eig.eigenvalues.iter().find(|&&nu| nu < -floor) {
        return Err(Error::NotPsd(format!(
            "whitened quadratic form has eigenvalue {nu}"
        )));
    }
    let kept: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > floor).collect();
    let r = kept.len();
    let mut e = DMatrix::zeros(n, r);
    for (col, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        for row in 0..n {
            e[(row, col)] = eig.eigenvectors[(row, i)] * scale;
        }
    }

    let mut m = DMatrix::zeros(n + r, n + r);
    m.view_mut((0, 0), (n, n)).copy_from(&k_omega);
    m.view_mut((0, n), (n, r)).copy_from(&e);
    m.view_mut((n, 0), (r, n)).copy_from(&e.transpose());
    Ok(WhitenedPencil { k_omega, e, m })
}

/// Node ladder for a string: coefficient breakpoints united with a uniform
/// fill of `n` cells, reaching L on a finite string and `truncation` on an
/// infinite one.
pub fn suggest_nodes(s: &GIString, n: usize, truncation: Option<f64>) -> Result<Vec<f64>> {
    let end = match s.length() {
        ExtendedLength::Finite(l) => l,
        ExtendedLength::Infinite => {
            let mut far = s.w().tail_start();
            far = far.max(*s.upsilon().density_breakpoints().last().unwrap());
            if let Some(&(x, _)) = s.upsilon().atoms().last() {
                far = far.max(x);
            }
            truncation.unwrap_or_else(|| 2.0 * far.max(1.0) + 8.0)
        }
    };
    if !(end.is_finite() && end > 0.0) {
        return Err(Error::InvalidNodes("truncation must be positive and finite".into()));
    }
    let n = n.max(2);
    let mut nodes: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
    let mut push = |x: f64| {
        if x > 0.0 && x < end {
            nodes.push(x);
        }
    };
    for &g in s.w().grid() {
        push(g);
    }
    for &g in s.upsilon().density_breakpoints() {
        push(g);
    }
    for &(x, _) in s.upsilon().atoms() {
        push(x);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    // drop near-duplicates that would produce degenerate cells
    let min_gap = 1e-12 * end;
    let mut cleaned = Vec::with_capacity(nodes.len());
    for x in nodes {
        match cleaned.last() {
            Some(&p) if x - p < min_gap => {}
            _ => cleaned.push(x),
        }
    }
    if *cleaned.last().unwrap() != end {
        cleaned.pop();
        cleaned.push(end);
    }
    Ok(cleaned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{
        anti_derivative_of_measure, kernel_delta, AntiDerivative, MeasureRepr, MeasureSign,
        TailModel,
    };
    use crate::oracle::{oracle_spectrum, PointMassProblem};

    const INF: ExtendedLength = ExtendedLength::Infinite;

    fn atomic_string(
        len: ExtendedLength,
        w_atoms: Vec<(f64, f64)>,
        u_atoms: Vec<(f64, f64)>,
    ) -> GIString {
        let wm = MeasureRepr::from_atoms(w_atoms, MeasureSign::Signed, len).unwrap();
        let w = anti_derivative_of_measure(&wm, len).unwrap();
        let u = MeasureRepr::from_atoms(u_atoms, MeasureSign::NonNegative, len).unwrap();
        GIString::new(len, w, u).unwrap()
    }

    fn eigen_list(m: &DMatrix<f64>) -> Vec<f64> {
        let mus = m.clone().symmetric_eigen().eigenvalues;
        let scale = mus.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let mut zs: Vec<f64> = mus
            .iter()
            .filter(|&&mu| mu.abs() > 1e3 * f64::EPSILON * scale.max(1e-300))
            .map(|&mu| 1.0 / mu)
            .collect();
        zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        zs
    }

    #[test]
    fn plateau_assembly_matches_oracle_exactly() {
        let nodes = vec![0.0, 1.0, 2.5, 4.0];
        let s = atomic_string(
            INF,
            vec![(1.0, 0.5), (2.5, -1.25), (4.0, 2.0)],
            vec![(2.5, 0.75)],
        );
        let sys = build_galerkin(&s, &nodes, BoundaryTreatment::Plateau).unwrap();
        let wp = whiten(&sys, CLIP_TOL).unwrap();
        let got = eigen_list(&wp.m);
        let reference = oracle_spectrum(&PointMassProblem {
            length: INF,
            nodes: vec![1.0, 2.5, 4.0],
            omega: vec![0.5, -1.25, 2.0],
            upsilon: vec![0.0, 0.75, 0.0],
        })
        .unwrap();
        assert_eq!(got.len(), reference.len());
        for (g, r) in got.iter().zip(&reference) {
            assert!((g - r).abs() < 1e-12 * r.abs().max(1.0), "{g} vs {r}");
        }
    }

    #[test]
    fn off_node_atom_is_exact_through_the_correction() {
        // mass 2 at 1.5 with a single plateau dof at 3: B must be Σ w φ(x)²
        let s = atomic_string(INF, vec![(1.5, 2.0)], vec![]);
        let sys = build_galerkin(&s, &[0.0, 3.0], BoundaryTreatment::Plateau).unwrap();
        assert!((sys.b[(0, 0)] - 2.0 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn inverse_gram_reproduces_the_kernel() {
        // (A⁻¹)ᵢⱼ = δ_{xᵢ}(xⱼ) at the dofs, for both boundary treatments
        let s = atomic_string(INF, vec![(1.0, 1.0)], vec![]);
        for (bt, len_for_kernel) in [
            (BoundaryTreatment::Plateau, INF),
            (BoundaryTreatment::Dirichlet, ExtendedLength::Finite(4.0)),
        ] {
            let nodes = vec![0.0, 1.0, 2.0, 4.0];
            let sys = build_galerkin(&s, &nodes, bt).unwrap();
            let inv = sys.a.clone().try_inverse().unwrap();
            for (i, &xi) in sys.dof_nodes.iter().enumerate() {
                for (j, &xj) in sys.dof_nodes.iter().enumerate() {
                    let expect = kernel_delta(xi, xj, len_for_kernel);
                    assert!(
                        (inv[(i, j)] - expect).abs() < 1e-12,
                        "{bt:?} ({xi},{xj}): {} vs {expect}",
                        inv[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn lebesgue_omega_gives_the_mass_matrix() {
        // w(x) = x: integration by parts turns −∫x(φᵢφⱼ)′ into ∫φᵢφⱼ
        let len = ExtendedLength::Finite(1.0);
        let m = MeasureRepr::new(
            vec![],
            vec![0.0, 1.0],
            vec![1.0],
            crate::coefficients::MeasureTail::Zero,
            MeasureSign::NonNegative,
            len,
        )
        .unwrap();
        let w = anti_derivative_of_measure(&m, len).unwrap();
        let s = GIString::new(len, w, MeasureRepr::zero()).unwrap();
        let nodes: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let sys = build_galerkin(&s, &nodes, BoundaryTreatment::Dirichlet).unwrap();
        let h: f64 = 0.25;
        for i in 0..3 {
            assert!((sys.b[(i, i)] - 2.0 * h / 3.0).abs() < 1e-14);
            if i > 0 {
                assert!((sys.b[(i, i - 1)] - h / 6.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn plateau_requires_a_mean_value() {
        let w = AntiDerivative::new(
            vec![0.0],
            vec![],
            Some(TailModel::LinearGrowth { c: 0.0, slope: 1.0 }),
            INF,
        )
        .unwrap();
        let s = GIString::new(INF, w, MeasureRepr::zero()).unwrap();
        let err = build_galerkin(&s, &[0.0, 1.0, 2.0], BoundaryTreatment::Plateau);
        assert!(matches!(err, Err(Error::CesaroUndefined)));
        // the hard truncation has no such requirement
        assert!(build_galerkin(&s, &[0.0, 1.0, 2.0], BoundaryTreatment::Dirichlet).is_ok());
    }

    #[test]
    fn whitening_counts_quadratic_modes() {
        let s = atomic_string(
            INF,
            vec![(1.0, 1.0), (2.0, 1.0)],
            vec![(1.0, 3.0)],
        );
        let sys = build_galerkin(&s, &[0.0, 1.0, 2.0], BoundaryTreatment::Plateau).unwrap();
        let wp = whiten(&sys, CLIP_TOL).unwrap();
        assert_eq!(wp.e.ncols(), 1);
        assert_eq!(wp.m.nrows(), 3);
    }

    #[test]
    fn suggest_nodes_covers_breakpoints() {
        let s = atomic_string(INF, vec![(1.3, 1.0)], vec![(2.7, 1.0)]);
        let nodes = suggest_nodes(&s, 8, Some(10.0)).unwrap();
        assert_eq!(nodes[0], 0.0);
        assert_eq!(*nodes.last().unwrap(), 10.0);
        assert!(nodes.contains(&1.3));
        assert!(nodes.contains(&2.7));
        assert!(strictly_increasing(&nodes));
    }
}
