//! Integral-operator cross-validation surface.
//!
//! The energy-space operator of a measure coefficient is unitarily
//! equivalent, through f ↦ f′, to an integral operator on L²: on the half
//! line with kernel q(max(x,t)) − c acting on mean-zero functions, on a
//! finite interval with kernel q(min(x,t)) compressed by the mean-zero
//! projection. Hat functions map to mean-zero step functions under the
//! unitary, so on a shared grid the hat Galerkin matrix and the step-basis
//! matrix built here must have identical spectra up to sign. That gives an
//! independent end-to-end check of the assembly pipeline: same numbers from
//! two different discretizations of two different formulas.
//!
//! All matrix entries are closed-form integrals of the coefficient model, so
//! agreement failures indicate real defects, not quadrature noise.

use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficients::{
    anti_derivative_of_measure, cesaro_mean_limit, kernel_delta, AntiDerivative, ExtendedLength,
    GIString, MeasureRepr,
};
use crate::discretization::{build_galerkin, suggest_nodes, whiten, BoundaryTreatment, CLIP_TOL};
use crate::poly::{strictly_increasing, Poly};
use crate::{Error, Result};

/// Step-basis matrix of an integral operator on a grid.
///
/// `raw` is the operator against the orthonormal cell indicators; the trace
/// and square-sum identities hold there. `projected` deflates the constant
/// direction (rank-1, the unit vector with entries √(hᵢ/X)) and carries the
/// spectrum that matches the energy-space operator.
#[derive(Debug, Clone)]
pub struct DiscretizedJ {
    grid: Vec<f64>,
    /// Correction constant subtracted from the kernel (0 on finite intervals).
    c: f64,
    raw: DMatrix<f64>,
    projected: DMatrix<f64>,
}

impl DiscretizedJ {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn raw(&self) -> &DMatrix<f64> {
        &self.raw
    }

    pub fn projected(&self) -> &DMatrix<f64> {
        &self.projected
    }

    /// Trace of the unprojected matrix; converges to the closed-form trace
    /// identity of the operator and is exact on grids aligned with the
    /// breakpoints of q.
    pub fn trace_raw(&self) -> f64 {
        self.raw.diagonal().sum()
    }

    /// Frobenius norm of the unprojected matrix; increases to the
    /// Hilbert-Schmidt norm of the operator as the grid refines.
    pub fn frobenius_raw(&self) -> f64 {
        self.raw.norm()
    }

    /// Eigenvalues restricted to the mean-zero subspace, via an explicit
    /// orthonormal basis of the complement of the constant direction (no
    /// structural zero is introduced).
    pub fn eigenvalues_deflated(&self) -> Vec<f64> {
        let n = self.raw.nrows();
        if n < 2 {
            return Vec::new();
        }
        let p = self.constant_direction();
        // Householder reflection swapping e₀ and p: columns 1..n span p⊥
        let mut v = p;
        v[0] -= 1.0;
        let vnorm = v.norm();
        let compressed = if vnorm < 1e-14 {
            self.raw.view((1, 1), (n - 1, n - 1)).into_owned()
        } else {
            v /= vnorm;
            let mv = &self.raw * &v;
            let vmv = (v.transpose() * &mv)[(0, 0)];
            let mut h = self.raw.clone();
            // H M H with H = I − 2vvᵀ
            h -= 2.0 * &mv * v.transpose();
            h -= 2.0 * &v * mv.transpose();
            h += 4.0 * vmv * &v * v.transpose();
            h.view((1, 1), (n - 1, n - 1)).into_owned()
        };
        let sym = 0.5 * (&compressed + compressed.transpose());
        sym.symmetric_eigen().eigenvalues.iter().copied().collect()
    }

    /// Largest `k` singular values of the mean-zero compression, descending.
    pub fn singular_values(&self, k: usize) -> Vec<f64> {
        let mut s: Vec<f64> = self.eigenvalues_deflated().iter().map(|v| v.abs()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s.truncate(k);
        s
    }

    fn constant_direction(&self) -> nalgebra::DVector<f64> {
        let x = self.grid.last().unwrap() - self.grid[0];
        nalgebra::DVector::from_iterator(
            self.grid.len() - 1,
            self.grid.windows(2).map(|c| ((c[1] - c[0]) / x).sqrt()),
        )
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 || !strictly_increasing(grid) {
        return Err(Error::InvalidNodes(
            "grid must start at 0 and strictly increase".into(),
        ));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidNodes("grid must be finite".into()));
    }
    Ok(())
}

fn project_constant(grid: &[f64], raw: &DMatrix<f64>) -> DMatrix<f64> {
    let x = grid.last().unwrap() - grid[0];
    let p = nalgebra::DVector::from_iterator(
        grid.len() - 1,
        grid.windows(2).map(|c| ((c[1] - c[0]) / x).sqrt()),
    );
    let n = raw.nrows();
    let proj = DMatrix::identity(n, n) - &p * p.transpose();
    &proj * raw * proj
}

/// Half-line operator with kernel q(max(x,t)) − c on the orthonormal step
/// basis of the grid cells. The correction constant is the mean value of q
/// and must exist; subtracting it leaves the action on mean-zero functions
/// unchanged while representing the bounded extension of the operator.
pub fn build_j(q: &AntiDerivative, grid: &[f64]) -> Result<DiscretizedJ> {
    validate_grid(grid)?;
    let len = ExtendedLength::Infinite;
    let c = cesaro_mean_limit(q, len).ok_or(Error::CesaroUndefined)?;
    let n = grid.len() - 1;

    // off-diagonal blocks are separable: for cells i < j the kernel argument
    // lives in cell j, so the entry is √hᵢ · (∫_cellⱼ (q−c)) / √hⱼ
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (grid[k], grid[k + 1]);
        let h = b - a;
        let q_cell = q.weighted_integral(&Poly::constant(1.0), a, a, b, len);
        alpha.push(h.sqrt());
        beta.push((q_cell - c * h) / h.sqrt());
        // ∫∫ over the square: 2∫(q(s)−c)(s−a)ds
        let wi = q.weighted_integral(&Poly::linear(0.0, 2.0), a, a, b, len);
        diag.push((wi - c * h * h) / h);
    }
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        raw[(i, i)] = diag[i];
        for j in (i + 1)..n {
            let v = alpha[i] * beta[j];
            raw[(i, j)] = v;
            raw[(j, i)] = v;
        }
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::DivergentIntegral(
            "kernel integral diverges on this grid".into(),
        ));
    }
    let projected = project_constant(grid, &raw);
    Ok(DiscretizedJ { grid: grid.to_vec(), c, raw, projected })
}

/// Finite-interval operator with kernel q(min(x,t)) on the orthonormal step
/// basis; the grid must cover [0, L] completely. The spectrum matching the
/// energy-space operator lives in the projected matrix.
pub fn build_jl(q: &AntiDerivative, l: f64, grid: &[f64]) -> Result<DiscretizedJ> {
    validate_grid(grid)?;
    let len = ExtendedLength::Finite(l);
    len.validate()?;
    if *grid.last().unwrap() != l {
        return Err(Error::InvalidNodes(
            "the grid must end at the interval length".into(),
        ));
    }
    let n = grid.len() - 1;

    // for cells i < j the kernel argument lives in cell i
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (grid[k], grid[k + 1]);
        let h = b - a;
        let q_cell = q.weighted_integral(&Poly::constant(1.0), a, a, b, len);
        alpha.push(h.sqrt());
        beta.push(q_cell / h.sqrt());
        // ∫∫ over the square: 2∫ q(s)(b−s) ds
        diag.push(q.weighted_integral(&Poly::linear(2.0 * h, -2.0), a, a, b, len) / h);
    }
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        raw[(i, i)] = diag[i];
        for j in (i + 1)..n {
            let v = beta[i] * alpha[j];
            raw[(i, j)] = v;
            raw[(j, i)] = v;
        }
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::DivergentIntegral(
            "kernel integral diverges on this grid".into(),
        ));
    }
    let projected = project_constant(grid, &raw);
    Ok(DiscretizedJ { grid: grid.to_vec(), c: 0.0, raw, projected })
}

/// Exact nonzero eigenvalues of the energy-space operator of a purely atomic
/// measure: the weighted kernel Gram matrix Γ^½ D Γ^½ with Γ the reproducing
/// kernel at the atom positions (symmetric even for signed weights).
pub fn atomic_kernel_eigenvalues(chi: &MeasureRepr, len: ExtendedLength) -> Result<Vec<f64>> {
    if !chi.is_purely_atomic() {
        return Err(Error::Usage(
            "kernel Gram eigenvalues require a purely atomic measure".into(),
        ));
    }
    let atoms = chi.atoms();
    let k = atoms.len();
    let gamma = DMatrix::from_fn(k, k, |i, j| kernel_delta(atoms[i].0, atoms[j].0, len));
    let eig = gamma.symmetric_eigen();
    let mut sqrt_vals = eig.eigenvalues.clone();
    for v in sqrt_vals.iter_mut() {
        *v = v.max(0.0).sqrt();
    }
    let half = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let d = nalgebra::DVector::from_iterator(k, atoms.iter().map(|&(_, w)| w));
    let sym = &half * DMatrix::from_diagonal(&d) * &half;
    let mut mus: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    mus.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    Ok(mus)
}

/// One refinement level of the cross-validation ladder.
#[derive(Debug, Clone)]
pub struct CrossLevel {
    pub cells: usize,
    /// Right end of the grid (the truncation point, or L itself).
    pub truncation: f64,
    /// Top singular values of the step-basis integral operator.
    pub j_values: Vec<f64>,
    /// Top singular values of the hat-basis energy-space operator.
    pub k_values: Vec<f64>,
    /// Largest deviation between the two lists, relative to the top value.
    pub max_rel_dev: f64,
}

/// Cross-validation report over a refinement ladder.
#[derive(Debug, Clone)]
pub struct CrossReport {
    pub levels: Vec<CrossLevel>,
    pub tol: f64,
    /// Whether the finest level agrees within `tol`.
    pub pass: bool,
}

/// Pit the two discretizations against each other on matched grids. Cell
/// count doubles per level; on the half line the truncation point doubles
/// with it. Compares the top `top` singular values and passes when the
/// finest level agrees to `tol` relative to the largest singular value.
pub fn crossvalidate(
    chi: &MeasureRepr,
    len: ExtendedLength,
    base_cells: usize,
    levels: usize,
    top: usize,
    tol: f64,
) -> Result<CrossReport> {
    if levels == 0 {
        return Err(Error::Usage("need at least one refinement level".into()));
    }
    let q = anti_derivative_of_measure(chi, len)?;
    let s = GIString::new(len, q.clone(), MeasureRepr::zero())?;
    let base_x = match len {
        ExtendedLength::Finite(_) => None,
        ExtendedLength::Infinite => Some(*suggest_nodes(&s, 2, None)?.last().unwrap()),
    };

    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let cells = base_cells.max(4) << level;
        let trunc = base_x.map(|x| x * (1 << level) as f64);
        let nodes = suggest_nodes(&s, cells, trunc)?;

        let jop = match len {
            ExtendedLength::Infinite => build_j(&q, &nodes)?,
            ExtendedLength::Finite(l) => build_jl(&q, l, &nodes)?,
        };
        let j_values = jop.singular_values(top);

        let sys = build_galerkin(&s, &nodes, BoundaryTreatment::Dirichlet)?;
        let wp = whiten(&sys, CLIP_TOL)?;
        let mut k_values: Vec<f64> = wp
            .k_omega
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|v| v.abs())
            .collect();
        k_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        k_values.truncate(top);

        let m = j_values.len().min(k_values.len());
        let scale = j_values
            .first()
            .copied()
            .unwrap_or(0.0)
            .max(k_values.first().copied().unwrap_or(0.0))
            .max(1e-300);
        let max_rel_dev = (0..m)
            .map(|i| (j_values[i] - k_values[i]).abs() / scale)
            .fold(0.0_f64, f64::max);
        out.push(CrossLevel {
            cells,
            truncation: *nodes.last().unwrap(),
            j_values,
            k_values,
            max_rel_dev,
        });
    }
    let pass = out.last().unwrap().max_rel_dev <= tol;
    Ok(CrossReport { levels: out, tol, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{MeasureSign, TailModel};
    use alloc::vec;

    const INF: ExtendedLength = ExtendedLength::Infinite;

    fn atomic_q(atoms: Vec<(f64, f64)>, len: ExtendedLength) -> AntiDerivative {
        let m = MeasureRepr::from_atoms(atoms, MeasureSign::Signed, len).unwrap();
        anti_derivative_of_measure(&m, len).unwrap()
    }

    fn uniform_grid(end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| end * i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_q_annihilates() {
        // q ≡ c: the corrected kernel vanishes identically
        let q = AntiDerivative::new(
            vec![0.0],
            vec![],
            Some(TailModel::ExactConstant { c: 3.0 }),
            INF,
        )
        .unwrap();
        let j = build_j(&q, &uniform_grid(4.0, 8)).unwrap();
        assert!(j.raw().iter().all(|v| v.abs() < 1e-14));
        assert_eq!(j.c(), 3.0);
    }

    #[test]
    fn mass_at_zero_projects_away() {
        // χ = δ₀: q ≡ 1, the raw min-kernel matrix is rank one along the
        // constant direction and the projection removes it entirely
        let len = ExtendedLength::Finite(2.0);
        let q = atomic_q(vec![(0.0, 1.0)], len);
        let j = build_jl(&q, 2.0, &uniform_grid(2.0, 7)).unwrap();
        assert!(j.raw().norm() > 1.0);
        assert!(j.projected().norm() < 1e-13);
        // and the zero coefficient gives the zero matrix outright
        let q0 = atomic_q(vec![], len);
        let j0 = build_jl(&q0, 2.0, &uniform_grid(2.0, 7)).unwrap();
        assert!(j0.raw().norm() == 0.0);
    }

    #[test]
    fn single_atom_matches_truncated_kernel_value() {
        // χ = δ₁ on the half line, grid to X: the one nonzero singular value
        // is exactly the truncated kernel diagonal 1 − 1/X
        for x_end in [4.0, 8.0, 16.0] {
            let q = atomic_q(vec![(1.0, 1.0)], INF);
            let mut grid = uniform_grid(x_end, 16);
            grid.push(1.0);
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            grid.dedup();
            let j = build_j(&q, &grid).unwrap();
            let s = j.singular_values(3);
            let expect = 1.0 - 1.0 / x_end;
            assert!((s[0] - expect).abs() < 1e-12, "{} vs {expect}", s[0]);
            assert!(s[1] < 1e-12);
        }
    }

    #[test]
    fn trace_and_frobenius_identities_on_atoms() {
        // aligned grids make both identities exact: trace = −Σ wₖxₖ,
        // Frobenius² = 2∫x(q−c)²
        let atoms = vec![(1.0, 2.0), (3.0, 1.0)];
        let q = atomic_q(atoms.clone(), INF);
        let mut grid = uniform_grid(12.0, 24);
        for &(x, _) in &atoms {
            grid.push(x);
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let j = build_j(&q, &grid).unwrap();
        let trace_expect = -(1.0 * 2.0 + 3.0 * 1.0);
        assert!((j.trace_raw() - trace_expect).abs() < 1e-12, "{}", j.trace_raw());
        let c = j.c();
        let hs_expect = 2.0 * q.x_weighted_sq_dev_integral(c, INF);
        let fro2 = j.frobenius_raw().powi(2);
        assert!((fro2 - hs_expect).abs() < 1e-12 * hs_expect, "{fro2} vs {hs_expect}");
        // hand value: q−c = −3 on [0,1), −1 on [1,3): 2∫x(q−c)² = 2(9/2 + 4) = 17
        assert!((hs_expect - 17.0).abs() < 1e-12);
    }

    #[test]
    fn finite_trace_checked_before_projection() {
        // tr of the unprojected min-kernel matrix = ∫(L−x)dχ on aligned grids
        let l = 5.0;
        let len = ExtendedLength::Finite(l);
        let atoms = vec![(1.0, 0.5), (2.5, 2.0)];
        let q = atomic_q(atoms.clone(), len);
        let mut grid = uniform_grid(l, 20);
        for &(x, _) in &atoms {
            grid.push(x);
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let j = build_jl(&q, l, &grid).unwrap();
        let expect: f64 = atoms.iter().map(|&(x, w)| (l - x) * w).sum();
        assert!((j.trace_raw() - expect).abs() < 1e-12, "{}", j.trace_raw());
    }

    #[test]
    fn deflated_spectrum_is_minus_the_galerkin_spectrum() {
        // mixed-sign atoms: eigenvalues must agree in magnitude and carry
        // opposite signs across the unitary
        let atoms = vec![(0.5, 1.0), (1.5, -2.0), (3.0, 0.75)];
        let chi = MeasureRepr::from_atoms(atoms, MeasureSign::Signed, INF).unwrap();
        let q = anti_derivative_of_measure(&chi, INF).unwrap();
        let s = GIString::new(INF, q.clone(), MeasureRepr::zero()).unwrap();
        let nodes = suggest_nodes(&s, 32, Some(12.0)).unwrap();
        let j = build_j(&q, &nodes).unwrap();
        let mut mu_j = j.eigenvalues_deflated();
        mu_j.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sys = build_galerkin(&s, &nodes, BoundaryTreatment::Dirichlet).unwrap();
        let wp = whiten(&sys, CLIP_TOL).unwrap();
        let mut mu_k: Vec<f64> = wp
            .k_omega
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|v| -v)
            .collect();
        mu_k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(mu_j.len(), mu_k.len());
        for (a, b) in mu_j.iter().zip(&mu_k) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn crossvalidation_is_exact_for_atoms() {
        let chi = MeasureRepr::from_atoms(
            vec![(1.0, 2.0), (3.0, 1.0)],
            MeasureSign::NonNegative,
            INF,
        )
        .unwrap();
        let report = crossvalidate(&chi, INF, 16, 3, 10, 1e-8).unwrap();
        assert!(report.pass, "max dev {}", report.levels.last().unwrap().max_rel_dev);
        // both sides reproduce the truncated-kernel reference exactly
        let last = report.levels.last().unwrap();
        let oracle =
            atomic_kernel_eigenvalues(&chi, ExtendedLength::Finite(last.truncation)).unwrap();
        for (got, want) in last.j_values.iter().zip(oracle.iter().map(|v| v.abs())) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        // and approach the untruncated kernel values as the window grows
        let free = atomic_kernel_eigenvalues(&chi, INF).unwrap();
        let first_gap = (report.levels[0].j_values[0] - free[0].abs()).abs();
        let last_gap = (last.j_values[0] - free[0].abs()).abs();
        assert!(last_gap < first_gap);
        assert!(last_gap < 0.05 * free[0].abs());
    }

    #[test]
    fn lebesgue_top_values_approach_dirichlet_eigenvalues() {
        // χ Lebesgue on [0,1): reciprocal eigenvalues k²π²
        let len = ExtendedLength::Finite(1.0);
        let chi = MeasureRepr::new(
            vec![],
            vec![0.0, 1.0],
            vec![1.0],
            crate::coefficients::MeasureTail::Zero,
            MeasureSign::NonNegative,
            len,
        )
        .unwrap();
        let report = crossvalidate(&chi, len, 256, 1, 5, 1e-10).unwrap();
        assert!(report.pass, "dev {}", report.levels[0].max_rel_dev);
        let h = 1.0 / report.levels[0].cells as f64;
        for (k, got) in report.levels[0].j_values.iter().enumerate() {
            let kf = (k + 1) as f64;
            let want = 1.0 / (kf * kf * core::f64::consts::PI.powi(2));
            // piecewise-linear eigenvalue defect is (kπh)²/12 relative
            let tol = (kf * core::f64::consts::PI * h).powi(2) / 6.0 * want;
            assert!((got - want).abs() < tol, "mode {k}: {got} vs {want}");
        }
    }

    #[test]
    fn square_sum_of_kernel_eigenvalues_matches_closed_form() {
        // Σ μ² over the exact atomic spectrum equals 2∫x(q−c)²
        let chi = MeasureRepr::from_atoms(
            vec![(0.5, 1.5), (2.0, -0.5), (4.0, 1.0)],
            MeasureSign::Signed,
            INF,
        )
        .unwrap();
        let mus = atomic_kernel_eigenvalues(&chi, INF).unwrap();
        let sum_sq: f64 = mus.iter().map(|m| m * m).sum();
        let q = anti_derivative_of_measure(&chi, INF).unwrap();
        let c = cesaro_mean_limit(&q, INF).unwrap();
        let closed = 2.0 * q.x_weighted_sq_dev_integral(c, INF);
        assert!((sum_sq - closed).abs() < 1e-9 * closed.abs().max(1.0), "{sum_sq} vs {closed}");
    }
}
