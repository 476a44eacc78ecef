//! Reference solver for strings whose coefficients are finitely many point
//! masses at shared nodes.
//!
//! On such strings every eigenfunction is piecewise linear between nodes
//! (constant past the last node on an infinite string), so restricting the
//! spectral problem to the hat functions at the nodes loses nothing: the
//! finite matrix problem below is the spectrum, not an approximation of it.
//! This makes the module an independent check on the general discretization:
//! it assembles exact tridiagonal and diagonal matrices directly and shares
//! no code with the production path.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficients::ExtendedLength;
use crate::poly::strictly_increasing;
use crate::{Error, Result};

/// ω = Σ omega[k]·δ at nodes[k], υ = Σ upsilon[k]·δ at nodes[k], on [0, L).
#[derive(Debug, Clone)]
pub struct PointMassProblem {
    pub length: ExtendedLength,
    pub nodes: Vec<f64>,
    pub omega: Vec<f64>,
    pub upsilon: Vec<f64>,
}

impl PointMassProblem {
    fn validate(&self) -> Result<()> {
        self.length.validate()?;
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::InvalidNodes("need at least one node".into()));
        }
        if self.omega.len() != n || self.upsilon.len() != n {
            return Err(Error::InvalidNodes(
                "omega and upsilon must have one weight per node".into(),
            ));
        }
        let l = self.length.upper();
        if !strictly_increasing(&self.nodes)
            || self.nodes.iter().any(|&x| !x.is_finite() || x <= 0.0 || x >= l)
        {
            return Err(Error::InvalidNodes(
                "nodes must be strictly increasing inside (0, L)".into(),
            ));
        }
        if self.omega.iter().chain(&self.upsilon).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNodes("weights must be finite".into()));
        }
        if let Some(&u) = self.upsilon.iter().find(|&&u| u < 0.0) {
            return Err(Error::SignViolation(format!(
                "upsilon weights must be nonnegative, got {u}"
            )));
        }
        Ok(())
    }

    /// Energy Gram matrix of the nodal hat basis: tridiagonal with 1/h
    /// couplings. The last hat plateaus past the last node on an infinite
    /// string and slopes down to zero at L on a finite one.
    fn stiffness(&self) -> DMatrix<f64> {
        let n = self.nodes.len();
        let mut k = DMatrix::zeros(n, n);
        let gap = |a: f64, b: f64| 1.0 / (b - a);
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { self.nodes[i - 1] };
            k[(i, i)] = gap(left, self.nodes[i]);
            if i + 1 < n {
                let g = gap(self.nodes[i], self.nodes[i + 1]);
                k[(i, i)] += g;
                k[(i, i + 1)] = -g;
                k[(i + 1, i)] = -g;
            } else if let ExtendedLength::Finite(l) = self.length {
                k[(i, i)] += gap(self.nodes[i], l);
            }
        }
        k
    }
}

/// All finite eigenvalues, sorted ascending. Exact up to roundoff: the point
/// masses confine eigenfunctions to the nodal subspace.
pub fn oracle_spectrum(p: &PointMassProblem) -> Result<Vec<f64>> {
    p.validate()?;
    let n = p.nodes.len();
    let k = p.stiffness();
    let chol = k
        .clone()
        .cholesky()
        .ok_or(Error::CholeskyFailed)?;
    let lmat = chol.l();

    // whitened linear part: L⁻¹ diag(ω) L⁻ᵀ
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = p.omega[i];
    }
    let y = lmat
        .solve_lower_triangular(&b)
        .ok_or(Error::CholeskyFailed)?;
    let mut bw = lmat
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::CholeskyFailed)?;
    let bwt = bw.transpose();
    bw = 0.5 * (&bw + &bwt);

    // exact square-root factor of the whitened quadratic part: columns of
    // L⁻¹·diag(√υ) at nodes carrying mass
    let carriers: Vec<usize> = (0..n).filter(|&i| p.upsilon[i] > 0.0).collect();
    let r = carriers.len();
    let mut sq = DMatrix::zeros(n, r);
    for (j, &i) in carriers.iter().enumerate() {
        sq[(i, j)] = p.upsilon[i].sqrt();
    }
    let e = lmat
        .solve_lower_triangular(&sq)
        .ok_or(Error::CholeskyFailed)?;

    // symmetric linearization in μ = 1/z
    let m = n + r;
    let mut block = DMatrix::zeros(m, m);
    block.view_mut((0, 0), (n, n)).copy_from(&bw);
    block.view_mut((0, n), (n, r)).copy_from(&e);
    block.view_mut((n, 0), (r, n)).copy_from(&e.transpose());

    let mus = block.symmetric_eigen().eigenvalues;
    let scale = mus.iter().fold(0.0_f64, |a, &m| a.max(m.abs()));
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let cut = 1e3 * f64::EPSILON * scale;
    let mut zs: Vec<f64> = mus
        .iter()
        .filter(|&&mu| mu.abs() > cut)
        .map(|&mu| 1.0 / mu)
        .collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(zs)
}

/// (Σ 1/z, Σ 1/z²) over the finite eigenvalues.
pub fn oracle_trace_sums(p: &PointMassProblem) -> Result<(f64, f64)> {
    let zs = oracle_spectrum(p)?;
    let s1 = zs.iter().map(|z| 1.0 / z).sum();
    let s2 = zs.iter().map(|z| 1.0 / (z * z)).sum();
    Ok((s1, s2))
}
