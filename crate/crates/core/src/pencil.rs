//! Eigenvalue extraction from the assembled pencil A f = z·B f + z²·C f.
//!
//! Two independent routes are provided. The symmetric route whitens by the
//! Cholesky factor of A and reads eigenvalues off a symmetric block
//! linearization in μ = 1/z; it is the production path. The companion route
//! feeds the same matrices into a nonsymmetric 2n×2n companion linearization
//! and takes complex eigenvalues; real arithmetic noise in the imaginary
//! parts is truncated, anything larger is an error. Agreement of the two
//! routes is a strong internal consistency check because they share nothing
//! past assembly.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficients::{GIString, TailModel};
use crate::criteria::omega_purely_atomic;
use crate::discretization::{build_galerkin, suggest_nodes, whiten, BoundaryTreatment, CLIP_TOL};
use crate::{Error, Result};

/// Relative magnitude under which a reciprocal eigenvalue of the
/// linearization counts as zero (an eigenvalue at infinity of the pencil).
pub const MU_CUT_FACTOR: f64 = 1e3;

/// Relative imaginary part tolerated on companion eigenvalues.
pub const IMAG_TOL: f64 = 1e-8;

/// Result of a ladder of refinements.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Finite eigenvalues at the final level, ascending.
    pub eigenvalues: Vec<f64>,
    /// Degrees of freedom at the final level.
    pub dofs: usize,
    /// Truncation point used (infinite strings only).
    pub truncation: Option<f64>,
    /// Whether the tracked eigenvalues settled within tolerance.
    pub converged: bool,
    /// Largest relative movement of a tracked eigenvalue in the last step.
    pub last_delta: f64,
}

/// Finite eigenvalues 1/μ of a symmetric linearization, ascending.
pub fn eigenvalues_of_linearization(m: &DMatrix<f64>) -> Vec<f64> {
    let mus = m.clone().symmetric_eigen().eigenvalues;
    let scale = mus.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let cut = MU_CUT_FACTOR * f64::EPSILON * scale;
    let mut zs: Vec<f64> = mus
        .iter()
        .filter(|&&mu| mu.abs() > cut)
        .map(|&mu| 1.0 / mu)
        .collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zs
}

/// Symmetric route: assemble, whiten, solve. Eigenvalues ascending.
pub fn solve_spectrum(
    s: &GIString,
    nodes: &[f64],
    boundary: BoundaryTreatment,
) -> Result<Vec<f64>> {
    let sys = build_galerkin(s, nodes, boundary)?;
    let wp = whiten(&sys, CLIP_TOL)?;
    Ok(eigenvalues_of_linearization(&wp.m))
}

/// Companion route: same assembly, nonsymmetric linearization
/// [[A⁻¹B, A⁻¹G], [Gᵀ, 0]] with GGᵀ = C, whose eigenvalues are the μ = 1/z.
/// Factoring C down to its numerical rank keeps the companion free of
/// structural zero eigenvalues from the quadratic block.
pub fn solve_pencil_qep(
    s: &GIString,
    nodes: &[f64],
    boundary: BoundaryTreatment,
) -> Result<Vec<f64>> {
    let sys = build_galerkin(s, nodes, boundary)?;
    let n = sys.a.nrows();
    let chol = sys.a.clone().cholesky().ok_or(Error::CholeskyFailed)?;

    let ceig = sys.c.clone().symmetric_eigen();
    let numax = ceig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    let floor = CLIP_TOL * numax.max(1.0);
    if let Some(&nu) = ceig.eigenvalues.iter().find(|&&nu| nu < -floor) {
        return Err(Error::NotPsd(format!("quadratic form has eigenvalue {nu}")));
    }
    let kept: Vec<usize> = (0..n).filter(|&i| ceig.eigenvalues[i] > floor).collect();
    let r = kept.len();
    let mut g = DMatrix::zeros(n, r);
    for (col, &i) in kept.iter().enumerate() {
        let scale = ceig.eigenvalues[i].sqrt();
        for row in 0..n {
            g[(row, col)] = ceig.eigenvectors[(row, i)] * scale;
        }
    }

    let ainv_b = chol.solve(&sys.b);
    let ainv_g = chol.solve(&g);
    let mut comp = DMatrix::zeros(n + r, n + r);
    comp.view_mut((0, 0), (n, n)).copy_from(&ainv_b);
    comp.view_mut((0, n), (n, r)).copy_from(&ainv_g);
    comp.view_mut((n, 0), (r, n)).copy_from(&g.transpose());
    let mus = comp.complex_eigenvalues();
    let abs = |m: &nalgebra::Complex<f64>| (m.re * m.re + m.im * m.im).sqrt();
    let scale = mus.iter().fold(0.0_f64, |a, m| a.max(abs(m)));
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let cut = MU_CUT_FACTOR * f64::EPSILON * scale;
    let mut zs = Vec::new();
    for mu in mus.iter() {
        if abs(mu) <= cut {
            continue;
        }
        if mu.im.abs() > IMAG_TOL * abs(mu) {
            return Err(Error::ComplexEigenvalue { re: mu.re, im: mu.im });
        }
        zs.push(1.0 / mu.re);
    }
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(zs)
}

/// The k eigenvalues closest to zero, in ascending magnitude.
pub fn smallest_by_magnitude(zs: &[f64], k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = zs.to_vec();
    v.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    v.truncate(k);
    v
}

/// Refine the mesh (and push out the truncation on an infinite string) until
/// the k eigenvalues closest to zero move by less than `rel_tol` between
/// consecutive levels, or `max_levels` is exhausted.
/// For purely atomic coefficients the pencil has finite rank independent of
/// the discretization: one eigenvalue per jump of w plus two per atom of υ.
/// Reciprocal eigenvalues of the whitened linearization below the numerical
/// cut then masquerade as huge spurious pencil eigenvalues, so callers cap
/// the tracked window by this bound. `None` when either coefficient has a
/// continuous part.
pub fn finite_rank_bound(s: &GIString) -> Option<usize> {
    if !omega_purely_atomic(s.w()) || !s.upsilon().is_purely_atomic() {
        return None;
    }
    let w = s.w();
    let (grid, segs) = (w.grid(), w.segments());
    let mut jumps = 0usize;
    for i in 1..grid.len() {
        let left = segs[i - 1].eval(grid[i] - grid[i - 1]);
        let right = if i < segs.len() {
            segs[i].eval(0.0)
        } else {
            match w.tail() {
                Some(TailModel::ExactConstant { c })
                | Some(TailModel::PowerDecay { c, .. }) => *c,
                _ => left,
            }
        };
        if right != left {
            jumps += 1;
        }
    }
    let u_atoms = s.upsilon().atoms().iter().filter(|&&(_, m)| m != 0.0).count();
    Some(jumps + 2 * u_atoms)
}

pub fn refine_until(
    s: &GIString,
    boundary: BoundaryTreatment,
    k: usize,
    rel_tol: f64,
    max_levels: usize,
) -> Result<Spectrum> {
    let rank_bound = finite_rank_bound(s);
    let k = rank_bound.map_or(k, |r| k.min(r));
    let infinite = s.length().is_infinite();
    let base_cells = 64usize;
    let base_trunc = if infinite {
        let probe = suggest_nodes(s, 2, None)?;
        Some(*probe.last().unwrap())
    } else {
        None
    };
    let mut prev: Option<Vec<f64>> = None;
    let mut last = Spectrum {
        eigenvalues: Vec::new(),
        dofs: 0,
        truncation: base_trunc,
        converged: false,
        last_delta: f64::INFINITY,
    };
    for level in 0..max_levels.max(1) {
        let cells = base_cells << level;
        let trunc = base_trunc.map(|x| x * (1 << level) as f64);
        let nodes = suggest_nodes(s, cells, trunc)?;
        let mut zs = solve_spectrum(s, &nodes, boundary)?;
        if let Some(r) = rank_bound {
            zs = smallest_by_magnitude(&zs, r);
            zs.sort_by(f64::total_cmp);
        }
        let tracked = smallest_by_magnitude(&zs, k);
        let mut delta = f64::INFINITY;
        if let Some(p) = &prev {
            let prev_tracked = smallest_by_magnitude(p, k);
            if prev_tracked.len() == tracked.len() && !tracked.is_empty() {
                delta = tracked
                    .iter()
                    .zip(&prev_tracked)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
                    .fold(0.0_f64, f64::max);
            } else if tracked.is_empty() && prev_tracked.is_empty() {
                delta = 0.0;
            }
        }
        last = Spectrum {
            dofs: nodes.len() - if infinite && boundary == BoundaryTreatment::Plateau { 1 } else { 2 },
            eigenvalues: zs.clone(),
            truncation: trunc,
            converged: delta <= rel_tol,
            last_delta: delta,
        };
        if last.converged {
            return Ok(last);
        }
        prev = Some(zs);
    }
    Ok(last)
}
