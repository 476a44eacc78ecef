//! Coefficient model for generalized indefinite strings.
//!
//! The distribution ω enters through its normalized anti-derivative w, a
//! piecewise cubic on a grid plus an analytic tail; the measure υ is a finite
//! list of atoms plus a piecewise-constant density with a power tail. On an
//! infinite string the tail lives in the variable x → ∞; on a finite string
//! of length L it is a boundary layer in u = L − x. Every integral the
//! classifier or the assembler needs against this class has a closed form,
//! assembled here from exact Gauss quadrature and the shifted power rule.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
// powf/sqrt on f64 are std inherent methods; the trait supplies them for no_std
#[allow(unused_imports)]
use num_traits::Float;

use crate::poly::{
    cell_index, gauss5, merged_cells, power_integral, power_weighted_integral, strictly_increasing,
    Piecewise, Poly,
};
use crate::{Error, Result};

/// String length: finite and positive, or infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedLength {
    Finite(f64),
    Infinite,
}

impl ExtendedLength {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExtendedLength::Finite(l) if !(l.is_finite() && *l > 0.0) => Err(
                Error::InvalidCoefficient(format!("finite length must be positive, got {l}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedLength::Finite(l) => Some(*l),
            ExtendedLength::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedLength::Infinite)
    }

    /// Upper endpoint as a float, `+∞` when infinite.
    pub fn upper(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Behaviour of the anti-derivative beyond the last grid point.
///
/// On an infinite string the tail variable is x itself:
/// w(x) = c + coeff·(x + shift)^(−alpha), or c + slope·x for `LinearGrowth`.
/// On a finite string the tail variable is the distance u = L − x to the
/// right endpoint: w(x) = c + coeff·(u + shift)^(−alpha), which hosts
/// boundary layers such as w = (1−x)^(−1) on L = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    ExactConstant { c: f64 },
    PowerDecay { c: f64, coeff: f64, alpha: f64, shift: f64 },
    LinearGrowth { c: f64, slope: f64 },
}

impl TailModel {
    /// The limit constant c when the Cesàro mean (1/x)∫₀ˣ w converges.
    pub fn cesaro_constant(&self) -> Option<f64> {
        match *self {
            TailModel::ExactConstant { c } | TailModel::PowerDecay { c, .. } => Some(c),
            TailModel::LinearGrowth { .. } => None,
        }
    }
}

/// Density of a measure beyond its grid, in the same tail variable as
/// [`TailModel`]: ρ = coeff·(x + shift)^(−beta) on an infinite string,
/// coeff·(L − x + shift)^(−beta) on a finite one. Infinite tail mass is
/// representable on purpose; consumers that need finite mass check for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureTail {
    Zero,
    PowerDensity { coeff: f64, beta: f64, shift: f64 },
}

/// Normalized anti-derivative of a real distribution on [0, L).
#[derive(Debug, Clone, PartialEq)]
pub struct AntiDerivative {
    grid: Vec<f64>,
    segments: Vec<Poly>,
    tail: Option<TailModel>,
}

impl AntiDerivative {
    pub fn new(
        grid: Vec<f64>,
        segments: Vec<Poly>,
        tail: Option<TailModel>,
        len: ExtendedLength,
    ) -> Result<Self> {
        let w = AntiDerivative { grid, segments, tail };
        w.validate(len)?;
        Ok(w)
    }

    pub(crate) fn validate(&self, len: ExtendedLength) -> Result<()> {
        len.validate()?;
        if self.grid.is_empty() || self.grid[0] != 0.0 {
            return Err(Error::InvalidCoefficient(
                "anti-derivative grid must start at 0".into(),
            ));
        }
        if !strictly_increasing(&self.grid) || self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCoefficient(
                "anti-derivative grid must be finite and strictly increasing".into(),
            ));
        }
        if self.segments.len() + 1 != self.grid.len() {
            return Err(Error::InvalidCoefficient(
                "segment count must be grid point count minus one".into(),
            ));
        }
        if self
            .segments
            .iter()
            .any(|p| p.coeffs.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidCoefficient(
                "segment coefficients must be finite".into(),
            ));
        }
        let last = *self.grid.last().unwrap();
        match (len, &self.tail) {
            (ExtendedLength::Infinite, None) => Err(Error::InvalidCoefficient(
                "infinite strings require a tail model".into(),
            )),
            (ExtendedLength::Infinite, Some(t)) => {
                validate_tail(t, last, true)?;
                Ok(())
            }
            (ExtendedLength::Finite(l), None) => {
                if last != l {
                    return Err(Error::InvalidCoefficient(format!(
                        "without a tail the grid must reach the length: grid ends at {last}, length {l}"
                    )));
                }
                Ok(())
            }
            (ExtendedLength::Finite(l), Some(t)) => {
                if last >= l {
                    return Err(Error::InvalidCoefficient(
                        "boundary tail requires the grid to end before the length".into(),
                    ));
                }
                validate_tail(t, l - last, false)?;
                Ok(())
            }
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn segments(&self) -> &[Poly] {
        &self.segments
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// Point past which the tail model applies (the last grid point).
    pub fn tail_start(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn eval(&self, x: f64, len: ExtendedLength) -> f64 {
        let last = self.tail_start();
        if x < last || self.tail.is_none() {
            let i = cell_index(&self.grid, x.min(last));
            return self.segments[i].eval(x - self.grid[i]);
        }
        match *self.tail.as_ref().unwrap() {
            TailModel::ExactConstant { c } => c,
            TailModel::PowerDecay { c, coeff, alpha, shift } => {
                let s = match len {
                    ExtendedLength::Infinite => x + shift,
                    ExtendedLength::Finite(l) => l - x + shift,
                };
                c + coeff * s.powf(-alpha)
            }
            TailModel::LinearGrowth { c, slope } => c + slope * x,
        }
    }

    /// ∫_a^b w(x)·p(x − x0) dx, exact. For b = ∞ the value may be ±∞.
    pub fn weighted_integral(&self, p: &Poly, x0: f64, a: f64, b: f64, len: ExtendedLength) -> f64 {
        debug_assert!(a <= b);
        let xm = self.tail_start();
        let mut acc = 0.0;
        let bc = b.min(xm);
        if a < bc {
            let mut i = cell_index(&self.grid, a);
            while i < self.segments.len() && self.grid[i] < bc {
                let lo = a.max(self.grid[i]);
                let hi = bc.min(self.grid[i + 1]);
                if lo < hi {
                    let seg = self.segments[i];
                    let gi = self.grid[i];
                    acc += gauss5(lo, hi, |x| seg.eval(x - gi) * p.eval(x - x0));
                }
                i += 1;
            }
        }
        if b > xm {
            acc += self.tail_weighted_integral(p, x0, a.max(xm), b, len);
        }
        acc
    }

    fn tail_weighted_integral(&self, p: &Poly, x0: f64, a: f64, b: f64, len: ExtendedLength) -> f64 {
        let tail = match self.tail {
            Some(t) => t,
            None => return 0.0,
        };
        match len {
            ExtendedLength::Infinite => match tail {
                TailModel::ExactConstant { c } => {
                    if c == 0.0 {
                        0.0
                    } else {
                        c * power_weighted_integral(0.0, 0.0, p, x0, a, b)
                    }
                }
                TailModel::PowerDecay { c, coeff, alpha, shift } => {
                    let mut acc = 0.0;
                    if c != 0.0 {
                        acc += c * power_weighted_integral(0.0, 0.0, p, x0, a, b);
                    }
                    if coeff != 0.0 {
                        acc += coeff * power_weighted_integral(alpha, shift, p, x0, a, b);
                    }
                    acc
                }
                TailModel::LinearGrowth { c, slope } => {
                    if b.is_infinite() {
                        let lead = leading_sign(p, slope, c);
                        return lead * f64::INFINITY;
                    }
                    gauss5(a, b, |x| (c + slope * x) * p.eval(x - x0))
                }
            },
            ExtendedLength::Finite(l) => {
                // substitute u = L − x; p flips orientation
                let pf = p.compose_affine(l - x0, -1.0);
                let (ulo, uhi) = (l - b.min(l), l - a);
                match tail {
                    TailModel::ExactConstant { c } => {
                        if c == 0.0 {
                            0.0
                        } else {
                            c * power_weighted_integral(0.0, 0.0, &pf, 0.0, ulo, uhi)
                        }
                    }
                    TailModel::PowerDecay { c, coeff, alpha, shift } => {
                        let mut acc = 0.0;
                        if c != 0.0 {
                            acc += c * power_weighted_integral(0.0, 0.0, &pf, 0.0, ulo, uhi);
                        }
                        if coeff != 0.0 {
                            acc += coeff * power_weighted_integral(alpha, shift, &pf, 0.0, ulo, uhi);
                        }
                        acc
                    }
                    TailModel::LinearGrowth { .. } => f64::NAN,
                }
            }
        }
    }

    /// ∫_a^b (w − cref)² dx, exact; divergence yields +∞.
    pub fn sq_dev_integral(&self, cref: f64, a: f64, b: f64, len: ExtendedLength) -> f64 {
        let xm = self.tail_start();
        let mut acc = 0.0;
        let bc = b.min(xm);
        if a < bc {
            let mut i = cell_index(&self.grid, a);
            while i < self.segments.len() && self.grid[i] < bc {
                let lo = a.max(self.grid[i]);
                let hi = bc.min(self.grid[i + 1]);
                if lo < hi {
                    let seg = self.segments[i];
                    let gi = self.grid[i];
                    acc += gauss5(lo, hi, |x| {
                        let d = seg.eval(x - gi) - cref;
                        d * d
                    });
                }
                i += 1;
            }
        }
        if b > xm {
            acc += self.tail_sq_dev_integral(cref, a.max(xm), b, len);
        }
        if acc.is_nan() {
            f64::INFINITY
        } else {
            acc
        }
    }

    fn tail_sq_dev_integral(&self, cref: f64, a: f64, b: f64, len: ExtendedLength) -> f64 {
        let tail = match self.tail {
            Some(t) => t,
            None => return 0.0,
        };
        let infinite = len.is_infinite();
        // bounds in the tail variable
        let (lo, hi) = match len {
            ExtendedLength::Infinite => (a, b),
            ExtendedLength::Finite(l) => (l - b.min(l), l - a),
        };
        match tail {
            TailModel::ExactConstant { c } => {
                let d = c - cref;
                if d == 0.0 {
                    0.0
                } else if hi.is_infinite() {
                    f64::INFINITY
                } else {
                    d * d * (hi - lo)
                }
            }
            TailModel::PowerDecay { c, coeff, alpha, shift } => {
                let d = c - cref;
                let (slo, shi) = (lo + shift, if hi.is_infinite() { hi } else { hi + shift });
                let mut acc = 0.0;
                if d != 0.0 {
                    acc += d * d * power_integral(0.0, slo, shi);
                }
                if d != 0.0 && coeff != 0.0 {
                    acc += 2.0 * d * coeff * power_integral(-alpha, slo, shi);
                }
                if coeff != 0.0 {
                    acc += coeff * coeff * power_integral(-2.0 * alpha, slo, shi);
                }
                if acc.is_nan() {
                    f64::INFINITY
                } else {
                    acc
                }
            }
            TailModel::LinearGrowth { c, slope } => {
                debug_assert!(infinite);
                if hi.is_infinite() {
                    f64::INFINITY
                } else {
                    gauss5(lo, hi, |x| {
                        let d = c + slope * x - cref;
                        d * d
                    })
                }
            }
        }
    }

    /// ∫_a^b (cref − w) dx, exact; may be ±∞ when divergent.
    pub fn dev_integral(&self, cref: f64, a: f64, b: f64, len: ExtendedLength) -> f64 {
        let xm = self.tail_start();
        let mut acc = 0.0;
        let bc = b.min(xm);
        if a < bc {
            let mut i = cell_index(&self.grid, a);
            while i < self.segments.len() && self.grid[i] < bc {
                let lo = a.max(self.grid[i]);
                let hi = bc.min(self.grid[i + 1]);
                if lo < hi {
                    let seg = self.segments[i];
                    let gi = self.grid[i];
                    acc += gauss5(lo, hi, |x| cref - seg.eval(x - gi));
                }
                i += 1;
            }
        }
        if b > xm {
            let a2 = a.max(xm);
            let tail = self.tail.unwrap();
            let (lo, hi) = match len {
                ExtendedLength::Infinite => (a2, b),
                ExtendedLength::Finite(l) => (l - b.min(l), l - a2),
            };
            match tail {
                TailModel::ExactConstant { c } => {
                    let d = cref - c;
                    if d != 0.0 {
                        acc += if hi.is_infinite() {
                            d * f64::INFINITY
                        } else {
                            d * (hi - lo)
                        };
                    }
                }
                TailModel::PowerDecay { c, coeff, alpha, shift } => {
                    let d = cref - c;
                    if d != 0.0 {
                        let constant_part = if hi.is_infinite() {
                            d * f64::INFINITY
                        } else {
                            d * (hi - lo)
                        };
                        if constant_part.is_infinite() {
                            // dominates the decaying correction
                            return constant_part;
                        }
                        acc += constant_part;
                    }
                    if coeff != 0.0 {
                        let (slo, shi) = (lo + shift, if hi.is_infinite() { hi } else { hi + shift });
                        acc -= coeff * power_integral(-alpha, slo, shi);
                    }
                }
                TailModel::LinearGrowth { c, slope } => {
                    if b.is_infinite() {
                        return -slope * f64::INFINITY;
                    }
                    acc += gauss5(a2, b, |x| cref - (c + slope * x));
                }
            }
        }
        acc
    }

    /// ∫ over the whole string of x·(w − cref)² dx; +∞ when divergent.
    pub fn x_weighted_sq_dev_integral(&self, cref: f64, len: ExtendedLength) -> f64 {
        let xm = self.tail_start();
        let mut acc = 0.0;
        for i in 0..self.segments.len() {
            let seg = self.segments[i];
            let gi = self.grid[i];
            acc += gauss5(self.grid[i], self.grid[i + 1], |x| {
                let d = seg.eval(x - gi) - cref;
                x * d * d
            });
        }
        let tail = match self.tail {
            Some(t) => t,
            None => return acc,
        };
        let value = match len {
            ExtendedLength::Infinite => match tail {
                TailModel::ExactConstant { c } => {
                    let d = c - cref;
                    if d == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
                TailModel::PowerDecay { c, coeff, alpha, shift } => {
                    let d = c - cref;
                    let lo = xm + shift;
                    let hi = f64::INFINITY;
                    // x = s − shift with s the shifted variable
                    let mut t = 0.0;
                    for (mag, exp) in [
                        (d * d, 1.0),
                        (-d * d * shift, 0.0),
                        (2.0 * d * coeff, 1.0 - alpha),
                        (-2.0 * d * coeff * shift, -alpha),
                        (coeff * coeff, 1.0 - 2.0 * alpha),
                        (-coeff * coeff * shift, -2.0 * alpha),
                    ] {
                        if mag != 0.0 {
                            t += mag * power_integral(exp, lo, hi);
                        }
                    }
                    t
                }
                TailModel::LinearGrowth { .. } => f64::INFINITY,
            },
            ExtendedLength::Finite(l) => {
                // x·(w − cref)² with x = L − u
                let (ulo, uhi) = (0.0, l - xm);
                match tail {
                    TailModel::ExactConstant { c } => {
                        let d = c - cref;
                        if d == 0.0 {
                            0.0
                        } else {
                            d * d * gauss5(ulo, uhi, |u| l - u)
                        }
                    }
                    TailModel::PowerDecay { c, coeff, alpha, shift } => {
                        let d = c - cref;
                        let x_poly = Poly::linear(l, -1.0);
                        let mut t = 0.0;
                        if d != 0.0 {
                            t += d * d * power_weighted_integral(0.0, 0.0, &x_poly, 0.0, ulo, uhi);
                        }
                        if d != 0.0 && coeff != 0.0 {
                            t += 2.0 * d * coeff
                                * power_weighted_integral(alpha, shift, &x_poly, 0.0, ulo, uhi);
                        }
                        if coeff != 0.0 {
                            t += coeff * coeff
                                * power_weighted_integral(2.0 * alpha, shift, &x_poly, 0.0, ulo, uhi);
                        }
                        t
                    }
                    TailModel::LinearGrowth { .. } => f64::NAN,
                }
            }
        };
        let total = acc + value;
        if total.is_nan() {
            f64::INFINITY
        } else {
            total
        }
    }

    /// ∫₀ᴸ (2x/L − 1)·w(x) dx for a finite string.
    pub fn finite_trace_integral(&self, l: f64) -> f64 {
        let len = ExtendedLength::Finite(l);
        let p = Poly::linear(-1.0, 2.0 / l);
        self.weighted_integral(&p, 0.0, 0.0, l, len)
    }
}

fn validate_tail(tail: &TailModel, distance_to_region: f64, infinite: bool) -> Result<()> {
    match *tail {
        TailModel::ExactConstant { c } => {
            if !c.is_finite() {
                return Err(Error::InvalidCoefficient("tail constant must be finite".into()));
            }
        }
        TailModel::PowerDecay { c, coeff, alpha, shift } => {
            if !(c.is_finite() && coeff.is_finite() && alpha.is_finite() && shift.is_finite()) {
                return Err(Error::InvalidCoefficient("tail parameters must be finite".into()));
            }
            if alpha <= 0.0 {
                return Err(Error::UnsupportedTail(format!(
                    "power tail needs a positive exponent, got alpha = {alpha}"
                )));
            }
            if shift < 0.0 {
                return Err(Error::UnsupportedTail("tail shift must be nonnegative".into()));
            }
            if infinite && distance_to_region + shift <= 0.0 {
                return Err(Error::UnsupportedTail(
                    "power tail starting at 0 needs a positive shift".into(),
                ));
            }
        }
        TailModel::LinearGrowth { c, slope } => {
            if !infinite {
                return Err(Error::UnsupportedTail(
                    "linear growth tails only apply to infinite strings".into(),
                ));
            }
            if !(c.is_finite() && slope.is_finite()) || slope == 0.0 {
                return Err(Error::UnsupportedTail(
                    "linear growth tail needs a finite nonzero slope (use ExactConstant otherwise)"
                        .into(),
                ));
            }
        }
    }
    Ok(())
}

fn leading_sign(p: &Poly, slope: f64, _c: f64) -> f64 {
    let lead = p
        .coeffs
        .iter()
        .rev()
        .find(|&&c| c != 0.0)
        .copied()
        .unwrap_or(0.0);
    if lead == 0.0 {
        0.0
    } else {
        (slope * lead).signum()
    }
}

/// Sign constraint on a measure representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSign {
    NonNegative,
    Signed,
}

/// Atoms plus piecewise-constant density plus power tail on [0, L).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRepr {
    atoms: Vec<(f64, f64)>,
    density_grid: Vec<f64>,
    density_values: Vec<f64>,
    tail: MeasureTail,
    sign: MeasureSign,
}

impl MeasureRepr {
    pub fn new(
        atoms: Vec<(f64, f64)>,
        density_grid: Vec<f64>,
        density_values: Vec<f64>,
        tail: MeasureTail,
        sign: MeasureSign,
        len: ExtendedLength,
    ) -> Result<Self> {
        let m = MeasureRepr { atoms, density_grid, density_values, tail, sign };
        m.validate(len)?;
        Ok(m)
    }

    /// The zero measure.
    pub fn zero() -> Self {
        MeasureRepr {
            atoms: Vec::new(),
            density_grid: alloc::vec![0.0],
            density_values: Vec::new(),
            tail: MeasureTail::Zero,
            sign: MeasureSign::NonNegative,
        }
    }

    /// Purely atomic measure from (position, weight) pairs.
    pub fn from_atoms(atoms: Vec<(f64, f64)>, sign: MeasureSign, len: ExtendedLength) -> Result<Self> {
        MeasureRepr::new(atoms, alloc::vec![0.0], Vec::new(), MeasureTail::Zero, sign, len)
    }

    pub(crate) fn validate(&self, len: ExtendedLength) -> Result<()> {
        len.validate()?;
        let l = len.upper();
        if self
            .atoms
            .iter()
            .any(|&(x, w)| !x.is_finite() || !w.is_finite() || x < 0.0 || x >= l)
        {
            return Err(Error::InvalidMeasure(
                "atom positions must be finite, nonnegative, and inside [0, L)".into(),
            ));
        }
        if !self.atoms.windows(2).all(|p| p[0].0 < p[1].0) {
            return Err(Error::InvalidMeasure(
                "atom positions must be strictly increasing".into(),
            ));
        }
        if self.density_grid.is_empty() || self.density_grid[0] != 0.0 {
            return Err(Error::InvalidMeasure("density grid must start at 0".into()));
        }
        if !strictly_increasing(&self.density_grid)
            || self.density_grid.iter().any(|x| !x.is_finite())
        {
            return Err(Error::InvalidMeasure(
                "density grid must be finite and strictly increasing".into(),
            ));
        }
        if self.density_values.len() + 1 != self.density_grid.len() {
            return Err(Error::InvalidMeasure(
                "density value count must be grid point count minus one".into(),
            ));
        }
        if self.density_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("density values must be finite".into()));
        }
        let dend = *self.density_grid.last().unwrap();
        if dend > l {
            return Err(Error::InvalidMeasure("density grid exceeds the length".into()));
        }
        match self.tail {
            MeasureTail::Zero => {}
            MeasureTail::PowerDensity { coeff, beta, shift } => {
                if !(coeff.is_finite() && beta.is_finite() && shift.is_finite()) || shift < 0.0 {
                    return Err(Error::InvalidMeasure("tail parameters must be finite, shift ≥ 0".into()));
                }
                if len.is_infinite() && dend + shift <= 0.0 && beta > 0.0 {
                    return Err(Error::UnsupportedTail(
                        "density tail starting at 0 needs a positive shift for positive beta".into(),
                    ));
                }
                if !len.is_infinite() && dend >= l {
                    return Err(Error::InvalidMeasure(
                        "boundary density tail requires the grid to end before the length".into(),
                    ));
                }
            }
        }
        if self.sign == MeasureSign::NonNegative {
            if let Some(&(x, w)) = self.atoms.iter().find(|&&(_, w)| w < 0.0) {
                return Err(Error::SignViolation(format!(
                    "nonnegative measure has atom of weight {w} at {x}"
                )));
            }
            if self.density_values.iter().any(|&v| v < 0.0) {
                return Err(Error::SignViolation(
                    "nonnegative measure has negative density".into(),
                ));
            }
            if let MeasureTail::PowerDensity { coeff, .. } = self.tail {
                if coeff < 0.0 {
                    return Err(Error::SignViolation(
                        "nonnegative measure has negative tail density".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density_grid(&self) -> &[f64] {
        &self.density_grid
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density_values
    }

    pub fn tail(&self) -> &MeasureTail {
        &self.tail
    }

    pub fn sign(&self) -> MeasureSign {
        self.sign
    }

    pub fn is_purely_atomic(&self) -> bool {
        self.density_values.iter().all(|&v| v == 0.0) && self.tail == MeasureTail::Zero
    }

    pub fn is_zero(&self) -> bool {
        self.is_purely_atomic() && self.atoms.iter().all(|&(_, w)| w == 0.0)
    }

    /// Breakpoints of the absolutely continuous part.
    pub fn density_breakpoints(&self) -> &[f64] {
        &self.density_grid
    }

    fn density_tail_start(&self) -> f64 {
        *self.density_grid.last().unwrap()
    }

    /// Mass of [x, L) (atoms at positions ≥ x included). May be +∞.
    pub fn mass_from(&self, x: f64, len: ExtendedLength) -> f64 {
        let mut acc: f64 = self.atoms.iter().filter(|&&(p, _)| p >= x).map(|&(_, w)| w).sum();
        for i in 0..self.density_values.len() {
            let lo = self.density_grid[i].max(x);
            let hi = self.density_grid[i + 1];
            if lo < hi {
                acc += self.density_values[i] * (hi - lo);
            }
        }
        let dend = self.density_tail_start();
        if let MeasureTail::PowerDensity { coeff, beta, shift } = self.tail {
            if coeff != 0.0 {
                let start = x.max(dend);
                acc += match len {
                    ExtendedLength::Infinite => {
                        coeff * power_integral(-beta, start + shift, f64::INFINITY)
                    }
                    ExtendedLength::Finite(l) => {
                        coeff * power_integral(-beta, shift, l - start + shift)
                    }
                };
            }
        }
        acc
    }

    /// Mass of [0, x) (atoms at positions < x included). May be +∞.
    pub fn mass_upto(&self, x: f64, len: ExtendedLength) -> f64 {
        let mut acc: f64 = self.atoms.iter().filter(|&&(p, _)| p < x).map(|&(_, w)| w).sum();
        for i in 0..self.density_values.len() {
            let lo = self.density_grid[i];
            let hi = self.density_grid[i + 1].min(x);
            if lo < hi {
                acc += self.density_values[i] * (hi - lo);
            }
        }
        let dend = self.density_tail_start();
        if x > dend {
            if let MeasureTail::PowerDensity { coeff, beta, shift } = self.tail {
                if coeff != 0.0 {
                    acc += match len {
                        ExtendedLength::Infinite => {
                            coeff * power_integral(-beta, dend + shift, x + shift)
                        }
                        ExtendedLength::Finite(l) => {
                            coeff * power_integral(-beta, l - x.min(l) + shift, l - dend + shift)
                        }
                    };
                }
            }
        }
        acc
    }

    pub fn total_mass(&self, len: ExtendedLength) -> f64 {
        self.mass_from(0.0, len)
    }

    /// ∫ x dm over [0, L). May be +∞.
    pub fn first_moment(&self, len: ExtendedLength) -> f64 {
        let p = Poly::linear(0.0, 1.0);
        let acc: f64 = self.atoms.iter().map(|&(x, w)| w * x).sum();
        acc + self.weighted_density_integral(&p, 0.0, 0.0, len.upper(), len)
    }

    /// ∫ x(1 − x/L) dm for a finite string.
    pub fn weighted_moment_finite(&self, l: f64) -> f64 {
        let len = ExtendedLength::Finite(l);
        let p = Poly::new([0.0, 1.0, -1.0 / l, 0.0]);
        let acc: f64 = self.atoms.iter().map(|&(x, w)| w * x * (1.0 - x / l)).sum();
        acc + self.weighted_density_integral(&p, 0.0, 0.0, l, len)
    }

    /// ∫_a^b p(x − x0) against the absolutely continuous part (density plus
    /// tail; atoms are not included). Exact; may be ±∞.
    pub fn weighted_density_integral(
        &self,
        p: &Poly,
        x0: f64,
        a: f64,
        b: f64,
        len: ExtendedLength,
    ) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.density_values.len() {
            let v = self.density_values[i];
            if v == 0.0 {
                continue;
            }
            let lo = self.density_grid[i].max(a);
            let hi = self.density_grid[i + 1].min(b);
            if lo < hi {
                acc += v * gauss5(lo, hi, |x| p.eval(x - x0));
            }
        }
        let dend = self.density_tail_start();
        if b > dend {
            if let MeasureTail::PowerDensity { coeff, beta, shift } = self.tail {
                if coeff != 0.0 {
                    let a2 = a.max(dend);
                    acc += match len {
                        ExtendedLength::Infinite => {
                            coeff * power_weighted_integral(beta, shift, p, x0, a2, b)
                        }
                        ExtendedLength::Finite(l) => {
                            let pf = p.compose_affine(l - x0, -1.0);
                            coeff
                                * power_weighted_integral(beta, shift, &pf, 0.0, l - b.min(l), l - a2)
                        }
                    };
                }
            }
        }
        acc
    }
}

/// A generalized indefinite string (L, ω, υ): ω through its anti-derivative,
/// υ a nonnegative measure.
#[derive(Debug, Clone, PartialEq)]
pub struct GIString {
    length: ExtendedLength,
    w: AntiDerivative,
    upsilon: MeasureRepr,
}

impl GIString {
    pub fn new(length: ExtendedLength, w: AntiDerivative, upsilon: MeasureRepr) -> Result<Self> {
        w.validate(length)?;
        upsilon.validate(length)?;
        if upsilon.sign() != MeasureSign::NonNegative {
            return Err(Error::SignViolation(
                "the quadratic-term measure must be declared nonnegative".into(),
            ));
        }
        Ok(GIString { length, w, upsilon })
    }

    pub fn length(&self) -> ExtendedLength {
        self.length
    }

    pub fn w(&self) -> &AntiDerivative {
        &self.w
    }

    pub fn upsilon(&self) -> &MeasureRepr {
        &self.upsilon
    }

    /// Structural warnings: conditions that are legal but spectrally inert.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.upsilon.atoms().iter().any(|&(x, w)| x == 0.0 && w != 0.0) {
            out.push(
                "upsilon has an atom at position 0; it carries no energy pairing and is invisible to the spectrum"
                    .into(),
            );
        }
        out
    }
}

/// Anti-derivative x ↦ m([0, x)) of a measure, re-expressed in the
/// piecewise-polynomial + tail class. Fails when the accumulated tail is not
/// in the model class (density exponents in (0, 1] on an infinite string
/// accumulate to logarithms or fractional growth).
pub fn anti_derivative_of_measure(m: &MeasureRepr, len: ExtendedLength) -> Result<AntiDerivative> {
    let l = len.upper();
    let dend = m.density_tail_start();
    let (t_coeff, t_beta, t_shift) = match *m.tail() {
        MeasureTail::Zero => (0.0, 0.0, 0.0),
        MeasureTail::PowerDensity { coeff, beta, shift } => (coeff, beta, shift),
    };
    // a constant tail density folds into linear segments (finite string) or a
    // linear-growth tail (infinite string); power tails accumulate to power
    // decay only when they integrate, exponents in (0, 1] give logarithms or
    // fractional growth and negative ones superlinear growth
    let genuine_tail = t_coeff != 0.0 && t_beta != 0.0;
    if genuine_tail {
        if t_beta <= 1.0 {
            return Err(Error::UnsupportedTail(format!(
                "density tail exponent beta = {t_beta} accumulates outside the anti-derivative tail class"
            )));
        }
        if m.atoms().iter().any(|&(x, _)| x > dend) {
            return Err(Error::UnsupportedTail(
                "atoms inside the density tail region are not representable".into(),
            ));
        }
    }

    let mut points: Vec<f64> = Vec::new();
    points.push(0.0);
    for &(x, _) in m.atoms() {
        if x > 0.0 && x < l {
            points.push(x);
        }
    }
    for &d in m.density_grid() {
        if d > 0.0 && d < l {
            points.push(d);
        }
    }
    if !len.is_infinite() && !genuine_tail {
        points.push(l);
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    // with a genuine tail, everything past dend lives in the tail model
    if genuine_tail {
        points.retain(|&x| x <= dend);
    }

    let mut grid = Vec::with_capacity(points.len());
    let mut segments = Vec::with_capacity(points.len());
    for (i, &left) in points.iter().enumerate() {
        grid.push(left);
        if i + 1 == points.len() {
            break;
        }
        let mass = m.mass_upto(left, len) + atom_mass_at(m, left);
        let mid = 0.5 * (left + points[i + 1]);
        segments.push(Poly::linear(mass, density_at(m, mid)));
    }

    let cut = *grid.last().unwrap();
    let compact = m.mass_upto(cut, len) + atom_mass_at(m, cut);
    let tail: Option<TailModel> = if len.is_infinite() {
        Some(if t_coeff == 0.0 {
            TailModel::ExactConstant { c: compact }
        } else if t_beta == 0.0 {
            TailModel::LinearGrowth { c: compact - t_coeff * cut, slope: t_coeff }
        } else {
            // m([0,x)) = c − coeff/(β−1)·(x+shift)^{1−β}
            let c = compact + t_coeff * power_integral(-t_beta, cut + t_shift, f64::INFINITY);
            TailModel::PowerDecay {
                c,
                coeff: -t_coeff / (t_beta - 1.0),
                alpha: t_beta - 1.0,
                shift: t_shift,
            }
        })
    } else if genuine_tail {
        // m([0,x)) = c + coeff/(β−1)·(L−x+shift)^{1−β}
        let base = (l - cut + t_shift).powf(1.0 - t_beta);
        Some(TailModel::PowerDecay {
            c: compact - t_coeff * base / (t_beta - 1.0),
            coeff: t_coeff / (t_beta - 1.0),
            alpha: t_beta - 1.0,
            shift: t_shift,
        })
    } else {
        None
    };

    AntiDerivative::new(grid, segments, tail, len)
}

fn atom_mass_at(m: &MeasureRepr, x: f64) -> f64 {
    m.atoms()
        .iter()
        .filter(|&&(p, _)| p == x)
        .map(|&(_, w)| w)
        .sum()
}

/// Density value at a point left of any genuine (non-constant) tail.
fn density_at(m: &MeasureRepr, x: f64) -> f64 {
    let dend = m.density_tail_start();
    if x < dend {
        let i = cell_index(m.density_grid(), x);
        return *m.density_values().get(i).unwrap_or(&0.0);
    }
    match *m.tail() {
        MeasureTail::Zero => 0.0,
        MeasureTail::PowerDensity { coeff, beta, .. } => {
            debug_assert!(beta == 0.0 || coeff == 0.0);
            if beta == 0.0 {
                coeff
            } else {
                0.0
            }
        }
    }
}

/// Distributional pairing ω(h) = −∫ w·h′ for a continuous, compactly
/// supported, piecewise-polynomial test function h inside [0, L).
pub fn pair_distribution(w: &AntiDerivative, len: ExtendedLength, h: &Piecewise) -> Result<f64> {
    let (lo, hi) = h.support();
    if lo < 0.0 || hi > len.upper() {
        return Err(Error::Usage(format!(
            "test function support [{lo}, {hi}] exceeds the string domain"
        )));
    }
    let scale = 1.0 + h.grid().iter().map(|&x| h.eval(x).abs()).fold(0.0, f64::max);
    if h.max_jump() > 1e-9 * scale {
        return Err(Error::Usage(
            "test function must be continuous and vanish at its support boundary".into(),
        ));
    }
    let mut acc = 0.0;
    let cells = merged_cells(&[w.grid(), h.grid()], lo, hi);
    for k in 0..cells.len() - 1 {
        let (a, b) = (cells[k], cells[k + 1]);
        let mid = 0.5 * (a + b);
        let j = cell_index(h.grid(), mid);
        let hp = h.segments()[j].derivative();
        acc += w.weighted_integral(&hp, h.grid()[j], a, b, len);
    }
    Ok(-acc)
}

/// Reproducing kernel of the energy space: min(x,t)·(1 − max(x,t)/L), the
/// second factor absent on an infinite string.
pub fn kernel_delta(x: f64, t: f64, len: ExtendedLength) -> f64 {
    debug_assert!(x >= 0.0 && t >= 0.0);
    let mn = x.min(t);
    match len {
        ExtendedLength::Infinite => mn,
        ExtendedLength::Finite(l) => mn * (1.0 - x.max(t) / l),
    }
}

/// Limit of (1/x)·∫₀ˣ w, when it exists in the model class. Only meaningful
/// on infinite strings; tails with genuine growth have no limit.
pub fn cesaro_mean_limit(w: &AntiDerivative, len: ExtendedLength) -> Option<f64> {
    if !len.is_infinite() {
        return None;
    }
    w.tail().and_then(|t| t.cesaro_constant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const INF: ExtendedLength = ExtendedLength::Infinite;

    fn single_atom(pos: f64, weight: f64, len: ExtendedLength) -> MeasureRepr {
        MeasureRepr::from_atoms(vec![(pos, weight)], MeasureSign::Signed, len).unwrap()
    }

    #[test]
    fn anti_derivative_of_single_atom() {
        let m = single_atom(2.0, 3.0, INF);
        let w = anti_derivative_of_measure(&m, INF).unwrap();
        assert_eq!(w.eval(1.0, INF), 0.0);
        assert_eq!(w.eval(5.0, INF), 3.0);
        assert_eq!(w.tail(), Some(&TailModel::ExactConstant { c: 3.0 }));
        assert_eq!(cesaro_mean_limit(&w, INF), Some(3.0));
    }

    #[test]
    fn anti_derivative_of_lebesgue_on_unit_interval() {
        let len = ExtendedLength::Finite(1.0);
        let m = MeasureRepr::new(
            vec![],
            vec![0.0, 1.0],
            vec![1.0],
            MeasureTail::Zero,
            MeasureSign::NonNegative,
            len,
        )
        .unwrap();
        let w = anti_derivative_of_measure(&m, len).unwrap();
        assert!(w.tail().is_none());
        for x in [0.0, 0.25, 0.5, 0.99] {
            assert!((w.eval(x, len) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn anti_derivative_of_halfline_lebesgue_grows_linearly() {
        let m = MeasureRepr::new(
            vec![],
            vec![0.0],
            vec![],
            MeasureTail::PowerDensity { coeff: 1.0, beta: 0.0, shift: 0.0 },
            MeasureSign::NonNegative,
            INF,
        )
        .unwrap();
        let w = anti_derivative_of_measure(&m, INF).unwrap();
        assert_eq!(w.tail(), Some(&TailModel::LinearGrowth { c: 0.0, slope: 1.0 }));
        assert!((w.eval(7.0, INF) - 7.0).abs() < 1e-15);
        assert_eq!(cesaro_mean_limit(&w, INF), None);
    }

    #[test]
    fn anti_derivative_of_power_density() {
        // density (1+x)^(−4) from 0: mass 1/3, anti-derivative tends to 1/3
        let m = MeasureRepr::new(
            vec![],
            vec![0.0],
            vec![],
            MeasureTail::PowerDensity { coeff: 1.0, beta: 4.0, shift: 1.0 },
            MeasureSign::NonNegative,
            INF,
        )
        .unwrap();
        assert!((m.total_mass(INF) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.first_moment(INF) - 1.0 / 6.0).abs() < 1e-15);
        let w = anti_derivative_of_measure(&m, INF).unwrap();
        match w.tail().unwrap() {
            TailModel::PowerDecay { c, coeff, alpha, shift } => {
                assert!((c - 1.0 / 3.0).abs() < 1e-15);
                assert!((coeff + 1.0 / 3.0).abs() < 1e-15);
                assert!((alpha - 3.0).abs() < 1e-15);
                assert_eq!(*shift, 1.0);
            }
            other => panic!("unexpected tail {other:?}"),
        }
        let exact = |x: f64| (1.0 - (1.0 + x).powi(-3)) / 3.0;
        for x in [0.5, 1.0, 10.0] {
            assert!((w.eval(x, INF) - exact(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn anti_derivative_of_finite_boundary_layer() {
        // density (1−x)^(−2) on [0,1): m([0,x)) = (1−x)^(−1) − 1
        let len = ExtendedLength::Finite(1.0);
        let m = MeasureRepr::new(
            vec![],
            vec![0.0],
            vec![],
            MeasureTail::PowerDensity { coeff: 1.0, beta: 2.0, shift: 0.0 },
            MeasureSign::NonNegative,
            len,
        )
        .unwrap();
        let w = anti_derivative_of_measure(&m, len).unwrap();
        match w.tail().unwrap() {
            TailModel::PowerDecay { c, coeff, alpha, shift } => {
                assert!((c + 1.0).abs() < 1e-15);
                assert!((coeff - 1.0).abs() < 1e-15);
                assert!((alpha - 1.0).abs() < 1e-15);
                assert_eq!(*shift, 0.0);
            }
            other => panic!("unexpected tail {other:?}"),
        }
        for x in [0.1, 0.5, 0.9] {
            assert!((w.eval(x, len) - (1.0 / (1.0 - x) - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_distribution_recovers_atom_and_density() {
        let tent = Piecewise::tent(0.0, 1.0, 2.0, 1.0).unwrap();
        // χ = δ₁: ω(h) = h(1)
        let w_atom = anti_derivative_of_measure(&single_atom(1.0, 1.0, INF), INF).unwrap();
        let v = pair_distribution(&w_atom, INF, &tent).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // ω = Lebesgue: ω(h) = ∫ h = 1 (tent area)
        let w_leb = AntiDerivative::new(
            vec![0.0],
            vec![],
            Some(TailModel::LinearGrowth { c: 0.0, slope: 1.0 }),
            INF,
        )
        .unwrap();
        let v = pair_distribution(&w_leb, INF, &tent).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pair_distribution_rejects_discontinuous_test_functions() {
        let broken = Piecewise::new(
            vec![0.0, 1.0, 2.0],
            vec![Poly::linear(0.0, 1.0), Poly::linear(0.5, -0.5)],
        )
        .unwrap();
        let w = anti_derivative_of_measure(&single_atom(1.0, 1.0, INF), INF).unwrap();
        assert!(matches!(
            pair_distribution(&w, INF, &broken),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn kernel_delta_values() {
        assert_eq!(kernel_delta(1.0, 2.0, ExtendedLength::Finite(4.0)), 0.5);
        assert_eq!(kernel_delta(2.0, 1.0, ExtendedLength::Finite(4.0)), 0.5);
        assert_eq!(kernel_delta(1.0, 2.0, INF), 1.0);
        assert_eq!(kernel_delta(0.0, 2.0, INF), 0.0);
    }

    #[test]
    fn sq_dev_and_moments_for_step_anti_derivative() {
        let w = anti_derivative_of_measure(&single_atom(2.0, 3.0, INF), INF).unwrap();
        // ∫ (w − 3)² = 9·2, ∫ x(w−3)² = 9·(2²/2), ∫ (3 − w) = 3·2
        assert!((w.sq_dev_integral(3.0, 0.0, f64::INFINITY, INF) - 18.0).abs() < 1e-12);
        assert!((w.x_weighted_sq_dev_integral(3.0, INF) - 18.0).abs() < 1e-12);
        assert!((w.dev_integral(3.0, 0.0, f64::INFINITY, INF) - 6.0).abs() < 1e-12);
        assert_eq!(w.sq_dev_integral(2.5, 0.0, f64::INFINITY, INF), f64::INFINITY);
    }

    #[test]
    fn finite_trace_integral_matches_weighted_moment() {
        // single jump of height m at a on [0, L]: ∫(2x/L − 1)w = m·a(1 − a/L)
        let l = 5.0;
        let len = ExtendedLength::Finite(l);
        let m = single_atom(2.0, 1.5, len);
        let w = anti_derivative_of_measure(&m, len).unwrap();
        let got = w.finite_trace_integral(l);
        let expect = 1.5 * 2.0 * (1.0 - 2.0 / l);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
        assert!((m.weighted_moment_finite(l) - expect).abs() < 1e-12);
    }

    #[test]
    fn mass_helpers_split_at_atoms() {
        let m = MeasureRepr::from_atoms(vec![(1.0, 2.0), (3.0, 1.0)], MeasureSign::NonNegative, INF)
            .unwrap();
        assert_eq!(m.mass_from(1.0, INF), 3.0);
        assert_eq!(m.mass_from(1.5, INF), 1.0);
        assert_eq!(m.mass_upto(1.0, INF), 0.0);
        assert_eq!(m.mass_upto(1.5, INF), 2.0);
        assert_eq!(m.total_mass(INF), 3.0);
    }

    #[test]
    fn construction_rejects_malformed_inputs() {
        assert!(AntiDerivative::new(vec![0.0, 1.0], vec![Poly::ZERO], None, INF).is_err());
        assert!(AntiDerivative::new(
            vec![0.0, 1.0],
            vec![Poly::ZERO],
            Some(TailModel::LinearGrowth { c: 0.0, slope: 1.0 }),
            ExtendedLength::Finite(2.0),
        )
        .is_err());
        assert!(AntiDerivative::new(
            vec![0.0, 1.0],
            vec![Poly::ZERO],
            None,
            ExtendedLength::Finite(2.0),
        )
        .is_err());
        assert!(MeasureRepr::from_atoms(vec![(2.0, 1.0), (1.0, 1.0)], MeasureSign::Signed, INF).is_err());
        assert!(MeasureRepr::from_atoms(vec![(1.0, -1.0)], MeasureSign::NonNegative, INF).is_err());
        assert!(ExtendedLength::Finite(0.0).validate().is_err());
    }

    #[test]
    fn zero_atom_warning_is_reported() {
        let len = INF;
        let w = AntiDerivative::new(
            vec![0.0],
            vec![],
            Some(TailModel::ExactConstant { c: 0.0 }),
            len,
        )
        .unwrap();
        let upsilon =
            MeasureRepr::from_atoms(vec![(0.0, 1.0)], MeasureSign::NonNegative, len).unwrap();
        let s = GIString::new(len, w, upsilon).unwrap();
        assert_eq!(s.warnings().len(), 1);
    }
}
