//! One-dimensional conservative remap.
//!
//! Cell masses `m_c` are turned into a piecewise cumulative-mass function:
//! inside cell `j` the primitive is the degree-`2d+1` Lagrange polynomial
//! `G_j` through the face nodes `x_{j+k}`, `k = -d..=d+1`, with
//! `G_j(x_j) = 0` and node increments equal to the stencil masses. The mass
//! between two backtracked faces `a < b` is then
//!
//! ```text
//! Σ_{c = cell(a)}^{cell(b) - 1} m_c + G_{cell(b)}(b) - G_{cell(a)}(a)
//! ```
//!
//! which telescopes, so a closed set of faces returns the input mass.
//!
//! The limiter blends `G_j` with a first-order partner per source cell,
//! choosing the smallest weight that keeps every sub-interval mass (between
//! consecutive backtracked faces inside the cell) within the density bounds.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Axis, BoundaryKind};
use crate::lagrange::{uniform_weights, MAX_HALF_DEGREE, MAX_STENCIL};
use crate::{Error, Result};

/// Masses of the cells of one grid line.
#[derive(Debug, Clone, Copy)]
pub struct MassProfile<'a> {
    pub axis: Axis,
    pub masses: &'a [f64],
}

impl<'a> MassProfile<'a> {
    pub fn new(axis: Axis, masses: &'a [f64]) -> Result<Self> {
        if masses.len() != axis.n {
            return Err(Error::GridMismatch);
        }
        Ok(Self { axis, masses })
    }
}

/// Density bounds enforced by the limiter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterBounds {
    pub f_min: f64,
    pub f_max: f64,
    pub enabled: bool,
}

impl LimiterBounds {
    pub fn new(f_min: f64, f_max: f64) -> Result<Self> {
        if !(f_min <= f_max) {
            return Err(Error::Usage(alloc::format!("limiter bounds out of order: {f_min} > {f_max}")));
        }
        Ok(Self { f_min, f_max, enabled: true })
    }

    pub const fn disabled() -> Self {
        Self { f_min: f64::NEG_INFINITY, f_max: f64::INFINITY, enabled: false }
    }
}

/// Measure of each source cell, used to turn density bounds into mass bounds.
#[derive(Debug, Clone, Copy)]
pub enum CellVolumes<'a> {
    /// Every cell has the same measure.
    Uniform(f64),
    /// Per-cell measures; `ghost` is used outside a zero-boundary line.
    PerCell { values: &'a [f64], ghost: f64 },
}

/// Cell values with ghost extension, and the cumulative interpolant built
/// on them.
#[derive(Clone, Copy)]
struct Cumulative<'a> {
    axis: Axis,
    values: &'a [f64],
    ghost: f64,
    d: usize,
}

impl Cumulative<'_> {
    #[inline]
    fn value(&self, c: isize) -> f64 {
        self.axis.wrap(c).map_or(self.ghost, |k| self.values[k])
    }

    #[inline]
    fn nodes(&self, j: isize) -> [f64; MAX_STENCIL] {
        let d = self.d;
        let mut v = [0.0; MAX_STENCIL];
        for k in 1..=d + 1 {
            v[d + k] = v[d + k - 1] + self.value(j + k as isize - 1);
        }
        for k in 1..=d {
            v[d - k] = v[d - k + 1] - self.value(j - k as isize);
        }
        v
    }

    #[inline]
    fn eval_with(&self, j: isize, w: &[f64]) -> f64 {
        let v = self.nodes(j);
        v[..2 * self.d + 2].iter().zip(w).map(|(a, b)| a * b).sum()
    }

    fn eval(&self, j: isize, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let mut w = [0.0; MAX_STENCIL];
        uniform_weights(self.d, s, &mut w);
        self.eval_with(j, &w)
    }
}

/// The degree-`2d+1` cumulative-mass polynomial of one anchor cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeInterpolant {
    anchor: isize,
    left_face: f64,
    delta: f64,
    d: usize,
    nodes: [f64; MAX_STENCIL],
}

impl CumulativeInterpolant {
    /// Node values at faces `anchor - d ..= anchor + d + 1`.
    pub fn node_values(&self) -> &[f64] {
        &self.nodes[..2 * self.d + 2]
    }

    pub fn anchor(&self) -> isize {
        self.anchor
    }

    /// Evaluates the polynomial at position `x`. Outside the anchor cell the
    /// same polynomial is extrapolated.
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.left_face) / self.delta;
        let mut w = [0.0; MAX_STENCIL];
        uniform_weights(self.d, s, &mut w);
        self.node_values().iter().zip(&w).map(|(a, b)| a * b).sum()
    }
}

/// Running integral `C(x) = ∫_{min}^{x}` of a line's reconstructed cell
/// values, built from the same piecewise cumulative interpolants as the
/// remap, so `C(b) - C(a)` equals the remapped amount on `[a, b]`.
#[derive(Debug, Clone)]
pub struct CumulativeFunction<'a> {
    axis: Axis,
    values: &'a [f64],
    ghost: f64,
    d: usize,
    prefix: Vec<f64>,
}

impl<'a> CumulativeFunction<'a> {
    /// `ghost` is the value of every cell outside a zero-boundary line.
    pub fn new(axis: Axis, values: &'a [f64], ghost: f64, d: usize) -> Result<Self> {
        check_profile(&MassProfile { axis, masses: values }, d)?;
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for v in values {
            acc += v;
            prefix.push(acc);
        }
        Ok(Self { axis, values, ghost, d, prefix })
    }

    fn cumulative(&self) -> Cumulative<'a> {
        Cumulative {
            axis: self.axis,
            values: self.values,
            ghost: if self.axis.bc == BoundaryKind::Periodic { 0.0 } else { self.ghost },
            d: self.d,
        }
    }

    /// `C` at face `j`.
    pub fn at_face(&self, j: isize) -> f64 {
        let n = self.axis.n as isize;
        match self.axis.bc {
            BoundaryKind::Periodic => {
                let q = j.div_euclid(n);
                self.prefix[j.rem_euclid(n) as usize] + q as f64 * self.prefix[self.axis.n]
            }
            BoundaryKind::Zero => {
                if j < 0 {
                    j as f64 * self.ghost
                } else if j > n {
                    self.prefix[self.axis.n] + (j - n) as f64 * self.ghost
                } else {
                    self.prefix[j as usize]
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (j, s) = locate_snapped(&self.axis, x);
        self.at_face(j) + self.cumulative().eval(j, s)
    }

    /// Position `x` with `C(x) = target`, searching from cell `hint`.
    ///
    /// Requires positive cell values; within a cell the polynomial is
    /// inverted by Newton's method safeguarded with bisection.
    pub fn invert(&self, target: f64, hint: isize) -> Result<f64> {
        let n = self.axis.n as isize;
        let mut j = hint;
        let mut steps = 0;
        while self.at_face(j + 1) <= target {
            j += 1;
            steps += 1;
            if steps > 4 * n + 8 {
                return Err(Error::Numerical("cumulative inversion does not bracket".into()));
            }
        }
        while self.at_face(j) > target {
            j -= 1;
            steps += 1;
            if steps > 4 * n + 8 {
                return Err(Error::Numerical("cumulative inversion does not bracket".into()));
            }
        }
        let base = self.at_face(j);
        let want = target - base;
        if want == 0.0 {
            return Ok(self.axis.face(j));
        }
        let cum = self.cumulative();
        let width = self.at_face(j + 1) - base;
        let nodes = cum.nodes(j);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut s = want / width;
        let mut w = [0.0; MAX_STENCIL];
        let mut dw = [0.0; MAX_STENCIL];
        let m = 2 * self.d + 2;
        for _ in 0..100 {
            uniform_weights(self.d, s, &mut w);
            let g: f64 = nodes[..m].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - want;
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            crate::lagrange::uniform_derivative_weights(self.d, s, &mut dw);
            let gp: f64 = nodes[..m].iter().zip(&dw).map(|(a, b)| a * b).sum();
            let mut next = s - g / gp;
            if !(gp > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 4.0 * f64::EPSILON {
                s = next;
                break;
            }
            s = next;
        }
        Ok(self.axis.face(j) + s * self.axis.delta)
    }
}

fn check_profile(profile: &MassProfile<'_>, d: usize) -> Result<()> {
    if d > MAX_HALF_DEGREE {
        return Err(Error::Usage(alloc::format!("half-degree {d} exceeds the supported maximum {MAX_HALF_DEGREE}")));
    }
    if profile.masses.len() != profile.axis.n {
        return Err(Error::GridMismatch);
    }
    if profile.axis.n < 2 * d + 2 {
        return Err(Error::Stencil { needed: 2 * d + 2, available: profile.axis.n });
    }
    Ok(())
}

/// Cumulative-mass interpolant `G_anchor` of half-degree `d`.
pub fn cumulative_mass_interpolant(profile: &MassProfile<'_>, anchor: isize, d: usize) -> Result<CumulativeInterpolant> {
    check_profile(profile, d)?;
    let c = Cumulative { axis: profile.axis, values: profile.masses, ghost: 0.0, d };
    Ok(CumulativeInterpolant {
        anchor,
        left_face: profile.axis.face(anchor),
        delta: profile.axis.delta,
        d,
        nodes: c.nodes(anchor),
    })
}

/// Conservative remap: the mass between each pair of consecutive faces.
///
/// `faces` must be strictly increasing. On a periodic line with `n + 1`
/// faces the last face must equal the first plus the period.
pub fn csl_remap(faces: &[f64], profile: &MassProfile<'_>, d: usize) -> Result<Vec<f64>> {
    remap(faces, profile, d, None)
}

/// [`csl_remap`] with the maximum-principle blending limiter.
///
/// `volumes` gives the measure of each source cell; mass bounds on a
/// sub-interval are the density bounds times the sub-interval's share of
/// that measure. With disabled bounds the result is bit-identical to
/// [`csl_remap`].
pub fn limited_remap(
    faces: &[f64],
    profile: &MassProfile<'_>,
    d: usize,
    bounds: &LimiterBounds,
    volumes: CellVolumes<'_>,
) -> Result<Vec<f64>> {
    if !bounds.enabled {
        return csl_remap(faces, profile, d);
    }
    remap(faces, profile, d, Some((bounds, volumes)))
}

/// Blending weight of one source cell.
///
/// The slices hold, at the points `x̃_0 < x̃_1 < … < x̃_{k+1}` (cell edges
/// plus the `k` backtracked faces inside), the cumulative values of the
/// first-order partner, the high-order interpolant and the cell measure.
/// Returns `1` when `k = 0`, otherwise the largest per-sub-interval weight
/// needed to bring the blended mass into `[f_min·w, f_max·w]`.
pub fn blend_alpha(low: &[f64], high: &[f64], volume: &[f64], bounds: &LimiterBounds) -> f64 {
    debug_assert!(low.len() == high.len() && high.len() == volume.len());
    if low.len() <= 2 {
        return 1.0;
    }
    if !bounds.enabled {
        return 0.0;
    }
    let mut alpha: f64 = 0.0;
    for c in 0..low.len() - 1 {
        let l = low[c + 1] - low[c];
        let h = high[c + 1] - high[c];
        let w = volume[c + 1] - volume[c];
        let lo = bounds.f_min * w;
        let hi = bounds.f_max * w;
        // The constraint is linear in α: α·l + (1-α)·h.
        let a = if h > hi {
            if h > l {
                (h - hi) / (h - l)
            } else {
                1.0
            }
        } else if h < lo {
            if l > h {
                (lo - h) / (l - h)
            } else {
                1.0
            }
        } else {
            0.0
        };
        alpha = alpha.max(a.clamp(0.0, 1.0));
    }
    alpha
}

fn remap(
    faces: &[f64],
    profile: &MassProfile<'_>,
    d: usize,
    limiter: Option<(&LimiterBounds, CellVolumes<'_>)>,
) -> Result<Vec<f64>> {
    check_profile(profile, d)?;
    if faces.len() < 2 {
        return Err(Error::Usage("at least two faces are required".into()));
    }
    for (index, pair) in faces.windows(2).enumerate() {
        if !(pair[1] > pair[0]) {
            return Err(Error::Ordering { index, left: pair[0], right: pair[1] });
        }
    }
    let axis = profile.axis;
    let n = axis.n as isize;
    let periodic = axis.bc == BoundaryKind::Periodic;

    let mut locs: Vec<(isize, f64)> = faces.iter().map(|&x| locate_snapped(&axis, x)).collect();
    let closed = periodic && faces.len() == axis.n + 1;
    if closed {
        let gap = faces[axis.n] - faces[0] - axis.length();
        if gap.abs() > 1e-9 * axis.length() {
            return Err(Error::Geometry(alloc::format!("periodic faces do not close: gap {gap:e}")));
        }
        let (j0, s0) = locs[0];
        locs[axis.n] = (j0 + n, s0);
    }

    let masses = Cumulative { axis, values: profile.masses, ghost: 0.0, d };

    let alphas = limiter.map(|(bounds, volumes)| cell_alphas(&locs, closed, &masses, bounds, volumes));
    let key = |j: isize| if periodic { j.rem_euclid(n) } else { j };

    let mut w = [0.0; MAX_STENCIL];
    let mut g = Vec::with_capacity(locs.len());
    for &(j, s) in &locs {
        if s == 0.0 {
            g.push(0.0);
            continue;
        }
        uniform_weights(d, s, &mut w);
        let high = masses.eval_with(j, &w);
        let value = match (&alphas, limiter) {
            (Some(table), Some((_, volumes))) => {
                let alpha = lookup(table, key(j));
                if alpha == 0.0 {
                    high
                } else {
                    let low = low_order(&masses, volumes, j, s, &w);
                    alpha * low + (1.0 - alpha) * high
                }
            }
            _ => high,
        };
        g.push(value);
    }

    let mut out = vec![0.0; faces.len() - 1];
    for (i, m) in out.iter_mut().enumerate() {
        let (ja, _) = locs[i];
        let (jb, _) = locs[i + 1];
        let mut full = 0.0;
        for c in ja..jb {
            full += masses.value(c);
        }
        *m = full + g[i + 1] - g[i];
    }
    Ok(out)
}

/// First-order partner: the cell's mean density times the cumulative
/// measure. With uniform measures this is the linear `m_j·s`.
#[inline]
fn low_order(masses: &Cumulative<'_>, volumes: CellVolumes<'_>, j: isize, s: f64, w: &[f64]) -> f64 {
    let m = masses.value(j);
    match volumes {
        CellVolumes::Uniform(_) => m * s,
        CellVolumes::PerCell { values, ghost } => {
            let vc = Cumulative { axis: masses.axis, values, ghost, d: masses.d };
            let v = vc.value(j);
            if v > 0.0 {
                m / v * vc.eval_with(j, w)
            } else {
                m * s
            }
        }
    }
}

fn volume_at(masses: &Cumulative<'_>, volumes: CellVolumes<'_>, j: isize, s: f64) -> f64 {
    match volumes {
        CellVolumes::Uniform(v) => v * s,
        CellVolumes::PerCell { values, ghost } => {
            if s == 1.0 {
                return Cumulative { axis: masses.axis, values, ghost, d: masses.d }.value(j);
            }
            Cumulative { axis: masses.axis, values, ghost, d: masses.d }.eval(j, s)
        }
    }
}

/// [`Axis::locate`], with positions within rounding of a face moved onto it
/// so that Eulerian faces reproduce cell masses exactly.
#[inline]
fn locate_snapped(axis: &Axis, x: f64) -> (isize, f64) {
    let t = (x - axis.min) / axis.delta;
    let r = crate::math::round(t);
    if (t - r).abs() <= 64.0 * f64::EPSILON * r.abs().max(1.0) {
        (r as isize, 0.0)
    } else {
        axis.locate(x)
    }
}

fn lookup(table: &[(isize, f64)], key: isize) -> f64 {
    match table.binary_search_by(|probe| probe.0.cmp(&key)) {
        Ok(k) => table[k].1,
        Err(_) => 1.0,
    }
}

/// Blending weights of every source cell containing at least one
/// backtracked face strictly inside it, sorted by cell key.
fn cell_alphas(
    locs: &[(isize, f64)],
    closed: bool,
    masses: &Cumulative<'_>,
    bounds: &LimiterBounds,
    volumes: CellVolumes<'_>,
) -> Vec<(isize, f64)> {
    let n = masses.axis.n as isize;
    let periodic = masses.axis.bc == BoundaryKind::Periodic;
    // The closing face duplicates the first one.
    let used = if closed { &locs[..locs.len() - 1] } else { locs };
    let mut inside: Vec<(isize, f64, isize)> =
        used.iter().filter(|l| l.1 > 0.0).map(|&(j, s)| (if periodic { j.rem_euclid(n) } else { j }, s, j)).collect();
    inside.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut table = Vec::new();
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut vol = Vec::new();
    let mut w = [0.0; MAX_STENCIL];
    let mut start = 0;
    while start < inside.len() {
        let key = inside[start].0;
        let raw = inside[start].2;
        let mut end = start;
        while end < inside.len() && inside[end].0 == key {
            end += 1;
        }
        low.clear();
        high.clear();
        vol.clear();
        let m = masses.value(raw);
        low.push(0.0);
        high.push(0.0);
        vol.push(0.0);
        for &(_, s, _) in &inside[start..end] {
            uniform_weights(masses.d, s, &mut w);
            high.push(masses.eval_with(raw, &w));
            low.push(low_order(masses, volumes, raw, s, &w));
            vol.push(volume_at(masses, volumes, raw, s));
        }
        high.push(m);
        low.push(m);
        vol.push(volume_at(masses, volumes, raw, 1.0));
        table.push((key, blend_alpha(&low, &high, &vol, bounds)));
        start = end;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn axis(n: usize, bc: BoundaryKind) -> Axis {
        Axis::new(0.0, 1.0, n, bc).unwrap()
    }

    fn exact_masses(ax: &Axis, antiderivative: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..ax.n as isize).map(|i| antiderivative(ax.face(i + 1)) - antiderivative(ax.face(i))).collect()
    }

    #[test]
    fn uniform_masses_give_linear_interpolant() {
        let ax = axis(8, BoundaryKind::Periodic);
        let masses = [0.3; 8];
        let p = MassProfile::new(ax, &masses).unwrap();
        let g = cumulative_mass_interpolant(&p, 3, 0).unwrap();
        for &x in &[0.375, 0.4, 0.45, 0.49] {
            assert!((g.eval(x) - 0.3 / ax.delta * (x - 0.375)).abs() < 1e-15);
        }
    }

    #[test]
    fn node_values_follow_cumulative_masses() {
        let ax = axis(10, BoundaryKind::Zero);
        let masses: Vec<f64> = (0..10).map(|k| 1.0 + k as f64).collect();
        let p = MassProfile::new(ax, &masses).unwrap();
        let g = cumulative_mass_interpolant(&p, 4, 2).unwrap();
        let m = |c: usize| masses[c];
        let expected = [-(m(2) + m(3)), -m(3), 0.0, m(4), m(4) + m(5), m(4) + m(5) + m(6)];
        assert_eq!(g.node_values(), expected);
    }

    #[test]
    fn interpolant_reproduces_cubic_antiderivative() {
        let ax = axis(10, BoundaryKind::Zero);
        let anti = |x: f64| x * x * x / 3.0;
        let masses = exact_masses(&ax, anti);
        let p = MassProfile::new(ax, &masses).unwrap();
        let g = cumulative_mass_interpolant(&p, 4, 2).unwrap();
        let x0 = ax.face(4);
        for k in 0..=10 {
            let x = x0 + ax.delta * k as f64 / 10.0;
            assert!((g.eval(x) - (anti(x) - anti(x0))).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_faces_return_input() {
        for bc in [BoundaryKind::Periodic, BoundaryKind::Zero] {
            let ax = axis(12, bc);
            let masses: Vec<f64> = (0..12).map(|k| libm::sin(k as f64) + 2.0).collect();
            let p = MassProfile::new(ax, &masses).unwrap();
            let out = csl_remap(&ax.faces(), &p, 2).unwrap();
            for (a, b) in out.iter().zip(&masses) {
                assert!((a - b).abs() < 1e-15 * b.abs());
            }
        }
    }

    #[test]
    fn constant_density_is_exact() {
        let ax = axis(16, BoundaryKind::Periodic);
        let c = 1.7;
        let masses = [c * ax.delta; 16];
        let p = MassProfile::new(ax, &masses).unwrap();
        let mut faces: Vec<f64> = ax.faces().iter().map(|&x| x - 0.21 * ax.delta + 0.3 * ax.delta * libm::sin(6.0 * x)).collect();
        faces[16] = faces[0] + 1.0;
        let out = csl_remap(&faces, &p, 2).unwrap();
        for (i, m) in out.iter().enumerate() {
            let w = faces[i + 1] - faces[i];
            assert!((m - c * w).abs() < 1e-14, "cell {i}");
        }
    }

    #[test]
    fn quartic_density_shifted_faces() {
        let ax = axis(20, BoundaryKind::Zero);
        let anti = |x: f64| libm::pow(x, 5.0) / 5.0;
        let masses = exact_masses(&ax, anti);
        let p = MassProfile::new(ax, &masses).unwrap();
        let faces: Vec<f64> = ax.faces().iter().map(|x| x - 0.37 * ax.delta).collect();
        let out = csl_remap(&faces, &p, 2).unwrap();
        // targets whose stencils stay inside the line
        for i in 3..17 {
            let exact = anti(faces[i + 1]) - anti(faces[i]);
            assert!((out[i] - exact).abs() < 1e-12 * exact.abs(), "cell {i}");
        }
    }

    #[test]
    fn rejects_non_monotone_faces() {
        let ax = axis(8, BoundaryKind::Zero);
        let masses = [1.0; 8];
        let p = MassProfile::new(ax, &masses).unwrap();
        let mut faces = ax.faces();
        faces.swap(3, 4);
        assert!(matches!(csl_remap(&faces, &p, 1), Err(Error::Ordering { index: 3, .. })));
    }

    #[test]
    fn short_profile_is_a_stencil_error() {
        let ax = axis(5, BoundaryKind::Periodic);
        let masses = [1.0; 5];
        let p = MassProfile::new(ax, &masses).unwrap();
        assert_eq!(csl_remap(&ax.faces(), &p, 2), Err(Error::Stencil { needed: 6, available: 5 }));
    }

    #[test]
    fn alpha_is_one_without_interior_faces() {
        let b = LimiterBounds::new(0.0, 1.0).unwrap();
        assert_eq!(blend_alpha(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], &b), 1.0);
    }

    #[test]
    fn alpha_is_zero_for_in_bound_data() {
        let b = LimiterBounds::new(0.0, 1.0).unwrap();
        let a = blend_alpha(&[0.0, 0.25, 0.5], &[0.0, 0.26, 0.5], &[0.0, 0.5, 1.0], &b);
        assert_eq!(a, 0.0);
    }

    #[test]
    fn alpha_matches_bisection_on_overshoot() {
        // one interior face at s = 0.4: high-order piece overshoots f_max
        let b = LimiterBounds::new(0.0, 1.0).unwrap();
        let low = [0.0, 0.36, 0.9];
        let high = [0.0, 0.47, 0.9];
        let vol = [0.0, 0.4, 1.0];
        let alpha = blend_alpha(&low, &high, &vol, &b);
        let ok = |a: f64| {
            (0..2).all(|c| {
                let m = a * (low[c + 1] - low[c]) + (1.0 - a) * (high[c + 1] - high[c]);
                let w = vol[c + 1] - vol[c];
                m <= b.f_max * w + 1e-15 && m >= b.f_min * w - 1e-15
            })
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((alpha - hi).abs() < 1e-10, "{alpha} vs {hi}");
        assert!((alpha - 0.07 / 0.11).abs() < 1e-14);
    }

    #[test]
    fn disabled_limiter_is_bit_identical() {
        let ax = axis(16, BoundaryKind::Periodic);
        let masses: Vec<f64> = (0..16).map(|k| if (4..9).contains(&k) { 0.0625 } else { 0.0 }).collect();
        let p = MassProfile::new(ax, &masses).unwrap();
        let mut faces: Vec<f64> = ax.faces().iter().map(|x| x - 0.3 * ax.delta).collect();
        faces[16] = faces[0] + 1.0;
        let plain = csl_remap(&faces, &p, 2).unwrap();
        let off = limited_remap(&faces, &p, 2, &LimiterBounds::disabled(), CellVolumes::Uniform(ax.delta)).unwrap();
        assert_eq!(plain, off);
    }

    #[test]
    fn top_hat_stays_in_bounds() {
        let ax = axis(32, BoundaryKind::Periodic);
        let masses: Vec<f64> = (0..32).map(|k| if (8..17).contains(&k) { ax.delta } else { 0.0 }).collect();
        let p = MassProfile::new(ax, &masses).unwrap();
        let mut faces: Vec<f64> = ax.faces().iter().map(|x| x - 0.3 * ax.delta).collect();
        faces[32] = faces[0] + 1.0;
        let plain = csl_remap(&faces, &p, 2).unwrap();
        assert!(plain.iter().any(|m| *m / ax.delta < -1e-3 || *m / ax.delta > 1.0 + 1e-3));
        let b = LimiterBounds::new(0.0, 1.0).unwrap();
        let lim = limited_remap(&faces, &p, 2, &b, CellVolumes::Uniform(ax.delta)).unwrap();
        for (i, m) in lim.iter().enumerate() {
            let rho = m / (faces[i + 1] - faces[i]);
            assert!((-1e-12..=1.0 + 1e-12).contains(&rho), "cell {i}: {rho}");
        }
        let total: f64 = lim.iter().sum();
        assert!((total - masses.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn uniform_density_with_tight_bounds() {
        let ax = axis(16, BoundaryKind::Periodic);
        let c = 0.8;
        let masses = [c * ax.delta; 16];
        let p = MassProfile::new(ax, &masses).unwrap();
        let mut faces: Vec<f64> = ax.faces().iter().map(|x| x + 0.45 * ax.delta).collect();
        faces[16] = faces[0] + 1.0;
        let b = LimiterBounds::new(c, c).unwrap();
        let out = limited_remap(&faces, &p, 2, &b, CellVolumes::Uniform(ax.delta)).unwrap();
        for m in out {
            assert!((m - c * ax.delta).abs() < 1e-15);
        }
    }

    #[test]
    fn full_blend_equals_linear_remap() {
        // With f_min = f_max the constraint forces α = 1 whenever the
        // high-order piece differs from the linear one.
        let ax = axis(16, BoundaryKind::Periodic);
        let masses: Vec<f64> = (0..16).map(|k| (1.0 + 0.5 * libm::sin(k as f64)) * ax.delta).collect();
        let p = MassProfile::new(ax, &masses).unwrap();
        let mut faces: Vec<f64> = ax.faces().iter().map(|x| x + 0.45 * ax.delta).collect();
        faces[16] = faces[0] + 1.0;
        let linear = csl_remap(&faces, &p, 0).unwrap();
        let b = LimiterBounds { f_min: 10.0, f_max: 10.0, enabled: true };
        let out = limited_remap(&faces, &p, 2, &b, CellVolumes::Uniform(ax.delta)).unwrap();
        for (a, l) in out.iter().zip(&linear) {
            assert!((a - l).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_function_inverts() {
        let ax = axis(12, BoundaryKind::Periodic);
        let vols: Vec<f64> = (0..12).map(|k| (1.0 + 0.3 * libm::cos(k as f64)) * ax.delta).collect();
        let c = CumulativeFunction::new(ax, &vols, 0.0, 2).unwrap();
        assert!((c.at_face(12) - vols.iter().sum::<f64>()).abs() < 1e-15);
        for &x in &[-0.3, 0.01, 0.37, 0.5, 0.99, 1.7] {
            let y = c.eval(x);
            let back = c.invert(y, 0).unwrap();
            assert!((back - x).abs() < 1e-13, "{x} -> {back}");
        }
        let faces = [0.1, 0.33, 0.6, 0.8];
        let p = MassProfile::new(ax, &vols).unwrap();
        let r = csl_remap(&faces, &p, 2).unwrap();
        for i in 0..3 {
            assert!((r[i] - (c.eval(faces[i + 1]) - c.eval(faces[i]))).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_line_uses_ghost_measure() {
        let ax = axis(8, BoundaryKind::Zero);
        let vols = [ax.delta; 8];
        let c = CumulativeFunction::new(ax, &vols, ax.delta, 1).unwrap();
        for &x in &[-0.2, 0.3, 1.1] {
            assert!((c.eval(x) - x).abs() < 1e-15);
            assert!((c.invert(x, 3).unwrap() - x).abs() < 1e-15);
        }
    }
}
