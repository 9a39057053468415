//! Unit-cube Wiener windows and the dyadic Littlewood–Paley ladder.
//!
//! The one-dimensional window `ψ` is supported on `[-1, 1]`, takes values in
//! `[0, 1]`, and tiles exactly: `Σ_{n∈ℤ} ψ(t - n) ≡ 1`. Multi-dimensional
//! windows are tensor products, and the dilated family is
//! `ψ^μ(ξ - μn) = Π_i ψ((ξ_i - μ n_i)/μ)`, which tiles for every `μ > 0`.
//!
//! The frequency band actually carried by the grid is `[-Nyq, Nyq)^d`, and
//! the *resolved lattice* for dilation `μ` collects the `n` whose dilated
//! cube meets that band. Summing windows over the resolved lattice
//! reproduces 1 at every grid frequency, which is what the partition-of-unity
//! checks assert at 1e-12.

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::grid::{Grid, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// `cos²(πt/2)` on `[-1, 1]`; C¹ across the support edge.
    RaisedCosine,
    /// Cubic smoothstep of the distance to the support edge.
    Smoothstep,
}

impl WindowKind {
    /// One-dimensional window value at `t`.
    #[inline]
    pub fn eval(self, t: f64) -> f64 {
        let a = t.abs();
        if a >= 1.0 {
            return 0.0;
        }
        match self {
            WindowKind::RaisedCosine => {
                let c = (0.5 * std::f64::consts::PI * t).cos();
                c * c
            }
            WindowKind::Smoothstep => {
                let s = 1.0 - a;
                s * s * (3.0 - 2.0 * s)
            }
        }
    }
}

/// Box of lattice points `n` (per-axis range `lo..=hi`) whose dilated cubes
/// meet the resolved frequency band.
#[derive(Clone, Copy, Debug)]
pub struct WienerLattice {
    d: usize,
    lo: i64,
    hi: i64,
}

impl WienerLattice {
    pub fn axis_range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo + 1) as usize).pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        n.len() == self.d && n.iter().all(|&c| c >= self.lo && c <= self.hi)
    }

    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let side = (self.hi - self.lo + 1) as usize;
        let mut idx = 0usize;
        for &c in n {
            idx = idx * side + (c - self.lo) as usize;
        }
        Some(idx)
    }

    pub fn point_of(&self, mut idx: usize, out: &mut [i64]) {
        let side = (self.hi - self.lo + 1) as usize;
        for axis in (0..self.d).rev() {
            out[axis] = self.lo + (idx % side) as i64;
            idx /= side;
        }
    }

    pub fn for_each(&self, mut f: impl FnMut(usize, &[i64])) {
        let mut n = [0i64; MAX_DIM];
        for idx in 0..self.len() {
            self.point_of(idx, &mut n[..self.d]);
            f(idx, &n[..self.d]);
        }
    }
}

/// Largest integer strictly below `t`.
fn int_below(t: f64) -> i64 {
    let f = t.floor();
    if f == t {
        f as i64 - 1
    } else {
        f as i64
    }
}

/// Smallest integer strictly above `t`.
fn int_above(t: f64) -> i64 {
    let c = t.ceil();
    if c == t {
        c as i64 + 1
    } else {
        c as i64
    }
}

/// Window decompositions bound to one grid: Wiener cubes at any dilation the
/// grid resolves, plus a finite dyadic Littlewood–Paley ladder whose top
/// block absorbs everything above it, so the ladder sums to 1 exactly.
#[derive(Clone, Copy, Debug)]
pub struct WindowLadder {
    grid: Grid,
    kind: WindowKind,
    lp_top: u64,
}

impl WindowLadder {
    pub fn new(grid: Grid, kind: WindowKind) -> WindowLadder {
        let mut lp_top = 1u64;
        while (2 * lp_top) as f64 <= grid.nyquist() {
            lp_top *= 2;
        }
        WindowLadder { grid, kind, lp_top }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    /// `ψ^μ(ξ - μn) = Π_i ψ((ξ_i - μ n_i)/μ)`.
    pub fn window_value(&self, xi: &[f64], n: &[i64], mu: f64) -> f64 {
        assert!(
            mu.is_finite() && mu > 0.0,
            "window dilation must be positive"
        );
        assert_eq!(xi.len(), n.len());
        let mut prod = 1.0;
        for (&x, &c) in xi.iter().zip(n) {
            prod *= self.kind.eval(x / mu - c as f64);
            if prod == 0.0 {
                return 0.0;
            }
        }
        prod
    }

    fn check_dilation(&self, mu: f64) -> Result<()> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::BadDilation(mu));
        }
        let spacing = self.grid.freq_spacing();
        if spacing > mu * (1.0 + 1e-12) {
            return Err(Error::CubesUnresolved { spacing, mu });
        }
        Ok(())
    }

    /// Lattice points whose dilated cubes meet the resolved band
    /// `[-Nyq, Nyq)^d`. Errors when the grid cannot resolve `μ`-cubes.
    pub fn lattice(&self, mu: f64) -> Result<WienerLattice> {
        self.check_dilation(mu)?;
        let q = self.grid.nyquist() / mu;
        Ok(WienerLattice {
            d: self.grid.d(),
            lo: int_above(-q - 1.0),
            hi: int_below(q + 1.0),
        })
    }

    /// Resolved lattice clipped to a per-axis truncation radius (`None`
    /// keeps everything).
    pub fn lattice_truncated(&self, mu: f64, radius: Option<i64>) -> Result<WienerLattice> {
        let full = self.lattice(mu)?;
        Ok(match radius {
            None => full,
            Some(r) => WienerLattice {
                d: full.d,
                lo: full.lo.max(-r),
                hi: full.hi.min(r),
            },
        })
    }

    /// Whether the dilated cube at `n` meets the resolved band. Projections
    /// outside the band are identically zero on the grid.
    pub fn cube_in_band(&self, n: &[i64], mu: f64) -> bool {
        match self.lattice(mu) {
            Ok(lat) => lat.contains(n),
            Err(_) => false,
        }
    }

    /// Per-axis window contributions at one frequency component: the at most
    /// two lattice offsets whose window is nonzero there, clipped to the
    /// resolved range. Returns `(candidates, count)`.
    #[inline]
    pub(crate) fn axis_candidates(
        &self,
        xi_component: f64,
        mu: f64,
        lat: &WienerLattice,
        out: &mut [(i64, f64); 2],
    ) -> usize {
        let t = xi_component / mu;
        let mut count = 0usize;
        let base = t.floor() as i64;
        for n in (base - 1)..=(base + 1) {
            if n < lat.lo || n > lat.hi {
                continue;
            }
            let v = self.kind.eval(t - n as f64);
            if v > 0.0 {
                out[count] = (n, v);
                count += 1;
                if count == 2 {
                    break;
                }
            }
        }
        count
    }

    /// `Σ_n ψ^μ(ξ - μn)` over the resolved lattice, evaluated separably.
    pub fn coverage_at(&self, xi: &[f64], mu: f64) -> Result<f64> {
        let lat = self.lattice(mu)?;
        let mut cands = [(0i64, 0.0f64); 2];
        let mut prod = 1.0;
        for &x in xi {
            let count = self.axis_candidates(x, mu, &lat, &mut cands);
            let axis_sum: f64 = cands[..count].iter().map(|&(_, v)| v).sum();
            prod *= axis_sum;
        }
        Ok(prod)
    }

    /// Largest deviation of the resolved-lattice window sum from 1 over all
    /// grid frequencies.
    pub fn partition_deviation(&self, mu: f64) -> Result<f64> {
        self.check_dilation(mu)?;
        let lat = self.lattice(mu)?;
        let h = self.grid.freq_spacing();
        let d = self.grid.d();
        let mut worst = 0.0f64;
        let mut cands = [(0i64, 0.0f64); 2];
        self.grid.for_each_mode(|_, modes| {
            let mut prod = 1.0;
            for &m in &modes[..d] {
                let count = self.axis_candidates(h * m as f64, mu, &lat, &mut cands);
                prod *= cands[..count].iter().map(|&(_, v)| v).sum::<f64>();
            }
            worst = worst.max((prod - 1.0).abs());
        });
        Ok(worst)
    }

    /// Frequency projection onto the dilated Wiener cube at `n`: multiplies
    /// coefficients by `ψ^μ(ξ - μn)`. For `n` outside the resolved band the
    /// result is the zero field; use [`WindowLadder::cube_in_band`] to tell
    /// that case apart.
    pub fn wiener_project(&self, u: &Field, n: &[i64], mu: f64) -> Result<Field> {
        self.check_dilation(mu)?;
        if u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if n.len() != self.grid.d() {
            return Err(Error::GridMismatch);
        }
        let mut out = u.to_frequency();
        let h = self.grid.freq_spacing();
        let d = self.grid.d();
        let kind = self.kind;
        {
            let data = out.data_mut();
            self.grid.for_each_mode(|flat, modes| {
                let mut w = 1.0;
                for axis in 0..d {
                    w *= kind.eval(h * modes[axis] as f64 / mu - n[axis] as f64);
                    if w == 0.0 {
                        break;
                    }
                }
                data[flat] *= w;
            });
        }
        Ok(out)
    }

    /// Top dyadic block of the Littlewood–Paley ladder (absorbs all higher
    /// frequencies so the ladder sums to 1 on the grid).
    pub fn lp_top(&self) -> u64 {
        self.lp_top
    }

    /// Ladder blocks `1, 2, 4, …, lp_top`.
    pub fn lp_blocks(&self) -> Vec<u64> {
        let mut blocks = Vec::new();
        let mut n = 1u64;
        loop {
            blocks.push(n);
            if n >= self.lp_top {
                break;
            }
            n *= 2;
        }
        blocks
    }

    /// Ladder symbol of block `block` at radius `r = |ξ|`.
    pub fn lp_symbol(&self, block: u64, r: f64) -> f64 {
        debug_assert!(block.is_power_of_two() && block <= self.lp_top);
        if self.lp_top == 1 {
            return 1.0;
        }
        let nf = block as f64;
        if block == 1 {
            eta(r)
        } else if block == self.lp_top {
            1.0 - eta(2.0 * r / nf)
        } else {
            eta(r / nf) - eta(2.0 * r / nf)
        }
    }

    /// Frequency projection onto one ladder block.
    pub fn lp_project(&self, u: &Field, block: u64) -> Result<Field> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if !(block.is_power_of_two() && block <= self.lp_top) {
            return Err(Error::BadNormParameter(format!(
                "Littlewood-Paley block must be a power of two <= {}, got {block}",
                self.lp_top
            )));
        }
        let mut out = u.to_frequency();
        let grid = self.grid;
        {
            let data = out.data_mut();
            for (flat, v) in data.iter_mut().enumerate() {
                let r = grid.freq_norm_sq(flat).sqrt();
                *v *= self.lp_symbol(block, r);
            }
        }
        Ok(out)
    }

    /// Largest deviation of the ladder sum from 1 over grid frequencies.
    pub fn lp_sum_deviation(&self) -> f64 {
        let blocks = self.lp_blocks();
        let mut worst = 0.0f64;
        for flat in 0..self.grid.total_points() {
            let r = self.grid.freq_norm_sq(flat).sqrt();
            let total: f64 = blocks.iter().map(|&b| self.lp_symbol(b, r)).sum();
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }

    /// Fraction of a field's spectral mass not covered by the kept lattice
    /// (after an optional per-axis truncation radius), measured in `L²`.
    pub fn truncation_loss(&self, u: &Field, mu: f64, radius: Option<i64>) -> Result<f64> {
        let lat = self.lattice_truncated(mu, radius)?;
        let hat = u.to_frequency();
        let h = self.grid.freq_spacing();
        let d = self.grid.d();
        let mut lost = 0.0f64;
        let mut total = 0.0f64;
        let mut cands = [(0i64, 0.0f64); 2];
        let data = hat.data();
        self.grid.for_each_mode(|flat, modes| {
            let mut cover = 1.0;
            for &m in &modes[..d] {
                let count = self.axis_candidates(h * m as f64, mu, &lat, &mut cands);
                cover *= cands[..count].iter().map(|&(_, v)| v).sum::<f64>();
            }
            let mass = data[flat].norm_sqr();
            total += mass;
            lost += mass * (1.0 - cover) * (1.0 - cover);
        });
        Ok(if total > 0.0 { lost / total } else { 0.0 })
    }
}

/// Radial cutoff of the ladder: 1 on `[0, 5/4]`, 0 beyond `8/5`, raised
/// cosine in between.
fn eta(r: f64) -> f64 {
    const INNER: f64 = 1.25;
    const OUTER: f64 = 1.6;
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        let x = (r - INNER) / (OUTER - INNER);
        let c = (0.5 * std::f64::consts::PI * x).cos();
        c * c
    }
}

/// Exact reconstruction check: sum of all Wiener projections minus the field.
pub fn wiener_reconstruction_error(ladder: &WindowLadder, u: &Field, mu: f64) -> Result<f64> {
    let lat = ladder.lattice(mu)?;
    let hat = u.to_frequency();
    let mut acc = Field::zeros(hat.grid(), Representation::Frequency);
    let mut n = [0i64; MAX_DIM];
    for idx in 0..lat.len() {
        lat.point_of(idx, &mut n[..hat.grid().d()]);
        let piece = ladder.wiener_project(&hat, &n[..hat.grid().d()], mu)?;
        acc = acc.add(&piece)?;
    }
    let diff = acc.sub(&hat)?;
    Ok(diff.data().iter().map(|z| z.norm()).fold(0.0f64, f64::max))
}
