//! p-variation of vector-valued step functions, atomic decompositions with
//! exact restriction contraction, and a discrete dyadically weighted
//! 2-variation norm of sampled trajectories.
//!
//! A step function lives on `[t₀, t_K)` with strictly increasing knots; the
//! last knot may be `+∞`. `vanishes_at_infinity` appends a terminal zero to
//! the value sequence when (and only when) the domain is unbounded, so a
//! flagged constant `c` on `[0, ∞)` has `V^p = ‖c‖` while the same function
//! on a finite window has `V^p = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{linear_propagate, Trajectory};
use crate::window::WindowLadder;

/// Values a step function can take: a normed vector space over the complex
/// scalars.
pub trait Normed: Clone {
    fn norm(&self) -> f64;
    fn sub(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: Complex64) -> Self;

    /// The zero element, synthesized from any value.
    fn zero_like(&self) -> Self {
        self.sub(self)
    }
}

impl Normed for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
}

impl Normed for Vec<Complex64> {
    fn norm(&self) -> f64 {
        self.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        self.iter().zip(other).map(|(a, b)| a - b).collect()
    }
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
    fn scale(&self, c: Complex64) -> Self {
        self.iter().map(|z| z * c).collect()
    }
}

/// Piecewise-constant function: `values[j]` on `[knots[j], knots[j+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<V> {
    knots: Vec<f64>,
    values: Vec<V>,
    vanishes_at_infinity: bool,
}

/// Largest knot count accepted by the quadratic-time variation solver.
pub const MAX_VP_KNOTS: usize = 10_000;

/// Largest knot count accepted by the exhaustive reference solver.
pub const MAX_BRUTE_KNOTS: usize = 14;

impl<V: Normed> StepFunction<V> {
    pub fn new(knots: Vec<f64>, values: Vec<V>, vanishes_at_infinity: bool) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::BadStepFunction("need at least two knots".into()));
        }
        if values.len() + 1 != knots.len() {
            return Err(Error::BadStepFunction(format!(
                "{} knots require {} values, got {}",
                knots.len(),
                knots.len() - 1,
                values.len()
            )));
        }
        for (i, &t) in knots.iter().enumerate() {
            if t.is_nan() {
                return Err(Error::BadStepFunction("NaN knot".into()));
            }
            if t.is_infinite() && (i + 1 != knots.len() || t < 0.0) {
                return Err(Error::BadStepFunction(
                    "only the final knot may be +∞".into(),
                ));
            }
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadStepFunction(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(StepFunction {
            knots,
            values,
            vanishes_at_infinity,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn vanishes_at_infinity(&self) -> bool {
        self.vanishes_at_infinity
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    fn unbounded(&self) -> bool {
        self.knots.last().unwrap().is_infinite()
    }

    /// Value at time `t`; `None` outside `[t₀, t_K)`.
    pub fn value_at(&self, t: f64) -> Option<&V> {
        let (a, b) = self.domain();
        if !(a <= t && t < b) {
            return None;
        }
        let j = match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(exact) => exact,
            Err(ins) => ins - 1,
        };
        self.values.get(j.min(self.values.len() - 1))
    }

    /// The sequence the variation solvers run over: the piece values, plus a
    /// terminal zero when the function is flagged as vanishing on an
    /// unbounded domain.
    fn variation_sequence(&self) -> Vec<V> {
        let mut seq = self.values.clone();
        if self.vanishes_at_infinity && self.unbounded() {
            seq.push(self.values[0].zero_like());
        }
        seq
    }

    /// `V^p` norm: the supremum over increasing index subsequences of the
    /// `ℓ^p` sum of jump sizes.
    pub fn vp_norm(&self, p: f64) -> Result<f64> {
        if self.knots.len() > MAX_VP_KNOTS {
            return Err(Error::BadStepFunction(format!(
                "{} knots exceeds the {MAX_VP_KNOTS}-knot limit",
                self.knots.len()
            )));
        }
        vp_of_sequence(&self.variation_sequence(), p)
    }

    /// Exhaustive reference implementation of [`StepFunction::vp_norm`] by
    /// enumerating every subsequence. Exponential; capped at
    /// [`MAX_BRUTE_KNOTS`] knots.
    pub fn vp_bruteforce(&self, p: f64) -> Result<f64> {
        if self.knots.len() > MAX_BRUTE_KNOTS {
            return Err(Error::BadStepFunction(format!(
                "{} knots exceeds the {MAX_BRUTE_KNOTS}-knot brute-force limit",
                self.knots.len()
            )));
        }
        check_variation_exponent(p)?;
        let seq = self.variation_sequence();
        let m = seq.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1u32 << m) {
            if mask.count_ones() < 2 {
                continue;
            }
            let mut sum = 0.0;
            let mut prev: Option<usize> = None;
            for j in 0..m {
                if mask & (1 << j) == 0 {
                    continue;
                }
                if let Some(i) = prev {
                    sum += seq[j].sub(&seq[i]).norm().powf(p);
                }
                prev = Some(j);
            }
            best = best.max(sum);
        }
        Ok(best.powf(1.0 / p))
    }

    /// `(Σ_j ‖φ_j‖^p)^{1/p}` over the variation sequence. Bounds the
    /// variation: `V^p ≤ 2 ×` this mass, by the triangle inequality.
    pub fn value_mass(&self, p: f64) -> Result<f64> {
        check_variation_exponent(p)?;
        Ok(self
            .variation_sequence()
            .iter()
            .map(|v| v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p))
    }

    /// Restriction to `[a, b)` with `t₀ ≤ a < b ≤ t_K`. The restricted value
    /// sequence is a contiguous subsequence of the original, so every
    /// variation norm can only shrink.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let (t0, tk) = self.domain();
        if !(t0 <= a && a < b && b <= tk) {
            return Err(Error::BadStepFunction(format!(
                "window [{a}, {b}) not inside [{t0}, {tk})"
            )));
        }
        let mut knots = vec![a];
        let mut values = Vec::new();
        for j in 0..self.values.len() {
            let (lo, hi) = (self.knots[j], self.knots[j + 1]);
            if hi <= a || lo >= b {
                continue;
            }
            values.push(self.values[j].clone());
            knots.push(hi.min(b));
        }
        *knots.last_mut().unwrap() = b;
        StepFunction::new(knots, values, self.vanishes_at_infinity && b.is_infinite())
    }

    /// Resampling on a coarser knot set `P ⊂ [t₀, t_K)`: the new value on
    /// `[τ_i, τ_{i+1})` is the old value at `τ_i`. The new value sequence is
    /// a subsequence of the old one, so variation norms contract.
    pub fn coarsen(&self, new_knots: &[f64]) -> Result<Self> {
        let (t0, tk) = self.domain();
        if new_knots.is_empty() {
            return Err(Error::BadStepFunction("empty coarsening knot set".into()));
        }
        if new_knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadStepFunction(
                "coarsening knots must be strictly increasing".into(),
            ));
        }
        if !new_knots.iter().all(|&t| t0 <= t && t < tk) {
            return Err(Error::BadStepFunction(format!(
                "coarsening knots must lie inside [{t0}, {tk})"
            )));
        }
        let mut knots: Vec<f64> = new_knots.to_vec();
        knots.push(tk);
        let values = new_knots
            .iter()
            .map(|&t| self.value_at(t).expect("validated above").clone())
            .collect();
        StepFunction::new(knots, values, self.vanishes_at_infinity)
    }
}

fn check_variation_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::BadNormParameter(format!(
            "variation exponent p = {p} must be finite and ≥ 1"
        )));
    }
    Ok(())
}

/// Quadratic-time dynamic program for the `V^p` norm of a value sequence:
/// `best[j] = max(0, max_{i<j} best[i] + ‖v_j - v_i‖^p)`, answer
/// `max_j best[j]^{1/p}`.
fn vp_of_sequence<V: Normed>(seq: &[V], p: f64) -> Result<f64> {
    check_variation_exponent(p)?;
    if seq.len() < 2 {
        return Ok(0.0);
    }
    let mut best = vec![0.0f64; seq.len()];
    let mut answer = 0.0f64;
    for j in 1..seq.len() {
        for i in 0..j {
            let cand = best[i] + seq[j].sub(&seq[i]).norm().powf(p);
            if cand > best[j] {
                best[j] = cand;
            }
        }
        answer = answer.max(best[j]);
    }
    Ok(answer.powf(1.0 / p))
}

/// Weighted sum of normalized step-function atoms: represents
/// `f = Σ_k λ_k a_k` where each atom's value sequence has unit `ℓ^p` mass.
/// `Σ_k |λ_k|` is then an upper bound for `V^p(f)/2`.
#[derive(Clone, Debug)]
pub struct AtomicRep<V> {
    p: f64,
    weights: Vec<Complex64>,
    atoms: Vec<StepFunction<V>>,
}

impl<V: Normed> AtomicRep<V> {
    pub fn new(p: f64, weights: Vec<Complex64>, atoms: Vec<StepFunction<V>>) -> Result<Self> {
        check_variation_exponent(p)?;
        if weights.len() != atoms.len() {
            return Err(Error::BadAtomicRep(format!(
                "{} weights for {} atoms",
                weights.len(),
                atoms.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::BadAtomicRep("no atoms".into()));
        }
        for (k, atom) in atoms.iter().enumerate() {
            let mass = atom.value_mass(p)?;
            if (mass - 1.0).abs() > 1e-12 {
                return Err(Error::BadAtomicRep(format!(
                    "atom {k} has ℓ^{p} mass {mass}, expected 1"
                )));
            }
        }
        Ok(AtomicRep { p, weights, atoms })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn atoms(&self) -> &[StepFunction<V>] {
        &self.atoms
    }

    /// `Σ_k |λ_k|`, the atomic size of the representation.
    pub fn weight_l1(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    /// Restriction to `[a, b)`. Each atom is clipped and renormalized; its
    /// weight picks up the factor `(Σ_{kept j} ‖φ_j‖^p)^{1/p} ≤ 1`, so the
    /// total atomic size never grows. Atoms with no mass in the window are
    /// dropped; `Err` if nothing remains.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let mut weights = Vec::new();
        let mut atoms = Vec::new();
        for (w, atom) in self.weights.iter().zip(&self.atoms) {
            let (t0, tk) = atom.domain();
            let (ca, cb) = (a.max(t0), b.min(tk));
            if !(ca < cb) {
                continue;
            }
            let clipped = atom.restrict(ca, cb)?;
            let mass = clipped.value_mass(self.p)?;
            if mass == 0.0 {
                continue;
            }
            let renorm = StepFunction::new(
                clipped.knots.clone(),
                clipped
                    .values
                    .iter()
                    .map(|v| v.scale(Complex64::new(1.0 / mass, 0.0)))
                    .collect(),
                clipped.vanishes_at_infinity,
            )?;
            weights.push(w * mass);
            atoms.push(renorm);
        }
        if atoms.is_empty() {
            return Err(Error::BadAtomicRep(format!(
                "no atom mass inside [{a}, {b})"
            )));
        }
        AtomicRep::new(self.p, weights, atoms)
    }

    /// The represented step function, on the union of all atom knots. Atoms
    /// contribute zero outside their own domains.
    pub fn evaluate(&self) -> Result<StepFunction<V>> {
        let mut knots: Vec<f64> = self.atoms.iter().flat_map(|a| a.knots.clone()).collect();
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();
        let zero = self.atoms[0].values[0].zero_like();
        let mut values = Vec::with_capacity(knots.len() - 1);
        for &t in &knots[..knots.len() - 1] {
            let mut acc = zero.clone();
            for (w, atom) in self.weights.iter().zip(&self.atoms) {
                if let Some(v) = atom.value_at(t) {
                    acc = acc.add(&v.scale(*w));
                }
            }
            values.push(acc);
        }
        let unbounded_ok = self
            .atoms
            .iter()
            .filter(|a| a.unbounded())
            .all(|a| a.vanishes_at_infinity);
        let flag = knots.last().unwrap().is_infinite() && unbounded_ok;
        StepFunction::new(knots, values, flag)
    }
}

/// Discrete dyadically weighted 2-variation of a sampled trajectory:
/// `(Σ_N N^{2s} V²(t ↦ S(-t) P_N u(t))²)^{1/2}` with the state treated as
/// zero before the first sample. For free evolution the twisted samples are
/// constant, so the norm collapses to `(Σ_N N^{2s} ‖P_N u₀‖²)^{1/2}`.
pub fn discrete_ys_norm(traj: &Trajectory, ladder: &WindowLadder, s: f64) -> Result<f64> {
    if traj.fields.is_empty() {
        return Err(Error::EmptyInput("trajectory has no samples"));
    }
    let grid = traj.fields[0].grid();
    let scale = grid.volume().sqrt();
    let mut acc = 0.0f64;
    for block in ladder.lp_blocks() {
        let mut seq: Vec<Vec<Complex64>> = Vec::with_capacity(traj.fields.len() + 1);
        seq.push(vec![Complex64::new(0.0, 0.0); grid.total_points()]);
        for (t, u) in traj.times.iter().zip(&traj.fields) {
            let twisted = linear_propagate(&ladder.lp_project(u, block)?, -t);
            seq.push(twisted.data().iter().map(|z| z * scale).collect::<Vec<_>>());
        }
        let v2 = vp_of_sequence(&seq, 2.0)?;
        acc += (block as f64).powf(2.0 * s) * v2 * v2;
    }
    Ok(acc.sqrt())
}

impl StepFunction<Complex64> {
    /// JSON form: `{"knots": [0.0, 1.5, "inf"], "values": [[re, im], …],
    /// "vanishes_at_infinity": bool}`. The final knot may be the string
    /// `"inf"`.
    pub fn to_json(&self) -> serde_json::Value {
        let knots: Vec<serde_json::Value> = self
            .knots
            .iter()
            .map(|&t| {
                if t.is_infinite() {
                    serde_json::Value::String("inf".into())
                } else {
                    serde_json::json!(t)
                }
            })
            .collect();
        let values: Vec<serde_json::Value> = self
            .values
            .iter()
            .map(|z| serde_json::json!([z.re, z.im]))
            .collect();
        serde_json::json!({
            "knots": knots,
            "values": values,
            "vanishes_at_infinity": self.vanishes_at_infinity,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |msg: &str| Error::BadStepFunction(msg.to_string());
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        let knots = obj
            .get("knots")
            .and_then(|k| k.as_array())
            .ok_or_else(|| bad("missing \"knots\" array"))?
            .iter()
            .map(|k| match k {
                serde_json::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                serde_json::Value::Number(n) => {
                    n.as_f64().ok_or_else(|| bad("knot out of f64 range"))
                }
                _ => Err(bad("knots must be numbers or \"inf\"")),
            })
            .collect::<Result<Vec<f64>>>()?;
        let values = obj
            .get("values")
            .and_then(|k| k.as_array())
            .ok_or_else(|| bad("missing \"values\" array"))?
            .iter()
            .map(|pair| {
                let arr = pair
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| bad("each value must be [re, im]"))?;
                let re = arr[0].as_f64().ok_or_else(|| bad("non-numeric value"))?;
                let im = arr[1].as_f64().ok_or_else(|| bad("non-numeric value"))?;
                Ok(Complex64::new(re, im))
            })
            .collect::<Result<Vec<Complex64>>>()?;
        let flag = obj
            .get("vanishes_at_infinity")
            .and_then(|f| f.as_bool())
            .unwrap_or(false);
        StepFunction::new(knots, values, flag)
    }
}
