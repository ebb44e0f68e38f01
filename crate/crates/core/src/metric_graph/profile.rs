//! Positive coefficient profiles on a single edge.
//!
//! Every profile is evaluated in the local edge coordinate `s ∈ [0, l_e]`.
//! Power laws are written in a global coordinate `σ = offset + s`, which for
//! tree-built graphs is the height `y` of the strip.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Constant { c: f64 },
    /// `c · σ^gamma`
    Power { c: f64, gamma: f64 },
    /// Piecewise-linear interpolation of `ln f` between samples at local coordinates `s`.
    TabulatedLogLinear { s: Vec<f64>, log_values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(default)]
    pub offset: f64,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile { kind: ProfileKind::Constant { c }, offset: 0.0 }
    }

    pub fn power(c: f64, gamma: f64, offset: f64) -> Self {
        if gamma == 0.0 {
            return Profile::constant(c);
        }
        Profile { kind: ProfileKind::Power { c, gamma }, offset }
    }

    /// Log-linear profile through `(s_i, values_i)`; values must be positive.
    pub fn tabulated(s: Vec<f64>, values: &[f64]) -> Result<Self> {
        if s.len() != values.len() {
            return Err(Error::Shape { expected: s.len(), actual: values.len() });
        }
        if s.len() < 2 {
            return Err(Error::Parameter("tabulated profile needs at least two samples".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("tabulated sample positions must increase".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Parameter("tabulated profile values must be positive".into()));
        }
        let log_values = values.iter().map(|v| v.ln()).collect();
        Ok(Profile { kind: ProfileKind::TabulatedLogLinear { s, log_values }, offset: 0.0 })
    }

    pub fn is_symbolic(&self) -> bool {
        !matches!(self.kind, ProfileKind::TabulatedLogLinear { .. })
    }

    /// Checks strict positivity on `[0, length]`.
    pub fn validate(&self, length: f64) -> Result<()> {
        match &self.kind {
            ProfileKind::Constant { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::Parameter(format!("constant profile must be positive, got {c}")));
                }
            }
            ProfileKind::Power { c, gamma } => {
                if !(c.is_finite() && *c > 0.0 && gamma.is_finite()) {
                    return Err(Error::Parameter(format!("power profile needs c > 0, got c={c}, gamma={gamma}")));
                }
                if !(self.offset > 0.0 && (self.offset + length) > 0.0) {
                    return Err(Error::Parameter(format!(
                        "power profile global coordinate must stay positive on the edge (offset {})",
                        self.offset
                    )));
                }
            }
            ProfileKind::TabulatedLogLinear { s, log_values } => {
                if s.len() != log_values.len() || s.len() < 2 {
                    return Err(Error::Parameter("malformed tabulated profile".into()));
                }
                if s[0] > 0.0 || s[s.len() - 1] < length * (1.0 - 1e-12) {
                    return Err(Error::Parameter(format!(
                        "tabulated profile covers [{}, {}] but the edge is [0, {length}]",
                        s[0],
                        s[s.len() - 1]
                    )));
                }
                if log_values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter("tabulated profile has non-finite samples".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { c } => *c,
            ProfileKind::Power { c, gamma } => c * (self.offset + s).powf(*gamma),
            ProfileKind::TabulatedLogLinear { s: xs, log_values } => {
                let (i, t) = locate(xs, s);
                (log_values[i] + t * (log_values[i + 1] - log_values[i])).exp()
            }
        }
    }

    /// Derivative in `s` (one-sided at tabulation nodes, taken from the right).
    pub fn derivative(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { .. } => 0.0,
            ProfileKind::Power { c, gamma } => c * gamma * (self.offset + s).powf(gamma - 1.0),
            ProfileKind::TabulatedLogLinear { s: xs, log_values } => {
                let (i, _) = locate(xs, s);
                let slope = (log_values[i + 1] - log_values[i]) / (xs[i + 1] - xs[i]);
                slope * self.eval(s)
            }
        }
    }

    pub fn at_tail(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn at_head(&self, length: f64) -> f64 {
        self.eval(length)
    }

    /// Exact `∫_a^b f(s) ds`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        match &self.kind {
            ProfileKind::Constant { c } => c * (b - a),
            ProfileKind::Power { c, gamma } => {
                let (sa, sb) = (self.offset + a, self.offset + b);
                let g1 = gamma + 1.0;
                if g1.abs() < 1e-14 {
                    c * (sb / sa).ln()
                } else {
                    // sa^g1 * expm1(g1 ln(sb/sa)) / g1 keeps precision for short cells
                    c * sa.powf(g1) * (g1 * (sb / sa).ln()).exp_m1() / g1
                }
            }
            ProfileKind::TabulatedLogLinear { s: xs, log_values } => {
                let n = xs.len();
                let (first, last) = (xs[0], xs[n - 1]);
                // values are held constant outside the tabulated range
                let mut total = (first.min(b) - a).max(0.0) * log_values[0].exp()
                    + (b - last.max(a)).max(0.0) * log_values[n - 1].exp();
                for i in 0..n - 1 {
                    let lo = a.max(xs[i]);
                    let hi = b.min(xs[i + 1]);
                    if hi <= lo {
                        continue;
                    }
                    let k = (log_values[i + 1] - log_values[i]) / (xs[i + 1] - xs[i]);
                    let f_lo = (log_values[i] + k * (lo - xs[i])).exp();
                    let d = hi - lo;
                    total += if (k * d).abs() < 1e-14 { f_lo * d } else { f_lo * (k * d).exp_m1() / k };
                }
                total
            }
        }
    }

    /// `∫_a^b √f(s) ds`, the Riemannian length element when `f = φ`.
    pub fn sqrt_integral(&self, a: f64, b: f64) -> f64 {
        self.powf(0.5).integral(a, b)
    }

    pub fn scale(&self, factor: f64) -> Profile {
        let mut out = self.clone();
        match &mut out.kind {
            ProfileKind::Constant { c } | ProfileKind::Power { c, .. } => *c *= factor,
            ProfileKind::TabulatedLogLinear { log_values, .. } => {
                let l = factor.ln();
                log_values.iter_mut().for_each(|v| *v += l);
            }
        }
        out
    }

    pub fn powf(&self, e: f64) -> Profile {
        match &self.kind {
            ProfileKind::Constant { c } => Profile::constant(c.powf(e)),
            ProfileKind::Power { c, gamma } => Profile::power(c.powf(e), gamma * e, self.offset),
            ProfileKind::TabulatedLogLinear { s, log_values } => Profile {
                kind: ProfileKind::TabulatedLogLinear {
                    s: s.clone(),
                    log_values: log_values.iter().map(|v| v * e).collect(),
                },
                offset: self.offset,
            },
        }
    }

    /// Pointwise product, kept in closed form.
    pub fn mul(&self, other: &Profile) -> Result<Profile> {
        use ProfileKind::*;
        match (&self.kind, &other.kind) {
            (Constant { c }, _) => Ok(other.scale(*c)),
            (_, Constant { c }) => Ok(self.scale(*c)),
            (Power { c: c1, gamma: g1 }, Power { c: c2, gamma: g2 }) => {
                if (self.offset - other.offset).abs() > 1e-12 * self.offset.abs().max(1.0) {
                    return Err(Error::Parameter("power profiles with different offsets".into()));
                }
                Ok(Profile::power(c1 * c2, g1 + g2, self.offset))
            }
            (TabulatedLogLinear { s: s1, log_values: l1 }, TabulatedLogLinear { s: s2, log_values: l2 })
                if s1 == s2 =>
            {
                Ok(Profile {
                    kind: TabulatedLogLinear { s: s1.clone(), log_values: l1.iter().zip(l2).map(|(a, b)| a + b).collect() },
                    offset: self.offset,
                })
            }
            _ => Err(Error::Parameter(
                "product of these profile kinds has no closed form; tabulate both on the same nodes".into(),
            )),
        }
    }
}

fn locate(xs: &[f64], s: f64) -> (usize, f64) {
    let n = xs.len();
    let i = xs.partition_point(|x| *x <= s).saturating_sub(1).min(n - 2);
    let t = ((s - xs[i]) / (xs[i + 1] - xs[i])).clamp(0.0, 1.0);
    (i, t)
}

/// Reduced per-edge data: geometry `phi`, measure `psi`, and the derived
/// energy density `a = ψ φ^{(n-1)/2}` and mass density `m = ψ φ^{(n+1)/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoefficients {
    pub a: Profile,
    pub m: Profile,
    pub phi: Profile,
    pub psi: Profile,
    pub n: u8,
}

impl EdgeCoefficients {
    pub fn from_phi_psi(phi: Profile, psi: Profile, n: u8) -> Result<Self> {
        if n > 1 {
            return Err(Error::Parameter(format!("fiber dimension must be 0 or 1, got {n}")));
        }
        let a = psi.mul(&phi.powf((n as f64 - 1.0) / 2.0))?;
        let m = psi.mul(&phi.powf((n as f64 + 1.0) / 2.0))?;
        Ok(EdgeCoefficients { a, m, phi, psi, n })
    }

    /// Inverse reduction: recovers `φ = m/a` and `ψ = a φ^{(1-n)/2}`.
    pub fn from_a_m(a: Profile, m: Profile, n: u8) -> Result<Self> {
        if n > 1 {
            return Err(Error::Parameter(format!("fiber dimension must be 0 or 1, got {n}")));
        }
        let phi = m.mul(&a.powf(-1.0))?;
        let psi = a.mul(&phi.powf((1.0 - n as f64) / 2.0))?;
        Ok(EdgeCoefficients { a, m, phi, psi, n })
    }

    /// Positivity of all four profiles and `a·φ = m` at sample points.
    pub fn validate(&self, length: f64) -> Result<()> {
        for p in [&self.a, &self.m, &self.phi, &self.psi] {
            p.validate(length)?;
        }
        for i in 0..=8 {
            let s = length * i as f64 / 8.0;
            let lhs = self.a.eval(s) * self.phi.eval(s);
            let rhs = self.m.eval(s);
            if (lhs - rhs).abs() > 1e-12 * rhs.abs() {
                return Err(Error::Parameter(format!("a·phi = {lhs} but m = {rhs} at s = {s}")));
            }
        }
        Ok(())
    }
}
