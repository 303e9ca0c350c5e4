//! Two-level rate equation for the ground-state population,
//! `dp₀/dt = −(W₀₁ + W₁₀) p₀ + W₁₀`, with `W₀₁ = W₁₀ e^{−Δ₁₀/(k_B T/h)}`.

use super::{temperature_to_frequency, QuantumError};

/// Gap and relaxation rate as functions of `s`.
pub struct RateModel<'a> {
    /// `Δ₁₀(s)` in GHz.
    pub gap: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    /// `W₁₀(s)` in 1/ns.
    pub w10: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub temperature_mk: f64,
    pub t_qa_ns: f64,
}

impl RateModel<'_> {
    /// `W₀₁(s)`, fixed by detailed balance.
    pub fn w01(&self, s: f64) -> f64 {
        (self.w10)(s) * (-(self.gap)(s) / temperature_to_frequency(self.temperature_mk)).exp()
    }

    /// Equilibrium population `1 / (1 + e^{−Δ/(k_B T/h)})`.
    pub fn equilibrium(&self, s: f64) -> f64 {
        1.0 / (1.0 + (-(self.gap)(s) / temperature_to_frequency(self.temperature_mk)).exp())
    }
}

/// Phenomenological relaxation rate that is flat up to `s_star` and decays
/// as `w0 e^{−c (s − s*)}` afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticRate {
    pub w0: f64,
    pub c: f64,
    pub s_star: f64,
}

impl SyntheticRate {
    pub fn w10(&self, s: f64) -> f64 {
        if s <= self.s_star {
            self.w0
        } else {
            self.w0 * (-self.c * (s - self.s_star)).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub t_ns: Vec<f64>,
    pub p0: Vec<f64>,
}

impl RateCurve {
    pub fn final_p0(&self) -> f64 {
        *self.p0.last().expect("nonempty curve")
    }
}

/// Integrates the rate equation from `p₀(0) = 1` over `[0, T_QA]` in `steps`
/// steps. Each step is solved exactly with rates frozen at its midpoint, so
/// `p₀` stays in `[0, 1]` for any step size.
pub fn rate_evolve(model: &RateModel, steps: usize) -> Result<RateCurve, QuantumError> {
    if steps == 0 || !(model.t_qa_ns > 0.0) || !(model.temperature_mk > 0.0) {
        return Err(QuantumError::Invalid("need steps >= 1, T_QA > 0 and T > 0".into()));
    }
    let h = model.t_qa_ns / steps as f64;
    let mut p = 1.0;
    let mut curve = RateCurve { t_ns: vec![0.0], p0: vec![p] };
    for k in 0..steps {
        let s = (k as f64 + 0.5) / steps as f64;
        let w10 = (model.w10)(s);
        if !(w10 >= 0.0) || !w10.is_finite() {
            return Err(QuantumError::Invalid(format!("W10({s}) = {w10} is not a nonnegative rate")));
        }
        let total = w10 + model.w01(s);
        if total > 0.0 {
            let eq = w10 / total;
            p = eq + (p - eq) * (-total * h).exp();
        }
        curve.t_ns.push((k + 1) as f64 * h);
        curve.p0.push(p.clamp(0.0, 1.0));
    }
    Ok(curve)
}
