use crate::error::{Error, Result};

/// Numerical and model parameters shared by every solver stage.
///
/// `alpha` is always `2 + epsilon`; it is stored for convenience and kept in
/// sync by the constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub epsilon: f64,
    pub alpha: f64,
    /// Weight exponent of the 𝓕ₘ(c) norm.
    pub beta: f64,
    /// Smallness of the initial data in Φ(α).
    pub delta: f64,
    /// Rate `c` in exp(−c√m|k|).
    pub decay_c: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Substeps per unit time interval.
    pub substeps: usize,
    pub eps_div: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            alpha: 2.25,
            beta: 3.5,
            delta: 1e-3,
            decay_c: 1.0 / 3f64.sqrt(),
            fp_tol: 1e-13,
            fp_max_iter: 50,
            substeps: 8,
            eps_div: 1e-12,
        }
    }
}

impl SolverParams {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self.alpha = 2.0 + epsilon;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    /// Checks every parameter constraint, naming the violated inequality.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0 (got {})", self.epsilon));
        }
        if !(3.0 * self.epsilon < 1.0) {
            return bad(format!("3*epsilon must be < 1 (got epsilon = {})", self.epsilon));
        }
        if self.alpha != 2.0 + self.epsilon {
            return bad(format!("alpha must equal 2 + epsilon (got alpha = {})", self.alpha));
        }
        if !(self.beta > 3.0) {
            return bad(format!("beta must be > 3 (got {})", self.beta));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be > 0 (got {})", self.delta));
        }
        if !(self.decay_c > 0.0 && self.decay_c.is_finite()) {
            return bad(format!("decay_c must be > 0 (got {})", self.decay_c));
        }
        if !(self.fp_tol > 0.0) {
            return bad(format!("fp_tol must be > 0 (got {})", self.fp_tol));
        }
        if self.fp_max_iter == 0 {
            return bad("fp_max_iter must be >= 1".into());
        }
        if self.substeps == 0 {
            return bad("substeps must be >= 1".into());
        }
        if !(self.eps_div > 0.0) {
            return bad(format!("eps_div must be > 0 (got {})", self.eps_div));
        }
        Ok(())
    }
}
