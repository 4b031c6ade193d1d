//! Scalar parameters and schedule functions of the nibble.
//!
//! All logarithms are natural. Every schedule value is evaluated in log
//! space; the `ln_*` accessors stay finite far beyond the range where the
//! plain values underflow `f64`.
//!
//! | symbol        | accessor          |
//! |---------------|-------------------|
//! | `S_r(0)`      | [`NibbleSchedule::s0`] |
//! | `D_r(0)`      | [`NibbleSchedule::d0`] |
//! | `p_r`         | [`NibbleSchedule::p_r`] |
//! | `S_r^-(t)`    | [`NibbleSchedule::s_minus`] |
//! | `S_r^+(t)`    | [`NibbleSchedule::s_plus`] |
//! | `D_r(t)`      | [`NibbleSchedule::d`] |
//! | `p S_r(0)`    | [`NibbleSchedule::m_r`] (rounded down) |

use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("eps = {0} must lie in (0, 1)")]
    InvalidEps(f64),
    #[error("n = {0} is too small: need n >= 3 so that p = 1/ln^3 n < 1")]
    NTooSmall(usize),
    #[error("p = {0} must lie in (0, 1)")]
    InvalidProbability(f64),
    #[error("r* and t* must be at least 1 (got r* = {r_star}, t* = {t_star})")]
    ZeroRounds { r_star: u64, t_star: u64 },
    #[error("floor(p n) = floor({p} * {n}) = 0: the first round would build no transversals")]
    NoTransversals { p: f64, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Theory,
    Practical,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleMode::Theory => "theory",
            ScheduleMode::Practical => "practical",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NibbleSchedule {
    pub eps: f64,
    pub n: usize,
    pub p: f64,
    pub delta: f64,
    pub r_star: u64,
    pub t_star: u64,
    pub mode: ScheduleMode,
}

/// `ln(1 + x)`, with `-inf` once `x <= -1`.
#[inline]
fn ln1p(x: f64) -> f64 {
    if x <= -1.0 {
        f64::NEG_INFINITY
    } else {
        x.ln_1p()
    }
}

/// `count * ln_factor`, with zero repetitions contributing nothing even when
/// the factor is `-inf`.
#[inline]
fn times(count: u64, ln_factor: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_factor
    }
}

fn check_eps(eps: f64) -> Result<(), ScheduleError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(ScheduleError::InvalidEps(eps))
    }
}

/// Theory-mode schedule: `p = 1/ln^3 n`, `delta = eps^5`,
/// `r* = t* = ceil(30 / (eps p))`.
pub fn make_schedule(eps: f64, n: usize) -> Result<NibbleSchedule, ScheduleError> {
    check_eps(eps)?;
    if n < 3 {
        return Err(ScheduleError::NTooSmall(n));
    }
    let p = (n as f64).ln().powi(3).recip();
    let rounds = (30.0 / (eps * p)).ceil() as u64;
    Ok(NibbleSchedule { eps, n, p, delta: eps.powi(5), r_star: rounds, t_star: rounds, mode: ScheduleMode::Theory })
}

/// Desk-scale schedule with caller-chosen `p`, `r*`, `t*` and the same
/// formula family.
pub fn make_practical_schedule(
    eps: f64,
    n: usize,
    p: f64,
    r_star: u64,
    t_star: u64,
) -> Result<NibbleSchedule, ScheduleError> {
    check_eps(eps)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(ScheduleError::InvalidProbability(p));
    }
    if r_star == 0 || t_star == 0 {
        return Err(ScheduleError::ZeroRounds { r_star, t_star });
    }
    let sched = NibbleSchedule { eps, n, p, delta: eps.powi(5), r_star, t_star, mode: ScheduleMode::Practical };
    if sched.m_r(1) == 0 {
        return Err(ScheduleError::NoTransversals { p, n });
    }
    Ok(sched)
}

impl NibbleSchedule {
    #[inline]
    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    pub fn ln_s0(&self, r: u64) -> f64 {
        times(r.saturating_sub(1), ln1p(-self.p)) + self.ln_n()
    }

    pub fn ln_d0(&self, r: u64) -> f64 {
        let eps = self.eps;
        ln1p(-eps) + times(r.saturating_sub(1), ln1p(-self.p + eps.powi(3) * self.p)) + self.ln_n()
    }

    /// `ln p_r = ln D_r(0) + ln p - ln S_r(0)`.
    pub fn ln_p_r(&self, r: u64) -> f64 {
        let eps = self.eps;
        let growth = ln1p(-self.p + eps.powi(3) * self.p) - ln1p(-self.p);
        ln1p(-eps) + times(r.saturating_sub(1), growth) + self.p.ln()
    }

    pub fn p_r(&self, r: u64) -> f64 {
        self.ln_p_r(r).exp()
    }

    pub fn ln_s_minus(&self, r: u64, t: u64) -> f64 {
        times(t, ln1p(-self.p_r(r) - self.p * self.p)) + self.ln_s0(r)
    }

    pub fn ln_s_plus(&self, r: u64, t: u64) -> f64 {
        times(t, ln1p(-self.p_r(r) + self.p * self.p)) + self.ln_s0(r)
    }

    pub fn ln_d(&self, r: u64, t: u64) -> f64 {
        times(t, ln1p(-self.p + self.eps * self.p / 2.0)) + self.ln_d0(r)
    }

    pub fn s0(&self, r: u64) -> f64 {
        self.ln_s0(r).exp()
    }

    pub fn d0(&self, r: u64) -> f64 {
        self.ln_d0(r).exp()
    }

    pub fn s_minus(&self, r: u64, t: u64) -> f64 {
        self.ln_s_minus(r, t).exp()
    }

    pub fn s_plus(&self, r: u64, t: u64) -> f64 {
        self.ln_s_plus(r, t).exp()
    }

    pub fn d(&self, r: u64, t: u64) -> f64 {
        self.ln_d(r, t).exp()
    }

    /// Number of transversals grown in round `r`: `floor(p S_r(0))`.
    pub fn m_r(&self, r: u64) -> usize {
        let x = (self.p.ln() + self.ln_s0(r)).exp();
        // absorb representation error such as 0.05 * 100 = 4.999...
        (x * (1.0 + 1e-12)).floor() as usize
    }

    /// `sum_{r=1..r*} p S_r(0)` accumulated term by term (compensated).
    pub fn transversal_mass(&self) -> f64 {
        let ratio = 1.0 - self.p;
        let mut term = self.p * self.n as f64;
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for _ in 0..self.r_star {
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            term *= ratio;
        }
        sum + comp
    }

    /// Closed form `n (1 - (1 - p)^{r*})` of [`Self::transversal_mass`].
    pub fn transversal_mass_closed_form(&self) -> f64 {
        -(self.n as f64) * (self.r_star as f64 * ln1p(-self.p)).exp_m1()
    }
}

/// Which monitored properties force an iteration to be redrawn. Properties
/// not enforced are still measured and reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnforcedMonitors {
    /// C1: `S_r^-(t) <= |V_i^l(t)| <= S_r^+(t)`.
    pub size_band: bool,
    /// Per-iteration concentration band of a single candidate-set size.
    pub shrink_band: bool,
    /// C2: degree into `V^l(t)` at most `D_r(t)`.
    pub degree: bool,
    /// C3: neighbors inside the partial transversals.
    pub transversal_neighbors: bool,
    /// C4: neighbors summed over the remaining candidate sets.
    pub remaining_neighbors: bool,
    /// Crowding of the step-1 selections.
    pub crowding: bool,
}

impl EnforcedMonitors {
    pub const ALL: Self = Self {
        size_band: true,
        shrink_band: true,
        degree: true,
        transversal_neighbors: true,
        remaining_neighbors: true,
        crowding: true,
    };
    pub const NONE: Self = Self {
        size_band: false,
        shrink_band: false,
        degree: false,
        transversal_neighbors: false,
        remaining_neighbors: false,
        crowding: false,
    };
}

/// Thresholds and sampling knobs for the per-iteration monitors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// C3 only applies to vertices with at least this degree in `G_r`.
    pub deg_threshold_c3: f64,
    /// Degree floor for the step-1 neighbor-count lower bound.
    pub deg_threshold_small: f64,
    /// Bound on neighbors among, and memberships in, the step-1 selections.
    pub crowd_bound: f64,
    /// `ln n`, the multiplier of the per-iteration size slack.
    pub slack_log: f64,
    pub retry_budget: usize,
    /// Fraction of candidate sets that must sit inside the shrink band.
    pub statistical_quantile: f64,
    /// Vertices checked per iteration for C2-C4; `None` checks every vertex.
    pub sample_size: Option<usize>,
    pub enforce: EnforcedMonitors,
    /// Replaces `D_r(t)` in the C2 check when set.
    pub degree_bound_override: Option<f64>,
}

impl MonitorConfig {
    /// Thresholds as powers of `ln n`, all monitors enforced.
    pub fn theory(n: usize) -> Self {
        let l = (n.max(2) as f64).ln();
        Self {
            deg_threshold_c3: l.powi(15),
            deg_threshold_small: l.powi(5),
            crowd_bound: l.powi(2),
            slack_log: l,
            retry_budget: 20,
            statistical_quantile: 0.99,
            sample_size: Some(4096),
            enforce: EnforcedMonitors::ALL,
            degree_bound_override: None,
        }
    }

    /// Desk-scale thresholds. Monitors are informational: at small `n` the
    /// asymptotic bands are routinely missed without harming validity.
    pub fn practical(n: usize) -> Self {
        let l = (n.max(2) as f64).ln();
        Self {
            deg_threshold_c3: l.powi(2),
            deg_threshold_small: l,
            enforce: EnforcedMonitors::NONE,
            ..Self::theory(n)
        }
    }

    pub fn for_schedule(sched: &NibbleSchedule) -> Self {
        match sched.mode {
            ScheduleMode::Theory => Self::theory(sched.n),
            ScheduleMode::Practical => Self::practical(sched.n),
        }
    }

    /// Allowed deviation of `|V_i^l(t+1)|` from `(1 - p_r) s`.
    pub fn size_slack(&self, p_r: f64, s: f64) -> f64 {
        self.slack_log * (p_r * s).sqrt()
    }
}

/// A concrete inequality with both sides evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub(crate) fn le(description: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { description: description.into(), lhs, rhs, holds: lhs <= rhs }
    }

    /// `lhs <= rhs` up to a relative rounding allowance, for bounds that hold
    /// with equality in exact arithmetic.
    pub(crate) fn le_rel(description: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self { description: description.into(), lhs, rhs, holds: lhs <= rhs + tol * rhs.abs() }
    }

    pub(crate) fn lt(description: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { description: description.into(), lhs, rhs, holds: lhs < rhs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub clause: String,
    /// `None` for asymptotic clauses, which are reported as values only.
    pub passed: Option<bool>,
    pub checks: Vec<InequalityCheck>,
    pub values: Vec<(String, f64)>,
}

/// Numeric evaluation of the five schedule inequalities for given `(eps, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationReport {
    pub schedule: NibbleSchedule,
    pub clauses: Vec<ClauseReport>,
}

impl ObservationReport {
    pub fn clause(&self, name: &str) -> Option<&ClauseReport> {
        self.clauses.iter().find(|c| c.clause == name)
    }

    pub fn render(&self) -> String {
        let s = &self.schedule;
        let mut out = format!(
            "schedule: eps={} n={} p={:.6e} delta={:.3e} r*={} t*={} mode={}\n",
            s.eps, s.n, s.p, s.delta, s.r_star, s.t_star, s.mode
        );
        for c in &self.clauses {
            let verdict = match c.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            };
            out.push_str(&format!("clause ({}): {verdict}\n", c.clause));
            for chk in &c.checks {
                out.push_str(&format!(
                    "    {} : {:.9e} vs {:.9e} [{}]\n",
                    chk.description,
                    chk.lhs,
                    chk.rhs,
                    if chk.holds { "ok" } else { "violated" }
                ));
            }
            for (name, v) in &c.values {
                out.push_str(&format!("    {name} = {v:.9e}\n"));
            }
        }
        out
    }
}

/// Evaluates the clauses at the monotone endpoints `r = 1` and `r = r*`.
pub fn validate_observation(sched: &NibbleSchedule) -> ObservationReport {
    let (eps, p) = (sched.eps, sched.p);
    let (t_star, r_star) = (sched.t_star, sched.r_star);
    let mut clauses = Vec::new();

    // (i) (1 - 3p)^t stays bounded away from zero
    let ln_i = t_star as f64 * ln1p(-3.0 * p);
    clauses.push(ClauseReport {
        clause: "i".into(),
        passed: None,
        checks: vec![],
        values: vec![
            ("ln (1-3p)^{t*}".into(), ln_i),
            ("ln e^{-6 p t*}".into(), -6.0 * p * t_star as f64),
        ],
    });

    // (ii) (1-eps) p <= p_r <= (1 - 2 eps/3) p; p_r increases with r
    let ratio_end = (sched.ln_p_r(r_star) - p.ln()).exp();
    let ratio_start = (sched.ln_p_r(1) - p.ln()).exp();
    let chain = (1.0 - eps) * (60.0 * eps * eps).exp();
    let upper = 1.0 - 2.0 * eps / 3.0;
    let ii_checks = vec![
        InequalityCheck::le_rel("(1-eps) <= p_1/p", 1.0 - eps, ratio_start, 1e-12),
        InequalityCheck::le("p_{r*}/p <= 1 - 2eps/3", ratio_end, upper),
        InequalityCheck::le("(1-eps) e^{60 eps^2} <= 1 - 2eps/3", chain, upper),
    ];
    clauses.push(ClauseReport {
        clause: "ii".into(),
        passed: Some(ii_checks.iter().all(|c| c.holds)),
        checks: ii_checks,
        values: vec![("p_1".into(), sched.p_r(1)), ("p_{r*}".into(), sched.p_r(r_star))],
    });

    // (iii) D_r(t)/S_r^-(t) <= D_r(0)/S_r(0) <= 1: the per-step factor
    // (1-p+eps p/2)/(1-p_r-p^2) is at most 1 iff p_r + p^2 <= p - eps p/2
    let iii_checks = vec![
        InequalityCheck::le("p_{r*} + p^2 <= p (1 - eps/2)", sched.p_r(r_star) + p * p, p * (1.0 - eps / 2.0)),
        InequalityCheck::le("D_{r*}(0)/S_{r*}(0) <= 1", ratio_end, 1.0),
    ];
    clauses.push(ClauseReport {
        clause: "iii".into(),
        passed: Some(iii_checks.iter().all(|c| c.holds)),
        checks: iii_checks,
        values: vec![],
    });

    // (iv) n >= S^-_r(t) >= D_r(t) = Omega(n)
    clauses.push(ClauseReport {
        clause: "iv".into(),
        passed: None,
        checks: vec![],
        values: vec![
            ("ln S^-_{r*}(t*) - ln n".into(), sched.ln_s_minus(r_star, t_star) - sched.ln_n()),
            ("ln D_{r*}(t*) - ln n".into(), sched.ln_d(r_star, t_star) - sched.ln_n()),
        ],
    });

    // (v) D_r(t*) / (S^-_r(t*) - p S_r(0)) < 1/(2e), largest at r = r*
    let v_ratio = |r: u64| -> f64 {
        let ln_num = sched.ln_d(r, t_star);
        let ln_sm = sched.ln_s_minus(r, t_star);
        let ln_ps = p.ln() + sched.ln_s0(r);
        if ln_sm <= ln_ps {
            f64::INFINITY
        } else {
            // S^- - pS0 = S^- (1 - e^{ln pS0 - ln S^-})
            let ln_den = ln_sm + ln1p(-(ln_ps - ln_sm).exp());
            (ln_num - ln_den).exp()
        }
    };
    let v_checks = vec![
        InequalityCheck::lt("r = 1", v_ratio(1), 1.0 / (2.0 * E)),
        InequalityCheck::lt("r = r*", v_ratio(r_star), 1.0 / (2.0 * E)),
    ];
    clauses.push(ClauseReport {
        clause: "v".into(),
        passed: Some(v_checks.iter().all(|c| c.holds)),
        checks: v_checks,
        values: vec![],
    });

    ObservationReport { schedule: *sched, clauses }
}
