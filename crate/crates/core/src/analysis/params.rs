use serde::Serialize;

/// Real interval with open or closed ends. Empty when no point satisfies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        if self.lo_closed && self.hi_closed {
            !(self.lo <= self.hi)
        } else {
            !(self.lo < self.hi)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Intersection with `[lo, hi]`-style bounds taken from `other`.
    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    /// `n` points strictly between the endpoints, evenly spaced.
    pub fn interior_points(&self, n: usize) -> Vec<f64> {
        if self.is_empty() || self.lo >= self.hi {
            return Vec::new();
        }
        (0..n)
            .map(|k| self.lo + (self.hi - self.lo) * (k as f64 + 1.0) / (n as f64 + 1.0))
            .collect()
    }
}

/// `0 ≤ ε < min(2s − 1/2, 1/2)`.
pub fn epsilon_window(s: f64) -> Interval {
    Interval::closed_open(0.0, (2.0 * s - 0.5).min(0.5))
}

/// `3/4 − ε/2 < θ ≤ s + 1/2 − ε` and `θ < 1 − ε`.
pub fn theta_window(s: f64, eps: f64) -> Interval {
    let lower = Interval::open(0.75 - 0.5 * eps, f64::INFINITY);
    let a = Interval::open_closed(f64::NEG_INFINITY, s + 0.5 - eps);
    let b = Interval::open(f64::NEG_INFINITY, 1.0 - eps);
    lower.intersect(&a).intersect(&b)
}

/// Exponent windows for the `A₀` norm `‖A₀‖_{L^{p̃}_tL^∞_x} + ‖D^sA₀‖_{L^p_tL^q_x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct A0Exponents {
    /// `max((1−2s)/3, s/2) < 1/q < 2s/3`.
    pub inv_q: Interval,
    /// `1 − 2s < 1/p̃ < 1/2`.
    pub inv_p_tilde: Interval,
}

impl A0Exponents {
    pub fn new(s: f64) -> Self {
        Self {
            inv_q: Interval::open(((1.0 - 2.0 * s) / 3.0).max(0.5 * s), 2.0 * s / 3.0),
            inv_p_tilde: Interval::open(1.0 - 2.0 * s, 0.5),
        }
    }

    /// `1/p` from `2/p = 1 − 1/q`.
    pub fn inv_p(inv_q: f64) -> f64 {
        0.5 * (1.0 - inv_q)
    }

    pub fn is_empty(&self) -> bool {
        self.inv_q.is_empty() || self.inv_p_tilde.is_empty()
    }
}

/// Which elliptic regularity statement a window belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EllipticCase {
    /// Homogeneous estimate, `0 ≤ a ≤ s + 1`.
    Homogeneous,
    /// Inhomogeneous with `aq < 2`, `0 < a < min(2s, 1)`.
    Subcritical,
    /// Inhomogeneous with `aq > 2`, `s > 1/4`, `0 < a < min(4s − 1, 1 + s, 2s)`.
    Supercritical,
}

/// `(1/q, 1/p)` window of one elliptic regularity statement at given `(s, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticWindow {
    pub case: EllipticCase,
    pub s: f64,
    pub a: f64,
    /// Whether `(s, a)` is in the range where the statement applies.
    pub applicable: bool,
    pub inv_q: Interval,
}

impl EllipticWindow {
    pub fn new(case: EllipticCase, s: f64, a: f64) -> Self {
        let (applicable, inv_q) = match case {
            EllipticCase::Homogeneous => (
                s > 0.0 && (0.0..=s + 1.0).contains(&a),
                Interval::open(
                    ((1.0 + 2.0 * a - 4.0 * s) / 3.0)
                        .max(0.5 * (1.0 + a - 4.0 * s))
                        .max(0.5 * a.min(1.0)),
                    0.5 * (1.0 + a),
                )
                .intersect(&Interval::open(0.0, 1.0)),
            ),
            EllipticCase::Subcritical => (
                s > 0.0 && a > 0.0 && a < (2.0 * s).min(1.0),
                Interval::open((0.5 + a - 2.0 * s).max(0.5 * a), 0.5),
            ),
            EllipticCase::Supercritical => (
                s > 0.25 && a > 0.0 && a < (4.0 * s - 1.0).min(1.0 + s).min(2.0 * s),
                Interval::open(0.5 * (a - s).max(1.0 + 2.0 * a - 4.0 * s), 0.5 * a.min(1.0)),
            ),
        };
        Self {
            case,
            s,
            a,
            applicable,
            inv_q,
        }
    }

    /// Window for `1/p` at a given `1/q`, intersected with `0 ≤ 1/p ≤ 1`.
    pub fn inv_p(&self, inv_q: f64) -> Interval {
        let (a, s) = (self.a, self.s);
        let base = Interval {
            lo: 1.0 - 2.0 * inv_q + a - 2.0 * s,
            hi: 0.0,
            lo_closed: true,
            hi_closed: false,
        };
        let w = match self.case {
            EllipticCase::Homogeneous => {
                let upper = Interval::open_closed(f64::NEG_INFINITY, 0.5 * (1.0 - inv_q));
                let strict = Interval::open(f64::NEG_INFINITY, 1.0 - 2.0 * inv_q + a);
                Interval { hi: f64::INFINITY, ..base }.intersect(&upper).intersect(&strict)
            }
            EllipticCase::Subcritical | EllipticCase::Supercritical => Interval {
                hi: 0.5 - inv_q,
                ..base
            },
        };
        w.intersect(&Interval {
            lo: 0.0,
            hi: 1.0,
            lo_closed: true,
            hi_closed: true,
        })
    }

    pub fn is_empty(&self) -> bool {
        !self.applicable
            || self.inv_q.is_empty()
            || self
                .inv_q
                .interior_points(64)
                .iter()
                .all(|&iq| self.inv_p(iq).is_empty())
    }
}

/// Flags of the bilinear space-time estimate conditions (c1)–(c4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KtFlags {
    /// `1 ≤ p ≤ ∞` and `1 ≤ q < ∞`.
    pub range: bool,
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
}

impl KtFlags {
    pub fn all(&self) -> bool {
        self.range && self.c1 && self.c2 && self.c3 && self.c4
    }
}

/// Tolerance for the equality (c4).
pub const KT_EQ_TOL: f64 = 1e-12;

/// Checks (c1)–(c4) for `‖D^{−σ}(uv)‖_{L^p_tL^q_x} ≲ ‖u‖_{H^{s₁,θ}}‖v‖_{H^{s₂,θ}}`.
pub fn kt_check(sigma: f64, p: f64, q: f64, s1: f64, s2: f64) -> KtFlags {
    let (ip, iq) = (1.0 / p, 1.0 / q);
    let edge = 1.0 - iq - 0.5 * ip;
    KtFlags {
        range: p >= 1.0 && q >= 1.0 && q.is_finite(),
        c1: ip <= 0.5 * (1.0 - iq),
        c2: 0.0 < sigma && sigma < 2.0 * (1.0 - iq - ip),
        c3: s1 < edge && s2 < edge,
        c4: (s1 + s2 + sigma - 2.0 * edge).abs() <= KT_EQ_TOL,
    }
}

/// Every parameter window of the local theory at regularity `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamWindow {
    pub s: f64,
    pub epsilon: Interval,
    /// θ window at ε = 0.
    pub theta: Interval,
    pub a0: A0Exponents,
    /// Elliptic windows when an `a` was supplied.
    pub elliptic: Vec<EllipticWindow>,
    pub epsilon_empty: bool,
    pub theta_empty: bool,
    pub a0_empty: bool,
}

impl ParamWindow {
    pub fn theta_at(&self, eps: f64) -> Interval {
        theta_window(self.s, eps)
    }
}

/// Evaluates the admissibility inequalities at `s` (and `a`, if given).
pub fn admissible_params(s: f64, a: Option<f64>) -> ParamWindow {
    let epsilon = epsilon_window(s);
    let theta = theta_window(s, 0.0);
    let a0 = A0Exponents::new(s);
    let elliptic = a
        .map(|a| {
            [
                EllipticCase::Homogeneous,
                EllipticCase::Subcritical,
                EllipticCase::Supercritical,
            ]
            .into_iter()
            .map(|c| EllipticWindow::new(c, s, a))
            .collect()
        })
        .unwrap_or_default();
    ParamWindow {
        s,
        epsilon_empty: epsilon.is_empty(),
        theta_empty: theta.is_empty(),
        a0_empty: a0.is_empty(),
        epsilon,
        theta,
        a0,
        elliptic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_has_no_epsilon() {
        let w = admissible_params(0.25, None);
        assert!(w.epsilon_empty);
    }

    #[test]
    fn s_point_three() {
        let w = admissible_params(0.3, None);
        assert!((w.epsilon.hi - 0.1).abs() < 1e-15 && w.epsilon.lo == 0.0 && w.epsilon.lo_closed);
        assert!((w.theta.lo - 0.75).abs() < 1e-15 && !w.theta.lo_closed);
        assert!((w.theta.hi - 0.8).abs() < 1e-15 && w.theta.hi_closed);
        assert!((w.a0.inv_q.lo - 0.15).abs() < 1e-15 && (w.a0.inv_q.hi - 0.2).abs() < 1e-15);
    }

    #[test]
    fn interval_edges() {
        let i = Interval::closed_open(0.0, 1.0);
        assert!(i.contains(0.0) && !i.contains(1.0));
        assert!(Interval::open(1.0, 1.0).is_empty());
        assert!(!Interval {
            lo: 1.0,
            hi: 1.0,
            lo_closed: true,
            hi_closed: true
        }
        .is_empty());
    }

    #[test]
    fn kt_equality() {
        let (p, q) = (4.0, 4.0);
        let edge = 1.0 - 0.25 - 0.125;
        let f = kt_check(0.25, p, q, edge - 0.125, edge - 0.125);
        assert!(f.c1 && f.c2 && f.c3 && f.c4, "{f:?}");
        let f = kt_check(0.25, p, q, 0.1, 0.1);
        assert!(!f.c4);
    }
}
