//! Population models: Ricker-type recruitment with stocking, and Clark's
//! delay-recruitment model, plus the algebraic degree-five example.

pub mod algebraic;
pub mod clark;
pub mod ricker;

use serde::{Deserialize, Serialize};

pub use clark::ClarkParams;
pub use ricker::{RickerKind, RickerParams};

/// One evaluated condition. `value` is the quantity the condition compares
/// (usually a norm that must stay below one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionSet {
    pub conditions: Vec<Condition>,
}

impl ConditionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, holds: bool, value: Option<f64>) -> &mut Condition {
        self.conditions.push(Condition { name: name.to_string(), holds, value, note: None });
        self.conditions.last_mut().expect("just pushed")
    }

    /// Records a quantity that is reported but not a pass/fail test.
    pub fn record(&mut self, name: &str, value: f64) {
        self.push(name, true, Some(value));
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Whether the named condition exists and holds.
    pub fn holds(&self, name: &str) -> bool {
        self.get(name).is_some_and(|c| c.holds)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|c| c.value)
    }

    pub fn extend(&mut self, other: ConditionSet) {
        self.conditions.extend(other.conditions);
    }
}

impl Condition {
    pub fn with_note(&mut self, note: impl Into<String>) -> &mut Self {
        self.note = Some(note.into());
        self
    }
}

/// Sub-intervals of `[lo, hi]` where `pred` holds: a uniform scan of `n`
/// points, each boundary refined by bisection to `tol`.
pub fn intervals_where(pred: impl Fn(f64) -> bool, lo: f64, hi: f64, n: usize, tol: f64) -> Vec<(f64, f64)> {
    let refine = |mut a: f64, mut b: f64| {
        // pred(a) != pred(b)
        let pa = pred(a);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if pred(mid) == pa {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let flags: Vec<bool> = xs.iter().map(|x| pred(*x)).collect();
    let mut out = Vec::new();
    let mut start = flags[0].then_some(lo);
    for i in 1..n {
        if flags[i] != flags[i - 1] {
            let edge = refine(xs[i - 1], xs[i]);
            if flags[i] {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                out.push((s, edge));
            }
        }
    }
    if let Some(s) = start {
        out.push((s, hi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_of_a_band() {
        let iv = intervals_where(|x| (1.25..2.5).contains(&x) || x > 4.0, 0.0, 5.0, 101, 1e-10);
        assert_eq!(iv.len(), 2);
        assert!((iv[0].0 - 1.25).abs() < 1e-9 && (iv[0].1 - 2.5).abs() < 1e-9);
        assert!((iv[1].0 - 4.0).abs() < 1e-9 && iv[1].1 == 5.0);
    }

    #[test]
    fn condition_set_lookup() {
        let mut s = ConditionSet::new();
        s.push("a", true, Some(0.5)).with_note("fine");
        s.push("b", false, None);
        assert!(s.holds("a"));
        assert!(!s.holds("b"));
        assert!(!s.holds("missing"));
        assert_eq!(s.value("a"), Some(0.5));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ConditionSet>(&json).unwrap(), s);
    }
}
