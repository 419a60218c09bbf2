//! One-dimensional model of the LBP operator and exhaustive checks of the
//! second-difference lemmas.
//!
//! For a discrete signal `x`, `D` is the forward difference, `H` the strict
//! step and `L` the two-neighbor binary pattern. Interior index `i` refers to
//! the triple `(x[i-1], x[i], x[i+1])`, so `D(H(D(x)))_i` compares the slope
//! sign on the right of `x[i]` with the one on its left.

use std::fmt;

use crate::error::{Error, Result};

/// Largest enumeration the verifiers accept.
pub const MAX_ENUMERATION: u64 = 50_000_000;

/// A discrete integer signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence1D(pub Vec<i64>);

impl Sequence1D {
    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Sequence1D {
    fn from(v: Vec<i64>) -> Self {
        Sequence1D(v)
    }
}

/// `x[i+1] - x[i]`.
pub fn diff(x: &[i64]) -> Result<Vec<i64>> {
    if x.len() < 2 {
        return Err(Error::validation(format!(
            "difference needs at least 2 values, got {}",
            x.len()
        )));
    }
    Ok(x.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Elementwise strict step.
pub fn heaviside_seq(x: &[i64]) -> Vec<i64> {
    x.iter().map(|&v| (v > 0) as i64).collect()
}

/// `H(x[i-1] - x[i]) + 2 H(x[i+1] - x[i])` at every interior point.
pub fn l_operator(x: &[i64]) -> Result<Vec<i64>> {
    check_interior(x)?;
    Ok(x.windows(3)
        .map(|w| (w[0] > w[1]) as i64 + 2 * (w[2] > w[1]) as i64)
        .collect())
}

/// The same pattern written with differences: `H(-D(x)[i-1]) + 2 H(D(x)[i])`.
pub fn l_from_differences(x: &[i64]) -> Result<Vec<i64>> {
    check_interior(x)?;
    let d = diff(x)?;
    let left = heaviside_seq(&d.iter().map(|v| -v).collect::<Vec<_>>());
    let right = heaviside_seq(&d);
    Ok(left[..left.len() - 1]
        .iter()
        .zip(&right[1..])
        .map(|(l, r)| l + 2 * r)
        .collect())
}

/// `D(H(D(x)))`, one value per interior point, always in `{-1, 0, 1}`.
pub fn slope_sign_change(x: &[i64]) -> Result<Vec<i64>> {
    check_interior(x)?;
    diff(&heaviside_seq(&diff(x)?))
}

/// `D²(x)_i = x[i-1] + x[i+1] - 2 x[i]` at every interior point.
pub fn second_difference(x: &[i64]) -> Result<Vec<i64>> {
    check_interior(x)?;
    Ok(x.windows(3).map(|w| w[0] + w[2] - 2 * w[1]).collect())
}

fn check_interior(x: &[i64]) -> Result<()> {
    if x.len() < 3 {
        return Err(Error::validation(format!(
            "need at least 3 values for interior points, got {}",
            x.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    /// `D(H(D(x)))_i = 1` implies `D²(x)_i > 0`.
    Lemma1,
    /// `D(H(D(x)))_i = -1` implies `D²(x)_i < 0`.
    Lemma2,
    /// `D(H(D(x)))_i = 0` implies both adjacent slopes are positive or both
    /// are non-positive.
    MonotoneCase,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Lemma1 => "lemma 1",
            Check::Lemma2 => "lemma 2",
            Check::MonotoneCase => "monotone case",
        })
    }
}

/// Outcome of an exhaustive check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub check: Check,
    pub max_value: i64,
    pub length: usize,
    /// Number of sequences enumerated.
    pub cases: u64,
    /// Interior points inspected across all sequences.
    pub points: u64,
    /// Interior points where the antecedent held.
    pub triggered: u64,
    pub violations: u64,
    pub first_violation: Option<Vec<i64>>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (values 0..={}, length {}): {} violations in {} cases ({} of {} interior points triggered)",
            self.check, self.max_value, self.length, self.violations, self.cases, self.triggered, self.points
        )?;
        if let Some(x) = &self.first_violation {
            write!(f, "; first counterexample {x:?}")?;
        }
        Ok(())
    }
}

/// Number of sequences of `length` values drawn from `0..=max_value`, or an
/// error when it exceeds [`MAX_ENUMERATION`].
pub fn enumeration_size(max_value: i64, length: usize) -> Result<u64> {
    if max_value < 1 {
        return Err(Error::validation(format!("max value must be positive, got {max_value}")));
    }
    if length < 3 {
        return Err(Error::validation(format!("length must be at least 3, got {length}")));
    }
    let base = max_value as u64 + 1;
    let mut total: u64 = 1;
    for _ in 0..length {
        total = total
            .checked_mul(base)
            .filter(|&t| t <= MAX_ENUMERATION)
            .ok_or_else(|| {
                Error::validation(format!(
                    "{base}^{length} sequences exceed the enumeration limit of {MAX_ENUMERATION}"
                ))
            })?;
    }
    Ok(total)
}

/// Calls `f` on every sequence of `length` values in `0..=max_value`, in
/// lexicographic order.
fn for_each_sequence(max_value: i64, length: usize, mut f: impl FnMut(&[i64])) {
    let mut x = vec![0i64; length];
    loop {
        f(&x);
        let mut pos = length;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if x[pos] < max_value {
                x[pos] += 1;
                break;
            }
            x[pos] = 0;
        }
    }
}

fn run(check: Check, max_value: i64, length: usize) -> Result<VerificationReport> {
    enumeration_size(max_value, length)?;
    let mut report = VerificationReport {
        check,
        max_value,
        length,
        cases: 0,
        points: 0,
        triggered: 0,
        violations: 0,
        first_violation: None,
    };
    for_each_sequence(max_value, length, |x| {
        report.cases += 1;
        let d = diff(x).expect("length >= 3");
        let dhd = slope_sign_change(x).expect("length >= 3");
        let d2 = second_difference(x).expect("length >= 3");
        for i in 0..dhd.len() {
            report.points += 1;
            let (antecedent, holds) = match check {
                Check::Lemma1 => (dhd[i] == 1, d2[i] > 0),
                Check::Lemma2 => (dhd[i] == -1, d2[i] < 0),
                Check::MonotoneCase => {
                    let (left, right) = (d[i], d[i + 1]);
                    (dhd[i] == 0, (left > 0) == (right > 0))
                }
            };
            if antecedent {
                report.triggered += 1;
                if !holds {
                    report.violations += 1;
                    report.first_violation.get_or_insert_with(|| x.to_vec());
                }
            }
        }
    });
    Ok(report)
}

/// Exhaustively checks that a valley in slope sign implies positive curvature.
pub fn verify_lemma1(max_value: i64, length: usize) -> Result<VerificationReport> {
    run(Check::Lemma1, max_value, length)
}

/// Exhaustively checks that a peak in slope sign implies negative curvature.
pub fn verify_lemma2(max_value: i64, length: usize) -> Result<VerificationReport> {
    run(Check::Lemma2, max_value, length)
}

/// Exhaustively checks that an unchanged slope sign means both adjacent
/// slopes agree under the strict step.
pub fn verify_monotone_case(max_value: i64, length: usize) -> Result<VerificationReport> {
    run(Check::MonotoneCase, max_value, length)
}

/// All three checks, in order.
pub fn verify_all(max_value: i64, length: usize) -> Result<Vec<VerificationReport>> {
    Ok(vec![
        verify_lemma1(max_value, length)?,
        verify_lemma2(max_value, length)?,
        verify_monotone_case(max_value, length)?,
    ])
}
