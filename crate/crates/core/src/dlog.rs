//! Discrete logarithms in `U(n)`: a definition-level brute force search, a
//! baby-step giant-step attack, and a benchmark that measures how the attack
//! cost grows with the group order.
//!
//! Both solvers return the least nonnegative solution, which is always below
//! `phi(n)`.

use std::collections::HashMap;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use num_bigint::RandBigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::group::{find_generator, verify_generator, GroupError, Modulus, Unit};
use crate::modmath::{gen_safe_prime, MathError, Natural};

/// Largest group order the brute force search accepts by default.
pub const BRUTEFORCE_ORDER_CAP: u64 = 1 << 26;

/// Largest baby-step table (entries) BSGS will build by default.
pub const BSGS_TABLE_CAP: u64 = 1 << 22;

/// Header line of the benchmark CSV.
pub const CSV_HEADER: &str = "group_order,algorithm,bits,elapsed_s,group_ops,solution";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DlogError {
    #[error("group order {order} exceeds the brute-force cap of {cap}")]
    CapExceeded { order: Natural, cap: u64 },
    #[error("baby-step table of {steps} entries exceeds the budget of {cap}")]
    MemoryBudgetExceeded { steps: Natural, cap: u64 },
    #[error("target is not a power of the base")]
    NoSolution,
    #[error("{0} is not a generator of U(n)")]
    NotAGenerator(Natural),
    #[error("base and target live in different groups")]
    ModulusMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Math(#[from] MathError),
}

/// A base and target in the same `U(n)`.
#[derive(Debug, Clone)]
pub struct DlogInstance<'m> {
    base: Unit<'m>,
    target: Unit<'m>,
}

impl<'m> DlogInstance<'m> {
    /// Requires `base` to generate `U(n)`, so a solution always exists.
    pub fn new(base: Unit<'m>, target: Unit<'m>) -> Result<Self, DlogError> {
        if !verify_generator(&base.value(), base.modulus()) {
            return Err(DlogError::NotAGenerator(base.value()));
        }
        Self::with_any_base(base, target)
    }

    /// Accepts a base of any order; the solvers then report
    /// [`DlogError::NoSolution`] when the target is outside `<base>`.
    pub fn with_any_base(base: Unit<'m>, target: Unit<'m>) -> Result<Self, DlogError> {
        if base.modulus().n() != target.modulus().n() {
            return Err(DlogError::ModulusMismatch);
        }
        Ok(Self { base, target })
    }

    pub fn base(&self) -> &Unit<'m> {
        &self.base
    }

    pub fn target(&self) -> &Unit<'m> {
        &self.target
    }

    pub fn modulus(&self) -> &'m Modulus {
        self.base.modulus()
    }
}

/// A solution together with the number of group operations spent finding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub exponent: Natural,
    pub group_ops: u64,
}

pub fn dlog_bruteforce(inst: &DlogInstance<'_>) -> Result<Natural, DlogError> {
    bruteforce_solve(inst, BRUTEFORCE_ORDER_CAP).map(|s| s.exponent)
}

/// Walks `base^0, base^1, ...` until it meets the target.
pub fn bruteforce_solve(inst: &DlogInstance<'_>, order_cap: u64) -> Result<Solution, DlogError> {
    let phi = inst.modulus().phi();
    let order = match phi.to_u64() {
        Some(o) if o <= order_cap => o,
        _ => {
            return Err(DlogError::CapExceeded {
                order: phi.clone(),
                cap: order_cap,
            })
        }
    };
    let mut acc = Unit::one(inst.modulus());
    for x in 0..order {
        if acc == inst.target {
            return Ok(Solution {
                exponent: Natural::from(x),
                group_ops: x,
            });
        }
        acc = acc.mul(&inst.base)?;
    }
    Err(DlogError::NoSolution)
}

pub fn dlog_bsgs(inst: &DlogInstance<'_>) -> Result<Natural, DlogError> {
    bsgs_solve(inst, BSGS_TABLE_CAP).map(|s| s.exponent)
}

/// Baby-step giant-step with `s = ceil(sqrt(phi))`.
///
/// Stores `base^j` for `j < s` (first occurrence wins), then walks
/// `target * base^(-s*i)` for `i = 0, 1, ...`. The first hit `i*s + j` is the
/// least solution. Uses at most `2s + 1` group operations, one of them the
/// inversion of `base^s`.
pub fn bsgs_solve(inst: &DlogInstance<'_>, table_cap: u64) -> Result<Solution, DlogError> {
    let phi = inst.modulus().phi();
    let mut root = phi.sqrt();
    if &root * &root < *phi {
        root += 1u8;
    }
    let steps = match root.to_u64() {
        Some(s) if s <= table_cap => s,
        _ => {
            return Err(DlogError::MemoryBudgetExceeded {
                steps: root,
                cap: table_cap,
            })
        }
    };

    let mut group_ops = 0u64;
    let mut table = HashMap::with_capacity(steps as usize);
    let mut baby = Unit::one(inst.modulus());
    for j in 0..steps {
        table.entry(baby.key()).or_insert(j);
        baby = baby.mul(&inst.base)?;
        group_ops += 1;
    }
    // `baby` is now base^steps.
    let giant = baby.inverse();
    group_ops += 1;

    let mut gamma = inst.target.clone();
    for i in 0..steps {
        if let Some(&j) = table.get(&gamma.key()) {
            return Ok(Solution {
                exponent: Natural::from(i) * steps + j,
                group_ops,
            });
        }
        gamma = gamma.mul(&giant)?;
        group_ops += 1;
    }
    Err(DlogError::NoSolution)
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub group_order: Natural,
    pub algorithm: &'static str,
    pub bits: u64,
    pub solution: Natural,
    pub elapsed: Duration,
    pub group_ops: u64,
}

impl AttackReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.9},{},{}",
            self.group_order,
            self.algorithm,
            self.bits,
            self.elapsed.as_secs_f64(),
            self.group_ops,
            self.solution
        )
    }
}

/// For every bit size, `trials` times: draws a safe prime `p`, builds
/// `U(p^m)` (or `U(2p^m)`), picks a uniform exponent below `phi` and times
/// BSGS recovering it. Output is sorted by group order; ties keep generation
/// order, so a seeded `rng` fixes everything except the timings.
pub fn scaling_benchmark<R: Rng + ?Sized>(
    p_bits_list: &[u64],
    m: u32,
    doubled: bool,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<AttackReport>, DlogError> {
    scaling_benchmark_with_budget(p_bits_list, m, doubled, trials, BSGS_TABLE_CAP, rng)
}

pub fn scaling_benchmark_with_budget<R: Rng + ?Sized>(
    p_bits_list: &[u64],
    m: u32,
    doubled: bool,
    trials: usize,
    table_cap: u64,
    rng: &mut R,
) -> Result<Vec<AttackReport>, DlogError> {
    let mut reports = Vec::with_capacity(p_bits_list.len() * trials);
    for &bits in p_bits_list {
        for _ in 0..trials {
            let (p, q) = gen_safe_prime(bits, rng)?;
            let modulus = Modulus::from_safe_prime(p, &q, m, doubled)?;
            let base = find_generator(&modulus);
            let x = rng.gen_biguint_below(modulus.phi());
            let target = base.pow(&x);
            let inst = DlogInstance::new(base, target)?;

            let start = Instant::now();
            let solution = bsgs_solve(&inst, table_cap)?;
            let elapsed = start.elapsed();
            debug_assert_eq!(solution.exponent, x);

            reports.push(AttackReport {
                group_order: modulus.phi().clone(),
                algorithm: "bsgs",
                bits,
                solution: solution.exponent,
                elapsed,
                group_ops: solution.group_ops,
            });
        }
    }
    reports.sort_by(|a, b| a.group_order.cmp(&b.group_order));
    Ok(reports)
}

pub fn write_reports_csv<W: Write>(mut out: W, reports: &[AttackReport]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Least-squares slope of `ln(group_ops)` against `ln(group_order)`, using the
/// per-bit-size medians of both. `None` with fewer than two distinct sizes.
pub fn fit_loglog_slope(reports: &[AttackReport]) -> Option<f64> {
    let mut by_bits: Vec<(u64, Vec<f64>, Vec<f64>)> = Vec::new();
    for r in reports {
        if r.group_ops == 0 || r.group_order.is_zero() {
            continue;
        }
        let order = r.group_order.to_f64()?.ln();
        let ops = (r.group_ops as f64).ln();
        match by_bits.iter_mut().find(|(b, _, _)| *b == r.bits) {
            Some((_, xs, ys)) => {
                xs.push(order);
                ys.push(ops);
            }
            None => by_bits.push((r.bits, vec![order], vec![ops])),
        }
    }
    if by_bits.len() < 2 {
        return None;
    }
    let points: Vec<(f64, f64)> = by_bits
        .iter_mut()
        .map(|(_, xs, ys)| (median(xs), median(ys)))
        .collect();
    let count = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
