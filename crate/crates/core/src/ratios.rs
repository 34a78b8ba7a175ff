//! Semantic extraction ratios: minimize their sum under the compute-power
//! budget.
//!
//! The subproblem is symmetric across users, so the optimum is a common
//! ratio clamped to the box; the binding value is found by bisection on the
//! compute-budget residual.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::{real, Real};

/// Whether a user's ratio sits on a bound or strictly inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioBinding {
    AtLowerBound,
    Interior,
    AtOne,
}

/// Optimal extraction ratios with their budget accounting.
#[derive(Debug, Clone)]
pub struct RatioSolution<T> {
    pub rho: Vec<T>,
    /// Compute power consumed, watts.
    pub p_comp: T,
    /// Compute budget left over, watts.
    pub residual: T,
    pub binding: Vec<RatioBinding>,
}

/// Minimizes `sum_k rho_k` subject to `-nu sum_k ln(rho_k) <= P_t - P_cs`
/// and `rho_lb <= rho_k <= 1`.
///
/// Smaller ratios extract more aggressively and raise every semantic rate,
/// so the sum is pushed down until the compute budget binds or the lower
/// bound is hit; by symmetry all interior ratios share one value.
pub fn optimize_ratios<T: Real>(p_cs: T, cfg: &SystemConfig<T>) -> Result<RatioSolution<T>> {
    let users = cfg.users;
    let budget = cfg.power_budget - p_cs;
    if budget < T::zero() {
        return Err(Error::BudgetExceeded {
            p_cs: p_cs.to_f64().unwrap_or(f64::NAN),
            p_t: cfg.power_budget.to_f64().unwrap_or(f64::NAN),
        });
    }
    let k = T::from_usize(users).unwrap();
    let usage = |rho: T| -> T { -cfg.nu * k * num_traits::Float::ln(rho) };

    let rho = if budget <= T::zero() {
        T::one()
    } else if usage(cfg.rho_lb) <= budget {
        // enough budget to extract at the lower bound for everyone
        cfg.rho_lb
    } else {
        // bisect the common ratio for usage(rho) = budget
        let mut lo = cfg.rho_lb;
        let mut hi = T::one();
        let tol = real::<T>(1e-10);
        while hi - lo > tol {
            let mid = (lo + hi) / real(2.0);
            if usage(mid) > budget {
                lo = mid; // too much compute: raise the ratio
            } else {
                hi = mid;
            }
        }
        hi
    };

    let p_comp = usage(rho);
    let eps = real::<T>(1e-12);
    let binding = (0..users)
        .map(|_| {
            if rho <= cfg.rho_lb + eps {
                RatioBinding::AtLowerBound
            } else if rho >= T::one() - eps {
                RatioBinding::AtOne
            } else {
                RatioBinding::Interior
            }
        })
        .collect();
    Ok(RatioSolution {
        rho: vec![rho; users],
        p_comp,
        residual: budget - p_comp,
        binding,
    })
}
