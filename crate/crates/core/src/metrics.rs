//! Performance measures: estimation error bound, SINRs, semantic rates,
//! secrecy rates and the power split.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::model::{hermitian_trace, BeamformingSolution, ChannelSet};
use crate::{real, CMatrix, CVector, Real};

/// All measures of one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T> {
    /// Per-user SINR, linear.
    pub sinr: Vec<T>,
    /// Leakage SINR indexed `[target][user]`.
    pub leakage_sinr: Vec<Vec<T>>,
    /// Per-user semantic rate, bits.
    pub rates: Vec<T>,
    /// Leakage rate indexed `[target][user]`, bits.
    pub leakage_rates: Vec<Vec<T>>,
    /// Per-user semantic secrecy rate, bits.
    pub secrecy: Vec<T>,
    /// Worst-case secrecy rate, bits.
    pub s_min: T,
    /// Estimation error bound of the echo channel.
    pub crb_value: T,
    /// Normalized bound `tr(R_x^{-1})`.
    pub crb_normalized: T,
    /// Communication-and-sensing power, watts.
    pub p_cs: T,
    /// Semantic extraction power, watts.
    pub p_comp: T,
}

/// Minimum mean-square error achievable when estimating the echo matrix:
/// `sigma_r^2 N_r / F * tr(R_x^{-1})`.
///
/// Fails with [`Error::SingularCovariance`] when the transmit covariance is
/// not invertible, i.e. the echo channel cannot be fully estimated.
pub fn crb<T: Real>(r_x: &CMatrix<T>, cfg: &SystemConfig<T>) -> Result<T> {
    Ok(crb_scale(cfg) * crb_normalized(r_x)?)
}

/// The antenna- and frame-independent part of the bound, `tr(R_x^{-1})`.
pub fn crb_normalized<T: Real>(r_x: &CMatrix<T>) -> Result<T> {
    let eig = r_x.clone().symmetric_eigenvalues();
    let min_eig = eig.iter().copied().fold(T::infinity(), num_traits::Float::min);
    if min_eig <= real(1e-12) {
        return Err(Error::SingularCovariance {
            min_eig: min_eig.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(eig.iter().fold(T::zero(), |acc, &l| acc + T::one() / l))
}

/// Factor converting the normalized bound into mean-square-error units.
pub fn crb_scale<T: Real>(cfg: &SystemConfig<T>) -> T {
    cfg.sigma_r2 * T::from_usize(cfg.n_r()).unwrap() / T::from_usize(cfg.frames).unwrap()
}

/// SINR of the stream aimed at `user` when received through channel `h`:
/// signal power over per-stream interference, sensing power and noise.
pub fn sinr<T: Real>(
    h: &CVector<T>,
    user_covariances: &[CMatrix<T>],
    sensing: &CMatrix<T>,
    user: usize,
    noise: T,
) -> Result<T> {
    let n = h.len();
    if sensing.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sensing.nrows(),
        });
    }
    if user >= user_covariances.len() {
        return Err(Error::DimensionMismatch {
            expected: user_covariances.len(),
            got: user,
        });
    }
    if noise <= T::zero() {
        return Err(Error::Domain("noise power must be > 0".into()));
    }
    let quad = |m: &CMatrix<T>| -> T { (h.adjoint() * m * h)[(0, 0)].re };
    let signal = quad(&user_covariances[user]);
    let mut denom = quad(sensing) + noise;
    for (k, w) in user_covariances.iter().enumerate() {
        if k != user {
            denom += quad(w);
        }
    }
    Ok(signal / denom)
}

/// Semantic transmission rate `(iota / rho) log2(1 + gamma)`, bits.
pub fn semantic_rate<T: Real>(gamma: T, rho: T, iota: T, rho_lb: T) -> Result<T> {
    if rho < rho_lb || rho > T::one() {
        return Err(Error::Domain(format!(
            "extraction ratio {rho:?} outside [{rho_lb:?}, 1]"
        )));
    }
    if gamma < T::zero() {
        return Err(Error::Domain("SINR must be >= 0".into()));
    }
    Ok(iota / rho * num_traits::Float::log2(T::one() + gamma))
}

/// Semantic secrecy rate: user rate minus the worst leakage, clamped at zero.
pub fn secrecy_rate<T: Real>(rate: T, leakage: &[T]) -> Result<T> {
    if leakage.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let worst = leakage.iter().copied().fold(T::neg_infinity(), num_traits::Float::max);
    Ok(num_traits::Float::max(rate - worst, T::zero()))
}

/// Power split between transmission and semantic extraction:
/// `(P_cs, P_comp) = (tr(R_x), -nu sum_k ln(rho_k))`.
pub fn power_split<T: Real>(r_x: &CMatrix<T>, rho: &[T], nu: T) -> Result<(T, T)> {
    let p_cs = hermitian_trace(r_x);
    let mut log_sum = T::zero();
    for &r in rho {
        if r <= T::zero() {
            return Err(Error::Domain(format!("extraction ratio {r:?} must be > 0")));
        }
        log_sum += num_traits::Float::ln(r);
    }
    Ok((p_cs, -nu * log_sum))
}

/// Evaluates every measure at one operating point. Works with relaxed
/// covariances directly; pass rank-one `w w^H` matrices for a recovered
/// solution.
pub fn evaluate<T: Real>(
    channels: &ChannelSet<T>,
    sol: &BeamformingSolution<T>,
    cfg: &SystemConfig<T>,
    rho: &[T],
) -> Result<MetricsReport<T>> {
    if rho.len() != channels.users.len() {
        return Err(Error::DimensionMismatch {
            expected: channels.users.len(),
            got: rho.len(),
        });
    }
    let sensing = sol.sensing_covariance();
    let k_users = channels.users.len();

    let mut gammas = Vec::with_capacity(k_users);
    let mut rates = Vec::with_capacity(k_users);
    for (k, h) in channels.users.iter().enumerate() {
        let g = sinr(h, &sol.user_covariances, &sensing, k, cfg.sigma_c2)?;
        gammas.push(g);
        rates.push(semantic_rate(g, rho[k], cfg.iota, cfg.rho_lb)?);
    }

    let mut leakage_sinr = Vec::with_capacity(channels.targets.len());
    let mut leakage_rates = Vec::with_capacity(channels.targets.len());
    for h_l in &channels.targets {
        let mut g_row = Vec::with_capacity(k_users);
        let mut r_row = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let g = sinr(h_l, &sol.user_covariances, &sensing, k, cfg.sigma_c2)?;
            g_row.push(g);
            r_row.push(semantic_rate(g, rho[k], cfg.iota, cfg.rho_lb)?);
        }
        leakage_sinr.push(g_row);
        leakage_rates.push(r_row);
    }

    let mut secrecy = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let leaks: Vec<T> = leakage_rates.iter().map(|row| row[k]).collect();
        secrecy.push(secrecy_rate(rates[k], &leaks)?);
    }
    let s_min = secrecy.iter().copied().fold(T::infinity(), num_traits::Float::min);

    let crb_normalized = crb_normalized(&sol.r_x)?;
    let (p_cs, p_comp) = power_split(&sol.r_x, rho, cfg.nu)?;

    Ok(MetricsReport {
        sinr: gammas,
        leakage_sinr,
        rates,
        leakage_rates,
        secrecy,
        s_min,
        crb_value: crb_scale(cfg) * crb_normalized,
        crb_normalized,
        p_cs,
        p_comp,
    })
}

/// Worst-case unclamped secrecy margin `min_{k,l} (R_k - R_{l|k})`, the
/// smooth quantity the block optimizers push upward. The reported `s_min`
/// is its clamp at zero.
pub fn worst_pair_margin<T: Real>(report: &MetricsReport<T>) -> T {
    let mut worst = T::infinity();
    for (k, &rate) in report.rates.iter().enumerate() {
        for row in &report.leakage_rates {
            let margin = rate - row[k];
            if margin < worst {
                worst = margin;
            }
        }
    }
    worst
}
