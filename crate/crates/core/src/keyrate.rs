//! Closed-form secret-key rates for qudit MDI-QKD and the derived
//! crossover, threshold and table utilities.

use serde::Serialize;

use crate::error::{Error, Result};

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits.
pub fn shannon_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
        });
    }
    Ok(-xlog2x(x) - xlog2x(1.0 - x))
}

/// `log2 3 - 2Q - 2H(Q)` for `Q` in `[0, 1/2]`.
pub fn r3(q: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::Domain {
            name: "Q",
            value: q,
        });
    }
    Ok(3f64.log2() - 2.0 * q - 2.0 * shannon_entropy(q)?)
}

/// `log2 d + 2(1-Q) log2(1-Q) + 2Q log2(Q/(d-1))` for `Q` in `[0, 1)`.
pub fn r_d(d: usize, q: f64) -> Result<f64> {
    check_dim(d)?;
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain {
            name: "Q",
            value: q,
        });
    }
    let tail = if q == 0.0 {
        0.0
    } else {
        2.0 * q * (q / (d as f64 - 1.0)).log2()
    };
    Ok((d as f64).log2() + 2.0 * xlog2x(1.0 - q) + tail)
}

/// `r_d / (2d)`, unclamped.
pub fn rate_per_signal_raw(d: usize, q: f64) -> Result<f64> {
    Ok(r_d(d, q)? / (2.0 * d as f64))
}

/// `max(0, r_d) / (2d)`.
pub fn rate_per_signal(d: usize, q: f64) -> Result<f64> {
    Ok(rate_per_signal_raw(d, q)?.max(0.0))
}

const SCAN_STEP: f64 = 1e-3;
const SCAN_MAX: f64 = 0.5;
const BISECTION_TOL: f64 = 1e-6;

/// Smallest `Q` in `(0, 0.5)` where the per-signal rates of `d1` and `d2`
/// cross: a coarse scan finds the first sign change of the raw difference,
/// then bisection narrows it.
pub fn crossover_q(d1: usize, d2: usize) -> Result<f64> {
    check_dim(d1)?;
    check_dim(d2)?;
    if d1 == d2 {
        return Err(Error::InvalidParameter(format!(
            "crossover of dimension {d1} with itself"
        )));
    }
    let diff =
        |q: f64| -> Result<f64> { Ok(rate_per_signal_raw(d1, q)? - rate_per_signal_raw(d2, q)?) };
    let steps = (SCAN_MAX / SCAN_STEP).round() as usize;
    let mut lo = SCAN_STEP * 1e-3;
    let mut f_lo = diff(lo)?;
    for k in 1..steps {
        let hi = k as f64 * SCAN_STEP;
        let f_hi = diff(hi)?;
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            while b - a > BISECTION_TOL {
                let m = 0.5 * (a + b);
                let fm = diff(m)?;
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::NoRoot { d1, d2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SiftSetup {
    /// Parity post-selected multiport measurement.
    ProposedEsd,
    /// Linear-optics filter for a single entangled state.
    BellFilter,
}

/// Sifted signal rate, basis matching excluded.
pub fn sifted_rate(setup: SiftSetup, d: usize, eta: f64) -> Result<f64> {
    check_dim(d)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
        });
    }
    let df = d as f64;
    Ok(match setup {
        SiftSetup::BellFilter => 1.0 / (df * df),
        SiftSetup::ProposedEsd => eta.powi(d as i32) / df,
    })
}

/// Parity-device efficiency at which the two setups sift equally:
/// `(1/d)^(1/d)`.
pub fn eta_threshold(d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    Ok((1.0 / df).powf(1.0 / df))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyRateParams {
    pub dims: Vec<usize>,
    pub q_max: f64,
    pub q_step: f64,
    /// When set, `R_total` is additionally multiplied by `eta^d`.
    pub eta: Option<f64>,
}

impl KeyRateParams {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidParameter("no dimensions given".into()));
        }
        for &d in &self.dims {
            check_dim(d)?;
        }
        if self.q_step.is_nan() || self.q_step <= 0.0 {
            return Err(Error::Domain {
                name: "q_step",
                value: self.q_step,
            });
        }
        if !(0.0..0.5).contains(&self.q_max) {
            return Err(Error::Domain {
                name: "q_max",
                value: self.q_max,
            });
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::Domain {
                    name: "eta",
                    value: eta,
                });
            }
        }
        Ok(())
    }

    /// `Q_k = k * q_step` for `k = 0..=round(q_max / q_step)`, rounded to
    /// 12 decimals so grid points print cleanly.
    pub fn grid(&self) -> Vec<f64> {
        let n = (self.q_max / self.q_step).round() as usize + 1;
        (0..n)
            .map(|k| (k as f64 * self.q_step * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyRateRow {
    pub d: usize,
    #[serde(rename = "Q")]
    pub q: f64,
    /// Raw rate per sifted signal.
    pub r_sifted: f64,
    /// Clamped rate per total signal.
    #[serde(rename = "R_total")]
    pub r_total: f64,
}

pub const TABLE_HEADER: [&str; 4] = ["d", "Q", "r_sifted", "R_total"];

/// Rows ordered by dimension (input order) then by `Q`.
pub fn keyrate_table(params: &KeyRateParams) -> Result<Vec<KeyRateRow>> {
    params.validate()?;
    let grid = params.grid();
    let mut rows = Vec::with_capacity(params.dims.len() * grid.len());
    for &d in &params.dims {
        let scale = params.eta.map_or(1.0, |eta| eta.powi(d as i32));
        for &q in &grid {
            rows.push(KeyRateRow {
                d,
                q,
                r_sifted: r_d(d, q)?,
                r_total: rate_per_signal(d, q)? * scale,
            });
        }
    }
    Ok(rows)
}

/// Per-dimension threshold row for `d = 2..=d_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub d: usize,
    pub eta_threshold: f64,
    pub bell_filter_rate: f64,
}

pub fn threshold_table(d_max: usize) -> Result<Vec<ThresholdRow>> {
    if d_max < 2 {
        return Err(Error::InvalidDimension(d_max));
    }
    (2..=d_max)
        .map(|d| {
            Ok(ThresholdRow {
                d,
                eta_threshold: eta_threshold(d)?,
                bell_filter_rate: sifted_rate(SiftSetup::BellFilter, d, 1.0)?,
            })
        })
        .collect()
}
