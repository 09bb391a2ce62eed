//! Link quality: packet reception rate per node and frame.
//!
//! The analytic source combines free-space path loss with Rayleigh block
//! fading, which gives `prr = exp(-k_src * d^k2)` with
//! `k_src = k1 * n0 * gamma0 / p_tx`. The trace source converts recorded
//! RSSI through a piecewise-linear table. Either way the rate is constant
//! within a frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NodeId;
use crate::scalar::Scalar;
use crate::series::NodeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticChannelParams<T> {
    pub g_tx: T,
    pub g_rx: T,
    /// Carrier frequency, Hz.
    pub f0: T,
    /// Speed of light, m/s.
    pub c: T,
    /// Path-loss exponent.
    pub k2: T,
    /// Noise power, W.
    pub n0: T,
    /// SNR threshold for successful reception (linear).
    pub gamma0: T,
    /// Node transmit power, W.
    pub p_tx: T,
}

impl<T: Scalar> Default for AnalyticChannelParams<T> {
    /// 2.4 GHz isotropic link, 0 dBm transmitter, -85 dBm noise floor and a
    /// 10 dB decoding threshold: PRR falls to one half near 46 m.
    fn default() -> Self {
        AnalyticChannelParams {
            g_tx: T::one(),
            g_rx: T::one(),
            f0: T::lit(2.4e9),
            c: T::lit(299_792_458.0),
            k2: T::lit(2.0),
            n0: T::lit(3.16e-12),
            gamma0: T::lit(10.0),
            p_tx: T::lit(1e-3),
        }
    }
}

impl<T: Scalar> AnalyticChannelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_tx", self.g_tx),
            ("g_rx", self.g_rx),
            ("f0", self.f0),
            ("c", self.c),
            ("k2", self.k2),
            ("n0", self.n0),
            ("gamma0", self.gamma0),
            ("p_tx", self.p_tx),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> T {
        self.c / self.f0
    }

    /// Distance-independent path-loss factor `(4π)² / (g_tx g_rx λ0²)`.
    pub fn k1(&self) -> Result<T> {
        if !(self.g_tx > T::zero()) || !(self.g_rx > T::zero()) {
            return Err(Error::param("g_tx/g_rx", "antenna gains must be positive"));
        }
        let lambda = self.wavelength();
        let four_pi = T::lit(4.0) * T::PI();
        Ok(four_pi * four_pi / (self.g_tx * self.g_rx * lambda * lambda))
    }

    pub fn path_loss(&self, d: T) -> Result<T> {
        check_distance(d)?;
        Ok(self.k1()? * d.powf(self.k2))
    }

    /// Average SNR at the base station.
    pub fn mean_snr(&self, d: T) -> Result<T> {
        Ok(self.p_tx / (self.n0 * self.path_loss(d)?))
    }

    pub fn k_src(&self) -> Result<T> {
        Ok(self.k1()? * self.n0 * self.gamma0 / self.p_tx)
    }

    /// Probability that the instantaneous SNR clears `gamma0`.
    pub fn prr(&self, d: T) -> Result<T> {
        check_distance(d)?;
        Ok((-(self.k_src()? * d.powf(self.k2))).exp())
    }
}

fn check_distance<T: Scalar>(d: T) -> Result<()> {
    if d > T::zero() && d.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "d",
            format!("distance must be positive, got {d}"),
        ))
    }
}

pub fn k1<T: Scalar>(params: &AnalyticChannelParams<T>) -> Result<T> {
    params.k1()
}

pub fn path_loss<T: Scalar>(params: &AnalyticChannelParams<T>, d: T) -> Result<T> {
    params.path_loss(d)
}

pub fn mean_snr<T: Scalar>(params: &AnalyticChannelParams<T>, d: T) -> Result<T> {
    params.mean_snr(d)
}

pub fn prr_analytic<T: Scalar>(params: &AnalyticChannelParams<T>, d: T) -> Result<T> {
    params.prr(d)
}

/// Piecewise-linear RSSI (dBm) to PRR map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(T, T)>", into = "Vec<(T, T)>", bound = "T: Scalar")]
pub struct RssiPrrTable<T: Scalar> {
    points: Vec<(T, T)>,
}

impl<T: Scalar> RssiPrrTable<T> {
    /// Breakpoints must have strictly increasing RSSI and non-decreasing PRR
    /// within [0, 1].
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTable("RSSI table is empty".into()));
        }
        for (rssi, prr) in &points {
            if !rssi.is_finite() || !(*prr >= T::zero() && *prr <= T::one()) {
                return Err(Error::InvalidTable(format!(
                    "breakpoint ({rssi}, {prr}) out of range"
                )));
            }
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidTable("RSSI breakpoints must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidTable(
                    "PRR must be non-decreasing in RSSI".into(),
                ));
            }
        }
        Ok(RssiPrrTable { points })
    }

    /// Generic 2.4 GHz reception cliff. Synthetic; replace with a measured
    /// curve when one is available.
    pub fn default_cliff() -> Self {
        let p = |r: f64, q: f64| (T::lit(r), T::lit(q));
        RssiPrrTable::new(vec![
            p(-92.0, 0.0),
            p(-90.0, 0.1),
            p(-87.0, 0.9),
            p(-85.0, 1.0),
        ])
        .expect("static table is valid")
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn prr(&self, rssi_dbm: T) -> T {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if rssi_dbm <= first.0 {
            return first.1;
        }
        if rssi_dbm >= last.0 {
            return last.1;
        }
        let hi = pts.partition_point(|(r, _)| *r <= rssi_dbm);
        let (r0, p0) = pts[hi - 1];
        let (r1, p1) = pts[hi];
        let t = (rssi_dbm - r0) / (r1 - r0);
        (p0 + t * (p1 - p0)).max(T::zero()).min(T::one())
    }
}

impl<T: Scalar> TryFrom<Vec<(T, T)>> for RssiPrrTable<T> {
    type Error = Error;
    fn try_from(points: Vec<(T, T)>) -> Result<Self> {
        RssiPrrTable::new(points)
    }
}

impl<T: Scalar> From<RssiPrrTable<T>> for Vec<(T, T)> {
    fn from(t: RssiPrrTable<T>) -> Self {
        t.points
    }
}

pub fn rssi_to_prr<T: Scalar>(rssi_dbm: T, table: &RssiPrrTable<T>) -> T {
    table.prr(rssi_dbm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiSample<T> {
    pub node_id: u32,
    pub frame: u32,
    pub rssi_dbm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssiTrace<T> {
    pub samples: Vec<RssiSample<T>>,
}

/// Where per-frame PRR comes from.
#[derive(Debug, Clone)]
pub enum ChannelSource<T: Scalar> {
    /// Static node-to-base-station distances, one per node.
    Analytic {
        params: AnalyticChannelParams<T>,
        distances: Vec<T>,
    },
    Trace {
        series: NodeSeries<T>,
        table: RssiPrrTable<T>,
    },
    /// Explicit PRR per node (outer) and frame (inner, 1-based frame `f` at
    /// index `f - 1`); frames past the end hold the last value.
    Tabulated(Vec<Vec<T>>),
}

impl<T: Scalar> ChannelSource<T> {
    pub fn trace(trace: &RssiTrace<T>, table: RssiPrrTable<T>) -> Result<Self> {
        let series = NodeSeries::from_rows(
            trace
                .samples
                .iter()
                .map(|s| (s.node_id, s.frame, s.rssi_dbm)),
        )?;
        Ok(ChannelSource::Trace { series, table })
    }

    pub fn prr(&self, node: NodeId, frame: u32) -> Result<T> {
        match self {
            ChannelSource::Analytic { params, distances } => {
                let d = *distances
                    .get(node.index())
                    .ok_or_else(|| Error::ShapeMismatch(format!("no distance for node {node}")))?;
                params.prr(d)
            }
            ChannelSource::Trace { series, table } => Ok(table.prr(series.value(node, frame))),
            ChannelSource::Tabulated(rows) => {
                let row = rows
                    .get(node.index())
                    .filter(|r| !r.is_empty())
                    .ok_or_else(|| Error::ShapeMismatch(format!("no PRR row for node {node}")))?;
                let idx = (frame.max(1) as usize - 1).min(row.len() - 1);
                Ok(row[idx])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> AnalyticChannelParams<f64> {
        AnalyticChannelParams {
            p_tx: 1e-3,
            n0: 1e-12,
            ..AnalyticChannelParams::default()
        }
    }

    #[test]
    fn k1_at_2_4_ghz() {
        let p = unit();
        // Second arithmetic path: 20·log10(4π d/λ) at d = 1 m is the free-space
        // loss in dB.
        let lambda = 299_792_458.0 / 2.4e9;
        assert_relative_eq!(p.wavelength(), 0.124_913_5, max_relative = 1e-6);
        let fspl_db = 20.0 * (4.0 * std::f64::consts::PI / lambda).log10();
        let k1 = p.k1().unwrap();
        assert_relative_eq!(10.0 * k1.log10(), fspl_db, max_relative = 1e-12);
        assert_relative_eq!(k1, 1.012e4, max_relative = 1e-3);
    }

    #[test]
    fn k1_identity_and_scaling() {
        let four_pi = 4.0 * std::f64::consts::PI;
        // λ0 = 1 m, g_tx = g_rx = 4π
        let p = AnalyticChannelParams {
            g_tx: four_pi,
            g_rx: four_pi,
            f0: 1.0,
            c: 1.0,
            ..unit()
        };
        assert_relative_eq!(p.k1().unwrap(), 1.0, max_relative = 1e-12);

        let base = unit();
        let doubled = AnalyticChannelParams {
            f0: base.f0 * 2.0,
            ..base
        };
        assert_relative_eq!(
            doubled.k1().unwrap(),
            4.0 * base.k1().unwrap(),
            max_relative = 1e-12
        );

        let zero_gain = AnalyticChannelParams { g_tx: 0.0, ..base };
        assert!(zero_gain.k1().is_err());
    }

    #[test]
    fn path_loss_cases() {
        let p = unit();
        let k1 = p.k1().unwrap();
        assert_relative_eq!(p.path_loss(1.0).unwrap(), k1, max_relative = 1e-12);
        assert_relative_eq!(
            p.path_loss(20.0).unwrap(),
            4.0 * p.path_loss(10.0).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(p.path_loss(10.0).unwrap(), 1.012e6, max_relative = 1e-3);
        assert!(p.path_loss(0.0).is_err());
        assert!(p.path_loss(-3.0).is_err());
    }

    #[test]
    fn mean_snr_cases() {
        let base = unit();
        let k1 = base.k1().unwrap();
        let ident = AnalyticChannelParams {
            p_tx: k1 * base.n0,
            ..base
        };
        assert_relative_eq!(ident.mean_snr(1.0).unwrap(), 1.0, max_relative = 1e-12);

        let half = AnalyticChannelParams {
            p_tx: base.p_tx / 2.0,
            ..base
        };
        assert_relative_eq!(
            half.mean_snr(7.0).unwrap(),
            base.mean_snr(7.0).unwrap() / 2.0,
            max_relative = 1e-12
        );

        // 1 mW / (1e-12 W · 1.012e6) ≈ 988
        assert_relative_eq!(base.mean_snr(10.0).unwrap(), 988.1, max_relative = 1e-3);
    }

    #[test]
    fn prr_cases() {
        let p = unit();
        assert_relative_eq!(p.prr(1e-9).unwrap(), 1.0, max_relative = 1e-12);
        let k_src = p.k_src().unwrap();
        let d_half = (std::f64::consts::LN_2 / k_src).sqrt();
        assert_relative_eq!(p.prr(d_half).unwrap(), 0.5, max_relative = 1e-12);
        let d = 42.0;
        assert_relative_eq!(
            p.prr(d).unwrap(),
            (-p.gamma0 / p.mean_snr(d).unwrap()).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn default_params_half_prr_near_46_m() {
        let p = AnalyticChannelParams::<f64>::default();
        p.validate().unwrap();
        let q = p.prr(46.5).unwrap();
        assert!((q - 0.5).abs() < 0.01, "{q}");
    }

    #[test]
    fn works_in_single_precision() {
        let p = AnalyticChannelParams::<f32>::default();
        let q = p.prr(30.0).unwrap();
        let q64 = AnalyticChannelParams::<f64>::default().prr(30.0).unwrap();
        assert!((f64::from(q) - q64).abs() < 1e-5);
    }

    #[test]
    fn rssi_table() {
        let t = RssiPrrTable::<f64>::default_cliff();
        assert_eq!(t.prr(-120.0), 0.0);
        assert_eq!(t.prr(-40.0), 1.0);
        assert_eq!(t.prr(-90.0), 0.1);
        assert_eq!(t.prr(-87.0), 0.9);
        assert_relative_eq!(t.prr(-88.5), 0.5, max_relative = 1e-12);

        assert!(RssiPrrTable::<f64>::new(vec![]).is_err());
        assert!(RssiPrrTable::new(vec![(-90.0, 0.5), (-80.0, 0.4)]).is_err());
        assert!(RssiPrrTable::new(vec![(-90.0, 0.5), (-90.0, 0.6)]).is_err());
        assert!(RssiPrrTable::new(vec![(-90.0, 1.5)]).is_err());
    }

    #[test]
    fn tabulated_holds_last_frame() {
        let src = ChannelSource::Tabulated(vec![vec![0.5, 0.7]]);
        assert_eq!(src.prr(NodeId(1), 1).unwrap(), 0.5);
        assert_eq!(src.prr(NodeId(1), 2).unwrap(), 0.7);
        assert_eq!(src.prr(NodeId(1), 9).unwrap(), 0.7);
        assert!(src.prr(NodeId(2), 1).is_err());
    }

    #[test]
    fn trace_source_maps_through_table() {
        let trace = RssiTrace {
            samples: vec![
                RssiSample {
                    node_id: 1,
                    frame: 1,
                    rssi_dbm: -95.0,
                },
                RssiSample {
                    node_id: 1,
                    frame: 3,
                    rssi_dbm: -80.0,
                },
            ],
        };
        let src = ChannelSource::trace(&trace, RssiPrrTable::default_cliff()).unwrap();
        assert_eq!(src.prr(NodeId(1), 2).unwrap(), 0.0);
        assert_eq!(src.prr(NodeId(1), 3).unwrap(), 1.0);
    }
}
