//! Harvesting (wireless power transfer and solar) and per-frame consumption.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EnergyConstants, NodeId, NodeState};
use crate::scalar::{Field, Scalar};
use crate::series::NodeSeries;

/// Closest distance at which the charger has been characterised, metres.
pub const MIN_CHARGER_DISTANCE_M: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WptParams<T> {
    /// Charger transmit power, W.
    pub p_tx_wpt: T,
    /// Distance efficiency factor in (0, 1].
    pub delta_d: T,
    /// Antenna-orientation efficiency factor in (0, 1].
    pub delta_theta: T,
    /// WPT channel power gain for this frame.
    pub channel_gain_sq: T,
    /// Seconds of charging per frame.
    pub tau_wpt: T,
}

impl<T: Field> WptParams<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |name, v: T| {
            if v > T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must lie in (0, 1], got {v:?}")))
            }
        };
        unit("delta_d", self.delta_d)?;
        unit("delta_theta", self.delta_theta)?;
        for (name, v) in [
            ("p_tx_wpt", self.p_tx_wpt),
            ("channel_gain_sq", self.channel_gain_sq),
            ("tau_wpt", self.tau_wpt),
        ] {
            if v < T::zero() {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Power delivered by the charger, W.
pub fn wpt_power<T: Field>(p: &WptParams<T>) -> T {
    p.delta_d * p.delta_theta * p.p_tx_wpt * p.channel_gain_sq
}

/// Energy harvested in one frame, J.
pub fn harvested_energy<T: Field>(p: &WptParams<T>, solar_power_w: T, tau_solar: T) -> T {
    wpt_power(p) * p.tau_wpt + solar_power_w * tau_solar
}

/// Applies one frame of consumption and harvest.
///
/// The result is capped at `e_max` (if any) and floored at zero; each cap or
/// floor hit increments `clamp_events`.
pub fn apply_frame_energy<T: Field>(
    node: &NodeState<T>,
    participated_rcap: bool,
    packets_sent: u32,
    harvest: T,
    constants: &EnergyConstants<T>,
    e_max: Option<T>,
) -> NodeState<T> {
    let mut next = node.clone();
    let mut energy =
        node.energy + harvest - T::from_count(u64::from(packets_sent)) * constants.e_tx;
    if participated_rcap {
        energy = energy - constants.rcap_cost();
        next.rcap_frames += 1;
    }
    if let Some(cap) = e_max {
        if energy > cap {
            energy = cap;
            next.clamp_events += 1;
        }
    }
    if energy < T::zero() {
        energy = T::zero();
        next.clamp_events += 1;
    }
    next.energy = energy;
    next.packets_sent += u64::from(packets_sent);
    next.harvested = next.harvested + harvest;
    next
}

/// Measured charger efficiency curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTable<T> {
    /// (metres, received mW), distance ascending.
    pub distance_curve: Vec<(T, T)>,
    /// (degrees, received mW), angle ascending within [0, 360).
    pub orientation_curve: Vec<(T, T)>,
}

impl<T: Scalar> EfficiencyTable<T> {
    pub fn validate(&self) -> Result<()> {
        check_curve("distance", &self.distance_curve)?;
        check_curve("orientation", &self.orientation_curve)?;
        let floor = T::lit(MIN_CHARGER_DISTANCE_M);
        if self.distance_curve[0].0 < floor {
            return Err(Error::InvalidTable(format!(
                "distance curve starts below {MIN_CHARGER_DISTANCE_M} m"
            )));
        }
        let full = T::lit(360.0);
        if self
            .orientation_curve
            .iter()
            .any(|(a, _)| *a < T::zero() || *a >= full)
        {
            return Err(Error::InvalidTable(
                "orientation keys must lie in [0, 360)".into(),
            ));
        }
        Ok(())
    }

    /// Normalised `(delta_d, delta_theta)` at charger distance `d` (m) and
    /// antenna angle `theta` (degrees).
    pub fn efficiency(&self, d: T, theta: T) -> Result<(T, T)> {
        self.validate()?;
        if d < T::lit(MIN_CHARGER_DISTANCE_M) {
            return Err(Error::OutOfRange {
                value: d.to_f64_lossy(),
                min: MIN_CHARGER_DISTANCE_M,
            });
        }
        let delta_d = normalised(
            &self.distance_curve,
            interp_clamped(&self.distance_curve, d),
        );
        let full = T::lit(360.0);
        let theta = ((theta % full) + full) % full;
        let delta_theta = normalised(
            &self.orientation_curve,
            interp_periodic(&self.orientation_curve, theta, full),
        );
        Ok((delta_d, delta_theta))
    }
}

pub fn efficiency_from_table<T: Scalar>(
    table: &EfficiencyTable<T>,
    d: T,
    theta: T,
) -> Result<(T, T)> {
    table.efficiency(d, theta)
}

fn check_curve<T: Scalar>(name: &str, curve: &[(T, T)]) -> Result<()> {
    if curve.is_empty() {
        return Err(Error::InvalidTable(format!("{name} curve is empty")));
    }
    if curve.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidTable(format!("{name} keys must increase")));
    }
    if curve.iter().any(|(_, p)| !(*p >= T::zero())) {
        return Err(Error::InvalidTable(format!(
            "{name} power must be non-negative"
        )));
    }
    if !curve.iter().any(|(_, p)| *p > T::zero()) {
        return Err(Error::InvalidTable(format!("{name} curve is all zero")));
    }
    Ok(())
}

fn normalised<T: Scalar>(curve: &[(T, T)], value: T) -> T {
    let peak = curve.iter().fold(T::zero(), |m, (_, p)| m.max(*p));
    (value / peak).max(T::min_positive_value()).min(T::one())
}

fn lerp<T: Scalar>((x0, y0): (T, T), (x1, y1): (T, T), x: T) -> T {
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

fn interp_clamped<T: Scalar>(curve: &[(T, T)], x: T) -> T {
    if x <= curve[0].0 {
        return curve[0].1;
    }
    let last = curve[curve.len() - 1];
    if x >= last.0 {
        return last.1;
    }
    let hi = curve.partition_point(|(k, _)| *k <= x);
    lerp(curve[hi - 1], curve[hi], x)
}

/// Interpolates on a circle of circumference `period`, wrapping between the
/// last and first breakpoints.
fn interp_periodic<T: Scalar>(curve: &[(T, T)], x: T, period: T) -> T {
    if curve.len() == 1 {
        return curve[0].1;
    }
    let first = curve[0];
    let last = curve[curve.len() - 1];
    if x < first.0 {
        return lerp((last.0 - period, last.1), first, x);
    }
    if x >= last.0 {
        return lerp(last, (first.0 + period, first.1), x);
    }
    interp_clamped(curve, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarSample<T> {
    pub node_id: u32,
    pub frame: u32,
    pub power_mw: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolarTrace<T> {
    pub samples: Vec<SolarSample<T>>,
    /// Seconds of solar charging per frame.
    pub tau_solar: T,
}

/// Solar input per node and frame, in watts.
#[derive(Debug, Clone)]
pub enum SolarSource<T> {
    None,
    Trace(NodeSeries<T>),
    /// Half-sine day: `peak * max(0, sin(2π t / day))` with `t` the frame
    /// start time in seconds; night for the second half of each day.
    Diurnal {
        peak_w: T,
        day_s: T,
        frame_s: T,
    },
}

impl<T: Scalar> SolarSource<T> {
    pub fn from_trace(trace: &SolarTrace<T>) -> Result<Self> {
        if trace.samples.iter().any(|s| s.power_mw < T::zero()) {
            return Err(Error::InvalidTable(
                "solar power must be non-negative".into(),
            ));
        }
        let series = NodeSeries::from_rows(
            trace
                .samples
                .iter()
                .map(|s| (s.node_id, s.frame, s.power_mw * T::lit(1e-3))),
        )?;
        Ok(SolarSource::Trace(series))
    }

    pub fn power_w(&self, node: NodeId, frame: u32) -> T {
        match self {
            SolarSource::None => T::zero(),
            SolarSource::Trace(series) => series.value(node, frame),
            SolarSource::Diurnal {
                peak_w,
                day_s,
                frame_s,
            } => {
                let t = T::from_count(u64::from(frame.saturating_sub(1))) * *frame_s;
                let phase = T::lit(2.0) * T::PI() * t / *day_s;
                *peak_w * phase.sin().max(T::zero())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wpt(delta_d: f64, delta_theta: f64, p: f64, gain: f64, tau: f64) -> WptParams<f64> {
        WptParams {
            p_tx_wpt: p,
            delta_d,
            delta_theta,
            channel_gain_sq: gain,
            tau_wpt: tau,
        }
    }

    #[test]
    fn wpt_power_cases() {
        assert_relative_eq!(wpt_power(&wpt(0.5, 0.5, 3.0, 1.0, 1.0)), 0.75);
        assert_eq!(wpt_power(&wpt(0.5, 0.5, 3.0, 0.0, 1.0)), 0.0);
        assert_eq!(wpt_power(&wpt(0.5, 0.5, 0.0, 1.0, 1.0)), 0.0);
        assert_relative_eq!(wpt_power(&wpt(1.0, 1.0, 2.5, 1.0, 1.0)), 2.5);
    }

    #[test]
    fn harvested_energy_cases() {
        assert_relative_eq!(
            harvested_energy(&wpt(0.5, 0.5, 3.0, 1.0, 10.0), 0.0, 0.0),
            7.5
        );
        assert_relative_eq!(
            harvested_energy(&wpt(0.5, 0.5, 3.0, 1.0, 0.0), 5e-3, 100.0),
            0.5
        );
        assert_eq!(
            harvested_energy(&wpt(0.5, 0.5, 3.0, 1.0, 0.0), 5e-3, 0.0),
            0.0
        );
    }

    #[test]
    fn wpt_params_validation() {
        assert!(wpt(0.5, 0.5, 3.0, 1.0, 1.0).validate().is_ok());
        assert!(wpt(0.0, 0.5, 3.0, 1.0, 1.0).validate().is_err());
        assert!(wpt(0.5, 1.5, 3.0, 1.0, 1.0).validate().is_err());
        assert!(wpt(0.5, 0.5, -3.0, 1.0, 1.0).validate().is_err());
    }

    fn node(energy: f64) -> NodeState<f64> {
        NodeState::new(NodeId(1), 100, energy, 1)
    }

    #[test]
    fn frame_energy_update() {
        let c = EnergyConstants::cc2420();
        let n = apply_frame_energy(&node(1.0), true, 100, 0.0, &c, Some(50.0));
        // 1 J - 0.05 mJ - 100 × 0.1 mJ, summed independently
        let expected = 1.0 - (0.03e-3 + 0.01e-3 + 0.01e-3) - 100.0 * 0.1e-3;
        assert_relative_eq!(n.energy, expected, max_relative = 1e-12);
        assert_relative_eq!(n.energy, 0.98995, max_relative = 1e-12);
        assert_eq!((n.rcap_frames, n.packets_sent, n.clamp_events), (1, 100, 0));

        let same = apply_frame_energy(&node(1.0), false, 0, 0.0, &c, Some(50.0));
        assert_eq!(same.energy, 1.0);

        let capped = apply_frame_energy(&node(49.0), false, 0, 5.0, &c, Some(50.0));
        assert_eq!(capped.energy, 50.0);
        assert_eq!(capped.clamp_events, 1);

        let floored = apply_frame_energy(&node(1e-3), true, 100, 0.0, &c, None);
        assert_eq!(floored.energy, 0.0);
        assert_eq!(floored.clamp_events, 1);
    }

    fn table() -> EfficiencyTable<f64> {
        EfficiencyTable {
            distance_curve: vec![(0.2, 40.0), (0.5, 20.0), (1.0, 5.0)],
            orientation_curve: vec![(0.0, 30.0), (90.0, 3.0), (180.0, 30.0), (270.0, 3.0)],
        }
    }

    #[test]
    fn efficiency_from_curves() {
        let t = table();
        let (dd, dt) = t.efficiency(0.2, 0.0).unwrap();
        assert_eq!((dd, dt), (1.0, 1.0));

        let (_, orth) = t.efficiency(0.5, 90.0).unwrap();
        assert_relative_eq!(orth, 0.1);
        let (_, aligned) = t.efficiency(0.5, 180.0).unwrap();
        assert!(orth < aligned);

        let (mid_d, mid_t) = t.efficiency(0.35, 45.0).unwrap();
        assert_relative_eq!(mid_d, (1.0 + 0.5) / 2.0);
        assert_relative_eq!(mid_t, (1.0 + 0.1) / 2.0);

        // wraps from 270° back to 0°
        let (_, wrap) = t.efficiency(0.5, 315.0).unwrap();
        assert_relative_eq!(wrap, (0.1 + 1.0) / 2.0);

        assert!(matches!(
            t.efficiency(0.1, 0.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn efficiency_table_validation() {
        let mut t = table();
        t.distance_curve[0].0 = 0.1;
        assert!(t.validate().is_err());
        let mut t = table();
        t.orientation_curve.push((360.0, 1.0));
        assert!(t.validate().is_err());
        let mut t = table();
        t.distance_curve.clear();
        assert!(t.validate().is_err());
    }

    #[test]
    fn diurnal_solar() {
        let s = SolarSource::Diurnal {
            peak_w: 2.0,
            day_s: 400.0,
            frame_s: 1.0,
        };
        assert_eq!(s.power_w(NodeId(1), 1), 0.0);
        assert_relative_eq!(s.power_w(NodeId(1), 101), 2.0, max_relative = 1e-12);
        assert_eq!(s.power_w(NodeId(1), 301), 0.0);
    }
}
