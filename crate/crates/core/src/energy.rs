//! Stand-in mesoscopic energy and delay model.
//!
//! Fuel use per kilometre is a quadratic in speed for each motorized mode,
//! and link delay follows the BPR volume-delay relation. Default
//! coefficients are illustrative and not calibrated against any network.

use serde::{Deserialize, Serialize};

use crate::mode::ModeLabel;
use crate::netgraph::TransportGraph;
use crate::planner::Plan;

/// Speeds outside this range are clamped before evaluating a fuel curve.
pub const SPEED_DOMAIN_MPS: (f64, f64) = (1.0, 40.0);

/// `litres/km = a0 + a1·v + a2·v²`, with `v` in m/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuelCurve {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl FuelCurve {
    pub const fn constant(rate: f64) -> FuelCurve {
        FuelCurve { a0: rate, a1: 0.0, a2: 0.0 }
    }

    pub fn rate(&self, speed_mps: f64) -> f64 {
        let v = speed_mps.clamp(SPEED_DOMAIN_MPS.0, SPEED_DOMAIN_MPS.1);
        self.a0 + self.a1 * v + self.a2 * v * v
    }

    /// Minimum of the curve over the speed domain.
    fn min_rate(&self) -> f64 {
        let (lo, hi) = SPEED_DOMAIN_MPS;
        let mut m = self.rate(lo).min(self.rate(hi));
        if self.a2 > 0.0 {
            let vertex = -self.a1 / (2.0 * self.a2);
            if (lo..=hi).contains(&vertex) {
                m = m.min(self.rate(vertex));
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuelModel {
    pub drive: FuelCurve,
    pub ride: FuelCurve,
    pub motorcycle: FuelCurve,
    /// Whole-vehicle bus curve; a rider is charged `bus_factor` of it.
    pub bus: FuelCurve,
    pub bus_factor: f64,
}

impl Default for FuelModel {
    fn default() -> Self {
        let car = FuelCurve { a0: 0.14, a1: -0.0055, a2: 0.0001 };
        FuelModel {
            drive: car,
            ride: car,
            motorcycle: FuelCurve { a0: 0.05, a1: -0.0015, a2: 0.00003 },
            bus: FuelCurve { a0: 0.6, a1: -0.02, a2: 0.0004 },
            bus_factor: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid energy model: {0}")]
pub struct InvalidModel(pub &'static str);

impl FuelModel {
    pub fn validate(&self) -> Result<(), InvalidModel> {
        for c in [self.drive, self.ride, self.motorcycle, self.bus] {
            if ![c.a0, c.a1, c.a2].iter().all(|x| x.is_finite()) {
                return Err(InvalidModel("fuel coefficients must be finite"));
            }
            if c.min_rate() < 0.0 {
                return Err(InvalidModel("fuel rate must be non-negative over the speed domain"));
            }
        }
        if !(0.0..=1.0).contains(&self.bus_factor) {
            return Err(InvalidModel("bus factor must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Litres used by one traveler crossing `length_m` of the given mode.
    pub fn edge_fuel(&self, mode: ModeLabel, length_m: f64, speed_mps: f64) -> f64 {
        let km = length_m / 1000.0;
        match mode {
            ModeLabel::Walk | ModeLabel::Cycle | ModeLabel::Subway => 0.0,
            ModeLabel::Drive => self.drive.rate(speed_mps) * km,
            ModeLabel::Ride => self.ride.rate(speed_mps) * km,
            ModeLabel::Motorcycle => self.motorcycle.rate(speed_mps) * km,
            ModeLabel::Bus => self.bus.rate(speed_mps) * km * self.bus_factor,
        }
    }
}

/// Sum of edge fuel over the plan, with `speeds[i]` used for step `i`.
pub fn plan_energy(model: &FuelModel, plan: &Plan, speeds: &[f64]) -> f64 {
    assert_eq!(speeds.len(), plan.steps.len(), "one speed per plan step");
    plan.steps
        .iter()
        .zip(speeds)
        .map(|(s, &v)| model.edge_fuel(s.mode, s.length_m, v))
        .sum()
}

/// Free-flow speed of every step: the edge's fixed speed, or its in-vehicle
/// speed for timetabled edges.
pub fn free_flow_speeds(graph: &TransportGraph, plan: &Plan) -> alloc::vec::Vec<f64> {
    plan.steps.iter().map(|s| graph.nominal_speed(s.edge)).collect()
}

/// Fuel saved by travelling on `alternative` instead of `baseline`; negative
/// when the alternative burns more.
pub fn energy_saving(
    model: &FuelModel,
    baseline: (&Plan, &[f64]),
    alternative: (&Plan, &[f64]),
) -> f64 {
    plan_energy(model, baseline.0, baseline.1) - plan_energy(model, alternative.0, alternative.1)
}

/// BPR volume-delay parameters for one link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeDelay {
    pub alpha: f64,
    pub beta: f64,
    pub capacity_vph: f64,
    pub free_flow_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelayParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for DelayParams {
    fn default() -> Self {
        DelayParams { alpha: 0.15, beta: 4.0 }
    }
}

impl DelayParams {
    pub fn validate(&self) -> Result<(), InvalidModel> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(InvalidModel("delay alpha must be non-negative"));
        }
        if !(self.beta.is_finite() && self.beta >= 1.0) {
            return Err(InvalidModel("delay beta must be at least 1"));
        }
        Ok(())
    }

    pub fn link(&self, capacity_vph: f64, free_flow_s: f64) -> VolumeDelay {
        VolumeDelay { alpha: self.alpha, beta: self.beta, capacity_vph, free_flow_s }
    }
}

/// Congestion delay above free flow, in seconds, at `volume_vph`.
pub fn link_delay(vd: &VolumeDelay, volume_vph: f64) -> f64 {
    if volume_vph <= 0.0 {
        return 0.0;
    }
    vd.free_flow_s * vd.alpha * libm::pow(volume_vph / vd.capacity_vph, vd.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{Edge, EdgeIdx, Node, Traversal};
    use alloc::vec;
    use alloc::vec::Vec;

    fn constant_drive(rate: f64) -> FuelModel {
        FuelModel { drive: FuelCurve::constant(rate), ..FuelModel::default() }
    }

    fn chain(modes: &[(ModeLabel, f64)]) -> (TransportGraph, Plan) {
        let nodes = (0..=modes.len())
            .map(|i| Node { id: alloc::format!("n{i}"), lat: 0.0, lon: i as f64 * 0.01 })
            .collect();
        let edges = modes
            .iter()
            .enumerate()
            .map(|(i, &(mode, length_m))| Edge {
                id: alloc::format!("e{i}"),
                from: alloc::format!("n{i}"),
                to: alloc::format!("n{}", i + 1),
                mode,
                length_m,
                traversal: Traversal::FixedSpeed { speed_mps: 10.0 },
                capacity_vph: None,
            })
            .collect();
        let g = TransportGraph::new(nodes, edges, vec![]).unwrap();
        let mut t = 0;
        let mut steps = Vec::new();
        for i in 0..modes.len() {
            steps.push((EdgeIdx(i as u32), t));
            t += g.duration(EdgeIdx(i as u32), t).unwrap();
        }
        let p = Plan::from_steps(&g, &steps).unwrap();
        (g, p)
    }

    #[test]
    fn defaults_are_valid() {
        FuelModel::default().validate().unwrap();
        DelayParams::default().validate().unwrap();
    }

    #[test]
    fn negative_rate_rejected() {
        let m = FuelModel { drive: FuelCurve { a0: 0.01, a1: -0.01, a2: 0.0 }, ..FuelModel::default() };
        assert!(m.validate().is_err());
    }

    #[test]
    fn edge_fuel_by_mode() {
        let m = constant_drive(0.08);
        assert_eq!(m.edge_fuel(ModeLabel::Walk, 5000.0, 1.4), 0.0);
        assert_eq!(m.edge_fuel(ModeLabel::Subway, 5000.0, 20.0), 0.0);
        assert!((m.edge_fuel(ModeLabel::Drive, 1000.0, 13.0) - 0.08).abs() < 1e-15);
        let m = FuelModel { bus: FuelCurve::constant(0.5), bus_factor: 0.05, ..FuelModel::default() };
        assert!((m.edge_fuel(ModeLabel::Bus, 2000.0, 8.0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn plan_energy_adds_edges() {
        let m = FuelModel { bus: FuelCurve::constant(0.5), ..constant_drive(0.08) };
        let (_, walk) = chain(&[(ModeLabel::Walk, 700.0), (ModeLabel::Walk, 300.0)]);
        assert_eq!(plan_energy(&m, &walk, &[1.4, 1.4]), 0.0);
        let (_, drive) = chain(&[(ModeLabel::Drive, 1000.0), (ModeLabel::Drive, 1000.0)]);
        assert!((plan_energy(&m, &drive, &[10.0, 10.0]) - 0.16).abs() < 1e-15);
        let (_, mixed) = chain(&[(ModeLabel::Walk, 200.0), (ModeLabel::Bus, 2000.0), (ModeLabel::Walk, 100.0)]);
        assert!((plan_energy(&m, &mixed, &[1.4, 8.0, 1.4]) - 0.05).abs() < 1e-15);

        assert_eq!(energy_saving(&m, (&drive, &[10.0, 10.0]), (&drive, &[10.0, 10.0])), 0.0);
        assert!((energy_saving(&m, (&drive, &[10.0, 10.0]), (&walk, &[1.4, 1.4])) - 0.16).abs() < 1e-15);
        assert!((energy_saving(&m, (&drive, &[10.0, 10.0]), (&mixed, &[1.4, 8.0, 1.4])) - 0.11).abs() < 1e-15);
    }

    #[test]
    fn bpr_excess_delay() {
        let vd = VolumeDelay { alpha: 0.15, beta: 4.0, capacity_vph: 1800.0, free_flow_s: 60.0 };
        assert_eq!(link_delay(&vd, 0.0), 0.0);
        assert!((link_delay(&vd, 1800.0) - 9.0).abs() < 1e-12);
        let mut last = 0.0;
        for v in (0..40).map(|i| i as f64 * 100.0) {
            let d = link_delay(&vd, v);
            assert!(d >= last);
            last = d;
        }
    }
}
