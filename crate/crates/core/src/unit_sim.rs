//! Quasi-static pull test of an IB Magnet.
//!
//! A crosshead rises from zero and pulls either the frame or the control
//! rod through a hook. No inertia is modelled; the crosshead speed only
//! affects how long a real test would take.
//!
//! Frame pull lifts the whole unit: the hook sees the attraction at gap
//! `d` plus the suspended weight. Rod pull moves the rod against the
//! internal force while the frame stays attached; when the rod reaches the
//! stroke end it seats on the frame and the test continues as a frame pull
//! from the opened gap.

use crate::error::{Error, Result};
use crate::magnetic_spring::{argmax, reduction_ratio, MagneticSpringPair};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PullMode {
    Frame,
    Rod,
}

impl PullMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PullMode::Frame => "frame",
            PullMode::Rod => "rod",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitConfig<T = f64> {
    pub pair: MagneticSpringPair<T>,
    /// Weight of everything except the control rod, N.
    pub frame_weight: T,
    pub rod_weight: T,
    pub jig_weight: T,
    pub stroke: T,
    /// Crosshead travel before the hook engages; zero disables the slack
    /// segment.
    pub hook_slack: T,
}

impl<T: Scalar> UnitConfig<T> {
    pub fn new(
        pair: MagneticSpringPair<T>,
        frame_weight: T,
        rod_weight: T,
        jig_weight: T,
        stroke: T,
    ) -> Result<Self> {
        for (name, w) in [
            ("frame", frame_weight),
            ("rod", rod_weight),
            ("jig", jig_weight),
        ] {
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(Error::Config(format!(
                    "{name} weight must be >= 0, got {w}"
                )));
            }
        }
        if !(stroke > T::zero()) || stroke > pair.stroke {
            return Err(Error::Config(format!(
                "stroke {stroke} must lie in (0, {}] covered by the magnet pair",
                pair.stroke
            )));
        }
        Ok(Self {
            pair,
            frame_weight,
            rod_weight,
            jig_weight,
            stroke,
            hook_slack: T::zero(),
        })
    }

    /// Takes stroke and weights from the pair.
    pub fn from_pair(pair: MagneticSpringPair<T>, jig_weight: T) -> Result<Self> {
        let frame = pair.unit_weight - pair.rod_weight;
        let (rod, stroke) = (pair.rod_weight, pair.stroke);
        Self::new(pair, frame, rod, jig_weight, stroke)
    }

    pub fn with_hook_slack(mut self, slack: T) -> Result<Self> {
        if !(slack >= T::zero()) || !slack.is_finite() {
            return Err(Error::Config(format!(
                "hook slack must be >= 0, got {slack}"
            )));
        }
        self.hook_slack = slack;
        Ok(self)
    }

    /// Unit plus jig.
    pub fn suspended_weight(&self) -> T {
        self.frame_weight + self.rod_weight + self.jig_weight
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullSample<T = f64> {
    pub displacement: T,
    /// Force beyond the weight the hook is carrying at this sample, N.
    pub net: T,
    pub carried: T,
}

impl<T: Scalar> PullSample<T> {
    /// What the load cell reads.
    pub fn force(&self) -> T {
        self.net + self.carried
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullTestProfile<T = f64> {
    pub mode: PullMode,
    pub samples: Vec<PullSample<T>>,
    /// Largest net force; in rod mode only the rod phase counts.
    pub peak_net: T,
    pub peak_position: T,
    /// Load after full detach: the suspended weight.
    pub plateau: T,
    /// Crosshead position where the rod seats on the frame (rod mode).
    pub edge: Option<T>,
}

impl<T: Scalar> PullTestProfile<T> {
    /// Samples the peak is taken over: all of them in frame mode, those up
    /// to the last rod reading in rod mode.
    pub fn peak_window(&self) -> &[PullSample<T>] {
        match self.edge {
            Some(e) => {
                let end = self.samples.partition_point(|s| s.displacement < e);
                &self.samples[..(end + 1).min(self.samples.len())]
            }
            None => &self.samples,
        }
    }
}

pub fn simulate_pull<T: Scalar>(
    config: &UnitConfig<T>,
    mode: PullMode,
    sweep_end: T,
    step: T,
) -> Result<PullTestProfile<T>> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::Config(format!("sweep step must be > 0, got {step}")));
    }
    let slack = config.hook_slack;
    if !(sweep_end >= config.stroke + slack) || !sweep_end.is_finite() {
        return Err(Error::Config(format!(
            "sweep end {sweep_end} must reach the stroke end {}",
            config.stroke + slack
        )));
    }
    let attraction = &config.pair.attraction;
    if !attraction.contains(sweep_end - slack) {
        let (lo, hi) = attraction.domain();
        return Err(Error::Config(format!(
            "attraction curve domain [{lo}, {hi}] does not cover gaps up to {}",
            sweep_end - slack
        )));
    }

    let total = config.suspended_weight();
    let on_rod = config.rod_weight + config.jig_weight;
    let edge = slack + config.stroke;
    let frame_sample = |u: T, gap: T| PullSample {
        displacement: u,
        net: attraction.force_unchecked(gap),
        carried: total,
    };

    let mut samples = Vec::new();
    let mut push = |u: T| {
        let gap = u - slack;
        if gap < T::zero() {
            samples.push(PullSample {
                displacement: u,
                net: T::zero(),
                carried: config.jig_weight,
            });
            return;
        }
        match mode {
            PullMode::Frame => samples.push(frame_sample(u, gap)),
            PullMode::Rod if u < edge => samples.push(PullSample {
                displacement: u,
                net: config.pair.repulsion.force_unchecked(gap) - attraction.force_unchecked(gap),
                carried: on_rod,
            }),
            PullMode::Rod if u == edge => {
                // Rising edge: last rod-pull reading, then the frame-pull one.
                let s = config.stroke;
                samples.push(PullSample {
                    displacement: u,
                    net: config.pair.repulsion.force_unchecked(s) - attraction.force_unchecked(s),
                    carried: on_rod,
                });
                samples.push(frame_sample(u, gap));
            }
            PullMode::Rod => samples.push(frame_sample(u, gap)),
        }
    };

    let mut grid: Vec<T> = (0..)
        .map(|k| step * T::count(k))
        .take_while(|&u| u <= sweep_end)
        .collect();
    if grid.last().is_some_and(|&u| u < sweep_end) {
        grid.push(sweep_end);
    }
    if mode == PullMode::Rod && !grid.contains(&edge) {
        let at = grid.partition_point(|&u| u < edge);
        grid.insert(at, edge);
    }
    for u in grid {
        push(u);
    }

    let mut profile = PullTestProfile {
        mode,
        samples,
        peak_net: T::zero(),
        peak_position: T::zero(),
        plateau: total,
        edge: (mode == PullMode::Rod).then_some(edge),
    };
    let window = profile.peak_window();
    let i = argmax(window.iter().map(|s| s.net));
    (profile.peak_net, profile.peak_position) = (window[i].net, window[i].displacement);
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetachSummary<T = f64> {
    pub peak_net: T,
    pub peak_position: T,
    /// Peak relative to the frame-pull peak, when one was supplied.
    pub ratio_vs: Option<T>,
}

/// Net peak of a profile, and its reduction ratio against `frame` if given.
pub fn detach_summary<T: Scalar>(
    profile: &PullTestProfile<T>,
    frame: Option<&PullTestProfile<T>>,
) -> Result<DetachSummary<T>> {
    if profile.samples.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let window = profile.peak_window();
    let i = argmax(window.iter().map(|s| s.net));
    let peak_net = window[i].net;
    let ratio_vs = match frame {
        Some(f) => {
            let frame_summary = detach_summary(f, None)?;
            Some(reduction_ratio(peak_net, frame_summary.peak_net)?)
        }
        None => None,
    };
    Ok(DetachSummary {
        peak_net,
        peak_position: window[i].displacement,
        ratio_vs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force_curve::{ForceCurve, PowerLawCurve};

    fn attraction() -> ForceCurve {
        PowerLawCurve::through_points((0.0, 8.4), (7.5, 0.5), 2.0)
            .unwrap()
            .into()
    }

    fn small(scale: f64) -> UnitConfig {
        let a = attraction();
        let r = a.scaled(scale).unwrap();
        let pair = MagneticSpringPair::new(a, r, 7.5, 0.1, 0.434).unwrap();
        UnitConfig::from_pair(pair, 0.05).unwrap()
    }

    #[test]
    fn frame_pull_peaks_at_contact() {
        let cfg = small(1.0 + 1.1 / 8.4);
        let p = simulate_pull(&cfg, PullMode::Frame, 15.0, 0.1).unwrap();
        assert!((p.peak_net - 8.4).abs() < 1e-12);
        assert_eq!(p.peak_position, 0.0);
        let first = p.samples[0];
        assert_eq!(
            first.force(),
            attraction().eval_force(0.0).unwrap() + cfg.suspended_weight()
        );
        assert_eq!(p.plateau, cfg.suspended_weight());
        assert_eq!(p.samples.last().unwrap().displacement, 15.0);
    }

    #[test]
    fn rod_pull_has_single_rising_edge() {
        let cfg = small(1.0 + 1.1 / 8.4);
        let p = simulate_pull(&cfg, PullMode::Rod, 15.0, 0.1).unwrap();
        assert!((p.peak_net - 1.1).abs() < 1e-12);
        let at_edge: Vec<_> = p.samples.iter().filter(|s| s.displacement == 7.5).collect();
        assert_eq!(at_edge.len(), 2);
        assert!(at_edge[1].force() > at_edge[0].force());
        let rises = p
            .samples
            .windows(2)
            .filter(|w| w[1].force() > w[0].force())
            .count();
        assert_eq!(rises, 1);
    }

    #[test]
    fn rod_peak_ignores_the_frame_phase() {
        // Weaker repulsion: the rod phase is all negative, the post-edge
        // frame reading is not.
        let cfg = small(0.9);
        let p = simulate_pull(&cfg, PullMode::Rod, 15.0, 0.5).unwrap();
        assert!(p.peak_net < 0.0);
        assert!(p.peak_position <= 7.5);
        let s = detach_summary(&p, None).unwrap();
        assert_eq!(s.peak_net, p.peak_net);
    }

    #[test]
    fn ideal_pair_rod_pull_is_flat_until_edge() {
        let pair = MagneticSpringPair::ideal(attraction(), 7.5, 0.0, 0.0).unwrap();
        let cfg = UnitConfig::from_pair(pair, 0.0).unwrap();
        let p = simulate_pull(&cfg, PullMode::Rod, 15.0, 0.25).unwrap();
        for s in p.samples.iter().take_while(|s| s.displacement < 7.5) {
            assert_eq!(s.force(), 0.0);
        }
    }

    #[test]
    fn edge_inserted_off_grid() {
        let cfg = small(1.1);
        let p = simulate_pull(&cfg, PullMode::Rod, 15.0, 0.4).unwrap();
        assert_eq!(
            p.samples.iter().filter(|s| s.displacement == 7.5).count(),
            2
        );
        assert!(p
            .samples
            .windows(2)
            .all(|w| w[1].displacement >= w[0].displacement));
        assert_eq!(p.samples.last().unwrap().displacement, 15.0);
    }

    #[test]
    fn hook_slack_leads_with_jig_weight() {
        let cfg = small(1.1).with_hook_slack(1.0).unwrap();
        let p = simulate_pull(&cfg, PullMode::Frame, 16.0, 0.5).unwrap();
        assert_eq!(p.samples[0].force(), cfg.jig_weight);
        assert_eq!(p.samples[1].force(), cfg.jig_weight);
        assert_eq!(p.peak_position, 1.0);
    }

    #[test]
    fn config_errors() {
        let cfg = small(1.1);
        assert!(matches!(
            simulate_pull(&cfg, PullMode::Rod, 5.0, 0.1),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            simulate_pull(&cfg, PullMode::Rod, 15.0, 0.0),
            Err(Error::Config(_))
        ));
        let pair = cfg.pair.clone();
        assert!(UnitConfig::new(pair.clone(), -1.0, 0.0, 0.0, 7.5).is_err());
        assert!(UnitConfig::new(pair, 0.0, 0.0, 0.0, 8.0).is_err());
    }

    #[test]
    fn summary_of_profiles() {
        let cfg = small(1.0 + 1.1 / 8.4);
        let frame = simulate_pull(&cfg, PullMode::Frame, 15.0, 0.1).unwrap();
        let rod = simulate_pull(&cfg, PullMode::Rod, 15.0, 0.1).unwrap();
        let s = detach_summary(&rod, Some(&frame)).unwrap();
        assert!((s.ratio_vs.unwrap() - 1.1 / 8.4).abs() < 1e-12);
        let f = detach_summary(&frame, None).unwrap();
        assert_eq!(f.peak_position, frame.samples[0].displacement);
        assert!(f.ratio_vs.is_none());
    }

    #[test]
    fn summary_edge_cases() {
        let empty = PullTestProfile::<f64> {
            mode: PullMode::Rod,
            samples: vec![],
            peak_net: 0.0,
            peak_position: 0.0,
            plateau: 0.0,
            edge: None,
        };
        assert!(matches!(
            detach_summary(&empty, None),
            Err(Error::EmptyProfile)
        ));
        let zeros = PullTestProfile {
            samples: (0..5)
                .map(|i| PullSample {
                    displacement: i as f64,
                    net: 0.0,
                    carried: 0.0,
                })
                .collect(),
            ..empty
        };
        let s = detach_summary(&zeros, None).unwrap();
        assert_eq!(s.peak_net, 0.0);
        assert_eq!(s.peak_position, 0.0);
    }
}
