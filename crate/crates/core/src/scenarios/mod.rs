//! Drivers for the two-sphere compression test, the interlocked slab and
//! discretization sweeps.

mod slab;
mod sweep;
mod two_sphere;

pub use slab::{
    build_interlocked_slab, classify_mechanism, relax_under_gravity, run_indentation,
    run_indentation_with, run_slab, run_slab_with,
    IndentationFailure, IndentationParams, IndentationResult, Mechanism, RelaxParams,
    RelaxReport, Slab, SlabOutcome, SlabRunParams, SlabSpec, Snapshot,
};
pub use sweep::{run_convergence_sweep, SweepBase, SweepParams, SweepRow, SweepTable};
pub use two_sphere::{run_two_sphere_compression, run_two_sphere_compression_with, TwoSphereParams};

use crate::contact::{ContactFormulation, FormulationMode};
use crate::real::Real;

/// One point of a load–displacement curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PDeltaSample<T: Real> {
    /// s
    pub time: T,
    /// mm
    pub delta: T,
    /// N
    pub load: T,
    /// mJ
    pub kinetic_energy: T,
    pub contacts: usize,
}

/// Run parameters stored with a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordMetadata<T: Real> {
    pub scenario: String,
    pub formulation: ContactFormulation<T>,
    pub sdp: T,
    pub vdp: T,
    /// Surface nodes per grain of the node-carrying template.
    pub nodes_per_grain: usize,
    pub total_nodes: usize,
}

impl<T: Real> RecordMetadata<T> {
    pub fn mode(&self) -> FormulationMode {
        self.formulation.mode
    }
}

/// Load–displacement record of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct PDeltaRecord<T: Real> {
    pub metadata: RecordMetadata<T>,
    pub samples: Vec<PDeltaSample<T>>,
}

impl<T: Real> PDeltaRecord<T> {
    pub fn new(metadata: RecordMetadata<T>) -> Self {
        Self {
            metadata,
            samples: Vec::new(),
        }
    }

    pub fn max_load(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |m, s| m.max(s.load))
    }

    /// Load at displacement `delta`, linearly interpolated between samples.
    /// `None` outside the recorded range.
    pub fn load_at(&self, delta: T) -> Option<T> {
        let s = &self.samples;
        let idx = s.iter().position(|p| p.delta >= delta)?;
        if s[idx].delta == delta || idx == 0 {
            return (s[idx].delta == delta).then_some(s[idx].load);
        }
        let (a, b) = (&s[idx - 1], &s[idx]);
        let w = (delta - a.delta) / (b.delta - a.delta);
        Some(a.load + (b.load - a.load) * w)
    }

    /// Work done by the driver, `∫ P dδ` by the trapezoid rule (mJ).
    pub fn external_work(&self) -> T {
        let half = T::lit(0.5);
        self.samples.windows(2).fold(T::zero(), |acc, w| {
            acc + (w[0].load + w[1].load) * half * (w[1].delta - w[0].delta)
        })
    }

    /// Largest ratio of kinetic energy to the work done so far. Samples
    /// before the work reaches 1% of its final value are skipped, since the
    /// ratio is meaningless while almost no work has been done.
    pub fn max_kinetic_ratio(&self) -> T {
        let half = T::lit(0.5);
        let floor = self.external_work() * T::lit(0.01);
        let mut work = T::zero();
        let mut worst = T::zero();
        for w in self.samples.windows(2) {
            work += (w[0].load + w[1].load) * half * (w[1].delta - w[0].delta);
            if work > T::zero() && work >= floor {
                worst = worst.max(w[1].kinetic_energy / work);
            }
        }
        worst
    }
}
