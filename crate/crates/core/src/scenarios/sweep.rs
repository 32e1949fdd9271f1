use std::time::Instant;

use rayon::prelude::*;

use super::{run_slab, run_two_sphere_compression, PDeltaRecord, SlabRunParams, TwoSphereParams};
use crate::error::SimulationError;
use crate::real::Real;

/// Scenario repeated at every level of a sweep; its own SDP and VDP are
/// replaced by the level's.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepBase<T: Real> {
    TwoSphere(TwoSphereParams<T>),
    Slab(Box<SlabRunParams<T>>),
}

impl<T: Real> SweepBase<T> {
    fn run(&self, sdp: T, vdp: T) -> Result<PDeltaRecord<T>, SimulationError> {
        match self {
            SweepBase::TwoSphere(base) => {
                let mut p = *base;
                p.sdp = sdp;
                p.vdp = vdp;
                run_two_sphere_compression(&p)
            }
            SweepBase::Slab(base) => {
                let mut p = (**base).clone();
                p.sdp = sdp;
                p.vdp = vdp;
                let mut slab = p.build()?;
                run_slab(&mut slab, &p)
                    .map(|o| o.indentation.record)
                    .map_err(|f| f.error)
            }
        }
    }
}

/// Two-way discretization study around a base run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepParams<T: Real> {
    pub base: SweepBase<T>,
    /// Target node spacings, coarse to fine (mm).
    pub sdp_ladder: Vec<T>,
    /// Grid steps, coarse to fine (mm).
    pub vdp_ladder: Vec<T>,
    /// Overlap at which P is reported (mm).
    pub delta_star: T,
    /// Relative band around the finest run that counts as converged.
    pub tolerance: T,
}

/// One run of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T: Real> {
    /// `sdp<k>` or `vdp<k>`, `k` counting from the coarsest level.
    pub level: String,
    pub sdp_target: T,
    /// Achieved node spacing; equals the target when the run failed.
    pub sdp: T,
    pub vdp: T,
    pub nodes: usize,
    pub max_load: T,
    pub load_at_delta_star: T,
    pub runtime_s: f64,
    pub error: Option<String>,
    pub record: Option<PDeltaRecord<T>>,
}

/// All runs plus the detected convergence point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable<T: Real> {
    pub rows: Vec<SweepRow<T>>,
    /// Coarsest achieved SDP whose run, and every finer one, is within the
    /// tolerance of the finest.
    pub converged_sdp: Option<T>,
    pub converged_vdp: Option<T>,
}

impl<T: Real> SweepTable<T> {
    pub fn sdp_rows(&self) -> impl Iterator<Item = &SweepRow<T>> {
        self.rows.iter().filter(|r| r.level.starts_with("sdp"))
    }

    pub fn vdp_rows(&self) -> impl Iterator<Item = &SweepRow<T>> {
        self.rows.iter().filter(|r| r.level.starts_with("vdp"))
    }

    /// Converged VDP over converged SDP.
    pub fn ratio(&self) -> Option<T> {
        Some(self.converged_vdp? / self.converged_sdp?)
    }

    /// `|maxP(k) − maxP(finest)|` never grows along the ladder by more than
    /// `noise` times the finest maximum.
    pub fn is_monotone(rows: &[&SweepRow<T>], noise: T) -> bool {
        let Some(finest) = rows.last() else {
            return true;
        };
        let slack = noise * finest.max_load;
        let diffs: Vec<T> = rows
            .iter()
            .map(|r| (r.max_load - finest.max_load).abs())
            .collect();
        diffs.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Runs every SDP level at the finest VDP, then every VDP level at the
/// finest SDP. Failed runs are recorded and the sweep goes on.
pub fn run_convergence_sweep<T: Real>(params: &SweepParams<T>) -> Result<SweepTable<T>, SimulationError> {
    let (Some(&sdp_fine), Some(&vdp_fine)) = (params.sdp_ladder.last(), params.vdp_ladder.last()) else {
        return Err(SimulationError::InvalidScenario("sweep ladders must not be empty".into()));
    };
    let descending = |l: &[T]| l.windows(2).all(|w| w[1] < w[0]);
    if !descending(&params.sdp_ladder) || !descending(&params.vdp_ladder) {
        return Err(SimulationError::InvalidScenario(
            "sweep ladders must be strictly descending".into(),
        ));
    }
    let mut jobs: Vec<(String, T, T)> = Vec::new();
    for (k, &s) in params.sdp_ladder.iter().enumerate() {
        jobs.push((format!("sdp{k}"), s, vdp_fine));
    }
    for (k, &v) in params.vdp_ladder.iter().enumerate() {
        jobs.push((format!("vdp{k}"), sdp_fine, v));
    }
    let rows: Vec<SweepRow<T>> = jobs
        .into_par_iter()
        .map(|(level, sdp, vdp)| run_level(params, level, sdp, vdp))
        .collect();

    let sdp_rows: Vec<_> = rows.iter().filter(|r| r.level.starts_with("sdp")).collect();
    let vdp_rows: Vec<_> = rows.iter().filter(|r| r.level.starts_with("vdp")).collect();
    let converged_sdp = converged(&sdp_rows, params.tolerance).map(|r| r.sdp);
    let converged_vdp = converged(&vdp_rows, params.tolerance).map(|r| r.vdp);
    Ok(SweepTable {
        rows,
        converged_sdp,
        converged_vdp,
    })
}

fn run_level<T: Real>(params: &SweepParams<T>, level: String, sdp: T, vdp: T) -> SweepRow<T> {
    let start = Instant::now();
    let outcome = params.base.run(sdp, vdp);
    let runtime_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(record) => SweepRow {
            level,
            sdp_target: sdp,
            sdp: record.metadata.sdp,
            vdp,
            nodes: record.metadata.nodes_per_grain,
            max_load: record.max_load(),
            load_at_delta_star: record.load_at(params.delta_star).unwrap_or(T::zero()),
            runtime_s,
            error: None,
            record: Some(record),
        },
        Err(e) => SweepRow {
            level,
            sdp_target: sdp,
            sdp,
            vdp,
            nodes: 0,
            max_load: T::zero(),
            load_at_delta_star: T::zero(),
            runtime_s,
            error: Some(e.to_string()),
            record: None,
        },
    }
}

/// Coarsest row such that it and every finer row are within `tol` of the
/// finest.
fn converged<'a, T: Real>(rows: &[&'a SweepRow<T>], tol: T) -> Option<&'a SweepRow<T>> {
    let finest = rows.last()?;
    if finest.error.is_some() || !(finest.max_load > T::zero()) {
        return None;
    }
    let within = |r: &SweepRow<T>| {
        r.error.is_none() && (r.max_load - finest.max_load).abs() <= tol * finest.max_load
    };
    let mut k = rows.len() - 1;
    while k > 0 && within(rows[k - 1]) {
        k -= 1;
    }
    Some(rows[k])
}
