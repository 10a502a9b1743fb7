//! Stored solutions: snapshot times, spectral states in stepping variables
//! and a per-snapshot norm record.

use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::lp::{besov_norm_spectral, BesovSpec, DyadicFamily};
use crate::model::{AState, Formulation, ModelParams, PrimitiveState, State, TildeState};
use crate::norms::sobolev;
use crate::snapshot;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRecord {
    pub time: f64,
    pub h2: [f64; 2],
    pub besov: [f64; 2],
    pub linf: [f64; 2],
    pub mass: f64,
    pub min_rho: f64,
    pub min_theta: f64,
}

/// Where and why a run stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct Breach {
    pub step: usize,
    pub time: f64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    params: ModelParams,
    formulation: Formulation,
    family: Arc<DyadicFamily>,
    times: Vec<f64>,
    states: Vec<[SpectralField; 2]>,
    norms: Vec<NormRecord>,
    breach: Option<Breach>,
}

impl Trajectory {
    pub fn new(grid: &Grid, params: &ModelParams, formulation: Formulation) -> Self {
        Self {
            grid: grid.clone(),
            params: *params,
            formulation,
            family: Arc::new(DyadicFamily::new(grid)),
            times: Vec::new(),
            states: Vec::new(),
            norms: Vec::new(),
            breach: None,
        }
    }

    /// Appends a snapshot; times must increase strictly.
    pub fn push(&mut self, time: f64, state: [SpectralField; 2]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(time > last) {
                return Err(Error::InvalidTime(format!(
                    "snapshot time {time} does not follow {last}"
                )));
            }
        }
        for s in &state {
            if !s.grid().same_as(&self.grid) {
                return Err(Error::InvalidGrid("snapshot grid differs from trajectory grid".into()));
            }
        }
        let record = self.record(time, &state)?;
        self.times.push(time);
        self.states.push(state);
        self.norms.push(record);
        Ok(())
    }

    pub(crate) fn flag(&mut self, breach: Breach) {
        self.breach = Some(breach);
    }

    fn record(&self, time: f64, state: &[SpectralField; 2]) -> Result<NormRecord> {
        let critical = BesovSpec::critical();
        let real = [state[0].inverse(), state[1].inverse()];
        let (rho, theta) = self.physical_values(&real);
        let mut rec = NormRecord {
            time,
            h2: [0.0; 2],
            besov: [0.0; 2],
            linf: [0.0; 2],
            mass: rho.iter().sum::<f64>() * self.grid.cell_volume(),
            min_rho: rho.iter().copied().fold(f64::INFINITY, f64::min),
            min_theta: theta.iter().copied().fold(f64::INFINITY, f64::min),
        };
        for c in 0..2 {
            rec.h2[c] = sobolev(&state[c], 2.0);
            rec.besov[c] = besov_norm_spectral(&self.family, &state[c], critical)?;
            rec.linf[c] = real[c].max_abs();
        }
        Ok(rec)
    }

    /// Pointwise `(ρ, θ)` from stepping variables, without positivity checks.
    fn physical_values(&self, real: &[RealField; 2]) -> (Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let (u0, u1) = (real[0].values(), real[1].values());
        match self.formulation {
            Formulation::AForm => (
                u0.iter().map(|a| 1.0 / (1.0 + a)).collect(),
                u1.iter().map(|t| 1.0 + t).collect(),
            ),
            _ => (
                u0.iter().map(|r| r + p.rho_bar).collect(),
                u1.iter().map(|t| t + p.theta_bar).collect(),
            ),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Formulation of the stored stepping variables.
    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn family(&self) -> &DyadicFamily {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn norms(&self) -> &[NormRecord] {
        &self.norms
    }

    pub fn breach(&self) -> Option<&Breach> {
        self.breach.as_ref()
    }

    pub fn spectral(&self, i: usize) -> &[SpectralField; 2] {
        &self.states[i]
    }

    pub fn spectral_states(&self) -> &[[SpectralField; 2]] {
        &self.states
    }

    pub fn last_spectral(&self) -> Option<&[SpectralField; 2]> {
        self.states.last()
    }

    /// Snapshot `i` as a state of the stored formulation.
    pub fn state(&self, i: usize) -> State {
        let first = self.states[i][0].inverse();
        let second = self.states[i][1].inverse();
        let p = &self.params;
        match self.formulation {
            Formulation::AForm => State::AForm(AState { a: first, theta: second }),
            Formulation::Tilde => State::Tilde(TildeState { rho: first, theta: second }),
            Formulation::Primitive => State::Primitive(PrimitiveState {
                rho: first.map(|r| r + p.rho_bar),
                theta: second.map(|t| t + p.theta_bar),
            }),
        }
    }

    pub fn primitive(&self, i: usize) -> Result<PrimitiveState> {
        self.state(i).to_primitive(&self.params)
    }

    pub fn tilde(&self, i: usize) -> Result<TildeState> {
        Ok(self.primitive(i)?.to_tilde(&self.params))
    }

    pub fn a_state(&self, i: usize) -> Result<AState> {
        match self.state(i) {
            State::AForm(a) => Ok(a),
            other => other.to_primitive(&self.params)?.to_a_form(&self.params),
        }
    }

    /// The norm series as CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (c0, c1) = match self.formulation {
            Formulation::AForm => ("a", "theta"),
            _ => ("rho", "theta"),
        };
        writeln!(
            w,
            "time,h2_{c0},h2_{c1},besov_{c0},besov_{c1},linf_{c0},linf_{c1},mass,min_rho,min_theta"
        )?;
        for r in &self.norms {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.time, r.h2[0], r.h2[1], r.besov[0], r.besov[1], r.linf[0], r.linf[1], r.mass, r.min_rho, r.min_theta
            )?;
        }
        Ok(())
    }

    /// Writes every `stride`-th snapshot as `<c>_<index>.thg` for both
    /// components. Returns the number of files written.
    pub fn write_snapshots(&self, dir: &Path, stride: usize) -> Result<usize> {
        if stride == 0 {
            return Err(Error::InvalidTime("snapshot stride must be at least 1".into()));
        }
        std::fs::create_dir_all(dir)?;
        let names = match self.formulation {
            Formulation::AForm => ["a", "theta"],
            _ => ["rho", "theta"],
        };
        let mut count = 0;
        for i in (0..self.len()).step_by(stride) {
            for (c, name) in names.iter().enumerate() {
                let path = dir.join(format!("{name}_{i:05}.thg"));
                snapshot::save(&self.states[i][c].inverse(), self.times[i], &path)?;
                count += 1;
            }
        }
        Ok(count)
    }
}
