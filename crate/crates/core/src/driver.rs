//! Time-stepping loop with running diagnostics.

use crate::config::RunConfig;
use crate::diagnostics::{record, Accumulators, DiagnosticsRecord};
use crate::error::Result;
use crate::mesh::{init_state, State};
use crate::solver::{step_forced, Forcing, NoForcing, StepReport};

#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: RunConfig,
    pub state: State,
    pub accumulators: Accumulators,
    pub steps: usize,
    last_dt: f64,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let state = init_state(&config)?;
        Ok(Self::from_state(config, state))
    }

    pub fn from_state(config: RunConfig, state: State) -> Self {
        Simulation {
            config,
            state,
            accumulators: Accumulators::default(),
            steps: 0,
            last_dt: 0.0,
        }
    }

    pub fn finished(&self) -> bool {
        self.state.t >= self.config.t_end
    }

    pub fn advance(&mut self) -> Result<StepReport> {
        self.advance_with(&NoForcing, None)
    }

    /// One accepted step, optionally forced and with a fixed trial `dt`.
    pub fn advance_with(
        &mut self,
        forcing: &dyn Forcing,
        fixed_dt: Option<f64>,
    ) -> Result<StepReport> {
        let (next, report) = step_forced(&self.state, &self.config, forcing, fixed_dt)?;
        self.accumulators
            .absorb(&report, &next, &self.config.params)?;
        self.state = next;
        self.steps += 1;
        self.last_dt = report.dt;
        Ok(report)
    }

    pub fn record(&self) -> Result<DiagnosticsRecord> {
        record(
            &self.state,
            &self.config.params,
            &self.accumulators,
            self.last_dt,
        )
    }

    /// Runs to `t_end`, returning the initial record followed by one record per step.
    pub fn run_to_end(&mut self) -> Result<Vec<DiagnosticsRecord>> {
        let mut records = vec![self.record()?];
        while !self.finished() {
            self.advance()?;
            records.push(self.record()?);
        }
        Ok(records)
    }
}
