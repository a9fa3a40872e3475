//! Deterministic greybox fuzzing simulator over manifest models.

mod campaign;
mod energy;
mod mutate;

pub use campaign::{
    detect_cycle_explosion, run_campaign, run_campaign_with, Budget, CampaignMetrics, CampaignOptions,
    CampaignSummary, CycleRow, DEFAULT_STARTER, LOG_HEADER,
};
pub use energy::{energy, EnergyRounding, Mode, ScheduleParams, SelectionRule};
pub use mutate::{mutate, mutate_in_place};
