use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::energy::{energy, Mode, ScheduleParams, SelectionRule};
use super::mutate::mutate_in_place;
use crate::manifest::Manifest;
use crate::oracle::{Oracle, OracleError, PathId};

pub const DEFAULT_STARTER: &[u8] = b"Hello World";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_execs: u64,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: u64,
}

fn default_max_cycles() -> u64 {
    1_000_000
}

impl Budget {
    pub fn execs(max_execs: u64) -> Self {
        Budget { max_execs, max_cycles: default_max_cycles() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignOptions {
    pub max_mutations: u32,
    /// Zero-input cycles in a row that count as cycle explosion.
    pub explosion_threshold: u64,
    /// End the campaign once explosion is detected. Under the default
    /// selection rule the zero-energy state never recovers.
    pub stop_on_explosion: bool,
    #[serde(with = "hex::serde")]
    pub starter: Vec<u8>,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            max_mutations: 8,
            explosion_threshold: 1000,
            stop_on_explosion: true,
            starter: DEFAULT_STARTER.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRow {
    pub cycle: u64,
    pub execs_cycle: u64,
    pub execs_total: u64,
    pub queue_len: usize,
    pub paths_found: usize,
    pub bug_found: bool,
    pub zero_streak: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignMetrics {
    pub mode: Mode,
    pub seed: u64,
    pub total_execs: u64,
    pub cycles_completed: u64,
    pub paths_found: usize,
    pub bug_found_at_exec: Option<u64>,
    pub zero_input_cycle_streak: u64,
    /// Longest zero-input streak seen at any point.
    pub max_zero_streak: u64,
    pub cycle_explosion: bool,
    /// Executions per path index (`0..c` noise, `c` the bug).
    pub path_hits: Vec<u64>,
    pub log: Vec<CycleRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub mode: Mode,
    pub seed: u64,
    pub total_execs: u64,
    pub cycles: u64,
    pub paths: usize,
    pub bug_found_at_exec: Option<u64>,
    pub cycle_explosion: bool,
}

pub const LOG_HEADER: &str = "cycle,execs_cycle,execs_total,queue_len,paths_found,bug_found,zero_streak";

impl CampaignMetrics {
    pub fn bug_found(&self) -> bool {
        self.bug_found_at_exec.is_some()
    }

    pub fn summary(&self) -> CampaignSummary {
        CampaignSummary {
            mode: self.mode,
            seed: self.seed,
            total_execs: self.total_execs,
            cycles: self.cycles_completed,
            paths: self.paths_found,
            bug_found_at_exec: self.bug_found_at_exec,
            cycle_explosion: self.cycle_explosion,
        }
    }

    pub fn log_csv(&self) -> String {
        let mut out = String::from(LOG_HEADER);
        out.push('\n');
        for r in &self.log {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.cycle,
                r.execs_cycle,
                r.execs_total,
                r.queue_len,
                r.paths_found,
                u8::from(r.bug_found),
                r.zero_streak
            );
        }
        out
    }
}

pub fn detect_cycle_explosion(metrics: &CampaignMetrics, threshold: u64) -> bool {
    metrics.zero_input_cycle_streak >= threshold
}

struct Seed {
    input: Vec<u8>,
    path: usize,
    s: u32,
}

/// Runs one campaign seeded with `seed`.
pub fn run_campaign(
    manifest: &Manifest,
    schedule: &ScheduleParams,
    budget: Budget,
    options: &CampaignOptions,
    seed: u64,
) -> Result<CampaignMetrics, OracleError> {
    let oracle = Oracle::new(manifest)?;
    Ok(run_campaign_with(&oracle, schedule, budget, options, seed, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Greybox loop over a decoded oracle. Seeds found during a cycle join
/// the queue and are fuzzed in that same cycle.
pub fn run_campaign_with<R: Rng + ?Sized>(
    oracle: &Oracle,
    schedule: &ScheduleParams,
    budget: Budget,
    options: &CampaignOptions,
    seed: u64,
    rng: &mut R,
) -> CampaignMetrics {
    let c = oracle.c();
    let mut hits = vec![0u64; c as usize + 1];
    let mut metrics = CampaignMetrics {
        mode: schedule.mode,
        seed,
        total_execs: 0,
        cycles_completed: 0,
        paths_found: 0,
        bug_found_at_exec: None,
        zero_input_cycle_streak: 0,
        max_zero_streak: 0,
        cycle_explosion: false,
        path_hits: Vec::new(),
        log: Vec::new(),
    };

    let mut starter = options.starter.clone();
    starter.resize(oracle.input_len(), 0);
    let verdict = oracle.evaluate(&starter);
    let first = verdict.path_id.index(c);
    hits[first] = 1;
    metrics.total_execs = 1;
    metrics.paths_found = 1;
    if verdict.path_id == PathId::Bug {
        metrics.bug_found_at_exec = Some(1);
    }
    let mut queue = vec![Seed { input: starter, path: first, s: 0 }];
    let mut buf = Vec::with_capacity(oracle.input_len());

    let mut cycle = 0;
    let mut done = metrics.bug_found() || metrics.total_execs >= budget.max_execs;
    while !done && metrics.cycles_completed < budget.max_cycles {
        cycle += 1;
        let mut execs_cycle = 0;
        let mut i = 0;
        'queue: while i < queue.len() {
            let next_s = queue[i].s.saturating_add(1);
            let e = energy(schedule, next_s, hits[queue[i].path]);
            if e >= 1 || schedule.selection == SelectionRule::EverySelection {
                queue[i].s = next_s;
            }
            for _ in 0..e {
                if metrics.total_execs >= budget.max_execs {
                    done = true;
                    break 'queue;
                }
                buf.clear();
                buf.extend_from_slice(&queue[i].input);
                mutate_in_place(&mut buf, rng, options.max_mutations);
                let v = oracle.evaluate(&buf);
                let path = v.path_id.index(c);
                metrics.total_execs += 1;
                execs_cycle += 1;
                hits[path] += 1;
                if hits[path] == 1 {
                    metrics.paths_found += 1;
                    queue.push(Seed { input: buf.clone(), path, s: 0 });
                }
                if v.triggers_bug {
                    metrics.bug_found_at_exec = Some(metrics.total_execs);
                    done = true;
                    break 'queue;
                }
            }
            i += 1;
        }
        if !done {
            metrics.cycles_completed += 1;
        }
        if execs_cycle == 0 {
            metrics.zero_input_cycle_streak += 1;
        } else {
            metrics.zero_input_cycle_streak = 0;
        }
        metrics.max_zero_streak = metrics.max_zero_streak.max(metrics.zero_input_cycle_streak);
        metrics.cycle_explosion |= detect_cycle_explosion(&metrics, options.explosion_threshold);
        metrics.log.push(CycleRow {
            cycle,
            execs_cycle,
            execs_total: metrics.total_execs,
            queue_len: queue.len(),
            paths_found: metrics.paths_found,
            bug_found: metrics.bug_found(),
            zero_streak: metrics.zero_input_cycle_streak,
        });
        if metrics.total_execs >= budget.max_execs || (metrics.cycle_explosion && options.stop_on_explosion) {
            done = true;
        }
    }
    metrics.path_hits = hits;
    metrics
}
