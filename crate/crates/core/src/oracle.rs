//! Decides from a manifest alone which path an input takes and whether it
//! reaches the planted bug.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::manifest::{Manifest, ManifestError};
use crate::planner::{ConditionKind, InputWindow};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    MalformedManifest(#[from] ManifestError),
    #[error("input condition {index} is unsatisfiable or always true")]
    DegenerateCondition { index: usize },
}

/// Index of the first failed input condition, or the bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathId {
    Failed(u32),
    Bug,
}

impl PathId {
    /// Dense index in `0..=c`, with the bug at `c`.
    pub fn index(self, c: u32) -> usize {
        match self {
            PathId::Failed(i) => i as usize,
            PathId::Bug => c as usize,
        }
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathId::Failed(i) => write!(f, "{i}"),
            PathId::Bug => f.write_str("BUG"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub path_id: PathId,
    pub triggers_bug: bool,
    /// Bytes read by the conditions evaluated before the decision.
    pub consumed_bytes: usize,
}

#[derive(Debug, Clone)]
struct Check {
    kind: ConditionKind,
    window: InputWindow,
}

/// A manifest decoded once so that evaluation does not allocate.
#[derive(Debug, Clone)]
pub struct Oracle {
    checks: Vec<Check>,
    input_len: usize,
}

fn byte_at(input: &[u8], i: usize) -> u8 {
    input.get(i).copied().unwrap_or(0)
}

fn accepts_padded(kind: &ConditionKind, input: &[u8], w: InputWindow) -> bool {
    match kind {
        ConditionKind::Normal { op, threshold } => op.holds(byte_at(input, w.offset), *threshold),
        ConditionKind::Magic { bytes } => bytes.iter().enumerate().all(|(i, &b)| byte_at(input, w.offset + i) == b),
        ConditionKind::Checksum(p) => {
            let sum: u64 = w.range().map(|i| u64::from(byte_at(input, i))).sum();
            w.width == p.length as usize && sum % u64::from(p.modulus) == u64::from(p.residue)
        }
        ConditionKind::AlwaysTrue => true,
    }
}

impl Oracle {
    pub fn new(manifest: &Manifest) -> Result<Self, OracleError> {
        let spec = manifest.validate()?;
        let checks = spec
            .conditions
            .into_iter()
            .filter_map(|c| c.window.map(|window| Check { kind: c.kind, window }))
            .collect();
        Ok(Oracle { checks, input_len: manifest.input_len })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    /// Number of input-consuming conditions.
    pub fn c(&self) -> u32 {
        self.checks.len() as u32
    }

    pub fn evaluate(&self, input: &[u8]) -> Verdict {
        let input = &input[..input.len().min(self.input_len)];
        let mut consumed = 0;
        for (i, check) in self.checks.iter().enumerate() {
            consumed += check.window.width;
            if !accepts_padded(&check.kind, input, check.window) {
                return Verdict { path_id: PathId::Failed(i as u32), triggers_bug: false, consumed_bytes: consumed };
            }
        }
        Verdict { path_id: PathId::Bug, triggers_bug: true, consumed_bytes: consumed }
    }
}

pub fn evaluate(manifest: &Manifest, input: &[u8]) -> Result<Verdict, OracleError> {
    Ok(Oracle::new(manifest)?.evaluate(input))
}

fn satisfiable(kind: &ConditionKind) -> bool {
    match kind {
        ConditionKind::Normal { op, threshold } => (0..=u8::MAX).any(|b| op.holds(b, *threshold)),
        ConditionKind::Magic { bytes } => !bytes.is_empty(),
        ConditionKind::Checksum(p) => {
            p.modulus > 0 && p.residue < p.modulus && u64::from(p.residue) <= 255 * u64::from(p.length)
        }
        ConditionKind::AlwaysTrue => true,
    }
}

fn falsifiable(kind: &ConditionKind) -> bool {
    match kind {
        ConditionKind::Normal { op, threshold } => (0..=u8::MAX).any(|b| !op.holds(b, *threshold)),
        ConditionKind::Magic { bytes } => !bytes.is_empty(),
        // sums range over at least 256 consecutive values
        ConditionKind::Checksum(p) => p.modulus >= 2 && p.length >= 1,
        ConditionKind::AlwaysTrue => false,
    }
}

/// Counts reachable verdicts: each input condition may fail (one noise
/// path each) and passing all of them reaches the bug. Windows are
/// disjoint, so every outcome is reachable once each condition can both
/// pass and fail.
pub fn count_feasible_paths(manifest: &Manifest) -> Result<u64, OracleError> {
    let spec = manifest.validate()?;
    let mut count = 1;
    for (index, c) in spec.input_conditions().enumerate() {
        if !satisfiable(&c.kind) || !falsifiable(&c.kind) {
            return Err(OracleError::DegenerateCondition { index });
        }
        count += 1;
    }
    Ok(count)
}

/// A window content that fails `kind`, built from a satisfying one.
fn falsify(kind: &ConditionKind, block: &[u8]) -> Vec<u8> {
    let mut out = block.to_vec();
    match kind {
        ConditionKind::Normal { threshold, .. } => out[0] = *threshold,
        ConditionKind::Magic { bytes } => out[0] = bytes[0] ^ 0xff,
        ConditionKind::Checksum(_) => match out.iter().position(|&b| b < u8::MAX) {
            Some(i) => out[i] += 1,
            None => out[0] -= 1,
        },
        ConditionKind::AlwaysTrue => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathOutcome {
    pub path_id: PathId,
    /// An input that takes this path.
    pub input: Vec<u8>,
}

/// One concrete input per outcome, each confirmed by evaluation: the
/// witness for the bug, and the witness with condition `i` falsified for
/// noise path `i`.
pub fn enumerate_paths(manifest: &Manifest) -> Result<Vec<PathOutcome>, OracleError> {
    count_feasible_paths(manifest)?;
    let spec = manifest.validate()?;
    let oracle = Oracle::new(manifest)?;
    let mut outcomes = Vec::with_capacity(manifest.p as usize);
    for c in spec.input_conditions() {
        let w = c.window.expect("input conditions carry windows");
        let mut input = spec.witness.clone();
        let block = falsify(&c.kind, &input[w.range()]);
        input[w.range()].copy_from_slice(&block);
        outcomes.push(PathOutcome { path_id: oracle.evaluate(&input).path_id, input });
    }
    outcomes.push(PathOutcome { path_id: oracle.evaluate(&spec.witness).path_id, input: spec.witness });
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triage {
    /// 1 when any input reaches the bug; programs carry a single bug.
    pub bug_count: u32,
    pub witnesses: Vec<Vec<u8>>,
}

pub fn triage_crashes<I, B>(manifest: &Manifest, inputs: I) -> Result<Triage, OracleError>
where
    I: IntoIterator<Item = B>,
    B: AsRef<[u8]>,
{
    let oracle = Oracle::new(manifest)?;
    let witnesses: Vec<Vec<u8>> = inputs
        .into_iter()
        .filter(|i| oracle.evaluate(i.as_ref()).triggers_bug)
        .map(|i| i.as_ref().to_vec())
        .collect();
    Ok(Triage { bug_count: u32::from(!witnesses.is_empty()), witnesses })
}
