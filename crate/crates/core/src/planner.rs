//! Turns a feature request into an ordered condition plan along the bug path,
//! together with the input (witness) that satisfies all of it.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fcg::{BugPathSelection, Fcg};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("invalid feature config: {0}")]
    InvalidConfig(String),
    #[error("threshold {threshold:#04x} with `{op}` admits no byte")]
    InfeasibleThreshold { op: Cmp, threshold: u8 },
    #[error("bug path offers {available} if slots but {required} are needed")]
    NotEnoughSlots { available: u32, required: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BugKind {
    #[default]
    #[serde(rename = "cwe761")]
    Cwe761,
}

impl BugKind {
    pub fn cwe(self) -> u32 {
        match self {
            BugKind::Cwe761 => 761,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteRange {
    pub min: u32,
    pub max: u32,
}

/// Length-plus-modular-sum checksum parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChecksumParams {
    pub length: u32,
    pub modulus: u32,
    pub residue: u32,
}

impl Default for ChecksumParams {
    fn default() -> Self {
        ChecksumParams { length: 7, modulus: 8, residue: 3 }
    }
}

impl ChecksumParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.length == 0 {
            return Err("checksum length must be positive".into());
        }
        if self.modulus < 2 {
            return Err("checksum modulus must be at least 2".into());
        }
        if self.residue >= self.modulus {
            return Err("checksum residue must be below the modulus".into());
        }
        if u64::from(self.residue) > 255 * u64::from(self.length) {
            return Err("checksum residue is unreachable with this block length".into());
        }
        Ok(())
    }

    pub fn accepts(&self, block: &[u8]) -> bool {
        block.len() == self.length as usize
            && block.iter().map(|&b| u64::from(b)).sum::<u64>() % u64::from(self.modulus)
                == u64::from(self.residue)
    }

    /// A random block that passes the checksum.
    pub fn satisfying_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let len = self.length as usize;
        let max_sum = 255 * len as u64;
        let (m, r) = (u64::from(self.modulus), u64::from(self.residue));
        let choices = (max_sum - r) / m + 1;
        let mut remaining = r + m * rng.gen_range(0..choices);
        // spread the target sum over the block, then fix up what is left
        let mut block: Vec<u8> = (0..len)
            .map(|_| {
                let b = rng.gen_range(0..=remaining.min(255)) as u8;
                remaining -= u64::from(b);
                b
            })
            .collect();
        for b in block.iter_mut() {
            let add = remaining.min(255 - u64::from(*b));
            *b += add as u8;
            remaining -= add;
        }
        debug_assert_eq!(remaining, 0);
        block
    }
}

/// Requested feature counts for one generated program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub seed: u64,
    /// Number of execution paths; one more than the input-related conditions.
    pub p: u32,
    #[serde(default)]
    pub m: u32,
    #[serde(default)]
    pub k: u32,
    #[serde(default = "default_magic_len")]
    pub magic_len: ByteRange,
    #[serde(default)]
    pub checksum: ChecksumParams,
    #[serde(default)]
    pub bug_kind: BugKind,
}

fn default_magic_len() -> ByteRange {
    ByteRange { min: 1, max: 3 }
}

impl FeatureConfig {
    pub fn new(seed: u64, p: u32, m: u32, k: u32) -> Self {
        FeatureConfig {
            seed,
            p,
            m,
            k,
            magic_len: default_magic_len(),
            checksum: ChecksumParams::default(),
            bug_kind: BugKind::Cwe761,
        }
    }

    /// Input-related conditions on the bug path.
    pub fn c(&self) -> u32 {
        self.p.saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |s: &str| Err(PlanError::InvalidConfig(s.to_string()));
        if self.p == 0 {
            return bad("p must be at least 1");
        }
        if self.m + self.k > self.c() {
            return bad("m + k must not exceed p - 1");
        }
        if self.magic_len.min == 0 || self.magic_len.min > self.magic_len.max {
            return bad("magic_len must be a non-empty range of positive lengths");
        }
        if self.k > 0 {
            self.checksum.validate().map_err(PlanError::InvalidConfig)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }

    pub fn holds(self, lhs: u8, rhs: u8) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConditionKind {
    Normal { op: Cmp, threshold: u8 },
    Magic { bytes: Vec<u8> },
    Checksum(ChecksumParams),
    AlwaysTrue,
}

impl ConditionKind {
    /// A single-byte comparison; rejects comparisons no byte can satisfy.
    pub fn normal(op: Cmp, threshold: u8) -> Result<Self, PlanError> {
        match (op, threshold) {
            (Cmp::Gt, u8::MAX) | (Cmp::Lt, 0) => Err(PlanError::InfeasibleThreshold { op, threshold }),
            _ => Ok(ConditionKind::Normal { op, threshold }),
        }
    }

    /// Bytes of input this condition reads.
    pub fn width(&self) -> usize {
        match self {
            ConditionKind::Normal { .. } => 1,
            ConditionKind::Magic { bytes } => bytes.len(),
            ConditionKind::Checksum(p) => p.length as usize,
            ConditionKind::AlwaysTrue => 0,
        }
    }

    pub fn consumes_input(&self) -> bool {
        !matches!(self, ConditionKind::AlwaysTrue)
    }

    pub fn accepts(&self, window: &[u8]) -> bool {
        match self {
            ConditionKind::Normal { op, threshold } => window.len() == 1 && op.holds(window[0], *threshold),
            ConditionKind::Magic { bytes } => window == bytes.as_slice(),
            ConditionKind::Checksum(p) => p.accepts(window),
            ConditionKind::AlwaysTrue => true,
        }
    }
}

/// Builds the checksum condition for `params`.
pub fn make_checksum(params: ChecksumParams) -> ConditionKind {
    ConditionKind::Checksum(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputWindow {
    pub offset: usize,
    pub width: usize,
}

impl InputWindow {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.width
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionSpec {
    pub function: String,
    /// Index of the IF along the function's deepest nested chain.
    pub slot: u32,
    pub kind: ConditionKind,
    pub window: Option<InputWindow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugPathSpec {
    pub conditions: Vec<ConditionSpec>,
    pub witness: Vec<u8>,
    pub total_input_len: usize,
}

impl BugPathSpec {
    pub fn input_conditions(&self) -> impl Iterator<Item = &ConditionSpec> {
        self.conditions.iter().filter(|c| c.kind.consumes_input())
    }

    /// True when `input` (zero-padded to the input length) passes every
    /// condition.
    pub fn satisfied_by(&self, input: &[u8]) -> bool {
        let mut buf = input.to_vec();
        buf.resize(buf.len().max(self.total_input_len), 0);
        self.conditions.iter().all(|c| match c.window {
            Some(w) => c.kind.accepts(&buf[w.range()]),
            None => true,
        })
    }
}

/// Plans conditions for the selected bug path.
///
/// The first `c` IF slots in path order consume input; `m` of them are
/// magic values and `k` checksums at uniformly drawn positions, the rest are
/// single-byte comparisons. Leftover slots become `if (1)`. Plans whose
/// conditions an all-zero input would satisfy are redrawn.
pub fn plan_conditions<R: Rng + ?Sized>(
    fcg: &Fcg,
    selection: &BugPathSelection,
    config: &FeatureConfig,
    rng: &mut R,
) -> Result<BugPathSpec, PlanError> {
    config.validate()?;
    let c = config.c();
    let slots: Vec<(String, u32)> = selection
        .hosts()
        .iter()
        .flat_map(|f| (0..fcg.node_weight(f)).map(move |j| (f.clone(), j)))
        .collect();
    if (slots.len() as u32) < c {
        return Err(PlanError::NotEnoughSlots { available: slots.len() as u32, required: c });
    }

    let special = (config.m + config.k) as usize;
    let picks = index::sample(rng, c as usize, special).into_vec();
    let mut roles = vec![Role::Normal; c as usize];
    for (n, at) in picks.into_iter().enumerate() {
        roles[at] = if n < config.m as usize { Role::Magic } else { Role::Checksum };
    }

    loop {
        let spec = draw_plan(&slots, &roles, config, rng)?;
        if c == 0 || !spec.satisfied_by(&[]) {
            return Ok(spec);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Normal,
    Magic,
    Checksum,
}

/// Thresholds stay inside printable ASCII.
const THRESHOLD_RANGE: std::ops::RangeInclusive<u8> = 0x20..=0x7e;

fn draw_plan<R: Rng + ?Sized>(
    slots: &[(String, u32)],
    roles: &[Role],
    config: &FeatureConfig,
    rng: &mut R,
) -> Result<BugPathSpec, PlanError> {
    let mut conditions = Vec::with_capacity(slots.len());
    let mut witness = Vec::new();
    for (i, (function, slot)) in slots.iter().enumerate() {
        let (kind, block) = match roles.get(i) {
            None => (ConditionKind::AlwaysTrue, Vec::new()),
            Some(Role::Normal) => {
                let op = if rng.gen_bool(0.5) { Cmp::Lt } else { Cmp::Gt };
                let threshold = rng.gen_range(THRESHOLD_RANGE);
                let kind = ConditionKind::normal(op, threshold)?;
                let byte = match op {
                    Cmp::Gt => rng.gen_range(threshold + 1..=u8::MAX),
                    Cmp::Lt => rng.gen_range(0..threshold),
                };
                (kind, vec![byte])
            }
            Some(Role::Magic) => {
                let len = rng.gen_range(config.magic_len.min..=config.magic_len.max);
                let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
                (ConditionKind::Magic { bytes: bytes.clone() }, bytes)
            }
            Some(Role::Checksum) => {
                (make_checksum(config.checksum), config.checksum.satisfying_block(rng))
            }
        };
        let window = kind.consumes_input().then_some(InputWindow { offset: witness.len(), width: block.len() });
        witness.extend_from_slice(&block);
        conditions.push(ConditionSpec { function: function.clone(), slot: *slot, kind, window });
    }
    Ok(BugPathSpec { total_input_len: witness.len(), witness, conditions })
}
