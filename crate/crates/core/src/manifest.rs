//! Ground-truth manifest written next to every generated program.

use serde::{Deserialize, Serialize};

use crate::planner::{BugPathSpec, ChecksumParams, Cmp, ConditionKind, ConditionSpec, FeatureConfig, InputWindow};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed manifest: {0}")]
pub struct ManifestError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BugSite {
    pub cwe: u32,
    pub function: String,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionTag {
    Normal,
    Magic,
    Checksum,
    AlwaysTrue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestCondition {
    #[serde(rename = "fn")]
    pub function: String,
    pub slot: u32,
    pub kind: ConditionTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<Cmp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operand_hex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcgSummary {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub p: u32,
    pub c: u32,
    pub m: u32,
    pub k: u32,
    pub bug: BugSite,
    pub conditions: Vec<ManifestCondition>,
    pub witness_hex: String,
    pub input_len: usize,
    pub fcg: FcgSummary,
}

impl ManifestCondition {
    pub fn from_spec(spec: &ConditionSpec) -> Self {
        let mut out = ManifestCondition {
            function: spec.function.clone(),
            slot: spec.slot,
            kind: ConditionTag::AlwaysTrue,
            op: None,
            operand_hex: None,
            len: None,
            modulus: None,
            residue: None,
            offset: spec.window.map(|w| w.offset),
            width: spec.window.map(|w| w.width),
        };
        match &spec.kind {
            ConditionKind::Normal { op, threshold } => {
                out.kind = ConditionTag::Normal;
                out.op = Some(*op);
                out.operand_hex = Some(hex::encode([*threshold]));
            }
            ConditionKind::Magic { bytes } => {
                out.kind = ConditionTag::Magic;
                out.operand_hex = Some(hex::encode(bytes));
            }
            ConditionKind::Checksum(p) => {
                out.kind = ConditionTag::Checksum;
                out.len = Some(p.length);
                out.modulus = Some(p.modulus);
                out.residue = Some(p.residue);
            }
            ConditionKind::AlwaysTrue => {}
        }
        out
    }

    /// Rebuilds the planned condition, checking that the fields present
    /// match the tag.
    pub fn to_spec(&self) -> Result<ConditionSpec, ManifestError> {
        let bad = |what: &str| ManifestError(format!("condition {}#{}: {what}", self.function, self.slot));
        let window = match (self.offset, self.width) {
            (Some(offset), Some(width)) => Some(InputWindow { offset, width }),
            (None, None) => None,
            _ => return Err(bad("offset and width must appear together")),
        };
        let operand = || -> Result<Vec<u8>, ManifestError> {
            let text = self.operand_hex.as_deref().ok_or_else(|| bad("missing operand_hex"))?;
            hex::decode(text).map_err(|e| bad(&format!("operand_hex: {e}")))
        };
        let checksum_fields = self.len.is_some() || self.modulus.is_some() || self.residue.is_some();
        let kind = match self.kind {
            ConditionTag::Normal => {
                let op = self.op.ok_or_else(|| bad("normal condition without op"))?;
                let bytes = operand()?;
                if bytes.len() != 1 || checksum_fields {
                    return Err(bad("normal condition needs exactly one operand byte"));
                }
                ConditionKind::Normal { op, threshold: bytes[0] }
            }
            ConditionTag::Magic => {
                let bytes = operand()?;
                if bytes.is_empty() || self.op.is_some() || checksum_fields {
                    return Err(bad("magic condition needs a non-empty operand and nothing else"));
                }
                ConditionKind::Magic { bytes }
            }
            ConditionTag::Checksum => match (self.len, self.modulus, self.residue) {
                (Some(length), Some(modulus), Some(residue)) if self.op.is_none() && self.operand_hex.is_none() => {
                    let params = ChecksumParams { length, modulus, residue };
                    if length == 0 || modulus == 0 {
                        return Err(bad("checksum length and modulus must be positive"));
                    }
                    ConditionKind::Checksum(params)
                }
                _ => return Err(bad("checksum condition needs len, modulus and residue only")),
            },
            ConditionTag::AlwaysTrue => {
                if self.op.is_some() || self.operand_hex.is_some() || checksum_fields {
                    return Err(bad("always_true condition carries operands"));
                }
                ConditionKind::AlwaysTrue
            }
        };
        match (&kind, window) {
            (ConditionKind::AlwaysTrue, Some(_)) => return Err(bad("always_true condition reads input")),
            (ConditionKind::AlwaysTrue, None) => {}
            (_, None) => return Err(bad("input condition without a window")),
            (k, Some(w)) if k.width() != w.width => return Err(bad("window width does not match the condition")),
            _ => {}
        }
        Ok(ConditionSpec { function: self.function.clone(), slot: self.slot, kind, window })
    }
}

impl Manifest {
    pub fn build(config: &FeatureConfig, spec: &BugPathSpec, bug: BugSite, fcg: FcgSummary) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            seed: config.seed,
            p: config.p,
            c: config.c(),
            m: config.m,
            k: config.k,
            bug,
            conditions: spec.conditions.iter().map(ManifestCondition::from_spec).collect(),
            witness_hex: hex::encode(&spec.witness),
            input_len: spec.total_input_len,
            fcg,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        serde_json::from_str(text).map_err(|e| ManifestError(e.to_string()))
    }

    /// Pretty JSON with a trailing newline; stable byte-for-byte.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn witness(&self) -> Result<Vec<u8>, ManifestError> {
        hex::decode(&self.witness_hex).map_err(|e| ManifestError(format!("witness_hex: {e}")))
    }

    /// Checks internal consistency and returns the decoded condition plan.
    pub fn validate(&self) -> Result<BugPathSpec, ManifestError> {
        let bad = |s: String| Err(ManifestError(s));
        if self.version != MANIFEST_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.p != self.c + 1 {
            return bad(format!("p = {} but c = {}", self.p, self.c));
        }
        let conditions = self.conditions.iter().map(|c| c.to_spec()).collect::<Result<Vec<_>, _>>()?;
        let inputs: Vec<&ConditionSpec> = conditions.iter().filter(|c| c.kind.consumes_input()).collect();
        if inputs.len() != self.c as usize {
            return bad(format!("{} input conditions recorded, c = {}", inputs.len(), self.c));
        }
        let magic = inputs.iter().filter(|c| matches!(c.kind, ConditionKind::Magic { .. })).count();
        let sums = inputs.iter().filter(|c| matches!(c.kind, ConditionKind::Checksum(_))).count();
        if magic != self.m as usize || sums != self.k as usize {
            return bad(format!("found {magic} magic and {sums} checksum conditions, expected {} and {}", self.m, self.k));
        }
        let mut windows: Vec<InputWindow> = inputs.iter().filter_map(|c| c.window).collect();
        windows.sort_by_key(|w| w.offset);
        let mut end = 0;
        for w in &windows {
            if w.offset < end {
                return bad(format!("input window at offset {} overlaps another", w.offset));
            }
            end = w.offset + w.width;
        }
        if end > self.input_len {
            return bad(format!("input window ends at {end}, past input_len {}", self.input_len));
        }
        let witness = self.witness()?;
        if witness.len() != self.input_len {
            return bad(format!("witness has {} bytes, input_len is {}", witness.len(), self.input_len));
        }
        Ok(BugPathSpec { conditions, witness, total_input_len: self.input_len })
    }
}
