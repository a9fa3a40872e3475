//! C fragments embedded into generated programs.

use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("no binding for placeholder `{{{{{0}}}}}`")]
    MissingBinding(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateAsset {
    BugCwe761,
    ChecksumFn,
    InputPreamble,
    Filler,
}

impl TemplateAsset {
    pub const ALL: [TemplateAsset; 4] =
        [TemplateAsset::BugCwe761, TemplateAsset::ChecksumFn, TemplateAsset::InputPreamble, TemplateAsset::Filler];

    pub fn id(self) -> &'static str {
        match self {
            TemplateAsset::BugCwe761 => "BUG_CWE761",
            TemplateAsset::ChecksumFn => "CHECKSUM_FN",
            TemplateAsset::InputPreamble => "INPUT_PREAMBLE",
            TemplateAsset::Filler => "FILLER",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            TemplateAsset::BugCwe761 => include_str!("../templates/bug_cwe761.c"),
            TemplateAsset::ChecksumFn => include_str!("../templates/checksum_fn.c"),
            TemplateAsset::InputPreamble => include_str!("../templates/input_preamble.c"),
            TemplateAsset::Filler => include_str!("../templates/filler.c"),
        }
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        let mut rest = self.text();
        while let Some(start) = rest.find("{{") {
            let Some(len) = rest[start + 2..].find("}}") else { break };
            let name = &rest[start + 2..start + 2 + len];
            if !out.contains(&name) {
                out.push(name);
            }
            rest = &rest[start + 2 + len + 2..];
        }
        out
    }
}

/// The line that, once removed, fixes the planted bug.
pub const KEY_LINE_MARKER: &str = "/* key line */";

/// Replaces every `{{name}}` in the asset with its binding.
pub fn instantiate(asset: TemplateAsset, bindings: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let text = asset.text();
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let tail = &rest[start + 2..];
        let end = tail.find("}}").ok_or_else(|| TemplateError::MissingBinding(tail.to_string()))?;
        let name = &tail[..end];
        let value = bindings.get(name).ok_or_else(|| TemplateError::MissingBinding(name.to_string()))?;
        out.push_str(value);
        rest = &tail[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}
