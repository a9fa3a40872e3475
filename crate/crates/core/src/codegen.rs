//! Emits the C program for a planned bug path, and its manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fcg::{BugPathSelection, Fcg, BUG_NODE};
use crate::manifest::{BugSite, FcgSummary, Manifest};
use crate::par::derive_seed;
use crate::planner::{BugPathSpec, ChecksumParams, ConditionKind, FeatureConfig};
use crate::skeleton::{deepest_if_chain, slot_census, ControlSlot, FunctionSkeleton, ReturnType, SlotKind};
use crate::templates::{instantiate, TemplateAsset, KEY_LINE_MARKER};

#[derive(Debug, thiserror::Error)]
pub enum CodegenError {
    #[error("cannot place condition: {0}")]
    EmissionOverflow(String),
    #[error("selection is not a main-to-bug path of this graph: {0}")]
    InvalidSelection(String),
    #[error("compiler failed:\n{diagnostics}")]
    CompileFailed { diagnostics: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedProgram {
    pub program_name: String,
    pub source: String,
    pub manifest: Manifest,
}

/// `<unit>_<m>_<p>_<rep>`.
pub fn program_name(unit: &str, config: &FeatureConfig, repetition: u32) -> String {
    format!("{unit}_{}_{}_{repetition}", config.m, config.p)
}

/// Calls made into noise functions before they stop recursing.
const NOISE_CALL_BUDGET: u32 = 4096;

fn c_name(id: &str, main: &str) -> String {
    if id == main {
        "main".to_string()
    } else if id == BUG_NODE {
        BUG_NODE.to_string()
    } else {
        format!("fd_{id}")
    }
}

fn magic_literal(bytes: &[u8]) -> String {
    let mut s = String::from("\"");
    for b in bytes {
        let _ = write!(s, "\\{b:03o}");
    }
    s.push('"');
    s
}

fn condition_text(kind: &ConditionKind, offset: usize, checksums: &[ChecksumParams]) -> String {
    match kind {
        ConditionKind::Normal { op, threshold } => format!("fedata_input[{offset}] {op} 0x{threshold:02x}"),
        ConditionKind::Magic { bytes } => {
            format!("!memcmp(fedata_input + {offset}, {}, {})", magic_literal(bytes), bytes.len())
        }
        ConditionKind::Checksum(p) => {
            let idx = checksums.iter().position(|q| q == p).expect("checksum registered");
            format!("fedata_checksum{idx}(fedata_input + {offset}, {})", p.length)
        }
        ConditionKind::AlwaysTrue => "1".to_string(),
    }
}

struct FnCtx {
    route: Option<Vec<usize>>,
    conds: Vec<String>,
    inner_call: Option<String>,
    fillers: Vec<u32>,
}

struct Body<'r> {
    rng: &'r mut ChaCha8Rng,
    next_block: usize,
    whiles: usize,
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("    ");
    }
}

impl Body<'_> {
    fn filler(&mut self) -> String {
        let mut b = BTreeMap::new();
        b.insert("var", "v0".to_string());
        b.insert("mul", (self.rng.gen_range(1..=30u32) * 2 + 1).to_string());
        b.insert("add", self.rng.gen_range(1..=1000u32).to_string());
        instantiate(TemplateAsset::Filler, &b).expect("filler bindings").trim_end().to_string()
    }

    fn block(&mut self, slots: &[ControlSlot], route: Option<&[usize]>, if_depth: usize, indent: usize, f: &FnCtx, out: &mut String) {
        let id = self.next_block;
        self.next_block += 1;
        for _ in 0..f.fillers[id] {
            let line = self.filler();
            pad(out, indent);
            out.push_str(&line);
            out.push('\n');
        }
        if route == Some(&[]) {
            if let Some(call) = &f.inner_call {
                pad(out, indent);
                out.push_str(call);
                out.push('\n');
            }
        }
        for (i, s) in slots.iter().enumerate() {
            let sub = match route {
                Some(r) if r.first() == Some(&i) => Some(&r[1..]),
                _ => None,
            };
            pad(out, indent);
            match (s.kind, sub) {
                (SlotKind::If, Some(rest)) => {
                    let _ = writeln!(out, "if ({}) {{", f.conds[if_depth]);
                    self.block(&s.body, Some(rest), if_depth + 1, indent + 1, f, out);
                }
                (SlotKind::While, Some(rest)) => {
                    out.push_str("{\n");
                    self.block(&s.body, Some(rest), if_depth, indent + 1, f, out);
                }
                (SlotKind::If, None) => {
                    let m = self.rng.gen_range(2..=9u32);
                    let k = self.rng.gen_range(1..m);
                    let _ = writeln!(out, "if (v0 % {m}u < {k}u) {{");
                    self.block(&s.body, None, if_depth, indent + 1, f, out);
                }
                (SlotKind::While, None) => {
                    let w = self.whiles;
                    self.whiles += 1;
                    let trips = self.rng.gen_range(1..=8u32);
                    let _ = writeln!(out, "while (w{w} < {trips}u) {{");
                    pad(out, indent + 1);
                    let _ = writeln!(out, "w{w}++;");
                    self.block(&s.body, None, if_depth, indent + 1, f, out);
                }
            }
            pad(out, indent);
            out.push_str("}\n");
        }
    }
}

fn call_expr(fcg: &Fcg, callee: &str) -> String {
    let main = fcg.main_id();
    let args = match fcg.node(callee) {
        Some(sk) if callee != BUG_NODE => sk
            .signature
            .params
            .iter()
            .map(|p| format!("({})v0", p.ty.c_name()))
            .collect::<Vec<_>>()
            .join(", "),
        _ => String::new(),
    };
    format!("{}({args});", c_name(callee, main))
}

fn check_selection(fcg: &Fcg, selection: &BugPathSelection) -> Result<(), CodegenError> {
    let seq = &selection.node_sequence;
    let bad = |s: &str| Err(CodegenError::InvalidSelection(s.to_string()));
    if seq.first().map(String::as_str) != Some(fcg.main_id()) {
        return bad("path must start at main");
    }
    if seq.last().map(String::as_str) != Some(BUG_NODE) || seq.len() < 2 {
        return bad("path must end at the bug node");
    }
    for w in seq.windows(2) {
        if !fcg.has_edge(&w[0], &w[1]) {
            return bad(&format!("no edge {} -> {}", w[0], w[1]));
        }
    }
    Ok(())
}

/// Emits the program. Output depends only on the arguments.
pub fn emit_program(
    fcg: &Fcg,
    selection: &BugPathSelection,
    spec: &BugPathSpec,
    config: &FeatureConfig,
    name: &str,
) -> Result<GeneratedProgram, CodegenError> {
    check_selection(fcg, selection)?;
    let main = fcg.main_id().to_string();
    let hosts = selection.hosts();
    let on_path: BTreeSet<&str> = selection.node_sequence.iter().map(String::as_str).collect();

    let mut checksums: Vec<ChecksumParams> = Vec::new();
    for c in &spec.conditions {
        if let ConditionKind::Checksum(p) = c.kind {
            if !checksums.contains(&p) {
                checksums.push(p);
            }
        }
    }

    let mut conds: BTreeMap<&str, Vec<String>> =
        hosts.iter().map(|h| (h.as_str(), vec!["1".to_string(); fcg.node_weight(h) as usize])).collect();
    for c in &spec.conditions {
        let slot = conds
            .get_mut(c.function.as_str())
            .and_then(|v| v.get_mut(c.slot as usize))
            .ok_or_else(|| CodegenError::EmissionOverflow(format!("{} has no if slot {} on the bug path", c.function, c.slot)))?;
        *slot = condition_text(&c.kind, c.window.map_or(0, |w| w.offset), &checksums);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0xc0de));
    let mut functions = String::new();
    let mut main_fn = String::new();
    let mut prototypes = String::new();

    for sk in fcg.nodes() {
        if sk.name == BUG_NODE {
            continue;
        }
        let pos = hosts.iter().position(|h| *h == sk.name);
        let next = pos.map(|i| selection.node_sequence[i + 1].as_str());
        let ctx = FnCtx {
            route: pos.map(|_| deepest_if_chain(&sk.control_slots)),
            conds: conds.remove(sk.name.as_str()).unwrap_or_default(),
            inner_call: next.map(|n| call_expr(fcg, n)),
            fillers: spread_fillers(sk, &mut rng),
        };
        let text = render_function(fcg, sk, &ctx, next, &on_path, &mut rng);
        if sk.name == main {
            main_fn = text;
        } else {
            let _ = writeln!(prototypes, "{};", sk.signature.render(&c_name(&sk.name, &main)));
            functions.push_str(&text);
            functions.push('\n');
        }
    }

    let mut src = String::new();
    let _ = writeln!(src, "/* {name} */");
    src.push_str("#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\n\n");
    let mut b = BTreeMap::new();
    b.insert("buflen", spec.total_input_len.to_string());
    src.push_str(&instantiate(TemplateAsset::InputPreamble, &b).expect("preamble bindings"));
    let _ = writeln!(src, "static unsigned int fedata_calls = {NOISE_CALL_BUDGET}u;\n");
    for (i, p) in checksums.iter().enumerate() {
        let mut b = BTreeMap::new();
        b.insert("len", p.length.to_string());
        b.insert("mod", p.modulus.to_string());
        b.insert("res", p.residue.to_string());
        let text = instantiate(TemplateAsset::ChecksumFn, &b).expect("checksum bindings");
        src.push_str(&text.replace("fedata_checksum(", &format!("fedata_checksum{i}(")));
        src.push('\n');
    }
    let _ = writeln!(src, "void {BUG_NODE}(void);");
    src.push_str(&prototypes);
    src.push('\n');
    src.push_str(&functions);
    src.push_str(TemplateAsset::BugCwe761.text());
    src.push('\n');
    src.push_str(&main_fn);

    let line = src
        .lines()
        .position(|l| l.contains(KEY_LINE_MARKER))
        .map(|i| i as u32 + 1)
        .expect("bug template carries the key line");
    let manifest = emit_manifest(spec, config, fcg, line);
    Ok(GeneratedProgram { program_name: name.to_string(), source: src, manifest })
}

/// Assigns one filler statement per skeleton statement to a random block.
fn spread_fillers(sk: &FunctionSkeleton, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let (ifs, whiles) = slot_census(&sk.control_slots);
    let mut fillers = vec![0u32; 1 + ifs + whiles];
    for _ in 0..sk.statement_count {
        let at = rng.gen_range(0..fillers.len());
        fillers[at] += 1;
    }
    fillers
}

fn render_function(
    fcg: &Fcg,
    sk: &FunctionSkeleton,
    ctx: &FnCtx,
    designated: Option<&str>,
    on_path: &BTreeSet<&str>,
    rng: &mut ChaCha8Rng,
) -> String {
    let main = fcg.main_id();
    let is_main = sk.name == main;
    let mut body = String::new();
    if is_main {
        body.push_str("    fedata_read_input();\n");
    }
    let mut b = Body { rng, next_block: 0, whiles: 0 };
    b.block(&sk.control_slots, ctx.route.as_deref(), 0, 1, ctx, &mut body);
    let whiles = b.whiles;

    for callee in fcg.successors(&sk.name) {
        if Some(callee) == designated {
            continue;
        }
        let call = call_expr(fcg, callee);
        if on_path.contains(callee) {
            let _ = writeln!(body, "    if (0) {{\n        {call}\n    }}");
        } else {
            let _ = writeln!(body, "    if (fedata_calls > 0u) {{\n        fedata_calls--;\n        {call}\n    }}");
        }
    }

    let mut out = String::new();
    if is_main {
        out.push_str("int main(void)\n{\n");
    } else {
        let _ = writeln!(out, "{}\n{{", sk.signature.render(&c_name(&sk.name, main)));
    }
    let _ = writeln!(out, "    unsigned int v0 = {}u;", b.rng.gen_range(1..=1000u32));
    for w in 0..whiles {
        let _ = writeln!(out, "    unsigned int w{w} = 0u;");
    }
    out.push_str(&body);
    match (is_main, sk.signature.returns) {
        (true, _) => out.push_str("    return 0;\n"),
        (false, ReturnType::Void) => {}
        (false, ReturnType::Basic(t)) => {
            let _ = writeln!(out, "    return ({})v0;", t.c_name());
        }
    }
    out.push_str("}\n");
    out
}

pub fn emit_manifest(spec: &BugPathSpec, config: &FeatureConfig, fcg: &Fcg, bug_line: u32) -> Manifest {
    Manifest::build(
        config,
        spec,
        BugSite { cwe: config.bug_kind.cwe(), function: BUG_NODE.to_string(), line: bug_line },
        FcgSummary { nodes: fcg.node_count(), edges: fcg.edge_count() },
    )
}

/// Writes `<name>.c` and `<name>.manifest.json` into `dir`.
pub fn write_program(program: &GeneratedProgram, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let src = dir.join(format!("{}.c", program.program_name));
    let manifest = dir.join(format!("{}.manifest.json", program.program_name));
    std::fs::write(&src, &program.source)?;
    std::fs::write(&manifest, program.manifest.to_json())?;
    Ok((src, manifest))
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CompilerConfig {
    /// Whitespace-separated command with `{src}` and `{out}` placeholders.
    pub command: String,
    /// Appended when compiling hardened binaries.
    pub hardened_flags: String,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        CompilerConfig {
            command: "cc -O0 -o {out} {src}".to_string(),
            hardened_flags: "-fsanitize=address -fno-omit-frame-pointer".to_string(),
        }
    }
}

impl CompilerConfig {
    /// True when the configured compiler runs at all.
    pub fn available(&self) -> bool {
        let Some(prog) = self.command.split_whitespace().next() else { return false };
        Command::new(prog).arg("--version").output().is_ok_and(|o| o.status.success())
    }
}

/// Compiles the source at `src` to `out`.
pub fn compile_file(src: &Path, out: &Path, compiler: &CompilerConfig, hardened: bool) -> Result<(), CodegenError> {
    let mut words: Vec<String> = compiler
        .command
        .split_whitespace()
        .map(|w| w.replace("{src}", &src.to_string_lossy()).replace("{out}", &out.to_string_lossy()))
        .collect();
    if hardened {
        words.extend(compiler.hardened_flags.split_whitespace().map(String::from));
    }
    let Some((prog, args)) = words.split_first() else {
        return Err(CodegenError::CompileFailed { diagnostics: "empty compiler command".into() });
    };
    let output = Command::new(prog).args(args).output()?;
    if !output.status.success() {
        return Err(CodegenError::CompileFailed { diagnostics: String::from_utf8_lossy(&output.stderr).into_owned() });
    }
    Ok(())
}

/// Writes the program into `dir` and compiles it; returns the binary path.
pub fn compile(
    program: &GeneratedProgram,
    dir: &Path,
    compiler: &CompilerConfig,
    hardened: bool,
) -> Result<PathBuf, CodegenError> {
    let (src, _) = write_program(program, dir)?;
    let suffix = if hardened { ".hardened" } else { "" };
    let out = dir.join(format!("{}{suffix}", program.program_name));
    compile_file(&src, &out, compiler, hardened)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcg::tests::{example_graph, node};
    use crate::oracle::{count_feasible_paths, evaluate, PathId};
    use crate::planner::plan_conditions;
    use crate::skeleton::ControlSlot;

    fn listing_one_program() -> GeneratedProgram {
        let mut sk = node("main", 3, &[]);
        sk.control_slots.insert(0, ControlSlot::leaf(SlotKind::While));
        let g = Fcg::from_skeletons([sk], "main").normalize().unwrap().attach_bug_node();
        let cfg = FeatureConfig::new(11, 4, 0, 0);
        let sel = g.select_bug_path(cfg.c(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let spec = plan_conditions(&g, &sel, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        emit_program(&g, &sel, &spec, &cfg, "unit_0_4_0").unwrap()
    }

    #[test]
    fn listing_one_structure() {
        let prog = listing_one_program();
        let src = &prog.source;
        let main = &src[src.find("int main(void)").unwrap()..];
        assert_eq!(main.matches("while (").count(), 1);
        assert_eq!(main.matches("if (fedata_input[").count(), 3);
        for i in 0..3 {
            assert!(main.contains(&format!("fedata_input[{i}] ")), "{main}");
        }
        // the bug call sits inside the third nested input check
        let third = main.find("if (fedata_input[2]").unwrap();
        assert!(main[third..].find("__fedata_bug();").is_some());
        assert_eq!(src.matches(KEY_LINE_MARKER).count(), 1);
        let line = src.lines().nth(prog.manifest.bug.line as usize - 1).unwrap();
        assert!(line.contains("vul_var = vul_var + 1;"));
        assert_eq!(count_feasible_paths(&prog.manifest), Ok(4));
        assert_eq!(prog.manifest.fcg, FcgSummary { nodes: 2, edges: 1 });
    }

    #[test]
    fn only_if_and_while_are_emitted() {
        let src = listing_one_program().source;
        for kw in ["for (", "switch", "goto", "do {", "else"] {
            assert!(!src.contains(kw), "{kw}");
        }
    }

    #[test]
    fn magic_guard_shape() {
        assert_eq!(magic_literal(b"BYTE"), "\"\\102\\131\\124\\105\"");
        let text = condition_text(&ConditionKind::Magic { bytes: b"BYTE".to_vec() }, 3, &[]);
        assert_eq!(text, "!memcmp(fedata_input + 3, \"\\102\\131\\124\\105\", 4)");
    }

    #[test]
    fn noise_routes_to_bug_are_dead() {
        let g = example_graph().normalize().unwrap().attach_bug_node();
        let cfg = FeatureConfig::new(4, 7, 1, 1);
        let sel = BugPathSelection {
            node_sequence: ["A", "C", "E", BUG_NODE].map(String::from).to_vec(),
            total_weight: 7,
            required_conditions: 6,
        };
        let spec = plan_conditions(&g, &sel, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let prog = emit_program(&g, &sel, &spec, &cfg, "ex_1_7_0").unwrap();
        let src = &prog.source;
        // D calls E, which is on the bug path; B calls D, which is noise
        let header = format!("\n{}\n{{", g.node("D").unwrap().signature.render("fd_D"));
        let d_def = &src[src.find(&header).unwrap()..];
        let d_def = &d_def[..d_def.find("\n}\n").unwrap()];
        assert!(d_def.contains("if (0) {\n        fd_E("), "{d_def}");
        assert!(d_def.contains("if (0) {\n        __fedata_bug();"));
        assert!(src.contains("fedata_checksum0(fedata_input + "));
        assert!(src.contains("!memcmp(fedata_input + "));
        assert_eq!(evaluate(&prog.manifest, &spec.witness).unwrap().path_id, PathId::Bug);
    }

    #[test]
    fn emission_is_deterministic() {
        assert_eq!(listing_one_program(), listing_one_program());
    }

    #[test]
    fn misplaced_conditions_overflow() {
        let g = Fcg::from_skeletons([node("main", 1, &[])], "main").attach_bug_node();
        let cfg = FeatureConfig::new(1, 2, 0, 0);
        let sel = g.select_bug_path(1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut spec = plan_conditions(&g, &sel, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        spec.conditions[0].slot = 5;
        assert!(matches!(emit_program(&g, &sel, &spec, &cfg, "x"), Err(CodegenError::EmissionOverflow(_))));
    }

    #[test]
    fn selection_must_reach_bug() {
        let g = Fcg::from_skeletons([node("main", 1, &[])], "main").attach_bug_node();
        let cfg = FeatureConfig::new(1, 1, 0, 0);
        let sel = BugPathSelection { node_sequence: vec!["main".into()], total_weight: 1, required_conditions: 0 };
        let spec = BugPathSpec { conditions: vec![], witness: vec![], total_input_len: 0 };
        assert!(matches!(emit_program(&g, &sel, &spec, &cfg, "x"), Err(CodegenError::InvalidSelection(_))));
    }

    #[test]
    fn names_follow_pattern() {
        assert_eq!(program_name("terminology", &FeatureConfig::new(0, 50, 0, 0), 3), "terminology_0_50_3");
    }
}
