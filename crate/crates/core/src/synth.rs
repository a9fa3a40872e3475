//! Random C translation units used as a skeleton pool when no real
//! sources are at hand. The text goes through the normal extractor, so
//! it exercises the same path as ingested code.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::par::derive_seed;
use crate::skeleton::{extract_skeletons, FunctionSkeleton, SkeletonError};

/// One source unit's skeletons.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PoolUnit {
    pub name: String,
    pub functions: Vec<FunctionSkeleton>,
}

const TYPES: [&str; 9] = ["int", "char *", "unsigned long", "double", "const char *", "struct node *", "void *", "short", "float"];

struct Writer<'a> {
    rng: &'a mut ChaCha8Rng,
    out: String,
    names: &'a [String],
    me: usize,
}

impl Writer<'_> {
    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn simple(&mut self, indent: usize) {
        let pick = self.rng.gen_range(0..6);
        let text = match pick {
            0 => format!("x = x + {};", self.rng.gen_range(1..100)),
            1 => "printf(\"step %d; done\\n\", x);".to_string(),
            2 => format!("buf[{}] = 'a';", self.rng.gen_range(0..8)),
            3 => "/* keep going */ y = x * 2;".to_string(),
            4 => {
                // mostly forward calls; an occasional backward one makes a cycle
                let target = if self.me + 1 < self.names.len() && self.rng.gen_bool(0.85) {
                    self.rng.gen_range(self.me + 1..self.names.len())
                } else {
                    self.rng.gen_range(0..self.names.len())
                };
                format!("{}(x);", self.names[target])
            }
            _ => "y = (x > 3) ? x : 3;".to_string(),
        };
        self.line(indent, &text);
    }

    fn block(&mut self, indent: usize, spine: u32, budget: &mut u32) {
        let n = self.rng.gen_range(1..=3);
        for _ in 0..n {
            self.simple(indent);
        }
        if spine > 0 {
            let t = self.rng.gen_range(0..50);
            self.line(indent, &format!("if (x > {t}) {{"));
            self.block(indent + 1, spine - 1, budget);
            if self.rng.gen_bool(0.3) {
                self.line(indent, "} else {");
                self.simple(indent + 1);
            }
            self.line(indent, "}");
        }
        while *budget > 0 && self.rng.gen_bool(0.5) {
            *budget -= 1;
            match self.rng.gen_range(0..4) {
                0 => {
                    self.line(indent, "for (i = 0; i < 4; i++) {");
                    self.simple(indent + 1);
                    self.line(indent, "}");
                }
                1 => {
                    self.line(indent, "while (y < 10) {");
                    self.line(indent + 1, "y++;");
                    self.line(indent, "}");
                }
                2 => {
                    self.line(indent, "switch (x) {");
                    self.line(indent, "case 1:");
                    self.simple(indent + 1);
                    self.line(indent + 1, "break;");
                    self.line(indent, "default:");
                    self.line(indent + 1, "break;");
                    self.line(indent, "}");
                }
                _ => {
                    self.line(indent, "if (y == 2) {");
                    self.simple(indent + 1);
                    self.line(indent, "} else if (y == 3) {");
                    self.simple(indent + 1);
                    self.line(indent, "}");
                }
            }
        }
    }
}

/// A random C unit with `functions` functions plus `main`.
pub fn synth_source(seed: u64, functions: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names: Vec<String> = (0..functions).map(|i| format!("task_{i}")).collect();
    names.insert(0, "main".to_string());
    let mut out = String::from("#include <stdio.h>\n#include <string.h>\n\n#define LIMIT 16\n\nstruct node { int v; struct node *next; };\n\n");
    for name in names.iter().skip(1) {
        let ret = *TYPES.choose(&mut rng).expect("types");
        let _ = writeln!(out, "{ret} {name}(int x);");
    }
    out.push('\n');
    for me in (0..names.len()).rev() {
        let spine = rng.gen_range(2..=9);
        let mut budget = rng.gen_range(0..=3);
        let mut w = Writer { rng: &mut rng, out: String::new(), names: &names, me };
        w.line(1, "int i = 0, y = 0;");
        w.line(1, "char buf[8] = { 0 };");
        if me == 0 {
            w.line(1, "int x = 1;");
        }
        w.block(1, spine, &mut budget);
        if me + 1 < names.len() {
            let next = names[me + 1].clone();
            w.line(1, &format!("{next}(x);"));
        }
        let body = w.out;
        if me == 0 {
            out.push_str("int main(void)\n{\n");
            out.push_str(&body);
            out.push_str("    return 0;\n}\n\n");
        } else {
            let _ = writeln!(out, "int {}(int x)\n{{", names[me]);
            out.push_str(&body);
            out.push_str("    return x + (int)buf[0] + i + y;\n}\n\n");
        }
    }
    out
}

/// `count` synthetic units, each with 8 to 16 functions.
pub fn synthetic_pool(count: usize, seed: u64) -> Result<Vec<PoolUnit>, SkeletonError> {
    (0..count)
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let n = 8 + (s % 9) as usize;
            Ok(PoolUnit { name: format!("synth{i:03}"), functions: extract_skeletons(&synth_source(s, n))? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcg::Fcg;

    #[test]
    fn units_parse_and_have_main() {
        let pool = synthetic_pool(5, 1).unwrap();
        assert_eq!(pool.len(), 5);
        for unit in &pool {
            assert!(unit.functions.iter().any(|f| f.name == "main"));
            let g = Fcg::from_skeletons(unit.functions.iter().cloned(), "main").normalize().unwrap();
            assert!(g.node_count() >= 8, "{}", g.node_count());
        }
    }

    #[test]
    fn deep_paths_exist() {
        let pool = synthetic_pool(3, 7).unwrap();
        for unit in &pool {
            let g = Fcg::from_skeletons(unit.functions.iter().cloned(), "main").normalize().unwrap().attach_bug_node();
            assert!(!g.candidate_bug_paths(49, crate::fcg::DEFAULT_PATH_CAP).is_empty(), "{}", unit.name);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(synth_source(3, 6), synth_source(3, 6));
        assert_ne!(synth_source(3, 6), synth_source(4, 6));
    }
}
