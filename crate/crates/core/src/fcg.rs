//! Function-call graph: normalization, bug-node attachment and bug-path
//! selection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::skeleton::FunctionSkeleton;

/// Name of the synthetic node every original function may call.
pub const BUG_NODE: &str = "__fedata_bug";

/// Default cap on enumerated main-to-bug paths.
pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FcgError {
    #[error("main function `{0}` is not in the graph")]
    NoMainFunction(String),
    #[error("no main-to-bug path carries at least {required} if statements")]
    ProgramTooSmall { required: u32 },
    #[error("{0} -> {1} is not an edge")]
    NotAPath(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fcg {
    nodes: BTreeMap<String, FunctionSkeleton>,
    edges: BTreeSet<(String, String)>,
    main_id: String,
}

impl Fcg {
    /// Builds the raw graph. Callees that are not defined in `skeletons` are
    /// dropped; duplicate definitions keep the first.
    pub fn from_skeletons(
        skeletons: impl IntoIterator<Item = FunctionSkeleton>,
        main_id: impl Into<String>,
    ) -> Self {
        let mut nodes = BTreeMap::new();
        for s in skeletons {
            nodes.entry(s.name.clone()).or_insert(s);
        }
        let edges = nodes
            .values()
            .flat_map(|s| {
                s.callees
                    .iter()
                    .filter(|c| nodes.contains_key(c.as_str()))
                    .map(|c| (s.name.clone(), c.clone()))
            })
            .collect();
        Fcg { nodes, edges, main_id: main_id.into() }
    }

    pub fn from_parts(
        nodes: impl IntoIterator<Item = FunctionSkeleton>,
        edges: impl IntoIterator<Item = (String, String)>,
        main_id: impl Into<String>,
    ) -> Self {
        Fcg {
            nodes: nodes.into_iter().map(|s| (s.name.clone(), s)).collect(),
            edges: edges.into_iter().collect(),
            main_id: main_id.into(),
        }
    }

    pub fn main_id(&self) -> &str {
        &self.main_id
    }

    pub fn node(&self, id: &str) -> Option<&FunctionSkeleton> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &FunctionSkeleton> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, src: &str, dst: &str) -> bool {
        self.edges.contains(&(src.to_string(), dst.to_string()))
    }

    /// Out-neighbours in lexicographic order.
    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((id.to_string(), String::new())..)
            .take_while(move |(a, _)| a == id)
            .map(|(_, b)| b.as_str())
    }

    /// Weight shared by every out-edge of `id`: its deepest nested-if count.
    pub fn node_weight(&self, id: &str) -> u32 {
        self.nodes.get(id).map_or(0, |s| s.max_nested_if)
    }

    pub fn edge_weight(&self, src: &str, dst: &str) -> Option<u32> {
        self.has_edge(src, dst).then(|| self.node_weight(src))
    }

    /// Removes DFS back edges (children visited in name order, self-loops
    /// included) and every node unreachable from main.
    pub fn normalize(&self) -> Result<Fcg, FcgError> {
        if !self.nodes.contains_key(&self.main_id) {
            return Err(FcgError::NoMainFunction(self.main_id.clone()));
        }
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Gray,
            Black,
        }
        let mut mark: BTreeMap<&str, Mark> = self.nodes.keys().map(|k| (k.as_str(), Mark::White)).collect();
        let mut back = BTreeSet::new();
        let mut stack: Vec<(&str, Vec<&str>)> = Vec::new();
        let main = self.main_id.as_str();
        mark.insert(main, Mark::Gray);
        stack.push((main, self.successors(main).collect::<Vec<_>>().into_iter().rev().collect()));
        while let Some((node, pending)) = stack.last_mut() {
            let node = *node;
            match pending.pop() {
                Some(next) => match mark[next] {
                    Mark::White => {
                        mark.insert(next, Mark::Gray);
                        let children = self.successors(next).collect::<Vec<_>>().into_iter().rev().collect();
                        stack.push((next, children));
                    }
                    Mark::Gray => {
                        back.insert((node.to_string(), next.to_string()));
                    }
                    Mark::Black => {}
                },
                None => {
                    mark.insert(node, Mark::Black);
                    stack.pop();
                }
            }
        }
        let reachable: BTreeSet<&str> =
            mark.iter().filter(|(_, m)| **m == Mark::Black).map(|(k, _)| *k).collect();
        Ok(Fcg {
            nodes: self
                .nodes
                .iter()
                .filter(|(k, _)| reachable.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| !back.contains(*e))
                .filter(|(a, b)| reachable.contains(a.as_str()) && reachable.contains(b.as_str()))
                .cloned()
                .collect(),
            main_id: self.main_id.clone(),
        })
    }

    /// Adds [`BUG_NODE`] with an edge from every existing node.
    pub fn attach_bug_node(&self) -> Fcg {
        let mut g = self.clone();
        for id in self.nodes.keys() {
            g.edges.insert((id.clone(), BUG_NODE.to_string()));
        }
        g.nodes.insert(BUG_NODE.to_string(), FunctionSkeleton::empty(BUG_NODE));
        g
    }

    pub fn path_weight<S: AsRef<str>>(&self, path: &[S]) -> Result<u32, FcgError> {
        path.windows(2)
            .map(|w| {
                let (a, b) = (w[0].as_ref(), w[1].as_ref());
                self.edge_weight(a, b).ok_or_else(|| FcgError::NotAPath(a.to_string(), b.to_string()))
            })
            .sum()
    }

    /// All main-to-bug paths with weight at least `required`, in DFS order,
    /// stopping after `cap` complete paths have been enumerated.
    pub fn candidate_bug_paths(&self, required: u32, cap: usize) -> Vec<(Vec<String>, u32)> {
        let mut found = Vec::new();
        let mut enumerated = 0usize;
        let mut path = vec![self.main_id.as_str()];
        let mut on_path = BTreeSet::from([self.main_id.as_str()]);
        self.enumerate(&mut path, &mut on_path, 0, required, cap, &mut enumerated, &mut found);
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate<'a>(
        &'a self,
        path: &mut Vec<&'a str>,
        on_path: &mut BTreeSet<&'a str>,
        weight: u32,
        required: u32,
        cap: usize,
        enumerated: &mut usize,
        found: &mut Vec<(Vec<String>, u32)>,
    ) {
        let here = *path.last().expect("path starts at main");
        if here == BUG_NODE {
            *enumerated += 1;
            if weight >= required {
                found.push((path.iter().map(|s| s.to_string()).collect(), weight));
            }
            return;
        }
        let w = weight + self.node_weight(here);
        for next in self.successors(here) {
            if *enumerated >= cap {
                return;
            }
            if on_path.insert(next) {
                path.push(next);
                self.enumerate(path, on_path, w, required, cap, enumerated, found);
                path.pop();
                on_path.remove(next);
            }
        }
    }

    pub fn select_bug_path<R: Rng + ?Sized>(
        &self,
        required: u32,
        rng: &mut R,
    ) -> Result<BugPathSelection, FcgError> {
        self.select_bug_path_capped(required, DEFAULT_PATH_CAP, rng)
    }

    /// Picks one qualifying path uniformly at random.
    pub fn select_bug_path_capped<R: Rng + ?Sized>(
        &self,
        required: u32,
        cap: usize,
        rng: &mut R,
    ) -> Result<BugPathSelection, FcgError> {
        let mut candidates = self.candidate_bug_paths(required, cap);
        if candidates.is_empty() {
            return Err(FcgError::ProgramTooSmall { required });
        }
        let (node_sequence, total_weight) = candidates.swap_remove(rng.gen_range(0..candidates.len()));
        Ok(BugPathSelection { node_sequence, total_weight, required_conditions: required })
    }

    /// Graphviz rendering; node labels are `name:max_nested_if`, edge labels
    /// the edge weight.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph fcg {\n");
        for s in self.nodes.values() {
            let _ = writeln!(out, "  \"{0}\" [label=\"{0}:{1}\"];", s.name, s.max_nested_if);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\" [label=\"{}\"];", self.node_weight(a));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugPathSelection {
    pub node_sequence: Vec<String>,
    pub total_weight: u32,
    pub required_conditions: u32,
}

impl BugPathSelection {
    /// The nodes that host conditions: every node except the bug node.
    pub fn hosts(&self) -> &[String] {
        &self.node_sequence[..self.node_sequence.len().saturating_sub(1)]
    }
}
