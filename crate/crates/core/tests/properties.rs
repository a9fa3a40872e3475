use std::collections::BTreeSet;
use std::sync::OnceLock;

use fedata_core::fcg::{Fcg, BUG_NODE, DEFAULT_PATH_CAP};
use fedata_core::fuzzsim::{energy, mutate, run_campaign, Budget, CampaignOptions, Mode, ScheduleParams};
use fedata_core::harness::{generate_one, load_pool, PoolSource};
use fedata_core::manifest::Manifest;
use fedata_core::oracle::{count_feasible_paths, evaluate, PathId};
use fedata_core::planner::{ByteRange, ConditionKind, FeatureConfig};
use fedata_core::skeleton::{extract_skeletons, max_nested_if, ControlSlot, FunctionSkeleton, SlotKind};
use fedata_core::synth::{synth_source, PoolUnit};
use fedata_core::GeneratedProgram;
use petgraph::algo::{is_cyclic_directed, DfsSpace};
use petgraph::graphmap::DiGraphMap;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool() -> &'static [PoolUnit] {
    static POOL: OnceLock<Vec<PoolUnit>> = OnceLock::new();
    POOL.get_or_init(|| load_pool(&PoolSource::Synthetic { count: 24, seed: 99 }).expect("pool"))
}

fn config_strategy(max_p: u32) -> impl Strategy<Value = FeatureConfig> {
    (any::<u64>(), 1..=max_p, 0..=3u32, 0..=3u32, 1..=3u32).prop_filter_map("m + k must fit", |(seed, p, m, k, ml)| {
        (m + k < p).then(|| {
            let mut c = FeatureConfig::new(seed, p, m, k);
            c.magic_len = ByteRange { min: 1, max: ml };
            c
        })
    })
}

fn program(config: &FeatureConfig) -> GeneratedProgram {
    generate_one(pool(), config, 0).expect("pool large enough")
}

// --- reference implementations ---------------------------------------------

/// Counts IF-like keywords (`if`, and `else` not followed by `if`) and
/// loop keywords outside comments and literals.
fn reference_keyword_count(src: &str) -> (usize, usize) {
    let b = src.as_bytes();
    let mut clean = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'/' if b.get(i + 1) == Some(&b'*') => {
                i += 2;
                while i + 1 < b.len() && !(b[i] == b'*' && b[i + 1] == b'/') {
                    i += 1;
                }
                i += 2;
                clean.push(b' ');
            }
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            q @ (b'"' | b'\'') => {
                i += 1;
                while i < b.len() && b[i] != q {
                    i += if b[i] == b'\\' { 2 } else { 1 };
                }
                i += 1;
                clean.push(b' ');
            }
            c => {
                clean.push(c);
                i += 1;
            }
        }
    }
    let text = String::from_utf8(clean).expect("ascii");
    let words: Vec<&str> =
        text.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).filter(|w| !w.is_empty()).collect();
    let bare_else = words.windows(2).filter(|w| w[0] == "else" && w[1] != "if").count()
        + usize::from(words.last() == Some(&"else"));
    let ifs = words.iter().filter(|w| **w == "if").count() + bare_else;
    let loops = words.iter().filter(|w| **w == "while" || **w == "for").count();
    (ifs, loops)
}

fn census(slots: &[ControlSlot]) -> (usize, usize) {
    slots.iter().fold((0, 0), |(i, w), s| {
        let (a, b) = census(&s.body);
        match s.kind {
            SlotKind::If => (i + 1 + a, w + b),
            SlotKind::While => (i + a, w + 1 + b),
        }
    })
}

fn chains(slots: &[ControlSlot]) -> Vec<u32> {
    if slots.is_empty() {
        return vec![0];
    }
    slots
        .iter()
        .flat_map(|s| chains(&s.body).into_iter().map(move |n| n + u32::from(s.kind == SlotKind::If)))
        .collect()
}

fn random_graph(names: usize, edges: &[(usize, usize)]) -> Fcg {
    let nodes: Vec<FunctionSkeleton> = (0..names)
        .map(|i| {
            let mut s = FunctionSkeleton::empty(if i == 0 { "main".to_string() } else { format!("f{i}") });
            s.max_nested_if = (i % 4) as u32;
            s
        })
        .collect();
    let name = |i: usize| nodes[i % names].name.clone();
    let edges: Vec<(String, String)> = edges.iter().map(|&(a, b)| (name(a), name(b))).collect();
    Fcg::from_parts(nodes.clone(), edges, "main")
}

fn petgraph_of(g: &Fcg) -> DiGraphMap<&str, ()> {
    let mut pg = DiGraphMap::new();
    for n in g.nodes() {
        pg.add_node(n.name.as_str());
    }
    for (a, b) in g.edges() {
        pg.add_edge(a, b, ());
    }
    pg
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn skeleton_slots_match_keyword_census(seed in any::<u64>(), n in 1usize..6) {
        let src = synth_source(seed, n);
        let (ifs, loops) = reference_keyword_count(&src);
        let skeletons = extract_skeletons(&src).unwrap();
        let total = skeletons.iter().map(|s| census(&s.control_slots)).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        prop_assert_eq!(total, (ifs, loops));
        for s in &skeletons {
            prop_assert_eq!(s.max_nested_if, chains(&s.control_slots).into_iter().max().unwrap_or(0));
            prop_assert_eq!(s.max_nested_if, max_nested_if(&s.control_slots));
            let rendered = s.signature.render(&s.name);
            prop_assert!(!rendered.contains('*') && !rendered.contains('['), "{}", rendered);
        }
    }

    #[test]
    fn normalize_is_idempotent_acyclic_and_connected(
        n in 1usize..12,
        edges in prop::collection::vec((0usize..12, 0usize..12), 0..40),
    ) {
        let g = random_graph(n, &edges).normalize().unwrap();
        prop_assert_eq!(&g.normalize().unwrap(), &g);
        let pg = petgraph_of(&g);
        prop_assert!(!is_cyclic_directed(&pg));
        let mut space = DfsSpace::new(&pg);
        for node in g.nodes() {
            prop_assert!(petgraph::algo::has_path_connecting(&pg, "main", node.name.as_str(), Some(&mut space)));
        }
        for (a, _) in g.edges() {
            let weights: BTreeSet<u32> = g.successors(a).filter_map(|b| g.edge_weight(a, b)).collect();
            prop_assert_eq!(weights.len(), 1);
        }
    }

    #[test]
    fn bug_path_selection_is_deterministic_and_heavy_enough(
        n in 2usize..10,
        edges in prop::collection::vec((0usize..10, 0usize..10), 0..30),
        required in 0u32..6,
        seed in any::<u64>(),
    ) {
        let g = random_graph(n, &edges).normalize().unwrap().attach_bug_node();
        let pick = |s| g.select_bug_path(required, &mut ChaCha8Rng::seed_from_u64(s));
        match (pick(seed), pick(seed)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(g.path_weight(&a.node_sequence).unwrap(), a.total_weight);
                prop_assert!(a.total_weight >= required);
                prop_assert_eq!(a.node_sequence.first().map(String::as_str), Some("main"));
                prop_assert_eq!(a.node_sequence.last().map(String::as_str), Some(BUG_NODE));
            }
            (Err(_), Err(_)) => prop_assert!(g.candidate_bug_paths(required, DEFAULT_PATH_CAP).is_empty()),
            _ => prop_assert!(false, "selection not deterministic"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn generated_programs_obey_condition_laws(config in config_strategy(30)) {
        let g = program(&config);
        let man = &g.manifest;
        let spec = man.validate().unwrap();
        let c = config.p - 1;
        let consuming: Vec<_> = spec.input_conditions().collect();
        prop_assert_eq!(consuming.len() as u32, c);
        prop_assert_eq!(consuming.iter().filter(|x| matches!(x.kind, ConditionKind::Magic { .. })).count() as u32, config.m);
        prop_assert_eq!(consuming.iter().filter(|x| matches!(x.kind, ConditionKind::Checksum(_))).count() as u32, config.k);
        for a in &spec.conditions {
            if !a.kind.consumes_input() {
                prop_assert!(a.window.is_none());
            }
        }
        let mut covered = vec![0u8; spec.total_input_len];
        for x in &consuming {
            for i in x.window.expect("input window").range() {
                covered[i] += 1;
            }
        }
        prop_assert!(covered.iter().all(|&n| n == 1));

        let witness = man.witness().unwrap();
        let v = evaluate(man, &witness).unwrap();
        prop_assert!(v.triggers_bug && v.path_id == PathId::Bug);
        prop_assert_eq!(count_feasible_paths(man).unwrap(), u64::from(config.p));
        prop_assert_eq!(g.source.matches("/* key line */").count(), 1);

        // emitting again from the same inputs is byte-identical
        let again = program(&config);
        prop_assert_eq!(&again.source, &g.source);
        prop_assert_eq!(again.manifest.to_json(), man.to_json());
        prop_assert_eq!(Manifest::from_json(&man.to_json()).unwrap(), man.clone());
    }

    #[test]
    fn oracle_verdicts_are_consistent(config in config_strategy(20), input in prop::collection::vec(any::<u8>(), 0..64)) {
        let man = program(&config).manifest;
        let v = evaluate(&man, &input).unwrap();
        prop_assert_eq!(v.triggers_bug, v.path_id == PathId::Bug);
        if let PathId::Failed(i) = v.path_id {
            prop_assert!(i < man.c);
        }
        // zero padding and surplus truncation
        let mut padded = input.clone();
        padded.resize(man.input_len, 0);
        prop_assert_eq!(evaluate(&man, &padded).unwrap(), v);
        padded.extend_from_slice(b"surplus");
        prop_assert_eq!(evaluate(&man, &padded).unwrap().path_id, v.path_id);
    }

    #[test]
    fn re_extraction_keeps_the_bug_path_shape(config in config_strategy(25)) {
        let g = program(&config);
        let original: Vec<FunctionSkeleton> = pool().iter().flat_map(|u| u.functions.clone()).collect();
        let emitted = extract_skeletons(&g.source).unwrap();
        let host = &g.manifest.bug.function;
        prop_assert_eq!(host.as_str(), BUG_NODE);
        for cond in &g.manifest.conditions {
            let name = if cond.function == "main" { "main".to_string() } else { format!("fd_{}", cond.function) };
            let out = emitted.iter().find(|s| s.name == name).expect("host function emitted");
            let before = original.iter().filter(|s| s.name == cond.function).map(|s| (s.statement_count, s.max_nested_if)).collect::<Vec<_>>();
            prop_assert!(before.iter().any(|&(st, depth)| out.statement_count >= st && out.max_nested_if >= depth));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, ..ProptestConfig::default() })]

    #[test]
    fn plus_schedules_dominate_and_agree(
        alpha in 1u64..5000,
        beta in 0.1f64..10.0,
        s in 0u32..200,
        f in 0u64..1_000_000,
        lower in 0u64..100,
        extra in 0u64..10_000,
    ) {
        let upper = lower + extra;
        for base in [Mode::Fast, Mode::Linear, Mode::Quad] {
            let plus = match base { Mode::Fast => Mode::FastPlus, Mode::Linear => Mode::LinearPlus, _ => Mode::QuadPlus };
            let bp = ScheduleParams { alpha, beta, upper, lower, ..ScheduleParams::new(base) };
            let (eb, ep) = (energy(&bp, s, f), energy(&bp.with_mode(plus), s, f));
            prop_assert!(eb <= upper);
            prop_assert!(ep >= eb && ep >= lower);
            if eb >= lower {
                prop_assert_eq!(ep, eb);
            }
        }
        let c = ScheduleParams { alpha, beta, upper, lower, ..ScheduleParams::new(Mode::AflConst) };
        prop_assert_eq!(energy(&c, s, f), alpha);
        let fast = ScheduleParams { alpha, beta, upper, lower, ..ScheduleParams::new(Mode::Fast) };
        prop_assert!(energy(&fast, s, f + 1) <= energy(&fast, s, f));
    }

    #[test]
    fn mutation_is_deterministic_and_length_preserving(seed in prop::collection::vec(any::<u8>(), 0..40), rng_seed in any::<u64>(), max in 1u32..16) {
        let a = mutate(&seed, &mut ChaCha8Rng::seed_from_u64(rng_seed), max);
        let b = mutate(&seed, &mut ChaCha8Rng::seed_from_u64(rng_seed), max);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), seed.len());
        let changed = a.iter().zip(&seed).filter(|(x, y)| x != y).count();
        prop_assert!(changed as u32 <= max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn campaigns_conserve_executions(config in config_strategy(12), mode_ix in 0usize..7, seed in any::<u64>()) {
        let man = program(&config).manifest;
        let schedule = ScheduleParams::new(Mode::ALL[mode_ix]);
        let run = || run_campaign(&man, &schedule, Budget::execs(20_000), &CampaignOptions::default(), seed).unwrap();
        let m = run();
        prop_assert_eq!(m.path_hits.iter().sum::<u64>(), m.total_execs);
        prop_assert!(m.paths_found <= man.p as usize);
        if let Some(at) = m.bug_found_at_exec {
            prop_assert!(at <= m.total_execs);
        }
        let mut last = 0;
        for row in &m.log {
            prop_assert!(row.execs_total >= last);
            last = row.execs_total;
        }
        prop_assert_eq!(run(), m);
    }
}
