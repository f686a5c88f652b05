use super::*;
use crate::harness::StubEvaluator;
use crate::testing::{stub_failing, stub_source, stub_task};
use proptest::prelude::*;

fn config(iterations: u32, population: usize) -> EngineConfig {
    EngineConfig {
        iterations,
        population_per_generation: population,
        rng_seed: 11,
        jobs: 2,
        ..EngineConfig::default()
    }
}

fn never() -> FnGenerator<impl FnMut(&GenerationRequest<'_>) -> Vec<String> + Send> {
    FnGenerator::new("never", |_: &GenerationRequest<'_>| -> Vec<String> {
        panic!("generator must not be called")
    })
}

#[test]
fn seed_with_population_one_skips_the_generator() {
    let task = stub_task(Some(stub_source(1.0, "seed")));
    let cfg = config(0, 1);
    let mut state = EvolutionState::new(&cfg);
    let pop = initialize_population(&mut state, &task, &mut never(), &cfg).unwrap();
    assert_eq!(pop.len(), 1);
    assert_eq!(pop[0].origin, Origin::Seed);
    assert_eq!(state.texts_requested, 0);
}

#[test]
fn generator_fills_generation_zero_without_seed() {
    let task = stub_task(None);
    let cfg = config(0, 4);
    let mut g = FnGenerator::new("four", |r: &GenerationRequest<'_>| {
        (0..r.n)
            .map(|i| stub_source(1.0 + i as f64, &format!("g{i}")))
            .collect()
    });
    let mut state = EvolutionState::new(&cfg);
    let pop = initialize_population(&mut state, &task, &mut g, &cfg).unwrap();
    assert_eq!(pop.len(), 4);
    assert!(pop.iter().all(|c| c.generation == 0 && c.origin == Origin::Generated));
}

#[test]
fn duplicate_outputs_collapse() {
    let task = stub_task(None);
    let cfg = config(0, 4);
    let mut g = FnGenerator::new("dup", |_: &GenerationRequest<'_>| {
        vec![
            stub_source(1.0, "a"),
            stub_source(1.0, "a"),
            format!("{}\n\n// comment", stub_source(1.0, "a")),
        ]
    });
    let mut state = EvolutionState::new(&cfg);
    let pop = initialize_population(&mut state, &task, &mut g, &cfg).unwrap();
    assert_eq!(pop.len(), 1);
}

#[test]
fn empty_generation_zero_aborts() {
    let task = stub_task(None);
    let cfg = config(3, 2);
    let mut g = FnGenerator::new("mute", |_: &GenerationRequest<'_>| Vec::new());
    let err = run_evolution(&task, &mut g, &StubEvaluator::default(), &cfg).unwrap_err();
    assert!(matches!(err, EvolutionError::EmptyGeneration));
}

#[test]
fn re_emitting_seen_source_changes_nothing_but_the_log() {
    let seed = stub_source(1.0, "seed");
    let task = stub_task(Some(seed.clone()));
    let cfg = config(1, 1);
    let eval = StubEvaluator::default();
    let mut g = FnGenerator::new("echo-seed", move |_: &GenerationRequest<'_>| vec![seed.clone()]);
    let mut state = start(&task, &mut g, &eval, &cfg).unwrap();
    let (archive, survivors, trajectory) = (state.archive.clone(), state.survivors.clone(), state.trajectory.clone());
    run_generation(&mut state, &task, &mut g, &eval, &cfg).unwrap();
    assert_eq!(state.archive, archive);
    assert_eq!(state.survivors, survivors);
    assert_eq!(state.trajectory, trajectory);
    assert!(matches!(state.events.last(), Some(Event::SkippedGeneration { .. })));
}

#[test]
fn faster_program_raises_the_cell_elite() {
    let task = stub_task(Some(stub_source(1.0, "v")));
    let cfg = config(1, 1);
    let eval = StubEvaluator::default();
    let mut g = FnGenerator::new("faster", |_: &GenerationRequest<'_>| vec![stub_source(0.5, "v")]);
    let mut state = start(&task, &mut g, &eval, &cfg).unwrap();
    let (cell, before) = {
        let (d, e) = state.archive.cells().next().unwrap();
        (*d, e.fitness.value())
    };
    run_generation(&mut state, &task, &mut g, &eval, &cfg).unwrap();
    // same shape of program, same cell
    let after = state.archive.get(&cell).unwrap().fitness.value();
    assert!(after > before);
    assert_eq!(state.trajectory.best.as_ref().unwrap().generation, 1);
}

#[test]
fn racy_program_scores_zero_and_best_is_unchanged() {
    let task = stub_task(Some(stub_source(1.0, "seed")));
    let cfg = config(1, 1);
    let eval = StubEvaluator::default();
    let mut g = FnGenerator::new("racy", |_: &GenerationRequest<'_>| {
        vec![format!("#pragma stub race=detected\n{}", stub_source(0.1, "racy"))]
    });
    let result = run_evolution(&task, &mut g, &eval, &cfg).unwrap();
    let racy = result.trajectory.generations[1].entries[0].clone();
    assert_eq!(racy.fitness, 0.0);
    assert_eq!(racy.report.race, "race_detected");
    assert_eq!(result.trajectory.best.as_ref().unwrap().generation, 0);
}

fn improving(factor: f64) -> FnGenerator<impl FnMut(&GenerationRequest<'_>) -> Vec<String> + Send> {
    FnGenerator::new("improving", move |r: &GenerationRequest<'_>| {
        vec![stub_source(
            factor.powi(r.generation as i32),
            &format!("g{}", r.generation),
        )]
    })
}

#[test]
fn steady_improvement_returns_last_generation() {
    let task = stub_task(Some(stub_source(1.0, "g0")));
    let cfg = config(10, 1);
    let result = run_evolution(&task, &mut improving(0.9), &StubEvaluator::default(), &cfg).unwrap();
    let best = result.best.as_ref().unwrap();
    assert_eq!(best.candidate.generation, 10);
    let seed_fitness = 1.0 / (1.0 + cfg.epsilon_secs);
    let expected = seed_fitness / 0.9f64.powi(10);
    assert!((best.fitness.value() - expected).abs() / expected < 1e-6);
    let closed_form = 1.0 / 0.9f64.powi(10);
    assert!((result.iteration_speedup().unwrap() - closed_form).abs() < 1e-6);
}

#[test]
fn zero_iterations_returns_the_seed() {
    let task = stub_task(Some(stub_source(1.0, "seed")));
    let result = run_evolution(&task, &mut never(), &StubEvaluator::default(), &config(0, 1)).unwrap();
    assert_eq!(result.best.unwrap().candidate.origin, Origin::Seed);
}

#[test]
fn only_broken_code_means_no_valid_solution() {
    let task = stub_task(None);
    let mut g = FnGenerator::new("broken", |r: &GenerationRequest<'_>| {
        vec![stub_failing(
            "build=fail error: expected ';'",
            &format!("b{}", r.generation),
        )]
    });
    let result = run_evolution(&task, &mut g, &StubEvaluator::default(), &config(3, 1)).unwrap();
    assert!(result.no_valid_solution());
    assert_eq!(result.trajectory.entries().count(), 4);
    assert!(result.iteration_speedup().is_err());
}

#[test]
fn total_generator_failure_keeps_survivors() {
    let task = stub_task(Some(stub_source(1.0, "seed")));
    let eval = StubEvaluator::default();
    let cfg = config(2, 1);
    let mut g = FnGenerator::new("mute", |_: &GenerationRequest<'_>| Vec::new());
    let mut state = start(&task, &mut g, &eval, &cfg).unwrap();
    let before = state.survivors.clone();
    run_generation(&mut state, &task, &mut g, &eval, &cfg).unwrap();
    assert_eq!(state.survivors, before);
    assert_eq!(state.generation, 1);
}

#[test]
fn failing_survivor_diagnostics_reach_the_next_prompt() {
    let log = "main.cpp:3:1: error: 'convex_hull' was not declared in this scope";
    let task = stub_task(Some(stub_failing(&format!("build=fail {log}"), "seed")));
    let cfg = config(1, 1);
    let mut g = PlaylistGenerator::from_entries(vec![(1, vec![stub_source(1.0, "next")])]);
    run_evolution(&task, &mut g, &StubEvaluator::default(), &cfg).unwrap();
    assert!(g.prompts[0].contains(log));
}

#[test]
fn invalid_config_is_rejected_up_front() {
    let task = stub_task(Some(stub_source(1.0, "seed")));
    let mut cfg = config(1, 1);
    cfg.prompt_template = "{problem_description} only".into();
    assert!(matches!(
        run_evolution(&task, &mut never(), &StubEvaluator::default(), &cfg),
        Err(EvolutionError::Config(_))
    ));
    let mut cfg = config(1, 1);
    cfg.k = 0;
    cfg.d = 0;
    assert!(run_evolution(&task, &mut never(), &StubEvaluator::default(), &cfg).is_err());
}

#[test]
fn parents_and_generations_are_consistent() {
    let task = stub_task(Some(stub_source(1.0, "g0")));
    let result = run_evolution(&task, &mut improving(0.8), &StubEvaluator::default(), &config(4, 1)).unwrap();
    let gens: BTreeMap<_, _> = result
        .trajectory
        .entries()
        .map(|e| (e.candidate_id.clone(), e.generation))
        .collect();
    for e in result.trajectory.entries() {
        for p in &e.parent_ids {
            assert!(gens[p] < e.generation);
        }
    }
}

/// Scripted generator mixing passes, failures, races and duplicates.
fn chaotic(seed: u64) -> FnGenerator<impl FnMut(&GenerationRequest<'_>) -> Vec<String> + Send> {
    FnGenerator::new("chaotic", move |r: &GenerationRequest<'_>| {
        (0..r.n)
            .map(|i| {
                let h = derive_seed(seed, r.generation, i as u64);
                let tag = format!("x{}", h % 23);
                match h % 5 {
                    0 => stub_failing("build=fail oops", &tag),
                    1 => stub_failing("tests=fail wrong", &tag),
                    2 => format!("#pragma stub race=detected\n{}", stub_source(0.5, &tag)),
                    _ => stub_source(0.1 + (h % 97) as f64 / 10.0, &tag),
                }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn run_invariants_hold(seed in any::<u64>(), iterations in 0u32..6, population in 1usize..5) {
        let task = stub_task(None);
        let cfg = EngineConfig { iterations, population_per_generation: population, rng_seed: seed, ..EngineConfig::default() };
        let eval = StubEvaluator::default();
        let run = |s| run_evolution(&task, &mut chaotic(s), &eval, &cfg);
        let Ok(result) = run(seed) else { return Ok(()); };

        // budget
        prop_assert!(result.texts_requested <= (iterations as usize + 1) * population);

        // best is the global maximum; running best never decreases
        let mut running = 0.0f64;
        for g in &result.trajectory.generations {
            for e in &g.entries {
                running = running.max(e.fitness);
            }
        }
        let best = result.trajectory.best.as_ref().map_or(0.0, |b| b.fitness);
        prop_assert_eq!(best, running);

        // nothing before first_valid is valid
        if let Some(fv) = &result.trajectory.first_valid {
            for e in result.trajectory.entries() {
                if e.candidate_id == fv.candidate_id { break; }
                prop_assert!(!e.is_valid());
            }
        }

        // determinism
        let again = run(seed).unwrap();
        prop_assert_eq!(&again.trajectory, &result.trajectory);
        prop_assert_eq!(&again.events, &result.events);
    }
}
