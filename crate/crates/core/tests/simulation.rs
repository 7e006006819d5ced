mod common;

use common::{fixture, flight_net};
use gavf_core::compiler::compile;
use gavf_core::elicitation::{Mode, Session, SessionConfig, SessionStatus};
use gavf_core::ranking::top_k;
use gavf_core::simulation::{
    gen_random_net, run_experiment, run_once, sample_items, sample_user_value_fn, simulate_session,
    ExperimentConfig, ExperimentStats, GeneratorParams,
};

fn small_config(mode: Mode) -> ExperimentConfig {
    let mut config: ExperimentConfig = serde_json::from_str(&fixture("simulate.json")).unwrap();
    config.mode = mode;
    config.runs = 12;
    config.items = 60;
    config
}

#[test]
fn fixture_config_parses() {
    let config: ExperimentConfig = serde_json::from_str(&fixture("simulate.json")).unwrap();
    assert_eq!((config.runs, config.k, config.round_cap), (200, 10, 50));
    assert_eq!(config.params.ci_arc_count, [0, 1]);
    let minimal = r#"{"params": {"variable_count": [3, 4], "domain_size": [2, 2],
        "cp_edge_probability": 0.5, "max_in_degree": 1, "cpt_completeness": 1.0,
        "cpt_row_order": "partial"}, "mode": "additive_baseline", "runs": 3, "seed": 0}"#;
    let config: ExperimentConfig = serde_json::from_str(minimal).unwrap();
    assert_eq!((config.items, config.k, config.round_cap), (200, 10, 50));
    assert!(
        serde_json::from_str::<ExperimentConfig>(&minimal.replace("\"seed\"", "\"sed\"")).is_err()
    );
}

#[test]
fn experiments_are_deterministic() {
    for mode in [Mode::Ga, Mode::AdditiveBaseline] {
        let config = small_config(mode);
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.histogram.values().sum::<usize>(), config.runs);
        assert_eq!(a.histogram_text(), b.histogram_text());
        assert_eq!(run_once(&config, 5).unwrap(), a.records[5]);
    }
}

#[test]
fn modes_share_nets_users_and_items() {
    let ga = run_experiment(&small_config(Mode::Ga)).unwrap();
    let add = run_experiment(&small_config(Mode::AdditiveBaseline)).unwrap();
    for (g, a) in ga.records.iter().zip(&add.records) {
        assert_eq!(
            (g.seed, g.variables, g.items),
            (a.seed, a.variables, a.items)
        );
    }
}

#[test]
fn sampled_users_satisfy_the_base_system() {
    let params = GeneratorParams {
        i_arc_count: [0, 2],
        ci_arc_count: [0, 1],
        selector_size_max: 2,
        ..GeneratorParams::default()
    };
    for seed in 0..30 {
        let net = gen_random_net(&params, seed).unwrap();
        let user = sample_user_value_fn(&net, seed).unwrap();
        assert!(compile(&net).unwrap().satisfied_by(&user.entries()));
    }
    let flight = flight_net();
    let a = sample_user_value_fn(&flight, 1).unwrap();
    let b = sample_user_value_fn(&flight, 2).unwrap();
    assert_ne!(a, b);
    assert_eq!(a, sample_user_value_fn(&flight, 1).unwrap());
}

#[test]
fn engine_as_user_converges_at_once() {
    let net = flight_net();
    let items = sample_items(&net, 200, 4);
    assert_eq!(items.len(), 32);
    let session = Session::start("t", net.clone(), &items, &[], SessionConfig::default()).unwrap();
    let engine_v = session.value_function().clone();
    let outcome = simulate_session(&net, &engine_v, &items, SessionConfig::default()).unwrap();
    assert_eq!(
        (outcome.rounds, outcome.status),
        (0, SessionStatus::Converged)
    );

    let one = sample_items(&net, 1, 4);
    let user = sample_user_value_fn(&net, 9).unwrap();
    let outcome = simulate_session(&net, &user, &one, SessionConfig::default()).unwrap();
    assert_eq!(
        (outcome.rounds, outcome.status),
        (0, SessionStatus::Converged)
    );
}

#[test]
fn ga_users_never_trigger_relaxation() {
    let config = small_config(Mode::Ga);
    for run in 0..config.runs {
        let seed = gavf_core::simulation::run_seed(config.seed, run);
        let net = gen_random_net(&config.params, seed).unwrap();
        let user = sample_user_value_fn(&net, seed ^ 0x5EED_0001).unwrap();
        let items = sample_items(&net, config.items, seed ^ 0x5EED_0002);
        let mut session = Session::start("t", net, &items, &[], SessionConfig::default()).unwrap();
        while session.status() == SessionStatus::Active {
            let pick = top_k(&user, &items, items.len())
                .into_iter()
                .find(|r| session.display().iter().any(|d| d.id == r.id))
                .unwrap()
                .id;
            session.feedback(&pick).unwrap();
        }
        assert_eq!(session.status(), SessionStatus::Converged);
        assert!(session.rounds().iter().all(|r| !r.relaxation_applied));
    }
}

#[test]
fn stats_from_records() {
    let config = small_config(Mode::Ga);
    let mut records = run_experiment(&config).unwrap().records;
    for (i, r) in records.iter_mut().enumerate() {
        r.rounds = [0, 0, 1, 4][i % 4];
        r.status = if i == 0 {
            SessionStatus::Capped
        } else {
            SessionStatus::Converged
        };
    }
    let stats = ExperimentStats::from_records(records);
    assert_eq!(stats.histogram.get(&0), Some(&6));
    assert_eq!(stats.capped_count, 1);
    assert_eq!(stats.converged_count(), 11);
    assert_eq!(stats.fraction_immediate, 5.0 / 12.0);
    assert_eq!(stats.fraction_within_3, 8.0 / 12.0);
    assert_eq!(stats.median_rounds, 0.5);
}
