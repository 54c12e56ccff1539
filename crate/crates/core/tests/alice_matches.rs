use num_bigint::BigUint;

use cantor_games::alice::{required_vertices, AliceConfig, OrbitMode, StagesAlice};
use cantor_games::bob::{GreedyFixed, RegionsDynamic};
use cantor_games::{run_match, Dyadic, GameConfig, GameKind, Player};

fn half() -> Dyadic {
    Dyadic::pow2_neg(1)
}

fn play(cap: usize, universe: BigUint) -> (cantor_games::MatchResult, StagesAlice) {
    let cfg = GameConfig::equivalent(GameKind::Nonbipartite, half(), universe);
    let mut alice = StagesAlice::new(AliceConfig { cap, ..AliceConfig::default() });
    let res = run_match(cfg, &mut alice, &mut GreedyFixed::new());
    (res, alice)
}

#[test]
fn more_explicit_stars_give_the_same_stages() {
    let need = required_vertices(&half()).unwrap();
    let (r2, a2) = play(2, need.clone());
    let (r3, a3) = play(3, need);
    assert_eq!(r2.outcome.winner, Player::Alice);
    assert_eq!(r3.outcome.winner, Player::Alice);
    assert!(a2.used_orbit() && a3.used_orbit());
    assert_eq!(a2.stage_logs(), a3.stage_logs());
    assert_eq!(a2.final_free_cell(), Some(false));
    assert_eq!(a3.final_free_cell(), Some(false));
    let zones: Vec<String> = a2.stage_logs().iter().map(|l| l.zone_b.to_string()).collect();
    assert_eq!(zones, ["1/2^2", "1/2^1", "3/2^2", "1/2^0"]);
}

#[test]
fn one_vertex_short_is_refused() {
    let need = required_vertices(&half()).unwrap();
    let (res, _) = play(2, need - 1u8);
    assert_eq!(res.outcome.winner, Player::Bob);
    assert!(res.outcome.reason.contains("insufficient active vertices"), "{}", res.outcome.reason);
}

#[test]
fn orbit_mode_needs_a_relabeling_invariant_bob() {
    let need = required_vertices(&half()).unwrap();
    let cfg = GameConfig::equivalent(GameKind::Nonbipartite, half(), need);
    let mut alice = StagesAlice::new(AliceConfig { mode: OrbitMode::Orbit, ..AliceConfig::default() });
    let mut bob = cantor_games::bob::ScriptedBob::new(Vec::new());
    let res = run_match(cfg, &mut alice, &mut bob);
    assert_eq!(res.outcome.winner, Player::Bob);
}

#[test]
fn dynamic_regions_run_out() {
    let need = required_vertices(&half()).unwrap();
    let cfg = GameConfig::equivalent(GameKind::Nonbipartite, half(), need);
    let mut alice = StagesAlice::new(AliceConfig::default());
    let mut bob = RegionsDynamic::for_budget(&half()).unwrap();
    let res = run_match(cfg, &mut alice, &mut bob);
    assert_eq!(res.outcome.winner, Player::Alice);
    assert!(res.outcome.reason.contains("no unassigned region"), "{}", res.outcome.reason);
}
