use std::sync::Arc;

use cantor_games::bob::{RestrictedBob, RestrictedParams};
use cantor_games::families::{
    ColoringFamily, ColoringParams, DominanceFamily, DominanceParams,
};
use cantor_games::{BobMove, BobStrategy, Dyadic, Node, Edge, GameConfig, GameState, StrategyError};

// Sizes 2^-6 and 2^-7 over 8 strings, 16 top blocks of 1/32.
fn tiny(words: [[u8; 16]; 8], r: usize, regions: usize) -> (GameState, RestrictedBob) {
    let cfg = GameConfig::restricted(7, 2, Dyadic::one());
    let mut params = RestrictedParams::scaled(7, 2, Dyadic::one(), 3);
    assert_eq!(params.sizes, vec![6, 7]);
    params.coloring = ColoringParams::new(7, 3, r, 16);
    params.dominance = DominanceParams { n: 7, m: 3, s: 2 };
    params.regions = regions;
    let syms = words.iter().flatten().copied().collect();
    let coloring = ColoringFamily::from_symbols(params.coloring.clone(), 0, 0, syms).unwrap();
    let rows: Vec<Vec<bool>> = PATTERNS.iter().map(|p| p.to_vec()).collect();
    let dominance = DominanceFamily::from_bits(params.dominance.clone(), &rows).unwrap();
    let bob = RestrictedBob::new(params, Arc::new(coloring), Arc::new(dominance)).unwrap();
    (GameState::new(cfg), bob)
}

fn offer(g: &mut GameState, bob: &mut RestrictedBob, x: u64, y: u64, k: u64) -> Result<BobMove, StrategyError> {
    let req = vec![(Edge::between(x, y), Dyadic::pow2_neg(k))];
    g.apply_alice_move(&req).unwrap();
    let mv = bob.respond(g, &req)?;
    g.apply_bob_move(&mv.labels).unwrap();
    assert!(g.unsatisfied().is_empty());
    Ok(mv)
}

fn play(g: &mut GameState, bob: &mut RestrictedBob, x: u64, y: u64, k: u64) -> String {
    offer(g, bob, x, y, k).unwrap();
    g.label(&Edge::between(x, y)).to_string()
}

const A: [u8; 16] = [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2];
const B: [u8; 16] = [0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const C: [u8; 16] = [1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const WORDS: [[u8; 16]; 8] = [A, B, A, C, A, A, C, C];
const F: bool = false;
const T: bool = true;
const PATTERNS: [[bool; 2]; 8] = [[F, F], [T, F], [F, F], [T, T], [F, F], [F, F], [T, T], [T, T]];

#[test]
fn fresh_state_uses_least_common_block() {
    let (mut g, mut bob) = tiny(WORDS, 3, 2);
    assert_eq!(play(&mut g, &mut bob, 0, 2, 6), "000000");
    // size 2^-7 starts on color 1: common blocks 9..13
    assert_eq!(play(&mut g, &mut bob, 0, 4, 7), "0100100");
    assert_eq!(bob.top_allocations(), 2);
    assert!(bob.blame_log().is_empty());
}

#[test]
fn color_rotates_after_an_eighth_is_full() {
    let (mut g, mut bob) = tiny(WORDS, 3, 2);
    play(&mut g, &mut bob, 0, 2, 6);
    assert_eq!(bob.active_color(0, 6), Some(0));
    assert_eq!(play(&mut g, &mut bob, 0, 4, 6), "000010");
    // two of nine blocks full: 8 * 2 >= 9
    assert_eq!(bob.active_color(0, 6), Some(2));
    assert_eq!(bob.active_color(0, 7), Some(1));
    assert_eq!(bob.active_color(4, 6), Some(0));
    assert_eq!(bob.colors_full_of(0), 1);
    assert_eq!(play(&mut g, &mut bob, 2, 4, 6), "000100");
}

#[test]
fn no_inactive_color_left() {
    let two = [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1];
    let (mut g, mut bob) = tiny([two; 8], 2, 2);
    play(&mut g, &mut bob, 0, 2, 6);
    assert!(matches!(offer(&mut g, &mut bob, 0, 4, 6), Err(StrategyError::NoInactiveColorLeft(0))));
}

#[test]
fn blame_goes_to_the_string_whose_common_blocks_are_full() {
    let (mut g, mut bob) = tiny(WORDS, 3, 2);
    play(&mut g, &mut bob, 0, 2, 6);
    // strings 1 and 2 share only block 0, which is full for 2
    let mv = offer(&mut g, &mut bob, 1, 2, 6).unwrap();
    assert_eq!(mv.blames, vec![(Edge::between(1, 2), Node::left(2))]);
    // first bottom block is dominant for 1 and submissive for 2
    assert_eq!(mv.labels[0].1.to_string(), "100000");
    assert_eq!(bob.blames_of(2), 1);
    assert_eq!(bob.blames_of(1), 0);
    assert_eq!(bob.bottom_allocations(), 1);
}

#[test]
fn bottom_regions_rotate_and_run_out() {
    let (mut g, mut bob) = tiny(WORDS, 3, 3);
    // no common color-0 block: nothing is full, the smaller string is blamed
    assert_eq!(play(&mut g, &mut bob, 0, 7, 6), "100000");
    assert_eq!(bob.blames_of(0), 1);
    assert_eq!(play(&mut g, &mut bob, 2, 7, 6), "100001");
    // block 0 of region 0 is full for 7, one of its two dominant blocks
    assert_eq!(bob.active_region(7, 6), Some(2));
    assert_eq!(bob.active_region(7, 7), Some(1));
    assert_eq!(play(&mut g, &mut bob, 4, 7, 6), "110000");
    assert!(matches!(offer(&mut g, &mut bob, 5, 7, 6), Err(StrategyError::NoCandidateBlock(_))));
}
