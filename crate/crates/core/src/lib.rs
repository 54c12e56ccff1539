pub mod alice;
pub mod bob;
pub mod cantor;
pub mod dyadic;
pub mod error;
pub mod families;
pub mod plain;
pub mod referee;

pub use cantor::{CantorInterval, ClopenSet};
pub use dyadic::Dyadic;
pub use error::{CantorError, ParseError, PlainError, StrategyError};
pub use referee::{
    run_match, AliceMove, AliceStrategy, BobMove, BobStrategy, Edge, GameConfig, GameKind, GameState,
    MatchResult, Node, Outcome, Part, Player, Trace,
};
