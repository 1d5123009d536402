//! Braid-based key agreement, the Jones polynomial, and a few combinatorial
//! side models: Laplace-style succession rules, the push game on simplicial
//! boards and reachability entropy of graphs.

pub mod braid;
pub mod compose;
pub mod entropy;
pub mod fixtures;
pub mod jones;
pub mod laurent;
pub mod protocol;
pub mod pushgame;
pub mod succession;
