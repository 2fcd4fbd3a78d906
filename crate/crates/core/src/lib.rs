pub mod hypothesis;
pub mod game;
pub mod metric_core;
pub mod players;
pub mod fixtures;
pub mod cli;
