pub mod geom;
pub mod seed;
pub mod worldgen;
pub mod terrain;
pub mod navgraph;
pub mod agent;
pub mod episode;
pub mod rewards;
pub mod eval;
pub mod cli;
