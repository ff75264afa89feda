pub mod actions;
pub mod context;
pub mod eval;
pub mod fixtures;
pub mod ids;
pub mod kg;
pub mod linking;
pub mod parser;
pub mod sparql;
pub mod templates;
pub mod text;
