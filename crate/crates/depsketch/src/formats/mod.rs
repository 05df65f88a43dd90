//! Text, CSV, JSON and TOML encodings of the core types.

pub mod config;
pub mod csv;
pub mod dag;
pub mod operator;

pub use self::config::{load_toml, to_toml};
pub use self::dag::{parse_dag, parse_query, write_dag};
pub use self::operator::{
    format_f64, parse_f64, parse_matrices, parse_operator, write_matrices, write_operator, FloatStyle,
};
