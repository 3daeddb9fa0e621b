pub mod convergence;
pub mod evolution;
pub mod experiment;
pub mod fields;
pub mod grid;
pub mod nonlinearity;
pub mod resolvent;
