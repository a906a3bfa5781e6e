pub mod coeff;
pub mod error;
pub mod series;
pub mod vfield;
pub mod diffeo;
pub mod regularize;
pub mod birkhoff;
pub mod normalforms;
pub mod cli;
