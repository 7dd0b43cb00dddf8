//! Symbolic-numeric analysis of q-algebraic functional equations.

pub mod asymptotics;
pub mod corpus;
pub mod parser;
pub mod qpoly;
pub mod reduction;
pub mod scalar;
pub mod series;
pub mod structure;
