pub mod dynamics;
pub mod error;
pub mod fd;
pub mod fock;
pub mod metric;
pub mod su11;
pub mod casimir;
pub mod symmetry;
pub mod observables;
