pub mod algebra;
pub mod analysis;
pub mod cli;
pub mod db;
pub mod enumerate;
pub mod identifiability;
pub mod ioeq;
pub mod model;
