//! Compiles conditional preference and importance statements, organised as a
//! TCP-net, into generalized-additive value functions, ranks items with them
//! and refines them from pick-best feedback.

pub mod compiler;
pub mod elicitation;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod ranking;
pub mod simulation;
