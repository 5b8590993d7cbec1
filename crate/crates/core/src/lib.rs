pub mod whmm;
pub mod kripke;
pub mod bridge;
pub mod fixtures;
pub mod experiment;
