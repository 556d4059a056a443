pub mod bench;
pub mod collision;
pub mod engine;
pub mod env;
pub mod geometry;
pub mod render;
pub mod scenario;
pub mod spatial;
