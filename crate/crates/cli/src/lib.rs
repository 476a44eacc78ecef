//! Library side of the `gis` command: JSON problem documents, result
//! shapes, and the deterministic verification suites. The binary in
//! `main.rs` is a thin argument-parsing layer over these modules.

pub mod schema;
pub mod verify;
