//! Acceptance suite for `pdc-modes`; everything lives in `tests/acceptance.rs`.
//!
//! Run it with `cargo test -p pdc-modes-validation --test acceptance`.
