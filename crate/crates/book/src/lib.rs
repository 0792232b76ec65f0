//! The guide's chapters, included as module docs so `cargo test` runs every
//! Rust snippet in `book/src`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/grid.md")]
pub mod grid {}
#[doc = include_str!("../../../book/src/biot-savart.md")]
pub mod biot_savart {}
#[doc = include_str!("../../../book/src/time-stepping.md")]
pub mod time_stepping {}
#[doc = include_str!("../../../book/src/navier-condition.md")]
pub mod navier_condition {}
#[doc = include_str!("../../../book/src/pressure.md")]
pub mod pressure {}
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}
#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}
#[doc = include_str!("../../../book/src/adn.md")]
pub mod adn {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
