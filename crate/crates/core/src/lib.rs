//! Continuous-stroke rendering from an array of rotating tactors.
//!
//! Each tactor sweeps one revolution and drags across the skin for a short arc; staggering
//! the motor onsets makes the separate passes read as one moving contact. The modules cover
//! the contact geometry and speeds ([`kinematics`]), fixed-rate motor references
//! ([`scheduler`], exported through [`stream`]), a simulated geared DC motor under PID
//! control ([`motorsim`]), device configuration ([`config`]), and the two rating studies
//! ([`study`]). [`cli`] backs the `slipstroke` binary.

pub mod cli;
pub mod config;
pub mod kinematics;
pub mod motorsim;
pub mod scheduler;
pub mod stream;
pub mod study;
