//! Low-discrepancy point sets and discrepancy measurement.
//!
//! The crate has three layers:
//!
//! * construction: digit arithmetic in coprime bases ([`radix`]) and the
//!   point-set generators built on it ([`pointsets`]) — Halton sequences
//!   with arbitrary (also negative, p-adic) start index, Hammersley nets
//!   and two symmetrized variants, and permutation-generalized Halton;
//! * measurement: local discrepancy plus exact-L2 (Warnock), Monte-Carlo
//!   L_p and exact-L_infinity engines ([`discrepancy`]), and the
//!   CRT/Fourier block decomposition of the truncated discrepancy with
//!   its integer-exact counting oracle ([`fourier`]);
//! * verification: scaling tables, normalized-discrepancy sampling,
//!   Gaussian moment/KS reports, and L_p/L_2 ratio tables against the
//!   normal-moment constants kappa_p ([`stats`]).
//!
//! Everything is deterministic: Monte-Carlo draws come from per-sample
//! counter-based substreams of a seeded ChaCha generator, and parallel
//! reductions use fixed orders, so results do not depend on thread count.
//!
//! The `lodisc` binary exposes the same functionality as subcommands
//! (`gen`, `disc`, `selftest`, `clt`, `scaling`, `ratio`); runnable demos
//! live in `examples/`.

mod accum;

pub mod cli;
pub mod discrepancy;
pub mod error;
pub mod fourier;
pub mod io;
pub mod pointsets;
pub mod radix;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
