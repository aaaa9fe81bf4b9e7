//! Exact symbolic computation in the super Yangian of `gl_{M|N}`, its twisted
//! super Yangian, their centers and quantum Berezinians.

pub mod check;
pub mod error;
pub mod ncalg;
pub mod perm;
pub mod rat;
pub mod ring;
pub mod series;
pub mod suites;
pub mod tensor;
pub mod twisted;
pub mod yangian;

pub use error::{KernelError, Result};
pub use rat::Rat;
