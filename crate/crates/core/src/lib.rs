pub mod kernel;
pub mod lfp;
pub mod literal;
pub mod nat;
pub mod realize;
pub mod universe;
pub mod verdict;

pub use nat::Nat;
pub use verdict::Verdict;
