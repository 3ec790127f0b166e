//! Truncated tensor algebra, Lyndon words and path signatures.

mod lyndon;
mod signature;
mod truncated;
mod word;

pub use lyndon::{enumerate_lyndon, Bracket, LieElement, LyndonBasis};
pub use signature::{log_signature, signature};
pub use truncated::{level_offset, tensor_size, TruncatedTensor};
pub use word::Word;
