pub mod channels;
pub mod decomposition;
pub mod capacity;
pub mod error;
pub mod matrix;
pub mod optimize;
pub mod random;
pub mod rotation;
pub mod serde_util;
pub mod state;
pub mod verification;
