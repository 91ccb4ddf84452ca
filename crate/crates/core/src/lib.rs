pub mod error;
pub mod exact;
pub mod word;
pub mod boundary;
pub mod representation;
pub mod averaging;
pub mod equidistribution;
pub mod verify;
