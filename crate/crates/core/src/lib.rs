pub mod boundary;
pub mod bulk;
pub mod error;
pub mod kmatrix;
pub mod linalg;
pub mod markov;
pub mod rational;
pub mod sampling;
pub mod sim;
pub mod verify;
