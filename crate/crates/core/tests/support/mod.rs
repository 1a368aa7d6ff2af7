//! Reference implementations shared by the integration tests. They avoid
//! the library's own linear algebra so agreement is meaningful.
#![allow(dead_code)]

pub mod brute;
pub mod svd;
