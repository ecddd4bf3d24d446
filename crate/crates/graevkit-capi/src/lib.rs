//! C ABI for the exact transport pipeline: opaque space handles, status
//! codes, and string-returning compute functions.

mod ffi;

pub use ffi::*;
