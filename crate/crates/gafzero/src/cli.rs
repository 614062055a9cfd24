//! Run configuration, dispatch, and artifacts.
pub fn main() -> i32 { 0 }
