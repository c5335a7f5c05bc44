//! Command-line front end.
pub fn main_entry() {}
