#![allow(dead_code)]

pub mod exhaustive;
pub mod go_oracle;
