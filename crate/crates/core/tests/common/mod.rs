#![allow(dead_code)]

pub mod rs_oracle;
pub mod tip_oracle;
