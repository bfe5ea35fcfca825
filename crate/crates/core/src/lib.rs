pub mod algebra;
pub mod bracket;
pub mod fields;
pub mod flows;
pub mod transitivity;
