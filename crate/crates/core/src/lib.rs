pub mod cli;
pub mod expr;
pub mod io;
pub mod linalg;
pub mod models;
pub mod numeric;
pub mod routines;
pub mod symbolic;
