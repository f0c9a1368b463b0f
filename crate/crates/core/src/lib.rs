pub mod error;
pub mod exec;
pub mod quad;
pub mod specfun;
pub mod gridops;
pub mod fracpoly;
pub mod fdesolve;
pub mod variational;
pub mod jetgeo;
pub mod models;
