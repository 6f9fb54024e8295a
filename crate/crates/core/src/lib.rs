pub mod gwt;
pub mod mapping;
pub mod petri;
pub mod runtime;
pub mod session;
