pub mod scalars;
pub mod grassmann;
pub mod expr;
pub mod osp21;
pub mod triangulation;
pub mod ptolemy;
pub mod instance;
pub mod oneloop;
pub mod pachner;
pub mod sample;
