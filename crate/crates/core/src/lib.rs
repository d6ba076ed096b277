//! Sans-IO core of the touch-screen teleoperation stack.

pub mod geometry;
pub mod gesture;
pub mod interaction;
pub mod knowledge;
pub mod latency;
pub mod raster;
pub mod recognition;
pub mod scenario;
pub mod space;
pub mod synth;
pub mod trace;
pub mod view;
pub mod wire;
pub mod world;
