//! Railway odometry kit: shaft-encoder decoding, a discrete odometer state
//! machine, a continuous sampling model, and the checkers that tie them
//! together.

pub mod cli;
pub mod config;
pub mod encoder;
pub mod fixture;
pub mod harness;
pub mod kinematics;
pub mod odometer;
pub mod word;

pub use config::{OdoConfig, Rational, SpeedScale};
pub use encoder::{phase, phase0, PhaseCode};
pub use kinematics::MotionProfile;
pub use odometer::{mk_init, odo_step, run, OdoInput, OdoOutput, OdoState, Odometer};
pub use word::{IWord32, Word32};
