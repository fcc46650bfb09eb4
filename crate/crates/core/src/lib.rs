//! Monte Carlo synthesis of feedback controls for a collisional kinetic
//! model in one position and one velocity dimension.
//!
//! A backward particle solve of the augmented adjoint equation yields a
//! control field `u = (1/nu) d_v q`; a forward particle solver then applies
//! it to a Keilson-Storer collisional ensemble.
//!
//! ```no_run
//! use kinetic_control::{run_adjoint_oneshot, run_forward, initial_ensemble, SimConfig};
//!
//! let cfg = SimConfig::desk();
//! let adjoint = run_adjoint_oneshot(&cfg)?;
//! let run = run_forward(&cfg, &adjoint.control, initial_ensemble(&cfg)?)?;
//! println!("{} particles left", run.last().len());
//! # Ok::<(), kinetic_control::Error>(())
//! ```

pub mod adjoint;
pub mod collisions;
pub mod config;
pub mod control;
pub mod denoise;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod forward;
pub mod io;
pub mod objective;
pub mod rng;
pub mod sampling;
pub mod transport;

pub use adjoint::{run_adjoint_oneshot, AdjointRun};
pub use config::{InitialKind, SimConfig};
pub use control::ControlField;
pub use domain::{GridField, GridSpec, Particle, ParticleEnsemble, PhaseDomain};
pub use dynamics::{Integrator, Streaming};
pub use error::{Error, Result};
pub use forward::{initial_ensemble, run_forward, ForwardRun};
pub use io::RunReport;
