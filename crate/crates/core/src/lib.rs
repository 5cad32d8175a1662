//! Frozen-variable analysis of random K-SAT and K-COL phase transitions:
//! the `u(x, z)` surface, its spinodal and cusp, the threshold curve, closed
//! forms for 2-SAT and (2+p)-SAT, the K-COL conservation law, and a Monte
//! Carlo laboratory.

pub mod error;
pub mod io;
pub mod kcol;
pub mod numeric;
pub mod sim;
pub mod special;
pub mod surface;
pub mod threshold;

pub use error::{Error, Result};
pub use kcol::{ColGrid, ColState, SingularityReport};
pub use numeric::LinearFit;
pub use sim::{BrwRun, BrwSpec, CnfFormula, GraphInstance, McEstimate};
pub use surface::{Branch, CuspPoint, RootSet, SurfacePoint, SurfaceQuery};
pub use threshold::{BranchPolicy, Orientation, ThresholdCurve, TracePolicy};
