//! Grid fields, the discrete energy and its relaxation, blow-downs and the
//! recovery construction.

mod blowdown;
mod disc;
mod energy;
mod grid;
mod io;
mod probe;
mod recovery;
mod relax;
mod trace;

pub use blowdown::blowdown;
pub use disc::{solve_disc, DiscSolution, DiscSolveOptions};
pub use energy::{energy, energy_where, max_residual, residual_field};
pub use grid::{build_mask, sample_map, Bc, Domain, Field, GridSpec, LabelMap, NodeKind};
pub use io::{field_to_string, parse_field, read_field, write_field, write_pgm, MAGIC};
pub use probe::{local_min_probe, ProbeReport, Window};
pub use recovery::{profile_field, recovery_field, Schedule, C_SEP, HEIGHT_CONSTANT};
pub use relax::{relax, relax_with, RelaxMethod, RelaxOptions, RelaxReport};
pub use trace::{build_trace, build_trace_with, TraceData, SETTLED_TOL};
