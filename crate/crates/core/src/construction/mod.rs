//! The interval-swap construction: stage schedules, gap classes, swap maps,
//! the sequences `x_n` and `z_n`, the grid model and the bias diagnostics.

pub mod classes;
pub mod diagnostics;
pub mod rn;
pub mod run;
pub mod schedule;
pub mod swap;

pub use classes::{gap_classes, GapClass, GapClassTable};
pub use diagnostics::{key_window, midpoint_and_bias, stage_diagnostics, BiasReport, ClassRow, StageDiagnostics};
pub use rn::{generate_rn, sorted_gap_array, RnSample};
pub use run::{construct, ConstructionRun, Record, StageData};
pub use schedule::{discretize, stage_of, validate_schedule, ScheduleViolation, StageSchedule};
pub use swap::{apply_swap, build_swap_map, SwapMap, SwapPair};
