//! Search algorithms and the online-algorithm model.

pub mod brute;
pub mod events;
pub mod igp;
pub mod las;
pub mod online;

pub use brute::{binomial, brute_force, search_space, BruteOutcome, DEFAULT_BRUTE_BUDGET};
pub use events::{event_g_monitor, success_event, success_threshold};
pub use igp::{igp_run, igp_run_with, score_candidate, IgpOnline, IgpState, InitMode, RunTrace, TraceRow};
pub use las::{is_fixed_point, las_run, las_run_with_cap, LasOutcome, DEFAULT_LAS_CAP};
pub use online::{
    check_online, run_online, selection_from_increments, Increment, OnlineAlgorithm,
    OnlineCheckReport, TrialOutcome,
};
