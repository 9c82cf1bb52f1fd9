//! Scenario execution and test taxonomy.

mod builtin;
mod run;
mod scenario;
mod suite;
mod taxonomy;

pub use builtin::{
    builtin_scenario, collaborative_detection, lossy_broadcast, reordering, site_person, CollaborativeOptions,
    BUILTIN_SCENARIOS,
};
pub use run::{run_scenario, run_scenario_on, AgentSummary, AssertionOutcome, BusStats, EventOutcome, ScenarioReport};
pub use scenario::{
    load_scenario, read_scenario, save_scenario, write_scenario, Action, AgentSpec, BusConfig, Check, Scenario,
    ScriptEvent, TerrainSource, SCENARIO_FILE_VERSION,
};
pub use suite::{builtin_suite, run_builtin_suite, SuiteCase};
pub use taxonomy::{
    taxonomy_report, Challenge, Complexity, Fidelity, MatrixCell, TaxonomyReport, TestLevel, TestOutcome, TestTag,
};
