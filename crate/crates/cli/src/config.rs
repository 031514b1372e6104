//! TOML configuration file. Every section and key is optional; unknown keys
//! are rejected. Command-line flags override file values.
//!
//! ```toml
//! output_dir = "out"
//!
//! [ingest]
//! unit_scale = 0.3048      # raw speed units to m/s (NGSIM: ft/s)
//! max_gap_frames = 1
//! delimiter = ","
//! header = "auto"          # auto | present | absent
//! strict = false
//! vehicle = 1
//! columns = { vehicle_id = 0, frame_id = 1, velocity = 11 }
//!
//! [nn]
//! spacing = 2.5
//! fallback = "zerorow"     # zerorow | hold | uniform
//!
//! [fc]
//! sigma = 1.0
//! quad_step = 0.01
//!
//! [lstm]
//! epochs = 150
//! hidden_size = 100
//! learning_rate = 0.005
//! grad_clip_norm = 1.0
//! seed = 42
//!
//! [experiment]
//! rounds = 3
//! horizon = 10
//! closed_loop_horizon = 40
//! methods = ["nn", "fc"]
//! protocol = "batch"        # batch | online (rounds subcommand)
//! compare_protocol = "online"
//! ```

use serde::{Deserialize, Serialize};

use seqcast::eval::{FcConfig, Method, NnConfig, Protocol, DEFAULT_CLOSED_LOOP_HORIZON};
use seqcast::lstm::TrainConfig;
use seqcast::trajectory::{ColumnMap, HeaderMode, IngestConfig};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub output_dir: Option<String>,
    pub ingest: IngestSection,
    pub nn: NnConfig,
    pub fc: FcConfig,
    pub lstm: TrainConfig,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestSection {
    pub unit_scale: f64,
    pub max_gap_frames: i64,
    pub delimiter: char,
    pub header: HeaderMode,
    pub strict: bool,
    pub vehicle: Option<i64>,
    pub columns: ColumnMap,
}

impl Default for IngestSection {
    fn default() -> Self {
        let d = IngestConfig::default();
        Self {
            unit_scale: d.unit_scale,
            max_gap_frames: d.max_gap_frames,
            delimiter: d.delimiter,
            header: d.header,
            strict: d.strict,
            vehicle: None,
            columns: d.column_map,
        }
    }
}

impl IngestSection {
    pub fn to_ingest_config(&self) -> IngestConfig {
        IngestConfig {
            column_map: self.columns,
            unit_scale: self.unit_scale,
            max_gap_frames: self.max_gap_frames,
            delimiter: self.delimiter,
            header: self.header,
            strict: self.strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub rounds: usize,
    pub horizon: usize,
    pub closed_loop_horizon: usize,
    pub methods: Vec<Method>,
    pub protocol: Protocol,
    pub compare_protocol: Protocol,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            rounds: 3,
            horizon: 10,
            closed_loop_horizon: DEFAULT_CLOSED_LOOP_HORIZON,
            methods: vec![Method::Nn, Method::Fc],
            protocol: Protocol::Batch,
            compare_protocol: Protocol::Online,
        }
    }
}

impl CliConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
