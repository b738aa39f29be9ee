//! Lesion-wise evaluation of 3D segmentation masks.
//!
//! Voxel-wise scores such as Dice are dominated by large lesions: a model
//! that finds one big lesion and misses five small ones can still score
//! 0.97. This crate evaluates at the lesion level instead:
//!
//! 1. [`volume`] reads NIfTI-1 (plain or gzipped) or JSON fixture masks;
//! 2. [`components`] splits each binary mask into connected lesions;
//! 3. [`matching`] pairs GT and predicted lesions one-to-one, greedily by
//!    IoU, keeping pairs with IoU strictly above τ (default 0.35);
//! 4. [`metrics`] scores each matched pair (Dice, IoU, HD95, ASSD) and
//!    counts TP/FP/FN;
//! 5. [`stratify`] splits everything into size bins (very small < 10
//!    voxels, small < 100, medium < 400, large);
//! 6. [`report`] writes JSON and CSV reports.
//!
//! [`pipeline::evaluate_pair`] runs steps 2–5 on one pair and
//! [`batch::run_manifest`] runs a whole manifest in parallel.
//! [`synth`] generates masks with known correspondences for tuning τ, and
//! [`oracle`] holds the brute-force references the tests compare against.
//!
//! ```
//! use lesion_eval::{evaluate_pair, EvalConfig, Volume};
//!
//! let mut gt = vec![0u8; 16 * 16 * 4];
//! gt[0] = 1; // a one-voxel lesion
//! for i in 100..110 {
//!     gt[i] = 1; // and a ten-voxel one
//! }
//! let gt = Volume::from_mask([16, 16, 4], [1.0; 3], gt).unwrap();
//! let s = evaluate_pair("demo", &gt, &gt, &EvalConfig::default()).unwrap();
//! assert_eq!((s.detection.tp, s.detection.fp, s.detection.fn_), (2, 0, 0));
//! ```

pub mod batch;
pub mod cli;
pub mod components;
pub mod error;
pub mod matching;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod stratify;
pub mod synth;
pub mod volume;

pub use batch::{run_manifest, Manifest};
pub use components::{find_connected_components, Connectivity, Lesion, LesionSet};
pub use error::{Error, Result};
pub use matching::{match_lesions, MatchSet, DEFAULT_TAU};
pub use metrics::{DetectionCounts, DistanceOptions, DistanceUnits, Hd95Variant, LesionPairMetrics};
pub use pipeline::{evaluate_pair, EvalConfig, SampleEvaluation};
pub use report::{emit_reports, OutputFormat, StratifiedReport};
pub use stratify::{categorize, SizeBin};
pub use volume::{read_volume, write_volume, Volume, VoxelData};
