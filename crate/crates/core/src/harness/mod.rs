//! Dataset-level tooling: patch corpora, evaluation runs and reports, the
//! equivalent-quality and frequency-saturation analyses, and a desk-scale
//! trainer.

pub mod config;
pub mod io;
pub mod patches;
pub mod analysis;
pub mod eval;
pub mod report;
pub mod train;

pub use analysis::{equivalent_quality, frequency_saturation, frequency_saturation_quantized, EquivalentQuality, FrequencyGrouping};
pub use config::{with_threads, RunConfig};
pub use eval::{
    evaluate_dataset, evaluate_image, evaluate_images, improvement_curve, mean_rows, read_records_csv, write_curve_csv,
    write_records_csv, EvalOptions, EvaluationRecord, EvaluationRun, Failure, EVAL_SCHEMA, MEAN_ID,
};
pub use io::{encode_pnm, image_id, list_images, read_image, write_image};
pub use patches::{crop_coordinates, extract_patches, load_patch_pairs, ManifestEntry, PatchManifest, PatchPair, PatchSpec};
pub use report::{markdown, psnr_svg, summarize, write_report, ReportSection, SummaryRow};
pub use train::{smoke_train, StepLog, TrainConfig, TrainOutcome, TrainStage};
