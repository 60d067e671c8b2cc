use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::eval::{read_icdar_gt, AnnotationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// One `gt_<image>.txt` per image with ICDAR quadrilateral lines.
    IcdarTxt,
}

fn io_err(path: &Path, e: impl ToString) -> PipelineError {
    PipelineError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn image_id(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_prefix("gt_").map(str::to_string).unwrap_or(stem)
}

/// Reads `src`, a single ground-truth file or a directory of `.txt` files,
/// into one record per file sorted by file name.
pub fn load_dataset(format: DatasetFormat, src: &Path) -> Result<Vec<AnnotationRecord>, PipelineError> {
    let DatasetFormat::IcdarTxt = format;
    let files: Vec<PathBuf> = if src.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(src)
            .map_err(|e| io_err(src, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("txt")))
            .collect();
        files.sort();
        files
    } else {
        vec![src.to_path_buf()]
    };
    let mut records = Vec::with_capacity(files.len());
    for f in &files {
        records.push(AnnotationRecord::from_gt(image_id(f), &read_icdar_gt(f)?));
    }
    Ok(records)
}

/// Converts `src` to unified JSON Lines at `dst`. Returns the records
/// written.
pub fn convert_dataset(format: DatasetFormat, src: &Path, dst: &Path) -> Result<Vec<AnnotationRecord>, PipelineError> {
    let records = load_dataset(format, src)?;
    let mut buf = Vec::new();
    write_annotations(&records, &mut buf).map_err(|e| io_err(dst, e))?;
    if let Some(dir) = dst.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(dst, buf).map_err(|e| io_err(dst, e))?;
    Ok(records)
}

pub fn write_annotations(records: &[AnnotationRecord], out: &mut dyn Write) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r).expect("annotation records serialize"))?;
    }
    Ok(())
}
