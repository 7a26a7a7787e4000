//! Record readers, library and bundle persistence, and SVG output.

pub mod bundle;
pub mod csv;
pub mod library;
pub mod ptbxl;
pub mod svg;
pub mod wfdb;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use self::bundle::BeatBundle;
pub use self::csv::{read_csv, write_csv};
pub use self::library::{load_library, save_library};
pub use self::svg::{confusion_svg, library_svg, svg_comparison, Band, Curve};
pub use self::wfdb::{read_wfdb, write_wfdb};

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
