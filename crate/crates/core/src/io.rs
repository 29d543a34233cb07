//! On-disk field format.
//!
//! A field is a JSON header plus a raw little-endian `f64` sidecar. The
//! payload is the array `[components][nx][ny][nz]` in row-major order, so
//! the last grid axis varies fastest. The membership mask is not stored; it
//! is recomputed from the half space on load.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxField, BoxGrid, PerturbedHalfSpace, Point};

pub const DTYPE: &str = "f64le";
pub const ORDER: &str = "row-major";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dims: usize,
    pub lower: Point,
    pub upper: Point,
    pub resolution: [usize; 3],
    pub components: usize,
    pub dtype: String,
    pub order: String,
    /// Sidecar file name, resolved against the header's directory.
    pub data: String,
}

impl FieldHeader {
    pub fn for_field(field: &BoxField, data: impl Into<String>) -> Self {
        let g = field.grid();
        Self {
            dims: 3,
            lower: g.lower,
            upper: g.upper,
            resolution: g.resolution,
            components: field.components(),
            dtype: DTYPE.into(),
            order: ORDER.into(),
            data: data.into(),
        }
    }

    pub fn grid(&self) -> Result<BoxGrid> {
        if self.dims != 3 {
            return Err(Error::invalid(format!("only 3-dimensional fields are supported, got dims = {}", self.dims)));
        }
        if self.dtype != DTYPE || self.order != ORDER {
            return Err(Error::invalid(format!("unsupported layout {}/{}", self.dtype, self.order)));
        }
        BoxGrid::new(self.lower, self.upper, self.resolution)
    }

    fn payload_bytes(&self) -> usize {
        self.resolution.iter().product::<usize>() * self.components * 8
    }
}

/// Sidecar path for a header path: `v.json` → `v.f64`.
pub fn sidecar_path(header: &Path) -> PathBuf {
    header.with_extension("f64")
}

pub fn encode(field: &BoxField) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.grid().len() * field.components() * 8);
    for c in field.data() {
        for x in c {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

/// Inverse of [`encode`]; the mask comes from `hs`.
pub fn decode(hs: &PerturbedHalfSpace, header: &FieldHeader, bytes: &[u8]) -> Result<BoxField> {
    let grid = header.grid()?;
    if bytes.len() != header.payload_bytes() {
        return Err(Error::invalid(format!(
            "payload holds {} bytes, header implies {}",
            bytes.len(),
            header.payload_bytes()
        )));
    }
    let n = grid.len();
    let values: Vec<f64> =
        bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("chunks of eight"))).collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("payload contains non-finite values"));
    }
    let data = values.chunks(n).map(<[f64]>::to_vec).collect();
    let mask = BoxField::membership(hs, &grid);
    BoxField::new(grid, data, mask)
}

/// Writes `header` (JSON) and its sidecar next to it. Returns the sidecar path.
pub fn write_field(header: &Path, field: &BoxField) -> Result<PathBuf> {
    let sidecar = sidecar_path(header);
    let name = sidecar
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::invalid(format!("bad header path {}", header.display())))?;
    let meta = FieldHeader::for_field(field, name);
    fs::write(header, serde_json::to_string_pretty(&meta)? + "\n")?;
    fs::write(&sidecar, encode(field))?;
    Ok(sidecar)
}

pub fn read_header(header: &Path) -> Result<FieldHeader> {
    Ok(serde_json::from_str(&fs::read_to_string(header)?)?)
}

pub fn read_field(hs: &PerturbedHalfSpace, header: &Path) -> Result<BoxField> {
    let meta = read_header(header)?;
    let dir = header.parent().unwrap_or_else(|| Path::new("."));
    let bytes = fs::read(dir.join(&meta.data))?;
    decode(hs, &meta, &bytes)
}
