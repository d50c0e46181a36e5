//! Label masks, probability grids and their on-disk encodings.
//!
//! Two file formats are supported:
//!
//! * PNG, 8- or 16-bit single-channel grayscale, pixel value = class id.
//!   Pixel `(row r, col c)` maps to row-major index `r * width + c`.
//! * MGRID, a small little-endian container for 2D/3D grids:
//!
//!   ```text
//!   "MGRD" | version u8 = 1 | dtype u8 (0 = u16 labels, 1 = f32 probabilities)
//!          | ndim u8 (2 or 3) | dims: u32 per axis | spacing: f32 per axis
//!          | row-major payload
//!   ```
//!
//! Spacing is held as `f64` in memory and stored as `f32` in MGRID files, so
//! it round-trips exactly for every `f32`-representable step.

use std::collections::BTreeSet;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer class identifier. The 16-bit width is the class-id ceiling.
pub type ClassId = u16;

pub const MGRID_MAGIC: &[u8; 4] = b"MGRD";
pub const MGRID_VERSION: u8 = 1;
const PNG_SIGNATURE: &[u8; 8] = b"\x89PNG\r\n\x1a\n";

const DTYPE_LABELS: u8 = 0;
const DTYPE_PROBABILITIES: u8 = 1;

/// On-disk mask encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskFormat {
    Png8,
    Png16,
    Mgrid,
}

impl MaskFormat {
    /// Guess a format from a file extension. `.png` maps to 8-bit PNG.
    pub fn from_extension(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(MaskFormat::Png8),
            "mgrid" | "mgrd" => Some(MaskFormat::Mgrid),
            _ => None,
        }
    }

    fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(PNG_SIGNATURE) {
            Some(MaskFormat::Png8)
        } else if bytes.starts_with(MGRID_MAGIC) {
            Some(MaskFormat::Mgrid)
        } else {
            None
        }
    }

    fn is_png(self) -> bool {
        matches!(self, MaskFormat::Png8 | MaskFormat::Png16)
    }
}

fn validate_geometry(shape: &[usize], len: usize, spacing: &[f64]) -> Result<()> {
    if !(2..=3).contains(&shape.len()) {
        return Err(Error::InvalidMask(format!(
            "expected 2 or 3 axes, got {}",
            shape.len()
        )));
    }
    if shape.contains(&0) {
        return Err(Error::InvalidMask(format!("zero-length axis in {shape:?}")));
    }
    let expected = shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::InvalidMask(format!("shape {shape:?} overflows")))?;
    if expected != len {
        return Err(Error::InvalidMask(format!(
            "{len} values for shape {shape:?} (expected {expected})"
        )));
    }
    if spacing.len() != shape.len() {
        return Err(Error::InvalidMask(format!(
            "{} spacing entries for {} axes",
            spacing.len(),
            shape.len()
        )));
    }
    if let Some(s) = spacing.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidMask(format!("spacing entry {s} is not > 0")));
    }
    Ok(())
}

/// A dense integer label raster (2D or 3D) with per-axis physical spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMask {
    shape: Vec<usize>,
    labels: Vec<ClassId>,
    spacing: Vec<f64>,
}

impl LabelMask {
    /// Builds a mask with unit spacing.
    pub fn new(shape: Vec<usize>, labels: Vec<ClassId>) -> Result<Self> {
        let spacing = vec![1.0; shape.len()];
        Self::with_spacing(shape, labels, spacing)
    }

    pub fn with_spacing(shape: Vec<usize>, labels: Vec<ClassId>, spacing: Vec<f64>) -> Result<Self> {
        validate_geometry(&shape, labels.len(), &spacing)?;
        Ok(LabelMask {
            shape,
            labels,
            spacing,
        })
    }

    /// A mask filled with one label.
    pub fn filled(shape: Vec<usize>, label: ClassId) -> Result<Self> {
        let n = shape.iter().product();
        Self::new(shape, vec![label; n])
    }

    /// Same labels and shape, new spacing.
    pub fn respaced(&self, spacing: Vec<f64>) -> Result<Self> {
        Self::with_spacing(self.shape.clone(), self.labels.clone(), spacing)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, coords: &[usize]) -> Option<ClassId> {
        index_of(&self.shape, coords).map(|i| self.labels[i])
    }

    pub fn count(&self, class: ClassId) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    pub fn contains(&self, class: ClassId) -> bool {
        self.labels.contains(&class)
    }

    pub fn max_label(&self) -> ClassId {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Distinct labels in ascending order.
    pub fn present_labels(&self) -> BTreeSet<ClassId> {
        self.labels.iter().copied().collect()
    }

    /// Extracts slice `index` along the first axis of a 3D mask as a 2D mask.
    /// A 2D mask is returned unchanged for index 0.
    pub fn slice(&self, index: usize) -> Result<LabelMask> {
        match self.shape.len() {
            2 if index == 0 => Ok(self.clone()),
            2 => Err(Error::InvalidMask(format!("slice {index} of a 2D mask"))),
            _ => {
                if index >= self.shape[0] {
                    return Err(Error::InvalidMask(format!(
                        "slice {index} out of range for depth {}",
                        self.shape[0]
                    )));
                }
                let plane = self.shape[1] * self.shape[2];
                let labels = self.labels[index * plane..(index + 1) * plane].to_vec();
                LabelMask::with_spacing(
                    self.shape[1..].to_vec(),
                    labels,
                    self.spacing[1..].to_vec(),
                )
            }
        }
    }
}

/// Row-major linear index of `coords`, or `None` when out of bounds.
pub fn index_of(shape: &[usize], coords: &[usize]) -> Option<usize> {
    if coords.len() != shape.len() {
        return None;
    }
    let mut idx = 0usize;
    for (&c, &n) in coords.iter().zip(shape) {
        if c >= n {
            return None;
        }
        idx = idx * n + c;
    }
    Some(idx)
}

/// Coordinates of a row-major linear index.
pub fn coords_of(shape: &[usize], mut index: usize) -> Vec<usize> {
    let mut coords = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        coords[axis] = index % shape[axis];
        index /= shape[axis];
    }
    coords
}

/// True iff the two masks have element-wise equal shapes.
///
/// Spacing is not compared; see [`spacing_matches`].
pub fn shape_compatible(a: &LabelMask, b: &LabelMask) -> bool {
    a.shape == b.shape
}

pub fn spacing_matches(a: &LabelMask, b: &LabelMask) -> bool {
    a.spacing == b.spacing
}

/// A soft prediction: per-element foreground probability in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    shape: Vec<usize>,
    values: Vec<f32>,
    spacing: Vec<f64>,
}

impl ProbabilityGrid {
    pub fn new(shape: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        let spacing = vec![1.0; shape.len()];
        Self::with_spacing(shape, values, spacing)
    }

    pub fn with_spacing(shape: Vec<usize>, values: Vec<f32>, spacing: Vec<f64>) -> Result<Self> {
        validate_geometry(&shape, values.len(), &spacing)?;
        Ok(ProbabilityGrid {
            shape,
            values,
            spacing,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Index and value of the first entry outside `[0, 1]` (NaN included).
    pub fn first_out_of_range(&self) -> Option<(usize, f32)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(v))
    }

    /// Hard mask: `foreground` where probability ≥ `threshold`, else `background`.
    pub fn binarize(&self, threshold: f32, foreground: ClassId, background: ClassId) -> LabelMask {
        let labels = self
            .values
            .iter()
            .map(|&v| if v >= threshold { foreground } else { background })
            .collect();
        LabelMask {
            shape: self.shape.clone(),
            labels,
            spacing: self.spacing.clone(),
        }
    }
}

/// Contents of a grid file: hard labels or probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Labels(LabelMask),
    Probabilities(ProbabilityGrid),
}

/// One named class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub class_id: ClassId,
    pub name: String,
    #[serde(default)]
    pub is_background: bool,
}

/// Names the classes of a dataset and marks at most one as background.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ClassEntry>", into = "Vec<ClassEntry>")]
pub struct ClassCatalog {
    entries: Vec<ClassEntry>,
}

impl TryFrom<Vec<ClassEntry>> for ClassCatalog {
    type Error = Error;

    fn try_from(entries: Vec<ClassEntry>) -> Result<Self> {
        ClassCatalog::new(entries)
    }
}

impl From<ClassCatalog> for Vec<ClassEntry> {
    fn from(c: ClassCatalog) -> Self {
        c.entries
    }
}

impl ClassCatalog {
    /// Validates uniqueness and the single-background rule; entries are kept
    /// sorted by class id.
    pub fn new(mut entries: Vec<ClassEntry>) -> Result<Self> {
        entries.sort_by_key(|e| e.class_id);
        if let Some(w) = entries.windows(2).find(|w| w[0].class_id == w[1].class_id) {
            return Err(Error::DuplicateClass(w[0].class_id));
        }
        if entries.iter().filter(|e| e.is_background).count() > 1 {
            return Err(Error::InvalidCatalog(
                "more than one class is marked background".into(),
            ));
        }
        Ok(ClassCatalog { entries })
    }

    /// Default catalog for a label set: class 0 is background, every other
    /// label is named `class_<id>`.
    pub fn from_labels(labels: impl IntoIterator<Item = ClassId>) -> Self {
        let mut ids: BTreeSet<ClassId> = labels.into_iter().collect();
        ids.insert(0);
        let entries = ids
            .into_iter()
            .map(|id| ClassEntry {
                class_id: id,
                name: if id == 0 {
                    "background".to_string()
                } else {
                    format!("class_{id}")
                },
                is_background: id == 0,
            })
            .collect();
        ClassCatalog { entries }
    }

    /// Background class 0 plus one foreground class.
    pub fn binary(foreground: ClassId) -> Self {
        Self::from_labels([foreground])
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.entries.iter().map(|e| e.class_id)
    }

    pub fn background(&self) -> Option<ClassId> {
        self.entries.iter().find(|e| e.is_background).map(|e| e.class_id)
    }

    pub fn foreground_ids(&self) -> Vec<ClassId> {
        self.entries
            .iter()
            .filter(|e| !e.is_background)
            .map(|e| e.class_id)
            .collect()
    }

    pub fn name(&self, id: ClassId) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.class_id == id)
            .map(|e| e.name.as_str())
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.entries.iter().any(|e| e.class_id == id)
    }

    pub fn is_multiclass(&self) -> bool {
        self.foreground_ids().len() > 1
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn resolve_format(path: &Path, bytes: &[u8], hint: Option<MaskFormat>) -> Result<MaskFormat> {
    hint.or_else(|| MaskFormat::sniff(bytes))
        .or_else(|| MaskFormat::from_extension(path))
        .ok_or_else(|| Error::UnknownFormat(path.to_path_buf()))
}

/// Loads a hard label mask.
pub fn load_mask(path: &Path, format_hint: Option<MaskFormat>) -> Result<LabelMask> {
    let bytes = read_file(path)?;
    let format = resolve_format(path, &bytes, format_hint)?;
    decode_mask(&bytes, format)
}

/// Loads either a label mask or a probability grid.
pub fn load_grid(path: &Path, format_hint: Option<MaskFormat>) -> Result<GridData> {
    let bytes = read_file(path)?;
    let format = resolve_format(path, &bytes, format_hint)?;
    if format.is_png() {
        decode_png(&bytes).map(GridData::Labels)
    } else {
        decode_mgrid(&bytes)
    }
}

pub fn load_probabilities(path: &Path) -> Result<ProbabilityGrid> {
    match load_grid(path, Some(MaskFormat::Mgrid))? {
        GridData::Probabilities(p) => Ok(p),
        GridData::Labels(_) => Err(Error::MgridHeader(
            "file carries labels (dtype 0), expected probabilities".into(),
        )),
    }
}

pub fn decode_mask(bytes: &[u8], format: MaskFormat) -> Result<LabelMask> {
    if format.is_png() {
        return decode_png(bytes);
    }
    match decode_mgrid(bytes)? {
        GridData::Labels(m) => Ok(m),
        GridData::Probabilities(_) => Err(Error::MgridHeader(
            "file carries probabilities (dtype 1), expected labels".into(),
        )),
    }
}

fn decode_png(bytes: &[u8]) -> Result<LabelMask> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::PngDecode(e.to_string()))?;
    let info = reader.info();
    match info.color_type {
        png::ColorType::Grayscale => {}
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedColorType("indexed (palette)".into()))
        }
        other => return Err(Error::UnsupportedColorType(format!("{other:?}"))),
    }
    let wide = match info.bit_depth {
        png::BitDepth::Eight => false,
        png::BitDepth::Sixteen => true,
        other => {
            return Err(Error::UnsupportedBitDepth(format!(
                "{} bits per sample",
                other as u8
            )))
        }
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::PngDecode("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::PngDecode(e.to_string()))?;

    let mut labels = Vec::with_capacity(width * height);
    for row in buf.chunks(frame.line_size).take(height) {
        if wide {
            labels.extend(
                row[..2 * width]
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]])),
            );
        } else {
            labels.extend(row[..width].iter().map(|&b| b as ClassId));
        }
    }
    LabelMask::new(vec![height, width], labels)
}

struct MgridHeader {
    dtype: u8,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    payload_offset: usize,
}

fn parse_mgrid_header(bytes: &[u8]) -> Result<MgridHeader> {
    if bytes.len() < 7 || &bytes[..4] != MGRID_MAGIC {
        return Err(Error::MgridHeader("bad magic bytes".into()));
    }
    if bytes[4] != MGRID_VERSION {
        return Err(Error::MgridHeader(format!("unsupported version {}", bytes[4])));
    }
    let dtype = bytes[5];
    if dtype != DTYPE_LABELS && dtype != DTYPE_PROBABILITIES {
        return Err(Error::MgridHeader(format!("unknown dtype {dtype}")));
    }
    let ndim = bytes[6] as usize;
    if !(2..=3).contains(&ndim) {
        return Err(Error::MgridHeader(format!("ndim {ndim} not in 2..=3")));
    }
    let header_len = 7 + 8 * ndim;
    if bytes.len() < header_len {
        return Err(Error::MgridHeader("truncated header".into()));
    }
    let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().unwrap() };
    let shape: Vec<usize> = (0..ndim)
        .map(|a| u32::from_le_bytes(word(7 + 4 * a)) as usize)
        .collect();
    let spacing: Vec<f64> = (0..ndim)
        .map(|a| f32::from_le_bytes(word(7 + 4 * ndim + 4 * a)) as f64)
        .collect();
    Ok(MgridHeader {
        dtype,
        shape,
        spacing,
        payload_offset: header_len,
    })
}

fn decode_mgrid(bytes: &[u8]) -> Result<GridData> {
    let header = parse_mgrid_header(bytes)?;
    let elements = header
        .shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::MgridHeader("dimension product overflows".into()))?;
    let width = if header.dtype == DTYPE_LABELS { 2 } else { 4 };
    let payload = &bytes[header.payload_offset..];
    let expected = elements
        .checked_mul(width)
        .ok_or_else(|| Error::MgridHeader("payload size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::PayloadLength {
            expected,
            actual: payload.len(),
        });
    }
    if header.dtype == DTYPE_LABELS {
        let labels = payload
            .chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .collect();
        LabelMask::with_spacing(header.shape, labels, header.spacing).map(GridData::Labels)
    } else {
        let values = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        ProbabilityGrid::with_spacing(header.shape, values, header.spacing)
            .map(GridData::Probabilities)
    }
}

// ---------------------------------------------------------------------------
// Saving
// ---------------------------------------------------------------------------

pub fn save_mask(mask: &LabelMask, path: &Path, format: MaskFormat) -> Result<()> {
    let bytes = encode_mask(mask, format)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_probabilities(grid: &ProbabilityGrid, path: &Path) -> Result<()> {
    let mut out = mgrid_header(DTYPE_PROBABILITIES, grid.shape(), grid.spacing());
    for v in grid.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn encode_mask(mask: &LabelMask, format: MaskFormat) -> Result<Vec<u8>> {
    match format {
        MaskFormat::Png8 => encode_png(mask, false),
        MaskFormat::Png16 => encode_png(mask, true),
        MaskFormat::Mgrid => {
            let mut out = mgrid_header(DTYPE_LABELS, mask.shape(), mask.spacing());
            out.reserve(mask.len() * 2);
            for l in mask.labels() {
                out.extend_from_slice(&l.to_le_bytes());
            }
            Ok(out)
        }
    }
}

fn mgrid_header(dtype: u8, shape: &[usize], spacing: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(7 + 8 * shape.len());
    out.extend_from_slice(MGRID_MAGIC);
    out.push(MGRID_VERSION);
    out.push(dtype);
    out.push(shape.len() as u8);
    for &n in shape {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &s in spacing {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    out
}

fn encode_png(mask: &LabelMask, wide: bool) -> Result<Vec<u8>> {
    if mask.ndim() != 2 {
        return Err(Error::PngNot2d(mask.ndim()));
    }
    let max = mask.max_label();
    if !wide && max > u8::MAX as ClassId {
        return Err(Error::LabelExceedsDepth { label: max, bits: 8 });
    }
    let (height, width) = (mask.shape()[0], mask.shape()[1]);
    let data: Vec<u8> = if wide {
        mask.labels().iter().flat_map(|l| l.to_be_bytes()).collect()
    } else {
        mask.labels().iter().map(|&l| l as u8).collect()
    };
    write_png(
        width as u32,
        height as u32,
        png::ColorType::Grayscale,
        if wide {
            png::BitDepth::Sixteen
        } else {
            png::BitDepth::Eight
        },
        &data,
    )
}

/// Encodes raw samples as a PNG stream.
pub(crate) fn write_png(
    width: u32,
    height: u32,
    color: png::ColorType,
    depth: png::BitDepth,
    data: &[u8],
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(color);
        encoder.set_depth(depth);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::PngEncode(e.to_string()))?;
        writer
            .write_image_data(data)
            .map_err(|e| Error::PngEncode(e.to_string()))?;
        writer
            .finish()
            .map_err(|e| Error::PngEncode(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray_png(width: u32, height: u32, depth: png::BitDepth, data: &[u8]) -> Vec<u8> {
        write_png(width, height, png::ColorType::Grayscale, depth, data).unwrap()
    }

    #[test]
    fn png_pixels_map_row_major() {
        let bytes = gray_png(2, 2, png::BitDepth::Eight, &[0, 1, 1, 0]);
        let m = decode_mask(&bytes, MaskFormat::Png8).unwrap();
        assert_eq!(m.shape(), &[2, 2]);
        assert_eq!(m.labels(), &[0, 1, 1, 0]);
        assert_eq!(m.spacing(), &[1.0, 1.0]);
    }

    #[test]
    fn png_row_major_on_non_square() {
        // 3 wide, 2 tall: rows [0,1,2] and [3,4,5]
        let bytes = gray_png(3, 2, png::BitDepth::Eight, &[0, 1, 2, 3, 4, 5]);
        let m = decode_mask(&bytes, MaskFormat::Png8).unwrap();
        assert_eq!(m.shape(), &[2, 3]);
        assert_eq!(m.get(&[1, 0]), Some(3));
        assert_eq!(m.get(&[0, 2]), Some(2));
    }

    #[test]
    fn png_16_bit_is_big_endian() {
        let bytes = gray_png(2, 1, png::BitDepth::Sixteen, &[0x01, 0x02, 0x00, 0x07]);
        let m = decode_mask(&bytes, MaskFormat::Png16).unwrap();
        assert_eq!(m.labels(), &[0x0102, 7]);
    }

    #[test]
    fn rejects_palette_and_low_depth_and_rgb() {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 1, 1);
            enc.set_color(png::ColorType::Indexed);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_palette(vec![0, 0, 0]);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0]).unwrap();
        }
        assert!(matches!(
            decode_mask(&out, MaskFormat::Png8),
            Err(Error::UnsupportedColorType(_))
        ));

        let four_bit = gray_png(2, 1, png::BitDepth::Four, &[0x12]);
        assert!(matches!(
            decode_mask(&four_bit, MaskFormat::Png8),
            Err(Error::UnsupportedBitDepth(_))
        ));

        let rgb = write_png(1, 1, png::ColorType::Rgb, png::BitDepth::Eight, &[1, 2, 3]).unwrap();
        assert!(matches!(
            decode_mask(&rgb, MaskFormat::Png8),
            Err(Error::UnsupportedColorType(_))
        ));
    }

    #[test]
    fn mgrid_identity() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"MGRD");
        bytes.extend_from_slice(&[1, 0, 2]);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&5u32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        for v in [0u16, 0, 1, 1, 1] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let m = decode_mask(&bytes, MaskFormat::Mgrid).unwrap();
        assert_eq!(m.shape(), &[1, 5]);
        assert_eq!(m.labels(), &[0, 0, 1, 1, 1]);
        assert_eq!(encode_mask(&m, MaskFormat::Mgrid).unwrap(), bytes);
    }

    #[test]
    fn mgrid_payload_mismatch() {
        let m = LabelMask::new(vec![2, 2], vec![0, 1, 1, 0]).unwrap();
        let mut bytes = encode_mask(&m, MaskFormat::Mgrid).unwrap();
        bytes.truncate(bytes.len() - 2);
        let err = decode_mask(&bytes, MaskFormat::Mgrid).unwrap_err();
        assert!(err.to_string().contains("payload length mismatch"), "{err}");
    }

    #[test]
    fn mgrid_header_errors() {
        let m = LabelMask::new(vec![2, 2], vec![0, 1, 1, 0]).unwrap();
        let good = encode_mask(&m, MaskFormat::Mgrid).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode_mask(&bad_magic, MaskFormat::Mgrid), Err(Error::MgridHeader(_))));

        let mut bad_version = good.clone();
        bad_version[4] = 2;
        assert!(matches!(decode_mask(&bad_version, MaskFormat::Mgrid), Err(Error::MgridHeader(_))));

        let mut bad_ndim = good.clone();
        bad_ndim[6] = 4;
        assert!(matches!(decode_mask(&bad_ndim, MaskFormat::Mgrid), Err(Error::MgridHeader(_))));

        assert!(matches!(decode_mask(&good[..9], MaskFormat::Mgrid), Err(Error::MgridHeader(_))));
    }

    #[test]
    fn mgrid_round_trips_3d_and_spacing() {
        let m = LabelMask::with_spacing(
            vec![2, 2, 2],
            vec![0, 1, 2, 3, 4, 5, 6, 700],
            vec![0.5, 1.25, 3.0],
        )
        .unwrap();
        let back = decode_mask(&encode_mask(&m, MaskFormat::Mgrid).unwrap(), MaskFormat::Mgrid).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn probability_grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.mgrid");
        let g = ProbabilityGrid::new(vec![1, 4], vec![0.1, 0.6, 0.4, 0.9]).unwrap();
        save_probabilities(&g, &path).unwrap();
        assert_eq!(load_probabilities(&path).unwrap(), g);
        assert!(load_mask(&path, None).is_err());
        match load_grid(&path, None).unwrap() {
            GridData::Probabilities(p) => assert_eq!(p, g),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn png_refuses_3d_and_wide_labels() {
        let m3 = LabelMask::filled(vec![2, 2, 2], 1).unwrap();
        let err = encode_mask(&m3, MaskFormat::Png8).unwrap_err();
        assert_eq!(err.to_string(), "PNG supports 2D only (mask has 3 axes)");

        let big = LabelMask::new(vec![1, 2], vec![0, 300]).unwrap();
        assert!(matches!(
            encode_mask(&big, MaskFormat::Png8),
            Err(Error::LabelExceedsDepth { label: 300, bits: 8 })
        ));
        let back = decode_mask(&encode_mask(&big, MaskFormat::Png16).unwrap(), MaskFormat::Png16).unwrap();
        assert_eq!(back, big);
    }

    #[test]
    fn shape_compatibility() {
        let a = LabelMask::filled(vec![2, 2], 0).unwrap();
        let b = LabelMask::filled(vec![2, 2], 1).unwrap();
        let c = LabelMask::filled(vec![2, 3], 0).unwrap();
        let d = LabelMask::filled(vec![4, 4], 0).unwrap();
        let e = LabelMask::filled(vec![4, 4, 1], 0).unwrap();
        assert!(shape_compatible(&a, &b));
        assert!(!shape_compatible(&a, &c));
        assert!(!shape_compatible(&d, &e));
        let spaced = a.respaced(vec![2.0, 1.0]).unwrap();
        assert!(shape_compatible(&a, &spaced));
        assert!(!spacing_matches(&a, &spaced));
    }

    #[test]
    fn invariants_enforced() {
        assert!(LabelMask::new(vec![2, 2], vec![0; 3]).is_err());
        assert!(LabelMask::new(vec![4], vec![0; 4]).is_err());
        assert!(LabelMask::new(vec![0, 4], vec![]).is_err());
        assert!(LabelMask::with_spacing(vec![2, 2], vec![0; 4], vec![1.0]).is_err());
        assert!(LabelMask::with_spacing(vec![2, 2], vec![0; 4], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn catalog_rules() {
        let dup = ClassCatalog::new(vec![
            ClassEntry { class_id: 1, name: "a".into(), is_background: false },
            ClassEntry { class_id: 1, name: "b".into(), is_background: false },
        ]);
        assert!(matches!(dup, Err(Error::DuplicateClass(1))));
        let two_bg = ClassCatalog::new(vec![
            ClassEntry { class_id: 0, name: "a".into(), is_background: true },
            ClassEntry { class_id: 1, name: "b".into(), is_background: true },
        ]);
        assert!(two_bg.is_err());

        let c = ClassCatalog::from_labels([2, 1]);
        assert_eq!(c.background(), Some(0));
        assert_eq!(c.foreground_ids(), vec![1, 2]);
        assert!(c.is_multiclass());

        let json = r#"[{"class_id": 3, "name": "tumor"}, {"class_id": 7, "name": "bg", "is_background": true}]"#;
        let c: ClassCatalog = serde_json::from_str(json).unwrap();
        assert_eq!(c.background(), Some(7));
        assert_eq!(c.foreground_ids(), vec![3]);
        assert!(serde_json::from_str::<ClassCatalog>(r#"[{"class_id":1,"name":"a"},{"class_id":1,"name":"b"}]"#).is_err());
    }

    #[test]
    fn slicing_3d() {
        let m = LabelMask::with_spacing(vec![2, 1, 2], vec![1, 2, 3, 4], vec![5.0, 1.0, 2.0]).unwrap();
        let s = m.slice(1).unwrap();
        assert_eq!(s.shape(), &[1, 2]);
        assert_eq!(s.labels(), &[3, 4]);
        assert_eq!(s.spacing(), &[1.0, 2.0]);
        assert!(m.slice(2).is_err());
    }

    #[test]
    fn coords_round_trip() {
        let shape = [3, 4, 5];
        for i in 0..60 {
            assert_eq!(index_of(&shape, &coords_of(&shape, i)), Some(i));
        }
        assert_eq!(index_of(&shape, &[3, 0, 0]), None);
    }

    fn arb_mask_2d(max_label: u16) -> impl Strategy<Value = LabelMask> {
        (1usize..12, 1usize..12).prop_flat_map(move |(h, w)| {
            proptest::collection::vec(0..=max_label, h * w)
                .prop_map(move |labels| LabelMask::new(vec![h, w], labels).unwrap())
        })
    }

    proptest! {
        #[test]
        fn png_round_trip(m in arb_mask_2d(255)) {
            let bytes = encode_mask(&m, MaskFormat::Png8).unwrap();
            prop_assert_eq!(decode_mask(&bytes, MaskFormat::Png8).unwrap(), m);
        }

        #[test]
        fn mgrid_round_trip(m in arb_mask_2d(u16::MAX)) {
            let bytes = encode_mask(&m, MaskFormat::Mgrid).unwrap();
            prop_assert_eq!(decode_mask(&bytes, MaskFormat::Mgrid).unwrap(), m);
        }
    }
}
