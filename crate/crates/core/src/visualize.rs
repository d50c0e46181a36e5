//! Overlays, per-class binary panels and distribution plots.
//!
//! Raster output is RGB or grayscale PNG, vector output is standalone SVG.
//! Everything here is deterministic: blends round half up to integer
//! channels, SVG coordinates are printed with three decimals, and palettes
//! are assigned by ascending class id.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mask::{write_png, ClassCatalog, ClassId, LabelMask};
use crate::report::format::format_real;
use crate::report::stats::{Histogram, Stats};

pub type Rgb = [u8; 3];

/// Twelve well-separated colors, assigned to foreground classes in
/// ascending id order (cycling after twelve).
pub const DEFAULT_PALETTE: [Rgb; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

/// Disagreement-map colors for false positives and false negatives.
pub const FP_COLOR: Rgb = [230, 159, 0];
pub const FN_COLOR: Rgb = [0, 114, 178];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::PayloadLength {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Intensity image from a decoded grayscale PNG. Values up to 255 are
    /// used as they are; if any value exceeds 255 the image is treated as
    /// 16-bit and every value is rescaled to 8 bits.
    pub fn from_intensities(mask: &LabelMask) -> Result<Self> {
        if mask.ndim() != 2 {
            return Err(Error::InvalidOverlay(format!(
                "base image must be 2D, got {} axes",
                mask.ndim()
            )));
        }
        let wide = mask.max_label() > 255;
        let pixels = mask
            .labels()
            .iter()
            .map(|&v| {
                if wide {
                    ((v as u32 * 255 + 32767) / 65535) as u8
                } else {
                    v as u8
                }
            })
            .collect();
        GrayImage::new(mask.shape()[1], mask.shape()[0], pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        write_png(
            self.width as u32,
            self.height as u32,
            png::ColorType::Grayscale,
            png::BitDepth::Eight,
            &self.pixels,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        write_png(
            self.width as u32,
            self.height as u32,
            png::ColorType::Rgb,
            png::BitDepth::Eight,
            &data,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlaySpec {
    palette: BTreeMap<ClassId, Rgb>,
    alpha: f64,
    background: Option<ClassId>,
}

impl OverlaySpec {
    /// `background` pixels are never colored and need no palette entry.
    pub fn new(palette: BTreeMap<ClassId, Rgb>, alpha: f64, background: Option<ClassId>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidOverlay(format!("alpha {alpha} is outside (0, 1]")));
        }
        Ok(OverlaySpec {
            palette,
            alpha,
            background,
        })
    }

    /// Default palette over the catalog's foreground classes.
    pub fn for_catalog(catalog: &ClassCatalog, alpha: f64) -> Result<Self> {
        Self::new(default_palette(catalog), alpha, catalog.background())
    }

    pub fn palette(&self) -> &BTreeMap<ClassId, Rgb> {
        &self.palette
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn default_palette(catalog: &ClassCatalog) -> BTreeMap<ClassId, Rgb> {
    catalog
        .foreground_ids()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, DEFAULT_PALETTE[i % DEFAULT_PALETTE.len()]))
        .collect()
}

/// `alpha * color + (1 - alpha) * base`, rounded half up.
pub fn blend(color: u8, base: u8, alpha: f64) -> u8 {
    (alpha * color as f64 + (1.0 - alpha) * base as f64 + 0.5).floor() as u8
}

fn require_2d(mask: &LabelMask) -> Result<(usize, usize)> {
    match *mask.shape() {
        [h, w] => Ok((w, h)),
        _ => Err(Error::InvalidOverlay(format!(
            "expected a 2D mask, got {} axes; select a slice first",
            mask.ndim()
        ))),
    }
}

/// Colors every non-background class over the base image (black without
/// one).
pub fn render_overlay(base: Option<&GrayImage>, mask: &LabelMask, spec: &OverlaySpec) -> Result<RgbImage> {
    let (width, height) = require_2d(mask)?;
    if let Some(b) = base {
        if (b.width, b.height) != (width, height) {
            return Err(Error::ShapeMismatch(vec![b.height, b.width], mask.shape().to_vec()));
        }
    }
    for label in mask.present_labels() {
        if Some(label) != spec.background && !spec.palette.contains_key(&label) {
            return Err(Error::MissingPalette(label));
        }
    }
    let pixels = mask
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let g = base.map_or(0, |b| b.pixels[i]);
            if Some(label) == spec.background {
                return [g, g, g];
            }
            let c = spec.palette[&label];
            [
                blend(c[0], g, spec.alpha),
                blend(c[1], g, spec.alpha),
                blend(c[2], g, spec.alpha),
            ]
        })
        .collect();
    Ok(RgbImage { width, height, pixels })
}

/// One black/white image per foreground class: white where the mask holds
/// that class.
pub fn render_binary_panels(mask: &LabelMask, catalog: &ClassCatalog) -> Result<Vec<(ClassId, GrayImage)>> {
    let (width, height) = require_2d(mask)?;
    Ok(catalog
        .foreground_ids()
        .into_iter()
        .map(|class| {
            let pixels = mask
                .labels()
                .iter()
                .map(|&l| if l == class { 255 } else { 0 })
                .collect();
            (class, GrayImage { width, height, pixels })
        })
        .collect())
}

/// Errors of one class over the base image: false positives in
/// [`FP_COLOR`], false negatives in [`FN_COLOR`]; agreeing pixels pass the
/// base through (black without one).
pub fn render_disagreement(
    base: Option<&GrayImage>,
    gt: &LabelMask,
    pred: &LabelMask,
    class: ClassId,
) -> Result<RgbImage> {
    let (width, height) = require_2d(gt)?;
    if gt.shape() != pred.shape() {
        return Err(Error::ShapeMismatch(gt.shape().to_vec(), pred.shape().to_vec()));
    }
    if let Some(b) = base {
        if (b.width, b.height) != (width, height) {
            return Err(Error::ShapeMismatch(vec![b.height, b.width], gt.shape().to_vec()));
        }
    }
    let pixels = gt
        .labels()
        .iter()
        .zip(pred.labels())
        .enumerate()
        .map(|(i, (&g, &p))| match (g == class, p == class) {
            (false, true) => FP_COLOR,
            (true, false) => FN_COLOR,
            _ => {
                let v = base.map_or(0, |b| b.pixels[i]);
                [v, v, v]
            }
        })
        .collect();
    Ok(RgbImage { width, height, pixels })
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PLOT_W: f64 = WIDTH - LEFT - RIGHT;
const PLOT_H: f64 = HEIGHT - TOP - BOTTOM;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Tick label: up to four significant decimals.
fn tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn svg_open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        LEFT + PLOT_W / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">{}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{LEFT:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
        TOP + PLOT_H,
        LEFT + PLOT_W,
        TOP + PLOT_H
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{LEFT:.3}" y1="{TOP:.3}" x2="{LEFT:.3}" y2="{:.3}" stroke="black"/>"#,
        TOP + PLOT_H
    );
}

/// Bar chart of histogram counts; bar heights are linear in the counts.
pub fn render_histogram_svg(hist: &Histogram, title: &str, x_label: &str, y_label: &str) -> Result<String> {
    let max = hist.counts.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::EmptyPlotData("histogram has no counts"));
    }
    let mut out = String::new();
    svg_open(&mut out, title, x_label, y_label);
    let n = hist.counts.len() as f64;
    let bar_w = PLOT_W / n;
    let base = TOP + PLOT_H;
    for (i, (_, _, count)) in hist.bins().enumerate() {
        let h = PLOT_H * count as f64 / max as f64;
        let _ = writeln!(
            out,
            r##"<rect class="bar" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#4477aa" stroke="white"/>"##,
            LEFT + bar_w * i as f64,
            base - h,
            bar_w,
            h
        );
    }
    let label_every = hist.counts.len().div_ceil(10);
    for (i, &edge) in hist.edges.iter().enumerate() {
        if i % label_every != 0 && i != hist.counts.len() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            LEFT + bar_w * i as f64,
            base + 16.0,
            tick(edge)
        );
    }
    let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">0</text>"#, LEFT - 6.0, base + 4.0);
    let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{max}</text>"#, LEFT - 6.0, TOP + 4.0);
    if hist.below + hist.above > 0 {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">out of range: {} below, {} above</text>"#,
            LEFT + PLOT_W,
            TOP - 4.0,
            hist.below,
            hist.above
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Vertical box plot: whiskers at min/max, box from q1 to q3, median line.
pub fn render_boxplot_svg(stats: &Stats, title: &str, value_label: &str) -> Result<String> {
    if stats.count == 0 {
        return Err(Error::EmptyPlotData("box plot has no values"));
    }
    let (lo, hi) = if stats.max > stats.min {
        let pad = (stats.max - stats.min) * 0.05;
        (stats.min - pad, stats.max + pad)
    } else {
        (stats.min - 0.5, stats.max + 0.5)
    };
    let y = |v: f64| TOP + PLOT_H * (hi - v) / (hi - lo);
    let cx = LEFT + PLOT_W / 2.0;
    let half = PLOT_W / 8.0;
    let mut out = String::new();
    svg_open(&mut out, title, &format!("n = {}", stats.count), value_label);
    let _ = writeln!(
        out,
        r#"<line class="whisker" x1="{cx:.3}" y1="{:.3}" x2="{cx:.3}" y2="{:.3}" stroke="black"/>"#,
        y(stats.max),
        y(stats.min)
    );
    for v in [stats.min, stats.max] {
        let _ = writeln!(
            out,
            r#"<line class="cap" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
            cx - half / 2.0,
            y(v),
            cx + half / 2.0,
            y(v)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect class="box" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#4477aa" fill-opacity="0.6" stroke="black"/>"##,
        cx - half,
        y(stats.q3),
        2.0 * half,
        y(stats.q1) - y(stats.q3)
    );
    let _ = writeln!(
        out,
        r#"<line class="median" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
        cx - half,
        y(stats.median),
        cx + half,
        y(stats.median)
    );
    for v in [lo, hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}">mean {} sd {}</text>"#,
        LEFT + 8.0,
        TOP + 12.0,
        format_real(stats.mean),
        format_real(stats.std)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::stats::{describe, histogram};
    use proptest::prelude::*;

    fn attr(tag: &str, name: &str) -> f64 {
        let key = format!(" {name}=\"");
        let start = tag.find(&key).unwrap() + key.len();
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].parse().unwrap()
    }

    fn bars(svg: &str) -> Vec<&str> {
        svg.lines().filter(|l| l.contains("class=\"bar\"")).collect()
    }

    #[test]
    fn blend_rounds_half_up() {
        assert_eq!(blend(255, 100, 0.5), 178);
        assert_eq!(blend(0, 100, 0.5), 50);
        assert_eq!(blend(7, 200, 1.0), 7);
    }

    #[test]
    fn overlay_examples() {
        let mask = LabelMask::new(vec![1, 2], vec![0, 1]).unwrap();
        let palette = BTreeMap::from([(1, [255, 0, 0])]);
        let spec = OverlaySpec::new(palette.clone(), 0.5, Some(0)).unwrap();
        let base = GrayImage::filled(2, 1, 100);
        let img = render_overlay(Some(&base), &mask, &spec).unwrap();
        assert_eq!(img.get(0, 0), [100, 100, 100]);
        assert_eq!(img.get(1, 0), [178, 50, 50]);

        let opaque = OverlaySpec::new(palette, 1.0, Some(0)).unwrap();
        let img = render_overlay(None, &mask, &opaque).unwrap();
        assert_eq!(img.pixels(), &[[0, 0, 0], [255, 0, 0]]);

        let bg = LabelMask::filled(vec![1, 2], 0).unwrap();
        let base = GrayImage::new(2, 1, vec![3, 250]).unwrap();
        let img = render_overlay(Some(&base), &bg, &spec).unwrap();
        assert_eq!(img.pixels(), &[[3, 3, 3], [250, 250, 250]]);
    }

    #[test]
    fn overlay_errors() {
        let mask = LabelMask::new(vec![1, 2], vec![0, 2]).unwrap();
        let spec = OverlaySpec::new(BTreeMap::from([(1, [255, 0, 0])]), 0.5, Some(0)).unwrap();
        assert!(matches!(render_overlay(None, &mask, &spec), Err(Error::MissingPalette(2))));
        let ok = LabelMask::new(vec![1, 2], vec![0, 1]).unwrap();
        let base = GrayImage::filled(3, 1, 0);
        assert!(matches!(render_overlay(Some(&base), &ok, &spec), Err(Error::ShapeMismatch(..))));
        assert!(OverlaySpec::new(BTreeMap::new(), 0.0, None).is_err());
        assert!(OverlaySpec::new(BTreeMap::new(), 1.5, None).is_err());
        let volume = LabelMask::filled(vec![2, 2, 2], 0).unwrap();
        assert!(render_overlay(None, &volume, &spec).is_err());
    }

    #[test]
    fn near_zero_alpha_approaches_base() {
        let spec = OverlaySpec::new(BTreeMap::from([(1, [255, 255, 0])]), 0.001, Some(0)).unwrap();
        let mask = LabelMask::filled(vec![3, 3], 1).unwrap();
        let base = GrayImage::new(3, 3, (0..9).map(|i| i * 30).collect()).unwrap();
        let img = render_overlay(Some(&base), &mask, &spec).unwrap();
        for (p, &g) in img.pixels().iter().zip(base.pixels()) {
            for c in p {
                assert!((*c as i32 - g as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn binary_panels_partition_foreground() {
        let mask = LabelMask::new(vec![2, 3], vec![0, 1, 2, 3, 1, 0]).unwrap();
        let catalog = ClassCatalog::from_labels([1, 2, 3, 4]);
        let panels = render_binary_panels(&mask, &catalog).unwrap();
        assert_eq!(panels.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        for i in 0..6 {
            let white = panels.iter().filter(|(_, img)| img.pixels()[i] == 255).count();
            assert_eq!(white, usize::from(mask.labels()[i] != 0));
        }
        assert!(panels[3].1.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn disagreement_colors() {
        let gt = LabelMask::new(vec![1, 4], vec![1, 1, 0, 0]).unwrap();
        let pred = LabelMask::new(vec![1, 4], vec![1, 0, 1, 0]).unwrap();
        let img = render_disagreement(None, &gt, &pred, 1).unwrap();
        assert_eq!(img.pixels(), &[[0, 0, 0], FN_COLOR, FP_COLOR, [0, 0, 0]]);
        let base = GrayImage::new(4, 1, vec![10, 20, 30, 40]).unwrap();
        let same = render_disagreement(Some(&base), &gt, &gt, 1).unwrap();
        assert_eq!(same.pixels(), &[[10; 3], [20; 3], [30; 3], [40; 3]]);
    }

    #[test]
    fn png_outputs_decode() {
        let mask = LabelMask::new(vec![2, 2], vec![0, 1, 1, 0]).unwrap();
        let spec = OverlaySpec::for_catalog(&ClassCatalog::binary(1), 0.5).unwrap();
        let bytes = render_overlay(None, &mask, &spec).unwrap().to_png().unwrap();
        let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        let reader = decoder.read_info().unwrap();
        assert_eq!(reader.info().color_type, png::ColorType::Rgb);
        assert_eq!((reader.info().width, reader.info().height), (2, 2));
    }

    #[test]
    fn histogram_bar_heights_are_linear() {
        let h = histogram(&[0.25, 0.25, 0.75], 2, (0.0, 1.0)).unwrap();
        let svg = render_histogram_svg(&h, "DSC", "value", "samples").unwrap();
        let b = bars(&svg);
        assert_eq!(b.len(), 2);
        assert_eq!(attr(b[0], "height"), 2.0 * attr(b[1], "height"));

        let h = histogram(&[0.25, 1.0], 2, (0.0, 1.0)).unwrap();
        let svg = render_histogram_svg(&h, "DSC", "value", "samples").unwrap();
        let b = bars(&svg);
        assert_eq!(attr(b[0], "height"), attr(b[1], "height"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn plots_reject_empty_data() {
        let h = histogram(&[], 3, (0.0, 1.0)).unwrap();
        assert!(matches!(render_histogram_svg(&h, "t", "x", "y"), Err(Error::EmptyPlotData(_))));
        let mut s = describe(&[1.0]).unwrap();
        s.count = 0;
        assert!(render_boxplot_svg(&s, "t", "v").is_err());
    }

    #[test]
    fn single_value_boxplot_is_degenerate() {
        let s = describe(&[0.7]).unwrap();
        let svg = render_boxplot_svg(&s, "DSC <class_1>", "value").unwrap();
        let rect = svg.lines().find(|l| l.contains("class=\"box\"")).unwrap();
        assert_eq!(attr(rect, "height"), 0.0);
        assert!(svg.contains("DSC &lt;class_1&gt;"));
    }

    #[test]
    fn titles_are_escaped() {
        let h = histogram(&[0.5], 1, (0.0, 1.0)).unwrap();
        let svg = render_histogram_svg(&h, "a & b", "x<y", "\"q\"").unwrap();
        assert!(svg.contains("a &amp; b") && svg.contains("x&lt;y") && svg.contains("&quot;q&quot;"));
    }

    proptest! {
        #[test]
        fn svg_is_deterministic(values in proptest::collection::vec(0.0f64..=1.0, 1..40), bins in 1usize..20) {
            let h = histogram(&values, bins, (0.0, 1.0)).unwrap();
            prop_assert_eq!(
                render_histogram_svg(&h, "t", "x", "y").unwrap(),
                render_histogram_svg(&h.clone(), "t", "x", "y").unwrap()
            );
            let max = *h.counts.iter().max().unwrap() as f64;
            let svg = render_histogram_svg(&h, "t", "x", "y").unwrap();
            for (bar, &count) in bars(&svg).iter().zip(&h.counts) {
                prop_assert!((attr(bar, "height") - PLOT_H * count as f64 / max).abs() < 1e-3);
            }
        }
    }
}
