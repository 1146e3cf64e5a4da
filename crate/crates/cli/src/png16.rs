//! 16-bit grayscale PNG output.

use std::io::Write;

use jeo_core::RealImage;

/// Scales `img / full_scale` into [0, 65535], clamping out-of-range values.
pub fn to_u16(img: &RealImage, full_scale: f64) -> Vec<u16> {
    img.data()
        .iter()
        .map(|&v| ((v / full_scale).clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect()
}

pub fn write_png16<W: Write>(out: W, width: usize, height: usize, pixels: &[u16]) -> Result<(), png::EncodingError> {
    let mut enc = png::Encoder::new(out, width as u32, height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc.write_header()?;
    let bytes: Vec<u8> = pixels.iter().flat_map(|p| p.to_be_bytes()).collect();
    writer.write_image_data(&bytes)?;
    writer.finish()
}
