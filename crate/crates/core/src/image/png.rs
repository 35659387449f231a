//! 8-bit grayscale and RGB PNG via the `png` crate.

use std::io::Cursor;

use png::{BitDepth, ColorType, Decoder, Encoder, Transformations};

use super::{GrayImage, Image, RgbImage};
use crate::{Error, Result};

fn decoding_error(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::IoError(io) => Error::MalformedFile(io.to_string()),
        other => Error::MalformedFile(other.to_string()),
    }
}

pub fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(decoding_error)?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if depth != BitDepth::Eight {
        return Err(Error::UnsupportedDepth(depth as u32));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::MalformedFile("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(decoding_error)?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    let line = frame.line_size;
    match color {
        ColorType::Grayscale => {
            let mut pixels = Vec::with_capacity(width * height);
            for row in buf.chunks_exact(line).take(height) {
                pixels.extend_from_slice(&row[..width]);
            }
            GrayImage::new(width, height, pixels).map(Image::Gray)
        }
        ColorType::Rgb => {
            let mut pixels = Vec::with_capacity(width * height);
            for row in buf.chunks_exact(line).take(height) {
                pixels.extend(row[..width * 3].chunks_exact(3).map(|c| [c[0], c[1], c[2]]));
            }
            RgbImage::new(width, height, pixels).map(Image::Rgb)
        }
        other => Err(Error::UnsupportedColorType(format!("{other:?}"))),
    }
}

fn encode(width: usize, height: usize, color: ColorType, data: &[u8]) -> Result<Vec<u8>> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::InvalidParameter("image too large for PNG".into()));
    let mut out = Vec::new();
    {
        let mut encoder = Encoder::new(&mut out, dim(width)?, dim(height)?);
        encoder.set_color(color);
        encoder.set_depth(BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer
            .write_image_data(data)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer
            .finish()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    Ok(out)
}

pub fn encode_png_gray(img: &GrayImage) -> Result<Vec<u8>> {
    encode(img.width(), img.height(), ColorType::Grayscale, img.pixels())
}

pub fn encode_png_rgb(img: &RgbImage) -> Result<Vec<u8>> {
    let flat: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    encode(img.width(), img.height(), ColorType::Rgb, &flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode_with(width: u32, height: u32, color: ColorType, depth: BitDepth, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        let mut enc = Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(depth);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(data).unwrap();
        w.finish().unwrap();
        out
    }

    #[test]
    fn rgb_png_decodes_to_rgb() {
        let rgb = RgbImage::new(2, 1, vec![[255, 0, 0], [1, 2, 3]]).unwrap();
        let bytes = encode_png_rgb(&rgb).unwrap();
        assert_eq!(decode_png(&bytes).unwrap(), Image::Rgb(rgb));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let bytes = encode_with(1, 1, ColorType::Grayscale, BitDepth::Sixteen, &[0, 0]);
        assert!(matches!(decode_png(&bytes), Err(Error::UnsupportedDepth(16))));
    }

    #[test]
    fn alpha_rejected() {
        let bytes = encode_with(1, 1, ColorType::GrayscaleAlpha, BitDepth::Eight, &[0, 0]);
        assert!(matches!(decode_png(&bytes), Err(Error::UnsupportedColorType(_))));
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(decode_png(b"\x89PNG\r\n\x1a\nxx"), Err(Error::MalformedFile(_))));
    }

    proptest! {
        // decode(encode(x)) = x, and re-encoding the decoded image is byte-stable
        #[test]
        fn gray_round_trip(w in 1usize..20, h in 1usize..20, pixels in proptest::collection::vec(any::<u8>(), 400)) {
            let img = GrayImage::new(w, h, pixels[..w * h].to_vec()).unwrap();
            let bytes = encode_png_gray(&img).unwrap();
            let decoded = match decode_png(&bytes).unwrap() {
                Image::Gray(g) => g,
                other => panic!("unexpected {other:?}"),
            };
            prop_assert_eq!(&decoded, &img);
            prop_assert_eq!(encode_png_gray(&decoded).unwrap(), bytes);
        }
    }
}
