//! Binary PGM (P5), maxval 255.

use super::GrayImage;
use crate::{Error, Result};

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::MalformedFile("missing P5 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (idx, field) in fields.iter_mut().enumerate() {
        // whitespace and comments before each field
        let start_ws = pos;
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::MalformedFile("truncated header".into())),
            }
        }
        if pos == start_ws {
            return Err(Error::MalformedFile(format!("missing separator before header field {idx}")));
        }
        let digits_start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if pos == digits_start {
            return Err(Error::MalformedFile(format!("header field {idx} is not a number")));
        }
        let text = std::str::from_utf8(&bytes[digits_start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| Error::MalformedFile(format!("header field {idx} out of range")))?;
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedFile("missing whitespace after maxval".into())),
    }
    let [width, height, maxval] = fields;
    Ok(Header {
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let header = parse_header(bytes)?;
    match header.maxval {
        0 => return Err(Error::MalformedFile("maxval must be positive".into())),
        255 => {}
        m if m > 255 => return Err(Error::UnsupportedDepth(16)),
        m => return Err(Error::MalformedFile(format!("maxval {m} is not 255"))),
    }
    if header.width == 0 || header.height == 0 {
        return Err(Error::MalformedFile("zero image dimension".into()));
    }
    let count = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| Error::MalformedFile("dimensions overflow".into()))?;
    let payload = &bytes[header.data_offset..];
    if payload.len() < count {
        return Err(Error::MalformedFile(format!(
            "pixel payload has {} bytes, expected {count}",
            payload.len()
        )));
    }
    GrayImage::new(header.width, header.height, payload[..count].to_vec())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}
