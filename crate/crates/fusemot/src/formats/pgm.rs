//! Depth maps as binary 16-bit PGM (`P5`), millimeters, 0 = invalid.

use std::path::Path;

use fusemot_core::depth_lift::DepthMap;

use super::{read_bytes, write_bytes, FormatError};

pub fn encode_depth(map: &DepthMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", map.width(), map.height()).into_bytes();
    for mm in map.to_millimeters() {
        out.extend_from_slice(&mm.to_be_bytes());
    }
    out
}

pub fn decode_depth(bytes: &[u8]) -> Result<DepthMap, FormatError> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| FormatError::BadHeader("empty file".into()))?;
    if magic != "P5" {
        return Err(FormatError::BadMagic { found: magic, expected: "P5" });
    }
    let mut header = [0u32; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| FormatError::BadHeader(format!("missing {name}")))?;
        *slot = tok.parse().map_err(|_| FormatError::BadHeader(format!("{name} {tok:?} is not an integer")))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 || !(1..=65535).contains(&maxval) {
        return Err(FormatError::BadHeader(format!("invalid dimensions {width}x{height} or maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    let expected = width as usize * height as usize * bytes_per;
    let data = bytes.get(pos..).unwrap_or(&[]);
    if data.len() < expected {
        return Err(FormatError::TruncatedFile { expected, found: data.len() });
    }
    let mm: Vec<u16> = if bytes_per == 2 {
        data[..expected].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        data[..expected].iter().map(|&b| b as u16).collect()
    };
    DepthMap::from_millimeters(width, height, &mm).map_err(|e| FormatError::BadHeader(e.to_string()))
}

/// Whitespace-separated header token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

pub fn read_depth(path: &Path) -> Result<DepthMap, FormatError> {
    decode_depth(&read_bytes(path)?)
}

pub fn write_depth(map: &DepthMap, path: &Path) -> Result<(), FormatError> {
    write_bytes(path, &encode_depth(map))
}

/// File name of a frame's depth map inside a depth directory.
pub fn frame_file_name(frame: u32) -> String {
    format!("{frame:06}.pgm")
}

/// Frame numbers of the depth maps in `dir`, ascending.
pub fn list_depth_frames(dir: &Path) -> Result<Vec<u32>, FormatError> {
    let entries = std::fs::read_dir(dir).map_err(|source| FormatError::Io { path: dir.to_path_buf(), source })?;
    let mut frames = Vec::new();
    for e in entries {
        let e = e.map_err(|source| FormatError::Io { path: dir.to_path_buf(), source })?;
        let name = e.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_suffix(".pgm") {
            if let Ok(f) = stem.parse() {
                frames.push(f);
            }
        }
    }
    frames.sort_unstable();
    Ok(frames)
}
