//! Minimal FITS reader: primary HDU only, 2-D images, BSCALE/BZERO applied.
//!
//! Plate-archive scans are distributed as FITS; this reads exactly enough of
//! the standard for that use. Writing and extensions are out of scope.

use crate::error::{PhsdError, Result};
use crate::image::Image;

const BLOCK: usize = 2880;
const CARD: usize = 80;

#[derive(Debug, Default)]
struct Header {
    simple: bool,
    bitpix: Option<i64>,
    naxis: Option<i64>,
    naxis1: Option<i64>,
    naxis2: Option<i64>,
    bscale: f64,
    bzero: f64,
}

/// Value part of a card: text after `= `, with any `/` comment stripped.
fn card_value(card: &str) -> Option<&str> {
    let rest = card.get(10..)?;
    let end = rest.find('/').unwrap_or(rest.len());
    Some(rest[..end].trim())
}

fn numeric(card: &str, keyword: &str) -> Result<f64> {
    card_value(card)
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| PhsdError::format(format!("FITS card {keyword} has no numeric value")))
}

/// Parse header blocks until END; returns the header and the byte offset
/// where data begins.
fn parse_header(bytes: &[u8]) -> Result<(Header, usize)> {
    let mut header = Header { bscale: 1.0, bzero: 0.0, ..Header::default() };
    let mut offset = 0;
    let mut first_card = true;
    loop {
        let block = bytes
            .get(offset..offset + BLOCK)
            .ok_or_else(|| PhsdError::format("FITS header missing END card"))?;
        for card_bytes in block.chunks(CARD) {
            let card = String::from_utf8_lossy(card_bytes).into_owned();
            let keyword = card[..8.min(card.len())].trim_end().to_string();
            if first_card {
                if keyword != "SIMPLE" || card_value(&card) != Some("T") {
                    return Err(PhsdError::format(
                        "not a standard FITS file: first card must be SIMPLE = T",
                    ));
                }
                header.simple = true;
                first_card = false;
                continue;
            }
            match keyword.as_str() {
                "END" => return Ok((header, offset + BLOCK)),
                "BITPIX" => header.bitpix = Some(numeric(&card, "BITPIX")? as i64),
                "NAXIS" => header.naxis = Some(numeric(&card, "NAXIS")? as i64),
                "NAXIS1" => header.naxis1 = Some(numeric(&card, "NAXIS1")? as i64),
                "NAXIS2" => header.naxis2 = Some(numeric(&card, "NAXIS2")? as i64),
                "BSCALE" => header.bscale = numeric(&card, "BSCALE")?,
                "BZERO" => header.bzero = numeric(&card, "BZERO")?,
                _ => {}
            }
        }
        offset += BLOCK;
    }
}

/// Read the primary HDU of a FITS file as an image. BITPIX 8 maps to an
/// 8-bit image; deeper and floating-point data map to 16-bit (the value
/// range used for PSNR peaks).
pub fn read_fits_primary(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < BLOCK || bytes.len() % BLOCK != 0 {
        return Err(PhsdError::format(
            "FITS files are a multiple of 2880 bytes; input is truncated",
        ));
    }
    let (header, data_start) = parse_header(bytes)?;

    let bitpix = header.bitpix.ok_or_else(|| PhsdError::format("FITS missing BITPIX"))?;
    if ![8, 16, 32, -32, -64].contains(&bitpix) {
        return Err(PhsdError::format(format!("unsupported BITPIX {bitpix}")));
    }
    let naxis = header.naxis.ok_or_else(|| PhsdError::format("FITS missing NAXIS"))?;
    if naxis != 2 {
        return Err(PhsdError::format(format!("unsupported NAXIS {naxis}: need a 2-D image")));
    }
    let width = header.naxis1.filter(|&v| v > 0).ok_or_else(|| {
        PhsdError::format("FITS missing or non-positive NAXIS1")
    })? as usize;
    let height = header.naxis2.filter(|&v| v > 0).ok_or_else(|| {
        PhsdError::format("FITS missing or non-positive NAXIS2")
    })? as usize;

    let sample_bytes = (bitpix.unsigned_abs() / 8) as usize;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| PhsdError::format("FITS dimensions overflow"))?;
    let data_len = count * sample_bytes;
    let data = bytes
        .get(data_start..data_start + data_len)
        .ok_or_else(|| PhsdError::format("truncated FITS data segment"))?;

    // anything after the padded data unit would be an extension
    let data_end = data_start + data_len.div_ceil(BLOCK) * BLOCK;
    if bytes.len() > data_end
        && bytes[data_end..].iter().any(|&b| b != 0 && b != b' ')
    {
        return Err(PhsdError::format(
            "FITS extensions are not supported (primary HDU only)",
        ));
    }

    let raw = |i: usize| -> f64 {
        let s = &data[i * sample_bytes..(i + 1) * sample_bytes];
        match bitpix {
            8 => s[0] as f64,
            16 => i16::from_be_bytes([s[0], s[1]]) as f64,
            32 => i32::from_be_bytes([s[0], s[1], s[2], s[3]]) as f64,
            -32 => f32::from_be_bytes([s[0], s[1], s[2], s[3]]) as f64,
            _ => f64::from_be_bytes([s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]]),
        }
    };
    let pixels: Vec<f64> = (0..count).map(|i| header.bscale * raw(i) + header.bzero).collect();
    let bit_depth = if bitpix == 8 { 8 } else { 16 };
    Image::new(width, height, bit_depth, pixels)
}

#[cfg(test)]
pub(crate) fn build_test_fits(cards: &[String], data: &[u8]) -> Vec<u8> {
    let mut bytes = Vec::new();
    for card in cards {
        let mut c = card.clone().into_bytes();
        c.resize(CARD, b' ');
        bytes.extend_from_slice(&c);
    }
    let mut end = b"END".to_vec();
    end.resize(CARD, b' ');
    bytes.extend_from_slice(&end);
    bytes.resize(bytes.len().div_ceil(BLOCK) * BLOCK, b' ');
    bytes.extend_from_slice(data);
    bytes.resize(bytes.len().div_ceil(BLOCK) * BLOCK, 0);
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(k: &str, v: &str) -> String {
        format!("{k:<8}= {v}")
    }

    #[test]
    fn minimal_two_by_two_eight_bit() {
        let bytes = build_test_fits(
            &[
                card("SIMPLE", "T"),
                card("BITPIX", "8"),
                card("NAXIS", "2"),
                card("NAXIS1", "2"),
                card("NAXIS2", "2"),
            ],
            &[1, 2, 3, 4],
        );
        let img = read_fits_primary(&bytes).unwrap();
        assert_eq!((img.width, img.height, img.bit_depth), (2, 2, 8));
        assert_eq!(img.pixels, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn bzero_shift_for_unsigned_sixteen_bit() {
        // raw -32768 + BZERO 32768 = 0; raw 0 -> 32768
        let mut data = Vec::new();
        data.extend_from_slice(&(-32768i16).to_be_bytes());
        data.extend_from_slice(&0i16.to_be_bytes());
        let bytes = build_test_fits(
            &[
                card("SIMPLE", "T"),
                card("BITPIX", "16"),
                card("NAXIS", "2"),
                card("NAXIS1", "2"),
                card("NAXIS2", "1"),
                card("BZERO", "32768"),
                card("BSCALE", "1"),
            ],
            &data,
        );
        let img = read_fits_primary(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0.0, 32768.0]);
        assert_eq!(img.bit_depth, 16);
    }

    #[test]
    fn float_data_with_comment_cards() {
        let mut data = Vec::new();
        for v in [0.5f32, -1.25, 3.0, 100.0] {
            data.extend_from_slice(&v.to_be_bytes());
        }
        let bytes = build_test_fits(
            &[
                card("SIMPLE", "T"),
                card("BITPIX", "-32 / ieee float"),
                card("NAXIS", "2"),
                card("NAXIS1", "4"),
                card("NAXIS2", "1"),
                "COMMENT this line is ignored".to_string(),
            ],
            &data,
        );
        let img = read_fits_primary(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0.5, -1.25, 3.0, 100.0]);
    }

    #[test]
    fn rejects_cubes_missing_end_and_extensions() {
        let cube = build_test_fits(
            &[
                card("SIMPLE", "T"),
                card("BITPIX", "8"),
                card("NAXIS", "3"),
                card("NAXIS1", "2"),
                card("NAXIS2", "2"),
                card("NAXIS3", "2"),
            ],
            &[0; 8],
        );
        let err = read_fits_primary(&cube).unwrap_err();
        assert!(err.to_string().contains("NAXIS"), "{err}");

        let mut no_end = vec![b' '; BLOCK];
        let simple = card("SIMPLE", "T");
        no_end[..simple.len()].copy_from_slice(simple.as_bytes());
        assert!(read_fits_primary(&no_end).is_err());

        let mut with_ext = build_test_fits(
            &[
                card("SIMPLE", "T"),
                card("BITPIX", "8"),
                card("NAXIS", "2"),
                card("NAXIS1", "2"),
                card("NAXIS2", "2"),
            ],
            &[1, 2, 3, 4],
        );
        let mut xt = b"XTENSION= 'IMAGE   '".to_vec();
        xt.resize(BLOCK, b' ');
        with_ext.extend_from_slice(&xt);
        let err = read_fits_primary(&with_ext).unwrap_err();
        assert!(err.to_string().contains("extensions"), "{err}");
    }

    #[test]
    fn rejects_non_fits_and_truncated_data() {
        assert!(read_fits_primary(b"P5\n2 2\n255\n").is_err());
        let not_simple = build_test_fits(
            &[card("SIMPLE", "F"), card("BITPIX", "8")],
            &[],
        );
        assert!(read_fits_primary(&not_simple).is_err());

        let mut truncated = build_test_fits(
            &[
                card("SIMPLE", "T"),
                card("BITPIX", "16"),
                card("NAXIS", "2"),
                card("NAXIS1", "2000"),
                card("NAXIS2", "2000"),
            ],
            &[0; 16],
        );
        truncated.truncate(truncated.len() / BLOCK * BLOCK);
        assert!(read_fits_primary(&truncated).is_err());
    }
}
