//! Readers and writers for guidance images, dense fields, masks and sparse
//! sample files.
//!
//! Supported formats:
//!
//! * binary PGM (`P5`) and PPM (`P6`), 8-bit, mapped to reals in `[0, 255]`;
//! * PFM (`Pf` gray, `PF` color), rows stored bottom-to-top, byte order given
//!   by the sign of the scale field. Non-finite values are kept, they mark
//!   unknown ground truth;
//! * FLO optical flow: `PIEH` tag, `i32` width and height, interleaved `f32`
//!   `(u, v)` pairs, all little-endian;
//! * sparse text files: a `GEOSPARSE <width> <height> <channels>` header and one
//!   `x y v1 [v2 ...]` record per known site in raster order.
//!
//! Every decoder has a byte-slice entry point (`decode_*`) next to the
//! path-based one, and rejects anything it does not fully understand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Location, Result};
use crate::grid::{ImageGrid, ValueScale};
use crate::sparse::{extend_sparse, Sample, SparseField};

/// `PIEH` read as a little-endian `f32`.
pub const FLO_TAG: f32 = 202021.25;

const SPARSE_MAGIC: &str = "GEOSPARSE";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Cursor over a binary buffer that reports failures with byte offsets.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
    format: &'static str,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], path: &'a Path, format: &'static str) -> Self {
        Self {
            buf,
            pos: 0,
            path,
            format,
        }
    }

    fn err(&self, at: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            format: self.format,
            location: Location::ByteOffset(at as u64),
            message: message.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    /// Next whitespace-delimited header token.
    fn token(&mut self, comments: bool) -> Result<&'a str> {
        if comments {
            self.skip_space_and_comments();
        } else {
            while self.pos < self.buf.len() && self.buf[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }
        let start = self.pos;
        while self.pos < self.buf.len() && !self.buf[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(start, "unexpected end of header"));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .map_err(|_| self.err(start, "header is not ASCII"))
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str, comments: bool) -> Result<T> {
        let start = self.pos;
        let tok = self.token(comments)?;
        tok.parse()
            .map_err(|_| self.err(start, format!("invalid {what} {tok:?}")))
    }

    /// Consumes the single whitespace byte that ends a header.
    fn end_header(&mut self) -> Result<()> {
        match self.buf.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(self.pos, "header must end with one whitespace byte")),
        }
    }

    fn payload(&self, len: usize) -> Result<&'a [u8]> {
        let remaining = self.buf.len() - self.pos;
        if remaining < len {
            return Err(self.err(
                self.buf.len(),
                format!("truncated payload: need {len} bytes, found {remaining}"),
            ));
        }
        if remaining > len {
            return Err(self.err(
                self.pos + len,
                format!("{} trailing bytes", remaining - len),
            ));
        }
        Ok(&self.buf[self.pos..])
    }
}

fn positive_dim(r: &Reader<'_>, at: usize, v: i64, what: &str) -> Result<usize> {
    if v <= 0 || v > (1 << 24) {
        Err(r.err(at, format!("{what} {v} out of range")))
    } else {
        Ok(v as usize)
    }
}

// ---------------------------------------------------------------- PGM / PPM

pub fn decode_pnm(bytes: &[u8], path: &Path) -> Result<ImageGrid> {
    let mut r = Reader::new(bytes, path, "PNM");
    let magic = r.token(false)?;
    let channels = match magic {
        "P5" => 1,
        "P6" => 3,
        _ => return Err(r.err(0, format!("unsupported magic {magic:?}, expected P5 or P6"))),
    };
    let at = r.pos;
    let w: i64 = r.parse("width", true)?;
    let w = positive_dim(&r, at, w, "width")?;
    let at = r.pos;
    let h: i64 = r.parse("height", true)?;
    let h = positive_dim(&r, at, h, "height")?;
    let at = r.pos;
    let maxval: u32 = r.parse("maxval", true)?;
    if !(1..=255).contains(&maxval) {
        return Err(r.err(at, format!("maxval {maxval} is not 8-bit")));
    }
    r.end_header()?;
    let payload = r.payload(w * h * channels)?;
    let scale = 255.0 / maxval as f64;
    if let Some(i) = payload.iter().position(|&b| b as u32 > maxval) {
        return Err(r.err(r.pos + i, "sample exceeds maxval"));
    }
    let data = payload.iter().map(|&b| b as f64 * scale).collect();
    Ok(ImageGrid::new(w, h, channels, data)?.with_scale(ValueScale::Byte))
}

/// Reads a binary PGM or PPM guidance image.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    decode_pnm(&read_bytes(path)?, path)
}

/// Encodes 1- or 3-channel data as PGM/PPM, rounding and clamping to `[0, 255]`.
pub fn encode_pnm(grid: &ImageGrid) -> Result<Vec<u8>> {
    let magic = match grid.channels() {
        1 => "P5",
        3 => "P6",
        got => {
            return Err(Error::Channels {
                what: "PNM image",
                got,
            })
        }
    };
    let mut out = format!("{magic}\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend(
        grid.data()
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8),
    );
    Ok(out)
}

pub fn write_image(path: impl AsRef<Path>, grid: &ImageGrid) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pnm(grid)?)
}

// ---------------------------------------------------------------------- PFM

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<ImageGrid> {
    let mut r = Reader::new(bytes, path, "PFM");
    let magic = r.token(false)?;
    let channels = match magic {
        "Pf" => 1,
        "PF" => 3,
        _ => return Err(r.err(0, format!("unsupported magic {magic:?}, expected Pf or PF"))),
    };
    let at = r.pos;
    let w: i64 = r.parse("width", false)?;
    let w = positive_dim(&r, at, w, "width")?;
    let at = r.pos;
    let h: i64 = r.parse("height", false)?;
    let h = positive_dim(&r, at, h, "height")?;
    let at = r.pos;
    let scale: f64 = r.parse("scale", false)?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(r.err(at, format!("scale {scale} must be non-zero")));
    }
    let little_endian = scale < 0.0;
    r.end_header()?;
    let payload = r.payload(w * h * channels * 4)?;

    let row_len = w * channels;
    let mut data = vec![0.0; w * h * channels];
    for (file_row, chunk) in payload.chunks_exact(row_len * 4).enumerate() {
        // bottom-to-top on disk
        let y = h - 1 - file_row;
        for (dst, b) in data[y * row_len..(y + 1) * row_len]
            .iter_mut()
            .zip(chunk.chunks_exact(4))
        {
            let b = [b[0], b[1], b[2], b[3]];
            *dst = if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            } as f64;
        }
    }
    ImageGrid::new(w, h, channels, data)
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    decode_pfm(&read_bytes(path)?, path)
}

/// Little-endian PFM (scale `-1`). Values are narrowed to `f32`.
pub fn encode_pfm(grid: &ImageGrid) -> Result<Vec<u8>> {
    let magic = match grid.channels() {
        1 => "Pf",
        3 => "PF",
        got => {
            return Err(Error::Channels {
                what: "PFM field",
                got,
            })
        }
    };
    let mut out = format!("{magic}\n{} {}\n-1\n", grid.width(), grid.height()).into_bytes();
    for y in (0..grid.height()).rev() {
        for &v in grid.row(y) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_pfm(path: impl AsRef<Path>, grid: &ImageGrid) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pfm(grid)?)
}

// ---------------------------------------------------------------------- FLO

pub fn decode_flo(bytes: &[u8], path: &Path) -> Result<ImageGrid> {
    let r = Reader::new(bytes, path, "FLO");
    if bytes.len() < 12 {
        return Err(r.err(bytes.len(), "truncated header"));
    }
    let word = |i: usize| [bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]];
    let tag = f32::from_le_bytes(word(0));
    if tag != FLO_TAG {
        return Err(r.err(
            0,
            format!("bad tag {:?}", String::from_utf8_lossy(&bytes[..4])),
        ));
    }
    let w = positive_dim(&r, 4, i32::from_le_bytes(word(4)) as i64, "width")?;
    let h = positive_dim(&r, 8, i32::from_le_bytes(word(8)) as i64, "height")?;
    let r = Reader { pos: 12, ..r };
    let payload = r.payload(w * h * 8)?;
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    ImageGrid::new(w, h, 2, data)
}

pub fn read_flo(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    decode_flo(&read_bytes(path)?, path)
}

pub fn encode_flo(grid: &ImageGrid) -> Result<Vec<u8>> {
    if grid.channels() != 2 {
        return Err(Error::Channels {
            what: "FLO field",
            got: grid.channels(),
        });
    }
    let mut out = Vec::with_capacity(12 + grid.data().len() * 4);
    out.extend_from_slice(&FLO_TAG.to_le_bytes());
    out.extend_from_slice(&(grid.width() as i32).to_le_bytes());
    out.extend_from_slice(&(grid.height() as i32).to_le_bytes());
    for &v in grid.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn write_flo(path: impl AsRef<Path>, grid: &ImageGrid) -> Result<()> {
    write_bytes(path.as_ref(), &encode_flo(grid)?)
}

// ------------------------------------------------------------------- sparse

pub fn decode_sparse(text: &str, path: &Path) -> Result<SparseField> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        format: "sparse sample file",
        location: Location::Line(line),
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != SPARSE_MAGIC {
        return Err(err(
            1,
            format!("expected \"{SPARSE_MAGIC} <width> <height> <channels>\", got {header:?}"),
        ));
    }
    let dim = |s: &str, what: &str| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(err(1, format!("invalid {what} {s:?}"))),
        }
    };
    let (w, h, ch) = (
        dim(fields[1], "width")?,
        dim(fields[2], "height")?,
        dim(fields[3], "channels")?,
    );

    let mut samples = Vec::new();
    let mut trailing_blank: Option<usize> = None;
    for (n, line) in lines {
        if line.trim().is_empty() {
            trailing_blank.get_or_insert(n);
            continue;
        }
        if let Some(blank) = trailing_blank {
            return Err(err(blank, "blank line inside record list".into()));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != ch + 2 {
            return Err(err(
                n,
                format!("expected {} fields, found {}", ch + 2, toks.len()),
            ));
        }
        let coord = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| err(n, format!("invalid {what} coordinate {s:?}")))
        };
        let (x, y) = (coord(toks[0], "x")?, coord(toks[1], "y")?);
        if x >= w || y >= h {
            return Err(err(n, format!("site ({x}, {y}) outside the {w}x{h} grid")));
        }
        let value = toks[2..]
            .iter()
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(n, format!("invalid value {s:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(prev) = samples.last().map(|s: &Sample| (s.y, s.x)) {
            if (y, x) <= prev {
                return Err(err(n, format!("site ({x}, {y}) is not in raster order")));
            }
        }
        samples.push(Sample::new(x, y, value));
    }
    if samples.is_empty() {
        return Err(err(1, "no sample records".into()));
    }
    extend_sparse(&samples, w, h, ch)
}

pub fn read_sparse(path: impl AsRef<Path>) -> Result<SparseField> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        format: "sparse sample file",
        location: Location::ByteOffset(e.utf8_error().valid_up_to() as u64),
        message: "not UTF-8".into(),
    })?;
    decode_sparse(&text, path)
}

pub fn encode_sparse(sparse: &SparseField) -> Result<String> {
    let samples = sparse.samples();
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut out = format!(
        "{SPARSE_MAGIC} {} {} {}\n",
        sparse.width(),
        sparse.height(),
        sparse.channels()
    );
    for s in samples {
        write!(out, "{} {}", s.x, s.y).unwrap();
        for v in s.value {
            // shortest representation that parses back to the same f64
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_sparse(path: impl AsRef<Path>, sparse: &SparseField) -> Result<()> {
    write_bytes(path.as_ref(), encode_sparse(sparse)?.as_bytes())
}

// ----------------------------------------------------------- by extension

/// Reads a dense field or image, choosing the decoder by file extension
/// (`pfm`, `flo`, `pgm`, `ppm`).
pub fn read_field(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("pfm") => read_pfm(path),
        Some("flo") => read_flo(path),
        Some("pgm") | Some("ppm") | Some("pnm") => read_image(path),
        _ => Err(unknown_extension(path)),
    }
}

/// Writes a dense field: FLO for two channels, PFM otherwise.
pub fn write_field(path: impl AsRef<Path>, grid: &ImageGrid) -> Result<()> {
    match grid.channels() {
        2 => write_flo(path, grid),
        _ => write_pfm(path, grid),
    }
}

/// Reads a binary mask: any non-zero entry becomes 1.
pub fn read_mask(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let grid = read_field(path)?;
    if grid.channels() != 1 {
        return Err(Error::Channels {
            what: "mask",
            got: grid.channels(),
        });
    }
    let data = grid
        .data()
        .iter()
        .map(|&v| if v != 0.0 { 1.0 } else { 0.0 })
        .collect();
    ImageGrid::new(grid.width(), grid.height(), 1, data)
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn unknown_extension(path: &Path) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        format: "field",
        location: Location::ByteOffset(0),
        message: "unrecognised file extension (expected .pfm, .flo, .pgm or .ppm)".into(),
    }
}
