//! Volume files: single-file NIfTI-1 (`n+1`), optionally gzip-compressed,
//! and a minimal raw format.
//!
//! The raw format is one ASCII line `RAW3D nx ny nz datatype` followed by the
//! little-endian voxel payload in x-fastest order.
//!
//! Orientation fields of NIfTI headers (qform/sform codes, quaternion and
//! affine rows) are carried as opaque bytes and written back unchanged.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::grid::{BinaryVolume, Dims, ScalarVolume};

pub const HEADER_SIZE: i32 = 348;
pub const MIN_DATA_OFFSET: usize = 352;
pub const MAGIC: &[u8; 4] = b"n+1\0";
const MAGIC_OFFSET: usize = 344;
const ORIENTATION: std::ops::Range<usize> = 252..328;
const RAW_MAGIC: &[u8] = b"RAW3D";
const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Datatype {
    Uint8,
    Int16,
    Uint16,
    Float32,
}

impl Datatype {
    pub fn code(self) -> i16 {
        match self {
            Datatype::Uint8 => 2,
            Datatype::Int16 => 4,
            Datatype::Float32 => 16,
            Datatype::Uint16 => 512,
        }
    }

    pub fn from_code(code: i16) -> Result<Self> {
        match code {
            2 => Ok(Datatype::Uint8),
            4 => Ok(Datatype::Int16),
            16 => Ok(Datatype::Float32),
            512 => Ok(Datatype::Uint16),
            other => Err(Error::UnsupportedDatatype(other)),
        }
    }

    pub fn bytes_per_voxel(self) -> usize {
        match self {
            Datatype::Uint8 => 1,
            Datatype::Int16 | Datatype::Uint16 => 2,
            Datatype::Float32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Datatype::Uint8 => "uint8",
            Datatype::Int16 => "int16",
            Datatype::Uint16 => "uint16",
            Datatype::Float32 => "float32",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "uint8" => Ok(Datatype::Uint8),
            "int16" => Ok(Datatype::Int16),
            "uint16" => Ok(Datatype::Uint16),
            "float32" => Ok(Datatype::Float32),
            other => Err(Error::Format(format!("unknown datatype name {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endianness {
    Little,
    Big,
}

impl Endianness {
    pub const fn native() -> Self {
        if cfg!(target_endian = "big") {
            Endianness::Big
        } else {
            Endianness::Little
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeHeader {
    pub dims: Dims,
    pub datatype: Datatype,
    pub spacing: [f32; 3],
    pub data_offset: usize,
    pub endianness: Endianness,
    pub scl_slope: f32,
    pub scl_inter: f32,
    /// Raw header bytes 252..328 in the header's byte order.
    pub orientation: Vec<u8>,
}

impl VolumeHeader {
    pub fn new(dims: Dims, datatype: Datatype, spacing: [f64; 3]) -> Self {
        VolumeHeader {
            dims,
            datatype,
            spacing: spacing.map(|s| s as f32),
            data_offset: MIN_DATA_OFFSET,
            endianness: Endianness::Little,
            scl_slope: 1.0,
            scl_inter: 0.0,
            orientation: vec![0; ORIENTATION.len()],
        }
    }

    /// Header for writing `vol` with its own dims, spacing and natural datatype.
    pub fn for_volume(vol: &Volume) -> Self {
        let datatype = match vol {
            Volume::Binary(_) => Datatype::Uint8,
            Volume::Scalar(_) => Datatype::Float32,
        };
        VolumeHeader::new(vol.dims(), datatype, vol.spacing())
    }

    fn payload_len(&self) -> usize {
        self.dims.len() * self.datatype.bytes_per_voxel()
    }

    /// Spacing widened to f64 through its shortest decimal form, so that
    /// values such as 0.513 survive an f32 round trip.
    pub fn spacing_f64(&self) -> [f64; 3] {
        self.spacing.map(|s| s.to_string().parse().unwrap_or(s as f64))
    }

    fn scale(&self) -> Option<(f64, f64)> {
        let slope = self.scl_slope as f64;
        let inter = self.scl_inter as f64;
        if slope == 0.0 || !slope.is_finite() || (slope == 1.0 && inter == 0.0) {
            None
        } else {
            Some((slope, inter))
        }
    }
}

/// A volume of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Binary(BinaryVolume),
    Scalar(ScalarVolume),
}

/// Which volume type [`read_volume`] should decode into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeKind {
    Binary,
    Scalar,
}

impl Volume {
    pub fn dims(&self) -> Dims {
        match self {
            Volume::Binary(v) => v.dims(),
            Volume::Scalar(v) => v.dims(),
        }
    }

    pub fn spacing(&self) -> [f64; 3] {
        match self {
            Volume::Binary(v) => v.spacing(),
            Volume::Scalar(v) => v.spacing(),
        }
    }

    pub fn into_binary(self) -> BinaryVolume {
        match self {
            Volume::Binary(v) => v,
            Volume::Scalar(v) => v.to_binary(),
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        return Ok(out);
    }
    Ok(raw)
}

fn parse_nifti_header(bytes: &[u8]) -> Result<VolumeHeader> {
    if bytes.len() < HEADER_SIZE as usize {
        return Err(Error::Format(format!("file has {} bytes, header needs 348", bytes.len())));
    }
    let endianness = if LittleEndian::read_i32(&bytes[0..4]) == HEADER_SIZE {
        Endianness::Little
    } else if BigEndian::read_i32(&bytes[0..4]) == HEADER_SIZE {
        Endianness::Big
    } else {
        return Err(Error::Format(format!(
            "header size field is {} in either byte order, not 348",
            LittleEndian::read_i32(&bytes[0..4])
        )));
    };
    if &bytes[MAGIC_OFFSET..MAGIC_OFFSET + 4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected n+1",
            &bytes[MAGIC_OFFSET..MAGIC_OFFSET + 4]
        )));
    }
    let i16_at = |o: usize| match endianness {
        Endianness::Little => LittleEndian::read_i16(&bytes[o..o + 2]),
        Endianness::Big => BigEndian::read_i16(&bytes[o..o + 2]),
    };
    let f32_at = |o: usize| match endianness {
        Endianness::Little => LittleEndian::read_f32(&bytes[o..o + 4]),
        Endianness::Big => BigEndian::read_f32(&bytes[o..o + 4]),
    };

    let rank = i16_at(40);
    let dim: Vec<i16> = (0..8).map(|k| i16_at(40 + 2 * k)).collect();
    if !(1..=7).contains(&rank) || dim[1..=rank as usize].iter().any(|&d| d < 1) {
        return Err(Error::Format(format!("bad dim field {dim:?}")));
    }
    if dim[4..=rank.max(3) as usize].iter().any(|&d| d != 1) {
        return Err(Error::Format(format!("only 3D volumes are supported, dim = {dim:?}")));
    }
    let ext = |k: usize| if k <= rank as usize { dim[k] as usize } else { 1 };
    let dims = Dims::new(ext(1), ext(2), ext(3))?;
    let datatype = Datatype::from_code(i16_at(70))?;
    let offset = f32_at(108);
    if offset.is_nan() || offset < MIN_DATA_OFFSET as f32 || offset.fract() != 0.0 {
        return Err(Error::Format(format!("vox_offset {offset} is below 352 or fractional")));
    }
    Ok(VolumeHeader {
        dims,
        datatype,
        spacing: [f32_at(80), f32_at(84), f32_at(88)],
        data_offset: offset as usize,
        endianness,
        scl_slope: f32_at(112),
        scl_inter: f32_at(116),
        orientation: bytes[ORIENTATION].to_vec(),
    })
}

fn parse_raw_header(bytes: &[u8]) -> Result<VolumeHeader> {
    let end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("raw header line is not terminated".into()))?;
    let line = std::str::from_utf8(&bytes[..end])
        .map_err(|_| Error::Format("raw header is not ASCII".into()))?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [_, nx, ny, nz, dt] = fields[..] else {
        return Err(Error::Format(format!("malformed raw header {line:?}")));
    };
    let n = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad raw dimension {s:?}")))
    };
    let mut header = VolumeHeader::new(Dims::new(n(nx)?, n(ny)?, n(nz)?)?, Datatype::from_name(dt)?, [1.0; 3]);
    header.data_offset = end + 1;
    Ok(header)
}

/// Voxel values as f64, after slope/intercept scaling.
fn decode(header: &VolumeHeader, payload: &[u8]) -> Vec<f64> {
    let bpv = header.datatype.bytes_per_voxel();
    let little = header.endianness == Endianness::Little;
    let raw = payload.chunks_exact(bpv).map(|c| match (header.datatype, little) {
        (Datatype::Uint8, _) => c[0] as f64,
        (Datatype::Int16, true) => LittleEndian::read_i16(c) as f64,
        (Datatype::Int16, false) => BigEndian::read_i16(c) as f64,
        (Datatype::Uint16, true) => LittleEndian::read_u16(c) as f64,
        (Datatype::Uint16, false) => BigEndian::read_u16(c) as f64,
        (Datatype::Float32, true) => LittleEndian::read_f32(c) as f64,
        (Datatype::Float32, false) => BigEndian::read_f32(c) as f64,
    });
    match header.scale() {
        Some((slope, inter)) => raw.map(|v| v * slope + inter).collect(),
        None => raw.collect(),
    }
}

/// Reads a volume file, decoding voxels into the requested kind.
///
/// Binary volumes are thresholded at > 0.5; scalar volumes are clamped to
/// `[0, 1]`.
pub fn read_volume(path: impl AsRef<Path>, kind: VolumeKind) -> Result<(Volume, VolumeHeader)> {
    let bytes = read_file(path.as_ref())?;
    let header = if bytes.starts_with(RAW_MAGIC) {
        parse_raw_header(&bytes)?
    } else {
        parse_nifti_header(&bytes)?
    };
    let expected = header.payload_len();
    let available = bytes.len().saturating_sub(header.data_offset);
    if available < expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: available,
        });
    }
    let payload = &bytes[header.data_offset..header.data_offset + expected];
    let values = decode(&header, payload);
    let spacing = header.spacing_f64();
    let volume = match kind {
        VolumeKind::Binary => {
            let data = values.iter().map(|&v| (v > 0.5) as u8).collect();
            Volume::Binary(BinaryVolume::from_vec(header.dims, data)?.with_spacing(spacing))
        }
        VolumeKind::Scalar => {
            let data = values.iter().map(|&v| v as f32).collect();
            Volume::Scalar(ScalarVolume::from_vec(header.dims, data)?.with_spacing(spacing))
        }
    };
    Ok((volume, header))
}

pub fn read_binary(path: impl AsRef<Path>) -> Result<(BinaryVolume, VolumeHeader)> {
    let (v, h) = read_volume(path, VolumeKind::Binary)?;
    Ok((v.into_binary(), h))
}

pub fn read_scalar(path: impl AsRef<Path>) -> Result<(ScalarVolume, VolumeHeader)> {
    match read_volume(path, VolumeKind::Scalar)? {
        (Volume::Scalar(v), h) => Ok((v, h)),
        (Volume::Binary(v), h) => Ok((ScalarVolume::from_binary(&v), h)),
    }
}

fn encode(vol: &Volume, header: &VolumeHeader) -> Result<Vec<u8>> {
    let n = vol.dims().len();
    let mut out = vec![0u8; n * header.datatype.bytes_per_voxel()];
    let little = header.endianness == Endianness::Little;
    match (vol, header.datatype) {
        (Volume::Binary(b), Datatype::Uint8) => out.copy_from_slice(b.data()),
        (Volume::Binary(b), dt) => {
            let bpv = dt.bytes_per_voxel();
            for (chunk, &v) in out.chunks_exact_mut(bpv).zip(b.data()) {
                match (dt, little) {
                    (Datatype::Int16, true) => LittleEndian::write_i16(chunk, v as i16),
                    (Datatype::Int16, false) => BigEndian::write_i16(chunk, v as i16),
                    (Datatype::Uint16, true) => LittleEndian::write_u16(chunk, v as u16),
                    (Datatype::Uint16, false) => BigEndian::write_u16(chunk, v as u16),
                    (Datatype::Float32, true) => LittleEndian::write_f32(chunk, v as f32),
                    (Datatype::Float32, false) => BigEndian::write_f32(chunk, v as f32),
                    (Datatype::Uint8, _) => unreachable!(),
                }
            }
        }
        (Volume::Scalar(s), Datatype::Float32) => {
            for (chunk, &v) in out.chunks_exact_mut(4).zip(s.data()) {
                if little {
                    LittleEndian::write_f32(chunk, v);
                } else {
                    BigEndian::write_f32(chunk, v);
                }
            }
        }
        (Volume::Scalar(_), dt) => {
            return Err(Error::Format(format!(
                "scalar volumes are written as float32, not {}",
                dt.name()
            )))
        }
    }
    Ok(out)
}

fn nifti_header_bytes(header: &VolumeHeader) -> Vec<u8> {
    let mut h = vec![0u8; header.data_offset];
    let big = header.endianness == Endianness::Big;
    let put_i16 = |h: &mut [u8], o: usize, v: i16| {
        if big {
            BigEndian::write_i16(&mut h[o..o + 2], v)
        } else {
            LittleEndian::write_i16(&mut h[o..o + 2], v)
        }
    };
    let put_i32 = |h: &mut [u8], o: usize, v: i32| {
        if big {
            BigEndian::write_i32(&mut h[o..o + 4], v)
        } else {
            LittleEndian::write_i32(&mut h[o..o + 4], v)
        }
    };
    let put_f32 = |h: &mut [u8], o: usize, v: f32| {
        if big {
            BigEndian::write_f32(&mut h[o..o + 4], v)
        } else {
            LittleEndian::write_f32(&mut h[o..o + 4], v)
        }
    };
    put_i32(&mut h, 0, HEADER_SIZE);
    h[38] = b'r';
    let Dims { nx, ny, nz } = header.dims;
    for (k, v) in [3, nx as i16, ny as i16, nz as i16, 1, 1, 1, 1].into_iter().enumerate() {
        put_i16(&mut h, 40 + 2 * k, v);
    }
    put_i16(&mut h, 70, header.datatype.code());
    put_i16(&mut h, 72, (header.datatype.bytes_per_voxel() * 8) as i16);
    put_f32(&mut h, 76, 1.0);
    for (k, &s) in header.spacing.iter().enumerate() {
        put_f32(&mut h, 80 + 4 * k, s);
    }
    put_f32(&mut h, 108, header.data_offset as f32);
    put_f32(&mut h, 112, header.scl_slope);
    put_f32(&mut h, 116, header.scl_inter);
    // xyzt_units: millimetres.
    h[123] = 2;
    if header.orientation.len() == ORIENTATION.len() {
        h[ORIENTATION].copy_from_slice(&header.orientation);
    }
    h[MAGIC_OFFSET..MAGIC_OFFSET + 4].copy_from_slice(MAGIC);
    h
}

/// Writes `vol` to `path`.
///
/// Files ending in `.raw` use the raw format, files ending in `.gz` are
/// gzip-compressed NIfTI, anything else plain NIfTI. Binary volumes are
/// stored as {0, 1} in the header's datatype; scalar volumes need float32.
pub fn write_volume(vol: &Volume, header: &VolumeHeader, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if vol.dims() != header.dims {
        return Err(Error::DimensionMismatch(vol.dims(), header.dims));
    }
    if header.data_offset < MIN_DATA_OFFSET {
        return Err(Error::Format(format!("data offset {} is below 352", header.data_offset)));
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let is_raw = name.ends_with(".raw");
    if !is_raw && header.dims.as_array().iter().any(|&n| n > i16::MAX as usize) {
        return Err(Error::Format(format!("{:?} does not fit a NIfTI-1 dim field", header.dims)));
    }
    let file = BufWriter::new(File::create(path)?);

    if is_raw {
        let mut raw_header = header.clone();
        raw_header.endianness = Endianness::Little;
        let payload = encode(vol, &raw_header)?;
        let Dims { nx, ny, nz } = header.dims;
        let mut file = file;
        writeln!(file, "RAW3D {nx} {ny} {nz} {}", header.datatype.name())?;
        file.write_all(&payload)?;
        file.flush()?;
        return Ok(());
    }

    let payload = encode(vol, header)?;
    let head = nifti_header_bytes(header);
    if name.ends_with(".gz") {
        let mut gz = GzEncoder::new(file, Compression::default());
        gz.write_all(&head)?;
        gz.write_all(&payload)?;
        gz.finish()?.flush()?;
    } else {
        let mut file = file;
        file.write_all(&head)?;
        file.write_all(&payload)?;
        file.flush()?;
    }
    Ok(())
}

/// Writes a binary volume with a default uint8 header carrying its spacing.
pub fn write_binary(vol: &BinaryVolume, path: impl AsRef<Path>) -> Result<()> {
    let v = Volume::Binary(vol.clone());
    write_volume(&v, &VolumeHeader::for_volume(&v), path)
}
