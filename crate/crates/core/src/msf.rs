//! MSF binary field format.
//!
//! Layout: magic `MSF1`, u32 version = 1, u32 rank, rank x u64 dims,
//! u8 dtype (0 = f64), then the payload as little-endian row-major f64.
//! Time-stacked fields store time as the leading (slowest) dim. A JSON
//! sidecar `<name>.json` carries grid metadata. Vector fields are stored
//! as one MSF per component, `<stem>.c0.msf`, `<stem>.c1.msf`, ...

use crate::error::{Error, Result};
use crate::field::{Extension, Field, ScalarField, VectorField};
use crate::grid::{GridSpec, TimeSpec};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"MSF1";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub spacing: Vec<f64>,
    pub periodic: Vec<bool>,
    pub origin: Vec<f64>,
    pub t0: Option<f64>,
    pub dt: Option<f64>,
    pub field_role: String,
    #[serde(default)]
    pub components: usize,
    #[serde(default = "default_extension")]
    pub extension: String,
}

fn default_extension() -> String {
    "periodic".into()
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_payload(path: &Path, dims: &[u64], data: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(13 + 8 * dims.len() + 8 * data.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in dims {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    buf.push(0u8); // dtype f64
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

fn read_payload(path: &Path) -> Result<(Vec<u64>, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 13 || &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!("{}: bad magic", path.display())));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rank = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if rank == 0 || rank > 4 {
        return Err(Error::Format(format!("bad rank {rank}")));
    }
    let mut off = 12;
    if bytes.len() < off + 8 * rank + 1 {
        return Err(Error::Format("truncated header".into()));
    }
    let mut dims = Vec::with_capacity(rank);
    for _ in 0..rank {
        dims.push(u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        off += 8;
    }
    let dtype = bytes[off];
    off += 1;
    if dtype != 0 {
        return Err(Error::Format(format!("unsupported dtype {dtype}")));
    }
    let expected: usize = dims.iter().product::<u64>() as usize;
    let found = (bytes.len() - off) / 8;
    if found != expected || (bytes.len() - off) % 8 != 0 {
        return Err(Error::Truncation { expected, found });
    }
    let mut data = Vec::with_capacity(expected);
    for k in 0..expected {
        let s = off + 8 * k;
        data.push(f64::from_le_bytes(bytes[s..s + 8].try_into().unwrap()));
    }
    Ok((dims, data))
}

fn field_dims(f: &ScalarField) -> Vec<u64> {
    let mut dims = Vec::new();
    if let Some(ts) = &f.time {
        dims.push(ts.nt as u64);
    }
    for a in 0..f.grid.rank() {
        dims.push(f.grid.n(a) as u64);
    }
    dims
}

fn make_sidecar(f: &ScalarField, role: &str, components: usize) -> Sidecar {
    let g = &f.grid;
    Sidecar {
        spacing: (0..g.rank()).map(|a| g.h(a)).collect(),
        periodic: (0..g.rank()).map(|a| g.is_periodic(a)).collect(),
        origin: (0..g.rank()).map(|a| g.origin(a)).collect(),
        t0: f.time.as_ref().map(|t| t.t0),
        dt: f.time.as_ref().map(|t| t.dt),
        field_role: role.into(),
        components,
        extension: match f.extension {
            Extension::Periodic => "periodic".into(),
            Extension::ZeroOutside => "zero-outside".into(),
        },
    }
}

pub fn save_scalar(f: &ScalarField, path: &Path, role: &str) -> Result<()> {
    write_payload(path, &field_dims(f), f.data())?;
    let sc = make_sidecar(f, role, 0);
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sc)?)?;
    Ok(())
}

fn component_path(path: &Path, c: usize) -> PathBuf {
    let stem = path.with_extension("");
    let mut s = stem.into_os_string();
    s.push(format!(".c{c}.msf"));
    PathBuf::from(s)
}

pub fn save_vector(v: &VectorField, path: &Path, role: &str) -> Result<()> {
    for (c, comp) in v.comps().iter().enumerate() {
        write_payload(&component_path(path, c), &field_dims(comp), comp.data())?;
    }
    let sc = make_sidecar(v.comp(0), role, v.dim());
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sc)?)?;
    Ok(())
}

pub fn save_field(f: &Field, path: &Path, role: &str) -> Result<()> {
    match f {
        Field::Scalar(s) => save_scalar(s, path, role),
        Field::Vector(v) => save_vector(v, path, role),
    }
}

fn scalar_from_parts(dims: &[u64], data: Vec<f64>, sc: &Sidecar) -> Result<ScalarField> {
    let srank = sc.spacing.len();
    let has_time = sc.t0.is_some() && sc.dt.is_some();
    if dims.len() != srank + has_time as usize {
        return Err(Error::Format(format!(
            "rank {} does not match sidecar ({} spatial axes, time={})",
            dims.len(),
            srank,
            has_time
        )));
    }
    let spatial = &dims[has_time as usize..];
    let n: Vec<usize> = spatial.iter().map(|&d| d as usize).collect();
    let grid = GridSpec::new(&n, &sc.spacing, &sc.periodic, &sc.origin)?;
    let time = if has_time {
        Some(TimeSpec::new(dims[0] as usize, sc.dt.unwrap(), sc.t0.unwrap())?)
    } else {
        None
    };
    let extension = match sc.extension.as_str() {
        "zero-outside" => Extension::ZeroOutside,
        _ => Extension::Periodic,
    };
    ScalarField::new(grid, time, extension, data)
}

pub fn load_sidecar(path: &Path) -> Result<Sidecar> {
    let text = std::fs::read_to_string(sidecar_path(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load a field from `<path>` (scalar) or `<stem>.c*.msf` (vector),
/// as recorded in the JSON sidecar.
pub fn load_field(path: &Path) -> Result<Field> {
    let sc = load_sidecar(path)?;
    if sc.components == 0 {
        let (dims, data) = read_payload(path)?;
        Ok(Field::Scalar(scalar_from_parts(&dims, data, &sc)?))
    } else {
        let mut comps = Vec::with_capacity(sc.components);
        for c in 0..sc.components {
            let (dims, data) = read_payload(&component_path(path, c))?;
            comps.push(scalar_from_parts(&dims, data, &sc)?);
        }
        Ok(Field::Vector(VectorField::new(comps)?))
    }
}

pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    match load_field(path)? {
        Field::Scalar(s) => Ok(s),
        Field::Vector(_) => Err(Error::Format(format!(
            "{}: expected scalar field, found vector",
            path.display()
        ))),
    }
}

pub fn load_vector(path: &Path) -> Result<VectorField> {
    match load_field(path)? {
        Field::Scalar(_) => Err(Error::Format(format!(
            "{}: expected vector field, found scalar",
            path.display()
        ))),
        Field::Vector(v) => Ok(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_constant_16cubed_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.msf");
        let g = GridSpec::torus(3, 16).unwrap();
        let f = ScalarField::constant(g, 1.0);
        save_scalar(&f, &p, "test").unwrap();
        let f2 = load_scalar(&p).unwrap();
        assert_eq!(f.data(), f2.data());
        assert_eq!(f.grid, f2.grid);
        // Byte-for-byte identical when saved again.
        let p2 = dir.path().join("c2.msf");
        save_scalar(&f2, &p2, "test").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn roundtrip_spacetime_and_vector() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.msf");
        let g = GridSpec::boxed(&[6, 5], &[1.0, 2.0]).unwrap();
        let ts = TimeSpec::new(3, 0.25, 0.5).unwrap();
        let mk = |s: f64| {
            ScalarField::from_fn_spacetime(g.clone(), ts.clone(), Extension::ZeroOutside, |t, x| {
                s * t + x[0] - x[1]
            })
        };
        let v = VectorField::new(vec![mk(1.0), mk(-2.0)]).unwrap();
        save_vector(&v, &p, "drift").unwrap();
        let v2 = load_vector(&p).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn wrong_magic_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.msf");
        std::fs::write(&p, b"NOPE____________").unwrap();
        let g = GridSpec::torus(1, 4).unwrap();
        let f = ScalarField::constant(g, 0.0);
        std::fs::write(
            sidecar_path(&p),
            serde_json::to_string(&make_sidecar(&f, "x", 0)).unwrap(),
        )
        .unwrap();
        match load_field(&p) {
            Err(Error::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_is_truncation_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.msf");
        let g = GridSpec::torus(1, 8).unwrap();
        let f = ScalarField::constant(g, 2.0);
        save_scalar(&f, &p, "x").unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
        match load_field(&p) {
            Err(Error::Truncation { expected: 8, found: 7 }) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }
    }
}
