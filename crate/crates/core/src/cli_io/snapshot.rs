use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ame::AuxState;
use crate::error::{Error, Result};
use crate::spectral::{LieField, TorusGrid};

/// Version of the numerical conventions written into every output.
pub const CONVENTION_VERSION: u32 = 1;

/// The conventions that version refers to.
pub const CONVENTIONS: &str = "fft forward unnormalized, inverse /N^2; xi = 2*pi*k/L, k in [-N/2, N/2); \
point index iy*N + ix; direction transform symbol xi_j/|xi| (= -i * Riesz); A = *df with A1 = -d2 f, A2 = d1 f; \
u = v = 0, du/dt = phi + h, dv/dt = phi - h at t = 0";

const FORMAT: &str = "monopole-snapshot";
const FORMAT_VERSION: u32 = 1;

/// JSON sidecar describing a snapshot payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub format_version: u32,
    pub conventions_version: u32,
    pub n: usize,
    pub side: f64,
    pub rank: usize,
    pub t: f64,
    pub components: Vec<String>,
    /// Always `little`.
    pub endianness: String,
    /// Component-major, matrix entries row-major, points `iy·N + ix`,
    /// real and imaginary parts interleaved.
    pub layout: String,
    pub payload_bytes: u64,
    pub sha256: String,
}

/// `path` with `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn snap_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Snapshot {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| snap_err(path, "path has no file name"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Saves named fields sharing one grid and rank.
pub fn save_fields(path: &Path, t: f64, fields: &[(&str, &LieField)]) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| snap_err(path, "no components to save"))?
        .1;
    for (_, f) in fields {
        first.check_compatible(f)?;
    }
    let mut payload = Vec::with_capacity(fields.len() * first.data().len() * 16);
    for (_, f) in fields {
        for z in f.data() {
            payload.extend_from_slice(&z.re.to_le_bytes());
            payload.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let g = first.grid();
    let header = SnapshotHeader {
        format: FORMAT.into(),
        format_version: FORMAT_VERSION,
        conventions_version: CONVENTION_VERSION,
        n: g.n(),
        side: g.side(),
        rank: first.rank(),
        t,
        components: fields.iter().map(|(n, _)| n.to_string()).collect(),
        endianness: "little".into(),
        layout: "component-major; entry (i,j) row-major; point iy*N+ix; re,im interleaved f64".into(),
        payload_bytes: payload.len() as u64,
        sha256: hex::encode(Sha256::digest(&payload)),
    };
    write_atomic(path, &payload)?;
    write_atomic(&sidecar_path(path), serde_json::to_string_pretty(&header)?.as_bytes())
}

/// Reads a snapshot, checking the header, length and hash before building
/// any field.
pub fn load_fields(path: &Path) -> Result<(SnapshotHeader, Vec<LieField>)> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(io_err(&side))?;
    let header: SnapshotHeader =
        serde_json::from_str(&text).map_err(|e| snap_err(&side, format!("bad header: {e}")))?;
    if header.format != FORMAT || header.format_version != FORMAT_VERSION {
        return Err(snap_err(&side, "unknown snapshot format"));
    }
    if header.endianness != "little" {
        return Err(snap_err(&side, "unsupported endianness"));
    }
    let grid = TorusGrid::new(header.n, header.side).map_err(|e| snap_err(&side, e.to_string()))?;
    let per = header.rank * header.rank * grid.len();
    let expected = (header.components.len() * per * 16) as u64;
    if header.payload_bytes != expected {
        return Err(snap_err(&side, format!(
            "header says {} bytes but the shape needs {expected}",
            header.payload_bytes
        )));
    }
    let payload = fs::read(path).map_err(io_err(path))?;
    if payload.len() as u64 != expected {
        return Err(snap_err(path, format!(
            "payload has {} bytes, expected {expected} (truncated or padded)",
            payload.len()
        )));
    }
    if hex::encode(Sha256::digest(&payload)) != header.sha256 {
        return Err(snap_err(path, "payload hash does not match header"));
    }
    let values: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let fields = values
        .chunks_exact(per)
        .zip(&header.components)
        .map(|(chunk, name)| Ok(LieField::from_raw(grid, header.rank, chunk.to_vec())?.with_label(name.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, fields))
}

const AUX_COMPONENTS: [&str; 4] = ["u", "ut", "v", "vt"];

/// Saves wave variables as components `u, ut, v, vt`.
pub fn save_snapshot(state: &AuxState, path: &Path) -> Result<()> {
    save_fields(
        path,
        state.t,
        &[
            ("u", &state.u),
            ("ut", &state.ut),
            ("v", &state.v),
            ("vt", &state.vt),
        ],
    )
}

pub fn load_snapshot(path: &Path) -> Result<AuxState> {
    let (header, fields) = load_fields(path)?;
    if header.components != AUX_COMPONENTS {
        return Err(snap_err(path, format!(
            "expected components {AUX_COMPONENTS:?}, found {:?}",
            header.components
        )));
    }
    let mut it = fields.into_iter();
    let mut next = || it.next().expect("four components");
    Ok(AuxState {
        u: next(),
        ut: next(),
        v: next(),
        vt: next(),
        t: header.t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::random_su;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state() -> AuxState {
        let g = TorusGrid::new(8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = || LieField::from_fn(g, 2, |_, _| random_su(2, 1.0, &mut rng));
        AuxState {
            u: f(),
            ut: f(),
            v: f(),
            vt: f(),
            t: 0.125,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        let s = random_state();
        save_snapshot(&s, &p).unwrap();
        let r = load_snapshot(&p).unwrap();
        for (a, b) in [(&s.u, &r.u), (&s.ut, &r.ut), (&s.v, &r.v), (&s.vt, &r.vt)] {
            assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.re.to_bits() == y.re.to_bits()
                && x.im.to_bits() == y.im.to_bits()));
        }
        assert_eq!(r.t.to_bits(), s.t.to_bits());
    }

    #[test]
    fn truncation_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        save_snapshot(&random_state(), &p).unwrap();
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(load_snapshot(&p), Err(Error::Snapshot { .. })));
    }

    #[test]
    fn hash_mismatch_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        save_snapshot(&random_state(), &p).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes[3] ^= 1;
        fs::write(&p, &bytes).unwrap();
        match load_snapshot(&p) {
            Err(Error::Snapshot { path, message }) => {
                assert_eq!(path, p);
                assert!(message.contains("hash"));
            }
            other => panic!("{other:?}"),
        }
    }
}
