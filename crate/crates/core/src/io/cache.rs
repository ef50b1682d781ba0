//! On-disk cache of total-Hamiltonian eigendecompositions.
//!
//! File layout, all integers and reals little-endian:
//!
//! ```text
//! magic   8 bytes  "ETHLEIG\0"
//! version u32
//! key     32 bytes (SHA-256 of the canonical parameter bytes)
//! dim     u64
//! values  dim × f64
//! vectors dim² × f64, column-major
//! check   32 bytes (SHA-256 of everything above)
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use faer::Mat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamiltonians::{RandomSystemParams, SpinChainParams};
use crate::linalg::{eig_sym, Spectrum, SymmetricMatrix};

const MAGIC: &[u8; 8] = b"ETHLEIG\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 32 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    /// Load when present, otherwise compute and store.
    #[default]
    Use,
    /// Always compute and overwrite.
    Recompute,
    /// Load only; a miss is an error.
    Forbid,
}

/// What generated a total Hamiltonian. Only numeric parameters enter the
/// key, so reformatting a config file keeps cache hits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemKey {
    Chain(SpinChainParams),
    Random(RandomSystemParams),
}

impl SystemKey {
    fn canonical_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        match self {
            SystemKey::Chain(p) => {
                b.extend_from_slice(b"spin_chain");
                b.extend_from_slice(&(p.l as u64).to_le_bytes());
                for v in [p.j, p.h_x, p.h_z] {
                    b.extend_from_slice(&v.to_bits().to_le_bytes());
                }
            }
            SystemKey::Random(p) => {
                b.extend_from_slice(b"random_goe");
                for v in [p.l_a, p.l_b, p.l_i] {
                    b.extend_from_slice(&(v as u64).to_le_bytes());
                }
                for v in [p.f, p.a_scale] {
                    b.extend_from_slice(&v.to_bits().to_le_bytes());
                }
                b.extend_from_slice(&p.seed.to_le_bytes());
            }
        }
        b
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_bytes()).into()
    }

    pub fn hex(&self) -> String {
        self.digest().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Serializes `spectrum` under `key`.
pub fn encode(spectrum: &Spectrum, key: &[u8; 32]) -> Vec<u8> {
    let n = spectrum.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (n + n * n) + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(key);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for v in spectrum.eigenvalues() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let vecs = spectrum.eigenvectors();
    for j in 0..n {
        for i in 0..n {
            out.extend_from_slice(&vecs[(i, j)].to_le_bytes());
        }
    }
    let check: [u8; 32] = Sha256::digest(&out).into();
    out.extend_from_slice(&check);
    out
}

fn f64_at(bytes: &[u8], k: usize) -> f64 {
    f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"))
}

/// Parses a cache file. Any structural problem is `CacheInvalid`.
pub fn decode(bytes: &[u8], key: &[u8; 32], path: &Path) -> Result<Spectrum> {
    let invalid = |reason: &str| Error::CacheInvalid {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN + 32 || &bytes[..8] != MAGIC {
        return Err(invalid("not an eigen-cache file"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(invalid(&format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    if &bytes[12..44] != key {
        return Err(invalid("parameter hash mismatch"));
    }
    let n = u64::from_le_bytes(bytes[44..52].try_into().expect("8 bytes")) as usize;
    let expected = n
        .checked_mul(n)
        .and_then(|nn| nn.checked_add(n))
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(HEADER_LEN + 32));
    if expected != Some(bytes.len()) {
        return Err(invalid("truncated or oversized file"));
    }
    let body_end = bytes.len() - 32;
    let check: [u8; 32] = Sha256::digest(&bytes[..body_end]).into();
    if check[..] != bytes[body_end..] {
        return Err(invalid("checksum mismatch"));
    }
    let data = &bytes[HEADER_LEN..body_end];
    let values: Vec<f64> = (0..n).map(|k| f64_at(data, k)).collect();
    let vectors = Mat::from_fn(n, n, |i, j| f64_at(data, n + j * n + i));
    Spectrum::from_parts(values, vectors).map_err(|e| invalid(&e.to_string()))
}

/// Writes through a temporary file and renames, so readers never see a
/// partial file.
pub fn store(path: &Path, spectrum: &Spectrum, key: &[u8; 32]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(&encode(spectrum, key)).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `Ok(None)` when the file is absent.
pub fn load(path: &Path, key: &[u8; 32]) -> Result<Option<Spectrum>> {
    match fs::read(path) {
        Ok(bytes) => decode(&bytes, key, path).map(Some),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Supplies total spectra, from disk or by diagonalizing.
pub trait TotalSolver: Sync {
    fn solve(&self, key: &SystemKey, h_t: &SymmetricMatrix) -> Result<Spectrum>;
}

/// Always diagonalizes.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectSolver;

impl TotalSolver for DirectSolver {
    fn solve(&self, _key: &SystemKey, h_t: &SymmetricMatrix) -> Result<Spectrum> {
        eig_sym(h_t)
    }
}

#[derive(Debug)]
pub struct EigenCache {
    dir: PathBuf,
    policy: CachePolicy,
    memo: Mutex<HashMap<[u8; 32], Spectrum>>,
}

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>, policy: CachePolicy) -> Self {
        Self {
            dir: dir.into(),
            policy,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn path_for(&self, key: &SystemKey) -> PathBuf {
        self.dir.join(format!("{}.eig", key.hex()))
    }

    pub fn policy(&self) -> CachePolicy {
        self.policy
    }
}

impl TotalSolver for EigenCache {
    fn solve(&self, key: &SystemKey, h_t: &SymmetricMatrix) -> Result<Spectrum> {
        let digest = key.digest();
        if let Some(s) = self.memo.lock().expect("cache lock").get(&digest) {
            return Ok(s.clone());
        }
        let path = self.path_for(key);
        let spectrum = match self.policy {
            CachePolicy::Recompute => {
                let s = eig_sym(h_t)?;
                store(&path, &s, &digest)?;
                s
            }
            CachePolicy::Use => match load(&path, &digest) {
                Ok(Some(s)) if s.dim() == h_t.dim() => s,
                Ok(_) | Err(Error::CacheInvalid { .. }) => {
                    let s = eig_sym(h_t)?;
                    store(&path, &s, &digest)?;
                    s
                }
                Err(e) => return Err(e),
            },
            CachePolicy::Forbid => match load(&path, &digest) {
                Ok(Some(s)) if s.dim() == h_t.dim() => s,
                Ok(_) => {
                    return Err(Error::CachePolicy(format!(
                        "no cached eigendecomposition at {} and computing is forbidden; \
                         rerun with `--cache use` to compute and store it",
                        path.display()
                    )))
                }
                Err(Error::CacheInvalid { reason, .. }) => {
                    return Err(Error::CachePolicy(format!(
                        "cached eigendecomposition at {} is unusable ({reason}) and computing is \
                         forbidden; rerun with `--cache recompute`",
                        path.display()
                    )))
                }
                Err(e) => return Err(e),
            },
        };
        self.memo.lock().expect("cache lock").insert(digest, spectrum.clone());
        Ok(spectrum)
    }
}
