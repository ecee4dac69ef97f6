//! On-disk storage for [`RkTable`]s.
//!
//! A cache file is plain text:
//!
//! ```text
//! GPFREE-RKTABLE
//! format_version 1
//! k 3
//! ell_max 14
//! checksum 9f0c3a6d1e2b4c58
//! 1 1 0
//! 2 2 0,1
//! …
//! ```
//!
//! One row per `ℓ`: `ℓ r_k(ℓ) w1,w2,…` with the witness sorted ascending.
//! The checksum is 64-bit FNV-1a over the row lines, each terminated by
//! `\n`, written as 16 lowercase hex digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::apfree::{RkTable, SolverConfig};
use crate::error::{Error, Result};

pub const MAGIC: &str = "GPFREE-RKTABLE";
pub const FORMAT_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "GPFREE_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".gpfree-cache";

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn payload(table: &RkTable) -> String {
    let mut out = String::new();
    for (ell, value, witness) in table.rows() {
        let w: Vec<String> = witness.iter().map(usize::to_string).collect();
        out.push_str(&format!("{ell} {value} {}\n", w.join(",")));
    }
    out
}

/// Serialises a table to the cache text format.
pub fn encode(table: &RkTable) -> String {
    let rows = payload(table);
    format!(
        "{MAGIC}\nformat_version {FORMAT_VERSION}\nk {}\nell_max {}\nchecksum {:016x}\n{rows}",
        table.k(),
        table.ell_max(),
        fnv1a64(rows.as_bytes()),
    )
}

/// Parses and validates cache text. `path` is only used in error messages.
pub fn decode(text: &str, path: &Path) -> Result<RkTable> {
    let corrupt = |reason: String| Error::CorruptCache {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.split_inclusive('\n');
    let mut header = |name: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(format!("missing {name} header")))?;
        let line = line
            .strip_suffix('\n')
            .ok_or_else(|| corrupt(format!("unterminated {name} header")))?;
        if name == MAGIC {
            return if line == MAGIC {
                Ok(String::new())
            } else {
                Err(corrupt("bad magic".into()))
            };
        }
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| corrupt(format!("expected `{name}` header, found {line:?}")))
    };

    header(MAGIC)?;
    let version: u32 = header("format_version")?
        .parse()
        .map_err(|_| corrupt("unparsable format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let k: usize = header("k")?
        .parse()
        .map_err(|_| corrupt("unparsable k".into()))?;
    let ell_max: usize = header("ell_max")?
        .parse()
        .map_err(|_| corrupt("unparsable ell_max".into()))?;
    let checksum = header("checksum")?;
    let checksum = u64::from_str_radix(&checksum, 16)
        .ok()
        .filter(|_| checksum.len() == 16)
        .ok_or_else(|| corrupt("unparsable checksum".into()))?;

    let rows: String = lines.collect();
    if fnv1a64(rows.as_bytes()) != checksum {
        return Err(corrupt("checksum mismatch".into()));
    }
    if !rows.is_empty() && !rows.ends_with('\n') {
        return Err(corrupt("truncated final row".into()));
    }

    let mut values = Vec::with_capacity(ell_max);
    let mut witnesses = Vec::with_capacity(ell_max);
    for (i, line) in rows.lines().enumerate() {
        let mut fields = line.split(' ');
        let (Some(ell), Some(value), Some(w), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(corrupt(format!("malformed row {}", i + 1)));
        };
        if ell.parse::<usize>().ok() != Some(i + 1) {
            return Err(corrupt(format!("row {} is labelled {ell:?}", i + 1)));
        }
        let value: usize = value
            .parse()
            .map_err(|_| corrupt(format!("bad value in row {}", i + 1)))?;
        let witness = if w.is_empty() {
            Vec::new()
        } else {
            w.split(',')
                .map(str::parse)
                .collect::<std::result::Result<Vec<usize>, _>>()
                .map_err(|_| corrupt(format!("bad witness in row {}", i + 1)))?
        };
        values.push(value);
        witnesses.push(witness);
    }
    if values.len() != ell_max {
        return Err(corrupt(format!(
            "header says {ell_max} rows, found {}",
            values.len()
        )));
    }
    RkTable::from_rows(k, values, witnesses).map_err(|e| corrupt(e.to_string()))
}

pub fn load(path: &Path) -> Result<RkTable> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&text, path)
}

/// Writes `table` to `path` atomically. An existing valid table for the same
/// `k` with more rows is never replaced by a shorter one.
pub fn save(table: &RkTable, path: &Path) -> Result<()> {
    table.validate()?;
    if path.exists() {
        if let Ok(existing) = load(path) {
            if existing.k() == table.k() && existing.ell_max() > table.ell_max() {
                return Err(Error::WouldTruncate {
                    existing: existing.ell_max(),
                    new: table.ell_max(),
                });
            }
        }
    }
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(encode(table).as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// A directory of per-`k` table files.
#[derive(Debug, Clone)]
pub struct CacheStore {
    dir: PathBuf,
}

impl CacheStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CacheStore { dir: dir.into() }
    }

    /// Explicit directory, else `$GPFREE_CACHE_DIR`, else `./.gpfree-cache`.
    pub fn resolve(explicit: Option<PathBuf>) -> Self {
        let dir = explicit
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        CacheStore { dir }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, k: usize) -> PathBuf {
        self.dir.join(format!("rk_k{k}.txt"))
    }

    /// The cached table for `k`, if one exists. Unreadable files are errors.
    pub fn get(&self, k: usize) -> Result<Option<RkTable>> {
        let path = self.path_for(k);
        if !path.exists() {
            return Ok(None);
        }
        let table = load(&path)?;
        if table.k() != k {
            return Err(Error::CorruptCache {
                path,
                reason: format!("file holds k = {}, expected {k}", table.k()),
            });
        }
        Ok(Some(table))
    }

    /// A table for `k` reaching at least `ell_max`, extending and saving the
    /// cached one when it is too short. On budget exhaustion the verified
    /// prefix is still written back.
    pub fn ensure(&self, k: usize, ell_max: usize, config: &SolverConfig) -> Result<RkTable> {
        let cached = self.get(k)?;
        if let Some(t) = &cached {
            if t.ell_max() >= ell_max {
                return Ok(t.clone());
            }
        }
        let built = match &cached {
            Some(t) => t.extend(ell_max, config),
            None => crate::apfree::rk_table(k, ell_max, config),
        };
        match built {
            Ok(table) => {
                save(&table, &self.path_for(k))?;
                Ok(table)
            }
            Err(Error::BudgetExhausted {
                prefix: Some(prefix),
                budget,
                ell,
                lower,
                upper,
            }) => {
                if cached
                    .as_ref()
                    .is_none_or(|c| c.ell_max() < prefix.ell_max())
                {
                    save(&prefix, &self.path_for(k))?;
                }
                Err(Error::BudgetExhausted {
                    prefix: Some(prefix),
                    budget,
                    ell,
                    lower,
                    upper,
                })
            }
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfree::rk_table;

    fn table(k: usize, ell: usize) -> RkTable {
        rk_table(k, ell, &SolverConfig::sequential()).unwrap()
    }

    #[test]
    fn encoding_is_stable() {
        let text = encode(&table(3, 4));
        let rows = "1 1 0\n2 2 0,1\n3 2 0,1\n4 3 0,1,3\n";
        let expected = format!(
            "GPFREE-RKTABLE\nformat_version 1\nk 3\nell_max 4\nchecksum {:016x}\n{rows}",
            fnv1a64(rows.as_bytes())
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn round_trip_and_policies() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        let long = table(3, 12);
        save(&long, &path).unwrap();
        assert_eq!(load(&path).unwrap(), long);

        assert!(matches!(
            save(&table(3, 8), &path),
            Err(Error::WouldTruncate {
                existing: 12,
                new: 8
            })
        ));
        save(&table(3, 14), &path).unwrap();
        assert_eq!(load(&path).unwrap().ell_max(), 14);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        assert!(matches!(load(&path), Err(Error::Io { .. })));

        let text = encode(&table(3, 10));
        fs::write(&path, &text[..text.len() - 7]).unwrap();
        assert!(matches!(load(&path), Err(Error::CorruptCache { .. })));

        fs::write(&path, text.replace("format_version 1", "format_version 2")).unwrap();
        assert!(matches!(
            load(&path),
            Err(Error::VersionMismatch {
                found: 2,
                expected: 1
            })
        ));

        fs::write(&path, text.replace("GPFREE", "GPFRE")).unwrap();
        assert!(matches!(load(&path), Err(Error::CorruptCache { .. })));
    }

    #[test]
    fn consistent_but_wrong_rows_are_rejected() {
        // a forged row with a recomputed checksum still fails validation
        let rows = "1 1 0\n2 2 0,1\n3 3 0,1,2\n";
        let text = format!(
            "{MAGIC}\nformat_version 1\nk 3\nell_max 3\nchecksum {:016x}\n{rows}",
            fnv1a64(rows.as_bytes())
        );
        assert!(matches!(
            decode(&text, Path::new("x")),
            Err(Error::CorruptCache { .. })
        ));
    }

    #[test]
    fn store_extends_and_reuses() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::new(dir.path());
        let cfg = SolverConfig::sequential();
        assert!(store.get(3).unwrap().is_none());
        let t = store.ensure(3, 10, &cfg).unwrap();
        assert_eq!(t.ell_max(), 10);
        let t = store.ensure(3, 6, &cfg).unwrap();
        assert_eq!(t.ell_max(), 10);
        let t = store.ensure(3, 16, &cfg).unwrap();
        assert_eq!(t, table(3, 16));
        assert_eq!(store.get(3).unwrap().unwrap().ell_max(), 16);
    }
}
