//! On-disk kernel tables.
//!
//! Plain text: a header of `key value` lines, then one line per symmetry
//! orbit with the canonical offset followed by the value in shortest
//! round-trip notation, so a reload is bit-identical to the table written.
//!
//! ```text
//! choquard-kernel-table 1
//! kind green
//! method bessel-product
//! alpha 1.0
//! dim 2
//! radius 16
//! extent 32
//! quad 3f0c…
//! orbits 561
//! 0 0 0.5390…
//! 1 0 0.3121…
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernels::green::KernelMethod;
use crate::kernels::quadrature::QuadratureSpec;
use crate::kernels::table::{KernelKind, KernelTable};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "choquard-kernel-table";

/// Identifies a cached table.
#[derive(Clone, Debug, PartialEq)]
pub struct CacheKey {
    pub kind: KernelKind,
    pub method: KernelMethod,
    pub alpha: f64,
    pub dim: usize,
    pub radius: i32,
    pub extent: u32,
    pub quad: QuadratureSpec,
}

impl CacheKey {
    pub fn of(table: &KernelTable) -> Self {
        CacheKey {
            kind: table.kind(),
            method: table.method(),
            alpha: table.alpha(),
            dim: table.dim(),
            radius: table.radius(),
            extent: table.extent(),
            quad: *table.quadrature(),
        }
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}-{}-a{:016x}-n{}-r{}-e{}-{}.ktab",
            self.kind,
            self.method,
            self.alpha.to_bits(),
            self.dim,
            self.radius,
            self.extent,
            self.quad.hash_hex()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
    /// The file existed but could not be used and was replaced.
    Rebuilt,
}

pub fn write_table(table: &KernelTable, mut w: impl Write) -> Result<()> {
    let mut s = String::new();
    use std::fmt::Write as _;
    writeln!(s, "{MAGIC} {FORMAT_VERSION}").unwrap();
    writeln!(s, "kind {}", table.kind()).unwrap();
    writeln!(s, "method {}", table.method()).unwrap();
    writeln!(s, "alpha {:?}", table.alpha()).unwrap();
    writeln!(s, "dim {}", table.dim()).unwrap();
    writeln!(s, "radius {}", table.radius()).unwrap();
    writeln!(s, "extent {}", table.extent()).unwrap();
    writeln!(s, "quad {}", table.quadrature().hash_hex()).unwrap();
    writeln!(s, "orbits {}", table.orbits().len()).unwrap();
    for (v, x) in table.orbits() {
        for c in v {
            write!(s, "{c} ").unwrap();
        }
        writeln!(s, "{x:?}").unwrap();
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Parses a table written by [`write_table`]; the header must match `key`.
pub fn read_table(text: &str, key: &CacheKey) -> Result<KernelTable> {
    let mut lines = text.lines().enumerate();
    let mut field = |name: &str| -> Result<String> {
        let (n, line) = lines.next().ok_or(Error::Parse {
            line: 0,
            reason: format!("missing `{name}`"),
        })?;
        line.strip_prefix(name)
            .map(|rest| rest.trim().to_string())
            .ok_or_else(|| Error::Parse { line: n + 1, reason: format!("expected `{name}`") })
    };
    let mismatch = |what: &str| Error::Parse { line: 0, reason: format!("header {what} does not match") };

    if field(MAGIC)? != FORMAT_VERSION.to_string() {
        return Err(mismatch("format version"));
    }
    if field("kind")? != key.kind.to_string() {
        return Err(mismatch("kind"));
    }
    if field("method")? != key.method.to_string() {
        return Err(mismatch("method"));
    }
    let alpha: f64 = field("alpha")?.parse().map_err(|_| mismatch("alpha"))?;
    if alpha.to_bits() != key.alpha.to_bits() {
        return Err(mismatch("alpha"));
    }
    if field("dim")? != key.dim.to_string() {
        return Err(mismatch("dim"));
    }
    if field("radius")? != key.radius.to_string() {
        return Err(mismatch("radius"));
    }
    if field("extent")? != key.extent.to_string() {
        return Err(mismatch("extent"));
    }
    if field("quad")? != key.quad.hash_hex() {
        return Err(mismatch("quadrature hash"));
    }
    let count: usize = field("orbits")?.parse().map_err(|_| mismatch("orbit count"))?;
    let mut orbits = Vec::with_capacity(count);
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::Parse { line: n + 1, reason: reason.to_string() };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != key.dim + 1 {
            return Err(bad("wrong number of columns"));
        }
        let v: Vec<i32> = tokens[..key.dim]
            .iter()
            .map(|t| t.parse().map_err(|_| bad("bad offset")))
            .collect::<Result<_>>()?;
        let x: f64 = tokens[key.dim].parse().map_err(|_| bad("bad value"))?;
        orbits.push((v, x));
    }
    if orbits.len() != count {
        return Err(Error::Parse { line: 0, reason: "orbit count does not match".into() });
    }
    KernelTable::from_orbits(
        key.kind,
        key.alpha,
        key.dim,
        key.radius,
        key.extent,
        key.method,
        key.quad,
        orbits,
    )
}

pub fn save(table: &KernelTable, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(CacheKey::of(table).file_name());
    let tmp = path.with_extension("ktab.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        write_table(table, &mut f)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Loads the table for `key` from `dir`, building and saving it when absent.
/// An unreadable or mismatched file is rebuilt with a warning.
pub fn load_or_build(dir: &Path, key: &CacheKey) -> Result<(KernelTable, CacheStatus, PathBuf)> {
    let path = dir.join(key.file_name());
    let mut status = CacheStatus::Built;
    if path.exists() {
        match fs::read_to_string(&path)
            .map_err(Error::from)
            .and_then(|text| read_table(&text, key))
        {
            Ok(table) => return Ok((table, CacheStatus::Hit, path)),
            Err(err) => {
                log::warn!("kernel cache {} unusable ({err}); rebuilding", path.display());
                status = CacheStatus::Rebuilt;
            }
        }
    }
    let table = KernelTable::build_with_extent(
        key.kind,
        key.alpha,
        key.dim,
        key.radius,
        key.extent,
        &key.quad,
        key.method,
    )?;
    let path = save(&table, dir).map_err(|e| Error::Cache {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    Ok((table, status, path))
}
