//! Real-valued fields on a [`LatticeWindow`], zero outside the window.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{LatticeWindow, Site, SiteSet, WindowShape};

#[derive(Clone, Debug)]
pub struct Field {
    window: Arc<LatticeWindow>,
    values: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        *self.window == *other.window && self.values == other.values
    }
}

impl Field {
    pub fn zeros(window: Arc<LatticeWindow>) -> Self {
        let values = vec![0.0; window.len()];
        Field { window, values }
    }

    pub fn from_values(window: Arc<LatticeWindow>, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a window of {} sites",
                values.len(),
                window.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at site {}",
                Site::from(window.site(bad))
            )));
        }
        Ok(Field { window, values })
    }

    pub fn from_fn(window: Arc<LatticeWindow>, mut f: impl FnMut(&[i32]) -> f64) -> Self {
        let values = window.sites().map(&mut f).collect();
        Field { window, values }
    }

    /// Unit mass at `site`.
    pub fn delta(window: Arc<LatticeWindow>, site: &[i32]) -> Result<Self> {
        let i = window.index_of(site).ok_or_else(|| {
            Error::InvalidInput(format!("site {} outside window", Site::from(site)))
        })?;
        let mut f = Field::zeros(window);
        f.values[i] = 1.0;
        Ok(f)
    }

    pub fn window(&self) -> &Arc<LatticeWindow> {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `site`, zero outside the window.
    pub fn at(&self, site: &[i32]) -> f64 {
        self.window.index_of(site).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, site: &[i32], value: f64) -> Result<()> {
        let i = self.window.index_of(site).ok_or_else(|| {
            Error::InvalidInput(format!("site {} outside window", Site::from(site)))
        })?;
        self.values[i] = value;
        Ok(())
    }

    pub fn support(&self) -> SiteSet {
        self.window
            .sites()
            .zip(&self.values)
            .filter(|(_, v)| **v != 0.0)
            .map(|(c, _)| Site::from(c))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            window: self.window.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    fn check_same_window(&self, other: &Field) -> Result<()> {
        if *self.window != *other.window {
            return Err(Error::InvalidInput("fields live on different windows".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same_window(other)?;
        Ok(Field {
            window: self.window.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same_window(other)?;
        Ok(Field {
            window: self.window.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// `Σ_x u(x) v(x)`
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check_same_window(other)?;
        Ok(dot(&self.values, &other.values))
    }

    /// `‖u‖_q` for `1 ≤ q < ∞` on counting measure.
    pub fn lq_norm(&self, q: f64) -> f64 {
        lq_norm(&self.values, q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// The same function on another window: values copied where the sites
    /// overlap, zero elsewhere. Fails if nonzero values would be dropped.
    pub fn embed(&self, target: Arc<LatticeWindow>) -> Result<Field> {
        if target.dim() != self.window.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        let mut out = Field::zeros(target);
        for (c, v) in self.window.sites().zip(&self.values) {
            match out.window.index_of(c) {
                Some(i) => out.values[i] = *v,
                None if *v != 0.0 => {
                    return Err(Error::InvalidInput(format!(
                        "nonzero value at {} lies outside the target window",
                        Site::from(c)
                    )))
                }
                None => {}
            }
        }
        Ok(out)
    }

    /// Restriction to a smaller window, discarding values outside it.
    pub fn restrict(&self, target: Arc<LatticeWindow>) -> Field {
        Field::from_fn(target, |c| self.at(c))
    }

    /// Translate by `shift`: `(τu)(x) = u(x − shift)`. Fails if mass would
    /// leave the window.
    pub fn translate(&self, shift: &[i32]) -> Result<Field> {
        let mut out = Field::zeros(self.window.clone());
        for (c, v) in self.window.sites().zip(&self.values) {
            if *v == 0.0 {
                continue;
            }
            let moved: Vec<i32> = c.iter().zip(shift).map(|(a, b)| a + b).collect();
            let i = self.window.index_of(&moved).ok_or_else(|| {
                Error::InvalidInput(format!("translation moves {} outside the window", Site::from(c)))
            })?;
            out.values[i] = *v;
        }
        Ok(out)
    }

    /// Plain-text record: a header line per window attribute, then one
    /// `coords… value` line per site. Values use shortest round-trip
    /// formatting, so reading back is bit-exact.
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "choquard-field 1").unwrap();
        writeln!(s, "dim {}", self.window.dim()).unwrap();
        writeln!(s, "radius {}", self.window.radius()).unwrap();
        writeln!(s, "shape {}", self.window.shape()).unwrap();
        writeln!(s, "sites {}", self.window.len()).unwrap();
        for (c, v) in self.window.sites().zip(&self.values) {
            for x in c {
                write!(s, "{x} ").unwrap();
            }
            writeln!(s, "{v:?}").unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("field text is ASCII")
    }

    pub fn read_text(r: impl BufRead) -> Result<Field> {
        let mut lines = r.lines().enumerate();
        let mut header = |key: &str| -> Result<String> {
            let (n, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                reason: format!("missing `{key}` header"),
            })?;
            let line = line?;
            let rest = line.strip_prefix(key).ok_or_else(|| Error::Parse {
                line: n + 1,
                reason: format!("expected `{key}`"),
            })?;
            Ok(rest.trim().to_string())
        };
        let magic = header("choquard-field")?;
        if magic != "1" {
            return Err(Error::Parse { line: 1, reason: format!("unsupported field format {magic}") });
        }
        let parse_int = |s: String, line: usize| -> Result<i64> {
            s.parse().map_err(|_| Error::Parse { line, reason: format!("bad integer {s:?}") })
        };
        let dim = parse_int(header("dim")?, 2)? as usize;
        let radius = parse_int(header("radius")?, 3)?;
        let shape: WindowShape = header("shape")?.parse()?;
        let count = parse_int(header("sites")?, 5)? as usize;
        let window = Arc::new(LatticeWindow::new(dim, radius, shape)?);
        if window.len() != count {
            return Err(Error::Parse {
                line: 5,
                reason: format!("site count {count} does not match window ({})", window.len()),
            });
        }
        let mut values = vec![0.0; count];
        let mut seen = vec![false; count];
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| Error::Parse { line: n + 1, reason };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != dim + 1 {
                return Err(bad(format!("expected {} columns", dim + 1)));
            }
            let coords: Vec<i32> = tokens[..dim]
                .iter()
                .map(|t| t.parse().map_err(|_| bad(format!("bad coordinate {t:?}"))))
                .collect::<Result<_>>()?;
            let v: f64 = tokens[dim].parse().map_err(|_| bad(format!("bad value {:?}", tokens[dim])))?;
            let i = window
                .index_of(&coords)
                .ok_or_else(|| bad(format!("site {} outside window", Site::from(coords.clone()))))?;
            if seen[i] {
                return Err(bad(format!("duplicate site {}", Site::from(coords))));
            }
            seen[i] = true;
            values[i] = v;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse { line: 0, reason: "missing site records".into() });
        }
        Field::from_values(window, values)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn lq_norm(values: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        return dot(values, values).sqrt();
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * values.iter().map(|v| (v.abs() / scale).powf(q)).sum::<f64>().powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_bit_exact() {
        let w = Arc::new(LatticeWindow::boxed(2, 3).unwrap());
        let f = Field::from_fn(w, |c| (c[0] as f64 * 0.1).sin() / 3.0 + c[1] as f64 * 1e-17);
        let text = f.to_text();
        let back = Field::read_text(text.as_bytes()).unwrap();
        assert_eq!(f, back);
        assert!(f
            .values()
            .iter()
            .zip(back.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn rejects_truncated_records() {
        let w = Arc::new(LatticeWindow::boxed(1, 2).unwrap());
        let f = Field::zeros(w);
        let text = f.to_text();
        let cut: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
        assert!(Field::read_text(cut.as_bytes()).is_err());
    }

    #[test]
    fn embed_and_translate() {
        let small = Arc::new(LatticeWindow::boxed(2, 1).unwrap());
        let big = Arc::new(LatticeWindow::boxed(2, 3).unwrap());
        let d = Field::delta(small.clone(), &[1, 0]).unwrap();
        let e = d.embed(big.clone()).unwrap();
        assert_eq!(e.at(&[1, 0]), 1.0);
        let t = e.translate(&[1, 1]).unwrap();
        assert_eq!(t.at(&[2, 1]), 1.0);
        assert!(t.embed(small).is_err());
        assert!(e.translate(&[3, 0]).is_err());
    }

    #[test]
    fn lq_norms() {
        let w = Arc::new(LatticeWindow::boxed(1, 2).unwrap());
        let f = Field::from_values(w, vec![0.0, 3.0, -4.0, 0.0, 0.0]).unwrap();
        assert!((f.lq_norm(2.0) - 5.0).abs() < 1e-15);
        assert!((f.lq_norm(1.0) - 7.0).abs() < 1e-15);
        assert_eq!(f.sup_norm(), 4.0);
    }
}
