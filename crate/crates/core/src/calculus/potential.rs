use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ball, LatticeWindow, Site, SiteSet};

/// How `a(x)` grows away from the well.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum PotentialProfile {
    /// `a(x) = d(x, Ω)`.
    #[default]
    Distance,
    /// `a(x) = min(d(x, Ω), cap)`.
    CappedDistance { cap: f64 },
    /// `a(x) = d(x, Ω)²`.
    QuadraticDistance,
}

/// A nonnegative potential `a` with well `Ω = {a = 0}` and a level `M` whose
/// sublevel set `{a ≤ M}` is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    well: SiteSet,
    bound: f64,
    profile: PotentialProfile,
}

impl PotentialSpec {
    pub fn new(well: SiteSet, bound: f64, profile: PotentialProfile) -> Result<Self> {
        if well.is_empty() {
            return Err(Error::InvalidInput("the potential well must be nonempty".into()));
        }
        if !well.is_connected() {
            return Err(Error::InvalidInput("the potential well must be connected".into()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Parameter(format!("sublevel bound M = {bound} must be positive")));
        }
        if let PotentialProfile::CappedDistance { cap } = profile {
            if !(cap > bound) {
                return Err(Error::Parameter(format!(
                    "cap {cap} must exceed M = {bound} for {{a ≤ M}} to be finite"
                )));
            }
        }
        Ok(PotentialSpec { well, bound, profile })
    }

    /// Distance profile around the word ball `B_r(0)` with `M = 1`.
    pub fn ball_well(dim: usize, radius: i64) -> Result<Self> {
        Self::new(ball(&Site::origin(dim), radius)?, 1.0, PotentialProfile::Distance)
    }

    pub fn well(&self) -> &SiteSet {
        &self.well
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn profile(&self) -> PotentialProfile {
        self.profile
    }

    pub fn value(&self, x: &[i32]) -> f64 {
        let d = self.well.distance_to(x).expect("well is nonempty") as f64;
        match self.profile {
            PotentialProfile::Distance => d,
            PotentialProfile::CappedDistance { cap } => d.min(cap),
            PotentialProfile::QuadraticDistance => d * d,
        }
    }

    pub fn values_on(&self, window: &LatticeWindow) -> Vec<f64> {
        window.sites().map(|c| self.value(c)).collect()
    }

    /// Largest word distance `k` from the well with `a ≤ level` at distance `k`.
    fn dilation_for(&self, level: f64) -> u64 {
        match self.profile {
            PotentialProfile::Distance | PotentialProfile::CappedDistance { .. } => level.floor() as u64,
            PotentialProfile::QuadraticDistance => level.sqrt().floor() as u64,
        }
    }

    /// `{x : a(x) ≤ level}`; an error if that set is infinite.
    pub fn sublevel(&self, level: f64) -> Result<SiteSet> {
        if let PotentialProfile::CappedDistance { cap } = self.profile {
            if level >= cap {
                return Err(Error::Domain(format!("sublevel {level} ≥ cap {cap} is infinite")));
            }
        }
        let k = self.dilation_for(level) as i64;
        let mut out = SiteSet::new();
        for x in self.well.iter() {
            for y in ball(x, k)?.iter() {
                if self.value(y.coords()) <= level {
                    out.insert(y.clone());
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_exactly_on_the_well() {
        let pot = PotentialSpec::ball_well(2, 2).unwrap();
        let w = LatticeWindow::boxed(2, 6).unwrap();
        for c in w.sites() {
            let inside = pot.well().contains_coords(c);
            assert_eq!(pot.value(c) == 0.0, inside);
            assert!(pot.value(c) >= 0.0);
        }
        assert_eq!(pot.value(&[3, 0]), 1.0);
        assert_eq!(pot.value(&[3, 3]), 4.0);
    }

    #[test]
    fn sublevel_is_a_dilation_of_the_well() {
        let pot = PotentialSpec::ball_well(2, 2).unwrap();
        for m in [0.5, 1.0, 2.7] {
            let sub = pot.sublevel(m).unwrap();
            let dilated = ball(&Site::origin(2), 2 + m.floor() as i64).unwrap();
            assert_eq!(sub, dilated);
        }
    }

    #[test]
    fn rejects_bad_wells() {
        assert!(PotentialSpec::new(SiteSet::new(), 1.0, PotentialProfile::Distance).is_err());
        let split: SiteSet = [Site::new(vec![0, 0]), Site::new(vec![3, 0])].into_iter().collect();
        assert!(PotentialSpec::new(split, 1.0, PotentialProfile::Distance).is_err());
        let well = ball(&Site::origin(2), 1).unwrap();
        assert!(PotentialSpec::new(well.clone(), 2.0, PotentialProfile::CappedDistance { cap: 2.0 }).is_err());
        let capped = PotentialSpec::new(well, 2.0, PotentialProfile::CappedDistance { cap: 5.0 }).unwrap();
        assert!(capped.sublevel(5.0).is_err());
        assert_eq!(capped.value(&[20, 0]), 5.0);
    }
}
