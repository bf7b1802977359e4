use std::sync::Arc;

use crate::calculus::operators::Stencil;
use crate::calculus::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::{vertex_boundary, SiteSet};

/// `(Σ|Δu|², Σ|∇u|²)` over all of `Z^N` for a field supported in its window.
pub(crate) fn dirichlet_sums(u: &Field) -> Result<(f64, f64)> {
    let grown = Arc::new(u.window().grow(1)?);
    let stencil = Stencil::new(u.window(), &grown);
    let mut lap = vec![0.0; grown.len()];
    stencil.laplacian_into(u.values(), &mut lap);
    let mut gamma = vec![0.0; grown.len()];
    stencil.gradient_form_into(u.values(), u.values(), &mut gamma);
    Ok((lap.iter().map(|v| v * v).sum(), gamma.iter().sum()))
}

/// `‖u‖²_{E_λ} = Σ (|Δu|² + |∇u|² + (1 + λa) u²)`.
pub fn elambda_norm_sq(u: &Field, potential: &PotentialSpec, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("λ = {lambda} must be finite and ≥ 0")));
    }
    let (lap, grad) = dirichlet_sums(u)?;
    let mass: f64 = u
        .window()
        .sites()
        .zip(u.values())
        .map(|(c, v)| (1.0 + lambda * potential.value(c)) * v * v)
        .sum();
    Ok(lap + grad + mass)
}

/// `‖u‖²_{W^{2,2}} = Σ (|Δu|² + |∇u|² + u²)`.
pub fn w22_norm_sq(u: &Field) -> Result<f64> {
    let (lap, grad) = dirichlet_sums(u)?;
    Ok(lap + grad + u.values().iter().map(|v| v * v).sum::<f64>())
}

/// `‖u‖²_{E(Ω)} = Σ_{Ω̄} (|Δu|² + |∇u|²) + Σ_Ω u²` for `supp u ⊆ Ω`, with
/// `u` extended by zero beyond `Ω`.
pub fn omega_norm_sq(u: &Field, omega: &SiteSet) -> Result<f64> {
    let support = u.support();
    if !support.is_subset(omega) {
        return Err(Error::InvalidInput("field is not supported in Ω".into()));
    }
    if omega.is_empty() {
        return Ok(0.0);
    }
    let closure = omega.union(&vertex_boundary(omega)?);
    let grown = u.window().grow(1)?;
    if let Some(x) = closure.iter().find(|x| !grown.contains(x.coords())) {
        return Err(Error::InvalidInput(format!("Ω̄ site {x} lies outside the field window")));
    }
    let grown = Arc::new(grown);
    let stencil = Stencil::new(u.window(), &grown);
    let mut lap = vec![0.0; grown.len()];
    stencil.laplacian_into(u.values(), &mut lap);
    let mut gamma = vec![0.0; grown.len()];
    stencil.gradient_form_into(u.values(), u.values(), &mut gamma);
    let mut total = 0.0;
    for x in closure.iter() {
        let i = grown.index_of(x.coords()).expect("checked above");
        total += lap[i] * lap[i] + gamma[i];
    }
    for x in omega.iter() {
        let v = u.at(x.coords());
        total += v * v;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ball, LatticeWindow, Site};

    fn window(r: i64) -> Arc<LatticeWindow> {
        Arc::new(LatticeWindow::boxed(2, r).unwrap())
    }

    #[test]
    fn delta_norms() {
        let pot = PotentialSpec::ball_well(2, 2).unwrap();
        let d = Field::delta(window(4), &[0, 0]).unwrap();
        assert_eq!(elambda_norm_sq(&d, &pot, 37.0).unwrap(), 25.0);
        assert_eq!(w22_norm_sq(&d).unwrap(), 25.0);
        let single: SiteSet = std::iter::once(Site::origin(2)).collect();
        assert_eq!(omega_norm_sq(&d, &single).unwrap(), 25.0);
        assert_eq!(elambda_norm_sq(&Field::zeros(window(2)), &pot, 1.0).unwrap(), 0.0);
        assert_eq!(w22_norm_sq(&Field::zeros(window(2))).unwrap(), 0.0);
    }

    #[test]
    fn monotone_in_lambda_outside_the_well() {
        let pot = PotentialSpec::ball_well(2, 1).unwrap();
        let u = Field::from_fn(window(5), |c| 1.0 / (1.0 + (c[0] * c[0] + c[1] * c[1]) as f64));
        let mut last = 0.0;
        for lambda in [0.0, 0.5, 3.0, 100.0] {
            let n = elambda_norm_sq(&u, &pot, lambda).unwrap();
            assert!(n > last);
            last = n;
        }
        assert_eq!(elambda_norm_sq(&u, &pot, 0.0).unwrap(), w22_norm_sq(&u).unwrap());
    }

    #[test]
    fn omega_norm_requires_support_in_omega() {
        let omega = ball(&Site::origin(2), 1).unwrap();
        let d = Field::delta(window(4), &[2, 0]).unwrap();
        assert!(omega_norm_sq(&d, &omega).is_err());
        assert_eq!(omega_norm_sq(&Field::zeros(window(4)), &omega).unwrap(), 0.0);
    }

    #[test]
    fn omega_norm_matches_w22_for_deep_support() {
        let omega = ball(&Site::origin(2), 5).unwrap();
        let u = Field::from_fn(window(8), |c| {
            if c[0].abs() + c[1].abs() <= 2 {
                (c[0] as f64 + 0.3 * c[1] as f64).cos()
            } else {
                0.0
            }
        });
        let a = omega_norm_sq(&u, &omega).unwrap();
        let b = w22_norm_sq(&u).unwrap();
        assert!((a - b).abs() <= 1e-12 * b);
    }
}
