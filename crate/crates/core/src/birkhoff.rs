//! Minimal-subtraction Birkhoff factorization `phi = phi_minus * phi_plus`
//! of diffeomorphisms with Laurent coefficients, the counterterm data
//! `(beta, residue)` and the `delta`-locality test.

use crate::coeff::{split_ms, Coeff, EXACT};
use crate::diffeo::{log_d_magnus, Diffeo};
use crate::error::{Error, Result};
use crate::regularize::{image_part, tau_param, theta_diffeo, Scheme};
use crate::series::{Monomial, Series};
use crate::vfield::VectorField;

/// Pole factor `minus` and regular factor `plus` with `phi = minus * plus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirkhoffPair {
    pub minus: Diffeo,
    pub plus: Diffeo,
}

/// Splits `phi` degree by degree.
///
/// With the operator-product convention, `phi_i(x) = plus_i(minus(x))`. At
/// degree `k` the cross terms of that substitution only involve parts of
/// degree `< k`, so subtracting them leaves `minus_{i,k} + plus_{i,k}`, which
/// is separated by the sign of the `e`-exponent.
pub fn birkhoff_decompose(phi: &Diffeo) -> Result<BirkhoffPair> {
    let nu = phi.nu();
    let order = phi.order();
    let top = order + 1;
    let mut minus: Vec<Series> = (0..nu).map(|i| Series::var(nu, top, i)).collect();
    let mut plus = minus.clone();
    for k in 2..=top {
        for i in 0..nu {
            let cross = plus[i].substitute(&minus).degree_part(k);
            let target = phi.components()[i].degree_part(k).sub(&cross);
            for (m, c) in target.terms() {
                if c.validity() < -1 {
                    return Err(Error::ValidityExhausted {
                        validity: c.validity(),
                    });
                }
                let (neg, pos) = split_ms(c);
                minus[i].add_term(*m, neg);
                plus[i].add_term(*m, pos);
            }
        }
    }
    Ok(BirkhoffPair {
        minus: Diffeo::from_components(minus, order)?,
        plus: Diffeo::from_components(plus, order)?,
    })
}

impl BirkhoffPair {
    /// `minus * plus`.
    pub fn recompose(&self) -> Diffeo {
        self.minus.compose_unchecked(&self.plus)
    }
}

/// `beta = log_{d + e delta}(minus)` and the `e^-1` coefficient of `minus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterterm {
    pub beta: VectorField,
    pub residue: VectorField,
}

/// Extracts `beta` and the residue, enforcing `e`-freeness, `d(beta) = 0`
/// and `delta(residue) = beta`.
pub fn beta_and_residue(pair: &BirkhoffPair, s: &Scheme) -> Result<Counterterm> {
    let raw = log_d_magnus(&pair.minus, &s.regularized());
    if raw.validity() < 0 {
        return Err(Error::ValidityExhausted {
            validity: raw.validity(),
        });
    }
    if raw.terms().values().any(|c| !c.is_eps_free()) {
        return Err(Error::NotEpsFree);
    }
    let beta = raw.map_terms(|_, c| exact(c));
    let leaked = image_part(&beta, s);
    if !leaked.is_zero() {
        return Err(Error::Invariant(format!(
            "beta has image part {}",
            leaked
        )));
    }
    let residue = residue_field(&pair.minus)?;
    let delta_res = s.delta_derivation().apply(&residue);
    if delta_res != beta {
        return Err(Error::Invariant(format!(
            "delta(residue) = {} differs from beta = {}",
            delta_res, beta
        )));
    }
    Ok(Counterterm { beta, residue })
}

/// The `e^-1` coefficients of `minus - id`, read as a vector field.
pub fn residue_field(minus: &Diffeo) -> Result<VectorField> {
    if minus.validity() < -1 {
        return Err(Error::ValidityExhausted {
            validity: minus.validity(),
        });
    }
    let comps: Vec<Series> = minus
        .nonlinear()
        .iter()
        .map(|s| s.map_coeffs(|_, c| exact(&c.filter(|k| k.eps == -1).shift_eps(1))))
        .collect();
    VectorField::from_components(&comps, minus.order())
}

/// Stored terms of `c`, declared exact.
fn exact(c: &Coeff) -> Coeff {
    Coeff::from_terms(c.terms().to_vec(), EXACT, c.aux().cloned())
}

/// Result of the locality test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalityReport {
    pub local: bool,
    /// Coordinate terms of the twisted counterterm that carry `tau`.
    pub offending: Vec<(Monomial, usize)>,
}

/// Twists `phi` by `theta_tau` with symbolic `tau` and checks that the pole
/// factor does not depend on `tau`.
pub fn check_locality(phi: &Diffeo, s: &Scheme) -> Result<LocalityReport> {
    let tau = tau_param(s);
    let spec = tau.aux().cloned().expect("tau is an auxiliary parameter");
    let lifted = phi.map_nonlinear(|_, _, c| c.clone().with_aux(&spec).expect("fresh aux ring"));
    let twisted = theta_diffeo(&lifted, s, &tau);
    let pair = birkhoff_decompose(&twisted)?;
    let mut offending = Vec::new();
    for (i, comp) in pair.minus.components().iter().enumerate() {
        for (m, c) in comp.terms() {
            if !c.is_pure_eps() {
                offending.push((*m, i));
            }
        }
    }
    Ok(LocalityReport {
        local: offending.is_empty(),
        offending,
    })
}
