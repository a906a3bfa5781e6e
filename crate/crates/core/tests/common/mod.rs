#![allow(dead_code)]

use dnorm::coeff::{int, rat, Coeff, Rational};
use dnorm::regularize::{Diagonal, Scheme};
use dnorm::series::{Monomial, Series};
use dnorm::vfield::{Spectrum, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rat(r: &mut ChaCha8Rng) -> Rational {
    let num = r.gen_range(-5i64..=5);
    let den = r.gen_range(1i64..=4);
    rat(num, den)
}

/// Random field with about `density` of the basis populated, grades `lo..=hi`.
pub fn random_field(
    r: &mut ChaCha8Rng,
    nu: usize,
    order: usize,
    lo: usize,
    hi: usize,
    density: f64,
) -> VectorField {
    let mut u = VectorField::zero(nu, order);
    for m in Monomial::enumerate(nu, lo + 1, hi + 1) {
        for j in 0..nu {
            if r.gen_bool(density) {
                let c = small_rat(r);
                u.add_term(m, j, Coeff::constant(c)).unwrap();
            }
        }
    }
    u
}

pub fn random_series(r: &mut ChaCha8Rng, nu: usize, max_deg: usize, density: f64) -> Series {
    let mut s = Series::zero(nu, max_deg);
    for m in Monomial::enumerate(nu, 0, max_deg) {
        if r.gen_bool(density) {
            s.add_term(m, Coeff::constant(small_rat(r)));
        }
    }
    s
}

pub fn saddle(order: usize) -> Scheme {
    Scheme::new(Spectrum::new(vec![int(1), int(-1)]), Diagonal::Grading, order)
}

pub fn toy(order: usize) -> Scheme {
    Scheme::new(Spectrum::new(vec![int(1), int(0)]), Diagonal::Grading, order)
}

pub fn nonresonant(order: usize) -> Scheme {
    Scheme::new(Spectrum::new(vec![int(2), int(5)]), Diagonal::Grading, order)
}

pub fn mono(e: &[u32]) -> Monomial {
    Monomial::new(e).unwrap()
}
