//! Initial data families.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::{dot_n, MhdState, SpectralField, Vec3};
use crate::modes::{ModeSet, WaveVector};
use crate::norms::sobolev_norm;

fn default_a() -> f64 {
    1.0
}
fn default_b() -> f64 {
    0.7
}
fn default_norm() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `V = v_amp cos(n.x)`, `B = b_amp cos(n.x)`.
    SingleMode {
        n: [i32; 3],
        v_amp: [f64; 3],
        #[serde(default)]
        b_amp: [f64; 3],
    },
    /// Beltrami fields built from the three `|n| = 1` helical pairs:
    /// `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
    Abc {
        v: [f64; 3],
        #[serde(default)]
        b: [f64; 3],
    },
    /// `|c(n)| ∝ |n|^{-a} e^{-b|n|}` with per-mode seeded random
    /// directions, rescaled to the requested `L^2` norms.
    RandomSpectrum {
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "default_b")]
        b: f64,
        #[serde(default = "default_norm")]
        v_norm: f64,
        #[serde(default = "default_norm")]
        b_norm: f64,
        seed: u64,
    },
}

impl InitialCondition {
    pub fn seed(&self) -> Option<u64> {
        match self {
            InitialCondition::RandomSpectrum { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn real3(a: [f64; 3], s: f64) -> Vec3<f64> {
    [c(a[0] * s, 0.0), c(a[1] * s, 0.0), c(a[2] * s, 0.0)]
}

/// Builds an [`MhdState`] at `t = 0` on the radius-`n_max` ball.
pub fn make_initial(ic: &InitialCondition, n_max: u32, nu: f64, eta: f64) -> Result<MhdState<f64>> {
    if n_max == 0 {
        return Err(CoreError::InvalidParameter("N must be at least 1".into()));
    }
    let modes = ModeSet::shared(n_max);
    let (v, b) = match ic {
        InitialCondition::SingleMode { n, v_amp, b_amp } => {
            let w = WaveVector(*n);
            if w.is_zero() {
                return Err(CoreError::NonzeroMean);
            }
            let cv = real3(*v_amp, 0.5);
            let cb = real3(*b_amp, 0.5);
            for cc in [&cv, &cb] {
                if dot_n(cc, w).norm() > 1e-12 * (cc.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt() * w.norm() {
                    return Err(CoreError::Solenoidality(w));
                }
            }
            (
                SpectralField::from_modes(modes.clone(), &[(w, cv)])?,
                SpectralField::from_modes(modes, &[(w, cb)])?,
            )
        }
        InitialCondition::Abc { v, b } => (abc(&modes, *v)?, abc(&modes, *b)?),
        InitialCondition::RandomSpectrum {
            a,
            b,
            v_norm,
            b_norm,
            seed,
        } => {
            if !(a.is_finite() && b.is_finite() && *v_norm >= 0.0 && *b_norm >= 0.0) {
                return Err(CoreError::InvalidParameter("random-spectrum parameters must be finite and non-negative".into()));
            }
            (
                random_field(&modes, *a, *b, *v_norm, *seed, 0x5eed_0001),
                random_field(&modes, *a, *b, *b_norm, *seed, 0x5eed_0002),
            )
        }
    };
    MhdState::new(v, b, 0.0, nu, eta)
}

fn abc(modes: &std::sync::Arc<ModeSet>, amp: [f64; 3]) -> Result<SpectralField<f64>> {
    let [a, b, cc] = amp;
    let h = 0.5;
    SpectralField::from_modes(
        modes.clone(),
        &[
            (WaveVector::new(0, 0, 1), [c(0.0, -a * h), c(a * h, 0.0), c(0.0, 0.0)]),
            (WaveVector::new(1, 0, 0), [c(0.0, 0.0), c(0.0, -b * h), c(b * h, 0.0)]),
            (WaveVector::new(0, 1, 0), [c(cc * h, 0.0), c(0.0, 0.0), c(0.0, -cc * h)]),
        ],
    )
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-mode stream seed: independent of the truncation radius, so that a
/// lower-resolution draw is the Galerkin projection of a higher one up to
/// the global normalisation.
fn mode_seed(seed: u64, tag: u64, n: WaveVector) -> u64 {
    let mut h = splitmix(seed ^ splitmix(tag));
    for k in n.0 {
        h = splitmix(h ^ (k as i64 as u64));
    }
    h
}

fn random_field(modes: &std::sync::Arc<ModeSet>, a: f64, b: f64, target: f64, seed: u64, tag: u64) -> SpectralField<f64> {
    let mut f = SpectralField::from_fn(modes.clone(), |n| {
        let mut rng = ChaCha8Rng::seed_from_u64(mode_seed(seed, tag, n));
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let raw: Vec3<f64> = [c(g(), g()), c(g(), g()), c(g(), g())];
        // remove the longitudinal part before normalising the direction
        let q = n.norm2() as f64;
        let s = dot_n(&raw, n) / q;
        let p: Vec3<f64> = std::array::from_fn(|k| raw[k] - s * n.0[k] as f64);
        let mag = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let r = n.norm();
        let amp = r.powf(-a) * (-b * r).exp();
        if mag == 0.0 {
            return [c(0.0, 0.0); 3];
        }
        std::array::from_fn(|k| p[k] * (amp / mag))
    });
    let norm = sobolev_norm(&f, 0.0);
    if norm > 0.0 {
        f.scale(target / norm);
    }
    f
}
