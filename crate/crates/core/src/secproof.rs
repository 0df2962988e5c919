//! Asymptotic secret-key-rate machinery: mutual information, two-mode
//! covariance, symplectic eigenvalues, the Holevo bound for a heterodyne
//! receiver, and the maximum tolerable excess noise.
//!
//! Receiver efficiency and electronic noise are treated as trusted: they
//! enter the mutual information but not the eavesdropper's state, which is
//! evaluated on the channel covariance alone.

use crate::constellation::{self, Constellation};
use crate::error::{Error, Result};

/// Physicality tolerance on symplectic eigenvalues.
const PHYSICALITY_TOL: f64 = 1e-9;

/// Security-model parameters of the channel and receiver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams {
    /// Channel transmission in [0, 1].
    pub t: f64,
    /// Receiver efficiency in (0, 1].
    pub eta: f64,
    /// Excess channel noise in SNU (inputs are >= 0; estimates may go negative).
    pub eps: f64,
    /// Receiver thermal (electronic) noise in SNU, >= 0.
    pub eps_th: f64,
    /// Mean photon number per symbol, >= 0.
    pub n_mean: f64,
    /// Reconciliation efficiency in (0, 1].
    pub beta: f64,
}

impl ChannelParams {
    /// Validate all ranges. Use [`ChannelParams::new_estimate`] when `eps`
    /// comes from an estimator and may be negative.
    pub fn new(t: f64, eta: f64, eps: f64, eps_th: f64, n_mean: f64, beta: f64) -> Result<Self> {
        if eps < 0.0 {
            return Err(Error::Config(format!("excess noise must be >= 0, got {eps}")));
        }
        Self::new_estimate(t, eta, eps, eps_th, n_mean, beta)
    }

    /// Like [`ChannelParams::new`] but allows a negative `eps` (flagged
    /// estimate from a blinded receiver).
    pub fn new_estimate(
        t: f64,
        eta: f64,
        eps: f64,
        eps_th: f64,
        n_mean: f64,
        beta: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("transmission {t} outside [0, 1]")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Config(format!("efficiency {eta} outside (0, 1]")));
        }
        if !(eps_th >= 0.0) {
            return Err(Error::Config(format!("thermal noise {eps_th} negative")));
        }
        if !(n_mean >= 0.0) {
            return Err(Error::Config(format!("mean photon number {n_mean} negative")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Config(format!("beta {beta} outside (0, 1]")));
        }
        if !eps.is_finite() {
            return Err(Error::Config(format!("eps {eps} not finite")));
        }
        Ok(Self {
            t,
            eta,
            eps,
            eps_th,
            n_mean,
            beta,
        })
    }
}

/// Two-mode covariance in the compact `(a, b, c)` form:
/// `gamma = [[a I2, c sz], [c sz, b I2]]` with `sz = diag(1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    /// Alice variance `V = 2<n> + 1`.
    pub a: f64,
    /// Bob variance `T V + 1 - T + T eps`.
    pub b: f64,
    /// Correlation `sqrt(T) Z`.
    pub c: f64,
}

/// Entropy kernel `g(x) = (x+1) log2(x+1) - x log2 x`, with `g(0) = 0` by
/// continuity.
pub fn entropy_g(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// Mutual information between Bob and Alice (bits per symbol):
/// `log2(1 + 2 T eta <n> / (2 + T eta eps + 2 eps_th))`.
pub fn mutual_information(p: &ChannelParams) -> f64 {
    (1.0 + 2.0 * p.t * p.eta * p.n_mean / (2.0 + p.t * p.eta * p.eps + 2.0 * p.eps_th)).log2()
}

/// Assemble the channel covariance and verify physicality.
pub fn covariance_matrix(n_mean: f64, t: f64, eps: f64, z: f64) -> Result<TwoModeCovariance> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!("transmission {t} outside [0, 1]")));
    }
    let a = 2.0 * n_mean + 1.0;
    let b = t * a + 1.0 - t + t * eps;
    let c = t.sqrt() * z;
    let m = TwoModeCovariance { a, b, c };
    let (nu_plus, nu_minus) = symplectic_eigenvalues(&m)?;
    if nu_minus < 1.0 - PHYSICALITY_TOL || nu_plus < 1.0 - PHYSICALITY_TOL {
        return Err(Error::UnphysicalState(format!(
            "symplectic eigenvalues ({nu_plus}, {nu_minus}) below 1"
        )));
    }
    Ok(m)
}

/// Closed-form symplectic eigenvalues
/// `nu_pm = sqrt((Delta pm sqrt(Delta^2 - 4 D^2)) / 2)` with
/// `Delta = a^2 + b^2 - 2 c^2` and `D = a b - c^2`.
pub fn symplectic_eigenvalues(m: &TwoModeCovariance) -> Result<(f64, f64)> {
    let delta = m.a * m.a + m.b * m.b - 2.0 * m.c * m.c;
    let det = m.a * m.b - m.c * m.c;
    let disc = delta * delta - 4.0 * det * det;
    if disc < -PHYSICALITY_TOL {
        return Err(Error::UnphysicalState(format!(
            "negative discriminant {disc}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let nu_plus = ((delta + root) / 2.0).max(0.0).sqrt();
    let nu_minus = ((delta - root) / 2.0).max(0.0).sqrt();
    Ok((nu_plus, nu_minus))
}

/// Holevo bound on Eve's information about Bob's heterodyne outcome:
/// `chi = g((nu+ - 1)/2) + g((nu- - 1)/2) - g((nu_cond - 1)/2)` where
/// `nu_cond` comes from Alice's covariance conditioned on Bob's heterodyne
/// measurement, `gamma_A|B = a - c^2 / (b + 1)`.
pub fn holevo_bound(m: &TwoModeCovariance) -> Result<f64> {
    let (nu_plus, nu_minus) = symplectic_eigenvalues(m)?;
    if nu_minus < 1.0 - PHYSICALITY_TOL {
        return Err(Error::UnphysicalState(format!("nu- = {nu_minus} below 1")));
    }
    let nu_cond = m.a - m.c * m.c / (m.b + 1.0);
    Ok(entropy_g((nu_plus - 1.0) / 2.0) + entropy_g((nu_minus - 1.0) / 2.0)
        - entropy_g((nu_cond - 1.0) / 2.0))
}

/// Precomputed constellation correlation terms, independent of excess noise.
///
/// `Z(eps) = z0 - sqrt(2 eps w)`.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationProfile {
    pub z0: f64,
    pub w: f64,
    pub n_mean: f64,
}

impl CorrelationProfile {
    /// Evaluate the terms for a constellation at its adaptive Fock cutoff.
    pub fn for_constellation(c: &Constellation) -> Result<Self> {
        let dim = constellation::fock_cutoff(c, constellation::TAIL_TOL);
        let (z0, w) = constellation::correlation_terms(c, dim)?;
        Ok(Self {
            z0,
            w,
            n_mean: constellation::mean_photon_number(c),
        })
    }

    pub fn z_at(&self, eps: f64) -> f64 {
        self.z0 - (2.0 * eps.max(0.0) * self.w).sqrt()
    }
}

/// Asymptotic secret key rate `K = beta I_BA - chi_BE` (bits per symbol,
/// may be negative). `p.n_mean` should match the constellation behind
/// `profile`.
pub fn key_rate_from_profile(p: &ChannelParams, profile: &CorrelationProfile) -> Result<f64> {
    let i_ba = mutual_information(p);
    let m = covariance_matrix(p.n_mean, p.t, p.eps, profile.z_at(p.eps))?;
    Ok(p.beta * i_ba - holevo_bound(&m)?)
}

/// Asymptotic secret key rate for an explicit constellation.
pub fn key_rate(p: &ChannelParams, c: &Constellation) -> Result<f64> {
    key_rate_from_profile(p, &CorrelationProfile::for_constellation(c)?)
}

/// Maximum tolerable excess noise: the root of `key_rate(eps) = 0`, found
/// by bisection on `[0, 2]` SNU to 1e-6.
pub fn max_tolerable_noise(p: &ChannelParams, c: &Constellation) -> Result<f64> {
    let profile = CorrelationProfile::for_constellation(c)?;
    max_tolerable_noise_from_profile(p, &profile)
}

/// Bisection on a precomputed correlation profile.
pub fn max_tolerable_noise_from_profile(
    p: &ChannelParams,
    profile: &CorrelationProfile,
) -> Result<f64> {
    let at = |eps: f64| -> Result<f64> {
        let params = ChannelParams { eps, ..*p };
        key_rate_from_profile(&params, profile)
    };
    let k0 = at(0.0)?;
    if k0 <= 0.0 {
        return Err(Error::NoPositiveRate(k0));
    }
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    // treat an unphysical covariance deep in the noise as "no key"
    let sign = |eps: f64| -> Result<bool> {
        match at(eps) {
            Ok(k) => Ok(k > 0.0),
            Err(Error::UnphysicalState(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if sign(hi)? {
        return Ok(hi);
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if sign(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::make_ps_qam_for_mean_n;

    /// Brute-force oracle: modulus spectrum of `i Omega gamma` on the full
    /// 4x4 matrix.
    fn symplectic_oracle(m: &TwoModeCovariance) -> (f64, f64) {
        let g = nalgebra::Matrix4::new(
            m.a, 0.0, m.c, 0.0, //
            0.0, m.a, 0.0, -m.c, //
            m.c, 0.0, m.b, 0.0, //
            0.0, -m.c, 0.0, m.b,
        );
        let omega = nalgebra::Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0,
        );
        let og = omega * g;
        let eig = og.complex_eigenvalues();
        let mut mods: Vec<f64> = eig.iter().map(|l| l.norm()).collect();
        mods.sort_by(|x, y| y.total_cmp(x));
        (mods[0], mods[2])
    }

    #[test]
    fn g_at_zero_and_monotone() {
        assert_eq!(entropy_g(0.0), 0.0);
        assert_eq!(entropy_g(-1.0), 0.0);
        let mut prev = 0.0;
        for i in 1..=200 {
            let x = i as f64 * 0.05;
            let gx = entropy_g(x);
            assert!(gx > prev);
            prev = gx;
        }
    }

    #[test]
    fn mutual_information_examples() {
        let p = ChannelParams::new(1.0, 1.0, 0.0, 0.0, 1.0, 0.95).unwrap();
        assert!((mutual_information(&p) - 1.0).abs() < 1e-15);
        let p0 = ChannelParams::new(0.7, 0.9, 0.2, 0.1, 0.0, 0.95).unwrap();
        assert_eq!(mutual_information(&p0), 0.0);
        // frozen arithmetic oracle
        let p1 = ChannelParams::new(0.5, 0.9, 0.05, 0.1, 0.5, 0.95).unwrap();
        assert!((mutual_information(&p1) - 0.2660065288907206).abs() < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let m = covariance_matrix(0.0, 0.3, 0.0, 0.0).unwrap();
        assert!((m.a - 1.0).abs() < 1e-15 && (m.b - 1.0).abs() < 1e-15 && m.c == 0.0);
        let m = covariance_matrix(0.5, 0.0, 0.7, 1.9).unwrap();
        assert!((m.b - 1.0).abs() < 1e-15 && m.c == 0.0);
        // direct substitution, frozen
        let m = covariance_matrix(0.5, 0.5, 0.1, 1.7).unwrap();
        assert!((m.a - 2.0).abs() < 1e-15);
        assert!((m.b - 1.55).abs() < 1e-15);
        assert!((m.c - 1.2020815280171309).abs() < 1e-12);
    }

    #[test]
    fn unphysical_covariance_rejected() {
        assert!(matches!(
            covariance_matrix(0.5, 1.0, 0.0, 5.0),
            Err(Error::UnphysicalState(_))
        ));
    }

    #[test]
    fn symplectic_trivial_cases() {
        let id = TwoModeCovariance { a: 1.0, b: 1.0, c: 0.0 };
        let (p, m) = symplectic_eigenvalues(&id).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && (m - 1.0).abs() < 1e-12);
        let prod = TwoModeCovariance { a: 3.0, b: 3.0, c: 0.0 };
        let (p, m) = symplectic_eigenvalues(&prod).unwrap();
        assert!((p - 3.0).abs() < 1e-12 && (m - 3.0).abs() < 1e-12);
        let m2 = TwoModeCovariance { a: 2.0, b: 1.55, c: 1.2020815280171309 };
        let (p, q) = symplectic_eigenvalues(&m2).unwrap();
        assert!((p - 1.5309957886608974).abs() < 1e-12);
        assert!((q - 1.0809957886608978).abs() < 1e-12);
    }

    #[test]
    fn symplectic_closed_form_matches_4x4_spectrum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xc0ffee);
        let mut checked = 0;
        while checked < 1000 {
            let n_mean = rng.gen_range(0.01..4.0);
            let t = rng.gen_range(0.01..1.0);
            let eps = rng.gen_range(0.0..0.5);
            let z = crate::constellation::gaussian_z_limit(n_mean) * rng.gen_range(0.0..1.0);
            let m = match covariance_matrix(n_mean, t, eps, z) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let (p, q) = symplectic_eigenvalues(&m).unwrap();
            let (po, qo) = symplectic_oracle(&m);
            assert!((p - po).abs() < 1e-9, "nu+ {p} vs oracle {po}");
            assert!((q - qo).abs() < 1e-9, "nu- {q} vs oracle {qo}");
            assert!(q >= 1.0 - 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn holevo_vacuum_and_pure_state() {
        let vac = TwoModeCovariance { a: 1.0, b: 1.0, c: 0.0 };
        assert!(holevo_bound(&vac).unwrap().abs() < 1e-12);
        // T=1, eps=0, Gaussian Z: joint state stays pure, chi -> 0
        let n_mean = 0.5;
        let z = crate::constellation::gaussian_z_limit(n_mean);
        let m = covariance_matrix(n_mean, 1.0, 0.0, z).unwrap();
        assert!(holevo_bound(&m).unwrap().abs() < 1e-9);
    }

    #[test]
    fn holevo_frozen_reference_value() {
        let z = crate::constellation::gaussian_z_limit(0.5);
        let m = covariance_matrix(0.5, 0.5, 0.1, z).unwrap();
        let chi = holevo_bound(&m).unwrap();
        assert!((chi - 0.3136589296117558).abs() < 1e-6, "chi = {chi}");
    }

    #[test]
    fn key_rate_limits() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        let p = ChannelParams::new(0.5, 0.9, 5.0, 0.01, 2.0, 0.99).unwrap();
        match key_rate(&p, &c) {
            Ok(k) => assert!(k < 0.0),
            Err(Error::UnphysicalState(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
        let p = ChannelParams::new(1.0, 1.0, 0.0, 0.0, 2.0, 0.99).unwrap();
        let k = key_rate(&p, &c).unwrap();
        let i = mutual_information(&p);
        assert!((k - 0.99 * i).abs() < 1e-3, "k = {k}, beta I = {}", 0.99 * i);
    }

    #[test]
    fn key_rate_frozen_fixture_values() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        for (eps, expected) in [
            (0.0, 0.28464360024903645),
            (0.05, 0.13447975091630138),
            (0.2, -0.12102070596036174),
        ] {
            let p = ChannelParams::new_estimate(0.5, 0.9, eps, 0.01, 2.0, 0.99).unwrap();
            let k = key_rate(&p, &c).unwrap();
            assert!((k - expected).abs() < 1e-7, "eps={eps}: k={k} want {expected}");
        }
    }

    #[test]
    fn key_rate_monotone_in_eps() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        let profile = CorrelationProfile::for_constellation(&c).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let eps = 0.2 * i as f64 / 50.0;
            let p = ChannelParams::new(0.5, 0.9, eps, 0.01, 2.0, 0.99).unwrap();
            let k = key_rate_from_profile(&p, &profile).unwrap();
            assert!(k < prev, "rate not decreasing at eps={eps}");
            prev = k;
        }
    }

    #[test]
    fn key_rate_monotone_in_t() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        let profile = CorrelationProfile::for_constellation(&c).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=50 {
            let t = 0.2 + 0.8 * i as f64 / 50.0;
            let p = ChannelParams::new(t, 0.9, 0.05, 0.01, 2.0, 0.99).unwrap();
            let k = key_rate_from_profile(&p, &profile).unwrap();
            assert!(k > prev, "rate not increasing at T={t}");
            prev = k;
        }
    }

    #[test]
    fn max_tolerable_noise_fixture_reproduces_reference() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        let p = ChannelParams::new(0.5, 0.9, 0.0, 0.01, 2.0, 0.99).unwrap();
        let e = max_tolerable_noise(&p, &c).unwrap();
        assert!((e - 0.1207771).abs() < 1e-4, "eps* = {e}");
    }

    #[test]
    fn max_tolerable_noise_grows_with_transmission() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        let p_half = ChannelParams::new(0.5, 0.9, 0.0, 0.01, 2.0, 0.99).unwrap();
        let p_unit = ChannelParams::new(1.0, 1.0, 0.0, 0.01, 2.0, 0.99).unwrap();
        let e_half = max_tolerable_noise(&p_half, &c).unwrap();
        let e_unit = max_tolerable_noise(&p_unit, &c).unwrap();
        assert!(e_unit > e_half);
    }

    #[test]
    fn no_positive_rate_error() {
        let c = make_ps_qam_for_mean_n(64, 2.0, 0.40).unwrap();
        let p = ChannelParams::new(0.5, 0.9, 0.0, 50.0, 2.0, 0.99).unwrap();
        assert!(matches!(
            max_tolerable_noise(&p, &c),
            Err(Error::NoPositiveRate(_))
        ));
    }
}
