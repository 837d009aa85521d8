//! Initialization algebra for sine networks and parameter sampling for all
//! supported schemes.
//!
//! The pre-activation variance of a wide sine MLP with hidden weights
//! `U(-c_w/sqrt(N), c_w/sqrt(N))` and biases `N(0, c_b^2)` converges with
//! depth to a fixed point `sigma_a`, available in closed form through the
//! Lambert function. Demanding a depth-stable Jacobian (`sigma_g = 1`)
//! confines `(c_w, c_b)` to a curve; `sigma_a = 0` and `sigma_a = 1` pick
//! out the two distinguished points on it.

use crate::linalg::{DenseMatrix, Rng};
use crate::mathfn::{lambert_w0, MathError};
use crate::network::{Layer, SirenNet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for clamping radicands that sit exactly on a boundary in real
/// arithmetic (the sigma_a = 0 point) but land slightly negative in floats.
pub const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    #[error(transparent)]
    Lambert(#[from] MathError),
    #[error("sigma_a radicand {radicand:e} is negative beyond tolerance at c_w={c_w}, c_b={c_b}")]
    NegativeRadicand { c_w: f64, c_b: f64, radicand: f64 },
    #[error("c_w = {c_w} is off the sigma_g = 1 curve (radicand {radicand:e} < 0); the valid arc is sqrt(3) <= c_w < sqrt(6)")]
    OffCurve { c_w: f64, radicand: f64 },
    #[error("invalid scheme parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
}

/// Supported initialization schemes. String labels are the stable names
/// used by the CLI and config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitScheme {
    /// `sigma_a = 0`: `(c_w, c_b) = (sqrt(3), 0)`.
    ProposedSigmaA0,
    /// `sigma_a = 1`: `c_w = sqrt(6/(1+e^-2))`, `c_b = c_w e^-1 / sqrt(3)`.
    SigmaA1,
    /// Original scheme: weights `U(-sqrt(6)/sqrt(N), ..)`, uniform biases.
    SitzmannOriginal,
    /// Framework default: weights and biases `U(-1/sqrt(fan_in), ..)`.
    FrameworkDefault,
    /// Any point on the `sigma_g = 1` curve, parameterized by `c_w`.
    CustomOnCurve { c_w: f64 },
    /// Free `(c_w, c_b)` pair with Gaussian biases.
    Custom { c_w: f64, c_b: f64 },
}

impl InitScheme {
    pub fn label(&self) -> &'static str {
        match self {
            InitScheme::ProposedSigmaA0 => "proposed-sigma0",
            InitScheme::SigmaA1 => "sigma1",
            InitScheme::SitzmannOriginal => "sitzmann",
            InitScheme::FrameworkDefault => "framework-default",
            InitScheme::CustomOnCurve { .. } => "custom-on-curve",
            InitScheme::Custom { .. } => "custom",
        }
    }

    /// Parse a stable scheme name; `custom` variants need explicit values.
    pub fn parse(name: &str, c_w: Option<f64>, c_b: Option<f64>) -> Result<Self, InitError> {
        match name {
            "proposed-sigma0" => Ok(InitScheme::ProposedSigmaA0),
            "sigma1" => Ok(InitScheme::SigmaA1),
            "sitzmann" => Ok(InitScheme::SitzmannOriginal),
            "framework-default" => Ok(InitScheme::FrameworkDefault),
            "custom-on-curve" => {
                let c_w = c_w.ok_or_else(|| {
                    InitError::InvalidParameter("custom-on-curve requires --cw".into())
                })?;
                Ok(InitScheme::CustomOnCurve { c_w })
            }
            "custom" => {
                let c_w = c_w
                    .ok_or_else(|| InitError::InvalidParameter("custom requires --cw".into()))?;
                let c_b = c_b
                    .ok_or_else(|| InitError::InvalidParameter("custom requires --cb".into()))?;
                Ok(InitScheme::Custom { c_w, c_b })
            }
            other => Err(InitError::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// The `(c_w, c_b, omega0)` triple plus dimensions; seed of everything.
///
/// For uniform-bias schemes `c_b` holds the effective hidden-layer bias
/// standard deviation, so the fixed-point formulas stay applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitParams {
    pub c_w: f64,
    pub c_b: f64,
    pub omega0: f64,
    pub n0: usize,
    pub width: usize,
    pub depth: usize,
}

/// Outcome of iterating the pre-activation variance map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub sigma_a: f64,
    pub sigma_g: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Marginal distribution of one parameter tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ParamDist {
    Uniform { half_width: f64 },
    Normal { std: f64 },
}

impl ParamDist {
    pub fn std(&self) -> f64 {
        match self {
            ParamDist::Uniform { half_width } => half_width / 3.0f64.sqrt(),
            ParamDist::Normal { std } => *std,
        }
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            ParamDist::Uniform { half_width } => {
                if *half_width == 0.0 {
                    0.0
                } else {
                    rng.uniform(-half_width, *half_width)
                }
            }
            ParamDist::Normal { std } => rng.normal(0.0, *std),
        }
    }
}

/// Per-layer distribution spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDist {
    pub n_out: usize,
    pub n_in: usize,
    pub weight: ParamDist,
    pub bias: ParamDist,
}

/// A scheme resolved against concrete dimensions: ready to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScheme {
    pub scheme: InitScheme,
    pub params: InitParams,
    pub d_out: usize,
    pub layer_dists: Vec<LayerDist>,
}

/// `c_w = sqrt(3)`: the proposed sigma_a = 0 point.
pub fn proposed_c_w() -> f64 {
    3.0f64.sqrt()
}

/// `c_w` of the sigma_a = 1 point: `sqrt(6 / (1 + e^-2))`.
pub fn sigma1_c_w() -> f64 {
    (6.0 / (1.0 + (-2.0f64).exp())).sqrt()
}

/// `c_b` of the sigma_a = 1 point: `c_w e^-1 / sqrt(3)`.
pub fn sigma1_c_b() -> f64 {
    sigma1_c_w() * (-1.0f64).exp() / 3.0f64.sqrt()
}

/// Closed-form pre-activation fixed point:
/// `sigma_a = sqrt(c_b^2 + c_w^2/6 + W0(-(c_w^2/3) e^(-c_w^2/3 - 2 c_b^2))/2)`.
pub fn sigma_a_closed_form(c_w: f64, c_b: f64) -> Result<f64, InitError> {
    assert!(c_w > 0.0, "sigma_a_closed_form: c_w must be positive");
    let u = c_w * c_w / 3.0;
    let arg = -u * (-u - 2.0 * c_b * c_b).exp();
    let w = lambert_w0(arg)?;
    let radicand = c_b * c_b + c_w * c_w / 6.0 + 0.5 * w;
    if radicand < -RADICAND_TOL {
        return Err(InitError::NegativeRadicand { c_w, c_b, radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Iterate the variance map `u <- (c_w^2/6)(1 - e^(-2u)) + c_b^2` from
/// `u = 1` until successive iterates differ by at most `tol`.
///
/// At `c_w = sqrt(3)`, `c_b = 0` the fixed point is only O(1/l) attractive;
/// the report then honestly carries `converged = false` unless the budget
/// is generous.
pub fn sigma_a_fixed_point_iterate(
    c_w: f64,
    c_b: f64,
    tol: f64,
    max_iter: usize,
) -> FixedPointReport {
    assert!(c_w > 0.0 && tol > 0.0, "sigma_a_fixed_point_iterate: need c_w > 0 and tol > 0");
    let q = c_w * c_w / 6.0;
    let cb2 = c_b * c_b;
    let mut u = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        let next = q * (1.0 - (-2.0 * u).exp()) + cb2;
        let delta = (next - u).abs();
        u = next;
        iterations = it;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    let sigma_a = u.max(0.0).sqrt();
    FixedPointReport { sigma_a, sigma_g: sigma_g(c_w, sigma_a), converged, iterations }
}

/// Rescaled Jacobian std `sigma_g = sqrt((c_w^2/6)(1 + e^(-2 sigma_a^2)))`.
pub fn sigma_g(c_w: f64, sigma_a: f64) -> f64 {
    assert!(c_w > 0.0 && sigma_a >= 0.0, "sigma_g: need c_w > 0 and sigma_a >= 0");
    (c_w * c_w / 6.0 * (1.0 + (-2.0 * sigma_a * sigma_a).exp())).sqrt()
}

/// The `sigma_g = 1` curve: `c_b = sqrt(1 - c_w^2/3 - log(6/c_w^2 - 1)/2)`.
/// Real only on the arc `sqrt(3) <= c_w < sqrt(6)`.
pub fn c_b_on_curve(c_w: f64) -> Result<f64, InitError> {
    if !(c_w > 0.0 && c_w < 6.0f64.sqrt()) {
        return Err(InitError::InvalidParameter(format!(
            "c_b_on_curve requires 0 < c_w < sqrt(6), got {c_w}"
        )));
    }
    let radicand = 1.0 - c_w * c_w / 3.0 - 0.5 * (6.0 / (c_w * c_w) - 1.0).ln();
    if radicand < -RADICAND_TOL {
        return Err(InitError::OffCurve { c_w, radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Resolve a scheme against concrete dimensions into per-layer parameter
/// distributions. Every scheme draws its first-layer weights from
/// `U(-omega0/n0, omega0/n0)`.
pub fn resolve_scheme(
    scheme: InitScheme,
    omega0: f64,
    n0: usize,
    width: usize,
    depth: usize,
    d_out: usize,
) -> Result<ResolvedScheme, InitError> {
    if n0 < 1 || width < 1 || d_out < 1 {
        return Err(InitError::InvalidDims(format!(
            "need n0 >= 1, width >= 1, d_out >= 1 (got {n0}, {width}, {d_out})"
        )));
    }
    if depth < 2 {
        return Err(InitError::InvalidDims(format!("depth must be >= 2, got {depth}")));
    }
    if !(omega0 > 0.0) {
        return Err(InitError::InvalidDims(format!("omega0 must be positive, got {omega0}")));
    }

    let n = width as f64;
    let sqrt_n = n.sqrt();
    // Effective (c_w, c_b) for the fixed-point formulas: c_b is the std of
    // hidden-layer biases.
    let (c_w, c_b) = match &scheme {
        InitScheme::ProposedSigmaA0 => (proposed_c_w(), 0.0),
        InitScheme::SigmaA1 => (sigma1_c_w(), sigma1_c_b()),
        InitScheme::SitzmannOriginal => (6.0f64.sqrt(), 1.0 / (3.0 * n).sqrt()),
        InitScheme::FrameworkDefault => (1.0, 1.0 / (3.0 * n).sqrt()),
        InitScheme::CustomOnCurve { c_w } => (*c_w, c_b_on_curve(*c_w)?),
        InitScheme::Custom { c_w, c_b } => {
            if !(*c_w > 0.0) || *c_b < 0.0 {
                return Err(InitError::InvalidParameter(format!(
                    "custom scheme needs c_w > 0 and c_b >= 0 (got {c_w}, {c_b})"
                )));
            }
            (*c_w, *c_b)
        }
    };

    let gaussian_bias = !matches!(
        scheme,
        InitScheme::SitzmannOriginal | InitScheme::FrameworkDefault
    );

    let mut dims = vec![n0];
    dims.extend(std::iter::repeat(width).take(depth - 1));
    dims.push(d_out);

    let layer_dists = dims
        .windows(2)
        .enumerate()
        .map(|(idx, w)| {
            let (n_in, n_out) = (w[0], w[1]);
            let first = idx == 0;
            let weight = if first {
                ParamDist::Uniform { half_width: omega0 / n0 as f64 }
            } else {
                match &scheme {
                    InitScheme::FrameworkDefault => {
                        ParamDist::Uniform { half_width: 1.0 / (n_in as f64).sqrt() }
                    }
                    _ => ParamDist::Uniform { half_width: c_w / sqrt_n },
                }
            };
            let bias = if gaussian_bias {
                ParamDist::Normal { std: c_b }
            } else {
                match &scheme {
                    InitScheme::FrameworkDefault => {
                        ParamDist::Uniform { half_width: 1.0 / (n_in as f64).sqrt() }
                    }
                    // Sitzmann: U(-1/sqrt(N), 1/sqrt(N)) on every layer.
                    _ => ParamDist::Uniform { half_width: 1.0 / sqrt_n },
                }
            };
            LayerDist { n_out, n_in, weight, bias }
        })
        .collect();

    Ok(ResolvedScheme {
        scheme,
        params: InitParams { c_w, c_b, omega0, n0, width, depth },
        d_out,
        layer_dists,
    })
}

/// Draw a fresh network. Deterministic: the same `(scheme, dims, seed)`
/// always yields identical parameters. Weights are sampled row-major, then
/// the bias, layer by layer.
pub fn sample_network(resolved: &ResolvedScheme, seed: u64) -> SirenNet {
    let mut rng = Rng::seed_from_u64(seed);
    let layers = resolved
        .layer_dists
        .iter()
        .map(|ld| {
            let weight =
                DenseMatrix::from_fn(ld.n_out, ld.n_in, |_, _| ld.weight.sample(&mut rng));
            let bias = (0..ld.n_out).map(|_| ld.bias.sample(&mut rng)).collect();
            Layer { weight, bias }
        })
        .collect();
    SirenNet {
        layers,
        omega0: resolved.params.omega0,
        scheme_label: resolved.scheme.label().to_string(),
        seed,
    }
}

/// Per-layer theory predictions for a scheme evaluated on a 1-D input
/// grid: pooled pre-activation variances and pooled `sqrt(N * Var)` of
/// layer-Jacobian entries for the hidden layers `l = 1..=layers`.
#[derive(Debug, Clone)]
pub struct PredictedProfile {
    pub preact_var: Vec<f64>,
    pub jac_scaled_std: Vec<f64>,
}

/// Evolve the variance map per input and pool afterwards. The map applies
/// to each input's own trajectory; pooling first would mix trajectories
/// that converge at very different speeds (inputs near x = 0 start at
/// nearly zero variance).
///
/// The first layer is handled exactly for 1-D inputs (`z_1` is uniform,
/// not Gaussian); deeper layers are Gaussian by the CLT, where
/// `E[sin^2 z] = (1 - e^(-2u))/2` and `E[cos^2 z] = (1 + e^(-2u))/2`.
pub fn predicted_profile(
    resolved: &ResolvedScheme,
    inputs_1d: &[f64],
    layers: usize,
) -> PredictedProfile {
    assert_eq!(resolved.params.n0, 1, "predicted_profile covers 1-D inputs");
    let sinc = |t: f64| if t.abs() < 1e-12 { 1.0 } else { t.sin() / t };
    // E[cos(2 b)] of the first-layer bias distribution.
    let bias1_cos2 = match resolved.layer_dists[0].bias {
        ParamDist::Normal { std } => (-2.0 * std * std).exp(),
        ParamDist::Uniform { half_width } => sinc(2.0 * half_width),
    };
    let b1_var = resolved.layer_dists[0].bias.std().powi(2);
    let w1_half_width = match resolved.layer_dists[0].weight {
        ParamDist::Uniform { half_width } => half_width,
        ParamDist::Normal { std } => std * 3.0f64.sqrt(),
    };
    let n = resolved.params.width as f64;
    let cw2 = resolved.params.c_w.powi(2);
    let cb2 = resolved.params.c_b.powi(2);

    let mut u_sum = vec![0.0; layers];
    let mut jac_sum = vec![0.0; layers];
    for &x in inputs_1d {
        let a = w1_half_width * x.abs();
        // z_1 | x is uniform over +-a plus the bias: exact second moments.
        let e_cos2z = sinc(2.0 * a) * bias1_cos2;
        let mut u = a * a / 3.0 + b1_var;
        let mut e_sin_sq = (1.0 - e_cos2z) / 2.0;
        let mut e_cos_sq = (1.0 + e_cos2z) / 2.0;
        for l in 0..layers {
            u_sum[l] += u;
            let w_var = if l == 0 {
                w1_half_width * w1_half_width / 3.0
            } else {
                cw2 / (3.0 * n)
            };
            jac_sum[l] += n * w_var * e_cos_sq;
            // Advance to the next layer (Gaussian regime).
            u = cw2 / 3.0 * e_sin_sq + cb2;
            e_sin_sq = (1.0 - (-2.0 * u).exp()) / 2.0;
            e_cos_sq = (1.0 + (-2.0 * u).exp()) / 2.0;
        }
    }
    let count = inputs_1d.len() as f64;
    PredictedProfile {
        preact_var: u_sum.iter().map(|s| s / count).collect(),
        jac_scaled_std: jac_sum.iter().map(|s| (s / count).sqrt()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: run the variance map to machine accuracy.
    fn fixed_point_oracle(c_w: f64, c_b: f64) -> f64 {
        let q = c_w * c_w / 6.0;
        let mut u = 1.0f64;
        for _ in 0..2_000_000 {
            let next = q * (1.0 - (-2.0 * u).exp()) + c_b * c_b;
            if (next - u).abs() <= 1e-15 {
                return next.sqrt();
            }
            u = next;
        }
        u.sqrt()
    }

    #[test]
    fn proposed_point_has_sigma_a_zero_and_sigma_g_one() {
        let sa = sigma_a_closed_form(proposed_c_w(), 0.0).unwrap();
        assert!(sa.abs() <= 1e-12, "sigma_a = {sa}");
        let sg = sigma_g(proposed_c_w(), 0.0);
        assert!((sg - 1.0).abs() <= 1e-12, "sigma_g = {sg}");
    }

    #[test]
    fn sigma1_pair_has_sigma_a_one_and_sigma_g_one() {
        let sa = sigma_a_closed_form(sigma1_c_w(), sigma1_c_b()).unwrap();
        assert!((sa - 1.0).abs() <= 1e-12, "sigma_a = {sa}");
        let sg = sigma_g(sigma1_c_w(), 1.0);
        assert!((sg - 1.0).abs() <= 1e-12, "sigma_g = {sg}");
    }

    #[test]
    fn sitzmann_effective_point_matches_iteration_oracle() {
        let sa = sigma_a_closed_form(6.0f64.sqrt(), 0.0).unwrap();
        let oracle = fixed_point_oracle(6.0f64.sqrt(), 0.0);
        assert!((sa - oracle).abs() <= 1e-10, "{sa} vs {oracle}");
        assert!((sa - 0.8926).abs() <= 1e-3);
    }

    #[test]
    fn iteration_report_agrees_with_closed_form_off_the_slow_point() {
        for (c_w, c_b) in [(6.0f64.sqrt(), 0.0), (1.0, 0.5), (2.0, 0.3)] {
            let closed = sigma_a_closed_form(c_w, c_b).unwrap();
            let rep = sigma_a_fixed_point_iterate(c_w, c_b, 1e-12, 200_000);
            assert!(rep.converged);
            assert!((rep.sigma_a - closed).abs() <= 1e-8, "c_w={c_w}: {} vs {closed}", rep.sigma_a);
        }
    }

    #[test]
    fn slow_point_decays_toward_zero_and_reports_honestly() {
        let rep = sigma_a_fixed_point_iterate(proposed_c_w(), 0.0, 1e-12, 1_000_000);
        // O(1/l) decay: far from zero at any practical budget, but small.
        assert!(rep.sigma_a < 0.05, "sigma_a = {}", rep.sigma_a);
        assert!(rep.iterations > 1000);
        let short = sigma_a_fixed_point_iterate(proposed_c_w(), 0.0, 1e-14, 100);
        assert!(!short.converged);
        assert_eq!(short.iterations, 100);
    }

    #[test]
    fn sitzmann_sigma_g_from_closed_form() {
        let sa = sigma_a_closed_form(6.0f64.sqrt(), 0.0).unwrap();
        let sg = sigma_g(6.0f64.sqrt(), sa);
        // sqrt(1.2032...): the "approximately sqrt(1.2)" regime.
        assert!((sg - 1.0968).abs() <= 1e-3, "sigma_g = {sg}");
    }

    #[test]
    fn curve_passes_through_both_published_points() {
        assert_eq!(c_b_on_curve(proposed_c_w()).unwrap(), 0.0);
        let cb = c_b_on_curve(sigma1_c_w()).unwrap();
        assert!((cb - sigma1_c_b()).abs() <= 1e-12, "{cb} vs {}", sigma1_c_b());
        assert!((cb - 0.4883).abs() <= 1e-4);
    }

    #[test]
    fn sigma1_pair_satisfies_fixed_point_identity() {
        // (c_w^2/6)(1 - e^-2) + c_b^2 = 1
        let lhs = sigma1_c_w().powi(2) / 6.0 * (1.0 - (-2.0f64).exp()) + sigma1_c_b().powi(2);
        assert!((lhs - 1.0).abs() <= 1e-12);
        // c_b^2 = c_w^2 e^-2 / 3
        let lhs = sigma1_c_b().powi(2);
        let rhs = sigma1_c_w().powi(2) * (-2.0f64).exp() / 3.0;
        assert!((lhs - rhs).abs() <= 1e-15);
    }

    #[test]
    fn curve_round_trip_gives_unit_sigma_g() {
        // 50 samples across (0.5, sqrt(6) - 0.01); only the arc
        // [sqrt(3), sqrt(6)) admits a real c_b.
        let lo = 0.5;
        let hi = 6.0f64.sqrt() - 0.01;
        let mut on_curve = 0;
        for i in 0..50 {
            let c_w = lo + (hi - lo) * (i as f64 + 0.5) / 50.0;
            match c_b_on_curve(c_w) {
                Ok(c_b) => {
                    on_curve += 1;
                    let sa = sigma_a_closed_form(c_w, c_b).unwrap();
                    let sg = sigma_g(c_w, sa);
                    assert!((sg - 1.0).abs() <= 1e-8, "c_w={c_w}: sigma_g={sg}");
                }
                Err(InitError::OffCurve { .. }) => {
                    assert!(c_w < proposed_c_w() + 1e-9, "c_w={c_w} should be on the arc");
                }
                Err(e) => panic!("unexpected error at c_w={c_w}: {e}"),
            }
        }
        assert!(on_curve >= 15, "expected a substantial on-curve arc, got {on_curve}");
    }

    #[test]
    fn closed_form_matches_iteration_along_the_curve() {
        for i in 0..50 {
            let c_w = 1.76 + (6.0f64.sqrt() - 0.02 - 1.76) * i as f64 / 49.0;
            let c_b = c_b_on_curve(c_w).unwrap();
            let closed = sigma_a_closed_form(c_w, c_b).unwrap();
            let rep = sigma_a_fixed_point_iterate(c_w, c_b, 1e-12, 500_000);
            assert!(rep.converged, "c_w={c_w} did not converge");
            assert!(
                (closed - rep.sigma_a).abs() <= 1e-8,
                "c_w={c_w}: closed={closed} iter={}",
                rep.sigma_a
            );
        }
    }

    #[test]
    fn off_curve_c_w_is_rejected() {
        assert!(matches!(c_b_on_curve(1.0), Err(InitError::OffCurve { .. })));
        assert!(matches!(c_b_on_curve(2.9), Err(InitError::InvalidParameter(_))));
        assert!(matches!(c_b_on_curve(-1.0), Err(InitError::InvalidParameter(_))));
    }

    #[test]
    fn resolve_proposed_gives_expected_half_widths() {
        let r = resolve_scheme(InitScheme::ProposedSigmaA0, 1.0, 1, 256, 10, 1).unwrap();
        // First layer: U(-omega0/n0, omega0/n0).
        assert_eq!(r.layer_dists[0].weight, ParamDist::Uniform { half_width: 1.0 });
        // Hidden: half-width sqrt(3)/16.
        let hw = match r.layer_dists[1].weight {
            ParamDist::Uniform { half_width } => half_width,
            _ => panic!(),
        };
        assert!((hw - 3.0f64.sqrt() / 16.0).abs() <= 1e-15);
        // Bias std 0 everywhere.
        for ld in &r.layer_dists {
            assert_eq!(ld.bias, ParamDist::Normal { std: 0.0 });
        }
        assert_eq!(r.layer_dists.len(), 10);
    }

    #[test]
    fn resolve_sitzmann_gives_expected_half_widths() {
        let r = resolve_scheme(InitScheme::SitzmannOriginal, 1.0, 1, 256, 10, 1).unwrap();
        let hw = match r.layer_dists[1].weight {
            ParamDist::Uniform { half_width } => half_width,
            _ => panic!(),
        };
        assert!((hw - 6.0f64.sqrt() / 16.0).abs() <= 1e-15);
        for ld in &r.layer_dists {
            assert_eq!(ld.bias, ParamDist::Uniform { half_width: 1.0 / 16.0 });
        }
    }

    #[test]
    fn resolve_sigma1_links_cb_to_cw() {
        let r = resolve_scheme(InitScheme::SigmaA1, 1.0, 1, 128, 6, 1).unwrap();
        assert!((r.params.c_b - r.params.c_w * (-1.0f64).exp() / 3.0f64.sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn resolve_framework_default_uses_fan_in() {
        let r = resolve_scheme(InitScheme::FrameworkDefault, 2.0, 3, 64, 5, 1).unwrap();
        // First layer weights still omega0-scaled; bias 1/sqrt(n0).
        assert_eq!(r.layer_dists[0].weight, ParamDist::Uniform { half_width: 2.0 / 3.0 });
        assert_eq!(
            r.layer_dists[0].bias,
            ParamDist::Uniform { half_width: 1.0 / (3.0f64).sqrt() }
        );
        assert_eq!(r.layer_dists[1].weight, ParamDist::Uniform { half_width: 1.0 / 8.0 });
        // N * Var = 1/3 for the hidden layers.
        let sg2 = 64.0 * r.layer_dists[1].weight.std().powi(2);
        assert!((sg2 - 1.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn invalid_dims_are_rejected() {
        assert!(matches!(
            resolve_scheme(InitScheme::ProposedSigmaA0, 1.0, 1, 8, 1, 1),
            Err(InitError::InvalidDims(_))
        ));
        assert!(matches!(
            resolve_scheme(InitScheme::ProposedSigmaA0, 0.0, 1, 8, 4, 1),
            Err(InitError::InvalidDims(_))
        ));
        assert!(matches!(
            resolve_scheme(InitScheme::CustomOnCurve { c_w: 1.0 }, 1.0, 1, 8, 4, 1),
            Err(InitError::OffCurve { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_respects_zero_bias() {
        let r = resolve_scheme(InitScheme::ProposedSigmaA0, 1.0, 2, 32, 5, 1).unwrap();
        let a = sample_network(&r, 7);
        let b = sample_network(&r, 7);
        assert_eq!(a, b);
        for l in &a.layers {
            assert!(l.bias.iter().all(|&v| v == 0.0));
        }
        let c = sample_network(&r, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_weight_variance_matches_analytic_value() {
        for scheme in [
            InitScheme::ProposedSigmaA0,
            InitScheme::SigmaA1,
            InitScheme::SitzmannOriginal,
            InitScheme::FrameworkDefault,
        ] {
            let r = resolve_scheme(scheme, 1.0, 1, 256, 4, 1).unwrap();
            let net = sample_network(&r, 123);
            // Hidden layer 2: a 256 x 256 block.
            let w = &net.layers[1].weight;
            let n = (w.rows() * w.cols()) as f64;
            let mean: f64 = w.data().iter().sum::<f64>() / n;
            let var: f64 = w.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let expected = r.layer_dists[1].weight.std().powi(2);
            assert!(
                (var / expected - 1.0).abs() <= 0.05,
                "{}: var {var} vs {expected}",
                r.scheme.label()
            );
        }
    }

    #[test]
    fn predicted_profile_starts_at_exact_first_layer_variance() {
        let r = resolve_scheme(InitScheme::ProposedSigmaA0, 1.0, 1, 64, 10, 1).unwrap();
        let grid = crate::linalg::linspace(-1.0, 1.0, 101);
        let p = predicted_profile(&r, &grid, 9);
        let want: f64 = grid.iter().map(|x| x * x / 3.0).sum::<f64>() / 101.0;
        assert!((p.preact_var[0] - want).abs() <= 1e-12);
        // Monotone decay toward the sigma_a = 0 fixed point.
        for pair in p.preact_var.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        // Deep-layer Jacobian factor approaches sigma_g = 1 from below.
        let deep = p.jac_scaled_std[8];
        assert!(deep < 1.0 && deep > 0.9, "deep jac factor = {deep}");
    }

    #[test]
    fn scheme_labels_round_trip() {
        for name in ["proposed-sigma0", "sigma1", "sitzmann", "framework-default"] {
            let s = InitScheme::parse(name, None, None).unwrap();
            assert_eq!(s.label(), name);
        }
        assert!(InitScheme::parse("bogus", None, None).is_err());
        assert!(InitScheme::parse("custom", Some(1.0), None).is_err());
        let s = InitScheme::parse("custom", Some(2.0), Some(0.1)).unwrap();
        assert_eq!(s, InitScheme::Custom { c_w: 2.0, c_b: 0.1 });
    }
}
