//! Postselected key rate, photon-number scan, distance sweeps and
//! numerical-convergence certification.
//!
//! The rate is `∫ P(m|α) max(I_AB - χ, 0) dm`. Both `I_AB` and `χ` depend on
//! `|m|` only, so the integral is folded onto `m > 0` with weight
//! `P(m|α) + P(-m|α)` and evaluated by composite Gauss–Legendre panels.
//! Panels containing a postselection boundary (a sign change of
//! `I_AB - χ`) are split at the root so every piece is smooth.

use crate::channel::{
    bit_error_rate, channel_transmission, mutual_information, quadrature_pdf, ChannelParams, LinkModel, ProtocolSignal,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fock::{detector_noise_nodes, trace_closed_form, YQuadrature};
use crate::information::{build_ensemble, holevo_details, HolevoDetails, Scheme};
use crate::quadrature::{gauss_legendre, gauss_legendre_on, Rule};

/// Gauss–Legendre order of each integration panel.
pub const PANEL_ORDER: usize = 8;
/// Geometric refinements of the panel touching `m = 0`.
pub const ORIGIN_GRADING_LEVELS: usize = 6;
/// Tolerated relative gap between the captured and closed-form trace of a
/// conditional state.
pub const CAPTURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    /// Photon-number cutoff per mode.
    pub n_trunc: usize,
    /// Detector-noise quadrature nodes.
    pub y_nodes: usize,
    /// Number of outcome nodes; a multiple of [`PANEL_ORDER`].
    pub m_grid: usize,
    /// Outcome cutoff; `None` uses `√η α + 6 √((1 + ξ)/4)`.
    pub m_max: Option<f64>,
    /// Derive `ω11`, `ω10` from `ω00`, `ω01` by parity conjugation.
    pub parity_shortcut: bool,
    pub execution: Execution,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_trunc: 12,
            y_nodes: 21,
            m_grid: 64,
            m_max: None,
            parity_shortcut: true,
            execution: Execution::Parallel,
        }
    }
}

impl Numerics {
    /// The refined settings used by [`convergence_check`].
    pub fn refined(&self) -> Self {
        Self {
            n_trunc: self.n_trunc + 4,
            y_nodes: self.y_nodes + 10,
            m_grid: 2 * self.m_grid,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub link: LinkModel,
    pub signal: ProtocolSignal,
    pub scheme: Scheme,
    pub numerics: Numerics,
    /// Multiply the rate by the basis-sifting factor 1/2.
    pub sifting: bool,
}

impl ProtocolConfig {
    pub fn new(link: LinkModel, signal: ProtocolSignal, scheme: Scheme) -> Self {
        Self {
            link,
            signal,
            scheme,
            numerics: Numerics::default(),
            sifting: false,
        }
    }

    pub fn with_numerics(mut self, numerics: Numerics) -> Self {
        self.numerics = numerics;
        self
    }

    pub fn default_m_max(&self) -> f64 {
        let total = self.link.total();
        total.eta.sqrt() * self.signal.alpha + 6.0 * total.variance().sqrt()
    }

    pub fn m_max(&self) -> f64 {
        self.numerics.m_max.unwrap_or_else(|| self.default_m_max())
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        if n.m_grid < PANEL_ORDER || !n.m_grid.is_multiple_of(PANEL_ORDER) {
            return Err(Error::InvalidParameter {
                name: "m_grid",
                value: n.m_grid as f64,
                reason: "must be a positive multiple of 8",
            });
        }
        if n.n_trunc < 1 {
            return Err(Error::InvalidParameter {
                name: "n_trunc",
                value: n.n_trunc as f64,
                reason: "must be >= 1",
            });
        }
        let centre = self.link.total().eta.sqrt() * self.signal.alpha;
        let m_max = self.m_max();
        if !(m_max > centre) {
            return Err(Error::InvalidParameter {
                name: "m_max",
                value: m_max,
                reason: "must exceed the signal mean sqrt(eta) alpha",
            });
        }
        Ok(())
    }
}

/// Spectral and numerical health of the states behind one key-rate value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub slices: usize,
    pub min_eigenvalue: f64,
    /// Largest `|tr ρ - 1|` of the normalized mixtures.
    pub trace_error: f64,
    /// Largest relative gap between captured and closed-form traces.
    pub capture_error: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    /// Whether `χ` was non-increasing along the outcome nodes.
    pub chi_monotone: bool,
    pub boundaries: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            slices: 0,
            min_eigenvalue: f64::INFINITY,
            trace_error: 0.0,
            capture_error: 0.0,
            chi_min: f64::INFINITY,
            chi_max: f64::NEG_INFINITY,
            chi_monotone: true,
            boundaries: 0,
        }
    }
}

impl Diagnostics {
    fn record(&mut self, s: &SliceValue) {
        self.slices += 1;
        self.min_eigenvalue = self.min_eigenvalue.min(s.holevo.min_eigenvalue);
        self.trace_error = self.trace_error.max(s.holevo.trace_error);
        self.capture_error = self.capture_error.max(s.capture_error);
        self.chi_min = self.chi_min.min(s.chi());
        self.chi_max = self.chi_max.max(s.chi());
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        self.slices += other.slices;
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.trace_error = self.trace_error.max(other.trace_error);
        self.capture_error = self.capture_error.max(other.capture_error);
        self.chi_min = self.chi_min.min(other.chi_min);
        self.chi_max = self.chi_max.max(other.chi_max);
        self.chi_monotone &= other.chi_monotone;
        self.boundaries += other.boundaries;
    }

    /// Numerical checks every reported point has to pass.
    pub fn healthy(&self) -> bool {
        self.capture_error <= CAPTURE_TOLERANCE
            && self.trace_error <= 1e-8
            && self.min_eigenvalue >= -1e-8
            && (self.slices == 0 || (self.chi_min >= -1e-9 && self.chi_max <= 1.0 + 1e-9))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    /// Bits per pulse of the postselected basis.
    pub rate: f64,
    pub config: ProtocolConfig,
    /// Probability mass of the kept outcomes.
    pub postselection_fraction: f64,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

/// Everything computed at one outcome magnitude.
#[derive(Debug, Clone, Copy)]
pub struct SliceValue {
    pub m_abs: f64,
    /// `P(m|α) + P(-m|α)`
    pub weight: f64,
    pub i_ab: f64,
    pub holevo: HolevoDetails,
    pub capture_error: f64,
}

impl SliceValue {
    pub fn chi(&self) -> f64 {
        self.holevo.chi
    }

    pub fn margin(&self) -> f64 {
        self.i_ab - self.holevo.chi
    }

    pub fn integrand(&self) -> f64 {
        self.weight * self.margin().max(0.0)
    }
}

/// Evaluates slices of one configuration, reusing the detector-noise rule.
struct SliceEvaluator<'a> {
    cfg: &'a ProtocolConfig,
    total: ChannelParams,
    nodes: YQuadrature,
}

impl<'a> SliceEvaluator<'a> {
    fn new(cfg: &'a ProtocolConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            total: cfg.link.total(),
            nodes: detector_noise_nodes(&cfg.link, cfg.numerics.y_nodes)?,
        })
    }

    fn eval(&self, m_abs: f64) -> Result<SliceValue> {
        let cfg = self.cfg;
        let alpha = cfg.signal.alpha;
        let link = &cfg.link;
        let ens = build_ensemble(
            m_abs,
            &cfg.signal,
            link,
            cfg.numerics.n_trunc,
            &self.nodes,
            cfg.numerics.parity_shortcut,
        )?;
        let holevo = holevo_details(&ens, cfg.scheme)?;
        let eps = bit_error_rate(m_abs, alpha, &self.total);
        let i_ab = mutual_information(eps, cfg.signal.f)?;
        let capture = |trace: f64, m: f64| {
            let exact = trace_closed_form(alpha, m, link);
            (trace - exact).abs() / exact
        };
        let capture_error = capture(ens.traces[0], m_abs).max(capture(ens.traces[1], -m_abs));
        Ok(SliceValue {
            m_abs,
            weight: quadrature_pdf(m_abs, alpha, &self.total) + quadrature_pdf(-m_abs, alpha, &self.total),
            i_ab,
            holevo,
            capture_error,
        })
    }
}

/// Folded integrand `[P(m|α) + P(-m|α)] max(I_AB - χ, 0)` at `m > 0`.
pub fn key_rate_integrand(m: f64, cfg: &ProtocolConfig) -> Result<f64> {
    Ok(slice_value(m, cfg)?.integrand())
}

pub fn slice_value(m: f64, cfg: &ProtocolConfig) -> Result<SliceValue> {
    SliceEvaluator::new(cfg)?.eval(m)
}

/// Brent's method on a bracket with `f(a) f(b) <= 0`.
fn brent_root(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fb: f64) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..100 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-13;
        let half = 0.5 * (c - b);
        if half.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * half * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b)?;
    }
    Ok(b)
}

pub fn secret_key_rate(cfg: &ProtocolConfig) -> Result<KeyRatePoint> {
    let evaluator = SliceEvaluator::new(cfg)?;
    let exec = cfg.numerics.execution;
    let m_max = cfg.m_max();
    let panels = cfg.numerics.m_grid / PANEL_ORDER;
    let width = m_max / panels as f64;
    let base = gauss_legendre(PANEL_ORDER);
    let panel_rules: Vec<Rule> = (0..panels)
        .map(|p| gauss_legendre_on(&base, p as f64 * width, (p + 1) as f64 * width))
        .collect();
    let nodes: Vec<f64> = panel_rules.iter().flat_map(|r| r.nodes.iter().copied()).collect();
    let slices = exec::map(exec, &nodes, |&m| evaluator.eval(m))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = Diagnostics::default();
    for s in &slices {
        diagnostics.record(s);
    }
    diagnostics.chi_monotone = slices.windows(2).all(|w| w[1].chi() <= w[0].chi() + 1e-10);

    // postselection boundaries between adjacent nodes
    let mut roots = Vec::new();
    for (lo, hi) in slices.iter().zip(slices.iter().skip(1)) {
        let (g_lo, g_hi) = (lo.margin(), hi.margin());
        if (g_lo > 0.0) != (g_hi > 0.0) {
            let root = brent_root(
                |m| evaluator.eval(m).map(|s| s.margin()),
                lo.m_abs,
                hi.m_abs,
                g_lo,
                g_hi,
            )?;
            roots.push(root);
        }
    }
    diagnostics.boundaries = roots.len();

    // When outcomes near m = 0 are kept the integrand behaves like
    // m^2 log m there, so the first piece is graded geometrically.
    let graded_origin = slices[0].margin() > 0.0;

    // pieces of panels split at a boundary, re-integrated with fresh nodes
    let mut split_pieces = Vec::new();
    let mut split_panel = vec![false; panels];
    for (p, split) in split_panel.iter_mut().enumerate() {
        let (a, b) = (p as f64 * width, (p + 1) as f64 * width);
        let inside: Vec<f64> = roots.iter().copied().filter(|r| *r >= a && *r < b).collect();
        let graded = p == 0 && graded_origin;
        if inside.is_empty() && !graded {
            continue;
        }
        *split = true;
        let mut cuts = vec![a];
        cuts.extend(inside);
        cuts.push(b);
        for w in cuts.windows(2) {
            if !(w[1] > w[0]) {
                continue;
            }
            if graded && w[0] == 0.0 {
                let mut hi = w[1];
                for _ in 0..ORIGIN_GRADING_LEVELS {
                    split_pieces.push(gauss_legendre_on(&base, 0.5 * hi, hi));
                    hi *= 0.5;
                }
                split_pieces.push(gauss_legendre_on(&base, 0.0, hi));
            } else {
                split_pieces.push(gauss_legendre_on(&base, w[0], w[1]));
            }
        }
    }
    let piece_nodes: Vec<f64> = split_pieces.iter().flat_map(|r| r.nodes.iter().copied()).collect();
    let piece_slices = exec::map(exec, &piece_nodes, |&m| evaluator.eval(m))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    for s in &piece_slices {
        diagnostics.record(s);
    }

    let mut rate = 0.0;
    let mut kept = 0.0;
    for (p, rule) in panel_rules.iter().enumerate() {
        if split_panel[p] {
            continue;
        }
        for (w, s) in rule.weights.iter().zip(&slices[p * PANEL_ORDER..(p + 1) * PANEL_ORDER]) {
            rate += w * s.integrand();
            if s.margin() > 0.0 {
                kept += w * s.weight;
            }
        }
    }
    let piece_weights = split_pieces.iter().flat_map(|r| r.weights.iter().copied());
    for (w, s) in piece_weights.zip(&piece_slices) {
        rate += w * s.integrand();
        if s.margin() > 0.0 {
            kept += w * s.weight;
        }
    }
    if cfg.sifting {
        rate *= 0.5;
    }
    if !diagnostics.chi_monotone {
        log::debug!("χ not monotone in |m| for {:?}", cfg.link);
    }
    Ok(KeyRatePoint {
        rate,
        config: *cfg,
        postselection_fraction: kept.clamp(0.0, 1.0),
        converged: diagnostics.healthy(),
        diagnostics,
    })
}

/// Photon numbers `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for PhotonGrid {
    fn default() -> Self {
        Self {
            start: 0.05,
            stop: 2.0,
            step: 0.05,
        }
    }
}

impl PhotonGrid {
    pub fn single(alpha_sq: f64) -> Self {
        Self {
            start: alpha_sq,
            stop: alpha_sq,
            step: 1.0,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if !(self.step > 0.0) || !(self.start > 0.0) || self.stop < self.start {
            return Vec::new();
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                (v * 1e12).round() / 1e12
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonOptimum {
    pub alpha_sq: f64,
    pub point: KeyRatePoint,
    /// No scanned photon number gave a positive rate.
    pub all_zero: bool,
    /// `(α², rate)` for every scanned value.
    pub scan: Vec<(f64, f64)>,
}

/// Exhaustive scan over `grid`; ties go to the smaller photon number.
pub fn optimize_photon_number(cfg: &ProtocolConfig, grid: &PhotonGrid) -> Result<PhotonOptimum> {
    let values = grid.values();
    if values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let points = exec::map(cfg.numerics.execution, &values, |&a2| {
        let signal = ProtocolSignal::from_photon_number(a2, cfg.signal.f)?;
        secret_key_rate(&ProtocolConfig { signal, ..*cfg })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.rate > points[best].rate {
            best = i;
        }
    }
    Ok(PhotonOptimum {
        alpha_sq: values[best],
        point: points[best],
        all_zero: points.iter().all(|p| p.rate <= 0.0),
        scan: values.iter().copied().zip(points.iter().map(|p| p.rate)).collect(),
    })
}

/// Shared settings of a distance sweep at fixed totals `(η2, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTemplate {
    /// Total excess noise seen by Bob.
    pub xi: f64,
    pub eta2: f64,
    pub loss_db_per_km: f64,
    pub signal: ProtocolSignal,
    pub scheme: Scheme,
    pub numerics: Numerics,
    pub sifting: bool,
}

impl SweepTemplate {
    /// Link at distance `d_km` with the detector carrying `fraction` of the
    /// total excess noise.
    pub fn link(&self, d_km: f64, fraction: f64) -> Result<LinkModel> {
        let eta1 = channel_transmission(d_km, self.loss_db_per_km)?;
        let xi2 = fraction * self.xi;
        let xi1 = (self.xi - xi2) / self.eta2;
        if xi1 < 0.0 {
            return Err(Error::InfeasibleSplit { xi1 });
        }
        LinkModel::new(ChannelParams::new(eta1, xi1)?, ChannelParams::new(self.eta2, xi2)?)
    }

    pub fn config(&self, d_km: f64, fraction: f64) -> Result<ProtocolConfig> {
        Ok(ProtocolConfig {
            link: self.link(d_km, fraction)?,
            signal: self.signal,
            scheme: self.scheme,
            numerics: self.numerics,
            sifting: self.sifting,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha_sq: f64,
    pub point: KeyRatePoint,
    pub all_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub distance_km: f64,
    pub xi2_fraction: f64,
    pub outcome: Result<SweepPoint>,
}

/// Rates on the grid `distances × fractions`, in that nesting order. With
/// `optimize` set, each row carries the best photon number from that grid.
pub fn sweep_distance(
    template: &SweepTemplate,
    distances: &[f64],
    fractions: &[f64],
    optimize: Option<&PhotonGrid>,
) -> Vec<SweepRow> {
    let grid: Vec<(f64, f64)> = distances
        .iter()
        .flat_map(|&d| fractions.iter().map(move |&f| (d, f)))
        .collect();
    exec::map(template.numerics.execution, &grid, |&(d, frac)| {
        let outcome = template.config(d, frac).and_then(|cfg| match optimize {
            Some(g) => optimize_photon_number(&cfg, g).map(|o| SweepPoint {
                alpha_sq: o.alpha_sq,
                point: o.point,
                all_zero: o.all_zero,
            }),
            None => secret_key_rate(&cfg).map(|p| SweepPoint {
                alpha_sq: cfg.signal.photon_number(),
                point: p,
                all_zero: p.rate <= 0.0,
            }),
        });
        SweepRow {
            distance_km: d,
            xi2_fraction: frac,
            outcome,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub base: KeyRatePoint,
    pub refined: KeyRatePoint,
    pub relative_change: f64,
    pub absolute_change: f64,
    pub converged: bool,
}

/// Recomputes the rate at `(N + 4, k + 10, 2 m_grid)` and compares.
pub fn convergence_check(cfg: &ProtocolConfig) -> Result<ConvergenceReport> {
    let base = secret_key_rate(cfg)?;
    let refined_cfg = ProtocolConfig {
        numerics: cfg.numerics.refined(),
        ..*cfg
    };
    let refined = secret_key_rate(&refined_cfg)?;
    let absolute_change = (refined.rate - base.rate).abs();
    let relative_change = if base.rate != 0.0 {
        absolute_change / base.rate.abs()
    } else if refined.rate == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let agrees = if base.rate.abs() < 1e-6 {
        absolute_change < 1e-9
    } else {
        relative_change < 1e-3
    };
    Ok(ConvergenceReport {
        base,
        refined,
        relative_change,
        absolute_change,
        converged: agrees && base.converged && refined.converged,
    })
}
