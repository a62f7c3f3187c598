//! Smoothed country trajectories in the (openness, unevenness) plane.

use crate::error::Result;
use crate::panel::{country_slope, InferenceSettings, Panel};
use crate::scalar::Scalar;

/// Smoothing and classification settings.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingConfig {
    /// Bin width in years. The last bin absorbs the remainder when the
    /// span is not divisible by the window (17 years at window 3 gives
    /// five 3-year bins plus one 2-year bin).
    pub window: usize,
    /// Significance threshold for the slope coloring.
    pub alpha: f64,
    /// Minimum movement along an axis to count a segment as rising or
    /// falling, as a fraction of that axis' range over the bins. Relative
    /// thresholds keep the classification invariant under uniform scaling.
    pub rise_threshold_frac: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            window: 3,
            alpha: 0.05,
            rise_threshold_frac: 0.01,
        }
    }
}

/// Linear-trend coloring of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeClass {
    NegativeSlope,
    PositiveSlope,
    Insignificant,
}

impl SlopeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SlopeClass::NegativeSlope => "negative-slope",
            SlopeClass::PositiveSlope => "positive-slope",
            SlopeClass::Insignificant => "insignificant",
        }
    }
}

/// Qualitative shape of the smoothed path.
///
/// * `TurningPoint`: unevenness rises to an interior peak and then falls
///   while openness keeps rising.
/// * `Retrograde`: after a joint rise, unevenness falls only because
///   openness falls as well over the final segments.
/// * `Monotone`: no direction change beyond threshold on either axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeTag {
    TurningPoint,
    Retrograde,
    Monotone,
    Other,
}

impl ShapeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShapeTag::TurningPoint => "turning-point",
            ShapeTag::Retrograde => "retrograde",
            ShapeTag::Monotone => "monotone",
            ShapeTag::Other => "other",
        }
    }
}

/// One smoothing bin: mean openness and unevenness over its years.
#[derive(Debug, Clone)]
pub struct TrajectoryBin<S> {
    pub first_year: i32,
    pub last_year: i32,
    pub openness: S,
    pub unevenness: S,
}

impl<S> TrajectoryBin<S> {
    pub fn label(&self) -> String {
        format!("{}-{}", self.first_year, self.last_year)
    }

    pub fn n_years(&self) -> usize {
        (self.last_year - self.first_year + 1) as usize
    }
}

/// Smoothed path of one country with its slope and shape classification.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub country: String,
    pub bins: Vec<TrajectoryBin<S>>,
    pub slope_b: S,
    pub slope_p: S,
    pub slope_class: SlopeClass,
    pub shape: ShapeTag,
}

/// Bin a country's annual series and classify the smoothed path.
///
/// Bins are non-overlapping `window`-year means covering the panel range in
/// temporal order; the slope coloring comes from the annual bivariate model
/// at threshold `cfg.alpha`.
pub fn smooth_and_classify<S: Scalar>(
    panel: &Panel<S>,
    country: &str,
    cfg: &SmoothingConfig,
    settings: &InferenceSettings,
) -> Result<Trajectory<S>> {
    let series = panel.country_series(country);
    let years: Vec<i32> = series.iter().map(|r| r.year).collect();
    let mut bins = Vec::new();
    for chunk in series.chunks(cfg.window.max(1)) {
        let n = S::from_count(chunk.len());
        let open: S = chunk.iter().map(|r| r.openness).sum::<S>() / n;
        let uneven: S = chunk.iter().map(|r| r.unevenness).sum::<S>() / n;
        bins.push(TrajectoryBin {
            first_year: chunk.first().unwrap().year,
            last_year: chunk.last().unwrap().year,
            openness: open,
            unevenness: uneven,
        });
    }
    debug_assert_eq!(
        bins.iter().map(TrajectoryBin::n_years).sum::<usize>(),
        years.len()
    );

    let slope = country_slope(panel, country, settings)?;
    let alpha = S::from_f64_lossy(cfg.alpha);
    let slope_class = if slope.p <= alpha {
        if slope.b < S::zero() {
            SlopeClass::NegativeSlope
        } else {
            SlopeClass::PositiveSlope
        }
    } else {
        SlopeClass::Insignificant
    };

    let shape = classify_shape(&bins, S::from_f64_lossy(cfg.rise_threshold_frac));
    Ok(Trajectory {
        country: country.to_string(),
        bins,
        slope_b: slope.b,
        slope_p: slope.p,
        slope_class,
        shape,
    })
}

fn classify_shape<S: Scalar>(bins: &[TrajectoryBin<S>], threshold_frac: S) -> ShapeTag {
    if bins.len() < 3 {
        return ShapeTag::Other;
    }
    let o: Vec<S> = bins.iter().map(|b| b.openness).collect();
    let u: Vec<S> = bins.iter().map(|b| b.unevenness).collect();
    let range = |v: &[S]| {
        let min = v.iter().copied().fold(S::infinity(), S::min);
        let max = v.iter().copied().fold(S::neg_infinity(), S::max);
        max - min
    };
    let thr_o = range(&o) * threshold_frac;
    let thr_u = range(&u) * threshold_frac;
    let last = bins.len() - 1;

    // Interior unevenness peak with movement beyond threshold on both sides.
    let peak = u
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let peaked = peak > 0
        && peak < last
        && u[peak] - u[0] > thr_u
        && u[peak] - u[last] > thr_u
        && o[peak] - o[0] > thr_o;
    if peaked {
        if o[last] - o[peak] > thr_o {
            return ShapeTag::TurningPoint;
        }
        if o[peak] - o[last] > thr_o {
            return ShapeTag::Retrograde;
        }
        return ShapeTag::Other;
    }

    if monotone(&o, thr_o) && monotone(&u, thr_u) {
        return ShapeTag::Monotone;
    }
    ShapeTag::Other
}

/// No two segments move in opposite directions beyond the threshold.
fn monotone<S: Scalar>(v: &[S], thr: S) -> bool {
    let mut up = false;
    let mut down = false;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d > thr {
            up = true;
        } else if d < -thr {
            down = true;
        }
    }
    !(up && down)
}
