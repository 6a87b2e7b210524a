//! Overlap and topology metrics for segmentations and their centerlines.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinaryVolume, Connectivity, ScalarVolume};
use crate::morphology::{soft_skeleton_with, SoftSkeletonConfig};
use crate::par::Execution;
use crate::thinning::{skeletonize_with, ThinningMethod};
use crate::topology::{betti_numbers, label_components, BettiError};

/// Default size threshold of the small-component filter.
pub const DEFAULT_MIN_COMPONENT: usize = 100;

/// Skeletonization used to derive centerlines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkeletonMethod {
    Soft(SoftIterations),
    Thinning(ThinningMethod),
}

/// Serializable iteration count for [`SkeletonMethod::Soft`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftIterations(pub usize);

impl SkeletonMethod {
    pub fn soft(iterations: usize) -> Self {
        SkeletonMethod::Soft(SoftIterations(iterations))
    }

    pub fn name(&self) -> &'static str {
        match self {
            SkeletonMethod::Soft(_) => "soft",
            SkeletonMethod::Thinning(m) => match m.variant {
                crate::thinning::SimplePointTest::Euler => "euler",
                crate::thinning::SimplePointTest::Boolean => "boolean",
            },
        }
    }

    /// Binary centerline of `vol`; soft skeletons are binarized at 0.5.
    pub fn apply(&self, vol: &BinaryVolume, exec: Execution) -> Result<BinaryVolume> {
        match *self {
            SkeletonMethod::Soft(SoftIterations(k)) => {
                let cfg = SoftSkeletonConfig::new(k)?;
                Ok(soft_skeleton_with(&ScalarVolume::from_binary(vol), cfg, exec).to_binary())
            }
            SkeletonMethod::Thinning(m) => Ok(skeletonize_with(vol, m, exec)),
        }
    }
}

/// Loss weights of the centerline Dice term and the clDice term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    lambda1: f64,
    lambda2: f64,
}

impl LossWeights {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(LossWeights { lambda1, lambda2 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 0.5,
            lambda2: 0.5,
        }
    }
}

/// 2|a ∩ b| / (|a| + |b|), and 1 when both are empty.
pub fn dice(a: &BinaryVolume, b: &BinaryVolume) -> Result<f64> {
    let inter = a.intersection_count(b)?;
    let total = a.count_foreground() + b.count_foreground();
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// Fraction of the centerline lying inside the segmentation.
fn centerline_inside(centerline: &BinaryVolume, segmentation: &BinaryVolume) -> Result<f64> {
    let inter = centerline.intersection_count(segmentation)?;
    let n = centerline.count_foreground();
    if n == 0 {
        return Err(Error::EmptyCenterline);
    }
    Ok(inter as f64 / n as f64)
}

/// Topology precision |C_P ∩ S_G| / |C_P|.
pub fn t_prec(c_p: &BinaryVolume, s_g: &BinaryVolume) -> Result<f64> {
    centerline_inside(c_p, s_g)
}

/// Topology sensitivity |C_G ∩ S_P| / |C_G|.
pub fn t_sens(c_g: &BinaryVolume, s_p: &BinaryVolume) -> Result<f64> {
    centerline_inside(c_g, s_p)
}

/// Harmonic mean of two rates, 0 when both vanish.
pub fn harmonic_mean(p: f64, s: f64) -> f64 {
    if p + s == 0.0 {
        0.0
    } else {
        2.0 * p * s / (p + s)
    }
}

/// Topology precision and sensitivity with the empty-centerline convention:
/// both empty counts as perfect agreement, exactly one empty as none.
fn topology_rates(
    s_p: &BinaryVolume,
    s_g: &BinaryVolume,
    c_p: &BinaryVolume,
    c_g: &BinaryVolume,
) -> Result<(f64, f64)> {
    for v in [s_g, c_p, c_g] {
        s_p.ensure_same_dims(v)?;
    }
    match (c_p.is_empty(), c_g.is_empty()) {
        (true, true) => Ok((1.0, 1.0)),
        (true, false) | (false, true) => Ok((0.0, 0.0)),
        (false, false) => Ok((t_prec(c_p, s_g)?, t_sens(c_g, s_p)?)),
    }
}

/// Centerline Dice.
pub fn cl_dice(
    s_p: &BinaryVolume,
    s_g: &BinaryVolume,
    c_p: &BinaryVolume,
    c_g: &BinaryVolume,
) -> Result<f64> {
    let (p, s) = topology_rates(s_p, s_g, c_p, c_g)?;
    Ok(harmonic_mean(p, s))
}

/// (1 - Dice(S)) + λ1 (1 - Dice(C)) + λ2 (1 - clDice).
pub fn combined_loss(
    s_p: &BinaryVolume,
    s_g: &BinaryVolume,
    c_p: &BinaryVolume,
    c_g: &BinaryVolume,
    w: LossWeights,
) -> Result<f64> {
    let seg = dice(s_p, s_g)?;
    let center = dice(c_p, c_g)?;
    let cl = cl_dice(s_p, s_g, c_p, c_g)?;
    Ok(combined_loss_from_terms(seg, center, cl, w))
}

/// The loss from already computed similarity terms.
pub fn combined_loss_from_terms(seg_dice: f64, center_dice: f64, cl: f64, w: LossWeights) -> f64 {
    (1.0 - seg_dice) + w.lambda1 * (1.0 - center_dice) + w.lambda2 * (1.0 - cl)
}

/// Drops 26-connected components with fewer than `min_voxels` voxels.
pub fn remove_small_components(vol: &BinaryVolume, min_voxels: usize) -> BinaryVolume {
    let labels = label_components(vol, Connectivity::TwentySix);
    let keep: Vec<bool> = std::iter::once(false)
        .chain(labels.component_sizes.iter().map(|&n| n >= min_voxels))
        .collect();
    let data = labels.labels.iter().map(|&l| keep[l as usize] as u8).collect();
    BinaryVolume::from_vec(vol.dims(), data)
        .expect("labels cover the volume")
        .with_spacing(vol.spacing())
}

/// One row of an evaluation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dice: f64,
    pub cl_dice: f64,
    pub t_prec: f64,
    pub t_sens: f64,
    pub b0_err: u64,
    pub b1_err: u64,
    pub chi_err: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<f64>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "dice,cl_dice,t_prec,t_sens,b0_err,b1_err,chi_err,runtime_ms";

    pub fn to_csv_row(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{},{},{},",
            self.dice, self.cl_dice, self.t_prec, self.t_sens, self.b0_err, self.b1_err, self.chi_err
        )
        .unwrap();
        if let Some(ms) = self.runtime_ms {
            write!(s, "{ms}").unwrap();
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Options of [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub skeleton: SkeletonMethod,
    /// Minimum component size kept in the prediction; `None` disables filtering.
    pub min_component: Option<usize>,
    pub exec: Execution,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            skeleton: SkeletonMethod::Thinning(ThinningMethod::euler()),
            min_component: Some(DEFAULT_MIN_COMPONENT),
            exec: Execution::default(),
        }
    }
}

/// Full metric row for a predicted segmentation against ground truth.
///
/// The prediction alone is post-processed; centerlines of both volumes come
/// from the configured skeletonization and `runtime_ms` is the time spent
/// skeletonizing the prediction.
pub fn evaluate(pred: &BinaryVolume, gt: &BinaryVolume, opts: &EvalOptions) -> Result<MetricsReport> {
    pred.ensure_same_dims(gt)?;
    let filtered;
    let pred = match opts.min_component {
        Some(n) => {
            filtered = remove_small_components(pred, n);
            &filtered
        }
        None => pred,
    };

    let start = Instant::now();
    let c_p = opts.skeleton.apply(pred, opts.exec)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let c_g = opts.skeleton.apply(gt, opts.exec)?;

    let (t_prec, t_sens) = topology_rates(pred, gt, &c_p, &c_g)?;
    let err = BettiError::between(betti_numbers(pred)?, betti_numbers(gt)?);
    Ok(MetricsReport {
        dice: dice(pred, gt)?,
        cl_dice: harmonic_mean(t_prec, t_sens),
        t_prec,
        t_sens,
        b0_err: err.b0,
        b1_err: err.b1,
        chi_err: err.chi,
        runtime_ms: Some(runtime_ms),
    })
}
