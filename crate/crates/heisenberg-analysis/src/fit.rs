//! Envelope fitting: the smallest constant `C` (and a shape parameter) with
//! `y(x) ≤ C·g(x; a)` on a calibration sample, validated on a held-out sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::nelder_mead_max;

/// A measured quantity and its envelope over a parametrized sample domain.
pub trait EnvelopeProblem: Sync {
    /// Measured value at sample coordinates `x`; `None` outside the domain.
    fn measured(&self, x: &[f64]) -> Option<f64>;
    /// Envelope shape at `x` for shape parameter `a`.
    fn envelope(&self, x: &[f64], a: f64) -> f64;
    /// Projects `x` back into the sample domain.
    fn clamp(&self, x: &mut [f64]) {
        let _ = x;
    }
    /// Initial simplex edges for refinement.
    fn step(&self, x: &[f64]) -> Vec<f64> {
        vec![0.05; x.len()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    /// Number of calibration samples used as refinement starts.
    pub starts: usize,
    pub iterations: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { starts: 8, iterations: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub shape: f64,
    pub constant: f64,
    /// Constant before refinement (calibration maximum only).
    pub sampled_constant: f64,
    /// Mean `ln(C g / y)` over calibration samples at the chosen shape.
    pub mean_log_gap: f64,
    /// Worst `y / (C g)` on the held-out set; the bound holds iff `≤ 1`.
    pub held_out_slack: f64,
    pub shape_axis: Vec<f64>,
    pub constant_axis: Vec<f64>,
    pub gap_axis: Vec<f64>,
    pub calibration_samples: usize,
    pub held_out_samples: usize,
    /// Coordinates of the refined maximizer.
    pub witness: Vec<f64>,
}

impl EnvelopeFit {
    pub fn holds(&self) -> bool {
        self.held_out_slack <= 1.0
    }
}

fn ratio<P: EnvelopeProblem + ?Sized>(p: &P, x: &[f64], a: f64) -> f64 {
    match p.measured(x) {
        Some(y) => {
            let g = p.envelope(x, a);
            if y == 0.0 {
                0.0
            } else if g > 0.0 {
                y.abs() / g
            } else {
                f64::INFINITY
            }
        }
        None => f64::NEG_INFINITY,
    }
}

/// Fits `(C, a)` over `shapes`: for each shape the minimal feasible constant,
/// choosing the shape with the tightest envelope (smallest mean log gap).
/// The chosen constant is raised to the refined supremum found by
/// Nelder–Mead from the largest calibration ratios.
pub fn fit_envelope<P: EnvelopeProblem + ?Sized>(
    problem: &P,
    calibration: &[Vec<f64>],
    held_out: &[Vec<f64>],
    shapes: &[f64],
    refine: RefineConfig,
) -> Result<EnvelopeFit> {
    if calibration.is_empty() {
        return Err(invalid("calibration", "no samples"));
    }
    if shapes.is_empty() || shapes.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return Err(invalid("shapes", "need finite nonnegative shape values"));
    }
    let measured: Vec<Option<f64>> = calibration.par_iter().map(|x| problem.measured(x)).collect();
    let mut constant_axis = Vec::with_capacity(shapes.len());
    let mut gap_axis = Vec::with_capacity(shapes.len());
    for &a in shapes {
        let ratios: Vec<f64> = calibration
            .iter()
            .zip(&measured)
            .filter_map(|(x, y)| y.map(|y| (y.abs(), problem.envelope(x, a))))
            .map(|(y, g)| if y == 0.0 { 0.0 } else if g > 0.0 { y / g } else { f64::INFINITY })
            .collect();
        let c = ratios.iter().copied().fold(0.0, f64::max);
        let positive: Vec<f64> = ratios.iter().copied().filter(|r| *r > 0.0).collect();
        let gap = if c.is_finite() && c > 0.0 && !positive.is_empty() {
            positive.iter().map(|r| (c / r).ln()).sum::<f64>() / positive.len() as f64
        } else if c == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        constant_axis.push(c);
        gap_axis.push(gap);
    }
    let best = (0..shapes.len())
        .min_by(|&i, &j| gap_axis[i].total_cmp(&gap_axis[j]).then(constant_axis[i].total_cmp(&constant_axis[j])))
        .expect("nonempty shapes");
    let shape = shapes[best];
    let sampled_constant = constant_axis[best];

    let mut order: Vec<(usize, f64)> = calibration
        .iter()
        .zip(&measured)
        .enumerate()
        .filter_map(|(i, (x, y))| {
            y.map(|y| {
                let g = problem.envelope(x, shape);
                (i, if y == 0.0 { 0.0 } else { y.abs() / g })
            })
        })
        .filter(|(_, r)| r.is_finite() && *r > 0.0)
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let starts: Vec<usize> = order.iter().take(refine.starts).map(|(i, _)| *i).collect();
    let refined: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|&i| {
            let x0 = &calibration[i];
            let step = problem.step(x0);
            let (mut x, _) = nelder_mead_max(
                |x| {
                    let mut y = x.to_vec();
                    problem.clamp(&mut y);
                    ratio(problem, &y, shape)
                },
                x0,
                &step,
                refine.iterations,
            );
            problem.clamp(&mut x);
            let r = ratio(problem, &x, shape);
            (x, r)
        })
        .collect();
    let mut constant = sampled_constant;
    let mut witness = order.first().map(|(i, _)| calibration[*i].clone()).unwrap_or_default();
    for (x, r) in refined {
        if r.is_finite() && r > constant {
            constant = r;
            witness = x;
        }
    }

    let held_out_slack = if constant == 0.0 {
        let any = held_out.par_iter().map(|x| ratio(problem, x, shape)).any(|r| r > 0.0);
        if any {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        held_out
            .par_iter()
            .map(|x| ratio(problem, x, shape) / constant)
            .reduce(|| 0.0, f64::max)
    };

    Ok(EnvelopeFit {
        shape,
        constant,
        sampled_constant,
        mean_log_gap: gap_axis[best],
        held_out_slack,
        shape_axis: shapes.to_vec(),
        constant_axis,
        gap_axis,
        calibration_samples: calibration.len(),
        held_out_samples: held_out.len(),
        witness,
    })
}

/// `count` log-spaced values from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y = e^{-x²}` against `e^{-x²/a}` on `[-3, 3]`: tightest at `a = 1`.
    struct Gauss;

    impl EnvelopeProblem for Gauss {
        fn measured(&self, x: &[f64]) -> Option<f64> {
            (x[0].abs() <= 3.0).then(|| (-x[0] * x[0]).exp() * (1.0 + 0.1 * x[0].sin()))
        }
        fn envelope(&self, x: &[f64], a: f64) -> f64 {
            (-x[0] * x[0] / a).exp()
        }
        fn clamp(&self, x: &mut [f64]) {
            x[0] = x[0].clamp(-3.0, 3.0);
        }
    }

    #[test]
    fn recovers_shape_and_supremum() {
        let cal: Vec<Vec<f64>> = (0..40).map(|k| vec![-3.0 + 6.0 * k as f64 / 39.0]).collect();
        let held: Vec<Vec<f64>> = (0..97).map(|k| vec![-3.0 + 6.0 * k as f64 / 96.0]).collect();
        let fit = fit_envelope(&Gauss, &cal, &held, &geometric_grid(0.25, 4.0, 17), RefineConfig::default()).unwrap();
        assert!((fit.shape - 1.0).abs() < 1e-12, "{fit:?}");
        assert!(fit.constant >= fit.sampled_constant);
        assert!(fit.holds(), "{fit:?}");
    }

    #[test]
    fn zero_measurements_fit_trivially() {
        struct Zero;
        impl EnvelopeProblem for Zero {
            fn measured(&self, _: &[f64]) -> Option<f64> {
                Some(0.0)
            }
            fn envelope(&self, _: &[f64], _: f64) -> f64 {
                1.0
            }
        }
        let fit = fit_envelope(&Zero, &[vec![0.0]], &[vec![1.0]], &[1.0], RefineConfig::default()).unwrap();
        assert_eq!(fit.constant, 0.0);
        assert!(fit.holds());
        assert!(fit_envelope(&Zero, &[], &[], &[1.0], RefineConfig::default()).is_err());
    }
}
