//! Divergences and distances between grid densities, 1D Wasserstein
//! distances, and kernel density estimation.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, wrap_unit, DensityGrid, Domain, GridSpec};

/// Number of quantile levels in the inverse-CDF formula.
pub const W2_QUANTILES: usize = 10_000;
/// Candidate coupling shifts per unit of quantile level on the torus.
pub const W2_TORUS_CUTS: usize = 256;

const FISHER_MASK: f64 = 1e-14;
const ENTROPY_MASK: f64 = 1e-300;

fn pair_check(f: &DensityGrid, g: &DensityGrid) -> Result<()> {
    check_same_grid(f.grid(), g.grid())
}

/// `H(f|g) = ∫ f log(f/g)`; `+∞` when `f` charges a node where `g`
/// vanishes.
pub fn relative_entropy(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    pair_check(f, g)?;
    let mut acc = 0.0;
    for (&a, &b) in f.values().iter().zip(g.values()) {
        if a <= 0.0 {
            continue;
        }
        if b < ENTROPY_MASK {
            return Ok(f64::INFINITY);
        }
        acc += a * (a / b).ln();
    }
    Ok((acc * f.h()).max(0.0))
}

/// `I(f|g) = ∫ |∂x log(f/g)|² f` with centred differences of the log ratio,
/// skipping nodes where `f` or a neighbour is below `1e-14`.
pub fn relative_fisher(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    pair_check(f, g)?;
    let n = f.grid().len();
    let h = f.h();
    let (fv, gv) = (f.values(), g.values());
    let log_ratio: Vec<Option<f64>> = fv
        .iter()
        .zip(gv)
        .map(|(&a, &b)| (a >= FISHER_MASK && b >= ENTROPY_MASK).then(|| (a / b).ln()))
        .collect();
    let periodic = f.grid().domain() == Domain::Torus;
    let mut acc = 0.0;
    for i in 0..n {
        let (l, r) = if periodic {
            ((i + n - 1) % n, (i + 1) % n)
        } else if i == 0 || i == n - 1 {
            continue;
        } else {
            (i - 1, i + 1)
        };
        if let (Some(a), Some(b), Some(_)) = (log_ratio[l], log_ratio[r], log_ratio[i]) {
            let d = (b - a) / (2.0 * h);
            acc += d * d * fv[i];
        }
    }
    Ok(acc * h)
}

pub fn l1_distance(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    pair_check(f, g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * f.h())
}

pub fn l2_distance(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    pair_check(f, g)?;
    let s: f64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((s * f.h()).sqrt())
}

/// Total variation `½‖f − g‖_{L¹}`.
pub fn total_variation(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    Ok(0.5 * l1_distance(f, g)?)
}

/// Quantile function of a grid density, exact for the piecewise-constant
/// reconstruction, evaluated at `(k + ½)/K`.
fn quantiles(f: &DensityGrid, levels: usize) -> Vec<f64> {
    let grid = f.grid();
    let h = grid.h();
    let cdf = f.cdf();
    let total = *cdf.last().unwrap_or(&1.0);
    let mut out = Vec::with_capacity(levels);
    let mut i = 0;
    for k in 0..levels {
        let u = (k as f64 + 0.5) / levels as f64 * total;
        while i + 1 < cdf.len() && cdf[i] < u {
            i += 1;
        }
        let left_cdf = if i == 0 { 0.0 } else { cdf[i - 1] };
        let mass = cdf[i] - left_cdf;
        let frac = if mass > 0.0 {
            ((u - left_cdf) / mass).clamp(0.0, 1.0)
        } else {
            0.5
        };
        out.push(grid.lo() + (i as f64 + frac) * h);
    }
    out
}

/// Quadratic Wasserstein distance between two 1D grid densities. On the torus
/// the coupling is optimized over shifts of the quantile level.
pub fn wasserstein2_1d(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    pair_check(f, g)?;
    f.check_normalized(1e-6)?;
    g.check_normalized(1e-6)?;
    let qf = quantiles(f, W2_QUANTILES);
    let qg = quantiles(g, W2_QUANTILES);
    match f.grid().domain() {
        Domain::Line => Ok(quantile_w2(&qf, &qg)),
        Domain::Torus => Ok(circular_w2(&qf, &qg)),
    }
}

fn quantile_w2(qf: &[f64], qg: &[f64]) -> f64 {
    (qf.iter()
        .zip(qg)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / qf.len() as f64)
        .sqrt()
}

/// `min_s ∫ |F⁻¹(u) − G̃⁻¹(u + s)|² du` with the lifted quantile function
/// `G̃⁻¹(u + 1) = G̃⁻¹(u) + 1`.
fn circular_w2(qf: &[f64], qg: &[f64]) -> f64 {
    let k = qf.len();
    let cost = |shift: isize| -> f64 {
        let mut acc = 0.0;
        for (i, &a) in qf.iter().enumerate() {
            let j = i as isize + shift;
            let lap = j.div_euclid(k as isize);
            let b = qg[j.rem_euclid(k as isize) as usize] + lap as f64;
            acc += (a - b) * (a - b);
        }
        acc / k as f64
    };
    // a shift of a full period changes the cost, so scan (-1, 1)
    let full = k as isize;
    let step = (k / W2_TORUS_CUTS).max(1) as isize;
    let mut best = (f64::INFINITY, 0isize);
    let mut s = -full + step;
    while s < full {
        let c = cost(s);
        if c < best.0 {
            best = (c, s);
        }
        s += step;
    }
    // refine around the best coarse shift at full quantile resolution
    for s in best.1 - step..=best.1 + step {
        let c = cost(s);
        if c < best.0 {
            best = (c, s);
        }
    }
    best.0.sqrt()
}

/// `W₂` between two equally weighted samples on the line by sorting.
pub fn wasserstein2_empirical(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        return Ok(quantile_w2(&a, &b));
    }
    let pick = |v: &[f64], u: f64| v[((u * v.len() as f64) as usize).min(v.len() - 1)];
    let levels: Vec<f64> = (0..W2_QUANTILES)
        .map(|k| (k as f64 + 0.5) / W2_QUANTILES as f64)
        .collect();
    let qa: Vec<f64> = levels.iter().map(|&u| pick(&a, u)).collect();
    let qb: Vec<f64> = levels.iter().map(|&u| pick(&b, u)).collect();
    Ok(quantile_w2(&qa, &qb))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Silverman,
    Fixed(f64),
}

/// Gaussian KDE (wrapped on the torus) evaluated on `grid` after linear
/// binning of the samples onto the nodes. Line samples outside the grid are
/// dropped before normalization.
pub fn kde_density(
    samples: &[f64],
    grid: &GridSpec,
    bandwidth: Bandwidth,
) -> Result<(DensityGrid, Option<Warning>)> {
    const MIN_SAMPLES: usize = 10;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("non-finite sample"));
    }
    let n = grid.len();
    let h = grid.h();
    let periodic = grid.domain() == Domain::Torus;
    let points: Vec<f64> = if periodic {
        samples.iter().map(|&x| wrap_unit(x)).collect()
    } else {
        samples.to_vec()
    };
    let mut warning = None;
    let bw = match bandwidth {
        Bandwidth::Fixed(b) if b > 0.0 => b,
        Bandwidth::Fixed(_) => return Err(Error::domain("bandwidth must be positive")),
        Bandwidth::Silverman => {
            let b = silverman(&points);
            if b > 0.0 && b.is_finite() {
                b
            } else {
                warning = Some(Warning::BandwidthFallback { bandwidth: h });
                h
            }
        }
    };

    let mut bins = vec![0.0; n];
    for &x in &points {
        let s = (x - grid.lo()) / h - 0.5;
        let i0 = s.floor();
        let t = s - i0;
        let i0 = i0 as isize;
        for (idx, w) in [(i0, 1.0 - t), (i0 + 1, t)] {
            if periodic {
                bins[idx.rem_euclid(n as isize) as usize] += w;
            } else if (0..n as isize).contains(&idx) {
                bins[idx as usize] += w;
            }
        }
    }

    let reach = ((8.0 * bw / h).ceil() as usize).max(1);
    let kernel: Vec<f64> = (0..=reach)
        .map(|k| {
            let d = k as f64 * h;
            (-0.5 * d * d / (bw * bw)).exp()
        })
        .collect();
    let mut out = vec![0.0; n];
    for (j, &b) in bins.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        for k in -(reach as isize)..=reach as isize {
            let w = kernel[k.unsigned_abs()] * b;
            let i = j as isize + k;
            if periodic {
                out[i.rem_euclid(n as isize) as usize] += w;
            } else if (0..n as isize).contains(&i) {
                out[i as usize] += w;
            }
        }
    }
    Ok((DensityGrid::from_unnormalized(*grid, out)?, warning))
}

fn silverman(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sd = crate::stats::variance(xs).sqrt();
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// All divergences between two densities on a common grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub entropy: f64,
    pub fisher: f64,
    pub l1: f64,
    pub l2: f64,
    pub tv: f64,
    pub w2: f64,
}

impl DistanceReport {
    pub fn compute(f: &DensityGrid, g: &DensityGrid) -> Result<Self> {
        let l1 = l1_distance(f, g)?;
        Ok(DistanceReport {
            entropy: relative_entropy(f, g)?,
            fisher: relative_fisher(f, g)?,
            l1,
            l2: l2_distance(f, g)?,
            tv: 0.5 * l1,
            w2: wasserstein2_1d(f, g)?,
        })
    }

    /// `l1² ≤ 8H` up to `1e-9`.
    pub fn ckp_holds(&self) -> bool {
        self.l1 * self.l1 <= 8.0 * self.entropy + 1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> GridSpec {
        GridSpec::line(12.0, n).unwrap()
    }

    #[test]
    fn identical_densities() {
        let f = DensityGrid::gaussian(line(800), 0.3, 1.0).unwrap();
        let r = DistanceReport::compute(&f, &f).unwrap();
        assert_eq!(r.entropy, 0.0);
        assert_eq!(r.fisher, 0.0);
        assert_eq!(r.l1, 0.0);
        assert!(r.w2 < 1e-12);
    }

    #[test]
    fn gaussian_kl_and_fisher() {
        let g = line(4000);
        let f1 = DensityGrid::gaussian(g, 0.0, 1.0).unwrap();
        let f2 = DensityGrid::gaussian(g, 0.0, 2.0).unwrap();
        let kl = 0.5 * 2f64.ln() + 1.0 / 4.0 - 0.5;
        assert!((relative_entropy(&f1, &f2).unwrap() - kl).abs() < 1e-6);
        assert!((relative_fisher(&f1, &f2).unwrap() - 0.25).abs() < 1e-4);
    }

    #[test]
    fn infinite_entropy_when_support_escapes() {
        let g = GridSpec::torus(8).unwrap();
        let f = DensityGrid::uniform(g);
        let p = DensityGrid::from_unnormalized(g, vec![1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0])
            .unwrap();
        assert_eq!(relative_entropy(&f, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn translation_w2() {
        let g = line(4000);
        let f = DensityGrid::gaussian(g, 0.0, 1.0).unwrap();
        let s = DensityGrid::gaussian(g, 0.7, 1.0).unwrap();
        assert!((wasserstein2_1d(&f, &s).unwrap() - 0.7).abs() < 1e-4);
    }

    #[test]
    fn circular_rotation_w2() {
        let g = GridSpec::torus(1000).unwrap();
        let f = DensityGrid::gaussian(g, 0.1, 1e-4).unwrap();
        let r = DensityGrid::gaussian(g, 0.9, 1e-4).unwrap();
        // the short way round is 0.2
        let w = wasserstein2_1d(&f, &r).unwrap();
        assert!((w - 0.2).abs() < 2e-3, "{w}");
    }

    #[test]
    fn kde_bump_and_fallback() {
        let g = line(600);
        let samples = vec![1.0; 20];
        let (d, w) = kde_density(&samples, &g, Bandwidth::Fixed(0.3)).unwrap();
        assert!(w.is_none());
        assert!((d.mass() - 1.0).abs() < 1e-12);
        assert!((d.mean() - 1.0).abs() < 1e-3);
        let (_, w) = kde_density(&samples, &g, Bandwidth::Silverman).unwrap();
        assert!(matches!(w, Some(Warning::BandwidthFallback { .. })));
        assert!(kde_density(&samples[..5], &g, Bandwidth::Silverman).is_err());
    }

    #[test]
    fn empirical_w2_of_shift() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 0.25).collect();
        assert!((wasserstein2_empirical(&xs, &ys).unwrap() - 0.25).abs() < 1e-12);
    }
}
