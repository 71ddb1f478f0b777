//! Every constant of the entropy bounds for one model, with the hypotheses
//! that gate them. Constants whose hypotheses fail are reported as `null`.

use mflin_core::bounds::{
    gaussian_lsi_constant, rho_lambda_regime, torus_constants, uniform_lsi_constant_whole,
    BoundParams,
};
use mflin_core::equilibrium::{solve_kirkwood_monroe, KmOptions};
use mflin_core::fokker_planck::sandwich_constant;
use mflin_core::metrics::{l2_distance, relative_entropy};
use mflin_core::{DensityGrid, GridSpec, Result};
use serde_json::{json, Value};

use super::decay::torus_constants_json;
use crate::config::{BoundsReportSettings, DomainConfig};

pub fn report_bounds(s: &BoundsReportSettings) -> Result<Value> {
    let spec = s.spec()?;
    let beta = s.beta;
    let model = json!({
        "domain": s.domain,
        "beta": beta,
        "confining": s.confining,
        "interaction": s.interaction,
    });
    match s.domain {
        DomainConfig::Line => {
            let alpha = spec.confining().convexity_constant().filter(|a| *a > 0.0);
            let gamma = spec
                .interaction()
                .convexity_constant()
                .filter(|g| *g >= 0.0);
            let flags = json!({
                "confining_uniformly_convex": alpha.is_some(),
                "interaction_convex": gamma.is_some(),
            });
            let constants = match (alpha, gamma) {
                (Some(alpha), Some(gamma)) => {
                    let lambda0 = gaussian_lsi_constant(s.initial_var);
                    let p = BoundParams::line(alpha, gamma, lambda0, 0.0, 0.0, 0.0);
                    json!({
                        "alpha": alpha,
                        "gamma": gamma,
                        "lambda0": lambda0,
                        "lambda_limit": 1.0 / (2.0 * beta * (alpha + gamma)),
                        "equilibrium_gaussian_lsi": gaussian_lsi_constant(1.0 / (beta * (alpha + gamma))),
                        "Lambda": uniform_lsi_constant_whole(&p, beta)?,
                        "rho_regime": rho_lambda_regime(&p, beta)?.tag(),
                        "coupling_rate": 0.5 * alpha,
                    })
                }
                _ => Value::Null,
            };
            Ok(json!({ "model": model, "hypotheses": flags, "constants": constants }))
        }
        DomainConfig::Torus => {
            let grid = GridSpec::torus(s.grid_points)?;
            let km = solve_kirkwood_monroe(&spec, &grid, &KmOptions::default())?;
            let two_pi = 2.0 * std::f64::consts::PI;
            let f0 =
                DensityGrid::from_fn(grid, |x| 1.0 + s.initial_amplitude * (two_pi * x).cos())?;
            let p = BoundParams::torus(
                sandwich_constant(&f0),
                0.0,
                l2_distance(&f0, &km.density)?,
                relative_entropy(&f0, &km.density)?,
            );
            let k = torus_constants(&spec, &p)?;
            let flags = json!({
                "unique_equilibrium_guaranteed": km.warnings.is_empty(),
                "zeta_positive": k.zeta > 0.0,
                "eta_positive": k.eta > 0.0,
                "sigma_1_applicable": k.applicable(1),
                "sigma_2_applicable": k.applicable(2),
            });
            Ok(json!({
                "model": model,
                "hypotheses": flags,
                "constants": torus_constants_json(&k),
                "warnings": km.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            }))
        }
    }
}
