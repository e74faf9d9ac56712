use serde::Serialize;

use crate::error::Result;
use crate::theory::{approx_factor, eta_2ogp, eta_alg, eta_opt, kappa, scale_dn, AsymptoticParams};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsRow {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub eta_opt: f64,
    pub eta_alg: f64,
    pub eta_2ogp: f64,
    pub kappa: f64,
    pub approx_factor: f64,
    pub scale_dn: f64,
    /// `η_ALG / η_OPT`, which should equal `approx_factor`.
    pub alg_over_opt: f64,
}

pub fn report_constants(params: &AsymptoticParams) -> Result<ConstantsRow> {
    params.validate()?;
    let (opt, alg) = (eta_opt(params)?, eta_alg(params)?);
    Ok(ConstantsRow {
        n: params.n,
        k: params.k,
        p: params.p,
        eta_opt: opt,
        eta_alg: alg,
        eta_2ogp: eta_2ogp(),
        kappa: kappa(params.p)?,
        approx_factor: approx_factor(params.p)?,
        scale_dn: scale_dn(params)?,
        alg_over_opt: alg / opt,
    })
}

/// One row per order in `orders`.
pub fn constants_table(n: usize, k: usize, orders: &[usize], epsilon: f64) -> Result<Vec<ConstantsRow>> {
    orders
        .iter()
        .map(|&p| report_constants(&AsymptoticParams::new(n, k, p, epsilon)?))
        .collect()
}

pub fn render_constants(rows: &[ConstantsRow]) -> String {
    let mut out = format!(
        "{:>3} {:>8} {:>5} {:>10} {:>10} {:>8} {:>8} {:>8} {:>12} {:>10}\n",
        "p", "n", "k", "eta_opt", "eta_alg", "eta_2ogp", "kappa", "ratio", "D_n", "alg/opt"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>3} {:>8} {:>5} {:>10.6} {:>10.6} {:>8.4} {:>8.4} {:>8.4} {:>12.4} {:>10.4}\n",
            r.p, r.n, r.k, r.eta_opt, r.eta_alg, r.eta_2ogp, r.kappa, r.approx_factor, r.scale_dn, r.alg_over_opt
        ));
    }
    out
}
