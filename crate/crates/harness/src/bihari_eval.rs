//! `mixedsde bihari-eval`: the bound over a list of times plus the
//! divergence diagnostic of the modulus.

use mixedsde_core::bihari::{bihari_bound, conjugate, divergence_diagnostic, BihariParams, BoundStatus};
use mixedsde_core::grid::fmt_g17;

use crate::config::{BihariSpec, ExperimentConfig, ExperimentKind};
use crate::report::{Statistic, StudyReport, SeedRow, Verdict};
use crate::error::Result;

/// Evaluates `spec` into a report; `rows` hold
/// `(t, bound, F(start), increment, F argument)` per time.
pub fn evaluate(spec: &BihariSpec, cfg: Option<&ExperimentConfig>) -> Result<StudyReport> {
    let q = spec.q.unwrap_or_else(|| conjugate(spec.p));
    let rho = spec.modulus.build(q)?;
    let cfg = cfg.cloned().unwrap_or_else(|| placeholder_config(spec));
    let mut report = StudyReport::new(&cfg, 0);
    report.preset = rho.label();
    report.columns = vec!["t".into(), "bound".into(), "f_of_start".into(), "increment".into(), "f_argument".into()];
    let mut escaped = Vec::new();
    for (i, &t) in spec.t.iter().enumerate() {
        let params = BihariParams { a: spec.a, b_coef: spec.b, alpha: spec.alpha, p: spec.p, q, rho: rho.clone(), t };
        let ev = bihari_bound(&params)?;
        let bound = match ev.status {
            BoundStatus::Bound(v) => v,
            BoundStatus::EscapedDomain => {
                escaped.push(t);
                f64::NAN
            }
        };
        report.rows.push(SeedRow {
            index: i,
            seed: 0,
            values: vec![t, bound, ev.f_of_start, ev.increment, ev.f_argument],
            censored: None,
        });
        report.statistics.push(Statistic { t: Some(t), ..Statistic::scalar("bound", bound, 1) });
        if i == 0 {
            report.statistics.push(Statistic::scalar("c_alpha_p", ev.c_alpha_p, 1));
        }
    }
    report.seeds = spec.t.len();
    report.verdicts.push(Verdict::new(
        "bound_in_domain",
        escaped.is_empty(),
        if escaped.is_empty() {
            "F⁻¹ argument inside the range of F at every t".to_string()
        } else {
            format!("F⁻¹ argument outside the range of F at t = {escaped:?}")
        },
    ));
    let div = divergence_diagnostic(&rho, spec.divergence_decades)?;
    for &(k, v) in &div.values {
        report.statistics.push(Statistic { level: Some(k as usize), ..Statistic::scalar("F_at_10^-k", v, 1) });
    }
    report.verdicts.push(Verdict::new(
        "barrier_diverges_at_zero",
        div.certified(),
        format!(
            "|F(10^-k)| strictly increasing: {}, no plateau: {} (k = 1..{})",
            div.strictly_increasing, div.no_plateau, spec.divergence_decades
        ),
    ));
    Ok(report)
}

fn placeholder_config(spec: &BihariSpec) -> ExperimentConfig {
    let mut cfg: ExperimentConfig = toml::from_str("kind = \"bihari-eval\"").expect("static config");
    cfg.kind = ExperimentKind::BihariEval;
    cfg.bihari = Some(spec.clone());
    cfg
}

/// `t,bound,f_of_start,increment,f_argument` rows.
pub fn bounds_csv(report: &StudyReport) -> String {
    let mut out = report.columns.join(",") + "\n";
    for r in &report.rows {
        out.push_str(&r.values.iter().map(|&v| fmt_g17(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
