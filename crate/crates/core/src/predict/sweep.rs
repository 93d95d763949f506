//! Accuracy and efficiency tabulated over horizons and seeds.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{predict, prediction_efficiency, CaSystem, Eta, PredictError, PredictorSpec};
use crate::automata::{eca_step, EcaRow};
use crate::seeds::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub system: String,
    pub predictor: String,
    pub r: u64,
    pub t: u64,
    pub seed: u64,
    pub distance: f64,
    pub accuracy: f64,
    pub eta_distance: Eta,
    pub eta_accuracy: Eta,
    pub resources_spent: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: u64,
    pub seeds: u64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_distance: f64,
    pub mean_eta_distance: Eta,
    pub mean_eta_accuracy: Eta,
    pub mean_resources: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyCurve {
    pub system: String,
    pub predictor: String,
    pub points: Vec<CurvePoint>,
}

/// Initial row for `(system, seed)` under a master seed.
pub fn initial_row(system: &CaSystem, master_seed: u64, seed: u64) -> EcaRow {
    let mut rng = rng_for(master_seed, &[u64::from(system.rule.index()), system.width as u64, seed]);
    EcaRow::random(system.width, &mut rng).expect("system width is valid")
}

fn is_skippable(e: &PredictError) -> bool {
    matches!(e, PredictError::Inapplicable { .. } | PredictError::OverBudget { .. })
}

/// Runs every predictor against every system for `seeds` random initial rows.
/// Predictor/system pairs that are inapplicable or over budget at some
/// horizon are left out of the table for that horizon.
pub fn efficiency_sweep(
    systems: &[CaSystem],
    predictors: &[PredictorSpec],
    horizons: &[u64],
    seeds: u64,
    master_seed: u64,
) -> Result<(Vec<SweepRow>, Vec<EfficiencyCurve>), PredictError> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PredictError::InvalidArgument("horizons must be non-empty and strictly ascending".into()));
    }
    if seeds == 0 {
        return Err(PredictError::InvalidArgument("seed count must be at least 1".into()));
    }
    let cells: Vec<(usize, u64)> = (0..systems.len()).flat_map(|s| (0..seeds).map(move |k| (s, k))).collect();
    let per_cell: Vec<Vec<(usize, usize, SweepRow)>> = cells
        .par_iter()
        .map(|&(si, seed)| {
            let system = &systems[si];
            let s0 = initial_row(system, master_seed, seed);
            let mut actual = s0.clone();
            let mut at = 0u64;
            let mut rows = Vec::new();
            for (hi, &t) in horizons.iter().enumerate() {
                while at < t {
                    actual = eca_step(&actual, &system.rule);
                    at += 1;
                }
                for (pi, spec) in predictors.iter().enumerate() {
                    let p = match predict(spec, system, &s0, t, seed) {
                        Ok(p) => p,
                        Err(e) if is_skippable(&e) => continue,
                        Err(e) => return Err(e),
                    };
                    let rep = prediction_efficiency(&spec.label(), &s0, t, &p, &actual);
                    rows.push((
                        pi,
                        hi,
                        SweepRow {
                            system: system.id(),
                            predictor: rep.predictor,
                            r: rep.r,
                            t,
                            seed,
                            distance: rep.distance,
                            accuracy: rep.accuracy,
                            eta_distance: rep.eta_distance,
                            eta_accuracy: rep.eta_accuracy,
                            resources_spent: rep.resources_spent,
                        },
                    ));
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;

    // order: system, predictor, horizon, seed
    let mut keyed: Vec<(usize, usize, usize, u64, SweepRow)> = Vec::new();
    for (cell, rows) in cells.iter().zip(per_cell) {
        for (pi, hi, row) in rows {
            keyed.push((cell.0, pi, hi, cell.1, row));
        }
    }
    keyed.sort_by_key(|k| (k.0, k.1, k.2, k.3));
    let rows: Vec<SweepRow> = keyed.iter().map(|k| k.4.clone()).collect();

    let mut curves = Vec::new();
    let mut i = 0;
    while i < keyed.len() {
        let (s, p) = (keyed[i].0, keyed[i].1);
        let mut points = Vec::new();
        while i < keyed.len() && keyed[i].0 == s && keyed[i].1 == p {
            let h = keyed[i].2;
            let group: Vec<&SweepRow> =
                keyed[i..].iter().take_while(|k| k.0 == s && k.1 == p && k.2 == h).map(|k| &k.4).collect();
            i += group.len();
            points.push(aggregate(&group));
        }
        curves.push(EfficiencyCurve { system: systems[s].id(), predictor: predictors[p].label(), points });
    }
    Ok((rows, curves))
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (sum / n as f64, n)
}

fn mean_eta(group: &[&SweepRow], f: impl Fn(&SweepRow) -> Eta) -> Eta {
    let vals: Option<Vec<f64>> = group.iter().map(|r| f(r).value()).collect();
    match vals {
        Some(v) => Eta::Defined(mean(v.into_iter()).0),
        None => Eta::Undefined,
    }
}

fn aggregate(group: &[&SweepRow]) -> CurvePoint {
    let (mean_accuracy, n) = mean(group.iter().map(|r| r.accuracy));
    let var = group.iter().map(|r| (r.accuracy - mean_accuracy).powi(2)).sum::<f64>() / n as f64;
    CurvePoint {
        t: group[0].t,
        seeds: n as u64,
        mean_accuracy,
        std_accuracy: var.sqrt(),
        mean_distance: mean(group.iter().map(|r| r.distance)).0,
        mean_eta_distance: mean_eta(group, |r| r.eta_distance),
        mean_eta_accuracy: mean_eta(group, |r| r.eta_accuracy),
        mean_resources: mean(group.iter().map(|r| r.resources_spent as f64)).0,
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "system",
        "predictor",
        "r",
        "t",
        "seed",
        "distance",
        "accuracy",
        "eta_distance",
        "eta_accuracy",
        "resources_spent",
    ])?;
    for r in rows {
        w.write_record([
            r.system.clone(),
            r.predictor.clone(),
            r.r.to_string(),
            r.t.to_string(),
            r.seed.to_string(),
            r.distance.to_string(),
            r.accuracy.to_string(),
            r.eta_distance.to_string(),
            r.eta_accuracy.to_string(),
            r.resources_spent.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_csv<W: Write>(curves: &[EfficiencyCurve], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "system",
        "predictor",
        "t",
        "seeds",
        "mean_accuracy",
        "std_accuracy",
        "mean_distance",
        "mean_eta_distance",
        "mean_eta_accuracy",
        "mean_resources",
    ])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.system.clone(),
                c.predictor.clone(),
                p.t.to_string(),
                p.seeds.to_string(),
                p.mean_accuracy.to_string(),
                p.std_accuracy.to_string(),
                p.mean_distance.to_string(),
                p.mean_eta_distance.to_string(),
                p.mean_eta_accuracy.to_string(),
                p.mean_resources.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::{BudgetPolicy, BudgetScale, PredictorKind};

    #[test]
    fn exact_with_ample_budget_is_perfect() {
        let sys = [CaSystem::new(110, 32).unwrap()];
        let preds = [PredictorSpec::fixed(PredictorKind::ExactSimulator, 32 * 64)];
        let (rows, curves) = efficiency_sweep(&sys, &preds, &[1, 8, 64], 4, 11).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(curves[0].points.iter().all(|p| p.mean_accuracy == 1.0 && p.seeds == 4));
    }

    #[test]
    fn inapplicable_pairs_are_left_out_and_order_is_stable() {
        let sys = [CaSystem::new(90, 16).unwrap(), CaSystem::new(110, 16).unwrap()];
        let preds = [
            PredictorSpec::new(PredictorKind::AdditiveShortcut, BudgetPolicy::Scaled(BudgetScale::LogHorizon)),
            PredictorSpec::fixed(PredictorKind::Frozen, 0),
        ];
        let (rows, curves) = efficiency_sweep(&sys, &preds, &[2, 4], 3, 5).unwrap();
        assert_eq!(curves.len(), 3);
        assert_eq!(curves[0].predictor, "additive-shortcut@log-horizon");
        assert!(curves[0].points.iter().all(|p| p.mean_accuracy == 1.0));
        assert_eq!(curves[2].points[0].mean_eta_distance, Eta::Undefined);
        let again = efficiency_sweep(&sys, &preds, &[2, 4], 3, 5).unwrap().0;
        assert_eq!(rows, again);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.lines().nth(1).unwrap().starts_with("rule90-w16,additive-shortcut@log-horizon,32,2,0,0,1,0,"),
            "{text}"
        );
    }

    #[test]
    fn horizons_must_ascend() {
        let sys = [CaSystem::new(90, 16).unwrap()];
        let preds = [PredictorSpec::fixed(PredictorKind::Frozen, 0)];
        assert!(efficiency_sweep(&sys, &preds, &[4, 2], 1, 0).is_err());
        assert!(efficiency_sweep(&sys, &preds, &[], 1, 0).is_err());
    }
}
