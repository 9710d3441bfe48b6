//! Report emission: a delimited table of relative values, a JSON document
//! with every measured field, and per-metric curve files.
//!
//! Emission is a pure function of the rows, so re-emitting from persisted
//! JSON reproduces byte-identical files.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{BenchRow, Curve, RatePoint, RkPoint};

/// Writes the relative table: `method,relative_error,relative_time`
/// (prediction time under the max-over-submodels rule).
pub fn write_table(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut out = String::from("method,relative_error,relative_time\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.3},{:.3}\n",
            row.method, row.relative_error, row.relative_time_max
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes all row fields as pretty JSON.
pub fn write_json(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let body = serde_json::to_string_pretty(rows)
        .map_err(|e| Error::InvalidArgument(format!("serialize rows: {e}")))?;
    fs::write(path, body + "\n")?;
    Ok(())
}

/// Reads rows back from a JSON report.
pub fn read_json(path: &Path) -> Result<Vec<BenchRow>> {
    let body = fs::read_to_string(path)?;
    serde_json::from_str(&body).map_err(|e| Error::Parse { row: 0, message: format!("rows json: {e}") })
}

/// Writes `<experiment>_error_vs_I.csv` and `<experiment>_time_vs_I.csv`
/// under `dir`. Every curve contributes value (+std for errors) columns
/// keyed by method and ratio; rows are ensemble sizes.
pub fn write_curves(dir: &Path, experiment: &str, curves: &[Curve]) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::Empty("curve list".into()));
    }
    let sizes: Vec<usize> = curves[0].points.iter().map(|p| p.ensemble_size).collect();
    for curve in curves {
        let got: Vec<usize> = curve.points.iter().map(|p| p.ensemble_size).collect();
        if got != sizes {
            return Err(Error::InvalidArgument("curves disagree on ensemble sizes".into()));
        }
    }

    let mut error_csv = String::from("I");
    let mut time_csv = String::from("I");
    for curve in curves {
        let tag = format!("{}_rho{}", curve.method, curve.ratio);
        error_csv.push_str(&format!(",{tag}_mean,{tag}_std"));
        time_csv.push_str(&format!(",{tag}_max,{tag}_avg"));
    }
    error_csv.push('\n');
    time_csv.push('\n');
    for (row, &size) in sizes.iter().enumerate() {
        error_csv.push_str(&size.to_string());
        time_csv.push_str(&size.to_string());
        for curve in curves {
            let p = &curve.points[row];
            error_csv.push_str(&format!(",{:.6},{:.6}", p.mean_error, p.std_error));
            time_csv.push_str(&format!(",{:.6},{:.6}", p.median_time_max, p.median_time_avg));
        }
        error_csv.push('\n');
        time_csv.push('\n');
    }
    fs::write(dir.join(format!("{experiment}_error_vs_I.csv")), error_csv)?;
    fs::write(dir.join(format!("{experiment}_time_vs_I.csv")), time_csv)?;
    Ok(())
}

/// Writes the per-n excess errors of a rate experiment.
pub fn write_rate_table(path: &Path, points: &[RatePoint]) -> Result<()> {
    let mut out = String::from("n,ratio,knn_excess,subnn_excess,excluded\n");
    for p in points {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{}\n",
            p.n, p.ratio, p.knn_excess, p.subnn_excess, p.excluded
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the empirical-versus-bound table of an rk experiment.
pub fn write_rk_table(path: &Path, points: &[RkPoint]) -> Result<()> {
    let mut out = String::from("n,k,bound,sup_mean,sup_max,satisfied_fraction,trials\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.4},{}\n",
            p.n, p.k, p.bound, p.sup_mean, p.sup_max, p.satisfied_fraction, p.trials
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::CurvePoint;

    fn sample_rows() -> Vec<BenchRow> {
        vec![
            BenchRow {
                method: "kNN".into(),
                error: 0.1,
                error_std: 0.0,
                relative_error: 1.0,
                time_max_rule: 0.5,
                time_avg_rule: 0.5,
                relative_time_max: 1.0,
                relative_time_avg: 1.0,
                chosen_k: Some(16),
                seed: 7,
                repetitions: 5,
                relative_flagged: false,
            },
            BenchRow {
                method: "subNN(0.1,10)".into(),
                error: 0.104,
                error_std: 0.002,
                relative_error: 1.04,
                time_max_rule: 0.12,
                time_avg_rule: 0.11,
                relative_time_max: 0.24,
                relative_time_avg: 0.22,
                chosen_k: Some(16),
                seed: 7,
                repetitions: 5,
                relative_flagged: false,
            },
        ]
    }

    #[test]
    fn emission_is_idempotent_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let rows = sample_rows();
        let json_path = dir.path().join("report.json");
        let table_a = dir.path().join("a.csv");
        let table_b = dir.path().join("b.csv");

        write_json(&json_path, &rows).unwrap();
        write_table(&table_a, &rows).unwrap();
        let reloaded = read_json(&json_path).unwrap();
        assert_eq!(reloaded, rows);
        write_table(&table_b, &reloaded).unwrap();
        assert_eq!(fs::read(&table_a).unwrap(), fs::read(&table_b).unwrap());

        let json_b = dir.path().join("report_b.json");
        write_json(&json_b, &reloaded).unwrap();
        assert_eq!(fs::read(&json_path).unwrap(), fs::read(&json_b).unwrap());
    }

    #[test]
    fn table_mirrors_method_and_relative_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        write_table(&path, &sample_rows()).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("method,relative_error,relative_time"));
        assert_eq!(lines.next(), Some("kNN,1.000,1.000"));
        assert_eq!(lines.next(), Some("subNN(0.1,10),1.040,0.240"));
    }

    #[test]
    fn curve_files_have_matching_grid() {
        let dir = tempfile::tempdir().unwrap();
        let point = |i: usize| CurvePoint {
            ensemble_size: i,
            mean_error: 0.1,
            std_error: 0.01,
            median_time_max: 0.2,
            median_time_avg: 0.18,
        };
        let curves = vec![
            Curve { method: "subNN".into(), ratio: 0.1, points: vec![point(1), point(3)] },
            Curve { method: "bagged".into(), ratio: 0.1, points: vec![point(1), point(3)] },
        ];
        write_curves(dir.path(), "demo", &curves).unwrap();
        let errors = fs::read_to_string(dir.path().join("demo_error_vs_I.csv")).unwrap();
        assert!(errors.starts_with("I,subNN_rho0.1_mean,subNN_rho0.1_std,bagged_rho0.1_mean"));
        assert_eq!(errors.lines().count(), 3);
        assert!(dir.path().join("demo_time_vs_I.csv").exists());

        let ragged = vec![
            Curve { method: "subNN".into(), ratio: 0.1, points: vec![point(1)] },
            Curve { method: "bagged".into(), ratio: 0.1, points: vec![point(1), point(3)] },
        ];
        assert!(write_curves(dir.path(), "bad", &ragged).is_err());
    }
}
