//! Result tables: RMSE CSV (one row per method, one column per horizon,
//! then the maneuver accuracies where the method has a classifier), the
//! same RMSE values transposed with one row per horizon, an accuracy CSV
//! and a JSON summary.

use std::fmt::Write as _;

use mlstm_core::eval::{AblationReport, AblationRow, HORIZONS_S};
use serde::{Deserialize, Serialize};

pub fn rmse_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("method");
    for sec in HORIZONS_S {
        let _ = write!(out, ",rmse_{sec}s");
    }
    out.push_str(",acc_lateral,acc_longitudinal,acc_joint\n");
    for r in rows {
        out.push_str(r.method.name());
        for v in r.rmse {
            let _ = write!(out, ",{v:.6}");
        }
        match r.accuracy {
            Some(a) => {
                let _ = writeln!(out, ",{:.6},{:.6},{:.6}", a.lateral, a.longitudinal, a.joint);
            }
            None => out.push_str(",,,\n"),
        }
    }
    out
}

/// RMSE with one row per horizon and one column per method.
pub fn rmse_by_horizon_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("horizon_s");
    for r in rows {
        out.push(',');
        out.push_str(r.method.name());
    }
    out.push('\n');
    for (k, sec) in HORIZONS_S.iter().enumerate() {
        let _ = write!(out, "{sec}");
        for r in rows {
            let _ = write!(out, ",{:.6}", r.rmse[k]);
        }
        out.push('\n');
    }
    out
}

pub fn accuracy_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("method,lateral,longitudinal,joint\n");
    for r in rows {
        if let Some(a) = r.accuracy {
            let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", r.method.name(), a.lateral, a.longitudinal, a.joint);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub lateral: f64,
    pub longitudinal: f64,
    pub joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub horizons_s: Vec<usize>,
    pub rmse_m: Vec<f64>,
    pub accuracy: Option<AccuracyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub samples: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

pub fn summary(report: &AblationReport, samples: usize, seed: u64) -> Summary {
    Summary {
        samples,
        seed,
        methods: report
            .rows
            .iter()
            .map(|r| MethodSummary {
                method: r.method.name().to_string(),
                horizons_s: HORIZONS_S.to_vec(),
                rmse_m: r.rmse.to_vec(),
                accuracy: r.accuracy.map(|a| AccuracyRecord {
                    lateral: a.lateral,
                    longitudinal: a.longitudinal,
                    joint: a.joint,
                }),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlstm_core::eval::{Accuracy, Method};
    use mlstm_core::Variant;

    #[test]
    fn rmse_table_shape() {
        let rows = [
            AblationRow {
                method: Method::ConstantVelocity,
                rmse: [1.0, 2.0, 3.0, 4.0, 5.0],
                accuracy: None,
            },
            AblationRow {
                method: Method::Network(Variant::MLstm),
                rmse: [0.5; 5],
                accuracy: Some(Accuracy {
                    lateral: 1.0,
                    longitudinal: 0.5,
                    joint: 0.5,
                }),
            },
        ];
        let csv = rmse_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "method,rmse_1s,rmse_2s,rmse_3s,rmse_4s,rmse_5s,acc_lateral,acc_longitudinal,acc_joint"
        );
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "CV,1.000000,2.000000,3.000000,4.000000,5.000000,,,");
        assert_eq!(
            lines[2],
            "M-LSTM,0.500000,0.500000,0.500000,0.500000,0.500000,1.000000,0.500000,0.500000"
        );
        let by_h = rmse_by_horizon_csv(&rows);
        let lines: Vec<&str> = by_h.lines().collect();
        assert_eq!(lines[0], "horizon_s,CV,M-LSTM");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[5], "5,5.000000,0.500000");
        assert_eq!(accuracy_csv(&rows), "method,lateral,longitudinal,joint\nM-LSTM,1.000000,0.500000,0.500000\n");
    }
}
