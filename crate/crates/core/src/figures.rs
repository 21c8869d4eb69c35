//! Plot data for the threshold functions.

use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sync_tests::{g_function, h_n};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// `(x, g(x))` for `x ∈ [1, 20]`.
    G,
    /// `γ, sin γ, sin(γ)/2, h₅, h₁₀, h₂₀` on `[0, π/2)`.
    HnComparison,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" => Ok(Figure::G),
            "hn_comparison" => Ok(Figure::HnComparison),
            other => Err(Error::ConfigInvalid(format!(
                "unknown figure `{other}` (expected g or hn_comparison)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn figure_data(which: Figure, points: usize) -> Result<FigureData> {
    if points < 2 {
        return Err(Error::ConfigInvalid("a figure needs at least 2 points".into()));
    }
    match which {
        Figure::G => {
            let rows = (0..points)
                .map(|k| {
                    let x = 1.0 + 19.0 * k as f64 / (points - 1) as f64;
                    Ok(vec![x, g_function(x)?])
                })
                .collect::<Result<_>>()?;
            Ok(FigureData {
                columns: vec!["x".into(), "g".into()],
                rows,
            })
        }
        Figure::HnComparison => {
            let rows = (0..points)
                .map(|k| {
                    let gamma = FRAC_PI_2 * k as f64 / points as f64;
                    let s = gamma.sin();
                    vec![gamma, s, 0.5 * s, h_n(5.0, gamma), h_n(10.0, gamma), h_n(20.0, gamma)]
                })
                .collect();
            Ok(FigureData {
                columns: ["gamma", "sin", "sin_half", "h5", "h10", "h20"]
                    .map(String::from)
                    .to_vec(),
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_curve_starts_at_one() {
        let d = figure_data(Figure::G, 50).unwrap();
        assert_eq!(d.rows[0], vec![1.0, 1.0]);
        assert_eq!(d.rows.last().unwrap()[0], 20.0);
    }

    #[test]
    fn hn_comparison_rows() {
        let d = figure_data(Figure::HnComparison, 40).unwrap();
        assert!(d.rows[0].iter().all(|&v| v == 0.0));
        for r in &d.rows {
            assert!(r[5] <= r[4] && r[4] <= r[3] && r[3] <= r[1]);
            assert!(r[0] < FRAC_PI_2);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("g".parse::<Figure>().unwrap(), Figure::G);
        assert!("nope".parse::<Figure>().is_err());
    }
}
