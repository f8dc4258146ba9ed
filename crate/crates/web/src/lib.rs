//! Browser demo bindings. Each exported function takes and returns JSON so
//! the page stays plain JavaScript; the typed versions are usable natively.

use dea::data::{Dataset, VariableSpec};
use dea::efficiency::{solve_all, DeaModelConfig, Frontier};
use dea::fixture::{generate_fixture, market_schema};
use dea::pipeline::{run_product, MarketRanking, PipelineConfig, SortOrder};
use dea::screening::{screen_variables, ScreenOptions};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest generated dataset the page may request.
pub const MAX_COUNTRIES: usize = 500;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Point {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeerWeight {
    pub id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub efficient: bool,
    /// Output the DMU would reach on the frontier, `theta * y`.
    pub target_y: f64,
    pub peers: Vec<PeerWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierView {
    pub frontier: Frontier,
    pub points: Vec<ScoredPoint>,
    /// Frontier vertices in increasing x, ending at the largest observed x.
    pub polyline: Vec<[f64; 2]>,
}

/// Scores one-input, one-output points and traces the frontier through them.
pub fn frontier_view(points: &[Point], frontier: Frontier) -> Result<FrontierView, String> {
    if points.is_empty() {
        return Err("add at least one point".into());
    }
    let d = Dataset::new(
        points.iter().map(|p| p.id.clone()).collect(),
        vec![VariableSpec::input("x"), VariableSpec::output("y")],
        points.iter().map(|p| vec![p.x, p.y]).collect(),
    )
    .map_err(|e| e.to_string())?;
    let cfg = DeaModelConfig {
        frontier,
        ..Default::default()
    };
    let solutions = solve_all(&d, &cfg).map_err(|e| e.to_string())?;
    let scored: Vec<ScoredPoint> = points
        .iter()
        .zip(&solutions)
        .map(|(p, s)| ScoredPoint {
            id: p.id.clone(),
            x: p.x,
            y: p.y,
            theta: s.theta,
            efficient: s.efficient,
            target_y: s.theta * p.y,
            peers: s
                .peers
                .iter()
                .map(|q| PeerWeight {
                    id: points[q.index].id.clone(),
                    weight: q.weight,
                })
                .collect(),
        })
        .collect();

    let x_max = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let polyline = match frontier {
        Frontier::Crs => {
            let slope = points.iter().map(|p| p.y / p.x).fold(f64::NEG_INFINITY, f64::max);
            vec![[0.0, 0.0], [x_max, slope * x_max]]
        }
        Frontier::Vrs => {
            let mut hull: Vec<[f64; 2]> = scored.iter().filter(|p| p.efficient).map(|p| [p.x, p.y]).collect();
            hull.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            hull.dedup_by(|b, a| a[0] == b[0]);
            // free disposal: the frontier stays flat past the last vertex
            if let Some(&[x, y]) = hull.last() {
                if x < x_max {
                    hull.push([x_max, y]);
                }
            }
            hull
        }
    };
    Ok(FrontierView {
        frontier,
        points: scored,
        polyline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningView {
    pub variables: Vec<(String, String)>,
    pub matrix: Vec<Vec<Option<f64>>>,
    pub kept: Vec<String>,
    pub dropped: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

fn check_countries(n: usize) -> Result<(), String> {
    if (3..=MAX_COUNTRIES).contains(&n) {
        Ok(())
    } else {
        Err(format!("countries must lie in 3..={MAX_COUNTRIES}"))
    }
}

/// Correlation screening of a generated market dataset.
pub fn screening_view(seed: u64, countries: usize, threshold: f64) -> Result<ScreeningView, String> {
    check_countries(countries)?;
    let d = generate_fixture(seed, countries, &market_schema());
    let (report, _) = screen_variables(&d, threshold, &ScreenOptions::default()).map_err(|e| e.to_string())?;
    Ok(ScreeningView {
        variables: d.variables().iter().map(|v| (v.id.clone(), v.role.to_string())).collect(),
        matrix: report.matrix,
        kept: report.kept,
        dropped: report.dropped.into_iter().map(|x| (x.id, x.reason)).collect(),
        warnings: report.warnings,
    })
}

/// Full market selection on a generated dataset.
pub fn ranking_view(seed: u64, countries: usize, k: usize, order: SortOrder, frontier: Frontier) -> Result<MarketRanking, String> {
    check_countries(countries)?;
    let cfg = PipelineConfig {
        k,
        order,
        model: DeaModelConfig {
            frontier,
            ..Default::default()
        },
        ..Default::default()
    };
    let d = generate_fixture(seed, countries, &market_schema());
    let mut ranking = run_product("000000", &d, &cfg).map_err(|e| e.to_string())?;
    ranking.metadata.seed = Some(seed);
    Ok(ranking)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, JsValue> {
    s.parse().map_err(|e: String| JsValue::from_str(&e))
}

/// `points_json`: `[{"id":"A","x":1,"y":2}, ...]`; `frontier`: `vrs` or `crs`.
#[wasm_bindgen]
pub fn frontier(points_json: &str, frontier: &str) -> Result<String, JsValue> {
    let points: Vec<Point> = serde_json::from_str(points_json).map_err(|e| JsValue::from_str(&e.to_string()))?;
    to_js(frontier_view(&points, parse(frontier)?))
}

#[wasm_bindgen]
pub fn screening(seed: u32, countries: u32, threshold: f64) -> Result<String, JsValue> {
    to_js(screening_view(u64::from(seed), countries as usize, threshold))
}

/// `order`: `asc` or `desc`; `frontier`: `vrs` or `crs`.
#[wasm_bindgen]
pub fn ranking(seed: u32, countries: u32, k: u32, order: &str, frontier: &str) -> Result<String, JsValue> {
    to_js(ranking_view(u64::from(seed), countries as usize, k as usize, parse(order)?, parse(frontier)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(&str, f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(id, x, y)| Point { id: id.into(), x, y }).collect()
    }

    #[test]
    fn three_point_frontier() {
        let view = frontier_view(&pts(&[("A", 1.0, 1.0), ("B", 3.0, 4.0), ("C", 2.0, 2.0)]), Frontier::Vrs).unwrap();
        assert_eq!(view.polyline, vec![[1.0, 1.0], [3.0, 4.0]]);
        let c = &view.points[2];
        assert!((c.theta - 1.25).abs() < 1e-9 && (c.target_y - 2.5).abs() < 1e-9);
        assert_eq!(c.peers.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(), ["A", "B"]);

        let crs = frontier_view(&pts(&[("A", 1.0, 1.0), ("B", 3.0, 4.0), ("C", 2.0, 2.0)]), Frontier::Crs).unwrap();
        assert_eq!(crs.polyline[1], [3.0, 4.0]);
    }

    #[test]
    fn flat_tail_reaches_largest_input() {
        let view = frontier_view(&pts(&[("A", 1.0, 2.0), ("B", 4.0, 1.0)]), Frontier::Vrs).unwrap();
        assert_eq!(view.polyline, vec![[1.0, 2.0], [4.0, 2.0]]);
        assert!(!view.points[1].efficient);
    }

    #[test]
    fn bad_points_are_errors() {
        assert!(frontier_view(&[], Frontier::Vrs).is_err());
        assert!(frontier_view(&pts(&[("A", -1.0, 1.0)]), Frontier::Vrs).is_err());
        assert!(frontier_view(&pts(&[("A", 1.0, 1.0), ("A", 2.0, 1.0)]), Frontier::Vrs).is_err());
    }

    #[test]
    fn screening_and_ranking_views() {
        let s = screening_view(3, 60, 0.9).unwrap();
        assert_eq!(s.matrix.len(), 20);
        assert_eq!(s.kept.len() + s.dropped.len(), 20);
        let r = ranking_view(3, 60, 4, SortOrder::Desc, Frontier::Vrs).unwrap();
        assert_eq!(r.selection.len(), 4.min(r.efficient.len()));
        assert!(r.selection.windows(2).all(|w| w[0].share >= w[1].share));
        assert!(screening_view(3, 2, 0.9).is_err());
    }

    #[test]
    fn json_entry_points_round_trip() {
        let out = to_js(frontier_view(&pts(&[("A", 1.0, 2.0), ("B", 1.0, 1.0)]), Frontier::Vrs)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["frontier"], "vrs");
        assert!((v["points"][1]["theta"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }
}
