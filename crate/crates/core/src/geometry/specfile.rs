//! System description files.
//!
//! ```toml
//! builtin = "sphere-height"
//! [params]
//! k = 4
//! ```
//!
//! or explicit charts with expression strings in `x`, `y`:
//!
//! ```toml
//! name = "saddle"
//! [[chart]]
//! domain = [-1, 1, -1, 1]
//! F = "x*y"
//! omega = "1"
//! theta = ["-y/2", "x/2"]
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::{builtin, Chart, Rect, SurfaceSystem};
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    name: Option<String>,
    builtin: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    chart: Vec<ChartFile>,
    euler_characteristic: Option<i64>,
    /// Keys `"a-b"` for the constant phase added when passing from chart a to b.
    #[serde(default)]
    transition_phases: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartFile {
    name: Option<String>,
    domain: [f64; 4],
    #[serde(default)]
    periodic: [bool; 2],
    #[serde(rename = "F")]
    f: String,
    omega: String,
    theta: [String; 2],
    area_region: Option<[f64; 4]>,
}

fn rect(v: [f64; 4]) -> Result<Rect> {
    if !(v[0] < v[1] && v[2] < v[3]) {
        return Err(Error::InvalidInput(format!("empty rectangle {v:?}")));
    }
    Ok(Rect::new(v[0], v[1], v[2], v[3]))
}

fn chart_from(i: usize, c: ChartFile) -> Result<Chart> {
    let f = Expr::parse(&c.f)?;
    let w = Expr::parse(&c.omega)?;
    let tx = Expr::parse(&c.theta[0])?;
    let ty = Expr::parse(&c.theta[1])?;
    Ok(Chart {
        name: c.name.unwrap_or_else(|| format!("chart{i}")),
        domain: rect(c.domain)?,
        periodic: c.periodic,
        f: Arc::new(move |x, y| f.eval(x, y)),
        omega: Arc::new(move |x, y| w.eval(x, y)),
        theta: Arc::new(move |x, y| [tx.eval(x, y), ty.eval(x, y)]),
        embed: None,
        locate: None,
        margin: None,
        area_region: c.area_region.map(rect).transpose()?,
    })
}

/// Parses a system description from TOML text.
pub fn parse_system(text: &str) -> Result<SurfaceSystem> {
    let file: SystemFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut sys = match (&file.builtin, file.chart.is_empty()) {
        (Some(b), true) => builtin(b, &file.params)?,
        (None, false) => {
            let charts =
                file.chart.into_iter().enumerate().map(|(i, c)| chart_from(i, c)).collect::<Result<Vec<_>>>()?;
            let mut s = SurfaceSystem::new(file.name.clone().unwrap_or_else(|| "custom".into()), charts);
            s.builtin_params = file.params.clone();
            s
        }
        (Some(_), false) => return Err(Error::InvalidInput("give either `builtin` or `[[chart]]`, not both".into())),
        (None, true) => return Err(Error::InvalidInput("system file defines no charts".into())),
    };
    if let Some(n) = file.name {
        sys.name = n;
    }
    if let Some(chi) = file.euler_characteristic {
        sys.euler_characteristic = Some(chi);
    }
    for (k, v) in file.transition_phases {
        let (a, b) = k
            .split_once('-')
            .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Error::Parse(format!("transition phase key `{k}` is not `a-b`")))?;
        if a >= sys.charts.len() || b >= sys.charts.len() {
            return Err(Error::InvalidInput(format!("transition phase `{k}` names a missing chart")));
        }
        sys.transition_phases.insert((a, b), v);
    }
    Ok(sys)
}

pub fn load_system(path: &Path) -> Result<SurfaceSystem> {
    parse_system(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{detect_singularities, SingularKind};

    #[test]
    fn explicit_saddle_chart() {
        let sys = parse_system(
            r#"
            name = "saddle"
            [[chart]]
            domain = [-1, 1, -1, 1]
            F = "x*y"
            omega = "1"
            theta = ["-y/2", "x/2"]
            "#,
        )
        .unwrap();
        assert_eq!(sys.name, "saddle");
        let pts = detect_singularities(&sys).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kind, SingularKind::Hyperbolic);
    }

    #[test]
    fn builtin_with_params() {
        let sys = parse_system("builtin = \"sphere-height\"\n[params]\nk = 3\n").unwrap();
        assert_eq!(sys.builtin_params["k"], 3.0);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse_system("builtin = 3").is_err());
        assert!(parse_system("name = \"x\"").is_err());
        assert!(parse_system("[[chart]]\ndomain=[0,1,0,1]\nF=\"x+\"\nomega=\"1\"\ntheta=[\"0\",\"x\"]").is_err());
    }
}
