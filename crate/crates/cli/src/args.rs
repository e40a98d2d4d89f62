use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qilab::PotentialConfig;

#[derive(Debug, Parser)]
#[command(name = "qilab", version, about = "Vacuum energy of a switched-off double-delta well")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "QILAB_OUT_DIR", default_value = "qilab-out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
#[command(rename_all = "kebab-case")]
pub enum Command {
    /// Static energy-density profile and eta values.
    StaticProfile {
        #[command(flatten)]
        well: WellArgs,
    },
    /// Evolved profiles at several times after the switch-off.
    Evolve {
        #[command(flatten)]
        well: WellArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,0.25,0.5,1,10")]
        t_list: Vec<f64>,
    },
    /// Lorentzian spatial average against its bound.
    QiSpatial {
        #[command(flatten)]
        well: WellArgs,
        /// Comma list or `geom:lo:hi:n`.
        #[arg(long, default_value = "geom:0.01:1000:61")]
        tau_grid: String,
    },
    /// Quartic time average at x = tau/2 against its bound.
    QiTemporal {
        #[command(flatten)]
        well: WellArgs,
        /// Comma list or `geom:lo:hi:n`; every tau must exceed a.
        #[arg(long, default_value = "geom:2:1000:20")]
        tau_grid: String,
    },
    /// Negative pulses and positive regions at one time.
    QuantumInterest {
        #[command(flatten)]
        well: WellArgs,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        /// `lo,hi`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "-20,20")]
        window: Vec<f64>,
    },
    /// Mode-sum versus point-split energy shift of a massive field.
    RegCompare {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        m: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.1,0.5,0.99,1.01,2,10")]
        lambda_grid: Vec<f64>,
        /// Splitting distances; defaults to 0.1,0.05,0.025,0.0125 divided by m.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        alpha_schedule: Option<Vec<f64>>,
    },
    /// Lower bound for one sampling function.
    Bound {
        #[arg(long, value_enum, default_value_t = BoundKind::Lorentzian)]
        kind: BoundKind,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        tau: f64,
    },
    /// Rerun a recorded command and compare output digests.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::StaticProfile { .. } => "static-profile",
            Command::Evolve { .. } => "evolve",
            Command::QiSpatial { .. } => "qi-spatial",
            Command::QiTemporal { .. } => "qi-temporal",
            Command::QuantumInterest { .. } => "quantum-interest",
            Command::RegCompare { .. } => "reg-compare",
            Command::Bound { .. } => "bound",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Lorentzian,
    Quartic,
}

/// Well geometry. Without `--lambda` or `--strength`, `Lambda = 1`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WellArgs {
    /// Coupling of each delta.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "strength")]
    pub lambda: Option<f64>,
    /// Dimensionless strength `lambda * a / 2`.
    #[arg(long, allow_negative_numbers = true)]
    pub strength: Option<f64>,
    /// Separation of the deltas.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
}

impl WellArgs {
    pub fn config(&self) -> qilab::Result<PotentialConfig> {
        match (self.lambda, self.strength) {
            (Some(l), _) => PotentialConfig::new(l, self.a),
            (None, Some(s)) => PotentialConfig::from_strength(s, self.a),
            (None, None) => PotentialConfig::from_strength(1.0, self.a),
        }
    }
}

/// Parse a comma list or `geom:lo:hi:n`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad number `{s}`: {e}"));
    if let Some(rest) = spec.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected geom:lo:hi:n, got `{spec}`"));
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|e| format!("bad count `{n}`: {e}"))?;
        if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) || n == 0 {
            return Err(format!("geom grid needs 0 < lo <= hi and n >= 1, got `{spec}`"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi / lo).ln() / (n - 1) as f64;
        return Ok((0..n)
            .map(|i| if i + 1 == n { hi } else { lo * (step * i as f64).exp() })
            .collect());
    }
    let values = spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty grid".into());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_hits_both_ends() {
        let g = parse_grid("geom:0.01:100:5").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[4], 100.0);
        assert!((g[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comma_grid_and_errors() {
        assert_eq!(parse_grid("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_grid("geom:0:1:3").is_err());
        assert!(parse_grid("geom:1:2").is_err());
        assert!(parse_grid("x").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn well_defaults_to_unit_strength() {
        let w = WellArgs { lambda: None, strength: None, a: 1.0 };
        assert_eq!(w.config().unwrap().strength(), 1.0);
        let w = WellArgs { lambda: Some(-1.0), strength: None, a: 1.0 };
        assert!(w.config().is_err());
    }

    #[test]
    fn commands_round_trip_through_json() {
        let c = Command::QiSpatial {
            well: WellArgs { lambda: Some(2.0), strength: None, a: 0.5 },
            tau_grid: "1,2".into(),
        };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"command\":\"qi-spatial\""));
        let back: Command = serde_json::from_str(&s).unwrap();
        assert_eq!(back.name(), "qi-spatial");
    }
}
