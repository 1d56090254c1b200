//! Flat key/value experiment configuration with dotted sections.
//!
//! The format is plain text, one `section.key = value` pair per line, `#`
//! comments, repeated `potential.term` lines for the monomials. Vector and
//! matrix values are whitespace-separated numbers (matrices row-major).

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{ModelConfig, ReducedState};
use crate::error::{Error, Result};
use crate::integrators::{IntegratorSpec, Method};
use crate::multi_index::MultiIndex;
use crate::packet::{normalizing_delta, PacketParams};
use crate::potential::{PolynomialPotential, PotentialTerm};
use crate::siegel::SiegelPoint;

/// Parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub q0: DVector<f64>,
    pub p0: DVector<f64>,
    pub a0: DMatrix<f64>,
    pub b0: DMatrix<f64>,
    pub phi0: f64,
    /// `None` means auto-normalize: solve `N(B, delta) = 1`.
    pub delta0: Option<f64>,
    pub integrator: IntegratorSpec,
    pub egorov_samples: usize,
    pub egorov_seed: u64,
    pub output_dir: PathBuf,
    pub plots: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut hbar = None;
        let mut mass = 1.0;
        let mut n_entries: Option<Vec<usize>> = None;
        let mut terms: Vec<(usize, f64, Vec<u32>)> = Vec::new();
        let mut q0 = None;
        let mut p0 = None;
        let mut a0: Option<Vec<f64>> = None;
        let mut b0: Option<Vec<f64>> = None;
        let mut phi0 = 0.0;
        let mut delta0: Option<f64> = None;
        let mut auto_delta = true;
        let mut method = Method::VariationalSplitting;
        let mut dt = 0.01;
        let mut t_final = 3.39;
        let mut samples = 100_000usize;
        let mut seed = 42u64;
        let mut output_dir = PathBuf::from("out");
        let mut plots = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got {raw:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| Error::Config {
                line: line_no,
                message,
            };
            match key {
                "model.hbar" => hbar = Some(parse_f64(value).map_err(bad)?),
                "model.mass" => mass = parse_f64(value).map_err(bad)?,
                "model.n" => {
                    n_entries = Some(
                        split_values(value)
                            .iter()
                            .map(|v| v.parse::<usize>().map_err(|e| e.to_string()))
                            .collect::<std::result::Result<_, _>>()
                            .map_err(bad)?,
                    )
                }
                "potential.term" => {
                    let vals = split_values(value);
                    if vals.len() < 2 {
                        return Err(bad("potential.term needs `coeff e1 [e2 ...]`".into()));
                    }
                    let coeff = parse_f64(vals[0]).map_err(bad)?;
                    let exps = vals[1..]
                        .iter()
                        .map(|v| v.parse::<u32>().map_err(|e| e.to_string()))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(bad)?;
                    terms.push((line_no, coeff, exps));
                }
                "initial.q" => q0 = Some(parse_vec(value).map_err(bad)?),
                "initial.p" => p0 = Some(parse_vec(value).map_err(bad)?),
                "initial.a" => a0 = Some(parse_f64_list(value).map_err(bad)?),
                "initial.b" => b0 = Some(parse_f64_list(value).map_err(bad)?),
                "initial.phi" => phi0 = parse_f64(value).map_err(bad)?,
                "initial.delta" => {
                    if value == "auto" {
                        auto_delta = true;
                    } else {
                        auto_delta = false;
                        delta0 = Some(parse_f64(value).map_err(bad)?);
                    }
                }
                "integrator.method" => {
                    method = Method::parse(value).map_err(|e| bad(e.to_string()))?
                }
                "integrator.dt" => dt = parse_f64(value).map_err(bad)?,
                "integrator.t_final" => t_final = parse_f64(value).map_err(bad)?,
                "egorov.samples" => {
                    samples = value.parse().map_err(|e| bad(format!("bad count: {e}")))?
                }
                "egorov.seed" => seed = value.parse().map_err(|e| bad(format!("bad seed: {e}")))?,
                "output.dir" => output_dir = PathBuf::from(value),
                "output.plots" => {
                    plots = value
                        .parse()
                        .map_err(|e| bad(format!("bad boolean: {e}")))?
                }
                other => {
                    return Err(bad(format!("unknown key {other:?}")));
                }
            }
        }

        let hbar = hbar.ok_or(Error::Config {
            line: 0,
            message: "missing model.hbar".into(),
        })?;
        let n_entries = n_entries.ok_or(Error::Config {
            line: 0,
            message: "missing model.n".into(),
        })?;
        let d = n_entries.len();
        let n = MultiIndex::new(n_entries).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?;
        if terms.is_empty() {
            return Err(Error::Config {
                line: 0,
                message: "missing potential.term entries".into(),
            });
        }
        let mut parsed_terms = Vec::new();
        for (line, coeff, exps) in terms {
            if exps.len() != d {
                return Err(Error::Config {
                    line,
                    message: format!("potential term has {} exponents, model has d = {d}", exps.len()),
                });
            }
            parsed_terms.push(PotentialTerm {
                coeff,
                exponents: exps,
            });
        }
        let potential = PolynomialPotential::new(parsed_terms, d).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?;
        let model = ModelConfig::new(hbar, mass, n, potential).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?;

        let into_cfg_err = |e: Error| Error::Config {
            line: 0,
            message: e.to_string(),
        };
        let q0 = to_vector(q0.unwrap_or_else(|| vec![0.0; d]), d).map_err(into_cfg_err)?;
        let p0 = to_vector(p0.unwrap_or_else(|| vec![0.0; d]), d).map_err(into_cfg_err)?;
        let a0 = to_matrix(a0.unwrap_or_else(|| zero_matrix_entries(d)), d).map_err(into_cfg_err)?;
        let b0 = to_matrix(b0.unwrap_or_else(|| identity_entries(d)), d).map_err(into_cfg_err)?;
        // Reject unusable initial width data at parse time.
        SiegelPoint::new(a0.clone(), b0.clone()).map_err(into_cfg_err)?;

        Ok(ExperimentConfig {
            model,
            q0,
            p0,
            a0,
            b0,
            phi0,
            delta0: if auto_delta { None } else { delta0 },
            integrator: IntegratorSpec::new(method, dt, t_final).map_err(into_cfg_err)?,
            egorov_samples: samples,
            egorov_seed: seed,
            output_dir,
            plots,
        })
    }

    /// Initial packet with `delta` resolved (auto-normalized when unset).
    pub fn initial_packet(&self) -> Result<PacketParams> {
        let siegel = SiegelPoint::new(self.a0.clone(), self.b0.clone())?;
        let delta = self
            .delta0
            .unwrap_or_else(|| normalizing_delta(siegel.b(), self.model.hbar));
        PacketParams::new(self.q0.clone(), self.p0.clone(), siegel, self.phi0, delta)
    }

    /// Initial reduced state built from the same data.
    pub fn initial_reduced(&self) -> Result<ReducedState> {
        ReducedState::from_siegel(
            self.q0.clone(),
            self.p0.clone(),
            self.a0.clone(),
            self.b0.clone(),
            &self.model.n,
        )
    }

    /// The escape-experiment configuration from the study: cubic well,
    /// `(q0, p0) = (0.25, 1)`, `(A0, B0) = (0, 1)`, auto-normalized delta.
    pub fn escape_experiment(hbar: f64, n: usize) -> Self {
        let model = ModelConfig::new(
            hbar,
            1.0,
            MultiIndex::scalar(n),
            PolynomialPotential::cubic_well(),
        )
        .expect("static parameters");
        ExperimentConfig {
            model,
            q0: DVector::from_element(1, 0.25),
            p0: DVector::from_element(1, 1.0),
            a0: DMatrix::from_element(1, 1, 0.0),
            b0: DMatrix::from_element(1, 1, 1.0),
            phi0: 0.0,
            delta0: None,
            integrator: IntegratorSpec::new(Method::VariationalSplitting, 0.01, 3.39)
                .expect("static parameters"),
            egorov_samples: 100_000,
            egorov_seed: 42,
            output_dir: PathBuf::from("out"),
            plots: false,
        }
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|e| format!("bad number {v:?}: {e}"))
}

fn split_values(v: &str) -> Vec<&str> {
    v.split_whitespace().collect()
}

fn parse_f64_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    split_values(v).iter().map(|s| parse_f64(s)).collect()
}

fn parse_vec(v: &str) -> std::result::Result<Vec<f64>, String> {
    parse_f64_list(v)
}

fn to_vector(vals: Vec<f64>, d: usize) -> Result<DVector<f64>> {
    if vals.len() != d {
        return Err(Error::dimension(format!(
            "expected {d} entries, got {}",
            vals.len()
        )));
    }
    Ok(DVector::from_column_slice(&vals))
}

fn to_matrix(vals: Vec<f64>, d: usize) -> Result<DMatrix<f64>> {
    if vals.len() == 1 && d == 1 {
        return Ok(DMatrix::from_element(1, 1, vals[0]));
    }
    if vals.len() != d * d {
        return Err(Error::dimension(format!(
            "expected {} matrix entries, got {}",
            d * d,
            vals.len()
        )));
    }
    Ok(DMatrix::from_row_slice(d, d, &vals))
}

fn zero_matrix_entries(d: usize) -> Vec<f64> {
    vec![0.0; d * d]
}

fn identity_entries(d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        out[i * d + i] = 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# escape experiment
model.hbar = 0.05
model.mass = 1
model.n = 5
potential.term = 2.0 2
potential.term = 1.0 3
potential.term = 0.1 4
initial.q = 0.25
initial.p = 1
initial.a = 0
initial.b = 1
initial.phi = 0
initial.delta = auto
integrator.method = variational_splitting
integrator.dt = 0.01
integrator.t_final = 3.39
egorov.samples = 100000
egorov.seed = 12345
output.dir = out
output.plots = true
";

    #[test]
    fn parses_escape_config() {
        let cfg = ExperimentConfig::parse(EXAMPLE).unwrap();
        assert_eq!(cfg.model.hbar, 0.05);
        assert_eq!(cfg.model.n.entries(), &[5]);
        assert_eq!(cfg.model.potential.terms().len(), 3);
        assert_eq!(cfg.q0[0], 0.25);
        assert_eq!(cfg.egorov_samples, 100_000);
        assert_eq!(cfg.egorov_seed, 12345);
        assert!(cfg.plots);
        let y = cfg.initial_packet().unwrap();
        approx::assert_relative_eq!(y.norm_squared(0.05), 1.0, epsilon = 1e-14);
        let s = cfg.initial_reduced().unwrap();
        approx::assert_relative_eq!(s.bn[(0, 0)], 1.0 / 11.0, epsilon = 1e-14);
    }

    #[test]
    fn reports_line_of_bad_key() {
        let text = "model.hbar = 0.05\nmodel.unknown = 3\n";
        match ExperimentConfig::parse(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn reports_missing_required_keys() {
        assert!(ExperimentConfig::parse("model.mass = 1\n").is_err());
    }

    #[test]
    fn exponent_count_must_match_dimension() {
        let text = "\
model.hbar = 0.05
model.n = 1 2
potential.term = 1.0 2
";
        match ExperimentConfig::parse(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn escape_preset_matches_parsed_example() {
        let parsed = ExperimentConfig::parse(EXAMPLE).unwrap();
        let preset = ExperimentConfig::escape_experiment(0.05, 5);
        assert_eq!(parsed.model.hbar, preset.model.hbar);
        assert_eq!(parsed.model.n, preset.model.n);
        assert_eq!(
            parsed.model.potential.terms(),
            preset.model.potential.terms()
        );
        assert_eq!(parsed.q0, preset.q0);
    }
}
