//! Flat key=value experiment configuration.
//!
//! One line per setting, `#` starts a comment, later assignments win.
//! Command-line `--set key=value` overrides are applied after the file.
//! Every key is validated on parse; unknown keys and out-of-range values
//! are rejected naming the offending key.

use crate::error::{NullwaveError, Result};
use crate::grid::{Geometry, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Cauchy,
    NullPlane,
    NullCone,
    NullPlaneDeriv,
    NullConeDeriv,
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Cauchy => "cauchy",
            Problem::NullPlane => "nullplane",
            Problem::NullCone => "nullcone",
            Problem::NullPlaneDeriv => "nullplane_deriv",
            Problem::NullConeDeriv => "nullcone_deriv",
        }
    }

    fn parse(v: &str) -> Option<Problem> {
        Some(match v {
            "cauchy" => Problem::Cauchy,
            "nullplane" => Problem::NullPlane,
            "nullcone" => Problem::NullCone,
            "nullplane_deriv" => Problem::NullPlaneDeriv,
            "nullcone_deriv" => Problem::NullConeDeriv,
            _ => return None,
        })
    }

    pub fn is_cone(&self) -> bool {
        matches!(self, Problem::NullCone | Problem::NullConeDeriv)
    }

    pub fn is_derivative(&self) -> bool {
        matches!(self, Problem::NullPlaneDeriv | Problem::NullConeDeriv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Zero,
    Random,
    /// travelling-wave oracle of the configured chart
    Oracle,
    /// axis-symmetric dipole (cone charts only)
    Dipole,
}

impl DataKind {
    pub fn name(&self) -> &'static str {
        match self {
            DataKind::Zero => "zero",
            DataKind::Random => "random",
            DataKind::Oracle => "oracle",
            DataKind::Dipole => "dipole",
        }
    }
}

/// Fully-validated run description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// (N_u, N_z or N_r, N_x or N_s, N_y or N_phi); N_u = 0 means automatic
    pub n: [usize; 4],
    pub order: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub dissipation: f64,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub r0: f64,
    pub data: DataKind,
    pub seed: u64,
    /// sweep size for verify-estimates
    pub count: usize,
    /// axis-0 refinement levels for the convergence study
    pub levels: Vec<usize>,
    /// residual-ratio acceptance window; defaults depend on order
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    /// coefficient of the h^2-scaled margin tolerance
    pub tol_margin: f64,
    /// pointwise error ceiling for the oracle-reproduction check
    pub tol_oracle: f64,
}

pub const DEFAULTS: &str = "\
problem = nullplane    # cauchy | nullplane | nullcone | nullplane_deriv | nullcone_deriv
n_u = 0                # marching steps; 0 picks the smallest count the cfl allows
n_z = 16               # cells along z (plane), r (cone) or x (cauchy)
n_x = 16               # cells along x (plane/cauchy) or s (cone)
n_y = 16               # cells along y (plane/cauchy) or phi (cone)
order = 2              # scheme order, 2 or 4
t_final = 1.0          # run duration
cfl = 0.5              # marching step over limiting spacing
dissipation = 0.02     # artificial dissipation strength
lx = 1.0               # periodic extents
ly = 1.0
lz = 1.0
r0 = 1.0               # worldtube radius (cone)
data = random          # zero | random | oracle | dipole
seed = 1
count = 100            # runs per verify-estimates sweep
levels = 16,32,64      # axis-0 resolutions for the convergence study
# ratio_lo / ratio_hi default to [2.8, 5.2] at order 2, [11, 21] at order 4
tol_margin = 0.5       # margin tolerance coefficient on h^2 * data scale
tol_oracle = 1.0e-1    # transverse-wave pointwise ceiling at order 2, N = 64
";

fn fail(key: &str, msg: impl Into<String>) -> NullwaveError {
    NullwaveError::Config { key: key.to_string(), msg: msg.into() }
}

struct Builder {
    cfg: ExperimentConfig,
    ratio_window_set: bool,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            cfg: ExperimentConfig {
                problem: Problem::NullPlane,
                n: [0, 16, 16, 16],
                order: 2,
                t_final: 1.0,
                cfl: 0.5,
                dissipation: 0.02,
                lx: 1.0,
                ly: 1.0,
                lz: 1.0,
                r0: 1.0,
                data: DataKind::Random,
                seed: 1,
                count: 100,
                levels: vec![16, 32, 64],
                ratio_lo: 0.0,
                ratio_hi: 0.0,
                tol_margin: 0.5,
                tol_oracle: 1.0e-1,
            },
            ratio_window_set: false,
        }
    }

    fn positive_real(key: &str, v: &str) -> Result<f64> {
        let x: f64 = v.parse().map_err(|_| fail(key, format!("not a number: `{v}`")))?;
        if !(x > 0.0) || !x.is_finite() {
            return Err(fail(key, format!("must be positive and finite, got {v}")));
        }
        Ok(x)
    }

    fn cell_count(key: &str, v: &str) -> Result<usize> {
        let n: usize = v.parse().map_err(|_| fail(key, format!("not a cell count: `{v}`")))?;
        if n < 2 {
            return Err(fail(key, "needs at least 2 cells"));
        }
        Ok(n)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let c = &mut self.cfg;
        match key {
            "problem" => {
                c.problem = Problem::parse(value).ok_or_else(|| {
                    fail(
                        key,
                        format!(
                            "unknown problem `{value}`; expected cauchy, nullplane, \
                             nullcone, nullplane_deriv or nullcone_deriv"
                        ),
                    )
                })?;
            }
            "n_u" => {
                c.n[0] =
                    value.parse().map_err(|_| fail(key, format!("not a step count: `{value}`")))?;
            }
            "n_z" | "n_r" => c.n[1] = Self::cell_count(key, value)?,
            "n_x" | "n_s" => c.n[2] = Self::cell_count(key, value)?,
            "n_y" | "n_phi" => c.n[3] = Self::cell_count(key, value)?,
            "order" => {
                c.order = value
                    .parse()
                    .map_err(|_| fail(key, format!("not an integer: `{value}`")))?;
                if c.order != 2 && c.order != 4 {
                    return Err(fail(key, format!("supported orders are {{2, 4}}, got {value}")));
                }
            }
            "t_final" => c.t_final = Self::positive_real(key, value)?,
            "cfl" => c.cfl = Self::positive_real(key, value)?,
            "dissipation" => {
                let x: f64 =
                    value.parse().map_err(|_| fail(key, format!("not a number: `{value}`")))?;
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(fail(key, format!("must be >= 0, got {value}")));
                }
                c.dissipation = x;
            }
            "lx" => c.lx = Self::positive_real(key, value)?,
            "ly" => c.ly = Self::positive_real(key, value)?,
            "lz" => c.lz = Self::positive_real(key, value)?,
            "r0" => c.r0 = Self::positive_real(key, value)?,
            "data" => {
                c.data = match value {
                    "zero" => DataKind::Zero,
                    "random" => DataKind::Random,
                    "oracle" => DataKind::Oracle,
                    "dipole" => DataKind::Dipole,
                    _ => {
                        return Err(fail(
                            key,
                            format!("unknown data kind `{value}`; expected zero, random, \
                                     oracle or dipole"),
                        ))
                    }
                };
            }
            "seed" => {
                c.seed =
                    value.parse().map_err(|_| fail(key, format!("not a seed: `{value}`")))?;
            }
            "count" => {
                c.count =
                    value.parse().map_err(|_| fail(key, format!("not a count: `{value}`")))?;
                if c.count == 0 {
                    return Err(fail(key, "must be at least 1"));
                }
            }
            "levels" => {
                let mut levels = Vec::new();
                for part in value.split(',') {
                    levels.push(Self::cell_count(key, part.trim())?);
                }
                if levels.len() < 2 {
                    return Err(fail(key, "need at least two refinement levels"));
                }
                for w in levels.windows(2) {
                    if w[1] <= w[0] {
                        return Err(fail(key, "levels must be strictly increasing"));
                    }
                }
                c.levels = levels;
            }
            "ratio_lo" => {
                c.ratio_lo = Self::positive_real(key, value)?;
                self.ratio_window_set = true;
            }
            "ratio_hi" => {
                c.ratio_hi = Self::positive_real(key, value)?;
                self.ratio_window_set = true;
            }
            "tol_margin" => c.tol_margin = Self::positive_real(key, value)?,
            "tol_oracle" => c.tol_oracle = Self::positive_real(key, value)?,
            _ => return Err(fail(key, "unknown key")),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<ExperimentConfig> {
        if !self.ratio_window_set {
            let (lo, hi) = if self.cfg.order == 2 { (2.8, 5.2) } else { (11.0, 21.0) };
            self.cfg.ratio_lo = lo;
            self.cfg.ratio_hi = hi;
        } else if self.cfg.ratio_lo == 0.0 || self.cfg.ratio_hi == 0.0 {
            return Err(fail("ratio_lo", "set both ratio_lo and ratio_hi or neither"));
        }
        if self.cfg.ratio_hi <= self.cfg.ratio_lo {
            return Err(fail("ratio_hi", "must exceed ratio_lo"));
        }
        if self.cfg.data == DataKind::Dipole && !self.cfg.problem.is_cone() {
            return Err(fail("data", "dipole data exists on the cone charts only"));
        }
        Ok(self.cfg)
    }
}

fn apply_line(b: &mut Builder, line: &str, where_: &str) -> Result<()> {
    let stripped = match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    };
    let stripped = stripped.trim();
    if stripped.is_empty() {
        return Ok(());
    }
    let (key, value) = stripped.split_once('=').ok_or_else(|| NullwaveError::Config {
        key: stripped.to_string(),
        msg: format!("expected key = value in {where_}"),
    })?;
    b.set(key.trim(), value.trim())
}

/// Parse an optional config file, then apply `--set key=value` overrides.
pub fn parse_config(path: Option<&str>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut b = Builder::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| NullwaveError::ConfigFile {
            path: path.to_string(),
            msg: e.to_string(),
        })?;
        for line in text.lines() {
            apply_line(&mut b, line, "config file")?;
        }
    }
    for item in overrides {
        apply_line(&mut b, item, "--set override")?;
    }
    b.finish()
}

/// Build the grid for one run of the configured problem.
pub fn build_grid(cfg: &ExperimentConfig) -> Result<GridSpec> {
    let geometry = match cfg.problem {
        Problem::Cauchy => Geometry::Cauchy { lx: cfg.lx, ly: cfg.ly, lz: cfg.lz },
        Problem::NullPlane | Problem::NullPlaneDeriv => {
            Geometry::Plane { lx: cfg.lx, ly: cfg.ly }
        }
        Problem::NullCone | Problem::NullConeDeriv => Geometry::Cone { r0: cfg.r0 },
    };
    let n_march = if cfg.n[0] == 0 { None } else { Some(cfg.n[0]) };
    GridSpec::new(
        geometry,
        cfg.t_final,
        [cfg.n[1], cfg.n[2], cfg.n[3]],
        n_march,
        cfg.order,
        cfg.cfl,
        cfg.dissipation,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_fill() {
        let cfg = parse_config(None, &[]).unwrap();
        assert_eq!(cfg.problem, Problem::NullPlane);
        assert_eq!(cfg.n, [0, 16, 16, 16]);
        assert_eq!(cfg.order, 2);
        assert_eq!(cfg.ratio_lo, 2.8);
        assert_eq!(cfg.levels, vec![16, 32, 64]);
    }

    #[test]
    fn defaults_text_matches_builder() {
        let mut b = Builder::new();
        for line in DEFAULTS.lines() {
            apply_line(&mut b, line, "defaults").unwrap();
        }
        let from_text = b.finish().unwrap();
        let built = parse_config(None, &[]).unwrap();
        assert_eq!(from_text.n, built.n);
        assert_eq!(from_text.t_final, built.t_final);
        assert_eq!(from_text.count, built.count);
    }

    #[test]
    fn order_three_is_rejected_with_choices() {
        let err = parse_config(None, &["order=3".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("order") && msg.contains("{2, 4}"), "{msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(None, &["n_t=4".into()]).unwrap_err();
        assert!(err.to_string().contains("n_t"), "{err}");
    }

    #[test]
    fn zero_r0_is_rejected() {
        let err = parse_config(None, &["problem=nullcone".into(), "r0=0".into()]).unwrap_err();
        assert!(err.to_string().contains("r0"), "{err}");
    }

    #[test]
    fn ratio_window_follows_order() {
        let cfg = parse_config(None, &["order=4".into()]).unwrap();
        assert_eq!((cfg.ratio_lo, cfg.ratio_hi), (11.0, 21.0));
    }

    #[test]
    fn overrides_win_over_file() {
        let dir = std::env::temp_dir().join("nullwave-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.cfg");
        std::fs::write(&path, "problem = nullcone\nn_r = 8\n# comment\nseed = 3\n").unwrap();
        let cfg =
            parse_config(Some(path.to_str().unwrap()), &["seed=9".into()]).unwrap();
        assert_eq!(cfg.problem, Problem::NullCone);
        assert_eq!(cfg.n[1], 8);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let err = parse_config(Some("/does/not/exist.cfg"), &[]).unwrap_err();
        assert!(matches!(err, NullwaveError::ConfigFile { .. }), "{err}");
    }

    #[test]
    fn dipole_needs_a_cone_chart() {
        let err = parse_config(None, &["data=dipole".into()]).unwrap_err();
        assert!(err.to_string().contains("cone"), "{err}");
    }
}
