use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Sequence,
    Regression,
}

/// Row distribution of a generated design.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignKind {
    /// `N(0, I)` rows.
    Independent,
    /// `N(0, LL' + I)` rows with `L` a `p × factors` standard normal matrix.
    Factor { factors: usize },
}

/// How penalty levels are picked in each replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tuning {
    /// Minimise the true risk over the grid.
    Oracle,
    /// Closed-form levels; sequence scenario only.
    PlugIn,
    Sure,
    Cv {
        folds: usize,
    },
}

/// Where SURE and the grid scale take the noise level from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseSource {
    Known,
    Estimated,
}

fn invalid(msg: String) -> LavaError {
    LavaError::InvalidInput(msg)
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Sequence => "sequence",
            Scenario::Regression => "regression",
        })
    }
}

impl FromStr for Scenario {
    type Err = LavaError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sequence" => Ok(Scenario::Sequence),
            "regression" => Ok(Scenario::Regression),
            other => Err(invalid(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Parses `name`, `name(k)` or `name:k`.
fn split_arg(s: &str) -> Result<(&str, Option<usize>)> {
    let s = s.trim();
    let (name, arg) = if let Some(open) = s.find('(') {
        let inner =
            s[open + 1..].strip_suffix(')').ok_or_else(|| invalid(format!("unbalanced parenthesis in {s:?}")))?;
        (&s[..open], Some(inner))
    } else if let Some((a, b)) = s.split_once(':') {
        (a, Some(b))
    } else {
        (s, None)
    };
    let arg = arg.map(|a| a.trim().parse::<usize>().map_err(|_| invalid(format!("bad count in {s:?}")))).transpose()?;
    Ok((name.trim(), arg))
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignKind::Independent => f.write_str("independent"),
            DesignKind::Factor { factors } => write!(f, "factor({factors})"),
        }
    }
}

impl FromStr for DesignKind {
    type Err = LavaError;
    fn from_str(s: &str) -> Result<Self> {
        match split_arg(s)? {
            ("independent", None) => Ok(DesignKind::Independent),
            ("factor", k) => {
                let factors = k.unwrap_or(3);
                if factors == 0 {
                    return Err(invalid("factor designs need at least one factor".into()));
                }
                Ok(DesignKind::Factor { factors })
            }
            _ => Err(invalid(format!("unknown design {s:?}"))),
        }
    }
}

impl fmt::Display for Tuning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tuning::Oracle => f.write_str("oracle"),
            Tuning::PlugIn => f.write_str("plugin"),
            Tuning::Sure => f.write_str("sure"),
            Tuning::Cv { folds } => write!(f, "cv({folds})"),
        }
    }
}

impl FromStr for Tuning {
    type Err = LavaError;
    fn from_str(s: &str) -> Result<Self> {
        match split_arg(s)? {
            ("oracle", None) => Ok(Tuning::Oracle),
            ("plugin" | "plug-in", None) => Ok(Tuning::PlugIn),
            ("sure", None) => Ok(Tuning::Sure),
            ("cv", k) => {
                let folds = k.unwrap_or(5);
                if folds < 2 {
                    return Err(invalid("cross-validation needs at least 2 folds".into()));
                }
                Ok(Tuning::Cv { folds })
            }
            _ => Err(invalid(format!("unknown tuning {s:?}"))),
        }
    }
}

impl fmt::Display for NoiseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseSource::Known => "known",
            NoiseSource::Estimated => "estimated",
        })
    }
}

impl FromStr for NoiseSource {
    type Err = LavaError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "known" => Ok(NoiseSource::Known),
            "estimated" => Ok(NoiseSource::Estimated),
            other => Err(invalid(format!("unknown noise source {other:?}"))),
        }
    }
}

/// Accepts `a,b,c` or `lo:hi:step` (inclusive of `hi` up to rounding).
pub fn parse_q_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| invalid(format!("bad number {t:?} in q grid")));
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(invalid(format!("q range {s:?} must be lo:hi:step")));
        };
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if !(step > 0.0) || hi < lo {
            return Err(invalid(format!("q range {s:?} needs step > 0 and hi >= lo")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| lo + i as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() || grid.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
        return Err(invalid(format!("q grid {s:?} must be nonempty and nonnegative")));
    }
    Ok(grid)
}

/// A simulation experiment.
///
/// Optional fields take scenario-dependent defaults; [`SimConfig::canonical`]
/// always prints the effective values.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub q_grid: Vec<f64>,
    pub design: DesignKind,
    pub reps: usize,
    pub seed: u64,
    pub tuning: Tuning,
    pub estimators: Vec<EstimatorKind>,
    pub sigma: Option<f64>,
    /// Level `c` of the plug-in λ₁.
    pub c: f64,
    pub grid_lambda1: Option<usize>,
    pub grid_lambda2: Option<usize>,
    pub noise: NoiseSource,
    pub normalize: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Regression,
            n: 100,
            p: 200,
            q_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            design: DesignKind::Independent,
            reps: 100,
            seed: 1,
            tuning: Tuning::Sure,
            estimators: EstimatorKind::SHRINKAGE.to_vec(),
            sigma: None,
            c: 0.05,
            grid_lambda1: None,
            grid_lambda2: None,
            noise: NoiseSource::Known,
            normalize: true,
        }
    }
}

pub const CONFIG_KEYS: [&str; 15] = [
    "scenario",
    "n",
    "p",
    "q_grid",
    "design",
    "reps",
    "seed",
    "tuning",
    "estimators",
    "sigma",
    "c",
    "grid_lambda1",
    "grid_lambda2",
    "noise",
    "normalize",
];

impl SimConfig {
    /// Defaults for `scenario` at the sizes used in the literature runs.
    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Regression => Self::default(),
            Scenario::Sequence => Self {
                scenario,
                n: 1,
                p: 100,
                q_grid: (0..=8).map(|i| i as f64 * 0.25).collect(),
                reps: 1,
                tuning: Tuning::Oracle,
                estimators: EstimatorKind::ALL.to_vec(),
                ..Self::default()
            },
        }
    }

    /// Reads `key = value` lines; `#` starts a comment. A `scenario` line
    /// anywhere selects the defaults the other keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = match pairs.iter().rev().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.parse()?,
            None => Scenario::Regression,
        };
        let mut cfg = Self::for_scenario(scenario);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let count = |v: &str| v.trim().parse::<usize>().map_err(|_| invalid(format!("{key}: bad count {v:?}")));
        let real = |v: &str| v.trim().parse::<f64>().map_err(|_| invalid(format!("{key}: bad number {v:?}")));
        match key.trim() {
            "scenario" => self.scenario = value.parse()?,
            "n" => self.n = count(value)?,
            "p" => self.p = count(value)?,
            "q_grid" => self.q_grid = parse_q_grid(value)?,
            "design" => self.design = value.parse()?,
            "reps" | "B" => self.reps = count(value)?,
            "seed" => self.seed = value.trim().parse().map_err(|_| invalid(format!("seed: bad value {value:?}")))?,
            "tuning" => self.tuning = value.parse()?,
            "folds" => {
                self.tuning = Tuning::Cv { folds: count(value)? };
            }
            "estimators" => {
                self.estimators =
                    value.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
            }
            "sigma" => self.sigma = Some(real(value)?),
            "c" => self.c = real(value)?,
            "grid_lambda1" => self.grid_lambda1 = Some(count(value)?),
            "grid_lambda2" => self.grid_lambda2 = Some(count(value)?),
            "noise" => self.noise = value.parse()?,
            "normalize" => {
                self.normalize = match value.trim() {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    other => return Err(invalid(format!("normalize: expected true/false, got {other:?}"))),
                }
            }
            other => return Err(invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(invalid("reps must be >= 1".into()));
        }
        if self.p == 0 || self.n == 0 {
            return Err(invalid("n and p must be >= 1".into()));
        }
        if self.q_grid.is_empty() {
            return Err(invalid("q_grid must be nonempty".into()));
        }
        if self.estimators.is_empty() {
            return Err(invalid("no estimators selected".into()));
        }
        if !(self.sigma() > 0.0 && self.sigma().is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {}", self.sigma())));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(invalid(format!("c must lie in (0,1), got {}", self.c)));
        }
        if self.grid_lambda1() == 0 || self.grid_lambda2() == 0 {
            return Err(invalid("grid sizes must be >= 1".into()));
        }
        match (self.scenario, self.tuning) {
            (Scenario::Sequence, Tuning::Sure | Tuning::Cv { .. }) => {
                Err(invalid(format!("tuning {} needs the regression scenario", self.tuning)))
            }
            (Scenario::Regression, Tuning::PlugIn) => Err(invalid("plug-in tuning needs the sequence scenario".into())),
            (Scenario::Regression, Tuning::Cv { folds }) if folds > self.n => {
                Err(invalid(format!("{folds} folds exceed n = {}", self.n)))
            }
            _ => Ok(()),
        }
    }

    /// Noise standard deviation: 0.1 for the sequence model, 1 for regression.
    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(match self.scenario {
            Scenario::Sequence => 0.1,
            Scenario::Regression => 1.0,
        })
    }

    /// Grid sizes: 50 per axis for the sequence oracle, 30 for regression.
    pub fn grid_lambda1(&self) -> usize {
        self.grid_lambda1.unwrap_or(self.default_grid_size())
    }

    pub fn grid_lambda2(&self) -> usize {
        self.grid_lambda2.unwrap_or(self.default_grid_size())
    }

    fn default_grid_size(&self) -> usize {
        match self.scenario {
            Scenario::Sequence => 50,
            Scenario::Regression => 30,
        }
    }

    /// Effective configuration, one `key=value` per line in [`CONFIG_KEYS`] order.
    pub fn canonical(&self) -> String {
        let q: Vec<String> = self.q_grid.iter().map(f64::to_string).collect();
        let est: Vec<&str> = self.estimators.iter().map(|e| e.name()).collect();
        let values = [
            self.scenario.to_string(),
            self.n.to_string(),
            self.p.to_string(),
            q.join(","),
            self.design.to_string(),
            self.reps.to_string(),
            self.seed.to_string(),
            self.tuning.to_string(),
            est.join(","),
            self.sigma().to_string(),
            self.c.to_string(),
            self.grid_lambda1().to_string(),
            self.grid_lambda2().to_string(),
            self.noise.to_string(),
            self.normalize.to_string(),
        ];
        CONFIG_KEYS.iter().zip(values).map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// SHA-256 of [`SimConfig::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Canonical configuration followed by its hash.
    pub fn metadata(&self) -> String {
        format!("{}config_hash={}\n", self.canonical(), self.hash())
    }
}
