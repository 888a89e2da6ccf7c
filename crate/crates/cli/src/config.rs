//! Command line and `key = value` config files.
//!
//! Every scenario parameter can come from a flag or from the file given with
//! `--config`; a flag wins over the file, the file wins over the default.
//! Keys use `snake_case` (dashes are accepted too). `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ivp_core::blackwell::{
    binary_symmetric, fully_informative, middle_reveal, pool_pair_reveal, random_mlrp_experiment, threshold_reveal,
    uninformative,
};
use ivp_core::Experiment64;
use serde::{Serialize, Serializer};

#[derive(Debug, Parser)]
#[command(name = "ivp", version, about = "Cross-posterior expectation checks, testing and signaling games")]
pub struct Cli {
    /// Output directory [default: $IVP_OUT_DIR, then `out`]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel trials [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Plain-text `key = value` file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded campaign over the full inequality chain and the disagreement ordering
    VerifyIvp(VerifyIvpArgs),
    /// The middle-reveal example and the direction/undershooting counterexample constructions
    Counterexamples(CounterexampleArgs),
    /// Blackwell dominance by LP plus random garbling round trips
    BlackwellCheck(BlackwellArgs),
    /// Cutoff equilibria across test accuracies and the certifier optimum
    TestingGame(TestingArgs),
    /// Least-cost separating equilibrium and informativeness comparisons
    SignalingGame(SignalingArgs),
    /// Reversal checks for a convex payoff and a three-state experiment
    #[command(name = "appendix-b")]
    Reversals(ReversalArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyIvp(_) => "verify-ivp",
            Command::Counterexamples(_) => "counterexamples",
            Command::BlackwellCheck(_) => "blackwell-check",
            Command::TestingGame(_) => "testing-game",
            Command::SignalingGame(_) => "signaling-game",
            Command::Reversals(_) => "appendix-b",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct VerifyIvpArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_states: Option<usize>,
    #[arg(long)]
    pub max_signals: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct CounterexampleArgs {
    /// middle_reveal, direction, undershoot or sampled
    #[arg(long)]
    pub example: Option<ExampleKind>,
    /// Comma-separated x values for the middle-reveal example
    #[arg(long)]
    pub x: Option<FloatList>,
    /// State values for direction/undershoot
    #[arg(long)]
    pub states: Option<FloatList>,
    #[arg(long)]
    pub prior_a: Option<FloatList>,
    #[arg(long)]
    pub prior_b: Option<FloatList>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_states: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct BlackwellArgs {
    #[arg(long)]
    pub more: Option<ExperimentSpec>,
    #[arg(long)]
    pub less: Option<ExperimentSpec>,
    /// Random round trips
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// States in the round-trip experiments
    #[arg(long)]
    pub states: Option<usize>,
    /// Largest signal count in the round-trip experiments
    #[arg(long)]
    pub signals: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct TestingArgs {
    #[arg(long)]
    pub cost: Option<f64>,
    /// Type grid size
    #[arg(long)]
    pub grid: Option<usize>,
    /// Binary symmetric accuracies, least informative first
    #[arg(long)]
    pub accuracies: Option<FloatList>,
    /// Certifier price grid size on [0, price_max]
    #[arg(long)]
    pub prices: Option<usize>,
    #[arg(long)]
    pub price_max: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct SignalingArgs {
    #[arg(long)]
    pub experiment: Option<ExperimentSpec>,
    /// Less informative experiment to compare against, or `none`
    #[arg(long)]
    pub compare: Option<OptionalExperiment>,
    /// Cost family (only `quadratic` from the command line)
    #[arg(long)]
    pub cost: Option<CostKind>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Comparison grid size
    #[arg(long)]
    pub points: Option<usize>,
    /// Random Blackwell-ranked pairs to check
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest signal count in the random pairs
    #[arg(long)]
    pub signals: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct ReversalArgs {
    #[arg(long)]
    pub z: Option<f64>,
    /// Grid points on [0, 1]
    #[arg(long)]
    pub points: Option<usize>,
    /// Random experiments for the convex-payoff check
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub signals: Option<usize>,
}

/// Config problem; `line` points into the config file when the value came from there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }

    /// A problem with a command line flag.
    pub fn flag(name: &str, message: impl fmt::Display) -> Self {
        Self::new(None, format!("{name}: {message}"))
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed `key = value` lines, keyed by normalized name.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::new(Some(line), format!("expected `key = value`, got `{content}`")));
            };
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(ConfigError::new(Some(line), "empty key"));
            }
            if let Some((first, _)) = entries.get(&key) {
                return Err(ConfigError::new(Some(line), format!("duplicate key `{key}` (first on line {first})")));
            }
            entries.insert(key, (line, value.trim().to_string()));
        }
        Ok(Self { entries })
    }
}

/// Resolves each key from flag, file or default and tracks which file keys
/// were consumed so that leftovers can be rejected as unknown.
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    used: BTreeSet<String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self {
            file,
            used: BTreeSet::new(),
        }
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.checked(key, flag, default, |_| Ok(()))
    }

    /// Like [`Resolver::get`] with a range check that reports the source line.
    pub fn checked<T, F>(&mut self, key: &str, flag: Option<T>, default: T, check: F) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
        F: Fn(&T) -> Result<(), String>,
    {
        self.used.insert(key.to_string());
        let (value, line) = match (flag, self.file.entries.get(key)) {
            (Some(v), _) => (v, None),
            (None, Some((line, text))) => {
                let v = text
                    .parse::<T>()
                    .map_err(|e| ConfigError::new(Some(*line), format!("bad value for `{key}`: {e}")))?;
                (v, Some(*line))
            }
            (None, None) => (default, None),
        };
        check(&value).map_err(|m| {
            let source = if line.is_some() { key.to_string() } else { format!("--{}", key.replace('_', "-")) };
            ConfigError::new(line, format!("{source}: {m}"))
        })?;
        Ok(value)
    }

    pub fn finish(self) -> Result<(), ConfigError> {
        match self.file.entries.iter().find(|(k, _)| !self.used.contains(*k)) {
            Some((key, (line, _))) => Err(ConfigError::new(Some(*line), format!("unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

pub fn at_least<T: PartialOrd + fmt::Display + Copy>(min: T) -> impl Fn(&T) -> Result<(), String> {
    move |v| if *v >= min { Ok(()) } else { Err(format!("must be at least {min}, got {v}")) }
}

pub fn in_open(lo: f64, hi: f64) -> impl Fn(&f64) -> Result<(), String> {
    move |v| if *v > lo && *v < hi { Ok(()) } else { Err(format!("must lie in ({lo}, {hi}), got {v}")) }
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", p.trim())))
            .collect::<Result<Vec<_>, _>>()?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err("values must be finite".into());
        }
        Ok(Self(v))
    }
}

impl fmt::Display for FloatList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for FloatList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    MiddleReveal,
    Direction,
    Undershoot,
    Sampled,
}

impl FromStr for ExampleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "middle_reveal" | "middle-reveal" => Ok(Self::MiddleReveal),
            "direction" => Ok(Self::Direction),
            "undershoot" => Ok(Self::Undershoot),
            "sampled" => Ok(Self::Sampled),
            _ => Err(format!("unknown example `{s}` (middle_reveal, direction, undershoot, sampled)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Quadratic,
}

impl FromStr for CostKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            _ => Err(format!("unknown cost family `{s}` (quadratic)")),
        }
    }
}

/// Experiment named by constructor, e.g. `binary_symmetric:0.9`,
/// `threshold_reveal:4:2`, `random_mlrp:7:3:5` or
/// `matrix:0.7,0.3;0.2,0.8` (one row per state).
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentSpec {
    BinarySymmetric(f64),
    Uninformative(usize),
    FullyInformative(usize),
    ThresholdReveal(usize, usize),
    PoolPairReveal(usize, usize),
    MiddleReveal,
    RandomMlrp { seed: u64, states: usize, signals: usize },
    Matrix(Vec<Vec<f64>>),
}

impl ExperimentSpec {
    pub fn build(&self) -> ivp_core::Result<Experiment64> {
        match *self {
            Self::BinarySymmetric(q) => binary_symmetric(q),
            Self::Uninformative(n) => uninformative(n),
            Self::FullyInformative(n) => fully_informative(n),
            Self::ThresholdReveal(n, k) => threshold_reveal(n, k),
            Self::PoolPairReveal(n, l) => pool_pair_reveal(n, l),
            Self::MiddleReveal => middle_reveal(),
            Self::RandomMlrp { seed, states, signals } => random_mlrp_experiment(seed, states, signals),
            Self::Matrix(ref rows) => Experiment64::new(rows.clone()),
        }
    }
}

fn parse_arg<T: FromStr>(name: &str, part: Option<&str>) -> Result<T, String> {
    let p = part.ok_or_else(|| format!("missing {name}"))?;
    p.trim().parse().map_err(|_| format!("bad {name} `{p}`"))
}

impl FromStr for ExperimentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut args = rest.split(':').filter(|p| !p.is_empty());
        let spec = match name {
            "binary_symmetric" => Self::BinarySymmetric(parse_arg("accuracy", args.next())?),
            "uninformative" => Self::Uninformative(args.next().map_or(Ok(2), |p| parse_arg("states", Some(p)))?),
            "fully_informative" => {
                Self::FullyInformative(args.next().map_or(Ok(2), |p| parse_arg("states", Some(p)))?)
            }
            "threshold_reveal" => {
                Self::ThresholdReveal(parse_arg("states", args.next())?, parse_arg("threshold", args.next())?)
            }
            "pool_pair_reveal" => {
                Self::PoolPairReveal(parse_arg("states", args.next())?, parse_arg("pair", args.next())?)
            }
            "middle_reveal" => Self::MiddleReveal,
            "random_mlrp" => Self::RandomMlrp {
                seed: parse_arg("seed", args.next())?,
                states: parse_arg("states", args.next())?,
                signals: parse_arg("signals", args.next())?,
            },
            "matrix" => {
                let rows = rest
                    .split(';')
                    .map(|r| r.parse::<FloatList>().map(|l| l.0))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(Self::Matrix(rows));
            }
            _ => return Err(format!("unknown experiment constructor `{name}`")),
        };
        if args.next().is_some() {
            return Err(format!("too many arguments in `{s}`"));
        }
        Ok(spec)
    }
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BinarySymmetric(q) => write!(f, "binary_symmetric:{q}"),
            Self::Uninformative(n) => write!(f, "uninformative:{n}"),
            Self::FullyInformative(n) => write!(f, "fully_informative:{n}"),
            Self::ThresholdReveal(n, k) => write!(f, "threshold_reveal:{n}:{k}"),
            Self::PoolPairReveal(n, l) => write!(f, "pool_pair_reveal:{n}:{l}"),
            Self::MiddleReveal => f.write_str("middle_reveal"),
            Self::RandomMlrp { seed, states, signals } => write!(f, "random_mlrp:{seed}:{states}:{signals}"),
            Self::Matrix(rows) => {
                let rows: Vec<String> = rows.iter().map(|r| FloatList(r.clone()).to_string()).collect();
                write!(f, "matrix:{}", rows.join(";"))
            }
        }
    }
}

impl Serialize for ExperimentSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// An experiment spec or `none`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionalExperiment(pub Option<ExperimentSpec>);

impl FromStr for OptionalExperiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "none" {
            Ok(Self(None))
        } else {
            s.parse().map(|e| Self(Some(e)))
        }
    }
}

impl Serialize for OptionalExperiment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let f = ConfigFile::parse("# header\nmax-states = 4  # inline\n\ntrials=10\n").unwrap();
        let mut r = Resolver::new(&f);
        assert_eq!(r.get("max_states", None, 6usize).unwrap(), 4);
        assert_eq!(r.get("trials", Some(7usize), 1).unwrap(), 7);
        assert_eq!(r.get("seed", None, 0u64).unwrap(), 0);
        r.finish().unwrap();
    }

    #[test]
    fn unknown_and_malformed_keys_report_lines() {
        let f = ConfigFile::parse("trials = 3\nbogus = 1\n").unwrap();
        let mut r = Resolver::new(&f);
        r.get("trials", None, 1usize).unwrap();
        assert_eq!(r.finish().unwrap_err().line, Some(2));
        assert_eq!(ConfigFile::parse("a = 1\nnot a pair\n").unwrap_err().line, Some(2));
        assert_eq!(ConfigFile::parse("a = 1\na = 2\n").unwrap_err().line, Some(2));
        let f = ConfigFile::parse("\nstates = 1\n").unwrap();
        let err = Resolver::new(&f).checked("states", None, 4usize, at_least(2)).unwrap_err();
        assert_eq!(err.line, Some(2));
        let f = ConfigFile::parse("trials = many\n").unwrap();
        assert_eq!(Resolver::new(&f).get("trials", None, 1usize).unwrap_err().line, Some(1));
    }

    #[test]
    fn experiment_specs_round_trip() {
        for s in [
            "binary_symmetric:0.9",
            "uninformative:3",
            "fully_informative:2",
            "threshold_reveal:4:2",
            "pool_pair_reveal:3:1",
            "middle_reveal",
            "random_mlrp:7:3:5",
            "matrix:0.7,0.3;0.2,0.8",
        ] {
            let spec: ExperimentSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            spec.build().unwrap();
        }
        assert_eq!("uninformative".parse::<ExperimentSpec>().unwrap(), ExperimentSpec::Uninformative(2));
        assert!("binary_symmetric".parse::<ExperimentSpec>().is_err());
        assert!("threshold_reveal:4:2:1".parse::<ExperimentSpec>().is_err());
        assert!("nope:1".parse::<ExperimentSpec>().is_err());
    }
}
