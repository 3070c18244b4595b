//! Seeded generators for the benchmark instance families and for arrival
//! times, plus a plain-text replay format for generated profiles.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::model::{ArrivalDraw, WeightProfile};

/// Which parameterization of `Pareto(5/n, 1)` drives the power family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParetoReading {
    /// Scale `5/n`, shape 1: `theta = (5/n) / U`.
    #[default]
    ScaleFiveOverN,
    /// Shape `5/n`, scale 1: `theta = U^(-n/5)`.
    ShapeFiveOverN,
}

/// The weight distributions used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceFamily {
    /// `w_i = Y_i^(n^1.5)` with `Y_i ~ Unif[0, theta]` and Pareto `theta`.
    ParetoPower { reading: ParetoReading },
    /// i.i.d. `Exp(1)` weights.
    Exponential,
    /// i.i.d. chi-squared weights with `df` degrees of freedom.
    ChiSquared { df: u32 },
    /// `n - 1` i.i.d. `Exp(1)` weights and one element `factor` times
    /// their maximum, placed last.
    ExpSuperstar { factor: f64 },
}

impl InstanceFamily {
    pub const PARETO: Self = Self::ParetoPower {
        reading: ParetoReading::ScaleFiveOverN,
    };
    pub const CHI_SQUARED: Self = Self::ChiSquared { df: 10 };
    pub const SUPERSTAR: Self = Self::ExpSuperstar { factor: 100.0 };

    /// Stable short name used in CSV output and replay headers.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::ParetoPower {
                reading: ParetoReading::ScaleFiveOverN,
            } => "pareto",
            Self::ParetoPower {
                reading: ParetoReading::ShapeFiveOverN,
            } => "pareto-shape",
            Self::Exponential => "exp",
            Self::ChiSquared { .. } => "chisq",
            Self::ExpSuperstar { .. } => "exp-superstar",
        }
    }

    /// Smallest instance size the family supports.
    pub fn min_n(&self) -> usize {
        match self {
            Self::ParetoPower { .. } | Self::ExpSuperstar { .. } => 2,
            Self::Exponential | Self::ChiSquared { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::ChiSquared { df: 0 } => Err(Error::InvalidConfig(
                "chi-squared df must be at least 1".into(),
            )),
            Self::ExpSuperstar { factor } => ensure(
                factor > 0.0 && factor.is_finite(),
                "superstar factor",
                "(0,inf)",
                factor,
            ),
            _ => Ok(()),
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        self.validate()?;
        if n < self.min_n() {
            return Err(Error::InvalidConfig(format!(
                "family {} needs n >= {}, got n={n}",
                self.tag(),
                self.min_n()
            )));
        }
        Ok(())
    }

    /// Draws one profile of size `n`.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<WeightProfile> {
        self.check_n(n)?;
        Ok(match *self {
            Self::ParetoPower { reading } => pareto_power(n, reading, rng),
            Self::Exponential => exponential(n, rng),
            Self::ChiSquared { df } => chi_squared(n, df, rng),
            Self::ExpSuperstar { factor } => exp_superstar(n, factor, rng),
        })
    }
}

impl fmt::Display for InstanceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for InstanceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pareto" | "pareto_power" => Ok(Self::PARETO),
            "pareto-shape" => Ok(Self::ParetoPower {
                reading: ParetoReading::ShapeFiveOverN,
            }),
            "exp" | "exponential" => Ok(Self::Exponential),
            "chisq" | "chi_squared" => Ok(Self::CHI_SQUARED),
            "exp-superstar" | "exp_superstar" => Ok(Self::SUPERSTAR),
            other => Err(Error::InvalidConfig(format!("unknown family '{other}'"))),
        }
    }
}

/// Master seed plus the per-iteration stream derivation.
///
/// Iteration `i` draws from ChaCha8 stream `i` of a generator keyed by the
/// master seed, so its randomness does not depend on which thread runs it
/// or on how many iterations precede it.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    base: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            base: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}

/// `n` i.i.d. `Unif[0,1]` arrival times.
pub fn gen_arrivals<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ArrivalDraw> {
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    Ok(ArrivalDraw::from_trusted(
        (0..n).map(|_| rng.random::<f64>()).collect(),
    ))
}

pub fn gen_pareto_power<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightProfile> {
    InstanceFamily::PARETO.generate(n, rng)
}

pub fn gen_pareto_power_with<R: Rng + ?Sized>(
    n: usize,
    reading: ParetoReading,
    rng: &mut R,
) -> Result<WeightProfile> {
    InstanceFamily::ParetoPower { reading }.generate(n, rng)
}

pub fn gen_exponential<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightProfile> {
    InstanceFamily::Exponential.generate(n, rng)
}

pub fn gen_chi_squared<R: Rng + ?Sized>(n: usize, df: u32, rng: &mut R) -> Result<WeightProfile> {
    InstanceFamily::ChiSquared { df }.generate(n, rng)
}

pub fn gen_exp_superstar<R: Rng + ?Sized>(
    n: usize,
    factor: f64,
    rng: &mut R,
) -> Result<WeightProfile> {
    InstanceFamily::ExpSuperstar { factor }.generate(n, rng)
}

/// Works entirely in log space: `log w_i = n^1.5 (ln theta + ln V_i)`.
fn pareto_power<R: Rng + ?Sized>(n: usize, reading: ParetoReading, rng: &mut R) -> WeightProfile {
    let nf = n as f64;
    // U in (0,1], so theta is finite and positive.
    let u = 1.0 - rng.random::<f64>();
    let ln_theta = match reading {
        ParetoReading::ScaleFiveOverN => (5.0 / nf).ln() - u.ln(),
        ParetoReading::ShapeFiveOverN => -(nf / 5.0) * u.ln(),
    };
    let power = nf.powf(1.5);
    let logs: Vec<f64> = (0..n)
        .map(|_| power * (ln_theta + rng.random::<f64>().ln()))
        .collect();
    WeightProfile::from_log_weights(logs)
        .expect("log-weights are finite or -inf")
        .normalized()
}

fn exp_draws<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| Exp1.sample(rng)).collect()
}

fn exponential<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightProfile {
    WeightProfile::from_weights(exp_draws(n, rng)).expect("exponential draws are valid")
}

fn chi_squared<R: Rng + ?Sized>(n: usize, df: u32, rng: &mut R) -> WeightProfile {
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            (0..df)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * z
                })
                .sum()
        })
        .collect();
    WeightProfile::from_weights(weights).expect("chi-squared draws are valid")
}

fn exp_superstar<R: Rng + ?Sized>(n: usize, factor: f64, rng: &mut R) -> WeightProfile {
    let mut weights = exp_draws(n - 1, rng);
    let max = weights.iter().copied().fold(0.0, f64::max);
    weights.push(factor * max);
    WeightProfile::from_weights(weights).expect("superstar weights are valid")
}

/// Header line of a replay file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayHeader {
    pub family: String,
    pub seed: u64,
    pub n: usize,
}

/// Writes one profile per line as comma-separated log-weights under a
/// `# family=... seed=... n=...` header. Values use shortest round-trip
/// formatting, so reading the file back reproduces the log-weights exactly.
pub fn write_replay<W: Write>(
    mut out: W,
    header: &ReplayHeader,
    profiles: &[WeightProfile],
) -> Result<()> {
    writeln!(
        out,
        "# family={} seed={} n={}",
        header.family, header.seed, header.n
    )?;
    for p in profiles {
        let row: Vec<String> = p.log_weights().iter().map(|l| l.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<ReplayHeader> {
    let bad = |message: String| Error::Replay { line: 1, message };
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| bad("missing '#' header".into()))?;
    let (mut family, mut seed, mut n) = (None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed header field '{field}'")))?;
        match key {
            "family" => family = Some(value.to_string()),
            "seed" => {
                seed = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad seed '{value}'")))?,
                )
            }
            "n" => n = Some(value.parse().map_err(|_| bad(format!("bad n '{value}'")))?),
            _ => {}
        }
    }
    Ok(ReplayHeader {
        family: family.ok_or_else(|| bad("header lacks family".into()))?,
        seed: seed.ok_or_else(|| bad("header lacks seed".into()))?,
        n: n.ok_or_else(|| bad("header lacks n".into()))?,
    })
}

/// Reads a file produced by [`write_replay`]. Blank lines are skipped.
pub fn read_replay<R: BufRead>(input: R) -> Result<(ReplayHeader, Vec<WeightProfile>)> {
    let mut lines = input.lines();
    let first = lines.next().ok_or(Error::Replay {
        line: 1,
        message: "empty file".into(),
    })??;
    let header = parse_header(first.trim())?;
    let mut profiles = Vec::new();
    for (offset, line) in lines.enumerate() {
        let line = line?;
        let line_no = offset + 2;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let logs = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Replay {
                line: line_no,
                message: e.to_string(),
            })?;
        if logs.len() != header.n {
            return Err(Error::Replay {
                line: line_no,
                message: format!("expected {} values, found {}", header.n, logs.len()),
            });
        }
        let profile = WeightProfile::from_log_weights(logs).map_err(|e| Error::Replay {
            line: line_no,
            message: e.to_string(),
        })?;
        profiles.push(profile);
    }
    Ok((header, profiles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::true_gap;

    fn rng(seed: u64) -> ChaCha8Rng {
        SeededRng::new(seed).stream(0)
    }

    #[test]
    fn arrivals_validation_and_determinism() {
        assert!(gen_arrivals(0, &mut rng(1)).is_err());
        let a = gen_arrivals(5, &mut rng(9)).unwrap();
        let b = gen_arrivals(5, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.times().iter().all(|t| (0.0..=1.0).contains(t)));
    }

    #[test]
    fn arrivals_mean() {
        let a = gen_arrivals(100_000, &mut rng(2)).unwrap();
        let mean = a.times().iter().sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn streams_differ_and_repeat() {
        let s = SeededRng::new(5);
        let x: f64 = s.stream(3).random();
        let y: f64 = s.stream(3).random();
        let z: f64 = s.stream(4).random();
        assert_eq!(x, y);
        assert_ne!(x, z);
        let other: f64 = SeededRng::new(6).stream(3).random();
        assert_ne!(x, other);
    }

    #[test]
    fn pareto_profiles_are_normalized_and_finite() {
        let s = SeededRng::new(11);
        for i in 0..50 {
            let p = gen_pareto_power(200, &mut s.stream(i)).unwrap();
            assert_eq!(p.max_weight(), 1.0);
            assert!(p.weights().iter().all(|w| w.is_finite() && *w >= 0.0));
            assert!(p.log_weights().iter().all(|l| !l.is_nan() && *l <= 0.0));
        }
    }

    #[test]
    fn pareto_large_n_has_no_overflow() {
        for reading in [ParetoReading::ScaleFiveOverN, ParetoReading::ShapeFiveOverN] {
            let p = gen_pareto_power_with(10_000, reading, &mut rng(3)).unwrap();
            assert_eq!(p.max_weight(), 1.0);
            assert!(p.log_weights().iter().all(|l| !l.is_nan()));
        }
    }

    #[test]
    fn pareto_rejects_tiny_n() {
        assert!(gen_pareto_power(1, &mut rng(0)).is_err());
    }

    #[test]
    fn pareto_determinism() {
        let a = gen_pareto_power(200, &mut rng(4)).unwrap();
        let b = gen_pareto_power(200, &mut rng(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exponential_mean() {
        let p = gen_exponential(100_000, &mut rng(5)).unwrap();
        let mean = p.weights().iter().sum::<f64>() / 1e5;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
        assert!(p.weights().iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn chi_squared_mean() {
        let p = gen_chi_squared(100_000, 10, &mut rng(6)).unwrap();
        let mean = p.weights().iter().sum::<f64>() / 1e5;
        assert!((mean - 10.0).abs() < 0.15, "{mean}");
        assert!(gen_chi_squared(3, 0, &mut rng(6)).is_err());
    }

    #[test]
    fn chi_squared_one_df_is_a_squared_normal() {
        let p = gen_chi_squared(4, 1, &mut rng(7)).unwrap();
        let mut r = rng(7);
        for &w in p.weights() {
            let z: f64 = StandardNormal.sample(&mut r);
            assert_eq!(w, z * z);
        }
    }

    #[test]
    fn superstar_construction() {
        let s = SeededRng::new(8);
        for i in 0..20 {
            let p = gen_exp_superstar(200, 100.0, &mut s.stream(i)).unwrap();
            assert_eq!(p.n(), 200);
            assert_eq!(p.argmax(), 199);
            let ratio = p.ranked_weight(1) / p.ranked_weight(2);
            assert!((ratio - 100.0).abs() <= 100.0 * 1e-12);
            let gap = true_gap(&p, 2).unwrap();
            assert!((gap - 99.0 * p.ranked_weight(2)).abs() <= 1e-12 * gap);
        }
        assert!(gen_exp_superstar(1, 100.0, &mut rng(0)).is_err());
        assert!(gen_exp_superstar(5, 0.0, &mut rng(0)).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            InstanceFamily::PARETO,
            InstanceFamily::ParetoPower {
                reading: ParetoReading::ShapeFiveOverN,
            },
            InstanceFamily::Exponential,
            InstanceFamily::CHI_SQUARED,
            InstanceFamily::SUPERSTAR,
        ] {
            assert_eq!(f.tag().parse::<InstanceFamily>().unwrap(), f);
        }
        assert!("gauss".parse::<InstanceFamily>().is_err());
    }

    #[test]
    fn replay_round_trip() {
        let s = SeededRng::new(12);
        let profiles: Vec<_> = (0..3)
            .map(|i| gen_pareto_power(20, &mut s.stream(i)).unwrap())
            .collect();
        let header = ReplayHeader {
            family: "pareto".into(),
            seed: 12,
            n: 20,
        };
        let mut buf = Vec::new();
        write_replay(&mut buf, &header, &profiles).unwrap();
        let (h, back) = read_replay(buf.as_slice()).unwrap();
        assert_eq!(h, header);
        assert_eq!(back.len(), 3);
        for (a, b) in profiles.iter().zip(&back) {
            assert_eq!(a.log_weights(), b.log_weights());
        }
    }

    #[test]
    fn replay_accepts_negative_infinity() {
        let text = "# family=x seed=1 n=3\n0,-inf,-2.5\n";
        let (_, ps) = read_replay(text.as_bytes()).unwrap();
        assert_eq!(ps[0].weights()[1], 0.0);
    }

    #[test]
    fn replay_errors_name_the_line() {
        let text = "# family=x seed=1 n=2\n0,-1\n0,abc\n";
        match read_replay(text.as_bytes()) {
            Err(Error::Replay { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_replay("0,1\n".as_bytes()).is_err());
        assert!(read_replay("# family=x seed=1 n=3\n0,1\n".as_bytes()).is_err());
    }
}
