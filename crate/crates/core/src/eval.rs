//! Evaluation harness: GAR, empirical FAR, GAR–Security curves, parameter
//! planning and privacy-leakage reporting.
//!
//! Protocol for a dataset of fused vectors grouped by subject:
//!
//! * Population statistics come from every sample in the dataset.
//! * Each subject enrolls from its first `⌈s/2⌉` samples; the remaining
//!   samples are genuine probes presented with the subject's own key.
//! * Enrollment and impostor randomness derive from the master seed, so
//!   every output is a pure function of (dataset, config, seed).
//!
//! A strict-decoding secure sketch can fail to enroll a subject. Enrollment is
//! then retried with fresh secrets up to [`ENROLL_ATTEMPTS`] times. A subject
//! that still fails is left out of GAR and counted in `failed_enrollments`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gf::MAX_M;
use crate::pipeline::{derived_rng, enroll, probe_bits, Enrollment, EnrollmentSecrets, PipelineConfig};
use crate::quantizer::{population_stats, PopulationStats};
use crate::rs_codec::{DecodePolicy, RsCode};
use crate::sketch::{authenticate, Scheme};

pub const ENROLL_ATTEMPTS: u64 = 16;

pub const GS_CSV_HEADER: &str = "m,K,security_bits,rate,gar,far_analytic,far_empirical,scheme,policy,scenario";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecurityParams {
    pub m: u32,
    /// Codeword length in symbols, `2^m − 1`.
    pub n_symbols: usize,
    /// Codeword length in bits, `m·N`.
    pub n_bits: usize,
    pub k: usize,
    pub requested_security: usize,
    pub achieved_security: usize,
    /// `K·m / n`.
    pub rate: f64,
}

/// Chooses `K = round(security/m)`; the achieved security is `K·m`.
pub fn params_for_security(m: u32, security_bits: usize) -> Result<SecurityParams> {
    if !(crate::gf::MIN_M..=MAX_M).contains(&m) {
        return Err(Error::UnsupportedM(m));
    }
    let n_symbols = (1usize << m) - 1;
    let n_bits = m as usize * n_symbols;
    if security_bits > n_bits {
        return Err(Error::SecurityTooHigh {
            security: security_bits,
            n: n_bits,
        });
    }
    let k = ((security_bits as f64 / m as f64).round() as usize).min(n_symbols);
    if k == 0 {
        return Err(Error::InvalidParams(format!(
            "{security_bits} bits rounds to zero message symbols at m={m}"
        )));
    }
    let achieved = k * m as usize;
    Ok(SecurityParams {
        m,
        n_symbols,
        n_bits,
        k,
        requested_security: security_bits,
        achieved_security: achieved,
        rate: achieved as f64 / n_bits as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Scenario {
    /// Impostor presents their own biometric with their own key.
    #[default]
    ZeroEffort,
    /// Impostor presents their own biometric with the victim's key.
    StolenKey,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::ZeroEffort => "zero-effort",
            Scenario::StolenKey => "stolen-key",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-effort" => Ok(Scenario::ZeroEffort),
            "stolen-key" => Ok(Scenario::StolenKey),
            _ => Err(Error::Parse(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Where impostor probe bits come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ImpostorSource {
    /// Another subject's sample from the dataset.
    #[default]
    Dataset,
    /// Uniformly random reliable bits (stolen-key scenario only).
    UniformBits,
}

/// Which vectors serve as genuine probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProbeSource {
    /// Samples not used for enrollment.
    #[default]
    HeldOut,
    /// The enrolled reference vector itself (`r_b = r_a`).
    Enrollment,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub accepted: usize,
    pub trials: usize,
    pub failed_enrollments: usize,
}

impl RateEstimate {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accepted as f64 / self.trials as f64
        }
    }

    /// Binomial standard error at the observed rate.
    pub fn std_error(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// Enrolled population ready for probing.
pub struct Evaluation {
    pub cfg: PipelineConfig,
    pub code: RsCode,
    pub pop: PopulationStats,
    /// `None` where enrollment failed every attempt.
    pub enrollments: Vec<Option<Enrollment>>,
    pub enroll_counts: Vec<usize>,
}

impl Evaluation {
    pub fn new(subjects: &[Vec<Vec<f64>>], cfg: PipelineConfig) -> Result<Self> {
        let pop = population_stats(subjects)?;
        Self::with_population(subjects, cfg, pop)
    }

    pub fn with_population(subjects: &[Vec<Vec<f64>>], cfg: PipelineConfig, pop: PopulationStats) -> Result<Self> {
        if let Some((i, _)) = subjects.iter().enumerate().find(|(_, s)| s.len() < 2) {
            return Err(Error::InsufficientData(format!(
                "subject {i} has fewer than 2 samples"
            )));
        }
        let code = cfg.code()?;
        let mut enrollments = Vec::with_capacity(subjects.len());
        let mut enroll_counts = Vec::with_capacity(subjects.len());
        for (i, samples) in subjects.iter().enumerate() {
            let count = samples.len().div_ceil(2);
            enroll_counts.push(count);
            let id = format!("s{i}");
            let mut enrolled = None;
            for attempt in 0..ENROLL_ATTEMPTS {
                let secrets = EnrollmentSecrets::derive(cfg.seed, i as u64, attempt);
                match enroll(&id, &samples[..count], &pop, &code, &cfg, secrets) {
                    Ok(e) => {
                        enrolled = Some(e);
                        break;
                    }
                    Err(Error::EnrollmentDecodeFailure) => continue,
                    Err(e) => return Err(e),
                }
            }
            enrollments.push(enrolled);
        }
        Ok(Evaluation {
            cfg,
            code,
            pop,
            enrollments,
            enroll_counts,
        })
    }

    pub fn failed_enrollments(&self) -> usize {
        self.enrollments.iter().filter(|e| e.is_none()).count()
    }

    pub fn gar(&self, subjects: &[Vec<Vec<f64>>], probes: ProbeSource) -> Result<RateEstimate> {
        let mut accepted = 0;
        let mut trials = 0;
        for ((samples, enrolled), &count) in subjects.iter().zip(&self.enrollments).zip(&self.enroll_counts) {
            // failures to enroll are reported separately, not as rejects
            let Some(e) = enrolled else { continue };
            let probe_vectors: Vec<&[f64]> = match probes {
                ProbeSource::HeldOut => samples[count..].iter().map(Vec::as_slice).collect(),
                ProbeSource::Enrollment => vec![e.reference.as_slice()],
            };
            trials += probe_vectors.len();
            for v in probe_vectors {
                let bits = probe_bits(v, &self.pop, &e.key)?;
                if authenticate(&bits, &e.record, &self.code)?.accepted {
                    accepted += 1;
                }
            }
        }
        if trials == 0 {
            return Err(Error::InsufficientData("no genuine probes".into()));
        }
        Ok(RateEstimate {
            accepted,
            trials,
            failed_enrollments: self.failed_enrollments(),
        })
    }

    pub fn far(
        &self,
        subjects: &[Vec<Vec<f64>>],
        scenario: Scenario,
        source: ImpostorSource,
        trials: usize,
        seed: u64,
    ) -> Result<RateEstimate> {
        if trials == 0 {
            return Err(Error::InvalidParams("trials must be positive".into()));
        }
        if subjects.len() < 2 {
            return Err(Error::InsufficientData("FAR needs at least 2 subjects".into()));
        }
        if source == ImpostorSource::UniformBits && scenario != Scenario::StolenKey {
            return Err(Error::InvalidParams(
                "uniform impostor bits are only meaningful with a stolen key".into(),
            ));
        }
        let victims: Vec<usize> = (0..subjects.len()).filter(|&i| self.enrollments[i].is_some()).collect();
        if victims.is_empty() {
            return Err(Error::InsufficientData("no subject could be enrolled".into()));
        }
        let mut rng = derived_rng(seed, "far", 0);
        let n_bits = self.code.n_bits();
        let mut accepted = 0;
        for _ in 0..trials {
            let v = victims[rng.random_range(0..victims.len())];
            let victim = self.enrollments[v].as_ref().unwrap();
            let probe: BitVector = match source {
                ImpostorSource::UniformBits => (0..n_bits).map(|_| rng.random_bool(0.5)).collect(),
                ImpostorSource::Dataset => {
                    let mut u = rng.random_range(0..subjects.len() - 1);
                    if u >= v {
                        u += 1;
                    }
                    let sample = &subjects[u][rng.random_range(0..subjects[u].len())];
                    let key = match scenario {
                        Scenario::StolenKey => &victim.key,
                        Scenario::ZeroEffort => match &self.enrollments[u] {
                            Some(e) => &e.key,
                            // impostor holds no key
                            None => continue,
                        },
                    };
                    probe_bits(sample, &self.pop, key)?
                }
            };
            match authenticate(&probe, &victim.record, &self.code) {
                Ok(d) if d.accepted => accepted += 1,
                Ok(_) | Err(Error::ParameterMismatch(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(RateEstimate {
            accepted,
            trials,
            failed_enrollments: self.failed_enrollments(),
        })
    }
}

pub fn gar(subjects: &[Vec<Vec<f64>>], cfg: PipelineConfig, probes: ProbeSource) -> Result<RateEstimate> {
    Evaluation::new(subjects, cfg)?.gar(subjects, probes)
}

pub fn empirical_far(
    subjects: &[Vec<Vec<f64>>],
    cfg: PipelineConfig,
    scenario: Scenario,
    source: ImpostorSource,
    trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    Evaluation::new(subjects, cfg)?.far(subjects, scenario, source, trials, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GsCurvePoint {
    pub m: u32,
    pub k: usize,
    pub security_bits: usize,
    pub rate: f64,
    pub gar: f64,
    pub far_analytic: f64,
    pub far_empirical: Option<f64>,
    pub scheme: Scheme,
    pub policy: DecodePolicy,
    pub scenario: Scenario,
}

/// `2^(−K·m)`.
pub fn far_analytic(security_bits: usize) -> f64 {
    (-(security_bits as f64)).exp2()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GsOptions {
    pub scheme: Scheme,
    pub policy: DecodePolicy,
    pub scenario: Scenario,
    pub impostors: ImpostorSource,
    pub window: f64,
    /// Impostor trials per point; zero skips the empirical FAR.
    pub far_trials: usize,
    pub seed: u64,
}

impl Default for GsOptions {
    fn default() -> Self {
        GsOptions {
            scheme: Scheme::SecureSketch,
            policy: DecodePolicy::FallbackSystematic,
            scenario: Scenario::ZeroEffort,
            impostors: ImpostorSource::Dataset,
            window: crate::quantizer::DEFAULT_WINDOW,
            far_trials: 0,
            seed: 0,
        }
    }
}

/// One point per `K`, in the given order.
pub fn run_gs_curve(subjects: &[Vec<Vec<f64>>], m: u32, k_list: &[usize], opts: &GsOptions) -> Result<Vec<GsCurvePoint>> {
    let pop = population_stats(subjects)?;
    let n_bits = m as usize * ((1usize << m) - 1);
    k_list
        .iter()
        .map(|&k| {
            let cfg = PipelineConfig {
                m,
                k,
                scheme: opts.scheme,
                policy: opts.policy,
                window: opts.window,
                seed: opts.seed,
            };
            let ev = Evaluation::with_population(subjects, cfg, pop.clone())?;
            let gar = ev.gar(subjects, ProbeSource::HeldOut)?.rate();
            let far_empirical = if opts.far_trials > 0 {
                Some(
                    ev.far(subjects, opts.scenario, opts.impostors, opts.far_trials, opts.seed)?
                        .rate(),
                )
            } else {
                None
            };
            let security_bits = k * m as usize;
            Ok(GsCurvePoint {
                m,
                k,
                security_bits,
                rate: security_bits as f64 / n_bits as f64,
                gar,
                far_analytic: far_analytic(security_bits),
                far_empirical,
                scheme: opts.scheme,
                policy: opts.policy,
                scenario: opts.scenario,
            })
        })
        .collect()
}

/// Writes the curve as CSV with header [`GS_CSV_HEADER`]. Rates and GAR use
/// six decimals, FAR values six-digit scientific notation; a missing
/// empirical FAR is an empty field.
pub fn write_gs_csv<W: Write>(points: &[GsCurvePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{GS_CSV_HEADER}")?;
    for p in points {
        let far_emp = p.far_empirical.map(|f| format!("{f:.6e}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6e},{},{},{},{}",
            p.m, p.k, p.security_bits, p.rate, p.gar, p.far_analytic, far_emp, p.scheme, p.policy, p.scenario
        )?;
    }
    Ok(())
}

pub fn gs_csv_string(points: &[GsCurvePoint]) -> String {
    let mut buf = Vec::new();
    write_gs_csv(points, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Worst-case leakage when the key and/or sketch are exposed: the adversary
/// learns at most the `n` selected bits of the `d`-bit binary feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrivacyReport {
    pub d: usize,
    pub n: usize,
    /// H(x), with i.i.d. balanced bits.
    pub entropy_bits: usize,
    /// Upper bound on I(x; V).
    pub max_leakage_bits: usize,
    /// H(x | V) lower bound, `d − n`.
    pub residual_uncertainty_bits: usize,
}

pub fn privacy_report(d: usize, n: usize) -> Result<PrivacyReport> {
    if n > d {
        return Err(Error::InvalidParams(format!("exposed bits n={n} exceed d={d}")));
    }
    Ok(PrivacyReport {
        d,
        n,
        entropy_bits: d,
        max_leakage_bits: n,
        residual_uncertainty_bits: d - n,
    })
}
