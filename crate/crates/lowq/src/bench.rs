//! Matched-pair comparisons over a fixed seed set.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use lowq_core::models::{LtVariant, VqcVariant};
use lowq_core::train::TrainSummary;

use crate::config::{kv_text, write_text, RunConfig};
use crate::error::{AppError, AppResult};
use crate::run::run_train;

pub const DEFAULT_STEPS: usize = 300;
pub const DEFAULT_SEEDS: usize = 3;
pub const PLAIN_QUBITS: usize = 8;
pub const SWEEP: [usize; 3] = [2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pair {
    Vqc,
    Clip,
    Lt,
    Qubits,
}

impl Pair {
    pub const ALL: [Pair; 4] = [Pair::Vqc, Pair::Clip, Pair::Lt, Pair::Qubits];

    pub fn name(self) -> &'static str {
        match self {
            Pair::Vqc => "vqc",
            Pair::Clip => "clip",
            Pair::Lt => "lt",
            Pair::Qubits => "qubits",
        }
    }
}

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Pair::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pair {s:?} (expected vqc, clip, lt or qubits)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arm {
    pub vqc: VqcVariant,
    pub qubits: usize,
    pub clip: bool,
    pub lt: LtVariant,
}

impl Arm {
    pub fn label(&self) -> String {
        format!(
            "{}-q{}-{}-{}",
            self.vqc.name(),
            self.qubits,
            if self.clip { "clip" } else { "noclip" },
            self.lt.name()
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub base: RunConfig,
    pub pairs: Vec<Pair>,
    pub seeds: usize,
    pub steps: usize,
}

impl BenchConfig {
    pub fn new(base: RunConfig) -> Self {
        BenchConfig {
            base,
            pairs: Pair::ALL.to_vec(),
            seeds: DEFAULT_SEEDS,
            steps: DEFAULT_STEPS,
        }
    }

    fn base_arm(&self) -> Arm {
        Arm {
            vqc: VqcVariant::LowQubit,
            qubits: self.base.qubits,
            clip: self.base.clip,
            lt: self.base.lt,
        }
    }

    fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.base.seed + k).collect()
    }

    /// Arms for each requested pair, in comparison order.
    pub fn pair_arms(&self, pair: Pair) -> Vec<Arm> {
        let base = self.base_arm();
        match pair {
            Pair::Vqc => vec![
                base,
                Arm {
                    vqc: VqcVariant::Plain,
                    qubits: PLAIN_QUBITS,
                    ..base
                },
            ],
            Pair::Clip => vec![Arm { clip: true, ..base }, Arm { clip: false, ..base }],
            Pair::Lt => vec![
                Arm {
                    lt: LtVariant::Fc,
                    ..base
                },
                Arm {
                    lt: LtVariant::Bilinear,
                    ..base
                },
            ],
            Pair::Qubits => SWEEP.iter().map(|&qubits| Arm { qubits, ..base }).collect(),
        }
    }

    /// Distinct arms across all pairs; shared arms run once.
    pub fn arms(&self) -> Vec<Arm> {
        let mut out: Vec<Arm> = Vec::new();
        for p in &self.pairs {
            for a in self.pair_arms(*p) {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }

    pub fn to_kv(&self) -> String {
        let mut text = self.base.to_kv();
        let pairs: Vec<&str> = self.pairs.iter().map(|p| p.name()).collect();
        text.push_str(&kv_text(&[
            ("pairs", pairs.join(",")),
            ("bench_seeds", self.seeds.to_string()),
            ("bench_steps", self.steps.to_string()),
        ]));
        text
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub arm: Arm,
    pub seed: u64,
    pub summary: TrainSummary,
}

impl BenchRow {
    fn accuracy(&self) -> f64 {
        self.summary.final_accuracy.unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pair: Pair,
    pub key: &'static str,
    pub claim: &'static str,
    pub wins: usize,
    pub of: usize,
}

impl Verdict {
    /// Two-thirds majority over seeds.
    pub fn passed(&self) -> bool {
        self.of > 0 && 3 * self.wins >= 2 * self.of
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub verdicts: Vec<Verdict>,
}

impl BenchReport {
    pub fn row(&self, arm: &Arm, seed: u64) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.arm == *arm && r.seed == seed)
    }

    pub fn verdict(&self, pair: Pair, key: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.pair == pair && v.key == key)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("arm,seed,vqc,qubits,clip,lt,final_loss,stability,median_step_ms,accuracy\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.3},{}",
                r.arm.label(),
                r.seed,
                r.arm.vqc.name(),
                r.arm.qubits,
                if r.arm.clip { "on" } else { "off" },
                r.arm.lt.name(),
                r.summary.final_loss,
                r.summary.stability,
                r.summary.median_step_ms,
                r.accuracy()
            );
        }
        out
    }

    pub fn verdict_lines(&self) -> Vec<String> {
        self.verdicts
            .iter()
            .map(|v| {
                format!(
                    "{:<7} {:<48} {}/{} seeds  {}",
                    v.pair.name(),
                    v.claim,
                    v.wins,
                    v.of,
                    if v.passed() { "PASS" } else { "FAIL" }
                )
            })
            .collect()
    }

    pub fn text(&self) -> String {
        let mut out = format!(
            "{:<28} {:>5} {:>12} {:>12} {:>10} {:>9}\n",
            "arm", "seed", "final_loss", "stability", "step_ms", "accuracy"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<28} {:>5} {:>12.6} {:>12.6} {:>10.3} {:>9.4}",
                r.arm.label(),
                r.seed,
                r.summary.final_loss,
                r.summary.stability,
                r.summary.median_step_ms,
                r.accuracy()
            );
        }
        out.push('\n');
        for line in self.verdict_lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn tally(pair: Pair, key: &'static str, claim: &'static str, seeds: &[u64], win: impl Fn(u64) -> bool) -> Verdict {
    Verdict {
        pair,
        key,
        claim,
        wins: seeds.iter().filter(|s| win(**s)).count(),
        of: seeds.len(),
    }
}

fn verdicts(cfg: &BenchConfig, rows: &[BenchRow]) -> Vec<Verdict> {
    let seeds = cfg.seed_list();
    let get = |arm: &Arm, seed: u64| -> &TrainSummary {
        &rows
            .iter()
            .find(|r| r.arm == *arm && r.seed == seed)
            .expect("every arm runs on every seed")
            .summary
    };
    let acc = |arm: &Arm, seed: u64| get(arm, seed).final_accuracy.unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for &pair in &cfg.pairs {
        let arms = cfg.pair_arms(pair);
        let (a, b) = (&arms[0], &arms[1]);
        match pair {
            Pair::Vqc => {
                out.push(tally(
                    pair,
                    "speed",
                    "speed: plain step ms >= 2x lowqubit",
                    &seeds,
                    |s| get(b, s).median_step_ms >= 2.0 * get(a, s).median_step_ms,
                ));
                out.push(tally(pair, "stability", "stability: lowqubit <= plain", &seeds, |s| {
                    get(a, s).stability <= get(b, s).stability
                }));
                out.push(tally(pair, "final_loss", "final loss: lowqubit < plain", &seeds, |s| {
                    get(a, s).final_loss < get(b, s).final_loss
                }));
            }
            Pair::Clip => {
                out.push(tally(pair, "final_loss", "final loss: clip < noclip", &seeds, |s| {
                    get(a, s).final_loss < get(b, s).final_loss
                }));
                out.push(tally(pair, "stability", "stability: clip <= noclip", &seeds, |s| {
                    get(a, s).stability <= get(b, s).stability
                }));
            }
            Pair::Lt => {
                out.push(tally(pair, "final_loss", "final loss: fc < bilinear", &seeds, |s| {
                    get(a, s).final_loss < get(b, s).final_loss
                }));
            }
            Pair::Qubits => {
                let q8 = &arms[2];
                out.push(tally(pair, "accuracy_q8_vs_q2", "accuracy: q8 >= q2", &seeds, |s| {
                    acc(q8, s) >= acc(a, s)
                }));
                out.push(tally(
                    pair,
                    "accuracy_monotone",
                    "accuracy: non-decreasing over q2, q4, q8",
                    &seeds,
                    |s| acc(a, s) <= acc(b, s) && acc(b, s) <= acc(q8, s),
                ));
            }
        }
    }
    out
}

/// Runs every arm on every seed, writing each run into `runs/` under the
/// output directory, then the comparison table and verdicts.
pub fn run_bench(cfg: &BenchConfig, mut progress: impl FnMut(&str)) -> AppResult<BenchReport> {
    if cfg.seeds == 0 || cfg.steps == 0 {
        return Err(AppError::Usage("bench needs at least one seed and one step".into()));
    }
    if cfg.pairs.is_empty() {
        return Err(AppError::Usage("no comparison pairs selected".into()));
    }
    let out = &cfg.base.out_dir;
    std::fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
    write_text(&out.join("config.txt"), &cfg.to_kv())?;
    let runs: PathBuf = out.join("runs");
    let mut rows = Vec::new();
    for arm in cfg.arms() {
        for seed in cfg.seed_list() {
            let run_cfg = RunConfig {
                vqc: arm.vqc,
                qubits: arm.qubits,
                clip: arm.clip,
                lt: arm.lt,
                seed,
                steps: Some(cfg.steps),
                out_dir: runs.join(format!("{}-seed{seed}", arm.label())),
                ..cfg.base.clone()
            };
            let outcome = run_train(&run_cfg)?;
            progress(&format!(
                "{} seed {seed}: final loss {:.6}, accuracy {:.4}, {:.3} ms/step",
                arm.label(),
                outcome.summary.final_loss,
                outcome.summary.final_accuracy.unwrap_or(f64::NAN),
                outcome.summary.median_step_ms
            ));
            rows.push(BenchRow {
                arm,
                seed,
                summary: outcome.summary,
            });
        }
    }
    let verdicts = verdicts(cfg, &rows);
    let report = BenchReport { rows, verdicts };
    write_text(&out.join("comparison.csv"), &report.csv())?;
    write_text(&out.join("comparison.txt"), &report.text())?;
    let summary: String = report
        .verdicts
        .iter()
        .map(|v| {
            format!(
                "{}.{} = {}/{} {}\n",
                v.pair.name(),
                v.key,
                v.wins,
                v.of,
                if v.passed() { "pass" } else { "fail" }
            )
        })
        .collect();
    write_text(&out.join("summary.txt"), &summary)?;
    Ok(report)
}
