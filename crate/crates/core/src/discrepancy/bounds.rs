//! Closed-form adaptation and generalization bounds.
//!
//! Every bound is a named [`BoundFormula`] over a set of named real inputs.
//! Symbols used across formulas:
//!
//! | symbol            | meaning                                                  |
//! |-------------------|----------------------------------------------------------|
//! | `delta`           | confidence parameter, `0 < delta < 1`                    |
//! | `m`, `n`          | source / target sample sizes                             |
//! | `q`               | loss exponent                                            |
//! | `loss_bound`      | loss bound `M`                                           |
//! | `rad_s`, `rad_t`  | empirical Rademacher complexities on source / target     |
//! | `emp_risk`        | empirical risk of `h`                                    |
//! | `disc`            | discrepancy between the (empirical) distributions        |
//! | `kappa`, `sigma`  | kernel diagonal bound and loss admissibility constant    |
//! | `lambda`          | regularization trade-off, `> 0`                          |
//! | `label_gap`       | `δ = L_Q̂(f_Q, f_P)^{1/2}` (square loss)                  |
//! | `label_gap_prime` | `δ'` built from the best-in-class target hypothesis      |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named real inputs of a bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundInputs(BTreeMap<String, f64>);

impl BoundInputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn get(&self, name: &str) -> Result<f64> {
        let v = *self
            .0
            .get(name)
            .ok_or_else(|| Error::param(name, "missing input"))?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::param(name, format!("must be finite and nonnegative, got {v}")));
        }
        Ok(v)
    }

    fn delta(&self) -> Result<f64> {
        let d = self.get("delta")?;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1), got {d}")));
        }
        Ok(d)
    }

    fn count(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if v < 1.0 {
            return Err(Error::param(name, format!("sample size must be >= 1, got {v}")));
        }
        Ok(v)
    }

    fn positive(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if v <= 0.0 {
            return Err(Error::param(name, "must be positive"));
        }
        Ok(v)
    }

    fn exponent(&self) -> Result<f64> {
        let q = self.get("q")?;
        if q < 1.0 {
            return Err(Error::param("q", format!("must be >= 1, got {q}")));
        }
        Ok(q)
    }
}

/// Evaluated bound with its inputs echoed back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BoundInputs,
    pub value: f64,
}

pub trait BoundFormula: Send + Sync {
    fn name(&self) -> &str;
    fn symbols(&self) -> &[&'static str];
    fn description(&self) -> &str;
    fn evaluate(&self, inputs: &BoundInputs) -> Result<f64>;
}

/// `sqrt(log(c / δ) / (2k))`
fn confidence_term(c: f64, delta: f64, k: f64) -> f64 {
    ((c / delta).ln() / (2.0 * k)).sqrt()
}

struct Formula {
    name: &'static str,
    symbols: &'static [&'static str],
    description: &'static str,
    eval: fn(&BoundInputs) -> Result<f64>,
}

impl BoundFormula for Formula {
    fn name(&self) -> &str {
        self.name
    }

    fn symbols(&self) -> &[&'static str] {
        self.symbols
    }

    fn description(&self) -> &str {
        self.description
    }

    fn evaluate(&self, inputs: &BoundInputs) -> Result<f64> {
        (self.eval)(inputs)
    }
}

/// `L_P(h', y)` vs `L_P(h, y)` stability bound with label gap `g`:
/// `(2κM/λ)(κ g + sqrt(κ² g² + 4λ disc))`.
fn square_loss_stability(i: &BoundInputs, gap: &str) -> Result<f64> {
    let kappa = i.get("kappa")?;
    let m = i.get("loss_bound")?;
    let lambda = i.positive("lambda")?;
    let disc = i.get("disc")?;
    let g = i.get(gap)?;
    Ok(2.0 * kappa * m / lambda * (kappa * g + (kappa * kappa * g * g + 4.0 * lambda * disc).sqrt()))
}

fn builtin_formulas() -> Vec<Formula> {
    vec![
        Formula {
            name: "thm_2_2",
            symbols: &["emp_risk", "rad_s", "delta", "m"],
            description: "Rademacher generalization bound: emp_risk + rad_s + 3 sqrt(log(2/delta)/(2m))",
            eval: |i| Ok(i.get("emp_risk")? + i.get("rad_s")? + 3.0 * confidence_term(2.0, i.delta()?, i.count("m")?)),
        },
        Formula {
            name: "cor_3_4",
            symbols: &["q", "rad_s", "loss_bound", "delta", "m"],
            description: "disc_Lq(Q, Q_hat) <= 4q rad_s + 3M sqrt(log(2/delta)/(2m))",
            eval: |i| {
                Ok(4.0 * i.exponent()? * i.get("rad_s")?
                    + 3.0 * i.get("loss_bound")? * confidence_term(2.0, i.delta()?, i.count("m")?))
            },
        },
        Formula {
            name: "cor_3_5",
            symbols: &["rad_s", "delta", "m"],
            description: "disc_01(Q, Q_hat) <= 4 rad_s + 3 sqrt(log(2/delta)/(2m))",
            eval: |i| Ok(4.0 * i.get("rad_s")? + 3.0 * confidence_term(2.0, i.delta()?, i.count("m")?)),
        },
        Formula {
            name: "cor_3_6",
            symbols: &["disc", "q", "rad_s", "rad_t", "loss_bound", "delta", "m", "n"],
            description: "disc(P, Q) <= disc(P_hat, Q_hat) + 4q(rad_s + rad_t) + 3M(sqrt(log(4/delta)/(2m)) + sqrt(log(4/delta)/(2n)))",
            eval: |i| {
                let delta = i.delta()?;
                Ok(i.get("disc")?
                    + 4.0 * i.exponent()? * (i.get("rad_s")? + i.get("rad_t")?)
                    + 3.0
                        * i.get("loss_bound")?
                        * (confidence_term(4.0, delta, i.count("m")?) + confidence_term(4.0, delta, i.count("n")?)))
            },
        },
        Formula {
            name: "thm_4_1",
            symbols: &["target_best_loss", "loss_q_h_hq", "disc", "loss_q_hq_hp"],
            description: "L_P(h, f_P) <= L_P(h*_P, f_P) + L_Q(h, h*_Q) + disc(P, Q) + L_Q(h*_Q, h*_P)",
            eval: |i| {
                Ok(i.get("target_best_loss")? + i.get("loss_q_h_hq")? + i.get("disc")? + i.get("loss_q_hq_hp")?)
            },
        },
        Formula {
            name: "bendavid",
            symbols: &["loss_q_h_fq", "disc", "joint_best_loss"],
            description: "L_P(h, f_P) <= L_Q(h, f_Q) + disc(P, Q) + min_h (L_Q(h, f_Q) + L_P(h, f_P))",
            eval: |i| Ok(i.get("loss_q_h_fq")? + i.get("disc")? + i.get("joint_best_loss")?),
        },
        Formula {
            name: "thm_4_2",
            symbols: &["emp_loss_q_h_hq", "disc", "q", "rad_s", "rad_t", "delta", "m", "n", "loss_q_hq_hp"],
            description: "regret <= L_Q_hat(h, h*_Q) + disc_01(P_hat, Q_hat) + (4q + 1/2) rad_s + 4q rad_t + 4 sqrt(log(8/delta)/(2m)) + 3 sqrt(log(8/delta)/(2n)) + L_Q(h*_Q, h*_P)",
            eval: |i| {
                let q = i.exponent()?;
                let delta = i.delta()?;
                Ok(i.get("emp_loss_q_h_hq")?
                    + i.get("disc")?
                    + (4.0 * q + 0.5) * i.get("rad_s")?
                    + 4.0 * q * i.get("rad_t")?
                    + 4.0 * confidence_term(8.0, delta, i.count("m")?)
                    + 3.0 * confidence_term(8.0, delta, i.count("n")?)
                    + i.get("loss_q_hq_hp")?)
            },
        },
        Formula {
            name: "thm_5_2",
            symbols: &["kappa", "sigma", "disc", "lambda"],
            description: "|L(h'(x), y) - L(h(x), y)| <= kappa sigma sqrt(disc / lambda)",
            eval: |i| Ok(i.get("kappa")? * i.get("sigma")? * (i.get("disc")? / i.positive("lambda")?).sqrt()),
        },
        Formula {
            name: "thm_5_3",
            symbols: &["kappa", "loss_bound", "lambda", "disc", "label_gap"],
            description: "(2 kappa M / lambda)(kappa delta + sqrt(kappa^2 delta^2 + 4 lambda disc)), delta = label_gap",
            eval: |i| square_loss_stability(i, "label_gap"),
        },
        Formula {
            name: "thm_5_4",
            symbols: &["kappa", "loss_bound", "lambda", "disc", "label_gap_prime"],
            description: "(2 kappa M / lambda)(kappa delta' + sqrt(kappa^2 delta'^2 + 4 lambda disc)), delta' = label_gap_prime",
            eval: |i| square_loss_stability(i, "label_gap_prime"),
        },
        Formula {
            name: "thm_B_1",
            symbols: &["emp_risk", "rad_s", "delta", "m"],
            description: "L_01(h, h*_Q) <= empirical + rad_s/2 + sqrt(log(1/delta)/(2m))",
            eval: |i| Ok(i.get("emp_risk")? + i.get("rad_s")? / 2.0 + confidence_term(1.0, i.delta()?, i.count("m")?)),
        },
    ]
}

/// Name -> bound formula.
pub struct BoundRegistry {
    formulas: BTreeMap<String, Box<dyn BoundFormula>>,
}

impl BoundRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self {
            formulas: BTreeMap::new(),
        };
        for f in builtin_formulas() {
            reg.register(Box::new(f));
        }
        reg
    }

    pub fn register(&mut self, formula: Box<dyn BoundFormula>) {
        self.formulas.insert(formula.name().to_string(), formula);
    }

    pub fn get(&self, name: &str) -> Option<&dyn BoundFormula> {
        self.formulas.get(name).map(|b| b.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn BoundFormula> {
        self.formulas.values().map(|b| b.as_ref())
    }

    pub fn evaluate(&self, name: &str, inputs: &BoundInputs) -> Result<BoundReport> {
        let formula = self
            .get(name)
            .ok_or_else(|| Error::Unsupported(format!("no bound named `{name}`")))?;
        let value = formula.evaluate(inputs)?;
        Ok(BoundReport {
            name: name.to_string(),
            inputs: inputs.clone(),
            value,
        })
    }
}

impl Default for BoundRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

/// Evaluate a built-in bound by name.
pub fn bound_value(name: &str, inputs: &BoundInputs) -> Result<BoundReport> {
    BoundRegistry::with_builtins().evaluate(name, inputs)
}
