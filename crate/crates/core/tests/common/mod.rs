#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use confens::confidence::{Aggregation, Measure, Normalization};
use confens::probstream::{ProbabilityStream, StreamKind};
use confens::ConfidenceConfig;

const PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

/// Arbitrary-precision reference for entropies, normalizations and stream confidences.
pub struct Oracle {
    cc: Consts,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            cc: Consts::new().expect("astro-float constants"),
        }
    }
}

pub fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

pub fn to_f64(x: &BigFloat) -> f64 {
    format!("{x}").parse().expect("decimal rendering of a BigFloat")
}

impl Oracle {
    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PREC, RM, &mut self.cc)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PREC, RM, &mut self.cc)
    }

    fn sum(xs: impl IntoIterator<Item = BigFloat>) -> BigFloat {
        xs.into_iter().fold(big(0.0), |a, x| a.add(&x, PREC, RM))
    }

    /// Entropy of `p` (zero entries contribute nothing). `ln_p` holds the logs of the nonzero entries.
    fn entropy_from_logs(&mut self, p: &[BigFloat], ln_p: &[BigFloat], measure: Measure, alpha: f64) -> BigFloat {
        let gibbs = || Self::sum(p.iter().zip(ln_p).map(|(a, l)| a.mul(l, PREC, RM))).neg();
        if measure == Measure::Gibbs || alpha == 1.0 {
            return gibbs();
        }
        let s = self.power_sum(ln_p, alpha);
        self.entropy_from_power_sum(&s, measure, alpha)
    }

    /// `sum p^alpha` over the nonzero entries.
    fn power_sum(&mut self, ln_p: &[BigFloat], alpha: f64) -> BigFloat {
        let a = big(alpha);
        let mut total = big(0.0);
        for l in ln_p {
            let e = self.exp(&a.mul(l, PREC, RM));
            total = total.add(&e, PREC, RM);
        }
        total
    }

    fn entropy_from_power_sum(&mut self, power_sum: &BigFloat, measure: Measure, alpha: f64) -> BigFloat {
        let a = big(alpha);
        let one = big(1.0);
        match measure {
            Measure::Tsallis => one.sub(power_sum, PREC, RM).div(&a.sub(&one, PREC, RM), PREC, RM),
            Measure::Renyi => self.ln(power_sum).div(&one.sub(&a, PREC, RM), PREC, RM),
            _ => unreachable!(),
        }
    }

    pub fn max_entropy(&mut self, vocab: usize, measure: Measure, alpha: f64) -> BigFloat {
        let ln_v = self.ln(&big(vocab as f64));
        if measure != Measure::Tsallis || alpha == 1.0 {
            return ln_v;
        }
        let one = big(1.0);
        let a = big(alpha);
        let e = self.exp(&one.sub(&a, PREC, RM).mul(&ln_v, PREC, RM));
        one.sub(&e, PREC, RM).div(&a.sub(&one, PREC, RM), PREC, RM)
    }

    pub fn normalize(&mut self, h: &BigFloat, h_max: &BigFloat, normalization: Normalization) -> BigFloat {
        let one = big(1.0);
        match normalization {
            Normalization::Linear => one.sub(&h.div(h_max, PREC, RM), PREC, RM),
            Normalization::Exponential => {
                let eh = self.exp(&h.neg());
                let floor = self.exp(&h_max.neg());
                eh.sub(&floor, PREC, RM).div(&one.sub(&floor, PREC, RM), PREC, RM)
            }
        }
    }

    /// Step confidence of an exact distribution, as a big float.
    pub fn step_confidence_big(&mut self, p: &[BigFloat], cfg: &ConfidenceConfig) -> BigFloat {
        if cfg.measure == Measure::MaxProb {
            return p[1..].iter().fold(p[0].clone(), |a, x| a.max(x));
        }
        let nz: Vec<BigFloat> = p.iter().filter(|x| !x.is_zero()).cloned().collect();
        let ln_p: Vec<BigFloat> = nz.iter().map(|x| self.ln(x)).collect();
        let h = self.entropy_from_logs(&nz, &ln_p, cfg.measure, cfg.alpha);
        let h_max = self.max_entropy(p.len(), cfg.measure, cfg.alpha);
        self.normalize(&h, &h_max, cfg.normalization)
    }

    /// Entropies of `p` for every listed `(measure, alpha)`, sharing logs and power sums.
    pub fn entropies(&mut self, p: &[f64], families: &[(Measure, f64)]) -> Vec<BigFloat> {
        let nz: Vec<BigFloat> = p.iter().filter(|&&x| x > 0.0).map(|&x| big(x)).collect();
        let ln_p: Vec<BigFloat> = nz.iter().map(|x| self.ln(x)).collect();
        let mut power_sums: Vec<(f64, BigFloat)> = Vec::new();
        families
            .iter()
            .map(|&(m, a)| {
                if m == Measure::Gibbs || a == 1.0 {
                    return self.entropy_from_logs(&nz, &ln_p, m, a);
                }
                let s = match power_sums.iter().find(|(b, _)| *b == a) {
                    Some((_, s)) => s.clone(),
                    None => {
                        let s = self.power_sum(&ln_p, a);
                        power_sums.push((a, s.clone()));
                        s
                    }
                };
                self.entropy_from_power_sum(&s, m, a)
            })
            .collect()
    }

    /// Temperature-scaled step distribution in exact arithmetic.
    pub fn distribution(&mut self, values: &[f64], kind: StreamKind, temperature: f64) -> Vec<BigFloat> {
        let inv_t = big(1.0).div(&big(temperature), PREC, RM);
        let raw: Vec<BigFloat> = values
            .iter()
            .map(|&v| match kind {
                StreamKind::Logits => self.exp(&big(v).mul(&inv_t, PREC, RM)),
                StreamKind::Probabilities if v == 0.0 => big(0.0),
                StreamKind::Probabilities => {
                    let l = self.ln(&big(v));
                    self.exp(&l.mul(&inv_t, PREC, RM))
                }
            })
            .collect();
        let total = Self::sum(raw.iter().cloned());
        raw.iter().map(|x| x.div(&total, PREC, RM)).collect()
    }

    /// Confidence of a whole stream, computed from the definitions.
    pub fn stream_confidence(&mut self, stream: &ProbabilityStream, cfg: &ConfidenceConfig) -> f64 {
        let mut kept = Vec::new();
        let mut all = Vec::new();
        for step in &stream.steps {
            let p = self.distribution(&step.values, stream.kind, cfg.temperature);
            let c = self.step_confidence_big(&p, cfg);
            if !(cfg.exclude_blanks && step.emitted_token == stream.blank_index) {
                kept.push(c.clone());
            }
            all.push(c);
        }
        let values = if kept.is_empty() { all } else { kept };
        let n = values.len();
        let out = match cfg.aggregation {
            Aggregation::Min => values[1..].iter().fold(values[0].clone(), |a, x| a.min(x)),
            Aggregation::Max => values[1..].iter().fold(values[0].clone(), |a, x| a.max(x)),
            Aggregation::Mean => Self::sum(values).div(&big(n as f64), PREC, RM),
            Aggregation::Product => values.iter().fold(big(1.0), |a, x| a.mul(x, PREC, RM)),
        };
        to_f64(&out)
    }
}
