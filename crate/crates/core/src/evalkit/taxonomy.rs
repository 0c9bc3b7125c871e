//! Question/answer-type taxonomy for benchmark generation and a seeded
//! sampler over it. Categories are drawn independently per categorization.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    /// Sampling probability; sums to 1 within a categorization.
    pub probability: f64,
    /// Probability as originally tabulated, when it differs from the
    /// renormalized sampling probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_probability: Option<f64>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Categorization {
    pub name: String,
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyConfig {
    pub formulation: Categorization,
    pub premise: Categorization,
    pub answer_type: Categorization,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Combination {
    pub formulation: String,
    pub premise: String,
    pub answer_type: String,
}

fn cat(name: &str, probability: f64, table: Option<f64>, description: &str) -> Category {
    Category {
        name: name.into(),
        probability,
        table_probability: table,
        description: description.into(),
    }
}

/// The benchmark taxonomy. The eight question formulations are tabulated
/// at 10% each (80% total); their sampling probability is renormalized to
/// 12.5% and the tabulated value kept in `table_probability`.
pub fn default_taxonomy() -> TaxonomyConfig {
    let f = |name: &str, desc: &str| cat(name, 0.125, Some(0.10), desc);
    TaxonomyConfig {
        formulation: Categorization {
            name: "Question Formulation".into(),
            categories: vec![
                f("Concise and Natural", "Short, direct question phrased naturally."),
                f("Verbose and Natural", "Natural question longer than nine words."),
                f("List-based", "Requests several items or examples."),
                f("Definition-based", "Requests the meaning of a term."),
                f("Opinion-seeking", "Requests a subjective viewpoint."),
                f("Hypothetical", "Poses an imagined scenario."),
                f("How-to", "Requests procedural, step-by-step guidance."),
                f("Yes/No", "Answerable with yes or no."),
            ],
        },
        premise: Categorization {
            name: "Premise Categorisation".into(),
            categories: vec![
                cat("w/o Premise", 0.70, None, "No information about the asker."),
                cat("w/ Premise", 0.30, None, "Opens with a short premise about the asker's needs."),
            ],
        },
        answer_type: Categorization {
            name: "Answer Type".into(),
            categories: vec![
                cat("Factoid", 0.15, None, "A specific name, date or number."),
                cat("Multi-aspect", 0.25, None, "Two aspects of one entity drawn from two documents."),
                cat("Comparison", 0.30, None, "Two related concepts compared on a shared attribute."),
                cat("Path-following", 0.15, None, "Follows a fixed reasoning path across entities."),
                cat("Path-finding", 0.15, None, "Finds the right path among many entity connections."),
            ],
        },
    }
}

impl Categorization {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.categories.is_empty() {
            return Err(EvalError::Taxonomy(format!("{} has no categories", self.name)));
        }
        let mut names = HashSet::new();
        let mut sum = 0.0;
        for c in &self.categories {
            if !names.insert(c.name.as_str()) {
                return Err(EvalError::Taxonomy(format!(
                    "duplicate category {:?} in {}",
                    c.name, self.name
                )));
            }
            if !(0.0..=1.0).contains(&c.probability) {
                return Err(EvalError::Taxonomy(format!(
                    "probability of {:?} outside [0, 1]",
                    c.name
                )));
            }
            sum += c.probability;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(EvalError::Taxonomy(format!(
                "probabilities in {} sum to {sum}",
                self.name
            )));
        }
        Ok(())
    }

    /// Inverse-CDF lookup for `u` in [0, 1).
    fn pick(&self, u: f64) -> &Category {
        let mut acc = 0.0;
        for c in &self.categories {
            acc += c.probability;
            if u < acc {
                return c;
            }
        }
        // rounding can leave acc marginally below 1
        self.categories
            .iter()
            .rev()
            .find(|c| c.probability > 0.0)
            .unwrap_or(&self.categories[self.categories.len() - 1])
    }
}

impl TaxonomyConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        self.formulation.validate()?;
        self.premise.validate()?;
        self.answer_type.validate()
    }

    pub fn to_toml(&self) -> Result<String, EvalError> {
        toml::to_string(self).map_err(|e| EvalError::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, EvalError> {
        toml::from_str(text).map_err(|e| EvalError::Format(e.to_string()))
    }
}

/// `count` independent draws from a ChaCha8 stream seeded with `seed`.
pub fn sample_combinations(
    cfg: &TaxonomyConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<Combination>, EvalError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let f = cfg.formulation.pick(rng.random::<f64>());
            let p = cfg.premise.pick(rng.random::<f64>());
            let a = cfg.answer_type.pick(rng.random::<f64>());
            Combination {
                formulation: f.name.clone(),
                premise: p.name.clone(),
                answer_type: a.name.clone(),
            }
        })
        .collect())
}

/// First draw of the stream for `seed`.
pub fn sample_combination(cfg: &TaxonomyConfig, seed: u64) -> Result<Combination, EvalError> {
    Ok(sample_combinations(cfg, seed, 1)?.remove(0))
}
