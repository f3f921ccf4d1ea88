//! Random-forest regression over CART trees grown by variance reduction.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, RNG_ID};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means ceil(p / 3).
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    /// Draw a bootstrap sample per tree. Disabled only for oracle checks.
    pub bootstrap: bool,
    /// Allowed target interval, checked before training.
    pub target_bounds: Option<(f64, f64)>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 500,
            mtry: None,
            min_leaf: 5,
            bootstrap: true,
            target_bounds: None,
        }
    }
}

impl ForestParams {
    pub fn mtry_for(&self, p: usize) -> usize {
        self.mtry.unwrap_or_else(|| p.div_ceil(3)).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
        n: usize,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub params: ForestParams,
    pub seed: u64,
    pub rng_id: String,
    pub target_range: (f64, f64),
    pub schema_names: Vec<String>,
    pub importances: Vec<f64>,
    /// Set when the targets had zero variance and `importances` is uniform.
    pub importances_degenerate: bool,
    pub trees: Vec<TreeNode>,
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    p: usize,
    mtry: usize,
    min_leaf: usize,
    importance: Vec<f64>,
    rng: SeededRng,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
    left_len: usize,
}

impl Grower<'_> {
    fn grow(&mut self, idx: &mut [usize]) -> TreeNode {
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let first = self.y[idx[0]];
        let constant = idx.iter().all(|&i| self.y[i] == first);
        let leaf = || TreeNode::Leaf {
            value: if constant { first } else { mean },
            n,
        };
        if constant || n < 2 * self.min_leaf {
            return leaf();
        }
        let Some(best) = self.best_split(idx) else {
            return leaf();
        };
        self.importance[best.feature] += best.gain;

        let f = best.feature;
        let t = best.threshold;
        idx.sort_by(|&a, &b| {
            let (va, vb) = (self.x[a][f], self.x[b][f]);
            (va > t).cmp(&(vb > t)).then(a.cmp(&b))
        });
        let (l, r) = idx.split_at_mut(best.left_len);
        TreeNode::Split {
            feature: f,
            threshold: t,
            left: Box::new(self.grow(l)),
            right: Box::new(self.grow(r)),
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let mut all: Vec<usize> = (0..self.p).collect();
        for i in 0..self.mtry {
            let j = i + self.rng.below(self.p - i);
            all.swap(i, j);
        }
        let mut chosen = all[..self.mtry].to_vec();
        chosen.sort_unstable();
        chosen
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let base = total * total / n as f64;
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<(f64, f64)> = Vec::with_capacity(n);
        for f in self.candidate_features() {
            order.clear();
            order.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_sum = 0.0;
            for i in 1..n {
                left_sum += order[i - 1].1;
                if order[i - 1].0 == order[i].0 {
                    continue;
                }
                if i < self.min_leaf || n - i < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / i as f64
                    + right_sum * right_sum / (n - i) as f64
                    - base;
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let (a, b) = (order[i - 1].0, order[i].0);
                    let mid = 0.5 * (a + b);
                    best = Some(BestSplit {
                        feature: f,
                        // adjacent floats can round the midpoint up to `b`
                        threshold: if mid < b { mid } else { a },
                        gain,
                        left_len: i,
                    });
                }
            }
        }
        best
    }
}

fn validate_inputs(x: &[Vec<f64>], y: &[f64], names: &[String], params: &ForestParams) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "{} feature rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::Training(format!(
            "need at least 2 samples, got {}",
            y.len()
        )));
    }
    let p = names.len();
    if p == 0 {
        return Err(Error::Argument("no features".into()));
    }
    for (r, row) in x.iter().enumerate() {
        if row.len() != p {
            return Err(Error::Argument(format!(
                "row {r} has {} features, expected {p}",
                row.len()
            )));
        }
        if row.iter().any(|v| v.is_nan()) {
            return Err(Error::Validation(format!("NaN in feature row {r}")));
        }
    }
    if let Some(i) = y.iter().position(|v| v.is_nan()) {
        return Err(Error::Validation(format!("NaN target at row {i}")));
    }
    if let Some((lo, hi)) = params.target_bounds {
        if let Some(v) = y.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(Error::Validation(format!(
                "target {v} outside declared range [{lo}, {hi}]"
            )));
        }
    }
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(Error::Config("n_trees and min_leaf must be >= 1".into()));
    }
    Ok(())
}

/// Fits a forest; tree `t` draws from a generator seeded with `seed + t`.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[f64],
    feature_names: &[String],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    validate_inputs(x, y, feature_names, params)?;
    let p = feature_names.len();
    let n = y.len();
    let mtry = params.mtry_for(p);

    let grown: Vec<(TreeNode, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut grower = Grower {
                x,
                y,
                p,
                mtry,
                min_leaf: params.min_leaf,
                importance: vec![0.0; p],
                rng: SeededRng::new(seed.wrapping_add(t as u64)),
            };
            let mut idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| grower.rng.below(n)).collect()
            } else {
                (0..n).collect()
            };
            let root = grower.grow(&mut idx);
            (root, grower.importance)
        })
        .collect();

    let mut raw = vec![0.0; p];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (acc, v) in raw.iter_mut().zip(imp) {
            *acc += v;
        }
        trees.push(tree);
    }
    let total: f64 = raw.iter().sum();
    let degenerate = total <= 0.0;
    let importances = if degenerate {
        vec![1.0 / p as f64; p]
    } else {
        raw.iter().map(|v| v / total).collect()
    };

    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ForestModel {
        format_version: FOREST_FORMAT_VERSION,
        params: params.clone(),
        seed,
        rng_id: RNG_ID.to_string(),
        target_range: (lo, hi),
        schema_names: feature_names.to_vec(),
        importances,
        importances_degenerate: degenerate,
        trees,
    })
}

/// Trains after ordering rows by a caller-supplied stable key, so the
/// result does not depend on input row order.
pub fn train_forest_keyed<K: Ord>(
    x: &[Vec<f64>],
    y: &[f64],
    keys: &[K],
    feature_names: &[String],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    if keys.len() != y.len() {
        return Err(Error::Argument(format!(
            "{} keys for {} rows",
            keys.len(),
            y.len()
        )));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let xs: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    train_forest(&xs, &ys, feature_names, params, seed)
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.schema_names.len()
    }

    /// Mean of per-tree leaf values, kept inside the training-target range.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::Argument(format!(
                "feature vector has {} values, model expects {}",
                x.len(),
                self.n_features()
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        let (lo, hi) = self.target_range;
        Ok((sum / self.trees.len() as f64).clamp(lo, hi))
    }

    /// Top-`k` features by importance, ties alphabetical.
    pub fn importance_report(&self, k: usize) -> Vec<(String, f64)> {
        let mut pairs: Vec<(String, f64)> = self
            .schema_names
            .iter()
            .cloned()
            .zip(self.importances.iter().copied())
            .collect();
        pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        pairs.truncate(k.min(pairs.len()));
        pairs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let raw = serde_json::Value::deserialize(&mut de)
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        de.end().map_err(|e| Error::ModelLoad(e.to_string()))?;
        let version = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::ModelLoad("missing format_version".into()))?;
        if version != u64::from(FOREST_FORMAT_VERSION) {
            return Err(Error::Version {
                found: version as u32,
                supported: vec![FOREST_FORMAT_VERSION],
            });
        }
        let model: ForestModel = serde_json::from_value(raw)
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let p = self.schema_names.len();
        if self.importances.len() != p {
            return Err(Error::ModelLoad(format!(
                "{} importances for {p} features",
                self.importances.len()
            )));
        }
        if self.trees.is_empty() {
            return Err(Error::ModelLoad("model has no trees".into()));
        }
        if self.target_range.0 > self.target_range.1 {
            return Err(Error::ModelLoad("inverted target range".into()));
        }
        fn check(node: &TreeNode, p: usize) -> bool {
            match node {
                TreeNode::Leaf { value, .. } => value.is_finite(),
                TreeNode::Split {
                    feature, left, right, ..
                } => *feature < p && check(left, p) && check(right, p),
            }
        }
        if !self.trees.iter().all(|t| check(t, p)) {
            return Err(Error::ModelLoad("tree references an unknown feature".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn constant_target_is_degenerate() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y = vec![4.0; 20];
        let m = train_forest(&x, &y, &names(2), &ForestParams { n_trees: 10, ..Default::default() }, 1)
            .unwrap();
        assert!(m.importances_degenerate);
        assert_eq!(m.importances, vec![0.5, 0.5]);
        for row in &x {
            assert_eq!(m.predict(row).unwrap(), 4.0);
        }
        assert_eq!(m.predict(&[100.0, -5.0]).unwrap(), 4.0);
    }

    #[test]
    fn input_validation() {
        let p = ForestParams::default();
        assert!(matches!(
            train_forest(&[vec![1.0]], &[1.0], &names(1), &p, 0),
            Err(Error::Training(_))
        ));
        assert!(matches!(
            train_forest(&[vec![f64::NAN], vec![1.0]], &[1.0, 2.0], &names(1), &p, 0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            train_forest(&[vec![0.0], vec![1.0]], &[1.0, f64::NAN], &names(1), &p, 0),
            Err(Error::Validation(_))
        ));
        let bounded = ForestParams {
            target_bounds: Some((1.0, 7.0)),
            ..Default::default()
        };
        assert!(train_forest(&[vec![0.0], vec![1.0]], &[1.0, 8.0], &names(1), &bounded, 0).is_err());
    }

    #[test]
    fn predict_dimension_mismatch() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]];
        let m = train_forest(&x, &[1.0, 2.0, 3.0], &names(2), &ForestParams { n_trees: 3, ..Default::default() }, 0)
            .unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn mtry_default() {
        let p = ForestParams::default();
        assert_eq!(p.mtry_for(57), 19);
        assert_eq!(p.mtry_for(1), 1);
        assert_eq!(p.mtry_for(4), 2);
        let p = ForestParams { mtry: Some(100), ..Default::default() };
        assert_eq!(p.mtry_for(5), 5);
    }

    #[test]
    fn load_errors() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| 1.0 + (i % 7) as f64).collect();
        let m = train_forest(&x, &y, &names(1), &ForestParams { n_trees: 4, ..Default::default() }, 2)
            .unwrap();
        let json = m.to_json();
        assert_eq!(ForestModel::from_json(&json).unwrap(), m);
        assert!(matches!(
            ForestModel::from_json(&json[..json.len() - 10]),
            Err(Error::ModelLoad(_))
        ));
        let v0 = json.replacen("\"format_version\":1", "\"format_version\":0", 1);
        let err = ForestModel::from_json(&v0).unwrap_err();
        assert!(matches!(err, Error::Version { found: 0, .. }));
        assert!(err.to_string().contains("[1]"));
    }
}
