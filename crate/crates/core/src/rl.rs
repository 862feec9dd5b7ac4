//! REINFORCE training of per-node selection policies on the
//! finding-single-leaf task.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{backward, forward, forward_trace, node_features, predict_labels, FeatureMatrix, FeatureSpec, Model, ModelConfig, ModelKind};
use crate::graph::{consistent_port_numbering, generate, shuffled_port_numbering, DegreeBound, Graph, GraphKind, PortNumbering};
use crate::local::{verify_single_leaf, Labeling};

/// Softmax of `z / temperature`, shifted by the max for stability.
pub fn softmax(z: &[f64], temperature: f64) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&x| ((x - max) / temperature).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn log_softmax(z: &[f64], temperature: f64) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = z.iter().map(|&x| (x - max) / temperature).collect();
    let lse = shifted.iter().map(|s| s.exp()).sum::<f64>().ln();
    shifted.into_iter().map(|s| s - lse).collect()
}

/// A stochastic per-node policy: softmax over the model's readout vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub model: Model,
    pub temperature: f64,
}

impl Policy {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            temperature: 1.0,
        }
    }

    pub fn probabilities(&self, g: &Graph, p: Option<&PortNumbering>, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        let logits = forward(&self.model, g, p, x)?;
        Ok(logits.iter().map(|z| softmax(z, self.temperature)).collect())
    }

    /// `sum_v log pi(labels[v] | v)`.
    pub fn log_prob(&self, g: &Graph, p: Option<&PortNumbering>, x: &FeatureMatrix, labels: &[usize]) -> Result<f64> {
        let logits = forward(&self.model, g, p, x)?;
        Ok(logits
            .iter()
            .zip(labels)
            .map(|(z, &a)| log_softmax(z, self.temperature)[a])
            .sum())
    }

    /// Argmax labels.
    pub fn greedy(&self, g: &Graph, p: Option<&PortNumbering>, x: &FeatureMatrix) -> Result<Labeling> {
        Ok(Labeling::new(predict_labels(&forward(&self.model, g, p, x)?)))
    }
}

fn categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Independent per-node samples from the policy, with their total log-probability.
pub fn sample_actions(
    pol: &Policy,
    g: &Graph,
    p: Option<&PortNumbering>,
    x: &FeatureMatrix,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, f64)> {
    let logits = forward(&pol.model, g, p, x)?;
    let mut labels = Vec::with_capacity(g.n());
    let mut log_prob = 0.0;
    for z in &logits {
        let probs = softmax(z, pol.temperature);
        let a = categorical(&probs, rng);
        log_prob += log_softmax(z, pol.temperature)[a];
        labels.push(a);
    }
    Ok((labels, log_prob))
}

/// `+1` when exactly one leaf of the star is selected, `-1` otherwise.
pub fn reward_single_leaf(g: &Graph, labels: &[usize]) -> Result<f64> {
    let ok = verify_single_leaf(g, &Labeling::new(labels.to_vec()))?;
    Ok(if ok { 1.0 } else { -1.0 })
}

/// One sampled labeling and its reward.
#[derive(Clone, Copy, Debug)]
pub struct Episode<'a> {
    pub graph: &'a Graph,
    pub ports: Option<&'a PortNumbering>,
    pub features: &'a FeatureMatrix,
    pub actions: &'a [usize],
    pub reward: f64,
}

/// Exponential moving average of rewards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub value: f64,
    pub decay: f64,
}

impl Baseline {
    pub fn new(decay: f64) -> Self {
        Self { value: 0.0, decay }
    }

    pub fn update(&mut self, reward: f64) {
        self.value = self.decay * self.value + (1.0 - self.decay) * reward;
    }
}

/// Mean over the batch of `(reward - baseline) * grad log pi(actions)`.
pub fn policy_gradient(pol: &Policy, episodes: &[Episode<'_>], baseline: f64) -> Result<Vec<f64>> {
    if episodes.is_empty() {
        return Err(Error::InvalidParams("empty episode batch".into()));
    }
    let mut total = vec![0.0; pol.model.num_params()];
    for ep in episodes {
        let advantage = ep.reward - baseline;
        if advantage == 0.0 {
            continue;
        }
        let trace = forward_trace(&pol.model, ep.graph, ep.ports, ep.features)?;
        let dlogits: Vec<Vec<f64>> = trace
            .logits
            .iter()
            .zip(ep.actions)
            .map(|(z, &a)| {
                softmax(z, pol.temperature)
                    .iter()
                    .enumerate()
                    .map(|(k, &pk)| advantage * (f64::from(u8::from(k == a)) - pk) / pol.temperature)
                    .collect()
            })
            .collect();
        let grad = backward(&pol.model, ep.graph, ep.ports, &trace, &dlogits)?.params();
        for (t, g) in total.iter_mut().zip(grad) {
            *t += g;
        }
    }
    let scale = 1.0 / episodes.len() as f64;
    total.iter_mut().for_each(|t| *t *= scale);
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Ascent-direction optimizer state over the flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Optimizer {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
        t: i32,
        m: Vec<f64>,
        v: Vec<f64>,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, num_params: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam {
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                t: 0,
                m: vec![0.0; num_params],
                v: vec![0.0; num_params],
            },
        }
    }

    /// Parameter increments for ascent along `grad`.
    pub fn direction(&mut self, grad: &[f64], lr: f64) -> Vec<f64> {
        match self {
            Optimizer::Sgd => grad.iter().map(|g| lr * g).collect(),
            Optimizer::Adam {
                beta1,
                beta2,
                eps,
                t,
                m,
                v,
            } => {
                *t = t.saturating_add(1);
                let c1 = 1.0 - beta1.powi(*t);
                let c2 = 1.0 - beta2.powi(*t);
                grad.iter()
                    .zip(m.iter_mut().zip(v.iter_mut()))
                    .map(|(&g, (mk, vk))| {
                        *mk = *beta1 * *mk + (1.0 - *beta1) * g;
                        *vk = *beta2 * *vk + (1.0 - *beta2) * g * g;
                        lr * (*mk / c1) / ((*vk / c2).sqrt() + *eps)
                    })
                    .collect()
            }
        }
    }
}

/// One plain gradient-ascent step, then the baseline absorbs the batch's mean reward.
pub fn reinforce_step(pol: &mut Policy, episodes: &[Episode<'_>], lr: f64, baseline: &mut Baseline) -> Result<()> {
    reinforce_step_with(pol, episodes, lr, baseline, &mut Optimizer::Sgd)
}

/// [`reinforce_step`] with an explicit optimizer. A zero-advantage batch
/// leaves the parameters and the optimizer state untouched.
pub fn reinforce_step_with(
    pol: &mut Policy,
    episodes: &[Episode<'_>],
    lr: f64,
    baseline: &mut Baseline,
    opt: &mut Optimizer,
) -> Result<()> {
    let grad = policy_gradient(pol, episodes, baseline.value)?;
    let mut params = pol.model.params();
    if grad.iter().any(|&g| g != 0.0) {
        for (p, d) in params.iter_mut().zip(opt.direction(&grad, lr)) {
            *p += d;
        }
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NumericalError("parameter update produced a non-finite value".into()));
    }
    pol.model.set_params(&params)?;
    let mean = episodes.iter().map(|e| e.reward).sum::<f64>() / episodes.len() as f64;
    baseline.update(mean);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub trials: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub baseline_decay: f64,
    pub seed: u64,
    /// Width of both message-passing layers.
    pub layer_width: usize,
    /// Initial weights are uniform in `(-init_scale, init_scale)`.
    pub init_scale: f64,
    pub temperature: f64,
    /// Reward-curve sampling period.
    pub curve_every: usize,
    /// Distinct consistent port numberings the greedy policy must solve.
    pub eval_port_numberings: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            trials: 10,
            optimizer: OptimizerKind::Adam,
            learning_rate: 5e-4,
            baseline_decay: 0.99,
            seed: 0,
            layer_width: 32,
            init_scale: 0.1,
            temperature: 1.0,
            curve_every: 100,
            eval_port_numberings: 6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParams("learning rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.baseline_decay) {
            return Err(Error::InvalidParams("baseline decay must lie in [0, 1]".into()));
        }
        if !(self.temperature > 0.0) || !(self.init_scale > 0.0) {
            return Err(Error::InvalidParams("temperature and init scale must be positive".into()));
        }
        if self.layer_width == 0 || self.curve_every == 0 {
            return Err(Error::InvalidParams("layer width and curve period must be positive".into()));
        }
        if self.eval_port_numberings < 5 {
            return Err(Error::InvalidParams("at least 5 port numberings are evaluated".into()));
        }
        Ok(())
    }

    /// Seed of trial `t`; distinct trials never share a stream.
    pub fn trial_seed(&self, t: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(t as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub mean_reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    /// Greedy policy of `checkpoint` solves every evaluated port numbering.
    pub success: bool,
    pub reward_curve: Vec<CurvePoint>,
    pub checkpoint: Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub kind: ModelKind,
    pub config: TrainConfig,
    pub trials: Vec<TrialReport>,
}

impl TrainReport {
    pub fn successes(&self) -> usize {
        self.trials.iter().filter(|t| t.success).count()
    }

    /// Recomputes every success flag from its checkpoint.
    pub fn verify(&self) -> Result<bool> {
        let task = SingleLeafTask::new(self.config.eval_port_numberings)?;
        for t in &self.trials {
            if task.solved_by(&t.checkpoint)? != t.success {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The star `K_{1,3}` with degree features, used for training and testing.
pub struct SingleLeafTask {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub train_ports: PortNumbering,
    pub eval_ports: Vec<PortNumbering>,
}

impl SingleLeafTask {
    pub fn new(eval_port_numberings: usize) -> Result<Self> {
        let graph = generate(GraphKind::Star { k: 3 }, 0)?;
        let delta = DegreeBound::of(&graph);
        let features = node_features(&graph, FeatureSpec::Degree, None, delta)?;
        let train_ports = consistent_port_numbering(&graph);
        let eval_ports = distinct_port_numberings(&graph, eval_port_numberings);
        if eval_ports.len() < eval_port_numberings.min(5) {
            return Err(Error::InvalidParams(format!(
                "only {} distinct port numberings exist",
                eval_ports.len()
            )));
        }
        Ok(Self {
            graph,
            features,
            train_ports,
            eval_ports,
        })
    }

    pub fn delta(&self) -> usize {
        self.graph.max_degree()
    }

    /// Greedy labels solve the task under every evaluation numbering.
    pub fn solved_by(&self, model: &Model) -> Result<bool> {
        let pol = Policy::new(model.clone());
        for p in &self.eval_ports {
            let ports = (model.kind == ModelKind::Vvc).then_some(p);
            let lab = pol.greedy(&self.graph, ports, &self.features)?;
            if !verify_single_leaf(&self.graph, &lab)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Up to `count` distinct consistent numberings: the canonical one, then
/// seeded shuffles.
pub fn distinct_port_numberings(g: &Graph, count: usize) -> Vec<PortNumbering> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let canonical = consistent_port_numbering(g);
    seen.insert(canonical.assignments());
    out.push(canonical);
    for seed in 0..(64 * count as u64) {
        if out.len() >= count {
            break;
        }
        let p = shuffled_port_numbering(g, seed);
        if seen.insert(p.assignments()) {
            out.push(p);
        }
    }
    out
}

fn run_trial(cfg: &TrainConfig, kind: ModelKind, trial: usize, task: &SingleLeafTask) -> Result<TrialReport> {
    let seed = cfg.trial_seed(trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arch = ModelConfig::two_layer(kind, task.delta(), task.features.width(), cfg.layer_width);
    let mut pol = Policy {
        model: Model::random(&arch, cfg.init_scale, &mut rng)?,
        temperature: cfg.temperature,
    };
    let ports = (kind == ModelKind::Vvc).then_some(&task.train_ports);
    let mut baseline = Baseline::new(cfg.baseline_decay);
    let mut opt = Optimizer::new(cfg.optimizer, pol.model.num_params());
    let mut curve = Vec::new();
    let mut window = 0.0;
    for it in 1..=cfg.iterations {
        let (actions, _) = sample_actions(&pol, &task.graph, ports, &task.features, &mut rng)?;
        let reward = reward_single_leaf(&task.graph, &actions)?;
        let ep = Episode {
            graph: &task.graph,
            ports,
            features: &task.features,
            actions: &actions,
            reward,
        };
        reinforce_step_with(&mut pol, &[ep], cfg.learning_rate, &mut baseline, &mut opt)?;
        window += reward;
        if it % cfg.curve_every == 0 {
            curve.push(CurvePoint {
                iteration: it,
                mean_reward: window / cfg.curve_every as f64,
            });
            window = 0.0;
        }
    }
    let success = task.solved_by(&pol.model)?;
    Ok(TrialReport {
        trial,
        seed,
        success,
        reward_curve: curve,
        checkpoint: pol.model,
    })
}

/// Independent trials on `K_{1,3}`; trials run in parallel, each with its
/// own seeded generator, and are reported in trial order.
pub fn train(cfg: &TrainConfig, kind: ModelKind) -> Result<TrainReport> {
    cfg.validate()?;
    let task = SingleLeafTask::new(cfg.eval_port_numberings)?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, kind, t, &task))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainReport {
        kind,
        config: cfg.clone(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> Graph {
        generate(GraphKind::Star { k: 3 }, 0).unwrap()
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        for z in [vec![0.0, 0.0], vec![1e6, 0.0], vec![-3.0, 2.5, 0.1], vec![-1e300, 1e300]] {
            let s: f64 = softmax(&z, 1.0).iter().sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rewards() {
        let g = star();
        assert_eq!(reward_single_leaf(&g, &[0, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(reward_single_leaf(&g, &[1, 1, 0, 0]).unwrap(), -1.0);
        assert_eq!(reward_single_leaf(&g, &[0, 0, 0, 0]).unwrap(), -1.0);
        let tri = generate(GraphKind::Cycle { n: 3 }, 0).unwrap();
        assert!(matches!(reward_single_leaf(&tri, &[0, 1, 0]), Err(Error::NotAStar)));
    }

    #[test]
    fn uniform_logits_log_prob() {
        let task = SingleLeafTask::new(6).unwrap();
        let cfg = ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4);
        let pol = Policy::new(Model::zeros(&cfg).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, lp) = sample_actions(&pol, &task.graph, Some(&task.train_ports), &task.features, &mut rng).unwrap();
        assert!((lp - 4.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn saturated_logits_sample_label_one() {
        let task = SingleLeafTask::new(6).unwrap();
        let cfg = ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4);
        let mut m = Model::zeros(&cfg).unwrap();
        // Output bias (0, 1e6): label 1 ("second label") dominates.
        m.readout.layers[1].bias = vec![0.0, 1e6];
        let pol = Policy::new(m);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ones = 0usize;
        let draws = 10_000 / 4;
        for _ in 0..draws {
            let (a, _) = sample_actions(&pol, &task.graph, Some(&task.train_ports), &task.features, &mut rng).unwrap();
            ones += a.iter().filter(|&&l| l == 1).count();
        }
        assert!(ones as f64 / (4 * draws) as f64 >= 0.999);
    }

    #[test]
    fn sampling_is_seeded() {
        let task = SingleLeafTask::new(6).unwrap();
        let cfg = ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pol = Policy::new(Model::random(&cfg, 1.0, &mut rng).unwrap());
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| sample_actions(&pol, &task.graph, Some(&task.train_ports), &task.features, &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
    }

    #[test]
    fn zero_advantage_leaves_parameters() {
        let task = SingleLeafTask::new(6).unwrap();
        let cfg = ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pol = Policy::new(Model::random(&cfg, 0.5, &mut rng).unwrap());
        let before = pol.model.clone();
        let actions = vec![0, 1, 0, 0];
        let ep = Episode {
            graph: &task.graph,
            ports: Some(&task.train_ports),
            features: &task.features,
            actions: &actions,
            reward: 1.0,
        };
        let mut b = Baseline { value: 1.0, decay: 0.99 };
        reinforce_step(&mut pol, &[ep], 0.1, &mut b).unwrap();
        assert_eq!(pol.model, before);
        assert!(reinforce_step(&mut pol, &[], 0.1, &mut b).is_err());
    }

    #[test]
    fn positive_advantage_raises_log_prob() {
        let task = SingleLeafTask::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in [ModelKind::Vvc, ModelKind::Mb, ModelKind::Sb] {
            let cfg = ModelConfig::two_layer(kind, 3, 3, 4);
            let mut pol = Policy::new(Model::random(&cfg, 0.5, &mut rng).unwrap());
            let ports = (kind == ModelKind::Vvc).then_some(&task.train_ports);
            let (actions, before) = sample_actions(&pol, &task.graph, ports, &task.features, &mut rng).unwrap();
            let ep = Episode {
                graph: &task.graph,
                ports,
                features: &task.features,
                actions: &actions,
                reward: 1.0,
            };
            reinforce_step(&mut pol, &[ep], 1e-3, &mut Baseline::new(0.99)).unwrap();
            let after = pol.log_prob(&task.graph, ports, &task.features, &actions).unwrap();
            assert!(after > before, "{kind}: {after} <= {before}");
        }
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let mut opt = Optimizer::new(OptimizerKind::Adam, 3);
        let d = opt.direction(&[2.0, -1e-6, 0.0], 0.01);
        assert!((d[0] - 0.01).abs() < 1e-9);
        assert!((d[1] + 0.01).abs() < 1e-4);
        assert_eq!(d[2], 0.0);
        assert_eq!(Optimizer::new(OptimizerKind::Sgd, 3).direction(&[2.0, -1.0, 0.0], 0.5), vec![1.0, -0.5, 0.0]);
    }

    #[test]
    fn baseline_is_moving_average() {
        let mut b = Baseline::new(0.5);
        b.update(1.0);
        b.update(-1.0);
        assert_eq!(b.value, -0.25);
    }

    #[test]
    fn zero_iterations_is_well_formed() {
        let cfg = TrainConfig {
            iterations: 0,
            trials: 2,
            ..TrainConfig::default()
        };
        let r = train(&cfg, ModelKind::Vvc).unwrap();
        assert_eq!(r.trials.len(), 2);
        assert!(r.trials.iter().all(|t| t.reward_curve.is_empty()));
        assert!(r.verify().unwrap());
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            trials: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(distinct_port_numberings(&star(), 6).len(), 6);
        assert_eq!(distinct_port_numberings(&star(), 10).len(), 6);
    }
}
