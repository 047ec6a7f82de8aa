//! One-input networks with ReLU / max / identity gates, their exact PWL
//! extraction, and the structure-parameter bounds on entropy and width.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pwl::PwlMap;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Relu,
    /// Maximum over all pre-activations of the layer; one output.
    Max,
    Identity,
}

impl Gate {
    fn parse(name: &str) -> Result<Gate> {
        match name {
            "relu" => Ok(Gate::Relu),
            "max" => Ok(Gate::Max),
            "identity" | "linear" => Ok(Gate::Identity),
            other => Err(Error::UnsupportedGate(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    /// `rows × inputs`.
    pub weights: Vec<Vec<Rational>>,
    pub biases: Vec<Rational>,
    pub gate: Gate,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.weights[0].len()
    }

    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    pub fn outputs(&self) -> usize {
        match self.gate {
            Gate::Max => 1,
            _ => self.rows(),
        }
    }

    fn apply(&self, input: &[Rational]) -> Vec<Rational> {
        let pre = self.weights.iter().zip(&self.biases).map(|(row, b)| {
            row.iter().zip(input).fold(b.clone(), |acc, (w, x)| acc + w * x)
        });
        match self.gate {
            Gate::Relu => pre.map(|z| if z < Rational::zero() { Rational::zero() } else { z }).collect(),
            Gate::Identity => pre.collect(),
            Gate::Max => vec![pre.max().unwrap()],
        }
    }
}

/// `(t, d1, d2)` semi-algebraic profile of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateProfile {
    pub t: u64,
    pub d1: u64,
    pub d2: u64,
}

impl GateProfile {
    pub const RELU: GateProfile = GateProfile { t: 1, d1: 1, d2: 1 };

    pub fn new(t: u64, d1: u64, d2: u64) -> Result<Self> {
        if t == 0 || d1 == 0 || d2 == 0 {
            return Err(Error::ParameterOutOfRange("gate profile entries must be positive".into()));
        }
        Ok(GateProfile { t, d1, d2 })
    }

    /// Max over `n` inputs is `(n(n-1), 1, 1)`.
    pub fn max_gate(n: u64) -> Self {
        GateProfile { t: (n * n.saturating_sub(1)).max(1), d1: 1, d2: 1 }
    }

    /// Entrywise maximum.
    pub fn join(self, other: GateProfile) -> Self {
        GateProfile { t: self.t.max(other.t), d1: self.d1.max(other.d1), d2: self.d2.max(other.d2) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuralNet {
    pub layers: Vec<Layer>,
}

impl NeuralNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::MalformedInput("network has no layers".into()));
        }
        let mut width = 1;
        for (i, layer) in layers.iter().enumerate() {
            if layer.weights.is_empty() {
                return Err(Error::MalformedInput(format!("layer {i} has no weight rows")));
            }
            if layer.weights.iter().any(|r| r.len() != width) {
                return Err(Error::DimensionMismatch(format!("layer {i} expects {width} inputs per row")));
            }
            if layer.biases.len() != layer.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} has {} rows but {} biases",
                    layer.rows(),
                    layer.biases.len()
                )));
            }
            width = layer.outputs();
        }
        if width != 1 {
            return Err(Error::DimensionMismatch(format!("network output has dimension {width}, expected 1")));
        }
        Ok(NeuralNet { layers })
    }

    /// Depth `l`: number of layers with a non-identity gate.
    pub fn depth(&self) -> usize {
        self.layers.iter().filter(|l| l.gate != Gate::Identity).count()
    }

    /// Width `m`: most nodes (weight rows) in any gate layer.
    pub fn width(&self) -> usize {
        self.layers.iter().filter(|l| l.gate != Gate::Identity).map(Layer::rows).max().unwrap_or(1)
    }

    /// Per-gate maximum profile; an all-affine network reports the ReLU profile.
    pub fn profile(&self) -> GateProfile {
        self.layers
            .iter()
            .filter_map(|l| match l.gate {
                Gate::Relu => Some(GateProfile::RELU),
                Gate::Max => Some(GateProfile::max_gate(l.rows() as u64)),
                Gate::Identity => None,
            })
            .fold(GateProfile::RELU, GateProfile::join)
    }

    /// `(l, m)` with both clamped to at least 1, as the bounds require.
    pub fn shape(&self) -> (usize, usize) {
        (self.depth().max(1), self.width().max(1))
    }

    pub fn forward(&self, x: &Rational) -> Rational {
        let mut v = vec![x.clone()];
        for layer in &self.layers {
            v = layer.apply(&v);
        }
        v.pop().unwrap()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    weights: Vec<Vec<String>>,
    biases: Vec<String>,
    gate: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    layers: Vec<LayerFile>,
}

/// Parses the JSON network description; every weight is a `"p/q"` string.
pub fn parse_network(text: &str) -> Result<NeuralNet> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    let layers = file
        .layers
        .into_iter()
        .map(|l| {
            let weights = l
                .weights
                .iter()
                .map(|row| row.iter().map(|w| rational::parse_rational(w)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let biases = l.biases.iter().map(|b| rational::parse_rational(b)).collect::<Result<Vec<_>>>()?;
            Ok(Layer { weights, biases, gate: Gate::parse(&l.gate)? })
        })
        .collect::<Result<Vec<_>>>()?;
    NeuralNet::new(layers)
}

pub fn network_to_json(net: &NeuralNet) -> String {
    let file = NetworkFile {
        layers: net
            .layers
            .iter()
            .map(|l| LayerFile {
                weights: l.weights.iter().map(|r| r.iter().map(rational::format_rational).collect()).collect(),
                biases: l.biases.iter().map(rational::format_rational).collect(),
                gate: match l.gate {
                    Gate::Relu => "relu",
                    Gate::Max => "max",
                    Gate::Identity => "identity",
                }
                .to_string(),
            })
            .collect(),
    };
    serde_json::to_string(&file).unwrap()
}

/// Exact PWL form of the network on `[a, b]`; with `clamp_output` the
/// result is `τ ∘ g`, a self-map of `[a, b]`.
pub fn network_to_pwl(net: &NeuralNet, a: &Rational, b: &Rational, clamp_output: bool, max_segments: Option<usize>) -> Result<PwlMap> {
    let mut neurons = vec![PwlMap::identity(a.clone(), b.clone())?];
    for layer in &net.layers {
        let mut pre = Vec::with_capacity(layer.rows());
        for (row, bias) in layer.weights.iter().zip(&layer.biases) {
            let terms: Vec<(Rational, &PwlMap)> = row.iter().cloned().zip(neurons.iter()).collect();
            pre.push(PwlMap::affine_combination(&terms, bias, a, b)?);
        }
        neurons = match layer.gate {
            Gate::Identity => pre,
            Gate::Relu => pre.iter().map(PwlMap::relu).collect::<Result<_>>()?,
            Gate::Max => {
                let mut it = pre.into_iter();
                let first = it.next().unwrap();
                vec![it.try_fold(first, |acc, g| acc.pointwise_max(&g))?]
            }
        };
        if let Some(limit) = max_segments {
            if neurons.iter().any(|n| n.segment_count() > limit) {
                return Err(Error::ResourceLimit { limit });
            }
        }
    }
    let g = neurons.pop().unwrap();
    if clamp_output {
        g.clamp(a, b)
    } else {
        Ok(g)
    }
}

/// `l(1 + log2 m + log2 t + log2 d1) + 2 l² log2 d2`, in bits.
pub fn entropy_upper_bound_thm1(l: usize, m: usize, p: GateProfile) -> f64 {
    let l = l as f64;
    l * (1.0 + (m as f64).log2() + (p.t as f64).log2() + (p.d1 as f64).log2()) + 2.0 * l * l * (p.d2 as f64).log2()
}

/// `2 (2 m t d1)^l · d2^(2 l²)`, exact.
pub fn lap_bound_thm1(l: usize, m: usize, p: GateProfile) -> BigUint {
    let base = BigUint::from(2 * m as u64 * p.t * p.d1);
    let d2 = BigUint::from(p.d2);
    BigUint::from(2u32) * base.pow(l as u32) * d2.pow(2 * (l * l) as u32)
}

/// Smallest width compatible with approximating a map of entropy `h_bits`
/// (or its `k`-th iterate): `2^(k h / 2l) / (2 t d1 d2^(2l))`.
pub fn width_lower_bound_thm2(h_bits: f64, l: usize, p: GateProfile, k: usize) -> Result<f64> {
    if !(h_bits > 0.0 && h_bits.is_finite()) {
        return Err(Error::NonPositiveEntropy(h_bits));
    }
    if l == 0 || k == 0 {
        return Err(Error::ParameterOutOfRange("depth and iterate order must be at least 1".into()));
    }
    let exponent = k as f64 * h_bits / (2.0 * l as f64);
    let denom = 2.0 * p.t as f64 * p.d1 as f64 * (p.d2 as f64).powi(2 * l as i32);
    Ok(exponent.exp2() / denom)
}

/// ReLU network of depth `k`, width 2, computing `t_2^k` on `[0, 1]`.
/// Each block evaluates `2σ(x) - 4σ(x - 1/2)`; the output combination of
/// one block is folded into the next block's weights.
pub fn compile_tent_power(k: usize) -> Result<NeuralNet> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("tent power must be at least 1".into()));
    }
    let r = rational::int;
    let biases = vec![r(0), rational::ratio(-1, 2)];
    let mut layers = vec![Layer { weights: vec![vec![r(1)], vec![r(1)]], biases: biases.clone(), gate: Gate::Relu }];
    for _ in 1..k {
        layers.push(Layer { weights: vec![vec![r(2), r(-4)], vec![r(2), r(-4)]], biases: biases.clone(), gate: Gate::Relu });
    }
    layers.push(Layer { weights: vec![vec![r(2), r(-4)]], biases: vec![r(0)], gate: Gate::Identity });
    NeuralNet::new(layers)
}

/// Random ReLU network with `l` hidden layers of width `m`; weights and
/// biases are `p/q` with `|p| ≤ 16`, `1 ≤ q ≤ 16`.
pub fn random_relu_network(l: usize, m: usize, seed: u64) -> NeuralNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entry = |rng: &mut ChaCha8Rng| rational::ratio(rng.gen_range(-16..=16), rng.gen_range(1..=16));
    let mut layers = Vec::with_capacity(l + 1);
    let mut inputs = 1;
    for _ in 0..l {
        let weights = (0..m).map(|_| (0..inputs).map(|_| entry(&mut rng)).collect()).collect();
        let biases = (0..m).map(|_| entry(&mut rng)).collect();
        layers.push(Layer { weights, biases, gate: Gate::Relu });
        inputs = m;
    }
    let weights = vec![(0..inputs).map(|_| entry(&mut rng)).collect()];
    layers.push(Layer { weights, biases: vec![entry(&mut rng)], gate: Gate::Identity });
    NeuralNet::new(layers).expect("generated dimensions are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const TENT_NET: &str = r#"{"layers":[{"weights":[["1"],["1"]],"biases":["0","-1/2"],"gate":"relu"},{"weights":[["2","-4"]],"biases":["0"],"gate":"identity"}]}"#;

    fn t2() -> PwlMap {
        PwlMap::new(int(0), int(1), vec![int(0), ratio(1, 2), int(1)], vec![int(0), int(1), int(0)]).unwrap()
    }

    #[test]
    fn parses_tent_network() {
        let net = parse_network(TENT_NET).unwrap();
        assert_eq!(net, compile_tent_power(1).unwrap());
        assert_eq!((net.depth(), net.width()), (1, 2));
        assert_eq!(net.profile(), GateProfile::RELU);
        assert_eq!(network_to_json(&net), TENT_NET);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_network(r#"{"layers":[]}"#), Err(Error::MalformedInput(_))));
        assert!(matches!(parse_network("not json"), Err(Error::MalformedInput(_))));
        let floats = TENT_NET.replace("-1/2", "-0.5");
        assert!(matches!(parse_network(&floats), Err(Error::NonRationalWeight(_))));
        let sigmoid = TENT_NET.replace("relu", "sigmoid");
        assert_eq!(parse_network(&sigmoid), Err(Error::UnsupportedGate("sigmoid".into())));
        let bad = r#"{"layers":[{"weights":[["1","2"]],"biases":["0"],"gate":"relu"}]}"#;
        assert!(matches!(parse_network(bad), Err(Error::DimensionMismatch(_))));
        let two_out = r#"{"layers":[{"weights":[["1"],["2"]],"biases":["0","0"],"gate":"relu"}]}"#;
        assert!(matches!(parse_network(two_out), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn shape_of_deeper_relu_net() {
        let net = random_relu_network(3, 2, 1);
        assert_eq!(net.shape(), (3, 2));
        assert_eq!(net.profile(), GateProfile::RELU);
    }

    #[test]
    fn max_gate_profile() {
        let net = NeuralNet::new(vec![Layer {
            weights: vec![vec![int(1)], vec![int(-1)], vec![int(2)]],
            biases: vec![int(0); 3],
            gate: Gate::Max,
        }])
        .unwrap();
        assert_eq!(net.profile(), GateProfile { t: 6, d1: 1, d2: 1 });
        let g = network_to_pwl(&net, &int(-1), &int(1), false, None).unwrap();
        for i in -8..=8 {
            let x = ratio(i, 8);
            assert_eq!(g.eval(&x).unwrap(), net.forward(&x));
        }
    }

    #[test]
    fn extraction_examples() {
        let g = network_to_pwl(&parse_network(TENT_NET).unwrap(), &int(0), &int(1), false, None).unwrap();
        assert_eq!(g.linf_distance(&t2()).unwrap(), int(0));
        let id_net = r#"{"layers":[{"weights":[["1"]],"biases":["0"],"gate":"identity"}]}"#;
        let g = network_to_pwl(&parse_network(id_net).unwrap(), &int(0), &int(1), true, None).unwrap();
        assert_eq!(g, PwlMap::identity(int(0), int(1)).unwrap());
        let g = network_to_pwl(&compile_tent_power(2).unwrap(), &int(0), &int(1), true, None).unwrap();
        assert_eq!(g, t2().iterate(2).unwrap());
    }

    #[test]
    fn thm1_entropy_bound_examples() {
        assert_eq!(entropy_upper_bound_thm1(3, 2, GateProfile::RELU), 6.0);
        assert_eq!(entropy_upper_bound_thm1(1, 1, GateProfile::RELU), 1.0);
        assert_eq!(entropy_upper_bound_thm1(2, 4, GateProfile::new(2, 1, 1).unwrap()), 8.0);
        // 2l² log2 d2 with l = 1, d2 = 2 adds 2.
        assert_eq!(entropy_upper_bound_thm1(1, 1, GateProfile::new(1, 1, 2).unwrap()), 3.0);
    }

    #[test]
    fn thm1_lap_bound_examples() {
        assert_eq!(lap_bound_thm1(1, 2, GateProfile::RELU), BigUint::from(8u32));
        assert_eq!(lap_bound_thm1(2, 2, GateProfile::RELU), BigUint::from(32u32));
        assert_eq!(lap_bound_thm1(1, 1, GateProfile::RELU), BigUint::from(4u32));
        assert_eq!(lap_bound_thm1(2, 1, GateProfile::new(1, 1, 2).unwrap()), BigUint::from(2u32 * 4 * 256));
    }

    #[test]
    fn thm2_width_examples() {
        let w = width_lower_bound_thm2(1.0, 1, GateProfile::RELU, 1).unwrap();
        assert!((w - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(width_lower_bound_thm2(1.0, 2, GateProfile::RELU, 20).unwrap(), 16.0);
        assert_eq!(width_lower_bound_thm2(0.0, 1, GateProfile::RELU, 1), Err(Error::NonPositiveEntropy(0.0)));
    }

    #[test]
    fn tent_power_shape_and_laps() {
        let net = compile_tent_power(1).unwrap();
        assert_eq!(net.shape(), (1, 2));
        let g = network_to_pwl(&compile_tent_power(3).unwrap(), &int(0), &int(1), true, None).unwrap();
        assert_eq!(crate::analysis::lap_count(&g).count(), 8);
    }
}
