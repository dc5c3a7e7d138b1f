//! Fixed-architecture multilayer perceptron (two tanh hidden layers of 64
//! units, scalar output) with a hand-written reverse pass.
//!
//! Parameters live in one flat vector laid out layer by layer as
//! `W1 (64 x in, row-major), b1, W2 (64 x 64), b2, w3 (1 x 64), b3`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CheckpointError, NnError};

pub const HIDDEN: usize = 64;

const CHECKPOINT_MAGIC: &str = "sdn-dispatch-checkpoint";
const CHECKPOINT_VERSION: &str = "1";
const CHECKPOINT_TRAILER: &str = "end-checkpoint";

/// Output activation of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputHead {
    /// `max(x, 0) + ln(1 + e^-|x|)`, strictly positive. Used by the scheduling function.
    Softplus,
    /// Used by the value function.
    Identity,
}

impl OutputHead {
    fn name(self) -> &'static str {
        match self {
            OutputHead::Softplus => "softplus",
            OutputHead::Identity => "identity",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "softplus" => Some(OutputHead::Softplus),
            "identity" => Some(OutputHead::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub head: OutputHead,
}

/// Shape of one dense layer: `outputs x inputs` weights followed by `outputs` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
}

impl LayerShape {
    pub fn len(&self) -> usize {
        (self.inputs + 1) * self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl MlpSpec {
    pub fn new(input_dim: usize, head: OutputHead) -> Self {
        Self { input_dim, head }
    }

    pub fn layers(&self) -> [LayerShape; 3] {
        [
            LayerShape { inputs: self.input_dim, outputs: HIDDEN },
            LayerShape { inputs: HIDDEN, outputs: HIDDEN },
            LayerShape { inputs: HIDDEN, outputs: 1 },
        ]
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(LayerShape::len).sum()
    }
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Parameters of one network plus a gradient accumulator of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    spec: MlpSpec,
    pub params: Vec<f64>,
    pub grads: Vec<f64>,
}

struct Activations {
    h1: [f64; HIDDEN],
    h2: [f64; HIDDEN],
    z3: f64,
}

impl ParamStore {
    /// All-zero parameters.
    pub fn zeros(spec: MlpSpec) -> Self {
        let n = spec.param_count();
        Self { spec, params: vec![0.0; n], grads: vec![0.0; n] }
    }

    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init(spec: MlpSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = Self::zeros(spec);
        let mut offset = 0;
        for layer in spec.layers() {
            let bound = 1.0 / (layer.inputs as f64).sqrt();
            let n_weights = layer.inputs * layer.outputs;
            for w in &mut store.params[offset..offset + n_weights] {
                *w = rng.random_range(-bound..=bound);
            }
            offset += layer.len();
        }
        store
    }

    pub fn from_params(spec: MlpSpec, params: Vec<f64>) -> Option<Self> {
        (params.len() == spec.param_count()).then(|| Self {
            spec,
            grads: vec![0.0; params.len()],
            params,
        })
    }

    pub fn spec(&self) -> MlpSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NnError> {
        if input.len() != self.spec.input_dim {
            return Err(NnError::InputDim { expected: self.spec.input_dim, got: input.len() });
        }
        if let Some(i) = input.iter().position(|x| !x.is_finite()) {
            return Err(NnError::NonFiniteInput(i));
        }
        Ok(())
    }

    fn offsets(&self) -> [usize; 6] {
        let n_in = self.spec.input_dim;
        let w1 = 0;
        let b1 = w1 + HIDDEN * n_in;
        let w2 = b1 + HIDDEN;
        let b2 = w2 + HIDDEN * HIDDEN;
        let w3 = b2 + HIDDEN;
        let b3 = w3 + HIDDEN;
        [w1, b1, w2, b2, w3, b3]
    }

    fn activations(&self, input: &[f64]) -> Activations {
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let p = &self.params;
        let n_in = self.spec.input_dim;
        let mut h1 = [0.0; HIDDEN];
        for (j, h) in h1.iter_mut().enumerate() {
            let row = &p[w1 + j * n_in..w1 + (j + 1) * n_in];
            let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + p[b1 + j];
            *h = z.tanh();
        }
        let mut h2 = [0.0; HIDDEN];
        for (j, h) in h2.iter_mut().enumerate() {
            let row = &p[w2 + j * HIDDEN..w2 + (j + 1) * HIDDEN];
            let z: f64 = row.iter().zip(&h1).map(|(w, x)| w * x).sum::<f64>() + p[b2 + j];
            *h = z.tanh();
        }
        let z3 = p[w3..w3 + HIDDEN].iter().zip(&h2).map(|(w, x)| w * x).sum::<f64>() + p[b3];
        Activations { h1, h2, z3 }
    }

    fn head(&self, z: f64) -> f64 {
        match self.spec.head {
            OutputHead::Softplus => softplus(z),
            OutputHead::Identity => z,
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<f64, NnError> {
        self.check_input(input)?;
        Ok(self.head(self.activations(input).z3))
    }

    /// Gradient of `upstream * f(input)` with respect to every parameter.
    pub fn backward(&self, input: &[f64], upstream: f64) -> Result<Vec<f64>, NnError> {
        let mut out = vec![0.0; self.len()];
        self.backward_into(input, upstream, &mut out)?;
        Ok(out)
    }

    /// Like [`backward`](Self::backward) but adds the gradient into `out`.
    /// Returns the forward output.
    pub fn backward_into(&self, input: &[f64], upstream: f64, out: &mut [f64]) -> Result<f64, NnError> {
        self.check_input(input)?;
        assert_eq!(out.len(), self.len(), "gradient buffer length");
        let act = self.activations(input);
        let output = self.head(act.z3);
        if upstream == 0.0 {
            return Ok(output);
        }
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let p = &self.params;
        let n_in = self.spec.input_dim;

        let dz3 = upstream
            * match self.spec.head {
                OutputHead::Softplus => sigmoid(act.z3),
                OutputHead::Identity => 1.0,
            };
        out[b3] += dz3;
        let mut dz2 = [0.0; HIDDEN];
        for j in 0..HIDDEN {
            out[w3 + j] += dz3 * act.h2[j];
            dz2[j] = dz3 * p[w3 + j] * (1.0 - act.h2[j] * act.h2[j]);
        }
        let mut dh1 = [0.0; HIDDEN];
        for (j, &d) in dz2.iter().enumerate() {
            out[b2 + j] += d;
            let row = w2 + j * HIDDEN;
            for k in 0..HIDDEN {
                out[row + k] += d * act.h1[k];
                dh1[k] += d * p[row + k];
            }
        }
        for j in 0..HIDDEN {
            let d = dh1[j] * (1.0 - act.h1[j] * act.h1[j]);
            out[b1 + j] += d;
            let row = w1 + j * n_in;
            for (k, x) in input.iter().enumerate() {
                out[row + k] += d * x;
            }
        }
        Ok(output)
    }

    /// Writes this network alone as a checkpoint.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        let mut ckpt = Checkpoint::default();
        ckpt.insert("network", self.clone());
        ckpt.save(path)
    }

    /// Reads a checkpoint written by [`save`](Self::save).
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        Checkpoint::load(path)?.take("network")
    }
}

/// A set of named networks persisted together.
///
/// The format is line-oriented text: a magic/version header, then per
/// network a `network` line carrying the shape table, one hex-encoded IEEE
/// bit pattern per parameter, and a closing `end` line. A final
/// `end-checkpoint` line marks a complete file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Checkpoint {
    networks: Vec<(String, ParamStore)>,
}

impl Checkpoint {
    pub fn insert(&mut self, name: &str, store: ParamStore) {
        assert!(!name.is_empty() && !name.contains(char::is_whitespace), "bad network name");
        match self.networks.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = store,
            None => self.networks.push((name.to_string(), store)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&ParamStore> {
        self.networks.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn take(mut self, name: &str) -> Result<ParamStore, CheckpointError> {
        let idx = self
            .networks
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| CheckpointError::MissingNetwork(name.to_string()))?;
        Ok(self.networks.swap_remove(idx).1)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.networks.iter().map(|(n, _)| n.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n");
        for (name, store) in &self.networks {
            let spec = store.spec();
            let shapes: Vec<String> = spec
                .layers()
                .iter()
                .map(|l| format!("{}x{}", l.outputs, l.inputs))
                .collect();
            let _ = writeln!(
                out,
                "network {name} input_dim={} head={} layers={} params={}",
                spec.input_dim,
                spec.head.name(),
                shapes.join(","),
                store.len()
            );
            for p in &store.params {
                let _ = writeln!(out, "{:016x}", p.to_bits());
            }
            let _ = writeln!(out, "end {name}");
        }
        out.push_str(CHECKPOINT_TRAILER);
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CheckpointError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| CheckpointError::Truncated("empty file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(CHECKPOINT_MAGIC) {
            return Err(CheckpointError::Corrupt { line: 1, message: "missing checkpoint header".into() });
        }
        match parts.next() {
            Some(CHECKPOINT_VERSION) => {}
            Some(v) => return Err(CheckpointError::Version(v.to_string())),
            None => return Err(CheckpointError::Version(String::new())),
        }

        let mut ckpt = Checkpoint::default();
        let mut complete = false;
        while let Some((line_no, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            if line.trim() == CHECKPOINT_TRAILER {
                if let Some((ln, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
                    return Err(CheckpointError::Corrupt {
                        line: ln,
                        message: format!("unexpected `{extra}` after the end marker"),
                    });
                }
                complete = true;
                break;
            }
            let (name, spec, count) = parse_network_line(line_no, line)?;
            let mut params = Vec::with_capacity(count);
            for _ in 0..count {
                let (ln, l) = lines.next().ok_or_else(|| {
                    CheckpointError::Truncated(format!(
                        "network `{name}` ends after {} of {count} parameters",
                        params.len()
                    ))
                })?;
                let hex = l.trim();
                let bits = (hex.len() == 16)
                    .then(|| u64::from_str_radix(hex, 16).ok())
                    .flatten()
                    .ok_or_else(|| CheckpointError::Corrupt { line: ln, message: format!("bad parameter `{l}`") })?;
                params.push(f64::from_bits(bits));
            }
            match lines.next() {
                Some((_, l)) if l.trim() == format!("end {name}") => {}
                Some((ln, l)) => {
                    return Err(CheckpointError::Corrupt {
                        line: ln,
                        message: format!("expected `end {name}`, found `{l}`"),
                    })
                }
                None => return Err(CheckpointError::Truncated(format!("missing `end {name}`"))),
            }
            let store = ParamStore::from_params(spec, params).ok_or(CheckpointError::Corrupt {
                line: line_no,
                message: "parameter count does not match shape table".into(),
            })?;
            ckpt.insert(&name, store);
        }
        if !complete {
            return Err(CheckpointError::Truncated(format!("missing `{CHECKPOINT_TRAILER}`")));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| CheckpointError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }
}

fn parse_network_line(line_no: usize, line: &str) -> Result<(String, MlpSpec, usize), CheckpointError> {
    let corrupt = |message: String| CheckpointError::Corrupt { line: line_no, message };
    let mut parts = line.split_whitespace();
    if parts.next() != Some("network") {
        return Err(corrupt(format!("expected `network`, found `{line}`")));
    }
    let name = parts.next().ok_or_else(|| corrupt("missing network name".into()))?.to_string();
    let mut input_dim = None;
    let mut head = None;
    let mut layers = None;
    let mut count = None;
    for kv in parts {
        let (k, v) = kv.split_once('=').ok_or_else(|| corrupt(format!("bad field `{kv}`")))?;
        match k {
            "input_dim" => input_dim = v.parse::<usize>().ok(),
            "head" => head = OutputHead::parse(v),
            "layers" => layers = Some(v.to_string()),
            "params" => count = v.parse::<usize>().ok(),
            _ => return Err(corrupt(format!("unknown field `{k}`"))),
        }
    }
    let (Some(input_dim), Some(head), Some(layers), Some(count)) = (input_dim, head, layers, count) else {
        return Err(corrupt("incomplete network header".into()));
    };
    let spec = MlpSpec::new(input_dim, head);
    let expected: Vec<String> = spec.layers().iter().map(|l| format!("{}x{}", l.outputs, l.inputs)).collect();
    if layers != expected.join(",") {
        return Err(corrupt(format!("unsupported layer shapes `{layers}`")));
    }
    if count != spec.param_count() {
        return Err(corrupt(format!("expected {} parameters, header says {count}", spec.param_count())));
    }
    Ok((name, spec, count))
}
