use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest shared-randomness width enumerated exhaustively.
pub const MAX_RANDOMNESS_BITS: u32 = 24;

pub fn ceil_log2(d: u64) -> u32 {
    if d <= 1 {
        0
    } else {
        64 - (d - 1).leading_zeros()
    }
}

pub fn popcount(v: u64) -> u32 {
    v.count_ones()
}

/// Parity of the bitwise AND, i.e. the GF(2) inner product.
pub fn inner_product(a: u64, b: u64) -> u64 {
    ((a & b).count_ones() & 1) as u64
}

type EvalFn = dyn Fn(u64, u64) -> Option<bool> + Send + Sync;

/// Partial boolean function on (x, y) with x < x_size, y < y_size.
/// `None` marks inputs outside the promise.
#[derive(Clone)]
pub struct PromiseFunction {
    name: String,
    n: usize,
    x_size: u64,
    y_size: u64,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for PromiseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PromiseFunction({}, n={})", self.name, self.n)
    }
}

impl PromiseFunction {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        x_size: u64,
        y_size: u64,
        eval: impl Fn(u64, u64) -> Option<bool> + Send + Sync + 'static,
    ) -> Self {
        PromiseFunction {
            name: name.into(),
            n,
            x_size,
            y_size,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_size(&self) -> u64 {
        self.x_size
    }

    pub fn y_size(&self) -> u64 {
        self.y_size
    }

    pub fn evaluate(&self, x: u64, y: u64) -> Option<bool> {
        if x >= self.x_size || y >= self.y_size {
            return None;
        }
        (self.eval)(x, y)
    }

    /// Value on a promise input, or an error naming the input.
    pub fn require(&self, x: u64, y: u64) -> Result<bool> {
        self.evaluate(x, y)
            .ok_or_else(|| Error::OutsidePromise(format!("{}({x}, {y})", self.name)))
    }

    /// All promise inputs in lexicographic (x, y) order.
    pub fn promise_inputs(&self) -> Vec<(u64, u64, bool)> {
        let mut out = Vec::new();
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                if let Some(v) = (self.eval)(x, y) {
                    out.push((x, y, v));
                }
            }
        }
        out
    }

    /// 1-bit AND.
    pub fn and() -> Self {
        PromiseFunction::new("AND", 1, 2, 2, |x, y| Some(x == 1 && y == 1))
    }

    /// Total NEQ on n-bit strings.
    pub fn neq(n: usize) -> Self {
        PromiseFunction::new(format!("NEQ_{n}"), n, 1 << n, 1 << n, |x, y| Some(x != y))
    }

    /// NEQ under the promise x = y or Hamming distance exactly n/2.
    pub fn promise_neq(n: usize) -> Self {
        let half = (n / 2) as u32;
        PromiseFunction::new(format!("PROMISE_NEQ_{n}"), n, 1 << n, 1 << n, move |x, y| {
            let d = popcount(x ^ y);
            if d == 0 {
                Some(false)
            } else if d == half && n % 2 == 0 {
                Some(true)
            } else {
                None
            }
        })
    }

    /// GF(2) inner product of n-bit strings.
    pub fn inner_product(n: usize) -> Self {
        PromiseFunction::new(format!("IP_{n}"), n, 1 << n, 1 << n, |x, y| {
            Some(inner_product(x, y) == 1)
        })
    }

    pub fn constant(n: usize, value: bool) -> Self {
        PromiseFunction::new(
            format!("CONST{}_{n}", value as u8),
            n,
            1 << n,
            1 << n,
            move |_, _| Some(value),
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    /// Classical communication, log2 of the message alphabet sizes.
    pub classical_bits: u32,
    /// Quantum communication, log2 of the message dimensions.
    pub qubits: u32,
    /// Shared classical randomness.
    pub random_bits: u32,
    /// Shared entanglement (log2 of the resource dimension on one side).
    pub ebits: u32,
}

impl CostReport {
    pub fn scaled(&self, k: u32) -> CostReport {
        CostReport {
            classical_bits: self.classical_bits * k,
            qubits: self.qubits * k,
            random_bits: self.random_bits * k,
            ebits: self.ebits * k,
        }
    }

    pub fn communication(&self) -> u32 {
        self.classical_bits + self.qubits
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Cds,
    Cdqs,
    Psm,
    Psqm,
    /// Circuit-level experiments such as the forrelation decision.
    Circuit,
    /// Property checks on the quantum tools, not tied to a protocol.
    Tool,
}

/// Serializable description of a shipped protocol: channels are referred to
/// by construction name and parameters rather than raw matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDescriptor {
    pub kind: ProtocolKind,
    pub n: usize,
    pub construction: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub cost: CostReport,
}

impl ProtocolDescriptor {
    pub fn new(kind: ProtocolKind, n: usize, construction: impl Into<String>) -> Self {
        ProtocolDescriptor {
            kind,
            n,
            construction: construction.into(),
            params: BTreeMap::new(),
            cost: CostReport::default(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

type MsgAFn = dyn Fn(u64, u64, u64) -> u64 + Send + Sync;
type MsgBFn = dyn Fn(u64, u64) -> u64 + Send + Sync;
type CdsDecFn = dyn Fn(u64, u64, u64, u64) -> u64 + Send + Sync;
type PsmDecFn = dyn Fn(u64, u64) -> u64 + Send + Sync;

/// Classical CDS: message_a(x, s, r), message_b(y, r), decoder(m_A, x, m_B, y).
#[derive(Clone)]
pub struct CdsProtocol {
    pub name: String,
    pub n: usize,
    pub x_size: u64,
    pub y_size: u64,
    pub randomness_bits: u32,
    pub secret_alphabet: u64,
    pub message_a_bits: u32,
    pub message_b_bits: u32,
    pub(crate) message_a: Arc<MsgAFn>,
    pub(crate) message_b: Arc<MsgBFn>,
    pub(crate) decoder: Arc<CdsDecFn>,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl fmt::Debug for CdsProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CdsProtocol({}, n={})", self.name, self.n)
    }
}

impl CdsProtocol {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n: usize,
        (x_size, y_size): (u64, u64),
        randomness_bits: u32,
        secret_alphabet: u64,
        (message_a_bits, message_b_bits): (u32, u32),
        message_a: impl Fn(u64, u64, u64) -> u64 + Send + Sync + 'static,
        message_b: impl Fn(u64, u64) -> u64 + Send + Sync + 'static,
        decoder: impl Fn(u64, u64, u64, u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        CdsProtocol {
            name: name.into(),
            n,
            x_size,
            y_size,
            randomness_bits,
            secret_alphabet,
            message_a_bits,
            message_b_bits,
            message_a: Arc::new(message_a),
            message_b: Arc::new(message_b),
            decoder: Arc::new(decoder),
            params: BTreeMap::new(),
        }
    }

    pub fn message_a(&self, x: u64, s: u64, r: u64) -> u64 {
        (self.message_a)(x, s, r)
    }

    pub fn message_b(&self, y: u64, r: u64) -> u64 {
        (self.message_b)(y, r)
    }

    pub fn decode(&self, ma: u64, x: u64, mb: u64, y: u64) -> u64 {
        (self.decoder)(ma, x, mb, y)
    }

    pub fn cost(&self) -> CostReport {
        CostReport {
            classical_bits: self.message_a_bits + self.message_b_bits,
            qubits: 0,
            random_bits: self.randomness_bits,
            ebits: 0,
        }
    }

    pub fn descriptor(&self) -> ProtocolDescriptor {
        let mut d = ProtocolDescriptor::new(ProtocolKind::Cds, self.n, self.name.clone());
        d.params = self.params.clone();
        d.cost = self.cost();
        d
    }
}

/// Classical PSM: message_a(x, r), message_b(y, r), decoder(m_A, m_B) -> f value.
#[derive(Clone)]
pub struct PsmProtocol {
    pub name: String,
    pub n: usize,
    pub x_size: u64,
    pub y_size: u64,
    pub randomness_bits: u32,
    pub message_a_bits: u32,
    pub message_b_bits: u32,
    pub(crate) message_a: Arc<MsgBFn>,
    pub(crate) message_b: Arc<MsgBFn>,
    pub(crate) decoder: Arc<PsmDecFn>,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl fmt::Debug for PsmProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PsmProtocol({}, n={})", self.name, self.n)
    }
}

impl PsmProtocol {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n: usize,
        (x_size, y_size): (u64, u64),
        randomness_bits: u32,
        (message_a_bits, message_b_bits): (u32, u32),
        message_a: impl Fn(u64, u64) -> u64 + Send + Sync + 'static,
        message_b: impl Fn(u64, u64) -> u64 + Send + Sync + 'static,
        decoder: impl Fn(u64, u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        PsmProtocol {
            name: name.into(),
            n,
            x_size,
            y_size,
            randomness_bits,
            message_a_bits,
            message_b_bits,
            message_a: Arc::new(message_a),
            message_b: Arc::new(message_b),
            decoder: Arc::new(decoder),
            params: BTreeMap::new(),
        }
    }

    pub fn message_a(&self, x: u64, r: u64) -> u64 {
        (self.message_a)(x, r)
    }

    pub fn message_b(&self, y: u64, r: u64) -> u64 {
        (self.message_b)(y, r)
    }

    pub fn decode(&self, ma: u64, mb: u64) -> u64 {
        (self.decoder)(ma, mb)
    }

    pub fn cost(&self) -> CostReport {
        CostReport {
            classical_bits: self.message_a_bits + self.message_b_bits,
            qubits: 0,
            random_bits: self.randomness_bits,
            ebits: 0,
        }
    }

    pub fn descriptor(&self) -> ProtocolDescriptor {
        let mut d = ProtocolDescriptor::new(ProtocolKind::Psm, self.n, self.name.clone());
        d.params = self.params.clone();
        d.cost = self.cost();
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_ceil() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(32), 5);
    }

    #[test]
    fn promise_neq_classes() {
        let f = PromiseFunction::promise_neq(4);
        assert_eq!(f.evaluate(0b0000, 0b0000), Some(false));
        assert_eq!(f.evaluate(0b0000, 0b0011), Some(true));
        assert_eq!(f.evaluate(0b0000, 0b0001), None);
        assert!(f.require(0, 1).is_err());
        let n_inputs = f.promise_inputs().len();
        // 16 equal pairs plus 16 * C(4,2) half-distance pairs.
        assert_eq!(n_inputs, 16 + 16 * 6);
    }

    #[test]
    fn descriptor_round_trip() {
        let d = ProtocolDescriptor::new(ProtocolKind::Cds, 3, "neq_cds").with_param("field_degree", 3);
        let back = ProtocolDescriptor::from_json(&d.to_json()).unwrap();
        assert_eq!(d, back);
    }
}
