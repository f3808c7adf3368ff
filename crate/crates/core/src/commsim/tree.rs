use serde::{Deserialize, Serialize};

use crate::codes::BitString;

use super::CommError;

/// Deepest tree [`ProtocolTree::build`] will expand.
pub const MAX_TREE_DEPTH: usize = 40;

/// Largest input length for which [`enumerate_s`] runs.
pub const MAX_ENUMERATE_N: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Speaker {
    Alice,
    Bob,
}

/// A bit-valued function of one party's `n`-bit input, read MSB first
/// (`x_1` is bit `n − 1` of the packed value).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BitFn {
    /// `parity(input & mask) ⊕ constant`.
    Affine { mask: u64, constant: bool },
    /// Value table of length `2^n`, packed 64 entries per word.
    Table(Vec<u64>),
}

impl BitFn {
    pub fn constant(bit: bool) -> Self {
        BitFn::Affine { mask: 0, constant: bit }
    }

    /// The input bit `x_{k+1}`.
    pub fn input_bit(n: usize, k: usize) -> Self {
        BitFn::Affine { mask: 1 << (n - 1 - k), constant: false }
    }

    pub fn from_fn(n: usize, f: impl Fn(u64) -> bool) -> Self {
        let size = 1usize << n;
        let mut words = vec![0u64; size.div_ceil(64)];
        for v in 0..size {
            if f(v as u64) {
                words[v / 64] |= 1 << (v % 64);
            }
        }
        BitFn::Table(words)
    }

    pub fn eval(&self, input: u64) -> bool {
        match self {
            BitFn::Affine { mask, constant } => ((input & mask).count_ones() & 1 == 1) ^ constant,
            BitFn::Table(words) => {
                let v = input as usize;
                words[v / 64] >> (v % 64) & 1 == 1
            }
        }
    }

    fn fits(&self, n: usize) -> bool {
        match self {
            BitFn::Affine { mask, .. } => n == 64 || mask >> n == 0,
            BitFn::Table(words) => n < 32 && words.len() == (1usize << n).div_ceil(64),
        }
    }
}

/// What a node does, as returned by the closure given to [`ProtocolTree::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeSpec {
    Speak(Speaker, BitFn),
    /// Alice's output as a function of her input.
    Leaf(BitFn),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Internal { speaker: Speaker, send: BitFn, children: [usize; 2] },
    Leaf { output: BitFn },
}

/// A deterministic two-party protocol on `n`-bit inputs, stored as an arena
/// with the root at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolTree {
    n: usize,
    nodes: Vec<Node>,
}

/// The bits sent, in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Transcript(pub BitString);

impl Transcript {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }
}

impl std::fmt::Display for Transcript {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl ProtocolTree {
    /// Expands the tree depth first; `spec(path)` decides each node.
    pub fn build(n: usize, mut spec: impl FnMut(&BitString) -> NodeSpec) -> Result<Self, CommError> {
        if n == 0 || n > 64 {
            return Err(CommError::TooLarge { n, limit: 64 });
        }
        let mut tree = ProtocolTree { n, nodes: Vec::new() };
        let mut path = BitString::new();
        tree.expand(&mut spec, &mut path)?;
        Ok(tree)
    }

    fn expand(
        &mut self,
        spec: &mut impl FnMut(&BitString) -> NodeSpec,
        path: &mut BitString,
    ) -> Result<usize, CommError> {
        if path.len() > MAX_TREE_DEPTH {
            return Err(CommError::TreeTooDeep(MAX_TREE_DEPTH));
        }
        let id = self.nodes.len();
        match spec(path) {
            NodeSpec::Leaf(output) => {
                self.check(&output)?;
                self.nodes.push(Node::Leaf { output });
            }
            NodeSpec::Speak(speaker, send) => {
                self.check(&send)?;
                self.nodes.push(Node::Internal { speaker, send, children: [0, 0] });
                let mut children = [0; 2];
                for (bit, child) in children.iter_mut().enumerate() {
                    path.push(bit == 1);
                    *child = self.expand(spec, path)?;
                    path.pop();
                }
                if let Node::Internal { children: c, .. } = &mut self.nodes[id] {
                    *c = children;
                }
            }
        }
        Ok(id)
    }

    fn check(&self, f: &BitFn) -> Result<(), CommError> {
        if f.fits(self.n) {
            Ok(())
        } else {
            Err(CommError::FunctionShape(self.n))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn input(&self, s: &BitString) -> Result<u64, CommError> {
        if s.len() != self.n {
            return Err(CommError::LengthMismatch { expected: self.n, actual: s.len() });
        }
        Ok(s.to_uint().expect("n ≤ 64"))
    }

    /// Runs on packed inputs.
    pub fn run_packed(&self, x: u64, y: u64) -> (bool, Transcript) {
        let mut sent = BitString::new();
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { output } => return (output.eval(x), Transcript(sent)),
                Node::Internal { speaker, send, children } => {
                    let bit = send.eval(match speaker {
                        Speaker::Alice => x,
                        Speaker::Bob => y,
                    });
                    sent.push(bit);
                    id = children[usize::from(bit)];
                }
            }
        }
    }

    /// Walks `bits` from the root until a leaf; returns the leaf and the bits used.
    fn walk(&self, bits: &BitString) -> Option<(usize, usize)> {
        let mut id = 0;
        let mut used = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { .. } => return Some((id, used)),
                Node::Internal { children, .. } => {
                    id = children[usize::from(bits.get(used)?)];
                    used += 1;
                }
            }
        }
    }

    /// Length of the transcript prefix of `bits` that ends at a leaf.
    pub fn leaf_prefix_len(&self, bits: &BitString) -> Option<usize> {
        self.walk(bits).map(|(_, used)| used)
    }
}

pub fn run_protocol(p: &ProtocolTree, x: &BitString, y: &BitString) -> Result<(bool, Transcript), CommError> {
    let (x, y) = (p.input(x)?, p.input(y)?);
    Ok(p.run_packed(x, y))
}

/// `{ a : ∃ b, run(a, b) = (0, C) }` in lexicographic order, packed.
///
/// Walks the path of `C` keeping the rectangle of inputs consistent with it.
pub fn enumerate_s_packed(p: &ProtocolTree, c: &Transcript) -> Result<Vec<u64>, CommError> {
    let n = p.n;
    if n > MAX_ENUMERATE_N {
        return Err(CommError::TooLarge { n, limit: MAX_ENUMERATE_N });
    }
    let size = 1u64 << n;
    let mut alice: Vec<u64> = (0..size).collect();
    let mut bob: Vec<u64> = (0..size).collect();
    let mut id = 0;
    for bit in c.0.iter() {
        let Node::Internal { speaker, send, children } = &p.nodes[id] else {
            // C runs past a leaf.
            return Ok(Vec::new());
        };
        match speaker {
            Speaker::Alice => alice.retain(|&a| send.eval(a) == bit),
            Speaker::Bob => bob.retain(|&b| send.eval(b) == bit),
        }
        id = children[usize::from(bit)];
    }
    let Node::Leaf { output } = &p.nodes[id] else {
        return Ok(Vec::new());
    };
    if bob.is_empty() {
        return Ok(Vec::new());
    }
    alice.retain(|&a| !output.eval(a));
    Ok(alice)
}

pub fn enumerate_s(p: &ProtocolTree, c: &Transcript) -> Result<Vec<BitString>, CommError> {
    Ok(enumerate_s_packed(p, c)?.into_iter().map(|a| BitString::from_uint(a, p.n)).collect())
}

/// Bob sends `y_1 … y_n`; Alice outputs `⟨x, y⟩`.
pub fn build_trivial_ip_protocol(n: usize) -> Result<ProtocolTree, CommError> {
    ProtocolTree::build(n, |path| {
        if path.len() < n {
            NodeSpec::Speak(Speaker::Bob, BitFn::input_bit(n, path.len()))
        } else {
            NodeSpec::Leaf(BitFn::Affine { mask: path.to_uint().expect("n ≤ 64"), constant: false })
        }
    })
}

/// A single leaf that always outputs `bit`.
pub fn build_constant_protocol(n: usize, bit: bool) -> Result<ProtocolTree, CommError> {
    ProtocolTree::build(n, |_| NodeSpec::Leaf(BitFn::constant(bit)))
}

#[cfg(test)]
mod tests {
    use super::super::inner_product;
    use super::*;
    use crate::codes::{is_prefix_free, PrefixVerdict};
    use crate::rng::{random_bits, stream};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn brute_s(p: &ProtocolTree, c: &Transcript) -> Vec<u64> {
        let size = 1u64 << p.n();
        (0..size).filter(|&a| (0..size).any(|b| p.run_packed(a, b) == (false, c.clone()))).collect()
    }

    #[test]
    fn trivial_examples() {
        let p = build_trivial_ip_protocol(2).unwrap();
        assert_eq!(run_protocol(&p, &bs("11"), &bs("11")).unwrap(), (false, Transcript(bs("11"))));
        assert_eq!(run_protocol(&p, &bs("00"), &bs("11")).unwrap(), (false, Transcript(bs("11"))));
        let p1 = build_trivial_ip_protocol(1).unwrap();
        for x in 0..2u64 {
            for y in 0..2u64 {
                assert_eq!(p1.run_packed(x, y).0, x & y == 1);
            }
        }
        assert!(matches!(
            run_protocol(&p, &bs("1"), &bs("11")),
            Err(CommError::LengthMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn trivial_matches_oracle_n8() {
        let p = build_trivial_ip_protocol(8).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            let x = random_bits(&mut rng, 8);
            let y = random_bits(&mut rng, 8);
            let (out, c) = run_protocol(&p, &x, &y).unwrap();
            assert_eq!(out, inner_product(&x, &y).unwrap());
            assert_eq!(c.0, y);
        }
    }

    #[test]
    fn transcripts_prefix_free() {
        for n in 1..=6 {
            let size = 1u64 << n;
            for p in [build_trivial_ip_protocol(n).unwrap(), build_constant_protocol(n, false).unwrap()] {
                let mut realized: Vec<BitString> = Vec::new();
                for x in 0..size {
                    for y in 0..size {
                        realized.push(p.run_packed(x, y).1 .0);
                    }
                }
                realized.sort();
                realized.dedup();
                assert_eq!(is_prefix_free(realized.iter()), PrefixVerdict::PrefixFree);
            }
        }
    }

    #[test]
    fn s_examples() {
        let p = build_trivial_ip_protocol(2).unwrap();
        assert_eq!(enumerate_s(&p, &Transcript(bs("11"))).unwrap(), vec![bs("00"), bs("11")]);
        assert_eq!(enumerate_s(&p, &Transcript(bs("00"))).unwrap().len(), 4);
        assert!(enumerate_s(&p, &Transcript(bs("1"))).unwrap().is_empty());
        assert!(enumerate_s(&p, &Transcript(bs("110"))).unwrap().is_empty());
        let big = build_constant_protocol(14, false).unwrap();
        assert!(matches!(enumerate_s(&big, &Transcript::default()), Err(CommError::TooLarge { .. })));
    }

    #[test]
    fn s_matches_brute_force() {
        let mixed = ProtocolTree::build(3, |path| match path.len() {
            0 => NodeSpec::Speak(Speaker::Alice, BitFn::from_fn(3, |a| a % 3 == 0)),
            1 => NodeSpec::Speak(Speaker::Bob, BitFn::input_bit(3, 1)),
            2 => NodeSpec::Speak(Speaker::Alice, BitFn::Affine { mask: 0b101, constant: true }),
            _ => NodeSpec::Leaf(BitFn::from_fn(3, |a| a.count_ones() == 2)),
        })
        .unwrap();
        for p in [build_trivial_ip_protocol(3).unwrap(), mixed] {
            for len in 0..=4 {
                for c in BitString::all_of_length(len) {
                    let c = Transcript(c);
                    assert_eq!(enumerate_s_packed(&p, &c).unwrap(), brute_s(&p, &c), "{c}");
                }
            }
        }
    }

    #[test]
    fn bad_function_shape() {
        let r = ProtocolTree::build(2, |_| NodeSpec::Leaf(BitFn::Affine { mask: 0b100, constant: false }));
        assert_eq!(r, Err(CommError::FunctionShape(2)));
        let r = ProtocolTree::build(2, |_| NodeSpec::Speak(Speaker::Bob, BitFn::constant(false)));
        assert_eq!(r, Err(CommError::TreeTooDeep(MAX_TREE_DEPTH)));
    }
}
