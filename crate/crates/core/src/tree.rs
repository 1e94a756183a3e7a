//! Spherically homogeneous rooted trees given by a valency sequence.
//!
//! Letters and linear indices are 1-based. Level-`n` vertices are ordered
//! lexicographically, which is the same as most-significant-letter-first
//! mixed-radix order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::synthesis::Strategy;

/// Smallest valency accepted in a sequence: `Alt(3)` is the smallest
/// nontrivial alternating group.
pub const MIN_VALENCY: u64 = 3;

/// Records that a finite sequence is the prefix of a synthesized infinite one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub alpha: BigRational,
    pub strategy: Strategy,
}

/// The defining sequence `(l_0, l_1, ...)` of a spherically homogeneous tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSequence {
    valencies: Vec<BigUint>,
    extension: Option<Extension>,
}

impl TreeSequence {
    pub fn new(valencies: Vec<BigUint>) -> Result<Self> {
        for (level, l) in valencies.iter().enumerate() {
            if *l < BigUint::from(MIN_VALENCY) {
                return Err(Error::ValencyTooSmall {
                    level,
                    value: l.to_string(),
                    min: MIN_VALENCY,
                });
            }
        }
        Ok(TreeSequence {
            valencies,
            extension: None,
        })
    }

    pub fn from_small(valencies: &[u64]) -> Result<Self> {
        Self::new(valencies.iter().map(|&l| BigUint::from(l)).collect())
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = Some(extension);
        self
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.extension.as_ref()
    }

    pub fn len(&self) -> usize {
        self.valencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valencies.is_empty()
    }

    pub fn valencies(&self) -> &[BigUint] {
        &self.valencies
    }

    pub fn valency(&self, level: usize) -> Result<&BigUint> {
        self.valencies.get(level).ok_or(Error::LevelOutOfRange {
            level,
            len: self.len(),
        })
    }

    /// The valency at `level` as a machine integer, for explicit tree work.
    pub fn small_valency(&self, level: usize) -> Result<usize> {
        let l = self.valency(level)?;
        l.to_usize().ok_or_else(|| Error::ValencyTooLarge {
            level,
            value: l.to_string(),
        })
    }

    /// The first `depth` valencies as machine integers.
    pub fn small_prefix(&self, depth: usize) -> Result<Vec<usize>> {
        self.check_level(depth)?;
        (0..depth).map(|i| self.small_valency(i)).collect()
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n > self.len() {
            Err(Error::LevelOutOfRange {
                level: n,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `m_n`, the number of vertices on level `n`.
    pub fn level_size(&self, n: usize) -> Result<BigUint> {
        self.check_level(n)?;
        Ok(self.valencies[..n].iter().product())
    }

    /// The sequence `(l_n, l_{n+1}, ...)` of the subtree hanging from any
    /// level-`n` vertex.
    pub fn subtree_sequence(&self, n: usize) -> Result<TreeSequence> {
        self.check_level(n)?;
        Ok(TreeSequence {
            valencies: self.valencies[n..].to_vec(),
            extension: None,
        })
    }

    /// The first `n` terms.
    pub fn prefix(&self, n: usize) -> Result<TreeSequence> {
        self.check_level(n)?;
        Ok(TreeSequence {
            valencies: self.valencies[..n].to_vec(),
            extension: self.extension.clone(),
        })
    }

    /// Entrywise `l_i - by`, the sequence of the tree the spinal subgroup
    /// acts on.
    pub fn reduced(&self, by: u64) -> Result<TreeSequence> {
        let by = BigUint::from(by);
        let mut out = Vec::with_capacity(self.len());
        for (level, l) in self.valencies.iter().enumerate() {
            if *l < &by + MIN_VALENCY {
                return Err(Error::ValencyTooSmall {
                    level,
                    value: l.to_string(),
                    min: MIN_VALENCY + by.to_u64().unwrap_or(u64::MAX),
                });
            }
            out.push(l - &by);
        }
        TreeSequence::new(out)
    }

    /// Linear 1-based index of `v` among the vertices of its level.
    pub fn vertex_index(&self, v: &Vertex) -> Result<BigUint> {
        self.validate(v)?;
        let mut idx = BigUint::zero();
        for (level, &x) in v.letters().iter().enumerate() {
            idx = idx * &self.valencies[level] + (x - 1);
        }
        Ok(idx + 1u32)
    }

    /// The level-`n` vertex with 1-based linear index `i`.
    pub fn index_vertex(&self, n: usize, i: &BigUint) -> Result<Vertex> {
        let size = self.level_size(n)?;
        if i.is_zero() || *i > size {
            return Err(Error::IndexOutOfRange {
                index: i.to_string(),
                max: size.to_string(),
            });
        }
        let mut rest = i - 1u32;
        let mut letters = vec![0usize; n];
        for level in (0..n).rev() {
            let (q, r) = rest.div_rem(&self.valencies[level]);
            letters[level] = r.to_usize().and_then(|r| r.checked_add(1)).ok_or_else(|| {
                Error::ValencyTooLarge {
                    level,
                    value: self.valencies[level].to_string(),
                }
            })?;
            rest = q;
        }
        Ok(Vertex(letters))
    }

    /// Checks that every letter of `v` is within its level's alphabet.
    pub fn validate(&self, v: &Vertex) -> Result<()> {
        self.check_level(v.level())?;
        for (level, &x) in v.letters().iter().enumerate() {
            if x == 0 || BigUint::from(x) > self.valencies[level] {
                return Err(Error::InvalidVertex(format!(
                    "letter {x} at level {level} is outside 1..={}",
                    self.valencies[level]
                )));
            }
        }
        Ok(())
    }

    /// All level-`n` vertices in lexicographic order.
    pub fn level_vertices(&self, n: usize) -> Result<LevelVertices> {
        let radices = self.small_prefix(n)?;
        Ok(LevelVertices {
            radices,
            next: Some(vec![1; n]),
        })
    }
}

impl fmt::Display for TreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.valencies.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for TreeSequence {
    type Err = Error;

    /// Parses the comma-separated form `"5,13,133"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return TreeSequence::new(Vec::new());
        }
        let valencies = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<BigUint>()
                    .map_err(|_| Error::Parse(format!("bad valency {part:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        TreeSequence::new(valencies)
    }
}

impl Serialize for TreeSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.valencies.iter().map(crate::json::BigNumber))
    }
}

/// A vertex as its path of 1-based letters from the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Vertex(Vec<usize>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Vertex(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, letter: usize) -> Vertex {
        let mut path = self.0.clone();
        path.push(letter);
        Vertex(path)
    }

    /// Path concatenation `self · tail`.
    pub fn join(&self, tail: &Vertex) -> Vertex {
        let mut path = self.0.clone();
        path.extend_from_slice(&tail.0);
        Vertex(path)
    }

    pub fn into_letters(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses `"2.3"`, `"2,3"` or `"-"` (the root).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(Vertex::root());
        }
        s.split(['.', ','])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad letter {p:?} in vertex {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

/// Odometer over the vertices of one level.
#[derive(Debug, Clone)]
pub struct LevelVertices {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for LevelVertices {
    type Item = Vertex;

    fn next(&mut self) -> Option<Vertex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut advanced = false;
        for level in (0..succ.len()).rev() {
            if succ[level] < self.radices[level] {
                succ[level] += 1;
                advanced = true;
                break;
            }
            succ[level] = 1;
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(Vertex(current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(v: &[u64]) -> TreeSequence {
        TreeSequence::from_small(v).unwrap()
    }

    #[test]
    fn level_sizes() {
        assert_eq!(seq(&[5, 5]).level_size(0).unwrap(), BigUint::from(1u32));
        assert_eq!(seq(&[5, 7]).level_size(2).unwrap(), BigUint::from(35u32));
        // repeated-addition oracle for 5·13·133
        let mut oracle = 0u64;
        for _ in 0..(5 * 13) {
            for _ in 0..133 {
                oracle += 1;
            }
        }
        assert_eq!(oracle, 8645);
        assert_eq!(
            seq(&[5, 13, 133]).level_size(3).unwrap(),
            BigUint::from(oracle)
        );
        assert_eq!(
            seq(&[5, 5]).level_size(3),
            Err(Error::LevelOutOfRange { level: 3, len: 2 })
        );
    }

    #[test]
    fn vertex_indexing_examples() {
        let s = seq(&[5, 5]);
        assert_eq!(
            s.vertex_index(&Vertex::new(vec![1, 1])).unwrap(),
            BigUint::from(1u32)
        );
        // enumeration oracle: position of (2,3) in lexicographic order
        let pos = s
            .level_vertices(2)
            .unwrap()
            .position(|v| v == Vertex::new(vec![2, 3]))
            .unwrap();
        assert_eq!(pos + 1, 8);
        assert_eq!(
            s.vertex_index(&Vertex::new(vec![2, 3])).unwrap(),
            BigUint::from(8u32)
        );
        assert_eq!(
            s.index_vertex(2, &BigUint::from(25u32)).unwrap(),
            Vertex::new(vec![5, 5])
        );
        assert!(s.index_vertex(2, &BigUint::from(26u32)).is_err());
        assert!(s.index_vertex(2, &BigUint::zero()).is_err());
        assert!(s.vertex_index(&Vertex::new(vec![6, 1])).is_err());
        assert!(s.vertex_index(&Vertex::new(vec![1, 1, 1])).is_err());
    }

    #[test]
    fn subtree_sequences() {
        let s = seq(&[5, 7, 9]);
        assert_eq!(s.subtree_sequence(1).unwrap(), seq(&[7, 9]));
        assert_eq!(s.subtree_sequence(0).unwrap(), s);
        assert!(s.subtree_sequence(3).unwrap().is_empty());
        assert!(s.subtree_sequence(4).is_err());
    }

    #[test]
    fn rejects_small_valencies() {
        assert!(TreeSequence::from_small(&[5, 2]).is_err());
        assert_eq!(seq(&[5, 7]).reduced(2).unwrap(), seq(&[3, 5]));
        assert!(seq(&[5, 4]).reduced(2).is_err());
    }

    #[test]
    fn parse_and_display() {
        let s: TreeSequence = "5, 13,133".parse().unwrap();
        assert_eq!(s.to_string(), "5,13,133");
        assert!("5,x".parse::<TreeSequence>().is_err());
        let v: Vertex = "2.3".parse().unwrap();
        assert_eq!(v, Vertex::new(vec![2, 3]));
        assert_eq!(Vertex::root().to_string(), "-");
    }

    fn small_sequence() -> impl proptest::strategy::Strategy<Value = Vec<u64>> {
        prop::collection::vec(3u64..=9, 0..=4)
    }

    proptest! {
        #[test]
        fn index_round_trip(ls in small_sequence(), pick in any::<u64>()) {
            let s = seq(&ls);
            let n = ls.len();
            let m = s.level_size(n).unwrap();
            let i = BigUint::from(pick) % &m + 1u32;
            let v = s.index_vertex(n, &i).unwrap();
            prop_assert_eq!(s.vertex_index(&v).unwrap(), i);
        }

        #[test]
        fn level_size_recursion(ls in small_sequence()) {
            let s = seq(&ls);
            for (n, &l) in ls.iter().enumerate() {
                prop_assert_eq!(
                    s.level_size(n + 1).unwrap(),
                    s.level_size(n).unwrap() * BigUint::from(l)
                );
            }
        }

        #[test]
        fn lexicographic_order_is_index_order(ls in small_sequence()) {
            let s = seq(&ls);
            let n = ls.len();
            let verts: Vec<Vertex> = s.level_vertices(n).unwrap().collect();
            prop_assert_eq!(BigUint::from(verts.len()), s.level_size(n).unwrap());
            for (k, w) in verts.windows(2).enumerate() {
                prop_assert!(w[0] < w[1]);
                prop_assert_eq!(s.vertex_index(&w[0]).unwrap(), BigUint::from(k + 1));
            }
        }
    }
}
