//! Finite-depth tree automorphisms given by vertex labels.
//!
//! A portrait of depth `N` labels every vertex of level `< N` with a
//! permutation of its children. Only non-identity labels are stored. The
//! automorphism maps `x_1 x_2 ... x_n` to `π_∅(x_1) π_{x_1}(x_2) ...`, with each
//! label read at the source vertex. Products act right factor first, as for
//! permutations: `(gh)_u = g_{h(u)} ∘ h_u`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{alt_generators, embedded_alt_generators, Permutation};
use crate::tree::{TreeSequence, Vertex};

/// Largest level size `level_permutation` will materialize.
pub const MAX_LEVEL_DEGREE: usize = 1 << 24;

/// The four recursively defined spinal generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinalKind {
    /// Spine labels `τ`.
    Zeta,
    /// Spine labels `σ`.
    Psi,
    /// Spine labels `κ`.
    Xi,
    /// Spine labels `ρ`.
    Theta,
}

impl SpinalKind {
    pub const ALL: [SpinalKind; 4] = [
        SpinalKind::Zeta,
        SpinalKind::Psi,
        SpinalKind::Xi,
        SpinalKind::Theta,
    ];

    /// The rooted permutation of degree `k` this generator places on the spine.
    pub fn spine_label(self, k: usize) -> Result<Permutation> {
        Ok(match self {
            SpinalKind::Zeta => alt_generators(k)?.0,
            SpinalKind::Psi => alt_generators(k)?.1,
            SpinalKind::Xi => embedded_alt_generators(k)?.0,
            SpinalKind::Theta => embedded_alt_generators(k)?.1,
        })
    }
}

impl fmt::Display for SpinalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinalKind::Zeta => "zeta",
            SpinalKind::Psi => "psi",
            SpinalKind::Xi => "xi",
            SpinalKind::Theta => "theta",
        })
    }
}

impl FromStr for SpinalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta" => Ok(SpinalKind::Zeta),
            "psi" => Ok(SpinalKind::Psi),
            "xi" => Ok(SpinalKind::Xi),
            "theta" => Ok(SpinalKind::Theta),
            _ => Err(Error::Parse(format!(
                "unknown generator {s:?} (zeta|psi|xi|theta)"
            ))),
        }
    }
}

/// An automorphism of the truncated tree `T[depth]`.
#[derive(Clone, PartialEq, Eq)]
pub struct Portrait {
    /// `l_0 .. l_{depth-1}`.
    valencies: Vec<usize>,
    labels: BTreeMap<Vec<usize>, Permutation>,
}

impl Portrait {
    /// The identity of `T[depth]`.
    pub fn identity(seq: &TreeSequence, depth: usize) -> Result<Self> {
        Ok(Portrait {
            valencies: seq.small_prefix(depth)?,
            labels: BTreeMap::new(),
        })
    }

    fn from_valencies(valencies: Vec<usize>) -> Self {
        Portrait {
            valencies,
            labels: BTreeMap::new(),
        }
    }

    /// Identity at the root; along the all-ones path, vertex `1^n` has first
    /// child carrying the recursion and second child `1^n 2` carrying the
    /// rooted label of degree `l_{n+1}`.
    pub fn spinal(kind: SpinalKind, seq: &TreeSequence, depth: usize) -> Result<Self> {
        let mut p = Portrait::identity(seq, depth)?;
        for n in 0..depth.saturating_sub(1) {
            let k = p.valencies[n + 1];
            let mut path = vec![1; n];
            path.push(2);
            p.set_label(path, kind.spine_label(k)?);
        }
        Ok(p)
    }

    /// `perm` at the root, identity elsewhere.
    pub fn rooted(perm: &Permutation, seq: &TreeSequence, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument(
                "a rooted portrait needs depth at least 1".into(),
            ));
        }
        let mut p = Portrait::identity(seq, depth)?;
        if perm.degree() != p.valencies[0] {
            return Err(Error::DegreeMismatch {
                left: p.valencies[0],
                right: perm.degree(),
            });
        }
        p.set_label(Vec::new(), perm.clone());
        Ok(p)
    }

    /// Copies `self` into the subtree below `v` of the tree `outer`; the
    /// result acts trivially outside that subtree.
    pub fn embed_at(&self, outer: &TreeSequence, v: &Vertex) -> Result<Self> {
        let n = v.level();
        let depth = n + self.depth();
        let valencies = outer.small_prefix(depth.min(outer.len()))?;
        if valencies.len() < n {
            return Err(Error::LevelOutOfRange {
                level: n,
                len: outer.len(),
            });
        }
        outer.prefix(n)?.validate(v)?;
        // The outer sequence may be shorter than the embedded depth; where
        // both are defined they must agree.
        if valencies[n..] != self.valencies[..valencies.len() - n] {
            return Err(Error::SequenceMismatch);
        }
        let mut full = valencies[..n].to_vec();
        full.extend_from_slice(&self.valencies);
        let mut out = Portrait::from_valencies(full);
        for (path, label) in &self.labels {
            let mut at = v.letters().to_vec();
            at.extend_from_slice(path);
            out.labels.insert(at, label.clone());
        }
        Ok(out)
    }

    pub fn depth(&self) -> usize {
        self.valencies.len()
    }

    pub fn valencies(&self) -> &[usize] {
        &self.valencies
    }

    pub fn sequence(&self) -> TreeSequence {
        let v: Vec<u64> = self.valencies.iter().map(|&l| l as u64).collect();
        TreeSequence::from_small(&v).expect("portrait valencies are valid")
    }

    pub fn is_identity(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of stored (non-identity) labels.
    pub fn support_size(&self) -> usize {
        self.labels.len()
    }

    fn set_label(&mut self, path: Vec<usize>, perm: Permutation) {
        debug_assert_eq!(perm.degree(), self.valencies[path.len()]);
        if perm.is_identity() {
            self.labels.remove(&path);
        } else {
            self.labels.insert(path, perm);
        }
    }

    /// Sets the label at `v` (identity removes it).
    pub fn with_label(mut self, v: &Vertex, perm: Permutation) -> Result<Self> {
        self.check_vertex(v, self.depth() - 1)?;
        let want = self.valencies[v.level()];
        if perm.degree() != want {
            return Err(Error::DegreeMismatch {
                left: want,
                right: perm.degree(),
            });
        }
        self.set_label(v.letters().to_vec(), perm);
        Ok(self)
    }

    /// The label at `v` (identity when none is stored).
    pub fn label(&self, v: &Vertex) -> Result<Permutation> {
        self.check_vertex(v, self.depth().saturating_sub(1))?;
        Ok(self.label_at(v.letters()))
    }

    fn label_at(&self, path: &[usize]) -> Permutation {
        self.labels
            .get(path)
            .cloned()
            .unwrap_or_else(|| Permutation::identity(self.valencies[path.len()]))
    }

    fn apply_label(&self, path: &[usize], x: usize) -> usize {
        self.labels.get(path).map_or(x, |p| p.apply(x))
    }

    fn check_vertex(&self, v: &Vertex, max_level: usize) -> Result<()> {
        if v.level() > max_level || v.level() > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: v.level(),
                len: self.depth(),
            });
        }
        for (i, &x) in v.letters().iter().enumerate() {
            if x == 0 || x > self.valencies[i] {
                return Err(Error::InvalidVertex(format!(
                    "letter {x} at position {} exceeds valency {}",
                    i + 1,
                    self.valencies[i]
                )));
            }
        }
        Ok(())
    }

    /// Image of a vertex of level at most `depth`.
    pub fn apply_vertex(&self, v: &Vertex) -> Result<Vertex> {
        self.check_vertex(v, self.depth())?;
        Ok(Vertex::new(self.image_path(v.letters())))
    }

    fn image_path(&self, path: &[usize]) -> Vec<usize> {
        (0..path.len())
            .map(|i| self.apply_label(&path[..i], path[i]))
            .collect()
    }

    /// Preimage of a vertex.
    pub fn inverse_apply(&self, w: &Vertex) -> Result<Vertex> {
        self.check_vertex(w, self.depth())?;
        Ok(Vertex::new(self.preimage_path(w.letters())))
    }

    fn preimage_path(&self, path: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(path.len());
        for &y in path {
            let x = match self.labels.get(&out) {
                Some(p) => p.inverse().apply(y),
                None => y,
            };
            out.push(x);
        }
        out
    }

    fn compatible(&self, other: &Portrait) -> Result<usize> {
        let d = self.depth().min(other.depth());
        if self.valencies[..d] != other.valencies[..d] {
            return Err(Error::SequenceMismatch);
        }
        Ok(d)
    }

    /// `self ∘ h` (h acts first), on the common depth.
    pub fn compose(&self, h: &Portrait) -> Result<Portrait> {
        let d = self.compatible(h)?;
        let (g, h) = (self.truncate(d), h.truncate(d));
        let mut support: BTreeSet<Vec<usize>> = h.labels.keys().cloned().collect();
        support.extend(g.labels.keys().map(|w| h.preimage_path(w)));
        let mut out = Portrait::from_valencies(g.valencies.clone());
        for u in support {
            let gu = g.label_at(&h.image_path(&u));
            let label = gu.compose_unchecked(&h.label_at(&u));
            out.set_label(u, label);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Portrait {
        let mut out = Portrait::from_valencies(self.valencies.clone());
        for (u, label) in &self.labels {
            out.set_label(self.image_path(u), label.inverse());
        }
        out
    }

    /// `self^e` for any integer `e`.
    pub fn pow(&self, e: i64) -> Portrait {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Portrait::from_valencies(self.valencies.clone());
        for _ in 0..e.unsigned_abs() {
            acc = acc.compose(&base).expect("same sequence");
        }
        acc
    }

    /// Drops every label at level `>= d`.
    pub fn truncate(&self, d: usize) -> Portrait {
        let d = d.min(self.depth());
        Portrait {
            valencies: self.valencies[..d].to_vec(),
            labels: self
                .labels
                .iter()
                .filter(|(k, _)| k.len() < d)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Whether `p` and `q` induce the same automorphism of `T[d]`.
    pub fn equal_to_depth(p: &Portrait, q: &Portrait, d: usize) -> Result<bool> {
        let common = p.compatible(q)?;
        if d > common {
            return Err(Error::LevelOutOfRange {
                level: d,
                len: common,
            });
        }
        Ok(p.truncate(d).labels == q.truncate(d).labels)
    }

    /// The section at `v`, as a portrait over the subtree below `v`.
    pub fn section(&self, v: &Vertex) -> Result<Portrait> {
        self.check_vertex(v, self.depth())?;
        let n = v.level();
        let mut out = Portrait::from_valencies(self.valencies[n..].to_vec());
        for (path, label) in self.labels.range(v.letters().to_vec()..) {
            if !path.starts_with(v.letters()) {
                break;
            }
            out.labels.insert(path[n..].to_vec(), label.clone());
        }
        Ok(out)
    }

    /// The permutation induced on level `n`, points numbered by
    /// lexicographic vertex index.
    pub fn level_permutation(&self, n: usize) -> Result<Permutation> {
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                len: self.depth(),
            });
        }
        let size = self.valencies[..n].iter().try_fold(1usize, |acc, &l| {
            acc.checked_mul(l).filter(|&s| s <= MAX_LEVEL_DEGREE)
        });
        if size.is_none() {
            return Err(Error::CapExceeded {
                required: self.sequence().level_size(n)?.to_string(),
                cap: MAX_LEVEL_DEGREE,
            });
        }
        // Labels by level and 0-based index of their vertex.
        let mut by_level: Vec<HashMap<usize, &Permutation>> = vec![HashMap::new(); n];
        for (path, label) in &self.labels {
            if path.len() < n {
                let idx = path
                    .iter()
                    .zip(&self.valencies)
                    .fold(0usize, |acc, (&x, &l)| acc * l + (x - 1));
                by_level[path.len()].insert(idx, label);
            }
        }
        let mut images: Vec<usize> = vec![0];
        for (k, labels) in by_level.iter().enumerate() {
            let l = self.valencies[k];
            let mut next = vec![0usize; images.len() * l];
            for (j, &img) in images.iter().enumerate() {
                let label = labels.get(&j);
                for c in 0..l {
                    let c_img = label.map_or(c, |p| p.apply0(c));
                    next[j * l + c] = img * l + c_img;
                }
            }
            images = next;
        }
        let images: Vec<usize> = images.into_iter().map(|i| i + 1).collect();
        Permutation::from_images(&images)
    }

    /// One line per stored label, in lexicographic vertex order.
    pub fn dump(&self) -> Vec<LabelLine> {
        self.labels
            .iter()
            .map(|(path, label)| LabelLine {
                level: path.len(),
                path: path.clone(),
                cycles: label.to_string(),
            })
            .collect()
    }

    /// Text dump: `"<level> <path>: <cycles>"` per stored label.
    pub fn dump_text(&self) -> String {
        let mut s = String::new();
        for line in self.dump() {
            s.push_str(&line.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Portrait{:?}{{", self.valencies)?;
        for (i, line) in self.dump().iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{line}")?;
        }
        f.write_str("}")
    }
}

/// A stored label in dump form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelLine {
    pub level: usize,
    pub path: Vec<usize>,
    pub cycles: String,
}

impl fmt::Display for LabelLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}",
            self.level,
            Vertex::new(self.path.clone()),
            self.cycles
        )
    }
}
