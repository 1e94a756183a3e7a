//! Finite permutations of `{1, ..., k}` and the alternating-group generators
//! used by the spinal construction.
//!
//! Composition is right-to-left: `g.compose(&h)` (also `&g * &h`) applies
//! `h` first, i.e. it is `x ↦ g(h(x))`.

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // 0-based image table
    images: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    /// From a 1-based image table: `images[x - 1]` is the image of `x`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        let mut table = Vec::with_capacity(k);
        for &y in images {
            if y == 0 || y > k || seen[y - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 1..={k}"
                )));
            }
            seen[y - 1] = true;
            table.push((y - 1) as u32);
        }
        Ok(Permutation { images: table })
    }

    /// Product of disjoint cycles on `{1..k}`.
    pub fn from_cycles(k: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<u32> = (0..k as u32).collect();
        let mut used = vec![false; k];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x == 0 || x > k {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} is outside 1..={k}"
                    )));
                }
                if used[x - 1] {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} appears in more than one cycle"
                    )));
                }
                used[x - 1] = true;
                let next = cycle[(i + 1) % cycle.len()];
                images[x - 1] = (next - 1) as u32;
            }
        }
        Ok(Permutation { images })
    }

    /// The single cycle `(points[0] points[1] ...)` of degree `k`.
    pub fn cycle(k: usize, points: &[usize]) -> Result<Self> {
        Self::from_cycles(k, &[points.to_vec()])
    }

    /// Parses cycle notation such as `"(3 4 5)(1 2)"`; `"()"` or `""` is the
    /// identity.
    pub fn parse_cycles(k: usize, text: &str) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
            let end = body
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
            let points = body[..end]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|p| !p.is_empty())
                .map(|p| {
                    p.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad point {p:?} in {text:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !points.is_empty() {
                cycles.push(points);
            }
            rest = body[end + 1..].trim_start();
        }
        Self::from_cycles(k, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1] as usize + 1
    }

    #[inline]
    pub(crate) fn apply0(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &y)| i as u32 == y)
    }

    pub fn fixes(&self, x: usize) -> bool {
        self.apply(x) == x
    }

    /// Smallest 1-based point moved, if any.
    pub fn first_moved(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|&(i, &y)| i as u32 != y)
            .map(|(i, _)| i + 1)
    }

    /// `self ∘ h`: apply `h`, then `self`.
    pub fn compose(&self, h: &Permutation) -> Result<Permutation> {
        if self.degree() != h.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: h.degree(),
            });
        }
        Ok(self.compose_unchecked(h))
    }

    pub(crate) fn compose_unchecked(&self, h: &Permutation) -> Permutation {
        Permutation {
            images: h.images.iter().map(|&y| self.images[y as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Permutation { images: inv }
    }

    /// `self^e` for any integer exponent.
    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut result = Permutation::identity(self.degree());
        let mut square = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose_unchecked(&square);
            }
            square = square.compose_unchecked(&square);
            n >>= 1;
        }
        result
    }

    /// `h^{-1} · self · h`.
    pub fn conjugate_by(&self, h: &Permutation) -> Result<Permutation> {
        h.inverse().compose(&self.compose(h)?)
    }

    /// Canonical cycle form: cycles ordered by their smallest point, each
    /// starting at its smallest point, fixed points omitted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x] as usize;
            }
            out.push(cycle);
        }
        out
    }

    pub fn parity(&self) -> Parity {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Order of the permutation as an element, the lcm of its cycle lengths.
    pub fn order(&self) -> u64 {
        use num_integer::Integer;
        self.cycles()
            .iter()
            .fold(1u64, |acc, c| acc.lcm(&(c.len() as u64)))
    }
}

impl Mul for &Permutation {
    type Output = Permutation;

    /// Panics on a degree mismatch; use [`Permutation::compose`] to get an
    /// error instead.
    fn mul(self, rhs: &Permutation) -> Permutation {
        self.compose(rhs).expect("permutation degrees differ")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for cycle in cycles {
            f.write_str("(")?;
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]{}", self.degree(), self)
    }
}

/// `τ_k = ((k-2) (k-1) k)` and `σ_k = (1 2 ... k)`.
///
/// For odd `k` they generate `Alt(k)`. For even `k` the `k`-cycle is odd and
/// they generate `Sym(k)`.
pub fn alt_generators(k: usize) -> Result<(Permutation, Permutation)> {
    if k < 4 {
        return Err(Error::DegreeTooSmall { got: k, min: 4 });
    }
    let tau = Permutation::cycle(k, &[k - 2, k - 1, k])?;
    let sigma = Permutation::cycle(k, &(1..=k).collect::<Vec<_>>())?;
    Ok((tau, sigma))
}

/// `κ_k = ((k-4) (k-3) (k-2))` and `ρ_k = (1 2 ... (k-2))`, both fixing
/// `k-1` and `k`.
///
/// Under right-to-left composition these are the words `σ^{-2} τ σ^2` and
/// `σ τ^2` in the generators of [`alt_generators`].
pub fn embedded_alt_generators(k: usize) -> Result<(Permutation, Permutation)> {
    if k < 5 {
        return Err(Error::DegreeTooSmall { got: k, min: 5 });
    }
    let kappa = Permutation::cycle(k, &[k - 4, k - 3, k - 2])?;
    let rho = Permutation::cycle(k, &(1..=k - 2).collect::<Vec<_>>())?;
    Ok((kappa, rho))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    /// Breadth-first closure of a generating set; an order oracle for small groups.
    pub(crate) fn closure_order(gens: &[Permutation]) -> usize {
        let k = gens[0].degree();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        let id = Permutation::identity(k);
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(g) = queue.pop_front() {
            for s in gens {
                let h = s * &g;
                if seen.insert(h.clone()) {
                    queue.push_back(h);
                }
            }
        }
        seen.len()
    }

    fn cyc(k: usize, text: &str) -> Permutation {
        Permutation::parse_cycles(k, text).unwrap()
    }

    #[test]
    fn composition_laws() {
        let (_, sigma) = alt_generators(5).unwrap();
        let id = Permutation::identity(5);
        assert_eq!(&id * &sigma, sigma);
        assert!((&sigma * &sigma.inverse()).is_identity());
        // σ_5² by image tables: 1→3→5→2→4→1
        assert_eq!((&sigma * &sigma), cyc(5, "(1 3 5 2 4)"));
        assert_eq!(sigma.pow(2), cyc(5, "(1 3 5 2 4)"));
        assert_eq!(sigma.pow(-1), sigma.inverse());
        assert!(matches!(
            sigma.compose(&Permutation::identity(4)),
            Err(Error::DegreeMismatch { left: 5, right: 4 })
        ));
    }

    #[test]
    fn right_factor_acts_first() {
        let a = cyc(3, "(1 2)");
        let b = cyc(3, "(2 3)");
        // (a·b)(2) = a(b(2)) = a(3) = 3
        assert_eq!((&a * &b).apply(2), 3);
    }

    #[test]
    fn named_generators() {
        let (tau, sigma) = alt_generators(5).unwrap();
        assert_eq!(tau.to_string(), "(3 4 5)");
        assert_eq!(sigma.to_string(), "(1 2 3 4 5)");
        let (tau, sigma) = alt_generators(7).unwrap();
        assert_eq!(tau.to_string(), "(5 6 7)");
        assert_eq!(sigma.to_string(), "(1 2 3 4 5 6 7)");
        assert_eq!(closure_order(&[tau, sigma]), 2520);
        assert_eq!(
            closure_order(&alt_generators(5).map(|(t, s)| vec![t, s]).unwrap()),
            60
        );
        assert!(alt_generators(3).is_err());
    }

    #[test]
    fn even_degree_generators_give_the_symmetric_group() {
        let (tau, sigma) = alt_generators(6).unwrap();
        assert_eq!(sigma.parity(), Parity::Odd);
        assert_eq!(closure_order(&[tau, sigma]), 720);
    }

    #[test]
    fn embedded_generators() {
        let (kappa, rho) = embedded_alt_generators(7).unwrap();
        assert_eq!(kappa.to_string(), "(3 4 5)");
        assert_eq!(rho.to_string(), "(1 2 3 4 5)");
        assert_eq!(closure_order(&[kappa.clone(), rho.clone()]), 60);
        for g in [&kappa, &rho] {
            assert!(g.fixes(6) && g.fixes(7));
        }
        let (kappa, rho) = embedded_alt_generators(5).unwrap();
        assert_eq!(kappa.to_string(), "(1 2 3)");
        assert_eq!(rho.to_string(), "(1 2 3)");
        assert!(embedded_alt_generators(4).is_err());
    }

    #[test]
    fn embedded_generators_as_words() {
        for k in 5..=40 {
            let (tau, sigma) = alt_generators(k).unwrap();
            let (kappa, rho) = embedded_alt_generators(k).unwrap();
            let s2 = sigma.pow(2);
            assert_eq!(&(&s2.inverse() * &tau) * &s2, kappa, "kappa_{k}");
            assert_eq!(&sigma * &tau.pow(2), rho, "rho_{k} = sigma tau^2");
            // the other word, tau^2 sigma, moves k-1 or k
            let other = &tau.pow(2) * &sigma;
            assert!(!(other.fixes(k - 1) && other.fixes(k)), "k = {k}");
        }
    }

    #[test]
    fn cycle_forms() {
        assert!(Permutation::identity(5).cycles().is_empty());
        assert_eq!(Permutation::identity(5).to_string(), "()");
        let (tau, _) = alt_generators(5).unwrap();
        assert_eq!(Permutation::from_cycles(5, &[vec![3, 4, 5]]).unwrap(), tau);
        assert_eq!(
            Permutation::from_cycles(5, &[vec![1, 2]]).unwrap().parity(),
            Parity::Odd
        );
        assert_eq!(cyc(6, "(4 6)(2 5 1)").to_string(), "(1 2 5)(4 6)");
        assert!(Permutation::from_cycles(5, &[vec![1, 2], vec![2, 3]]).is_err());
        assert!(Permutation::from_cycles(5, &[vec![6]]).is_err());
        assert!(Permutation::parse_cycles(5, "(1 2").is_err());
        assert!(Permutation::from_images(&[1, 1, 2]).is_err());
        assert_eq!(cyc(4, "(1 2)(3 4)").order(), 2);
    }

    fn perm_of_degree(k: usize) -> impl Strategy<Value = Permutation> {
        Just((1..=k).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(&v).unwrap())
    }

    fn triple() -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
        (1usize..=12).prop_flat_map(|k| (perm_of_degree(k), perm_of_degree(k), perm_of_degree(k)))
    }

    proptest! {
        #[test]
        fn group_axioms((a, b, c) in triple()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&Permutation::identity(a.degree()) * &a, a.clone());
            prop_assert!((&a * &a.inverse()).is_identity());
            prop_assert!((&a.inverse() * &a).is_identity());
        }

        #[test]
        fn cycle_form_round_trip(a in (1usize..=12).prop_flat_map(perm_of_degree)) {
            let back = Permutation::parse_cycles(a.degree(), &a.to_string()).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn parity_is_a_homomorphism((a, b, _) in triple()) {
            let even = |p: &Permutation| p.parity() == Parity::Even;
            prop_assert_eq!(even(&(&a * &b)), even(&a) == even(&b));
        }
    }
}
