use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A vector over GF(2), packed 64 coordinates per word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Vec {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.flip(i);
        v
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if b % 2 == 1 {
                v.flip(i);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn xor_assign(&mut self, other: &Gf2Vec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }

    /// Lowest set coordinate at or above `from`.
    pub fn next_one(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let (k0, b0) = (from / 64, from % 64);
        let first = self.words[k0] & (u64::MAX << b0);
        if first != 0 {
            return Some(k0 * 64 + first.trailing_zeros() as usize);
        }
        self.words[k0 + 1..]
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| (k0 + 1 + k) * 64 + w.trailing_zeros() as usize)
    }

    pub fn lowest_one(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, w)| **w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

impl fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vec{:?}", self.ones().collect::<Vec<_>>())
    }
}

const MAX_EXTERIOR: usize = 12;
const MAX_DIM: usize = 1 << 16;
const EXHAUSTIVE_ASSOCIATIVITY: usize = 256;
const EXHAUSTIVE_HOM: usize = 1 << 10;

#[derive(Debug, Clone)]
enum Structure {
    /// Basis index = bitmask of the generators present.
    Exterior { n: usize },
    /// Basis index = power of the generator.
    Truncated { m: usize },
    /// Basis index = `a · dim(B) + b`.
    Tensor(Arc<GradedAlgebra>, Arc<GradedAlgebra>),
}

/// A finite-dimensional graded-commutative GF(2) algebra with a monomial
/// basis, in which the product of two basis monomials is zero or a single
/// basis monomial.
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    structure: Structure,
    names: Vec<String>,
    degrees: Vec<usize>,
    /// Basis index of each generator.
    generators: Vec<usize>,
}

impl GradedAlgebra {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn top_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Basis indices of the generators.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn unit(&self) -> Gf2Vec {
        Gf2Vec::unit(self.dim(), 0)
    }

    pub fn basis(&self, i: usize) -> Gf2Vec {
        Gf2Vec::unit(self.dim(), i)
    }

    pub fn generator(&self, k: usize) -> Gf2Vec {
        self.basis(self.generators[k])
    }

    /// Product of basis monomials.
    pub fn mul_basis(&self, i: usize, j: usize) -> Option<usize> {
        match &self.structure {
            Structure::Exterior { .. } => (i & j == 0).then_some(i | j),
            Structure::Truncated { m, .. } => (i + j < *m).then_some(i + j),
            Structure::Tensor(a, b) => {
                let d = b.dim();
                let x = a.mul_basis(i / d, j / d)?;
                let y = b.mul_basis(i % d, j % d)?;
                Some(x * d + y)
            }
        }
    }

    pub fn mul(&self, x: &Gf2Vec, y: &Gf2Vec) -> Gf2Vec {
        let mut out = Gf2Vec::zeros(self.dim());
        for i in x.ones() {
            for j in y.ones() {
                if let Some(k) = self.mul_basis(i, j) {
                    out.flip(k);
                }
            }
        }
        out
    }

    pub fn pow(&self, x: &Gf2Vec, k: usize) -> Gf2Vec {
        (0..k).fold(self.unit(), |acc, _| self.mul(&acc, x))
    }

    /// Generator indices (with repetition) whose product is basis monomial `i`.
    pub fn monomial_factors(&self, i: usize) -> Vec<usize> {
        match &self.structure {
            Structure::Exterior { n } => (0..*n).filter(|k| i >> k & 1 == 1).collect(),
            Structure::Truncated { .. } => vec![0; i],
            Structure::Tensor(a, b) => {
                let d = b.dim();
                let mut f = a.monomial_factors(i / d);
                f.extend(b.monomial_factors(i % d).into_iter().map(|g| g + a.generators.len()));
                f
            }
        }
    }

    /// Degree of a homogeneous element; `None` for zero or inhomogeneous.
    pub fn homogeneous_degree(&self, x: &Gf2Vec) -> Option<usize> {
        let mut degs = x.ones().map(|i| self.degrees[i]);
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    /// Basis indices of degree `d`, in basis order.
    pub fn degree_basis(&self, d: usize) -> Vec<usize> {
        (0..self.dim()).filter(|i| self.degrees[*i] == d).collect()
    }

    pub fn format(&self, x: &Gf2Vec) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.ones().map(|i| self.names[i].as_str()).collect::<Vec<_>>().join(" + ")
    }

    fn check(self) -> Result<Self> {
        let dim = self.dim();
        let graded = |i: usize, j: usize| match self.mul_basis(i, j) {
            Some(k) => self.degrees[k] == self.degrees[i] + self.degrees[j] && self.mul_basis(j, i) == Some(k),
            None => self.mul_basis(j, i).is_none(),
        };
        let assoc = |i: usize, j: usize, k: usize| {
            let left = self.mul_basis(i, j).and_then(|ij| self.mul_basis(ij, k));
            let right = self.mul_basis(j, k).and_then(|jk| self.mul_basis(i, jk));
            left == right
        };
        // Small algebras: every basis triple. Larger ones: triples with two
        // generator factors, which pins down the multiplication rule of each
        // generator. Tensor products inherit associativity from factors that
        // were themselves checked.
        let all: Vec<usize> = (0..dim).collect();
        let (firsts, thirds) = if dim <= EXHAUSTIVE_ASSOCIATIVITY {
            (all.clone(), all.clone())
        } else if matches!(self.structure, Structure::Tensor(..)) {
            (Vec::new(), Vec::new())
        } else {
            (self.generators.clone(), self.generators.clone())
        };
        for &i in &firsts {
            for j in 0..dim {
                if !graded(i, j) {
                    return Err(Error::ConstructionError(format!("product {} · {} is not graded-commutative", self.names[i], self.names[j])));
                }
                for &k in &thirds {
                    if !assoc(i, j, k) {
                        return Err(Error::ConstructionError(format!(
                            "product not associative on {}, {}, {}",
                            self.names[i], self.names[j], self.names[k]
                        )));
                    }
                }
            }
        }
        Ok(self)
    }
}

/// `Λ(x1, …, xn)` with degree-one generators.
pub fn exterior_algebra(n: usize) -> Result<GradedAlgebra> {
    exterior_algebra_named(n, "x")
}

pub fn exterior_algebra_named(n: usize, prefix: &str) -> Result<GradedAlgebra> {
    if !(1..=MAX_EXTERIOR).contains(&n) {
        return Err(Error::SizeError(format!("exterior algebra needs 1 <= n <= {MAX_EXTERIOR}, got {n}")));
    }
    let dim = 1usize << n;
    let names = (0..dim)
        .map(|mask| {
            if mask == 0 {
                "1".to_string()
            } else {
                (0..n).filter(|k| mask >> k & 1 == 1).map(|k| format!("{prefix}{}", k + 1)).collect()
            }
        })
        .collect();
    let degrees = (0..dim).map(|mask: usize| mask.count_ones() as usize).collect();
    GradedAlgebra { structure: Structure::Exterior { n }, names, degrees, generators: (0..n).map(|k| 1 << k).collect() }.check()
}

/// `Z2[u]/(u^m)` with `deg u = 1`.
pub fn truncated_poly(m: usize) -> Result<GradedAlgebra> {
    truncated_poly_named(m, 1, "u")
}

/// `Z2[name]/(name^m)` with the generator in degree `degree`.
pub fn truncated_poly_named(m: usize, degree: usize, name: &str) -> Result<GradedAlgebra> {
    if m < 2 || degree == 0 {
        return Err(Error::InvalidInput(format!("truncated polynomial needs m >= 2 and positive degree, got m={m}, degree={degree}")));
    }
    if m > MAX_DIM {
        return Err(Error::SizeError(format!("truncated polynomial of dimension {m}")));
    }
    let names = (0..m)
        .map(|k| match k {
            0 => "1".to_string(),
            1 => name.to_string(),
            _ => format!("{name}^{k}"),
        })
        .collect();
    GradedAlgebra {
        structure: Structure::Truncated { m },
        names,
        degrees: (0..m).map(|k| k * degree).collect(),
        generators: vec![1],
    }
    .check()
}

/// `A ⊗ B` with `(a⊗b)(a′⊗b′) = aa′ ⊗ bb′`.
pub fn tensor(a: &GradedAlgebra, b: &GradedAlgebra) -> Result<GradedAlgebra> {
    let dim = a.dim().checked_mul(b.dim()).filter(|d| *d <= MAX_DIM);
    let Some(dim) = dim else {
        return Err(Error::SizeError(format!("tensor product of dimension {} x {}", a.dim(), b.dim())));
    };
    let d = b.dim();
    let names = (0..dim).map(|i| format!("{}⊗{}", a.names[i / d], b.names[i % d])).collect();
    let degrees = (0..dim).map(|i| a.degrees[i / d] + b.degrees[i % d]).collect();
    let generators = a.generators.iter().map(|g| g * d).chain(b.generators.iter().copied()).collect();
    GradedAlgebra { structure: Structure::Tensor(Arc::new(a.clone()), Arc::new(b.clone())), names, degrees, generators }.check()
}

/// A graded algebra homomorphism, determined by its generator images.
#[derive(Debug, Clone)]
pub struct GradedHom {
    pub source: GradedAlgebra,
    pub target: GradedAlgebra,
    /// Image of every source basis monomial.
    images: Vec<Gf2Vec>,
}

impl GradedHom {
    pub fn new(source: GradedAlgebra, target: GradedAlgebra, generator_images: Vec<Gf2Vec>) -> Result<Self> {
        if generator_images.len() != source.generators.len() {
            return Err(Error::DimensionError { expected: source.generators.len(), got: generator_images.len() });
        }
        for (k, img) in generator_images.iter().enumerate() {
            if img.len() != target.dim() {
                return Err(Error::DimensionError { expected: target.dim(), got: img.len() });
            }
            let want = source.degrees[source.generators[k]];
            if !img.is_zero() && target.homogeneous_degree(img) != Some(want) {
                return Err(Error::ConstructionError(format!(
                    "image of {} is not homogeneous of degree {want}",
                    source.names[source.generators[k]]
                )));
            }
        }
        let images: Vec<Gf2Vec> = (0..source.dim())
            .map(|i| {
                source
                    .monomial_factors(i)
                    .into_iter()
                    .fold(target.unit(), |acc, g| target.mul(&acc, &generator_images[g]))
            })
            .collect();
        let hom = Self { source, target, images };
        hom.check_multiplicative()?;
        Ok(hom)
    }

    fn check_multiplicative(&self) -> Result<()> {
        // Exhaustive on pairs up to this size; beyond it, generator × basis
        // pairs, which determine multiplicativity by induction on length.
        let dim = self.source.dim();
        let firsts: Vec<usize> = if dim <= EXHAUSTIVE_HOM { (0..dim).collect() } else { self.source.generators.clone() };
        for &i in &firsts {
            for j in 0..dim {
                let lhs = match self.source.mul_basis(i, j) {
                    Some(k) => self.images[k].clone(),
                    None => Gf2Vec::zeros(self.target.dim()),
                };
                if lhs != self.target.mul(&self.images[i], &self.images[j]) {
                    return Err(Error::ConstructionError(format!(
                        "not multiplicative on {} · {}",
                        self.source.names[i], self.source.names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &Gf2Vec) -> Gf2Vec {
        let mut out = Gf2Vec::zeros(self.target.dim());
        for i in x.ones() {
            out.xor_assign(&self.images[i]);
        }
        out
    }

    pub fn image_of_basis(&self, i: usize) -> &Gf2Vec {
        &self.images[i]
    }
}

/// `Id × F*: H*(C) ⊗ H*(W) → H*(C)`, `x ⊗ a ↦ x · F*(a)`, for
/// `F*: H*(W) → H*(C)`.
pub fn induced_product_hom(fa: &GradedHom) -> Result<GradedHom> {
    let c = &fa.target;
    let w = &fa.source;
    let source = tensor(c, w)?;
    let images = c
        .generators
        .iter()
        .map(|g| c.basis(*g))
        .chain(w.generators.iter().map(|g| fa.images[*g].clone()))
        .collect();
    GradedHom::new(source, c.clone(), images)
}
