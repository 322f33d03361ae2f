//! GF(2) cohomology models and the zero-divisor nilpotency lower bound
//! `cx(F) ≥ nil(Ker(Id × F*))`.

mod algebra;

use serde::{Deserialize, Serialize};

pub use algebra::{
    exterior_algebra, exterior_algebra_named, induced_product_hom, tensor, truncated_poly, truncated_poly_named, Gf2Vec,
    GradedAlgebra, GradedHom,
};

use crate::error::{Error, Result};

/// A GF(2) subspace kept in echelon form: every row's lowest set bit is a
/// pivot no other row has set below its own pivot.
#[derive(Debug, Clone)]
struct Echelon {
    rows: Vec<Gf2Vec>,
    pivot_row: Vec<Option<usize>>,
}

impl Echelon {
    fn new(dim: usize) -> Self {
        Self { rows: Vec::new(), pivot_row: vec![None; dim] }
    }

    fn reduce(&self, mut v: Gf2Vec) -> Gf2Vec {
        let mut from = 0;
        while let Some(p) = next_pivot(&v, &self.pivot_row, from) {
            v.xor_assign(&self.rows[self.pivot_row[p].expect("pivot present")]);
            from = p + 1;
        }
        v
    }

    /// Adds `v` if it is independent; returns whether it was.
    fn insert(&mut self, v: Gf2Vec) -> bool {
        let r = self.reduce(v);
        match r.lowest_one() {
            None => false,
            Some(p) => {
                self.pivot_row[p] = Some(self.rows.len());
                self.rows.push(r);
                true
            }
        }
    }

}

/// Lowest set bit of `v` at or above `from` that is some row's pivot.
/// Reducing by that row only touches higher bits, so the scan can resume
/// just past it.
fn next_pivot(v: &Gf2Vec, pivot_row: &[Option<usize>], mut from: usize) -> Option<usize> {
    while let Some(i) = v.next_one(from) {
        if pivot_row[i].is_some() {
            return Some(i);
        }
        from = i + 1;
    }
    None
}

/// Null space of the linear map given by column images, as a reduced basis
/// indexed by the free columns in increasing order.
fn null_space(columns: &[Gf2Vec], target_dim: usize) -> Vec<Vec<usize>> {
    // Gaussian elimination on the images, tracking which source columns
    // make up each reduced image.
    let mut echelon = Echelon::new(target_dim);
    let mut combos: Vec<Gf2Vec> = Vec::new();
    let mut kernel = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let mut v = col.clone();
        let mut combo = Gf2Vec::unit(columns.len(), j);
        let mut from = 0;
        while let Some(p) = next_pivot(&v, &echelon.pivot_row, from) {
            let r = echelon.pivot_row[p].expect("pivot present");
            v.xor_assign(&echelon.rows[r]);
            combo.xor_assign(&combos[r]);
            from = p + 1;
        }
        match v.lowest_one() {
            None => kernel.push(combo.ones().collect()),
            Some(p) => {
                echelon.pivot_row[p] = Some(echelon.rows.len());
                echelon.rows.push(v);
                combos.push(combo);
            }
        }
    }
    kernel
}

/// `Ker(h)` as a homogeneous vector-space basis, by increasing degree.
#[derive(Debug, Clone)]
pub struct KernelIdeal {
    pub basis: Vec<Gf2Vec>,
}

impl KernelIdeal {
    pub fn of(hom: &GradedHom) -> Self {
        let src = &hom.source;
        let mut basis = Vec::new();
        for d in 0..=src.top_degree() {
            let idx = src.degree_basis(d);
            let cols: Vec<Gf2Vec> = idx.iter().map(|i| hom.image_of_basis(*i).clone()).collect();
            for combo in null_space(&cols, hom.target.dim()) {
                let mut v = Gf2Vec::zeros(src.dim());
                for c in combo {
                    v.flip(idx[c]);
                }
                basis.push(v);
            }
        }
        Self { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// A nonzero product of kernel elements of maximal length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub factors: Vec<String>,
    pub product: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Nilpotency {
    /// Least `j` with every `j`-fold product of ideal elements zero.
    pub nilpotency: usize,
    /// `dim S_j` for `j = 1, 2, …` up to the first zero.
    pub dims: Vec<usize>,
    pub certificate: Option<Certificate>,
}

/// Runs the sweep `S_1 = span(gens)`, `S_{j+1} = span{g · s}` and returns the
/// least `j` with `S_j = 0`. Each `S_j` is spanned by pure products, which are
/// kept so the last nonzero level yields a certificate.
pub fn nilpotency_of_span(alg: &GradedAlgebra, gens: &[Gf2Vec]) -> Nilpotency {
    sweep(alg, gens, gens)
}

/// Nilpotency of `Ker(hom)`.
///
/// The kernel is an ideal, so `I^{j+1} = span{g · s}` with `g` running over
/// ideal generators only; that is far cheaper than multiplying by a full
/// vector-space basis.
pub fn nilpotency(hom: &GradedHom, kernel: &KernelIdeal) -> Nilpotency {
    let gens = ideal_generators(&hom.source, &kernel.basis);
    sweep(&hom.source, &kernel.basis, &gens)
}

/// A subset of the homogeneous `basis` (sorted by degree) that generates the
/// same ideal.
fn ideal_generators(alg: &GradedAlgebra, basis: &[Gf2Vec]) -> Vec<Gf2Vec> {
    let mut gens: Vec<(usize, Gf2Vec)> = Vec::new();
    let mut d = usize::MAX;
    let mut echelon = Echelon::new(alg.dim());
    for v in basis {
        let dv = alg.homogeneous_degree(v).expect("kernel basis is homogeneous");
        if dv != d {
            d = dv;
            echelon = Echelon::new(alg.dim());
            for (dg, g) in &gens {
                for m in alg.degree_basis(d - dg) {
                    echelon.insert(alg.mul(&alg.basis(m), g));
                }
            }
        }
        if echelon.insert(v.clone()) {
            gens.push((d, v.clone()));
        }
    }
    gens.into_iter().map(|(_, g)| g).collect()
}

/// `S_1 = span(first)`, `S_{j+1} = span{m · s : m ∈ multipliers, s ∈ S_j}`.
fn sweep(alg: &GradedAlgebra, first: &[Gf2Vec], multipliers: &[Gf2Vec]) -> Nilpotency {
    let dim = alg.dim();
    // Each level element carries its factors: multipliers, then one `first`.
    let mut level: Vec<(Gf2Vec, Vec<&Gf2Vec>)> = Vec::new();
    let mut echelon = Echelon::new(dim);
    for g in first {
        if echelon.insert(g.clone()) {
            level.push((g.clone(), vec![g]));
        }
    }
    let mut dims = Vec::new();
    let mut last_nonzero = None;
    while !level.is_empty() {
        dims.push(level.len());
        let mut next = Vec::new();
        let mut echelon = Echelon::new(dim);
        for m in multipliers {
            for (s, factors) in &level {
                let p = alg.mul(m, s);
                if !p.is_zero() && echelon.insert(p.clone()) {
                    let mut f = vec![m];
                    f.extend(factors);
                    next.push((p, f));
                }
            }
        }
        last_nonzero = level.into_iter().next();
        level = next;
    }
    dims.push(0);
    let certificate = last_nonzero.map(|(p, factors)| Certificate {
        factors: factors.iter().map(|g| alg.format(g)).collect(),
        product: alg.format(&p),
    });
    Nilpotency { nilpotency: dims.len(), dims, certificate }
}

/// Input description of `F*: H*(W) → H*(C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomologyModel {
    /// `torusN`.
    pub config: String,
    /// `torusM`, `circle`, `so3` or `sphere`.
    pub work: String,
    /// Image of the single workspace generator, as coefficients over
    /// `x1 … xN`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fstar_u: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fstar: Option<FstarSpec>,
}

/// Generator images: `"identity"`, `"zero"`, or one coefficient row per
/// workspace generator over the configuration basis of that generator's
/// degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FstarSpec {
    Named(String),
    Rows(Vec<Vec<u8>>),
}

fn torus_dim(name: &str) -> Option<usize> {
    name.strip_prefix("torus")?.parse().ok()
}

impl CohomologyModel {
    pub fn config_algebra(&self) -> Result<GradedAlgebra> {
        let n = torus_dim(&self.config)
            .ok_or_else(|| Error::InvalidInput(format!("config space must be torusN, got {:?}", self.config)))?;
        exterior_algebra(n)
    }

    pub fn work_algebra(&self) -> Result<GradedAlgebra> {
        match self.work.as_str() {
            "so3" => truncated_poly(4),
            "circle" => exterior_algebra_named(1, "y"),
            "sphere" => truncated_poly_named(2, 2, "v"),
            w => match torus_dim(w) {
                Some(m) => exterior_algebra_named(m, "y"),
                None => Err(Error::InvalidInput(format!("unknown workspace {w:?}"))),
            },
        }
    }

    /// `F*` as a graded homomorphism.
    pub fn fstar(&self) -> Result<GradedHom> {
        let c = self.config_algebra()?;
        let w = self.work_algebra()?;
        let row_to_elem = |row: &[u8], degree: usize| -> Result<Gf2Vec> {
            let idx = c.degree_basis(degree);
            if row.len() != idx.len() {
                return Err(Error::DimensionError { expected: idx.len(), got: row.len() });
            }
            let mut v = Gf2Vec::zeros(c.dim());
            for (k, b) in row.iter().enumerate() {
                if b % 2 == 1 {
                    v.flip(idx[k]);
                }
            }
            Ok(v)
        };
        let degrees: Vec<usize> = w.generators().iter().map(|g| w.degree(*g)).collect();
        let images: Vec<Gf2Vec> = match (&self.fstar_u, &self.fstar) {
            (Some(_), Some(_)) => return Err(Error::InvalidInput("give fstar_u or fstar, not both".into())),
            (Some(row), None) => {
                if degrees.len() != 1 {
                    return Err(Error::InvalidInput("fstar_u needs a workspace with one generator".into()));
                }
                vec![row_to_elem(row, degrees[0])?]
            }
            (None, Some(FstarSpec::Rows(rows))) => {
                if rows.len() != degrees.len() {
                    return Err(Error::DimensionError { expected: degrees.len(), got: rows.len() });
                }
                rows.iter().zip(&degrees).map(|(r, d)| row_to_elem(r, *d)).collect::<Result<_>>()?
            }
            (None, Some(FstarSpec::Named(n))) if n == "zero" => vec![Gf2Vec::zeros(c.dim()); degrees.len()],
            (None, Some(FstarSpec::Named(n))) if n == "identity" => {
                if degrees.len() > c.generators().len() || degrees.iter().any(|d| *d != 1) {
                    return Err(Error::InvalidInput("identity needs degree-one workspace generators".into()));
                }
                (0..degrees.len()).map(|k| c.generator(k)).collect()
            }
            (None, Some(FstarSpec::Named(n))) => return Err(Error::InvalidInput(format!("unknown fstar {n:?}"))),
            (None, None) => return Err(Error::InvalidInput("model needs fstar_u or fstar".into())),
        };
        GradedHom::new(w, c, images)
    }
}

/// `nil(Ker(Id × F*))` for a model, a lower bound on the complexity of `F`.
pub fn cx_lower_bound(model: &CohomologyModel) -> Result<Nilpotency> {
    let prod = induced_product_hom(&model.fstar()?)?;
    let kernel = KernelIdeal::of(&prod);
    Ok(nilpotency(&prod, &kernel))
}
