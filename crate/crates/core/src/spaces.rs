//! Hilbert spaces for the four state classes: basis enumeration, dimensions
//! and the isometric embeddings of symmetric, antisymmetric and parity-sector
//! subspaces into full tensor or Fock spaces.
//!
//! Ordering conventions:
//! - full tensor products: row-major multi-indices, first factor most significant;
//! - `Sym^L(C^d)`: sorted multisets in lexicographic order;
//! - `∧^L(C^d)`: strictly increasing tuples in lexicographic order;
//! - Fock space: occupation bitstrings read as unsigned integers, mode 1 the
//!   most significant bit.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{binomial, c, max_abs, CMatrix, CVector, Limits, ZERO};
use crate::operators::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Separable,
    Bosonic,
    Slater,
    Gaussian,
}

impl ClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassKind::Separable => "separable",
            ClassKind::Bosonic => "bosonic",
            ClassKind::Slater => "slater",
            ClassKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "separable" => Ok(ClassKind::Separable),
            "bosonic" => Ok(ClassKind::Bosonic),
            "slater" => Ok(ClassKind::Slater),
            "gaussian" => Ok(ClassKind::Gaussian),
            other => Err(Error::param(format!("unknown state class '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawClass {
    kind: ClassKind,
    d: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
}

/// Which family of uncorrelated pure states is meant.
///
/// `d` is the single-particle dimension (number of modes for
/// [`ClassKind::Gaussian`]) and `particles` the particle number `L`, absent
/// for the Gaussian class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawClass", into = "RawClass")]
pub struct StateClass {
    kind: ClassKind,
    d: usize,
    particles: Option<usize>,
}

impl TryFrom<RawClass> for StateClass {
    type Error = Error;

    fn try_from(raw: RawClass) -> Result<Self> {
        StateClass::unbounded(raw.kind, raw.d, raw.l)
    }
}

impl From<StateClass> for RawClass {
    fn from(class: StateClass) -> Self {
        RawClass {
            kind: class.kind,
            d: class.d,
            l: class.particles,
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.particles {
            Some(l) => write!(f, "{}{{d={},L={}}}", self.kind, self.d, l),
            None => write!(f, "{}{{d={}}}", self.kind, self.d),
        }
    }
}

impl StateClass {
    /// Validated class whose `Sym²(H)` fits the default dense memory cap.
    pub fn new(kind: ClassKind, d: usize, particles: Option<usize>) -> Result<Self> {
        Self::with_limits(kind, d, particles, &Limits::default())
    }

    pub fn with_limits(
        kind: ClassKind,
        d: usize,
        particles: Option<usize>,
        limits: &Limits,
    ) -> Result<Self> {
        let class = Self::unbounded(kind, d, particles)?;
        class.check_cap(limits)?;
        Ok(class)
    }

    /// Shape-validated class without any memory cap, for closed-form arithmetic.
    pub fn unbounded(kind: ClassKind, d: usize, particles: Option<usize>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param(
                "single-particle dimension d must be at least 1",
            ));
        }
        let particles = match (kind, particles) {
            (ClassKind::Gaussian, _) => None,
            (_, None) => {
                return Err(Error::param(format!(
                    "class {kind} requires a particle number L"
                )))
            }
            (_, Some(0)) => return Err(Error::param("particle number L must be at least 1")),
            (ClassKind::Slater, Some(l)) if l > d => {
                return Err(Error::param(format!(
                    "Slater determinants need L <= d (got L={l}, d={d})"
                )))
            }
            (_, Some(l)) => Some(l),
        };
        let class = StateClass { kind, d, particles };
        class.dim_u128()?;
        Ok(class)
    }

    pub fn separable(d: usize, l: usize) -> Result<Self> {
        Self::new(ClassKind::Separable, d, Some(l))
    }

    pub fn bosonic(d: usize, l: usize) -> Result<Self> {
        Self::new(ClassKind::Bosonic, d, Some(l))
    }

    pub fn slater(d: usize, l: usize) -> Result<Self> {
        Self::new(ClassKind::Slater, d, Some(l))
    }

    pub fn gaussian(d: usize) -> Result<Self> {
        Self::new(ClassKind::Gaussian, d, None)
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn particles(&self) -> Option<usize> {
        self.particles
    }

    /// Particle number for the fixed-`L` classes; 0 for Gaussian.
    pub(crate) fn l(&self) -> usize {
        self.particles.unwrap_or(0)
    }

    /// Dimension `N` of the physical Hilbert space, exact.
    pub fn dim_u128(&self) -> Result<u128> {
        let d = self.d as u64;
        let l = self.l() as u64;
        let overflow = || Error::param(format!("dimension of {self} overflows"));
        match self.kind {
            ClassKind::Separable => (d as u128)
                .checked_pow(u32::try_from(l).map_err(|_| overflow())?)
                .ok_or_else(overflow),
            ClassKind::Bosonic => {
                if d + l > 120 {
                    return Err(overflow());
                }
                Ok(binomial(d + l - 1, l))
            }
            ClassKind::Slater => {
                if d > 120 {
                    return Err(overflow());
                }
                Ok(binomial(d, l))
            }
            ClassKind::Gaussian => {
                if d > 120 {
                    return Err(overflow());
                }
                Ok(1u128 << (d - 1))
            }
        }
    }

    /// Dimension `N` as a machine integer; errors when it cannot be addressed.
    pub fn dim(&self) -> Result<usize> {
        let n = self.dim_u128()?;
        usize::try_from(n).map_err(|_| Error::param(format!("dimension of {self} overflows usize")))
    }

    pub fn sym2_dim_u128(&self) -> Result<u128> {
        let n = self.dim_u128()?;
        n.checked_mul(n + 1)
            .map(|x| x / 2)
            .ok_or_else(|| Error::param(format!("Sym² dimension of {self} overflows")))
    }

    pub fn check_cap(&self, limits: &Limits) -> Result<()> {
        let s = self.sym2_dim_u128()?;
        limits.check_dense(&format!("Sym²(H) operators for {self}"), s, s)
    }

    /// Factor layout of the single-copy space inside which `H` is embedded.
    pub fn carrier(&self) -> BasisSpec {
        match self.kind {
            ClassKind::Separable => BasisSpec::FullTensor {
                d: self.d,
                l: self.l(),
            },
            ClassKind::Bosonic => BasisSpec::Sym {
                d: self.d,
                l: self.l(),
            },
            ClassKind::Slater => BasisSpec::Wedge {
                d: self.d,
                l: self.l(),
            },
            ClassKind::Gaussian => BasisSpec::FockEven { d: self.d },
        }
    }
}

/// Dimension `N` of the physical space carrying density matrices of `class`.
pub fn dim_space(class: &StateClass) -> Result<usize> {
    class.dim()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisSpec {
    FullTensor { d: usize, l: usize },
    Sym { d: usize, l: usize },
    Wedge { d: usize, l: usize },
    FockEven { d: usize },
    FockFull { d: usize },
}

impl BasisSpec {
    pub fn dim(&self) -> usize {
        match *self {
            BasisSpec::FullTensor { d, l } => d.pow(l as u32),
            BasisSpec::Sym { d, l } => binomial((d + l - 1) as u64, l as u64) as usize,
            BasisSpec::Wedge { d, l } => binomial(d as u64, l as u64) as usize,
            BasisSpec::FockEven { d } => 1 << (d - 1),
            BasisSpec::FockFull { d } => 1 << d,
        }
    }
}

/// Digits of `index` in base `d`, first factor most significant.
pub fn multi_index(mut index: usize, d: usize, factors: usize) -> Vec<usize> {
    let mut digits = vec![0; factors];
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

pub fn flat_index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Sorted multisets of size `l` over `0..d`, lexicographic.
pub fn multisets(d: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i, d, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, l, &mut Vec::with_capacity(l), &mut out);
    out
}

/// Strictly increasing tuples of size `l` over `0..d`, lexicographic.
pub fn increasing_tuples(d: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, l, &mut Vec::with_capacity(l), &mut out);
    out
}

/// Sign of the permutation that sorts `seq` (entries distinct).
pub(crate) fn sorting_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Isometric embedding `J` of a subspace; `J†J = I` on the source.
#[derive(Clone, Debug)]
pub struct Isometry {
    source: BasisSpec,
    target: BasisSpec,
    matrix: CMatrix,
}

impl Isometry {
    pub fn source(&self) -> BasisSpec {
        self.source
    }

    pub fn target(&self) -> BasisSpec {
        self.target
    }

    /// `dim(target) × dim(source)` matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖J†J − I‖_max`.
    pub fn gram_defect(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        max_abs(&(gram - CMatrix::identity(self.source_dim(), self.source_dim())))
    }

    pub fn embed(&self, v: &CVector) -> Result<CVector> {
        Error::check_dim(self.source_dim(), v.len())?;
        Ok(&self.matrix * v)
    }

    pub fn restrict(&self, v: &CVector) -> Result<CVector> {
        Error::check_dim(self.target_dim(), v.len())?;
        Ok(self.matrix.adjoint() * v)
    }

    /// `J† m J`.
    pub fn compress(&self, m: &CMatrix) -> Result<CMatrix> {
        Error::check_dim(self.target_dim(), m.nrows())?;
        Ok(self.matrix.adjoint() * m * &self.matrix)
    }

    /// `(J ⊗ J) v` for `v` on two copies of the source.
    pub fn embed_pair(&self, v: &CVector) -> Result<CVector> {
        let n = self.source_dim();
        Error::check_dim(n * n, v.len())?;
        let vm = crate::linalg::unvec(v, n, n);
        Ok(crate::linalg::vec_of(
            &(&self.matrix * vm * self.matrix.transpose()),
        ))
    }

    /// `(J ⊗ J)† w` for `w` on two copies of the target.
    pub fn restrict_pair(&self, w: &CVector) -> Result<CVector> {
        let t = self.target_dim();
        Error::check_dim(t * t, w.len())?;
        let wm = crate::linalg::unvec(w, t, t);
        Ok(crate::linalg::vec_of(
            &(self.matrix.adjoint() * wm * self.matrix.conjugate()),
        ))
    }
}

fn check_embedding_cap(what: &str, rows: usize, cols: usize) -> Result<()> {
    Limits::default().check_dense(what, rows as u128, cols as u128)
}

/// Embedding of `Sym^L(C^d)` into `(C^d)^{⊗L}`: each multiset maps to the
/// normalized sum of its distinct arrangements.
pub fn sym_isometry(d: usize, l: usize) -> Result<Isometry> {
    if d == 0 || l == 0 {
        return Err(Error::param("sym_isometry needs d >= 1 and L >= 1"));
    }
    let source = BasisSpec::Sym { d, l };
    let target = BasisSpec::FullTensor { d, l };
    check_embedding_cap("Sym^L isometry", target.dim(), source.dim())?;
    let basis = multisets(d, l);
    let lookup: HashMap<&[usize], usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_slice(), i))
        .collect();
    let mut matrix = CMatrix::zeros(target.dim(), source.dim());
    let mut counts = vec![0usize; basis.len()];
    for row in 0..target.dim() {
        let mut digits = multi_index(row, d, l);
        digits.sort_unstable();
        let col = lookup[digits.as_slice()];
        matrix[(row, col)] = c(1.0);
        counts[col] += 1;
    }
    for (col, &n) in counts.iter().enumerate() {
        let scale = 1.0 / (n as f64).sqrt();
        matrix.column_mut(col).iter_mut().for_each(|z| *z *= scale);
    }
    Ok(Isometry {
        source,
        target,
        matrix,
    })
}

/// Embedding of `∧^L(C^d)` into `(C^d)^{⊗L}`: tuple `i₁<…<i_L` maps to
/// `(1/√L!) Σ_σ sgn(σ) e_{i_σ(1)} ⊗ … ⊗ e_{i_σ(L)}`.
pub fn wedge_isometry(d: usize, l: usize) -> Result<Isometry> {
    if d == 0 || l == 0 || l > d {
        return Err(Error::param(format!(
            "wedge_isometry needs 1 <= L <= d (got d={d}, L={l})"
        )));
    }
    let source = BasisSpec::Wedge { d, l };
    let target = BasisSpec::FullTensor { d, l };
    check_embedding_cap("wedge isometry", target.dim(), source.dim())?;
    let basis = increasing_tuples(d, l);
    let lookup: HashMap<&[usize], usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_slice(), i))
        .collect();
    let norm = 1.0 / (1..=l).map(|k| k as f64).product::<f64>().sqrt();
    let mut matrix = CMatrix::zeros(target.dim(), source.dim());
    for row in 0..target.dim() {
        let digits = multi_index(row, d, l);
        let mut sorted = digits.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let col = lookup[sorted.as_slice()];
        matrix[(row, col)] = c(sorting_sign(&digits) * norm);
    }
    Ok(Isometry {
        source,
        target,
        matrix,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockSector {
    Even,
    Odd,
    Full,
}

/// Occupation bitstrings of `d` modes in the requested parity sector,
/// ascending as unsigned integers (mode 1 = most significant bit).
pub fn fock_basis(d: usize, sector: FockSector) -> Vec<u64> {
    assert!((1..64).contains(&d), "fock_basis supports 1 <= d < 64");
    (0..(1u64 << d))
        .filter(|b| match sector {
            FockSector::Even => b.count_ones() % 2 == 0,
            FockSector::Odd => b.count_ones() % 2 == 1,
            FockSector::Full => true,
        })
        .collect()
}

/// Bitstring rendering with mode 1 first, e.g. `011`.
pub fn format_occupation(bits: u64, d: usize) -> String {
    (0..d)
        .map(|k| {
            if bits >> (d - 1 - k) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Selection isometry of the even-parity sector into the full Fock space.
pub fn fock_even_isometry(d: usize) -> Result<Isometry> {
    if d == 0 {
        return Err(Error::param("Fock space needs d >= 1"));
    }
    let source = BasisSpec::FockEven { d };
    let target = BasisSpec::FockFull { d };
    check_embedding_cap("Fock even-sector isometry", target.dim(), source.dim())?;
    let mut matrix = CMatrix::from_element(target.dim(), source.dim(), ZERO);
    for (col, bits) in fock_basis(d, FockSector::Even).into_iter().enumerate() {
        matrix[(bits as usize, col)] = c(1.0);
    }
    Ok(Isometry {
        source,
        target,
        matrix,
    })
}

/// Embedding of the physical space of `class` into its carrier space;
/// `None` when the physical space already is the full tensor product.
pub fn class_isometry(class: &StateClass) -> Result<Option<Isometry>> {
    let d = class.d();
    let l = class.l();
    match class.kind() {
        ClassKind::Separable => Ok(None),
        ClassKind::Bosonic => sym_isometry(d, l).map(Some),
        ClassKind::Slater => wedge_isometry(d, l).map(Some),
        ClassKind::Gaussian => fock_even_isometry(d).map(Some),
    }
}

/// Tensor product with the first factor most significant.
pub fn kron(a: &LinearOperator, b: &LinearOperator) -> Result<LinearOperator> {
    let n = a.dim() as u128 * b.dim() as u128;
    Limits::default().check_dense("Kronecker product", n, n)?;
    let m = a.to_dense()?.kronecker(&b.to_dense()?);
    Ok(LinearOperator::dense(
        m,
        a.is_hermitian() && b.is_hermitian(),
    ))
}
