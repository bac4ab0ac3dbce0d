//! Linear combinations of tensor-factor permutations, applied matrix-free.
//!
//! A permutation `σ` of `n` factors acts by moving factor `k` to position
//! `σ[k]`: `P_σ (e_{i₀} ⊗ … ⊗ e_{i_{n-1}}) = e_{j₀} ⊗ … ⊗ e_{j_{n-1}}` with
//! `j_{σ[k]} = i_k`. Under this convention `P_σ P_π = P_{σ∘π}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, Limits, ZERO};

/// Coefficients below this are dropped when merging terms.
const MERGE_EPS: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Character {
    Sym,
    Asym,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PermutationTerm {
    pub coeff: f64,
    pub perm: Vec<usize>,
}

/// `Σ_t coeff_t · P_{σ_t}` on `(C^local_dim)^{⊗factors}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationSum {
    local_dim: usize,
    factors: usize,
    terms: Vec<PermutationTerm>,
}

pub fn identity_perm(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// `σ ∘ π`: apply `π` first.
pub fn compose_perms(sigma: &[usize], pi: &[usize]) -> Vec<usize> {
    pi.iter().map(|&p| sigma[p]).collect()
}

pub fn perm_sign(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1.0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// All permutations of `items`, lexicographic in the input order.
pub fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    fn rec(pool: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pool.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..pool.len() {
            let x = pool.remove(i);
            cur.push(x);
            rec(pool, cur, out);
            cur.pop();
            pool.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut items.to_vec(), &mut Vec::new(), &mut out);
    out
}

impl PermutationSum {
    pub fn new(local_dim: usize, factors: usize, terms: Vec<PermutationTerm>) -> Result<Self> {
        if local_dim == 0 || factors == 0 {
            return Err(Error::param(
                "permutation sum needs local_dim >= 1 and factors >= 1",
            ));
        }
        for t in &terms {
            let mut sorted = t.perm.clone();
            sorted.sort_unstable();
            if sorted != identity_perm(factors) {
                return Err(Error::param(format!(
                    "{:?} is not a permutation of {factors} factors",
                    t.perm
                )));
            }
        }
        Ok(PermutationSum {
            local_dim,
            factors,
            terms,
        }
        .merged())
    }

    pub fn identity(local_dim: usize, factors: usize) -> Self {
        PermutationSum {
            local_dim,
            factors,
            terms: vec![PermutationTerm {
                coeff: 1.0,
                perm: identity_perm(factors),
            }],
        }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn terms(&self) -> &[PermutationTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.factors as u32)
    }

    fn merged(self) -> Self {
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for t in self.terms {
            *acc.entry(t.perm).or_insert(0.0) += t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.abs() > MERGE_EPS)
            .map(|(perm, coeff)| PermutationTerm { coeff, perm })
            .collect();
        PermutationSum { terms, ..self }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PermutationTerm {
                coeff: t.coeff * factor,
                perm: t.perm.clone(),
            })
            .collect();
        PermutationSum { terms, ..*self }.merged()
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(PermutationSum { terms, ..*self }.merged())
    }

    /// Operator product `self · other` (`other` acts first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(PermutationTerm {
                    coeff: a.coeff * b.coeff,
                    perm: compose_perms(&a.perm, &b.perm),
                });
            }
        }
        Ok(PermutationSum { terms, ..*self }.merged())
    }

    /// Term-wise adjoint: `P_σ† = P_{σ⁻¹}`.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut inv = vec![0; t.perm.len()];
                for (k, &p) in t.perm.iter().enumerate() {
                    inv[p] = k;
                }
                PermutationTerm {
                    coeff: t.coeff,
                    perm: inv,
                }
            })
            .collect();
        PermutationSum { terms, ..*self }.merged()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.local_dim != other.local_dim || self.factors != other.factors {
            return Err(Error::param(format!(
                "incompatible permutation sums: ({}, {}) vs ({}, {})",
                self.local_dim, self.factors, other.local_dim, other.factors
            )));
        }
        Ok(())
    }

    /// Output-index weight of each input factor, per term.
    fn strides(&self) -> Vec<Vec<usize>> {
        let n = self.factors;
        let place: Vec<usize> = (0..n)
            .map(|pos| self.local_dim.pow((n - 1 - pos) as u32))
            .collect();
        self.terms
            .iter()
            .map(|t| t.perm.iter().map(|&target| place[target]).collect())
            .collect()
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        let dim = self.dim();
        Error::check_dim(dim, v.len())?;
        let strides = self.strides();
        let mut out = CVector::from_element(dim, ZERO);
        let mut digits = vec![0usize; self.factors];
        for (i, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let mut rest = i;
            for slot in digits.iter_mut().rev() {
                *slot = rest % self.local_dim;
                rest /= self.local_dim;
            }
            for (t, w) in self.terms.iter().zip(&strides) {
                let j: usize = digits.iter().zip(w).map(|(a, b)| a * b).sum();
                out[j] += x * t.coeff;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let dim = self.dim();
        Limits::default().check_dense("dense permutation sum", dim as u128, dim as u128)?;
        let strides = self.strides();
        let mut m = CMatrix::from_element(dim, dim, ZERO);
        let mut digits = vec![0usize; self.factors];
        for i in 0..dim {
            let mut rest = i;
            for slot in digits.iter_mut().rev() {
                *slot = rest % self.local_dim;
                rest /= self.local_dim;
            }
            for (t, w) in self.terms.iter().zip(&strides) {
                let j: usize = digits.iter().zip(w).map(|(a, b)| a * b).sum();
                m[(j, i)] += c(t.coeff);
            }
        }
        Ok(m)
    }
}

/// `(I + τ)/2` on `C^n ⊗ C^n`.
pub fn sym2_sum(n: usize) -> PermutationSum {
    PermutationSum {
        local_dim: n,
        factors: 2,
        terms: vec![
            PermutationTerm {
                coeff: 0.5,
                perm: vec![0, 1],
            },
            PermutationTerm {
                coeff: 0.5,
                perm: vec![1, 0],
            },
        ],
    }
}

/// `(I − τ)/2` on `C^n ⊗ C^n`.
pub fn asym2_sum(n: usize) -> PermutationSum {
    PermutationSum {
        local_dim: n,
        factors: 2,
        terms: vec![
            PermutationTerm {
                coeff: 0.5,
                perm: vec![0, 1],
            },
            PermutationTerm {
                coeff: -0.5,
                perm: vec![1, 0],
            },
        ],
    }
}

/// Transposition of factors `a` and `b` (0-based) among `n`.
pub fn transposition(n: usize, a: usize, b: usize) -> Vec<usize> {
    let mut p = identity_perm(n);
    p.swap(a, b);
    p
}

/// `P⁺_{ii'} = (I + SWAP_{i,i'})/2` on the `2L` factors `1..L, 1'..L'`;
/// `pair` is 0-based, so the primed partner sits at `L + pair`.
pub fn pair_symmetrizer_sum(d: usize, l: usize, pair: usize) -> Result<PermutationSum> {
    if pair >= l {
        return Err(Error::param(format!(
            "pair index {} out of range 1..={l}",
            pair + 1
        )));
    }
    let n = 2 * l;
    PermutationSum::new(
        d,
        n,
        vec![
            PermutationTerm {
                coeff: 0.5,
                perm: identity_perm(n),
            },
            PermutationTerm {
                coeff: 0.5,
                perm: transposition(n, pair, l + pair),
            },
        ],
    )
}

/// `P⁺_{11'} ∘ P⁺_{22'} ∘ … ∘ P⁺_{LL'}`.
pub fn pair_product_sum(d: usize, l: usize) -> Result<PermutationSum> {
    let mut acc = PermutationSum::identity(d, 2 * l);
    for pair in 0..l {
        acc = acc.compose(&pair_symmetrizer_sum(d, l, pair)?)?;
    }
    Ok(acc)
}

/// `(1/k!) Σ_σ [sgn σ] P_σ` over permutations of the 0-based factor set
/// `block` among `factors`.
pub fn block_symmetrizer_sum(
    d: usize,
    factors: usize,
    block: &[usize],
    character: Character,
) -> Result<PermutationSum> {
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != block.len() || sorted.iter().any(|&k| k >= factors) || block.is_empty() {
        return Err(Error::param(format!(
            "invalid factor block {block:?} for {factors} factors"
        )));
    }
    let arrangements = permutations_of(&sorted);
    let norm = 1.0 / arrangements.len() as f64;
    let terms = arrangements
        .into_iter()
        .map(|image| {
            let mut perm = identity_perm(factors);
            for (&from, &to) in sorted.iter().zip(&image) {
                perm[from] = to;
            }
            let sign = match character {
                Character::Sym => 1.0,
                Character::Asym => perm_sign(&perm),
            };
            PermutationTerm {
                coeff: sign * norm,
                perm,
            }
        })
        .collect();
    PermutationSum::new(d, factors, terms)
}

/// Swap of the two copies `(1..L) ↔ (1'..L')`.
pub fn copy_swap(l: usize) -> Vec<usize> {
    (0..2 * l)
        .map(|k| if k < l { k + l } else { k - l })
        .collect()
}
