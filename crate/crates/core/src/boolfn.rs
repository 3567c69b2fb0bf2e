//! Exact analysis of functions on `[k]^R`.
//!
//! Points are indexed base-k little-endian: coordinate 0 is the least
//! significant digit. Influences are exact rationals; the degree-d
//! influence is computed from the Efron–Stein (orthogonal) decomposition,
//! which needs no choice of character basis.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::{self, Rational};
use crate::{Error, Result, DEFAULT_BUDGET};

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// The point set `[k]^R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cube {
    k: usize,
    r: usize,
    size: usize,
}

impl Cube {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        Self::with_budget(k, r, DEFAULT_BUDGET)
    }

    pub fn with_budget(k: usize, r: usize, budget: u64) -> Result<Self> {
        if !(2..=DIGITS.len()).contains(&k) {
            return Err(Error::ParamError(format!("k must lie in 2..=36, got {k}")));
        }
        if r == 0 {
            return Err(Error::ParamError("R must be at least 1".into()));
        }
        let size = checked_pow(k, r)
            .filter(|&s| s <= budget as u128)
            .ok_or_else(|| Error::budget(checked_pow(k, r).unwrap_or(u128::MAX), budget))?;
        Ok(Self { k, r, size: size as usize })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn digit(&self, x: usize, i: usize) -> usize {
        (x / self.k.pow(i as u32)) % self.k
    }

    pub fn digits(&self, mut x: usize) -> Vec<usize> {
        (0..self.r)
            .map(|_| {
                let d = x % self.k;
                x /= self.k;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.k + d)
    }

    /// Coordinatewise `x ⊕ 1` (mod k).
    pub fn shift(&self, x: usize) -> usize {
        let d: Vec<usize> = self.digits(x).into_iter().map(|d| (d + 1) % self.k).collect();
        self.from_digits(&d)
    }

    /// Digit string with coordinate 0 first.
    pub fn format(&self, x: usize) -> String {
        self.digits(x).into_iter().map(|d| DIGITS[d] as char).collect()
    }

    pub fn parse(&self, s: &str) -> Result<usize> {
        if s.len() != self.r {
            return Err(Error::Format(format!("point {s:?} does not have {} digits", self.r)));
        }
        let digits = s
            .bytes()
            .map(|c| {
                DIGITS
                    .iter()
                    .position(|&d| d == c)
                    .filter(|&d| d < self.k)
                    .ok_or_else(|| Error::Format(format!("bad digit in point {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.from_digits(&digits))
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(exp as u32)
}

/// Dense table of a function `[k]^R -> Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFunction {
    cube: Cube,
    values: Vec<Rational>,
}

impl TableFunction {
    pub fn new(k: usize, r: usize, values: Vec<Rational>) -> Result<Self> {
        let cube = Cube::new(k, r)?;
        if values.len() != cube.size() {
            return Err(Error::ParamError(format!("table has {} entries, expected {}", values.len(), cube.size())));
        }
        Ok(Self { cube, values })
    }

    pub fn from_fn(cube: Cube, mut f: impl FnMut(usize) -> Rational) -> Self {
        let values = (0..cube.size()).map(&mut f).collect();
        Self { cube, values }
    }

    pub fn indicator(cube: Cube, mut f: impl FnMut(usize) -> bool) -> Self {
        Self::from_fn(cube, |x| if f(x) { rational::one() } else { rational::zero() })
    }

    pub fn constant(cube: Cube, c: Rational) -> Self {
        Self { cube, values: vec![c; cube.size()] }
    }

    /// Uniformly random 0/1 function, deterministic in `seed`.
    pub fn random_indicator(cube: Cube, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::indicator(cube, |_| rng.gen::<bool>())
    }

    /// 1 iff more than half of the coordinates are nonzero.
    pub fn majority(cube: Cube) -> Self {
        Self::indicator(cube, |x| 2 * cube.digits(x).iter().filter(|&&d| d != 0).count() > cube.r())
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn k(&self) -> usize {
        self.cube.k
    }

    pub fn r(&self) -> usize {
        self.cube.r
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, x: usize) -> &Rational {
        &self.values[x]
    }

    pub fn is_boolean(&self) -> bool {
        self.values.iter().all(|v| v.is_zero() || v.is_one())
    }

    /// `1 - f`.
    pub fn complement(&self) -> Self {
        Self { cube: self.cube, values: self.values.iter().map(|v| rational::one() - v).collect() }
    }

    pub fn mean(&self) -> Rational {
        let sum: Rational = self.values.iter().sum();
        sum / rational::int(self.cube.size as i64)
    }

    fn check_coordinate(&self, i: usize) -> Result<()> {
        if i >= self.cube.r {
            return Err(Error::IndexOutOfRange { index: i, limit: self.cube.r });
        }
        Ok(())
    }
}

/// `f(x) = x_s`, valued in `[k]`.
pub fn make_dictator(k: usize, r: usize, s: usize) -> Result<TableFunction> {
    let cube = Cube::new(k, r)?;
    if s >= r {
        return Err(Error::IndexOutOfRange { index: s, limit: r });
    }
    Ok(TableFunction::from_fn(cube, |x| rational::int(cube.digit(x, s) as i64)))
}

/// `C_{x,S}` (or its shift by one when `shifted`): the points agreeing with
/// `base` outside the coordinates listed in `seq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcube {
    pub base: usize,
    pub seq: Vec<usize>,
    pub shifted: bool,
}

impl Subcube {
    pub fn new(base: usize, seq: Vec<usize>) -> Self {
        Self { base, seq, shifted: false }
    }

    pub fn shifted(mut self) -> Self {
        self.shifted = !self.shifted;
        self
    }
}

pub(crate) fn distinct_mask(seq: &[usize]) -> u64 {
    seq.iter().fold(0u64, |m, &i| m | (1 << i))
}

/// Points of the subcube, in increasing order of the free digits.
pub fn subcube_points(cube: &Cube, c: &Subcube) -> Vec<usize> {
    let digits = cube.digits(c.base);
    let free: Vec<usize> = (0..cube.r).filter(|&i| distinct_mask(&c.seq) >> i & 1 == 1).collect();
    free_points(cube, digits, &free, c.shifted)
}

/// Image of `C_{x,S}` under a coordinate permutation `perm`:
/// `{z : z_j = x_{perm[j]} for every j with perm[j] not in S}`, optionally
/// shifted by one.
pub fn permuted_subcube_points(cube: &Cube, x: usize, seq: &[usize], perm: &[usize], shifted: bool) -> Vec<usize> {
    let xd = cube.digits(x);
    let mask = distinct_mask(seq);
    let base: Vec<usize> = (0..cube.r).map(|j| xd[perm[j]]).collect();
    let free: Vec<usize> = (0..cube.r).filter(|&j| mask >> perm[j] & 1 == 1).collect();
    free_points(cube, base, &free, shifted)
}

fn free_points(cube: &Cube, mut digits: Vec<usize>, free: &[usize], shifted: bool) -> Vec<usize> {
    let count = cube.k.pow(free.len() as u32);
    let mut out = Vec::with_capacity(count);
    for mut a in 0..count {
        for &i in free {
            digits[i] = a % cube.k;
            a /= cube.k;
        }
        let z = if shifted {
            let d: Vec<usize> = digits.iter().map(|d| (d + 1) % cube.k).collect();
            cube.from_digits(&d)
        } else {
            cube.from_digits(&digits)
        };
        out.push(z);
    }
    out
}

/// `Infl_i(f) = E_x[Var(f | x_{-i})]`, computed straight from the definition.
pub fn influence(f: &TableFunction, i: usize) -> Result<Rational> {
    f.check_coordinate(i)?;
    let cube = f.cube;
    let k = rational::int(cube.k as i64);
    let stride = cube.k.pow(i as u32);
    let mut total = rational::zero();
    for x in (0..cube.size).filter(|&x| cube.digit(x, i) == 0) {
        let line: Vec<&Rational> = (0..cube.k).map(|c| &f.values[x + c * stride]).collect();
        let mean: Rational = line.iter().copied().sum::<Rational>() / &k;
        let mean_sq: Rational = line.iter().map(|&v| v * v).sum::<Rational>() / &k;
        total += mean_sq - &mean * &mean;
    }
    Ok(total / rational::int((cube.size / cube.k) as i64))
}

/// Squared norms of the Efron–Stein components `f^{=S}`, indexed by the
/// bitmask of `S`.
///
/// Uses `||f^{=S}||^2 = sum_{T ⊆ S} (-1)^{|S \ T|} ||E[f | x_T]||^2`; the
/// conditional expectations are formed as integer marginal sums after
/// clearing denominators, so everything stays exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfronStein {
    r: usize,
    energies: Vec<Rational>,
}

impl EfronStein {
    pub fn new(f: &TableFunction) -> Result<Self> {
        let cube = f.cube;
        let (k, r) = (cube.k, cube.r);
        if r > 24 {
            return Err(Error::budget(1u128 << r, DEFAULT_BUDGET));
        }
        Error::check_budget(1u128 << r, DEFAULT_BUDGET)?;
        let denom = f.values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<BigInt> = f.values.iter().map(|v| v.numer() * (&denom / v.denom())).collect();

        let mut norms = vec![BigInt::zero(); 1 << r];
        let full = (1usize << r) - 1;
        marginal_norms(k, full, r, scaled, 0, &mut norms);

        // Möbius inversion over the subset lattice.
        for i in 0..r {
            for mask in 0..(1usize << r) {
                if mask >> i & 1 == 1 {
                    let lower = norms[mask ^ (1 << i)].clone();
                    norms[mask] -= lower;
                }
            }
        }
        let scale = Rational::from_integer(&denom * &denom * BigInt::from(k).pow(2 * r as u32));
        let energies = norms.into_iter().map(|n| Rational::from_integer(n) / &scale).collect();
        Ok(Self { r, energies })
    }

    pub fn energy(&self, mask: usize) -> &Rational {
        &self.energies[mask]
    }

    /// `sum_{S ∋ i, |S| <= d} ||f^{=S}||^2`.
    pub fn degree_influence(&self, i: usize, d: usize) -> Result<Rational> {
        if i >= self.r {
            return Err(Error::IndexOutOfRange { index: i, limit: self.r });
        }
        Ok(self
            .energies
            .iter()
            .enumerate()
            .filter(|&(mask, _)| mask >> i & 1 == 1 && (mask.count_ones() as usize) <= d)
            .map(|(_, e)| e)
            .sum())
    }

    pub fn degree_influences(&self, d: usize) -> Vec<Rational> {
        (0..self.r).map(|i| self.degree_influence(i, d).expect("coordinate in range")).collect()
    }
}

/// Visits every subset `T` of the coordinates once; `marg` holds the sums
/// of the scaled table over all coordinates outside `T`, indexed
/// little-endian over the coordinates of `T` in increasing order. Stores
/// `k^{|T|} * sum marg^2`, which is `||E[f | x_T]||^2` up to the common
/// factor `D^2 k^{2R}`.
fn marginal_norms(k: usize, mask: usize, r: usize, marg: Vec<BigInt>, min_remove: usize, out: &mut [BigInt]) {
    let size = mask.count_ones();
    let sq: BigInt = marg.iter().map(|a| a * a).sum();
    out[mask] = sq * BigInt::from(k).pow(size);
    for i in min_remove..r {
        if mask >> i & 1 == 0 {
            continue;
        }
        let pos = (mask & ((1 << i) - 1)).count_ones();
        let stride = k.pow(pos);
        let child_len = marg.len() / k;
        let mut child = vec![BigInt::zero(); child_len];
        for (y, a) in marg.iter().enumerate() {
            let c = (y % stride) + (y / (stride * k)) * stride;
            child[c] += a;
        }
        marginal_norms(k, mask & !(1 << i), r, child, i + 1, out);
    }
}

pub fn degree_influence(f: &TableFunction, i: usize, d: usize) -> Result<Rational> {
    f.check_coordinate(i)?;
    EfronStein::new(f)?.degree_influence(i, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    Exact,
    Sampled { seed: u64, trials: u64 },
}

/// Result of [`subcube_zero_probability`]. In exact mode `value` is the
/// probability; in sampled mode it is the empirical frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcubeStat {
    pub value: Rational,
    pub hits: u128,
    pub total: u128,
    pub exact: bool,
}

/// `Pr_{x,S}[f ≡ target on C_{x,S}]` with `x` uniform on `[k]^R` and `S`
/// uniform on `[R]^{s_len}`.
pub fn subcube_zero_probability(f: &TableFunction, s_len: usize, target: u8, mode: ProbeMode) -> Result<SubcubeStat> {
    if !f.is_boolean() {
        return Err(Error::NonBooleanFunction);
    }
    if s_len == 0 {
        return Err(Error::ParamError("s_len must be at least 1".into()));
    }
    if target > 1 {
        return Err(Error::ParamError("target must be 0 or 1".into()));
    }
    let cube = f.cube;
    let want = rational::int(target as i64);
    let seq_count = checked_pow(cube.r, s_len).ok_or_else(|| Error::budget(u128::MAX, DEFAULT_BUDGET))?;
    match mode {
        ProbeMode::Exact => {
            Error::check_budget(seq_count, DEFAULT_BUDGET)?;
            // Constancy on C_{x,S} only depends on the set of distinct
            // indices in S, so group the sequences by that set.
            let mut by_mask: BTreeMap<u64, u128> = BTreeMap::new();
            let mut seq = vec![0usize; s_len];
            for mut n in 0..seq_count as usize {
                for slot in seq.iter_mut() {
                    *slot = n % cube.r;
                    n /= cube.r;
                }
                *by_mask.entry(distinct_mask(&seq)).or_default() += 1;
            }
            let mut hits: u128 = 0;
            for (&mask, &count) in &by_mask {
                let free: Vec<usize> = (0..cube.r).filter(|&i| mask >> i & 1 == 1).collect();
                let per_class = cube.k.pow(free.len() as u32) as u128;
                for x in (0..cube.size).filter(|&x| free.iter().all(|&i| cube.digit(x, i) == 0)) {
                    let pts = free_points(&cube, cube.digits(x), &free, false);
                    if pts.iter().all(|&z| f.values[z] == want) {
                        hits += per_class * count;
                    }
                }
            }
            let total = cube.size as u128 * seq_count;
            Ok(SubcubeStat { value: frac(hits, total), hits, total, exact: true })
        }
        ProbeMode::Sampled { seed, trials } => {
            if trials == 0 {
                return Err(Error::ParamError("trials must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits: u128 = 0;
            for _ in 0..trials {
                let x = rng.gen_range(0..cube.size);
                let seq: Vec<usize> = (0..s_len).map(|_| rng.gen_range(0..cube.r)).collect();
                let pts = subcube_points(&cube, &Subcube::new(x, seq));
                if pts.iter().all(|&z| f.values[z] == want) {
                    hits += 1;
                }
            }
            Ok(SubcubeStat { value: frac(hits, trials as u128), hits, total: trials as u128, exact: false })
        }
    }
}

/// All sequences in `[r]^len`, first slot varying fastest.
pub(crate) fn sequences(r: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = r.pow(len as u32);
    (0..count).map(move |mut n| {
        (0..len)
            .map(|_| {
                let d = n % r;
                n /= r;
                d
            })
            .collect()
    })
}

pub(crate) fn frac(p: u128, q: u128) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}
