//! Multi-index combinatorics: the sets `B_{s,n}`, `Z_{s,n}`, `L_{s,n}` in
//! lexicographic order, the special points `x_mu` and `eta_nu(x)`, shifted
//! bases `x t^mu`, ordered set partitions with profile functions, and a
//! genericity diagnostic over the theta denominators of the formulas.

use rug::Float;

use crate::error::{Error, Result};
use crate::qnum::{theta_with_scale, Complex, PrecisionContext};

/// Which index family a [`MultiIndex`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexKind {
    /// Partitions `s-1 >= l_1 >= ... >= l_n >= 0`, length `n`.
    B,
    /// Compositions of `n` into `s` nonnegative parts, length `s`.
    Z,
    /// Nonnegative vectors of length `s-1` with sum at most `n`.
    L,
}

/// An element of `B_{s,n}`, `Z_{s,n}` or `L_{s,n}`.
///
/// Ordering is lexicographic on the entries: the first differing
/// coordinate decides.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<u32>,
    kind: IndexKind,
}

impl MultiIndex {
    pub fn new(kind: IndexKind, entries: Vec<u32>) -> Self {
        MultiIndex { entries, kind }
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// `n * epsilon_i` in `Z_{s,n}` (1-based `i` would be off by one; `i`
    /// here is 0-based).
    pub fn unit_z(s: usize, i: usize, n: u32) -> Self {
        let mut e = vec![0; s];
        e[i] = n;
        MultiIndex::new(IndexKind::Z, e)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Dimensions, deformation parameter, characters and base points of one
/// problem instance: `s`, `n`, `t`, `a_1..a_{2s+2}` and `x in (C*)^s`.
#[derive(Clone)]
pub struct ParameterSet {
    pub s: usize,
    pub n: usize,
    pub t: Complex,
    pub a: Vec<Complex>,
    pub x: Vec<Complex>,
}

impl ParameterSet {
    pub fn new(s: usize, n: usize, t: Complex, a: Vec<Complex>, x: Vec<Complex>) -> Result<Self> {
        if s < 1 || n < 1 {
            return Err(Error::Domain(format!("s = {s}, n = {n} must be >= 1")));
        }
        if a.len() != 2 * s + 2 {
            return Err(Error::Domain(format!(
                "expected 2s+2 = {} characters, got {}",
                2 * s + 2,
                a.len()
            )));
        }
        if x.len() != s {
            return Err(Error::Domain(format!(
                "expected s = {s} base points, got {}",
                x.len()
            )));
        }
        if t.is_zero() || a.iter().any(Complex::is_zero) || x.iter().any(Complex::is_zero) {
            return Err(Error::ZeroArgument("ParameterSet entries must be nonzero"));
        }
        Ok(ParameterSet { s, n, t, a, x })
    }

    /// Same parameters with a different base point `x`.
    pub fn with_x(&self, x: Vec<Complex>) -> Result<Self> {
        ParameterSet::new(self.s, self.n, self.t.clone(), self.a.clone(), x)
    }

    /// `t^k` for any integer `k`.
    pub fn t_pow(&self, k: i64) -> Complex {
        self.t.pow_i(k)
    }
}

/// All elements of the chosen index set in strictly increasing
/// lexicographic order.
pub fn enumerate(kind: IndexKind, s: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    match kind {
        IndexKind::Z => {
            let mut cur = vec![0u32; s];
            fill_z(&mut out, &mut cur, 0, n as u32);
        }
        IndexKind::B => {
            let mut cur = vec![0u32; n];
            fill_b(&mut out, &mut cur, 0, (s - 1) as u32);
        }
        IndexKind::L => {
            let mut cur = vec![0u32; s.saturating_sub(1)];
            fill_l(&mut out, &mut cur, 0, n as u32);
        }
    }
    out
}

fn fill_z(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, rest: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(MultiIndex::new(IndexKind::Z, cur.clone()));
        return;
    }
    for v in 0..=rest {
        cur[pos] = v;
        fill_z(out, cur, pos + 1, rest - v);
    }
}

fn fill_b(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, max: u32) {
    if pos == cur.len() {
        out.push(MultiIndex::new(IndexKind::B, cur.clone()));
        return;
    }
    for v in 0..=max {
        cur[pos] = v;
        fill_b(out, cur, pos + 1, v);
    }
}

fn fill_l(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, rest: u32) {
    if pos == cur.len() {
        out.push(MultiIndex::new(IndexKind::L, cur.clone()));
        return;
    }
    for v in 0..=rest {
        cur[pos] = v;
        fill_l(out, cur, pos + 1, rest - v);
    }
}

/// Drop the last coordinate: the bijection `Z_{s,n} -> L_{s,n}`.
pub fn z_to_l(mu: &MultiIndex) -> MultiIndex {
    debug_assert_eq!(mu.kind(), IndexKind::Z);
    let mut e = mu.entries().to_vec();
    e.pop();
    MultiIndex::new(IndexKind::L, e)
}

/// Restore the last coordinate from the total `n`: `L_{s,n} -> Z_{s,n}`.
pub fn l_to_z(nu: &MultiIndex, n: usize) -> MultiIndex {
    debug_assert_eq!(nu.kind(), IndexKind::L);
    let mut e = nu.entries().to_vec();
    let partial: u32 = e.iter().sum();
    e.push(n as u32 - partial);
    MultiIndex::new(IndexKind::Z, e)
}

/// The point `x_mu = (x_1, x_1 t, ..., x_1 t^{mu_1 - 1}, x_2, ...)` with
/// `n` coordinates.
pub fn point_x_mu(p: &ParameterSet, mu: &MultiIndex) -> Vec<Complex> {
    debug_assert_eq!(mu.kind(), IndexKind::Z);
    let mut out = Vec::with_capacity(p.n);
    for (i, &m) in mu.entries().iter().enumerate() {
        let mut v = p.x[i].clone();
        for _ in 0..m {
            out.push(v.clone());
            v = &v * &p.t;
        }
    }
    out
}

/// The point `eta_nu(x) = (x_1 t^{nu_1}, ..., x_{s-1} t^{nu_{s-1}})`;
/// independent of the last coordinate of `nu`.
pub fn point_eta(p: &ParameterSet, nu: &MultiIndex) -> Result<Vec<Complex>> {
    if p.s < 2 {
        return Err(Error::Domain("eta_nu(x) needs s >= 2".into()));
    }
    Ok(nu.entries()[..p.s - 1]
        .iter()
        .enumerate()
        .map(|(i, &k)| &p.x[i] * &p.t_pow(k as i64))
        .collect())
}

/// Coordinatewise shift `x t^mu`.
pub fn shift_x(p: &ParameterSet, mu: &[u32]) -> Vec<Complex> {
    p.x.iter()
        .zip(mu)
        .map(|(xi, &m)| xi * &p.t_pow(m as i64))
        .collect()
}

/// One ordered set partition `K_1 # ... # K_s = {1..n}` with
/// `|K_i| = lambda_i`, together with its profile function
/// `profile[k][i] = |K_i intersect {1..k}|` for `k = 0..n`.
///
/// `assignment[k] = i` means `k+1 in K_{i+1}` (both 0-based here).
#[derive(Clone, Debug)]
pub struct SetPartition {
    pub assignment: Vec<usize>,
    pub profile: Vec<Vec<u32>>,
}

impl SetPartition {
    /// The blocks `K_1, ..., K_s` as 0-based position sets.
    pub fn blocks(&self, s: usize) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); s];
        for (k, &i) in self.assignment.iter().enumerate() {
            blocks[i].push(k);
        }
        blocks
    }
}

/// Lazy enumeration, in lexicographic order of the assignment word
/// `(i_1, ..., i_n)`, of all ordered set partitions of `{1..n}` with block
/// sizes given by `lambda`. The number of items is the multinomial
/// `n! / (lambda_1! ... lambda_s!)`.
pub struct SetPartitions {
    lambda: Vec<u32>,
    state: Option<Vec<usize>>,
    n: usize,
}

/// Iterator over the set partitions compatible with `lambda` (kind `Z`).
pub fn enumerate_partitions(lambda: &MultiIndex) -> SetPartitions {
    debug_assert_eq!(lambda.kind(), IndexKind::Z);
    let n = lambda.sum() as usize;
    SetPartitions {
        lambda: lambda.entries().to_vec(),
        state: None,
        n,
    }
}

impl SetPartitions {
    /// Smallest assignment word extending `prefix` given per-block
    /// remaining capacities, or None if impossible.
    fn complete_min(&self, word: &mut Vec<usize>, remaining: &mut [u32]) -> bool {
        while word.len() < self.n {
            match remaining.iter().position(|&r| r > 0) {
                Some(i) => {
                    remaining[i] -= 1;
                    word.push(i);
                }
                None => return false,
            }
        }
        true
    }

    fn first(&self) -> Option<Vec<usize>> {
        let mut rem = self.lambda.clone();
        let mut word = Vec::with_capacity(self.n);
        if self.complete_min(&mut word, &mut rem) {
            Some(word)
        } else {
            None
        }
    }

    fn next_word(&self, prev: &[usize]) -> Option<Vec<usize>> {
        // standard multiset-permutation successor in lex order
        let mut rem = self.lambda.clone();
        for &i in prev {
            rem[i] -= 1;
        }
        let mut word = prev.to_vec();
        loop {
            let last = word.pop()?;
            rem[last] += 1;
            // try to bump the freed position to a larger block with capacity
            if let Some(next) = (last + 1..self.lambda.len()).find(|&i| rem[i] > 0) {
                rem[next] -= 1;
                word.push(next);
                let mut tail_rem = rem.clone();
                let mut out = word;
                if self.complete_min(&mut out, &mut tail_rem) {
                    return Some(out);
                }
                unreachable!("completion after a successful bump always succeeds");
            }
        }
    }

    fn profile_of(&self, word: &[usize]) -> Vec<Vec<u32>> {
        let s = self.lambda.len();
        let mut profile = Vec::with_capacity(self.n + 1);
        let mut cur = vec![0u32; s];
        profile.push(cur.clone());
        for &i in word {
            cur[i] += 1;
            profile.push(cur.clone());
        }
        profile
    }
}

impl Iterator for SetPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<Self::Item> {
        let word = match &self.state {
            None => self.first()?,
            Some(prev) => self.next_word(prev)?,
        };
        self.state = Some(word.clone());
        Some(SetPartition {
            profile: self.profile_of(&word),
            assignment: word,
        })
    }
}

/// Outcome of [`genericity_check`].
#[derive(Clone, Debug)]
pub struct GenericityReport {
    /// Smallest normalized theta magnitude over the checked family.
    pub min_score: f64,
    /// Which factor attained the minimum.
    pub worst: String,
    /// True when `min_score >= delta`.
    pub generic: bool,
}

/// Default genericity threshold.
pub const DEFAULT_GENERICITY: f64 = 1e-20;

/// Scan the finite family of theta factors that appear as denominators in
/// the interpolation, transition and Jackson formulas:
/// `theta(t^m x_i x_j)` and `theta(t^m x_i / x_j)` over the index ranges
/// the formulas use, plus `theta(t^m x_i^2)` (the squared coordinates of
/// the lattice-point family). Each factor is scored by the magnitude of
/// theta at the annulus representative of its argument, normalized by the
/// context-wide bound; small scores flag near-vanishing denominators.
pub fn genericity_check(p: &ParameterSet, delta: f64, ctx: &PrecisionContext) -> GenericityReport {
    let n = p.n as i64;
    let mut min_score = f64::INFINITY;
    let mut worst = String::new();
    let bound = ctx.theta_bound().to_f64();
    let mut consider = |score: Float, label: String| {
        let s = score.to_f64() / bound;
        if s < min_score {
            min_score = s;
            worst = label;
        }
    };
    for i in 0..p.s {
        for j in 0..p.s {
            if j < i {
                continue;
            }
            // products x_i x_j t^m, including i == j (squares)
            for m in -n..=2 * n + 1 {
                let u = &(&p.x[i] * &p.x[j]) * &p.t_pow(m);
                if let Ok((_, mag)) = theta_with_scale(&u, ctx) {
                    consider(mag, format!("theta(t^{m} x_{} x_{})", i + 1, j + 1));
                }
            }
            // ratios x_i / x_j t^m only for distinct coordinates
            if j > i {
                for m in -2 * n..=2 * n {
                    let u = &(&p.x[i] / &p.x[j]) * &p.t_pow(m);
                    if let Ok((_, mag)) = theta_with_scale(&u, ctx) {
                        consider(mag, format!("theta(t^{m} x_{} / x_{})", i + 1, j + 1));
                    }
                }
            }
        }
    }
    GenericityReport {
        generic: min_score >= delta,
        min_score,
        worst,
    }
}

/// Exact binomial coefficient with the conventions used by the closed-form
/// determinant exponents: `binom(m, 0) = 1` for every `m` (including
/// negative), zero whenever `0 <= m < k`.
pub fn binom(m: i64, k: i64) -> i64 {
    if k == 0 {
        return 1;
    }
    if k < 0 || m < k {
        return 0;
    }
    let mut acc: i64 = 1;
    for l in 0..k {
        acc = acc * (m - l) / (l + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(entries: &[u32]) -> MultiIndex {
        MultiIndex::new(IndexKind::Z, entries.to_vec())
    }

    #[test]
    fn enumerate_z_2_2() {
        let got = enumerate(IndexKind::Z, 2, 2);
        let want = vec![z(&[0, 2]), z(&[1, 1]), z(&[2, 0])];
        assert_eq!(got, want);
        assert_eq!(got.len(), 3); // binom(3,2)
    }

    #[test]
    fn enumerate_b_2_2() {
        let got = enumerate(IndexKind::B, 2, 2);
        let want: Vec<_> = [[0, 0], [1, 0], [1, 1]]
            .iter()
            .map(|e| MultiIndex::new(IndexKind::B, e.to_vec()))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn enumerate_z_singleton() {
        for n in 1..5 {
            let got = enumerate(IndexKind::Z, 1, n);
            assert_eq!(got, vec![z(&[n as u32])]);
        }
    }

    #[test]
    fn cardinalities_match_binomial() {
        for s in 1..=6usize {
            for n in 1..=6usize {
                let card = binom((s + n - 1) as i64, n as i64) as usize;
                assert_eq!(enumerate(IndexKind::Z, s, n).len(), card, "Z {s} {n}");
                assert_eq!(enumerate(IndexKind::B, s, n).len(), card, "B {s} {n}");
            }
        }
    }

    #[test]
    fn lex_order_strictly_increasing() {
        let all = enumerate(IndexKind::Z, 3, 3);
        for w in all.windows(2) {
            assert!(w[0] < w[1]);
        }
        let all_b = enumerate(IndexKind::B, 3, 3);
        for w in all_b.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn z_l_roundtrip() {
        assert_eq!(z_to_l(&z(&[2, 1, 0])).entries(), &[2, 1]);
        let l = MultiIndex::new(IndexKind::L, vec![2, 1]);
        assert_eq!(l_to_z(&l, 3), z(&[2, 1, 0]));
        for mu in enumerate(IndexKind::Z, 3, 3) {
            assert_eq!(l_to_z(&z_to_l(&mu), 3), mu);
        }
        // L enumeration matches Z through the bijection
        let ls = enumerate(IndexKind::L, 3, 3);
        assert_eq!(ls.len(), enumerate(IndexKind::Z, 3, 3).len());
    }

    #[test]
    fn partitions_count_and_profile() {
        // lambda = n e_i: single partition
        let only: Vec<_> = enumerate_partitions(&z(&[0, 3])).collect();
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].assignment, vec![1, 1, 1]);

        let two: Vec<_> = enumerate_partitions(&z(&[1, 1])).collect();
        assert_eq!(two.len(), 2);
        // K_1 = {2}, K_2 = {1}: lambda_1^{(1)} = 0, lambda_1^{(2)} = 1
        let second = &two[1];
        assert_eq!(second.assignment, vec![1, 0]);
        assert_eq!(second.profile[1][0], 0);
        assert_eq!(second.profile[2][0], 1);

        // multinomial count 4!/(2!1!1!) = 12
        let many: Vec<_> = enumerate_partitions(&z(&[2, 1, 1])).collect();
        assert_eq!(many.len(), 12);
        // lex order of assignment words
        for w in many.windows(2) {
            assert!(w[0].assignment < w[1].assignment);
        }
        // every profile ends at lambda
        for sp in &many {
            assert_eq!(sp.profile[4], vec![2, 1, 1]);
        }
    }

    #[test]
    fn binom_conventions() {
        assert_eq!(binom(-1, 0), 1);
        assert_eq!(binom(0, 1), 0);
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(3, 3), 1);
        assert_eq!(binom(2, 3), 0);
    }
}
