use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{TruncatedTensor, Word};

/// Standard bracketing of a Lyndon word.
///
/// `Commutator(left, right)` refers to indices into the owning basis: a
/// Lyndon word `w` of length ≥ 2 factors as `w = uv` with `v` its longest
/// proper Lyndon suffix, and both `u` and `v` are themselves Lyndon words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bracket {
    Letter(u8),
    Commutator(usize, usize),
}

/// Lyndon words of length `1..=depth` over `{1..dim}` with their standard
/// bracketings and tensor expansions.
///
/// Words are ordered by length, then lexicographically.
#[derive(Debug)]
pub struct LyndonBasis {
    dim: usize,
    depth: usize,
    words: Vec<Word>,
    brackets: Vec<Bracket>,
    /// Tensor expansion of each bracketed word: (rank within its level, coefficient).
    expansions: Vec<Vec<(usize, i64)>>,
    /// `level_starts[k]..level_starts[k + 1]` indexes the words of length `k + 1`.
    level_starts: Vec<usize>,
    /// Strictly lower part of the triangular change of basis: for word `u`,
    /// the pairs `(w, <P(w), u>)` with `w < u` of the same length.
    lower: Vec<Vec<(usize, i64)>>,
}

/// Generates all Lyndon words of length `1..=max_len` over `{0..dim-1}` in
/// lexicographic order (Duval's algorithm).
fn duval(dim: usize, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if dim == 0 || max_len == 0 {
        return out;
    }
    let top = (dim - 1) as u8;
    let mut w: Vec<u8> = vec![0];
    loop {
        out.push(Word::new(w.clone()));
        let n = w.len();
        while w.len() < max_len {
            let c = w[w.len() - n];
            w.push(c);
        }
        while w.last() == Some(&top) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

impl LyndonBasis {
    pub fn new(dim: usize, depth: usize) -> Self {
        assert!(dim >= 1 && depth >= 1, "Lyndon basis needs d >= 1 and m >= 1");
        let mut words = duval(dim, depth);
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index: HashMap<Word, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        let mut brackets = Vec::with_capacity(words.len());
        for w in &words {
            if w.len() == 1 {
                brackets.push(Bracket::Letter(w.letters()[0]));
                continue;
            }
            // longest proper suffix that is Lyndon
            let letters = w.letters();
            let split = (1..letters.len())
                .find(|&s| Word::new(letters[s..].to_vec()).is_lyndon())
                .expect("a Lyndon word of length >= 2 has a proper Lyndon suffix");
            let left = index[&Word::new(letters[..split].to_vec())];
            let right = index[&Word::new(letters[split..].to_vec())];
            brackets.push(Bracket::Commutator(left, right));
        }

        // Expansions as sparse maps word -> integer coefficient.
        let mut maps: Vec<BTreeMap<Word, i64>> = Vec::with_capacity(words.len());
        for (i, b) in brackets.iter().enumerate() {
            let map = match *b {
                Bracket::Letter(_) => BTreeMap::from([(words[i].clone(), 1)]),
                Bracket::Commutator(l, r) => {
                    let mut m = BTreeMap::new();
                    for (u, &cu) in &maps[l] {
                        for (v, &cv) in &maps[r] {
                            *m.entry(u.concat(v)).or_insert(0) += cu * cv;
                            *m.entry(v.concat(u)).or_insert(0) -= cu * cv;
                        }
                    }
                    m.retain(|_, c| *c != 0);
                    m
                }
            };
            maps.push(map);
        }

        let mut level_starts = vec![0usize; depth + 1];
        for k in 1..=depth {
            level_starts[k] = level_starts[k - 1] + words.iter().filter(|w| w.len() == k).count();
        }

        let mut lower = vec![Vec::new(); words.len()];
        for (wi, map) in maps.iter().enumerate() {
            for (u, &c) in map {
                if let Some(&ui) = index.get(u) {
                    if ui != wi {
                        debug_assert!(ui > wi, "expansion must be triangular");
                        lower[ui].push((wi, c));
                    } else {
                        debug_assert_eq!(c, 1, "leading coefficient must be 1");
                    }
                }
            }
        }

        let expansions = maps
            .iter()
            .map(|m| m.iter().map(|(u, &c)| (u.rank(dim), c)).collect())
            .collect();

        LyndonBasis {
            dim,
            depth,
            words,
            brackets,
            expansions,
            level_starts,
            lower,
        }
    }

    /// Process-wide cached basis for `(dim, depth)`.
    pub fn shared(dim: usize, depth: usize) -> Arc<LyndonBasis> {
        static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<LyndonBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(b) = cache.read().expect("basis cache poisoned").get(&(dim, depth)) {
            return Arc::clone(b);
        }
        let mut guard = cache.write().expect("basis cache poisoned");
        Arc::clone(
            guard
                .entry((dim, depth))
                .or_insert_with(|| Arc::new(LyndonBasis::new(dim, depth))),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    /// Indices of the words of length `k`.
    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        assert!((1..=self.depth).contains(&k));
        self.level_starts[k - 1]..self.level_starts[k]
    }

    /// Non-zero tensor coordinates of the bracketed word at `index`, as
    /// (rank within level `|w|`, coefficient).
    pub fn expansion(&self, index: usize) -> &[(usize, i64)] {
        &self.expansions[index]
    }

    pub fn count_per_level(&self) -> Vec<usize> {
        (1..=self.depth).map(|k| self.level_range(k).len()).collect()
    }

    /// Expands Lyndon coordinates into tensor coordinates (zero constant term).
    pub fn expand<T: Scalar>(&self, coeffs: &[T]) -> TruncatedTensor<T> {
        assert_eq!(coeffs.len(), self.len());
        let mut t = TruncatedTensor::zeros(self.dim, self.depth);
        for (i, &c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let level = t.level_mut(self.words[i].len());
            for &(rank, e) in &self.expansions[i] {
                level[rank] += c * T::lit(e as f64);
            }
        }
        t
    }

    /// Solves for Lyndon coordinates of a Lie tensor by forward substitution
    /// on the unit lower-triangular change of basis.
    ///
    /// Only the coordinates of `t` at Lyndon words are read; the result is
    /// meaningful when `t` lies in the free Lie algebra.
    pub fn project<T: Scalar>(&self, t: &TruncatedTensor<T>) -> Result<Vec<T>> {
        if t.dim() != self.dim || t.depth() != self.depth {
            return Err(Error::mismatch(format!(
                "basis (d={}, m={}) vs tensor (d={}, m={})",
                self.dim,
                self.depth,
                t.dim(),
                t.depth()
            )));
        }
        let mut out = vec![T::zero(); self.len()];
        for (u, word) in self.words.iter().enumerate() {
            let mut c = t.get(word);
            for &(w, coef) in &self.lower[u] {
                c -= out[w] * T::lit(coef as f64);
            }
            out[u] = c;
        }
        Ok(out)
    }
}

/// Element of the free Lie algebra in Lyndon coordinates.
#[derive(Clone, Debug)]
pub struct LieElement<T = f64> {
    basis: Arc<LyndonBasis>,
    coeffs: Vec<T>,
}

impl<T: Scalar> LieElement<T> {
    pub fn new(basis: Arc<LyndonBasis>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::mismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(LieElement { basis, coeffs })
    }

    pub fn from_tensor(basis: Arc<LyndonBasis>, t: &TruncatedTensor<T>) -> Result<Self> {
        let coeffs = basis.project(t)?;
        Ok(LieElement { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<LyndonBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn get(&self, word: &Word) -> Option<T> {
        self.basis
            .words()
            .iter()
            .position(|w| w == word)
            .map(|i| self.coeffs[i])
    }

    pub fn to_tensor(&self) -> TruncatedTensor<T> {
        self.basis.expand(&self.coeffs)
    }
}

/// All Lyndon words of length `1..=max_len` over `{1..dim}` with bracketings.
pub fn enumerate_lyndon(dim: usize, max_len: usize) -> Arc<LyndonBasis> {
    LyndonBasis::shared(dim, max_len)
}
