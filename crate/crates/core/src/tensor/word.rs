use std::fmt;

/// A word over the alphabet `{1..d}`.
///
/// Letters are stored zero-based (`0..d`); `Display` prints them one-based,
/// so the word with letters `[0, 1]` renders as `12`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    /// Builds a word from one-based letters, e.g. `Word::from_one_based(&[1, 2])`.
    pub fn from_one_based(letters: &[usize]) -> Self {
        Word(
            letters
                .iter()
                .map(|&l| {
                    assert!(l >= 1, "one-based letters start at 1");
                    u8::try_from(l - 1).expect("alphabet larger than 256")
                })
                .collect(),
        )
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of this word among all words of the same length in
    /// lexicographic order, i.e. its base-`d` value.
    pub fn rank(&self, dim: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * dim + l as usize)
    }

    /// Inverse of [`Word::rank`].
    pub fn from_rank(mut rank: usize, len: usize, dim: usize) -> Self {
        let mut letters = vec![0u8; len];
        for slot in letters.iter_mut().rev() {
            *slot = (rank % dim) as u8;
            rank /= dim;
        }
        Word(letters)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// True when the word is strictly smaller than each of its proper rotations.
    pub fn is_lyndon(&self) -> bool {
        let n = self.0.len();
        if n == 0 {
            return false;
        }
        (1..n).all(|s| {
            let rotated = self.0[s..].iter().chain(self.0[..s].iter());
            self.0.iter().lt(rotated)
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let wide = self.0.iter().any(|&l| l >= 9);
        for (i, l) in self.0.iter().enumerate() {
            if wide && i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", *l as usize + 1)?;
        }
        Ok(())
    }
}
