//! Words over `{0, …, m}`, their α-index statistics, the grading table and
//! the graded dilations `T_η`.
//!
//! Letter 0 is the time channel. Coordinates of ℝ^D are laid out in
//! length-major, then lexicographic, word order everywhere in the crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{rational_to, Real};

/// Default cap on the number of enumerated words.
pub const DEFAULT_WORD_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument(
                "word must have at least one letter".into(),
            ));
        }
        Ok(Word(letters))
    }

    pub fn letter(j: usize) -> Self {
        Word(vec![j])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn stats(&self) -> WordStats {
        word_stats(self)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Digits are concatenated when every letter is below 10 (`"10"` is `(1,0)`),
/// otherwise letters are dot-separated.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&l| l < 10) {
            for l in &self.0 {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse word {s:?}"));
        let letters: Vec<usize> = if s.contains('.') {
            s.split('.')
                .map(|p| p.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        Word::new(letters)
    }
}

impl Serialize for Word {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.0.serialize(s)
    }
}

/// α-index: `size/n`, or `+∞` for words made only of time letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Alpha {
    Finite(Rational64),
    Infinite,
}

impl Alpha {
    pub fn finite(self) -> Option<Rational64> {
        match self {
            Alpha::Finite(q) => Some(q),
            Alpha::Infinite => None,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(q) => write!(f, "{q}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordStats {
    pub n: usize,
    pub p: usize,
    pub size: usize,
    pub alpha: Alpha,
}

pub fn word_stats(j: &Word) -> WordStats {
    let p = j.0.iter().filter(|&&l| l == 0).count();
    let n = j.0.len() - p;
    let size = n + 2 * p;
    let alpha = if n == 0 {
        Alpha::Infinite
    } else {
        Alpha::Finite(Rational64::new(size as i64, n as i64))
    };
    WordStats { n, p, size, alpha }
}

/// `γ^α(J) = max(α·n(J) − size(J), 0)`.
pub fn gamma_exponent(alpha_k: Rational64, stats: &WordStats) -> Rational64 {
    let g = alpha_k * Rational64::from_integer(stats.n as i64)
        - Rational64::from_integer(stats.size as i64);
    if g > Rational64::zero() {
        g
    } else {
        Rational64::zero()
    }
}

/// Index arithmetic over all words of length `1..=r` in the fixed order,
/// without materializing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSet {
    m: usize,
    r: usize,
    offsets: Vec<usize>,
}

impl WordSet {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        Self::with_cap(m, r, DEFAULT_WORD_CAP)
    }

    pub fn with_cap(m: usize, r: usize, cap: usize) -> Result<Self> {
        if m < 1 || r < 1 {
            return Err(Error::InvalidArgument(format!(
                "need m >= 1 and r >= 1, got m={m}, r={r}"
            )));
        }
        let base = (m + 1) as u128;
        let mut total: u128 = 0;
        let mut pow: u128 = 1;
        let mut offsets = vec![0usize];
        for _ in 0..r {
            pow = pow.saturating_mul(base);
            total = total.saturating_add(pow);
            if total > cap as u128 {
                let full =
                    (1..=r as u32).fold(0u128, |acc, k| acc.saturating_add(base.saturating_pow(k)));
                return Err(Error::SizeCap {
                    m,
                    r,
                    words: full,
                    cap,
                });
            }
            offsets.push(total as usize);
        }
        Ok(WordSet { m, r, offsets })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.offsets[self.r]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First index of words of length `k`.
    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k - 1]
    }

    pub fn index_of(&self, letters: &[usize]) -> Option<usize> {
        let k = letters.len();
        if k == 0 || k > self.r || letters.iter().any(|&l| l > self.m) {
            return None;
        }
        let local = letters
            .iter()
            .fold(0usize, |acc, &l| acc * (self.m + 1) + l);
        Some(self.offset(k) + local)
    }

    pub fn index(&self, w: &Word) -> Option<usize> {
        self.index_of(w.letters())
    }

    /// Index of `J·j` given the index of `J`.
    pub fn extend_index(&self, idx: usize, j: usize) -> usize {
        let k = self.length_of(idx);
        self.offset(k + 1) + (idx - self.offset(k)) * (self.m + 1) + j
    }

    pub fn length_of(&self, idx: usize) -> usize {
        (1..=self.r)
            .find(|&k| idx < self.offsets[k])
            .expect("word index out of range")
    }

    pub fn word(&self, idx: usize) -> Word {
        let k = self.length_of(idx);
        let mut local = idx - self.offset(k);
        let mut letters = vec![0; k];
        for slot in letters.iter_mut().rev() {
            *slot = local % (self.m + 1);
            local /= self.m + 1;
        }
        Word(letters)
    }

    pub fn iter(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.len()).map(|i| self.word(i))
    }
}

#[derive(Debug, Clone)]
pub struct GradingTable {
    words: WordSet,
    stats: Vec<WordStats>,
    grades: Vec<Rational64>,
    flag_dims: Vec<usize>,
}

pub fn build_grading(m: usize, r: usize) -> Result<GradingTable> {
    GradingTable::with_cap(m, r, DEFAULT_WORD_CAP)
}

impl GradingTable {
    pub fn with_cap(m: usize, r: usize, cap: usize) -> Result<Self> {
        let words = WordSet::with_cap(m, r, cap)?;
        let stats: Vec<WordStats> = words.iter().map(|w| word_stats(&w)).collect();
        let mut alphas: Vec<Rational64> = stats.iter().filter_map(|s| s.alpha.finite()).collect();
        alphas.sort();
        let mut grades: Vec<Rational64> = Vec::new();
        let mut flag_dims = Vec::new();
        for (i, a) in alphas.iter().enumerate() {
            if grades.last() != Some(a) {
                grades.push(*a);
                flag_dims.push(0);
            }
            *flag_dims.last_mut().unwrap() = i + 1;
        }
        Ok(GradingTable {
            words,
            stats,
            grades,
            flag_dims,
        })
    }

    pub fn m(&self) -> usize {
        self.words.m()
    }

    pub fn r(&self) -> usize {
        self.words.r()
    }

    pub fn word_set(&self) -> &WordSet {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn word(&self, idx: usize) -> Word {
        self.words.word(idx)
    }

    pub fn stats(&self) -> &[WordStats] {
        &self.stats
    }

    pub fn grades(&self) -> &[Rational64] {
        &self.grades
    }

    pub fn flag_dims(&self) -> &[usize] {
        &self.flag_dims
    }

    pub fn grade(&self, k: usize) -> Result<Rational64> {
        self.check_grade(k)?;
        Ok(self.grades[k - 1])
    }

    fn check_grade(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.grades.len() {
            Err(Error::GradeOutOfRange {
                k,
                max: self.grades.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `d(α)`: number of words with α-index at most `alpha`.
    pub fn d(&self, alpha: Rational64) -> usize {
        self.grades
            .iter()
            .zip(&self.flag_dims)
            .take_while(|(g, _)| **g <= alpha)
            .last()
            .map_or(0, |(_, d)| *d)
    }

    pub fn gamma(&self, k: usize, idx: usize) -> Result<Rational64> {
        let a = self.grade(k)?;
        Ok(gamma_exponent(a, &self.stats[idx]))
    }

    pub fn gamma_row(&self, k: usize) -> Result<Vec<Rational64>> {
        let a = self.grade(k)?;
        Ok(self.stats.iter().map(|s| gamma_exponent(a, s)).collect())
    }

    /// `T^{α_k}_η`: multiply coordinate `J` by `η^{γ^{α_k}(J)}`.
    pub fn dilate<S: Real>(&self, k: usize, eta: S, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: v.len(),
            });
        }
        if eta <= S::zero() {
            return Err(Error::InvalidArgument(
                "dilation parameter must be positive".into(),
            ));
        }
        let gammas = self.gamma_row(k)?;
        Ok(v.iter()
            .zip(gammas)
            .map(|(&x, g)| {
                if g.is_zero() {
                    x
                } else {
                    x * eta.powf(rational_to::<S>(g))
                }
            })
            .collect())
    }
}

impl Serialize for GradingTable {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let words: Vec<Word> = self.words.iter().collect();
        let grades: Vec<String> = self.grades.iter().map(|g| g.to_string()).collect();
        let gamma: Vec<Vec<String>> = (1..=self.grades.len())
            .map(|k| {
                self.gamma_row(k)
                    .unwrap()
                    .iter()
                    .map(|g| g.to_string())
                    .collect()
            })
            .collect();
        let mut st = s.serialize_struct("GradingTable", 6)?;
        st.serialize_field("m", &self.m())?;
        st.serialize_field("r", &self.r())?;
        st.serialize_field("words", &words)?;
        st.serialize_field("grades", &grades)?;
        st.serialize_field("flag_dims", &self.flag_dims)?;
        st.serialize_field("gamma", &gamma)?;
        st.end()
    }
}

/// Parse `"p/q"` or an integer string into a rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    s.trim()
        .parse::<Rational64>()
        .map_err(|_| Error::InvalidArgument(format!("bad rational {s:?}")))
}

pub fn rational_to_f64(q: Rational64) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn stats_of_small_words() {
        let s = word_stats(&w("1"));
        assert_eq!((s.n, s.p, s.size), (1, 0, 1));
        assert_eq!(s.alpha, Alpha::Finite(Rational64::from_integer(1)));
        let s = word_stats(&w("10"));
        assert_eq!((s.n, s.p, s.size), (1, 1, 3));
        assert_eq!(s.alpha, Alpha::Finite(Rational64::from_integer(3)));
        let s = word_stats(&w("00"));
        assert_eq!((s.n, s.p, s.size, s.alpha), (0, 2, 4, Alpha::Infinite));
    }

    #[test]
    fn word_order_is_length_major() {
        let ws = WordSet::new(1, 2).unwrap();
        let names: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["0", "1", "00", "01", "10", "11"]);
        let mut sorted: Vec<Word> = ws.iter().collect();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, ws.iter().collect::<Vec<_>>());
    }

    #[test]
    fn index_round_trip_and_extension() {
        let ws = WordSet::new(2, 3).unwrap();
        for i in 0..ws.len() {
            assert_eq!(ws.index(&ws.word(i)), Some(i));
        }
        let idx = ws.index(&w("12")).unwrap();
        assert_eq!(ws.word(ws.extend_index(idx, 0)), w("120"));
    }

    #[test]
    fn small_tables() {
        let t = build_grading(1, 2).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(
            t.grades(),
            [Rational64::from_integer(1), Rational64::from_integer(3)]
        );
        assert_eq!(t.flag_dims(), [2, 4]);
        let t = build_grading(1, 1).unwrap();
        assert_eq!((t.len(), t.flag_dims()), (2, &[1usize][..]));
        let t = build_grading(2, 1).unwrap();
        assert_eq!((t.len(), t.flag_dims()), (3, &[2usize][..]));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(build_grading(1, 99), Err(Error::SizeCap { .. })));
        assert!(build_grading(1, 18).is_ok());
    }

    #[test]
    fn dilation_examples() {
        let t = build_grading(1, 2).unwrap();
        let mut v = vec![0.0; 6];
        v[1] = 1.0;
        let out = t.dilate(2, 0.5, &v).unwrap();
        assert_eq!(out[1], 0.25);
        let v: Vec<f64> = (0..6).map(|i| i as f64 + 1.0).collect();
        assert_eq!(t.dilate(1, 0.3, &v).unwrap(), v);
        assert_eq!(t.dilate(2, 1.0, &v).unwrap(), v);
        assert!(matches!(
            t.dilate(3, 0.5, &v),
            Err(Error::GradeOutOfRange { .. })
        ));
        assert!(matches!(
            t.dilate(1, 0.5, &v[..3]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn gamma_serializes_as_strings() {
        let t = build_grading(1, 2).unwrap();
        let js = serde_json::to_value(&t).unwrap();
        assert_eq!(js["grades"], serde_json::json!(["1", "3"]));
        assert_eq!(js["gamma"][1][1], "2");
        assert_eq!(js["words"][4], serde_json::json!([1, 0]));
    }
}
