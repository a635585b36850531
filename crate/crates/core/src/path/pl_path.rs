use std::io::Write;

use crate::error::{Error, Result};
use crate::path::rng::{path_stream, GaussianStream};
use crate::scalar::{Real, Scalar};

/// Piecewise-linear path in `m` channels; channel 0 is time.
#[derive(Debug, Clone, PartialEq)]
pub struct PLPath<S> {
    knots: Vec<S>,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> PLPath<S> {
    /// `values[i]` holds channels `1..=m` at `knots[i]`. Knots start at 0 and
    /// increase strictly; the path starts at the origin.
    pub fn new(knots: Vec<S>, values: Vec<Vec<S>>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidArgument(
                "need at least two knots, one value row per knot".into(),
            ));
        }
        if !knots[0].is_zero() {
            return Err(Error::InvalidArgument("first knot must be 0".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "knots must increase strictly".into(),
            ));
        }
        let m = values[0].len();
        if m == 0 || values.iter().any(|v| v.len() != m) {
            return Err(Error::InvalidArgument(
                "every knot needs the same positive number of channels".into(),
            ));
        }
        if values[0].iter().any(|x| !x.is_zero()) {
            return Err(Error::InvalidArgument("path must start at 0".into()));
        }
        Ok(PLPath { knots, values })
    }

    /// Path on `[0, 1]` with uniform knots and the given increments per interval.
    pub fn from_increments(increments: &[Vec<S>]) -> Result<Self> {
        let n = increments.len();
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one interval".into()));
        }
        let m = increments[0].len();
        let knots = (0..=n).map(|i| S::from_ratio(i as i64, n as i64)).collect();
        let mut values = vec![vec![S::zero(); m]];
        for inc in increments {
            let last = values.last().unwrap();
            let next = last.iter().zip(inc).map(|(&a, &b)| a + b).collect();
            values.push(next);
        }
        PLPath::new(knots, values)
    }

    pub fn channels(&self) -> usize {
        self.values[0].len()
    }

    pub fn num_intervals(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn end_time(&self) -> S {
        *self.knots.last().unwrap()
    }

    /// Channel value at a knot; channel 0 is time.
    pub fn value(&self, knot: usize, channel: usize) -> S {
        if channel == 0 {
            self.knots[knot]
        } else {
            self.values[knot][channel - 1]
        }
    }

    /// Increment of `channel` over interval `i`.
    pub fn increment(&self, i: usize, channel: usize) -> S {
        self.value(i + 1, channel) - self.value(i, channel)
    }

    pub fn interval_of(&self, t: S) -> usize {
        let n = self.num_intervals();
        self.knots[1..n].iter().take_while(|&&k| k <= t).count()
    }

    /// Linear interpolation at time `t`, channels `1..=m`.
    pub fn eval(&self, t: S) -> Vec<S> {
        let i = self.interval_of(t);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let s = (t - a) / (b - a);
        self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(&x, &y)| x + s * (y - x))
            .collect()
    }

    /// The path restricted to knots `i0..=i1`, shifted to start at time 0 and value 0.
    pub fn segment(&self, i0: usize, i1: usize) -> Result<Self> {
        if i1 <= i0 || i1 >= self.knots.len() {
            return Err(Error::InvalidArgument(format!("bad segment {i0}..{i1}")));
        }
        let t0 = self.knots[i0];
        let v0 = &self.values[i0];
        let knots = self.knots[i0..=i1].iter().map(|&t| t - t0).collect();
        let values = self.values[i0..=i1]
            .iter()
            .map(|v| v.iter().zip(v0).map(|(&a, &b)| a - b).collect())
            .collect();
        PLPath::new(knots, values)
    }

    /// Multiply every noise channel by `c` (time untouched).
    pub fn scale_channels(&self, c: S) -> Self {
        let values = self
            .values
            .iter()
            .map(|v| v.iter().map(|&x| x * c).collect())
            .collect();
        PLPath {
            knots: self.knots.clone(),
            values,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.channels()).map(|c| format!("w{c}")));
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for (t, v) in self.knots.iter().zip(&self.values) {
            let mut row = vec![t.to_string()];
            row.extend(v.iter().map(|x| x.to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }
}

impl<S: Real> PLPath<S> {
    /// Brownian rescaling `t ↦ √c · w(t/c)` onto `[0, c·T]`.
    pub fn rescale_time(&self, c: S) -> Self {
        let root = c.sqrt();
        PLPath {
            knots: self.knots.iter().map(|&t| t * c).collect(),
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|&x| x * root).collect())
                .collect(),
        }
    }
}

/// Piecewise-linear interpolant of Brownian motion on `N` uniform intervals of `[0, 1]`.
pub fn sample_brownian<S: Scalar>(m: usize, n: usize, seed: u64) -> PLPath<S> {
    sample_brownian_path(m, n, seed, 0)
}

/// Path number `path` of the family keyed by `seed`; channel `c` draws from
/// stream `(path, c)`, so paths can be generated in any order.
pub fn sample_brownian_path<S: Scalar>(m: usize, n: usize, seed: u64, path: u64) -> PLPath<S> {
    assert!(m >= 1 && n >= 1, "need m >= 1 and N >= 1");
    let sd = (1.0 / n as f64).sqrt();
    let mut streams: Vec<GaussianStream> = (1..=m)
        .map(|c| GaussianStream::new(seed, path_stream(path, c)))
        .collect();
    let increments: Vec<Vec<S>> = (0..n)
        .map(|_| {
            streams
                .iter_mut()
                .map(|g| S::from_f64_approx(sd * g.next_normal()))
                .collect()
        })
        .collect();
    PLPath::from_increments(&increments).expect("valid Brownian path")
}
