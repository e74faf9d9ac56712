//! Lazy Gaussian tensors, materialized tensors, prefix views and
//! subtensor selections.
//!
//! All indices are 1-based: a tensor of side `n` and order `p` is addressed
//! by tuples in `[1, n]^p`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::stats::ExactSum;

/// Read access to an order-`p`, side-`n` real tensor.
pub trait Tensor: Sync {
    /// Side length `n`.
    fn side(&self) -> usize;

    /// Order (rank) `p`.
    fn order(&self) -> usize;

    /// Entry at a 1-based index tuple. Callers guarantee the tuple is in
    /// range; use [`Tensor::entry`] for checked access.
    fn value(&self, idx: &[usize]) -> f64;

    /// Checked entry access.
    fn entry(&self, idx: &[usize]) -> Result<f64> {
        check_index(idx, self.side(), self.order())?;
        Ok(self.value(idx))
    }
}

impl<T: Tensor + ?Sized> Tensor for &T {
    fn side(&self) -> usize {
        (**self).side()
    }
    fn order(&self) -> usize {
        (**self).order()
    }
    fn value(&self, idx: &[usize]) -> f64 {
        (**self).value(idx)
    }
    fn entry(&self, idx: &[usize]) -> Result<f64> {
        (**self).entry(idx)
    }
}

pub(crate) fn check_index(idx: &[usize], n: usize, p: usize) -> Result<()> {
    if idx.len() != p {
        return Err(Error::InvalidDimension(format!(
            "index tuple has {} coordinates, tensor order is {p}",
            idx.len()
        )));
    }
    for (c, &i) in idx.iter().enumerate() {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange {
                coordinate: c + 1,
                index: i,
                bound: n,
            });
        }
    }
    Ok(())
}

fn check_dims(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidDimension(format!(
            "side and order must be positive (n = {n}, p = {p})"
        )));
    }
    Ok(())
}

/// Deterministic lazy source of i.i.d. standard normal entries.
///
/// `entry(idx)` hashes `(stream_key, idx)` with Philox4x64-10 into two
/// uniform words and maps them through Box–Muller. No storage is allocated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussianSource {
    n: usize,
    p: usize,
    key: StreamKey,
}

impl GaussianSource {
    pub fn new(n: usize, p: usize, key: StreamKey) -> Result<Self> {
        check_dims(n, p)?;
        Ok(GaussianSource { n, p, key })
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// Copies all `n^p` entries into a dense tensor.
    pub fn materialize(&self) -> Result<DenseTensor> {
        DenseTensor::from_fn(self.n, self.p, |idx| self.value(idx))
    }
}

/// Convenience constructor mirroring [`GaussianSource::new`].
pub fn make_source(n: usize, p: usize, key: StreamKey) -> Result<GaussianSource> {
    GaussianSource::new(n, p, key)
}

impl Tensor for GaussianSource {
    fn side(&self) -> usize {
        self.n
    }
    fn order(&self) -> usize {
        self.p
    }
    #[inline]
    fn value(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.p);
        self.key.normal_at(idx)
    }
}

/// Materialized tensor stored in lexicographic (row-major) order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

fn dense_len(n: usize, p: usize) -> Result<usize> {
    u32::try_from(p)
        .ok()
        .and_then(|p| n.checked_pow(p))
        .ok_or_else(|| Error::Capacity(format!("{n}^{p} entries do not fit in memory")))
}

impl DenseTensor {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(n, p)?;
        let len = dense_len(n, p)?;
        if data.len() != len {
            return Err(Error::InvalidDimension(format!(
                "expected {len} entries for n = {n}, p = {p}, got {}",
                data.len()
            )));
        }
        Ok(DenseTensor { n, p, data })
    }

    /// Builds a tensor by evaluating `f` at every 1-based index tuple in
    /// lexicographic order.
    pub fn from_fn(n: usize, p: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_dims(n, p)?;
        let len = dense_len(n, p)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![1usize; p];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, n);
        }
        Ok(DenseTensor { n, p, data })
    }

    /// Square matrix from row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidDimension(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
        DenseTensor::new(n, 2, rows.concat())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + (i - 1))
    }
}

/// Advances a 1-based index tuple in lexicographic order (last coordinate
/// fastest). Wraps to all ones after the final tuple.
fn advance(idx: &mut [usize], n: usize) {
    for c in (0..idx.len()).rev() {
        if idx[c] < n {
            idx[c] += 1;
            return;
        }
        idx[c] = 1;
    }
}

impl Tensor for DenseTensor {
    fn side(&self) -> usize {
        self.n
    }
    fn order(&self) -> usize {
        self.p
    }
    #[inline]
    fn value(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }
}

/// Tensor with every entry equal to one value. Useful as a test stub.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantTensor {
    pub n: usize,
    pub p: usize,
    pub fill: f64,
}

impl ConstantTensor {
    pub fn new(n: usize, p: usize, fill: f64) -> Result<Self> {
        check_dims(n, p)?;
        Ok(ConstantTensor { n, p, fill })
    }
}

impl Tensor for ConstantTensor {
    fn side(&self) -> usize {
        self.n
    }
    fn order(&self) -> usize {
        self.p
    }
    fn value(&self, _idx: &[usize]) -> f64 {
        self.fill
    }
}

/// The corner `[1, bound]^p` of a tensor. Checked queries outside the
/// corner are rejected; queries inside return the underlying entry.
#[derive(Clone, Copy, Debug)]
pub struct PrefixView<'a, T: ?Sized> {
    inner: &'a T,
    bound: usize,
}

impl<'a, T: Tensor + ?Sized> PrefixView<'a, T> {
    pub fn new(inner: &'a T, bound: usize) -> Result<Self> {
        if bound > inner.side() {
            return Err(Error::InvalidArgument(format!(
                "prefix bound {bound} exceeds side {}",
                inner.side()
            )));
        }
        Ok(PrefixView { inner, bound })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn inner(&self) -> &'a T {
        self.inner
    }
}

/// Bound `⌊s·n/k⌋` of the prefix revealed at online step `s`.
pub fn prefix_bound(s: usize, n: usize, k: usize) -> usize {
    ((s as u128 * n as u128) / k as u128) as usize
}

/// View of the entries revealed at online step `s` of `k`.
pub fn prefix<T: Tensor + ?Sized>(src: &T, s: usize, k: usize) -> Result<PrefixView<'_, T>> {
    if s == 0 || s > k {
        return Err(Error::InvalidArgument(format!(
            "prefix step {s} outside [1, {k}]"
        )));
    }
    PrefixView::new(src, prefix_bound(s, src.side(), k))
}

impl<T: Tensor + ?Sized> Tensor for PrefixView<'_, T> {
    fn side(&self) -> usize {
        self.inner.side()
    }
    fn order(&self) -> usize {
        self.inner.order()
    }
    fn value(&self, idx: &[usize]) -> f64 {
        self.inner.value(idx)
    }
    fn entry(&self, idx: &[usize]) -> Result<f64> {
        check_index(idx, self.bound, self.inner.order())?;
        Ok(self.inner.value(idx))
    }
}

/// An ordered `p`-tuple of `k`-element index sets.
///
/// The stored order of each set is the coordinate embedding of the
/// resulting `k × … × k` subtensor: position `r` of set `s` is output
/// coordinate `r` along axis `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Selection {
    sets: Vec<Vec<usize>>,
}

impl Selection {
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = sets.first() else {
            return Err(Error::InvalidSelection("no index sets".into()));
        };
        let k = first.len();
        if k == 0 {
            return Err(Error::InvalidSelection("index sets are empty".into()));
        }
        for (s, set) in sets.iter().enumerate() {
            if set.len() != k {
                return Err(Error::InvalidSelection(format!(
                    "set {} has {} indices, expected {k}",
                    s + 1,
                    set.len()
                )));
            }
            let mut sorted = set.clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidSelection(format!(
                    "index {} repeated in set {}",
                    w[0],
                    s + 1
                )));
            }
            if sorted[0] == 0 {
                return Err(Error::InvalidSelection(format!(
                    "index 0 in set {} (indices are 1-based)",
                    s + 1
                )));
            }
        }
        Ok(Selection { sets })
    }

    pub fn k(&self) -> usize {
        self.sets[0].len()
    }

    pub fn order(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, s: usize) -> &[usize] {
        &self.sets[s]
    }

    /// Same sets with each one sorted ascending.
    pub fn sorted(&self) -> Selection {
        let mut sets = self.sets.clone();
        for s in &mut sets {
            s.sort_unstable();
        }
        Selection { sets }
    }

    pub fn validate_for<T: Tensor + ?Sized>(&self, t: &T) -> Result<()> {
        if self.order() != t.order() {
            return Err(Error::InvalidSelection(format!(
                "selection has {} sets, tensor order is {}",
                self.order(),
                t.order()
            )));
        }
        let n = t.side();
        for (s, set) in self.sets.iter().enumerate() {
            if let Some(&i) = set.iter().find(|&&i| i > n) {
                return Err(Error::InvalidSelection(format!(
                    "index {i} in set {} exceeds side {n}",
                    s + 1
                )));
            }
        }
        Ok(())
    }
}

/// Calls `f` on every tuple of the product `sets[0] × … × sets[p-1]`,
/// in lexicographic order of positions. Does nothing if any set is empty.
pub fn for_each_product(sets: &[&[usize]], mut f: impl FnMut(&[usize])) {
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let p = sets.len();
    let mut pos = vec![0usize; p];
    let mut idx: Vec<usize> = sets.iter().map(|s| s[0]).collect();
    loop {
        f(&idx);
        let mut c = p;
        loop {
            if c == 0 {
                return;
            }
            c -= 1;
            pos[c] += 1;
            if pos[c] < sets[c].len() {
                idx[c] = sets[c][pos[c]];
                break;
            }
            pos[c] = 0;
            idx[c] = sets[c][0];
        }
    }
}

/// Sum of the `k^p` entries indexed by a selection.
///
/// Entries are visited in lexicographic order of output coordinates and
/// accumulated with exact rounding, so the result is bit-reproducible.
pub fn sum_subtensor<T: Tensor + ?Sized>(src: &T, sel: &Selection) -> Result<f64> {
    sel.validate_for(src)?;
    let sets: Vec<&[usize]> = sel.sets().iter().map(Vec::as_slice).collect();
    let mut acc = ExactSum::new();
    for_each_product(&sets, |idx| acc.add(src.value(idx)));
    Ok(acc.value())
}

/// Average entry of the selected subtensor.
pub fn ave_subtensor<T: Tensor + ?Sized>(src: &T, sel: &Selection) -> Result<f64> {
    let sum = sum_subtensor(src, sel)?;
    Ok(sum / (sel.k() as f64).powi(sel.order() as i32))
}

/// Block `P_{i,n} = {(i-1)⌊n/k⌋ + 1, …, i⌊n/k⌋}` of the greedy partition.
/// Indices above `k⌊n/k⌋` belong to no block.
pub fn partition_block(i: usize, n: usize, k: usize) -> Result<RangeInclusive<usize>> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "block count k = {k} must lie in [1, n = {n}]"
        )));
    }
    if i == 0 || i > k {
        return Err(Error::InvalidArgument(format!(
            "block index {i} outside [1, {k}]"
        )));
    }
    let w = n / k;
    Ok((i - 1) * w + 1..=i * w)
}
