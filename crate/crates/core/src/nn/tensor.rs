use rand::Rng;

use crate::error::{dim_check, Error, Result};

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2 {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        dim_check(data.len() == rows * cols, || {
            format!("{} values for a {rows}×{cols} tensor", data.len())
        })?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("tensor entries must be finite".into()));
        }
        Ok(Tensor2 { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        dim_check(rows.iter().all(|r| r.len() == cols), || {
            "ragged rows".to_string()
        })?;
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.set(i, i, 1.0);
        }
        t
    }

    /// Entries drawn from `U(-bound, bound)`.
    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| {
                if bound > 0.0 {
                    rng.gen_range(-bound..bound)
                } else {
                    0.0
                }
            })
            .collect();
        Tensor2 { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Tensor2 {
        let mut t = Tensor2::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Tensor2) -> Result<Tensor2> {
        dim_check(self.cols == other.rows, || {
            format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )
        })?;
        let mut out = Tensor2::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `x·W` for a row vector `x`.
    pub fn vecmul(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (k, &a) in x.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.row(k)) {
                *o += a * b;
            }
        }
        out
    }

    /// `W·y` (the transpose product used in backward passes).
    pub fn mul_transposed(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self += x ⊗ y`.
    pub fn add_outer(&mut self, x: &[f64], y: &[f64]) {
        debug_assert_eq!((x.len(), y.len()), (self.rows, self.cols));
        for (r, &a) in x.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, b) in self.row_mut(r).iter_mut().zip(y) {
                *o += a * b;
            }
        }
    }
}

/// A borrowed view of one trainable tensor.
#[derive(Debug, Clone)]
pub struct NamedTensor<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: &'a [f64],
}

/// Anything holding trainable tensors in a fixed order.
///
/// `collect` and `collect_mut` must visit the same tensors in the same order;
/// everything else (flattening, gradient accumulation, checkpointing) is
/// derived from that.
pub trait Parameterized: Clone {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>);
    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>);

    fn named_tensors(&self) -> Vec<NamedTensor<'_>> {
        let mut out = Vec::new();
        self.collect("", &mut out);
        out
    }

    fn parameter_count(&self) -> usize {
        self.named_tensors().iter().map(|t| t.values.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        self.named_tensors()
            .iter()
            .flat_map(|t| t.values.iter().copied())
            .collect()
    }

    fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        let mut slots = Vec::new();
        self.collect_mut(&mut slots);
        let total: usize = slots.iter().map(|s| s.len()).sum();
        dim_check(total == flat.len(), || {
            format!("{} values for {total} parameters", flat.len())
        })?;
        let mut offset = 0;
        for s in slots {
            let n = s.len();
            s.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        let mut slots = Vec::new();
        z.collect_mut(&mut slots);
        for s in slots {
            s.fill(0.0);
        }
        z
    }

    /// `self += scale · other`, tensor by tensor.
    fn accumulate(&mut self, other: &Self, scale: f64) {
        let theirs = other.flatten();
        let mut slots = Vec::new();
        self.collect_mut(&mut slots);
        let mut offset = 0;
        for s in slots {
            for v in s.iter_mut() {
                *v += scale * theirs[offset];
                offset += 1;
            }
        }
    }
}

pub(crate) fn join_name(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

impl Parameterized for Tensor2 {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        out.push(NamedTensor {
            name: prefix.to_string(),
            shape: vec![self.rows, self.cols],
            values: &self.data,
        });
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        out.push(&mut self.data);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose() {
        let a = Tensor2::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Tensor2::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_rows(), vec![vec![2.0, 1.0], vec![4.0, 3.0]]);
        assert_eq!(
            a.transpose().to_rows(),
            vec![vec![1.0, 3.0], vec![2.0, 4.0]]
        );
        assert_eq!(a.vecmul(&[1.0, 1.0]), vec![4.0, 6.0]);
        assert_eq!(a.mul_transposed(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert!(a.matmul(&Tensor2::zeros(3, 1)).is_err());
    }

    #[test]
    fn construction_checks() {
        assert!(Tensor2::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Tensor2::from_vec(1, 1, vec![f64::INFINITY]).is_err());
        assert!(Tensor2::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn flatten_assign_accumulate() {
        let mut t = Tensor2::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(t.parameter_count(), 2);
        t.assign_flat(&[5.0, 6.0]).unwrap();
        assert_eq!(t.flatten(), vec![5.0, 6.0]);
        let z = t.zeros_like();
        assert_eq!(z.flatten(), vec![0.0, 0.0]);
        t.accumulate(&t.clone(), 0.5);
        assert_eq!(t.flatten(), vec![7.5, 9.0]);
        assert!(t.assign_flat(&[1.0]).is_err());
    }
}
