//! Exact dense linear algebra over prime fields.
//!
//! Everything downstream (equivariant Hom spaces, homology, homotopy
//! systems, Brauer corners) reduces to rank / kernel / solve over `F_p`,
//! so this module is deliberately small and fully deterministic:
//! row-major storage, plain Gaussian elimination, free variables pinned
//! to zero in echelon order.

use std::fmt;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
fn add_m(a: u32, b: u32, p: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn sub_m(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
fn mul_m(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

/// Inverse by Fermat; `a` must be nonzero mod the prime `p`.
fn inv_m(a: u32, p: u32) -> u32 {
    assert!(a % p != 0, "division by zero in F_{}", p);
    let mut result = 1u32;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_m(result, base, p);
        }
        base = mul_m(base, base, p);
        e >>= 1;
    }
    result
}

/// Dense matrix over `F_p`, entries stored row-major as residues in `[0, p)`.
#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        assert!(is_prime(p), "characteristic {} is not prime", p);
        FpMatrix {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(p, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v % p);
            }
        }
        m
    }

    /// Column-major list of entries interpreted as a single column vector.
    pub fn column_vector(p: u32, v: &[u32]) -> Self {
        let mut m = Self::zeros(p, v.len(), 1);
        for (i, &x) in v.iter().enumerate() {
            m.set(i, 0, x % p);
        }
        m
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.cols + j] = v % self.p;
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Row-major flattening; the `vec` used for linearizing matrix equations.
    pub fn flatten(&self) -> Vec<u32> {
        self.entries.clone()
    }

    pub fn from_flat(p: u32, rows: usize, cols: usize, flat: Vec<u32>) -> Self {
        assert_eq!(flat.len(), rows * cols);
        let entries = flat.into_iter().map(|x| x % p).collect();
        FpMatrix {
            p,
            rows,
            cols,
            entries,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols, self.p), (rhs.rows, rhs.cols, rhs.p));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| add_m(a, b, self.p))
            .collect();
        FpMatrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols, self.p), (rhs.rows, rhs.cols, rhs.p));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| sub_m(a, b, self.p))
            .collect();
        FpMatrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(self.p - 1)
    }

    pub fn scale(&self, c: u32) -> Self {
        let c = c % self.p;
        let entries = self.entries.iter().map(|&a| mul_m(a, c, self.p)).collect();
        FpMatrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        assert_eq!(self.p, rhs.p);
        let p = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                let dst = i * rhs.cols;
                let src = k * rhs.cols;
                for j in 0..rhs.cols {
                    let v = (out.entries[dst + j] as u64 + a * rhs.entries[src + j] as u64) % p;
                    out.entries[dst + j] = v as u32;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        let p = self.p as u64;
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u64;
                for j in 0..self.cols {
                    acc = (acc + self.get(i, j) as u64 * v[j] as u64) % p;
                }
                acc as u32
            })
            .collect()
    }

    /// Kronecker product; index order is row-major on pairs, matching the
    /// point order of a product G-set.
    pub fn kron(&self, rhs: &Self) -> Self {
        assert_eq!(self.p, rhs.p);
        let mut out = Self::zeros(self.p, self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        let v = mul_m(a, rhs.get(k, l), self.p);
                        out.set(i * rhs.rows + k, j * rhs.cols + l, v);
                    }
                }
            }
        }
        out
    }

    pub fn hstack(p: u32, blocks: &[&FpMatrix]) -> Self {
        let rows = blocks.first().map(|b| b.rows).unwrap_or(0);
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(p, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            assert_eq!(b.p, p);
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, off + j, b.get(i, j));
                }
            }
            off += b.cols;
        }
        out
    }

    pub fn vstack(p: u32, blocks: &[&FpMatrix]) -> Self {
        let cols = blocks.first().map(|b| b.cols).unwrap_or(0);
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(p, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            for i in 0..b.rows {
                for j in 0..cols {
                    out.set(off + i, j, b.get(i, j));
                }
            }
            off += b.rows;
        }
        out
    }

    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.p, row_idx.len(), col_idx.len());
        for (i, &r) in row_idx.iter().enumerate() {
            for (j, &c) in col_idx.iter().enumerate() {
                out.set(i, j, self.get(r, c));
            }
        }
        out
    }

    fn pack_rows(&self) -> Vec<Vec<u64>> {
        let words = self.cols.div_ceil(64);
        (0..self.rows)
            .map(|i| {
                let mut row = vec![0u64; words];
                for j in 0..self.cols {
                    if self.get(i, j) != 0 {
                        row[j / 64] |= 1 << (j % 64);
                    }
                }
                row
            })
            .collect()
    }

    /// Bit-packed elimination for characteristic 2; returns packed reduced
    /// rows and pivot columns. `reduce_up` selects full reduction.
    fn packed_eliminate(&self, reduce_up: bool) -> (Vec<Vec<u64>>, Vec<usize>) {
        let mut rows = self.pack_rows();
        let nrows = rows.len();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for j in 0..self.cols {
            if r >= nrows {
                break;
            }
            let w = j / 64;
            let bit = 1u64 << (j % 64);
            let mut pr = None;
            for i in r..nrows {
                if rows[i][w] & bit != 0 {
                    pr = Some(i);
                    break;
                }
            }
            let Some(pr) = pr else { continue };
            rows.swap(r, pr);
            let pivot_row = rows[r].clone();
            let lo = if reduce_up { 0 } else { r + 1 };
            for (i, row) in rows.iter_mut().enumerate().skip(lo) {
                if i != r && row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(j);
            r += 1;
        }
        (rows, pivots)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        if self.p == 2 {
            let (rows, pivots) = self.packed_eliminate(true);
            let mut m = Self::zeros(2, self.rows, self.cols);
            for (i, row) in rows.iter().enumerate() {
                for j in 0..self.cols {
                    if row[j / 64] >> (j % 64) & 1 == 1 {
                        m.set(i, j, 1);
                    }
                }
            }
            return (m, pivots);
        }
        let mut m = self.clone();
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for j in 0..m.cols {
            if r >= m.rows {
                break;
            }
            let mut pr = None;
            for i in r..m.rows {
                if m.get(i, j) != 0 {
                    pr = Some(i);
                    break;
                }
            }
            let Some(pr) = pr else { continue };
            if pr != r {
                for c in 0..m.cols {
                    let a = m.get(r, c);
                    let b = m.get(pr, c);
                    m.set(r, c, b);
                    m.set(pr, c, a);
                }
            }
            let inv = inv_m(m.get(r, j), p);
            if inv != 1 {
                for c in j..m.cols {
                    let v = mul_m(m.get(r, c), inv, p);
                    m.set(r, c, v);
                }
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, j);
                if f == 0 {
                    continue;
                }
                for c in j..m.cols {
                    let v = sub_m(m.get(i, c), mul_m(f, m.get(r, c), p), p);
                    m.set(i, c, v);
                }
            }
            pivots.push(j);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        if self.p == 2 {
            return self.packed_eliminate(false).1.len();
        }
        // Forward elimination only; cheaper than full rref.
        let mut m = self.clone();
        let p = self.p;
        let mut r = 0usize;
        for j in 0..m.cols {
            if r >= m.rows {
                break;
            }
            let mut pr = None;
            for i in r..m.rows {
                if m.get(i, j) != 0 {
                    pr = Some(i);
                    break;
                }
            }
            let Some(pr) = pr else { continue };
            if pr != r {
                for c in j..m.cols {
                    let a = m.get(r, c);
                    let b = m.get(pr, c);
                    m.set(r, c, b);
                    m.set(pr, c, a);
                }
            }
            let inv = inv_m(m.get(r, j), p);
            for i in (r + 1)..m.rows {
                let f = m.get(i, j);
                if f == 0 {
                    continue;
                }
                let f = mul_m(f, inv, p);
                for c in j..m.cols {
                    let v = sub_m(m.get(i, c), mul_m(f, m.get(r, c), p), p);
                    m.set(i, c, v);
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of the right null space, one vector per free column, in
    /// ascending free-column order.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &j in &pivots {
            is_pivot[j] = true;
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (i, &pj) in pivots.iter().enumerate() {
                v[pj] = sub_m(0, r.get(i, f), p);
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `self * x = b` with free variables set to zero in
    /// echelon order, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let bm = FpMatrix::column_vector(self.p, b);
        let aug = FpMatrix::hstack(self.p, &[self, &bm]);
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (i, &pj) in pivots.iter().enumerate() {
            x[pj] = r.get(i, self.cols);
        }
        Some(x)
    }

    pub fn invert(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let id = FpMatrix::identity(self.p, self.rows);
        let aug = FpMatrix::hstack(self.p, &[self, &id]);
        let (r, pivots) = aug.rref();
        if pivots.len() != self.rows || pivots.iter().enumerate().any(|(i, &j)| i != j) {
            return None;
        }
        let cols: Vec<usize> = (self.cols..2 * self.cols).collect();
        let rows: Vec<usize> = (0..self.rows).collect();
        Some(r.submatrix(&rows, &cols))
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} over F_{}", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Indices of columns of `cand` that extend the column space of `span` to
/// the column space of `[span | cand]`, chosen greedily left to right.
pub fn extend_column_basis(span: &FpMatrix, cand: &FpMatrix) -> Vec<usize> {
    assert_eq!(span.rows(), cand.rows());
    assert_eq!(span.prime(), cand.prime());
    let combined = FpMatrix::hstack(span.prime(), &[span, cand]);
    let (_, pivots) = combined.rref();
    pivots
        .into_iter()
        .filter(|&j| j >= span.cols())
        .map(|j| j - span.cols())
        .collect()
}

/// Basis of the column space as a matrix whose columns are the pivot
/// columns of the input, in original order.
pub fn column_space_basis(m: &FpMatrix) -> FpMatrix {
    let (_, pivots) = m.rref();
    let rows: Vec<usize> = (0..m.rows()).collect();
    m.submatrix(&rows, &pivots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_identity_f2() {
        assert_eq!(FpMatrix::identity(2, 3).rank(), 3);
    }

    #[test]
    fn rank_zero_f3() {
        assert_eq!(FpMatrix::zeros(3, 4, 5).rank(), 0);
    }

    #[test]
    fn rank_all_ones_f2() {
        let m = FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_identity_empty() {
        assert!(FpMatrix::identity(2, 3).kernel_basis().is_empty());
    }

    #[test]
    fn kernel_zero_2x2_f2() {
        let ker = FpMatrix::zeros(2, 2, 2).kernel_basis();
        assert_eq!(ker, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn kernel_sum_f2() {
        let m = FpMatrix::from_rows(2, &[vec![1, 1]]);
        assert_eq!(m.kernel_basis(), vec![vec![1, 1]]);
    }

    #[test]
    fn solve_identity() {
        let m = FpMatrix::identity(2, 2);
        assert_eq!(m.solve(&[1, 0]), Some(vec![1, 0]));
    }

    #[test]
    fn solve_free_variable_zeroed() {
        let m = FpMatrix::from_rows(2, &[vec![1, 1]]);
        assert_eq!(m.solve(&[1]), Some(vec![1, 0]));
    }

    #[test]
    fn solve_inconsistent() {
        let m = FpMatrix::zeros(3, 1, 1);
        assert_eq!(m.solve(&[1]), None);
    }

    #[test]
    fn invert_small_f5() {
        let m = FpMatrix::from_rows(5, &[vec![2, 1], vec![1, 1]]);
        let inv = m.invert().unwrap();
        assert_eq!(m.mul(&inv), FpMatrix::identity(5, 2));
    }

    #[test]
    fn extend_basis_picks_new_directions() {
        let span = FpMatrix::from_rows(2, &[vec![1], vec![0], vec![0]]);
        let cand = FpMatrix::from_rows(2, &[vec![1, 0, 0], vec![0, 1, 1], vec![0, 0, 1]]);
        assert_eq!(extend_column_basis(&span, &cand), vec![1, 2]);
    }

    fn arb_matrix(p: u32) -> impl Strategy<Value = FpMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0u32..p, r * c)
                .prop_map(move |flat| FpMatrix::from_flat(p, r, c, flat))
        })
    }

    proptest! {
        #[test]
        fn rank_plus_nullity(m in arb_matrix(3)) {
            prop_assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
        }

        #[test]
        fn rank_equals_transpose_rank(m in arb_matrix(5)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn solve_solutions_verify(m in arb_matrix(2), bits in proptest::collection::vec(0u32..2, 6)) {
            let b: Vec<u32> = (0..m.rows()).map(|i| bits[i % bits.len()]).collect();
            if let Some(x) = m.solve(&b) {
                prop_assert_eq!(m.mul_vec(&x), b);
            } else {
                // inconsistent: rank of augmented must exceed rank of m
                let bm = FpMatrix::column_vector(m.prime(), &b);
                let aug = FpMatrix::hstack(m.prime(), &[&m, &bm]);
                prop_assert!(aug.rank() > m.rank());
            }
        }

        #[test]
        fn kernel_vectors_annihilate(m in arb_matrix(3)) {
            for v in m.kernel_basis() {
                prop_assert!(m.mul_vec(&v).iter().all(|&x| x == 0));
            }
        }
    }
}
