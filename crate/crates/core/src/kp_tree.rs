//! Binary-tree storage that grants row-state access to a matrix.
//!
//! Each row is held in a complete binary tree whose leaves store `|A_ij|²`
//! together with the unit phase `A_ij / |A_ij|`, and whose internal nodes
//! store the sum of their two children. A second tree stores the squared row
//! norms. Row states are reconstructed top-down from node queries only, the
//! way the quantum preparation circuit applies one controlled rotation per
//! internal node.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{QdfError, Result};
use crate::ledger::CostLedger;
use crate::linalg::{CMatrix, CVector, ONE, ZERO};

const MAGIC: &[u8; 4] = b"KPTS";
const FORMAT_VERSION: u32 = 1;
const PHASE_TOL: f64 = 1e-12;

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn split_entry(z: Complex64) -> (f64, Complex64) {
    let sq = z.norm_sqr();
    if sq > 0.0 {
        (sq, z / z.norm())
    } else {
        (0.0, ONE)
    }
}

/// Complete binary tree of squared magnitudes with leaf phases.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTree {
    depth: usize,
    len: usize,
    /// Heap layout: index 1 is the root, leaves start at `1 << depth`.
    nodes: Vec<f64>,
    phases: Vec<Complex64>,
}

impl AmplitudeTree {
    pub fn zeros(len: usize) -> Self {
        let depth = ceil_log2(len.max(1));
        let width = 1usize << depth;
        Self { depth, len, nodes: vec![0.0; 2 * width], phases: vec![ONE; len] }
    }

    pub fn from_entries(entries: &[Complex64]) -> (Self, u64) {
        let mut tree = Self::zeros(entries.len());
        let mut writes = 0;
        for (j, &z) in entries.iter().enumerate() {
            if z != ZERO {
                writes += tree.set_leaf(j, z);
            }
        }
        (tree, writes)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> f64 {
        self.nodes[1]
    }

    pub fn leaf(&self, j: usize) -> (f64, Complex64) {
        (self.nodes[(1 << self.depth) + j], self.phases[j])
    }

    fn width(&self) -> usize {
        1 << self.depth
    }

    fn slot(&self, level: usize, index: usize) -> Result<usize> {
        if level > self.depth || index >= (1usize << level) {
            return Err(QdfError::input(format!(
                "node (level {level}, index {index}) outside a tree of depth {}",
                self.depth
            )));
        }
        Ok((1 << level) + index)
    }

    /// Stored prefix-sum value; charges one tree query.
    pub fn node_query(&self, level: usize, index: usize, ledger: &mut CostLedger) -> Result<f64> {
        let slot = self.slot(level, index)?;
        ledger.charge_tree_queries(1);
        Ok(self.nodes[slot])
    }

    /// Writes leaf `j` from a matrix entry and recomputes its ancestors.
    /// Returns the number of prefix-sum nodes rewritten.
    fn set_leaf(&mut self, j: usize, z: Complex64) -> u64 {
        let (sq, phase) = split_entry(z);
        self.set_leaf_raw(j, sq, phase)
    }

    fn set_leaf_raw(&mut self, j: usize, sq: f64, phase: Complex64) -> u64 {
        let mut idx = self.width() + j;
        self.nodes[idx] = sq;
        self.phases[j] = phase;
        let mut writes = 0;
        while idx > 1 {
            idx /= 2;
            self.nodes[idx] = self.nodes[2 * idx] + self.nodes[2 * idx + 1];
            writes += 1;
        }
        writes
    }

    /// Whether the subtree at `(level, index)` covers at least one real leaf.
    fn covers_data(&self, level: usize, index: usize) -> bool {
        (index << (self.depth - level)) < self.len
    }

    /// Top-down amplitude reconstruction. At each internal node the two child
    /// values fix the branching amplitudes `sqrt(child / parent)`; a child
    /// whose sibling is pure padding equals its parent and is not queried.
    fn amplitudes(&self, ledger: &mut CostLedger) -> Result<Vec<Complex64>> {
        let root = self.node_query(0, 0, ledger)?;
        if root <= 0.0 {
            return Err(QdfError::StateUndefined("tree root is zero".into()));
        }
        let mut out = vec![ZERO; self.len];
        // (level, index, accumulated magnitude, node value)
        let mut stack = vec![(0usize, 0usize, 1.0f64, root)];
        while let Some((level, index, amp, value)) = stack.pop() {
            if level == self.depth {
                out[index] = self.phases[index] * amp;
                continue;
            }
            let left = 2 * index;
            let right = left + 1;
            if !self.covers_data(level + 1, right) {
                stack.push((level + 1, left, amp, value));
                continue;
            }
            let lv = self.node_query(level + 1, left, ledger)?;
            let rv = self.node_query(level + 1, right, ledger)?;
            if lv > 0.0 {
                stack.push((level + 1, left, amp * (lv / value).sqrt(), lv));
            }
            if rv > 0.0 {
                stack.push((level + 1, right, amp * (rv / value).sqrt(), rv));
            }
        }
        Ok(out)
    }

    /// Verifies the sum property at every internal node and the root against
    /// a compensated sum of the leaves.
    pub fn check_invariants(&self) -> Result<()> {
        for idx in 1..self.width() {
            if self.nodes[idx] != self.nodes[2 * idx] + self.nodes[2 * idx + 1] {
                return Err(QdfError::input(format!("internal node {idx} is not the sum of its children")));
            }
        }
        let leaves = &self.nodes[self.width()..self.width() + self.len];
        if leaves.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(QdfError::input("leaf values must be finite and non-negative"));
        }
        if self.nodes[self.width() + self.len..].iter().any(|&v| v != 0.0) {
            return Err(QdfError::input("padding leaves must be zero"));
        }
        let exact = kahan_sum(leaves);
        if (self.root() - exact).abs() > 1e-12 * exact.abs() {
            return Err(QdfError::input(format!("root {} differs from leaf sum {exact}", self.root())));
        }
        for (j, p) in self.phases.iter().enumerate() {
            let (sq, _) = self.leaf(j);
            let ok = if sq > 0.0 { (p.norm() - 1.0).abs() <= PHASE_TOL } else { *p == ONE };
            if !ok {
                return Err(QdfError::input(format!("leaf {j} has an invalid phase {p}")));
            }
        }
        Ok(())
    }
}

fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Row trees plus the row-norm tree of an `m × n` matrix.
#[derive(Clone, Debug)]
pub struct KPTreeSet {
    rows: Vec<AmplitudeTree>,
    norms: AmplitudeTree,
    m: usize,
    n: usize,
    build_cost: u64,
    update_cost: u64,
}

impl KPTreeSet {
    /// Inserts every nonzero entry, updating its row-tree path and the
    /// row-norm path. `build_cost` counts prefix-sum node writes.
    pub fn build(a: &CMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(QdfError::input("cannot build trees for an empty matrix"));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QdfError::input("matrix has non-finite entries"));
        }
        let mut set = Self {
            rows: (0..m).map(|_| AmplitudeTree::zeros(n)).collect(),
            norms: AmplitudeTree::zeros(m),
            m,
            n,
            build_cost: 0,
            update_cost: 0,
        };
        for i in 0..m {
            for j in 0..n {
                let z = a[(i, j)];
                if z != ZERO {
                    set.build_cost += set.write_entry(i, j, z);
                }
            }
        }
        Ok(set)
    }

    fn write_entry(&mut self, i: usize, j: usize, z: Complex64) -> u64 {
        let row_writes = self.rows[i].set_leaf(j, z);
        let root = self.rows[i].root();
        row_writes + self.norms.set_leaf_raw(i, root, ONE)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn build_cost(&self) -> u64 {
        self.build_cost
    }

    pub fn update_cost(&self) -> u64 {
        self.update_cost
    }

    pub fn row_tree(&self, i: usize) -> &AmplitudeTree {
        &self.rows[i]
    }

    pub fn norm_tree(&self) -> &AmplitudeTree {
        &self.norms
    }

    /// `‖A‖_F` read from the norm-tree root.
    pub fn frobenius(&self) -> f64 {
        self.norms.root().sqrt()
    }

    /// Unit state `A_i / ‖A_i‖` rebuilt from tree queries.
    pub fn row_amplitudes(&self, i: usize, ledger: &mut CostLedger) -> Result<CVector> {
        if i >= self.m {
            return Err(QdfError::input(format!("row {i} out of range for {} rows", self.m)));
        }
        let amps = self.rows[i]
            .amplitudes(ledger)
            .map_err(|_| QdfError::StateUndefined(format!("row {i} is zero")))?;
        Ok(CVector::from_vec(amps))
    }

    /// `(‖A_1‖, …, ‖A_m‖) / ‖A‖_F`.
    pub fn norm_vector_state(&self, ledger: &mut CostLedger) -> Result<DVector<f64>> {
        let amps = self
            .norms
            .amplitudes(ledger)
            .map_err(|_| QdfError::StateUndefined("matrix is zero".into()))?;
        Ok(DVector::from_iterator(self.m, amps.iter().map(|z| z.re)))
    }

    /// Overwrites entry `(i, j)`; returns the node writes spent.
    pub fn update_entry(&mut self, i: usize, j: usize, value: Complex64) -> Result<u64> {
        if i >= self.m || j >= self.n {
            return Err(QdfError::input(format!("entry ({i}, {j}) outside a {}x{} matrix", self.m, self.n)));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(QdfError::input("update value is not finite"));
        }
        let writes = self.write_entry(i, j, value);
        self.update_cost += writes;
        Ok(writes)
    }

    /// Tree contents equal, ignoring cost counters.
    pub fn same_trees(&self, other: &KPTreeSet) -> bool {
        self.dims() == other.dims() && self.rows == other.rows && self.norms == other.norms
    }

    pub fn check_invariants(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            row.check_invariants()?;
            if self.norms.leaf(i).0 != row.root() {
                return Err(QdfError::input(format!("norm leaf {i} does not match its row root")));
            }
        }
        self.norms.check_invariants()
    }

    /// Versioned little-endian binary encoding.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.m as u64).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.build_cost.to_le_bytes())?;
        for row in &self.rows {
            for j in 0..self.n {
                w.write_all(&row.leaf(j).0.to_le_bytes())?;
            }
            for j in 0..self.n {
                let p = row.leaf(j).1;
                w.write_all(&p.re.to_le_bytes())?;
                w.write_all(&p.im.to_le_bytes())?;
            }
        }
        for i in 0..self.m {
            w.write_all(&self.norms.leaf(i).0.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(QdfError::Parse("not a KP tree file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != FORMAT_VERSION {
            return Err(QdfError::Parse(format!("unsupported KP tree format version {version}")));
        }
        let m = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let build_cost = u64::from_le_bytes(read_array(&mut r)?);
        if m == 0 || n == 0 || m.checked_mul(n).is_none_or(|mn| mn > (1 << 32)) {
            return Err(QdfError::Parse(format!("implausible dimensions {m}x{n}")));
        }
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let mut tree = AmplitudeTree::zeros(n);
            let mut sq = vec![0.0; n];
            for v in sq.iter_mut() {
                *v = read_f64(&mut r)?;
            }
            for (j, &s) in sq.iter().enumerate() {
                let phase = Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?);
                if !s.is_finite() || s < 0.0 {
                    return Err(QdfError::Parse(format!("invalid leaf value {s}")));
                }
                tree.set_leaf_raw(j, s, phase);
            }
            rows.push(tree);
        }
        let mut norms = AmplitudeTree::zeros(m);
        for i in 0..m {
            let v = read_f64(&mut r)?;
            norms.set_leaf_raw(i, v, ONE);
        }
        let set = Self { rows, norms, m, n, build_cost, update_cost: 0 };
        set.check_invariants().map_err(|e| QdfError::Parse(format!("invalid KP tree file: {e}")))?;
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn truncated(e: std::io::Error) -> QdfError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        QdfError::Parse("KP tree file is truncated".into())
    } else {
        QdfError::Io(e)
    }
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(buf)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}
