//! Basis enumeration, state vectors, and sparse operators on the truncated
//! atom ⊗ field space.
//!
//! The space is the product of four atomic levels and four photon modes
//! (two longitudinal modes × two circular polarizations), each mode truncated
//! at one photon: 4 · 2⁴ = 64 dimensions. The single-atom cascade injects at
//! most one quantum per mode, so the truncation is exact for this protocol.

use num_complex::Complex64 as C64;

/// Dimension of the truncated atom ⊗ field space.
pub const DIM: usize = 64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// The four atomic levels of the cascade, in fixed basis order.
///
/// `G2` is the doubly excited cascade top |0₀⟩, `MMinus`/`MPlus` are the
/// intermediate Zeeman sublevels |1′₋₁⟩/|1′₁⟩, and `Ground` is |0″₀⟩.
/// The discriminants are the stable basis offsets: flat index = atom·16 + occ.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum AtomLevel {
    G2 = 0,
    MMinus = 1,
    MPlus = 2,
    Ground = 3,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 4] = [
        AtomLevel::G2,
        AtomLevel::MMinus,
        AtomLevel::MPlus,
        AtomLevel::Ground,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> AtomLevel {
        Self::ALL[i]
    }
}

/// One of the two longitudinal cavity modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum LongMode {
    One,
    Two,
}

impl LongMode {
    pub fn index(self) -> usize {
        match self {
            LongMode::One => 0,
            LongMode::Two => 1,
        }
    }
}

/// Circular polarization of a cavity mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pol {
    Plus,
    Minus,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::Plus => 0,
            Pol::Minus => 1,
        }
    }
}

/// A (longitudinal, polarization) mode label; four distinct modes in total.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub long: LongMode,
    pub pol: Pol,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 4] = [
        ModeLabel { long: LongMode::One, pol: Pol::Plus },
        ModeLabel { long: LongMode::One, pol: Pol::Minus },
        ModeLabel { long: LongMode::Two, pol: Pol::Plus },
        ModeLabel { long: LongMode::Two, pol: Pol::Minus },
    ];

    /// Occupation slot in basis order (n₁₊, n₁₋, n₂₊, n₂₋).
    pub fn slot(self) -> usize {
        2 * self.long.index() + self.pol.index()
    }
}

/// A product basis state: atomic level plus four photon occupations in {0,1}.
///
/// The flat index is `atom·16 + n₁₊·8 + n₁₋·4 + n₂₊·2 + n₂₋`, a bijection
/// onto [0, 64).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BasisIndex {
    pub atom: AtomLevel,
    /// Occupations in slot order (n₁₊, n₁₋, n₂₊, n₂₋).
    pub occ: [u8; 4],
}

impl BasisIndex {
    pub fn new(atom: AtomLevel, occ: [u8; 4]) -> BasisIndex {
        debug_assert!(occ.iter().all(|&n| n <= 1));
        BasisIndex { atom, occ }
    }

    /// Flat index in [0, 64).
    pub fn flat(self) -> usize {
        self.atom.index() * 16
            + (self.occ[0] as usize) * 8
            + (self.occ[1] as usize) * 4
            + (self.occ[2] as usize) * 2
            + (self.occ[3] as usize)
    }

    /// Inverse of [`BasisIndex::flat`]; recovers the inputs exactly.
    pub fn from_flat(k: usize) -> BasisIndex {
        debug_assert!(k < DIM);
        let atom = AtomLevel::from_index(k / 16);
        let o = k % 16;
        BasisIndex {
            atom,
            occ: [
                ((o >> 3) & 1) as u8,
                ((o >> 2) & 1) as u8,
                ((o >> 1) & 1) as u8,
                (o & 1) as u8,
            ],
        }
    }

    pub fn occupation(self, mode: ModeLabel) -> u8 {
        self.occ[mode.slot()]
    }

    /// Total photon number across all four modes.
    pub fn photon_number(self) -> usize {
        self.occ.iter().map(|&n| n as usize).sum()
    }
}

/// A pure state: 64 complex amplitudes over the product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(pub [C64; DIM]);

impl StateVector {
    pub fn zero() -> StateVector {
        StateVector([ZERO; DIM])
    }

    /// The basis state with flat index `k`.
    pub fn basis(k: usize) -> StateVector {
        let mut v = Self::zero();
        v.0[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Rescale to unit norm. Panics on the zero vector.
    pub fn normalize(&mut self) {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize a zero state vector");
        let inv = 1.0 / n;
        for c in self.0.iter_mut() {
            *c *= inv;
        }
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Population |⟨k|ψ⟩|² of the flat basis state `k`.
    pub fn population(&self, k: usize) -> f64 {
        self.0[k].norm_sqr()
    }

    /// Populations of the four atomic levels (traced over the field).
    pub fn atom_populations(&self) -> [f64; 4] {
        let mut p = [0.0; 4];
        for (k, c) in self.0.iter().enumerate() {
            p[k / 16] += c.norm_sqr();
        }
        p
    }

    pub fn scaled(&self, s: C64) -> StateVector {
        let mut v = self.clone();
        for c in v.0.iter_mut() {
            *c *= s;
        }
        v
    }

    pub fn add_scaled(&mut self, other: &StateVector, s: C64) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += s * b;
        }
    }
}

/// One nonzero entry of a sparse operator.
#[derive(Copy, Clone, Debug)]
pub struct SparseEntry {
    pub row: u32,
    pub col: u32,
    pub val: C64,
}

/// A sparse 64×64 complex operator stored as merged triplets sorted by
/// (row, col). Immutable after construction and freely shareable across
/// trajectory workers.
#[derive(Clone, Debug, Default)]
pub struct SparseOp {
    entries: Vec<SparseEntry>,
}

impl SparseOp {
    pub fn zero() -> SparseOp {
        SparseOp { entries: Vec::new() }
    }

    pub fn identity() -> SparseOp {
        let entries = (0..DIM as u32)
            .map(|k| SparseEntry { row: k, col: k, val: C64::new(1.0, 0.0) })
            .collect();
        SparseOp { entries }
    }

    /// Build from triplets, summing duplicates and dropping exact zeros.
    pub fn from_triplets(triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> SparseOp {
        let mut raw: Vec<SparseEntry> = triplets
            .into_iter()
            .inspect(|&(r, c, _)| debug_assert!(r < DIM && c < DIM))
            .map(|(r, c, v)| SparseEntry { row: r as u32, col: c as u32, val: v })
            .collect();
        raw.sort_by_key(|e| (e.row, e.col));
        let mut entries: Vec<SparseEntry> = Vec::with_capacity(raw.len());
        for e in raw {
            match entries.last_mut() {
                Some(last) if last.row == e.row && last.col == e.col => last.val += e.val,
                _ => entries.push(e),
            }
        }
        entries.retain(|e| e.val != ZERO);
        SparseOp { entries }
    }

    pub fn from_diagonal(diag: &[C64; DIM]) -> SparseOp {
        Self::from_triplets(diag.iter().enumerate().map(|(k, &v)| (k, k, v)))
    }

    pub fn entries(&self) -> &[SparseEntry] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// True when every nonzero entry sits on the main diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|e| e.row == e.col)
    }

    pub fn diagonal(&self) -> [C64; DIM] {
        let mut d = [ZERO; DIM];
        for e in &self.entries {
            if e.row == e.col {
                d[e.row as usize] = e.val;
            }
        }
        d
    }

    pub fn apply(&self, x: &StateVector) -> StateVector {
        let mut y = StateVector::zero();
        self.apply_into(x, &mut y);
        y
    }

    /// y = A x (overwrites y).
    pub fn apply_into(&self, x: &StateVector, y: &mut StateVector) {
        y.0.fill(ZERO);
        for e in &self.entries {
            y.0[e.row as usize] += e.val * x.0[e.col as usize];
        }
    }

    /// ‖A x‖² without materializing A x, relying on the (row, col) sort order.
    pub fn apply_norm_sq(&self, x: &StateVector) -> f64 {
        let mut total = 0.0;
        let mut i = 0;
        while i < self.entries.len() {
            let row = self.entries[i].row;
            let mut acc = ZERO;
            while i < self.entries.len() && self.entries[i].row == row {
                let e = &self.entries[i];
                acc += e.val * x.0[e.col as usize];
                i += 1;
            }
            total += acc.norm_sqr();
        }
        total
    }

    pub fn dagger(&self) -> SparseOp {
        Self::from_triplets(
            self.entries
                .iter()
                .map(|e| (e.col as usize, e.row as usize, e.val.conj())),
        )
    }

    pub fn scaled(&self, s: C64) -> SparseOp {
        Self::from_triplets(
            self.entries
                .iter()
                .map(|e| (e.row as usize, e.col as usize, s * e.val)),
        )
    }

    pub fn add(&self, other: &SparseOp) -> SparseOp {
        Self::from_triplets(
            self.entries
                .iter()
                .chain(other.entries.iter())
                .map(|e| (e.row as usize, e.col as usize, e.val)),
        )
    }

    /// Matrix product self · other.
    pub fn matmul(&self, other: &SparseOp) -> SparseOp {
        let mut triplets = Vec::new();
        for a in &self.entries {
            for b in &other.entries {
                if a.col == b.row {
                    triplets.push((a.row as usize, b.col as usize, a.val * b.val));
                }
            }
        }
        Self::from_triplets(triplets)
    }

    /// Largest entrywise deviation from Hermiticity, max |A − A†|.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = self.add(&self.dagger().scaled(C64::new(-1.0, 0.0)));
        diff.entries
            .iter()
            .map(|e| e.val.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros();
        for e in &self.entries {
            m.0[e.row as usize * DIM + e.col as usize] += e.val;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.val.norm()).fold(0.0, f64::max)
    }
}

/// ⟨ψ|A|ψ⟩. Real within 10⁻¹² for Hermitian `op` and normalized `psi`.
pub fn expectation(op: &SparseOp, psi: &StateVector) -> C64 {
    let mut acc = ZERO;
    for e in op.entries() {
        acc += psi.0[e.row as usize].conj() * e.val * psi.0[e.col as usize];
    }
    acc
}

/// Annihilation operator for one cavity mode on the {0,1} truncation.
///
/// Nilpotent of order 2; `a†a` has eigenvalues {0,1}.
pub fn annihilation(mode: ModeLabel) -> SparseOp {
    let slot = mode.slot();
    let mut triplets = Vec::with_capacity(32);
    for k in 0..DIM {
        let b = BasisIndex::from_flat(k);
        if b.occ[slot] == 1 {
            let mut occ = b.occ;
            occ[slot] = 0;
            let target = BasisIndex::new(b.atom, occ).flat();
            triplets.push((target, k, C64::new(1.0, 0.0)));
        }
    }
    SparseOp::from_triplets(triplets)
}

/// Photon number operator a†a for one cavity mode.
pub fn number_op(mode: ModeLabel) -> SparseOp {
    let a = annihilation(mode);
    a.dagger().matmul(&a)
}

/// Atomic lowering operator S_{iα} of the cascade, acting as identity on the
/// field: S₁₊ = |1′₋₁⟩⟨0₀|, S₁₋ = |1′₁⟩⟨0₀|, S₂₊ = |0″₀⟩⟨1′₁|, S₂₋ = |0″₀⟩⟨1′₋₁|.
pub fn atomic_lowering(transition: LongMode, pol: Pol) -> SparseOp {
    let (from, to) = match (transition, pol) {
        (LongMode::One, Pol::Plus) => (AtomLevel::G2, AtomLevel::MMinus),
        (LongMode::One, Pol::Minus) => (AtomLevel::G2, AtomLevel::MPlus),
        (LongMode::Two, Pol::Plus) => (AtomLevel::MPlus, AtomLevel::Ground),
        (LongMode::Two, Pol::Minus) => (AtomLevel::MMinus, AtomLevel::Ground),
    };
    let triplets = (0..16).map(|occ| {
        let from_k = from.index() * 16 + occ;
        let to_k = to.index() * 16 + occ;
        (to_k, from_k, C64::new(1.0, 0.0))
    });
    SparseOp::from_triplets(triplets)
}

/// Projector |level⟩⟨level| ⊗ 1 on one atomic level.
pub fn atom_projector(level: AtomLevel) -> SparseOp {
    let triplets = (0..16).map(|occ| {
        let k = level.index() * 16 + occ;
        (k, k, C64::new(1.0, 0.0))
    });
    SparseOp::from_triplets(triplets)
}

/// A dense 64×64 complex matrix in row-major order.
#[derive(Clone, Debug)]
pub struct DenseMatrix(pub Box<[C64]>);

impl DenseMatrix {
    pub fn zeros() -> DenseMatrix {
        DenseMatrix(vec![ZERO; DIM * DIM].into_boxed_slice())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r * DIM + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.0[r * DIM + c] = v;
    }

    /// |ψ⟩⟨ψ| of a pure state.
    pub fn outer(psi: &StateVector) -> DenseMatrix {
        let mut m = Self::zeros();
        m.add_outer(psi, 1.0);
        m
    }

    /// self += w |ψ⟩⟨ψ|.
    pub fn add_outer(&mut self, psi: &StateVector, w: f64) {
        for r in 0..DIM {
            let a = psi.0[r] * w;
            if a == ZERO {
                continue;
            }
            let row = &mut self.0[r * DIM..(r + 1) * DIM];
            for (c, m) in row.iter_mut().enumerate() {
                *m += a * psi.0[c].conj();
            }
        }
    }

    pub fn add_scaled(&mut self, other: &DenseMatrix, s: C64) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += s * b;
        }
    }

    pub fn scale(&mut self, s: C64) {
        for a in self.0.iter_mut() {
            *a *= s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..DIM).map(|k| self.0[k * DIM + k]).sum()
    }

    /// Replace self by its Hermitian part (self + self†)/2.
    pub fn hermitize(&mut self) {
        for r in 0..DIM {
            for c in r..DIM {
                let v = (self.0[r * DIM + c] + self.0[c * DIM + r].conj()) * 0.5;
                self.0[r * DIM + c] = v;
                self.0[c * DIM + r] = v.conj();
            }
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..DIM {
            for c in 0..DIM {
                worst = worst.max((self.0[r * DIM + c] - self.0[c * DIM + r].conj()).norm());
            }
        }
        worst
    }

    /// Left multiplication by a sparse operator: out = A · self.
    pub fn sparse_left(&self, a: &SparseOp) -> DenseMatrix {
        let mut out = Self::zeros();
        for e in a.entries() {
            let src = &self.0[e.col as usize * DIM..(e.col as usize + 1) * DIM];
            let dst = &mut out.0[e.row as usize * DIM..(e.row as usize + 1) * DIM];
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += e.val * s;
            }
        }
        out
    }

    /// Right multiplication by a sparse operator: out = self · A.
    pub fn sparse_right(&self, a: &SparseOp) -> DenseMatrix {
        let mut out = Self::zeros();
        for e in a.entries() {
            let (r, c, v) = (e.row as usize, e.col as usize, e.val);
            for i in 0..DIM {
                out.0[i * DIM + c] += self.0[i * DIM + r] * v;
            }
        }
        out
    }

    /// Right multiplication by the adjoint of a sparse operator: out = self · A†.
    pub fn sparse_right_dagger(&self, a: &SparseOp) -> DenseMatrix {
        let mut out = Self::zeros();
        for e in a.entries() {
            let (r, c, v) = (e.row as usize, e.col as usize, e.val.conj());
            for i in 0..DIM {
                out.0[i * DIM + r] += self.0[i * DIM + c] * v;
            }
        }
        out
    }

    /// Tr(A ρ) for sparse A against this matrix as ρ.
    pub fn trace_with_sparse(&self, a: &SparseOp) -> C64 {
        let mut acc = ZERO;
        for e in a.entries() {
            acc += e.val * self.0[e.col as usize * DIM + e.row as usize];
        }
        acc
    }

    /// ⟨φ|M|φ⟩ for a pure state φ.
    pub fn expectation_state(&self, phi: &StateVector) -> C64 {
        let mut acc = ZERO;
        for r in 0..DIM {
            if phi.0[r] == ZERO {
                continue;
            }
            let mut row_acc = ZERO;
            let row = &self.0[r * DIM..(r + 1) * DIM];
            for (c, m) in row.iter().enumerate() {
                row_acc += m * phi.0[c];
            }
            acc += phi.0[r].conj() * row_acc;
        }
        acc
    }
}
