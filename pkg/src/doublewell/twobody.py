"""Two interacting bosons expanded over the single-particle eigenbasis.

States live in the symmetrized pair basis |n m> (n >= m) built from the
grid eigenstates.  The contact interaction enters through the quartic
overlap tensor W, which is totally symmetric under index permutations and
is therefore stored once per sorted index quadruple.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .grid1p import SingleParticleBasis

__all__ = [
    "PairBasis",
    "InteractionTensor",
    "TwoBodySpectrum",
    "TwoBodyState",
    "build_pair_basis",
    "interaction_tensor",
    "assemble_h2p",
    "diagonalize_2p",
    "localized_initial_state",
    "expansion_coefficients",
    "evolve_spectral",
    "grid_amplitudes",
    "pair_operator",
    "lowest_pair_levels",
    "state_as_mode_matrix",
    "mode_matrix_as_state",
    "basis_overlap",
]


@dataclass(frozen=True)
class PairBasis:
    """Symmetrized two-boson index pairs (n, m), n >= m, over n_cut modes.

    Pairs are ordered lexicographically by (m, n): all pairs with lower
    index 0 first, then lower index 1, and so on.  ``pairs[i]`` is (n, m).
    """

    n_cut: int
    pairs: np.ndarray

    @property
    def dim(self) -> int:
        return self.n_cut * (self.n_cut + 1) // 2

    def index_of(self, n, m) -> np.ndarray | int:
        n = np.asarray(n)
        m = np.asarray(m)
        if np.any(n < m) or np.any(m < 0) or np.any(n >= self.n_cut):
            raise ValueError("pair indices must satisfy n_cut > n >= m >= 0")
        idx = m * self.n_cut - m * (m - 1) // 2 + (n - m)
        return int(idx) if idx.ndim == 0 else idx

    @property
    def sqrt2_weights(self) -> np.ndarray:
        """Per-pair factor: sqrt(2) for n != m, 1 for doubly occupied modes."""
        n, m = self.pairs[:, 0], self.pairs[:, 1]
        return np.where(n == m, 1.0, np.sqrt(2.0))


def build_pair_basis(n_cut: int) -> PairBasis:
    if n_cut < 1:
        raise ValueError(f"n_cut must be >= 1, got {n_cut}")
    lower = np.repeat(np.arange(n_cut), np.arange(n_cut, 0, -1))
    starts = np.repeat(
        np.arange(n_cut) * n_cut - np.arange(n_cut) * (np.arange(n_cut) - 1) // 2,
        np.arange(n_cut, 0, -1),
    )
    upper = lower + (np.arange(len(lower)) - starts)
    return PairBasis(n_cut=n_cut, pairs=np.column_stack([upper, lower]).astype(np.int32))


def _kahan_gram(a: np.ndarray, b: np.ndarray, block: int = 256) -> np.ndarray:
    """Gram matrix a @ b.T with compensated accumulation over grid blocks.

    Partial products within a block are exact to a few ulps; the running
    sum across blocks carries a Kahan compensation term, keeping every
    entry within ~1e-14 of the exactly rounded sum.
    """
    total = np.zeros((a.shape[0], b.shape[0]))
    comp = np.zeros_like(total)
    for j0 in range(0, a.shape[1], block):
        term = a[:, j0 : j0 + block] @ b[:, j0 : j0 + block].T
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


@dataclass(frozen=True)
class InteractionTensor:
    """Contact-interaction tensor W[k,s,q,l] in symmetry-reduced storage.

    Only sorted index quadruples are kept (the tensor is invariant under
    all 24 index permutations); ``values`` is None for lam == 0.  Layout:
    quadruples k >= s >= q >= l are grouped by q, then by l, then by the
    pair index of (k, s).
    """

    n_cut: int
    lam: float
    values: np.ndarray | None
    _pair_offsets: np.ndarray
    _block_starts: np.ndarray

    def _canonical_index(self, d1, d2, d3, d4) -> np.ndarray:
        n = self.n_cut
        pair12 = d2 * n - d2 * (d2 - 1) // 2 + (d1 - d2)
        length = self._pair_offsets[n] - self._pair_offsets[d3]
        return self._block_starts[d3] + d4 * length + (pair12 - self._pair_offsets[d3])

    def value(self, k, s, q, l):
        """W entry for arbitrary index order (scalar or broadcast arrays)."""
        idx = np.sort(np.broadcast_arrays(k, s, q, l), axis=0)[::-1]
        if self.values is None:
            return np.zeros(idx.shape[1:]) if idx.ndim > 1 else 0.0
        out = self.values[self._canonical_index(idx[0], idx[1], idx[2], idx[3])]
        return float(out) if np.ndim(out) == 0 else out

    def pair_block(self, rows: np.ndarray, cols: np.ndarray, basis: PairBasis) -> np.ndarray:
        """W[n,m,n',m'] for all (row pair, col pair) combinations."""
        if self.values is None:
            return np.zeros((len(rows), len(cols)))
        hi1 = basis.pairs[rows, 0][:, None].astype(np.int64)
        lo1 = basis.pairs[rows, 1][:, None].astype(np.int64)
        hi2 = basis.pairs[cols, 0][None, :].astype(np.int64)
        lo2 = basis.pairs[cols, 1][None, :].astype(np.int64)
        d1 = np.maximum(hi1, hi2)
        d4 = np.minimum(lo1, lo2)
        mid_a = np.minimum(hi1, hi2)
        mid_b = np.maximum(lo1, lo2)
        d2 = np.maximum(mid_a, mid_b)
        d3 = np.minimum(mid_a, mid_b)
        return self.values[self._canonical_index(d1, d2, d3, d4)]


def _tensor_tables(n_cut: int):
    q = np.arange(n_cut + 1)
    pair_offsets = q * n_cut - q * (q - 1) // 2  # pair index of (q, q); [n] = dim
    dim = pair_offsets[n_cut]
    block_sizes = (np.arange(n_cut) + 1) * (dim - pair_offsets[:-1])
    block_starts = np.concatenate([[0], np.cumsum(block_sizes)])
    return pair_offsets.astype(np.int64), block_starts.astype(np.int64)


def interaction_tensor(
    basis1p: SingleParticleBasis, lam: float, n_cut: int | None = None
) -> InteractionTensor:
    """Quartic overlaps W = lam * dx * sum_x psi_k psi_s psi_q psi_l.

    Every stored entry is a compensated grid sum (exact partial products
    per block, Kahan-carried across blocks), computed once per canonical
    sorted quadruple.
    """
    if lam < 0:
        raise ValueError("contact interaction must be repulsive (lam >= 0)")
    n_cut = basis1p.n_cut if n_cut is None else n_cut
    if n_cut > basis1p.n_cut:
        raise ValueError("n_cut exceeds the available single-particle basis")
    pair_offsets, block_starts = _tensor_tables(n_cut)
    if lam == 0.0:
        return InteractionTensor(n_cut, 0.0, None, pair_offsets, block_starts)

    basis = build_pair_basis(n_cut)
    states = basis1p.states[:, :n_cut]
    prod = states.T[basis.pairs[:, 0]] * states.T[basis.pairs[:, 1]]
    scale = lam * basis1p.grid.dx
    values = np.empty(block_starts[-1])
    for q in range(n_cut):
        rows = prod[pair_offsets[q] :]
        col_pairs = basis.index_of(np.full(q + 1, q), np.arange(q + 1))
        block = _kahan_gram(prod[col_pairs], rows)
        values[block_starts[q] : block_starts[q + 1]] = (scale * block).ravel()
    return InteractionTensor(n_cut, lam, values, pair_offsets, block_starts)


def assemble_h2p(basis1p: SingleParticleBasis, w: InteractionTensor) -> np.ndarray:
    """Dense two-boson Hamiltonian in the symmetrized pair basis.

    Diagonal carries the one-body energy sums; the interaction block is
    W[n,m,n',m'] dressed with 1/sqrt(2)/2 prefactors depending on which of
    the bra/ket pairs are doubly occupied.
    """
    n_cut = w.n_cut
    if n_cut > basis1p.n_cut:
        raise ValueError("tensor and single-particle basis sizes are inconsistent")
    basis = build_pair_basis(n_cut)
    dim = basis.dim
    esum = basis1p.energies[basis.pairs[:, 0]] + basis1p.energies[basis.pairs[:, 1]]

    h = np.zeros((dim, dim))
    np.fill_diagonal(h, esum)
    if w.values is not None:
        weights = basis.sqrt2_weights
        cb = max(1, min(256, dim))
        for j0 in range(0, dim, cb):
            j1 = min(j0 + cb, dim)
            rows = np.arange(j0, dim)
            block = w.pair_block(rows, np.arange(j0, j1), basis)
            block *= weights[rows][:, None] * weights[j0:j1][None, :]
            ii, jj = np.triu_indices(j1 - j0, k=1)
            block[ii, jj] = 0.0  # keep strictly lower + diagonal
            h[j0:, j0:j1] += block
        for j0 in range(0, dim, cb):  # mirror to the upper triangle
            j1 = min(j0 + cb, dim)
            blk = h[j0:j1, j0:j1]
            iu = np.triu_indices(j1 - j0, k=1)
            blk[iu] = blk.T[iu]
            h[j0:j1, j1:] = h[j1:, j0:j1].T
    return h


@dataclass(frozen=True)
class TwoBodySpectrum:
    """Eigenpairs of the two-boson Hamiltonian in the pair basis.

    ``eigvecs[:, n]`` are the pair-basis expansion coefficients of level n.
    When ``n_states < dim`` only the lowest part of the spectrum is kept.
    """

    basis: PairBasis
    energies: np.ndarray
    eigvecs: np.ndarray
    lam: float
    a_max: float

    @property
    def n_states(self) -> int:
        return len(self.energies)

    @property
    def complete(self) -> bool:
        return self.n_states == self.basis.dim


def diagonalize_2p(
    h2p: np.ndarray,
    lam: float = 0.0,
    a_max: float = 0.0,
    n_states: int | None = None,
) -> TwoBodySpectrum:
    """Diagonalize an assembled two-boson Hamiltonian (lowest n_states)."""
    dim = h2p.shape[0]
    sample = np.random.default_rng(0).integers(0, dim, size=min(2000, dim))
    if not np.allclose(h2p[sample][:, sample], h2p[sample][:, sample].T, atol=1e-9):
        raise ValueError("two-body Hamiltonian must be symmetric")
    n_cut = int((np.sqrt(8 * dim + 1) - 1) / 2 + 0.5)
    if n_cut * (n_cut + 1) // 2 != dim:
        raise ValueError(f"matrix dimension {dim} is not a pair-basis size")
    if n_states is None or n_states >= dim:
        energies, vecs = sla.eigh(h2p)
    else:
        energies, vecs = sla.eigh(h2p, subset_by_index=(0, n_states - 1))
    return TwoBodySpectrum(
        basis=build_pair_basis(n_cut),
        energies=energies,
        eigvecs=vecs,
        lam=lam,
        a_max=a_max,
    )


@dataclass(frozen=True)
class TwoBodyState:
    """Two-boson state: coefficients in the pair basis or the eigenbasis."""

    coeffs: np.ndarray
    rep: str  # "pair" | "eigen"
    time: float = 0.0

    def __post_init__(self):
        if self.rep not in ("pair", "eigen"):
            raise ValueError(f"unknown representation {self.rep!r}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def to_eigen(self, spectrum: TwoBodySpectrum) -> "TwoBodyState":
        if self.rep == "eigen":
            return self
        return TwoBodyState(spectrum.eigvecs.T @ self.coeffs, "eigen", self.time)

    def to_pair(self, spectrum: TwoBodySpectrum) -> "TwoBodyState":
        if self.rep == "pair":
            return self
        return TwoBodyState(spectrum.eigvecs @ self.coeffs, "pair", self.time)


def localized_initial_state(basis: PairBasis, n: int) -> TwoBodyState:
    """Both bosons in the right well: (|2n> + |2n+1>)/sqrt(2) per particle.

    In the pair basis this is 1/2 on (2n, 2n) and (2n+1, 2n+1) and
    1/sqrt(2) on (2n+1, 2n).
    """
    if n < 0 or 2 * n + 1 >= basis.n_cut:
        raise ValueError(f"localized state needs 2n+1 < n_cut, got n={n}")
    coeffs = np.zeros(basis.dim)
    coeffs[basis.index_of(2 * n, 2 * n)] = 0.5
    coeffs[basis.index_of(2 * n + 1, 2 * n + 1)] = 0.5
    coeffs[basis.index_of(2 * n + 1, 2 * n)] = 1.0 / np.sqrt(2.0)
    return TwoBodyState(coeffs, "pair")


def expansion_coefficients(state: TwoBodyState, spectrum: TwoBodySpectrum):
    """(E_n, |c_n|^2) of the state over the spectrum, ascending in energy."""
    c = state.to_eigen(spectrum).coeffs
    return spectrum.energies.copy(), np.abs(c) ** 2


def evolve_spectral(state: TwoBodyState, spectrum: TwoBodySpectrum, t: float) -> TwoBodyState:
    """Advance the state by t under the static spectrum (exactly unitary)."""
    c = state.to_eigen(spectrum).coeffs.astype(complex)
    c = c * np.exp(-1j * spectrum.energies * t)
    return TwoBodyState(c, "eigen", state.time + t)


def state_as_mode_matrix(state: TwoBodyState, basis: PairBasis) -> np.ndarray:
    """Symmetric mode-space amplitude matrix C with psi = sum C[n,m] psi_n psi_m.

    Diagonal entries equal the pair coefficients, off-diagonals carry them
    split as c/sqrt(2) on both (n, m) and (m, n); Frobenius norm equals the
    state norm.
    """
    if state.rep != "pair":
        raise ValueError("mode matrix needs a pair-basis state")
    n_cut = basis.n_cut
    c = np.zeros((n_cut, n_cut), dtype=state.coeffs.dtype)
    n, m = basis.pairs[:, 0], basis.pairs[:, 1]
    off = n != m
    c[n[off], m[off]] = state.coeffs[off] / np.sqrt(2.0)
    c[m[off], n[off]] = state.coeffs[off] / np.sqrt(2.0)
    diag = ~off
    c[n[diag], m[diag]] = state.coeffs[diag]
    return c


def mode_matrix_as_state(c: np.ndarray, basis: PairBasis, time: float = 0.0) -> TwoBodyState:
    """Inverse of :func:`state_as_mode_matrix` (symmetrizes its input)."""
    c = 0.5 * (c + c.T)
    n, m = basis.pairs[:, 0], basis.pairs[:, 1]
    coeffs = np.where(n == m, c[n, m], np.sqrt(2.0) * c[n, m])
    return TwoBodyState(coeffs, "pair", time)


def grid_amplitudes(state: TwoBodyState, basis1p: SingleParticleBasis) -> np.ndarray:
    """Configuration-space amplitudes psi(x1, x2) on the grid x grid mesh.

    Normalized so dx^2 * sum |psi|^2 = 1; exchange-symmetric by construction.
    """
    basis = build_pair_basis(int((np.sqrt(8 * len(state.coeffs) + 1) - 1) / 2 + 0.5))
    c = state_as_mode_matrix(state, basis)
    s = basis1p.states[:, : basis.n_cut]
    return s @ c @ s.T


def pair_operator(
    basis1p: SingleParticleBasis, lam: float, n_cut: int
) -> spla.LinearOperator:
    """Matrix-free two-boson Hamiltonian (for sizes where the dense matrix
    would not fit): H v = (E_n + E_m) v + lam*dx * D Phi (Phi^T (D v))."""
    basis = build_pair_basis(n_cut)
    states = basis1p.states[:, :n_cut]
    prod = states.T[basis.pairs[:, 0]] * states.T[basis.pairs[:, 1]]
    esum = basis1p.energies[basis.pairs[:, 0]] + basis1p.energies[basis.pairs[:, 1]]
    weights = basis.sqrt2_weights
    scale = lam * basis1p.grid.dx

    def matvec(v):
        dv = weights * v
        field = prod.T @ dv
        return esum * v + scale * (weights * (prod @ field))

    return spla.LinearOperator((basis.dim, basis.dim), matvec=matvec, dtype=float)


def lowest_pair_levels(
    basis1p: SingleParticleBasis, lam: float, n_cut: int, k: int = 6, tol: float = 1e-9
) -> np.ndarray:
    """Lowest k two-boson energies without forming the dense Hamiltonian."""
    op = pair_operator(basis1p, lam, n_cut)
    vals = spla.eigsh(
        op, k=k, which="SA", tol=tol, maxiter=20000, return_eigenvectors=False
    )
    return np.sort(vals)


def basis_overlap(
    basis_from: SingleParticleBasis, basis_to: SingleParticleBasis
) -> np.ndarray:
    """Overlap matrix Q[b, a] = <psi_to_b | psi_from_a> on a shared grid."""
    if basis_from.grid != basis_to.grid:
        raise ValueError("bases must share the same grid")
    return basis_from.grid.dx * (basis_to.states.T @ basis_from.states)
