"""Single-particle problem on a uniform Fourier grid.

The double well is V(x, t) = x^2/2 + A(t) exp(-x^2/2) with a barrier
amplitude A(t) that is either static or ramped up linearly.  The kinetic
operator is exact in the periodic plane-wave basis of the grid, so bound
states converge to machine-level accuracy once the box and the grid are
large enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = [
    "Grid1D",
    "PotentialSpec",
    "SingleParticleBasis",
    "ramp_amplitude",
    "potential_value",
    "fgh_hamiltonian",
    "solve_1p",
    "fourier_derivative",
    "fourier_interpolate",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-x_max, x_max) with an odd number of points.

    Points are x_m = x_min + m*dx with dx = (x_max - x_min)/n_grid, so the
    right box edge is identified with the left one.  The point count must be
    odd for the symmetric plane-wave set; reflection x -> -x then acts as an
    exact permutation of the points (m -> (n_grid - m) mod n_grid).  Note
    that x = 0 falls exactly halfway between the two central points.
    """

    x_max: float
    n_grid: int

    def __post_init__(self):
        if self.n_grid < 3 or self.n_grid % 2 == 0:
            raise ValueError(f"n_grid must be odd and >= 3, got {self.n_grid}")
        if not self.x_max > 0:
            raise ValueError(f"x_max must be positive, got {self.x_max}")

    @property
    def x_min(self) -> float:
        return -self.x_max

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_grid

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / (self.x_max - self.x_min)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_grid)

    @property
    def reflection_index(self) -> np.ndarray:
        """Permutation p with x[p[m]] == -x[m] (modulo the periodic wrap)."""
        return (-np.arange(self.n_grid)) % self.n_grid

    @property
    def wavenumbers(self) -> np.ndarray:
        """Plane-wave wavenumbers in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_grid, d=self.dx)


@dataclass(frozen=True)
class PotentialSpec:
    """Barrier amplitude schedule: linear ramp to a_max over t_ramp.

    t_ramp = 0 encodes a quench: the barrier sits at full height for every
    t >= 0 and the pre-quench state is prepared at zero amplitude.
    """

    a_max: float
    t_ramp: float = 0.0

    def __post_init__(self):
        if self.a_max < 0:
            raise ValueError(f"a_max must be >= 0, got {self.a_max}")
        if self.t_ramp < 0:
            raise ValueError(f"t_ramp must be >= 0, got {self.t_ramp}")


def ramp_amplitude(spec: PotentialSpec, t) -> float | np.ndarray:
    """Barrier amplitude A(t): linear in t until t_ramp, then a_max."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    if spec.t_ramp == 0.0:
        out = np.full_like(t, spec.a_max)
    else:
        out = spec.a_max * np.minimum(t / spec.t_ramp, 1.0)
    return float(out) if out.ndim == 0 else out


def potential_value(spec: PotentialSpec, x, t=None) -> float | np.ndarray:
    """V(x, t) = x^2/2 + A(t) exp(-x^2/2).

    The minimum sits at x = 0 while A(t) < 1 and at +-sqrt(2 ln A(t)) once
    the barrier outgrows the harmonic curvature.  ``t=None`` uses the full
    amplitude a_max.
    """
    x = np.asarray(x, dtype=float)
    a = spec.a_max if t is None else ramp_amplitude(spec, t)
    out = 0.5 * x**2 + a * np.exp(-0.5 * x**2)
    return float(out) if out.ndim == 0 else out


def _kinetic_column(grid: Grid1D) -> np.ndarray:
    """First column of the circulant kinetic matrix dx*T (energies p^2/2)."""
    k = grid.wavenumbers
    col = np.fft.ifft(0.5 * k**2).real
    # exact evenness col[d] == col[N-d] keeps reflection an exact symmetry
    col[1:] = 0.5 * (col[1:] + col[:0:-1])
    return col


def fgh_hamiltonian(grid: Grid1D, spec: PotentialSpec, t=None) -> np.ndarray:
    """Dense grid Hamiltonian H_mn (kinetic cosine sum plus V(x_m)/dx).

    The secular problem is on dx*H; its eigenvalues are the energies and
    the eigenvectors sample the wave functions on the grid.
    """
    if grid.n_grid % 2 == 0:
        raise ValueError("FGH grid requires an odd point count")
    col = _kinetic_column(grid)
    h = sla.circulant(col)
    h += np.diag(potential_value(spec, grid.points, t))
    h /= grid.dx
    h = 0.5 * (h + h.T)
    return h


@dataclass(frozen=True)
class SingleParticleBasis:
    """Lowest eigenstates of the single-particle double-well Hamiltonian.

    states[:, n] holds psi_n on the grid with dx * sum(psi_n**2) == 1, the
    sign fixed so the first non-negligible amplitude from the left is
    positive.  parities[n] is +1 (even) or -1 (odd); ``confined`` is False
    when the topmost requested energy reaches the potential at the box edge,
    where convergence is no longer guaranteed.
    """

    grid: Grid1D
    energies: np.ndarray
    states: np.ndarray
    parities: np.ndarray
    confined: bool = True

    @property
    def n_cut(self) -> int:
        return len(self.energies)

    def orthonormality_defect(self) -> float:
        g = self.grid.dx * (self.states.T @ self.states)
        return float(np.max(np.abs(g - np.eye(self.n_cut))))


def _parity_blocks(grid: Grid1D, v: np.ndarray):
    """Assemble the secular matrix dx*H in even/odd reflection sectors.

    With c the circulant kinetic column, A[m, m'] = c[(m-m') % N] + V_m d_mm'
    commutes exactly with the reflection permutation, so the two sector
    matrices carry the full problem and their eigenvectors have exact parity.
    """
    n = grid.n_grid
    m_half = (n - 1) // 2
    c = _kinetic_column(grid)
    idx = np.arange(1, m_half + 1)
    diff = c[np.abs(idx[:, None] - idx[None, :])]
    summ = c[(idx[:, None] + idx[None, :]) % n]

    a_even = np.empty((m_half + 1, m_half + 1))
    a_even[0, 0] = c[0] + v[0]
    a_even[0, 1:] = np.sqrt(2.0) * c[idx]
    a_even[1:, 0] = a_even[0, 1:]
    a_even[1:, 1:] = diff + summ + np.diag(v[idx])

    a_odd = diff - summ + np.diag(v[idx])
    return a_even, a_odd


def _embed_sector(grid: Grid1D, vecs: np.ndarray, parity: int) -> np.ndarray:
    """Map sector eigenvectors back to grid samples with unit dx-norm."""
    n = grid.n_grid
    m_half = (n - 1) // 2
    out = np.zeros((n, vecs.shape[1]))
    inv = 1.0 / np.sqrt(2.0)
    if parity > 0:
        out[0] = vecs[0]
        out[1 : m_half + 1] = inv * vecs[1:]
        out[m_half + 1 :] = inv * vecs[:0:-1]
    else:
        out[1 : m_half + 1] = inv * vecs
        out[m_half + 1 :] = -inv * vecs[::-1]
    return out / np.sqrt(grid.dx)


def _fix_signs(states: np.ndarray) -> np.ndarray:
    """Make the first amplitude exceeding 1e-8 of the peak positive."""
    mags = np.abs(states)
    sig = mags > 1e-8 * mags.max(axis=0)
    first = np.argmax(sig, axis=0)
    signs = np.sign(states[first, np.arange(states.shape[1])])
    return states * signs


def solve_1p(grid: Grid1D, spec: PotentialSpec, n_cut: int, t=None) -> SingleParticleBasis:
    """Lowest n_cut eigenpairs of the single-particle Hamiltonian at time t.

    Solves the even and odd reflection sectors separately and merges them,
    which keeps degenerate tunneling doublets exactly parity-resolved.
    """
    if not 1 <= n_cut <= grid.n_grid:
        raise ValueError(f"n_cut must be in [1, n_grid], got {n_cut}")
    v = potential_value(spec, grid.points, t)
    a_even, a_odd = _parity_blocks(grid, v)

    merged = []
    for a_sec, parity in ((a_even, 1), (a_odd, -1)):
        k = min(n_cut, a_sec.shape[0])
        w, u = sla.eigh(a_sec, subset_by_index=(0, k - 1))
        merged.append((w, _embed_sector(grid, u, parity), parity))

    energies = np.concatenate([m[0] for m in merged])
    states = np.hstack([m[1] for m in merged])
    parities = np.concatenate(
        [np.full(len(m[0]), m[2], dtype=np.int8) for m in merged]
    )
    order = np.argsort(energies, kind="stable")[:n_cut]
    energies = energies[order]
    states = _fix_signs(states[:, order])
    parities = parities[order]

    v_edge = potential_value(spec, grid.x_max, t)
    return SingleParticleBasis(
        grid=grid,
        energies=energies,
        states=states,
        parities=parities,
        confined=bool(energies[-1] < v_edge),
    )


def fourier_derivative(grid: Grid1D, values: np.ndarray) -> np.ndarray:
    """Spectral derivative of grid samples (columns treated independently)."""
    k = grid.wavenumbers
    kfac = 1j * k if values.ndim == 1 else 1j * k[:, None]
    out = np.fft.ifft(kfac * np.fft.fft(values, axis=0), axis=0)
    return out.real if np.isrealobj(values) else out


def fourier_interpolate(grid: Grid1D, values: np.ndarray, x: float, derivative: int = 0):
    """Band-limited evaluation of grid samples (or their derivative) at x.

    Needed because x = 0 is not a grid point; the plane-wave interpolant is
    the representation the kinetic operator is exact in.
    """
    k = grid.wavenumbers
    coeff = np.fft.fft(values, axis=0) / grid.n_grid
    phase = np.exp(1j * k * (x - grid.x_min)) * (1j * k) ** derivative
    out = np.tensordot(phase, coeff, axes=(0, 0))
    return np.real(out) if np.isrealobj(values) else out
