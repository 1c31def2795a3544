"""Numerical diagonalization of single and coupled transmons in a truncated Fock basis.

Used as an independent check of the perturbation series: nothing here depends
on the recurrence.  The cosine potential is assembled from closed-form matrix
elements of the displacement operator, so the truncated matrix is exact up to
rounding (no operator Taylor series is cut at the basis edge).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import LabelingError, OracleError, PhysicsError

DEFAULT_DIMENSION = 30
MAX_PRODUCT_DIMENSION = 4096
XI_WARNING = 0.3
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class FockHamiltonian:
    matrix: np.ndarray
    dimension: int
    xi: float = float("nan")
    charge: np.ndarray | None = None  # N in the same basis (imaginary part, N = i * charge)

    def __post_init__(self):
        gap = np.max(np.abs(self.matrix - self.matrix.T)) if self.matrix.size else 0.0
        if gap > 1e-12 * max(1.0, np.max(np.abs(self.matrix))):
            raise OracleError(f"Hamiltonian not symmetric (max asymmetry {gap:.3g})")


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def transition(self, i: int, j: int) -> float:
        return float(self.eigenvalues[j] - self.eigenvalues[i])


def cos_phase_matrix(xi: float, dimension: int) -> np.ndarray:
    """Fock-basis matrix of ``cos(sqrt(xi) (a + a^dagger))``."""
    m = np.arange(dimension)
    out = np.zeros((dimension, dimension))
    for d in range(0, dimension, 2):
        n = m[: dimension - d]
        log_ratio = 0.5 * (gammaln(n + 1) - gammaln(n + d + 1))
        vals = (
            math.exp(-xi / 2)
            * (-1) ** (d // 2)
            * xi ** (d / 2)
            * np.exp(log_ratio)
            * eval_genlaguerre(n, d, xi)
        )
        out[n + d, n] = vals
        out[n, n + d] = vals
    return out


def ladder_difference(dimension: int) -> np.ndarray:
    """``a^dagger - a`` (real antisymmetric) truncated to ``dimension`` states."""
    s = np.sqrt(np.arange(1, dimension))
    return np.diag(s, -1) - np.diag(s, 1)


def _ladder_difference_squared(dimension: int) -> np.ndarray:
    # exact (a^dag - a)^2 = a^dag^2 + a^2 - 2 a^dag a - 1, then truncated
    n = np.arange(dimension)
    out = np.diag(-(2.0 * n + 1.0))
    off = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
    out += np.diag(off, -2) + np.diag(off, 2)
    return out


def build_single(E_C: float, E_J: float, dimension: int = DEFAULT_DIMENSION) -> FockHamiltonian:
    """``4 E_C N^2 - E_J cos(phi)`` in MHz, with ``phi = sqrt(xi)(a^dag + a)``."""
    if not (E_C > 0 and E_J > 0):
        raise PhysicsError(f"energies must be positive (E_C={E_C}, E_J={E_J})")
    if dimension < 3:
        raise ValueError("dimension must be at least 3")
    xi = math.sqrt(2 * E_C / E_J)
    if xi > XI_WARNING:
        warnings.warn(f"xi={xi:.3g} > {XI_WARNING}: Fock truncation error grows", RuntimeWarning)
    if dimension < 15:
        warnings.warn(f"dimension {dimension} < 15, oracle accuracy not guaranteed", RuntimeWarning)
    kinetic = -(E_C / xi) * _ladder_difference_squared(dimension)
    h = kinetic - E_J * cos_phase_matrix(xi, dimension)
    h = 0.5 * (h + h.T)
    charge = ladder_difference(dimension) / (2 * math.sqrt(xi))
    return FockHamiltonian(h, dimension, xi, charge)


def build_transmon(spec, phi_ext: float = 0.0, dimension: int = DEFAULT_DIMENSION) -> FockHamiltonian:
    """Oracle Hamiltonian of a (possibly tunable) transmon at the given flux."""
    from .tunable import effective_junction

    ej, _ = effective_junction(spec, phi_ext)
    return build_single(spec.E_C, ej, dimension)


def diagonalize(h: FockHamiltonian | np.ndarray) -> SpectrumResult:
    mat = h.matrix if isinstance(h, FockHamiltonian) else np.asarray(h, dtype=float)
    if not np.allclose(mat, mat.T, atol=1e-12 * max(1.0, np.max(np.abs(mat)))):
        raise OracleError("diagonalize needs a symmetric matrix")
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"eigensolver did not converge for a {mat.shape[0]}x{mat.shape[0]} matrix: {exc}") from exc
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    # deterministic signs: the largest-magnitude component of each vector is positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs
    scale = max(np.linalg.norm(mat, 2), 1.0)
    residual = np.linalg.norm(mat @ vecs - vecs * vals, axis=0)
    if np.any(residual > RESIDUAL_TOL * scale):
        raise OracleError(f"eigenpair residual {residual.max():.3g} exceeds {RESIDUAL_TOL} * ||H||")
    return SpectrumResult(vals, vecs)


@dataclass(frozen=True)
class CoupledHamiltonian:
    matrix: np.ndarray
    levels: tuple[int, int]
    bare_first: SpectrumResult
    bare_second: SpectrumResult


def build_coupled(pair, levels_per_qubit: int = DEFAULT_DIMENSION, phi_ext: float | None = None) -> CoupledHamiltonian:
    """``H_1 x 1 + 1 x H_2 + g_C N_1 x N_2`` in the product Fock basis (first qubit is the slow index)."""
    if levels_per_qubit < 3:
        raise ValueError("levels_per_qubit must be at least 3")
    if levels_per_qubit**2 > MAX_PRODUCT_DIMENSION:
        raise OracleError(
            f"product dimension {levels_per_qubit**2} exceeds the {MAX_PRODUCT_DIMENSION} guard"
        )
    flux = pair.phi_park if phi_ext is None else phi_ext
    h1 = build_transmon(pair.qubit_F, 0.0, levels_per_qubit)
    h2 = build_transmon(pair.qubit_T, flux, levels_per_qubit)
    eye = np.eye(levels_per_qubit)
    # N1 N2 = (i c1)(i c2) = -c1 c2 with c = (a^dag - a) / (2 sqrt xi)
    coupling = -pair.g_C * np.kron(h1.charge, h2.charge)
    mat = np.kron(h1.matrix, eye) + np.kron(eye, h2.matrix) + coupling
    mat = 0.5 * (mat + mat.T)
    return CoupledHamiltonian(mat, (levels_per_qubit, levels_per_qubit), diagonalize(h1), diagonalize(h2))


def dressed_labels(
    spectrum: SpectrumResult,
    coupled: CoupledHamiltonian,
    states=((0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)),
) -> dict[tuple[int, int], float]:
    """Energy of the dressed eigenstate with maximal overlap on each bare product state."""
    out = {}
    used = set()
    for i, j in states:
        bare = np.kron(coupled.bare_first.eigenvectors[:, i], coupled.bare_second.eigenvectors[:, j])
        overlaps = (bare @ spectrum.eigenvectors) ** 2
        k = int(np.argmax(overlaps))
        if overlaps[k] <= 0.5 or k in used:
            raise LabelingError(
                f"near-resonant, dispersive labeling invalid for |{i}{j}> (max overlap {overlaps[k]:.3f})"
            )
        used.add(k)
        out[(i, j)] = float(spectrum.eigenvalues[k])
    return out


def chi_numeric(labels: dict[tuple[int, int], float]) -> float:
    return labels[(1, 1)] - labels[(1, 0)] - labels[(0, 1)] + labels[(0, 0)]


def coupled_levels(pair, levels_per_qubit: int = DEFAULT_DIMENSION, phi_ext: float | None = None):
    """Convenience: build, diagonalize and label the coupled pair."""
    coupled = build_coupled(pair, levels_per_qubit, phi_ext)
    spectrum = diagonalize(coupled.matrix)
    return dressed_labels(spectrum, coupled), coupled
