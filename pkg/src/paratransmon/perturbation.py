"""Rayleigh-Schroedinger perturbation theory of the transmon in the oscillator basis.

The transmon Hamiltonian ``4 E_C N^2 - E_J cos(phi)`` is written with
``phi = sqrt(xi) (a^+ + a)`` and ``N = i (a^+ - a) / (2 sqrt(xi))``, normal
ordered and expanded as ``omega_h * sum_u xi^u h_u`` with ``h_0 = a^+ a``.
Overall constants are dropped; they cancel in every transition frequency.

Exactness
---------
Matrix elements ``<m|a^+^j a^k|n> = sqrt(m! n!) / l!`` carry square roots.
Conjugating with ``D = diag(sqrt(m!))`` removes them: in the rescaled
amplitudes ``d_m = sqrt(m!/n!) <m|psi_n>`` the Hamiltonian terms and the whole
recurrence are rational.  Radicals only reappear when an amplitude is mapped
back to the Fock basis (see :meth:`EigenSeries.fock_amplitude`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .series import DEFAULT_ORDER, RationalSeries

MAX_LEVEL = 4
UPSILON_PREFACTOR = -math.sqrt(2.0)


def _falling(m: int, j: int) -> int:
    """``m! / (m-j)!``"""
    out = 1
    for i in range(m - j + 1, m + 1):
        out *= i
    return out


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``n = s**2 * r`` and ``r`` square free."""
    s, r, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            r *= p
        p += 1
    return s, r * n


def radical(q: Fraction) -> tuple[Fraction, int]:
    """Write ``sqrt(q)`` for ``q >= 0`` as ``c * sqrt(r)`` with rational ``c`` and square-free ``r``."""
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return Fraction(0), 1
    # sqrt(a/b) = sqrt(a*b)/b
    s, r = _squarefree_split(q.numerator * q.denominator)
    return Fraction(s, q.denominator), r


def _term_prefactor(u: int, v: int) -> Fraction:
    return Fraction((-1) ** u, 2 ** (u - v + 1) * math.factorial(u - v))


def _rescaled_bands(u: int, dimension: int) -> dict[int, tuple[Fraction, ...]]:
    """Bands of ``D h_u D^-1``: ``{offset: values}`` where ``values[m]`` is the element at (m, m - offset)."""
    full = _bands_upto(u, _band_capacity(dimension))
    out = {}
    for offset, values in full.items():
        vals = list(values[:dimension])
        # drop entries whose column falls outside the truncated space
        for m in range(dimension):
            if not 0 <= m - offset < dimension:
                vals[m] = Fraction(0)
        if any(vals):
            out[offset] = tuple(vals)
    return out


def _band_capacity(dimension: int) -> int:
    return max(128, 1 << (dimension - 1).bit_length())


@lru_cache(maxsize=None)
def _bands_upto(u: int, dimension: int) -> dict[int, tuple[Fraction, ...]]:
    if u == 0:
        return {0: tuple(Fraction(m) for m in range(dimension))}
    bands = {}
    for w in range(-(u + 1), u + 2):
        vs = range(max(abs(w) - 1, 0), u + 1)
        coefs = [(v + 1 + w, _term_prefactor(u, v) / (math.factorial(v + 1 + w) * math.factorial(v + 1 - w))) for v in vs]
        den = math.lcm(*(c.denominator for _, c in coefs))
        ints = [(j, c.numerator * (den // c.denominator)) for j, c in coefs]
        values = [Fraction(0)] * dimension
        for m in range(dimension):
            acc = 0
            for j, c in ints:
                if m >= j:
                    acc += c * _falling(m, j)
            if acc:
                values[m] = Fraction(acc, den)
        bands[2 * w] = tuple(values)
    return bands


@dataclass(frozen=True)
class HamiltonianTerm:
    """Order-``u`` term of the expanded Hamiltonian, in units of the plasma frequency."""

    order: int
    dimension: int
    bands: dict = field(repr=False)

    def rescaled(self, m: int, n: int) -> Fraction:
        """Element ``sqrt(m!/n!) <m|h_u|n>`` (rational)."""
        band = self.bands.get(m - n)
        return band[m] if band is not None else Fraction(0)

    def exact(self, m: int, n: int) -> tuple[Fraction, int]:
        """``<m|h_u|n>`` as ``(c, r)`` meaning ``c * sqrt(r)``."""
        t = self.rescaled(m, n)
        c, r = radical(Fraction(math.factorial(n), math.factorial(m)))
        return t * c, r

    def element(self, m: int, n: int) -> float:
        c, r = self.exact(m, n)
        return float(c) * math.sqrt(r)

    def matrix(self) -> np.ndarray:
        d = self.dimension
        out = np.zeros((d, d))
        for offset, values in self.bands.items():
            for m, val in enumerate(values):
                if val:
                    out[m, m - offset] = self.element(m, m - offset)
        return out

    def is_symmetric(self) -> bool:
        """Exact check of ``<m|h|n> == <n|m>`` via squared magnitudes and signs."""
        for offset, values in self.bands.items():
            for m, val in enumerate(values):
                if not val:
                    continue
                n = m - offset
                a = self.exact(m, n)
                b = self.exact(n, m)
                if a[0] * a[0] * a[1] != b[0] * b[0] * b[1] or (a[0] > 0) != (b[0] > 0):
                    return False
        return True


def hamiltonian_term(u: int, dimension: int) -> HamiltonianTerm:
    if u < 0:
        raise ValueError("order must be non-negative")
    if dimension < 2 * (u + 1) + 1:
        raise ValueError(f"dimension {dimension} too small for the order-{u} term (need {2 * (u + 1) + 1})")
    return HamiltonianTerm(u, dimension, _rescaled_bands(u, dimension))


@dataclass(frozen=True)
class EigenSeries:
    """Perturbative eigenpair of level ``level``.

    ``energy`` is in units of the plasma frequency.  ``amplitudes[p][m]`` is the
    rescaled amplitude ``sqrt(m!/n!) <m|psi_n^(p)>``.
    """

    level: int
    energy: RationalSeries
    amplitudes: tuple[tuple[Fraction, ...], ...]
    normalized: bool = False

    @property
    def max_order(self) -> int:
        return len(self.amplitudes) - 1

    @property
    def dimension(self) -> int:
        return len(self.amplitudes[0])

    def fock_amplitude(self, order: int, m: int) -> tuple[Fraction, int]:
        """``<m|psi^(order)>`` as ``(c, r)`` meaning ``c * sqrt(r)``."""
        d = self.amplitudes[order][m] if m < self.dimension else Fraction(0)
        c, r = radical(Fraction(math.factorial(self.level), math.factorial(m)))
        return d * c, r

    def fock_vector(self, order: int, dimension: int | None = None) -> np.ndarray:
        dim = self.dimension if dimension is None else dimension
        out = np.zeros(dim)
        for m in range(min(dim, self.dimension)):
            c, r = self.fock_amplitude(order, m)
            out[m] = float(c) * math.sqrt(r)
        return out


def _support(level: int, order: int) -> range:
    return range(level % 2, level + 4 * order + 1, 2)


def eigen_recurrence(level: int, max_order: int = DEFAULT_ORDER) -> EigenSeries:
    """Energies and unnormalised states of ``level`` to ``max_order`` (intermediate normalisation)."""
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 0..{MAX_LEVEL}")
    return _eigen_recurrence(level, max_order)


@lru_cache(maxsize=None)
def _eigen_recurrence(level: int, max_order: int) -> EigenSeries:
    n = level
    dim = n + 4 * max_order + 1
    zero = Fraction(0)
    bands = [_rescaled_bands(u, dim) for u in range(max_order + 1)]
    d0 = [zero] * dim
    d0[n] = Fraction(1)
    amps = [d0]
    energies = [Fraction(n)]
    for p in range(1, max_order + 1):
        r = [zero] * dim
        for q in range(p):
            u = p - q
            dq = amps[q]
            src = [k for k in _support(n, q) if dq[k]]
            for offset, values in bands[u].items():
                for k in src:
                    m = k + offset
                    if 0 <= m < dim:
                        val = values[m]
                        if val:
                            r[m] += val * dq[k]
        e_p = r[n]
        energies.append(e_p)
        dp = [zero] * dim
        for m in _support(n, p):
            if m == n:
                continue
            acc = r[m]
            for q in range(1, p):
                if amps[q][m]:
                    acc -= energies[p - q] * amps[q][m]
            dp[m] = acc / (n - m)
        amps.append(dp)
    return EigenSeries(n, RationalSeries(tuple(energies), 0), tuple(tuple(a) for a in amps))


def _overlap_weights(level_a: int, dim: int) -> list[Fraction]:
    return [Fraction(math.factorial(level_a), math.factorial(m)) for m in range(dim)]


def normalize_states(e: EigenSeries) -> EigenSeries:
    """Rescale so that ``<Psi|Psi> = 1`` order by order (norm factor is a rational series)."""
    if e.normalized:
        return e
    return _normalize(e)


@lru_cache(maxsize=None)
def _normalize(e: EigenSeries) -> EigenSeries:
    P, dim = e.max_order, e.dimension
    w = _overlap_weights(e.level, dim)
    norm2 = []
    for p in range(P + 1):
        acc = Fraction(0)
        for q in range(p + 1):
            a, b = e.amplitudes[q], e.amplitudes[p - q]
            for m in _support(e.level, min(q, p - q)):
                if a[m] and b[m]:
                    acc += w[m] * a[m] * b[m]
        norm2.append(acc)
    inv = RationalSeries(tuple(norm2), 0).sqrt().reciprocal()
    s = [inv.coeff(k) for k in range(P + 1)]
    amps = []
    for p in range(P + 1):
        out = [Fraction(0)] * dim
        for q in range(p + 1):
            if not s[q]:
                continue
            src = e.amplitudes[p - q]
            for m in _support(e.level, p - q):
                if src[m]:
                    out[m] += s[q] * src[m]
        amps.append(tuple(out))
    return EigenSeries(e.level, e.energy, tuple(amps), normalized=True)


def normalized_level(level: int, max_order: int = DEFAULT_ORDER) -> EigenSeries:
    return normalize_states(eigen_recurrence(level, max_order))


def _bilinear(b: EigenSeries, a: EigenSeries, kind: str, weight=lambda p, q: 1) -> RationalSeries:
    """Series of ``sqrt(a! b!)^-1 <Psi_b| X |Psi_a>`` for X in {identity, a^+ - a}.

    ``weight(p, q)`` multiplies the contribution of order ``q`` of ``a`` at total order ``p``.
    """
    P = min(a.max_order, b.max_order)
    dim = min(a.dimension, b.dimension)
    inv_fact = [Fraction(1, math.factorial(m)) for m in range(dim + 1)]
    out = []
    for p in range(P + 1):
        acc = Fraction(0)
        for q in range(p + 1):
            wt = weight(p, q)
            if not wt:
                continue
            da, db = a.amplitudes[q], b.amplitudes[p - q]
            part = Fraction(0)
            if kind == "overlap":
                for m in range(dim):
                    if da[m] and db[m]:
                        part += db[m] * da[m] * inv_fact[m]
            else:
                for m in range(dim):
                    if not da[m]:
                        continue
                    if m + 1 < dim and db[m + 1]:
                        part += db[m + 1] * da[m] * inv_fact[m]
                    if m >= 1 and db[m - 1]:
                        part -= db[m - 1] * da[m] * inv_fact[m - 1]
            acc += wt * part
        out.append(acc)
    return RationalSeries(tuple(out), 0)


@lru_cache(maxsize=None)
def charge_weights(max_order: int = DEFAULT_ORDER) -> tuple[RationalSeries, RationalSeries, RationalSeries]:
    """Series for ``lambda``, ``Lambda`` and the rational part of ``upsilon``.

    ``lambda = <Psi_1|(a^+ - a)|Psi_0>``, ``Lambda = <Psi_2|(a^+ - a)|Psi_1> / sqrt(2)``
    and ``upsilon = -sqrt(2) * U`` with ``U = -xi <Psi_2|d_xi Psi_0> / sqrt(2)``;
    the returned third series is ``U``.
    """
    psi = [normalized_level(k, max_order) for k in range(3)]
    lam = _bilinear(psi[1], psi[0], "charge")
    big = _bilinear(psi[2], psi[1], "charge")
    # xi d/dxi acting on Psi_0 multiplies its order-q part by q
    ups = _bilinear(psi[2], psi[0], "overlap", weight=lambda p, q: q)
    return lam, big, ups


@dataclass(frozen=True)
class TransmonSeriesSet:
    """Exact series of the three-level transmon parameters.

    ``omega`` and ``eta`` are in units of E_C (``omega`` has a ``4/xi`` leading
    term); ``lam`` and ``Lam`` are dimensionless; ``upsilon`` stores the rational
    factor, the physical value being ``-sqrt(2) * upsilon``.
    """

    omega: RationalSeries
    eta: RationalSeries
    lam: RationalSeries
    Lam: RationalSeries
    upsilon: RationalSeries

    def values(self, xi, E_C: float = 1.0) -> dict:
        return {
            "omega": E_C * self.omega.evaluate(xi),
            "eta": E_C * self.eta.evaluate(xi),
            "lambda": self.lam.evaluate(xi),
            "Lambda": self.Lam.evaluate(xi),
            "upsilon": UPSILON_PREFACTOR * self.upsilon.evaluate(xi),
        }

    def truncate(self, order: int) -> "TransmonSeriesSet":
        """Keep perturbation orders ``<= order`` (omega/eta lose one power to the 1/xi prefactor)."""
        return TransmonSeriesSet(
            self.omega.truncate(order - 1),
            self.eta.truncate(max(order - 1, 0)),
            self.lam.truncate(order),
            self.Lam.truncate(order),
            self.upsilon.truncate(order),
        )

    def to_json(self) -> dict:
        return {
            "omega_over_EC": self.omega.to_json(),
            "eta_over_EC": self.eta.to_json(),
            "lambda": self.lam.to_json(),
            "Lambda": self.Lam.to_json(),
            "upsilon_over_minus_sqrt2": self.upsilon.to_json(),
        }


@lru_cache(maxsize=None)
def transmon_series(max_order: int = DEFAULT_ORDER) -> TransmonSeriesSet:
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    e = [eigen_recurrence(k, max_order).energy for k in range(3)]
    # omega_h = 4 E_C / xi turns order p of the energy into power p-1
    omega = (e[1] - e[0]).scale(4).shift(-1).truncate(max_order - 1)
    eta = (e[1].scale(2) - e[0] - e[2]).scale(4).shift(-1)
    eta = RationalSeries(eta.coefficients[1:], 0)
    lam, big, ups = charge_weights(max_order)
    return TransmonSeriesSet(omega, eta, lam, big, ups)


def diagonalization_operator(max_level: int, order: int, dimension: int = 25) -> np.ndarray:
    """``dimension x (max_level+1)`` float matrix with columns the order-``order`` part of ``|Psi_n>``."""
    if not 0 <= max_level <= MAX_LEVEL:
        raise ValueError(f"max_level must be in 0..{MAX_LEVEL}")
    if not 0 <= order <= 5:
        raise ValueError("order must be in 0..5")
    cols = [normalized_level(n, max(order, 1)).fock_vector(order, dimension) for n in range(max_level + 1)]
    return np.column_stack(cols)
