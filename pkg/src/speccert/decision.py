"""Height-two decision towers: set intersection tests, spectral gap, and
the four-way classification of the bottom of the spectrum.

Each tower reports its full inner trace (the values for n1' = 1..n1 at the
given n2). Eventual constancy of that trace is the only finite-scale signal
a second-limit tower emits, so tests and callers inspect it directly. The
one-sided guarantees are: a stabilized spec_gap value 1 implies a gapped
spectrum; a stabilized spec_class value k implies the true class is <= k
(k = 1 exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from speccert.linalg import eigenvalues_bisection
from speccert.operator import OperatorOracle, ResolventGrowth
from speccert.resolvent import dist_spec
from speccert.spectra import comp_invg, comp_spec_ub


@dataclass(frozen=True)
class CompactSetApprox:
    """Finite set K_{n2} with d_H(K_{n2}, K) <= 2^-(n2+1)."""

    level: int
    points: tuple

    def __post_init__(self):
        if not self.points:
            raise ValueError("compact set approximation must be nonempty")


@dataclass
class TowerOutput:
    value: object
    n1: int
    n2: int
    trace: list = field(default_factory=list)

    def stabilized(self) -> bool:
        """True when the trace is constant over its last half."""
        half = self.trace[len(self.trace) // 2 :]
        return all(v == half[0] for v in half)


class _MonotoneGamma:
    """upsilon_n(z) = min_{j<=n} gamma_j(z, A), cached per point."""

    def __init__(self, A: OperatorOracle, resolution=None, strategy="gram"):
        self.A = A
        self.resolution = resolution
        self.strategy = strategy
        self._cache: dict[complex, list[float]] = {}

    def value(self, z: complex, n: int) -> float:
        z = complex(z)
        hist = self._cache.setdefault(z, [])
        while len(hist) < n:
            j = len(hist) + 1
            g = dist_spec(
                self.A, j, z, resolution=self.resolution, strategy=self.strategy
            ).value
            hist.append(min(g, hist[-1]) if hist else g)
        return hist[n - 1]


def test_spec(
    A: OperatorOracle, K: CompactSetApprox, n1: int, n2: int
) -> TowerOutput:
    """Inner tower for "Is Sp(A) intersect K empty?".

    The answer at level n1 is "empty" (True) iff no point of K_{n2} has
    upsilon_{n1}(z, A) < 2^-n2.
    """
    return _test_threshold(A, K, n1, n2, extra=0.0)


def test_pseudo_spec(
    A: OperatorOracle, K: CompactSetApprox, n1: int, n2: int, eps: float
) -> TowerOutput:
    """Inner tower for "Is Sp_eps(A) intersect K empty?" (threshold shifted by eps)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return _test_threshold(A, K, n1, n2, extra=eps)


def _test_threshold(A, K, n1, n2, extra):
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    gam = _MonotoneGamma(A)
    thresh = 2.0**-n2 + extra
    trace = []
    for level in range(1, n1 + 1):
        hit = any(gam.value(z, level) < thresh for z in K.points)
        trace.append(not hit)
    return TowerOutput(value=trace[-1], n1=n1, n2=n2, trace=trace)


def _section_eigs(A: OperatorOracle, k: int, cache: dict) -> list[float]:
    # precision schedule eps_k <= 1/k, realized with margin as 1/(2k)
    if k not in cache:
        cache[k] = eigenvalues_bisection(A.section(k), 1.0 / (2 * k))
    return cache[k]


def spec_gap(A: OperatorOracle, n1: int, n2: int, _eig_cache: dict | None = None) -> TowerOutput:
    """Sigma_2 tower for "is the spectrum gapped?" (self-adjoint, bounded below).

    l_k = mu_2^k - mu_1^k + eps_k from the square sections P_k A P_k; the
    current value is 1 iff the most recent l_k landing in
    J1 = [0, 1/(2 n2)] or J2 = (1/n2, inf) landed in J2, with the
    conventions value = 1 at n1 = 1 and value = 0 when no l_k has landed.
    """
    if not A.is_self_adjoint:
        raise ValueError("spec_gap requires a self-adjoint oracle")
    if n1 < 1 or n2 < 1:
        raise ValueError("tower indices must be >= 1")
    eig_cache = _eig_cache if _eig_cache is not None else {}
    j1_hi = 1.0 / (2 * n2)
    j2_lo = 1.0 / n2

    ells: dict[int, float] = {}
    for k in range(2, n1 + 1):
        eigs = _section_eigs(A, k, eig_cache)
        ells[k] = max(eigs[1] - eigs[0], 0.0)

    trace = []
    for level in range(1, n1 + 1):
        if level == 1:
            trace.append(1)
            continue
        landed = None
        for k in range(2, level + 1):
            lk = ells[k]
            if lk <= j1_hi:
                landed = 0
            elif lk > j2_lo:
                landed = 1
        trace.append(landed if landed is not None else 0)
    return TowerOutput(value=trace[-1], n1=n1, n2=n2, trace=trace)


class _ErrorFunction:
    """E(k, x): certified distance bound at arbitrary real x, plus a_k(A).

    a_k(A) = min over the level-k certified spectrum output of
    Re(x) + E(k, x); the windowed grid is restricted to the real axis,
    where the gamma minimisers of a self-adjoint operator lie.
    """

    IMAG_TOL_FACTOR = 10.0

    def __init__(self, A: OperatorOracle, growth: ResolventGrowth,
                 real_window: tuple[float, float]):
        self.A = A
        self.growth = growth
        self.window = real_window
        self._a_cache: dict[int, float] = {}
        self._e_cache: dict[tuple[int, complex], float] = {}

    def error(self, k: int, x: complex) -> float:
        key = (k, complex(x))
        if key not in self._e_cache:
            gamma = dist_spec(self.A, k, x).value
            m = max(int(math.ceil(abs(x))), 1)
            self._e_cache[key] = comp_invg(k, gamma, lambda t: self.growth.g(m, t))
        return self._e_cache[key]

    def a(self, k: int) -> float:
        if k not in self._a_cache:
            lo, hi = self.window
            out = comp_spec_ub(
                self.A, self.growth, k, window=(lo, hi, 0.0, 0.0)
            )
            if out.is_empty:
                self._a_cache[k] = float("inf")
            else:
                scale = max(abs(lo), abs(hi), 1.0)
                tol = self.IMAG_TOL_FACTOR * np.finfo(float).eps * scale
                best = float("inf")
                for z, r in zip(out.points, out.radii):
                    if abs(z.imag) > tol:
                        raise ArithmeticError(
                            "self-adjoint operator produced an off-axis point"
                        )
                    best = min(best, z.real + r)
                self._a_cache[k] = best
        return self._a_cache[k]


def spec_class(
    A: OperatorOracle,
    n1: int,
    n2: int,
    growth: ResolventGrowth | None = None,
    real_window: tuple[float, float] | None = None,
    _state: dict | None = None,
) -> TowerOutput:
    """Pi_2 tower classifying the bottom of the spectrum into classes 1-4.

    1: discrete simple minimum; 2: discrete with multiplicity > 1;
    3: isolated point of the essential spectrum; 4: cluster point.
    Section gaps l^j_n decide classes 1 and 2 through the J1/J2 interval
    tests; the b_{n2,n1} >= 1/n2 test separates class 3 from class 4.

    real_window bounds the real-axis search grid for the certified spectrum
    (defaults to a Frobenius-based enclosure of the sections used).
    """
    if not A.is_self_adjoint:
        raise ValueError("spec_class requires a self-adjoint oracle")
    if n1 < 1 or n2 < 1:
        raise ValueError("tower indices must be >= 1")
    growth = growth or ResolventGrowth.identity()
    if real_window is None:
        bound = float(np.linalg.norm(A.section(max(n1, 4)))) + 1.0
        real_window = (-bound, bound)
    state = _state if _state is not None else {}
    eig_cache = state.setdefault("eigs", {})
    efun = state.setdefault("efun", _ErrorFunction(A, growth, real_window))

    j1_hi = 1.0 / (2 * n2)
    j2_lo = 1.0 / n2

    for k in range(2, n1 + 1):
        _section_eigs(A, k, eig_cache)

    def ell(k: int, j: int) -> float | None:
        eigs = eig_cache.get(k)
        if eigs is None or j >= len(eigs):
            return None
        return max(eigs[j] - eigs[0], 0.0)

    trace = []
    for level in range(1, n1 + 1):
        if level <= n2:
            trace.append(1)
            continue
        landing: dict[int, int | None] = {}
        for j in range(1, n2 + 1):
            landed = None
            for k in range(2, level):  # landings use k < level
                lk = ell(k, j)
                if lk is None:
                    continue
                if lk <= j1_hi:
                    landed = 1
                elif lk > j2_lo:
                    landed = 2
            landing[j] = landed
        if landing[1] == 2:
            trace.append(1)
            continue
        if any(landing[j] == 2 for j in range(2, n2 + 1)):
            trace.append(2)
            continue
        qs = []
        for k in range(1, level + 1):
            ak = efun.a(k)
            if not math.isfinite(ak):
                continue
            qs.append(efun.error(k, ak + 1.0 / n2) + 1.0 / k)
        b = min(qs) if qs else float("inf")
        trace.append(3 if b >= 1.0 / n2 else 4)
    return TowerOutput(value=trace[-1], n1=n1, n2=n2, trace=trace)
