"""Discrete-spectrum machinery for bounded normal operators.

The essential spectrum is enclosed by a height-two tower of unions of
dyadic squares; certified spectrum points whose error ball clears the
inflated enclosure are isolated eigenvalues, clustered so that each
eigenvalue contributes exactly one representative. Multiplicities come
from the inertia of shifted Gram truncations, and approximate eigenvectors
from a negative direction of the LDL factorization.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from speccert.linalg import (
    count_negative,
    HermitianMatrix,
    largest_singular_bound,
    ldl_hermitian,
    PSD_RTOL,
)
from speccert.operator import OperatorOracle, ResolventGrowth
from speccert.resolvent import dist_spec
from speccert.spectra import comp_invg, comp_spec_ub, CertifiedPointSet
from speccert.decision import TowerOutput


@dataclass
class EssSpecCover:
    """Union of axis-aligned squares enclosing the essential spectrum.

    All squares share half-width 2^-(n2+1) and have centers on the 2^-n2
    lattice. When n1 <= n2 the tower returns the fixed placeholder point
    {1} instead of squares.
    """

    n2: int
    n1: int
    centers: list[complex]
    half_width: float
    placeholder: bool = False

    def distance(self, z: complex) -> float:
        if self.placeholder:
            return abs(z - 1.0)
        if not self.centers:
            return math.inf
        c = np.asarray(self.centers, dtype=complex)
        dx = np.maximum(np.abs(z.real - c.real) - self.half_width, 0.0)
        dy = np.maximum(np.abs(z.imag - c.imag) - self.half_width, 0.0)
        return float(np.sqrt((dx * dx + dy * dy).min()))


class _MuFunction:
    """Threshold tests for mu_{m,j}(w), the smallest singular value of the
    rectangular truncations P_f(j) (A - wI) restricted to span{e_{m+1}..e_j}
    (minimum over the operator and its adjoint).

    Rather than resolving mu to a fixed resolution, positive-definiteness of
    the shifted Gram matrices is tested directly at the needed thresholds;
    each query refines a cached enclosure [lo, hi] of mu at (m, j, w).
    """

    def __init__(self, A: OperatorOracle):
        self.A = A
        self._intervals: dict[tuple[int, int, complex], list[float]] = {}

    def _gram_sides(self, m: int, j: int, w: complex):
        A = self.A
        fj = A.dispersion_f(j)
        sides = [(A.rect_section(fj, j), w)]
        if not (A.real_entries and A.is_self_adjoint and w.imag == 0.0):
            sides.append((A.adjoint_rect_section(fj, j), np.conj(w)))
        grams = []
        for rect, shift in sides:
            b = rect.astype(complex) if shift.imag != 0 else rect.copy()
            idx = np.arange(j)
            b[idx, idx] = b[idx, idx] - (shift if np.iscomplexobj(b) else shift.real)
            bsub = b[:, m:]
            grams.append(bsub.conj().T @ bsub)
        return grams

    def above(self, m: int, j: int, w: complex, t: float) -> bool:
        """Certified test mu_{m,j}(w) > t (one inertia test per side)."""
        if t < 0:
            return True
        key = (m, j, complex(w))
        iv = self._intervals.setdefault(key, [0.0, math.inf])
        if iv[0] > t:
            return True
        if iv[1] <= t:
            return False
        for g in self._gram_sides(m, j, w):
            tau = PSD_RTOL * float(np.linalg.norm(g))
            hm = HermitianMatrix(g - (t * t) * np.eye(g.shape[0], dtype=g.dtype))
            inertia = count_negative(hm, tau=tau)
            if not (inertia.negative == 0 and inertia.zero == 0):
                iv[1] = min(iv[1], t)
                return False
        iv[0] = max(iv[0], t)
        return True


_ENUM_LEVELS = 3  # dyadic levels enumerated exhaustively per square
_NODE_CAP = 4000  # mu tests per (square, threshold) before the fallback


def _lattice_points_in_square(center: complex, half: float, step: float):
    s0 = math.ceil((center.real - half) / step - 1e-9)
    s1 = math.floor((center.real + half) / step + 1e-9)
    t0 = math.ceil((center.imag - half) / step - 1e-9)
    t1 = math.floor((center.imag + half) / step + 1e-9)
    for t in range(t0, t1 + 1):
        for s in range(s0, s1 + 1):
            yield complex(s * step, t * step)


def _min_catch_level(
    mu: _MuFunction, m: int, n: int, center: complex, half: float, thresh: float
) -> int | None:
    """Minimal level j in (m, n] whose lattice G_j holds a point w of the
    closed square with mu_{m,n}(w) <= thresh; None when no level catches one.

    The dyadic lattices are nested, so the catching levels form a terminal
    segment {j0, ..., n}. The first few levels are enumerated exhaustively;
    deeper catches are located by a quadtree descent with 1-Lipschitz
    pruning (a node whose center certifies mu > thresh + sqrt(2) h is
    discarded whole). If the node budget is exhausted the square is treated
    as caught at the finest level, which errs toward covering.
    """
    top = min(m + _ENUM_LEVELS, n)
    tested: set[complex] = set()
    for level in range(m + 1, top + 1):
        for w in _lattice_points_in_square(center, half, 2.0**-level):
            if w in tested:
                continue
            tested.add(w)
            if not mu.above(m, n, w, thresh):
                return level
    if top >= n:
        return None

    leaf = 2.0**-n
    budget = [_NODE_CAP]

    def on_lattice(w: complex) -> bool:
        s, t = w.real / leaf, w.imag / leaf
        return abs(s - round(s)) < 1e-9 and abs(t - round(t)) < 1e-9

    def visit(c: complex, h: float, depth: int) -> int | None:
        if budget[0] <= 0:
            return n  # budget exhausted: assume caught at the finest level
        budget[0] -= 1
        if mu.above(m, n, c, thresh + h * math.sqrt(2.0)):
            return None  # whole node certified above threshold
        if on_lattice(c) and not mu.above(m, n, c, thresh):
            return max(m + 1 + depth, top + 1)
        if h <= leaf:
            for w in _lattice_points_in_square(c, h * (1 + 1e-12), leaf):
                if not mu.above(m, n, w, thresh):
                    return n
            return None
        h2 = 0.5 * h
        for sx in (-1, 1):
            for sy in (-1, 1):
                got = visit(c + complex(sx * h2, sy * h2), h2, depth + 1)
                if got is not None:
                    return got  # first catch wins; depth beyond top is coarse
        return None

    return visit(center, half, 0)


def ess_spec_tower(
    A: OperatorOracle,
    n2: int,
    n1: int,
    search_radius: float | None = None,
    _mu: _MuFunction | None = None,
) -> EssSpecCover:
    """Height-two enclosure of the essential spectrum.

    For each candidate center z on the 2^-n2 lattice, the counter
    E(z) = |S(z)| + |T(z)| - n1 decides membership, where S (resp. T)
    collects the levels j in (n2, n1] whose lattice holds a point w of the
    square around z with mu_{n2,j}(w) <= 1/n2 (resp. <= 1/(n2+1)).

    The center lattice is restricted to a square covering a certified bound
    on ||P_f(n1) A P_n1|| plus margin; far centers cannot enter the cover
    because mu dominates the distance to the spectrum there.
    """
    if n2 < 1 or n1 < 1:
        raise ValueError("tower indices must be >= 1")
    half = 2.0 ** -(n2 + 1)
    if n1 <= n2:
        return EssSpecCover(n2, n1, centers=[1.0 + 0.0j], half_width=half,
                            placeholder=True)
    mu = _mu if _mu is not None else _MuFunction(A)
    if search_radius is None:
        rect = A.rect_section(A.dispersion_f(n1), n1)
        search_radius = largest_singular_bound(rect, slack=1.0) + 1.0
    step = 2.0**-n2
    bound = int(math.ceil(search_radius / step))
    thresh_s = 1.0 / n2
    thresh_t = 1.0 / (n2 + 1)
    if A.is_self_adjoint:
        # mu dominates dist(w, Sp(A)) >= |Im w| for normal operators, so
        # rows beyond the S-threshold strip cannot contribute
        t_bound = int(math.ceil((half + thresh_s) / step)) + 1
    else:
        t_bound = bound

    centers = []
    for t in range(-t_bound, t_bound + 1):
        for s in range(-bound, bound + 1):
            z = complex(s * step, t * step)
            # catching levels form terminal segments {j0, ..., n1}; the
            # T-threshold is tighter, so a T-catch implies an S-catch
            j0_s = _min_catch_level(mu, n2, n1, z, half, thresh_s)
            if j0_s is None:
                continue
            size_s = n1 - j0_s + 1
            if 2 * size_s <= n1:
                continue  # even T = S could not push the counter positive
            j0_t = _min_catch_level(mu, n2, n1, z, half, thresh_t)
            size_t = n1 - j0_t + 1 if j0_t is not None else 0
            if size_s + size_t - n1 > 0:
                centers.append(z)
    return EssSpecCover(n2, n1, centers=centers, half_width=half)


@dataclass
class DiscreteSpectrumResult:
    """One representative per detected isolated eigenvalue.

    ``empty`` marks the sentinel branch (the pseudocode's {0} output); the
    point list is then empty rather than containing a literal 0.
    """

    points: list[complex]
    radii: list[float]
    multiplicities: list[int] | None
    n1: int
    n2: int
    k_used: int | None
    empty: bool
    cover: EssSpecCover | None = None
    spectrum: CertifiedPointSet | None = None


def _cluster_representatives(points, radii):
    """Chain clustering: z ~ w when consecutive error balls intersect.

    Grows each class by the fixed-point loop over ball intersections and
    keeps the representative with minimal radius (ties: lexicographic).
    """
    remaining = list(range(len(points)))
    reps = []
    while remaining:
        seed = remaining[0]
        cls = {seed}
        while True:
            grown = set(cls)
            for i in remaining:
                if i in grown:
                    continue
                for c in cls:
                    # squared comparison avoids the root
                    lhs = abs(points[i] - points[c]) ** 2
                    rhs = (radii[i] + radii[c]) ** 2
                    if lhs <= rhs:
                        grown.add(i)
                        break
            if grown == cls:
                break
            cls = grown
        rep = min(cls, key=lambda i: (radii[i], points[i].real, points[i].imag))
        reps.append(rep)
        remaining = [i for i in remaining if i not in cls]
    return sorted(reps, key=lambda i: (points[i].real, points[i].imag))


def discrete_spec(
    A: OperatorOracle,
    n1: int,
    n2: int,
    growth: ResolventGrowth | None = None,
    window: tuple[float, float, float, float] | None = None,
    with_multiplicities: bool = False,
    search_radius: float | None = None,
) -> DiscreteSpectrumResult:
    """Certified discrete-spectrum representatives.

    Filters the level-n1 certified spectrum by
    E(n1, z) < dist(z, cover_k + B_{1/k}(0)) for the essential enclosure at
    level k, scanning k = n2..n1 and keeping the minimal k with survivors
    (the sentinel branch reports empty=True when all fail).

    The tower's domain is operators with nonempty discrete spectrum: on a
    purely essential input the k-scan can report transient survivors at
    levels whose enclosure has not yet filled in (use disc_spec_empty to
    decide nonemptiness first).
    """
    growth = growth or ResolventGrowth.identity()
    if n2 > n1:
        return DiscreteSpectrumResult([], [], None, n1, n2, None, empty=True)
    spec = comp_spec_ub(A, growth, n1, window=window)
    mu = _MuFunction(A)
    chosen = None
    for k in range(n2, n1 + 1):
        cover = ess_spec_tower(A, k, n1, search_radius=search_radius, _mu=mu)
        surv = [
            i
            for i, z in enumerate(spec.points)
            if spec.radii[i] < cover.distance(z) - 1.0 / k
        ]
        if surv:
            chosen = (k, cover, surv)
            break
    if chosen is None:
        last_cover = ess_spec_tower(A, n2, n1, search_radius=search_radius, _mu=mu)
        return DiscreteSpectrumResult(
            [], [], None, n1, n2, None, empty=True, cover=last_cover, spectrum=spec
        )
    k, cover, surv = chosen
    pts = [spec.points[i] for i in surv]
    rads = [spec.radii[i] for i in surv]
    reps = _cluster_representatives(pts, rads)
    out_pts = [pts[i] for i in reps]
    out_rads = [rads[i] for i in reps]
    mults = None
    if with_multiplicities:
        mults = [multiplicity(A, n1, n2, z, E=r) for z, r in zip(out_pts, out_rads)]
    return DiscreteSpectrumResult(
        out_pts, out_rads, mults, n1, n2, k, empty=False, cover=cover, spectrum=spec
    )


def disc_spec_empty(
    A: OperatorOracle,
    n1: int,
    n2: int,
    growth: ResolventGrowth | None = None,
    window: tuple[float, float, float, float] | None = None,
    search_radius: float | None = None,
) -> TowerOutput:
    """Sigma_2 tower for "is the discrete spectrum nonempty?".

    Value 1 at level l iff the zeta filter at (n2, l) has survivors; a
    stabilized 1 certifies a nonempty discrete spectrum.
    """
    growth = growth or ResolventGrowth.identity()
    mu = _MuFunction(A)
    trace = []
    for level in range(1, n1 + 1):
        spec = comp_spec_ub(A, growth, level, window=window)
        cover = ess_spec_tower(A, n2, level, search_radius=search_radius, _mu=mu)
        hit = any(
            spec.radii[i] < cover.distance(z) - 1.0 / n2
            for i, z in enumerate(spec.points)
        )
        trace.append(1 if hit else 0)
    return TowerOutput(value=trace[-1], n1=n1, n2=n2, trace=trace)


def multiplicity(
    A: OperatorOracle, n1: int, n2: int, z: complex, E: float | None = None
) -> int:
    """Eigenvalue multiplicity estimate at a discrete-spectrum output point.

    Counts eigenvalues of P_n1 (A - zI)* P_f(n1) (A - zI) P_n1 below
    1/n2 - d_n1 (capped at n2), where d_n1 compensates for both the
    dispersion tail and the distance |z - eigenvalue| via the certified
    bound E. Returns 0 with a diagnostic when the threshold degenerates.
    """
    z = complex(z)
    if E is None:
        est = dist_spec(A, n1, z)
        E = comp_invg(n1, est.value, lambda x: x)
    fn = A.dispersion_f(n1)
    cn = A.dispersion_c(n1)
    rect = A.rect_section(fn, n1)
    kn = largest_singular_bound(rect, slack=1.0)
    d_n1 = (E + cn) * (E + 2.0 * abs(z) + 2.0 * kn + cn)
    thresh = 1.0 / n2 - d_n1
    if thresh <= 0:
        warnings.warn(
            f"multiplicity threshold 1/n2 - d_n1 = {thresh:.3e} is degenerate; "
            "raise n1",
            stacklevel=2,
        )
        return 0
    b = rect.astype(complex) if z.imag != 0 else rect.copy()
    idx = np.arange(n1)
    b[idx, idx] = b[idx, idx] - (z if np.iscomplexobj(b) else z.real)
    g = b.conj().T @ b
    shifted = HermitianMatrix(g - thresh * np.eye(n1, dtype=g.dtype))
    count = count_negative(shifted, tau=PSD_RTOL * float(np.linalg.norm(g))).negative
    return min(n2, count)


def _negative_direction(blk: np.ndarray, tau: float) -> np.ndarray | None:
    """Unit-ish vector y with <y, blk y> < 0 for a 1x1 or 2x2 block."""
    if blk.shape[0] == 1:
        return np.array([1.0]) if blk[0, 0].real < -tau else None
    p, r = float(blk[0, 0].real), float(blk[1, 1].real)
    q = complex(blk[0, 1])
    tr = p + r
    det = p * r - abs(q) ** 2
    lam_min = 0.5 * (tr - math.sqrt(max(tr * tr - 4.0 * det, 0.0)))
    if lam_min >= -tau:
        return None
    if r < 0:
        return np.array([0.0, 1.0])
    if p < 0:
        return np.array([1.0, 0.0])
    # both diagonals nonnegative: det < 0, so the real line search in the
    # phase-aligned direction succeeds on an open interval
    phase = 1.0 if q == 0 else np.conj(q) / abs(q)

    def form(t: float) -> float:
        return p + 2.0 * abs(q) * t + r * t * t

    if r > tau:
        t_mid = -abs(q) / r
    else:
        t_mid = -(p + 1.0) / (2.0 * abs(q))
    if form(t_mid) < 0:
        return np.array([1.0, t_mid * phase])
    # finer and finer spacing around the midpoint
    for i in range(1, 60):
        for t in (t_mid * (1.0 - 2.0**-i), t_mid * (1.0 + 2.0**-i)):
            if form(t) < 0:
                return np.array([1.0, t * phase])
    return None


def approx_eigenvector(
    A: OperatorOracle, n: int, z: complex, E: float, delta: float
) -> tuple[np.ndarray, float]:
    """Vector x of length n with ||(A - zI) x|| <= ||x|| (E + c_n + delta).

    Requires E >= sigma_1(P_f(n)(A - zI)|_{P_n}) (as produced by dist_spec).
    Factors the Gram matrix shifted by (E + delta)^2, picks a negative
    direction of the block diagonal, and back-solves through L*. Raises
    when the shifted matrix is positive semidefinite, which signals an
    inconsistent E.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if E < 0:
        raise ValueError("E must be nonnegative")
    z = complex(z)
    fn = A.dispersion_f(n)
    rect = A.rect_section(fn, n)
    b = rect.astype(complex) if z.imag != 0 else rect.copy()
    idx = np.arange(n)
    b[idx, idx] = b[idx, idx] - (z if np.iscomplexobj(b) else z.real)
    g = b.conj().T @ b
    eps2 = (E + delta) ** 2
    shifted = HermitianMatrix(g - eps2 * np.eye(n, dtype=g.dtype))
    ldl = ldl_hermitian(shifted)

    y = np.zeros(n, dtype=complex)
    pos = 0
    found = False
    for blk in ldl.blocks:
        s = blk.shape[0]
        # strict signs here: even a barely negative pivot yields a valid
        # direction, and (E + delta)^2 is routinely below the relative
        # inertia tolerance when E is tight
        d = _negative_direction(blk, 0.0)
        if d is not None:
            y[pos : pos + s] = d
            found = True
            break
        pos += s
    if not found:
        raise ArithmeticError(
            "shifted Gram matrix is positive semidefinite: the supplied E "
            "does not bound sigma_1 from above"
        )
    u = np.linalg.solve(ldl.lower.conj().T, y)
    x = np.zeros(n, dtype=complex)
    for a, p in enumerate(ldl.permutation):
        x[p] = u[a]
    norm = float(np.linalg.norm(x))
    x = x / norm
    if np.abs(x.imag).max(initial=0.0) == 0.0:
        x = x.real
    return x, 1.0
