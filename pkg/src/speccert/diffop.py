"""Hermite-basis discretization of differential operators on L2(R^d).

T u = sum_{|k| <= N} a_k(x) d^k u (multi-indices in the max norm) is turned
into Gram truncations W_n(z), V_n(z) of (T - zI) and its adjoint in the
tensor Hermite basis. Derivatives and polynomial coefficients propagate
exactly through the two three-term recurrences; non-polynomial coefficient
parts are integrated by quasi-Monte Carlo over a box with Koksma-Hlawka
error budgets, or, for power-series coefficients, by truncation with a
certified remainder. The resulting gamma_n(z, T) plugs into the same grid
algorithms as the matrix-oracle path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from speccert.linalg import roundoff_tau, smallest_eigenvalue_bound
from speccert.operator import OperatorOracle, ResolventGrowth
from speccert.spectra import (
    CertifiedPointSet,
    ComplexGrid,
    PseudoSpectrumResult,
    _grid_for,
    comp_spec_core,
)


class BudgetInfeasibleError(ArithmeticError):
    """Requested per-entry accuracy is unreachable at the given caps."""

    def __init__(self, message, binding: str):
        super().__init__(message)
        self.binding = binding  # "sample_cap" or "box_cap"


# -- basis enumeration -------------------------------------------------------


@dataclass(frozen=True)
class HermiteIndexMap:
    """Bijection between N and Z_{>=0}^d by half-sphere shells.

    Shell S_t = {m : max_i m_i <= t} is listed before S_{t+1} \\ S_t, and
    each shell difference is ordered lexicographically.
    """

    dim: int
    multis: tuple

    def index(self, m: tuple) -> int:
        return self._lookup()[m]

    def multi(self, i: int) -> tuple:
        return self.multis[i - 1]

    def __len__(self):
        return len(self.multis)

    def _lookup(self):
        if not hasattr(self, "_inv"):
            object.__setattr__(
                self, "_inv", {m: i + 1 for i, m in enumerate(self.multis)}
            )
        return self._inv


def hermite_enumerate(d: int, count: int) -> HermiteIndexMap:
    """First ``count`` tensor Hermite indices in shell-then-lex order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    multis = []
    t = 0
    while len(multis) < count:
        shell = sorted(
            m
            for m in np.ndindex(*([t + 1] * d))
            if max(m) == t
        )
        multis.extend(tuple(int(v) for v in m) for m in shell)
        t += 1
    return HermiteIndexMap(dim=d, multis=tuple(multis[:count]))


def shell_size(d: int, t: int) -> int:
    """|S_t| = (t + 1)^d for the max-norm shells."""
    return (t + 1) ** d


# -- recurrences -------------------------------------------------------------

BasisCombination = dict  # multi-index tuple -> complex coefficient


def apply_recurrences(op: tuple, v: BasisCombination) -> BasisCombination:
    """Apply multiply-by-x_i or d/dx_i to a finite Hermite combination.

        x psi_m = sqrt(m/2) psi_{m-1} + sqrt((m+1)/2) psi_{m+1}
        psi_m'  = sqrt(m/2) psi_{m-1} - sqrt((m+1)/2) psi_{m+1}
    """
    kind, axis = op
    if kind not in ("x", "d"):
        raise ValueError("op must be ('x', axis) or ('d', axis)")
    sign = 1.0 if kind == "x" else -1.0
    out: BasisCombination = {}
    for m, c in v.items():
        mi = m[axis]
        if mi > 0:
            lo = m[:axis] + (mi - 1,) + m[axis + 1 :]
            out[lo] = out.get(lo, 0.0) + c * math.sqrt(mi / 2.0)
        hi = m[:axis] + (mi + 1,) + m[axis + 1 :]
        out[hi] = out.get(hi, 0.0) + sign * c * math.sqrt((mi + 1) / 2.0)
    return {m: c for m, c in out.items() if c != 0.0}


def apply_derivative_word(k: tuple, v: BasisCombination) -> BasisCombination:
    for axis, power in enumerate(k):
        for _ in range(power):
            v = apply_recurrences(("d", axis), v)
    return v


def apply_monomial(mono: tuple, v: BasisCombination) -> BasisCombination:
    for axis, power in enumerate(mono):
        for _ in range(power):
            v = apply_recurrences(("x", axis), v)
    return v


def hermite_values(mmax: int, x: np.ndarray) -> np.ndarray:
    """psi_m(x) for m = 0..mmax via the stable normalized recurrence.

    Returns an array of shape (mmax + 1, len(x)).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((mmax + 1, x.size))
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if mmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for m in range(1, mmax):
        out[m + 1] = (
            x * math.sqrt(2.0 / (m + 1)) * out[m]
            - math.sqrt(m / (m + 1)) * out[m - 1]
        )
    return out


# -- Halton ------------------------------------------------------------------


def _primes(count: int) -> list[int]:
    out, cand = [], 2
    while len(out) < count:
        if all(cand % p for p in out):
            out.append(cand)
        cand += 1
    return out


def halton(d: int, j: int) -> tuple:
    """j-th Halton point in [0,1]^d (1-indexed, bases = first d primes)."""
    if j < 1:
        raise ValueError("index is 1-based")
    return tuple(_radical_inverse(j, q) for q in _primes(d))


def _radical_inverse(j: int, base: int) -> float:
    inv, f = 0.0, 1.0 / base
    while j > 0:
        inv += f * (j % base)
        j //= base
        f /= base
    return inv


def halton_points(d: int, count: int, start: int = 1) -> np.ndarray:
    """Rows start..start+count-1 of the Halton sequence, shape (count, d)."""
    out = np.empty((count, d))
    for axis, base in enumerate(_primes(d)):
        js = np.arange(start, start + count, dtype=np.int64)
        col = np.zeros(count)
        f = 1.0 / base
        while js.max(initial=0) > 0:
            col += f * (js % base)
            js //= base
            f /= base
        out[:, axis] = col
    return out


def star_discrepancy_budget(d: int, j: int) -> float:
    """Certified bound C(d) (log j + 1)^d / j on the Halton star discrepancy."""
    if j < 1:
        raise ValueError("j must be >= 1")
    prod = 1.0
    for q in _primes(d):
        prod *= max((q - 1) / (2.0 * math.log(q)), (q + 1) / 2.0)
    c = d + prod
    return c * (math.log(j) + 1.0) ** d / j


def _sigma(d: int) -> float:
    return 3.0**d + 1.0


def hermite_ar_norm(m: tuple, r: float, d: int) -> float:
    """L_r(m) >= ||psi_m||_{A_r} via the total-variation bound
    TV(psi_m) <= (1 + 2 r sqrt(2(|m|+1)))^d - 1 (|m| in the max norm)."""
    mm = max(m) if m else 0
    tv = (1.0 + 2.0 * r * math.sqrt(2.0 * (mm + 1))) ** d - 1.0
    return 1.0 + _sigma(d) * tv


@dataclass(frozen=True)
class FactorBounds:
    """Budget data for one integrand factor: an A_r-norm bound and the
    polynomial growth constants |f(x)| <= A (1 + |x|^{2B})."""

    ar_norm: Callable[[float], float]
    A: float
    B: int

    @staticmethod
    def one() -> "FactorBounds":
        return FactorBounds(ar_norm=lambda r: 1.0, A=1.0, B=0)


def _tail_budget(b1: FactorBounds, b2: FactorBounds, m: tuple, n: tuple,
                 r: float, d: int) -> float:
    """Bound on the integral of |f1 f2 psi_m psi_n| outside [-r, r]^d."""
    bb = 4 * (b1.B + b2.B)
    mm, nn = (max(m) if m else 0), (max(n) if n else 0)
    p1 = 16.0 * (4.0 * d) ** (bb / 2.0) * (mm + bb) ** (2 * bb) if bb else 16.0
    p2 = 4.0 * d * (nn + 2) ** 4
    return b1.A * b2.A * math.sqrt(p1) * math.sqrt(p2) / (r * r)


def qmc_inner_product(
    f1,
    f2,
    comb1: BasisCombination,
    comb2: BasisCombination,
    r: float,
    M: int,
    d: int = 1,
    bounds1: FactorBounds | None = None,
    bounds2: FactorBounds | None = None,
) -> tuple[complex, float]:
    """Quasi-Monte Carlo estimate of integral f1 conj(f2) Psi1 Psi2 over R^d
    with a certified budget.

    Psi_i is the finite Hermite combination comb_i. The budget is the
    rescaled Koksma-Hlawka bound over [-r, r]^d (star discrepancy times the
    product of A_r norms of all four factors) plus the polynomial-growth
    tail bound outside the box.
    """
    if M < 1:
        raise ValueError("sample count M must be >= 1")
    if r <= 0:
        raise ValueError("box half-width must be positive")
    bounds1 = bounds1 or FactorBounds.one()
    bounds2 = bounds2 or FactorBounds.one()
    pts = 2.0 * r * halton_points(d, M) - r
    mmax = 0
    for comb in (comb1, comb2):
        for m in comb:
            mmax = max(mmax, max(m) if m else 0)
    axis_vals = [hermite_values(mmax, pts[:, ax]) for ax in range(d)]

    def comb_values(comb):
        total = np.zeros(M, dtype=complex)
        for m, c in comb.items():
            prod = axis_vals[0][m[0]].copy()
            for ax in range(1, d):
                prod = prod * axis_vals[ax][m[ax]]
            total += c * prod
        return total

    vals = comb_values(comb1) * np.conj(comb_values(comb2))
    if f1 is not None:
        vals = vals * np.asarray(f1(pts[:, 0] if d == 1 else pts))
    if f2 is not None:
        vals = vals * np.conj(np.asarray(f2(pts[:, 0] if d == 1 else pts)))
    value = (2.0 * r) ** d * complex(vals.mean())

    disc = star_discrepancy_budget(d, M)
    kh = 0.0
    tail = 0.0
    for m1, c1 in comb1.items():
        for m2, c2 in comb2.items():
            w = abs(c1) * abs(c2)
            kh += w * hermite_ar_norm(m1, r, d) * hermite_ar_norm(m2, r, d)
            tail += w * _tail_budget(bounds1, bounds2, m1, m2, r, d)
    kh *= (2.0 * r) ** d * disc * bounds1.ar_norm(r) * bounds2.ar_norm(r)
    return value, kh + tail


# -- analytic path -----------------------------------------------------------

_QCOEFF_CAP = 60  # explicit Q_m coefficients overflow beyond this


def _q_coefficients(mmax: int) -> list[np.ndarray]:
    """Polynomial coefficients of Q_m with psi_m = Q_m exp(-x^2/2)."""
    if mmax > _QCOEFF_CAP:
        raise ValueError(
            f"analytic path supports basis indices <= {_QCOEFF_CAP}"
        )
    qs = [np.array([math.pi**-0.25])]
    if mmax >= 1:
        qs.append(np.array([0.0, math.sqrt(2.0) * math.pi**-0.25]))
    for m in range(1, mmax):
        shifted = np.concatenate(([0.0], qs[m])) * math.sqrt(2.0 / (m + 1))
        prev = qs[m - 1] * math.sqrt(m / (m + 1))
        width = max(len(shifted), len(prev))
        nxt = np.zeros(width)
        nxt[: len(shifted)] += shifted
        nxt[: len(prev)] -= prev
        qs.append(nxt)
    return qs


def gaussian_box_moment(a: int, r: float, taylor_tol: float = 1e-16) -> tuple[float, float]:
    """(value, budget) for integral_{-r}^{r} x^a exp(-x^2) dx.

    Reduced by parts to the a = 0 case, which integrates the truncated
    Taylor series of exp(-x^2) with a certified factorial tail (valid for
    N + 2 > r^2). Odd moments vanish by symmetry.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if a % 2 == 1:
        return 0.0, 0.0
    if r * r > 30.0:
        raise ValueError("analytic-path moments require r^2 <= 30")
    # I_0 by termwise integration of the Taylor series
    total, term_bound = 0.0, 0.0
    n_terms = 1
    while n_terms + 2 <= r * r or True:
        k = n_terms - 1
        term = (-1.0) ** k * r ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1))
        total += 2.0 * term
        term_bound = max(term_bound, abs(term))
        n_terms += 1
        if n_terms + 1 > r * r:
            tail = (
                2.0
                * r
                * r ** (2 * n_terms)
                / math.factorial(n_terms)
                / (1.0 - r * r / (n_terms + 2))
            )
            if tail < taylor_tol * max(total, 1.0) or n_terms > 400:
                break
    budget = tail + 16.0 * np.finfo(float).eps * term_bound * n_terms
    value, err = total, budget
    # integration by parts: I_a = ((a-1) I_{a-2} - 2 r^{a-1} e^{-r^2}) / 2
    for aa in range(2, a + 1, 2):
        value = ((aa - 1) * value - 2.0 * r ** (aa - 1) * math.exp(-r * r)) / 2.0
        err = (aa - 1) * err / 2.0 + 8.0 * np.finfo(float).eps * abs(value)
    return value, err


def analytic_inner_product(
    series_a,
    series_b,
    m: int,
    n: int,
    r: float,
    truncation: int,
    decay_dr: float,
) -> tuple[complex, float]:
    """(value, budget) for integral_{-r}^{r} a(x) conj(b(x)) psi_m psi_n dx
    from power-series coefficients (one dimension).

    series_a, series_b map exponent -> coefficient; coefficients beyond the
    truncation order are covered by the geometric tail bound driven by
    decay_dr (|a^t| <= d_r (r+1)^{-t} style), and the Gaussian moments carry
    their own Taylor-tail budgets.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    qs = _q_coefficients(max(m, n))
    qm, qn = qs[m], qs[n]
    prod = np.convolve(qm, qn)  # psi_m psi_n = prod(x) exp(-x^2)
    moments: dict[int, tuple[float, float]] = {}

    def moment(p: int) -> tuple[float, float]:
        if p not in moments:
            moments[p] = gaussian_box_moment(p, r)
        return moments[p]

    value = 0.0 + 0.0j
    budget = 0.0
    for t in range(truncation + 1):
        at = complex(series_a(t)) if callable(series_a) else complex(series_a.get(t, 0.0))
        if at == 0:
            continue
        for s in range(truncation + 1):
            bs = complex(series_b(s)) if callable(series_b) else complex(series_b.get(s, 0.0))
            if bs == 0:
                continue
            c = at * np.conj(bs)
            for p, q in enumerate(prod):
                if q == 0.0:
                    continue
                mv, me = moment(t + s + p)
                value += c * q * mv
                budget += abs(c) * abs(q) * me
    # series tail over the box: |x^{t+s} psi_m psi_n| integrates to <= r^{t+s}
    tau = r / (r + 1.0)
    tail = decay_dr**2 * (tau ** (truncation + 1) / (1.0 - tau)) ** 2
    return value, budget + tail


# -- coefficient model -------------------------------------------------------


@dataclass(frozen=True)
class PolynomialCoefficient:
    """Finite sum c_mono x^mono with exact recurrence propagation."""

    monomials: tuple  # ((mono tuple, complex), ...)

    @staticmethod
    def from_1d(coeffs) -> "PolynomialCoefficient":
        return PolynomialCoefficient(
            tuple(((i,), complex(c)) for i, c in enumerate(coeffs) if c != 0)
        )

    def degree(self) -> int:
        return max((max(mono) for mono, _ in self.monomials), default=0)

    def degree_l1(self) -> int:
        return max((sum(mono) for mono, _ in self.monomials), default=0)

    def conjugate(self) -> "PolynomialCoefficient":
        return PolynomialCoefficient(
            tuple((mono, np.conj(c)) for mono, c in self.monomials)
        )

    def derivative(self, axis: int) -> "PolynomialCoefficient":
        out = []
        for mono, c in self.monomials:
            if mono[axis] == 0:
                continue
            new = mono[:axis] + (mono[axis] - 1,) + mono[axis + 1 :]
            out.append((new, c * mono[axis]))
        return PolynomialCoefficient(tuple(out))

    def apply(self, v: BasisCombination) -> BasisCombination:
        out: BasisCombination = {}
        for mono, c in self.monomials:
            piece = apply_monomial(mono, v)
            for mm, cc in piece.items():
                out[mm] = out.get(mm, 0.0) + c * cc
        return {mm: cc for mm, cc in out.items() if cc != 0.0}

    def bounds(self, d: int) -> FactorBounds:
        abs_sum = sum(abs(c) for _, c in self.monomials)

        def ar(r: float) -> float:
            sup = sum(abs(c) * r ** sum(mono) for mono, c in self.monomials)
            tv = 0.0
            for axis in range(d):
                dp = self.derivative(axis)
                tv += 2.0 * r * sum(
                    abs(c) * r ** sum(mono) for mono, c in dp.monomials
                )
            return sup + _sigma(d) * tv

        bdeg = max((self.degree_l1() + 1) // 2, 0)
        return FactorBounds(ar_norm=ar, A=max(abs_sum, 1.0), B=bdeg)


@dataclass(frozen=True)
class SampleCoefficient:
    """Black-box coefficient with declared variation and growth bounds."""

    name: str
    fn: Callable
    sup: float
    tv_bound: Callable[[float], float]
    A: float
    B: int
    conjugated: bool = False

    def conjugate(self) -> "SampleCoefficient":
        return SampleCoefficient(
            self.name, self.fn, self.sup, self.tv_bound, self.A, self.B,
            conjugated=not self.conjugated,
        )

    def values(self, x):
        v = np.asarray(self.fn(x), dtype=complex)
        return np.conj(v) if self.conjugated else v

    def bounds(self, d: int) -> FactorBounds:
        return FactorBounds(
            ar_norm=lambda r: self.sup + _sigma(d) * self.tv_bound(r),
            A=self.A,
            B=self.B,
        )


SAMPLE_REGISTRY = {
    "cos": dict(fn=np.cos, sup=1.0, tv_bound=lambda r: 4.0 * (r / math.pi + 1.0),
                A=1.0, B=0),
    "tanh": dict(fn=np.tanh, sup=1.0, tv_bound=lambda r: 2.0, A=1.0, B=0),
    "gauss": dict(fn=lambda x: np.exp(-np.asarray(x) ** 2), sup=1.0,
                  tv_bound=lambda r: 2.0, A=1.0, B=0),
    "rational1": dict(fn=lambda x: 1.0 / (1.0 + np.asarray(x) ** 2), sup=1.0,
                      tv_bound=lambda r: 2.0, A=1.0, B=0),
}


def sample_coefficient(name: str) -> SampleCoefficient:
    if name not in SAMPLE_REGISTRY:
        raise ValueError(f"unknown sample coefficient {name!r}")
    return SampleCoefficient(name=name, **SAMPLE_REGISTRY[name])


@dataclass
class DiffOpSpec:
    """Description of T = sum_{|k| <= order} a_k(x) d^k on L2(R^dim).

    coeffs maps the derivative multi-index k to a list of coefficient terms
    (PolynomialCoefficient or SampleCoefficient, summed). Adjoint
    coefficients are derived exactly for polynomial terms and for
    derivative-free sample terms; other sample terms require
    adjoint_coeffs to be supplied.
    """

    dim: int
    order: int
    coeffs: dict
    adjoint_coeffs: dict | None = None
    growth: ResolventGrowth | None = None
    self_adjoint: bool | None = None
    name: str = "diffop"

    def __post_init__(self):
        for k, terms in self.coeffs.items():
            if len(k) != self.dim:
                raise ValueError("coefficient multi-index has wrong dimension")
            if max(k, default=0) > self.order:
                raise ValueError("derivative order exceeds declared order")
            if not isinstance(terms, (list, tuple)):
                self.coeffs[k] = [terms]
        if self.adjoint_coeffs is None:
            self.adjoint_coeffs = derive_adjoint(self)
        else:
            for k, terms in self.adjoint_coeffs.items():
                if not isinstance(terms, (list, tuple)):
                    self.adjoint_coeffs[k] = [terms]
        if self.self_adjoint is None:
            self.self_adjoint = _looks_self_adjoint(self)
        if self.growth is None:
            self.growth = ResolventGrowth.identity()
        self._assemblers: dict = {}

    def is_polynomial(self) -> bool:
        return all(
            isinstance(t, PolynomialCoefficient)
            for terms in self.coeffs.values()
            for t in terms
        )

    def assembler(self, n: int, r: float | None = None, M: int | None = None,
                  eps: float | None = None) -> "GramAssembler":
        key = (n, r, M, eps)
        if key not in self._assemblers:
            self._assemblers[key] = GramAssembler(self, n, r=r, M=M, eps=eps)
        return self._assemblers[key]


def derive_adjoint(spec: DiffOpSpec) -> dict:
    """Formal adjoint coefficients: (a d^k)* = (-1)^{|k|_1} d^k (conj(a) .),
    expanded by the Leibniz rule for polynomial a; derivative-free sample
    terms contribute their conjugate directly."""
    out: dict = {}

    def add(k, term):
        out.setdefault(k, []).append(term)

    for k, terms in spec.coeffs.items():
        for term in terms:
            if isinstance(term, SampleCoefficient):
                if sum(k) != 0:
                    raise ValueError(
                        "sample coefficients on derivative terms need "
                        "explicit adjoint_coeffs"
                    )
                add(k, term.conjugate())
                continue
            sign = (-1.0) ** sum(k)
            abar = term.conjugate()
            for j in np.ndindex(*[ki + 1 for ki in k]):
                j = tuple(int(v) for v in j)
                binom = 1.0
                deriv = abar
                for axis in range(spec.dim):
                    binom *= math.comb(k[axis], j[axis])
                    for _ in range(k[axis] - j[axis]):
                        deriv = deriv.derivative(axis)
                if not deriv.monomials:
                    continue
                scaled = PolynomialCoefficient(
                    tuple((mono, sign * binom * c) for mono, c in deriv.monomials)
                )
                add(j, scaled)
    return out


def _poly_sum(terms) -> dict:
    acc: dict = {}
    for t in terms:
        if not isinstance(t, PolynomialCoefficient):
            return None
        for mono, c in t.monomials:
            acc[mono] = acc.get(mono, 0.0) + c
    return acc


def _looks_self_adjoint(spec: DiffOpSpec) -> bool:
    for k in set(spec.coeffs) | set(spec.adjoint_coeffs):
        a = spec.coeffs.get(k, [])
        b = spec.adjoint_coeffs.get(k, [])
        pa, pb = _poly_sum(a), _poly_sum(b)
        if pa is None or pb is None:
            sa = [t for t in a if isinstance(t, SampleCoefficient)]
            sb = [t for t in b if isinstance(t, SampleCoefficient)]
            names_a = sorted((t.name, t.conjugated) for t in sa)
            names_b = sorted((t.name, not t.conjugated) for t in sb)
            if names_a != names_b:
                return False
            pa = _poly_sum([t for t in a if isinstance(t, PolynomialCoefficient)])
            pb = _poly_sum([t for t in b if isinstance(t, PolynomialCoefficient)])
        keys = set(pa) | set(pb)
        if any(abs(pa.get(mm, 0.0) - pb.get(mm, 0.0)) > 0.0 for mm in keys):
            return False
    return True


def _band_width(spec: DiffOpSpec) -> int:
    """Each term a_k d^k moves a shell index by at most |k|_1 + deg(a_k)."""
    width = 0
    for coeffs in (spec.coeffs, spec.adjoint_coeffs):
        for k, terms in coeffs.items():
            for t in terms:
                deg = t.degree_l1() if isinstance(t, PolynomialCoefficient) else 0
                width = max(width, sum(k) + deg)
    return width


# -- assembly ----------------------------------------------------------------

SAMPLE_CAP = 1 << 22
BOX_CAP = 64.0
_CHUNK = 1 << 16


@dataclass
class GramPair:
    w: np.ndarray
    v: np.ndarray
    entry_budget: float
    params: dict


class GramAssembler:
    """z-independent assembly of the Gram data for W_n(z) and V_n(z).

    W(z) = G2 - conj(z) G1 - z G1* + |z|^2 I with G1 = <T e_j, e_i> and
    G2 = <T e_j, T e_i>; the adjoint side analogously from T*. Exact
    (polynomial) parts flow through the recurrences and orthonormality;
    sample parts through shared QMC moment matrices.
    """

    def __init__(self, spec: DiffOpSpec, n: int, r: float | None = None,
                 M: int | None = None, eps: float | None = None):
        self.spec = spec
        self.n = n
        d = spec.dim
        self.index_map = hermite_enumerate(d, n)
        width = _band_width(spec)
        # expansion indices live within `width` extra shells
        t_top = max(max(m) for m in self.index_map.multis) + width
        self.mx = shell_size(d, t_top)
        self.full_map = hermite_enumerate(d, self.mx)
        self._choose_box_and_samples(r, M, eps)
        self._build_exact_parts()
        self._build_moments()
        self._combine()

    # box half-width must clear the Gaussian support of every basis index
    def _min_box(self) -> float:
        t_top = max(max(m) for m in self.full_map.multis)
        return math.sqrt(2.0 * (t_top + 1)) + 4.0

    def _sample_terms(self):
        for k, terms in sorted(self.spec.coeffs.items()):
            for t in terms:
                if isinstance(t, SampleCoefficient):
                    yield ("w", k, t)
        for k, terms in sorted(self.spec.adjoint_coeffs.items()):
            for t in terms:
                if isinstance(t, SampleCoefficient):
                    yield ("v", k, t)

    def _choose_box_and_samples(self, r, M, eps):
        has_samples = any(True for _ in self._sample_terms())
        self.r = max(r, self._min_box()) if r is not None else self._min_box()
        self.M = int(M) if M is not None else (1 << 20 if has_samples else 0)
        self.eps = eps
        if eps is None or not has_samples:
            return
        # monotone search: grow r until the tail fits, then M until the
        # Koksma-Hlawka piece fits
        worst = self._worst_factor_bounds()
        while self._tail_at(self.r, worst) > eps / 2.0:
            if self.r >= BOX_CAP:
                raise BudgetInfeasibleError(
                    f"tail budget {self._tail_at(self.r, worst):.3e} > eps/2 "
                    f"at box cap r = {BOX_CAP}",
                    binding="box_cap",
                )
            self.r = min(self.r * 1.5, BOX_CAP)
        while self._kh_at(self.r, self.M, worst) > eps / 2.0:
            if self.M >= SAMPLE_CAP:
                raise BudgetInfeasibleError(
                    f"Koksma-Hlawka budget {self._kh_at(self.r, self.M, worst):.3e} "
                    f"> eps/2 at sample cap M = {SAMPLE_CAP}",
                    binding="sample_cap",
                )
            self.M = min(self.M * 2, SAMPLE_CAP)

    def _worst_factor_bounds(self) -> FactorBounds:
        worst = FactorBounds.one()
        best = 1.0
        for _, _, t in self._sample_terms():
            b = t.bounds(self.spec.dim)
            score = b.ar_norm(self._min_box())
            if score > best:
                worst, best = b, score
        return worst

    def _lr_top(self, r: float) -> float:
        top = self.full_map.multis[-1]
        return hermite_ar_norm(top, r, self.spec.dim)

    def _tail_at(self, r, worst: FactorBounds) -> float:
        top = self.full_map.multis[-1]
        return _tail_budget(worst, worst, top, top, r, self.spec.dim)

    def _kh_at(self, r, M, worst: FactorBounds) -> float:
        d = self.spec.dim
        if M == 0:
            return 0.0
        return (
            (2.0 * r) ** d
            * star_discrepancy_budget(d, M)
            * worst.ar_norm(r) ** 2
            * self._lr_top(r) ** 2
        )

    def _expand_columns(self, coeffs: dict) -> tuple[np.ndarray, dict]:
        """Exact expansion matrix (mx x n) of the polynomial part, plus the
        raw derivative-word expansions for each sample term."""
        n, mx = self.n, self.mx
        lmat = np.zeros((mx, n), dtype=complex)
        sample_words: dict = {}
        for j in range(1, n + 1):
            base = {self.index_map.multi(j): 1.0}
            for k, terms in coeffs.items():
                dk = apply_derivative_word(k, base)
                for t in terms:
                    if isinstance(t, PolynomialCoefficient):
                        piece = t.apply(dk)
                        for m, c in piece.items():
                            lmat[self.full_map.index(m) - 1, j - 1] += c
                    else:
                        u = sample_words.setdefault(
                            (k, t.name, t.conjugated),
                            (t, np.zeros((mx, n), dtype=complex)),
                        )[1]
                        for m, c in dk.items():
                            u[self.full_map.index(m) - 1, j - 1] += c
        return lmat, sample_words

    def _build_exact_parts(self):
        self.lmat_w, self.samples_w = self._expand_columns(self.spec.coeffs)
        self.lmat_v, self.samples_v = self._expand_columns(self.spec.adjoint_coeffs)

    def _build_moments(self):
        """Q[f][mu, nu] = integral f psi_mu psi_nu and the pair moments
        Q2[(f, g)][mu, nu] = integral f conj(g) psi_mu psi_nu over the box,
        shared across all entries; one-dimensional fast path is vectorized
        over Halton chunks."""
        terms = {}
        for _, _, t in self._sample_terms():
            terms[(t.name, t.conjugated)] = t
        self.moments1: dict = {}
        self.moments2: dict = {}
        self.moment_budget1: dict = {}
        self.moment_budget2: dict = {}
        if not terms:
            return
        if self.spec.dim != 1:
            raise NotImplementedError(
                "sample-coefficient assembly is implemented for dimension 1"
            )
        mx, r, M = self.mx, self.r, self.M
        keys = sorted(terms)
        acc1 = {k: np.zeros((mx, mx)) for k in keys}
        acc1 = {k: acc1[k].astype(complex) for k in keys}
        pairs = [(a, b) for i, a in enumerate(keys) for b in keys[i:]]
        acc2 = {p: np.zeros((mx, mx), dtype=complex) for p in pairs}
        done = 0
        while done < M:
            count = min(_CHUNK, M - done)
            pts = 2.0 * r * halton_points(1, count, start=done + 1)[:, 0] - r
            h = hermite_values(mx - 1, pts)
            fvals = {k: terms[k].values(pts) for k in keys}
            for k in keys:
                acc1[k] += (h * fvals[k]) @ h.T
            for a, b in pairs:
                acc2[(a, b)] += (h * (fvals[a] * np.conj(fvals[b]))) @ h.T
            done += count
        scale = 2.0 * r / M
        disc = star_discrepancy_budget(1, M)
        lr = np.array(
            [hermite_ar_norm(m, r, 1) for m in self.full_map.multis]
        )
        for k in keys:
            self.moments1[k] = acc1[k] * scale
            b = terms[k].bounds(1)
            kh = 2.0 * r * disc * b.ar_norm(r) * np.outer(lr, lr)
            tails = np.empty((mx, mx))
            for i, mi in enumerate(self.full_map.multis):
                for j, mj in enumerate(self.full_map.multis):
                    tails[i, j] = _tail_budget(b, FactorBounds.one(), mi, mj, r, 1)
            self.moment_budget1[k] = kh + tails
        for a, b in pairs:
            self.moments2[(a, b)] = acc2[(a, b)] * scale
            ba, bb = terms[a].bounds(1), terms[b].bounds(1)
            kh = 2.0 * r * disc * ba.ar_norm(r) * bb.ar_norm(r) * np.outer(lr, lr)
            tails = np.empty((mx, mx))
            for i, mi in enumerate(self.full_map.multis):
                for j, mj in enumerate(self.full_map.multis):
                    tails[i, j] = _tail_budget(ba, bb, mi, mj, r, 1)
            self.moment_budget2[(a, b)] = kh + tails

    def _moment2(self, key_a, key_b):
        if (key_a, key_b) in self.moments2:
            return self.moments2[(key_a, key_b)], self.moment_budget2[(key_a, key_b)]
        m, b = self.moments2[(key_b, key_a)], self.moment_budget2[(key_b, key_a)]
        return m.conj().T, b.T

    def _side(self, lmat, samples):
        """G1, G2 and their budget matrices for one side."""
        n = self.n
        g1 = lmat[:n, :].copy()
        g2 = lmat.conj().T @ lmat
        b1 = np.zeros((n, n))
        b2 = np.zeros((n, n))
        for (k, name, conj_flag), (term, u) in samples.items():
            key = (name, conj_flag)
            q1, q1b = self.moments1[key], self.moment_budget1[key]
            au = np.abs(u)
            al = np.abs(lmat)
            g1 += (q1 @ u)[:n, :]
            b1 += (q1b @ au)[:n, :]
            cross = lmat.conj().T @ (q1 @ u)
            g2 += cross + cross.conj().T
            bc = al.T @ (q1b @ au)
            b2 += bc + bc.T
            for (k2, name2, conj2), (term2, u2) in samples.items():
                q2, q2b = self._moment2((name, conj_flag), (name2, conj2))
                g2 += u.conj().T @ (q2.conj().T @ u2)
                b2 += au.T @ (q2b.T @ np.abs(u2))
        return g1, g2, b1, b2

    def _combine(self):
        self.g1_w, self.g2_w, self.b1_w, self.b2_w = self._side(
            self.lmat_w, self.samples_w
        )
        self.g1_v, self.g2_v, self.b1_v, self.b2_v = self._side(
            self.lmat_v, self.samples_v
        )

    def gram_pair(self, z: complex) -> GramPair:
        z = complex(z)
        n = self.n
        eye = np.eye(n)

        def build(g1, g2, conj_first):
            zz = np.conj(z) if conj_first else z
            w = g2 - zz * g1 - np.conj(zz) * g1.conj().T + abs(z) ** 2 * eye
            return 0.5 * (w + w.conj().T)

        w = build(self.g1_w, self.g2_w, conj_first=True)
        v = build(self.g1_v, self.g2_v, conj_first=False)
        budget = 0.0
        for b1, b2 in ((self.b1_w, self.b2_w), (self.b1_v, self.b2_v)):
            if b1.size:
                budget = max(
                    budget, float((b2 + 2.0 * abs(z) * b1).max(initial=0.0))
                )
        # roundoff model for the exact path (documented: not interval bounds)
        scale = max(float(np.abs(self.g2_w).max(initial=1.0)), 1.0)
        budget += 64.0 * np.finfo(float).eps * scale
        return GramPair(
            w=w, v=v, entry_budget=budget,
            params={"r": self.r, "M": self.M, "n": n},
        )


def assemble_gram(
    spec: DiffOpSpec,
    z: complex,
    n: int,
    eps: float | None = None,
    r: float | None = None,
    M: int | None = None,
) -> GramPair:
    """Entrywise-certified Gram pair (W_n(z), V_n(z)).

    With eps given, the box half-width and sample count are grown until the
    per-entry budget fits (raising BudgetInfeasibleError, naming the binding
    cap, when it cannot); otherwise the supplied or default r and M are used
    and the achieved budget is reported.
    """
    asm = spec.assembler(n, r=r, M=M, eps=eps)
    pair = asm.gram_pair(z)
    if eps is not None and pair.entry_budget > eps:
        raise BudgetInfeasibleError(
            f"achieved entry budget {pair.entry_budget:.3e} exceeds eps = {eps:.3e}",
            binding="sample_cap",
        )
    return pair


@dataclass(frozen=True)
class DiffOpGamma:
    value: float
    upsilon: float
    entry_budget: float
    certified: bool
    n: int


def diffop_gamma(
    spec: DiffOpSpec,
    z: complex,
    n: int,
    certified: bool = True,
    resolution: float | None = None,
    margin: float | None = None,
    r: float | None = None,
    M: int | None = None,
    _warm: list | None = None,
) -> DiffOpGamma:
    """gamma_n(z, T) = upsilon_n(z, T) + 1/n from the Gram truncations.

    In certified mode the assembly must meet the per-entry budget
    eps = 1/(2 n^3) (so n * eps <= 1/(2 n^2)) and the returned value
    dominates 1/||R(z, T)||. With certified=False the numerically assembled
    Gram pair is used as-is and the certified budget is only reported; this
    is the mode for coefficient paths whose honest Koksma-Hlawka budgets
    are far above the observed quadrature error.
    """
    eps = 1.0 / (2.0 * n**3) if certified else None
    asm = spec.assembler(n, r=r, M=M, eps=eps)
    pair = asm.gram_pair(z)
    if certified and pair.entry_budget > 1.0 / (2.0 * n**3):
        raise BudgetInfeasibleError(
            f"entry budget {pair.entry_budget:.3e} exceeds 1/(2n^3); "
            "rerun with certified=False to proceed with reported budgets",
            binding="sample_cap",
        )
    res = resolution if resolution is not None else 1.0 / (2.0 * n * n)
    lower, upper = 0.0, None
    if _warm and _warm[0] is not None:
        lam_prev, dz = _warm
        lower = max(math.sqrt(max(lam_prev, 0.0)) - dz, 0.0) ** 2 - res
        upper = (math.sqrt(max(lam_prev, 0.0)) + dz) ** 2 + res
    tau = roundoff_tau(pair.w)
    lam = smallest_eigenvalue_bound(
        pair.w, res, upper=upper, lower=max(lower, 0.0), tau=tau
    )
    if not (spec.self_adjoint and z.imag == 0.0):
        lam_v = smallest_eigenvalue_bound(
            pair.v, res, upper=upper, lower=max(lower, 0.0), tau=roundoff_tau(pair.v)
        )
        lam = min(lam, lam_v)
    upsilon = math.sqrt(max(lam, 0.0))
    if margin is None:
        margin = 1.0 / n if certified else math.sqrt(res)
    if _warm is not None:
        _warm[0] = lam
    return DiffOpGamma(
        value=upsilon + margin,
        upsilon=upsilon,
        entry_budget=pair.entry_budget,
        certified=certified,
        n=n,
    )


def diffop_gamma_over_points(spec, points, n, **kwargs) -> dict[complex, DiffOpGamma]:
    out: dict[complex, DiffOpGamma] = {}
    warm = [None, 0.0]
    prev = None
    for z in points:
        z = complex(z)
        if z in out:
            continue
        warm[1] = abs(z - prev) if prev is not None else 0.0
        if prev is None:
            warm[0] = None
        out[z] = diffop_gamma(spec, z, n, _warm=warm, **kwargs)
        prev = z
    return out


def diffop_spectrum(
    spec: DiffOpSpec,
    n: int,
    window: tuple | None = None,
    grid_spacing: float | None = None,
    quantizer_n: int | None = None,
    certified: bool = True,
    resolution: float | None = None,
    r: float | None = None,
    M: int | None = None,
) -> CertifiedPointSet:
    """Certified spectrum of a differential operator through the Gram path."""
    grid = _grid_for(n, window, grid_spacing)
    qn = quantizer_n if quantizer_n is not None else grid.n
    pts = grid.points()
    ests = diffop_gamma_over_points(
        spec, pts, n, certified=certified, resolution=resolution, r=r, M=M
    )
    gammas = {z: e.value for z, e in ests.items()}
    out = comp_spec_core(gammas, grid, spec.growth, qn)
    out.params.update(
        {
            "n": n,
            "certified": certified,
            "entry_budget": max((e.entry_budget for e in ests.values()), default=0.0),
        }
    )
    return out


def diffop_pseudospectrum(
    spec: DiffOpSpec,
    n: int,
    eps: float,
    window: tuple | None = None,
    grid_spacing: float | None = None,
    certified: bool = True,
    resolution: float | None = None,
    r: float | None = None,
    M: int | None = None,
    full_grid: bool = False,
) -> PseudoSpectrumResult:
    """Grid sublevel set of the diffop gamma (inside Sp_eps when certified)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    grid = _grid_for(n, window, grid_spacing)
    pts = grid.points()
    ests = diffop_gamma_over_points(
        spec, pts, n, certified=certified, resolution=resolution, r=r, M=M
    )
    sub = sorted(
        (z for z in pts if ests[z].value < eps), key=lambda w: (w.real, w.imag)
    )
    result = PseudoSpectrumResult(
        points=sub,
        gammas=[ests[z].value for z in sub],
        eps=eps,
        n=n,
        windowed=window is not None,
    )
    if full_grid:
        allpts = sorted(pts, key=lambda w: (w.real, w.imag))
        result.grid_points = allpts
        result.grid_gammas = [ests[z].value for z in allpts]
    return result


# -- banded matrix oracle for polynomial coefficients -------------------------


class HermiteMatrixOracle(OperatorOracle):
    """Exact matrix of an all-polynomial differential operator in the
    enumerated Hermite basis: banded with zero dispersion, so the
    rectangular-truncation machinery applies directly."""

    def __init__(self, spec: DiffOpSpec, max_index: int = 4096):
        super().__init__()
        if not spec.is_polynomial():
            raise ValueError("matrix oracle requires polynomial coefficients")
        self.spec = spec
        self.name = f"hermite[{spec.name}]"
        d = spec.dim
        self.width = _band_width(spec)
        self.index_map = hermite_enumerate(d, max_index)
        self._columns: dict[int, dict] = {}
        self._adj_columns: dict[int, dict] = {}
        self.real_entries = all(
            complex(c).imag == 0.0
            for ts in spec.coeffs.values()
            for t in ts
            for _, c in t.monomials
        )
        self.is_self_adjoint = bool(spec.self_adjoint)

    def _column(self, j: int, adjoint: bool) -> dict:
        cache = self._adj_columns if adjoint else self._columns
        if j not in cache:
            coeffs = self.spec.adjoint_coeffs if adjoint else self.spec.coeffs
            base = {self.index_map.multi(j): 1.0}
            out: BasisCombination = {}
            for k, terms in coeffs.items():
                dk = apply_derivative_word(k, base)
                for t in terms:
                    for m, c in t.apply(dk).items():
                        out[m] = out.get(m, 0.0) + c
            cache[j] = {
                self.index_map.index(m): c for m, c in out.items() if c != 0.0
            }
        return cache[j]

    def entry(self, i: int, j: int) -> complex:
        return self._column(j, adjoint=False).get(i, 0.0)

    def adjoint_entry(self, i: int, j: int) -> complex:
        return self._column(j, adjoint=True).get(i, 0.0)

    def dispersion_f(self, n: int) -> int:
        d = self.spec.dim
        t = 0
        while shell_size(d, t) < n:
            t += 1
        return shell_size(d, t + self.width)

    def dispersion_c(self, n: int) -> float:
        return 0.0

    def _build(self, rows, cols, adjoint):
        out = np.zeros((rows, cols), dtype=complex)
        for j in range(1, cols + 1):
            for i, c in self._column(j, adjoint).items():
                if i <= rows:
                    out[i - 1, j - 1] = c
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = out.real.copy()
        return out


def hermite_matrix_oracle(spec: DiffOpSpec, max_index: int = 4096) -> HermiteMatrixOracle:
    return HermiteMatrixOracle(spec, max_index=max_index)


# -- convenience constructors --------------------------------------------------


def schroedinger_1d(potential_terms, name="schroedinger") -> DiffOpSpec:
    """-d^2/dx^2 + V(x) on L2(R) from a list of potential terms."""
    coeffs = {
        (2,): [PolynomialCoefficient.from_1d([-1.0])],
        (0,): list(potential_terms),
    }
    return DiffOpSpec(dim=1, order=2, coeffs=coeffs, name=name)


def validate_growth_bounds(spec: DiffOpSpec, samples: int = 200,
                           seed: int = 0, span: float = 12.0) -> None:
    """Spot-check |a_k(x)| <= A_k (1 + |x|^{2 B_k}) on random samples for
    every coefficient term; raises ValueError on a violated declaration."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-span, span, size=samples)
    for coeffs in (spec.coeffs, spec.adjoint_coeffs):
        for k, terms in coeffs.items():
            for t in terms:
                b = t.bounds(spec.dim)
                if isinstance(t, SampleCoefficient):
                    vals = np.abs(np.asarray(t.fn(xs), dtype=complex))
                else:
                    vals = np.zeros(samples)
                    for mono, c in t.monomials:
                        vals = vals + abs(c) * np.abs(xs) ** sum(mono)
                cap = b.A * (1.0 + np.abs(xs) ** (2 * b.B))
                if np.any(vals > cap + 1e-9):
                    raise ValueError(
                        f"growth bound violated for coefficient {k} "
                        f"({getattr(t, 'name', 'polynomial')})"
                    )


def validate_series_decay(series: dict, d_r: float, r: int) -> None:
    """Spot-check |a^m| <= d_r (r + 1)^{-|m|} on the supplied coefficients."""
    for m, c in series.items():
        if abs(c) > d_r * (r + 1.0) ** (-m) + 1e-12:
            raise ValueError(f"series decay bound violated at exponent {m}")


def dilate(spec: DiffOpSpec, lam: float) -> DiffOpSpec:
    """Unitarily equivalent operator in the dilated frame x -> x / lam.

    Spectrum and pseudospectra are unchanged; matrix norms of high-degree
    polynomial coefficients shrink drastically, which keeps the inertia
    tests well-conditioned. Polynomial coefficients only.
    """
    if lam <= 0:
        raise ValueError("dilation must be positive")
    if not spec.is_polynomial():
        raise ValueError("dilation is implemented for polynomial coefficients")

    def transform(coeffs: dict) -> dict:
        out = {}
        for k, terms in coeffs.items():
            scale_k = lam ** sum(k)
            new_terms = []
            for t in terms:
                new_terms.append(
                    PolynomialCoefficient(
                        tuple(
                            (mono, c * scale_k * lam ** (-sum(mono)))
                            for mono, c in t.monomials
                        )
                    )
                )
            out[k] = new_terms
        return out

    return DiffOpSpec(
        dim=spec.dim,
        order=spec.order,
        coeffs=transform(spec.coeffs),
        adjoint_coeffs=transform(spec.adjoint_coeffs),
        growth=spec.growth,
        self_adjoint=spec.self_adjoint,
        name=f"{spec.name}@dilation{lam:g}",
    )


def auto_dilation(spec: DiffOpSpec, n: int, candidates=None) -> float:
    """Dilation factor minimizing the largest matrix entry of the band at
    column n (a cheap proxy for the truncation norm)."""
    if candidates is None:
        candidates = [1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0]
    best_lam, best_val = 1.0, math.inf
    for lam in candidates:
        orc = hermite_matrix_oracle(dilate(spec, lam), max_index=n + 64)
        col = orc._column(n, adjoint=False)
        val = max(abs(c) for c in col.values())
        if val < best_val:
            best_lam, best_val = lam, val
    return best_lam
