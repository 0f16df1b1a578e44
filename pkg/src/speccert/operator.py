"""Matrix-entry oracles for operators on l2(N), plus a zoo of test operators.

An oracle exposes 1-indexed matrix elements entry(i, j) = <A e_j, e_i>
together with the metadata the certified algorithms need: a dispersion
function f with f(n) >= n, a null sequence c_n bounding the off-range mass
||(I - P_f(n)) A P_n||, and a self-adjointness flag. Operators on l2(Z) are
folded to l2(N) with the fixed enumeration 0, 1, -1, 2, -2, ...

Declared dispersion bounds are trusted, not verified: every downstream
certificate is conditional on them (zoo members carry exact bounds; for
user-supplied oracles the caller owns the declaration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> int:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fold_index_to_site(i: int) -> int:
    """1-indexed l2(N) position -> l2(Z) site under 0, 1, -1, 2, -2, ..."""
    if i == 1:
        return 0
    if i % 2 == 0:
        return i // 2
    return -((i - 1) // 2)


class ResolventGrowth:
    """Family {g_m} with g_m(dist(z, Sp(A))) <= 1/||R(z, A)|| on B_m(0).

    Each g_m is strictly increasing and continuous with g_m(0) = 0,
    diverges at infinity, and is nonincreasing in m for fixed x.
    """

    def __init__(self, fn, name: str = "custom"):
        self._fn = fn
        self.name = name

    def g(self, m: int, x: float) -> float:
        return float(self._fn(m, x))

    @staticmethod
    def identity() -> "ResolventGrowth":
        """g_m(x) = x, valid for self-adjoint and normal operators."""
        return ResolventGrowth(lambda m, x: x, name="identity")

    @staticmethod
    def power(p: float) -> "ResolventGrowth":
        if p <= 0:
            raise ValueError("power must be positive")
        return ResolventGrowth(lambda m, x: x**p, name=f"power:{p}")


class OperatorOracle:
    """Base oracle; subclasses implement entry() and the dispersion data."""

    is_self_adjoint: bool = False
    real_entries: bool = False
    band: int | None = None  # exact half-bandwidth, when known
    name: str = "oracle"

    def __init__(self):
        self._section_cache: dict[tuple[str, int, int], np.ndarray] = {}

    def entry(self, i: int, j: int) -> complex:
        raise NotImplementedError

    def adjoint_entry(self, i: int, j: int) -> complex:
        return complex(np.conj(self.entry(j, i)))

    def dispersion_f(self, n: int) -> int:
        if self.band is None:
            raise NotImplementedError("oracle must define dispersion_f")
        return n + self.band

    def dispersion_c(self, n: int) -> float:
        return 0.0 if self.band is not None else self._dispersion_c(n)

    def _dispersion_c(self, n: int) -> float:
        raise NotImplementedError

    # -- dense sections ----------------------------------------------------

    def _build(self, rows: int, cols: int, adjoint: bool) -> np.ndarray:
        get = self.adjoint_entry if adjoint else self.entry
        out = np.zeros((rows, cols), dtype=complex)
        if self.band is not None:
            w = self.band
            for j in range(1, cols + 1):
                for i in range(max(1, j - w), min(rows, j + w) + 1):
                    out[i - 1, j - 1] = get(i, j)
        else:
            for j in range(1, cols + 1):
                for i in range(1, rows + 1):
                    out[i - 1, j - 1] = get(i, j)
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = out.real.copy()
        return out

    def rect_section(self, rows: int, cols: int) -> np.ndarray:
        """Dense P_rows A P_cols block (1..rows x 1..cols), cached."""
        key = ("a", rows, cols)
        if key not in self._section_cache:
            self._section_cache[key] = self._build(rows, cols, adjoint=False)
        return self._section_cache[key]

    def adjoint_rect_section(self, rows: int, cols: int) -> np.ndarray:
        key = ("adj", rows, cols)
        if key not in self._section_cache:
            self._section_cache[key] = self._build(rows, cols, adjoint=True)
        return self._section_cache[key]

    def section(self, n: int) -> np.ndarray:
        return self.rect_section(n, n)

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_section_cache"] = {}
        return state


@dataclass
class GraphOperator:
    """A = sum alpha(v, w) |v><w| over an enumerated vertex set.

    sparsity_S(n) bounds the interaction range: alpha(v_n, v_m) = 0 and
    alpha(v_m, v_n) = 0 whenever m > S(n).
    """

    alpha: object  # callable (i, j) -> complex over 1-indexed vertices
    sparsity_S: object  # callable n -> int
    is_self_adjoint: bool = False


class _GraphOracle(OperatorOracle):
    def __init__(self, g: GraphOperator):
        super().__init__()
        self.graph = g
        self.is_self_adjoint = g.is_self_adjoint
        self.name = "graph"

    def entry(self, i, j):
        return complex(self.graph.alpha(i, j))

    def dispersion_f(self, n):
        s = int(self.graph.sparsity_S(n))
        if s < n:
            raise ValueError(f"sparsity function violates S(n) >= n at n={n}")
        return s

    def dispersion_c(self, n):
        return 0.0

    def _build(self, rows, cols, adjoint):
        get = self.adjoint_entry if adjoint else self.entry
        out = np.zeros((rows, cols), dtype=complex)
        for j in range(1, cols + 1):
            for i in range(1, rows + 1):
                out[i - 1, j - 1] = get(i, j)
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = out.real.copy()
        return out


def graph_to_oracle(g: GraphOperator) -> OperatorOracle:
    """Induced l2(N) oracle with f(n) = S(n) and c_n = 0."""
    oracle = _GraphOracle(g)
    oracle.dispersion_f(1)  # validate early
    return oracle


# -- zoo ---------------------------------------------------------------------


class DiagonalOracle(OperatorOracle):
    is_self_adjoint = True
    real_entries = True
    band = 0

    def __init__(self, values, name="diagonal"):
        super().__init__()
        self.values = values
        self.name = name

    def entry(self, i, j):
        return float(self.values(i)) if i == j else 0.0

    def _build(self, rows, cols, adjoint):
        out = np.zeros((rows, cols))
        for k in range(1, min(rows, cols) + 1):
            out[k - 1, k - 1] = float(self.values(k))
        return out


@dataclass
class Reciprocal:
    def __call__(self, i: int) -> float:
        return 1.0 / i


@dataclass
class Periodic:
    pattern: tuple

    def __call__(self, i: int) -> float:
        return float(self.pattern[(i - 1) % len(self.pattern)])


@dataclass
class ListThenConstant:
    head: tuple
    tail: float

    def __call__(self, i: int) -> float:
        if i <= len(self.head):
            return float(self.head[i - 1])
        return float(self.tail)


@dataclass
class DyadicEnumeration:
    """0, 1, 1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, ... dense in [0, 1]."""

    def __call__(self, i: int) -> float:
        if i == 1:
            return 0.0
        if i == 2:
            return 1.0
        k = i - 2
        level = 1
        count = 1
        while k > count:
            k -= count
            level += 1
            count = 1 << (level - 1)
        return (2 * k - 1) / (1 << level)


class Laplacian1D(OperatorOracle):
    """Free Jacobi matrix on l2(N): ones off-diagonal; spectrum [-2, 2]."""

    is_self_adjoint = True
    real_entries = True
    band = 1
    name = "discrete_laplacian_1d"

    def entry(self, i, j):
        return 1.0 if abs(i - j) == 1 else 0.0


class AlmostMathieu(OperatorOracle):
    """(H x)_n = x_{n-1} + x_{n+1} + 2 lam cos(2 pi n alpha) x_n on l2(Z),

    folded to l2(N); pentadiagonal after folding, f(n) = n + 2. The perturbed
    variant adds V(n) = V_n / (|n| + 1) with V_n i.i.d. uniform on [-2, 2]
    drawn from a splitmix64 stream keyed by ``seed``.
    """

    is_self_adjoint = True
    real_entries = True
    band = 2

    def __init__(self, alpha: float, lam: float, seed: int | None = None):
        super().__init__()
        if not (0.0 <= alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if isinstance(lam, complex) and lam.imag != 0:
            raise ValueError("lam must be real")
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.seed = seed
        self.name = "almost_mathieu" if seed is None else "almost_mathieu_perturbed"

    def _potential(self, site: int) -> float:
        v = 2.0 * self.lam * math.cos(2.0 * math.pi * site * self.alpha)
        if self.seed is not None:
            i = 1 if site == 0 else (2 * site if site > 0 else -2 * site + 1)
            u = _splitmix64((self.seed & _MASK64) ^ (i * 0x9E3779B97F4A7C15 & _MASK64))
            v += (4.0 * (u / 2.0**64) - 2.0) / (abs(site) + 1)
        return v

    def entry(self, i, j):
        si, sj = fold_index_to_site(i), fold_index_to_site(j)
        if si == sj:
            return self._potential(si)
        if abs(si - sj) == 1:
            return 1.0
        return 0.0


class DirectSum(OperatorOracle):
    """Finite Hermitian head block followed by an infinite oracle tail."""

    def __init__(self, head_diagonal, tail: OperatorOracle, name=None):
        super().__init__()
        self.head = tuple(float(v) for v in head_diagonal)
        self.tail = tail
        self.m = len(self.head)
        self.band = max(0 if tail.band is None else tail.band, 0)
        if tail.band is None:
            raise ValueError("direct_sum requires a banded tail oracle")
        self.is_self_adjoint = tail.is_self_adjoint
        self.real_entries = tail.real_entries
        self.name = name or f"direct_sum({self.m})+{tail.name}"

    def entry(self, i, j):
        m = self.m
        if i <= m and j <= m:
            return self.head[i - 1] if i == j else 0.0
        if i > m and j > m:
            return self.tail.entry(i - m, j - m)
        return 0.0

    def dispersion_f(self, n):
        return n + self.band

    def dispersion_c(self, n):
        return 0.0


_ZOO_BUILDERS = {
    "diagonal",
    "diag_reciprocal",
    "diag_dyadic",
    "discrete_laplacian_1d",
    "almost_mathieu",
    "almost_mathieu_perturbed",
    "direct_sum_laplacian",
}


def zoo(name: str, params: dict | None = None) -> OperatorOracle:
    """Construct a named operator with known dispersion metadata.

    Names: diagonal (values=list, optional tail=const), diag_reciprocal,
    diag_dyadic, discrete_laplacian_1d, almost_mathieu(alpha, lam),
    almost_mathieu_perturbed(alpha, lam, seed),
    direct_sum_laplacian(head=[...]) for diag(head) (+) laplacian.
    """
    params = dict(params or {})
    if name == "diagonal":
        values = params.get("values")
        if values is None:
            raise ValueError("diagonal requires 'values'")
        if np.isscalar(values):
            values = [values]
        if "tail" in params:
            fn = ListThenConstant(tuple(values), float(params["tail"]))
        else:
            fn = Periodic(tuple(values))
        return DiagonalOracle(fn, name="diagonal")
    if name == "diag_reciprocal":
        return DiagonalOracle(Reciprocal(), name="diag_reciprocal")
    if name == "diag_dyadic":
        return DiagonalOracle(DyadicEnumeration(), name="diag_dyadic")
    if name == "discrete_laplacian_1d":
        return Laplacian1D()
    if name == "almost_mathieu":
        return AlmostMathieu(params["alpha"], params.get("lam", 1.0))
    if name == "almost_mathieu_perturbed":
        return AlmostMathieu(
            params["alpha"], params.get("lam", 1.0), seed=int(params.get("seed", 0))
        )
    if name == "direct_sum_laplacian":
        head = params.get("head", [])
        if np.isscalar(head):
            head = [head]
        return DirectSum(head, Laplacian1D())
    raise ValueError(f"unknown zoo operator {name!r}")


def direct_sum(head_diagonal, tail: OperatorOracle) -> OperatorOracle:
    return DirectSum(head_diagonal, tail)


# -- user-supplied operators ---------------------------------------------------


@dataclass
class DecaySequence:
    """c_n given as 'c0*q^n' (geometric) or an explicit table."""

    c0: float = 0.0
    q: float = 1.0
    table: tuple = ()

    @staticmethod
    def parse(text: str) -> "DecaySequence":
        text = text.strip()
        if "*" in text and "^" in text:
            c0_part, q_part = text.split("*", 1)
            q_str = q_part.split("^")[0]
            return DecaySequence(c0=float(c0_part), q=float(q_str))
        values = tuple(float(v) for v in text.replace(",", " ").split())
        return DecaySequence(table=values)

    def __call__(self, n: int) -> float:
        if self.table:
            return self.table[min(n, len(self.table)) - 1]
        return self.c0 * self.q**n


class TableOracle(OperatorOracle):
    """Oracle backed by explicit (i, j) -> value entries from a CSV."""

    def __init__(self, entries: dict, f_table, c_seq: DecaySequence,
                 self_adjoint: bool = False, name: str = "csv"):
        super().__init__()
        self.entries_map = dict(entries)
        self.f_table = list(int(v) for v in f_table)
        self.c_seq = c_seq
        self.is_self_adjoint = self_adjoint
        self.name = name
        self.band = None
        vals = np.array(list(self.entries_map.values()))
        self.real_entries = bool(np.abs(vals.imag).max(initial=0.0) == 0.0)
        for n, fn in enumerate(self.f_table, start=1):
            if fn < n:
                raise ValueError(f"declared f({n}) = {fn} violates f(n) >= n")

    def entry(self, i, j):
        return self.entries_map.get((i, j), 0.0)

    def dispersion_f(self, n):
        if n <= len(self.f_table):
            return self.f_table[n - 1]
        offset = self.f_table[-1] - len(self.f_table) if self.f_table else 0
        return n + max(offset, 0)

    def dispersion_c(self, n):
        return float(self.c_seq(n))

    def _build(self, rows, cols, adjoint):
        out = np.zeros((rows, cols), dtype=complex)
        for (i, j), v in self.entries_map.items():
            if adjoint:
                if j <= rows and i <= cols:
                    out[j - 1, i - 1] += np.conj(v)
            elif i <= rows and j <= cols:
                out[i - 1, j - 1] += v
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = out.real.copy()
        return out


def oracle_from_csv_rows(rows, f_table, c_spec: str, self_adjoint: bool = False,
                         name: str = "csv") -> TableOracle:
    """rows: iterable of (i, j, re, im) records."""
    entries = {}
    for rec in rows:
        i, j = int(rec[0]), int(rec[1])
        if i < 1 or j < 1:
            raise ValueError("matrix indices are 1-based")
        entries[(i, j)] = float(rec[2]) + 1j * float(rec[3])
    return TableOracle(entries, f_table, DecaySequence.parse(c_spec),
                       self_adjoint=self_adjoint, name=name)
