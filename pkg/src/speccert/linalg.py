"""Dense Hermitian linear algebra with certified sign information.

Everything downstream (resolvent estimates, spectral towers, eigenvector
extraction) reduces to one primitive: counting negative eigenvalues of a
Hermitian matrix through a block LDL* factorization. All bisection routines
in this module are built on that primitive, so the only floating-point
trust assumption is the inertia of a factored matrix.

Sign classification uses an absolute tolerance ``tau = PSD_RTOL * ||M||_F``;
pivots within tau of zero count as zero inertia.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative semidefiniteness tolerance: pivots within PSD_RTOL*||M||_F of zero
# are classified as zero inertia.
PSD_RTOL = 1e-12

# Reconstruction tolerance for the factorization invariant, relative to ||M||_F.
RECONSTRUCTION_RTOL = 1e-10

# Bunch-Kaufman pivot threshold, (1 + sqrt(17)) / 8.
_ALPHA = (1.0 + math.sqrt(17.0)) / 8.0


class HermitianMatrix:
    """A square matrix forced Hermitian at construction: M <- (M + M*)/2."""

    __slots__ = ("array", "order")

    def __init__(self, entries):
        a = np.asarray(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("HermitianMatrix requires a square 2-d array")
        if a.shape[0] < 1:
            raise ValueError("HermitianMatrix requires order >= 1")
        if np.iscomplexobj(a):
            a = 0.5 * (a + a.conj().T)
            if np.abs(a.imag).max(initial=0.0) == 0.0:
                a = a.real.copy()
        else:
            a = 0.5 * (a + a.T)
        self.array = a.astype(np.float64 if not np.iscomplexobj(a) else np.complex128)
        self.order = a.shape[0]

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.array))


@dataclass
class Inertia:
    """Eigenvalue sign counts; negative + zero + positive equals the order."""

    negative: int
    zero: int
    positive: int


@dataclass
class BlockLDL:
    """P M P^T = L D L* with unit lower-triangular L and 1x1/2x2 blocks D.

    ``permutation`` maps factored positions to original indices:
    (P M P^T)[a, b] = M[permutation[a], permutation[b]].
    """

    lower: np.ndarray
    blocks: list[np.ndarray]
    permutation: list[int]

    def block_diagonal(self) -> np.ndarray:
        n = self.lower.shape[0]
        d = np.zeros((n, n), dtype=self.lower.dtype)
        k = 0
        for blk in self.blocks:
            s = blk.shape[0]
            d[k : k + s, k : k + s] = blk
            k += s
        return d

    def reconstruct(self) -> np.ndarray:
        d = self.block_diagonal()
        return self.lower @ d @ self.lower.conj().T


def _coerce(m) -> HermitianMatrix:
    return m if isinstance(m, HermitianMatrix) else HermitianMatrix(m)


def ldl_hermitian(m) -> BlockLDL:
    """Factor a Hermitian matrix as P M P^T = L D L*.

    Rook-style (bounded Bunch-Kaufman) pivoting: a pivot is accepted only
    when it dominates both its row and column, which bounds the entries of L
    and keeps the inertia of D trustworthy in floating point.
    """
    hm = _coerce(m)
    a = hm.array.copy()
    n = hm.order
    complex_input = np.iscomplexobj(a)
    lower = np.eye(n, dtype=a.dtype)
    perm = list(range(n))
    blocks: list[np.ndarray] = []

    if n == 1 or np.abs(a - np.diag(np.diag(a))).max() == 0.0:
        # already diagonal: the matrix is its own factorization
        blocks = [a[k : k + 1, k : k + 1].copy() for k in range(n)]
        return BlockLDL(lower=lower, blocks=blocks, permutation=perm)

    def swap(i: int, j: int, k: int) -> None:
        if i == j:
            return
        a[[i, j], :] = a[[j, i], :]
        a[:, [i, j]] = a[:, [j, i]]
        # only the already-computed L columns move with the rows
        lower[[i, j], :k] = lower[[j, i], :k]
        perm[i], perm[j] = perm[j], perm[i]

    k = 0
    while k < n:
        if k == n - 1:
            blocks.append(a[k : k + 1, k : k + 1].copy())
            k += 1
            continue

        col = np.abs(a[k + 1 :, k])
        r = int(np.argmax(col)) + k + 1
        omega = float(col[r - k - 1])

        if omega == 0.0 or abs(a[k, k]) >= _ALPHA * omega:
            piv, size = k, 1
        else:
            # Rook search: walk to a pivot dominating its own column.
            i, omega_i, r_i = k, omega, r
            while True:
                colr = np.abs(a[k:, r_i])
                colr[r_i - k] = -1.0
                s = int(np.argmax(colr)) + k
                omega_r = float(colr[s - k])
                if abs(a[r_i, r_i]) >= _ALPHA * omega_r:
                    piv, size = r_i, 1
                    break
                if omega_i >= _ALPHA * omega_r:
                    piv, size = (i, r_i), 2
                    break
                i, omega_i, r_i = r_i, omega_r, s

        if size == 1:
            swap(k, piv, k)
            d = a[k, k]
            colv = a[k + 1 :, k].copy()
            if d != 0:
                lcol = colv / d
            else:
                lcol = np.zeros_like(colv)
            if k + 1 < n:
                a[k + 1 :, k + 1 :] -= np.outer(lcol, colv.conj())
                lower[k + 1 :, k] = lcol
            blocks.append(np.array([[d]], dtype=a.dtype))
            k += 1
        else:
            i, j = piv
            swap(k, i, k)
            if j == k:
                j = i
            swap(k + 1, j, k)
            d2 = a[k : k + 2, k : k + 2].copy()
            d2[0, 0] = d2[0, 0].real if complex_input else d2[0, 0]
            d2[1, 1] = d2[1, 1].real if complex_input else d2[1, 1]
            if k + 2 < n:
                c = a[k + 2 :, k : k + 2].copy()
                det = d2[0, 0] * d2[1, 1] - d2[0, 1] * d2[1, 0]
                inv = np.array(
                    [[d2[1, 1], -d2[0, 1]], [-d2[1, 0], d2[0, 0]]], dtype=a.dtype
                ) / det
                w = c @ inv
                a[k + 2 :, k + 2 :] -= w @ c.conj().T
                lower[k + 2 :, k : k + 2] = w
            blocks.append(d2)
            k += 2

    ldl = BlockLDL(lower=lower, blocks=blocks, permutation=perm)
    scale = hm.frobenius()
    residual = np.abs(
        ldl.reconstruct() - hm.array[np.ix_(perm, perm)]
    ).max(initial=0.0)
    if residual > RECONSTRUCTION_RTOL * max(scale, 1.0) * hm.order:
        raise ArithmeticError(
            f"LDL reconstruction residual {residual:.3e} exceeds tolerance"
        )
    return ldl


def _block_eigenvalues(blk: np.ndarray) -> list[float]:
    if blk.shape[0] == 1:
        return [float(blk[0, 0].real)]
    # 2x2 Hermitian block: signs from trace and determinant; the discriminant
    # trace^2 - 4 det = (d11 - d22)^2 + 4|d12|^2 is nonnegative.
    tr = float(blk[0, 0].real + blk[1, 1].real)
    det = float((blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]).real)
    disc = max(tr * tr - 4.0 * det, 0.0)
    root = math.sqrt(disc)
    return [0.5 * (tr - root), 0.5 * (tr + root)]


def count_negative(m, tau: float | None = None) -> Inertia:
    """Inertia of a Hermitian matrix by Sylvester's law applied to block LDL.

    ``tau`` is the absolute zero-classification tolerance; default
    ``PSD_RTOL * ||M||_F``.
    """
    hm = _coerce(m)
    if tau is None:
        tau = PSD_RTOL * hm.frobenius()
    ldl = ldl_hermitian(hm)
    neg = zero = pos = 0
    for blk in ldl.blocks:
        for lam in _block_eigenvalues(blk):
            if lam < -tau:
                neg += 1
            elif lam > tau:
                pos += 1
            else:
                zero += 1
    return Inertia(negative=neg, zero=zero, positive=pos)


def is_positive_definite(m, tau: float | None = None) -> bool:
    """True iff all eigenvalues exceed the zero tolerance, from LDL inertia."""
    inertia = count_negative(m, tau=tau)
    return inertia.negative == 0 and inertia.zero == 0


def eigenvalues_bisection(m, eps: float) -> list[float]:
    """All eigenvalues of a Hermitian matrix to absolute precision eps.

    Brackets the spectrum with the Frobenius norm, then locates

        lam_k = min{ j/m2 : (number of eigenvalues of M below j/m2) >= k }

    on the grid of spacing 1/m2 < eps. The grid scan is resolved by binary
    search on j, which returns the same value as a linear scan because the
    negative-eigenvalue count is nondecreasing in j.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    hm = _coerce(m)
    n = hm.order
    a = hm.array
    m1 = int(math.floor(hm.frobenius())) + 1
    m2 = int(math.floor(1.0 / eps)) + 1
    jlo, jhi = -m1 * m2, m1 * m2
    eye = np.eye(n, dtype=a.dtype)

    counts: dict[int, int] = {jlo: 0, jhi: n}

    def neg_count(j: int) -> int:
        if j not in counts:
            counts[j] = count_negative(
                HermitianMatrix(a - (j / m2) * eye)
            ).negative
        return counts[j]

    out: list[float] = []
    lo = jlo
    for k in range(1, n + 1):
        lo_k, hi_k = lo, jhi
        # smallest j with neg_count(j) >= k
        while lo_k < hi_k:
            mid = (lo_k + hi_k) // 2
            if neg_count(mid) >= k:
                hi_k = mid
            else:
                lo_k = mid + 1
        out.append(lo_k / m2)
        lo = lo_k
    return out


def _as_matrix(b) -> np.ndarray:
    arr = np.asarray(b)
    if arr.ndim != 2:
        raise ValueError("expected a 2-d array")
    return arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)


def gram(b) -> HermitianMatrix:
    arr = _as_matrix(b)
    return HermitianMatrix(arr.conj().T @ arr)


def smallest_singular_bound(
    b,
    resolution: float,
    upper: float | None = None,
    lower: float = 0.0,
    strategy: str = "gram",
    tau: float | None = None,
) -> float:
    """Certified upper bound t with sigma_1(B) <= t <= sigma_1(B) + resolution.

    Interval bisection on t. The default tests positive definiteness of the
    Gram matrix B*B - t^2 I; strategy "augmented" instead counts the inertia
    of [[-tI, B], [B*, -tI]], which avoids squaring the condition number and
    is the reliable choice when ||B|| is large.

    ``lower`` is an optional certified lower bound used to warm-start the
    bisection (e.g. from a Lipschitz bound at a neighbouring shift); it is
    validated and discarded if wrong.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    arr = _as_matrix(b)
    fro = float(np.linalg.norm(arr))
    if upper is None:
        upper = fro + resolution
    if strategy == "gram":
        g = arr.conj().T @ arr
        if tau is None:
            tau = PSD_RTOL * float(np.linalg.norm(g))
        eye = np.eye(g.shape[0], dtype=g.dtype)

        def above(t: float) -> bool:
            # sigma_1 > t
            return is_positive_definite(HermitianMatrix(g - (t * t) * eye), tau=tau)

    elif strategy == "augmented":
        nr, nc = arr.shape
        dim = nr + nc
        dtype = arr.dtype
        h = np.zeros((dim, dim), dtype=dtype)
        h[:nr, nr:] = arr
        h[nr:, :nr] = arr.conj().T
        if tau is None:
            tau = PSD_RTOL * float(np.linalg.norm(h))
        idx = np.arange(dim)

        def above(t: float) -> bool:
            # eigenvalues of H_t are -t (nr-nc times) and -t +/- sigma_i, so
            # sigma_1 > t iff exactly nr of them are negative and none vanish
            ht = h.copy()
            ht[idx, idx] = -t
            inertia = count_negative(HermitianMatrix(ht), tau=tau)
            return inertia.negative == nr and inertia.zero == 0

    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    hi = max(float(upper), resolution)
    # The stated precondition is upper >= sigma_1; expand defensively if not.
    for _ in range(64):
        if not above(hi):
            break
        hi = 2.0 * hi + resolution
    else:
        return hi
    lo = 0.0
    if lower > 0.0 and lower < hi and above(lower):
        lo = float(lower)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if above(mid):
            lo = mid
        else:
            hi = mid
    # inflate by the zero-classification floor so the reported bound still
    # dominates sigma_1 when the test saturated at roundoff scale
    if strategy == "gram":
        return math.sqrt(hi * hi + tau)
    return hi + tau


def smallest_eigenvalue_bound(
    m,
    resolution: float,
    upper: float | None = None,
    lower: float = 0.0,
    tau: float | None = None,
) -> float:
    """t with max(lambda_min(M), 0) <= t <= max(lambda_min(M), 0) + resolution.

    For positive semidefinite M (Gram matrices assembled from inner products)
    this bounds the squared injection modulus. Negative lambda_min, which can
    occur through entrywise assembly error, clamps to 0.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    hm = _coerce(m)
    a = hm.array
    if tau is None:
        tau = PSD_RTOL * hm.frobenius()
    eye = np.eye(hm.order, dtype=a.dtype)
    if upper is None:
        upper = hm.frobenius() + resolution

    def above(t: float) -> bool:
        return is_positive_definite(HermitianMatrix(a - t * eye), tau=tau)

    hi = max(float(upper), resolution)
    for _ in range(64):
        if not above(hi):
            break
        hi = 2.0 * hi + resolution
    else:
        return hi
    lo = 0.0
    if lower > 0.0 and lower < hi and above(lower):
        lo = float(lower)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if above(mid):
            lo = mid
        else:
            hi = mid
    return hi + tau  # zero-classification floor keeps the bound one-sided


def largest_singular_bound(b, slack: float = 1.0) -> float:
    """t with sigma_max(B) <= t <= sigma_max(B) + slack, via Gram inertia."""
    if slack <= 0:
        raise ValueError("slack must be positive")
    arr = _as_matrix(b)
    g = arr.conj().T @ arr
    tau = PSD_RTOL * float(np.linalg.norm(g))
    eye = np.eye(g.shape[0], dtype=g.dtype)
    hi = float(np.linalg.norm(arr)) + slack
    lo = 0.0

    def below(t: float) -> bool:
        # sigma_max <= t  <=>  t^2 I - B*B has no negative part
        inertia = count_negative(HermitianMatrix((t * t) * eye - g), tau=tau)
        return inertia.negative == 0

    while hi - lo > slack:
        mid = 0.5 * (lo + hi)
        if below(mid):
            hi = mid
        else:
            lo = mid
    return hi


def roundoff_tau(m_or_norm, factor: float = 32.0) -> float:
    """Zero-classification tolerance at the factorization's roundoff scale.

    The default PSD_RTOL tolerance is deliberately coarse; bisection search
    paths that must resolve tiny eigenvalues of well-scaled Gram matrices
    pass this sharper backward-error-scale tolerance instead.
    """
    if np.isscalar(m_or_norm):
        scale = float(m_or_norm)
    else:
        scale = float(np.linalg.norm(np.asarray(m_or_norm)))
    return factor * np.finfo(float).eps * scale
