"""Dense Hermitian operator algebra used throughout the package.

Matrices are plain complex ``numpy`` arrays.  Functions here never mutate
their inputs.  All logarithms are base 2, so entropies come out in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ValidationError


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances, kept together so they can be tuned in one place.

    ``kernel`` is relative to the largest eigenvalue of the operator under
    test; every other entry is absolute.
    """

    hermit: float = 1e-9
    psd: float = 1e-10
    trace: float = 1e-9
    recon: float = 1e-9
    orth: float = 1e-9
    kernel: float = 1e-10


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order and matching orthonormal eigenvectors.

    ``vectors[:, k]`` is the eigenvector for ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


@dataclass(frozen=True)
class ResolutionOfIdentity:
    """A family of positive operators whose sum is at most the identity."""

    elements: tuple[np.ndarray, ...]
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if not self.elements:
            raise ArgumentError("a resolution of identity needs at least one element")
        elems = tuple(as_square(x, f"element {k}") for k, x in enumerate(self.elements))
        dims = {x.shape[0] for x in elems}
        if len(dims) != 1:
            raise ArgumentError(f"elements have mixed dimensions {sorted(dims)}")
        for k, x in enumerate(elems):
            check_hermitian(x, self.tol, f"element {k}")
            lo = np.linalg.eigvalsh(x)[0]
            if lo < -self.tol.psd:
                raise ValidationError(f"element {k} is not positive: min eigenvalue {lo:.3g}")
        lo = np.linalg.eigvalsh(np.eye(self.dim) - sum(elems))[0]
        if lo < -self.tol.psd:
            raise ValidationError(
                f"elements sum to more than the identity: min eigenvalue of I - sum {lo:.3g}"
            )
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def completion(self) -> np.ndarray:
        """The leftover element ``I - sum_j X_j`` (zero for a complete family)."""
        return np.eye(self.dim) - sum(self.elements)

    def is_complete(self, atol: float = 1e-9) -> bool:
        return float(np.max(np.abs(self.completion()))) <= atol


def as_square(matrix, name: str = "matrix") -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ArgumentError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m


def check_hermitian(m: np.ndarray, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> None:
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > tol.hermit:
        raise ValidationError(f"{name} is not Hermitian: max asymmetry {asym:.3g}")


def density_violations(matrix, tol: Tolerances = DEFAULT_TOL) -> list[str]:
    """List every density-operator invariant that ``matrix`` violates.

    An empty list means the matrix is a valid density operator.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return [f"not a square matrix (shape {m.shape})"]
    problems = []
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > tol.hermit:
        problems.append(f"not Hermitian: max asymmetry {asym:.3g}")
    herm = (m + m.conj().T) / 2
    lo = float(np.linalg.eigvalsh(herm)[0])
    if lo < -tol.psd:
        problems.append(f"not positive semidefinite: min eigenvalue {lo:.3g}")
    tr = np.trace(m)
    if abs(tr - 1) > tol.trace:
        problems.append(f"trace {tr.real:.6g} differs from 1 by {abs(tr - 1):.3g}")
    return problems


def validate_density(matrix, tol: Tolerances = DEFAULT_TOL, name: str = "state") -> np.ndarray:
    """Return a read-only Hermitian copy of ``matrix`` or raise ``ValidationError``."""
    problems = density_violations(matrix, tol)
    if problems:
        raise ValidationError(f"{name}: " + "; ".join(problems))
    m = np.asarray(matrix, dtype=complex)
    m = (m + m.conj().T) / 2
    m.setflags(write=False)
    return m


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # make the first non-negligible component of each column real positive
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-12))
        ph = col[idx] / abs(col[idx])
        out[:, k] = col / ph
    return out


def spectral_decompose(h, tol: Tolerances = DEFAULT_TOL) -> SpectralDecomposition:
    """Eigen-decompose a Hermitian matrix with a reproducible ordering.

    Eigenvalues come out descending.  Within a cluster of (numerically) equal
    eigenvalues the eigenvectors are ordered lexicographically by the real
    parts of their components, after fixing each vector's global phase.
    """
    m = as_square(h)
    check_hermitian(m, tol)
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    vals = vals[::-1].copy()
    vecs = _fix_phases(vecs[:, ::-1])

    order = []
    start = 0
    scale = max(1.0, float(np.max(np.abs(vals))))
    for k in range(1, len(vals) + 1):
        if k == len(vals) or vals[start] - vals[k] > 1e-12 * scale:
            block = list(range(start, k))
            block.sort(key=lambda c: tuple(-vecs[:, c].real))
            order.extend(block)
            start = k
    vals = vals[order]
    vecs = vecs[:, order]
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralDecomposition(vals, vecs)


def tensor_product(factors: Sequence) -> np.ndarray:
    """Kronecker product, first factor being the most significant index block."""
    if len(factors) == 0:
        raise ArgumentError("tensor_product needs at least one factor")
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def partial_trace(s, which: int, dims: tuple[int, int]) -> np.ndarray:
    """Trace out subsystem ``which`` (1 or 2) of an operator on H1 (x) H2."""
    m = as_square(s)
    d1, d2 = dims
    if m.shape[0] != d1 * d2:
        raise ArgumentError(f"operator of dimension {m.shape[0]} does not match dims {dims}")
    t = m.reshape(d1, d2, d1, d2)
    if which == 1:
        return np.einsum("ijik->jk", t)
    if which == 2:
        return np.einsum("ijkj->ik", t)
    raise ArgumentError(f"which must be 1 or 2, got {which!r}")


def entropy_of_spectrum(eigenvalues, tol: Tolerances = DEFAULT_TOL) -> float:
    """Shannon entropy (bits) of an eigenvalue list, with 0 log 0 = 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > tol.psd]
    return float(-np.sum(lam * np.log2(lam))) + 0.0


def von_neumann_entropy(s, tol: Tolerances = DEFAULT_TOL) -> float:
    """Von Neumann entropy ``-Tr S log2 S`` of a density operator, in bits."""
    m = validate_density(s, tol)
    return entropy_of_spectrum(np.linalg.eigvalsh(m), tol)


def _support_split(m: np.ndarray, tol: Tolerances):
    vals, vecs = np.linalg.eigh(m)
    cut = tol.kernel * max(float(vals[-1]), 0.0)
    keep = vals > max(cut, 0.0)
    return vals, vecs, keep


def quantum_relative_entropy(s, t, tol: Tolerances = DEFAULT_TOL) -> float:
    """Relative entropy ``D(S||T) = Tr S (log2 S - log2 T)`` in bits.

    Returns ``inf`` when the support of ``S`` is not contained in that of ``T``.
    """
    a = validate_density(s, tol, "S")
    b = validate_density(t, tol, "T")
    if a.shape != b.shape:
        raise ArgumentError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    sv, su, _ = _support_split(a, tol)
    tv, tu, tkeep = _support_split(b, tol)
    sv = np.where(sv > tol.psd, sv, 0.0)
    overlap = np.abs(su.conj().T @ tu) ** 2  # overlap[i, j] = |<s_i|t_j>|^2
    leak = float(sv @ overlap[:, ~tkeep].sum(axis=1))
    if leak > tol.kernel:
        return float("inf")
    pos = sv > 0
    first = float(np.sum(sv[pos] * np.log2(sv[pos])))
    second = float(sv @ overlap[:, tkeep] @ np.log2(tv[tkeep]))
    # D >= 0 (Klein); only rounding can push it below
    return max(first - second, 0.0)


def gen_inv_sqrt(x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Generalized inverse square root: ``lambda**-0.5`` on the support, 0 on the kernel."""
    m = as_square(x)
    check_hermitian(m, tol)
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    if vals[0] < -tol.psd * max(1.0, abs(float(vals[-1]))):
        raise ValidationError(f"operator is not positive: min eigenvalue {vals[0]:.3g}")
    keep = vals > tol.kernel * max(float(vals[-1]), 0.0)
    inv = np.zeros_like(vals)
    inv[keep] = vals[keep] ** -0.5
    return (vecs * inv) @ vecs.conj().T


def psd_sqrt(x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    m = as_square(x)
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    if vals[0] < -tol.psd * max(1.0, abs(float(vals[-1]))):
        raise ValidationError(f"operator is not positive: min eigenvalue {vals[0]:.3g}")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def support_projector(x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the range of a positive semidefinite matrix."""
    m = as_square(x)
    vals, vecs, keep = _support_split((m + m.conj().T) / 2, tol)
    v = vecs[:, keep]
    return v @ v.conj().T


def min_eigenvalue(x) -> float:
    m = as_square(x)
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
