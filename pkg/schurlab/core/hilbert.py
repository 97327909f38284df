"""Finite-dimensional Hilbert-space vector families.

The Hilbert space is C^d with the standard basis fixed once: the real subspace
H_R is the set of real-coordinate vectors and the conjugation J is entrywise
complex conjugation. Inner products are antilinear on the left.
"""

import json
from collections.abc import Hashable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import DimensionError
from .linalg import ComplexMatrix

ComplexVector = npt.NDArray[np.complex128]


def inner(a: npt.ArrayLike, b: npt.ArrayLike) -> complex:
    """<a, b>, antilinear in a."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


class Conjugation:
    """Entrywise conjugation in the standard basis; fixes real-coordinate vectors."""

    def __call__(self, h: npt.ArrayLike) -> ComplexVector:
        result: ComplexVector = np.conj(np.asarray(h, dtype=np.complex128))
        return result

    @staticmethod
    def fixes(h: npt.ArrayLike, tol: float = 0.0) -> bool:
        """True when h lies in H_R."""
        return bool(np.all(np.abs(np.imag(np.asarray(h))) <= tol))


J = Conjugation()


def anchor_vector(dim: int) -> ComplexVector:
    """The norm-one vector xi of the rank-one identification: first basis vector."""
    xi = np.zeros(dim, dtype=np.complex128)
    if dim:
        xi[0] = 1.0
    return xi


@dataclass(frozen=True)
class VectorFamily:
    """Indexed family (u_j)_{j in labels} of vectors in C^dim."""

    dim: int
    labels: tuple[Hashable, ...]
    vectors: ComplexMatrix  # shape (n, dim)

    def __post_init__(self) -> None:
        vecs = np.asarray(self.vectors, dtype=np.complex128)
        if vecs.ndim != 2 or vecs.shape != (len(self.labels), self.dim):
            raise DimensionError(
                f"vectors must have shape ({len(self.labels)}, {self.dim}), got {vecs.shape}"
            )
        if len(set(self.labels)) != len(self.labels):
            raise DimensionError("labels must be distinct")
        if not np.all(np.isfinite(vecs)):
            raise DimensionError("vectors have non-finite coordinates")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_vectors(
        cls, vectors: npt.ArrayLike, labels: Sequence[Hashable] | None = None
    ) -> "VectorFamily":
        """Build from an (n, d) array; labels default to 0..n-1."""
        vecs = np.asarray(vectors, dtype=np.complex128)
        if vecs.ndim == 1:
            vecs = vecs[:, None]
        n, d = vecs.shape
        return cls(dim=d, labels=tuple(labels) if labels is not None else tuple(range(n)), vectors=vecs)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "VectorFamily":
        """Create from {"dim": d, "labels": [...], "vectors": [[[re, im], ...], ...]}."""
        dim = int(data["dim"])
        raw = data["vectors"]
        coords = np.array(
            [[complex(re, im) for re, im in vec] for vec in raw], dtype=np.complex128
        ).reshape(len(raw), dim)
        labels = data.get("labels") or list(range(len(raw)))
        return cls(dim=dim, labels=tuple(_hashable(lbl) for lbl in labels), vectors=coords)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "dim": self.dim,
            "labels": list(self.labels),
            "vectors": [[[float(z.real), float(z.imag)] for z in vec] for vec in self.vectors],
        }

    @classmethod
    def load(cls, path: Path) -> "VectorFamily":
        """Load a family from a JSON document."""
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def save(self, path: Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise DimensionError(f"label {label!r} not in index set") from e

    def vector(self, label: Hashable) -> ComplexVector:
        return self.vectors[self.index(label)]

    def is_real(self) -> bool:
        return Conjugation.fixes(self.vectors)

    @property
    def tol_eq(self) -> float:
        """1e-12 * (1 + max ||u_j||): decides u_j = u_k."""
        norms = np.linalg.norm(self.vectors, axis=1) if self.size else np.zeros(1)
        return 1e-12 * (1.0 + float(norms.max(initial=0.0)))

    def difference_norms(self) -> npt.NDArray[np.float64]:
        """Matrix of ||u_j - u_k||."""
        diff = self.vectors[:, None, :] - self.vectors[None, :, :]
        norms: npt.NDArray[np.float64] = np.linalg.norm(diff, axis=2)
        return norms

    def coincidence_mask(self) -> npt.NDArray[np.bool_]:
        """Boolean matrix of pairs with u_j = u_k (within tol_eq)."""
        mask: npt.NDArray[np.bool_] = self.difference_norms() <= self.tol_eq
        return mask

    def normalized_differences(self) -> npt.NDArray[np.complex128]:
        """Array (n, n, d) of (u_j - u_k)/||u_j - u_k|| with 0/0 = 0."""
        diff = self.vectors[:, None, :] - self.vectors[None, :, :]
        norms = np.linalg.norm(diff, axis=2)
        degenerate = norms <= self.tol_eq
        safe = np.where(degenerate, 1.0, norms)
        out: npt.NDArray[np.complex128] = diff / safe[:, :, None]
        out[degenerate] = 0.0
        return out

    def restrict(self, indices: Sequence[int]) -> "VectorFamily":
        idx = list(indices)
        return VectorFamily(
            dim=self.dim, labels=tuple(self.labels[i] for i in idx), vectors=self.vectors[idx]
        )

    def map(self, Lambda: npt.ArrayLike) -> "VectorFamily":
        """Family (Lambda u_j)."""
        op = np.asarray(Lambda, dtype=np.complex128)
        if op.shape != (self.dim, self.dim):
            raise DimensionError(f"operator must be {self.dim}x{self.dim}, got {op.shape}")
        return VectorFamily(dim=self.dim, labels=self.labels, vectors=self.vectors @ op.T)


def _hashable(label: Any) -> Hashable:
    return tuple(label) if isinstance(label, list) else label


def scalar_family(values: Sequence[float]) -> VectorFamily:
    """One-dimensional family u_j = values[j] (the Hilbert transform case)."""
    return VectorFamily.from_vectors(np.asarray(values, dtype=np.float64)[:, None])


def gram(F: VectorFamily) -> ComplexMatrix:
    """G(j, k) = <u_j, u_k>."""
    result: ComplexMatrix = F.vectors.conj() @ F.vectors.T
    return result


def normalized_difference(F: VectorFamily, j: Hashable, k: Hashable) -> ComplexVector:
    """(u_j - u_k)/||u_j - u_k||, or the zero vector when u_j = u_k."""
    diff = F.vector(j) - F.vector(k)
    norm = float(np.linalg.norm(diff))
    if norm <= F.tol_eq:
        return np.zeros(F.dim, dtype=np.complex128)
    result: ComplexVector = diff / norm
    return result


def complexify_real_embedding(F: VectorFamily) -> VectorFamily:
    """Realify: u -> (Re u, Im u) in dimension 2d, all coordinates real.

    Real inner products of the output equal Re<u_j, u_k>, so pairwise distances
    are preserved.
    """
    coords = np.concatenate([F.vectors.real, F.vectors.imag], axis=1)
    return VectorFamily(dim=2 * F.dim, labels=F.labels, vectors=coords.astype(np.complex128))


def operator_norm(Lambda: npt.ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(Lambda, dtype=np.complex128), 2))
