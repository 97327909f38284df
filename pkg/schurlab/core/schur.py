"""Schur symbols, multiplier application and the diagonal conditional expectation."""

import json
from collections.abc import Hashable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import DimensionError
from .hilbert import VectorFamily, _hashable
from .linalg import ComplexMatrix, as_matrix


def sgn(t: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Sign with sgn(0) = 1."""
    result: npt.NDArray[np.float64] = np.where(np.asarray(t, dtype=np.float64) >= 0.0, 1.0, -1.0)
    return result


@dataclass(frozen=True)
class Provenance:
    """Construction tag plus the parameters that generated a symbol."""

    tag: str
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"tag": self.tag, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Provenance":
        return cls(tag=data["tag"], params=dict(data.get("params") or {}))


@dataclass(frozen=True)
class SchurSymbol:
    """Finite symbol M(j, k) over an index set, tagged with its construction.

    `degenerate` marks entries set to 0 under the 0/0 = 0 convention
    (coincident vectors or points in the construction).
    """

    entries: ComplexMatrix
    provenance: Provenance
    labels: tuple[Hashable, ...] = ()
    degenerate: npt.NDArray[np.bool_] | None = None

    def __post_init__(self) -> None:
        M = as_matrix(self.entries, "symbol")
        labels = self.labels or tuple(range(M.shape[0]))
        if M.shape[0] != M.shape[1] or len(labels) != M.shape[0]:
            raise DimensionError(f"symbol must be square over its labels, got {M.shape}")
        mask = (
            np.zeros(M.shape, dtype=bool)
            if self.degenerate is None
            else np.asarray(self.degenerate, dtype=bool)
        )
        if mask.shape != M.shape:
            raise DimensionError("degenerate mask does not match the symbol")
        M.setflags(write=False)
        object.__setattr__(self, "entries", M)
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "degenerate", mask)

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def tag(self) -> str:
        return self.provenance.tag

    @property
    def sup(self) -> float:
        """max |M(j, k)|."""
        return float(np.abs(self.entries).max(initial=0.0))

    def is_real(self) -> bool:
        return bool(np.all(self.entries.imag == 0.0))

    def with_entries(self, entries: npt.ArrayLike, tag_suffix: str = "") -> "SchurSymbol":
        prov = self.provenance
        if tag_suffix:
            prov = Provenance(prov.tag, {**prov.params, "variant": tag_suffix})
        return SchurSymbol(np.asarray(entries), prov, self.labels, self.degenerate)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "labels": list(self.labels),
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
            "provenance": self.provenance.to_dict(),
            "degenerate": [[int(b) for b in row] for row in self.degenerate]  # type: ignore[union-attr]
            if self.degenerate is not None and self.degenerate.any()
            else [],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SchurSymbol":
        """Create from dictionary."""
        entries = np.array(
            [[complex(re, im) for re, im in row] for row in data["entries"]], dtype=np.complex128
        )
        mask = data.get("degenerate") or None
        return cls(
            entries=entries,
            provenance=Provenance.from_dict(data.get("provenance") or {"tag": "custom"}),
            labels=tuple(_hashable(lbl) for lbl in data.get("labels") or []),
            degenerate=np.asarray(mask, dtype=bool) if mask else None,
        )

    def save(self, path: Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path: Path) -> "SchurSymbol":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def custom_symbol(entries: npt.ArrayLike, tag: str = "custom", **params: Any) -> SchurSymbol:
    return SchurSymbol(np.asarray(entries, dtype=np.complex128), Provenance(tag, params))


def identity_symbol(n: int) -> SchurSymbol:
    """M = 1: the identity multiplier."""
    return SchurSymbol(np.ones((n, n), dtype=np.complex128), Provenance("identity", {"n": n}))


def apply_multiplier(M: SchurSymbol, A: npt.ArrayLike) -> ComplexMatrix:
    """S_M(A) = (M(j, k) A_jk)."""
    arr = as_matrix(A)
    if arr.shape != M.entries.shape:
        raise DimensionError(f"matrix shape {arr.shape} does not match symbol {M.entries.shape}")
    result: ComplexMatrix = M.entries * arr
    return result


@dataclass(frozen=True)
class SymbolSymmetries:
    """Transposed, conjugated and conjugate-transposed copies of a symbol.

    All four have the same S_p norm after swapping p <-> p' for the transposes.
    """

    original: SchurSymbol
    transposed: SchurSymbol  # M_op(j, k) = M(k, j)
    conjugate: SchurSymbol
    adjoint: SchurSymbol  # conj(M_op)


def symbol_symmetries(M: SchurSymbol) -> SymbolSymmetries:
    E = M.entries
    mask = M.degenerate
    assert mask is not None

    def variant(entries: ComplexMatrix, name: str, flip: bool) -> SchurSymbol:
        prov = Provenance(M.tag, {**M.provenance.params, "variant": name})
        return SchurSymbol(entries, prov, M.labels, mask.T if flip else mask)

    return SymbolSymmetries(
        original=M,
        transposed=variant(E.T.copy(), "op", True),
        conjugate=variant(E.conj(), "conj", False),
        adjoint=variant(E.conj().T.copy(), "op_conj", True),
    )


def diagonal_expectation(A: npt.ArrayLike, F: VectorFamily) -> ComplexMatrix:
    """Keep the entries with u_j = u_k, zero the rest."""
    arr = as_matrix(A)
    if arr.shape != (F.size, F.size):
        raise DimensionError(f"matrix shape {arr.shape} does not match family of size {F.size}")
    result: ComplexMatrix = np.where(F.coincidence_mask(), arr, 0.0)
    return result


def restrict(M: SchurSymbol, mask: npt.ArrayLike) -> SchurSymbol:
    """Symbol equal to M on `mask` and 0 elsewhere."""
    keep = np.asarray(mask, dtype=bool)
    if keep.shape != M.entries.shape:
        raise DimensionError("mask does not match the symbol")
    return M.with_entries(np.where(keep, M.entries, 0.0), tag_suffix="restricted")


def matrix_unit(n: int, j: int, k: int) -> ComplexMatrix:
    """e_jk in M_n."""
    E = np.zeros((n, n), dtype=np.complex128)
    E[j, k] = 1.0
    return E
