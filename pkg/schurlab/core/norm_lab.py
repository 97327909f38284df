"""Lower bounds for Schur multiplier norms on S_p.

The estimator is the p-analogue of power iteration: with D the dual-norming
matrix of S_M(X) in S_p and X' the dual-norming matrix of S_{M_op}(D) in
S_p', the ratio ||S_M(X)||_p / ||X||_p never decreases. Every reported value
is the ratio at a stored certificate, so it is a valid lower bound.
"""

import logging
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import UnknownConstructionError
from .linalg import (
    ComplexMatrix,
    check_exponent,
    conjugate_exponent,
    dual_norming,
    random_complex_matrix,
    schatten_norm,
)
from .schur import Provenance, SchurSymbol, apply_multiplier, symbol_symmetries
from .symbols import build_symbol

logger = logging.getLogger(__name__)


@dataclass
class EstimatorSettings:
    """Multi-start ascent settings."""

    starts: int = 8
    max_iter: int = 500
    stall_tol: float = 1e-9
    stall_window: int = 20
    seed: int = 0
    workers: int = 1


@dataclass
class NormEstimate:
    """Best ratio found and the input matrix achieving it."""

    provenance: Provenance
    p: float
    value: float
    certificate: ComplexMatrix
    iterations: int
    converged: bool
    start_index: int = 0

    def recompute(self, M: SchurSymbol) -> float:
        """||S_M(X*)||_p / ||X*||_p at the stored certificate."""
        norm = schatten_norm(self.certificate, self.p)
        if norm == 0.0:
            return 0.0
        return schatten_norm(apply_multiplier(M, self.certificate), self.p) / norm


def _normalized(X: ComplexMatrix, p: float) -> ComplexMatrix:
    norm = schatten_norm(X, p)
    return X / norm if norm > 0.0 else X


def _starting_points(
    M: SchurSymbol, settings: EstimatorSettings, warm_starts: Sequence[ComplexMatrix]
) -> list[ComplexMatrix]:
    """Warm starts, the matrix unit at argmax |M|, all-ones, then seeded random matrices."""
    n = M.size
    starts = [np.asarray(X, dtype=np.complex128) for X in warm_starts]
    unit = np.zeros((n, n), dtype=np.complex128)
    unit[np.unravel_index(int(np.argmax(np.abs(M.entries))), (n, n))] = 1.0
    starts.append(unit)
    starts.append(np.ones((n, n), dtype=np.complex128))
    index = 0
    while len(starts) < max(settings.starts, len(warm_starts) + 2):
        rng = np.random.default_rng(np.random.SeedSequence(settings.seed, spawn_key=(index,)))
        starts.append(random_complex_matrix((n, n), rng))
        index += 1
    return starts


def _ascend(
    M: SchurSymbol, M_op: SchurSymbol, X0: ComplexMatrix, p: float, settings: EstimatorSettings
) -> tuple[float, ComplexMatrix, int, bool]:
    q = conjugate_exponent(p)
    X = _normalized(X0, p)
    best_value = schatten_norm(apply_multiplier(M, X), p) if schatten_norm(X, p) > 0.0 else 0.0
    best_X = X
    history = [best_value]
    for it in range(1, settings.max_iter + 1):
        Y = apply_multiplier(M, X)
        if not np.any(Y):
            return best_value, best_X, it, True
        D = dual_norming(Y, p)
        Z = apply_multiplier(M_op, D)
        if not np.any(Z):
            return best_value, best_X, it, True
        X = _normalized(dual_norming(Z, q), p)
        value = schatten_norm(apply_multiplier(M, X), p)
        if value > best_value:
            best_value, best_X = value, X
        history.append(best_value)
        w = settings.stall_window
        if len(history) > w and history[-1] - history[-1 - w] <= settings.stall_tol * history[-1]:
            return best_value, best_X, it, True
    return best_value, best_X, settings.max_iter, False


def estimate_sp_norm(
    M: SchurSymbol,
    p: float,
    settings: EstimatorSettings | None = None,
    warm_starts: Sequence[ComplexMatrix] = (),
) -> NormEstimate:
    """Multi-start lower bound for ||S_M: S_p -> S_p||.

    Starts run in a thread pool when settings.workers > 1; the reduction keeps
    the first start index among equal values, so results do not depend on
    scheduling.
    """
    settings = settings or EstimatorSettings()
    p = check_exponent(p)
    M_op = symbol_symmetries(M).transposed
    starts = _starting_points(M, settings, warm_starts)

    def run(X0: ComplexMatrix) -> tuple[float, ComplexMatrix, int, bool]:
        return _ascend(M, M_op, X0, p, settings)

    if settings.workers > 1:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(X0) for X0 in starts]

    best = 0
    for i, (value, _, _, _) in enumerate(results):
        if value > results[best][0]:
            best = i
    value, X, _, converged = results[best]
    iterations = sum(r[2] for r in results)
    logger.debug(
        "S_%g estimate %.10g for %s (start %d, %d iterations)",
        p, value, M.tag, best, iterations,
    )
    if not converged:
        logger.info("S_%g estimate for %s hit the iteration cap", p, M.tag)
    return NormEstimate(
        provenance=M.provenance,
        p=p,
        value=value,
        certificate=X,
        iterations=iterations,
        converged=converged,
        start_index=best,
    )


def amplify(M: SchurSymbol, m: int) -> SchurSymbol:
    """M_amp((j, s), (k, t)) = M(j, k) on Gamma x {0..m-1}."""
    if m < 1:
        raise ValueError(f"block size must be >= 1, got {m}")
    if m == 1:
        return M
    ones = np.ones((m, m))
    assert M.degenerate is not None
    labels = tuple((lbl, s) for lbl in M.labels for s in range(m))
    return SchurSymbol(
        np.kron(M.entries, ones),
        Provenance(M.tag, {**M.provenance.params, "amplification": m}),
        labels,
        np.kron(M.degenerate, ones).astype(bool),
    )


def _embed_certificate(X: ComplexMatrix, n: int, m_old: int, m_new: int) -> ComplexMatrix:
    """Zero-pad each m_old x m_old block of X into an m_new x m_new block."""
    blocks = X.reshape(n, m_old, n, m_old)
    out = np.zeros((n, m_new, n, m_new), dtype=np.complex128)
    out[:, :m_old, :, :m_old] = blocks
    result: ComplexMatrix = out.reshape(n * m_new, n * m_new)
    return result


def amplification_ladder(
    M: SchurSymbol, p: float, sizes: Sequence[int], settings: EstimatorSettings | None = None
) -> list[NormEstimate]:
    """Estimates for amplify(M, m) over increasing m, each warm-started from the last.

    The padded certificate reproduces the previous ratio, so the ladder is
    nondecreasing.
    """
    estimates: list[NormEstimate] = []
    prev: NormEstimate | None = None
    prev_m = 0
    for m in sorted(set(sizes)):
        warm = [] if prev is None else [_embed_certificate(prev.certificate, M.size, prev_m, m)]
        est = estimate_sp_norm(amplify(M, m), p, settings, warm)
        estimates.append(est)
        prev, prev_m = est, m
    return estimates


def reference_envelope(symbol: SchurSymbol, p: float) -> float:
    """Growth envelope in p for the symbol's construction.

    Returns nan where no bound is claimed at this p (Hölder symbols outside
    their admissible window).
    """
    p = check_exponent(p, strict=True)
    q = max(p, conjugate_exponent(p))
    params: Mapping[str, Any] = symbol.provenance.params
    tag = symbol.tag
    if tag == "identity":
        return 1.0
    if tag in ("gh", "hilbert_divided"):
        return q**2.5
    if tag in ("one_sided", "triangular"):
        return q
    if tag == "arazy":
        return q**2.5 * math.sqrt(float(params.get("lip", 1.0)))
    if tag == "beta":
        beta = float(params["beta"])
        return q ** (2.0 - beta) * float(params.get("lip", 1.0)) ** beta
    if tag == "holder":
        alpha, beta = float(params["alpha"]), float(params["beta"])
        if abs(1.0 / p - 0.5) >= min(alpha, 0.5):
            return math.nan
        return q ** (2.0 - beta) * float(params.get("holder", 1.0)) ** beta
    if tag == "arcsin":
        return q**2
    if tag == "imaginary_power":
        s = float(params.get("s", 0.0))
        return math.sqrt(1.0 + s * s) * q
    if tag == "marcinkiewicz":
        return q * float(params.get("variation_bound", 1.0))
    raise UnknownConstructionError(f"no reference envelope for construction {tag!r}")


@dataclass
class SymmetryReport:
    """Estimates of M at p, M_op at p' and conj(M) at p."""

    p: float
    original: float
    transposed: float
    conjugate: float
    tolerance: float

    @property
    def spread(self) -> float:
        values = (self.original, self.transposed, self.conjugate)
        top = max(values)
        return (top - min(values)) / top if top > 0.0 else 0.0

    @property
    def consistent(self) -> bool:
        return self.spread <= self.tolerance


def symmetry_check(
    M: SchurSymbol, p: float, settings: EstimatorSettings | None = None, tolerance: float = 0.05
) -> SymmetryReport:
    sym = symbol_symmetries(M)
    return SymmetryReport(
        p=p,
        original=estimate_sp_norm(M, p, settings).value,
        transposed=estimate_sp_norm(sym.transposed, conjugate_exponent(p), settings).value,
        conjugate=estimate_sp_norm(sym.conjugate, p, settings).value,
        tolerance=tolerance,
    )


@dataclass
class SweepRow:
    """One (construction, n, p, trial) cell of a constant-growth sweep."""

    construction: str
    n: int
    p: float
    trial: int
    seed: int
    sup: float
    estimate: float
    envelope: float
    ratio: float
    converged: bool
    violation: bool
    params: dict[str, Any] = field(default_factory=dict)


def trial_rng(seed: int, cell: int, trial: int) -> np.random.Generator:
    """Generator for one (cell, trial) of a sweep."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(cell, trial)))


def p_sweep(
    construction: str,
    params: Mapping[str, Any],
    p_list: Sequence[float],
    sizes: Sequence[int],
    trials: int = 1,
    seed: int = 0,
    k_global: float = 8.0,
    settings: EstimatorSettings | None = None,
    first_cell: int = 0,
) -> list[SweepRow]:
    """estimate_sp_norm / reference_envelope over p for seeded instances of a construction.

    The instance for sizes[i] and a trial comes from trial_rng(seed, first_cell + i, trial).
    """
    rows: list[SweepRow] = []
    for cell, n in enumerate(sizes, start=first_cell):
        for trial in range(trials):
            M = build_symbol(construction, params, n, trial_rng(seed, cell, trial))
            for p in p_list:
                envelope = reference_envelope(M, p)
                est = estimate_sp_norm(M, p, settings)
                ratio = est.value / envelope if not math.isnan(envelope) else math.nan
                rows.append(
                    SweepRow(
                        construction=construction,
                        n=n,
                        p=p,
                        trial=trial,
                        seed=seed,
                        sup=M.sup,
                        estimate=est.value,
                        envelope=envelope,
                        ratio=ratio,
                        converged=est.converged,
                        violation=(not math.isnan(ratio)) and ratio > k_global,
                        params=dict(M.provenance.params),
                    )
                )
    return rows

