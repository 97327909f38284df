"""Experiment suites: seeded trial grids over the library operations.

Each suite turns a SuiteConfig into an ordered list of tasks; a task builds
its instance from (seed, cell, trial) alone and returns finished report rows.
Tasks may run in a thread pool, but rows are assembled in task order, so a
rerun with the same config produces the same rows.
"""

import logging
import math
import time
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .. import __version__
from ..models.config import SuiteConfig
from ..models.report import ExperimentReport
from .errors import UnknownSuiteError
from .gaussian import (
    CALIBRATION_SAMPLES,
    DEFAULT_SAMPLES,
    GaussianSampler,
    KhintchineReport,
    khintchine_growth,
    khintchine_ratio,
    projection_coefficient,
    sgn_covariance,
    sign_multiplier_check,
)
from .hilbert import VectorFamily
from .linalg import random_complex_matrix, schatten_norm
from .norm_lab import (
    amplification_ladder,
    amplify,
    estimate_sp_norm,
    p_sweep,
    reference_envelope,
    trial_rng,
)
from .riesz import (
    RieszInstance,
    duality_identity_check,
    duality_tolerance,
    pythagoras_residual,
    riesz_transform,
    verify_rs1,
    verify_rs2,
)
from .symbols import (
    block_square_function,
    build_symbol,
    dyadic_blocks,
    imaginary_power_symbol,
    marcinkiewicz_decompose,
    mikhlin_condition,
    random_family,
    row_variation,
    uniform_grid,
)
from .vector_valued import rc_norm, rc_norm_certified

logger = logging.getLogger(__name__)

Row = dict[str, Any]
Task = Callable[[], list[Row]]

PYTHAGORAS_TOL = 1e-10
LP_BLOCKS_TOL = 1e-10
MARCINKIEWICZ_TOL = 1e-9
ESTIMATOR_ORACLE_TOL = 1e-8
AMPLIFICATION_SLACK = 1e-6
MIKHLIN_REFINEMENT_TOL = 0.10
PROJECTION_PAIRS = 10

RIESZ_COLUMNS = (
    "trial", "n", "d", "p", "c_p", "norm_x", "norm_diag", "rc_norm",
    "ratio_rs1", "deficit_rs2", "seed", "certified", "violation",
)
LEDGER_COLUMNS = (
    "construction", "trial", "n", "p", "sup", "estimate", "envelope", "ratio",
    "converged", "seed", "violation",
)


@dataclass(frozen=True)
class Suite:
    """A named experiment with a fixed column set."""

    name: str
    columns: tuple[str, ...]
    metric: str  # column whose maximum goes into the summary
    description: str
    tasks: Callable[[SuiteConfig], list[Task]]


SUITES: dict[str, Suite] = {}


def suite(
    name: str, columns: tuple[str, ...], metric: str, description: str
) -> Callable[[Callable[[SuiteConfig], list[Task]]], Callable[[SuiteConfig], list[Task]]]:
    """Register a task builder under `name`."""

    def register(build: Callable[[SuiteConfig], list[Task]]) -> Callable[[SuiteConfig], list[Task]]:
        SUITES[name] = Suite(name, columns, metric, description, build)
        return build

    return register


def get_suite(name: str) -> Suite:
    try:
        return SUITES[name]
    except KeyError:
        raise UnknownSuiteError(
            f"unknown suite {name!r}", {"known": sorted(SUITES)}
        ) from None


def _cells(config: SuiteConfig) -> Iterator[tuple[int, int, int, float]]:
    """(cell, n, d, p) over the configured grid, in a fixed order."""
    cell = 0
    for n in config.n:
        for d in config.d:
            for p in config.p:
                yield cell, n, d, p
                cell += 1


def _stream_id(config: SuiteConfig, cell: int, trial: int) -> int:
    """Gaussian stream key of one (cell, trial)."""
    return cell * config.trials + trial


def _samples(config: SuiteConfig, default: int) -> int:
    """Monte Carlo row count: the configured one, else the suite's default."""
    return default if config.samples is None else config.samples


def _params_for(config: SuiteConfig, construction: str) -> dict[str, Any]:
    for c in config.constructions:
        if c.construction == construction:
            return dict(c.params)
    return {}


def _riesz_instance(config: SuiteConfig, n: int, d: int, p: float, rng: np.random.Generator, trial: int) -> RieszInstance:
    vecs = random_complex_matrix((n, d), rng)
    if trial % 3 == 2 and n >= 2:
        # every third instance has a coincident pair, so E(x) is not just the diagonal
        vecs[1] = vecs[0]
    family = VectorFamily.from_vectors(vecs)
    x = random_complex_matrix((n, n), rng)
    return RieszInstance(family, x, p, strict_real=config.strict_real)


def _riesz_tasks(config: SuiteConfig, which: str) -> list[Task]:
    solver = config.solver_settings()
    tasks: list[Task] = []
    for cell, n, d, p in _cells(config):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, d: int = d, p: float = p, trial: int = trial) -> list[Row]:
                inst = _riesz_instance(config, n, d, p, trial_rng(config.seed, cell, trial), trial)
                rc = rc_norm_certified(riesz_transform(inst), p, solver)
                rs1 = verify_rs1(inst, config.k_global, rc=rc)
                rs2 = verify_rs2(inst, config.k_global, rc=rc)
                violation = rs1.violation if which == "rs1" else rs2.violation
                return [{
                    "trial": trial, "n": n, "d": d, "p": p, "c_p": rs1.c_p,
                    "norm_x": rs1.norm_x, "norm_diag": rs2.norm_diag,
                    "rc_norm": rs1.rc_norm, "ratio_rs1": rs1.ratio,
                    "deficit_rs2": rs2.deficit, "seed": config.seed,
                    "certified": rc.certified, "violation": violation,
                }]

            tasks.append(task)
    return tasks


@suite("rs1", RIESZ_COLUMNS, "ratio_rs1", "||R x||_RC_p <= K c_p ||x||_p on random instances")
def rs1_tasks(config: SuiteConfig) -> list[Task]:
    return _riesz_tasks(config, "rs1")


@suite("rs2", RIESZ_COLUMNS, "deficit_rs2", "||x||_p <= ||E x||_p + K c_p' ||R x||_RC_p on random instances")
def rs2_tasks(config: SuiteConfig) -> list[Task]:
    return _riesz_tasks(config, "rs2")


@suite(
    "duality",
    ("trial", "n", "d", "p", "abs_trace", "residual", "tolerance", "violation"),
    "residual",
    "<R x, Rbar y> = -tr(xy) for x, y supported off {u_j = u_k}",
)
def duality_tasks(config: SuiteConfig) -> list[Task]:
    tasks: list[Task] = []
    for cell, n, d, p in _cells(config):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, d: int = d, p: float = p, trial: int = trial) -> list[Row]:
                rng = trial_rng(config.seed, cell, trial)
                F = random_family(n, d, rng)
                off = ~F.coincidence_mask()
                x = np.where(off, random_complex_matrix((n, n), rng), 0.0)
                y = np.where(off, random_complex_matrix((n, n), rng), 0.0)
                residual = duality_identity_check(x, y, F, p)
                tol = duality_tolerance(x, y)
                trace = complex(np.einsum("jk,kj->", x, y))
                return [{
                    "trial": trial, "n": n, "d": d, "p": p, "abs_trace": abs(trace),
                    "residual": residual, "tolerance": tol, "violation": residual > tol,
                }]

            tasks.append(task)
    return tasks


@suite(
    "pythagoras",
    ("trial", "n", "d", "residual", "violation"),
    "residual",
    "||x||_2^2 = ||E x||_2^2 + ||R x||_RC_2^2",
)
def pythagoras_tasks(config: SuiteConfig) -> list[Task]:
    tasks: list[Task] = []
    cell = 0
    for n in config.n:
        for d in config.d:
            for trial in range(config.trials):

                def task(cell: int = cell, n: int = n, d: int = d, trial: int = trial) -> list[Row]:
                    inst = _riesz_instance(config, n, d, 2.0, trial_rng(config.seed, cell, trial), trial)
                    residual = pythagoras_residual(inst)
                    return [{
                        "trial": trial, "n": n, "d": d, "residual": residual,
                        "violation": residual > PYTHAGORAS_TOL,
                    }]

                tasks.append(task)
            cell += 1
    return tasks


@suite(
    "khintchine",
    ("trial", "kind", "n", "d", "p", "numerator", "denominator", "ratio", "scaled",
     "stderr", "gamma_p", "window_low", "window_high", "violation"),
    "ratio",
    "MC ||sum x_k W(u_k)||_p against ||sum x_k (x) u_k||_RC_p, and its sqrt(p) growth",
)
def khintchine_tasks(config: SuiteConfig) -> list[Task]:
    samples = _samples(config, DEFAULT_SAMPLES)
    tasks: list[Task] = []
    for cell, n, d, p in _cells(config):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, d: int = d, p: float = p, trial: int = trial) -> list[Row]:
                rng = trial_rng(config.seed, cell, trial)
                if trial == 0:
                    # single term x (x) u with ||u|| = 1: the ratio is the gaussian moment
                    u = rng.standard_normal(d)
                    F = VectorFamily.from_vectors((u / np.linalg.norm(u))[None, :])
                    xs = [random_complex_matrix((n, n), rng)]
                else:
                    F = random_family(n, d, rng, real=True)
                    xs = [random_complex_matrix((n, n), rng) for _ in range(n)]
                S = GaussianSampler(F, seed=config.seed, samples=samples)
                report = khintchine_ratio(
                    xs, F, p, S, config.a_emp, config.b_emp, _stream_id(config, cell, trial)
                )
                if trial == 0:
                    violation = abs(report.ratio - report.gamma_p) > max(3.0 * report.stderr, 1e-12)
                else:
                    violation = not report.within_window
                return [_khintchine_row(trial, "single" if trial == 0 else "random", n, d, report, violation)]

            tasks.append(task)

    # one fixed instance per (n, d, trial) evaluated over the whole p grid
    cell = len(config.n) * len(config.d) * len(config.p)
    for n in config.n:
        for d in config.d:
            for trial in range(config.trials):

                def growth(cell: int = cell, n: int = n, d: int = d, trial: int = trial) -> list[Row]:
                    rng = trial_rng(config.seed, cell, trial)
                    F = random_family(n, d, rng, real=True)
                    xs = [random_complex_matrix((n, n), rng) for _ in range(n)]
                    S = GaussianSampler(F, seed=config.seed, samples=samples)
                    result = khintchine_growth(
                        xs, F, config.p, S, config.a_emp, config.b_emp, _stream_id(config, cell, trial)
                    )
                    return [_khintchine_row(trial, "growth", n, d, result.worst, result.violation)]

                tasks.append(growth)
            cell += 1
    return tasks


def _khintchine_row(trial: int, kind: str, n: int, d: int, report: KhintchineReport, violation: bool) -> Row:
    lo, hi = report.window
    return {
        "trial": trial, "kind": kind, "n": n, "d": d, "p": report.p,
        "numerator": report.numerator, "denominator": report.denominator,
        "ratio": report.ratio, "scaled": report.ratio / math.sqrt(report.p),
        "stderr": report.stderr, "gamma_p": report.gamma_p,
        "window_low": lo, "window_high": hi, "violation": violation,
    }


GAUSSIAN_COLUMNS = (
    "trial", "check", "inner", "value", "stderr", "target", "low", "high", "violation",
)


def _mc_row(trial: int, check: str, inner: float, est: Any) -> Row:
    return {
        "trial": trial, "check": check, "inner": inner, "value": est.value,
        "stderr": est.stderr, "target": est.target, "low": est.lower,
        "high": est.upper, "violation": not est.covers_target,
    }


@suite(
    "gaussian-identities",
    GAUSSIAN_COLUMNS,
    "stderr",
    "sgn/arcsin covariance on a 9-point grid and the sqrt(2/pi) projection coefficient",
)
def gaussian_identities_tasks(config: SuiteConfig) -> list[Task]:
    samples = _samples(config, CALIBRATION_SAMPLES)

    def arcsin_curve() -> list[Row]:
        ts = np.linspace(-1.0, 1.0, 9)
        vecs = [np.array([1.0, 0.0])] + [np.array([t, math.sqrt(max(1.0 - t * t, 0.0))]) for t in ts]
        S = GaussianSampler(VectorFamily.from_vectors(np.array(vecs)), seed=config.seed, samples=samples)
        rows = []
        for i, t in enumerate(ts):
            rows.append(_mc_row(i, "arcsin", float(t), sgn_covariance(S, 0, i + 1)))
        return rows

    tasks: list[Task] = [arcsin_curve]
    d = max(config.d)
    # fixed pair count, independent of config.trials
    for trial in range(PROJECTION_PAIRS):

        def projection(trial: int = trial) -> list[Row]:
            F = random_family(2, max(d, 1), trial_rng(config.seed, 1, trial), real=True)
            S = GaussianSampler(F, seed=config.seed, samples=samples)
            est = projection_coefficient(S, 0, 1, 1 + trial)  # stream 0 is the arcsin curve
            inner = float(np.real(np.vdot(F.vectors[1], F.vectors[0])))
            return [_mc_row(trial, "projection", inner, est)]

        tasks.append(projection)
    return tasks


def _ledger_tasks(config: SuiteConfig, constructions: list[str]) -> list[Task]:
    settings = config.estimator_settings()
    tasks: list[Task] = []
    cell = 0
    for construction in constructions:
        params = _params_for(config, construction)
        for n in config.n:

            def task(construction: str = construction, params: dict[str, Any] = params, n: int = n, cell: int = cell) -> list[Row]:
                sweep = p_sweep(
                    construction, params, config.p, [n], config.trials, config.seed,
                    config.k_global, settings, first_cell=cell,
                )
                return [{
                    "construction": r.construction, "trial": r.trial, "n": r.n, "p": r.p,
                    "sup": r.sup, "estimate": r.estimate, "envelope": r.envelope,
                    "ratio": r.ratio, "converged": r.converged, "seed": r.seed,
                    "violation": r.violation,
                } for r in sweep]

            tasks.append(task)
            cell += 1
    return tasks


def _ledger_suite(name: str, construction: str, description: str) -> None:
    def build(config: SuiteConfig) -> list[Task]:
        return _ledger_tasks(config, [construction])

    SUITES[name] = Suite(name, LEDGER_COLUMNS, "ratio", description, build)


_ledger_suite("gh", "gh", "Grothendieck-Haagerup type symbols against max{p,p'}^(5/2)")
_ledger_suite("arazy", "arazy", "square roots of divided differences against max{p,p'}^(5/2) sqrt(Lip)")
_ledger_suite("beta", "beta", "beta powers of divided differences against max{p,p'}^(2-beta) Lip^beta")
_ledger_suite("triangular", "triangular", "generalized triangular truncations against max{p,p'}")

DEFAULT_SWEEP = ("triangular", "gh", "arazy")


@suite("p-sweep", LEDGER_COLUMNS, "ratio", "estimate / envelope over p for each configured construction")
def p_sweep_tasks(config: SuiteConfig) -> list[Task]:
    names = [c.construction for c in config.constructions] or list(DEFAULT_SWEEP)
    return _ledger_tasks(config, names)


@suite(
    "marcinkiewicz",
    ("trial", "n", "p", "variation_bound", "weight_sum", "residual", "estimate",
     "envelope", "ratio", "violation"),
    "ratio",
    "layer-cake decomposition of bounded-variation symbols and their S_p estimates",
)
def marcinkiewicz_tasks(config: SuiteConfig) -> list[Task]:
    settings = config.estimator_settings()
    params = _params_for(config, "marcinkiewicz")
    tasks: list[Task] = []
    for cell, n in enumerate(config.n):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, trial: int = trial) -> list[Row]:
                M = build_symbol("marcinkiewicz", params, n, trial_rng(config.seed, cell, trial))
                dec = marcinkiewicz_decompose(M)
                R = M.entries.real
                residual = float(np.max(np.abs(dec.reconstruct() - R)))
                per_row = [dec.weight_sum(j) + abs(float(dec.offsets[j])) for j in range(n)]
                weights = max(per_row)
                bound = float(np.max(row_variation(R) + np.abs(R[:, -1])))
                bad = residual > MARCINKIEWICZ_TOL or weights > bound * (1.0 + 1e-12) + 1e-12
                rows = []
                for p in config.p:
                    envelope = reference_envelope(M, p)
                    est = estimate_sp_norm(M, p, settings).value
                    ratio = est / envelope if envelope > 0.0 else 0.0
                    rows.append({
                        "trial": trial, "n": n, "p": p, "variation_bound": bound,
                        "weight_sum": weights, "residual": residual, "estimate": est,
                        "envelope": envelope, "ratio": ratio,
                        "violation": bad or ratio > config.k_global,
                    })
                return rows

            tasks.append(task)
    return tasks


@suite(
    "mikhlin",
    ("trial", "n", "dim", "s", "spacing", "condition", "refined", "change",
     "modulus_error", "violation"),
    "change",
    "discrete Hörmander-Mikhlin condition of |x-y|^(is) under grid refinement",
)
def mikhlin_tasks(config: SuiteConfig) -> list[Task]:
    tasks: list[Task] = []
    for cell, (n, dim) in enumerate((n, d) for n in config.n for d in config.d):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, dim: int = dim, trial: int = trial) -> list[Row]:
                rng = trial_rng(config.seed, cell, trial)
                s = float(rng.uniform(0.5, 2.0))
                h = 1.0 / (n - 1)
                coarse = imaginary_power_symbol(uniform_grid([n] * dim, h), s)
                fine = imaginary_power_symbol(uniform_grid([2 * n - 1] * dim, h / 2), s)
                value = mikhlin_condition(coarse, [n] * dim, h)
                refined = mikhlin_condition(fine, [2 * n - 1] * dim, h / 2)
                change = abs(refined - value) / value
                modulus_error = float(np.max(np.abs(np.abs(coarse.entries) - 1.0)))
                return [{
                    "trial": trial, "n": n, "dim": dim, "s": s, "spacing": h,
                    "condition": value, "refined": refined, "change": change,
                    "modulus_error": modulus_error,
                    "violation": change > MIKHLIN_REFINEMENT_TOL or modulus_error > 1e-12,
                }]

            tasks.append(task)
    return tasks


@suite(
    "lp-blocks",
    ("trial", "n", "blocks", "rc_norm", "hs_norm", "residual", "violation"),
    "residual",
    "dyadic block square function at p = 2 against the restricted Hilbert-Schmidt norm",
)
def lp_blocks_tasks(config: SuiteConfig) -> list[Task]:
    tasks: list[Task] = []
    for cell, n in enumerate(config.n):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, trial: int = trial) -> list[Row]:
                x = random_complex_matrix((n, n), trial_rng(config.seed, cell, trial))
                blocks = dyadic_blocks(np.arange(n, dtype=np.float64))
                rc = rc_norm(block_square_function(x, blocks), 2.0)
                hs = schatten_norm(np.where(blocks.union(), x, 0.0), 2.0)
                residual = abs(rc - hs) / hs if hs > 0.0 else rc
                return [{
                    "trial": trial, "n": n, "blocks": len(blocks.nonempty()),
                    "rc_norm": rc, "hs_norm": hs, "residual": residual,
                    "violation": residual > LP_BLOCKS_TOL,
                }]

            tasks.append(task)
    return tasks


@suite(
    "estimator",
    ("trial", "construction", "n", "p", "m", "estimate", "recomputed", "oracle",
     "error", "converged", "violation"),
    "error",
    "estimator oracles: max|M| at p = 2, stored certificates, monotone amplification",
)
def estimator_tasks(config: SuiteConfig) -> list[Task]:
    settings = config.estimator_settings()
    names = [c.construction for c in config.constructions] or ["gh"]
    tasks: list[Task] = []
    cell = 0
    for construction in names:
        params = _params_for(config, construction)
        for n in config.n:
            for p in config.p:
                for trial in range(config.trials):

                    def task(cell: int = cell, construction: str = construction, params: dict[str, Any] = params,
                             n: int = n, p: float = p, trial: int = trial) -> list[Row]:
                        M = build_symbol(construction, params, n, trial_rng(config.seed, cell, trial))
                        ladder = amplification_ladder(M, p, config.amplify, settings)
                        rows = []
                        prev = 0.0
                        for m, est in zip(sorted(set(config.amplify)), ladder):
                            recomputed = est.recompute(amplify(M, m))
                            oracle = M.sup if p == 2.0 else math.nan
                            error = abs(est.value - oracle) if p == 2.0 else 0.0
                            bad = (
                                error > ESTIMATOR_ORACLE_TOL
                                or est.value < prev - AMPLIFICATION_SLACK
                                or abs(recomputed - est.value) > 1e-10 * (1.0 + est.value)
                            )
                            prev = est.value
                            rows.append({
                                "trial": trial, "construction": construction, "n": n, "p": p,
                                "m": m, "estimate": est.value, "recomputed": recomputed,
                                "oracle": oracle, "error": error, "converged": est.converged,
                                "violation": bad,
                            })
                        return rows

                    tasks.append(task)
                cell += 1
    return tasks


@suite(
    "sign-equivalence",
    ("trial", "n", "d", "p", "ratio", "c_p", "window_low", "window_high", "samples", "violation"),
    "ratio",
    "pth mean of ||(sgn(f_j - f_k) x_jk)||_p over ||x||_p for gaussian f_j",
)
def sign_equivalence_tasks(config: SuiteConfig) -> list[Task]:
    tasks: list[Task] = []
    for cell, n, d, p in _cells(config):
        for trial in range(config.trials):

            def task(cell: int = cell, n: int = n, d: int = d, p: float = p, trial: int = trial) -> list[Row]:
                rng = trial_rng(config.seed, cell, trial)
                F = random_family(n, d, rng, real=True)
                x = random_complex_matrix((n, n), rng)
                S = GaussianSampler(F, seed=config.seed, samples=config.sign_samples)
                report = sign_multiplier_check(
                    F, x, p, S, config.sign_samples, config.k_global, _stream_id(config, cell, trial)
                )
                lo, hi = report.window
                return [{
                    "trial": trial, "n": n, "d": d, "p": p, "ratio": report.ratio,
                    "c_p": report.c_p, "window_low": lo, "window_high": hi,
                    "samples": report.samples, "violation": not report.within_window,
                }]

            tasks.append(task)
    return tasks


def _plain(value: Any) -> Any:
    """numpy scalars to Python scalars, so reports serialize the same everywhere."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def _summary(spec: Suite, rows: list[Row], tasks: int) -> dict[str, Any]:
    values = [
        float(r[spec.metric]) for r in rows
        if isinstance(r.get(spec.metric), (int, float)) and not math.isnan(float(r[spec.metric]))
    ]
    return {
        "tasks": tasks,
        "rows": len(rows),
        "violations": sum(1 for r in rows if r.get("violation")),
        f"max_{spec.metric}": max(values) if values else None,
    }


def run_suite(config: SuiteConfig) -> ExperimentReport:
    """Run the configured suite over its trial grid.

    Args:
        config: Validated suite configuration

    Returns:
        Report with rows ordered by task index and a summary of violations
    """
    spec = get_suite(config.suite)
    config.validate()
    tasks = spec.tasks(config)
    logger.info("suite %s: %d tasks on %d worker(s)", spec.name, len(tasks), config.workers)
    start = time.perf_counter()
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(lambda t: t(), tasks))
    else:
        batches = [t() for t in tasks]
    rows = [{k: _plain(v) for k, v in row.items()} for batch in batches for row in batch]
    report = ExperimentReport(
        suite=spec.name,
        columns=spec.columns,
        rows=rows,
        summary=_summary(spec, rows, len(tasks)),
        config=config.to_dict(),
        tool_version=__version__,
        wall_time=time.perf_counter() - start,
    )
    if report.violations:
        logger.warning("suite %s: %d violation(s)", spec.name, report.violations)
    return report

