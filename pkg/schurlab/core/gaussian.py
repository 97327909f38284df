"""Monte Carlo gaussian fields W(u_j) with covariance Re<u_j, u_k>.

Samples are drawn through an eigendecomposition factor of the real Gram, so
repeated or opposite vectors are allowed. Random streams are Philox generators
keyed by (seed, trial, chunk); a sample matrix depends only on these keys and
the chunk size.
"""

import logging
import math
from collections.abc import Hashable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln

from .errors import FactorizationError, PreconditionError
from .hilbert import VectorFamily, complexify_real_embedding, gram
from .linalg import as_matrix, check_exponent, conjugate_exponent, psd_tolerance, schatten_norm
from .schur import sgn
from .vector_valued import column_norm, rc_norm_certified, row_norm, simple_tensor_sum

logger = logging.getLogger(__name__)

RealArray = npt.NDArray[np.float64]

DEFAULT_SAMPLES = 100_000
CALIBRATION_SAMPLES = 1_000_000
CHUNK_ROWS = 65_536
UNIT_TOL = 1e-9


def gaussian_moment(p: float) -> float:
    """(E|g|^p)^(1/p) for a standard gaussian g: (2^(p/2) Gamma((p+1)/2) / sqrt(pi))^(1/p)."""
    p = check_exponent(p, lower=0.0, strict=True)
    log_moment = 0.5 * p * math.log(2.0) + float(gammaln(0.5 * (p + 1.0))) - 0.5 * math.log(math.pi)
    return math.exp(log_moment / p)


def philox_stream(seed: int, trial: int, chunk: int) -> np.random.Generator:
    """Counter-based generator for one (seed, trial, chunk) key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial, chunk))))


@dataclass
class MCEstimate:
    """Monte Carlo estimate with a 3-sigma interval."""

    value: float
    stderr: float
    target: float | None = None
    samples: int = 0

    @property
    def lower(self) -> float:
        return self.value - 3.0 * self.stderr

    @property
    def upper(self) -> float:
        return self.value + 3.0 * self.stderr

    @property
    def covers_target(self) -> bool:
        if self.target is None:
            return True
        # floor on the width so exact (zero-variance) estimates are not rejected by rounding
        slack = max(3.0 * self.stderr, 1e-12)
        return abs(self.value - self.target) <= slack


class GaussianSampler:
    """Gaussian field over a vector family.

    Complex families are replaced by their real embedding, whose real Gram is
    Re<u_j, u_k>.
    """

    def __init__(
        self,
        family: VectorFamily,
        seed: int = 0,
        samples: int = DEFAULT_SAMPLES,
        chunk_rows: int = CHUNK_ROWS,
    ) -> None:
        """Initialize the sampler.

        Args:
            family: Vectors u_j indexing the field
            seed: Master seed
            samples: Number of i.i.d. rows N
            chunk_rows: Rows drawn per generator key
        """
        if samples < 1:
            raise PreconditionError(f"sample count must be positive, got {samples}")
        self.family = family if family.is_real() else complexify_real_embedding(family)
        self.seed = int(seed)
        self.samples = int(samples)
        self.chunk_rows = int(chunk_rows)
        self._factor: RealArray | None = None

    @property
    def gram(self) -> RealArray:
        result: RealArray = gram(self.family).real
        return result

    @property
    def factor(self) -> RealArray:
        """L with L L^T = Gram, from the nonnegative part of the spectrum."""
        if self._factor is None:
            G = self.gram
            tol = psd_tolerance(G)
            vals, vecs = np.linalg.eigh(0.5 * (G + G.T))
            if vals.size and vals[0] < -tol:
                raise FactorizationError(
                    f"Gram has eigenvalue {vals[0]:.3e} below -{tol:.1e}",
                    {"min_eigenvalue": float(vals[0])},
                )
            self._factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
        return self._factor

    def index(self, label: Hashable) -> int:
        return self.family.index(label)

    def iter_field(self, trial: int = 0) -> Iterator[RealArray]:
        """Chunks of rows (W(u_1), ..., W(u_n)) in order."""
        L = self.factor
        n = L.shape[0]
        remaining = self.samples
        chunk = 0
        while remaining > 0:
            rows = min(self.chunk_rows, remaining)
            z = philox_stream(self.seed, trial, chunk).standard_normal((rows, n))
            yield z @ L.T
            remaining -= rows
            chunk += 1

    def with_samples(self, samples: int) -> "GaussianSampler":
        return GaussianSampler(self.family, self.seed, samples, self.chunk_rows)


def sample_field(S: GaussianSampler, trial: int = 0) -> RealArray:
    """N x n matrix of samples of (W(u_j))_j."""
    return np.concatenate(list(S.iter_field(trial)), axis=0)


def empirical_covariance(S: GaussianSampler, trial: int = 0) -> RealArray:
    W = sample_field(S, trial)
    result: RealArray = W.T @ W / W.shape[0]
    return result


def sgn_covariance(S: GaussianSampler, j: Hashable, k: Hashable, trial: int = 0) -> MCEstimate:
    """Mean of sgn(W(u_j)) sgn(W(u_k)); target (2/pi) arcsin <u_j, u_k>."""
    a, b = S.index(j), S.index(k)
    u, w = S.family.vectors[a].real, S.family.vectors[b].real
    norms = (float(np.linalg.norm(u)), float(np.linalg.norm(w)))
    if any(abs(nm - 1.0) > UNIT_TOL for nm in norms):
        raise PreconditionError("sgn covariance needs unit vectors", {"norms": norms})
    W = sample_field(S, trial)
    prod = sgn(W[:, a]) * sgn(W[:, b])
    target = 2.0 / math.pi * math.asin(float(np.clip(u @ w, -1.0, 1.0)))
    return MCEstimate(
        value=float(prod.mean()),
        stderr=float(prod.std(ddof=1) / math.sqrt(prod.size)) if prod.size > 1 else 0.0,
        target=target,
        samples=prod.size,
    )


def projection_coefficient(S: GaussianSampler, j: Hashable, k: Hashable, trial: int = 0) -> MCEstimate:
    """Regression slope of sgn(W(u_j) - W(u_k)) on W(u_j - u_k)/||u_j - u_k||; target sqrt(2/pi)."""
    a, b = S.index(j), S.index(k)
    dist = float(np.linalg.norm(S.family.vectors[a] - S.family.vectors[b]))
    if dist <= S.family.tol_eq:
        raise PreconditionError(f"u_{j} = u_{k}: projection undefined")
    W = sample_field(S, trial)
    diff = W[:, a] - W[:, b]
    z = diff / dist
    y = sgn(diff)
    szz = float(z @ z)
    slope = float(y @ z) / szz
    resid = y - slope * z
    dof = max(z.size - 1, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / szz)
    return MCEstimate(value=slope, stderr=stderr, target=math.sqrt(2.0 / math.pi), samples=z.size)


def _combination_norms(
    xs: npt.NDArray[np.complex128], W: RealArray, p: float
) -> RealArray:
    """||sum_k W_k(omega) x_k||_p for each sampled row omega."""
    mats = np.einsum("sk,kab->sab", W, xs)
    s = np.linalg.svd(mats, compute_uv=False)
    if math.isinf(p):
        result: RealArray = s[:, 0]
        return result
    top = np.maximum(s[:, :1], np.finfo(np.float64).tiny)
    result = top[:, 0] * np.sum((s / top) ** p, axis=1) ** (1.0 / p)
    return result


def _stack(xs: Sequence[npt.ArrayLike]) -> npt.NDArray[np.complex128]:
    return np.stack([as_matrix(x) for x in xs])


def _check_sampler(F: VectorFamily, S: GaussianSampler) -> None:
    if F.size != S.family.size or F.labels != S.family.labels:
        raise PreconditionError(
            f"sampler is indexed by {S.family.size} vectors, family has {F.size}"
        )


@dataclass
class KhintchineReport:
    """MC ||sum x_k W(u_k)||_p over ||sum x_k (x) u_k||_{RC_p}."""

    p: float
    numerator: float
    denominator: float
    ratio: float
    stderr: float
    gamma_p: float
    window: tuple[float, float]
    certified: bool

    @property
    def within_window(self) -> bool:
        lo, hi = self.window
        return lo <= self.ratio <= hi


def khintchine_ratio(
    xs: Sequence[npt.ArrayLike],
    F: VectorFamily,
    p: float,
    S: GaussianSampler,
    a_emp: float = 4.0,
    b_emp: float = 4.0,
    trial: int = 0,
) -> KhintchineReport:
    """Empirical Khintchine ratio against the window [1/a_emp, b_emp sqrt(p)].

    The element sum x_k (x) u_k is formed from the real embedding of F, the
    same vectors the gaussian field is indexed by.
    """
    p = check_exponent(p, strict=True)
    _check_sampler(F, S)
    mats = _stack(xs)
    powers: list[RealArray] = []
    for chunk in S.iter_field(trial):
        powers.append(_combination_norms(mats, chunk, p) ** p)
    t = np.concatenate(powers)
    mean = float(t.mean())
    se_mean = float(t.std(ddof=1) / math.sqrt(t.size)) if t.size > 1 else 0.0
    numerator = mean ** (1.0 / p)
    se_num = (numerator / (p * mean)) * se_mean if mean > 0.0 else 0.0
    rc = rc_norm_certified(simple_tensor_sum(list(mats), S.family), p)
    denominator = rc.upper
    ratio = numerator / denominator if denominator > 0.0 else math.nan
    return KhintchineReport(
        p=p,
        numerator=numerator,
        denominator=denominator,
        ratio=ratio,
        stderr=se_num / denominator if denominator > 0.0 else math.nan,
        gamma_p=gaussian_moment(p),
        window=(1.0 / a_emp, b_emp * math.sqrt(p)),
        certified=rc.certified,
    )


@dataclass
class KhintchineGrowth:
    """Khintchine ratios of one fixed instance across a p grid."""

    reports: list[KhintchineReport]
    b_emp: float

    @property
    def scaled(self) -> list[float]:
        """ratio / sqrt(p) per exponent."""
        return [r.ratio / math.sqrt(r.p) for r in self.reports]

    @property
    def growth(self) -> float:
        return max(self.scaled)

    @property
    def worst(self) -> KhintchineReport:
        scaled = self.scaled
        return self.reports[scaled.index(max(scaled))]

    @property
    def violation(self) -> bool:
        return not self.growth <= self.b_emp


def khintchine_growth(
    xs: Sequence[npt.ArrayLike],
    F: VectorFamily,
    ps: Sequence[float],
    S: GaussianSampler,
    a_emp: float = 4.0,
    b_emp: float = 4.0,
    trial: int = 0,
) -> KhintchineGrowth:
    """Evaluate khintchine_ratio on the same x_k, family and gaussian stream for every p.

    The upper constant must grow no faster than b_emp sqrt(p), so the check
    is max_p ratio / sqrt(p) <= b_emp.
    """
    if not ps:
        raise PreconditionError("p grid is empty")
    reports = [khintchine_ratio(xs, F, p, S, a_emp, b_emp, trial) for p in ps]
    return KhintchineGrowth(reports=reports, b_emp=b_emp)


@dataclass
class SignEquivalenceReport:
    """pth mean of ||(sgn(f_j - f_k) x_jk)||_p over ||x||_p."""

    p: float
    ratio: float
    c_p: float  # max{p, p'}
    k: float
    samples: int
    per_sample: RealArray = field(default_factory=lambda: np.zeros(0))

    @property
    def window(self) -> tuple[float, float]:
        return 1.0 / (self.k * self.c_p), self.k * self.c_p

    @property
    def within_window(self) -> bool:
        lo, hi = self.window
        return lo <= self.ratio <= hi


def sign_multiplier_check(
    F: VectorFamily,
    x: npt.ArrayLike,
    p: float,
    S: GaussianSampler,
    sign_samples: int = 2000,
    k: float = 1.0,
    trial: int = 0,
) -> SignEquivalenceReport:
    """Sign multipliers sgn(f_j - f_k) with f_j = W(u_j), one SVD per sampled omega."""
    p = check_exponent(p, strict=True)
    xm = as_matrix(x, "x")
    if xm.shape != (F.size, F.size):
        raise PreconditionError(f"x has shape {xm.shape}, family has {F.size} vectors")
    norm_x = schatten_norm(xm, p)
    if norm_x == 0.0:
        raise PreconditionError("sign equivalence ratio undefined for x = 0")
    W = sample_field(S.with_samples(min(sign_samples, S.samples)), trial)
    signs = sgn(W[:, :, None] - W[:, None, :])
    s = np.linalg.svd(signs * xm[None, :, :], compute_uv=False)
    per_sample = np.sum(s**p, axis=1) ** (1.0 / p) if not math.isinf(p) else s[:, 0]
    ratio = float(np.mean(per_sample**p) ** (1.0 / p)) / norm_x
    return SignEquivalenceReport(
        p=p,
        ratio=ratio,
        c_p=max(p, conjugate_exponent(p)),
        k=k,
        samples=W.shape[0],
        per_sample=per_sample / norm_x,
    )


@dataclass
class SquareFunctionReport:
    """MC conditional-expectation square functions against the exact R_p/C_p norms."""

    p: float
    mc_row: float
    exact_row: float
    mc_column: float
    exact_column: float

    @property
    def row_error(self) -> float:
        return abs(self.mc_row - self.exact_row) / max(self.exact_row, 1e-300)

    @property
    def column_error(self) -> float:
        return abs(self.mc_column - self.exact_column) / max(self.exact_column, 1e-300)


def square_function_check(
    xs: Sequence[npt.ArrayLike], F: VectorFamily, p: float, S: GaussianSampler, trial: int = 0
) -> SquareFunctionReport:
    """||E(F F*)||_{p/2}^(1/2) and ||E(F* F)||_{p/2}^(1/2) for F = sum x_k W(u_k), p >= 2."""
    p = check_exponent(p, lower=2.0)
    _check_sampler(F, S)
    mats = _stack(xs)
    m = mats.shape[1]
    row_acc = np.zeros((m, m), dtype=np.complex128)
    col_acc = np.zeros((m, m), dtype=np.complex128)
    count = 0
    for chunk in S.iter_field(trial):
        Fs = np.einsum("sk,kab->sab", chunk, mats)
        row_acc += np.einsum("sab,scb->ac", Fs, Fs.conj())
        col_acc += np.einsum("sba,sbc->ac", Fs.conj(), Fs)
        count += chunk.shape[0]
    half = p / 2.0
    element = simple_tensor_sum(list(mats), S.family)
    return SquareFunctionReport(
        p=p,
        mc_row=math.sqrt(schatten_norm(row_acc / count, half)),
        exact_row=row_norm(element, p),
        mc_column=math.sqrt(schatten_norm(col_acc / count, half)),
        exact_column=column_norm(element, p),
    )
