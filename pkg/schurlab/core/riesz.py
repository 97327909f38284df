"""Riesz-Schur transforms x_jk -> x_jk (u_j - u_k)/||u_j - u_k|| and their norm inequalities.

The transform sends a scalar matrix to a vector-valued one. Two inequalities
are checked against c_p = max{p, (p/(p-1))^(3/2)} up to a global constant:

    RS1   ||R x||_{RC_p} <= K c_p ||x||_p
    RS2   ||x||_p <= ||E x||_p + K c_p' ||R x||_{RC_p}

where E keeps the block {u_j = u_k}. The duality identity
<R x, Rbar y> = -tr(xy) for x, y supported off that block is exact.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, SupportError, UndefinedRatioError
from .hilbert import VectorFamily, complexify_real_embedding
from .linalg import ComplexMatrix, as_matrix, check_exponent, conjugate_exponent, schatten_norm
from .schur import diagonal_expectation
from .vector_valued import (
    RCNormResult,
    SolverSettings,
    VectorValuedElement,
    duality_bracket,
    rc_norm_certified,
)

logger = logging.getLogger(__name__)

DEFAULT_K_GLOBAL = 8.0
DUALITY_TOL = 1e-9


def c_p(p: float) -> float:
    """max{p, (p/(p-1))^(3/2)}."""
    p = check_exponent(p, strict=True)
    return max(p, (p / (p - 1.0)) ** 1.5)


@dataclass(frozen=True)
class RieszInstance:
    """A family, an input matrix over the same index set, and an exponent."""

    family: VectorFamily
    x: ComplexMatrix
    p: float
    strict_real: bool = False

    def __post_init__(self) -> None:
        x = as_matrix(self.x, "x")
        if x.shape != (self.family.size, self.family.size):
            raise DimensionError(
                f"x has shape {x.shape}, family has {self.family.size} vectors"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", check_exponent(self.p, strict=True))

    @property
    def effective_family(self) -> VectorFamily:
        """The family the transform uses (realified in strict-real mode)."""
        if self.strict_real and not self.family.is_real():
            return complexify_real_embedding(self.family)
        return self.family

    @property
    def realified(self) -> bool:
        return self.strict_real and not self.family.is_real()

    def restrict(self, indices: list[int]) -> "RieszInstance":
        idx = np.asarray(indices, dtype=int)
        return RieszInstance(
            self.family.restrict(indices), self.x[np.ix_(idx, idx)], self.p, self.strict_real
        )

    def descriptor(self) -> dict[str, Any]:
        return {
            "n": self.family.size,
            "d": self.family.dim,
            "p": self.p,
            "strict_real": self.strict_real,
            "realified": self.realified,
            # realification of a complex family costs a factor sqrt(2)
            "homogeneity_loss": math.sqrt(2.0) if self.realified else 1.0,
        }


def riesz_transform(inst: RieszInstance) -> VectorValuedElement:
    """R x = sum x_jk e_jk (x) (u_j - u_k)/||u_j - u_k||, zero vector where u_j = u_k."""
    F = inst.effective_family
    return VectorValuedElement(inst.x, F.normalized_differences(), F.labels)


def conjugate_riesz_transform(inst: RieszInstance) -> VectorValuedElement:
    """Rbar x with vectors J(u_j - u_k)/||u_j - u_k||."""
    F = inst.effective_family
    return VectorValuedElement(inst.x, np.conj(F.normalized_differences()), F.labels)


@dataclass
class RS1Report:
    """||R x||_{RC_p} against c_p ||x||_p."""

    p: float
    c_p: float
    norm_x: float
    rc_norm: float
    rc_lower: float
    certified: bool
    ratio: float
    normalized: float  # ratio / c_p
    k_global: float
    violation: bool


@dataclass
class RS2Report:
    """||x||_p against ||E x||_p + K c_p' ||R x||_{RC_p}."""

    p: float
    c_p_conj: float
    norm_x: float
    norm_diag: float
    rc_norm: float
    certified: bool
    deficit: float
    k_global: float
    violation: bool


def verify_rs1(
    inst: RieszInstance,
    k_global: float = DEFAULT_K_GLOBAL,
    settings: SolverSettings | None = None,
    rc: RCNormResult | None = None,
) -> RS1Report:
    """Measure the RS1 ratio; violation when ratio / c_p exceeds k_global.

    Uses the upper end of the RC_p interval so a reported pass is never an
    artifact of the splitting solver.
    """
    norm_x = schatten_norm(inst.x, inst.p)
    if norm_x == 0.0:
        raise UndefinedRatioError("RS1 ratio undefined for x = 0")
    if rc is None:
        rc = rc_norm_certified(riesz_transform(inst), inst.p, settings)
    cp = c_p(inst.p)
    ratio = rc.upper / norm_x
    return RS1Report(
        p=inst.p,
        c_p=cp,
        norm_x=norm_x,
        rc_norm=rc.upper,
        rc_lower=rc.lower,
        certified=rc.certified,
        ratio=ratio,
        normalized=ratio / cp,
        k_global=k_global,
        violation=ratio / cp > k_global,
    )


def verify_rs2(
    inst: RieszInstance,
    k_global: float = DEFAULT_K_GLOBAL,
    settings: SolverSettings | None = None,
    rc: RCNormResult | None = None,
) -> RS2Report:
    """Measure the RS2 deficit; violation when it is positive.

    The RC_p term enters with its certified lower bound.
    """
    p = inst.p
    norm_x = schatten_norm(inst.x, p)
    norm_diag = schatten_norm(diagonal_expectation(inst.x, inst.effective_family), p)
    if rc is None:
        rc = rc_norm_certified(riesz_transform(inst), p, settings)
    cq = c_p(conjugate_exponent(p))
    deficit = norm_x - (norm_diag + k_global * cq * rc.lower)
    slack = 1e-12 * (1.0 + norm_x)
    return RS2Report(
        p=p,
        c_p_conj=cq,
        norm_x=norm_x,
        norm_diag=norm_diag,
        rc_norm=rc.lower,
        certified=rc.certified,
        deficit=deficit,
        k_global=k_global,
        violation=deficit > slack,
    )


@dataclass
class ConstantLedger:
    """Measured RS1/RS2 quantities of one instance against c_p."""

    p: float
    c_p: float
    ratio_rs1: float
    deficit_rs2: float
    seed: int
    descriptor: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def measure(
        cls,
        inst: RieszInstance,
        seed: int,
        k_global: float = DEFAULT_K_GLOBAL,
        settings: SolverSettings | None = None,
    ) -> "ConstantLedger":
        rc = rc_norm_certified(riesz_transform(inst), inst.p, settings)
        rs1 = verify_rs1(inst, k_global, rc=rc)
        rs2 = verify_rs2(inst, k_global, rc=rc)
        return cls(
            p=inst.p,
            c_p=rs1.c_p,
            ratio_rs1=rs1.ratio,
            deficit_rs2=rs2.deficit,
            seed=seed,
            descriptor={**inst.descriptor(), "k_global": k_global},
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "c_p": self.c_p,
            "ratio_rs1": self.ratio_rs1,
            "deficit_rs2": self.deficit_rs2,
            "seed": self.seed,
            "descriptor": self.descriptor,
        }


def _check_support(A: ComplexMatrix, F: VectorFamily, name: str) -> None:
    on_diag = F.coincidence_mask() & (A != 0.0)
    if np.any(on_diag):
        pairs = [tuple(int(i) for i in ij) for ij in np.argwhere(on_diag)[:5]]
        raise SupportError(
            f"{name} has entries where u_j = u_k", {"pairs": pairs}
        )


def duality_identity_check(
    x: npt.ArrayLike, y: npt.ArrayLike, F: VectorFamily, p: float
) -> float:
    """|<R_p x, Rbar_p' y> + tr(xy)| for x, y supported off {u_j = u_k}."""
    p = check_exponent(p, strict=True)
    xm = as_matrix(x, "x")
    ym = as_matrix(y, "y")
    _check_support(xm, F, "x")
    _check_support(ym, F, "y")
    bracket = duality_bracket(
        riesz_transform(RieszInstance(F, xm, p)),
        conjugate_riesz_transform(RieszInstance(F, ym, conjugate_exponent(p))),
    )
    trace = complex(np.einsum("jk,kj->", xm, ym))
    residual = abs(bracket + trace)
    logger.debug("duality bracket %s, tr(xy) %s, residual %.3e", bracket, trace, residual)
    return residual


def duality_tolerance(x: npt.ArrayLike, y: npt.ArrayLike) -> float:
    """1e-9 (1 + |tr(xy)|)."""
    trace = complex(np.einsum("jk,kj->", as_matrix(x), as_matrix(y)))
    return DUALITY_TOL * (1.0 + abs(trace))


def pythagoras_residual(inst: RieszInstance) -> float:
    """Relative gap in ||x||_2^2 = ||E x||_2^2 + ||R x||_{RC_2}^2."""
    total = schatten_norm(inst.x, 2.0) ** 2
    diag = schatten_norm(diagonal_expectation(inst.x, inst.effective_family), 2.0) ** 2
    rc = rc_norm_certified(riesz_transform(inst), 2.0).upper ** 2
    if total == 0.0:
        return abs(diag + rc)
    return abs(total - diag - rc) / total
