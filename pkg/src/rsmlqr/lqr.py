"""LQR synthesis and the compositionality decision machinery.

Gain convention: controllers are written ``u = F x``, so the optimal gain
is ``F = -R^{-1} B^T P`` and closed loops are ``A + B F``.

Given two weighted subsystems and a sharing pattern, there are two designs
on the composite: the *direct* one, synthesized on the reduced composite
system, and the *composed* one, obtained by pushing the subsystem gains
through the coupling matrix K.  Whether they coincide is decided three
ways:

  exact       P_s K = K P_c, where P_s = blockdiag(P1, P2).  Necessary and
              sufficient, so it is the verdict.
  necessary   P_s K K^T symmetric PSD.  Failure proves the designs differ;
              passing alone proves nothing.
  sufficient  the necessary condition plus controllability of
              (A_s K K^T, B_s R_s^{-1/2}) and observability of
              (A_s K K^T, D) with D^T D = K Q_c K^T.  Success proves the
              designs coincide; failure alone proves nothing.

The three verdicts must be mutually consistent (sufficient-pass implies
exact, exact implies necessary-pass); a violation raises
``InconsistencyError`` rather than producing a quietly contradictory
report.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import sim
from .errors import (
    DetectabilityWarning,
    InconsistencyError,
    NotHurwitzError,
    NotPDError,
    NotStabilizableError,
    NumericalFailureError,
    ShapeError,
)
from .matkit import (
    RankTest,
    definiteness,
    is_controllable,
    is_observable,
    psd_sqrt_factor,
    require_matrix,
    require_square,
    sym_eig,
)
from .riccati import (
    RiccatiSolution,
    rectangular_riccati_residual,
    solve_care,
)
from .rsm import (
    CompositeSystem,
    CompositionPattern,
    CostWeights,
    LinearSystem,
    _coupling_array,
    compose_cost,
    compose_gains,
    compose_open_loop,
)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class LQRDesign:
    """A synthesized controller: Riccati certificate, gain, diagnostics."""

    solution: RiccatiSolution
    F: np.ndarray
    notes: tuple[str, ...] = ()

    @property
    def P(self) -> np.ndarray:
        return self.solution.P


class DeviationCheck(NamedTuple):
    """Max-abs entrywise deviation between two matrices that should agree,
    with the relative form ``deviation / (1 + max entry magnitude)``."""

    deviation: float
    deviation_rel: float
    equivalent: bool


class NecessaryCheck(NamedTuple):
    symmetric: bool
    psd: bool
    min_eigenvalue: float

    @property
    def passes(self) -> bool:
        return self.symmetric and self.psd


class SufficientCheck(NamedTuple):
    hypothesis_ok: bool
    controllability: RankTest
    observability: RankTest

    @property
    def predicts_compositional(self) -> bool:
        return (
            self.hypothesis_ok
            and self.controllability.ok
            and self.observability.ok
        )


@dataclass(frozen=True)
class CompositionalityReport:
    """Everything the checks produced for one composition instance."""

    exact: DeviationCheck
    necessary: NecessaryCheck
    sufficient: SufficientCheck
    gains: DeviationCheck
    rect_residual_stacked: float
    rect_residual_composite: float
    gap: sim.GapResult | None
    notes: tuple[str, ...]

    @property
    def compositional(self) -> bool:
        return self.exact.equivalent


@dataclass(frozen=True)
class CompositionAnalysis:
    """Composite model, all three designs, and the report over them."""

    composite: CompositeSystem
    Q: np.ndarray
    R: np.ndarray
    design1: LQRDesign
    design2: LQRDesign
    direct: LQRDesign
    F_composed: np.ndarray
    P_stacked: np.ndarray
    report: CompositionalityReport


def _pbh_detectable(a: np.ndarray, c: np.ndarray) -> bool:
    """Every eigenvalue with nonnegative real part must be observable."""
    n = a.shape[0]
    eigs = np.linalg.eigvals(a)
    eye = np.eye(n)
    for lam in eigs:
        if lam.real < 0.0:
            continue
        pencil = np.vstack([lam * eye - a, c]).astype(complex)
        s = np.linalg.svd(pencil, compute_uv=False)
        cut = max(pencil.shape) * float(s[0]) * np.finfo(float).eps if s.size else 0.0
        if int(np.count_nonzero(s > cut)) < n:
            return False
    return True


def _design(a, b, q, r, label: str) -> LQRDesign:
    a_arr = require_square(a, "A")
    notes: tuple[str, ...] = ()
    c = psd_sqrt_factor(q)
    if c.shape[0] == 0:
        c = np.zeros((0, a_arr.shape[0]))
    if not _pbh_detectable(a_arr, c):
        msg = (
            f"{label}: (A, sqrt(Q)) is not detectable; the stabilizing "
            "solution, if it exists, may not be the optimum"
        )
        warnings.warn(msg, DetectabilityWarning, stacklevel=3)
        notes = (msg,)
    solution = solve_care(a, b, q, r)
    r_arr = require_square(r, "R")
    b_arr = require_matrix(b, "B")
    f = -np.linalg.solve(0.5 * (r_arr + r_arr.T), b_arr.T @ solution.P)
    return LQRDesign(solution=solution, F=f, notes=notes)


def lqr_subsystem(system: LinearSystem, weights: CostWeights) -> LQRDesign:
    """Optimal state feedback for one subsystem."""
    if weights.Q.shape[0] != system.n:
        raise ShapeError(
            f"{system.name}: state weight is {weights.Q.shape}, expected "
            f"{(system.n, system.n)}"
        )
    if weights.R.shape[0] != system.m:
        raise ShapeError(
            f"{system.name}: input weight is {weights.R.shape}, expected "
            f"{(system.m, system.m)}"
        )
    return _design(system.A, system.B, weights.Q, weights.R, system.name)


def lqr_composite(composite: CompositeSystem, q, r) -> LQRDesign:
    """Optimal state feedback synthesized directly on the composite."""
    q_arr = require_square(q, "composite state weight")
    r_arr = require_square(r, "composite input weight")
    if q_arr.shape[0] != composite.n:
        raise ShapeError(
            f"composite state weight is {q_arr.shape}, expected "
            f"{(composite.n, composite.n)}"
        )
    if r_arr.shape[0] != composite.m:
        raise ShapeError(
            f"composite input weight is {r_arr.shape}, expected "
            f"{(composite.m, composite.m)}"
        )
    return _design(composite.A, composite.B, q_arr, r_arr, "composite")


def _deviation(lhs: np.ndarray, rhs: np.ndarray, tol: float) -> DeviationCheck:
    diff = float(np.abs(lhs - rhs).max(initial=0.0))
    scale = 1.0 + max(
        float(np.abs(lhs).max(initial=0.0)), float(np.abs(rhs).max(initial=0.0))
    )
    return DeviationCheck(diff, diff / scale, diff <= tol * scale)


def check_exact_condition(p_stacked, coupling, p_composite, tol: float = DEFAULT_TOL) -> DeviationCheck:
    """The decisive test: does ``P_s K = K P_c`` hold?

    The deviation is the max-abs entry of ``P_s K - K P_c``; equivalence
    means it stays within ``tol * (1 + max entry magnitude)``.
    """
    p_s = require_square(p_stacked, "stacked Riccati solution")
    kmat = _coupling_array(coupling)
    p_c = require_square(p_composite, "composite Riccati solution")
    if p_s.shape[0] != kmat.shape[0] or p_c.shape[0] != kmat.shape[1]:
        raise ShapeError(
            f"incompatible shapes: P_s {p_s.shape}, K {kmat.shape}, "
            f"P_c {p_c.shape}"
        )
    return _deviation(p_s @ kmat, kmat @ p_c, tol)


def check_necessary_condition(p_stacked, coupling, tol: float = DEFAULT_TOL) -> NecessaryCheck:
    """Failure of ``P_s K K^T`` to be symmetric PSD rules equivalence out."""
    p_s = require_square(p_stacked, "stacked Riccati solution")
    kmat = _coupling_array(coupling)
    if p_s.shape[0] != kmat.shape[0]:
        raise ShapeError(
            f"stacked solution is {p_s.shape} but the coupling matrix has "
            f"{kmat.shape[0]} rows"
        )
    d = definiteness(p_s @ kmat @ kmat.T, tol)
    return NecessaryCheck(d.symmetric, d.psd, d.min_eigenvalue)


def check_sufficient_condition(
    a_stacked, b_stacked, coupling, q_composite, r_stacked, p_stacked,
    tol: float = DEFAULT_TOL,
) -> SufficientCheck:
    """Success here proves the two designs coincide.

    Hypotheses checked: ``P_s K K^T`` symmetric PSD, controllability of
    ``(A_s K K^T, B_s Sigma Lambda^{-1/2})`` where ``R_s = Sigma Lambda
    Sigma^T``, and observability of ``(A_s K K^T, D)`` with
    ``D^T D = K Q_c K^T``.  Failure is recorded but proves nothing on its
    own; the caller falls back to the exact test.
    """
    a_s = require_square(a_stacked, "stacked state matrix")
    b_s = require_matrix(b_stacked, "stacked input matrix")
    kmat = _coupling_array(coupling)
    q_c = require_square(q_composite, "composite state weight")
    r_s = require_square(r_stacked, "stacked input weight")
    p_s = require_square(p_stacked, "stacked Riccati solution")
    if a_s.shape[0] != kmat.shape[0] or p_s.shape[0] != kmat.shape[0]:
        raise ShapeError("stacked matrices must match the coupling row count")
    if q_c.shape[0] != kmat.shape[1]:
        raise ShapeError("composite weight must match the coupling column count")
    dr = definiteness(r_s)
    if not (dr.symmetric and dr.pd):
        raise NotPDError(
            f"stacked input weight must be symmetric PD; "
            f"min eigenvalue {dr.min_eigenvalue:.6e}"
        )
    hyp = definiteness(p_s @ kmat @ kmat.T, tol)
    akk = a_s @ kmat @ kmat.T
    lam, sigma = sym_eig(r_s)
    b_whitened = b_s @ (sigma / np.sqrt(lam)[None, :])
    ctrb = is_controllable(akk, b_whitened)
    d_factor = psd_sqrt_factor(kmat @ q_c @ kmat.T)
    if d_factor.shape[0] == 0:
        d_factor = np.zeros((0, akk.shape[0]))
    obsv = is_observable(akk, d_factor)
    return SufficientCheck(
        hypothesis_ok=bool(hyp.symmetric and hyp.psd),
        controllability=ctrb,
        observability=obsv,
    )


def compare_gains(f_direct, f_composed, tol: float = DEFAULT_TOL) -> DeviationCheck:
    """Entrywise comparison of the direct and composed feedback gains."""
    fd = require_matrix(f_direct, "direct gain")
    fc = require_matrix(f_composed, "composed gain")
    if fd.shape != fc.shape:
        raise ShapeError(f"gain shapes differ: {fd.shape} vs {fc.shape}")
    return _deviation(fd, fc, tol)


def evaluate_composition(
    sys1: LinearSystem,
    sys2: LinearSystem,
    pattern: CompositionPattern,
    weights1: CostWeights,
    weights2: CostWeights,
    tol: float = DEFAULT_TOL,
    x0=None,
) -> CompositionAnalysis:
    """Run the full pipeline: compose, synthesize all three designs, check.

    With ``x0`` given, the composed-vs-direct cost gap from that initial
    state is attached to the report.  Raises ``InconsistencyError`` when
    the check verdicts contradict each other, since that can only mean a
    broken invariant.
    """
    composite = compose_open_loop(sys1, sys2, pattern)
    q_c, r_c = compose_cost(weights1, weights2, composite.coupling)
    design1 = lqr_subsystem(sys1, weights1)
    design2 = lqr_subsystem(sys2, weights2)
    direct = lqr_composite(composite, q_c, r_c)
    p_stacked = scipy.linalg.block_diag(design1.P, design2.P)
    kmat = composite.coupling.K

    exact = check_exact_condition(p_stacked, kmat, direct.P, tol)
    necessary = check_necessary_condition(p_stacked, kmat, tol)
    r_stacked = scipy.linalg.block_diag(weights1.R, weights2.R)
    sufficient = check_sufficient_condition(
        composite.A_stacked, composite.B_stacked, kmat, q_c, r_stacked,
        p_stacked, tol,
    )
    f_composed = compose_gains(design1.F, design2.F, composite.coupling)
    gains = compare_gains(direct.F, f_composed, tol)

    rect_stacked = rectangular_riccati_residual(
        composite.A_stacked, composite.B_stacked, kmat, q_c, r_stacked,
        p_stacked @ kmat,
    )[1]
    rect_composite = rectangular_riccati_residual(
        composite.A_stacked, composite.B_stacked, kmat, q_c, r_stacked,
        kmat @ direct.P,
    )[1]

    gap = None
    if x0 is not None:
        gap = sim.optimality_gap(composite, q_c, r_c, f_composed, direct.F, x0)

    if sufficient.predicts_compositional and not exact.equivalent:
        raise InconsistencyError(
            "sufficient condition predicts equivalent designs but the exact "
            f"test measured deviation {exact.deviation:.6e} "
            f"(relative {exact.deviation_rel:.6e})"
        )
    if exact.equivalent and not necessary.passes:
        raise InconsistencyError(
            "exact test passed but the necessary condition failed "
            f"(symmetric={necessary.symmetric}, psd={necessary.psd}, "
            f"min eigenvalue {necessary.min_eigenvalue:.6e})"
        )

    report = CompositionalityReport(
        exact=exact,
        necessary=necessary,
        sufficient=sufficient,
        gains=gains,
        rect_residual_stacked=rect_stacked,
        rect_residual_composite=rect_composite,
        gap=gap,
        notes=design1.notes + design2.notes + direct.notes,
    )
    return CompositionAnalysis(
        composite=composite,
        Q=q_c,
        R=r_c,
        design1=design1,
        design2=design2,
        direct=direct,
        F_composed=f_composed,
        P_stacked=p_stacked,
        report=report,
    )


@dataclass(frozen=True)
class SearchConfig:
    """Random search over composition instances for non-compositional ones."""

    n_range: tuple[int, int] = (1, 3)
    m_range: tuple[int, int] = (1, 2)
    k_range: tuple[int, int] = (0, 2)
    trials: int = 100
    seed: int = 0
    deviation_threshold: float = 1e-2

    def __post_init__(self):
        for name in ("n_range", "m_range", "k_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} has lo > hi: ({lo}, {hi})")
        if self.n_range[0] < 1 or self.m_range[0] < 1 or self.k_range[0] < 0:
            raise ValueError("dimension ranges out of bounds")
        if self.trials < 0:
            raise ValueError(f"trials must be nonnegative, got {self.trials}")


@dataclass(frozen=True)
class FoundInstance:
    trial: int
    system1: LinearSystem
    system2: LinearSystem
    pattern: CompositionPattern
    weights1: CostWeights
    weights2: CostWeights
    deviation: float
    report: CompositionalityReport


@dataclass(frozen=True)
class SearchResult:
    found: tuple[FoundInstance, ...]
    trials: int
    skipped: int


def _sample_system(rng: np.random.Generator, name: str, n: int, m: int) -> LinearSystem:
    a = rng.uniform(-2.0, 2.0, size=(n, n))
    max_re = float(np.linalg.eigvals(a).real.max())
    if max_re > -0.5:
        a = a - (max_re + 0.5) * np.eye(n)
    while True:
        b = rng.uniform(-1.0, 1.0, size=(n, m))
        if float(np.abs(b).max(initial=0.0)) == 0.0 or (np.abs(b).max(axis=0) < 1e-12).any():
            continue
        return LinearSystem(name, a, b)


def _sample_weights(rng: np.random.Generator, n: int, m: int) -> CostWeights:
    g = rng.standard_normal((n, n))
    h = rng.standard_normal((m, m))
    return CostWeights(g.T @ g + 0.1 * np.eye(n), h.T @ h + 0.1 * np.eye(m))


def sample_instance(
    rng: np.random.Generator,
    n_range: tuple[int, int] = (1, 3),
    m_range: tuple[int, int] = (1, 2),
    k_range: tuple[int, int] = (0, 2),
):
    """Draw one random composition instance.

    Stability is forced by shifting sampled state matrices left of
    ``Re = -0.5``; weights are Gram matrices plus ``0.1 I`` so they are
    safely definite.  Input columns are resampled if one comes out zero.
    Returns ``(sys1, sys2, pattern, weights1, weights2)``.
    """
    n1 = int(rng.integers(n_range[0], n_range[1] + 1))
    n2 = int(rng.integers(n_range[0], n_range[1] + 1))
    m1 = int(rng.integers(m_range[0], m_range[1] + 1))
    m2 = int(rng.integers(m_range[0], m_range[1] + 1))
    sys1 = _sample_system(rng, "sub1", n1, m1)
    sys2 = _sample_system(rng, "sub2", n2, m2)
    w1 = _sample_weights(rng, n1, m1)
    w2 = _sample_weights(rng, n2, m2)
    hi = min(k_range[1], n1, n2)
    lo = min(k_range[0], hi)
    k = int(rng.integers(lo, hi + 1))
    first = rng.choice(n1, size=k, replace=False)
    second = rng.choice(n2, size=k, replace=False)
    pattern = CompositionPattern(
        n1, n2, tuple((int(j), int(kk)) for j, kk in zip(first, second))
    )
    return sys1, sys2, pattern, w1, w2


def counterexample_search(config: SearchConfig, tol: float = DEFAULT_TOL) -> SearchResult:
    """Deterministic seeded search for non-compositional instances.

    Instances whose deviation exceeds ``config.deviation_threshold`` are
    collected with their full reports.  Solver preconditions that fail on a
    sampled instance (which the sampler makes rare) skip that trial; an
    ``InconsistencyError`` is never swallowed.
    """
    rng = np.random.default_rng(config.seed)
    found: list[FoundInstance] = []
    skipped = 0
    for trial in range(config.trials):
        sys1, sys2, pattern, w1, w2 = sample_instance(
            rng, config.n_range, config.m_range, config.k_range
        )
        try:
            analysis = evaluate_composition(sys1, sys2, pattern, w1, w2, tol)
        except (NotStabilizableError, NumericalFailureError, NotHurwitzError):
            skipped += 1
            continue
        deviation = analysis.report.exact.deviation
        if deviation > config.deviation_threshold and math.isfinite(deviation):
            found.append(
                FoundInstance(
                    trial=trial,
                    system1=sys1,
                    system2=sys2,
                    pattern=pattern,
                    weights1=w1,
                    weights2=w2,
                    deviation=deviation,
                    report=analysis.report,
                )
            )
    return SearchResult(tuple(found), config.trials, skipped)
