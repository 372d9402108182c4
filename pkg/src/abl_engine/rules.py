"""Two-time probability rules for pre- and post-selected systems.

Covers the ABL rule and its Born reduction, Kastner's rival rule, the
decomposition identity with its validity conditions, the interposition
comparison, and the product-rule check. Degenerate (rank > 1) projectors
are first-class everywhere; the rank-1 forms are special cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import (
    NORM_TOL,
    ZERO_PROB_TOL,
    DensityOperator,
    Observable,
    Projector,
    StateVector,
    born_prob,
    inner,
)
from .errors import (
    DegeneratePostObservable,
    DimensionMismatch,
    ImpossiblePostSelection,
    NonCommutingObservables,
    OrthogonalPrePost,
    ValidationError,
)

COND_TOL = 1e-9  # decomposition validity conditions

WhichCondition = Literal["Q_equals_A", "Q_equals_B", "interference_term_zero", "none"]


def _amp_through(pre: StateVector, p: Projector, post: StateVector) -> complex:
    """<pre| P |post>."""
    return complex(np.vdot(pre.amplitudes, p.matrix @ post.amplitudes))


@dataclass(frozen=True, eq=False)
class SelectionContext:
    """Pre-selection |a>, post-selection |b>, and the observable interposed between them.

    Time parameters are ordering labels only; nothing evolves between the
    measurements. Construction fails if the pre/post pair is unreachable
    with the observable interposed.
    """

    pre: StateVector
    post: StateVector
    intervening: Observable

    def __post_init__(self) -> None:
        dims = {self.pre.dim, self.post.dim, self.intervening.dim}
        if len(dims) != 1:
            raise DimensionMismatch(f"context dims differ: {sorted(dims)}")
        reach = sum(
            abs(_amp_through(self.pre, p, self.post)) ** 2
            for p in self.intervening.outcomes
        )
        if reach <= ZERO_PROB_TOL:
            raise ImpossiblePostSelection(
                "pre/post pair is unreachable with this observable interposed"
            )

    @property
    def dim(self) -> int:
        return self.pre.dim


@dataclass(frozen=True)
class ProbabilityDistribution:
    """Labeled probabilities that sum to one."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        labels = [label for label, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise ValidationError("distribution labels must be unique")
        for label, value in self.entries:
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"probability for {label!r} is outside [0, 1]")
        total = sum(value for _, value in self.entries)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"probabilities sum to {total}, not 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    def __getitem__(self, label: str) -> float:
        for key, value in self.entries:
            if key == label:
                return value
        raise KeyError(label)

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)


@dataclass(frozen=True)
class WeightAssignment:
    """Labeled nonnegative weights; no sum constraint."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        labels = [label for label, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise ValidationError("weight labels must be unique")
        for label, value in self.entries:
            if value < 0.0:
                raise ValidationError(f"weight for {label!r} is negative")

    def __getitem__(self, label: str) -> float:
        for key, value in self.entries:
            if key == label:
                return value
        raise KeyError(label)

    def total(self) -> float:
        return sum(value for _, value in self.entries)

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)


@dataclass(frozen=True)
class OutcomeDecomposition:
    """One row of a decomposition report; residual = |lhs - rhs|."""

    label: str
    lhs: float
    rhs: float
    residual: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "residual", abs(self.lhs - self.rhs))


@dataclass(frozen=True)
class DecompositionReport:
    outcomes: tuple[OutcomeDecomposition, ...]
    which_condition: WhichCondition

    @property
    def conditions_hold(self) -> bool:
        return self.which_condition != "none"

    @property
    def max_residual(self) -> float:
        return max(entry.residual for entry in self.outcomes)


@dataclass(frozen=True)
class ProductRuleReport:
    """ABL certainties for two commuting observables versus their projector product."""

    x_label: str
    y_label: str
    x_probability: float
    y_probability: float
    product_norm: float
    product_is_zero: bool
    violation: bool


# ---------------------------------------------------------------------------
# operations


def sequential_prob(ctx: SelectionContext, outcome_label: str) -> float:
    """|<a| P |b>|^2: first the labeled outcome, then the post-selection."""
    p = ctx.intervening.projector(outcome_label)
    value = abs(_amp_through(ctx.pre, p, ctx.post)) ** 2
    return min(max(value, 0.0), 1.0)


def marginal_with_Q(ctx: SelectionContext) -> float:
    """Probability of the post-selection given the observable is measured, any result."""
    total = sum(sequential_prob(ctx, label) for label in ctx.intervening.labels)
    return min(max(total, 0.0), 1.0)


def abl(ctx: SelectionContext) -> ProbabilityDistribution:
    """Two-time conditional distribution over the interposed outcomes.

    p(q|a,b) = |<a|P_q|b>|^2 / sum_j |<a|P_j|b>|^2. Outcomes whose
    transition amplitude vanishes get probability exactly zero.
    """
    numerators = [
        (label, sequential_prob(ctx, label)) for label in ctx.intervening.labels
    ]
    # vanishing transition amplitudes mean nomologically impossible outcomes;
    # snap them so those entries come out exactly 0 (matching the sampler,
    # which never draws such branches)
    numerators = [
        (label, 0.0 if value <= ZERO_PROB_TOL else value)
        for label, value in numerators
    ]
    denominator = sum(value for _, value in numerators)
    if denominator <= ZERO_PROB_TOL:
        raise ImpossiblePostSelection(
            "post-selection cannot co-occur with this observable interposed"
        )
    return ProbabilityDistribution(
        tuple((label, value / denominator) for label, value in numerators)
    )


def abl_trivial_reduction(pre: StateVector, q_basis: Observable) -> ProbabilityDistribution:
    """ABL distribution with the trivial property in place of the post-selection.

    Computed through the two-time formula (numerators ||P_j |a>||^2, then
    normalized); agreement with the one-time Born values is a theorem, not
    an implementation shortcut.
    """
    if pre.dim != q_basis.dim:
        raise DimensionMismatch(f"dims differ: {pre.dim} vs {q_basis.dim}")
    numerators = []
    for p in q_basis.outcomes:
        projected = p.matrix @ pre.amplitudes
        numerators.append((p.label, float(np.vdot(projected, projected).real)))
    denominator = sum(value for _, value in numerators)
    return ProbabilityDistribution(
        tuple((label, value / denominator) for label, value in numerators)
    )


def kastner(ctx: SelectionContext) -> WeightAssignment:
    """Rival rule |<a|P_q|b>|^2 / |<a|b>|^2; not a normalized distribution.

    The denominator adds amplitudes (no measurement made) while each
    numerator assumes one; the weights are exposed so that inconsistency
    is checkable rather than adjudicated.
    """
    denominator = abs(inner(ctx.pre, ctx.post)) ** 2
    if denominator <= ZERO_PROB_TOL:
        raise OrthogonalPrePost("pre and post states are orthogonal; rule undefined")
    return WeightAssignment(
        tuple(
            (label, sequential_prob(ctx, label) / denominator)
            for label in ctx.intervening.labels
        )
    )


def decomposition_check(
    pre: StateVector, q: Observable, b_obs: Observable
) -> DecompositionReport:
    """Test the decomposition of prior outcome probabilities over final results.

    For each outcome q_j, compares lhs = p(q_j|a) with
    rhs = sum_i [p(q_j,b_i|a) / p(b_i|a,Q)] p(b_i|a), an identity only
    under specific conditions: the pre-state is an eigenket of the
    observable (Q_equals_A), every post ket is (Q_equals_B), or all
    interference cross-terms vanish (interference_term_zero).
    """
    if not pre.dim == q.dim == b_obs.dim:
        raise DimensionMismatch("pre state and both observables must share one dimension")
    if len(b_obs.outcomes) < 2 or any(p.rank != 1 for p in b_obs.outcomes):
        raise DegeneratePostObservable(
            "post observable needs at least two rank-1 outcomes"
        )

    a = pre.amplitudes
    projected = [p.matrix @ a for p in q.outcomes]  # u_j = P_j |a>
    b_mats = [p.matrix for p in b_obs.outcomes]

    # joint[j][i] = p(q_j, b_i | a) = <a| P_j B_i P_j |a>
    joint = [
        [float(np.vdot(u, b @ u).real) for b in b_mats]
        for u in projected
    ]
    with_q = [sum(joint[j][i] for j in range(len(projected))) for i in range(len(b_mats))]
    for i, value in enumerate(with_q):
        if value <= ZERO_PROB_TOL:
            raise DegeneratePostObservable(
                f"outcome {b_obs.labels[i]!r} is unreachable when the observable is measured"
            )
    direct = [float(np.vdot(a, b @ a).real) for b in b_mats]

    rows = []
    for j, p in enumerate(q.outcomes):
        lhs = born_prob(DensityOperator.from_state(pre), p)
        rhs = sum(
            joint[j][i] / with_q[i] * direct[i] for i in range(len(b_mats))
        )
        rows.append(OutcomeDecomposition(p.label, lhs, rhs))

    which = _decomposition_condition(a, q, projected, b_mats)
    return DecompositionReport(tuple(rows), which)


def _decomposition_condition(
    a: np.ndarray,
    q: Observable,
    projected: list[np.ndarray],
    b_mats: list[np.ndarray],
) -> WhichCondition:
    # structural cases first, so floating noise cannot misclassify them
    if any(np.linalg.norm(u - a) <= NORM_TOL for u in projected):
        return "Q_equals_A"
    if all(
        any(np.abs(p.matrix @ b - b).max() <= NORM_TOL for p in q.outcomes)
        for b in b_mats
    ):
        return "Q_equals_B"
    for b in b_mats:
        for j, u in enumerate(projected):
            for k, v in enumerate(projected):
                if j == k:
                    continue
                if abs(float(np.vdot(u, b @ v).real)) > COND_TOL:
                    return "none"
    return "interference_term_zero"


def interposition_inequality(
    pre: StateVector, q: Observable, post: StateVector
) -> tuple[float, float]:
    """(p_direct, p_with_Q): post-selection probability without and with the observable.

    p_direct = |<a|b>|^2; p_with_Q = sum_j |<a|P_j|b>|^2. Both are
    returned for comparison; p_with_Q is positive whenever p_direct is,
    but neither dominates the other in general.
    """
    if not pre.dim == q.dim == post.dim:
        raise DimensionMismatch("states and observable must share one dimension")
    p_direct = min(max(abs(inner(pre, post)) ** 2, 0.0), 1.0)
    total = sum(abs(_amp_through(pre, p, post)) ** 2 for p in q.outcomes)
    return p_direct, min(max(total, 0.0), 1.0)


def product_rule_check(
    pre: StateVector,
    post: StateVector,
    x: Observable,
    y: Observable,
    *,
    x_label: str | None = None,
    y_label: str | None = None,
) -> ProductRuleReport:
    """Check the product rule across two single-interposition contexts.

    Each observable's designated value (its first outcome unless a label is
    given) gets an ABL probability from its own context; the report flags a
    violation when both probabilities are one yet the product of the
    designated projectors is the zero operator.
    """
    for px in x.outcomes:
        for py in y.outcomes:
            commutator = px.matrix @ py.matrix - py.matrix @ px.matrix
            if np.abs(commutator).max() > NORM_TOL:
                raise NonCommutingObservables(
                    f"projectors {px.label!r} and {py.label!r} do not commute"
                )
    x_label = x.labels[0] if x_label is None else x_label
    y_label = y.labels[0] if y_label is None else y_label
    x_prob = abl(SelectionContext(pre, post, x))[x_label]
    y_prob = abl(SelectionContext(pre, post, y))[y_label]
    product = x.projector(x_label).matrix @ y.projector(y_label).matrix
    product_norm = float(np.abs(product).max())
    product_is_zero = product_norm <= NORM_TOL
    violation = (
        x_prob >= 1.0 - COND_TOL and y_prob >= 1.0 - COND_TOL and product_is_zero
    )
    return ProductRuleReport(
        x_label=x_label,
        y_label=y_label,
        x_probability=x_prob,
        y_probability=y_prob,
        product_norm=product_norm,
        product_is_zero=product_is_zero,
        violation=violation,
    )
