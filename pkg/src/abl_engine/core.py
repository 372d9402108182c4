"""Finite-dimensional Hilbert-space primitives.

States, density operators, projectors, and labeled projective observables,
plus the trace rule and the ideal-measurement (Lueders) update. Values are
immutable numpy-backed objects; constructors validate their invariants
eagerly so downstream formulas never see a bad value. The Hamiltonian is
identically zero between measurements, so no propagator exists here.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpan,
    DimensionMismatch,
    ImpossibleOutcome,
    ParseError,
    UnknownOutcomeLabel,
    ValidationError,
)

NORM_TOL = 1e-10      # invariant validation (norms, Hermiticity, idempotence)
ZERO_PROB_TOL = 1e-12  # conditioning denominators treated as zero
RANK_TOL = 1e-10      # linear independence of span vectors
MAX_DIM = 64          # supported size envelope (PSD checked by eigenvalues)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = arr.copy()
    out.flags.writeable = False
    return out


def _square_matrix(matrix, what: str) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{what} must be a square matrix")
    if not 1 <= arr.shape[0] <= MAX_DIM:
        raise ValidationError(f"{what} dimension must be in 1..{MAX_DIM}")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{what} entries must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.amplitudes, dtype=np.complex128)
        if arr.ndim != 1:
            raise ValidationError("amplitudes must be a one-dimensional sequence")
        if not 1 <= arr.size <= MAX_DIM:
            raise ValidationError(f"state dimension must be in 1..{MAX_DIM}")
        if not np.isfinite(arr).all():
            raise ValidationError("amplitudes must be finite")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm} differs from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(arr))

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        """Scale an arbitrary nonzero vector to unit norm."""
        arr = np.asarray(amplitudes, dtype=np.complex128)
        norm = float(np.linalg.norm(arr))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValidationError("cannot normalize a zero or non-finite vector")
        return cls(arr / norm)


def basis_state(dim: int, index: int) -> StateVector:
    """Computational basis ket |index> in the given dimension."""
    if not 0 <= index < dim:
        raise ValidationError("basis index out of range")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive-semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        arr = _square_matrix(self.matrix, "density operator")
        if np.abs(arr - arr.conj().T).max() > NORM_TOL:
            raise ValidationError("density operator must be Hermitian within tolerance")
        trace = complex(np.trace(arr))
        if abs(trace - 1.0) > NORM_TOL:
            raise ValidationError(f"density operator trace {trace} differs from 1 beyond {NORM_TOL}")
        if float(np.linalg.eigvalsh(arr).min()) < -NORM_TOL:
            raise ValidationError("density operator must be positive semidefinite")
        object.__setattr__(self, "matrix", _freeze(arr))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityOperator":
        amps = state.amplitudes
        return cls(np.outer(amps, amps.conj()))


@dataclass(frozen=True, eq=False)
class Projector:
    """Hermitian idempotent operator with an outcome label."""

    matrix: np.ndarray
    label: str

    def __post_init__(self) -> None:
        arr = _square_matrix(self.matrix, "projector")
        if np.abs(arr - arr.conj().T).max() > NORM_TOL:
            raise ValidationError("projector must be Hermitian within tolerance")
        if np.abs(arr @ arr - arr).max() > NORM_TOL:
            raise ValidationError("projector must be idempotent within tolerance")
        if not isinstance(self.label, str):
            raise ValidationError("projector label must be a string")
        object.__setattr__(self, "matrix", _freeze(arr))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))


@dataclass(frozen=True, eq=False)
class Observable:
    """Ordered, labeled, orthogonal, complete family of projectors."""

    outcomes: tuple[Projector, ...]

    def __post_init__(self) -> None:
        outcomes = tuple(self.outcomes)
        if not outcomes:
            raise ValidationError("observable needs at least one outcome")
        dim = outcomes[0].dim
        if any(p.dim != dim for p in outcomes):
            raise ValidationError("all outcome projectors must share one dimension")
        labels = [p.label for p in outcomes]
        if any(not lbl for lbl in labels):
            raise ValidationError("outcome labels must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValidationError("outcome labels must be unique")
        for j in range(len(outcomes)):
            for k in range(j + 1, len(outcomes)):
                if np.abs(outcomes[j].matrix @ outcomes[k].matrix).max() > NORM_TOL:
                    raise ValidationError(
                        f"projectors {labels[j]!r} and {labels[k]!r} are not orthogonal"
                    )
        total = sum(p.matrix for p in outcomes)
        if np.abs(total - np.eye(dim)).max() > NORM_TOL:
            raise ValidationError("outcome projectors must sum to the identity")
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def dim(self) -> int:
        return self.outcomes[0].dim

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.outcomes)

    def projector(self, label: str) -> Projector:
        for p in self.outcomes:
            if p.label == label:
                return p
        raise UnknownOutcomeLabel(f"no outcome labeled {label!r}")


def trivial_observable(dim: int, label: str = "any") -> Observable:
    """The single-outcome observable whose projector is the identity."""
    return Observable((Projector(np.eye(dim, dtype=np.complex128), label),))


# ---------------------------------------------------------------------------
# operations


def inner(x: StateVector, y: StateVector) -> complex:
    """<x|y>: conjugate-linear in x, linear in y."""
    if x.dim != y.dim:
        raise DimensionMismatch(f"state dims differ: {x.dim} vs {y.dim}")
    return complex(np.vdot(x.amplitudes, y.amplitudes))


def projector_from_span(vectors, label: str) -> Projector:
    """Projector onto the span of the given states (orthonormalized first)."""
    vectors = list(vectors)
    if not vectors:
        raise ValidationError("span needs at least one vector")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise DimensionMismatch("span vectors must share one dimension")
    stacked = np.column_stack([v.amplitudes for v in vectors])
    if len(vectors) > dim:
        raise DegenerateSpan("more span vectors than the dimension allows")
    singular = np.linalg.svd(stacked, compute_uv=False)
    if float(singular.min()) <= RANK_TOL:
        raise DegenerateSpan("span vectors are linearly dependent within tolerance")
    q, _ = np.linalg.qr(stacked)
    matrix = q @ q.conj().T
    matrix = (matrix + matrix.conj().T) / 2.0
    return Projector(matrix, label)


def _clamped_probability(value: float) -> float:
    if value < -NORM_TOL or value > 1.0 + NORM_TOL:
        raise RuntimeError(f"probability {value} outside [0, 1] beyond tolerance")
    return min(max(value, 0.0), 1.0)


def born_prob(w: DensityOperator, p: Projector) -> float:
    """Trace rule Tr[W P], clamped to [0, 1]."""
    if w.dim != p.dim:
        raise DimensionMismatch(f"operator dims differ: {w.dim} vs {p.dim}")
    return _clamped_probability(float(np.trace(w.matrix @ p.matrix).real))


def born_prob_pure(psi: StateVector, q: StateVector) -> float:
    """|<psi|q>|^2 for unit vectors."""
    amp = inner(psi, q)
    return _clamped_probability(abs(amp) ** 2)


def luders_update(w: DensityOperator, p: Projector) -> DensityOperator:
    """Ideal-measurement update P W P / Tr[P W P] after observing p."""
    probability = born_prob(w, p)
    if probability <= ZERO_PROB_TOL:
        raise ImpossibleOutcome(
            f"outcome {p.label!r} has probability {probability} <= {ZERO_PROB_TOL}"
        )
    projected = p.matrix @ w.matrix @ p.matrix
    trace = float(np.trace(projected).real)
    matrix = projected / trace
    matrix = (matrix + matrix.conj().T) / 2.0
    return DensityOperator(matrix)


# ---------------------------------------------------------------------------
# JSON encoding: complex scalar <-> [re, im]


def complex_to_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _complex_from_json(obj, what: str) -> complex:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(part, numbers.Real) for part in obj)
    ):
        raise ParseError(f"{what} must be a two-element [re, im] array")
    return complex(float(obj[0]), float(obj[1]))


def state_to_json(state: StateVector) -> dict:
    return {
        "dim": state.dim,
        "amplitudes": [complex_to_json(z) for z in state.amplitudes],
    }


def state_from_json(obj) -> StateVector:
    if not isinstance(obj, dict):
        raise ParseError("state must be a JSON object")
    try:
        dim = obj["dim"]
        raw = obj["amplitudes"]
    except KeyError as missing:
        raise ParseError(f"state is missing field {missing}") from None
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ParseError("state dim must be an integer")
    if not isinstance(raw, list) or len(raw) != dim:
        raise ParseError("state amplitudes must be a list of length dim")
    amps = [_complex_from_json(entry, "amplitude") for entry in raw]
    return StateVector(np.array(amps, dtype=np.complex128))


def observable_to_json(observable: Observable) -> dict:
    outcomes = []
    for p in observable.outcomes:
        span = _range_basis(p)
        if not span:
            raise ValidationError(f"cannot encode rank-0 projector {p.label!r}")
        outcomes.append({"label": p.label, "span": [state_to_json(v) for v in span]})
    return {"dim": observable.dim, "outcomes": outcomes}


def observable_from_json(obj) -> Observable:
    if not isinstance(obj, dict):
        raise ParseError("observable must be a JSON object")
    try:
        dim = obj["dim"]
        raw = obj["outcomes"]
    except KeyError as missing:
        raise ParseError(f"observable is missing field {missing}") from None
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ParseError("observable dim must be an integer")
    if not isinstance(raw, list) or not raw:
        raise ParseError("observable outcomes must be a nonempty list")
    projectors = []
    for entry in raw:
        if not isinstance(entry, dict) or "label" not in entry or "span" not in entry:
            raise ParseError("each outcome needs a label and a span")
        label = entry["label"]
        if not isinstance(label, str):
            raise ParseError("outcome label must be a string")
        span_raw = entry["span"]
        if not isinstance(span_raw, list) or not span_raw:
            raise ParseError(f"outcome {label!r} span must be a nonempty list")
        span = [state_from_json(s) for s in span_raw]
        if any(v.dim != dim for v in span):
            raise ParseError(f"outcome {label!r} span dimension differs from dim")
        projectors.append(projector_from_span(span, label))
    return Observable(tuple(projectors))


def _range_basis(p: Projector) -> list[StateVector]:
    """Orthonormal basis of the projector's range (eigenvectors at eigenvalue 1)."""
    eigenvalues, eigenvectors = np.linalg.eigh(p.matrix)
    return [
        StateVector(eigenvectors[:, i])
        for i in range(p.dim)
        if eigenvalues[i] > 0.5
    ]
