"""Ready-made pre/post-selected setups with their analytic expectations.

Each constructor returns a ScenarioBundle: a default SelectionContext, the
named alternative intervening observables, and the expected probabilities
computed here by independent closed-form arithmetic (plain Python complex
math, no shared code with the rules module) so they can serve as oracles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ZERO_PROB_TOL,
    Observable,
    Projector,
    StateVector,
    basis_state,
    inner,
    trivial_observable,
)
from .errors import InvalidDirection, ValidationError
from .rules import SelectionContext

DIRECTION_NORM_TOL = 1e-10


@dataclass(frozen=True)
class ExpectedValue:
    """A named analytic probability and a note saying where it comes from."""

    name: str
    value: float
    note: str


@dataclass(frozen=True)
class ScenarioBundle:
    name: str
    context: SelectionContext
    variants: tuple[tuple[str, Observable], ...]
    expected: tuple[ExpectedValue, ...]
    notes: tuple[str, ...] = ()

    @property
    def variant_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variants)

    def variant(self, name: str) -> Observable:
        for key, obs in self.variants:
            if key == name:
                return obs
        raise ValidationError(
            f"unknown variant {name!r}; choose from {', '.join(self.variant_names)}"
        )

    def context_for(self, variant_name: str) -> SelectionContext:
        return SelectionContext(
            self.context.pre, self.context.post, self.variant(variant_name)
        )

    def expected_value(self, name: str) -> float:
        for entry in self.expected:
            if entry.name == name:
                return entry.value
        raise KeyError(name)


# ---------------------------------------------------------------------------
# three boxes


def _three_box_pieces():
    a = StateVector(np.array([1.0, 1.0, 1.0], dtype=complex) / math.sqrt(3.0))
    b = StateVector(np.array([1.0, 1.0, -1.0], dtype=complex) / math.sqrt(3.0))
    box = {
        label: Projector(
            np.outer(basis_state(3, i).amplitudes, basis_state(3, i).amplitudes.conj()),
            label,
        )
        for i, label in enumerate(("A", "B", "C"))
    }
    full = Observable((box["A"], box["B"], box["C"]))
    # coarse outcomes are exact 0/1 matrices, so the paired amplitudes
    # 1/sqrt(3) and -1/sqrt(3) cancel exactly
    q_a = Observable(
        (box["A"], Projector(box["B"].matrix + box["C"].matrix, "B∪C"))
    )
    q_b = Observable(
        (box["B"], Projector(box["A"].matrix + box["C"].matrix, "A∪C"))
    )
    return a, b, full, q_a, q_b


def three_box() -> ScenarioBundle:
    """Spinless particle in one of three boxes, pre- and post-selected on the
    usual paradoxical pair: probing one box alone finds the particle there
    with certainty, probing all three finds it anywhere uniformly."""
    a, b, full, q_a, q_b = _three_box_pieces()
    third = 1.0 / 3.0
    ninth = 1.0 / 9.0
    expected = (
        ExpectedValue("fullQ:A", third, "uniform over boxes when all three are probed"),
        ExpectedValue("fullQ:B", third, "uniform over boxes when all three are probed"),
        ExpectedValue("fullQ:C", third, "uniform over boxes when all three are probed"),
        ExpectedValue("QA:A", 1.0, "certainty in box A when only box A is probed"),
        ExpectedValue("QB:B", 1.0, "certainty in box B when only box B is probed"),
        ExpectedValue("fullQ:marginal", third, "post-selection rate with all boxes probed"),
        ExpectedValue("QA:marginal", ninth, "post-selection rate with only box A probed"),
        ExpectedValue("direct", ninth, "post-selection rate with nothing interposed"),
    )
    return ScenarioBundle(
        name="three-box",
        context=SelectionContext(a, b, full),
        variants=(("fullQ", full), ("QA", q_a), ("QB", q_b)),
        expected=expected,
    )


def three_hole(beepers=("A", "B")) -> ScenarioBundle:
    """Wall with three holes and perfect beepers on a subset of {A, B}; a
    phase plate behind C realizes the three-box post-selection. The beeper
    configuration fixes which observable the passage measures."""
    chosen = frozenset(beepers)
    if not chosen <= {"A", "B"}:
        raise ValidationError("beepers must be a subset of {'A', 'B'}")
    a, b, full, q_a, q_b = _three_box_pieces()
    variants = (
        ("AB", full),
        ("A", q_a),
        ("B", q_b),
        ("none", trivial_observable(3, "any")),
    )
    key = {
        frozenset({"A", "B"}): "AB",
        frozenset({"A"}): "A",
        frozenset({"B"}): "B",
        frozenset(): "none",
    }[chosen]
    third = 1.0 / 3.0
    expected = (
        ExpectedValue("AB:A", third, "all holes equally likely with both beepers on"),
        ExpectedValue("AB:B", third, "all holes equally likely with both beepers on"),
        ExpectedValue("AB:C", third, "all holes equally likely with both beepers on"),
        ExpectedValue("A:A", 1.0, "beeper at A alone always beeps"),
        ExpectedValue("B:B", 1.0, "beeper at B alone always beeps"),
        ExpectedValue("none:any", 1.0, "no beepers: the trivial outcome is certain"),
    )
    active = dict(variants)[key]
    return ScenarioBundle(
        name="three-hole",
        context=SelectionContext(a, b, active),
        variants=variants,
        expected=expected,
        notes=(f"beepers: {key}",),
    )


# ---------------------------------------------------------------------------
# spin half


def _unit_direction(direction, what: str) -> tuple[float, float, float]:
    vec = np.asarray(direction, dtype=float)
    if vec.shape != (3,) or not np.all(np.isfinite(vec)):
        raise InvalidDirection(f"{what} must be a finite 3-vector")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > DIRECTION_NORM_TOL:
        raise InvalidDirection(f"{what} must be a unit vector, got norm {norm}")
    return float(vec[0]), float(vec[1]), float(vec[2])


def _spin_kets(direction) -> tuple[np.ndarray, np.ndarray]:
    """Half-angle eigenkets of the spin component along a unit direction,
    with zero phase at the +z pole; the minus eigenket is the plus eigenket
    of the antipodal direction up to that convention."""
    x, y, z = direction
    theta = math.acos(min(1.0, max(-1.0, z)))
    phi = math.atan2(y, x)
    up = np.array(
        [math.cos(theta / 2.0), cmath.exp(1j * phi) * math.sin(theta / 2.0)],
        dtype=complex,
    )
    down = np.array(
        [math.sin(theta / 2.0), -cmath.exp(1j * phi) * math.cos(theta / 2.0)],
        dtype=complex,
    )
    return up, down


DEFAULT_C_DIR = (1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0))


def spin_half(
    a_dir=(0.0, 0.0, 1.0), b_dir=(1.0, 0.0, 0.0), c_dir=DEFAULT_C_DIR
) -> ScenarioBundle:
    """Spin-1/2 particle pre-selected up along a_dir, post-selected up along
    b_dir, with the spin component along c_dir interposed."""
    a_dir = _unit_direction(a_dir, "a_dir")
    b_dir = _unit_direction(b_dir, "b_dir")
    c_dir = _unit_direction(c_dir, "c_dir")
    a_up, _ = _spin_kets(a_dir)
    b_up, _ = _spin_kets(b_dir)
    c_up, c_down = _spin_kets(c_dir)
    pre = StateVector(a_up)
    post = StateVector(b_up)
    sigma_c = Observable(
        (
            Projector(np.outer(c_up, c_up.conj()), "up_c"),
            Projector(np.outer(c_down, c_down.conj()), "down_c"),
        )
    )

    # independent closed form: plain complex arithmetic on the kets
    def through(k):
        first = sum(complex(x).conjugate() * complex(y) for x, y in zip(a_up, k))
        second = sum(complex(x).conjugate() * complex(y) for x, y in zip(k, b_up))
        return abs(first * second) ** 2

    n_up, n_down = through(c_up), through(c_down)
    total = n_up + n_down
    expected = (
        ExpectedValue("up_c", n_up / total, "closed-form two-time value, up along c"),
        ExpectedValue("down_c", n_down / total, "closed-form two-time value, down along c"),
        ExpectedValue("marginal", total, "post-selection rate with the c component measured"),
    )
    notes = []
    direct = abs(inner(pre, post)) ** 2
    if direct <= ZERO_PROB_TOL:
        notes.append("orthogonal_pre_post: post-selection needs the interposition")
    return ScenarioBundle(
        name="spin-half",
        context=SelectionContext(pre, post, sigma_c),
        variants=(("sigma_c", sigma_c),),
        expected=expected,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# stored decomposition counterexample


@dataclass(frozen=True)
class DecompositionCase:
    """Inputs for decomposition_check plus the closed-form residual they
    are expected to produce."""

    pre: StateVector
    q: Observable
    b_obs: Observable
    expected_max_residual: float


def decomposition_counterexample() -> DecompositionCase:
    """Spin-1/2 instance where splitting an early outcome probability over a
    later basis fails outright: pre-selected +z, spin along the 45 degree
    x-z direction measured first, the x component after. Neither observable
    shares the pre-selection or the later basis, and the dropped cross terms
    are large, so the reconstruction misses by more than a tenth."""
    up_q, down_q = _spin_kets(DEFAULT_C_DIR)
    plus_x, minus_x = _spin_kets((1.0, 0.0, 0.0))
    q = Observable(
        (
            Projector(np.outer(up_q, up_q.conj()), "up_q"),
            Projector(np.outer(down_q, down_q.conj()), "down_q"),
        )
    )
    b_obs = Observable(
        (
            Projector(np.outer(plus_x, plus_x.conj()), "plus_x"),
            Projector(np.outer(minus_x, minus_x.conj()), "minus_x"),
        )
    )
    # by hand: lhs(up_q) = cos^2(pi/8); the contributing joints are
    # cos^4(pi/8) and 1/8, the later-basis rates 3/4 and 1/4, both direct
    # probabilities 1/2
    c2 = math.cos(math.pi / 8.0) ** 2
    residual = abs(c2 - (c2 * c2 / 0.75 * 0.5 + 0.125 / 0.25 * 0.5))
    return DecompositionCase(basis_state(2, 0), q, b_obs, residual)


# ---------------------------------------------------------------------------
# product rule


def product_rule_scenario() -> ScenarioBundle:
    """Three-box states wired for the product-rule check: probing box A alone
    and box B alone each give certainty, yet the two certain projectors
    multiply to the zero operator."""
    a, b, _, q_a, q_b = _three_box_pieces()
    expected = (
        ExpectedValue("QA:A", 1.0, "certainty in box A when only box A is probed"),
        ExpectedValue("QB:B", 1.0, "certainty in box B when only box B is probed"),
    )
    return ScenarioBundle(
        name="product-rule",
        context=SelectionContext(a, b, q_a),
        variants=(("QA", q_a), ("QB", q_b)),
        expected=expected,
        notes=("designated outcomes: A and B; their projector product is zero",),
    )


SCENARIOS = {
    "three-box": three_box,
    "three-hole": three_hole,
    "spin-half": spin_half,
    "product-rule": product_rule_scenario,
}
