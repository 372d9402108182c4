"""Shared random constructors for property tests.

Everything is driven by an explicit numpy Generator so each test fixes its
own seed; nothing here touches global RNG state.
"""

import numpy as np

from abl_engine import Observable, SelectionContext, StateVector, projector_from_span


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(vec / np.linalg.norm(vec))


def random_observable(
    rng: np.random.Generator, dim: int, n_outcomes: int | None = None
) -> Observable:
    """Projective observable from a Haar-ish unitary with a random partition
    of the basis columns into outcome subspaces."""
    if n_outcomes is None:
        n_outcomes = int(rng.integers(2, dim + 1)) if dim > 1 else 1
    gauss = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    unitary, _ = np.linalg.qr(gauss)
    cuts = sorted(rng.choice(np.arange(1, dim), size=n_outcomes - 1, replace=False))
    bounds = [0, *cuts, dim]
    projectors = []
    for idx in range(n_outcomes):
        cols = [
            StateVector(unitary[:, j]) for j in range(bounds[idx], bounds[idx + 1])
        ]
        projectors.append(projector_from_span(cols, f"q{idx}"))
    return Observable(tuple(projectors))


def random_context(
    rng: np.random.Generator,
    dim: int,
    min_marginal: float = 1e-3,
    min_direct: float = 0.0,
) -> SelectionContext:
    """Random reachable context; redraws until the post-selection rate (and
    optionally the direct overlap) clears the requested floor."""
    from abl_engine import inner, marginal_with_Q

    for _ in range(200):
        pre = random_state(rng, dim)
        post = random_state(rng, dim)
        obs = random_observable(rng, dim)
        if abs(inner(pre, post)) ** 2 < min_direct:
            continue
        try:
            ctx = SelectionContext(pre, post, obs)
        except Exception:
            continue
        if marginal_with_Q(ctx) >= min_marginal:
            return ctx
    raise AssertionError("could not draw a usable random context")
