"""Single-qubit state machine: axis rotations, Born-rule measurement, Bloch coordinates.

States are immutable values and every gate renormalizes, so arbitrarily long
pedal-driven rotation streams cannot drift. Global phase is never
canonicalized; compare states through fidelity() or bloch_coordinates().
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Protocol


class RotationAxis(Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


class MeasurementBasis(Enum):
    Z = "Z"
    X = "X"


class QubitState(NamedTuple):
    alpha: complex
    beta: complex


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float


class MeasurementOutcome(NamedTuple):
    bit: int
    basis: MeasurementBasis
    pre_probability: float


class RandomSource(Protocol):
    """Anything with random() -> float in [0, 1), e.g. random.Random(seed)."""

    def random(self) -> float: ...


_SQRT_HALF = math.sqrt(0.5)

ZERO = QubitState(1.0 + 0j, 0j)
ONE = QubitState(0j, 1.0 + 0j)
PLUS = QubitState(complex(_SQRT_HALF), complex(_SQRT_HALF))
MINUS = QubitState(complex(_SQRT_HALF), complex(-_SQRT_HALF))


def new_qubit() -> QubitState:
    """The |0> state: alpha=1, beta=0."""
    return ZERO


def rotate(state: QubitState, axis: RotationAxis, angle: float) -> QubitState:
    """Apply exp(-i*angle/2 * sigma_axis) to the state and renormalize."""
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    half = 0.5 * angle
    c = math.cos(half)
    s = math.sin(half)
    a, b = state
    if axis is RotationAxis.X:
        mis = complex(0.0, -s)
        na = c * a + mis * b
        nb = mis * a + c * b
    elif axis is RotationAxis.Y:
        na = c * a - s * b
        nb = s * a + c * b
    else:
        na = complex(c, -s) * a
        nb = complex(c, s) * b
    norm = math.sqrt(
        na.real * na.real + na.imag * na.imag + nb.real * nb.real + nb.imag * nb.imag
    )
    return QubitState(na / norm, nb / norm)


def born_probabilities(
    state: QubitState, basis: MeasurementBasis
) -> tuple[float, float]:
    """Outcome probabilities (p0, p1); p0 + p1 is exactly 1."""
    a, b = state
    if basis is MeasurementBasis.Z:
        p0 = a.real * a.real + a.imag * a.imag
    else:
        s = a + b
        p0 = 0.5 * (s.real * s.real + s.imag * s.imag)
    p0 = min(1.0, max(0.0, p0))
    return p0, 1.0 - p0


def measure(
    state: QubitState, basis: MeasurementBasis, rng: RandomSource
) -> tuple[MeasurementOutcome, QubitState]:
    """Sample one outcome (consuming exactly one rng draw) and collapse.

    The X basis is sampled directly from the amplitudes, not by
    pre-rotating into Z; the collapsed state is the realized eigenstate.
    """
    p0, p1 = born_probabilities(state, basis)
    if rng.random() < p0:
        outcome = MeasurementOutcome(0, basis, p0)
        collapsed = ZERO if basis is MeasurementBasis.Z else PLUS
    else:
        outcome = MeasurementOutcome(1, basis, p1)
        collapsed = ONE if basis is MeasurementBasis.Z else MINUS
    return outcome, collapsed


def bloch_coordinates(state: QubitState) -> BlochVector:
    """Unit Bloch vector (2*Re(conj(a)*b), 2*Im(conj(a)*b), |a|^2 - |b|^2)."""
    a, b = state
    cross = a.conjugate() * b
    z = (a.real * a.real + a.imag * a.imag) - (b.real * b.real + b.imag * b.imag)
    return BlochVector(2.0 * cross.real, 2.0 * cross.imag, z)


def fidelity(s1: QubitState, s2: QubitState) -> float:
    """|<s1|s2>|^2 -- global-phase-insensitive overlap, 1.0 for equal states."""
    ip = s1.alpha.conjugate() * s2.alpha + s1.beta.conjugate() * s2.beta
    return ip.real * ip.real + ip.imag * ip.imag
