"""Time-ordered two-observer measurement scenarios and their correlators.

Alice measures a spin direction at the first or second time step, Bob at the
third or fourth; qubit channels act between consecutive steps.  The Bell
combination ``e13 + e14 + e23 - e24`` is evaluated either by explicit
enumeration of measurement outcomes or by closed forms in the channels'
Bloch representation.  A second family of scenarios conditions the channel
between the observers on Alice's choice of time; such processes need not
factor through a physical intermediate map, which is what the divisibility
check decides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    AffineChannel,
    CQChannelParams,
    bloch_vector,
    compose,
    is_cptp,
    is_unitary,
    normalize,
    rotation_channel,
)

__all__ = [
    "TemporalScenario",
    "CorrelationSet",
    "IndivisibleProcess",
    "EffectiveSettings",
    "RotatedFrame",
    "DivisibilityReport",
    "InvalidIndex",
    "NotUnitary",
    "correlation_oracle",
    "correlations_oracle",
    "correlations_closed_form",
    "correlations_ebt",
    "bell_value",
    "effective_settings",
    "bell_from_effective_settings",
    "optimal_bob_bound",
    "rotated_frame",
    "bell_rotated_frame",
    "correlations_indivisible",
    "bell_indivisible",
    "conditional_rotation_process",
    "is_divisible",
    "hadamard_three_step",
    "validate_scenario",
]


class InvalidIndex(Exception):
    """Measurement time indices must satisfy i in {1, 2} and j in {3, 4}."""


class NotUnitary(Exception):
    """A rotation argument failed the unitarity predicate."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TemporalScenario:
    """Initial Bloch vector, the three interleaved channels, and the four
    measurement directions.

    ``lambda_a`` acts between Alice's two possible measurement times,
    ``lambda_e`` between the observers, ``lambda_b`` between Bob's two
    times.  Construction does not check physicality; use
    :func:`validate_scenario` at trust boundaries.
    """

    v: np.ndarray
    lambda_a: AffineChannel
    lambda_e: AffineChannel
    lambda_b: AffineChannel
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("v", "a1", "a2", "b1", "b2"):
            arr = np.array(getattr(self, name), dtype=float).reshape(3)
            object.__setattr__(self, name, _readonly(arr))


@dataclass(frozen=True)
class CorrelationSet:
    """The four two-time correlators feeding the Bell combination."""

    e13: float
    e14: float
    e23: float
    e24: float


def bell_value(c: CorrelationSet) -> float:
    """Bell combination e13 + e14 + e23 - e24."""
    return c.e13 + c.e14 + c.e23 - c.e24


def validate_scenario(sc: TemporalScenario, unit_tol: float = 1e-9, cptp_tol: float = 1e-10):
    """Raise with the offending field name when the scenario is unphysical."""
    from .channels import InvalidBloch

    if float(np.linalg.norm(sc.v)) > 1.0 + unit_tol:
        raise InvalidBloch("v must lie inside the Bloch ball")
    for name in ("a1", "a2", "b1", "b2"):
        n = float(np.linalg.norm(getattr(sc, name)))
        if abs(n - 1.0) > unit_tol:
            raise InvalidBloch(f"{name} must be a unit vector, got norm {n!r}")
    for name in ("lambda_A", "lambda_E", "lambda_B"):
        ch = getattr(sc, name.lower())
        if not is_cptp(ch, cptp_tol):
            from .channels import NotAChannel

            raise NotAChannel(f"{name} fails CPTP")


def _pair_correlator(pre_bloch, channels, a, b) -> float:
    # Explicit enumeration: Alice's outcome k has probability (1 + k pre.a)/2
    # and collapses the state onto Bloch vector k*a, which then traverses the
    # listed channels before Bob reads out along b.
    total = 0.0
    for k in (1.0, -1.0):
        prob = 0.5 * (1.0 + k * float(pre_bloch @ a))
        post = k * a
        for ch in channels:
            post = ch.apply(post)
        total += k * prob * float(b @ post)
    return total


def correlation_oracle(sc: TemporalScenario, i: int, j: int) -> float:
    """Correlator between Alice's measurement at time i and Bob's at time j,
    by outcome enumeration.

    For i = 1 the post-measurement state still traverses ``lambda_a`` before
    reaching the inter-observer channel; for i = 2 the pre-measurement state
    is ``lambda_a`` applied to v.  Bob's time j = 4 appends ``lambda_b``.
    """
    if i not in (1, 2) or j not in (3, 4):
        raise InvalidIndex(f"indices must be in {{1,2}} x {{3,4}}, got ({i}, {j})")
    if i == 1:
        pre = sc.v
        path = [sc.lambda_a, sc.lambda_e]
        a = sc.a1
    else:
        pre = sc.lambda_a.apply(sc.v)
        path = [sc.lambda_e]
        a = sc.a2
    if j == 4:
        path = path + [sc.lambda_b]
    b = sc.b1 if j == 3 else sc.b2
    return _pair_correlator(pre, path, a, b)


def correlations_oracle(sc: TemporalScenario) -> CorrelationSet:
    return CorrelationSet(
        correlation_oracle(sc, 1, 3),
        correlation_oracle(sc, 1, 4),
        correlation_oracle(sc, 2, 3),
        correlation_oracle(sc, 2, 4),
    )


def _closed_correlators(v, a_shift, a_mat, e_shift, e_mat, b_shift, b_mat, a1, a2, b1, b2):
    # Closed forms for the four correlators in the channels' Bloch data.
    ga_al_a1 = e_mat @ (a_mat @ a1)
    ga_a2 = e_mat @ a2
    va1 = float(v @ a1)
    w_a2 = float((a_shift + a_mat @ v) @ a2)
    e_plus_ga = e_shift + e_mat @ a_shift
    e13 = float(ga_al_a1 @ b1) + va1 * float(e_plus_ga @ b1)
    e14 = float((b_mat @ ga_al_a1) @ b2) + va1 * float((b_shift + b_mat @ e_plus_ga) @ b2)
    e23 = float(ga_a2 @ b1) + w_a2 * float(e_shift @ b1)
    e24 = float((b_mat @ ga_a2) @ b2) + w_a2 * float((b_shift + b_mat @ e_shift) @ b2)
    return e13, e14, e23, e24


def correlations_closed_form(sc: TemporalScenario) -> CorrelationSet:
    """All four correlators without outcome enumeration.

    Agrees with :func:`correlation_oracle` for every scenario; the oracle
    remains available as an independent cross-check.
    """
    return CorrelationSet(
        *_closed_correlators(
            sc.v,
            sc.lambda_a.shift,
            sc.lambda_a.matrix,
            sc.lambda_e.shift,
            sc.lambda_e.matrix,
            sc.lambda_b.shift,
            sc.lambda_b.matrix,
            sc.a1,
            sc.a2,
            sc.b1,
            sc.b2,
        )
    )


def correlations_ebt(
    v,
    lambda_a: AffineChannel,
    cq: CQChannelParams,
    lambda_b: AffineChannel,
    a1,
    a2,
    b1,
    b2,
) -> CorrelationSet:
    """Correlators specialised to a measure-and-prepare middle channel.

    Written directly in the measure-and-prepare data (measurement axis c and
    prepared vectors r_plus/r_minus); equals :func:`correlations_closed_form`
    on the scenario whose middle channel is ``extremal_cq(cq)``.
    """
    v = bloch_vector(v)
    a1, a2, b1, b2 = (np.asarray(x, dtype=float) for x in (a1, a2, b1, b2))
    s, t, c = cq.s, cq.t, cq.c
    a_shift, a_mat = lambda_a.shift, lambda_a.matrix
    b_shift, b_mat = lambda_b.shift, lambda_b.matrix

    w = a_shift + a_mat @ v
    c_al_a1 = float(c @ (a_mat @ a1))
    va1 = float(v @ a1)
    c_dot_a = float(c @ a_shift)
    bs = b_mat @ s
    bt = b_mat @ t

    e13 = 0.5 * (c_al_a1 * float(b1 @ s) + va1 * float(b1 @ t)) + 0.5 * va1 * c_dot_a * float(b1 @ s)
    e14 = (
        0.5 * c_al_a1 * float(b2 @ bs)
        + va1 * float(b2 @ b_shift)
        + 0.5 * va1 * float(b2 @ (bt + c_dot_a * bs))
    )
    e23 = 0.5 * (float(c @ a2) * float(b1 @ s) + float(w @ a2) * float(b1 @ t))
    e24 = (
        0.5 * float(c @ a2) * float(b2 @ bs)
        + float(w @ a2) * float(b2 @ b_shift)
        + 0.5 * float(w @ a2) * float(b2 @ bt)
    )
    return CorrelationSet(e13, e14, e23, e24)


@dataclass(frozen=True, eq=False)
class EffectiveSettings:
    """Alice's settings with the input state and the first two channels
    absorbed; both vectors have at most unit length for physical scenarios.
    """

    s1: np.ndarray
    s2: np.ndarray


def effective_settings(sc: TemporalScenario) -> EffectiveSettings:
    a_shift, a_mat = sc.lambda_a.shift, sc.lambda_a.matrix
    e_shift, e_mat = sc.lambda_e.shift, sc.lambda_e.matrix
    va1 = float(sc.v @ sc.a1)
    s1 = va1 * e_shift + e_mat @ (va1 * a_shift + a_mat @ sc.a1)
    s2 = e_mat @ sc.a2 + float((a_shift + a_mat @ sc.v) @ sc.a2) * e_shift
    return EffectiveSettings(_readonly(s1), _readonly(s2))


def bell_from_effective_settings(sc: TemporalScenario) -> float:
    """Bell value regrouped around the effective settings.

    Identical to ``bell_value(correlations_closed_form(sc))``; once the last
    channel is unital the expression reduces to a standard Bell form in the
    two effective vectors.
    """
    es = effective_settings(sc)
    b_shift, b_mat = sc.lambda_b.shift, sc.lambda_b.matrix
    va1 = float(sc.v @ sc.a1)
    w_a2 = float((sc.lambda_a.shift + sc.lambda_a.matrix @ sc.v) @ sc.a2)
    return (
        float(sc.b1 @ (es.s1 + es.s2))
        + float(sc.b2 @ (b_mat @ (es.s1 - es.s2)))
        + (va1 - w_a2) * float(b_shift @ sc.b2)
    )


def optimal_bob_bound(es: EffectiveSettings) -> float:
    """Exact maximum of the Bell form over Bob's unit settings and any
    rotation acting between his two times: |s1 + s2| + |s1 - s2|.

    Never exceeds 2*sqrt(2) when both effective settings fit in the unit
    ball.
    """
    return float(np.linalg.norm(es.s1 + es.s2) + np.linalg.norm(es.s1 - es.s2))


@dataclass(frozen=True, eq=False)
class RotatedFrame:
    """Effective settings after absorbing unitary end channels.

    ``a1`` and ``v`` are expressed after Alice's rotation, ``b2`` is pulled
    back through Bob's rotation; ``b1`` is unchanged and kept for the Bell
    form ``s1.(b1 + b2) + s2.(b1 - b2)``.
    """

    s1: np.ndarray
    s2: np.ndarray
    a1: np.ndarray
    v: np.ndarray
    b1: np.ndarray
    b2: np.ndarray


def rotated_frame(
    v,
    alice_rotation: AffineChannel,
    bob_rotation: AffineChannel,
    middle: AffineChannel,
    a1,
    a2,
    b1,
    b2,
    tol: float = 1e-9,
) -> RotatedFrame:
    """Absorb unitary outer channels into rotated settings.

    Raises NotUnitary unless both rotation arguments pass the unitarity
    predicate.
    """
    for name, ch in (("alice_rotation", alice_rotation), ("bob_rotation", bob_rotation)):
        if not is_unitary(ch, tol):
            raise NotUnitary(f"{name} is not a unitary channel")
    v = bloch_vector(v)
    a1, a2, b1, b2 = (np.asarray(x, dtype=float) for x in (a1, a2, b1, b2))
    a1r = alice_rotation.matrix @ a1
    vr = alice_rotation.matrix @ v
    b2r = bob_rotation.matrix.T @ b2
    e_shift, e_mat = middle.shift, middle.matrix
    s1 = float(vr @ a1r) * e_shift + e_mat @ a1r
    s2 = float(vr @ a2) * e_shift + e_mat @ a2
    return RotatedFrame(
        _readonly(s1),
        _readonly(s2),
        _readonly(a1r),
        _readonly(vr),
        _readonly(np.array(b1, dtype=float)),
        _readonly(b2r),
    )


def bell_rotated_frame(frame: RotatedFrame) -> float:
    return float(frame.s1 @ (frame.b1 + frame.b2) + frame.s2 @ (frame.b1 - frame.b2))


@dataclass(frozen=True, eq=False)
class IndivisibleProcess:
    """Channels from Alice's measurement time to Bob's, selected by Alice's
    choice: ``lambda_ji`` carries the state from time i to time j.
    """

    lambda_31: AffineChannel
    lambda_41: AffineChannel
    lambda_32: AffineChannel
    lambda_42: AffineChannel


def correlations_indivisible(p: IndivisibleProcess, v, a1, a2, b1, b2) -> CorrelationSet:
    """Correlators when the measurement-to-measurement channel depends on
    Alice's time choice; the state up to Alice's measurement is ``v``.
    """
    v = bloch_vector(v)
    return CorrelationSet(
        _pair_correlator(v, [p.lambda_31], np.asarray(a1, float), np.asarray(b1, float)),
        _pair_correlator(v, [p.lambda_41], np.asarray(a1, float), np.asarray(b2, float)),
        _pair_correlator(v, [p.lambda_32], np.asarray(a2, float), np.asarray(b1, float)),
        _pair_correlator(v, [p.lambda_42], np.asarray(a2, float), np.asarray(b2, float)),
    )


def bell_indivisible(p: IndivisibleProcess, v, a1, a2, b1, b2) -> float:
    return bell_value(correlations_indivisible(p, v, a1, a2, b1, b2))


def conditional_rotation_process(axis, angle: float) -> IndivisibleProcess:
    """Process with identity channels everywhere except a rotation acting
    only when Alice measures late and Bob measures late.
    """
    ident = AffineChannel(np.zeros(3), np.eye(3))
    return IndivisibleProcess(ident, ident, ident, rotation_channel(axis, angle))


@dataclass(frozen=True, eq=False)
class DivisibilityReport:
    """Outcome of the factorisation test.

    ``factor`` is the least-squares candidate for the map between Bob's two
    times; the verdict is divisible only when both residuals are small and
    the factor is itself a channel.
    """

    divisible: bool
    residual: float
    factor_residual: float
    consistency_residual: float
    factor: AffineChannel
    factor_is_cptp: bool


def _affine_block(ch: AffineChannel) -> np.ndarray:
    return np.hstack([ch.shift[:, None], ch.matrix])


def _affine_matrix(ch: AffineChannel) -> np.ndarray:
    out = np.zeros((4, 4))
    out[0, 0] = 1.0
    out[1:, 0] = ch.shift
    out[1:, 1:] = ch.matrix
    return out


def is_divisible(p: IndivisibleProcess, tol: float = 1e-9) -> DivisibilityReport:
    """Decide whether the process factors through Bob's intermediate time.

    Solves ``lambda_42 = factor . lambda_32`` for the factor by least squares
    over the affine representation (pseudo-inverse semantics when lambda_32
    is singular), then requires (a) that solve to be exact within ``tol``,
    (b) ``lambda_41 = factor . lambda_31`` within ``tol``, and (c) the factor
    to pass the CPTP test.  Residuals are max-absolute-entry norms.
    """
    t32 = _affine_matrix(p.lambda_32)
    target = _affine_block(p.lambda_42)
    solution, *_ = np.linalg.lstsq(t32.T, target.T, rcond=None)
    block = solution.T
    factor = AffineChannel(block[:, 0], block[:, 1:])
    factor_residual = float(np.max(np.abs(block @ t32 - target)))
    consistency_residual = float(
        np.max(np.abs(_affine_block(compose(factor, p.lambda_31)) - _affine_block(p.lambda_41)))
    )
    factor_ok = is_cptp(factor)
    residual = max(factor_residual, consistency_residual)
    return DivisibilityReport(
        divisible=bool(factor_residual <= tol and consistency_residual <= tol and factor_ok),
        residual=residual,
        factor_residual=factor_residual,
        consistency_residual=consistency_residual,
        factor=factor,
        factor_is_cptp=factor_ok,
    )


def hadamard_three_step() -> tuple[float, float, float]:
    """Correlators of the three-step process with z measurements and a
    Hadamard rotation between steps, starting from the maximally mixed state.

    Returns (e12, e23, e13): both correlators involving the middle step
    vanish while the outer pair is perfectly correlated.
    """
    hadamard = rotation_channel(normalize([1.0, 0.0, 1.0]), np.pi)
    z = np.array([0.0, 0.0, 1.0])
    mixed = np.zeros(3)
    e12 = _pair_correlator(mixed, [hadamard], z, z)
    e23 = _pair_correlator(hadamard.apply(mixed), [hadamard], z, z)
    e13 = _pair_correlator(mixed, [hadamard, hadamard], z, z)
    return e12, e23, e13
