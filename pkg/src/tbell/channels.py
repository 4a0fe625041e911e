"""Qubit channels as affine maps of the Bloch ball.

A trace-preserving qubit map sends the Bloch vector r of a state to
``shift + matrix @ r``.  This module provides that representation, the
standard constructors (rotations, Werner mixing, measure-and-prepare maps,
extremal rank-two maps), conversions to and from Kraus and Choi forms, and
the predicates used to classify channels: complete positivity, unitality,
unitarity and entanglement breaking.

Conventions: the Choi matrix is the two-qubit state obtained by sending one
half of a normalised maximally entangled pair through the channel, so it has
unit trace and its partial trace over the output leg is maximally mixed.  A
qubit channel is entanglement breaking exactly when that state has a
positive partial transpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AffineChannel",
    "CQChannelParams",
    "KrausRank2Params",
    "ChannelError",
    "NonTracePreserving",
    "NotAChannel",
    "InvalidBloch",
    "DegenerateDraw",
    "bloch_vector",
    "unit_vector",
    "normalize",
    "child_rng",
    "identity_channel",
    "compose",
    "mix_channels",
    "rotation_channel",
    "werner_channel",
    "replace_channel",
    "canonical_channel",
    "extremal_cq",
    "extremal_cptp",
    "from_kraus",
    "kraus_normalized_channel",
    "to_choi",
    "from_choi",
    "kraus_from_choi",
    "is_cptp",
    "is_unital",
    "is_unitary",
    "is_entanglement_breaking",
    "positivity_sampled",
    "sample_unit_directions",
    "random_cptp",
    "random_unit",
]

UNIT_TOL = 1e-9
CPTP_TOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
_ID2 = np.eye(2, dtype=complex)


class ChannelError(Exception):
    """Base class for channel construction and validation errors."""


class NonTracePreserving(ChannelError):
    """Kraus operators do not sum to the identity."""


class NotAChannel(ChannelError):
    """An operation required a CPTP channel and did not get one."""


class InvalidBloch(ChannelError):
    """A vector violates its Bloch-space constraint."""


class DegenerateDraw(ChannelError):
    """Random channel sampling produced a singular normalisation."""


def bloch_vector(x) -> np.ndarray:
    """Coerce to a finite 3-vector of floats."""
    arr = np.array(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise InvalidBloch("vector components must be finite")
    return arr


def unit_vector(x, tol: float = UNIT_TOL) -> np.ndarray:
    """Coerce to a 3-vector and require unit length within ``tol``."""
    arr = bloch_vector(x)
    n = float(np.linalg.norm(arr))
    if abs(n - 1.0) > tol:
        raise InvalidBloch(f"expected a unit vector, got norm {n!r}")
    return arr


def normalize(x) -> np.ndarray:
    """Scale a nonzero 3-vector to unit length."""
    arr = bloch_vector(x)
    n = float(np.linalg.norm(arr))
    if n < 1e-12:
        raise InvalidBloch("cannot normalize a (near-)zero vector")
    return arr / n


def child_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic child generator for a master seed and stream indices.

    The child state is derived by hashing the master seed together with the
    stream indices (numpy SeedSequence spawn keys), so independent streams
    never overlap and every draw is reproducible from ``(seed, *stream)``.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=stream))


def _pauli_coords(m: np.ndarray) -> np.ndarray:
    # Bloch coordinates of a Hermitian 2x2 matrix: 0.5 * tr(sigma_i m).
    return 0.5 * np.array(
        [
            (m[0, 1] + m[1, 0]).real,
            (1j * (m[0, 1] - m[1, 0])).real,
            (m[0, 0] - m[1, 1]).real,
        ]
    )


@dataclass(frozen=True, eq=False)
class AffineChannel:
    """Trace-preserving qubit map in Bloch form: r -> shift + matrix @ r.

    The representation is hermiticity- and trace-preserving by construction
    (real entries); whether the map is completely positive is a separate
    question answered by :func:`is_cptp`.
    """

    shift: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        shift = np.array(self.shift, dtype=float).reshape(3)
        matrix = np.array(self.matrix, dtype=float).reshape(3, 3)
        if not (np.all(np.isfinite(shift)) and np.all(np.isfinite(matrix))):
            raise InvalidBloch("channel entries must be finite")
        shift.setflags(write=False)
        matrix.setflags(write=False)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "matrix", matrix)

    def apply(self, r) -> np.ndarray:
        """Image of the Bloch vector ``r`` under the channel."""
        return self.shift + self.matrix @ np.asarray(r, dtype=float)


def identity_channel() -> AffineChannel:
    return AffineChannel(np.zeros(3), np.eye(3))


def compose(outer: AffineChannel, inner: AffineChannel) -> AffineChannel:
    """Channel applying ``inner`` first, then ``outer``."""
    return AffineChannel(
        outer.shift + outer.matrix @ inner.shift,
        outer.matrix @ inner.matrix,
    )


def mix_channels(weight: float, first: AffineChannel, second: AffineChannel) -> AffineChannel:
    """Convex mixture ``weight * first + (1 - weight) * second``."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    w = float(weight)
    return AffineChannel(
        w * first.shift + (1.0 - w) * second.shift,
        w * first.matrix + (1.0 - w) * second.matrix,
    )


def rotation_channel(axis, angle: float) -> AffineChannel:
    """Unitary channel rotating Bloch vectors by ``angle`` about ``axis``."""
    n = unit_vector(axis)
    c, s = np.cos(angle), np.sin(angle)
    cross = np.array(
        [
            [0.0, -n[2], n[1]],
            [n[2], 0.0, -n[0]],
            [-n[1], n[0], 0.0],
        ]
    )
    r = c * np.eye(3) + s * cross + (1.0 - c) * np.outer(n, n)
    return AffineChannel(np.zeros(3), r)


def werner_channel(p: float) -> AffineChannel:
    """Mixture of the identity channel (weight p) with full depolarisation."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("mixing parameter must lie in [0, 1]")
    return AffineChannel(np.zeros(3), float(p) * np.eye(3))


def replace_channel(b) -> AffineChannel:
    """Channel discarding its input and preparing the state with Bloch vector b."""
    arr = bloch_vector(b)
    if float(np.linalg.norm(arr)) > 1.0 + UNIT_TOL:
        raise InvalidBloch("replacement state must lie inside the Bloch ball")
    return AffineChannel(arr, np.zeros((3, 3)))


def canonical_channel(theta: float, phi: float) -> AffineChannel:
    """Two-angle normal form of an extreme qubit channel.

    The Bloch matrix is diag(cos(theta), cos(phi), cos(theta)cos(phi)) with a
    z shift of sin(theta)sin(phi).  Intended ranges are theta in [0, 2*pi)
    and phi in [0, pi); the map is completely positive for any angles.
    """
    ct, cp = np.cos(theta), np.cos(phi)
    matrix = np.diag([ct, cp, ct * cp])
    shift = np.array([0.0, 0.0, np.sin(theta) * np.sin(phi)])
    return AffineChannel(shift, matrix)


@dataclass(frozen=True, eq=False)
class CQChannelParams:
    """Measure-and-prepare map: project along ``c``, then prepare ``r_plus``
    or ``r_minus`` depending on the outcome.

    Degenerate output pairs (r_plus == r_minus) are allowed and collapse the
    map to a replace channel.  The map is extremal among entanglement
    breaking channels exactly when both outputs are pure.
    """

    c: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray

    def __post_init__(self):
        c = unit_vector(self.c)
        r_plus = bloch_vector(self.r_plus)
        r_minus = bloch_vector(self.r_minus)
        for name, r in (("r_plus", r_plus), ("r_minus", r_minus)):
            if float(np.linalg.norm(r)) > 1.0 + UNIT_TOL:
                raise InvalidBloch(f"{name} must lie inside the Bloch ball")
        for arr in (c, r_plus, r_minus):
            arr.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "r_plus", r_plus)
        object.__setattr__(self, "r_minus", r_minus)

    @property
    def s(self) -> np.ndarray:
        """Difference of the two prepared Bloch vectors."""
        return self.r_plus - self.r_minus

    @property
    def t(self) -> np.ndarray:
        """Sum of the two prepared Bloch vectors."""
        return self.r_plus + self.r_minus

    def is_extremal(self, tol: float = UNIT_TOL) -> bool:
        return bool(
            abs(np.linalg.norm(self.r_plus) - 1.0) <= tol
            and abs(np.linalg.norm(self.r_minus) - 1.0) <= tol
        )


def extremal_cq(params: CQChannelParams) -> AffineChannel:
    """Affine form of a measure-and-prepare map.

    Output equals ``r_plus (1 + c.r)/2 + r_minus (1 - c.r)/2`` for every
    input r, i.e. shift t/2 and a rank-one Bloch matrix s c^T / 2.
    """
    return AffineChannel(0.5 * params.t, 0.5 * np.outer(params.s, params.c))


@dataclass(frozen=True, eq=False)
class KrausRank2Params:
    """Parameters of an extremal qubit channel with two Kraus operators.

    The singular factors are S1 = diag(s, t) and
    S2 = [[0, sqrt(1 - t^2)], [sqrt(1 - s^2), 0]]; each is conjugated by
    special unitaries built from three Euler angles.  Global phases are
    dropped since they do not affect the channel.
    """

    s: float
    t: float
    euler_u: tuple[float, float, float]
    euler_v: tuple[float, float, float]

    def __post_init__(self):
        if not (0.0 <= self.s <= 1.0 and 0.0 <= self.t <= 1.0):
            raise ValueError("singular values s, t must lie in [0, 1]")


def _su2_euler(angles) -> np.ndarray:
    a, b, c = (float(x) for x in angles)
    rz_a = np.array([[np.exp(-0.5j * a), 0.0], [0.0, np.exp(0.5j * a)]])
    ry = np.array(
        [[np.cos(0.5 * b), -np.sin(0.5 * b)], [np.sin(0.5 * b), np.cos(0.5 * b)]],
        dtype=complex,
    )
    rz_c = np.array([[np.exp(-0.5j * c), 0.0], [0.0, np.exp(0.5j * c)]])
    return rz_a @ ry @ rz_c


def extremal_cptp(params: KrausRank2Params) -> AffineChannel:
    """Extremal channel U S_i V^dagger from rank-two singular data."""
    s, t = float(params.s), float(params.t)
    s1 = np.array([[s, 0.0], [0.0, t]], dtype=complex)
    s2 = np.array(
        [[0.0, np.sqrt(1.0 - t * t)], [np.sqrt(1.0 - s * s), 0.0]], dtype=complex
    )
    u = _su2_euler(params.euler_u)
    v_dag = _su2_euler(params.euler_v).conj().T
    return from_kraus([u @ s1 @ v_dag, u @ s2 @ v_dag])


def _kraus_stack(operators) -> np.ndarray:
    ops = np.array([np.asarray(op, dtype=complex).reshape(2, 2) for op in operators])
    if ops.shape[0] == 0:
        raise NonTracePreserving("need at least one Kraus operator")
    return ops


def _affine_from_kraus(ops: np.ndarray) -> AffineChannel:
    # rho -> sum_a A_a rho A_a^dagger, expressed on Bloch vectors.
    m0 = np.einsum("aij,alj->il", ops, ops.conj())
    imgs = np.einsum("aij,bjk,alk->bil", ops, _PAULIS, ops.conj())
    matrix = np.column_stack([_pauli_coords(imgs[b]) for b in range(3)])
    return AffineChannel(_pauli_coords(m0), matrix)


def from_kraus(operators, tol: float = UNIT_TOL) -> AffineChannel:
    """Affine form of ``rho -> sum_a A_a rho A_a^dagger``.

    Raises NonTracePreserving unless ``sum_a A_a^dagger A_a`` is the identity
    within ``tol``.
    """
    ops = _kraus_stack(operators)
    total = np.einsum("aji,ajl->il", ops.conj(), ops)
    if float(np.max(np.abs(total - _ID2))) > tol:
        raise NonTracePreserving("Kraus operators must satisfy sum A^dag A = 1")
    return _affine_from_kraus(ops)


def kraus_normalized_channel(values) -> AffineChannel:
    """Channel from 32 unconstrained reals.

    The reals fill four complex 2x2 blocks which are right-normalised by
    M^(-1/2) with M = sum A^dagger A, so the result is always exactly trace
    preserving and completely positive.  Raises DegenerateDraw when M is
    numerically singular.
    """
    x = np.asarray(values, dtype=float).reshape(32)
    ops = x[:16].reshape(4, 2, 2) + 1j * x[16:].reshape(4, 2, 2)
    m = np.einsum("aji,ajl->il", ops.conj(), ops)
    vals, vecs = np.linalg.eigh(m)
    if vals[0] <= 1e-12 * max(1.0, vals[-1]):
        raise DegenerateDraw("Kraus normalisation matrix is singular")
    m_inv_sqrt = (vecs * (vals**-0.5)) @ vecs.conj().T
    return _affine_from_kraus(ops @ m_inv_sqrt)


def to_choi(ch: AffineChannel) -> np.ndarray:
    """Choi state of the channel (output leg first, unit trace)."""
    lam_id = _ID2 + sum(ch.shift[k] * _PAULIS[k] for k in range(3))
    choi = np.kron(lam_id, _ID2)
    for k in range(3):
        img = sum(ch.matrix[i, k] * _PAULIS[i] for i in range(3))
        choi = choi + np.kron(img, _PAULIS[k].T)
    return choi / 4.0


def from_choi(choi) -> AffineChannel:
    """Inverse of :func:`to_choi` (real part; assumes a valid Choi state)."""
    c = np.asarray(choi, dtype=complex).reshape(4, 4)
    shift = np.empty(3)
    matrix = np.empty((3, 3))
    for i in range(3):
        shift[i] = np.trace(c @ np.kron(_PAULIS[i], _ID2)).real
        for k in range(3):
            matrix[i, k] = np.trace(c @ np.kron(_PAULIS[i], _PAULIS[k].T)).real
    return AffineChannel(shift, matrix)


def kraus_from_choi(choi, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from the eigendecomposition of a Choi state."""
    c = np.asarray(choi, dtype=complex).reshape(4, 4)
    c = 0.5 * (c + c.conj().T)
    vals, vecs = np.linalg.eigh(c)
    ops = []
    for k in range(3, -1, -1):
        if vals[k] > tol:
            ops.append(np.sqrt(2.0 * vals[k]) * vecs[:, k].reshape(2, 2))
    if not ops:
        raise NotAChannel("Choi matrix has no positive eigenvalues")
    return ops


def _partial_transpose(choi: np.ndarray) -> np.ndarray:
    x = choi.reshape(2, 2, 2, 2)
    return x.transpose(0, 3, 2, 1).reshape(4, 4)


def is_cptp(ch: AffineChannel, tol: float = CPTP_TOL) -> bool:
    """True when the smallest Choi eigenvalue is >= -tol."""
    return bool(np.linalg.eigvalsh(to_choi(ch))[0] >= -tol)


def is_unital(ch: AffineChannel, tol: float = UNIT_TOL) -> bool:
    """True when the channel fixes the maximally mixed state (zero shift)."""
    return bool(np.linalg.norm(ch.shift) <= tol)


def is_unitary(ch: AffineChannel, tol: float = UNIT_TOL) -> bool:
    """True for unital channels whose matrix is a proper rotation."""
    if not is_unital(ch, tol):
        return False
    m = ch.matrix
    if float(np.max(np.abs(m.T @ m - np.eye(3)))) > tol:
        return False
    return bool(abs(np.linalg.det(m) - 1.0) <= tol)


def is_entanglement_breaking(ch: AffineChannel, tol: float = CPTP_TOL) -> bool:
    """PPT test on the Choi state; exact for qubit channels.

    Raises NotAChannel when ``ch`` is not completely positive to begin with.
    """
    choi = to_choi(ch)
    if not np.linalg.eigvalsh(choi)[0] >= -tol:
        raise NotAChannel("entanglement-breaking test requires a CPTP channel")
    return bool(np.linalg.eigvalsh(_partial_transpose(choi))[0] >= -tol)


def sample_unit_directions(n: int, seed: int) -> np.ndarray:
    """(n, 3) array of pseudo-uniform unit vectors, deterministic in seed."""
    if n < 1:
        raise ValueError("need at least one direction")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n, 3))
    norms = np.linalg.norm(dirs, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        dirs[bad] = rng.standard_normal((int(bad.sum()), 3))
        norms = np.linalg.norm(dirs, axis=1)
    return dirs / norms[:, None]


def positivity_sampled(ch: AffineChannel, n: int = 256, seed: int = 0) -> bool:
    """Image-in-ball test on ``n`` sampled pure states.

    Strictly weaker than :func:`is_cptp`: it certifies positivity only, so
    maps such as the Bloch reflection diag(1, 1, -1) pass here while failing
    the Choi test.
    """
    dirs = sample_unit_directions(n, seed)
    image = dirs @ ch.matrix.T + ch.shift
    return bool(np.all(np.linalg.norm(image, axis=1) <= 1.0 + 1e-12))


def random_cptp(seed: int) -> AffineChannel:
    """Random channel from four Gaussian Kraus blocks, right-normalised.

    Deterministic in ``seed``; always passes :func:`is_cptp`.  Retries a
    bounded number of times on singular normalisation before raising
    DegenerateDraw.
    """
    rng = np.random.default_rng(seed)
    for _ in range(8):
        try:
            return kraus_normalized_channel(rng.standard_normal(32))
        except DegenerateDraw:
            continue
    raise DegenerateDraw(f"no non-singular draw for seed {seed}")


def random_unit(seed: int) -> np.ndarray:
    """Uniformly random unit vector, deterministic in ``seed``."""
    return sample_unit_directions(1, seed)[0]
