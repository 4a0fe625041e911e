"""Multi-start derivative-free search for extremal Bell values.

Each channel class fixes a flat parameter layout built from typed blocks
(measurement directions as two spherical angles, rotations as three Euler
angles, general channels as normalised Kraus data or extremal rank-two data,
measure-and-prepare maps as three sphere points).  In the default
``exact_cptp`` mode every point of the search space decodes to physical
channels by construction; in ``sampled_positivity`` mode general channels
are raw affine data kept near-physical by a quadratic penalty on the images
of sampled pure states, and the returned optimum is re-audited with the
exact Choi test.

Every search is deterministic: restart k draws its starting point from a
child generator derived from (seed, k + 1), and sampled penalty directions
from (seed, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import (
    AffineChannel,
    CQChannelParams,
    DegenerateDraw,
    KrausRank2Params,
    canonical_channel,
    extremal_cptp,
    extremal_cq,
    identity_channel,
    is_cptp,
    is_entanglement_breaking,
    kraus_normalized_channel,
    replace_channel,
    sample_unit_directions,
    werner_channel,
)
from .scenario import (
    IndivisibleProcess,
    TemporalScenario,
    _closed_correlators,
    bell_indivisible,
    bell_value,
    correlations_closed_form,
)
from enum import Enum

__all__ = [
    "TSIRELSON_BOUND",
    "CLASSICAL_BOUND",
    "ALGEBRAIC_MAX",
    "ChannelClass",
    "InvalidSpec",
    "OptimizationSpec",
    "OptimizationResult",
    "RestartRecord",
    "optimize_bell",
    "build_point",
    "class_target",
    "campaign_report",
    "TableCell",
    "Table1Report",
    "verify_table1",
    "WernerPoint",
    "scan_werner",
    "CanonicalPoint",
    "scan_canonical_e",
    "EbtBiasPoint",
    "verify_ebt_bias",
    "verify_cq_alice_tsirelson",
]

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
CLASSICAL_BOUND = 2.0
ALGEBRAIC_MAX = 4.0

_PENALTY_WEIGHT = 1.0e4
_Z = np.array([0.0, 0.0, 1.0])


class InvalidSpec(Exception):
    """The optimization request is malformed or unsupported."""


class ChannelClass(Enum):
    """Search space for the middle dynamics and its companions.

    GENERAL_CPTP      all three channels free CPTP maps
    UNITAL_B          free CPTP except the last channel is unital
    UNITAL_A_EBT      unital first channel, measure-and-prepare middle
    EBT_FREE          free first and last channels, measure-and-prepare middle
    ALL_UNITARY       all three channels rotations
    CANONICAL_E       fixed two-angle middle channel, rotations around it
    INDIVISIBLE       conditioned process: one free rotation on the late-late branch
    CLASSICAL_DIAGONAL  stochastic maps in the z basis, z measurements only
    """

    GENERAL_CPTP = "general-cptp"
    UNITAL_B = "unital-b"
    UNITAL_A_EBT = "ebt-unital-a"
    EBT_FREE = "ebt"
    ALL_UNITARY = "all-unitary"
    CANONICAL_E = "canonical-e"
    INDIVISIBLE = "indivisible"
    CLASSICAL_DIAGONAL = "classical"


@dataclass(frozen=True)
class OptimizationSpec:
    """What to search and how.

    ``bias`` is the fixed magnitude of the initial Bloch vector, or None to
    optimize over it.  ``constraint_mode`` is ``exact_cptp`` (intrinsically
    feasible parametrizations) or ``sampled_positivity`` (raw affine channels
    plus a penalty on ``positivity_directions`` sampled pure states).
    ``canonical_theta``/``canonical_phi`` configure the CANONICAL_E middle
    channel and are ignored by other classes.

    Free channel slots default to the extremal rank-two parametrization:
    the objective is affine in each channel, so extreme points suffice for
    the maximum, and in practice the simplex search stalls far from the
    ceiling in the much larger ``ginibre`` space (kept available for
    comparison).
    """

    channel_class: ChannelClass
    bias: float | None = 0.0
    restarts: int = 64
    max_iters: int = 2000
    seed: int = 0
    convergence_tol: float = 1e-8
    constraint_mode: str = "exact_cptp"
    positivity_directions: int = 256
    cptp_parametrization: str = "extremal"
    canonical_theta: float = 0.0
    canonical_phi: float = 0.0


@dataclass(frozen=True)
class RestartRecord:
    seed: int
    value: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """Best value over all restarts, its flat parameter vector, and the
    per-restart trace.  ``audit_cptp`` reports whether every channel decoded
    from the best parameters passes the exact Choi test; in sampled mode this
    can be False and is the honest summary of the weaker constraint.
    """

    spec: OptimizationSpec
    best_value: float
    best_params: np.ndarray
    best_restart: int
    per_restart: tuple[RestartRecord, ...]
    audit_cptp: bool


@dataclass(frozen=True)
class _Block:
    name: str
    kind: str
    size: int
    payload: object = None


def _derived_seed(seed: int, index: int) -> int:
    return int(
        np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, dtype=np.uint64)[0]
    )


def _polar_angle(rng) -> float:
    # Cosine-uniform polar angle, kept away from the poles.
    return float(np.clip(np.arccos(rng.uniform(-1.0, 1.0)), 0.01, np.pi - 0.01))


def _unit_from_angles(x) -> np.ndarray:
    st, ct = np.sin(x[0]), np.cos(x[0])
    return np.array([st * np.cos(x[1]), st * np.sin(x[1]), ct])


def _rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _so3_euler(x) -> np.ndarray:
    return _rot_z(x[0]) @ _rot_y(x[1]) @ _rot_z(x[2])


def _unital_channel(x) -> AffineChannel:
    # Rotation . Pauli mixture . rotation covers every unital qubit channel.
    w = x[6:10] ** 2
    total = float(w.sum())
    if total < 1e-15:
        p = np.array([1.0, 0.0, 0.0, 0.0])
    else:
        p = w / total
    diag = np.array(
        [
            p[0] + p[1] - p[2] - p[3],
            p[0] - p[1] + p[2] - p[3],
            p[0] - p[1] - p[2] + p[3],
        ]
    )
    return AffineChannel(np.zeros(3), _so3_euler(x[:3]) @ (diag[:, None] * _so3_euler(x[3:6])))


def _init_block(block: _Block, rng) -> np.ndarray:
    kind = block.kind
    if kind == "fixed":
        return np.empty(0)
    if kind in ("unit2", "bias_dir"):
        return np.array([_polar_angle(rng), rng.uniform(0.0, 2.0 * np.pi)])
    if kind == "rot3":
        return np.array(
            [rng.uniform(0.0, 2.0 * np.pi), _polar_angle(rng), rng.uniform(0.0, 2.0 * np.pi)]
        )
    if kind == "kraus32":
        return rng.standard_normal(32)
    if kind == "extremal8":
        return np.concatenate(
            [
                rng.uniform(0.0, np.pi, 2),
                [rng.uniform(0.0, 2.0 * np.pi), _polar_angle(rng), rng.uniform(0.0, 2.0 * np.pi)],
                [rng.uniform(0.0, 2.0 * np.pi), _polar_angle(rng), rng.uniform(0.0, 2.0 * np.pi)],
            ]
        )
    if kind == "cq6":
        return np.concatenate([_init_block(_Block("", "unit2", 2), rng) for _ in range(3)])
    if kind == "unital10":
        return np.concatenate(
            [
                _init_block(_Block("", "rot3", 3), rng),
                _init_block(_Block("", "rot3", 3), rng),
                rng.standard_normal(4),
            ]
        )
    if kind == "affine12":
        return np.concatenate([0.2 * rng.standard_normal(3), 0.5 * rng.standard_normal(9)])
    if kind == "affine9":
        return 0.5 * rng.standard_normal(9)
    if kind == "zcq2":
        return rng.uniform(-0.5 * np.pi, 0.5 * np.pi, 2)
    if kind == "bias_free":
        return np.array(
            [rng.uniform(0.0, 0.5 * np.pi), _polar_angle(rng), rng.uniform(0.0, 2.0 * np.pi)]
        )
    if kind == "bias_free_z":
        return np.array([rng.uniform(-0.5 * np.pi, 0.5 * np.pi)])
    raise InvalidSpec(f"unknown parameter block kind {kind!r}")


def _build_block(block: _Block, x):
    kind = block.kind
    if kind == "fixed":
        return block.payload
    if kind == "unit2":
        return _unit_from_angles(x)
    if kind == "rot3":
        return AffineChannel(np.zeros(3), _so3_euler(x))
    if kind == "kraus32":
        return kraus_normalized_channel(x)
    if kind == "extremal8":
        return extremal_cptp(
            KrausRank2Params(
                float(np.sin(x[0]) ** 2),
                float(np.sin(x[1]) ** 2),
                (x[2], x[3], x[4]),
                (x[5], x[6], x[7]),
            )
        )
    if kind == "cq6":
        return extremal_cq(
            CQChannelParams(
                _unit_from_angles(x[0:2]), _unit_from_angles(x[2:4]), _unit_from_angles(x[4:6])
            )
        )
    if kind == "unital10":
        return _unital_channel(x)
    if kind == "affine12":
        return AffineChannel(x[:3], x[3:].reshape(3, 3))
    if kind == "affine9":
        return AffineChannel(np.zeros(3), x.reshape(3, 3))
    if kind == "zcq2":
        return extremal_cq(
            CQChannelParams(
                _Z,
                np.array([0.0, 0.0, np.sin(x[0])]),
                np.array([0.0, 0.0, np.sin(x[1])]),
            )
        )
    if kind == "bias_dir":
        return float(block.payload) * _unit_from_angles(x)
    if kind == "bias_free":
        return float(np.sin(x[0]) ** 2) * _unit_from_angles(x[1:3])
    if kind == "bias_free_z":
        return np.array([0.0, 0.0, np.sin(x[0])])
    raise InvalidSpec(f"unknown parameter block kind {kind!r}")


_PENALIZED_KINDS = ("affine12", "affine9")


def _bias_blocks(spec: OptimizationSpec) -> list[_Block]:
    if spec.channel_class is ChannelClass.CLASSICAL_DIAGONAL:
        if spec.bias is None:
            return [_Block("v", "bias_free_z", 1)]
        if spec.bias == 0.0:
            return [_Block("v", "fixed", 0, np.zeros(3))]
        return [_Block("v", "fixed", 0, float(spec.bias) * _Z)]
    if spec.bias is None:
        return [_Block("v", "bias_free", 3)]
    if spec.bias == 0.0:
        return [_Block("v", "fixed", 0, np.zeros(3))]
    return [_Block("v", "bias_dir", 2, float(spec.bias))]


def _class_blocks(spec: OptimizationSpec) -> list[_Block]:
    if not isinstance(spec.channel_class, ChannelClass):
        raise InvalidSpec(f"unknown channel class {spec.channel_class!r}")
    if spec.restarts < 1:
        raise InvalidSpec("restarts must be >= 1")
    if spec.max_iters < 1:
        raise InvalidSpec("max_iters must be >= 1")
    if not spec.convergence_tol > 0.0:
        raise InvalidSpec("convergence_tol must be positive")
    if spec.bias is not None and not 0.0 <= spec.bias <= 1.0:
        raise InvalidSpec("fixed bias magnitude must lie in [0, 1]")
    if spec.constraint_mode not in ("exact_cptp", "sampled_positivity"):
        raise InvalidSpec(f"unknown constraint mode {spec.constraint_mode!r}")
    if spec.constraint_mode == "sampled_positivity" and spec.positivity_directions < 1:
        raise InvalidSpec("need at least one positivity direction")
    if spec.cptp_parametrization not in ("ginibre", "extremal"):
        raise InvalidSpec(f"unknown CPTP parametrization {spec.cptp_parametrization!r}")

    sampled = spec.constraint_mode == "sampled_positivity"
    cptp = "affine12" if sampled else (
        "extremal8" if spec.cptp_parametrization == "extremal" else "kraus32"
    )
    unital = "affine9" if sampled else "unital10"
    sizes = {"affine12": 12, "affine9": 9, "extremal8": 8, "kraus32": 32, "unital10": 10}

    def chan(name, kind):
        return _Block(name, kind, sizes.get(kind, 0))

    meas = [_Block(n, "unit2", 2) for n in ("a1", "a2", "b1", "b2")]
    cls = spec.channel_class
    if cls is ChannelClass.GENERAL_CPTP:
        channels = [chan("lambda_a", cptp), chan("lambda_e", cptp), chan("lambda_b", cptp)]
    elif cls is ChannelClass.UNITAL_B:
        channels = [chan("lambda_a", cptp), chan("lambda_e", cptp), chan("lambda_b", unital)]
    elif cls is ChannelClass.UNITAL_A_EBT:
        channels = [chan("lambda_a", unital), _Block("lambda_e", "cq6", 6), chan("lambda_b", cptp)]
    elif cls is ChannelClass.EBT_FREE:
        channels = [chan("lambda_a", cptp), _Block("lambda_e", "cq6", 6), chan("lambda_b", cptp)]
    elif cls is ChannelClass.ALL_UNITARY:
        channels = [_Block(n, "rot3", 3) for n in ("lambda_a", "lambda_e", "lambda_b")]
    elif cls is ChannelClass.CANONICAL_E:
        middle = canonical_channel(spec.canonical_theta, spec.canonical_phi)
        channels = [
            _Block("lambda_a", "rot3", 3),
            _Block("lambda_e", "fixed", 0, middle),
            _Block("lambda_b", "rot3", 3),
        ]
    elif cls is ChannelClass.INDIVISIBLE:
        channels = [_Block("lambda_42", "rot3", 3)]
    elif cls is ChannelClass.CLASSICAL_DIAGONAL:
        channels = [_Block(n, "zcq2", 2) for n in ("lambda_a", "lambda_e", "lambda_b")]
        meas = [_Block(n, "fixed", 0, _Z) for n in ("a1", "a2", "b1", "b2")]
    else:  # pragma: no cover - enum is exhaustive
        raise InvalidSpec(f"unsupported channel class {cls!r}")
    return channels + meas + _bias_blocks(spec)


def _decode(blocks, x, dirs):
    parts = {}
    penalty = 0.0
    offset = 0
    for block in blocks:
        seg = x[offset : offset + block.size]
        offset += block.size
        value = _build_block(block, seg)
        parts[block.name] = value
        if dirs is not None and block.kind in _PENALIZED_KINDS:
            over = np.linalg.norm(dirs @ value.matrix.T + value.shift, axis=1) - 1.0
            over = over[over > 0.0]
            if over.size:
                penalty += _PENALTY_WEIGHT * float(over @ over)
    return parts, penalty


def _bell_of_parts(indivisible: bool, parts) -> float:
    if indivisible:
        ident = identity_channel()
        process = IndivisibleProcess(ident, ident, ident, parts["lambda_42"])
        return bell_indivisible(
            process, parts["v"], parts["a1"], parts["a2"], parts["b1"], parts["b2"]
        )
    e13, e14, e23, e24 = _closed_correlators(
        parts["v"],
        parts["lambda_a"].shift,
        parts["lambda_a"].matrix,
        parts["lambda_e"].shift,
        parts["lambda_e"].matrix,
        parts["lambda_b"].shift,
        parts["lambda_b"].matrix,
        parts["a1"],
        parts["a2"],
        parts["b1"],
        parts["b2"],
    )
    return e13 + e14 + e23 - e24


def _run_multistart(blocks, indivisible, restarts, seed, max_iters, tol, dirs):
    def objective(x):
        try:
            parts, penalty = _decode(blocks, x, dirs)
        except DegenerateDraw:
            return 1.0e3
        return -abs(_bell_of_parts(indivisible, parts)) + penalty

    records = []
    best_value = -np.inf
    best_x = None
    best_restart = -1
    for k in range(restarts):
        restart_seed = _derived_seed(seed, k + 1)
        rng = np.random.default_rng(restart_seed)
        x0 = np.concatenate([_init_block(b, rng) for b in blocks]) if blocks else np.zeros(0)
        result = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": max_iters,
                "maxfev": 10**9,
                "xatol": tol,
                "fatol": np.inf,
                "adaptive": False,
            },
        )
        try:
            parts, _ = _decode(blocks, result.x, None)
            value = abs(_bell_of_parts(indivisible, parts))
        except DegenerateDraw:
            value = -np.inf
        records.append(
            RestartRecord(
                seed=restart_seed,
                value=float(value),
                iterations=int(result.nit),
                converged=bool(result.success),
            )
        )
        if value > best_value:
            best_value = float(value)
            best_x = np.array(result.x, dtype=float)
            best_restart = k
    return best_value, best_x, best_restart, records


def optimize_bell(spec: OptimizationSpec) -> OptimizationResult:
    """Maximise |Bell value| over the class's parameter space.

    Runs ``spec.restarts`` independent Nelder-Mead searches (standard
    reflection/expansion/contraction/shrink coefficients 1, 2, 1/2, 1/2) from
    seeded random starting points; a restart stops when the simplex diameter
    drops below ``convergence_tol`` or after ``max_iters`` iterations.  Ties
    between restarts go to the lowest restart index.  Identical specs produce
    bit-identical results.
    """
    blocks = _class_blocks(spec)
    dirs = None
    if spec.constraint_mode == "sampled_positivity":
        dirs = sample_unit_directions(spec.positivity_directions, _derived_seed(spec.seed, 0))
    indivisible = spec.channel_class is ChannelClass.INDIVISIBLE
    best_value, best_x, best_restart, records = _run_multistart(
        blocks,
        indivisible,
        spec.restarts,
        spec.seed,
        spec.max_iters,
        spec.convergence_tol,
        dirs,
    )
    parts, _ = _decode(blocks, best_x, None)
    audit = all(
        is_cptp(part) for part in parts.values() if isinstance(part, AffineChannel)
    )
    return OptimizationResult(
        spec=spec,
        best_value=best_value,
        best_params=best_x,
        best_restart=best_restart,
        per_restart=tuple(records),
        audit_cptp=bool(audit),
    )


def build_point(spec: OptimizationSpec, params) -> dict:
    """Decode a flat parameter vector into the objects it represents.

    Returns a dict with the decoded measurement directions, bias vector and
    channels, plus an assembled ``scenario`` (divisible classes) or
    ``process`` (INDIVISIBLE).
    """
    blocks = _class_blocks(spec)
    parts, _ = _decode(blocks, np.asarray(params, dtype=float), None)
    if spec.channel_class is ChannelClass.INDIVISIBLE:
        ident = identity_channel()
        parts["process"] = IndivisibleProcess(ident, ident, ident, parts["lambda_42"])
    else:
        parts["scenario"] = TemporalScenario(
            parts["v"],
            parts["lambda_a"],
            parts["lambda_e"],
            parts["lambda_b"],
            parts["a1"],
            parts["a2"],
            parts["b1"],
            parts["b2"],
        )
    return parts


def class_target(spec: OptimizationSpec) -> float | None:
    """Expected supremum for the class and bias mode, when one is known.

    For EBT_FREE with a fixed bias there is no known value: the classical
    ceiling is provable only for unital first channels, and this toolkit's
    searches exceed it once the first channel may shift the maximally mixed
    state (best observed |Bell| ~ 2.1 at zero bias), so None is returned.
    """
    cls = spec.channel_class
    if cls is ChannelClass.CLASSICAL_DIAGONAL:
        return CLASSICAL_BOUND
    if cls is ChannelClass.UNITAL_A_EBT:
        if spec.bias is None:
            return TSIRELSON_BOUND
        return 2.0 * math.sqrt(1.0 + float(spec.bias) ** 2)
    if cls is ChannelClass.EBT_FREE:
        return TSIRELSON_BOUND if spec.bias is None else None
    if cls in (ChannelClass.GENERAL_CPTP, ChannelClass.UNITAL_B, ChannelClass.ALL_UNITARY):
        return TSIRELSON_BOUND
    if cls is ChannelClass.CANONICAL_E:
        if spec.canonical_theta == 0.0 and spec.canonical_phi == 0.0:
            return TSIRELSON_BOUND
        return None
    if cls is ChannelClass.INDIVISIBLE:
        return ALGEBRAIC_MAX
    return None


def _bias_mode_label(spec: OptimizationSpec) -> str:
    if spec.bias is None:
        return "free"
    return f"fixed:{spec.bias:.17g}"


def campaign_report(result: OptimizationResult) -> dict:
    """JSON-ready summary of one optimization campaign."""
    spec = result.spec
    return {
        "class": spec.channel_class.value,
        "bias_mode": _bias_mode_label(spec),
        "target": class_target(spec),
        "best_value": result.best_value,
        "audit_cptp": result.audit_cptp,
        "per_restart": [
            {
                "seed": r.seed,
                "value": r.value,
                "iters": r.iterations,
                "converged": r.converged,
            }
            for r in result.per_restart
        ],
        "restarts": spec.restarts,
        "max_iters": spec.max_iters,
        "convergence_tol": spec.convergence_tol,
        "seed": spec.seed,
        "constraint_mode": spec.constraint_mode,
        "parametrization": spec.cptp_parametrization,
    }


@dataclass(frozen=True)
class TableCell:
    row: str
    column: str
    channel_class: str | None
    bias_mode: str
    target: float | None
    best_value: float | None
    audit_cptp: bool | None
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class Table1Report:
    seed: int
    restarts: int
    cells: tuple[TableCell, ...]
    passed: bool


def verify_table1(seed: int = 42, restarts: int = 64, max_iters: int = 2000) -> Table1Report:
    """Optimize every summary cell and compare against its ceiling.

    A cell passes when its attained maximum is within 1e-3 below its target
    (1e-6 for the conditioned process, whose algebraic maximum is exact) and
    never exceeds the target by more than 1e-6.  The quantum row's
    no-superposition cell is not optimized; diagonal quantum dynamics is the
    classical cell.

    The entanglement-breaking row is searched over unital first channels,
    the setting in which the classical ceiling 2 is provable.  With a free
    first-channel shift the ceiling fails (the EBT_FREE class reaches about
    2.1 at zero bias), so that class has no place in a table of ceilings;
    run it directly to reproduce the excess.  The free-bias cell gets twice
    the iteration budget: its optimum sits at unit bias magnitude, which the
    simplex approaches slowly.
    """
    plan = [
        ("classical-ebt", "no-superposition", ChannelClass.CLASSICAL_DIAGONAL, 0.0, CLASSICAL_BOUND, 1e-3, 1),
        ("classical-ebt", "superposition-no-bias", ChannelClass.UNITAL_A_EBT, 0.0, CLASSICAL_BOUND, 1e-3, 1),
        ("classical-ebt", "superposition-with-bias", ChannelClass.UNITAL_A_EBT, None, TSIRELSON_BOUND, 1e-3, 2),
        ("quantum-divisible", "superposition-no-bias", ChannelClass.GENERAL_CPTP, 0.0, TSIRELSON_BOUND, 1e-3, 1),
        ("quantum-divisible", "superposition-with-bias", ChannelClass.GENERAL_CPTP, None, TSIRELSON_BOUND, 1e-3, 1),
        ("indivisible", "any", ChannelClass.INDIVISIBLE, 0.0, ALGEBRAIC_MAX, 1e-6, 1),
    ]
    cells = []
    for index, (row, column, cls, bias, target, attain_tol, iters_scale) in enumerate(plan):
        spec = OptimizationSpec(
            channel_class=cls,
            bias=bias,
            restarts=restarts,
            max_iters=max_iters * iters_scale,
            seed=_derived_seed(seed, 1000 + index),
            cptp_parametrization="extremal",
        )
        result = optimize_bell(spec)
        passed = (target - attain_tol) <= result.best_value <= (target + 1e-6)
        cells.append(
            TableCell(
                row=row,
                column=column,
                channel_class=cls.value,
                bias_mode=_bias_mode_label(spec),
                target=target,
                best_value=result.best_value,
                audit_cptp=result.audit_cptp,
                passed=bool(passed),
            )
        )
        if row == "classical-ebt" and column == "superposition-with-bias":
            cells.append(
                TableCell(
                    row="quantum-divisible",
                    column="no-superposition",
                    channel_class=None,
                    bias_mode="any",
                    target=None,
                    best_value=None,
                    audit_cptp=None,
                    passed=True,
                    note="contained in classical",
                )
            )
    return Table1Report(
        seed=seed,
        restarts=restarts,
        cells=tuple(cells),
        passed=bool(all(c.passed for c in cells)),
    )


def _chsh_settings():
    z = _Z
    x = np.array([1.0, 0.0, 0.0])
    s2 = math.sqrt(2.0)
    return z, x, (z + x) / s2, (z - x) / s2


@dataclass(frozen=True)
class WernerPoint:
    p: float
    bell_fixed_settings: float
    max_bell: float
    is_ebt: bool


def scan_werner(
    p_grid, seed: int = 0, restarts: int = 4, max_iters: int = 600
) -> list[WernerPoint]:
    """Sweep the identity/depolarising mixture.

    At the standard optimal settings the Bell value is exactly linear in the
    mixing weight; ``max_bell`` re-derives the same number by a short
    measurement-only optimization, and ``is_ebt`` classifies the channel by
    the partial-transpose test.
    """
    a1, a2, b1, b2 = _chsh_settings()
    ident = identity_channel()
    blocks = [
        _Block("lambda_a", "fixed", 0, ident),
        _Block("lambda_e", "fixed", 0, None),
        _Block("lambda_b", "fixed", 0, ident),
        _Block("a1", "unit2", 2),
        _Block("a2", "unit2", 2),
        _Block("b1", "unit2", 2),
        _Block("b2", "unit2", 2),
        _Block("v", "fixed", 0, np.zeros(3)),
    ]
    points = []
    for index, p in enumerate(p_grid):
        p = float(p)
        middle = werner_channel(p)
        scenario = TemporalScenario(np.zeros(3), ident, middle, ident, a1, a2, b1, b2)
        fixed = bell_value(correlations_closed_form(scenario))
        cell_blocks = [
            _Block("lambda_e", "fixed", 0, middle) if b.name == "lambda_e" else b for b in blocks
        ]
        best, _, _, _ = _run_multistart(
            cell_blocks,
            False,
            restarts,
            _derived_seed(seed, index + 1),
            max_iters,
            1e-9,
            None,
        )
        points.append(
            WernerPoint(
                p=p,
                bell_fixed_settings=float(fixed),
                max_bell=float(best),
                is_ebt=is_entanglement_breaking(middle),
            )
        )
    return points


@dataclass(frozen=True)
class CanonicalPoint:
    theta: float
    phi: float
    max_bell: float
    nonunitary_by_margin: bool
    below_tsirelson: bool


def scan_canonical_e(
    theta_grid,
    phi_grid,
    restarts: int = 8,
    seed: int = 0,
    max_iters: int = 1200,
) -> list[CanonicalPoint]:
    """Optimize rotations, measurements and bias around each fixed two-angle
    middle channel.

    ``nonunitary_by_margin`` flags channels whose shift or shrinkage is at
    least 0.1; ``below_tsirelson`` records whether the attained maximum
    stayed below the two-observer quantum ceiling by more than 1e-3.
    """
    points = []
    index = 0
    for theta in theta_grid:
        for phi in phi_grid:
            index += 1
            theta = float(theta)
            phi = float(phi)
            spec = OptimizationSpec(
                channel_class=ChannelClass.CANONICAL_E,
                bias=None,
                restarts=restarts,
                max_iters=max_iters,
                seed=_derived_seed(seed, index),
                canonical_theta=theta,
                canonical_phi=phi,
            )
            result = optimize_bell(spec)
            shift_margin = abs(math.sin(theta) * math.sin(phi))
            shrinkage = 1.0 - min(
                abs(math.cos(theta)), abs(math.cos(phi)), abs(math.cos(theta) * math.cos(phi))
            )
            points.append(
                CanonicalPoint(
                    theta=theta,
                    phi=phi,
                    max_bell=result.best_value,
                    nonunitary_by_margin=bool(shift_margin >= 0.1 or shrinkage >= 0.1),
                    below_tsirelson=bool(result.best_value < TSIRELSON_BOUND - 1e-3),
                )
            )
    return points


def _orthonormal_pair(rng):
    w = rng.standard_normal(3)
    w /= np.linalg.norm(w)
    u = rng.standard_normal(3)
    u -= (u @ w) * w
    while np.linalg.norm(u) < 1e-9:
        u = rng.standard_normal(3)
        u -= (u @ w) * w
    return w, u / np.linalg.norm(u)


@dataclass(frozen=True)
class EbtBiasPoint:
    magnitude: float
    attained: float
    target: float


def verify_ebt_bias(v_magnitudes, seed: int = 0) -> list[EbtBiasPoint]:
    """Evaluate the explicit biased-input construction.

    A projective middle channel along c, a replace channel on Bob's side,
    Bob reading out c and the replaced direction, and Alice's settings tilted
    between c and the bias direction attain 2*sqrt(1 + |v|^2) exactly; the
    whole construction is drawn in a seeded random frame.
    """
    rng = np.random.default_rng(seed)
    c, x = _orthonormal_pair(rng)
    middle = extremal_cq(CQChannelParams(c, c, -c))
    bob = replace_channel(x)
    ident = identity_channel()
    points = []
    for m in v_magnitudes:
        m = float(m)
        if not 0.0 <= m <= 1.0:
            raise InvalidSpec("bias magnitudes must lie in [0, 1]")
        tilt = math.atan(m)
        a1 = math.cos(tilt) * c + math.sin(tilt) * x
        a2 = math.cos(tilt) * c - math.sin(tilt) * x
        scenario = TemporalScenario(m * x, ident, middle, bob, a1, a2, c, x)
        attained = bell_value(correlations_closed_form(scenario))
        points.append(
            EbtBiasPoint(
                magnitude=m,
                attained=float(attained),
                target=2.0 * math.sqrt(1.0 + m * m),
            )
        )
    return points


def verify_cq_alice_tsirelson(seed: int = 0) -> float:
    """Bell value of the measure-and-prepare-first construction.

    With a projective first channel along w preparing +/- w, free dynamics
    afterwards, the maximally mixed input, and Bob's settings at 45 degrees
    in the (w, w_perp) plane, the quantum ceiling 2*sqrt(2) is attained; the
    frame is seeded random.
    """
    rng = np.random.default_rng(seed)
    w, w_perp = _orthonormal_pair(rng)
    alice = extremal_cq(CQChannelParams(w, w, -w))
    ident = identity_channel()
    c, s = math.cos(0.25 * math.pi), math.sin(0.25 * math.pi)
    scenario = TemporalScenario(
        np.zeros(3), alice, ident, ident, w, w_perp, c * w + s * w_perp, c * w - s * w_perp
    )
    return float(bell_value(correlations_closed_form(scenario)))
