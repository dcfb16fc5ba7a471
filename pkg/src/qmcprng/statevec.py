"""Dense statevector simulator for reversible circuits with real rotations.

Conventions used throughout this package:

* Registers are little-endian. Bit ``k`` of a basis index is the value of
  qubit ``k``, and a register passed as a qubit list is least-significant
  qubit first.
* ``rot(angle)`` is the real rotation ``[[cos a, -sin a], [sin a, cos a]]``,
  so successive rotations on the same qubit add their angles and a single
  rotation on |0> yields ``cos a |0> + sin a |1>``.
* Multi-controlled gates act directly on the statevector. Nothing is
  decomposed into a universal gate set here; hardware-style gate and depth
  accounting lives in :mod:`qmcprng.analysis`.

A :class:`StateVector` is an exclusive-access value: operations mutate it in
place and return it, and it must not be shared between concurrent
operations. :class:`Circuit` and :class:`Gate` are immutable values, safe to
share. Applying a circuit uses a cached compiled form in which maximal runs
of classical gates (X/SWAP/phase flips) are fused into a single basis
permutation plus sign mask, which makes repeated application of
arithmetic-heavy circuits cheap.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, ParameterError, ResourceError

DEFAULT_MAX_QUBITS = 28
"""Default qubit cap: 2**28 complex128 amplitudes is a 4 GiB statevector."""

# Gate kinds. The first four permute/sign-flip basis states ("classical"
# gates); H and ROT mix amplitudes.
X = "x"
SWAP = "swap"
FLIP_ZERO = "flip_zero"  # negate amplitude when every target qubit is 0
FLIP_ONE = "flip_one"    # negate amplitude when the target qubit is 1
H = "h"
ROT = "rot"

_CLASSICAL_KINDS = frozenset({X, SWAP, FLIP_ZERO, FLIP_ONE})
_MIXING_KINDS = frozenset({H, ROT})
_ALL_KINDS = _CLASSICAL_KINDS | _MIXING_KINDS

_SQRT_HALF = 1.0 / math.sqrt(2.0)


def _as_index_tuple(qubits: Iterable[int], what: str) -> tuple[int, ...]:
    out = tuple(int(q) for q in qubits)
    if any(q < 0 for q in out):
        raise ParameterError(f"{what} indices must be non-negative, got {out}")
    if len(set(out)) != len(out):
        raise ParameterError(f"{what} indices must be distinct, got {out}")
    return out


@dataclass(frozen=True)
class Gate:
    """One primitive gate: a kind, target qubits, optional control qubits.

    ``angle`` is only meaningful for ``rot`` gates. Controls may be attached
    to any kind; the gate acts as identity on basis states where any control
    is 0.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _ALL_KINDS:
            raise ParameterError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", _as_index_tuple(self.targets, "target"))
        object.__setattr__(self, "controls", _as_index_tuple(self.controls, "control"))
        if set(self.targets) & set(self.controls):
            raise ParameterError(
                f"targets {self.targets} and controls {self.controls} must be disjoint")
        n_targets = len(self.targets)
        if self.kind == SWAP:
            if n_targets != 2:
                raise ParameterError("swap needs exactly two targets")
        elif self.kind == FLIP_ZERO:
            if n_targets < 1:
                raise ParameterError("flip_zero needs at least one target")
        elif n_targets != 1:
            raise ParameterError(f"{self.kind} needs exactly one target")

    # -- constructors ---------------------------------------------------

    @classmethod
    def x(cls, target: int, controls: Iterable[int] = ()) -> "Gate":
        return cls(X, (target,), tuple(controls))

    @classmethod
    def h(cls, target: int, controls: Iterable[int] = ()) -> "Gate":
        return cls(H, (target,), tuple(controls))

    @classmethod
    def swap(cls, a: int, b: int, controls: Iterable[int] = ()) -> "Gate":
        return cls(SWAP, (a, b), tuple(controls))

    @classmethod
    def rot(cls, target: int, angle: float, controls: Iterable[int] = ()) -> "Gate":
        return cls(ROT, (target,), tuple(controls), float(angle))

    @classmethod
    def flip_zero(cls, targets: Iterable[int], controls: Iterable[int] = ()) -> "Gate":
        return cls(FLIP_ZERO, tuple(targets), tuple(controls))

    @classmethod
    def flip_one(cls, target: int, controls: Iterable[int] = ()) -> "Gate":
        return cls(FLIP_ONE, (target,), tuple(controls))

    # -- derived forms ---------------------------------------------------

    def inverse(self) -> "Gate":
        if self.kind == ROT:
            return Gate(ROT, self.targets, self.controls, -self.angle)
        return self  # every other kind is an involution

    def with_extra_controls(self, extra: Iterable[int]) -> "Gate":
        merged = self.controls + tuple(q for q in extra if q not in self.controls)
        return Gate(self.kind, self.targets, merged, self.angle)

    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered gate sequence over ``width`` qubits.

    ``ancillas`` records scratch qubits a builder used internally; they are
    promised to return to |0> on the builder's documented input domain.
    Circuits compare by identity, which also keys the compiled-form cache.
    """

    width: int
    gates: tuple[Gate, ...]
    label: str = ""
    ancillas: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "ancillas", tuple(self.ancillas))
        if self.width < 0:
            raise ParameterError("circuit width must be non-negative")
        for g in self.gates:
            bad = [q for q in g.qubits() if q >= self.width]
            if bad:
                raise ParameterError(
                    f"gate {g.kind} uses qubits {bad} outside width {self.width}")
        if any(q >= self.width or q < 0 for q in self.ancillas):
            raise ParameterError("ancilla index outside circuit width")

    def used_qubits(self) -> set[int]:
        used: set[int] = set()
        for g in self.gates:
            used.update(g.qubits())
        return used


def concat_circuits(label: str, *parts: Circuit, width: int | None = None,
                    ancillas: Iterable[int] = ()) -> Circuit:
    """Concatenate circuits left to right into one circuit."""
    gates: list[Gate] = []
    anc: set[int] = set(ancillas)
    w = 0
    for part in parts:
        gates.extend(part.gates)
        anc.update(part.ancillas)
        w = max(w, part.width)
    if width is not None:
        if width < w:
            raise ParameterError(f"requested width {width} below required {w}")
        w = width
    return Circuit(width=w, gates=tuple(gates), label=label, ancillas=tuple(sorted(anc)))


def inverse(circuit: Circuit) -> Circuit:
    """The exact inverse: reversed sequence of per-gate inverses."""
    gates = tuple(g.inverse() for g in reversed(circuit.gates))
    return Circuit(circuit.width, gates, label=f"inv({circuit.label})",
                   ancillas=circuit.ancillas)


def controlled(circuit: Circuit, controls: Iterable[int]) -> Circuit:
    """Every gate gains the extra controls.

    The controls must not collide with any qubit the circuit touches.
    """
    ctrl = _as_index_tuple(controls, "control")
    collision = set(ctrl) & circuit.used_qubits()
    if collision:
        raise ParameterError(f"controls {sorted(collision)} collide with circuit qubits")
    gates = tuple(g.with_extra_controls(ctrl) for g in circuit.gates)
    width = max([circuit.width] + [q + 1 for q in ctrl])
    return Circuit(width, gates, label=f"ctrl({circuit.label})", ancillas=circuit.ancillas)


# ---------------------------------------------------------------------------
# State


@dataclass(eq=False)
class StateVector:
    """Complex amplitudes over 2**n_qubits basis states (index bit k = qubit k)."""

    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm_error(self) -> float:
        return abs(1.0 - float(np.sum(np.abs(self.amplitudes) ** 2)))


def new_state(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Allocate |0...0> on ``n_qubits`` qubits."""
    if n_qubits < 1:
        raise ParameterError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > max_qubits:
        raise ResourceError(
            f"{n_qubits} qubits exceeds the cap of {max_qubits} "
            f"(statevector would take {16 * 2 ** n_qubits / 2 ** 30:.1f} GiB)")
    amplitudes = np.zeros(1 << n_qubits, dtype=np.complex128)
    amplitudes[0] = 1.0
    return StateVector(n_qubits, amplitudes)


def basis_state(n_qubits: int, index: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Allocate the computational basis state |index>."""
    state = new_state(n_qubits, max_qubits)
    if not 0 <= index < state.amplitudes.size:
        raise ParameterError(f"basis index {index} outside {n_qubits} qubits")
    if index:
        state.amplitudes[0] = 0.0
        state.amplitudes[index] = 1.0
    return state


# ---------------------------------------------------------------------------
# Kernels

def _gate_span(gate: Gate) -> tuple[int, int]:
    qs = gate.qubits()
    lo = min(qs)
    return lo, max(qs) + 1 - lo


def _control_mask(idx: np.ndarray, controls: Sequence[int], lo: int) -> np.ndarray:
    sel = np.ones(idx.size, dtype=bool)
    for c in controls:
        sel &= (idx >> (c - lo)) & 1 == 1
    return sel


def _classical_tables(gates: Sequence[Gate], lo: int, bits: int
                      ) -> tuple[np.ndarray, np.ndarray | None]:
    """Compose classical gates into one basis permutation plus sign mask.

    Returns ``(perm, sign)`` with ``perm[i]`` the image of basis state ``i``
    (indices local to the span) and ``sign`` None when no flip occurred.
    """
    size = 1 << bits
    idx = np.arange(size, dtype=np.int64)
    perm = idx.copy()
    sign: np.ndarray | None = None
    for g in gates:
        sel = _control_mask(idx, g.controls, lo)
        if g.kind == X:
            t = g.targets[0] - lo
            step = np.where(sel, idx ^ (1 << t), idx)
        elif g.kind == SWAP:
            a, b = (t - lo for t in g.targets)
            differ = sel & (((idx >> a) & 1) != ((idx >> b) & 1))
            step = np.where(differ, idx ^ ((1 << a) | (1 << b)), idx)
        elif g.kind == FLIP_ZERO:
            cond = sel.copy()
            for t in g.targets:
                cond &= (idx >> (t - lo)) & 1 == 0
            if sign is None:
                sign = np.ones(size, dtype=np.float64)
            sign = sign * np.where(cond[perm], -1.0, 1.0)
            continue
        else:  # FLIP_ONE
            t = g.targets[0] - lo
            cond = sel & ((idx >> t) & 1 == 1)
            if sign is None:
                sign = np.ones(size, dtype=np.float64)
            sign = sign * np.where(cond[perm], -1.0, 1.0)
            continue
        perm = step[perm]
    return perm, sign


@dataclass
class _PermSegment:
    lo: int
    bits: int
    gather: np.ndarray          # inverse permutation, ready for a take()
    sign: np.ndarray | None     # sign aligned with gather, or None

    def apply(self, state: StateVector) -> None:
        amps = state.amplitudes
        view = amps.reshape(-1, 1 << self.bits, 1 << self.lo)
        out = view.take(self.gather, axis=1)
        if self.sign is not None:
            out *= self.sign[None, :, None]
        state.amplitudes = out.reshape(amps.size)


@dataclass
class _MixSegment:
    gate: Gate

    def apply(self, state: StateVector) -> None:
        _apply_mixing(state, self.gate)


def _make_perm_segment(gates: Sequence[Gate]) -> _PermSegment:
    lo = min(min(g.qubits()) for g in gates)
    hi = max(max(g.qubits()) for g in gates)
    bits = hi + 1 - lo
    perm, sign = _classical_tables(gates, lo, bits)
    gather = np.empty_like(perm)
    gather[perm] = np.arange(perm.size, dtype=np.int64)
    return _PermSegment(lo, bits, gather, None if sign is None else sign[gather])


def _build_segments(circuit: Circuit) -> list[_PermSegment | _MixSegment]:
    segments: list[_PermSegment | _MixSegment] = []
    run: list[Gate] = []
    for g in circuit.gates:
        if g.kind in _CLASSICAL_KINDS:
            run.append(g)
        else:
            if run:
                segments.append(_make_perm_segment(run))
                run = []
            segments.append(_MixSegment(g))
    if run:
        segments.append(_make_perm_segment(run))
    return segments


_SEGMENT_CACHE: "weakref.WeakKeyDictionary[Circuit, list]" = weakref.WeakKeyDictionary()


def _segments(circuit: Circuit) -> list[_PermSegment | _MixSegment]:
    segs = _SEGMENT_CACHE.get(circuit)
    if segs is None:
        segs = _build_segments(circuit)
        _SEGMENT_CACHE[circuit] = segs
    return segs


def _mixing_matrix(gate: Gate) -> tuple[float, float, float, float]:
    if gate.kind == H:
        return _SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF
    c, s = math.cos(gate.angle), math.sin(gate.angle)
    return c, -s, s, c


def _apply_mixing(state: StateVector, gate: Gate) -> None:
    lo, bits = _gate_span(gate)
    t = gate.targets[0] - lo
    idx = np.arange(1 << bits, dtype=np.int64)
    sel = _control_mask(idx, gate.controls, lo) & ((idx >> t) & 1 == 0)
    i0 = idx[sel]
    i1 = i0 | (1 << t)
    view = state.amplitudes.reshape(-1, 1 << bits, 1 << lo)
    a0 = view[:, i0, :].copy()
    a1 = view[:, i1, :]
    u00, u01, u10, u11 = _mixing_matrix(gate)
    view[:, i0, :] = u00 * a0 + u01 * a1
    view[:, i1, :] = u10 * a0 + u11 * a1


def _check_gate_fits(gate: Gate, n_qubits: int) -> None:
    bad = [q for q in gate.qubits() if q >= n_qubits]
    if bad:
        raise ParameterError(f"gate {gate.kind} uses qubits {bad} on a {n_qubits}-qubit state")


def apply(state: StateVector, gate: Gate) -> StateVector:
    """Apply one (controlled) gate in place and return the state."""
    _check_gate_fits(gate, state.n_qubits)
    if gate.kind in _CLASSICAL_KINDS:
        _make_perm_segment([gate]).apply(state)
    else:
        _apply_mixing(state, gate)
    return state


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Apply a circuit's gates left to right, in place."""
    if circuit.width > state.n_qubits:
        raise ParameterError(
            f"circuit width {circuit.width} exceeds state width {state.n_qubits}")
    for segment in _segments(circuit):
        segment.apply(state)
    return state


# ---------------------------------------------------------------------------
# Readout


def probability_one(state: StateVector, qubit: int) -> float:
    """Probability of measuring |1> on one qubit."""
    if not 0 <= qubit < state.n_qubits:
        raise ParameterError(f"qubit {qubit} outside state of {state.n_qubits}")
    view = state.amplitudes.reshape(-1, 2, 1 << qubit)
    return float(np.sum(np.abs(view[:, 1, :]) ** 2))


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Measurement distribution over a qubit subset, pattern bit j = qubits[j]."""
    qs = _as_index_tuple(qubits, "qubit")
    for q in qs:
        if q >= state.n_qubits:
            raise ParameterError(f"qubit {q} outside state of {state.n_qubits}")
    idx = np.arange(state.amplitudes.size, dtype=np.int64)
    key = np.zeros_like(idx)
    for j, q in enumerate(qs):
        key |= ((idx >> q) & 1) << j
    weights = np.abs(state.amplitudes) ** 2
    probs = np.bincount(key, weights=weights, minlength=1 << len(qs))
    total = probs.sum()
    if total <= 0:
        raise ContractError("state has zero norm")
    return probs / total


def sample_counts(state: StateVector, qubits: Sequence[int], shots: int,
                  seed) -> dict[int, int]:
    """Multinomial measurement histogram, deterministic for a given seed.

    ``seed`` may be an int or a sequence of ints (a derived stream key).
    """
    if shots < 1:
        raise ParameterError("shots must be >= 1")
    probs = marginal_probabilities(state, qubits)
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    return {pattern: int(count) for pattern, count in enumerate(draws) if count}


def read_basis(state: StateVector, tol: float = 1e-9) -> int:
    """Return the basis index of a computational basis state.

    Raises :class:`ContractError` if the state is not basis-like, i.e. no
    amplitude has magnitude above ``1 - tol``.
    """
    i = int(np.argmax(np.abs(state.amplitudes)))
    if abs(state.amplitudes[i]) <= 1.0 - tol:
        raise ContractError("state is not a computational basis state")
    return i


def basis_action(circuit: Circuit, width: int | None = None
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Exact classical action of a permutation circuit.

    Returns ``(perm, sign)`` over all ``2**width`` basis states, where the
    circuit maps ``|i>`` to ``sign[i] * |perm[i]>``. Raises
    :class:`ContractError` if the circuit contains mixing gates (H/ROT),
    which have no basis-permutation semantics.
    """
    w = circuit.width if width is None else width
    if w < circuit.width:
        raise ParameterError("width below circuit width")
    for g in circuit.gates:
        if g.kind in _MIXING_KINDS:
            raise ContractError(f"{g.kind} gate has no classical basis action")
    if not circuit.gates:
        size = 1 << w
        return np.arange(size, dtype=np.int64), np.ones(size)
    perm, sign = _classical_tables(circuit.gates, 0, w)
    if sign is None:
        sign = np.ones(perm.size)
    return perm, sign
