"""Builders for reversible integer arithmetic on qubit registers.

Registers are little-endian qubit-index lists. Builders are pure functions
returning immutable :class:`~qmcprng.statevec.Circuit` values; they never
touch a statevector. Every circuit built here permutes basis states, so
``inverse(build_*(...))`` undoes ``build_*(...)`` exactly.

Scratch qubits, where needed, may be passed in by the caller (they must be
|0> on entry and are restored to |0> on the documented input domain); when
omitted, fresh indices just above the highest register index are used.

The adder family is a multi-controlled ripple: adding ``2**j`` increments
the sub-register from bit ``j`` upward, with each carry realized as one
multi-controlled X. Comparison derives the borrow bit of ``x - y`` by
complement-and-add, which needs no internal ancilla at all. Modular
reduction is compare-and-subtract. These choices favour exhaustively
verifiable correctness over hardware-optimal depth; the resource counter in
:mod:`qmcprng.analysis` reports what they cost.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import ParameterError
from .statevec import Circuit, Gate, concat_circuits, controlled, inverse


@dataclass(frozen=True)
class RegisterSpec:
    """An ordered, least-significant-first list of distinct qubit indices."""

    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        qs = tuple(int(q) for q in self.qubits)
        if not qs:
            raise ParameterError("register needs at least one qubit")
        if len(set(qs)) != len(qs) or any(q < 0 for q in qs):
            raise ParameterError(f"register qubits must be distinct and non-negative: {qs}")
        object.__setattr__(self, "qubits", qs)

    @property
    def width(self) -> int:
        return len(self.qubits)

    @classmethod
    def of(cls, reg: Union["RegisterSpec", Iterable[int]]) -> "RegisterSpec":
        return reg if isinstance(reg, RegisterSpec) else cls(tuple(reg))


def _width_over(*qubit_groups: Iterable[int]) -> int:
    return max(q for group in qubit_groups for q in group) + 1


def mod_inverse(a: int, m: int) -> int:
    """The b in (0, m) with a*b = 1 (mod m), by the extended Euclidean algorithm."""
    if m < 1:
        raise ParameterError(f"modulus must be positive, got {m}")
    a = a % m
    old_r, r = a, m
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    if old_r != 1:
        raise ParameterError(f"{a} has no inverse modulo {m} (gcd = {old_r})")
    return old_s % m


# ---------------------------------------------------------------------------
# Plain binary arithmetic (mod 2**width)


def _increment_gates(bits: Sequence[int], controls: tuple[int, ...] = ()) -> list[Gate]:
    """Add 1 to the sub-register ``bits`` (mod 2**len), optionally controlled."""
    gates = []
    for i in range(len(bits) - 1, 0, -1):
        gates.append(Gate.x(bits[i], controls=tuple(bits[:i]) + controls))
    gates.append(Gate.x(bits[0], controls=controls))
    return gates


def _add_const_gates(bits: Sequence[int], k: int) -> list[Gate]:
    gates: list[Gate] = []
    for j in range(len(bits)):
        if (k >> j) & 1:
            gates.extend(_increment_gates(bits[j:]))
    return gates


def build_add_const(reg, k: int) -> Circuit:
    """|x> -> |(x + k) mod 2**width>."""
    reg = RegisterSpec.of(reg)
    if not 0 <= k < (1 << reg.width):
        raise ParameterError(f"constant {k} out of range for width {reg.width}")
    return Circuit(width=_width_over(reg.qubits),
                   gates=tuple(_add_const_gates(reg.qubits, k)),
                   label=f"add({k})")


def build_ctrl_add_const(reg, k: int, control: int) -> Circuit:
    """|x> -> |(x + k) mod 2**width> when the control qubit is 1, else identity."""
    circ = controlled(build_add_const(reg, k), (control,))
    return Circuit(circ.width, circ.gates, label=f"cadd({k})")


def _add_register_gates(src: Sequence[int], dst: Sequence[int]) -> list[Gate]:
    """|y>|z> -> |y>|(z + y) mod 2**len(dst)>, len(dst) >= len(src)."""
    gates: list[Gate] = []
    for j, s in enumerate(src):
        gates.extend(_increment_gates(dst[j:], controls=(s,)))
    return gates


def build_add_register(src, dst) -> Circuit:
    """Register-into-register adder; ``dst`` may be wider than ``src``."""
    src = RegisterSpec.of(src)
    dst = RegisterSpec.of(dst)
    if set(src.qubits) & set(dst.qubits):
        raise ParameterError("source and destination registers overlap")
    if dst.width < src.width:
        raise ParameterError("destination narrower than source")
    return Circuit(width=_width_over(src.qubits, dst.qubits),
                   gates=tuple(_add_register_gates(src.qubits, dst.qubits)),
                   label="add(reg)")


# ---------------------------------------------------------------------------
# Comparison


def build_compare_less(x_reg, y_reg, flag_qubit: int) -> Circuit:
    """|x>|y>|f> -> |x>|y>|f xor (x < y)>; x and y are unchanged.

    The flag is normally supplied clean (|0>), leaving it holding x < y.
    Works by complementing x, adding y into the widened register
    ``x + flag`` (whose top bit then reads y > x), and undoing the rest.
    No internal ancillas.
    """
    x = RegisterSpec.of(x_reg)
    y = RegisterSpec.of(y_reg)
    if x.width != y.width:
        raise ParameterError("comparison registers must have equal widths")
    all_qubits = set(x.qubits) | set(y.qubits)
    if len(all_qubits) != 2 * x.width or flag_qubit in all_qubits:
        raise ParameterError("comparison registers and flag must be disjoint")
    extended = x.qubits + (flag_qubit,)
    gates: list[Gate] = [Gate.x(q) for q in x.qubits]
    gates += _add_register_gates(y.qubits, extended)
    gates += [g.inverse() for g in reversed(_add_register_gates(y.qubits, x.qubits))]
    gates += [Gate.x(q) for q in x.qubits]
    return Circuit(width=_width_over(all_qubits, (flag_qubit,)),
                   gates=tuple(gates), label="less_than")


def build_compare_less_const(x_reg, k: int, flag_qubit: int) -> Circuit:
    """|x>|f> -> |x>|f xor (x < k)> for a constant k in [0, 2**width]."""
    x = RegisterSpec.of(x_reg)
    if not 0 <= k <= (1 << x.width):
        raise ParameterError(f"threshold {k} out of range for width {x.width}")
    if flag_qubit in x.qubits:
        raise ParameterError("flag must be outside the compared register")
    w = x.width
    extended = x.qubits + (flag_qubit,)
    complement = (1 << w) - k
    gates: list[Gate] = []
    gates += _add_const_gates(extended, complement)       # flag bit <- (x >= k)
    gates += _add_const_gates(x.qubits, k % (1 << w))     # restore low bits
    gates.append(Gate.x(flag_qubit))                      # flag <- (x < k)
    return Circuit(width=_width_over(x.qubits, (flag_qubit,)),
                   gates=tuple(gates), label=f"less_than({k})")


# ---------------------------------------------------------------------------
# Modular arithmetic


def _fresh_indices(base: int, count: int) -> tuple[int, ...]:
    return tuple(range(base, base + count))


def build_modadd_const(reg, c: int, m: int, flag: int | None = None) -> Circuit:
    """|x> -> |(x + c) mod m> for inputs x < m; one scratch flag qubit.

    Behaviour for x >= m is unspecified but remains a basis permutation.
    The flag returns to |0> for every valid input.
    """
    reg = RegisterSpec.of(reg)
    w = reg.width
    if not 1 <= m <= (1 << w):
        raise ParameterError(f"modulus {m} does not fit width {w}")
    if not 0 <= c < m:
        raise ParameterError(f"addend {c} out of range for modulus {m}")
    if flag is None:
        flag = _width_over(reg.qubits)
    if flag in reg.qubits:
        raise ParameterError("scratch flag collides with the register")
    if c == 0:
        return Circuit(width=_width_over(reg.qubits, (flag,)), gates=(),
                       label=f"modadd(0 mod {m})", ancillas=(flag,))
    gates: list[Gate] = []
    gates += build_compare_less_const(reg, m - c, flag).gates     # f <- (x < m - c)
    gates += build_ctrl_add_const(reg, c, flag).gates             # branch x + c
    gates.append(Gate.x(flag))
    gates += build_ctrl_add_const(reg, (c - m) % (1 << w), flag).gates  # branch wrap
    gates.append(Gate.x(flag))
    gates += build_compare_less_const(reg, c, flag).gates         # f <- f xor (y < c)
    gates.append(Gate.x(flag))                                    # clears f for x < m
    return Circuit(width=_width_over(reg.qubits, (flag,)), gates=tuple(gates),
                   label=f"modadd({c} mod {m})", ancillas=(flag,))


def _mul_into_gates(src: RegisterSpec, dst: RegisterSpec, a: int, m: int,
                    flag: int) -> list[Gate]:
    """|x>|p> -> |x>|(p + a*x) mod m>, shift-and-add with modular reduction."""
    gates: list[Gate] = []
    for j, ctrl in enumerate(src.qubits):
        term = (a << j) % m
        if term == 0:
            continue
        step = build_modadd_const(dst, term, m, flag=flag)
        gates.extend(controlled(step, (ctrl,)).gates)
    return gates


def build_modmul_const_inplace(reg, a: int, m: int,
                               scratch: Sequence[int] | None = None) -> Circuit:
    """|x> -> |a*x mod m> in place, for inputs x < m and gcd(a, m) = 1.

    Needs width+1 scratch qubits: a product register plus the modadd flag,
    all returned to |0>. Built as multiply-into-scratch by ``a``, a register
    swap, then the inverse of multiply-into-scratch by ``a``'s modular
    inverse.
    """
    reg = RegisterSpec.of(reg)
    w = reg.width
    if not 1 <= m <= (1 << w):
        raise ParameterError(f"modulus {m} does not fit width {w}")
    a_inv = mod_inverse(a, m)   # raises if gcd(a, m) != 1
    a = a % m
    if scratch is None:
        scratch = _fresh_indices(_width_over(reg.qubits), w + 1)
    scratch = tuple(scratch)
    if len(scratch) < w + 1:
        raise ParameterError(f"modular multiply needs {w + 1} scratch qubits")
    if set(scratch) & set(reg.qubits):
        raise ParameterError("scratch collides with the register")
    product = RegisterSpec(scratch[:w])
    flag = scratch[w]
    gates: list[Gate] = []
    gates += _mul_into_gates(reg, product, a, m, flag)
    gates += [Gate.swap(x, p) for x, p in zip(reg.qubits, product.qubits)]
    undo = _mul_into_gates(reg, product, a_inv, m, flag)
    gates += [g.inverse() for g in reversed(undo)]
    return Circuit(width=_width_over(reg.qubits, scratch), gates=tuple(gates),
                   label=f"modmul({a} mod {m})", ancillas=scratch[:w + 1])


def build_modexp_mul(k_reg, target_reg, a: int, m: int,
                     scratch: Sequence[int] | None = None) -> Circuit:
    """|k>|x> -> |k>|a**k * x mod m> for x < m and gcd(a, m) = 1.

    One controlled in-place modular multiply by ``a**(2**j) mod m`` per bit
    j of the exponent register.
    """
    k_reg = RegisterSpec.of(k_reg)
    target = RegisterSpec.of(target_reg)
    mod_inverse(a, m)   # validates coprimality early
    if set(k_reg.qubits) & set(target.qubits):
        raise ParameterError("exponent and target registers overlap")
    if scratch is None:
        scratch = _fresh_indices(_width_over(k_reg.qubits, target.qubits),
                                 target.width + 1)
    scratch = tuple(scratch)
    if set(scratch) & (set(k_reg.qubits) | set(target.qubits)):
        raise ParameterError("scratch collides with a register")
    gates: list[Gate] = []
    for j, ctrl in enumerate(k_reg.qubits):
        factor = pow(a, 1 << j, m)
        if factor == 1:
            continue
        step = build_modmul_const_inplace(target, factor, m, scratch=scratch)
        gates.extend(controlled(step, (ctrl,)).gates)
    return Circuit(width=_width_over(k_reg.qubits, target.qubits, scratch),
                   gates=tuple(gates), label=f"modexp({a} mod {m})",
                   ancillas=scratch[:target.width + 1])
