"""Linear/permuted congruential generators, classically and as circuits.

The classical side implements the LCG recurrence ``x' = (a*x + c) mod m``,
closed-form jump-ahead, and the two output permutations (random rotation of
the middle bits, xorshift). The quantum side builds, from the arithmetic
circuits in :mod:`qmcprng.qarith`:

* a *step* circuit advancing the generator state register by one draw, and
* a *jump* circuit that seeds the state register with the first element of
  the i-th subsequence, where i is read from a sample-index register.

Both act in place on the state register (no per-step output registers), so
they can be chained arbitrarily many times inside a larger circuit.

Bit positions follow the register convention: a generator on ``n`` bits
lives in an ``n``-qubit little-endian register, and "top" bits are the most
significant ones. Low-quality bits are never erased (that would not be
reversible); downstream consumers simply read only the ``output_window``
qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ParameterError
from .qarith import (RegisterSpec, build_modadd_const, build_modmul_const_inplace,
                     mod_inverse)
from .statevec import (Circuit, Gate, basis_action, concat_circuits, controlled,
                       inverse)


@dataclass(frozen=True)
class LcgParams:
    """Multiplier, increment, modulus and seed of a linear congruential generator."""

    a: int
    c: int
    m: int
    seed: int

    def __post_init__(self) -> None:
        if self.a <= 0 or self.c < 0 or self.m <= 0:
            raise ParameterError(f"need a > 0, c >= 0, m > 0, got {self}")
        if not 0 <= self.seed < self.m:
            raise ParameterError(f"seed {self.seed} outside [0, {self.m})")

    @property
    def n_bits(self) -> int:
        """Register width: ceil(log2 m), at least 1."""
        return max(1, (self.m - 1).bit_length())


def lcg_next(params: LcgParams, x: int) -> int:
    """One recurrence step (a*x + c) mod m."""
    if not 0 <= x < params.m:
        raise ParameterError(f"state {x} outside [0, {params.m})")
    return (params.a * x + params.c) % params.m


def jump_coefficients(params: LcgParams, k: int) -> tuple[int, int]:
    """(A, B) with k-step jump x -> (A*x + B) mod m.

    A = a**k mod m and B = c*(a**k - 1)/(a - 1) mod m; the division is a
    modular inverse and needs gcd(a - 1, m) = 1, except that c = 0 or k = 0
    makes B = 0 with no division at all.
    """
    if k < 0:
        raise ParameterError("jump distance must be >= 0")
    a, c, m = params.a, params.c, params.m
    big_a = pow(a, k, m)
    if c == 0 or k == 0:
        return big_a, 0
    if a == 1:
        return 1, (c * k) % m
    if math.gcd(a - 1, m) != 1:
        raise ParameterError(
            f"jump needs gcd(a - 1, m) = 1 when c != 0, got a={a}, m={m}")
    big_b = (c * (big_a - 1)) % m * mod_inverse(a - 1, m) % m
    return big_a, big_b


def lcg_jump(params: LcgParams, x: int, k: int) -> int:
    """Jump ahead k steps in closed form; equals k-fold :func:`lcg_next`."""
    if not 0 <= x < params.m:
        raise ParameterError(f"state {x} outside [0, {params.m})")
    big_a, big_b = jump_coefficients(params, k)
    return (big_a * x + big_b) % params.m


def period(params: LcgParams, scan_limit: int = 1 << 24) -> int | None:
    """Least p > 0 with the orbit returning to the seed, or None if it never does.

    A full m-step scan is conclusive: after m steps the state is inside its
    eventual cycle, so a seed that has not reappeared lies on a tail.
    """
    if params.m > scan_limit:
        raise ParameterError(f"modulus {params.m} exceeds scan limit {scan_limit}")
    x = params.seed
    for step in range(1, params.m + 1):
        x = (params.a * x + params.c) % params.m
        if x == params.seed:
            return step
    return None


# ---------------------------------------------------------------------------
# Output permutations


@dataclass(frozen=True)
class RandomRotation:
    """Rotate the r middle bits clockwise by the value of the t top bits.

    ``middle_bits`` must be a power of two and ``top_bits`` its log2. Only
    the middle bits form the delivered random number; the bottom bits stay
    in the register untouched.
    """

    top_bits: int
    middle_bits: int

    def __post_init__(self) -> None:
        r, t = self.middle_bits, self.top_bits
        if r < 2 or r & (r - 1):
            raise ParameterError(f"middle width must be a power of two >= 2, got {r}")
        if t != r.bit_length() - 1:
            raise ParameterError(f"top width must be log2(middle) = {r.bit_length() - 1}")


@dataclass(frozen=True)
class Xorshift:
    """XOR the top s bits into the bottom s bits: y_i = x_i xor x_(n-s+i)."""

    shift: int

    def __post_init__(self) -> None:
        if self.shift < 1:
            raise ParameterError("shift must be >= 1")


Permutation = Union[None, RandomRotation, Xorshift]


def _check_perm_fits(perm: Permutation, n: int) -> None:
    if isinstance(perm, RandomRotation):
        if perm.top_bits + perm.middle_bits > n:
            raise ParameterError(
                f"rotation needs {perm.top_bits + perm.middle_bits} bits, register has {n}")
    elif isinstance(perm, Xorshift):
        if perm.shift > n - 1:
            raise ParameterError(f"xorshift shift {perm.shift} too large for {n} bits")


def perm_apply(perm: Permutation, x: int, n_bits: int) -> int:
    """Apply the full-width output permutation to an n-bit value (a bijection)."""
    if not 0 <= x < (1 << n_bits):
        raise ParameterError(f"value {x} outside {n_bits} bits")
    _check_perm_fits(perm, n_bits)
    if perm is None:
        return x
    if isinstance(perm, RandomRotation):
        t, r = perm.top_bits, perm.middle_bits
        k = (x >> (n_bits - t)) & ((1 << t) - 1)
        mid_shift = n_bits - t - r
        y = (x >> mid_shift) & ((1 << r) - 1)
        rotated = ((y >> k) | (y << (r - k))) & ((1 << r) - 1) if k else y
        return (x & ~(((1 << r) - 1) << mid_shift)) | (rotated << mid_shift)
    s = perm.shift
    return x ^ (x >> (n_bits - s))


def default_window(perm: Permutation, n_bits: int) -> tuple[int, ...]:
    """Register-local output window: middle bits for rotation, all bits otherwise."""
    _check_perm_fits(perm, n_bits)
    if isinstance(perm, RandomRotation):
        lo = n_bits - perm.top_bits - perm.middle_bits
        return tuple(range(lo, lo + perm.middle_bits))
    return tuple(range(n_bits))


@dataclass(frozen=True)
class PcgSpec:
    """A pseudo-random number generator definition shared by the classical
    reference and the circuit builders.

    ``window`` lists the register-local bit positions (LSB first) whose
    post-permutation values form the delivered random number; it defaults to
    :func:`default_window` for the permutation.
    """

    lcg: LcgParams
    perm: Permutation = None
    window: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        n = self.lcg.n_bits
        _check_perm_fits(self.perm, n)
        if self.window is None:
            object.__setattr__(self, "window", default_window(self.perm, n))
        else:
            w = tuple(int(b) for b in self.window)
            if not w or len(set(w)) != len(w) or any(not 0 <= b < n for b in w):
                raise ParameterError(f"window {w} invalid for {n}-bit register")
            object.__setattr__(self, "window", w)

    @property
    def n_prn(self) -> int:
        return self.lcg.n_bits

    @property
    def output_window(self) -> tuple[int, ...]:
        return self.window  # type: ignore[return-value]

    @property
    def m_out(self) -> int:
        """One more than the largest deliverable output value."""
        return 1 << len(self.output_window)

    def to_config(self) -> dict:
        """Flat key-value form used by the CLI and config files."""
        cfg: dict = {"a": self.lcg.a, "c": self.lcg.c, "m": self.lcg.m,
                     "seed": self.lcg.seed, "perm": "none"}
        if isinstance(self.perm, RandomRotation):
            cfg["perm"] = "rotation"
            cfg["top_bits"] = self.perm.top_bits
            cfg["middle_bits"] = self.perm.middle_bits
        elif isinstance(self.perm, Xorshift):
            cfg["perm"] = "xorshift"
            cfg["shift"] = self.perm.shift
        cfg["window"] = list(self.output_window)
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "PcgSpec":
        lcg = LcgParams(int(cfg["a"]), int(cfg.get("c", 0)), int(cfg["m"]),
                        int(cfg.get("seed", 1)))
        kind = str(cfg.get("perm", "none")).lower()
        perm: Permutation
        if kind in ("none", ""):
            perm = None
        elif kind == "rotation":
            perm = RandomRotation(int(cfg["top_bits"]), int(cfg["middle_bits"]))
        elif kind == "xorshift":
            perm = Xorshift(int(cfg["shift"]))
        else:
            raise ParameterError(f"unknown permutation kind {kind!r}")
        window = cfg.get("window")
        return cls(lcg, perm, None if window is None else tuple(int(b) for b in window))


def pcg_output(spec: PcgSpec, state: int) -> int:
    """Deliverable random number for a generator state: permute, then window."""
    if not 0 <= state < spec.lcg.m:
        raise ParameterError(f"state {state} outside [0, {spec.lcg.m})")
    y = perm_apply(spec.perm, state, spec.n_prn)
    return sum(((y >> b) & 1) << j for j, b in enumerate(spec.output_window))


def pcg_sequence(spec: PcgSpec, count: int) -> list[int]:
    """The first ``count`` delivered outputs.

    Indexing convention: the seed itself is never delivered; element 1 of
    the sequence is the output for the first iterate of the seed, matching
    the jump circuit at sample index 0.
    """
    outputs = []
    x = spec.lcg.seed
    for _ in range(count):
        x = lcg_next(spec.lcg, x)
        outputs.append(pcg_output(spec, x))
    return outputs


# ---------------------------------------------------------------------------
# Circuits


def build_perm(perm: Permutation, reg) -> Circuit:
    """Circuit whose basis action equals :func:`perm_apply` on the register.

    Rotation: for top bit i (1 = most significant), the middle block is
    rotated by 2**(t-i) under its control, each rotation a layer of Fredkin
    chains over 2**(t-i) interleaved qubit groups. Xorshift: one CNOT per
    shifted bit, applied bottom target first so qubits that serve as both
    control and target (shift > n/2) are consumed as controls before being
    overwritten.
    """
    reg = RegisterSpec.of(reg)
    n = reg.width
    _check_perm_fits(perm, n)

    def pos(p: int) -> int:
        # paper-style position: 1 = most significant bit
        return reg.qubits[n - p]

    gates: list[Gate] = []
    if isinstance(perm, RandomRotation):
        t, r = perm.top_bits, perm.middle_bits
        for i in range(1, t + 1):
            ctrl = pos(i)
            block = 1 << (t - i)
            for g in range(1, block + 1):
                for b in range(r // block - 1, 0, -1):
                    qa = pos(t + (b - 1) * block + g)
                    qb = pos(t + b * block + g)
                    gates.append(Gate.swap(qa, qb, controls=(ctrl,)))
        label = f"rotate(r={r})"
    elif isinstance(perm, Xorshift):
        s = perm.shift
        for i in range(s, 0, -1):
            gates.append(Gate.x(reg.qubits[s - i], controls=(reg.qubits[n - i],)))
        label = f"xorshift(s={s})"
    else:
        label = "id"
    return Circuit(width=max(reg.qubits) + 1, gates=tuple(gates), label=label)


def _scratch_for(spec: PcgSpec, reg: RegisterSpec,
                 scratch: Sequence[int] | None) -> tuple[int, ...]:
    need = spec.n_prn + 1
    if scratch is None:
        base = max(reg.qubits) + 1
        return tuple(range(base, base + need))
    scratch = tuple(scratch)
    if len(scratch) < need:
        raise ParameterError(f"need {need} scratch qubits, got {len(scratch)}")
    if set(scratch) & set(reg.qubits):
        raise ParameterError("scratch collides with the state register")
    return scratch


def build_step_circuit(spec: PcgSpec, reg, scratch: Sequence[int] | None = None) -> Circuit:
    """Advance the generator output register by one draw: |x_n> -> |x_n+1>.

    Composition: undo the output permutation, multiply by a and add c
    modulo m in place, redo the permutation. Requires gcd(a, m) = 1 for the
    in-place multiply.
    """
    reg = RegisterSpec.of(reg)
    if reg.width != spec.n_prn:
        raise ParameterError(f"register width {reg.width} != generator width {spec.n_prn}")
    scratch = _scratch_for(spec, reg, scratch)
    a, c, m = spec.lcg.a, spec.lcg.c, spec.lcg.m
    g = build_perm(spec.perm, reg)
    parts = [inverse(g),
             build_modmul_const_inplace(reg, a, m, scratch=scratch)]
    if c % m:
        parts.append(build_modadd_const(reg, c % m, m, flag=scratch[spec.n_prn]))
    parts.append(g)
    return concat_circuits(f"prng_step(a={a},c={c},m={m})", *parts, ancillas=scratch)


def build_jump_circuit(spec: PcgSpec, n_ran: int, i_reg, prn_reg,
                       scratch: Sequence[int] | None = None) -> Circuit:
    """Seed the generator register at subsequence i: |i>|0> -> |i>|x_(i*n_ran+1)>.

    Loads the first delivered state, then applies one controlled modular
    affine map per bit j of the sample index (jump by n_ran * 2**j steps,
    with classically precomputed coefficients), and finally the output
    permutation.
    """
    if n_ran < 1:
        raise ParameterError("subsequence length must be >= 1")
    i_reg = tuple(int(q) for q in i_reg)
    prn = RegisterSpec.of(prn_reg)
    if prn.width != spec.n_prn:
        raise ParameterError(f"register width {prn.width} != generator width {spec.n_prn}")
    if set(i_reg) & set(prn.qubits):
        raise ParameterError("sample-index and state registers overlap")
    scratch = _scratch_for(spec, prn, scratch)
    m = spec.lcg.m
    first = lcg_next(spec.lcg, spec.lcg.seed)
    gates: list[Gate] = [Gate.x(prn.qubits[b]) for b in range(prn.width)
                         if (first >> b) & 1]
    for j, ctrl in enumerate(i_reg):
        big_a, big_b = jump_coefficients(spec.lcg, n_ran << j)
        if big_a != 1:
            mul = build_modmul_const_inplace(prn, big_a, m, scratch=scratch)
            gates.extend(controlled(mul, (ctrl,)).gates)
        if big_b:
            add = build_modadd_const(prn, big_b, m, flag=scratch[spec.n_prn])
            gates.extend(controlled(add, (ctrl,)).gates)
    gates.extend(build_perm(spec.perm, prn).gates)
    width = max([q + 1 for q in i_reg + prn.qubits + scratch])
    return Circuit(width=width, gates=tuple(gates),
                   label=f"prng_jump(n_ran={n_ran})", ancillas=scratch)


# ---------------------------------------------------------------------------
# Verification against the classical oracle


def verify_pcg_circuits(spec: PcgSpec, n_ran: int, samp_bits: int,
                        step_circuit: Circuit | None = None,
                        jump_circuit: Circuit | None = None,
                        max_mismatches: int = 8) -> dict:
    """Exhaustively compare the step and jump circuits with the classical oracle.

    The step circuit is checked on every generator state x < m; the jump
    circuit on every sample index i < 2**samp_bits; and subsequences are
    checked to tile the master sequence (stepping n_ran times from the
    start of subsequence i lands on the start of subsequence i+1). Returns
    a report dict whose ``"ok"`` summarizes everything; mismatches include
    the first offending basis states.
    """
    m = spec.lcg.m
    n = spec.n_prn

    prn = tuple(range(n))
    step = step_circuit if step_circuit is not None else build_step_circuit(spec, prn)
    step_perm, step_sign = basis_action(step)
    step_report = {"checked": 0, "mismatches": [], "ok": True}
    for x in range(m):
        inp = perm_apply(spec.perm, x, n)
        expected = perm_apply(spec.perm, lcg_next(spec.lcg, x), n)
        got = int(step_perm[inp])
        step_report["checked"] += 1
        if got != expected or step_sign[inp] != 1.0:
            step_report["ok"] = False
            if len(step_report["mismatches"]) < max_mismatches:
                step_report["mismatches"].append(
                    {"state": x, "input_basis": inp, "expected": expected, "got": got})

    i_reg = tuple(range(samp_bits))
    prn_shifted = tuple(range(samp_bits, samp_bits + n))
    jump = jump_circuit if jump_circuit is not None else build_jump_circuit(
        spec, n_ran, i_reg, prn_shifted)
    jump_perm, jump_sign = basis_action(jump)
    jump_report = {"checked": 0, "mismatches": [], "ok": True}
    starts = []
    for i in range(1 << samp_bits):
        state = lcg_jump(spec.lcg, spec.lcg.seed, i * n_ran + 1)
        starts.append(state)
        expected = i | (perm_apply(spec.perm, state, n) << samp_bits)
        got = int(jump_perm[i])
        jump_report["checked"] += 1
        if got != expected or jump_sign[i] != 1.0:
            jump_report["ok"] = False
            if len(jump_report["mismatches"]) < max_mismatches:
                jump_report["mismatches"].append(
                    {"sample_index": i, "expected": expected, "got": got})

    tiling_ok = all(
        lcg_jump(spec.lcg, starts[i], n_ran) == starts[i + 1]
        for i in range(len(starts) - 1))

    return {"step": step_report, "jump": jump_report,
            "subsequence_tiling_ok": bool(tiling_ok),
            "ok": step_report["ok"] and jump_report["ok"] and bool(tiling_ok)}
