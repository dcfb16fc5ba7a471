"""Assembly of sequential-integrand sampling circuits.

The shared pattern behind both applications in this package: put the
sample-index register in uniform superposition, jump the in-circuit
generator to the start of each sample's subsequence, then alternate
"consume one random number" integrand steps with generator advances. After
the last step the circuit holds an equal-weight superposition over samples,
each branch carrying that sample's integrand value (in a register, or
accumulated in an objective qubit's rotation angle).

The frame fixes the qubit layout: sample index first, then the generator
state register, then shared scratch. Scratch is sized for the in-place
modular multiply and may be enlarged for integrand-owned temporaries, which
is safe because every user restores it to |0>. Integrand registers start at
``next_free``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import ParameterError
from ..qprng import PcgSpec, build_jump_circuit, build_step_circuit
from ..statevec import Circuit, Gate, concat_circuits


@dataclass(frozen=True)
class SequentialIntegrand:
    """An integrand computed in ``n_steps`` chained steps.

    ``build_step(i)`` returns the circuit for step i, which may read the
    generator's output window and the integrand's own carrier register, and
    nothing else of the generator state.
    """

    n_steps: int
    build_step: Callable[[int], Circuit]

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ParameterError("integrand needs at least one step")


@dataclass(frozen=True)
class SamplingFrame:
    """Qubit layout for one sampling circuit."""

    spec: PcgSpec
    samp_bits: int
    samp: tuple[int, ...]
    prn: tuple[int, ...]
    scratch: tuple[int, ...]
    next_free: int

    @property
    def window(self) -> tuple[int, ...]:
        """Generator output window as absolute qubit indices."""
        return tuple(self.prn[b] for b in self.spec.output_window)

    @property
    def n_samples(self) -> int:
        return 1 << self.samp_bits


def plan_frame(spec: PcgSpec, samp_bits: int, min_scratch: int = 0) -> SamplingFrame:
    """Lay out sample, generator and scratch registers from qubit 0 upward."""
    if samp_bits < 0:
        raise ParameterError("sample-index width must be >= 0")
    n = spec.n_prn
    scratch_size = max(n + 1, min_scratch)
    samp = tuple(range(samp_bits))
    prn = tuple(range(samp_bits, samp_bits + n))
    scratch = tuple(range(samp_bits + n, samp_bits + n + scratch_size))
    return SamplingFrame(spec=spec, samp_bits=samp_bits, samp=samp, prn=prn,
                         scratch=scratch, next_free=samp_bits + n + scratch_size)


def assemble_sampling_circuit(frame: SamplingFrame, integrand: SequentialIntegrand,
                              label: str = "sampling") -> Circuit:
    """Uniform sample superposition, jump, then steps with advances between."""
    parts: list[Circuit] = []
    if frame.samp:
        parts.append(Circuit(width=frame.samp[-1] + 1,
                             gates=tuple(Gate.h(q) for q in frame.samp),
                             label="uniform_samples"))
    parts.append(build_jump_circuit(frame.spec, integrand.n_steps, frame.samp,
                                    frame.prn, scratch=frame.scratch))
    advance = None
    for i in range(integrand.n_steps):
        parts.append(integrand.build_step(i))
        if i + 1 < integrand.n_steps:
            if advance is None:
                advance = build_step_circuit(frame.spec, frame.prn,
                                             scratch=frame.scratch)
            parts.append(advance)
    return concat_circuits(label, *parts, ancillas=frame.scratch)
