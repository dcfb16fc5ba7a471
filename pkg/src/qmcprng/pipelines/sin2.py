"""Monte Carlo integration of a multi-variable sin^2 integrand.

The target is the normalized box integral

    I(theta, n) = theta**-n * int_0^theta ... int_0^theta sin^2(x_1 + ... + x_n) dx

evaluated three ways: exactly (closed form, cross-checked by quadrature), as
a full midpoint-grid sum, and as a pseudo-random sample average over grid
points drawn from the in-circuit generator. The sampling circuit never
stores the integrand in a register: each variable's contribution is a
rotation of one objective qubit by ``(x + 1/2) * theta / 2**r`` (r output
bits), so after all variables the objective's |1> probability equals the
sample average exactly, and amplitude estimation reads it out.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, ParameterError
from ..qae import EstimationProblem, MlqaeResult, MlqaeSchedule, run_mlqae
from ..qprng import LcgParams, PcgSpec, pcg_sequence, period
from ..statevec import DEFAULT_MAX_QUBITS, Circuit, Gate
from .framework import SequentialIntegrand, assemble_sampling_circuit, plan_frame

_PERIOD_SCAN_CAP = 1 << 16


@dataclass(frozen=True)
class Sin2Config:
    """Problem plus generator configuration for the sin^2 estimate.

    Warns (without failing) when the run would consume more generator
    outputs than the generator's period provides.
    """

    theta: float
    n_var: int
    samp_bits: int
    prng: PcgSpec

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ParameterError("theta must be positive")
        if self.n_var < 1 or self.samp_bits < 0:
            raise ParameterError("need n_var >= 1 and samp_bits >= 0")
        if self.prng.lcg.m <= _PERIOD_SCAN_CAP:
            p = period(self.prng.lcg)
            needed = self.n_samples * self.n_var
            if p is not None and needed > p:
                warnings.warn(
                    f"run consumes {needed} generator outputs but the period is {p}; "
                    "subsequences will overlap", stacklevel=2)

    @property
    def n_samples(self) -> int:
        return 1 << self.samp_bits

    @property
    def out_bits(self) -> int:
        return len(self.prng.output_window)

    @classmethod
    def demo(cls) -> "Sin2Config":
        """The standard small-scale configuration: theta = pi/6, two
        variables, eight samples from LCG(11, 0, 31) seeded at 1."""
        return cls(theta=math.pi / 6, n_var=2, samp_bits=3,
                   prng=PcgSpec(LcgParams(a=11, c=0, m=31, seed=1)))


def sin2_exact(theta: float, n_var: int = 1, quadrature_check: bool = True) -> float:
    """Exact value of I(theta, n_var).

    Closed form: 1/2 - sin(theta)**n * cos(n*theta) / (2 * theta**n), from
    factorizing the box integral of cos(2*sum x_i). For n_var <= 2 the value
    is cross-checked against adaptive quadrature to 1e-9 relative.
    """
    if not theta > 0:
        raise ParameterError("theta must be positive")
    if n_var < 1:
        raise ParameterError("n_var must be >= 1")
    value = 0.5 - math.sin(theta) ** n_var * math.cos(n_var * theta) / (2 * theta ** n_var)
    if quadrature_check and n_var <= 2:
        from scipy import integrate
        if n_var == 1:
            ref, _ = integrate.quad(lambda x: math.sin(x) ** 2, 0, theta,
                                    epsabs=1e-13, epsrel=1e-13)
            ref /= theta
        else:
            ref, _ = integrate.dblquad(lambda y, x: math.sin(x + y) ** 2,
                                       0, theta, 0, theta,
                                       epsabs=1e-12, epsrel=1e-12)
            ref /= theta ** 2
        if abs(value - ref) > 1e-9 * max(abs(value), 1e-12):
            raise ContractError(
                f"closed form {value} disagrees with quadrature {ref}")
    return value


def sin2_grid_sum(theta: float, n_var: int, n_grid: int) -> float:
    """Midpoint-grid average of the integrand over n_grid points per axis.

    Uses the identity mean sin^2(sum) = 1/2 - Re(mean exp(2i x))**n_var / 2,
    which is exact for the product grid, so the cost is linear in n_grid.
    """
    if n_grid < 1:
        raise ParameterError("need at least one grid point per axis")
    angles = (np.arange(n_grid) + 0.5) * (theta / n_grid)
    phase = np.exp(2j * angles).mean() ** n_var
    return float(0.5 - 0.5 * phase.real)


def sample_angles(config: Sin2Config) -> np.ndarray:
    """Accumulated rotation angle of each sample, from the classical generator."""
    draws = pcg_sequence(config.prng, config.n_samples * config.n_var)
    unit = config.theta / (1 << config.out_bits)
    xs = np.asarray(draws, dtype=np.float64).reshape(config.n_samples, config.n_var)
    return ((xs + 0.5) * unit).sum(axis=1)


def sin2_sample_average(config: Sin2Config) -> float:
    """The pseudo-random sample average the quantum circuit encodes."""
    return float(np.mean(np.sin(sample_angles(config)) ** 2))


def build_angle_step(theta: float, window: tuple[int, ...], objective: int) -> Circuit:
    """Rotate the objective by (x + 1/2) * theta / 2**r, x read from the window.

    One unconditional rotation for the half-grid offset plus one controlled
    rotation per window bit, weighted by the bit's value.
    """
    r = len(window)
    if objective in window:
        raise ParameterError("objective qubit collides with the output window")
    unit = theta / (1 << r)
    gates = [Gate.rot(objective, 0.5 * unit)]
    for b, qubit in enumerate(window):
        gates.append(Gate.rot(objective, (1 << b) * unit, controls=(qubit,)))
    return Circuit(width=max(window + (objective,)) + 1, gates=tuple(gates),
                   label="angle_step")


def build_sin2_circuit(config: Sin2Config,
                       max_qubits: int = DEFAULT_MAX_QUBITS) -> EstimationProblem:
    """The full sampling circuit; P(objective = 1) equals the sample average."""
    frame = plan_frame(config.prng, config.samp_bits)
    objective = frame.next_free
    if objective + 1 > max_qubits:
        raise ParameterError(
            f"circuit needs {objective + 1} qubits, above the cap {max_qubits}")
    step = build_angle_step(config.theta, frame.window, objective)
    integrand = SequentialIntegrand(n_steps=config.n_var, build_step=lambda i: step)
    circuit = assemble_sampling_circuit(frame, integrand, label="sin2_sampling")
    if circuit.width <= objective:
        circuit = Circuit(objective + 1, circuit.gates, circuit.label, circuit.ancillas)
    return EstimationProblem(a_circuit=circuit, objective=objective)


def estimate_sin2(config: Sin2Config, schedule: MlqaeSchedule, mode: str = "full",
                  record_loglik: bool = False,
                  max_qubits: int = DEFAULT_MAX_QUBITS) -> MlqaeResult:
    """Amplitude-estimate the sample average from the sampling circuit."""
    problem = build_sin2_circuit(config, max_qubits)
    return run_mlqae(problem, schedule, mode=mode, record_loglik=record_loglik,
                     max_qubits=max_qubits)
