"""Grover-operator construction and maximum-likelihood amplitude estimation.

Given a state-preparation circuit A and an objective qubit whose |1>
probability is ``a = sin^2(theta_a)``, the Grover operator is assembled as

    Q = A * S0 * A^-1 * Schi

(applied right to left), where S0 negates the all-zero state over the full
register and Schi negates states with the objective at |1>. The global -1
of the textbook operator is dropped; it is unobservable. In ``Q^m A |0>``
the objective's |1> probability is ``sin^2((2m+1) theta_a)``, which MLQAE
exploits: measure at a schedule of Grover powers ``m_k`` with ``N_k`` shots
each, observe ``h_k`` hits, and maximize

    sum_k [ h_k * ln sin^2((2m_k+1) t) + (N_k - h_k) * ln cos^2((2m_k+1) t) ]

over t in (0, pi/2). The likelihood is highly multimodal, so the maximizer
uses a dense grid followed by local grid refinement rather than a
derivative method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .statevec import (DEFAULT_MAX_QUBITS, Circuit, Gate, apply_circuit, inverse,
                       new_state, probability_one)

_THETA_LO = 1e-8              # grid clamp away from the endpoints of (0, pi/2)
_GRID_POINTS = 20_000
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class EstimationProblem:
    """A state-preparation circuit plus the objective qubit to estimate."""

    a_circuit: Circuit
    objective: int

    def __post_init__(self) -> None:
        if not 0 <= self.objective < self.a_circuit.width:
            raise ParameterError(
                f"objective {self.objective} outside circuit width {self.a_circuit.width}")


def build_zero_reflection(width: int) -> Circuit:
    """Negate the amplitude of |0...0> over ``width`` qubits."""
    return Circuit(width, (Gate.flip_zero(tuple(range(width))),), label="reflect0")


def build_objective_flip(width: int, objective: int) -> Circuit:
    """Negate every amplitude whose objective qubit is |1>."""
    if not 0 <= objective < width:
        raise ParameterError("objective outside width")
    return Circuit(width, (Gate.flip_one(objective),), label="flip_objective")


def build_grover_operator(problem: EstimationProblem) -> Circuit:
    """The amplification operator (global phase dropped)."""
    a = problem.a_circuit
    gates = (build_objective_flip(a.width, problem.objective).gates
             + inverse(a).gates
             + build_zero_reflection(a.width).gates
             + a.gates)
    return Circuit(a.width, gates, label=f"grover({a.label})", ancillas=a.ancillas)


def exact_amplitude(problem: EstimationProblem,
                    max_qubits: int = DEFAULT_MAX_QUBITS) -> float:
    """Exact objective |1> probability of A|0>, by statevector simulation."""
    state = new_state(problem.a_circuit.width, max_qubits)
    apply_circuit(state, problem.a_circuit)
    return probability_one(state, problem.objective)


@dataclass(frozen=True)
class MlqaeSchedule:
    """Grover powers m_k, shot counts N_k and the base seed of the run."""

    powers: tuple[int, ...]
    shots: tuple[int, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "powers", tuple(int(p) for p in self.powers))
        object.__setattr__(self, "shots", tuple(int(s) for s in self.shots))
        if not self.powers or len(self.powers) != len(self.shots):
            raise ParameterError("powers and shots must be equal-length and non-empty")
        if any(p < 0 for p in self.powers) or any(s < 1 for s in self.shots):
            raise ParameterError("need powers >= 0 and shots >= 1")

    @classmethod
    def exponential(cls, rounds: int = 9, shots: int = 100, seed: int = 0) -> "MlqaeSchedule":
        """m_k = 2**k for k = 0..rounds-1, a fixed shot count per round."""
        powers = tuple(1 << k for k in range(rounds))
        return cls(powers, (shots,) * rounds, seed)

    def total_oracle_calls(self) -> int:
        """Applications of A, counting Q as two and the bare preparation as one."""
        return sum(n * (2 * m + 1) for m, n in zip(self.powers, self.shots))


@dataclass(frozen=True, eq=False)
class MlqaeResult:
    """Point estimate theta_hat (radians), a_hat = sin^2, and the raw counts."""

    theta_hat: float
    a_hat: float
    hits: tuple[int, ...]
    powers: tuple[int, ...]
    shots: tuple[int, ...]
    loglik_thetas: np.ndarray | None = None
    loglik_values: np.ndarray | None = None

    def to_record(self) -> dict:
        return {"theta_hat": self.theta_hat, "a_hat": self.a_hat,
                "hits": list(self.hits), "powers": list(self.powers),
                "shots": list(self.shots)}


def log_likelihood(thetas: np.ndarray, powers: Sequence[int], shots: Sequence[int],
                   hits: Sequence[int]) -> np.ndarray:
    """Schedule log-likelihood on an array of candidate angles."""
    total = np.zeros_like(thetas, dtype=np.float64)
    for m, n, h in zip(powers, shots, hits):
        s2 = np.sin((2 * m + 1) * thetas) ** 2
        total += h * np.log(np.clip(s2, _LOG_FLOOR, None))
        total += (n - h) * np.log(np.clip(1.0 - s2, _LOG_FLOOR, None))
    return total


def _maximize_likelihood(powers, shots, hits) -> float:
    lo, hi = _THETA_LO, math.pi / 2 - _THETA_LO
    thetas = np.linspace(lo, hi, _GRID_POINTS)
    values = log_likelihood(thetas, powers, shots, hits)
    best = int(np.argmax(values))
    for _ in range(3):  # local refinement, final resolution well under 1e-8
        lo = thetas[max(best - 2, 0)]
        hi = thetas[min(best + 2, thetas.size - 1)]
        thetas = np.linspace(lo, hi, 401)
        values = log_likelihood(thetas, powers, shots, hits)
        best = int(np.argmax(values))
    return float(thetas[best])


def _hits_full_circuit(problem: EstimationProblem, schedule: MlqaeSchedule,
                       max_qubits: int) -> list[int]:
    """Measure the objective of Q^m A|0> at each scheduled power.

    Powers are visited in ascending order on one evolving state, so the
    total cost is max(m) Grover applications, not sum(m).
    """
    state = new_state(problem.a_circuit.width, max_qubits)
    apply_circuit(state, problem.a_circuit)
    grover = build_grover_operator(problem)
    prob_at_power: dict[int, float] = {}
    current = 0
    for m in sorted(set(schedule.powers)):
        for _ in range(m - current):
            apply_circuit(state, grover)
        current = m
        prob_at_power[m] = probability_one(state, problem.objective)
    hits = []
    for k, (m, n) in enumerate(zip(schedule.powers, schedule.shots)):
        counts = _binomial_draw(prob_at_power[m], n, (schedule.seed, k))
        hits.append(counts)
    return hits


def _binomial_draw(p: float, n: int, stream_key) -> int:
    rng = np.random.default_rng(stream_key)
    return int(rng.binomial(n, min(max(p, 0.0), 1.0)))


def _hits_analytic(problem: EstimationProblem, schedule: MlqaeSchedule,
                   max_qubits: int) -> list[int]:
    theta = math.asin(math.sqrt(exact_amplitude(problem, max_qubits)))
    hits = []
    for k, (m, n) in enumerate(zip(schedule.powers, schedule.shots)):
        p = math.sin((2 * m + 1) * theta) ** 2
        hits.append(_binomial_draw(p, n, (schedule.seed, k)))
    return hits


def run_mlqae(problem: EstimationProblem, schedule: MlqaeSchedule,
              mode: str = "full", record_loglik: bool = False,
              max_qubits: int = DEFAULT_MAX_QUBITS) -> MlqaeResult:
    """Estimate the objective amplitude over a schedule of Grover powers.

    ``mode="full"`` simulates the amplified circuits and samples shots from
    the exact measurement distribution; ``mode="binomial"`` skips the
    amplified simulations and draws the same statistics from the law
    sin^2((2m+1) theta_a), with theta_a taken from one exact simulation of
    A. Both are deterministic for a given schedule seed, with per-power
    sample streams derived from (seed, k).
    """
    if mode == "full":
        hits = _hits_full_circuit(problem, schedule, max_qubits)
    elif mode == "binomial":
        hits = _hits_analytic(problem, schedule, max_qubits)
    else:
        raise ParameterError(f"mode must be 'full' or 'binomial', got {mode!r}")
    theta_hat = _maximize_likelihood(schedule.powers, schedule.shots, hits)
    curve_t = curve_v = None
    if record_loglik:
        curve_t = np.linspace(_THETA_LO, math.pi / 2 - _THETA_LO, 2001)
        curve_v = log_likelihood(curve_t, schedule.powers, schedule.shots, hits)
    return MlqaeResult(theta_hat=theta_hat, a_hat=math.sin(theta_hat) ** 2,
                       hits=tuple(hits), powers=schedule.powers,
                       shots=schedule.shots,
                       loglik_thetas=curve_t, loglik_values=curve_v)


def noiseless_hits(theta_a: float, schedule: MlqaeSchedule) -> tuple[int, ...]:
    """Rounded expected counts at a known angle; handy for consistency tests."""
    return tuple(int(round(n * math.sin((2 * m + 1) * theta_a) ** 2))
                 for m, n in zip(schedule.powers, schedule.shots))


def mlqae_from_hits(schedule: MlqaeSchedule, hits: Sequence[int]) -> MlqaeResult:
    """Maximize the likelihood for externally supplied hit counts."""
    hits = tuple(int(h) for h in hits)
    if len(hits) != len(schedule.powers):
        raise ParameterError("one hit count per scheduled power required")
    if any(not 0 <= h <= n for h, n in zip(hits, schedule.shots)):
        raise ParameterError("hit counts must lie in [0, shots]")
    theta_hat = _maximize_likelihood(schedule.powers, schedule.shots, hits)
    return MlqaeResult(theta_hat=theta_hat, a_hat=math.sin(theta_hat) ** 2,
                       hits=hits, powers=schedule.powers, shots=schedule.shots)
