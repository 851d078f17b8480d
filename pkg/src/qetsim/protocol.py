"""Full protocol round: projective measurement, diffusion, conditioned
extraction, and numerical maximisation of the extracted energy.

Measurement is handled by exhaustive branch enumeration (both outcomes with
their exact probabilities), never by sampling, so every quantity downstream
is deterministic.  The optimiser is a deterministic coarse grid plus
derivative-free refinement with a fixed start list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import kernel
from .errors import NumericError, ValidationError
from .kernel import ID2, ID4, SIGMA_X, expectation, kron, su2
from .model import GroundState, HamiltonianSet

__all__ = [
    "OutcomeBranch",
    "BobControl",
    "ExtractionResult",
    "OptimizerConfig",
    "measure_alice",
    "sample_outcome",
    "infused_energy",
    "evolve_branches",
    "apply_bob",
    "extracted_energy",
    "optimize_bob",
]

Y_AXIS = (0.0, 1.0, 0.0)


@dataclass(frozen=True)
class OutcomeBranch:
    """One measurement outcome with its probability and post-measurement state."""

    mu: int
    probability: float
    state: np.ndarray  # (4,) complex, unit norm


@dataclass(frozen=True)
class BobControl:
    """Parametrisation of the outcome-conditioned local unitary on site B.

    mode "family": U_B(mu) = cos(theta)*I + i*(-1)^mu*sin(theta)*sigma_y.
    mode "full": independent (theta, axis) SU(2) parameters per outcome.
    """

    mode: str
    theta: float = 0.0
    full_params: tuple[tuple[float, tuple[float, float, float]], ...] | None = None

    @classmethod
    def family(cls, theta: float) -> "BobControl":
        if not math.isfinite(theta):
            raise ValidationError("family angle must be finite")
        return cls(mode="family", theta=theta)

    @classmethod
    def full(cls, params_mu0, params_mu1) -> "BobControl":
        return cls(mode="full", full_params=(tuple(params_mu0), tuple(params_mu1)))

    def unitary(self, mu: int) -> np.ndarray:
        if mu not in (0, 1):
            raise ValidationError("outcome label must be 0 or 1")
        if self.mode == "family":
            sign = 1.0 if mu == 0 else -1.0
            return su2(sign * self.theta, Y_AXIS)
        if self.mode == "full":
            theta, axis = self.full_params[mu]
            return su2(theta, axis)
        raise ValidationError(f"unknown control mode {self.mode!r}")


@dataclass(frozen=True)
class ExtractionResult:
    """Extracted energy, the control achieving it, and per-branch contributions."""

    extracted_energy: float
    control: BobControl
    per_branch_energy: tuple[float, float]


@dataclass(frozen=True)
class OptimizerConfig:
    """Deterministic optimiser settings (coarse grid + refinement)."""

    coarse_grid_points: int = 64
    refine_tolerance: float = 1e-10
    max_iterations: int = 600

    def __post_init__(self):
        if self.coarse_grid_points < 32:
            raise ValidationError("coarse grid needs at least 32 points")
        if not (self.refine_tolerance > 0):
            raise ValidationError("refine tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("iteration budget must be positive")


def _projector(mu: int) -> np.ndarray:
    """P_A(mu) = (1 + (-1)^mu sigma_x^A) / 2."""
    sign = 1.0 if mu == 0 else -1.0
    return (ID4 + sign * kron(SIGMA_X, ID2)) / 2.0


def measure_alice(g: GroundState) -> tuple[OutcomeBranch, OutcomeBranch]:
    """Project the ground state onto both sigma_x^A outcomes.

    Branch mu has probability <g|P_A(mu)|g> and normalised state
    P_A(mu)|g>/sqrt(p).  Probabilities sum to 1 within 1e-12.
    """
    psi = kernel.require_finite(g.state, "ground state")
    branches = []
    for mu in (0, 1):
        proj = _projector(mu)
        raw = proj @ psi
        prob = expectation(psi, proj)
        if prob < 1e-12:
            raise NumericError(f"degenerate measurement branch mu={mu}")
        state = raw / math.sqrt(prob)
        state.flags.writeable = False
        branches.append(OutcomeBranch(mu=mu, probability=prob, state=state))
    total = branches[0].probability + branches[1].probability
    if abs(total - 1.0) > kernel.TOL.structural:
        raise NumericError(f"branch probabilities sum to {total}, not 1")
    return branches[0], branches[1]


def sample_outcome(branches, seed: int) -> int:
    """Draw one outcome label from the branch probabilities.

    Demonstration output only; every physical quantity in the package is
    computed from the exhaustive branch enumeration, never from samples.
    """
    rng = np.random.default_rng(seed)
    return int(rng.random() >= branches[0].probability)


def infused_energy(branches, hams: HamiltonianSet) -> float:
    """Average post-measurement energy above the (zero) ground energy."""
    return sum(
        b.probability * expectation(b.state, hams.h_tot) for b in branches
    )


def evolve_branches(branches, hams: HamiltonianSet, t: float):
    """Evolve every branch state under exp(-i*H_tot*t); probabilities unchanged."""
    if not math.isfinite(t) or t < 0:
        raise ValidationError("evolution time must be finite and >= 0")
    u = kernel.evolve_operator(hams.h_tot, t)
    out = []
    for b in branches:
        state = u @ b.state
        state.flags.writeable = False
        out.append(OutcomeBranch(mu=b.mu, probability=b.probability, state=state))
    return tuple(out)


def apply_bob(branches, control: BobControl):
    """Apply the outcome-conditioned local unitary I_A (x) U_B(mu) per branch."""
    out = []
    for b in branches:
        u4 = kron(ID2, control.unitary(b.mu))
        state = u4 @ b.state
        state.flags.writeable = False
        out.append(OutcomeBranch(mu=b.mu, probability=b.probability, state=state))
    return tuple(out)


def extracted_energy(branches_before, branches_after, hams: HamiltonianSet) -> float:
    """Probability-weighted energy drop sum_mu p(mu)*(<H>_before - <H>_after).

    Positive values mean energy left the system at B: U_B commutes with H_A,
    so the drop sits entirely in <H_B + V>.
    """
    total = 0.0
    for before, after in zip(branches_before, branches_after):
        if before.mu != after.mu:
            raise ValidationError("branch lists must correspond outcome-by-outcome")
        total += before.probability * (
            expectation(before.state, hams.h_tot)
            - expectation(after.state, hams.h_tot)
        )
    return total


def _branch_energies(branches, hams: HamiltonianSet) -> tuple[float, float]:
    return tuple(expectation(b.state, hams.h_tot) for b in branches)


def _golden_max(f, lo: float, hi: float, tol: float, budget: int):
    """Golden-section maximisation of a unimodal f on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    iterations = 0
    while (hi - lo) > tol:
        if iterations >= budget:
            best_x = c if fc >= fd else d
            raise NumericError(
                "golden-section refinement exhausted its iteration budget",
                best=(best_x, max(fc, fd)),
            )
        if fc < fd:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
        else:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        iterations += 1
    x = (lo + hi) / 2.0
    return x, f(x)


def _family_extraction(theta, branches, hams, energies_before):
    control = BobControl.family(float(theta))
    after = apply_bob(branches, control)
    per_branch = tuple(
        eb - expectation(a.state, hams.h_tot)
        for eb, a in zip(energies_before, after)
    )
    total = sum(b.probability * pb for b, pb in zip(branches, per_branch))
    return total, per_branch, control


def _optimize_family(branches, hams, cfg) -> ExtractionResult:
    energies_before = _branch_energies(branches, hams)

    def objective(theta: float) -> float:
        return _family_extraction(theta, branches, hams, energies_before)[0]

    grid = np.linspace(-math.pi / 2.0, math.pi / 2.0, cfg.coarse_grid_points)
    values = [objective(t) for t in grid]
    best = int(np.argmax(values))
    span = grid[1] - grid[0]
    theta_star, _ = _golden_max(
        objective,
        grid[best] - span,
        grid[best] + span,
        cfg.refine_tolerance,
        cfg.max_iterations,
    )
    total, per_branch, control = _family_extraction(
        theta_star, branches, hams, energies_before
    )
    return ExtractionResult(
        extracted_energy=total, control=control, per_branch_energy=per_branch
    )


def _axis_from_angles(polar: float, azimuth: float):
    return (
        math.sin(polar) * math.cos(azimuth),
        math.sin(polar) * math.sin(azimuth),
        math.cos(polar),
    )


def _su2_start_list(family_theta: float):
    # Fixed deterministic starts: the family optimum on the y axis plus a
    # spread over axes and angles.  No randomised restarts.
    return (
        (family_theta, math.pi / 2.0, math.pi / 2.0),
        (0.4, math.pi / 2.0, math.pi / 2.0),
        (-0.4, math.pi / 2.0, math.pi / 2.0),
        (0.4, math.pi / 2.0, 0.0),
        (0.4, 0.0, 0.0),
        (0.7, 1.0, 2.0),
        (-0.7, 2.2, 4.4),
        (0.2, 2.0, 1.0),
    )


def _refine_su2(objective, start, cfg):
    """Nelder-Mead refinement of a 3-parameter SU(2) objective (minimised)."""
    result = minimize(
        objective,
        x0=np.asarray(start, dtype=float),
        method="Nelder-Mead",
        options={
            "xatol": max(cfg.refine_tolerance, 1e-10),
            "fatol": max(cfg.refine_tolerance * 1e-2, 1e-13),
            "maxiter": cfg.max_iterations,
            "maxfev": 4 * cfg.max_iterations,
        },
    )
    if not result.success and "maximum" in (result.message or "").lower():
        raise NumericError(
            f"SU(2) refinement exhausted its iteration budget: {result.message}",
            best=(result.x, float(result.fun)),
        )
    return result.x, float(result.fun)


def _minimise_branch_energy(state, hams, cfg, family_theta):
    """Best local unitary for one branch: min_U <psi|(I x U)^H H (I x U)|psi>."""

    def objective(params):
        theta, polar, azimuth = params
        u4 = kron(ID2, su2(theta, _axis_from_angles(polar, azimuth)))
        return expectation(u4 @ state, hams.h_tot)

    best_params, best_value = None, math.inf
    for start in _su2_start_list(family_theta):
        x, fx = _refine_su2(objective, start, cfg)
        if fx < best_value:
            best_params, best_value = x, fx
    theta, polar, azimuth = best_params
    return (float(theta), _axis_from_angles(polar, azimuth)), best_value


def _optimize_full(branches, hams, cfg) -> ExtractionResult:
    family = _optimize_family(branches, hams, cfg)
    energies_before = _branch_energies(branches, hams)
    params, per_branch = [], []
    for b, eb in zip(branches, energies_before):
        seed = family.control.theta if b.mu == 0 else -family.control.theta
        su2_params, after = _minimise_branch_energy(b.state, hams, cfg, seed)
        params.append(su2_params)
        per_branch.append(eb - after)
    control = BobControl.full(params[0], params[1])
    total = sum(b.probability * pb for b, pb in zip(branches, per_branch))
    return ExtractionResult(
        extracted_energy=total, control=control, per_branch_energy=tuple(per_branch)
    )


def _optimize_shared(branches, hams, cfg) -> ExtractionResult:
    """Best outcome-independent unitary (no classical information used)."""
    energies_before = _branch_energies(branches, hams)

    def objective(params):
        theta, polar, azimuth = params
        u4 = kron(ID2, su2(theta, _axis_from_angles(polar, azimuth)))
        return sum(
            b.probability * expectation(u4 @ b.state, hams.h_tot) for b in branches
        )

    best_params, best_value = None, math.inf
    for start in _su2_start_list(0.0):
        x, fx = _refine_su2(objective, start, cfg)
        if fx < best_value:
            best_params, best_value = x, fx
    theta, polar, azimuth = best_params
    su2_params = (float(theta), _axis_from_angles(polar, azimuth))
    control = BobControl.full(su2_params, su2_params)
    after = apply_bob(branches, control)
    per_branch = tuple(
        eb - expectation(a.state, hams.h_tot)
        for eb, a in zip(energies_before, after)
    )
    total = sum(b.probability * pb for b, pb in zip(branches, per_branch))
    return ExtractionResult(
        extracted_energy=total, control=control, per_branch_energy=per_branch
    )


def optimize_bob(
    branches,
    hams: HamiltonianSet,
    cfg: OptimizerConfig | None = None,
    mode: str = "family",
) -> ExtractionResult:
    """Maximise the extracted energy over Bob's control.

    mode "family": 1-dim search over theta in [-pi/2, pi/2] (coarse grid,
    then golden-section refinement to cfg.refine_tolerance).
    mode "full": independent 3-parameter SU(2) search per outcome from a
    fixed start list (seeded with the family optimum, so the result is
    never below the family value).
    mode "shared": one unitary for both outcomes -- the no-information
    baseline, which cannot extract energy at zero delay.
    """
    cfg = cfg or OptimizerConfig()
    if mode == "family":
        return _optimize_family(branches, hams, cfg)
    if mode == "full":
        return _optimize_full(branches, hams, cfg)
    if mode == "shared":
        return _optimize_shared(branches, hams, cfg)
    raise ValidationError(f"unknown optimiser mode {mode!r}")
