"""Godunov (cell transmission) scheme for the LWR model with a triangular diagram"""

import math
from dataclasses import dataclass

import numpy as np

from ..core import TriangularFD
from ..core.fundamental import DOMAIN_ATOL, demand
from ..errors import CFLViolation, ValidationError

SECONDS_PER_HOUR = 3600.0
CFL_SAFETY = 0.9
DT_RESOLUTION = 10  # candidate steps are multiples of 0.1 s


@dataclass(frozen=True)
class Boundary:
    """Boundary flows for one step (veh/h); outflow_cap may be inf"""
    inflow_demand: float
    outflow_cap: float = float("inf")


def cfl_bound(fd: TriangularFD, dx: float, safety: float = CFL_SAFETY) -> float:
    """Largest stable step in seconds, scaled by the safety factor"""
    if not dx > 0:
        raise ValidationError("dx", f"must be positive, got {dx}")
    return dx / max(fd.vf, fd.w) * SECONDS_PER_HOUR * safety


def choose_dt(fd: TriangularFD, dx: float, aggregation: float = 300.0, safety: float = CFL_SAFETY) -> float:
    """Time step satisfying CFL that divides the aggregation window exactly

    Picks the largest multiple of 0.1 s below the CFL bound that divides the
    aggregation window; falls back to aggregation / ceil(aggregation / bound)
    for bounds under 0.1 s.
    """
    bound = cfl_bound(fd, dx, safety)
    window = int(round(aggregation * DT_RESOLUTION))
    for m in range(int(math.floor(bound * DT_RESOLUTION + 1e-9)), 0, -1):
        if window % m == 0:
            return m / DT_RESOLUTION
    return aggregation / math.ceil(aggregation / bound)


def step_fluxes(k: np.ndarray, fd: TriangularFD, inflow_demand: float, outflow_cap: float) -> np.ndarray:
    send = np.minimum(fd.vf * k, fd.qc)
    receive = np.minimum(fd.qc, fd.w * (fd.kj - k))
    flux = np.empty(len(k) + 1)
    flux[0] = min(inflow_demand, receive[0])
    flux[1:-1] = np.minimum(send[:-1], receive[1:])
    flux[-1] = min(send[-1], outflow_cap)
    return flux


def interface_fluxes(densities: np.ndarray, fd: TriangularFD, boundary: Boundary) -> np.ndarray:
    """Flux through every cell interface, min(demand left, supply right)

    Returns:
        Array of n+1 fluxes in veh/h; entry 0 is the upstream boundary
    """
    k = np.asarray(densities, dtype=float)
    # raises DomainError outside [0, kj]
    demand(fd, k)
    return step_fluxes(np.clip(k, 0.0, fd.kj), fd, boundary.inflow_demand, boundary.outflow_cap)


def apply_fluxes(k: np.ndarray, flux: np.ndarray, ratio: float, fd: TriangularFD, step: int) -> np.ndarray:
    updated = k - ratio * (flux[1:] - flux[:-1])
    low, high = updated.min(), updated.max()
    if low < -DOMAIN_ATOL or high > fd.kj + DOMAIN_ATOL:
        raise CFLViolation(f"density left [0, {fd.kj}] at step {step} (min={low:.6g}, max={high:.6g})", step=step)
    return np.clip(updated, 0.0, fd.kj)


def godunov_step(densities: np.ndarray, fd: TriangularFD, dx: float, dt: float,
                 boundary: Boundary, step: int = 0) -> np.ndarray:
    """Advance cell densities by one step

    Args:
        densities: Cell densities (veh/mi)
        fd: Triangular fundamental diagram
        dx: Cell size (mi)
        dt: Step (s)
        boundary: Upstream demand and downstream cap for this step
        step: Step index reported on CFL violation

    Returns:
        Updated densities
    """
    flux = interface_fluxes(densities, fd, boundary)
    return apply_fluxes(np.asarray(densities, dtype=float), flux, dt / SECONDS_PER_HOUR / dx, fd, step)
