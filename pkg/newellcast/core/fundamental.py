"""Triangular fundamental diagram algebra"""

from typing import Union

import numpy as np

from ..errors import DomainError, ValidationError
from .models import TriangularFD

Density = Union[float, np.ndarray]

# Densities this far outside [0, kj] are still accepted and clipped
DOMAIN_ATOL = 1e-9


def make_triangular_fd(vf: float, w: float, kj: float) -> TriangularFD:
    """Build a triangular diagram from free-flow speed, wave speed and jam density

    Args:
        vf: Free-flow speed (mi/h)
        w: Congested wave speed magnitude (mi/h)
        kj: Jam density (veh/mi)

    Returns:
        TriangularFD with kc = kj*w/(vf+w) and qc = kc*vf
    """
    for name, value in (("vf", vf), ("w", w), ("kj", kj)):
        if not value > 0:
            raise ValidationError(name, f"must be positive, got {value}")
    kc = kj * w / (vf + w)
    return TriangularFD(vf=float(vf), w=float(w), kj=float(kj), kc=kc, qc=kc * vf)


def _check_domain(fd: TriangularFD, k: Density) -> np.ndarray:
    array = np.asarray(k, dtype=float)
    if np.any(array < -DOMAIN_ATOL) or np.any(array > fd.kj + DOMAIN_ATOL) or np.any(np.isnan(array)):
        raise DomainError(f"density outside [0, {fd.kj}]", kj=fd.kj)
    return np.clip(array, 0.0, fd.kj)


def _unwrap(value: np.ndarray, like: Density) -> Density:
    return float(value) if np.ndim(like) == 0 else value


def flow_at_density(fd: TriangularFD, k: Density) -> Density:
    """Equilibrium flow q(k) in veh/h"""
    array = _check_domain(fd, k)
    q = np.where(array <= fd.kc, fd.vf * array, fd.w * (fd.kj - array))
    return _unwrap(q, k)


def demand(fd: TriangularFD, k: Density) -> Density:
    """Sending flow min(vf*k, qc)"""
    array = _check_domain(fd, k)
    return _unwrap(np.minimum(fd.vf * array, fd.qc), k)


def supply(fd: TriangularFD, k: Density) -> Density:
    """Receiving flow min(qc, w*(kj - k))"""
    array = _check_domain(fd, k)
    return _unwrap(np.minimum(fd.qc, fd.w * (fd.kj - array)), k)
