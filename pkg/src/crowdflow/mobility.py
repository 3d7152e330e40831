"""Density-dependent speed and mobility laws."""

from __future__ import annotations


def f_mobility(rho, rho_max: float = 1.0):
    """Linear speed law ``rho_max - rho``."""
    return rho_max - rho


def F_mobility(rho, rho_max: float = 1.0):
    """Mobility ``rho * f(rho)**2`` and its derivative ``f**2 - 2 rho f``."""
    f = f_mobility(rho, rho_max)
    return rho * f * f, f * f - 2.0 * rho * f
