"""Equation definitions and dispersion relations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MKDV = "mkdv"
TNLS = "tnls"


@dataclass(frozen=True)
class EquationSpec:
    """Either mKdV ``u_t + u_xxx + mu u^2 u_x = 0`` or
    tNLS ``v_t + i alpha v_xx + beta v_xxx + i gamma |v|^2 v = 0``.

    ``mu = 0`` (mKdV) and ``gamma = 0`` (tNLS) switch the nonlinearity off.
    """

    kind: str
    mu: int | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind == MKDV:
            if self.mu not in (-1, 0, 1):
                raise ValueError(f"mKdV needs mu in {{-1, +1}} (0 = linear), got {self.mu!r}")
            if any(v is not None for v in (self.alpha, self.beta, self.gamma)):
                raise ValueError("mKdV takes no alpha/beta/gamma")
        elif self.kind == TNLS:
            if self.mu is not None:
                raise ValueError("tNLS takes no mu")
            if any(v is None for v in (self.alpha, self.beta, self.gamma)):
                raise ValueError("tNLS needs alpha, beta and gamma")
            if self.beta == 0:
                raise ValueError("tNLS needs beta != 0 (third-order dispersion)")
            for name in ("alpha", "beta", "gamma"):
                object.__setattr__(self, name, float(getattr(self, name)))
        else:
            raise ValueError(f"unknown equation kind {self.kind!r}")

    @classmethod
    def mkdv(cls, mu: int = -1) -> "EquationSpec":
        return cls(MKDV, mu=mu)

    @classmethod
    def tnls(cls, alpha: float = 1.0, beta: float = 1.0, gamma: float = 1.0) -> "EquationSpec":
        return cls(TNLS, alpha=alpha, beta=beta, gamma=gamma)

    @property
    def is_mkdv(self) -> bool:
        return self.kind == MKDV

    @property
    def real_valued(self) -> bool:
        return self.kind == MKDV

    @property
    def linear(self) -> bool:
        return (self.mu == 0) if self.is_mkdv else (self.gamma == 0)

    def phase(self, xi):
        return phase_symbol(self, xi)

    def as_dict(self) -> dict:
        if self.is_mkdv:
            return {"kind": self.kind, "mu": self.mu}
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


def phase_symbol(eq: EquationSpec, xi):
    """Dispersion relation: ``xi^3`` (mKdV) or ``alpha xi^2 + beta xi^3`` (tNLS)."""
    xi = np.asarray(xi, dtype=float) if not np.isscalar(xi) else float(xi)
    if eq.is_mkdv:
        return xi * xi * xi
    return eq.alpha * xi * xi + eq.beta * xi * xi * xi
