"""Critical exponents of ``u_t + (-Delta)^(beta/2) u = I_alpha(|u|^p)``."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ParameterError

__all__ = ["CriticalExponents", "critical_exponents"]


@dataclass(frozen=True)
class CriticalExponents:
    """Threshold exponents for one ``(n, beta, alpha)``.

    ``alpha = 0`` stands for the local nonlinearity ``|u|^p``.
    """

    n: int
    beta: float
    alpha: float
    p_fuj: float
    p_sc: float
    p_local: float

    def q_sc(self, p: float) -> float:
        """Lebesgue exponent left invariant by the scaling family."""
        return self.n * (p - 1) / (self.beta + self.alpha)

    def p_star(self, gamma: float) -> float:
        """Nonexistence threshold for data decaying like ``|x|^-gamma``."""
        if not gamma > 0:
            raise ParameterError(f"gamma must be positive, got {gamma}")
        return 1 + (self.beta + self.alpha) / gamma

    def as_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [
            ("n", self.n),
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("p_fuj", self.p_fuj),
            ("p_sc", self.p_sc),
            ("p_local", self.p_local),
            ("q_sc(p_fuj)", self.q_sc(self.p_fuj)),
        ]
        return "\n".join(f"{k:<12} {v:.10g}" for k, v in rows)


def critical_exponents(n: int, beta: float, alpha: float) -> CriticalExponents:
    """``p_fuj = 1 + (beta+alpha)/(n-alpha)``, ``p_sc = 1 + (beta+alpha)/n``, ``p_local = n/(n-alpha)``.

    Raises
    ------
    ParameterError
        ``alpha`` outside ``[0, n)``, ``beta`` outside ``(0, 2]`` or ``n < 1``.
    """
    if n < 1 or int(n) != n:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not 0 < beta <= 2:
        raise ParameterError(f"beta must lie in (0, 2], got {beta}")
    if not 0 <= alpha < n:
        raise ParameterError(f"alpha must lie in (0, n={n}), got {alpha}")
    ex = CriticalExponents(
        n=int(n),
        beta=float(beta),
        alpha=float(alpha),
        p_fuj=1 + (beta + alpha) / (n - alpha),
        p_sc=1 + (beta + alpha) / n,
        p_local=n / (n - alpha),
    )
    if alpha > 0:
        assert ex.p_sc < ex.p_fuj
    return ex
