"""Closed-form quantities for a given (n, epsilon, kappa)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction


class DomainError(ValueError):
    pass


def _fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def flood_probability(n: int, epsilon, kappa: int) -> float:
    """Neighbour probability (ln n + kappa) / (eps n), clamped to [0, 1]."""
    p = (math.log(n) + kappa) / (float(_fraction(epsilon)) * n)
    return min(1.0, max(0.0, p))


def flood_rounds(n: int, kappa: int) -> int:
    """ceil(7 ln(n / (2 (ln n + kappa))) + 2), at least 1."""
    value = 7 * math.log(n / (2 * (math.log(n) + kappa))) + 2
    return max(1, math.ceil(value))


def stage_count(epsilon, kappa: int) -> int:
    """3 (kappa + 1) / eps, rounded up when it is not an integer."""
    return math.ceil(3 * (kappa + 1) / _fraction(epsilon))


@dataclass(frozen=True)
class BoundsReport:
    n: int
    epsilon: Fraction
    kappa: int
    psi: Fraction
    mc_threshold: Fraction
    disconnect_bound: Fraction
    edge_bound: Fraction
    rho: int
    p_flood: float
    p_mine: Fraction
    R_stages: int

    def to_dict(self) -> dict:
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in asdict(self).items()}

    def rows(self) -> list[tuple[str, str]]:
        def fmt(v):
            if isinstance(v, Fraction):
                return f"{float(v):.6g}" if v.denominator != 1 else str(v.numerator)
            if isinstance(v, float):
                return f"{v:.6g}"
            return str(v)

        return [(k, fmt(getattr(self, k))) for k in self.__dataclass_fields__]


def compute_bounds(n: int, epsilon, kappa: int) -> BoundsReport:
    eps = _fraction(epsilon)
    if n < 3:
        raise DomainError(f"n must be at least 3, got {n}")
    if not 0 < eps <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if kappa < 1:
        raise DomainError(f"kappa must be at least 1, got {kappa}")
    psi = 1 / (12 * eps)
    return BoundsReport(
        n=n,
        epsilon=eps,
        kappa=kappa,
        psi=psi,
        mc_threshold=n * psi,
        disconnect_bound=Fraction(1, 3),
        edge_bound=4 * psi * eps,
        rho=flood_rounds(n, kappa),
        p_flood=flood_probability(n, eps, kappa),
        p_mine=min(Fraction(1), Fraction(kappa + 1) / (eps * n)),
        R_stages=stage_count(eps, kappa),
    )


def format_bounds(report: BoundsReport) -> str:
    rows = report.rows()
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)
