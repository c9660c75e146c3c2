"""Model parameters for the focusing inhomogeneous Schrödinger–Choquard equation

    i u_t + Δu = -(I_α * |.|^b |u|^p) |x|^b |u|^{p-2} u,   x in R^N

and the exponents derived from them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelParams:
    dim: int
    alpha: float
    b: float
    p: float

    def __post_init__(self):
        for name in ("alpha", "b", "p"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if int(self.dim) != self.dim:
            raise ValueError(f"dim must be an integer, got {self.dim!r}")


@dataclass(frozen=True)
class DerivedExponents:
    s_c: float
    A: float
    B: float
    K_riesz: float
    p_lower: float
    p_upper: float


@dataclass
class Validity:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


REFERENCE = ModelParams(dim=3, alpha=2.0, b=-0.5, p=3.0)
NEAR_MASS_CRITICAL = ModelParams(dim=3, alpha=1.0, b=-0.25, p=2.0)


def riesz_constant(dim: int, alpha: float) -> float:
    """Normalization K with I_α(x) = K |x|^{α-N}, whose Fourier symbol is |ξ|^{-α}."""
    return math.gamma((dim - alpha) / 2) / (
        math.gamma(alpha / 2) * math.pi ** (dim / 2) * 2.0**alpha
    )


def p_range(dim: int, alpha: float, b: float) -> tuple[float, float]:
    """Open intercritical interval for p."""
    c = 2 + alpha + 2 * b
    return 1 + c / dim, 1 + c / (dim - 2)


def validate(params: ModelParams) -> Validity:
    """Check every admissibility condition; each failure names the expression and its value."""
    N, alpha, b, p = params.dim, params.alpha, params.b, params.p
    v = Validity()
    if N < 3:
        v.violations.append(f"N >= 3 fails: N = {N}")
    if not 0 < alpha < N:
        v.violations.append(f"0 < alpha < N fails: alpha = {alpha:g}, N = {N}")
    if not b < 0:
        v.violations.append(f"b < 0 fails: b = {b:g}")
    if not p >= 2:
        v.violations.append(f"p >= 2 fails: p = {p:g}")
    conditions = {
        "2+alpha+2b": 2 + alpha + 2 * b,
        "N+b": N + b,
        "N+4b+2alpha": N + 4 * b + 2 * alpha,
        "4+alpha+2b-N": 4 + alpha + 2 * b - N,
    }
    for expr, value in conditions.items():
        if not value > 0:
            v.violations.append(f"{expr} > 0 fails: {expr} = {value:g}")
    if N > 2:
        lo, hi = p_range(N, alpha, b)
        if not p > lo:
            v.violations.append(f"p > 1+(2+alpha+2b)/N fails: p = {p:g}, lower bound = {lo:g}")
        if not p < hi:
            v.violations.append(f"p < 1+(2+alpha+2b)/(N-2) fails: p = {p:g}, upper bound = {hi:g}")
    return v


def scaling_exponent(params: ModelParams) -> float:
    """γ with u_λ(t, x) = λ^γ u(λ²t, λx) mapping solutions to solutions."""
    return (2 + 2 * params.b + params.alpha) / (2 * (params.p - 1))


def derive_exponents(params: ModelParams) -> DerivedExponents:
    verdict = validate(params)
    if not verdict.ok:
        raise ValueError("inadmissible parameters: " + "; ".join(verdict.violations))
    N, alpha, b, p = params.dim, params.alpha, params.b, params.p
    s_c = N / 2 - (2 + 2 * b + alpha) / (2 * (p - 1))
    B = N * p - N - alpha - 2 * b
    A = 2 * p - B
    # both closed forms of A and B must agree with the definitions
    for lhs, rhs in ((B, 2 * (p - 1) * s_c + 2), (A, 2 * (p - 1) * (1 - s_c))):
        if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs)):
            raise ArithmeticError(f"exponent identity broken: {lhs!r} != {rhs!r}")
    lo, hi = p_range(N, alpha, b)
    return DerivedExponents(
        s_c=s_c, A=A, B=B, K_riesz=riesz_constant(N, alpha), p_lower=lo, p_upper=hi
    )
