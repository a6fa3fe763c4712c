"""Parameter and position types for the two-bank diversification model.

Two independent assets X, Y ~ U[0, s].  Bank 1 holds (1 - r1) X + r1 Y,
bank 2 holds r2 X + (1 - r2) Y and a bank defaults when its portfolio
value falls to the threshold d or below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ValidationError(ValueError):
    """Raised when model inputs violate their constraints."""


@dataclass(frozen=True)
class ModelParams:
    s: float
    d: float

    def __post_init__(self):
        errors = _params_errors(self.s, self.d)
        if errors:
            raise ValidationError("; ".join(errors))

    @property
    def deep_support(self) -> bool:
        return self.s >= 2 * self.d

    @property
    def variance(self) -> float:
        """Variance of a single U[0, s] asset."""
        return self.s**2 / 12.0

    def require_deep_support(self, what: str = "this operation"):
        if not self.deep_support:
            raise ValidationError(
                f"{what} requires s >= 2d (got s={self.s!r}, d={self.d!r})"
            )


@dataclass(frozen=True)
class Diversification:
    r1: float
    r2: float

    def __post_init__(self):
        errors = [e for e in (_weight_error("r1", self.r1), _weight_error("r2", self.r2)) if e]
        if errors:
            raise ValidationError("; ".join(errors))


@dataclass(frozen=True)
class ConfidenceLevel:
    alpha: float

    def __post_init__(self):
        err = _alpha_error(self.alpha)
        if err:
            raise ValidationError(err)

    @property
    def tail(self) -> float:
        return 1.0 - self.alpha


@dataclass(frozen=True)
class ShiftedPosition:
    """The random position ``c_x * X + c_y * Y - shift``."""

    c_x: float
    c_y: float
    shift: float = 0.0

    def __post_init__(self):
        if not (self.c_x >= 0 and self.c_y >= 0):
            raise ValidationError(f"weights must be nonnegative, got ({self.c_x}, {self.c_y})")
        if not math.isfinite(self.shift):
            raise ValidationError(f"shift must be finite, got {self.shift}")

    @property
    def weights(self) -> tuple[float, float]:
        return (self.c_x, self.c_y)

    @classmethod
    def individual(cls, r: float, d: float) -> "ShiftedPosition":
        """R(r) = (1 - r)(X - d) + r (Y - d)."""
        if _weight_error("r", r):
            raise ValidationError(_weight_error("r", r))
        return cls(1.0 - r, r, d)

    @classmethod
    def aggregate(cls, div: Diversification, d: float) -> "ShiftedPosition":
        """R(r1) + R(r2), the summed position of both banks."""
        return cls(1.0 - div.r1 + div.r2, 1.0 + div.r1 - div.r2, 2.0 * d)

    def __add__(self, other):
        if isinstance(other, ShiftedPosition):
            return ShiftedPosition(self.c_x + other.c_x, self.c_y + other.c_y,
                                   self.shift + other.shift)
        # adding cash
        return ShiftedPosition(self.c_x, self.c_y, self.shift - float(other))

    __radd__ = __add__

    def scale(self, lam: float) -> "ShiftedPosition":
        if lam < 0:
            raise ValidationError("scale factor must be nonnegative")
        return ShiftedPosition(lam * self.c_x, lam * self.c_y, lam * self.shift)

    def dominated_by(self, other: "ShiftedPosition", s: float) -> bool:
        """True if self <= other for every (x, y) in [0, s]^2."""
        gap = min(
            (other.c_x - self.c_x) * x + (other.c_y - self.c_y) * y
            for x in (0.0, s) for y in (0.0, s)
        )
        return gap >= other.shift - self.shift


@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)
    deep_support: bool | None = None

    @property
    def ok(self) -> bool:
        return all(msg is None for msg in self.checks.values())

    @property
    def errors(self) -> list[str]:
        return [msg for msg in self.checks.values() if msg is not None]

    def raise_if_invalid(self):
        if not self.ok:
            raise ValidationError("; ".join(self.errors))


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _params_errors(s, d) -> list[str]:
    errors = []
    if not (_is_real(s) and s > 0):
        errors.append(f"s must be a positive real, got {s!r}")
    if not (_is_real(d) and d > 0):
        errors.append(f"d must be a positive real, got {d!r}")
    if not errors and not d < s:
        errors.append(f"d must be strictly below s (got d={d!r}, s={s!r})")
    return errors


def _weight_error(name, r) -> str | None:
    if not (_is_real(r) and 0.0 <= r <= 1.0):
        return f"{name} must lie in [0, 1], got {r!r}"
    return None


def _alpha_error(alpha) -> str | None:
    if not (_is_real(alpha) and 0.0 < alpha < 1.0):
        return f"alpha must lie in (0, 1), got {alpha!r}"
    return None


def validate(s, d, r1, r2, alpha) -> ValidationReport:
    """Check every raw input and report failures without raising."""
    perrs = _params_errors(s, d)
    report = ValidationReport()
    report.checks["s"] = next((e for e in perrs if e.startswith("s ")), None)
    report.checks["d"] = next((e for e in perrs if not e.startswith("s ")), None)
    report.checks["r1"] = _weight_error("r1", r1)
    report.checks["r2"] = _weight_error("r2", r2)
    report.checks["alpha"] = _alpha_error(alpha)
    if _is_real(s) and _is_real(d):
        report.deep_support = s >= 2 * d
    return report
