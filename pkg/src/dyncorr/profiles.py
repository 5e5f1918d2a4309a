"""Target correlation profiles on the integer time grid.

A profile fixes the dynamic correlation ``rho_t`` between the two paths at
every grid point ``t = 1..T``.  Path pairs are generated by increment
coupling: step ``i`` uses a Gaussian increment pair with correlation

    r_i = i * rho_i - (i - 1) * rho_{i-1},        rho_0 := 0,

so that the cumulative cross-covariance is ``Cov(X_s, Y_t) =
min(s, t) * rho_{min(s, t)}`` exactly.  A profile is only usable when every
``r_i`` lies in [-1, 1]; anything else is rejected at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IncrementInfeasible, ProfileOutOfRange

# Slack for values that land on the boundary only up to rounding.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Unit-spaced integer grid t = 1..T."""

    T: int

    def __post_init__(self):
        if not isinstance(self.T, (int, np.integer)) or self.T < 2:
            raise DomainError(f"grid length must be an integer >= 2, got {self.T!r}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.T + 1)


@dataclass(frozen=True)
class CorrelationProfile:
    """Validated dynamic-correlation target.

    ``kind`` is one of ``constant``, ``linear``, ``table``, ``capped``.
    ``capped`` is the named built-in time-varying shape
    ``rho_t = c * min(t, t0) / t`` (correlation accrues at constant rate c
    up to time t0 and is frozen afterwards); it is the stock example of a
    feasible profile whose correlation genuinely changes over time.
    """

    kind: str
    params: tuple = ()
    table: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "table", "capped"):
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.kind == "table" and len(self.table) < 2:
            raise DomainError("table profile needs at least 2 values")

    def rho(self, T: int) -> np.ndarray:
        """Correlation values rho_1..rho_T (validated)."""
        t = np.arange(1, T + 1, dtype=float)
        if self.kind == "constant":
            (c,) = self.params
            values = np.full(T, float(c))
        elif self.kind == "linear":
            c0, c1 = self.params
            values = c0 + c1 * t
        elif self.kind == "capped":
            c, t0 = self.params
            values = c * np.minimum(t, float(t0)) / t
        else:
            if T > len(self.table):
                raise DomainError(
                    f"table profile has {len(self.table)} values, {T} requested"
                )
            values = np.asarray(self.table[:T], dtype=float)
        _validate(values)
        return values

    def increments(self, T: int) -> np.ndarray:
        """Per-step increment correlations r_1..r_T (validated)."""
        return _increments(self.rho(T))

    def spec_string(self) -> str:
        """Round-trippable text form, also used in manifests."""
        if self.kind == "table":
            return "table:" + ",".join(repr(v) for v in self.table)
        return self.kind + ":" + ",".join(repr(float(p)) for p in self.params)


def _increments(rho: np.ndarray) -> np.ndarray:
    t = np.arange(1, len(rho) + 1, dtype=float)
    gamma = t * rho  # cumulative covariance t * rho_t, with rho_0 := 0
    r = np.diff(gamma, prepend=0.0)
    bad = np.nonzero(np.abs(r) > 1.0 + _EDGE_TOL)[0]
    if bad.size:
        i = int(bad[0])
        raise IncrementInfeasible(i + 1, float(r[i]))
    return np.clip(r, -1.0, 1.0)


def _validate(rho: np.ndarray) -> None:
    if not np.all(np.isfinite(rho)):
        i = int(np.nonzero(~np.isfinite(rho))[0][0])
        raise ProfileOutOfRange(i + 1, float(rho[i]))
    bad = np.nonzero(np.abs(rho) > 1.0 + _EDGE_TOL)[0]
    if bad.size:
        i = int(bad[0])
        raise ProfileOutOfRange(i + 1, float(rho[i]))


def build_profile(spec, grid: TimeGrid) -> CorrelationProfile:
    """Construct and validate a profile against a grid.

    ``spec`` is either a profile string (``"constant:0.5"``,
    ``"linear:0.1,0.02"``, ``"capped:0.5,10"``, ``"table:v1,v2,..."``) or a
    tuple like ``("constant", 0.5)`` / ``("table", [v1, ...])``.
    """
    if isinstance(spec, CorrelationProfile):
        profile = spec
    elif isinstance(spec, str):
        profile = _parse_spec_string(spec)
    else:
        kind = spec[0]
        if kind == "table":
            profile = CorrelationProfile("table", table=tuple(float(v) for v in spec[1]))
        else:
            profile = CorrelationProfile(kind, tuple(float(v) for v in spec[1:]))
    if profile.kind == "table" and len(profile.table) != grid.T:
        raise DomainError(
            f"table length {len(profile.table)} does not match grid T={grid.T}"
        )
    # Materializing runs both range and feasibility validation.
    profile.increments(grid.T)
    return profile


def _parse_spec_string(text: str) -> CorrelationProfile:
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind == "table":
        values = tuple(float(v) for v in rest.split(","))
        return CorrelationProfile("table", table=values)
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest else ()
    except ValueError as exc:
        raise DomainError(f"cannot parse profile spec {text!r}: {exc}") from None
    expected = {"constant": 1, "linear": 2, "capped": 2}.get(kind)
    if expected is None:
        raise DomainError(f"unknown profile kind {kind!r}")
    if len(params) != expected:
        raise DomainError(
            f"profile kind {kind!r} takes {expected} parameter(s), got {len(params)}"
        )
    return CorrelationProfile(kind, params)
