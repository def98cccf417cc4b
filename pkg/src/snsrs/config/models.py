"""Core data models for snsrs."""

import hashlib
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np


class Intensity(str, Enum):
    """Source intensity choices; the vacuum intensity is fixed at 0."""

    V = "v"
    X = "x"
    Y = "y"
    Z = "z"


INTENSITIES: tuple[Intensity, ...] = (Intensity.V, Intensity.X, Intensity.Y, Intensity.Z)


class WindowClass(str, Enum):
    """Time-window class lr: Alice sent intensity l, Bob sent intensity r."""

    VV = "vv"
    VX = "vx"
    VY = "vy"
    VZ = "vz"
    XV = "xv"
    XX = "xx"
    XY = "xy"
    XZ = "xz"
    YV = "yv"
    YX = "yx"
    YY = "yy"
    YZ = "yz"
    ZV = "zv"
    ZX = "zx"
    ZY = "zy"
    ZZ = "zz"

    @property
    def alice(self) -> Intensity:
        return Intensity(self.value[0])

    @property
    def bob(self) -> Intensity:
        return Intensity(self.value[1])

    @property
    def index(self) -> int:
        """Row index, ordered alice-major as in INTENSITIES."""
        return INTENSITIES.index(self.alice) * 4 + INTENSITIES.index(self.bob)

    @property
    def is_vacuum(self) -> bool:
        return self is WindowClass.VV

    @property
    def is_one_sided(self) -> bool:
        return (self.alice is Intensity.V) != (self.bob is Intensity.V)

    @property
    def is_two_sided(self) -> bool:
        return self.alice is not Intensity.V and self.bob is not Intensity.V

    @classmethod
    def of(cls, alice: Intensity, bob: Intensity) -> "WindowClass":
        return cls(alice.value + bob.value)


WINDOW_CLASSES: tuple[WindowClass, ...] = tuple(WindowClass)


@dataclass(frozen=True)
class ProtocolParams:
    """Source settings shared by both parties."""

    p_v: float
    p_x: float
    p_y: float
    p_z: float
    mu_x: float
    mu_y: float
    mu_z: float
    m: int = 1
    lambda_slice: float = 0.05
    n_windows: int = 10**10
    mode_probs: tuple[float, ...] = ()

    def intensity(self, choice: Intensity) -> float:
        """Mean photon number of an intensity choice."""
        return {
            Intensity.V: 0.0,
            Intensity.X: self.mu_x,
            Intensity.Y: self.mu_y,
            Intensity.Z: self.mu_z,
        }[choice]

    def probability(self, choice: Intensity) -> float:
        return {
            Intensity.V: self.p_v,
            Intensity.X: self.p_x,
            Intensity.Y: self.p_y,
            Intensity.Z: self.p_z,
        }[choice]

    @property
    def mode_weights(self) -> np.ndarray:
        """P_{r_j} for every mode; uniform when no explicit weights are given."""
        if self.mode_probs:
            return np.asarray(self.mode_probs, dtype=float)
        return np.full(self.m, 1.0 / self.m)

    @property
    def is_uniform(self) -> bool:
        weights = self.mode_weights
        return bool(np.allclose(weights, 1.0 / self.m, rtol=0.0, atol=1e-12))

    @property
    def slice_width(self) -> float:
        """Phase-slice width Δ = 2·arccos(1−λ), in (0, π]."""
        return 2.0 * math.acos(1.0 - self.lambda_slice)


@dataclass(frozen=True)
class ChannelParams:
    """Symmetric fiber channel with the measurement station at the midpoint."""

    length_km: float
    alpha: float = 0.2
    eta0: float = 0.5
    dark: float = 1e-8
    e_mis: float = 0.03


@dataclass(frozen=True)
class SecurityParams:
    """Failure probabilities and error-correction efficiency."""

    xi: float = 1e-10
    eps_cor: float = 1e-10
    eps_pa: float = 1e-10
    eps_hat: float = 1e-10
    f_ec: float = 1.1


@dataclass(frozen=True)
class RunConfig:
    """A validated (protocol, channel, security) triple."""

    protocol: ProtocolParams
    channel: ChannelParams
    security: SecurityParams = field(default_factory=SecurityParams)

    def with_distance(self, length_km: float) -> "RunConfig":
        return replace(self, channel=replace(self.channel, length_km=length_km))

    def with_modes(self, m: int) -> "RunConfig":
        """Same configuration with m uniform modes."""
        uniform = tuple(1.0 / m for _ in range(m))
        return replace(self, protocol=replace(self.protocol, m=m, mode_probs=uniform))

    def with_protocol(self, **changes: float) -> "RunConfig":
        return replace(self, protocol=replace(self.protocol, **changes))  # type: ignore[arg-type]

    def fingerprint(self) -> str:
        """Hash of every physics-relevant field except the window count."""
        parts = [
            repr(getattr(self.protocol, f.name))
            for f in fields(self.protocol)
            if f.name != "n_windows"
        ]
        parts += [repr(getattr(self.channel, f.name)) for f in fields(self.channel)]
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


class ConfigurationError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = violations
        super().__init__("; ".join(violations))


def _check_probability(name: str, value: float, violations: list[str]) -> None:
    if not 0.0 <= value <= 1.0:
        violations.append(f"{name} = {value!r} outside [0, 1]")


def _check_open_unit(name: str, value: float, violations: list[str]) -> None:
    if not 0.0 < value < 1.0:
        violations.append(f"{name} = {value!r} outside (0, 1)")


def validate(
    params: ProtocolParams, channel: ChannelParams, security: SecurityParams
) -> RunConfig:
    """Check every invariant and return a normalized configuration.

    Args:
        params: Source settings
        channel: Channel and detector settings
        security: Failure probabilities and error-correction efficiency

    Returns:
        RunConfig with explicit, normalized mode probabilities

    Raises:
        ConfigurationError: If any invariant is violated; every violation is listed
    """
    violations: list[str] = []

    for choice in INTENSITIES:
        _check_probability(f"p_{choice.value}", params.probability(choice), violations)
    total = params.p_v + params.p_x + params.p_y + params.p_z
    if abs(total - 1.0) > 1e-12:
        violations.append(f"source probabilities sum to {total:g}, expected 1")
    if params.p_x == 0.0:
        violations.append("decoy intensities unused: p_x = 0 breaks the decoy-state denominator")
    if params.p_y == 0.0:
        violations.append("decoy intensities unused: p_y = 0 leaves mu_y unobserved")

    if params.mu_x <= 0.0:
        violations.append(f"mu_x = {params.mu_x!r} must be positive")
    if params.mu_y <= params.mu_x:
        violations.append(
            f"mu_y = {params.mu_y!r} must exceed mu_x = {params.mu_x!r} "
            "(decoy denominator 2*mu_x*mu_y*(mu_y - mu_x))"
        )
    if params.mu_z <= 0.0:
        violations.append(f"mu_z = {params.mu_z!r} must be positive")

    if not isinstance(params.m, int) or params.m < 1:
        violations.append(f"m = {params.m!r} must be an integer >= 1")
    if not 0.0 < params.lambda_slice <= 1.0:
        violations.append(f"lambda = {params.lambda_slice!r} outside (0, 1]")
    if params.n_windows < 1:
        violations.append(f"N = {params.n_windows!r} must be >= 1")

    mode_probs = params.mode_probs
    if mode_probs and isinstance(params.m, int) and params.m >= 1:
        if len(mode_probs) != params.m:
            violations.append(f"mode_probs has {len(mode_probs)} entries for m = {params.m}")
        elif any(p < 0.0 for p in mode_probs):
            violations.append("mode probabilities must be non-negative")
        else:
            mode_total = math.fsum(mode_probs)
            if abs(mode_total - 1.0) > 1e-9:
                violations.append(f"mode probabilities sum to {mode_total:g}")
            else:
                mode_probs = tuple(p / mode_total for p in mode_probs)

    if channel.length_km < 0.0:
        violations.append(f"L_km = {channel.length_km!r} must be >= 0")
    if channel.alpha < 0.0:
        violations.append(f"alpha_db_km = {channel.alpha!r} must be >= 0")
    if not 0.0 < channel.eta0 <= 1.0:
        violations.append(f"eta0 = {channel.eta0!r} outside (0, 1]")
    if not 0.0 <= channel.dark < 1.0:
        violations.append(f"dark = {channel.dark!r} outside [0, 1)")
    if not 0.0 <= channel.e_mis < 0.5:
        violations.append(f"e_mis = {channel.e_mis!r} outside [0, 0.5)")

    for name in ("xi", "eps_cor", "eps_pa", "eps_hat"):
        _check_open_unit(name, getattr(security, name), violations)
    if security.f_ec < 1.0:
        violations.append(f"f_ec = {security.f_ec!r} must be >= 1")

    if violations:
        raise ConfigurationError(violations)

    if not mode_probs:
        mode_probs = tuple(1.0 / params.m for _ in range(params.m))
    return RunConfig(
        protocol=replace(params, mode_probs=mode_probs),
        channel=channel,
        security=security,
    )


def per_arm_transmittance(channel: ChannelParams) -> float:
    """Overall efficiency of one arm: detector efficiency times half the fiber loss."""
    return channel.eta0 * 10.0 ** (-channel.alpha * (channel.length_km / 2.0) / 10.0)
