"""Code-bit accounting, key length and repeaterless bounds."""

import math
from dataclasses import dataclass

import numpy as np

from snsrs.config.models import ChannelParams, ProtocolParams, SecurityParams, WindowClass
from snsrs.decoy.estimator import CountSource
from snsrs.stats.entropy import binary_entropy

CSV_COLUMNS = [
    "distance_km",
    "m",
    "p_v",
    "p_x",
    "p_y",
    "p_z",
    "mu_x",
    "mu_y",
    "mu_z",
    "lambda",
    "N",
    "n1",
    "e1ph",
    "n_V",
    "n_C",
    "n_D",
    "n_t",
    "E_t",
    "N_f",
    "rate",
    "plob1",
    "plob2",
    "budget_spent",
    "flags",
]


@dataclass(frozen=True)
class CodeBits:
    n_v: float
    n_c: float
    n_d: float
    n_t: float
    e_t: float


@dataclass(frozen=True)
class KeyRateResult:
    """Key length and its ingredients for one configuration."""

    distance_km: float
    protocol: ProtocolParams
    n1: float
    e1ph: float
    bits: CodeBits
    n_f: float
    n_f_raw: float
    plob1: float
    plob2: float
    budget_spent: float = 0.0
    flags: frozenset[str] = frozenset()

    @property
    def m(self) -> int:
        return self.protocol.m

    @property
    def n_t(self) -> float:
        return self.bits.n_t

    @property
    def e_t(self) -> float:
        return self.bits.e_t

    @property
    def rate(self) -> float:
        """Secret bits per time window."""
        return self.n_f / self.protocol.n_windows

    @property
    def raw_rate(self) -> float:
        """Rate before clamping at 0; smooth objective for the optimizer."""
        return self.n_f_raw / self.protocol.n_windows

    def to_row(self) -> dict[str, float | int | str]:
        p = self.protocol
        row: dict[str, float | int | str] = {
            "distance_km": self.distance_km,
            "m": p.m,
            "p_v": p.p_v,
            "p_x": p.p_x,
            "p_y": p.p_y,
            "p_z": p.p_z,
            "mu_x": p.mu_x,
            "mu_y": p.mu_y,
            "mu_z": p.mu_z,
            "lambda": p.lambda_slice,
            "N": p.n_windows,
            "n1": self.n1,
            "e1ph": self.e1ph,
            "n_V": self.bits.n_v,
            "n_C": self.bits.n_c,
            "n_D": self.bits.n_d,
            "n_t": self.bits.n_t,
            "E_t": self.bits.e_t,
            "N_f": self.n_f,
            "rate": self.rate,
            "plob1": self.plob1,
            "plob2": self.plob2,
            "budget_spent": self.budget_spent,
            "flags": ";".join(sorted(self.flags)),
        }
        return row


def code_bits(counts: CountSource) -> CodeBits:
    """Code-bit counts and their bit-flip error rate.

    n_V, n_C and n_D sum the accepted vv, vz+zv and zz events over modes. With
    expected statistics this is N·p_v²·Σ S_vv(r_j), N·p_z·p_v·Σ P_j·[S_vz+S_zv]
    and N·p_z²·Σ P_j²·S_zz; with observed tallies it is a direct recount.
    """
    n_v = float(np.sum(counts.accepted(WindowClass.VV)))
    n_c = float(np.sum(counts.accepted(WindowClass.VZ) + counts.accepted(WindowClass.ZV)))
    n_d = float(np.sum(counts.accepted(WindowClass.ZZ)))
    n_t = n_v + n_c + n_d
    e_t = (n_v + n_d) / n_t if n_t > 0.0 else 0.0
    return CodeBits(n_v=n_v, n_c=n_c, n_d=n_d, n_t=n_t, e_t=e_t)


def qber_closed_form(
    s_vv: float, s_vz: float, s_zv: float, s_zz: float, p_v: float, p_z: float, m: int
) -> float:
    """QBER with m uniform modes and mode-independent rates.

    (p_v²m²S_vv + p_z²S_zz) / (p_v²m²S_vv + m·p_z·p_v·(S_vz+S_zv) + p_z²S_zz)
    """
    errors = p_v**2 * m**2 * s_vv + p_z**2 * s_zz
    total = errors + m * p_z * p_v * (s_vz + s_zv)
    return errors / total if total > 0.0 else 0.0


def qber_approx(s_vz: float, s_zv: float, s_zz: float, p_v: float, p_z: float, m: int) -> float:
    """Dark-count-free QBER; m = 1 is the protocol without redundant space."""
    return qber_closed_form(0.0, s_vz, s_zv, s_zz, p_v, p_z, m)


def security_overhead(security: SecurityParams) -> float:
    """log₂(2/ε_cor) + 2·log₂(1/(√2·ε_PA·ε̂))."""
    return math.log2(2.0 / security.eps_cor) + 2.0 * math.log2(
        1.0 / (math.sqrt(2.0) * security.eps_pa * security.eps_hat)
    )


def raw_key_length(
    n1: float,
    e1ph: float,
    n_t: float,
    e_t: float,
    security: SecurityParams,
    finite: bool = True,
) -> float:
    """n₁·[1−H(e₁ᵖʰ)] − f·n_t·H(E_t) − overhead, before clamping."""
    length = n1 * (1.0 - binary_entropy(e1ph)) - security.f_ec * n_t * binary_entropy(e_t)
    if finite:
        length -= security_overhead(security)
    return length


def key_length(
    n1: float,
    e1ph: float,
    n_t: float,
    e_t: float,
    security: SecurityParams,
    finite: bool = True,
) -> float:
    """Secret key length N_f, clamped at 0.

    Args:
        n1: Lower bound on untagged bits
        e1ph: Upper bound on their phase-flip error rate
        n_t: Code bits
        e_t: Bit-flip error rate of the code bits
        security: Epsilons and error-correction efficiency
        finite: Include the composable-security overhead
    """
    return max(0.0, raw_key_length(n1, e1ph, n_t, e_t, security, finite))


def plob_bound(channel: ChannelParams, use_detector_efficiency: bool) -> float:
    """Repeaterless capacity −log₂(1−η) of the full Alice–Bob channel.

    The absolute bound uses fiber loss only; the relative bound also folds in
    the detector efficiency.
    """
    eta = 10.0 ** (-channel.alpha * channel.length_km / 10.0)
    if use_detector_efficiency:
        eta *= channel.eta0
    if eta >= 1.0:
        return math.inf
    return -math.log1p(-eta) / math.log(2.0)
