"""
Monte Carlo simulation of one amplify-and-forward block.

Relay n receives sqrt(g) X + Z_n and forwards X_n = alpha (sqrt(g) X + Z_n).
The destination sees sum_n sqrt(h) X_n + Z, which splits into the coherent
signal alpha N sqrt(gh) X and the noise alpha sqrt(h) sum_n Z_n + Z. The two
paths are tracked separately so the output SNR is a ratio of sample powers.
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from diamondnet.config import resolve_config
from diamondnet.exceptions import InvalidNetworkError
from diamondnet.models import Config, SymmetricNetwork

logger = logging.getLogger(__name__)

POWER_SLACK = 1e-9
MIN_VALIDATION_SYMBOLS = 10_000
RELAY_BLOCK_ELEMENTS = 1 << 20


class SimConfig(BaseModel):
    """One simulated block: network, amplification, length and seed."""

    net: SymmetricNetwork
    alpha: float = Field(ge=0)
    num_symbols: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)

    @model_validator(mode="after")
    def _power_feasible(self) -> "SimConfig":
        self.net.require_finite()
        limit = 1.0 / (1.0 + self.net.g)
        if self.alpha * self.alpha > limit + POWER_SLACK:
            raise ValueError(
                f"alpha^2 = {self.alpha ** 2:.6g} exceeds the relay power limit "
                f"1/(1+g) = {limit:.6g}"
            )
        return self


class SimResult(BaseModel):
    """Sample estimates with standard errors (snr, relay power, source power)."""

    est_output_snr: float
    est_relay_power: float
    est_source_power: float
    std_errors: tuple[float, float, float]
    num_symbols: int
    seed: int


class SnrValidation(NamedTuple):
    """Closed-form SNR and relay power against their Monte Carlo estimates."""

    closed_snr: float
    est_snr: float
    z_score: float
    closed_relay_power: float
    relay_z_score: float
    result: SimResult


def max_alpha(net: SymmetricNetwork) -> float:
    """Largest amplification meeting the unit relay power constraint, 1/sqrt(1+g)."""
    net.require_finite()
    return 1.0 / math.sqrt(1.0 + net.g)


def closed_form_snr(net: SymmetricNetwork, alpha: float) -> float:
    """alpha^2 N^2 g h / (1 + alpha^2 N h)."""
    net.require_finite()
    if alpha < 0 or math.isnan(alpha):
        raise InvalidNetworkError(f"alpha must be nonnegative (got {alpha})")
    a2 = alpha * alpha
    n = net.n_relays
    return a2 * n * n * net.g * net.h / (1.0 + a2 * n * net.h)


def bursty_equivalent(net: SymmetricNetwork, delta: float) -> SymmetricNetwork:
    """Network with gains g/delta, h/delta seen during the active fraction of a bursty scheme."""
    net.require_finite()
    if not (0.0 < delta <= 1.0):
        raise InvalidNetworkError(f"duty cycle must lie in (0, 1] (got {delta})")
    return SymmetricNetwork(n_relays=net.n_relays, g=net.g / delta, h=net.h / delta)


def _shard_sums(cfg: SimConfig, shard: int, size: int) -> np.ndarray:
    """First and second moments of signal power, noise power, relay power and source power."""
    net = cfg.net
    n = net.n_relays
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, shard])))

    x = rng.standard_normal(size)
    noise_sum = np.zeros(size)
    relay_power = np.zeros(size)
    sqrt_g = math.sqrt(net.g)
    block = max(1, RELAY_BLOCK_ELEMENTS // size)
    for start in range(0, n, block):
        z = rng.standard_normal((min(block, n - start), size))
        noise_sum += z.sum(axis=0)
        relay_power += ((cfg.alpha * (sqrt_g * x + z)) ** 2).sum(axis=0)
    z_dest = rng.standard_normal(size)

    signal = cfg.alpha * n * math.sqrt(net.g * net.h) * x
    noise = cfg.alpha * math.sqrt(net.h) * noise_sum + z_dest
    a = signal * signal
    b = noise * noise
    r = relay_power / n
    x2 = x * x
    return np.array(
        [
            a.sum(),
            b.sum(),
            (a * a).sum(),
            (b * b).sum(),
            (a * b).sum(),
            r.sum(),
            (r * r).sum(),
            x2.sum(),
            (x2 * x2).sum(),
        ]
    )


def _mean_and_se(total: float, total_sq: float, count: int) -> tuple[float, float]:
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return mean, math.sqrt(var / count)


def simulate_af(cfg: SimConfig, config: Optional[Config] = None) -> SimResult:
    """
    Simulate one amplify-and-forward block of cfg.num_symbols symbols.

    Symbols are drawn in fixed-size shards, shard i from a Philox stream seeded
    by (seed, i), and the shard sums are added in shard order, so a seed always
    reproduces the same result.

    Args:
        cfg: Network, amplification, block length and seed
        config: Numeric settings (defaults if None)

    Returns:
        SimResult with the SNR, relay power and source power estimates
    """
    settings = resolve_config(config)
    shard_size = settings.sim_shard_symbols
    count = cfg.num_symbols

    totals = np.zeros(9)
    for shard, start in enumerate(range(0, count, shard_size)):
        totals += _shard_sums(cfg, shard, min(shard_size, count - start))

    sum_a, sum_b, sum_aa, sum_bb, sum_ab, sum_r, sum_rr, sum_x, sum_xx = totals
    mean_a = sum_a / count
    mean_b = sum_b / count
    snr = mean_a / mean_b

    # Delta method for a ratio of sample means
    var_a = max(sum_aa / count - mean_a * mean_a, 0.0)
    var_b = max(sum_bb / count - mean_b * mean_b, 0.0)
    cov_ab = sum_ab / count - mean_a * mean_b
    var_snr = (var_a - 2.0 * snr * cov_ab + snr * snr * var_b) / (mean_b * mean_b * count)
    snr_se = math.sqrt(max(var_snr, 0.0))

    relay_power, relay_se = _mean_and_se(sum_r, sum_rr, count)
    source_power, source_se = _mean_and_se(sum_x, sum_xx, count)

    logger.debug(
        f"Simulated {count} symbols, seed {cfg.seed}: snr={snr:.6g}, relay={relay_power:.6g}"
    )
    return SimResult(
        est_output_snr=float(snr),
        est_relay_power=float(relay_power),
        est_source_power=float(source_power),
        std_errors=(snr_se, relay_se, source_se),
        num_symbols=count,
        seed=cfg.seed,
    )


def _z_score(estimate: float, expected: float, std_error: float) -> float:
    if std_error > 0.0:
        return (estimate - expected) / std_error
    return 0.0 if estimate == expected else math.copysign(math.inf, estimate - expected)


def validate_af_snr(cfg: SimConfig, config: Optional[Config] = None) -> SnrValidation:
    """
    Compare the simulated output SNR and relay power with their closed forms.

    With alpha = 0 both standard errors vanish; the z-scores are then 0 when
    the estimates match exactly and infinite otherwise.
    """
    if cfg.num_symbols < MIN_VALIDATION_SYMBOLS:
        raise InvalidNetworkError(
            f"validation needs at least {MIN_VALIDATION_SYMBOLS} symbols (got {cfg.num_symbols})"
        )
    result = simulate_af(cfg, config)
    closed = closed_form_snr(cfg.net, cfg.alpha)
    relay_closed = cfg.alpha * cfg.alpha * (1.0 + cfg.net.g)
    return SnrValidation(
        closed_snr=closed,
        est_snr=result.est_output_snr,
        z_score=_z_score(result.est_output_snr, closed, result.std_errors[0]),
        closed_relay_power=relay_closed,
        relay_z_score=_z_score(result.est_relay_power, relay_closed, result.std_errors[1]),
        result=result,
    )
