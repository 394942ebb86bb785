"""Closed-form achievable rates of (bursty) amplify-and-forward on symmetric networks."""

import logging
import math
import sys
from typing import NamedTuple, Optional

import numpy as np

from diamondnet.config import resolve_config
from diamondnet.exceptions import InvalidNetworkError
from diamondnet.models import Config, Regime, SymmetricNetwork
from diamondnet.search import refine_grid_maximum

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
HALF_LN_FOUR_THIRDS = 0.5 * math.log(4.0 / 3.0)


class DutyCycleChoice(NamedTuple):
    """Best duty cycle found for a symmetric network."""

    delta: float
    rate: float
    regime: Regime
    prescribed_delta: float
    prescribed_rate: float
    searched_delta: float
    searched_rate: float
    clamped: bool


class LowerBound(NamedTuple):
    """Regime-wise closed-form floor on the bursty amplify-and-forward rate."""

    rate: float
    regime: Regime
    outside_guarantee: bool


def log2_1p(x: float) -> float:
    """log2(1 + x) as a natural log divided by ln 2."""
    return math.log1p(x) / LN2


def _log_snr(n: int, g: float, h: float, log_delta):
    """Natural log of N^2 g h / (delta (delta + g + N h)), safe for extreme gains."""
    log_n, log_g, log_h = math.log(n), math.log(g), math.log(h)
    log_sum = np.logaddexp(np.logaddexp(log_delta, log_g), log_n + log_h)
    return 2.0 * log_n + log_g + log_h - log_delta - log_sum


def _bursty_rate(n: int, g: float, h: float, delta: float) -> float:
    log_snr = _log_snr(n, g, h, math.log(delta))
    return float(0.5 * delta * np.logaddexp(0.0, log_snr) / LN2)


def bursty_rate_array(n: int, g: float, h: float, deltas: np.ndarray) -> np.ndarray:
    """Vectorised bursty amplify-and-forward rate over an array of duty cycles."""
    log_snr = _log_snr(n, g, h, np.log(deltas))
    return 0.5 * deltas * np.logaddexp(0.0, log_snr) / LN2


def _check_delta(delta: float) -> float:
    if not (0.0 < delta <= 1.0):
        raise InvalidNetworkError(f"duty cycle must lie in (0, 1] (got {delta})")
    return delta


def af_rate(net: SymmetricNetwork) -> float:
    """Rate of plain amplify-and-forward, 1/2 log(1 + N^2 g h / (1 + g + N h))."""
    net.require_finite()
    return _bursty_rate(net.n_relays, net.g, net.h, 1.0)


def bursty_af_rate(net: SymmetricNetwork, delta: float) -> float:
    """Rate of bursty amplify-and-forward with duty cycle delta in (0, 1]."""
    net.require_finite()
    return _bursty_rate(net.n_relays, net.g, net.h, _check_delta(delta))


def df_rate(net: SymmetricNetwork) -> float:
    """Decode-and-forward comparison rate 1/2 log(1 + min{g, N^2 h})."""
    net.require_finite()
    n = net.n_relays
    return 0.5 * log2_1p(min(net.g, n * n * net.h))


def _classify(n: int, g: float, h: float) -> Regime:
    if max(g, n * h) >= 1.0:
        return Regime.HIGH
    if g <= h:
        return Regime.BC_LIMITED
    if g < n * n * h:
        if n * math.sqrt(g) * math.sqrt(h) >= 1.0:
            return Regime.PRODUCT_HIGH
        return Regime.PRODUCT_LOW
    return Regime.MAC_LIMITED


def classify_regime(net: SymmetricNetwork) -> Regime:
    """First matching case, in theorem order, for finite gains."""
    net.require_finite()
    return _classify(net.n_relays, net.g, net.h)


def regime_condition(regime: Regime, net: SymmetricNetwork) -> bool:
    """Evaluate the defining condition of one regime, independent of case order."""
    n, g, h = net.n_relays, net.g, net.h
    low = max(g, n * h) < 1.0
    product = h < g < n * n * h
    coherent = n * math.sqrt(g) * math.sqrt(h)
    if regime is Regime.HIGH:
        return max(g, n * h) >= 1.0
    if regime is Regime.BC_LIMITED:
        return low and g <= h
    if regime is Regime.PRODUCT_HIGH:
        return low and product and coherent >= 1.0
    if regime is Regime.PRODUCT_LOW:
        return low and product and coherent < 1.0
    return low and g >= n * n * h


def prescribed_duty_cycle(net: SymmetricNetwork) -> tuple[float, bool]:
    """
    Duty cycle prescribed by the regime, clamped into (0, 1].

    Returns:
        Tuple of (delta, clamped)
    """
    net.require_finite()
    n, g, h = net.n_relays, net.g, net.h
    regime = _classify(n, g, h)
    if regime is Regime.BC_LIMITED:
        delta = n * g
    elif regime is Regime.PRODUCT_LOW:
        delta = n * math.sqrt(g) * math.sqrt(h)
    elif regime is Regime.MAC_LIMITED:
        delta = n * n * h
    else:
        delta = 1.0

    clamped = False
    if delta > 1.0:
        delta, clamped = 1.0, True
    elif delta <= 0.0:
        delta, clamped = sys.float_info.min, True
    if clamped:
        logger.debug(f"Prescribed duty cycle clamped to {delta} for {regime.value} at {net}")
    return delta, clamped


def optimal_duty_cycle(
    net: SymmetricNetwork, config: Optional[Config] = None
) -> DutyCycleChoice:
    """
    Best bursty amplify-and-forward duty cycle.

    Evaluates the rate on a log-uniform grid of duty cycles, refines the best
    bracket by golden-section search in log(delta), and keeps whichever of the
    searched and the regime-prescribed duty cycles gives the larger rate.

    Args:
        net: Symmetric network with finite gains
        config: Search settings (defaults if None)

    Returns:
        DutyCycleChoice with the chosen delta and rate plus both candidates
    """
    net.require_finite()
    cfg = resolve_config(config)
    n, g, h = net.n_relays, net.g, net.h

    u_grid = np.linspace(math.log(cfg.delta_grid_min), 0.0, cfg.delta_grid_points)
    deltas = np.exp(u_grid)
    deltas[-1] = 1.0
    values = bursty_rate_array(n, g, h, deltas)

    def objective(u: float) -> float:
        return _bursty_rate(n, g, h, min(math.exp(u), 1.0))

    best = refine_grid_maximum(objective, u_grid, values, cfg.delta_rel_tol)
    searched_delta = min(math.exp(best.x), 1.0)

    prescribed_delta, clamped = prescribed_duty_cycle(net)
    prescribed_rate = _bursty_rate(n, g, h, prescribed_delta)

    if prescribed_rate >= best.value:
        delta, rate = prescribed_delta, prescribed_rate
    else:
        delta, rate = searched_delta, best.value

    return DutyCycleChoice(
        delta=delta,
        rate=rate,
        regime=_classify(n, g, h),
        prescribed_delta=prescribed_delta,
        prescribed_rate=prescribed_rate,
        searched_delta=searched_delta,
        searched_rate=best.value,
        clamped=clamped,
    )


def thm1_lower_bound(net: SymmetricNetwork) -> LowerBound:
    """Regime-wise closed-form floor on the optimal bursty amplify-and-forward rate."""
    net.require_finite()
    n, g, h = net.n_relays, net.g, net.h
    regime = _classify(n, g, h)

    if regime is Regime.HIGH:
        rate = 0.5 * log2_1p(n * min(g, n * h) / 3.0)
    elif regime is Regime.BC_LIMITED:
        rate = HALF_LN_FOUR_THIRDS * log2_1p(n * g)
    elif regime is Regime.PRODUCT_HIGH:
        rate = 0.5 * log2_1p(n * n * g * h / 3.0)
    elif regime is Regime.PRODUCT_LOW:
        rate = HALF_LN_FOUR_THIRDS * log2_1p(n * math.sqrt(g) * math.sqrt(h))
    else:
        rate = HALF_LN_FOUR_THIRDS * log2_1p(n * n * h)

    outside = n < 2
    if outside:
        logger.warning(f"Lower bound evaluated at N={n}, outside the N >= 2 guarantee")
    return LowerBound(rate=rate, regime=regime, outside_guarantee=outside)
