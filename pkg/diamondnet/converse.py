"""Capacity upper bounds for symmetric diamond networks."""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from diamondnet.achievability import LN2, _classify, log2_1p
from diamondnet.config import resolve_config
from diamondnet.exceptions import InvalidNetworkError
from diamondnet.models import Config, Regime, SymmetricNetwork
from diamondnet.search import refine_grid_maximum

logger = logging.getLogger(__name__)


class UpperBound(NamedTuple):
    """Regime-wise closed-form capacity upper bound."""

    rate: float
    regime: Regime
    outside_guarantee: bool


class CutObjective(NamedTuple):
    """Inner minimum over cut indices at a fixed correlation."""

    value: float
    cut_index: int


class CutsetBound(NamedTuple):
    """Numerically maximized correlation-parameterized cut-set bound."""

    value: float
    rho: float
    cut_index: int
    grid_points: int
    rho_tol: float
    refined: bool


class CutWitness(NamedTuple):
    """Single cut index used to derive a product-regime bound."""

    cut_index: int
    value: float
    regime: Regime


def _check_eta_domain(rho: float, n_relays: int) -> None:
    if n_relays < 2:
        raise InvalidNetworkError(f"eta needs N >= 2 (got {n_relays})")
    lower = -1.0 / (n_relays - 1)
    if math.isnan(rho) or rho < lower or rho > 1.0:
        raise InvalidNetworkError(
            f"correlation {rho} outside [{lower:.6g}, 1]; equicorrelated covariance not PSD"
        )


def eta(rho: float, n: int, n_relays: int) -> float:
    """
    Coherent power 1^T Q_{[n]|[n]^c} 1 of n source-side relays under correlation rho.

    Boundary cases use their limit values: 0 for n = 0, N(1 + (N-1)rho) for
    n = N, and 0 for rho = 1 with 0 < n < N.
    """
    _check_eta_domain(rho, n_relays)
    if not 0 <= n <= n_relays:
        raise InvalidNetworkError(f"cut index {n} outside [0, {n_relays}]")

    if n == 0:
        return 0.0
    if n == n_relays:
        return n_relays * (1.0 + (n_relays - 1) * rho)
    if rho == 1.0:
        return 0.0
    m = n_relays - n
    value = n * (1.0 + (n - 1) * rho - n * m * rho * rho / (1.0 + (m - 1) * rho))
    return max(value, 0.0)


def _eta_rows(rhos: np.ndarray, n_relays: int) -> np.ndarray:
    """eta for a column of rho values (< 1) against every cut index 0..N."""
    n = np.arange(n_relays + 1, dtype=float)
    m = n_relays - n
    r = rhos[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = n * (1.0 + (n - 1.0) * r - n * m * r * r / (1.0 + (m - 1.0) * r))
    values[:, 0] = 0.0
    values[:, -1] = n_relays * (1.0 + (n_relays - 1) * rhos)
    return np.maximum(values, 0.0)


def eta_profile(rho: float, n_relays: int) -> np.ndarray:
    """All N+1 values eta(rho, 0..N) at once."""
    _check_eta_domain(rho, n_relays)
    if rho == 1.0:
        values = np.zeros(n_relays + 1)
        values[-1] = float(n_relays * n_relays)
        return values
    return _eta_rows(np.array([rho]), n_relays)[0]


def _cut_terms(n_relays: int, g: float) -> np.ndarray:
    n = np.arange(n_relays + 1, dtype=float)
    return 0.5 * np.log1p((n_relays - n) * g) / LN2


def cutset_objective(net: SymmetricNetwork, rho: float) -> CutObjective:
    """Inner minimum over n of 1/2 log(1 + (N-n) g) + 1/2 log(1 + eta(rho, n) h)."""
    net.require_finite()
    totals = _cut_terms(net.n_relays, net.g) + 0.5 * np.log1p(
        eta_profile(rho, net.n_relays) * net.h
    ) / LN2
    index = int(np.argmin(totals))
    return CutObjective(value=float(totals[index]), cut_index=index)


def bc_mac_bound(net: SymmetricNetwork) -> float:
    """Minimum of the broadcast and multiple-access cuts."""
    n = net.n_relays
    if math.isinf(net.g):
        return 0.5 * log2_1p(n * n * net.h)
    if math.isinf(net.h):
        return 0.5 * log2_1p(n * net.g)
    return 0.5 * log2_1p(n * min(net.g, n * net.h))


def independent_cuts_bound(net: SymmetricNetwork) -> float:
    """Cut-set bound with the max and min interchanged: min_n of the two per-cut capacities."""
    net.require_finite()
    n_relays = net.n_relays
    n = np.arange(n_relays + 1, dtype=float)
    totals = _cut_terms(n_relays, net.g) + 0.5 * np.log1p(n * n * net.h) / LN2
    return float(totals.min())


def simplified_cutset_bound(net: SymmetricNetwork) -> float:
    """Weakened refined bound with eta(rho, n) replaced by N^2 / (N - n); n = N is excluded."""
    net.require_finite()
    n_relays = net.n_relays
    m = n_relays - np.arange(n_relays, dtype=float)
    totals = (
        0.5 * np.log1p(m * net.g) / LN2
        + 0.5 * np.log1p(n_relays * n_relays * net.h / m) / LN2
    )
    return float(totals.min())


def rho_cutset_bound(net: SymmetricNetwork, config: Optional[Config] = None) -> CutsetBound:
    """
    Refined cut-set bound, maximized over the common relay correlation rho in [0, 1).

    The inner minimum over cut indices is exact; the outer supremum is taken on a
    uniform grid up to rho_cap and refined by golden-section search. Ties on the
    grid go to the lowest rho. For N = 1 the bound is the single-relay min-cut.

    Args:
        net: Symmetric network with finite gains
        config: Search settings (defaults if None)

    Returns:
        CutsetBound with the value, maximizing rho and minimizing cut index
    """
    net.require_finite()
    cfg = resolve_config(config)
    n_relays = net.n_relays

    if n_relays == 1:
        value = bc_mac_bound(net)
        cut_index = 0 if net.g <= net.h else 1
        return CutsetBound(value, 0.0, cut_index, 0, cfg.rho_tol, False)

    rhos = np.linspace(0.0, cfg.rho_cap, cfg.rho_grid_points)
    bc_terms = _cut_terms(n_relays, net.g)
    values = np.empty_like(rhos)
    rows = max(1, cfg.rho_chunk_elements // (n_relays + 1))
    for start in range(0, len(rhos), rows):
        chunk = rhos[start : start + rows]
        totals = bc_terms + 0.5 * np.log1p(_eta_rows(chunk, n_relays) * net.h) / LN2
        values[start : start + rows] = totals.min(axis=1)

    def objective(rho: float) -> float:
        return cutset_objective(net, min(max(rho, 0.0), cfg.rho_cap)).value

    best = refine_grid_maximum(objective, rhos, values, cfg.rho_tol)
    rho_star = min(max(best.x, 0.0), cfg.rho_cap)
    cut_index = cutset_objective(net, rho_star).cut_index

    logger.debug(
        f"rho cut-set bound N={n_relays}: {best.value:.12g} at rho={rho_star:.9f}, n={cut_index}"
    )
    return CutsetBound(
        value=best.value,
        rho=rho_star,
        cut_index=cut_index,
        grid_points=len(rhos),
        rho_tol=cfg.rho_tol,
        refined=best.refined,
    )


def thm2_upper_bound(net: SymmetricNetwork) -> UpperBound:
    """
    Regime-wise closed-form upper bound on capacity.

    An infinite gain reduces the bound to the remaining single cut
    (h = inf: 1/2 log(1 + N g); g = inf: 1/2 log(1 + N^2 h)).
    """
    n, g, h = net.n_relays, net.g, net.h
    outside = n < 2

    if not net.is_finite:
        return UpperBound(bc_mac_bound(net), Regime.HIGH, outside)

    regime = _classify(n, g, h)
    if regime is Regime.HIGH:
        rate = 0.5 * log2_1p(n * min(g, n * h))
    elif regime is Regime.BC_LIMITED:
        rate = 0.5 * log2_1p(n * g)
    elif regime is Regime.PRODUCT_HIGH:
        rate = 0.5 * log2_1p(2.0 * n * n * g * h) + 0.5
    elif regime is Regime.PRODUCT_LOW:
        rate = log2_1p(2.0 * n * math.sqrt(g) * math.sqrt(h))
    else:
        rate = 0.5 * log2_1p(n * n * h)
    return UpperBound(rate, regime, outside)


def theorem_cut_witness(net: SymmetricNetwork) -> Optional[CutWitness]:
    """
    The single cut behind the product-regime upper bounds.

    Uses N - n = ceil(N^2 h) when N sqrt(gh) >= 1 and N - n = ceil(N sqrt(h/g))
    otherwise, and evaluates the simplified cut-set bound at that n. Returns
    None outside the two product regimes.
    """
    net.require_finite()
    n_relays, g, h = net.n_relays, net.g, net.h
    regime = _classify(n_relays, g, h)
    if regime is Regime.PRODUCT_HIGH:
        m = math.ceil(n_relays * n_relays * h)
    elif regime is Regime.PRODUCT_LOW:
        m = math.ceil(n_relays * math.sqrt(h / g))
    else:
        return None

    m = min(max(m, 1), n_relays)
    value = 0.5 * log2_1p(m * g) + 0.5 * log2_1p(n_relays * n_relays * h / m)
    return CutWitness(cut_index=n_relays - m, value=value, regime=regime)
