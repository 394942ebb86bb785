"""Assembly and certification of per-network bound reports."""

import logging
import math
from typing import Literal, Optional

import pandas as pd

from diamondnet.achievability import af_rate, df_rate, optimal_duty_cycle, thm1_lower_bound
from diamondnet.config import resolve_config
from diamondnet.converse import (
    bc_mac_bound,
    independent_cuts_bound,
    rho_cutset_bound,
    simplified_cutset_bound,
    thm2_upper_bound,
)
from diamondnet.exceptions import InvalidNetworkError
from diamondnet.models import (
    ADDITIVE_GAP_BOUND,
    MULTIPLICATIVE_RATIO_BOUND,
    BoundReport,
    Config,
    SearchResolution,
    SymmetricNetwork,
)

logger = logging.getLogger(__name__)

CHAIN_SLACK = 1e-6

Family = Literal["additive", "multiplicative"]

COUNTEREXAMPLE_EXPONENTS: dict[str, tuple[float, float]] = {
    "additive": (-5.0 / 8.0, -9.0 / 8.0),
    "multiplicative": (-2.0, -3.0),
}


def build_bound_report(
    net: SymmetricNetwork, config: Optional[Config] = None, research: bool = True
) -> BoundReport:
    """
    Evaluate every symmetric bound for one network.

    Args:
        net: Symmetric network with finite gains
        config: Search settings (defaults if None)
        research: Also run the numeric duty-cycle and correlation searches

    Returns:
        BoundReport; the research fields stay None when research is False
    """
    cfg = resolve_config(config)
    net.require_finite()

    lower = thm1_lower_bound(net)
    upper = thm2_upper_bound(net)
    notes = [
        f"pseudo-inverse relative cutoff {cfg.pinv_rcond:g} (oracle only)",
        "rho_cutset is the best grid-refined value, a lower estimate of the supremum",
    ]
    if lower.outside_guarantee:
        notes.append("N = 1 lies outside the N >= 2 guarantee of the closed forms")

    r_bursty = delta_star = rho_value = rho_star = None
    if research:
        choice = optimal_duty_cycle(net, cfg)
        cutset = rho_cutset_bound(net, cfg)
        r_bursty, delta_star = choice.rate, choice.delta
        rho_value, rho_star = cutset.value, cutset.rho
        if choice.clamped:
            notes.append("prescribed duty cycle clamped into (0, 1]")

    return BoundReport(
        n_relays=net.n_relays,
        g=net.g,
        h=net.h,
        regime=lower.regime,
        r_af=af_rate(net),
        r_bursty_best=r_bursty,
        delta_star=delta_star,
        thm1_lower=lower.rate,
        df_rate=df_rate(net),
        bc_mac=bc_mac_bound(net),
        independent_cuts=independent_cuts_bound(net),
        simplified_cutset=simplified_cutset_bound(net),
        rho_cutset=rho_value,
        rho_star=rho_star,
        thm2_upper=upper.rate,
        additive_gap=upper.rate - lower.rate,
        multiplicative_ratio=upper.rate / lower.rate if lower.rate > 0 else math.inf,
        search_resolution=SearchResolution.from_config(cfg, notes),
    )


def check_report(report: BoundReport, config: Optional[Config] = None) -> list[str]:
    """
    Return the certificate and ordering violations of a report (empty when it passes).

    The gap constants use slack 1e-9 (additive) and a relative ratio slack;
    comparisons against the numeric searches use 1e-6.
    """
    cfg = resolve_config(config)
    slack = cfg.ordering_slack
    violations: list[str] = []

    def require(ok: bool, message: str) -> None:
        if not ok:
            violations.append(message)

    require(
        report.additive_gap <= ADDITIVE_GAP_BOUND + slack,
        f"additive gap {report.additive_gap:.12g} > {ADDITIVE_GAP_BOUND:.12g}",
    )
    require(
        report.multiplicative_ratio <= MULTIPLICATIVE_RATIO_BOUND * (1.0 + cfg.ratio_rel_slack),
        f"multiplicative ratio {report.multiplicative_ratio:.12g} > "
        f"{MULTIPLICATIVE_RATIO_BOUND:.12g}",
    )
    require(report.thm1_lower <= report.thm2_upper + slack, "thm1_lower exceeds thm2_upper")
    require(
        report.independent_cuts <= report.bc_mac + slack, "independent_cuts exceeds bc_mac"
    )

    if report.r_bursty_best is not None:
        require(
            report.thm1_lower <= report.r_bursty_best + slack,
            "thm1_lower exceeds r_bursty_best",
        )
        require(
            report.r_bursty_best <= report.independent_cuts + slack,
            "r_bursty_best exceeds independent_cuts",
        )
    if report.rho_cutset is not None:
        require(
            report.rho_cutset <= report.independent_cuts + slack,
            "rho_cutset exceeds independent_cuts",
        )
        require(
            report.rho_cutset <= report.simplified_cutset + slack,
            "rho_cutset exceeds simplified_cutset",
        )
        require(
            report.thm1_lower <= report.rho_cutset + CHAIN_SLACK,
            "thm1_lower exceeds rho_cutset",
        )
        if report.r_bursty_best is not None:
            require(
                report.r_bursty_best <= report.rho_cutset + CHAIN_SLACK,
                "r_bursty_best exceeds rho_cutset",
            )

    for message in violations:
        logger.error(f"N={report.n_relays}, g={report.g:g}, h={report.h:g}: {message}")
    return violations


def counterexample_network(family: Family, n_relays: int) -> SymmetricNetwork:
    """Gains of the two scaling families where the min-cut bound is loose."""
    if family not in COUNTEREXAMPLE_EXPONENTS:
        raise InvalidNetworkError(f"unknown counterexample family: {family}")
    g_exp, h_exp = COUNTEREXAMPLE_EXPONENTS[family]
    return SymmetricNetwork(
        n_relays=n_relays, g=float(n_relays) ** g_exp, h=float(n_relays) ** h_exp
    )


def counterexample_table(
    family: Family,
    n_list: list[int],
    config: Optional[Config] = None,
    cutset: bool = True,
) -> pd.DataFrame:
    """
    Min-cut bound against the refined bounds along a scaling family.

    additive uses g = N^(-5/8), h = N^(-9/8); multiplicative uses
    g = N^(-2), h = N^(-3).

    Returns:
        DataFrame with one row per N: gains, bc_mac, rho_cutset (None when
        cutset is False), thm2_upper, difference and ratio of bc_mac to thm2_upper
    """
    cfg = resolve_config(config)
    if any(n < 2 for n in n_list):
        raise InvalidNetworkError("counterexample relay counts must be >= 2")

    rows = []
    for n in n_list:
        net = counterexample_network(family, n)
        naive = bc_mac_bound(net)
        refined = thm2_upper_bound(net)
        rows.append(
            {
                "n": n,
                "g": net.g,
                "h": net.h,
                "regime": refined.regime.value,
                "bc_mac": naive,
                "rho_cutset": rho_cutset_bound(net, cfg).value if cutset else None,
                "thm2_upper": refined.rate,
                "difference": naive - refined.rate,
                "ratio": naive / refined.rate,
            }
        )
        logger.debug(f"{family} counterexample N={n}: difference {naive - refined.rate:.6g}")

    return pd.DataFrame(rows)
