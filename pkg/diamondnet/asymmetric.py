"""Relay partitioning, relay selection and the aggregate upper bound for asymmetric networks."""

import logging
import math
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from diamondnet.achievability import log2_1p, optimal_duty_cycle
from diamondnet.config import resolve_config
from diamondnet.converse import bc_mac_bound, thm2_upper_bound
from diamondnet.exceptions import (
    CertificateViolationError,
    InvalidNetworkError,
    NumericalError,
    PartitionError,
)
from diamondnet.models import AsymmetricNetwork, Config, SymmetricNetwork

logger = logging.getLogger(__name__)

RATIO_CONSTANT = 112
STAR_REL_TOL = 1e-12
DOMINANCE_REL_SLACK = 1e-9


def levels(n_relays: int) -> int:
    """Number of quantization levels minus one, floor(3 log2 N)."""
    return int(math.floor(3.0 * math.log2(n_relays)))


def class_count(n_relays: int) -> int:
    """(L+1)^2 + 2(L+1) + 2: the cells plus both overload sets."""
    width = levels(n_relays) + 1
    return width * width + 2 * width + 2


class StarGains(BaseModel):
    """Dominance-adjusted maximal gains anchoring the quantization grid."""

    n_relays: int = Field(ge=1)
    g_star: float = Field(gt=0)
    h_star: float = Field(gt=0)
    g_witness: int
    h_witness: int

    @model_validator(mode="after")
    def _comparable(self) -> "StarGains":
        n_sq = self.n_relays * self.n_relays
        if self.h_star > self.g_star:
            raise ValueError(f"h* = {self.h_star} exceeds g* = {self.g_star}")
        if self.h_star < (self.g_star / n_sq) * (1.0 - STAR_REL_TOL):
            raise ValueError(f"h* = {self.h_star} below g*/N^2 = {self.g_star / n_sq}")
        return self


class Partition(BaseModel):
    """Disjoint class decomposition of the relay indices (1-based)."""

    n_relays: int
    t1: list[int]
    t2: list[int]
    t1_ell: list[list[int]]
    t2_ell: list[list[int]]
    s_kl: list[list[list[int]]]
    L: int
    L_tilde: int

    def classes(self) -> list[tuple[str, list[int]]]:
        """Quantized classes in selection order: T1_0..T1_L, T2_0..T2_L, S_0_0..S_L_L."""
        ordered = [(f"T1_{ell}", members) for ell, members in enumerate(self.t1_ell)]
        ordered += [(f"T2_{ell}", members) for ell, members in enumerate(self.t2_ell)]
        ordered += [
            (f"S_{k}_{ell}", members)
            for k, row in enumerate(self.s_kl)
            for ell, members in enumerate(row)
        ]
        return ordered

    def nonempty_classes(self) -> list[tuple[str, list[int]]]:
        return [(label, members) for label, members in self.classes() if members]

    def sizes(self) -> dict[str, int]:
        """Sizes of the overload sets and every nonempty quantized class."""
        summary = {"T1": len(self.t1), "T2": len(self.t2)}
        summary.update({label: len(members) for label, members in self.nonempty_classes()})
        return summary

    def label_of(self, relay: int) -> str:
        if relay in self.t1:
            return "T1"
        if relay in self.t2:
            return "T2"
        for label, members in self.classes():
            if relay in members:
                return label
        raise PartitionError(f"relay {relay} is not covered by the partition")

    def check_cover(self) -> None:
        """Raise PartitionError unless the sets are disjoint and cover 1..N."""
        seen: list[int] = list(self.t1) + list(self.t2)
        for _, members in self.classes():
            seen.extend(members)
        if len(seen) != len(set(seen)):
            raise PartitionError("partition sets overlap")
        if sorted(seen) != list(range(1, self.n_relays + 1)):
            missing = sorted(set(range(1, self.n_relays + 1)) - set(seen))
            raise PartitionError(f"relays not covered by the partition: {missing}")


class ClassRate(BaseModel):
    """Rates of bursty amplify-and-forward restricted to one class."""

    class_id: str
    size: int
    certified_g: float
    certified_h: float
    delta: float
    certified: float
    empirical_delta: float
    empirical: float


class Selection(BaseModel):
    """Best class for relay selection, plus every evaluated class."""

    class_id: str
    members: list[int]
    delta: float
    certified: float
    empirical: float
    outside_guarantee: bool
    evaluated: list[ClassRate]


class SingleRelayRate(BaseModel):
    """Rate reachable with one relay alone, as used to dominate an overload set."""

    rate: float
    relay: int
    class_id: str


class SingleRelayRates(BaseModel):
    source_side: SingleRelayRate
    destination_side: SingleRelayRate


class ParallelUpperBound(BaseModel):
    """Capacity bound of the parallel subnetworks, term by term."""

    total: float
    t1_term: float
    t2_term: float
    class_bounds: dict[str, float]
    largest_class_bound: float
    aggregate: float


class RatioCertificate(BaseModel):
    """Upper bound over certified relay-selection rate, against 112 L~^2."""

    ratio: float
    bound: float
    aggregate_upper: float
    certified: float
    k_estimate: float


def _require_pair(net: AsymmetricNetwork) -> int:
    n_relays = net.n_relays
    if n_relays < 2:
        raise InvalidNetworkError(f"asymmetric pipeline needs N >= 2 (got {n_relays})")
    return n_relays


def star_gains(net: AsymmetricNetwork) -> StarGains:
    """g* = max_n min{g_n, N^2 h_n} and h* = max_n min{h_n, g_n}, with the maximizing relays."""
    n_relays = net.n_relays
    n_sq = n_relays * n_relays
    g_terms = [min(g, n_sq * h) for g, h in zip(net.gains_g, net.gains_h)]
    h_terms = [min(h, g) for g, h in zip(net.gains_g, net.gains_h)]
    g_index = max(range(n_relays), key=lambda i: (g_terms[i], -i))
    h_index = max(range(n_relays), key=lambda i: (h_terms[i], -i))
    return StarGains(
        n_relays=n_relays,
        g_star=g_terms[g_index],
        h_star=h_terms[h_index],
        g_witness=g_index + 1,
        h_witness=h_index + 1,
    )


def _cell(value: float, top: float, last: int) -> Optional[int]:
    """Index ell with value in (2^-(ell+1) top, 2^-ell top], or None outside levels 0..last."""
    for ell in range(last + 1):
        if math.ldexp(top, -ell - 1) < value <= math.ldexp(top, -ell):
            return ell
    return None


def partition(net: AsymmetricNetwork) -> Partition:
    """
    Split the relays into overload sets and dyadic gain classes.

    Each set excludes every set defined before it, in the order T1, T2,
    T1_ell, T2_ell, S_k_ell. Cells are half-open, (2^-(l+1) x*, 2^-l x*].

    Raises:
        InvalidNetworkError: N < 2
        PartitionError: a relay that no set accepts
    """
    n_relays = _require_pair(net)
    star = star_gains(net)
    g_star, h_star = star.g_star, star.h_star
    last = levels(n_relays)
    n_sq = n_relays * n_relays
    n_cube = n_sq * n_relays

    t1: list[int] = []
    t2: list[int] = []
    t1_ell: list[list[int]] = [[] for _ in range(last + 1)]
    t2_ell: list[list[int]] = [[] for _ in range(last + 1)]
    s_kl: list[list[list[int]]] = [[[] for _ in range(last + 1)] for _ in range(last + 1)]

    for index, (g, h) in enumerate(zip(net.gains_g, net.gains_h)):
        relay = index + 1
        if g <= g_star / n_cube:
            t1.append(relay)
            continue
        if h <= h_star / n_cube:
            t2.append(relay)
            continue

        g_cell = _cell(g, g_star, last)
        h_cell = _cell(h, h_star, last)
        if g_cell is not None and h >= g:
            t1_ell[g_cell].append(relay)
        elif h_cell is not None and g >= n_sq * h:
            t2_ell[h_cell].append(relay)
        elif g_cell is not None and h_cell is not None:
            s_kl[g_cell][h_cell].append(relay)
        else:
            raise PartitionError(f"relay {relay} (g={g}, h={h}) falls outside every class")

    result = Partition(
        n_relays=n_relays,
        t1=t1,
        t2=t2,
        t1_ell=t1_ell,
        t2_ell=t2_ell,
        s_kl=s_kl,
        L=last,
        L_tilde=class_count(n_relays),
    )
    result.check_cover()
    return result


def _certified_gains(
    label: str, n_relays: int, g_star: float, h_star: float
) -> tuple[float, float]:
    kind, *cells = label.split("_")
    if kind == "T1":
        g = math.ldexp(g_star, -int(cells[0]) - 1)
        return g, g
    if kind == "T2":
        h = math.ldexp(h_star, -int(cells[0]) - 1)
        return n_relays * n_relays * h, h
    k, ell = int(cells[0]), int(cells[1])
    return math.ldexp(g_star, -k - 1), math.ldexp(h_star, -ell - 1)


def _upper_gains(
    label: str, g_star: float, h_star: float, l_tilde: int
) -> tuple[float, float]:
    kind, *cells = label.split("_")
    if kind == "T1":
        return math.ldexp(g_star, -int(cells[0])), math.inf
    if kind == "T2":
        return math.inf, l_tilde * math.ldexp(h_star, 1 - int(cells[0]))
    k, ell = int(cells[0]), int(cells[1])
    return math.ldexp(g_star, -k), l_tilde * math.ldexp(h_star, 1 - ell)


def select_and_rate(net: AsymmetricNetwork, config: Optional[Config] = None) -> Selection:
    """
    Bursty amplify-and-forward with only one class of relays switched on.

    For every nonempty class the certified rate uses the class's floor-quantized
    gains and the empirical rate uses the smallest true gains in the class; both
    take the best duty cycle. The class with the largest certified rate wins,
    ties going to the earliest class.

    Args:
        net: Asymmetric network with N >= 2
        config: Search settings (defaults if None)

    Returns:
        Selection with the winning class and all per-class rates
    """
    cfg = resolve_config(config)
    parts = partition(net)
    star = star_gains(net)
    n_relays = net.n_relays

    evaluated: list[ClassRate] = []
    for label, members in parts.nonempty_classes():
        g_cert, h_cert = _certified_gains(label, n_relays, star.g_star, star.h_star)
        certified = optimal_duty_cycle(
            SymmetricNetwork(n_relays=len(members), g=g_cert, h=h_cert), cfg
        )
        g_true = min(net.gains_g[i - 1] for i in members)
        h_true = min(net.gains_h[i - 1] for i in members)
        empirical = optimal_duty_cycle(
            SymmetricNetwork(n_relays=len(members), g=g_true, h=h_true), cfg
        )
        evaluated.append(
            ClassRate(
                class_id=label,
                size=len(members),
                certified_g=g_cert,
                certified_h=h_cert,
                delta=certified.delta,
                certified=certified.rate,
                empirical_delta=empirical.delta,
                empirical=empirical.rate,
            )
        )

    if not evaluated:
        raise PartitionError("no relay outside the overload sets")

    best = evaluated[0]
    for candidate in evaluated[1:]:
        if candidate.certified > best.certified:
            best = candidate

    members = dict(parts.nonempty_classes())[best.class_id]
    singletons = sum(1 for c in evaluated if c.size == 1)
    if singletons:
        logger.warning(
            f"{singletons} single-relay class(es) evaluated outside the N >= 2 guarantee"
        )
    return Selection(
        class_id=best.class_id,
        members=members,
        delta=best.delta,
        certified=best.certified,
        empirical=best.empirical,
        outside_guarantee=best.size == 1,
        evaluated=evaluated,
    )


def _class_upper(size: int, g: float, h: float) -> float:
    net = SymmetricNetwork(n_relays=size, g=g, h=h)
    if size == 1:
        return bc_mac_bound(net)
    return thm2_upper_bound(net).rate


def _relaxed_class_bounds(parts: Partition, star: StarGains) -> list[tuple[str, float]]:
    bounds = []
    for label, members in parts.nonempty_classes():
        g, h = _upper_gains(label, star.g_star, star.h_star, parts.L_tilde)
        bounds.append((label, _class_upper(len(members), g, h)))
    return bounds


def aggregate_upper_bound(net: AsymmetricNetwork) -> float:
    """
    L~ times the largest relaxed class bound.

    T1_ell is bounded with gains (2^-ell g*, inf), T2_ell with (inf, L~ 2^(1-ell) h*)
    and S_k_ell with (2^-k g*, L~ 2^(1-ell) h*). Single-relay classes use the
    single-relay min-cut.
    """
    parts = partition(net)
    star = star_gains(net)
    largest = max((bound for _, bound in _relaxed_class_bounds(parts, star)), default=0.0)
    return parts.L_tilde * largest


def parallel_upper_bound(net: AsymmetricNetwork) -> ParallelUpperBound:
    """
    Sum of the capacity bounds of the parallel subnetworks induced by the partition.

    Every quantized class contributes its relaxed symmetric bound. A nonempty T1
    contributes 1/2 log(1 + N^-2 g*) and a nonempty T2 contributes
    1/2 log(1 + 2 N^-1 h*). Both overload terms must be dominated by the largest
    class bound, since each is reachable with a relay inside some class.

    Raises:
        CertificateViolationError: an overload term above the largest class bound,
            or a total above the aggregate bound
    """
    n_relays = _require_pair(net)
    parts = partition(net)
    star = star_gains(net)
    class_bounds = _relaxed_class_bounds(parts, star)
    largest = max((bound for _, bound in class_bounds), default=0.0)

    t1_term = 0.5 * log2_1p(star.g_star / (n_relays * n_relays)) if parts.t1 else 0.0
    t2_term = 0.5 * log2_1p(2.0 * star.h_star / n_relays) if parts.t2 else 0.0
    total = t1_term + t2_term + math.fsum(bound for _, bound in class_bounds)
    aggregate = parts.L_tilde * largest

    result = ParallelUpperBound(
        total=total,
        t1_term=t1_term,
        t2_term=t2_term,
        class_bounds=dict(class_bounds),
        largest_class_bound=largest,
        aggregate=aggregate,
    )
    tolerance = DOMINANCE_REL_SLACK * max(1.0, largest)
    witnesses = single_relay_rates(net)
    overload = max(witnesses.source_side.rate, witnesses.destination_side.rate)
    if overload > largest + tolerance:
        raise CertificateViolationError(
            f"single-relay rate {overload:.12g} above largest class bound {largest:.12g}",
            details=result.model_dump(),
        )
    if total > aggregate * (1.0 + DOMINANCE_REL_SLACK):
        raise CertificateViolationError(
            f"parallel bound {total:.12g} above aggregate bound {aggregate:.12g}",
            details=result.model_dump(),
        )
    return result


def single_relay_rates(net: AsymmetricNetwork) -> SingleRelayRates:
    """
    The two one-relay rates that dominate the overload sets.

    1/2 log(1 + N^-2 g*) is reachable through the relay attaining g*, and
    1/2 log(1 + h*) through the relay attaining h*. Neither relay lies in an
    overload set.
    """
    n_relays = _require_pair(net)
    star = star_gains(net)
    parts = partition(net)

    source = SingleRelayRate(
        rate=0.5 * log2_1p(star.g_star / (n_relays * n_relays)),
        relay=star.g_witness,
        class_id=parts.label_of(star.g_witness),
    )
    destination = SingleRelayRate(
        rate=0.5 * log2_1p(star.h_star),
        relay=star.h_witness,
        class_id=parts.label_of(star.h_witness),
    )
    for witness in (source, destination):
        if witness.class_id in ("T1", "T2"):
            raise PartitionError(f"witness relay {witness.relay} landed in {witness.class_id}")
    return SingleRelayRates(source_side=source, destination_side=destination)


def certified_ratio(
    net: AsymmetricNetwork,
    config: Optional[Config] = None,
    selection: Optional[Selection] = None,
) -> RatioCertificate:
    """
    Ratio of the aggregate upper bound to the certified relay-selection rate.

    A selection already computed for net may be passed in to skip recomputing it.

    Raises:
        CertificateViolationError: ratio above 112 L~^2
        NumericalError: certified rate of zero
    """
    cfg = resolve_config(config)
    n_relays = _require_pair(net)
    if selection is None:
        selection = select_and_rate(net, cfg)
    upper = aggregate_upper_bound(net)
    if selection.certified <= 0.0:
        raise NumericalError(f"certified relay-selection rate is {selection.certified}")

    l_tilde = class_count(n_relays)
    bound = float(RATIO_CONSTANT * l_tilde * l_tilde)
    ratio = upper / selection.certified
    certificate = RatioCertificate(
        ratio=ratio,
        bound=bound,
        aggregate_upper=upper,
        certified=selection.certified,
        k_estimate=ratio / math.log2(n_relays) ** 4,
    )
    if ratio > bound:
        logger.error(f"Ratio certificate failed for N={n_relays}: {ratio:.6g} > {bound:.6g}")
        raise CertificateViolationError(
            f"ratio {ratio:.6g} exceeds 112 L~^2 = {bound:.6g}",
            details=certificate.model_dump(),
        )
    return certificate
