"""
Brute-force cut-set oracle over explicit relay covariance matrices.

Everything here works from the matrix entries: submatrices are sliced out,
inverted by Gauss-Jordan elimination (or a Moore-Penrose pseudo-inverse when
the block is singular) and the generalized Schur quadratic is formed
numerically. The closed forms in ``converse`` are checked against it.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

import numpy as np

from diamondnet.achievability import LN2
from diamondnet.config import resolve_config
from diamondnet.converse import eta
from diamondnet.exceptions import EnumerationLimitError, InvalidNetworkError, NumericalError
from diamondnet.models import Config, SymmetricNetwork

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PSD_REL_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric positive semidefinite relay input covariance."""

    entries: np.ndarray
    rho: Optional[float] = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise InvalidNetworkError(f"covariance must be square (got shape {entries.shape})")
        if np.max(np.abs(entries - entries.T)) > SYMMETRY_TOL:
            raise NumericalError("covariance is not symmetric")

        trace = float(np.trace(entries))
        smallest = float(np.linalg.eigvalsh(entries)[0])
        if smallest < -PSD_REL_TOL * max(trace, 0.0):
            raise NumericalError(f"covariance not PSD (smallest eigenvalue {smallest:.3e})")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CutSubset:
    """Source-side relay set S, as sorted 1-based indices."""

    members: tuple[int, ...]
    n_relays: int

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if any(i < 1 or i > self.n_relays for i in members):
            raise InvalidNetworkError(f"cut members {members} outside 1..{self.n_relays}")
        object.__setattr__(self, "members", members)

    @property
    def complement(self) -> tuple[int, ...]:
        inside = set(self.members)
        return tuple(i for i in range(1, self.n_relays + 1) if i not in inside)

    def __len__(self) -> int:
        return len(self.members)


class GaussJordanResult(NamedTuple):
    """Batched inverse; rows flagged singular hold NaN."""

    inverse: np.ndarray
    singular: np.ndarray


class MinCut(NamedTuple):
    """Exhaustive minimum over all source-side relay subsets."""

    value: float
    subset: CutSubset
    subsets_checked: int


class EtaCheck(NamedTuple):
    """Closed-form eta against both numeric Schur quadratic paths."""

    closed: float
    numeric: float
    abs_err: float
    structured: float
    path_err: float


def _check_rho(n_relays: int, rho: float) -> None:
    if n_relays == 1:
        return
    lower = -1.0 / (n_relays - 1)
    if math.isnan(rho) or rho < lower or rho > 1.0:
        raise InvalidNetworkError(
            f"correlation {rho} outside [{lower:.6g}, 1] for N={n_relays}"
        )


def equicorrelation_matrix(n_relays: int, rho: float) -> CovarianceMatrix:
    """rho * ones + (1 - rho) * I; rho is ignored for a single relay."""
    if n_relays < 1:
        raise InvalidNetworkError(f"N must be >= 1 (got {n_relays})")
    _check_rho(n_relays, rho)
    if n_relays == 1:
        return CovarianceMatrix(np.ones((1, 1)), rho=None)
    entries = np.full((n_relays, n_relays), float(rho))
    np.fill_diagonal(entries, 1.0)
    return CovarianceMatrix(entries, rho=float(rho))


def gauss_jordan_inverse(matrices: np.ndarray, pivot_tol: float = 1e-12) -> GaussJordanResult:
    """
    Invert a stack of square matrices by Gauss-Jordan elimination with partial pivoting.

    A pivot no larger than pivot_tol times the largest entry of its matrix
    marks that matrix singular; its inverse slot is filled with NaN.

    Args:
        matrices: Array of shape (m, m) or (batch, m, m)
        pivot_tol: Relative pivot threshold

    Returns:
        GaussJordanResult with inverses and a boolean singular mask
    """
    a = np.array(matrices, dtype=float)
    single = a.ndim == 2
    if single:
        a = a[None]
    batch, m, _ = a.shape

    scale = np.abs(a).reshape(batch, -1).max(axis=1, initial=0.0)
    scale[scale == 0.0] = 1.0
    aug = np.concatenate([a, np.broadcast_to(np.eye(m), (batch, m, m))], axis=2)
    singular = np.zeros(batch, dtype=bool)
    rows = np.arange(batch)

    for col in range(m):
        pivot_rows = col + np.argmax(np.abs(aug[:, col:, col]), axis=1)
        swap = aug[rows, pivot_rows].copy()
        aug[rows, pivot_rows] = aug[:, col]
        aug[:, col] = swap

        pivot = aug[:, col, col]
        bad = np.abs(pivot) <= pivot_tol * scale
        singular |= bad
        aug[:, col] /= np.where(bad, 1.0, pivot)[:, None]

        factors = aug[:, :, col].copy()
        factors[:, col] = 0.0
        aug -= factors[:, :, None] * aug[:, col][:, None, :]

    inverse = aug[:, :, m:].copy()
    inverse[singular] = np.nan
    return GaussJordanResult(inverse[0] if single else inverse, singular[0] if single else singular)


def _clamp(values: np.ndarray, tol: float) -> np.ndarray:
    if np.any(values < -tol):
        raise NumericalError(f"Schur quadratic {float(values.min()):.3e} below -{tol:g}")
    return np.where(values < 0.0, 0.0, values)


def _batched_quadratic(
    entries: np.ndarray, inside: np.ndarray, outside: np.ndarray, cfg: Config
) -> np.ndarray:
    """1^T (Q_SS - Q_{S,Sc} Q_{Sc,Sc}^- Q_{Sc,S}) 1 for a batch of same-size subsets."""
    block_ss = entries[inside[:, :, None], inside[:, None, :]].sum(axis=(1, 2))
    if outside.shape[1] == 0:
        return block_ss

    block_cc = entries[outside[:, :, None], outside[:, None, :]]
    coupling = entries[outside[:, :, None], inside[:, None, :]].sum(axis=2)

    inverse, singular = gauss_jordan_inverse(block_cc)
    if singular.any():
        inverse[singular] = np.linalg.pinv(block_cc[singular], rcond=cfg.pinv_rcond, hermitian=True)
    explained = np.einsum("bi,bij,bj->b", coupling, inverse, coupling)
    return _clamp(block_ss - explained, cfg.negative_clamp)


def schur_quadratic(
    q: CovarianceMatrix, subset: Iterable[int], config: Optional[Config] = None
) -> float:
    """
    Generalized Schur quadratic 1^T Q_{S|S^c} 1 of a relay subset.

    Args:
        q: Relay input covariance
        subset: Source-side relays as 1-based indices
        config: Numeric settings (defaults if None)

    Returns:
        Nonnegative value; 0 for the empty set and 1^T Q 1 for all relays
    """
    cfg = resolve_config(config)
    cut = subset if isinstance(subset, CutSubset) else CutSubset(tuple(subset), q.dim)
    if len(cut) == 0:
        return 0.0
    inside = np.array([cut.members], dtype=int) - 1
    outside = np.array([cut.complement], dtype=int).reshape(1, -1) - 1
    return float(_batched_quadratic(q.entries, inside, outside, cfg)[0])


def structured_schur_quadratic(
    n_relays: int, rho: float, subset: Iterable[int], config: Optional[Config] = None
) -> float:
    """
    Schur quadratic of an equicorrelated covariance via the Sherman-Morrison inverse.

    The complement block (1 - rho) I + rho 11^T is inverted in closed form
    for rho < 1; at rho = 1 it is the all-ones block with pseudo-inverse 11^T / m^2.
    """
    cfg = resolve_config(config)
    _check_rho(n_relays, rho)
    cut = subset if isinstance(subset, CutSubset) else CutSubset(tuple(subset), n_relays)
    k = len(cut)
    m = n_relays - k
    if k == 0:
        return 0.0

    block_ss = k + k * (k - 1) * rho
    if m == 0:
        return float(block_ss)

    ones = np.ones((m, m))
    if rho == 1.0:
        inverse = ones / (m * m)
    else:
        inverse = (np.eye(m) - rho / (1.0 + (m - 1) * rho) * ones) / (1.0 - rho)
    coupling = np.full(m, k * rho)
    value = block_ss - float(coupling @ inverse @ coupling)
    return float(_clamp(np.array([value]), cfg.negative_clamp)[0])


def _subset_batches(n_relays: int, size: int, batch_size: int):
    combos = itertools.combinations(range(n_relays), size)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, batch_size)),
            dtype=np.int64,
        )
        if flat.size == 0:
            return
        yield flat.reshape(-1, size)


def brute_force_min_cut(
    net: SymmetricNetwork, rho: float, config: Optional[Config] = None
) -> MinCut:
    """
    Minimum over all 2^N source-side relay subsets of the refined cut value.

    Each subset S costs 1/2 log(1 + |S^c| g) + 1/2 log(1 + h 1^T Q_{S|S^c} 1).
    Subsets are evaluated in batches per size. Values within 1e-12 of the
    minimum tie, and the lexicographically smallest subset wins.

    Raises:
        EnumerationLimitError: N above the enumeration cap
    """
    cfg = resolve_config(config)
    net.require_finite()
    n_relays, g, h = net.n_relays, net.g, net.h
    if n_relays > cfg.max_oracle_relays:
        raise EnumerationLimitError(n_relays, cfg.max_oracle_relays)

    q = equicorrelation_matrix(n_relays, rho)
    all_relays = np.arange(n_relays)

    # Cut values per subset size, in lexicographic order within each size
    values_by_size: list[np.ndarray] = []
    for size in range(n_relays + 1):
        bc_term = 0.5 * math.log1p((n_relays - size) * g) / LN2
        chunks = []
        for inside in _subset_batches(n_relays, size, cfg.oracle_batch_size):
            batch = inside.shape[0]
            if size == 0:
                quad = np.zeros(batch)
            else:
                mask = np.zeros((batch, n_relays), dtype=bool)
                mask[np.arange(batch)[:, None], inside] = True
                outside = np.broadcast_to(all_relays, mask.shape)[~mask].reshape(
                    batch, n_relays - size
                )
                quad = _batched_quadratic(q.entries, inside, outside, cfg)
            chunks.append(bc_term + 0.5 * np.log1p(h * quad) / LN2)
        values_by_size.append(np.concatenate(chunks))

    best_value = min(float(v.min()) for v in values_by_size)
    members = None
    for size, values in enumerate(values_by_size):
        tied = np.nonzero(values <= best_value + TIE_TOL)[0]
        if tied.size == 0:
            continue
        combos = itertools.combinations(range(n_relays), size)
        combo = next(itertools.islice(combos, int(tied[0]), None))
        candidate = tuple(j + 1 for j in combo)
        if members is None or candidate < members:
            members = candidate

    checked = sum(len(v) for v in values_by_size)
    logger.debug(f"Brute-force min cut N={n_relays}, rho={rho}: {best_value:.12g} at S={members}")
    return MinCut(best_value, CutSubset(members, n_relays), checked)


def oracle_check_eta(
    n_relays: int, rho: float, n: int, config: Optional[Config] = None
) -> EtaCheck:
    """Compare eta(rho, n) with the numeric Schur quadratic of relays 1..n along both paths."""
    cfg = resolve_config(config)
    if not 2 <= n_relays <= cfg.max_oracle_relays:
        if n_relays > cfg.max_oracle_relays:
            raise EnumerationLimitError(n_relays, cfg.max_oracle_relays)
        raise InvalidNetworkError(f"oracle needs N >= 2 (got {n_relays})")
    if not 0 <= n <= n_relays:
        raise InvalidNetworkError(f"cut index {n} outside [0, {n_relays}]")

    closed = eta(rho, n, n_relays)
    members = tuple(range(1, n + 1))
    numeric = schur_quadratic(equicorrelation_matrix(n_relays, rho), members, cfg)
    structured = structured_schur_quadratic(n_relays, rho, members, cfg)
    return EtaCheck(
        closed=closed,
        numeric=numeric,
        abs_err=abs(closed - numeric),
        structured=structured,
        path_err=abs(numeric - structured),
    )
