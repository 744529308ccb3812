"""Pump-only steady state of the coupled cavity-resonator system.

With the probe off and all time derivatives zero the mean-field equations
reduce to a cubic in the intracavity photon number ``n``::

    n * (kappa**2 + (Delta_p - s*n)**2) = |E_p|**2,    s = alpha * omega_n

which is multivalued (bistable) for strong enough drive when
``Delta_p**2 > 3 kappa**2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSolutionError
from .params import DriveParams, SystemParams

RESIDUAL_TOL = 1e-10
SLOPE_TOL = 1e-9
_CLUSTER_SLOPE_TOL = 1e-4
_IMAG_TOL = 1e-6
# near a double root the residual bound admits a band ~sqrt(RESIDUAL_TOL) wide
_MERGE_TOL = 1e-5


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class SteadyState:
    roots: tuple[float, ...]
    stability: tuple[Stability, ...]
    selected: int
    a0: complex
    Q0: float
    branch: int = 0
    tangency: bool = False

    @property
    def n_p(self) -> float:
        return self.roots[self.selected]


def _nonlinear_shift(sys: SystemParams) -> float:
    # alpha * omega_n == 2 lam^2 / omega_n
    return 2.0 * sys.lam**2 / sys.omega_n


def photon_number_lhs(sys: SystemParams, Delta_p: float, n):
    s = _nonlinear_shift(sys)
    return n * (sys.kappa**2 + (Delta_p - s * n) ** 2)


def photon_number_residual(sys: SystemParams, drive: DriveParams, n: float) -> float:
    """Relative residual of the photon-number condition at ``n``."""
    E2 = drive.pump_amplitude(sys) ** 2
    return abs(photon_number_lhs(sys, drive.Delta_p, n) - E2) / max(E2, 1e-300)


def _companion_roots(coeffs: Sequence[float]) -> np.ndarray:
    """Eigenvalues of the companion matrix of ``coeffs`` (highest degree first)."""
    c = np.asarray(coeffs, dtype=float)
    c = np.trim_zeros(c, "f")
    deg = len(c) - 1
    if deg < 1:
        return np.empty(0, dtype=complex)
    c = c / c[0]
    comp = np.zeros((deg, deg))
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -c[::-1][:-1]
    return np.linalg.eigvals(comp)


def _root_clusters(sys: SystemParams, drive: DriveParams) -> list[tuple[float, int]]:
    """Real roots with multiplicity.

    The cubic is rescaled by the linear-cavity occupation
    ``N = |E_p|^2 / (kappa^2 + Delta_p^2)`` so that its coefficients are O(1)
    in the weak-coupling limit, solved through companion-matrix eigenvalues and
    polished with Newton steps on the factored form. Depending on the
    strength of the nonlinearity the companion matrix is built for ``m = n/N``
    or for ``1/m`` so that its entries stay O(1).
    """
    E2 = drive.pump_amplitude(sys) ** 2
    if E2 == 0.0:
        return [(0.0, 1)]
    kappa, Delta = sys.kappa, drive.Delta_p
    s = _nonlinear_shift(sys)
    lin = kappa**2 + Delta**2
    N = E2 / lin
    sN = s * N
    # c3 m^3 + c2 m^2 + m - 1 = 0 with n = m N
    c3 = sN * sN / lin
    c2 = -2.0 * Delta * sN / lin
    # c2^2 <= 4 c3, so either form below has coefficients bounded by 2
    if c3 > 1.0:
        candidates = _companion_roots([1.0, c2 / c3, 1.0 / c3, -1.0 / c3])
    else:
        # reversed polynomial in y = 1/m; spurious y = 0 roots mean m = infinity
        ys = _companion_roots([1.0, -1.0, -c2, -c3])
        candidates = np.array([1.0 / y for y in ys if abs(y) > 1e-300])

    roots = []
    for z in candidates:
        if abs(z.imag) > _IMAG_TOL * abs(z):
            continue
        n = float(z.real) * N
        if not math.isfinite(n):
            continue
        # polish on the factored form, which avoids cancellation between terms
        for _ in range(4):
            u = Delta - s * n
            f = n * (kappa * kappa + u * u) - E2
            df = kappa * kappa + u * u - 2.0 * s * n * u
            if df == 0.0:
                break
            step = f / df
            n -= step
            if abs(step) <= 1e-16 * abs(n):
                break
        if not n >= 0:  # also drops NaN from an overflowing polish
            continue
        if abs(photon_number_lhs(sys, Delta, n) - E2) / E2 < RESIDUAL_TOL:
            roots.append(n)
    roots.sort()

    clusters: list[list[float]] = []
    for n in roots:
        if clusters and abs(n - clusters[-1][-1]) <= _MERGE_TOL * max(abs(n), 1e-300):
            mid = 0.5 * (clusters[-1][0] + n)
            # only merge roots that are indistinguishable under the residual bound
            if abs(photon_number_lhs(sys, Delta, mid) - E2) / E2 < RESIDUAL_TOL:
                clusters[-1].append(n)
                continue
        clusters.append([n])
    return [(sum(c) / len(c), len(c)) for c in clusters]


def photon_number_roots(sys: SystemParams, drive: DriveParams) -> list[float]:
    """All real non-negative solutions of the photon-number cubic, ascending.

    Roots that coincide within ``1e-5`` relative (a tangency at a fold) are
    reported once.
    """
    return [n for n, _ in _root_clusters(sys, drive)]


def photon_number_slope(sys: SystemParams, Delta_p: float, n: float) -> float:
    """d|E_p|^2/dn along the steady-state curve."""
    s = _nonlinear_shift(sys)
    u = Delta_p - s * n
    return sys.kappa**2 + u * u - 2.0 * s * n * u


def classify_stability(sys: SystemParams, drive: DriveParams, root: float,
                       tol: float = SLOPE_TOL) -> Stability:
    """Slope criterion: a root is stable iff the response curve rises there.

    Roots whose normalised slope ``n f'(n) / |E_p|^2`` is within ``tol``
    of zero (turning points) count as unstable.
    """
    E2 = drive.pump_amplitude(sys) ** 2
    slope = photon_number_slope(sys, drive.Delta_p, root)
    if E2 == 0.0 or root == 0.0:
        rel = slope / (sys.kappa**2 + drive.Delta_p**2)
    else:
        rel = slope * root / E2
    return Stability.STABLE if rel > tol else Stability.UNSTABLE


def select_branch(roots: Sequence[float], stability: Sequence[Stability],
                  hint: float | None = None) -> int:
    stable = [i for i, st in enumerate(stability) if st is Stability.STABLE]
    if not stable:
        raise DegenerateSolutionError(f"no stable steady state among roots {list(roots)}")
    if hint is None:
        return min(stable, key=lambda i: roots[i])
    return min(stable, key=lambda i: (abs(roots[i] - hint), roots[i]))


def turning_points(sys: SystemParams, Delta_p: float) -> tuple[float, float] | None:
    """Photon numbers bounding the unstable middle branch, if any."""
    s = _nonlinear_shift(sys)
    disc = Delta_p**2 - 3.0 * sys.kappa**2
    if s == 0.0 or disc <= 0.0 or Delta_p <= 0.0:
        return None
    r = math.sqrt(disc)
    return (2.0 * Delta_p - r) / (3.0 * s), (2.0 * Delta_p + r) / (3.0 * s)


def branch_label(sys: SystemParams, Delta_p: float, n: float) -> int:
    """0 on the lower (or only) branch, 1 on the middle, 2 on the upper."""
    tp = turning_points(sys, Delta_p)
    if tp is None or n <= tp[0]:
        return 0
    return 1 if n < tp[1] else 2


def steady_state(sys: SystemParams, drive: DriveParams, hint: float | None = None) -> SteadyState:
    """Solve the pump-only steady state and pick a branch.

    Without ``hint`` the lowest stable root is chosen (the branch reached by
    ramping the pump up from zero); with a hint the nearest stable root.
    """
    clusters = _root_clusters(sys, drive)
    roots = [n for n, _ in clusters]
    # merged roots sit within the cluster width of a turning point
    stability = tuple(classify_stability(sys, drive, n, _CLUSTER_SLOPE_TOL if mult > 1 else SLOPE_TOL)
                      for n, mult in clusters)
    idx = select_branch(roots, stability, hint)
    n = roots[idx]
    E_p = drive.pump_amplitude(sys)
    s = _nonlinear_shift(sys)
    a0 = E_p / complex(sys.kappa, drive.Delta_p - s * n)
    Q0 = 2.0 * sys.lam * n / sys.omega_n
    return SteadyState(
        roots=tuple(roots),
        stability=stability,
        selected=idx,
        a0=a0,
        Q0=Q0,
        branch=branch_label(sys, drive.Delta_p, n),
        tangency=len(roots) == 2,
    )


def track_branch(sys: SystemParams, drives: Iterable[DriveParams]) -> list[tuple[SteadyState, bool]]:
    """Follow one steady-state branch across an ordered sequence of drives.

    Each solve is seeded with the previous photon number. The returned flag is
    True where the followed branch ceased to exist and the solution jumped to
    the other stable branch, or where the drive sits on a tangency.
    """
    out = []
    hint = None
    prev_branch = None
    for drive in drives:
        ss = steady_state(sys, drive, hint)
        fold = ss.tangency or (prev_branch is not None and ss.branch != prev_branch)
        out.append((ss, fold))
        hint = ss.n_p
        prev_branch = ss.branch
    return out
