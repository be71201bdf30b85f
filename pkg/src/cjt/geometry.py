"""Ion chain geometry and boson coupling matrices.

Equilibrium positions are computed in the standard dimensionless units of a
harmonic axial trap, where the force balance for ion j reads

    u_j = sum_{k<j} 1/(u_j - u_k)^2 - sum_{k>j} 1/(u_j - u_k)^2 .

Coupling builders turn a parameter set into a :class:`CouplingMatrix`,
applying the local boson-energy shift delta_j = delta + delta_omega_j with
delta_omega_j = -sum_{l != j} t_{j,l} (computed from the unstaggered
hoppings) and, last, the staggered sign flip when requested.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError, UnstableBathError
from .model import CouplingMatrix, ModelParams, apply_staggered_transform


@dataclass(frozen=True)
class ChainGeometry:
    """Dimensionless equilibrium positions, sorted ascending."""

    positions: np.ndarray
    length_unit: float | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        if pos.ndim != 1 or pos.size < 1:
            raise ConfigError("geometry: positions must be a nonempty vector")
        if np.any(np.diff(pos) <= 0):
            raise ConfigError("geometry: positions must be strictly increasing")

    @property
    def n_sites(self):
        return self.positions.size

    @property
    def spacings(self):
        """d_j = u_j - u_{j-1}; first entry is NaN (no left neighbour)."""
        d = np.empty_like(self.positions)
        d[0] = np.nan
        d[1:] = np.diff(self.positions)
        return d


def _force_residual(u):
    """Net dimensionless force on each ion (trap plus Coulomb)."""
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    rep = np.sign(diff) / diff**2
    return u - rep.sum(axis=1)


def _force_jacobian(u):
    diff = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(diff, np.inf)
    inv3 = 1.0 / diff**3
    jac = -2.0 * inv3
    np.fill_diagonal(jac, 1.0 + 2.0 * inv3.sum(axis=1))
    return jac


def equilibrium_positions(n_sites, tol=1e-12, max_iter=200) -> ChainGeometry:
    """Solve the force balance by damped Newton iteration.

    The seed is a uniform grid with spacing 2/N^0.56, which tracks the
    minimal spacing of harmonic chains well enough for Newton to converge
    for every N up to a few hundred.  Steps are halved while they would
    increase the residual or reorder the ions.
    """
    if n_sites < 1:
        raise ConfigError("n_sites: must be >= 1")
    if n_sites == 1:
        return ChainGeometry(positions=np.zeros(1))
    spacing = 2.0 / n_sites**0.56
    u = spacing * (np.arange(n_sites) - 0.5 * (n_sites - 1))
    res = _force_residual(u)
    norm = np.max(np.abs(res))
    for _ in range(max_iter):
        if norm < tol:
            break
        step = np.linalg.solve(_force_jacobian(u), res)
        scale = 1.0
        for _ in range(60):
            trial = u - scale * step
            if np.all(np.diff(trial) > 0):
                trial_res = _force_residual(trial)
                trial_norm = np.max(np.abs(trial_res))
                if trial_norm < norm:
                    break
            scale *= 0.5
        else:
            raise ConvergenceError(
                "equilibrium positions: damped Newton stalled",
                diagnostics={"n_sites": n_sites, "residual": norm},
            )
        u, res, norm = trial, trial_res, trial_norm
    else:
        raise ConvergenceError(
            "equilibrium positions: no convergence",
            diagnostics={"n_sites": n_sites, "residual": norm},
        )
    u = u - u.mean()  # trap-centre symmetry is exact; remove rounding drift
    return ChainGeometry(positions=u)


def _separation_matrix(n_sites, boundary):
    """Integer site separations; periodic chains wrap to the shorter arc."""
    j = np.arange(n_sites)
    dist = np.abs(j[:, None] - j[None, :]).astype(float)
    if boundary == "periodic":
        dist = np.minimum(dist, n_sites - dist)
    return dist


def _finalize(params, hop_unstaggered):
    """Apply local shift and staggering, validate bath positivity."""
    delta_shift = np.zeros(params.n_sites)
    if params.include_local_shift:
        delta_shift = -hop_unstaggered.sum(axis=1)
    delta_local = params.delta_bare + delta_shift
    if np.any(delta_local <= 0):
        bad = np.flatnonzero(delta_local <= 0)
        raise UnstableBathError(
            f"local boson energies not positive at sites {bad.tolist()} "
            f"(min {delta_local.min():.6g})",
            offending=bad,
        )
    coupling = CouplingMatrix(delta_local=delta_local, hop=hop_unstaggered)
    if params.staggered:
        coupling = apply_staggered_transform(coupling)
    return coupling


def coulomb_couplings(geom: ChainGeometry, params: ModelParams) -> CouplingMatrix:
    """Couplings over the trap geometry: t_{j,l} proportional to 1/|u_j - u_l|^3.

    The overall scale comes either from ``center_hop`` (the value of the
    central bond, the convention used for inhomogeneous-chain results) or
    from ``hop_scale`` (value at unit dimensionless distance).
    """
    if params.scheme != "coulomb":
        raise ConfigError(f"model.scheme: expected coulomb, got {params.scheme}")
    n = geom.n_sites
    if n != params.n_sites:
        raise ConfigError("geometry/model size mismatch")
    u = geom.positions
    dist = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(dist, np.inf)
    hop = 1.0 / dist**3
    if params.center_hop is not None:
        lo, hi = center_bond(n)
        hop *= params.center_hop / hop[lo, hi]
    else:
        hop *= params.hop_scale
    return _finalize(params, hop)


def center_bond(n_sites):
    """Index pair of the central bond.

    Even chains use the middle pair (N/2 - 1, N/2); odd chains take the
    bond just right of the central ion, which is the tighter (larger
    hopping) of the two central bonds in a harmonic trap by symmetry, and
    deterministically fixed here.
    """
    if n_sites < 2:
        raise ConfigError("center bond undefined for a single ion")
    lo = (n_sites - 1) // 2
    return lo, lo + 1


def homogeneous_couplings(params: ModelParams) -> CouplingMatrix:
    """Equally spaced chain couplings, dipolar or nearest-neighbour.

    ``homogeneous``: t_{j,l} = t / |j-l|^3 (or only |j-l| = 1 for
    ``hop_range`` = "nearest"); ``short_range``: t_{j,l} = -t on nearest
    neighbours only.
    """
    if params.scheme not in ("homogeneous", "short_range"):
        raise ConfigError(f"model.scheme: expected homogeneous-type, got {params.scheme}")
    n = params.n_sites
    dist = _separation_matrix(n, params.boundary)
    np.fill_diagonal(dist, np.inf)
    if params.scheme == "short_range":
        hop = np.where(dist == 1.0, -params.t, 0.0)
    elif params.hop_range == "nearest":
        hop = np.where(dist == 1.0, params.t, 0.0)
    else:
        hop = params.t / dist**3
    return _finalize(params, hop)


def build_couplings(params: ModelParams) -> CouplingMatrix:
    """Assemble the coupling matrix for any scheme (geometry included)."""
    if params.scheme == "coulomb":
        geom = equilibrium_positions(params.n_sites)
        return coulomb_couplings(geom, params)
    return homogeneous_couplings(params)
