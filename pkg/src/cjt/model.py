"""Model definition: dimensionless parameters, coupling matrices, basis maps.

Units and sign conventions used throughout the package:

* All energies are in units of the spin splitting omega_z (so omega_z = 1.0
  unless a run deliberately rescales it).  Conversion from laboratory
  parameters happens once, in :mod:`cjt.lab`.
* The low spin state |0> is the sigma^z = -1 eigenstate.  The decoupled
  (g = 0) ground state is all spins down with energy -N*omega_z/2.
* Chiral boson species are labelled "r" and "l"; the spin raising operator
  couples to (a_r + a_l^dagger) with strength g.
"""

import json
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .errors import ConfigError, DimensionCapError

SCHEMES = ("coulomb", "homogeneous", "short_range")
HOP_RANGES = ("dipolar", "nearest")
BOUNDARIES = ("open", "periodic")

#: default cap on truncated Hilbert-space dimensions (see ed module)
DIM_CAP = 2_000_000


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless definition of the spin-boson chain.

    The coupling scheme selects how the hopping matrix is built:

    * ``coulomb``: hoppings fall off as 1/distance^3 over the trap
      equilibrium positions, scaled either so the center bond equals
      ``center_hop`` or by an absolute prefactor ``hop_scale`` (value of a
      bond at unit dimensionless distance).
    * ``homogeneous``: equally spaced chain, t/|j-l|^3 for ``hop_range``
      "dipolar" or only nearest neighbours for "nearest".
    * ``short_range``: t_{j,l} = -t for |j-l| = 1 (the small-chain test
      model; ``t`` is a magnitude).

    ``staggered`` applies the alternating-sign basis change to the hoppings
    after assembly; ``include_local_shift`` adds the local boson-energy
    renormalization delta_j = delta_bare - sum_l t_{j,l} computed from the
    unstaggered hoppings.
    """

    n_sites: int
    delta_bare: float
    g: float
    omega_z: float = 1.0
    scheme: str = "homogeneous"
    t: float | None = None
    hop_range: str = "dipolar"
    center_hop: float | None = None
    hop_scale: float | None = None
    boundary: str = "open"
    staggered: bool = False
    include_local_shift: bool = True

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ConfigError("model.n_sites: must be a positive integer")
        if self.omega_z <= 0:
            raise ConfigError("model.omega_z: must be > 0")
        if self.delta_bare <= 0:
            raise ConfigError("model.delta_bare: must be > 0")
        if self.g < 0:
            raise ConfigError("model.g: must be >= 0")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"model.scheme: must be one of {SCHEMES}")
        if self.hop_range not in HOP_RANGES:
            raise ConfigError(f"model.hop_range: must be one of {HOP_RANGES}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"model.boundary: must be one of {BOUNDARIES}")
        if self.scheme == "coulomb":
            if self.boundary == "periodic":
                raise ConfigError("model.boundary: coulomb chains are open")
            if (self.center_hop is None) == (self.hop_scale is None):
                raise ConfigError(
                    "model: coulomb scheme needs exactly one of center_hop, hop_scale"
                )
            if self.center_hop is not None and self.n_sites < 2:
                raise ConfigError(
                    "model.center_hop: no bonds to scale with n_sites = 1"
                )
        else:
            if self.t is None:
                raise ConfigError(f"model.t: required for scheme {self.scheme}")
            if self.scheme == "short_range" and self.t < 0:
                raise ConfigError("model.t: short_range takes a magnitude t >= 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"model: unknown fields {sorted(extra)}")
        return cls(**data)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CouplingMatrix:
    """On-site boson energies delta_j and symmetric hopping matrix t_{j,l}."""

    delta_local: np.ndarray
    hop: np.ndarray

    def __post_init__(self):
        delta = np.asarray(self.delta_local, dtype=float)
        hop = np.asarray(self.hop, dtype=float)
        object.__setattr__(self, "delta_local", delta)
        object.__setattr__(self, "hop", hop)
        n = delta.shape[0]
        if hop.shape != (n, n):
            raise ConfigError("coupling: hop must be N x N matching delta_local")
        if not np.allclose(hop, hop.T, atol=1e-12):
            raise ConfigError("coupling: hop must be symmetric")
        if np.any(np.abs(np.diag(hop)) > 1e-12):
            raise ConfigError("coupling: hop must have zero diagonal")

    @property
    def n_sites(self):
        return self.delta_local.shape[0]

    def matrix(self):
        """Dense one-particle matrix delta_j delta_{jl} + t_{j,l}."""
        return np.diag(self.delta_local) + self.hop


@dataclass(frozen=True)
class ChiralAmplitudePair:
    """Right/left chiral amplitudes, per mode or per site."""

    right: np.ndarray
    left: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "right", np.asarray(self.right))
        object.__setattr__(self, "left", np.asarray(self.left))
        if self.right.shape != self.left.shape:
            raise ConfigError("chiral amplitudes: right/left shapes differ")


def apply_staggered_transform(coupling: CouplingMatrix) -> CouplingMatrix:
    """Flip the sign of odd-separation hoppings: t_{j,l} -> (-1)^(j-l) t_{j,l}.

    This is the hopping-matrix image of the alternating pi rotation of odd
    sites; on-site energies are untouched and applying it twice is the
    identity.
    """
    n = coupling.n_sites
    signs = (-1.0) ** np.arange(n)
    hop = coupling.hop * np.outer(signs, signs)
    return CouplingMatrix(delta_local=coupling.delta_local.copy(), hop=hop)


def u1_charge_operator(n_sites, n_b, cap=DIM_CAP):
    """Conserved charge sum_j (n_r,j - n_l,j + sigma^z_j / 2) as a sparse matrix.

    Built in the truncated chiral product basis of :mod:`cjt.operators`;
    diagonal there, and commutes exactly with the chain Hamiltonian even at
    finite boson cutoff.
    """
    if n_b < 1:
        raise ConfigError("n_b: truncation must keep at least one excited state")
    dim = ops.hilbert_dim(n_sites, n_b)
    if dim > cap:
        raise DimensionCapError(
            f"Hilbert dimension {dim} exceeds cap {cap} (N={n_sites}, n_b={n_b})"
        )
    spin, n_r, n_l = ops.site_occupations(n_sites, n_b)
    diag = (n_r - n_l).sum(axis=1) + 0.5 * ops.SZ_DIAG[spin].sum(axis=1)
    return sp.diags(diag, format="csr")
