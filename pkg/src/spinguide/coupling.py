"""Waveguide-mediated coupling between emitter sub-ensembles.

The guided mode imprints a periodic interaction kernel on the emitters:
coherent exchange at rate (gamma1d/2)*sin(k_eff*x) and collective decay at
rate gamma1d*cos(k_eff*x), with x the emitter separation.  gamma1d = 1 sets
the unit of rate (and inverse time) throughout the package, and positions
only ever enter through their mode phase k_eff*x, so they are reduced
modulo 2*pi internally.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TWO_PI",
    "WaveguideModel",
    "SubEnsemble",
    "EnsembleLayout",
    "CouplingMatrices",
    "omega_ij",
    "gamma_ij",
    "build_matrices",
    "jump_operator_weights",
    "two_ensemble_layout",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WaveguideModel:
    """Single guided mode: per-emitter decay rate into the mode and effective wavenumber.

    ``gamma1d`` is the global rate unit (default 1.0); ``k_eff`` defaults to
    ``2*pi`` so that lengths are measured in units of the guided wavelength.
    """

    gamma1d: float = 1.0
    k_eff: float = TWO_PI

    def __post_init__(self):
        if not self.gamma1d > 0:
            raise ValueError(f"gamma1d must be positive, got {self.gamma1d}")
        if not self.k_eff > 0:
            raise ValueError(f"k_eff must be positive, got {self.k_eff}")

    @property
    def lambda_eff(self) -> float:
        """Guided-mode wavelength 2*pi/k_eff."""
        return TWO_PI / self.k_eff

    def phases(self, positions) -> np.ndarray:
        """Mode phases k_eff*x reduced to [0, 2*pi)."""
        return np.mod(self.k_eff * np.asarray(positions, dtype=float), TWO_PI)


@dataclass(frozen=True)
class SubEnsemble:
    """Homogeneous group of atoms sharing one position and one initial pulse."""

    count: int
    position: float
    pulse_area: float = 0.0
    pulse_phase: float = 0.0
    pumped: bool = False

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count}")
        if self.position < 0:
            raise ValueError(f"position must be non-negative, got {self.position}")
        if not 0.0 <= self.pulse_area <= math.pi:
            raise ValueError(f"pulse_area must lie in [0, pi], got {self.pulse_area}")
        if not 0.0 <= self.pulse_phase < TWO_PI:
            raise ValueError(f"pulse_phase must lie in [0, 2*pi), got {self.pulse_phase}")
        if not self.pumped and self.pulse_area != 0.0:
            raise ValueError("non-pumped sub-ensembles must have pulse_area == 0")


@dataclass(frozen=True)
class EnsembleLayout:
    """Ordered collection of sub-ensembles; duplicate positions are allowed."""

    subensembles: tuple

    def __post_init__(self):
        subs = tuple(self.subensembles)
        object.__setattr__(self, "subensembles", subs)
        if not subs:
            raise ValueError("layout must contain at least one sub-ensemble")
        if any(not isinstance(s, SubEnsemble) for s in subs):
            raise TypeError("layout entries must be SubEnsemble instances")
        if self.n_total < 1:
            raise ValueError(f"total atom number must be >= 1, got {self.n_total}")

    def __len__(self):
        return len(self.subensembles)

    @property
    def counts(self) -> tuple:
        return tuple(s.count for s in self.subensembles)

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.subensembles], dtype=float)

    @property
    def n_total(self) -> int:
        return sum(s.count for s in self.subensembles)

    @property
    def pumped_indices(self) -> tuple:
        return tuple(a for a, s in enumerate(self.subensembles) if s.pumped)

    @property
    def nonpumped_indices(self) -> tuple:
        return tuple(a for a, s in enumerate(self.subensembles) if not s.pumped)

    @property
    def n_pumped(self) -> int:
        return sum(s.count for s in self.subensembles if s.pumped)

    @property
    def n_nonpumped(self) -> int:
        return sum(s.count for s in self.subensembles if not s.pumped)


@dataclass(frozen=True)
class CouplingMatrices:
    """Coherent (omega) and dissipative (gamma) coupling, indexed by sub-ensemble."""

    omega: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.omega.setflags(write=False)
        self.gamma.setflags(write=False)


def _phase_distance(model: WaveguideModel, x_i: float, x_j: float) -> float:
    """|phase_i - phase_j| with phases reduced to [0, 2*pi)."""
    phi = model.phases([x_i, x_j])
    return abs(phi[0] - phi[1])


def omega_ij(model: WaveguideModel, x_i: float, x_j: float) -> float:
    """Coherent exchange rate (gamma1d/2)*sin(k_eff*|x_i - x_j|)."""
    return 0.5 * model.gamma1d * math.sin(_phase_distance(model, x_i, x_j))


def gamma_ij(model: WaveguideModel, x_i: float, x_j: float) -> float:
    """Collective decay rate gamma1d*cos(k_eff*|x_i - x_j|)."""
    return model.gamma1d * math.cos(_phase_distance(model, x_i, x_j))


def build_matrices(model: WaveguideModel, layout: EnsembleLayout) -> CouplingMatrices:
    """Assemble omega/gamma over all sub-ensemble pairs.

    gamma is a Gram matrix of the 2-vectors (cos k x, sin k x), hence
    positive semidefinite with rank <= 2; omega has an exactly zero diagonal.
    """
    phi = model.phases(layout.positions)
    dphi = np.abs(phi[:, None] - phi[None, :])
    omega = 0.5 * model.gamma1d * np.sin(dphi)
    np.fill_diagonal(omega, 0.0)
    gamma = model.gamma1d * np.cos(dphi)
    return CouplingMatrices(omega=omega, gamma=gamma)


def jump_operator_weights(model: WaveguideModel, layout: EnsembleLayout):
    """Weight vectors (c, s) of the two collective decay channels.

    c_a = sqrt(gamma1d)*cos(k_eff x_a), s_a = sqrt(gamma1d)*sin(k_eff x_a);
    the full decay matrix factorizes exactly as gamma = c c^T + s s^T.
    """
    phi = model.phases(layout.positions)
    root = math.sqrt(model.gamma1d)
    return root * np.cos(phi), root * np.sin(phi)


def two_ensemble_layout(
    n_pumped: int,
    n_nonpumped: int,
    *,
    spacing: float,
    theta: float,
    phi: float = 0.0,
) -> EnsembleLayout:
    """Pumped ensemble at x = 0, ground-state ensemble at x = spacing."""
    return EnsembleLayout(
        (
            SubEnsemble(n_pumped, 0.0, pulse_area=theta, pulse_phase=phi, pumped=True),
            SubEnsemble(n_nonpumped, float(spacing)),
        )
    )
