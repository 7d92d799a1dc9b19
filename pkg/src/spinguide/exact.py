"""Exact master-equation solver in a product of collective-spin sectors.

Every sub-ensemble is a single collective spin j_a = N_a/2: the initial
states are symmetric within each sub-ensemble and all of its atoms share one
position, so the dynamics never leaves the fully symmetric sector and the
Hilbert space dimension is prod(N_a + 1) instead of 2^N.  The dissipator is
applied in its exact two-channel form (cosine and sine quadratures of the
guided mode), which is equivalent to the full pairwise decay matrix.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .coupling import EnsembleLayout, WaveguideModel, build_matrices, jump_operator_weights
from .ode import IntegratorConfig, ObservableMap, integrate

__all__ = [
    "DEFAULT_DIM_CAP",
    "DimensionCapError",
    "CollectiveBasis",
    "CollectiveOperators",
    "CollectiveState",
    "collective_operators",
    "Liouvillian",
    "build_liouvillian",
    "initial_product_state",
    "coherent_spin_vector",
    "evolve",
]

DEFAULT_DIM_CAP = 4096


class DimensionCapError(ValueError):
    """Requested product-space dimension exceeds the configured cap."""


@dataclass(frozen=True)
class CollectiveBasis:
    """Product basis of per-sub-ensemble symmetric sectors, m ascending."""

    counts: tuple

    @classmethod
    def from_layout(cls, layout: EnsembleLayout):
        return cls(counts=tuple(layout.counts))

    @property
    def spins(self) -> tuple:
        return tuple(0.5 * n for n in self.counts)

    @property
    def dims(self) -> tuple:
        return tuple(n + 1 for n in self.counts)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))


def _ladder_minus(n: int) -> sp.csr_matrix:
    """S^- for spin j = n/2 in the basis |i> with i excited atoms (i = j + m)."""
    i = np.arange(1, n + 1, dtype=float)
    coeff = np.sqrt(i * (n - i + 1.0))
    return sp.diags(coeff, offsets=1, shape=(n + 1, n + 1), format="csr", dtype=complex)


def _embed(op, dims, index) -> sp.csr_matrix:
    """Lift a single-sector operator into the full product space."""
    full = sp.identity(1, format="csr", dtype=complex)
    for a, d in enumerate(dims):
        factor = op if a == index else sp.identity(d, format="csr", dtype=complex)
        full = sp.kron(full, factor, format="csr")
    return full


@dataclass(frozen=True)
class CollectiveOperators:
    """Per-sub-ensemble ladder and excitation-number operators (sparse)."""

    basis: CollectiveBasis
    s_minus: tuple
    s_plus: tuple
    number: tuple


def collective_operators(basis: CollectiveBasis, dim_cap: int = DEFAULT_DIM_CAP) -> CollectiveOperators:
    """Build S^-_a, S^+_a and n_a = S^z_a + j_a in the product space."""
    if basis.dimension > dim_cap:
        raise DimensionCapError(
            f"product dimension {basis.dimension} exceeds cap {dim_cap}"
        )
    dims = basis.dims
    minus, plus, number = [], [], []
    for a, n in enumerate(basis.counts):
        sm = _embed(_ladder_minus(n), dims, a)
        num = _embed(
            sp.diags(np.arange(n + 1, dtype=float), format="csr", dtype=complex), dims, a
        )
        minus.append(sm)
        plus.append(sm.conj().T.tocsr())
        number.append(num)
    return CollectiveOperators(basis=basis, s_minus=tuple(minus), s_plus=tuple(plus), number=tuple(number))


@dataclass
class CollectiveState:
    """Density matrix over the product of collective-spin sectors."""

    basis: CollectiveBasis
    rho: np.ndarray

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])

    def validate(self, trace_tol=1e-9, herm_tol=1e-12, eig_tol=1e-9):
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1 by {abs(self.trace() - 1.0):.3e}")
        if self.hermiticity_defect() > herm_tol:
            raise ValueError(f"hermiticity defect {self.hermiticity_defect():.3e}")
        if self.min_eigenvalue() < -eig_tol:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.3e}")
        return self


class Liouvillian:
    """Generator of drho/dt = i[rho, H] + L[rho] over a layout.

    The action is matrix-free (sparse operator products against a dense
    density matrix); ``materialize`` assembles the explicit D^2 x D^2 matrix
    for small dimensions.
    """

    def __init__(self, model: WaveguideModel, layout: EnsembleLayout, *,
                 channel_form: bool = True, dim_cap: int = DEFAULT_DIM_CAP):
        self.model = model
        self.layout = layout
        self.basis = CollectiveBasis.from_layout(layout)
        self.ops = collective_operators(self.basis, dim_cap)
        matrices = build_matrices(model, layout)
        self.omega = matrices.omega
        self.gamma = matrices.gamma
        dim = self.basis.dimension

        H = sp.csr_matrix((dim, dim), dtype=complex)
        n_sub = len(layout)
        for a in range(n_sub):
            for b in range(n_sub):
                if a != b and abs(self.omega[a, b]) > 1e-14 * model.gamma1d:
                    H = H + self.omega[a, b] * (self.ops.s_plus[a] @ self.ops.s_minus[b])
        self.hamiltonian = H.tocsr()

        self._pair_terms = None
        self._channels = []
        if channel_form:
            cos_w, sin_w = jump_operator_weights(model, layout)
            for weights in (cos_w, sin_w):
                if np.max(np.abs(weights)) < 1e-14 * math.sqrt(model.gamma1d):
                    continue
                C = sp.csr_matrix((dim, dim), dtype=complex)
                for a, w in enumerate(weights):
                    if abs(w) > 1e-14 * math.sqrt(model.gamma1d):
                        C = C + w * self.ops.s_minus[a]
                Cdag = C.conj().T.tocsr()
                self._channels.append((C.tocsr(), Cdag, (Cdag @ C).tocsr()))
        else:
            # Full pairwise form, kept for the rank-2 equivalence check.
            terms = []
            for a in range(n_sub):
                for b in range(n_sub):
                    g = self.gamma[a, b]
                    if abs(g) > 1e-14 * model.gamma1d:
                        terms.append(
                            (g, self.ops.s_minus[a], self.ops.s_plus[b],
                             (self.ops.s_plus[b] @ self.ops.s_minus[a]).tocsr())
                        )
            self._pair_terms = terms

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def apply(self, rho: np.ndarray) -> np.ndarray:
        H = self.hamiltonian
        out = 1j * (rho @ H - H @ rho)
        if self._pair_terms is None:
            for C, Cdag, CdC in self._channels:
                out = out + (C @ rho) @ Cdag - 0.5 * (CdC @ rho + rho @ CdC)
        else:
            for g, Sm, Sp, SpSm in self._pair_terms:
                out = out + g * ((Sm @ rho) @ Sp - 0.5 * (SpSm @ rho + rho @ SpSm))
        return out

    def matvec(self, t, y):
        dim = self.dimension
        return self.apply(y.reshape(dim, dim)).ravel()

    def materialize(self, max_dimension: int = 64) -> np.ndarray:
        dim = self.dimension
        if dim > max_dimension:
            raise DimensionCapError(
                f"refusing to materialize a {dim**2} x {dim**2} generator"
            )
        mat = np.empty((dim * dim, dim * dim), dtype=complex)
        basis_rho = np.zeros((dim, dim), dtype=complex)
        for col in range(dim * dim):
            basis_rho.flat[col] = 1.0
            mat[:, col] = self.apply(basis_rho).ravel()
            basis_rho.flat[col] = 0.0
        return mat

    def emission_operator(self) -> sp.csr_matrix:
        """sum_ab Gamma_ab S^+_a S^-_b, the waveguide photon emission rate."""
        dim = self.dimension
        out = sp.csr_matrix((dim, dim), dtype=complex)
        n_sub = len(self.layout)
        for a in range(n_sub):
            for b in range(n_sub):
                g = self.gamma[a, b]
                if abs(g) > 1e-14 * self.model.gamma1d:
                    out = out + g * (self.ops.s_plus[a] @ self.ops.s_minus[b])
        return out.tocsr()


def build_liouvillian(model: WaveguideModel, layout: EnsembleLayout, *,
                      channel_form: bool = True, dim_cap: int = DEFAULT_DIM_CAP) -> Liouvillian:
    """Generator for the layout; all atoms of a sub-ensemble share its position."""
    return Liouvillian(model, layout, channel_form=channel_form, dim_cap=dim_cap)


def coherent_spin_vector(n: int, theta: float, phi: float = 0.0) -> np.ndarray:
    """Symmetric-sector amplitudes of N identical cos|g> + e^{i phi} sin|e> atoms."""
    amp = np.zeros(n + 1, dtype=complex)
    if theta == 0.0:
        amp[0] = 1.0
        return amp
    if theta == math.pi:
        amp[n] = np.exp(1j * phi * n)
        return amp
    i = np.arange(n + 1, dtype=float)
    log_binom = (
        math.lgamma(n + 1)
        - np.array([math.lgamma(k + 1) + math.lgamma(n - k + 1) for k in range(n + 1)])
    )
    log_mag = 0.5 * log_binom + (n - i) * math.log(math.cos(0.5 * theta)) \
        + i * math.log(math.sin(0.5 * theta))
    amp[:] = np.exp(log_mag) * np.exp(1j * phi * i)
    return amp


def initial_product_state(layout: EnsembleLayout, dim_cap: int = DEFAULT_DIM_CAP) -> CollectiveState:
    """Tensor product of coherent spin states (pumped) and ground states."""
    basis = CollectiveBasis.from_layout(layout)
    if basis.dimension > dim_cap:
        raise DimensionCapError(
            f"product dimension {basis.dimension} exceeds cap {dim_cap}"
        )
    psi = np.array([1.0], dtype=complex)
    for sub in layout.subensembles:
        theta = sub.pulse_area if sub.pumped else 0.0
        psi = np.kron(psi, coherent_spin_vector(sub.count, theta, sub.pulse_phase))
    rho = np.outer(psi, psi.conj())
    return CollectiveState(basis=basis, rho=rho)


def _observable_map(lv: Liouvillian) -> ObservableMap:
    """Linear observable rows over vec(rho): populations, totals, emission."""
    layout = lv.layout
    dim = lv.dimension
    rows, names = [], []

    def row_of(op) -> np.ndarray:
        return np.asarray(op.T.todense()).ravel()

    for a, sub in enumerate(layout.subensembles):
        rows.append(row_of(lv.ops.number[a]) / sub.count)
        names.append(f"ee_{a}")
    for label, indices, total in (
        ("ee_p", layout.pumped_indices, layout.n_pumped),
        ("ee_np", layout.nonpumped_indices, layout.n_nonpumped),
    ):
        if indices:
            agg = sum(row_of(lv.ops.number[a]) for a in indices) / total
            rows.append(agg)
            names.append(label)
    rows.append(sum(row_of(op) for op in lv.ops.number))
    names.append("e_total")
    rows.append(row_of(lv.emission_operator()))
    names.append("emission")
    return ObservableMap(names, np.array(rows))


def evolve(state: CollectiveState, generator: Liouvillian, config: IntegratorConfig, *,
           t_end=None, n_state_samples: int = 8):
    """Integrate the master equation; returns (trajectory, sampled states, final state).

    Observables recorded along the way: per-sub-ensemble excited populations,
    pumped/non-pumped aggregates, total excitation and the waveguide emission
    rate.  Sampled intermediate states allow trace/hermiticity/positivity
    checks without storing the full density-matrix history.
    """
    state.validate()
    horizon = config.t_end if t_end is None else float(t_end)
    samples = np.linspace(0.0, horizon, n_state_samples + 1)[1:] if n_state_samples else ()
    traj = integrate(
        generator.matvec,
        state.rho.ravel(),
        config,
        t_end=horizon,
        obs=_observable_map(generator),
        state_sample_times=samples,
    )
    dim = generator.dimension
    sampled = [
        CollectiveState(basis=generator.basis, rho=y.reshape(dim, dim))
        for y in traj.states
    ]
    final = CollectiveState(basis=generator.basis, rho=traj.final_state.reshape(dim, dim))
    return traj, sampled, final
