"""Second-order cumulant equations for homogeneous sub-ensembles.

All atoms of a sub-ensemble share one position and one initial state, so
expectation values depend only on which sub-ensembles the involved atoms
belong to and on whether two operators act on the same atom.  The moment
hierarchy is therefore derived once per layout *topology* with the atom
numbers N_a kept as polynomial weights: sums over identical atoms contribute
factors N_a, N_a - 1, ... depending on how many atoms of that sub-ensemble
are already pinned by the observable.  Third-order expectation values are
closed by dropping the third joint cumulant,

    <ABC> -> <AB><C> + <AC><B> + <BC><A> - 2<A><B><C>,

which leaves a polynomial right-hand side in the first- and second-order
moments that is compiled into a flat term table and evaluated with numpy.
"""

from dataclasses import dataclass

import numpy as np

from .coupling import EnsembleLayout, WaveguideModel, build_matrices

__all__ = [
    "EG",
    "GE",
    "EE",
    "TransitionSymbol",
    "Poly",
    "MomentExpr",
    "ClosedMomentExpr",
    "adjoint_derivative",
    "cumulant_close",
    "derive_system",
    "MomentSystem",
    "reference_equation_count",
    "reduced_equation_count",
]

# Single-atom transition kinds: eg = |e><g| (raising), ge = |g><e|, ee = |e><e|.
EG, GE, EE = 0, 1, 2
_KIND_LABEL = ("eg", "ge", "ee")
_CONJ_KIND = (GE, EG, EE)

# Products of single-atom operators in the basis {identity, eg, ge, ee};
# kind None stands for the identity (from ge*eg = 1 - ee).
_PRODUCT = {
    (EG, EG): (),
    (EG, GE): ((1.0, EE),),
    (EG, EE): (),
    (GE, EG): ((1.0, None), (-1.0, EE)),
    (GE, GE): (),
    (GE, EE): ((1.0, GE),),
    (EE, EG): ((1.0, EG),),
    (EE, GE): (),
    (EE, EE): ((1.0, EE),),
}

_COEFF_TOL = 1e-14


@dataclass(frozen=True)
class TransitionSymbol:
    """Single-atom transition on one sub-ensemble.

    Repeated symbols of the same ensemble inside one product refer to
    distinct atoms of that ensemble.
    """

    kind: str
    ensemble: int

    def __post_init__(self):
        if self.kind not in _KIND_LABEL:
            raise ValueError(f"kind must be one of {_KIND_LABEL}, got {self.kind!r}")
        if self.ensemble < 0:
            raise ValueError("ensemble index must be non-negative")

    @property
    def code(self) -> int:
        return _KIND_LABEL.index(self.kind)


def _as_moment(op_product):
    """Normalize an operator product to a sorted ((ensemble, kind), ...) tuple."""
    entries = []
    for item in op_product:
        if isinstance(item, TransitionSymbol):
            entries.append((item.ensemble, item.code))
        else:
            ens, kind = item
            if kind not in (EG, GE, EE):
                kind = _KIND_LABEL.index(kind)
            entries.append((int(ens), kind))
    return tuple(sorted(entries))


def _conj_moment(moment):
    return tuple(sorted((e, _CONJ_KIND[k]) for e, k in moment))


def _canonical(moment):
    """Representative of the conjugate pair and whether conjugation is needed."""
    conj = _conj_moment(moment)
    return (moment, False) if moment <= conj else (conj, True)


def format_moment(moment) -> str:
    return "<" + " ".join(f"{_KIND_LABEL[k]}[{e}]" for e, k in moment) + ">"


class Poly:
    """Polynomial in the atom counts N_0..N_{M-1} with complex coefficients."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars, coeffs=None):
        self.nvars = nvars
        self.coeffs = dict(coeffs or {})

    @classmethod
    def constant(cls, value, nvars):
        return cls(nvars, {(0,) * nvars: complex(value)})

    def scaled(self, factor):
        return Poly(self.nvars, {e: c * factor for e, c in self.coeffs.items()})

    def add_inplace(self, other, scale=1.0):
        for e, c in other.coeffs.items():
            new = self.coeffs.get(e, 0.0) + scale * c
            if new == 0.0:
                self.coeffs.pop(e, None)
            else:
                self.coeffs[e] = new

    def times_linear(self, var, shift):
        """Multiply by (N_var - shift)."""
        out = {}
        for e, c in self.coeffs.items():
            up = list(e)
            up[var] += 1
            up = tuple(up)
            out[up] = out.get(up, 0.0) + c
            if shift:
                out[e] = out.get(e, 0.0) - shift * c
        return Poly(self.nvars, {e: c for e, c in out.items() if c != 0.0})

    def evaluate(self, counts) -> complex:
        total = 0.0 + 0.0j
        for e, c in self.coeffs.items():
            value = c
            for var, power in enumerate(e):
                if power:
                    value = value * counts[var] ** power
            total += value
        return total

    def is_zero(self, tol=0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs.values())

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            factors = [_format_complex(c)]
            for var, power in enumerate(e):
                factors.extend([f"N{var}"] * power)
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(k, 0.0) - other.coeffs.get(k, 0.0)) < 1e-12 for k in keys)

    def __repr__(self):
        return f"Poly({self.render()})"


def _format_complex(z: complex) -> str:
    if z.imag == 0.0:
        return f"({z.real:.10g})"
    if z.real == 0.0:
        return f"({z.imag:.10g}j)"
    return f"({z.real:.10g}{z.imag:+.10g}j)"


class MomentExpr:
    """Linear combination of moments <op-product> with polynomial weights."""

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = dict(terms or {})

    def add(self, moment, coeff, mult: Poly | None = None):
        poly = Poly.constant(coeff, self.nvars) if mult is None else mult.scaled(coeff)
        if moment in self.terms:
            self.terms[moment].add_inplace(poly)
            if self.terms[moment].is_zero():
                del self.terms[moment]
        else:
            if not poly.is_zero():
                self.terms[moment] = poly

    def max_order(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def __repr__(self):
        lines = [f"({p.render()})*{format_moment(m)}" for m, p in sorted(self.terms.items())]
        return " + ".join(lines) if lines else "0"


class ClosedMomentExpr:
    """Polynomial in moments: products of <= 3 first/second-order factors."""

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = dict(terms or {})  # tuple of factor moments -> Poly

    def add(self, factors, poly: Poly, scale=1.0):
        key = tuple(sorted(f for f in factors if f))
        if key in self.terms:
            self.terms[key].add_inplace(poly, scale)
            if self.terms[key].is_zero():
                del self.terms[key]
        else:
            scaled = poly.scaled(scale)
            if not scaled.is_zero():
                self.terms[key] = scaled

    def __repr__(self):
        parts = []
        for key in sorted(self.terms):
            label = "*".join(format_moment(m) for m in key) if key else "1"
            parts.append(f"({self.terms[key].render()})*{label}")
        return " + ".join(parts) if parts else "0"


def _reduce_product(sequence, ens_of_slot):
    """Normal-order a product of single-atom operators on distinct slots.

    ``sequence`` preserves the operator order; operators on different slots
    commute, so only the per-slot order matters.  Returns [(coeff, moment)].
    """
    per_slot, order = {}, []
    for slot, kind in sequence:
        if slot not in per_slot:
            per_slot[slot] = []
            order.append(slot)
        per_slot[slot].append(kind)

    branches = [(1.0, ())]
    for slot in order:
        states = [(1.0, None)]
        for kind in per_slot[slot]:
            nxt = []
            for c, cur in states:
                if cur is None:
                    nxt.append((c, kind))
                else:
                    nxt.extend((c * c2, k2) for c2, k2 in _PRODUCT[(cur, kind)])
            states = nxt
            if not states:
                break
        if not states:
            return []
        ens = ens_of_slot[slot]
        branches = [
            (bc * c, ops if kind is None else ops + ((ens, kind),))
            for bc, ops in branches
            for c, kind in states
        ]
    return [(c, tuple(sorted(ops))) for c, ops in branches]


def _index_options(ens, slots, pinned_per_ens, nvars):
    """Ways to assign one Lindblad/Hamiltonian index ranging over ensemble ``ens``.

    Yields (slot_id, multiplicity-poly-or-None): each pinned slot of the
    ensemble (multiplicity 1), plus one fresh atom carrying the combinatorial
    weight N_ens - (#pinned atoms of that ensemble).
    """
    options = [(sid, None) for sid, e in enumerate(slots) if e == ens]
    fresh = Poly.constant(1.0, nvars).times_linear(ens, pinned_per_ens.get(ens, 0))
    options.append((len(slots), fresh))  # slot id len(slots) marks "fresh"
    return options


def adjoint_derivative(op_product, omega, gamma) -> MomentExpr:
    """Exact (pre-closure) d<O>/dt for O a product of <= 2 single-atom transitions.

    Uses the adjoint master equation
        d<O>/dt = i<[H, O]> + sum_ij (Gamma_ij/2) <2 s+_i O s-_j - s+_i s-_j O - O s+_i s-_j>
    with sums over identical atoms resolved into pinned-slot terms and one
    fresh-atom term per ensemble carrying its combinatorial weight.
    """
    omega = np.asarray(omega, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    n_ens = gamma.shape[0]
    moment = _as_moment(op_product)
    if not 1 <= len(moment) <= 2:
        raise ValueError("adjoint_derivative requires an operator product of order 1 or 2")
    if any(e >= n_ens for e, _ in moment):
        raise ValueError("ensemble index outside the coupling matrices")

    slots = [e for e, _ in moment]  # slot id -> ensemble
    op_ops = [(sid, kind) for sid, (_, kind) in enumerate(moment)]
    pinned = {}
    for e in slots:
        pinned[e] = pinned.get(e, 0) + 1

    expr = MomentExpr(n_ens)
    scale = max(np.max(np.abs(gamma)), np.max(np.abs(omega)), 1.0)
    tol = _COEFF_TOL * scale

    def accumulate(sequence, ens_of_slot, coeff, mult):
        for c, red in _reduce_product(sequence, ens_of_slot):
            expr.add(red, coeff * c, mult)

    for a in range(n_ens):
        for b in range(n_ens):
            w = omega[a, b]
            g = gamma[a, b]
            do_h = a != b and abs(w) > tol
            do_g = abs(g) > tol
            if not (do_h or do_g):
                continue
            for si, mi in _index_options(a, slots, pinned, n_ens):
                for sj, mj in _index_options(b, slots, pinned, n_ens):
                    if mi is not None and mj is not None:
                        continue  # both indices fresh: contribution cancels
                    ens_of_slot = dict(enumerate(slots))
                    if mi is not None:
                        ens_of_slot[si] = a
                    if mj is not None:
                        ens_of_slot[sj] = b
                    mult = mi if mi is not None else mj
                    mult = Poly.constant(1.0, n_ens) if mult is None else mult
                    hop = [(si, EG), (sj, GE)]
                    if do_h:
                        accumulate(hop + op_ops, ens_of_slot, 1j * w, mult)
                        accumulate(op_ops + hop, ens_of_slot, -1j * w, mult)
                    if do_g:
                        accumulate([(si, EG)] + op_ops + [(sj, GE)], ens_of_slot, g, mult)
                        accumulate(hop + op_ops, ens_of_slot, -0.5 * g, mult)
                        accumulate(op_ops + hop, ens_of_slot, -0.5 * g, mult)
    return expr


def cumulant_close(expr: MomentExpr) -> ClosedMomentExpr:
    """Replace third-order expectations by their second-order closure."""
    out = ClosedMomentExpr(expr.nvars)
    for moment, poly in expr.terms.items():
        if len(moment) <= 2:
            out.add((moment,), poly)
        elif len(moment) == 3:
            A, B, C = moment
            out.add((tuple(sorted((A, B))), (C,)), poly)
            out.add((tuple(sorted((A, C))), (B,)), poly)
            out.add((tuple(sorted((B, C))), (A,)), poly)
            out.add(((A,), (B,), (C,)), poly, scale=-2.0)
        else:
            raise ValueError(f"moment of order {len(moment)} cannot appear pre-closure")
    return out


def reduced_equation_count(n_ens: int) -> int:
    """Stored moments with conjugate pairs kept once."""
    return 6 * n_ens + 5 * n_ens * (n_ens - 1) // 2


def reference_equation_count(n_ens: int) -> int:
    """Conjugate-inclusive count, the convention of the published 324/702 figures."""
    return 9 * n_ens * (n_ens + 1) // 2


def _stored_moments(n_ens):
    seen, out = set(), []
    for a in range(n_ens):
        for k in (EG, GE, EE):
            rep, _ = _canonical(((a, k),))
            if rep not in seen:
                seen.add(rep)
                out.append(rep)
    for a in range(n_ens):
        for b in range(a, n_ens):
            for k1 in (EG, GE, EE):
                for k2 in (EG, GE, EE):
                    rep, _ = _canonical(tuple(sorted(((a, k1), (b, k2)))))
                    if rep not in seen:
                        seen.add(rep)
                        out.append(rep)
    return tuple(out)


class _SymbolicSystem:
    """Equations for one layout topology, atom numbers kept symbolic."""

    def __init__(self, n_ens, omega, gamma):
        self.n_ens = n_ens
        self.omega = omega
        self.gamma = gamma
        self.variables = _stored_moments(n_ens)
        self.equations = []
        for var in self.variables:
            raw = adjoint_derivative(var, omega, gamma)
            if raw.max_order() > 3:
                raise AssertionError("derivation produced a moment above order 3")
            self.equations.append(cumulant_close(raw))


_SYMBOLIC_CACHE = {}


def _symbolic_for(model: WaveguideModel, layout: EnsembleLayout, zero_omega: bool):
    phases = tuple(np.round(model.phases(layout.positions), 12))
    key = (phases, bool(zero_omega), float(model.gamma1d))
    if key not in _SYMBOLIC_CACHE:
        matrices = build_matrices(model, layout)
        omega = np.zeros_like(matrices.omega) if zero_omega else matrices.omega
        _SYMBOLIC_CACHE[key] = _SymbolicSystem(len(layout), omega, matrices.gamma)
    return _SYMBOLIC_CACHE[key]


class MomentSystem:
    """Compiled symmetry-reduced moment equations for one layout.

    The state vector holds one complex entry per stored moment; conjugate
    moments are reconstructed on the fly.  Sub-ensembles with a single atom
    have no distinct-atom pair moments: those variables are dropped and every
    reference to them carries a vanishing (N_a - 1)-type weight, which is
    asserted at compile time.
    """

    def __init__(self, model: WaveguideModel, layout: EnsembleLayout, *, zero_omega: bool = False):
        self.model = model
        self.layout = layout
        self.zero_omega = bool(zero_omega)
        self.atom_counts = tuple(layout.counts)
        sym = _symbolic_for(model, layout, zero_omega)
        self._symbolic = sym
        counts = np.asarray(self.atom_counts, dtype=float)

        keep = []
        for m in sym.variables:
            ensembles = [e for e, _ in m]
            if len(m) == 2 and ensembles[0] == ensembles[1] and self.atom_counts[ensembles[0]] < 2:
                continue
            keep.append(m)
        self.variables = tuple(keep)
        self._index = {m: i for i, m in enumerate(self.variables)}
        n = len(self.variables)
        self._one_index = 2 * n

        eq_idx, coeffs, f0, f1, f2 = [], [], [], [], []
        for row, var in enumerate(self.variables):
            closed = sym.equations[sym.variables.index(var)]
            for factors, poly in closed.terms.items():
                value = poly.evaluate(counts)
                if abs(value) < 1e-30:
                    continue
                idxs = []
                dropped = False
                for fm in factors:
                    rep, conj = _canonical(fm)
                    if rep not in self._index:
                        dropped = True
                        break
                    idxs.append(self._index[rep] + (n if conj else 0))
                if dropped:
                    raise AssertionError(
                        "nonzero weight on a dropped single-atom pair moment"
                    )
                while len(idxs) < 3:
                    idxs.append(self._one_index)
                eq_idx.append(row)
                coeffs.append(value)
                f0.append(idxs[0])
                f1.append(idxs[1])
                f2.append(idxs[2])

        self._eq = np.asarray(eq_idx, dtype=np.intp)
        self._coeff = np.asarray(coeffs, dtype=complex)
        self._f0 = np.asarray(f0, dtype=np.intp)
        self._f1 = np.asarray(f1, dtype=np.intp)
        self._f2 = np.asarray(f2, dtype=np.intp)
        self._n = n

    # -- counting ---------------------------------------------------------
    @property
    def n_equations(self) -> int:
        return self._n

    @property
    def reduced_count(self) -> int:
        return reduced_equation_count(self._symbolic.n_ens)

    @property
    def reference_count(self) -> int:
        return reference_equation_count(self._symbolic.n_ens)

    def moment_index(self, op_product):
        """(index, conjugate?) of a first/second-order moment in the state vector."""
        rep, conj = _canonical(_as_moment(op_product))
        return self._index[rep], conj

    def moment_value(self, y, op_product) -> complex:
        idx, conj = self.moment_index(op_product)
        return complex(np.conj(y[idx]) if conj else y[idx])

    # -- numerics ---------------------------------------------------------
    def rhs(self, t, y):
        yext = np.concatenate((y, np.conj(y), (1.0 + 0.0j,)))
        prod = self._coeff * yext[self._f0]
        prod *= yext[self._f1]
        prod *= yext[self._f2]
        return (
            np.bincount(self._eq, weights=prod.real, minlength=self._n)
            + 1j * np.bincount(self._eq, weights=prod.imag, minlength=self._n)
        )

    def _first_order_value(self, sub, kind) -> complex:
        theta = sub.pulse_area if sub.pumped else 0.0
        phi = sub.pulse_phase if sub.pumped else 0.0
        s, c = np.sin(0.5 * theta), np.cos(0.5 * theta)
        if kind == EG:
            return np.exp(-1j * phi) * s * c
        if kind == GE:
            return np.exp(1j * phi) * s * c
        return complex(s * s)

    def initial_moments(self) -> np.ndarray:
        """Coherent-pulse product state: pair moments factorize exactly."""
        subs = self.layout.subensembles
        y0 = np.empty(self._n, dtype=complex)
        for m, idx in self._index.items():
            value = 1.0 + 0.0j
            for e, k in m:
                value *= self._first_order_value(subs[e], k)
            y0[idx] = value
        return y0

    def observables(self):
        """Populations, aggregates, total excitation and emission rate."""
        from .ode import ObservableMap

        layout = self.layout
        counts = self.atom_counts
        n = self._n
        rows, conj_rows, names = [], [], []

        def blank():
            return np.zeros(n, dtype=complex), np.zeros(n, dtype=complex)

        for a in range(len(layout)):
            A, B = blank()
            A[self._index[((a, EE),)]] = 1.0
            rows.append(A)
            conj_rows.append(B)
            names.append(f"ee_{a}")
        for label, indices, total in (
            ("ee_p", layout.pumped_indices, layout.n_pumped),
            ("ee_np", layout.nonpumped_indices, layout.n_nonpumped),
        ):
            if indices:
                A, B = blank()
                for a in indices:
                    A[self._index[((a, EE),)]] = counts[a] / total
                rows.append(A)
                conj_rows.append(B)
                names.append(label)
        A, B = blank()
        for a in range(len(layout)):
            A[self._index[((a, EE),)]] = counts[a]
        rows.append(A)
        conj_rows.append(B)
        names.append("e_total")

        A, B = blank()
        gamma = self._symbolic.gamma
        for a in range(len(layout)):
            for b in range(len(layout)):
                g = gamma[a, b]
                if abs(g) < _COEFF_TOL:
                    continue
                if a == b:
                    A[self._index[((a, EE),)]] += g * counts[a]
                    pair = tuple(sorted(((a, EG), (a, GE))))
                    if pair in self._index:
                        A[self._index[pair]] += g * counts[a] * (counts[a] - 1)
                else:
                    rep, conj = _canonical(tuple(sorted(((a, EG), (b, GE)))))
                    target = B if conj else A
                    target[self._index[rep]] += g * counts[a] * counts[b]
        rows.append(A)
        conj_rows.append(B)
        names.append("emission")

        return ObservableMap(names, np.array(rows), np.array(conj_rows))

    # -- audit ------------------------------------------------------------
    def render_equations(self) -> str:
        """Human-readable ODE listing with an equation count header."""
        sym = self._symbolic
        lines = [
            f"# second-order cumulant equations for {sym.n_ens} sub-ensembles",
            f"# stored moments (conjugate pairs once): {self.n_equations}",
            f"# conjugate-inclusive reference count 9*M*(M+1)/2 = {self.reference_count}",
        ]
        for var in self.variables:
            closed = sym.equations[sym.variables.index(var)]
            terms = []
            for factors in sorted(closed.terms):
                poly = closed.terms[factors]
                label = "*".join(format_moment(m) for m in factors) if factors else "1"
                terms.append(f"({poly.render()})*{label}")
            rhs = " + ".join(terms) if terms else "0"
            lines.append(f"d/dt {format_moment(var)} = {rhs}")
        return "\n".join(lines) + "\n"


def derive_system(model: WaveguideModel, layout: EnsembleLayout, *,
                  zero_omega: bool = False) -> MomentSystem:
    """Symmetry-reduced moment system with a compiled numeric right-hand side.

    ``zero_omega`` keeps the sampled decay matrix but switches the coherent
    exchange off, for isolating dissipative from dispersive effects.
    """
    return MomentSystem(model, layout, zero_omega=zero_omega)
