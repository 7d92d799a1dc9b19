"""Dicke-state toolbox: angular-momentum coupling and lost-excitation analysis.

Decomposes a (coherently pumped) x (ground) two-ensemble product state into
total-angular-momentum states |J, M> and predicts how much excitation pure
collective decay removes before the system goes dark, all without time
integration.  Collective decay only lowers M at fixed J, so a state |J, M>
loses exactly M + J excitations on its way to the dark edge M = -J.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "clebsch_gordan",
    "ClebschGordanTable",
    "DickeDistribution",
    "decompose_initial_state",
    "predicted_lost_excitation",
    "saturation_limit",
]

PRUNE_THRESHOLD = 1e-14


def _doubled(value, name):
    """Validate a (half-)integer quantum number and return 2*value as int."""
    doubled = 2.0 * float(value)
    rounded = round(doubled)
    if abs(doubled - rounded) > 1e-9:
        raise ValueError(f"{name} = {value} is not a half-integer")
    return int(rounded)


def _validate_pair(tj, tm, jname, mname):
    if tj < 0:
        raise ValueError(f"{jname} must be non-negative")
    if abs(tm) > tj:
        raise ValueError(f"|{mname}| must not exceed {jname}")
    if (tj - tm) % 2 != 0:
        raise ValueError(f"{mname} must differ from {jname} by an integer")


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley coefficient <j1 m1 j2 m2 | J M>.

    Evaluated from the closed-form factorial sum.  Pure products of
    factorials are taken in log space (no cancellation there); alternating
    sums with more than one term are accumulated in exact rational
    arithmetic, so the result is correct to rounding at any j.
    """
    tj1, tm1 = _doubled(j1, "j1"), _doubled(m1, "m1")
    tj2, tm2 = _doubled(j2, "j2"), _doubled(m2, "m2")
    tJ, tM = _doubled(J, "J"), _doubled(M, "M")
    _validate_pair(tj1, tm1, "j1", "m1")
    _validate_pair(tj2, tm2, "j2", "m2")
    if tJ < 0:
        raise ValueError("J must be non-negative")

    if tm1 + tm2 != tM or abs(tM) > tJ:
        return 0.0
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2) or (tj1 + tj2 - tJ) % 2 != 0:
        return 0.0

    # Integer factorial arguments of the Racah formula.
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tj2 + tJ) // 2
    c = (-tj1 + tj2 + tJ) // 2
    d = (tj1 + tj2 + tJ) // 2 + 1
    e = (tJ + tM) // 2
    g = (tJ - tM) // 2
    p1 = (tj1 + tm1) // 2
    q1 = (tj1 - tm1) // 2
    p2 = (tj2 + tm2) // 2
    q2 = (tj2 - tm2) // 2
    r = (tJ - tj2 + tm1) // 2
    s = (tJ - tj1 - tm2) // 2

    k_min = max(0, -r, -s)
    k_max = min(a, q1, p2)
    if k_min > k_max:
        return 0.0

    if k_min == k_max:
        k = k_min
        log_val = 0.5 * (
            math.log(tJ + 1.0)
            + math.lgamma(a + 1) + math.lgamma(b + 1) + math.lgamma(c + 1) - math.lgamma(d + 1)
            + math.lgamma(e + 1) + math.lgamma(g + 1)
            + math.lgamma(p1 + 1) + math.lgamma(q1 + 1)
            + math.lgamma(p2 + 1) + math.lgamma(q2 + 1)
        ) - (
            math.lgamma(k + 1) + math.lgamma(a - k + 1) + math.lgamma(q1 - k + 1)
            + math.lgamma(p2 - k + 1) + math.lgamma(r + k + 1) + math.lgamma(s + k + 1)
        )
        return (-1.0) ** k * math.exp(log_val)

    ksum = Fraction(0)
    for k in range(k_min, k_max + 1):
        term = Fraction(
            1,
            math.factorial(k) * math.factorial(a - k) * math.factorial(q1 - k)
            * math.factorial(p2 - k) * math.factorial(r + k) * math.factorial(s + k),
        )
        ksum += -term if k % 2 else term
    if ksum == 0:
        return 0.0
    pref = Fraction(
        (tJ + 1)
        * math.factorial(a) * math.factorial(b) * math.factorial(c)
        * math.factorial(e) * math.factorial(g)
        * math.factorial(p1) * math.factorial(q1)
        * math.factorial(p2) * math.factorial(q2),
        math.factorial(d),
    )
    sign = 1.0 if ksum > 0 else -1.0
    return sign * math.sqrt(float(pref * ksum * ksum))


class ClebschGordanTable:
    """All coefficients <j1 m1 j2 m2 | J M> for one fixed (j1, j2) pair."""

    def __init__(self, j1, j2):
        self.j1 = float(j1)
        self.j2 = float(j2)
        self._tj1 = _doubled(j1, "j1")
        self._tj2 = _doubled(j2, "j2")
        self._cache = {}

    def coefficient(self, m1, m2, J) -> float:
        key = (_doubled(m1, "m1"), _doubled(m2, "m2"), _doubled(J, "J"))
        if key not in self._cache:
            self._cache[key] = clebsch_gordan(self.j1, m1, self.j2, m2, J, m1 + m2)
        return self._cache[key]

    def j_values(self):
        tmin, tmax = abs(self._tj1 - self._tj2), self._tj1 + self._tj2
        return [0.5 * tj for tj in range(tmin, tmax + 1, 2)]

    def orthonormality_defect(self, m1, m2) -> float:
        """|sum_J <..|J,M>^2 - 1| for one (m1, m2); zero in exact arithmetic."""
        total = sum(self.coefficient(m1, m2, J) ** 2 for J in self.j_values())
        return abs(total - 1.0)


@dataclass(frozen=True)
class DickeDistribution:
    """Populations P(J, M) of total-angular-momentum states."""

    entries: dict  # (J, M) -> population
    n_total: int

    def __post_init__(self):
        for (J, M), p in self.entries.items():
            if abs(M) > J + 1e-12 or J > 0.5 * self.n_total + 1e-12:
                raise ValueError(f"invalid Dicke labels (J={J}, M={M}) for N={self.n_total}")
            if p < -1e-12 or p > 1.0 + 1e-9:
                raise ValueError(f"population P({J},{M}) = {p} outside [0, 1]")

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def rows(self):
        """Sorted (J, M, P) rows for columnar serialization."""
        return sorted((J, M, p) for (J, M), p in self.entries.items())


def decompose_initial_state(layout) -> DickeDistribution:
    """Dicke-state populations of a two-ensemble pumped x ground product state.

    The pumped ensemble (spin j1 = N_p/2) carries a coherent spin state with
    its pulse angles; the other ensemble (spin j2) stays in |j2, -j2>, so the
    magnetic label fixes m1 = M + j2 and each (J, M) receives the single
    binomial weight |A(m1)|^2 <j1 m1 j2 -j2 | J M>^2.
    """
    subs = layout.subensembles
    if len(subs) != 2:
        raise ValueError("the Dicke decomposition requires exactly two sub-ensembles")
    pumped = [s for s in subs if s.pumped]
    ground = [s for s in subs if not s.pumped]
    if len(pumped) != 1:
        raise ValueError("exactly one sub-ensemble must be pumped")
    n_p, n_np = pumped[0].count, ground[0].count
    theta = pumped[0].pulse_area
    j1, j2 = 0.5 * n_p, 0.5 * n_np

    # |A(m1)|^2 is binomial in the excited-atom number i = j1 + m1.
    log_cos, log_sin = None, None
    if 0.0 < theta < math.pi:
        log_cos = math.log(math.cos(0.5 * theta))
        log_sin = math.log(math.sin(0.5 * theta))

    weights = {}  # excited-atom number i -> |A(m1 = i - j1)|^2
    for i in range(n_p + 1):
        if theta == 0.0:
            w = 1.0 if i == 0 else 0.0
        elif theta == math.pi:
            w = 1.0 if i == n_p else 0.0
        else:
            log_binom = math.lgamma(n_p + 1) - math.lgamma(i + 1) - math.lgamma(n_p - i + 1)
            w = math.exp(log_binom + 2 * (n_p - i) * log_cos + 2 * i * log_sin)
        if w > 1e-300:
            weights[i] = w

    entries = {}
    tj_min, tj_max = abs(int(2 * j1) - int(2 * j2)), int(2 * j1) + int(2 * j2)
    for i, w in weights.items():
        m1 = i - j1
        M = m1 - j2
        tM = round(2 * M)
        for tJ in range(max(tj_min, abs(tM)), tj_max + 1, 2):
            J = 0.5 * tJ
            cg = clebsch_gordan(j1, m1, j2, -j2, J, M)
            p = w * cg * cg
            if p >= PRUNE_THRESHOLD:
                entries[(J, M)] = entries.get((J, M), 0.0) + p
    return DickeDistribution(entries=entries, n_total=n_p + n_np)


def predicted_lost_excitation(dist: DickeDistribution) -> float:
    """Expected excitation loss sum_{J,M} P(J, M) * (M + J) under collective decay.

    Valid for the symmetric-decay, zero-exchange configuration (sub-ensemble
    spacings at multiples of the guided wavelength).
    """
    return float(sum(p * (M + J) for (J, M), p in dist.entries.items()))


def saturation_limit(n_pumped: int, n_nonpumped: int) -> float:
    """Large-N limit N_p/(N_np - N_p) of the lost excitations at full inversion."""
    if n_pumped < 0 or n_nonpumped < 0:
        raise ValueError("atom numbers must be non-negative")
    if n_pumped == 0:
        return 0.0
    if n_nonpumped <= n_pumped:
        raise ValueError(
            "saturation limit requires N_np > N_p (below the 50% subradiance threshold)"
        )
    return n_pumped / (n_nonpumped - n_pumped)
